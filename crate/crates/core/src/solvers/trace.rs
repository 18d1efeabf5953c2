use std::io::Write;

use crate::error::Result;

/// Column order of the trace CSV.
pub const TRACE_COLUMNS: [&str; 8] = [
    "iter",
    "sum_abs_delta",
    "log_delta_normalized",
    "max_c1_dev",
    "max_c2_dev",
    "objective_total",
    "row_residual",
    "col_residual",
];

/// Scalar diagnostics of one iterate.
///
/// `log_delta_normalized` is `ln(sum_abs_delta(l)) / ln(sum_abs_delta(1))`.
/// When the first delta is below one its logarithm is negative and the ratio
/// grows as the iteration converges; it is reported as defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub sum_abs_delta: f64,
    pub log_delta_normalized: f64,
    pub max_c1_dev: f64,
    pub max_c2_dev: f64,
    pub objective_total: f64,
    pub row_residual: f64,
    pub col_residual: f64,
    /// `sum T(l)`; not part of the CSV.
    pub mass: f64,
}

pub fn write_trace_csv<W: Write>(records: &[TraceRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for r in records {
        w.write_record([
            r.iter.to_string(),
            format!("{:?}", r.sum_abs_delta),
            format!("{:?}", r.log_delta_normalized),
            format!("{:?}", r.max_c1_dev),
            format!("{:?}", r.max_c2_dev),
            format!("{:?}", r.objective_total),
            format!("{:?}", r.row_residual),
            format!("{:?}", r.col_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}
