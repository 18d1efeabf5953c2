//! JSON instance and plan files.
//!
//! Instance file:
//!
//! ```json
//! {
//!   "m": 2, "n": 2,
//!   "u_tilde": [1.0, 2.0], "v_tilde": [1.0, 2.0],
//!   "cost": [[0.0, 1.0], [1.0, 0.0]],
//!   "zero_pattern": [[1, 1]],
//!   "gamma0": 1.0, "gamma": 1.0
//! }
//! ```
//!
//! `cost` (and the optional `ideal_plan`) is either a dense `m x n` array of
//! rows or a list of `[i, j, value]` triples covering every allowed pair. An
//! array of exactly `m` rows of length `n` is read as dense, so a triple list
//! for an instance with `n = 3` must not have exactly `m` entries. Files
//! written by this crate are always dense. Unknown fields are rejected.
//!
//! Plan file: `m`, `n`, `format` (`"sparse"` or `"dense"`), `plan` (triples
//! over allowed pairs, or dense rows), `v_star`, and an optional `summary`.
//!
//! Floats are written in shortest round-trip form and read back exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{validate_instance, ProblemInstance, RawInstance, TransportPlan};
use crate::solvers::SolveReport;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    m: usize,
    n: usize,
    u_tilde: Vec<f64>,
    v_tilde: Vec<f64>,
    cost: Vec<Vec<f64>>,
    zero_pattern: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ideal_plan: Option<Vec<Vec<f64>>>,
    gamma0: f64,
    gamma: f64,
}

fn dense_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn triple_index(x: f64, bound: usize, what: &str) -> Result<usize> {
    if x >= 0.0 && x.fract() == 0.0 && (x as usize) < bound {
        Ok(x as usize)
    } else {
        Err(Error::Format(format!(
            "{what}: index {x} is not an integer in 0..{bound}"
        )))
    }
}

/// Dense rows or `[i, j, value]` triples to an `m x n` array. Forbidden pairs
/// may be omitted from triples; every allowed pair must be present.
fn matrix_field(
    rows: &[Vec<f64>],
    m: usize,
    n: usize,
    forbidden: &[(usize, usize)],
    what: &str,
) -> Result<Array2<f64>> {
    if rows.len() == m && rows.iter().all(|r| r.len() == n) {
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        return Ok(Array2::from_shape_vec((m, n), flat).expect("shape checked"));
    }
    let mut out = Array2::from_elem((m, n), f64::NAN);
    for t in rows {
        let [i, j, x] = t[..] else {
            return Err(Error::Format(format!(
                "{what}: expected {m} rows of length {n} or [i, j, value] triples"
            )));
        };
        let (i, j) = (triple_index(i, m, what)?, triple_index(j, n, what)?);
        if !out[(i, j)].is_nan() {
            return Err(Error::Format(format!(
                "{what}: pair ({i}, {j}) listed twice"
            )));
        }
        out[(i, j)] = x;
    }
    for &(i, j) in forbidden {
        if i < m && j < n && out[(i, j)].is_nan() {
            out[(i, j)] = 0.0;
        }
    }
    if let Some(((i, j), _)) = out.indexed_iter().find(|(_, x)| x.is_nan()) {
        return Err(Error::Format(format!(
            "{what}: no value for allowed pair ({i}, {j})"
        )));
    }
    Ok(out)
}

/// Parses an instance document without validating it.
pub fn parse_raw_instance(text: &str) -> Result<RawInstance> {
    let f: InstanceFile = serde_json::from_str(text)?;
    let cost = matrix_field(&f.cost, f.m, f.n, &f.zero_pattern, "cost")?;
    let ideal_plan = f
        .ideal_plan
        .as_deref()
        .map(|rows| matrix_field(rows, f.m, f.n, &f.zero_pattern, "ideal_plan"))
        .transpose()?;
    Ok(RawInstance {
        m: f.m,
        n: f.n,
        u_tilde: f.u_tilde,
        v_tilde: f.v_tilde,
        cost,
        zero_pattern: f.zero_pattern,
        ideal_plan,
        gamma0: f.gamma0,
        gamma: f.gamma,
    })
}

pub fn read_instance<R: Read>(mut reader: R) -> Result<ProblemInstance> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    Ok(validate_instance(&parse_raw_instance(&text)?)?)
}

pub fn read_instance_file(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    read_instance(BufReader::new(File::open(path)?))
}

pub fn write_raw_instance<W: Write>(raw: &RawInstance, mut writer: W) -> Result<()> {
    let f = InstanceFile {
        m: raw.m,
        n: raw.n,
        u_tilde: raw.u_tilde.clone(),
        v_tilde: raw.v_tilde.clone(),
        cost: dense_rows(&raw.cost),
        zero_pattern: raw.zero_pattern.clone(),
        ideal_plan: raw.ideal_plan.as_ref().map(dense_rows),
        gamma0: raw.gamma0,
        gamma: raw.gamma,
    };
    serde_json::to_writer(&mut writer, &f)?;
    writeln!(writer)?;
    Ok(())
}

pub fn write_instance<W: Write>(inst: &ProblemInstance, writer: W) -> Result<()> {
    write_raw_instance(&inst.to_raw(), writer)
}

pub fn write_instance_file(inst: &ProblemInstance, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_instance(inst, &mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanFormat {
    /// `[i, j, value]` over the allowed pairs.
    #[default]
    Sparse,
    /// `m` rows of `n` values, zeros on the pattern.
    Dense,
}

/// Solver metadata stored next to a plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSummary {
    pub algorithm: String,
    pub iterations: usize,
    pub termination: String,
    pub max_c1_dev: f64,
    pub max_c2_dev: f64,
    pub relative_delta: f64,
    pub row_residual: f64,
    pub col_residual: f64,
}

impl PlanSummary {
    pub fn from_report(report: &SolveReport) -> Self {
        Self {
            algorithm: report.algorithm.name().to_string(),
            iterations: report.iterations,
            termination: report.termination.name().to_string(),
            max_c1_dev: report.residuals.max_c1_dev,
            max_c2_dev: report.residuals.max_c2_dev,
            relative_delta: report.residuals.relative_delta,
            row_residual: report.residuals.row_residual,
            col_residual: report.residuals.col_residual,
        }
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum PlanEntriesOut {
    Sparse(Vec<(usize, usize, f64)>),
    Dense(Vec<Vec<f64>>),
}

#[derive(Debug, Serialize)]
struct PlanFileOut<'a> {
    m: usize,
    n: usize,
    format: PlanFormat,
    plan: PlanEntriesOut,
    v_star: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    summary: Option<&'a PlanSummary>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFileIn {
    m: usize,
    n: usize,
    format: PlanFormat,
    plan: Vec<Vec<f64>>,
    v_star: Vec<f64>,
    #[serde(default)]
    summary: Option<PlanSummary>,
}

/// A plan as stored on disk: dense values (zeros where absent) and `v*`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanData {
    pub plan: Array2<f64>,
    pub v_star: Vec<f64>,
    pub summary: Option<PlanSummary>,
}

impl PlanData {
    /// The plan restricted to the instance's allowed pairs. Values on
    /// forbidden pairs are dropped; check them with
    /// [`crate::verify::check_positivity`] on [`Self::full_plan`] first.
    pub fn to_transport_plan(&self, inst: &ProblemInstance) -> Result<TransportPlan> {
        if self.plan.dim() != (inst.rows(), inst.cols()) {
            return Err(Error::PatternMismatch);
        }
        TransportPlan::from_dense(inst.support().clone(), inst.layout(), &self.plan)
    }

    /// The plan on the full grid, forbidden pairs included.
    pub fn full_plan(&self) -> Result<TransportPlan> {
        let (m, n) = self.plan.dim();
        let support = crate::pattern::ZeroPattern::empty(m, n).support();
        TransportPlan::from_dense(support, crate::matrix::Layout::Dense, &self.plan)
    }
}

pub fn write_plan<W: Write>(
    plan: &TransportPlan,
    v_star: &[f64],
    summary: Option<&PlanSummary>,
    format: PlanFormat,
    mut writer: W,
) -> Result<()> {
    let entries = match format {
        PlanFormat::Sparse => PlanEntriesOut::Sparse(plan.entries().collect()),
        PlanFormat::Dense => PlanEntriesOut::Dense(dense_rows(&plan.to_dense())),
    };
    let out = PlanFileOut {
        m: plan.rows(),
        n: plan.cols(),
        format,
        plan: entries,
        v_star,
        summary,
    };
    serde_json::to_writer(&mut writer, &out)?;
    writeln!(writer)?;
    Ok(())
}

pub fn write_plan_file(
    report: &SolveReport,
    format: PlanFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let summary = PlanSummary::from_report(report);
    write_plan(&report.plan, &report.v_star, Some(&summary), format, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn read_plan<R: Read>(mut reader: R) -> Result<PlanData> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let f: PlanFileIn = serde_json::from_str(&text)?;
    if f.v_star.len() != f.n {
        return Err(Error::Format(format!(
            "v_star has {} entries, expected {}",
            f.v_star.len(),
            f.n
        )));
    }
    let plan = match f.format {
        PlanFormat::Dense => {
            if f.plan.len() != f.m || f.plan.iter().any(|r| r.len() != f.n) {
                return Err(Error::Format(format!(
                    "dense plan must have {} rows of length {}",
                    f.m, f.n
                )));
            }
            let flat: Vec<f64> = f.plan.into_iter().flatten().collect();
            Array2::from_shape_vec((f.m, f.n), flat).expect("shape checked")
        }
        PlanFormat::Sparse => {
            let mut out = Array2::zeros((f.m, f.n));
            let mut seen = Array2::from_elem((f.m, f.n), false);
            for t in &f.plan {
                let [i, j, x] = t[..] else {
                    return Err(Error::Format(
                        "sparse plan entries must be [i, j, value]".into(),
                    ));
                };
                let (i, j) = (triple_index(i, f.m, "plan")?, triple_index(j, f.n, "plan")?);
                if std::mem::replace(&mut seen[(i, j)], true) {
                    return Err(Error::Format(format!("plan: pair ({i}, {j}) listed twice")));
                }
                out[(i, j)] = x;
            }
            out
        }
    };
    Ok(PlanData {
        plan,
        v_star: f.v_star,
        summary: f.summary,
    })
}

pub fn read_plan_file(path: impl AsRef<Path>) -> Result<PlanData> {
    read_plan(BufReader::new(File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ValidationIssue;

    const SMALL: &str = r#"{"m": 2, "n": 2, "u_tilde": [1, 2], "v_tilde": [1, 2],
        "cost": [[0.5, 1.5], [0.25, 9]], "zero_pattern": [[1, 1]], "gamma0": 1, "gamma": 2}"#;

    #[test]
    fn dense_cost() {
        let raw = parse_raw_instance(SMALL).unwrap();
        assert_eq!(raw.cost[(1, 0)], 0.25);
        assert_eq!(raw.zero_pattern, vec![(1, 1)]);
        assert!(raw.ideal_plan.is_none());
    }

    #[test]
    fn sparse_cost_may_skip_forbidden_pairs() {
        let text = SMALL.replace(
            "[[0.5, 1.5], [0.25, 9]]",
            "[[0, 0, 0.5], [0, 1, 1.5], [1, 0, 0.25]]",
        );
        let raw = parse_raw_instance(&text).unwrap();
        assert_eq!(raw.cost[(0, 1)], 1.5);
        assert_eq!(raw.cost[(1, 1)], 0.0);
    }

    #[test]
    fn sparse_cost_missing_allowed_pair() {
        let text = SMALL.replace("[[0.5, 1.5], [0.25, 9]]", "[[0, 0, 0.5], [1, 0, 0.25]]");
        let err = parse_raw_instance(&text).unwrap_err();
        assert!(err.to_string().contains("(0, 1)"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = SMALL.replace("\"gamma\": 2", "\"gamma\": 2, \"seed\": 3");
        assert!(matches!(parse_raw_instance(&text), Err(Error::Json(_))));
    }

    #[test]
    fn validation_errors_surface() {
        let text = SMALL.replace("[[1, 1]]", "[[1, 1], [1, 0]]");
        match read_instance(text.as_bytes()) {
            Err(Error::Invalid(e)) => assert_eq!(e.0, vec![ValidationIssue::ZeroRowInPattern(1)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn instance_round_trip() {
        let inst = read_instance(SMALL.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_instance(&inst, &mut buf).unwrap();
        assert_eq!(read_instance(&buf[..]).unwrap(), inst);
    }

    #[test]
    fn plan_round_trip_both_formats() {
        let inst = read_instance(SMALL.as_bytes()).unwrap();
        let plan = TransportPlan::product(
            inst.support().clone(),
            inst.layout(),
            &[1.0 / 3.0, 2.0],
            &[0.1, 0.7],
        );
        for format in [PlanFormat::Sparse, PlanFormat::Dense] {
            let mut buf = Vec::new();
            write_plan(&plan, &[0.1, 0.2], None, format, &mut buf).unwrap();
            let back = read_plan(&buf[..]).unwrap();
            assert_eq!(back.to_transport_plan(&inst).unwrap(), plan);
            assert_eq!(back.v_star, vec![0.1, 0.2]);
        }
    }
}
