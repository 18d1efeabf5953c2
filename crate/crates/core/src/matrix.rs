//! Matrices that live on the complement of a zero pattern.

use std::sync::Arc;

use ndarray::Array2;

use crate::pattern::{Support, ZeroPattern};
use crate::sum::pairwise_sum_by;

/// Physical storage of a [`MaskedMatrix`].
///
/// `Dense` keeps all `m * n` slots (forbidden slots hold zero); `Masked`
/// keeps only the allowed entries. Reductions always walk the support index,
/// so both layouts give bitwise identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    Dense,
    #[default]
    Masked,
}

impl Layout {
    /// Dense storage is used while fewer than this fraction of the pairs are forbidden.
    pub const DEFAULT_DENSE_THRESHOLD: f64 = 0.5;

    pub fn for_pattern(pattern: &ZeroPattern, dense_threshold: f64) -> Self {
        let cells = (pattern.rows() * pattern.cols()) as f64;
        if (pattern.len() as f64) < dense_threshold * cells {
            Layout::Dense
        } else {
            Layout::Masked
        }
    }
}

/// An `m x n` real matrix that is structurally zero on a zero pattern.
#[derive(Debug, Clone)]
pub struct MaskedMatrix {
    support: Arc<Support>,
    layout: Layout,
    values: Vec<f64>,
}

impl PartialEq for MaskedMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.same_support(other) && (0..self.nnz()).all(|e| self.value(e) == other.value(e))
    }
}

impl MaskedMatrix {
    pub fn from_fn<F>(support: Arc<Support>, layout: Layout, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> f64,
    {
        let values = match layout {
            Layout::Masked => (0..support.len())
                .map(|e| {
                    let (i, j) = support.coords(e);
                    f(i, j)
                })
                .collect(),
            Layout::Dense => {
                let n = support.cols();
                let mut values = vec![0.0; support.rows() * n];
                for e in 0..support.len() {
                    let (i, j) = support.coords(e);
                    values[i * n + j] = f(i, j);
                }
                values
            }
        };
        Self {
            support,
            layout,
            values,
        }
    }

    /// Builds a matrix from values listed in support (row-major entry) order.
    pub fn from_entries(support: Arc<Support>, layout: Layout, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), support.len(), "one value per allowed entry");
        let mut out = Self::from_fn(support, layout, |_, _| 0.0);
        for (e, &x) in entries.iter().enumerate() {
            out.set(e, x);
        }
        out
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn rows(&self) -> usize {
        self.support.rows()
    }

    pub fn cols(&self) -> usize {
        self.support.cols()
    }

    /// Number of allowed entries.
    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn same_support(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.support, &other.support) || self.support == other.support
    }

    #[inline]
    fn slot(&self, e: usize) -> usize {
        match self.layout {
            Layout::Masked => e,
            Layout::Dense => {
                let (i, j) = self.support.coords(e);
                i * self.support.cols() + j
            }
        }
    }

    /// Value of allowed entry `e`.
    #[inline]
    pub fn value(&self, e: usize) -> f64 {
        self.values[self.slot(e)]
    }

    #[inline]
    pub fn set(&mut self, e: usize, x: f64) {
        let s = self.slot(e);
        self.values[s] = x;
    }

    /// Value at `(i, j)`; zero on forbidden pairs.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self.layout {
            Layout::Dense => self.values[i * self.cols() + j],
            Layout::Masked => self.support.entry(i, j).map_or(0.0, |e| self.values[e]),
        }
    }

    /// Allowed entries as `(i, j, value)` in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nnz()).map(move |e| {
            let (i, j) = self.support.coords(e);
            (i, j, self.value(e))
        })
    }

    /// Allowed values in row-major order.
    pub fn support_values(&self) -> Vec<f64> {
        (0..self.nnz()).map(|e| self.value(e)).collect()
    }

    pub fn with_layout(&self, layout: Layout) -> Self {
        Self::from_entries(self.support.clone(), layout, &self.support_values())
    }

    pub fn map<F>(&self, mut f: F) -> Self
    where
        F: FnMut(usize, usize, f64) -> f64,
    {
        let mut out = self.clone();
        for e in 0..self.nnz() {
            let (i, j) = self.support.coords(e);
            let x = f(i, j, self.value(e));
            out.set(e, x);
        }
        out
    }

    /// `diag(row) * self * diag(col)`.
    pub fn scaled(&self, row: &[f64], col: &[f64]) -> Self {
        self.map(|i, j, x| row[i] * x * col[j])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows())
            .map(|i| {
                let r = self.support.row_range(i);
                pairwise_sum_by(r.len(), |k| self.value(r.start + k))
            })
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        (0..self.cols())
            .map(|j| {
                let es = self.support.col_entries(j);
                pairwise_sum_by(es.len(), |k| self.value(es[k]))
            })
            .collect()
    }

    /// `sum_j a_ij * w_j` for every row `i`.
    pub fn row_sums_weighted(&self, w: &[f64]) -> Vec<f64> {
        (0..self.rows())
            .map(|i| {
                let r = self.support.row_range(i);
                pairwise_sum_by(r.len(), |k| {
                    let e = r.start + k;
                    self.value(e) * w[self.support.col_of(e)]
                })
            })
            .collect()
    }

    /// `sum_i w_i * a_ij` for every column `j`.
    pub fn col_sums_weighted(&self, w: &[f64]) -> Vec<f64> {
        (0..self.cols())
            .map(|j| {
                let es = self.support.col_entries(j);
                pairwise_sum_by(es.len(), |k| {
                    let e = es[k];
                    w[self.support.row_of(e)] * self.value(e)
                })
            })
            .collect()
    }

    pub fn total(&self) -> f64 {
        pairwise_sum_by(self.nnz(), |e| self.value(e))
    }

    /// `sum |a_e - b_e|` over the allowed entries.
    pub fn sum_abs_diff(&self, other: &Self) -> f64 {
        debug_assert!(self.same_support(other));
        pairwise_sum_by(self.nnz(), |e| (self.value(e) - other.value(e)).abs())
    }

    /// Smallest allowed entry (`+inf` when there are none).
    pub fn min_support(&self) -> f64 {
        (0..self.nnz())
            .map(|e| self.value(e))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn all_finite(&self) -> bool {
        (0..self.nnz()).all(|e| self.value(e).is_finite())
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.rows(), self.cols()));
        for (i, j, x) in self.entries() {
            out[[i, j]] = x;
        }
        out
    }
}
