//! The zero pattern and the support index built from its complement.

use std::sync::Arc;

use crate::error::{InvalidInstance, ValidationIssue};

/// The set of forbidden `(source, target)` pairs.
///
/// Construction checks that every pair is in range, that no pair is listed
/// twice, and that every row and every column keeps at least one allowed
/// entry.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroPattern {
    m: usize,
    n: usize,
    forbidden: Vec<(usize, usize)>,
    mask: Vec<bool>,
}

impl ZeroPattern {
    pub fn new<I>(m: usize, n: usize, pairs: I) -> Result<Self, InvalidInstance>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut issues = Vec::new();
        if m == 0 || n == 0 {
            return Err(InvalidInstance(vec![ValidationIssue::EmptyDimension {
                m,
                n,
            }]));
        }
        let mut mask = vec![false; m * n];
        let mut forbidden = Vec::new();
        for (i, j) in pairs {
            if i >= m || j >= n {
                issues.push(ValidationIssue::PairOutOfRange { i, j });
                continue;
            }
            if mask[i * n + j] {
                issues.push(ValidationIssue::DuplicatePair { i, j });
                continue;
            }
            mask[i * n + j] = true;
            forbidden.push((i, j));
        }
        forbidden.sort_unstable();

        for i in 0..m {
            if mask[i * n..(i + 1) * n].iter().all(|&z| z) {
                issues.push(ValidationIssue::ZeroRowInPattern(i));
            }
        }
        for j in 0..n {
            if (0..m).all(|i| mask[i * n + j]) {
                issues.push(ValidationIssue::ZeroColumnInPattern(j));
            }
        }

        if issues.is_empty() {
            Ok(Self {
                m,
                n,
                forbidden,
                mask,
            })
        } else {
            Err(InvalidInstance(issues))
        }
    }

    /// The pattern with no forbidden pairs.
    pub fn empty(m: usize, n: usize) -> Self {
        Self::new(m, n, std::iter::empty()).expect("an empty pattern on a non-empty grid is valid")
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    pub fn is_forbidden(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n + j]
    }

    /// Forbidden pairs in row-major order.
    pub fn forbidden(&self) -> &[(usize, usize)] {
        &self.forbidden
    }

    pub fn len(&self) -> usize {
        self.forbidden.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forbidden.is_empty()
    }

    pub fn support(&self) -> Arc<Support> {
        Arc::new(Support::new(self))
    }
}

/// Coordinate index of the allowed entries (the complement of the pattern).
///
/// Entries are numbered in row-major order. Rows are contiguous ranges of
/// entry numbers; columns are addressed through a separate entry list with
/// rows ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    m: usize,
    n: usize,
    row_of: Vec<usize>,
    col_of: Vec<usize>,
    row_ptr: Vec<usize>,
    col_ptr: Vec<usize>,
    col_entries: Vec<usize>,
}

impl Support {
    fn new(pattern: &ZeroPattern) -> Self {
        let (m, n) = (pattern.m, pattern.n);
        let nnz = m * n - pattern.len();
        let mut row_of = Vec::with_capacity(nnz);
        let mut col_of = Vec::with_capacity(nnz);
        let mut row_ptr = Vec::with_capacity(m + 1);
        row_ptr.push(0);
        for i in 0..m {
            for j in 0..n {
                if !pattern.is_forbidden(i, j) {
                    row_of.push(i);
                    col_of.push(j);
                }
            }
            row_ptr.push(row_of.len());
        }

        let mut col_ptr = vec![0usize; n + 1];
        for &j in &col_of {
            col_ptr[j + 1] += 1;
        }
        for j in 0..n {
            col_ptr[j + 1] += col_ptr[j];
        }
        let mut fill = col_ptr.clone();
        let mut col_entries = vec![0usize; nnz];
        for (e, &j) in col_of.iter().enumerate() {
            col_entries[fill[j]] = e;
            fill[j] += 1;
        }

        Self {
            m,
            n,
            row_of,
            col_of,
            row_ptr,
            col_ptr,
            col_entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// Number of allowed entries.
    pub fn len(&self) -> usize {
        self.row_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.row_of.is_empty()
    }

    /// `(i, j)` of entry `e`.
    #[inline]
    pub fn coords(&self, e: usize) -> (usize, usize) {
        (self.row_of[e], self.col_of[e])
    }

    #[inline]
    pub fn row_of(&self, e: usize) -> usize {
        self.row_of[e]
    }

    #[inline]
    pub fn col_of(&self, e: usize) -> usize {
        self.col_of[e]
    }

    /// Entry numbers of row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        self.row_ptr[i]..self.row_ptr[i + 1]
    }

    /// Entry numbers of column `j`, rows ascending.
    #[inline]
    pub fn col_entries(&self, j: usize) -> &[usize] {
        &self.col_entries[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// Entry number of `(i, j)`, or `None` when the pair is forbidden.
    pub fn entry(&self, i: usize, j: usize) -> Option<usize> {
        let range = self.row_range(i);
        let start = range.start;
        self.col_of[range]
            .binary_search(&j)
            .ok()
            .map(|offset| start + offset)
    }

    /// Connected components of the bipartite graph whose edges are the
    /// allowed entries. Returns the component of every row and every column.
    pub fn components(&self) -> (usize, Vec<usize>, Vec<usize>) {
        let mut parent: Vec<usize> = (0..self.m + self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for e in 0..self.len() {
            let a = find(&mut parent, self.row_of[e]);
            let b = find(&mut parent, self.m + self.col_of[e]);
            if a != b {
                parent[a] = b;
            }
        }
        let mut label = vec![usize::MAX; self.m + self.n];
        let mut count = 0;
        let mut of_node = Vec::with_capacity(self.m + self.n);
        for x in 0..self.m + self.n {
            let r = find(&mut parent, x);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            of_node.push(label[r]);
        }
        let cols = of_node.split_off(self.m);
        (count, of_node, cols)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fully_forbidden_row_is_rejected() {
        let err = ZeroPattern::new(2, 2, [(0, 0), (0, 1)]).unwrap_err();
        assert_eq!(err.0, vec![ValidationIssue::ZeroRowInPattern(0)]);
    }

    #[test]
    fn reports_every_issue() {
        let err = ZeroPattern::new(2, 2, [(0, 0), (1, 0), (0, 0), (5, 1)]).unwrap_err();
        assert!(err
            .0
            .contains(&ValidationIssue::DuplicatePair { i: 0, j: 0 }));
        assert!(err
            .0
            .contains(&ValidationIssue::PairOutOfRange { i: 5, j: 1 }));
        assert!(err.0.contains(&ValidationIssue::ZeroColumnInPattern(0)));
    }

    #[test]
    fn support_indexes_rows_and_columns() {
        let z = ZeroPattern::new(2, 3, [(0, 1), (1, 2)]).unwrap();
        let s = z.support();
        assert_eq!(s.len(), 4);
        assert_eq!(s.coords(0), (0, 0));
        assert_eq!(s.coords(1), (0, 2));
        assert_eq!(s.coords(2), (1, 0));
        assert_eq!(s.row_range(1), 2..4);
        assert_eq!(s.col_entries(0), &[0, 2]);
        assert_eq!(s.col_entries(1), &[3]);
        assert_eq!(s.col_entries(2), &[1]);
        assert_eq!(s.entry(0, 1), None);
        assert_eq!(s.entry(1, 1), Some(3));
    }

    #[test]
    fn block_diagonal_support_has_two_components() {
        let z = ZeroPattern::new(2, 2, [(0, 1), (1, 0)]).unwrap();
        let (count, rows, cols) = z.support().components();
        assert_eq!(count, 2);
        assert_eq!(rows[0], cols[0]);
        assert_ne!(rows[0], rows[1]);
    }
}
