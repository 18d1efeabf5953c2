//! Pairwise (tree) summation.
//!
//! Every reduction in the crate goes through here so that the dense and the
//! masked storage layouts visit the same terms in the same tree order and
//! therefore produce bitwise identical sums.

const BLOCK: usize = 16;

/// Pairwise sum of `term(0) + ... + term(len - 1)`.
pub fn pairwise_sum_by<F>(len: usize, term: F) -> f64
where
    F: Fn(usize) -> f64,
{
    fn rec<F: Fn(usize) -> f64>(lo: usize, hi: usize, term: &F) -> f64 {
        let len = hi - lo;
        if len <= BLOCK {
            let mut acc = 0.0;
            for k in lo..hi {
                acc += term(k);
            }
            acc
        } else {
            let mid = lo + len / 2;
            rec(lo, mid, term) + rec(mid, hi, term)
        }
    }
    rec(0, len, &term)
}

pub fn pairwise_sum(values: &[f64]) -> f64 {
    pairwise_sum_by(values.len(), |k| values[k])
}
