//! Data-parallel helper for contour quadrature.
//!
//! Sample-point evaluations are independent, so they may run on a thread
//! pool; the results are always collected back *in index order* and reduced
//! sequentially by the caller.  That keeps every accumulation order, and
//! therefore every floating-point result, identical between the parallel
//! build (feature `parallel`, on by default) and the sequential one.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `op` over `0..n`, preserving index order in the output.
#[cfg(feature = "parallel")]
pub fn indexed_map<T, F>(n: usize, op: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map(op).collect()
}

/// Map `op` over `0..n`, preserving index order in the output.
#[cfg(not(feature = "parallel"))]
pub fn indexed_map<T, F>(n: usize, op: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(op).collect()
}

/// Sequential twin of [`indexed_map`], available in every build so the two
/// code paths can be compared bit for bit in tests and benchmarks.
pub fn indexed_map_seq<T, F>(n: usize, op: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(op).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let f = |i: usize| ((i as f64) * 0.1).sin() / ((i + 1) as f64);
        let a = indexed_map(1000, f);
        let b = indexed_map_seq(1000, f);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
