//! Order-fixed pairwise summation.

use std::ops::Add;

use num_traits::Zero;

const LEAF: usize = 8;

/// Sums `values` by recursive halving. The association tree depends only on
/// the slice length, so the result is reproducible regardless of how the
/// values were produced.
pub fn pairwise_sum<V>(values: &[V]) -> V
where
    V: Copy + Zero + Add<Output = V>,
{
    if values.len() <= LEAF {
        return values.iter().fold(V::zero(), |acc, &v| acc + v);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_and_empty() {
        assert_eq!(pairwise_sum::<f64>(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn beats_naive_on_long_sums() {
        let v = vec![0.1f32; 1 << 20];
        let exact = 0.1f64 * (1 << 20) as f64;
        let naive: f32 = v.iter().sum();
        let pw = pairwise_sum(&v);
        assert!((pw as f64 - exact).abs() < (naive as f64 - exact).abs());
        assert!((pw as f64 - exact).abs() / exact < 1e-5);
    }
}
