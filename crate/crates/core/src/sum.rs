const BLOCK: usize = 8;

/// Pairwise (tree) summation with a fixed split, so the result depends only
/// on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= BLOCK {
        values.iter().fold(0.0, |acc, v| acc + v)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_inputs_sum_sequentially() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.5]), 1.5);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
    }

    #[test]
    fn cancellation_is_better_than_naive() {
        // 1 + many tiny terms: naive left fold loses them all.
        let mut v = vec![1.0];
        v.extend(std::iter::repeat_n(1e-16, 1 << 16));
        let exact = 1.0 + 65536.0 * 1e-16;
        let naive: f64 = v.iter().sum();
        assert!((pairwise_sum(&v) - exact).abs() < (naive - exact).abs());
        assert!((pairwise_sum(&v) - exact).abs() < 1e-15);
    }
}
