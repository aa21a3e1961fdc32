//! Two-pass sample statistics for checking Monte Carlo estimates.

pub fn mean(xs: &[f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Variance with denominator n.
pub fn variance_population(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Unbiased variance with denominator n - 1.
pub fn variance_sample(xs: &[f64]) -> f64 {
    assert!(xs.len() >= 2);
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard error of the sample mean.
pub fn std_error(xs: &[f64]) -> f64 {
    (variance_sample(xs) / xs.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_values() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((mean(&xs) - 2.5).abs() < 1e-15);
        assert!((variance_population(&xs) - 1.25).abs() < 1e-15);
        assert!((variance_sample(&xs) - 5.0 / 3.0).abs() < 1e-15);
        assert!((std_error(&xs) - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_series() {
        let xs = [2.0; 10];
        assert_eq!(variance_population(&xs), 0.0);
        assert_eq!(variance_sample(&xs), 0.0);
    }
}
