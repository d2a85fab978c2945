//! Window statistics over slot streams.

use super::record::SlotRecord;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean (sample standard deviation over sqrt n).
pub fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

/// Trailing mean: entry `t` averages `xs[t + 1 - w ..= t]`, so the output
/// starts at index `w - 1` of the input and has `len - w + 1` entries.
pub fn rolling_mean(xs: &[f64], w: usize) -> Vec<f64> {
    if w == 0 || xs.len() < w {
        return Vec::new();
    }
    xs.windows(w).map(mean).collect()
}

/// Mean of `field` over the records whose slot lies in `[from, to)`.
pub fn window_mean<F: Fn(&SlotRecord) -> f64>(records: &[SlotRecord], from: usize, to: usize, field: F) -> f64 {
    let xs: Vec<f64> = records.iter().filter(|r| r.slot >= from && r.slot < to).map(field).collect();
    mean(&xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rolling_matches_direct_means() {
        let xs: Vec<f64> = (0..10).map(|k| (k * k) as f64).collect();
        let r = rolling_mean(&xs, 3);
        assert_eq!(r.len(), 8);
        assert_eq!(r[0], (0.0 + 1.0 + 4.0) / 3.0);
        assert_eq!(r[7], (49.0 + 64.0 + 81.0) / 3.0);
        assert!(rolling_mean(&xs, 11).is_empty());
    }

    #[test]
    fn standard_error_of_known_sample() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let var = 5.0 / 3.0;
        assert!((standard_error(&xs) - (var / 4.0f64).sqrt()).abs() < 1e-15);
        assert_eq!(standard_error(&[3.0]), 0.0);
    }
}
