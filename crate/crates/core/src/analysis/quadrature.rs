//! Composite rules on uniformly spaced samples.

/// Composite Simpson. An odd number of intervals is closed with Simpson's
/// 3/8 rule on the last three.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        2 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        3 => 3.0 * h / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3]),
        _ if n % 2 == 0 => {
            let mut acc = values[0] + values[n];
            for (k, f) in values.iter().enumerate().take(n).skip(1) {
                acc += if k % 2 == 1 { 4.0 * f } else { 2.0 * f };
            }
            acc * h / 3.0
        }
        _ => simpson(&values[..n - 2], h) + simpson(&values[n - 3..], h),
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            h * (0.5 * (values[0] + values[n - 1]) + inner)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(n: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        (0..=n).map(|i| f(i as f64 / n as f64)).collect()
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        for n in [2, 3, 4, 5, 8, 9] {
            let v = samples(n, |x| 4.0 * x * x * x - x + 2.0);
            assert!((simpson(&v, 1.0 / n as f64) - 2.5).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let v = samples(7, |x| 3.0 * x - 1.0);
        assert!((trapezoid(&v, 1.0 / 7.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn both_converge_on_sine() {
        let exact = 2.0 / std::f64::consts::PI;
        let v = samples(512, |x| (std::f64::consts::PI * x).sin());
        assert!((simpson(&v, 1.0 / 512.0) - exact).abs() < 1e-11);
        assert!((trapezoid(&v, 1.0 / 512.0) - exact).abs() < 1e-5);
    }
}
