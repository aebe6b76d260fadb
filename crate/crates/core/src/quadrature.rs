//! Composite trapezoid rules on the uniform `[0, 1]` grid. Every spatial
//! integral in the crate goes through here.

use num_complex::Complex64;

/// `∫₀¹ f dx` for samples on a uniform grid with spacing `h`.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => h * (0.5 * (first + last) + inner.iter().sum::<f64>()),
    }
}

/// `∫₀¹ |f|² dx`.
pub fn trapezoid_norm_sqr(values: &[Complex64], h: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, inner @ .., last] => {
            let interior: f64 = inner.iter().map(|z| z.norm_sqr()).sum();
            h * (0.5 * (first.norm_sqr() + last.norm_sqr()) + interior)
        }
    }
}

/// Running integral `out[i] = ∫₀^{x_i} f dx`, `out[0] = 0`.
pub fn cumulative_forward(values: &[Complex64], h: f64, out: &mut [Complex64]) {
    debug_assert_eq!(values.len(), out.len());
    let half = 0.5 * h;
    let mut acc = Complex64::new(0.0, 0.0);
    out[0] = acc;
    for i in 1..values.len() {
        acc += (values[i - 1] + values[i]) * half;
        out[i] = acc;
    }
}

/// Running integral `out[i] = ∫_{x_i}^1 f dx`, `out[n-1] = 0`.
///
/// Mirrors [`cumulative_forward`] operation by operation, so reversing the
/// input reverses the output bit for bit.
pub fn cumulative_backward(values: &[Complex64], h: f64, out: &mut [Complex64]) {
    debug_assert_eq!(values.len(), out.len());
    let n = values.len();
    let half = 0.5 * h;
    let mut acc = Complex64::new(0.0, 0.0);
    out[n - 1] = acc;
    for i in (0..n - 1).rev() {
        acc += (values[i + 1] + values[i]) * half;
        out[i] = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_linears_are_exact() {
        let n = 33;
        let h = 1.0 / (n - 1) as f64;
        let ones = vec![1.0; n];
        assert!((trapezoid(&ones, h) - 1.0).abs() < 1e-15);
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
        assert!((trapezoid(&xs, h) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn backward_is_mirror_of_forward() {
        let n = 17;
        let h = 1.0 / 16.0;
        let f: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64).sqrt()))
            .collect();
        let rev: Vec<Complex64> = f.iter().rev().copied().collect();
        let mut fwd = vec![Complex64::default(); n];
        let mut bwd = vec![Complex64::default(); n];
        cumulative_forward(&rev, h, &mut fwd);
        cumulative_backward(&f, h, &mut bwd);
        for i in 0..n {
            assert_eq!(fwd[i], bwd[n - 1 - i]);
        }
    }
}
