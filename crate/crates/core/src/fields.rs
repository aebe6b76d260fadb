//! Forward and backward field envelopes.
//!
//! With retardation neglected the fields are algebraic functionals of the
//! atomic state:
//!
//! ```text
//! E⁺(x) = E0 + 2 ∫₀ˣ Σ_j b_{j+1} ā_j dx'
//! E⁻(x) = E0 + 2 ∫ₓ¹ Σ_j b_{j-1} ā_j dx'
//! ```
//!
//! summed over the even `j` of the mode set. Both integrals use the
//! cumulative trapezoid rule.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::quadrature::{cumulative_backward, cumulative_forward};
use crate::state::FieldState;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub e_plus: Vec<Complex64>,
    pub e_minus: Vec<Complex64>,
}

impl FieldPair {
    pub fn zeros(nx: usize) -> Self {
        Self {
            e_plus: vec![Complex64::default(); nx],
            e_minus: vec![Complex64::default(); nx],
        }
    }

    /// Spatially uniform `E⁺ = E⁻ = e0`.
    pub fn uniform(nx: usize, e0: f64) -> Self {
        let e = Complex64::new(e0, 0.0);
        Self {
            e_plus: vec![e; nx],
            e_minus: vec![e; nx],
        }
    }

    pub fn nx(&self) -> usize {
        self.e_plus.len()
    }
}

pub fn compute_fields(state: &FieldState, e0_now: f64) -> FieldPair {
    let mut out = FieldPair::zeros(state.nx());
    let mut scratch = FieldScratch::new(state.nx());
    fill_fields(
        state.ground_flat(),
        state.excited_flat(),
        state.nx(),
        e0_now,
        &mut scratch,
        &mut out,
    );
    out
}

/// Like [`compute_fields`] but writes into caller-owned buffers.
pub fn compute_fields_into(
    state: &FieldState,
    e0_now: f64,
    scratch: &mut FieldScratch,
    out: &mut FieldPair,
) -> Result<()> {
    let nx = state.nx();
    if out.e_plus.len() != nx || out.e_minus.len() != nx || scratch.plus.len() != nx {
        return Err(SimError::Structural(format!(
            "field buffers of length {} / {} do not match grid of {nx} points",
            out.e_plus.len(),
            out.e_minus.len()
        )));
    }
    fill_fields(
        state.ground_flat(),
        state.excited_flat(),
        nx,
        e0_now,
        scratch,
        out,
    );
    Ok(())
}

/// Integrand buffers reused across calls.
#[derive(Debug, Clone)]
pub struct FieldScratch {
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl FieldScratch {
    pub fn new(nx: usize) -> Self {
        Self {
            plus: vec![Complex64::default(); nx],
            minus: vec![Complex64::default(); nx],
        }
    }
}

/// Ground row `g` couples to excited rows `g` (j - 1) and `g + 1` (j + 1).
pub(crate) fn fill_fields(
    ground: &[Complex64],
    excited: &[Complex64],
    nx: usize,
    e0: f64,
    scratch: &mut FieldScratch,
    out: &mut FieldPair,
) {
    let n_ground = ground.len() / nx;
    let h = 1.0 / (nx - 1) as f64;
    let plus = &mut scratch.plus;
    let minus = &mut scratch.minus;
    plus.fill(Complex64::default());
    minus.fill(Complex64::default());
    for g in 0..n_ground {
        let a = &ground[g * nx..(g + 1) * nx];
        let b_below = &excited[g * nx..(g + 1) * nx];
        let b_above = &excited[(g + 1) * nx..(g + 2) * nx];
        for (((p, m), a), (bu, bd)) in plus
            .iter_mut()
            .zip(minus.iter_mut())
            .zip(a)
            .zip(b_above.iter().zip(b_below))
        {
            let ac = a.conj();
            *p += bu * ac;
            *m += bd * ac;
        }
    }
    cumulative_forward(plus, h, &mut out.e_plus);
    cumulative_backward(minus, h, &mut out.e_minus);
    let e0 = Complex64::new(e0, 0.0);
    for e in out.e_plus.iter_mut().chain(out.e_minus.iter_mut()) {
        *e = e0 + *e * 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::{ModeIndex, ModeSet};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn no_excitation_gives_incident_field() {
        let s = FieldState::initial(ModeSet::default(), 64);
        let f = compute_fields(&s, 0.3);
        assert!(f.e_plus.iter().chain(&f.e_minus).all(|e| *e == c(0.3, 0.0)));
    }

    #[test]
    fn constant_b1_gives_linear_forward_field() {
        let nx = 41;
        let mut s = FieldState::initial(ModeSet::new(2).unwrap(), nx);
        let amp = c(0.2, -0.7);
        s.b_mut(ModeIndex(1)).unwrap().fill(amp);
        let e0 = 0.05;
        let f = compute_fields(&s, e0);
        let h = 1.0 / (nx - 1) as f64;
        for i in 0..nx {
            let x = i as f64 * h;
            let expect = c(e0, 0.0) + amp * (2.0 * x);
            assert!((f.e_plus[i] - expect).norm() < 1e-14);
            assert_eq!(f.e_minus[i], c(e0, 0.0));
        }
        assert_eq!(f.e_plus[0], c(e0, 0.0));
        assert_eq!(f.e_minus[nx - 1], c(e0, 0.0));
    }

    #[test]
    fn quadratic_source_converges_at_second_order() {
        // ∫₀¹ x² dx by a 10⁶-interval composite trapezoid.
        const ORACLE_INTEGRAL: f64 = 0.333_333_333_333_500_07;
        let mut errors = Vec::new();
        for nx in [33, 65, 129, 257] {
            let mut s = FieldState::initial(ModeSet::new(0).unwrap(), nx);
            let h = 1.0 / (nx - 1) as f64;
            for (i, z) in s.b_mut(ModeIndex(1)).unwrap().iter_mut().enumerate() {
                let x = i as f64 * h;
                *z = c(x * x, 0.0);
            }
            let f = compute_fields(&s, 0.0);
            let err = (f.e_plus[nx - 1] - c(2.0 * ORACLE_INTEGRAL, 0.0)).norm();
            // Trapezoid error for x² is h²/6, doubled by the field prefactor.
            assert!((err - h * h / 3.0).abs() < 1e-11, "nx = {nx}: {err}");
            errors.push(err);
        }
        for pair in errors.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
        }
    }

    #[test]
    fn buffer_mismatch_is_structural_error() {
        let s = FieldState::initial(ModeSet::default(), 32);
        let mut out = FieldPair::zeros(16);
        let mut scratch = FieldScratch::new(32);
        assert!(matches!(
            compute_fields_into(&s, 0.0, &mut scratch, &mut out),
            Err(SimError::Structural(_))
        ));
    }
}
