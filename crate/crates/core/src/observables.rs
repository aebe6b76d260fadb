//! Cloud populations and total norm.

use serde::{Deserialize, Serialize};

use crate::modes::{ModeIndex, ModeSet};
use crate::quadrature::trapezoid_norm_sqr;
use crate::state::FieldState;

/// Integrated populations at one instant. `s_ground[r]` and `p_excited[r]`
/// follow the row order of the mode set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationRecord {
    pub t: f64,
    pub mode_set: ModeSet,
    pub s_ground: Vec<f64>,
    pub p_excited: Vec<f64>,
    pub total_norm: f64,
}

impl PopulationRecord {
    /// `S_j = ∫|a_j|² dx` for even `j`, `P_j = ∫|b_j|² dx` for odd `j`.
    pub fn get(&self, j: ModeIndex) -> Option<f64> {
        if let Some(r) = self.mode_set.ground_row(j) {
            return Some(self.s_ground[r]);
        }
        self.mode_set.excited_row(j).map(|r| self.p_excited[r])
    }

    pub fn s0(&self) -> f64 {
        self.get(ModeIndex(0)).expect("static cloud is always present")
    }

    pub fn excited_total(&self) -> f64 {
        self.p_excited.iter().sum()
    }
}

pub fn populations(state: &FieldState) -> PopulationRecord {
    let h = state.spacing();
    let set = state.mode_set();
    let s_ground: Vec<f64> = (0..set.n_ground())
        .map(|r| trapezoid_norm_sqr(state.ground_row(r), h))
        .collect();
    let p_excited: Vec<f64> = (0..set.n_excited())
        .map(|r| trapezoid_norm_sqr(state.excited_row(r), h))
        .collect();
    let total_norm = s_ground.iter().sum::<f64>() + p_excited.iter().sum::<f64>();
    PopulationRecord {
        t: state.t,
        mode_set: set,
        s_ground,
        p_excited,
        total_norm,
    }
}

/// `Σ_j ∫(|a_j|² + |b_j|²) dx`.
pub fn total_norm(state: &FieldState) -> f64 {
    populations(state).total_norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn initial_state_populations() {
        let p = populations(&FieldState::initial(ModeSet::default(), 64));
        assert_eq!(p.s0(), 1.0);
        assert!(p.s_ground.iter().enumerate().all(|(r, s)| r == 5 || *s == 0.0));
        assert_eq!(p.excited_total(), 0.0);
        assert_eq!(p.total_norm, 1.0);
    }

    #[test]
    fn linear_ramp_gives_one_third() {
        let nx = 257;
        let mut s = FieldState::initial(ModeSet::default(), nx);
        let h = s.spacing();
        for (i, z) in s.a_mut(ModeIndex(2)).unwrap().iter_mut().enumerate() {
            *z = Complex64::new(i as f64 * h, 0.0);
        }
        let p = populations(&s);
        let s2 = p.get(ModeIndex(2)).unwrap();
        assert!((s2 - 1.0 / 3.0).abs() <= h * h / 6.0 + 1e-15);
        assert!((p.total_norm - p.s_ground.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn global_phase_invariance() {
        let mut s = FieldState::initial(ModeSet::new(2).unwrap(), 32);
        s.b_mut(ModeIndex(1)).unwrap()[3] = Complex64::new(0.1, 0.2);
        let rotated = s.scaled(Complex64::from_polar(1.0, 1.234));
        let (p, q) = (populations(&s), populations(&rotated));
        for (x, y) in p.s_ground.iter().zip(&q.s_ground).chain(p.p_excited.iter().zip(&q.p_excited)) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}
