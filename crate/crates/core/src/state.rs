//! Amplitudes of all clouds on the shared spatial grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::modes::{ModeIndex, ModeSet};

/// Envelope amplitudes `a_j(x)` (even `j`) and `b_j(x)` (odd `j`) at time `t`.
///
/// Rows are contiguous slices of length `nx` in ascending `j`; see
/// [`ModeSet`] for the row layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    mode_set: ModeSet,
    nx: usize,
    ground: Vec<Complex64>,
    excited: Vec<Complex64>,
}

impl FieldState {
    pub fn zeros(mode_set: ModeSet, nx: usize) -> Self {
        Self {
            t: 0.0,
            mode_set,
            nx,
            ground: vec![Complex64::default(); mode_set.n_ground() * nx],
            excited: vec![Complex64::default(); mode_set.n_excited() * nx],
        }
    }

    /// The condensate at rest: `a0 ≡ 1`, everything else zero, `t = 0`.
    pub fn initial(mode_set: ModeSet, nx: usize) -> Self {
        let mut state = Self::zeros(mode_set, nx);
        state
            .a_mut(ModeIndex(0))
            .expect("j = 0 is always present")
            .fill(Complex64::new(1.0, 0.0));
        state
    }

    /// Builds a state from explicit rows, checking every length.
    pub fn from_rows(
        t: f64,
        mode_set: ModeSet,
        ground: Vec<Vec<Complex64>>,
        excited: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if ground.len() != mode_set.n_ground() || excited.len() != mode_set.n_excited() {
            return Err(SimError::Structural(format!(
                "expected {} ground and {} excited rows, got {} and {}",
                mode_set.n_ground(),
                mode_set.n_excited(),
                ground.len(),
                excited.len()
            )));
        }
        let nx = ground[0].len();
        if ground.iter().chain(excited.iter()).any(|row| row.len() != nx) {
            return Err(SimError::Structural(
                "amplitude rows do not share one grid".to_string(),
            ));
        }
        Ok(Self {
            t,
            mode_set,
            nx,
            ground: ground.concat(),
            excited: excited.concat(),
        })
    }

    pub fn mode_set(&self) -> ModeSet {
        self.mode_set
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.nx - 1) as f64
    }

    pub fn a(&self, j: ModeIndex) -> Option<&[Complex64]> {
        self.mode_set.ground_row(j).map(|r| self.ground_row(r))
    }

    pub fn a_mut(&mut self, j: ModeIndex) -> Option<&mut [Complex64]> {
        let nx = self.nx;
        self.mode_set
            .ground_row(j)
            .map(move |r| &mut self.ground[r * nx..(r + 1) * nx])
    }

    pub fn b(&self, j: ModeIndex) -> Option<&[Complex64]> {
        self.mode_set.excited_row(j).map(|r| self.excited_row(r))
    }

    pub fn b_mut(&mut self, j: ModeIndex) -> Option<&mut [Complex64]> {
        let nx = self.nx;
        self.mode_set
            .excited_row(j)
            .map(move |r| &mut self.excited[r * nx..(r + 1) * nx])
    }

    pub fn ground_row(&self, row: usize) -> &[Complex64] {
        &self.ground[row * self.nx..(row + 1) * self.nx]
    }

    pub fn excited_row(&self, row: usize) -> &[Complex64] {
        &self.excited[row * self.nx..(row + 1) * self.nx]
    }

    pub fn ground_flat(&self) -> &[Complex64] {
        &self.ground
    }

    pub fn excited_flat(&self) -> &[Complex64] {
        &self.excited
    }

    pub(crate) fn flat_mut(&mut self) -> (&mut [Complex64], &mut [Complex64]) {
        (&mut self.ground, &mut self.excited)
    }

    pub fn is_finite(&self) -> bool {
        self.ground
            .iter()
            .chain(self.excited.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest `|b_j(x)|` over all excited modes and grid points.
    pub fn max_excited_amplitude(&self) -> f64 {
        self.excited
            .iter()
            .map(|z| z.norm_sqr())
            .fold(0.0, f64::max)
            .sqrt()
    }

    pub(crate) fn clear_excited(&mut self) {
        self.excited.fill(Complex64::default());
    }

    /// Image under `x → 1 - x`, `j → -j`. The equations of motion commute
    /// with this map.
    pub fn mirrored(&self) -> Self {
        let mut out = Self::zeros(self.mode_set, self.nx);
        out.t = self.t;
        let nx = self.nx;
        let flip = |src: &[Complex64], dst: &mut [Complex64]| {
            let rows = src.len() / nx;
            for r in 0..rows {
                let from = &src[r * nx..(r + 1) * nx];
                let to = &mut dst[(rows - 1 - r) * nx..(rows - r) * nx];
                for (d, s) in to.iter_mut().zip(from.iter().rev()) {
                    *d = *s;
                }
            }
        };
        flip(&self.ground, &mut out.ground);
        flip(&self.excited, &mut out.excited);
        out
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for z in out.ground.iter_mut().chain(out.excited.iter_mut()) {
            *z *= factor;
        }
        out
    }

    pub fn require_same_shape(&self, other: &FieldState) -> Result<()> {
        if self.mode_set != other.mode_set || self.nx != other.nx {
            return Err(SimError::Structural(format!(
                "state shapes differ: (M = {}, nx = {}) vs (M = {}, nx = {})",
                self.mode_set.max_order(),
                self.nx,
                other.mode_set.max_order(),
                other.nx
            )));
        }
        Ok(())
    }
}
