//! Momentum-mode bookkeeping.
//!
//! Every atomic amplitude carries a plane-wave carrier `exp(i j k0 x)`. Ground
//! state clouds sit on even `j`, excited state clouds on odd `j`. A [`ModeSet`]
//! truncates the ladder at a maximum ground order `M`; the excited ladder then
//! runs to `M + 1` so that every ground mode has both of its optical partners.

use serde::{Deserialize, Serialize};

use crate::error::ParamError;

/// Signed photon-recoil index of a cloud, in units of `k0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModeIndex(pub i32);

impl ModeIndex {
    pub fn is_ground(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn is_excited(self) -> bool {
        !self.is_ground()
    }

    pub fn mirrored(self) -> Self {
        ModeIndex(-self.0)
    }
}

impl std::fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Truncated mode ladder: ground `{0, ±2, …, ±M}`, excited `{±1, ±3, …, ±(M+1)}`.
///
/// Rows are stored in ascending `j`, so ground row `g` holds `j = -M + 2g` and
/// excited row `e` holds `j = -(M+1) + 2e`. With that layout the partners of
/// ground row `g` are excited rows `g` (`j-1`) and `g+1` (`j+1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct ModeSet {
    max_order: u32,
}

impl ModeSet {
    pub const DEFAULT_ORDER: u32 = 10;

    /// `max_order` must be even. Zero is accepted and gives the three-mode
    /// system `{a0, b-1, b+1}`.
    pub fn new(max_order: u32) -> Result<Self, ParamError> {
        if max_order % 2 != 0 {
            return Err(ParamError::invalid(
                "max_order",
                format!("truncation order must be even, got {max_order}"),
            ));
        }
        if max_order > 200 {
            return Err(ParamError::invalid(
                "max_order",
                format!("truncation order {max_order} is unreasonably large"),
            ));
        }
        Ok(Self { max_order })
    }

    pub fn max_order(&self) -> u32 {
        self.max_order
    }

    pub fn n_ground(&self) -> usize {
        self.max_order as usize + 1
    }

    pub fn n_excited(&self) -> usize {
        self.max_order as usize + 2
    }

    pub fn ground_modes(&self) -> Vec<ModeIndex> {
        (0..self.n_ground()).map(|g| self.ground_mode(g)).collect()
    }

    pub fn excited_modes(&self) -> Vec<ModeIndex> {
        (0..self.n_excited()).map(|e| self.excited_mode(e)).collect()
    }

    pub fn ground_mode(&self, row: usize) -> ModeIndex {
        ModeIndex(-(self.max_order as i32) + 2 * row as i32)
    }

    pub fn excited_mode(&self, row: usize) -> ModeIndex {
        ModeIndex(-(self.max_order as i32 + 1) + 2 * row as i32)
    }

    /// Storage row of a ground mode, `None` if odd or truncated.
    pub fn ground_row(&self, j: ModeIndex) -> Option<usize> {
        let m = self.max_order as i32;
        (j.is_ground() && j.0.abs() <= m).then(|| ((j.0 + m) / 2) as usize)
    }

    /// Storage row of an excited mode, `None` if even or truncated.
    pub fn excited_row(&self, j: ModeIndex) -> Option<usize> {
        let m = self.max_order as i32 + 1;
        (j.is_excited() && j.0.abs() <= m).then(|| ((j.0 + m) / 2) as usize)
    }

    pub fn contains(&self, j: ModeIndex) -> bool {
        self.ground_row(j).is_some() || self.excited_row(j).is_some()
    }
}

impl Default for ModeSet {
    fn default() -> Self {
        Self {
            max_order: Self::DEFAULT_ORDER,
        }
    }
}

impl TryFrom<u32> for ModeSet {
    type Error = ParamError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        ModeSet::new(value)
    }
}

impl From<ModeSet> for u32 {
    fn from(value: ModeSet) -> Self {
        value.max_order
    }
}
