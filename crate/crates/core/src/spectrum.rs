//! Envelope momentum distributions of the recoiling clouds.
//!
//! For a ground cloud `j` the envelope transform is
//! `f_j(k) = ∫₀¹ exp(-ikx) a_j(x) dx`, evaluated by the trapezoid rule at
//! every `k` of a symmetric window. The normalised density
//! `w_j = |f_j|² / ∫|f_j|² dk` gives the mean envelope shift `κ_j` and the
//! variance `D_j`. The full cloud momentum is `j k0 + κ_j`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::modes::ModeIndex;
use crate::quadrature::trapezoid;
use crate::state::FieldState;

/// Uniform wavenumber grid `k ∈ [-half_width, half_width]` (units of 1/L).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KGrid {
    pub half_width: f64,
    pub points: usize,
}

impl KGrid {
    pub const DEFAULT_HALF_WIDTH: f64 = 64.0 * PI;
    pub const DEFAULT_POINTS: usize = 4096;

    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) || points < 3 {
            return Err(SimError::Structural(format!(
                "k window needs a positive half width and at least 3 points, got {half_width} / {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// Grid values, built symmetrically so that `k[i] == -k[n-1-i]` exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let dk = self.spacing();
        let mut k = vec![0.0; n];
        for i in 0..n / 2 {
            let v = -self.half_width + i as f64 * dk;
            k[i] = v;
            k[n - 1 - i] = -v;
        }
        if n % 2 == 1 {
            k[n / 2] = 0.0;
        }
        k
    }

    /// Same spacing, twice the window.
    pub fn doubled(&self) -> Self {
        Self {
            half_width: 2.0 * self.half_width,
            points: 2 * self.points - 1,
        }
    }
}

impl Default for KGrid {
    fn default() -> Self {
        Self {
            half_width: Self::DEFAULT_HALF_WIDTH,
            points: Self::DEFAULT_POINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentumSpectrum {
    pub mode: ModeIndex,
    pub window: KGrid,
    pub k_grid: Vec<f64>,
    /// Normalised density over `k_grid`.
    pub w: Vec<f64>,
    /// Mean envelope wavenumber κ_j (1/L).
    pub kappa: f64,
    /// Variance D_j (1/L²). Depends on the window for envelopes with sharp
    /// edges; always quote it together with `window`.
    pub variance: f64,
    /// `∫|f_j|² dk` before normalisation; equals `2π ∫|a_j|² dx` up to the
    /// window truncation.
    pub spectral_weight: f64,
    /// `∫|a_j|² dx` on the spatial grid.
    pub population: f64,
}

impl MomentumSpectrum {
    /// `∫|f|² dk / (2π ∫|a|² dx)`; tends to one as the window grows.
    pub fn parseval_ratio(&self) -> f64 {
        self.spectral_weight / (2.0 * PI * self.population)
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// `∫ w dk` by the trapezoid rule on the k grid.
    pub fn total_probability(&self) -> f64 {
        trapezoid(&self.w, self.window.spacing())
    }
}

/// Trapezoid transform `∫₀¹ exp(-ikx) a(x) dx` of samples on `[0, 1]`.
pub fn envelope_transform(a: &[Complex64], k: f64) -> Complex64 {
    let n = a.len();
    let h = 1.0 / (n - 1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, z) in a.iter().enumerate() {
        let weight = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += Complex64::cis(-k * i as f64 * h) * z * weight;
    }
    acc * h
}

pub fn envelope_spectrum(state: &FieldState, mode: ModeIndex, window: &KGrid) -> Result<MomentumSpectrum> {
    let a = state.a(mode).ok_or_else(|| {
        SimError::Structural(format!("mode {mode} is not a ground mode of this state"))
    })?;
    amplitude_spectrum(a, mode, window)
}

/// Spectrum of an arbitrary sampled envelope on the uniform `[0, 1]` grid.
pub fn amplitude_spectrum(a: &[Complex64], mode: ModeIndex, window: &KGrid) -> Result<MomentumSpectrum> {
    if a.len() < 2 {
        return Err(SimError::Structural("envelope needs at least two samples".into()));
    }
    let h = 1.0 / (a.len() - 1) as f64;
    // The sampled transform repeats with period 2π/h; a wider window would
    // count aliased copies of the spectrum.
    let nyquist = PI / h;
    if window.half_width >= nyquist {
        return Err(SimError::Structural(format!(
            "k window half width {} reaches the grid Nyquist limit {nyquist} (nx = {}); narrow the window or refine the grid",
            window.half_width,
            a.len()
        )));
    }
    let population = h
        * a.iter()
            .enumerate()
            .map(|(i, z)| {
                let w = if i == 0 || i == a.len() - 1 { 0.5 } else { 1.0 };
                w * z.norm_sqr()
            })
            .sum::<f64>();
    if population == 0.0 {
        return Err(SimError::UndefinedDistribution { mode: mode.0 });
    }

    let k_grid = window.values();
    let dk = window.spacing();
    let power: Vec<f64> = k_grid
        .iter()
        .map(|&k| envelope_transform(a, k).norm_sqr())
        .collect();
    let spectral_weight = trapezoid(&power, dk);
    if !(spectral_weight > 0.0) {
        return Err(SimError::UndefinedDistribution { mode: mode.0 });
    }
    let w: Vec<f64> = power.iter().map(|p| p / spectral_weight).collect();

    let first: Vec<f64> = k_grid.iter().zip(&w).map(|(k, w)| k * w).collect();
    let kappa = trapezoid(&first, dk);
    let second: Vec<f64> = k_grid
        .iter()
        .zip(&w)
        .map(|(k, w)| (k - kappa).powi(2) * w)
        .collect();
    let variance = trapezoid(&second, dk);

    Ok(MomentumSpectrum {
        mode,
        window: window.clone(),
        k_grid,
        w,
        kappa,
        variance,
        spectral_weight,
        population,
    })
}

/// Recoil observables of one moving cloud, in units of the vacuum photon
/// wavenumber `k0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoilReport {
    pub mode: ModeIndex,
    /// Envelope shift κ_j (1/L), signed as computed.
    pub kappa: f64,
    /// Momentum shift `δk_j / k0 = sign(j) κ_j / (k0 L)`, so that the report
    /// for `-j` mirrors the one for `j`.
    pub delta_k_over_k0: f64,
    /// `D_j^{1/2} / k0`.
    pub std_over_k0: f64,
    /// `δω_j / ω_j = 2 δk_j / k_j` with `k_j = |j| k0`.
    pub delta_omega_ratio: f64,
    /// `n - 1 = δk_j / (|j| k0)`.
    pub refraction_index_minus_1: f64,
    pub window: KGrid,
}

pub fn recoil_report(spectrum: &MomentumSpectrum, k0l: f64) -> Result<RecoilReport> {
    let j = spectrum.mode.0;
    if j == 0 {
        return Err(SimError::StaticCloud);
    }
    let order = j.unsigned_abs() as f64;
    let delta_k_over_k0 = j.signum() as f64 * spectrum.kappa / k0l;
    Ok(RecoilReport {
        mode: spectrum.mode,
        kappa: spectrum.kappa,
        delta_k_over_k0,
        std_over_k0: spectrum.std_dev() / k0l,
        delta_omega_ratio: 2.0 * delta_k_over_k0 / order,
        refraction_index_minus_1: delta_k_over_k0 / order,
        window: spectrum.window.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(nx: usize, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        (0..nx).map(|i| f(i as f64 / (nx - 1) as f64)).collect()
    }

    #[test]
    fn k_grid_is_exactly_symmetric() {
        for n in [4096, 4097, 11] {
            let k = KGrid::new(64.0 * PI, n).unwrap().values();
            for i in 0..n {
                assert_eq!(k[i], -k[n - 1 - i]);
            }
            assert_eq!(k[0], -64.0 * PI);
        }
    }

    #[test]
    fn uniform_envelope_has_zero_mean() {
        let a = samples(256, |_| Complex64::new(1.0, 0.0));
        let s = amplitude_spectrum(&a, ModeIndex(2), &KGrid::default()).unwrap();
        assert!(s.kappa.abs() < 1e-10);
        assert!((s.total_probability() - 1.0).abs() < 1e-10);
        for i in 0..s.w.len() {
            assert!((s.w[i] - s.w[s.w.len() - 1 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_wave_envelope_recovers_shift() {
        let q = 7.0;
        let a = samples(256, |x| Complex64::cis(q * x));
        // The sinc² tails of the box envelope are cut unevenly by a window
        // centred on zero, which pulls the mean toward zero; widening the
        // window shrinks that bias.
        let s = amplitude_spectrum(&a, ModeIndex(2), &KGrid::default()).unwrap();
        assert!((s.kappa - q).abs() <= 5e-3 * q, "kappa = {}", s.kappa);
        let wide = amplitude_spectrum(&a, ModeIndex(2), &KGrid::default().doubled()).unwrap();
        assert!((wide.kappa - q).abs() < (s.kappa - q).abs());
    }

    #[test]
    fn zero_envelope_is_undefined() {
        let a = vec![Complex64::default(); 256];
        assert_eq!(
            amplitude_spectrum(&a, ModeIndex(4), &KGrid::default()).unwrap_err(),
            SimError::UndefinedDistribution { mode: 4 }
        );
    }

    #[test]
    fn window_beyond_nyquist_is_rejected() {
        let a = samples(32, |_| Complex64::new(1.0, 0.0));
        assert!(matches!(
            amplitude_spectrum(&a, ModeIndex(2), &KGrid::default()),
            Err(SimError::Structural(_))
        ));
        let narrow = KGrid::new(16.0 * PI, 1025).unwrap();
        assert!(amplitude_spectrum(&a, ModeIndex(2), &narrow).is_ok());
    }

    #[test]
    fn report_of_unshifted_cloud_is_zero() {
        let a = samples(128, |_| Complex64::new(0.3, 0.0));
        let s = amplitude_spectrum(&a, ModeIndex(2), &KGrid::default()).unwrap();
        let r = recoil_report(&s, 128.9).unwrap();
        assert!(r.delta_k_over_k0.abs() < 1e-12);
        assert!(r.delta_omega_ratio.abs() < 1e-12);
        assert!(r.refraction_index_minus_1.abs() < 1e-12);
        let s0 = amplitude_spectrum(&a, ModeIndex(0), &KGrid::default()).unwrap();
        assert_eq!(recoil_report(&s0, 128.9).unwrap_err(), SimError::StaticCloud);
    }

    #[test]
    fn report_identities_for_second_order_clouds() {
        let a = samples(128, |x| Complex64::cis(-8.0 * x));
        for j in [2, -2] {
            let s = amplitude_spectrum(&a, ModeIndex(j), &KGrid::default()).unwrap();
            let r = recoil_report(&s, 128.9).unwrap();
            // δω₂/ω₂ = 2 δk₂ / k₂ with k₂ = 2 k0.
            assert!((r.delta_omega_ratio - 2.0 * r.delta_k_over_k0 / 2.0).abs() < 1e-15);
            assert!((r.refraction_index_minus_1 - r.delta_k_over_k0 / 2.0).abs() < 1e-15);
            assert_eq!(r.delta_k_over_k0.signum(), -(j.signum() as f64));
        }
    }

    #[test]
    fn parseval_improves_with_window() {
        let a = samples(256, |_| Complex64::new(1.0, 0.0));
        let narrow = amplitude_spectrum(&a, ModeIndex(2), &KGrid::default()).unwrap();
        let wide = amplitude_spectrum(&a, ModeIndex(2), &KGrid::default().doubled()).unwrap();
        let (e1, e2) = ((narrow.parseval_ratio() - 1.0).abs(), (wide.parseval_ratio() - 1.0).abs());
        assert!(e1 < 0.02, "{e1}");
        assert!(e2 < e1);
    }
}
