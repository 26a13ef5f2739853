//! Electroluminescence spectrum of a cavity mode from the unilateral
//! Fourier transform of the two-time photon correlation, and the polariton
//! resonances.
//!
//! Convention: S̃(ω) = ∫₀^∞ e^{iωt} ⟨a†(0)a(t)⟩ dt, for which a bare
//! damped cavity mode gives a positive Lorentzian in Re S̃.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::device::Device;
use crate::params::Rates;
use crate::steady::SteadyState;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Everything the spectrum of one mode depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralMode {
    pub q: f64,
    pub omega12: f64,
    pub omega_c: f64,
    pub chi_sq: f64,
    pub na: f64,
    /// Population difference per spin (cm⁻²).
    pub d: f64,
}

impl SpectralMode {
    /// Mode `q` of a steady state; its photon number follows from the
    /// photon balance, so q need not lie on the solver grid.
    pub fn from_state(state: &SteadyState, device: &Device, q: f64) -> Self {
        Self {
            q,
            omega12: device.omega12(),
            omega_c: device.cavity.dispersion(q),
            chi_sq: device.cavity.chi_sq(q),
            na: state.photon_occupation_at(q, device),
            d: state.drive.d,
        }
    }

    fn detuning(&self) -> f64 {
        self.omega_c - self.omega12
    }

    /// Initial coherence sum Σ_k w_k Ŷ_{q,k} of the stationary state.
    pub fn coherence(&self, r: &Rates) -> Complex64 {
        Complex64::new(self.detuning() / r.gamma_y, -1.0) * (r.gamma * self.na / (2.0 * self.chi_sq.sqrt()))
    }

    fn u(&self, omega: f64, r: &Rates) -> Complex64 {
        Complex64::new(omega - self.omega12, r.gamma_z)
    }

    fn v(&self, omega: f64, r: &Rates) -> Complex64 {
        Complex64::new(omega - self.omega_c, r.gamma_s)
    }

    /// Dispersion function (ω − ω₁₂ + iΓ_Z)(ω − ω_c + iΓ_S) − 2χ²D.
    pub fn denominator(&self, omega: Complex64, r: &Rates) -> Complex64 {
        (omega - self.omega12 + I * r.gamma_z) * (omega - self.omega_c + I * r.gamma_s) - 2.0 * self.chi_sq * self.d
    }
}

/// S̃_q(ω) = i·n_a·(u − γ(δ/Γ_Y − i)) / (u v − 2χ²D).
pub fn spectrum_s(omega: f64, mode: &SpectralMode, r: &Rates) -> Complex64 {
    let u = mode.u(omega, r);
    let v = mode.v(omega, r);
    let num = u - Complex64::new(mode.detuning() / r.gamma_y, -1.0) * r.gamma;
    I * mode.na * num / (u * v - 2.0 * mode.chi_sq * mode.d)
}

/// Z̃_q(ω) = (i Z₀ − χ D S̃) / u; `None` when χ = 0.
pub fn spectrum_z(omega: f64, mode: &SpectralMode, r: &Rates) -> Option<Complex64> {
    if mode.chi_sq <= 0.0 {
        return None;
    }
    let chi = mode.chi_sq.sqrt();
    let s = spectrum_s(omega, mode, r);
    let z0 = mode.coherence(r);
    Some((I * z0 - chi * mode.d * s) / mode.u(omega, r))
}

/// Complex polariton frequencies ω₋, ω₊ (ordered by real part).
pub fn polariton_roots(mode: &SpectralMode, r: &Rates) -> (Complex64, Complex64) {
    let a = Complex64::new(mode.omega12, -r.gamma_z);
    let b = Complex64::new(mode.omega_c, -r.gamma_s);
    let mid = (a + b) * 0.5;
    let disc = ((a - b) * 0.5).powi(2) + 2.0 * mode.chi_sq * mode.d;
    let s = disc.sqrt();
    let (x, y) = (mid - s, mid + s);
    if x.re <= y.re {
        (x, y)
    } else {
        (y, x)
    }
}

/// Uniform grid of `n` frequencies over [lo, hi]·ω₁₂ (ps⁻¹).
pub fn omega_grid(omega12: f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|i| omega12 * (lo + (hi - lo) * i as f64 / (n - 1) as f64)).collect()
}

/// Grid indices of local maxima of `y` higher than `min_rel` of the global maximum.
pub fn find_peaks(y: &[f64], min_rel: f64) -> Vec<usize> {
    let top = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= min_rel * top)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub mode: SpectralMode,
    pub omega: Vec<f64>,
    pub s: Vec<Complex64>,
    /// Re S̃ (arb. units), optionally normalized to its peak.
    pub intensity: Vec<f64>,
    pub roots: (Complex64, Complex64),
    /// Frequencies of the local maxima of the intensity.
    pub peaks: Vec<f64>,
}

pub fn compute_spectrum(mode: &SpectralMode, omega: &[f64], r: &Rates, normalize: bool) -> SpectrumResult {
    let s: Vec<Complex64> = omega.iter().map(|&w| spectrum_s(w, mode, r)).collect();
    let mut intensity: Vec<f64> = s.iter().map(|z| z.re).collect();
    if normalize {
        let top = intensity.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top > 0.0 {
            intensity.iter_mut().for_each(|v| *v /= top);
        }
    }
    let peaks = find_peaks(&intensity, 1e-3).into_iter().map(|i| omega[i]).collect();
    SpectrumResult {
        mode: *mode,
        omega: omega.to_vec(),
        s,
        intensity,
        roots: polariton_roots(mode, r),
        peaks,
    }
}

/// Intensity over (ω, ω_c(q)) for one steady state; rows follow `q_grid`.
pub fn anticrossing_map(
    state: &SteadyState,
    device: &Device,
    omega: &[f64],
    q_grid: &[f64],
    normalize: bool,
) -> Vec<SpectrumResult> {
    q_grid
        .par_iter()
        .map(|&q| {
            let m = SpectralMode::from_state(state, device, q);
            compute_spectrum(&m, omega, &device.rates, normalize)
        })
        .collect()
}

/// In-plane wavevectors whose cavity frequencies are uniform over [lo, hi]·ω₁₂.
pub fn q_grid_for(device: &Device, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    omega_grid(device.omega12(), lo, hi, n)
        .iter()
        .filter_map(|&w| device.cavity.q_of_omega(w))
        .collect()
}
