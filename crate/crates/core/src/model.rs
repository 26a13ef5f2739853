//! Subband and cavity dispersions and the light-matter coupling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::PhysicalParams;
use crate::units::C_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subband {
    One,
    Two,
}

impl Subband {
    pub fn from_index(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Subband::One),
            2 => Ok(Subband::Two),
            other => Err(Error::InvalidSubband(other)),
        }
    }

    /// Energy of the subband bottom relative to subband 1 (meV).
    pub fn edge(self, e12: f64) -> f64 {
        match self {
            Subband::One => 0.0,
            Subband::Two => e12,
        }
    }
}

/// ħω_j(k) for in-plane kinetic energy `eps_kin`.
pub fn subband_energy(eps_kin: f64, j: Subband, e12: f64) -> f64 {
    j.edge(e12) + eps_kin
}

/// Planar cavity geometry and calibrated coupling.
///
/// The vertical wavevector is fixed by requiring the mode at the resonance
/// angle to sit at ω₁₂; the coupling prefactor is pinned by the Rabi
/// calibration rather than by a dipole matrix element.
#[derive(Debug, Clone, PartialEq)]
pub struct Cavity {
    pub omega12: f64,
    pub eps_r: f64,
    /// Vertical wavevector q_z (nm⁻¹).
    pub qz: f64,
    /// In-plane wavevector at resonance (nm⁻¹).
    pub q_res: f64,
    /// Prefactor K in χ² = K·(ω₁₂²/ω_c)·q²/(q_z²+q²), ps⁻¹·cm².
    pub coupling_k: f64,
}

impl Cavity {
    pub fn new(params: &PhysicalParams) -> Result<Self> {
        if !(params.rabi_cal_density > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rabi_cal_density",
                reason: "calibration density must be positive".into(),
            });
        }
        let omega12 = params.omega12();
        let n = params.eps_r.sqrt();
        let theta = params.theta_res.to_radians();
        let k0 = omega12 * n / C_LIGHT;
        let qz = k0 * theta.cos();
        let q_res = k0 * theta.sin();
        let omega_rabi = params.rabi_cal_freq * omega12;
        // per-spin calibration density, entirely in subband 1
        let d_cal = 0.5 * params.rabi_cal_density;
        let geo_res = theta.sin().powi(2);
        let coupling_k = omega_rabi * omega_rabi / (2.0 * d_cal * omega12 * geo_res);
        Ok(Self {
            omega12,
            eps_r: params.eps_r,
            qz,
            q_res,
            coupling_k,
        })
    }

    /// Bare cavity frequency ω_c(q) in ps⁻¹.
    pub fn dispersion(&self, q: f64) -> f64 {
        C_LIGHT / self.eps_r.sqrt() * (self.qz * self.qz + q * q).sqrt()
    }

    /// Inverse of [`Cavity::dispersion`]; `None` below the cutoff frequency.
    pub fn q_of_omega(&self, omega: f64) -> Option<f64> {
        let k = omega * self.eps_r.sqrt() / C_LIGHT;
        let q2 = k * k - self.qz * self.qz;
        (q2 >= 0.0).then(|| q2.sqrt())
    }

    /// TM selection factor q²/(q_z²+q²).
    pub fn geometric_factor(&self, q: f64) -> f64 {
        q * q / (self.qz * self.qz + q * q)
    }

    /// χ(q)² in ps⁻²·cm², so that χ²·D with D in cm⁻² is a squared rate.
    pub fn chi_sq(&self, q: f64) -> f64 {
        let wc = self.dispersion(q);
        self.coupling_k * self.omega12 * self.omega12 / wc * self.geometric_factor(q)
    }

    pub fn chi(&self, q: f64) -> f64 {
        self.chi_sq(q).sqrt()
    }

    /// Cutoff (normal-incidence) frequency.
    pub fn cutoff(&self) -> f64 {
        self.dispersion(0.0)
    }
}

/// Electron and photon occupations on the grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupations {
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    pub na: Vec<f64>,
}

impl Occupations {
    pub fn within_bounds(&self, tol: f64) -> bool {
        let pauli = |v: &[f64]| v.iter().all(|&x| x >= -tol && x <= 1.0 + tol);
        pauli(&self.n1) && pauli(&self.n2) && self.na.iter().all(|&x| x >= -tol)
    }
}
