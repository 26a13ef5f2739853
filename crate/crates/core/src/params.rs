use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

/// Device and material constants. Rates are given in units of ω₁₂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// Intersubband transition energy (meV).
    #[serde(rename = "E12")]
    pub e12: f64,
    /// Effective mass in units of the bare electron mass.
    pub m_star: f64,
    pub eps_r: f64,
    /// Internal propagation angle (degrees) of the mode resonant with ω₁₂.
    pub theta_res: f64,
    /// Cavity photon escape rate.
    pub gamma: f64,
    #[serde(rename = "Gamma_X")]
    pub gamma_x: f64,
    #[serde(rename = "Gamma_Y")]
    pub gamma_y: f64,
    #[serde(rename = "Gamma_S")]
    pub gamma_s: f64,
    #[serde(rename = "Gamma_Z")]
    pub gamma_z: f64,
    /// Nonradiative relaxation rate 1/τ.
    pub tau_inv: f64,
    /// Lattice temperature (K).
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Vacuum Rabi frequency at the calibration density.
    pub rabi_cal_freq: f64,
    /// Total (both spins) sheet density of the calibration, cm⁻².
    pub rabi_cal_density: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            e12: 150.0,
            m_star: 0.1,
            eps_r: 10.0,
            theta_res: 70.0,
            gamma: 0.05,
            gamma_x: 0.1,
            gamma_y: 0.1,
            gamma_s: 0.1,
            gamma_z: 0.1,
            tau_inv: 0.005,
            temperature: 77.0,
            rabi_cal_freq: 0.1,
            rabi_cal_density: 5e11,
        }
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {v}"),
        })
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        positive("E12", self.e12)?;
        positive("m_star", self.m_star)?;
        positive("eps_r", self.eps_r)?;
        positive("gamma", self.gamma)?;
        positive("Gamma_X", self.gamma_x)?;
        positive("Gamma_Y", self.gamma_y)?;
        positive("Gamma_S", self.gamma_s)?;
        positive("Gamma_Z", self.gamma_z)?;
        positive("tau_inv", self.tau_inv)?;
        positive("T", self.temperature)?;
        positive("rabi_cal_freq", self.rabi_cal_freq)?;
        positive("rabi_cal_density", self.rabi_cal_density)?;
        if !(self.theta_res > 0.0 && self.theta_res < 90.0) {
            return Err(Error::InvalidParameter {
                name: "theta_res",
                reason: format!("must lie in (0, 90) degrees, got {}", self.theta_res),
            });
        }
        Ok(())
    }

    /// ω₁₂ in ps⁻¹.
    pub fn omega12(&self) -> f64 {
        units::omega_of(self.e12)
    }

    pub fn beta(&self) -> f64 {
        units::beta(self.temperature)
    }

    pub fn k_t(&self) -> f64 {
        units::K_B * self.temperature
    }

    /// Rates converted to ps⁻¹.
    pub fn rates(&self) -> Rates {
        let w = self.omega12();
        Rates {
            gamma: self.gamma * w,
            gamma_x: self.gamma_x * w,
            gamma_y: self.gamma_y * w,
            gamma_s: self.gamma_s * w,
            gamma_z: self.gamma_z * w,
            tau_inv: self.tau_inv * w,
        }
    }
}

/// Damping and relaxation rates in ps⁻¹.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub gamma: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
    pub gamma_s: f64,
    pub gamma_z: f64,
    pub tau_inv: f64,
}
