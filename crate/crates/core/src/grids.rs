//! Electron kinetic-energy grid and photon in-plane mode grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Cavity;
use crate::params::PhysicalParams;
use crate::units::{dos_2d, PER_NM2_TO_PER_CM2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nk: usize,
    pub nq: usize,
    /// Upper edge of the kinetic-energy grid (meV); `None` selects E₁₂.
    #[serde(default)]
    pub eps_max: Option<f64>,
    /// Cavity-frequency window in units of ω₁₂.
    #[serde(default = "default_omega_lo")]
    pub omega_lo: f64,
    #[serde(default = "default_omega_hi")]
    pub omega_hi: f64,
}

fn default_omega_lo() -> f64 {
    0.6
}
fn default_omega_hi() -> f64 {
    1.4
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nk: 40,
            nq: 16,
            eps_max: None,
            omega_lo: default_omega_lo(),
            omega_hi: default_omega_hi(),
        }
    }
}

impl GridSpec {
    pub fn new(nk: usize, nq: usize) -> Self {
        Self {
            nk,
            nq,
            ..Default::default()
        }
    }

    pub fn with_eps_max(mut self, eps_max: f64) -> Self {
        self.eps_max = Some(eps_max);
        self
    }
}

/// Discretized electron and photon grids with quadrature weights.
///
/// Electron cells are midpoints of a uniform partition of [0, ε_max]; the
/// weights are Δε·m*/(2πħ²) with end corrections that make the rule fourth
/// order for smooth integrands while keeping the total weight unchanged.
/// Photon cells are uniform in ω_c, each weighted by its annulus measure
/// q·Δq/(2π).
#[derive(Debug, Clone, PartialEq)]
pub struct Grids {
    pub eps: Vec<f64>,
    /// Sheet density per spin of a fully occupied cell (cm⁻²).
    pub w_k: Vec<f64>,
    pub d_eps: f64,
    pub eps_max: f64,
    /// In-plane photon wavevectors (nm⁻¹).
    pub q: Vec<f64>,
    /// Bare cavity frequency per mode (ps⁻¹).
    pub omega_c: Vec<f64>,
    /// Mode density per cell (cm⁻²).
    pub w_q: Vec<f64>,
    /// χ(q)² per mode (ps⁻²·cm²).
    pub chi_sq: Vec<f64>,
    /// Cavity-frequency step (ps⁻¹).
    pub d_omega: f64,
}

/// End-corrected midpoint weights in units of the cell width.
fn midpoint_weights(n: usize) -> Vec<f64> {
    let mut w = vec![1.0; n];
    if n >= 6 {
        for (i, c) in [2.0, -3.0, 1.0].iter().enumerate() {
            w[i] += c / 24.0;
            w[n - 1 - i] += c / 24.0;
        }
    }
    w
}

impl Grids {
    pub fn nk(&self) -> usize {
        self.eps.len()
    }

    pub fn nq(&self) -> usize {
        self.q.len()
    }

    /// Σ_k w_k·v_k.
    pub fn k_sum(&self, v: &[f64]) -> f64 {
        self.w_k.iter().zip(v).map(|(w, x)| w * x).sum()
    }

    /// Σ_q w_q·v_q.
    pub fn q_sum(&self, v: &[f64]) -> f64 {
        self.w_q.iter().zip(v).map(|(w, x)| w * x).sum()
    }

    /// Index of the photon cell whose frequency is closest to `omega`.
    pub fn nearest_mode(&self, omega: f64) -> usize {
        let mut best = 0;
        for (i, w) in self.omega_c.iter().enumerate() {
            if (w - omega).abs() < (self.omega_c[best] - omega).abs() {
                best = i;
            }
        }
        best
    }
}

/// Builds grids with ε_max = E₁₂.
pub fn build_grids(params: &PhysicalParams, nk: usize, nq: usize) -> Result<Grids> {
    build_grids_with(params, &GridSpec::new(nk, nq))
}

pub fn build_grids_with(params: &PhysicalParams, spec: &GridSpec) -> Result<Grids> {
    if spec.nk < 8 {
        return Err(Error::InvalidParameter {
            name: "nk",
            reason: format!("need at least 8 energy cells, got {}", spec.nk),
        });
    }
    if spec.nq < 4 {
        return Err(Error::InvalidParameter {
            name: "nq",
            reason: format!("need at least 4 photon modes, got {}", spec.nq),
        });
    }
    let eps_max = spec.eps_max.unwrap_or(params.e12);
    if !(eps_max > 0.0 && eps_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "eps_max",
            reason: format!("must be positive, got {eps_max}"),
        });
    }
    let cavity = Cavity::new(params)?;
    let lo = spec.omega_lo * cavity.omega12;
    let hi = spec.omega_hi * cavity.omega12;
    if !(hi > lo && lo > cavity.cutoff()) {
        return Err(Error::InvalidParameter {
            name: "omega_lo",
            reason: format!(
                "photon window must satisfy cutoff ({:.4} w12) < omega_lo < omega_hi",
                cavity.cutoff() / cavity.omega12
            ),
        });
    }

    let dos = dos_2d(params.m_star);
    let h = eps_max / spec.nk as f64;
    let eps = (0..spec.nk).map(|i| (i as f64 + 0.5) * h).collect();
    let w_k = midpoint_weights(spec.nk).iter().map(|c| c * h * dos).collect();

    let dw = (hi - lo) / spec.nq as f64;
    let mut q = Vec::with_capacity(spec.nq);
    let mut omega_c = Vec::with_capacity(spec.nq);
    let mut w_q = Vec::with_capacity(spec.nq);
    let mut chi_sq = Vec::with_capacity(spec.nq);
    for i in 0..spec.nq {
        let w = lo + (i as f64 + 0.5) * dw;
        let qm = cavity.q_of_omega(w - 0.5 * dw).unwrap_or(0.0);
        let qp = cavity.q_of_omega(w + 0.5 * dw).unwrap_or(0.0);
        let qc = cavity.q_of_omega(w).unwrap_or(0.0);
        q.push(qc);
        omega_c.push(w);
        w_q.push((qp * qp - qm * qm) / (4.0 * std::f64::consts::PI) * PER_NM2_TO_PER_CM2);
        chi_sq.push(cavity.chi_sq(qc));
    }
    Ok(Grids {
        eps,
        w_k,
        d_eps: h,
        eps_max,
        q,
        omega_c,
        w_q,
        chi_sq,
        d_omega: dw,
    })
}
