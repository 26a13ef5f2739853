//! Transport and emission observables of a steady state.

use serde::{Deserialize, Serialize};

use crate::contacts::RateTable;
use crate::device::Device;
use crate::grids::Grids;
use crate::model::Occupations;
use crate::params::PhysicalParams;
use crate::steady::SteadyState;
use crate::units::{si, HBAR};

/// Current per unit area from the subband-1 and subband-2 balances
/// (electrons·ps⁻¹·cm⁻², spin included).
pub fn electronic_current(occ: &Occupations, rates: &RateTable, grids: &Grids) -> (f64, f64) {
    let t = &rates.total;
    let mut i1 = 0.0;
    let mut i2 = 0.0;
    for k in 0..grids.nk() {
        i1 += grids.w_k[k] * (t.gout1[k] * occ.n1[k] - t.gin1[k] * (1.0 - occ.n1[k]));
        i2 += grids.w_k[k] * (t.gin2[k] * (1.0 - occ.n2[k]) - t.gout2[k] * occ.n2[k]);
    }
    (2.0 * i1, 2.0 * i2)
}

/// Photons leaving the cavity per unit time and area, 2γ Σ_q w_q n_a.
pub fn photon_rate(occ: &Occupations, grids: &Grids, params: &PhysicalParams) -> f64 {
    2.0 * params.rates().gamma * grids.q_sum(&occ.na)
}

/// η = P / I, `None` when the current does not flow forward.
pub fn quantum_efficiency(p: f64, i: f64) -> Option<f64> {
    (i > 0.0).then(|| p / i)
}

/// Population difference D = Σ_k w_k (n₁ − n₂) per spin (cm⁻²).
pub fn population_difference(occ: &Occupations, grids: &Grids) -> f64 {
    grids.k_sum(&occ.n1) - grids.k_sum(&occ.n2)
}

/// Vacuum Rabi frequency χ(q_res)·√(2D) in ps⁻¹ and the splitting 2Ω_R.
/// An inverted population (D < 0) has no splitting.
pub fn rabi_splitting(d: f64, device: &Device) -> (f64, f64) {
    let omega = device.chi_res() * (2.0 * d.max(0.0)).sqrt();
    (omega, 2.0 * omega)
}

/// Population difference (cm⁻²) above which the polariton doublet can form,
/// (Γ_S − Γ_Z)² / (8χ²).
pub fn threshold_d0(params: &PhysicalParams, chi_sq: f64) -> f64 {
    let r = params.rates();
    (r.gamma_s - r.gamma_z).powi(2) / (8.0 * chi_sq)
}

/// Spontaneous emission rate of one electron into free space (ps⁻¹), with
/// the dipole from unit oscillator strength, d² = ħe²/(2m*ω₁₂).
pub fn free_space_emission_rate(params: &PhysicalParams) -> f64 {
    let w = params.omega12() * 1e12;
    let m = params.m_star * si::M_E;
    let d2 = si::HBAR * si::E_CHARGE * si::E_CHARGE / (2.0 * m * w);
    let a = 2.0 * d2 * w.powi(3) * params.eps_r.sqrt()
        / (3.0 * std::f64::consts::PI * si::C_LIGHT.powi(3) * si::HBAR * si::EPS0);
    a * 1e-12
}

/// Free-space photon current A·Σ_k w_k·2·n₂(1−n₁) for the same populations.
pub fn free_space_rate(occ: &Occupations, grids: &Grids, params: &PhysicalParams) -> f64 {
    let f: f64 = (0..grids.nk())
        .map(|k| grids.w_k[k] * 2.0 * occ.n2[k] * (1.0 - occ.n1[k]))
        .sum();
    free_space_emission_rate(params) * f
}

/// Observables of one bias point. Rates per cm² with spin factor; D per spin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSet {
    /// qV (meV).
    #[serde(rename = "V")]
    pub v: f64,
    #[serde(rename = "I")]
    pub i: f64,
    /// Current evaluated from the subband-2 balance.
    #[serde(rename = "I_subband2")]
    pub i2: f64,
    #[serde(rename = "P")]
    pub p: f64,
    /// NaN when the current is not positive.
    pub eta: f64,
    #[serde(rename = "D")]
    pub d: f64,
    /// ħΩ_R (meV).
    #[serde(rename = "Omega_R")]
    pub omega_r: f64,
    /// 2ħΩ_R (meV).
    pub splitting: f64,
    #[serde(rename = "D0")]
    pub d0: f64,
    pub eta_freespace: f64,
    pub n1_density: f64,
    pub n2_density: f64,
    pub eps_f: f64,
}

impl ObservableSet {
    pub fn compute(state: &SteadyState, device: &Device) -> Self {
        let g = &device.grids;
        let p = &device.params;
        let occ = &state.occupations;
        let (i1, i2) = electronic_current(occ, &state.rates, g);
        let photons = photon_rate(occ, g, p);
        let d = population_difference(occ, g);
        let (omega_r, split) = rabi_splitting(d, device);
        let pfs = free_space_rate(occ, g, p);
        Self {
            v: state.bias.v,
            i: i1,
            i2,
            p: photons,
            eta: quantum_efficiency(photons, i1).unwrap_or(f64::NAN),
            d,
            omega_r: omega_r * HBAR,
            splitting: split * HBAR,
            d0: threshold_d0(p, device.cavity.chi_sq(device.cavity.q_res)),
            eta_freespace: quantum_efficiency(pfs, i1).unwrap_or(f64::NAN),
            n1_density: 2.0 * g.k_sum(&occ.n1),
            n2_density: 2.0 * g.k_sum(&occ.n2),
            eps_f: state.eps_f,
        }
    }

    pub fn csv_header() -> [&'static str; 13] {
        [
            "V", "I", "P", "eta", "D", "Omega_R", "splitting", "eta_freespace", "I_subband2", "D0", "n1_density",
            "n2_density", "eps_F",
        ]
    }

    pub fn csv_row(&self) -> Vec<String> {
        [
            self.v,
            self.i,
            self.p,
            self.eta,
            self.d,
            self.omega_r,
            self.splitting,
            self.eta_freespace,
            self.i2,
            self.d0,
            self.n1_density,
            self.n2_density,
            self.eps_f,
        ]
        .iter()
        .map(|v| format!("{v:e}"))
        .collect()
    }
}
