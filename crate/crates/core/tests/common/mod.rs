//! Oracles written independently of the library internals.
#![allow(dead_code)]

use isbel::{Grids, Occupations, RateTable};

pub const HBAR: f64 = 0.6582119569; // meV·ps
pub const KB: f64 = 0.08617333262; // meV/K

/// Largest |a − b| over the largest |b|.
pub fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let m = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |s, (x, y)| s.max((x - y).abs())) / m
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Net electron flux out of subband 1 into the right contact and into
/// subband 2 from the left, both with the spin factor, plain loops.
pub fn currents(occ: &Occupations, rates: &RateTable, g: &Grids) -> (f64, f64) {
    let t = &rates.total;
    let mut a = 0.0;
    let mut b = 0.0;
    for k in 0..occ.n1.len() {
        a += 2.0 * g.w_k[k] * (t.gout1[k] * occ.n1[k] - t.gin1[k] * (1.0 - occ.n1[k]));
        b += 2.0 * g.w_k[k] * (t.gin2[k] * (1.0 - occ.n2[k]) - t.gout2[k] * occ.n2[k]);
    }
    (a, b)
}

pub fn fermi(e: f64, mu: f64, t: f64) -> f64 {
    1.0 / (1.0 + ((e - mu) / (KB * t)).exp())
}

/// Sheet density per spin of a 2D parabolic band, m* in units of m_e,
/// from ħ²/m_e = 7.61996 meV·nm² and 1 nm⁻² = 10¹⁴ cm⁻².
pub fn density_2d(mu: f64, t: f64, m_star: f64) -> f64 {
    let dos = m_star / (2.0 * std::f64::consts::PI * 76.1996423) * 10.0 * 1e14; // cm⁻²/meV
    let kt = KB * t;
    dos * kt * (1.0 + (mu / kt).exp()).ln()
}
