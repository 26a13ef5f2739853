//! Physical constants and unit conversions.
//!
//! Internal units: energies in meV, times in ps, lengths in nm, sheet
//! densities in cm⁻². Angular frequencies are in ps⁻¹ (energy / ħ).

/// Reduced Planck constant, meV·ps.
pub const HBAR: f64 = 0.658_211_956_9;
/// Boltzmann constant, meV/K.
pub const K_B: f64 = 0.086_173_332_62;
/// Speed of light in vacuum, nm/ps.
pub const C_LIGHT: f64 = 299_792.458;

/// SI values, used only where a formula is naturally written in SI.
pub mod si {
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const E_CHARGE: f64 = 1.602_176_634e-19;
    pub const M_E: f64 = 9.109_383_701_5e-31;
    pub const EPS0: f64 = 8.854_187_812_8e-12;
    pub const C_LIGHT: f64 = 299_792_458.0;
}

/// nm⁻² to cm⁻².
pub const PER_NM2_TO_PER_CM2: f64 = 1e14;

/// Inverse thermal energy β = 1/(k_B T) in meV⁻¹.
pub fn beta(temperature: f64) -> f64 {
    1.0 / (K_B * temperature)
}

/// Energy (meV) to angular frequency (ps⁻¹).
pub fn omega_of(energy: f64) -> f64 {
    energy / HBAR
}

/// Two-dimensional density of states per spin, m*/(2πħ²), in cm⁻²·meV⁻¹.
pub fn dos_2d(m_star: f64) -> f64 {
    let per_j_per_m2 = m_star * si::M_E / (2.0 * std::f64::consts::PI * si::HBAR * si::HBAR);
    // J⁻¹ m⁻² -> meV⁻¹ cm⁻²
    per_j_per_m2 * si::E_CHARGE * 1e-3 * 1e-4
}
