//! Time-domain equations of motion for photon and carrier populations and
//! the photon-polarization coherence Y, with the polarization correlation X
//! either carried explicitly or adiabatically eliminated.
//!
//! All quantities are written per unit area: the coherence is carried as
//! Ŷ = √S·Y and X as X_d(k)·δ_kk' + X̂_q(k',k)/S, so that no sample area
//! appears. The photon wavevector is neglected next to electronic ones,
//! which makes the detuning of X vanish.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contacts::{BiasPoint, ContactModel, RateTable};
use crate::device::Device;
use crate::error::{Error, Result};
use crate::fermi::{equilibrium_occupations, grid_fermi_level};
use crate::model::Occupations;
use crate::steady::{self, SteadyState};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// X integrated explicitly (desk-scale grids only).
    Full,
    /// X replaced by its instantaneous stationary value.
    AdiabaticX,
    /// Pseudo-time flow on the algebraic steady-state residuals.
    Reduced,
}

/// Largest grids accepted in [`Mode::Full`].
pub const FULL_MODE_MAX_NK: usize = 16;
pub const FULL_MODE_MAX_NQ: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct DynamicState {
    pub na: Vec<f64>,
    pub n1: Vec<f64>,
    pub n2: Vec<f64>,
    /// Ŷ indexed [q·nk + k]; empty in reduced mode.
    pub y: Vec<Complex64>,
    /// Diagonal part X_d(k); full mode only.
    pub x_diag: Vec<f64>,
    /// Smooth part X̂_q(k',k) indexed [(q·nk + k')·nk + k]; full mode only.
    pub x_corr: Vec<Complex64>,
}

impl DynamicState {
    pub fn zeros(nk: usize, nq: usize, mode: Mode) -> Self {
        let (ny, nxd, nxc) = match mode {
            Mode::Full => (nq * nk, nk, nq * nk * nk),
            Mode::AdiabaticX => (nq * nk, 0, 0),
            Mode::Reduced => (0, 0, 0),
        };
        Self {
            na: vec![0.0; nq],
            n1: vec![0.0; nk],
            n2: vec![0.0; nk],
            y: vec![Complex64::new(0.0, 0.0); ny],
            x_diag: vec![0.0; nxd],
            x_corr: vec![Complex64::new(0.0, 0.0); nxc],
        }
    }

    /// Uncorrelated state with the given populations: Y = 0 and X at its
    /// plasma value 2n₂(1−n₁).
    pub fn from_occupations(occ: &Occupations, mode: Mode) -> Self {
        let mut s = Self::zeros(occ.n1.len(), occ.na.len(), mode);
        s.na.clone_from(&occ.na);
        s.n1.clone_from(&occ.n1);
        s.n2.clone_from(&occ.n2);
        if mode == Mode::Full {
            s.x_diag = occ.n1.iter().zip(&occ.n2).map(|(a, b)| 2.0 * b * (1.0 - a)).collect();
        }
        s
    }

    pub fn occupations(&self) -> Occupations {
        Occupations {
            n1: self.n1.clone(),
            n2: self.n2.clone(),
            na: self.na.clone(),
        }
    }

    fn axpy(&mut self, a: f64, o: &Self) {
        let real = |x: &mut [f64], y: &[f64]| x.iter_mut().zip(y).for_each(|(p, q)| *p += a * q);
        real(&mut self.na, &o.na);
        real(&mut self.n1, &o.n1);
        real(&mut self.n2, &o.n2);
        real(&mut self.x_diag, &o.x_diag);
        self.y.iter_mut().zip(&o.y).for_each(|(p, q)| *p += q * a);
        self.x_corr.iter_mut().zip(&o.x_corr).for_each(|(p, q)| *p += q * a);
    }

    fn is_finite(&self) -> bool {
        self.na.iter().chain(&self.n1).chain(&self.n2).chain(&self.x_diag).all(|v| v.is_finite())
            && self.y.iter().chain(&self.x_corr).all(|z| z.is_finite())
    }

    /// Largest departure below 0 / above 1 of the populations.
    pub fn bound_violation(&self) -> f64 {
        let mut v: f64 = 0.0;
        for &x in self.n1.iter().chain(&self.n2) {
            v = v.max(-x).max(x - 1.0);
        }
        for &x in &self.na {
            v = v.max(-x);
        }
        v
    }
}

/// Time derivative of the state.
pub fn rhs(state: &DynamicState, rates: &RateTable, device: &Device, mode: Mode) -> Result<DynamicState> {
    match mode {
        Mode::Reduced => reduced_rhs(state, rates, device),
        _ => coherent_rhs(state, rates, device, mode),
    }
}

struct Sums {
    /// W_k = Σ_q w_q χ_q Ŷ_{q,k}
    w: Vec<Complex64>,
    /// Z_q = Σ_k w_k Ŷ_{q,k}
    z: Vec<Complex64>,
}

fn coherence_sums(state: &DynamicState, device: &Device) -> Sums {
    let g = &device.grids;
    let (nk, nq) = (g.nk(), g.nq());
    let mut w = vec![Complex64::new(0.0, 0.0); nk];
    let mut z = vec![Complex64::new(0.0, 0.0); nq];
    for q in 0..nq {
        let chi = g.chi_sq[q].sqrt();
        for k in 0..nk {
            let y = state.y[q * nk + k];
            w[k] += y * (g.w_q[q] * chi);
            z[q] += y * g.w_k[k];
        }
    }
    Sums { w, z }
}

/// Photon and carrier drive terms 2iχŶ + c.c. and ±iχŶ + c.c., kept
/// complex so the cancellation of their imaginary parts can be checked.
pub fn population_drives(state: &DynamicState, device: &Device) -> (Vec<Complex64>, Vec<Complex64>) {
    let g = &device.grids;
    let s = coherence_sums(state, device);
    let photon = (0..g.nq())
        .map(|q| {
            let t = 2.0 * I * g.chi_sq[q].sqrt() * s.z[q];
            t + t.conj()
        })
        .collect();
    let carrier = s
        .w
        .iter()
        .map(|w| {
            let t = I * w;
            t + t.conj()
        })
        .collect();
    (photon, carrier)
}

fn relaxation_targets(state: &DynamicState, device: &Device) -> Result<Occupations> {
    let g = &device.grids;
    let total = g.k_sum(&state.n1) + g.k_sum(&state.n2);
    let eps_f = grid_fermi_level(total, g, &device.params)?;
    Ok(equilibrium_occupations(eps_f, g, &device.params))
}

fn coherent_rhs(state: &DynamicState, rates: &RateTable, device: &Device, mode: Mode) -> Result<DynamicState> {
    let g = &device.grids;
    let r = &device.rates;
    let (nk, nq) = (g.nk(), g.nq());
    let eq = relaxation_targets(state, device)?;
    let t = &rates.total;
    let sums = coherence_sums(state, device);
    let (photon_drive, carrier_drive) = population_drives(state, device);

    let dk: Vec<f64> = (0..nk).map(|k| state.n1[k] - state.n2[k]).collect();
    let fk: Vec<f64> = (0..nk).map(|k| state.n2[k] * (1.0 - state.n1[k])).collect();
    let d_tot = g.k_sum(&dk);

    let mut out = DynamicState::zeros(nk, nq, mode);
    for q in 0..nq {
        out.na[q] = -2.0 * r.gamma * state.na[q] + photon_drive[q].re;
    }
    for k in 0..nk {
        let n1 = state.n1[k];
        let n2 = state.n2[k];
        out.n1[k] = -(n1 - eq.n1[k]) * r.tau_inv - t.gout1[k] * n1 + t.gin1[k] * (1.0 - n1) + carrier_drive[k].re;
        out.n2[k] = -(n2 - eq.n2[k]) * r.tau_inv - t.gout2[k] * n2 + t.gin2[k] * (1.0 - n2) - carrier_drive[k].re;
    }

    // X_d(k) + Σ_k' w_k' X̂_q(k',k) for every (q,k)
    let mut xsum = vec![Complex64::new(0.0, 0.0); nq * nk];
    match mode {
        Mode::Full => {
            for q in 0..nq {
                for k in 0..nk {
                    let mut acc = Complex64::new(state.x_diag[k], 0.0);
                    for kp in 0..nk {
                        acc += state.x_corr[(q * nk + kp) * nk + k] * g.w_k[kp];
                    }
                    xsum[q * nk + k] = acc;
                }
            }
            for k in 0..nk {
                let src = I * (1.0 - dk[k]) * (sums.w[k].conj() - sums.w[k]);
                out.x_diag[k] = -r.gamma_x * (state.x_diag[k] - 2.0 * fk[k]) + src.re;
            }
            for q in 0..nq {
                let chi = g.chi_sq[q].sqrt();
                for kp in 0..nk {
                    for k in 0..nk {
                        let idx = (q * nk + kp) * nk + k;
                        let y_kp = state.y[q * nk + kp];
                        let y_k = state.y[q * nk + k];
                        out.x_corr[idx] =
                            -r.gamma_x * state.x_corr[idx] + 2.0 * I * chi * (y_kp.conj() * dk[k] - y_k * dk[kp]);
                    }
                }
            }
        }
        Mode::AdiabaticX => {
            for q in 0..nq {
                let chi = g.chi_sq[q].sqrt();
                for k in 0..nk {
                    let xd = 2.0 * fk[k] + 2.0 * (1.0 - dk[k]) * sums.w[k].im / r.gamma_x;
                    let corr = 2.0 * I * chi / r.gamma_x * (dk[k] * sums.z[q].conj() - state.y[q * nk + k] * d_tot);
                    xsum[q * nk + k] = corr + xd;
                }
            }
        }
        Mode::Reduced => unreachable!(),
    }

    for q in 0..nq {
        let chi = g.chi_sq[q].sqrt();
        let delta = g.omega_c[q] - device.omega12();
        let a = I * delta - r.gamma_y;
        for k in 0..nk {
            let idx = q * nk + k;
            out.y[idx] = a * state.y[idx] - I * chi * xsum[idx] + I * chi * state.na[q] * dk[k];
        }
    }
    Ok(out)
}

fn reduced_rhs(state: &DynamicState, rates: &RateTable, device: &Device) -> Result<DynamicState> {
    let g = &device.grids;
    let (nk, nq) = (g.nk(), g.nq());
    let x = steady::pack(&state.occupations());
    let ev = steady::evaluate(&x, rates, device)?;
    let mut out = DynamicState::zeros(nk, nq, Mode::Reduced);
    for k in 0..nk {
        out.n1[k] = -2.0 * ev.r[k];
        out.n2[k] = -ev.r[nk + k] + 2.0 * ev.r[k];
    }
    for q in 0..nq {
        let (c, _, _) = steady::photon_balance(g.chi_sq[q], ev.aux.delta_q[q], &ev.drive, 0.0, &device.rates);
        out.na[q] = -2.0 * device.rates.gamma * ev.r[2 * nk + q] / c;
    }
    Ok(out)
}

/// Relative size of the population derivatives, in units of ω₁₂:
/// max over families of max|ẋ| / max|x|.
pub fn rhs_norm(state: &DynamicState, d: &DynamicState, omega12: f64) -> f64 {
    let fam = |x: &[f64], dx: &[f64]| {
        let s = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let ds = dx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if s > 0.0 {
            ds / s
        } else {
            ds
        }
    };
    fam(&state.n1, &d.n1).max(fam(&state.n2, &d.n2)).max(fam(&state.na, &d.na)) / omega12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    /// Time step in units of 1/ω₁₂. RK4 is stable for dt·λ < 2.8 with λ the
    /// largest rate, here max(|δ| + Γ_Y + 2χ²D/Γ_X, Γ_X, contact rates).
    pub dt: f64,
    /// Final time (ps).
    pub t_max: f64,
    pub mode: Mode,
    /// Stop when the relative population derivative falls below this.
    pub tol: f64,
    /// Trajectory sampling stride (steps).
    pub record_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            t_max: 400.0,
            mode: Mode::AdiabaticX,
            tol: 1e-10,
            record_stride: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    /// Σ_q w_q n_a (cm⁻²).
    pub photons: f64,
    /// Sheet densities with spin factor (cm⁻²).
    pub density1: f64,
    pub density2: f64,
    pub y_max: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub final_state: DynamicState,
    pub t_final: f64,
    pub steps: usize,
    pub rhs_norm: f64,
    pub converged: bool,
    pub max_bound_violation: f64,
}

fn sample(t: f64, s: &DynamicState, device: &Device) -> TrajectorySample {
    let g = &device.grids;
    TrajectorySample {
        t,
        photons: g.q_sum(&s.na),
        density1: 2.0 * g.k_sum(&s.n1),
        density2: 2.0 * g.k_sum(&s.n2),
        y_max: s.y.iter().fold(0.0, |m, z| m.max(z.norm())),
    }
}

fn check_mode(device: &Device, mode: Mode) -> Result<()> {
    if mode == Mode::Full && (device.grids.nk() > FULL_MODE_MAX_NK || device.grids.nq() > FULL_MODE_MAX_NQ) {
        return Err(Error::InvalidParameter {
            name: "mode",
            reason: format!(
                "full mode is limited to nk <= {FULL_MODE_MAX_NK}, nq <= {FULL_MODE_MAX_NQ}"
            ),
        });
    }
    Ok(())
}

/// Classical fixed-step RK4. Stops at `t_max` or once the relative
/// population derivative drops below `tol`.
pub fn integrate(state0: &DynamicState, config: &IntegratorConfig, rates: &RateTable, device: &Device) -> Result<Trajectory> {
    check_mode(device, config.mode)?;
    let dt = config.dt / device.omega12();
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "time step must be positive".into(),
        });
    }
    let mode = config.mode;
    let f = |s: &DynamicState| rhs(s, rates, device, mode);
    let mut s = state0.clone();
    let mut t = 0.0;
    let mut samples = vec![sample(0.0, &s, device)];
    let mut worst: f64 = 0.0;
    let mut steps = 0;
    let blowup = 1e6;
    loop {
        let k1 = f(&s)?;
        let norm = rhs_norm(&s, &k1, device.omega12());
        if norm < config.tol || t >= config.t_max - 0.5 * dt {
            let converged = norm < config.tol;
            if steps % config.record_stride.max(1) != 0 {
                samples.push(sample(t, &s, device));
            }
            return Ok(Trajectory {
                samples,
                final_state: s,
                t_final: t,
                steps,
                rhs_norm: norm,
                converged,
                max_bound_violation: worst,
            });
        }
        let mut tmp = s.clone();
        tmp.axpy(0.5 * dt, &k1);
        let k2 = f(&tmp)?;
        tmp.clone_from(&s);
        tmp.axpy(0.5 * dt, &k2);
        let k3 = f(&tmp)?;
        tmp.clone_from(&s);
        tmp.axpy(dt, &k3);
        let k4 = f(&tmp)?;
        s.axpy(dt / 6.0, &k1);
        s.axpy(dt / 3.0, &k2);
        s.axpy(dt / 3.0, &k3);
        s.axpy(dt / 6.0, &k4);
        t += dt;
        steps += 1;
        if !s.is_finite() || s.na.iter().chain(&s.n1).chain(&s.n2).any(|v| v.abs() > blowup) {
            return Err(Error::Unstable { t, dt });
        }
        worst = worst.max(s.bound_violation());
        if steps % config.record_stride.max(1) == 0 {
            samples.push(sample(t, &s, device));
        }
    }
}

/// Integrates from the zero-bias thermal state (contact equilibrium at
/// V = 0, no photons, no correlations) to the steady state at `bias`.
pub fn relax_to_steady(
    bias: BiasPoint,
    contacts: &ContactModel,
    device: &Device,
    config: &IntegratorConfig,
) -> Result<(SteadyState, Trajectory)> {
    let zero = contacts.tables(BiasPoint::new(0.0), &device.grids, &device.params);
    let mut start = steady::unpack(&steady::contact_equilibrium(&zero, device), device.grids.nk());
    start.na.iter_mut().for_each(|v| *v = 0.0);
    let s0 = DynamicState::from_occupations(&start, config.mode);
    let rates = contacts.tables(bias, &device.grids, &device.params);
    let traj = integrate(&s0, config, &rates, device)?;
    if !traj.converged {
        return Err(Error::Timeout {
            t_max: config.t_max,
            norm: traj.rhs_norm,
        });
    }
    let mut occ = traj.final_state.occupations();
    // integration error may leave tails a hair outside the physical range
    for v in occ.n1.iter_mut().chain(occ.n2.iter_mut()) {
        *v = v.clamp(0.0, 1.0);
    }
    occ.na.iter_mut().for_each(|v| *v = v.max(0.0));
    let state = steady::steady_state_from(occ, &rates, device, bias)?;
    Ok((state, traj))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::GridSpec;
    use crate::params::PhysicalParams;

    fn small() -> Device {
        Device::new(PhysicalParams::default(), &GridSpec::new(12, 4)).unwrap()
    }

    #[test]
    fn hermitian_drives() {
        let d = small();
        let mut s = DynamicState::zeros(12, 4, Mode::AdiabaticX);
        for (i, y) in s.y.iter_mut().enumerate() {
            *y = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()) * 1e-3;
        }
        let (p, c) = population_drives(&s, &d);
        for z in p.iter().chain(&c) {
            assert!(z.im.abs() < 1e-14 * (1.0 + z.re.abs()), "{z}");
        }
    }

    #[test]
    fn source_isolation() {
        // Y = X = 0 and n₂(1−n₁) = 0: only iχ n_a D_k drives Y
        let d = small();
        let contacts = ContactModel::reference_default(150.0);
        let rates = contacts.tables(BiasPoint::new(150.0), &d.grids, &d.params);
        let mut s = DynamicState::zeros(12, 4, Mode::Full);
        s.n1 = vec![0.4; 12];
        s.n2 = vec![0.0; 12];
        s.na = vec![0.01, 0.02, 0.03, 0.04];
        let dsdt = rhs(&s, &rates, &d, Mode::Full).unwrap();
        for q in 0..4 {
            let chi = d.grids.chi_sq[q].sqrt();
            for k in 0..12 {
                let expect = I * chi * s.na[q] * 0.4;
                assert!((dsdt.y[q * 12 + k] - expect).norm() < 1e-12 * expect.norm());
            }
        }
    }

    #[test]
    fn full_mode_size_guard() {
        let d = Device::reference_default();
        let cfg = IntegratorConfig {
            mode: Mode::Full,
            ..Default::default()
        };
        let rates = ContactModel::reference_default(150.0).tables(BiasPoint::new(0.0), &d.grids, &d.params);
        let s = DynamicState::zeros(40, 16, Mode::Full);
        assert!(integrate(&s, &cfg, &rates, &d).is_err());
    }
}
