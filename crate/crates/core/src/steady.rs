//! Steady-state algebraic system for carrier and photon populations, solved
//! by damped Newton iteration with voltage continuation.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::contacts::{BiasPoint, ContactModel, RateTable};
use crate::device::Device;
use crate::error::{Error, Result};
use crate::fermi::{equilibrium_occupations, grid_fermi_level};
use crate::model::Occupations;
use crate::params::Rates;

/// Packs occupations as [n₁ | n₂ | n_a].
pub fn pack(occ: &Occupations) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * occ.n1.len() + occ.na.len());
    x.extend_from_slice(&occ.n1);
    x.extend_from_slice(&occ.n2);
    x.extend_from_slice(&occ.na);
    x
}

pub fn unpack(x: &[f64], nk: usize) -> Occupations {
    Occupations {
        n1: x[..nk].to_vec(),
        n2: x[nk..2 * nk].to_vec(),
        na: x[2 * nk..].to_vec(),
    }
}

/// Derived quantities of an electronic state.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxQuantities {
    pub eps_f: f64,
    pub n10: Vec<f64>,
    pub n20: Vec<f64>,
    pub dk: Vec<f64>,
    pub fk: Vec<f64>,
    /// Σ_k w_k D_k per spin (cm⁻²).
    pub d: f64,
    pub f: f64,
    pub bq: Vec<f64>,
    pub delta_q: Vec<f64>,
    pub gq: Vec<f64>,
}

pub fn aux_quantities(occ: &Occupations, device: &Device) -> Result<AuxQuantities> {
    let g = &device.grids;
    let r = &device.rates;
    let total = g.k_sum(&occ.n1) + g.k_sum(&occ.n2);
    let eps_f = grid_fermi_level(total, g, &device.params)?;
    let eq = equilibrium_occupations(eps_f, g, &device.params);
    let dk: Vec<f64> = occ.n1.iter().zip(&occ.n2).map(|(a, b)| a - b).collect();
    let fk: Vec<f64> = occ.n1.iter().zip(&occ.n2).map(|(a, b)| b * (1.0 - a)).collect();
    let d = g.k_sum(&dk);
    let f = g.k_sum(&fk);
    let bq: Vec<f64> = g.chi_sq.iter().map(|c| r.gamma_y + 2.0 * c * d / r.gamma_x).collect();
    let delta_q: Vec<f64> = g.omega_c.iter().map(|w| w - device.omega12()).collect();
    let gq = delta_q.iter().zip(&bq).map(|(dl, b)| dl * dl + b * b).collect();
    Ok(AuxQuantities {
        eps_f,
        n10: eq.n1,
        n20: eq.n2,
        dk,
        fk,
        d,
        f,
        bq,
        delta_q,
        gq,
    })
}

/// Net loss rate of each state: relaxation plus tunneling imbalance,
/// (n − n⁰)/τ + Γ^out n − Γ^in (1 − n), with a magnitude scale for each entry.
fn loss_rates(n: &[f64], n0: &[f64], gin: &[f64], gout: &[f64], tau_inv: f64) -> (Vec<f64>, Vec<f64>) {
    let mut v = Vec::with_capacity(n.len());
    let mut s = Vec::with_capacity(n.len());
    for k in 0..n.len() {
        let a = (n[k] - n0[k]) * tau_inv;
        let b = gout[k] * n[k];
        let c = gin[k] * (1.0 - n[k]);
        v.push(a + b - c);
        s.push(a.abs() + b.abs() + c.abs());
    }
    (v, s)
}

/// Electronic quantities that fix the photon occupation of any cavity mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElectronicDrive {
    pub d: f64,
    pub f: f64,
    /// Σ_k w_k (1 − D_k) R₁,k.
    pub relax_drive: f64,
}

/// Photon balance c·n_a = src for one mode, multiplied through by 2Dχ² so
/// that it stays regular as D → 0 or χ → 0. Returns (c, src, scale of src).
pub(crate) fn photon_balance(chi_sq: f64, delta: f64, drive: &ElectronicDrive, drive_scale: f64, r: &Rates) -> (f64, f64, f64) {
    let b = r.gamma_y + 2.0 * chi_sq * drive.d / r.gamma_x;
    let g = delta * delta + b * b;
    let c = (b * (r.gamma + r.gamma_x) + delta * delta * r.gamma / r.gamma_y) * 2.0 * drive.d * chi_sq
        + g * r.gamma_x * r.gamma;
    let src = 2.0 * chi_sq * b * (2.0 * drive.f * r.gamma_x - drive.relax_drive);
    let scale = 2.0 * chi_sq * b.abs() * (2.0 * drive.f.abs() * r.gamma_x + drive_scale);
    (c, src, scale)
}

/// Steady photon occupation of a mode with coupling χ² and detuning δ.
pub fn photon_occupation(chi_sq: f64, delta: f64, drive: &ElectronicDrive, r: &Rates) -> f64 {
    let (c, src, _) = photon_balance(chi_sq, delta, drive, 0.0, r);
    src / c
}

pub(crate) struct Evaluation {
    pub r: Vec<f64>,
    pub scale: Vec<f64>,
    pub aux: AuxQuantities,
    pub drive: ElectronicDrive,
}

pub(crate) fn evaluate(x: &[f64], rates: &RateTable, device: &Device) -> Result<Evaluation> {
    let g = &device.grids;
    let rt = &device.rates;
    let nk = g.nk();
    let nq = g.nq();
    let occ = unpack(x, nk);
    let aux = aux_quantities(&occ, device)?;
    let t = &rates.total;
    let (r1, s1) = loss_rates(&occ.n1, &aux.n10, &t.gin1, &t.gout1, rt.tau_inv);
    let (r2, s2) = loss_rates(&occ.n2, &aux.n20, &t.gin2, &t.gout2, rt.tau_inv);

    let mut relax_drive = 0.0;
    let mut drive_scale = 0.0;
    for k in 0..nk {
        relax_drive += g.w_k[k] * (1.0 - aux.dk[k]) * r1[k];
        drive_scale += g.w_k[k] * (1.0 - aux.dk[k]).abs() * s1[k];
    }
    let drive = ElectronicDrive {
        d: aux.d,
        f: aux.f,
        relax_drive,
    };

    let mut r = vec![0.0; 2 * nk + nq];
    let mut scale = vec![0.0; 2 * nk + nq];

    // sums over photon modes entering the subband-1 family
    let (mut sa, mut sb, mut sc, mut sb_abs) = (0.0, 0.0, 0.0, 0.0);
    for q in 0..nq {
        let (b, gq, dl, chi2, w) = (aux.bq[q], aux.gq[q], aux.delta_q[q], g.chi_sq[q], g.w_q[q]);
        sa += w * b * chi2 / (gq * rt.gamma_x);
        let t2 = w * chi2 * occ.na[q] / gq * (rt.gamma_y * b * (rt.gamma + rt.gamma_x) + dl * dl * rt.gamma);
        sb += t2;
        sb_abs += t2.abs();
        sc += w * b * chi2 / gq;
    }
    let gxy = rt.gamma_x * rt.gamma_y;
    for k in 0..nk {
        let c = sa * (1.0 - aux.dk[k]) + 0.5;
        let a = c * r1[k];
        let b = aux.dk[k] * sb / gxy;
        let f = 2.0 * aux.fk[k] * sc;
        r[k] = a + b - f;
        scale[k] = c.abs() * s1[k] + aux.dk[k].abs() * sb_abs / gxy + f.abs();
        r[nk + k] = r1[k] + r2[k];
        scale[nk + k] = s1[k] + s2[k];
    }
    for q in 0..nq {
        let (c, src, sscale) = photon_balance(g.chi_sq[q], aux.delta_q[q], &drive, drive_scale, rt);
        r[2 * nk + q] = c * occ.na[q] - src;
        scale[2 * nk + q] = (c * occ.na[q]).abs() + sscale;
    }
    Ok(Evaluation { r, scale, aux, drive })
}

/// Residuals of the three equation families, ordered [subband-1 | particle
/// conservation | photon], each signed so that a positive residual
/// corresponds to a decreasing population.
pub fn residuals(x: &[f64], rates: &RateTable, device: &Device) -> Result<Vec<f64>> {
    Ok(evaluate(x, rates, device)?.r)
}

/// Residuals together with the per-equation magnitude scales.
pub fn scaled_residuals(x: &[f64], rates: &RateTable, device: &Device) -> Result<(Vec<f64>, Vec<f64>)> {
    let e = evaluate(x, rates, device)?;
    Ok((e.r, e.scale))
}

/// max_i |r_i| / scale_i.
pub fn relative_norm(r: &[f64], scale: &[f64]) -> f64 {
    r.iter()
        .zip(scale)
        .map(|(a, s)| if *s > 0.0 { a.abs() / s } else if *a == 0.0 { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub residual_tol: f64,
    pub initial_step: f64,
    pub backtrack: f64,
    pub min_step: f64,
    /// Relative forward-difference step of the Jacobian.
    pub fd_step: f64,
    /// Lower bound on |x| when sizing the difference step. A purely relative
    /// step on tail occupations perturbs the total density below its
    /// rounding and loses the Fermi-level coupling, while the residuals vary
    /// smoothly on the O(1) scale of an occupation.
    pub fd_floor: f64,
    /// Largest bias increment (meV) used when a point needs continuation.
    pub continuation_dv: f64,
    pub pseudo_transient: bool,
    pub pseudo_transient_steps: usize,
    /// Extra Newton steps after convergence while the residual halves.
    pub polish_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            residual_tol: 1e-10,
            initial_step: 1.0,
            backtrack: 0.5,
            min_step: 2f64.powi(-20),
            fd_step: 1e-7,
            fd_floor: 1e-3,
            continuation_dv: 15.0,
            pseudo_transient: true,
            pseudo_transient_steps: 50,
            polish_steps: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub residual: f64,
    pub step: f64,
    pub pseudo_transient: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub residual: f64,
    pub history: Vec<IterationRecord>,
    /// Largest occupation in the top energy cell.
    pub tail_occupation: f64,
    /// |D| below 10⁻⁸ of the total density.
    pub near_degenerate: bool,
    /// Accepted at the rounding floor above `residual_tol`.
    pub stagnated: bool,
}

/// Converged steady state at one bias point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub bias: BiasPoint,
    pub occupations: Occupations,
    pub eps_f: f64,
    pub drive: ElectronicDrive,
    pub rates: RateTable,
    pub diagnostics: Diagnostics,
}

impl SteadyState {
    pub fn packed(&self) -> Vec<f64> {
        pack(&self.occupations)
    }

    /// Photon occupation of an arbitrary mode q (not necessarily on the grid).
    pub fn photon_occupation_at(&self, q: f64, device: &Device) -> f64 {
        let chi_sq = device.cavity.chi_sq(q);
        let delta = device.cavity.dispersion(q) - device.omega12();
        photon_occupation(chi_sq, delta, &self.drive, &device.rates)
    }
}

fn jacobian(x: &[f64], r0: &[f64], rates: &RateTable, device: &Device, cfg: &SolverConfig) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for c in 0..n {
        let h = cfg.fd_step * x[c].abs().max(cfg.fd_floor);
        xp[c] = x[c] + h;
        let h = xp[c] - x[c];
        let rp = residuals(&xp, rates, device)?;
        for i in 0..n {
            j[(i, c)] = (rp[i] - r0[i]) / h;
        }
        xp[c] = x[c];
    }
    Ok(j)
}

/// Forward-difference Jacobian of [`residuals`].
pub fn forward_jacobian(x: &[f64], rates: &RateTable, device: &Device, cfg: &SolverConfig) -> Result<DMatrix<f64>> {
    let r0 = residuals(x, rates, device)?;
    jacobian(x, &r0, rates, device, cfg)
}

/// Central-difference Jacobian, used to check the forward one.
pub fn central_jacobian(x: &[f64], rates: &RateTable, device: &Device, cfg: &SolverConfig) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut j = DMatrix::zeros(n, n);
    let mut xp = x.to_vec();
    for c in 0..n {
        let h = cfg.fd_step * x[c].abs().max(cfg.fd_floor);
        xp[c] = x[c] + h;
        let rp = residuals(&xp, rates, device)?;
        xp[c] = x[c] - h;
        let rm = residuals(&xp, rates, device)?;
        xp[c] = x[c];
        for i in 0..n {
            j[(i, c)] = (rp[i] - rm[i]) / (2.0 * h);
        }
    }
    Ok(j)
}

fn weighted_norm(r: &[f64], s: &[f64]) -> f64 {
    r.iter()
        .zip(s)
        .map(|(a, b)| if *b > 0.0 { (a / b).powi(2) } else { a * a })
        .sum::<f64>()
        .sqrt()
}

/// Damped Newton iteration from `initial` (packed [n₁ | n₂ | n_a]).
/// Row-scaled Newton step −J⁻¹r; `None` when the scaled Jacobian is singular.
fn newton_direction(
    x: &[f64],
    ev: &Evaluation,
    rates: &RateTable,
    device: &Device,
    config: &SolverConfig,
) -> Result<(DMatrix<f64>, Option<DVector<f64>>)> {
    let n = x.len();
    let jac = jacobian(x, &ev.r, rates, device, config)?;
    let s = &ev.scale;
    let row = |i: usize| if s[i] > 0.0 { 1.0 / s[i] } else { 1.0 };
    let mut js = jac.clone();
    for i in 0..n {
        let f = row(i);
        for c in 0..n {
            js[(i, c)] *= f;
        }
    }
    let rhs = DVector::from_iterator(n, (0..n).map(|i| -ev.r[i] * row(i)));
    let step = js.lu().solve(&rhs).filter(|d| d.iter().all(|v| v.is_finite()));
    Ok((jac, step))
}

/// Full Newton steps past the tolerance while each at least halves the
/// residual; balance sums such as the two current forms inherit the
/// residual, so they benefit from the extra digits.
fn polish(
    mut x: Vec<f64>,
    mut ev: Evaluation,
    mut rel: f64,
    config: &SolverConfig,
    rates: &RateTable,
    device: &Device,
) -> Result<(Vec<f64>, Evaluation, f64, usize)> {
    let mut extra = 0;
    while extra < config.polish_steps && rel > 0.0 {
        let Some(dx) = newton_direction(&x, &ev, rates, device, config)?.1 else {
            break;
        };
        let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + d).collect();
        let Ok(e) = evaluate(&trial, rates, device) else {
            break;
        };
        let r = relative_norm(&e.r, &e.scale);
        if !(r < 0.5 * rel) {
            break;
        }
        x = trial;
        ev = e;
        rel = r;
        extra += 1;
    }
    Ok((x, ev, rel, extra))
}

/// A stalled line search counts as convergence when the proposed Newton
/// correction is below this (relative, every component) ...
const STAGNATION_STEP: f64 = 1e-7;
/// ... and the relative residual below this: the remaining residual is
/// rounding noise amplified by near-cancellation (n ≈ 1 cells, D ≈ 0).
const STAGNATION_RESIDUAL: f64 = 1e-6;

pub fn newton_solve(
    initial: &[f64],
    config: &SolverConfig,
    rates: &RateTable,
    device: &Device,
    bias: BiasPoint,
) -> Result<SteadyState> {
    let n = initial.len();
    let nk = device.grids.nk();
    if n != 2 * nk + device.grids.nq() {
        return Err(Error::InvalidParameter {
            name: "initial",
            reason: format!("state length {n} does not match the grids"),
        });
    }
    if initial.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "initial",
            reason: "state contains non-finite entries".into(),
        });
    }
    let mut x = initial.to_vec();
    let mut history = Vec::new();
    let fail = |iterations: usize, residual: f64, reason: &str| Error::NonConvergence {
        iterations,
        residual,
        reason: reason.to_string(),
    };

    let mut ev = evaluate(&x, rates, device)?;
    for it in 0..=config.max_iter {
        let rel = relative_norm(&ev.r, &ev.scale);
        if rel < config.residual_tol {
            let (x, ev, rel, extra) = polish(x, ev, rel, config, rates, device)?;
            return finish(x, ev, rel, it + extra, history, rates, device, bias);
        }
        if it == config.max_iter {
            return Err(fail(it, rel, "iteration cap reached"));
        }
        let (jac, step) = newton_direction(&x, &ev, rates, device, config)?;
        let s = &ev.scale;
        let phi0 = weighted_norm(&ev.r, s);
        // largest relative correction the Newton step proposes
        let moved = step.as_ref().map_or(f64::INFINITY, |dx| {
            dx.iter()
                .zip(&x)
                .map(|(d, v)| d.abs() / v.abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        });

        let mut accepted = None;
        if let Some(dx) = step {
            let mut lam = config.initial_step;
            while lam >= config.min_step {
                let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + lam * d).collect();
                if let Ok(e) = evaluate(&trial, rates, device) {
                    let phi = weighted_norm(&e.r, s);
                    if phi.is_finite() && phi <= (1.0 - 1e-4 * lam) * phi0 {
                        accepted = Some((trial, e, lam));
                        break;
                    }
                }
                lam *= config.backtrack;
            }
        }
        if accepted.is_none() && moved < STAGNATION_STEP && rel < STAGNATION_RESIDUAL {
            let mut st = finish(x, ev, rel, it, history, rates, device, bias)?;
            st.diagnostics.stagnated = true;
            return Ok(st);
        }
        match accepted {
            Some((xn, e, lam)) => {
                history.push(IterationRecord {
                    iteration: it + 1,
                    residual: relative_norm(&e.r, &e.scale),
                    step: lam,
                    pseudo_transient: false,
                });
                x = xn;
                ev = e;
            }
            None if config.pseudo_transient => {
                // Jacobi-preconditioned pseudo-time relaxation toward the slow manifold
                let mut xn = x.clone();
                let mut e_last = None;
                for _ in 0..config.pseudo_transient_steps {
                    let e = evaluate(&xn, rates, device)?;
                    for i in 0..n {
                        let d = jac[(i, i)].abs().max(1e-300);
                        xn[i] -= 0.2 * e.r[i] / d;
                    }
                    e_last = Some(e);
                }
                let e = evaluate(&xn, rates, device)?;
                let phi = weighted_norm(&e.r, s);
                if !(phi.is_finite() && phi < phi0) || e_last.is_none() {
                    return Err(fail(it, rel, "line search stalled and pseudo-transient relaxation did not reduce the residual"));
                }
                history.push(IterationRecord {
                    iteration: it + 1,
                    residual: relative_norm(&e.r, &e.scale),
                    step: 0.0,
                    pseudo_transient: true,
                });
                x = xn;
                ev = e;
            }
            None => return Err(fail(it, rel, "line search stalled")),
        }
    }
    unreachable!()
}

#[allow(clippy::too_many_arguments)]
fn finish(
    x: Vec<f64>,
    ev: Evaluation,
    rel: f64,
    iterations: usize,
    history: Vec<IterationRecord>,
    rates: &RateTable,
    device: &Device,
    bias: BiasPoint,
) -> Result<SteadyState> {
    let nk = device.grids.nk();
    let occ = unpack(&x, nk);
    if !occ.within_bounds(1e-12) {
        return Err(Error::Unphysical(format!(
            "occupations outside [0,1] or negative photon number at qV = {} meV",
            bias.v
        )));
    }
    let tail = occ.n1[nk - 1].max(occ.n2[nk - 1]);
    let total = device.grids.k_sum(&occ.n1) + device.grids.k_sum(&occ.n2);
    Ok(SteadyState {
        bias,
        occupations: occ,
        eps_f: ev.aux.eps_f,
        drive: ev.drive,
        rates: rates.clone(),
        diagnostics: Diagnostics {
            iterations,
            residual: rel,
            history,
            tail_occupation: tail,
            near_degenerate: ev.aux.d.abs() < 1e-8 * total,
            stagnated: false,
        },
    })
}

/// Wraps populations obtained elsewhere (e.g. by time integration) as a
/// steady state, with the residual of the algebraic system as diagnostic.
pub fn steady_state_from(occ: Occupations, rates: &RateTable, device: &Device, bias: BiasPoint) -> Result<SteadyState> {
    let x = pack(&occ);
    let ev = evaluate(&x, rates, device)?;
    let rel = relative_norm(&ev.r, &ev.scale);
    finish(x, ev, rel, 0, Vec::new(), rates, device, bias)
}

/// Each subband in detailed balance with the reservoirs alone,
/// n_j = ΣΓ^in / Σ(Γ^in + Γ^out); equals the thermal distribution at zero
/// bias with equal chemical potentials. Photon numbers follow from the
/// photon balance for that electronic state.
pub fn contact_equilibrium(rates: &RateTable, device: &Device) -> Vec<f64> {
    let t = &rates.total;
    let ratio = |i: f64, o: f64| if i + o > 0.0 { i / (i + o) } else { 0.0 };
    let n1: Vec<f64> = t.gin1.iter().zip(&t.gout1).map(|(i, o)| ratio(*i, *o)).collect();
    let n2: Vec<f64> = t.gin2.iter().zip(&t.gout2).map(|(i, o)| ratio(*i, *o)).collect();
    let nq = device.grids.nq();
    let mut x = pack(&Occupations {
        n1,
        n2,
        na: vec![0.0; nq],
    });
    if let Ok(ev) = evaluate(&x, rates, device) {
        let g = &device.grids;
        let nk = g.nk();
        for q in 0..nq {
            let na = photon_occupation(g.chi_sq[q], ev.aux.delta_q[q], &ev.drive, &device.rates);
            x[2 * nk + q] = if na.is_finite() { na.max(0.0) } else { 0.0 };
        }
    }
    x
}

/// Solves a single bias point from the contact-equilibrium state, falling
/// back to a continuation ramp from zero bias if the direct attempt fails.
pub fn solve_at(
    bias: BiasPoint,
    contacts: &ContactModel,
    device: &Device,
    config: &SolverConfig,
) -> Result<SteadyState> {
    let rates = contacts.tables(bias, &device.grids, &device.params);
    let x0 = contact_equilibrium(&rates, device);
    match newton_solve(&x0, config, &rates, device, bias) {
        Ok(s) => Ok(s),
        Err(first) => {
            let steps = (bias.v.abs() / config.continuation_dv).ceil().max(1.0) as usize;
            let mut prev: Option<SteadyState> = None;
            for i in 0..=steps {
                let b = BiasPoint::new(bias.v * i as f64 / steps as f64);
                let r = contacts.tables(b, &device.grids, &device.params);
                let x = match &prev {
                    Some(p) => p.packed(),
                    None => contact_equilibrium(&r, device),
                };
                match newton_solve(&x, config, &r, device, b) {
                    Ok(s) => prev = Some(s),
                    Err(_) if i < steps => continue,
                    Err(_) => return Err(first),
                }
            }
            prev.ok_or(first)
        }
    }
}

/// Outcome of one sweep point.
#[derive(Debug)]
pub struct SweepPoint {
    pub bias: BiasPoint,
    pub result: Result<SteadyState>,
}

/// Continuation sweep: each point warm-starts from the previous converged
/// state (the first from contact equilibrium). A point that fails from the
/// warm start is retried through intermediate biases no further apart than
/// `continuation_dv`. Failures are recorded and skipped.
pub fn voltage_sweep(
    v_list: &[f64],
    contacts: &ContactModel,
    device: &Device,
    config: &SolverConfig,
) -> Vec<SweepPoint> {
    let mut out = Vec::with_capacity(v_list.len());
    let mut prev: Option<SteadyState> = None;
    for &v in v_list {
        let bias = BiasPoint::new(v);
        let rates = contacts.tables(bias, &device.grids, &device.params);
        let result = match &prev {
            None => {
                let x0 = contact_equilibrium(&rates, device);
                newton_solve(&x0, config, &rates, device, bias)
            }
            Some(p) => newton_solve(&p.packed(), config, &rates, device, bias)
                .or_else(|e| refine_from(p, v, contacts, device, config).ok_or(e)),
        };
        if let Ok(s) = &result {
            prev = Some(s.clone());
        }
        out.push(SweepPoint { bias, result });
    }
    out
}

fn refine_from(
    start: &SteadyState,
    v: f64,
    contacts: &ContactModel,
    device: &Device,
    config: &SolverConfig,
) -> Option<SteadyState> {
    let v0 = start.bias.v;
    let n = ((v - v0).abs() / config.continuation_dv.min((v - v0).abs() / 2.0).max(1e-3)).ceil() as usize;
    let mut cur = start.clone();
    for i in 1..=n {
        let b = BiasPoint::new(v0 + (v - v0) * i as f64 / n as f64);
        let r = contacts.tables(b, &device.grids, &device.params);
        cur = newton_solve(&cur.packed(), config, &r, device, b).ok()?;
    }
    Some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_round_trip() {
        let o = Occupations {
            n1: vec![0.1, 0.2],
            n2: vec![0.3, 0.4],
            na: vec![1e-3, 2e-3, 3e-3],
        };
        assert_eq!(unpack(&pack(&o), 2), o);
    }

    #[test]
    fn aux_landmarks() {
        let d = Device::reference_default();
        let nk = d.grids.nk();
        let nq = d.grids.nq();
        let same = Occupations {
            n1: vec![0.3; nk],
            n2: vec![0.3; nk],
            na: vec![0.0; nq],
        };
        let a = aux_quantities(&same, &d).unwrap();
        assert_eq!(a.d, 0.0);
        assert!(a.bq.iter().all(|&b| b == d.rates.gamma_y));
        let empty2 = Occupations {
            n1: vec![0.3; nk],
            n2: vec![0.0; nk],
            na: vec![0.0; nq],
        };
        let a = aux_quantities(&empty2, &d).unwrap();
        assert_eq!(a.f, 0.0);
        assert!(a.gq.iter().zip(&a.bq).all(|(g, b)| *g >= b * b));
    }

    #[test]
    fn relative_norm_handles_zero_scale() {
        assert_eq!(relative_norm(&[0.0, 1e-3], &[0.0, 1.0]), 1e-3);
        assert!(relative_norm(&[1.0], &[0.0]).is_infinite());
    }
}
