//! Fermi-Dirac statistics and the self-consistent quantum-well Fermi level.

use crate::error::{Error, Result};
use crate::grids::Grids;
use crate::model::Occupations;
use crate::params::PhysicalParams;
use crate::units::{beta, dos_2d};

/// 1/(e^x + 1) without overflow.
#[inline]
pub fn fermi_x(x: f64) -> f64 {
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

/// ln(1 + e^x) without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn fermi_dirac(eps: f64, mu: f64, temperature: f64) -> f64 {
    fermi_x(beta(temperature) * (eps - mu))
}

/// Per-spin sheet density of both subbands in equilibrium at `mu` (continuum
/// integral over the 2D density of states), cm⁻².
pub fn equilibrium_density(mu: f64, params: &PhysicalParams) -> f64 {
    let b = params.beta();
    dos_2d(params.m_star) / b * (softplus(b * mu) + softplus(b * (mu - params.e12)))
}

const MAX_ITER: usize = 200;

/// Solves ln N(μ) = ln N* for a monotone increasing N. `eval` returns
/// (ln N, d ln N / dμ).
fn solve_log_monotone<F>(eval: F, target: f64, guess: f64, scale: f64) -> Option<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let lt = target.ln();
    let g = |mu: f64| {
        let (ln, d) = eval(mu);
        (ln - lt, d)
    };
    // bracket
    let mut lo = guess - scale;
    let mut hi = guess + scale;
    let mut step = scale;
    for _ in 0..200 {
        if g(lo).0 <= 0.0 {
            break;
        }
        step *= 2.0;
        lo -= step;
    }
    step = scale;
    for _ in 0..200 {
        if g(hi).0 >= 0.0 {
            break;
        }
        step *= 2.0;
        hi += step;
    }
    if !(g(lo).0 <= 0.0 && g(hi).0 >= 0.0) {
        return None;
    }
    let mut mu = guess.clamp(lo, hi);
    for _ in 0..MAX_ITER {
        let (r, d) = g(mu);
        if !r.is_finite() {
            return None;
        }
        if r.abs() < 1e-15 {
            return Some(mu);
        }
        if r > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        let mut next = mu - r / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - mu).abs() <= 1e-15 * (1.0 + mu.abs()) || hi - lo <= 1e-14 * (1.0 + mu.abs()) {
            return Some(next);
        }
        mu = next;
    }
    Some(mu)
}

/// Fermi level reproducing the per-spin sheet density `density` (cm⁻²) with
/// the continuum 2D integral. Returns −∞ for zero density.
pub fn solve_fermi_level(density: f64, params: &PhysicalParams) -> Result<f64> {
    if density < 0.0 || !density.is_finite() {
        return Err(Error::FermiLevel { density });
    }
    if density == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let b = params.beta();
    let dos = dos_2d(params.m_star);
    let e12 = params.e12;
    let eval = |mu: f64| {
        let s1 = softplus(b * mu);
        let s2 = softplus(b * (mu - e12));
        // ln(s1 + s2) stable for very negative mu where s ~ e^x
        let ln_s = if s1 > 1e-280 {
            (s1 + s2).ln()
        } else {
            b * mu + (1.0 + (-b * e12).exp()).ln()
        };
        let ln = (dos / b).ln() + ln_s;
        let d = dos * (1.0 - fermi_x(b * mu) + 1.0 - fermi_x(b * (mu - e12))) / (dos / b * (s1 + s2));
        let d = if d.is_finite() { d } else { b };
        (ln, d)
    };
    // zero-temperature filling as starting point
    let guess = (density / dos).min(e12);
    solve_log_monotone(eval, density, guess, 10.0 / b).ok_or(Error::FermiLevel { density })
}

/// Fermi level reproducing `density` with the grid quadrature itself, so that
/// equilibrium occupations carry exactly the same discrete density.
pub fn grid_fermi_level(density: f64, grids: &Grids, params: &PhysicalParams) -> Result<f64> {
    let capacity: f64 = 2.0 * grids.w_k.iter().sum::<f64>();
    if !density.is_finite() {
        return Err(Error::FermiLevel { density });
    }
    if density <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if density >= capacity {
        return Ok(f64::INFINITY);
    }
    let b = params.beta();
    let e12 = params.e12;
    let eval = |mu: f64| {
        // log-sum-exp over both subbands
        let mut m = f64::NEG_INFINITY;
        for (&e, &w) in grids.eps.iter().zip(&grids.w_k) {
            for x in [b * (e - mu), b * (e + e12 - mu)] {
                m = m.max(w.ln() - softplus(x));
            }
        }
        let mut s = 0.0;
        let mut ds = 0.0;
        for (&e, &w) in grids.eps.iter().zip(&grids.w_k) {
            for x in [b * (e - mu), b * (e + e12 - mu)] {
                let t = (w.ln() - softplus(x) - m).exp();
                s += t;
                ds += t * fermi_x(-x);
            }
        }
        (m + s.ln(), b * ds / s)
    };
    let guess = solve_fermi_level(density, params).unwrap_or(0.0);
    let guess = if guess.is_finite() { guess } else { 0.0 };
    solve_log_monotone(eval, density, guess, 2.0 / b).ok_or(Error::FermiLevel { density })
}

/// Equilibrium occupations n₁⁰, n₂⁰ at Fermi level `eps_f`; `na` is empty.
pub fn equilibrium_occupations(eps_f: f64, grids: &Grids, params: &PhysicalParams) -> Occupations {
    let b = params.beta();
    let occ = |e: f64| {
        if eps_f == f64::NEG_INFINITY {
            0.0
        } else if eps_f == f64::INFINITY {
            1.0
        } else {
            fermi_x(b * (e - eps_f))
        }
    };
    Occupations {
        n1: grids.eps.iter().map(|&e| occ(e)).collect(),
        n2: grids.eps.iter().map(|&e| occ(e + params.e12)).collect(),
        na: Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::build_grids;

    #[test]
    fn fermi_values() {
        assert_eq!(fermi_dirac(50.0, 50.0, 77.0), 0.5);
        let kt = crate::units::K_B * 77.0;
        let f = fermi_dirac(10.0 * kt, 0.0, 77.0);
        assert!((f - 1.0 / (10f64.exp() + 1.0)).abs() < 1e-18);
        assert!((f - 4.54e-5).abs() < 1e-7);
        for x in [0.3, 2.0, 40.0, 900.0] {
            assert!((fermi_dirac(5.0 + x, 5.0, 300.0) + fermi_dirac(5.0 - x, 5.0, 300.0) - 1.0).abs() < 1e-15);
        }
        assert_eq!(fermi_x(1e6), 0.0);
        assert_eq!(fermi_x(-1e6), 1.0);
    }

    #[test]
    fn closed_form_round_trip() {
        let p = PhysicalParams::default();
        for n in [1e3, 1e8, 3e10, 5e11, 2e12, 4e13] {
            let mu = solve_fermi_level(n, &p).unwrap();
            let back = equilibrium_density(mu, &p);
            assert!((back - n).abs() / n < 1e-10, "n {n}: {back}");
        }
    }

    #[test]
    fn vanishing_density_gives_deep_level() {
        let p = PhysicalParams::default();
        assert_eq!(solve_fermi_level(0.0, &p).unwrap(), f64::NEG_INFINITY);
        let mu = solve_fermi_level(1e-3, &p).unwrap();
        assert!(mu < -20.0 * p.k_t());
    }

    #[test]
    fn cold_limit_is_step_filling() {
        let p = PhysicalParams {
            temperature: 0.5,
            ..Default::default()
        };
        let n = 1e12;
        let mu = solve_fermi_level(n, &p).unwrap();
        let expect = n / dos_2d(p.m_star);
        assert!((mu - expect).abs() / expect < 1e-6);
    }

    #[test]
    fn grid_level_matches_grid_density() {
        let p = PhysicalParams::default();
        let g = build_grids(&p, 40, 16).unwrap();
        for n in [1e6, 1.2e10, 5e11, 2e12] {
            let mu = grid_fermi_level(n, &g, &p).unwrap();
            let occ = equilibrium_occupations(mu, &g, &p);
            let back = g.k_sum(&occ.n1) + g.k_sum(&occ.n2);
            assert!((back - n).abs() / n < 1e-13, "{n}: {back}");
            // and close to the continuum answer
            let mu_c = solve_fermi_level(n, &p).unwrap();
            assert!((mu - mu_c).abs() < 0.05, "{mu} vs {mu_c}");
        }
    }

    #[test]
    fn equilibrium_occupation_landmarks() {
        let p = PhysicalParams::default();
        let g = build_grids(&p, 40, 16).unwrap();
        let z = equilibrium_occupations(f64::NEG_INFINITY, &g, &p);
        assert!(z.n1.iter().chain(&z.n2).all(|&x| x == 0.0));
        let o = equilibrium_occupations(37.0, &g, &p);
        for (i, &e) in g.eps.iter().enumerate() {
            assert_eq!(o.n2[i], fermi_dirac(e + p.e12, 37.0, p.temperature));
        }
        // n2⁰(ε) = n1⁰(ε + E12) for a grid spacing dividing E12
        let g2 = build_grids(&p, 40, 16).unwrap();
        let o2 = equilibrium_occupations(p.e12, &g2, &p);
        assert!((fermi_dirac(p.e12, p.e12, p.temperature) - 0.5).abs() < 1e-15);
        assert!(o2.n2[0] < 0.5 && o2.n2[0] > 0.4);
    }
}
