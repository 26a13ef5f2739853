//! Efficiency studies: η against the vacuum Rabi frequency while the
//! coupling, the nonradiative lifetime or the coherence damping is varied.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contacts::{BiasPoint, ContactModel};
use crate::device::Device;
use crate::error::Result;
use crate::grids::GridSpec;
use crate::observables::ObservableSet;
use crate::params::PhysicalParams;
use crate::steady::{solve_at, SolverConfig};

/// One point of a study; `obs` is `None` when the solve failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyPoint {
    pub tau_factor: f64,
    pub gamma_xy: f64,
    pub chi_scale: f64,
    pub obs: Option<ObservableSet>,
    pub error: Option<String>,
}

/// Fit summary of one η(Ω_R) curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub tau_factor: f64,
    pub gamma_xy: f64,
    /// Log-log slope over the lowest decade of Ω_R.
    pub weak_slope: f64,
    /// Log-log slope over the three largest Ω_R.
    pub top_slope: f64,
    pub max_eta: f64,
}

/// η(2τ)/η(τ) at equal coupling scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauRatio {
    pub tau_factor: f64,
    pub gamma_xy: f64,
    pub chi_scale: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub bias: f64,
    pub points: Vec<StudyPoint>,
    pub curves: Vec<CurveSummary>,
    pub tau_ratios: Vec<TauRatio>,
}

impl EfficiencyReport {
    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.obs.is_none()).count()
    }

    pub fn curve(&self, tau_factor: f64, gamma_xy: f64) -> Option<&CurveSummary> {
        self.curves.iter().find(|c| c.tau_factor == tau_factor && c.gamma_xy == gamma_xy)
    }
}

/// Least-squares slope of ln y against ln x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Weak-coupling and top-of-range slopes of η(Ω_R).
pub fn summarize_curve(omega_r: &[f64], eta: &[f64]) -> (f64, f64) {
    let mut pts: Vec<(f64, f64)> = omega_r
        .iter()
        .zip(eta)
        .filter(|(w, e)| **w > 0.0 && **e > 0.0)
        .map(|(w, e)| (*w, *e))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() < 2 {
        return (f64::NAN, f64::NAN);
    }
    let lo = pts[0].0;
    let weak: Vec<_> = pts.iter().filter(|p| p.0 <= 10.0 * lo).cloned().collect();
    let top = &pts[pts.len().saturating_sub(3)..];
    let s = |v: &[(f64, f64)]| {
        let (x, y): (Vec<f64>, Vec<f64>) = v.iter().cloned().unzip();
        loglog_slope(&x, &y)
    };
    (s(&weak), s(top))
}

/// Study definition. Every combination of τ factor, Γ_X = Γ_Y value and
/// coupling scale is solved at `bias`.
#[derive(Debug, Clone)]
pub struct StudySpec {
    pub bias: f64,
    pub chi_scales: Vec<f64>,
    pub tau_factors: Vec<f64>,
    /// Γ_X = Γ_Y values (units of ω₁₂); `None` keeps the configured ones.
    pub gamma_xy: Vec<Option<f64>>,
}

fn solve_point(
    params: &PhysicalParams,
    grids: &GridSpec,
    contacts: &ContactModel,
    solver: &SolverConfig,
    bias: f64,
    (tau_factor, gxy, scale): (f64, Option<f64>, f64),
) -> StudyPoint {
    let mut p = params.clone();
    p.tau_inv /= tau_factor;
    if let Some(g) = gxy {
        p.gamma_x = g;
        p.gamma_y = g;
    }
    let gamma_xy = p.gamma_x;
    let run = || -> Result<ObservableSet> {
        let dev = Device::new(p, grids)?.with_coupling_scale(scale);
        let s = solve_at(BiasPoint::new(bias), contacts, &dev, solver)?;
        Ok(ObservableSet::compute(&s, &dev))
    };
    let (obs, error) = match run() {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e.to_string())),
    };
    StudyPoint {
        tau_factor,
        gamma_xy,
        chi_scale: scale,
        obs,
        error,
    }
}

/// Runs the study on the current rayon pool; output order follows the
/// nesting τ factor, Γ_XY, χ scale regardless of scheduling.
pub fn efficiency_study(
    params: &PhysicalParams,
    grids: &GridSpec,
    contacts: &ContactModel,
    solver: &SolverConfig,
    spec: &StudySpec,
) -> EfficiencyReport {
    let gxy = if spec.gamma_xy.is_empty() { vec![None] } else { spec.gamma_xy.clone() };
    let mut jobs = Vec::new();
    for &t in &spec.tau_factors {
        for &g in &gxy {
            for &s in &spec.chi_scales {
                jobs.push((t, g, s));
            }
        }
    }
    let points: Vec<StudyPoint> = jobs
        .par_iter()
        .map(|&j| solve_point(params, grids, contacts, solver, spec.bias, j))
        .collect();

    let mut curves = Vec::new();
    let mut keys: Vec<(f64, f64)> = Vec::new();
    for p in &points {
        if !keys.contains(&(p.tau_factor, p.gamma_xy)) {
            keys.push((p.tau_factor, p.gamma_xy));
        }
    }
    for &(t, g) in &keys {
        let ok: Vec<&ObservableSet> = points
            .iter()
            .filter(|p| p.tau_factor == t && p.gamma_xy == g)
            .filter_map(|p| p.obs.as_ref())
            .collect();
        let w: Vec<f64> = ok.iter().map(|o| o.omega_r).collect();
        let e: Vec<f64> = ok.iter().map(|o| o.eta).collect();
        let (weak_slope, top_slope) = summarize_curve(&w, &e);
        curves.push(CurveSummary {
            tau_factor: t,
            gamma_xy: g,
            weak_slope,
            top_slope,
            max_eta: e.iter().cloned().filter(|v| v.is_finite()).fold(f64::NAN, f64::max),
        });
    }

    let mut tau_ratios = Vec::new();
    for a in &points {
        let Some(b) = points.iter().find(|b| {
            b.tau_factor == 2.0 * a.tau_factor && b.gamma_xy == a.gamma_xy && b.chi_scale == a.chi_scale
        }) else {
            continue;
        };
        if let (Some(oa), Some(ob)) = (&a.obs, &b.obs) {
            tau_ratios.push(TauRatio {
                tau_factor: a.tau_factor,
                gamma_xy: a.gamma_xy,
                chi_scale: a.chi_scale,
                ratio: ob.eta / oa.eta,
            });
        }
    }
    EfficiencyReport {
        bias: spec.bias,
        points,
        curves,
        tau_ratios,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x: Vec<f64> = (1..20).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v.powf(2.0)).collect();
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn curve_summary_windows() {
        // y = x² for x < 10, flat beyond
        let x: Vec<f64> = (0..40).map(|i| 10f64.powf(-1.0 + i as f64 * 0.1)).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 10.0 { v * v } else { 100.0 }).collect();
        let (weak, top) = summarize_curve(&x, &y);
        assert!((weak - 2.0).abs() < 1e-12);
        assert!(top.abs() < 1e-12);
    }
}
