mod common;

use common::*;
use isbel::fermi::grid_fermi_level;
use isbel::steady::{contact_equilibrium, relative_norm, scaled_residuals, steady_state_from};
use isbel::{
    newton_solve, solve_at, voltage_sweep, BiasPoint, ContactModel, Device, Error, GridSpec, ObservableSet,
    PhysicalParams, SolverConfig,
};

fn setup() -> (Device, ContactModel) {
    let d = Device::reference_default();
    let c = ContactModel::reference_default(d.params.e12);
    (d, c)
}

#[test]
fn densities_at_design_bias() {
    let (d, c) = setup();
    let s = solve_at(BiasPoint::new(150.0), &c, &d, &SolverConfig::default()).unwrap();
    let n1 = 2.0 * d.grids.k_sum(&s.occupations.n1);
    let n2 = 2.0 * d.grids.k_sum(&s.occupations.n2);
    assert!(rel(n1, 8.3e9) < 0.25, "n1 = {n1:e}");
    assert!(rel(n2, 4.3e9) < 0.25, "n2 = {n2:e}");
    assert!(s.diagnostics.residual < 1e-10);
    assert!(s.occupations.within_bounds(1e-12));
}

#[test]
fn solution_is_a_root_of_the_residuals() {
    let (d, c) = setup();
    let s = solve_at(BiasPoint::new(120.0), &c, &d, &SolverConfig::default()).unwrap();
    let (r, scale) = scaled_residuals(&s.packed(), &s.rates, &d).unwrap();
    assert!(relative_norm(&r, &scale) < 1e-10);
    assert!(r.iter().zip(&scale).all(|(a, b)| a.abs() <= 1e-10 * b));
}

/// Both current forms to 1e-8, plus the float64 floor: each occupation is
/// known to one ulp, and the relaxation rate converts that into a flux.
#[test]
fn current_forms_agree_along_sweep() {
    let (d, c) = setup();
    let g = &d.grids;
    let tau_inv = d.rates.tau_inv;
    let vs: Vec<f64> = (0..=25).map(|i| 30.0 + 6.0 * i as f64).collect();
    for p in voltage_sweep(&vs, &c, &d, &SolverConfig::default()) {
        let s = p.result.unwrap();
        let (a, b) = currents(&s.occupations, &s.rates, g);
        let floor: f64 = (0..g.nk())
            .map(|k| 2.0 * g.w_k[k] * tau_inv * 64.0 * f64::EPSILON * (s.occupations.n1[k] + s.occupations.n2[k]))
            .sum();
        assert!((a - b).abs() <= 1e-8 * a.abs() + floor, "V {}: {a:e} vs {b:e}", p.bias.v);
        if p.bias.v >= 60.0 {
            assert!((a - b).abs() <= 1e-8 * a.abs(), "V {}: {a:e} vs {b:e}", p.bias.v);
        }
        let o = ObservableSet::compute(&s, &d);
        assert!(rel(o.i, a) < 1e-12 && rel(o.i2, b) < 1e-12);
    }
}

#[test]
fn warm_and_cold_starts_agree() {
    let (d, c) = setup();
    let cfg = SolverConfig::default();
    let b = BiasPoint::new(140.0);
    let cold = solve_at(b, &c, &d, &cfg).unwrap();
    let prev = solve_at(BiasPoint::new(130.0), &c, &d, &cfg).unwrap();
    let warm = newton_solve(&prev.packed(), &cfg, &cold.rates, &d, b).unwrap();
    for (x, y) in [(&warm.occupations.n1, &cold.occupations.n1), (&warm.occupations.n2, &cold.occupations.n2), (&warm.occupations.na, &cold.occupations.na)] {
        assert!(max_rel(x, y) < 1e-8);
    }
}

#[test]
fn fermi_level_matches_total_density() {
    let (d, c) = setup();
    let s = solve_at(BiasPoint::new(150.0), &c, &d, &SolverConfig::default()).unwrap();
    let total = d.grids.k_sum(&s.occupations.n1) + d.grids.k_sum(&s.occupations.n2);
    let ef = grid_fermi_level(total, &d.grids, &d.params).unwrap();
    assert!((ef - s.eps_f).abs() < 1e-9);
    // the equilibrium distribution at ε_F carries the same density
    let g = &d.grids;
    let eq: f64 = (0..g.nk())
        .map(|k| g.w_k[k] * (fermi(g.eps[k], ef, 77.0) + fermi(g.eps[k] + 150.0, ef, 77.0)))
        .sum();
    assert!(rel(eq, total) < 1e-10);
}

#[test]
fn zero_bias_is_equilibrium_at_contact_potential() {
    let (d, c) = setup();
    let s = solve_at(BiasPoint::new(0.0), &c, &d, &SolverConfig::default()).unwrap();
    assert!((s.eps_f - 50.0).abs() < 1e-6, "eps_F = {}", s.eps_f);
    let g = &d.grids;
    for k in 0..g.nk() {
        let f1 = fermi(g.eps[k], 50.0, 77.0);
        assert!((s.occupations.n1[k] - f1).abs() < 1e-8 * f1.max(1e-3));
    }
    let (a, b) = currents(&s.occupations, &s.rates, g);
    let i_ref = solve_at(BiasPoint::new(150.0), &c, &d, &SolverConfig::default()).unwrap();
    let (i150, _) = currents(&i_ref.occupations, &i_ref.rates, g);
    assert!(a.abs() < 1e-10 * i150 && b.abs() < 1e-10 * i150);
}

#[test]
fn reruns_are_bit_identical() {
    let (d, c) = setup();
    let a = solve_at(BiasPoint::new(100.0), &c, &d, &SolverConfig::default()).unwrap();
    let b = solve_at(BiasPoint::new(100.0), &c, &d, &SolverConfig::default()).unwrap();
    assert_eq!(a.packed().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.packed().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
}

#[test]
fn area_unit_does_not_change_occupations() {
    let (d, c) = setup();
    let cfg = SolverConfig::default();
    let a = solve_at(BiasPoint::new(150.0), &c, &d, &cfg).unwrap();
    let d2 = d.rescaled_area(1e-3);
    let b = solve_at(BiasPoint::new(150.0), &c, &d2, &cfg).unwrap();
    assert!(max_rel(&a.occupations.n1, &b.occupations.n1) < 1e-8);
    assert!(max_rel(&a.occupations.na, &b.occupations.na) < 1e-8);
    let (oa, ob) = (ObservableSet::compute(&a, &d), ObservableSet::compute(&b, &d2));
    assert!(rel(oa.eta, ob.eta) < 1e-8);
}

#[test]
fn photons_vanish_without_coupling() {
    let (d, c) = setup();
    let d0 = d.with_coupling_scale(0.0);
    let s = solve_at(BiasPoint::new(150.0), &c, &d0, &SolverConfig::default()).unwrap();
    assert!(s.occupations.na.iter().all(|&v| v == 0.0));
}

#[test]
fn brightest_mode_is_resonant() {
    let (d, c) = setup();
    let s = solve_at(BiasPoint::new(150.0), &c, &d, &SolverConfig::default()).unwrap();
    let na = &s.occupations.na;
    let q = (0..na.len()).max_by(|&a, &b| na[a].total_cmp(&na[b])).unwrap();
    let step = d.grids.omega_c[1] - d.grids.omega_c[0];
    assert!((d.grids.omega_c[q] - d.omega12()).abs() <= step);
}

#[test]
fn malformed_initial_state_is_rejected() {
    let (d, c) = setup();
    let b = BiasPoint::new(150.0);
    let r = c.tables(b, &d.grids, &d.params);
    let e = newton_solve(&[0.5; 3], &SolverConfig::default(), &r, &d, b).unwrap_err();
    assert!(matches!(e, Error::InvalidParameter { name: "initial", .. }));
    let mut x = contact_equilibrium(&r, &d);
    x[0] = f64::NAN;
    assert!(newton_solve(&x, &SolverConfig::default(), &r, &d, b).is_err());
}

#[test]
fn iteration_cap_reports_nonconvergence() {
    let (d, c) = setup();
    let cfg = SolverConfig {
        max_iter: 1,
        pseudo_transient: false,
        ..Default::default()
    };
    let b = BiasPoint::new(60.0);
    let r = c.tables(b, &d.grids, &d.params);
    let e = newton_solve(&contact_equilibrium(&r, &d), &cfg, &r, &d, b).unwrap_err();
    assert!(matches!(e, Error::NonConvergence { .. }));
    assert_eq!(e.exit_code(), 3);
}

#[test]
fn out_of_range_state_is_flagged() {
    let (d, c) = setup();
    let b = BiasPoint::new(150.0);
    let r = c.tables(b, &d.grids, &d.params);
    let s = solve_at(b, &c, &d, &SolverConfig::default()).unwrap();
    let mut occ = s.occupations.clone();
    occ.n1[0] = 1.5;
    assert!(matches!(steady_state_from(occ, &r, &d, b), Err(Error::Unphysical(_))));
}

#[test]
fn grid_refinement_is_stable() {
    let c = ContactModel::reference_default(150.0);
    let cfg = SolverConfig::default();
    let obs = |nk, nq| {
        let d = Device::new(PhysicalParams::default(), &GridSpec::new(nk, nq)).unwrap();
        ObservableSet::compute(&solve_at(BiasPoint::new(150.0), &c, &d, &cfg).unwrap(), &d)
    };
    let (a, b) = (obs(40, 16), obs(80, 32));
    for (x, y) in [(a.i, b.i), (a.p, b.p), (a.eta, b.eta), (a.n1_density, b.n1_density), (a.n2_density, b.n2_density)] {
        assert!(rel(x, y) < 5e-3, "{x:e} vs {y:e}");
    }
}
