mod common;

use common::*;
use isbel::contacts::{ElasticReservoir, MinibandLevel, MinibandSpec};
use isbel::{
    solve_at, BiasPoint, Contact, ContactModel, Device, MinibandAlignment, ReservoirParams, Side, SolverConfig,
    Subband,
};

/// Γ·exp(−(E0 ± V/2 − edge)²/2σ²)·f, written out by hand. The left
/// reservoir is lowered by V/2, the right one raised.
fn gaussian_oracle(side_sign: f64, edge: f64, hw: f64, v: f64, d: &Device, out: bool) -> f64 {
    let (e0, mu, g, sigma) = (75.0, 50.0, 2.5, 15.0);
    let c = e0 + side_sign * 0.5 * v - edge;
    let tun = g * (-c * c / (2.0 * sigma * sigma)).exp();
    let m = mu + side_sign * 0.5 * v;
    let x = (hw - m) / (KB * d.params.temperature);
    // 1 − f written as f(−x) to keep the relative precision of small rates
    tun / (1.0 + if out { -x } else { x }.exp())
}

const L: f64 = -1.0;
const R: f64 = 1.0;

#[test]
fn tabulated_rates_match_the_closed_form() {
    let d = Device::reference_default();
    let c = ContactModel::reference_default(d.params.e12);
    for v in [0.0, 75.0, 150.0] {
        let t = c.tables(BiasPoint::new(v), &d.grids, &d.params);
        for (k, &e) in d.grids.eps.iter().enumerate() {
            let e12 = d.params.e12;
            let checks = [
                (t.left.gin1[k], gaussian_oracle(L, 0.0, e, v, &d, false)),
                (t.left.gout1[k], gaussian_oracle(L, 0.0, e, v, &d, true)),
                (t.left.gin2[k], gaussian_oracle(L, e12, e + e12, v, &d, false)),
                (t.right.gout2[k], gaussian_oracle(R, e12, e + e12, v, &d, true)),
                (t.right.gout1[k], gaussian_oracle(R, 0.0, e, v, &d, true)),
            ];
            for (got, want) in checks {
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1e-300), "V {v} k {k}: {got:e} vs {want:e}");
            }
        }
    }
}

#[test]
fn totals_are_the_sum_of_both_reservoirs() {
    let d = Device::reference_default();
    let t = ContactModel::reference_default(150.0).tables(BiasPoint::new(110.0), &d.grids, &d.params);
    for k in 0..d.grids.nk() {
        assert_eq!(t.total.gin2[k], t.left.gin2[k] + t.right.gin2[k]);
        assert_eq!(t.total.gout1[k], t.left.gout1[k] + t.right.gout1[k]);
    }
}

fn elastic(side: Side) -> Contact {
    Contact::Elastic(ElasticReservoir {
        side,
        mu: 50.0,
        miniband: MinibandSpec {
            levels: vec![
                MinibandLevel { offset: 60.0, mass_ratio: 1.0, coupling_sq: 0.3, eta: 8.0 },
                MinibandLevel { offset: 95.0, mass_ratio: 1.2, coupling_sq: 0.2, eta: 8.0 },
            ],
        },
    })
}

#[test]
fn detailed_balance_holds_for_both_backends() {
    let d = Device::reference_default();
    let b = d.params.beta();
    let contacts = [
        Contact::gaussian(ReservoirParams::reference_default(Side::Left, 150.0)),
        Contact::gaussian(ReservoirParams::reference_default(Side::Right, 150.0)),
        elastic(Side::Left),
        elastic(Side::Right),
    ];
    for c in &contacts {
        for v in [0.0, 40.0, 150.0] {
            let bias = BiasPoint::new(v);
            for j in [Subband::One, Subband::Two] {
                for &e in d.grids.eps.iter().step_by(5) {
                    let (i, o) = c.rates(j, e, bias, &d.params);
                    let hw = e + j.edge(150.0);
                    let x = b * (c.mu_eff(bias) - hw);
                    if o > 1e-250 && x.abs() < 600.0 {
                        assert!(rel(i / o, x.exp()) < 1e-10, "{v} {e}: {} vs {}", i / o, x.exp());
                    }
                }
            }
        }
    }
}

#[test]
fn reversing_the_bias_swaps_identical_reservoirs() {
    let d = Device::reference_default();
    let c = ContactModel::reference_default(150.0);
    let a = c.tables(BiasPoint::new(90.0), &d.grids, &d.params);
    let b = c.tables(BiasPoint::new(-90.0), &d.grids, &d.params);
    assert_eq!(a.left, b.right);
    assert_eq!(a.right, b.left);
}

#[test]
fn common_alignment_equalizes_the_tunneling_prefactor() {
    let d = Device::reference_default();
    let c = ContactModel::reference_default(150.0).with_alignment(MinibandAlignment::Common);
    let t = c.tables(BiasPoint::new(150.0), &d.grids, &d.params);
    for k in 0..d.grids.nk() {
        let p1 = t.left.gin1[k] + t.left.gout1[k];
        let p2 = t.left.gin2[k] + t.left.gout2[k];
        assert!(rel(p2, p1) < 1e-12);
    }
}

#[test]
fn elastic_reservoirs_drive_a_converged_current() {
    let d = Device::reference_default();
    let c = ContactModel {
        left: elastic(Side::Left),
        right: elastic(Side::Right),
    };
    let s = solve_at(BiasPoint::new(150.0), &c, &d, &SolverConfig::default()).unwrap();
    let (a, b) = currents(&s.occupations, &s.rates, &d.grids);
    assert!(a > 0.0);
    assert!(rel(b, a) < 1e-8);
    assert!(s.occupations.within_bounds(1e-12));
}

#[test]
fn unbiased_reservoirs_fill_to_their_chemical_potential() {
    let d = Device::reference_default().with_coupling_scale(0.0);
    let c = ContactModel {
        left: elastic(Side::Left),
        right: elastic(Side::Right),
    };
    let s = solve_at(BiasPoint::new(0.0), &c, &d, &SolverConfig::default()).unwrap();
    let t = d.params.temperature;
    for (k, &e) in d.grids.eps.iter().enumerate() {
        assert!((s.occupations.n1[k] - fermi(e, 50.0, t)).abs() < 1e-8);
        assert!((s.occupations.n2[k] - fermi(e + 150.0, 50.0, t)).abs() < 1e-8);
    }
}
