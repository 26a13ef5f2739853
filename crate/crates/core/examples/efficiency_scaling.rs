//! Quantum efficiency against the vacuum Rabi frequency when the
//! light-matter coupling is scaled, for three nonradiative lifetimes.
//!
//!     cargo run --release --example efficiency_scaling

use isbel::study::{efficiency_study, StudySpec};
use isbel::{ContactModel, GridSpec, PhysicalParams, SolverConfig};

fn main() {
    let params = PhysicalParams::default();
    let contacts = ContactModel::reference_default(params.e12);
    let spec = StudySpec {
        bias: params.e12,
        chi_scales: (0..13).map(|i| 0.003 * 10f64.powf(i as f64 / 3.0)).collect(),
        tau_factors: vec![0.5, 1.0, 2.0],
        gamma_xy: vec![],
    };
    let report = efficiency_study(&params, &GridSpec::default(), &contacts, &SolverConfig::default(), &spec);

    println!("{:>8} {:>10} {:>12} {:>12} {:>12}", "scale", "hOmega_R", "eta(tau/2)", "eta(tau)", "eta(2tau)");
    for (i, &s) in spec.chi_scales.iter().enumerate() {
        let n = spec.chi_scales.len();
        let row: Vec<_> = (0..3).map(|t| report.points[t * n + i].obs.as_ref()).collect();
        let omega = row[1].map_or(f64::NAN, |o| o.omega_r);
        let eta = |o: Option<&isbel::ObservableSet>| o.map_or(f64::NAN, |o| o.eta);
        println!("{:8.4} {:10.4} {:12.4e} {:12.4e} {:12.4e}", s, omega, eta(row[0]), eta(row[1]), eta(row[2]));
    }
    for c in &report.curves {
        println!(
            "tau x{}: weak-coupling slope {:.3}, top slope {:.3}, max eta {:.3e}",
            c.tau_factor, c.weak_slope, c.top_slope, c.max_eta
        );
    }
    let r: Vec<f64> = report.tau_ratios.iter().map(|t| t.ratio).collect();
    println!("eta(2 tau)/eta(tau): min {:.3}, max {:.3}", r.iter().cloned().fold(f64::INFINITY, f64::min), r.iter().cloned().fold(0.0, f64::max));
}
