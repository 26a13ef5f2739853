//! Time integration of the population/correlation equations from the
//! zero-bias state, compared with the algebraic steady state.
//!
//!     cargo run --release --example dynamics_oracle

use isbel::dynamics::{relax_to_steady, IntegratorConfig, Mode};
use isbel::{solve_at, BiasPoint, ContactModel, Device, GridSpec, PhysicalParams, SolverConfig};

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    let m = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |s, (x, y)| s.max((x - y).abs())) / m
}

fn main() -> isbel::Result<()> {
    let device = Device::reference_default();
    let contacts = ContactModel::reference_default(device.params.e12);
    let bias = BiasPoint::new(device.params.e12);
    let algebraic = solve_at(bias, &contacts, &device, &SolverConfig::default())?;

    let cfg = IntegratorConfig {
        dt: 0.2,
        tol: 1e-11,
        mode: Mode::AdiabaticX,
        record_stride: 2000,
        ..Default::default()
    };
    let (dynamic, traj) = relax_to_steady(bias, &contacts, &device, &cfg)?;
    println!("relaxed in {} RK4 steps ({:.2} ps)", traj.steps, traj.t_final);
    for s in &traj.samples {
        println!("  t {:7.3} ps  photons {:.4e}  n1 {:.4e}  n2 {:.4e}", s.t, s.photons, s.density1, s.density2);
    }
    let (a, d) = (&algebraic.occupations, &dynamic.occupations);
    println!("max relative difference: n1 {:.1e}, n2 {:.1e}, n_a {:.1e}", max_rel(&d.n1, &a.n1), max_rel(&d.n2, &a.n2), max_rel(&d.na, &a.na));

    // explicit X correlations on a small grid
    let small = Device::new(PhysicalParams::default(), &GridSpec::new(12, 4))?;
    let algebraic = solve_at(bias, &contacts, &small, &SolverConfig::default())?;
    let cfg = IntegratorConfig { mode: Mode::Full, ..cfg };
    let (full, _) = relax_to_steady(bias, &contacts, &small, &cfg)?;
    let (p0, p1) = (small.grids.q_sum(&algebraic.occupations.na), small.grids.q_sum(&full.occupations.na));
    println!("full X dynamics (12 x 4 grid): photons {p1:.6e} vs algebraic {p0:.6e}, relative {:.1e}", (p1 - p0).abs() / p0);
    Ok(())
}
