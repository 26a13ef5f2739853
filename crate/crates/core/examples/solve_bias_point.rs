//! Steady state of the reference device at qV = E12.
//!
//!     cargo run --release --example solve_bias_point [-- <qV in meV>]

use isbel::{solve_at, BiasPoint, ContactModel, Device, ObservableSet, SolverConfig};

fn main() -> isbel::Result<()> {
    let device = Device::reference_default();
    let contacts = ContactModel::reference_default(device.params.e12);
    let v = std::env::args().nth(1).map_or(Ok(device.params.e12), |s| s.parse()).unwrap_or(device.params.e12);

    let state = solve_at(BiasPoint::new(v), &contacts, &device, &SolverConfig::default())?;
    let obs = ObservableSet::compute(&state, &device);

    println!("qV = {v} meV: converged in {} iterations, residual {:.1e}", state.diagnostics.iterations, state.diagnostics.residual);
    println!("subband 1 density  {:.3e} cm^-2", obs.n1_density);
    println!("subband 2 density  {:.3e} cm^-2", obs.n2_density);
    println!("Fermi level        {:.3} meV", state.eps_f);
    println!("current            {:.4e} e/(ps cm^2)   (subband-2 form {:.4e})", obs.i, obs.i2);
    println!("photon output      {:.4e} 1/(ps cm^2)", obs.p);
    println!("efficiency         {:.4e}   (free space {:.2e})", obs.eta, obs.eta_freespace);
    println!("D per spin         {:.3e} cm^-2", obs.d);
    println!("hbar Omega_R       {:.3} meV, splitting {:.3} meV", obs.omega_r, obs.splitting);

    let g = &device.grids;
    let na = &state.occupations.na;
    let best = (0..na.len()).max_by(|&a, &b| na[a].total_cmp(&na[b])).unwrap();
    println!("brightest mode     hbar omega_c = {:.2} meV, n_a = {:.3e}", isbel::units::HBAR * g.omega_c[best], na[best]);
    Ok(())
}
