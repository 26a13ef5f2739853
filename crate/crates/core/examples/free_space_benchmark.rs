//! Free-space spontaneous-emission efficiency of the same carrier
//! distribution compared with the microcavity efficiency.
//!
//!     cargo run --release --example free_space_benchmark

use isbel::observables::free_space_emission_rate;
use isbel::{solve_at, BiasPoint, ContactModel, Device, ObservableSet, SolverConfig};

fn main() -> isbel::Result<()> {
    let device = Device::reference_default();
    let contacts = ContactModel::reference_default(device.params.e12);
    let a = free_space_emission_rate(&device.params);
    println!("free-space emission rate A = {:.3e} 1/s (lifetime {:.1} ns)", a * 1e12, 1e-3 / a);

    let bias = BiasPoint::new(device.params.e12);
    println!("{:>8} {:>10} {:>12} {:>12} {:>8}", "chi x", "hOmega_R", "eta cavity", "eta free", "ratio");
    for s in [0.1, 0.3, 1.0, 3.0] {
        let d = device.with_coupling_scale(s);
        let st = solve_at(bias, &contacts, &d, &SolverConfig::default())?;
        let o = ObservableSet::compute(&st, &d);
        println!("{:8.2} {:10.3} {:12.4e} {:12.4e} {:8.1}", s, o.omega_r, o.eta, o.eta_freespace, o.eta / o.eta_freespace);
    }
    Ok(())
}
