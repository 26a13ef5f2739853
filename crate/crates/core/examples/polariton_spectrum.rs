//! Emission spectrum of the resonant cavity mode and a coarse
//! anticrossing map at qV = E12/2.
//!
//!     cargo run --release --example polariton_spectrum

use isbel::spectra::{anticrossing_map, compute_spectrum, omega_grid, q_grid_for};
use isbel::units::HBAR;
use isbel::{solve_at, BiasPoint, ContactModel, Device, SolverConfig, SpectralMode};

fn main() -> isbel::Result<()> {
    let device = Device::reference_default();
    let contacts = ContactModel::reference_default(device.params.e12);
    let state = solve_at(BiasPoint::new(0.5 * device.params.e12), &contacts, &device, &SolverConfig::default())?;
    let w12 = device.omega12();
    let omega = omega_grid(w12, 0.7, 1.3, 601);

    let mode = SpectralMode::from_state(&state, &device, device.cavity.q_res);
    let sp = compute_spectrum(&mode, &omega, &device.rates, true);
    let (lo, hi) = sp.roots;
    println!("resonant mode: n_a = {:.3e}, D = {:.3e} cm^-2", mode.na, mode.d);
    println!("roots  {:.2} / {:.2} meV (half widths {:.2} / {:.2})", HBAR * lo.re, HBAR * hi.re, -HBAR * lo.im, -HBAR * hi.im);
    println!("peaks  {:?} meV", sp.peaks.iter().map(|w| (HBAR * w * 100.0).round() / 100.0).collect::<Vec<_>>());
    for (w, i) in omega.iter().zip(&sp.intensity).step_by(20) {
        println!("{:7.2} meV |{}", HBAR * w, "#".repeat((i * 60.0).round().max(0.0) as usize));
    }

    println!("\nanticrossing map: peak positions (meV) per cavity energy");
    let qs = q_grid_for(&device, 0.8, 1.2, 9);
    for row in anticrossing_map(&state, &device, &omega, &qs, true) {
        let pk: Vec<String> = row.peaks.iter().map(|w| format!("{:7.2}", HBAR * w)).collect();
        println!("  omega_c {:7.2}: {}", HBAR * row.mode.omega_c, pk.join(" "));
    }
    Ok(())
}
