//! Continuation sweep of the bias: current, light output, densities and
//! the polariton splitting versus qV.
//!
//!     cargo run --release --example voltage_sweep

use isbel::{voltage_sweep, ContactModel, Device, ObservableSet, SolverConfig};

fn main() {
    let device = Device::reference_default();
    let contacts = ContactModel::reference_default(device.params.e12);
    let vs: Vec<f64> = (0..=30).map(|i| 30.0 + 5.0 * i as f64).collect();

    let points = voltage_sweep(&vs, &contacts, &device, &SolverConfig::default());
    println!("{:>6} {:>11} {:>11} {:>10} {:>11} {:>11} {:>9}", "qV", "I", "P", "eta", "n1", "n2", "2hOmega");
    for p in &points {
        match &p.result {
            Ok(s) => {
                let o = ObservableSet::compute(s, &device);
                println!(
                    "{:6.1} {:11.4e} {:11.4e} {:10.3e} {:11.4e} {:11.4e} {:9.3}",
                    o.v, o.i, o.p, o.eta, o.n1_density, o.n2_density, o.splitting
                );
            }
            Err(e) => println!("{:6.1} failed: {e}", p.bias.v),
        }
    }
}
