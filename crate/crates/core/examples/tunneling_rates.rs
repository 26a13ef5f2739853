//! Contact tunneling rates: the Gaussian miniband model, its detailed
//! balance at zero bias, and the elastic miniband backend.
//!
//!     cargo run --release --example tunneling_rates

use isbel::contacts::{elastic_rate, Direction, ElasticReservoir, MinibandLevel, MinibandSpec};
use isbel::fermi::grid_fermi_level;
use isbel::{BiasPoint, ContactModel, Device, Side, Subband};

fn main() -> isbel::Result<()> {
    let device = Device::reference_default();
    let p = &device.params;
    let contacts = ContactModel::reference_default(p.e12);
    let g = &device.grids;

    for v in [0.0, p.e12] {
        let t = contacts.tables(BiasPoint::new(v), g, p).total;
        println!("qV = {v} meV");
        println!("{:>8} {:>11} {:>11} {:>11} {:>11}", "eps", "Gin1", "Gout1", "Gin2", "Gout2");
        for k in (0..g.nk()).step_by(8) {
            println!("{:8.2} {:11.3e} {:11.3e} {:11.3e} {:11.3e}", g.eps[k], t.gin1[k], t.gout1[k], t.gin2[k], t.gout2[k]);
        }
    }

    // at zero bias an equilibrium occupation at the contact chemical potential
    // is left unchanged by tunneling
    let mu = contacts.max_mu();
    let occ = isbel::fermi::equilibrium_occupations(mu, g, p);
    let t = contacts.tables(BiasPoint::new(0.0), g, p).total;
    let (i1, i2) = t.imbalance(&occ.n1, &occ.n2);
    let worst = i1.iter().chain(&i2).fold(0.0f64, |m, v| m.max(v.abs()));
    let density = 2.0 * g.k_sum(&occ.n1);
    println!("\nzero-bias equilibrium at mu = {mu:.2} meV: max tunneling imbalance {worst:.1e} 1/ps");
    println!("grid Fermi level of that density: {:.6} meV", grid_fermi_level(density / 2.0, g, p)?);

    let res = ElasticReservoir {
        side: Side::Left,
        mu,
        miniband: MinibandSpec {
            levels: vec![MinibandLevel { offset: 75.0, mass_ratio: 1.0, coupling_sq: 4.0, eta: 5.0 }],
        },
    };
    println!("\nelastic backend, subband 2:");
    for &e in &[0.0, 10.0, 40.0] {
        let b = BiasPoint::new(p.e12);
        let i = elastic_rate(&res, Subband::Two, e, Direction::In, b, p);
        let o = elastic_rate(&res, Subband::Two, e, Direction::Out, b, p);
        println!("  eps {e:5.1} meV: in {i:.3e}, out {o:.3e}, in/out {:.3e}", i / o);
    }
    Ok(())
}
