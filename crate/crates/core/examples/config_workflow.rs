//! Drives the command layer from a configuration string: solve one point,
//! write the artifacts and read the state back.
//!
//!     cargo run --release --example config_workflow

use isbel::cli::{cmd_solve, Context};
use isbel::io::read_state_csv;
use isbel::RunConfig;

const CONFIG: &str = include_str!("../../../configs/reference.toml");

fn main() -> isbel::Result<()> {
    let dir = std::env::temp_dir().join("isbel-config-workflow");
    let overrides = vec![format!("output.dir={:?}", dir.to_string_lossy()), "grids.nk=48".to_string()];
    let config = RunConfig::from_toml_with_overrides(CONFIG, &overrides)?;
    println!("config hash {}", config.hash());

    let ctx = Context::from_config(config, false, 1);
    let out = cmd_solve(&ctx, None, true)?;
    for f in &out.written.files {
        println!("wrote {}", f.display());
    }
    let (bias, occ, eps, _) = read_state_csv(&out.written.files[0])?;
    assert_eq!(occ, out.state.occupations);
    println!("read back qV = {} meV, {} electron cells, top cell {:.1} meV", bias.v, eps.len(), eps.last().unwrap());
    Ok(())
}
