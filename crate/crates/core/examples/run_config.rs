//! Builds a run configuration in code, overrides fields the way `--set` does
//! and writes the datasets to a temporary directory.

use saw_lattice::cli::{run, Command, RunConfig};

fn main() -> saw_lattice::error::Result<()> {
    let dir = std::env::temp_dir().join("sawlat-example");
    let mut cfg = RunConfig::new(Command::Trajectory).apply_overrides(&["inputs.q=0.6".to_string(), "inputs.x_tilde=0.2".to_string()])?;
    cfg.output.dir = dir.clone();
    println!("{}", cfg.to_json());
    for f in run(&cfg)?.files {
        println!("wrote {}", f.display());
    }
    let again = RunConfig::from_json(&cfg.to_json())?;
    assert_eq!(again, cfg);
    Ok(())
}
