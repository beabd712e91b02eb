//! Cross-checks the moment equations against a truncated number-basis
//! integration of the full master equation.

use saw_lattice::cli::{Command, QmeSetup, RunConfig};

fn main() -> saw_lattice::error::Result<()> {
    let mut inputs = RunConfig::new(Command::Qme).inputs;
    inputs.x_tilde = 0.0;
    inputs.periods = 1.0;
    let setup = QmeSetup::new(&inputs)?;
    let moments = setup.propagate()?;
    for n_max in [24, 40] {
        match setup.fock(n_max) {
            Ok(fock) => {
                let worst = moments
                    .samples
                    .iter()
                    .zip(&fock.samples)
                    .map(|(a, b)| (a.state.var_x - b.state.var_x).abs() / a.state.var_x)
                    .fold(0.0, f64::max);
                println!("n_max = {n_max}: largest relative var x deviation {worst:.2e}");
            }
            Err(e) => println!("n_max = {n_max}: {e}"),
        }
    }
    Ok(())
}
