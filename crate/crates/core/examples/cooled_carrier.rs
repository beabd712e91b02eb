//! Gaussian master-equation dynamics of a carrier coupled to a phonon bath.

use saw_lattice::cli::{Command, QmeSetup, RunConfig};
use saw_lattice::qme::{averaged_kinetic_energy, detect_quasistationary, effective_occupation, propagate_moments};

fn main() -> saw_lattice::error::Result<()> {
    let mut inputs = RunConfig::new(Command::Qme).inputs;
    inputs.gamma_rel = 0.05;
    inputs.x_tilde = 0.05;
    inputs.periods = 20.0;
    let setup = QmeSetup::new(&inputs)?;

    let traj = setup.propagate()?;
    let m = setup.mass;
    for s in traj.samples.iter().step_by(traj.samples.len() / 10) {
        println!(
            "t = {:>7.3} ns  <x> = {:>8.4} nm  var x = {:.4e} nm^2  envelope {:.4} nm",
            s.t,
            s.state.mean_x,
            s.state.var_x,
            setup.envelope(s.t)
        );
    }

    let n = effective_occupation(&setup.mode, &setup.bath)?;
    let ke = averaged_kinetic_energy(&setup.mode);
    println!("effective occupation N = {:.4}", n.n);
    println!("kinetic energy ratio   = {:.4}", ke.ratio());

    // relax well past 1/γ and check that the state repeats with the drive
    let period = std::f64::consts::TAU / setup.scales.omega();
    let late = (30.0 / setup.bath.gamma / period).ceil() * period;
    let pre = propagate_moments(&setup.state0, &setup.ode, late, late)?;
    let start = pre.samples.last().expect("nonempty").state;
    println!("occupation after relaxation: {:.4}", start.occupation(m, setup.mode.omega0));
    let tail = propagate_moments(&start, &setup.ode, 4.0 * period, setup.stride)?;
    println!("{:?}", detect_quasistationary(&tail, setup.scales.omega(), 1e-3)?);
    Ok(())
}
