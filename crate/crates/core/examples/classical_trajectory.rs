//! A single classical orbit compared with its secular approximation.

use saw_lattice::classical::{integrate_trajectory, secular_approximation, ClassicalState};
use saw_lattice::floquet::Convention;
use saw_lattice::scales::Waveform;

fn main() -> saw_lattice::error::Result<()> {
    let q = 0.3;
    let x0 = 0.1;
    let orbit = integrate_trajectory(q, ClassicalState::at_rest(x0), &Waveform::monochromatic(), 60.0, 0.5)?;
    let mut worst = 0.0f64;
    println!("{:>6} {:>10} {:>10}", "tau", "x", "secular");
    for s in &orbit {
        let sec = secular_approximation(q, x0, s.tau, Convention::Standard)?;
        worst = worst.max((s.x_tilde - sec).abs());
        if (s.tau % 5.0).abs() < 1e-9 {
            println!("{:>6.1} {:>10.5} {:>10.5}", s.tau, s.x_tilde, sec);
        }
    }
    println!("largest deviation from the secular motion: {worst:.4}");
    Ok(())
}
