//! Stability windows of the Mathieu equation and the characteristic exponent.

use saw_lattice::floquet::{characteristic_exponent, monodromy, stability_boundaries};
use saw_lattice::scales::Waveform;

fn main() -> saw_lattice::error::Result<()> {
    let w = Waveform::monochromatic();
    for range in [(0.0, 1.0), (7.3, 7.8)] {
        for (lo, hi) in stability_boundaries(range, &w, 0.01)? {
            println!("stable for q in [{lo:.5}, {hi:.5}]");
        }
    }

    println!("\n{:>5} {:>12} {:>12}", "q", "beta (Hill)", "beta (trace)");
    for q in [0.1, 0.3, 0.47, 0.7, 0.9] {
        let b = characteristic_exponent(q)?;
        let m = monodromy(q, &w)?;
        println!("{q:>5} {b:>12.8} {:>12.8}", m.beta_from_trace());
    }

    // a two-tone drive still has a symplectic monodromy
    let two_tone = Waveform::polychromatic(&[(1, 1.0), (3, 0.2)]);
    let m = monodromy(0.4, &two_tone)?;
    println!("\ntwo-tone drive at q = 0.4: det M = {:.12}, beta = {:.6}", m.determinant(), m.beta_from_trace());
    Ok(())
}
