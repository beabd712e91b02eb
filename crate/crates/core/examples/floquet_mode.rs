//! Harmonic content of the Floquet solution and its invariants.

use saw_lattice::floquet::{evaluate_mode, floquet_coefficients};

fn main() -> saw_lattice::error::Result<()> {
    let mode = floquet_coefficients(0.47, 12)?;
    println!("q = 0.47, beta = {:.6}", mode.beta_exp);
    for (n, c) in mode.terms().filter(|(n, _)| n.abs() <= 3) {
        println!("  c_{:<3} = {c:+.6e}", 2 * n);
    }
    println!("sum rule - 1     = {:.2e}", mode.sum_rule() - 1.0);
    println!("recursion resid. = {:.2e}", mode.recursion_residual());

    // in physical time with a 50 GHz drive
    let mode = mode.at_drive(2.0 * std::f64::consts::PI * 50.0);
    for t in [0.0, 0.01, 0.02] {
        let (u, du) = evaluate_mode(&mode, t);
        let w = u.conj() * du - u * du.conj();
        println!("t = {t:.2} ns: u = {u:.4}, Wronskian / 2i omega0 = {:.12}", w.im / (2.0 * mode.omega0));
    }
    Ok(())
}
