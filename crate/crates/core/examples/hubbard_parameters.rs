//! Tunneling, on-site repulsion and exchange, and the GaN case-study table.

use saw_lattice::hubbard::{self, case_study, CaseStudyRow};

fn main() -> saw_lattice::error::Result<()> {
    println!("t/E_S at n_b = 1:");
    for q in [0.3, 0.6, 0.908] {
        println!("  q = {q}: {:.3e}", hubbard::tunneling(q, 1.0, 1.0)?);
    }
    for d in [None, Some(300.0), Some(90.0), Some(30.0)] {
        let (u, f) = hubbard::coulomb_onsite(300.0, 12.5, d)?;
        println!("U(a = 300 nm, eps_r = 12.5, d = {d:?}) = {u:.1} ueV (f = {f:.3})");
    }

    println!("\n{}", CaseStudyRow::HEADER.join("  "));
    for row in case_study()? {
        let v: Vec<String> = row.values().iter().map(|x| format!("{x:.3}")).collect();
        println!("{}", v.join("  "));
    }
    Ok(())
}
