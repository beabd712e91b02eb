//! Classical and quantum effective potentials at second and fourth order.

use saw_lattice::pseudopotential::{classical_effective, quantum_effective, Order};
use saw_lattice::scales::{derived_scales, DriveConfig, MaterialSystem};

fn main() -> saw_lattice::error::Result<()> {
    let material = MaterialSystem::with_sound_energy(1000.0, 18_000.0);
    println!("{:>5} {:>12} {:>12} {:>12}", "q", "classical", "2nd order", "4th order");
    for q in [0.1, 0.3, 0.5, 0.7] {
        let s = derived_scales(&material, &DriveConfig::monochromatic(50e9, q), Order::Fourth, true)?;
        let c = classical_effective(q, &s);
        let q2 = quantum_effective(q, &s, Order::Second);
        let q4 = quantum_effective(q, &s, Order::Fourth);
        println!(
            "{q:>5} {:>12.2} {:>12.2} {:>12.2}   V0 (ueV); recoil q~ = {:.4}",
            c.v0, q2.v0, q4.v0, s.q_tilde
        );
    }
    Ok(())
}
