//! Sound energies and trap scales for every built-in material.

use saw_lattice::pseudopotential::Order;
use saw_lattice::scales::{catalog, derived_scales, sound_energy, DriveConfig};

fn main() -> saw_lattice::error::Result<()> {
    println!("{:<18} {:>6} {:>16} {:>18}", "material", "m/m0", "v_s (km/s)", "E_S (ueV)");
    for p in catalog::builtin() {
        let (slow, fast) = (p.slow(), p.fast());
        println!(
            "{:<18} {:>6.3} {:>7.1} - {:<7.1} {:>8.1} - {:<8.1}",
            p.name,
            p.mass_m0,
            slow.sound_speed / 1e3,
            fast.sound_speed / 1e3,
            sound_energy(&slow),
            sound_energy(&fast)
        );
    }

    let gan = catalog::find(&catalog::builtin(), "gan-hole").cloned().expect("preset");
    let s = derived_scales(&gan.fast(), &DriveConfig::monochromatic(50e9, 0.5), Order::Fourth, true)?;
    println!("\nGaN hole at 50 GHz, q = 0.5:");
    println!("  hbar omega  = {:.1} ueV", s.hbar_omega);
    println!("  hbar omega0 = {:.1} ueV", s.hbar_omega0);
    println!("  V0          = {:.1} ueV, n_b = {:.3}", s.v0, s.n_b);
    println!("  a           = {:.0} nm", s.lattice_a);
    Ok(())
}
