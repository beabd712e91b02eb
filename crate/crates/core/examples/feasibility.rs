//! Runs the requirement chain, the heating budget and the spin-coherence figure.

use saw_lattice::hubbard::{hubbard_estimate, regime_check, Extras, DEFAULT_THRESHOLD};
use saw_lattice::pseudopotential::Order;
use saw_lattice::qme::BathParams;
use saw_lattice::scales::{derived_scales, DriveConfig, MaterialSystem};
use saw_lattice::units::HBAR;

fn main() -> saw_lattice::error::Result<()> {
    let material = MaterialSystem::with_sound_energy(1000.0, 18_000.0).with_dielectric(9.5);
    let q = 0.6;
    let scales = derived_scales(&material, &DriveConfig::monochromatic(50e9, q), Order::Fourth, true)?;
    let omega0 = scales.omega0();
    let bath = BathParams::new(1e-3 * omega0, 0.1 * HBAR * omega0);
    let h = hubbard_estimate(&scales, q, 9.5, Some(30.0))?;
    let report = regime_check(&scales, &bath, &h, &Extras::default(), DEFAULT_THRESHOLD)?;

    for link in report.chain.iter().chain(&report.relaxed) {
        println!("{:<28} {:>10.3e} vs {:>10.3e}  {}", link.name, link.lhs, link.rhs, if link.pass { "ok" } else { "violated" });
    }
    println!("strict chain holds:  {}", report.chain_ok);
    println!("relaxed chain holds: {}", report.relaxed_ok);
    println!("V_IDT = {:.1} V ({})", report.v_idt, report.v_idt_ok);
    println!("spin figure = {:.1} ({})", report.spin_figure, report.spin_ok);
    println!("heating {:.3e} mW vs cooling {:.3e} mW", report.heat.w_heat_total, report.heat.p_cool);
    println!("adiabatic transport speed {:.1} m/s", report.v_eff);
    Ok(())
}
