//! Physical constants in the crate's internal unit system.
//!
//! Energies are in μeV, lengths in nm, times in ns. Velocities therefore come
//! out in nm/ns, which is numerically identical to m/s. Masses are carried in
//! μeV·ns²/nm² so that `E = m v² / 2` needs no conversion factors.

use std::f64::consts::PI;

/// Reduced Planck constant, μeV·ns.
pub const HBAR: f64 = 0.658_211_956_9;

/// Boltzmann constant, μeV/K.
pub const K_B: f64 = 86.173_332_62;

/// Speed of light, nm/ns.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Electron rest energy, μeV.
pub const ELECTRON_REST_ENERGY: f64 = 510_998.950_00e6;

/// Free-electron mass m₀, μeV·ns²/nm².
pub const ELECTRON_MASS: f64 = ELECTRON_REST_ENERGY / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);

/// e²/(4πε₀), μeV·nm.
pub const COULOMB_CONSTANT: f64 = 1.439_964_548e6;

/// One μeV/ns expressed in mW.
pub const MICRO_EV_PER_NS_IN_MW: f64 = 1.602_176_634e-13;

/// Converts an ordinary frequency in Hz to an angular frequency in rad/ns.
pub fn hz_to_rad_per_ns(f_hz: f64) -> f64 {
    2.0 * PI * f_hz * 1e-9
}

/// Converts an angular frequency in rad/ns to an energy ħω in μeV.
pub fn angular_to_energy(omega: f64) -> f64 {
    HBAR * omega
}

/// Converts an energy in μeV to an angular frequency in rad/ns.
pub fn energy_to_angular(energy: f64) -> f64 {
    energy / HBAR
}

/// Converts a temperature in kelvin to k_B T in μeV.
pub fn kelvin_to_energy(t: f64) -> f64 {
    K_B * t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn electron_mass_matches_si_value() {
        // 9.1093837015e-31 kg in μeV ns² / nm²
        let si = 9.109_383_701_5e-31 * 6.241_509_074e24;
        assert!((ELECTRON_MASS / si - 1.0).abs() < 1e-8);
    }

    #[test]
    fn fifty_gigahertz_phonon_energy() {
        let e = angular_to_energy(hz_to_rad_per_ns(50e9));
        assert!((e - 206.78).abs() < 0.01, "{e}");
    }
}
