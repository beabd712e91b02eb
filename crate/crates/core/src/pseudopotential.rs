//! Time-independent effective Hamiltonians from the high-frequency expansion.
//!
//! The secular potential is `V0 sin²(kx)` with `V0 = ε² E_S`. At second order
//! `ε² = q²/8`; the fourth-order quantum result adds a recoil term,
//! `ε² = (q²/8)(1 + q̃)` with `q̃ = E_R / 4E_S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::DerivedScales;

/// Order of the 1/ω expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    Second,
    Fourth,
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            2 => Ok(Order::Second),
            4 => Ok(Order::Fourth),
            _ => Err(Error::invalid("order", format!("expected 2 or 4, got {v}"))),
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        match o {
            Order::Second => 2,
            Order::Fourth => 4,
        }
    }
}

/// How the recoil parameter enters the fourth-order trap frequency.
///
/// `Linear` is `ε² = (q²/8)(1 + q̃)`, which follows from the fourth-order
/// potential. `Quadratic` is the variant `ε = (q/2√2)√(1 + q̃²)`, kept for
/// comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoilCorrection {
    #[default]
    Linear,
    Quadratic,
}

/// ε² for stability parameter `q` and recoil parameter `q̃`.
pub fn epsilon_squared(q: f64, q_tilde: f64, order: Order, correction: RecoilCorrection) -> f64 {
    let base = q * q / 8.0;
    match order {
        Order::Second => base,
        Order::Fourth => match correction {
            RecoilCorrection::Linear => base * (1.0 + q_tilde),
            RecoilCorrection::Quadratic => base * (1.0 + q_tilde * q_tilde),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveHamiltonian {
    pub order: Order,
    /// Depth of `V0 sin²(kx)`, μeV.
    pub v0: f64,
    /// `c` in the kinetic term `(p²/2m)[1 + c cos²(kx)]` (classical ordering).
    pub kinetic_correction_coeff: f64,
    /// The `(q²/32) E_R` contribution to the depth, μeV.
    pub quantum_correction: f64,
    pub eps: f64,
    /// rad/ns.
    pub omega0: f64,
}

impl EffectiveHamiltonian {
    /// Coefficient of cos²(kx) in the Weyl-ordered correction
    /// `[p² g + 2 p g p + g p²]/2m`; equals a quarter of the classical one.
    pub fn g_coeff(&self) -> f64 {
        self.kinetic_correction_coeff / 4.0
    }

    /// Energy of `V0 sin²(kx)` plus the classical-limit kinetic term.
    pub fn classical_energy(&self, x: f64, p: f64, k: f64, m: f64) -> f64 {
        let c = (k * x).cos();
        let s = (k * x).sin();
        p * p / (2.0 * m) * (1.0 + self.kinetic_correction_coeff * c * c) + self.v0 * s * s
    }
}

/// The classical effective Hamiltonian. Its kinetic correction is a
/// fourth-order term while the potential is second order, so the result is
/// tagged as fourth order with no quantum correction.
pub fn classical_effective(q: f64, scales: &DerivedScales) -> EffectiveHamiltonian {
    let eps2 = q * q / 8.0;
    let eps = eps2.sqrt();
    EffectiveHamiltonian {
        order: Order::Fourth,
        v0: q / 8.0 * (q * scales.e_s),
        kinetic_correction_coeff: 3.0 / 8.0 * q * q,
        quantum_correction: 0.0,
        eps,
        omega0: eps * scales.omega(),
    }
}

pub fn quantum_effective(q: f64, scales: &DerivedScales, order: Order) -> EffectiveHamiltonian {
    quantum_effective_with(q, scales, order, RecoilCorrection::Linear)
}

pub fn quantum_effective_with(
    q: f64,
    scales: &DerivedScales,
    order: Order,
    correction: RecoilCorrection,
) -> EffectiveHamiltonian {
    let eps2 = epsilon_squared(q, scales.q_tilde, order, correction);
    let eps = eps2.sqrt();
    let (kin, quantum) = match order {
        Order::Second => (0.0, 0.0),
        Order::Fourth => (3.0 / 8.0 * q * q, q * q / 32.0 * scales.e_r),
    };
    EffectiveHamiltonian {
        order,
        v0: eps2 * scales.e_s,
        kinetic_correction_coeff: kin,
        quantum_correction: quantum,
        eps,
        omega0: eps * scales.omega(),
    }
}

/// Frequency of the harmonic approximation `V0 k² x² = (m/2) ω₀² x²` at a node.
pub fn harmonic_frequency(v0: f64, k: f64, m: f64) -> f64 {
    k * (2.0 * v0 / m).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scales::{derived_scales, DriveConfig, MaterialSystem};

    fn scales(q: f64, e_s: f64) -> DerivedScales {
        derived_scales(
            &MaterialSystem::with_sound_energy(e_s, 18_000.0),
            &DriveConfig::monochromatic(50e9, q),
            Order::Second,
            false,
        )
        .unwrap()
    }

    #[test]
    fn case_study_depths() {
        assert!((classical_effective(0.5, &scales(0.5, 1000.0)).v0 - 31.25).abs() < 1e-9);
        assert!((classical_effective(0.7, &scales(0.7, 1000.0)).v0 - 61.25).abs() < 1e-9);
    }

    #[test]
    fn free_particle_at_zero_drive() {
        let h = classical_effective(0.0, &scales(0.0, 1000.0));
        assert_eq!((h.v0, h.omega0, h.kinetic_correction_coeff), (0.0, 0.0, 0.0));
    }

    #[test]
    fn fourth_order_depth_ratio_is_one_plus_recoil() {
        let s = scales(0.6, 50.0);
        let h2 = quantum_effective(0.6, &s, Order::Second);
        let h4 = quantum_effective(0.6, &s, Order::Fourth);
        assert!((h4.v0 / h2.v0 - (1.0 + s.q_tilde)).abs() < 1e-14);
        assert!((h4.v0 - h2.v0 - h4.quantum_correction).abs() < 1e-12 * h4.v0);
        assert_eq!(h2.kinetic_correction_coeff, 0.0);
        assert!((h4.g_coeff() - 3.0 / 32.0 * 0.36).abs() < 1e-15);
    }

    #[test]
    fn zero_recoil_fourth_equals_second() {
        let mut s = scales(0.4, 1000.0);
        s.q_tilde = 0.0;
        s.e_r = 0.0;
        let a = quantum_effective(0.4, &s, Order::Second);
        let b = quantum_effective(0.4, &s, Order::Fourth);
        assert_eq!(a.v0, b.v0);
        assert_eq!(a.omega0, b.omega0);
    }

    #[test]
    fn secular_ratio_at_fig_three_drive() {
        let h = quantum_effective(0.47, &scales(0.47, 1000.0), Order::Second);
        let s = scales(0.47, 1000.0);
        assert!((h.omega0 / s.omega() - 0.17).abs() < 0.01);
    }

    #[test]
    fn quadratic_variant_differs_only_at_fourth_order() {
        let s = scales(0.5, 20.0);
        let lin = quantum_effective_with(0.5, &s, Order::Fourth, RecoilCorrection::Linear);
        let quad = quantum_effective_with(0.5, &s, Order::Fourth, RecoilCorrection::Quadratic);
        assert!((quad.eps.powi(2) / (0.25 / 8.0) - (1.0 + s.q_tilde.powi(2))).abs() < 1e-14);
        assert!(lin.v0 != quad.v0);
    }

    #[test]
    fn order_serializes_as_number() {
        assert_eq!(serde_json::to_string(&Order::Fourth).unwrap(), "4");
        assert!(serde_json::from_str::<Order>("3").is_err());
    }
}
