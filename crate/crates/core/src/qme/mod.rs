//! Floquet–Born–Markov master equation of the trapped carrier.
//!
//! The Hamiltonian is `p²/2m + (m/2) W(t) x²` with `W(t) = −(ω²/2) q cos ωt`
//! and the dissipator is `γ(N+1) D[C(t)] + γN D[C†(t)]`, where `C(t)` is the
//! Floquet shift operator built from the mode function `u(t)`. Because the
//! dynamics is quadratic, first and second moments close on themselves; the
//! Fock-space oracle integrates the density matrix directly as a check.

mod fock;
mod moments;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{evaluate_mode, Convention, FloquetMode};
use crate::units::{HBAR, K_B};

pub use fock::{fock_oracle, FockOptions};
pub use moments::{
    assemble_moment_ode, detect_quasistationary, propagate_moments, reference_oscillator,
    MomentOde, MomentSample, MomentState, MomentTrajectory, Quasistationarity, MOMENT_TOL,
};

/// Ohmic fit parameter of the damping, γ = ζω₀.
pub const DEFAULT_ZETA: f64 = 2.35e-2;

/// Phonon bath seen by the carrier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    /// Damping rate, 1/ns.
    pub gamma: f64,
    /// k_B T, μeV.
    pub k_t: f64,
}

impl BathParams {
    pub fn new(gamma: f64, k_t: f64) -> Self {
        Self { gamma, k_t }
    }

    pub fn from_kelvin(gamma: f64, temperature: f64) -> Self {
        Self::new(gamma, K_B * temperature)
    }

    /// Ohmic damping `γ = ζω₀`.
    pub fn ohmic(zeta: f64, omega0: f64, k_t: f64) -> Self {
        Self::new(zeta * omega0, k_t)
    }

    pub fn temperature_kelvin(&self) -> f64 {
        self.k_t / K_B
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid("gamma", "must be finite and nonnegative"));
        }
        if !(self.k_t >= 0.0 && self.k_t.is_finite()) {
            return Err(Error::invalid("temperature", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Bose occupation at signed angular frequency `nu`. Negative frequencies give
/// `−(1 + n̄(|ν|))`, which is −1 at zero temperature.
pub fn bose_occupation(nu: f64, k_t: f64) -> f64 {
    if nu == 0.0 {
        return if k_t == 0.0 { 0.0 } else { f64::INFINITY };
    }
    if k_t == 0.0 {
        return if nu > 0.0 { 0.0 } else { -1.0 };
    }
    1.0 / (HBAR * nu / k_t).exp_m1()
}

/// `C(t) = α x + β p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShiftCoefficients {
    pub alpha_x: Complex64,
    pub beta_p: Complex64,
    pub t: f64,
}

impl ShiftCoefficients {
    /// `iħ(αβ* − α*β)`, which is `[C, C†]` and equals 1.
    pub fn commutator(&self) -> f64 {
        let a = self.alpha_x;
        let b = self.beta_p;
        (Complex64::i() * HBAR * (a * b.conj() - a.conj() * b)).re
    }
}

/// Shift-operator coefficients at time `t` for a carrier of mass `m`.
pub fn shift_coefficients(mode: &FloquetMode, m: f64, t: f64) -> Result<ShiftCoefficients> {
    if !(mode.omega0 > 0.0) {
        return Err(Error::UntrappedMode);
    }
    let (u, du) = evaluate_mode(mode, t);
    let w0 = mode.omega0;
    Ok(ShiftCoefficients {
        alpha_x: Complex64::new(0.0, -(m / (2.0 * HBAR * w0)).sqrt()) * du,
        beta_p: Complex64::new(0.0, 1.0 / (2.0 * m * HBAR * w0).sqrt()) * u,
        t,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveOccupation {
    pub n: f64,
    /// `(n, c₂ₙ² (ω₀+nω)/ω₀ · n̄(ω₀+nω))`.
    pub terms: Vec<(i64, f64)>,
}

/// `N = Σ c₂ₙ² (ω₀+nω)/ω₀ · n̄(ω₀+nω)`. Terms with `ω₀ + nω < 0` carry a
/// negative weight and a negative occupation, so every term is nonnegative.
pub fn effective_occupation(mode: &FloquetMode, bath: &BathParams) -> Result<EffectiveOccupation> {
    bath.validate()?;
    if mode.omega0 == 0.0 {
        let n = if bath.k_t == 0.0 { 0.0 } else { f64::INFINITY };
        return Ok(EffectiveOccupation {
            n,
            terms: vec![(0, n)],
        });
    }
    let terms: Vec<(i64, f64)> = mode
        .terms()
        .filter(|&(_, c)| c != 0.0)
        .map(|(n, c)| {
            let nu = mode.harmonic_frequency(n);
            (n, c * c * nu / mode.omega0 * bose_occupation(nu, bath.k_t))
        })
        .collect();
    let n = terms.iter().map(|t| t.1).sum();
    Ok(EffectiveOccupation { n, terms })
}

/// Period-averaged kinetic energy of the cooled quasi-stationary state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KineticEnergy {
    /// ħω₀/4, μeV.
    pub zero_point: f64,
    /// Micromotion excess above the zero point, μeV.
    pub delta_heat: f64,
    pub total: f64,
}

impl KineticEnergy {
    /// total / (ħω₀/4).
    pub fn ratio(&self) -> f64 {
        if self.zero_point == 0.0 {
            1.0
        } else {
            self.total / self.zero_point
        }
    }
}

/// `(ħ/4ω₀) Σ c₂ₙ² (ω₀+nω)²` split into the zero point and the micromotion excess.
/// The mass drops out once the mode is sum-rule normalized.
pub fn averaged_kinetic_energy(mode: &FloquetMode) -> KineticEnergy {
    let w0 = mode.omega0;
    if w0 == 0.0 {
        return KineticEnergy {
            zero_point: 0.0,
            delta_heat: 0.0,
            total: 0.0,
        };
    }
    let zero_point = HBAR * w0 / 4.0;
    let pref = HBAR / (4.0 * w0);
    let total: f64 = mode
        .terms()
        .map(|(n, c)| pref * c * c * mode.harmonic_frequency(n).powi(2))
        .sum();
    KineticEnergy {
        zero_point,
        delta_heat: total - zero_point,
        total,
    }
}

/// Regime warnings for a parameter set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// k |⟨x⟩| over the trajectory.
    pub lamb_dicke_mean: f64,
    /// k σ_x over the trajectory.
    pub lamb_dicke_width: f64,
    /// ħγ / k_BT.
    pub markov_ratio: f64,
    /// k_BT / ħω₀.
    pub thermal_ratio: f64,
    pub warnings: Vec<String>,
}

/// Flags violations of the Lamb–Dicke and Born–Markov assumptions; any ratio
/// above `threshold` (0.3 by default) produces a warning.
pub fn diagnostics(
    trajectory: &MomentTrajectory,
    k: f64,
    bath: &BathParams,
    omega0: f64,
    threshold: f64,
) -> Diagnostics {
    let mut d = Diagnostics::default();
    for s in &trajectory.samples {
        d.lamb_dicke_mean = d.lamb_dicke_mean.max(k * s.state.mean_x.abs());
        d.lamb_dicke_width = d.lamb_dicke_width.max(k * s.state.var_x.sqrt());
    }
    d.markov_ratio = if bath.k_t > 0.0 {
        HBAR * bath.gamma / bath.k_t
    } else if bath.gamma > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    d.thermal_ratio = bath.k_t / (HBAR * omega0);
    let checks = [
        ("k|<x>|", d.lamb_dicke_mean, "Lamb-Dicke expansion of the mean"),
        ("k sigma_x", d.lamb_dicke_width, "Lamb-Dicke expansion of the width"),
        ("hbar gamma / kT", d.markov_ratio, "Markov approximation"),
        ("kT / hbar omega0", d.thermal_ratio, "low-temperature Born-Markov regime"),
    ];
    for (name, value, what) in checks {
        if value > threshold {
            let msg = format!("{name} = {value:.3} exceeds {threshold}: {what} is questionable");
            log::warn!("{msg}");
            d.warnings.push(msg);
        }
    }
    d
}

/// The mode in the convention matching `W(t) = −(ω²/2) q cos ωt`.
pub(crate) fn physical(mode: &FloquetMode) -> FloquetMode {
    mode.clone().with_convention(Convention::Physical)
}
