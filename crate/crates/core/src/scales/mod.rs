//! Material platforms, drive settings and the derived energy and length scales.

pub mod catalog;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet;
use crate::pseudopotential::{self, Order, RecoilCorrection};
use crate::units::{self, ELECTRON_MASS, HBAR};

pub use catalog::{load_material_presets, MaterialPreset};

/// A carrier species in a host material.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialSystem {
    pub name: String,
    /// Effective mass in units of m₀.
    pub carrier_mass: f64,
    /// m/s.
    pub sound_speed: f64,
    pub dielectric_rel: f64,
    #[serde(default)]
    pub notes: String,
}

impl MaterialSystem {
    pub fn new(name: impl Into<String>, carrier_mass: f64, sound_speed: f64) -> Self {
        Self {
            name: name.into(),
            carrier_mass,
            sound_speed,
            dielectric_rel: 1.0,
            notes: String::new(),
        }
    }

    /// A fictitious carrier whose sound energy is exactly `e_s` μeV at speed `v_s`.
    pub fn with_sound_energy(e_s: f64, v_s: f64) -> Self {
        let m = 2.0 * e_s / (v_s * v_s) / ELECTRON_MASS;
        Self::new(format!("E_S={e_s} ueV"), m, v_s)
    }

    pub fn with_dielectric(mut self, eps_r: f64) -> Self {
        self.dielectric_rel = eps_r;
        self
    }

    /// Mass in μeV·ns²/nm².
    pub fn mass(&self) -> f64 {
        self.carrier_mass * ELECTRON_MASS
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_mass >= 0.0 && self.carrier_mass.is_finite()) {
            return Err(Error::invalid("carrier_mass", "must be finite and nonnegative"));
        }
        if !(self.sound_speed > 0.0 && self.sound_speed.is_finite()) {
            return Err(Error::invalid("sound_speed", "must be finite and positive"));
        }
        if !(self.dielectric_rel >= 1.0 && self.dielectric_rel.is_finite()) {
            return Err(Error::invalid("dielectric_rel", "must be at least 1"));
        }
        Ok(())
    }
}

/// One term `w cos(2 m τ)` of the drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub multiplier: u32,
    pub weight: f64,
}

/// Time dependence of the linearized equation `x'' + [a + 2q Σ wᵢ cos(2mᵢτ)] x = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    #[serde(default)]
    pub dc_a: f64,
    #[serde(default = "Waveform::default_harmonics")]
    pub harmonics: Vec<Harmonic>,
}

impl Default for Waveform {
    fn default() -> Self {
        Self::monochromatic()
    }
}

impl Waveform {
    fn default_harmonics() -> Vec<Harmonic> {
        vec![Harmonic {
            multiplier: 1,
            weight: 1.0,
        }]
    }

    pub fn monochromatic() -> Self {
        Self {
            dc_a: 0.0,
            harmonics: Self::default_harmonics(),
        }
    }

    pub fn polychromatic(terms: &[(u32, f64)]) -> Self {
        Self {
            dc_a: 0.0,
            harmonics: terms
                .iter()
                .map(|&(multiplier, weight)| Harmonic { multiplier, weight })
                .collect(),
        }
    }

    pub fn is_monochromatic(&self) -> bool {
        self.dc_a == 0.0
            && self.harmonics.len() == 1
            && self.harmonics[0].multiplier == 1
            && self.harmonics[0].weight == 1.0
    }

    /// Σ wᵢ cos(2 mᵢ τ).
    pub fn profile(&self, tau: f64) -> f64 {
        self.harmonics
            .iter()
            .map(|h| h.weight * (2.0 * h.multiplier as f64 * tau).cos())
            .sum()
    }

    /// Period in τ: π divided by the gcd of the multipliers.
    pub fn period(&self) -> f64 {
        let g = self
            .harmonics
            .iter()
            .map(|h| h.multiplier)
            .filter(|&m| m > 0)
            .fold(0, gcd);
        if g == 0 {
            PI
        } else {
            PI / g as f64
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dc_a.is_finite() {
            return Err(Error::invalid("dc_a", "must be finite"));
        }
        if self.harmonics.is_empty() {
            return Err(Error::invalid("harmonics", "at least one harmonic is required"));
        }
        for h in &self.harmonics {
            if !h.weight.is_finite() {
                return Err(Error::invalid("harmonics", "weights must be finite"));
            }
        }
        Ok(())
    }
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The SAW drive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Hz.
    pub frequency: f64,
    pub stability_q: f64,
    #[serde(default)]
    pub waveform: Waveform,
}

impl DriveConfig {
    pub fn monochromatic(frequency: f64, stability_q: f64) -> Self {
        Self {
            frequency,
            stability_q,
            waveform: Waveform::monochromatic(),
        }
    }

    /// Angular drive frequency ω in rad/ns.
    pub fn omega(&self) -> f64 {
        units::hz_to_rad_per_ns(self.frequency)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return Err(Error::invalid("frequency", "must be finite and positive"));
        }
        if !(self.stability_q >= 0.0 && self.stability_q.is_finite()) {
            return Err(Error::invalid("stability_q", "must be finite and nonnegative"));
        }
        self.waveform.validate()
    }
}

/// All scalar scales of a trap. Energies in μeV, lengths in nm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivedScales {
    pub e_s: f64,
    pub e_r: f64,
    pub v_saw: f64,
    pub v_idt: f64,
    pub hbar_omega: f64,
    pub hbar_omega0: f64,
    pub v0: f64,
    pub eps: f64,
    pub q_tilde: f64,
    pub n_b: f64,
    pub lattice_a: f64,
    pub wavelength: f64,
}

impl DerivedScales {
    /// Drive angular frequency, rad/ns.
    pub fn omega(&self) -> f64 {
        self.hbar_omega / HBAR
    }

    /// Secular angular frequency, rad/ns.
    pub fn omega0(&self) -> f64 {
        self.hbar_omega0 / HBAR
    }

    /// Lattice wavenumber k = 2π/λ, 1/nm.
    pub fn k(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// (m/2)v_s² in μeV.
pub fn sound_energy(material: &MaterialSystem) -> f64 {
    0.5 * material.mass() * material.sound_speed * material.sound_speed
}

/// Derives every trap scale. With `strict_pseudo`, drives outside the first
/// stability region (where the secular expansion is meaningless) are rejected.
pub fn derived_scales(
    material: &MaterialSystem,
    drive: &DriveConfig,
    order: Order,
    strict_pseudo: bool,
) -> Result<DerivedScales> {
    derived_scales_with(material, drive, order, RecoilCorrection::Linear, strict_pseudo)
}

pub fn derived_scales_with(
    material: &MaterialSystem,
    drive: &DriveConfig,
    order: Order,
    correction: RecoilCorrection,
    strict_pseudo: bool,
) -> Result<DerivedScales> {
    material.validate()?;
    drive.validate()?;
    let q = drive.stability_q;
    if strict_pseudo {
        if !drive.waveform.is_monochromatic() {
            return Err(Error::invalid(
                "waveform",
                "pseudopotential scales need a monochromatic drive",
            ));
        }
        if q > floquet::FIRST_REGION_EDGE {
            return Err(Error::invalid(
                "stability_q",
                format!(
                    "q = {q} lies beyond the first stability region (q < {})",
                    floquet::FIRST_REGION_EDGE
                ),
            ));
        }
    }

    let e_s = sound_energy(material);
    let omega = drive.omega();
    let hbar_omega = HBAR * omega;
    // λ in nm: (m/s)/(1/s) = m
    let wavelength = material.sound_speed / drive.frequency * 1e9;
    let k = 2.0 * PI / wavelength;
    let m = material.mass();
    let e_r = if m > 0.0 {
        HBAR * HBAR * k * k / (2.0 * m)
    } else {
        f64::INFINITY
    };
    let q_tilde = if e_s > 0.0 { e_r / (4.0 * e_s) } else { 0.0 };
    let eps2 = pseudopotential::epsilon_squared(q, q_tilde, order, correction);
    let eps = eps2.sqrt();
    let hbar_omega0 = eps * hbar_omega;
    let v0 = eps2 * e_s;
    let n_b = if hbar_omega0 > 0.0 { v0 / hbar_omega0 } else { 0.0 };
    let v_saw = q * e_s;
    Ok(DerivedScales {
        e_s,
        e_r: if e_r.is_finite() { e_r } else { 0.0 },
        v_saw,
        v_idt: v_saw / 2.0,
        hbar_omega,
        hbar_omega0,
        v0,
        eps,
        q_tilde,
        n_b,
        lattice_a: wavelength / 2.0,
        wavelength,
    })
}
