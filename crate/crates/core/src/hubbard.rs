//! Hubbard parameters of the acoustic lattice and the feasibility checks
//! built on top of them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pseudopotential::Order;
use crate::qme::BathParams;
use crate::scales::{derived_scales, DerivedScales, DriveConfig, MaterialSystem};
use crate::units::{COULOMB_CONSTANT, HBAR, MICRO_EV_PER_NS_IN_MW};

/// Default ratio standing in for "much less than".
pub const DEFAULT_THRESHOLD: f64 = 0.3;

/// Largest single-transducer amplitude compatible with the stability bound, μeV.
pub const V_IDT_BOUND: f64 = 500.0;

/// Order-of-magnitude T₂* for electron spins in GaAs, ns.
pub const T2_STAR_GAAS: f64 = 15.0;

/// Overall heating per unit of SAW-induced heating (transducer efficiency).
pub const IDT_HEATING_FACTOR: f64 = 10.0;

/// Smallest J·T₂*/ħ accepted as coherent exchange.
pub const SPIN_FIGURE_MIN: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HubbardEstimate {
    /// μeV.
    pub t_hop: f64,
    /// μeV.
    pub u_onsite: f64,
    /// μeV.
    pub j_exchange: f64,
    pub f_scr: f64,
    /// Backplane distance in nm, `None` for no screening.
    pub d_screen: Option<f64>,
    /// nm.
    pub lattice_a: f64,
    pub n_b: f64,
    /// Free-form description of the site disorder μᵢ, which is not modelled.
    #[serde(default)]
    pub disorder: Option<String>,
}

/// Nearest-neighbour tunneling t in μeV for a deep lattice.
pub fn tunneling(q: f64, n_b: f64, e_s: f64) -> Result<f64> {
    if !(n_b > 0.0) {
        return Err(Error::invalid("n_b", "must be positive"));
    }
    if !(q >= 0.0 && e_s >= 0.0) {
        return Err(Error::invalid("q", "q and E_S must be nonnegative"));
    }
    if n_b < 0.5 {
        log::warn!("n_b = {n_b} < 0.5: the deep-lattice tunneling formula is unreliable");
    }
    Ok(e_s * q * q * (-4.0 * n_b).exp() / (2.0 * (2.0 * PI * n_b).sqrt()))
}

/// The same t written through the recoil energy,
/// t/E_R = (4/√π)(V0/E_R)^{3/4} exp(−2√(V0/E_R)), with E_R and V0 those of
/// the leading-order lattice at (q, n_b, E_S).
pub fn tunneling_recoil_form(q: f64, n_b: f64, e_s: f64) -> Result<f64> {
    if !(n_b > 0.0) {
        return Err(Error::invalid("n_b", "must be positive"));
    }
    let e_r = q * q * e_s / (32.0 * n_b * n_b);
    let depth = 4.0 * n_b * n_b;
    Ok(e_r * 4.0 / PI.sqrt() * depth.powf(0.75) * (-2.0 * depth.sqrt()).exp())
}

/// Image-charge reduction of the on-site repulsion by a metal plane at `d`.
pub fn screening_factor(d_screen: Option<f64>, lattice_a: f64) -> f64 {
    match d_screen {
        None => 1.0,
        Some(d) if d.is_infinite() => 1.0,
        Some(d) => {
            let r = d / lattice_a;
            1.0 - 1.0 / (1.0 + 4.0 * r * r).sqrt()
        }
    }
}

/// On-site repulsion U (μeV) and the screening factor used.
pub fn coulomb_onsite(lattice_a: f64, eps_r: f64, d_screen: Option<f64>) -> Result<(f64, f64)> {
    if !(lattice_a > 0.0) {
        return Err(Error::invalid("lattice_a", "must be positive"));
    }
    if !(eps_r > 0.0) {
        return Err(Error::invalid("eps_r", "must be positive"));
    }
    if d_screen.is_some_and(|d| !(d >= 0.0)) {
        return Err(Error::invalid("d_screen", "must be nonnegative"));
    }
    let f = screening_factor(d_screen, lattice_a);
    Ok((f * COULOMB_CONSTANT / (eps_r * lattice_a), f))
}

/// Superexchange J = 4t²/U.
pub fn exchange(t_hop: f64, u_onsite: f64) -> Result<f64> {
    if !(u_onsite > 0.0) {
        return Err(Error::invalid("u_onsite", "must be positive"));
    }
    Ok(4.0 * t_hop * t_hop / u_onsite)
}

/// t, U and J for a trap described by `scales`.
pub fn hubbard_estimate(
    scales: &DerivedScales,
    q: f64,
    eps_r: f64,
    d_screen: Option<f64>,
) -> Result<HubbardEstimate> {
    let t_hop = tunneling(q, scales.n_b, scales.e_s)?;
    let (u_onsite, f_scr) = coulomb_onsite(scales.lattice_a, eps_r, d_screen)?;
    let j_exchange = if u_onsite > 0.0 {
        exchange(t_hop, u_onsite)?
    } else {
        0.0
    };
    Ok(HubbardEstimate {
        t_hop,
        u_onsite,
        j_exchange,
        f_scr,
        d_screen,
        lattice_a: scales.lattice_a,
        n_b: scales.n_b,
        disorder: None,
    })
}

/// Experimental inputs that are not derived from the trap itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extras {
    /// ns.
    pub t2_star: f64,
    pub eps_ad: f64,
    /// Quality factor of the driven SAW mode.
    pub quality: f64,
    /// Amplitude of a single phonon, μeV.
    pub v0_phonon: f64,
    /// mW.
    pub p_cool: f64,
}

impl Default for Extras {
    fn default() -> Self {
        Self {
            t2_star: T2_STAR_GAAS,
            eps_ad: 0.05,
            quality: 1e4,
            v0_phonon: 1e-3,
            p_cool: 1.0,
        }
    }
}

/// One inequality `lhs ≪ rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

impl Link {
    fn new(name: &str, lhs: f64, rhs: f64, threshold: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            ratio,
            pass: ratio <= threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatBudget {
    /// mW.
    pub w_heat_saw: f64,
    /// mW.
    pub w_heat_total: f64,
    /// mW.
    pub p_cool: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub threshold: f64,
    /// ħγ ≪ k_BT ≪ ħω₀ ≪ ħω ≪ E_S.
    pub chain: Vec<Link>,
    pub chain_ok: bool,
    /// The weaker requirement with ħγ and k_BT each compared to ħω₀ only.
    pub relaxed: Vec<Link>,
    pub relaxed_ok: bool,
    /// μeV.
    pub v_idt: f64,
    pub v_idt_ok: bool,
    pub n_b_ok: bool,
    /// J·T₂*/ħ.
    pub spin_figure: f64,
    pub spin_ok: bool,
    pub heat: HeatBudget,
    /// m/s.
    pub v_eff: f64,
}

/// Evaluates every requirement; a failing report is a valid result.
pub fn regime_check(
    scales: &DerivedScales,
    bath: &BathParams,
    hubbard: &HubbardEstimate,
    extras: &Extras,
    threshold: f64,
) -> Result<FeasibilityReport> {
    bath.validate()?;
    if !(threshold > 0.0) {
        return Err(Error::invalid("threshold", "must be positive"));
    }
    let hg = HBAR * bath.gamma;
    let chain = vec![
        Link::new("hbar*gamma << k_B*T", hg, bath.k_t, threshold),
        Link::new("k_B*T << hbar*omega0", bath.k_t, scales.hbar_omega0, threshold),
        Link::new("hbar*omega0 << hbar*omega", scales.hbar_omega0, scales.hbar_omega, threshold),
        Link::new("hbar*omega << E_S", scales.hbar_omega, scales.e_s, threshold),
    ];
    let relaxed = vec![
        Link::new("hbar*gamma << hbar*omega0", hg, scales.hbar_omega0, threshold),
        Link::new("k_B*T << hbar*omega0", bath.k_t, scales.hbar_omega0, threshold),
        chain[2].clone(),
        chain[3].clone(),
    ];
    let spin_figure = hubbard.j_exchange * extras.t2_star / HBAR;
    let heat = heating_budget(scales, extras.v0_phonon, extras.quality, extras.p_cool)?;
    let v_eff = adiabatic_speed(scales.lattice_a, scales.omega0(), extras.eps_ad)?;
    Ok(FeasibilityReport {
        threshold,
        chain_ok: chain.iter().all(|l| l.pass),
        chain,
        relaxed_ok: relaxed.iter().all(|l| l.pass),
        relaxed,
        v_idt: scales.v_idt,
        v_idt_ok: scales.v_idt <= V_IDT_BOUND,
        n_b_ok: scales.n_b >= 1.0,
        spin_figure,
        spin_ok: spin_figure >= SPIN_FIGURE_MIN,
        heat,
        v_eff,
    })
}

/// SAW heating ħω (V_SAW/V0_phonon)² ω/Q and the overall dissipation, in mW.
pub fn heating_budget(scales: &DerivedScales, v0_phonon: f64, quality: f64, p_cool: f64) -> Result<HeatBudget> {
    if !(v0_phonon > 0.0) {
        return Err(Error::invalid("v0_phonon", "must be positive"));
    }
    if !(quality > 0.0) {
        return Err(Error::invalid("quality", "must be positive"));
    }
    let n_ph = (scales.v_saw / v0_phonon).powi(2);
    let kappa = scales.omega() / quality;
    let w_heat_saw = scales.hbar_omega * n_ph * kappa * MICRO_EV_PER_NS_IN_MW;
    let w_heat_total = IDT_HEATING_FACTOR * w_heat_saw;
    Ok(HeatBudget {
        w_heat_saw,
        w_heat_total,
        p_cool,
        ok: w_heat_total <= p_cool,
    })
}

/// Largest adiabatic dot speed ε_ad·a·ω₀/2π in m/s (a in nm, ω₀ in rad/ns).
pub fn adiabatic_speed(lattice_a: f64, omega0: f64, eps_ad: f64) -> Result<f64> {
    if !(eps_ad > 0.0 && eps_ad < 1.0) {
        return Err(Error::invalid("eps_ad", "must lie in (0, 1)"));
    }
    Ok(eps_ad * lattice_a * omega0 / (2.0 * PI))
}

/// Inputs of the exemplary setup: a 1 meV sound energy at 18 km/s and 50 GHz.
pub const CASE_E_S: f64 = 1000.0;
pub const CASE_V_S: f64 = 18_000.0;
pub const CASE_FREQUENCY: f64 = 50e9;
pub const CASE_EPS_R: f64 = 9.5;
pub const CASE_Q: [f64; 2] = [0.5, 0.7];
pub const CASE_D_SCREEN: [f64; 2] = [10.0, 100.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyRow {
    pub q: f64,
    /// nm.
    pub d_screen: f64,
    pub hbar_omega: f64,
    pub hbar_omega0: f64,
    pub v0: f64,
    pub n_b: f64,
    pub lattice_a: f64,
    pub t_hop: f64,
    pub u_onsite: f64,
}

impl CaseStudyRow {
    pub const HEADER: [&'static str; 9] =
        ["q", "d_screen_nm", "hbar_omega_ueV", "hbar_omega0_ueV", "V0_ueV", "n_b", "a_nm", "t_ueV", "U_ueV"];

    pub fn values(&self) -> [f64; 9] {
        [
            self.q,
            self.d_screen,
            self.hbar_omega,
            self.hbar_omega0,
            self.v0,
            self.n_b,
            self.lattice_a,
            self.t_hop,
            self.u_onsite,
        ]
    }
}

/// Every combination of q and backplane distance of the exemplary setup.
pub fn case_study() -> Result<Vec<CaseStudyRow>> {
    let material = MaterialSystem::with_sound_energy(CASE_E_S, CASE_V_S).with_dielectric(CASE_EPS_R);
    let mut rows = Vec::new();
    for q in CASE_Q {
        let s = derived_scales(
            &material,
            &DriveConfig::monochromatic(CASE_FREQUENCY, q),
            Order::Fourth,
            true,
        )?;
        for d in CASE_D_SCREEN {
            let h = hubbard_estimate(&s, q, CASE_EPS_R, Some(d))?;
            rows.push(CaseStudyRow {
                q,
                d_screen: d,
                hbar_omega: s.hbar_omega,
                hbar_omega0: s.hbar_omega0,
                v0: s.v0,
                n_b: s.n_b,
                lattice_a: s.lattice_a,
                t_hop: h.t_hop,
                u_onsite: h.u_onsite,
            });
        }
    }
    Ok(rows)
}

/// `(min, max)` of one column.
pub fn column_range(rows: &[CaseStudyRow], f: impl Fn(&CaseStudyRow) -> f64) -> (f64, f64) {
    rows.iter()
        .map(f)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}
