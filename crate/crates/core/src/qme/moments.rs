use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{bose_occupation, effective_occupation, physical, BathParams};
use crate::error::{Error, Result};
use crate::floquet::{evaluate_mode, FloquetMode};
use crate::ode::{Integrator, OdeSystem, Tolerances};
use crate::units::HBAR;

pub const MOMENT_TOL: Tolerances = Tolerances::new(1e-10, 1e-12);

/// Relative slack allowed on the uncertainty bound along a trajectory.
const UNCERTAINTY_SLACK: f64 = 1e-8;

/// First moments and central second moments of a Gaussian state.
/// Positions in nm, momenta in μeV·ns/nm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    /// `⟨xp+px⟩/2 − ⟨x⟩⟨p⟩`.
    pub cov_sym: f64,
}

impl MomentState {
    /// Coherent state of the oscillator with mass `m` and frequency `omega0`.
    pub fn coherent(mean_x: f64, mean_p: f64, m: f64, omega0: f64) -> Self {
        Self::thermal(0.0, m, omega0).displaced(mean_x, mean_p)
    }

    /// Thermal state with mean occupation `nbar`.
    pub fn thermal(nbar: f64, m: f64, omega0: f64) -> Self {
        let f = 2.0 * nbar + 1.0;
        Self {
            mean_x: 0.0,
            mean_p: 0.0,
            var_x: f * HBAR / (2.0 * m * omega0),
            var_p: f * HBAR * m * omega0 / 2.0,
            cov_sym: 0.0,
        }
    }

    pub fn displaced(mut self, mean_x: f64, mean_p: f64) -> Self {
        self.mean_x = mean_x;
        self.mean_p = mean_p;
        self
    }

    /// `var_x var_p − cov²`, at least `(ħ/2)²` for a physical state.
    pub fn uncertainty(&self) -> f64 {
        self.var_x * self.var_p - self.cov_sym * self.cov_sym
    }

    pub fn is_physical(&self, rel_tol: f64) -> bool {
        self.var_x > 0.0
            && self.var_p > 0.0
            && self.uncertainty() >= (HBAR / 2.0).powi(2) * (1.0 - rel_tol)
    }

    /// Raw moments `(⟨x⟩, ⟨p⟩, ⟨x²⟩, ⟨p²⟩, ⟨xp+px⟩)`.
    pub fn to_raw(&self) -> [f64; 5] {
        [
            self.mean_x,
            self.mean_p,
            self.var_x + self.mean_x * self.mean_x,
            self.var_p + self.mean_p * self.mean_p,
            2.0 * (self.cov_sym + self.mean_x * self.mean_p),
        ]
    }

    pub fn from_raw(v: &[f64; 5]) -> Self {
        Self {
            mean_x: v[0],
            mean_p: v[1],
            var_x: v[2] - v[0] * v[0],
            var_p: v[3] - v[1] * v[1],
            cov_sym: 0.5 * v[4] - v[0] * v[1],
        }
    }

    /// Mean occupation of a reference oscillator at `omega0`, `⟨a†a⟩`.
    pub fn occupation(&self, m: f64, omega0: f64) -> f64 {
        let x2 = self.var_x + self.mean_x * self.mean_x;
        let p2 = self.var_p + self.mean_p * self.mean_p;
        (m * omega0 * x2 / HBAR + p2 / (m * omega0 * HBAR)) / 2.0 - 0.5
    }

    /// Purity `Tr ρ²` of the Gaussian state.
    pub fn purity(&self) -> f64 {
        HBAR / 2.0 / self.uncertainty().sqrt()
    }
}

#[derive(Clone, Debug)]
enum Drive {
    /// `W(t) = −(ω²/2) q cos ωt` with the Floquet mode of that drive.
    Mathieu { omega: f64, q: f64, mode: FloquetMode },
    /// `W = ω₀²`, `u = e^{iω₀t}`.
    Static,
}

/// The closed linear system `v̇ = M(t) v + C(t)` for the raw moments.
///
/// Integration runs in oscillator units `X = x/s_x`, `P = p/s_p` with
/// `s_x = √(ħ/2mω₀)` and `s_p = √(mħω₀/2)`, where the vacuum has unit variances.
#[derive(Clone, Debug)]
pub struct MomentOde {
    pub mass: f64,
    pub omega0: f64,
    pub gamma: f64,
    pub n_eff: f64,
    drive: Drive,
}

impl MomentOde {
    /// Spring constant `W(t)` in 1/ns².
    pub fn spring(&self, t: f64) -> f64 {
        match &self.drive {
            Drive::Mathieu { omega, q, .. } => -0.5 * omega * omega * q * (omega * t).cos(),
            Drive::Static => self.omega0 * self.omega0,
        }
    }

    /// `u(t)` and `u̇(t)`.
    pub fn mode_values(&self, t: f64) -> (Complex64, Complex64) {
        match &self.drive {
            Drive::Mathieu { mode, .. } => evaluate_mode(mode, t),
            Drive::Static => {
                let u = Complex64::from_polar(1.0, self.omega0 * t);
                (u, Complex64::new(0.0, self.omega0) * u)
            }
        }
    }

    /// Drive angular frequency, or `None` for the static reference oscillator.
    pub fn drive_omega(&self) -> Option<f64> {
        match &self.drive {
            Drive::Mathieu { omega, .. } => Some(*omega),
            Drive::Static => None,
        }
    }

    pub fn scale_x(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega0)).sqrt()
    }

    pub fn scale_p(&self) -> f64 {
        (self.mass * HBAR * self.omega0 / 2.0).sqrt()
    }

    /// `M(t)` and `C(t)` in physical units for `(⟨x⟩, ⟨p⟩, ⟨x²⟩, ⟨p²⟩, ⟨xp+px⟩)`.
    pub fn matrix(&self, t: f64) -> ([[f64; 5]; 5], [f64; 5]) {
        let m = self.mass;
        let w = self.spring(t);
        let g = self.gamma;
        let (u, du) = self.mode_values(t);
        let d = g * (2.0 * self.n_eff + 1.0);
        let mut mm = [[0.0; 5]; 5];
        mm[0][0] = -g / 2.0;
        mm[0][1] = 1.0 / m;
        mm[1][0] = -m * w;
        mm[1][1] = -g / 2.0;
        mm[2][2] = -g;
        mm[2][4] = 1.0 / m;
        mm[3][3] = -g;
        mm[3][4] = -m * w;
        mm[4][2] = -2.0 * m * w;
        mm[4][3] = 2.0 / m;
        mm[4][4] = -g;
        let c = [
            0.0,
            0.0,
            d * HBAR * u.norm_sqr() / (2.0 * m * self.omega0),
            d * HBAR * m * du.norm_sqr() / (2.0 * self.omega0),
            d * HBAR * (u * du.conj()).re / self.omega0,
        ];
        (mm, c)
    }

    fn to_scaled(&self, s: &MomentState) -> [f64; 5] {
        let (sx, sp) = (self.scale_x(), self.scale_p());
        let r = s.to_raw();
        [r[0] / sx, r[1] / sp, r[2] / (sx * sx), r[3] / (sp * sp), r[4] / (sx * sp)]
    }

    fn from_scaled(&self, y: &[f64]) -> MomentState {
        let (sx, sp) = (self.scale_x(), self.scale_p());
        MomentState::from_raw(&[y[0] * sx, y[1] * sp, y[2] * sx * sx, y[3] * sp * sp, y[4] * sx * sp])
    }
}

impl OdeSystem for MomentOde {
    fn dim(&self) -> usize {
        5
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let w0 = self.omega0;
        let k = self.spring(t) / w0;
        let g = self.gamma;
        let (u, du) = self.mode_values(t);
        let d = g * (2.0 * self.n_eff + 1.0);
        dy[0] = w0 * y[1] - 0.5 * g * y[0];
        dy[1] = -k * y[0] - 0.5 * g * y[1];
        dy[2] = w0 * y[4] - g * y[2] + d * u.norm_sqr();
        dy[3] = -k * y[4] - g * y[3] + d * du.norm_sqr() / (w0 * w0);
        dy[4] = 2.0 * w0 * y[3] - 2.0 * k * y[2] - g * y[4] + d * 2.0 * (u * du.conj()).re / w0;
    }
}

/// Moment equations for a carrier of mass `m` driven through `mode`, whose
/// `omega` must be the physical drive frequency. The mode is used in the
/// convention of `W(t) = −(ω²/2) q cos ωt` whatever its stored convention.
pub fn assemble_moment_ode(mode: &FloquetMode, m: f64, bath: &BathParams) -> Result<MomentOde> {
    bath.validate()?;
    if !(m > 0.0) {
        return Err(Error::invalid("mass", "must be positive"));
    }
    if !(mode.omega0 > 0.0) {
        return Err(Error::UntrappedMode);
    }
    let mode = physical(mode);
    let n_eff = effective_occupation(&mode, bath)?.n;
    Ok(MomentOde {
        mass: m,
        omega0: mode.omega0,
        gamma: bath.gamma,
        n_eff,
        drive: Drive::Mathieu {
            omega: mode.omega,
            q: mode.q,
            mode,
        },
    })
}

/// The time-independent damped oscillator at `omega0` with `N = n̄(ω₀)`.
pub fn reference_ode(m: f64, omega0: f64, bath: &BathParams) -> Result<MomentOde> {
    bath.validate()?;
    if !(m > 0.0) {
        return Err(Error::invalid("mass", "must be positive"));
    }
    if !(omega0 > 0.0) {
        return Err(Error::UntrappedMode);
    }
    Ok(MomentOde {
        mass: m,
        omega0,
        gamma: bath.gamma,
        n_eff: bose_occupation(omega0, bath.k_t),
        drive: Drive::Static,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub t: f64,
    pub state: MomentState,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentTrajectory {
    pub samples: Vec<MomentSample>,
    pub mass: f64,
    pub omega0: f64,
    /// Drive angular frequency; `None` for the reference oscillator.
    pub omega: Option<f64>,
    pub n_eff: f64,
    pub gamma: f64,
}

impl MomentTrajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    /// Dimensionless time τ = ωt/2 of sample `i` (ω₀t/2 for the reference oscillator).
    pub fn tau(&self, i: usize) -> f64 {
        0.5 * self.omega.unwrap_or(self.omega0) * self.samples[i].t
    }
}

/// Propagates `state0` from t = 0 to `t_end`, sampling every `stride`.
/// Fails if a sample breaks the uncertainty bound beyond 1e-8 relative.
pub fn propagate_moments(
    state0: &MomentState,
    ode: &MomentOde,
    t_end: f64,
    stride: f64,
) -> Result<MomentTrajectory> {
    propagate_with(state0, ode, t_end, stride, MOMENT_TOL)
}

pub fn propagate_with(
    state0: &MomentState,
    ode: &MomentOde,
    t_end: f64,
    stride: f64,
    tol: Tolerances,
) -> Result<MomentTrajectory> {
    if !state0.is_physical(UNCERTAINTY_SLACK) {
        return Err(Error::invalid("state0", "violates the uncertainty relation"));
    }
    if !(t_end > 0.0 && stride > 0.0) {
        return Err(Error::invalid("t_end", "t_end and stride must be positive"));
    }
    let count = (t_end / stride * (1.0 + 1e-12)).floor() as usize;
    let times: Vec<f64> = (0..=count).map(|i| i as f64 * stride).collect();
    let y0 = ode.to_scaled(state0);
    let ys = Integrator::new(tol).solve_at(ode, 0.0, &y0, &times)?;
    let mut samples = Vec::with_capacity(ys.len());
    for (t, y) in times.into_iter().zip(ys) {
        let state = ode.from_scaled(&y);
        if !state.is_physical(UNCERTAINTY_SLACK) {
            return Err(Error::InvariantViolation(format!(
                "uncertainty bound broken at t = {t}: {:e} < {:e}",
                state.uncertainty(),
                (HBAR / 2.0).powi(2)
            )));
        }
        samples.push(MomentSample { t, state });
    }
    Ok(MomentTrajectory {
        samples,
        mass: ode.mass,
        omega0: ode.omega0,
        omega: ode.drive_omega(),
        n_eff: ode.n_eff,
        gamma: ode.gamma,
    })
}

/// The reference oscillator `ρ̇ = −iω₀[a†a, ρ] + γ(n̄+1)D[a]ρ + γn̄D[a†]ρ` at
/// the moment level.
pub fn reference_oscillator(
    state0: &MomentState,
    m: f64,
    omega0: f64,
    bath: &BathParams,
    t_end: f64,
    stride: f64,
) -> Result<MomentTrajectory> {
    let ode = reference_ode(m, omega0, bath)?;
    propagate_moments(state0, &ode, t_end, stride)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Quasistationarity {
    /// Second moments constant: the degenerate periodic case.
    Stationary { deviation: f64 },
    /// Second moments repeat after one drive period, `period_tau = π`.
    QuasiStationary { period_tau: f64, deviation: f64 },
    NotStationary { deviation: f64 },
}

impl Quasistationarity {
    pub fn is_stationary(&self) -> bool {
        !matches!(self, Quasistationarity::NotStationary { .. })
    }

    pub fn deviation(&self) -> f64 {
        match *self {
            Quasistationarity::Stationary { deviation }
            | Quasistationarity::QuasiStationary { deviation, .. }
            | Quasistationarity::NotStationary { deviation } => deviation,
        }
    }
}

/// Compares the central second moments over the last two drive periods.
///
/// The trajectory must be sampled on a uniform grid that divides the drive
/// period `2π/omega`. Deviations are relative to the largest magnitude of the
/// same moment over the window.
pub fn detect_quasistationary(
    trajectory: &MomentTrajectory,
    omega: f64,
    tol: f64,
) -> Result<Quasistationarity> {
    let s = &trajectory.samples;
    if s.len() < 3 {
        return Err(Error::invalid("trajectory", "too few samples"));
    }
    let stride = s[1].t - s[0].t;
    let period = 2.0 * PI / omega;
    let k = (period / stride).round() as usize;
    if k == 0 || ((k as f64 * stride) / period - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(
            "trajectory",
            "sample stride must divide the drive period",
        ));
    }
    if s.len() < 2 * k + 1 {
        return Err(Error::invalid("trajectory", "shorter than two drive periods"));
    }
    let window = &s[s.len() - 2 * k - 1..];
    let comps = |st: &MomentState| [st.var_x, st.var_p, st.cov_sym];
    let mut scale = [0.0f64; 3];
    for smp in window {
        for (sc, v) in scale.iter_mut().zip(comps(&smp.state)) {
            *sc = sc.max(v.abs());
        }
    }
    let rel = |a: f64, b: f64, sc: f64| if sc > 0.0 { (a - b).abs() / sc } else { 0.0 };
    let mut periodic = 0.0f64;
    for i in 0..=k {
        let a = comps(&window[i].state);
        let b = comps(&window[i + k].state);
        for j in 0..3 {
            periodic = periodic.max(rel(a[j], b[j], scale[j]));
        }
    }
    let mut constant = 0.0f64;
    let first = comps(&window[k].state);
    for smp in &window[k..] {
        let c = comps(&smp.state);
        for j in 0..3 {
            constant = constant.max(rel(c[j], first[j], scale[j]));
        }
    }
    Ok(if constant < tol {
        Quasistationarity::Stationary {
            deviation: constant,
        }
    } else if periodic < tol {
        Quasistationarity::QuasiStationary {
            period_tau: PI,
            deviation: periodic,
        }
    } else {
        Quasistationarity::NotStationary {
            deviation: periodic,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::floquet_coefficients;

    const M: f64 = 6.17e-6;
    const OMEGA: f64 = 314.159;

    fn ode(q: f64, gamma_rel: f64, kt_rel: f64) -> MomentOde {
        let mode = floquet_coefficients(q, 8).unwrap().at_drive(OMEGA);
        let w0 = mode.omega0;
        assemble_moment_ode(&mode, M, &BathParams::new(gamma_rel * w0, kt_rel * HBAR * w0)).unwrap()
    }

    #[test]
    fn raw_round_trip() {
        let s = MomentState {
            mean_x: 1.5,
            mean_p: -0.2,
            var_x: 3.0,
            var_p: 0.4,
            cov_sym: 0.1,
        };
        let back = MomentState::from_raw(&s.to_raw());
        assert!((back.cov_sym - s.cov_sym).abs() < 1e-15);
        assert!((back.var_x - s.var_x).abs() < 1e-15);
    }

    #[test]
    fn undamped_first_moments_follow_heisenberg_pair() {
        let o = ode(0.47, 0.0, 0.0);
        let (mm, c) = o.matrix(0.3);
        let w = o.spring(0.3);
        assert_eq!(mm[0], [0.0, 1.0 / M, 0.0, 0.0, 0.0]);
        assert_eq!(mm[1], [-M * w, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(c, [0.0; 5]);
        assert!((o.spring(0.0).abs() - 0.5 * OMEGA * OMEGA * 0.47).abs() < 1e-9);
    }

    #[test]
    fn damping_of_first_moments_is_half_gamma() {
        let o = ode(0.3, 0.01, 0.2);
        for t in [0.0, 0.011, 0.5] {
            let (mm, _) = o.matrix(t);
            assert_eq!(mm[0][0], -o.gamma / 2.0);
            assert_eq!(mm[1][1], -o.gamma / 2.0);
        }
    }

    #[test]
    fn thermal_reference_state_is_stationary() {
        let w0 = 50.0;
        let bath = BathParams::new(0.5, 0.4 * HBAR * w0);
        let nbar = bose_occupation(w0, bath.k_t);
        let s0 = MomentState::thermal(nbar, M, w0);
        let tr = reference_oscillator(&s0, M, w0, &bath, 2.0, 0.01).unwrap();
        for s in &tr.samples {
            assert!((s.state.var_x / s0.var_x - 1.0).abs() < 1e-9);
            assert!((s.state.var_p / s0.var_p - 1.0).abs() < 1e-9);
        }
        let p = tr.samples.last().unwrap().state.purity();
        assert!((p - 1.0 / (2.0 * nbar + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn reference_oscillator_relaxes_to_thermal_occupation() {
        let w0 = 50.0;
        let bath = BathParams::new(5.0, 1.3 * HBAR * w0);
        let s0 = MomentState::coherent(10.0, 0.0, M, w0);
        let tr = reference_oscillator(&s0, M, w0, &bath, 10.0, 0.5).unwrap();
        let n = tr.samples.last().unwrap().state.occupation(M, w0);
        assert!((n - bose_occupation(w0, bath.k_t)).abs() < 1e-6, "{n}");
    }

    #[test]
    fn undamped_run_is_not_quasistationary() {
        let o = ode(0.47, 0.0, 0.1);
        let s0 = MomentState::coherent(0.0, 0.0, M, o.omega0);
        let period = 2.0 * PI / OMEGA;
        let tr = propagate_moments(&s0, &o, 30.0 * period, period / 16.0).unwrap();
        let v = detect_quasistationary(&tr, OMEGA, 1e-3).unwrap();
        assert!(!v.is_stationary(), "{v:?}");
    }
}
