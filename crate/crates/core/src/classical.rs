//! Nonlinear classical motion in the SAW potential and thermal stability.
//!
//! Dimensionless variables: `x̃ = kx`, `τ = ωt/2`. The equation of motion is
//! `x̃'' + 2q sin(x̃) Σ wᵢ cos(2mᵢτ) = 0`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::ControlFlow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::{self, Convention};
use crate::ode::{FnSystem, Integrator, Tolerances};
use crate::scales::Waveform;

/// Default propagation window, 10³ drive periods.
pub const DEFAULT_TAU_MAX: f64 = 1000.0 * PI;

pub const TRAJECTORY_TOL: Tolerances = Tolerances::new(1e-10, 1e-12);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub x_tilde: f64,
    pub v_tilde: f64,
    pub tau: f64,
}

impl ClassicalState {
    pub fn at_rest(x_tilde: f64) -> Self {
        Self {
            x_tilde,
            v_tilde: 0.0,
            tau: 0.0,
        }
    }

    /// Starts at the node with the equipartition velocity `√(2θ)`, θ = k_BT/E_S.
    pub fn thermal(theta: f64) -> Self {
        Self {
            x_tilde: 0.0,
            v_tilde: (2.0 * theta).sqrt(),
            tau: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Criterion {
    /// Stable while `|x̃| < π`, half a lattice spacing.
    HalfLattice,
    /// Stable while `|x̃| < limit`, with `limit = k·l_mfp`.
    MeanFreePath { limit: f64 },
}

impl Criterion {
    /// Mean-free-path criterion from a length in nm and the lattice spacing.
    pub fn mean_free_path(l_mfp: f64, lattice_a: f64) -> Self {
        Criterion::MeanFreePath {
            limit: PI * l_mfp / lattice_a,
        }
    }

    pub fn threshold(&self) -> f64 {
        match *self {
            Criterion::HalfLattice => PI,
            Criterion::MeanFreePath { limit } => limit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub max_excursion: f64,
    pub escape_tau: Option<f64>,
    pub criterion: Criterion,
}

fn system(q: f64, waveform: &Waveform) -> FnSystem<impl Fn(f64, &[f64], &mut [f64]) + '_> {
    FnSystem::new(2, move |tau, y: &[f64], d: &mut [f64]| {
        d[0] = y[1];
        d[1] = -2.0 * q * y[0].sin() * waveform.profile(tau);
    })
}

fn check_init(init: &ClassicalState, tau_max: f64) -> Result<()> {
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(Error::invalid("tau_max", "must be finite and positive"));
    }
    if !(init.x_tilde.is_finite() && init.v_tilde.is_finite() && init.tau.is_finite()) {
        return Err(Error::invalid("init", "state must be finite"));
    }
    Ok(())
}

/// Samples the trajectory every `stride` in τ, including the initial state.
pub fn integrate_trajectory(
    q: f64,
    init: ClassicalState,
    waveform: &Waveform,
    tau_max: f64,
    stride: f64,
) -> Result<Vec<ClassicalState>> {
    check_init(&init, tau_max)?;
    if !(stride > 0.0) {
        return Err(Error::invalid("stride", "must be positive"));
    }
    let sys = system(q, waveform);
    let count = (tau_max / stride).floor() as usize;
    let times: Vec<f64> = (1..=count).map(|i| init.tau + i as f64 * stride).collect();
    let mut out = Vec::with_capacity(count + 1);
    out.push(init);
    let states = Integrator::new(TRAJECTORY_TOL).solve_at(&sys, init.tau, &[init.x_tilde, init.v_tilde], &times)?;
    out.extend(times.iter().zip(states).map(|(&tau, y)| ClassicalState {
        x_tilde: y[0],
        v_tilde: y[1],
        tau,
    }));
    Ok(out)
}

/// Integrates until `tau_max` or until the excursion reaches the threshold.
pub fn excursion(
    q: f64,
    init: ClassicalState,
    waveform: &Waveform,
    tau_max: f64,
    criterion: Criterion,
) -> Result<StabilityVerdict> {
    check_init(&init, tau_max)?;
    let limit = criterion.threshold();
    let mut max_x = init.x_tilde.abs();
    let mut escape = None;
    if max_x < limit && !(init.x_tilde == 0.0 && init.v_tilde == 0.0) {
        let sys = system(q, waveform);
        let mut y = [init.x_tilde, init.v_tilde];
        Integrator::new(TRAJECTORY_TOL).run(
            &sys,
            init.tau,
            &mut y,
            init.tau + tau_max,
            &[],
            |step| {
                let x = step.y[0].abs();
                if x > max_x {
                    max_x = x;
                }
                if x >= limit {
                    escape = Some(step.t);
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        )?;
    }
    Ok(StabilityVerdict {
        stable: max_x < limit,
        max_excursion: max_x,
        escape_tau: escape,
        criterion,
    })
}

/// Classifies the equipartition trajectory `x̃₀ = 0`, `ṽ₀ = √(2θ)`.
pub fn classify_stability(
    q: f64,
    theta: f64,
    waveform: &Waveform,
    tau_max: f64,
    criterion: Criterion,
) -> Result<StabilityVerdict> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::invalid("theta", "must be finite and nonnegative"));
    }
    excursion(q, ClassicalState::thermal(theta), waveform, tau_max, criterion)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramSettings {
    pub tau_max: f64,
    /// 1 means the single equipartition trajectory per cell; more draws
    /// Maxwell–Boltzmann velocities.
    pub samples_per_cell: usize,
    pub seed: u64,
    pub criterion: Criterion,
}

impl Default for DiagramSettings {
    fn default() -> Self {
        Self {
            tau_max: DEFAULT_TAU_MAX,
            samples_per_cell: 32,
            seed: 0,
            criterion: Criterion::HalfLattice,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramCell {
    pub q: f64,
    pub theta: f64,
    pub fraction_stable: f64,
    pub max_excursion_median: f64,
}

/// Cells are stored with θ as the slow index: `cells[i_theta * q_grid.len() + i_q]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityDiagram {
    pub q_grid: Vec<f64>,
    pub temp_grid: Vec<f64>,
    pub cells: Vec<DiagramCell>,
    pub samples_per_cell: usize,
    pub seed: u64,
    pub tau_max: f64,
}

impl StabilityDiagram {
    pub fn cell(&self, i_q: usize, i_theta: usize) -> &DiagramCell {
        &self.cells[i_theta * self.q_grid.len() + i_q]
    }

    /// Largest θ whose cell reaches `min_fraction` in each q column.
    pub fn max_stable_theta(&self, min_fraction: f64) -> Vec<Option<f64>> {
        (0..self.q_grid.len())
            .map(|iq| {
                (0..self.temp_grid.len())
                    .filter(|&it| self.cell(iq, it).fraction_stable >= min_fraction)
                    .map(|it| self.temp_grid[it])
                    .reduce(f64::max)
            })
            .collect()
    }

    /// Top of the stable lobe: the largest θ over all columns for which the
    /// cell reaches `min_fraction`, ignoring the trivially stable θ = 0 row.
    pub fn lobe_max_theta(&self, min_fraction: f64) -> Option<f64> {
        self.max_stable_theta(min_fraction)
            .into_iter()
            .flatten()
            .filter(|&t| t > 0.0)
            .reduce(f64::max)
    }
}

fn check_grid(name: &'static str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid(name, "grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(name, "grid values must be finite"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(name, "grid must be strictly increasing"));
    }
    Ok(())
}

/// Stability over a (q, θ) grid. Each cell draws from its own RNG stream, so
/// the result depends only on `(seed, grids)` and not on scheduling.
pub fn stability_diagram(
    q_grid: &[f64],
    temp_grid: &[f64],
    waveform: &Waveform,
    settings: &DiagramSettings,
) -> Result<StabilityDiagram> {
    check_grid("q_grid", q_grid)?;
    check_grid("temp_grid", temp_grid)?;
    if temp_grid[0] < 0.0 {
        return Err(Error::invalid("temp_grid", "temperatures must be nonnegative"));
    }
    if settings.samples_per_cell == 0 {
        return Err(Error::invalid("samples_per_cell", "must be at least 1"));
    }
    let nq = q_grid.len();
    let cells = (0..nq * temp_grid.len())
        .into_par_iter()
        .map(|idx| {
            let q = q_grid[idx % nq];
            let theta = temp_grid[idx / nq];
            diagram_cell(q, theta, idx as u64, waveform, settings)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StabilityDiagram {
        q_grid: q_grid.to_vec(),
        temp_grid: temp_grid.to_vec(),
        cells,
        samples_per_cell: settings.samples_per_cell,
        seed: settings.seed,
        tau_max: settings.tau_max,
    })
}

fn diagram_cell(
    q: f64,
    theta: f64,
    stream: u64,
    waveform: &Waveform,
    settings: &DiagramSettings,
) -> Result<DiagramCell> {
    let velocities: Vec<f64> = if settings.samples_per_cell == 1 || theta == 0.0 {
        vec![(2.0 * theta).sqrt(); settings.samples_per_cell]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(stream);
        let normal = Normal::new(0.0, (2.0 * theta).sqrt())
            .map_err(|e| Error::invalid("theta", e.to_string()))?;
        (0..settings.samples_per_cell)
            .map(|_| normal.sample(&mut rng).abs())
            .collect()
    };
    let mut stable = 0usize;
    let mut excursions = Vec::with_capacity(velocities.len());
    for v in velocities {
        let init = ClassicalState {
            x_tilde: 0.0,
            v_tilde: v,
            tau: 0.0,
        };
        let verdict = excursion(q, init, waveform, settings.tau_max, settings.criterion)?;
        stable += verdict.stable as usize;
        excursions.push(verdict.max_excursion);
    }
    excursions.sort_by(f64::total_cmp);
    let n = excursions.len();
    let median = if n % 2 == 1 {
        excursions[n / 2]
    } else {
        0.5 * (excursions[n / 2 - 1] + excursions[n / 2])
    };
    Ok(DiagramCell {
        q,
        theta,
        fraction_stable: stable as f64 / n as f64,
        max_excursion_median: median,
    })
}

/// Fraction of a Maxwell–Boltzmann ensemble slower than the equipartition
/// velocity `√(k_BT/m)`: erf(1/√2) for any θ > 0, and 1 at θ = 0.
pub fn trapped_fraction(theta: f64) -> f64 {
    if theta == 0.0 {
        1.0
    } else {
        statrs::function::erf::erf(FRAC_1_SQRT_2)
    }
}

/// Monte-Carlo estimate of [`trapped_fraction`] from `draws` half-normal velocities.
pub fn trapped_fraction_monte_carlo(theta: f64, draws: usize, seed: u64) -> f64 {
    if theta == 0.0 || draws == 0 {
        return 1.0;
    }
    let sigma = (2.0 * theta).sqrt();
    let normal = Normal::new(0.0, sigma).expect("positive width");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hits = (0..draws)
        .filter(|_| normal.sample(&mut rng).abs() <= sigma)
        .count();
    hits as f64 / draws as f64
}

/// Lowest-order trajectory `A cos(βτ)[1 ± (q/2) cos 2τ]`, with `+` in the
/// standard convention and `−` in the physical one. `amplitude` is the secular
/// amplitude `2AC₀`.
pub fn secular_approximation(q: f64, amplitude: f64, tau: f64, convention: Convention) -> Result<f64> {
    if q > 0.5 {
        log::warn!("secular approximation used at q = {q}; it assumes q² ≪ 1");
    }
    let beta = floquet::characteristic_exponent(q)?;
    let sign = match convention {
        Convention::Standard => 1.0,
        Convention::Physical => -1.0,
    };
    Ok(amplitude * (beta * tau).cos() * (1.0 + sign * 0.5 * q * (2.0 * tau).cos()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_is_an_equilibrium() {
        let tr = integrate_trajectory(0.3, ClassicalState::at_rest(0.0), &Waveform::monochromatic(), 50.0, 1.0)
            .unwrap();
        assert_eq!(tr.len(), 51);
        assert!(tr.iter().all(|s| s.x_tilde == 0.0 && s.v_tilde == 0.0));
    }

    #[test]
    fn spot_classifications() {
        let w = Waveform::monochromatic();
        let c = Criterion::HalfLattice;
        assert!(classify_stability(0.2, 0.005, &w, DEFAULT_TAU_MAX, c).unwrap().stable);
        let hot = classify_stability(0.2, 0.10, &w, DEFAULT_TAU_MAX, c).unwrap();
        assert!(!hot.stable);
        assert!(hot.escape_tau.is_some());
        assert!(classify_stability(7.57, 0.05, &w, DEFAULT_TAU_MAX, c).unwrap().stable);
        assert!(!classify_stability(7.55, 0.10, &w, DEFAULT_TAU_MAX, c).unwrap().stable);
    }

    #[test]
    fn longer_cutoff_is_more_permissive() {
        let w = Waveform::monochromatic();
        let a = classify_stability(0.2, 0.10, &w, 200.0, Criterion::HalfLattice).unwrap();
        let b = classify_stability(0.2, 0.10, &w, 200.0, Criterion::mean_free_path(1e9, 180.0)).unwrap();
        assert!(!a.stable);
        assert!(b.max_excursion >= a.max_excursion);
    }

    #[test]
    fn threshold_tie_counts_as_unstable() {
        let w = Waveform::monochromatic();
        let v = excursion(0.3, ClassicalState::at_rest(PI), &w, 1.0, Criterion::HalfLattice).unwrap();
        assert!(!v.stable);
    }

    #[test]
    fn trapped_fraction_values() {
        assert!((trapped_fraction(0.02) - 0.682_689_5).abs() < 1e-6);
        assert_eq!(trapped_fraction(0.0), 1.0);
    }

    #[test]
    fn secular_form_at_origin() {
        let q = 0.3;
        let x = secular_approximation(q, 2.0, 0.0, Convention::Physical).unwrap();
        assert!((x - 2.0 * (1.0 - q / 2.0)).abs() < 1e-15);
    }

    #[test]
    fn diagram_is_reproducible_and_rejects_empty_grids() {
        let w = Waveform::monochromatic();
        let s = DiagramSettings {
            tau_max: 40.0 * PI,
            samples_per_cell: 4,
            seed: 7,
            criterion: Criterion::HalfLattice,
        };
        let a = stability_diagram(&[0.3, 0.5], &[0.0, 0.01], &w, &s).unwrap();
        let b = stability_diagram(&[0.3, 0.5], &[0.0, 0.01], &w, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cell(1, 0).fraction_stable, 1.0);
        assert!(stability_diagram(&[], &[0.0], &w, &s).is_err());
        assert!(stability_diagram(&[0.2, 0.1], &[0.0], &w, &s).is_err());
    }
}
