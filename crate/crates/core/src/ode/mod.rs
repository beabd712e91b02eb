//! Adaptive explicit Runge–Kutta integration.
//!
//! The stepper is the 8th-order Dormand–Prince pair with the combined
//! 5th/3rd-order error estimator. Steps are clamped so that every requested
//! grid time is hit exactly, which gives exact samples without interpolation.

mod tableau;

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)`.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]);
}

/// Adapts a closure into an [`OdeSystem`].
pub struct FnSystem<F> {
    dim: usize,
    f: F,
}

impl<F> FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> OdeSystem for FnSystem<F>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn rhs(&self, t: f64, y: &[f64], dydt: &mut [f64]) {
        (self.f)(t, y, dydt)
    }
}

/// Relative and absolute local error tolerances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerances {
    pub const fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::new(1e-10, 1e-12)
    }
}

/// One accepted step, as seen by an observer.
#[derive(Debug)]
pub struct Step<'a> {
    pub t: f64,
    pub y: &'a [f64],
    /// Whether `t` is one of the requested grid times.
    pub on_grid: bool,
}

/// Counters from a completed integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// The observer asked to stop before `t_end`.
    pub stopped_early: bool,
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

#[derive(Clone, Debug)]
pub struct Integrator {
    pub tol: Tolerances,
    pub max_steps: usize,
    pub max_step: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(Tolerances::default())
    }
}

impl Integrator {
    pub fn new(tol: Tolerances) -> Self {
        Self {
            tol,
            max_steps: 50_000_000,
            max_step: f64::INFINITY,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = h;
        self
    }

    /// Integrates from `t0` to `t_end`, updating `y` in place.
    pub fn integrate<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t0: f64,
        y: &mut [f64],
        t_end: f64,
    ) -> Result<Stats> {
        self.run(sys, t0, y, t_end, &[], |_| ControlFlow::Continue(()))
    }

    /// Returns the state at each of the (ascending) `times`, starting from `y0` at `t0`.
    pub fn solve_at<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64],
        times: &[f64],
    ) -> Result<Vec<Vec<f64>>> {
        let mut y = y0.to_vec();
        let mut out = Vec::with_capacity(times.len());
        let Some(&t_end) = times.last() else {
            return Ok(out);
        };
        // samples at t0 itself are not produced by stepping
        let mut grid = times;
        while let Some((&first, rest)) = grid.split_first() {
            if first > t0 {
                break;
            }
            out.push(y0.to_vec());
            grid = rest;
        }
        self.run(sys, t0, &mut y, t_end, grid, |step| {
            if step.on_grid {
                out.push(step.y.to_vec());
            }
            ControlFlow::Continue(())
        })?;
        Ok(out)
    }

    /// Integrates with an observer called on every accepted step.
    ///
    /// Grid times must be ascending and lie in `(t0, t_end]`; each is hit
    /// exactly. The observer may return `Break` to stop early.
    pub fn run<S, O>(
        &self,
        sys: &S,
        t0: f64,
        y: &mut [f64],
        t_end: f64,
        grid: &[f64],
        mut observer: O,
    ) -> Result<Stats>
    where
        S: OdeSystem + ?Sized,
        O: FnMut(Step<'_>) -> ControlFlow<()>,
    {
        let n = sys.dim();
        assert_eq!(y.len(), n, "state length does not match system dimension");
        let mut stats = Stats::default();
        if t_end <= t0 {
            return Ok(stats);
        }

        let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 13];
        let mut y_new = vec![0.0; n];
        let mut y_stage = vec![0.0; n];
        let mut scale = vec![0.0; n];

        sys.rhs(t0, y, &mut k[0]);
        stats.evaluations += 1;
        let mut h = self.initial_step(sys, t0, y, &k[0], &mut stats);
        let mut t = t0;
        let mut next_grid = 0usize;
        let mut last_err = 0.0f64;

        while t < t_end {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::TooManySteps {
                    t,
                    max_steps: self.max_steps,
                });
            }
            while next_grid < grid.len() && grid[next_grid] <= t {
                next_grid += 1;
            }
            let target = if next_grid < grid.len() {
                grid[next_grid].min(t_end)
            } else {
                t_end
            };
            let min_step = 10.0 * (next_up(t) - t);
            h = h.min(self.max_step);
            let natural = h;
            let mut clamped = false;
            if t + h >= target {
                h = target - t;
                clamped = true;
            }
            if h < min_step && !clamped {
                return Err(Error::StepUnderflow {
                    t,
                    h,
                    achieved: last_err * self.tol.rtol,
                });
            }

            // stages
            for s in 1..12 {
                let row = &tableau::A[s];
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, a) in row.iter().enumerate().take(s) {
                        if *a != 0.0 {
                            acc += a * k[j][i];
                        }
                    }
                    y_stage[i] = y[i] + h * acc;
                }
                sys.rhs(t + tableau::C[s] * h, &y_stage, &mut k[s]);
            }
            for i in 0..n {
                let mut acc = 0.0;
                for (j, b) in tableau::B.iter().enumerate() {
                    acc += b * k[j][i];
                }
                y_new[i] = y[i] + h * acc;
            }
            let t_new = if clamped { target } else { t + h };
            sys.rhs(t_new, &y_new, &mut k[12]);
            stats.evaluations += 12;

            for i in 0..n {
                scale[i] = self.tol.atol + self.tol.rtol * y[i].abs().max(y_new[i].abs());
            }
            let err = error_norm(&k, &scale, h);
            if !err.is_finite() {
                if y_new.iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite { t });
                }
                // shrink and retry
                stats.rejected += 1;
                h *= MIN_FACTOR;
                continue;
            }

            if err <= 1.0 {
                stats.accepted += 1;
                last_err = err;
                t = t_new;
                y.copy_from_slice(&y_new);
                k.swap(0, 12);
                let on_grid = next_grid < grid.len() && t == grid[next_grid];
                if on_grid {
                    next_grid += 1;
                }
                let factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, MAX_FACTOR)
                };
                h = if clamped && factor >= 1.0 {
                    natural
                } else {
                    h * factor
                };
                if observer(Step { t, y, on_grid }).is_break() {
                    stats.stopped_early = true;
                    return Ok(stats);
                }
            } else {
                stats.rejected += 1;
                last_err = err;
                h *= (SAFETY * err.powf(-1.0 / 8.0)).clamp(MIN_FACTOR, 1.0);
            }
        }
        Ok(stats)
    }

    fn initial_step<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t0: f64,
        y0: &[f64],
        f0: &[f64],
        stats: &mut Stats,
    ) -> f64 {
        let n = y0.len();
        let scale: Vec<f64> = y0
            .iter()
            .map(|v| self.tol.atol + v.abs() * self.tol.rtol)
            .collect();
        let rms = |v: &[f64]| -> f64 {
            (v.iter().zip(&scale).map(|(a, s)| (a / s).powi(2)).sum::<f64>() / n as f64).sqrt()
        };
        let d0 = rms(y0);
        let d1 = rms(f0);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
        let mut f1 = vec![0.0; n];
        sys.rhs(t0 + h0, &y1, &mut f1);
        stats.evaluations += 1;
        let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = rms(&diff) / h0;
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / 8.0)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }
}

fn error_norm(k: &[Vec<f64>], scale: &[f64], h: f64) -> f64 {
    let n = scale.len();
    let mut e5 = 0.0;
    let mut e3 = 0.0;
    for i in 0..n {
        let mut a5 = 0.0;
        let mut a3 = 0.0;
        for j in 0..13 {
            a5 += tableau::E5[j] * k[j][i];
            a3 += tableau::E3[j] * k[j][i];
        }
        e5 += (a5 / scale[i]).powi(2);
        e3 += (a3 / scale[i]).powi(2);
    }
    if e5 == 0.0 && e3 == 0.0 {
        return 0.0;
    }
    let denom = e5 + 0.01 * e3;
    h.abs() * e5 / (denom * n as f64).sqrt()
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    if x == 0.0 {
        return f64::from_bits(1);
    }
    let bits = x.to_bits();
    if x > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let sys = FnSystem::new(2, |_t, y: &[f64], d: &mut [f64]| {
            d[0] = y[1];
            d[1] = -y[0];
        });
        let mut y = [1.0, 0.0];
        let integ = Integrator::new(Tolerances::new(1e-12, 1e-14));
        integ
            .integrate(&sys, 0.0, &mut y, 2.0 * std::f64::consts::PI)
            .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-10, "{y:?}");
        assert!(y[1].abs() < 1e-10, "{y:?}");
    }

    #[test]
    fn exponential_decay_hits_grid_exactly() {
        let sys = FnSystem::new(1, |_t, y: &[f64], d: &mut [f64]| d[0] = -y[0]);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.5).collect();
        let out = Integrator::default()
            .solve_at(&sys, 0.0, &[1.0], &times)
            .unwrap();
        assert_eq!(out.len(), times.len());
        for (t, y) in times.iter().zip(&out) {
            assert!((y[0] - (-t).exp()).abs() < 1e-10 * (1.0 + y[0]), "t={t}");
        }
    }

    #[test]
    fn observer_can_stop_early() {
        let sys = FnSystem::new(1, |_t, _y: &[f64], d: &mut [f64]| d[0] = 1.0);
        let mut y = [0.0];
        let stats = Integrator::default()
            .with_max_step(0.1)
            .run(&sys, 0.0, &mut y, 10.0, &[], |s| {
                if s.y[0] > 1.0 {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })
            .unwrap();
        assert!(stats.stopped_early);
        assert!(y[0] > 1.0 && y[0] < 1.2);
    }

    #[test]
    fn blow_up_reports_error() {
        let sys = FnSystem::new(1, |_t, y: &[f64], d: &mut [f64]| d[0] = y[0] * y[0]);
        let mut y = [1.0];
        let err = Integrator::default().integrate(&sys, 0.0, &mut y, 2.0);
        assert!(err.is_err());
    }
}
