//! Floquet analysis of the linearized equation of motion
//! `x'' + [a + 2q Σ wᵢ cos(2mᵢτ)] x = 0`.
//!
//! Stability follows from the monodromy matrix over one period. For the
//! monochromatic, dc-free drive the characteristic exponent β and the Floquet
//! coefficients c₂ₙ come from the three-term recursion
//! `[(β+2n)² − a] c₂ₙ = q (c₂ₙ₊₂ + c₂ₙ₋₂)`.

mod hill;
mod mode;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{FnSystem, Integrator, Tolerances};
use crate::scales::Waveform;

pub use hill::{characteristic_exponent, continued_fraction_residual, hill_determinant};
pub use mode::{evaluate_mode, floquet_coefficients, Convention, FloquetMode};

/// Upper edge of the first stability region at `a = 0`.
pub const FIRST_REGION_EDGE: f64 = 0.908_046_333_734_577_5;

/// Tolerances for monodromy integration.
pub const MONODROMY_TOL: Tolerances = Tolerances::new(1e-13, 1e-15);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyResult {
    /// Columns are the solutions started from (1, 0) and (0, 1).
    pub matrix: [[f64; 2]; 2],
    pub trace: f64,
    pub stable: bool,
    pub q: f64,
    pub waveform: Waveform,
}

impl MonodromyResult {
    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Principal characteristic exponent in [0, 1] from `trace = 2 cos(πβ)`.
    /// Only meaningful when stable.
    pub fn beta_from_trace(&self) -> f64 {
        (self.trace / 2.0).clamp(-1.0, 1.0).acos() / std::f64::consts::PI
    }
}

/// Fundamental matrix after one drive period.
pub fn monodromy(q: f64, waveform: &Waveform) -> Result<MonodromyResult> {
    monodromy_with(q, waveform, MONODROMY_TOL)
}

pub fn monodromy_with(q: f64, waveform: &Waveform, tol: Tolerances) -> Result<MonodromyResult> {
    if !q.is_finite() {
        return Err(Error::invalid("q", "must be finite"));
    }
    waveform.validate()?;
    let a = waveform.dc_a;
    let sys = FnSystem::new(4, |tau, y: &[f64], d: &mut [f64]| {
        let k = a + 2.0 * q * waveform.profile(tau);
        d[0] = y[1];
        d[1] = -k * y[0];
        d[2] = y[3];
        d[3] = -k * y[2];
    });
    let mut y = [1.0, 0.0, 0.0, 1.0];
    Integrator::new(tol).integrate(&sys, 0.0, &mut y, waveform.period())?;
    let matrix = [[y[0], y[2]], [y[1], y[3]]];
    let trace = y[0] + y[3];
    Ok(MonodromyResult {
        matrix,
        trace,
        stable: trace.abs() <= 2.0,
        q,
        waveform: waveform.clone(),
    })
}

/// Stable windows of `q` inside `search`, found by scanning at `resolution`
/// and bisecting each edge of `|trace| − 2` down to `q_tol`.
pub fn stability_boundaries(
    search: (f64, f64),
    waveform: &Waveform,
    resolution: f64,
) -> Result<Vec<(f64, f64)>> {
    stability_boundaries_with(search, waveform, resolution, 1e-10)
}

pub fn stability_boundaries_with(
    search: (f64, f64),
    waveform: &Waveform,
    resolution: f64,
    q_tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = search;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::invalid("search", "need a finite interval with lo <= hi"));
    }
    if !(resolution > 0.0) {
        return Err(Error::invalid("resolution", "must be positive"));
    }
    let stable = |q: f64| -> Result<bool> { Ok(monodromy(q, waveform)?.stable) };
    if lo == hi {
        return Ok(if stable(lo)? { vec![(lo, hi)] } else { vec![] });
    }

    let steps = ((hi - lo) / resolution).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| (lo + (hi - lo) * i as f64 / steps as f64).min(hi))
        .collect();
    let flags = grid
        .iter()
        .map(|&q| stable(q))
        .collect::<Result<Vec<bool>>>()?;

    let refine = |mut s: f64, mut u: f64| -> Result<f64> {
        // s is stable, u is not
        while (u - s).abs() > q_tol {
            let mid = 0.5 * (s + u);
            if stable(mid)? {
                s = mid;
            } else {
                u = mid;
            }
        }
        Ok(0.5 * (s + u))
    };

    let mut windows = Vec::new();
    let mut start: Option<f64> = flags[0].then_some(lo);
    for i in 1..grid.len() {
        match (flags[i - 1], flags[i]) {
            (false, true) => start = Some(refine(grid[i], grid[i - 1])?),
            (true, false) => {
                let end = refine(grid[i - 1], grid[i])?;
                windows.push((start.take().unwrap_or(lo), end));
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        windows.push((s, hi));
    }
    Ok(windows)
}
