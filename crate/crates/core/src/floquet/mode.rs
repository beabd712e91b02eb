use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::hill::characteristic_exponent;
use crate::error::{Error, Result};

/// Sign convention of the drive term.
///
/// `Standard` is `x'' + 2q cos(2τ) x = 0`. `Physical` is the same equation with
/// `q → −q`, i.e. the spring constant `W(t) = −(ω²/2) q cos(ωt)`; its
/// coefficients are `(−1)ⁿ c₂ₙ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[default]
    Standard,
    Physical,
}

impl Convention {
    fn sign(self, n: i64) -> f64 {
        match self {
            Convention::Physical if n % 2 != 0 => -1.0,
            _ => 1.0,
        }
    }
}

/// A Floquet solution `u(t) = Σ c₂ₙ e^{i(ω₀ + nω)t}` of the Mathieu equation.
///
/// Coefficients are stored in the standard convention, normalized by the sum
/// rule `Σ c₂ₙ² (ω₀+nω)/ω₀ = 1` with `c₀ > 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloquetMode {
    pub q: f64,
    pub beta_exp: f64,
    /// `coeffs[i]` is c₂ₙ with `n = i − n_trunc`.
    pub coeffs: Vec<f64>,
    pub n_trunc: usize,
    /// Drive angular frequency. Defaults to 2 so that time is τ.
    pub omega: f64,
    pub omega0: f64,
    pub convention: Convention,
}

impl FloquetMode {
    /// The same mode with time measured for drive angular frequency `omega`.
    pub fn at_drive(mut self, omega: f64) -> Self {
        self.omega = omega;
        self.omega0 = 0.5 * self.beta_exp * omega;
        self
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    /// c₂ₙ in the mode's convention (zero outside the truncation).
    pub fn c(&self, n: i64) -> f64 {
        let i = n + self.n_trunc as i64;
        if i < 0 || i as usize >= self.coeffs.len() {
            return 0.0;
        }
        self.convention.sign(n) * self.coeffs[i as usize]
    }

    /// Iterator over `(n, c₂ₙ)` in the mode's convention.
    pub fn terms(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n0 = self.n_trunc as i64;
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| {
                let n = i as i64 - n0;
                (n, self.convention.sign(n) * c)
            })
    }

    /// Frequency `ω₀ + nω` of harmonic n.
    pub fn harmonic_frequency(&self, n: i64) -> f64 {
        self.omega0 + n as f64 * self.omega
    }

    /// Σ c₂ₙ² (β+2n)/β; 1 after normalization.
    pub fn sum_rule(&self) -> f64 {
        if self.beta_exp == 0.0 {
            return self.coeffs.iter().map(|c| c * c).sum();
        }
        self.terms()
            .map(|(n, c)| c * c * (self.beta_exp + 2.0 * n as f64) / self.beta_exp)
            .sum()
    }

    /// Largest `|q(c₂ₙ₊₂ + c₂ₙ₋₂) − (β+2n)² c₂ₙ|` over interior n, relative to max|c|.
    pub fn recursion_residual(&self) -> f64 {
        let n0 = self.n_trunc as i64;
        let q = match self.convention {
            Convention::Standard => self.q,
            Convention::Physical => -self.q,
        };
        let cmax = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let mut worst = 0.0f64;
        for n in (-n0 + 1)..n0 {
            let lhs = q * (self.c(n + 1) + self.c(n - 1));
            let rhs = (self.beta_exp + 2.0 * n as f64).powi(2) * self.c(n);
            worst = worst.max((lhs - rhs).abs());
        }
        worst / cmax
    }

    /// Index n of the largest |c₂ₙ|.
    pub fn dominant_harmonic(&self) -> i64 {
        self.terms()
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            .map(|(n, _)| n)
            .unwrap_or(0)
    }

    /// `u(0)` and `u̇(0)`. With the sum-rule normalization these are not
    /// exactly `1` and `iω₀` once q > 0; the Wronskian `2iω₀` is what the
    /// normalization fixes.
    pub fn boundary_values(&self) -> (Complex64, Complex64) {
        evaluate_mode(self, 0.0)
    }
}

/// u(t) and u̇(t).
pub fn evaluate_mode(mode: &FloquetMode, t: f64) -> (Complex64, Complex64) {
    let mut u = Complex64::new(0.0, 0.0);
    let mut du = Complex64::new(0.0, 0.0);
    for (n, c) in mode.terms() {
        if c == 0.0 {
            continue;
        }
        let nu = mode.harmonic_frequency(n);
        let e = Complex64::from_polar(c, nu * t);
        u += e;
        du += Complex64::new(0.0, nu) * e;
    }
    (u, du)
}

/// Relative size of the edge coefficients below which the truncation is
/// extended no further.
const EDGE_TARGET: f64 = 1e-17;
/// Minimum decay demanded at the truncation edge.
const EDGE_REQUIRED: f64 = 1e-3;
const MAX_TRUNC: usize = 64;

/// Floquet coefficients of the dc-free monochromatic drive at `q`, starting
/// from `n_trunc` harmonics on each side and extending up to 64 until the
/// edge coefficients have decayed.
pub fn floquet_coefficients(q: f64, n_trunc: usize) -> Result<FloquetMode> {
    if n_trunc < 4 {
        return Err(Error::invalid("n_trunc", "must be at least 4"));
    }
    let beta = characteristic_exponent(q)?;
    let q = q.abs();
    let mut n = n_trunc.min(MAX_TRUNC);
    loop {
        let coeffs = minimal_solution(q, beta, n)?;
        let cmax = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let edge = coeffs[0].abs().max(coeffs[2 * n].abs()) / cmax;
        if edge <= EDGE_TARGET || n == MAX_TRUNC {
            if edge > EDGE_REQUIRED {
                return Err(Error::NoConvergence {
                    what: "Floquet coefficients",
                    detail: format!("edge ratio {edge:e} at N = {n}"),
                });
            }
            let mode = FloquetMode {
                q,
                beta_exp: beta,
                coeffs,
                n_trunc: n,
                omega: 2.0,
                omega0: beta,
                convention: Convention::Standard,
            };
            return Ok(normalize(mode));
        }
        n = (2 * n).min(MAX_TRUNC);
    }
}

/// Decaying solution of the recursion from backward ratios, matched at n = 0.
fn minimal_solution(q: f64, beta: f64, n: usize) -> Result<Vec<f64>> {
    let mut c = vec![0.0; 2 * n + 1];
    c[n] = 1.0;
    if q == 0.0 {
        return Ok(c);
    }
    let d = |k: i64| (beta + 2.0 * k as f64).powi(2);
    // v[k-1] = c_k / c_{k-1}
    let mut v = vec![0.0; n];
    let mut next = 0.0;
    for k in (1..=n as i64).rev() {
        next = q / (d(k) - q * next);
        v[k as usize - 1] = next;
    }
    let mut w = vec![0.0; n];
    next = 0.0;
    for k in (1..=n as i64).rev() {
        next = q / (d(-k) - q * next);
        w[k as usize - 1] = next;
    }
    for k in 1..=n {
        c[n + k] = c[n + k - 1] * v[k - 1];
        c[n - k] = c[n - k + 1] * w[k - 1];
    }
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence {
            what: "Floquet coefficients",
            detail: "continued fraction hit a pole".into(),
        });
    }
    Ok(c)
}

fn normalize(mut mode: FloquetMode) -> FloquetMode {
    let mut s = mode.sum_rule();
    if s < 0.0 {
        // The positive-norm solution is the conjugate one; relabel it on the
        // branch β → 2 − β so that ω₀ stays positive.
        let n2 = 2 * mode.n_trunc;
        let old = std::mem::take(&mut mode.coeffs);
        mode.coeffs = (0..=n2)
            .map(|i| if i < n2 { old[n2 - 1 - i] } else { 0.0 })
            .collect();
        mode.beta_exp = 2.0 - mode.beta_exp;
        mode.omega0 = 0.5 * mode.beta_exp * mode.omega;
        s = mode.sum_rule();
    }
    let sign = if mode.coeffs[mode.n_trunc] < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / s.sqrt();
    for c in &mut mode.coeffs {
        *c *= scale;
    }
    mode
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_drive_single_coefficient() {
        let m = floquet_coefficients(0.0, 8).unwrap();
        assert_eq!(m.c(0), 1.0);
        assert!(m.terms().filter(|&(n, _)| n != 0).all(|(_, c)| c == 0.0));
        let (u, du) = evaluate_mode(&m, 3.7);
        assert_eq!((u.re, u.im, du.re, du.im), (1.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn leading_order_ratio() {
        // individually the ratios are q/(2 ± β)², about 13% either side of q/4
        let m = floquet_coefficients(0.2, 8).unwrap();
        let up = m.c(1) / m.c(0);
        let down = m.c(-1) / m.c(0);
        assert!((0.5 * (up + down) / 0.05 - 1.0).abs() < 0.05);
        let b = m.beta_exp;
        assert!((up / (0.2 / (2.0 + b).powi(2)) - 1.0).abs() < 0.02, "{up}");
        assert!((down / (0.2 / (2.0 - b).powi(2)) - 1.0).abs() < 0.02, "{down}");
    }

    #[test]
    fn physical_convention_flips_odd_harmonics() {
        let m = floquet_coefficients(0.3, 8).unwrap();
        let p = m.clone().with_convention(Convention::Physical);
        assert_eq!(p.c(1), -m.c(1));
        assert_eq!(p.c(2), m.c(2));
        assert!(p.recursion_residual() < 1e-12);
    }

    #[test]
    fn invariants_hold() {
        for q in [0.05, 0.47, 0.85] {
            let m = floquet_coefficients(q, 4).unwrap().at_drive(1.7);
            assert!((m.sum_rule() - 1.0).abs() < 1e-10);
            assert!(m.recursion_residual() < 1e-12, "q={q}: {}", m.recursion_residual());
            for t in [0.0, 0.3, 11.0] {
                let (u, du) = evaluate_mode(&m, t);
                let w = u.conj() * du - u * du.conj();
                assert!(w.re.abs() < 1e-10 * m.omega0);
                assert!((w.im / (2.0 * m.omega0) - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn exotic_region_mode() {
        let m = floquet_coefficients(7.55, 8).unwrap();
        assert!(m.omega0 > 0.0);
        assert!((m.sum_rule() - 1.0).abs() < 1e-10);
        assert!(m.recursion_residual() < 1e-12);
    }
}
