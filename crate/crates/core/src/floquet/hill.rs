use crate::error::{Error, Result};

/// Truncation used for the Hill determinant at stability parameter `q`.
fn hill_size(q: f64) -> usize {
    30 + 2 * q.abs().sqrt().ceil() as usize
}

/// Row-scaled Hill determinant of the a = 0 recursion, as a function of the
/// trial exponent β. Row n is divided by 4n²+1, which leaves the zeros
/// (β = ±β₀ + 2k) untouched and makes the infinite determinant converge.
pub fn hill_determinant(q: f64, beta: f64) -> f64 {
    let n = hill_size(q) as i64;
    let diag = |k: i64| (beta + 2.0 * k as f64).powi(2) / (4.0 * (k * k) as f64 + 1.0);
    let off = |k: i64| q / (4.0 * (k * k) as f64 + 1.0);
    // continuant recursion with periodic rescaling to stay in range
    let mut f_prev = 1.0;
    let mut f = diag(-n);
    for k in (-n + 1)..=n {
        let next = diag(k) * f - off(k) * off(k - 1) * f_prev;
        f_prev = f;
        f = next;
        let s = f.abs().max(f_prev.abs());
        if s > 1e100 || (s < 1e-100 && s > 0.0) {
            f /= s;
            f_prev /= s;
        }
    }
    f
}

/// `β² − q (v₁ + w₋₁)` where v, w are the forward and backward coefficient
/// ratios from the continued fractions. Zero at the characteristic exponent.
pub fn continued_fraction_residual(q: f64, beta: f64) -> f64 {
    let n = hill_size(q) as i64;
    let (v1, w1) = edge_ratios(q, beta, n);
    beta * beta - q * (v1 + w1)
}

fn edge_ratios(q: f64, beta: f64, n: i64) -> (f64, f64) {
    let mut v = 0.0;
    for k in (1..=n).rev() {
        v = q / ((beta + 2.0 * k as f64).powi(2) - q * v);
    }
    let mut w = 0.0;
    for k in (1..=n).rev() {
        w = q / ((beta - 2.0 * k as f64).powi(2) - q * w);
    }
    (v, w)
}

/// Characteristic exponent β ∈ [0, 1] of the dc-free monochromatic drive.
///
/// The root is bracketed by the Hill determinant, which has exactly one simple
/// zero in (0, 1) whenever the motion is stable, and then polished on the
/// continued-fraction relation.
pub fn characteristic_exponent(q: f64) -> Result<f64> {
    if !q.is_finite() {
        return Err(Error::invalid("q", "must be finite"));
    }
    let q = q.abs();
    if q == 0.0 {
        return Ok(0.0);
    }
    let d0 = hill_determinant(q, 0.0);
    let d1 = hill_determinant(q, 1.0);
    if d0 == 0.0 {
        return Ok(0.0);
    }
    if d1 == 0.0 {
        return Ok(1.0);
    }
    if d0.signum() == d1.signum() {
        return Err(Error::UnstableDrive { q });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let s_lo = d0.signum();
    while hi - lo > 4.0 * f64::EPSILON {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hill_determinant(q, mid).signum() == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut beta = 0.5 * (lo + hi);

    // a couple of secant steps on the continued fraction, kept only if they
    // reduce the residual and stay inside the bracket
    let mut r = continued_fraction_residual(q, beta);
    let h = 1e-7_f64.min(0.25 * beta.min(1.0 - beta)).max(1e-12);
    for _ in 0..3 {
        if r == 0.0 || !r.is_finite() {
            break;
        }
        let slope = (continued_fraction_residual(q, beta + h)
            - continued_fraction_residual(q, beta - h))
            / (2.0 * h);
        if !slope.is_finite() || slope == 0.0 {
            break;
        }
        let cand = beta - r / slope;
        if !(cand > 0.0 && cand < 1.0) || (cand - beta).abs() > 1e-6 {
            break;
        }
        let rc = continued_fraction_residual(q, cand);
        if rc.abs() < r.abs() {
            beta = cand;
            r = rc;
        } else {
            break;
        }
    }
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_drive() {
        assert_eq!(characteristic_exponent(0.0).unwrap(), 0.0);
    }

    #[test]
    fn small_q_limit() {
        let q = 1e-3;
        let b = characteristic_exponent(q).unwrap();
        assert!((b / (q / 2f64.sqrt()) - 1.0).abs() < 1e-5, "{b}");
    }

    #[test]
    fn fig_three_drive() {
        let b = characteristic_exponent(0.47).unwrap();
        assert!((b / 2.0 - 0.17).abs() < 0.01);
        // independent value from a high-accuracy monodromy run
        assert!((b - 0.348_770).abs() < 2e-6, "{b}");
    }

    #[test]
    fn unstable_point_rejected() {
        assert!(matches!(
            characteristic_exponent(1.0),
            Err(Error::UnstableDrive { .. })
        ));
    }

    #[test]
    fn residual_vanishes_at_root() {
        for q in [0.05, 0.3, 0.8, 7.55] {
            let b = characteristic_exponent(q).unwrap();
            let r = continued_fraction_residual(q, b);
            assert!(r.abs() < 1e-12 * (1.0 + q), "q={q}: residual {r}");
        }
    }
}
