//! Brute-force check of the moment equations: the density matrix integrated
//! in a truncated number basis of the reference oscillator.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::moments::{MomentOde, MomentSample, MomentState, MomentTrajectory};
use crate::error::{Error, Result};
use crate::ode::{Integrator, OdeSystem, Tolerances};

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FockOptions {
    pub n_max: usize,
    /// Largest relative change of any moment allowed when `n_max` is doubled.
    pub convergence: f64,
    /// Largest population allowed beyond `n_max` in the initial state.
    pub tail: f64,
    pub tol: Tolerances,
}

impl Default for FockOptions {
    fn default() -> Self {
        Self {
            n_max: 40,
            convergence: 1e-6,
            tail: 1e-8,
            tol: Tolerances::new(1e-10, 1e-13),
        }
    }
}

/// A banded matrix: `diags[k]` holds the entries `(i, i + offsets[k])`.
#[derive(Clone, Debug)]
struct Banded {
    dim: usize,
    offsets: Vec<isize>,
    diags: Vec<Vec<C>>,
}

impl Banded {
    fn zero(dim: usize) -> Self {
        Self {
            dim,
            offsets: Vec::new(),
            diags: Vec::new(),
        }
    }

    #[cfg(test)]
    fn get(&self, i: usize, off: isize) -> C {
        self.offsets
            .iter()
            .position(|&o| o == off)
            .map(|k| self.diags[k][i])
            .unwrap_or_default()
    }

    fn add_entry(&mut self, i: usize, off: isize, v: C) {
        let k = match self.offsets.iter().position(|&o| o == off) {
            Some(k) => k,
            None => {
                self.offsets.push(off);
                self.diags.push(vec![C::default(); self.dim]);
                self.offsets.len() - 1
            }
        };
        self.diags[k][i] += v;
    }

    fn lowering(dim: usize) -> Self {
        let mut b = Self::zero(dim);
        for i in 0..dim - 1 {
            b.add_entry(i, 1, C::new(((i + 1) as f64).sqrt(), 0.0));
        }
        b
    }

    fn adjoint(&self) -> Self {
        let mut b = Self::zero(self.dim);
        for (k, &off) in self.offsets.iter().enumerate() {
            for i in 0..self.dim {
                let j = i as isize + off;
                if j >= 0 && (j as usize) < self.dim {
                    b.add_entry(j as usize, -off, self.diags[k][i].conj());
                }
            }
        }
        b
    }

    fn scaled(&self, s: C) -> Self {
        let mut b = self.clone();
        for d in &mut b.diags {
            for v in d.iter_mut() {
                *v *= s;
            }
        }
        b
    }

    fn plus(&self, other: &Self) -> Self {
        let mut b = self.clone();
        for (k, &off) in other.offsets.iter().enumerate() {
            for i in 0..self.dim {
                let v = other.diags[k][i];
                if v != C::default() {
                    b.add_entry(i, off, v);
                }
            }
        }
        b
    }

    fn times(&self, other: &Self) -> Self {
        let mut b = Self::zero(self.dim);
        for (ka, &oa) in self.offsets.iter().enumerate() {
            for (kb, &ob) in other.offsets.iter().enumerate() {
                for i in 0..self.dim {
                    let j = i as isize + oa;
                    if j < 0 || j as usize >= self.dim {
                        continue;
                    }
                    let l = j + ob;
                    if l < 0 || l as usize >= self.dim {
                        continue;
                    }
                    let v = self.diags[ka][i] * other.diags[kb][j as usize];
                    if v != C::default() {
                        b.add_entry(i, oa + ob, v);
                    }
                }
            }
        }
        b
    }

    /// `out += self · rho`, with rho stored row-major.
    fn apply_left(&self, rho: &[C], out: &mut [C]) {
        let n = self.dim;
        for (k, &off) in self.offsets.iter().enumerate() {
            let d = &self.diags[k];
            for i in 0..n {
                let r = i as isize + off;
                if r < 0 || r as usize >= n || d[i] == C::default() {
                    continue;
                }
                let v = d[i];
                let src = &rho[r as usize * n..(r as usize + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += v * s;
                }
            }
        }
    }

    /// `out += w · self · rho · self†`.
    fn sandwich(&self, rho: &[C], w: f64, tmp: &mut [C], out: &mut [C]) {
        let n = self.dim;
        tmp.iter_mut().for_each(|v| *v = C::default());
        self.apply_left(rho, tmp);
        // (tmp · L†)_{ij} = Σ_k tmp_{i, j+off} conj(L_{j, j+off})
        for (k, &off) in self.offsets.iter().enumerate() {
            let d = &self.diags[k];
            for j in 0..n {
                let c = j as isize + off;
                if c < 0 || c as usize >= n || d[j] == C::default() {
                    continue;
                }
                let v = d[j].conj() * w;
                let c = c as usize;
                for i in 0..n {
                    out[i * n + j] += tmp[i * n + c] * v;
                }
            }
        }
    }

    /// Restriction to the first `dim` levels.
    fn cropped(&self, dim: usize) -> Self {
        let mut b = Self::zero(dim);
        for (k, &off) in self.offsets.iter().enumerate() {
            for i in 0..dim {
                let j = i as isize + off;
                if j >= 0 && (j as usize) < dim {
                    b.add_entry(i, off, self.diags[k][i]);
                }
            }
        }
        b
    }

    fn to_dense(&self) -> DMatrix<C> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (k, &off) in self.offsets.iter().enumerate() {
            for i in 0..self.dim {
                let j = i as isize + off;
                if j >= 0 && (j as usize) < self.dim {
                    m[(i, j as usize)] += self.diags[k][i];
                }
            }
        }
        m
    }
}

struct Operators {
    a: Banded,
    ad: Banded,
    x2: Banded,
    p2: Banded,
    ada: Banded,
    aad: Banded,
    aa: Banded,
    adad: Banded,
}

impl Operators {
    /// Products are formed with two spare levels so that the cropped
    /// operators agree with the untruncated ones on every kept element.
    fn new(dim: usize) -> Self {
        let a = Banded::lowering(dim + 2);
        let ad = a.adjoint();
        let x = a.plus(&ad);
        // P = i(a† − a)
        let p = ad.plus(&a.scaled(C::new(-1.0, 0.0))).scaled(C::i());
        Self {
            x2: x.times(&x).cropped(dim),
            p2: p.times(&p).cropped(dim),
            ada: ad.times(&a).cropped(dim),
            aad: a.times(&ad).cropped(dim),
            aa: a.times(&a).cropped(dim),
            adad: ad.times(&ad).cropped(dim),
            a: a.cropped(dim),
            ad: ad.cropped(dim),
        }
    }
}

struct FockSystem<'a> {
    ode: &'a MomentOde,
    ops: Operators,
    dim: usize,
}

impl FockSystem<'_> {
    /// `C = μ a + ν a†` with `μ = u/2 − iu̇/2ω₀`, `ν = −u/2 − iu̇/2ω₀`.
    fn shift(&self, t: f64) -> (C, C) {
        let (u, du) = self.ode.mode_values(t);
        let w0 = self.ode.omega0;
        let j = C::i() * du / (2.0 * w0);
        (u / 2.0 - j, -u / 2.0 - j)
    }

    fn generator(&self, t: f64) -> (Banded, Banded) {
        let w0 = self.ode.omega0;
        let g = self.ode.gamma;
        let n = self.ode.n_eff;
        let (mu, nu) = self.shift(t);
        let ops = &self.ops;
        let h = ops
            .p2
            .scaled(C::new(w0 / 4.0, 0.0))
            .plus(&ops.x2.scaled(C::new(self.ode.spring(t) / (4.0 * w0), 0.0)));
        let l = ops.a.scaled(mu).plus(&ops.ad.scaled(nu));
        // C†C and CC†
        let cdc = ops
            .ada
            .scaled(C::new(mu.norm_sqr(), 0.0))
            .plus(&ops.aad.scaled(C::new(nu.norm_sqr(), 0.0)))
            .plus(&ops.adad.scaled(mu.conj() * nu))
            .plus(&ops.aa.scaled(nu.conj() * mu));
        let ccd = ops
            .aad
            .scaled(C::new(mu.norm_sqr(), 0.0))
            .plus(&ops.ada.scaled(C::new(nu.norm_sqr(), 0.0)))
            .plus(&ops.aa.scaled(mu * nu.conj()))
            .plus(&ops.adad.scaled(nu * mu.conj()));
        let k = h
            .scaled(C::new(0.0, -1.0))
            .plus(&cdc.scaled(C::new(-0.5 * g * (n + 1.0), 0.0)))
            .plus(&ccd.scaled(C::new(-0.5 * g * n, 0.0)));
        let _ = self.dim;
        (k, l)
    }
}

impl OdeSystem for FockSystem<'_> {
    fn dim(&self) -> usize {
        2 * self.dim * self.dim
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.dim;
        let rho: Vec<C> = (0..n * n).map(|i| C::new(y[2 * i], y[2 * i + 1])).collect();
        let (k, l) = self.generator(t);
        let mut krho = vec![C::default(); n * n];
        k.apply_left(&rho, &mut krho);
        let mut out = vec![C::default(); n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = krho[i * n + j] + krho[j * n + i].conj();
            }
        }
        let g = self.ode.gamma;
        let nb = self.ode.n_eff;
        if g > 0.0 {
            let mut tmp = vec![C::default(); n * n];
            l.sandwich(&rho, g * (nb + 1.0), &mut tmp, &mut out);
            if nb > 0.0 {
                l.adjoint().sandwich(&rho, g * nb, &mut tmp, &mut out);
            }
        }
        for (i, v) in out.iter().enumerate() {
            dy[2 * i] = v.re;
            dy[2 * i + 1] = v.im;
        }
    }
}

fn expectation(op: &Banded, rho: &[C]) -> C {
    // Tr(op ρ) = Σ_i Σ_off op_{i,i+off} ρ_{i+off,i}
    let n = op.dim;
    let mut s = C::default();
    for (k, &off) in op.offsets.iter().enumerate() {
        for i in 0..n {
            let j = i as isize + off;
            if j >= 0 && (j as usize) < n {
                s += op.diags[k][i] * rho[j as usize * n + i];
            }
        }
    }
    s
}

/// Moments in oscillator units `(⟨X⟩, ⟨P⟩, ⟨X²⟩, ⟨P²⟩, ⟨XP+PX⟩)`.
fn moments(ops: &Operators, rho: &[C]) -> [f64; 5] {
    let a = expectation(&ops.a, rho);
    let x2 = expectation(&ops.x2, rho).re;
    let p2 = expectation(&ops.p2, rho).re;
    // XP + PX = i(a†² − a²)·2 ... written out: X P + P X = 2i(a†² − a²)
    let xp = (C::new(0.0, 2.0) * (expectation(&ops.adad, rho) - expectation(&ops.aa, rho))).re;
    [2.0 * a.re, 2.0 * a.im, x2, p2, xp]
}

/// Gaussian density matrix with the given moments (oscillator units), built as
/// `D(α) S(ζ) ρ_th S(ζ)† D(α)†` in an enlarged basis and truncated to `dim`.
fn gaussian_state(y: &[f64; 5], dim: usize, tail: f64) -> Result<Vec<C>> {
    let (mx, mp) = (y[0], y[1]);
    let vxx = y[2] - mx * mx;
    let vpp = y[3] - mp * mp;
    let vxp = 0.5 * y[4] - mx * mp;
    let det = vxx * vpp - vxp * vxp;
    if !(det >= 1.0 - 1e-9) {
        return Err(Error::invalid("state0", "violates the uncertainty relation"));
    }
    let nu = det.max(1.0).sqrt();
    let nbar = (nu - 1.0) / 2.0;
    let cosh2r = ((vxx + vpp) / (2.0 * nu)).max(1.0);
    let r = 0.5 * cosh2r.acosh();
    let theta = if r > 0.0 {
        (-vxp).atan2(0.5 * (vpp - vxx))
    } else {
        0.0
    };
    let zeta = C::from_polar(r, theta);
    let alpha = C::new(mx / 2.0, mp / 2.0);

    let big = (2 * dim).max(dim + 60);
    let a = Banded::lowering(big).to_dense();
    let ad = a.adjoint();
    let sq = (&a * &a * zeta.conj() - &ad * &ad * zeta) * C::new(0.5, 0.0);
    let disp = &ad * alpha - &a * alpha.conj();
    let u = disp.exp() * sq.exp();
    let mut rho_th = DMatrix::<C>::zeros(big, big);
    for k in 0..big {
        let p = if nbar == 0.0 {
            if k == 0 {
                1.0
            } else {
                0.0
            }
        } else {
            (nbar / (nbar + 1.0)).powi(k as i32) / (nbar + 1.0)
        };
        rho_th[(k, k)] = C::new(p, 0.0);
    }
    let rho = &u * rho_th * u.adjoint();
    let kept: f64 = (0..dim).map(|k| rho[(k, k)].re).sum();
    if 1.0 - kept > tail {
        return Err(Error::invalid(
            "state0",
            format!("population {:e} lies beyond n_max = {}", 1.0 - kept, dim - 1),
        ));
    }
    let mut out = vec![C::default(); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[i * dim + j] = rho[(i, j)];
        }
    }
    // self-check of the construction
    let ops = Operators::new(dim);
    let m = moments(&ops, &out);
    let scale = 1.0 + y.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if m.iter().zip(y).any(|(a, b)| (a - b).abs() > 1e-6 * scale) {
        return Err(Error::InvariantViolation(format!(
            "Gaussian state construction missed the target moments: {m:?} vs {y:?}"
        )));
    }
    Ok(out)
}

fn run_fock(
    ode: &MomentOde,
    y0: &[f64; 5],
    dim: usize,
    times: &[f64],
    opts: &FockOptions,
) -> Result<Vec<[f64; 5]>> {
    let rho0 = gaussian_state(y0, dim, opts.tail)?;
    let sys = FockSystem {
        ode,
        ops: Operators::new(dim),
        dim,
    };
    let flat: Vec<f64> = rho0.iter().flat_map(|c| [c.re, c.im]).collect();
    let states = Integrator::new(opts.tol).solve_at(&sys, 0.0, &flat, times)?;
    Ok(states
        .iter()
        .map(|y| {
            let rho: Vec<C> = (0..dim * dim).map(|i| C::new(y[2 * i], y[2 * i + 1])).collect();
            moments(&sys.ops, &rho)
        })
        .collect())
}

/// Integrates the master equation in the number basis truncated at `n_max`,
/// repeats at `2 n_max`, and returns the moments if both agree.
pub fn fock_oracle(
    ode: &MomentOde,
    state0: &MomentState,
    t_end: f64,
    stride: f64,
    opts: &FockOptions,
) -> Result<MomentTrajectory> {
    if opts.n_max < 16 {
        return Err(Error::invalid("n_max", "must be at least 16"));
    }
    if !(t_end > 0.0 && stride > 0.0) {
        return Err(Error::invalid("t_end", "t_end and stride must be positive"));
    }
    let (sx, sp) = (ode.scale_x(), ode.scale_p());
    let r = state0.to_raw();
    let y0 = [r[0] / sx, r[1] / sp, r[2] / (sx * sx), r[3] / (sp * sp), r[4] / (sx * sp)];
    let count = (t_end / stride * (1.0 + 1e-12)).floor() as usize;
    let times: Vec<f64> = (0..=count).map(|i| i as f64 * stride).collect();

    let coarse = run_fock(ode, &y0, opts.n_max + 1, &times, opts)?;
    let fine = run_fock(ode, &y0, 2 * opts.n_max + 1, &times, opts)?;
    let dev = relative_deviation(&coarse, &fine);
    if dev > opts.convergence {
        return Err(Error::NoConvergence {
            what: "Fock truncation",
            detail: format!(
                "moments change by {dev:e} between n_max = {} and {}",
                opts.n_max,
                2 * opts.n_max
            ),
        });
    }
    let samples = times
        .iter()
        .zip(&fine)
        .map(|(&t, y)| MomentSample {
            t,
            state: MomentState::from_raw(&[y[0] * sx, y[1] * sp, y[2] * sx * sx, y[3] * sp * sp, y[4] * sx * sp]),
        })
        .collect();
    Ok(MomentTrajectory {
        samples,
        mass: ode.mass,
        omega0: ode.omega0,
        omega: ode.drive_omega(),
        n_eff: ode.n_eff,
        gamma: ode.gamma,
    })
}

/// Largest deviation between two runs, per moment relative to that moment's
/// largest magnitude over the run.
fn relative_deviation(a: &[[f64; 5]], b: &[[f64; 5]]) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..5 {
        let scale = a.iter().chain(b).fold(0.0f64, |s, v| s.max(v[j].abs()));
        if scale == 0.0 {
            continue;
        }
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x[j] - y[j]).abs() / scale);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::floquet_coefficients;
    use crate::qme::{assemble_moment_ode, BathParams};

    #[test]
    fn banded_algebra_matches_dense() {
        let ops = Operators::new(12);
        let a = Banded::lowering(14).to_dense();
        let ad = a.adjoint();
        let crop = |m: DMatrix<C>| m.view((0, 0), (12, 12)).into_owned();
        assert!((ops.ada.to_dense() - crop(&ad * &a)).norm() < 1e-12);
        assert!((ops.aad.to_dense() - crop(&a * &ad)).norm() < 1e-12);
        let x = &a + &ad;
        assert!((ops.x2.to_dense() - crop(&x * &x)).norm() < 1e-12);
        assert_eq!(ops.a.get(0, 1), C::new(1.0, 0.0));
    }

    #[test]
    fn gaussian_construction_hits_squeezed_thermal_moments() {
        let y = [0.3, -0.2, 2.2 + 0.09, 0.9 + 0.04, 2.0 * (0.4 + 0.3 * -0.2)];
        let rho = gaussian_state(&y, 60, 1e-8).unwrap();
        let m = moments(&Operators::new(60), &rho);
        for (a, b) in m.iter().zip(&y) {
            assert!((a - b).abs() < 1e-8, "{m:?}");
        }
    }

    #[test]
    fn vacuum_stays_centred_without_damping() {
        let mode = floquet_coefficients(0.47, 8).unwrap().at_drive(300.0);
        let m = 6e-6;
        let ode = assemble_moment_ode(&mode, m, &BathParams::new(0.0, 0.0)).unwrap();
        let s0 = MomentState::thermal(0.0, m, mode.omega0);
        let opts = FockOptions {
            n_max: 24,
            convergence: 1e-2,
            ..FockOptions::default()
        };
        let tr = fock_oracle(&ode, &s0, 0.05, 0.01, &opts).unwrap();
        for s in &tr.samples {
            assert!(s.state.mean_x.abs() < 1e-12 * ode.scale_x());
            assert!(s.state.mean_p.abs() < 1e-12 * ode.scale_p());
        }
    }

    #[test]
    fn small_basis_rejected() {
        let mode = floquet_coefficients(0.3, 8).unwrap().at_drive(300.0);
        let ode = assemble_moment_ode(&mode, 6e-6, &BathParams::new(0.0, 0.0)).unwrap();
        let s0 = MomentState::thermal(0.0, 6e-6, mode.omega0);
        let opts = FockOptions {
            n_max: 8,
            ..FockOptions::default()
        };
        assert!(fock_oracle(&ode, &s0, 0.01, 0.01, &opts).is_err());
    }

    #[test]
    fn damped_run_matches_moment_equations() {
        let mode = floquet_coefficients(0.2, 8).unwrap().at_drive(300.0);
        let m = 6e-6;
        let w0 = mode.omega0;
        let bath = BathParams::new(0.05 * w0, 0.5 * crate::units::HBAR * w0);
        let ode = assemble_moment_ode(&mode, m, &bath).unwrap();
        let s0 = MomentState::thermal(0.2, m, w0).displaced(0.5 * ode.scale_x(), 0.0);
        let opts = FockOptions {
            n_max: 32,
            convergence: 1e-3,
            ..FockOptions::default()
        };
        let fock = fock_oracle(&ode, &s0, 0.1, 0.02, &opts).unwrap();
        let mom = super::super::propagate_moments(&s0, &ode, 0.1, 0.02).unwrap();
        for (a, b) in fock.samples.iter().zip(&mom.samples) {
            let (ra, rb) = (a.state.to_raw(), b.state.to_raw());
            let scale = [ode.scale_x(), ode.scale_p(), ode.scale_x().powi(2), ode.scale_p().powi(2), ode.scale_x() * ode.scale_p()];
            for j in 0..5 {
                assert!((ra[j] - rb[j]).abs() < 1e-4 * scale[j], "{j}: {ra:?} {rb:?}");
            }
        }
    }
}
