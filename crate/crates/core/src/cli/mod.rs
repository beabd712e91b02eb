//! Configuration-driven front end: every subcommand of the `sawlat` binary is
//! a [`RunConfig`] passed to [`run`], which writes CSV datasets, JSON
//! metadata sidecars and SVG plots into the output directory.

mod config;
mod csv;
mod plot;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use config::{Command, Grid, Inputs, Output, RunConfig, Sweep};
pub use csv::{format_float, read_csv, write_csv, Table};
pub use plot::{emit_plot, render, PlotKind};

use crate::classical::{self, ClassicalState, Criterion, DiagramSettings, TRAJECTORY_TOL};
use crate::error::{Error, Result};
use crate::floquet::{self, Convention, FloquetMode};
use crate::hubbard::{self, CaseStudyRow};
use crate::qme::{self, BathParams, FockOptions, MomentOde, MomentState, MomentTrajectory, MOMENT_TOL};
use crate::scales::catalog::{default_presets, find};
use crate::scales::{derived_scales, DerivedScales, DriveConfig, MaterialSystem, Waveform};
use crate::units::HBAR;

/// Number of Floquet harmonics kept on each side for the QME.
const QME_HARMONICS: usize = 12;

/// Exit status for a failed run: 3 for numerical failures, 2 for bad input.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        3
    } else {
        2
    }
}

/// Files written by a run.
#[derive(Clone, Debug, Default)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

/// Hex SHA-256 of the compact JSON form of the config.
pub fn config_hash(config: &RunConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Inputs {
    pub fn material_system(&self) -> Result<MaterialSystem> {
        match &self.material {
            Some(name) => {
                let presets = default_presets()?;
                let p = find(&presets, name).ok_or_else(|| Error::Config {
                    path: "inputs.material".into(),
                    reason: format!("no preset named `{name}`"),
                })?;
                Ok(if self.fast { p.fast() } else { p.slow() })
            }
            None => Ok(MaterialSystem::with_sound_energy(self.e_s, self.v_s).with_dielectric(self.eps_r)),
        }
    }

    pub fn waveform(&self) -> Waveform {
        match &self.harmonics {
            Some(h) => Waveform::polychromatic(h),
            None => Waveform::monochromatic(),
        }
    }

    pub fn drive(&self, q: f64) -> DriveConfig {
        DriveConfig {
            waveform: self.waveform(),
            ..DriveConfig::monochromatic(self.frequency_hz, q)
        }
    }

    pub fn scales(&self, q: f64) -> Result<DerivedScales> {
        derived_scales(&self.material_system()?, &self.drive(q), self.order, false)
    }
}

/// A driven trap set up for the master equation from [`Inputs`]: the exact
/// Floquet mode, the bath in units of ω₀ and a displaced vacuum start.
#[derive(Clone, Debug)]
pub struct QmeSetup {
    pub scales: DerivedScales,
    pub mass: f64,
    pub mode: FloquetMode,
    pub bath: BathParams,
    pub ode: MomentOde,
    pub state0: MomentState,
    pub t_end: f64,
    pub stride: f64,
}

impl QmeSetup {
    pub fn new(inputs: &Inputs) -> Result<Self> {
        let material = inputs.material_system()?;
        let scales = inputs.scales(inputs.q)?;
        let omega = scales.omega();
        let mode = floquet::floquet_coefficients(inputs.q, QME_HARMONICS)?.at_drive(omega);
        let w0 = mode.omega0;
        let bath = BathParams::new(inputs.gamma_rel * w0, inputs.kt_rel * HBAR * w0);
        let mass = material.mass();
        let ode = qme::assemble_moment_ode(&mode, mass, &bath)?;
        let x0 = inputs.x_tilde / (2.0 * scales.k());
        let p0 = inputs.p_tilde * mass * material.sound_speed / 2.0;
        let state0 = MomentState::thermal(0.0, mass, w0).displaced(x0, p0);
        if inputs.samples_per_drive_period == 0 {
            return Err(Error::Config {
                path: "inputs.samples_per_drive_period".into(),
                reason: "must be positive".into(),
            });
        }
        if !(inputs.periods > 0.0) {
            return Err(Error::Config {
                path: "inputs.periods".into(),
                reason: "must be positive".into(),
            });
        }
        let stride = 2.0 * PI / omega / inputs.samples_per_drive_period as f64;
        let t_end = (inputs.periods * 2.0 * PI / w0 / stride).ceil() * stride;
        Ok(Self {
            scales,
            mass,
            mode,
            bath,
            ode,
            state0,
            t_end,
            stride,
        })
    }

    pub fn propagate(&self) -> Result<MomentTrajectory> {
        qme::propagate_moments(&self.state0, &self.ode, self.t_end, self.stride)
    }

    pub fn fock(&self, n_max: usize) -> Result<MomentTrajectory> {
        let opts = FockOptions {
            n_max,
            ..FockOptions::default()
        };
        qme::fock_oracle(&self.ode, &self.state0, self.t_end, self.stride, &opts)
    }

    /// Decay envelope `√(x₀² + (p₀/mω₀)²) e^{−γt/2}` of the mean position.
    pub fn envelope(&self, t: f64) -> f64 {
        let s = &self.state0;
        let a = (s.mean_x.powi(2) + (s.mean_p / (self.mass * self.mode.omega0)).powi(2)).sqrt();
        a * (-0.5 * self.bath.gamma * t).exp()
    }
}

struct Writer<'a> {
    config: &'a RunConfig,
    dir: &'a Path,
    report: RunReport,
}

impl Writer<'_> {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn dataset(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>], tolerances: Value, extra: Value) -> Result<PathBuf> {
        let p = self.path(&format!("{name}.csv"));
        write_csv(&p, header, rows)?;
        let meta = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.config.command.name(),
            "dataset": format!("{name}.csv"),
            "config_hash": config_hash(self.config),
            "seed": self.config.seed,
            "tolerances": tolerances,
            "config": self.config,
            "details": extra,
        });
        let mp = self.path(&format!("{name}.meta.json"));
        std::fs::write(&mp, serde_json::to_string_pretty(&meta)? + "\n")?;
        self.report.files.push(p.clone());
        self.report.files.push(mp);
        Ok(p)
    }

    fn plot(&mut self, dataset: &Path, kind: PlotKind, name: &str) -> Result<()> {
        if self.config.output.plot {
            let out = self.path(&format!("{name}.svg"));
            emit_plot(dataset, kind, &out)?;
            self.report.files.push(out);
        }
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<()> {
        let p = self.path(&format!("{name}.json"));
        std::fs::write(&p, serde_json::to_string_pretty(value)? + "\n")?;
        self.report.files.push(p);
        Ok(())
    }
}

fn tol_json(tol: crate::ode::Tolerances) -> Value {
    json!({ "rtol": tol.rtol, "atol": tol.atol })
}

fn q_values(config: &RunConfig) -> Result<Vec<f64>> {
    match config.sweep.as_ref().and_then(|s| s.q) {
        Some(g) => g.values("sweep.q"),
        None => Ok(vec![config.inputs.q]),
    }
}

/// Executes a configuration and writes its artifacts.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::Config {
        path: "output.dir".into(),
        reason: format!("{}: {e}", dir.display()),
    })?;
    let mut w = Writer {
        config,
        dir,
        report: RunReport::default(),
    };
    let inp = &config.inputs;
    match config.command {
        Command::Scales => {
            let header = [
                "q", "E_S", "E_R", "V_SAW", "V_IDT", "hbar_omega", "hbar_omega0", "V0", "eps", "q_tilde", "n_b",
                "a_nm", "wavelength_nm",
            ];
            let mut rows = Vec::new();
            for q in q_values(config)? {
                let s = inp.scales(q)?;
                rows.push(vec![
                    q,
                    s.e_s,
                    s.e_r,
                    s.v_saw,
                    s.v_idt,
                    s.hbar_omega,
                    s.hbar_omega0,
                    s.v0,
                    s.eps,
                    s.q_tilde,
                    s.n_b,
                    s.lattice_a,
                    s.wavelength,
                ]);
            }
            w.dataset("scales", &header, &rows, Value::Null, json!({ "units": "ueV, nm" }))?;
        }
        Command::Stability => {
            let sweep = config.sweep.clone().unwrap_or_default();
            let q = sweep
                .q
                .ok_or_else(|| Error::Config {
                    path: "sweep.q".into(),
                    reason: "stability needs a q grid".into(),
                })?
                .values("sweep.q")?;
            let theta = sweep
                .theta
                .ok_or_else(|| Error::Config {
                    path: "sweep.theta".into(),
                    reason: "stability needs a temperature grid".into(),
                })?
                .values("sweep.theta")?;
            let criterion = match inp.mean_free_path_nm {
                Some(l) => Criterion::mean_free_path(l, inp.scales(q[0])?.lattice_a),
                None => Criterion::HalfLattice,
            };
            let settings = DiagramSettings {
                tau_max: inp.tau_max,
                samples_per_cell: sweep.samples_per_cell,
                seed: config.seed,
                criterion,
            };
            let d = classical::stability_diagram(&q, &theta, &inp.waveform(), &settings)?;
            let rows: Vec<Vec<f64>> = d
                .cells
                .iter()
                .map(|c| vec![c.q, c.theta, c.fraction_stable, c.max_excursion_median])
                .collect();
            let p = w.dataset(
                "stability",
                &["q", "theta", "fraction_stable", "max_excursion_median"],
                &rows,
                tol_json(TRAJECTORY_TOL),
                json!({
                    "samples_per_cell": d.samples_per_cell,
                    "tau_max": d.tau_max,
                    "criterion": criterion,
                    "lobe_max_theta": d.lobe_max_theta(classical::trapped_fraction(1.0)),
                }),
            )?;
            w.plot(&p, PlotKind::Heatmap, "stability")?;
        }
        Command::Trajectory => {
            let init = ClassicalState {
                x_tilde: inp.x_tilde,
                v_tilde: inp.v_tilde,
                tau: 0.0,
            };
            let waveform = inp.waveform();
            let tr = classical::integrate_trajectory(inp.q, init, &waveform, inp.tau_max, inp.tau_stride)?;
            let secular = if waveform.is_monochromatic() {
                floquet::characteristic_exponent(inp.q).ok()
            } else {
                None
            };
            let mut header = vec!["tau", "x_tilde", "v_tilde"];
            if secular.is_some() {
                header.push("secular");
            }
            let mut rows = Vec::with_capacity(tr.len());
            for s in &tr {
                let mut r = vec![s.tau, s.x_tilde, s.v_tilde];
                if let Some(beta) = secular {
                    let a = inp.x_tilde / (1.0 + 0.5 * inp.q);
                    let b = inp.v_tilde / (beta * (1.0 + 0.5 * inp.q));
                    let cos_part = classical::secular_approximation(inp.q, a, s.tau, Convention::Standard)?;
                    let sin_part = b * (beta * s.tau).sin() * (1.0 + 0.5 * inp.q * (2.0 * s.tau).cos());
                    r.push(cos_part + sin_part);
                }
                rows.push(r);
            }
            let p = w.dataset("trajectory", &header, &rows, tol_json(TRAJECTORY_TOL), Value::Null)?;
            w.plot(&p, PlotKind::Trajectory, "trajectory")?;
        }
        Command::Qme => {
            let setup = QmeSetup::new(inp)?;
            let tr = setup.propagate()?;
            let omega = setup.scales.omega();
            let header = [
                "t_ns", "tau", "mean_x_nm", "mean_p", "var_x_nm2", "var_p", "cov_sym", "envelope_nm",
            ];
            let rows_of = |tr: &MomentTrajectory| -> Vec<Vec<f64>> {
                tr.samples
                    .iter()
                    .map(|s| {
                        let st = &s.state;
                        vec![
                            s.t,
                            0.5 * omega * s.t,
                            st.mean_x,
                            st.mean_p,
                            st.var_x,
                            st.var_p,
                            st.cov_sym,
                            setup.envelope(s.t),
                        ]
                    })
                    .collect()
            };
            let verdict = qme::detect_quasistationary(&tr, omega, 1e-3)?;
            let diag = qme::diagnostics(&tr, setup.scales.k(), &setup.bath, setup.mode.omega0, inp.threshold);
            let kinetic = qme::averaged_kinetic_energy(&setup.mode);
            let p = w.dataset(
                "qme",
                &header,
                &rows_of(&tr),
                tol_json(MOMENT_TOL),
                json!({
                    "omega0": setup.mode.omega0,
                    "n_eff": setup.ode.n_eff,
                    "gamma": setup.bath.gamma,
                    "quasistationarity": verdict,
                    "kinetic_energy": kinetic,
                    "diagnostics": diag,
                }),
            )?;
            w.plot(&p, PlotKind::Trajectory, "qme_trajectory")?;
            w.plot(&p, PlotKind::Moments, "qme_moments")?;
            if inp.fock_n_max > 0 {
                let fock = setup.fock(inp.fock_n_max)?;
                let opts = FockOptions::default();
                w.dataset(
                    "qme_fock",
                    &header,
                    &rows_of(&fock),
                    tol_json(opts.tol),
                    json!({ "n_max": inp.fock_n_max, "doubling_tolerance": opts.convergence }),
                )?;
            }
        }
        Command::Hubbard => {
            let mut rows = Vec::new();
            for q in q_values(config)? {
                let s = inp.scales(q)?;
                let eps_r = inp.material_system()?.dielectric_rel;
                let h = hubbard::hubbard_estimate(&s, q, eps_r, inp.d_screen)?;
                rows.push(vec![
                    q,
                    s.n_b,
                    s.lattice_a,
                    h.t_hop,
                    h.t_hop / s.e_s,
                    h.u_onsite,
                    h.j_exchange,
                    h.f_scr,
                ]);
            }
            w.dataset(
                "hubbard",
                &["q", "n_b", "a_nm", "t_ueV", "t_over_E_S", "U_ueV", "J_ueV", "f_scr"],
                &rows,
                Value::Null,
                json!({ "d_screen_nm": inp.d_screen }),
            )?;
        }
        Command::Feasibility => {
            let s = inp.scales(inp.q)?;
            let w0 = s.omega0();
            let bath = BathParams::new(inp.gamma_rel * w0, inp.kt_rel * s.hbar_omega0);
            let eps_r = inp.material_system()?.dielectric_rel;
            let h = hubbard::hubbard_estimate(&s, inp.q, eps_r, inp.d_screen)?;
            let r = hubbard::regime_check(&s, &bath, &h, &inp.extras, inp.threshold)?;
            let rows: Vec<Vec<f64>> = r
                .chain
                .iter()
                .enumerate()
                .map(|(i, l)| vec![i as f64, l.lhs, l.rhs, l.ratio, f64::from(u8::from(l.pass))])
                .collect();
            let names: Vec<&str> = r.chain.iter().map(|l| l.name.as_str()).collect();
            w.dataset(
                "feasibility",
                &["link", "lhs_ueV", "rhs_ueV", "ratio", "pass"],
                &rows,
                Value::Null,
                json!({ "links": names }),
            )?;
            w.json("feasibility_report", &serde_json::to_value(&r)?)?;
        }
        Command::CaseStudy => {
            let rows: Vec<Vec<f64>> = hubbard::case_study()?.iter().map(|r| r.values().to_vec()).collect();
            w.dataset(
                "case_study",
                &CaseStudyRow::HEADER,
                &rows,
                Value::Null,
                json!({ "eps_r": hubbard::CASE_EPS_R }),
            )?;
        }
    }
    Ok(w.report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn in_tmp(command: Command) -> (tempfile::TempDir, RunConfig) {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(command);
        c.output.dir = dir.path().to_path_buf();
        (dir, c)
    }

    #[test]
    fn case_study_csv() {
        let (dir, c) = in_tmp(Command::CaseStudy);
        run(&c).unwrap();
        let t = read_csv(&dir.path().join("case_study.csv")).unwrap();
        assert_eq!(t.rows.len(), 4);
        let meta: Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("case_study.meta.json")).unwrap()).unwrap();
        assert_eq!(meta["config_hash"], config_hash(&c));
    }

    #[test]
    fn empty_sweep_is_a_validation_error() {
        let (_dir, mut c) = in_tmp(Command::Stability);
        c.sweep.as_mut().unwrap().q = Some(Grid::new(0.5, 0.1, 0.1));
        let e = run(&c).unwrap_err();
        assert_eq!(exit_code(&e), 2);
    }

    #[test]
    fn unknown_material_is_a_validation_error() {
        let (_dir, mut c) = in_tmp(Command::Scales);
        c.inputs.material = Some("unobtainium".into());
        assert_eq!(exit_code(&run(&c).unwrap_err()), 2);
    }

    #[test]
    fn small_stability_sweep_is_deterministic() {
        let (dir, mut c) = in_tmp(Command::Stability);
        c.sweep = Some(Sweep {
            q: Some(Grid::new(0.3, 0.4, 0.1)),
            theta: Some(Grid::new(0.0, 0.02, 0.02)),
            samples_per_cell: 4,
        });
        c.inputs.tau_max = 100.0;
        run(&c).unwrap();
        let a = std::fs::read(dir.path().join("stability.csv")).unwrap();
        run(&c).unwrap();
        let b = std::fs::read(dir.path().join("stability.csv")).unwrap();
        assert_eq!(a, b);
        assert!(dir.path().join("stability.svg").exists());
    }
}
