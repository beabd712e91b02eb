use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::classical::DEFAULT_TAU_MAX;
use crate::error::{Error, Result};
use crate::hubbard::{Extras, DEFAULT_THRESHOLD};
use crate::pseudopotential::Order;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Scales,
    Stability,
    Trajectory,
    Qme,
    Hubbard,
    Feasibility,
    CaseStudy,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Scales => "scales",
            Command::Stability => "stability",
            Command::Trajectory => "trajectory",
            Command::Qme => "qme",
            Command::Hubbard => "hubbard",
            Command::Feasibility => "feasibility",
            Command::CaseStudy => "case-study",
        }
    }
}

/// Physical inputs shared by all commands. Each command reads the fields it
/// needs and ignores the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    /// Catalog preset; when set it overrides `e_s`, `v_s` and `eps_r`.
    pub material: Option<String>,
    /// Pick the fast end of the preset's sound-speed range.
    pub fast: bool,
    /// μeV.
    pub e_s: f64,
    /// m/s.
    pub v_s: f64,
    pub eps_r: f64,
    pub frequency_hz: f64,
    pub q: f64,
    pub order: Order,
    /// `(multiplier, weight)` pairs; monochromatic when absent.
    pub harmonics: Option<Vec<(u32, f64)>>,
    pub x_tilde: f64,
    pub v_tilde: f64,
    pub tau_max: f64,
    pub tau_stride: f64,
    pub mean_free_path_nm: Option<f64>,
    /// γ/ω₀.
    pub gamma_rel: f64,
    /// k_BT/ħω₀.
    pub kt_rel: f64,
    /// 2p/(m v_s) of the initial state.
    pub p_tilde: f64,
    pub periods: f64,
    pub samples_per_drive_period: usize,
    /// Also run the number-basis oracle at this truncation (0 disables it).
    pub fock_n_max: usize,
    /// nm.
    pub d_screen: Option<f64>,
    pub extras: Extras,
    pub threshold: f64,
}

impl Default for Inputs {
    fn default() -> Self {
        Self {
            material: None,
            fast: false,
            e_s: 1000.0,
            v_s: 18_000.0,
            eps_r: 9.5,
            frequency_hz: 50e9,
            q: 0.47,
            order: Order::Fourth,
            harmonics: None,
            x_tilde: 0.1,
            v_tilde: 0.0,
            tau_max: 200.0,
            tau_stride: 0.05,
            mean_free_path_nm: None,
            gamma_rel: 1e-3,
            kt_rel: 0.1,
            p_tilde: 0.01,
            periods: 10.0,
            samples_per_drive_period: 32,
            fock_n_max: 0,
            d_screen: None,
            extras: Extras::default(),
            threshold: DEFAULT_THRESHOLD,
        }
    }
}

/// `start, start + step, …` up to and including `stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    pub fn values(&self, path: &str) -> Result<Vec<f64>> {
        let bad = |reason: &str| Error::Config {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return Err(bad("grid bounds must be finite"));
        }
        if !(self.step > 0.0) {
            return Err(bad("step must be positive"));
        }
        if self.stop < self.start {
            return Err(bad("grid is empty (stop < start)"));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub q: Option<Grid>,
    /// k_BT/E_S.
    pub theta: Option<Grid>,
    pub samples_per_cell: usize,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            q: None,
            theta: None,
            samples_per_cell: 32,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub plot: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            plot: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Defaults for `command`; `stability` gets the low-q diagram grid.
    pub fn new(command: Command) -> Self {
        let sweep = match command {
            Command::Stability => Some(Sweep {
                q: Some(Grid::new(0.05, 0.9, 0.05)),
                theta: Some(Grid::new(0.0, 0.06, 0.005)),
                samples_per_cell: 32,
            }),
            _ => None,
        };
        let mut inputs = Inputs::default();
        if command == Command::Stability {
            inputs.tau_max = DEFAULT_TAU_MAX;
        }
        Self {
            command,
            inputs,
            sweep,
            output: Output::default(),
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config {
            path: format!("line {} column {}", e.line(), e.column()),
            reason: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `path=value` overrides, e.g. `inputs.q=0.3` or
    /// `sweep.theta={"start":0,"stop":0.1,"step":0.01}`. Values are parsed as
    /// JSON and fall back to plain strings.
    pub fn apply_overrides(&self, overrides: &[String]) -> Result<Self> {
        let mut doc = serde_json::to_value(self)?;
        for o in overrides {
            let (path, raw) = o.split_once('=').ok_or_else(|| Error::Config {
                path: o.clone(),
                reason: "expected path=value".into(),
            })?;
            let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            set_path(&mut doc, path, value)?;
        }
        serde_json::from_value(doc).map_err(|e| Error::Config {
            path: overrides.join(", "),
            reason: e.to_string(),
        })
    }
}

fn set_path(doc: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = doc;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        let obj = cur.as_object_mut().ok_or_else(|| Error::Config {
            path: parts[..i].join("."),
            reason: "not an object".into(),
        })?;
        if last {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert(Value::Null);
    }
    Err(Error::Config {
        path: path.to_string(),
        reason: "empty path".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        for c in [Command::Scales, Command::Stability, Command::Qme, Command::CaseStudy] {
            let cfg = RunConfig::new(c);
            let back = RunConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn overrides() {
        let cfg = RunConfig::new(Command::Scales)
            .apply_overrides(&["inputs.q=0.3".into(), "inputs.material=gaas-electron".into()])
            .unwrap();
        assert_eq!(cfg.inputs.q, 0.3);
        assert_eq!(cfg.inputs.material.as_deref(), Some("gaas-electron"));
        let sw = RunConfig::new(Command::Scales)
            .apply_overrides(&["sweep.q={\"start\":0.1,\"stop\":0.3,\"step\":0.1}".into()])
            .unwrap();
        assert_eq!(sw.sweep.unwrap().q.unwrap().values("q").unwrap().len(), 3);
        let err = RunConfig::new(Command::Scales).apply_overrides(&["inputs.bogus=1".into()]);
        assert!(matches!(err, Err(Error::Config { .. })));
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(Grid::new(1.0, 0.0, 0.1).values("sweep.q").is_err());
        assert!(Grid::new(0.0, 1.0, 0.0).values("sweep.q").is_err());
        assert_eq!(Grid::new(0.5, 0.5, 0.1).values("sweep.q").unwrap(), vec![0.5]);
    }
}
