//! Line-oriented JSON catalog of material platforms.
//!
//! Each non-blank line is one JSON object
//! `{name, mass_m0, v_s_m_per_s: [min, max], eps_r, notes}`. An optional first
//! line `{"catalog_version": 1}` pins the schema. Lines starting with `#` are
//! comments.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::MaterialSystem;
use crate::error::{Error, Result};

pub const CATALOG_VERSION: u64 = 1;

/// Environment variable naming an extra catalog file merged over the built-in one.
pub const CATALOG_ENV: &str = "SAWLATTICE_CATALOG";

const BUILTIN: &str = include_str!("../../data/materials-v1.jsonl");

/// A catalog row. Sound speeds are stored as a range; pick the value with
/// [`MaterialPreset::at_speed`], [`MaterialPreset::slow`] or [`MaterialPreset::fast`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialPreset {
    pub name: String,
    pub mass_m0: f64,
    pub v_s_m_per_s: [f64; 2],
    pub eps_r: f64,
    #[serde(default)]
    pub notes: String,
}

impl MaterialPreset {
    pub fn at_speed(&self, v_s: f64) -> MaterialSystem {
        MaterialSystem {
            name: self.name.clone(),
            carrier_mass: self.mass_m0,
            sound_speed: v_s,
            dielectric_rel: self.eps_r,
            notes: self.notes.clone(),
        }
    }

    pub fn slow(&self) -> MaterialSystem {
        self.at_speed(self.v_s_m_per_s[0])
    }

    pub fn fast(&self) -> MaterialSystem {
        self.at_speed(self.v_s_m_per_s[1])
    }
}

/// The catalog shipped with the crate.
pub fn builtin() -> Vec<MaterialPreset> {
    parse(BUILTIN, Path::new("<builtin>")).expect("built-in catalog is valid")
}

/// Built-in presets plus the rows of `path`. A user row whose name matches a
/// built-in row replaces it; other rows are appended in file order.
pub fn load_material_presets(path: &Path) -> Result<Vec<MaterialPreset>> {
    let text = std::fs::read_to_string(path)?;
    let extra = parse(&text, path)?;
    Ok(merge(builtin(), extra))
}

/// Built-in presets, merged with the file named by `SAWLATTICE_CATALOG` if set.
pub fn default_presets() -> Result<Vec<MaterialPreset>> {
    match std::env::var_os(CATALOG_ENV) {
        Some(p) if !p.is_empty() => load_material_presets(Path::new(&p)),
        _ => Ok(builtin()),
    }
}

pub fn find<'a>(presets: &'a [MaterialPreset], name: &str) -> Option<&'a MaterialPreset> {
    presets.iter().find(|p| p.name.eq_ignore_ascii_case(name))
}

fn merge(mut base: Vec<MaterialPreset>, extra: Vec<MaterialPreset>) -> Vec<MaterialPreset> {
    for row in extra {
        match base.iter_mut().find(|b| b.name == row.name) {
            Some(slot) => *slot = row,
            None => base.push(row),
        }
    }
    base
}

/// Parses catalog text. `origin` only labels diagnostics.
pub fn parse(text: &str, origin: &Path) -> Result<Vec<MaterialPreset>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fail = |field: &str, reason: String| Error::Catalog {
            path: origin.to_path_buf(),
            line,
            field: field.to_string(),
            reason,
        };
        let value: Value =
            serde_json::from_str(trimmed).map_err(|e| fail("<row>", e.to_string()))?;
        let Value::Object(obj) = value else {
            return Err(fail("<row>", "expected a JSON object".into()));
        };
        if let Some(v) = obj.get("catalog_version") {
            if v.as_u64() != Some(CATALOG_VERSION) {
                return Err(fail(
                    "catalog_version",
                    format!("unsupported version {v}, expected {CATALOG_VERSION}"),
                ));
            }
            continue;
        }
        rows.push(row_from(&obj, origin.to_path_buf(), line)?);
    }
    Ok(rows)
}

fn row_from(obj: &Map<String, Value>, path: PathBuf, line: usize) -> Result<MaterialPreset> {
    let fail = |field: &str, reason: &str| Error::Catalog {
        path: path.clone(),
        line,
        field: field.to_string(),
        reason: reason.to_string(),
    };
    for key in obj.keys() {
        if !matches!(
            key.as_str(),
            "name" | "mass_m0" | "v_s_m_per_s" | "eps_r" | "notes"
        ) {
            return Err(fail(key, "unknown field"));
        }
    }
    let number = |field: &str| -> Result<f64> {
        let v = obj.get(field).ok_or_else(|| fail(field, "missing"))?;
        let x = v.as_f64().ok_or_else(|| fail(field, "expected a number"))?;
        if !x.is_finite() {
            return Err(fail(field, "must be finite"));
        }
        Ok(x)
    };

    let name = match obj.get("name") {
        Some(Value::String(s)) if !s.trim().is_empty() => s.clone(),
        Some(Value::String(_)) => return Err(fail("name", "must not be empty")),
        Some(_) => return Err(fail("name", "expected a string")),
        None => return Err(fail("name", "missing")),
    };
    let mass_m0 = number("mass_m0")?;
    if mass_m0 < 0.0 {
        return Err(fail("mass_m0", "must be nonnegative"));
    }
    let eps_r = number("eps_r")?;
    if eps_r < 1.0 {
        return Err(fail("eps_r", "must be at least 1"));
    }
    let speeds = match obj.get("v_s_m_per_s") {
        Some(Value::Array(a)) if a.len() == 2 => a,
        Some(_) => return Err(fail("v_s_m_per_s", "expected [min, max]")),
        None => return Err(fail("v_s_m_per_s", "missing")),
    };
    let mut v = [0.0; 2];
    for (slot, item) in v.iter_mut().zip(speeds) {
        *slot = item
            .as_f64()
            .filter(|x| x.is_finite() && *x > 0.0)
            .ok_or_else(|| fail("v_s_m_per_s", "entries must be positive numbers"))?;
    }
    if v[0] > v[1] {
        return Err(fail("v_s_m_per_s", "min exceeds max"));
    }
    let notes = match obj.get("notes") {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(fail("notes", "expected a string")),
    };
    Ok(MaterialPreset {
        name,
        mass_m0,
        v_s_m_per_s: v,
        eps_r,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn builtin_has_six_rows() {
        let rows = builtin();
        assert_eq!(rows.len(), 6);
        assert!(find(&rows, "gan-hole").is_some());
    }

    #[test]
    fn empty_user_file_leaves_catalog_unchanged() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(b"\n").unwrap();
        assert_eq!(load_material_presets(f.path()).unwrap(), builtin());
    }

    #[test]
    fn user_rows_append_and_override() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            f,
            r#"{{"name":"gan-hole","mass_m0":1.0,"v_s_m_per_s":[1e4,1e4],"eps_r":9.0,"notes":""}}"#
        )
        .unwrap();
        writeln!(
            f,
            r#"{{"name":"custom","mass_m0":0.1,"v_s_m_per_s":[5e3,6e3],"eps_r":3.0}}"#
        )
        .unwrap();
        let rows = load_material_presets(f.path()).unwrap();
        assert_eq!(rows.len(), 7);
        assert_eq!(find(&rows, "gan-hole").unwrap().mass_m0, 1.0);
        assert_eq!(rows.last().unwrap().name, "custom");
    }

    #[test]
    fn malformed_row_names_the_field() {
        let text = "{\"catalog_version\":1}\n{\"name\":\"x\",\"mass_m0\":\"heavy\",\"v_s_m_per_s\":[1,2],\"eps_r\":2}\n";
        match parse(text, Path::new("user.jsonl")) {
            Err(Error::Catalog { line, field, .. }) => {
                assert_eq!(line, 2);
                assert_eq!(field, "mass_m0");
            }
            other => panic!("unexpected {other:?}"),
        }
        let bad_speed = r#"{"name":"x","mass_m0":1,"v_s_m_per_s":[3],"eps_r":2}"#;
        match parse(bad_speed, Path::new("u")) {
            Err(Error::Catalog { field, .. }) => assert_eq!(field, "v_s_m_per_s"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_version_rejected() {
        let err = parse("{\"catalog_version\":2}", Path::new("u")).unwrap_err();
        assert!(err.to_string().contains("catalog_version"));
    }
}
