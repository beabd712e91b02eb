use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::csv::{read_csv, Table};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    Heatmap,
    Trajectory,
    Moments,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heatmap" => Ok(PlotKind::Heatmap),
            "trajectory" => Ok(PlotKind::Trajectory),
            "moments" => Ok(PlotKind::Moments),
            _ => Err(Error::Config {
                path: "kind".into(),
                reason: format!("unknown plot kind `{s}`"),
            }),
        }
    }
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 60.0;

/// Renders a dataset written by `run` as a standalone SVG.
pub fn emit_plot(dataset: &Path, kind: PlotKind, out: &Path) -> Result<()> {
    let table = read_csv(dataset)?;
    let svg = render(&table, kind)?;
    std::fs::write(out, svg)?;
    Ok(())
}

pub fn render(table: &Table, kind: PlotKind) -> Result<String> {
    match kind {
        PlotKind::Heatmap => heatmap(table),
        PlotKind::Trajectory => {
            if table.has("x_tilde") {
                let tau = table.column("tau")?;
                let x = table.column("x_tilde")?;
                let mut series = vec![Series::solid(&tau, &x, "#1f4e9c")];
                let sec;
                if table.has("secular") {
                    sec = table.column("secular")?;
                    series.push(Series::dashed(&tau, &sec, "#d62728"));
                }
                Ok(lines(&series, "τ", "x̃"))
            } else if table.has("mean_x_nm") {
                let tau = table.column("tau")?;
                let x = table.column("mean_x_nm")?;
                let env = table.column("envelope_nm")?;
                let neg: Vec<f64> = env.iter().map(|v| -v).collect();
                let series = [
                    Series::solid(&tau, &x, "#1f4e9c"),
                    Series::dashed(&tau, &env, "#d62728"),
                    Series::dashed(&tau, &neg, "#d62728"),
                ];
                Ok(lines(&series, "τ", "⟨x⟩ (nm)"))
            } else {
                Err(Error::Schema(
                    "trajectory plot needs `tau` with `x_tilde` or `mean_x_nm`".into(),
                ))
            }
        }
        PlotKind::Moments => {
            let tau = table.column("tau")?;
            let v = table.column("var_x_nm2")?;
            Ok(lines(&[Series::solid(&tau, &v, "#1f4e9c")], "τ", "Var x (nm²)"))
        }
    }
}

struct Series<'a> {
    x: &'a [f64],
    y: &'a [f64],
    color: &'static str,
    dashed: bool,
}

impl<'a> Series<'a> {
    fn solid(x: &'a [f64], y: &'a [f64], color: &'static str) -> Self {
        Self {
            x,
            y,
            color,
            dashed: false,
        }
    }

    fn dashed(x: &'a [f64], y: &'a [f64], color: &'static str) -> Self {
        Self {
            x,
            y,
            color,
            dashed: true,
        }
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn header(s: &mut String) {
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
}

fn axes(s: &mut String, xr: (f64, f64), yr: (f64, f64), xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        s,
        r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for (v, px) in [(xr.0, x0), (xr.1, x1)] {
        let _ = writeln!(s, r#"<text x="{px}" y="{}" text-anchor="middle">{}</text>"#, y1 + 18.0, tick(v));
    }
    for (v, py) in [(yr.0, y1), (yr.1, y0)] {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, tick(v));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        0.5 * (x0 + x1),
        H - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{}</text>"#,
        0.5 * (y0 + y1),
        0.5 * (y0 + y1),
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{}", (v * 1e4).round() / 1e4)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn lines(series: &[Series], xlabel: &str, ylabel: &str) -> String {
    let xr = range(series.iter().flat_map(|s| s.x.iter().copied()));
    let yr = range(series.iter().flat_map(|s| s.y.iter().copied()));
    let sx = |v: f64| LEFT + (v - xr.0) / (xr.1 - xr.0) * (W - LEFT - RIGHT);
    let sy = |v: f64| H - BOTTOM - (v - yr.0) / (yr.1 - yr.0) * (H - TOP - BOTTOM);
    let mut s = String::new();
    header(&mut s);
    for se in series {
        let pts: Vec<String> = se
            .x
            .iter()
            .zip(se.y)
            .filter(|(_, y)| y.is_finite())
            .map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let dash = if se.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.2"{dash} points="{}"/>"#,
            se.color,
            pts.join(" ")
        );
    }
    axes(&mut s, xr, yr, xlabel, ylabel);
    s.push_str("</svg>\n");
    s
}

fn distinct(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(f64::total_cmp);
    u.dedup();
    u
}

fn shade(f: f64) -> String {
    let f = f.clamp(0.0, 1.0);
    let lo = [247.0, 251.0, 255.0];
    let hi = [8.0, 48.0, 107.0];
    let c: Vec<u8> = lo.iter().zip(hi).map(|(a, b)| (a + (b - a) * f).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn heatmap(table: &Table) -> Result<String> {
    let q = table.column("q")?;
    let th = table.column("theta")?;
    let f = table.column("fraction_stable")?;
    let qs = distinct(&q);
    let ts = distinct(&th);
    if qs.is_empty() || ts.is_empty() {
        return Err(Error::Schema("heatmap dataset has no rows".into()));
    }
    let cw = (W - LEFT - RIGHT) / qs.len() as f64;
    let ch = (H - TOP - BOTTOM) / ts.len() as f64;
    let mut s = String::new();
    header(&mut s);
    for ((qv, tv), fv) in q.iter().zip(&th).zip(&f) {
        let iq = qs.iter().position(|v| v == qv).expect("value present");
        let it = ts.iter().position(|v| v == tv).expect("value present");
        let _ = writeln!(
            s,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            LEFT + iq as f64 * cw,
            H - BOTTOM - (it + 1) as f64 * ch,
            cw,
            ch,
            shade(*fv)
        );
    }
    axes(
        &mut s,
        (qs[0], qs[qs.len() - 1]),
        (ts[0], ts[ts.len() - 1]),
        "q",
        "k_BT/E_S",
    );
    s.push_str("</svg>\n");
    Ok(s)
}
