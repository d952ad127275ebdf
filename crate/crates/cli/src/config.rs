//! Experiment configuration: a TOML file plus dotted `key=value` overrides.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ks_core::field::Grid2D;
use ks_core::norms::{Spacing, TimeGrid};
use ks_core::solver::TheoremMode;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: GridSection,
    pub time: TimeSection,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub data: DataSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub variant: VariantSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_min: f64,
    pub t_max: f64,
    pub k: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Geometric
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Auto {
    Auto,
}

/// Coupling constant: a number, or `"auto"` to take it from the constants
/// estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Value(f64),
    Keyword(Auto),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PicardSection {
    #[serde(default = "default_c")]
    pub c: Coupling,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_mode")]
    pub mode: TheoremMode,
}

fn default_c() -> Coupling {
    Coupling::Keyword(Auto::Auto)
}
fn default_max_iter() -> usize {
    50
}
fn default_tol() -> f64 {
    1e-12
}
fn default_mode() -> TheoremMode {
    TheoremMode::Thm1L1Linf
}

impl Default for PicardSection {
    fn default() -> Self {
        Self {
            c: default_c(),
            max_iter: default_max_iter(),
            tol: default_tol(),
            mode: default_mode(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// `u0` Gaussian of the given mass and width, `v0` optionally another.
    Gaussian,
    /// `u0 = amplitude · cos(k·x)`.
    Mode,
    /// `u0 = 0`, `v0` the one-cell smoothed indicator of `0 ≤ x1 ≤ 1`.
    Stripe,
    /// KSF1 sequence: first frame `u0`, optional second frame `v0`.
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub kind: DataKind,
    #[serde(default)]
    pub mass: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub v_mass: f64,
    #[serde(default = "default_width")]
    pub v_width: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default = "default_wavevector")]
    pub wavevector: [i64; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn default_width() -> f64 {
    0.5
}
fn default_wavevector() -> [i64; 2] {
    [1, 0]
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            kind: DataKind::Gaussian,
            mass: 0.0,
            width: default_width(),
            v_mass: 0.0,
            v_width: default_width(),
            amplitude: 0.0,
            wavevector: default_wavevector(),
            path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default)]
    pub dump_fields: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("ks_out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            dump_fields: false,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariantSection {
    /// Second equation without the damping term.
    #[serde(default)]
    pub undamped: bool,
}

impl ExperimentConfig {
    /// Reads `path`, applies `overrides` (`a.b=value`, value parsed as TOML
    /// and falling back to a bare string) and validates the result.
    pub fn load(path: &Path, overrides: &[String]) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &[String]) -> anyhow::Result<Self> {
        let mut table: toml::Table = toml::from_str(text).context("parsing config")?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: Self = toml::Value::Table(table)
            .try_into()
            .context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> anyhow::Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.grid()?;
        self.time_grid()?;
        if let Coupling::Value(c) = self.picard.c {
            if !(c.is_finite() && c > 0.0) {
                bail!("picard.c must be positive or \"auto\", got {c}");
            }
        }
        if self.picard.max_iter == 0 {
            bail!("picard.max_iter must be >= 1");
        }
        if !(self.picard.tol.is_finite() && self.picard.tol > 0.0) {
            bail!("picard.tol must be positive, got {}", self.picard.tol);
        }
        let d = &self.data;
        match d.kind {
            DataKind::Gaussian => {
                if !(d.mass >= 0.0 && d.v_mass >= 0.0 && d.mass.is_finite() && d.v_mass.is_finite())
                {
                    bail!("data.mass and data.v_mass must be finite and >= 0");
                }
                if !(d.width > 0.0 && d.v_width > 0.0) {
                    bail!("data.width and data.v_width must be positive");
                }
            }
            DataKind::Mode => {
                if !d.amplitude.is_finite() {
                    bail!("data.amplitude must be finite");
                }
            }
            DataKind::Stripe => {}
            DataKind::File => {
                if d.path.is_none() {
                    bail!("data.kind = \"file\" needs data.path");
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> anyhow::Result<Grid2D> {
        Ok(Grid2D::new(self.grid.n, self.grid.l)?)
    }

    pub fn time_grid(&self) -> anyhow::Result<TimeGrid> {
        let t = &self.time;
        Ok(TimeGrid::new(t.spacing, t.t_min, t.t_max, t.k)?)
    }
}

fn apply_override(table: &mut toml::Table, spec: &str) -> anyhow::Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .with_context(|| format!("override {spec:?} is not key=value"))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        bail!("override {spec:?} has an empty key segment");
    }
    let value = toml::from_str::<toml::Table>(&format!("v = {}", raw.trim()))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    let (last, parents) = path.split_last().expect("non-empty");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .with_context(|| format!("override {spec:?}: {p} is not a section"))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[grid]
n = 32
l = 16.0

[time]
t_min = 1e-3
t_max = 5.0
k = 16
"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::parse(BASE, &[]).unwrap();
        assert_eq!(c.picard.c, Coupling::Keyword(Auto::Auto));
        assert_eq!(c.time.spacing, Spacing::Geometric);
        assert_eq!(c.data.kind, DataKind::Gaussian);
        assert!(!c.variant.undamped);
    }

    #[test]
    fn overrides_apply() {
        let o = [
            "picard.c=2.5",
            "data.kind=mode",
            "data.wavevector=[2,1]",
            "variant.undamped=true",
        ]
        .map(String::from);
        let c = ExperimentConfig::parse(BASE, &o).unwrap();
        assert_eq!(c.picard.c, Coupling::Value(2.5));
        assert_eq!(c.data.kind, DataKind::Mode);
        assert_eq!(c.data.wavevector, [2, 1]);
        assert!(c.variant.undamped);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse(BASE, &["grid.m=3".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["extra.x=1".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["nokeyvalue".into()]).is_err());
    }

    #[test]
    fn ranges_validated() {
        assert!(ExperimentConfig::parse(BASE, &["grid.n=30".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["picard.c=-1".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["picard.c=\"manual\"".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["data.width=0".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["data.kind=file".into()]).is_err());
        assert!(ExperimentConfig::parse(BASE, &["time.t_min=0".into()]).is_err());
    }

    #[test]
    fn round_trip() {
        let o = [
            "picard.c=1.25",
            "data.path=\"x.ksf\"",
            "time.spacing=uniform",
        ]
        .map(String::from);
        let c = ExperimentConfig::parse(BASE, &o).unwrap();
        let again = ExperimentConfig::parse(&c.to_toml().unwrap(), &[]).unwrap();
        assert_eq!(c, again);
        let auto = ExperimentConfig::parse(BASE, &[]).unwrap();
        assert_eq!(
            auto,
            ExperimentConfig::parse(&auto.to_toml().unwrap(), &[]).unwrap()
        );
    }
}
