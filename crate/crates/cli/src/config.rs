//! Run configuration: JSON file values overlaid by command-line flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use breit_rabi::grid::Grid;
use breit_rabi::hamiltonian::{preset_table, AtomRecord};
use breit_rabi::{Atom, HalfInteger};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Environment variable that overrides the output directory of every command.
pub const OUT_DIR_ENV: &str = "BREIT_RABI_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse {0:?} as a number (plain decimal or a multiple of pi such as 2pi/3)")]
    Number(String),
    #[error("cannot parse range {0:?}; expected lo:hi:n")]
    Range(String),
    #[error("{what} must be a single value, got the range {range}")]
    ExpectedValue { what: &'static str, range: String },
    #[error("{what} must be a range lo:hi:n")]
    ExpectedRange { what: &'static str },
    #[error("exactly one of B and f must be a range (got {0})")]
    SweepAxis(&'static str),
    #[error("missing required setting {0}")]
    Missing(&'static str),
    #[error("cannot parse inline atom {0:?}; expected I,a',b' such as 3/2,32.091,-0.012709")]
    InlineAtom(String),
    #[error("unknown output format {0:?}; expected csv or json")]
    Format(String),
    #[error("reading config {path}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parsing config {path}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Model(#[from] breit_rabi::Error),
}

pub type Result<T, E = ConfigError> = std::result::Result<T, E>;

/// A decimal number or a rational multiple of pi: `1.5`, `pi`, `-pi/2`, `2pi/3`, `2*pi/3`.
pub fn parse_scalar(s: &str) -> Result<f64> {
    let t = s.trim();
    if let Ok(x) = t.parse::<f64>() {
        return if x.is_finite() { Ok(x) } else { Err(ConfigError::Number(s.into())) };
    }
    let bad = || ConfigError::Number(s.into());
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t),
    };
    let pos = body.find("pi").ok_or_else(bad)?;
    let coef = body[..pos].trim_end_matches('*');
    let coef = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
    let rest = &body[pos + 2..];
    let den = match rest.strip_prefix('/') {
        Some(d) => d.parse::<f64>().map_err(|_| bad())?,
        None if rest.is_empty() => 1.0,
        None => return Err(bad()),
    };
    let x = sign * coef * std::f64::consts::PI / den;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

/// A fixed value or an inclusive grid `lo:hi:n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Value(f64),
    Range(Grid<f64>),
}

impl Param {
    pub fn value(&self, what: &'static str) -> Result<f64> {
        match self {
            Param::Value(x) => Ok(*x),
            Param::Range(_) => Err(ConfigError::ExpectedValue {
                what,
                range: self.to_string(),
            }),
        }
    }

    pub fn range(&self, what: &'static str) -> Result<Grid<f64>> {
        match self {
            Param::Range(g) => Ok(*g),
            Param::Value(_) => Err(ConfigError::ExpectedRange { what }),
        }
    }
}

impl FromStr for Param {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [x] => Ok(Param::Value(parse_scalar(x)?)),
            [lo, hi, n] => {
                let n: usize = n.trim().parse().map_err(|_| ConfigError::Range(s.into()))?;
                Ok(Param::Range(Grid::new(parse_scalar(lo)?, parse_scalar(hi)?, n)?))
            }
            _ => Err(ConfigError::Range(s.into())),
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Value(x) => write!(f, "{x:?}"),
            Param::Range(g) => write!(f, "{:?}:{:?}:{}", g.lo, g.hi, g.n),
        }
    }
}

impl Serialize for Param {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Param::Value(x) => s.serialize_f64(*x),
            Param::Range(_) => s.serialize_str(&self.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Param {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
            Grid { lo: f64, hi: f64, n: usize },
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Param::Value(x)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Grid { lo, hi, n } => Grid::new(lo, hi, n).map(Param::Range).map_err(serde::de::Error::custom),
        }
    }
}

/// A preset name or an explicit parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AtomSpec {
    Preset(String),
    Inline {
        #[serde(default)]
        name: Option<String>,
        #[serde(alias = "I")]
        nuclear_spin: HalfInteger,
        a_prime: f64,
        b_prime: f64,
    },
}

impl AtomSpec {
    pub fn resolve(&self) -> Result<Atom> {
        Ok(self.record()?.to_params()?)
    }

    pub fn record(&self) -> Result<AtomRecord> {
        match self {
            AtomSpec::Preset(name) => preset_table()?
                .remove(name.as_str())
                .ok_or_else(|| breit_rabi::Error::UnknownPreset(name.clone()).into()),
            AtomSpec::Inline {
                name,
                nuclear_spin,
                a_prime,
                b_prime,
            } => {
                let record = AtomRecord {
                    name: name.clone().unwrap_or_else(|| "custom".into()),
                    nuclear_spin: *nuclear_spin,
                    a_prime: *a_prime,
                    b_prime: *b_prime,
                };
                record.to_params::<f64>()?;
                Ok(record)
            }
        }
    }
}

impl FromStr for AtomSpec {
    type Err = ConfigError;

    /// A preset name, or `I,a',b'`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        match parts.as_slice() {
            [name] => Ok(AtomSpec::Preset((*name).to_string())),
            [i, a, b] => {
                let bad = || ConfigError::InlineAtom(s.into());
                Ok(AtomSpec::Inline {
                    name: None,
                    nuclear_spin: i.parse().map_err(|_| bad())?,
                    a_prime: a.parse().map_err(|_| bad())?,
                    b_prime: b.parse().map_err(|_| bad())?,
                })
            }
            _ => Err(ConfigError::InlineAtom(s.into())),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(ConfigError::Format(s.into())),
        }
    }
}

/// Every setting any command reads; unset fields fall back to command defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atom: Option<AtomSpec>,
    #[serde(default, rename = "B", alias = "b", skip_serializing_if = "Option::is_none")]
    pub b: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Param>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<Param>,
    /// Level label such as `0-` or `+1-`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,
    /// Restricts crossings to one `m` block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<HalfInteger>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
    /// File stem of the outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numeric: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gnuplot: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Json {
            path: path.into(),
            source,
        })
    }

    /// Fields set in `top` replace those in `self`.
    pub fn overlay(self, top: RunConfig) -> RunConfig {
        RunConfig {
            atom: top.atom.or(self.atom),
            b: top.b.or(self.b),
            f: top.f.or(self.f),
            theta: top.theta.or(self.theta),
            level: top.level.or(self.level),
            m: top.m.or(self.m),
            out_dir: top.out_dir.or(self.out_dir),
            name: top.name.or(self.name),
            format: top.format.or(self.format),
            steps: top.steps.or(self.steps),
            numeric: top.numeric.or(self.numeric),
            gnuplot: top.gnuplot.or(self.gnuplot),
        }
    }

    /// Fills unset fields from `defaults`.
    pub fn with_defaults(self, defaults: RunConfig) -> RunConfig {
        defaults.overlay(self)
    }

    /// Flag value, then the environment variable, then the config file, then `.`.
    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        if let Some(dir) = flag {
            return dir.to_path_buf();
        }
        if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
            return PathBuf::from(dir);
        }
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    pub fn atom_spec(&self) -> Result<&AtomSpec> {
        self.atom.as_ref().ok_or(ConfigError::Missing("atom"))
    }

    pub fn b_param(&self) -> Result<Param> {
        self.b.ok_or(ConfigError::Missing("B"))
    }

    pub fn f_param(&self) -> Result<Param> {
        self.f.ok_or(ConfigError::Missing("f"))
    }

    pub fn theta_param(&self) -> Result<Param> {
        self.theta.ok_or(ConfigError::Missing("theta"))
    }
}
