//! Global options: flags over config file over built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::Args;
use heston_escape::{Control, Params};

use crate::error::CliError;

pub const DEFAULT_ALPHA: f64 = 0.045;
pub const DEFAULT_M: f64 = 0.093;
pub const DEFAULT_THETA: f64 = 1.25;
pub const DEFAULT_SPAN: f64 = 0.01;
pub const DEFAULT_SEED: u64 = 0x5EED;
pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_DT: f64 = 1e-4;

#[derive(Args, Debug, Clone, Default)]
pub struct GlobalArgs {
    /// Mean-reversion rate (1/day)
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    /// Normal level of volatility (1/sqrt(day))
    #[arg(long, global = true)]
    pub m: Option<f64>,
    /// Dimensionless normal level 2*alpha*m^2/k^2 (k is derived)
    #[arg(long, global = true, conflicts_with = "k")]
    pub theta: Option<f64>,
    /// Vol-of-vol (theta is derived)
    #[arg(long, global = true)]
    pub k: Option<f64>,
    /// Interval width
    #[arg(long = "L", global = true)]
    pub span: Option<f64>,
    /// Maximum Fourier modes per series
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Relative tolerance of every series
    #[arg(long = "rel-tol", global = true)]
    pub rel_tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte-Carlo path count
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    /// Monte-Carlo variance step (scaled time)
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat key=value file with alpha, m, theta or k, L, modes, rel_tol, seed, paths, dt
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VolSpec {
    Theta(f64),
    K(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub alpha: f64,
    pub m: f64,
    pub vol: VolSpec,
    pub span: Option<f64>,
    pub ctrl: Control,
    pub seed: u64,
    pub paths: usize,
    pub dt: f64,
    pub out: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            m: DEFAULT_M,
            vol: VolSpec::Theta(DEFAULT_THETA),
            span: None,
            ctrl: Control::default(),
            seed: DEFAULT_SEED,
            paths: DEFAULT_PATHS,
            dt: DEFAULT_DT,
            out: None,
        }
    }
}

impl Settings {
    pub fn resolve(args: &GlobalArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => read_config(path)?,
            None => BTreeMap::new(),
        };
        let get = |key: &str| -> Result<Option<f64>, CliError> {
            file.get(key)
                .map(|s| s.parse::<f64>().map_err(|_| CliError::Domain(format!("config key `{key}`: cannot parse `{s}`"))))
                .transpose()
        };
        let mut s = Settings::default();
        if let Some(v) = get("alpha")? {
            s.alpha = v;
        }
        if let Some(v) = get("m")? {
            s.m = v;
        }
        match (get("theta")?, get("k")?) {
            (Some(_), Some(_)) => return Err(CliError::Domain("config sets both theta and k".into())),
            (Some(t), None) => s.vol = VolSpec::Theta(t),
            (None, Some(k)) => s.vol = VolSpec::K(k),
            (None, None) => {}
        }
        s.span = get("L")?;
        if let Some(v) = get("modes")? {
            s.ctrl.max_modes = count("modes", v)?;
        }
        if let Some(v) = get("rel_tol")? {
            s.ctrl.rel_tol = v;
        }
        if let Some(v) = get("seed")? {
            s.seed = count("seed", v)? as u64;
        }
        if let Some(v) = get("paths")? {
            s.paths = count("paths", v)?;
        }
        if let Some(v) = get("dt")? {
            s.dt = v;
        }

        s.alpha = args.alpha.unwrap_or(s.alpha);
        s.m = args.m.unwrap_or(s.m);
        if let Some(t) = args.theta {
            s.vol = VolSpec::Theta(t);
        }
        if let Some(k) = args.k {
            s.vol = VolSpec::K(k);
        }
        s.span = args.span.or(s.span);
        s.ctrl.max_modes = args.modes.unwrap_or(s.ctrl.max_modes);
        s.ctrl.rel_tol = args.rel_tol.unwrap_or(s.ctrl.rel_tol);
        s.seed = args.seed.unwrap_or(s.seed);
        s.paths = args.paths.unwrap_or(s.paths);
        s.dt = args.dt.unwrap_or(s.dt);
        s.out = args.out.clone();
        s.ctrl.validate()?;
        Ok(s)
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Ok(match self.vol {
            VolSpec::Theta(t) => Params::from_theta(self.alpha, self.m, t)?,
            VolSpec::K(k) => Params::new(self.alpha, self.m, k)?,
        })
    }

    /// Same `alpha` and `m`, with `k` chosen for the given `theta`.
    pub fn params_with_theta(&self, theta: f64) -> Result<Params, CliError> {
        Ok(Params::from_theta(self.alpha, self.m, theta)?)
    }

    pub fn span_or(&self, default: f64) -> f64 {
        self.span.unwrap_or(default)
    }
}

fn count(key: &str, v: f64) -> Result<usize, CliError> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(CliError::Domain(format!("config key `{key}` must be a non-negative integer, got {v}")))
    }
}

const KNOWN_KEYS: [&str; 10] = ["alpha", "m", "theta", "k", "L", "modes", "rel_tol", "seed", "paths", "dt"];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Domain(format!("config line {}: expected key=value", i + 1)))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Domain(format!("config line {}: unknown key `{key}`", i + 1)));
        }
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config(&text)
}
