use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use clap::{Args, ValueEnum};
use heston_escape::{
    escape_density, met_2d, met_return, met_return_large_span_check, met_wiener, stationary_density, survival_2d,
    survival_return, survival_wiener, Point, Sum, Wiener,
};
use heston_escape_mc::{binomial_z, mc_met, mc_survival, McConfig, McEstimate, V0Mode};

use crate::error::CliError;
use crate::figures::{logspace, render, FigureId, FigureSpec, Table};
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    Sp2d,
    Met2d,
    F2d,
    SpReturn,
    MetReturn,
    SpWiener,
    MetWiener,
    PStat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum McQuantity {
    Sp2d,
    Met2d,
    SpReturn,
    MetReturn,
}

/// Time given either in scaled units (`--tau`) or in days (`--t`).
#[derive(Args, Debug, Clone, Default)]
pub struct TimeArgs {
    /// Scaled time alpha*t
    #[arg(long, allow_hyphen_values = true, conflicts_with = "t")]
    pub tau: Option<f64>,
    /// Time in days
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

impl TimeArgs {
    fn scaled(&self, alpha: f64) -> Result<f64, CliError> {
        match (self.tau, self.t) {
            (Some(tau), _) => Ok(tau),
            (None, Some(t)) => Ok(alpha * t),
            (None, None) => Err(CliError::Domain("this quantity needs --tau or --t".into())),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub quantity: Quantity,
    /// Return coordinate
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub x: f64,
    /// Scaled volatility (defaults to theta)
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Wiener volatility (defaults to m)
    #[arg(long)]
    pub sigma: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct FigureArgs {
    /// One of the figure ids, or `all` to list them
    pub id: String,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub nv: Option<usize>,
    /// Points along the time or span axis
    #[arg(long)]
    pub ntau: Option<usize>,
    /// Comma-separated theta list
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub thetas: Option<Vec<f64>>,
}

#[derive(Args, Debug, Clone)]
pub struct McCheckArgs {
    #[arg(value_enum)]
    pub quantity: McQuantity,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub x: f64,
    /// Initial scaled volatility for the 2D quantities (defaults to theta)
    #[arg(long, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Simulation horizon in scaled time
    #[arg(long, default_value_t = 50.0)]
    pub horizon: f64,
    /// Multiplies the simulated return volatility (negative control)
    #[arg(long = "vol-inject", hide = true, default_value_t = 1.0)]
    pub vol_inject: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long = "l-min", default_value_t = 1.0)]
    pub l_min: f64,
    #[arg(long = "l-max", default_value_t = 100.0)]
    pub l_max: f64,
    #[arg(long, default_value_t = 9)]
    pub count: usize,
    /// Starting point as a fraction of L
    #[arg(long = "x-frac", allow_hyphen_values = true, default_value_t = 0.0)]
    pub x_frac: f64,
}

pub fn write_output(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn report(sum: &Sum) -> String {
    format!(
        "value={:.16e}\nmodes_used={}\ntruncation_estimate={:.16e}\n",
        sum.value, sum.modes_used, sum.truncation_estimate
    )
}

fn exact(value: f64) -> Sum {
    Sum {
        value,
        modes_used: 0,
        truncation_estimate: 0.0,
    }
}

/// Evaluates one quantity; times are in days except where noted.
pub fn eval(args: &EvalArgs, s: &Settings) -> Result<Sum, CliError> {
    let p = s.params()?;
    let span = s.span_or(crate::settings::DEFAULT_SPAN);
    let v = args.v.unwrap_or(p.theta());
    let sigma = args.sigma.unwrap_or(s.m);
    let ctrl = &s.ctrl;
    Ok(match args.quantity {
        Quantity::Sp2d => survival_2d(&Point::new(args.x, v, args.time.scaled(s.alpha)?, span)?, &p, ctrl)?,
        Quantity::F2d => escape_density(&Point::new(args.x, v, args.time.scaled(s.alpha)?, span)?, &p, ctrl)?,
        Quantity::Met2d => met_2d(args.x, v, span, &p, ctrl)?,
        Quantity::SpReturn => survival_return(args.x, args.time.scaled(s.alpha)?, span, &p, ctrl)?,
        Quantity::MetReturn => met_return(args.x, span, &p, ctrl)?,
        Quantity::SpWiener => {
            let days = args.time.scaled(s.alpha)? / s.alpha;
            survival_wiener(args.x, days, span, &Wiener::new(sigma)?, ctrl)?
        }
        Quantity::MetWiener => exact(met_wiener(args.x, span, &Wiener::new(sigma)?)?),
        Quantity::PStat => exact(stationary_density(v, p.theta())?),
    })
}

pub fn run_eval(args: &EvalArgs, s: &Settings) -> Result<(), CliError> {
    write_output(s.out.as_deref(), &report(&eval(args, s)?))
}

pub fn figure_spec(args: &FigureArgs) -> Result<FigureSpec, CliError> {
    let mut spec = FigureSpec::new(args.id.parse::<FigureId>()?);
    spec.nx = args.nx.unwrap_or(spec.nx);
    spec.nv = args.nv.unwrap_or(spec.nv);
    spec.nt = args.ntau.unwrap_or(spec.nt);
    if let Some(t) = &args.thetas {
        spec.thetas = t.clone();
    }
    Ok(spec)
}

pub fn run_figure(args: &FigureArgs, s: &Settings) -> Result<(), CliError> {
    if args.id == "all" {
        let names: Vec<&str> = FigureId::ALL.iter().map(|f| f.name()).collect();
        return write_output(None, &(names.join("\n") + "\n"));
    }
    let table = render(&figure_spec(args)?, s)?;
    write_output(s.out.as_deref(), &table.to_csv())
}

#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub closed_form: f64,
    pub estimate: McEstimate,
    pub z: f64,
}

impl McReport {
    pub fn passed(&self) -> bool {
        self.z.abs() <= 3.0
    }

    pub fn render(&self) -> String {
        let e = &self.estimate;
        format!(
            "closed_form={:.16e}\nmc_mean={:.16e}\nmc_std_error={:.16e}\nz={:.6}\ncensored_fraction={:.6e}\nresult={}\n",
            self.closed_form,
            e.mean,
            e.std_error,
            self.z,
            e.censored_fraction,
            if self.passed() { "PASS" } else { "FAIL" }
        )
    }
}

pub fn mc_check(args: &McCheckArgs, s: &Settings) -> Result<McReport, CliError> {
    let p = s.params()?;
    let span = s.span_or(crate::settings::DEFAULT_SPAN);
    let v0 = args.v.unwrap_or(p.theta());
    let mut cfg = McConfig {
        n_paths: s.paths,
        dt: s.dt,
        horizon: args.horizon,
        seed: s.seed,
        return_vol_factor: args.vol_inject,
        ..McConfig::default()
    };
    let ctrl = &s.ctrl;
    let (closed_form, estimate, survival) = match args.quantity {
        McQuantity::Sp2d => {
            let tau = args.time.scaled(s.alpha)?;
            cfg.v0_mode = V0Mode::Fixed(v0);
            cfg.horizon = cfg.horizon.max(tau);
            let exact = survival_2d(&Point::new(args.x, v0, tau, span)?, &p, ctrl)?.value;
            (exact, mc_survival(args.x, tau, span, &p, &cfg)?, true)
        }
        McQuantity::SpReturn => {
            let tau = args.time.scaled(s.alpha)?;
            cfg.v0_mode = V0Mode::GammaStationary;
            cfg.horizon = cfg.horizon.max(tau);
            let exact = survival_return(args.x, tau, span, &p, ctrl)?.value;
            (exact, mc_survival(args.x, tau, span, &p, &cfg)?, true)
        }
        McQuantity::Met2d => {
            cfg.v0_mode = V0Mode::Fixed(v0);
            (met_2d(args.x, v0, span, &p, ctrl)?.value, mc_met(args.x, span, &p, &cfg)?, false)
        }
        McQuantity::MetReturn => {
            cfg.v0_mode = V0Mode::GammaStationary;
            (met_return(args.x, span, &p, ctrl)?.value, mc_met(args.x, span, &p, &cfg)?, false)
        }
    };
    let z = if survival { binomial_z(&estimate, closed_form) } else { estimate.z_score(closed_form) };
    Ok(McReport { closed_form, estimate, z })
}

/// Runs the check and reports whether it passed.
pub fn run_mc_check(args: &McCheckArgs, s: &Settings) -> Result<bool, CliError> {
    let r = mc_check(args, s)?;
    write_output(None, &r.render())?;
    Ok(r.passed())
}

pub fn run_sweep(args: &SweepArgs, s: &Settings) -> Result<(), CliError> {
    if !(args.l_min > 0.0 && args.l_max > args.l_min) || args.count < 3 {
        return Err(CliError::Domain("need 0 < l-min < l-max and count >= 3".into()));
    }
    let p = s.params()?;
    let spans = logspace(args.l_min, args.l_max, args.count);
    let r = met_return_large_span_check(args.x_frac, &spans, &p, &s.ctrl)?;
    let mut summary = String::new();
    writeln!(summary, "theta_regime={:?}", r.theta_regime).ok();
    writeln!(summary, "fitted_exponent={:.6}", r.fitted_exponent).ok();
    writeln!(summary, "prefactor={:.16e}", r.prefactor).ok();
    writeln!(summary, "r_squared={:.12}", r.r_squared).ok();
    writeln!(summary, "fit_range={:.6e},{:.6e}", r.fit_range.0, r.fit_range.1).ok();
    write_output(None, &summary)?;
    if let Some(out) = &s.out {
        let table = Table {
            header: vec!["L".into(), "T".into(), "outer_ratio".into()],
            rows: spans
                .iter()
                .zip(&r.met)
                .zip(&r.outer_ratio)
                .map(|((&l, &t), &o)| vec![l, t, o])
                .collect(),
        };
        write_output(Some(out), &table.to_csv())?;
    }
    Ok(())
}
