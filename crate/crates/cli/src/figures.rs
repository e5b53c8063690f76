//! CSV datasets for each figure, evaluated from the exact closed forms.

use std::fmt::Write as _;
use std::str::FromStr;

use heston_escape::{
    met_2d, met_return, met_wiener, survival_2d, survival_return, survival_return_longtime,
    survival_return_shorttime, survival_wiener, Params, Point, Wiener,
};
use rayon::prelude::*;

use crate::error::CliError;
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    SpSurface,
    SpVsV,
    MetSurface,
    MetVsX,
    MetVsV,
    SpReturnSurface,
    SpReturnVsTau,
    MetReturnVsX,
    MetVsLSmallTheta,
    MetVsLLargeTheta,
    SpVsXWiener,
    SpVsTauWiener,
}

impl FigureId {
    pub const ALL: [FigureId; 12] = [
        FigureId::SpSurface,
        FigureId::SpVsV,
        FigureId::MetSurface,
        FigureId::MetVsX,
        FigureId::MetVsV,
        FigureId::SpReturnSurface,
        FigureId::SpReturnVsTau,
        FigureId::MetReturnVsX,
        FigureId::MetVsLSmallTheta,
        FigureId::MetVsLLargeTheta,
        FigureId::SpVsXWiener,
        FigureId::SpVsTauWiener,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FigureId::SpSurface => "sp_surface",
            FigureId::SpVsV => "sp_vs_v",
            FigureId::MetSurface => "met_surface",
            FigureId::MetVsX => "met_vs_x",
            FigureId::MetVsV => "met_vs_v",
            FigureId::SpReturnSurface => "sp_return_surface",
            FigureId::SpReturnVsTau => "sp_return_vs_tau",
            FigureId::MetReturnVsX => "met_return_vs_x",
            FigureId::MetVsLSmallTheta => "met_vs_L_small_theta",
            FigureId::MetVsLLargeTheta => "met_vs_L_large_theta",
            FigureId::SpVsXWiener => "sp_vs_x_wiener",
            FigureId::SpVsTauWiener => "sp_vs_tau_wiener",
        }
    }

    fn default_thetas(&self) -> Vec<f64> {
        match self {
            FigureId::MetVsLSmallTheta => vec![0.25, 0.5, 0.75],
            FigureId::MetVsLLargeTheta => vec![1.0, 1.25, 2.0],
            _ => vec![0.5, 1.0, 1.25],
        }
    }
}

impl FromStr for FigureId {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        FigureId::ALL
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| CliError::Domain(format!("unknown figure `{s}`")))
    }
}

/// Grid and parameter choices for one figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureSpec {
    pub id: FigureId,
    /// Points along the return axis.
    pub nx: usize,
    /// Points along the volatility axis.
    pub nv: usize,
    /// Points along the time or span axis.
    pub nt: usize,
    pub thetas: Vec<f64>,
}

impl FigureSpec {
    pub fn new(id: FigureId) -> Self {
        let (nx, nv, nt) = match id {
            FigureId::SpSurface | FigureId::SpReturnSurface => (41, 41, 41),
            FigureId::MetSurface => (21, 21, 21),
            FigureId::MetVsV => (2, 29, 2),
            FigureId::MetVsLSmallTheta | FigureId::MetVsLLargeTheta => (2, 2, 29),
            FigureId::SpReturnVsTau | FigureId::SpVsTauWiener => (2, 2, 101),
            _ => (41, 41, 41),
        };
        Self {
            id,
            nx,
            nv,
            nt,
            thetas: id.default_thetas(),
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.nx < 2 || self.nv < 2 || self.nt < 2 {
            return Err(CliError::Domain("grid counts must be at least 2".into()));
        }
        if self.thetas.is_empty() {
            return Err(CliError::Domain("theta list must not be empty".into()));
        }
        Ok(())
    }
}

/// A rectangular CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{v:.16e}").expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.log10(), hi.log10(), n).into_iter().map(|e| 10f64.powf(e)).collect()
}

/// Evaluates `row` for every index in parallel, keeping index order.
fn rows<F>(n: usize, row: F) -> Result<Vec<Vec<f64>>, CliError>
where
    F: Fn(usize) -> Result<Vec<f64>, CliError> + Sync + Send,
{
    (0..n).into_par_iter().map(row).collect()
}

fn theta_label(prefix: &str, theta: f64) -> String {
    format!("{prefix}[theta={theta}]")
}

/// Builds the dataset of one figure.
pub fn render(spec: &FigureSpec, settings: &Settings) -> Result<Table, CliError> {
    spec.validate()?;
    let ctrl = settings.ctrl;
    let family: Vec<Params> = spec
        .thetas
        .iter()
        .map(|&t| settings.params_with_theta(t))
        .collect::<Result<_, _>>()?;
    match spec.id {
        FigureId::SpSurface => {
            let p = settings.params()?;
            let span = settings.span_or(0.01);
            let xs = linspace(-span / 2.0, span / 2.0, spec.nx);
            let vs = linspace(0.0, 10.0, spec.nv);
            let tau = 0.1;
            let grid: Vec<(f64, f64)> = xs.iter().flat_map(|&x| vs.iter().map(move |&v| (x, v))).collect();
            Ok(Table {
                header: vec!["x".into(), "v".into(), "S".into()],
                rows: rows(grid.len(), |i| {
                    let (x, v) = grid[i];
                    Ok(vec![x, v, survival_2d(&Point::new(x, v, tau, span)?, &p, &ctrl)?.value])
                })?,
            })
        }
        FigureId::SpVsV => {
            let vs = linspace(0.0, 10.0, spec.nv);
            let panels = [(0.1, settings.span_or(0.01)), (100.0, 1.0)];
            let mut header = vec!["v".to_string()];
            for &(tau, span) in &panels {
                for t in &spec.thetas {
                    header.push(format!("S[tau={tau},L={span},theta={t}]"));
                }
            }
            Ok(Table {
                header,
                rows: rows(vs.len(), |i| {
                    let v = vs[i];
                    let mut row = vec![v];
                    for &(tau, span) in &panels {
                        for p in &family {
                            row.push(survival_2d(&Point::new(0.0, v, tau, span)?, p, &ctrl)?.value);
                        }
                    }
                    Ok(row)
                })?,
            })
        }
        FigureId::MetSurface => {
            let p = settings.params()?;
            let span = settings.span_or(0.01);
            let xs = linspace(-span / 2.0, span / 2.0, spec.nx);
            let vs = linspace(0.0, 10.0, spec.nv);
            let grid: Vec<(f64, f64)> = xs.iter().flat_map(|&x| vs.iter().map(move |&v| (x, v))).collect();
            Ok(Table {
                header: vec!["x".into(), "v".into(), "T".into()],
                rows: rows(grid.len(), |i| {
                    let (x, v) = grid[i];
                    Ok(vec![x, v, met_2d(x, v, span, &p, &ctrl)?.value])
                })?,
            })
        }
        FigureId::MetVsX => {
            let span = settings.span_or(0.01);
            let xs = linspace(-span / 2.0, span / 2.0, spec.nx);
            let vols = [1300.0, 0.001];
            let mut header = vec!["x".to_string()];
            for v in vols {
                for t in &spec.thetas {
                    header.push(format!("T[v={v},theta={t}]"));
                }
            }
            Ok(Table {
                header,
                rows: rows(xs.len(), |i| {
                    let mut row = vec![xs[i]];
                    for v in vols {
                        for p in &family {
                            row.push(met_2d(xs[i], v, span, p, &ctrl)?.value);
                        }
                    }
                    Ok(row)
                })?,
            })
        }
        FigureId::MetVsV => {
            let span = settings.span_or(0.01);
            let vs = logspace(1e-3, 1e4, spec.nv);
            let mut header = vec!["v".to_string()];
            header.extend(spec.thetas.iter().map(|&t| theta_label("T", t)));
            Ok(Table {
                header,
                rows: rows(vs.len(), |i| {
                    let mut row = vec![vs[i]];
                    for p in &family {
                        row.push(met_2d(0.0, vs[i], span, p, &ctrl)?.value);
                    }
                    Ok(row)
                })?,
            })
        }
        FigureId::SpReturnSurface => {
            let p = settings.params()?;
            let span = settings.span_or(0.01);
            let xs = linspace(-span / 2.0, span / 2.0, spec.nx);
            let taus = linspace(0.0, 0.05, spec.nt);
            let grid: Vec<(f64, f64)> = xs.iter().flat_map(|&x| taus.iter().map(move |&t| (x, t))).collect();
            Ok(Table {
                header: vec!["x".into(), "tau".into(), "S".into()],
                rows: rows(grid.len(), |i| {
                    let (x, tau) = grid[i];
                    Ok(vec![x, tau, survival_return(x, tau, span, &p, &ctrl)?.value])
                })?,
            })
        }
        FigureId::SpReturnVsTau => {
            let span = settings.span_or(0.01);
            let taus = linspace(0.0, 0.1, spec.nt);
            let last = family.last().expect("validated non-empty");
            let last_theta = spec.thetas[spec.thetas.len() - 1];
            let mut header = vec!["tau".to_string()];
            header.extend(spec.thetas.iter().map(|&t| theta_label("S", t)));
            header.push(theta_label("S_long", last_theta));
            header.push(theta_label("S_short", last_theta));
            Ok(Table {
                header,
                rows: rows(taus.len(), |i| {
                    let tau = taus[i];
                    let mut row = vec![tau];
                    for p in &family {
                        row.push(survival_return(0.0, tau, span, p, &ctrl)?.value);
                    }
                    row.push(survival_return_longtime(0.0, tau, span, last, &ctrl)?.value);
                    row.push(survival_return_shorttime(0.0, tau, span, last, &ctrl)?.value);
                    Ok(row)
                })?,
            })
        }
        FigureId::MetReturnVsX => {
            let fracs = linspace(-0.5, 0.5, spec.nx);
            let spans = [0.1, 0.01];
            let wiener = Wiener::new(settings.m)?;
            let mut header = vec!["x_over_L".to_string()];
            for span in spans {
                for t in &spec.thetas {
                    header.push(format!("T[L={span},theta={t}]"));
                }
                header.push(format!("T_wiener[L={span}]"));
            }
            Ok(Table {
                header,
                rows: rows(fracs.len(), |i| {
                    let mut row = vec![fracs[i]];
                    for span in spans {
                        let x = fracs[i] * span;
                        for p in &family {
                            row.push(met_return(x, span, p, &ctrl)?.value);
                        }
                        row.push(met_wiener(x, span, &wiener)?);
                    }
                    Ok(row)
                })?,
            })
        }
        FigureId::MetVsLSmallTheta | FigureId::MetVsLLargeTheta => {
            let spans = logspace(1e-5, 1e2, spec.nt);
            let m2 = settings.m * settings.m;
            let mut header = vec!["L".to_string()];
            header.extend(spec.thetas.iter().map(|&t| theta_label("T", t)));
            header.push("T_outer".into());
            Ok(Table {
                header,
                rows: rows(spans.len(), |i| {
                    let span = spans[i];
                    let mut row = vec![span];
                    for p in &family {
                        row.push(met_return(0.0, span, p, &ctrl)?.value);
                    }
                    row.push(span * span / (4.0 * m2));
                    Ok(row)
                })?,
            })
        }
        FigureId::SpVsXWiener => {
            let span = settings.span_or(0.05);
            let days = 5.0;
            let fracs = linspace(-0.5, 0.5, spec.nx);
            let wiener = Wiener::new(settings.m)?;
            let mut header = vec!["x_over_L".to_string()];
            header.extend(spec.thetas.iter().map(|&t| theta_label("S", t)));
            header.push("S_wiener".into());
            Ok(Table {
                header,
                rows: rows(fracs.len(), |i| {
                    let x = fracs[i] * span;
                    let mut row = vec![fracs[i]];
                    for p in &family {
                        row.push(survival_return(x, p.alpha() * days, span, p, &ctrl)?.value);
                    }
                    row.push(survival_wiener(x, days, span, &wiener, &ctrl)?.value);
                    Ok(row)
                })?,
            })
        }
        FigureId::SpVsTauWiener => {
            let p = settings.params()?;
            let span = settings.span_or(0.01);
            let taus = linspace(0.0, 0.05, spec.nt);
            let wiener = Wiener::new(settings.m)?;
            Ok(Table {
                header: vec!["tau".into(), "S".into(), "S_wiener".into()],
                rows: rows(taus.len(), |i| {
                    let tau = taus[i];
                    Ok(vec![
                        tau,
                        survival_return(0.0, tau, span, &p, &ctrl)?.value,
                        survival_wiener(0.0, tau / p.alpha(), span, &wiener, &ctrl)?.value,
                    ])
                })?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in FigureId::ALL {
            assert_eq!(id.name().parse::<FigureId>().unwrap(), id);
        }
        assert!("fig1".parse::<FigureId>().is_err());
    }

    #[test]
    fn grids_hit_their_end_points() {
        let g = linspace(-0.005, 0.005, 41);
        assert_eq!((g[0], g[40]), (-0.005, 0.005));
        let l = logspace(1e-5, 1e2, 29);
        assert_eq!(l[28], 100.0);
        assert!((l[0] - 1e-5).abs() < 1e-20);
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let t = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec![0.1, -2.0]],
        };
        assert_eq!(t.to_csv(), "a,b\n1.0000000000000001e-1,-2.0000000000000000e0\n");
    }

    #[test]
    fn rejects_degenerate_specs() {
        let mut spec = FigureSpec::new(FigureId::MetVsV);
        spec.nv = 1;
        assert!(render(&spec, &Settings::default()).is_err());
        let mut spec = FigureSpec::new(FigureId::MetVsV);
        spec.thetas.clear();
        assert!(render(&spec, &Settings::default()).is_err());
    }
}
