//! Observables extracted from profiles and trajectories.

use crate::error::{Error, Result};
use crate::grid::GridState;
use serde::{Deserialize, Serialize};

pub use crate::operator::{symbol_error, symbol_error_with};

/// Outcome of a level-set query on one profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevelPosition {
    /// Rightmost downward crossing, linearly interpolated. `crossings` counts
    /// every change of side along the grid.
    Position { x: f64, crossings: usize },
    /// `u >= λ` at every node.
    AllAbove,
    /// The last node is still at or above `λ` although some node is below:
    /// the supremum is not resolved on the grid.
    AboveAtEdge { crossings: usize },
    /// `u < λ` everywhere.
    None,
}

impl LevelPosition {
    pub fn x(&self) -> Option<f64> {
        match *self {
            LevelPosition::Position { x, .. } => Some(x),
            _ => None,
        }
    }
}

pub fn level_position_on(values: &[f64], left_x: f64, dx: f64, lambda: f64) -> LevelPosition {
    let above = |v: f64| v >= lambda;
    let crossings = values.windows(2).filter(|p| above(p[0]) != above(p[1])).count();
    match values.iter().rposition(|&v| above(v)) {
        None => LevelPosition::None,
        Some(j) if j + 1 == values.len() => {
            if crossings == 0 {
                LevelPosition::AllAbove
            } else {
                LevelPosition::AboveAtEdge { crossings }
            }
        }
        Some(j) => {
            let (hi, lo) = (values[j], values[j + 1]);
            let x = left_x + dx * (j as f64 + (hi - lambda) / (hi - lo));
            LevelPosition::Position { x, crossings }
        }
    }
}

/// `sup { x : u(x) >= λ }` resolved on the grid.
pub fn level_position(grid: &GridState, lambda: f64) -> LevelPosition {
    level_position_on(&grid.values, grid.left_x, grid.dx, lambda)
}

/// Time series of one level line; `NaN` marks times without a position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSeries {
    pub lambda: f64,
    pub samples: Vec<(f64, f64)>,
}

impl LevelSeries {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            samples: Vec::new(),
        }
    }

    pub fn from_fn(lambda: f64, times: impl IntoIterator<Item = f64>, x: impl Fn(f64) -> f64) -> Self {
        Self {
            lambda,
            samples: times.into_iter().map(|t| (t, x(t))).collect(),
        }
    }

    pub fn push(&mut self, t: f64, x: f64) {
        self.samples.push((t, x));
    }

    pub fn last_time(&self) -> Option<f64> {
        self.samples.last().map(|s| s.0)
    }

    /// Largest backward step of `x` between consecutive defined samples,
    /// counted from the first defined one. Zero for a nondecreasing series.
    pub fn max_decrease(&self) -> f64 {
        let mut worst = 0.0f64;
        let mut prev: Option<f64> = None;
        for &(_, x) in &self.samples {
            if !x.is_finite() {
                continue;
            }
            if let Some(p) = prev {
                worst = worst.max(p - x);
            }
            prev = Some(x);
        }
        worst
    }

    fn window(&self, window: (f64, f64)) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.samples
            .iter()
            .copied()
            .filter(move |&(t, x)| t >= window.0 && t <= window.1 && x.is_finite())
    }
}

/// Last half of the recorded times, never starting before `t = 5`.
pub fn default_exponent_window(series: &LevelSeries) -> (f64, f64) {
    let end = series.last_time().unwrap_or(0.0);
    ((0.5 * end).max(5.0), end)
}

/// Ordinary least squares `y = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
    pub slope_stderr: f64,
    pub samples: usize,
}

pub fn fit_line(points: &[(f64, f64)]) -> Result<LineFit> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: n });
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let rms = (sse / nf).sqrt();
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { f64::NAN };
    Ok(LineFit {
        slope,
        intercept,
        rms,
        slope_stderr,
        samples: n,
    })
}

/// Log-log slope of `x_λ(t)` over `t_window`.
pub fn exponent_fit(series: &LevelSeries, t_window: (f64, f64)) -> Result<LineFit> {
    let pts: Vec<(f64, f64)> = series.window(t_window).collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            got: pts.len(),
        });
    }
    if let Some(&(t, x)) = pts.iter().find(|&&(t, x)| !(t > 0.0 && x > 0.0)) {
        return Err(Error::Domain(format!("log-log fit needs t, x > 0; got ({t}, {x})")));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, x)| (t.ln(), x.ln())).collect();
    fit_line(&logs)
}

/// `(max - min) / mean` of `x_λ(t) / t` over the window; small for fronts
/// moving at constant speed.
pub fn speed_variation(series: &LevelSeries, t_window: (f64, f64)) -> Result<f64> {
    let v: Vec<f64> = series.window(t_window).filter(|p| p.0 > 0.0).map(|(t, x)| x / t).collect();
    if v.len() < 5 {
        return Err(Error::InsufficientSamples {
            needed: 5,
            got: v.len(),
        });
    }
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    Ok((hi - lo) / mean.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub c: f64,
    pub exponent: f64,
    pub window: (f64, f64),
    /// Relative RMS misfit `sqrt(mean(((C x^e - u) / u)^2))`.
    pub residual: f64,
    pub points: usize,
}

/// Amplitude fit with the exponent pinned to `-2s` and a free log-log fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailFits {
    pub fixed: TailFit,
    pub free: TailFit,
}

fn tail_points(values: &[f64], left_x: f64, dx: f64, window: (f64, f64)) -> Result<Vec<(f64, f64)>> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(j, &u)| (left_x + j as f64 * dx, u))
        .filter(|&(x, u)| x > 0.0 && u > window.0 && u < window.1)
        .collect();
    if pts.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if pts.len() < 10 {
        return Err(Error::InsufficientSamples {
            needed: 10,
            got: pts.len(),
        });
    }
    Ok(pts)
}

fn relative_rms(pts: &[(f64, f64)], model: impl Fn(f64) -> f64) -> f64 {
    let ss: f64 = pts.iter().map(|&(x, u)| ((model(x) - u) / u).powi(2)).sum();
    (ss / pts.len() as f64).sqrt()
}

pub fn tail_fit_fixed_on(values: &[f64], left_x: f64, dx: f64, s: f64, window: (f64, f64)) -> Result<TailFit> {
    let pts = tail_points(values, left_x, dx, window)?;
    let num: f64 = pts.iter().map(|&(x, u)| u * x.powf(-2.0 * s)).sum();
    let den: f64 = pts.iter().map(|&(x, _)| x.powf(-4.0 * s)).sum();
    let c = num / den;
    Ok(TailFit {
        c,
        exponent: -2.0 * s,
        window,
        residual: relative_rms(&pts, |x| c * x.powf(-2.0 * s)),
        points: pts.len(),
    })
}

pub fn tail_fit_on(values: &[f64], left_x: f64, dx: f64, s: f64, window: (f64, f64)) -> Result<TailFits> {
    let fixed = tail_fit_fixed_on(values, left_x, dx, s, window)?;
    let pts = tail_points(values, left_x, dx, window)?;
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(x, u)| (x.ln(), u.ln())).collect();
    let line = fit_line(&logs)?;
    let (c, e) = (line.intercept.exp(), line.slope);
    let free = TailFit {
        c,
        exponent: e,
        window,
        residual: relative_rms(&pts, |x| c * x.powf(e)),
        points: pts.len(),
    };
    Ok(TailFits { fixed, free })
}

/// Tail fits of the nodes with `x > 0` and `u` strictly inside `window`.
pub fn tail_fit(grid: &GridState, s: f64, window: (f64, f64)) -> Result<TailFits> {
    tail_fit_on(&grid.values, grid.left_x, grid.dx, s, window)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flattening {
    /// `(t, C(t))` from the fixed-exponent tail fit of each snapshot.
    pub series: Vec<(f64, f64)>,
    pub late_window: (f64, f64),
    pub late_fit: LineFit,
    /// `max |C - (a + b t)| / C` over the late window.
    pub max_rel_deviation: f64,
}

impl Flattening {
    /// True when `C(t)` strictly increases over every pair of consecutive
    /// samples with `t >= t0`.
    pub fn strictly_increasing_after(&self, t0: f64) -> bool {
        let tail: Vec<f64> = self.series.iter().filter(|p| p.0 >= t0).map(|p| p.1).collect();
        tail.windows(2).all(|w| w[1] > w[0])
    }
}

/// `C(t)` of `u ~ C x^{-2s}` across snapshots, with a linear fit over
/// `late_window`.
pub fn flattening_series(
    snapshots: &[GridState],
    s: f64,
    window: (f64, f64),
    late_window: (f64, f64),
) -> Result<Flattening> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: snapshots.len(),
        });
    }
    let series = snapshots
        .iter()
        .map(|g| Ok((g.time, tail_fit_fixed_on(&g.values, g.left_x, g.dx, s, window)?.c)))
        .collect::<Result<Vec<_>>>()?;
    flattening_from_series(series, late_window)
}

pub fn flattening_from_series(series: Vec<(f64, f64)>, late_window: (f64, f64)) -> Result<Flattening> {
    let late: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|p| p.0 >= late_window.0 && p.0 <= late_window.1)
        .collect();
    if late.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: late.len(),
        });
    }
    let late_fit = fit_line(&late)?;
    let max_rel_deviation = late
        .iter()
        .map(|&(t, c)| (c - late_fit.intercept - late_fit.slope * t).abs() / c.abs())
        .fold(0.0, f64::max);
    Ok(Flattening {
        series,
        late_window,
        late_fit,
        max_rel_deviation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Exponential,
    Accelerating,
    Critical,
    LinearFront,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Exponential => "exponential",
            Regime::Accelerating => "accelerating",
            Regime::Critical => "critical",
            Regime::LinearFront => "linear-front",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `β / (2s(β-1))`; absent for `β = 1`.
    pub exponent_p: Option<f64>,
    /// Exponent `s` at which `p = 1` for this `β`.
    pub critical_s: Option<f64>,
}

impl RegimeReport {
    /// Key/value text block.
    pub fn to_text(&self) -> String {
        let mut out = format!("regime = {}\n", self.regime.label());
        if let Some(p) = self.exponent_p {
            out += &format!("exponent_p = {p}\n");
        }
        if let Some(s) = self.critical_s {
            out += &format!("critical_s = {s}\n");
        }
        out
    }

    /// One-line summary such as `accelerating, p=1.5`.
    pub fn summary(&self) -> String {
        match self.exponent_p {
            Some(p) => format!("{}, p={p}", self.regime.label()),
            None => self.regime.label().to_string(),
        }
    }
}

/// Tolerance on `|p - 1|` for the critical case.
pub const CRITICAL_TOL: f64 = 1e-12;

pub fn regime_classify(s: f64, beta: f64) -> Result<RegimeReport> {
    if !(s > 0.0) {
        return Err(Error::param("kernel.s", format!("must be positive, got {s}")));
    }
    if !(beta >= 1.0) {
        return Err(Error::param("reaction.beta", format!("must be at least 1, got {beta}")));
    }
    if beta == 1.0 {
        return Ok(RegimeReport {
            regime: Regime::Exponential,
            exponent_p: None,
            critical_s: None,
        });
    }
    let p = beta / (2.0 * s * (beta - 1.0));
    let regime = if (p - 1.0).abs() <= CRITICAL_TOL {
        Regime::Critical
    } else if p > 1.0 {
        Regime::Accelerating
    } else {
        Regime::LinearFront
    };
    Ok(RegimeReport {
        regime,
        exponent_p: Some(p),
        critical_s: Some(0.5 + 0.5 / (beta - 1.0)),
    })
}
