//! IMEX(1,1,1) time stepping with an adaptively growing grid.

use crate::diagnostics::{level_position, LevelSeries};
use crate::error::{Error, Result};
use crate::grid::{ExteriorDatum, GridState};
use crate::kernels::KernelSpec;
use crate::operator::{DiagonalTail, OperatorMatrix};
use crate::toeplitz::{levinson_solve, ToeplitzInverse, ToeplitzSystem};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Slack allowed outside `[0, 1]` before a value counts as out of bounds.
pub const CLIP_SLACK: f64 = 1e-12;
/// Tolerance of the monotonicity monitor.
pub const MONOTONE_TOL: f64 = 1e-8;

/// `f(u) = r u^β (1 - u)`, evaluated on `u` clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionSpec {
    pub beta: f64,
    pub r: f64,
}

impl ReactionSpec {
    /// `r = 0` is accepted and switches the reaction off.
    pub fn new(beta: f64, r: f64) -> Result<Self> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::param("reaction.beta", format!("must be at least 1, got {beta}")));
        }
        if !(r >= 0.0) || !r.is_finite() {
            return Err(Error::param("reaction.r", format!("must be nonnegative, got {r}")));
        }
        Ok(Self { beta, r })
    }

    pub fn eval(&self, u: f64) -> f64 {
        let c = u.clamp(0.0, 1.0);
        self.r * c.powf(self.beta) * (1.0 - c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub expand_tol: f64,
    pub expand_margin: usize,
    pub max_add: usize,
}

impl Default for StepConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            expand_tol: 1e-8,
            expand_margin: 10,
            max_add: 150,
        }
    }
}

impl StepConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param("run.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.expand_tol > 0.0 && self.expand_tol < 1.0) {
            return Err(Error::param("run.expand_tol", format!("must lie in (0, 1), got {}", self.expand_tol)));
        }
        Ok(())
    }
}

/// `u^{n+1}` from `(I + dt A) u^{n+1} = u^n + dt f(u^n) + dt g`, solved by the
/// Levinson recursion.
pub fn imex_step(
    grid: &GridState,
    matrix: &OperatorMatrix,
    reaction: &ReactionSpec,
    datum: ExteriorDatum,
) -> Result<GridState> {
    if grid.len() != matrix.order {
        return Err(Error::Dimension(format!(
            "grid has {} nodes, matrix order {}",
            grid.len(),
            matrix.order
        )));
    }
    let rhs = step_rhs(grid, matrix.dt, reaction, &matrix.exterior_rhs(datum));
    let sys = ToeplitzSystem::new(matrix.first_row.clone(), rhs)?;
    let values = levinson_solve(&sys)?;
    Ok(advanced(grid, values, matrix.dt))
}

fn step_rhs(grid: &GridState, dt: f64, reaction: &ReactionSpec, exterior: &[f64]) -> Vec<f64> {
    grid.values
        .iter()
        .zip(exterior)
        .map(|(&u, &g)| u + dt * reaction.eval(u) + g)
        .collect()
}

fn advanced(grid: &GridState, values: Vec<f64>, dt: f64) -> GridState {
    GridState {
        left_x: grid.left_x,
        dx: grid.dx,
        values,
        exterior: grid.exterior,
        time: grid.time + dt,
    }
}

/// Points added by one [`adapt_domain`] call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Growth {
    pub left: usize,
    pub right: usize,
}

impl Growth {
    pub fn any(&self) -> bool {
        self.left > 0 || self.right > 0
    }
}

/// Appends `max_add` exterior-valued points on each side whose sentinel
/// (`expand_margin` points in from the edge) deviates from the exterior
/// value by more than `expand_tol`.
pub fn adapt_domain(grid: &GridState, cfg: &StepConfig) -> (GridState, Growth) {
    let n = grid.len();
    let mut growth = Growth::default();
    if n == 0 || cfg.max_add == 0 {
        return (grid.clone(), growth);
    }
    let m = cfg.expand_margin.min(n - 1);
    let (ext_l, ext_r) = (grid.exterior.left, grid.exterior.right);
    if (grid.values[n - 1 - m] - ext_r).abs() > cfg.expand_tol {
        growth.right = cfg.max_add;
    }
    if (grid.values[m] - ext_l).abs() > cfg.expand_tol {
        growth.left = cfg.max_add;
    }
    if !growth.any() {
        return (grid.clone(), growth);
    }
    let mut values = Vec::with_capacity(n + growth.left + growth.right);
    values.extend(std::iter::repeat_n(ext_l, growth.left));
    values.extend_from_slice(&grid.values);
    values.extend(std::iter::repeat_n(ext_r, growth.right));
    let out = GridState {
        left_x: grid.left_x - growth.left as f64 * grid.dx,
        dx: grid.dx,
        values,
        exterior: grid.exterior,
        time: grid.time,
    };
    (out, growth)
}

/// Linear solver used inside [`run`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum SolverKind {
    /// Levinson recursion at every step.
    Levinson,
    /// Inverse factored once per assembly, applied by FFT at every step.
    #[default]
    Inverse,
}

impl SolverKind {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "levinson" => Some(Self::Levinson),
            "inverse" => Some(Self::Inverse),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Levinson => "levinson",
            Self::Inverse => "inverse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialDatum {
    /// `a 1_{(-∞, b]}`.
    Indicator { a: f64, b: f64 },
    /// `a` left of `b - 5 dx`, `0` right of `b + 5 dx`, linear between.
    Ramp { a: f64, b: f64 },
}

impl InitialDatum {
    pub fn eval(&self, x: f64, dx: f64) -> f64 {
        match *self {
            InitialDatum::Indicator { a, b } => {
                if x <= b {
                    a
                } else {
                    0.0
                }
            }
            InitialDatum::Ramp { a, b } => a * ((b + 5.0 * dx - x) / (10.0 * dx)).clamp(0.0, 1.0),
        }
    }
}

/// Everything [`run`] needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub kernel: KernelSpec,
    pub reaction: ReactionSpec,
    pub step: StepConfig,
    pub dx: f64,
    pub domain: (f64, f64),
    pub t_end: f64,
    pub split_gamma: f64,
    pub diagonal_tail: DiagonalTail,
    pub solver: SolverKind,
    pub initial: InitialDatum,
    pub exterior: ExteriorDatum,
    pub levels: Vec<f64>,
    /// Level positions are sampled every this many time units.
    pub level_every: f64,
    pub snapshot_every: f64,
    /// Extra snapshot times on top of the regular cadence.
    pub snapshot_times: Vec<f64>,
    /// The run aborts once domain growth would pass this many nodes.
    pub max_nodes: usize,
}

impl RunSpec {
    pub fn initial_grid(&self) -> Result<GridState> {
        let (a, b) = self.domain;
        if !(b > a) {
            return Err(Error::param("run.domain", format!("need left < right, got [{a}, {b}]")));
        }
        if !(self.dx > 0.0) {
            return Err(Error::param("run.dx", format!("must be positive, got {}", self.dx)));
        }
        let len = ((b - a) / self.dx).round() as usize + 1;
        if len < 3 {
            return Err(Error::param("run.domain", "fewer than 3 grid points"));
        }
        let dx = self.dx;
        let init = self.initial;
        Ok(GridState::from_fn(a, dx, len, self.exterior, |x| init.eval(x, dx)))
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.step.dt).round() as usize
    }

    /// Step indices at which snapshots are taken (always includes 0).
    pub fn snapshot_steps(&self) -> BTreeSet<usize> {
        let dt = self.step.dt;
        let last = self.steps();
        let mut out = BTreeSet::from([0]);
        if self.snapshot_every > 0.0 {
            let mut k = 1usize;
            loop {
                let i = (k as f64 * self.snapshot_every / dt).round() as usize;
                if i > last {
                    break;
                }
                out.insert(i);
                k += 1;
            }
        }
        for &t in &self.snapshot_times {
            let i = (t / dt).round() as usize;
            if t >= 0.0 && i <= last {
                out.insert(i);
            }
        }
        out
    }

    fn level_stride(&self) -> usize {
        ((self.level_every / self.step.dt).round() as usize).max(1)
    }
}

/// Running extremes of the structural monitors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monitors {
    pub min_value: f64,
    pub max_value: f64,
    /// Largest rise `u_{j+1} - u_j` seen on any checked profile.
    pub max_rise: f64,
    /// Profiles with a rise above [`MONOTONE_TOL`].
    pub monotone_violations: usize,
    /// Profiles with a value outside `[-CLIP_SLACK, 1 + CLIP_SLACK]`.
    pub bound_flags: usize,
    pub checked_profiles: usize,
    pub steps: usize,
    pub assemblies: usize,
    pub max_len: usize,
}

impl Default for Monitors {
    fn default() -> Self {
        Self {
            min_value: f64::INFINITY,
            max_value: f64::NEG_INFINITY,
            max_rise: 0.0,
            monotone_violations: 0,
            bound_flags: 0,
            checked_profiles: 0,
            steps: 0,
            assemblies: 0,
            max_len: 0,
        }
    }
}

impl Monitors {
    fn check(&mut self, grid: &GridState) {
        let v = &grid.values;
        let (lo, hi) = v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
        self.min_value = self.min_value.min(lo);
        self.max_value = self.max_value.max(hi);
        if lo < -CLIP_SLACK || hi > 1.0 + CLIP_SLACK {
            self.bound_flags += 1;
        }
        let rise = v.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
        self.max_rise = self.max_rise.max(rise);
        if rise > MONOTONE_TOL {
            self.monotone_violations += 1;
        }
        self.checked_profiles += 1;
        self.max_len = self.max_len.max(v.len());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RunStatus {
    Completed,
    Aborted { time: f64, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub levels: Vec<LevelSeries>,
    pub snapshots: Vec<GridState>,
    pub monitors: Monitors,
    pub status: RunStatus,
    pub final_state: GridState,
}

struct Stepper {
    matrix: OperatorMatrix,
    inverse: Option<ToeplitzInverse>,
    exterior: Vec<f64>,
}

impl Stepper {
    fn new(spec: &RunSpec, order: usize) -> Result<Self> {
        let matrix = OperatorMatrix::assemble(
            &spec.kernel,
            spec.split_gamma,
            spec.dx,
            spec.step.dt,
            order,
            spec.diagonal_tail,
        )?;
        let inverse = match spec.solver {
            SolverKind::Levinson => None,
            SolverKind::Inverse => Some(ToeplitzInverse::new(&matrix.first_row)?),
        };
        let exterior = matrix.exterior_rhs(spec.exterior);
        Ok(Self {
            matrix,
            inverse,
            exterior,
        })
    }

    fn step(&self, grid: &GridState, reaction: &ReactionSpec) -> Result<GridState> {
        let rhs = step_rhs(grid, self.matrix.dt, reaction, &self.exterior);
        let values = match &self.inverse {
            Some(inv) => inv.solve(&rhs)?,
            None => levinson_solve(&ToeplitzSystem::new(self.matrix.first_row.clone(), rhs)?)?,
        };
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at node {bad}")));
        }
        Ok(advanced(grid, values, self.matrix.dt))
    }
}

/// Runs to `t_end`, collecting every snapshot in memory.
pub fn run(spec: &RunSpec) -> Result<Trajectory> {
    let mut snapshots = Vec::new();
    let mut traj = run_with(spec, |g| {
        snapshots.push(g.clone());
        Ok(())
    })?;
    traj.snapshots = snapshots;
    Ok(traj)
}

/// Runs to `t_end`, handing each snapshot to `sink` instead of storing it.
///
/// Invalid configurations are returned as errors. A failure during stepping
/// ends the run early with [`RunStatus::Aborted`] and whatever was recorded.
pub fn run_with(spec: &RunSpec, mut sink: impl FnMut(&GridState) -> Result<()>) -> Result<Trajectory> {
    spec.step.validate()?;
    for &l in &spec.levels {
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::param("run.levels", format!("levels must lie in (0, 1), got {l}")));
        }
    }
    let mut grid = spec.initial_grid()?;
    let dt = spec.step.dt;
    let steps = spec.steps();
    let snaps = spec.snapshot_steps();
    let stride = spec.level_stride();
    let mut levels: Vec<LevelSeries> = spec.levels.iter().map(|&l| LevelSeries::new(l)).collect();
    let mut monitors = Monitors::default();

    let record_levels = |grid: &GridState, levels: &mut Vec<LevelSeries>| {
        for series in levels.iter_mut() {
            let x = level_position(grid, series.lambda).x().unwrap_or(f64::NAN);
            series.push(grid.time, x);
        }
    };

    monitors.check(&grid);
    record_levels(&grid, &mut levels);
    sink(&grid)?;

    let mut stepper: Option<Stepper> = None;
    let mut status = RunStatus::Completed;
    for i in 1..=steps {
        let (grown, growth) = adapt_domain(&grid, &spec.step);
        if grown.len() > spec.max_nodes {
            status = RunStatus::Aborted {
                time: grid.time,
                reason: format!("domain growth to {} nodes exceeds the cap of {}", grown.len(), spec.max_nodes),
            };
            break;
        }
        grid = grown;
        if growth.any() || stepper.is_none() {
            match Stepper::new(spec, grid.len()) {
                Ok(s) => stepper = Some(s),
                Err(e) => {
                    status = RunStatus::Aborted {
                        time: grid.time,
                        reason: e.to_string(),
                    };
                    break;
                }
            }
            monitors.assemblies += 1;
        }
        let next = stepper.as_ref().expect("assembled above").step(&grid, &spec.reaction);
        match next {
            Ok(mut g) => {
                // Recompute from the index so the clock does not drift.
                g.time = i as f64 * dt;
                grid = g;
            }
            Err(e) => {
                status = RunStatus::Aborted {
                    time: grid.time,
                    reason: e.to_string(),
                };
                break;
            }
        }
        monitors.steps = i;
        let snap = snaps.contains(&i);
        if i % stride == 0 || snap {
            monitors.check(&grid);
            record_levels(&grid, &mut levels);
        }
        if snap {
            sink(&grid)?;
        }
    }
    Ok(Trajectory {
        levels,
        snapshots: Vec::new(),
        monitors,
        status,
        final_state: grid,
    })
}
