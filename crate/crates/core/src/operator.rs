//! Discretisation of the nonlocal operator
//!
//! ```text
//!   D[u](x) = ∫_0^∞ (u(x+z) + u(x-z) - 2u(x)) J(z) dz
//! ```
//!
//! on a uniform grid with `n` interior nodes. The integral is cut at the
//! radius `R = n dx`. On `[0, R]` it becomes a weighted sum over node
//! offsets `z_k = k dx`. Beyond `R` the exterior datum and the kernel tail
//! mass are used.
//!
//! The weights depend on the kernel:
//! - fractional kernels use the singularity-splitting weighted trapezoid rule
//!   with exponent `γ ∈ (2s, 2)`;
//! - integrable kernels use product integration against the piecewise-linear
//!   interpolant.
//!
//! Either way the operator is `Σ_k w_k (u_{j-k} - 2u_j + u_{j+k})`, so the
//! implicit stepping matrix `I + dt A` is symmetric Toeplitz.

use crate::error::{Error, Result};
use crate::grid::{ExteriorDatum, GridState};
use crate::kernels::{KernelKind, KernelSpec};
use crate::quadrature::{integrate, integrate_with_breaks, QuadOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the kernel mass beyond the truncation radius enters the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DiagonalTail {
    /// `2 ∫_R^∞ J` with `R = n dx`. This is consistent with the exterior
    /// right-hand side, so constants are annihilated.
    #[default]
    Consistent,
    /// `C (1-s)/s` inside the bracket scaled by `C dt / ((1-s) dx^{2s})`,
    /// i.e. the tail mass at radius `dx`. Does not preserve constants.
    Printed,
}

impl DiagonalTail {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "consistent" => Some(Self::Consistent),
            "printed" => Some(Self::Printed),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Consistent => "consistent",
            Self::Printed => "printed",
        }
    }
}

/// Node weights `w_1..w_n` (index `k-1` holds `w_k`) and the one-sided kernel
/// mass beyond `radius`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeWeights {
    pub w: Vec<f64>,
    pub tail: f64,
    pub radius: f64,
}

pub fn default_split_gamma(s: f64) -> f64 {
    1.0 + s
}

pub(crate) fn check_split_gamma(s: f64, gamma: f64) -> Result<()> {
    if !(gamma > 2.0 * s && gamma < 2.0) {
        return Err(Error::param(
            "operator.split_gamma",
            format!("must lie in (2s, 2) = ({}, 2), got {gamma}", 2.0 * s),
        ));
    }
    Ok(())
}

/// Dimensionless splitting weights: `w_k dx^{2s}` for unit kernel constant.
pub fn splitting_weights(s: f64, gamma: f64, n: usize) -> Result<Vec<f64>> {
    check_split_gamma(s, gamma)?;
    if n < 2 {
        return Err(Error::param("M", format!("need at least 2 interior nodes, got {n}")));
    }
    let nu = gamma - 2.0 * s;
    let p = |k: usize| (k as f64).powf(nu);
    let mut w = Vec::with_capacity(n);
    for k in 1..n {
        w.push((p(k + 1) - p(k - 1)) / (2.0 * nu * (k as f64).powf(gamma)));
    }
    w.push((p(n) - p(n - 1)) / (2.0 * nu * (n as f64).powf(gamma)));
    Ok(w)
}

/// Weights for `spec` on `n` offsets of spacing `dx`. `split_gamma` applies
/// to fractional kernels only.
pub fn node_weights(spec: &KernelSpec, split_gamma: f64, dx: f64, n: usize) -> Result<NodeWeights> {
    if !(dx > 0.0) {
        return Err(Error::param("run.dx", format!("must be positive, got {dx}")));
    }
    let radius = n as f64 * dx;
    match spec.kind {
        KernelKind::Fractional { norm_const } => {
            let scale = norm_const * dx.powf(-2.0 * spec.s);
            let w = splitting_weights(spec.s, split_gamma, n)?
                .into_iter()
                .map(|v| v * scale)
                .collect();
            let tail = spec.tail_mass_from(radius)?;
            Ok(NodeWeights { w, tail, radius })
        }
        _ => {
            if spec.is_singular() {
                return Err(Error::param(
                    "kernel.kind",
                    "singular composite kernels have no product-integration path",
                ));
            }
            if n < 2 {
                return Err(Error::param("M", format!("need at least 2 interior nodes, got {n}")));
            }
            let mut w = Vec::with_capacity(n);
            for k in 1..=n {
                let zk = k as f64 * dx;
                let (zl, zr) = (zk - dx, zk + dx);
                // Rising half of the hat on [z_{k-1}, z_k].
                let (m0, m1) = spec.moments(zl.max(f64::MIN_POSITIVE), zk)?;
                let mut wk = (m1 - zl * m0) / dx;
                if k < n {
                    let (m0, m1) = spec.moments(zk, zr)?;
                    wk += (zr * m0 - m1) / dx;
                }
                w.push(wk);
            }
            let tail = spec.tail_mass_from(radius)?;
            Ok(NodeWeights { w, tail, radius })
        }
    }
}

/// Symmetric Toeplitz matrix `I + dt A` of the implicit diffusion step.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub order: usize,
    pub first_row: Vec<f64>,
    pub dx: f64,
    pub dt: f64,
    pub s: f64,
    /// Splitting exponent; `None` for product-integration kernels.
    pub split_gamma: Option<f64>,
    pub diagonal_tail: DiagonalTail,
    weights: NodeWeights,
    /// `suffix[k] = Σ_{m >= k+1} w_m`, with a trailing zero.
    suffix: Vec<f64>,
}

/// Matrix for the standard fractional Laplacian on `M - 1` interior nodes.
pub fn assemble_system(s: f64, split_gamma: f64, dx: f64, dt: f64, m: usize) -> Result<OperatorMatrix> {
    if m < 3 {
        return Err(Error::param("M", format!("need M >= 3, got {m}")));
    }
    let spec = KernelSpec::fractional(s)?;
    OperatorMatrix::assemble(&spec, split_gamma, dx, dt, m - 1, DiagonalTail::Consistent)
}

impl OperatorMatrix {
    pub fn assemble(
        spec: &KernelSpec,
        split_gamma: f64,
        dx: f64,
        dt: f64,
        order: usize,
        diagonal_tail: DiagonalTail,
    ) -> Result<Self> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::param("run.dt", format!("must be nonnegative, got {dt}")));
        }
        let weights = node_weights(spec, split_gamma, dx, order)?;
        let n = order;
        let mut suffix = vec![0.0; n + 1];
        for k in (0..n).rev() {
            suffix[k] = suffix[k + 1] + weights.w[k];
        }
        let diag_tail = match diagonal_tail {
            DiagonalTail::Consistent => weights.tail,
            DiagonalTail::Printed => spec.tail_mass_from(dx)?,
        };
        let mut first_row = Vec::with_capacity(n);
        first_row.push(1.0 + dt * (2.0 * suffix[0] + 2.0 * diag_tail));
        first_row.extend(weights.w[..n - 1].iter().map(|w| -dt * w));
        let split_gamma = matches!(spec.kind, KernelKind::Fractional { .. }).then_some(split_gamma);
        Ok(Self {
            order,
            first_row,
            dx,
            dt,
            s: spec.s,
            split_gamma,
            diagonal_tail,
            weights,
            suffix,
        })
    }

    pub fn weights(&self) -> &NodeWeights {
        &self.weights
    }

    /// Dense `y = T x`, `O(n^2)`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        crate::toeplitz::toeplitz_matvec(&self.first_row, x)
    }

    /// Part of [`exterior_rhs`](Self::exterior_rhs) coming from beyond the
    /// truncation radius; the same at every node for constant data.
    pub fn far_field_rhs(&self, datum: ExteriorDatum) -> Vec<f64> {
        let v = self.dt * (datum.left + datum.right) * self.weights.tail;
        vec![v; self.order]
    }

    /// Everything the exterior datum contributes to `dt D[u]` at each node:
    /// offsets landing outside the grid plus the far field.
    pub fn exterior_rhs(&self, datum: ExteriorDatum) -> Vec<f64> {
        let n = self.order;
        let far = (datum.left + datum.right) * self.weights.tail;
        (0..n)
            .map(|i| self.dt * (datum.left * self.suffix[i] + datum.right * self.suffix[n - 1 - i] + far))
            .collect()
    }
}

/// Free-function form of [`OperatorMatrix::exterior_rhs`]; checks that the
/// matrix was assembled for this grid.
pub fn exterior_rhs(grid: &GridState, datum: ExteriorDatum, matrix: &OperatorMatrix) -> Result<Vec<f64>> {
    if grid.len() != matrix.order {
        return Err(Error::Dimension(format!(
            "grid has {} nodes, matrix order {}",
            grid.len(),
            matrix.order
        )));
    }
    Ok(matrix.exterior_rhs(datum))
}

/// Which side of the grid an exterior point lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Values prescribed outside the grid.
pub trait Exterior: Sync {
    fn value(&self, x: f64, side: Side) -> f64;

    /// `∫_R^∞ (g(x-z) + g(x+z)) J(z) dz` at an interior point `x`.
    fn far_field(&self, x: f64, radius: f64, spec: &KernelSpec) -> Result<f64>;
}

impl Exterior for ExteriorDatum {
    fn value(&self, _x: f64, side: Side) -> f64 {
        match side {
            Side::Left => self.left,
            Side::Right => self.right,
        }
    }

    fn far_field(&self, _x: f64, radius: f64, spec: &KernelSpec) -> Result<f64> {
        Ok((self.left + self.right) * spec.tail_mass_from(radius)?)
    }
}

/// `g(x) = cos(ξ x)` on both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CosineExterior {
    pub xi: f64,
}

impl Exterior for CosineExterior {
    fn value(&self, x: f64, _side: Side) -> f64 {
        (self.xi * x).cos()
    }

    fn far_field(&self, x: f64, radius: f64, spec: &KernelSpec) -> Result<f64> {
        let a = 1.0 + 2.0 * spec.s;
        let tail = match spec.kind {
            KernelKind::Fractional { norm_const } => norm_const * cos_power_tail(self.xi, a, radius)?,
            KernelKind::TruncatedAlgebraic => cos_power_tail(self.xi, a, radius.max(1.0))?,
            KernelKind::Composite { .. } => {
                return Err(Error::param("kernel.kind", "cosine far field needs a pure power tail"))
            }
        };
        Ok(2.0 * (self.xi * x).cos() * tail)
    }
}

/// Arbitrary exterior profile. The far field is integrated numerically, so the
/// kernel must have compact support.
pub struct FnExterior<F> {
    pub f: F,
}

impl<F: Fn(f64) -> f64 + Sync> Exterior for FnExterior<F> {
    fn value(&self, x: f64, _side: Side) -> f64 {
        (self.f)(x)
    }

    fn far_field(&self, x: f64, radius: f64, spec: &KernelSpec) -> Result<f64> {
        let end = spec.support_end();
        if !end.is_finite() {
            return Err(Error::param("kernel.kind", "numeric far field needs a compactly supported kernel"));
        }
        if end <= radius {
            return Ok(0.0);
        }
        let g = |z: f64| ((self.f)(x - z) + (self.f)(x + z)) * spec.radial(z);
        Ok(integrate_with_breaks(g, radius, end, &spec.breakpoints(), QuadOptions::with_abs_tol(1e-12))?.value)
    }
}

/// `∫_r^∞ cos(ξ z) z^{-a} dz` for `a > 1`, `r > 0`.
///
/// Sums the integral between consecutive zeros of the cosine and
/// accelerates the alternating partial sums by repeated averaging.
pub fn cos_power_tail(xi: f64, a: f64, r: f64) -> Result<f64> {
    if !(a > 1.0 && r > 0.0) {
        return Err(Error::param("cos_power_tail", format!("need a > 1 and r > 0, got a={a}, r={r}")));
    }
    let xi = xi.abs();
    if xi == 0.0 {
        return Ok(r.powf(1.0 - a) / (a - 1.0));
    }
    // Substitute u = ξ z: ξ^{a-1} ∫_{ξ r}^∞ cos(u) u^{-a} du.
    let u0 = xi * r;
    let mut first_zero = ((u0 / PI - 0.5).ceil() + 0.5) * PI;
    if first_zero <= u0 {
        first_zero += PI;
    }
    let f = |u: f64| u.cos() * u.powf(-a);
    let opts = QuadOptions {
        abs_tol: 1e-13 * u0.powf(-a).max(1e-300),
        rel_tol: 1e-12,
        max_panels: 500,
    };
    const PIECES: usize = 48;
    let mut partial = Vec::with_capacity(PIECES + 1);
    let mut acc = integrate(f, u0, first_zero, opts)?.value;
    partial.push(acc);
    for k in 0..PIECES {
        let lo = first_zero + k as f64 * PI;
        acc += integrate(f, lo, lo + PI, opts)?.value;
        partial.push(acc);
    }
    while partial.len() > 1 {
        partial = partial.windows(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }
    Ok(xi.powf(a - 1.0) * partial[0])
}

/// `2 ∫_0^∞ (1 - cos ξz) J(z) dz`, the Fourier symbol of `-D`.
pub fn exact_symbol(spec: &KernelSpec, xi: f64) -> Result<f64> {
    let s = spec.s;
    match spec.kind {
        KernelKind::Fractional { norm_const } => {
            Ok(norm_const / crate::kernels::fractional_norm_const(s) * xi.abs().powf(2.0 * s))
        }
        KernelKind::TruncatedAlgebraic => {
            Ok(2.0 * (1.0 / (2.0 * s) - cos_power_tail(xi, 1.0 + 2.0 * s, 1.0)?))
        }
        KernelKind::Composite { .. } => Err(Error::param("kernel.kind", "no closed-form symbol for composite kernels")),
    }
}

/// Discrete `D[u]` at the listed interior nodes, with `exterior` supplying
/// values at offsets that leave the grid and the far field beyond `R`.
pub fn apply_nonlocal_at(
    values: &[f64],
    left_x: f64,
    dx: f64,
    spec: &KernelSpec,
    split_gamma: f64,
    exterior: &dyn Exterior,
    nodes: &[usize],
) -> Result<Vec<f64>> {
    let n = values.len();
    let nw = node_weights(spec, split_gamma, dx, n)?;
    nodes
        .par_iter()
        .map(|&j| {
            if j >= n {
                return Err(Error::Dimension(format!("node {j} outside grid of {n}")));
            }
            let xj = left_x + j as f64 * dx;
            let uj = values[j];
            let mut acc = 0.0;
            for (k, &w) in nw.w.iter().enumerate() {
                let k = k + 1;
                let lo = if k <= j {
                    values[j - k]
                } else {
                    exterior.value(xj - k as f64 * dx, Side::Left)
                };
                let hi = if j + k < n {
                    values[j + k]
                } else {
                    exterior.value(xj + k as f64 * dx, Side::Right)
                };
                acc += w * ((lo - uj) + (hi - uj));
            }
            let far = exterior.far_field(xj, nw.radius, spec)?;
            Ok(acc - 2.0 * nw.tail * uj + far)
        })
        .collect()
}

/// Discrete `D[u]` at every node of `grid`, completed by its constant
/// exterior datum.
pub fn apply_nonlocal(grid: &GridState, spec: &KernelSpec, split_gamma: f64) -> Result<Vec<f64>> {
    if grid.len() < 3 {
        return Err(Error::param("grid", format!("need at least 3 interior nodes, got {}", grid.len())));
    }
    let nodes: Vec<usize> = (0..grid.len()).collect();
    apply_nonlocal_at(&grid.values, grid.left_x, grid.dx, spec, split_gamma, &grid.exterior, &nodes)
}

/// Relative error of the discrete operator on `cos(ξx)` against the exact
/// symbol, maximised over the central half of `[-halfwidth, halfwidth]`.
/// Absolute error when `ξ = 0`.
pub fn symbol_error(spec: &KernelSpec, split_gamma: f64, xi: f64, dx: f64, halfwidth: f64) -> Result<f64> {
    symbol_error_with(spec, split_gamma, xi, dx, halfwidth, DiagonalTail::Consistent)
}

/// [`symbol_error`] for the operator implied by a given diagonal tail term.
pub fn symbol_error_with(
    spec: &KernelSpec,
    split_gamma: f64,
    xi: f64,
    dx: f64,
    halfwidth: f64,
    diagonal_tail: DiagonalTail,
) -> Result<f64> {
    if !(xi >= 0.0) {
        return Err(Error::param("xi", format!("must be nonnegative, got {xi}")));
    }
    let n = (2.0 * halfwidth / dx).round() as usize + 1;
    let left_x = -halfwidth;
    let values: Vec<f64> = (0..n).map(|j| (xi * (left_x + j as f64 * dx)).cos()).collect();
    let nodes: Vec<usize> = (0..n)
        .filter(|&j| (left_x + j as f64 * dx).abs() <= 0.5 * halfwidth)
        .collect();
    let ext = CosineExterior { xi };
    let d = apply_nonlocal_at(&values, left_x, dx, spec, split_gamma, &ext, &nodes)?;
    // Extra diagonal decay relative to the consistent operator.
    let shift = match diagonal_tail {
        DiagonalTail::Consistent => 0.0,
        DiagonalTail::Printed => 2.0 * (spec.tail_mass_from(dx)? - spec.tail_mass_from(n as f64 * dx)?),
    };
    let sigma = exact_symbol(spec, xi)?;
    let scale = if sigma > 0.0 { sigma } else { 1.0 };
    Ok(nodes
        .iter()
        .zip(&d)
        .map(|(&j, &dj)| (dj - shift * values[j] + sigma * values[j]).abs() / scale)
        .fold(0.0, f64::max))
}
