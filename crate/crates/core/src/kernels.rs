//! Dispersal kernels `J` with algebraic tails.
//!
//! Every kernel carries the constants of the two-sided tail comparison
//!
//! ```text
//!   J0^{-1} |z|^{-1-2s} 1{|z| >= R0}  <=  J(z)  <=  J0 |z|^{-1-2s}   (|z| >= 1)
//!   ∫_{-1}^{1} J(z) z^2 dz <= 2 J1
//! ```
//!
//! The upper bound is only enforced on `|z| >= 1`; inside `(-1, 1)` the
//! second-moment bound is the only constraint, which is what allows
//! non-integrable singularities such as the fractional Laplacian kernel.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_with_breaks, QuadOptions};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// One radial piece of a composite kernel. All pieces are functions of `|z|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelTerm {
    /// `amp * r^{-1-2s}` on `r_min <= r < r_max`.
    Power { amp: f64, s: f64, r_min: f64, r_max: f64 },
    /// Constant `height` on `lo <= r <= hi`.
    Band { lo: f64, hi: f64, height: f64 },
    /// Triangular bump of the given `height`, centred at `center`.
    Tent { center: f64, half_width: f64, height: f64 },
}

impl KernelTerm {
    fn eval(&self, r: f64) -> f64 {
        match *self {
            KernelTerm::Power { amp, s, r_min, r_max } => {
                if r >= r_min && r < r_max {
                    amp * r.powf(-1.0 - 2.0 * s)
                } else {
                    0.0
                }
            }
            KernelTerm::Band { lo, hi, height } => {
                if r >= lo && r <= hi {
                    height
                } else {
                    0.0
                }
            }
            KernelTerm::Tent {
                center,
                half_width,
                height,
            } => height * (1.0 - (r - center).abs() / half_width).max(0.0),
        }
    }

    fn breakpoints(&self, out: &mut Vec<f64>) {
        match *self {
            KernelTerm::Power { r_min, r_max, .. } => {
                out.push(r_min);
                out.push(r_max);
            }
            KernelTerm::Band { lo, hi, .. } => {
                out.push(lo);
                out.push(hi);
            }
            KernelTerm::Tent {
                center, half_width, ..
            } => {
                out.extend([center - half_width, center, center + half_width]);
            }
        }
    }

    /// `(∫ J, ∫ r J)` over `[a, b]`, `0 < a < b`.
    fn moments(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        match *self {
            KernelTerm::Power { amp, s, r_min, r_max } => {
                let (lo, hi) = (a.max(r_min), b.min(r_max));
                if lo >= hi {
                    return Ok((0.0, 0.0));
                }
                Ok(power_moments(amp, s, lo, hi))
            }
            KernelTerm::Band { lo, hi, height } => {
                let (p, q) = (a.max(lo), b.min(hi));
                if p >= q {
                    return Ok((0.0, 0.0));
                }
                Ok((height * (q - p), 0.5 * height * (q - p) * (q + p)))
            }
            KernelTerm::Tent {
                center, half_width, ..
            } => {
                let (p, q) = (a.max(center - half_width), b.min(center + half_width));
                if p >= q {
                    return Ok((0.0, 0.0));
                }
                let brk = [center];
                let opts = QuadOptions::with_abs_tol(1e-14);
                let m0 = integrate_with_breaks(|r| self.eval(r), p, q, &brk, opts)?.value;
                let m1 = integrate_with_breaks(|r| r * self.eval(r), p, q, &brk, opts)?.value;
                Ok((m0, m1))
            }
        }
    }

    /// `∫_b^∞` of this term; closed form for power and band pieces.
    fn tail_mass(&self, b: f64) -> Result<f64> {
        match *self {
            KernelTerm::Power { amp, s, r_min, r_max } => {
                let lo = b.max(r_min);
                if lo >= r_max {
                    return Ok(0.0);
                }
                let upper = if r_max.is_finite() {
                    r_max.powf(-2.0 * s)
                } else {
                    0.0
                };
                Ok(amp / (2.0 * s) * (lo.powf(-2.0 * s) - upper))
            }
            KernelTerm::Band { lo, hi, height } => Ok(height * (hi - lo.max(b)).max(0.0)),
            KernelTerm::Tent {
                center, half_width, ..
            } => {
                let hi = center + half_width;
                if b >= hi {
                    return Ok(0.0);
                }
                let mut brk = Vec::new();
                self.breakpoints(&mut brk);
                let e = integrate_with_breaks(
                    |r| self.eval(r),
                    b.max(center - half_width),
                    hi,
                    &brk,
                    QuadOptions::with_abs_tol(1e-13),
                )?;
                Ok(e.value)
            }
        }
    }
}

/// Moments `(∫ amp r^{-1-2s}, ∫ amp r^{-2s})` over `[a, b]`, written with
/// `expm1`/`ln_1p` so narrow panels far from the origin keep full precision.
fn power_moments(amp: f64, s: f64, a: f64, b: f64) -> (f64, f64) {
    let log_ratio = ((b - a) / a).ln_1p();
    let m0 = amp * a.powf(-2.0 * s) * -(-2.0 * s * log_ratio).exp_m1() / (2.0 * s);
    let e = 1.0 - 2.0 * s;
    let m1 = if e.abs() < 1e-12 {
        amp * log_ratio
    } else {
        amp * a.powf(e) * (e * log_ratio).exp_m1() / e
    };
    (m0, m1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `norm_const * |z|^{-1-2s}`, `s ∈ (0, 1)`.
    Fractional { norm_const: f64 },
    /// `|z|^{-1-2s}` for `|z| >= 1`, zero inside.
    TruncatedAlgebraic,
    /// Sum of radial pieces.
    Composite { terms: Vec<KernelTerm> },
}

impl KernelKind {
    pub fn label(&self) -> &'static str {
        match self {
            KernelKind::Fractional { .. } => "fractional",
            KernelKind::TruncatedAlgebraic => "truncated-algebraic",
            KernelKind::Composite { .. } => "composite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub s: f64,
    pub j0: f64,
    pub j1: f64,
    pub r0: f64,
}

/// Normalisation making the Fourier symbol of `-D` equal to `|ξ|^{2s}`:
/// `C_{1,s} = s 4^s Γ(1/2 + s) / (√π Γ(1 - s))`.
pub fn fractional_norm_const(s: f64) -> f64 {
    s * 4f64.powf(s) * gamma(0.5 + s) / (PI.sqrt() * gamma(1.0 - s))
}

impl KernelSpec {
    /// Fractional Laplacian kernel with the standard normalisation and the
    /// tightest admissible tail constants.
    pub fn fractional(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::param("kernel.s", format!("fractional kernel needs s in (0,1), got {s}")));
        }
        Self::fractional_with_norm(s, fractional_norm_const(s))
    }

    pub fn fractional_with_norm(s: f64, norm_const: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::param("kernel.s", format!("fractional kernel needs s in (0,1), got {s}")));
        }
        if !(norm_const > 0.0) {
            return Err(Error::param("kernel.norm_const", "must be positive"));
        }
        Ok(Self {
            kind: KernelKind::Fractional { norm_const },
            s,
            j0: norm_const.max(1.0 / norm_const),
            j1: norm_const / (2.0 * (1.0 - s)),
            r0: 1.0,
        })
    }

    pub fn truncated_algebraic(s: f64) -> Result<Self> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::param("kernel.s", format!("must be positive, got {s}")));
        }
        Ok(Self {
            kind: KernelKind::TruncatedAlgebraic,
            s,
            j0: 1.0,
            j1: 0.0,
            r0: 1.0,
        })
    }

    pub fn composite(s: f64, terms: Vec<KernelTerm>, j0: f64, j1: f64, r0: f64) -> Result<Self> {
        let spec = Self {
            kind: KernelKind::Composite { terms },
            s,
            j0,
            j1,
            r0,
        };
        spec.check_constants()?;
        Ok(spec)
    }

    /// Overrides the tail constants, checking only their admissible ranges.
    pub fn with_constants(mut self, j0: f64, j1: f64, r0: f64) -> Result<Self> {
        self.j0 = j0;
        self.j1 = j1;
        self.r0 = r0;
        self.check_constants()?;
        Ok(self)
    }

    fn check_constants(&self) -> Result<()> {
        if !(self.s > 0.0) || !self.s.is_finite() {
            return Err(Error::param("kernel.s", format!("must be positive, got {}", self.s)));
        }
        if !(self.j0 > 0.0) {
            return Err(Error::param("kernel.J0", format!("must be positive, got {}", self.j0)));
        }
        if !(self.j1 >= 0.0) {
            return Err(Error::param("kernel.J1", format!("must be nonnegative, got {}", self.j1)));
        }
        if !(self.r0 >= 1.0) {
            return Err(Error::param("kernel.R0", format!("must be at least 1, got {}", self.r0)));
        }
        Ok(())
    }

    /// Multiplicative constant of the pure power law, if the kernel is one.
    pub fn norm_const(&self) -> Option<f64> {
        match self.kind {
            KernelKind::Fractional { norm_const } => Some(norm_const),
            _ => None,
        }
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        if z == 0.0 {
            return Err(Error::SingularPoint);
        }
        Ok(self.radial(z.abs()))
    }

    /// Kernel as a function of `r = |z| > 0`; no singular-point check.
    pub(crate) fn radial(&self, r: f64) -> f64 {
        match &self.kind {
            KernelKind::Fractional { norm_const } => norm_const * r.powf(-1.0 - 2.0 * self.s),
            KernelKind::TruncatedAlgebraic => {
                if r >= 1.0 {
                    r.powf(-1.0 - 2.0 * self.s)
                } else {
                    0.0
                }
            }
            KernelKind::Composite { terms } => terms.iter().map(|t| t.eval(r)).sum(),
        }
    }

    /// Radii where the kernel is not smooth; useful as quadrature breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        match &self.kind {
            KernelKind::Fractional { .. } => {}
            KernelKind::TruncatedAlgebraic => out.push(1.0),
            KernelKind::Composite { terms } => {
                for t in terms {
                    t.breakpoints(&mut out);
                }
            }
        }
        out.retain(|r| r.is_finite() && *r > 0.0);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Inner radius below which the kernel vanishes identically (0 if none).
    pub fn support_start(&self) -> f64 {
        match &self.kind {
            KernelKind::Fractional { .. } => 0.0,
            KernelKind::TruncatedAlgebraic => 1.0,
            KernelKind::Composite { terms } => terms
                .iter()
                .map(|t| match *t {
                    KernelTerm::Power { r_min, .. } => r_min,
                    KernelTerm::Band { lo, .. } => lo,
                    KernelTerm::Tent {
                        center, half_width, ..
                    } => center - half_width,
                })
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
        }
    }

    /// Outer radius beyond which the kernel vanishes (`inf` for algebraic tails).
    pub fn support_end(&self) -> f64 {
        match &self.kind {
            KernelKind::Composite { terms } => terms
                .iter()
                .map(|t| match *t {
                    KernelTerm::Power { r_max, .. } => r_max,
                    KernelTerm::Band { hi, .. } => hi,
                    KernelTerm::Tent {
                        center, half_width, ..
                    } => center + half_width,
                })
                .fold(0.0, f64::max),
            _ => f64::INFINITY,
        }
    }

    /// True when the kernel is not integrable at the origin.
    pub fn is_singular(&self) -> bool {
        self.support_start() == 0.0
    }

    /// One-sided tail integral `∫_B^∞ J(z) dz` for `B >= 1`.
    pub fn tail_mass(&self, b: f64) -> Result<f64> {
        if !(b >= 1.0) {
            return Err(Error::param("B", format!("tail radius must be at least 1, got {b}")));
        }
        self.tail_mass_from(b)
    }

    /// Same as [`tail_mass`](Self::tail_mass) without the `B >= 1` guard;
    /// callers must make sure `B` lies beyond any singularity.
    pub(crate) fn tail_mass_from(&self, b: f64) -> Result<f64> {
        let s = self.s;
        match &self.kind {
            KernelKind::Fractional { norm_const } => Ok(norm_const / (2.0 * s * b.powf(2.0 * s))),
            KernelKind::TruncatedAlgebraic => Ok(b.max(1.0).powf(-2.0 * s) / (2.0 * s)),
            KernelKind::Composite { terms } => terms.iter().map(|t| t.tail_mass(b)).sum(),
        }
    }

    /// `(∫_a^b J(r) dr, ∫_a^b r J(r) dr)` for `0 < a < b`.
    pub fn moments(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        if !(a > 0.0 && b > a) {
            return Err(Error::param("moments", format!("need 0 < a < b, got [{a}, {b}]")));
        }
        match &self.kind {
            KernelKind::Fractional { norm_const } => Ok(power_moments(*norm_const, self.s, a, b)),
            KernelKind::TruncatedAlgebraic => {
                let lo = a.max(1.0);
                if lo >= b {
                    Ok((0.0, 0.0))
                } else {
                    Ok(power_moments(1.0, self.s, lo, b))
                }
            }
            KernelKind::Composite { terms } => {
                let mut acc = (0.0, 0.0);
                for t in terms {
                    let (m0, m1) = t.moments(a, b)?;
                    acc.0 += m0;
                    acc.1 += m1;
                }
                Ok(acc)
            }
        }
    }

    /// `∫_{-1}^{1} J(z) z^2 dz`, by adaptive quadrature.
    pub fn second_moment(&self) -> Result<f64> {
        // Geometric panels towards the origin absorb integrable singularities.
        let mut edges: Vec<f64> = (0..=12).map(|k| 10f64.powi(-k)).collect();
        edges.extend(self.breakpoints().into_iter().filter(|&r| r < 1.0));
        let f = |r: f64| self.radial(r) * r * r;
        let head = integrate(f, 0.0, 1e-12, QuadOptions::with_abs_tol(1e-14))?;
        let body = integrate_with_breaks(f, 1e-12, 1.0, &edges, QuadOptions::with_abs_tol(1e-12))?;
        Ok(2.0 * (head.value + body.value))
    }

    /// Numerical check of every hypothesis clause on a log-spaced sample.
    pub fn validate(&self) -> ValidationReport {
        validate_spec(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    KindConstraint,
    Constants,
    Evenness,
    UpperTail,
    LowerTail,
    SecondMoment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseResult {
    pub clause: Clause,
    pub pass: bool,
    /// Smallest relative slack found (negative means violated).
    pub worst_margin: f64,
    /// `|z|` at which the worst margin occurs, when the clause is sampled.
    pub worst_at: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub clauses: Vec<ClauseResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.pass)
    }

    pub fn clause(&self, which: Clause) -> Option<&ClauseResult> {
        self.clauses.iter().find(|c| c.clause == which)
    }
}

const VALIDATION_TOL: f64 = 1e-9;
const SAMPLES_PER_DECADE: usize = 200;

fn validation_sample() -> Vec<f64> {
    let (lo, hi) = (-3.0f64, 4.0f64);
    let n = ((hi - lo) as usize) * SAMPLES_PER_DECADE;
    (0..=n)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / n as f64))
        .collect()
}

pub fn validate_spec(spec: &KernelSpec) -> ValidationReport {
    let mut clauses = Vec::new();

    let kind_ok = match spec.kind {
        KernelKind::Fractional { .. } => spec.s > 0.0 && spec.s < 1.0,
        _ => spec.s > 0.0,
    };
    clauses.push(ClauseResult {
        clause: Clause::KindConstraint,
        pass: kind_ok,
        worst_margin: if kind_ok { 0.0 } else { -1.0 },
        worst_at: None,
        note: format!("{} kernel with s = {}", spec.kind.label(), spec.s),
    });
    let consts_ok = spec.check_constants().is_ok();
    clauses.push(ClauseResult {
        clause: Clause::Constants,
        pass: consts_ok,
        worst_margin: if consts_ok { 0.0 } else { -1.0 },
        worst_at: None,
        note: format!("J0 = {}, J1 = {}, R0 = {}", spec.j0, spec.j1, spec.r0),
    });
    if !kind_ok {
        return ValidationReport { clauses };
    }

    let sample = validation_sample();
    let exponent = -1.0 - 2.0 * spec.s;

    let mut even = (f64::INFINITY, None);
    let mut upper = (f64::INFINITY, None);
    let mut lower = (f64::INFINITY, None);
    for &r in &sample {
        let jp = spec.eval(r).unwrap_or(f64::NAN);
        let jm = spec.eval(-r).unwrap_or(f64::NAN);
        let scale = jp.abs().max(jm.abs()).max(f64::MIN_POSITIVE);
        let m = -((jp - jm).abs() / scale);
        if m < even.0 {
            even = (m, Some(r));
        }
        if r >= 1.0 {
            let bound = spec.j0 * r.powf(exponent);
            let m = (bound - jp) / bound;
            if m < upper.0 {
                upper = (m, Some(r));
            }
        }
        if r >= spec.r0 {
            let bound = r.powf(exponent) / spec.j0;
            let m = (jp - bound) / bound;
            if m < lower.0 {
                lower = (m, Some(r));
            }
        }
    }
    let sampled = |clause, (m, at): (f64, Option<f64>), note: &str| ClauseResult {
        clause,
        pass: m >= -VALIDATION_TOL,
        worst_margin: m,
        worst_at: at,
        note: note.to_string(),
    };
    clauses.push(sampled(Clause::Evenness, even, "J(z) = J(-z)"));
    clauses.push(sampled(Clause::UpperTail, upper, "J(z) <= J0 |z|^{-1-2s} on |z| >= 1"));
    clauses.push(sampled(Clause::LowerTail, lower, "J(z) >= |z|^{-1-2s} / J0 on |z| >= R0"));

    match spec.second_moment() {
        Ok(m2) => {
            let bound = 2.0 * spec.j1;
            let slack = bound - m2;
            let margin = if bound > 0.0 { slack / bound } else { slack };
            clauses.push(ClauseResult {
                clause: Clause::SecondMoment,
                pass: margin >= -VALIDATION_TOL,
                worst_margin: margin,
                worst_at: None,
                note: format!("∫ J z^2 over [-1,1] = {m2:.6e}, bound {bound:.6e}"),
            });
        }
        Err(e) => clauses.push(ClauseResult {
            clause: Clause::SecondMoment,
            pass: false,
            worst_margin: f64::NEG_INFINITY,
            worst_at: None,
            note: format!("quadrature failed: {e}"),
        }),
    }
    ValidationReport { clauses }
}
