//! Short-time barrier `v`, accelerated subsolution `w` / `u̲`, and numerical
//! certificates for the differential inequalities they are meant to satisfy.
//!
//! ```text
//!   w(t,x) = [ (κt/x^{2s})^{1-β} - γ(β-1)t ]^{-1/(β-1)}
//!   X(t)   = (κt)^{1/2s} [ ε^{1-β} + γ(β-1)t ]^{1/(2s(β-1))}        w(t,X) = ε
//!   u̲      = ε on x <= X(t),  3(1 - w/ε + w²/(3ε²)) w beyond
//! ```
//!
//! Certificates evaluate the nonlocal operator on `u̲(t, ·)` by adaptive
//! quadrature at structured samples and report the signed worst residual.
//! A passing certificate is a spot check, not a proof.

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::quadrature::{integrate, integrate_with_breaks, Estimate, QuadOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Value of a function together with its first time derivative and first
/// two space derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub t: f64,
    pub x: f64,
    pub xx: f64,
}

impl Jet {
    fn constant(value: f64) -> Self {
        Self {
            value,
            t: 0.0,
            x: 0.0,
            xx: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    /// κ, γ chosen freely.
    Free,
    /// κ = D^{2s} ε / (2σ), γ = ε^{2-β}/(β-1); the subsolution starts at t_ε = σ/ε.
    Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsolutionParams {
    pub eps: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub d_amp: f64,
    pub beta: f64,
    pub s: f64,
    pub mode: Mode,
}

/// Closed-form positions and constants at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// `w = ε`.
    pub x: f64,
    /// `w = ε/δ_c`.
    pub x_c: f64,
    /// `w = ε/(2δ_c)`.
    pub y: f64,
    /// `2^{1/(2s(β-1))} X`, inner edge of the far field.
    pub far_edge: f64,
    pub t_eps: f64,
    pub delta_c: f64,
    pub tau0: f64,
}

/// `1 + 2/min(β, 1 + 1/(2s))`.
pub fn delta_c(beta: f64, s: f64) -> f64 {
    1.0 + 2.0 / beta.min(1.0 + 1.0 / (2.0 * s))
}

/// `(3/(2δ_c)) (1 - 1/(2δ_c) + 1/(3(2δ_c)²))`, the value of `u̲/ε` at `Y`.
pub fn tau0(delta_c: f64) -> f64 {
    let h = 1.0 / (2.0 * delta_c);
    3.0 * h * (1.0 - h + h * h / 3.0)
}

impl SubsolutionParams {
    pub fn free(eps: f64, kappa: f64, gamma: f64, beta: f64, s: f64) -> Result<Self> {
        let p = Self {
            eps,
            kappa,
            gamma,
            sigma: 1.0,
            d_amp: 1.0,
            beta,
            s,
            mode: Mode::Free,
        };
        p.check()?;
        Ok(p)
    }

    pub fn preset(eps: f64, sigma: f64, d_amp: f64, beta: f64, s: f64) -> Result<Self> {
        if !(beta > 1.0) || !beta.is_finite() {
            return Err(Error::param("subsolution.beta", format!("must exceed 1, got {beta}")));
        }
        let p = Self {
            eps,
            kappa: d_amp.powf(2.0 * s) * eps / (2.0 * sigma),
            gamma: eps.powf(2.0 - beta) / (beta - 1.0),
            sigma,
            d_amp,
            beta,
            s,
            mode: Mode::Preset,
        };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::param("subsolution.eps", format!("must lie in (0,1), got {}", self.eps)));
        }
        if !pos(self.kappa) {
            return Err(Error::param("subsolution.kappa", format!("must be positive, got {}", self.kappa)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::param("subsolution.gamma", format!("must be nonnegative, got {}", self.gamma)));
        }
        if !pos(self.sigma) {
            return Err(Error::param("subsolution.sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !pos(self.d_amp) {
            return Err(Error::param("subsolution.D", format!("must be positive, got {}", self.d_amp)));
        }
        if !(self.beta > 1.0) || !self.beta.is_finite() {
            return Err(Error::param("subsolution.beta", format!("must exceed 1, got {}", self.beta)));
        }
        if !pos(self.s) {
            return Err(Error::param("subsolution.s", format!("must be positive, got {}", self.s)));
        }
        Ok(())
    }

    pub fn delta_c(&self) -> f64 {
        delta_c(self.beta, self.s)
    }

    pub fn tau0(&self) -> f64 {
        tau0(self.delta_c())
    }

    pub fn t_eps(&self) -> f64 {
        self.sigma / self.eps
    }

    /// Earliest time at which `w` and `u̲` may be evaluated.
    pub fn start_time(&self) -> f64 {
        match self.mode {
            Mode::Free => 0.0,
            Mode::Preset => self.t_eps().max(1.0),
        }
    }

    /// `2^{1/(2s(β-1))}`.
    pub fn far_factor(&self) -> f64 {
        2f64.powf(1.0 / (2.0 * self.s * (self.beta - 1.0)))
    }

    fn check_time(&self, t: f64, min: f64) -> Result<()> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("time must be positive, got {t}")));
        }
        if t < min {
            return Err(Error::Domain(format!("time {t} is before the start time {min}")));
        }
        Ok(())
    }

    fn geometry_start(&self) -> f64 {
        match self.mode {
            Mode::Free => 0.0,
            Mode::Preset => 1.0,
        }
    }

    /// Position where `w(t, ·) = ε / level`.
    fn level_position(&self, t: f64, level: f64) -> f64 {
        let b1 = self.beta - 1.0;
        let bracket = level.powf(b1) * self.eps.powf(-b1) + self.gamma * b1 * t;
        (self.kappa * t).powf(1.0 / (2.0 * self.s)) * bracket.powf(1.0 / (2.0 * self.s * b1))
    }

    /// `X(t)`, where `w(t, X) = ε`.
    pub fn front(&self, t: f64) -> Result<f64> {
        self.check()?;
        self.check_time(t, self.geometry_start())?;
        Ok(self.level_position(t, 1.0))
    }

    /// `X_0(t)`: `w(t, ·)` is defined only for `x > X_0`.
    pub fn definition_edge(&self, t: f64) -> f64 {
        let b1 = self.beta - 1.0;
        self.kappa.powf(1.0 / (2.0 * self.s))
            * (self.gamma * b1).powf(1.0 / (2.0 * self.s * b1))
            * t.powf(self.beta / (2.0 * self.s * b1))
    }

    pub fn geometry(&self, t: f64) -> Result<Geometry> {
        self.check()?;
        self.check_time(t, self.geometry_start())?;
        let dc = self.delta_c();
        let x = self.level_position(t, 1.0);
        Ok(Geometry {
            x,
            x_c: self.level_position(t, dc),
            y: self.level_position(t, 2.0 * dc),
            far_edge: self.far_factor() * x,
            t_eps: self.t_eps(),
            delta_c: dc,
            tau0: tau0(dc),
        })
    }

    /// `(Φ, U, q)` with `Φ = κt/x^{2s}`, `U = w/Φ = (1 - q)^{-1/(β-1)}`.
    fn phi_u(&self, t: f64, x: f64) -> Result<(f64, f64, f64)> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("w needs x > 0, got {x}")));
        }
        let b1 = self.beta - 1.0;
        let phi = self.kappa * t / x.powf(2.0 * self.s);
        let q = self.gamma * b1 * t * phi.powf(b1);
        if !(q < 1.0) {
            return Err(Error::Domain(format!(
                "x = {x} is not beyond X0(t) = {} at t = {t}",
                self.definition_edge(t)
            )));
        }
        let u = (-(-q).ln_1p() / b1).exp();
        Ok((phi, u, q))
    }

    /// `w(t, x)`.
    pub fn w(&self, t: f64, x: f64) -> Result<f64> {
        self.check_time(t, self.geometry_start())?;
        let (phi, u, _) = self.phi_u(t, x)?;
        Ok(phi * u)
    }

    /// `w` with `w_t`, `w_x`, `w_xx`.
    pub fn w_jet(&self, t: f64, x: f64) -> Result<Jet> {
        self.check_time(t, self.geometry_start())?;
        let (phi, u, q) = self.phi_u(t, x)?;
        let (b, s2) = (self.beta, 2.0 * self.s);
        let w = phi * u;
        let ub = u.powf(b);
        let phi_t = phi / t;
        let phi_x = -s2 * phi / x;
        let phi_xx = s2 * (s2 + 1.0) * phi / (x * x);
        // U^{β-1} - 1 = q/(1-q), written without the cancellation.
        let excess = q / (1.0 - q);
        Ok(Jet {
            value: w,
            t: self.gamma * w.powf(b) + ub * phi_t,
            x: ub * phi_x,
            xx: (phi_xx + b * phi_x * phi_x / phi * excess) * ub,
        })
    }

    /// `w`, with derivatives when requested.
    pub fn w_eval(&self, t: f64, x: f64, with_derivatives: bool) -> Result<Jet> {
        if with_derivatives {
            self.w_jet(t, x)
        } else {
            self.w(t, x).map(|w| Jet {
                value: w,
                t: f64::NAN,
                x: f64::NAN,
                xx: f64::NAN,
            })
        }
    }

    /// `u̲` with `u̲_t`, `u̲_x`, `u̲_xx`.
    pub fn usub_eval(&self, t: f64, x: f64) -> Result<Jet> {
        self.check()?;
        self.check_time(t, self.start_time().max(self.geometry_start()))?;
        self.usub_unchecked(t, self.level_position(t, 1.0), x)
    }

    fn usub_unchecked(&self, t: f64, front: f64, x: f64) -> Result<Jet> {
        let eps = self.eps;
        if x <= front {
            return Ok(Jet::constant(eps));
        }
        let w = self.w_jet(t, x)?;
        let r = w.value / eps;
        let a = 1.0 - r;
        Ok(Jet {
            value: w.value * (3.0 - 3.0 * r + r * r),
            t: 3.0 * w.t * a * a,
            x: 3.0 * w.x * a * a,
            xx: 3.0 * a * (w.xx * a - 2.0 * w.x * w.x / eps),
        })
    }

    /// Limit of `x^{2s} u̲(t, x)` as `x → ∞`, namely `3κt`.
    pub fn tail_constant(&self, t: f64) -> f64 {
        3.0 * self.kappa * t
    }

    pub fn asymptotics(&self, t: f64) -> Result<Asymptotics> {
        let x = self.front(t)?;
        let (b1, s) = (self.beta - 1.0, self.s);
        let wx = self.w_jet(t, x * (1.0 + 1e-15)).map(|j| j.x).or_else(|_| {
            // The front itself can sit a rounding error inside X0 for γ = 0 limits.
            self.w_jet(t, x * (1.0 + 1e-12)).map(|j| j.x)
        })?;
        let e = 1.0 / (2.0 * s * b1);
        let closed = -2.0 * s
            * self.eps
            * (self.eps / self.kappa).powf(1.0 / (2.0 * s))
            * (1.0 / t + self.eps.powf(b1) * self.gamma * b1).powf(1.0 - e)
            * t.powf(1.0 - self.beta * e);
        Ok(Asymptotics {
            t,
            t_over_x: t / x,
            phi_at_front: self.kappa * t / x.powf(2.0 * s),
            t_log_t_over_x: t * t.ln() / x,
            wx_at_front: wx,
            wx_closed_form: closed,
        })
    }
}

/// Quantities that vanish as `t → ∞` in the accelerating regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptotics {
    pub t: f64,
    pub t_over_x: f64,
    pub phi_at_front: f64,
    pub t_log_t_over_x: f64,
    /// `w_x(t, X(t))` from the derivative formula.
    pub wx_at_front: f64,
    /// The same quantity from its closed form in `t`.
    pub wx_closed_form: f64,
}

impl Asymptotics {
    /// Magnitudes in a fixed order, for monotonicity checks.
    pub fn magnitudes(&self) -> [f64; 4] {
        [
            self.t_over_x,
            self.phi_at_front,
            self.t_log_t_over_x,
            self.wx_at_front.abs(),
        ]
    }
}

/// Asymptotic quantities on `n` log-spaced times in `[t_from, t_to]`.
pub fn asymptotic_ladder(params: &SubsolutionParams, t_from: f64, t_to: f64, n: usize) -> Result<Vec<Asymptotics>> {
    log_spaced(t_from, t_to, n)
        .into_iter()
        .map(|t| params.asymptotics(t))
        .collect()
}

/// `v = 1/ν` for `x <= 0`, `κt/(x^{2s} + κνt)` beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub nu: f64,
    pub kappa: f64,
    pub s: f64,
}

impl Barrier {
    pub fn new(nu: f64, kappa: f64, s: f64) -> Result<Self> {
        for (name, v) in [("subsolution.barrier_nu", nu), ("subsolution.barrier_kappa", kappa), ("kernel.s", s)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(Self { nu, kappa, s })
    }

    /// Largest admissible `κν`, `1/(2s J0)`.
    pub fn kappa_nu_bound(kernel: &KernelSpec) -> f64 {
        1.0 / (2.0 * kernel.s * kernel.j0)
    }

    /// Barrier with `κν` exactly at the admissible bound.
    pub fn critical(kernel: &KernelSpec, nu: f64) -> Result<Self> {
        Self::new(nu, Self::kappa_nu_bound(kernel) / nu, kernel.s)
    }

    pub fn eval(&self, t: f64, x: f64) -> Jet {
        if x <= 0.0 {
            return Jet::constant(1.0 / self.nu);
        }
        let s2 = 2.0 * self.s;
        let kt = self.kappa * t;
        let xs = x.powf(s2);
        let den = xs + kt * self.nu;
        let v = kt / den;
        Jet {
            value: v,
            t: self.kappa * xs / (den * den),
            x: -s2 * kt * xs / x / (den * den),
            xx: s2 * v * v * xs / (x * x) / kt * (2.0 * s2 * xs / den - s2 + 1.0),
        }
    }
}

/// `(v, v_t)` for the barrier with parameters `ν`, `κ`, `s`.
pub fn barrier_v_eval(nu: f64, kappa: f64, s: f64, t: f64, x: f64) -> (f64, f64) {
    let j = Barrier { nu, kappa, s }.eval(t, x);
    (j.value, j.t)
}

/// A space profile for [`numeric_nonlocal`], with known limits at `±∞`.
pub trait Profile: Sync {
    fn value(&self, x: f64) -> f64;
    /// `(f(-∞), f(+∞))`.
    fn limits(&self) -> (f64, f64);
    fn second_derivative(&self, _x: f64) -> Option<f64> {
        None
    }
    /// Points where the profile is less smooth than elsewhere.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Closure-backed profile.
pub struct FnProfile<F> {
    pub f: F,
    pub limits: (f64, f64),
}

impl<F: Fn(f64) -> f64 + Sync> Profile for FnProfile<F> {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn limits(&self) -> (f64, f64) {
        self.limits
    }
}

/// `u̲(t, ·)` at a fixed time.
pub struct SubsolutionSlice<'a> {
    params: &'a SubsolutionParams,
    t: f64,
    front: f64,
}

impl<'a> SubsolutionSlice<'a> {
    pub fn new(params: &'a SubsolutionParams, t: f64) -> Result<Self> {
        params.check()?;
        params.check_time(t, params.start_time().max(params.geometry_start()))?;
        Ok(Self {
            params,
            t,
            front: params.level_position(t, 1.0),
        })
    }

    pub fn jet(&self, x: f64) -> Jet {
        // Beyond the front w is always defined since X > X0.
        self.params
            .usub_unchecked(self.t, self.front, x)
            .unwrap_or(Jet::constant(f64::NAN))
    }
}

impl Profile for SubsolutionSlice<'_> {
    fn value(&self, x: f64) -> f64 {
        self.jet(x).value
    }
    fn limits(&self) -> (f64, f64) {
        (self.params.eps, 0.0)
    }
    fn second_derivative(&self, x: f64) -> Option<f64> {
        Some(self.jet(x).xx)
    }
    fn kinks(&self) -> Vec<f64> {
        vec![self.front]
    }
}

/// `v(t, ·)` at a fixed time.
pub struct BarrierSlice {
    pub barrier: Barrier,
    pub t: f64,
}

impl Profile for BarrierSlice {
    fn value(&self, x: f64) -> f64 {
        self.barrier.eval(self.t, x).value
    }
    fn limits(&self) -> (f64, f64) {
        (1.0 / self.barrier.nu, 0.0)
    }
    fn second_derivative(&self, x: f64) -> Option<f64> {
        (x != 0.0).then(|| self.barrier.eval(self.t, x).xx)
    }
    fn kinks(&self) -> Vec<f64> {
        vec![0.0]
    }
}

/// Below this radius a singular kernel is integrated against the local
/// second-order Taylor expansion of the profile.
pub const CORE_RADIUS: f64 = 1e-3;

/// Default absolute accuracy target of [`numeric_nonlocal`].
pub const NONLOCAL_TOL: f64 = 1e-9;

/// `D[f](x)` by symmetrised adaptive quadrature on `(0, R]` plus the exact
/// contribution of `f`'s limits beyond `R`. The returned error adds the
/// quadrature estimate and a bound on the truncation error.
pub fn numeric_nonlocal(profile: &dyn Profile, spec: &KernelSpec, x: f64, truncation_radius: f64) -> Result<Estimate> {
    numeric_nonlocal_with(profile, spec, x, truncation_radius, NONLOCAL_TOL)
}

pub fn numeric_nonlocal_with(
    profile: &dyn Profile,
    spec: &KernelSpec,
    x: f64,
    truncation_radius: f64,
    abs_tol: f64,
) -> Result<Estimate> {
    if !(truncation_radius > 0.0) {
        return Err(Error::param(
            "truncation_radius",
            format!("must be positive, got {truncation_radius}"),
        ));
    }
    let r = truncation_radius.min(spec.support_end());
    let f0 = profile.value(x);
    let mut total = Estimate { value: 0.0, error: 0.0 };
    let mut lo = spec.support_start();
    if spec.is_singular() {
        let z0 = CORE_RADIUS.min(r);
        let d2 = profile.second_derivative(x).unwrap_or_else(|| {
            (profile.value(x + z0) + profile.value(x - z0) - 2.0 * f0) / (z0 * z0)
        });
        let m2 = integrate(
            |z| if z > 0.0 { spec.radial(z) * z * z } else { 0.0 },
            0.0,
            z0,
            QuadOptions::with_abs_tol(1e-16),
        )?;
        total.value += d2 * m2.value;
        total.error += d2.abs() * m2.error;
        lo = z0;
    }
    if lo < r {
        let mut breaks = spec.breakpoints();
        let mut edge = lo.max(f64::MIN_POSITIVE);
        while edge < r {
            breaks.push(edge);
            edge *= 2.0;
        }
        breaks.extend(profile.kinks().into_iter().map(|k| (k - x).abs()));
        // The second difference cannot resolve below rounding in f(x).
        let floor = 16.0 * f64::EPSILON * f0.abs() * spec.tail_mass_from(lo)?;
        let opts = QuadOptions {
            abs_tol: (abs_tol * 0.5).max(floor),
            rel_tol: 1e-12,
            max_panels: 4000,
        };
        let e = integrate_with_breaks(
            |z| (profile.value(x + z) + profile.value(x - z) - 2.0 * f0) * spec.radial(z),
            lo,
            r,
            &breaks,
            opts,
        )?;
        total.value += e.value;
        total.error += e.error;
    }
    if r < spec.support_end() {
        let tm = spec.tail_mass_from(r.max(lo))?;
        if tm > 0.0 {
            let (fl, fr) = profile.limits();
            total.value += (fl + fr - 2.0 * f0) * tm;
            total.error += truncation_bound(profile, x, r, tm);
        }
    }
    Ok(total)
}

/// Bound on the error of replacing `f` by its limits beyond distance `r`,
/// exact for profiles monotone outside `[x - r, x + r]`.
fn truncation_bound(profile: &dyn Profile, x: f64, r: f64, tail: f64) -> f64 {
    let (fl, fr) = profile.limits();
    ((profile.value(x + r) - fr).abs() + (profile.value(x - r) - fl).abs()) * tail
}

/// Smallest `start · 2^k` whose truncation bound is below `tol`.
pub fn truncation_radius(profile: &dyn Profile, spec: &KernelSpec, x: f64, start: f64, tol: f64) -> Result<f64> {
    let mut r = start.max(1.0);
    for _ in 0..200 {
        if r >= spec.support_end() {
            return Ok(r);
        }
        let tm = spec.tail_mass_from(r)?;
        if truncation_bound(profile, x, r, tm) <= tol {
            return Ok(r);
        }
        r *= 2.0;
    }
    Err(Error::Quadrature {
        a: x,
        b: f64::INFINITY,
        achieved: truncation_bound(profile, x, r, spec.tail_mass_from(r)?),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    Blue,
    Orange,
    Green,
    Farfield,
    Barrier,
}

impl Zone {
    pub const ALL: [Zone; 5] = [Zone::Blue, Zone::Orange, Zone::Green, Zone::Farfield, Zone::Barrier];

    pub fn label(&self) -> &'static str {
        match self {
            Zone::Blue => "blue",
            Zone::Orange => "orange",
            Zone::Green => "green",
            Zone::Farfield => "farfield",
            Zone::Barrier => "barrier",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|z| z.label() == s.trim())
    }

    pub fn inequality(&self) -> &'static str {
        match self {
            Zone::Blue => "D[u] + eps^beta (1-eps)/2 >= 0 on x <= X(t)",
            Zone::Orange => "D[u] + (1-eps) u^beta / 2 >= 0 on X(t) < x <= Y(t)",
            Zone::Green => "D[u] + (1-eps) u^beta / 2 >= 0 on Y(t) < x < 2^{1/(2s(beta-1))} X(t)",
            Zone::Farfield => "D[u] >= eps (1-tau0) / (4 J0 s x^{2s}) on x >= 2^{1/(2s(beta-1))} X(t)",
            Zone::Barrier => "v_t - D[v] - (J0/2s) v <= 0 on t in (0,1), x > R0 + 1",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub t_samples: usize,
    pub x_samples: usize,
    /// A zone passes when its worst residual is at most this.
    pub tolerance: f64,
    /// Time window; defaults to `[t0, 100 t0]` with `t0` the start time
    /// (`(0, 1)` for the barrier).
    pub t_range: Option<(f64, f64)>,
    /// Barrier used by [`Zone::Barrier`]; defaults to `ν = 4` at the
    /// admissible `κν` bound.
    pub barrier: Option<Barrier>,
    /// Quadrature accuracy relative to the zone's reference term.
    pub rel_accuracy: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            t_samples: 32,
            x_samples: 64,
            tolerance: 1e-6,
            t_range: None,
            barrier: None,
            rel_accuracy: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub t: f64,
    pub x: f64,
    /// Signed; negative means the inequality holds with that margin.
    pub residual: f64,
    /// Size of the inequality's reference term at this point.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub zone: Zone,
    pub points: usize,
    /// `-inf` when the zone has no sample points.
    pub worst_residual: f64,
    pub worst_t: f64,
    pub worst_x: f64,
    /// Largest `residual / scale`; `<= 0` means no sample violates the
    /// inequality at all.
    pub worst_relative: f64,
    pub pass: bool,
    pub tolerance: f64,
    pub samples: Vec<ResidualSample>,
}

impl CertificationReport {
    fn from_samples(zone: Zone, samples: Vec<ResidualSample>, tolerance: f64) -> Self {
        let mut worst: Option<&ResidualSample> = None;
        let mut worst_relative = f64::NEG_INFINITY;
        // Sequential scan in sample order; ties keep the earliest point.
        for s in &samples {
            if worst.is_none_or(|w| s.residual > w.residual) {
                worst = Some(s);
            }
            worst_relative = worst_relative.max(s.residual / s.scale);
        }
        let (worst_residual, worst_t, worst_x) = match worst {
            Some(w) => (w.residual, w.t, w.x),
            None => (f64::NEG_INFINITY, f64::NAN, f64::NAN),
        };
        Self {
            zone,
            points: samples.len(),
            worst_residual,
            worst_t,
            worst_x,
            worst_relative,
            pass: worst_residual <= tolerance,
            tolerance,
            samples,
        }
    }

    /// True when every sample satisfies the inequality without slack.
    pub fn strict_pass(&self) -> bool {
        self.worst_residual <= 0.0
    }

    pub fn summary(&self) -> String {
        format!(
            "{:<8} {} points={} worst={:.6e} at (t={:.6e}, x={:.6e}) relative={:.3e} tol={:.1e}",
            self.zone.label(),
            if self.pass { "PASS" } else { "FAIL" },
            self.points,
            self.worst_residual,
            self.worst_t,
            self.worst_x,
            self.worst_relative,
            self.tolerance
        )
    }
}

/// `n` log-spaced values in `[a, b]`; a single value is `a`.
pub fn log_spaced(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let (la, lb) = (a.ln(), b.ln());
            (0..n)
                .map(|k| {
                    if k == 0 {
                        a
                    } else if k == n - 1 {
                        b
                    } else {
                        (la + (lb - la) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Points of `(a, b]` clustered at both ends.
fn clustered(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| {
            let c = 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos());
            a + (b - a) * c
        })
        .filter(|&x| x > a)
        .collect()
}

fn zone_points(params: &SubsolutionParams, zone: Zone, t: f64, n: usize) -> Result<Vec<f64>> {
    let g = params.geometry(t)?;
    let scale = g.x.max(1.0);
    Ok(match zone {
        Zone::Blue => {
            let mut pts = vec![g.x];
            pts.extend(log_spaced(1e-6 * scale, 10.0 * scale, n.saturating_sub(1)).into_iter().map(|d| g.x - d));
            pts
        }
        Zone::Orange => clustered(g.x, g.y, n),
        Zone::Green => {
            if g.far_edge <= g.y {
                Vec::new()
            } else {
                let mut pts = clustered(g.y, g.far_edge, n + 1);
                pts.pop();
                pts
            }
        }
        Zone::Farfield => log_spaced(g.far_edge, 1e3 * g.far_edge, n),
        Zone::Barrier => unreachable!("barrier points do not depend on the subsolution"),
    })
}

/// Evaluates the zone's inequality at a structured sample.
pub fn certify(
    kernel: &KernelSpec,
    params: &SubsolutionParams,
    zone: Zone,
    opts: &CertifyOptions,
) -> Result<CertificationReport> {
    if zone == Zone::Barrier {
        let barrier = match opts.barrier {
            Some(b) => b,
            None => Barrier::critical(kernel, 4.0)?,
        };
        return certify_barrier(kernel, &barrier, opts);
    }
    params.check()?;
    if (kernel.s - params.s).abs() > 1e-12 {
        return Err(Error::param(
            "subsolution.s",
            format!("kernel exponent {} differs from subsolution exponent {}", kernel.s, params.s),
        ));
    }
    let (t_lo, t_hi) = match opts.t_range {
        Some(r) => r,
        None => {
            let t0 = params.start_time().max(1.0);
            (t0, 100.0 * t0)
        }
    };
    let mut points = Vec::new();
    for t in log_spaced(t_lo, t_hi, opts.t_samples) {
        for x in zone_points(params, zone, t, opts.x_samples)? {
            points.push((t, x));
        }
    }
    let eps = params.eps;
    let samples: Vec<ResidualSample> = points
        .par_iter()
        .map(|&(t, x)| {
            let at = |e: Error| Error::AtPoint {
                t,
                x,
                source: Box::new(e),
            };
            let slice = SubsolutionSlice::new(params, t).map_err(at)?;
            let u = slice.jet(x).value;
            let scale = match zone {
                Zone::Blue => 0.5 * eps.powf(params.beta) * (1.0 - eps),
                Zone::Orange | Zone::Green => 0.5 * (1.0 - eps) * u.powf(params.beta),
                Zone::Farfield => {
                    eps * (1.0 - params.tau0()) / (4.0 * kernel.j0 * params.s * x.powf(2.0 * params.s))
                }
                Zone::Barrier => unreachable!(),
            };
            let tol = scale * opts.rel_accuracy;
            let start = 2.0 * (x - slice.front).abs() + slice.front.abs() + 1.0;
            let r = truncation_radius(&slice, kernel, x, start, 0.1 * tol).map_err(at)?;
            let d = numeric_nonlocal_with(&slice, kernel, x, r, tol).map_err(at)?.value;
            let residual = match zone {
                Zone::Farfield => scale - d,
                _ => -(d + scale),
            };
            Ok(ResidualSample { t, x, residual, scale })
        })
        .collect::<Result<_>>()?;
    Ok(CertificationReport::from_samples(zone, samples, opts.tolerance))
}

/// Checks `v_t - D[v] <= (J0/2s) v` for `t ∈ (0, 1)`, `x > R0 + 1`.
pub fn certify_barrier(kernel: &KernelSpec, barrier: &Barrier, opts: &CertifyOptions) -> Result<CertificationReport> {
    let (t_lo, t_hi) = opts.t_range.unwrap_or((1e-3, 0.999));
    let x0 = kernel.r0 + 1.0;
    let xs = log_spaced(x0 * (1.0 + 1e-9), 1e3 * x0, opts.x_samples);
    let points: Vec<(f64, f64)> = log_spaced(t_lo, t_hi, opts.t_samples)
        .into_iter()
        .flat_map(|t| xs.iter().map(move |&x| (t, x)))
        .collect();
    let c = kernel.j0 / (2.0 * kernel.s);
    let samples: Vec<ResidualSample> = points
        .par_iter()
        .map(|&(t, x)| {
            let at = |e: Error| Error::AtPoint {
                t,
                x,
                source: Box::new(e),
            };
            let slice = BarrierSlice { barrier: *barrier, t };
            let v = barrier.eval(t, x);
            let scale = c * v.value;
            let tol = scale * opts.rel_accuracy;
            let r = truncation_radius(&slice, kernel, x, 2.0 * x + 1.0, 0.1 * tol).map_err(at)?;
            let d = numeric_nonlocal_with(&slice, kernel, x, r, tol).map_err(at)?.value;
            Ok(ResidualSample {
                t,
                x,
                residual: v.t - d - scale,
                scale,
            })
        })
        .collect::<Result<_>>()?;
    Ok(CertificationReport::from_samples(Zone::Barrier, samples, opts.tolerance))
}

/// One rung of an empirical threshold-time search.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRung {
    pub t: f64,
    pub reports: Vec<CertificationReport>,
    pub pass: bool,
}

/// Outcome of evaluating zones on an increasing time ladder. `first_pass`
/// is a measured time after which the sampled inequalities hold; it is not
/// an existence time of any analytic argument.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSearch {
    pub rungs: Vec<LadderRung>,
    pub first_pass: Option<f64>,
    /// Every rung after the first passing one passes too.
    pub stable: bool,
}

pub fn threshold_search(
    kernel: &KernelSpec,
    params: &SubsolutionParams,
    zones: &[Zone],
    ladder: &[f64],
    opts: &CertifyOptions,
) -> Result<ThresholdSearch> {
    let mut rungs = Vec::with_capacity(ladder.len());
    for &t in ladder {
        let rung_opts = CertifyOptions {
            t_samples: 1,
            t_range: Some((t, t)),
            ..opts.clone()
        };
        let reports = zones
            .iter()
            .filter(|&&z| z != Zone::Barrier)
            .map(|&z| certify(kernel, params, z, &rung_opts))
            .collect::<Result<Vec<_>>>()?;
        let pass = reports.iter().all(|r| r.pass);
        rungs.push(LadderRung { t, reports, pass });
    }
    let first = rungs.iter().position(|r| r.pass);
    Ok(ThresholdSearch {
        first_pass: first.map(|i| rungs[i].t),
        stable: first.is_some_and(|i| rungs[i..].iter().all(|r| r.pass)),
        rungs,
    })
}
