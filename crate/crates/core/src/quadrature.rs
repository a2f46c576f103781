//! Adaptive Gauss–Kronrod (7/15) quadrature on finite panels, plus helpers
//! for integrals split at breakpoints and semi-infinite tails.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and subdivision budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-12,
            max_panels: 2000,
        }
    }
}

impl QuadOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

/// Result of an adaptive integration: value and estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let sum = f(center - dx) + f(center + dx);
        kronrod += wk * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    let value = kronrod * half;
    // The Gauss/Kronrod gap bounds the error of the lower-order rule, so it
    // overestimates the Kronrod error; accept the pessimism.
    let error = ((kronrod - gauss) * half)
        .abs()
        .max(50.0 * f64::EPSILON * value.abs());
    Estimate { value, error }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate {
            value: 0.0,
            error: 0.0,
        });
    }
    let first = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, est: first });
    let mut value = first.value;
    let mut error = first.error;
    let mut panels = 1;
    while error > opts.abs_tol.max(opts.rel_tol * value.abs()) {
        if panels >= opts.max_panels {
            return Err(Error::Quadrature {
                a,
                b,
                achieved: error,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel collapsed to machine resolution; accept what we have.
            heap.push(worst);
            break;
        }
        let left = gk15(&f, worst.a, mid);
        let right = gk15(&f, mid, worst.b);
        value += left.value + right.value - worst.est.value;
        error += left.error + right.error - worst.est.error;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            est: left,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            est: right,
        });
        panels += 1;
    }
    // Re-sum in a fixed order so the result does not depend on the
    // floating-point history of the running total.
    let mut all: Vec<Panel> = heap.into_vec();
    all.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = all.iter().map(|p| p.est.value).sum();
    let error = all.iter().map(|p| p.est.error).sum();
    Ok(Estimate { value, error })
}

/// Integrates over `[a, b]` after splitting at every breakpoint strictly
/// inside the interval. The tolerance budget is shared across pieces.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    opts: QuadOptions,
) -> Result<Estimate> {
    let mut nodes: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&p| p > a && p < b && p.is_finite())
        .collect();
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    let mut edges = Vec::with_capacity(nodes.len() + 2);
    edges.push(a);
    edges.extend(nodes);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    let piece_opts = QuadOptions {
        abs_tol: opts.abs_tol / pieces,
        ..opts
    };
    let mut total = Estimate {
        value: 0.0,
        error: 0.0,
    };
    for w in edges.windows(2) {
        let e = integrate(&f, w[0], w[1], piece_opts)?;
        total.value += e.value;
        total.error += e.error;
    }
    Ok(total)
}

/// Integrates `f` over `[a, +inf)` on geometrically growing panels
/// `[a r^k, a r^{k+1}]`, stopping once `tail_bound(edge)`, a caller-supplied
/// bound on the remaining integral beyond `edge`, falls below the tolerance.
pub fn integrate_to_infinity<F, B>(f: F, a: f64, tail_bound: B, opts: QuadOptions) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
    B: Fn(f64) -> f64,
{
    assert!(a > 0.0, "semi-infinite integration needs a positive start");
    let mut total = Estimate {
        value: 0.0,
        error: 0.0,
    };
    let mut lo = a;
    let panel_opts = QuadOptions {
        abs_tol: opts.abs_tol * 1e-2,
        ..opts
    };
    for _ in 0..400 {
        let hi = lo * 2.0;
        let e = integrate(&f, lo, hi, panel_opts)?;
        total.value += e.value;
        total.error += e.error;
        lo = hi;
        if tail_bound(lo).abs() < 0.5 * opts.abs_tol {
            return Ok(total);
        }
    }
    Err(Error::Quadrature {
        a,
        b: f64::INFINITY,
        achieved: tail_bound(lo).abs(),
    })
}
