use nlfront::kernels::{fractional_norm_const, KernelTerm};
use nlfront::operator::{
    apply_nonlocal, apply_nonlocal_at, assemble_system, exterior_rhs, symbol_error, DiagonalTail, FnExterior,
};
use nlfront::{ExteriorDatum, GridState, KernelSpec, OperatorMatrix};
use proptest::prelude::*;

/// Coefficients of the stepping matrix written out term by term.
fn hand_row(s: f64, dx: f64, dt: f64, m: usize, printed: bool) -> Vec<f64> {
    let c = fractional_norm_const(s);
    let a = c * dt / ((1.0 - s) * dx.powf(2.0 * s));
    let q = |k: f64| ((k + 1.0).powf(1.0 - s) - (k - 1.0).powf(1.0 - s)) / k.powf(1.0 + s);
    let mut sum = 0.0;
    for k in 2..=m - 2 {
        sum += q(k as f64);
    }
    let last = (m - 1) as f64;
    sum += (last.powf(1.0 - s) - (last - 1.0).powf(1.0 - s)) / last.powf(1.0 + s);
    sum += 2f64.powf(1.0 - s);
    sum += if printed {
        (1.0 - s) / s
    } else {
        (1.0 - s) / (s * last.powf(2.0 * s))
    };
    let mut row = vec![1.0 + a * sum, -a / 2f64.powf(s)];
    for k in 2..m - 1 {
        row.push(-0.5 * a * q(k as f64));
    }
    row
}

fn band_kernel() -> KernelSpec {
    KernelSpec::composite(0.5, vec![KernelTerm::Band { lo: 1.0, hi: 2.0, height: 1.0 }], 1.0, 0.0, 1.0).unwrap()
}

#[test]
fn first_off_diagonal_at_half() {
    let (dx, dt) = (0.2, 0.01);
    let m = assemble_system(0.5, 1.5, dx, dt, 50).unwrap();
    let c = fractional_norm_const(0.5);
    let want = -c * dt / (2f64.sqrt() * 0.5 * dx);
    assert!((m.first_row[1] - want).abs() < 1e-15 * want.abs());
}

#[test]
fn zero_time_step_gives_identity() {
    let m = assemble_system(0.3, 1.3, 0.1, 0.0, 10).unwrap();
    assert_eq!(m.first_row[0], 1.0);
    assert!(m.first_row[1..].iter().all(|&v| v == 0.0));
}

#[test]
fn five_point_rows_match_hand_evaluation() {
    for s in [0.25, 0.5, 0.75] {
        let (dx, dt) = (0.3, 0.02);
        let spec = KernelSpec::fractional(s).unwrap();
        for (tail, printed) in [(DiagonalTail::Printed, true), (DiagonalTail::Consistent, false)] {
            let m = OperatorMatrix::assemble(&spec, 1.0 + s, dx, dt, 4, tail).unwrap();
            let want = hand_row(s, dx, dt, 5, printed);
            assert_eq!(m.first_row.len(), want.len());
            for (a, b) in m.first_row.iter().zip(&want) {
                assert!((a - b).abs() < 1e-13 * b.abs().max(1.0), "s={s} {a} vs {b}");
            }
        }
    }
}

#[test]
fn matrix_structure() {
    for s in [0.2, 0.5, 0.9] {
        let m = assemble_system(s, 1.0 + s, 0.2, 0.01, 200).unwrap();
        assert!(m.first_row[0] > 1.0);
        assert!(m.first_row[1..].iter().all(|&v| v <= 0.0));
        let off: f64 = m.first_row[1..].iter().map(|v| v.abs()).sum();
        assert!(m.first_row[0] > 2.0 * off);
    }
}

#[test]
fn split_gamma_outside_range_is_rejected() {
    assert!(assemble_system(0.5, 1.0, 0.1, 0.01, 10).is_err());
    assert!(assemble_system(0.5, 2.0, 0.1, 0.01, 10).is_err());
}

#[test]
fn exterior_contributions() {
    let spec = KernelSpec::fractional(0.5).unwrap();
    let m = OperatorMatrix::assemble(&spec, 1.5, 0.5, 0.1, 40, DiagonalTail::Consistent).unwrap();
    assert!(m.exterior_rhs(ExteriorDatum::new(0.0, 0.0)).iter().all(|&v| v == 0.0));

    let far = m.far_field_rhs(ExteriorDatum::new(1.0, 0.0));
    let l = 40.0 * 0.5;
    let want = 0.1 * fractional_norm_const(0.5) / (2.0 * 0.5 * l);
    assert!(far.iter().all(|&v| (v - want).abs() < 1e-15));

    let g = GridState::from_fn(0.0, 0.5, 40, ExteriorDatum::uniform(1.0), |_| 1.0);
    let rhs = exterior_rhs(&g, ExteriorDatum::uniform(1.0), &m).unwrap();
    let tu = m.apply(&g.values).unwrap();
    for (a, b) in tu.iter().zip(&rhs) {
        assert!((a - 1.0 - b).abs() < 1e-12);
    }
}

#[test]
fn quadratic_on_band_kernel() {
    // Hat-function integration of z^2 over [1, 2] overshoots by exactly dx^2 / 6
    // per side, so the discrete value is 14/3 + dx^2/3.
    let spec = band_kernel();
    for dx in [0.1, 0.05, 0.025] {
        let n = (6.0 / dx) as usize + 1;
        let values: Vec<f64> = (0..n).map(|j| (-3.0 + j as f64 * dx).powi(2)).collect();
        let ext = FnExterior { f: |x: f64| x * x };
        let nodes: Vec<usize> = (0..n).collect();
        let d = apply_nonlocal_at(&values, -3.0, dx, &spec, 1.5, &ext, &nodes).unwrap();
        for v in d {
            assert!((v - (14.0 / 3.0 + dx * dx / 3.0)).abs() < 1e-9, "dx={dx}: {v}");
        }
    }
}

#[test]
fn constants_are_annihilated() {
    let kernels = [
        KernelSpec::fractional(0.3).unwrap(),
        KernelSpec::fractional(0.8).unwrap(),
        KernelSpec::truncated_algebraic(0.5).unwrap(),
        KernelSpec::truncated_algebraic(1.5).unwrap(),
        band_kernel(),
    ];
    for spec in kernels {
        for c in [0.0, 0.37, 1.0] {
            let g = GridState::from_fn(-20.0, 0.25, 161, ExteriorDatum::uniform(c), |_| c);
            let d = apply_nonlocal(&g, &spec, 1.0 + spec.s.min(0.9)).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-8), "{:?} c={c}", spec.kind);
        }
    }
}

#[test]
fn cosine_symbol_accuracy_and_order() {
    for s in [0.3, 0.5, 0.7] {
        let spec = KernelSpec::fractional(s).unwrap();
        let coarse = symbol_error(&spec, 1.0 + s, 1.0, 0.1, 100.0).unwrap();
        let fine = symbol_error(&spec, 1.0 + s, 1.0, 0.05, 100.0).unwrap();
        assert!(fine < 0.05, "s={s}: {fine}");
        assert!((coarse / fine).log2() >= 1.5, "s={s}: {coarse} -> {fine}");
    }
    let spec = KernelSpec::fractional(0.5).unwrap();
    for xi in [0.5, 2.0] {
        let coarse = symbol_error(&spec, 1.5, xi, 0.1, 100.0).unwrap();
        let fine = symbol_error(&spec, 1.5, xi, 0.05, 100.0).unwrap();
        assert!((coarse / fine).log2() >= 1.5, "xi={xi}: {coarse} -> {fine}");
    }
    assert!(symbol_error(&spec, 1.5, 0.0, 0.1, 50.0).unwrap() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn stepping_matrix_is_the_same_operator(
        s in 0.1f64..0.9,
        dx in 0.05f64..1.0,
        values in prop::collection::vec(0.0f64..1.0, 3..120),
        left in 0.0f64..1.0,
        right in 0.0f64..1.0,
    ) {
        let spec = KernelSpec::fractional(s).unwrap();
        let datum = ExteriorDatum::new(left, right);
        let n = values.len();
        let g = GridState::new(0.0, dx, values, datum);
        let m = OperatorMatrix::assemble(&spec, 1.0 + s, dx, 1.0, n, DiagonalTail::Consistent).unwrap();
        let tu = m.apply(&g.values).unwrap();
        let ext = m.exterior_rhs(datum);
        let d = apply_nonlocal(&g, &spec, 1.0 + s).unwrap();
        let scale = m.first_row[0];
        for j in 0..n {
            let lhs = tu[j] - g.values[j] - ext[j];
            prop_assert!((lhs + d[j]).abs() <= 1e-10 * scale, "node {}: {} vs {}", j, lhs, -d[j]);
        }
    }

    #[test]
    fn constants_fixed_for_any_kernel(s in 0.05f64..0.95, c in 0.0f64..1.0, truncated in any::<bool>()) {
        let spec = if truncated { KernelSpec::truncated_algebraic(2.0 * s).unwrap() } else { KernelSpec::fractional(s).unwrap() };
        let gamma = 1.0 + s;
        let g = GridState::from_fn(-10.0, 0.2, 101, ExteriorDatum::uniform(c), |_| c);
        let d = apply_nonlocal(&g, &spec, gamma).unwrap();
        prop_assert!(d.iter().all(|v| v.abs() < 1e-8));
    }
}
