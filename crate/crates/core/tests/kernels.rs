use nlfront::kernels::{validate_spec, Clause, KernelTerm};
use nlfront::quadrature::{integrate, QuadOptions};
use nlfront::{Error, KernelSpec};
use proptest::prelude::*;

fn builtin(kind: u8, s: f64) -> KernelSpec {
    match kind {
        0 => KernelSpec::fractional(s.min(0.95)).unwrap(),
        _ => KernelSpec::truncated_algebraic(s).unwrap(),
    }
}

#[test]
fn fractional_closed_form_at_two() {
    let k = KernelSpec::fractional_with_norm(0.5, 1.0).unwrap();
    assert_eq!(k.eval(2.0).unwrap(), 0.25);
    assert_eq!(k.eval(-2.0).unwrap(), 0.25);
}

#[test]
fn origin_is_singular() {
    for k in [KernelSpec::fractional(0.5).unwrap(), KernelSpec::truncated_algebraic(0.5).unwrap()] {
        assert!(matches!(k.eval(0.0), Err(Error::SingularPoint)));
    }
}

#[test]
fn truncated_kernel_vanishes_inside_unit_ball() {
    let k = KernelSpec::truncated_algebraic(0.5).unwrap();
    assert_eq!(k.eval(0.5).unwrap(), 0.0);
    assert_eq!(k.eval(-0.999).unwrap(), 0.0);
}

#[test]
fn tail_mass_closed_forms() {
    let k = KernelSpec::truncated_algebraic(0.5).unwrap();
    assert!((k.tail_mass(2.0).unwrap() - 0.5).abs() < 1e-15);
    let f = KernelSpec::fractional(0.25).unwrap();
    let c = f.norm_const().unwrap();
    assert!((f.tail_mass(1.0).unwrap() - 2.0 * c).abs() < 1e-14);
    assert!(k.tail_mass(0.5).is_err());
}

#[test]
fn tail_mass_agrees_with_quadrature() {
    let k = KernelSpec::truncated_algebraic(0.7).unwrap();
    let b = 3.0;
    let q = integrate(|u: f64| {
        // z = b / u maps (0, 1] onto [b, ∞).
        let z = b / u;
        k.eval(z).unwrap() * b / (u * u)
    }, 0.0, 1.0, QuadOptions::with_abs_tol(1e-13))
    .unwrap();
    assert!((q.value - k.tail_mass(b).unwrap()).abs() < 1e-10);
}

#[test]
fn validation_outcomes() {
    assert!(validate_spec(&KernelSpec::truncated_algebraic(0.5).unwrap()).passed());
    assert!(validate_spec(&KernelSpec::fractional(0.5).unwrap()).passed());
    assert!(KernelSpec::fractional(1.2).is_err());

    let bump = KernelSpec::composite(
        0.5,
        vec![
            KernelTerm::Power { amp: 1.0, s: 0.5, r_min: 1.0, r_max: f64::INFINITY },
            KernelTerm::Tent { center: 3.0, half_width: 0.5, height: 1.0 },
        ],
        1.0,
        0.0,
        1.0,
    )
    .unwrap();
    let report = validate_spec(&bump);
    let upper = report.clause(Clause::UpperTail).unwrap();
    assert!(!upper.pass);
    assert!(upper.worst_margin < 0.0);
    let at = upper.worst_at.unwrap();
    assert!((at - 3.0).abs() < 0.5, "worst point {at}");
}

#[test]
fn truncated_second_moment_is_zero() {
    for s in [0.1, 0.5, 1.0, 2.5] {
        assert_eq!(KernelSpec::truncated_algebraic(s).unwrap().second_moment().unwrap(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn kernels_are_even_and_nonnegative(kind in 0u8..2, s in 0.05f64..2.0, z in 1e-3f64..1e4) {
        let k = builtin(kind, s);
        let (a, b) = (k.eval(z).unwrap(), k.eval(-z).unwrap());
        prop_assert!(a >= 0.0);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn tail_mass_monotone_and_bounded(kind in 0u8..2, s in 0.05f64..2.0, b in 1.0f64..1e3, f in 1.0f64..10.0) {
        let k = builtin(kind, s);
        let (m1, m2) = (k.tail_mass(b).unwrap(), k.tail_mass(b * f).unwrap());
        prop_assert!(m2 <= m1);
        let bound = k.j0 / (2.0 * k.s * b.powf(2.0 * k.s));
        prop_assert!(m1 <= bound * (1.0 + 1e-10));
    }
}
