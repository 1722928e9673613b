//! Property suites: differentiation against finite differences, printer
//! round-trips, classification scaling invariance, spectral structure of
//! canonical Jacobians, and eigenvalue residuals.

use blowup_core::expr::{central_difference, Bindings, Expression, UnaryOp};
use blowup_core::hamsys::{
    self, classify, eigenvalues, Classification, HamiltonianSystem, Matrix,
};
use blowup_core::linalg::poly_eval;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const FD_STEP: f64 = 1e-6;

/// Random expression over variables x, y with magnitudes kept small enough
/// that a 1e-6 central difference stays meaningful.
fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expression {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..3) {
            0 => Expression::var("x"),
            1 => Expression::var("y"),
            _ => Expression::constant(rng.gen_range(-2.0..2.0)),
        };
    }
    match rng.gen_range(0..10) {
        0 => Expression::add(random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        1 => Expression::sub(random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        2 => Expression::mul(random_expr(rng, depth - 1), random_expr(rng, depth - 1)),
        3 => Expression::div(
            random_expr(rng, depth - 1),
            // Denominator bounded away from zero.
            Expression::add(
                Expression::constant(2.5),
                Expression::unary(UnaryOp::Sin, random_expr(rng, depth - 1)),
            ),
        ),
        4 => Expression::pow(
            random_expr(rng, depth - 1),
            Expression::constant(*[2.0, 3.0, 1.5].get(rng.gen_range(0..3)).unwrap()),
        ),
        5 => Expression::unary(UnaryOp::Sin, random_expr(rng, depth - 1)),
        6 => Expression::unary(UnaryOp::Cos, random_expr(rng, depth - 1)),
        7 => Expression::unary(UnaryOp::Arctan, random_expr(rng, depth - 1)),
        8 => Expression::unary(
            UnaryOp::Ln,
            Expression::add(
                Expression::constant(3.0),
                Expression::unary(UnaryOp::Sin, random_expr(rng, depth - 1)),
            ),
        ),
        _ => Expression::unary(
            UnaryOp::Sqrt,
            Expression::add(
                Expression::constant(3.0),
                Expression::unary(UnaryOp::Cos, random_expr(rng, depth - 1)),
            ),
        ),
    }
}

/// A point is usable when the expression and the finite-difference stencil
/// evaluate to moderate finite values in both variables.
fn usable_point(e: &Expression, rng: &mut ChaCha8Rng) -> Option<Bindings> {
    'tries: for _ in 0..40 {
        let b = Bindings::from_pairs([
            ("x", rng.gen_range(-1.5..1.5)),
            ("y", rng.gen_range(-1.5..1.5)),
        ])
        .unwrap();
        for var in ["x", "y"] {
            let x0 = b.get(var).unwrap();
            for offset in [-FD_STEP, 0.0, FD_STEP] {
                let mut probe = Bindings::new();
                probe.define("x", if var == "x" { x0 + offset } else { b.get("x").unwrap() }).unwrap();
                probe.define("y", if var == "y" { x0 + offset } else { b.get("y").unwrap() }).unwrap();
                match e.evaluate(&probe) {
                    Ok(v) if v.abs() <= 1e3 => {}
                    _ => continue 'tries,
                }
            }
        }
        return Some(b);
    }
    None
}

#[test]
fn derivative_matches_central_difference_on_1000_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut checked = 0usize;
    while checked < 1000 {
        let e = random_expr(&mut rng, 4);
        let Some(b) = usable_point(&e, &mut rng) else {
            continue;
        };
        for var in ["x", "y"] {
            let fd = match central_difference(&e, var, &b, FD_STEP) {
                Ok(v) if v.is_finite() && v.abs() <= 1e4 => v,
                _ => continue,
            };
            let ad = match e.differentiate(var).evaluate(&b) {
                Ok(v) => v,
                Err(_) => continue,
            };
            assert!(
                (ad - fd).abs() <= 1e-6 * (1.0 + fd.abs()),
                "AD {ad} vs FD {fd} for {e} d/d{var} at x={:?} y={:?}",
                b.get("x"),
                b.get("y"),
            );
            checked += 1;
        }
    }
}

#[test]
fn evaluate_is_bitwise_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let e = random_expr(&mut rng, 4);
        let Some(b) = usable_point(&e, &mut rng) else {
            continue;
        };
        let (Ok(v1), Ok(v2)) = (e.evaluate(&b), e.evaluate(&b)) else {
            continue;
        };
        assert_eq!(v1.to_bits(), v2.to_bits());
    }
}

/// proptest generator mirroring the public construction API.
fn arb_expr() -> impl Strategy<Value = Expression> {
    let leaf = prop_oneof![
        (-1e3f64..1e3).prop_map(Expression::constant),
        Just(Expression::var("x")),
        Just(Expression::var("y_2")),
        Just(Expression::var("p_x")),
    ];
    leaf.prop_recursive(5, 64, 8, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::div(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expression::pow(a, b)),
            inner.clone().prop_map(Expression::neg),
            inner.clone().prop_map(|a| Expression::unary(UnaryOp::Sin, a)),
            inner.clone().prop_map(|a| Expression::unary(UnaryOp::Cos, a)),
            inner.clone().prop_map(|a| Expression::unary(UnaryOp::Tan, a)),
            inner.clone().prop_map(|a| Expression::unary(UnaryOp::Exp, a)),
            inner.clone().prop_map(|a| Expression::unary(UnaryOp::Ln, a)),
            inner.clone().prop_map(|a| Expression::unary(UnaryOp::Sqrt, a)),
            inner.prop_map(|a| Expression::unary(UnaryOp::Arctan, a)),
        ]
    })
}

proptest! {
    #[test]
    fn print_then_parse_roundtrips(e in arb_expr()) {
        let printed = format!("{e}");
        let reparsed = Expression::parse(&printed)
            .unwrap_or_else(|err| panic!("reparse of `{printed}` failed: {err}"));
        prop_assert_eq!(reparsed, e);
    }

    #[test]
    fn classification_is_scale_invariant(
        kind in 0usize..5,
        a in 0.1f64..10.0,
        b in 0.1f64..10.0,
        c in 0.05f64..20.0,
    ) {
        // Spectra built away from the classification thresholds.
        let (x, y) = (a, a * (1.0 + 0.5 + b / 20.0));
        let eigs: Vec<Complex64> = match kind {
            0 => vec![Complex64::new(x, 0.0), Complex64::new(y, 0.0)],
            1 => vec![Complex64::new(-x, 0.0), Complex64::new(-y, 0.0)],
            2 => vec![Complex64::new(-x, 0.0), Complex64::new(y, 0.0)],
            3 => vec![Complex64::new(x, b), Complex64::new(x, -b)],
            _ => vec![Complex64::new(0.0, b), Complex64::new(0.0, -b)],
        };
        let scaled: Vec<Complex64> = eigs.iter().map(|z| z * c).collect();
        prop_assert_eq!(
            classify(&eigs, hamsys::DEGENERACY_TOL),
            classify(&scaled, hamsys::DEGENERACY_TOL)
        );
    }
}

#[test]
fn canonical_jacobian_spectra_are_symmetric_under_negation() {
    let systems = [
        HamiltonianSystem::simple_pendulum_torque(1.3, 0.7, 1.1, 0.9).unwrap(),
        HamiltonianSystem::double_pendulum_torque(0.8, 1.2, 1.5).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sys in &systems {
        for _ in 0..25 {
            let state: Vec<f64> = (0..sys.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let jac = sys.jacobian(&state).unwrap();
            let eigs = eigenvalues(&jac);
            let radius = eigs.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            let tol = 1e-8 * radius.max(1.0);
            let mut used = vec![false; eigs.len()];
            for z in &eigs {
                let partner = eigs.iter().enumerate().find(|(i, w)| {
                    !used[*i] && (*w + z).norm() <= tol
                });
                let Some((i, _)) = partner else {
                    panic!("no -λ partner for {z} in {eigs:?} (state {state:?})");
                };
                used[i] = true;
            }
        }
    }
}

#[test]
fn eigenvalue_residuals_against_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let m = Matrix::from_fn(4, |_, _| rng.gen_range(-3.0..3.0));
        let eigs = eigenvalues(&m);
        let scale = m.max_abs().max(1e-30);
        let sum: Complex64 = eigs.iter().sum();
        assert!(
            (sum.re - m.trace()).abs() <= 1e-9 * scale && sum.im.abs() <= 1e-9 * scale,
            "trace mismatch: {sum} vs {}",
            m.trace()
        );
        let product: Complex64 = eigs.iter().product();
        let det = m.det();
        let scale4 = scale.powi(4);
        assert!(
            (product.re - det).abs() <= 1e-9 * scale4 && product.im.abs() <= 1e-9 * scale4,
            "determinant mismatch: {product} vs {det}"
        );
        let coeffs = m.scale(1.0 / scale).char_poly();
        for z in &eigs {
            let r = poly_eval(&coeffs, z / scale).norm();
            assert!(r <= 1e-8, "char-poly residual {r:e} for {z}");
        }
    }
}

#[test]
fn classification_of_known_regimes_end_to_end() {
    // The three regimes of the torqued-pendulum blow-up linearization via
    // the generic matrix route (not the closed form).
    for (m, expected) in [
        (0.25f64.powf(0.25), Classification::InflectedNode),
        (0.5, Classification::UnstableNode),
        (1.0, Classification::UnstableFocus),
    ] {
        let jac = blowup_core::blowup::simple_printed_linearization(m, 1.0, 1.0);
        let eigs = eigenvalues(&jac);
        assert_eq!(
            classify(&eigs, hamsys::DEGENERACY_TOL),
            expected,
            "m = {m}: {eigs:?}"
        );
    }
}

#[test]
fn equilibrium_search_is_independent_of_box_orientation() {
    // Same physical box traversed with different seed lattices.
    let sys = HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap();
    let a = hamsys::find_equilibria(&sys, &[(-PI, PI), (-1.0, 1.0)], 21, 1e-11);
    let b = hamsys::find_equilibria(&sys, &[(-PI, PI), (-1.0, 1.0)], 34, 1e-11);
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        let d: f64 = x
            .state
            .iter()
            .zip(&y.state)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        assert!(d < 1e-9, "{:?} vs {:?}", x.state, y.state);
    }
}
