//! Executable as-printed fixtures for the torqued-pendulum blow-up
//! analyses.
//!
//! These reproduce the reference derivation verbatim — the polar blow-up
//! equations of the torqued simple pendulum, the angular algebraic system
//! and the angular-equilibrium Jacobian of the torqued double pendulum —
//! independently of the general chart-derivation engine, so the downstream
//! pipeline (angular root finding, eigenvalues, classification) can be
//! validated against known printed forms.
//!
//! The printed simple-pendulum system is not the chain-rule image of its
//! stated polar map (its angular linearization differs from the printed
//! matrix); fixtures therefore carry the printed linearization alongside
//! the chart field, and classification reports both rather than forcing
//! agreement.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{BlowUpChart, BlowupError, ChartComponent, PrintedLinearization};
use crate::expr::Expression;
use crate::fmath;
use crate::linalg::Matrix;

/// What a fixture name resolves to: a full blow-up chart or a bare matrix.
#[derive(Debug, Clone)]
pub enum Fixture {
    Chart(BlowUpChart),
    Matrix(Matrix),
}

/// Resolves a fixture by name with the physical parameters bound:
/// `simple-eq7` (polar blow-up system of the torqued simple pendulum),
/// `double-eq17` (angular algebraic system of the torqued double pendulum),
/// `double-eq19` (its angular-equilibrium Jacobian).
pub fn paper_fixture(name: &str, m: f64, g: f64, l: f64) -> Result<Fixture, BlowupError> {
    match name {
        "simple-eq7" => Ok(Fixture::Chart(simple_blowup_fixture(m, g, l))),
        "double-eq17" => Ok(Fixture::Chart(double_angular_fixture(m, g, l))),
        "double-eq19" => Ok(Fixture::Matrix(double_jacobian_fixture(m, g, l))),
        other => Err(BlowupError::UnknownFixture(other.to_string())),
    }
}

fn bind_mgl(text: &str, m: f64, g: f64, l: f64) -> Expression {
    let e = Expression::parse(text).expect("fixture text parses");
    let mut map = BTreeMap::new();
    map.insert("m".to_string(), Expression::Const(m));
    map.insert("g".to_string(), Expression::Const(g));
    map.insert("L".to_string(), Expression::Const(l));
    e.substitute(&map)
}

/// Polar blow-up system of the simple pendulum under torque T = m g L, as
/// printed: both right-hand sides are the `r·d(·)/dt` forms over (r, θ).
///
/// The chart map consistent with these expressions is q = r sin θ,
/// p = r cos θ taken from the coordinate origin (not from the degenerate
/// point), which is also what reproduces the printed blow-up energy
/// Ē = −m g L = H(0, 0).
pub fn simple_blowup_fixture(m: f64, g: f64, l: f64) -> BlowUpChart {
    let radial_text = "-(r*cos(theta)*(m^2*g*L^3*sin(r*sin(theta)) - m^2*g*L^3 - r*sin(theta)))/(m*L^2)";
    let angular_text = "(m^2*g*L^3*sin(r*sin(theta))*sin(theta) - m^2*g*L^3*sin(theta) - sin(theta)^2*r + r)/(m*L^2)";

    let mut chart = BlowUpChart::from_components(
        alloc::vec![0.0, 0.0],
        false,
        "r",
        &["theta"],
        alloc::vec![
            ChartComponent {
                numerator: bind_mgl(radial_text, m, g, l),
                denominator: Expression::Const(1.0),
            },
            ChartComponent {
                numerator: bind_mgl(angular_text, m, g, l),
                denominator: Expression::Const(1.0),
            },
        ],
    );

    chart.map = Some(alloc::vec![
        Expression::parse("r*sin(theta)").unwrap(),
        Expression::parse("r*cos(theta)").unwrap(),
    ]);
    chart.phase_names = Some(alloc::vec!["q".to_string(), "p".to_string()]);
    // H with the fixture's torque T = m g L bound in.
    let mut h_map = BTreeMap::new();
    h_map.insert("T".to_string(), Expression::Const(m * g * l));
    chart.h_bound = Some(bind_mgl("p^2/(2*m*L^2) - m*g*L*cos(q) - T*q", m, g, l).substitute(&h_map));
    chart.printed = Some(PrintedLinearization {
        jacobian: simple_printed_linearization(m, g, l),
        at_angles: Some(alloc::vec![0.0]),
    });
    chart.paper_roots = Some(alloc::vec![alloc::vec![0.0]]);
    chart
}

/// The printed linearization of the simple-pendulum blow-up at its angular
/// equilibrium θ* = 0: [[0, mgL], [−mgL, 1/(mL²)]].
pub fn simple_printed_linearization(m: f64, g: f64, l: f64) -> Matrix {
    Matrix::from_rows(&[
        &[0.0, m * g * l],
        &[-m * g * l, 1.0 / (m * l * l)],
    ])
}

/// Closed-form eigenvalues of the printed simple-pendulum blow-up
/// linearization: λ = (1 ± √(1 − 4 m⁴ L⁶ g²)) / (2 m L²), complex for
/// m⁴ > 1/(4 L⁶ g²). Returned sorted by (re, im) like
/// [`crate::hamsys::eigenvalues`].
pub fn simple_blowup_closed_form_eigenvalues(m: f64, g: f64, l: f64) -> (Complex64, Complex64) {
    let two_ml2 = 2.0 * m * l * l;
    let m4 = m * m * m * m;
    let l6 = (l * l * l) * (l * l * l);
    let disc = 1.0 - 4.0 * m4 * l6 * g * g;
    if disc >= 0.0 {
        let root = fmath::sqrt(disc);
        (
            Complex64::new((1.0 - root) / two_ml2, 0.0),
            Complex64::new((1.0 + root) / two_ml2, 0.0),
        )
    } else {
        let root = fmath::sqrt(-disc);
        (
            Complex64::new(1.0 / two_ml2, -root / two_ml2),
            Complex64::new(1.0 / two_ml2, root / two_ml2),
        )
    }
}

/// Angular algebraic system of the torqued double pendulum on the R = 0
/// sphere, as printed (three equations; the radial one is identically
/// zero there). Components carry their sin-power denominators for the
/// clearing/rejection machinery. Roots are reported in the reference
/// window (angles in (−π, π], η on the principal arctan branch).
pub fn double_angular_fixture(m: f64, g: f64, l: f64) -> BlowUpChart {
    let theta_num = "-2*m*g*L*sin(phi)*cos(theta)";
    let phi_num = "-2*m*g*L*cos(phi)";
    let eta_num = "-2*m*g*L*cos(eta)*sin(theta)*sin(phi) + m*L*g*sin(eta)";

    let mut chart = BlowUpChart::from_components(
        alloc::vec![0.0, 0.0, 0.0, 0.0],
        false,
        "R",
        &["theta", "phi", "eta"],
        alloc::vec![
            ChartComponent {
                numerator: Expression::Const(0.0),
                denominator: Expression::Const(1.0),
            },
            ChartComponent {
                numerator: bind_mgl(theta_num, m, g, l),
                denominator: Expression::parse("sin(eta)").unwrap(),
            },
            ChartComponent {
                numerator: bind_mgl(phi_num, m, g, l),
                denominator: Expression::parse("sin(theta)*sin(eta)").unwrap(),
            },
            ChartComponent {
                numerator: bind_mgl(eta_num, m, g, l),
                denominator: Expression::Const(1.0),
            },
        ],
    );

    chart.map = Some(alloc::vec![
        Expression::parse("R*sin(theta)*cos(phi)*sin(eta)").unwrap(),
        Expression::parse("R*cos(theta)*sin(eta)").unwrap(),
        Expression::parse("R*sin(theta)*sin(phi)*sin(eta)").unwrap(),
        Expression::parse("R*cos(eta)").unwrap(),
    ]);
    chart.phase_names = Some(
        ["phi1", "phi2", "p1", "p2"]
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<String>>(),
    );
    chart.h_bound = Some(bind_mgl(
        "(p1^2/2 + p2^2 - cos(phi1-phi2)*p1*p2)/(m*L^2*(1+sin(phi1-phi2)^2)) \
         - 2*m*g*L*cos(phi1) - m*g*L*cos(phi2) + 2*m*g*L*phi1 + m*g*L*phi2",
        m,
        g,
        l,
    ));
    chart.printed = Some(PrintedLinearization {
        jacobian: double_jacobian_fixture(m, g, l),
        at_angles: None,
    });
    chart.paper_window = true;
    let at2 = fmath::atan(2.0);
    let fp = core::f64::consts::FRAC_PI_2;
    // Angle order (theta, phi, eta).
    chart.paper_roots = Some(alloc::vec![
        alloc::vec![fp, fp, at2],
        alloc::vec![-fp, fp, -at2],
        alloc::vec![fp, -fp, -at2],
        alloc::vec![-fp, -fp, at2],
    ]);
    chart
}

/// The printed Jacobian at each angular equilibrium of the double-pendulum
/// blow-up (identical at all four): lower triangular with diagonal
/// (−√5, √5, √5, √5)·mgL and one subdiagonal entry −1/(2mL²).
pub fn double_jacobian_fixture(m: f64, g: f64, l: f64) -> Matrix {
    let s5 = fmath::sqrt(5.0) * m * g * l;
    Matrix::from_rows(&[
        &[-s5, 0.0, 0.0, 0.0],
        &[0.0, s5, 0.0, 0.0],
        &[-1.0 / (2.0 * m * l * l), 0.0, s5, 0.0],
        &[0.0, 0.0, 0.0, s5],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup;
    use crate::hamsys::Classification;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn simple_fixture_angular_limit_at_pi_over_4() {
        let chart = simple_blowup_fixture(1.0, 1.0, 1.0);
        let f = chart.field_value(0.0, &[FRAC_PI_4]).unwrap();
        let expect = -(2.0f64).sqrt() / 2.0;
        assert!((f[1] - expect).abs() < 1e-14, "{f:?}");
        assert!(f[0].abs() < 1e-14);
    }

    #[test]
    fn simple_fixture_contains_theta_zero() {
        let chart = simple_blowup_fixture(1.0, 1.0, 1.0);
        let (roots, _) = blowup::angular_equilibria(&chart, 48, 1e-10).unwrap();
        assert!(
            roots.iter().any(|r| r.angles[0].abs() < 1e-8),
            "{roots:?}"
        );
        // θ = π also zeroes the printed angular component; reported but
        // flagged as absent from the reference analysis.
        let pi_root = roots
            .iter()
            .find(|r| (r.angles[0] - PI).abs() < 1e-8)
            .expect("theta = pi root");
        let ae = blowup::classify_angular(&chart, pi_root).unwrap();
        assert_eq!(ae.noted_in_reference, Some(false));
    }

    #[test]
    fn simple_fixture_classifies_unstable_focus_with_printed_jacobian() {
        let chart = simple_blowup_fixture(1.0, 1.0, 1.0);
        let (roots, _) = blowup::angular_equilibria(&chart, 48, 1e-10).unwrap();
        let zero = roots
            .iter()
            .find(|r| r.angles[0].abs() < 1e-8)
            .expect("theta* = 0");
        let ae = blowup::classify_angular(&chart, zero).unwrap();
        assert!(ae.printed_jacobian);
        assert!((ae.jacobian[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((ae.jacobian[(1, 0)] + 1.0).abs() < 1e-12);
        assert_eq!(ae.classification, Classification::UnstableFocus);
        let half_sqrt3 = 3.0f64.sqrt() / 2.0;
        assert!((ae.eigenvalues[0].re - 0.5).abs() < 1e-12);
        assert!((ae.eigenvalues[0].im + half_sqrt3).abs() < 1e-12);
        // The chain-rule linearization of the printed field disagrees with
        // the printed matrix; both are reported.
        let derived = ae.derived_jacobian.expect("derived alongside printed");
        assert!((derived[(0, 0)] - 1.0).abs() < 1e-9);
        assert!((derived[(1, 1)] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn closed_form_eigenvalue_regimes() {
        // Equal-eigenvalue boundary m⁴ = 1/4 at g = L = 1. The rounding of
        // m⁴ leaves a √ε-sized split in the printed formula.
        let m = 0.25f64.powf(0.25);
        let (l1, l2) = simple_blowup_closed_form_eigenvalues(m, 1.0, 1.0);
        assert!((l1 - l2).norm() < 5e-8);
        assert!((l1.re - 1.0 / (2.0 * m)).abs() < 5e-8);

        let (l1, l2) = simple_blowup_closed_form_eigenvalues(0.5, 1.0, 1.0);
        assert!(l1.im == 0.0 && l2.im == 0.0 && l1.re > 0.0 && l2.re > l1.re);

        let (l1, _) = simple_blowup_closed_form_eigenvalues(1.0, 1.0, 1.0);
        assert!(l1.im != 0.0 && (l1.re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn double_fixture_residual_vanishes_at_first_root() {
        let chart = double_angular_fixture(1.0, 1.0, 1.0);
        let q1 = [FRAC_PI_2, FRAC_PI_2, (2.0f64).atan()];
        let f = chart.field_value(0.0, &q1).unwrap();
        for v in &f {
            assert!(v.abs() < 1e-14, "{f:?}");
        }
    }

    #[test]
    fn double_fixture_roots_match_printed_set_exactly() {
        let chart = double_angular_fixture(1.0, 1.0, 1.0);
        let (roots, diag) = blowup::angular_equilibria(&chart, 10, 1e-10).unwrap();
        assert_eq!(roots.len(), 4, "{roots:?}");
        let expected = chart.paper_roots.clone().unwrap();
        for want in &expected {
            assert!(
                roots
                    .iter()
                    .any(|r| blowup::circular_distance(&r.angles, want) < 1e-8),
                "missing {want:?}"
            );
        }
        assert!(diag.rejected_window > 0, "{diag:?}");
    }

    #[test]
    fn double_fixture_energy_and_classification() {
        let chart = double_angular_fixture(1.0, 1.0, 1.0);
        let (roots, _) = blowup::angular_equilibria(&chart, 10, 1e-10).unwrap();
        for root in &roots {
            let ae = blowup::classify_angular(&chart, root).unwrap();
            assert!((ae.energy.unwrap() + 3.0).abs() < 1e-10);
            assert_eq!(
                ae.classification,
                Classification::Product(alloc::vec![
                    Classification::Saddle,
                    Classification::InflectedNode
                ])
            );
            assert_eq!(ae.noted_in_reference, Some(true));
        }
    }

    #[test]
    fn double_jacobian_fixture_is_lower_triangular() {
        let m = double_jacobian_fixture(1.0, 1.0, 1.0);
        let diag = m.triangular_diagonal().expect("triangular");
        let s5 = 5.0f64.sqrt();
        assert!((diag[0] + s5).abs() < 1e-14);
        for d in &diag[1..] {
            assert!((d - s5).abs() < 1e-14);
        }
    }

    #[test]
    fn hypersphere_identity_of_the_chart_map() {
        let chart = double_angular_fixture(1.0, 1.0, 1.0);
        let samples = [
            (0.7, [0.3, 1.1, 0.9]),
            (1.3, [2.0, 4.0, 2.5]),
            (0.01, [5.5, 0.2, 3.0]),
        ];
        for (radius, angles) in samples {
            let p = chart.map_point(radius, &angles).unwrap();
            let r2: f64 = p.iter().map(|x| x * x).sum();
            assert!((r2 - radius * radius).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_fixture_is_an_error() {
        assert!(matches!(
            paper_fixture("simple-eq8", 1.0, 1.0, 1.0),
            Err(BlowupError::UnknownFixture(_))
        ));
    }

    #[test]
    fn fixture_lookup_by_name() {
        assert!(matches!(
            paper_fixture("simple-eq7", 1.0, 1.0, 1.0),
            Ok(Fixture::Chart(_))
        ));
        assert!(matches!(
            paper_fixture("double-eq17", 1.0, 1.0, 1.0),
            Ok(Fixture::Chart(_))
        ));
        assert!(matches!(
            paper_fixture("double-eq19", 1.0, 1.0, 1.0),
            Ok(Fixture::Matrix(_))
        ));
    }
}
