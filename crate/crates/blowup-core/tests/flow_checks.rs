//! Integrator quality checks: RK4 energy-drift convergence order,
//! consistency of the closed-form linear flow with the nonlinear dynamics,
//! and trajectory time reversal.

use blowup_core::expr::Bindings;
use blowup_core::flow::{integrate, linear_flow, Method};
use blowup_core::hamsys::HamiltonianSystem;
use std::f64::consts::FRAC_PI_2;

#[test]
fn rk4_energy_drift_is_fourth_order() {
    let sys = HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap();
    let s0 = [FRAC_PI_2 + 0.01, 0.0];
    let coarse = integrate(&sys, &s0, 10.0, 2e-3, Method::Rk4)
        .unwrap()
        .max_energy_drift();
    let fine = integrate(&sys, &s0, 10.0, 1e-3, Method::Rk4)
        .unwrap()
        .max_energy_drift();
    assert!(
        fine > 0.0 && coarse / fine >= 8.0,
        "drift {coarse:e} -> {fine:e} (ratio {})",
        coarse / fine
    );
}

#[test]
fn adaptive_integrator_conserves_energy_to_tolerance() {
    let sys = HamiltonianSystem::double_pendulum_torque(1.0, 1.0, 1.0).unwrap();
    let s0 = [-FRAC_PI_2 + 0.05, -FRAC_PI_2, 0.0, 0.0];
    let traj = integrate(&sys, &s0, 5.0, 1e-2, Method::Rk45Adaptive).unwrap();
    assert!(traj.max_energy_drift() < 1e-7, "{}", traj.max_energy_drift());
}

#[test]
fn linear_flow_matches_nonlinear_dynamics_to_second_order() {
    // Plain pendulum: non-degenerate center at the origin, genuinely
    // nonlinear away from it. The linearized flow started at ε·x0 must
    // track the nonlinear orbit with O(ε²) error.
    let sys =
        HamiltonianSystem::build("p^2/2 - cos(q)", &["q"], &["p"], Bindings::new()).unwrap();
    let jac = sys.jacobian(&[0.0, 0.0]).unwrap();
    let x0 = [1.0, 0.4];
    let lf = linear_flow(&jac, &x0).unwrap();

    let mut errs = Vec::new();
    for eps in [1e-3, 1e-4] {
        let seeded: Vec<f64> = x0.iter().map(|v| eps * v).collect();
        let traj = integrate(&sys, &seeded, 1.0, 1e-3, Method::Rk4).unwrap();
        let mut worst = 0.0_f64;
        for (t, state) in traj.times.iter().zip(&traj.states) {
            let lin = lf.at(*t);
            for (si, li) in state.iter().zip(&lin) {
                worst = worst.max((si - eps * li).abs());
            }
        }
        errs.push(worst);
    }
    let ratio = errs[0] / errs[1];
    assert!(
        (30.0..300.0).contains(&ratio),
        "ε² scaling violated: errors {errs:?}, ratio {ratio}"
    );
    assert!(errs[0] <= 10.0 * 1e-6, "error at ε=1e-3 too large: {errs:?}");
}

#[test]
fn eigenvector_residuals_of_linear_flow() {
    let sys = HamiltonianSystem::double_pendulum_torque(1.0, 1.0, 1.0).unwrap();
    let state = [0.3, -0.2, 0.4, 0.1];
    let jac = sys.jacobian(&state).unwrap();
    let x0 = [1.0, 0.0, -1.0, 0.5];
    let lf = linear_flow(&jac, &x0).unwrap();
    let n = jac.dim();
    let jnorm = jac.max_abs();
    for m in 0..n {
        for i in 0..n {
            let mut jv = num_complex::Complex64::new(0.0, 0.0);
            for k in 0..n {
                jv += jac[(i, k)] * lf.eigenvectors[k * n + m];
            }
            let lv = lf.eigenvalues[m] * lf.eigenvectors[i * n + m];
            assert!(
                (jv - lv).norm() <= 1e-9 * jnorm.max(1.0),
                "eigenpair {m} residual {:e}",
                (jv - lv).norm()
            );
        }
    }
    // Reconstruction at t = 0.
    let rec = lf.at(0.0);
    for (r, x) in rec.iter().zip(&x0) {
        assert!((r - x).abs() <= 1e-10);
    }
}

#[test]
fn forward_then_backward_returns_home() {
    let sys = HamiltonianSystem::double_pendulum_torque(1.0, 1.0, 1.0).unwrap();
    let s0 = [0.2, -0.1, 0.15, 0.05];
    let fwd = integrate(&sys, &s0, 2.0, 1e-3, Method::Rk4).unwrap();
    let end = fwd.last_state().unwrap().clone();
    let back_field = |s: &[f64]| {
        sys.vector_field(s)
            .map(|f| f.iter().map(|v| -v).collect::<Vec<f64>>())
    };
    let back = blowup_core::flow::integrate_field(
        &back_field,
        |s| sys.energy(s),
        &end,
        2.0,
        1e-3,
        Method::Rk4,
    )
    .unwrap();
    let home = back.last_state().unwrap();
    for (h, s) in home.iter().zip(&s0) {
        assert!((h - s).abs() < 1e-6, "{home:?}");
    }
}
