//! Trajectory integration, local linear flow, and phase-portrait sampling.
//!
//! Integration offers fixed-step classical RK4 and an embedded adaptive
//! Dormand–Prince 5(4) pair; both record the energy H at every accepted
//! step, which is how the energy-drift checks see integrator error. Near a
//! non-degenerate equilibrium the closed-form linear flow
//! `x(t) = Σ c_m A_m exp(λ_m t)` is available from the Jacobian's
//! eigenbasis.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::expr::EvalError;
use crate::fmath;
use crate::hamsys::{eigenvalues, HamiltonianSystem};
use crate::linalg::{solve_complex, Matrix};

/// Integration scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Classical fixed-step 4th-order Runge–Kutta.
    Rk4,
    /// Adaptive Dormand–Prince 5(4) with relative tolerance 1e-9.
    Rk45Adaptive,
}

/// A computed orbit: strictly increasing times, states, and the energy at
/// every recorded step.
#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub energies: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&Vec<f64>> {
        self.states.last()
    }

    /// Largest |H(t) − H(0)| over the trajectory.
    pub fn max_energy_drift(&self) -> f64 {
        let Some(&h0) = self.energies.first() else {
            return 0.0;
        };
        self.energies
            .iter()
            .fold(0.0, |m, h| fmath::max(m, fmath::abs(h - h0)))
    }
}

/// Integration / linear-flow failures.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    Eval(EvalError),
    /// The adaptive controller drove the step below resolution at time `t`.
    StepSizeUnderflow { t: f64 },
    /// Eq.-style linear flow needs an eigenvector basis; the Jacobian's is
    /// missing or too ill-conditioned.
    NonDiagonalizable { condition: f64 },
    BadArguments(&'static str),
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::Eval(e) => write!(f, "{e}"),
            FlowError::StepSizeUnderflow { t } => {
                write!(f, "adaptive step size underflow at t = {t}")
            }
            FlowError::NonDiagonalizable { condition } => write!(
                f,
                "jacobian is not numerically diagonalizable (eigenvector condition {condition:e})"
            ),
            FlowError::BadArguments(msg) => write!(f, "{msg}"),
        }
    }
}

impl core::error::Error for FlowError {}

impl From<EvalError> for FlowError {
    fn from(e: EvalError) -> Self {
        FlowError::Eval(e)
    }
}

/// Integrates the canonical field of `sys` from `s0` over `[0, t_end]`.
///
/// `dt` is the fixed RK4 step (the final step is shortened to land on
/// `t_end` exactly) or the initial trial step for the adaptive method.
pub fn integrate(
    sys: &HamiltonianSystem,
    s0: &[f64],
    t_end: f64,
    dt: f64,
    method: Method,
) -> Result<Trajectory, FlowError> {
    if !(dt > 0.0) {
        return Err(FlowError::BadArguments("dt must be positive"));
    }
    if !(t_end > 0.0) {
        return Err(FlowError::BadArguments("t_end must be positive"));
    }
    let deriv = |s: &[f64]| sys.vector_field(s);
    integrate_field(&deriv, |s| sys.energy(s), s0, t_end, dt, method)
}

/// Integration over an arbitrary field closure; `energy` is recorded at
/// every accepted step. This is the work-horse behind [`integrate`] and the
/// backward legs of [`portrait`].
pub fn integrate_field<F, E>(
    deriv: &F,
    mut energy: E,
    s0: &[f64],
    t_end: f64,
    dt: f64,
    method: Method,
) -> Result<Trajectory, FlowError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, EvalError>,
    E: FnMut(&[f64]) -> Result<f64, EvalError>,
{
    let mut out = Trajectory::default();
    let mut t = 0.0;
    let mut state = s0.to_vec();
    out.times.push(t);
    out.energies.push(energy(&state)?);
    out.states.push(state.clone());

    match method {
        Method::Rk4 => {
            while t < t_end {
                let h = fmath::min(dt, t_end - t);
                state = rk4_step(deriv, &state, h)?;
                t += h;
                out.times.push(t);
                out.energies.push(energy(&state)?);
                out.states.push(state.clone());
            }
        }
        Method::Rk45Adaptive => {
            let rtol = 1e-9;
            let atol = 1e-12;
            let mut h = dt;
            while t < t_end {
                h = fmath::min(h, t_end - t);
                if h < 1e-14 * fmath::max(1.0, fmath::abs(t)) {
                    return Err(FlowError::StepSizeUnderflow { t });
                }
                let (next, err_ratio) = dp54_step(deriv, &state, h, rtol, atol)?;
                if err_ratio <= 1.0 {
                    state = next;
                    t += h;
                    out.times.push(t);
                    out.energies.push(energy(&state)?);
                    out.states.push(state.clone());
                }
                let factor = if err_ratio > 0.0 {
                    0.9 * fmath::pow(err_ratio, -0.2)
                } else {
                    5.0
                };
                h *= fmath::min(5.0, fmath::max(0.2, factor));
            }
        }
    }
    Ok(out)
}

fn rk4_step<F>(deriv: &F, y: &[f64], h: f64) -> Result<Vec<f64>, FlowError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, EvalError>,
{
    let k1 = deriv(y)?;
    let k2 = deriv(&offset(y, &k1, 0.5 * h))?;
    let k3 = deriv(&offset(y, &k2, 0.5 * h))?;
    let k4 = deriv(&offset(y, &k3, h))?;
    Ok(y.iter()
        .enumerate()
        .map(|(i, yi)| yi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn offset(y: &[f64], k: &[f64], s: f64) -> Vec<f64> {
    y.iter().zip(k).map(|(yi, ki)| yi + s * ki).collect()
}

/// One Dormand–Prince 5(4) trial step. Returns the 5th-order state and the
/// scaled error ratio (≤ 1 means accept).
fn dp54_step<F>(deriv: &F, y: &[f64], h: f64, rtol: f64, atol: f64) -> Result<(Vec<f64>, f64), FlowError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, EvalError>,
{
    const A2: [f64; 1] = [1.0 / 5.0];
    const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
    const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
    const A5: [f64; 4] = [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ];
    const A6: [f64; 5] = [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ];
    const B5: [f64; 6] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let stage = |coeffs: &[f64], ks: &[&Vec<f64>]| -> Vec<f64> {
        y.iter()
            .enumerate()
            .map(|(i, yi)| {
                yi + h * coeffs
                    .iter()
                    .zip(ks)
                    .map(|(c, k)| c * k[i])
                    .sum::<f64>()
            })
            .collect()
    };

    let k1 = deriv(y)?;
    let k2 = deriv(&stage(&A2, &[&k1]))?;
    let k3 = deriv(&stage(&A3, &[&k1, &k2]))?;
    let k4 = deriv(&stage(&A4, &[&k1, &k2, &k3]))?;
    let k5 = deriv(&stage(&A5, &[&k1, &k2, &k3, &k4]))?;
    let k6 = deriv(&stage(&A6, &[&k1, &k2, &k3, &k4, &k5]))?;
    let y5 = stage(&B5, &[&k1, &k2, &k3, &k4, &k5, &k6]);
    let k7 = deriv(&y5)?;
    let y4 = stage(&B4, &[&k1, &k2, &k3, &k4, &k5, &k6, &k7]);

    let mut ratio = 0.0_f64;
    for i in 0..y.len() {
        let sc = atol + rtol * fmath::max(fmath::abs(y[i]), fmath::abs(y5[i]));
        ratio = fmath::max(ratio, fmath::abs(y5[i] - y4[i]) / sc);
    }
    Ok((y5, ratio))
}

/// Closed-form flow of `dx/dt = J x`: `x(t) = Re Σ c_m A_m e^{λ_m t}` with
/// the coefficients fixed by the initial state.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    pub jacobian: Matrix,
    pub eigenvalues: Vec<Complex64>,
    /// Eigenvector matrix, column m ↔ eigenvalue m (row major, n×n).
    pub eigenvectors: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
    dim: usize,
}

/// Builds the linear flow for `J` from initial state `x0`.
///
/// Fails with [`FlowError::NonDiagonalizable`] when the eigenvector matrix
/// condition number exceeds 1e8 (defective or near-defective Jacobian).
pub fn linear_flow(jacobian: &Matrix, x0: &[f64]) -> Result<LinearFlow, FlowError> {
    let n = jacobian.dim();
    assert_eq!(x0.len(), n);
    let eigs = eigenvalues(jacobian);

    // Eigenvectors by shifted inverse iteration, one basis start per index
    // so repeated eigenvalues of diagonalizable matrices still pick up
    // independent directions.
    let scale = fmath::max(1.0, jacobian.max_abs());
    let mut vecs: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
    for (m, lam) in eigs.iter().enumerate() {
        let mut v: Vec<Complex64> = (0..n)
            .map(|i| {
                if i == m % n {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(1e-3, 0.0)
                }
            })
            .collect();
        let mut shift_mag = 1e-10 * scale;
        let mut converged = false;
        for _attempt in 0..4 {
            let shifted: Vec<Complex64> = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    let mut a = Complex64::new(jacobian[(i, j)], 0.0);
                    if i == j {
                        a -= lam + Complex64::new(shift_mag, shift_mag);
                    }
                    a
                })
                .collect();
            let mut ok = true;
            for _ in 0..3 {
                match solve_complex(&shifted, &v, n) {
                    Some(next) => {
                        let norm = next.iter().fold(0.0, |acc, z| fmath::max(acc, z.norm()));
                        v = next.into_iter().map(|z| z / norm).collect();
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                converged = true;
                break;
            }
            shift_mag *= 100.0;
        }
        if !converged {
            return Err(FlowError::NonDiagonalizable { condition: f64::INFINITY });
        }
        // Deterministic phase: largest component real positive.
        let lead = v
            .iter()
            .fold(Complex64::new(0.0, 0.0), |best, z| {
                if z.norm() > best.norm() {
                    *z
                } else {
                    best
                }
            });
        let phase = lead / lead.norm();
        for (i, z) in v.iter().enumerate() {
            vecs[i * n + m] = z / phase;
        }
    }

    // Condition estimate ‖V‖∞ ‖V⁻¹‖∞ via column solves.
    let norm_v = inf_norm_complex(&vecs, n);
    let mut inv_cols: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[j] = Complex64::new(1.0, 0.0);
        let col = solve_complex(&vecs, &e, n)
            .ok_or(FlowError::NonDiagonalizable { condition: f64::INFINITY })?;
        for i in 0..n {
            inv_cols[i * n + j] = col[i];
        }
    }
    let condition = norm_v * inf_norm_complex(&inv_cols, n);
    if !(condition < 1e8) {
        return Err(FlowError::NonDiagonalizable { condition });
    }

    let rhs: Vec<Complex64> = x0.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    let coefficients = solve_complex(&vecs, &rhs, n)
        .ok_or(FlowError::NonDiagonalizable { condition })?;

    Ok(LinearFlow {
        jacobian: jacobian.clone(),
        eigenvalues: eigs,
        eigenvectors: vecs,
        coefficients,
        dim: n,
    })
}

fn inf_norm_complex(a: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j].norm()).sum::<f64>())
        .fold(0.0, fmath::max)
}

impl LinearFlow {
    /// Evaluates the flow at time `t` (real part of the eigen-expansion).
    pub fn at(&self, t: f64) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|m| {
                        (self.coefficients[m]
                            * self.eigenvectors[i * n + m]
                            * (self.eigenvalues[m] * t).exp())
                        .re
                    })
                    .sum()
            })
            .collect()
    }
}

/// One normalized direction-field sample for quiver-style plots.
#[derive(Debug, Clone)]
pub struct FieldSample {
    /// Full phase-space point of the sample.
    pub state: Vec<f64>,
    /// Unit field direction restricted to the plotted plane (zero where the
    /// field vanishes).
    pub direction: [f64; 2],
    /// Field magnitude in the plotted plane before normalization.
    pub magnitude: f64,
}

/// One portrait orbit: the merged backward+forward trajectory for a seed.
#[derive(Debug, Clone)]
pub struct PortraitOrbit {
    pub seed_index: usize,
    pub seed: Vec<f64>,
    pub trajectory: Trajectory,
    /// True when the orbit left 10× the window and was cut short.
    pub truncated: bool,
}

/// Phase-portrait data: orbits from gridded seeds plus direction-field
/// samples over the window.
#[derive(Debug, Clone)]
pub struct Portrait {
    pub orbits: Vec<PortraitOrbit>,
    pub field: Vec<FieldSample>,
}

/// Samples a phase portrait around `center`.
///
/// `plane` selects the two plotted state indices; the remaining state
/// components stay frozen at `center`. `half_widths` sets the window
/// `[cᵢ − wᵢ, cᵢ + wᵢ]` in the plotted plane, `seeds` the number of orbit
/// starts placed row-major on a near-square sub-grid, integrated both
/// forward and backward for `t_span` with fixed step `dt`. Orbits leaving
/// ten times the window are truncated and flagged.
pub fn portrait(
    sys: &HamiltonianSystem,
    center: &[f64],
    plane: (usize, usize),
    half_widths: (f64, f64),
    seeds: usize,
    t_span: f64,
    dt: f64,
    field_grid: usize,
) -> Result<Portrait, FlowError> {
    let dim = sys.dim();
    assert_eq!(center.len(), dim);
    let (ix, iy) = plane;
    if ix >= dim || iy >= dim || ix == iy {
        return Err(FlowError::BadArguments("plane indices out of range"));
    }
    if !(half_widths.0 > 0.0 && half_widths.1 > 0.0) {
        return Err(FlowError::BadArguments("window must be nondegenerate"));
    }

    let mut orbits = Vec::with_capacity(seeds);
    if seeds > 0 {
        let g = {
            let mut g = 1;
            while g * g < seeds {
                g += 1;
            }
            g
        };
        let coord = |k: usize, c: f64, w: f64| {
            if g == 1 {
                c
            } else {
                c - w + 2.0 * w * k as f64 / (g - 1) as f64
            }
        };
        for idx in 0..seeds {
            let (row, col) = (idx / g, idx % g);
            let mut s0 = center.to_vec();
            s0[ix] = coord(col, center[ix], half_widths.0);
            s0[iy] = coord(row, center[iy], half_widths.1);
            let (traj, truncated) =
                two_sided_orbit(sys, &s0, center, plane, half_widths, t_span, dt)?;
            orbits.push(PortraitOrbit {
                seed_index: idx,
                seed: s0,
                trajectory: traj,
                truncated,
            });
        }
    }

    let mut field = Vec::with_capacity(field_grid * field_grid);
    for row in 0..field_grid {
        for col in 0..field_grid {
            let frac = |k: usize| {
                if field_grid == 1 {
                    0.5
                } else {
                    k as f64 / (field_grid - 1) as f64
                }
            };
            let mut s = center.to_vec();
            s[ix] = center[ix] - half_widths.0 + 2.0 * half_widths.0 * frac(col);
            s[iy] = center[iy] - half_widths.1 + 2.0 * half_widths.1 * frac(row);
            let f = sys.vector_field(&s)?;
            let (fx, fy) = (f[ix], f[iy]);
            let magnitude = fmath::hypot(fx, fy);
            let direction = if magnitude > 0.0 {
                [fx / magnitude, fy / magnitude]
            } else {
                [0.0, 0.0]
            };
            field.push(FieldSample {
                state: s,
                direction,
                magnitude,
            });
        }
    }

    Ok(Portrait { orbits, field })
}

/// Integrates one seed backward then forward and splices the legs into a
/// single trajectory with increasing times (backward leg re-timed to
/// negative t).
fn two_sided_orbit(
    sys: &HamiltonianSystem,
    s0: &[f64],
    center: &[f64],
    plane: (usize, usize),
    half_widths: (f64, f64),
    t_span: f64,
    dt: f64,
) -> Result<(Trajectory, bool), FlowError> {
    let escape = |s: &[f64]| {
        fmath::abs(s[plane.0] - center[plane.0]) > 10.0 * half_widths.0
            || fmath::abs(s[plane.1] - center[plane.1]) > 10.0 * half_widths.1
    };

    let forward_field = |s: &[f64]| sys.vector_field(s);
    let backward_field =
        |s: &[f64]| sys.vector_field(s).map(|f| f.iter().map(|v| -v).collect());

    let mut truncated = false;
    let mut run = |reverse: bool| -> Result<Trajectory, FlowError> {
        let mut out = Trajectory::default();
        let mut t = 0.0;
        let mut state = s0.to_vec();
        out.times.push(0.0);
        out.energies.push(sys.energy(&state)?);
        out.states.push(state.clone());
        while t < t_span {
            let h = fmath::min(dt, t_span - t);
            let next = if reverse {
                rk4_step(&backward_field, &state, h)?
            } else {
                rk4_step(&forward_field, &state, h)?
            };
            t += h;
            if escape(&next) {
                truncated = true;
                break;
            }
            state = next;
            out.times.push(t);
            out.energies.push(sys.energy(&state)?);
            out.states.push(state.clone());
        }
        Ok(out)
    };

    let back = run(true)?;
    let fwd = run(false)?;

    let mut merged = Trajectory::default();
    for k in (1..back.len()).rev() {
        merged.times.push(-back.times[k]);
        merged.states.push(back.states[k].clone());
        merged.energies.push(back.energies[k]);
    }
    merged.times.extend_from_slice(&fwd.times);
    merged.states.extend(fwd.states.iter().cloned());
    merged.energies.extend_from_slice(&fwd.energies);
    Ok((merged, truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn oscillator() -> HamiltonianSystem {
        HamiltonianSystem::build("p^2/2 + q^2/2", &["q"], &["p"], Bindings::new()).unwrap()
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let sys = oscillator();
        let traj = integrate(&sys, &[1.0, 0.0], 2.0 * PI, 1e-3, Method::Rk4).unwrap();
        let last = traj.last_state().unwrap();
        assert!((last[0] - 1.0).abs() < 1e-6 && last[1].abs() < 1e-6);
    }

    #[test]
    fn adaptive_matches_fixed_step() {
        let sys = oscillator();
        let a = integrate(&sys, &[1.0, 0.0], 2.0, 1e-3, Method::Rk4).unwrap();
        let b = integrate(&sys, &[1.0, 0.0], 2.0, 1e-2, Method::Rk45Adaptive).unwrap();
        let fa = a.last_state().unwrap();
        let fb = b.last_state().unwrap();
        assert!((fa[0] - fb[0]).abs() < 1e-7 && (fa[1] - fb[1]).abs() < 1e-7);
    }

    #[test]
    fn pendulum_equilibrium_stays_put() {
        let sys = HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap();
        let traj = integrate(&sys, &[FRAC_PI_2, 0.0], 10.0, 1e-2, Method::Rk4).unwrap();
        let last = traj.last_state().unwrap();
        assert!((last[0] - FRAC_PI_2).abs() < 1e-9 && last[1].abs() < 1e-9);
    }

    #[test]
    fn pendulum_energy_is_conserved_to_1e8() {
        let sys = HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap();
        let traj = integrate(&sys, &[FRAC_PI_2 + 0.01, 0.0], 10.0, 1e-3, Method::Rk4).unwrap();
        assert!(traj.max_energy_drift() <= 1e-8, "{}", traj.max_energy_drift());
    }

    #[test]
    fn linear_flow_of_diagonal_matrix() {
        let j = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let lf = linear_flow(&j, &[1.0, 1.0]).unwrap();
        let x = lf.at(1.0);
        assert!((x[0] - core::f64::consts::E).abs() < 1e-9);
        assert!((x[1] - core::f64::consts::E.powi(2)).abs() < 1e-8);
    }

    #[test]
    fn linear_flow_rotation_quarter_turn() {
        let j = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let lf = linear_flow(&j, &[1.0, 0.0]).unwrap();
        let x = lf.at(FRAC_PI_2);
        assert!(x[0].abs() < 1e-9 && (x[1] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn linear_flow_rejects_defective_jacobian() {
        let j = Matrix::from_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            linear_flow(&j, &[1.0, 0.0]),
            Err(FlowError::NonDiagonalizable { .. })
        ));
    }

    #[test]
    fn linear_flow_reconstructs_initial_state() {
        let j = Matrix::from_rows(&[&[0.0, 1.0], &[-1.0, 1.0]]);
        let x0 = [0.3, -0.7];
        let lf = linear_flow(&j, &x0).unwrap();
        let x = lf.at(0.0);
        for (a, b) in x.iter().zip(x0) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn portrait_orbit_count_and_closure() {
        let sys = oscillator();
        let p = portrait(&sys, &[0.0, 0.0], (0, 1), (1.0, 1.0), 9, 2.0 * PI, 1e-3, 8).unwrap();
        assert_eq!(p.orbits.len(), 9);
        assert_eq!(p.field.len(), 64);
        for orbit in &p.orbits {
            let first = &orbit.trajectory.states[0];
            let last = orbit.trajectory.last_state().unwrap();
            let dist =
                ((first[0] - last[0]).powi(2) + (first[1] - last[1]).powi(2)).sqrt();
            assert!(dist < 1e-3, "orbit {} distance {dist}", orbit.seed_index);
        }
    }

    #[test]
    fn portrait_with_zero_seeds_is_field_only() {
        let sys = oscillator();
        let p = portrait(&sys, &[0.0, 0.0], (0, 1), (1.0, 1.0), 0, 1.0, 1e-2, 4).unwrap();
        assert!(p.orbits.is_empty());
        assert_eq!(p.field.len(), 16);
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let sys = HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap();
        let fwd = integrate(&sys, &[0.3, 0.2], 3.0, 1e-3, Method::Rk4).unwrap();
        let end = fwd.last_state().unwrap().clone();
        let back_field =
            |s: &[f64]| sys.vector_field(s).map(|f| f.iter().map(|v| -v).collect());
        let back = integrate_field(
            &back_field,
            |s| sys.energy(s),
            &end,
            3.0,
            1e-3,
            Method::Rk4,
        )
        .unwrap();
        let home = back.last_state().unwrap();
        assert!((home[0] - 0.3).abs() < 1e-6 && (home[1] - 0.2).abs() < 1e-6);
    }
}
