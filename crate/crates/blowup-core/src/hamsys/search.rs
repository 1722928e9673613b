//! Multistart damped-Newton equilibrium search.
//!
//! Seeds on a uniform grid over the search box, damped Newton iterations on
//! the vector field from every seed, then dedup/sort so the result does not
//! depend on seed enumeration order.
//!
//! Degenerate roots (fold-type, e.g. sin q = T/mgL with a double zero) sit
//! in a band where the f64 field underflows to exactly zero, so plain
//! Newton stalls ~1e-8 from the true root. For those, a second Newton pass
//! runs on a bordered system: rank-deficient residual combinations are
//! replaced by the matching Jacobian entries (which have simple zeros and
//! full f64 resolution), pinning the root to machine precision.

use alloc::vec::Vec;

use super::{inf_norm, EquilibriumPoint, HamiltonianSystem};
use crate::expr::Expression;
use crate::fmath;
use crate::linalg::Matrix;

const MAX_NEWTON_ITER: usize = 50;
const MAX_HALVINGS: usize = 20;
const DEDUP_DISTANCE: f64 = 1e-6;
/// Relative singular-value threshold below which a direction counts as
/// rank-deficient at a converged root.
const FOLD_SIGMA_TOL: f64 = 1e-6;

/// Counters from one multistart search.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    pub nonconverged: usize,
    pub out_of_box: usize,
    pub merged_duplicates: usize,
    /// Roots refined by the bordered (fold) polish.
    pub polished: usize,
}

/// Locates equilibria of `sys` inside `bounds` (one `(lo, hi)` interval per
/// state dimension) from `grid` seeds per dimension; `tol` is the absolute
/// residual threshold for Newton convergence. Returns analyzed points
/// sorted lexicographically by state.
pub fn find_equilibria(
    sys: &HamiltonianSystem,
    bounds: &[(f64, f64)],
    grid: usize,
    tol: f64,
) -> Vec<EquilibriumPoint> {
    find_equilibria_with_diagnostics(sys, bounds, grid, tol).0
}

/// [`find_equilibria`] plus the seed/convergence counters.
pub fn find_equilibria_with_diagnostics(
    sys: &HamiltonianSystem,
    bounds: &[(f64, f64)],
    grid: usize,
    tol: f64,
) -> (Vec<EquilibriumPoint>, SearchDiagnostics) {
    assert_eq!(bounds.len(), sys.dim(), "one interval per state dimension");
    assert!(grid >= 2, "grid must be at least 2 seeds per dimension");
    assert!(tol > 0.0, "tolerance must be positive");

    let mut diag = SearchDiagnostics::default();
    let mut roots: Vec<(Vec<f64>, f64)> = Vec::new();

    let mut seed = alloc::vec![0.0; sys.dim()];
    let mut index = alloc::vec![0usize; sys.dim()];
    loop {
        for (d, &i) in index.iter().enumerate() {
            let (lo, hi) = bounds[d];
            seed[d] = lo + (hi - lo) * i as f64 / (grid - 1) as f64;
        }
        diag.seeds += 1;

        match damped_newton(sys, &seed, tol) {
            Some(root) => {
                diag.converged += 1;
                let root = match fold_polish(sys, &root, tol) {
                    Some(refined) => {
                        diag.polished += 1;
                        refined
                    }
                    None => root,
                };
                if in_box(&root, bounds) {
                    let residual = sys
                        .vector_field(&root)
                        .map(|f| inf_norm(&f))
                        .unwrap_or(f64::INFINITY);
                    roots.push((root, residual));
                } else {
                    diag.out_of_box += 1;
                }
            }
            None => diag.nonconverged += 1,
        }

        // Advance the mixed-radix seed index.
        let mut d = 0;
        loop {
            if d == index.len() {
                break;
            }
            index[d] += 1;
            if index[d] < grid {
                break;
            }
            index[d] = 0;
            d += 1;
        }
        if d == index.len() {
            break;
        }
    }

    // Sort first so dedup representatives do not depend on seed order.
    roots.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (root, residual) in roots {
        match kept
            .iter_mut()
            .find(|(r, _)| euclid(r, &root) < DEDUP_DISTANCE)
        {
            Some(entry) => {
                diag.merged_duplicates += 1;
                if residual < entry.1 {
                    *entry = (root, residual);
                }
            }
            None => kept.push((root, residual)),
        }
    }
    kept.sort_by(|a, b| lex_cmp(&a.0, &b.0));

    let points = kept
        .into_iter()
        .filter_map(|(root, _)| sys.analyze_equilibrium(&root).ok())
        .collect();
    (points, diag)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> core::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(core::cmp::Ordering::Equal) | None => continue,
            Some(ord) => return ord,
        }
    }
    core::cmp::Ordering::Equal
}

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    fmath::sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn in_box(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).all(|(v, (lo, hi))| {
        let slack = 1e-9 * (1.0 + fmath::abs(hi - lo));
        *v >= lo - slack && *v <= hi + slack
    })
}

/// Damped Newton iteration on the vector field. Steps are halved until the
/// residual decreases, and iteration continues to the floating-point floor
/// (rather than stopping at the first sub-tolerance residual) so that
/// double roots land inside their f64 stall band, where the fold polish
/// takes over. Seeds whose final residual exceeds `tol` return `None`.
fn damped_newton(sys: &HamiltonianSystem, seed: &[f64], tol: f64) -> Option<Vec<f64>> {
    let mut x = seed.to_vec();
    let mut f = sys.vector_field(&x).ok()?;
    let mut norm = inf_norm(&f);
    for _ in 0..MAX_NEWTON_ITER {
        if norm == 0.0 {
            break;
        }
        let Ok(jac) = sys.jacobian(&x) else { break };
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let Some(delta) = jac.solve(&rhs) else { break };
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x
                .iter()
                .zip(&delta)
                .map(|(xi, di)| xi + alpha * di)
                .collect();
            if let Ok(tf) = sys.vector_field(&trial) {
                let tnorm = inf_norm(&tf);
                if tnorm < norm {
                    x = trial;
                    f = tf;
                    norm = tnorm;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
        if inf_norm(&delta) <= 1e-16 * (1.0 + inf_norm(&x)) {
            break;
        }
    }
    if norm <= tol {
        Some(x)
    } else {
        None
    }
}

/// Bordered-system refinement of a root whose Jacobian is rank deficient.
///
/// With singular triplets (σᵢ, wᵢ, vᵢ) of J(x₀), the residual components
/// along deficient left directions carry double zeros and are f64-flat near
/// the root; the replacement equations wᵢᵀ J(x) vᵢ vanish simple there. The
/// polished system keeps the full-rank residual combinations and swaps the
/// deficient ones for those Jacobian contractions.
///
/// Returns `None` when the root is not deficient or the polish does not
/// validate, in which case the caller keeps the original root.
fn fold_polish(sys: &HamiltonianSystem, x0: &[f64], tol: f64) -> Option<Vec<f64>> {
    let d = sys.dim();
    let jac = sys.jacobian(x0).ok()?;
    let trip = jac.singular_triplets();
    let sigma_max = trip.sigma.last().copied().unwrap_or(0.0);
    let cut = FOLD_SIGMA_TOL * fmath::max(1.0, sigma_max);
    let deficient = trip.sigma.iter().filter(|s| **s <= cut).count();
    if deficient == 0 || deficient == d {
        return None;
    }

    // Axis-aligned orthonormal bases of the null spaces (the fold pairs in
    // these systems live on coordinate axes; alignment keeps the replaced
    // equations decoupled).
    let right_null: Vec<Vec<f64>> = (0..deficient).map(|k| trip.right_vector(k)).collect();
    let left_null: Vec<Vec<f64>> = (0..deficient).map(|k| trip.left_vector(k)).collect();
    let v_axes = axis_align(&right_null, d);
    let w_axes = axis_align(&left_null, d);
    if v_axes.len() != deficient || w_axes.len() != deficient {
        return None;
    }

    // Range rows: left singular directions with σ above the cut.
    let range_rows: Vec<Vec<f64>> = (deficient..d).map(|k| trip.left_vector(k)).collect();

    // Fold rows: s_i(x) = w_iᵀ J(x) v_i as symbolic expressions, with their
    // gradients, evaluated through the system's Jacobian expressions.
    let jac_exprs = sys.jacobian_expressions();
    let state_names = sys.state_names();
    let mut fold_exprs: Vec<Expression> = Vec::with_capacity(deficient);
    for (w, v) in w_axes.iter().zip(&v_axes) {
        let mut sum = Expression::Const(0.0);
        for (a, wa) in w.iter().enumerate() {
            for (b, vb) in v.iter().enumerate() {
                let coeff = wa * vb;
                if fmath::abs(coeff) < 1e-12 {
                    continue;
                }
                sum = Expression::add(
                    sum,
                    Expression::mul(Expression::Const(coeff), jac_exprs[a * d + b].clone()),
                );
            }
        }
        fold_exprs.push(sum);
    }
    let fold_compiled: Vec<_> = fold_exprs
        .iter()
        .map(|e| e.compile(&state_names).ok())
        .collect::<Option<Vec<_>>>()?;
    let fold_grads: Vec<Vec<_>> = fold_exprs
        .iter()
        .map(|e| {
            state_names
                .iter()
                .map(|v| e.differentiate(v).compile(&state_names).ok())
                .collect::<Option<Vec<_>>>()
        })
        .collect::<Option<Vec<_>>>()?;

    let mut x = x0.to_vec();
    for _ in 0..30 {
        let f = sys.vector_field(&x).ok()?;
        let j = sys.jacobian(&x).ok()?;
        let mut g = Vec::with_capacity(d);
        let mut jg = Matrix::zeros(d);
        for (r, u) in range_rows.iter().enumerate() {
            g.push(dot(u, &f));
            for c in 0..d {
                jg[(r, c)] = (0..d).map(|a| u[a] * j[(a, c)]).sum();
            }
        }
        for (k, comp) in fold_compiled.iter().enumerate() {
            let r = range_rows.len() + k;
            g.push(comp.eval(&x).ok()?);
            for c in 0..d {
                jg[(r, c)] = fold_grads[k][c].eval(&x).ok()?;
            }
        }
        let rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        let delta = jg.solve(&rhs)?;
        for (xi, di) in x.iter_mut().zip(&delta) {
            *xi += di;
        }
        if inf_norm(&delta) <= 1e-15 * (1.0 + inf_norm(&x)) {
            break;
        }
    }

    // Validate: still a numerical equilibrium, and we only moved within the
    // stall band the polish is meant to fix.
    let residual = sys.vector_field(&x).map(|f| inf_norm(&f)).ok()?;
    let moved = euclid(&x, x0);
    if residual <= fmath::max(tol, 1e-12) && moved <= 1e-3 && x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Greedily extracts an orthonormal basis of `span(basis)` aligned to
/// coordinate axes: repeatedly picks the axis with the largest projection
/// onto the remaining subspace.
fn axis_align(basis: &[Vec<f64>], d: usize) -> Vec<Vec<f64>> {
    let k = basis.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best_axis = usize::MAX;
        let mut best_norm = 0.0;
        for axis in 0..d {
            // Projection of e_axis onto span(basis), minus already chosen.
            let mut p = alloc::vec![0.0; d];
            for b in basis {
                let c = b[axis];
                for (pi, bi) in p.iter_mut().zip(b) {
                    *pi += c * bi;
                }
            }
            for chosen in &out {
                let c = dot(chosen, &p);
                for (pi, ci) in p.iter_mut().zip(chosen) {
                    *pi -= c * ci;
                }
            }
            let norm = fmath::sqrt(dot(&p, &p));
            if norm > best_norm {
                best_norm = norm;
                best_axis = axis;
            }
        }
        if best_axis == usize::MAX || best_norm < 1e-9 {
            break;
        }
        let mut p = alloc::vec![0.0; d];
        for b in basis {
            let c = b[best_axis];
            for (pi, bi) in p.iter_mut().zip(b) {
                *pi += c * bi;
            }
        }
        for chosen in &out {
            let c = dot(chosen, &p);
            for (pi, ci) in p.iter_mut().zip(chosen) {
                *pi -= c * ci;
            }
        }
        let norm = fmath::sqrt(dot(&p, &p));
        out.push(p.into_iter().map(|v| v / norm).collect());
    }
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Bindings;
    use crate::hamsys::Classification;
    use core::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn oscillator_has_single_origin_equilibrium() {
        let sys =
            HamiltonianSystem::build("p^2/2 + q^2/2", &["q"], &["p"], Bindings::new()).unwrap();
        let eqs = find_equilibria(&sys, &[(-1.0, 1.0), (-1.0, 1.0)], 7, 1e-11);
        assert_eq!(eqs.len(), 1);
        assert!(inf_norm(&eqs[0].state) < 1e-12);
        assert_eq!(eqs[0].classification, Classification::Center);
    }

    #[test]
    fn simple_pendulum_root_is_located_to_1e9() {
        let sys = HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap();
        let (eqs, diag) =
            find_equilibria_with_diagnostics(&sys, &[(-PI, PI), (-1.0, 1.0)], 21, 1e-11);
        assert_eq!(eqs.len(), 1, "expected exactly one root: {eqs:?}");
        assert!((eqs[0].state[0] - FRAC_PI_2).abs() < 1e-9);
        assert!(eqs[0].state[1].abs() < 1e-9);
        assert!(eqs[0].degenerate);
        assert!(diag.polished > 0, "fold polish should fire: {diag:?}");
        assert_eq!(diag.seeds, 21 * 21);
    }

    #[test]
    fn double_pendulum_p0_is_located_to_1e9() {
        let sys = HamiltonianSystem::double_pendulum_torque(1.0, 1.0, 1.0).unwrap();
        let bounds = [(-PI, 0.0), (-PI, 0.0), (-1.0, 1.0), (-1.0, 1.0)];
        let eqs = find_equilibria(&sys, &bounds, 5, 1e-11);
        let p0 = [-FRAC_PI_2, -FRAC_PI_2, 0.0, 0.0];
        let found = eqs
            .iter()
            .find(|e| euclid(&e.state, &p0) < 1e-6)
            .expect("P0 located");
        for (a, b) in found.state.iter().zip(p0) {
            assert!((a - b).abs() < 1e-9, "{:?}", found.state);
        }
        assert!(found.degenerate);
        assert!((found.energy + 1.5 * PI).abs() < 1e-12);
    }

    #[test]
    fn roots_outside_box_are_dropped() {
        // Plain pendulum (no torque): equilibria at q = k π. Box excludes 0.
        let sys = HamiltonianSystem::build(
            "p^2/2 - cos(q)",
            &["q"],
            &["p"],
            Bindings::new(),
        )
        .unwrap();
        let eqs = find_equilibria(&sys, &[(2.0, 4.0), (-0.5, 0.5)], 9, 1e-11);
        assert_eq!(eqs.len(), 1);
        assert!((eqs[0].state[0] - PI).abs() < 1e-9);
    }

    #[test]
    fn result_does_not_depend_on_seed_enumeration() {
        // Same box traversed with different grids that still cover the
        // basin: the dedup/sort contract keeps the output identical.
        let sys = HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap();
        let a = find_equilibria(&sys, &[(-PI, PI), (-1.0, 1.0)], 21, 1e-11);
        let b = find_equilibria(&sys, &[(PI - 2.0 * PI, PI), (-1.0, 1.0)], 22, 1e-11);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!(euclid(&x.state, &y.state) < 1e-9);
        }
    }
}
