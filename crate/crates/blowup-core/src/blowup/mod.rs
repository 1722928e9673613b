//! Blow-up desingularization of degenerate equilibria.
//!
//! A [`BlowUpChart`] carries the vector field rewritten in polar
//! (1 degree of freedom) or hyperspherical (2 degrees of freedom)
//! coordinates around a center point, with the time reparametrization
//! dt = r·dτ applied so every stored component is `r·d(·)/dt` — smooth at
//! r = 0 with the common factor of r cancelled analytically, never
//! numerically.
//!
//! Equilibria of the reparametrized system on the r = 0 sphere
//! ("angular equilibria") are the directions along which orbits approach
//! or leave the center. [`angular_equilibria`] locates them by multistart
//! Newton on the denominator-cleared angular components,
//! [`classify_angular`] linearizes the blow-up system there, and
//! [`recursive_blowup`] re-expands angular equilibria that are themselves
//! degenerate.
//!
//! Charts centered on a true equilibrium vanish to higher order on the
//! sphere, so the analysis works with the lowest nonvanishing radial
//! Taylor order of each component (the scaling exponent `s` below); the
//! required Taylor coefficients are exact symbolic derivatives, so no
//! numeric division by r ever happens.

mod fixtures;

pub use fixtures::{
    double_angular_fixture, double_jacobian_fixture, paper_fixture,
    simple_blowup_closed_form_eigenvalues, simple_blowup_fixture,
    simple_printed_linearization, Fixture,
};

use alloc::borrow::ToOwned;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::expr::{Bindings, Compiled, EvalError, Expression, UnaryOp};
use crate::fmath;
use crate::hamsys::{
    classify, eigenvalues, spectrum_degenerate, Classification, EquilibriumPoint,
    HamiltonianSystem, Matrix, DEGENERACY_TOL,
};

const TAU: f64 = 2.0 * core::f64::consts::PI;
/// Highest radial Taylor order probed for a nonvanishing angular field.
const MAX_SCALING: usize = 4;
/// Modulo-2π dedup distance for angular roots.
const ANGULAR_DEDUP: f64 = 1e-6;
/// |cleared denominator| below this at a root means the root is a
/// coordinate singularity of the chart, not an equilibrium.
const DENOM_TOL: f64 = 1e-6;

/// Whether the chart is centered on the degenerate point (shifted) or uses
/// absolute coordinates (unshifted, the convention of the printed
/// reference systems whose blow-up energies are H at the origin).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChartMode {
    #[default]
    Shifted,
    Unshifted,
}

/// Errors from chart construction and angular analysis.
#[derive(Debug, Clone, PartialEq)]
pub enum BlowupError {
    /// Blow-up of a non-degenerate equilibrium was requested without force.
    NotDegenerate,
    /// Chart/system dimension mismatch (polar wants 1 dof, hyperspherical 2).
    Dimension(&'static str),
    Eval(EvalError),
    UnknownFixture(String),
    /// No radial Taylor order up to the probe limit gives a nonvanishing
    /// angular field: the chart has no angular structure to analyze.
    NoAngularStructure,
}

impl fmt::Display for BlowupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlowupError::NotDegenerate => {
                write!(f, "equilibrium is not degenerate; blow-up not required (use force)")
            }
            BlowupError::Dimension(msg) => write!(f, "{msg}"),
            BlowupError::Eval(e) => write!(f, "{e}"),
            BlowupError::UnknownFixture(name) => write!(f, "unknown fixture `{name}`"),
            BlowupError::NoAngularStructure => {
                write!(f, "angular field vanishes to all probed radial orders")
            }
        }
    }
}

impl core::error::Error for BlowupError {}

impl From<EvalError> for BlowupError {
    fn from(e: EvalError) -> Self {
        BlowupError::Eval(e)
    }
}

/// One blow-up field component `r·d(var)/dt = numerator / denominator`.
///
/// Denominators are angle-only factors (the hyperspherical charts carry
/// `sin` powers); root finding clears them and rejects roots where they
/// vanish. Polar components use denominator 1.
#[derive(Debug, Clone)]
pub struct ChartComponent {
    pub numerator: Expression,
    pub denominator: Expression,
}

/// A linearization printed in the reference derivation, attached to
/// fixture charts; `at_angles = None` applies it to every angular root.
#[derive(Debug, Clone)]
pub(crate) struct PrintedLinearization {
    pub jacobian: Matrix,
    pub at_angles: Option<Vec<f64>>,
}

/// A blow-up chart: center, chart variables, and the reparametrized field.
#[derive(Debug, Clone)]
pub struct BlowUpChart {
    /// Phase-space center (dimension 2 or 4).
    pub center: Vec<f64>,
    /// Shifted charts measure offsets from `center`; unshifted charts use
    /// absolute coordinates.
    pub shifted: bool,
    /// Recursion depth this chart lives at (0 for first blow-up).
    pub level: usize,
    pub radial_name: String,
    pub angle_names: Vec<String>,
    /// Components in chart-variable order: radial first, then one per angle.
    pub components: Vec<ChartComponent>,
    /// Phase-space coordinates as expressions in the chart variables, when
    /// the chart descends from a system (used for energies and pullbacks).
    map: Option<Vec<Expression>>,
    /// Bound Hamiltonian for blow-up energies.
    h_bound: Option<Expression>,
    printed: Option<PrintedLinearization>,
    /// Restrict roots to the window used by the printed reference analysis
    /// (angles in (−π, π], polar-axis angle on the principal branch).
    paper_window: bool,
    /// Angle tuples listed in the printed reference analysis, for the
    /// `noted_in_reference` flag on roots.
    paper_roots: Option<Vec<Vec<f64>>>,
    /// Phase-space variable names matching `map`, when present.
    phase_names: Option<Vec<String>>,
}

impl BlowUpChart {
    /// Number of angles (1 for polar, 3 for hyperspherical).
    pub fn angle_count(&self) -> usize {
        self.angle_names.len()
    }

    /// Chart variable names: radial then angles.
    pub fn var_names(&self) -> Vec<&str> {
        let mut v = Vec::with_capacity(1 + self.angle_names.len());
        v.push(self.radial_name.as_str());
        v.extend(self.angle_names.iter().map(|s| s.as_str()));
        v
    }

    /// Evaluates the reparametrized field `(r·dr/dt, r·dθ/dt, …)` at the
    /// chart point. Fails on coordinate singularities (vanishing cleared
    /// denominators).
    pub fn field_value(&self, radial: f64, angles: &[f64]) -> Result<Vec<f64>, BlowupError> {
        assert_eq!(angles.len(), self.angle_count());
        let names = self.var_names();
        let mut bindings = Bindings::new();
        bindings.define(names[0], radial).map_err(BlowupError::Eval)?;
        for (name, value) in names[1..].iter().zip(angles) {
            bindings.define(name, *value).map_err(BlowupError::Eval)?;
        }
        self.components
            .iter()
            .map(|c| {
                let n = c.numerator.evaluate(&bindings)?;
                let d = c.denominator.evaluate(&bindings)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(n / d)
            })
            .collect::<Result<Vec<f64>, EvalError>>()
            .map_err(BlowupError::Eval)
    }

    /// Phase-space image of a chart point, when the chart has a map.
    pub fn map_point(&self, radial: f64, angles: &[f64]) -> Option<Vec<f64>> {
        let map = self.map.as_ref()?;
        let names = self.var_names();
        let mut bindings = Bindings::new();
        bindings.define(names[0], radial).ok()?;
        for (name, value) in names[1..].iter().zip(angles) {
            bindings.define(name, *value).ok()?;
        }
        map.iter()
            .map(|e| e.evaluate(&bindings).ok())
            .collect::<Option<Vec<f64>>>()
    }

    /// The chart-map Jacobian ∂(phase)/∂(chart vars) by central finite
    /// differences; used by the pullback identity checks as an oracle
    /// independent of the symbolic layer.
    pub fn map_jacobian_fd(&self, radial: f64, angles: &[f64], h: f64) -> Option<Vec<Vec<f64>>> {
        let dim = self.center.len();
        let nvars = 1 + self.angle_count();
        let mut cols = Vec::with_capacity(nvars);
        for k in 0..nvars {
            let mut hi_r = radial;
            let mut lo_r = radial;
            let mut hi_a = angles.to_vec();
            let mut lo_a = angles.to_vec();
            if k == 0 {
                hi_r += h;
                lo_r -= h;
            } else {
                hi_a[k - 1] += h;
                lo_a[k - 1] -= h;
            }
            let hi = self.map_point(hi_r, &hi_a)?;
            let lo = self.map_point(lo_r, &lo_a)?;
            cols.push(
                (0..dim)
                    .map(|i| (hi[i] - lo[i]) / (2.0 * h))
                    .collect::<Vec<f64>>(),
            );
        }
        Some((0..dim)
            .map(|i| (0..nvars).map(|k| cols[k][i]).collect())
            .collect())
    }

    /// Blow-up energy: H at the chart image of `(radial, angles)`.
    pub fn energy(&self, radial: f64, angles: &[f64]) -> Option<f64> {
        let h = self.h_bound.as_ref()?;
        let point = self.map_point(radial, angles)?;
        let names = self.phase_names.as_ref()?;
        let mut bindings = Bindings::new();
        for (name, value) in names.iter().zip(&point) {
            bindings.define(name, *value).ok()?;
        }
        h.evaluate(&bindings).ok()
    }

    /// Builds a chart directly from field components; the test and fixture
    /// entry point. `components` are `(numerator, denominator)` pairs in
    /// chart-variable order (radial first).
    #[allow(clippy::too_many_arguments)]
    pub fn from_components(
        center: Vec<f64>,
        shifted: bool,
        radial_name: &str,
        angle_names: &[&str],
        components: Vec<ChartComponent>,
    ) -> BlowUpChart {
        assert_eq!(components.len(), 1 + angle_names.len());
        BlowUpChart {
            center,
            shifted,
            level: 0,
            radial_name: radial_name.to_owned(),
            angle_names: angle_names.iter().map(|s| (*s).to_owned()).collect(),
            components,
            map: None,
            h_bound: None,
            printed: None,
            paper_window: false,
            paper_roots: None,
            phase_names: None,
        }
    }

    /// Synthetic polar chart over variables `(r, theta)` from two field
    /// expressions, for tests and recursion experiments.
    pub fn synthetic_polar(field_r: Expression, field_theta: Expression) -> BlowUpChart {
        BlowUpChart::from_components(
            alloc::vec![0.0, 0.0],
            true,
            "r",
            &["theta"],
            alloc::vec![
                ChartComponent {
                    numerator: field_r,
                    denominator: Expression::Const(1.0),
                },
                ChartComponent {
                    numerator: field_theta,
                    denominator: Expression::Const(1.0),
                },
            ],
        )
    }
}

/// An angular root as found on the r = 0 sphere, before linearization.
#[derive(Debug, Clone)]
pub struct AngularRoot {
    /// Canonical angles (polar θ ∈ [0,2π); hyperspherical θ,φ ∈ [0,2π),
    /// η ∈ [0,π] — or the reference window for fixture charts).
    pub angles: Vec<f64>,
    /// Angles exactly as Newton converged, before canonical reduction.
    pub raw_angles: Vec<f64>,
    /// Residual of the (divided) angular field at the root.
    pub residual: f64,
}

/// Counters and context from one angular search.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AngularDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    pub rejected_singular: usize,
    pub rejected_window: usize,
    pub merged_duplicates: usize,
    /// Radial Taylor order at which the angular field first does not vanish
    /// identically (0 for unshifted charts, ≥ 1 for equilibrium-centered).
    pub scaling_exponent: usize,
}

/// A classified angular equilibrium of the blow-up system.
#[derive(Debug, Clone)]
pub struct AngularEquilibrium {
    pub angles: Vec<f64>,
    pub raw_angles: Vec<f64>,
    /// Radial value: always 0 on the blow-up sphere.
    pub radial: f64,
    /// H at the chart image (Ē_fixa / ε_i), when the chart knows its H.
    pub energy: Option<f64>,
    /// Linearization used for classification (the printed reference matrix
    /// on fixture charts, the chain-rule one otherwise).
    pub jacobian: Matrix,
    /// Chain-rule linearization when it differs from `jacobian` (fixture
    /// charts report both rather than forcing agreement).
    pub derived_jacobian: Option<Matrix>,
    /// True when `jacobian` is the as-printed reference matrix.
    pub printed_jacobian: bool,
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    pub degenerate: bool,
    pub residual: f64,
    /// For fixture charts: whether this root appears in the printed
    /// reference analysis (`None` when the chart has no printed root list).
    pub noted_in_reference: Option<bool>,
}

/// Outcome of (possibly recursive) analysis at one angular equilibrium.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolutionStatus {
    /// Non-degenerate: the linearization decides the local structure.
    Resolved,
    /// Degenerate; re-expanded into the child charts below.
    Expanded,
    /// Degenerate and not resolvable here (depth exhausted, unsupported
    /// dimension, or no further angular structure); the string says why.
    Unresolved(String),
}

/// Tree of angular equilibria produced by recursive blow-up.
#[derive(Debug, Clone)]
pub struct BlowupTree {
    pub point: AngularEquilibrium,
    pub status: ResolutionStatus,
    pub children: Vec<BlowupTree>,
}

impl BlowupTree {
    pub fn height(&self) -> usize {
        self.children
            .iter()
            .map(|c| 1 + c.height())
            .max()
            .unwrap_or(0)
    }
}

/// Builds the polar blow-up chart of a 1-dof system around `eq`.
///
/// Shifted mode substitutes q − q* = r cos θ, p − p* = r sin θ; unshifted
/// mode takes q = r cos θ, p = r sin θ. Both right-hand sides are then
/// multiplied through by the reparametrization so the stored components are
/// r·dr/dt = r(cos θ f + sin θ g) and r·dθ/dt = cos θ g − sin θ f, smooth
/// at r = 0 with no numeric division.
pub fn polar_chart(
    sys: &HamiltonianSystem,
    eq: &EquilibriumPoint,
    mode: ChartMode,
) -> Result<BlowUpChart, BlowupError> {
    if !eq.degenerate {
        return Err(BlowupError::NotDegenerate);
    }
    polar_chart_forced(sys, eq, mode)
}

/// [`polar_chart`] without the degeneracy gate.
pub fn polar_chart_forced(
    sys: &HamiltonianSystem,
    eq: &EquilibriumPoint,
    mode: ChartMode,
) -> Result<BlowUpChart, BlowupError> {
    if sys.dof() != 1 {
        return Err(BlowupError::Dimension("polar chart requires 1 degree of freedom"));
    }
    let state_names = sys.state_names();
    let taken: Vec<String> = state_names.iter().map(|s| s.to_string()).collect();
    let radial = fresh_name("r", &taken);
    let angle = fresh_name("theta", &taken);

    let center = match mode {
        ChartMode::Shifted => eq.state.clone(),
        ChartMode::Unshifted => alloc::vec![0.0; 2],
    };

    let r = Expression::var(&radial);
    let cos_t = Expression::unary(UnaryOp::Cos, Expression::var(&angle));
    let sin_t = Expression::unary(UnaryOp::Sin, Expression::var(&angle));
    let q_expr = Expression::add(
        Expression::Const(center[0]),
        Expression::mul(r.clone(), cos_t.clone()),
    );
    let p_expr = Expression::add(
        Expression::Const(center[1]),
        Expression::mul(r.clone(), sin_t.clone()),
    );

    let mut subst = BTreeMap::new();
    subst.insert(state_names[0].to_string(), q_expr.clone());
    subst.insert(state_names[1].to_string(), p_expr.clone());
    let f = sys.field_expressions()[0].substitute(&subst);
    let g = sys.field_expressions()[1].substitute(&subst);

    let n_r = Expression::mul(
        r,
        Expression::add(
            Expression::mul(cos_t.clone(), f.clone()),
            Expression::mul(sin_t.clone(), g.clone()),
        ),
    );
    let n_t = Expression::sub(Expression::mul(cos_t, g), Expression::mul(sin_t, f));

    Ok(BlowUpChart {
        center,
        shifted: mode == ChartMode::Shifted,
        level: 0,
        radial_name: radial,
        angle_names: alloc::vec![angle],
        components: alloc::vec![
            ChartComponent {
                numerator: n_r,
                denominator: Expression::Const(1.0),
            },
            ChartComponent {
                numerator: n_t,
                denominator: Expression::Const(1.0),
            },
        ],
        map: Some(alloc::vec![q_expr, p_expr]),
        h_bound: Some(sys.hamiltonian_bound().clone()),
        printed: None,
        paper_window: false,
        paper_roots: None,
        phase_names: Some(taken),
    })
}

/// Builds the hyperspherical blow-up chart of a 2-dof system around `eq`.
///
/// The map (per state component, hypersphere ordering (φ₁, p₁, φ₂, p₂)):
/// φ₁ = R sinθ cosφ sinη, p₁ = R sinθ sinφ sinη, φ₂ = R cosθ sinη,
/// p₂ = R cosη, optionally offset by the center in shifted mode. Stored
/// components are R·d(R,θ,φ,η)/dt; the θ and φ components carry the
/// sin-power denominators that the angular search clears.
pub fn hyperspherical_chart(
    sys: &HamiltonianSystem,
    eq: &EquilibriumPoint,
    mode: ChartMode,
) -> Result<BlowUpChart, BlowupError> {
    if !eq.degenerate {
        return Err(BlowupError::NotDegenerate);
    }
    hyperspherical_chart_forced(sys, eq, mode)
}

/// [`hyperspherical_chart`] without the degeneracy gate.
pub fn hyperspherical_chart_forced(
    sys: &HamiltonianSystem,
    eq: &EquilibriumPoint,
    mode: ChartMode,
) -> Result<BlowUpChart, BlowupError> {
    if sys.dof() != 2 {
        return Err(BlowupError::Dimension(
            "hyperspherical chart requires 2 degrees of freedom",
        ));
    }
    let state_names = sys.state_names();
    let taken: Vec<String> = state_names.iter().map(|s| s.to_string()).collect();
    let radial = fresh_name("R", &taken);
    let theta = fresh_name("theta", &taken);
    let phi = fresh_name("phi", &taken);
    let eta = fresh_name("eta", &taken);

    let center = match mode {
        ChartMode::Shifted => eq.state.clone(),
        ChartMode::Unshifted => alloc::vec![0.0; 4],
    };

    let e = |name: &str| Expression::var(name);
    let sin = |x: Expression| Expression::unary(UnaryOp::Sin, x);
    let cos = |x: Expression| Expression::unary(UnaryOp::Cos, x);
    let (st, ct) = (sin(e(&theta)), cos(e(&theta)));
    let (sp, cp) = (sin(e(&phi)), cos(e(&phi)));
    let (se, ce) = (sin(e(&eta)), cos(e(&eta)));
    let mul3 = |a: Expression, b: Expression, c: Expression| {
        Expression::mul(Expression::mul(a, b), c)
    };

    // Unit direction and its angle partials, in state order (φ₁, φ₂, p₁, p₂).
    let u = [
        mul3(st.clone(), cp.clone(), se.clone()),
        Expression::mul(ct.clone(), se.clone()),
        mul3(st.clone(), sp.clone(), se.clone()),
        ce.clone(),
    ];
    let u_theta = [
        mul3(ct.clone(), cp.clone(), se.clone()),
        Expression::neg(Expression::mul(st.clone(), se.clone())),
        mul3(ct.clone(), sp.clone(), se.clone()),
        Expression::Const(0.0),
    ];
    let u_phi = [
        Expression::neg(mul3(st.clone(), sp.clone(), se.clone())),
        Expression::Const(0.0),
        mul3(st.clone(), cp.clone(), se.clone()),
        Expression::Const(0.0),
    ];
    let u_eta = [
        mul3(st.clone(), cp.clone(), ce.clone()),
        Expression::mul(ct.clone(), ce.clone()),
        mul3(st.clone(), sp.clone(), ce.clone()),
        Expression::neg(se.clone()),
    ];

    let map: Vec<Expression> = (0..4)
        .map(|i| {
            Expression::add(
                Expression::Const(center[i]),
                Expression::mul(e(&radial), u[i].clone()),
            )
        })
        .collect();

    let mut subst = BTreeMap::new();
    for (name, expr) in state_names.iter().zip(&map) {
        subst.insert(name.to_string(), expr.clone());
    }
    let field: Vec<Expression> = sys
        .field_expressions()
        .iter()
        .map(|f| f.substitute(&subst))
        .collect();

    let dot = |frame: &[Expression; 4]| {
        let mut acc = Expression::Const(0.0);
        for (fv, xv) in frame.iter().zip(&field) {
            acc = Expression::add(acc, Expression::mul(fv.clone(), xv.clone()));
        }
        acc
    };

    let sin2 = |x: Expression| Expression::pow(x, Expression::Const(2.0));
    let components = alloc::vec![
        ChartComponent {
            numerator: Expression::mul(e(&radial), dot(&u)),
            denominator: Expression::Const(1.0),
        },
        ChartComponent {
            numerator: dot(&u_theta),
            denominator: sin2(se.clone()),
        },
        ChartComponent {
            numerator: dot(&u_phi),
            denominator: Expression::mul(sin2(st.clone()), sin2(se.clone())),
        },
        ChartComponent {
            numerator: dot(&u_eta),
            denominator: Expression::Const(1.0),
        },
    ];

    Ok(BlowUpChart {
        center,
        shifted: mode == ChartMode::Shifted,
        level: 0,
        radial_name: radial,
        angle_names: alloc::vec![theta, phi, eta],
        components,
        map: Some(map),
        h_bound: Some(sys.hamiltonian_bound().clone()),
        printed: None,
        paper_window: false,
        paper_roots: None,
        phase_names: Some(taken),
    })
}

fn fresh_name(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.iter().any(|t| t == &name) {
        name.push('_');
    }
    name
}

/// Locates equilibria of the blow-up system on the r = 0 sphere.
///
/// Sets r = 0 in the angular components (at the lowest nonvanishing radial
/// Taylor order), clears denominators before root finding, rejects roots at
/// cleared-denominator zeros, runs multistart Newton over the angular
/// torus, and deduplicates modulo 2π. An empty list is a legal outcome.
pub fn angular_equilibria(
    chart: &BlowUpChart,
    grid: usize,
    tol: f64,
) -> Result<(Vec<AngularRoot>, AngularDiagnostics), BlowupError> {
    let analyzer = AngularAnalyzer::new(chart)?;
    analyzer.find_roots(grid, tol)
}

/// Linearizes the blow-up system in (r, angles) at an angular root and
/// classifies it. Fixture charts substitute their printed linearization
/// where it applies, keeping the chain-rule matrix in `derived_jacobian`.
pub fn classify_angular(
    chart: &BlowUpChart,
    root: &AngularRoot,
) -> Result<AngularEquilibrium, BlowupError> {
    let analyzer = AngularAnalyzer::new(chart)?;
    analyzer.classify(root)
}

/// Recursively blows up a degenerate angular equilibrium, up to `depth`
/// further levels, on polar (single-angle) charts. Returns the analysis
/// tree; non-degenerate input yields a height-0 tree.
pub fn recursive_blowup(
    chart: &BlowUpChart,
    point: &AngularEquilibrium,
    depth: usize,
) -> Result<BlowupTree, BlowupError> {
    recurse(chart, point, depth, 1)
}

/// Full pipeline on one chart: angular roots, classification, recursion.
pub fn analyze_chart(
    chart: &BlowUpChart,
    grid: usize,
    tol: f64,
    depth: usize,
) -> Result<(Vec<BlowupTree>, AngularDiagnostics), BlowupError> {
    let analyzer = AngularAnalyzer::new(chart)?;
    let (roots, diag) = analyzer.find_roots(grid, tol)?;
    let mut trees = Vec::with_capacity(roots.len());
    for root in &roots {
        let point = analyzer.classify(root)?;
        trees.push(recurse(chart, &point, depth, 1)?);
    }
    Ok((trees, diag))
}

fn recurse(
    chart: &BlowUpChart,
    point: &AngularEquilibrium,
    depth: usize,
    level: usize,
) -> Result<BlowupTree, BlowupError> {
    if !point.degenerate {
        return Ok(BlowupTree {
            point: point.clone(),
            status: ResolutionStatus::Resolved,
            children: Vec::new(),
        });
    }
    if chart.angle_count() != 1 {
        return Ok(BlowupTree {
            point: point.clone(),
            status: ResolutionStatus::Unresolved(
                "recursive blow-up is only applied on single-angle charts".to_string(),
            ),
            children: Vec::new(),
        });
    }
    if depth == 0 {
        return Ok(BlowupTree {
            point: point.clone(),
            status: ResolutionStatus::Unresolved(format!(
                "unresolved after {level_done} blow-up level(s): depth exhausted",
                level_done = level - 1
            )),
            children: Vec::new(),
        });
    }

    let child = child_polar_chart(chart, point.raw_angles[0], level)?;
    let analyzer = AngularAnalyzer::new(&child);
    let analyzer = match analyzer {
        Ok(a) => a,
        Err(BlowupError::NoAngularStructure) => {
            return Ok(BlowupTree {
                point: point.clone(),
                status: ResolutionStatus::Unresolved(
                    "no angular structure at the next blow-up level".to_string(),
                ),
                children: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let (roots, _) = analyzer.find_roots(64, 1e-10)?;
    if roots.is_empty() {
        return Ok(BlowupTree {
            point: point.clone(),
            status: ResolutionStatus::Unresolved(
                "no angular equilibria at the next blow-up level".to_string(),
            ),
            children: Vec::new(),
        });
    }
    let mut children = Vec::with_capacity(roots.len());
    for root in &roots {
        let child_point = analyzer.classify(root)?;
        children.push(recurse(&child, &child_point, depth - 1, level + 1)?);
    }
    Ok(BlowupTree {
        point: point.clone(),
        status: ResolutionStatus::Expanded,
        children,
    })
}

/// Polar blow-up of the (r, θ)-plane system around a degenerate angular
/// point (0, θ*): the recursion step. Works on the raw chart components
/// (polar charts carry no denominators); common radial powers introduced by
/// the composition are absorbed by the child's own scaling exponent.
fn child_polar_chart(
    parent: &BlowUpChart,
    theta_star: f64,
    level: usize,
) -> Result<BlowUpChart, BlowupError> {
    let taken: Vec<String> = parent.var_names().iter().map(|s| s.to_string()).collect();
    let radial = fresh_name(&format!("r{}", level + 1), &taken);
    let angle = fresh_name(&format!("theta{}", level + 1), &taken);

    let rho = Expression::var(&radial);
    let cos_p = Expression::unary(UnaryOp::Cos, Expression::var(&angle));
    let sin_p = Expression::unary(UnaryOp::Sin, Expression::var(&angle));
    let r_expr = Expression::mul(rho.clone(), cos_p.clone());
    let t_expr = Expression::add(
        Expression::Const(theta_star),
        Expression::mul(rho.clone(), sin_p.clone()),
    );

    let mut subst = BTreeMap::new();
    subst.insert(parent.radial_name.clone(), r_expr);
    subst.insert(parent.angle_names[0].clone(), t_expr);
    let f = parent.components[0].numerator.substitute(&subst);
    let g = parent.components[1].numerator.substitute(&subst);

    let n_r = Expression::mul(
        rho,
        Expression::add(
            Expression::mul(cos_p.clone(), f.clone()),
            Expression::mul(sin_p.clone(), g.clone()),
        ),
    );
    let n_t = Expression::sub(Expression::mul(cos_p, g), Expression::mul(sin_p, f));

    let map = parent.map.as_ref().map(|m| {
        m.iter()
            .map(|e| e.substitute(&subst))
            .collect::<Vec<Expression>>()
    });

    Ok(BlowUpChart {
        center: parent.center.clone(),
        shifted: parent.shifted,
        level,
        radial_name: radial,
        angle_names: alloc::vec![angle],
        components: alloc::vec![
            ChartComponent {
                numerator: n_r,
                denominator: Expression::Const(1.0),
            },
            ChartComponent {
                numerator: n_t,
                denominator: Expression::Const(1.0),
            },
        ],
        map,
        h_bound: parent.h_bound.clone(),
        printed: None,
        paper_window: false,
        paper_roots: None,
        phase_names: parent.phase_names.clone(),
    })
}

/// Compiled angular analysis state for one chart: the scaling exponent and
/// every Taylor-coefficient expression the search and linearization need.
struct AngularAnalyzer<'c> {
    chart: &'c BlowUpChart,
    s: usize,
    /// Cleared angular numerator Taylor coefficients n_i^(s) over angles.
    level_fns: Vec<Compiled>,
    /// ∂ n_i^(s) / ∂ angle_j, row major (A×A).
    level_jac: Vec<Compiled>,
    /// Divided angular component values g_i = n_i^(s)/D_i (residuals).
    divided_fns: Vec<Compiled>,
    /// Denominators over angles, one per angular component.
    denoms: Vec<Compiled>,
    /// Linearization pieces: radial column entries (order s+1 coefficients
    /// over denominators) for all 1+A components...
    radial_col: Vec<Compiled>,
    /// ... and angle partials ∂/∂Ω_j of (coefficient_s/D_i) for all
    /// components, row major ((1+A) × A).
    angle_block: Vec<Compiled>,
}

impl<'c> AngularAnalyzer<'c> {
    fn new(chart: &'c BlowUpChart) -> Result<AngularAnalyzer<'c>, BlowupError> {
        let a = chart.angle_count();
        let angle_refs: Vec<&str> = chart.angle_names.iter().map(|s| s.as_str()).collect();
        let radial = chart.radial_name.as_str();

        // Radial Taylor coefficients of the numerators at r = 0 as exact
        // symbolic derivatives, built order by order until some angular
        // coefficient is not identically zero on a probe grid (that order
        // is the scaling exponent s); one further order feeds the radial
        // column of the linearization.
        let mut zero_radial = BTreeMap::new();
        zero_radial.insert(radial.to_string(), Expression::Const(0.0));
        let ncomp = 1 + a;

        let compile = |e: &Expression| {
            e.compile(&angle_refs).map_err(|err| {
                BlowupError::Eval(EvalError::UnboundVariable(err.variable))
            })
        };

        let mut derivs: Vec<Expression> = chart
            .components
            .iter()
            .map(|c| c.numerator.clone())
            .collect();
        let mut coeff: Vec<Vec<Expression>> = alloc::vec![Vec::new(); ncomp];
        let mut factorial = 1.0;
        let push_order = |order: usize,
                              derivs: &mut Vec<Expression>,
                              coeff: &mut Vec<Vec<Expression>>,
                              factorial: &mut f64| {
            if order > 0 {
                *factorial *= order as f64;
                for d in derivs.iter_mut() {
                    *d = d.differentiate(radial);
                }
            }
            for (c, d) in coeff.iter_mut().zip(derivs.iter()) {
                c.push(Expression::mul(
                    Expression::Const(1.0 / *factorial),
                    d.substitute(&zero_radial),
                ));
            }
        };

        let probe_per_angle = if a == 1 { 64 } else { 8 };
        let mut s = None;
        for order in 0..=MAX_SCALING {
            push_order(order, &mut derivs, &mut coeff, &mut factorial);
            let fns: Vec<Compiled> = coeff[1..]
                .iter()
                .map(|orders| compile(&orders[order]))
                .collect::<Result<_, _>>()?;
            let mut max_abs = 0.0_f64;
            let mut idx = alloc::vec![0usize; a];
            'probe: loop {
                let angles: Vec<f64> = idx
                    .iter()
                    .map(|k| TAU * (*k as f64 + 0.37) / probe_per_angle as f64)
                    .collect();
                for f in &fns {
                    if let Ok(v) = f.eval(&angles) {
                        max_abs = fmath::max(max_abs, fmath::abs(v));
                    }
                }
                if max_abs > 1e-11 {
                    break 'probe;
                }
                let mut d = 0;
                loop {
                    if d == a {
                        break;
                    }
                    idx[d] += 1;
                    if idx[d] < probe_per_angle {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == a {
                    break;
                }
            }
            if max_abs > 1e-11 {
                s = Some(order);
                break;
            }
        }
        let s = s.ok_or(BlowupError::NoAngularStructure)?;
        push_order(s + 1, &mut derivs, &mut coeff, &mut factorial);

        let level_fns: Vec<Compiled> = coeff[1..]
            .iter()
            .map(|orders| compile(&orders[s]))
            .collect::<Result<_, _>>()?;
        let mut level_jac = Vec::with_capacity(a * a);
        for orders in &coeff[1..] {
            for angle in &angle_refs {
                level_jac.push(compile(&orders[s].differentiate(angle))?);
            }
        }
        let denoms: Vec<Compiled> = chart
            .components
            .iter()
            .map(|c| compile(&c.denominator))
            .collect::<Result<_, _>>()?;
        let divided_fns: Vec<Compiled> = chart.components[1..]
            .iter()
            .zip(&coeff[1..])
            .map(|(c, orders)| {
                compile(&Expression::div(orders[s].clone(), c.denominator.clone()))
            })
            .collect::<Result<_, _>>()?;

        let mut radial_col = Vec::with_capacity(ncomp);
        let mut angle_block = Vec::with_capacity(ncomp * a);
        for (comp, orders) in chart.components.iter().zip(&coeff) {
            radial_col.push(compile(&Expression::div(
                orders[s + 1].clone(),
                comp.denominator.clone(),
            ))?);
            let divided = Expression::div(orders[s].clone(), comp.denominator.clone());
            for angle in &angle_refs {
                angle_block.push(compile(&divided.differentiate(angle))?);
            }
        }

        Ok(AngularAnalyzer {
            chart,
            s,
            level_fns,
            level_jac,
            divided_fns,
            denoms,
            radial_col,
            angle_block,
        })
    }

    fn find_roots(
        &self,
        grid: usize,
        tol: f64,
    ) -> Result<(Vec<AngularRoot>, AngularDiagnostics), BlowupError> {
        assert!(grid >= 2, "angular grid must have at least 2 seeds");
        let a = self.chart.angle_count();
        let mut diag = AngularDiagnostics {
            scaling_exponent: self.s,
            ..AngularDiagnostics::default()
        };

        let mut found: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        let mut idx = alloc::vec![0usize; a];
        loop {
            let seed: Vec<f64> = idx.iter().map(|k| TAU * *k as f64 / grid as f64).collect();
            diag.seeds += 1;
            if let Some(raw) = self.newton(&seed, tol) {
                diag.converged += 1;
                // Coordinate-singularity rejection on the cleared system.
                let singular = self.denoms[1..].iter().any(|d| {
                    d.eval(&raw).map(|v| fmath::abs(v) < DENOM_TOL).unwrap_or(true)
                });
                if singular {
                    diag.rejected_singular += 1;
                } else {
                    match self.canonicalize(&raw) {
                        Some(canonical) => {
                            let residual = self.divided_residual(&canonical).unwrap_or(f64::INFINITY);
                            found.push((canonical, raw, residual));
                        }
                        None => diag.rejected_window += 1,
                    }
                }
            }
            let mut d = 0;
            loop {
                if d == a {
                    break;
                }
                idx[d] += 1;
                if idx[d] < grid {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == a {
                break;
            }
        }

        found.sort_by(|x, y| {
            x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal)
        });
        let mut kept: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::new();
        for (canonical, raw, residual) in found {
            match kept
                .iter_mut()
                .find(|(c, _, _)| circular_distance(c, &canonical) < ANGULAR_DEDUP)
            {
                Some(entry) => {
                    diag.merged_duplicates += 1;
                    if residual < entry.2 {
                        *entry = (canonical, raw, residual);
                    }
                }
                None => kept.push((canonical, raw, residual)),
            }
        }
        kept.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(core::cmp::Ordering::Equal));

        let roots = kept
            .into_iter()
            .filter(|(_, _, residual)| *residual <= fmath::max(tol, 1e-9))
            .map(|(angles, raw_angles, residual)| AngularRoot {
                angles,
                raw_angles,
                residual,
            })
            .collect();
        Ok((roots, diag))
    }

    /// Multistart Newton iteration on the cleared angular numerators.
    /// Iterates to the floating-point floor (not just the first
    /// sub-tolerance residual) so double roots collapse into one location
    /// that the modulo-2π dedup can merge.
    fn newton(&self, seed: &[f64], tol: f64) -> Option<Vec<f64>> {
        let a = seed.len();
        let mut x = seed.to_vec();
        let mut best: Option<(Vec<f64>, f64)> = None;
        for _ in 0..80 {
            let f: Vec<f64> = self
                .level_fns
                .iter()
                .map(|c| c.eval(&x))
                .collect::<Result<_, _>>()
                .ok()?;
            let norm = f.iter().fold(0.0, |m, v| fmath::max(m, fmath::abs(*v)));
            if best.as_ref().map(|(_, bn)| norm < *bn).unwrap_or(true) {
                best = Some((x.clone(), norm));
            }
            if norm == 0.0 {
                break;
            }
            let mut jac = Matrix::zeros(a);
            for i in 0..a {
                for j in 0..a {
                    jac[(i, j)] = self.level_jac[i * a + j].eval(&x).ok()?;
                }
            }
            let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
            let Some(delta) = jac.solve(&rhs) else { break };
            // Clip the step to half a turn to stay in the seed's basin.
            let step_norm = delta.iter().fold(0.0, |m, v| fmath::max(m, fmath::abs(*v)));
            let scale = if step_norm > core::f64::consts::FRAC_PI_2 {
                core::f64::consts::FRAC_PI_2 / step_norm
            } else {
                1.0
            };
            for (xi, di) in x.iter_mut().zip(&delta) {
                *xi += scale * di;
            }
            if scale * step_norm <= 1e-15 * (1.0 + x.iter().fold(0.0, |m, v| fmath::max(m, fmath::abs(*v)))) {
                let f: Vec<f64> = self
                    .level_fns
                    .iter()
                    .map(|c| c.eval(&x))
                    .collect::<Result<_, _>>()
                    .ok()?;
                let norm = f.iter().fold(0.0, |m, v| fmath::max(m, fmath::abs(*v)));
                if best.as_ref().map(|(_, bn)| norm < *bn).unwrap_or(true) {
                    best = Some((x.clone(), norm));
                }
                break;
            }
        }
        let (mut x, norm) = best?;
        if norm > fmath::max(tol, 1e-13) {
            return None;
        }

        // Scalar double roots that do stall (additive cancellation in the
        // angular function) are refined on the derivative, whose zero
        // there is simple and fully resolvable.
        if a == 1 {
            let df = self.level_jac[0].eval(&x).ok()?;
            let fscale = fmath::abs(self.level_fns[0].eval(&x).ok()?);
            if fmath::abs(df) <= 1e-6 {
                let mut y = x[0];
                for _ in 0..50 {
                    let d1 = self.level_jac[0].eval(&[y]).ok()?;
                    let d2 = self.second_derivative(y)?;
                    if fmath::abs(d2) < 1e-14 {
                        break;
                    }
                    let step = d1 / d2;
                    y -= step;
                    if fmath::abs(step) <= 1e-15 * (1.0 + fmath::abs(y)) {
                        break;
                    }
                }
                let refined_res = self.level_fns[0].eval(&[y]).ok()?;
                if fmath::abs(refined_res) <= fmath::max(tol, fscale) {
                    x[0] = y;
                }
            }
        }
        Some(x)
    }

    /// d²/dθ² of the scalar angular function, by finite differences of the
    /// compiled first derivative (only used to steer the double-root
    /// polish, not to assert values).
    fn second_derivative(&self, y: f64) -> Option<f64> {
        let h = 1e-6;
        let hi = self.level_jac[0].eval(&[y + h]).ok()?;
        let lo = self.level_jac[0].eval(&[y - h]).ok()?;
        Some((hi - lo) / (2.0 * h))
    }

    fn divided_residual(&self, angles: &[f64]) -> Option<f64> {
        let mut worst = 0.0_f64;
        for f in &self.divided_fns {
            worst = fmath::max(worst, fmath::abs(f.eval(angles).ok()?));
        }
        Some(worst)
    }

    /// Reduces converged angles into the chart's canonical window; `None`
    /// rejects the root (reference-window filtering on fixture charts).
    fn canonicalize(&self, raw: &[f64]) -> Option<Vec<f64>> {
        if self.chart.paper_window {
            // Reference window: every angle in (−π, π], polar-axis angle η
            // restricted to the principal branch (−π/2, π/2); tuples
            // outside parametrize the antipodal hemisphere and are chart
            // redundancies of roots already inside.
            let reduced: Vec<f64> = raw.iter().map(|v| wrap_signed(*v)).collect();
            if reduced.len() == 3 && fmath::abs(reduced[2]) >= core::f64::consts::FRAC_PI_2 {
                return None;
            }
            Some(reduced)
        } else if raw.len() == 3 {
            // Hyperspherical: θ, φ ∈ [0, 2π), η ∈ [0, π] using the chart
            // identity (θ, φ, η) ≡ (θ + π, φ, 2π − η).
            let mut theta = wrap_unsigned(raw[0]);
            let phi = wrap_unsigned(raw[1]);
            let mut eta = wrap_unsigned(raw[2]);
            if eta > core::f64::consts::PI {
                eta = TAU - eta;
                theta = wrap_unsigned(theta + core::f64::consts::PI);
            }
            Some(alloc::vec![theta, phi, eta])
        } else {
            Some(raw.iter().map(|v| wrap_unsigned(*v)).collect())
        }
    }

    fn classify(&self, root: &AngularRoot) -> Result<AngularEquilibrium, BlowupError> {
        let a = self.chart.angle_count();
        let angles = &root.raw_angles;
        let dim = 1 + a;

        let mut derived = Matrix::zeros(dim);
        for i in 0..dim {
            derived[(i, 0)] = self.radial_col[i].eval(angles)?;
            for j in 0..a {
                derived[(i, 1 + j)] = self.angle_block[i * a + j].eval(angles)?;
            }
        }

        let printed = self.chart.printed.as_ref().and_then(|p| {
            let applies = match &p.at_angles {
                None => true,
                Some(at) => circular_distance(at, &root.angles) < 1e-6,
            };
            if applies {
                Some(p.jacobian.clone())
            } else {
                None
            }
        });

        let (jacobian, derived_jacobian, printed_flag) = match printed {
            Some(p) => (p, Some(derived), true),
            None => (derived, None, false),
        };

        let eigenvalues = eigenvalues(&jacobian);
        let classification = classify(&eigenvalues, DEGENERACY_TOL);
        let degenerate = spectrum_degenerate(&eigenvalues, DEGENERACY_TOL);
        let energy = self.chart.energy(0.0, angles);
        let noted_in_reference = self.chart.paper_roots.as_ref().map(|list| {
            list.iter()
                .any(|p| circular_distance(p, &root.angles) < 1e-6)
        });

        Ok(AngularEquilibrium {
            angles: root.angles.clone(),
            raw_angles: root.raw_angles.clone(),
            radial: 0.0,
            energy,
            jacobian,
            derived_jacobian,
            printed_jacobian: printed_flag,
            eigenvalues,
            classification,
            degenerate,
            residual: root.residual,
            noted_in_reference,
        })
    }
}

/// Componentwise circular (mod 2π) Euclidean distance between angle tuples.
pub fn circular_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = wrap_signed(x - y);
            d * d
        })
        .sum();
    fmath::sqrt(sum)
}

/// Reduces an angle to (−π, π].
pub fn wrap_signed(x: f64) -> f64 {
    let mut y = x - TAU * fmath::round(x / TAU);
    if y <= -core::f64::consts::PI {
        y += TAU;
    }
    y
}

/// Reduces an angle to [0, 2π), snapping values within 1e-9 of 2π to 0.
pub fn wrap_unsigned(x: f64) -> f64 {
    let mut y = x - TAU * fmath::floor(x / TAU);
    if y < 0.0 {
        y += TAU;
    }
    if y >= TAU - 1e-9 {
        y = 0.0;
    }
    y
}
