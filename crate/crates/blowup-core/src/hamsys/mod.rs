//! Hamiltonian systems: canonical vector fields, equilibrium location,
//! linearization, eigenvalues, and equilibrium classification.
//!
//! A [`HamiltonianSystem`] owns the Hamiltonian H symbolically and derives
//! the canonical field (dq/dt, dp/dt) = (∂H/∂p, −∂H/∂q) by exact symbolic
//! differentiation at build time. Systems are immutable after construction;
//! every operation here is a pure function of the inputs and can run
//! concurrently.

mod search;

pub use search::{find_equilibria, find_equilibria_with_diagnostics, SearchDiagnostics};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::expr::{Bindings, Compiled, EvalError, Expression, ParseError};
use crate::fmath;
pub use crate::linalg::Matrix;

/// Default relative tolerance deciding when an eigenvalue counts as zero:
/// |λ| < tol · max(1, spectral radius).
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Residual factor for accepting a state as an equilibrium:
/// ‖F(s)‖∞ ≤ RESIDUAL_TOL · (1 + field scale near s).
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Equilibrium type of a linearization, following the usual planar
/// taxonomy. Four-dimensional spectra are reported as the product of two
/// planar types when the spectrum splits into a ±real pair plus a remaining
/// pair; spectra that do not split are reported as such, never guessed.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    StableNode,
    UnstableNode,
    /// Equal real eigenvalues of one sign (nó flexionado).
    InflectedNode,
    StableFocus,
    UnstableFocus,
    Center,
    Saddle,
    /// At least one eigenvalue is zero within tolerance; the linearization
    /// does not decide the local structure.
    Degenerate,
    /// Direct product of two planar types (dimension 4 only).
    Product(Vec<Classification>),
    /// Dimension-4 spectrum with no ±-symmetric real pair to split on.
    UnpairedSpectrum,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::StableNode => write!(f, "stable node"),
            Classification::UnstableNode => write!(f, "unstable node"),
            Classification::InflectedNode => write!(f, "inflected node"),
            Classification::StableFocus => write!(f, "stable focus"),
            Classification::UnstableFocus => write!(f, "unstable focus"),
            Classification::Center => write!(f, "center"),
            Classification::Saddle => write!(f, "saddle"),
            Classification::Degenerate => write!(f, "degenerate"),
            Classification::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " x ")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            Classification::UnpairedSpectrum => write!(f, "unpaired spectrum"),
        }
    }
}

/// A located equilibrium with its full local data.
#[derive(Debug, Clone)]
pub struct EquilibriumPoint {
    /// Phase-space location, coordinates then momenta.
    pub state: Vec<f64>,
    /// H at the point (the energy surface E_fixa it sits on).
    pub energy: f64,
    /// Jacobian of the vector field at the point.
    pub jacobian: Matrix,
    /// Spectrum of the Jacobian, sorted by (re, im).
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    /// True iff some eigenvalue modulus is below the degeneracy tolerance.
    pub degenerate: bool,
    /// ‖F‖∞ actually measured at the point.
    pub residual: f64,
}

/// Errors from building or interrogating a system.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemError {
    Parse(ParseError),
    Eval(EvalError),
    /// A symbol is used as more than one of coordinate / momentum / parameter.
    NameCollision(String),
    /// A free variable of H is neither a coordinate, momentum nor parameter.
    UnboundSymbol(String),
    /// Coordinate and momentum lists differ in length.
    DimensionMismatch { coords: usize, momenta: usize },
    /// Only 1 and 2 degrees of freedom are supported.
    UnsupportedDofs(usize),
    /// `analyze_equilibrium` was handed a state that fails the residual test.
    NotAnEquilibrium { residual: f64, threshold: f64 },
}

impl fmt::Display for SystemError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemError::Parse(e) => write!(f, "{e}"),
            SystemError::Eval(e) => write!(f, "{e}"),
            SystemError::NameCollision(name) => {
                write!(f, "symbol `{name}` is used in more than one role")
            }
            SystemError::UnboundSymbol(name) => write!(
                f,
                "free variable `{name}` is neither a coordinate, a momentum nor a bound parameter"
            ),
            SystemError::DimensionMismatch { coords, momenta } => write!(
                f,
                "coordinate/momentum count mismatch: {coords} vs {momenta}"
            ),
            SystemError::UnsupportedDofs(n) => {
                write!(f, "{n} degrees of freedom unsupported (expected 1 or 2)")
            }
            SystemError::NotAnEquilibrium { residual, threshold } => write!(
                f,
                "not an equilibrium: field residual {residual:e} exceeds {threshold:e}"
            ),
        }
    }
}

impl core::error::Error for SystemError {}

impl From<ParseError> for SystemError {
    fn from(e: ParseError) -> Self {
        SystemError::Parse(e)
    }
}

impl From<EvalError> for SystemError {
    fn from(e: EvalError) -> Self {
        SystemError::Eval(e)
    }
}

/// A Hamiltonian system: H, canonical variable names, bound parameter
/// values, and the symbolic field/Jacobian derived from them.
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    h: Expression,
    h_bound: Expression,
    coords: Vec<String>,
    momenta: Vec<String>,
    params: Bindings,
    field: Vec<Expression>,
    jac: Vec<Expression>,
    compiled_h: Compiled,
    compiled_field: Vec<Compiled>,
    compiled_jac: Vec<Compiled>,
}

impl HamiltonianSystem {
    /// Builds and validates a system from Hamiltonian text.
    ///
    /// Every free variable of H must be a coordinate, a momentum, or bound
    /// in `params`; the three name sets must be disjoint.
    pub fn build(
        h_text: &str,
        coords: &[&str],
        momenta: &[&str],
        params: Bindings,
    ) -> Result<HamiltonianSystem, SystemError> {
        let h = Expression::parse(h_text)?;
        Self::from_expression(h, coords, momenta, params)
    }

    /// Same as [`HamiltonianSystem::build`] from an already-parsed tree.
    pub fn from_expression(
        h: Expression,
        coords: &[&str],
        momenta: &[&str],
        params: Bindings,
    ) -> Result<HamiltonianSystem, SystemError> {
        if coords.len() != momenta.len() {
            return Err(SystemError::DimensionMismatch {
                coords: coords.len(),
                momenta: momenta.len(),
            });
        }
        let n = coords.len();
        if n == 0 || n > 2 {
            return Err(SystemError::UnsupportedDofs(n));
        }
        let mut seen: Vec<&str> = Vec::new();
        for name in coords.iter().chain(momenta.iter()) {
            if seen.contains(name) || params.contains(name) {
                return Err(SystemError::NameCollision(name.to_string()));
            }
            seen.push(name);
        }
        for free in h.free_vars() {
            if !seen.contains(&free.as_str()) && !params.contains(&free) {
                return Err(SystemError::UnboundSymbol(free));
            }
        }

        // Bind parameters as constants so the derived field depends only on
        // the state variables.
        let mut param_map = BTreeMap::new();
        for (name, value) in params.iter() {
            param_map.insert(name.to_string(), Expression::Const(value));
        }
        let h_bound = h.substitute(&param_map);

        let mut field = Vec::with_capacity(2 * n);
        for p in momenta {
            field.push(h_bound.differentiate(p));
        }
        for q in coords {
            field.push(Expression::neg(h_bound.differentiate(q)));
        }

        let state_names: Vec<&str> = coords.iter().chain(momenta.iter()).copied().collect();
        let mut jac = Vec::with_capacity(4 * n * n);
        for fi in &field {
            for name in &state_names {
                jac.push(fi.differentiate(name));
            }
        }

        let compile =
            |e: &Expression| e.compile(&state_names).expect("state variables cover the field");
        let compiled_h = compile(&h_bound);
        let compiled_field = field.iter().map(compile).collect();
        let compiled_jac = jac.iter().map(compile).collect();

        Ok(HamiltonianSystem {
            h,
            h_bound,
            coords: coords.iter().map(|s| s.to_string()).collect(),
            momenta: momenta.iter().map(|s| s.to_string()).collect(),
            params,
            field,
            jac,
            compiled_h,
            compiled_field,
            compiled_jac,
        })
    }

    /// Simple pendulum under a constant external torque `T`:
    /// H = p²/(2 m L²) − m g L cos q − T q.
    pub fn simple_pendulum_torque(
        m: f64,
        g: f64,
        l: f64,
        t: f64,
    ) -> Result<HamiltonianSystem, SystemError> {
        let params =
            Bindings::from_pairs([("m", m), ("g", g), ("L", l), ("T", t)]).map_err(SystemError::Eval)?;
        Self::build(
            "p^2/(2*m*L^2) - m*g*L*cos(q) - T*q",
            &["q"],
            &["p"],
            params,
        )
    }

    /// Double pendulum with equal masses and segment lengths under constant
    /// torques β₁ = 2 m g L and β₂ = m g L (baked into the potential).
    pub fn double_pendulum_torque(m: f64, g: f64, l: f64) -> Result<HamiltonianSystem, SystemError> {
        let params = Bindings::from_pairs([("m", m), ("g", g), ("L", l)]).map_err(SystemError::Eval)?;
        Self::build(
            "(p1^2/2 + p2^2 - cos(phi1-phi2)*p1*p2)/(m*L^2*(1+sin(phi1-phi2)^2)) \
             - 2*m*g*L*cos(phi1) - m*g*L*cos(phi2) + 2*m*g*L*phi1 + m*g*L*phi2",
            &["phi1", "phi2"],
            &["p1", "p2"],
            params,
        )
    }

    pub fn dof(&self) -> usize {
        self.coords.len()
    }

    /// State dimension 2n.
    pub fn dim(&self) -> usize {
        2 * self.coords.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coords
    }

    pub fn momenta(&self) -> &[String] {
        &self.momenta
    }

    pub fn parameters(&self) -> &Bindings {
        &self.params
    }

    /// The Hamiltonian as given (parameters still symbolic).
    pub fn hamiltonian(&self) -> &Expression {
        &self.h
    }

    /// The Hamiltonian with parameter values substituted.
    pub fn hamiltonian_bound(&self) -> &Expression {
        &self.h_bound
    }

    /// Symbolic field components in state order (parameters substituted).
    pub fn field_expressions(&self) -> &[Expression] {
        &self.field
    }

    /// Symbolic Jacobian entries, row major over state order.
    pub fn jacobian_expressions(&self) -> &[Expression] {
        &self.jac
    }

    /// State variable names, coordinates then momenta.
    pub fn state_names(&self) -> Vec<&str> {
        self.coords
            .iter()
            .chain(self.momenta.iter())
            .map(|s| s.as_str())
            .collect()
    }

    /// Canonical vector field (∂H/∂p..., −∂H/∂q...) at `s`.
    pub fn vector_field(&self, s: &[f64]) -> Result<Vec<f64>, EvalError> {
        assert_eq!(s.len(), self.dim(), "state length must be 2n");
        self.compiled_field.iter().map(|c| c.eval(s)).collect()
    }

    /// H evaluated at `s`.
    pub fn energy(&self, s: &[f64]) -> Result<f64, EvalError> {
        assert_eq!(s.len(), self.dim(), "state length must be 2n");
        self.compiled_h.eval(s)
    }

    /// Jacobian of the vector field at `s`, by symbolic differentiation
    /// then evaluation.
    pub fn jacobian(&self, s: &[f64]) -> Result<Matrix, EvalError> {
        assert_eq!(s.len(), self.dim(), "state length must be 2n");
        let d = self.dim();
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = self.compiled_jac[i * d + j].eval(s)?;
            }
        }
        Ok(m)
    }

    /// Magnitude of the field on the unit box around `s`: the scale used by
    /// the equilibrium residual test. Sampled at `s` and the 4n axis points
    /// `s ± eᵢ`.
    pub fn field_scale(&self, s: &[f64]) -> f64 {
        let mut scale = match self.vector_field(s) {
            Ok(f) => inf_norm(&f),
            Err(_) => 0.0,
        };
        for i in 0..s.len() {
            for delta in [-1.0, 1.0] {
                let mut probe = s.to_vec();
                probe[i] += delta;
                if let Ok(f) = self.vector_field(&probe) {
                    scale = fmath::max(scale, inf_norm(&f));
                }
            }
        }
        scale
    }

    /// Full local analysis of a state that must already be an equilibrium:
    /// Jacobian → eigenvalues → classification → energy.
    pub fn analyze_equilibrium(&self, s: &[f64]) -> Result<EquilibriumPoint, SystemError> {
        let f = self.vector_field(s)?;
        let residual = inf_norm(&f);
        let threshold = RESIDUAL_TOL * (1.0 + self.field_scale(s));
        if residual > threshold {
            return Err(SystemError::NotAnEquilibrium { residual, threshold });
        }
        let jacobian = self.jacobian(s)?;
        let eigenvalues = eigenvalues(&jacobian);
        let classification = classify(&eigenvalues, DEGENERACY_TOL);
        let degenerate = spectrum_degenerate(&eigenvalues, DEGENERACY_TOL);
        let energy = self.energy(s)?;
        Ok(EquilibriumPoint {
            state: s.to_vec(),
            energy,
            jacobian,
            eigenvalues,
            classification,
            degenerate,
            residual,
        })
    }
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| fmath::max(m, fmath::abs(*x)))
}

/// Eigenvalues of a 2×2 or 4×4 real matrix, sorted by (re, im).
///
/// Dimension 2 uses the closed quadratic form on trace/determinant.
/// Dimension 4 reads triangular matrices off the diagonal and otherwise
/// takes Faddeev–LeVerrier characteristic coefficients to a Durand–Kerner
/// root solve with Newton polishing.
pub fn eigenvalues(m: &Matrix) -> Vec<Complex64> {
    match m.dim() {
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let mut disc = tr * tr - 4.0 * det;
            // The discriminant is only known to roundoff in the entries;
            // taking the square root of that noise would turn an exact
            // double eigenvalue into a spurious ±√ε pair. Collapse it.
            let scale = m.max_abs();
            if fmath::abs(disc) < 1e-13 * fmath::max(1.0, scale * scale) {
                disc = 0.0;
            }
            let mut eigs = if disc >= 0.0 {
                let root = fmath::sqrt(disc);
                alloc::vec![
                    Complex64::new(0.5 * (tr - root), 0.0),
                    Complex64::new(0.5 * (tr + root), 0.0),
                ]
            } else {
                let root = fmath::sqrt(-disc);
                alloc::vec![
                    Complex64::new(0.5 * tr, -0.5 * root),
                    Complex64::new(0.5 * tr, 0.5 * root),
                ]
            };
            sort_spectrum(&mut eigs);
            eigs
        }
        4 => {
            if let Some(diag) = m.triangular_diagonal() {
                let mut eigs: Vec<Complex64> =
                    diag.iter().map(|d| Complex64::new(*d, 0.0)).collect();
                sort_spectrum(&mut eigs);
                return eigs;
            }
            let scale = m.max_abs();
            if scale == 0.0 {
                return alloc::vec![Complex64::new(0.0, 0.0); 4];
            }
            let normalized = m.scale(1.0 / scale);
            let mut coeffs = normalized.char_poly();
            // Zero out characteristic coefficients below the roundoff of
            // the normalized entries; their k-th roots would otherwise
            // inflate entry noise into O(ε^(1/4)) spurious eigenvalues.
            for c in coeffs.iter_mut() {
                if fmath::abs(*c) < 1e-13 {
                    *c = 0.0;
                }
            }
            let mut eigs: Vec<Complex64> = crate::linalg::poly_roots(&coeffs)
                .into_iter()
                .map(|z| z * scale)
                .collect();
            sort_spectrum(&mut eigs);
            eigs
        }
        d => panic!("eigenvalues supports dimension 2 or 4, got {d}"),
    }
}

pub(crate) fn sort_spectrum(eigs: &mut [Complex64]) {
    eigs.sort_by(|a, b| {
        (a.re, a.im)
            .partial_cmp(&(b.re, b.im))
            .unwrap_or(core::cmp::Ordering::Equal)
    });
}

/// True iff some eigenvalue modulus is below `tol · max(1, spectral radius)`.
pub fn spectrum_degenerate(eigs: &[Complex64], tol: f64) -> bool {
    let radius = eigs.iter().fold(0.0, |m, z| fmath::max(m, z.norm()));
    let cut = tol * fmath::max(1.0, radius);
    eigs.iter().any(|z| z.norm() < cut)
}

/// Classifies a 2- or 4-eigenvalue spectrum.
///
/// Dimension 2 follows the planar taxonomy with scale-aware tolerances.
/// Dimension 4 splits the spectrum into a ±-symmetric real pair plus the
/// remaining pair and reports the product of the two planar types.
pub fn classify(eigs: &[Complex64], tol: f64) -> Classification {
    let radius = eigs.iter().fold(0.0, |m, z| fmath::max(m, z.norm()));
    let cut = tol * fmath::max(1.0, radius);
    if spectrum_degenerate(eigs, tol) {
        return Classification::Degenerate;
    }
    match eigs.len() {
        2 => classify_pair(eigs[0], eigs[1], cut, tol),
        4 => {
            let mut pair: Option<(usize, usize)> = None;
            'outer: for i in 0..4 {
                for j in i + 1..4 {
                    let real_i = fmath::abs(eigs[i].im) <= cut;
                    let real_j = fmath::abs(eigs[j].im) <= cut;
                    if real_i && real_j && fmath::abs(eigs[i].re + eigs[j].re) <= cut {
                        pair = Some((i, j));
                        break 'outer;
                    }
                }
            }
            let Some((i, j)) = pair else {
                return Classification::UnpairedSpectrum;
            };
            let rest: Vec<Complex64> = (0..4)
                .filter(|k| *k != i && *k != j)
                .map(|k| eigs[k])
                .collect();
            let first = classify_pair(eigs[i], eigs[j], cut, tol);
            let second = classify_pair(rest[0], rest[1], cut, tol);
            Classification::Product(alloc::vec![first, second])
        }
        n => panic!("classify supports 2 or 4 eigenvalues, got {n}"),
    }
}

fn classify_pair(a: Complex64, b: Complex64, cut: f64, tol: f64) -> Classification {
    let real = fmath::abs(a.im) <= cut && fmath::abs(b.im) <= cut;
    if real {
        if a.re * b.re < 0.0 {
            return Classification::Saddle;
        }
        let equal_cut = tol * fmath::max(1.0, fmath::max(fmath::abs(a.re), fmath::abs(b.re)));
        if fmath::abs(a.re - b.re) <= equal_cut {
            return Classification::InflectedNode;
        }
        if a.re > 0.0 {
            Classification::UnstableNode
        } else {
            Classification::StableNode
        }
    } else {
        // Complex pair (for real matrices, conjugates).
        let re = 0.5 * (a.re + b.re);
        if fmath::abs(re) <= cut {
            Classification::Center
        } else if re > 0.0 {
            Classification::UnstableFocus
        } else {
            Classification::StableFocus
        }
    }
}

/// Short human-readable summary of a spectrum for reports.
pub fn spectrum_summary(eigs: &[Complex64]) -> String {
    let parts: Vec<String> = eigs
        .iter()
        .map(|z| {
            if z.im == 0.0 {
                format!("{}", z.re)
            } else if z.im > 0.0 {
                format!("{}+{}i", z.re, z.im)
            } else {
                format!("{}-{}i", z.re, -z.im)
            }
        })
        .collect();
    parts.join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, PI};

    fn simple() -> HamiltonianSystem {
        HamiltonianSystem::simple_pendulum_torque(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    fn oscillator() -> HamiltonianSystem {
        HamiltonianSystem::build("p^2/2 + q^2/2", &["q"], &["p"], Bindings::new()).unwrap()
    }

    #[test]
    fn preset_simple_pendulum_carries_eq4_hamiltonian() {
        let sys = simple();
        let free = sys.hamiltonian().free_vars();
        for name in ["q", "p", "m", "g", "L", "T"] {
            assert!(free.contains(name), "missing {name}");
        }
        assert!((sys.energy(&[FRAC_PI_2, 0.0]).unwrap() + FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn double_pendulum_torque_terms() {
        let sys = HamiltonianSystem::double_pendulum_torque(1.0, 1.0, 1.0).unwrap();
        let p0 = [-FRAC_PI_2, -FRAC_PI_2, 0.0, 0.0];
        assert!((sys.energy(&p0).unwrap() + 1.5 * PI).abs() < 1e-12);
        // Torque part of -dH/dphi_i at p=0, phi=0: -(2mgL sin 0 + 2mgL) = -2.
        let f = sys.vector_field(&[0.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((f[2] + 2.0).abs() < 1e-12);
        assert!((f[3] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_builds_and_fields() {
        let sys = oscillator();
        let f = sys.vector_field(&[0.0, 1.0]).unwrap();
        assert_eq!(f, alloc::vec![1.0, 0.0]);
        assert_eq!(sys.energy(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn simple_pendulum_field_values() {
        let sys = simple();
        let f = sys.vector_field(&[FRAC_PI_2, 0.0]).unwrap();
        assert!(inf_norm(&f) < 1e-15);
        let f = sys.vector_field(&[0.0, 1.0]).unwrap();
        assert!((f[0] - 1.0).abs() < 1e-15 && (f[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn name_collision_rejected() {
        let params = Bindings::from_pairs([("q", 1.0)]).unwrap();
        let err = HamiltonianSystem::build("p^2/2 + q^2/2", &["q"], &["p"], params).unwrap_err();
        assert!(matches!(err, SystemError::NameCollision(_)));
    }

    #[test]
    fn unbound_symbol_rejected() {
        let err =
            HamiltonianSystem::build("p^2/2 + k*q^2/2", &["q"], &["p"], Bindings::new())
                .unwrap_err();
        assert_eq!(err, SystemError::UnboundSymbol("k".into()));
    }

    #[test]
    fn jacobian_at_degenerate_point_is_nilpotent() {
        let sys = simple();
        let j = sys.jacobian(&[FRAC_PI_2, 0.0]).unwrap();
        assert!((j[(0, 0)]).abs() < 1e-10);
        assert!((j[(0, 1)] - 1.0).abs() < 1e-10);
        assert!((j[(1, 0)]).abs() < 1e-10);
        assert!((j[(1, 1)]).abs() < 1e-10);
    }

    #[test]
    fn oscillator_jacobian() {
        let j = oscillator().jacobian(&[0.0, 0.0]).unwrap();
        assert_eq!(
            (j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]),
            (0.0, 1.0, -1.0, 0.0)
        );
    }

    #[test]
    fn eigenvalues_of_nilpotent_2x2() {
        let m = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let eigs = eigenvalues(&m);
        assert!(eigs.iter().all(|z| z.norm() <= 1e-10));
    }

    #[test]
    fn eigenvalues_of_identity_2x2() {
        let eigs = eigenvalues(&Matrix::identity(2));
        assert!((eigs[0].re - 1.0).abs() < 1e-14 && (eigs[1].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_printed_4x4_triangular() {
        let s5 = 5.0f64.sqrt();
        let m = Matrix::from_rows(&[
            &[-s5, 0.0, 0.0, 0.0],
            &[0.0, s5, 0.0, 0.0],
            &[-0.5, 0.0, s5, 0.0],
            &[0.0, 0.0, 0.0, s5],
        ]);
        let eigs = eigenvalues(&m);
        assert!((eigs[0].re + s5).abs() < 1e-12);
        for e in &eigs[1..] {
            assert!((e.re - s5).abs() < 1e-12 && e.im == 0.0);
        }
    }

    #[test]
    fn classify_matches_paper_taxonomy() {
        let half_sqrt3 = 3.0f64.sqrt() / 2.0;
        let focus = [
            Complex64::new(0.5, half_sqrt3),
            Complex64::new(0.5, -half_sqrt3),
        ];
        assert_eq!(classify(&focus, DEGENERACY_TOL), Classification::UnstableFocus);

        let center = [Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)];
        assert_eq!(classify(&center, DEGENERACY_TOL), Classification::Center);

        let s5 = 5.0f64.sqrt();
        let quad = [
            Complex64::new(-s5, 0.0),
            Complex64::new(s5, 0.0),
            Complex64::new(s5, 0.0),
            Complex64::new(s5, 0.0),
        ];
        assert_eq!(
            classify(&quad, DEGENERACY_TOL),
            Classification::Product(alloc::vec![
                Classification::Saddle,
                Classification::InflectedNode
            ])
        );
    }

    #[test]
    fn classify_reports_unpaired_spectra() {
        let eigs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(4.0, 0.0),
        ];
        assert_eq!(classify(&eigs, DEGENERACY_TOL), Classification::UnpairedSpectrum);
    }

    #[test]
    fn classify_degenerate_spectrum() {
        let eigs = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
        assert_eq!(classify(&eigs, DEGENERACY_TOL), Classification::Degenerate);
    }

    #[test]
    fn analyze_oscillator_origin_is_center() {
        let sys = oscillator();
        let eq = sys.analyze_equilibrium(&[0.0, 0.0]).unwrap();
        assert_eq!(eq.classification, Classification::Center);
        assert!(!eq.degenerate);
        assert_eq!(eq.energy, 0.0);
    }

    #[test]
    fn analyze_rejects_non_equilibria() {
        let sys = oscillator();
        let err = sys.analyze_equilibrium(&[0.5, 0.0]).unwrap_err();
        assert!(matches!(err, SystemError::NotAnEquilibrium { .. }));
    }

    #[test]
    fn analyze_simple_pendulum_degenerate() {
        let sys = simple();
        let eq = sys.analyze_equilibrium(&[FRAC_PI_2, 0.0]).unwrap();
        assert!(eq.degenerate);
        assert_eq!(eq.classification, Classification::Degenerate);
        assert!(eq.eigenvalues.iter().all(|z| z.norm() <= 1e-10));
    }
}
