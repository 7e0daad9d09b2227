//! Symplectic calculus on the phase plane: the exterior derivative `d` and
//! its symplectic variant `d'`, the canonical forms, line integrals, and
//! symplectic connections together with their covariant position and
//! momentum operators and gauge transformations.
//!
//! Connections are stored through their real components `A_q` (momentum
//! units) and `A_p` (length units); the `1/(iħ)` normalisation that turns
//! them into a connection 1-form never enters a formula here.
//!
//! Every component field keeps its symbolic expression when it has one.
//! Derivatives then come from the expression engine, which is exact for the
//! linear, non-periodic fields (`θ = -p dq`, `A_p = q - ∂_p f`) that a
//! Fourier derivative would smear. Fields given only as samples fall back to
//! spectral derivatives.

use log::warn;

use crate::error::{Error, Result};
use crate::exprlang::{self, diff, Expr, Var};
use crate::numgrid::{self, Axis, ComplexField, PhaseGrid, RealField};
use crate::quadrature::gauss_legendre;
use crate::states::PhaseState;
use crate::C64;

/// Tolerance of the closedness gate applied before a 1-form gauge shift.
pub const CLOSEDNESS_GATE: f64 = 1e-6;

/// Spectral and symbolic gradients disagreeing by more than this are logged.
pub const GRADIENT_MISMATCH_WARN: f64 = 1e-6;

/// Fraction of each axis dropped on both sides by interior residuals.
pub const INTERIOR_MARGIN: f64 = 0.1;

fn var(axis: Axis) -> Var {
    match axis {
        Axis::Q => Var::Q,
        Axis::P => Var::P,
    }
}

/// A smooth real function on phase space with the dimensions of an action.
#[derive(Clone, Debug)]
pub struct GeneratingFunction {
    text: String,
    expr: Expr,
    gradient: Option<(Expr, Expr)>,
}

impl GeneratingFunction {
    pub fn parse(text: &str) -> Result<Self> {
        let expr = exprlang::parse(text)?;
        Ok(Self::with_text(text.trim().to_string(), expr))
    }

    pub fn from_expr(expr: Expr) -> Self {
        Self::with_text(expr.to_string(), expr)
    }

    fn with_text(text: String, expr: Expr) -> Self {
        let gradient = Some((diff(&expr, Var::Q), diff(&expr, Var::P)));
        Self { text, expr, gradient }
    }

    /// `f = pq/2`, the generating function of the connection hidden in the
    /// Wigner integral.
    pub fn canonical() -> Self {
        Self::parse("p*q/2").expect("valid literal")
    }

    pub fn zero() -> Self {
        Self::parse("0").expect("valid literal")
    }

    /// Drops the symbolic gradients so that [`Self::gradient`] must use
    /// spectral differentiation of the sampled field.
    pub fn without_gradients(mut self) -> Self {
        self.gradient = None;
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn has_symbolic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn partial_expr(&self, axis: Axis) -> Option<&Expr> {
        self.gradient.as_ref().map(|(dq, dp)| match axis {
            Axis::Q => dq,
            Axis::P => dp,
        })
    }

    pub fn eval(&self, q: f64, p: f64) -> f64 {
        self.expr.eval(q, p)
    }

    pub fn sample(&self, grid: &PhaseGrid) -> Result<RealField> {
        exprlang::eval_on_grid(&self.expr, grid)
    }

    /// `∂f` along `axis`: symbolic when available, otherwise spectral, which
    /// is refused for fields that do not wrap smoothly across the grid edge.
    pub fn partial(&self, grid: &PhaseGrid, axis: Axis) -> Result<Component> {
        match self.partial_expr(axis) {
            Some(e) => Component::from_expr(grid, e.clone()),
            None => {
                let samples = self.sample(grid)?;
                if !grid.axis(axis).periodic && !wraps_smoothly(&samples, axis) {
                    return Err(Error::NonPeriodicGradient(self.text.clone()));
                }
                Ok(Component::from_samples(numgrid::derivative(&samples, axis)?))
            }
        }
    }

    /// Max difference between symbolic and spectral gradients, when both
    /// exist. Spectral gradients of fields that do not wrap smoothly are
    /// skipped.
    pub fn gradient_mismatch(&self, grid: &PhaseGrid) -> Result<Option<f64>> {
        if self.gradient.is_none() {
            return Ok(None);
        }
        let samples = self.sample(grid)?;
        let mut worst: Option<f64> = None;
        for axis in [Axis::Q, Axis::P] {
            if !grid.axis(axis).periodic && !wraps_smoothly(&samples, axis) {
                continue;
            }
            let spectral = numgrid::derivative(&samples, axis)?;
            let symbolic = self.partial(grid, axis)?;
            let d = spectral.zip_with(&symbolic.samples, |a, b| a - b)?.max_abs();
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
        if let Some(w) = worst {
            if w > GRADIENT_MISMATCH_WARN {
                warn!(
                    "gradients of `{}` disagree by {w:e}; the sampled field may leak at the boundary",
                    self.text
                );
            }
        }
        Ok(worst)
    }
}

/// True if the periodic continuation of `field` along `axis` has no jump
/// larger than twice the biggest step between neighbouring samples.
fn wraps_smoothly(field: &RealField, axis: Axis) -> bool {
    let v = field.values();
    let lanes: Vec<Vec<f64>> = match axis {
        Axis::Q => v.columns().into_iter().map(|c| c.to_vec()).collect(),
        Axis::P => v.rows().into_iter().map(|r| r.to_vec()).collect(),
    };
    let (mut step, mut jump) = (0.0_f64, 0.0_f64);
    for lane in &lanes {
        for w in lane.windows(2) {
            step = step.max((w[1] - w[0]).abs());
        }
        jump = jump.max((lane[0] - lane[lane.len() - 1]).abs());
    }
    jump <= 2.0 * step + 1e-12
}

/// A real field on the full grid, optionally carrying the expression that
/// produced it.
#[derive(Clone, Debug)]
pub struct Component {
    samples: RealField,
    expr: Option<Expr>,
}

impl Component {
    pub fn from_expr(grid: &PhaseGrid, expr: Expr) -> Result<Self> {
        let samples = exprlang::eval_on_grid(&expr, grid)?;
        Ok(Self { samples, expr: Some(expr) })
    }

    pub fn parse(grid: &PhaseGrid, text: &str) -> Result<Self> {
        Self::from_expr(grid, exprlang::parse(text)?)
    }

    pub fn from_samples(samples: RealField) -> Self {
        Self { samples, expr: None }
    }

    pub fn constant(grid: &PhaseGrid, c: f64) -> Self {
        Self { samples: RealField::from_fn(*grid, |_, _| c), expr: Some(Expr::Num(c)) }
    }

    pub fn samples(&self) -> &RealField {
        &self.samples
    }

    pub fn expr(&self) -> Option<&Expr> {
        self.expr.as_ref()
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.samples.grid()
    }

    pub fn partial(&self, axis: Axis) -> Result<Component> {
        match &self.expr {
            Some(e) => Component::from_expr(self.grid(), diff(e, var(axis))),
            None => Ok(Component::from_samples(numgrid::derivative(&self.samples, axis)?)),
        }
    }

    /// Value at an arbitrary point: the expression when present, otherwise
    /// bilinear interpolation of the samples.
    pub fn value_at(&self, q: f64, p: f64) -> f64 {
        match &self.expr {
            Some(e) => e.eval(q, p),
            None => bilinear(&self.samples, q, p),
        }
    }

    fn combine(&self, other: &Component, sign: f64) -> Result<Component> {
        let samples = self.samples.zip_with(&other.samples, |a, b| a + sign * b)?;
        let expr = match (&self.expr, &other.expr) {
            (Some(a), Some(b)) if sign > 0.0 => Some(Expr::add(a.clone(), b.clone())),
            (Some(a), Some(b)) => Some(Expr::sub(a.clone(), b.clone())),
            _ => None,
        };
        Ok(Component { samples, expr })
    }

    pub fn plus(&self, other: &Component) -> Result<Component> {
        self.combine(other, 1.0)
    }

    pub fn minus(&self, other: &Component) -> Result<Component> {
        self.combine(other, -1.0)
    }

    pub fn negated(&self) -> Component {
        Component {
            samples: self.samples.map(|v| -v),
            expr: self.expr.clone().map(Expr::neg),
        }
    }
}

fn bilinear(field: &RealField, q: f64, p: f64) -> f64 {
    let g = field.grid();
    let v = field.values();
    let locate = |x: f64, spec: &numgrid::AxisSpec| {
        let t = (x - spec.min) / spec.spacing();
        let i = (t.floor().max(0.0) as usize).min(spec.n - 2);
        (i, t - i as f64)
    };
    let (i, tq) = locate(q, &g.q);
    let (j, tp) = locate(p, &g.p);
    let v00 = v[[i, j]];
    let v10 = v[[i + 1, j]];
    let v01 = v[[i, j + 1]];
    let v11 = v[[i + 1, j + 1]];
    (1.0 - tq) * (1.0 - tp) * v00 + tq * (1.0 - tp) * v10 + (1.0 - tq) * tp * v01 + tq * tp * v11
}

/// `α = α_q dq + α_p dp`.
#[derive(Clone, Debug)]
pub struct OneForm {
    pub q: Component,
    pub p: Component,
}

impl OneForm {
    pub fn new(q: Component, p: Component) -> Result<Self> {
        q.samples.check_same_shape(&p.samples)?;
        if q.grid() != p.grid() {
            return Err(Error::ShapeMismatch("1-form components live on different grids".into()));
        }
        Ok(Self { q, p })
    }

    pub fn parse(grid: &PhaseGrid, alpha_q: &str, alpha_p: &str) -> Result<Self> {
        Self::new(Component::parse(grid, alpha_q)?, Component::parse(grid, alpha_p)?)
    }

    pub fn alpha_q(&self) -> &RealField {
        &self.q.samples
    }

    pub fn alpha_p(&self) -> &RealField {
        &self.p.samples
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.q.grid()
    }
}

/// `df = ∂_q f dq + ∂_p f dp`.
pub fn exterior_d(f: &GeneratingFunction, grid: &PhaseGrid) -> Result<OneForm> {
    OneForm::new(f.partial(grid, Axis::Q)?, f.partial(grid, Axis::P)?)
}

/// `d'f = -∂_q f dq + ∂_p f dp`.
pub fn symplectic_d(f: &GeneratingFunction, grid: &PhaseGrid) -> Result<OneForm> {
    OneForm::new(f.partial(grid, Axis::Q)?.negated(), f.partial(grid, Axis::P)?)
}

/// `θ = -p dq`.
pub fn canonical_theta(grid: &PhaseGrid) -> OneForm {
    OneForm::parse(grid, "-p", "0").expect("finite on every grid")
}

/// The `dq ∧ dp` coefficient of `ω`, identically one.
pub fn canonical_omega_coefficient(grid: &PhaseGrid) -> RealField {
    RealField::from_fn(*grid, |_, _| 1.0)
}

/// The Poincaré–Cartan form restricted to a fixed-time, constant-energy
/// slice, where it coincides with the canonical form it was built from.
#[derive(Clone, Debug)]
pub struct PoincareCartan {
    pub form: OneForm,
    pub hamiltonian: RealField,
}

pub fn poincare_cartan(theta: &OneForm, hamiltonian: RealField) -> Result<PoincareCartan> {
    theta.alpha_q().check_same_shape(&hamiltonian)?;
    Ok(PoincareCartan { form: theta.clone(), hamiltonian })
}

/// The `dq ∧ dp` coefficient `∂_q α_p - ∂_p α_q` of `dα`.
pub fn d_of_oneform(alpha: &OneForm) -> Result<RealField> {
    let a = alpha.p.partial(Axis::Q)?;
    let b = alpha.q.partial(Axis::P)?;
    a.samples.zip_with(&b.samples, |x, y| x - y)
}

pub fn closedness_residual(xi: &OneForm) -> Result<f64> {
    Ok(d_of_oneform(xi)?.max_abs())
}

/// Polyline in phase space, integrated segment by segment.
#[derive(Clone, Debug, PartialEq)]
pub struct PathPolyline {
    pub vertices: Vec<(f64, f64)>,
    pub samples_per_segment: usize,
}

impl PathPolyline {
    pub const DEFAULT_SAMPLES: usize = 64;

    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Precondition("a path needs at least two vertices".into()));
        }
        Ok(Self { vertices, samples_per_segment: Self::DEFAULT_SAMPLES })
    }

    /// Counter-clockwise boundary of `[q0, q1] × [p0, p1]`.
    pub fn rectangle(q0: f64, q1: f64, p0: f64, p1: f64) -> Result<Self> {
        Self::new(vec![(q0, p0), (q1, p0), (q1, p1), (q0, p1), (q0, p0)])
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples_per_segment = n.max(1);
        self
    }
}

/// `∫_path α` by Gauss–Legendre quadrature on each segment. The action
/// convention `S = -∫λ` is left to the caller.
pub fn line_integral(alpha: &OneForm, path: &PathPolyline) -> Result<f64> {
    let g = alpha.grid();
    let last_q = g.q.point(g.q.n - 1);
    let last_p = g.p.point(g.p.n - 1);
    for &(q, p) in &path.vertices {
        if !(q >= g.q.min && q <= last_q && p >= g.p.min && p <= last_p) {
            return Err(Error::PathOutOfDomain { q, p });
        }
    }
    let (nodes, weights) = gauss_legendre(path.samples_per_segment);
    let mut total = 0.0;
    for seg in path.vertices.windows(2) {
        let ((q0, p0), (q1, p1)) = (seg[0], seg[1]);
        let (dq, dp) = (q1 - q0, p1 - p0);
        let mut s = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let t = 0.5 * (x + 1.0);
            let (q, p) = (q0 + t * dq, p0 + t * dp);
            s += w * (alpha.q.value_at(q, p) * dq + alpha.p.value_at(q, p) * dp);
        }
        total += 0.5 * s;
    }
    Ok(total)
}

/// `θ → θ + ξ`, accepted only for closed `ξ`.
pub fn gauge_shift_theta(theta_like: &OneForm, xi: &OneForm) -> Result<OneForm> {
    let r = closedness_residual(xi)?;
    if r >= CLOSEDNESS_GATE {
        return Err(Error::NotClosed(r));
    }
    OneForm::new(theta_like.q.plus(&xi.q)?, theta_like.p.plus(&xi.p)?)
}

/// A symplectic connection through its components `A_q`, `A_p`.
#[derive(Clone, Debug)]
pub struct Connection {
    pub a_q: Component,
    pub a_p: Component,
    pub provenance: Option<GeneratingFunction>,
}

impl Connection {
    pub fn new(a_q: Component, a_p: Component) -> Result<Self> {
        a_q.samples.check_same_shape(&a_p.samples)?;
        Ok(Self { a_q, a_p, provenance: None })
    }

    pub fn parse(grid: &PhaseGrid, a_q: &str, a_p: &str) -> Result<Self> {
        Self::new(Component::parse(grid, a_q)?, Component::parse(grid, a_p)?)
    }

    /// `A_q = p/2, A_p = q/2`.
    pub fn canonical(grid: &PhaseGrid) -> Result<Self> {
        connection_from_generating(&GeneratingFunction::canonical(), grid)
    }

    /// `A_q = p, A_p = q`: violates the integrability condition.
    pub fn broken(grid: &PhaseGrid) -> Result<Self> {
        Self::parse(grid, "p", "q")
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.a_q.grid()
    }
}

/// `A_q = ∂_q f`, `A_p = q - ∂_p f`.
pub fn connection_from_generating(f: &GeneratingFunction, grid: &PhaseGrid) -> Result<Connection> {
    let a_q = f.partial(grid, Axis::Q)?;
    let q = Component::parse(grid, "q")?;
    let a_p = q.minus(&f.partial(grid, Axis::P)?)?;
    Ok(Connection { a_q, a_p, provenance: Some(f.clone()) })
}

/// `∂_q A_p + ∂_p A_q - 1`.
pub fn integrability_residual(a: &Connection) -> Result<RealField> {
    let x = a.a_p.partial(Axis::Q)?;
    let y = a.a_q.partial(Axis::P)?;
    x.samples.zip_with(&y.samples, |u, v| u + v - 1.0)
}

/// `A' → A' + d'f` in components: `A_q - ∂_q f`, `A_p + ∂_p f`.
pub fn gauge_shift_connection(a: &Connection, f: &GeneratingFunction) -> Result<Connection> {
    let grid = *a.grid();
    let a_q = a.a_q.minus(&f.partial(&grid, Axis::Q)?)?;
    let a_p = a.a_p.plus(&f.partial(&grid, Axis::P)?)?;
    Ok(Connection { a_q, a_p, provenance: None })
}

/// The same shift written with the ordinary exterior derivative, `A' + df`.
/// It breaks integrability whenever `∂_q ∂_p f ≠ 0` and exists only as a
/// diagnostic.
pub fn exterior_shift_connection(a: &Connection, f: &GeneratingFunction) -> Result<Connection> {
    let grid = *a.grid();
    let a_q = a.a_q.plus(&f.partial(&grid, Axis::Q)?)?;
    let a_p = a.a_p.plus(&f.partial(&grid, Axis::P)?)?;
    Ok(Connection { a_q, a_p, provenance: None })
}

/// Covariant position and momentum operators of a connection,
/// `Q = A_p + iħ∂_p` and `P = A_q - iħ∂_q`.
#[derive(Clone, Debug)]
pub struct CovariantOps {
    connection: Connection,
}

/// Operators bound to one gauge frame, with the frame's phase gradient
/// already absorbed into the multiplicative parts.
#[derive(Clone, Debug)]
pub struct FramedOps {
    a_q: RealField,
    a_p: RealField,
    hbar: f64,
}

pub fn covariant_ops(a: &Connection) -> CovariantOps {
    CovariantOps { connection: a.clone() }
}

impl CovariantOps {
    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    /// A state stored as `exp(-if/ħ) Φ` is acted on through `Φ`; the phase
    /// factor turns the connection into its `d'`-gauge shift by `f`.
    pub fn in_frame(&self, frame: Option<&GeneratingFunction>) -> Result<FramedOps> {
        let grid = *self.connection.grid();
        let (a_q, a_p) = match frame {
            None => (self.connection.a_q.samples.clone(), self.connection.a_p.samples.clone()),
            Some(f) => {
                let shifted = gauge_shift_connection(&self.connection, f)?;
                (shifted.a_q.samples, shifted.a_p.samples)
            }
        };
        Ok(FramedOps { a_q, a_p, hbar: grid.hbar })
    }

    pub fn apply_q(&self, psi: &PhaseState) -> Result<PhaseState> {
        self.in_frame(psi.frame())?.apply_q(psi)
    }

    pub fn apply_p(&self, psi: &PhaseState) -> Result<PhaseState> {
        self.in_frame(psi.frame())?.apply_p(psi)
    }
}

impl FramedOps {
    /// `A_p Φ + iħ ∂_p Φ` on the envelope.
    pub fn apply_q_envelope(&self, env: &ComplexField) -> Result<ComplexField> {
        let d = numgrid::derivative(env, Axis::P)?;
        let ih = C64::new(0.0, self.hbar);
        let mult = env.zip_with(&self.a_p, |z, a| z * a)?;
        mult.zip_with(&d, |m, dz| m + ih * dz)
    }

    /// `A_q Φ - iħ ∂_q Φ` on the envelope.
    pub fn apply_p_envelope(&self, env: &ComplexField) -> Result<ComplexField> {
        let d = numgrid::derivative(env, Axis::Q)?;
        let ih = C64::new(0.0, self.hbar);
        let mult = env.zip_with(&self.a_q, |z, a| z * a)?;
        mult.zip_with(&d, |m, dz| m - ih * dz)
    }

    pub fn apply_q(&self, psi: &PhaseState) -> Result<PhaseState> {
        Ok(psi.with_envelope(self.apply_q_envelope(psi.envelope())?))
    }

    pub fn apply_p(&self, psi: &PhaseState) -> Result<PhaseState> {
        Ok(psi.with_envelope(self.apply_p_envelope(psi.envelope())?))
    }
}

/// Index range kept after trimming [`INTERIOR_MARGIN`] from both ends.
pub fn interior_range(n: usize) -> std::ops::Range<usize> {
    let m = (INTERIOR_MARGIN * n as f64).ceil() as usize;
    m..n - m
}

/// Max over the interior of `|(QP - PQ - iħ) Ψ|`.
pub fn commutator_residual(a: &Connection, test: &PhaseState) -> Result<f64> {
    let ops = covariant_ops(a).in_frame(test.frame())?;
    let env = test.envelope();
    let qp = ops.apply_q_envelope(&ops.apply_p_envelope(env)?)?;
    let pq = ops.apply_p_envelope(&ops.apply_q_envelope(env)?)?;
    let ih = C64::new(0.0, test.grid().hbar);
    let g = test.grid();
    let (ri, rj) = (interior_range(g.q.n), interior_range(g.p.n));
    let mut worst = 0.0_f64;
    for i in ri {
        for j in rj.clone() {
            let r = qp.values()[[i, j]] - pq.values()[[i, j]] - ih * env.values()[[i, j]];
            worst = worst.max(r.norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{lift_state, oscillator_eigenstate, OscillatorParams};

    fn grid() -> PhaseGrid {
        PhaseGrid::square(8.0, 128, 1.0).unwrap()
    }

    fn gf(s: &str) -> GeneratingFunction {
        GeneratingFunction::parse(s).unwrap()
    }

    fn max_diff(a: &RealField, f: impl Fn(f64, f64) -> f64) -> f64 {
        let g = a.grid();
        let mut m = 0.0_f64;
        for i in 0..g.q.n {
            for j in 0..g.p.n {
                m = m.max((a.values()[[i, j]] - f(g.q.point(i), g.p.point(j))).abs());
            }
        }
        m
    }

    #[test]
    fn exterior_d_examples() {
        let g = grid();
        let d = exterior_d(&gf("q"), &g).unwrap();
        assert_eq!(max_diff(d.alpha_q(), |_, _| 1.0), 0.0);
        assert_eq!(d.alpha_p().max_abs(), 0.0);
        let d = exterior_d(&gf("p*q/2"), &g).unwrap();
        assert_eq!(max_diff(d.alpha_q(), |_, p| p / 2.0), 0.0);
        assert_eq!(max_diff(d.alpha_p(), |q, _| q / 2.0), 0.0);
        let d = exterior_d(&gf("sin(q)*cos(p)"), &g).unwrap();
        assert!(max_diff(d.alpha_q(), |q, p| q.cos() * p.cos()) < 1e-8);
        assert!(max_diff(d.alpha_p(), |q, p| -q.sin() * p.sin()) < 1e-8);
    }

    #[test]
    fn symplectic_d_examples() {
        let g = grid();
        let d = symplectic_d(&gf("q"), &g).unwrap();
        assert_eq!(max_diff(d.alpha_q(), |_, _| -1.0), 0.0);
        let d = symplectic_d(&gf("p"), &g).unwrap();
        assert_eq!(max_diff(d.alpha_p(), |_, _| 1.0), 0.0);
        assert_eq!(d.alpha_q().max_abs(), 0.0);
        let d = symplectic_d(&gf("p*q/2"), &g).unwrap();
        assert_eq!(max_diff(d.alpha_q(), |_, p| -p / 2.0), 0.0);
        assert_eq!(max_diff(d.alpha_p(), |q, _| q / 2.0), 0.0);
    }

    #[test]
    fn canonical_forms() {
        let g = grid();
        let theta = canonical_theta(&g);
        let d = d_of_oneform(&theta).unwrap();
        assert_eq!(max_diff(&d, |_, _| 1.0), 0.0);
        assert_eq!(d, canonical_omega_coefficient(&g));
        // p = 0 row
        let j0 = g.p.n / 2;
        assert_eq!(g.p.point(j0), 0.0);
        assert!(theta.alpha_q().values().column(j0).iter().all(|&v| v == 0.0));
        let h = RealField::from_fn(g, |_, _| 2.5);
        let lambda = poincare_cartan(&theta, h).unwrap();
        assert_eq!(lambda.form.alpha_q(), theta.alpha_q());
        assert_eq!(lambda.form.alpha_p(), theta.alpha_p());
    }

    #[test]
    fn d_of_oneform_examples() {
        let g = grid();
        for f in ["sin(q)*cos(p)", "p*q/2", "exp(-q^2)*p^3"] {
            let df = exterior_d(&gf(f), &g).unwrap();
            assert!(d_of_oneform(&df).unwrap().max_abs() < 1e-8, "{f}");
        }
        let a = OneForm::parse(&g, "0", "q").unwrap();
        assert_eq!(max_diff(&d_of_oneform(&a).unwrap(), |_, _| 1.0), 0.0);
    }

    #[test]
    fn sampled_forms_use_spectral_derivatives() {
        let g = grid();
        let f = gf("exp(-q^2-p^2)*sin(q)").without_gradients();
        let df = exterior_d(&f, &g).unwrap();
        assert!(df.q.expr().is_none());
        assert!(d_of_oneform(&df).unwrap().max_abs() < 1e-8);
        let err = exterior_d(&gf("p*q/2").without_gradients(), &g).unwrap_err();
        assert!(matches!(err, Error::NonPeriodicGradient(_)));
        let m = gf("exp(-q^2-p^2)").gradient_mismatch(&g).unwrap().unwrap();
        assert!(m < 1e-8, "{m}");
    }

    #[test]
    fn closedness_examples() {
        let g = grid();
        let df = exterior_d(&gf("sin(q)*p^2"), &g).unwrap();
        assert!(closedness_residual(&df).unwrap() < 1e-8);
        let pdq = OneForm::parse(&g, "p", "0").unwrap();
        assert_eq!(closedness_residual(&pdq).unwrap(), 1.0);
        let c = OneForm::parse(&g, "0.3", "-1.7").unwrap();
        assert!(closedness_residual(&c).unwrap() < 1e-12);
    }

    #[test]
    fn line_integral_examples() {
        let g = grid();
        let f = gf("sin(q)*cos(p) + p*q/2");
        let df = exterior_d(&f, &g).unwrap();
        let path = PathPolyline::new(vec![(-1.0, 0.5), (2.0, -1.0), (3.0, 2.0)]).unwrap();
        let v = line_integral(&df, &path).unwrap();
        assert!((v - (f.eval(3.0, 2.0) - f.eval(-1.0, 0.5))).abs() < 1e-6);

        let theta = canonical_theta(&g);
        let rect = PathPolyline::rectangle(-1.0, 2.0, -0.5, 1.5).unwrap();
        assert!((line_integral(&theta, &rect).unwrap() - 6.0).abs() < 1e-6);

        let c = OneForm::parse(&g, "0.7", "0").unwrap();
        let a = PathPolyline::new(vec![(0.0, 0.0), (1.0, 3.0), (2.0, 1.0)]).unwrap();
        let b = PathPolyline::new(vec![(0.0, 0.0), (2.0, -2.0), (2.0, 1.0)]).unwrap();
        let (va, vb) = (line_integral(&c, &a).unwrap(), line_integral(&c, &b).unwrap());
        assert!((va - vb).abs() < 1e-8);

        let out = PathPolyline::new(vec![(0.0, 0.0), (9.0, 0.0)]).unwrap();
        assert!(matches!(line_integral(&c, &out), Err(Error::PathOutOfDomain { .. })));
    }

    #[test]
    fn bilinear_fallback_is_exact_for_linear_samples() {
        let g = grid();
        let theta = OneForm::new(
            Component::from_samples(RealField::from_fn(g, |_, p| -p)),
            Component::from_samples(RealField::zeros(g, numgrid::FieldKind::Plane)),
        )
        .unwrap();
        let rect = PathPolyline::rectangle(-1.03, 2.11, -0.51, 1.57).unwrap();
        let area = (2.11 + 1.03) * (1.57 + 0.51);
        assert!((line_integral(&theta, &rect).unwrap() - area).abs() < 1e-10);
    }

    #[test]
    fn gauge_shift_theta_examples() {
        let g = grid();
        let theta = canonical_theta(&g);
        let df = exterior_d(&gf("q^2*p + cos(p)"), &g).unwrap();
        let shifted = gauge_shift_theta(&theta, &df).unwrap();
        let d = d_of_oneform(&shifted).unwrap();
        assert!(max_diff(&d, |_, _| 1.0) < 1e-8);
        let zero = OneForm::parse(&g, "0", "0").unwrap();
        let same = gauge_shift_theta(&theta, &zero).unwrap();
        assert_eq!(same.alpha_q(), theta.alpha_q());
        let pdq = OneForm::parse(&g, "p", "0").unwrap();
        assert!(matches!(gauge_shift_theta(&theta, &pdq), Err(Error::NotClosed(_))));
    }

    #[test]
    fn connection_examples() {
        let g = grid();
        let a = connection_from_generating(&GeneratingFunction::canonical(), &g).unwrap();
        assert_eq!(max_diff(a.a_q.samples(), |_, p| p / 2.0), 0.0);
        assert_eq!(max_diff(a.a_p.samples(), |q, _| q / 2.0), 0.0);
        assert_eq!(integrability_residual(&a).unwrap().max_abs(), 0.0);

        let a = connection_from_generating(&GeneratingFunction::zero(), &g).unwrap();
        assert_eq!(a.a_q.samples().max_abs(), 0.0);
        assert_eq!(max_diff(a.a_p.samples(), |q, _| q), 0.0);

        let a = connection_from_generating(&gf("p*q/2 + 0.1*sin(q)"), &g).unwrap();
        assert!(max_diff(a.a_q.samples(), |q, p| p / 2.0 + 0.1 * q.cos()) < 1e-14);
        assert!(max_diff(a.a_p.samples(), |q, _| q / 2.0) < 1e-14);
        assert!(integrability_residual(&a).unwrap().max_abs() < 1e-8);

        let wrong = Connection::broken(&g).unwrap();
        assert_eq!(max_diff(&integrability_residual(&wrong).unwrap(), |_, _| 1.0), 0.0);
    }

    #[test]
    fn gauge_shift_connection_examples() {
        let g = grid();
        let f0 = gf("p*q/2 + 0.3*sin(q)*p^2");
        let a = connection_from_generating(&f0, &g).unwrap();
        let unchanged = gauge_shift_connection(&a, &gf("4.2")).unwrap();
        assert_eq!(unchanged.a_q.samples(), a.a_q.samples());
        assert_eq!(unchanged.a_p.samples(), a.a_p.samples());

        let f = gf("tanh(q)*cos(p) - q^2");
        let shifted = gauge_shift_connection(&a, &f).unwrap();
        let diff_expr = Expr::sub(f0.expr().clone(), f.expr().clone());
        let direct = connection_from_generating(&GeneratingFunction::from_expr(diff_expr), &g).unwrap();
        let dq = shifted.a_q.samples().zip_with(direct.a_q.samples(), |x, y| x - y).unwrap();
        let dp = shifted.a_p.samples().zip_with(direct.a_p.samples(), |x, y| x - y).unwrap();
        assert!(dq.max_abs() < 1e-10 && dp.max_abs() < 1e-10);
        assert!(integrability_residual(&shifted).unwrap().max_abs() < 1e-10);

        let bad = exterior_shift_connection(&a, &GeneratingFunction::canonical()).unwrap();
        let r = integrability_residual(&bad).unwrap();
        // 2 ∂_q∂_p (pq/2) = 1
        assert!(max_diff(&r, |_, _| 1.0) < 1e-12);
    }

    #[test]
    fn covariant_ops_examples() {
        let g = PhaseGrid::square(10.0, 128, 1.0).unwrap();
        let psi = oscillator_eigenstate(0, OscillatorParams::unit(), &g).unwrap();
        let dpsi = numgrid::derivative(psi.field(), Axis::Q).unwrap();

        // A from f = 0 on a p-independent state: P = -iħ∂_q
        let a0 = connection_from_generating(&GeneratingFunction::zero(), &g).unwrap();
        let lifted = lift_state(&psi, &GeneratingFunction::zero(), &g).unwrap();
        let ops = covariant_ops(&a0);
        let out = ops.apply_p(&lifted).unwrap().samples();
        for i in 0..g.q.n {
            let want = C64::new(0.0, -1.0) * dpsi.values()[[i, 0]];
            for j in [0, 17, 100] {
                assert!((out.values()[[i, j]] - want).norm() < 1e-12);
            }
        }
        // Q on a p-independent state with A_p = q is multiplication by q
        let out = ops.apply_q(&lifted).unwrap().samples();
        for i in 0..g.q.n {
            let want = psi.field().values()[[i, 0]] * g.q.point(i);
            assert!((out.values()[[i, 5]] - want).norm() < 1e-12);
        }

        // A'0 in the unframed representation reproduces q/2 + iħ∂_p, p/2 - iħ∂_q
        let canon = Connection::canonical(&g).unwrap();
        let test = PhaseState::from_samples(ComplexField::from_fn(g, |q, p| {
            C64::new((-(q * q + p * p) / 2.0).exp(), 0.3 * (-(q - 1.0).powi(2) - p * p).exp())
        }))
        .unwrap();
        let out = covariant_ops(&canon).apply_q(&test).unwrap().samples();
        let dp = numgrid::derivative(test.envelope(), Axis::P).unwrap();
        for i in (0..g.q.n).step_by(7) {
            for j in (0..g.p.n).step_by(5) {
                let want = test.envelope().values()[[i, j]] * (g.q.point(i) / 2.0)
                    + C64::new(0.0, 1.0) * dp.values()[[i, j]];
                assert!((out.values()[[i, j]] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_examples() {
        let g = PhaseGrid::square(10.0, 128, 1.0).unwrap();
        let psi = oscillator_eigenstate(0, OscillatorParams::unit(), &g).unwrap();
        let canon = Connection::canonical(&g).unwrap();
        let lifted = lift_state(&psi, &GeneratingFunction::canonical(), &g).unwrap();
        assert!(commutator_residual(&canon, &lifted).unwrap() < 1e-8);

        let test = PhaseState::from_samples(ComplexField::from_fn(g, |q, p| {
            C64::from_polar((-(q * q + p * p) / 2.0).exp(), 0.7 * q - 0.4 * p)
        }))
        .unwrap();
        assert!(commutator_residual(&canon, &test).unwrap() < 1e-8);
        let r = commutator_residual(&Connection::broken(&g).unwrap(), &test).unwrap();
        // [Q, P] = 2iħ here, so the residual is ħ max|Ψ| over the interior
        assert!((r - 1.0).abs() < 1e-3, "{r}");
    }
}
