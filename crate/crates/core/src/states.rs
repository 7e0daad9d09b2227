//! Configuration-space wavefunctions and their lifts to phase space,
//! `Ψ_f(q, p) = exp(-i f(q, p)/ħ) ψ(q)`.

use crate::error::{Error, Result};
use crate::numgrid::{self, ComplexField, FieldKind, PhaseGrid, RealField};
use crate::symcalc::GeneratingFunction;
use crate::C64;

/// Largest oscillator level and polynomial degree the toolkit constructs.
pub const MAX_LEVEL: usize = 32;

/// Decaying states must fall below this fraction of their peak at the edge.
pub const LEAKAGE_LIMIT: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatorParams {
    pub mass: f64,
    pub omega: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64) -> Result<Self> {
        if !(mass > 0.0 && omega > 0.0 && mass.is_finite() && omega.is_finite()) {
            return Err(Error::Precondition(format!(
                "oscillator needs m > 0 and ω > 0, got m = {mass}, ω = {omega}"
            )));
        }
        Ok(Self { mass, omega })
    }

    /// `m = ω = 1`.
    pub fn unit() -> Self {
        Self { mass: 1.0, omega: 1.0 }
    }

    /// Oscillator length `sqrt(ħ / mω)`.
    pub fn length(&self, hbar: f64) -> f64 {
        (hbar / (self.mass * self.omega)).sqrt()
    }

    pub fn energy(&self, n: usize, hbar: f64) -> f64 {
        hbar * self.omega * (n as f64 + 0.5)
    }
}

/// A normalised wavefunction sampled on the q-axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Wavefunction {
    samples: ComplexField,
    norm: f64,
    label: String,
}

impl Wavefunction {
    /// Normalises `samples` (a q-line) and checks that it decays at the edge.
    pub fn from_samples(samples: ComplexField, label: impl Into<String>) -> Result<Self> {
        if samples.kind() != FieldKind::QLine {
            return Err(Error::ShapeMismatch("a wavefunction is a q-line field".into()));
        }
        if !samples.all_finite() {
            return Err(Error::Precondition("wavefunction samples must be finite".into()));
        }
        let n2 = numgrid::norm_squared(&samples);
        if n2 == 0.0 {
            return Err(Error::Precondition("wavefunction vanishes on the grid".into()));
        }
        let scale = 1.0 / n2.sqrt();
        let samples = samples.map(|z| z * scale);
        check_leakage(&samples)?;
        let norm = numgrid::norm_squared(&samples).sqrt();
        Ok(Self { samples, norm, label: label.into() })
    }

    pub fn from_fn(grid: &PhaseGrid, label: impl Into<String>, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::from_samples(ComplexField::from_fn_q(*grid, f), label)
    }

    pub fn field(&self) -> &ComplexField {
        &self.samples
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.samples.grid()
    }

    pub fn samples(&self) -> Vec<C64> {
        self.samples.line()
    }

    /// Quadrature norm after construction.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `ψ(-q)`, by spectral reflection.
    pub fn reflected(&self) -> Result<Self> {
        let r = numgrid::reflect(&self.samples, numgrid::Axis::Q)?;
        Self::from_samples(r, format!("reflected {}", self.label))
    }

    /// `ψ(q - a)`.
    pub fn translated(&self, a: f64) -> Result<Self> {
        let s = numgrid::shift(&self.samples, numgrid::Axis::Q, -a)?;
        Self::from_samples(s, format!("{} translated by {a}", self.label))
    }
}

fn check_leakage(field: &ComplexField) -> Result<()> {
    let leak = field.relative_leakage();
    if leak >= LEAKAGE_LIMIT {
        return Err(Error::BoundaryLeakage { edge: leak, limit: LEAKAGE_LIMIT });
    }
    Ok(())
}

/// The n-th oscillator eigenstate from the normalised Hermite-function
/// recurrence `ψ_{k+1} = sqrt(2/(k+1)) x ψ_k - sqrt(k/(k+1)) ψ_{k-1}`.
pub fn oscillator_eigenstate(n: usize, params: OscillatorParams, grid: &PhaseGrid) -> Result<Wavefunction> {
    if n > MAX_LEVEL {
        return Err(Error::DegreeOverflow { degree: n, max: MAX_LEVEL });
    }
    let ell = params.length(grid.hbar);
    let pre = (std::f64::consts::PI.sqrt() * ell).sqrt().recip();
    let samples = ComplexField::from_fn_q(*grid, |q| C64::from(hermite_function(n, q / ell) * pre));
    check_leakage(&samples)?;
    let norm = numgrid::norm_squared(&samples).sqrt();
    Ok(Wavefunction { samples, norm, label: format!("oscillator n={n}") })
}

/// Hermite function of unit length scale, without the `π^{-1/4}` factor.
fn hermite_function(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = (-0.5 * x * x).exp();
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `(2πσ²)^{-1/4} exp(-(q - q0)²/(4σ²)) exp(i p0 q / ħ)`.
pub fn gaussian_packet(q0: f64, p0: f64, sigma: f64, grid: &PhaseGrid) -> Result<Wavefunction> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Precondition(format!("packet width must be positive, got {sigma}")));
    }
    let hbar = grid.hbar;
    let amp = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25);
    let samples = ComplexField::from_fn_q(*grid, |q| {
        let env = amp * (-(q - q0).powi(2) / (4.0 * sigma * sigma)).exp();
        C64::from_polar(env, p0 * q / hbar)
    });
    check_leakage(&samples)?;
    let norm = numgrid::norm_squared(&samples).sqrt();
    Ok(Wavefunction { samples, norm, label: format!("gaussian q0={q0} p0={p0} sigma={sigma}") })
}

/// Outcome of [`factorization_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationReport {
    pub finite: bool,
    /// `∫ exp(-2aq²) |φ|² dq` on the full grid.
    pub integral: f64,
    /// `max |φ|` over the grid divided by its maximum over the inner half.
    pub growth: f64,
    /// Relative change of the integral between spacings `h` and `2h`.
    pub refinement_change: f64,
}

/// A polynomial of degree 32 grows by at most `2^32` between the inner half
/// of a symmetric grid and its edge.
const GROWTH_GUARD: f64 = 4_294_967_296.0;

/// Splits `ψ = exp(-aq²) φ` and tests the finiteness condition on `φ`.
pub fn factorization_check(psi: &Wavefunction, a: f64) -> Result<FactorizationReport> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Precondition(format!("factorisation needs a > 0, got {a}")));
    }
    let g = psi.grid();
    let h = g.q.spacing();
    let phi: Vec<f64> = psi
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let q = g.q.point(i);
            z.norm() * (a * q * q).exp()
        })
        .collect();
    let all_finite = phi.iter().all(|v| v.is_finite());
    let centre = 0.5 * (g.q.min + g.q.max);
    let quarter = 0.25 * g.q.length();
    let (mut full, mut inner) = (0.0_f64, 0.0_f64);
    for (i, v) in phi.iter().enumerate() {
        full = full.max(*v);
        if (g.q.point(i) - centre).abs() <= quarter {
            inner = inner.max(*v);
        }
    }
    let growth = if inner > 0.0 { full / inner } else { f64::INFINITY };
    let weight = |i: usize| {
        let q = g.q.point(i);
        (-2.0 * a * q * q).exp() * phi[i] * phi[i]
    };
    let integral: f64 = (0..phi.len()).map(weight).sum::<f64>() * h;
    let coarse: f64 = (0..phi.len()).step_by(2).map(weight).sum::<f64>() * 2.0 * h;
    let refinement_change = ((integral - coarse) / integral).abs();
    let finite = all_finite
        && growth <= GROWTH_GUARD
        && integral.is_finite()
        && integral > 0.0
        && refinement_change < 1e-6;
    Ok(FactorizationReport { finite, integral, growth, refinement_change })
}

/// `ψ(q) = exp(-aq²) φ(q)` with polynomial `φ`, coefficients in ascending
/// powers of q.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianFactorState {
    a: f64,
    phi: Vec<C64>,
}

impl GaussianFactorState {
    pub fn new(a: f64, phi: Vec<C64>) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Precondition(format!("Gaussian factor needs a > 0, got {a}")));
        }
        let mut phi = phi;
        while phi.len() > 1 && phi.last() == Some(&C64::new(0.0, 0.0)) {
            phi.pop();
        }
        if phi.iter().all(|c| c.norm() == 0.0) || phi.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("φ must be a finite, nonzero polynomial".into()));
        }
        Ok(Self { a, phi })
    }

    /// Oscillator level `n` as `a = mω/2ħ`, `φ = N_n H_n(q/ℓ)`.
    pub fn oscillator(n: usize, params: OscillatorParams, hbar: f64) -> Result<Self> {
        if n > MAX_LEVEL {
            return Err(Error::DegreeOverflow { degree: n, max: MAX_LEVEL });
        }
        let ell = params.length(hbar);
        let a = params.mass * params.omega / (2.0 * hbar);
        let mut log_fact = 0.0;
        for k in 1..=n {
            log_fact += (k as f64).ln();
        }
        let norm = (params.mass * params.omega / (std::f64::consts::PI * hbar)).powf(0.25)
            * (-0.5 * (n as f64 * std::f64::consts::LN_2 + log_fact)).exp();
        let h = hermite_coefficients(n);
        let phi = h
            .iter()
            .enumerate()
            .map(|(k, c)| C64::from(norm * c / ell.powi(k as i32)))
            .collect();
        Self::new(a, phi)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn phi(&self) -> &[C64] {
        &self.phi
    }

    pub fn degree(&self) -> usize {
        self.phi.len() - 1
    }

    pub fn eval_phi(&self, q: f64) -> C64 {
        poly_eval(&self.phi, q)
    }

    /// `∫ exp(-2aq²) |φ|² dq` from the Gaussian moments.
    pub fn norm_squared(&self) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for (j, cj) in self.phi.iter().enumerate() {
            for (k, ck) in self.phi.iter().enumerate() {
                s += cj.conj() * ck * gaussian_moment(j + k, 2.0 * self.a);
            }
        }
        s.re
    }

    /// Rescales `φ` to unit norm.
    pub fn normalized(&self) -> Self {
        let s = self.norm_squared().sqrt().recip();
        Self { a: self.a, phi: self.phi.iter().map(|c| c * s).collect() }
    }

    pub fn to_wavefunction(&self, grid: &PhaseGrid) -> Result<Wavefunction> {
        let samples =
            ComplexField::from_fn_q(*grid, |q| self.eval_phi(q) * (-self.a * q * q).exp());
        Wavefunction::from_samples(samples, format!("gaussian factor a={} degree {}", self.a, self.degree()))
    }
}

/// Coefficients of the physicists' Hermite polynomial `H_n`, ascending.
pub fn hermite_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![0.0; n + 1];
    let mut cur = vec![0.0; n + 1];
    cur[0] = 1.0;
    for k in 0..n {
        // H_{k+1} = 2x H_k - 2k H_{k-1}
        let mut next = vec![0.0; n + 1];
        for i in 0..=k {
            next[i + 1] += 2.0 * cur[i];
        }
        for i in 0..=n {
            next[i] -= 2.0 * k as f64 * prev[i];
        }
        prev = cur;
        cur = next;
    }
    cur
}

pub(crate) fn poly_eval(c: &[C64], x: f64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &ck| acc * x + ck)
}

/// `∫ x^k exp(-b x²) dx`.
fn gaussian_moment(k: usize, b: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    // Γ((k+1)/2) / b^{(k+1)/2}, with Γ(1/2) = sqrt(π) and Γ(s+1) = s Γ(s)
    let mut g = std::f64::consts::PI.sqrt();
    let mut s = 0.5;
    while s < (k as f64 + 1.0) / 2.0 - 0.25 {
        g *= s;
        s += 1.0;
    }
    g / b.powf((k as f64 + 1.0) / 2.0)
}

/// Where a phase-space state came from, for sidecars and reports.
#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub state: String,
    pub generating: Option<String>,
}

/// A complex field on phase space, stored as an envelope `Φ` together with
/// an optional gauge frame `f`: the state is `exp(-i f/ħ) Φ`.
///
/// Lifted states keep `f` separate because the phase `pq/2ħ` is not
/// periodic in `p`, so Fourier derivatives of the assembled samples would
/// be wrong. Covariant operators act on `Φ` instead.
#[derive(Clone, Debug)]
pub struct PhaseState {
    envelope: ComplexField,
    frame: Option<(GeneratingFunction, RealField)>,
    provenance: Option<Provenance>,
}

impl PhaseState {
    /// A state with no frame; `samples` must be band-limited on the plane.
    pub fn from_samples(samples: ComplexField) -> Result<Self> {
        let envelope = samples.broadcast_plane()?;
        if !envelope.all_finite() {
            return Err(Error::Precondition("phase-space samples must be finite".into()));
        }
        Ok(Self { envelope, frame: None, provenance: None })
    }

    pub fn grid(&self) -> &PhaseGrid {
        self.envelope.grid()
    }

    pub fn envelope(&self) -> &ComplexField {
        &self.envelope
    }

    pub fn frame(&self) -> Option<&GeneratingFunction> {
        self.frame.as_ref().map(|(f, _)| f)
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    /// Same frame, new envelope.
    pub fn with_envelope(&self, envelope: ComplexField) -> Self {
        Self { envelope, frame: self.frame.clone(), provenance: None }
    }

    /// The assembled values `exp(-i f/ħ) Φ`.
    pub fn samples(&self) -> ComplexField {
        match &self.frame {
            None => self.envelope.clone(),
            Some((_, f)) => {
                let hbar = self.grid().hbar;
                self.envelope
                    .zip_with(f, |z, fv| z * C64::from_polar(1.0, -fv / hbar))
                    .expect("frame shares the envelope grid")
            }
        }
    }

    /// `∫∫ |Ψ|² dq dp`.
    pub fn norm_squared(&self) -> f64 {
        numgrid::norm_squared(&self.envelope)
    }
}

/// `Ψ_f(q, p) = exp(-i f(q, p)/ħ) ψ(q)`.
pub fn lift_state(psi: &Wavefunction, f: &GeneratingFunction, grid: &PhaseGrid) -> Result<PhaseState> {
    if psi.grid().q != grid.q {
        return Err(Error::ShapeMismatch("wavefunction and target grid disagree on q".into()));
    }
    let on_grid = psi.field().clone();
    let line = ComplexField::from_array(*grid, FieldKind::QLine, on_grid.into_values())?;
    let envelope = line.broadcast_plane()?;
    let f_samples = f.sample(grid)?;
    Ok(PhaseState {
        envelope,
        frame: Some((f.clone(), f_samples)),
        provenance: Some(Provenance {
            state: psi.label().to_string(),
            generating: Some(f.text().to_string()),
        }),
    })
}

/// `max | |Ψ(q, p)| - |ψ(q)| |`.
pub fn born_residual(big_psi: &PhaseState, psi: &Wavefunction) -> Result<f64> {
    let g = big_psi.grid();
    if psi.grid().q != g.q {
        return Err(Error::ShapeMismatch("Born residual needs a common q-axis".into()));
    }
    let line = psi.samples();
    let s = big_psi.samples();
    let mut worst = 0.0_f64;
    for ((i, _), z) in s.values().indexed_iter() {
        worst = worst.max((z.norm() - line[i].norm()).abs());
    }
    Ok(worst)
}

/// `∫∫|Ψ|² / (V_p ∫|ψ|²)`, one for every lift.
pub fn phase_space_norm_ratio(big_psi: &PhaseState, psi: &Wavefunction) -> f64 {
    let vp = big_psi.grid().p.length();
    big_psi.norm_squared() / (vp * numgrid::norm_squared(psi.field()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::square(12.0, 256, 1.0).unwrap()
    }

    #[test]
    fn oscillator_ground_state_is_closed_form() {
        let g = grid();
        let psi = oscillator_eigenstate(0, OscillatorParams::unit(), &g).unwrap();
        let pi = std::f64::consts::PI;
        for (i, z) in psi.samples().iter().enumerate() {
            let q = g.q.point(i);
            assert!((z - C64::from(pi.powf(-0.25) * (-q * q / 2.0).exp())).norm() < 1e-12);
        }
        assert!((psi.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillator_states_are_orthonormal() {
        let g = PhaseGrid::square(12.0, 512, 1.0).unwrap();
        let states: Vec<_> =
            (0..=10).map(|n| oscillator_eigenstate(n, OscillatorParams::unit(), &g).unwrap()).collect();
        for (a, sa) in states.iter().enumerate() {
            for (b, sb) in states.iter().enumerate() {
                let ip = numgrid::inner_product(sa.field(), sb.field()).unwrap();
                let want = if a == b { 1.0 } else { 0.0 };
                assert!((ip - want).norm() < 1e-10, "{a} {b} {ip}");
            }
        }
    }

    #[test]
    fn oscillator_errors() {
        let small = PhaseGrid::square(1.0, 64, 1.0).unwrap();
        let e = oscillator_eigenstate(0, OscillatorParams::unit(), &small).unwrap_err();
        assert!(matches!(e, Error::BoundaryLeakage { .. }));
        let e = oscillator_eigenstate(33, OscillatorParams::unit(), &grid()).unwrap_err();
        assert!(matches!(e, Error::DegreeOverflow { .. }));
        let wide = PhaseGrid::square(16.0, 512, 1.0).unwrap();
        assert!(oscillator_eigenstate(32, OscillatorParams::unit(), &wide).is_ok());
    }

    #[test]
    fn gaussian_packet_examples() {
        let g = grid();
        let params = OscillatorParams::new(2.0, 0.75).unwrap();
        let sigma = (g.hbar / (2.0 * params.mass * params.omega)).sqrt();
        let a = gaussian_packet(0.0, 0.0, sigma, &g).unwrap();
        let b = oscillator_eigenstate(0, params, &g).unwrap();
        let d = a.field().zip_with(b.field(), |x, y| x - y).unwrap().max_abs();
        assert!(d < 1e-10);
        let c = gaussian_packet(1.5, -2.0, 0.7, &g).unwrap();
        assert!((numgrid::norm_squared(c.field()) - 1.0).abs() < 1e-10);
        let g8 = PhaseGrid::square(8.0, 256, 1.0).unwrap();
        assert!(matches!(gaussian_packet(7.9, 0.0, 1.0, &g8), Err(Error::BoundaryLeakage { .. })));
    }

    #[test]
    fn factorization_examples() {
        let g = PhaseGrid::square(8.0, 256, 1.0).unwrap();
        let psi = oscillator_eigenstate(0, OscillatorParams::unit(), &g).unwrap();
        let r = factorization_check(&psi, 0.5).unwrap();
        assert!(r.finite);
        assert!((r.integral - 1.0).abs() < 1e-8);
        let r = factorization_check(&psi, 1.0).unwrap();
        assert!(!r.finite, "{r:?}");
        assert!(matches!(factorization_check(&psi, 0.0), Err(Error::Precondition(_))));
        let g10 = PhaseGrid::square(10.0, 256, 1.0).unwrap();
        let psi5 = oscillator_eigenstate(5, OscillatorParams::unit(), &g10).unwrap();
        assert!(factorization_check(&psi5, 0.5).unwrap().finite);
    }

    #[test]
    fn gaussian_factor_matches_oscillator() {
        let g = grid();
        for n in 0..8 {
            let s = GaussianFactorState::oscillator(n, OscillatorParams::unit(), 1.0).unwrap();
            assert!((s.norm_squared() - 1.0).abs() < 1e-12, "{n}");
            let a = s.to_wavefunction(&g).unwrap();
            let b = oscillator_eigenstate(n, OscillatorParams::unit(), &g).unwrap();
            let d = a.field().zip_with(b.field(), |x, y| x - y).unwrap().max_abs();
            assert!(d < 1e-12, "{n} {d}");
        }
        assert!(GaussianFactorState::new(0.0, vec![C64::from(1.0)]).is_err());
        assert!(GaussianFactorState::new(1.0, vec![C64::from(0.0)]).is_err());
    }

    #[test]
    fn lift_examples() {
        let g = PhaseGrid::square(8.0, 64, 1.0).unwrap();
        let psi = oscillator_eigenstate(0, OscillatorParams::unit(), &g).unwrap();
        let line = psi.samples();

        let lifted = lift_state(&psi, &GeneratingFunction::zero(), &g).unwrap();
        let s = lifted.samples();
        for ((i, _), z) in s.values().indexed_iter() {
            assert_eq!(*z, line[i]);
        }

        let c = 0.8;
        let lifted = lift_state(&psi, &GeneratingFunction::parse("0.8").unwrap(), &g).unwrap();
        let rot = C64::from_polar(1.0, -c);
        for ((i, _), z) in lifted.samples().values().indexed_iter() {
            assert!((z - rot * line[i]).norm() < 1e-15);
        }

        let lifted = lift_state(&psi, &GeneratingFunction::canonical(), &g).unwrap();
        for ((i, j), z) in lifted.samples().values().indexed_iter() {
            let (q, p) = (g.q.point(i), g.p.point(j));
            assert!((z - C64::from_polar(1.0, -p * q / 2.0) * line[i]).norm() < 1e-15);
        }
        assert!(born_residual(&lifted, &psi).unwrap() < 1e-12);
        assert!((phase_space_norm_ratio(&lifted, &psi) - 1.0).abs() < 1e-8);

        let doubled = lifted.with_envelope(lifted.envelope().map(|z| z * 2.0));
        let peak = psi.field().max_abs();
        assert!((born_residual(&doubled, &psi).unwrap() - peak).abs() < 1e-15);

        let bad = GeneratingFunction::parse("1/q").unwrap();
        let g_odd = PhaseGrid::square(8.0, 64, 1.0).unwrap();
        assert!(matches!(lift_state(&psi, &bad, &g_odd), Err(Error::Domain { .. })));
    }

    #[test]
    fn hermite_coefficients_low_orders() {
        assert_eq!(hermite_coefficients(0), vec![1.0]);
        assert_eq!(hermite_coefficients(2), vec![-2.0, 0.0, 4.0]);
        assert_eq!(hermite_coefficients(3), vec![0.0, -12.0, 0.0, 8.0]);
    }
}
