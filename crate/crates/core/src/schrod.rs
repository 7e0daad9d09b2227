//! The configuration-space eigenproblem and the phase-space Schrödinger
//! operator `H(Q, P) = P²/2m + V(Q)` built from covariant operators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::numgrid::{self, ComplexField, FieldKind, PhaseGrid, SpectralLine};
use crate::states::{lift_state, PhaseState, Wavefunction};
use crate::symcalc::{
    commutator_residual, connection_from_generating, covariant_ops, integrability_residual, interior_range,
    Connection, FramedOps, GeneratingFunction,
};
use crate::C64;

pub const MAX_POTENTIAL_DEGREE: usize = 4;

/// `V(q) = Σ c_k q^k` with `k ≤ 4`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialPotential {
    coeffs: Vec<f64>,
}

impl PolynomialPotential {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("potential coefficients must be finite".into()));
        }
        let degree = coeffs.len() - 1;
        if degree > MAX_POTENTIAL_DEGREE {
            return Err(Error::DegreeOverflow { degree, max: MAX_POTENTIAL_DEGREE });
        }
        let lead = coeffs[degree];
        if degree == 0 || degree % 2 == 1 || lead <= 0.0 {
            return Err(Error::NonConfining(format!(
                "leading term {lead} q^{degree} does not grow to +∞ in both directions"
            )));
        }
        Ok(Self { coeffs })
    }

    /// `mω²q²/2`.
    pub fn harmonic(mass: f64, omega: f64) -> Self {
        Self { coeffs: vec![0.0, 0.0, 0.5 * mass * omega * omega] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, q: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * q + c)
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub energy: f64,
    pub state: Wavefunction,
    /// `‖Hψ - Eψ‖₂ / ‖ψ‖₂` for the discrete operator.
    pub residual: f64,
}

/// Dense `H = -(ħ²/2m) ∂_q² + V(q)` with the spectral second derivative.
pub fn config_hamiltonian(v: &PolynomialPotential, mass: f64, grid: &PhaseGrid) -> Result<DMatrix<f64>> {
    if !(mass > 0.0) {
        return Err(Error::Precondition(format!("mass must be positive, got {mass}")));
    }
    let n = grid.q.n;
    let mut unit = vec![C64::new(0.0, 0.0); n];
    unit[0] = C64::new(1.0, 0.0);
    let line = SpectralLine::new(grid.q, &unit)?;
    let h = grid.q.spacing();
    let k: Vec<C64> = grid
        .q
        .wavenumbers()
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            if n % 2 == 0 && i == n / 2 {
                let kn = std::f64::consts::PI / h;
                C64::from(-kn * kn)
            } else {
                C64::from(-k * k)
            }
        })
        .collect();
    let column = line.apply(&k);
    let t = -grid.hbar * grid.hbar / (2.0 * mass);
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let d = t * column[(i + n - j) % n].re;
        if i == j {
            d + v.eval(grid.q.point(i))
        } else {
            d
        }
    }))
}

/// The `k` lowest eigenpairs, sorted by energy, normalised and with the sign
/// fixed so that the last significant sample is positive.
pub fn solve_config(v: &PolynomialPotential, mass: f64, grid: &PhaseGrid, k: usize) -> Result<Vec<EigenPair>> {
    let n = grid.q.n;
    if k == 0 || k > n {
        return Err(Error::Precondition(format!("cannot return {k} eigenpairs from {n} samples")));
    }
    let h_mat = config_hamiltonian(v, mass, grid)?;
    let eig = SymmetricEigen::new(h_mat.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut pairs = Vec::with_capacity(k);
    for (level, &idx) in order.iter().take(k).enumerate().rev() {
        let mut vec: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
        let peak = vec.amax();
        if let Some(last) = vec.iter().rev().find(|x| x.abs() > 1e-3 * peak) {
            if *last < 0.0 {
                vec.neg_mut();
            }
        }
        let energy = eig.eigenvalues[idx];
        let hv = &h_mat * &vec;
        let residual = (hv - &vec * energy).norm() / vec.norm();
        let state = Wavefunction::from_fn(grid, format!("eigenstate n={level}"), |q| {
            let i = ((q - grid.q.min) / grid.q.spacing()).round() as usize;
            C64::from(vec[i])
        })?;
        pairs.push(EigenPair { energy, state, residual });
    }
    pairs.reverse();
    Ok(pairs)
}

/// `Hψ` in configuration space for a wavefunction.
pub fn apply_config_hamiltonian(v: &PolynomialPotential, mass: f64, psi: &Wavefunction) -> Result<ComplexField> {
    let d2 = numgrid::second_derivative(psi.field(), numgrid::Axis::Q)?;
    let grid = psi.grid();
    let t = -grid.hbar * grid.hbar / (2.0 * mass);
    let pot = ComplexField::from_fn_q(*grid, |q| C64::from(v.eval(q)));
    let a = d2.map(|x| x * t);
    let b = psi.field().zip_with(&pot, |z, vv| z * vv)?;
    a.zip_with(&b, |x, y| x + y)
}

fn hamiltonian_envelope(
    ops: &FramedOps,
    v: &PolynomialPotential,
    mass: f64,
    env: &ComplexField,
) -> Result<ComplexField> {
    let kinetic = ops.apply_p_envelope(&ops.apply_p_envelope(env)?)?;
    let c = v.coeffs();
    let mut pot = env.map(|z| z * c[c.len() - 1]);
    for ck in c.iter().rev().skip(1) {
        let q = ops.apply_q_envelope(&pot)?;
        pot = q.zip_with(env, |a, z| a + z * *ck)?;
    }
    let s = 0.5 / mass;
    kinetic.zip_with(&pot, |k, p| k * s + p)
}

/// `H(Q, P) Ψ` with `V(Q)` applied in Horner order.
pub fn apply_phase_hamiltonian(
    a: &Connection,
    v: &PolynomialPotential,
    mass: f64,
    psi: &PhaseState,
) -> Result<PhaseState> {
    if v.degree() > MAX_POTENTIAL_DEGREE {
        return Err(Error::DegreeOverflow { degree: v.degree(), max: MAX_POTENTIAL_DEGREE });
    }
    let ops = covariant_ops(a).in_frame(psi.frame())?;
    Ok(psi.with_envelope(hamiltonian_envelope(&ops, v, mass, psi.envelope())?))
}

fn interior_norm(f: &ComplexField) -> f64 {
    let g = f.grid();
    let (ri, rj) = (interior_range(g.q.n), interior_range(g.p.n));
    let mut s = 0.0;
    for i in ri {
        for j in rj.clone() {
            s += f.values()[[i, j]].norm_sqr();
        }
    }
    s.sqrt()
}

/// `‖(H - E)Ψ‖₂ / ‖Ψ‖₂` over the interior of the grid.
pub fn phase_residual(
    a: &Connection,
    v: &PolynomialPotential,
    mass: f64,
    psi: &PhaseState,
    energy: f64,
) -> Result<f64> {
    let h_psi = apply_phase_hamiltonian(a, v, mass, psi)?;
    let r = h_psi.envelope().zip_with(psi.envelope(), |x, z| x - z * energy)?;
    let denom = interior_norm(psi.envelope());
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(interior_norm(&r) / denom)
}

/// `⟨Ψ, HΨ⟩ / ⟨Ψ, Ψ⟩` on the full grid.
pub fn rayleigh_energy(a: &Connection, v: &PolynomialPotential, mass: f64, psi: &PhaseState) -> Result<f64> {
    let h_psi = apply_phase_hamiltonian(a, v, mass, psi)?;
    let num = numgrid::inner_product(psi.envelope(), h_psi.envelope())?;
    let den = numgrid::inner_product(psi.envelope(), psi.envelope())?;
    Ok(num.re / den.re)
}

/// `⟨Φ, HΨ⟩` and `⟨HΦ, Ψ⟩` for two states without gauge frames.
pub fn hermiticity_pair(
    a: &Connection,
    v: &PolynomialPotential,
    mass: f64,
    phi: &PhaseState,
    psi: &PhaseState,
) -> Result<(C64, C64)> {
    if phi.frame().is_some() || psi.frame().is_some() {
        return Err(Error::Precondition("hermiticity is compared on unframed states".into()));
    }
    let h_psi = apply_phase_hamiltonian(a, v, mass, psi)?;
    let h_phi = apply_phase_hamiltonian(a, v, mass, phi)?;
    Ok((
        numgrid::inner_product(phi.envelope(), h_psi.envelope())?,
        numgrid::inner_product(h_phi.envelope(), psi.envelope())?,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub generating: String,
    pub level: usize,
    pub energy: f64,
    pub phase_residual: f64,
    pub integrability: f64,
    pub commutator: f64,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn max_phase_residual(&self) -> f64 {
        self.cells.iter().map(|c| c.phase_residual).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("generating,level,energy,phase_residual,integrability,commutator,error\n");
        for c in &self.cells {
            out.push_str(&format!(
                "\"{}\",{},{:e},{:e},{:e},{:e},{}\n",
                c.generating,
                c.level,
                c.energy,
                c.phase_residual,
                c.integrability,
                c.commutator,
                c.error.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

/// For every `f` and each of the `k` lowest eigenpairs: build the connection
/// from `f`, lift the eigenstate with `f`, and record the residuals. Cell
/// errors are recorded, never propagated.
pub fn equivalence_sweep(
    v: &PolynomialPotential,
    mass: f64,
    grid: &PhaseGrid,
    f_list: &[GeneratingFunction],
    k: usize,
) -> Result<SweepReport> {
    let pairs = solve_config(v, mass, grid, k)?;
    let cells = crate::par::map_indexed(f_list.len() * k, |idx| {
        let (fi, level) = (idx / k, idx % k);
        let f = &f_list[fi];
        let pair = &pairs[level];
        let cell = || -> Result<SweepCell> {
            let a = connection_from_generating(f, grid)?;
            let lifted = lift_state(&pair.state, f, grid)?;
            Ok(SweepCell {
                generating: f.text().to_string(),
                level,
                energy: pair.energy,
                phase_residual: phase_residual(&a, v, mass, &lifted, pair.energy)?,
                integrability: integrability_residual(&a)?.max_abs(),
                commutator: commutator_residual(&a, &lifted)?,
                error: None,
            })
        };
        cell().unwrap_or_else(|e| SweepCell {
            generating: f.text().to_string(),
            level,
            energy: pair.energy,
            phase_residual: f64::NAN,
            integrability: f64::NAN,
            commutator: f64::NAN,
            error: Some(e.to_string()),
        })
    });
    Ok(SweepReport { cells })
}

/// Zero state on `grid`, for checks of linearity.
pub fn zero_state(grid: &PhaseGrid) -> PhaseState {
    PhaseState::from_samples(ComplexField::zeros(*grid, FieldKind::Plane)).expect("finite zeros")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{oscillator_eigenstate, OscillatorParams};

    fn grid() -> PhaseGrid {
        PhaseGrid::square(10.0, 128, 1.0).unwrap()
    }

    #[test]
    fn potential_validation() {
        assert!(matches!(PolynomialPotential::new(vec![0.0, 0.0, -1.0]), Err(Error::NonConfining(_))));
        assert!(matches!(PolynomialPotential::new(vec![0.0, 1.0]), Err(Error::NonConfining(_))));
        assert!(matches!(
            PolynomialPotential::new(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            Err(Error::DegreeOverflow { .. })
        ));
        let v = PolynomialPotential::new(vec![1.0, 0.0, -2.0, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(v.degree(), 4);
        assert_eq!(v.eval(2.0), 1.0 - 8.0 + 8.0);
    }

    #[test]
    fn harmonic_spectrum() {
        let g = grid();
        let v = PolynomialPotential::harmonic(1.0, 1.0);
        let pairs = solve_config(&v, 1.0, &g, 6).unwrap();
        for (n, p) in pairs.iter().enumerate() {
            let want = n as f64 + 0.5;
            assert!(((p.energy - want) / want).abs() < 1e-8, "{n} {}", p.energy);
            assert!(p.residual < 1e-8);
        }
        let ground = oscillator_eigenstate(0, OscillatorParams::unit(), &g).unwrap();
        let ov = numgrid::inner_product(pairs[0].state.field(), ground.field()).unwrap();
        assert!(ov.norm() > 1.0 - 1e-10);
    }

    #[test]
    fn lifted_eigenstates_solve_the_phase_equation() {
        let g = grid();
        let v = PolynomialPotential::harmonic(1.0, 1.0);
        let f = GeneratingFunction::canonical();
        let a = connection_from_generating(&f, &g).unwrap();
        for n in 0..3 {
            let psi = oscillator_eigenstate(n, OscillatorParams::unit(), &g).unwrap();
            let lifted = lift_state(&psi, &f, &g).unwrap();
            let e = n as f64 + 0.5;
            assert!(phase_residual(&a, &v, 1.0, &lifted, e).unwrap() < 1e-6);
            let wrong = phase_residual(&a, &v, 1.0, &lifted, e + 0.5).unwrap();
            assert!((wrong - 0.5).abs() < 1e-6);
            assert!((rayleigh_energy(&a, &v, 1.0, &lifted).unwrap() - e).abs() < 1e-8);
        }
        let f = GeneratingFunction::parse("p*q/2 + 0.1*sin(q)").unwrap();
        let a = connection_from_generating(&f, &g).unwrap();
        let psi = oscillator_eigenstate(1, OscillatorParams::unit(), &g).unwrap();
        let lifted = lift_state(&psi, &f, &g).unwrap();
        assert!(phase_residual(&a, &v, 1.0, &lifted, 1.5).unwrap() < 1e-6);
    }

    #[test]
    fn standard_representation_replicates_config_h() {
        let g = grid();
        let v = PolynomialPotential::new(vec![0.3, 0.0, 0.5, 0.0, 0.02]).unwrap();
        let zero = GeneratingFunction::zero();
        let a = connection_from_generating(&zero, &g).unwrap();
        let psi = oscillator_eigenstate(2, OscillatorParams::unit(), &g).unwrap();
        let lifted = lift_state(&psi, &zero, &g).unwrap();
        let out = apply_phase_hamiltonian(&a, &v, 1.0, &lifted).unwrap().samples();
        let want = apply_config_hamiltonian(&v, 1.0, &psi).unwrap();
        for ((i, _), z) in out.values().indexed_iter() {
            assert!((z - want.values()[[i, 0]]).norm() < 1e-10);
        }
        let z = apply_phase_hamiltonian(&a, &v, 1.0, &zero_state(&g)).unwrap();
        assert_eq!(z.envelope().max_abs(), 0.0);
    }

    #[test]
    fn phase_hamiltonian_is_hermitian() {
        let g = grid();
        let v = PolynomialPotential::harmonic(1.0, 1.0);
        let f = GeneratingFunction::parse("p*q/2 + 0.2*sin(q)*cos(p)").unwrap();
        let a = connection_from_generating(&f, &g).unwrap();
        let bump = |q0: f64, p0: f64, k: f64| {
            PhaseState::from_samples(ComplexField::from_fn(g, move |q, p| {
                C64::from_polar((-((q - q0).powi(2) + (p - p0).powi(2)) / 2.0).exp(), k * (q + p))
            }))
            .unwrap()
        };
        let (x, y) = hermiticity_pair(&a, &v, 1.0, &bump(0.5, -0.3, 0.4), &bump(-0.7, 0.9, -0.2)).unwrap();
        assert!((x - y).norm() / x.norm() < 1e-8);
    }

    #[test]
    fn sweep_reports_every_cell() {
        let g = grid();
        let v = PolynomialPotential::harmonic(1.0, 1.0);
        let fs = vec![GeneratingFunction::canonical(), GeneratingFunction::zero()];
        let r = equivalence_sweep(&v, 1.0, &g, &fs, 3).unwrap();
        assert_eq!(r.cells.len(), 6);
        assert!(r.max_phase_residual() < 1e-6);
        assert!(r.cells.iter().all(|c| c.integrability < 1e-8 && c.commutator < 1e-8));
        assert_eq!(r.to_csv().lines().count(), 7);
    }
}
