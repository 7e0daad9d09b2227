//! Wigner functions by three independent routes:
//!
//! * [`wigner_direct`]: the correlation integral
//!   `W(q,p) = (2πħ)^{-1} ∫ e^{-ipy/ħ} ψ*(q - y/2) ψ(q + y/2) dy`;
//! * [`wigner_tegmen`]: the integral-free form for `ψ = e^{-aq²} φ(q)` with
//!   polynomial `φ`, where the shifts become derivatives of a Gaussian in p;
//! * [`covariant_wigner`]: the same integral written with exponentials of the
//!   covariant momentum operator acting on lifted phase-space states.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::numgrid::{self, FieldKind, Integration, PhaseGrid, RealField, SpectralLine};
use crate::par;
use crate::states::{poly_eval, GaussianFactorState, Wavefunction, MAX_LEVEL};
use crate::symcalc::GeneratingFunction;
use crate::C64;

/// Discarded imaginary parts above this abort the direct and oscillator
/// routes.
pub const REALNESS_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Direct,
    Tegmen,
    Covariant,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Direct => "wigner-direct",
            Route::Tegmen => "wigner-tegmen",
            Route::Covariant => "wigner-covariant",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WignerField {
    pub values: RealField,
    pub route: Route,
    /// Largest imaginary part dropped when taking the real part.
    pub imag_max: f64,
    /// Edge magnitude of the input state relative to its peak.
    pub leakage: f64,
    pub source: String,
}

impl WignerField {
    pub fn grid(&self) -> &PhaseGrid {
        self.values.grid()
    }

    /// `∫∫ W dq dp`.
    pub fn total(&self) -> f64 {
        numgrid::integrate(&self.values, Integration::Both)
            .ok()
            .and_then(numgrid::Integral::scalar)
            .unwrap_or(f64::NAN)
    }

    pub fn max_abs_diff(&self, other: &WignerField) -> Result<f64> {
        Ok(self.values.zip_with(&other.values, |a, b| a - b)?.max_abs())
    }
}

/// `X_k = Σ_j x_j exp(-iθjk)` for `k < n_out`, by Bluestein's algorithm.
struct ChirpZ {
    n_in: usize,
    n_out: usize,
    pre: Vec<C64>,
    filter: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ChirpZ {
    fn new(n_in: usize, n_out: usize, theta: f64) -> Self {
        let len = (n_in + n_out - 1).next_power_of_two();
        let chirp = |m: i64| C64::from_polar(1.0, 0.5 * theta * (m * m) as f64);
        let pre: Vec<C64> = (0..n_in.max(n_out) as i64).map(|m| chirp(m).conj()).collect();
        let mut filter = vec![C64::new(0.0, 0.0); len];
        for m in -(n_in as i64 - 1)..n_out as i64 {
            filter[m.rem_euclid(len as i64) as usize] = chirp(m);
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        forward.process(&mut filter);
        let scale = 1.0 / len as f64;
        filter.iter_mut().for_each(|z| *z *= scale);
        Self { n_in, n_out, pre, filter, forward, inverse }
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.n_in);
        let mut buf = vec![C64::new(0.0, 0.0); self.filter.len()];
        for (j, v) in x.iter().enumerate() {
            buf[j] = v * self.pre[j];
        }
        self.forward.process(&mut buf);
        buf.iter_mut().zip(&self.filter).for_each(|(b, f)| *b *= f);
        self.inverse.process(&mut buf);
        (0..self.n_out).map(|k| buf[k] * self.pre[k]).collect()
    }
}

fn check_state(psi: &Wavefunction, grid: &PhaseGrid) -> Result<f64> {
    if psi.grid().q != grid.q {
        return Err(Error::ShapeMismatch("wavefunction and Wigner grid disagree on q".into()));
    }
    let leak = psi.field().relative_leakage();
    if leak >= crate::states::LEAKAGE_LIMIT {
        return Err(Error::BoundaryLeakage { edge: leak, limit: crate::states::LEAKAGE_LIMIT });
    }
    Ok(leak)
}

fn assemble(grid: &PhaseGrid, rows: Vec<Vec<C64>>, by_q: bool) -> Result<(RealField, f64)> {
    let (nq, np) = (grid.q.n, grid.p.n);
    let mut imag = 0.0_f64;
    let values = ndarray::Array2::from_shape_fn((nq, np), |(i, j)| {
        let z = if by_q { rows[i][j] } else { rows[j][i] };
        imag = imag.max(z.im.abs());
        z.re
    });
    Ok((RealField::from_array(*grid, FieldKind::Plane, values)?, imag))
}

/// Direct evaluation of the correlation integral.
///
/// `y` runs over `j h` with `h` the q-spacing; odd `j` need `ψ` half-way
/// between samples, taken from one spectral shift. The `y → p` transform is
/// a chirp-z transform, so the p-axis is not tied to the FFT frequencies.
pub fn wigner_direct(psi: &Wavefunction, grid: &PhaseGrid) -> Result<WignerField> {
    let leakage = check_state(psi, grid)?;
    let hbar = grid.hbar;
    let n = grid.q.n;
    let h = grid.q.spacing();
    if grid.p.length() > 2.0 * PI * hbar / h + 1e-12 {
        return Err(Error::InvalidSpec(format!(
            "p-axis length {} exceeds the period 2πħ/h = {} of the discrete transform",
            grid.p.length(),
            2.0 * PI * hbar / h
        )));
    }
    let line = psi.samples();
    let half = SpectralLine::new(grid.q, &line)?.shifted(0.5 * h);
    // ψ(q_i + j h/2)
    let at = |i: usize, j: i64| -> C64 {
        let base = i as i64 + j.div_euclid(2);
        if !(0..n as i64).contains(&base) {
            return C64::new(0.0, 0.0);
        }
        if j.rem_euclid(2) == 0 {
            line[base as usize]
        } else {
            half[base as usize]
        }
    };
    let big_j = n as i64;
    let n_y = 2 * n + 1;
    let dp = grid.p.spacing();
    let pmin = grid.p.min;
    let czt = ChirpZ::new(n_y, grid.p.n, dp * h / hbar);
    let pre: Vec<C64> = (0..n_y).map(|j| C64::from_polar(1.0, -pmin * j as f64 * h / hbar)).collect();
    let post: Vec<C64> = (0..grid.p.n)
        .map(|k| C64::from_polar(h / (2.0 * PI * hbar), grid.p.point(k) * big_j as f64 * h / hbar))
        .collect();
    let rows = par::map_indexed(n, |i| {
        let x: Vec<C64> = (0..n_y)
            .map(|jj| {
                let j = jj as i64 - big_j;
                at(i, -j).conj() * at(i, j) * pre[jj]
            })
            .collect();
        czt.apply(&x).into_iter().zip(&post).map(|(z, s)| z * s).collect::<Vec<_>>()
    });
    let (values, imag_max) = assemble(grid, rows, true)?;
    if imag_max > REALNESS_LIMIT {
        return Err(Error::Realness(imag_max));
    }
    Ok(WignerField { values, route: Route::Direct, imag_max, leakage, source: psi.label().to_string() })
}

/// Integral-free route for `ψ = e^{-aq²} φ(q)`:
/// `W = (ħ sqrt(2πa))^{-1} e^{-2aq²} φ*(q - (iħ/2)∂_p) φ(q + (iħ/2)∂_p) e^{-p²/2aħ²}`.
///
/// Both Taylor series terminate, leaving `Σ_N d_N(q) ∂_p^N` applied to the
/// Gaussian, whose derivatives are Hermite functions.
pub fn wigner_tegmen(state: &GaussianFactorState, grid: &PhaseGrid) -> Result<WignerField> {
    let deg = state.degree();
    if deg > MAX_LEVEL {
        return Err(Error::DegreeOverflow { degree: deg, max: MAX_LEVEL });
    }
    let hbar = grid.hbar;
    let a = state.a();
    let u = C64::new(0.0, 0.5 * hbar);

    // φ^{(n)}/n! as coefficient lists
    let mut taylor: Vec<Vec<C64>> = Vec::with_capacity(deg + 1);
    let mut cur = state.phi().to_vec();
    let mut fact = 1.0;
    for n in 0..=deg {
        if n > 0 {
            cur = cur.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
            fact *= n as f64;
        }
        taylor.push(cur.iter().map(|c| c / fact).collect());
    }

    let width = hbar * (2.0 * a).sqrt();
    let top = 2 * deg;
    // g_N(p) = ∂_p^N exp(-x²), x = p / width
    let gauss: Vec<Vec<f64>> = (0..grid.p.n)
        .map(|k| {
            let x = grid.p.point(k) / width;
            let e = (-x * x).exp();
            let mut out = Vec::with_capacity(top + 1);
            let (mut hm, mut hc) = (0.0, 1.0);
            let mut scale = 1.0;
            for nn in 0..=top {
                out.push(scale * hc * e);
                let hn = 2.0 * x * hc - 2.0 * nn as f64 * hm;
                hm = hc;
                hc = hn;
                scale *= -1.0 / width;
            }
            out
        })
        .collect();

    let prefactor = 1.0 / (hbar * (2.0 * PI * a).sqrt());
    let rows = par::map_indexed(grid.q.n, |i| {
        let q = grid.q.point(i);
        let vals: Vec<C64> = taylor.iter().map(|c| poly_eval(c, q)).collect();
        let mut d = vec![C64::new(0.0, 0.0); top + 1];
        let mut upow = vec![C64::new(1.0, 0.0); deg + 1];
        for n in 1..=deg {
            upow[n] = upow[n - 1] * u;
        }
        for (nb, vb) in vals.iter().enumerate() {
            let bra = vb.conj() * upow[nb] * if nb % 2 == 0 { 1.0 } else { -1.0 };
            for (nk, vk) in vals.iter().enumerate() {
                d[nb + nk] += bra * vk * upow[nk];
            }
        }
        let env = prefactor * (-2.0 * a * q * q).exp();
        gauss
            .iter()
            .map(|g| d.iter().zip(g).fold(C64::new(0.0, 0.0), |s, (dn, gn)| s + dn * gn) * env)
            .collect::<Vec<_>>()
    });
    let (values, imag_max) = assemble(grid, rows, true)?;
    if imag_max > REALNESS_LIMIT {
        return Err(Error::Realness(imag_max));
    }
    Ok(WignerField {
        values,
        route: Route::Tegmen,
        imag_max,
        leakage: 0.0,
        source: format!("gaussian factor a={a} degree {deg}"),
    })
}

/// How the caller's generating function enters the covariant ket.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum KetConvention {
    /// The caller passes `g` (for instance `pq`). The ket is
    /// `exp(-i g(y/2, p)/ħ) ψ(y/2)` and the connection is built from `g/2`,
    /// which reproduces the correlation integral for `g = pq`.
    #[default]
    Doubled,
    /// The caller passes `f`. The ket is `exp(-i f(y, p)/ħ) ψ(y/2)` and the
    /// connection is built from `f`; the correlation integral is recovered
    /// for `f = pq/2`.
    Literal,
}

/// Samples of `ψ(x0 + s h)` for `s < count`, zero outside the q-interval.
fn lattice_values(line: &SpectralLine, raw: &[C64], axis: &numgrid::AxisSpec, x0: f64, count: usize) -> Vec<C64> {
    let h = axis.spacing();
    let t = (x0 - axis.min) / h;
    let mut m = t.round();
    let mut delta = (t - m) * h;
    if delta.abs() < 1e-12 * h {
        delta = 0.0;
    } else if delta < 0.0 {
        m -= 1.0;
        delta += h;
    }
    let shifted = if delta == 0.0 { raw.to_vec() } else { line.shifted(delta) };
    let m = m as i64;
    (0..count as i64)
        .map(|s| {
            let idx = s + m;
            if (0..axis.n as i64).contains(&idx) {
                shifted[idx as usize]
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect()
}

/// Wigner function from the covariant ket
/// `exp((2iq/ħ) P(y, p)) Ψ(y/2, p)` and the matching bra.
///
/// `P = A_q - iħ∂_y` generates a translation, so the exponential is a shift
/// by `2q` times the phase `exp((i/ħ)[G(y + 2q) - G(y)])` with `G` the
/// y-antiderivative of `A_q`, which is the generating function of the
/// connection itself. The integral runs over `y_j = 2(q_j - c)`, `c` the
/// centre of the q-axis, so every shifted argument is again a lattice point.
pub fn covariant_wigner(
    psi: &Wavefunction,
    f: &GeneratingFunction,
    grid: &PhaseGrid,
    convention: KetConvention,
) -> Result<WignerField> {
    let leakage = check_state(psi, grid)?;
    let hbar = grid.hbar;
    let n = grid.q.n;
    let h = grid.q.spacing();
    let qmin = grid.q.min;
    let c = 0.5 * (grid.q.min + grid.q.max);
    let raw = psi.samples();
    let line = SpectralLine::new(grid.q, &raw)?;
    // ψ(q_i + q_j - c), indexed by s = i + j
    let psi_sum = lattice_values(&line, &raw, &grid.q, 2.0 * qmin - c, 2 * n - 1);
    // conj ψ(c - d h), indexed by d + n - 1 for d = j - i
    let psi_neg: Vec<C64> = lattice_values(&line, &raw, &grid.q, c - (n as f64 - 1.0) * h, 2 * n - 1)
        .into_iter()
        .rev()
        .map(|z| z.conj())
        .collect();

    let expr = f.expr();
    for s in 0..(2 * n - 1) {
        for k in [0, grid.p.n - 1] {
            let y = 2.0 * (2.0 * qmin - c + s as f64 * h);
            expr.try_eval(y, grid.p.point(k))?;
            expr.try_eval(y / 2.0, grid.p.point(k))?;
        }
    }
    let ket_phase = |y: f64, p: f64| match convention {
        KetConvention::Doubled => expr.eval(0.5 * y, p),
        KetConvention::Literal => expr.eval(y, p),
    };
    let antiderivative = |y: f64, p: f64| match convention {
        KetConvention::Doubled => 0.5 * expr.eval(y, p),
        KetConvention::Literal => expr.eval(y, p),
    };

    let weight = 2.0 * h / (2.0 * PI * hbar);
    let rows = par::map_indexed(grid.p.n, |k| {
        let p = grid.p.point(k);
        let ku: Vec<C64> = (0..2 * n - 1)
            .map(|s| {
                let big_y = 2.0 * (2.0 * qmin - c + s as f64 * h);
                let phase = (antiderivative(big_y, p) - ket_phase(big_y, p)) / hbar;
                psi_sum[s] * C64::from_polar(1.0, phase)
            })
            .collect();
        let bb: Vec<C64> = (0..2 * n - 1)
            .map(|dd| {
                let z = 2.0 * ((dd as f64 - (n as f64 - 1.0)) * h - c);
                let phase = (ket_phase(-z, p) + antiderivative(z, p)) / hbar;
                psi_neg[dd] * C64::from_polar(1.0, phase)
            })
            .collect();
        let ey2: Vec<C64> = (0..n)
            .map(|j| {
                let y = 2.0 * (grid.q.point(j) - c);
                C64::from_polar(weight, -2.0 * antiderivative(y, p) / hbar)
            })
            .collect();
        (0..n)
            .map(|i| {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..n {
                    acc += ku[i + j] * bb[j + n - 1 - i] * ey2[j];
                }
                acc
            })
            .collect::<Vec<_>>()
    });
    let (values, imag_max) = assemble(grid, rows, false)?;
    Ok(WignerField {
        values,
        route: Route::Covariant,
        imag_max,
        leakage,
        source: format!("{} with generating function {}", psi.label(), f.text()),
    })
}

/// `(∫ W dp, ∫ W dq)`: position and momentum densities.
pub fn marginals(w: &WignerField) -> Result<(RealField, RealField)> {
    let pos = numgrid::integrate(&w.values, Integration::P)?
        .field()
        .expect("plane integrated over p is a q-line");
    let mom = numgrid::integrate(&w.values, Integration::Q)?
        .field()
        .expect("plane integrated over q is a p-line");
    Ok((pos, mom))
}

/// `|ψ̃(p)|²` on the p-axis of `grid`, with
/// `ψ̃(p) = (2πħ)^{-1/2} ∫ ψ(q) e^{-ipq/ħ} dq`.
pub fn momentum_density(psi: &Wavefunction, grid: &PhaseGrid) -> Result<RealField> {
    if psi.grid().q != grid.q {
        return Err(Error::ShapeMismatch("wavefunction and grid disagree on q".into()));
    }
    let hbar = grid.hbar;
    let h = grid.q.spacing();
    let x: Vec<C64> = psi
        .samples()
        .iter()
        .enumerate()
        .map(|(j, z)| z * C64::from_polar(1.0, -grid.p.min * grid.q.point(j) / hbar))
        .collect();
    let czt = ChirpZ::new(grid.q.n, grid.p.n, grid.p.spacing() * h / hbar);
    let scale = h * h / (2.0 * PI * hbar);
    let out = czt.apply(&x);
    Ok(RealField::from_fn_p(*grid, |p| {
        let k = ((p - grid.p.min) / grid.p.spacing()).round() as usize;
        out[k].norm_sqr() * scale
    }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct NegativityReport {
    pub min: f64,
    pub at: (f64, f64),
    /// `∫ |min(W, 0)| / ∫ |W|`.
    pub negative_fraction: f64,
}

pub fn negativity_report(w: &WignerField) -> NegativityReport {
    let g = w.grid();
    let mut min = f64::INFINITY;
    let mut at = (g.q.point(0), g.p.point(0));
    let (mut neg, mut total) = (0.0, 0.0);
    for ((i, j), &v) in w.values.values().indexed_iter() {
        if v < min {
            min = v;
            at = (g.q.point(i), g.p.point(j));
        }
        total += v.abs();
        if v < 0.0 {
            neg -= v;
        }
    }
    let negative_fraction = if total > 0.0 { neg / total } else { 0.0 };
    NegativityReport { min, at, negative_fraction }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{oscillator_eigenstate, OscillatorParams};

    fn grid() -> PhaseGrid {
        PhaseGrid::square(8.0, 128, 1.0).unwrap()
    }

    fn ground(g: &PhaseGrid) -> Wavefunction {
        oscillator_eigenstate(0, OscillatorParams::unit(), g).unwrap()
    }

    fn max_err(w: &WignerField, f: impl Fn(f64, f64) -> f64) -> f64 {
        let g = w.grid();
        let mut m = 0.0_f64;
        for ((i, j), v) in w.values.values().indexed_iter() {
            m = m.max((v - f(g.q.point(i), g.p.point(j))).abs());
        }
        m
    }

    #[test]
    fn chirp_z_matches_naive_sum() {
        let x: Vec<C64> = (0..13).map(|j| C64::new(j as f64 * 0.3, 1.0 - j as f64 * 0.1)).collect();
        let theta = 0.37;
        let out = ChirpZ::new(13, 7, theta).apply(&x);
        for (k, o) in out.iter().enumerate() {
            let want: C64 = x
                .iter()
                .enumerate()
                .map(|(j, v)| v * C64::from_polar(1.0, -theta * (j * k) as f64))
                .sum();
            assert!((o - want).norm() < 1e-12);
        }
    }

    #[test]
    fn direct_ground_state() {
        let g = grid();
        let w = wigner_direct(&ground(&g), &g).unwrap();
        assert!(max_err(&w, |q, p| (-q * q - p * p).exp() / PI) < 1e-8);
        assert!(w.imag_max < 1e-8);
        assert!((w.total() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn direct_first_excited() {
        let g = grid();
        let psi = oscillator_eigenstate(1, OscillatorParams::unit(), &g).unwrap();
        let w = wigner_direct(&psi, &g).unwrap();
        let e = max_err(&w, |q, p| (2.0 * (q * q + p * p) - 1.0) * (-q * q - p * p).exp() / PI);
        assert!(e < 1e-8, "{e}");
        let r = negativity_report(&w);
        assert!((r.min + 1.0 / PI).abs() < 1e-6);
        assert_eq!(r.at, (0.0, 0.0));
    }

    #[test]
    fn direct_on_offset_momentum_axis() {
        let q = numgrid::AxisSpec::new(-8.0, 8.0, 128).unwrap();
        let p = numgrid::AxisSpec::new(-5.3, 6.1, 57).unwrap();
        let g = PhaseGrid::new(q, p, 1.0).unwrap();
        let w = wigner_direct(&ground(&g), &g).unwrap();
        assert!(max_err(&w, |q, p| (-q * q - p * p).exp() / PI) < 1e-8);
    }

    #[test]
    fn direct_translation() {
        let g = PhaseGrid::square(10.0, 160, 1.0).unwrap();
        let psi = oscillator_eigenstate(2, OscillatorParams::unit(), &g).unwrap();
        let moved = psi.translated(1.0).unwrap();
        let w0 = wigner_direct(&psi, &g).unwrap();
        let w1 = wigner_direct(&moved, &g).unwrap();
        let back = numgrid::shift(&w1.values, numgrid::Axis::Q, 1.0).unwrap();
        // compare away from the wrapped edge
        let mut m = 0.0_f64;
        for ((i, j), v) in back.values().indexed_iter() {
            if (16..144).contains(&i) {
                m = m.max((v - w0.values.values()[[i, j]]).abs());
            }
        }
        assert!(m < 1e-8, "{m}");
    }

    #[test]
    fn tegmen_matches_direct() {
        let g = grid();
        for n in 0..4 {
            let s = GaussianFactorState::oscillator(n, OscillatorParams::unit(), 1.0).unwrap();
            let wt = wigner_tegmen(&s, &g).unwrap();
            let psi = oscillator_eigenstate(n, OscillatorParams::unit(), &g).unwrap();
            let wd = wigner_direct(&psi, &g).unwrap();
            assert!(wt.max_abs_diff(&wd).unwrap() < 1e-8, "{n}");
        }
        let big = GaussianFactorState::new(0.5, vec![C64::from(1.0); 34]).unwrap();
        assert!(matches!(wigner_tegmen(&big, &g), Err(Error::DegreeOverflow { degree: 33, .. })));
    }

    #[test]
    fn tegmen_constant_phi_is_a_gaussian_product() {
        let g = grid();
        let a = 0.8;
        let s = GaussianFactorState::new(a, vec![C64::from(1.0)]).unwrap().normalized();
        let w = wigner_tegmen(&s, &g).unwrap();
        let e = max_err(&w, |q, p| (-2.0 * a * q * q - p * p / (2.0 * a)).exp() / PI);
        assert!(e < 1e-12, "{e}");
    }

    #[test]
    fn covariant_matches_direct() {
        let g = grid();
        let pq = GeneratingFunction::parse("p*q").unwrap();
        for n in 0..3 {
            let psi = oscillator_eigenstate(n, OscillatorParams::unit(), &g).unwrap();
            let wd = wigner_direct(&psi, &g).unwrap();
            let wc = covariant_wigner(&psi, &pq, &g, KetConvention::Doubled).unwrap();
            assert!(wc.max_abs_diff(&wd).unwrap() < 1e-8, "{n}");
            let half = GeneratingFunction::canonical();
            let wl = covariant_wigner(&psi, &half, &g, KetConvention::Literal).unwrap();
            assert!(wl.max_abs_diff(&wd).unwrap() < 1e-8, "{n}");
        }
    }

    #[test]
    fn covariant_zero_generating_function() {
        let g = grid();
        let psi = oscillator_eigenstate(1, OscillatorParams::unit(), &g).unwrap();
        let w = covariant_wigner(&psi, &GeneratingFunction::zero(), &g, KetConvention::Doubled).unwrap();
        // (2πħ)^{-1} ∫ ψ*(q - y/2) ψ(q + y/2) dy, p-independent
        let (nodes, weights) = crate::quadrature::gauss_legendre(200);
        let psi_exact = |x: f64| (2.0f64).sqrt() * x * (-x * x / 2.0).exp() / PI.powf(0.25);
        for i in (0..g.q.n).step_by(9) {
            let q = g.q.point(i);
            let s: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(t, wt)| {
                    let y = 16.0 * t;
                    wt * 16.0 * psi_exact(q - y / 2.0) * psi_exact(q + y / 2.0)
                })
                .sum();
            let want = s / (2.0 * PI);
            for j in [0, 40, 127] {
                assert!((w.values.values()[[i, j]] - want).abs() < 1e-8, "{q}");
            }
        }
    }

    #[test]
    fn marginals_and_momentum_density() {
        let g = PhaseGrid::square(10.0, 160, 1.0).unwrap();
        let psi = gaussian_packet_for_tests(&g);
        let w = wigner_direct(&psi, &g).unwrap();
        let (pos, mom) = marginals(&w).unwrap();
        let dens: Vec<f64> = psi.samples().iter().map(|z| z.norm_sqr()).collect();
        for (a, b) in pos.line().iter().zip(&dens) {
            assert!((a - b).abs() < 1e-7);
        }
        let md = momentum_density(&psi, &g).unwrap();
        for (a, b) in mom.line().iter().zip(md.line()) {
            assert!((a - b).abs() < 1e-7);
        }
        let zero = WignerField { values: RealField::zeros(g, FieldKind::Plane), ..w.clone() };
        let (zp, zm) = marginals(&zero).unwrap();
        assert_eq!(zp.max_abs() + zm.max_abs(), 0.0);
        let r = negativity_report(&zero);
        assert_eq!((r.min, r.negative_fraction), (0.0, 0.0));
    }

    fn gaussian_packet_for_tests(g: &PhaseGrid) -> Wavefunction {
        crate::states::gaussian_packet(0.5, 1.0, 0.8, g).unwrap()
    }
}
