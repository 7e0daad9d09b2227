//! Seeded random inputs for the randomized checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use phasewig_core::numgrid::{ComplexField, PhaseGrid};
use phasewig_core::states::{GaussianFactorState, PhaseState};
use phasewig_core::symcalc::GeneratingFunction;
use phasewig_core::{Result, C64};

pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Sum of three modulated Gaussian bumps, centred within `|c| ≤ 3` and
/// narrow enough to vanish at the edge of a `[-12, 12]²` grid.
pub fn band_limited_field(rng: &mut ChaCha8Rng, grid: &PhaseGrid) -> Result<PhaseState> {
    let bumps: Vec<[f64; 7]> = (0..3)
        .map(|_| {
            [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(0.6..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            ]
        })
        .collect();
    let field = ComplexField::from_fn(*grid, |q, p| {
        bumps.iter().fold(C64::new(0.0, 0.0), |acc, b| {
            let r2 = ((q - b[0]).powi(2) + (p - b[1]).powi(2)) / (2.0 * b[2] * b[2]);
            acc + C64::new(b[3], b[4]) * C64::from_polar((-r2).exp(), b[5] * q + b[6] * p)
        })
    });
    PhaseState::from_samples(field)
}

/// `pq/2` plus smooth bounded perturbations with random coefficients.
pub fn smooth_generating_function(rng: &mut ChaCha8Rng) -> GeneratingFunction {
    let c: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let k: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..1.5)).collect();
    let w: f64 = rng.gen_range(4.0..10.0);
    let text = format!(
        "p*q/2 + {:.4}*sin({:.4}*q)*cos({:.4}*p) + {:.4}*tanh({:.4}*q)*p + {:.4}*exp(-(q^2 + p^2)/{:.4})",
        c[0], k[0], k[1], c[1], k[2], c[2], w
    );
    GeneratingFunction::parse(&text).expect("template always parses")
}

/// Random `e^{-aq²} φ(q)` with `φ` of the given degree, normalised.
pub fn gaussian_factor_state(rng: &mut ChaCha8Rng, degree: usize) -> GaussianFactorState {
    let a = rng.gen_range(0.4..1.0);
    let phi = (0..=degree)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    GaussianFactorState::new(a, phi).expect("positive a, nonzero φ").normalized()
}

/// A polyline of `segments` random segments from `start` to `end`, staying
/// inside `|q|, |p| ≤ bound`.
pub fn polyline(rng: &mut ChaCha8Rng, start: (f64, f64), end: (f64, f64), segments: usize, bound: f64) -> Vec<(f64, f64)> {
    let mut v = vec![start];
    for _ in 1..segments {
        v.push((rng.gen_range(-bound..bound), rng.gen_range(-bound..bound)));
    }
    v.push(end);
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible() {
        let a = smooth_generating_function(&mut rng(7, 1));
        let b = smooth_generating_function(&mut rng(7, 1));
        let c = smooth_generating_function(&mut rng(7, 2));
        assert_eq!(a.text(), b.text());
        assert_ne!(a.text(), c.text());
    }

    #[test]
    fn random_fields_vanish_at_the_edge() {
        let g = PhaseGrid::square(12.0, 64, 1.0).unwrap();
        let mut r = rng(1, 0);
        for _ in 0..5 {
            let f = band_limited_field(&mut r, &g).unwrap();
            assert!(f.envelope().relative_leakage() < 1e-12);
        }
    }
}
