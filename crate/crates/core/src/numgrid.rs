//! Uniform phase-space grids and Fourier spectral calculus on them.
//!
//! Samples along an axis sit at `x_k = min + k * h` with `h = (max - min) / n`;
//! `max` itself is never sampled, so every axis is one period of a periodic
//! lattice. Derivatives and translations act on the trigonometric interpolant
//! of the samples, which makes them exact for band-limited data.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis as NdAxis};
use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

pub const MIN_SAMPLES: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    /// Data on this axis is genuinely periodic; out-of-range lookups wrap
    /// instead of being treated as zero.
    #[serde(default)]
    pub periodic: bool,
}

impl AxisSpec {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        let spec = Self { min, max, n, periodic: false };
        spec.validate()?;
        Ok(spec)
    }

    pub fn periodic(min: f64, max: f64, n: usize) -> Result<Self> {
        let spec = Self { min, max, n, periodic: true };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "bounds must be finite, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.max <= self.min {
            return Err(Error::InvalidSpec(format!(
                "max ({}) must exceed min ({})",
                self.max, self.min
            )));
        }
        if self.n < MIN_SAMPLES {
            return Err(Error::InvalidSpec(format!(
                "n = {} is below the minimum of {MIN_SAMPLES} samples",
                self.n
            )));
        }
        if self.spacing() <= 0.0 {
            return Err(Error::InvalidSpec("spacing underflows to zero".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.max - self.min
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / self.n as f64
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.min + k as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.point(k)).collect()
    }

    /// Angular wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n as isize;
        let base = 2.0 * PI / self.length();
        (0..n)
            .map(|m| {
                let signed = if m < (n + 1) / 2 { m } else { m - n };
                base * signed as f64
            })
            .collect()
    }

    /// Index of the unpaired Nyquist mode, present only for even `n`.
    fn nyquist(&self) -> Option<usize> {
        (self.n % 2 == 0).then_some(self.n / 2)
    }

    /// True if `x` lies in `[min, max)`.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.min && x < self.max
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub q: AxisSpec,
    pub p: AxisSpec,
    pub hbar: f64,
}

pub fn make_grid(q: AxisSpec, p: AxisSpec, hbar: f64) -> Result<PhaseGrid> {
    PhaseGrid::new(q, p, hbar)
}

impl PhaseGrid {
    pub fn new(q: AxisSpec, p: AxisSpec, hbar: f64) -> Result<Self> {
        q.validate()?;
        p.validate()?;
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidSpec(format!("hbar must be positive, got {hbar}")));
        }
        Ok(Self { q, p, hbar })
    }

    /// Square grid `[-half_width, half_width)^2` with `n` samples per axis.
    pub fn square(half_width: f64, n: usize, hbar: f64) -> Result<Self> {
        let axis = AxisSpec::new(-half_width, half_width, n)?;
        Self::new(axis, axis, hbar)
    }

    pub fn axis(&self, axis: Axis) -> &AxisSpec {
        match axis {
            Axis::Q => &self.q,
            Axis::P => &self.p,
        }
    }

    /// Area element `h_q * h_p`.
    pub fn cell_area(&self) -> f64 {
        self.q.spacing() * self.p.spacing()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    Q,
    P,
}

impl Axis {
    fn nd(self) -> NdAxis {
        match self {
            Axis::Q => NdAxis(0),
            Axis::P => NdAxis(1),
        }
    }
}

/// Which grid axes a field spans. Line fields keep a unit-length second
/// dimension so every field is stored as a `(n_q | 1, n_p | 1)` array.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    QLine,
    PLine,
    Plane,
}

impl FieldKind {
    pub fn has_axis(self, axis: Axis) -> bool {
        matches!(
            (self, axis),
            (FieldKind::Plane, _) | (FieldKind::QLine, Axis::Q) | (FieldKind::PLine, Axis::P)
        )
    }

    fn shape(self, grid: &PhaseGrid) -> (usize, usize) {
        match self {
            FieldKind::QLine => (grid.q.n, 1),
            FieldKind::PLine => (1, grid.p.n),
            FieldKind::Plane => (grid.q.n, grid.p.n),
        }
    }
}

/// Sample type of a field: real or complex doubles.
pub trait Scalar: Copy + Default + Send + Sync + std::fmt::Debug + 'static {
    fn to_complex(self) -> C64;
    fn from_complex(z: C64) -> Self;
    fn magnitude(self) -> f64;
    fn is_finite_value(self) -> bool;
    fn add(self, other: Self) -> Self;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn to_complex(self) -> C64 {
        C64::new(self, 0.0)
    }
    #[inline]
    fn from_complex(z: C64) -> Self {
        z.re
    }
    #[inline]
    fn magnitude(self) -> f64 {
        self.abs()
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }
    #[inline]
    fn add(self, other: Self) -> Self {
        self + other
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for C64 {
    #[inline]
    fn to_complex(self) -> C64 {
        self
    }
    #[inline]
    fn from_complex(z: C64) -> Self {
        z
    }
    #[inline]
    fn magnitude(self) -> f64 {
        self.norm()
    }
    #[inline]
    fn is_finite_value(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    #[inline]
    fn add(self, other: Self) -> Self {
        self + other
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Field<T: Scalar> {
    grid: PhaseGrid,
    kind: FieldKind,
    values: Array2<T>,
}

pub type RealField = Field<f64>;
pub type ComplexField = Field<C64>;

impl<T: Scalar> Field<T> {
    pub fn from_array(grid: PhaseGrid, kind: FieldKind, values: Array2<T>) -> Result<Self> {
        let want = kind.shape(&grid);
        if values.dim() != want {
            return Err(Error::ShapeMismatch(format!(
                "{kind:?} field on this grid must be {want:?}, got {:?}",
                values.dim()
            )));
        }
        Ok(Self { grid, kind, values: values.as_standard_layout().into_owned() })
    }

    pub fn zeros(grid: PhaseGrid, kind: FieldKind) -> Self {
        let values = Array2::from_elem(kind.shape(&grid), T::default());
        Self { grid, kind, values }
    }

    pub fn from_fn_q(grid: PhaseGrid, f: impl Fn(f64) -> T) -> Self {
        let values = Array2::from_shape_fn((grid.q.n, 1), |(i, _)| f(grid.q.point(i)));
        Self { grid, kind: FieldKind::QLine, values }
    }

    pub fn from_fn_p(grid: PhaseGrid, f: impl Fn(f64) -> T) -> Self {
        let values = Array2::from_shape_fn((1, grid.p.n), |(_, j)| f(grid.p.point(j)));
        Self { grid, kind: FieldKind::PLine, values }
    }

    pub fn from_fn(grid: PhaseGrid, f: impl Fn(f64, f64) -> T) -> Self {
        let values = Array2::from_shape_fn((grid.q.n, grid.p.n), |(i, j)| {
            f(grid.q.point(i), grid.p.point(j))
        });
        Self { grid, kind: FieldKind::Plane, values }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn values(&self) -> &Array2<T> {
        &self.values
    }

    pub fn into_values(self) -> Array2<T> {
        self.values
    }

    /// Samples of a line field in axis order.
    pub fn line(&self) -> Vec<T> {
        self.values.iter().copied().collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Field<U> {
        Field { grid: self.grid, kind: self.kind, values: self.values.mapv(f) }
    }

    /// Pointwise combination of two fields of identical shape.
    pub fn zip_with<U: Scalar, V: Scalar>(
        &self,
        other: &Field<U>,
        f: impl Fn(T, U) -> V,
    ) -> Result<Field<V>> {
        self.check_same_shape(other)?;
        let mut values = Array2::from_elem(self.values.dim(), V::default());
        ndarray::Zip::from(&mut values)
            .and(&self.values)
            .and(&other.values)
            .for_each(|o, &a, &b| *o = f(a, b));
        Ok(Field { grid: self.grid, kind: self.kind, values })
    }

    pub fn check_same_shape<U: Scalar>(&self, other: &Field<U>) -> Result<()> {
        if self.kind != other.kind || self.values.dim() != other.values.dim() {
            return Err(Error::ShapeMismatch(format!(
                "{:?} {:?} vs {:?} {:?}",
                self.kind,
                self.values.dim(),
                other.kind,
                other.values.dim()
            )));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.magnitude()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite_value())
    }

    /// Largest magnitude on the outermost samples of every axis the field
    /// spans: the boundary-leakage diagnostic.
    pub fn boundary_magnitude(&self) -> f64 {
        let (nq, np) = self.values.dim();
        let mut edge = 0.0_f64;
        if self.kind.has_axis(Axis::Q) {
            for j in 0..np {
                edge = edge.max(self.values[[0, j]].magnitude());
                edge = edge.max(self.values[[nq - 1, j]].magnitude());
            }
        }
        if self.kind.has_axis(Axis::P) {
            for i in 0..nq {
                edge = edge.max(self.values[[i, 0]].magnitude());
                edge = edge.max(self.values[[i, np - 1]].magnitude());
            }
        }
        edge
    }

    /// Boundary magnitude relative to the peak (zero for the zero field).
    pub fn relative_leakage(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            0.0
        } else {
            self.boundary_magnitude() / peak
        }
    }

    /// Replicates a q-line across every p sample.
    pub fn broadcast_plane(&self) -> Result<Self> {
        let (nq, np) = (self.grid.q.n, self.grid.p.n);
        let values = match self.kind {
            FieldKind::Plane => return Ok(self.clone()),
            FieldKind::QLine => Array2::from_shape_fn((nq, np), |(i, _)| self.values[[i, 0]]),
            FieldKind::PLine => Array2::from_shape_fn((nq, np), |(_, j)| self.values[[0, j]]),
        };
        Ok(Field { grid: self.grid, kind: FieldKind::Plane, values })
    }

    fn require_axis(&self, axis: Axis) -> Result<()> {
        if self.kind.has_axis(axis) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("{:?} field has no {axis:?} axis", self.kind)))
        }
    }
}

impl RealField {
    pub fn to_complex(&self) -> ComplexField {
        self.map(C64::from)
    }
}

impl ComplexField {
    pub fn re(&self) -> RealField {
        self.map(|z| z.re)
    }

    pub fn im(&self) -> RealField {
        self.map(|z| z.im)
    }

    pub fn abs(&self) -> RealField {
        self.map(|z| z.norm())
    }
}

/// Forward spectrum of one line of samples, reusable for many spectral
/// multipliers (derivatives, shifts) without recomputing the FFT.
pub struct SpectralLine {
    axis: AxisSpec,
    spectrum: Vec<C64>,
    inverse: Arc<dyn Fft<f64>>,
}

impl SpectralLine {
    pub fn new(axis: AxisSpec, samples: &[C64]) -> Result<Self> {
        if samples.len() != axis.n {
            return Err(Error::ShapeMismatch(format!(
                "line has {} samples, axis has {}",
                samples.len(),
                axis.n
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(axis.n);
        let inverse = planner.plan_fft_inverse(axis.n);
        let mut spectrum = samples.to_vec();
        forward.process(&mut spectrum);
        Ok(Self { axis, spectrum, inverse })
    }

    /// Band-limited translation: samples of `f(x + amount)`.
    pub fn shifted(&self, amount: f64) -> Vec<C64> {
        let mult = shift_multiplier(&self.axis, amount);
        self.apply(&mult)
    }

    pub fn apply(&self, multiplier: &[C64]) -> Vec<C64> {
        let scale = 1.0 / self.axis.n as f64;
        let mut buf: Vec<C64> = self
            .spectrum
            .iter()
            .zip(multiplier)
            .map(|(s, m)| s * m * scale)
            .collect();
        self.inverse.process(&mut buf);
        buf
    }
}

fn derivative_multiplier(axis: &AxisSpec) -> Vec<C64> {
    let mut m: Vec<C64> = axis.wavenumbers().into_iter().map(|k| C64::new(0.0, k)).collect();
    if let Some(ny) = axis.nyquist() {
        // the sine component at Nyquist is invisible to the samples
        m[ny] = C64::new(0.0, 0.0);
    }
    m
}

fn second_derivative_multiplier(axis: &AxisSpec) -> Vec<C64> {
    let mut m: Vec<C64> = axis.wavenumbers().into_iter().map(|k| C64::new(-k * k, 0.0)).collect();
    if let Some(ny) = axis.nyquist() {
        let k = PI / axis.spacing();
        m[ny] = C64::new(-k * k, 0.0);
    }
    m
}

fn shift_multiplier(axis: &AxisSpec, amount: f64) -> Vec<C64> {
    let mut m: Vec<C64> = axis
        .wavenumbers()
        .into_iter()
        .map(|k| C64::from_polar(1.0, k * amount))
        .collect();
    if let Some(ny) = axis.nyquist() {
        let k = PI / axis.spacing();
        m[ny] = C64::new((k * amount).cos(), 0.0);
    }
    m
}

/// Runs a spectral multiplier along `axis` of every lane of `field`.
fn apply_along<T: Scalar>(field: &Field<T>, axis: Axis, multiplier: &[C64]) -> Result<Field<T>> {
    field.require_axis(axis)?;
    let spec = *field.grid.axis(axis);
    let n = spec.n;
    let transposed = axis == Axis::Q;
    let lanes: Array2<C64> = if transposed {
        field.values.t().mapv(T::to_complex)
    } else {
        field.values.mapv(T::to_complex)
    };
    let mut lanes = lanes.as_standard_layout().into_owned();
    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;
    let data = lanes.as_slice_mut().expect("standard layout");
    par::for_each_chunk_mut(data, n, |_, lane| {
        forward.process(lane);
        for (z, m) in lane.iter_mut().zip(multiplier) {
            *z *= m * scale;
        }
        inverse.process(lane);
    });
    let values = if transposed {
        lanes.t().mapv(T::from_complex)
    } else {
        lanes.mapv(T::from_complex)
    };
    Field::from_array(field.grid, field.kind, values)
}

/// Spectral first derivative along `axis`.
pub fn derivative<T: Scalar>(field: &Field<T>, axis: Axis) -> Result<Field<T>> {
    let m = derivative_multiplier(field.grid.axis(axis));
    apply_along(field, axis, &m)
}

pub fn second_derivative<T: Scalar>(field: &Field<T>, axis: Axis) -> Result<Field<T>> {
    let m = second_derivative_multiplier(field.grid.axis(axis));
    apply_along(field, axis, &m)
}

/// Band-limited translation `f(x) -> f(x + amount)` along `axis`.
pub fn shift<T: Scalar>(field: &Field<T>, axis: Axis, amount: f64) -> Result<Field<T>> {
    let m = shift_multiplier(field.grid.axis(axis), amount);
    apply_along(field, axis, &m)
}

/// Samples of `f(-x)` along `axis`. Points whose mirror image falls outside
/// the sampled interval read as zero unless the axis is periodic.
pub fn reflect<T: Scalar>(field: &Field<T>, axis: Axis) -> Result<Field<T>> {
    field.require_axis(axis)?;
    let spec = *field.grid.axis(axis);
    let h = spec.spacing();
    // -x_j = x_{m - j} + delta
    let m = (-2.0 * spec.min / h).round();
    let delta = -2.0 * spec.min - m * h;
    let m = m as i64;
    let shifted = if delta.abs() > 0.0 { shift(field, axis, delta)? } else { field.clone() };
    let n = spec.n as i64;
    let mut values = field.values.clone();
    let nd = axis.nd();
    for (j, mut lane) in values.axis_iter_mut(nd).enumerate() {
        let src = m - j as i64;
        let idx = if spec.periodic {
            Some(src.rem_euclid(n) as usize)
        } else if (0..n).contains(&src) {
            Some(src as usize)
        } else {
            None
        };
        match idx {
            Some(k) => lane.assign(&shifted.values.index_axis(nd, k)),
            None => lane.fill(T::default()),
        }
    }
    Ok(Field { grid: field.grid, kind: field.kind, values })
}

/// Quadrature target for [`integrate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integration {
    Q,
    P,
    Both,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Integral<T: Scalar> {
    Field(Field<T>),
    Scalar(T),
}

impl<T: Scalar> Integral<T> {
    pub fn scalar(self) -> Option<T> {
        match self {
            Integral::Scalar(s) => Some(s),
            Integral::Field(_) => None,
        }
    }

    pub fn field(self) -> Option<Field<T>> {
        match self {
            Integral::Field(f) => Some(f),
            Integral::Scalar(_) => None,
        }
    }
}

/// Rectangle-rule quadrature on the uniform grid.
pub fn integrate<T: Scalar>(field: &Field<T>, over: Integration) -> Result<Integral<T>> {
    let g = field.grid;
    let sum_axis = |f: &Field<T>, axis: Axis| -> Result<Array2<T>> {
        f.require_axis(axis)?;
        let h = g.axis(axis).spacing();
        let reduced = f
            .values
            .map_axis(axis.nd(), |lane| lane.iter().fold(T::default(), |a, &v| a.add(v)).scale(h));
        Ok(reduced.insert_axis(axis.nd()))
    };
    match (field.kind, over) {
        (FieldKind::Plane, Integration::Q) => {
            let v = sum_axis(field, Axis::Q)?;
            Ok(Integral::Field(Field::from_array(g, FieldKind::PLine, v)?))
        }
        (FieldKind::Plane, Integration::P) => {
            let v = sum_axis(field, Axis::P)?;
            Ok(Integral::Field(Field::from_array(g, FieldKind::QLine, v)?))
        }
        (FieldKind::Plane, Integration::Both) => {
            let v = sum_axis(field, Axis::P)?;
            let line = Field::from_array(g, FieldKind::QLine, v)?;
            Ok(Integral::Scalar(sum_axis(&line, Axis::Q)?[[0, 0]]))
        }
        (FieldKind::QLine, Integration::Q) | (FieldKind::QLine, Integration::Both) => {
            Ok(Integral::Scalar(sum_axis(field, Axis::Q)?[[0, 0]]))
        }
        (FieldKind::PLine, Integration::P) | (FieldKind::PLine, Integration::Both) => {
            Ok(Integral::Scalar(sum_axis(field, Axis::P)?[[0, 0]]))
        }
        (kind, over) => Err(Error::ShapeMismatch(format!("cannot integrate {kind:?} over {over:?}"))),
    }
}

/// `∫|f|^2` over every axis the field spans.
pub fn norm_squared<T: Scalar>(field: &Field<T>) -> f64 {
    let w = field.map(|v| v.magnitude().powi(2));
    integrate(&w, Integration::Both)
        .ok()
        .and_then(Integral::scalar)
        .unwrap_or(0.0)
}

/// Discrete inner product `Σ conj(a) b * dA` over the field's axes.
pub fn inner_product(a: &ComplexField, b: &ComplexField) -> Result<C64> {
    a.check_same_shape(b)?;
    let g = a.grid;
    let mut weight = 1.0;
    if a.kind.has_axis(Axis::Q) {
        weight *= g.q.spacing();
    }
    if a.kind.has_axis(Axis::P) {
        weight *= g.p.spacing();
    }
    let s = a
        .values
        .iter()
        .zip(b.values.iter())
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y);
    Ok(s * weight)
}
