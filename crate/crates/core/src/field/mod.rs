//! Periodic-torus discretization of the plane.
//!
//! The domain is the square `[-l/2, l/2)^2` sampled at `n x n` points with
//! spacing `h = l/n`. Values are stored row-major with the `x2` index varying
//! fastest, so sample `(i1, i2)` lives at `i1 * n + i2` and sits at
//! `x = (-l/2 + i1 h, -l/2 + i2 h)`.
//!
//! Fourier convention: the forward transform is the unnormalized DFT
//! `F(k) = sum_j f(x_j) exp(-i k.j 2 pi / n)` and the inverse divides by
//! `n^2`. With this normalization Parseval reads
//! `||f||_{L^2}^2 = (l^2 / n^4) * sum_k |F(k)|^2`, and a single mode
//! `A exp(i xi.x)` carries the coefficient `A n^2` (up to the phase of the
//! grid origin).

mod fft;
mod multiplier;
mod ops;
mod snapshot;

pub use multiplier::{multiplier_apply, Axis, MultiplierSpec};
pub use ops::{
    dealias_mask, divergence, divergence_spectral, gradient, gradient_spectral, pointwise_product,
    product_spectral, truncate,
};
pub use snapshot::{
    read_snapshot, read_snapshot_sequence, write_snapshot, write_snapshot_sequence,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{KsError, Result};

/// Square periodic grid with `n` points per side and side length `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    n: usize,
    l: f64,
}

impl Grid2D {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(KsError::InvalidGrid(format!(
                "n = {n} must be a power of two and at least 16"
            )));
        }
        if !(l > 0.0) || !l.is_finite() {
            return Err(KsError::InvalidGrid(format!(
                "side length l = {l} must be positive"
            )));
        }
        Ok(Self { n, l })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn h(&self) -> f64 {
        self.l / self.n as f64
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    /// Signed integer frequency of FFT index `idx`, in `-n/2 .. n/2 - 1`.
    pub fn freq_index(&self, idx: usize) -> i64 {
        let n = self.n as i64;
        let k = idx as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    /// Angular wavenumber `2 pi k / l` of FFT index `idx`.
    pub fn wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * self.freq_index(idx) as f64 / self.l
    }

    /// All per-axis wavenumbers in FFT index order.
    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.wavenumber(i)).collect()
    }

    /// True for the unpaired `-n/2` frequency on one axis.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n / 2
    }

    pub fn coord(&self, idx: usize) -> f64 {
        -0.5 * self.l + idx as f64 * self.h()
    }

    /// `|xi|^2` for every mode, in storage order.
    pub fn xi_squared(&self) -> Vec<f64> {
        let k = self.wavenumbers();
        let mut out = Vec::with_capacity(self.len());
        for k1 in &k {
            for k2 in &k {
                out.push(k1 * k1 + k2 * k2);
            }
        }
        out
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    pub(crate) fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self != other {
            return Err(KsError::ShapeMismatch(format!(
                "grid (n={}, l={}) vs (n={}, l={})",
                self.n, self.l, other.n, other.l
            )));
        }
        Ok(())
    }
}

/// Real samples of a field on a [`Grid2D`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(KsError::ShapeMismatch(format!(
                "{} values for an n = {} grid",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(KsError::InvalidArgument(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid2D, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at the grid points.
    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut values = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let x1 = grid.coord(i1);
            for i2 in 0..n {
                values.push(f(x1, grid.coord(i2)));
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.grid.n() + i2]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Integral over the torus, `h^2 * sum f`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &ScalarField) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    /// `a * self + b * other`.
    pub fn lin_comb(&self, a: f64, other: &ScalarField, b: f64) -> Result<Self> {
        self.grid.check_same(&other.grid)?;
        Ok(self.zip_with(other, |x, y| a * x + b * y))
    }

    fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| f(*a, *b))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    /// Periodic shift by whole cells.
    pub fn shifted(&self, d1: usize, d2: usize) -> Self {
        let n = self.grid.n();
        let mut values = vec![0.0; self.grid.len()];
        for i1 in 0..n {
            for i2 in 0..n {
                values[((i1 + d1) % n) * n + (i2 + d2) % n] = self.values[i1 * n + i2];
            }
        }
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn to_spectral(&self) -> SpectralField {
        let mut coeffs: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft::forward_2d(self.grid.n(), &mut coeffs);
        SpectralField {
            grid: self.grid,
            coeffs,
        }
    }
}

/// Fourier coefficients of a field on a [`Grid2D`], in FFT index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid2D,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: Grid2D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(KsError::ShapeMismatch(format!(
                "{} coefficients for an n = {} grid",
                coeffs.len(),
                grid.n()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, i1: usize, i2: usize) -> Complex64 {
        self.coeffs[i1 * self.grid.n() + i2]
    }

    /// Largest deviation from `F(-k) = conj(F(k))`, relative to the largest
    /// coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for i1 in 0..n {
            for i2 in 0..n {
                let j1 = (n - i1) % n;
                let j2 = (n - i2) % n;
                let d = (self.coeff(i1, i2) - self.coeff(j1, j2).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    /// Inverse transform; the imaginary part is discarded, which is the
    /// projection onto Hermitian-symmetric spectra.
    pub fn to_real(&self) -> ScalarField {
        let mut buf = self.coeffs.clone();
        fft::inverse_2d(self.grid.n(), &mut buf);
        let values = buf.into_iter().map(|c| c.re).collect();
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    pub fn map_modes(&mut self, mut f: impl FnMut(usize, Complex64) -> Complex64) {
        for (i, c) in self.coeffs.iter_mut().enumerate() {
            *c = f(i, *c);
        }
    }

    /// `(l^2 / n^4) * sum |F|^2`, the squared L^2 norm of the represented field.
    pub fn parseval_l2_squared(&self) -> f64 {
        let n4 = (self.grid.len() as f64).powi(2);
        let l2 = self.grid.l() * self.grid.l();
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * l2 / n4
    }
}

/// Forward transform (`to_spectral`).
pub fn to_spectral(f: &ScalarField) -> SpectralField {
    f.to_spectral()
}

/// Inverse transform (`from_spectral`).
pub fn from_spectral(f: &SpectralField) -> ScalarField {
    f.to_real()
}
