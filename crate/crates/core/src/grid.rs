//! Periodic grid, sampled fields, and the spectral primitives built on them.
//!
//! The box is `[-L/2, L/2)` sampled at `n` equispaced nodes. Spectra follow the
//! usual FFT layout: mode index `m` runs `0..n/2-1` then `-n/2..-1`, with
//! wavenumber `k_m = 2*pi*m / L`. Odd-order symbols zero the Nyquist mode so
//! that real fields stay real.

use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{KdvError, Result};

/// Shared handle to a grid; fields hold one of these.
pub type Grid = Arc<GridSpec>;

/// An equispaced periodic grid together with its FFT plans.
pub struct GridSpec {
    box_length: f64,
    n: usize,
    dx: f64,
    nodes: Vec<f64>,
    wavenumbers: Vec<f64>,
    /// `true` where `|m| <= n/3`; the two-thirds rule keeps these modes.
    band: Vec<bool>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GridSpec")
            .field("box_length", &self.box_length)
            .field("n", &self.n)
            .field("dx", &self.dx)
            .finish()
    }
}

impl PartialEq for GridSpec {
    fn eq(&self, other: &Self) -> bool {
        self.box_length == other.box_length && self.n == other.n
    }
}

/// Builds a grid over `[-box_length/2, box_length/2)` with `n` nodes.
///
/// `n` must be even and at least 16 so the dealias band is nonempty.
pub fn make_grid(box_length: f64, n: usize) -> Result<Grid> {
    if !(box_length.is_finite() && box_length > 0.0) {
        return Err(KdvError::InvalidParameter(format!(
            "box_length must be positive and finite, got {box_length}"
        )));
    }
    if n < 16 || !n.is_multiple_of(2) {
        return Err(KdvError::InvalidParameter(format!(
            "n must be even and >= 16, got {n}"
        )));
    }
    let dx = box_length / n as f64;
    let nodes = (0..n).map(|j| -0.5 * box_length + j as f64 * dx).collect();
    let wavenumbers: Vec<f64> = (0..n)
        .map(|j| {
            let m = if j < n / 2 {
                j as i64
            } else {
                j as i64 - n as i64
            };
            2.0 * std::f64::consts::PI * m as f64 / box_length
        })
        .collect();
    let band = (0..n)
        .map(|j| {
            let m = if j < n / 2 {
                j as i64
            } else {
                j as i64 - n as i64
            };
            (m.unsigned_abs() as f64) <= n as f64 / 3.0
        })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    Ok(Arc::new(GridSpec {
        box_length,
        n,
        dx,
        nodes,
        wavenumbers,
        band,
        fwd,
        inv,
    }))
}

impl GridSpec {
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Node positions `x_j = -L/2 + j*dx`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Dealias keep-mask in FFT order (`|m| <= n/3`).
    pub fn dealias_mask(&self) -> &[bool] {
        &self.band
    }

    /// Forward transform of real samples (unnormalized).
    pub fn to_spectrum(&self, samples: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(samples.len(), self.n);
        let mut buf: Vec<Complex64> = samples.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    /// Inverse transform back to real samples; drops the O(eps) imaginary residue.
    pub fn to_samples(&self, spectrum: &[Complex64]) -> Vec<f64> {
        let scale = 1.0 / self.n as f64;
        self.inverse_complex(spectrum)
            .into_iter()
            .map(|z| z.re * scale)
            .collect()
    }

    pub(crate) fn inverse_complex(&self, spectrum: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(spectrum.len(), self.n);
        let mut buf = spectrum.to_vec();
        self.inv.process(&mut buf);
        buf
    }
}

pub(crate) fn same_grid(a: &Grid, b: &Grid, what: &str) -> Result<()> {
    if a.as_ref() == b.as_ref() {
        Ok(())
    } else {
        Err(KdvError::GridMismatch(format!(
            "{what}: ({}, n={}) vs ({}, n={})",
            a.box_length, a.n, b.box_length, b.n
        )))
    }
}

/// Real samples of a function on a grid, tagged with the time they represent.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    samples: Vec<f64>,
    time_tag: f64,
}

/// Integral quantities of a single field, all by the grid's exact quadrature
/// `dx * sum` (trapezoid on a periodic grid).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct FieldNorms {
    /// `integral u^2`
    pub l2_sq: f64,
    /// `integral (u^2 + u_x^2)`
    pub h1_sq: f64,
    /// `integral u^3` (signed)
    pub int_u3: f64,
    /// `integral |u|^3`
    pub l3_cubed: f64,
    /// `max_j |u(x_j)|`
    pub linf: f64,
}

impl Field {
    /// Wraps samples on a grid. Errors on length mismatch or non-finite entries.
    pub fn new(grid: &Grid, samples: Vec<f64>, time_tag: f64) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(KdvError::InvalidParameter(format!(
                "sample count {} does not match grid n = {}",
                samples.len(),
                grid.n
            )));
        }
        if !samples.iter().all(|s| s.is_finite()) {
            return Err(KdvError::InvalidParameter(
                "field samples must be finite".into(),
            ));
        }
        Ok(Self {
            grid: grid.clone(),
            samples,
            time_tag,
        })
    }

    pub(crate) fn from_samples_unchecked(grid: &Grid, samples: Vec<f64>, time_tag: f64) -> Self {
        debug_assert_eq!(samples.len(), grid.n);
        Self {
            grid: grid.clone(),
            samples,
            time_tag,
        }
    }

    /// The zero field.
    pub fn zero(grid: &Grid, time_tag: f64) -> Self {
        Self::from_samples_unchecked(grid, vec![0.0; grid.n], time_tag)
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(grid: &Grid, time_tag: f64, f: impl Fn(f64) -> f64) -> Self {
        let samples = grid.nodes.iter().map(|&x| f(x)).collect();
        Self::from_samples_unchecked(grid, samples, time_tag)
    }

    /// Synthesizes a field from FFT-ordered coefficients (unnormalized convention).
    pub fn from_spectrum(grid: &Grid, spectrum: &[Complex64], time_tag: f64) -> Result<Self> {
        if spectrum.len() != grid.n {
            return Err(KdvError::InvalidParameter(format!(
                "spectrum length {} does not match grid n = {}",
                spectrum.len(),
                grid.n
            )));
        }
        Field::new(grid, grid.to_samples(spectrum), time_tag)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn time_tag(&self) -> f64 {
        self.time_tag
    }

    pub fn with_time_tag(mut self, time_tag: f64) -> Self {
        self.time_tag = time_tag;
        self
    }

    /// FFT of the samples, FFT-ordered, unnormalized.
    pub fn spectrum(&self) -> Vec<Complex64> {
        self.grid.to_spectrum(&self.samples)
    }

    /// Spectral derivative of the given order (1, 2, or 3).
    ///
    /// Multiplies by `(ik)^order`; for odd orders the Nyquist mode is zeroed
    /// (its symbol has no real representative).
    pub fn derivative(&self, order: u32) -> Result<Field> {
        if !(1..=3).contains(&order) {
            return Err(KdvError::InvalidParameter(format!(
                "derivative order must be 1, 2, or 3, got {order}"
            )));
        }
        let mut spec = self.spectrum();
        for (c, &k) in spec.iter_mut().zip(&self.grid.wavenumbers) {
            let ik = Complex64::new(0.0, k);
            *c *= ik.powu(order);
        }
        if order % 2 == 1 {
            spec[self.grid.n / 2] = Complex64::new(0.0, 0.0);
        }
        Ok(Field::from_samples_unchecked(
            &self.grid,
            self.grid.to_samples(&spec),
            self.time_tag,
        ))
    }

    /// Two-thirds dealias projection: zeroes every mode with `|m| > n/3`.
    pub fn dealiased(&self) -> Field {
        let mut spec = self.spectrum();
        for (c, &keep) in spec.iter_mut().zip(&self.grid.band) {
            if !keep {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        Field::from_samples_unchecked(&self.grid, self.grid.to_samples(&spec), self.time_tag)
    }

    /// All integral norms in one pass (one FFT pair for the derivative).
    pub fn norms(&self) -> FieldNorms {
        let dx = self.grid.dx;
        let mut l2 = 0.0;
        let mut u3 = 0.0;
        let mut abs3 = 0.0;
        let mut linf: f64 = 0.0;
        for &u in &self.samples {
            let u2 = u * u;
            l2 += u2;
            u3 += u2 * u;
            abs3 += u2 * u.abs();
            linf = linf.max(u.abs());
        }
        let ux = self.derivative(1).expect("order 1 is always valid");
        let grad_sq: f64 = ux.samples.iter().map(|&v| v * v).sum();
        FieldNorms {
            l2_sq: dx * l2,
            h1_sq: dx * (l2 + grad_sq),
            int_u3: dx * u3,
            l3_cubed: dx * abs3,
            linf,
        }
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field {
            grid: self.grid.clone(),
            samples: self.samples.iter().map(|&v| s * v).collect(),
            time_tag: self.time_tag,
        }
    }

    pub fn add(&self, rhs: &Field) -> Result<Field> {
        same_grid(&self.grid, &rhs.grid, "add")?;
        let samples = self
            .samples
            .iter()
            .zip(&rhs.samples)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            samples,
            time_tag: self.time_tag,
        })
    }

    pub fn sub(&self, rhs: &Field) -> Result<Field> {
        same_grid(&self.grid, &rhs.grid, "sub")?;
        let samples = self
            .samples
            .iter()
            .zip(&rhs.samples)
            .map(|(&a, &b)| a - b)
            .collect();
        Ok(Field {
            grid: self.grid.clone(),
            samples,
            time_tag: self.time_tag,
        })
    }

    /// `sqrt(h1_sq)` of the difference; the metric used for iteration control.
    pub fn h1_distance(&self, rhs: &Field) -> Result<f64> {
        Ok(self.sub(rhs)?.norms().h1_sq.sqrt())
    }
}

/// Free-function form of [`Field::derivative`].
pub fn spectral_derivative(f: &Field, order: u32) -> Result<Field> {
    f.derivative(order)
}

/// Free-function form of [`Field::dealiased`].
pub fn dealias(f: &Field) -> Field {
    f.dealiased()
}

/// Free-function form of [`Field::norms`].
pub fn norms(f: &Field) -> FieldNorms {
    f.norms()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn make_grid_rejects_bad_arguments() {
        assert!(make_grid(0.0, 64).is_err());
        assert!(make_grid(-1.0, 64).is_err());
        assert!(make_grid(80.0, 15).is_err());
        assert!(make_grid(80.0, 33).is_err());
        assert!(make_grid(80.0, 14).is_err());
        assert!(make_grid(80.0, 16).is_ok());
    }

    #[test]
    fn nodes_and_wavenumbers_layout() {
        let g = make_grid(80.0, 64).unwrap();
        assert_eq!(g.nodes()[0], -40.0);
        assert!((g.dx() - 1.25).abs() < 1e-15);
        assert!((g.nodes()[1] - (-38.75)).abs() < 1e-12);
        let k1 = 2.0 * PI / 80.0;
        assert!((g.wavenumbers()[1] - k1).abs() < 1e-15);
        assert!((g.wavenumbers()[63] + k1).abs() < 1e-15);
        assert!((g.wavenumbers()[32] + 32.0 * k1).abs() < 1e-12);
    }

    #[test]
    fn transform_round_trip_is_identity() {
        let g = make_grid(40.0, 128).unwrap();
        let f = Field::from_fn(&g, 0.0, |x| (0.3 * x).sin() * (-0.01 * x * x).exp());
        let back = g.to_samples(&f.spectrum());
        for (a, b) in f.samples().iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_on_a_smooth_field() {
        let g = make_grid(80.0, 256).unwrap();
        let f = Field::from_fn(&g, 0.0, |x| (-0.05 * x * x).exp() * (1.3 * x).cos());
        let l2_sq = f.norms().l2_sq;
        let spec = f.spectrum();
        let n = g.n() as f64;
        let spectral: f64 = spec.iter().map(|c| c.norm_sqr()).sum::<f64>() * g.dx() / n;
        assert!((l2_sq - spectral).abs() < 1e-12 * l2_sq.max(1.0));
    }

    #[test]
    fn sine_norms_match_closed_forms() {
        // On [ -pi, pi ): integral sin^2 = pi, integral (sin^2 + cos^2) = 2 pi,
        // integral sin^3 = 0, integral |sin|^3 = 4/3 * ... = 8/3 * (1/2) = 4/3.
        let g = make_grid(2.0 * PI, 128).unwrap();
        let f = Field::from_fn(&g, 0.0, |x| x.sin());
        let nm = f.norms();
        assert!((nm.l2_sq - PI).abs() < 1e-12);
        assert!((nm.h1_sq - 2.0 * PI).abs() < 1e-12);
        assert!(nm.int_u3.abs() < 1e-12);
        // |sin|^3 is only C^2, so the quadrature is O(h^4) here, not spectral.
        assert!((nm.l3_cubed - 8.0 / 3.0).abs() < 1e-6);
        assert!((nm.linf - 1.0).abs() < 1e-10);
    }

    #[test]
    fn derivatives_of_sine_are_exact() {
        let g = make_grid(2.0 * PI, 64).unwrap();
        let f = Field::from_fn(&g, 0.0, |x| (3.0 * x).sin());
        let d1 = f.derivative(1).unwrap();
        let d2 = f.derivative(2).unwrap();
        let d3 = f.derivative(3).unwrap();
        for (j, &x) in g.nodes().iter().enumerate() {
            assert!((d1.samples()[j] - 3.0 * (3.0 * x).cos()).abs() < 1e-10);
            assert!((d2.samples()[j] + 9.0 * (3.0 * x).sin()).abs() < 1e-10);
            assert!((d3.samples()[j] + 27.0 * (3.0 * x).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn derivative_rejects_unsupported_orders() {
        let g = make_grid(10.0, 32).unwrap();
        let f = Field::zero(&g, 0.0);
        assert!(f.derivative(0).is_err());
        assert!(f.derivative(4).is_err());
    }

    #[test]
    fn nyquist_mode_is_zeroed_for_odd_orders() {
        let g = make_grid(2.0 * PI, 32).unwrap();
        // cos(16 x) is pure Nyquist on n = 32 over a 2 pi box.
        let f = Field::from_fn(&g, 0.0, |x| (16.0 * x).cos());
        let d1 = f.derivative(1).unwrap();
        let d2 = f.derivative(2).unwrap();
        assert!(d1.norms().linf < 1e-10);
        assert!(d2.norms().linf > 100.0);
    }

    #[test]
    fn dealias_keeps_and_drops_the_right_modes() {
        let g = make_grid(2.0 * PI, 64).unwrap();
        // n/3 = 21.33: mode 21 survives, mode 22 dies.
        let keep = Field::from_fn(&g, 0.0, |x| (21.0 * x).cos());
        let drop = Field::from_fn(&g, 0.0, |x| (22.0 * x).cos());
        assert!((keep.dealiased().norms().l2_sq - keep.norms().l2_sq).abs() < 1e-12);
        assert!(drop.dealiased().norms().linf < 1e-12);
    }

    #[test]
    fn dealias_is_idempotent() {
        let g = make_grid(40.0, 128).unwrap();
        let f = Field::from_fn(&g, 0.0, |x| (-0.1 * x * x).exp());
        let once = f.dealiased();
        let twice = once.dealiased();
        let diff = once.sub(&twice).unwrap().norms().linf;
        assert!(diff < 1e-13);
    }

    #[test]
    fn field_constructor_enforces_grid_and_finiteness() {
        let g = make_grid(10.0, 32).unwrap();
        assert!(Field::new(&g, vec![0.0; 31], 0.0).is_err());
        let mut bad = vec![0.0; 32];
        bad[5] = f64::NAN;
        assert!(Field::new(&g, bad, 0.0).is_err());
        assert!(Field::new(&g, vec![1.0; 32], 0.0).is_ok());
    }

    #[test]
    fn mixed_grid_arithmetic_is_rejected() {
        let g1 = make_grid(10.0, 32).unwrap();
        let g2 = make_grid(10.0, 64).unwrap();
        let a = Field::zero(&g1, 0.0);
        let b = Field::zero(&g2, 0.0);
        assert!(a.add(&b).is_err());
        assert!(a.sub(&b).is_err());
    }
}
