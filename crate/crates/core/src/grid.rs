//! Uniform sampling grids, FFT-conjugate grid pairs, and field containers.
//!
//! Grids are uniform and immutable. A [`ConjugatePair`] ties a direct axis to
//! its discrete-Fourier reciprocal axis through the reciprocity relation
//! `reciprocal.step * direct.step * count = 2 * pi`. All reductions use a
//! fixed row-major pairwise summation order so that results are bit-identical
//! regardless of the thread count used by row-parallel operations.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::par;

/// Relative tolerance for the discrete reciprocity invariant.
pub const RECIPROCITY_TOL: f64 = 1e-12;

/// A uniform one-dimensional sampling axis.
///
/// Points are `start + k * step` for `k = 0..count-1`. Counts are even and
/// at least 8 so every axis can serve as an FFT axis; powers of two are
/// recommended but not required.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    start: f64,
    step: f64,
    count: usize,
}

impl Grid1D {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "grid step must be positive and finite, got {step}"
            )));
        }
        if !start.is_finite() {
            return Err(Error::InvalidArgument("grid start must be finite".into()));
        }
        if count < 8 || !count.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "grid count must be even and >= 8, got {count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    /// Symmetric FFT-style grid: `count` points centered on `center`, with
    /// `start = center - (count/2) * step`. The point at index `count/2` is
    /// exactly `center`; the right endpoint `center + (count/2)*step` is
    /// excluded, as usual for periodic transforms.
    pub fn symmetric(center: f64, step: f64, count: usize) -> Result<Self> {
        let half = (count / 2) as f64;
        Self::new(center - half * step, step, count)
    }

    /// Endpoint-inclusive grid spanning `[min, max]` with `count` points.
    /// Used for plain quadrature rectangles rather than FFT axes.
    pub fn inclusive(min: f64, max: f64, count: usize) -> Result<Self> {
        if max <= min || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "inclusive grid needs max > min, got [{min}, {max}]"
            )));
        }
        if count < 8 || !count.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "grid count must be even and >= 8, got {count}"
            )));
        }
        let step = (max - min) / (count - 1) as f64;
        Self::new(min, step, count)
    }

    #[inline]
    pub fn start(&self) -> f64 {
        self.start
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.start + self.step * k as f64
    }

    pub fn last(&self) -> f64 {
        self.point(self.count - 1)
    }

    /// Length of the sampled interval, `(count - 1) * step`.
    pub fn span(&self) -> f64 {
        self.step * (self.count - 1) as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }

    /// Index of the grid point nearest to `x`, clamped to the axis.
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x - self.start) / self.step).round();
        (k.max(0.0) as usize).min(self.count - 1)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.start, self.step, self.count).map(|_| ())
    }

    /// Same axis up to a relative tolerance on start and step.
    pub fn approx_eq(&self, other: &Grid1D, tol: f64) -> bool {
        let scale = self.step.abs().max(other.step.abs());
        self.count == other.count
            && (self.step - other.step).abs() <= tol * scale
            && (self.start - other.start).abs() <= tol * scale * self.count as f64
    }
}

/// A direct axis together with its discrete-Fourier reciprocal axis.
///
/// For the hologram transforms the direct axis is `z` and the reciprocal axis
/// is the momentum fluctuation `mu`; the reciprocal grid is centered on zero
/// with step `2 pi / (count * direct.step)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugatePair {
    direct: Grid1D,
    reciprocal: Grid1D,
    hbar: f64,
}

/// Builds the reciprocal grid of `direct` and packages the pair.
pub fn make_conjugate_pair(direct: Grid1D, hbar: f64) -> Result<ConjugatePair> {
    if !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    direct.validate()?;
    let step = 2.0 * PI / (direct.count as f64 * direct.step);
    let reciprocal = Grid1D::symmetric(0.0, step, direct.count)?;
    let pair = ConjugatePair {
        direct,
        reciprocal,
        hbar,
    };
    pair.check_reciprocity()?;
    Ok(pair)
}

/// Builds the pair whose reciprocal axis is exactly `reciprocal`, deriving
/// the direct axis from discrete reciprocity. Used when a stored field
/// carries the reciprocal grid.
pub fn pair_for_reciprocal(reciprocal: Grid1D, hbar: f64) -> Result<ConjugatePair> {
    if !hbar.is_finite() || hbar <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    reciprocal.validate()?;
    let step = 2.0 * PI / (reciprocal.count as f64 * reciprocal.step);
    let direct = Grid1D::symmetric(0.0, step, reciprocal.count)?;
    let pair = ConjugatePair {
        direct,
        reciprocal,
        hbar,
    };
    pair.check_reciprocity()?;
    Ok(pair)
}

impl ConjugatePair {
    #[inline]
    pub fn direct(&self) -> &Grid1D {
        &self.direct
    }

    #[inline]
    pub fn reciprocal(&self) -> &Grid1D {
        &self.reciprocal
    }

    #[inline]
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn check_reciprocity(&self) -> Result<()> {
        if self.direct.count != self.reciprocal.count {
            return Err(Error::InvalidArgument(
                "conjugate grids must have equal counts".into(),
            ));
        }
        let product = self.reciprocal.step * self.direct.step * self.direct.count as f64;
        let rel = (product - 2.0 * PI).abs() / (2.0 * PI);
        if rel > RECIPROCITY_TOL {
            return Err(Error::InvalidArgument(format!(
                "reciprocity violated: step product deviates by {rel:.3e} relative"
            )));
        }
        Ok(())
    }
}

/// Maps the transform coordinate `z` back to a physical position `(hbar/2) z`.
pub fn z_to_position(z: f64, hbar: f64) -> f64 {
    0.5 * hbar * z
}

// ---------------------------------------------------------------------------
// Field containers
// ---------------------------------------------------------------------------

fn check_finite_c(values: &[Complex64]) -> Result<()> {
    if values
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidArgument(
            "field contains non-finite values".into(),
        ));
    }
    Ok(())
}

fn check_finite_r(values: &[f64]) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(
            "field contains non-finite values".into(),
        ));
    }
    Ok(())
}

/// Complex samples over one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField1D {
    grid: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField1D {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match grid count {}",
                values.len(),
                grid.count()
            )));
        }
        check_finite_c(&values)?;
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `sum |f_k|^2 * step`, the discrete L2 norm used for normalization.
    pub fn norm_squared(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        pairwise_sum(&sq) * self.grid.step()
    }
}

/// Real samples over one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl RealField1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match grid count {}",
                values.len(),
                grid.count()
            )));
        }
        check_finite_r(&values)?;
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn integral(&self) -> f64 {
        integrate_1d(&self.values, &self.grid)
    }
}

/// Complex samples over a 2D grid, row-major with the first axis as rows:
/// `values[ix * grid_y.count() + iy]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField2D {
    grid_x: Grid1D,
    grid_y: Grid1D,
    values: Vec<Complex64>,
}

impl ComplexField2D {
    pub fn new(grid_x: Grid1D, grid_y: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid_x.count() * grid_y.count() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match {}x{} grid",
                values.len(),
                grid_x.count(),
                grid_y.count()
            )));
        }
        check_finite_c(&values)?;
        Ok(Self {
            grid_x,
            grid_y,
            values,
        })
    }

    #[inline]
    pub fn grid_x(&self) -> &Grid1D {
        &self.grid_x
    }

    #[inline]
    pub fn grid_y(&self) -> &Grid1D {
        &self.grid_y
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.grid_y.count() + iy]
    }

    pub fn row(&self, ix: usize) -> &[Complex64] {
        let n = self.grid_y.count();
        &self.values[ix * n..(ix + 1) * n]
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Trapezoidal integral of the complex field over its full grid.
    pub fn integral(&self) -> Complex64 {
        let ny = self.grid_y.count();
        let rows: Vec<Complex64> = par::map_indexed(self.grid_x.count(), |ix| {
            trapezoid_row_c(&self.values[ix * ny..(ix + 1) * ny]) * self.grid_y.step()
        });
        trapezoid_row_c(&rows) * self.grid_x.step()
    }

    /// Largest absolute imaginary part relative to the largest absolute real
    /// part; used by realness checks before truncating to a real field.
    pub fn imaginary_residue(&self) -> f64 {
        let max_im = self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        let max_re = self.values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
        if max_re == 0.0 {
            if max_im == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            max_im / max_re
        }
    }

    /// Drops imaginary parts. Call [`Self::imaginary_residue`] first.
    pub fn into_real(self) -> RealField2D {
        let values = self.values.iter().map(|v| v.re).collect();
        RealField2D {
            grid_x: self.grid_x,
            grid_y: self.grid_y,
            values,
        }
    }
}

/// Real samples over a 2D grid, row-major with the first axis as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField2D {
    grid_x: Grid1D,
    grid_y: Grid1D,
    values: Vec<f64>,
}

impl RealField2D {
    pub fn new(grid_x: Grid1D, grid_y: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid_x.count() * grid_y.count() {
            return Err(Error::InvalidArgument(format!(
                "value count {} does not match {}x{} grid",
                values.len(),
                grid_x.count(),
                grid_y.count()
            )));
        }
        check_finite_r(&values)?;
        Ok(Self {
            grid_x,
            grid_y,
            values,
        })
    }

    #[inline]
    pub fn grid_x(&self) -> &Grid1D {
        &self.grid_x
    }

    #[inline]
    pub fn grid_y(&self) -> &Grid1D {
        &self.grid_y
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[ix * self.grid_y.count() + iy]
    }

    pub fn row(&self, ix: usize) -> &[f64] {
        let n = self.grid_y.count();
        &self.values[ix * n..(ix + 1) * n]
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

/// Deterministic pairwise sum (fixed recursive split, no data dependence).
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        acc
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

pub fn pairwise_sum_complex(values: &[Complex64]) -> Complex64 {
    if values.len() <= 8 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in values {
            acc += v;
        }
        acc
    } else {
        let mid = values.len() / 2;
        pairwise_sum_complex(&values[..mid]) + pairwise_sum_complex(&values[mid..])
    }
}

fn trapezoid_row(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    pairwise_sum(values) - 0.5 * (values[0] + values[n - 1])
}

fn trapezoid_row_c(values: &[Complex64]) -> Complex64 {
    let n = values.len();
    if n < 2 {
        return Complex64::new(0.0, 0.0);
    }
    pairwise_sum_complex(values) - 0.5 * (values[0] + values[n - 1])
}

/// Trapezoidal quadrature of samples over their grid.
pub fn integrate_1d(values: &[f64], grid: &Grid1D) -> f64 {
    debug_assert_eq!(values.len(), grid.count());
    trapezoid_row(values) * grid.step()
}

/// Trapezoidal quadrature of a 2D field over its full grid.
///
/// Rows are reduced independently (and possibly in parallel) and the row
/// results are combined in fixed row-major pairwise order, so the value is
/// deterministic and thread-count independent.
pub fn integrate_2d(field: &RealField2D) -> f64 {
    let ny = field.grid_y().count();
    let dy = field.grid_y().step();
    let rows: Vec<f64> = par::map_indexed(field.grid_x().count(), |ix| {
        trapezoid_row(&field.values()[ix * ny..(ix + 1) * ny]) * dy
    });
    trapezoid_row(&rows) * field.grid_x().step()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conjugate_pair_step() {
        let g = Grid1D::symmetric(0.0, 1.0, 8).unwrap();
        let pair = make_conjugate_pair(g, 1.0).unwrap();
        assert!((pair.reciprocal().step() - 2.0 * PI / 8.0).abs() < 1e-15);

        let g = Grid1D::symmetric(0.0, 0.1, 256).unwrap();
        let pair = make_conjugate_pair(g, 1.0).unwrap();
        assert!((pair.reciprocal().step() - 2.0 * PI / 25.6).abs() < 1e-15);
    }

    #[test]
    fn conjugate_round_trip() {
        let g = Grid1D::symmetric(0.0, 0.37, 64).unwrap();
        let pair = make_conjugate_pair(g, 1.0).unwrap();
        let back = make_conjugate_pair(*pair.reciprocal(), 1.0).unwrap();
        assert!((back.reciprocal().step() - g.step()).abs() < 1e-12);
    }

    #[test]
    fn conjugate_rejects_bad_args() {
        assert!(Grid1D::new(0.0, -1.0, 16).is_err());
        assert!(Grid1D::new(0.0, 1.0, 7).is_err());
        assert!(Grid1D::new(0.0, 1.0, 6).is_err());
        let g = Grid1D::symmetric(0.0, 1.0, 16).unwrap();
        assert!(make_conjugate_pair(g, 0.0).is_err());
    }

    #[test]
    fn z_to_position_values() {
        assert_eq!(z_to_position(2.0, 1.0), 1.0);
        assert_eq!(z_to_position(0.0, 1.0), 0.0);
        assert_eq!(z_to_position(4.0, 0.5), 1.0);
    }

    #[test]
    fn symmetric_grid_center_is_exact() {
        let g = Grid1D::symmetric(0.0, 0.0625, 256).unwrap();
        assert_eq!(g.point(128), 0.0);
        assert_eq!(g.point(127), -g.point(129));
    }

    #[test]
    fn integrate_constant_field() {
        let gx = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let gy = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let f = RealField2D::new(gx, gy, vec![1.0; 64 * 64]).unwrap();
        assert!((integrate_2d(&f) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn integrate_odd_field() {
        let gx = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let gy = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let mut v = Vec::with_capacity(64 * 64);
        for x in gx.points() {
            for y in gy.points() {
                v.push(x * y);
            }
        }
        let f = RealField2D::new(gx, gy, v).unwrap();
        assert!(integrate_2d(&f).abs() < 1e-12);
    }

    #[test]
    fn integrate_gaussian_field() {
        let gx = Grid1D::inclusive(-6.0, 6.0, 256).unwrap();
        let gy = Grid1D::inclusive(-6.0, 6.0, 256).unwrap();
        let mut v = Vec::with_capacity(256 * 256);
        for x in gx.points() {
            for y in gy.points() {
                v.push((-x * x - y * y).exp());
            }
        }
        let f = RealField2D::new(gx, gy, v).unwrap();
        assert!((integrate_2d(&f) - PI).abs() < 1e-8);
    }

    #[test]
    fn integrate_is_deterministic() {
        let gx = Grid1D::inclusive(-3.0, 3.0, 128).unwrap();
        let gy = Grid1D::inclusive(-2.0, 2.0, 64).unwrap();
        let v: Vec<f64> = (0..128u64 * 64)
            .map(|k| ((k * 2654435761) % 1000) as f64 / 997.0)
            .collect();
        let f = RealField2D::new(gx, gy, v).unwrap();
        let a = integrate_2d(&f);
        let b = integrate_2d(&f);
        assert_eq!(a.to_bits(), b.to_bits());
    }

    proptest! {
        #[test]
        fn reciprocity_holds(step in 1e-3f64..1e3, exp in 3u32..10) {
            let count = 1usize << exp;
            let g = Grid1D::symmetric(0.0, step, count).unwrap();
            let pair = make_conjugate_pair(g, 1.0).unwrap();
            let product = pair.reciprocal().step() * step * count as f64;
            prop_assert!((product - 2.0 * PI).abs() / (2.0 * PI) < 1e-12);
        }

        #[test]
        fn separable_product_integral(nx in 4u32..7, ny in 4u32..7) {
            let nx = 1usize << nx;
            let ny = 1usize << ny;
            let gx = Grid1D::inclusive(-2.0, 2.0, nx).unwrap();
            let gy = Grid1D::inclusive(-1.0, 3.0, ny).unwrap();
            let fx: Vec<f64> = gx.points().map(|x| 1.0 + 0.5 * x).collect();
            let fy: Vec<f64> = gy.points().map(|y| (-(y * y)).exp()).collect();
            let mut v = Vec::with_capacity(nx * ny);
            for a in &fx {
                for b in &fy {
                    v.push(a * b);
                }
            }
            let f2 = RealField2D::new(gx, gy, v).unwrap();
            let ix = integrate_1d(&fx, &gx);
            let iy = integrate_1d(&fy, &gy);
            prop_assert!((integrate_2d(&f2) - ix * iy).abs() < 1e-12 * (1.0 + (ix * iy).abs()));
        }
    }
}
