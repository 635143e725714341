//! Centered discrete Fourier transforms between conjugate grids.
//!
//! The continuum conventions are fixed once here:
//!
//! * forward (direct -> reciprocal):  `F(mu) = 1/(2 pi) * integral dz e^{-i z mu} f(z)`
//! * inverse (reciprocal -> direct):  `f(z)  =            integral dmu e^{+i z mu} F(mu)`
//!
//! On a [`ConjugatePair`] the two are exact inverses of one another (up to
//! rounding), because `dz * dmu * count = 2 pi`. Grid offsets are absorbed
//! into pre- and post-multiplication phase ramps around a plain FFT.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::grid::{ConjugatePair, Grid1D};
use crate::par;

/// FFT plans for one grid size, reusable across rows and threads.
pub(crate) struct CenteredFft {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    count: usize,
}

impl CenteredFft {
    pub fn new(count: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            forward: planner.plan_fft_forward(count),
            inverse: planner.plan_fft_inverse(count),
            count,
        }
    }

    /// `1/(2 pi) * sum_j dz e^{-i z_j mu_k} f_j` for every reciprocal point.
    pub fn forward(&self, f: &[Complex64], direct: &Grid1D, reciprocal: &Grid1D) -> Vec<Complex64> {
        debug_assert_eq!(f.len(), self.count);
        let dz = direct.step();
        let z0 = direct.start();
        let mu0 = reciprocal.start();
        let mut buf: Vec<Complex64> = (0..self.count)
            .map(|j| f[j] * Complex64::from_polar(1.0, -(j as f64) * dz * mu0))
            .collect();
        self.forward.process(&mut buf);
        let scale = dz / (2.0 * std::f64::consts::PI);
        for (k, v) in buf.iter_mut().enumerate() {
            *v *= Complex64::from_polar(scale, -z0 * reciprocal.point(k));
        }
        buf
    }

    /// `sum_k dmu e^{+i z_j mu_k} g_k` for every direct point.
    pub fn inverse(&self, g: &[Complex64], direct: &Grid1D, reciprocal: &Grid1D) -> Vec<Complex64> {
        debug_assert_eq!(g.len(), self.count);
        let dmu = reciprocal.step();
        let z0 = direct.start();
        let mu0 = reciprocal.start();
        let mut buf: Vec<Complex64> = (0..self.count)
            .map(|k| g[k] * Complex64::from_polar(1.0, z0 * (k as f64) * dmu))
            .collect();
        self.inverse.process(&mut buf);
        for (j, v) in buf.iter_mut().enumerate() {
            *v *= Complex64::from_polar(dmu, direct.point(j) * mu0);
        }
        buf
    }
}

/// Forward transform of each row of a row-major `(rows, count)` block.
pub(crate) fn forward_rows(values: &mut [Complex64], pair: &ConjugatePair) {
    let fft = CenteredFft::new(pair.direct().count());
    let n = pair.direct().count();
    par::for_each_row(values, n, |_, row| {
        let out = fft.forward(row, pair.direct(), pair.reciprocal());
        row.copy_from_slice(&out);
    });
}

/// Inverse transform of each row of a row-major `(rows, count)` block.
pub(crate) fn inverse_rows(values: &mut [Complex64], pair: &ConjugatePair) {
    let fft = CenteredFft::new(pair.direct().count());
    let n = pair.direct().count();
    par::for_each_row(values, n, |_, row| {
        let out = fft.inverse(row, pair.direct(), pair.reciprocal());
        row.copy_from_slice(&out);
    });
}
