//! One-dimensional coarse graining along momentum or position, the 2D
//! baseline, positivity analysis, the large-sigma limit checks, and the
//! minimum-grain-size search.
//!
//! The grain parameter `sigma` always parameterizes the transform-domain
//! Gaussian magnitude `exp(-sigma^2 z^2 / 2)` (or `exp(-sigma^2 k^2 / 2)` for
//! the position axis); the convolution kernel it induces is derived, not set
//! independently. Along momentum the induced kernel is a Gaussian of standard
//! deviation `sigma` in `mu`; along position the `k -> x` transform carries a
//! factor `2/hbar`, so the induced x-kernel has standard deviation
//! `hbar sigma / 2`. Large `sigma` therefore means a narrow magnitude window
//! and a wide, strongly coarse-graining kernel.
//!
//! Convolutions are zero-padded and linear (not circular): the underlying
//! integrals run over the whole line, and wraparound would corrupt the tails.
//! Outputs are renormalized to unit integral.
//!
//! Positivity is judged at the epsilon level, `min >= -epsilon * max|p|`:
//! at nodes of the state the large-sigma limit approaches zero from below,
//! so strict positivity is only reached asymptotically and a strict search
//! reports a bracketing failure instead of inventing a grain size.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{integrate_2d, pairwise_sum, ConjugatePair, Grid1D, RealField2D};
use crate::par;
use crate::states::{Phi, Psi};

/// Which coordinate the 1D instrument function blurs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Momentum,
    Position,
}

/// Kernel family of a coarse-graining step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KernelSpec {
    /// Transform-domain Gaussian magnitude of width parameter `sigma`.
    Gaussian { sigma: f64 },
    /// Explicit non-negative, unit-sum taps centered at `len/2`.
    Tabulated(Vec<f64>),
}

/// Axis selector, kernel family, and optional magnitude profile
/// (`f_X(x)` samples for the momentum axis, `f_M(mu)` for the position axis;
/// `None` means the uniform profile).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseGrainSpec {
    pub axis: Axis,
    pub kernel: KernelSpec,
    pub magnitude_profile: Option<Vec<f64>>,
}

impl CoarseGrainSpec {
    pub fn gaussian(axis: Axis, sigma: f64) -> Self {
        Self {
            axis,
            kernel: KernelSpec::Gaussian { sigma },
            magnitude_profile: None,
        }
    }

    fn validate(&self) -> Result<()> {
        match &self.kernel {
            KernelSpec::Gaussian { sigma } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "kernel sigma must be positive, got {sigma}"
                    )));
                }
            }
            KernelSpec::Tabulated(taps) => {
                if taps.is_empty() || taps.iter().any(|t| !t.is_finite() || *t < 0.0) {
                    return Err(Error::InvalidArgument(
                        "tabulated kernel must be non-empty and non-negative".into(),
                    ));
                }
                let sum = pairwise_sum(taps);
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "tabulated kernel must sum to 1, got {sum}"
                    )));
                }
            }
        }
        if let Some(profile) = &self.magnitude_profile {
            if profile.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidArgument(
                    "magnitude profile must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Positivity scan of a 2D field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_value: f64,
    pub min_location: (f64, f64),
    /// Integral of the negative part's magnitude over the integral of `|p|`.
    pub negative_mass_fraction: f64,
    pub epsilon: f64,
    pub positive: bool,
}

/// Exact scan for the minimum, its location, and the negative-mass fraction;
/// the verdict is `min_value >= -epsilon * max|p|`.
pub fn positivity_report(p: &RealField2D, epsilon: f64) -> Result<PositivityReport> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let ny = p.grid_y().count();
    let mut min_value = f64::INFINITY;
    let mut min_idx = (0usize, 0usize);
    for (k, &v) in p.values().iter().enumerate() {
        if v < min_value {
            min_value = v;
            min_idx = (k / ny, k % ny);
        }
    }
    let neg = RealField2D::new(
        *p.grid_x(),
        *p.grid_y(),
        p.values().iter().map(|&v| (-v).max(0.0)).collect(),
    )?;
    let abs = RealField2D::new(
        *p.grid_x(),
        *p.grid_y(),
        p.values().iter().map(|&v| v.abs()).collect(),
    )?;
    let abs_mass = integrate_2d(&abs);
    let negative_mass_fraction = if abs_mass > 0.0 {
        integrate_2d(&neg) / abs_mass
    } else {
        0.0
    };
    let max_abs = p.max_abs();
    Ok(PositivityReport {
        min_value,
        min_location: (p.grid_x().point(min_idx.0), p.grid_y().point(min_idx.1)),
        negative_mass_fraction,
        epsilon,
        positive: min_value >= -epsilon * max_abs,
    })
}

/// Instrument kernel from a hologram magnitude: the row-wise transform
/// `g(mu|x) = 1/(2 pi) integral dz e^{-i z mu} |Z(x,z)|`.
pub fn kernel_from_magnitude(magnitude: &RealField2D, pair: &ConjugatePair) -> Result<RealField2D> {
    if magnitude.values().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument(
            "hologram magnitude must be non-negative".into(),
        ));
    }
    let mut values: Vec<Complex64> = magnitude
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    crate::fourier::forward_rows(&mut values, pair);
    let complex =
        crate::grid::ComplexField2D::new(*magnitude.grid_x(), *pair.reciprocal(), values)?;
    let residue = complex.imaginary_residue();
    if residue > 1e-8 {
        return Err(Error::NumericalConsistency(format!(
            "kernel transform has imaginary residue {residue:.3e}; |Z| must be even in z for a real kernel"
        )));
    }
    Ok(complex.into_real())
}

// ---------------------------------------------------------------------------
// 1D linear convolution
// ---------------------------------------------------------------------------

/// Gaussian taps on a lattice of spacing `step`, truncated at eight standard
/// deviations and normalized to unit sum. Sub-resolution widths degenerate to
/// a discrete delta.
fn gaussian_taps(std: f64, step: f64, max_half: usize) -> Vec<f64> {
    let half = ((8.0 * std / step).ceil() as usize).min(max_half);
    let mut taps = Vec::with_capacity(2 * half + 1);
    for t in -(half as isize)..=(half as isize) {
        let u = t as f64 * step / std;
        taps.push((-0.5 * u * u).exp());
    }
    let sum = pairwise_sum(&taps);
    for t in &mut taps {
        *t /= sum;
    }
    taps
}

fn taps_for(
    kernel: &KernelSpec,
    induced_std: impl Fn(f64) -> f64,
    step: f64,
    n: usize,
) -> Vec<f64> {
    match kernel {
        KernelSpec::Gaussian { sigma } => gaussian_taps(induced_std(*sigma), step, n - 1),
        KernelSpec::Tabulated(taps) => taps.clone(),
    }
}

/// Zero-padded linear convolution of one row, taps centered at `len/2`.
fn convolve_row_direct(src: &[f64], taps: &[f64], dst: &mut [f64]) {
    let n = src.len() as isize;
    let center = (taps.len() / 2) as isize;
    for (i, out) in dst.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (t, &k) in taps.iter().enumerate() {
            let j = i as isize - (t as isize - center);
            if j >= 0 && j < n {
                acc += k * src[j as usize];
            }
        }
        *out = acc;
    }
}

/// FFT path for the same zero-padded linear convolution.
fn convolve_row_fft(src: &[f64], taps: &[f64], dst: &mut [f64]) {
    let n = src.len();
    let m = (n + taps.len()).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut a = vec![Complex64::new(0.0, 0.0); m];
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    for (i, &v) in src.iter().enumerate() {
        a[i] = Complex64::new(v, 0.0);
    }
    for (i, &v) in taps.iter().enumerate() {
        b[i] = Complex64::new(v, 0.0);
    }
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let center = taps.len() / 2;
    for (i, out) in dst.iter_mut().enumerate() {
        *out = a[i + center].re / m as f64;
    }
}

/// Convolution evaluation strategy; `Direct` is the reference summation,
/// `Fft` the fast path. The two agree to rounding and are cross-checked in
/// the test suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvMethod {
    #[default]
    Direct,
    Fft,
}

fn convolve_axis(
    p: &RealField2D,
    taps: &[f64],
    along_rows: bool,
    weights: Option<&[f64]>,
    method: ConvMethod,
) -> Result<RealField2D> {
    let (nx, ny) = (p.grid_x().count(), p.grid_y().count());
    if let Some(w) = weights {
        let expect = if along_rows { nx } else { ny };
        if w.len() != expect {
            return Err(Error::InvalidArgument(format!(
                "magnitude profile length {} does not match axis count {expect}",
                w.len()
            )));
        }
    }
    let run = |src: &[f64], dst: &mut [f64]| match method {
        ConvMethod::Direct => convolve_row_direct(src, taps, dst),
        ConvMethod::Fft => convolve_row_fft(src, taps, dst),
    };
    let values = if along_rows {
        // convolve each x-row along the y axis, weight rows by profile(x)
        let mut out = vec![0.0; nx * ny];
        let src = p.values();
        par::for_each_row(&mut out, ny, |ix, row| {
            run(&src[ix * ny..(ix + 1) * ny], row);
            if let Some(w) = weights {
                for v in row.iter_mut() {
                    *v *= w[ix];
                }
            }
        });
        out
    } else {
        // convolve each y-column along the x axis, weight columns by profile(y)
        let cols: Vec<Vec<f64>> = par::map_indexed(ny, |iy| {
            let col: Vec<f64> = (0..nx).map(|ix| p.at(ix, iy)).collect();
            let mut dst = vec![0.0; nx];
            run(&col, &mut dst);
            if let Some(w) = weights {
                for v in &mut dst {
                    *v *= w[iy];
                }
            }
            dst
        });
        let mut out = vec![0.0; nx * ny];
        for (iy, col) in cols.iter().enumerate() {
            for ix in 0..nx {
                out[ix * ny + iy] = col[ix];
            }
        }
        out
    };
    let mut field = RealField2D::new(*p.grid_x(), *p.grid_y(), values)?;
    let mass = integrate_2d(&field);
    if mass <= 0.0 || !mass.is_finite() {
        return Err(Error::DegenerateState(
            "coarse-grained field has no positive mass".into(),
        ));
    }
    field.scale(1.0 / mass);
    Ok(field)
}

/// Per-row convolution along `mu` with the kernel induced by `spec`
/// (momentum axis), weighted by `f_X(x)` and renormalized.
pub fn convolve_mu(p: &RealField2D, spec: &CoarseGrainSpec) -> Result<RealField2D> {
    convolve_mu_with(p, spec, ConvMethod::Direct)
}

pub fn convolve_mu_with(
    p: &RealField2D,
    spec: &CoarseGrainSpec,
    method: ConvMethod,
) -> Result<RealField2D> {
    if spec.axis != Axis::Momentum {
        return Err(Error::InvalidArgument(
            "convolve_mu requires axis = Momentum".into(),
        ));
    }
    spec.validate()?;
    let taps = taps_for(&spec.kernel, |s| s, p.grid_y().step(), p.grid_y().count());
    convolve_axis(p, &taps, true, spec.magnitude_profile.as_deref(), method)
}

/// Per-column convolution along `x` with the kernel induced by `spec`
/// (position axis; induced standard deviation `hbar sigma / 2`), weighted by
/// `f_M(mu)` and renormalized.
pub fn convolve_x(p: &RealField2D, spec: &CoarseGrainSpec, hbar: f64) -> Result<RealField2D> {
    convolve_x_with(p, spec, hbar, ConvMethod::Direct)
}

pub fn convolve_x_with(
    p: &RealField2D,
    spec: &CoarseGrainSpec,
    hbar: f64,
    method: ConvMethod,
) -> Result<RealField2D> {
    if spec.axis != Axis::Position {
        return Err(Error::InvalidArgument(
            "convolve_x requires axis = Position".into(),
        ));
    }
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    spec.validate()?;
    let taps = taps_for(
        &spec.kernel,
        |s| 0.5 * hbar * s,
        p.grid_x().step(),
        p.grid_x().count(),
    );
    convolve_axis(p, &taps, false, spec.magnitude_profile.as_deref(), method)
}

/// Separable 2D Gaussian baseline with direct x- and mu-kernel widths
/// `sigma_x` and `sigma_mu`. At `sigma_x * sigma_mu = hbar/2` this is the
/// literature's Heisenberg-saturating smoothing.
pub fn coarse_grain_2d(p: &RealField2D, sigma_x: f64, sigma_mu: f64) -> Result<RealField2D> {
    if !(sigma_x > 0.0 && sigma_mu > 0.0) {
        return Err(Error::InvalidArgument(
            "coarse_grain_2d widths must be positive".into(),
        ));
    }
    let taps_mu = gaussian_taps(sigma_mu, p.grid_y().step(), p.grid_y().count() - 1);
    let stage = convolve_axis(p, &taps_mu, true, None, ConvMethod::Direct)?;
    let taps_x = gaussian_taps(sigma_x, p.grid_x().step(), p.grid_x().count() - 1);
    convolve_axis(&stage, &taps_x, false, None, ConvMethod::Direct)
}

// ---------------------------------------------------------------------------
// Large-sigma limit checks
// ---------------------------------------------------------------------------

const LIMIT_QUAD_POINTS: usize = 129;

/// Sup-norm deviation between the rescaled coarse-grained density and the
/// mu-independent limit profile `f_X(x) |psi(x)|^2`, relative to the profile
/// peak. The density is evaluated by direct quadrature of the magnitude-
/// windowed correlation integral on a fine transform-domain grid that
/// resolves the `exp(-sigma^2 z^2/2)` window, which conjugate FFT grids
/// cannot do for large `sigma`.
pub fn limit_check_mu(
    psi: &Psi,
    f_x: &[f64],
    x_grid: &Grid1D,
    mu_eval: &Grid1D,
    sigma: f64,
    hbar: f64,
) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if f_x.len() != x_grid.count() {
        return Err(Error::InvalidArgument(
            "f_X profile length must match the x grid".into(),
        ));
    }
    if f_x.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument("f_X must be non-negative".into()));
    }
    let zmax = 8.0 / sigma;
    let dz = 2.0 * zmax / (LIMIT_QUAD_POINTS - 1) as f64;
    let rescale = sigma * (2.0 * std::f64::consts::PI).sqrt() / (2.0 * std::f64::consts::PI);

    let profile: Vec<f64> = x_grid
        .points()
        .zip(f_x)
        .map(|(x, w)| w * psi.eval(x).norm_sqr())
        .collect();
    let peak = profile.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::DegenerateState(
            "limit profile is identically zero".into(),
        ));
    }

    let deviations: Vec<f64> = par::map_indexed(x_grid.count(), |ix| {
        let x = x_grid.point(ix);
        // correlation samples along the fine z window
        let corr: Vec<Complex64> = (0..LIMIT_QUAD_POINTS)
            .map(|j| {
                let z = -zmax + j as f64 * dz;
                let u = 0.5 * hbar * z;
                let w = (-0.5 * sigma * sigma * z * z).exp();
                psi.eval(x - u).conj() * psi.eval(x + u) * w
            })
            .collect();
        let mut worst: f64 = 0.0;
        for mu in mu_eval.points() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, c) in corr.iter().enumerate() {
                let z = -zmax + j as f64 * dz;
                let w = if j == 0 || j == LIMIT_QUAD_POINTS - 1 {
                    0.5
                } else {
                    1.0
                };
                acc += w * c * Complex64::from_polar(1.0, -z * mu);
            }
            let p = acc.re * dz * rescale * f_x[ix];
            worst = worst.max((p - profile[ix]).abs());
        }
        worst
    });
    Ok(deviations.into_iter().fold(0.0, f64::max) / peak)
}

/// Mirror of [`limit_check_mu`] for coarse graining along position: the
/// rescaled density is compared against `f_M(mu) |phi(mu)|^2`, using the
/// `k`-domain window `exp(-sigma^2 k^2/2)` and the `e^{-2ikx/hbar}` transform.
pub fn limit_check_x(
    phi: &Phi,
    f_m: &[f64],
    mu_grid: &Grid1D,
    x_eval: &Grid1D,
    sigma: f64,
    hbar: f64,
) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if f_m.len() != mu_grid.count() {
        return Err(Error::InvalidArgument(
            "f_M profile length must match the mu grid".into(),
        ));
    }
    if f_m.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::InvalidArgument("f_M must be non-negative".into()));
    }
    let kmax = 8.0 / sigma;
    let dk = 2.0 * kmax / (LIMIT_QUAD_POINTS - 1) as f64;
    let rescale = sigma * (2.0 * std::f64::consts::PI).sqrt() / (2.0 * std::f64::consts::PI);

    let profile: Vec<f64> = mu_grid
        .points()
        .zip(f_m)
        .map(|(mu, w)| w * phi.eval(mu).norm_sqr())
        .collect();
    let peak = profile.iter().copied().fold(0.0, f64::max);
    if peak <= 0.0 {
        return Err(Error::DegenerateState(
            "limit profile is identically zero".into(),
        ));
    }

    let deviations: Vec<f64> = par::map_indexed(mu_grid.count(), |imu| {
        let mu = mu_grid.point(imu);
        let corr: Vec<Complex64> = (0..LIMIT_QUAD_POINTS)
            .map(|j| {
                let k = -kmax + j as f64 * dk;
                let w = (-0.5 * sigma * sigma * k * k).exp();
                phi.eval(mu + k).conj() * phi.eval(mu - k) * w
            })
            .collect();
        let mut worst: f64 = 0.0;
        for x in x_eval.points() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, c) in corr.iter().enumerate() {
                let k = -kmax + j as f64 * dk;
                let w = if j == 0 || j == LIMIT_QUAD_POINTS - 1 {
                    0.5
                } else {
                    1.0
                };
                acc += w * c * Complex64::from_polar(1.0, -2.0 * k * x / hbar);
            }
            let p = acc.re * dk * rescale * f_m[imu];
            worst = worst.max((p - profile[imu]).abs());
        }
        worst
    });
    Ok(deviations.into_iter().fold(0.0, f64::max) / peak)
}

// ---------------------------------------------------------------------------
// Minimum grain size
// ---------------------------------------------------------------------------

/// Outcome of the minimum-grain-size bisection.
#[derive(Debug, Clone, Serialize)]
pub struct MinGrainResult {
    pub sigma_min: f64,
    /// All (sigma, verdict) evaluations, in evaluation order.
    pub evaluations: Vec<(f64, bool)>,
    /// Whether the observed verdicts are monotone in sigma (negative below,
    /// positive above). Monotonicity is checked, not assumed.
    pub monotone: bool,
    /// True when the lower bracket endpoint was already positive, so the
    /// search degenerates to returning `lo`.
    pub degenerate_bracket: bool,
}

/// Bisection on `sigma` for the smallest grain achieving epsilon-positivity
/// of the 1D-convolved density along `axis`, to a relative width of `1e-3`.
///
/// Requires a sign change over `sigma_range`: if the upper endpoint is not
/// positive the search fails with a bracketing error carrying both endpoint
/// reports; if the lower endpoint is already positive it returns `lo` and
/// flags the bracket as degenerate.
pub fn min_grain_size(
    p: &RealField2D,
    axis: Axis,
    epsilon: f64,
    sigma_range: (f64, f64),
    hbar: f64,
) -> Result<MinGrainResult> {
    let (lo, hi) = sigma_range;
    // epsilon = 0 is allowed: strict positivity is only approached
    // asymptotically at nodes, so the bracket check speaks for itself.
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < lo < hi, got [{lo}, {hi}]"
        )));
    }

    let convolved = |sigma: f64| -> Result<RealField2D> {
        let spec = CoarseGrainSpec::gaussian(axis, sigma);
        match axis {
            Axis::Momentum => convolve_mu(p, &spec),
            Axis::Position => convolve_x(p, &spec, hbar),
        }
    };
    let mut evaluations = Vec::new();
    let verdict = |sigma: f64, evals: &mut Vec<(f64, bool)>| -> Result<PositivityReport> {
        let report = positivity_report(&convolved(sigma)?, epsilon)?;
        evals.push((sigma, report.positive));
        Ok(report)
    };

    let lo_report = verdict(lo, &mut evaluations)?;
    if lo_report.positive {
        return Ok(MinGrainResult {
            sigma_min: lo,
            evaluations,
            monotone: true,
            degenerate_bracket: true,
        });
    }
    let hi_report = verdict(hi, &mut evaluations)?;
    if !hi_report.positive {
        return Err(Error::Bracketing {
            lo,
            hi,
            lo_report: Box::new(lo_report),
            hi_report: Box::new(hi_report),
        });
    }

    let (mut lo, mut hi) = (lo, hi);
    while (hi - lo) > 1e-3 * hi {
        let mid = 0.5 * (lo + hi);
        if verdict(mid, &mut evaluations)?.positive {
            hi = mid;
        } else {
            lo = mid;
        }
    }

    // Verdicts sorted by sigma must be a block of negatives followed by a
    // block of positives.
    let mut sorted = evaluations.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let monotone = sorted.windows(2).all(|w| !w[0].1 || w[1].1);

    Ok(MinGrainResult {
        sigma_min: hi,
        evaluations,
        monotone,
        degenerate_bracket: false,
    })
}
