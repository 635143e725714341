//! Fisher information of phase profiles: the channel-capacity functional by
//! quadrature, the boundary closed form, the product-domain cross term, and a
//! Monte Carlo estimate.
//!
//! Conventions. [`fisher_quadrature`] keeps the full prefactor,
//!
//! ```text
//! I = 8/hbar * integral dx dz [ |dPsi/dx|^2 - (2/hbar)^2 |dPsi/dz|^2 ]
//! ```
//!
//! while [`fisher_cross_term`] and [`fisher_closed_form`] follow the
//! constant-free boundary algebra. For a real state on the matched rectangle
//! `z0 = 2 x0 / hbar` the two routes differ by the fixed ratio
//! [`QUAD_TO_BOUNDARY_RATIO`]` = 32 / hbar^2` - up to the domain caveat below.
//!
//! Domain caveat: quadrature integrates over the `(x, z)` rectangle, whose
//! image in the characteristic variables `w = x + hbar z/2`, `v = x - hbar z/2`
//! is a rotated square, while the cross term integrates over the product
//! domain `[a,b] x [a,b]`. The two domains only agree in measure-weighted
//! value for states where both integrals vanish (the boundary class); for
//! general states both numbers are reported rather than reconciled.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::hologram::{phase_profile, HologramField};
use crate::states::Psi;

/// `I_quadrature / I_boundary` for real states on the matched rectangle,
/// as a function of `hbar`: `32 / hbar^2`.
pub fn quad_to_boundary_ratio(hbar: f64) -> f64 {
    32.0 / (hbar * hbar)
}

/// Fraction of stencil-ineligible points above which results are rejected.
pub const MASKED_FRACTION_LIMIT: f64 = 0.05;

/// Fisher diagnostics for one state on one matched rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct FisherResult {
    pub i_quadrature: f64,
    pub i_closed_form: f64,
    pub x_half_extent: f64,
    pub z_half_extent: f64,
    pub hbar: f64,
    pub masked_fraction: f64,
}

// ---------------------------------------------------------------------------
// Quadrature and Monte Carlo
// ---------------------------------------------------------------------------

/// Integrand samples `|Psi_x|^2 - (2/hbar)^2 |Psi_z|^2` (without the `8/hbar`
/// prefactor) at every point whose derivative stencils are available, `None`
/// elsewhere.
fn integrand_samples(field: &HologramField) -> Vec<Option<f64>> {
    let nx = field.grid_x().count();
    let nz = field.grid_z().count();
    let dx = field.grid_x().step();
    let dz = field.grid_z().step();
    let c = (2.0 / field.hbar()).powi(2);
    let phase = field.phase().values();
    let mask = field.mask();
    let idx = |ix: usize, iz: usize| ix * nz + iz;

    type Fetch<'a> = &'a dyn Fn(isize) -> Option<Complex64>;
    // Second-order derivative along one axis: central where possible,
    // one-sided at edges or next to masked points.
    let deriv = |get: Fetch, i: usize, n: usize, h: f64| -> Option<Complex64> {
        let i = i as isize;
        let center = get(i)?;
        match (get(i - 1), get(i + 1)) {
            (Some(m), Some(p)) => Some((p - m) / (2.0 * h)),
            (None, Some(p)) if (i + 2) < n as isize => {
                let pp = get(i + 2)?;
                Some((-3.0 * center + 4.0 * p - pp) / (2.0 * h))
            }
            (Some(m), None) if i >= 2 => {
                let mm = get(i - 2)?;
                Some((3.0 * center - 4.0 * m + mm) / (2.0 * h))
            }
            _ => None,
        }
    };

    crate::par::map_indexed(nx * nz, |k| {
        let (ix, iz) = (k / nz, k % nz);
        if mask[k] {
            return None;
        }
        let col = |i: isize| -> Option<Complex64> {
            if i < 0 || i >= nx as isize {
                None
            } else {
                let kk = idx(i as usize, iz);
                (!mask[kk]).then(|| phase[kk])
            }
        };
        let row = |j: isize| -> Option<Complex64> {
            if j < 0 || j >= nz as isize {
                None
            } else {
                let kk = idx(ix, j as usize);
                (!mask[kk]).then(|| phase[kk])
            }
        };
        let px = deriv(&col, ix, nx, dx)?;
        let pz = deriv(&row, iz, nz, dz)?;
        Some(px.norm_sqr() - c * pz.norm_sqr())
    })
}

fn eligible_fraction(samples: &[Option<f64>]) -> f64 {
    samples.iter().filter(|s| s.is_some()).count() as f64 / samples.len() as f64
}

/// Information functional by trapezoidal quadrature of central-difference
/// gradients over eligible points, with the full `8/hbar` prefactor.
pub fn fisher_quadrature(field: &HologramField) -> Result<f64> {
    let samples = integrand_samples(field);
    let excluded = 1.0 - eligible_fraction(&samples);
    if excluded >= MASKED_FRACTION_LIMIT {
        return Err(Error::UnreliableDomain(excluded));
    }
    let nx = field.grid_x().count();
    let nz = field.grid_z().count();
    let weight = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let rows: Vec<f64> = crate::par::map_indexed(nx, |ix| {
        let mut acc = 0.0;
        for iz in 0..nz {
            if let Some(v) = samples[ix * nz + iz] {
                acc += weight(iz, nz) * v;
            }
        }
        acc * weight(ix, nx)
    });
    let sum = crate::grid::pairwise_sum(&rows) * field.grid_x().step() * field.grid_z().step();
    Ok(8.0 / field.hbar() * sum)
}

/// Monte Carlo estimate of the same functional: uniform draws over eligible
/// grid points, scaled by the eligible domain area. Returns
/// `(estimate, standard_error)`.
pub fn fisher_monte_carlo(field: &HologramField, n: usize, seed: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let samples = integrand_samples(field);
    let frac = eligible_fraction(&samples);
    let excluded = 1.0 - frac;
    if excluded >= MASKED_FRACTION_LIMIT {
        return Err(Error::UnreliableDomain(excluded));
    }
    let eligible: Vec<f64> = samples.iter().filter_map(|s| *s).collect();
    let area = field.grid_x().span() * field.grid_z().span() * frac;
    let scale = 8.0 / field.hbar() * area;

    const CHUNK: usize = 8192;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<(f64, f64, usize)> = crate::par::map_indexed(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = CHUNK.min(n - c * CHUNK);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..count {
            let i = rng.gen_range(0..eligible.len());
            let v = eligible[i];
            sum += v;
            sum_sq += v * v;
        }
        (sum, sum_sq, count)
    });
    let sum: f64 = parts.iter().map(|p| p.0).sum();
    let sum_sq: f64 = parts.iter().map(|p| p.1).sum();
    let mean = sum / n as f64;
    let var = if n > 1 {
        ((sum_sq - sum * sum / n as f64) / (n as f64 - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((scale * mean, scale * (var / n as f64).sqrt()))
}

// ---------------------------------------------------------------------------
// Boundary algebra
// ---------------------------------------------------------------------------

const NODE_REL_THRESHOLD: f64 = 1e-10;
const REAL_REL_THRESHOLD: f64 = 1e-12;

/// `[integral_a^b (ln psi(w))' dw]^2` by quadrature of the log-derivative,
/// with the conjugate-term analog added for complex states. Interior nodes of
/// `psi` make the integrand non-integrable and are rejected.
pub fn fisher_cross_term(psi: &Psi, a: f64, b: f64, n: usize) -> Result<f64> {
    if b <= a || !a.is_finite() || !b.is_finite() || n < 8 {
        return Err(Error::InvalidArgument(
            "need b > a and at least 8 quadrature points".into(),
        ));
    }
    let h = (b - a) / (n - 1) as f64;
    let values: Vec<Complex64> = (0..n).map(|k| psi.eval(a + k as f64 * h)).collect();
    let max_mag = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if max_mag <= 0.0 {
        return Err(Error::DegenerateState("state vanishes on [a, b]".into()));
    }
    if let Some(k) = values
        .iter()
        .position(|v| v.norm() < NODE_REL_THRESHOLD * max_mag)
    {
        return Err(Error::NodeSingularity(format!(
            "psi vanishes near w = {:.6}; psi'/psi is not integrable there",
            a + k as f64 * h
        )));
    }
    let real = values
        .iter()
        .all(|v| v.im.abs() < REAL_REL_THRESHOLD * max_mag);
    if real {
        // a node between grid points shows up as a sign change
        if let Some(k) = values.windows(2).position(|w| w[0].re * w[1].re < 0.0) {
            return Err(Error::NodeSingularity(format!(
                "psi changes sign between w = {:.6} and the next point",
                a + k as f64 * h
            )));
        }
    }

    // log samples: ln|psi| and (for complex states) the unwrapped argument
    let logs: Vec<Complex64> = {
        let mut out = Vec::with_capacity(n);
        let mut prev_arg = values[0].arg();
        for (k, v) in values.iter().enumerate() {
            let arg = if real {
                0.0
            } else {
                let raw = v.arg();
                let mut delta = raw - prev_arg;
                delta -=
                    (delta / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
                let unwrapped = if k == 0 { raw } else { prev_arg + delta };
                prev_arg = unwrapped;
                unwrapped
            };
            out.push(Complex64::new(v.norm().ln(), arg));
        }
        out
    };

    let deriv = |k: usize| -> Complex64 {
        if k == 0 {
            (-3.0 * logs[0] + 4.0 * logs[1] - logs[2]) / (2.0 * h)
        } else if k == n - 1 {
            (3.0 * logs[n - 1] - 4.0 * logs[n - 2] + logs[n - 3]) / (2.0 * h)
        } else {
            (logs[k + 1] - logs[k - 1]) / (2.0 * h)
        }
    };
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        acc += w * deriv(k);
    }
    let total = acc * h;
    if real {
        Ok((total * total).re)
    } else {
        // add the same expression in psi*: T^2 + conj(T)^2 = 2 Re(T^2)
        Ok(2.0 * (total * total).re)
    }
}

/// Boundary closed form `ln^2[psi(b)/psi(-b)]`, with the ratio taken as a
/// limit along the approach to `+-b` when both endpoint values vanish.
/// Complex states add the conjugate expression, giving `2 Re(Ln^2 r)`.
pub fn fisher_closed_form(psi: &Psi, b: f64) -> Result<f64> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "boundary must be positive, got {b}"
        )));
    }
    // magnitude scale from a coarse scan of [-b, b]
    let probes = 257;
    let mut max_mag: f64 = 0.0;
    let mut max_im: f64 = 0.0;
    for k in 0..probes {
        let x = -b + 2.0 * b * k as f64 / (probes - 1) as f64;
        let v = psi.eval(x);
        max_mag = max_mag.max(v.norm());
        max_im = max_im.max(v.im.abs());
    }
    if max_mag <= 0.0 {
        return Err(Error::DegenerateState("state vanishes on [-b, b]".into()));
    }
    let real = max_im < REAL_REL_THRESHOLD * max_mag;
    let thresh = 1e-9 * max_mag;

    let ratio_at = |w: f64| -> Option<Complex64> {
        let plus = psi.eval(w);
        let minus = psi.eval(-w);
        (plus.norm() > thresh && minus.norm() > thresh).then(|| plus / minus)
    };

    let ratio = if let Some(r) = ratio_at(b) {
        r
    } else {
        // both boundary values vanish: follow the ratio limit inward
        let mut collected: Vec<Complex64> = Vec::new();
        for j in 1..=512 {
            let w = b * (1.0 - j as f64 / 1024.0);
            if let Some(r) = ratio_at(w) {
                collected.push(r);
                if collected.len() >= 4 {
                    break;
                }
            } else if !collected.is_empty() {
                break;
            }
        }
        if collected.len() < 2 {
            return Err(Error::IndeterminateBoundary(format!(
                "ratio psi(w)/psi(-w) undefined along the approach to b = {b}"
            )));
        }
        let last = collected[collected.len() - 1];
        let prev = collected[collected.len() - 2];
        if (last - prev).norm() > 1e-6 * (1.0 + last.norm()) {
            return Err(Error::IndeterminateBoundary(format!(
                "ratio does not converge approaching b = {b}: {prev} vs {last}"
            )));
        }
        last
    };

    if real && ratio.re > 0.0 {
        let l = ratio.re.ln();
        Ok(l * l)
    } else {
        let l = ratio.ln();
        let sq = l * l;
        if real {
            // sign-flipping real boundary (outside the boundary class):
            // principal-branch value, documented rather than hidden
            Ok(sq.re)
        } else {
            Ok(2.0 * sq.re)
        }
    }
}

/// Certifies `I = 0` for one state: the closed form must vanish within `tol`
/// and quadrature on the matched rectangle `z0 = 2 x0 / hbar` must shrink
/// under one grid refinement (`n -> 2n` points per axis).
pub fn check_i_zero(
    psi: &Psi,
    x_half: f64,
    hbar: f64,
    tol: f64,
    n: usize,
) -> Result<(bool, FisherResult)> {
    if x_half <= 0.0 || tol <= 0.0 || !x_half.is_finite() || !tol.is_finite() {
        return Err(Error::InvalidArgument(
            "need positive extent and tolerance".into(),
        ));
    }
    let z_half = 2.0 * x_half / hbar;
    let b = x_half + 0.5 * hbar * z_half;

    let quad_at = |count: usize| -> Result<(f64, f64)> {
        let gx = Grid1D::inclusive(-x_half, x_half, count)?;
        let gz = Grid1D::inclusive(-z_half, z_half, count)?;
        let field = phase_profile(psi, &gx, &gz, hbar)?;
        Ok((fisher_quadrature(&field)?, field.masked_fraction()))
    };
    let (i_h, _) = quad_at(n)?;
    let (i_h2, masked_fraction) = quad_at(2 * n)?;
    let i_closed_form = fisher_closed_form(psi, b)?;

    let converging = i_h2.abs() <= 0.5 * i_h.abs() + tol;
    let ok = i_closed_form.abs() <= tol && converging;
    Ok((
        ok,
        FisherResult {
            i_quadrature: i_h2,
            i_closed_form,
            x_half_extent: x_half,
            z_half_extent: z_half,
            hbar,
            masked_fraction,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ComplexField2D;
    use crate::states::{position_evaluator, StateSpec};

    fn evaluator(spec: &StateSpec) -> Psi {
        let wide = Grid1D::symmetric(0.0, 24.0 / 1024.0, 1024).unwrap();
        position_evaluator(spec, &wide).unwrap()
    }

    fn plane_wave_like() -> StateSpec {
        StateSpec::Gaussian {
            center: 0.0,
            width: 1e3,
            momentum: 1.0,
            chirp: 0.0,
        }
    }

    fn shifted_gaussian() -> StateSpec {
        StateSpec::Gaussian {
            center: 0.5,
            width: 1.0,
            momentum: 0.0,
            chirp: 0.0,
        }
    }

    #[test]
    fn plane_wave_quadrature_hand_value() {
        let psi = evaluator(&plane_wave_like());
        let gx = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let gz = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let field = phase_profile(&psi, &gx, &gz, 1.0).unwrap();
        let i = fisher_quadrature(&field).unwrap();
        assert!((i + 128.0).abs() < 1e-6, "I = {i}");
    }

    #[test]
    fn constant_phase_has_zero_information() {
        let gx = Grid1D::inclusive(-1.0, 1.0, 32).unwrap();
        let gz = Grid1D::inclusive(-1.0, 1.0, 32).unwrap();
        let phase = ComplexField2D::new(gx, gz, vec![Complex64::new(0.7, -0.3); 32 * 32]).unwrap();
        let field = HologramField::from_phase(phase, 1.0).unwrap();
        assert!(fisher_quadrature(&field).unwrap().abs() < 1e-12);
        // one-sided edge stencils of a constant leave ~1e-16 cancellation
        // noise, squared into the integrand
        let (est, se) = fisher_monte_carlo(&field, 1000, 3).unwrap();
        assert!(est.abs() < 1e-20);
        assert!(se.abs() < 1e-20);
    }

    #[test]
    fn centered_gaussian_matched_rectangle_vanishes() {
        let psi = evaluator(&StateSpec::Gaussian {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
            chirp: 0.0,
        });
        // quadratic phase profile: even the coarse grid is exact
        let gx = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let gz = Grid1D::inclusive(-2.0, 2.0, 64).unwrap();
        let field = phase_profile(&psi, &gx, &gz, 1.0).unwrap();
        let i = fisher_quadrature(&field).unwrap();
        assert!(i.abs() < 1e-9, "I = {i}");
    }

    #[test]
    fn cross_term_shifted_gaussian() {
        let psi = evaluator(&shifted_gaussian());
        let i = fisher_cross_term(&psi, -2.0, 2.0, 2048).unwrap();
        assert!((i - 4.0).abs() < 1e-6, "I = {i}");
    }

    #[test]
    fn cross_term_even_state_vanishes() {
        let psi = evaluator(&StateSpec::Gaussian {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
            chirp: 0.0,
        });
        let i = fisher_cross_term(&psi, -2.0, 2.0, 2048).unwrap();
        assert!(i.abs() < 1e-10, "I = {i}");
    }

    #[test]
    fn cross_term_rejects_interior_nodes() {
        let psi = evaluator(&StateSpec::HarmonicOscillator { n: 1, width: 1.0 });
        assert!(matches!(
            fisher_cross_term(&psi, -2.0, 2.0, 512),
            Err(Error::NodeSingularity(_))
        ));
    }

    #[test]
    fn closed_form_values() {
        // shifted Gaussian: ln psi(2)/psi(-2) = 2 => I = 4
        let psi = evaluator(&shifted_gaussian());
        let i = fisher_closed_form(&psi, 2.0).unwrap();
        assert!((i - 4.0).abs() < 1e-9, "I = {i}");

        // any even state: exactly zero
        let even = evaluator(&StateSpec::Gaussian {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
            chirp: 0.0,
        });
        assert_eq!(fisher_closed_form(&even, 2.0).unwrap(), 0.0);

        // exponential tilt e^{x/2}: ratio e at b = 1 => I = 1
        let grid = Grid1D::inclusive(-1.2, 1.2, 4096).unwrap();
        let values: Vec<Complex64> = grid
            .points()
            .map(|x| Complex64::new((0.5 * x).exp(), 0.0))
            .collect();
        let tilt = StateSpec::Tabulated { grid, values };
        let psi = position_evaluator(&tilt, &grid).unwrap();
        let i = fisher_closed_form(&psi, 1.0).unwrap();
        assert!((i - 1.0).abs() < 1e-9, "I = {i}");
    }

    #[test]
    fn closed_form_box_mode_symmetric_limit() {
        let psi = evaluator(&StateSpec::BoxMode {
            n: 1,
            halfwidth: 1.0,
        });
        let i = fisher_closed_form(&psi, 1.0).unwrap();
        assert!(i.abs() < 1e-10, "I = {i}");
    }

    #[test]
    fn cross_term_matches_closed_form_at_box_limits() {
        let psi = evaluator(&StateSpec::BoxMode {
            n: 1,
            halfwidth: 1.0,
        });
        // limits approaching +-1: the ratio stays 1, so I -> 0
        for b in [0.9, 0.95, 0.99] {
            let i = fisher_cross_term(&psi, -b, b, 2048).unwrap();
            assert!(i.abs() < 1e-8, "b={b}: I = {i}");
        }
    }

    #[test]
    fn check_i_zero_box_and_shifted() {
        let boxm = evaluator(&StateSpec::BoxMode {
            n: 1,
            halfwidth: 1.0,
        });
        let (ok, result) = check_i_zero(&boxm, 0.45, 1.0, 1e-6, 64).unwrap();
        assert!(ok, "box mode should certify: {result:?}");

        let even = evaluator(&StateSpec::Gaussian {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
            chirp: 0.0,
        });
        let (ok, _) = check_i_zero(&even, 1.0, 1.0, 1e-6, 64).unwrap();
        assert!(ok, "centered gaussian should certify");

        let shifted = evaluator(&shifted_gaussian());
        let (ok, result) = check_i_zero(&shifted, 1.0, 1.0, 1e-6, 64).unwrap();
        assert!(!ok);
        // b = 2 x_half = 2: I = (2 b c)^2 = 4
        assert!((result.i_closed_form - 4.0).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_agrees_with_quadrature() {
        let psi = evaluator(&plane_wave_like());
        let gx = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let gz = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let field = phase_profile(&psi, &gx, &gz, 1.0).unwrap();
        let quad = fisher_quadrature(&field).unwrap();
        let (est, se) = fisher_monte_carlo(&field, 100_000, 11).unwrap();
        assert!(se < 1.0, "se = {se}");
        assert!(
            (est - quad).abs() <= 3.0 * se + 1e-7,
            "est {est} quad {quad} se {se}"
        );
        // determinism
        let (est2, se2) = fisher_monte_carlo(&field, 100_000, 11).unwrap();
        assert_eq!(est.to_bits(), est2.to_bits());
        assert_eq!(se.to_bits(), se2.to_bits());
    }

    #[test]
    fn monte_carlo_even_state_consistent_with_zero() {
        let psi = evaluator(&StateSpec::Gaussian {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
            chirp: 0.0,
        });
        let gx = Grid1D::inclusive(-1.0, 1.0, 64).unwrap();
        let gz = Grid1D::inclusive(-2.0, 2.0, 64).unwrap();
        let field = phase_profile(&psi, &gx, &gz, 1.0).unwrap();
        let (est, se) = fisher_monte_carlo(&field, 1_000_000, 5).unwrap();
        assert!(est.abs() <= 3.0 * se, "est {est} se {se}");
    }
}
