//! The complex hologram `Z(x,z)`, its phase profile, the intensity PDF, the
//! measurement sampler, and the inverse reconstruction of `p(x,mu)`.
//!
//! For a pure state the hologram is the correlation
//! `Z(x,z) = psi*(x - hbar z/2) psi(x + hbar z/2)` and its phase profile is
//! `Psi(x,z) = -i ln Z`, which is complex in general: the real part is the
//! unwrapped argument of `Z`, the imaginary part `-ln |Z|`. The principal
//! logarithm is taken at `z = 0` and unwrapped outward along `z` in each
//! `x` row; points where either amplitude factor falls below `1e-12` of the
//! peak are masked instead of producing `ln 0` infinities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{integrate_2d, pairwise_sum, ComplexField2D, ConjugatePair, Grid1D, RealField2D};
use crate::par;
use crate::states::Psi;
use crate::wigner::correlation_rows;

/// Amplitude threshold (relative to the peak) below which the phase is
/// treated as undefined.
pub const NODE_THRESHOLD: f64 = 1e-12;

/// A hologram with its phase profile and node mask.
#[derive(Debug, Clone)]
pub struct HologramField {
    z: ComplexField2D,
    phase: ComplexField2D,
    mask: Vec<bool>,
    hbar: f64,
}

impl HologramField {
    /// Hologram values `Z(x,z)`.
    pub fn z(&self) -> &ComplexField2D {
        &self.z
    }

    /// Phase profile `Psi(x,z)`; entries under the mask are zero and
    /// meaningless.
    pub fn phase(&self) -> &ComplexField2D {
        &self.phase
    }

    /// `true` marks grid points where the phase is undefined.
    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn grid_x(&self) -> &Grid1D {
        self.z.grid_x()
    }

    pub fn grid_z(&self) -> &Grid1D {
        self.z.grid_y()
    }

    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|&&m| m).count() as f64 / self.mask.len() as f64
    }

    /// Wraps an explicit phase field (no masked points); the hologram values
    /// are reconstructed as `exp(i Psi)`. Used for synthetic fields such as
    /// negative controls of the wave-equation check.
    pub fn from_phase(phase: ComplexField2D, hbar: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hbar must be positive, got {hbar}"
            )));
        }
        let values: Vec<Complex64> = phase
            .values()
            .iter()
            .map(|p| (Complex64::new(0.0, 1.0) * p).exp())
            .collect();
        let z = ComplexField2D::new(*phase.grid_x(), *phase.grid_y(), values)?;
        let mask = vec![false; phase.values().len()];
        Ok(Self {
            z,
            phase,
            mask,
            hbar,
        })
    }
}

/// Hologram of a general density: the row-wise `mu -> z` inverse transform
/// `Z(x,z) = integral dmu p(x,mu) e^{i z mu}`.
pub fn hologram_from_pdf(p: &RealField2D, pair: &ConjugatePair) -> Result<ComplexField2D> {
    if !p.grid_y().approx_eq(pair.reciprocal(), 1e-12) {
        return Err(Error::InvalidArgument(
            "density mu axis does not match the pair's reciprocal grid".into(),
        ));
    }
    let mass = integrate_2d(p);
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "hologram_from_pdf expects a normalized density, got mass {mass:.9}"
        )));
    }
    let mut values: Vec<Complex64> = p.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    crate::fourier::inverse_rows(&mut values, pair);
    ComplexField2D::new(*p.grid_x(), *pair.direct(), values)
}

/// Pure-state hologram `psi*(x - hbar z/2) psi(x + hbar z/2)`, evaluated
/// directly with no transform.
pub fn hologram_from_state(
    psi: &Psi,
    x_grid: &Grid1D,
    pair: &ConjugatePair,
) -> Result<ComplexField2D> {
    let hbar = pair.hbar();
    let values = correlation_rows(
        |x| psi.eval(x).conj(),
        |x| psi.eval(x),
        x_grid,
        pair.direct(),
        hbar,
    );
    ComplexField2D::new(*x_grid, *pair.direct(), values)
}

/// Recovers the density: the row-wise `z -> mu` transform
/// `p(x,mu) = 1/(2 pi) integral dz Z(x,z) e^{-i z mu}`.
pub fn reconstruct_pdf(z: &ComplexField2D, pair: &ConjugatePair) -> Result<RealField2D> {
    if !z.grid_y().approx_eq(pair.direct(), 1e-12) {
        return Err(Error::InvalidArgument(
            "hologram z axis does not match the pair's direct grid".into(),
        ));
    }
    let mut values = z.values().to_vec();
    crate::fourier::forward_rows(&mut values, pair);
    let complex = ComplexField2D::new(*z.grid_x(), *pair.reciprocal(), values)?;
    let residue = complex.imaginary_residue();
    if residue > 1e-8 {
        return Err(Error::NumericalConsistency(format!(
            "reconstruct_pdf: imaginary residue {residue:.3e} signals a non-Hermitian hologram"
        )));
    }
    Ok(complex.into_real())
}

/// Phase profile `Psi(x,z) = -i ln[psi(x + hbar z/2) psi*(x - hbar z/2)]` on
/// an arbitrary `(x, z)` rectangle, with per-row unwrapping along `z` and
/// node masking.
pub fn phase_profile(
    psi: &Psi,
    x_grid: &Grid1D,
    z_grid: &Grid1D,
    hbar: f64,
) -> Result<HologramField> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let nz = z_grid.count();
    let nx = x_grid.count();
    let offsets: Vec<f64> = z_grid.points().map(|z| 0.5 * hbar * z).collect();
    let mut values = vec![Complex64::new(0.0, 0.0); nx * nz];
    let mut min_factor = vec![0.0f64; nx * nz];
    let mut peak = 0.0f64;
    {
        let rows: Vec<(Vec<Complex64>, Vec<f64>, f64)> = par::map_indexed(nx, |ix| {
            let x = x_grid.point(ix);
            let mut vals = Vec::with_capacity(nz);
            let mut mins = Vec::with_capacity(nz);
            let mut row_max = 0.0f64;
            for u in &offsets {
                let minus = psi.eval(x - u);
                let plus = psi.eval(x + u);
                vals.push(minus.conj() * plus);
                let (lo, hi) = (minus.norm().min(plus.norm()), minus.norm().max(plus.norm()));
                mins.push(lo);
                row_max = row_max.max(hi);
            }
            (vals, mins, row_max)
        });
        for (ix, (vals, mins, row_max)) in rows.into_iter().enumerate() {
            values[ix * nz..(ix + 1) * nz].copy_from_slice(&vals);
            min_factor[ix * nz..(ix + 1) * nz].copy_from_slice(&mins);
            peak = peak.max(row_max);
        }
    }

    // Node mask: either amplitude factor below NODE_THRESHOLD times the
    // largest factor magnitude seen anywhere on the rectangle.
    let thresh = NODE_THRESHOLD * peak;
    let mask: Vec<bool> = min_factor.iter().map(|&m| m < thresh).collect();

    // Anchor index: the z grid point closest to zero.
    let anchor = z_grid.nearest_index(0.0);

    let mut phase = vec![Complex64::new(0.0, 0.0); nx * nz];
    let mask_ref = &mask;
    let values_ref = &values;
    par::for_each_row(&mut phase, nz, |ix, row| {
        let offset = ix * nz;
        // Unwrap each contiguous unmasked segment, anchored at the element
        // nearest z = 0 within the segment.
        let mut j = 0;
        while j < nz {
            if mask_ref[offset + j] {
                j += 1;
                continue;
            }
            let seg_start = j;
            while j < nz && !mask_ref[offset + j] {
                j += 1;
            }
            let seg_end = j; // exclusive
            let seg_anchor = anchor.clamp(seg_start, seg_end - 1);
            let mut args = vec![0.0; seg_end - seg_start];
            args[seg_anchor - seg_start] = values_ref[offset + seg_anchor].arg();
            for k in (seg_anchor + 1)..seg_end {
                let prev = args[k - 1 - seg_start];
                let raw = values_ref[offset + k].arg();
                let mut delta = raw - prev;
                delta -=
                    (delta / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
                args[k - seg_start] = prev + delta;
            }
            for k in (seg_start..seg_anchor).rev() {
                let next = args[k + 1 - seg_start];
                let raw = values_ref[offset + k].arg();
                let mut delta = raw - next;
                delta -=
                    (delta / (2.0 * std::f64::consts::PI)).round() * 2.0 * std::f64::consts::PI;
                args[k - seg_start] = next + delta;
            }
            for k in seg_start..seg_end {
                let v = values_ref[offset + k];
                row[k] = Complex64::new(args[k - seg_start], -v.norm().ln());
            }
        }
    });

    // A row with no unmasked point means psi vanishes along the whole row.
    for ix in 0..nx {
        if mask[ix * nz..(ix + 1) * nz].iter().all(|&m| m) {
            return Err(Error::DegenerateState(format!(
                "phase profile row x = {} is fully masked",
                x_grid.point(ix)
            )));
        }
    }

    let z = ComplexField2D::new(*x_grid, *z_grid, values)?;
    let phase = ComplexField2D::new(*x_grid, *z_grid, phase)?;
    Ok(HologramField {
        z,
        phase,
        mask,
        hbar,
    })
}

/// Maximum absolute residual of `d2 Psi/dx2 - (2/hbar)^2 d2 Psi/dz2` over
/// interior points whose full five-point stencil is unmasked, using
/// second-order central differences. Solutions of the traveling-wave form
/// have residuals vanishing at second order under grid refinement.
pub fn wave_equation_residual(field: &HologramField) -> f64 {
    let nx = field.grid_x().count();
    let nz = field.grid_z().count();
    let dx2 = field.grid_x().step().powi(2);
    let dz2 = field.grid_z().step().powi(2);
    let c = (2.0 / field.hbar()).powi(2);
    let phase = field.phase().values();
    let mask = field.mask();
    let idx = |ix: usize, iz: usize| ix * nz + iz;

    let row_max: Vec<f64> = par::map_indexed(nx.saturating_sub(2), |r| {
        let ix = r + 1;
        let mut m: f64 = 0.0;
        for iz in 1..nz - 1 {
            if mask[idx(ix, iz)]
                || mask[idx(ix - 1, iz)]
                || mask[idx(ix + 1, iz)]
                || mask[idx(ix, iz - 1)]
                || mask[idx(ix, iz + 1)]
            {
                continue;
            }
            let p = phase[idx(ix, iz)];
            let pxx = (phase[idx(ix + 1, iz)] - 2.0 * p + phase[idx(ix - 1, iz)]) / dx2;
            let pzz = (phase[idx(ix, iz + 1)] - 2.0 * p + phase[idx(ix, iz - 1)]) / dz2;
            m = m.max((pxx - c * pzz).norm());
        }
        m
    });
    row_max.into_iter().fold(0.0, f64::max)
}

/// Intensity PDF `P = |Psi|^2` on unmasked points (zero on masked ones),
/// normalized to unit integral.
pub fn intensity(field: &HologramField) -> Result<RealField2D> {
    let values: Vec<f64> = field
        .phase()
        .values()
        .iter()
        .zip(field.mask())
        .map(|(p, &m)| if m { 0.0 } else { p.norm_sqr() })
        .collect();
    let mut out = RealField2D::new(*field.grid_x(), *field.grid_z(), values)?;
    let mass = integrate_2d(&out);
    if mass <= 0.0 {
        return Err(Error::DegenerateState(
            "intensity field is identically zero".into(),
        ));
    }
    out.scale(1.0 / mass);
    Ok(out)
}

/// Draws `n` points from the discrete distribution `P * cell_area` by
/// inverse-CDF over flattened cells, with uniform jitter inside each cell.
///
/// Draws are organized in fixed-size chunks, each on its own counter-based
/// stream of a seeded generator, so the output is a pure function of
/// `(P, n, seed)` regardless of how chunks are scheduled.
pub fn sample_positions(p: &RealField2D, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mass = integrate_2d(p);
    if (mass - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidArgument(format!(
            "sample_positions expects a normalized density, got mass {mass:.9}"
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    // Cell weights; tiny negative quadrature wiggle is clamped away.
    let weights: Vec<f64> = p.values().iter().map(|&v| v.max(0.0)).collect();
    let total = pairwise_sum(&weights);
    if total <= 0.0 {
        return Err(Error::DegenerateState(
            "density has no positive mass".into(),
        ));
    }
    let mut cdf = Vec::with_capacity(weights.len());
    let mut acc = 0.0;
    for w in &weights {
        acc += w;
        cdf.push(acc);
    }
    let last = *cdf.last().unwrap();

    let gx = *p.grid_x();
    let gz = *p.grid_y();
    let nz = gz.count();
    const CHUNK: usize = 4096;
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<(f64, f64)>> = par::map_indexed(chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(c as u64);
        let count = CHUNK.min(n - c * CHUNK);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let u: f64 = rng.gen::<f64>() * last;
            let cell = match cdf.binary_search_by(|probe| probe.partial_cmp(&u).unwrap()) {
                Ok(i) => i,
                Err(i) => i.min(cdf.len() - 1),
            };
            let ix = cell / nz;
            let iz = cell % nz;
            let jx: f64 = rng.gen::<f64>() - 0.5;
            let jz: f64 = rng.gen::<f64>() - 0.5;
            out.push((gx.point(ix) + jx * gx.step(), gz.point(iz) + jz * gz.step()));
        }
        out
    });
    Ok(parts.concat())
}
