//! Catalog of analytic pure states and samplers onto grids.
//!
//! Position amplitudes for the leaf catalog states (Gaussian, harmonic
//! oscillator, box mode) are continuum-normalized in closed form, so they can
//! be evaluated at arbitrary points, including points far off any sampling
//! grid. Superpositions and tabulated states are normalized numerically on a
//! reference grid.
//!
//! Conventions, fixed once:
//!
//! * momentum partner: `phi(mu) = (2 pi hbar)^{-1/2} integral dx psi(x) e^{-i mu x / hbar}`,
//!   so `|phi|^2` is a normalized PDF under the same quadrature rule as `|psi|^2`;
//! * a Gaussian's momentum shift `m` enters as `exp(i m x / hbar)`;
//! * the chirp parameter enters as the multiplicative factor `exp(i c x^2 / 2)`.
//!   This is one standard convention among several; it is a convention choice,
//!   not a derived quantity, and is noted here because nothing else pins it down.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::CenteredFft;
use crate::grid::{pairwise_sum, ComplexField1D, ConjugatePair, Grid1D};

/// One term of a superposition: `coefficient * state`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTerm {
    pub coefficient: Complex64,
    pub state: StateSpec,
}

/// Symbolic description of a pure state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StateSpec {
    /// Normalized Gaussian `(pi s^2)^{-1/4} exp(-(x-c)^2/(2 s^2))`, optionally
    /// boosted by `exp(i m x / hbar)` and chirped by `exp(i chirp x^2 / 2)`.
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default)]
        momentum: f64,
        #[serde(default)]
        chirp: f64,
    },
    /// Harmonic-oscillator eigenstate `n` with length scale `width`.
    HarmonicOscillator {
        n: u32,
        width: f64,
    },
    /// Odd cosine box mode `b^{-1/2} cos(n pi x / 2b)` supported on `[-b, b]`.
    BoxMode {
        n: u32,
        #[serde(rename = "b")]
        halfwidth: f64,
    },
    Superposition {
        terms: Vec<SuperpositionTerm>,
    },
    Tabulated {
        grid: Grid1D,
        values: Vec<Complex64>,
    },
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            StateSpec::Gaussian {
                center,
                width,
                momentum,
                chirp,
            } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "Gaussian width must be positive, got {width}"
                    )));
                }
                if !center.is_finite() || !momentum.is_finite() || !chirp.is_finite() {
                    return Err(Error::InvalidArgument(
                        "Gaussian parameters must be finite".into(),
                    ));
                }
            }
            StateSpec::HarmonicOscillator { n, width } => {
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "oscillator width must be positive, got {width}"
                    )));
                }
                if *n > 512 {
                    return Err(Error::InvalidArgument(format!(
                        "oscillator index {n} too large (max 512)"
                    )));
                }
            }
            StateSpec::BoxMode { n, halfwidth } => {
                if *n == 0 || n % 2 == 0 {
                    return Err(Error::InvalidArgument(format!(
                        "box mode index must be a positive odd integer, got {n}"
                    )));
                }
                if !(halfwidth.is_finite() && *halfwidth > 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "box halfwidth must be positive, got {halfwidth}"
                    )));
                }
            }
            StateSpec::Superposition { terms } => {
                if terms.is_empty() {
                    return Err(Error::InvalidArgument(
                        "superposition must have terms".into(),
                    ));
                }
                for t in terms {
                    if !t.coefficient.re.is_finite() || !t.coefficient.im.is_finite() {
                        return Err(Error::InvalidArgument(
                            "superposition coefficient not finite".into(),
                        ));
                    }
                    t.state.validate()?;
                }
            }
            StateSpec::Tabulated { grid, values } => {
                grid.validate()?;
                if values.len() != grid.count() {
                    return Err(Error::InvalidArgument(format!(
                        "tabulated values ({}) do not match grid count ({})",
                        values.len(),
                        grid.count()
                    )));
                }
                if values
                    .iter()
                    .any(|v| !v.re.is_finite() || !v.im.is_finite())
                {
                    return Err(Error::InvalidArgument(
                        "tabulated values must be finite".into(),
                    ));
                }
                if values.iter().all(|v| v.norm_sqr() == 0.0) {
                    return Err(Error::DegenerateState(
                        "tabulated state is identically zero".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Amplitude with leaf catalog states continuum-normalized and
    /// superpositions/tabulated states left unnormalized.
    fn eval_raw(&self, x: f64) -> Complex64 {
        match self {
            StateSpec::Gaussian {
                center,
                width,
                momentum,
                chirp,
            } => {
                let s = *width;
                let d = x - center;
                let mag = (PI * s * s).powf(-0.25) * (-d * d / (2.0 * s * s)).exp();
                // phase uses hbar = 1 for the boost; callers that need a
                // different hbar scale the momentum parameter instead.
                let phase = momentum * x + 0.5 * chirp * x * x;
                Complex64::from_polar(mag, phase)
            }
            StateSpec::HarmonicOscillator { n, width } => {
                let xi = x / width;
                Complex64::new(hermite_function(*n, xi) / width.sqrt(), 0.0)
            }
            StateSpec::BoxMode { n, halfwidth } => {
                let b = *halfwidth;
                if x.abs() > b {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((*n as f64 * PI * x / (2.0 * b)).cos() / b.sqrt(), 0.0)
                }
            }
            StateSpec::Superposition { terms } => terms
                .iter()
                .map(|t| t.coefficient * t.state.eval_raw(x))
                .sum(),
            StateSpec::Tabulated { grid, values } => cubic_on_grid(grid, values, x),
        }
    }

    /// True when the momentum partner has a closed form in the catalog.
    fn has_closed_momentum(&self) -> bool {
        match self {
            StateSpec::Gaussian { .. } | StateSpec::HarmonicOscillator { .. } => true,
            StateSpec::Superposition { terms } => {
                terms.iter().all(|t| t.state.has_closed_momentum())
            }
            _ => false,
        }
    }

    /// Closed-form momentum amplitude, mirroring `eval_raw` normalization.
    fn eval_momentum_raw(&self, mu: f64, hbar: f64) -> Complex64 {
        match self {
            StateSpec::Gaussian {
                center,
                width,
                momentum,
                chirp,
            } => {
                let s = *width;
                let a = Complex64::new(1.0 / (2.0 * s * s), -0.5 * chirp);
                let b = Complex64::new(center / (s * s), (momentum - mu) / hbar);
                let pref = (2.0 * PI * hbar).powf(-0.5) * (PI * s * s).powf(-0.25);
                let gauss = (Complex64::new(PI, 0.0) / a).sqrt()
                    * ((b * b / (4.0 * a)) - center * center / (2.0 * s * s)).exp();
                pref * gauss
            }
            StateSpec::HarmonicOscillator { n, width } => {
                let w_mu = hbar / width;
                let xi = mu / w_mu;
                let mag = hermite_function(*n, xi) / w_mu.sqrt();
                // (-i)^n: oscillator eigenstates are Fourier eigenfunctions.
                let phase = Complex64::new(0.0, -1.0).powu(*n);
                phase * mag
            }
            StateSpec::Superposition { terms } => terms
                .iter()
                .map(|t| t.coefficient * t.state.eval_momentum_raw(mu, hbar))
                .sum(),
            _ => unreachable!("eval_momentum_raw requires has_closed_momentum"),
        }
    }
}

/// Normalized Hermite function `(2^n n! sqrt(pi))^{-1/2} H_n(xi) e^{-xi^2/2}`,
/// computed with the stable normalized recurrence (no factorials, no
/// intermediate overflow).
fn hermite_function(n: u32, xi: f64) -> f64 {
    let h0 = PI.powf(-0.25) * (-xi * xi / 2.0).exp();
    if n == 0 {
        return h0;
    }
    let mut prev = h0;
    let mut cur = std::f64::consts::SQRT_2 * xi * h0;
    for k in 1..n {
        let k = k as f64;
        let next = (2.0 / (k + 1.0)).sqrt() * xi * cur - (k / (k + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Catmull-Rom cubic on a uniform grid with zero extension outside.
pub(crate) fn cubic_on_grid(grid: &Grid1D, values: &[Complex64], x: f64) -> Complex64 {
    let t = (x - grid.start()) / grid.step();
    if t < -1.0 || t > grid.count() as f64 {
        return Complex64::new(0.0, 0.0);
    }
    let i = t.floor() as isize;
    let u = t - i as f64;
    let tap = |j: isize| -> Complex64 {
        if j < 0 || j >= grid.count() as isize {
            Complex64::new(0.0, 0.0)
        } else {
            values[j as usize]
        }
    };
    let (v0, v1, v2, v3) = (tap(i - 1), tap(i), tap(i + 1), tap(i + 2));
    0.5 * (2.0 * v1
        + (v2 - v0) * u
        + (2.0 * v0 - 5.0 * v1 + 4.0 * v2 - v3) * u * u
        + (3.0 * v1 - v0 - 3.0 * v2 + v3) * u * u * u)
}

/// Position-space amplitude evaluator: `scale * raw(x)`.
///
/// For leaf catalog states `scale == 1` (closed-form normalization); for
/// superpositions and tabulated states it is fixed by quadrature on the
/// reference grid passed to [`position_evaluator`].
#[derive(Debug, Clone)]
pub struct Psi {
    spec: StateSpec,
    scale: f64,
}

impl Psi {
    #[inline]
    pub fn eval(&self, x: f64) -> Complex64 {
        self.spec.eval_raw(x) * self.scale
    }

    pub fn spec(&self) -> &StateSpec {
        &self.spec
    }
}

/// Momentum-space amplitude evaluator.
#[derive(Debug, Clone)]
pub struct Phi {
    kind: PhiKind,
    hbar: f64,
}

#[derive(Debug, Clone)]
enum PhiKind {
    Closed {
        spec: StateSpec,
        scale: f64,
    },
    Sampled {
        grid: Grid1D,
        values: Vec<Complex64>,
    },
}

impl Phi {
    pub fn eval(&self, mu: f64) -> Complex64 {
        match &self.kind {
            PhiKind::Closed { spec, scale } => spec.eval_momentum_raw(mu, self.hbar) * scale,
            PhiKind::Sampled { grid, values } => cubic_on_grid(grid, values, mu),
        }
    }
}

fn grid_norm_scale(spec: &StateSpec, reference: &Grid1D) -> Result<f64> {
    let sq: Vec<f64> = reference
        .points()
        .map(|x| spec.eval_raw(x).norm_sqr())
        .collect();
    let norm = pairwise_sum(&sq) * reference.step();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateState(
            "state has no probability mass on the reference grid".into(),
        ));
    }
    Ok(1.0 / norm.sqrt())
}

/// Builds a position evaluator, normalizing superpositions and tabulated
/// states on `reference` (tabulated states normalize on their own grid).
pub fn position_evaluator(spec: &StateSpec, reference: &Grid1D) -> Result<Psi> {
    spec.validate()?;
    let scale = match spec {
        StateSpec::Superposition { .. } => grid_norm_scale(spec, reference)?,
        StateSpec::Tabulated { grid, .. } => grid_norm_scale(spec, grid)?,
        _ => 1.0,
    };
    Ok(Psi {
        spec: spec.clone(),
        scale,
    })
}

/// Tail estimate: edge probability density times one-sixth of the span
/// (about one state width when the six-width precondition is just met).
fn tail_mass_check(psi: &Psi, grid: &Grid1D) -> Result<()> {
    let sq: Vec<f64> = grid.points().map(|x| psi.eval(x).norm_sqr()).collect();
    let norm = pairwise_sum(&sq) * grid.step();
    if norm <= 0.0 {
        return Err(Error::DegenerateState(
            "state vanishes on the whole grid".into(),
        ));
    }
    let edge = sq[0].max(sq[sq.len() - 1]) / norm;
    let estimate = edge * grid.span() / 6.0;
    if estimate > 1e-6 {
        return Err(Error::DomainCoverage(format!(
            "estimated probability mass outside grid ~{estimate:.3e} exceeds 1e-6"
        )));
    }
    Ok(())
}

fn coverage_check(psi: &Psi, grid: &Grid1D) -> Result<()> {
    // Box modes must be sampled on [-b, b] exactly: the boundary behavior is
    // what the Fisher diagnostics probe.
    if let StateSpec::BoxMode { halfwidth, .. } = psi.spec() {
        let b = *halfwidth;
        let tol = 1e-9 * b;
        if grid.start() < -b - tol || grid.last() > b + tol {
            return Err(Error::DomainCoverage(format!(
                "box-mode grid [{}, {}] extends beyond [-{b}, {b}]",
                grid.start(),
                grid.last()
            )));
        }
        return Ok(());
    }
    tail_mass_check(psi, grid)
}

/// Samples `psi` on `grid`, renormalized so that `sum |psi_k|^2 step = 1`.
pub fn sample_position(spec: &StateSpec, grid: &Grid1D) -> Result<ComplexField1D> {
    let psi = position_evaluator(spec, grid)?;
    coverage_check(&psi, grid)?;
    let mut values: Vec<Complex64> = grid.points().map(|x| psi.eval(x)).collect();
    let sq: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let norm = (pairwise_sum(&sq) * grid.step()).sqrt();
    for v in &mut values {
        *v /= norm;
    }
    ComplexField1D::new(*grid, values)
}

/// Builds a momentum evaluator on the reciprocal axis of `pair`.
///
/// Closed forms are used where the catalog provides them (Gaussian, harmonic
/// oscillator, superpositions of those); everything else goes through the
/// discrete Fourier transform of position samples taken on the scaled direct
/// axis `x = hbar z`.
pub fn momentum_evaluator(spec: &StateSpec, pair: &ConjugatePair) -> Result<Phi> {
    spec.validate()?;
    let hbar = pair.hbar();
    if spec.has_closed_momentum() {
        let scale = match spec {
            StateSpec::Superposition { .. } => {
                let xgrid = scaled_direct_grid(pair)?;
                grid_norm_scale(spec, &xgrid)?
            }
            _ => 1.0,
        };
        return Ok(Phi {
            kind: PhiKind::Closed {
                spec: spec.clone(),
                scale,
            },
            hbar,
        });
    }
    let field = momentum_by_fft(spec, pair)?;
    Ok(Phi {
        kind: PhiKind::Sampled {
            grid: *field.grid(),
            values: field.into_values(),
        },
        hbar,
    })
}

/// Position grid `x_j = hbar z_j` over the direct axis of `pair`.
fn scaled_direct_grid(pair: &ConjugatePair) -> Result<Grid1D> {
    let z = pair.direct();
    Grid1D::new(pair.hbar() * z.start(), pair.hbar() * z.step(), z.count())
}

fn momentum_by_fft(spec: &StateSpec, pair: &ConjugatePair) -> Result<ComplexField1D> {
    let hbar = pair.hbar();
    let xgrid = scaled_direct_grid(pair)?;
    let psi = position_evaluator(spec, &xgrid)?;
    // The transform axis may extend past a box mode's support; the state is
    // exactly zero there, so only the tail-mass estimate applies.
    tail_mass_check(&psi, &xgrid)?;
    let samples: Vec<Complex64> = pair.direct().points().map(|z| psi.eval(hbar * z)).collect();
    let fft = CenteredFft::new(pair.direct().count());
    let mut phi = fft.forward(&samples, pair.direct(), pair.reciprocal());
    let pref = (2.0 * PI * hbar).sqrt();
    for v in &mut phi {
        *v *= pref;
    }
    normalize_on(pair.reciprocal(), phi)
}

fn normalize_on(grid: &Grid1D, mut values: Vec<Complex64>) -> Result<ComplexField1D> {
    let sq: Vec<f64> = values.iter().map(|v| v.norm_sqr()).collect();
    let norm = (pairwise_sum(&sq) * grid.step()).sqrt();
    if norm <= 0.0 || !norm.is_finite() {
        return Err(Error::DegenerateState(
            "momentum samples have no mass".into(),
        ));
    }
    for v in &mut values {
        *v /= norm;
    }
    ComplexField1D::new(*grid, values)
}

/// Samples the momentum partner on the reciprocal axis of `pair`,
/// renormalized so `sum |phi_k|^2 step = 1`.
pub fn sample_momentum(spec: &StateSpec, pair: &ConjugatePair) -> Result<ComplexField1D> {
    let phi = momentum_evaluator(spec, pair)?;
    match phi.kind {
        PhiKind::Sampled { grid, values } => ComplexField1D::new(grid, values),
        PhiKind::Closed { .. } => {
            let values: Vec<Complex64> =
                pair.reciprocal().points().map(|mu| phi.eval(mu)).collect();
            normalize_on(pair.reciprocal(), values)
        }
    }
}

/// Largest `|coordinate|` whose sample magnitude exceeds `rel * max`.
pub fn effective_extent(field: &ComplexField1D, rel: f64) -> f64 {
    let max = field.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let thresh = rel * max;
    let mut extent: f64 = 0.0;
    for (k, v) in field.values().iter().enumerate() {
        if v.norm() > thresh {
            extent = extent.max(field.grid().point(k).abs());
        }
    }
    extent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_conjugate_pair;

    fn gaussian() -> StateSpec {
        StateSpec::Gaussian {
            center: 0.0,
            width: 1.0,
            momentum: 0.0,
            chirp: 0.0,
        }
    }

    #[test]
    fn gaussian_peak_value() {
        let grid = Grid1D::symmetric(0.0, 16.0 / 256.0, 256).unwrap();
        let f = sample_position(&gaussian(), &grid).unwrap();
        let mid = grid.count() / 2;
        assert!((f.values()[mid].re - PI.powf(-0.25)).abs() < 1e-7);
        assert!((f.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn box_mode_peak_value() {
        let spec = StateSpec::BoxMode {
            n: 1,
            halfwidth: 1.0,
        };
        let grid = Grid1D::symmetric(0.0, 2.0 / 256.0, 256).unwrap();
        let f = sample_position(&spec, &grid).unwrap();
        let mid = grid.count() / 2;
        assert!((f.values()[mid].re - 1.0).abs() < 1e-9);
    }

    #[test]
    fn oscillator_node_at_origin() {
        let spec = StateSpec::HarmonicOscillator { n: 1, width: 1.0 };
        let grid = Grid1D::symmetric(0.0, 16.0 / 256.0, 256).unwrap();
        let f = sample_position(&spec, &grid).unwrap();
        let mid = grid.count() / 2;
        assert_eq!(f.values()[mid].re, 0.0);
    }

    #[test]
    fn parity_on_symmetric_grid() {
        let grid = Grid1D::symmetric(0.0, 0.0625, 256).unwrap();
        let even = sample_position(&gaussian(), &grid).unwrap();
        let odd =
            sample_position(&StateSpec::HarmonicOscillator { n: 1, width: 1.0 }, &grid).unwrap();
        let n = grid.count();
        for k in 1..n {
            assert_eq!(even.values()[k], even.values()[n - k]);
            assert_eq!(odd.values()[k].re, -odd.values()[n - k].re);
        }
    }

    #[test]
    fn narrow_grid_rejected() {
        let grid = Grid1D::symmetric(0.0, 6.0 / 64.0, 64).unwrap(); // spans [-3, 3)
        assert!(matches!(
            sample_position(&gaussian(), &grid),
            Err(Error::DomainCoverage(_))
        ));
    }

    #[test]
    fn box_mode_grid_must_stay_inside_support() {
        let spec = StateSpec::BoxMode {
            n: 1,
            halfwidth: 1.0,
        };
        let grid = Grid1D::symmetric(0.0, 4.0 / 128.0, 128).unwrap(); // [-2, 2)
        assert!(matches!(
            sample_position(&spec, &grid),
            Err(Error::DomainCoverage(_))
        ));
    }

    #[test]
    fn gaussian_momentum_closed_form() {
        let z = Grid1D::symmetric(0.0, 0.125, 256).unwrap();
        let pair = make_conjugate_pair(z, 1.0).unwrap();
        let phi = sample_momentum(&gaussian(), &pair).unwrap();
        let mid = pair.reciprocal().count() / 2;
        assert!((phi.values()[mid].norm() - PI.powf(-0.25)).abs() < 1e-7);
        assert!((phi.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oscillator_momentum_magnitude_matches_position() {
        let z = Grid1D::symmetric(0.0, 0.125, 256).unwrap();
        let pair = make_conjugate_pair(z, 1.0).unwrap();
        for n in [0u32, 1, 2, 3] {
            let spec = StateSpec::HarmonicOscillator { n, width: 1.0 };
            let phi = sample_momentum(&spec, &pair).unwrap();
            let psi = position_evaluator(&spec, pair.reciprocal()).unwrap();
            for (k, v) in phi.values().iter().enumerate() {
                let mu = pair.reciprocal().point(k);
                assert!(
                    (v.norm() - psi.eval(mu).norm()).abs() < 1e-8,
                    "n={n} mu={mu}"
                );
            }
        }
    }

    #[test]
    fn fft_path_matches_closed_form() {
        // Force the FFT path through a tabulated copy of the Gaussian and
        // compare against the analytic momentum amplitude.
        let xgrid = Grid1D::symmetric(0.0, 16.0 / 256.0, 256).unwrap();
        let table = sample_position(&gaussian(), &xgrid).unwrap();
        let tab = StateSpec::Tabulated {
            grid: *table.grid(),
            values: table.values().to_vec(),
        };
        // direct z grid scaled so hbar*z covers [-8, 8)
        let z = Grid1D::symmetric(0.0, 16.0 / 256.0, 256).unwrap();
        let pair = make_conjugate_pair(z, 1.0).unwrap();
        let via_fft = sample_momentum(&tab, &pair).unwrap();
        let closed = sample_momentum(&gaussian(), &pair).unwrap();
        for (a, b) in via_fft.values().iter().zip(closed.values()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn superposition_normalizes_on_grid() {
        let cat = StateSpec::Superposition {
            terms: vec![
                SuperpositionTerm {
                    coefficient: Complex64::new(1.0, 0.0),
                    state: StateSpec::Gaussian {
                        center: -2.0,
                        width: 1.0,
                        momentum: 0.0,
                        chirp: 0.0,
                    },
                },
                SuperpositionTerm {
                    coefficient: Complex64::new(1.0, 0.0),
                    state: StateSpec::Gaussian {
                        center: 2.0,
                        width: 1.0,
                        momentum: 0.0,
                        chirp: 0.0,
                    },
                },
            ],
        };
        let grid = Grid1D::symmetric(0.0, 20.0 / 512.0, 512).unwrap();
        let f = sample_position(&cat, &grid).unwrap();
        assert!((f.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(StateSpec::Gaussian {
            center: 0.0,
            width: 0.0,
            momentum: 0.0,
            chirp: 0.0
        }
        .validate()
        .is_err());
        assert!(StateSpec::BoxMode {
            n: 2,
            halfwidth: 1.0
        }
        .validate()
        .is_err());
        assert!(StateSpec::Superposition { terms: vec![] }
            .validate()
            .is_err());
    }
}
