//! Phase-space numerics for pure quantum states.
//!
//! The crate computes Wigner quasiprobability distributions, builds the
//! complex phase hologram of a joint position-momentum density, applies
//! one-dimensional coarse-graining convolutions (along momentum or along
//! position) that restore epsilon-positivity, and evaluates Fisher-information
//! self-consistency diagnostics on phase profiles.
//!
//! Modules map one-to-one onto the subsystems:
//!
//! * [`grid`] - uniform axes, conjugate (FFT-reciprocal) pairs, field
//!   containers, deterministic quadrature;
//! * [`states`] - the analytic state catalog and grid samplers;
//! * [`wigner`] - Wigner and cross-Wigner transforms plus marginals;
//! * [`hologram`] - the hologram `Z(x,z)`, its phase profile, intensity,
//!   measurement sampling, and the inverse reconstruction;
//! * [`coarse`] - 1D/2D coarse-graining kernels, positivity reports, limit
//!   checks, and the minimum-grain-size search;
//! * [`fisher`] - the information functional by quadrature, in closed form,
//!   and by Monte Carlo.
//!
//! With the default `parallel` feature, row-independent inner loops run on
//! rayon; reductions keep a fixed row-major pairwise order, so outputs are
//! bit-identical with and without the feature and for any thread count.

pub mod coarse;
pub mod error;
pub mod fisher;
mod fourier;
pub mod grid;
pub mod hologram;
mod par;
pub mod states;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::{
    integrate_1d, integrate_2d, make_conjugate_pair, pair_for_reciprocal, z_to_position,
    ComplexField1D, ComplexField2D, ConjugatePair, Grid1D, RealField1D, RealField2D,
};
pub use par::init_thread_pool_from_env;
pub use states::{sample_momentum, sample_position, StateSpec, SuperpositionTerm};

/// Conjugate pair whose evaluation lattice `x +- hbar z / 2` lands exactly on
/// the points of `x_grid`: the direct `z` axis has step `2 dx / hbar` and the
/// same count as `x_grid`.
pub fn standard_pair(x_grid: &grid::Grid1D, hbar: f64) -> Result<ConjugatePair> {
    if !(hbar.is_finite() && hbar > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "hbar must be positive, got {hbar}"
        )));
    }
    let dz = 2.0 * x_grid.step() / hbar;
    let z = grid::Grid1D::symmetric(0.0, dz, x_grid.count())?;
    make_conjugate_pair(z, hbar)
}
