//! Numerical laboratory for criticality theory of nonnegative Schrödinger
//! operators `S = -Δ + λ/|x|²` on exactly diagonalizable model families.
//!
//! Every model operator is diagonalized by an order-ν Hankel transform (radial
//! kinds) or a cosine transform (even functions on the line), so the heat
//! semigroup, the wave propagator and the range seminorm
//!
//! ```text
//! |||g|||²_{R(S^α)} = ∫₀^∞ t^{2α-1} ‖e^{-tS} g‖² dt
//! ```
//!
//! all reduce to multiplier calculus in the frequency `k` with `S ↦ k²`.

pub mod data;
pub mod density;
pub mod error;
pub mod operator;
pub mod quadrature;
pub mod semigroup;
pub mod special;
pub mod suite;
pub mod transform;
pub mod wave;

pub use data::{DataSpec, random_band_limited};
pub use density::SpectralDensity;
pub use error::{Error, Result};
pub use operator::{classify, make_operator, Classification, Criticality, ModelKind, ModelOperator};
pub use semigroup::{
    green_kernel_alpha, heat_decay_rate, heat_evolve, scan_interval, seminorm_freq, seminorm_time, GreenValue,
    IntervalEstimate, SeminormResult, Verdict,
};
pub use special::{bessel_j, bessel_zeros, sphere_measure, wave_multiplier, BesselOrder};
pub use transform::{apply_multiplier, build_grids, forward, inverse, Discretization, SampledFunction, SpectralFunction};
pub use wave::{
    decay_curve, energy, interpolation_check, moment, reduce_to_2d, transmutation_check, wave_evolve, DecayCurve,
    GrowthModel, WaveState,
};
