//! Moment-map geometry for algebraic loops in SU(N).
//!
//! The library works with based loops γ: S¹ → SU(N) that have a finite
//! Fourier expansion γ(θ) = Σ_{|k|≤n} A_k e^{ikθ}. The maximal torus T of
//! diagonal matrices acts by pointwise conjugation and S¹ acts by rotating
//! the loop parameter; both actions are Hamiltonian and their moment map
//! μ = p ⊕ E (torus moment and energy) is the central object here.
//!
//! Modules:
//! - [`liegroup`]: finite-dimensional SU(N) data — algebra, torus, roots,
//!   integer lattice, admissibility tests.
//! - [`loops`]: finite Fourier loops, group actions, H¹ norms, retraction.
//! - [`moment`]: μ = p ⊕ E, tilted energy, symplectic pairing, H¹ gradients.
//! - [`flow`]: gradient flows, level-set projections, connectivity probes.
//! - [`grassmann`]: the finite Grassmannian model with Plücker coordinates
//!   and the weight-based moment map.
//! - [`experiments`]: samplers, hull checks, CSV emission, the verification
//!   suite, reproducible manifests.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! the `*64` aliases below are the concrete double-precision entry points.

pub mod error;
pub(crate) mod randutil;
pub mod scalar;

pub mod fourier;
pub mod linalg;

pub mod experiments;
pub mod flow;
pub mod grassmann;
pub mod jsonio;
pub mod liegroup;
pub mod loops;
pub mod moment;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision loop.
pub type Loop64 = loops::AlgebraicLoop<f64>;
/// Double-precision free (un-based) loop.
pub type FreeLoop64 = loops::FreeLoop<f64>;
/// Double-precision tangent.
pub type Tangent64 = loops::LoopTangent<f64>;
/// Double-precision moment value.
pub type Moment64 = moment::MomentValue<f64>;
/// Double-precision covector on 𝔱 ⊕ ℝ.
pub type Covector64 = moment::Covector<f64>;
/// Double-precision torus vector.
pub type Torus64 = liegroup::TorusVector<f64>;
/// Double-precision Grassmannian point.
pub type GrassPoint64 = grassmann::GrassPoint<f64>;

/// Single-precision loop (reduced-accuracy experiments only; the default
/// tolerances in [`flow`] and [`experiments`] assume f64).
pub type Loop32 = loops::AlgebraicLoop<f32>;
/// Single-precision tangent.
pub type Tangent32 = loops::LoopTangent<f32>;
