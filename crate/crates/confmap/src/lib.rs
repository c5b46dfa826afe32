//! Bidirectional numerical conformal mapping by dipole collocation.
//!
//! Forward maps (a Jordan or multiply-connected region onto the unit disk,
//! an annulus, or an annulus with circular slits) are computed with the
//! dipole simulation method: a meshfree collocation scheme whose trial
//! functions are point dipoles `Re(n_k / (z - zeta_k))`, the discrete
//! analogue of a double-layer potential. Because the approximate potential
//! is the real part of an explicit rational function, its harmonic conjugate
//! is available by taking the imaginary part: no branch tracking of the
//! argument function is ever needed, and conjugate periods around holes
//! vanish identically.
//!
//! Backward maps (canonical region onto the original region) are produced by
//! the complex variant of the same idea: a rational interpolant
//! `sum Q_k / (w - xi_k)` collocated at the computed boundary images.
//!
//! The crate also ships the exact maps for the disk, Cassini-oval, and
//! Cassini-frame test regions, an error-analysis toolbox (boundary sup
//! errors, periodic Hilbert transform, discrete Sobolev norms, convergence
//! sweeps), and a configuration-driven CLI (`confmap`).
//!
//! ```
//! use confmap::arrangement::PointConfig;
//! use confmap::forward_map::build_forward_simply;
//! use confmap::{Cx, Region};
//!
//! let region = Region::disk(1.0)?;
//! let config = PointConfig::new(16, 0.2, 0.1)?;
//! let (map, report) = build_forward_simply(&region, Cx::new(0.5, 0.0), &config)?;
//! assert!(report.residual_inf < 1e-10);
//! // boundary points land on the unit circle
//! let w = map.eval(region.outer().param(0.37))?;
//! assert!((w.norm() - 1.0).abs() < 1e-4);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod arrangement;
pub mod backward_map;
pub mod cli;
pub mod forward_map;
pub mod geometry;
mod linalg;
pub mod potential;
pub mod reference;

pub mod acceptance;

pub use geometry::{BoundaryCurve, Cx, Region};
pub use potential::{ChargeSystem, KernelKind, SolveReport};
