//! Collocation points, singular points, and dipole moments.
//!
//! Singular points are offset from the collocation polygon by the rule
//! `zeta_k = z_k - (i*r/2)(z_{k+1} - z_{k-1})` with cyclic indexing, which
//! pushes them along the approximate outward normal of a positively oriented
//! curve when `r > 0` (inward when `r < 0`). The offset parameter is supplied
//! in scaled form `r = rtilde * N`, compensating the `O(1/N)` neighbor
//! spacing. Moments are the unit chord normals of the singular polygon.

use crate::geometry::{winding_of_samples, BoundaryCurve, Cx, GeometryError, WINDING_SAMPLES};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArrangementError {
    #[error("need at least 4 points per boundary component, got {0}")]
    TooFewPoints(usize),
    #[error("need at least 3 points for the neighbor-offset rule, got {0}")]
    TooFewForOffset(usize),
    #[error("offset parameter must be positive and finite, got {0}")]
    BadOffset(f64),
    #[error("degenerate arrangement: singular neighbors {0} and {1} coincide")]
    DegenerateNeighbors(usize, usize),
    #[error("singular point {index} landed on the wrong side of the curve")]
    SideViolation { index: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Which side of a curve the singular points must land on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Outside the closed curve (outer boundaries).
    Exterior,
    /// Inside the curve (hole boundaries).
    Interior,
}

/// Per-component point counts and scaled offsets for forward and backward
/// arrangements.
#[derive(Debug, Clone, Copy)]
pub struct PointConfig {
    n: usize,
    rtilde_f: f64,
    rtilde_b: f64,
}

impl PointConfig {
    pub fn new(n: usize, rtilde_f: f64, rtilde_b: f64) -> Result<Self, ArrangementError> {
        if n < 4 {
            return Err(ArrangementError::TooFewPoints(n));
        }
        for r in [rtilde_f, rtilde_b] {
            if !(r.is_finite() && r > 0.0) {
                return Err(ArrangementError::BadOffset(r));
            }
        }
        Ok(Self {
            n,
            rtilde_f,
            rtilde_b,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rtilde_f(&self) -> f64 {
        self.rtilde_f
    }

    pub fn rtilde_b(&self) -> f64 {
        self.rtilde_b
    }
}

/// Collocation points, singular points, and unit dipole moments for one
/// boundary component.
#[derive(Debug, Clone)]
pub struct ArrangedSet {
    pub colloc: Vec<Cx>,
    pub singular: Vec<Cx>,
    pub moments: Vec<Cx>,
}

/// `z_j = Phi(j/N)` for `j = 1..N`; the wraparound convention `z_0 := z_N`
/// puts `Phi(1) = Phi(0)` last.
pub fn collocation_points(curve: &BoundaryCurve, n: usize) -> Result<Vec<Cx>, ArrangementError> {
    if n < 4 {
        return Err(ArrangementError::TooFewPoints(n));
    }
    Ok((1..=n).map(|j| curve.param(j as f64 / n as f64)).collect())
}

/// Neighbor-offset singular points `zeta_k = z_k - (i*r/2)(z_{k+1} - z_{k-1})`
/// with cyclic indexing.
pub fn amano_singular(colloc: &[Cx], r: f64) -> Result<Vec<Cx>, ArrangementError> {
    let n = colloc.len();
    if n < 3 {
        return Err(ArrangementError::TooFewForOffset(n));
    }
    if !r.is_finite() {
        return Err(ArrangementError::BadOffset(r));
    }
    Ok((0..n)
        .map(|k| {
            let chord = colloc[(k + 1) % n] - colloc[(k + n - 1) % n];
            colloc[k] - Cx::i() * 0.5 * r * chord
        })
        .collect())
}

/// Unit moments `n_k = -i (zeta_{k+1} - zeta_{k-1}) / |zeta_{k+1} - zeta_{k-1}|`.
pub fn amano_moments(singular: &[Cx]) -> Result<Vec<Cx>, ArrangementError> {
    let n = singular.len();
    if n < 3 {
        return Err(ArrangementError::TooFewForOffset(n));
    }
    (0..n)
        .map(|k| {
            let next = (k + 1) % n;
            let prev = (k + n - 1) % n;
            let chord = singular[next] - singular[prev];
            if chord.norm() == 0.0 {
                return Err(ArrangementError::DegenerateNeighbors(prev, next));
            }
            Ok(-Cx::i() * chord / chord.norm())
        })
        .collect()
}

/// Full arrangement of one boundary component: collocation points on the
/// curve, singular points offset by `r = rtilde * N` onto the requested side
/// (the sign is found by a containment test, then every point is verified),
/// and unit moments.
pub fn arrange_component(
    curve: &BoundaryCurve,
    n: usize,
    rtilde: f64,
    side: Side,
) -> Result<ArrangedSet, ArrangementError> {
    if !(rtilde.is_finite() && rtilde > 0.0) {
        return Err(ArrangementError::BadOffset(rtilde));
    }
    let colloc = collocation_points(curve, n)?;
    let boundary = curve.samples(WINDING_SAMPLES);
    let wanted_winding = match side {
        Side::Exterior => 0,
        Side::Interior => 1,
    };

    let r = rtilde * n as f64;
    let mut singular = amano_singular(&colloc, r)?;
    if winding_of_samples(&boundary, singular[0])? != wanted_winding {
        singular = amano_singular(&colloc, -r)?;
    }
    for (index, &zeta) in singular.iter().enumerate() {
        if winding_of_samples(&boundary, zeta)? != wanted_winding {
            return Err(ArrangementError::SideViolation { index });
        }
    }
    let moments = amano_moments(&singular)?;
    Ok(ArrangedSet {
        colloc,
        singular,
        moments,
    })
}

/// Singular points placed by an explicitly known peripheral map:
/// `zeta_k = psi(radius * omega^k)` with `omega = e^{2*pi*i/N}`, `k = 1..N`.
pub fn conformal_singular<F: Fn(Cx) -> Cx>(psi: F, radius: f64, n: usize) -> Vec<Cx> {
    use std::f64::consts::TAU;
    (1..=n)
        .map(|k| psi(radius * (Cx::i() * TAU * k as f64 / n as f64).exp()))
        .collect()
}
