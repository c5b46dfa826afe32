//! Backward numerical conformal maps by complex rational collocation.
//!
//! The backward map (canonical region onto the original region) is
//! approximated directly as `f*(w) = sum Q_k / (w - xi_k)` with complex
//! coefficients, collocated at the computed boundary images `w_j = f(z_j)`
//! with right-hand side `z_j`. Poles are offset from the image polygon by the
//! same neighbor rule used for forward singular points and must land outside
//! the canonical region: outside the unit circle, and additionally inside the
//! inner disk `|w| < R` for the annulus case.

use crate::arrangement::{amano_singular, ArrangementError, PointConfig};
use crate::forward_map::BoundaryCorrespondence;
use crate::geometry::Cx;
use crate::linalg;
use crate::potential::SolveReport;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BackwardError {
    #[error("canonical region expects {expected} boundary components, correspondence has {got}")]
    ComponentMismatch { expected: usize, got: usize },
    #[error("backward maps are built for connectivity 1 or 2, got {0}")]
    UnsupportedConnectivity(usize),
    #[error("annulus modulus must lie in (0,1), got {0}")]
    BadModulus(f64),
    #[error("pole {index} landed on the wrong side of the canonical boundary")]
    PoleSide { index: usize },
    #[error("collocation image {row} coincides with pole {col}")]
    PointCoincidence { row: usize, col: usize },
    #[error("evaluation point coincides with pole {index}")]
    AtPole { index: usize },
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// Canonical region the backward map is defined on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Canonical {
    /// Unit disk.
    Disk,
    /// Annulus `modulus < |w| < 1`.
    Annulus { modulus: f64 },
}

/// Rational approximation of the backward map, with poles grouped per
/// canonical boundary component.
#[derive(Debug, Clone)]
pub struct BackwardMap {
    poles: Vec<Cx>,
    coeffs: Vec<Cx>,
    canonical: Canonical,
    group_sizes: Vec<usize>,
}

impl BackwardMap {
    /// `f*(w) = sum Q_k / (w - xi_k)`.
    pub fn eval(&self, w: Cx) -> Result<Cx, BackwardError> {
        let mut acc = Cx::new(0.0, 0.0);
        for (index, (&xi, &q)) in self.poles.iter().zip(&self.coeffs).enumerate() {
            let d = w - xi;
            if d.norm_sqr() == 0.0 {
                return Err(BackwardError::AtPole { index });
            }
            acc += q / d;
        }
        Ok(acc)
    }

    pub fn poles(&self) -> &[Cx] {
        &self.poles
    }

    pub fn coeffs(&self) -> &[Cx] {
        &self.coeffs
    }

    pub fn canonical(&self) -> Canonical {
        self.canonical
    }

    pub fn group_sizes(&self) -> &[usize] {
        &self.group_sizes
    }
}

/// Complex collocation matrix `G[j][k] = 1 / (w_j - xi_k)`.
pub fn cdsm_assemble(colloc_w: &[Cx], poles: &[Cx]) -> Result<DMatrix<Cx>, BackwardError> {
    let mut g = DMatrix::zeros(colloc_w.len(), poles.len());
    for (row, &w) in colloc_w.iter().enumerate() {
        for (col, &xi) in poles.iter().enumerate() {
            let d = w - xi;
            if d.norm_sqr() == 0.0 {
                return Err(BackwardError::PointCoincidence { row, col });
            }
            g[(row, col)] = 1.0 / d;
        }
    }
    Ok(g)
}

/// Offsets poles from the image polygon and verifies they all satisfy the
/// side predicate, flipping the offset sign once if the first candidate lands
/// on the wrong side.
fn place_poles(
    images: &[Cx],
    r: f64,
    side_ok: impl Fn(Cx) -> bool,
) -> Result<Vec<Cx>, BackwardError> {
    let mut poles = amano_singular(images, r)?;
    if !side_ok(poles[0]) {
        poles = amano_singular(images, -r)?;
    }
    for (index, &xi) in poles.iter().enumerate() {
        if !side_ok(xi) {
            return Err(BackwardError::PoleSide { index });
        }
    }
    Ok(poles)
}

/// Builds the backward map from a boundary correspondence. The collocation
/// equations are `f*(w_j) = z_j` at the computed images `w_j`; the system is
/// square (`N` or `2N` complex unknowns).
pub fn build_backward(
    corr: &BoundaryCorrespondence,
    config: &PointConfig,
    canonical: Canonical,
) -> Result<(BackwardMap, SolveReport), BackwardError> {
    let expected = match canonical {
        Canonical::Disk => 1,
        Canonical::Annulus { modulus } => {
            if !(0.0 < modulus && modulus < 1.0) {
                return Err(BackwardError::BadModulus(modulus));
            }
            2
        }
    };
    let got = corr.components.len();
    if got != expected {
        return Err(if got > 2 {
            BackwardError::UnsupportedConnectivity(got)
        } else {
            BackwardError::ComponentMismatch { expected, got }
        });
    }

    let r = config.rtilde_b() * config.n() as f64;
    let mut poles = Vec::new();
    let mut images = Vec::new();
    let mut rhs_pts = Vec::new();
    let mut group_sizes = Vec::new();
    for (idx, pairs) in corr.components.iter().enumerate() {
        let w: Vec<Cx> = pairs.iter().map(|&(_, w)| w).collect();
        let group = match (canonical, idx) {
            (Canonical::Disk, _) | (Canonical::Annulus { .. }, 0) => {
                place_poles(&w, r, |xi| xi.norm() > 1.0)?
            }
            (Canonical::Annulus { modulus }, _) => {
                place_poles(&w, r, |xi| xi.norm() < modulus)?
            }
        };
        group_sizes.push(group.len());
        poles.extend(group);
        images.extend(w);
        rhs_pts.extend(pairs.iter().map(|&(z, _)| z));
    }

    let g = cdsm_assemble(&images, &poles)?;
    let rhs = DVector::from_column_slice(&rhs_pts);
    let sol = linalg::solve_square(&g, &rhs)
        .map_err(|e| BackwardError::SolverFailure(e.to_string()))?;
    Ok((
        BackwardMap {
            poles,
            coeffs: sol.x.iter().copied().collect(),
            canonical,
            group_sizes,
        },
        SolveReport {
            residual_inf: sol.residual_inf,
            cond_estimate: sol.cond_1,
        },
    ))
}
