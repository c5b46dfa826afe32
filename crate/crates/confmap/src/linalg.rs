//! Dense square solves shared by the real and complex collocation systems:
//! LU with partial pivoting, falling back to a least-squares solve when a
//! pivot underflows. The matrices here are ill-conditioned by construction,
//! so the acceptance gate is the residual, never the condition number; the
//! 1-norm condition estimate is diagnostic output only.

use nalgebra::{ComplexField, DMatrix, DVector};
use thiserror::Error;

/// Pivot magnitude below which the factorization is treated as singular.
const PIVOT_FLOOR: f64 = 1e-300;

/// Relative residual allowed for the least-squares fallback.
const FALLBACK_RESIDUAL_FACTOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub(crate) enum SolveFailure {
    #[error(
        "matrix numerically singular; least-squares residual {residual:e} exceeds limit {limit:e}"
    )]
    Singular { residual: f64, limit: f64 },
    #[error("singular value decomposition did not converge")]
    SvdFailed,
}

pub(crate) struct DenseSolution<T: ComplexField> {
    pub x: DVector<T>,
    pub residual_inf: f64,
    pub cond_1: Option<f64>,
}

/// Column-sum norm.
fn norm_1<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.clone().modulus()).sum())
        .fold(0.0, f64::max)
}

fn residual_inf<T: ComplexField<RealField = f64>>(
    g: &DMatrix<T>,
    x: &DVector<T>,
    rhs: &DVector<T>,
) -> f64 {
    let r = g * x - rhs;
    r.iter().map(|v| v.clone().modulus()).fold(0.0, f64::max)
}

/// Solves `g x = rhs` for square `g`.
pub(crate) fn solve_square<T: ComplexField<RealField = f64>>(
    g: &DMatrix<T>,
    rhs: &DVector<T>,
) -> Result<DenseSolution<T>, SolveFailure> {
    assert_eq!(g.nrows(), g.ncols(), "system must be square");
    assert_eq!(g.nrows(), rhs.len(), "rhs length must match");

    let lu = g.clone().lu();
    let min_pivot = lu
        .u()
        .diagonal()
        .iter()
        .map(|v| v.clone().modulus())
        .fold(f64::INFINITY, f64::min);

    if min_pivot > PIVOT_FLOOR {
        if let Some(x) = lu.solve(rhs) {
            let cond_1 = lu.try_inverse().map(|inv| norm_1(g) * norm_1(&inv));
            let residual_inf = residual_inf(g, &x, rhs);
            return Ok(DenseSolution {
                x,
                residual_inf,
                cond_1,
            });
        }
    }

    // Least-squares fallback for an outright singular factorization.
    let svd = g.clone().svd(true, true);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = max_sv * g.nrows() as f64 * f64::EPSILON;
    let x = svd
        .solve(rhs, eps)
        .map_err(|_| SolveFailure::SvdFailed)?
        .column(0)
        .into_owned();
    let residual = residual_inf(g, &x, rhs);
    let limit =
        FALLBACK_RESIDUAL_FACTOR * rhs.iter().map(|v| v.clone().modulus()).fold(0.0, f64::max);
    if residual > limit {
        return Err(SolveFailure::Singular {
            residual,
            limit,
        });
    }
    Ok(DenseSolution {
        x,
        residual_inf: residual,
        cond_1: None,
    })
}
