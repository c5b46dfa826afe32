//! Forward numerical conformal maps.
//!
//! A forward map is represented as `f(z) = (z - z0) * exp(g(z) + i*h(z))`
//! where `g` solves a Dirichlet problem with data `-log|z - z0|` (shifted by
//! the unknown log-moduli on hole boundaries) and `h = v - v(z0)` is the
//! single-valued conjugate of the dipole solution. Simply-connected regions
//! map onto the unit disk; doubly-connected ones onto an annulus `A_{R,1}`;
//! higher connectivity onto an annulus with concentric circular slits, with
//! the moduli recovered from the same linear system.

use crate::arrangement::{
    arrange_component, collocation_points, ArrangedSet, ArrangementError, PointConfig, Side,
};
use crate::geometry::{BoundaryCurve, Cx, GeometryError, Region};
use crate::linalg;
use crate::potential::{
    assemble_parts, eval_conjugate, eval_potential, solve_dirichlet, ChargeSystem, KernelKind,
    SolveError, SolveReport,
};
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ForwardError {
    #[error("builder expects a simply connected region, got connectivity {0}")]
    NotSimplyConnected(usize),
    #[error("builder expects connectivity >= 2, got {0}")]
    NotMultiplyConnected(usize),
    #[error("base point {z0} is not interior to the region")]
    BasePointOutside { z0: Cx },
    #[error("base point {z0} must lie inside hole component {hole}")]
    BasePointNotInHole { z0: Cx, hole: usize },
    #[error("base point coincides with collocation point {index}")]
    BasePointOnBoundary { index: usize },
    #[error("computed modulus {value} for component {component} lies outside (0,1)")]
    ModulusOutOfRange { value: f64, component: usize },
    #[error("no circular loop separates hole {hole} from the other boundaries")]
    NoPeriodLoop { hole: usize },
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Extra equations closing the under-determined multiply-connected dipole
/// system. The dipole kernel leaves the conjugate periods at zero for free,
/// so the per-hole zero-sum conditions below are a normalization choice kept
/// compatible with the single-layer baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SideConditions {
    /// `sum_k Q_{nu,k} = 0` for every hole component `nu`.
    #[default]
    AmanoCompatible,
}

/// Evaluable approximate forward conformal map.
#[derive(Debug, Clone)]
pub struct ForwardMap {
    z0: Cx,
    charges: ChargeSystem,
    h_offset: f64,
    moduli: Vec<f64>,
    region: Region,
}

impl ForwardMap {
    /// `f(z) = (z - z0) * exp(g(z) + i*(v(z) - v(z0)))`.
    pub fn eval(&self, z: Cx) -> Result<Cx, ForwardError> {
        let g = eval_potential(&self.charges, z)?;
        let v = eval_conjugate(&self.charges, z)?;
        Ok((z - self.z0) * Cx::new(g, v - self.h_offset).exp())
    }

    pub fn z0(&self) -> Cx {
        self.z0
    }

    pub fn charges(&self) -> &ChargeSystem {
        &self.charges
    }

    /// `h` normalization offset `v(z0)`.
    pub fn h_offset(&self) -> f64 {
        self.h_offset
    }

    /// Computed moduli `R_mu`, one per hole component (empty when simply
    /// connected). For a doubly-connected region this is the single annulus
    /// modulus.
    pub fn moduli(&self) -> &[f64] {
        &self.moduli
    }

    pub fn region(&self) -> &Region {
        &self.region
    }
}

/// Boundary data `-log|z_j - z0|` of the potential problem for `g`.
pub fn dirichlet_data_simply(z0: Cx, colloc: &[Cx]) -> Result<Vec<f64>, ForwardError> {
    colloc
        .iter()
        .enumerate()
        .map(|(index, &z)| {
            let d = (z - z0).norm();
            if d == 0.0 {
                Err(ForwardError::BasePointOnBoundary { index })
            } else {
                Ok(-d.ln())
            }
        })
        .collect()
}

/// Builds the forward map of a simply connected region onto the unit disk,
/// normalized by `f(z0) = 0`, `f'(z0) > 0`.
pub fn build_forward_simply(
    region: &Region,
    z0: Cx,
    config: &PointConfig,
) -> Result<(ForwardMap, SolveReport), ForwardError> {
    if region.connectivity() != 1 {
        return Err(ForwardError::NotSimplyConnected(region.connectivity()));
    }
    if !region.contains(z0)? {
        return Err(ForwardError::BasePointOutside { z0 });
    }
    let arranged = arrange_component(region.outer(), config.n(), config.rtilde_f(), Side::Exterior)?;
    let rhs = dirichlet_data_simply(z0, &arranged.colloc)?;
    let (charges, report) = solve_dirichlet(KernelKind::Dsm, &arranged, &rhs)?;
    let h_offset = eval_conjugate(&charges, z0)?;
    Ok((
        ForwardMap {
            z0,
            charges,
            h_offset,
            moduli: Vec::new(),
            region: region.clone(),
        },
        report,
    ))
}

/// Builds the forward map of a multiply connected region. The base point must
/// lie inside the last hole component, which is sent to the innermost
/// canonical circle; hole radii enter the linear system as log-moduli
/// unknowns, and one zero-sum side condition per hole closes the count.
pub fn build_forward_multiply(
    region: &Region,
    z0: Cx,
    config: &PointConfig,
    _side_conditions: SideConditions,
) -> Result<(ForwardMap, SolveReport), ForwardError> {
    let n_comp = region.connectivity();
    if n_comp < 2 {
        return Err(ForwardError::NotMultiplyConnected(n_comp));
    }
    let hole = n_comp - 1;
    if region.components()[hole].winding_number(z0)? != 1 {
        return Err(ForwardError::BasePointNotInHole { z0, hole });
    }

    let n = config.n();
    let mut sets: Vec<ArrangedSet> = Vec::with_capacity(n_comp);
    for (idx, curve) in region.components().iter().enumerate() {
        let side = if idx == 0 {
            Side::Exterior
        } else {
            Side::Interior
        };
        sets.push(arrange_component(curve, n, config.rtilde_f(), side)?);
    }

    let singular: Vec<Cx> = sets.iter().flat_map(|s| s.singular.iter().copied()).collect();
    let moments: Vec<Cx> = sets.iter().flat_map(|s| s.moments.iter().copied()).collect();
    let colloc: Vec<Cx> = sets.iter().flat_map(|s| s.colloc.iter().copied()).collect();

    let total = n_comp * n;
    let dim = total + (n_comp - 1);
    let kernel_block = assemble_parts(KernelKind::Dsm, &colloc, &singular, &moments)?;

    let mut g = DMatrix::zeros(dim, dim);
    g.view_mut((0, 0), (total, total)).copy_from(&kernel_block);
    let mut rhs = DVector::zeros(dim);
    for (row, &z) in colloc.iter().enumerate() {
        let d = (z - z0).norm();
        if d == 0.0 {
            return Err(ForwardError::BasePointOnBoundary { index: row });
        }
        rhs[row] = -d.ln();
        let mu = row / n;
        if mu >= 1 {
            // log R_mu unknown moved to the left-hand side
            g[(row, total + mu - 1)] = -1.0;
        }
    }
    for nu in 1..n_comp {
        let row = total + nu - 1;
        for col in nu * n..(nu + 1) * n {
            g[(row, col)] = 1.0;
        }
    }

    let sol = linalg::solve_square(&g, &rhs)
        .map_err(|e| SolveError::SolverFailure(e.to_string()))?;
    let coeffs: Vec<f64> = sol.x.iter().take(total).copied().collect();
    let moduli: Vec<f64> = sol.x.iter().skip(total).map(|l| l.exp()).collect();
    for (k, &r) in moduli.iter().enumerate() {
        if !(0.0 < r && r < 1.0) {
            return Err(ForwardError::ModulusOutOfRange {
                value: r,
                component: k + 1,
            });
        }
    }
    // the innermost circle is the image of the designated hole
    if n_comp >= 3 {
        let inner = moduli[n_comp - 2];
        for (k, &r) in moduli[..n_comp - 2].iter().enumerate() {
            if r <= inner {
                return Err(ForwardError::ModulusOutOfRange {
                    value: r,
                    component: k + 1,
                });
            }
        }
    }

    let charges = ChargeSystem::new(
        KernelKind::Dsm,
        singular,
        moments,
        coeffs,
        vec![n; n_comp],
    )?;
    let h_offset = eval_conjugate(&charges, z0)?;
    Ok((
        ForwardMap {
            z0,
            charges,
            h_offset,
            moduli,
            region: region.clone(),
        },
        SolveReport {
            residual_inf: sol.residual_inf,
            cond_estimate: sol.cond_1,
        },
    ))
}

/// Pairs `(z_j, f(z_j))` at the collocation points of every boundary
/// component. The map must have been built with the same point count.
#[derive(Debug, Clone)]
pub struct BoundaryCorrespondence {
    pub components: Vec<Vec<(Cx, Cx)>>,
}

pub fn boundary_correspondence(
    map: &ForwardMap,
    config: &PointConfig,
) -> Result<BoundaryCorrespondence, ForwardError> {
    let mut components = Vec::with_capacity(map.region.connectivity());
    for curve in map.region.components() {
        let colloc = collocation_points(curve, config.n())?;
        let mut pairs = Vec::with_capacity(colloc.len());
        for &z in &colloc {
            pairs.push((z, map.eval(z)?));
        }
        components.push(pairs);
    }
    Ok(BoundaryCorrespondence { components })
}

/// A circle loop inside the region that encircles hole `hole` once and stays
/// clear of all boundaries, for conjugate-period quadrature.
pub fn hole_period_loop(region: &Region, hole: usize) -> Result<BoundaryCurve, ForwardError> {
    let hole_curve = &region.components()[hole];
    let samples = hole_curve.samples(512);
    let center = samples.iter().sum::<Cx>() / samples.len() as f64;
    let r_hole = samples
        .iter()
        .map(|&p| (p - center).norm())
        .fold(0.0, f64::max);
    let mut r_clear = f64::INFINITY;
    for (idx, curve) in region.components().iter().enumerate() {
        if idx == hole {
            continue;
        }
        for &p in &curve.samples(512) {
            r_clear = r_clear.min((p - center).norm());
        }
    }
    if r_clear <= r_hole {
        return Err(ForwardError::NoPeriodLoop { hole });
    }
    let radius = (r_hole * r_clear).sqrt();
    Ok(BoundaryCurve::circle(center, radius)?)
}
