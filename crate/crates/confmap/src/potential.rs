//! Dirichlet collocation systems for the dipole (double-layer) and
//! fundamental-solution (single-layer) kernels.
//!
//! The dipole kernel `Re(n_k / (z - zeta_k))` is the normal derivative of the
//! logarithmic kernel `log|z - zeta_k|`; its decisive property is that the
//! approximate potential is the real part of the explicit rational function
//! `sum Q_k n_k / (z - zeta_k)`, so a single-valued harmonic conjugate is the
//! imaginary part of the same sum and every conjugate period vanishes. The
//! single-layer kernel is kept as a baseline; its conjugate needs branch
//! tracking and is not provided here.

use crate::arrangement::ArrangedSet;
use crate::geometry::{BoundaryCurve, Cx};
use crate::linalg;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("kernel point z = {z} coincides with a singular point")]
    SingularKernel { z: Cx },
    #[error("collocation point {row} coincides with singular point {col}")]
    PointCoincidence { row: usize, col: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("operation not supported for the {0:?} kernel (conjugate needs branch tracking)")]
    UnsupportedKernel(KernelKind),
    #[error("linear solver failed: {0}")]
    SolverFailure(String),
    #[error("quadrature loop passes within {dist:e} of singular point {index}")]
    LoopNearSingular { index: usize, dist: f64 },
    #[error("dipole moment {index} is not unit modulus")]
    NonUnitMoment { index: usize },
}

/// Kernel of the discrete layer potential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// Dipole kernel `Re(n_k / (z - zeta_k))` (double layer).
    Dsm,
    /// Logarithmic kernel `log|z - zeta_k|` (single layer).
    Mfs,
}

/// Discrete solution of a potential problem: singular points, dipole moments
/// (unused by the MFS kernel but stored for uniform shape), and real
/// coefficients, grouped per boundary component.
#[derive(Debug, Clone)]
pub struct ChargeSystem {
    pub kernel: KernelKind,
    pub singular: Vec<Cx>,
    pub moments: Vec<Cx>,
    pub coeffs: Vec<f64>,
    /// Number of charges per boundary component, in region order.
    pub component_sizes: Vec<usize>,
}

impl ChargeSystem {
    pub fn new(
        kernel: KernelKind,
        singular: Vec<Cx>,
        moments: Vec<Cx>,
        coeffs: Vec<f64>,
        component_sizes: Vec<usize>,
    ) -> Result<Self, SolveError> {
        if singular.len() != moments.len() || singular.len() != coeffs.len() {
            return Err(SolveError::Shape(format!(
                "singular/moments/coeffs lengths differ: {}/{}/{}",
                singular.len(),
                moments.len(),
                coeffs.len()
            )));
        }
        if component_sizes.iter().sum::<usize>() != singular.len() {
            return Err(SolveError::Shape(
                "component sizes do not sum to the number of charges".into(),
            ));
        }
        if kernel == KernelKind::Dsm {
            for (index, m) in moments.iter().enumerate() {
                if (m.norm() - 1.0).abs() > 1e-12 {
                    return Err(SolveError::NonUnitMoment { index });
                }
            }
        }
        Ok(Self {
            kernel,
            singular,
            moments,
            coeffs,
            component_sizes,
        })
    }

    pub fn len(&self) -> usize {
        self.singular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular.is_empty()
    }

    /// Charge indices belonging to boundary component `nu`.
    pub fn component_range(&self, nu: usize) -> std::ops::Range<usize> {
        let start: usize = self.component_sizes[..nu].iter().sum();
        start..start + self.component_sizes[nu]
    }

    /// The holomorphic completion `sum Q_k n_k / (z - zeta_k)` (DSM only);
    /// the potential is its real part, the conjugate its imaginary part.
    fn rational_sum(&self, z: Cx) -> Result<Cx, SolveError> {
        let mut acc = Cx::new(0.0, 0.0);
        for ((&zeta, &n), &q) in self.singular.iter().zip(&self.moments).zip(&self.coeffs) {
            let d = z - zeta;
            if d.norm_sqr() == 0.0 {
                return Err(SolveError::SingularKernel { z });
            }
            acc += q * n / d;
        }
        Ok(acc)
    }
}

/// Diagnostics from a collocation solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// `max_j |(G Q - f)_j|` over the collocation rows.
    pub residual_inf: f64,
    /// 1-norm condition estimate of the collocation matrix, if available.
    pub cond_estimate: Option<f64>,
}

/// Dipole kernel entry `Re(n / (z - zeta))`.
pub fn dsm_entry(z: Cx, zeta: Cx, n: Cx) -> Result<f64, SolveError> {
    let d = z - zeta;
    if d.norm_sqr() == 0.0 {
        return Err(SolveError::SingularKernel { z });
    }
    Ok((n / d).re)
}

/// Logarithmic kernel entry `log|z - zeta|`.
pub fn mfs_entry(z: Cx, zeta: Cx) -> Result<f64, SolveError> {
    let d = z - zeta;
    if d.norm_sqr() == 0.0 {
        return Err(SolveError::SingularKernel { z });
    }
    Ok(d.norm().ln())
}

/// Collocation matrix `G[j][k]` for the given kernel over `colloc` rows and
/// the arranged singular points/moments.
pub fn assemble(
    kernel: KernelKind,
    colloc: &[Cx],
    arranged: &ArrangedSet,
) -> Result<DMatrix<f64>, SolveError> {
    assemble_parts(kernel, colloc, &arranged.singular, &arranged.moments)
}

pub(crate) fn assemble_parts(
    kernel: KernelKind,
    colloc: &[Cx],
    singular: &[Cx],
    moments: &[Cx],
) -> Result<DMatrix<f64>, SolveError> {
    if singular.len() != moments.len() {
        return Err(SolveError::Shape(
            "singular and moment counts differ".into(),
        ));
    }
    let mut g = DMatrix::zeros(colloc.len(), singular.len());
    for (row, &z) in colloc.iter().enumerate() {
        for (col, (&zeta, &n)) in singular.iter().zip(moments).enumerate() {
            let entry = match kernel {
                KernelKind::Dsm => dsm_entry(z, zeta, n),
                KernelKind::Mfs => mfs_entry(z, zeta),
            };
            g[(row, col)] = entry.map_err(|_| SolveError::PointCoincidence { row, col })?;
        }
    }
    Ok(g)
}

/// Solves the square collocation system `G Q = rhs` for one boundary
/// component and returns the charge system plus solve diagnostics.
pub fn solve_dirichlet(
    kernel: KernelKind,
    arranged: &ArrangedSet,
    rhs: &[f64],
) -> Result<(ChargeSystem, SolveReport), SolveError> {
    let n = arranged.colloc.len();
    if arranged.singular.len() != n || rhs.len() != n {
        return Err(SolveError::Shape(format!(
            "square system expected: {} collocation, {} singular, {} rhs",
            n,
            arranged.singular.len(),
            rhs.len()
        )));
    }
    let g = assemble(kernel, &arranged.colloc, arranged)?;
    let rhs_v = DVector::from_column_slice(rhs);
    let sol = linalg::solve_square(&g, &rhs_v)
        .map_err(|e| SolveError::SolverFailure(e.to_string()))?;
    let system = ChargeSystem::new(
        kernel,
        arranged.singular.clone(),
        arranged.moments.clone(),
        sol.x.iter().copied().collect(),
        vec![n],
    )?;
    Ok((
        system,
        SolveReport {
            residual_inf: sol.residual_inf,
            cond_estimate: sol.cond_1,
        },
    ))
}

/// Potential value `u(z)` of the charge system.
pub fn eval_potential(sys: &ChargeSystem, z: Cx) -> Result<f64, SolveError> {
    match sys.kernel {
        KernelKind::Dsm => Ok(sys.rational_sum(z)?.re),
        KernelKind::Mfs => {
            let mut acc = 0.0;
            for (&zeta, &q) in sys.singular.iter().zip(&sys.coeffs) {
                acc += q * mfs_entry(z, zeta)?;
            }
            Ok(acc)
        }
    }
}

/// Harmonic conjugate `v(z) = Im sum Q_k n_k / (z - zeta_k)`, single-valued
/// off the singular points. DSM systems only.
pub fn eval_conjugate(sys: &ChargeSystem, z: Cx) -> Result<f64, SolveError> {
    match sys.kernel {
        KernelKind::Dsm => Ok(sys.rational_sum(z)?.im),
        KernelKind::Mfs => Err(SolveError::UnsupportedKernel(KernelKind::Mfs)),
    }
}

/// Conjugate period `oint (-u_y dx + u_x dy)` along the closed loop,
/// evaluated with the trapezoid rule on at least 1024 samples. The integrand
/// is `Im(F'(z) dz)` with `F` the holomorphic completion of each kernel term,
/// so the value is `2*pi * sum(enclosed Q_k)` for the MFS kernel and zero for
/// the DSM kernel.
pub fn conjugate_period(
    sys: &ChargeSystem,
    loop_curve: &BoundaryCurve,
    samples: usize,
) -> Result<f64, SolveError> {
    let m = samples.max(1024);
    let mut total = 0.0;
    for j in 0..m {
        let t = j as f64 / m as f64;
        let z = loop_curve.param(t);
        let dz = loop_curve.deriv(t) / m as f64;
        let mut fp = Cx::new(0.0, 0.0);
        for (index, ((&zeta, &n), &q)) in sys
            .singular
            .iter()
            .zip(&sys.moments)
            .zip(&sys.coeffs)
            .enumerate()
        {
            let d = z - zeta;
            let dist = d.norm();
            if dist < 1e-6 {
                return Err(SolveError::LoopNearSingular { index, dist });
            }
            fp += match sys.kernel {
                KernelKind::Dsm => -q * n / (d * d),
                KernelKind::Mfs => Cx::new(q, 0.0) / d,
            };
        }
        total += (fp * dz).im;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{arrange_component, Side};
    use crate::geometry::BoundaryCurve;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::{PI, TAU};

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    fn unit_circle() -> BoundaryCurve {
        BoundaryCurve::circle(cx(0.0, 0.0), 1.0).unwrap()
    }

    /// Random DSM system with unit moments and charges on a circle of the
    /// given radius about `center`.
    fn random_dsm(center: Cx, radius: f64, n: usize, seed: u64) -> ChargeSystem {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut singular = Vec::new();
        let mut moments = Vec::new();
        let mut coeffs = Vec::new();
        for _ in 0..n {
            let phase: f64 = rng.random_range(0.0..TAU);
            singular.push(center + radius * (Cx::i() * phase).exp());
            let mphase: f64 = rng.random_range(0.0..TAU);
            moments.push((Cx::i() * mphase).exp());
            coeffs.push(rng.random_range(-1.0..1.0));
        }
        ChargeSystem::new(KernelKind::Dsm, singular, moments, coeffs, vec![n]).unwrap()
    }

    #[test]
    fn dsm_entry_values() {
        assert_abs_diff_eq!(
            dsm_entry(cx(0.0, 0.0), cx(2.0, 0.0), cx(1.0, 0.0)).unwrap(),
            -0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            dsm_entry(cx(0.0, 1.0), cx(2.0, 0.0), cx(1.0, 0.0)).unwrap(),
            -0.4,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            dsm_entry(cx(0.0, 0.0), cx(0.0, 2.0), cx(0.0, 1.0)).unwrap(),
            -0.5,
            epsilon = 1e-15
        );
        assert!(dsm_entry(cx(1.0, 1.0), cx(1.0, 1.0), cx(1.0, 0.0)).is_err());
    }

    #[test]
    fn mfs_entry_values() {
        assert_abs_diff_eq!(
            mfs_entry(cx(0.0, 0.0), cx(1.0, 0.0)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            mfs_entry(cx(0.0, 0.0), cx(std::f64::consts::E, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            mfs_entry(cx(0.0, 3.0), cx(0.0, -1.0)).unwrap(),
            4.0f64.ln(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn assemble_one_by_one() {
        let arranged = ArrangedSet {
            colloc: vec![cx(0.0, 0.0)],
            singular: vec![cx(2.0, 0.0)],
            moments: vec![cx(1.0, 0.0)],
        };
        let g = assemble(KernelKind::Dsm, &arranged.colloc, &arranged).unwrap();
        assert_abs_diff_eq!(g[(0, 0)], -0.5, epsilon = 1e-15);
    }

    #[test]
    fn assemble_circulant_on_symmetric_circle() {
        // rotationally symmetric configuration makes G circulant
        let n = 4;
        let colloc: Vec<Cx> = (1..=n)
            .map(|j| (Cx::i() * TAU * j as f64 / n as f64).exp())
            .collect();
        let singular: Vec<Cx> = colloc.iter().map(|z| 2.0 * z).collect();
        let moments: Vec<Cx> = singular.iter().map(|z| z / z.norm()).collect();
        let g = assemble_parts(KernelKind::Dsm, &colloc, &singular, &moments).unwrap();
        for j in 0..n {
            for k in 0..n {
                let shifted = g[((j + 1) % n, (k + 1) % n)];
                assert_abs_diff_eq!(g[(j, k)], shifted, epsilon = 1e-14);
                assert!(g[(j, k)].is_finite());
            }
        }
    }

    #[test]
    fn zero_rhs_gives_zero_coefficients() {
        let arranged = arrange_component(&unit_circle(), 8, 0.2, Side::Exterior).unwrap();
        let (sys, report) = solve_dirichlet(KernelKind::Dsm, &arranged, &[0.0; 8]).unwrap();
        assert!(sys.coeffs.iter().all(|&q| q == 0.0));
        assert_eq!(report.residual_inf, 0.0);
    }

    #[test]
    fn disk_problem_residual_small() {
        let z0 = cx(0.5, 0.0);
        let arranged = arrange_component(&unit_circle(), 16, 0.2, Side::Exterior).unwrap();
        let rhs: Vec<f64> = arranged.colloc.iter().map(|z| -(z - z0).norm().ln()).collect();
        let (sys, report) = solve_dirichlet(KernelKind::Dsm, &arranged, &rhs).unwrap();
        let max_rhs = rhs.iter().cloned().fold(0.0, f64::max);
        assert!(report.residual_inf <= 1e-10 * (1.0 + max_rhs));
        // reported residual agrees with re-evaluated collocation error
        let recomputed = arranged
            .colloc
            .iter()
            .zip(&rhs)
            .map(|(&z, &f)| (eval_potential(&sys, z).unwrap() - f).abs())
            .fold(0.0, f64::max);
        assert_abs_diff_eq!(recomputed, report.residual_inf, epsilon = 1e-13);
    }

    #[test]
    fn manufactured_solution_recovery() {
        let mut rng = StdRng::seed_from_u64(3);
        let arranged = arrange_component(&unit_circle(), 16, 0.2, Side::Exterior).unwrap();
        let g = assemble(KernelKind::Dsm, &arranged.colloc, &arranged).unwrap();
        let q_true: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rhs: Vec<f64> = (0..16)
            .map(|j| (0..16).map(|k| g[(j, k)] * q_true[k]).sum())
            .collect();
        let (sys, report) = solve_dirichlet(KernelKind::Dsm, &arranged, &rhs).unwrap();
        let cond = report.cond_estimate.unwrap().max(1.0);
        let err = sys
            .coeffs
            .iter()
            .zip(&q_true)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8 * cond, "recovery error {err}, cond {cond}");
    }

    #[test]
    fn eval_single_dipole() {
        let sys = ChargeSystem::new(
            KernelKind::Dsm,
            vec![cx(2.0, 0.0)],
            vec![cx(1.0, 0.0)],
            vec![1.0],
            vec![1],
        )
        .unwrap();
        assert_abs_diff_eq!(
            eval_potential(&sys, cx(0.0, 0.0)).unwrap(),
            -0.5,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            eval_conjugate(&sys, cx(0.0, 0.0)).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            eval_conjugate(&sys, cx(0.0, 1.0)).unwrap(),
            -0.2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_coefficients_evaluate_to_zero() {
        let mut sys = random_dsm(cx(0.0, 0.0), 2.0, 6, 2);
        sys.coeffs = vec![0.0; 6];
        for z in [cx(0.0, 0.0), cx(0.5, -0.3), cx(-1.2, 0.8)] {
            assert_eq!(eval_potential(&sys, z).unwrap(), 0.0);
            assert_eq!(eval_conjugate(&sys, z).unwrap(), 0.0);
        }
    }

    #[test]
    fn eval_is_linear_in_coefficients() {
        let base = random_dsm(cx(0.0, 0.0), 2.0, 6, 9);
        let mut scaled = base.clone();
        for q in &mut scaled.coeffs {
            *q *= 3.5;
        }
        for z in [cx(0.1, 0.2), cx(-0.4, 0.3), cx(0.0, 0.0)] {
            assert_abs_diff_eq!(
                eval_potential(&scaled, z).unwrap(),
                3.5 * eval_potential(&base, z).unwrap(),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn conjugate_rejects_mfs() {
        let sys = ChargeSystem::new(
            KernelKind::Mfs,
            vec![cx(2.0, 0.0)],
            vec![cx(1.0, 0.0)],
            vec![1.0],
            vec![1],
        )
        .unwrap();
        assert!(matches!(
            eval_conjugate(&sys, cx(0.0, 0.0)),
            Err(SolveError::UnsupportedKernel(KernelKind::Mfs))
        ));
    }

    #[test]
    fn cauchy_riemann_by_central_differences() {
        let sys = random_dsm(cx(0.0, 0.0), 2.0, 8, 17);
        let mut rng = StdRng::seed_from_u64(4);
        let h = 1e-5;
        for _ in 0..16 {
            let z = cx(rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
            let u_y = (eval_potential(&sys, z + cx(0.0, h)).unwrap()
                - eval_potential(&sys, z - cx(0.0, h)).unwrap())
                / (2.0 * h);
            let v_x = (eval_conjugate(&sys, z + cx(h, 0.0)).unwrap()
                - eval_conjugate(&sys, z - cx(h, 0.0)).unwrap())
                / (2.0 * h);
            let scale = u_y.abs().max(v_x.abs()).max(1e-3);
            assert!(
                (v_x + u_y).abs() <= 1e-6 * scale,
                "CR violated at {z}: v_x = {v_x}, u_y = {u_y}"
            );
        }
    }

    #[test]
    fn mean_value_property_at_circle_center() {
        let sys = random_dsm(cx(0.0, 0.0), 2.0, 10, 23);
        let m = 4096;
        let radius = 0.8;
        let mean = (0..m)
            .map(|j| {
                let z = radius * (Cx::i() * TAU * j as f64 / m as f64).exp();
                eval_potential(&sys, z).unwrap()
            })
            .sum::<f64>()
            / m as f64;
        let center = eval_potential(&sys, cx(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(mean, center, epsilon = 1e-8);
    }

    #[test]
    fn five_point_laplacian_vanishes() {
        let sys = random_dsm(cx(0.0, 0.0), 2.0, 10, 31);
        let mut rng = StdRng::seed_from_u64(5);
        let h = 1e-4;
        for _ in 0..12 {
            let z = cx(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
            let u = |p: Cx| eval_potential(&sys, p).unwrap();
            let stencil = [
                u(z + cx(h, 0.0)),
                u(z - cx(h, 0.0)),
                u(z + cx(0.0, h)),
                u(z - cx(0.0, h)),
            ];
            let lap = (stencil.iter().sum::<f64>() - 4.0 * u(z)) / (h * h);
            let scale = 1.0 + stencil.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
            assert!(lap.abs() <= 1e-4 * scale, "laplacian {lap} at {z}");
        }
    }

    #[test]
    fn dsm_conjugate_period_vanishes() {
        // charges inside the loop: the rational derivative has no residue
        let sys = random_dsm(cx(0.0, 0.0), 0.4, 12, 41);
        let loop_curve = BoundaryCurve::circle(cx(0.0, 0.0), 1.0).unwrap();
        let eta = conjugate_period(&sys, &loop_curve, 2048).unwrap();
        assert!(eta.abs() <= 1e-8, "period {eta}");
    }

    #[test]
    fn mfs_period_counts_enclosed_charge() {
        let inside = ChargeSystem::new(
            KernelKind::Mfs,
            vec![cx(0.1, -0.2)],
            vec![cx(1.0, 0.0)],
            vec![1.0],
            vec![1],
        )
        .unwrap();
        let loop_curve = BoundaryCurve::circle(cx(0.0, 0.0), 1.0).unwrap();
        let eta = conjugate_period(&inside, &loop_curve, 2048).unwrap();
        assert_abs_diff_eq!(eta, 2.0 * PI, epsilon = 1e-10);

        let outside = ChargeSystem::new(
            KernelKind::Mfs,
            vec![cx(3.0, 0.0)],
            vec![cx(1.0, 0.0)],
            vec![1.0],
            vec![1],
        )
        .unwrap();
        let eta = conjugate_period(&outside, &loop_curve, 2048).unwrap();
        assert_abs_diff_eq!(eta, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn loop_near_singular_point_errors() {
        let sys = ChargeSystem::new(
            KernelKind::Dsm,
            vec![cx(1.0, 0.0)],
            vec![cx(1.0, 0.0)],
            vec![1.0],
            vec![1],
        )
        .unwrap();
        let loop_curve = BoundaryCurve::circle(cx(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            conjugate_period(&sys, &loop_curve, 1024),
            Err(SolveError::LoopNearSingular { .. })
        ));
    }

    #[test]
    fn non_unit_moment_rejected_for_dsm() {
        assert!(matches!(
            ChargeSystem::new(
                KernelKind::Dsm,
                vec![cx(2.0, 0.0)],
                vec![cx(2.0, 0.0)],
                vec![1.0],
                vec![1],
            ),
            Err(SolveError::NonUnitMoment { index: 0 })
        ));
    }
}
