//! Error norms, the periodic Hilbert transform, conjugate-error checks, and
//! convergence sweeps.
//!
//! Sup errors of holomorphic approximants are measured on boundary samples
//! only (the maximum principle extends the bound to the interior), at points
//! offset half a spacing from the collocation nodes. Smoothness-weighted
//! errors use the discrete periodic Sobolev norm with weight
//! `max(2*pi*|n|, 1)^s`.

use crate::arrangement::{arrange_component, ArrangementError, PointConfig, Side};
use crate::backward_map::{build_backward, Canonical};
use crate::forward_map::{
    boundary_correspondence, build_forward_multiply, build_forward_simply, dirichlet_data_simply,
    ForwardError, SideConditions,
};
use crate::geometry::{BoundaryCurve, Cx, Region};
use crate::potential::{eval_conjugate, eval_potential, solve_dirichlet, KernelKind, SolveError};
use crate::reference::ExactMapCase;
use rustfft::FftPlanner;
use std::f64::consts::PI;
use thiserror::Error;

/// Error floor below which convergence is considered to have plateaued.
pub const PLATEAU_FLOOR: f64 = 1e-11;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("boundary sample count must be at least 256, got {0}")]
    TooFewSamples(usize),
    #[error("sample count must be a power of two >= 64, got {0}")]
    BadSampleCount(usize),
    #[error("coefficient window must have odd length (indices -M..M), got {0}")]
    BadWindow(usize),
    #[error("evaluation failed at tau = {tau}: {msg}")]
    Eval { tau: f64, msg: String },
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
}

/// Discrete periodic Sobolev parameters; the mode weight is
/// `max(2*pi*|n|, 1)`.
#[derive(Debug, Clone, Copy)]
pub struct SobolevParams {
    pub s: f64,
}

impl SobolevParams {
    /// Weight `max(2*pi*|n|, 1)^(2s)` applied to `|g_hat(n)|^2`.
    pub fn mode_weight(&self, n: i64) -> f64 {
        underline(n).powf(2.0 * self.s)
    }
}

/// `max(2*pi*|n|, 1)`.
pub fn underline(n: i64) -> f64 {
    (2.0 * PI * n.unsigned_abs() as f64).max(1.0)
}

/// Max of `|approx - exact|` over `m` boundary samples offset half a spacing
/// from the uniform grid.
pub fn sup_error_on_boundary<F, G>(
    approx: F,
    exact: G,
    curve: &BoundaryCurve,
    m: usize,
) -> Result<f64, AnalysisError>
where
    F: Fn(Cx) -> Result<Cx, String>,
    G: Fn(Cx) -> Cx,
{
    if m < 256 {
        return Err(AnalysisError::TooFewSamples(m));
    }
    let mut sup = 0.0f64;
    for j in 0..m {
        let tau = (j as f64 + 0.5) / m as f64;
        let z = curve.param(tau);
        let a = approx(z).map_err(|msg| AnalysisError::Eval { tau, msg })?;
        sup = sup.max((a - exact(z)).norm());
    }
    Ok(sup)
}

/// Fourier-multiplier Hilbert transform `b_n = -i * sgn(n) * a_n` on a
/// centered coefficient window `a[-M..M]`.
pub fn hilbert_transform(coeffs: &[Cx]) -> Result<Vec<Cx>, AnalysisError> {
    if coeffs.len().is_multiple_of(2) {
        return Err(AnalysisError::BadWindow(coeffs.len()));
    }
    let half = (coeffs.len() / 2) as i64;
    Ok(coeffs
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let n = i as i64 - half;
            match n.cmp(&0) {
                std::cmp::Ordering::Greater => -Cx::i() * a,
                std::cmp::Ordering::Equal => Cx::new(0.0, 0.0),
                std::cmp::Ordering::Less => Cx::i() * a,
            }
        })
        .collect())
}

/// Discrete `H^s` norm of uniform periodic samples:
/// `sqrt(sum |g_hat(n)|^2 * max(2*pi*|n|,1)^(2s))` with the FFT convention
/// `g_hat(n) = (1/M) * sum_j g_j e^{-2*pi*i*j*n/M}`.
pub fn discrete_hs_norm(samples: &[f64], s: f64) -> Result<f64, AnalysisError> {
    let m = samples.len();
    if m < 64 || !m.is_power_of_two() {
        return Err(AnalysisError::BadSampleCount(m));
    }
    let mut buf: Vec<Cx> = samples.iter().map(|&x| Cx::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let params = SobolevParams { s };
    let mut sum = 0.0;
    for (k, v) in buf.iter().enumerate() {
        let n = if k <= m / 2 {
            k as i64
        } else {
            k as i64 - m as i64
        };
        let ghat = v / m as f64;
        sum += ghat.norm_sqr() * params.mode_weight(n);
    }
    Ok(sum.sqrt())
}

/// Continuous branch of a sampled angle sequence by nearest-angle
/// continuation.
fn unwrap_angles(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut prev = match raw.first() {
        Some(&v) => v,
        None => return out,
    };
    out.push(prev);
    for &v in &raw[1..] {
        let mut d = v - prev;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        prev += d;
        out.push(prev);
    }
    out
}

/// Per-N ratio `||h - h_N||_{H^s} / ||g - g_N||_{H^s}` of the boundary traces
/// for a simply-connected problem whose exact map is known. Exact traces come
/// from the map: `g = log|f(z)/(z - z0)|` and `h` is the phase-unwrapped
/// argument of the same quantity, anchored by the `f'(z0) > 0` normalization.
/// Ratios are reported only while the g-error norm exceeds `1e-13`.
pub fn conjugate_error_ratio(
    region: &Region,
    z0: Cx,
    exact: &ExactMapCase,
    n_list: &[usize],
    rtilde_f: f64,
    s: f64,
) -> Result<Vec<(usize, f64)>, AnalysisError> {
    const M: usize = 1024;
    let curve = region.outer();
    let mut out = Vec::new();
    for &n in n_list {
        let arranged = arrange_component(curve, n, rtilde_f, Side::Exterior)?;
        let rhs = dirichlet_data_simply(z0, &arranged.colloc)?;
        let (charges, _) = solve_dirichlet(KernelKind::Dsm, &arranged, &rhs)?;
        let v0 = eval_conjugate(&charges, z0)?;

        let mut dg = Vec::with_capacity(M);
        let mut h_exact_raw = Vec::with_capacity(M);
        let mut h_num = Vec::with_capacity(M);
        for j in 0..M {
            let z = curve.param(j as f64 / M as f64);
            let q = exact.forward(z) / (z - z0);
            h_exact_raw.push(q.im.atan2(q.re));
            dg.push(q.norm().ln() - eval_potential(&charges, z)?);
            h_num.push(eval_conjugate(&charges, z)? - v0);
        }
        let h_exact = unwrap_angles(&h_exact_raw);
        let dh: Vec<f64> = h_exact
            .iter()
            .zip(&h_num)
            .map(|(he, hn)| he - hn)
            .collect();

        let g_norm = discrete_hs_norm(&dg, s)?;
        if g_norm > 1e-13 {
            out.push((n, discrete_hs_norm(&dh, s)? / g_norm));
        }
    }
    Ok(out)
}

/// Per-N measurements of a convergence sweep.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub err_forward: Option<f64>,
    pub err_backward: Option<f64>,
    pub err_modulus: Option<f64>,
    pub residual_f: Option<f64>,
    pub residual_b: Option<f64>,
    pub cond_f: Option<f64>,
    pub cond_b: Option<f64>,
    /// Build failure message for this N, if the sweep continued past one.
    pub failure: Option<String>,
}

/// A sweep problem: region, base point, offsets, and the exact map when one
/// is available (errors stay empty without it).
pub struct SweepProblem {
    pub region: Region,
    pub z0: Cx,
    pub exact: Option<ExactMapCase>,
    pub rtilde_f: f64,
    pub rtilde_b: f64,
    /// Boundary-sample multiplier: sup errors use `max(256, m_factor * N)`
    /// samples.
    pub m_factor: usize,
}

fn record_for(problem: &SweepProblem, n: usize) -> Result<ConvergenceRecord, String> {
    let config =
        PointConfig::new(n, problem.rtilde_f, problem.rtilde_b).map_err(|e| e.to_string())?;
    let connectivity = problem.region.connectivity();
    let (map, report_f) = if connectivity == 1 {
        build_forward_simply(&problem.region, problem.z0, &config).map_err(|e| e.to_string())?
    } else {
        build_forward_multiply(
            &problem.region,
            problem.z0,
            &config,
            SideConditions::AmanoCompatible,
        )
        .map_err(|e| e.to_string())?
    };

    let mut record = ConvergenceRecord {
        n,
        residual_f: Some(report_f.residual_inf),
        cond_f: report_f.cond_estimate,
        ..Default::default()
    };

    let m = (problem.m_factor * n).max(256);
    if let Some(exact) = &problem.exact {
        let mut sup = 0.0f64;
        for curve in problem.region.components() {
            let e = sup_error_on_boundary(
                |z| map.eval(z).map_err(|e| e.to_string()),
                |z| exact.forward(z),
                curve,
                m,
            )
            .map_err(|e| e.to_string())?;
            sup = sup.max(e);
        }
        record.err_forward = Some(sup);
        if let (Some(rho), Some(&r_n)) = (exact.modulus(), map.moduli().first()) {
            record.err_modulus = Some((r_n - rho).abs());
        }
    }

    // backward build for connectivity 1 and 2 only
    let canonical = match connectivity {
        1 => Some(Canonical::Disk),
        2 => Some(Canonical::Annulus {
            modulus: map.moduli()[0],
        }),
        _ => None,
    };
    if let Some(canonical) = canonical {
        let corr = boundary_correspondence(&map, &config).map_err(|e| e.to_string())?;
        let (bwd, report_b) =
            build_backward(&corr, &config, canonical).map_err(|e| e.to_string())?;
        record.residual_b = Some(report_b.residual_inf);
        record.cond_b = report_b.cond_estimate;
        if let Some(exact) = &problem.exact {
            let origin = Cx::new(0.0, 0.0);
            let mut circles = vec![BoundaryCurve::circle(origin, 1.0).map_err(|e| e.to_string())?];
            if let Some(rho) = exact.modulus() {
                circles.push(BoundaryCurve::circle(origin, rho).map_err(|e| e.to_string())?);
            }
            let mut sup = 0.0f64;
            for circle in &circles {
                let e = sup_error_on_boundary(
                    |w| bwd.eval(w).map_err(|e| e.to_string()),
                    |w| exact.backward(w),
                    circle,
                    m,
                )
                .map_err(|e| e.to_string())?;
                sup = sup.max(e);
            }
            record.err_backward = Some(sup);
        }
    }
    Ok(record)
}

/// Runs builds and error measurements for every N in the list; failures are
/// recorded per N and the sweep continues.
pub fn convergence_sweep(problem: &SweepProblem, n_list: &[usize]) -> Vec<ConvergenceRecord> {
    n_list
        .iter()
        .map(|&n| {
            record_for(problem, n).unwrap_or_else(|msg| ConvergenceRecord {
                n,
                failure: Some(msg),
                ..Default::default()
            })
        })
        .collect()
}

/// Longest initial segment of strictly decreasing errors, ending (inclusive)
/// at the first value below the plateau floor.
pub fn pre_plateau(errs: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    for &(n, e) in errs {
        match out.last() {
            None => out.push((n, e)),
            Some(&(_, prev)) => {
                if prev < PLATEAU_FLOOR || e >= prev {
                    break;
                }
                out.push((n, e));
            }
        }
        if e < PLATEAU_FLOOR {
            break;
        }
    }
    out
}

/// True when the errors decrease strictly until the plateau floor is reached
/// (after which anything goes).
pub fn monotone_pre_plateau(errs: &[(usize, f64)]) -> bool {
    for pair in errs.windows(2) {
        let (_, prev) = pair[0];
        let (_, next) = pair[1];
        if prev < PLATEAU_FLOOR {
            return true;
        }
        if next >= prev {
            return false;
        }
    }
    true
}

/// Least-squares slope of `log10(err)` against `N`; `None` with fewer than
/// two positive points.
pub fn fitted_slope(points: &[(usize, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, e)| e > 0.0)
        .map(|&(n, e)| (n as f64, e.log10()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::TAU;

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn sup_error_basics() {
        let curve = BoundaryCurve::circle(cx(0.0, 0.0), 1.0).unwrap();
        let zero = sup_error_on_boundary(Ok, |z| z, &curve, 256).unwrap();
        assert_eq!(zero, 0.0);
        let shifted =
            sup_error_on_boundary(|z| Ok(z + cx(1e-5, 0.0)), |z| z, &curve, 256).unwrap();
        assert_abs_diff_eq!(shifted, 1e-5, epsilon = 1e-15);
        assert!(matches!(
            sup_error_on_boundary(Ok, |z| z, &curve, 100),
            Err(AnalysisError::TooFewSamples(100))
        ));
    }

    #[test]
    fn hilbert_cosine_to_sine() {
        // cos has a_{+-1} = 1/2; its conjugate sin has b_{+-1} = -+ i/2
        let half = Cx::new(0.5, 0.0);
        let coeffs = [half, Cx::new(0.0, 0.0), half];
        let out = hilbert_transform(&coeffs).unwrap();
        assert!((out[0] - Cx::new(0.0, 0.5)).norm() < 1e-16);
        assert_eq!(out[1], Cx::new(0.0, 0.0));
        assert!((out[2] - Cx::new(0.0, -0.5)).norm() < 1e-16);
    }

    #[test]
    fn hilbert_kills_constants() {
        let coeffs = [Cx::new(0.0, 0.0), Cx::new(3.0, -1.0), Cx::new(0.0, 0.0)];
        let out = hilbert_transform(&coeffs).unwrap();
        assert!(out.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn hilbert_involution() {
        let mut rng = StdRng::seed_from_u64(1);
        let coeffs: Vec<Cx> = (0..9)
            .map(|_| cx(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let twice = hilbert_transform(&hilbert_transform(&coeffs).unwrap()).unwrap();
        for (i, (a, b)) in coeffs.iter().zip(&twice).enumerate() {
            let expect = if i == 4 { cx(0.0, 0.0) } else { -a };
            assert!((b - expect).norm() <= 1e-15);
        }
        assert!(hilbert_transform(&coeffs[..4]).is_err());
    }

    #[test]
    fn hs_norm_of_cosine() {
        let m = 128;
        let samples: Vec<f64> = (0..m).map(|j| (TAU * j as f64 / m as f64).cos()).collect();
        let n0 = discrete_hs_norm(&samples, 0.0).unwrap();
        assert_abs_diff_eq!(n0, 0.5f64.sqrt(), epsilon = 1e-12);
        let n1 = discrete_hs_norm(&samples, 1.0).unwrap();
        assert_abs_diff_eq!(n1, TAU * 0.5f64.sqrt(), epsilon = 1e-11);
    }

    #[test]
    fn hs_norm_of_constant() {
        let samples = vec![1.0; 64];
        for s in [0.0, 1.0, 2.5] {
            assert_abs_diff_eq!(discrete_hs_norm(&samples, s).unwrap(), 1.0, epsilon = 1e-12);
        }
        assert!(discrete_hs_norm(&samples[..60], 0.0).is_err());
        assert!(discrete_hs_norm(&vec![1.0; 100], 0.0).is_err());
    }

    #[test]
    fn hs_norm_parseval_matches_rms() {
        let mut rng = StdRng::seed_from_u64(2);
        let samples: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rms = (samples.iter().map(|x| x * x).sum::<f64>() / 256.0).sqrt();
        assert_abs_diff_eq!(
            discrete_hs_norm(&samples, 0.0).unwrap(),
            rms,
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_mode_ratio_is_one() {
        // the conjugate of a single cosine mode is the sine mode of equal norm
        let m = 256;
        for mode in [1, 3, 10] {
            let g: Vec<f64> = (0..m)
                .map(|j| (TAU * mode as f64 * j as f64 / m as f64).cos())
                .collect();
            let h: Vec<f64> = (0..m)
                .map(|j| (TAU * mode as f64 * j as f64 / m as f64).sin())
                .collect();
            for s in [0.0, 1.0] {
                let ratio =
                    discrete_hs_norm(&h, s).unwrap() / discrete_hs_norm(&g, s).unwrap();
                assert_abs_diff_eq!(ratio, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn unwrap_angles_continues_across_branch() {
        let raw: Vec<f64> = (0..16)
            .map(|j| {
                let t = TAU * j as f64 / 16.0 + 3.0;
                t.sin().atan2(t.cos()) // wrapped angle
            })
            .collect();
        let un = unwrap_angles(&raw);
        for pair in un.windows(2) {
            assert!((pair[1] - pair[0] - TAU / 16.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_ratio_bounded() {
        let region = Region::disk(1.0).unwrap();
        let z0 = cx(0.5, 0.0);
        let exact = reference::mobius_case(z0).unwrap();
        let ratios =
            conjugate_error_ratio(&region, z0, &exact, &[8, 16, 24], 0.2, 1.0).unwrap();
        assert_eq!(ratios.len(), 3);
        for &(n, r) in &ratios {
            assert!(r <= 10.0, "ratio {r} at N = {n}");
            assert!(r > 0.0);
        }
    }

    #[test]
    fn ratio_filtered_when_g_is_reproduced_exactly() {
        // z0 = 0 makes the boundary data vanish, so g_N = g to rounding and
        // no ratio clears the reporting floor
        let region = Region::disk(1.0).unwrap();
        let exact = reference::mobius_case(cx(0.0, 0.0)).unwrap();
        let ratios =
            conjugate_error_ratio(&region, cx(0.0, 0.0), &exact, &[8, 16], 0.2, 1.0).unwrap();
        assert!(ratios.is_empty());
    }

    #[test]
    fn sweep_identity_disk() {
        let problem = SweepProblem {
            region: Region::disk(1.0).unwrap(),
            z0: cx(0.0, 0.0),
            exact: Some(reference::mobius_case(cx(0.0, 0.0)).unwrap()),
            rtilde_f: 0.2,
            rtilde_b: 0.1,
            m_factor: 16,
        };
        let records = convergence_sweep(&problem, &[8, 16, 32]);
        for r in &records {
            assert!(r.failure.is_none());
            assert!(r.err_forward.unwrap() <= 1e-12, "forward identity exact");
            assert!(r.residual_f.unwrap() <= 1e-9);
        }
    }

    #[test]
    fn sweep_records_failures_and_continues() {
        let problem = SweepProblem {
            region: Region::disk(1.0).unwrap(),
            z0: cx(2.0, 0.0), // outside: every build fails
            exact: None,
            rtilde_f: 0.2,
            rtilde_b: 0.1,
            m_factor: 16,
        };
        let records = convergence_sweep(&problem, &[8, 16]);
        assert_eq!(records.len(), 2);
        for r in &records {
            assert!(r.failure.is_some());
            assert!(r.err_forward.is_none());
        }
    }

    #[test]
    fn plateau_and_slope_helpers() {
        let errs = [
            (8, 1e-2),
            (16, 1e-4),
            (24, 1e-6),
            (32, 1e-12),
            (40, 3e-12),
        ];
        let pre = pre_plateau(&errs);
        assert_eq!(pre.len(), 4); // stops after the first sub-floor value
        assert!(monotone_pre_plateau(&errs)); // increase happens post-plateau
        assert!(!monotone_pre_plateau(&[(8, 1e-2), (16, 2e-2)]));
        let slope = fitted_slope(&pre).unwrap();
        assert!(slope < -0.3, "slope {slope}");
        assert!(fitted_slope(&errs[..1]).is_none());
    }
}
