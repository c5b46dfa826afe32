//! Complex scalars, boundary-curve parameterizations, and region definitions.
//!
//! Curves are smooth closed curves given by an `S^1` parameterization
//! `tau in [0,1) -> C` together with its derivative. All stored curves are
//! positively oriented (winding number +1 about an interior point); solvers
//! that need inward offsets for hole boundaries handle the sign themselves
//! instead of reversing the stored parameterization.

use num_complex::Complex64;
use std::f64::consts::TAU;
use thiserror::Error;

/// Complex plane coordinate.
pub type Cx = Complex64;

/// Default sample count for winding-number queries.
pub const WINDING_SAMPLES: usize = 1024;

/// Distance below which a point is considered to sit on the boundary.
pub const BOUNDARY_AMBIGUITY: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("circle radius must be positive, got {0}")]
    NonpositiveRadius(f64),
    #[error("cassini oval needs a > 1 for a single loop, got a = {0}")]
    CassiniNotSingleLoop(f64),
    #[error("curve scale must be positive, got {0}")]
    NonpositiveScale(f64),
    #[error("non-finite coordinate in geometric input")]
    NonFinite,
    #[error("point is within {BOUNDARY_AMBIGUITY:e} of a boundary sample; containment is ambiguous")]
    BoundaryAmbiguous,
    #[error("region needs at least one boundary component")]
    EmptyRegion,
    #[error("hole boundary {0} is not strictly inside the outer boundary")]
    HoleOutsideOuter(usize),
    #[error("hole boundaries {0} and {1} overlap")]
    HolesOverlap(usize, usize),
    #[error("annulus modulus must lie in (0,1), got {0}")]
    BadModulus(f64),
    #[error("scaled cassini boundary needs a/b > 1, got a = {a}, b = {b}")]
    FrameShape { a: f64, b: f64 },
}

/// Orientation of a stored curve. Constructors only ever produce positively
/// oriented curves; the variant exists so the convention is explicit at the
/// type level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CurveKind {
    Circle { center: Cx, radius: f64 },
    /// Single-loop Cassini oval `|z^2 - scale^2| = (scale * a)^2 / ...` in the
    /// normalized form: the unit-scale curve satisfies `|z+1||z-1| = a^2` and
    /// the stored curve is `scale` times it (foci at +-scale).
    Cassini { a: f64, scale: f64 },
}

/// Smooth closed curve with parameterization, derivative, and orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCurve {
    kind: CurveKind,
    orientation: Orientation,
}

impl BoundaryCurve {
    /// Circle of the given radius about `center`, traversed counterclockwise.
    pub fn circle(center: Cx, radius: f64) -> Result<Self, GeometryError> {
        if !(center.re.is_finite() && center.im.is_finite() && radius.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if radius <= 0.0 {
            return Err(GeometryError::NonpositiveRadius(radius));
        }
        Ok(Self {
            kind: CurveKind::Circle { center, radius },
            orientation: Orientation::Positive,
        })
    }

    /// Single-loop Cassini oval `|z + s||z - s| = (s*a)^2` with foci at
    /// `+-s`, `s = scale`, in polar form
    /// `z(tau) = scale * r(2*pi*tau) * e^{2*pi*i*tau}` where
    /// `r(phi) = sqrt(cos(2*phi) + sqrt(a^4 - sin^2(2*phi)))`.
    ///
    /// `scale = 1` gives the curve `|z+1||z-1| = a^2`. A boundary
    /// `|z^2 - b^2| = c^2` is obtained as `cassini_oval(c/b, b)`, which
    /// requires `c/b > 1` (single-loop regime).
    pub fn cassini_oval(a: f64, scale: f64) -> Result<Self, GeometryError> {
        if !(a.is_finite() && scale.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if a <= 1.0 {
            return Err(GeometryError::CassiniNotSingleLoop(a));
        }
        if scale <= 0.0 {
            return Err(GeometryError::NonpositiveScale(scale));
        }
        Ok(Self {
            kind: CurveKind::Cassini { a, scale },
            orientation: Orientation::Positive,
        })
    }

    /// Point on the curve at parameter `tau` (1-periodic).
    pub fn param(&self, tau: f64) -> Cx {
        match self.kind {
            CurveKind::Circle { center, radius } => {
                center + radius * (Cx::i() * TAU * tau).exp()
            }
            CurveKind::Cassini { a, scale } => {
                let phi = TAU * tau;
                let r = cassini_radius(a, phi);
                scale * r * (Cx::i() * phi).exp()
            }
        }
    }

    /// Derivative `d/dtau` of the parameterization.
    pub fn deriv(&self, tau: f64) -> Cx {
        match self.kind {
            CurveKind::Circle { radius, .. } => {
                Cx::i() * TAU * radius * (Cx::i() * TAU * tau).exp()
            }
            CurveKind::Cassini { a, scale } => {
                let phi = TAU * tau;
                let s = (a.powi(4) - (2.0 * phi).sin().powi(2)).sqrt();
                let r = cassini_radius(a, phi);
                // 2 r r' = -2 sin(2 phi) - sin(4 phi) / s
                let rp = -((2.0 * phi).sin() + (4.0 * phi).sin() / (2.0 * s)) / r;
                TAU * scale * (Cx::i() * phi).exp() * Cx::new(rp, r)
            }
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// A point strictly inside the curve, used as winding reference.
    pub fn interior_point(&self) -> Cx {
        match self.kind {
            CurveKind::Circle { center, .. } => center,
            CurveKind::Cassini { .. } => Cx::new(0.0, 0.0),
        }
    }

    /// `m` equispaced samples `param(j/m)`, `j = 0..m-1`.
    pub fn samples(&self, m: usize) -> Vec<Cx> {
        (0..m).map(|j| self.param(j as f64 / m as f64)).collect()
    }

    /// Winding number of the curve about `z`, from the discrete argument sum
    /// over `WINDING_SAMPLES` boundary samples.
    pub fn winding_number(&self, z: Cx) -> Result<i32, GeometryError> {
        winding_of_samples(&self.samples(WINDING_SAMPLES), z)
    }
}

fn cassini_radius(a: f64, phi: f64) -> f64 {
    let s = (a.powi(4) - (2.0 * phi).sin().powi(2)).sqrt();
    ((2.0 * phi).cos() + s).sqrt()
}

/// Winding number of the closed polygon `samples` about `z`.
pub fn winding_of_samples(samples: &[Cx], z: Cx) -> Result<i32, GeometryError> {
    let mut total = 0.0;
    for (i, &p) in samples.iter().enumerate() {
        let q = samples[(i + 1) % samples.len()];
        let a = p - z;
        let b = q - z;
        if a.norm() < BOUNDARY_AMBIGUITY {
            return Err(GeometryError::BoundaryAmbiguous);
        }
        // signed angle from a to b
        total += (a.re * b.im - a.im * b.re).atan2(a.re * b.re + a.im * b.im);
    }
    Ok((total / TAU).round() as i32)
}

/// A simply- or multiply-connected region given by its ordered boundary
/// components: component 0 is the outer boundary, components `1..n-1` bound
/// the holes. All components are stored positively oriented.
#[derive(Debug, Clone)]
pub struct Region {
    components: Vec<BoundaryCurve>,
}

impl Region {
    /// Builds a region and validates that every hole lies strictly inside the
    /// outer boundary and that holes are pairwise disjoint (sampled
    /// winding-number checks).
    pub fn new(components: Vec<BoundaryCurve>) -> Result<Self, GeometryError> {
        if components.is_empty() {
            return Err(GeometryError::EmptyRegion);
        }
        let outer = components[0].samples(WINDING_SAMPLES);
        for (i, hole) in components.iter().enumerate().skip(1) {
            for &p in &hole.samples(64) {
                if winding_of_samples(&outer, p)? != 1 {
                    return Err(GeometryError::HoleOutsideOuter(i));
                }
            }
        }
        for i in 1..components.len() {
            let hole_i = components[i].samples(WINDING_SAMPLES);
            for (j, other) in components.iter().enumerate().skip(i + 1) {
                for &p in &other.samples(64) {
                    if winding_of_samples(&hole_i, p)? != 0 {
                        return Err(GeometryError::HolesOverlap(i, j));
                    }
                }
            }
        }
        Ok(Self { components })
    }

    /// Disk of the given radius centered at the origin.
    pub fn disk(radius: f64) -> Result<Self, GeometryError> {
        Self::new(vec![BoundaryCurve::circle(Cx::new(0.0, 0.0), radius)?])
    }

    /// Region bounded by the Cassini oval `|z+1||z-1| < a^2`.
    pub fn cassini_oval(a: f64) -> Result<Self, GeometryError> {
        Self::new(vec![BoundaryCurve::cassini_oval(a, 1.0)?])
    }

    /// Doubly-connected region between two confocal-family Cassini ovals,
    /// `|z^2 - b1^2| < a1^2` and `|z^2 - b2^2| > a2^2`.
    pub fn cassini_frame(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self, GeometryError> {
        let outer = scaled_cassini(a1, b1)?;
        let hole = scaled_cassini(a2, b2)?;
        Self::new(vec![outer, hole])
    }

    /// Concentric annulus `rho < |z| < 1`.
    pub fn annulus(rho: f64) -> Result<Self, GeometryError> {
        if !(0.0 < rho && rho < 1.0) {
            return Err(GeometryError::BadModulus(rho));
        }
        let origin = Cx::new(0.0, 0.0);
        Self::new(vec![
            BoundaryCurve::circle(origin, 1.0)?,
            BoundaryCurve::circle(origin, rho)?,
        ])
    }

    pub fn components(&self) -> &[BoundaryCurve] {
        &self.components
    }

    pub fn outer(&self) -> &BoundaryCurve {
        &self.components[0]
    }

    /// Number of boundary components.
    pub fn connectivity(&self) -> usize {
        self.components.len()
    }

    /// True iff `z` lies inside the outer boundary and outside every hole.
    pub fn contains(&self, z: Cx) -> Result<bool, GeometryError> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if self.components[0].winding_number(z)? != 1 {
            return Ok(false);
        }
        for hole in &self.components[1..] {
            if hole.winding_number(z)? != 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Axis-aligned bounding box of the sampled boundary, as (min, max).
    pub fn bounding_box(&self) -> (Cx, Cx) {
        let mut lo = Cx::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Cx::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &p in &self.components[0].samples(512) {
            lo.re = lo.re.min(p.re);
            lo.im = lo.im.min(p.im);
            hi.re = hi.re.max(p.re);
            hi.im = hi.im.max(p.im);
        }
        (lo, hi)
    }

    /// Diameter estimate (diagonal of the bounding box).
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }
}

/// Boundary `|z^2 - b^2| = a^2` realized as `b * cassini_oval(a/b)`.
fn scaled_cassini(a: f64, b: f64) -> Result<BoundaryCurve, GeometryError> {
    if b <= 0.0 {
        return Err(GeometryError::NonpositiveScale(b));
    }
    if a / b <= 1.0 {
        return Err(GeometryError::FrameShape { a, b });
    }
    BoundaryCurve::cassini_oval(a / b, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn circle_quarter_points() {
        let c = BoundaryCurve::circle(Cx::new(0.0, 0.0), 1.0).unwrap();
        let p = c.param(0.0);
        assert_abs_diff_eq!(p.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-15);
        let q = c.param(0.25);
        assert_abs_diff_eq!(q.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.im, 1.0, epsilon = 1e-15);
        let c2 = BoundaryCurve::circle(Cx::new(0.5, 0.0), 2.0).unwrap();
        let r = c2.param(0.5);
        assert_abs_diff_eq!(r.re, -1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(r.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn circle_rejects_bad_radius() {
        assert!(BoundaryCurve::circle(Cx::new(0.0, 0.0), 0.0).is_err());
        assert!(BoundaryCurve::circle(Cx::new(0.0, 0.0), -1.0).is_err());
    }

    #[test]
    fn cassini_axis_crossings() {
        // real-axis vertex solves |z^2 - 1| = a^2 at z = sqrt(a^2 + 1)
        let a = 1.1;
        let c = BoundaryCurve::cassini_oval(a, 1.0).unwrap();
        let p = c.param(0.0);
        assert_abs_diff_eq!(p.re, (a * a + 1.0).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.re, 1.486_606_874_731_850_6, epsilon = 1e-12);
        assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-12);
        // imaginary-axis crossing at sqrt(a^2 - 1)
        let q = c.param(0.25);
        assert_abs_diff_eq!(q.re, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q.im, (a * a - 1.0f64).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(q.im, 0.458_257_569_495_584, epsilon = 1e-12);
    }

    #[test]
    fn cassini_rejects_two_loop_regime() {
        assert!(BoundaryCurve::cassini_oval(1.0, 1.0).is_err());
        assert!(BoundaryCurve::cassini_oval(0.9, 1.0).is_err());
    }

    #[test]
    fn cassini_implicit_equation_on_samples() {
        let a = 1.1;
        let c = BoundaryCurve::cassini_oval(a, 1.0).unwrap();
        for j in 0..64 {
            let z = c.param(j as f64 / 64.0);
            let v = ((z + 1.0) * (z - 1.0)).norm();
            assert_abs_diff_eq!(v, a * a, epsilon = 1e-12);
        }
    }

    #[test]
    fn curves_close_up() {
        for c in [
            BoundaryCurve::circle(Cx::new(0.3, -0.2), 1.7).unwrap(),
            BoundaryCurve::cassini_oval(1.1, 1.0).unwrap(),
            BoundaryCurve::cassini_oval(2.0, 7.0).unwrap(),
        ] {
            assert!((c.param(0.0) - c.param(1.0)).norm() <= 1e-12);
        }
    }

    #[test]
    fn deriv_matches_central_differences() {
        let h = 1e-6;
        for c in [
            BoundaryCurve::circle(Cx::new(0.2, 0.1), 1.3).unwrap(),
            BoundaryCurve::cassini_oval(1.1, 1.0).unwrap(),
            BoundaryCurve::cassini_oval(2.0, 1.0).unwrap(),
        ] {
            for j in 0..128 {
                let t = j as f64 / 128.0;
                let fd = (c.param(t + h) - c.param(t - h)) / (2.0 * h);
                let d = c.deriv(t);
                assert!(
                    (fd - d).norm() <= 1e-6 * d.norm().max(1.0),
                    "derivative mismatch at tau = {t}: {fd} vs {d}"
                );
            }
        }
    }

    #[test]
    fn derivative_never_vanishes() {
        for c in [
            BoundaryCurve::circle(Cx::new(0.0, 0.0), 0.5).unwrap(),
            BoundaryCurve::cassini_oval(1.05, 1.0).unwrap(),
        ] {
            for j in 0..256 {
                assert!(c.deriv(j as f64 / 256.0).norm() > 1e-8);
            }
        }
    }

    #[test]
    fn builtin_curves_wind_once_positively() {
        for c in [
            BoundaryCurve::circle(Cx::new(0.4, 0.4), 2.0).unwrap(),
            BoundaryCurve::cassini_oval(1.1, 1.0).unwrap(),
            BoundaryCurve::cassini_oval(2.0, 1.0).unwrap(),
        ] {
            assert_eq!(c.winding_number(c.interior_point()).unwrap(), 1);
            assert_eq!(c.orientation(), Orientation::Positive);
        }
    }

    #[test]
    fn disk_containment() {
        let r = Region::disk(1.0).unwrap();
        assert!(r.contains(Cx::new(0.0, 0.0)).unwrap());
        assert!(!r.contains(Cx::new(2.0, 0.0)).unwrap());
    }

    #[test]
    fn boundary_point_is_ambiguous() {
        let r = Region::disk(1.0).unwrap();
        // param(0) = 1 is itself a winding sample
        assert!(matches!(
            r.contains(Cx::new(1.0, 0.0)),
            Err(GeometryError::BoundaryAmbiguous)
        ));
    }

    #[test]
    fn frame_containment() {
        let r = Region::cassini_frame(2.0 * 14.0f64.sqrt(), 7.0, 2.0, 1.0).unwrap();
        assert_eq!(r.connectivity(), 2);
        // z = 2 lies inside the hole (|4 - 1| = 3 < 4), z = 3 in the frame
        assert!(!r.contains(Cx::new(2.0, 0.0)).unwrap());
        assert!(r.contains(Cx::new(3.0, 0.0)).unwrap());
        assert!(!r.contains(Cx::new(12.0, 0.0)).unwrap());
    }

    #[test]
    fn annulus_factory_validates_modulus() {
        assert!(Region::annulus(0.5).is_ok());
        assert!(Region::annulus(0.0).is_err());
        assert!(Region::annulus(1.0).is_err());
    }

    #[test]
    fn region_rejects_hole_outside_outer() {
        let outer = BoundaryCurve::circle(Cx::new(0.0, 0.0), 1.0).unwrap();
        let stray = BoundaryCurve::circle(Cx::new(5.0, 0.0), 0.5).unwrap();
        assert!(matches!(
            Region::new(vec![outer, stray]),
            Err(GeometryError::HoleOutsideOuter(1))
        ));
    }

    #[test]
    fn region_rejects_overlapping_holes() {
        let outer = BoundaryCurve::circle(Cx::new(0.0, 0.0), 4.0).unwrap();
        let h1 = BoundaryCurve::circle(Cx::new(0.0, 0.0), 1.0).unwrap();
        let h2 = BoundaryCurve::circle(Cx::new(0.5, 0.0), 1.0).unwrap();
        assert!(matches!(
            Region::new(vec![outer, h1, h2]),
            Err(GeometryError::HolesOverlap(1, 2))
        ));
    }

    proptest! {
        #[test]
        fn cassini_satisfies_defining_equation(a in 1.01f64..3.0, tau in 0.0f64..1.0) {
            let c = BoundaryCurve::cassini_oval(a, 1.0).unwrap();
            let z = c.param(tau);
            let v = ((z + 1.0) * (z - 1.0)).norm();
            prop_assert!((v - a * a).abs() <= 1e-11 * a * a);
        }

        #[test]
        fn scaled_cassini_satisfies_frame_equation(ab in 1.05f64..2.5, b in 0.2f64..8.0, tau in 0.0f64..1.0) {
            // curve |z^2 - b^2| = (ab*b)^2 via scaling
            let c = BoundaryCurve::cassini_oval(ab, b).unwrap();
            let z = c.param(tau);
            let lhs = (z * z - b * b).norm();
            let rhs = (ab * b) * (ab * b);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs);
        }
    }
}
