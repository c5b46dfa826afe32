//! Exact conformal maps for the built-in test regions, used as oracles.
//!
//! Square roots take principal values throughout; the constructors verify the
//! forward/backward pair composes to the identity on canonical boundary
//! samples rather than proving branch-cut avoidance analytically.

use crate::geometry::Cx;
use std::f64::consts::TAU;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("base point must satisfy |z0| < 1, got |z0| = {0}")]
    BasePointOutsideDisk(f64),
    #[error("cassini parameter must satisfy a > 1, got {0}")]
    BadCassiniParameter(f64),
    #[error("frame parameters must satisfy a/b > 1 per boundary, got a = {a}, b = {b}")]
    FrameShape { a: f64, b: f64 },
    #[error("frame compatibility condition violated: (a1^4-b1^4)/b1^2 = {lhs} vs (a2^4-b2^4)/b2^2 = {rhs}")]
    FrameCondition { lhs: f64, rhs: f64 },
    #[error("frame modulus {0} not in (0,1); boundaries are ordered wrongly")]
    FrameModulus(f64),
    #[error("forward/backward pair fails to invert on canonical samples (max deviation {0:e})")]
    InverseMismatch(f64),
}

type MapFn = Box<dyn Fn(Cx) -> Cx + Send + Sync>;

/// An exactly known forward/backward conformal map pair, with the annulus
/// modulus when the region is doubly connected.
pub struct ExactMapCase {
    name: &'static str,
    forward: MapFn,
    backward: MapFn,
    modulus: Option<f64>,
}

impl ExactMapCase {
    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn forward(&self, z: Cx) -> Cx {
        (self.forward)(z)
    }

    pub fn backward(&self, w: Cx) -> Cx {
        (self.backward)(w)
    }

    pub fn modulus(&self) -> Option<f64> {
        self.modulus
    }

    /// Checks `forward(backward(w)) = w` on 64 samples of each canonical
    /// boundary circle.
    fn verify_inverse(self) -> Result<Self, ReferenceError> {
        let mut radii = vec![1.0];
        if let Some(rho) = self.modulus {
            radii.push(rho);
        }
        let mut worst = 0.0f64;
        for r in radii {
            for j in 0..64 {
                let w = r * (Cx::i() * TAU * (j as f64 + 0.5) / 64.0).exp();
                worst = worst.max((self.forward(self.backward(w)) - w).norm());
            }
        }
        if worst > 1e-12 {
            return Err(ReferenceError::InverseMismatch(worst));
        }
        Ok(self)
    }
}

impl std::fmt::Debug for ExactMapCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactMapCase")
            .field("name", &self.name)
            .field("modulus", &self.modulus)
            .finish()
    }
}

/// Unit disk with base point `z0`: `f(z) = (z - z0)/(1 - conj(z0) z)` and
/// `f*(w) = (w + z0)/(1 + conj(z0) w)`.
pub fn mobius_case(z0: Cx) -> Result<ExactMapCase, ReferenceError> {
    if z0.norm() >= 1.0 {
        return Err(ReferenceError::BasePointOutsideDisk(z0.norm()));
    }
    let z0c = z0.conj();
    ExactMapCase {
        name: "disk_mobius",
        forward: Box::new(move |z| (z - z0) / (1.0 - z0c * z)),
        backward: Box::new(move |w| (w + z0) / (1.0 + z0c * w)),
        modulus: None,
    }
    .verify_inverse()
}

/// Cassini oval `|z+1||z-1| < a^2` onto the unit disk:
/// `f(z) = a z / sqrt(a^4 - 1 + z^2)`, `f*(w) = sqrt(a^4 - 1) w / sqrt(a^2 - w^2)`.
pub fn cassini_case(a: f64) -> Result<ExactMapCase, ReferenceError> {
    if a <= 1.0 || !a.is_finite() {
        return Err(ReferenceError::BadCassiniParameter(a));
    }
    let a4m1 = a.powi(4) - 1.0;
    let a2 = a * a;
    ExactMapCase {
        name: "cassini_oval",
        forward: Box::new(move |z| a * z / (Cx::new(a4m1, 0.0) + z * z).sqrt()),
        backward: Box::new(move |w| a4m1.sqrt() * w / (Cx::new(a2, 0.0) - w * w).sqrt()),
        modulus: None,
    }
    .verify_inverse()
}

/// Cassini frame `|z^2 - b1^2| < a1^2`, `|z^2 - b2^2| > a2^2` onto the
/// annulus `A_{rho,1}` with `rho = a1 b2 / (a2 b1)`, valid when
/// `(a1^4 - b1^4)/b1^2 = (a2^4 - b2^4)/b2^2`.
pub fn frame_case(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<ExactMapCase, ReferenceError> {
    for (a, b) in [(a1, b1), (a2, b2)] {
        if !(b > 0.0 && a / b > 1.0) {
            return Err(ReferenceError::FrameShape { a, b });
        }
    }
    let lhs = (a1.powi(4) - b1.powi(4)) / (b1 * b1);
    let rhs = (a2.powi(4) - b2.powi(4)) / (b2 * b2);
    if (lhs - rhs).abs() > 1e-12 * lhs.abs().max(rhs.abs()) {
        return Err(ReferenceError::FrameCondition { lhs, rhs });
    }
    let rho = a1 * b2 / (a2 * b1);
    if !(0.0 < rho && rho < 1.0) {
        return Err(ReferenceError::FrameModulus(rho));
    }
    let c = a1.powi(4) - b1.powi(4);
    let b1sq = b1 * b1;
    let a1sq = a1 * a1;
    ExactMapCase {
        name: "cassini_frame",
        forward: Box::new(move |z| a1 * z / (b1sq * z * z + c).sqrt()),
        backward: Box::new(move |w| c.sqrt() * w / (Cx::new(a1sq, 0.0) - b1sq * w * w).sqrt()),
        modulus: Some(rho),
    }
    .verify_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use approx::assert_abs_diff_eq;

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn mobius_identity_at_origin() {
        let case = mobius_case(cx(0.0, 0.0)).unwrap();
        for z in [cx(0.3, 0.4), cx(-0.9, 0.0), cx(0.0, 0.0)] {
            assert!((case.forward(z) - z).norm() < 1e-15);
        }
    }

    #[test]
    fn mobius_fixed_points_and_derivative() {
        let case = mobius_case(cx(0.5, 0.0)).unwrap();
        assert!((case.forward(cx(1.0, 0.0)) - cx(1.0, 0.0)).norm() < 1e-15);
        assert!((case.forward(cx(-1.0, 0.0)) - cx(-1.0, 0.0)).norm() < 1e-15);
        assert!(case.forward(cx(0.5, 0.0)).norm() < 1e-15);
        let h = 1e-7;
        let d = (case.forward(cx(0.5 + h, 0.0)) - case.forward(cx(0.5 - h, 0.0))) / (2.0 * h);
        assert_abs_diff_eq!(d.re, 4.0 / 3.0, epsilon = 1e-6);
        assert!(d.im.abs() < 1e-8);
    }

    #[test]
    fn mobius_rejects_outside_base_point() {
        assert!(mobius_case(cx(1.0, 0.0)).is_err());
        assert!(mobius_case(cx(0.8, 0.8)).is_err());
    }

    #[test]
    fn cassini_normalization() {
        let a = 1.1;
        let case = cassini_case(a).unwrap();
        assert!(case.forward(cx(0.0, 0.0)).norm() < 1e-15);
        // real boundary vertex z = sqrt(a^2+1) maps to 1
        let vertex = cx((a * a + 1.0).sqrt(), 0.0);
        assert!((case.forward(vertex) - cx(1.0, 0.0)).norm() < 1e-14);
        assert!(cassini_case(1.0).is_err());
    }

    #[test]
    fn cassini_round_trip_inside() {
        let case = cassini_case(1.1).unwrap();
        let region = Region::cassini_oval(1.1).unwrap();
        for j in 0..64 {
            let z = 0.9 * region.outer().param((j as f64 + 0.5) / 64.0);
            assert!((case.backward(case.forward(z)) - z).norm() <= 1e-12);
        }
    }

    #[test]
    fn frame_parameters() {
        let a1 = 2.0 * 14.0f64.sqrt();
        let case = frame_case(a1, 7.0, 2.0, 1.0).unwrap();
        let rho = case.modulus().unwrap();
        assert_abs_diff_eq!(rho, 14.0f64.sqrt() / 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rho, 0.534_522_483_824_848_8, epsilon = 1e-15);
        assert!(case.forward(cx(0.0, 0.0)).norm() < 1e-15);
        // condition sides both equal 15 for these parameters
        assert!(frame_case(a1, 7.0, 2.0, 1.01).is_err());
        assert!(frame_case(7.0, 7.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn boundary_samples_land_on_canonical_circles() {
        let a1 = 2.0 * 14.0f64.sqrt();
        let frame = frame_case(a1, 7.0, 2.0, 1.0).unwrap();
        let region = Region::cassini_frame(a1, 7.0, 2.0, 1.0).unwrap();
        let rho = frame.modulus().unwrap();
        for j in 0..256 {
            let t = (j as f64 + 0.5) / 256.0;
            let outer = frame.forward(region.components()[0].param(t));
            assert!((outer.norm() - 1.0).abs() <= 1e-10);
            let inner = frame.forward(region.components()[1].param(t));
            assert!((inner.norm() - rho).abs() <= 1e-10);
        }

        let mob = mobius_case(cx(0.5, 0.0)).unwrap();
        let disk = Region::disk(1.0).unwrap();
        for j in 0..256 {
            let z = disk.outer().param((j as f64 + 0.5) / 256.0);
            assert!((mob.forward(z).norm() - 1.0).abs() <= 1e-10);
        }

        let cas = cassini_case(1.1).unwrap();
        let oval = Region::cassini_oval(1.1).unwrap();
        for j in 0..256 {
            let z = oval.outer().param((j as f64 + 0.5) / 256.0);
            assert!((cas.forward(z).norm() - 1.0).abs() <= 1e-10);
        }
    }
}
