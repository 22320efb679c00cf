//! Right-hand sides of the attitude ODEs for a given instantaneous `omega`.

use std::f64::consts::TAU;

use crate::error::{EslError, Result};
use crate::rotation::{GeneralizedRep, UnitQuaternion};
use crate::vec3::Vec3;

/// Half-width of the excluded band around `|E| = 2 pi k`, `k >= 1`.
pub const BOUNDARY_GUARD: f64 = 1e-8;

/// Below this angle `(1 - g)/theta^2` is taken from its Taylor series.
pub const SERIES_SWITCH: f64 = 1e-2;

/// Axis/angle form is refused when `|sin(theta/2)|` drops below this.
pub const AXIS_ANGLE_GUARD: f64 = 1e-8;

/// `(1 - g(theta)) / theta^2` with `g(theta) = (theta/2) cot(theta/2)`.
pub fn euler_coefficient(theta: f64) -> f64 {
    let t2 = theta * theta;
    if theta.abs() < SERIES_SWITCH {
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    } else {
        let half = 0.5 * theta;
        (1.0 - half * half.cos() / half.sin()) / t2
    }
}

fn near_positive_multiple_of_tau(theta: f64, band: f64) -> bool {
    let k = (theta.abs() / TAU).round();
    k >= 1.0 && (theta.abs() - k * TAU).abs() <= band
}

/// Euler-vector equation:
/// `E' = omega - {omega |E|^2 - E (omega.E)} (1 - g)/|E|^2 + omega x E / 2`.
pub fn rhs_euler_vector(e: Vec3, omega: Vec3) -> Result<Vec3> {
    let t2 = e.norm_squared();
    let theta = t2.sqrt();
    if near_positive_multiple_of_tau(theta, BOUNDARY_GUARD) {
        return Err(EslError::BoundarySingularity { theta });
    }
    let c = euler_coefficient(theta);
    Ok(omega - (omega * t2 - e * omega.dot(e)) * c + omega.cross(e) * 0.5)
}

/// Generalized equation for `F = n f(theta)`; `theta_hint` is the angle with `|F| = |f(theta)|`.
pub fn rhs_generalized(f: Vec3, omega: Vec3, rep: &GeneralizedRep, theta_hint: f64) -> Result<Vec3> {
    let theta = theta_hint;
    if near_positive_multiple_of_tau(theta, BOUNDARY_GUARD) {
        return Err(EslError::BoundarySingularity { theta });
    }
    let fv = (rep.f)(theta);
    let fp = if theta.abs() < 1e-6 { rep.f_prime_at_0 } else { (rep.f_prime)(theta) };
    let c = rep.coefficient(theta);
    Ok(omega * fp - (omega * (fv * fv) - f * omega.dot(f)) * c + omega.cross(f) * 0.5)
}

/// Quaternion equation: `m0' = -omega.m / 2`, `m' = omega m0 / 2 + omega x m / 2`.
pub fn rhs_quaternion(q: UnitQuaternion, omega: Vec3) -> UnitQuaternion {
    UnitQuaternion {
        m0: -0.5 * omega.dot(q.m),
        m: (omega * q.m0 + omega.cross(q.m)) * 0.5,
    }
}

/// Gibbs equation: `G' = omega/2 + G (omega.G)/2 + omega x G / 2`.
pub fn rhs_gibbs(g: Vec3, omega: Vec3) -> Vec3 {
    (omega + g * omega.dot(g) + omega.cross(g)) * 0.5
}

/// Divergence of the Gibbs vector field, `2 omega.G`.
pub fn divergence_gibbs(g: Vec3, omega: Vec3) -> f64 {
    2.0 * omega.dot(g)
}

/// Joint axis/angle equations: `theta' = omega.n`,
/// `n' = (omega - n (omega.n)) cot(theta/2)/2 + omega x n / 2`.
pub fn rhs_axis_angle(n: Vec3, theta: f64, omega: Vec3) -> Result<(Vec3, f64)> {
    let half = 0.5 * theta;
    let s = half.sin();
    if s.abs() < AXIS_ANGLE_GUARD {
        return Err(EslError::BoundarySingularity { theta });
    }
    let wn = omega.dot(n);
    let dn = (omega - n * wn) * (0.5 * half.cos() / s) + omega.cross(n) * 0.5;
    Ok((dn, wn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_at_origin_is_omega() {
        let w = Vec3::new(0.3, -0.2, 1.1);
        assert_eq!(rhs_euler_vector(Vec3::ZERO, w).unwrap(), w);
    }

    #[test]
    fn parallel_growth() {
        let d = rhs_euler_vector(Vec3::new(0.0, 0.0, 2.0), Vec3::K).unwrap();
        assert!((d - Vec3::K).norm() < 1e-15);
    }

    #[test]
    fn series_matches_closed_form_at_switch() {
        let lo = euler_coefficient(SERIES_SWITCH * (1.0 - 1e-12));
        let hi = euler_coefficient(SERIES_SWITCH * (1.0 + 1e-12));
        // the closed form loses ~eps/(theta^2/12) relative to cancellation there
        assert!((lo - hi).abs() < 4.0 * f64::EPSILON / (SERIES_SWITCH * SERIES_SWITCH), "{}", lo - hi);
    }

    #[test]
    fn guard_band() {
        let e = Vec3::new(0.0, TAU + 5e-9, 0.0);
        assert!(matches!(rhs_euler_vector(e, Vec3::I), Err(EslError::BoundarySingularity { .. })));
        assert!(rhs_euler_vector(Vec3::new(0.0, TAU + 1e-6, 0.0), Vec3::I).is_ok());
    }

    #[test]
    fn quaternion_examples() {
        let d = rhs_quaternion(UnitQuaternion::IDENTITY, Vec3::K);
        assert_eq!(d.m, Vec3::new(0.0, 0.0, 0.5));
        assert_eq!(d.m0, 0.0);
    }

    #[test]
    fn gibbs_examples() {
        let w = Vec3::new(1.0, 2.0, 3.0);
        assert_eq!(rhs_gibbs(Vec3::ZERO, w), w * 0.5);
        assert_eq!(divergence_gibbs(Vec3::I, Vec3::I), 2.0);
        assert_eq!(divergence_gibbs(Vec3::I, Vec3::J), 0.0);
    }

    #[test]
    fn axis_angle_examples() {
        let (dn, dt) = rhs_axis_angle(Vec3::K, 1.0, Vec3::K * 2.0).unwrap();
        assert_eq!(dn, Vec3::ZERO);
        assert_eq!(dt, 2.0);
        let (_, dt) = rhs_axis_angle(Vec3::K, 1.0, Vec3::I).unwrap();
        assert_eq!(dt, 0.0);
        assert!(rhs_axis_angle(Vec3::K, TAU, Vec3::I).is_err());
    }

    #[test]
    fn generalized_specializations() {
        let e = Vec3::new(0.4, -0.9, 1.3);
        let w = Vec3::new(-0.5, 0.8, 0.1);
        let th = e.norm();
        let a = rhs_generalized(e, w, &GeneralizedRep::euler(), th).unwrap();
        let b = rhs_euler_vector(e, w).unwrap();
        assert!((a - b).norm() < 1e-12);
        let g = e * ((0.5 * th).tan() / th);
        let c = rhs_generalized(g, w, &GeneralizedRep::gibbs(), th).unwrap();
        assert!((c - rhs_gibbs(g, w)).norm() < 1e-12);
        assert_eq!(rhs_generalized(Vec3::ZERO, w, &GeneralizedRep::modified_gibbs(), 0.0).unwrap(), w * 0.5);
    }
}
