//! Exact solutions: the constant-axis spinor closed form and a propagator for
//! piecewise-constant angular velocity built on Rodrigues composition.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{sample_count, Trajectory};
use crate::error::{EslError, Result};
use crate::omega::OmegaModel;
use crate::rotation::{compose_rotations, AxisAngle, Composition, Representation};
use crate::vec3::Vec3;

/// `|omega_hat . n0|` at or above this counts as parallel.
pub const PARALLEL_EPS: f64 = 1e-12;

/// Parameters of the closed-form solution for unit angular velocity about a
/// fixed axis `omega_hat`, starting from `(n0, theta0)` at `t = 0`:
/// `theta(t) = 2 acos(a cos(t/2 + b))` and `n(t) = p(t)/|p(t)|` with
/// `p(t) = e1 cos(t/2 + b) + e2 (1 - a^2)^(-1/2) sin(t/2 + b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinorSolution {
    pub a: f64,
    pub b: f64,
    pub k: f64,
    pub e1: Vec3,
    pub e2: Vec3,
    pub u: Vec3,
    pub u1: Vec3,
    pub u2: Vec3,
    pub n0: Vec3,
    pub theta0: f64,
    pub omega_hat: Vec3,
}

pub fn spinor_params(n0: Vec3, theta0: f64, omega_hat: Vec3) -> Result<SpinorSolution> {
    let n0 = n0.try_normalize().ok_or_else(|| EslError::InvalidInput("initial axis is zero".into()))?;
    let omega_hat = omega_hat
        .try_normalize()
        .ok_or_else(|| EslError::InvalidInput("angular velocity direction is zero".into()))?;
    if !(theta0 > 0.0 && theta0 < TAU) {
        return Err(EslError::ThetaOutOfRange { theta: theta0 });
    }
    let c = omega_hat.dot(n0);
    if c.abs() >= 1.0 - PARALLEL_EPS {
        return Err(EslError::ParallelAxis { dot: c.abs() });
    }
    let (s, co) = (0.5 * theta0).sin_cos();
    let a = (1.0 - (1.0 - c * c) * s * s).sqrt();
    // a > 0 scales both arguments alike; a = 0 only at theta0 = pi with c = 0
    let b = (c * s).atan2(co);
    let u1 = (omega_hat - n0 * c).try_normalize().expect("not parallel");
    let u2 = u1.cross(n0);
    let u = u1 * co + u2 * s;
    let k = if a > 0.0 { c / a } else { 0.0 };
    // the root carries the sign of cos(theta0/2) so that p(0) points along n0 for theta0 > pi too
    let root = (1.0 - k * k).max(0.0).sqrt().copysign(co);
    let e1 = n0 * root - u * k;
    let e2 = n0 * k + u * root;
    Ok(SpinorSolution { a, b, k, e1, e2, u, u1, u2, n0, theta0, omega_hat })
}

impl SpinorSolution {
    /// Smallest and largest angle reached.
    pub fn theta_bounds(&self) -> (f64, f64) {
        let lo = 2.0 * self.a.min(1.0).acos();
        (lo, TAU - lo)
    }

    /// `1 - a^2 - (1 - (omega_hat . n0)^2) sin^2(theta0/2)`.
    pub fn identity_residual(&self) -> f64 {
        let c = self.omega_hat.dot(self.n0);
        1.0 - self.a * self.a - (1.0 - c * c) * (0.5 * self.theta0).sin().powi(2)
    }
}

pub fn spinor_theta(sol: &SpinorSolution, t: f64) -> f64 {
    2.0 * (sol.a * (0.5 * t + sol.b).cos()).clamp(-1.0, 1.0).acos()
}

pub fn spinor_axis(sol: &SpinorSolution, t: f64) -> Vec3 {
    let (s, c) = (0.5 * t + sol.b).sin_cos();
    let p = sol.e1 * c + sol.e2 * (s / (1.0 - sol.a * sol.a).sqrt());
    p / p.norm()
}

/// Euler vector `n(t) theta(t)`.
pub fn spinor_euler(sol: &SpinorSolution, t: f64) -> Vec3 {
    spinor_axis(sol, t) * spinor_theta(sol, t)
}

/// Samples the closed form on `t0 + k dt` as an axis/angle trajectory.
pub fn spinor_trajectory(sol: &SpinorSolution, t0: f64, t_end: f64, dt: f64) -> Result<Trajectory> {
    let count = sample_count(t0, t_end, dt)?;
    let mut traj = Trajectory::new(Representation::AxisAngle, Some(OmegaModel::constant(sol.omega_hat)), t0, dt);
    for k in 0..count {
        let t = t0 + k as f64 * dt;
        let n = spinor_axis(sol, t);
        traj.push(&[n.x, n.y, n.z, spinor_theta(sol, t)]);
    }
    Ok(traj)
}

/// Folds Rodrigues composition over `(omega, duration)` segments of constant
/// angular velocity. The result angle is reduced to `[0, 2 pi)` at every fold;
/// `negated` records that the exact quaternion product is the negative of
/// the reduced rotation's quaternion.
pub fn exact_propagate(initial: AxisAngle, segments: &[(Vec3, f64)]) -> Composition {
    let mut out = Composition { rotation: initial, identity_composition: false, negated: false };
    for &(omega, duration) in segments {
        let speed = omega.norm();
        if speed == 0.0 || duration == 0.0 {
            continue;
        }
        let step = AxisAngle::from_unit(omega / speed, speed * duration);
        let c = compose_rotations(out.rotation, step);
        out = Composition {
            rotation: c.rotation,
            identity_composition: c.identity_composition,
            negated: out.negated ^ c.negated,
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn worked_example_values() {
        let sol = spinor_params(Vec3::I, FRAC_PI_2, Vec3::K).unwrap();
        assert!((sol.a - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(sol.b.abs() < 1e-15);
        assert!((sol.e1 - Vec3::I).norm() < 1e-15);
        assert!((sol.e2 - Vec3::new(0.0, 1.0, 1.0) / 2f64.sqrt()).norm() < 1e-15);
        assert!((spinor_theta(&sol, 0.0) - FRAC_PI_2).abs() < 1e-15);
        assert!((spinor_theta(&sol, TAU) - 1.5 * PI).abs() < 1e-14);
        for k in 0..50 {
            let t = 0.37 * k as f64;
            let (s, c) = (0.5 * t).sin_cos();
            let want = Vec3::new(c, s, s) / (1.0 + s * s).sqrt();
            assert!((spinor_axis(&sol, t) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn preconditions() {
        assert!(matches!(spinor_params(Vec3::K, 1.0, Vec3::K), Err(EslError::ParallelAxis { .. })));
        assert!(matches!(spinor_params(Vec3::I, 0.0, Vec3::K), Err(EslError::ThetaOutOfRange { .. })));
        assert!(matches!(spinor_params(Vec3::I, TAU, Vec3::K), Err(EslError::ThetaOutOfRange { .. })));
    }

    #[test]
    fn perpendicular_axis_has_no_offset() {
        for th in [0.3, 1.0, 2.5, PI] {
            let sol = spinor_params(Vec3::J, th, Vec3::K).unwrap();
            assert!(sol.b.abs() < 1e-15, "{th}");
        }
    }

    #[test]
    fn zero_segments_return_initial() {
        let a = AxisAngle::from_unit(Vec3::J, 7.0);
        let c = exact_propagate(a, &[]);
        assert_eq!(c.rotation, a);
    }

    #[test]
    fn one_segment_matches_closed_form() {
        let sol = spinor_params(Vec3::I, FRAC_PI_2, Vec3::K).unwrap();
        for t in [0.5, 2.0, 5.0] {
            let c = exact_propagate(AxisAngle::from_unit(Vec3::I, FRAC_PI_2), &[(Vec3::K, t)]);
            assert!((c.rotation.theta - spinor_theta(&sol, t)).abs() < 1e-13);
            assert!((c.rotation.axis - spinor_axis(&sol, t)).norm() < 1e-13);
        }
    }
}
