//! Classic fixed-step RK4 over the uniform grid `t0 + k dt`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::continuation::continue_axis_angle;
use super::rhs::{rhs_axis_angle, rhs_euler_vector, rhs_gibbs, rhs_quaternion, BOUNDARY_GUARD};
use super::{AbortInfo, NormDrift, Trajectory};
use crate::error::{EslError, Result, Singularity};
use crate::omega::OmegaModel;
use crate::rotation::{convert, Attitude, AxisAngle, Representation, UnitQuaternion};
use crate::vec3::Vec3;

/// `|G|` beyond which a Gibbs integration is abandoned.
pub const GIBBS_OVERFLOW: f64 = 1e6;

/// The Euler-vector and axis/angle runs hand over to the quaternion form
/// once the angle is within this many steps of travel (`|omega| dt` each) of
/// a boundary. The right-hand side is stiff there, like `1/distance`, and
/// RK4 stages straddling the pole would otherwise go unnoticed by the much
/// narrower evaluation guard.
pub const HANDOFF_STEPS: f64 = 20.0;

/// What to do when the Euler-vector or axis/angle right-hand side hits its boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Stop and return the partial trajectory inside the error.
    Abort,
    /// Finish the run in quaternion form and map back through the continued axis/angle.
    #[default]
    Continue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationOptions {
    pub boundary: BoundaryPolicy,
    pub gibbs_overflow: f64,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        Self { boundary: BoundaryPolicy::Continue, gibbs_overflow: GIBBS_OVERFLOW }
    }
}

/// Number of grid points `t0 + k dt` not past `t_end`.
///
/// A relative slack of 1e-9 steps keeps `t_end` itself on the grid when
/// `(t_end - t0)/dt` is an integer up to rounding.
pub fn sample_count(t0: f64, t_end: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(EslError::InvalidInput(format!("step size must be positive, got {dt}")));
    }
    if !(t_end >= t0) || !t_end.is_finite() || !t0.is_finite() {
        return Err(EslError::InvalidInput(format!("need finite t_end >= t0 (t0 = {t0}, t_end = {t_end})")));
    }
    Ok(((t_end - t0) / dt + 1e-9).floor() as usize + 1)
}

/// One RK4 step; `omega` holds the angular velocity at `t`, `t + dt/2` and `t + dt`.
pub fn rk4_step<const N: usize, F>(y: &[f64; N], dt: f64, omega: [Vec3; 3], f: &F) -> Result<[f64; N]>
where
    F: Fn(&[f64; N], Vec3) -> Result<[f64; N]>,
{
    let shifted = |k: &[f64; N], h: f64| {
        let mut out = *y;
        for (o, d) in out.iter_mut().zip(k) {
            *o += h * d;
        }
        out
    };
    let k1 = f(y, omega[0])?;
    let k2 = f(&shifted(&k1, 0.5 * dt), omega[1])?;
    let k3 = f(&shifted(&k2, 0.5 * dt), omega[1])?;
    let k4 = f(&shifted(&k3, dt), omega[2])?;
    let mut out = *y;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Integrates with the default options (continue through boundaries, Gibbs guard 1e6).
pub fn integrate(
    rep: Representation,
    initial: Attitude,
    omega: &OmegaModel,
    t0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Trajectory> {
    integrate_with(rep, initial, omega, t0, t_end, dt, IntegrationOptions::default())
}

pub fn integrate_with(
    rep: Representation,
    initial: Attitude,
    omega: &OmegaModel,
    t0: f64,
    t_end: f64,
    dt: f64,
    opts: IntegrationOptions,
) -> Result<Trajectory> {
    omega.validate()?;
    let count = sample_count(t0, t_end, dt)?;
    let start = initial_state(rep, initial)?;
    let mut traj = Trajectory::new(rep, Some(omega.clone()), t0, dt);
    match rep {
        Representation::Quaternion | Representation::ModifiedGibbs => {
            let q0 = UnitQuaternion::from_slice(&start).normalized();
            let q = run_quaternion(q0, omega, t0, dt, count)?;
            if rep == Representation::Quaternion {
                return Ok(q);
            }
            for s in q.states() {
                traj.push(&s[1..]);
            }
            traj.norm_drift = q.norm_drift;
            Ok(traj)
        }
        Representation::Gibbs => {
            let mut y = [start[0], start[1], start[2]];
            let mut grid = OmegaGrid::new(omega, t0, dt)?;
            traj.push(&y);
            for k in 0..count - 1 {
                let w = grid.step(k)?;
                y = rk4_step(&y, dt, w, &|s: &[f64; 3], w| Ok(rhs_gibbs(Vec3::from_slice(s), w).to_array()))?;
                let g = Vec3::from_slice(&y);
                if !(g.norm() <= opts.gibbs_overflow) {
                    let time = traj.time(k + 1);
                    traj.abort = Some(AbortInfo { cause: Singularity::GibbsOverflow, time });
                    return Err(EslError::Aborted { cause: Singularity::GibbsOverflow, time, partial: Box::new(traj) });
                }
                traj.push(&y);
            }
            Ok(traj)
        }
        Representation::Euler => {
            let mut y = [start[0], start[1], start[2]];
            let mut grid = OmegaGrid::new(omega, t0, dt)?;
            traj.push(&y);
            for k in 0..count - 1 {
                let w = grid.step(k)?;
                let theta = Vec3::from_slice(&y).norm();
                let j = (theta / TAU).round();
                if j >= 1.0 && (theta - j * TAU).abs() < handoff_band(&w, dt) {
                    let e = Vec3::from_slice(&y);
                    return finish_through_boundary(traj, AxisAngle::from_unit(e / theta, theta), omega, k, count, opts);
                }
                let f = |s: &[f64; 3], w| Ok(rhs_euler_vector(Vec3::from_slice(s), w)?.to_array());
                match rk4_step(&y, dt, w, &f) {
                    Ok(next) => {
                        y = next;
                        traj.push(&y);
                    }
                    Err(EslError::BoundarySingularity { .. }) => {
                        let e = Vec3::from_slice(&y);
                        let theta = e.norm();
                        let hint = AxisAngle::from_unit(e / theta, theta);
                        return finish_through_boundary(traj, hint, omega, k, count, opts);
                    }
                    Err(other) => return Err(other),
                }
            }
            Ok(traj)
        }
        Representation::AxisAngle => {
            let mut y = [start[0], start[1], start[2], start[3]];
            let mut grid = OmegaGrid::new(omega, t0, dt)?;
            traj.push(&y);
            let f = |s: &[f64; 4], w| {
                let (dn, dth) = rhs_axis_angle(Vec3::from_slice(s), s[3], w)?;
                Ok([dn.x, dn.y, dn.z, dth])
            };
            for k in 0..count - 1 {
                let w = grid.step(k)?;
                if (y[3] - TAU * (y[3] / TAU).round()).abs() < handoff_band(&w, dt) {
                    let hint = AxisAngle::from_unit(Vec3::from_slice(&y), y[3]);
                    return finish_through_boundary(traj, hint, omega, k, count, opts);
                }
                match rk4_step(&y, dt, w, &f) {
                    Ok(mut next) => {
                        let n = Vec3::from_slice(&next) / Vec3::from_slice(&next).norm();
                        next[..3].copy_from_slice(&n.to_array());
                        y = next;
                        traj.push(&y);
                    }
                    Err(EslError::BoundarySingularity { .. }) => {
                        let hint = AxisAngle::from_unit(Vec3::from_slice(&y), y[3]);
                        return finish_through_boundary(traj, hint, omega, k, count, opts);
                    }
                    Err(other) => return Err(other),
                }
            }
            Ok(traj)
        }
    }
}

fn handoff_band(w: &[Vec3; 3], dt: f64) -> f64 {
    let speed = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
    (HANDOFF_STEPS * speed * dt).max(BOUNDARY_GUARD)
}

fn initial_state(rep: Representation, initial: Attitude) -> Result<Vec<f64>> {
    match (rep, initial) {
        // the identity has no axis; start from an arbitrary axis with zero angle
        (Representation::AxisAngle, att) => match convert(att, rep, None) {
            Err(EslError::AxisUndefined) => Ok(vec![0.0, 0.0, 1.0, 0.0]),
            other => Ok(other?.to_state()),
        },
        (_, att) => match convert(att, rep, None) {
            Err(EslError::AxisUndefined) => Ok(match rep {
                Representation::Quaternion => UnitQuaternion::IDENTITY.to_array().to_vec(),
                _ => vec![0.0; 3],
            }),
            other => Ok(other?.to_state()),
        },
    }
}

/// Angular velocity on the grid, reusing the end-of-step value as the next start.
struct OmegaGrid<'a> {
    model: &'a OmegaModel,
    t0: f64,
    dt: f64,
    next_start: Vec3,
}

impl<'a> OmegaGrid<'a> {
    fn new(model: &'a OmegaModel, t0: f64, dt: f64) -> Result<Self> {
        Ok(Self { model, t0, dt, next_start: model.eval(t0)? })
    }

    fn step(&mut self, k: usize) -> Result<[Vec3; 3]> {
        let t = self.t0 + k as f64 * self.dt;
        let mid = self.model.eval(t + 0.5 * self.dt)?;
        let end = self.model.eval(self.t0 + (k + 1) as f64 * self.dt)?;
        let w = [self.next_start, mid, end];
        self.next_start = end;
        Ok(w)
    }
}

fn run_quaternion(q0: UnitQuaternion, omega: &OmegaModel, t0: f64, dt: f64, count: usize) -> Result<Trajectory> {
    let mut traj = Trajectory::new(Representation::Quaternion, Some(omega.clone()), t0, dt);
    let mut y = q0.to_array();
    let mut grid = OmegaGrid::new(omega, t0, dt)?;
    let mut drift = NormDrift::default();
    traj.push(&y);
    let f = |s: &[f64; 4], w| Ok(rhs_quaternion(UnitQuaternion::from_slice(s), w).to_array());
    for k in 0..count - 1 {
        let w = grid.step(k)?;
        let next = rk4_step(&y, dt, w, &f)?;
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = (norm - 1.0).abs();
        drift.max_step = drift.max_step.max(err);
        drift.cumulative += err;
        for (o, v) in y.iter_mut().zip(next) {
            *o = v / norm;
        }
        traj.push(&y);
    }
    traj.norm_drift = Some(drift);
    Ok(traj)
}

/// Replaces the tail from sample `k` on with the quaternion run mapped through
/// the continued axis/angle.
fn finish_through_boundary(
    mut traj: Trajectory,
    hint: AxisAngle,
    omega: &OmegaModel,
    k: usize,
    count: usize,
    opts: IntegrationOptions,
) -> Result<Trajectory> {
    let time = traj.time(k);
    if opts.boundary == BoundaryPolicy::Abort {
        traj.abort = Some(AbortInfo { cause: Singularity::Boundary, time });
        return Err(EslError::Aborted { cause: Singularity::Boundary, time, partial: Box::new(traj) });
    }
    let q = run_quaternion(hint.quaternion(), omega, time, traj.dt, count - k)?;
    let (aa, record) = continue_axis_angle(&q, omega, Some(hint))?;
    let rep = traj.representation;
    let mut out = Trajectory::new(rep, traj.omega.take(), traj.t0, traj.dt);
    for i in 0..k {
        out.push(traj.state(i));
    }
    for s in aa.states() {
        match rep {
            Representation::Euler => out.push(&(Vec3::from_slice(s) * s[3]).to_array()),
            _ => out.push(s),
        }
    }
    out.continuation = Some(record);
    out.norm_drift = q.norm_drift;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::EulerVector;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn grid_count() {
        assert_eq!(sample_count(0.0, 1.0, 0.1).unwrap(), 11);
        assert_eq!(sample_count(0.0, 4.0 * PI, 1e-3).unwrap(), 12567);
        assert_eq!(sample_count(0.0, 0.0, 0.1).unwrap(), 1);
        assert!(sample_count(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn still_body_stays_put() {
        let e0 = Attitude::Euler(EulerVector(Vec3::new(0.3, 0.2, -0.1)));
        let w = OmegaModel::constant(Vec3::ZERO);
        for rep in [Representation::Euler, Representation::Quaternion, Representation::Gibbs] {
            let tr = integrate(rep, e0, &w, 0.0, 1.0, 0.1).unwrap();
            assert_eq!(tr.len(), 11);
            assert_eq!(tr.state(0), tr.state(10), "{rep}");
        }
    }

    #[test]
    fn spinor_returns_after_four_pi() {
        let e0 = Attitude::Euler(EulerVector(Vec3::new(FRAC_PI_2, 0.0, 0.0)));
        let tr = integrate(Representation::Euler, e0, &OmegaModel::constant(Vec3::K), 0.0, 4.0 * PI, 1e-3).unwrap();
        let last = tr.vec3(tr.len() - 1);
        // the grid ends slightly before 4 pi; compare against the start with a loose bound
        assert!((last - Vec3::new(FRAC_PI_2, 0.0, 0.0)).norm() < 2e-3);
    }

    #[test]
    fn gibbs_overflow_aborts_with_partial() {
        // constant omega about the axis drives the angle straight through pi
        let g0 = Attitude::Euler(EulerVector(Vec3::new(0.0, 0.0, 3.0)));
        let err = integrate(Representation::Gibbs, g0, &OmegaModel::constant(Vec3::K), 0.0, 1.0, 1e-3).unwrap_err();
        match err {
            EslError::Aborted { cause, time, partial } => {
                assert_eq!(cause, Singularity::GibbsOverflow);
                assert!(time > 0.1 && time < 0.15, "{time}");
                assert!(partial.abort.is_some() && partial.len() > 100);
            }
            other => panic!("{other}"),
        }
    }
}
