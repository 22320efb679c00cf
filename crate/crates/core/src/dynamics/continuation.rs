//! Continuous axis/angle from a quaternion trajectory.
//!
//! Between zeros of `|m|` the angle lives on a branch `[2 pi l, 2 pi (l + 1)]`
//! with `n = (-1)^l m/|m|`. At a zero the order `i` of the first nonvanishing
//! derivative of omega decides the branch change: even `i` crosses into the
//! neighbouring branch, odd `i` reflects back into the same one.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::rhs::rhs_quaternion;
use super::Trajectory;
use crate::error::{EslError, Result};
use crate::omega::{OmegaModel, MAX_DERIVATIVE_ORDER};
use crate::rotation::{AxisAngle, Representation, UnitQuaternion};
use crate::vec3::Vec3;

/// Sample minima of `|m|` above this are not examined.
pub const ZERO_PREFILTER: f64 = 1e-2;

/// A refined minimum of `|m|` below this is a zero.
pub const ZERO_THRESHOLD: f64 = 1e-6;

/// Samples with `|m|` below this take the limit axis instead of `m/|m|`.
pub const SAMPLE_AT_ZERO: f64 = 1e-9;

/// Derivative magnitudes above this count as nonvanishing.
pub const PARITY_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContinuationRecord {
    /// Branch at the first sample.
    pub initial_l: i64,
    /// Branch at the last sample.
    pub l: i64,
    pub zero_times: Vec<f64>,
    pub parity_used: Vec<usize>,
    pub limit_axes: Vec<Vec3>,
    /// Branch in force just after each zero.
    pub branch_after: Vec<i64>,
}

struct ZeroEvent {
    time: f64,
    /// Angle at the zero, `2 pi j`.
    endpoint: i64,
    l_after: i64,
    axis: Vec3,
}

/// Continues `(n, theta)` along a quaternion trajectory.
///
/// `initial` fixes the starting branch; the quaternion must then equal
/// `(cos(theta/2), n sin(theta/2))` of the hint, not its negative. Without a
/// hint the run starts on `theta in [0, 2 pi]`.
pub fn continue_axis_angle(
    qtraj: &Trajectory,
    omega: &OmegaModel,
    initial: Option<AxisAngle>,
) -> Result<(Trajectory, ContinuationRecord)> {
    if qtraj.representation != Representation::Quaternion {
        return Err(EslError::InvalidInput(format!(
            "continuation needs a quaternion trajectory, got {}",
            qtraj.representation
        )));
    }
    if qtraj.is_empty() {
        return Err(EslError::SeriesTooShort { len: 0, min: 1 });
    }
    let qs: Vec<UnitQuaternion> = qtraj.states().map(UnitQuaternion::from_slice).collect();
    let times: Vec<f64> = qtraj.times().collect();
    let sizes: Vec<f64> = qs.iter().map(|q| q.m.norm()).collect();

    let mut record = ContinuationRecord::default();
    let mut events: Vec<ZeroEvent> = Vec::new();

    // starting branch
    let mut l = if sizes[0] < SAMPLE_AT_ZERO {
        let ev = start_at_zero(qs[0], times[0], omega, initial)?;
        record.zero_times.push(ev.0.time);
        record.parity_used.push(ev.1);
        record.limit_axes.push(ev.0.axis);
        record.branch_after.push(ev.0.l_after);
        let l = ev.0.l_after;
        events.push(ev.0);
        l
    } else {
        match initial {
            Some(hint) => {
                if hint.quaternion().dot(qs[0]) < 0.0 {
                    return Err(EslError::InvalidInput(
                        "initial axis/angle is on the opposite quaternion sheet".into(),
                    ));
                }
                (hint.theta / TAU).floor() as i64
            }
            None => 0,
        }
    };
    record.initial_l = l;

    // zeros after the start
    let mut last_zero = if events.is_empty() { f64::NEG_INFINITY } else { times[0] };
    for k in 0..qs.len() {
        if sizes[k] >= ZERO_PREFILTER || (k == 0 && !events.is_empty()) {
            continue;
        }
        let left_ok = k == 0 || sizes[k] <= sizes[k - 1];
        let right_ok = k + 1 == qs.len() || sizes[k] <= sizes[k + 1];
        if !(left_ok && right_ok) || qs.len() < 2 {
            continue;
        }
        let (t1, size) = refine_minimum(&qs, &times, omega, k)?;
        if size.min(sizes[k]) >= ZERO_THRESHOLD || t1 - last_zero <= 0.5 * qtraj.dt {
            continue;
        }
        let t1 = if sizes[k] < SAMPLE_AT_ZERO && size >= sizes[k] { times[k] } else { t1 };
        let m0 = qs[k].m0;
        let (i, dir) = first_nonvanishing(omega, t1)?;
        let upper = (m0 < 0.0) != (l.rem_euclid(2) == 1);
        let endpoint = if upper { l + 1 } else { l };
        let l_after = if i % 2 == 0 { if upper { l + 1 } else { l - 1 } } else { l };
        let sign = if (l + i as i64 + 1).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let axis = dir * (m0.signum() * sign);
        record.zero_times.push(t1);
        record.parity_used.push(i);
        record.limit_axes.push(axis);
        record.branch_after.push(l_after);
        events.push(ZeroEvent { time: t1, endpoint, l_after, axis });
        l = l_after;
        last_zero = t1;
    }
    record.l = l;

    // assign each sample to a branch
    let mut out = Trajectory::new(Representation::AxisAngle, qtraj.omega.clone(), qtraj.t0, qtraj.dt);
    out.abort = qtraj.abort;
    out.norm_drift = qtraj.norm_drift;
    let mut branch = record.initial_l;
    let mut next = 0;
    for (k, q) in qs.iter().enumerate() {
        let t = times[k];
        if sizes[k] < SAMPLE_AT_ZERO {
            let ev = events
                .iter()
                .min_by(|a, b| (a.time - t).abs().total_cmp(&(b.time - t).abs()))
                .filter(|ev| (ev.time - t).abs() <= qtraj.dt)
                .ok_or(EslError::AxisUndefined)?;
            out.push(&[ev.axis.x, ev.axis.y, ev.axis.z, TAU * ev.endpoint as f64]);
            while next < events.len() && events[next].time <= t + 0.5 * qtraj.dt {
                branch = events[next].l_after;
                next += 1;
            }
            continue;
        }
        while next < events.len() && events[next].time < t {
            branch = events[next].l_after;
            next += 1;
        }
        let aa = q.axis_angle_on_branch(branch)?;
        out.push(&[aa.axis.x, aa.axis.y, aa.axis.z, aa.theta]);
    }
    out.continuation = Some(record.clone());
    Ok((out, record))
}

/// Order and direction of the first derivative of omega with magnitude above the threshold.
fn first_nonvanishing(omega: &OmegaModel, t: f64) -> Result<(usize, Vec3)> {
    let derivs = omega.derivatives(t, MAX_DERIVATIVE_ORDER)?;
    derivs
        .iter()
        .enumerate()
        .find(|(_, d)| d.norm() > PARITY_THRESHOLD)
        .map(|(i, d)| (i, *d / d.norm()))
        .ok_or(EslError::ParityUndetermined { t })
}

/// Branch choice when the first sample sits on a zero: `theta(t0) = 2 pi j`
/// and `n` for later times is `(-1)^l' sgn(m0) w^(i)/|w^(i)|`.
fn start_at_zero(
    q: UnitQuaternion,
    t0: f64,
    omega: &OmegaModel,
    initial: Option<AxisAngle>,
) -> Result<(ZeroEvent, usize)> {
    let (i, dir) = first_nonvanishing(omega, t0)?;
    let d = dir * q.m0.signum();
    let (endpoint, l_after) = match initial {
        None => (if q.m0 > 0.0 { 0 } else { 1 }, 0),
        Some(hint) => {
            let j = (hint.theta / TAU).round() as i64;
            if (j.rem_euclid(2) == 0) != (q.m0 > 0.0) {
                return Err(EslError::InvalidInput(
                    "initial axis/angle is on the opposite quaternion sheet".into(),
                ));
            }
            let want_even = d.dot(hint.axis) >= 0.0;
            let l = if (j.rem_euclid(2) == 0) == want_even { j } else { j - 1 };
            (j, l)
        }
    };
    let axis = if l_after.rem_euclid(2) == 0 { d } else { -d };
    Ok((ZeroEvent { time: t0, endpoint, l_after, axis }, i))
}

/// Cubic Hermite interpolant of `m` on `[ta, tb]`: value and time derivative at `t`.
fn hermite(ta: f64, tb: f64, ma: Vec3, va: Vec3, mb: Vec3, vb: Vec3, t: f64) -> (Vec3, Vec3) {
    let h = tb - ta;
    let s = (t - ta) / h;
    let (s2, s3) = (s * s, s * s * s);
    let p = ma * (2.0 * s3 - 3.0 * s2 + 1.0)
        + va * (h * (s3 - 2.0 * s2 + s))
        + mb * (3.0 * s2 - 2.0 * s3)
        + vb * (h * (s3 - s2));
    let d = (ma * (6.0 * s2 - 6.0 * s) + va * (h * (3.0 * s2 - 4.0 * s + 1.0)) + mb * (6.0 * s - 6.0 * s2)
        + vb * (h * (3.0 * s2 - 2.0 * s)))
        / h;
    (p, d)
}

/// Time and size of the smallest `|m|` near sample `k`, by bisection on
/// `m . m'` over the Hermite interpolant of the adjacent interval.
fn refine_minimum(qs: &[UnitQuaternion], times: &[f64], omega: &OmegaModel, k: usize) -> Result<(f64, f64)> {
    let rate = |j: usize| -> Result<Vec3> { Ok(rhs_quaternion(qs[j], omega.eval(times[j])?).m) };
    let vk = rate(k)?;
    let slope = qs[k].m.dot(vk);
    let (a, b) = if slope == 0.0 {
        return Ok((times[k], qs[k].m.norm()));
    } else if slope > 0.0 {
        if k == 0 {
            return Ok((times[k], qs[k].m.norm()));
        }
        (k - 1, k)
    } else {
        if k + 1 == qs.len() {
            return Ok((times[k], qs[k].m.norm()));
        }
        (k, k + 1)
    };
    let (va, vb) = if a == k { (vk, rate(b)?) } else { (rate(a)?, vk) };
    let (ma, mb) = (qs[a].m, qs[b].m);
    let (ta, tb) = (times[a], times[b]);
    let g = |t: f64| {
        let (p, d) = hermite(ta, tb, ma, va, mb, vb, t);
        (p.dot(d), p.norm())
    };
    let (ga, _) = g(ta);
    let (gb, _) = g(tb);
    if !(ga < 0.0 && gb > 0.0) {
        let best = if qs[a].m.norm() <= qs[b].m.norm() { a } else { b };
        return Ok((times[best], qs[best].m.norm()));
    }
    let (mut lo, mut hi) = (ta, tb);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid).0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Ok((t, g(t).1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate;
    use crate::rotation::Attitude;

    #[test]
    fn constant_spin_crosses_every_two_pi() {
        // q(t) = (cos(t/2), k sin(t/2)); zeros of |m| at t = 2 pi, 4 pi
        let w = OmegaModel::constant(Vec3::K);
        let q = integrate(Representation::Quaternion, Attitude::Quaternion(UnitQuaternion::IDENTITY), &w, 0.0, 14.0, 1e-3)
            .unwrap();
        let (aa, rec) = continue_axis_angle(&q, &w, None).unwrap();
        assert_eq!(rec.initial_l, 0);
        assert_eq!(rec.zero_times.len(), 3, "{:?}", rec.zero_times);
        assert!((rec.zero_times[1] - TAU).abs() < 1e-9);
        assert!((rec.zero_times[2] - 2.0 * TAU).abs() < 1e-9);
        assert_eq!(rec.l, 2);
        for (k, s) in aa.states().enumerate() {
            assert!((Vec3::from_slice(s) - Vec3::K).norm() < 1e-9, "axis at {k}");
            assert!((s[3] - aa.time(k)).abs() < 1e-9);
        }
    }

    #[test]
    fn hint_on_wrong_sheet_is_rejected() {
        let w = OmegaModel::constant(Vec3::K);
        let hint = AxisAngle::from_unit(Vec3::I, 1.0);
        let q = integrate(Representation::Quaternion, Attitude::Quaternion(-hint.quaternion()), &w, 0.0, 0.1, 1e-2).unwrap();
        assert!(continue_axis_angle(&q, &w, Some(hint)).is_err());
    }
}
