use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};
use std::time::Instant;

use esl_core::analysis::{
    detect_peaks, lyapunov_spectrum, nearest_neighbor_gaps, power_spectrum, strobe, AttitudeFlow, LinearFlow,
    LyapunovOptions, Window,
};
use esl_core::closed_form::{spinor_axis, spinor_euler, spinor_params, spinor_theta};
use esl_core::dynamics::{continue_axis_angle, divergence_gibbs, integrate, rhs_gibbs, Trajectory};
use esl_core::rotation::{convert, gibbs_identity_residual};
use esl_core::{Attitude, AxisAngle, EslError, EulerVector, OmegaModel, Representation, Result, UnitQuaternion, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle::{frobenius, integrate_matrix, rodrigues};
use crate::{Check, Verdict};

pub(crate) static ALL: &[Check] = &[
    Check {
        id: "spinor-oracle",
        criterion: "Euler-vector RK4 vs closed form, w = k, E0 = (pi/2,0,0), t in [0,4pi], dt 1e-3: max |E - E_closed| <= 1e-6, runtime < 5 s",
        run: spinor_oracle,
    },
    Check {
        id: "spinor-sign-flip",
        criterion: "n(t+2pi) = -n(t) and theta(t+2pi) = 2pi - theta(t) within 1e-6, closed form and integrated",
        run: spinor_sign_flip,
    },
    Check {
        id: "spinor-parameters",
        criterion: "n0 = i, theta0 = pi/2, w = k: a = 1/sqrt2, b = 0, e1 = i, e2 = (j+k)/sqrt2 within 1e-12",
        run: spinor_parameters,
    },
    Check {
        id: "cross-representation",
        criterion: "Euler, quaternion and Gibbs runs (T = 40, t <= 10, dt 1e-3) agree as matrices within 1e-6 Frobenius while |theta| in (0.1, pi-0.1)",
        run: cross_representation,
    },
    Check {
        id: "matrix-ode-oracle",
        criterion: "quaternion run vs direct RK4 on R' = [w]x R, T = 40, t in [0,100]: gap <= 1e-6 Frobenius, runtime < 30 s",
        run: matrix_ode_oracle,
    },
    Check {
        id: "rk4-order",
        criterion: "Euler-vector run, w = k, t in [0,4pi]: terminal error ratio at dt = pi/100 vs dt/2 against the closed form in [14, 18]",
        run: rk4_order,
    },
    Check {
        id: "psd-peaks",
        criterion: "|E| spectrum, t_end 4200, dt 0.01: T = 40 peaks at 0.068 and 0.0925 within 0.005; T = pi periods 3 and 53 within 15%; < 2 min each",
        run: psd_peaks,
    },
    Check {
        id: "lyapunov",
        criterion: "T = 40, 1e5 steps: |lambda_max| <= 1e-3; linear diag(0.1, -0.2) recovered within 1e-4",
        run: lyapunov,
    },
    Check {
        id: "boundary-passage",
        criterion: "reversed run: theta increases continuously through 2pi, |dn| <= 2 max|w| dt, then stays in [2pi, 4pi]",
        run: boundary_passage,
    },
    Check {
        id: "continuation-sign",
        criterion: "w = (1 - t/2)k from the identity: n stays k and theta = t - t^2/4 goes negative, within 1e-6",
        run: continuation_sign,
    },
    Check {
        id: "gibbs-divergence",
        criterion: "2 w.G matches the central-difference divergence of the Gibbs field within 1e-6 on 1000 random states",
        run: gibbs_divergence,
    },
    Check {
        id: "gibbs-identity",
        criterion: "four-vector identity residual <= 1e-11 relative on 1000 random quadruples",
        run: gibbs_identity,
    },
    Check {
        id: "strobe-nonperiodic",
        criterion: "T = 40 strobe to t = 4200: floor(4200/40) + 1 points, no pair closer than 1e-4",
        run: strobe_nonperiodic,
    },
    Check {
        id: "quaternion-norm",
        criterion: "cumulative norm drift before renormalization <= 1e-9 over 1e5 steps",
        run: quaternion_norm,
    },
];

const SEED: u64 = 20_240_601;

fn fmt(v: f64) -> String {
    format!("{v:.3e}")
}

fn verdict(measured: String, passed: bool) -> Result<Verdict> {
    Ok(Verdict { measured, passed })
}

/// Half-width of `[lo, hi]` shrunk about its centre by `tighten`.
fn in_band(x: f64, lo: f64, hi: f64, tighten: f64) -> bool {
    let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo) / tighten);
    (x - mid).abs() <= half
}

fn diagonal_start() -> EulerVector {
    EulerVector(Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt())
}

fn euler_run(omega: &OmegaModel, e0: EulerVector, t_end: f64, dt: f64) -> Result<Trajectory> {
    integrate(Representation::Euler, Attitude::Euler(e0), omega, 0.0, t_end, dt)
}

fn spinor_oracle(tighten: f64) -> Result<Verdict> {
    let start = Instant::now();
    let e0 = Vec3::new(FRAC_PI_2, 0.0, 0.0);
    let tr = euler_run(&OmegaModel::constant(Vec3::K), EulerVector(e0), 4.0 * PI, 1e-3)?;
    let sol = spinor_params(Vec3::I, FRAC_PI_2, Vec3::K)?;
    let err = tr.times().enumerate().map(|(k, t)| (tr.vec3(k) - spinor_euler(&sol, t)).norm()).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    verdict(format!("max error {}, {secs:.2} s", fmt(err)), err <= 1e-6 / tighten && secs < 5.0 / tighten)
}

fn spinor_sign_flip(tighten: f64) -> Result<Verdict> {
    let sol = spinor_params(Vec3::I, FRAC_PI_2, Vec3::K)?;
    let mut closed = 0.0f64;
    for k in 0..1000 {
        let t = TAU * k as f64 / 1000.0;
        closed = closed
            .max((spinor_axis(&sol, t + TAU) + spinor_axis(&sol, t)).norm())
            .max((spinor_theta(&sol, t + TAU) - (TAU - spinor_theta(&sol, t))).abs());
    }
    // a grid with exactly `half` steps per 2 pi
    let half = 6000;
    let tr = euler_run(&OmegaModel::constant(Vec3::K), EulerVector(Vec3::new(FRAC_PI_2, 0.0, 0.0)), 2.0 * TAU, TAU / half as f64)?;
    let mut integrated = 0.0f64;
    for k in 0..tr.len() - half {
        let (a, b) = (tr.vec3(k), tr.vec3(k + half));
        let (ta, tb) = (a.norm(), b.norm());
        integrated = integrated.max((b / tb + a / ta).norm()).max((tb - (TAU - ta)).abs());
    }
    let tol = 1e-6 / tighten;
    verdict(format!("closed form {}, integrated {}", fmt(closed), fmt(integrated)), closed <= tol && integrated <= tol)
}

fn spinor_parameters(tighten: f64) -> Result<Verdict> {
    let sol = spinor_params(Vec3::I, FRAC_PI_2, Vec3::K)?;
    let e2 = Vec3::new(0.0, 1.0, 1.0) * FRAC_1_SQRT_2;
    let dev = (sol.a - FRAC_1_SQRT_2).abs().max(sol.b.abs()).max((sol.e1 - Vec3::I).norm()).max((sol.e2 - e2).norm());
    verdict(format!("a = {:.15}, b = {}, max deviation {}", sol.a, fmt(sol.b), fmt(dev)), dev <= 1e-12 / tighten)
}

fn cross_representation(tighten: f64) -> Result<Verdict> {
    let omega = OmegaModel::rotating_plane(40.0);
    let (t_end, dt) = (10.0, 1e-3);
    let start = Attitude::Euler(diagonal_start());
    let e = integrate(Representation::Euler, start, &omega, 0.0, t_end, dt)?;
    let q = integrate(Representation::Quaternion, start, &omega, 0.0, t_end, dt)?;
    let in_range = |k: usize| {
        let theta = UnitQuaternion::from_slice(q.state(k)).principal_angle();
        theta > 0.1 && theta < PI - 0.1
    };
    let (mut worst, mut compared, mut segments) = (0.0f64, 0usize, 0usize);
    let mut k = 0;
    while k < q.len() {
        if !in_range(k) {
            k += 1;
            continue;
        }
        // the Gibbs form cannot pass theta = pi; restart it from the shared rotation on re-entry
        let from = if k == 0 { start } else { Attitude::Quaternion(UnitQuaternion::from_slice(q.state(k))) };
        let g0 = convert(from, Representation::Gibbs, None)?;
        let g = match integrate(Representation::Gibbs, g0, &omega, q.time(k), t_end, dt) {
            Ok(tr) => tr,
            Err(EslError::Aborted { partial, .. }) => *partial,
            Err(other) => return Err(other),
        };
        segments += 1;
        for j in 0..g.len().min(q.len() - k) {
            if in_range(k + j) {
                let (me, mq, mg) = (e.matrix(k + j)?, q.matrix(k + j)?, g.matrix(j)?);
                worst = worst.max(me.frobenius_distance(&mq)).max(me.frobenius_distance(&mg)).max(mq.frobenius_distance(&mg));
                compared += 1;
            }
        }
        k += g.len().max(1);
    }
    verdict(
        format!("max pairwise gap {} over {compared} samples, {segments} Gibbs segments", fmt(worst)),
        compared > 0 && worst <= 1e-6 / tighten,
    )
}

fn matrix_ode_oracle(tighten: f64) -> Result<Verdict> {
    let start = Instant::now();
    let omega = OmegaModel::rotating_plane(40.0);
    let dt = 1e-3;
    let q = integrate(Representation::Quaternion, Attitude::Euler(diagonal_start()), &omega, 0.0, 100.0, dt)?;
    let axis = 1.0 / 3f64.sqrt();
    let rs = integrate_matrix(&omega, rodrigues([axis; 3], 1.0), 0.0, dt, q.len() - 1)?;
    let mut worst = 0.0f64;
    for (k, r) in rs.iter().enumerate() {
        worst = worst.max(frobenius(&q.matrix(k)?.0, r));
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(format!("max gap {}, {secs:.2} s", fmt(worst)), worst <= 1e-6 / tighten && secs < 30.0 / tighten)
}

fn rk4_order(tighten: f64) -> Result<Verdict> {
    let sol = spinor_params(Vec3::I, FRAC_PI_2, Vec3::K)?;
    let t_end = 4.0 * PI;
    let terminal = |steps: usize| -> Result<f64> {
        let tr = euler_run(&OmegaModel::constant(Vec3::K), EulerVector(Vec3::new(FRAC_PI_2, 0.0, 0.0)), t_end, t_end / steps as f64)?;
        let last = tr.len() - 1;
        Ok((tr.vec3(last) - spinor_euler(&sol, tr.time(last))).norm())
    };
    let (coarse, fine) = (terminal(400)?, terminal(800)?);
    let ratio = coarse / fine;
    verdict(format!("errors {} / {} = {ratio:.2}", fmt(coarse), fmt(fine)), in_band(ratio, 14.0, 18.0, tighten))
}

/// Frequencies of the two strongest peaks of the `|E|` spectrum, ascending.
fn top_two(period: f64) -> Result<(f64, f64, f64)> {
    let start = Instant::now();
    let dt = 0.01;
    let tr = euler_run(&OmegaModel::rotating_plane(period), diagonal_start(), 4200.0, dt)?;
    let spec = power_spectrum(&tr.angle_series(), dt, Window::Hann)?;
    let peaks = detect_peaks(&spec, 0.0, 2);
    if peaks.len() < 2 {
        return Err(EslError::InvalidInput(format!("found {} spectral peaks", peaks.len())));
    }
    let (a, b) = (peaks[0].freq.min(peaks[1].freq), peaks[0].freq.max(peaks[1].freq));
    Ok((a, b, start.elapsed().as_secs_f64()))
}

fn psd_peaks(tighten: f64) -> Result<Verdict> {
    let tol = 0.005;
    let (f1, f2, s1) = top_two(40.0)?;
    let slow_ok = in_band(f1, 0.068 - tol, 0.068 + tol, tighten) && in_band(f2, 0.0925 - tol, 0.0925 + tol, tighten);
    let (g1, g2, s2) = top_two(PI)?;
    let (long, short) = (1.0 / g1, 1.0 / g2);
    let fast_ok = in_band(short, 3.0 * 0.85, 3.0 * 1.15, tighten) && in_band(long, 53.0 * 0.85, 53.0 * 1.15, tighten);
    let time_ok = s1 < 120.0 / tighten && s2 < 120.0 / tighten;
    verdict(
        format!("T=40 peaks {f1:.4}, {f2:.4} ({s1:.1} s); T=pi periods {short:.2}, {long:.2} ({s2:.1} s)"),
        slow_ok && fast_ok && time_ok,
    )
}

fn lyapunov(tighten: f64) -> Result<Verdict> {
    let flow = AttitudeFlow::new(Representation::Quaternion, OmegaModel::rotating_plane(40.0))?;
    let q0 = convert(Attitude::Euler(diagonal_start()), Representation::Quaternion, None)?;
    let est = lyapunov_spectrum(&flow, &q0.to_state(), LyapunovOptions::new(100_000, 0.01))?;
    let linear = lyapunov_spectrum(&LinearFlow::diagonal(&[0.1, -0.2]), &[1.0, 1.0], LyapunovOptions::new(10_000, 0.01))?;
    let linear_err = (linear.exponents[0] - 0.1).abs().max((linear.exponents[1] + 0.2).abs());
    verdict(
        format!("lambda_max {}, linear self-test error {}", fmt(est.max_exponent()), fmt(linear_err)),
        est.max_exponent().abs() <= 1e-3 / tighten && linear_err <= 1e-4 / tighten,
    )
}

fn boundary_passage(tighten: f64) -> Result<Verdict> {
    let dt = 1e-3;
    let forward = OmegaModel::Polynomial { coeffs: vec![Vec3::I, Vec3::J] };
    let there = euler_run(&forward, EulerVector(Vec3::ZERO), 1.0, dt)?;
    let e1 = there.vec3(there.len() - 1);
    // the same rotation written with angle 2 pi - theta about the reversed axis
    let start = AxisAngle::from_unit(-e1 / e1.norm(), TAU - e1.norm());
    let omega = OmegaModel::reversed(forward, 1.0);
    let q = integrate(Representation::Quaternion, Attitude::AxisAngle(start), &omega, 0.0, 12.0, dt)?;
    let (aa, rec) = continue_axis_angle(&q, &omega, Some(start))?;

    let theta: Vec<f64> = aa.states().map(|s| s[3]).collect();
    let axis = |k: usize| Vec3::from_slice(aa.state(k));
    let max_speed = aa.times().map(|t| omega.eval(t).map(|w| w.norm())).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    let cross = theta.iter().position(|&th| th >= TAU).ok_or_else(|| EslError::InvalidInput("angle never reaches 2 pi".into()))?;
    let window = (0.1 / dt) as usize;
    let monotone = (cross.saturating_sub(window)..(cross + window).min(theta.len() - 1)).all(|k| theta[k + 1] > theta[k]);
    let dn = (1..aa.len()).map(|k| (axis(k) - axis(k - 1)).norm()).fold(0.0, f64::max);
    let dth = theta.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
    let after = &theta[cross..];
    let (lo, hi) = after.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let turns = after.windows(3).filter(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0).count();
    let slack = 1e-9 / tighten;
    let passed = monotone
        && rec.zero_times.len() == 1
        && dn <= 2.0 * max_speed * dt / tighten
        && dth <= max_speed * dt * (1.0 + 1e-6)
        && lo >= TAU - slack
        && hi <= 2.0 * TAU + slack
        && turns >= 2;
    verdict(
        format!(
            "crossing at t = {:.4}, |dn| {} (limit {}), theta after in [{lo:.4}, {hi:.4}] with {turns} turning points",
            aa.time(cross),
            fmt(dn),
            fmt(2.0 * max_speed * dt)
        ),
        passed,
    )
}

fn continuation_sign(tighten: f64) -> Result<Verdict> {
    let omega = OmegaModel::Polynomial { coeffs: vec![Vec3::K, Vec3::K * -0.5] };
    let q = integrate(Representation::Quaternion, Attitude::AxisAngle(AxisAngle::identity()), &omega, 0.0, 6.0, 1e-3)?;
    let (aa, _) = continue_axis_angle(&q, &omega, None)?;
    let (mut axis_err, mut angle_err) = (0.0f64, 0.0f64);
    for (k, t) in aa.times().enumerate() {
        axis_err = axis_err.max((Vec3::from_slice(aa.state(k)) - Vec3::K).norm());
        angle_err = angle_err.max((aa.state(k)[3] - (t - 0.25 * t * t)).abs());
    }
    let last = aa.state(aa.len() - 1)[3];
    let tol = 1e-6 / tighten;
    verdict(
        format!("axis error {}, angle error {}, final theta {last:.4}", fmt(axis_err), fmt(angle_err)),
        axis_err <= tol && angle_err <= tol && last < 0.0,
    )
}

fn random_vec(rng: &mut ChaCha8Rng, r: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-r..r), rng.gen_range(-r..r), rng.gen_range(-r..r))
}

fn gibbs_divergence(tighten: f64) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (g, w) = (random_vec(&mut rng, 5.0), random_vec(&mut rng, 3.0));
        let fd: f64 = [Vec3::I, Vec3::J, Vec3::K]
            .into_iter()
            .map(|e| (rhs_gibbs(g + e * h, w) - rhs_gibbs(g - e * h, w)).dot(e) / (2.0 * h))
            .sum();
        worst = worst.max((fd - divergence_gibbs(g, w)).abs());
    }
    verdict(format!("max difference {}", fmt(worst)), worst <= 1e-6 / tighten)
}

fn gibbs_identity(tighten: f64) -> Result<Verdict> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, b, c, d) = (random_vec(&mut rng, 3.0), random_vec(&mut rng, 3.0), random_vec(&mut rng, 3.0), random_vec(&mut rng, 3.0));
        let scale = a.norm() * b.norm() * c.norm() * d.norm();
        worst = worst.max(gibbs_identity_residual(a, b, c, d).norm() / scale);
    }
    verdict(format!("max relative residual {}", fmt(worst)), worst <= 1e-11 / tighten)
}

fn strobe_nonperiodic(tighten: f64) -> Result<Verdict> {
    let (period, t_end) = (40.0, 4200.0);
    let tr = euler_run(&OmegaModel::rotating_plane(period), diagonal_start(), t_end, 0.01)?;
    let s = strobe(&tr, period, 0.0)?;
    let expected = (t_end / period).floor() as usize + 1;
    let gap = nearest_neighbor_gaps(&s.points).map_or(0.0, |g| g.min);
    verdict(
        format!("{} points (expected {expected}), closest pair {}", s.points.len(), fmt(gap)),
        s.points.len() == expected && gap > 1e-4 * tighten,
    )
}

fn quaternion_norm(tighten: f64) -> Result<Verdict> {
    let q = integrate(Representation::Quaternion, Attitude::Euler(diagonal_start()), &OmegaModel::rotating_plane(40.0), 0.0, 100.0, 1e-3)?;
    let steps = q.len() - 1;
    let drift = q.norm_drift.unwrap_or_default();
    verdict(
        format!("cumulative drift {} over {steps} steps, worst step {}", fmt(drift.cumulative), fmt(drift.max_step)),
        q.norm_drift.is_some() && steps >= 100_000 && drift.cumulative <= 1e-9 / tighten,
    )
}
