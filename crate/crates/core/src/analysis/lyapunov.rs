//! Lyapunov spectrum by the tangent-space method: RK4 on the state and an
//! orthonormal frame of perturbations, with periodic Gram-Schmidt
//! re-orthonormalization and accumulation of the log stretch factors.

use serde::{Deserialize, Serialize};

use crate::dynamics::{rhs_euler_vector, rhs_gibbs, rhs_quaternion};
use crate::error::{EslError, Result};
use crate::omega::OmegaModel;
use crate::rotation::{Representation, UnitQuaternion};
use crate::vec3::Vec3;

/// Central-difference step for the Jacobian.
pub const JACOBIAN_STEP: f64 = 1e-6;

/// A (possibly non-autonomous) vector field, optionally confined to a
/// constraint surface with a known unit normal.
pub trait Flow {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// Unit normal of the constraint surface through `x`, if any.
    fn constraint_normal(&self, _x: &[f64]) -> Option<Vec<f64>> {
        None
    }

    /// Pulls `x` back onto the constraint surface after a step.
    fn project(&self, _x: &mut [f64]) {}
}

/// Attitude ODE driven by an angular-velocity model.
#[derive(Debug, Clone)]
pub struct AttitudeFlow {
    pub representation: Representation,
    pub omega: OmegaModel,
}

impl AttitudeFlow {
    pub fn new(representation: Representation, omega: OmegaModel) -> Result<Self> {
        match representation {
            Representation::Euler | Representation::Quaternion | Representation::Gibbs => {
                Ok(Self { representation, omega })
            }
            other => Err(EslError::InvalidInput(format!("no Lyapunov flow for the {other} representation"))),
        }
    }
}

impl Flow for AttitudeFlow {
    fn dim(&self) -> usize {
        self.representation.width()
    }

    fn rhs(&self, t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        let w = self.omega.eval(t)?;
        match self.representation {
            Representation::Quaternion => {
                out.copy_from_slice(&rhs_quaternion(UnitQuaternion::from_slice(x), w).to_array())
            }
            Representation::Euler => out.copy_from_slice(&rhs_euler_vector(Vec3::from_slice(x), w)?.to_array()),
            Representation::Gibbs => {
                let g = Vec3::from_slice(x);
                if !(g.norm() <= crate::dynamics::GIBBS_OVERFLOW) {
                    return Err(EslError::TrajectoryAborted { time: t });
                }
                out.copy_from_slice(&rhs_gibbs(g, w).to_array())
            }
            _ => unreachable!("rejected in AttitudeFlow::new"),
        }
        Ok(())
    }

    fn constraint_normal(&self, x: &[f64]) -> Option<Vec<f64>> {
        (self.representation == Representation::Quaternion).then(|| {
            let n = norm(x);
            x.iter().map(|v| v / n).collect()
        })
    }

    fn project(&self, x: &mut [f64]) {
        if self.representation == Representation::Quaternion {
            let n = norm(x);
            x.iter_mut().for_each(|v| *v /= n);
        }
    }
}

/// `x' = A x` for a constant square matrix.
#[derive(Debug, Clone)]
pub struct LinearFlow {
    pub matrix: Vec<Vec<f64>>,
}

impl LinearFlow {
    pub fn diagonal(d: &[f64]) -> Self {
        let matrix = (0..d.len())
            .map(|i| (0..d.len()).map(|j| if i == j { d[i] } else { 0.0 }).collect())
            .collect();
        Self { matrix }
    }
}

impl Flow for LinearFlow {
    fn dim(&self) -> usize {
        self.matrix.len()
    }

    fn rhs(&self, _t: f64, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (o, row) in out.iter_mut().zip(&self.matrix) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovOptions {
    pub t0: f64,
    pub steps: usize,
    pub dt: f64,
    pub renorm_interval: usize,
    /// Steps between history records; a multiple of `renorm_interval`.
    pub record_interval: usize,
}

impl LyapunovOptions {
    pub const MIN_STEPS: usize = 1000;

    pub fn new(steps: usize, dt: f64) -> Self {
        Self { t0: 0.0, steps, dt, renorm_interval: 10, record_interval: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    /// Exponents in descending order, per unit time.
    pub exponents: Vec<f64>,
    /// `(step, running estimates)` in frame order.
    pub history: Vec<(usize, Vec<f64>)>,
    pub steps: usize,
    pub dt: f64,
}

impl LyapunovEstimate {
    pub fn max_exponent(&self) -> f64 {
        self.exponents[0]
    }

    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }
}

/// Tangent-space Lyapunov spectrum along the orbit from `x0`.
pub fn lyapunov_spectrum(flow: &dyn Flow, x0: &[f64], opts: LyapunovOptions) -> Result<LyapunovEstimate> {
    let n = flow.dim();
    if x0.len() != n {
        return Err(EslError::InvalidInput(format!("initial state has {} components, flow needs {n}", x0.len())));
    }
    if opts.steps < LyapunovOptions::MIN_STEPS {
        return Err(EslError::InvalidInput(format!(
            "need at least {} steps, got {}",
            LyapunovOptions::MIN_STEPS,
            opts.steps
        )));
    }
    if opts.renorm_interval == 0 || opts.record_interval == 0 || opts.record_interval % opts.renorm_interval != 0 {
        return Err(EslError::InvalidInput(
            "record interval must be a positive multiple of the renormalization interval".into(),
        ));
    }
    if !(opts.dt > 0.0) {
        return Err(EslError::InvalidInput(format!("step size must be positive, got {}", opts.dt)));
    }
    let mut x = x0.to_vec();
    flow.project(&mut x);
    let mut frame = initial_frame(flow, &x);
    let p = frame.len();
    let mut sums = vec![0.0; p];
    let mut history = Vec::with_capacity(opts.steps / opts.record_interval);
    let mut ws = Workspace::new(n, p);

    for step in 1..=opts.steps {
        let t = opts.t0 + (step - 1) as f64 * opts.dt;
        rk4_tangent(flow, t, opts.dt, &mut x, &mut frame, &mut ws).map_err(|e| abort_time(e, t))?;
        flow.project(&mut x);
        if step % opts.renorm_interval == 0 || step == opts.steps {
            orthonormalize(flow, &x, &mut frame, &mut sums);
        }
        if step % opts.record_interval == 0 {
            let elapsed = step as f64 * opts.dt;
            history.push((step, sums.iter().map(|s| s / elapsed).collect()));
        }
    }
    let elapsed = opts.steps as f64 * opts.dt;
    let mut exponents: Vec<f64> = sums.iter().map(|s| s / elapsed).collect();
    exponents.sort_by(|a, b| b.total_cmp(a));
    Ok(LyapunovEstimate { exponents, history, steps: opts.steps, dt: opts.dt })
}

fn abort_time(e: EslError, t: f64) -> EslError {
    match e {
        EslError::BoundarySingularity { .. } | EslError::TrajectoryAborted { .. } => {
            EslError::TrajectoryAborted { time: t }
        }
        other => other,
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Orthonormal basis of the tangent space at `x`.
fn initial_frame(flow: &dyn Flow, x: &[f64]) -> Vec<Vec<f64>> {
    let n = flow.dim();
    let normal = flow.constraint_normal(x);
    let mut frame: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        if let Some(nu) = &normal {
            let c = dot(nu, &v);
            v.iter_mut().zip(nu).for_each(|(a, b)| *a -= c * b);
        }
        for q in &frame {
            let c = dot(q, &v);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let r = norm(&v);
        if r > 1e-8 {
            v.iter_mut().for_each(|a| *a /= r);
            frame.push(v);
        }
    }
    frame
}

/// Projects out the constraint normal, then modified Gram-Schmidt, adding `ln R_ii`.
fn orthonormalize(flow: &dyn Flow, x: &[f64], frame: &mut [Vec<f64>], sums: &mut [f64]) {
    let normal = flow.constraint_normal(x);
    for j in 0..frame.len() {
        let (done, rest) = frame.split_at_mut(j);
        let v = &mut rest[0];
        if let Some(nu) = &normal {
            let c = dot(nu, v);
            v.iter_mut().zip(nu).for_each(|(a, b)| *a -= c * b);
        }
        for q in done.iter() {
            let c = dot(q, v);
            v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
        }
        let r = norm(v);
        sums[j] += r.ln();
        v.iter_mut().for_each(|a| *a /= r);
    }
}

struct Workspace {
    jac: Vec<Vec<f64>>,
    xs: Vec<f64>,
    plus: Vec<f64>,
    minus: Vec<f64>,
    fx: Vec<f64>,
    kx: [Vec<f64>; 4],
    kw: [Vec<Vec<f64>>; 4],
    stage_w: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(n: usize, p: usize) -> Self {
        let z = vec![0.0; n];
        let zw = vec![vec![0.0; n]; p];
        Self {
            jac: vec![vec![0.0; n]; n],
            xs: z.clone(),
            plus: z.clone(),
            minus: z.clone(),
            fx: z.clone(),
            kx: [z.clone(), z.clone(), z.clone(), z],
            kw: [zw.clone(), zw.clone(), zw.clone(), zw.clone()],
            stage_w: zw,
        }
    }
}

/// `jac[i][j] = d f_i / d x_j` by central differences.
fn jacobian(flow: &dyn Flow, t: f64, x: &[f64], ws: &mut Workspace) -> Result<()> {
    let n = x.len();
    for j in 0..n {
        ws.plus.copy_from_slice(x);
        ws.minus.copy_from_slice(x);
        ws.plus[j] += JACOBIAN_STEP;
        ws.minus[j] -= JACOBIAN_STEP;
        flow.rhs(t, &ws.plus, &mut ws.fx)?;
        let fp = ws.fx.clone();
        flow.rhs(t, &ws.minus, &mut ws.fx)?;
        for i in 0..n {
            ws.jac[i][j] = (fp[i] - ws.fx[i]) / (2.0 * JACOBIAN_STEP);
        }
    }
    Ok(())
}

fn rk4_tangent(
    flow: &dyn Flow,
    t: f64,
    dt: f64,
    x: &mut [f64],
    frame: &mut [Vec<f64>],
    ws: &mut Workspace,
) -> Result<()> {
    const STAGE: [(f64, f64); 4] = [(0.0, 0.0), (0.5, 0.5), (0.5, 0.5), (1.0, 1.0)];
    let n = x.len();
    for s in 0..4 {
        let (ct, cx) = STAGE[s];
        for i in 0..n {
            ws.xs[i] = x[i] + if s == 0 { 0.0 } else { cx * dt * ws.kx[s - 1][i] };
        }
        for (c, w) in frame.iter().enumerate() {
            for i in 0..n {
                ws.stage_w[c][i] = w[i] + if s == 0 { 0.0 } else { cx * dt * ws.kw[s - 1][c][i] };
            }
        }
        let ts = t + ct * dt;
        let xs = ws.xs.clone();
        let mut kx = std::mem::take(&mut ws.kx[s]);
        flow.rhs(ts, &xs, &mut kx)?;
        ws.kx[s] = kx;
        jacobian(flow, ts, &xs, ws)?;
        for c in 0..frame.len() {
            for i in 0..n {
                ws.kw[s][c][i] = dot(&ws.jac[i], &ws.stage_w[c]);
            }
        }
    }
    for i in 0..n {
        x[i] += dt / 6.0 * (ws.kx[0][i] + 2.0 * ws.kx[1][i] + 2.0 * ws.kx[2][i] + ws.kx[3][i]);
    }
    for (c, w) in frame.iter_mut().enumerate() {
        for i in 0..n {
            w[i] += dt / 6.0 * (ws.kw[0][c][i] + 2.0 * ws.kw[1][c][i] + 2.0 * ws.kw[2][c][i] + ws.kw[3][c][i]);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_system_exponents() {
        let flow = LinearFlow::diagonal(&[0.1, -0.2]);
        let est = lyapunov_spectrum(&flow, &[1.0, 1.0], LyapunovOptions::new(10_000, 0.01)).unwrap();
        assert!((est.exponents[0] - 0.1).abs() < 1e-6, "{:?}", est.exponents);
        assert!((est.exponents[1] + 0.2).abs() < 1e-6);
        assert_eq!(est.history.len(), 1000);
    }

    #[test]
    fn frozen_flow_has_zero_exponents() {
        let flow = AttitudeFlow::new(Representation::Quaternion, OmegaModel::constant(Vec3::ZERO)).unwrap();
        let est = lyapunov_spectrum(&flow, &[0.8, 0.6, 0.0, 0.0], LyapunovOptions::new(1000, 0.01)).unwrap();
        assert_eq!(est.exponents.len(), 3);
        assert!(est.exponents.iter().all(|l| l.abs() < 1e-9));
    }

    #[test]
    fn rejects_short_runs() {
        let flow = LinearFlow::diagonal(&[1.0]);
        assert!(lyapunov_spectrum(&flow, &[1.0], LyapunovOptions::new(10, 0.01)).is_err());
    }
}
