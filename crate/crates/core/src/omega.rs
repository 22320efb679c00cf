//! Angular-velocity models `omega(t)`.

use std::path::Path;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{EslError, Result};
use crate::quadrature::adaptive_simpson;
use crate::spline::CubicSpline;
use crate::vec3::Vec3;

/// Quadrature tolerance for [`OmegaModel::arc_time`] and [`OmegaModel::integrated_omega`].
pub const QUADRATURE_TOL: f64 = 1e-10;

/// Finite-difference step for tabulated derivatives.
pub const TABULATED_FD_STEP: f64 = 1e-4;

pub const MAX_DERIVATIVE_ORDER: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OmegaModel {
    Constant {
        omega: Vec3,
    },
    /// `amplitude * (cos(alpha t), sin(alpha t), 0)`.
    RotatingPlane {
        alpha: f64,
        amplitude: f64,
    },
    /// `3t^2 (sin(1/t), cos(1/t), 0) + t (-cos(1/t), sin(1/t), 0)` for `t > 0`, zero at 0.
    Pathological,
    Tabulated(Tabulated),
    /// `sum_j coeffs[j] t^j`.
    Polynomial {
        coeffs: Vec<Vec3>,
    },
    /// `-inner(t1 - t)`.
    Reversed {
        inner: Box<OmegaModel>,
        t1: f64,
    },
}

/// Cubic-spline interpolation of sampled angular velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TabulatedSamples", into = "TabulatedSamples")]
pub struct Tabulated {
    spline: CubicSpline,
}

#[derive(Serialize, Deserialize)]
struct TabulatedSamples {
    samples: Vec<(f64, Vec3)>,
}

impl TryFrom<TabulatedSamples> for Tabulated {
    type Error = EslError;
    fn try_from(s: TabulatedSamples) -> Result<Self> {
        Tabulated::new(s.samples)
    }
}

impl From<Tabulated> for TabulatedSamples {
    fn from(t: Tabulated) -> Self {
        let samples = t.spline.times().iter().copied().zip(t.spline.values().iter().copied()).collect();
        TabulatedSamples { samples }
    }
}

impl Tabulated {
    pub const MIN_ROWS: usize = 4;

    pub fn new(samples: Vec<(f64, Vec3)>) -> Result<Self> {
        if samples.len() < Self::MIN_ROWS {
            return Err(EslError::InvalidModel(format!(
                "tabulated omega needs at least {} samples, got {}",
                Self::MIN_ROWS,
                samples.len()
            )));
        }
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(EslError::InvalidModel(format!(
                    "tabulated times must be strictly increasing ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if samples.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(EslError::InvalidModel("tabulated samples must be finite".into()));
        }
        let (times, values) = samples.into_iter().unzip();
        Ok(Self { spline: CubicSpline::natural(times, values) })
    }

    /// Samples a model on `[t0, t1]` at `count` evenly spaced times.
    pub fn sample(model: &OmegaModel, t0: f64, t1: f64, count: usize) -> Result<Self> {
        let step = (t1 - t0) / (count.max(2) - 1) as f64;
        let samples = (0..count.max(2))
            .map(|k| {
                let t = t0 + step * k as f64;
                model.eval(t).map(|w| (t, w))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    /// Reads `t,wx,wy,wz` rows.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path.as_ref())?;
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if headers != ["t", "wx", "wy", "wz"] {
            return Err(EslError::Schema(format!(
                "{}: expected header t,wx,wy,wz, found {}",
                path.as_ref().display(),
                headers.join(",")
            )));
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let vals = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| EslError::Schema(format!("bad number in omega table: {e}")))?;
            if vals.len() != 4 {
                return Err(EslError::Schema(format!("omega row has {} fields", vals.len())));
            }
            samples.push((vals[0], Vec3::new(vals[1], vals[2], vals[3])));
        }
        Self::new(samples)
    }

    pub fn start(&self) -> f64 {
        self.spline.start()
    }

    pub fn end(&self) -> f64 {
        self.spline.end()
    }

    fn check(&self, t: f64) -> Result<()> {
        if t < self.start() || t > self.end() || t.is_nan() {
            return Err(EslError::OutOfRange { t, lo: self.start(), hi: self.end() });
        }
        Ok(())
    }

    fn derivatives(&self, t: f64, max_order: usize) -> Result<Vec<Vec3>> {
        self.check(t)?;
        let mut out = self.spline.derivatives(t, max_order);
        let h = TABULATED_FD_STEP;
        if t - h >= self.start() && t + h <= self.end() {
            let (lo, mid, hi) = (self.spline.eval(t - h), out[0], self.spline.eval(t + h));
            if max_order >= 1 {
                out[1] = (hi - lo) / (2.0 * h);
            }
            if max_order >= 2 {
                out[2] = (hi - mid * 2.0 + lo) / (h * h);
            }
        }
        Ok(out)
    }
}

impl OmegaModel {
    pub fn constant(omega: Vec3) -> Self {
        OmegaModel::Constant { omega }
    }

    /// Unit-amplitude rotation in the x-y plane with period `period`.
    pub fn rotating_plane(period: f64) -> Self {
        OmegaModel::RotatingPlane { alpha: std::f64::consts::TAU / period, amplitude: 1.0 }
    }

    pub fn reversed(inner: OmegaModel, t1: f64) -> Self {
        OmegaModel::Reversed { inner: Box::new(inner), t1 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            OmegaModel::Constant { omega } if !omega.is_finite() => {
                Err(EslError::InvalidModel(format!("constant omega {omega} is not finite")))
            }
            OmegaModel::RotatingPlane { alpha, amplitude } if !(*alpha > 0.0 && alpha.is_finite() && amplitude.is_finite()) => {
                Err(EslError::InvalidModel(format!(
                    "rotating-plane omega needs finite alpha > 0 (alpha = {alpha}, amplitude = {amplitude})"
                )))
            }
            OmegaModel::Polynomial { coeffs } if coeffs.iter().any(|c| !c.is_finite()) => {
                Err(EslError::InvalidModel("polynomial coefficients must be finite".into()))
            }
            OmegaModel::Reversed { inner, t1 } => {
                if !t1.is_finite() {
                    return Err(EslError::InvalidModel(format!("reversal time {t1} is not finite")));
                }
                inner.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, t: f64) -> Result<Vec3> {
        match self {
            OmegaModel::Constant { omega } => Ok(*omega),
            OmegaModel::RotatingPlane { alpha, amplitude } => {
                let (s, c) = (alpha * t).sin_cos();
                Ok(Vec3::new(c, s, 0.0) * *amplitude)
            }
            OmegaModel::Pathological => {
                check_nonnegative(t)?;
                if t == 0.0 {
                    return Ok(Vec3::ZERO);
                }
                let (s, c) = (1.0 / t).sin_cos();
                Ok(Vec3::new(3.0 * t * t * s - t * c, 3.0 * t * t * c + t * s, 0.0))
            }
            OmegaModel::Tabulated(tab) => {
                tab.check(t)?;
                Ok(tab.spline.eval(t))
            }
            OmegaModel::Polynomial { coeffs } => {
                Ok(coeffs.iter().rev().fold(Vec3::ZERO, |acc, &c| acc * t + c))
            }
            OmegaModel::Reversed { inner, t1 } => Ok(-inner.eval(t1 - t)?),
        }
    }

    /// `[omega(t), omega'(t), ..., omega^(max_order)(t)]`.
    pub fn derivatives(&self, t: f64, max_order: usize) -> Result<Vec<Vec3>> {
        if max_order > MAX_DERIVATIVE_ORDER {
            return Err(EslError::InvalidInput(format!(
                "derivative order {max_order} exceeds {MAX_DERIVATIVE_ORDER}"
            )));
        }
        match self {
            OmegaModel::Constant { omega } => {
                let mut out = vec![Vec3::ZERO; max_order + 1];
                out[0] = *omega;
                Ok(out)
            }
            OmegaModel::RotatingPlane { alpha, amplitude } => Ok((0..=max_order)
                .map(|j| {
                    // j-th derivative of (cos, sin) is alpha^j (cos, sin)(x + j pi/2)
                    let phase = alpha * t + j as f64 * std::f64::consts::FRAC_PI_2;
                    let (s, c) = phase.sin_cos();
                    Vec3::new(c, s, 0.0) * (amplitude * alpha.powi(j as i32))
                })
                .collect()),
            OmegaModel::Pathological => {
                check_nonnegative(t)?;
                if t == 0.0 {
                    if max_order == 0 {
                        return Ok(vec![Vec3::ZERO]);
                    }
                    return Err(EslError::NotDifferentiable { t });
                }
                Ok(pathological_derivatives(t, max_order))
            }
            OmegaModel::Tabulated(tab) => tab.derivatives(t, max_order),
            OmegaModel::Polynomial { coeffs } => Ok((0..=max_order)
                .map(|j| {
                    coeffs.iter().enumerate().skip(j).rev().fold(Vec3::ZERO, |acc, (p, &c)| {
                        let falling: f64 = ((p - j + 1)..=p).map(|x| x as f64).product();
                        acc * t + c * falling
                    })
                })
                .collect()),
            OmegaModel::Reversed { inner, t1 } => {
                let d = inner.derivatives(t1 - t, max_order)?;
                Ok(d.into_iter()
                    .enumerate()
                    .map(|(j, v)| if j % 2 == 0 { -v } else { v })
                    .collect())
            }
        }
    }

    /// Domain on which the model is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            OmegaModel::Pathological => (0.0, f64::INFINITY),
            OmegaModel::Tabulated(tab) => (tab.start(), tab.end()),
            OmegaModel::Reversed { inner, t1 } => {
                let (lo, hi) = inner.domain();
                (t1 - hi, t1 - lo)
            }
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `tau(t) = integral of |omega| from t0 to t`.
    pub fn arc_time(&self, t0: f64, t: f64) -> Result<f64> {
        if t < t0 {
            return Err(EslError::InvalidInput(format!("arc_time needs t >= t0 ({t} < {t0})")));
        }
        match self {
            OmegaModel::Constant { omega } => Ok(omega.norm() * (t - t0)),
            OmegaModel::RotatingPlane { amplitude, .. } => Ok(amplitude.abs() * (t - t0)),
            _ => adaptive_simpson(&|u| self.eval(u).map(Vec3::norm), t0, t, QUADRATURE_TOL),
        }
    }

    /// Componentwise integral of `omega` from `t0` to `t`.
    pub fn integrated_omega(&self, t0: f64, t: f64) -> Result<Vec3> {
        if t < t0 {
            return Err(EslError::InvalidInput(format!("integrated_omega needs t >= t0 ({t} < {t0})")));
        }
        match self.antiderivative(t0) {
            Some(lo) => Ok(self.antiderivative(t).expect("same model")? - lo?),
            None => adaptive_simpson(&|u| self.eval(u), t0, t, QUADRATURE_TOL),
        }
    }

    /// Closed-form antiderivative, where one is known.
    fn antiderivative(&self, t: f64) -> Option<Result<Vec3>> {
        match self {
            OmegaModel::Constant { omega } => Some(Ok(*omega * t)),
            OmegaModel::RotatingPlane { alpha, amplitude } if *alpha != 0.0 => {
                let (s, c) = (alpha * t).sin_cos();
                Some(Ok(Vec3::new(s, -c, 0.0) * (amplitude / alpha)))
            }
            OmegaModel::Pathological => Some(check_nonnegative(t).map(|()| {
                if t == 0.0 {
                    Vec3::ZERO
                } else {
                    let (s, c) = (1.0 / t).sin_cos();
                    Vec3::new(s, c, 0.0) * (t * t * t)
                }
            })),
            OmegaModel::Polynomial { coeffs } => Some(Ok(coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(Vec3::ZERO, |acc, (p, &c)| (acc + c * (1.0 / (p + 1) as f64)) * t))),
            OmegaModel::Reversed { inner, t1 } => inner.antiderivative(t1 - t),
            _ => None,
        }
    }
}

fn check_nonnegative(t: f64) -> Result<()> {
    if t < 0.0 || t.is_nan() {
        return Err(EslError::OutOfRange { t, lo: 0.0, hi: f64::INFINITY });
    }
    Ok(())
}

/// Derivatives of the pathological model from its complex form
/// `w_x + i w_y = (3i t^2 - t) e^{-i/t}`, using
/// `d/dt [P(t) e^{-i/t}] = (P'(t) + i P(t) / t^2) e^{-i/t}` on Laurent polynomials.
fn pathological_derivatives(t: f64, max_order: usize) -> Vec<Vec3> {
    const OFFSET: i32 = 12;
    let mut poly = vec![Complex64::new(0.0, 0.0); 16];
    poly[(1 + OFFSET) as usize] = Complex64::new(-1.0, 0.0);
    poly[(2 + OFFSET) as usize] = Complex64::new(0.0, 3.0);
    let phase = Complex64::from_polar(1.0, -1.0 / t);
    let mut out = Vec::with_capacity(max_order + 1);
    for order in 0..=max_order {
        let value: Complex64 = poly
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm_sqr() != 0.0)
            .map(|(k, c)| c * t.powi(k as i32 - OFFSET))
            .sum::<Complex64>()
            * phase;
        out.push(Vec3::new(value.re, value.im, 0.0));
        if order == max_order {
            break;
        }
        let mut next = vec![Complex64::new(0.0, 0.0); poly.len()];
        for (k, c) in poly.iter().enumerate() {
            let p = k as i32 - OFFSET;
            if c.norm_sqr() == 0.0 {
                continue;
            }
            if p != 0 {
                next[k - 1] += c * p as f64;
            }
            next[k - 2] += c * Complex64::new(0.0, 1.0);
        }
        poly = next;
    }
    out
}
