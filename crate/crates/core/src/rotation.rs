//! Exact rotation algebra: Rodrigues rotation and composition, the attitude
//! parameterizations evolved by the ODEs, and conversions between them.
//!
//! Conventions: rotations are counterclockwise (right-hand rule) about a unit
//! axis `n` by angle `theta`; quaternions are scalar-first, `(m0, m)` with
//! `m0 = cos(theta/2)` and `m = n sin(theta/2)`. Composition "first then
//! second" corresponds to the quaternion product `second * first`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Mul, Neg};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{EslError, Result};
use crate::vec3::Vec3;

/// Below this vector-part magnitude a composed rotation is reported as the identity.
pub const IDENTITY_EPS: f64 = 1e-14;

/// Distance from `pi + 2 pi k` inside which the Gibbs vector is refused.
pub const GIBBS_SINGULAR_EPS: f64 = 1e-9;

/// Rotation axis and angle. The angle is unbounded in both sign and
/// magnitude; `(n, theta)` and `(-n, -theta)` describe the same rotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisAngle {
    pub axis: Vec3,
    pub theta: f64,
}

impl AxisAngle {
    /// Normalizes `axis`; fails for a zero or non-finite axis.
    pub fn new(axis: Vec3, theta: f64) -> Result<Self> {
        let axis = axis
            .try_normalize()
            .ok_or_else(|| EslError::InvalidInput(format!("axis {axis} cannot be normalized")))?;
        if !theta.is_finite() {
            return Err(EslError::InvalidInput(format!("angle {theta} is not finite")));
        }
        Ok(Self { axis, theta })
    }

    /// Caller guarantees `|axis| = 1`.
    #[inline]
    pub fn from_unit(axis: Vec3, theta: f64) -> Self {
        debug_assert!((axis.norm() - 1.0).abs() <= 1e-9, "axis not unit: {axis}");
        Self { axis, theta }
    }

    pub fn identity() -> Self {
        Self { axis: Vec3::K, theta: 0.0 }
    }

    pub fn euler_vector(self) -> EulerVector {
        EulerVector(self.axis * self.theta)
    }

    pub fn quaternion(self) -> UnitQuaternion {
        UnitQuaternion::from_axis_angle(self)
    }

    pub fn matrix(self) -> RotationMatrix {
        matrix_from_axis_angle(self)
    }
}

/// Euler vector `E = n theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerVector(pub Vec3);

impl EulerVector {
    pub fn angle(self) -> f64 {
        self.0.norm()
    }

    /// Same physical rotation with the angle folded into `[-pi, pi]`.
    ///
    /// Restarting an integration from this vector keeps `|E|` away from 2π;
    /// for `|E| = 3π/2` it is `-E/3`.
    pub fn restart_form(self) -> EulerVector {
        let theta = self.0.norm();
        if theta <= PI {
            return self;
        }
        let folded = theta - TAU * (theta / TAU).round();
        EulerVector(self.0 * (folded / theta))
    }
}

/// Modified Gibbs vector `M = n sin(theta/2)`; unambiguous only for `|theta| <= pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModifiedGibbs(pub Vec3);

/// Gibbs (Rodrigues) vector `G = n tan(theta/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GibbsVector(pub Vec3);

/// Scalar-first unit quaternion `(m0, m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitQuaternion {
    pub m0: f64,
    pub m: Vec3,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion { m0: 1.0, m: Vec3::ZERO };

    pub fn new(m0: f64, m: Vec3) -> Self {
        Self { m0, m }
    }

    pub fn from_axis_angle(rot: AxisAngle) -> Self {
        let (s, c) = (0.5 * rot.theta).sin_cos();
        Self { m0: c, m: rot.axis * s }
    }

    pub fn norm(self) -> f64 {
        (self.m0 * self.m0 + self.m.norm_squared()).sqrt()
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self { m0: self.m0 / n, m: self.m / n }
    }

    pub fn conjugate(self) -> Self {
        Self { m0: self.m0, m: -self.m }
    }

    pub fn dot(self, o: UnitQuaternion) -> f64 {
        self.m0 * o.m0 + self.m.dot(o.m)
    }

    /// Principal angle in `[0, 2 pi]`, from `atan2` for conditioning near `m0 = ±1`.
    pub fn principal_angle(self) -> f64 {
        2.0 * self.m.norm().atan2(self.m0)
    }

    /// Axis and angle with the angle placed in `[2 pi l, 2 pi (l + 1)]`.
    ///
    /// Fails with `AxisUndefined` when the vector part vanishes.
    pub fn axis_angle_on_branch(self, l: i64) -> Result<AxisAngle> {
        let s = self.m.norm();
        if s == 0.0 {
            return Err(EslError::AxisUndefined);
        }
        let phi = 2.0 * s.atan2(self.m0);
        let dir = self.m / s;
        Ok(if l.rem_euclid(2) == 0 {
            AxisAngle::from_unit(dir, TAU * l as f64 + phi)
        } else {
            AxisAngle::from_unit(-dir, TAU * (l + 1) as f64 - phi)
        })
    }

    pub fn matrix(self) -> RotationMatrix {
        let (w, v) = (self.m0, self.m);
        let c = w * w - v.norm_squared();
        let mut r = [[0.0; 3]; 3];
        let va = v.to_array();
        for (i, row) in r.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = 2.0 * va[i] * va[j] + if i == j { c } else { 0.0 };
            }
        }
        r[0][1] -= 2.0 * w * v.z;
        r[1][0] += 2.0 * w * v.z;
        r[0][2] += 2.0 * w * v.y;
        r[2][0] -= 2.0 * w * v.y;
        r[1][2] -= 2.0 * w * v.x;
        r[2][1] += 2.0 * w * v.x;
        RotationMatrix(r)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.m0, self.m.x, self.m.y, self.m.z]
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Self { m0: s[0], m: Vec3::new(s[1], s[2], s[3]) }
    }
}

/// Hamilton product; `p * q` applies `q` first.
impl Mul for UnitQuaternion {
    type Output = UnitQuaternion;
    fn mul(self, q: UnitQuaternion) -> UnitQuaternion {
        UnitQuaternion {
            m0: self.m0 * q.m0 - self.m.dot(q.m),
            m: q.m * self.m0 + self.m * q.m0 + self.m.cross(q.m),
        }
    }
}

impl Neg for UnitQuaternion {
    type Output = UnitQuaternion;
    fn neg(self) -> UnitQuaternion {
        UnitQuaternion { m0: -self.m0, m: -self.m }
    }
}

/// Row-major 3x3 rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationMatrix(pub [[f64; 3]; 3]);

impl RotationMatrix {
    pub const IDENTITY: RotationMatrix =
        RotationMatrix([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn apply(&self, r: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * r.x + m[0][1] * r.y + m[0][2] * r.z,
            m[1][0] * r.x + m[1][1] * r.y + m[1][2] * r.z,
            m[2][0] * r.x + m[2][1] * r.y + m[2][2] * r.z,
        )
    }

    pub fn transpose(&self) -> RotationMatrix {
        let m = &self.0;
        let mut t = [[0.0; 3]; 3];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = m[j][i];
            }
        }
        RotationMatrix(t)
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &RotationMatrix) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let d = self.0[i][j] - other.0[i][j];
                s += d * d;
            }
        }
        s.sqrt()
    }

    /// Frobenius norm of `R^T R - I`.
    pub fn orthogonality_error(&self) -> f64 {
        (self.transpose() * *self).frobenius_distance(&RotationMatrix::IDENTITY)
    }
}

impl Mul for RotationMatrix {
    type Output = RotationMatrix;
    fn mul(self, o: RotationMatrix) -> RotationMatrix {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        RotationMatrix(r)
    }
}

/// Rodrigues' rotation of the point `r`.
pub fn rotate_point(r: Vec3, rot: AxisAngle) -> Vec3 {
    let (s, c) = rot.theta.sin_cos();
    let n = rot.axis;
    r * c + n * (n.dot(r) * (1.0 - c)) + n.cross(r) * s
}

pub fn matrix_from_axis_angle(rot: AxisAngle) -> RotationMatrix {
    let (s, c) = rot.theta.sin_cos();
    let n = rot.axis.to_array();
    let k = 1.0 - c;
    let mut r = [[0.0; 3]; 3];
    for (i, row) in r.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = k * n[i] * n[j] + if i == j { c } else { 0.0 };
        }
    }
    r[0][1] -= s * n[2];
    r[1][0] += s * n[2];
    r[0][2] += s * n[1];
    r[2][0] -= s * n[1];
    r[1][2] -= s * n[0];
    r[2][1] += s * n[0];
    RotationMatrix(r)
}

/// Result of composing two rotations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    /// Net rotation with angle in `[0, 2 pi)`. When the net rotation is the
    /// identity the axis is the placeholder `(0, 0, 1)`.
    pub rotation: AxisAngle,
    pub identity_composition: bool,
    /// True when the unreduced half-angle product had `cos(alpha/2) < 0`
    /// before folding, i.e. the composite quaternion is `-q(rotation)`.
    pub negated: bool,
}

/// Rodrigues' composition: the single rotation equal to `first` followed by `second`.
pub fn compose_rotations(first: AxisAngle, second: AxisAngle) -> Composition {
    let (s1, c1) = (0.5 * first.theta).sin_cos();
    let (s2, c2) = (0.5 * second.theta).sin_cos();
    let (a1, a2) = (first.axis, second.axis);
    let cos_half = c2 * c1 - a2.dot(a1) * s2 * s1;
    let vec_part = a2 * (s2 * c1) + a1 * (c2 * s1) + a2.cross(a1) * (s2 * s1);
    let q = UnitQuaternion::new(cos_half, vec_part);
    fold_quaternion(q)
}

/// Reduces a quaternion to an axis/angle with angle in `[0, 2 pi)`.
pub(crate) fn fold_quaternion(q: UnitQuaternion) -> Composition {
    let s = q.m.norm();
    if s < IDENTITY_EPS {
        return Composition {
            rotation: AxisAngle::identity(),
            identity_composition: true,
            negated: q.m0 < 0.0,
        };
    }
    let alpha = 2.0 * s.atan2(q.m0);
    Composition {
        rotation: AxisAngle::from_unit(q.m / s, alpha),
        identity_composition: false,
        negated: false,
    }
}

/// `D (A . (B x C)) - (B x C)(A . D) - (C x A)(B . D) - (A x B)(C . D)`,
/// identically zero for all arguments.
pub fn gibbs_identity_residual(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Vec3 {
    d * a.dot(b.cross(c)) - b.cross(c) * a.dot(d) - c.cross(a) * b.dot(d) - a.cross(b) * c.dot(d)
}

/// Attitude parameterization tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    AxisAngle,
    Euler,
    ModifiedGibbs,
    Gibbs,
    Quaternion,
}

impl Representation {
    /// Column names used in trajectory CSV files (after the leading `t`).
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            Representation::Euler => &["ex", "ey", "ez"],
            Representation::Quaternion => &["m0", "mx", "my", "mz"],
            Representation::Gibbs => &["gx", "gy", "gz"],
            Representation::ModifiedGibbs => &["mx", "my", "mz"],
            Representation::AxisAngle => &["nx", "ny", "nz", "theta"],
        }
    }

    pub fn width(self) -> usize {
        self.columns().len()
    }

    pub fn cli_name(self) -> &'static str {
        match self {
            Representation::AxisAngle => "axisangle",
            Representation::Euler => "euler",
            Representation::ModifiedGibbs => "mgibbs",
            Representation::Gibbs => "gibbs",
            Representation::Quaternion => "quat",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Representation {
    type Err = EslError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euler" | "e" => Ok(Representation::Euler),
            "quat" | "quaternion" | "q" => Ok(Representation::Quaternion),
            "gibbs" | "g" => Ok(Representation::Gibbs),
            "mgibbs" | "modified_gibbs" | "m" => Ok(Representation::ModifiedGibbs),
            "axisangle" | "axis_angle" => Ok(Representation::AxisAngle),
            other => Err(EslError::InvalidInput(format!("unknown representation '{other}'"))),
        }
    }
}

/// A rotation in any of the supported parameterizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attitude {
    AxisAngle(AxisAngle),
    Euler(EulerVector),
    ModifiedGibbs(ModifiedGibbs),
    Gibbs(GibbsVector),
    Quaternion(UnitQuaternion),
}

impl Attitude {
    pub fn representation(&self) -> Representation {
        match self {
            Attitude::AxisAngle(_) => Representation::AxisAngle,
            Attitude::Euler(_) => Representation::Euler,
            Attitude::ModifiedGibbs(_) => Representation::ModifiedGibbs,
            Attitude::Gibbs(_) => Representation::Gibbs,
            Attitude::Quaternion(_) => Representation::Quaternion,
        }
    }

    /// Flat state vector in the column order of [`Representation::columns`].
    pub fn to_state(&self) -> Vec<f64> {
        match *self {
            Attitude::AxisAngle(a) => vec![a.axis.x, a.axis.y, a.axis.z, a.theta],
            Attitude::Euler(EulerVector(v))
            | Attitude::ModifiedGibbs(ModifiedGibbs(v))
            | Attitude::Gibbs(GibbsVector(v)) => v.to_array().to_vec(),
            Attitude::Quaternion(q) => q.to_array().to_vec(),
        }
    }

    pub fn from_state(rep: Representation, s: &[f64]) -> Result<Self> {
        if s.len() != rep.width() {
            return Err(EslError::Schema(format!(
                "{rep} state needs {} components, got {}",
                rep.width(),
                s.len()
            )));
        }
        Ok(match rep {
            Representation::AxisAngle => {
                Attitude::AxisAngle(AxisAngle::new(Vec3::from_slice(s), s[3])?)
            }
            Representation::Euler => Attitude::Euler(EulerVector(Vec3::from_slice(s))),
            Representation::ModifiedGibbs => {
                Attitude::ModifiedGibbs(ModifiedGibbs(Vec3::from_slice(s)))
            }
            Representation::Gibbs => Attitude::Gibbs(GibbsVector(Vec3::from_slice(s))),
            Representation::Quaternion => Attitude::Quaternion(UnitQuaternion::from_slice(s)),
        })
    }

    /// Rotation matrix of the physical rotation.
    pub fn matrix(&self) -> Result<RotationMatrix> {
        Ok(match *self {
            Attitude::Quaternion(q) => q.normalized().matrix(),
            Attitude::AxisAngle(a) => a.matrix(),
            other => match convert(other, Representation::AxisAngle, None) {
                Ok(Attitude::AxisAngle(a)) => a.matrix(),
                Ok(_) => unreachable!(),
                Err(EslError::AxisUndefined) => RotationMatrix::IDENTITY,
                Err(e) => return Err(e),
            },
        })
    }
}

/// Converts between parameterizations.
///
/// `branch` selects the angle interval `[2 pi l, 2 pi (l + 1)]` when
/// extracting an axis/angle from a quaternion or modified Gibbs vector;
/// `None` is the principal branch. Euler vectors are extracted with
/// `theta = |E| >= 0`.
pub fn convert(att: Attitude, target: Representation, branch: Option<i64>) -> Result<Attitude> {
    if att.representation() == target && branch.is_none() {
        return Ok(att);
    }
    let aa = to_axis_angle(att, branch)?;
    Ok(match target {
        Representation::AxisAngle => Attitude::AxisAngle(aa),
        Representation::Euler => Attitude::Euler(aa.euler_vector()),
        Representation::ModifiedGibbs => {
            Attitude::ModifiedGibbs(ModifiedGibbs(aa.axis * (0.5 * aa.theta).sin()))
        }
        Representation::Gibbs => {
            let off = (aa.theta - PI).rem_euclid(TAU);
            if off.min(TAU - off) < GIBBS_SINGULAR_EPS {
                return Err(EslError::GibbsSingularity { theta: aa.theta });
            }
            Attitude::Gibbs(GibbsVector(aa.axis * (0.5 * aa.theta).tan()))
        }
        Representation::Quaternion => Attitude::Quaternion(aa.quaternion()),
    })
}

fn to_axis_angle(att: Attitude, branch: Option<i64>) -> Result<AxisAngle> {
    match att {
        Attitude::AxisAngle(a) => Ok(a),
        Attitude::Euler(EulerVector(e)) => {
            let theta = e.norm();
            if theta == 0.0 {
                return Err(EslError::AxisUndefined);
            }
            Ok(AxisAngle::from_unit(e / theta, theta))
        }
        Attitude::Gibbs(GibbsVector(g)) => {
            let t = g.norm();
            if t == 0.0 {
                return Err(EslError::AxisUndefined);
            }
            Ok(AxisAngle::from_unit(g / t, 2.0 * t.atan()))
        }
        Attitude::ModifiedGibbs(ModifiedGibbs(m)) => {
            let s = m.norm();
            if s > 1.0 + 1e-12 {
                return Err(EslError::InvalidInput(format!("|M| = {s} exceeds 1")));
            }
            let c = (1.0 - s * s).max(0.0).sqrt();
            UnitQuaternion::new(c, m).axis_angle_on_branch(branch.unwrap_or(0))
        }
        Attitude::Quaternion(q) => q.axis_angle_on_branch(branch.unwrap_or(0)),
    }
}

/// A generalized Euler vector `F = n f(theta)` with `f` odd, `f'(0) > 0`.
#[derive(Clone, Copy)]
pub struct GeneralizedRep {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub f_prime: fn(f64) -> f64,
    /// Inverse of `f`, valid for `0 <= |F| <= inverse_bound`.
    pub f_inverse: fn(f64) -> f64,
    pub inverse_bound: f64,
    pub f_prime_at_0: f64,
    pub f_third_at_0: f64,
}

impl fmt::Debug for GeneralizedRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneralizedRep").field("name", &self.name).finish_non_exhaustive()
    }
}

impl GeneralizedRep {
    /// `f(theta) = theta`.
    pub fn euler() -> Self {
        Self {
            name: "euler",
            f: |t| t,
            f_prime: |_| 1.0,
            f_inverse: |x| x,
            inverse_bound: f64::INFINITY,
            f_prime_at_0: 1.0,
            f_third_at_0: 0.0,
        }
    }

    /// `f(theta) = sin(theta/2)`.
    pub fn modified_gibbs() -> Self {
        Self {
            name: "modified_gibbs",
            f: |t| (0.5 * t).sin(),
            f_prime: |t| 0.5 * (0.5 * t).cos(),
            f_inverse: |x| 2.0 * x.asin(),
            inverse_bound: 1.0,
            f_prime_at_0: 0.5,
            f_third_at_0: -0.125,
        }
    }

    /// `f(theta) = tan(theta/2)`.
    pub fn gibbs() -> Self {
        Self {
            name: "gibbs",
            f: |t| (0.5 * t).tan(),
            f_prime: |t| 0.5 / (0.5 * t).cos().powi(2),
            f_inverse: |x| 2.0 * x.atan(),
            inverse_bound: f64::INFINITY,
            f_prime_at_0: 0.5,
            f_third_at_0: 0.25,
        }
    }

    /// Value of `[f'(theta) - f(theta) cot(theta/2) / 2] / f(theta)^2` as theta -> 0.
    pub fn limit_coefficient(&self) -> f64 {
        let a = self.f_prime_at_0;
        (a / 12.0 + self.f_third_at_0 / 3.0) / (a * a)
    }

    /// `[f'(theta) - f(theta) cot(theta/2) / 2] / f(theta)^2`, the factor on
    /// the middle term of the generalized equation.
    pub fn coefficient(&self, theta: f64) -> f64 {
        if theta.abs() < 1e-6 {
            return self.limit_coefficient();
        }
        let fv = (self.f)(theta);
        let half = 0.5 * theta;
        ((self.f_prime)(theta) - 0.5 * fv * half.cos() / half.sin()) / (fv * fv)
    }

    /// Angle `theta >= 0` with `f(theta) = magnitude`.
    pub fn theta_of(&self, magnitude: f64) -> Result<f64> {
        if !(0.0..=self.inverse_bound).contains(&magnitude) {
            return Err(EslError::InvalidInput(format!(
                "|F| = {magnitude} outside the invertible range of {}",
                self.name
            )));
        }
        Ok((self.f_inverse)(magnitude))
    }

    /// Checks `f(0) = 0`, `f'(0) > 0` and oddness on a sample grid.
    pub fn validate(&self) -> Result<()> {
        if (self.f)(0.0) != 0.0 || self.f_prime_at_0 <= 0.0 {
            return Err(EslError::InvalidModel(format!("{}: f(0) != 0 or f'(0) <= 0", self.name)));
        }
        for k in 1..=50 {
            let x = 0.06 * k as f64;
            let (p, m) = ((self.f)(x), (self.f)(-x));
            if (p + m).abs() > 1e-12 * p.abs().max(1.0) {
                return Err(EslError::InvalidModel(format!("{}: f is not odd at {x}", self.name)));
            }
        }
        Ok(())
    }
}
