//! Rotation-matrix ODE `R' = [w]x R` integrated directly with RK4. Shares
//! nothing with the attitude integrators except the angular-velocity model.

use esl_core::{OmegaModel, Result};

pub type Mat3 = [[f64; 3]; 3];

fn skew(w: [f64; 3]) -> Mat3 {
    [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
}

fn mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// `a + s b`
fn axpy(a: &Mat3, s: f64, b: &Mat3) -> Mat3 {
    let mut c = *a;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] += s * b[i][j];
        }
    }
    c
}

/// Rotation by `angle` about the unit vector `axis`.
pub fn rodrigues(axis: [f64; 3], angle: f64) -> Mat3 {
    let k = skew(axis);
    let k2 = mul(&k, &k);
    let eye = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    axpy(&axpy(&eye, angle.sin(), &k), 1.0 - angle.cos(), &k2)
}

pub fn frobenius(a: &Mat3, b: &Mat3) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// States at `t0 + k dt` for `k = 0..=steps`.
pub fn integrate_matrix(omega: &OmegaModel, r0: Mat3, t0: f64, dt: f64, steps: usize) -> Result<Vec<Mat3>> {
    let field = |t: f64, r: &Mat3| -> Result<Mat3> {
        let w = omega.eval(t)?;
        Ok(mul(&skew([w.x, w.y, w.z]), r))
    };
    let mut out = Vec::with_capacity(steps + 1);
    let mut r = r0;
    out.push(r);
    for k in 0..steps {
        let t = t0 + k as f64 * dt;
        let k1 = field(t, &r)?;
        let k2 = field(t + 0.5 * dt, &axpy(&r, 0.5 * dt, &k1))?;
        let k3 = field(t + 0.5 * dt, &axpy(&r, 0.5 * dt, &k2))?;
        let k4 = field(t + dt, &axpy(&r, dt, &k3))?;
        let sum = axpy(&axpy(&axpy(&k1, 2.0, &k2), 2.0, &k3), 1.0, &k4);
        r = axpy(&r, dt / 6.0, &sum);
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use esl_core::Vec3;

    #[test]
    fn constant_spin_matches_rodrigues() {
        let omega = OmegaModel::constant(Vec3::K * 2.0);
        let rs = integrate_matrix(&omega, rodrigues([1.0, 0.0, 0.0], 0.0), 0.0, 1e-3, 1000).unwrap();
        assert!(frobenius(&rs[1000], &rodrigues([0.0, 0.0, 1.0], 2.0)) < 1e-12);
    }
}
