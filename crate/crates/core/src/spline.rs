//! Natural cubic spline through vector-valued samples.

use crate::vec3::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    times: Vec<f64>,
    values: Vec<Vec3>,
    /// Second derivatives at the knots.
    curvature: Vec<Vec3>,
}

impl CubicSpline {
    /// Caller guarantees at least two knots with strictly increasing times.
    pub fn natural(times: Vec<f64>, values: Vec<Vec3>) -> Self {
        let n = times.len();
        assert!(n >= 2 && values.len() == n);
        let mut curvature = vec![Vec3::ZERO; n];
        if n > 2 {
            // Thomas algorithm on the interior equations
            let mut diag = vec![0.0; n];
            let mut rhs = vec![Vec3::ZERO; n];
            let mut upper = vec![0.0; n];
            for i in 1..n - 1 {
                let h0 = times[i] - times[i - 1];
                let h1 = times[i + 1] - times[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = ((values[i + 1] - values[i]) / h1 - (values[i] - values[i - 1]) / h0) * 6.0;
                if i > 1 {
                    let w = h0 / diag[i - 1];
                    diag[i] -= w * upper[i - 1];
                    rhs[i] = rhs[i] - rhs[i - 1] * w;
                }
            }
            for i in (1..n - 1).rev() {
                let next = if i + 1 < n - 1 { curvature[i + 1] * upper[i] } else { Vec3::ZERO };
                curvature[i] = (rhs[i] - next) / diag[i];
            }
        }
        Self { times, values, curvature }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.times.len();
        match self.times.partition_point(|&x| x <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Value and derivatives of orders `0..=max_order` at `t` (orders above 3 are zero).
    pub fn derivatives(&self, t: f64, max_order: usize) -> Vec<Vec3> {
        let i = self.segment(t);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (c0, c1) = (self.curvature[i], self.curvature[i + 1]);
        let a = t1 - t;
        let b = t - t0;
        let mut out = Vec::with_capacity(max_order + 1);
        for order in 0..=max_order {
            out.push(match order {
                0 => {
                    c0 * (a * a * a / (6.0 * h))
                        + c1 * (b * b * b / (6.0 * h))
                        + (y0 / h - c0 * (h / 6.0)) * a
                        + (y1 / h - c1 * (h / 6.0)) * b
                }
                1 => {
                    c1 * (b * b / (2.0 * h)) - c0 * (a * a / (2.0 * h)) + (y1 - y0) / h
                        - (c1 - c0) * (h / 6.0)
                }
                2 => c0 * (a / h) + c1 * (b / h),
                3 => (c1 - c0) / h,
                _ => Vec3::ZERO,
            });
        }
        out
    }

    pub fn eval(&self, t: f64) -> Vec3 {
        self.derivatives(t, 0)[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_knots_and_lines() {
        let times: Vec<f64> = (0..6).map(|k| k as f64 * 0.5).collect();
        let values: Vec<Vec3> = times.iter().map(|&t| Vec3::new(2.0 * t, -t, 1.0)).collect();
        let s = CubicSpline::natural(times.clone(), values.clone());
        for (t, v) in times.iter().zip(&values) {
            assert!((s.eval(*t) - *v).norm() < 1e-14);
        }
        let d = s.derivatives(1.3, 2);
        assert!((d[1] - Vec3::new(2.0, -1.0, 0.0)).norm() < 1e-13);
        assert!(d[2].norm() < 1e-13);
    }

    #[test]
    fn dense_sine() {
        let times: Vec<f64> = (0..=400).map(|k| k as f64 * 0.01).collect();
        let values: Vec<Vec3> = times.iter().map(|&t| Vec3::new(t.sin(), t.cos(), 0.0)).collect();
        let s = CubicSpline::natural(times, values);
        for k in 20..380 {
            let t = k as f64 * 0.01 + 0.0037;
            assert!((s.eval(t) - Vec3::new(t.sin(), t.cos(), 0.0)).norm() < 1e-8);
        }
    }
}
