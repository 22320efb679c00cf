//! ODE right-hand sides, the fixed-step RK4 integrator and continuation of
//! axis/angle through zeros of the quaternion vector part.

mod continuation;
mod integrate;
pub mod rhs;

pub use continuation::{
    continue_axis_angle, ContinuationRecord, PARITY_THRESHOLD, SAMPLE_AT_ZERO, ZERO_PREFILTER,
    ZERO_THRESHOLD,
};
pub use integrate::{
    integrate, integrate_with, rk4_step, sample_count, BoundaryPolicy, IntegrationOptions,
    GIBBS_OVERFLOW, HANDOFF_STEPS,
};
pub use rhs::{
    divergence_gibbs, euler_coefficient, rhs_axis_angle, rhs_euler_vector, rhs_generalized,
    rhs_gibbs, rhs_quaternion,
};

use serde::{Deserialize, Serialize};

use crate::error::{EslError, Result, Singularity};
use crate::omega::OmegaModel;
use crate::rotation::{Attitude, Representation, RotationMatrix, UnitQuaternion};
use crate::vec3::Vec3;

/// Where and why an integration stopped early.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbortInfo {
    pub cause: Singularity,
    pub time: f64,
}

/// Quaternion norm error measured before each renormalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NormDrift {
    pub max_step: f64,
    pub cumulative: f64,
}

/// Uniformly sampled states in one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub representation: Representation,
    pub omega: Option<OmegaModel>,
    pub t0: f64,
    pub dt: f64,
    states: Vec<f64>,
    pub abort: Option<AbortInfo>,
    pub continuation: Option<ContinuationRecord>,
    pub norm_drift: Option<NormDrift>,
}

impl Trajectory {
    pub fn new(representation: Representation, omega: Option<OmegaModel>, t0: f64, dt: f64) -> Self {
        Self {
            representation,
            omega,
            t0,
            dt,
            states: Vec::new(),
            abort: None,
            continuation: None,
            norm_drift: None,
        }
    }

    /// Builds a trajectory from flat row-major states.
    pub fn from_states(
        representation: Representation,
        omega: Option<OmegaModel>,
        t0: f64,
        dt: f64,
        states: Vec<f64>,
    ) -> Result<Self> {
        if states.len() % representation.width() != 0 {
            return Err(EslError::Schema(format!(
                "{} values do not divide into {representation} states",
                states.len()
            )));
        }
        let mut t = Self::new(representation, omega, t0, dt);
        t.states = states;
        Ok(t)
    }

    pub fn width(&self) -> usize {
        self.representation.width()
    }

    pub fn len(&self) -> usize {
        self.states.len() / self.width()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn push(&mut self, state: &[f64]) {
        debug_assert_eq!(state.len(), self.width());
        self.states.extend_from_slice(state);
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }

    pub fn end_time(&self) -> f64 {
        self.time(self.len().saturating_sub(1))
    }

    pub fn state(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.states[i * w..(i + 1) * w]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.states.chunks_exact(self.width())
    }

    pub fn flat_states(&self) -> &[f64] {
        &self.states
    }

    pub fn attitude(&self, i: usize) -> Result<Attitude> {
        Attitude::from_state(self.representation, self.state(i))
    }

    pub fn matrix(&self, i: usize) -> Result<RotationMatrix> {
        self.attitude(i)?.matrix()
    }

    /// First three state components as a vector (the Euler, Gibbs or modified
    /// Gibbs vector, the quaternion scalar and first two vector components, or the axis).
    pub fn vec3(&self, i: usize) -> Vec3 {
        Vec3::from_slice(self.state(i))
    }

    /// Rotation angle at each sample: `|E|` for Euler vectors, the continued
    /// `theta` for axis/angle, and the principal angle otherwise.
    pub fn angle_series(&self) -> Vec<f64> {
        self.states()
            .map(|s| match self.representation {
                Representation::Euler => Vec3::from_slice(s).norm(),
                Representation::AxisAngle => s[3],
                Representation::Gibbs => 2.0 * Vec3::from_slice(s).norm().atan(),
                Representation::ModifiedGibbs => 2.0 * Vec3::from_slice(s).norm().min(1.0).asin(),
                Representation::Quaternion => UnitQuaternion::from_slice(s).principal_angle(),
            })
            .collect()
    }

    /// Column `j` of the state.
    pub fn component(&self, j: usize) -> Vec<f64> {
        self.states().map(|s| s[j]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid() {
        let mut t = Trajectory::new(Representation::Euler, None, 1.0, 0.5);
        t.push(&[0.0, 0.0, 1.0]);
        t.push(&[0.0, 0.0, 2.0]);
        assert_eq!(t.len(), 2);
        assert_eq!(t.time(1), 1.5);
        assert_eq!(t.angle_series(), vec![1.0, 2.0]);
        assert!(Trajectory::from_states(Representation::Quaternion, None, 0.0, 1.0, vec![0.0; 6]).is_err());
    }
}
