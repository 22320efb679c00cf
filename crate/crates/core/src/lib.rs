//! Rotation kinematics of the Euler axis and angle.
//!
//! * [`rotation`]: Rodrigues rotation and composition, parameterizations, conversions.
//! * [`omega`]: angular-velocity models.
//! * [`dynamics`]: ODE right-hand sides, RK4, continuation through `2 pi k`.
//! * [`closed_form`]: constant-axis spinor solution and piecewise-constant propagation.
//! * [`analysis`]: strobe sections, Lyapunov spectra, power spectra, recurrence matrices.
//! * [`io`]: CSV schemas.

pub mod analysis;
pub mod closed_form;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod omega;
pub mod quadrature;
pub mod rotation;
pub mod spline;
pub mod vec3;

pub use error::{EslError, Result, Singularity};
pub use omega::OmegaModel;
pub use rotation::{
    Attitude, AxisAngle, EulerVector, GibbsVector, ModifiedGibbs, Representation, RotationMatrix,
    UnitQuaternion,
};
pub use vec3::Vec3;
