use std::f64::consts::{PI, TAU};

use esl_core::closed_form::{spinor_euler, spinor_params};
use esl_core::dynamics::{
    divergence_gibbs, integrate, rhs_axis_angle, rhs_euler_vector, rhs_generalized, rhs_gibbs,
    rhs_quaternion,
};
use esl_core::dynamics::rhs::BOUNDARY_GUARD;
use esl_core::rotation::{compose_rotations, GeneralizedRep};
use esl_core::{Attitude, AxisAngle, EslError, EulerVector, OmegaModel, Representation, UnitQuaternion, Vec3};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter_map("too short", |v| if v.norm() > 0.1 { v.try_normalize() } else { None })
}

/// Euler vector of `Rot(E)` followed by `Rot(omega h)`, on the branch `|E| in (0, 2 pi)`.
fn composed(e: Vec3, omega: Vec3, h: f64) -> Vec3 {
    let theta = e.norm();
    let step = omega * h;
    let c = compose_rotations(
        AxisAngle::from_unit(e / theta, theta),
        AxisAngle::from_unit(step / step.norm(), step.norm()),
    );
    c.rotation.axis * c.rotation.theta
}

/// Derivative of `G(E) = E tan(|E|/2)/|E|` along `de`.
fn gibbs_pushforward(e: Vec3, de: Vec3) -> Vec3 {
    let theta = e.norm();
    let (s, c) = (0.5 * theta).sin_cos();
    let phi = s / c / theta;
    let dphi = (0.5 * theta / (c * c) - s / c) / (theta * theta);
    de * phi + e * (dphi * e.dot(de) / theta)
}

#[test]
fn boundary_is_guarded() {
    for k in 1..4 {
        let e = Vec3::new(0.0, 0.6, 0.8) * (TAU * k as f64 + 0.5 * BOUNDARY_GUARD);
        assert!(matches!(rhs_euler_vector(e, Vec3::I), Err(EslError::BoundarySingularity { .. })));
    }
    let near = Vec3::K * (TAU + 1e-6);
    assert!(rhs_euler_vector(near, Vec3::I).is_ok());
    assert!(matches!(rhs_axis_angle(Vec3::K, TAU, Vec3::I), Err(EslError::BoundarySingularity { .. })));
    assert!(matches!(rhs_axis_angle(Vec3::K, 0.0, Vec3::I), Err(EslError::BoundarySingularity { .. })));
}

#[test]
fn quaternion_examples() {
    let d = rhs_quaternion(UnitQuaternion::IDENTITY, Vec3::K);
    assert_eq!(d.m0, 0.0);
    assert_eq!(d.m, Vec3::new(0.0, 0.0, 0.5));
    let q = UnitQuaternion::new(0.6, Vec3::new(0.0, 0.8, 0.0));
    assert_eq!(rhs_quaternion(q, Vec3::ZERO).to_array(), [0.0; 4]);
}

#[test]
fn gibbs_examples() {
    let w = Vec3::new(0.2, -1.0, 0.4);
    assert_eq!(rhs_gibbs(Vec3::ZERO, w), w * 0.5);
    assert_eq!(divergence_gibbs(Vec3::I, Vec3::I), 2.0);
    assert_eq!(divergence_gibbs(Vec3::J, Vec3::I), 0.0);
}

#[test]
fn axis_angle_special_directions() {
    let (dn, dth) = rhs_axis_angle(Vec3::K, 1.0, Vec3::K * 2.0).unwrap();
    assert!(dn.norm() < 1e-16);
    assert_eq!(dth, 2.0);
    let (_, dth) = rhs_axis_angle(Vec3::K, 1.0, Vec3::I).unwrap();
    assert_eq!(dth, 0.0);
}

#[test]
fn generalized_at_origin() {
    let w = Vec3::new(1.0, 2.0, -0.5);
    for rep in [GeneralizedRep::euler(), GeneralizedRep::modified_gibbs(), GeneralizedRep::gibbs()] {
        rep.validate().unwrap();
        let d = rhs_generalized(Vec3::ZERO, w, &rep, 0.0).unwrap();
        assert!((d - w * rep.f_prime_at_0).norm() < 1e-15, "{rep:?}");
    }
}

#[test]
fn generalized_limit_matches_closed_form_coefficient() {
    for rep in [GeneralizedRep::euler(), GeneralizedRep::modified_gibbs(), GeneralizedRep::gibbs()] {
        let near = rep.coefficient(1e-3);
        assert!((near - rep.limit_coefficient()).abs() < 1e-6, "{rep:?}: {near} vs {}", rep.limit_coefficient());
    }
    assert!((GeneralizedRep::euler().limit_coefficient() - 1.0 / 12.0).abs() < 1e-16);
    assert_eq!(GeneralizedRep::modified_gibbs().limit_coefficient(), 0.0);
    assert!((GeneralizedRep::gibbs().limit_coefficient() - 0.5).abs() < 1e-16);
}

#[test]
fn time_rescaling_matches_unit_speed_solution() {
    // omega = s(t) k with s = 1 + t/2; the unit-speed solution evaluated at tau = t + t^2/4
    let omega = OmegaModel::Polynomial { coeffs: vec![Vec3::K, Vec3::K * 0.5] };
    let e0 = Vec3::new(PI / 2.0, 0.0, 0.0);
    let tr = integrate(Representation::Euler, Attitude::Euler(EulerVector(e0)), &omega, 0.0, 3.0, 1e-3).unwrap();
    let sol = spinor_params(Vec3::I, PI / 2.0, Vec3::K).unwrap();
    let mut worst = 0.0f64;
    for (i, t) in tr.times().enumerate() {
        let tau = omega.arc_time(0.0, t).unwrap();
        assert!((tau - (t + 0.25 * t * t)).abs() < 1e-10);
        worst = worst.max((tr.vec3(i) - spinor_euler(&sol, tau)).norm());
    }
    assert!(worst < 1e-6, "{worst}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn euler_rhs_matches_composed_rotation(n in unit(), theta in 0.05..(TAU - 0.05), w in vec3(2.0)) {
        prop_assume!(w.norm() > 0.1);
        let e = n * theta;
        let h = 1e-5;
        let fd = (composed(e, w, h) - composed(e, w, -h)) / (2.0 * h);
        let rhs = rhs_euler_vector(e, w).unwrap();
        // central difference: the O(h^2) term grows like (2 pi - theta)^-2 near the boundary
        let tol = 1e-8 * (1.0 + rhs.norm()) / (TAU - theta).min(1.0).powi(2);
        prop_assert!((fd - rhs).norm() <= tol, "{} vs {}", fd, rhs);
    }

    #[test]
    fn euler_rhs_small_angles(n in unit(), theta in 1e-6..0.05f64, w in vec3(2.0)) {
        prop_assume!(w.norm() > 0.1);
        let e = n * theta;
        let h = 1e-4 * theta.max(1e-3);
        let fd = (composed(e, w, h) - composed(e, w, -h)) / (2.0 * h);
        let rhs = rhs_euler_vector(e, w).unwrap();
        prop_assert!((fd - rhs).norm() <= 1e-6 * w.norm());
    }

    #[test]
    fn generalized_euler_specializes(e in vec3(6.0), w in vec3(2.0)) {
        let theta = e.norm();
        let a = rhs_euler_vector(e, w).unwrap();
        let b = rhs_generalized(e, w, &GeneralizedRep::euler(), theta).unwrap();
        prop_assert!((a - b).norm() <= 1e-12 * (1.0 + w.norm() * theta * theta));
    }

    #[test]
    fn modified_gibbs_has_no_middle_term(n in unit(), theta in 1e-3..(PI - 1e-3), w in vec3(2.0)) {
        let rep = GeneralizedRep::modified_gibbs();
        let m = n * (0.5 * theta).sin();
        let d = rhs_generalized(m, w, &rep, theta).unwrap();
        let outer = w * (0.5 * (0.5 * theta).cos()) + w.cross(m) * 0.5;
        prop_assert!((d - outer).norm() <= 1e-12);
        // and agrees with the vector part of the quaternion equation
        let q = rhs_quaternion(UnitQuaternion::new((0.5 * theta).cos(), m), w);
        prop_assert!((d - q.m).norm() <= 1e-12);
    }

    #[test]
    fn generalized_gibbs_matches_gibbs_equation(n in unit(), theta in 1e-3..(PI - 0.1), w in vec3(2.0)) {
        let g = n * (0.5 * theta).tan();
        let d = rhs_generalized(g, w, &GeneralizedRep::gibbs(), theta).unwrap();
        prop_assert!((d - rhs_gibbs(g, w)).norm() <= 1e-10 * (1.0 + g.norm_squared()));
    }

    #[test]
    fn quaternion_rhs_is_tangent(q in (-1.0..1.0f64, vec3(1.0)), w in vec3(3.0)) {
        let q = UnitQuaternion::new(q.0, q.1).normalized();
        prop_assume!(q.norm().is_finite());
        let d = rhs_quaternion(q, w);
        prop_assert!(q.dot(d).abs() <= 1e-15 * (1.0 + w.norm()));
    }

    #[test]
    fn axis_rhs_is_tangent(n in unit(), theta in -20.0..20.0f64, w in vec3(3.0)) {
        prop_assume!((0.5 * theta).sin().abs() > 1e-3);
        let (dn, _) = rhs_axis_angle(n, theta, w).unwrap();
        prop_assert!(n.dot(dn).abs() <= 1e-14 * (1.0 + dn.norm()));
    }

    #[test]
    fn axis_rhs_consistent_with_euler_rhs(n in unit(), theta in 0.05..(TAU - 0.05), w in vec3(2.0)) {
        // d(n theta)/dt = n' theta + n theta'
        let (dn, dth) = rhs_axis_angle(n, theta, w).unwrap();
        let e = rhs_euler_vector(n * theta, w).unwrap();
        prop_assert!((dn * theta + n * dth - e).norm() <= 1e-12 * (1.0 + w.norm() / (0.5 * theta).sin()));
    }

    #[test]
    fn gibbs_rhs_is_chain_rule_of_euler_rhs(n in unit(), theta in 0.01..(PI - 0.1), w in vec3(2.0)) {
        let e = n * theta;
        let de = rhs_euler_vector(e, w).unwrap();
        let push = gibbs_pushforward(e, de);
        let g = n * (0.5 * theta).tan();
        prop_assert!((push - rhs_gibbs(g, w)).norm() <= 1e-8 * (1.0 + g.norm_squared()));
    }

    #[test]
    fn gibbs_divergence_matches_fd(g in vec3(5.0), w in vec3(3.0)) {
        let h = 1e-5;
        let mut div = 0.0;
        for e in [Vec3::I, Vec3::J, Vec3::K] {
            div += (rhs_gibbs(g + e * h, w) - rhs_gibbs(g - e * h, w)).dot(e) / (2.0 * h);
        }
        prop_assert!((div - divergence_gibbs(g, w)).abs() <= 1e-6);
    }
}
