use std::f64::consts::{FRAC_PI_2, PI, TAU};

use esl_core::rotation::{
    compose_rotations, convert, gibbs_identity_residual, matrix_from_axis_angle, rotate_point,
};
use esl_core::{
    Attitude, AxisAngle, EslError, EulerVector, GibbsVector, ModifiedGibbs, Representation,
    RotationMatrix, UnitQuaternion, Vec3,
};
use proptest::prelude::*;

fn vec3(r: f64) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn unit() -> impl Strategy<Value = Vec3> {
    vec3(1.0).prop_filter_map("too short", |v| if v.norm() > 0.1 { v.try_normalize() } else { None })
}

fn rotation(max_angle: f64) -> impl Strategy<Value = AxisAngle> {
    (unit(), -max_angle..max_angle).prop_map(|(n, t)| AxisAngle::from_unit(n, t))
}

/// Axis/angle of a rotation matrix from its trace and skew part, for angles in (0, pi).
fn axis_angle_of(r: &RotationMatrix) -> (Vec3, f64) {
    let m = r.0;
    let trace = m[0][0] + m[1][1] + m[2][2];
    let skew = Vec3::new(m[2][1] - m[1][2], m[0][2] - m[2][0], m[1][0] - m[0][1]);
    let angle = (0.5 * skew.norm()).atan2(0.5 * (trace - 1.0));
    (skew / skew.norm(), angle)
}

#[test]
fn quarter_turn_about_z() {
    let r = rotate_point(Vec3::I, AxisAngle::from_unit(Vec3::K, FRAC_PI_2));
    assert!((r - Vec3::J).norm() < 1e-15);
    let m = matrix_from_axis_angle(AxisAngle::from_unit(Vec3::K, FRAC_PI_2));
    assert!((m.apply(Vec3::I) - Vec3::J).norm() < 1e-15);
    assert!(matrix_from_axis_angle(AxisAngle::from_unit(Vec3::J, 0.0)).frobenius_distance(&RotationMatrix::IDENTITY) == 0.0);
}

#[test]
fn full_turn_returns_the_point() {
    let r = Vec3::new(0.3, -1.2, 2.0);
    assert_eq!(rotate_point(r, AxisAngle::from_unit(Vec3::J, 0.0)), r);
    assert!((rotate_point(r, AxisAngle::from_unit(Vec3::J, TAU)) - r).norm() < 1e-14);
}

#[test]
fn same_axis_angles_add() {
    let q = AxisAngle::from_unit(Vec3::K, FRAC_PI_2);
    let c = compose_rotations(q, q);
    assert!(!c.identity_composition);
    assert!((c.rotation.axis - Vec3::K).norm() < 1e-15);
    assert!((c.rotation.theta - PI).abs() < 1e-15);
}

#[test]
fn inverse_composition_is_flagged() {
    let q = AxisAngle::from_unit(Vec3::new(0.6, 0.0, 0.8), 1.3);
    let c = compose_rotations(q, AxisAngle::from_unit(q.axis, -1.3));
    assert!(c.identity_composition);
    assert_eq!(c.rotation.axis, Vec3::K);
    assert_eq!(c.rotation.theta, 0.0);
    let twice_around = compose_rotations(AxisAngle::from_unit(Vec3::I, PI), AxisAngle::from_unit(Vec3::I, PI));
    assert!(twice_around.identity_composition && twice_around.negated);
}

#[test]
fn composition_reproduces_spinor_angle() {
    // (i, pi/2) followed by (k, t): cos(theta/2) = cos(t/2)/sqrt(2)
    for k in 0..50 {
        let t = 0.2 * k as f64;
        let c = compose_rotations(AxisAngle::from_unit(Vec3::I, FRAC_PI_2), AxisAngle::from_unit(Vec3::K, t));
        let want = (0.5 * t).cos() / 2f64.sqrt();
        assert!(((0.5 * c.rotation.theta).cos() - want).abs() < 1e-14, "t = {t}");
        assert_eq!(c.negated, false);
    }
}

#[test]
fn euler_to_others_by_definition() {
    let a = Attitude::AxisAngle(AxisAngle::from_unit(Vec3::I, FRAC_PI_2));
    let Attitude::Euler(EulerVector(e)) = convert(a, Representation::Euler, None).unwrap() else { panic!() };
    assert_eq!(e, Vec3::new(FRAC_PI_2, 0.0, 0.0));
    let Attitude::ModifiedGibbs(ModifiedGibbs(m)) = convert(a, Representation::ModifiedGibbs, None).unwrap() else {
        panic!()
    };
    assert!((m - Vec3::new((PI / 4.0).sin(), 0.0, 0.0)).norm() < 1e-16);
    let Attitude::Quaternion(q) = convert(a, Representation::Quaternion, None).unwrap() else { panic!() };
    assert!((q.m0 - (PI / 4.0).cos()).abs() < 1e-16);
}

#[test]
fn restart_form_flips_the_axis() {
    let e = EulerVector(Vec3::new(0.0, 0.6, 0.8) * (1.5 * PI));
    let r = e.restart_form();
    assert!((r.0 + e.0 / 3.0).norm() < 1e-15);
    let ma = Attitude::Euler(e).matrix().unwrap();
    let mb = Attitude::Euler(r).matrix().unwrap();
    assert!(ma.frobenius_distance(&mb) < 1e-14);
}

#[test]
fn gibbs_singular_near_half_turn() {
    for theta in [PI, PI + 5e-10, 3.0 * PI - 1e-10, -PI] {
        let a = Attitude::AxisAngle(AxisAngle::from_unit(Vec3::J, theta));
        assert!(matches!(convert(a, Representation::Gibbs, None), Err(EslError::GibbsSingularity { .. })), "{theta}");
    }
    let ok = Attitude::AxisAngle(AxisAngle::from_unit(Vec3::J, PI - 1e-6));
    assert!(convert(ok, Representation::Gibbs, None).is_ok());
}

#[test]
fn axis_undefined_at_identity() {
    for att in [
        Attitude::Euler(EulerVector(Vec3::ZERO)),
        Attitude::Gibbs(GibbsVector(Vec3::ZERO)),
        Attitude::Quaternion(UnitQuaternion::IDENTITY),
        Attitude::ModifiedGibbs(ModifiedGibbs(Vec3::ZERO)),
    ] {
        assert!(matches!(convert(att, Representation::AxisAngle, None), Err(EslError::AxisUndefined)), "{att:?}");
    }
}

#[test]
fn gibbs_identity_on_random_quadruples() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let mut v = || Vec3::new(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let (a, b, c, d) = (v(), v(), v(), v());
        let scale = a.norm() * b.norm() * c.norm() * d.norm();
        worst = worst.max(gibbs_identity_residual(a, b, c, d).norm() / scale);
    }
    assert!(worst <= 1e-11, "{worst}");
    let a = Vec3::new(0.4, 1.1, -0.3);
    assert_eq!(gibbs_identity_residual(a, a, Vec3::J, Vec3::K).norm(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rotation_preserves_norm(r in vec3(10.0), rot in rotation(20.0)) {
        prop_assert!((rotate_point(r, rot).norm() - r.norm()).abs() <= 1e-12 * r.norm().max(1.0));
    }

    #[test]
    fn rodrigues_matches_matrix(r in vec3(5.0), rot in rotation(20.0)) {
        let m = matrix_from_axis_angle(rot);
        prop_assert!((m.apply(r) - rotate_point(r, rot)).norm() <= 1e-12 * r.norm().max(1.0));
        prop_assert!(m.orthogonality_error() <= 1e-12);
        prop_assert!((m.determinant() - 1.0).abs() <= 1e-12);
        for e in [Vec3::I, Vec3::J, Vec3::K] {
            prop_assert!((m.apply(e) - rotate_point(e, rot)).norm() <= 1e-12);
        }
    }

    #[test]
    fn composition_equals_sequential_rotation(r in vec3(5.0), a in rotation(10.0), b in rotation(10.0)) {
        let c = compose_rotations(a, b);
        let direct = rotate_point(rotate_point(r, a), b);
        prop_assert!((rotate_point(r, c.rotation) - direct).norm() <= 1e-10 * r.norm().max(1.0));
        prop_assert!((0.0..TAU).contains(&c.rotation.theta));
        prop_assert!((c.rotation.axis.norm() - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn composition_matches_matrix_product(a in rotation(10.0), b in rotation(10.0)) {
        let c = compose_rotations(a, b);
        let product = b.matrix() * a.matrix();
        let (axis, angle) = axis_angle_of(&product);
        prop_assume!(angle > 1e-3 && angle < PI - 1e-3);
        // the composed angle lies in [0, 2 pi); above pi it describes the same rotation about -axis
        let (n, t) = if c.rotation.theta > PI {
            (-c.rotation.axis, TAU - c.rotation.theta)
        } else {
            (c.rotation.axis, c.rotation.theta)
        };
        prop_assert!((t - angle).abs() <= 1e-10);
        prop_assert!((n - axis).norm() <= 1e-10 / angle.sin().min(1.0).max(1e-3));
    }

    #[test]
    fn quaternion_double_cover(rot in rotation(20.0)) {
        let q = rot.quaternion();
        prop_assert!(q.matrix().frobenius_distance(&(-q).matrix()) <= 1e-12);
        prop_assert!(q.matrix().frobenius_distance(&rot.matrix()) <= 1e-12);
    }

    #[test]
    fn euler_round_trip(n in unit(), theta in 1e-6..40.0f64) {
        let a = Attitude::AxisAngle(AxisAngle::from_unit(n, theta));
        let e = convert(a, Representation::Euler, None).unwrap();
        let Attitude::AxisAngle(back) = convert(e, Representation::AxisAngle, None).unwrap() else { unreachable!() };
        prop_assert!((back.theta - theta).abs() <= 1e-12 * theta.max(1.0));
        prop_assert!((back.axis - n).norm() <= 1e-12);
    }

    #[test]
    fn quaternion_round_trip_on_branch(n in unit(), l in -3i64..4, frac in 1e-4..(1.0 - 1e-4)) {
        let theta = TAU * (l as f64 + frac);
        let a = Attitude::AxisAngle(AxisAngle::from_unit(n, theta));
        for rep in [Representation::Quaternion, Representation::ModifiedGibbs] {
            let x = convert(a, rep, None).unwrap();
            let Attitude::AxisAngle(back) = convert(x, Representation::AxisAngle, Some(l)).unwrap() else { unreachable!() };
            // M carries no sign for m0; it pins down theta only where cos(theta/2) > 0
            if rep == Representation::Quaternion || (0.5 * theta).cos() > 1e-3 {
                prop_assert!((back.theta - theta).abs() <= 1e-11 * theta.abs().max(1.0), "{} vs {}", back.theta, theta);
                prop_assert!((back.axis - n).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn modified_gibbs_round_trip_principal(n in unit(), theta in 1e-3..(PI - 1e-3)) {
        let a = Attitude::AxisAngle(AxisAngle::from_unit(n, theta));
        let m = convert(a, Representation::ModifiedGibbs, None).unwrap();
        let Attitude::AxisAngle(back) = convert(m, Representation::AxisAngle, None).unwrap() else { unreachable!() };
        prop_assert!((back.theta - theta).abs() <= 1e-12);
        prop_assert!((back.axis - n).norm() <= 1e-12);
    }

    #[test]
    fn gibbs_round_trip(n in unit(), theta in -(PI - 1e-3)..(PI - 1e-3)) {
        prop_assume!(theta.abs() > 1e-9);
        let a = Attitude::AxisAngle(AxisAngle::from_unit(n, theta));
        let g = convert(a, Representation::Gibbs, None).unwrap();
        let Attitude::AxisAngle(back) = convert(g, Representation::AxisAngle, None).unwrap() else { unreachable!() };
        // extraction picks theta >= 0
        let (bn, bt) = if theta < 0.0 { (-back.axis, -back.theta) } else { (back.axis, back.theta) };
        prop_assert!((bt - theta).abs() <= 1e-12);
        prop_assert!((bn - n).norm() <= 1e-12);
    }

    #[test]
    fn all_representations_share_the_matrix(rot in rotation(PI - 0.01)) {
        prop_assume!(rot.theta.abs() > 1e-6);
        let a = Attitude::AxisAngle(rot);
        let m = rot.matrix();
        for rep in [Representation::Euler, Representation::Quaternion, Representation::ModifiedGibbs, Representation::Gibbs] {
            let x = convert(a, rep, None).unwrap();
            prop_assert!(x.matrix().unwrap().frobenius_distance(&m) <= 1e-12);
        }
    }
}
