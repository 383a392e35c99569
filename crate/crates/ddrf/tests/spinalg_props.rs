//! Unit and property tests for the dense complex-matrix kernel: spin-1/2
//! algebra, rotations, the closed-form 2x2 Hermitian exponential against an
//! independent Taylor-series oracle, tensor products, and the axis-angle
//! decomposition.

mod common;

use ddrf::spinalg::{
    axis_angle_of, expm_herm2, hermitian2, kron, kron_all, rot, spin_half_ops, CMatrix, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{expm_taylor, random_hermitian2};

const PI: f64 = std::f64::consts::PI;

fn approx(m: &CMatrix, reference: &CMatrix, tol: f64) {
    let d = m.distance(reference).expect("same shape");
    assert!(d <= tol, "distance {d:.3e} exceeds {tol:.1e}");
}

#[test]
fn spin_half_operators_satisfy_su2_algebra() {
    let (ix, iy, iz) = spin_half_ops();
    let half = C64::new(0.5, 0.0);
    let iz_ref = CMatrix::from_rows(&[
        &[half, C64::new(0.0, 0.0)],
        &[C64::new(0.0, 0.0), -half],
    ]);
    approx(&iz, &iz_ref, 1e-15);

    for op in [&ix, &iy, &iz] {
        assert!(op.hermiticity_defect() <= 1e-15);
        assert!(op.trace().norm() <= 1e-15);
        // op^2 = 1/4 with zero trace forces eigenvalues +-1/2.
        approx(
            &op.matmul(op).unwrap(),
            &CMatrix::identity(2).scale(C64::new(0.25, 0.0)),
            1e-15,
        );
    }

    let commutator = ix
        .matmul(&iy)
        .unwrap()
        .sub(&iy.matmul(&ix).unwrap())
        .unwrap();
    approx(&commutator, &iz.scale(C64::new(0.0, 1.0)), 1e-15);

    let casimir = ix
        .matmul(&ix)
        .unwrap()
        .add(&iy.matmul(&iy).unwrap())
        .unwrap()
        .add(&iz.matmul(&iz).unwrap())
        .unwrap();
    approx(&casimir, &CMatrix::identity(2).scale(C64::new(0.75, 0.0)), 1e-15);
}

#[test]
fn rot_special_angles() {
    approx(&rot([0.0, 0.0, 1.0], 0.0).unwrap(), &CMatrix::identity(2), 1e-15);
    approx(
        &rot([0.0, 0.0, 1.0], 2.0 * PI).unwrap(),
        &CMatrix::identity(2).scale(C64::new(-1.0, 0.0)),
        1e-12,
    );

    // rot(y, pi) takes |up> to |down> up to a global phase.
    let flipped = rot([0.0, 1.0, 0.0], PI)
        .unwrap()
        .mul_vec2([C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    assert!(flipped[0].norm() <= 1e-15);
    assert!((flipped[1].norm() - 1.0).abs() <= 1e-15);

    assert!(rot([0.0, 0.0, 0.9], 1.0).is_err(), "non-unit axis must be rejected");
}

#[test]
fn expm_special_generators() {
    let zero = CMatrix::zeros(2, 2);
    approx(&expm_herm2(&zero, 3.7).unwrap(), &CMatrix::identity(2), 1e-15);

    let omega = 2.0e5;
    let t = 1.3e-5;
    let (_, _, iz) = spin_half_ops();
    let u = expm_herm2(&iz.scale(C64::new(omega, 0.0)), t).unwrap();
    let expected = CMatrix::from_rows(&[
        &[C64::from_polar(1.0, -omega * t / 2.0), C64::new(0.0, 0.0)],
        &[C64::new(0.0, 0.0), C64::from_polar(1.0, omega * t / 2.0)],
    ]);
    approx(&u, &expected, 1e-12);

    let skew = CMatrix::from_rows(&[
        &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        &[C64::new(-1.0, 0.0), C64::new(0.0, 0.0)],
    ]);
    assert!(expm_herm2(&skew, 1.0).is_err(), "non-Hermitian input must be rejected");
}

#[test]
fn expm_matches_series_oracle_over_norm_bounded_draws() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let h = random_hermitian2(&mut rng, 1.0);
        // max_abs * 2 upper-bounds the spectral norm of a 2x2 matrix.
        let norm_bound = (h.max_abs() * 2.0).max(1e-6);
        let t = rng.gen_range(0.0..10.0) / norm_bound;
        let closed = expm_herm2(&h, t).unwrap();
        worst = worst
            .max(closed.distance(&expm_taylor(&h, t)).unwrap())
            .max(closed.unitarity_defect());
    }
    assert!(worst <= 1e-10, "worst closed-form vs series distance {worst:.3e}");
}

#[test]
fn axis_angle_examples_and_round_trip() {
    let aa = axis_angle_of(&rot([1.0, 0.0, 0.0], PI / 2.0).unwrap()).unwrap();
    assert!((aa.axis[0] - 1.0).abs() <= 1e-12);
    assert!(aa.axis[1].abs() <= 1e-12 && aa.axis[2].abs() <= 1e-12);
    assert!((aa.angle - PI / 2.0).abs() <= 1e-12);
    assert!(aa.phase.abs() <= 1e-12);

    // A z generator decomposes onto the z axis and matches the rot reference.
    let omega = 1.0e4;
    let t = 2.0e-4;
    let (_, _, iz) = spin_half_ops();
    let u = expm_herm2(&iz.scale(C64::new(omega, 0.0)), t).unwrap();
    let aa = axis_angle_of(&u).unwrap();
    assert!(aa.axis[2].abs() > 1.0 - 1e-12);
    approx(&aa.matrix(), &u, 1e-10);
    approx(
        &rot([0.0, 0.0, aa.axis[2]], aa.angle).unwrap(),
        &u.scale(C64::from_polar(1.0, -aa.phase)),
        1e-10,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let u = expm_herm2(&random_hermitian2(&mut rng, 3.0), 1.0).unwrap();
        let aa = axis_angle_of(&u).unwrap();
        let axis_norm =
            (aa.axis[0].powi(2) + aa.axis[1].powi(2) + aa.axis[2].powi(2)).sqrt();
        assert!((axis_norm - 1.0).abs() <= 1e-12);
        assert!((0.0..=PI + 1e-12).contains(&aa.angle));
        approx(&aa.matrix(), &u, 1e-10);
    }

    assert!(
        axis_angle_of(&CMatrix::identity(2).scale(C64::new(2.0, 0.0))).is_err(),
        "non-unitary input must be rejected"
    );
}

#[test]
fn kron_identities_and_mixed_product() {
    approx(
        &kron(&CMatrix::identity(2), &CMatrix::identity(2)),
        &CMatrix::identity(4),
        1e-15,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let a = random_hermitian2(&mut rng, 2.0);
        let b = random_hermitian2(&mut rng, 2.0);
        let c = random_hermitian2(&mut rng, 2.0);
        let d = random_hermitian2(&mut rng, 2.0);
        let lhs = kron(&a, &b).matmul(&kron(&c, &d)).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap());
        approx(&lhs, &rhs, 1e-12);

        // kron_all is kron folded left-to-right and dimension-multiplicative.
        let triple = kron_all(&[&a, &b, &c]);
        assert_eq!(triple.rows(), 8);
        approx(&triple, &kron(&kron(&a, &b), &c), 1e-13);
    }
}

#[test]
fn long_unitary_compositions_stay_unitary() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut product = CMatrix::identity(2);
    for step in 1..=100u32 {
        let theta = rng.gen_range(-PI..PI);
        let raw: [f64; 3] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let n = (raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2])
            .sqrt()
            .max(1e-3);
        let axis = [raw[0] / n, raw[1] / n, raw[2] / n];
        product = rot(axis, theta).unwrap().matmul(&product).unwrap();
        assert!(
            product.unitarity_defect() <= 1e-12 * step as f64,
            "defect {:.3e} after {step} compositions",
            product.unitarity_defect()
        );
    }
}

proptest! {
    #[test]
    fn dagger_is_an_involution(c0 in -5.0..5.0f64, cx in -5.0..5.0f64,
                               cy in -5.0..5.0f64, cz in -5.0..5.0f64) {
        let h = hermitian2(c0, cx, cy, cz);
        prop_assert!(h.dagger().dagger().distance(&h).unwrap() == 0.0);
        prop_assert!(h.hermiticity_defect() <= 1e-12);
    }

    #[test]
    fn product_dagger_reverses(a in prop::array::uniform4(-3.0..3.0f64),
                               b in prop::array::uniform4(-3.0..3.0f64)) {
        let ma = hermitian2(a[0], a[1], a[2], a[3]);
        let mb = hermitian2(b[0], b[1], b[2], b[3]);
        let lhs = ma.matmul(&mb).unwrap().dagger();
        let rhs = mb.dagger().matmul(&ma.dagger()).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn rot_composes_additively_on_a_fixed_axis(t1 in -6.0..6.0f64, t2 in -6.0..6.0f64) {
        let axis = [0.6, 0.0, 0.8];
        let lhs = rot(axis, t1).unwrap().matmul(&rot(axis, t2).unwrap()).unwrap();
        let rhs = rot(axis, t1 + t2).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn expm_tracks_series_oracle(a in prop::array::uniform4(-2.0..2.0f64),
                                 t in 0.0..3.0f64) {
        let h = hermitian2(a[0], a[1], a[2], a[3]);
        let closed = expm_herm2(&h, t).unwrap();
        prop_assert!(closed.distance(&expm_taylor(&h, t)).unwrap() <= 1e-10);
        prop_assert!(closed.unitarity_defect() <= 1e-12);
    }
}
