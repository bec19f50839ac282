//! Channel-level invariants of the two depolarizer schemes, and coherence of
//! the four process representations on randomly generated channels.

use nalgebra::{Matrix2, SMatrix};
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha12Rng;

use depol::optics::ChannelScheme;
use depol::process::{process_fidelity, ChiMatrix, KrausSet};
use depol::qstate::{DensityMatrix, StokesVector};

fn standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Box-Muller.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ginibre<const R: usize, const C: usize>(rng: &mut ChaCha12Rng) -> SMatrix<C64, R, C> {
    SMatrix::from_fn(|_, _| C64::new(standard_normal(rng), standard_normal(rng)))
}

/// A Haar-ish random trace-preserving channel with four Kraus operators,
/// from the QR of a complex Ginibre 8x2 block.
fn random_tp_kraus(rng: &mut ChaCha12Rng) -> KrausSet {
    let g: SMatrix<C64, 8, 2> = ginibre(rng);
    let q = g.qr().q();
    let ops = (0..4)
        .map(|j| Matrix2::from_fn(|r, c| q[(2 * j + r, c)]))
        .collect();
    KrausSet::new(ops).expect("isometry blocks resolve the identity")
}

fn random_unitary(rng: &mut ChaCha12Rng) -> Matrix2<C64> {
    let g: SMatrix<C64, 2, 2> = ginibre(rng);
    g.qr().q()
}

fn random_density(rng: &mut ChaCha12Rng) -> DensityMatrix {
    let g: SMatrix<C64, 2, 2> = ginibre(rng);
    let m = g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / C64::new(tr, 0.0)).expect("Wishart matrices are states")
}

fn sample_angles(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| rng.random::<f64>() * std::f64::consts::PI)
        .collect()
}

fn both_schemes(angle: f64) -> [ChannelScheme; 2] {
    [
        ChannelScheme::scheme_i(angle),
        ChannelScheme::scheme_ii(angle),
    ]
}

#[test]
fn trace_preservation_and_unitality_on_random_angles() {
    for angle in sample_angles(200, 1) {
        for scheme in both_schemes(angle) {
            let kraus = scheme.kraus();
            let sum_kdk: Matrix2<C64> = kraus
                .operators()
                .iter()
                .map(|k| k.adjoint() * k)
                .sum();
            assert!(
                (sum_kdk - Matrix2::identity()).norm() < 1e-10,
                "{scheme:?} not TP"
            );
            let sum_kkd: Matrix2<C64> = kraus
                .operators()
                .iter()
                .map(|k| k * k.adjoint())
                .sum();
            assert!(
                (sum_kkd - Matrix2::identity()).norm() < 1e-10,
                "{scheme:?} not unital"
            );
        }
    }
}

#[test]
fn at_most_three_temporal_modes_populated() {
    for angle in sample_angles(100, 2) {
        for scheme in both_schemes(angle) {
            assert!(scheme.kraus().nonzero_count() <= 3);
        }
    }
}

#[test]
fn scheme_i_is_pi_periodic_in_bloch_action() {
    for angle in sample_angles(40, 3) {
        let a = ChannelScheme::scheme_i(angle).chi().to_ptm();
        let b = ChannelScheme::scheme_i(angle + std::f64::consts::PI)
            .chi()
            .to_ptm();
        assert!((a.matrix() - b.matrix()).norm() < 1e-10);
    }
}

#[test]
fn isotropic_point_shrinks_every_pure_state_to_one_third() {
    // At θ = atan(√2) the Bloch map is 1/3 of an orthogonal map, so every
    // pure input leaves with degree of polarization exactly 1/3.
    let kraus = ChannelScheme::scheme_i(2f64.sqrt().atan()).kraus();
    let mut rng = ChaCha12Rng::seed_from_u64(8);
    for _ in 0..50 {
        let (z, phi) = (rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * std::f64::consts::TAU);
        let r = (1.0 - z * z).sqrt();
        let s = StokesVector::new(r * phi.cos(), r * phi.sin(), z);
        let out = kraus.apply(&s.to_density().unwrap());
        let d = out.to_stokes().degree_of_polarization();
        assert!((d - 1.0 / 3.0).abs() <= 1e-9, "D = {d}");
    }
}

#[test]
fn identity_calibration_at_zero_angle() {
    for scheme in both_schemes(0.0) {
        let f = process_fidelity(&scheme.chi(), &ChiMatrix::identity()).unwrap();
        assert!(f >= 1.0 - 1e-10, "{scheme:?}: F = {f}");
    }
}

#[test]
fn spectrum_structure_zero_eigenvalue_and_degenerate_pair() {
    // Three eigenvalues participate and two of them are equal at any angle;
    // the degenerate pair always contains the second-largest.
    for angle in sample_angles(150, 4) {
        for scheme in both_schemes(angle) {
            let eigs = scheme.chi().eigenvalues();
            assert!(eigs[3].abs() <= 1e-9, "{scheme:?}: {eigs:?}");
            let pair_gap = (eigs[0] - eigs[1]).min(eigs[1] - eigs[2]);
            assert!(pair_gap <= 1e-9, "{scheme:?}: {eigs:?}");
        }
    }
}

#[test]
fn chi_eigenvalues_invariant_under_unitary_rotations() {
    let mut rng = ChaCha12Rng::seed_from_u64(5);
    for _ in 0..50 {
        let kraus = random_tp_kraus(&mut rng);
        let pre = random_unitary(&mut rng);
        let post = random_unitary(&mut rng);
        let rotated = KrausSet::new(
            kraus
                .operators()
                .iter()
                .map(|k| post * k * pre)
                .collect(),
        )
        .unwrap();
        let a = kraus.to_chi().eigenvalues();
        let b = rotated.to_chi().eigenvalues();
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-10, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn representation_round_trips_and_action_agreement() {
    let mut rng = ChaCha12Rng::seed_from_u64(6);
    for _ in 0..200 {
        let kraus = random_tp_kraus(&mut rng);
        let chi = kraus.to_chi();

        let via_ptm = chi.to_ptm().to_chi();
        assert!((via_ptm.matrix() - chi.matrix()).norm() < 1e-10);
        let via_choi = chi.to_choi().to_chi();
        assert!((via_choi.matrix() - chi.matrix()).norm() < 1e-10);

        for _ in 0..20 {
            let rho = random_density(&mut rng);
            let from_kraus = kraus.apply(&rho);
            let from_chi = chi.apply(&rho).unwrap();
            assert!((from_kraus.matrix() - from_chi.matrix()).norm() < 1e-10);

            // Transfer-matrix action on the Stokes side.
            let s = rho.to_stokes();
            let mapped = chi.bloch_map().apply(&s);
            let direct = from_kraus.to_stokes();
            assert!((mapped.as_vector() - direct.as_vector()).norm() < 1e-10);
        }
    }
}

#[test]
fn process_fidelity_bounds_on_random_pairs() {
    let mut rng = ChaCha12Rng::seed_from_u64(7);
    for _ in 0..500 {
        let a = random_tp_kraus(&mut rng).to_chi();
        let b = random_tp_kraus(&mut rng).to_chi();
        let f = process_fidelity(&a, &b).unwrap();
        assert!((0.0..=1.0).contains(&f), "F = {f}");
        assert!(f < 1.0 - 1e-9, "distinct random channels with F = {f}");
        assert!((process_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn stokes_density_round_trip(
        s1 in -1.0f64..1.0,
        s2 in -1.0f64..1.0,
        s3 in -1.0f64..1.0,
    ) {
        let v = nalgebra::Vector3::new(s1, s2, s3);
        let v = if v.norm() > 1.0 { v / v.norm() } else { v };
        let s = StokesVector::from_vector(v);
        let rho = s.to_density().unwrap();
        let back = rho.to_stokes();
        prop_assert!((back.as_vector() - s.as_vector()).amax() < 1e-12);
        prop_assert!(rho.eigenvalues()[1] >= -1e-10);
    }

    #[test]
    fn channel_outputs_stay_inside_the_ball(angle in 0.0f64..std::f64::consts::PI, s1 in -1.0f64..1.0, s2 in -1.0f64..1.0) {
        let s3 = (1.0 - s1 * s1 - s2 * s2).max(0.0).sqrt();
        let norm = (s1 * s1 + s2 * s2 + s3 * s3).sqrt();
        let s = StokesVector::new(s1 / norm, s2 / norm, s3 / norm);
        for scheme in both_schemes(angle) {
            let out = scheme.kraus().apply(&s.to_density().unwrap());
            prop_assert!(out.to_stokes().degree_of_polarization() <= 1.0 + 1e-9);
        }
    }
}
