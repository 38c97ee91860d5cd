use std::f64::consts::PI;

use faer::Mat;
use proptest::prelude::*;
use rand::{rngs::StdRng, Rng, SeedableRng};

use tqcavity::dressed::{closed_form_eigenvalues, manifold_spectrum};
use tqcavity::model::{build_two_qubit_model, coherent_state, TwoQubitOperators};
use tqcavity::observables::{
    klyshko, min_squeezing, radiance_witness, squeezing_parameter, wigner, PhotonDistribution, QuadratureMoments,
    WignerAxes,
};
use tqcavity::operator::{fock_annihilation, number_operator, tensor};
use tqcavity::solver::{build_liouvillian, devectorize, vectorize};
use tqcavity::{c64, DensityMatrix, ModelParams, Operator, SpaceDescriptor};

fn random_matrix(rng: &mut StdRng, d: usize) -> Mat<c64> {
    Mat::from_fn(d, d, |_, _| c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn random_operator(rng: &mut StdRng, dims: &[usize]) -> Operator {
    let space = SpaceDescriptor::new(dims.to_vec()).unwrap();
    let d = space.total_dim();
    Operator::from_mat(space, random_matrix(rng, d)).unwrap()
}

/// Random mixed state of `rank` on a cavity space, with no weight on levels `>= support`.
fn random_cavity_state(rng: &mut StdRng, n_max: usize, support: usize, rank: usize) -> DensityMatrix {
    let g = Mat::from_fn(n_max + 1, rank, |i, _| {
        if i < support {
            // bias toward low photon numbers so states stay grid-friendly
            let damp = (-(i as f64) * 0.4).exp();
            c64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * damp
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let rho = &g * g.adjoint();
    let tr: f64 = (0..=n_max).map(|i| rho[(i, i)].re).sum();
    let rho = Mat::from_fn(n_max + 1, n_max + 1, |i, j| (rho[(i, j)] + rho[(j, i)].conj()) * (0.5 / tr));
    DensityMatrix::new(SpaceDescriptor::cavity(n_max), rho).unwrap()
}

fn angle_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn tensor_is_associative(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (a, b, c) = (random_operator(&mut rng, &[2]), random_operator(&mut rng, &[3]), random_operator(&mut rng, &[2]));
        let left = tensor(&[a.clone(), tensor(&[b.clone(), c.clone()]).unwrap()]).unwrap();
        let right = tensor(&[tensor(&[a, b]).unwrap(), c]).unwrap();
        prop_assert!(left.max_abs_diff(&right) <= 1e-14);
        prop_assert_eq!(left.space().total_dim(), 12);
    }

    #[test]
    fn dagger_reverses_products(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (a, b) = (random_operator(&mut rng, &[2, 3]), random_operator(&mut rng, &[2, 3]));
        prop_assert!((&a * &b).dagger().max_abs_diff(&(&b.dagger() * &a.dagger())) <= 1e-14);
        prop_assert!(a.dagger().dagger().max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn full_partial_trace_is_identity(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let rho = random_cavity_state(&mut rng, 3, 4, 2);
        let q = DensityMatrix::diagonal(SpaceDescriptor::new(vec![2]).unwrap(), &[0.3, 0.7]).unwrap();
        let joint = q.kron(&rho);
        let same = joint.partial_trace(&[0, 1]).unwrap();
        prop_assert!(same.trace_distance(&joint).unwrap() < 1e-14);
        prop_assert!(joint.partial_trace(&[1]).unwrap().trace_distance(&rho).unwrap() < 1e-14);
    }

    #[test]
    fn moment_identity_matches_explicit_quadratures(seed in any::<u64>(), theta in 0.0..PI) {
        // no weight on the top level, where a a† differs from a†a + 1 after truncation
        let mut rng = StdRng::seed_from_u64(seed);
        let n_max = 8;
        let rho = random_cavity_state(&mut rng, n_max, n_max, 3);
        let a = fock_annihilation(n_max).unwrap();
        let x = (a.scale(c64::cis(-theta)) + a.dagger().scale(c64::cis(theta))) * std::f64::consts::FRAC_1_SQRT_2;
        let mean = x.expect(&rho).unwrap().re;
        let second = (&x * &x).expect(&rho).unwrap().re;
        let explicit = second - mean * mean - 0.5;
        prop_assert!((squeezing_parameter(&rho, theta) - explicit).abs() <= 1e-12);
    }

    #[test]
    fn squeezing_is_bounded_and_rotates_with_phase(seed in any::<u64>(), phi in 0.0..(2.0 * PI)) {
        let mut rng = StdRng::seed_from_u64(seed);
        let n_max = 10;
        let rho = random_cavity_state(&mut rng, n_max, 6, 2);
        let diag: Vec<c64> = (0..=n_max).map(|n| c64::cis(phi * n as f64)).collect();
        let u = Operator::from_mat(SpaceDescriptor::cavity(n_max), Mat::from_fn(n_max + 1, n_max + 1, |i, j| {
            if i == j { diag[i] } else { c64::new(0.0, 0.0) }
        })).unwrap();
        let rotated = rho.transform(&u).unwrap();
        let (s, r) = (min_squeezing(&rho), min_squeezing(&rotated));
        prop_assert!(s.s_min >= -0.5);
        prop_assert!((s.s_min - r.s_min).abs() <= 1e-9);
        prop_assert!(angle_gap(r.theta_s, s.theta_s + phi) <= 1e-9, "{} vs {} + {}", r.theta_s, s.theta_s, phi);
        // the sampled curve is π-periodic
        let m = QuadratureMoments::of(&rho);
        prop_assert!((m.s_theta(0.3) - m.s_theta(0.3 + PI)).abs() <= 1e-10);
    }

    #[test]
    fn poisson_statistics_give_unit_klyshko(mean in 0.05f64..6.0) {
        let n_max = 60;
        let mut p = vec![0.0; n_max + 1];
        p[0] = (-mean).exp();
        for n in 1..=n_max {
            p[n] = p[n - 1] * mean / n as f64;
        }
        let total: f64 = p.iter().sum();
        let p = PhotonDistribution::from_probabilities(p.into_iter().map(|v| v / total).collect()).unwrap();
        for (_, k) in klyshko(&p, 1e-12).k {
            if let Some(k) = k {
                prop_assert!((k - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(
        seed in any::<u64>(),
        delta in -5.0f64..5.0,
        eta in 0.0f64..3.0,
        g in -10.0f64..10.0,
    ) {
        let p = ModelParams::out_phase(delta, eta, g, 0.5, 3);
        let l = build_liouvillian(&build_two_qubit_model(&p).unwrap());
        let d = l.hilbert_dim();
        let mut rng = StdRng::seed_from_u64(seed);
        let m = random_matrix(&mut rng, d);
        let herm = Mat::from_fn(d, d, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        let mut out = vec![c64::new(0.0, 0.0); d * d];
        l.apply(&vectorize(herm.as_ref()), &mut out);
        let drho = devectorize(&out, d);
        let trace: c64 = (0..d).map(|i| drho[(i, i)]).fold(c64::new(0.0, 0.0), |a, b| a + b);
        prop_assert!(trace.norm() <= 1e-10);
        let mut asym: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                asym = asym.max((drho[(i, j)] - drho[(j, i)].conj()).norm());
            }
        }
        prop_assert!(asym <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coupling_sign_flip_preserves_spectrum(
        da in -4.0f64..4.0,
        dc in -4.0f64..4.0,
        g1 in -10.0f64..10.0,
        g2 in -10.0f64..10.0,
        eta in 0.0f64..3.0,
    ) {
        let p = ModelParams { delta_a: da, delta_c: dc, g1, g2, eta, kappa: 0.5, gamma: 1.0, n_max: 5 };
        let q = ModelParams { g1: -g1, g2: -g2, ..p.clone() };
        let e1 = build_two_qubit_model(&p).unwrap().hamiltonian().hermitian_eigenvalues().unwrap();
        let e2 = build_two_qubit_model(&q).unwrap().hamiltonian().hermitian_eigenvalues().unwrap();
        for (x, y) in e1.iter().zip(&e2) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn undriven_model_conserves_excitations(da in -4.0f64..4.0, dc in -4.0f64..4.0, g1 in -10.0f64..10.0, g2 in -10.0f64..10.0) {
        let p = ModelParams { delta_a: da, delta_c: dc, g1, g2, eta: 0.0, kappa: 0.5, gamma: 1.0, n_max: 5 };
        let m = build_two_qubit_model(&p).unwrap();
        let ops = TwoQubitOperators::new(p.n_max).unwrap();
        let n_exc = &ops.a.dagger() * &ops.a + &ops.sm1.dagger() * &ops.sm1 + &ops.sm2.dagger() * &ops.sm2;
        prop_assert!(m.hamiltonian().commutator(&n_exc).max_abs() <= 1e-12);
    }

    #[test]
    fn manifold_spectrum_matches_closed_form(n in 1usize..12, g in 0.1f64..20.0) {
        let s = manifold_spectrum(n, g).unwrap();
        let expected = closed_form_eigenvalues(n);
        prop_assert_eq!(s.eigenvalues.len(), expected.len());
        let scale = (4.0 * n as f64 - 2.0).sqrt();
        for (x, y) in s.eigenvalues.iter().zip(&expected) {
            prop_assert!((x - y).abs() <= 1e-10 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn witness_is_symmetric_under_coupling_exchange(
        g1 in 1.0f64..8.0,
        g2 in -8.0f64..-1.0,
        eta in 0.2f64..1.5,
        delta in -3.0f64..3.0,
    ) {
        let p = ModelParams { g1, g2, ..ModelParams::out_phase(delta, eta, 1.0, 0.5, 6) };
        let q = ModelParams { g1: g2, g2: g1, ..p.clone() };
        let (a, b) = (radiance_witness(&p).unwrap(), radiance_witness(&q).unwrap());
        prop_assert!((a.r - b.r).abs() <= 1e-9 * a.r.abs().max(1.0));
    }

    #[test]
    fn wigner_marginal_matches_squeezing(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let rho = random_cavity_state(&mut rng, 6, 4, 2);
        let s = min_squeezing(&rho);
        let grid = wigner(&rho, &WignerAxes::square(7.0, 141)).unwrap();
        prop_assert!(!grid.grid_too_small);
        prop_assert!((grid.integral() - 1.0).abs() <= 1e-3);
        // variance of x cosθ + y sinθ under the grid weight
        let m = grid.moments();
        let (c, sn) = (s.theta_s.cos(), s.theta_s.sin());
        let var = c * c * m.covariance[0][0] + 2.0 * c * sn * m.covariance[0][1] + sn * sn * m.covariance[1][1];
        prop_assert!((var - (s.s_min + 0.5)).abs() <= 1e-3);
        prop_assert!((m.minor_variance - (s.s_min + 0.5)).abs() <= 1e-3);
    }
}

#[test]
fn coherent_states_are_unsqueezed() {
    for &alpha in &[c64::new(0.7, 0.0), c64::new(-0.4, 1.1)] {
        let rho = coherent_state(alpha, 30).unwrap();
        for k in 0..36 {
            assert!(squeezing_parameter(&rho, k as f64 * PI / 36.0).abs() < 1e-9);
        }
    }
}

#[test]
fn number_operator_expectation_on_fock_states() {
    let n = number_operator(4).unwrap();
    for k in 0..=4 {
        let rho = DensityMatrix::basis(SpaceDescriptor::cavity(4), k).unwrap();
        assert!((n.expect(&rho).unwrap().re - k as f64).abs() < 1e-14);
    }
}
