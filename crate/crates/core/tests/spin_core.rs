mod common;

use common::*;
use proptest::prelude::*;
use spinwire_core::density::{state_fidelity, von_neumann_entropy, werner_p, BellLabel, DensityMatrix};
use spinwire_core::reduce::partial_trace;
use spinwire_core::solver::ground_state;
use spinwire_core::{build_chain, ChainSpec, Pauli, StateVector, C64};

type DVectorC = nalgebra::DVector<C64>;

fn dense_ground(n: usize, delta: f64) -> DVectorC {
    let h = dense_hamiltonian(&ChainSpec::dimerized(n, delta));
    dense_sector_ground_state(&h, n, (n / 2) as u32).1
}

#[test]
fn pauli_x_on_first_site_moves_singlet_weight_to_bx() {
    let n = 4;
    let gs = ground_state(&build_chain(ChainSpec::dimerized(n, 0.7)).unwrap(), 1e-12).unwrap().state;
    let oracle = dense_ground(n, 0.7);
    let p = werner_p_dense(&dense_partial_trace(n, &oracle, &[1, 2]));
    let rho = partial_trace(&gs.apply_pauli(1, Pauli::X).unwrap(), &[1, 2]).unwrap();
    let f = state_fidelity(&rho, &BellLabel::X.state()).unwrap();
    assert!((f - (3.0 * p + 1.0) / 4.0).abs() < 1e-10, "{f} vs p = {p}");
}

#[test]
fn ground_state_pair_is_werner_with_oracle_weight() {
    for n in [4, 8] {
        let gs = ground_state(&build_chain(ChainSpec::dimerized(n, 0.7)).unwrap(), 1e-12).unwrap().state;
        let oracle = dense_ground(n, 0.7);
        let rho_oracle = dense_partial_trace(n, &oracle, &[1, 2]);
        let rho = partial_trace(&gs, &[1, 2]).unwrap();
        assert!(max_abs(&(rho.entries() - &rho_oracle)) < 1e-9);
        let w = werner_p(&rho).unwrap();
        assert!((w.p - werner_p_dense(&rho_oracle)).abs() < 1e-9);
        assert!(w.distance < 1e-8);
    }
}

#[test]
fn reduced_states_match_dense_trace_for_all_pairs() {
    let n = 6;
    let s = ground_state(&build_chain(ChainSpec::dimerized(n, 0.4)).unwrap(), 1e-12)
        .unwrap()
        .state
        .apply_rotation(1, 0.9, 2.3)
        .unwrap();
    let v = to_dense(&s);
    for keep in [vec![5, 6], vec![6, 5], vec![1, 4], vec![3], vec![6]] {
        let rho = partial_trace(&s, &keep).unwrap();
        assert!(max_abs(&(rho.entries() - dense_partial_trace(n, &v, &keep))) < 1e-12, "{keep:?}");
    }
}

#[test]
fn werner_weight_exceeds_099_for_strong_dimerization() {
    for delta in [0.6, 0.7, 0.9] {
        let gs = ground_state(&build_chain(ChainSpec::dimerized(8, delta)).unwrap(), 1e-12).unwrap().state;
        let w = werner_p(&partial_trace(&gs, &[1, 2]).unwrap()).unwrap();
        assert!(w.p > 0.99, "δ = {delta}: p = {}", w.p);
        assert!(w.distance < 1e-8);
    }
}

#[test]
fn pauli_actions_match_dense_operators() {
    let n = 5;
    let s = StateVector::basis_state(n, 0b01101)
        .unwrap()
        .apply_rotation(2, 0.7, 0.1)
        .unwrap()
        .apply_rotation(4, 1.3, -0.8)
        .unwrap();
    let v = to_dense(&s);
    for (axis, p) in [('x', Pauli::X), ('y', Pauli::Y), ('z', Pauli::Z), ('+', Pauli::Plus), ('-', Pauli::Minus)] {
        for site in 1..=n {
            let got = to_dense(&s.apply_pauli(site, p).unwrap());
            let want = site_op(n, site, &pauli(axis)) * &v;
            assert!((got - want).norm() < 1e-14, "{axis} on {site}");
        }
    }
}

#[test]
fn entropy_of_werner_spectrum() {
    let p = 0.9;
    let rho = DensityMatrix::werner(p).unwrap();
    let big = (1.0 + 3.0 * p) / 4.0;
    let small = (1.0 - p) / 4.0;
    let expect = -big * big.log2() - 3.0 * small * small.log2();
    assert!((von_neumann_entropy(&rho).unwrap() - expect).abs() < 1e-12);
}

fn random_state(n: usize, seed: &[f64]) -> StateVector {
    let amps: Vec<C64> = (0..1usize << n)
        .map(|i| C64::new(seed[(2 * i) % seed.len()] + 0.01 * i as f64, seed[(2 * i + 1) % seed.len()]))
        .collect();
    StateVector::from_full(n, &amps).unwrap().normalized()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotations_preserve_norm(theta in 0.0..std::f64::consts::PI, phi in -3.2..3.2f64, site in 1usize..=5,
                               seed in proptest::collection::vec(-1.0..1.0f64, 8)) {
        let s = random_state(5, &seed);
        let r = s.apply_rotation(site, theta, phi).unwrap();
        prop_assert!((r.norm() - 1.0).abs() < 1e-12);
        let back = r.apply_site_matrix(site, &adjoint(&spinwire_core::state::rotation_matrix(theta, phi))).unwrap();
        prop_assert!(back.add_scaled(C64::new(-1.0, 0.0), &s).unwrap().norm() < 1e-12);
    }

    #[test]
    fn partial_traces_are_states(a in 1usize..=5, b in 1usize..=5, seed in proptest::collection::vec(-1.0..1.0f64, 10)) {
        prop_assume!(a != b);
        let s = random_state(5, &seed);
        let rho = partial_trace(&s, &[a, b]).unwrap();
        prop_assert!(rho.validate().is_ok());
        let e = von_neumann_entropy(&rho).unwrap();
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&e));
    }
}

fn adjoint(m: &spinwire_core::state::SiteMatrix) -> spinwire_core::state::SiteMatrix {
    [[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]]
}

#[test]
fn bell_states_are_orthonormal() {
    for a in BellLabel::ALL {
        for b in BellLabel::ALL {
            let ov: C64 = a.state().iter().zip(b.state()).map(|(x, y)| x.conj() * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ov - C64::new(want, 0.0)).norm() < 1e-14);
        }
    }
}
