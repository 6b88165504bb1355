mod common;

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use common::*;
use nalgebra::DMatrix;
use neqdmft_core::qubit::{
    apply_controlled_pauli, apply_gate, jw_operator_matrices, program_unitary, Axis, GateSpec,
    Pauli, PauliString, Statevector,
};
use neqdmft_core::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn apply_dense(g: &GateSpec, v: &[C64], n: usize) -> Vec<C64> {
    let m = gate_dense(g, n);
    let x = nalgebra::DVector::from_column_slice(v);
    (m * x).iter().cloned().collect()
}

#[test]
fn ms_with_zero_theta_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = Statevector::from_amplitudes(random_state(&mut rng, 16)).unwrap();
    let out = apply_gate(psi.clone(), &GateSpec::ms(0, 3, 0.0, 0.37)).unwrap();
    for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn ms_half_pi_entangles_two_qubits() {
    let out = apply_gate(Statevector::zero(2), &GateSpec::ms(0, 1, FRAC_PI_2, 0.0)).unwrap();
    let dense = apply_dense(&GateSpec::ms(0, 1, FRAC_PI_2, 0.0), Statevector::zero(2).amplitudes(), 2);
    for (a, b) in out.amplitudes().iter().zip(&dense) {
        assert!((a - b).norm() < 1e-12);
    }
    // (|00⟩ - i|11⟩)/√2 up to a global phase
    let a = out.amplitudes();
    let ph = a[0] / a[0].norm();
    let expect = [C64::new(FRAC_1_SQRT_2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, -FRAC_1_SQRT_2)];
    for (x, e) in a.iter().zip(expect) {
        assert!((x - ph * e).norm() < 1e-12);
    }
}

#[test]
fn hadamard_twice_restores_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi = Statevector::from_amplitudes(random_state(&mut rng, 8)).unwrap();
    let h = GateSpec::Hadamard { qubit: 0 };
    let out = apply_gate(apply_gate(psi.clone(), &h).unwrap(), &h).unwrap();
    for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn out_of_range_qubit_is_rejected() {
    assert!(apply_gate(Statevector::zero(2), &GateSpec::rotation(Axis::X, 2, 0.1)).is_err());
    assert!(apply_gate(Statevector::zero(2), &GateSpec::ms(0, 2, 0.1, 0.0)).is_err());
}

#[test]
fn controlled_pauli_examples() {
    let x1 = PauliString::single(1, Pauli::X).unwrap();
    // control value 0 with the control set: untouched
    let s = Statevector::basis(2, 0b01);
    let out = apply_controlled_pauli(s.clone(), 0, false, &x1).unwrap();
    assert_eq!(out, s);
    // control value 1 flips the target
    let out = apply_controlled_pauli(Statevector::basis(2, 0b01), 0, true, &x1).unwrap();
    assert_eq!(out, Statevector::basis(2, 0b11));
    // overlap is an error
    assert!(apply_controlled_pauli(Statevector::zero(2), 1, true, &x1).is_err());
}

#[test]
fn controlled_zx_matches_kron_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let zx = PauliString::new([(1, Pauli::Z), (2, Pauli::X)]).unwrap();
    for value in [false, true] {
        let psi = random_state(&mut rng, 8);
        let g = GateSpec::ControlledPauli { control: 0, control_value: value, string: zx.clone() };
        let fast = apply_gate(Statevector::from_amplitudes(psi.clone()).unwrap(), &g).unwrap();
        let dense = apply_dense(&g, &psi, 3);
        for (a, b) in fast.amplitudes().iter().zip(&dense) {
            assert!((a - b).norm() < 1e-12);
        }
        let twice = apply_gate(fast, &g).unwrap();
        for (a, b) in twice.amplitudes().iter().zip(&psi) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}

#[test]
fn jw_canonical_anticommutation_three_sites() {
    let c = jw_operator_matrices(2);
    assert_eq!(c.len(), 6);
    let dim = c[0].nrows();
    let id = DMatrix::<C64>::identity(dim, dim);
    for i in 0..6 {
        for j in 0..6 {
            let anti = &c[i] * c[j].adjoint() + c[j].adjoint() * &c[i];
            let expect = if i == j { id.clone() } else { DMatrix::zeros(dim, dim) };
            assert!(max_abs(&(anti - expect)) < 1e-12, "{{c{i}, c{j}†}}");
            let anti = &c[i] * &c[j] + &c[j] * &c[i];
            assert!(max_abs(&anti) < 1e-12, "{{c{i}, c{j}}}");
        }
    }
}

fn arb_gate(n: usize) -> impl Strategy<Value = GateSpec> {
    let rot = (0..3usize, 0..n, -4.0..4.0f64).prop_map(|(a, q, ang)| {
        let axis = [Axis::X, Axis::Y, Axis::Z][a];
        GateSpec::rotation(axis, q, ang)
    });
    let ms = (0..n, 0..n, -4.0..4.0f64, -4.0..4.0f64)
        .prop_map(|(a, b, t, p)| GateSpec::ms(a.min(b), a.max(b), t, p));
    let had = (0..n).prop_map(|q| GateSpec::Hadamard { qubit: q });
    let cp = (0..n, any::<bool>(), proptest::collection::vec(0..4usize, n)).prop_filter_map(
        "needs a target",
        move |(c, v, ps)| {
            let ops: Vec<(usize, Pauli)> = ps
                .iter()
                .enumerate()
                .filter(|(q, _)| *q != c)
                .map(|(q, &k)| (q, [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k]))
                .collect();
            PauliString::new(ops)
                .ok()
                .map(|s| GateSpec::ControlledPauli { control: c, control_value: v, string: s })
        },
    );
    prop_oneof![rot, ms, had, cp]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn amplitude_updates_match_dense_products(g in arb_gate(4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_state(&mut rng, 16);
        let fast = apply_gate(Statevector::from_amplitudes(psi.clone()).unwrap(), &g).unwrap();
        let dense = apply_dense(&g, &psi, 4);
        for (a, b) in fast.amplitudes().iter().zip(&dense) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        prop_assert!((fast.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gate_matrices_are_unitary(g in arb_gate(3)) {
        let u = program_unitary([&g], 3).unwrap();
        let id = DMatrix::<C64>::identity(8, 8);
        prop_assert!(max_abs(&(&u * u.adjoint() - id)) < 1e-12);
    }
}
