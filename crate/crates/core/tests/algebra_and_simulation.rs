//! Property suites for the Pauli algebra, the simulator and the measurement layer, checked
//! against the dense oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use varqlab::measurement::{
    allocate_shots, estimate_observable, group_terms, AllocationStrategy, EstimatorMode,
    GroupingStrategy,
};
use varqlab::oracle;
use varqlab::pauli::{Observable, PauliAxis, PauliString};
use varqlab::simulator::{Circuit, Gate, StateVector};

fn axis() -> impl Strategy<Value = PauliAxis> {
    prop::sample::select(PauliAxis::ALL.to_vec())
}

fn string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(axis(), n).prop_map(|a| PauliString::new(a).unwrap())
}

fn observable(n: usize, max_terms: usize) -> impl Strategy<Value = Observable> {
    (
        prop::collection::vec((-3.0f64..3.0, string(n)), 1..=max_terms),
        -1.0f64..1.0,
    )
        .prop_map(move |(terms, c)| {
            let mut obs = Observable::new(n).unwrap();
            for (coef, s) in terms {
                obs.add_term(coef, s).unwrap();
            }
            obs.add_constant(c).unwrap();
            obs
        })
}

fn diagonal_observable(n: usize) -> impl Strategy<Value = Observable> {
    observable(n, 6).prop_map(move |obs| {
        let mut d = Observable::new(n).unwrap();
        for t in obs.terms() {
            let axes = t
                .string
                .axes()
                .iter()
                .map(|a| {
                    if a.is_identity() {
                        PauliAxis::I
                    } else {
                        PauliAxis::Z
                    }
                })
                .collect();
            d.add_term(t.coefficient, PauliString::new(axes).unwrap())
                .unwrap();
        }
        d.add_constant(obs.constant()).unwrap();
        d
    })
}

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let q = 0..n;
    let t = -PI..PI;
    let one = (q.clone(), t, 0..8usize).prop_map(|(q, t, k)| match k {
        0 => Gate::H(q),
        1 => Gate::X(q),
        2 => Gate::Y(q),
        3 => Gate::Z(q),
        4 => Gate::Rx(q, t),
        5 => Gate::Ry(q, t),
        6 => Gate::Rz(q, t),
        _ => Gate::Phase(q, t),
    });
    if n < 2 {
        return one.boxed();
    }
    let two = (0..n, 1..n, -PI..PI, 0..3usize).prop_map(move |(a, off, t, k)| {
        let b = (a + off) % n;
        match k {
            0 => Gate::Cnot {
                control: a,
                target: b,
            },
            1 => Gate::Cz(a, b),
            _ => Gate::Rzz(a, b, t),
        }
    });
    prop_oneof![3 => one, 1 => two].boxed()
}

fn circuit(max_qubits: usize, max_len: usize) -> impl Strategy<Value = Circuit> {
    (1..=max_qubits).prop_flat_map(move |n| {
        prop::collection::vec(gate(n), 0..=max_len)
            .prop_map(move |g| Circuit::from_gates(n, g).unwrap())
    })
}

fn random_state(n: usize) -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
        "zero vector",
        |v| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            (norm > 1e-3).then(|| {
                StateVector::from_amplitudes(
                    v.iter()
                        .map(|(a, b)| Complex64::new(a / norm, b / norm))
                        .collect(),
                )
                .unwrap()
            })
        },
    )
}

fn max_abs(m: &oracle::DenseMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn multiplication_is_matrix_product(
        (a, b) in (1usize..=4).prop_flat_map(|n| (string(n), string(n)))
    ) {
        let p = a.multiply(&b).unwrap();
        let lhs = oracle::string_matrix(&p.string).unwrap() * p.phase.to_complex();
        let rhs = oracle::string_matrix(&a).unwrap() * oracle::string_matrix(&b).unwrap();
        prop_assert!(max_abs(&(lhs - rhs)) <= 1e-12);
    }

    #[test]
    fn commutation_matches_matrices(
        (a, b) in (1usize..=4).prop_flat_map(|n| (string(n), string(n)))
    ) {
        let (ma, mb) = (oracle::string_matrix(&a).unwrap(), oracle::string_matrix(&b).unwrap());
        let commutator = &ma * &mb - &mb * &ma;
        prop_assert_eq!(a.commutes(&b), max_abs(&commutator) < 1e-12);
    }

    #[test]
    fn dense_matrix_is_hermitian_and_matches_oracle(obs in (1usize..=4).prop_flat_map(|n| observable(n, 6))) {
        let m = obs.dense_matrix().unwrap();
        prop_assert!(max_abs(&(&m - m.adjoint())) <= 1e-12);
        prop_assert!(max_abs(&(&m - oracle::observable_matrix(&obs).unwrap())) <= 1e-12);
    }

    #[test]
    fn diagonal_expectation_on_basis_states(
        (obs, index) in (1usize..=5).prop_flat_map(|n| (diagonal_observable(n), 0..(1usize << n)))
    ) {
        let n = obs.n_qubits();
        let state = StateVector::basis_state(n, index).unwrap();
        let bits = varqlab::pauli::index_to_bitstring(index, n);
        let e = obs.exact_expectation(&state).unwrap();
        prop_assert!((e - obs.eval_bitstring(&bits).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn expectation_bounded_by_one_norm(
        (obs, state) in (1usize..=4).prop_flat_map(|n| (observable(n, 6), random_state(n)))
    ) {
        let e = obs.exact_expectation(&state).unwrap();
        let bound = obs.simplify().one_norm() + obs.simplify().constant().abs();
        prop_assert!(e.abs() <= bound + 1e-12);
        let dense = oracle::expectation_dm(
            &(oracle::DenseMatrix::from_column_slice(1 << obs.n_qubits(), 1, state.amplitudes())
                * oracle::DenseMatrix::from_column_slice(1 << obs.n_qubits(), 1, state.amplitudes()).adjoint()),
            &obs,
        ).unwrap();
        prop_assert!((e - dense).abs() <= 1e-10);
    }

    #[test]
    fn gates_match_dense_unitaries(
        (g, state) in (1usize..=3).prop_flat_map(|n| (gate(n), random_state(n)))
    ) {
        let n = state.n_qubits();
        let mut fast = state.clone();
        fast.apply(&g).unwrap();
        let slow = oracle::dense_apply(&oracle::gate_unitary(&g, n).unwrap(), &state).unwrap();
        for (a, b) in fast.amplitudes().iter().zip(&slow) {
            prop_assert!((a - b).norm() <= 1e-12, "{g}: {a} vs {b}");
        }
    }

    #[test]
    fn circuits_match_dense_product(c in circuit(3, 12)) {
        let fast = c.run().unwrap();
        let slow = oracle::dense_apply(
            &oracle::circuit_unitary(&c).unwrap(),
            &StateVector::zero_state(c.n_qubits()),
        ).unwrap();
        for (a, b) in fast.amplitudes().iter().zip(&slow) {
            prop_assert!((a - b).norm() <= 1e-11);
        }
    }

    #[test]
    fn grouping_is_sound(obs in (1usize..=4).prop_flat_map(|n| observable(n, 8))) {
        let simplified = obs.simplify();
        let groups = group_terms(&obs, GroupingStrategy::QwcGreedy);
        let singles = group_terms(&obs, GroupingStrategy::OnePerTerm);
        prop_assert!(groups.len() <= singles.len());
        let mut seen: Vec<String> = Vec::new();
        for g in &groups {
            for (i, a) in g.terms().iter().enumerate() {
                for b in &g.terms()[i + 1..] {
                    prop_assert!(a.string.qubitwise_commutes(&b.string));
                }
                seen.push(a.to_string());
            }
        }
        let mut expected: Vec<String> = simplified.terms().iter().map(|t| t.to_string()).collect();
        seen.sort();
        expected.sort();
        prop_assert_eq!(seen, expected);
    }

    #[test]
    fn analytic_estimator_equals_expectation(
        (obs, c) in (1usize..=4).prop_flat_map(|n| (observable(n, 6), circuit_on(n)))
    ) {
        let groups = group_terms(&obs, GroupingStrategy::QwcGreedy);
        let plan = allocate_shots(&groups, 1000, AllocationStrategy::Proportional).unwrap();
        let est = estimate_observable(&c, &obs, &groups, &plan, EstimatorMode::Exact).unwrap();
        let exact = obs.exact_expectation(&c.run().unwrap()).unwrap();
        prop_assert!((est.value - exact).abs() <= 1e-10);
    }
}

fn circuit_on(n: usize) -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate(n), 0..=10).prop_map(move |g| Circuit::from_gates(n, g).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn long_circuits_preserve_norm(c in circuit(6, 200)) {
        let s = c.run().unwrap();
        prop_assert!((s.norm_sqr().sqrt() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn sampling_is_deterministic() {
    let c = Circuit::from_gates(
        3,
        [
            Gate::H(0),
            Gate::Ry(1, 0.7),
            Gate::Cnot {
                control: 0,
                target: 2,
            },
        ],
    )
    .unwrap();
    let s = c.run().unwrap();
    assert_eq!(
        s.sample(5000, None, 77).unwrap(),
        s.sample(5000, None, 77).unwrap()
    );
    assert_ne!(
        s.sample(5000, None, 77).unwrap(),
        s.sample(5000, None, 78).unwrap()
    );
}

/// χ² critical value at the 0.001 level for 7 degrees of freedom.
const CHI2_7_999: f64 = 24.322;

#[test]
fn sampling_passes_chi_square() {
    let c = Circuit::from_gates(
        3,
        [
            Gate::Ry(0, 1.1),
            Gate::Ry(1, 2.3),
            Gate::H(2),
            Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::Rx(2, 0.4),
            Gate::Cz(1, 2),
            Gate::Ry(2, 0.9),
        ],
    )
    .unwrap();
    let s = c.run().unwrap();
    let probs = s.probabilities();
    assert!(
        probs.iter().all(|&p| p * 20_000.0 > 5.0),
        "expected counts too small for χ²"
    );
    let shots = 20_000;
    for seed in 0..20 {
        let counts = s.sample(shots, None, seed).unwrap();
        let mut observed = [0usize; 8];
        for (i, c) in counts.index_counts() {
            observed[i] = c;
        }
        let chi2: f64 = observed
            .iter()
            .zip(&probs)
            .map(|(&o, &p)| {
                let e = p * shots as f64;
                (o as f64 - e).powi(2) / e
            })
            .sum();
        assert!(chi2 < CHI2_7_999, "seed {seed}: χ² = {chi2}");
    }
}

#[test]
fn shot_estimator_is_unbiased() {
    let h = Observable::from_terms(2, &[(5.0, "Z0"), (3.0, "Z1"), (2.0, "Z0*Z1")]).unwrap();
    let c = Circuit::from_gates(2, [Gate::Ry(0, PI / 3.0)]).unwrap();
    let groups = group_terms(&h, GroupingStrategy::OnePerTerm);
    let plan = allocate_shots(&groups, 300, AllocationStrategy::Uniform).unwrap();
    let reps = 10_000u64;
    let values: Vec<f64> = (0..reps)
        .map(|r| {
            let mode = EstimatorMode::Sampled {
                seed: varqlab::derive_seed(99, r),
                noise: None,
            };
            estimate_observable(&c, &h, &groups, &plan, mode)
                .unwrap()
                .value
        })
        .collect();
    let mean = values.iter().sum::<f64>() / reps as f64;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    assert!(
        (mean - 6.5).abs() <= 3.0 * std / (reps as f64).sqrt(),
        "mean {mean}, std {std}"
    );
}
