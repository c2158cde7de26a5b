//! Randomised spot checks against the dense reference implementations.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use varqlab::measurement::{group_terms, GroupingStrategy};
use varqlab::oracle;
use varqlab::pauli::{Observable, PauliAxis, PauliString};
use varqlab::qaoa::{
    build_qaoa_circuit, maxcut_to_ising, warm_start_mixer_layer, QaoaParams, WarmStart,
    WeightedGraph,
};
use varqlab::simulator::{Circuit, Gate, StateVector};
use varqlab::vqe::exact_ground_energy;

use crate::config::CliError;
use crate::report::Report;

#[derive(Debug, Clone, Serialize, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random instances per check.
    #[arg(long, default_value_t = 50)]
    pub cases: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CheckResult {
    name: &'static str,
    cases: usize,
    max_error: f64,
    tolerance: f64,
    pass: bool,
}

type Check = fn(&mut ChaCha8Rng) -> anyhow::Result<f64>;

fn random_string(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    PauliString::new(
        (0..n)
            .map(|_| PauliAxis::ALL[rng.random_range(0..4)])
            .collect(),
    )
    .expect("n >= 1")
}

fn random_observable(rng: &mut ChaCha8Rng, n: usize) -> anyhow::Result<Observable> {
    let mut obs = Observable::new(n)?;
    for _ in 0..rng.random_range(1..=6) {
        let s = random_string(rng, n);
        obs.add_term(rng.random_range(-2.0..2.0), s)?;
    }
    obs.add_constant(rng.random_range(-1.0..1.0))?;
    Ok(obs)
}

fn random_circuit(rng: &mut ChaCha8Rng, n: usize, len: usize) -> anyhow::Result<Circuit> {
    let mut c = Circuit::new(n);
    for _ in 0..len {
        let q = rng.random_range(0..n);
        let t = rng.random_range(-PI..PI);
        let g = match rng.random_range(0..8) {
            0 => Gate::H(q),
            1 => Gate::Rx(q, t),
            2 => Gate::Ry(q, t),
            3 => Gate::Rz(q, t),
            4 => Gate::Phase(q, t),
            _ if n > 1 => {
                let other = (q + rng.random_range(1..n)) % n;
                match rng.random_range(0..3) {
                    0 => Gate::Cz(q, other),
                    _ => Gate::Cnot {
                        control: q,
                        target: other,
                    },
                }
            }
            _ => Gate::Y(q),
        };
        c.push(g)?;
    }
    Ok(c)
}

fn max_norm<'a>(it: impl Iterator<Item = &'a Complex64>) -> f64 {
    it.map(|z| z.norm()).fold(0.0, f64::max)
}

fn pauli_products(rng: &mut ChaCha8Rng) -> anyhow::Result<f64> {
    let n = rng.random_range(1..=4);
    let (a, b) = (random_string(rng, n), random_string(rng, n));
    let prod = a.multiply(&b)?;
    let lhs = oracle::string_matrix(&prod.string)? * prod.phase.to_complex();
    let rhs = oracle::string_matrix(&a)? * oracle::string_matrix(&b)?;
    Ok(max_norm((lhs - rhs).iter()))
}

fn circuits(rng: &mut ChaCha8Rng) -> anyhow::Result<f64> {
    let n = rng.random_range(1..=5);
    let c = random_circuit(rng, n, 20)?;
    let actual = c.run()?;
    let expected = oracle::dense_apply(&oracle::circuit_unitary(&c)?, &StateVector::zero_state(n))?;
    Ok(max_norm(
        actual
            .amplitudes()
            .iter()
            .zip(&expected)
            .map(|(a, b)| a - b)
            .collect::<Vec<_>>()
            .iter(),
    ))
}

fn expectations(rng: &mut ChaCha8Rng) -> anyhow::Result<f64> {
    let n = rng.random_range(1..=4);
    let c = random_circuit(rng, n, 12)?;
    let obs = random_observable(rng, n)?;
    let state = c.run()?;
    let h = oracle::observable_matrix(&obs)?;
    let hv = oracle::dense_apply(&h, &state)?;
    let dense: Complex64 = state
        .amplitudes()
        .iter()
        .zip(&hv)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok((obs.exact_expectation(&state)? - dense.re).abs())
}

fn ground_energies(rng: &mut ChaCha8Rng) -> anyhow::Result<f64> {
    let n = rng.random_range(1..=4);
    let obs = random_observable(rng, n)?;
    Ok((exact_ground_energy(&obs)? - oracle::dense_ground_energy(&obs)?).abs())
}

fn qaoa_layers(rng: &mut ChaCha8Rng) -> anyhow::Result<f64> {
    let n = rng.random_range(2..=4);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(0.7) {
                edges.push((i, j, rng.random_range(0.2..2.0)));
            }
        }
    }
    let problem = maxcut_to_ising(&WeightedGraph::new(n, edges)?);
    let (gamma, beta) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
    let full = build_qaoa_circuit(&problem, &QaoaParams::new(vec![gamma], vec![beta])?)?;
    let layer = Circuit::from_gates(n, full.gates()[n..].iter().copied())?;
    let cost = oracle::dense_expm_diagonal(problem.hamiltonian(), gamma)?;
    let rx = oracle::expm_single_qubit(&Observable::from_terms(1, &[(1.0, "X0")])?, beta)?;
    let mixer = oracle::embed(&(0..n).map(|q| (q, rx.clone())).collect::<Vec<_>>(), n)?;
    Ok(oracle::max_diff_up_to_phase(
        &oracle::circuit_unitary(&layer)?,
        &(mixer * cost),
    ))
}

fn warm_start_mixers(rng: &mut ChaCha8Rng) -> anyhow::Result<f64> {
    let (c, beta) = (rng.random_range(0.0..=1.0), rng.random_range(-PI..PI));
    let theta = WarmStart::new(&[c])?.thetas()[0];
    let h = Observable::from_terms(1, &[(-theta.sin(), "X0"), (-theta.cos(), "Z0")])?;
    let expected = oracle::expm_single_qubit(&h, beta)?;
    let actual = oracle::circuit_unitary(&warm_start_mixer_layer(&[c], beta)?)?;
    Ok(oracle::max_diff_up_to_phase(&actual, &expected))
}

/// Reassembles each QWC partition and compares it with the simplified input; 1 marks a
/// non-commuting pair.
fn grouping(rng: &mut ChaCha8Rng) -> anyhow::Result<f64> {
    let n = rng.random_range(1..=4);
    let obs = random_observable(rng, n)?;
    let groups = group_terms(&obs, GroupingStrategy::QwcGreedy);
    let mut rebuilt = Observable::constant_only(n, obs.offset())?;
    for g in &groups {
        for (i, a) in g.terms().iter().enumerate() {
            if g.terms()[..i]
                .iter()
                .any(|b| !a.string.qubitwise_commutes(&b.string))
            {
                return Ok(1.0);
            }
            rebuilt.add_term(a.coefficient, a.string.clone())?;
        }
    }
    let diff = oracle::observable_matrix(&rebuilt)? - oracle::observable_matrix(&obs)?;
    Ok(max_norm(diff.iter()))
}

const CHECKS: [(&str, Check, f64); 7] = [
    ("pauli products", pauli_products, 1e-12),
    ("circuits vs dense unitaries", circuits, 1e-10),
    ("expectations vs dense", expectations, 1e-10),
    ("ground energies vs dense", ground_energies, 1e-6),
    ("QAOA layer vs exp(-iH)", qaoa_layers, 1e-10),
    ("warm-start mixer vs exp(-iH)", warm_start_mixers, 1e-10),
    ("QWC grouping soundness", grouping, 1e-12),
];

pub fn run(a: VerifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    if a.cases == 0 {
        return Err(CliError::config("cases: must be positive"));
    }
    let mut results = Vec::new();
    for (k, (name, check, tolerance)) in CHECKS.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(varqlab::derive_seed(a.seed, k as u64));
        let mut max_error = 0.0f64;
        for _ in 0..a.cases {
            max_error = max_error.max(check(&mut rng)?);
        }
        let pass = max_error <= *tolerance;
        println!(
            "verify {:<30} {} max error {max_error:.2e} (tol {tolerance:.0e}, {} cases)",
            name,
            if pass { "PASS" } else { "FAIL" },
            a.cases
        );
        results.push(CheckResult {
            name,
            cases: a.cases,
            max_error,
            tolerance: *tolerance,
            pass,
        });
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    if let Some(path) = &a.output {
        let body = serde_json::json!({ "checks": results, "failed": failed });
        Report::new("verify", &a, body, Some(a.seed), start).emit(Some(path))?;
    }
    if failed > 0 {
        return Err(CliError::Runtime(anyhow::anyhow!(
            "{failed} verification check(s) failed"
        )));
    }
    Ok(())
}
