//! Variational quantum eigensolver driver.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    allocate_shots, estimate_observable, group_samples, group_terms, measure_groups,
    AllocationStrategy, EstimatorMode, GroupingStrategy, MeasurementGroup, ShotPlan,
};
use crate::objectives::ObjectiveSpec;
use crate::optimizers::{minimize, Evaluation, OptimizationTrace, OptimizerConfig};
use crate::oracle::BRUTE_FORCE_LIMIT;
use crate::pauli::{Observable, DENSE_QUBIT_LIMIT};
use crate::rng::{derive_seed, seeded};
use crate::simulator::{Circuit, Gate, NoiseModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnsatzKind {
    /// One `RY(θ)` on qubit 0.
    SingleRy,
    /// Per layer: `RY` on every qubit, `RZ` on every qubit, then a CNOT chain `q0→q1→…`.
    Layered { layers: usize },
}

impl FromStr for AnsatzKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "single_ry" => Ok(AnsatzKind::SingleRy),
            None if s == "layered" => Ok(AnsatzKind::Layered { layers: 1 }),
            Some(("layered", l)) => match l.parse::<usize>() {
                Ok(layers) if layers >= 1 => Ok(AnsatzKind::Layered { layers }),
                _ => Err(Error::invalid(format!("bad layer count '{l}'"))),
            },
            _ => Err(Error::invalid(format!("unknown ansatz '{s}'"))),
        }
    }
}

impl fmt::Display for AnsatzKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnsatzKind::SingleRy => f.write_str("single_ry"),
            AnsatzKind::Layered { layers } => write!(f, "layered:{layers}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsatzSpec {
    pub kind: AnsatzKind,
    pub n_qubits: usize,
}

impl AnsatzSpec {
    pub fn new(kind: AnsatzKind, n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("ansatz needs at least one qubit"));
        }
        if let AnsatzKind::Layered { layers: 0 } = kind {
            return Err(Error::invalid("layered ansatz needs at least one layer"));
        }
        Ok(Self { kind, n_qubits })
    }

    pub fn parameter_count(&self) -> usize {
        match self.kind {
            AnsatzKind::SingleRy => 1,
            AnsatzKind::Layered { layers } => 2 * self.n_qubits * layers,
        }
    }

    pub fn build(&self, params: &[f64]) -> Result<Circuit> {
        if params.len() != self.parameter_count() {
            return Err(Error::Dimension {
                expected: self.parameter_count(),
                found: params.len(),
            });
        }
        let n = self.n_qubits;
        let mut c = Circuit::new(n);
        match self.kind {
            AnsatzKind::SingleRy => {
                c.push(Gate::Ry(0, params[0]))?;
            }
            AnsatzKind::Layered { layers } => {
                for layer in params.chunks(2 * n).take(layers) {
                    let (ry, rz) = layer.split_at(n);
                    for (q, &t) in ry.iter().enumerate() {
                        c.push(Gate::Ry(q, t))?;
                    }
                    for (q, &t) in rz.iter().enumerate() {
                        c.push(Gate::Rz(q, t))?;
                    }
                    for q in 1..n {
                        c.push(Gate::Cnot {
                            control: q - 1,
                            target: q,
                        })?;
                    }
                }
            }
        }
        Ok(c)
    }
}

/// Convenience wrapper for [`AnsatzSpec::build`].
pub fn build_ansatz(spec: &AnsatzSpec, params: &[f64]) -> Result<Circuit> {
    spec.build(params)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VqeEstimator {
    Exact,
    Sampled {
        /// Shot budget per energy evaluation.
        shots: usize,
        seed: u64,
        noise: Option<NoiseModel>,
        grouping: GroupingStrategy,
        allocation: AllocationStrategy,
    },
}

impl VqeEstimator {
    pub fn sampled(shots: usize, seed: u64) -> Self {
        VqeEstimator::Sampled {
            shots,
            seed,
            noise: None,
            grouping: GroupingStrategy::QwcGreedy,
            allocation: AllocationStrategy::Proportional,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeResult {
    /// Energy at `best_params`. Sampled runs re-estimate it with an independent seed so the
    /// minimum over noisy evaluations does not bias it low.
    pub best_energy: f64,
    /// Standard error of `best_energy` (0 for the exact estimator).
    pub best_energy_std_error: f64,
    /// Optimiser's best objective value.
    pub best_objective: f64,
    pub best_params: Vec<f64>,
    pub trace: OptimizationTrace,
    pub exact_ground: Option<f64>,
    pub gap_to_exact: Option<f64>,
}

/// Energy evaluator shared by the optimisation loop and one-off evaluations.
struct Evaluator<'a> {
    obs: &'a Observable,
    spec: &'a AnsatzSpec,
    estimator: VqeEstimator,
    objective: ObjectiveSpec,
    groups: Vec<MeasurementGroup>,
    plan: ShotPlan,
}

impl<'a> Evaluator<'a> {
    fn new(
        obs: &'a Observable,
        spec: &'a AnsatzSpec,
        estimator: VqeEstimator,
        objective: ObjectiveSpec,
    ) -> Result<Self> {
        if obs.n_qubits() != spec.n_qubits {
            return Err(Error::Dimension {
                expected: spec.n_qubits,
                found: obs.n_qubits(),
            });
        }
        objective.validate()?;
        let (groups, plan) = match estimator {
            VqeEstimator::Exact => {
                if !objective.is_expectation() {
                    return Err(Error::Unsupported(format!(
                        "objective '{objective}' needs sampled energies, not the exact estimator"
                    )));
                }
                let groups = group_terms(obs, GroupingStrategy::QwcGreedy);
                let plan = ShotPlan {
                    allocations: (0..groups.len()).map(|g| (g, 0)).collect(),
                    total_budget: 0,
                };
                (groups, plan)
            }
            VqeEstimator::Sampled {
                shots,
                grouping,
                allocation,
                noise,
                ..
            } => {
                if let Some(n) = noise {
                    n.validate()?;
                }
                let groups = group_terms(obs, grouping);
                let plan = allocate_shots(&groups, shots, allocation)?;
                (groups, plan)
            }
        };
        Ok(Self {
            obs,
            spec,
            estimator,
            objective,
            groups,
            plan,
        })
    }

    fn mode(&self, stream: u64) -> EstimatorMode {
        match self.estimator {
            VqeEstimator::Exact => EstimatorMode::Exact,
            VqeEstimator::Sampled { seed, noise, .. } => EstimatorMode::Sampled {
                seed: derive_seed(seed, stream),
                noise,
            },
        }
    }

    fn shots(&self) -> u64 {
        match self.estimator {
            VqeEstimator::Exact => 0,
            VqeEstimator::Sampled { .. } if self.groups.is_empty() => 0,
            VqeEstimator::Sampled { shots, .. } => shots as u64,
        }
    }

    fn energy(&self, params: &[f64], stream: u64) -> Result<(f64, f64)> {
        let circuit = self.spec.build(params)?;
        let est = estimate_observable(
            &circuit,
            self.obs,
            &self.groups,
            &self.plan,
            self.mode(stream),
        )?;
        Ok((est.value, est.std_error))
    }

    fn objective_value(&self, params: &[f64], stream: u64) -> Result<f64> {
        if self.objective.is_expectation() {
            return Ok(self.energy(params, stream)?.0);
        }
        // risk objectives act on each group's per-shot energies; the results are summed
        let circuit = self.spec.build(params)?;
        let measured = measure_groups(&circuit, &self.groups, &self.plan, self.mode(stream))?;
        let mut total = self.obs.offset();
        for (group, m) in self.groups.iter().zip(&measured) {
            let counts = m.counts.as_ref().expect("sampled estimator records counts");
            total += self.objective.evaluate(&group_samples(group, counts)?)?;
        }
        Ok(total)
    }
}

/// Energy of the ansatz state at `params`.
pub fn evaluate_energy(
    obs: &Observable,
    spec: &AnsatzSpec,
    params: &[f64],
    estimator: VqeEstimator,
) -> Result<f64> {
    Evaluator::new(obs, spec, estimator, ObjectiveSpec::Expectation)?
        .energy(params, 0)
        .map(|(v, _)| v)
}

/// Starting point used when none is supplied: every angle at 0.1 rad.
pub fn default_initial_params(spec: &AnsatzSpec) -> Vec<f64> {
    vec![0.1; spec.parameter_count()]
}

/// Random starting point in `[0, 2π)`.
pub fn random_initial_params(spec: &AnsatzSpec, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..spec.parameter_count())
        .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
        .collect()
}

pub fn run_vqe(
    obs: &Observable,
    spec: &AnsatzSpec,
    opt: &OptimizerConfig,
    estimator: VqeEstimator,
    objective: ObjectiveSpec,
    initial: Option<&[f64]>,
) -> Result<VqeResult> {
    let eval = Evaluator::new(obs, spec, estimator, objective)?;
    let x0 = match initial {
        Some(x) => x.to_vec(),
        None => default_initial_params(spec),
    };
    if x0.len() != spec.parameter_count() {
        return Err(Error::Dimension {
            expected: spec.parameter_count(),
            found: x0.len(),
        });
    }

    let mut failure: Option<Error> = None;
    let mut calls: u64 = 0;
    let shots = eval.shots();
    let trace = minimize(
        |x: &[f64]| {
            calls += 1;
            let value = match eval.objective_value(x, calls) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            };
            Evaluation { value, shots }
        },
        &x0,
        opt,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }

    let (best_energy, best_energy_std_error) = match estimator {
        VqeEstimator::Exact => (trace.best_value, 0.0),
        VqeEstimator::Sampled { .. } => eval.energy(&trace.best_params, u64::MAX)?,
    };
    let exact_ground = exact_ground_energy(obs).ok();
    Ok(VqeResult {
        best_energy,
        best_energy_std_error,
        best_objective: trace.best_value,
        best_params: trace.best_params.clone(),
        gap_to_exact: exact_ground.map(|g| best_energy - g),
        exact_ground,
        trace,
    })
}

const POWER_TOLERANCE: f64 = 1e-10;
const POWER_RESIDUAL: f64 = 1e-7;
const POWER_MAX_ITERATIONS: usize = 2_000_000;

/// Lowest eigenvalue of `obs`.
///
/// Diagonal observables (n ≤ 22) are scanned exhaustively. Others (n ≤ 10) use power iteration
/// on `σI − H` with `σ` the one-norm, which is positive semidefinite; iteration stops once the
/// Rayleigh quotient moves by less than 1e-10 and the residual is below 1e-7.
pub fn exact_ground_energy(obs: &Observable) -> Result<f64> {
    let obs = obs.simplify();
    let n = obs.n_qubits();
    if obs.is_diagonal() {
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::SizeLimit {
                what: "diagonal ground-state scan",
                limit: BRUTE_FORCE_LIMIT,
                requested: n,
            });
        }
        return Ok((0..1usize << n)
            .map(|i| obs.eval_index_unchecked(i))
            .fold(f64::INFINITY, f64::min));
    }
    power_iteration_ground(&obs)
}

pub(crate) fn power_iteration_ground(obs: &Observable) -> Result<f64> {
    let n = obs.n_qubits();
    if n > DENSE_QUBIT_LIMIT {
        return Err(Error::SizeLimit {
            what: "power iteration",
            limit: DENSE_QUBIT_LIMIT,
            requested: n,
        });
    }
    let sigma = obs.one_norm();
    let dim = 1usize << n;
    let mut rng = seeded(0x5EED);
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    normalize(&mut v);
    let mut lambda = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        let hv = obs.apply(&v)?;
        let w: Vec<Complex64> = v.iter().zip(&hv).map(|(a, b)| a * sigma - b).collect();
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        let residual = w
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b * rayleigh).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let converged = (rayleigh - lambda).abs() < POWER_TOLERANCE && residual < POWER_RESIDUAL;
        lambda = rayleigh;
        let norm = w.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if converged || norm < 1e-300 {
            break;
        }
        v = w.into_iter().map(|a| a / norm).collect();
    }
    Ok(sigma - lambda)
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= norm);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optimizers::Method;
    use crate::oracle;
    use crate::simulator::StateVector;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn worked() -> Observable {
        Observable::parse("2 Z0\n1 X0\n1 I", None).unwrap()
    }

    fn ry1() -> AnsatzSpec {
        AnsatzSpec::new(AnsatzKind::SingleRy, 1).unwrap()
    }

    #[test]
    fn single_ry_states() {
        let s0 = ry1().build(&[0.0]).unwrap().run().unwrap();
        assert_eq!(s0, StateVector::zero_state(1));
        let s1 = ry1().build(&[PI]).unwrap().run().unwrap();
        assert_abs_diff_eq!(s1.amplitudes()[1].re, 1.0, epsilon = 1e-15);
        assert!(ry1().build(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn layered_structure() {
        let spec = AnsatzSpec::new(AnsatzKind::Layered { layers: 1 }, 2).unwrap();
        assert_eq!(spec.parameter_count(), 4);
        let c = spec.build(&[0.1, 0.2, 0.3, 0.4]).unwrap();
        assert_eq!(
            c.gates(),
            &[
                Gate::Ry(0, 0.1),
                Gate::Ry(1, 0.2),
                Gate::Rz(0, 0.3),
                Gate::Rz(1, 0.4),
                Gate::Cnot {
                    control: 0,
                    target: 1
                }
            ]
        );
        let spec3 = AnsatzSpec::new(AnsatzKind::Layered { layers: 2 }, 3).unwrap();
        assert_eq!(spec3.parameter_count(), 12);
        assert_eq!(spec3.build(&[0.0; 12]).unwrap().len(), 2 * (3 + 3 + 2));
    }

    #[test]
    fn ansatz_syntax() {
        assert_eq!(
            "single_ry".parse::<AnsatzKind>().unwrap(),
            AnsatzKind::SingleRy
        );
        assert_eq!(
            "layered:3".parse::<AnsatzKind>().unwrap(),
            AnsatzKind::Layered { layers: 3 }
        );
        assert!("layered:0".parse::<AnsatzKind>().is_err());
        assert!("hea".parse::<AnsatzKind>().is_err());
    }

    #[test]
    fn worked_example_energies() {
        let h = worked();
        assert_abs_diff_eq!(
            evaluate_energy(&h, &ry1(), &[0.0], VqeEstimator::Exact).unwrap(),
            3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            evaluate_energy(&h, &ry1(), &[PI], VqeEstimator::Exact).unwrap(),
            -1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn gradient_descent_reaches_ground() {
        let res = run_vqe(
            &worked(),
            &ry1(),
            &OptimizerConfig::default(),
            VqeEstimator::Exact,
            ObjectiveSpec::Expectation,
            Some(&[0.1]),
        )
        .unwrap();
        let exact = 1.0 - 5f64.sqrt();
        assert_abs_diff_eq!(res.best_energy, exact, epsilon = 1e-4);
        assert_abs_diff_eq!(res.exact_ground.unwrap(), exact, epsilon = 1e-9);
        assert!(res.gap_to_exact.unwrap() >= -1e-9);
    }

    #[test]
    fn constant_observable_is_flat() {
        let k = Observable::constant_only(1, 2.5).unwrap();
        let res = run_vqe(
            &k,
            &ry1(),
            &OptimizerConfig::default(),
            VqeEstimator::Exact,
            ObjectiveSpec::Expectation,
            None,
        )
        .unwrap();
        assert_eq!(res.trace.iterations[0].value, 2.5);
        assert_eq!(res.best_energy, 2.5);
    }

    #[test]
    fn invalid_combinations_rejected() {
        let h = worked();
        let two = AnsatzSpec::new(AnsatzKind::SingleRy, 2).unwrap();
        assert!(matches!(
            run_vqe(
                &h,
                &two,
                &OptimizerConfig::default(),
                VqeEstimator::Exact,
                ObjectiveSpec::Expectation,
                None
            ),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            run_vqe(
                &h,
                &ry1(),
                &OptimizerConfig::default(),
                VqeEstimator::Exact,
                ObjectiveSpec::Cvar { alpha: 0.5 },
                None
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn sampled_run_is_reproducible_and_close() {
        let cfg = OptimizerConfig {
            method: Method::NelderMead,
            max_evaluations: 150,
            value_tolerance: 1e-6,
            ..OptimizerConfig::default()
        };
        let est = VqeEstimator::sampled(10_000, 17);
        let a = run_vqe(
            &worked(),
            &ry1(),
            &cfg,
            est,
            ObjectiveSpec::Expectation,
            Some(&[0.1]),
        )
        .unwrap();
        let b = run_vqe(
            &worked(),
            &ry1(),
            &cfg,
            est,
            ObjectiveSpec::Expectation,
            Some(&[0.1]),
        )
        .unwrap();
        assert_eq!(a, b);
        let exact = 1.0 - 5f64.sqrt();
        assert!((a.best_energy - exact).abs() < 5.0 * a.best_energy_std_error);
        assert!(a.trace.shots() > 0);
    }

    #[test]
    fn cvar_vqe_runs_on_diagonal_problem() {
        let h = Observable::from_terms(2, &[(5.0, "Z0"), (3.0, "Z1"), (2.0, "Z0*Z1")]).unwrap();
        let spec = AnsatzSpec::new(AnsatzKind::Layered { layers: 1 }, 2).unwrap();
        let cfg = OptimizerConfig {
            max_evaluations: 300,
            ..OptimizerConfig::nelder_mead()
        };
        let res = run_vqe(
            &h,
            &spec,
            &cfg,
            VqeEstimator::sampled(500, 3),
            ObjectiveSpec::Cvar { alpha: 0.2 },
            Some(&[1.0; 4]),
        )
        .unwrap();
        assert!(res.best_objective < 0.0);
    }

    #[test]
    fn ground_energy_examples() {
        assert_abs_diff_eq!(
            exact_ground_energy(&worked()).unwrap(),
            1.0 - 5f64.sqrt(),
            epsilon = 1e-9
        );
        let z = Observable::from_terms(1, &[(1.0, "Z0")]).unwrap();
        assert_eq!(exact_ground_energy(&z).unwrap(), -1.0);
        let h = Observable::from_terms(2, &[(5.0, "Z0"), (3.0, "Z1"), (2.0, "Z0*Z1")]).unwrap();
        assert_eq!(exact_ground_energy(&h).unwrap(), -6.0);
        let big = Observable::from_terms(11, &[(1.0, "X0")]).unwrap();
        assert!(exact_ground_energy(&big).is_err());
    }

    #[test]
    fn power_iteration_matches_dense_diagonalisation() {
        let h = Observable::from_terms(
            3,
            &[
                (0.7, "X0*X1"),
                (-1.1, "Z1"),
                (0.4, "Y0*Y2"),
                (0.9, "Z0*Z2"),
                (-0.3, "X2"),
                (0.2, "I"),
            ],
        )
        .unwrap();
        let dense = oracle::dense_ground_energy(&h).unwrap();
        assert_abs_diff_eq!(exact_ground_energy(&h).unwrap(), dense, epsilon = 1e-8);
    }

    fn diagonal_observable(n: usize) -> impl Strategy<Value = Observable> {
        prop::collection::vec((1usize..(1 << n), -2.0f64..2.0), 1..6).prop_map(move |terms| {
            let mut obs = Observable::new(n).unwrap();
            for (mask, c) in terms {
                let factors: Vec<(usize, crate::pauli::PauliAxis)> = (0..n)
                    .filter(|q| mask >> q & 1 == 1)
                    .map(|q| (q, crate::pauli::PauliAxis::Z))
                    .collect();
                obs.add_term(
                    c,
                    crate::pauli::PauliString::from_sparse(n, &factors).unwrap(),
                )
                .unwrap();
            }
            obs
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn power_iteration_agrees_with_scan(obs in (1usize..=6).prop_flat_map(diagonal_observable)) {
            let scan = oracle::brute_force_min(&obs).unwrap().0;
            let power = power_iteration_ground(&obs).unwrap();
            prop_assert!((power - scan).abs() < 1e-8, "{} vs {}", power, scan);
        }
    }
}
