//! From observable and prepared state to an energy estimate.
//!
//! Terms are partitioned into qubit-wise commuting groups; each group is measured with one
//! basis-rotation circuit. Shots are split across groups by a [`ShotPlan`], and the constant
//! term never consumes shots.

use std::f64::consts::FRAC_PI_2;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::{SampleEntry, SampleSet};
use crate::pauli::{index_to_bitstring, Observable, PauliAxis, PauliString, PauliTerm};
use crate::rng::seeded;
use crate::simulator::{Circuit, Gate, NoiseModel, SampleCounts};

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    terms: Vec<PauliTerm>,
    basis: Vec<PauliAxis>,
}

impl MeasurementGroup {
    fn singleton(term: PauliTerm) -> Self {
        let basis = term.string.axes().to_vec();
        Self {
            terms: vec![term],
            basis,
        }
    }

    /// Builds a group, checking that all members commute qubit-wise.
    pub fn new(terms: Vec<PauliTerm>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::invalid("a measurement group needs at least one term"))?;
        let mut group = Self::singleton(first.clone());
        for t in &terms[1..] {
            if !group.accepts(&t.string) {
                return Err(Error::invalid(format!(
                    "{} does not commute qubit-wise with the group",
                    t.string
                )));
            }
            group.insert(t.clone());
        }
        Ok(group)
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Per-qubit measurement axis (`I` where no member acts).
    pub fn basis(&self) -> &[PauliAxis] {
        &self.basis
    }

    pub fn n_qubits(&self) -> usize {
        self.basis.len()
    }

    pub fn one_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    fn accepts(&self, s: &PauliString) -> bool {
        s.axes()
            .iter()
            .zip(&self.basis)
            .all(|(&a, &b)| a == b || a.is_identity() || b.is_identity())
    }

    fn insert(&mut self, term: PauliTerm) {
        for (b, &a) in self.basis.iter_mut().zip(term.string.axes()) {
            if b.is_identity() {
                *b = a;
            }
        }
        self.terms.push(term);
    }

    /// Energy of one measured outcome (in the rotated basis) for this group.
    fn outcome_energy(&self, masks: &[(f64, usize)], index: usize) -> f64 {
        masks
            .iter()
            .map(|&(c, m)| c * PauliString::diagonal_sign(m, index))
            .sum()
    }

    fn support_masks(&self) -> Vec<(f64, usize)> {
        self.terms
            .iter()
            .map(|t| {
                let m = t
                    .string
                    .support()
                    .into_iter()
                    .fold(0usize, |acc, q| acc | (1 << q));
                (t.coefficient, m)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupingStrategy {
    OnePerTerm,
    QwcGreedy,
}

impl FromStr for GroupingStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one_per_term" | "none" => Ok(Self::OnePerTerm),
            "qwc" | "qwc_greedy" => Ok(Self::QwcGreedy),
            _ => Err(Error::invalid(format!("unknown grouping strategy '{s}'"))),
        }
    }
}

/// Partitions the non-constant terms of the simplified `obs` into measurement groups.
///
/// `QwcGreedy` is first-fit over terms sorted by descending |coefficient| (stable, so equal
/// weights keep their input order). `OnePerTerm` keeps input order.
pub fn group_terms(obs: &Observable, strategy: GroupingStrategy) -> Vec<MeasurementGroup> {
    let simplified = obs.simplify();
    let terms = simplified
        .terms()
        .iter()
        .filter(|t| !t.string.is_identity())
        .cloned();
    match strategy {
        GroupingStrategy::OnePerTerm => terms.map(MeasurementGroup::singleton).collect(),
        GroupingStrategy::QwcGreedy => {
            let mut sorted: Vec<PauliTerm> = terms.collect();
            sorted.sort_by(|a, b| b.coefficient.abs().total_cmp(&a.coefficient.abs()));
            let mut groups: Vec<MeasurementGroup> = Vec::new();
            for t in sorted {
                match groups.iter_mut().find(|g| g.accepts(&t.string)) {
                    Some(g) => g.insert(t),
                    None => groups.push(MeasurementGroup::singleton(t)),
                }
            }
            groups
        }
    }
}

/// Rotates each measured qubit into the Z basis: X → RY(-π/2), Y → RX(π/2).
pub fn basis_rotation_circuit(group: &MeasurementGroup, n_qubits: usize) -> Result<Circuit> {
    let mut c = Circuit::new(n_qubits);
    for (q, axis) in group.basis.iter().enumerate() {
        match axis {
            PauliAxis::X => c.push(Gate::Ry(q, -FRAC_PI_2))?,
            PauliAxis::Y => c.push(Gate::Rx(q, FRAC_PI_2))?,
            PauliAxis::Z | PauliAxis::I => continue,
        };
    }
    Ok(c)
}

/// Per-group result of an estimation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEstimate {
    pub group: usize,
    /// `Σ_t c_t ⟨P_t⟩` for the group's terms.
    pub contribution: f64,
    /// Mean ±1 outcome of each term, in group order.
    pub term_means: Vec<f64>,
    pub shots: usize,
    /// Unbiased per-shot variance of the group energy (0 for exact estimates).
    pub variance: f64,
}

impl GroupEstimate {
    pub fn std_error(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            (self.variance / self.shots as f64).sqrt()
        }
    }
}

fn estimate_weighted(
    group: &MeasurementGroup,
    outcomes: impl Iterator<Item = (usize, f64)> + Clone,
    shots: usize,
) -> (Vec<f64>, f64, f64) {
    let masks = group.support_masks();
    let total: f64 = outcomes.clone().map(|(_, w)| w).sum();
    let mut term_means = vec![0.0; masks.len()];
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (index, w) in outcomes {
        let mut e = 0.0;
        for (k, &(c, m)) in masks.iter().enumerate() {
            let sign = PauliString::diagonal_sign(m, index);
            term_means[k] += w * sign;
            e += c * sign;
        }
        sum += w * e;
        sum_sq += w * e * e;
    }
    term_means.iter_mut().for_each(|m| *m /= total);
    let mean = sum / total;
    let variance = if shots > 1 {
        ((sum_sq - total * mean * mean) / (total - 1.0)).max(0.0)
    } else {
        0.0
    };
    (term_means, mean, variance)
}

/// Estimates a group's terms from counts measured after its basis rotation.
pub fn estimate_from_counts(
    group: &MeasurementGroup,
    counts: &SampleCounts,
) -> Result<GroupEstimate> {
    if counts.n_qubits != group.n_qubits() {
        return Err(Error::Dimension {
            expected: group.n_qubits(),
            found: counts.n_qubits,
        });
    }
    if counts.shots == 0 || counts.counts.is_empty() {
        return Err(Error::EmptySamples);
    }
    let pairs: Vec<(usize, f64)> = counts.index_counts().map(|(i, c)| (i, c as f64)).collect();
    let (term_means, contribution, variance) =
        estimate_weighted(group, pairs.iter().copied(), counts.shots);
    Ok(GroupEstimate {
        group: 0,
        contribution,
        term_means,
        shots: counts.shots,
        variance,
    })
}

/// Exact group estimate from the probabilities of the rotated state.
pub fn estimate_from_probabilities(
    group: &MeasurementGroup,
    probabilities: &[f64],
) -> Result<GroupEstimate> {
    let dim = 1usize << group.n_qubits();
    if probabilities.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: probabilities.len(),
        });
    }
    let (term_means, contribution, _) = estimate_weighted(
        group,
        probabilities
            .iter()
            .copied()
            .enumerate()
            .filter(|&(_, p)| p > 0.0),
        0,
    );
    Ok(GroupEstimate {
        group: 0,
        contribution,
        term_means,
        shots: 0,
        variance: 0.0,
    })
}

/// Energy-labelled samples of one group (energy = the group's per-shot value).
pub fn group_samples(group: &MeasurementGroup, counts: &SampleCounts) -> Result<SampleSet> {
    let masks = group.support_masks();
    SampleSet::new(
        counts
            .index_counts()
            .map(|(i, c)| SampleEntry {
                bitstring: index_to_bitstring(i, counts.n_qubits),
                energy: group.outcome_energy(&masks, i),
                count: c,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationStrategy {
    Uniform,
    Proportional,
}

impl FromStr for AllocationStrategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "proportional" => Ok(Self::Proportional),
            _ => Err(Error::invalid(format!("unknown allocation strategy '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    /// `(group index, shots)` in group order.
    pub allocations: Vec<(usize, usize)>,
    pub total_budget: usize,
}

impl ShotPlan {
    pub fn shots_for(&self, group: usize) -> usize {
        self.allocations
            .iter()
            .find(|(g, _)| *g == group)
            .map_or(0, |(_, s)| *s)
    }
}

/// Integer split of `total` proportional to `weights`. Floors first, then hands the remainder to
/// the largest fractional parts (earliest index on ties).
pub fn largest_remainder(weights: &[f64], total: usize) -> Vec<usize> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    let quotas: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / weights.len() as f64; weights.len()]
    };
    let mut out: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (quotas[a] - quotas[a].floor(), quotas[b] - quotas[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        out[i] += 1;
    }
    out
}

/// Splits `budget` shots across groups. Every group receives at least one shot: a proportional
/// split that leaves a group empty takes shots from the largest allocation.
pub fn allocate_shots(
    groups: &[MeasurementGroup],
    budget: usize,
    strategy: AllocationStrategy,
) -> Result<ShotPlan> {
    if groups.is_empty() {
        return Ok(ShotPlan {
            allocations: Vec::new(),
            total_budget: budget,
        });
    }
    if budget < groups.len() {
        return Err(Error::invalid(format!(
            "budget {budget} is smaller than the number of groups ({})",
            groups.len()
        )));
    }
    let weights: Vec<f64> = match strategy {
        AllocationStrategy::Uniform => vec![1.0; groups.len()],
        AllocationStrategy::Proportional => groups.iter().map(|g| g.one_norm()).collect(),
    };
    let mut shots = largest_remainder(&weights, budget);
    while let Some(empty) = shots.iter().position(|&s| s == 0) {
        let donor = (0..shots.len())
            .max_by(|&a, &b| shots[a].cmp(&shots[b]).then(b.cmp(&a)))
            .expect("non-empty");
        shots[donor] -= 1;
        shots[empty] += 1;
    }
    Ok(ShotPlan {
        allocations: shots.into_iter().enumerate().collect(),
        total_budget: budget,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std_error: f64,
    pub per_group: Vec<GroupEstimate>,
}

/// How an energy is obtained from a prepared state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimatorMode {
    /// Analytic outcome probabilities of each rotated state.
    Exact,
    /// Finite shots. Group `g` uses seed `seed + g`. With a noise model every shot is its own
    /// noisy trajectory and readout errors apply.
    Sampled {
        seed: u64,
        noise: Option<NoiseModel>,
    },
}

/// Per-group measurement data in the form each consumer needs.
pub(crate) struct GroupMeasurement {
    pub estimate: GroupEstimate,
    pub counts: Option<SampleCounts>,
}

pub(crate) fn measure_groups(
    circuit: &Circuit,
    groups: &[MeasurementGroup],
    plan: &ShotPlan,
    mode: EstimatorMode,
) -> Result<Vec<GroupMeasurement>> {
    let n = circuit.n_qubits();
    if let Some(g) = groups.iter().find(|g| g.n_qubits() != n) {
        return Err(Error::Dimension {
            expected: n,
            found: g.n_qubits(),
        });
    }
    let noiseless = matches!(mode, EstimatorMode::Exact)
        || matches!(mode, EstimatorMode::Sampled { noise: None, .. })
        || matches!(mode, EstimatorMode::Sampled { noise: Some(m), .. } if !m.has_gate_noise());
    let prepared = if noiseless {
        Some(circuit.run()?)
    } else {
        None
    };

    groups
        .par_iter()
        .enumerate()
        .map(|(g, group)| {
            let rotation = basis_rotation_circuit(group, n)?;
            let (mut estimate, counts) = match mode {
                EstimatorMode::Exact => {
                    let state = rotation.run_from(prepared.clone().expect("noiseless"))?;
                    (
                        estimate_from_probabilities(group, &state.probabilities())?,
                        None,
                    )
                }
                EstimatorMode::Sampled { seed, noise } => {
                    let shots = plan.shots_for(g);
                    if shots == 0 {
                        return Err(Error::invalid(format!(
                            "shot plan gives group {g} no shots"
                        )));
                    }
                    let group_seed = seed.wrapping_add(g as u64);
                    let counts = match (&prepared, noise) {
                        (Some(state), _) => {
                            let rotated = rotation.run_from(state.clone())?;
                            rotated.sample(shots, noise.as_ref(), group_seed)?
                        }
                        (None, Some(model)) => {
                            let mut full = circuit.clone();
                            full.extend_from(&rotation)?;
                            sample_trajectories(&full, &model, shots, group_seed)?
                        }
                        (None, None) => unreachable!("noiseless sampling prepares the state"),
                    };
                    (estimate_from_counts(group, &counts)?, Some(counts))
                }
            };
            estimate.group = g;
            Ok(GroupMeasurement { estimate, counts })
        })
        .collect()
}

/// One noisy trajectory per shot. Fault-free trajectories share a single noiseless simulation.
pub(crate) fn sample_trajectories(
    circuit: &Circuit,
    noise: &NoiseModel,
    shots: usize,
    seed: u64,
) -> Result<SampleCounts> {
    let mut rng = seeded(seed);
    let clean = circuit.run()?;
    let mut tally = std::collections::BTreeMap::<usize, usize>::new();
    for _ in 0..shots {
        let state = match circuit.draw_faults(noise, &mut rng) {
            None => None,
            Some(f) => Some(circuit.run_with_faults(&f)?),
        };
        let idx = state
            .as_ref()
            .unwrap_or(&clean)
            .sample_indices(1, Some(noise), &mut rng)?[0];
        *tally.entry(idx).or_default() += 1;
    }
    SampleCounts::new(
        circuit.n_qubits(),
        tally
            .into_iter()
            .map(|(i, c)| (index_to_bitstring(i, circuit.n_qubits()), c))
            .collect(),
    )
}

/// Estimates `⟨H⟩` for the state prepared by `circuit`.
pub fn estimate_observable(
    circuit: &Circuit,
    obs: &Observable,
    groups: &[MeasurementGroup],
    plan: &ShotPlan,
    mode: EstimatorMode,
) -> Result<EnergyEstimate> {
    if obs.n_qubits() != circuit.n_qubits() {
        return Err(Error::Dimension {
            expected: obs.n_qubits(),
            found: circuit.n_qubits(),
        });
    }
    let per_group: Vec<GroupEstimate> = measure_groups(circuit, groups, plan, mode)?
        .into_iter()
        .map(|m| m.estimate)
        .collect();
    Ok(EnergyEstimate {
        value: obs.offset() + per_group.iter().map(|g| g.contribution).sum::<f64>(),
        std_error: per_group
            .iter()
            .map(|g| g.std_error().powi(2))
            .sum::<f64>()
            .sqrt(),
        per_group,
    })
}

/// Number of measurements `K / ε²` needed to reach precision `ε`.
pub fn shots_required(k: f64, epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::invalid(format!(
            "precision {epsilon} must be positive"
        )));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(Error::invalid(format!(
            "K = {k} must be a non-negative number"
        )));
    }
    Ok(k / (epsilon * epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub shots: usize,
    pub fraction: f64,
    pub evaluations: usize,
}

/// Three optimisation stages with increasing shot counts per energy evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeStageSchedule {
    pub stages: [Stage; 3],
}

impl ThreeStageSchedule {
    pub fn total_evaluations(&self) -> usize {
        self.stages.iter().map(|s| s.evaluations).sum()
    }

    pub fn total_shots(&self) -> usize {
        self.stages.iter().map(|s| s.shots * s.evaluations).sum()
    }

    /// Shots for the `k`-th energy evaluation (0-based); past the end, the last stage's level.
    pub fn shots_at(&self, k: usize) -> usize {
        let mut end = 0;
        for s in &self.stages {
            end += s.evaluations;
            if k < end {
                return s.shots;
            }
        }
        self.stages[2].shots
    }
}

pub const DEFAULT_STAGE_SHOTS: [usize; 3] = [100, 1000, 10000];
pub const DEFAULT_STAGE_RATIO: [usize; 3] = [10, 3, 1];

pub fn three_stage_plan(
    total_evaluations: usize,
    shots_per_stage: [usize; 3],
    ratio: [usize; 3],
) -> Result<ThreeStageSchedule> {
    let sum: usize = ratio.iter().sum();
    if ratio.contains(&0) {
        return Err(Error::invalid("stage ratios must be positive"));
    }
    let weights: Vec<f64> = ratio.iter().map(|&r| r as f64).collect();
    let evals = largest_remainder(&weights, total_evaluations);
    if evals.contains(&0) {
        return Err(Error::invalid(format!(
            "{total_evaluations} evaluations cannot give every stage at least one"
        )));
    }
    let stage = |i: usize| Stage {
        shots: shots_per_stage[i],
        fraction: ratio[i] as f64 / sum as f64,
        evaluations: evals[i],
    };
    Ok(ThreeStageSchedule {
        stages: [stage(0), stage(1), stage(2)],
    })
}
