//! QAOA: MaxCut and Ising encodings, penalty terms, circuit synthesis, warm starts and
//! parameter initialisation.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::sample_trajectories;
use crate::objectives::{ObjectiveSpec, SampleEntry, SampleSet};
use crate::optimizers::{minimize, Evaluation, OptimizationTrace, OptimizerConfig, TraceRecord};
use crate::pauli::{index_to_bitstring, Observable, PauliAxis, PauliString};
use crate::rng::{derive_seed, seeded};
use crate::simulator::{Circuit, Gate, NoiseModel, SampleCounts};

/// Largest graph handled by the brute-force max-cut scan.
pub const MAX_CUT_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedGraph {
    n_nodes: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Edges are stored with `i < j`; self-loops and repeated pairs are rejected.
    pub fn new(
        n_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        if n_nodes == 0 || n_nodes > crate::simulator::MAX_QUBITS {
            return Err(Error::invalid(format!(
                "graph needs 1..={} nodes, got {n_nodes}",
                crate::simulator::MAX_QUBITS
            )));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for (a, b, w) in edges {
            let (i, j) = (a.min(b), a.max(b));
            if j >= n_nodes {
                return Err(Error::InvalidQubit {
                    index: j,
                    n_qubits: n_nodes,
                });
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop on node {i}")));
            }
            if !w.is_finite() {
                return Err(Error::invalid(format!("edge ({i}, {j}) has weight {w}")));
            }
            if !seen.insert((i, j)) {
                return Err(Error::invalid(format!("duplicate edge ({i}, {j})")));
            }
            out.push((i, j, w));
        }
        Ok(Self {
            n_nodes,
            edges: out,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.2).sum()
    }

    /// `n_nodes` on the first line, then one `i j weight` per line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing node count".into(),
        })?;
        let n: usize = header.parse().map_err(|_| Error::Parse {
            line: first,
            message: format!("bad node count '{header}'"),
        })?;
        let mut edges = Vec::new();
        for (line, l) in lines {
            let f: Vec<&str> = l.split_whitespace().collect();
            let bad = |message: String| Error::Parse { line, message };
            if f.len() != 3 {
                return Err(bad(format!("expected 'i j weight', got '{l}'")));
            }
            let i = f[0]
                .parse::<usize>()
                .map_err(|_| bad(format!("bad node '{}'", f[0])))?;
            let j = f[1]
                .parse::<usize>()
                .map_err(|_| bad(format!("bad node '{}'", f[1])))?;
            let w = f[2]
                .parse::<f64>()
                .map_err(|_| bad(format!("bad weight '{}'", f[2])))?;
            edges.push((i, j, w));
        }
        Self::new(n, edges)
    }

    /// Cut weight of a partition given as a bitstring (node 0 leftmost).
    pub fn cut_value(&self, bits: &str) -> Result<f64> {
        let index = crate::pauli::bitstring_to_index(bits, self.n_nodes)?;
        Ok(self.cut_value_index(index))
    }

    pub fn cut_value_index(&self, index: usize) -> f64 {
        self.edges
            .iter()
            .filter(|(i, j, _)| (index >> i & 1) != (index >> j & 1))
            .map(|e| e.2)
            .sum()
    }

    /// Exhaustive maximum cut with all optimal partitions, sorted.
    pub fn max_cut(&self) -> Result<(f64, Vec<String>)> {
        if self.n_nodes > MAX_CUT_LIMIT {
            return Err(Error::SizeLimit {
                what: "brute-force max cut",
                limit: MAX_CUT_LIMIT,
                requested: self.n_nodes,
            });
        }
        let cuts: Vec<f64> = (0..1usize << self.n_nodes)
            .map(|i| self.cut_value_index(i))
            .collect();
        let best = cuts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut argmax: Vec<String> = cuts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= best - 1e-9)
            .map(|(i, _)| index_to_bitstring(i, self.n_nodes))
            .collect();
        argmax.sort();
        Ok((best, argmax))
    }

    /// Uniform random `degree`-regular graph with unit weights (pairing model with rejection).
    pub fn random_regular(n_nodes: usize, degree: usize, seed: u64) -> Result<Self> {
        if degree >= n_nodes || !(n_nodes * degree).is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "no {degree}-regular graph on {n_nodes} nodes"
            )));
        }
        let mut rng = seeded(seed);
        let mut stubs: Vec<usize> = (0..n_nodes)
            .flat_map(|v| std::iter::repeat_n(v, degree))
            .collect();
        'attempt: for _ in 0..10_000 {
            stubs.shuffle(&mut rng);
            let mut seen = BTreeSet::new();
            for pair in stubs.chunks(2) {
                let (i, j) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                if i == j || !seen.insert((i, j)) {
                    continue 'attempt;
                }
            }
            return Self::new(n_nodes, seen.into_iter().map(|(i, j)| (i, j, 1.0)));
        }
        Err(Error::invalid("failed to sample a simple regular graph"))
    }
}

impl fmt::Display for WeightedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n_nodes)?;
        for (i, j, w) in &self.edges {
            writeln!(f, "{i} {j} {w}")?;
        }
        Ok(())
    }
}

/// A diagonal cost Hamiltonian to be minimised.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingProblem {
    hamiltonian: Observable,
}

impl IsingProblem {
    pub fn new(hamiltonian: Observable) -> Result<Self> {
        if !hamiltonian.is_diagonal() {
            return Err(Error::NotDiagonal);
        }
        Ok(Self { hamiltonian })
    }

    pub fn hamiltonian(&self) -> &Observable {
        &self.hamiltonian
    }

    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    pub fn energy(&self, bits: &str) -> Result<f64> {
        self.hamiltonian.eval_bitstring(bits)
    }

    /// Adds the penalty for `constraint` to the cost.
    pub fn with_penalty(&self, constraint: &LinearConstraint) -> Result<Self> {
        let p = penalty_observable(constraint, self.n_qubits())?;
        Self::new(self.hamiltonian.plus(&p)?.simplify())
    }
}

/// Cost `−C(z)` with `C = Σ ½w(1 − z_i z_j)`.
pub fn maxcut_to_ising(g: &WeightedGraph) -> IsingProblem {
    let n = g.n_nodes();
    let mut h = Observable::new(n).expect("graph size is a valid register");
    for &(i, j, w) in g.edges() {
        let zz = PauliString::from_sparse(n, &[(i, PauliAxis::Z), (j, PauliAxis::Z)])
            .expect("edge endpoints are distinct and in range");
        h.add_term(0.5 * w, zz).expect("finite weight");
    }
    h.add_constant(-0.5 * g.total_weight())
        .expect("finite weight");
    IsingProblem { hamiltonian: h }
}

/// Soft constraint `P₁ (k − Σ_{q∈S} x_q)²` on binary variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub target: i64,
    pub qubits: Vec<usize>,
    pub penalty_weight: f64,
}

impl LinearConstraint {
    pub fn new(target: i64, qubits: Vec<usize>, penalty_weight: f64) -> Result<Self> {
        if !(penalty_weight > 0.0 && penalty_weight.is_finite()) {
            return Err(Error::invalid(format!(
                "penalty weight {penalty_weight} must be positive"
            )));
        }
        let distinct: BTreeSet<_> = qubits.iter().collect();
        if distinct.len() != qubits.len() {
            return Err(Error::invalid("constraint lists a qubit twice"));
        }
        Ok(Self {
            target,
            qubits,
            penalty_weight,
        })
    }

    /// Direct arithmetic value of the penalty on a basis index.
    pub fn penalty_at(&self, index: usize) -> f64 {
        let ones = self.qubits.iter().filter(|&&q| index >> q & 1 == 1).count() as f64;
        self.penalty_weight * (self.target as f64 - ones).powi(2)
    }
}

/// `k=K,qubits=0,1,2,weight=W`. Bare numbers after `qubits=` extend the qubit list.
impl FromStr for LinearConstraint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut target = None;
        let mut weight = None;
        let mut qubits = Vec::new();
        let mut key = "";
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let value = match item.split_once('=') {
                Some((k, v)) => {
                    key = k.trim();
                    v.trim()
                }
                None => item,
            };
            let bad = || Error::invalid(format!("bad constraint field '{item}'"));
            match key {
                "k" => target = Some(value.parse::<i64>().map_err(|_| bad())?),
                "weight" => weight = Some(value.parse::<f64>().map_err(|_| bad())?),
                "qubits" => qubits.push(value.parse::<usize>().map_err(|_| bad())?),
                _ => return Err(bad()),
            }
        }
        Self::new(
            target.ok_or_else(|| Error::invalid("constraint needs k="))?,
            qubits,
            weight.ok_or_else(|| Error::invalid("constraint needs weight="))?,
        )
    }
}

/// Expands the penalty with `x_q = (1 − Z_q)/2` through the Pauli algebra.
pub fn penalty_observable(c: &LinearConstraint, n_qubits: usize) -> Result<Observable> {
    let mut linear = Observable::constant_only(n_qubits, c.target as f64)?;
    for &q in &c.qubits {
        // k − x_q = k − ½ + ½ Z_q
        linear.add_constant(-0.5)?;
        linear.add_term(
            0.5,
            PauliString::from_sparse(n_qubits, &[(q, PauliAxis::Z)])?,
        )?;
    }
    Ok(linear.product(&linear)?.scaled(c.penalty_weight).simplify())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl QaoaParams {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != betas.len() {
            return Err(Error::invalid(format!(
                "need p ≥ 1 equal-length angle lists, got {} gammas and {} betas",
                gammas.len(),
                betas.len()
            )));
        }
        Ok(Self { gammas, betas })
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    /// `[γ₁ … γ_p, β₁ … β_p]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if !flat.len().is_multiple_of(2) {
            return Err(Error::invalid("flat QAOA parameters must have even length"));
        }
        let (g, b) = flat.split_at(flat.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }
}

/// Relaxed solution used to warm-start the state and the mixer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    thetas: Vec<f64>,
}

impl WarmStart {
    pub fn new(c_star: &[f64]) -> Result<Self> {
        let thetas = c_star
            .iter()
            .map(|&c| {
                if (0.0..=1.0).contains(&c) {
                    Ok(2.0 * c.sqrt().asin())
                } else {
                    Err(Error::invalid(format!(
                        "warm-start value {c} is outside [0, 1]"
                    )))
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { thetas })
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    fn push_prep(&self, c: &mut Circuit) -> Result<()> {
        for (q, &t) in self.thetas.iter().enumerate() {
            c.push(Gate::Ry(q, t))?;
        }
        Ok(())
    }

    /// `exp(−iβ(−sinθ X − cosθ Z))` per qubit, as `RY(θ)·RZ(−2β)·RY(−θ)`.
    fn push_mixer(&self, c: &mut Circuit, beta: f64) -> Result<()> {
        for (q, &t) in self.thetas.iter().enumerate() {
            c.push(Gate::Ry(q, -t))?;
            c.push(Gate::Rz(q, -2.0 * beta))?;
            c.push(Gate::Ry(q, t))?;
        }
        Ok(())
    }
}

pub fn warm_start_state_prep(c_star: &[f64]) -> Result<Circuit> {
    let ws = WarmStart::new(c_star)?;
    let mut c = Circuit::new(c_star.len());
    ws.push_prep(&mut c)?;
    Ok(c)
}

pub fn warm_start_mixer_layer(c_star: &[f64], beta: f64) -> Result<Circuit> {
    let ws = WarmStart::new(c_star)?;
    let mut c = Circuit::new(c_star.len());
    ws.push_mixer(&mut c, beta)?;
    Ok(c)
}

pub fn build_qaoa_circuit(problem: &IsingProblem, params: &QaoaParams) -> Result<Circuit> {
    build_qaoa_circuit_with(problem, params, None)
}

/// Cost layers use a CNOT ladder onto the last qubit of each term's support, so `Z_iZ_j`
/// becomes `CNOT·RZ(2cγ)·CNOT`. Constants are a global phase and are skipped.
pub fn build_qaoa_circuit_with(
    problem: &IsingProblem,
    params: &QaoaParams,
    warm: Option<&WarmStart>,
) -> Result<Circuit> {
    let h = problem.hamiltonian();
    if !h.is_diagonal() {
        return Err(Error::NotDiagonal);
    }
    let n = h.n_qubits();
    if let Some(ws) = warm {
        if ws.thetas.len() != n {
            return Err(Error::Dimension {
                expected: n,
                found: ws.thetas.len(),
            });
        }
    }
    let mut c = Circuit::new(n);
    match warm {
        Some(ws) => ws.push_prep(&mut c)?,
        None => {
            for q in 0..n {
                c.push(Gate::H(q))?;
            }
        }
    }
    for (&gamma, &beta) in params.gammas.iter().zip(&params.betas) {
        for term in h.terms() {
            let support = term.string.support();
            let Some((&last, rest)) = support.split_last() else {
                continue;
            };
            let ladder: Vec<Gate> = rest
                .iter()
                .zip(&support[1..])
                .map(|(&a, &b)| Gate::Cnot {
                    control: a,
                    target: b,
                })
                .collect();
            for g in &ladder {
                c.push(*g)?;
            }
            c.push(Gate::Rz(last, 2.0 * term.coefficient * gamma))?;
            for g in ladder.iter().rev() {
                c.push(*g)?;
            }
        }
        match warm {
            Some(ws) => ws.push_mixer(&mut c, beta)?,
            None => {
                for q in 0..n {
                    c.push(Gate::Rx(q, 2.0 * beta))?;
                }
            }
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitStrategy {
    /// Uniform in `[0, 2π)`.
    Random { seed: u64 },
    /// `γ_j = Δ·j/(p+1)`, `β_j = (1−Δ)·j/(p+1)`.
    Schedule { delta: f64 },
    /// Linear resampling of optimal depth-`(p−1)` angles.
    Interp { previous: QaoaParams },
    /// Layer-by-layer training; new layers start from the schedule with this `Δ`.
    Lbl { delta: f64 },
}

impl fmt::Display for InitStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitStrategy::Random { seed } => write!(f, "random:{seed}"),
            InitStrategy::Schedule { delta } => write!(f, "schedule:{delta}"),
            InitStrategy::Interp { previous } => write!(f, "interp(p={})", previous.p()),
            InitStrategy::Lbl { delta } => write!(f, "lbl:{delta}"),
        }
    }
}

pub fn schedule_params(delta: f64, p: usize) -> Result<QaoaParams> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::invalid(format!(
            "schedule Δ = {delta} must lie in [0, 1]"
        )));
    }
    let f = |j: usize| j as f64 / (p + 1) as f64;
    QaoaParams::new(
        (1..=p).map(|j| delta * f(j)).collect(),
        (1..=p).map(|j| (1.0 - delta) * f(j)).collect(),
    )
}

/// Piecewise-linear resampling of `values` onto `len` points. Input value `j` (1-based) sits
/// at `j/(m+1)` and the origin is pinned to 0, so any line through the origin is reproduced
/// exactly. Points beyond the last knot extend its final segment.
pub fn interp_resample(values: &[f64], len: usize) -> Vec<f64> {
    let m = values.len();
    let knots: Vec<(f64, f64)> = std::iter::once((0.0, 0.0))
        .chain(
            values
                .iter()
                .enumerate()
                .map(|(j, &v)| ((j + 1) as f64 / (m + 1) as f64, v)),
        )
        .collect();
    (1..=len)
        .map(|i| {
            let x = i as f64 / (len + 1) as f64;
            let seg = knots
                .windows(2)
                .position(|w| x <= w[1].0)
                .unwrap_or(knots.len() - 2);
            let ((x0, y0), (x1, y1)) = (knots[seg], knots[seg + 1]);
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        })
        .collect()
}

pub fn init_params(strategy: &InitStrategy, p: usize) -> Result<QaoaParams> {
    if p == 0 {
        return Err(Error::invalid("QAOA depth p must be at least 1"));
    }
    match strategy {
        InitStrategy::Random { seed } => {
            let mut rng = seeded(*seed);
            let mut draw = || {
                (0..p)
                    .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
                    .collect()
            };
            let gammas = draw();
            let betas = draw();
            QaoaParams::new(gammas, betas)
        }
        InitStrategy::Schedule { delta } | InitStrategy::Lbl { delta } => {
            schedule_params(*delta, p)
        }
        InitStrategy::Interp { previous } => {
            if previous.p() + 1 != p {
                return Err(Error::invalid(format!(
                    "interp to depth {p} needs depth-{} parameters, got depth {}",
                    p - 1,
                    previous.p()
                )));
            }
            QaoaParams::new(
                interp_resample(&previous.gammas, p),
                interp_resample(&previous.betas, p),
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaConfig {
    pub p: usize,
    pub init: InitStrategy,
    pub optimizer: OptimizerConfig,
    pub objective: ObjectiveSpec,
    pub shots: usize,
    pub seed: u64,
    pub warm_start: Option<Vec<f64>>,
    pub noise: Option<NoiseModel>,
}

impl QaoaConfig {
    pub fn new(p: usize, init: InitStrategy, shots: usize, seed: u64) -> Self {
        Self {
            p,
            init,
            optimizer: OptimizerConfig::nelder_mead(),
            objective: ObjectiveSpec::Expectation,
            shots,
            seed,
            warm_start: None,
            noise: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaResult {
    pub best_params: QaoaParams,
    pub best_objective: f64,
    /// Lowest-energy bitstring observed over the whole run (first seen wins ties).
    pub solution_bitstring: String,
    pub solution_cost: f64,
    pub trace: OptimizationTrace,
}

/// Sampler and running record of the best observed bitstring.
struct QaoaRun<'a> {
    problem: &'a IsingProblem,
    config: &'a QaoaConfig,
    warm: Option<WarmStart>,
    calls: u64,
    best: Option<(String, f64)>,
    failure: Option<Error>,
}

impl QaoaRun<'_> {
    fn sample(&self, params: &QaoaParams, seed: u64) -> Result<SampleCounts> {
        let circuit = build_qaoa_circuit_with(self.problem, params, self.warm.as_ref())?;
        match self.config.noise {
            Some(m) if m.has_gate_noise() => {
                sample_trajectories(&circuit, &m, self.config.shots, seed)
            }
            noise => circuit
                .run()?
                .sample(self.config.shots, noise.as_ref(), seed),
        }
    }

    fn evaluate(&mut self, flat: &[f64]) -> Result<f64> {
        self.calls += 1;
        let params = QaoaParams::from_flat(flat)?;
        let counts = self.sample(&params, derive_seed(self.config.seed, self.calls))?;
        let h = self.problem.hamiltonian();
        let mut entries = Vec::with_capacity(counts.counts.len());
        for (bits, &count) in &counts.counts {
            let energy = h.eval_bitstring(bits)?;
            if self.best.as_ref().is_none_or(|(_, e)| energy < *e) {
                self.best = Some((bits.clone(), energy));
            }
            entries.push(SampleEntry {
                bitstring: bits.clone(),
                energy,
                count,
            });
        }
        self.config.objective.evaluate(&SampleSet::new(entries)?)
    }

    fn optimize(&mut self, x0: &QaoaParams) -> Result<OptimizationTrace> {
        let shots = self.config.shots as u64;
        let optimizer = self.config.optimizer.clone();
        let trace = minimize(
            |x: &[f64]| {
                let value = match self.evaluate(x) {
                    Ok(v) => v,
                    Err(e) => {
                        self.failure.get_or_insert(e);
                        f64::NAN
                    }
                };
                Evaluation { value, shots }
            },
            &x0.to_flat(),
            &optimizer,
        )?;
        match self.failure.take() {
            Some(e) => Err(e),
            None => Ok(trace),
        }
    }
}

pub fn run_qaoa(problem: &IsingProblem, config: &QaoaConfig) -> Result<QaoaResult> {
    config.objective.validate()?;
    if config.shots == 0 {
        return Err(Error::invalid(
            "QAOA needs at least one shot per evaluation",
        ));
    }
    if let Some(m) = &config.noise {
        m.validate()?;
    }
    let warm = config
        .warm_start
        .as_deref()
        .map(WarmStart::new)
        .transpose()?;
    let mut run = QaoaRun {
        problem,
        config,
        warm,
        calls: 0,
        best: None,
        failure: None,
    };

    let trace = match &config.init {
        InitStrategy::Lbl { delta } => {
            let mut params = schedule_params(*delta, 1)?;
            let mut trace = run.optimize(&params)?;
            for depth in 2..=config.p {
                params = QaoaParams::from_flat(&trace.best_params)?;
                let fresh = depth as f64 / (depth + 1) as f64;
                params.gammas.push(delta * fresh);
                params.betas.push((1.0 - delta) * fresh);
                trace = append_stage(trace, run.optimize(&params)?);
            }
            trace
        }
        other => run.optimize(&init_params(other, config.p)?)?,
    };

    let (solution_bitstring, solution_cost) = run.best.expect("at least one evaluation ran");
    Ok(QaoaResult {
        best_params: QaoaParams::from_flat(&trace.best_params)?,
        best_objective: trace.best_value,
        solution_bitstring,
        solution_cost,
        trace,
    })
}

/// Concatenates a later LBL stage onto the running trace. The best point is the final
/// stage's, since earlier stages have fewer parameters.
fn append_stage(earlier: OptimizationTrace, later: OptimizationTrace) -> OptimizationTrace {
    let offset = earlier.iterations.len();
    let (evals, shots) = earlier
        .iterations
        .last()
        .map_or((0, 0), |r| (r.evaluations, r.shots));
    let mut iterations = earlier.iterations;
    iterations.extend(later.iterations.into_iter().map(|r| TraceRecord {
        iteration: r.iteration + offset,
        evaluations: r.evaluations + evals,
        shots: r.shots + shots,
        ..r
    }));
    OptimizationTrace {
        iterations,
        best_params: later.best_params,
        best_value: later.best_value,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    pub expected_cut: f64,
    pub max_cut: f64,
    pub ratio: f64,
}

/// Applies fixed angles to each graph and reports sampled mean cut over the exact maximum.
/// Graphs without edges have ratio 1.
pub fn evaluate_transfer(
    params: &QaoaParams,
    graphs: &[WeightedGraph],
    shots: usize,
    seed: u64,
) -> Result<Vec<TransferResult>> {
    if shots == 0 {
        return Err(Error::invalid(
            "transfer evaluation needs at least one shot",
        ));
    }
    if let Some(g) = graphs.iter().find(|g| g.n_nodes() > MAX_CUT_LIMIT) {
        return Err(Error::SizeLimit {
            what: "brute-force max cut",
            limit: MAX_CUT_LIMIT,
            requested: g.n_nodes(),
        });
    }
    graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            let (max_cut, _) = g.max_cut()?;
            let problem = maxcut_to_ising(g);
            let counts = build_qaoa_circuit(&problem, params)?.run()?.sample(
                shots,
                None,
                derive_seed(seed, i as u64),
            )?;
            let expected_cut = counts
                .index_counts()
                .map(|(idx, c)| g.cut_value_index(idx) * c as f64)
                .sum::<f64>()
                / shots as f64;
            let ratio = if max_cut.abs() < 1e-12 {
                1.0
            } else {
                expected_cut / max_cut
            };
            Ok(TransferResult {
                expected_cut,
                max_cut,
                ratio,
            })
        })
        .collect()
}
