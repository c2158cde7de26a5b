//! Experiment subcommands. Each one merges flags over an optional JSON config, validates
//! everything up front, then runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::json;
use varqlab::derive_seed;
use varqlab::measurement::{
    allocate_shots, group_terms, shots_required as required_shots, three_stage_plan,
    AllocationStrategy, GroupingStrategy, MeasurementGroup,
};
use varqlab::mitigation::{zne_estimate, FitModel, NoiseScale, ZneConfig};
use varqlab::objectives::ObjectiveSpec;
use varqlab::optimizers::{Method, OptimizerConfig};
use varqlab::pauli::{bitstring_to_index, Observable};
use varqlab::qaoa::{
    evaluate_transfer, init_params, maxcut_to_ising, run_qaoa, InitStrategy, IsingProblem,
    LinearConstraint, QaoaConfig, QaoaParams, WarmStart, WeightedGraph, MAX_CUT_LIMIT,
};
use varqlab::simulator::Circuit;
use varqlab::vqe::{exact_ground_energy, run_vqe, AnsatzKind, AnsatzSpec, VqeEstimator};

use crate::config::{
    load_observable, merge_with_file, parse_noise, read_file, CliError, List, Problems, Shots,
};
use crate::report::{write_trace, Report};

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct VqeArgs {
    /// JSON config file; flags given on the command line override its fields.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Hamiltonian file, one `<coeff> <term>` per line.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// `single_ry`, `layered` or `layered:<L>`.
    #[arg(long)]
    pub ansatz: Option<String>,
    /// `gd` or `nm`.
    #[arg(long)]
    pub optimizer: Option<String>,
    /// `exact` or shots per energy evaluation.
    #[arg(long)]
    pub shots: Option<Shots>,
    /// `expectation`, `cvar:<alpha>` or `gibbs[:<eta>]`.
    #[arg(long)]
    pub objective: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to 3 for sampled runs and 1 otherwise.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_evaluations: Option<usize>,
    #[arg(long)]
    pub step_size: Option<f64>,
    /// `qwc` or `one_per_term`.
    #[arg(long)]
    pub grouping: Option<String>,
    /// `proportional` or `uniform`.
    #[arg(long)]
    pub allocation: Option<String>,
    /// `none`, `default` or `p1=..,p2=..,ro0=..,ro1=..`.
    #[arg(long)]
    pub noise: Option<String>,
    /// Starting angles, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    pub initial: Option<List<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

impl VqeArgs {
    fn fill_defaults(&mut self) {
        let sampled = matches!(self.shots, Some(Shots::Count(_)));
        self.ansatz.get_or_insert_with(|| "single_ry".into());
        self.optimizer.get_or_insert_with(|| "gd".into());
        self.shots.get_or_insert(Shots::Exact);
        self.objective.get_or_insert_with(|| "expectation".into());
        self.restarts.get_or_insert(if sampled { 3 } else { 1 });
        self.max_evaluations.get_or_insert(1000);
        self.step_size.get_or_insert(0.1);
        self.grouping.get_or_insert_with(|| "qwc".into());
        self.allocation.get_or_insert_with(|| "proportional".into());
        self.noise.get_or_insert_with(|| "none".into());
    }
}

struct VqePlan {
    obs: Observable,
    spec: AnsatzSpec,
    opt: OptimizerConfig,
    estimator: VqeEstimator,
    objective: ObjectiveSpec,
    initial: Option<Vec<f64>>,
}

fn validate_vqe(a: &VqeArgs) -> Result<VqePlan, CliError> {
    let mut p = Problems::default();
    let obs = p
        .require("hamiltonian", a.hamiltonian.as_deref())
        .and_then(|path| p.check("hamiltonian", load_observable(path)));
    let kind = p.check(
        "ansatz",
        a.ansatz
            .as_deref()
            .unwrap_or_default()
            .parse::<AnsatzKind>(),
    );
    let spec = match (kind, &obs) {
        (Some(k), Some(o)) => p.check("ansatz", AnsatzSpec::new(k, o.n_qubits())),
        _ => None,
    };
    let method = p.check(
        "optimizer",
        a.optimizer.as_deref().unwrap_or_default().parse::<Method>(),
    );
    let objective = p.check(
        "objective",
        a.objective
            .as_deref()
            .unwrap_or_default()
            .parse::<ObjectiveSpec>(),
    );
    let grouping = p.check(
        "grouping",
        a.grouping
            .as_deref()
            .unwrap_or_default()
            .parse::<GroupingStrategy>(),
    );
    let allocation = p.check(
        "allocation",
        a.allocation
            .as_deref()
            .unwrap_or_default()
            .parse::<AllocationStrategy>(),
    );
    let noise = p
        .check("noise", parse_noise(a.noise.as_deref().unwrap_or("none")))
        .flatten();
    let shots = a.shots.unwrap_or(Shots::Exact);
    if let Shots::Exact = shots {
        if noise.is_some() {
            p.push("noise: the exact estimator is noiseless; give a shot count to simulate noise");
        }
        if objective.is_some_and(|o| !o.is_expectation()) {
            p.push("objective: CVaR and Gibbs objectives need sampled shots");
        }
    } else if a.seed.is_none() {
        p.push("seed: required for sampled runs");
    }
    if let (Some(init), Some(s)) = (&a.initial, &spec) {
        if init.0.len() != s.parameter_count() {
            p.push(format!(
                "initial: {} angles given, ansatz has {} parameters",
                init.0.len(),
                s.parameter_count()
            ));
        }
    }
    let opt = method.map(|method| OptimizerConfig {
        method,
        step_size: a.step_size.unwrap_or(0.1),
        max_evaluations: a.max_evaluations.unwrap_or(1000),
        restarts: a.restarts.unwrap_or(1),
        seed: a.seed.unwrap_or(0),
        ..OptimizerConfig::default()
    });
    if let Some(o) = &opt {
        p.check("optimizer", o.validate());
    }
    p.finish()?;
    let estimator = match shots {
        Shots::Exact => VqeEstimator::Exact,
        Shots::Count(n) => VqeEstimator::Sampled {
            shots: n,
            seed: a.seed.unwrap_or_default(),
            noise,
            grouping: grouping.unwrap(),
            allocation: allocation.unwrap(),
        },
    };
    Ok(VqePlan {
        obs: obs.unwrap(),
        spec: spec.unwrap(),
        opt: opt.unwrap(),
        estimator,
        objective: objective.unwrap(),
        initial: a.initial.clone().map(|l| l.0),
    })
}

#[derive(Serialize)]
struct VqeResults {
    n_qubits: usize,
    n_parameters: usize,
    best_energy: f64,
    best_energy_std_error: f64,
    best_objective: f64,
    best_params: Vec<f64>,
    exact_ground: Option<f64>,
    gap_to_exact: Option<f64>,
    evaluations: usize,
    total_shots: u64,
}

pub fn vqe_run(args: VqeArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut a = merge_with_file(&args, args.config.as_deref())?;
    a.fill_defaults();
    let plan = validate_vqe(&a)?;
    let res = run_vqe(
        &plan.obs,
        &plan.spec,
        &plan.opt,
        plan.estimator,
        plan.objective,
        plan.initial.as_deref(),
    )?;
    if let Some(path) = &a.trace {
        write_trace(path, &res.trace)?;
    }
    let results = VqeResults {
        n_qubits: plan.obs.n_qubits(),
        n_parameters: plan.spec.parameter_count(),
        best_energy: res.best_energy,
        best_energy_std_error: res.best_energy_std_error,
        best_objective: res.best_objective,
        best_params: res.best_params.clone(),
        exact_ground: res.exact_ground,
        gap_to_exact: res.gap_to_exact,
        evaluations: res.trace.evaluations(),
        total_shots: res.trace.shots(),
    };
    let seed = matches!(a.shots, Some(Shots::Count(_)))
        .then_some(a.seed)
        .flatten();
    Report::new("vqe run", &a, results, seed, start).emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct QaoaArgs {
    /// JSON config file; flags given on the command line override its fields.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// MaxCut instance: first line the node count, then `i j w` per edge.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Diagonal (Z-only) cost Hamiltonian, as an alternative to `--graph`.
    #[arg(long)]
    pub hamiltonian: Option<PathBuf>,
    /// Circuit depth.
    #[arg(long)]
    pub p: Option<usize>,
    /// `schedule:<delta>`, `random[:<seed>]`, `interp:<gammas>/<betas>` or `lbl:<delta>`.
    #[arg(long)]
    pub init: Option<String>,
    /// `expectation`, `cvar:<alpha>` or `gibbs[:<eta>]`.
    #[arg(long)]
    pub objective: Option<String>,
    /// Shots per objective evaluation.
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `nm` or `gd`.
    #[arg(long)]
    pub optimizer: Option<String>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_evaluations: Option<usize>,
    /// Relaxed solution c* in [0, 1], one value per qubit.
    #[arg(long)]
    pub warm_start: Option<List<f64>>,
    /// Penalty for `sum of x_i over qubits = k`: `k=K,qubits=0,1,2,weight=W`.
    #[arg(long)]
    pub constraint: Option<String>,
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

impl QaoaArgs {
    fn fill_defaults(&mut self) {
        self.p.get_or_insert(1);
        self.init.get_or_insert_with(|| "schedule:0.5".into());
        self.objective.get_or_insert_with(|| "expectation".into());
        self.shots.get_or_insert(1000);
        self.optimizer.get_or_insert_with(|| "nm".into());
        self.restarts.get_or_insert(3);
        self.max_evaluations.get_or_insert(1000);
        self.noise.get_or_insert_with(|| "none".into());
    }
}

fn parse_init(s: &str, seed: u64) -> Result<InitStrategy, String> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, v)) => (k.trim(), Some(v.trim())),
        None => (s.trim(), None),
    };
    let number = |v: Option<&str>| -> Result<f64, String> {
        let v = v.ok_or_else(|| format!("'{kind}' needs a value, e.g. {kind}:0.5"))?;
        v.parse().map_err(|_| format!("bad number '{v}'"))
    };
    match kind {
        "schedule" => Ok(InitStrategy::Schedule {
            delta: number(arg)?,
        }),
        "lbl" => Ok(InitStrategy::Lbl {
            delta: number(arg)?,
        }),
        "random" => Ok(InitStrategy::Random {
            seed: match arg {
                Some(v) => v.parse().map_err(|_| format!("bad seed '{v}'"))?,
                None => seed,
            },
        }),
        "interp" => {
            let arg = arg.ok_or("interp needs previous angles, e.g. interp:0.4/0.3")?;
            let (g, b) = arg
                .split_once('/')
                .ok_or("interp angles are written <gammas>/<betas>")?;
            let gammas: List<f64> = g.parse()?;
            let betas: List<f64> = b.parse()?;
            let previous = QaoaParams::new(gammas.0, betas.0).map_err(|e| e.to_string())?;
            Ok(InitStrategy::Interp { previous })
        }
        _ => Err(format!("unknown init strategy '{s}'")),
    }
}

fn load_graph(path: &Path) -> Result<WeightedGraph, String> {
    let text = read_file(path)?;
    WeightedGraph::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
}

struct QaoaPlan {
    graph: Option<WeightedGraph>,
    problem: IsingProblem,
    constraint: Option<LinearConstraint>,
    config: QaoaConfig,
}

fn validate_qaoa(a: &QaoaArgs) -> Result<QaoaPlan, CliError> {
    let mut p = Problems::default();
    let mut graph = None;
    let base = match (&a.graph, &a.hamiltonian) {
        (Some(g), None) => {
            graph = p.check("graph", load_graph(g));
            graph.as_ref().map(maxcut_to_ising)
        }
        (None, Some(h)) => p
            .check("hamiltonian", load_observable(h))
            .and_then(|o| p.check("hamiltonian", IsingProblem::new(o))),
        (Some(_), Some(_)) => {
            p.push("graph, hamiltonian: give exactly one");
            None
        }
        (None, None) => {
            p.push("graph: required (or hamiltonian)");
            None
        }
    };
    let constraint = match &a.constraint {
        Some(s) => p.check("constraint", s.parse::<LinearConstraint>()),
        None => None,
    };
    let problem = match (base, &constraint) {
        (Some(b), Some(c)) => p.check("constraint", b.with_penalty(c)),
        (b, _) => b,
    };
    let depth = a.p.unwrap_or(1);
    if depth == 0 {
        p.push("p: must be at least 1");
    }
    let seed = p.require("seed", a.seed);
    let init =
        seed.and_then(|s| p.check("init", parse_init(a.init.as_deref().unwrap_or_default(), s)));
    if let (Some(i), true) = (&init, depth > 0) {
        p.check("init", init_params(i, depth));
    }
    let objective = p.check(
        "objective",
        a.objective
            .as_deref()
            .unwrap_or_default()
            .parse::<ObjectiveSpec>(),
    );
    let method = p.check(
        "optimizer",
        a.optimizer.as_deref().unwrap_or_default().parse::<Method>(),
    );
    let shots = a.shots.unwrap_or(0);
    if shots == 0 {
        p.push("shots: must be positive");
    }
    let noise = p
        .check("noise", parse_noise(a.noise.as_deref().unwrap_or("none")))
        .flatten();
    if let Some(ws) = &a.warm_start {
        p.check("warm_start", WarmStart::new(&ws.0));
        if let Some(pr) = &problem {
            if ws.0.len() != pr.n_qubits() {
                p.push(format!(
                    "warm_start: {} values for {} qubits",
                    ws.0.len(),
                    pr.n_qubits()
                ));
            }
        }
    }
    let opt = method.map(|method| OptimizerConfig {
        method,
        max_evaluations: a.max_evaluations.unwrap_or(1000),
        restarts: a.restarts.unwrap_or(3),
        seed: seed.unwrap_or(0),
        ..OptimizerConfig::default()
    });
    if let Some(o) = &opt {
        p.check("optimizer", o.validate());
    }
    p.finish()?;
    let mut config = QaoaConfig::new(depth, init.unwrap(), shots, seed.unwrap());
    config.optimizer = opt.unwrap();
    config.objective = objective.unwrap();
    config.warm_start = a.warm_start.clone().map(|l| l.0);
    config.noise = noise;
    Ok(QaoaPlan {
        graph,
        problem: problem.unwrap(),
        constraint,
        config,
    })
}

#[derive(Serialize)]
struct QaoaResults {
    n_qubits: usize,
    gammas: Vec<f64>,
    betas: Vec<f64>,
    best_objective: f64,
    solution_bitstring: String,
    solution_cost: f64,
    ground_energy: Option<f64>,
    cut_value: Option<f64>,
    max_cut: Option<f64>,
    approximation_ratio: Option<f64>,
    constraint_satisfied: Option<bool>,
    trace_path: Option<PathBuf>,
    evaluations: usize,
    total_shots: u64,
}

pub fn qaoa_run(args: QaoaArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut a = merge_with_file(&args, args.config.as_deref())?;
    a.fill_defaults();
    let plan = validate_qaoa(&a)?;
    let res = run_qaoa(&plan.problem, &plan.config)?;
    if let Some(path) = &a.trace {
        write_trace(path, &res.trace)?;
    }
    let n = plan.problem.n_qubits();
    let small = n <= MAX_CUT_LIMIT;
    let (cut_value, max_cut) = match &plan.graph {
        Some(g) => (
            Some(g.cut_value(&res.solution_bitstring)?),
            if small { Some(g.max_cut()?.0) } else { None },
        ),
        None => (None, None),
    };
    let approximation_ratio = match (cut_value, max_cut) {
        (Some(c), Some(m)) if m > 0.0 => Some(c / m),
        (Some(_), Some(_)) => Some(1.0),
        _ => None,
    };
    let constraint_satisfied = match &plan.constraint {
        Some(c) => Some(c.penalty_at(bitstring_to_index(&res.solution_bitstring, n)?) == 0.0),
        None => None,
    };
    let results = QaoaResults {
        n_qubits: n,
        gammas: res.best_params.gammas.clone(),
        betas: res.best_params.betas.clone(),
        best_objective: res.best_objective,
        solution_bitstring: res.solution_bitstring.clone(),
        solution_cost: res.solution_cost,
        ground_energy: if small {
            exact_ground_energy(plan.problem.hamiltonian()).ok()
        } else {
            None
        },
        cut_value,
        max_cut,
        approximation_ratio,
        constraint_satisfied,
        trace_path: a.trace.clone(),
        evaluations: res.trace.evaluations(),
        total_shots: res.trace.shots(),
    };
    Report::new("qaoa run", &a, results, a.seed, start).emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct TransferArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub gammas: List<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub betas: List<f64>,
    /// Nodes per random regular graph.
    #[arg(long, default_value_t = 8)]
    pub nodes: usize,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Number of graphs.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn qaoa_transfer(a: TransferArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut p = Problems::default();
    let params = p.check(
        "gammas, betas",
        QaoaParams::new(a.gammas.0.clone(), a.betas.0.clone()),
    );
    let seed = p.require("seed", a.seed);
    if a.nodes > MAX_CUT_LIMIT {
        p.push(format!(
            "nodes: exact max cut is limited to {MAX_CUT_LIMIT} nodes"
        ));
    }
    if a.count == 0 {
        p.push("count: must be positive");
    }
    if a.shots == 0 {
        p.push("shots: must be positive");
    }
    let graphs: Option<Vec<WeightedGraph>> = seed.and_then(|s| {
        p.check(
            "nodes, degree",
            (0..a.count as u64)
                .map(|i| WeightedGraph::random_regular(a.nodes, a.degree, derive_seed(s, i)))
                .collect::<Result<Vec<_>, _>>(),
        )
    });
    p.finish()?;
    let (params, graphs, seed) = (params.unwrap(), graphs.unwrap(), seed.unwrap());
    let per_graph = evaluate_transfer(&params, &graphs, a.shots, seed)?;
    let mean_ratio = per_graph.iter().map(|r| r.ratio).sum::<f64>() / per_graph.len() as f64;
    let results = json!({ "mean_ratio": mean_ratio, "per_graph": per_graph });
    Report::new("qaoa transfer", &a, results, Some(seed), start).emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct GroupArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// `qwc` or `one_per_term`.
    #[arg(long, default_value = "qwc")]
    pub strategy: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn term_strings(g: &MeasurementGroup) -> Vec<String> {
    g.terms().iter().map(|t| t.to_string()).collect()
}

fn basis_string(g: &MeasurementGroup) -> String {
    g.basis().iter().map(|a| a.symbol()).collect()
}

pub fn group(a: GroupArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut p = Problems::default();
    let obs = p.check("hamiltonian", load_observable(&a.hamiltonian));
    let strategy = p.check("strategy", a.strategy.parse::<GroupingStrategy>());
    p.finish()?;
    let groups = group_terms(&obs.unwrap(), strategy.unwrap());
    let results = json!({
        "strategy": a.strategy,
        "n_groups": groups.len(),
        "groups": groups.iter().map(term_strings).collect::<Vec<_>>(),
        "bases": groups.iter().map(basis_string).collect::<Vec<_>>(),
    });
    Report::new("group", &a, results, None, start).emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct ShotPlanArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Total shots per energy evaluation.
    #[arg(long)]
    pub budget: usize,
    /// `proportional` or `uniform`.
    #[arg(long, default_value = "proportional")]
    pub strategy: String,
    /// `qwc` or `one_per_term`.
    #[arg(long, default_value = "qwc")]
    pub grouping: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn shots_plan(a: ShotPlanArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut p = Problems::default();
    let obs = p.check("hamiltonian", load_observable(&a.hamiltonian));
    let strategy = p.check("strategy", a.strategy.parse::<AllocationStrategy>());
    let grouping = p.check("grouping", a.grouping.parse::<GroupingStrategy>());
    let groups = match (&obs, grouping) {
        (Some(o), Some(g)) => Some(group_terms(o, g)),
        _ => None,
    };
    let plan = match (&groups, strategy) {
        (Some(g), Some(s)) => p.check("budget", allocate_shots(g, a.budget, s)),
        _ => None,
    };
    p.finish()?;
    let (groups, plan) = (groups.unwrap(), plan.unwrap());
    let allocations: Vec<_> = plan
        .allocations
        .iter()
        .map(|&(g, shots)| {
            json!({
                "group": g,
                "terms": term_strings(&groups[g]),
                "one_norm": groups[g].one_norm(),
                "shots": shots,
            })
        })
        .collect();
    let results = json!({
        "strategy": a.strategy,
        "grouping": a.grouping,
        "budget": plan.total_budget,
        "n_groups": groups.len(),
        "allocations": allocations,
    });
    Report::new("shots plan", &a, results, None, start).emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct ShotsRequiredArgs {
    /// Variance constant K of the single-shot estimator.
    #[arg(long)]
    pub k: f64,
    /// Target standard error.
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn shots_required(a: ShotsRequiredArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let m = required_shots(a.k, a.epsilon).map_err(|e| CliError::config(e.to_string()))?;
    Report::new("shots required", &a, json!({ "shots": m }), None, start)
        .emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct ScheduleArgs {
    /// Total energy evaluations in the run.
    #[arg(long)]
    pub evaluations: usize,
    /// Shots per evaluation in each stage.
    #[arg(long, default_value = "100,1000,10000")]
    pub stage_shots: List<usize>,
    /// Relative share of evaluations per stage.
    #[arg(long, default_value = "10,3,1")]
    pub ratio: List<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn shots_schedule(a: ScheduleArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut p = Problems::default();
    let three = |field: &str, v: &[usize], p: &mut Problems| -> Option<[usize; 3]> {
        p.check(
            field,
            <[usize; 3]>::try_from(v).map_err(|_| "expected three values"),
        )
    };
    let shots = three("stage_shots", &a.stage_shots.0, &mut p);
    let ratio = three("ratio", &a.ratio.0, &mut p);
    let plan = match (shots, ratio) {
        (Some(s), Some(r)) => p.check("evaluations", three_stage_plan(a.evaluations, s, r)),
        _ => None,
    };
    p.finish()?;
    let plan = plan.unwrap();
    let results = json!({
        "stages": plan.stages,
        "total_evaluations": plan.total_evaluations(),
        "total_shots": plan.total_shots(),
    });
    Report::new("shots schedule", &a, results, None, start).emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Default, Serialize, Deserialize, Args)]
#[serde(default, deny_unknown_fields)]
pub struct ZneArgs {
    /// JSON config file; flags given on the command line override its fields.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Gate list, one gate per line.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long)]
    pub observable: Option<PathBuf>,
    /// Odd noise scales, ascending.
    #[arg(long)]
    pub scales: Option<List<u32>>,
    /// `linear` or `quadratic`.
    #[arg(long)]
    pub fit: Option<String>,
    /// Noisy trajectories per scale.
    #[arg(long)]
    pub trajectories: Option<usize>,
    /// Shots per trajectory; omitted means each trajectory's exact expectation.
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub noise: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

impl ZneArgs {
    fn fill_defaults(&mut self) {
        let d = ZneConfig::default();
        self.scales
            .get_or_insert_with(|| List(d.scales.iter().map(|s| s.value()).collect()));
        self.fit.get_or_insert_with(|| d.fit.to_string());
        self.trajectories.get_or_insert(d.trajectories);
        self.noise.get_or_insert_with(|| "default".into());
    }
}

pub fn zne_run(args: ZneArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let mut a = merge_with_file(&args, args.config.as_deref())?;
    a.fill_defaults();
    let mut p = Problems::default();
    let circuit = p.require("circuit", a.circuit.as_deref()).and_then(|path| {
        p.check(
            "circuit",
            read_file(path).and_then(|t| {
                Circuit::parse(&t, None).map_err(|e| format!("{}: {e}", path.display()))
            }),
        )
    });
    let obs = p
        .require("observable", a.observable.as_deref())
        .and_then(|path| p.check("observable", load_observable(path)));
    let (circuit, obs) = match (circuit, obs) {
        (Some(c), Some(o)) => {
            let n = c.n_qubits().max(o.n_qubits());
            let c = p.check("circuit", Circuit::from_gates(n, c.gates().iter().copied()));
            let o = p.check("observable", Observable::parse(&o.to_string(), Some(n)));
            (c, o)
        }
        _ => (None, None),
    };
    let scales = p.check(
        "scales",
        a.scales.as_ref().map_or(Ok(Vec::new()), |l| {
            l.0.iter().map(|&s| NoiseScale::new(s)).collect()
        }),
    );
    let fit = p.check(
        "fit",
        a.fit.as_deref().unwrap_or_default().parse::<FitModel>(),
    );
    let noise = p.check(
        "noise",
        parse_noise(a.noise.as_deref().unwrap_or("default")),
    );
    let seed = p.require("seed", a.seed);
    let cfg = match (scales, fit) {
        (Some(scales), Some(fit)) => {
            let cfg = ZneConfig {
                scales,
                fit,
                trajectories: a.trajectories.unwrap_or_default(),
                shots: a.shots,
            };
            p.check("zne", cfg.validate()).map(|_| cfg)
        }
        _ => None,
    };
    p.finish()?;
    let (circuit, obs, cfg, seed) = (circuit.unwrap(), obs.unwrap(), cfg.unwrap(), seed.unwrap());
    let noise = noise
        .flatten()
        .unwrap_or_else(varqlab::simulator::NoiseModel::noiseless);
    let res = zne_estimate(&circuit, &obs, &noise, &cfg, seed)?;
    let ideal = obs.exact_expectation(&circuit.run()?)?;
    let raw = res.per_scale[0].mean;
    let results = json!({
        "extrapolated": res.extrapolated,
        "per_scale": res.per_scale,
        "raw": res.raw,
        "noiseless": ideal,
        "raw_error": (raw - ideal).abs(),
        "mitigated_error": (res.extrapolated - ideal).abs(),
    });
    Report::new("zne run", &a, results, Some(seed), start).emit(a.output.as_deref())?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub hamiltonian: PathBuf,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Diagonal Hamiltonians up to this size also report their minimising bitstrings.
const ARGMIN_LIMIT: usize = 20;

pub fn spectrum(a: SpectrumArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let obs = load_observable(&a.hamiltonian)
        .map_err(|e| CliError::config(format!("hamiltonian: {e}")))?;
    let simplified = obs.simplify();
    let ground = exact_ground_energy(&obs)?;
    let diagonal = simplified.is_diagonal();
    let ground_states = if diagonal && obs.n_qubits() <= ARGMIN_LIMIT {
        let (_, argmins) = varqlab::oracle::brute_force_min(&simplified)?;
        Some(argmins)
    } else {
        None
    };
    let results = json!({
        "n_qubits": obs.n_qubits(),
        "n_terms": simplified.terms().len(),
        "diagonal": diagonal,
        "method": if diagonal { "diagonal scan" } else { "power iteration" },
        "ground_energy": ground,
        "ground_states": ground_states,
    });
    Report::new("spectrum", &a, results, None, start).emit(a.output.as_deref())?;
    Ok(())
}
