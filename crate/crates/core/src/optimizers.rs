//! Classical outer-loop optimisers. The objective is a black box; every call is counted.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::seeded;

/// Value returned by an objective, with the shots it consumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub shots: u64,
}

impl From<f64> for Evaluation {
    fn from(value: f64) -> Self {
        Evaluation { value, shots: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    GradientDescent,
    NelderMead,
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" | "gradient_descent" => Ok(Method::GradientDescent),
            "nm" | "nelder_mead" => Ok(Method::NelderMead),
            _ => Err(Error::invalid(format!("unknown optimizer '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub method: Method,
    pub step_size: f64,
    pub fd_epsilon: f64,
    /// Budget of objective calls, per restart.
    pub max_evaluations: usize,
    pub value_tolerance: f64,
    pub restarts: usize,
    /// Seeds the perturbed starting points of restarts after the first.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::GradientDescent,
            step_size: 0.1,
            fd_epsilon: 1e-3,
            max_evaluations: 1000,
            value_tolerance: 1e-10,
            restarts: 1,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn nelder_mead() -> Self {
        Self {
            method: Method::NelderMead,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid("step_size must be positive"));
        }
        if !(self.fd_epsilon > 0.0 && self.fd_epsilon.is_finite()) {
            return Err(Error::invalid("fd_epsilon must be positive"));
        }
        if self.max_evaluations == 0 {
            return Err(Error::invalid("max_evaluations must be at least 1"));
        }
        if self.value_tolerance.is_nan() || self.value_tolerance < 0.0 {
            return Err(Error::invalid("value_tolerance must be non-negative"));
        }
        if self.restarts == 0 {
            return Err(Error::invalid("restarts must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub params: Vec<f64>,
    pub value: f64,
    /// Objective calls so far, including this record's.
    pub evaluations: usize,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub iterations: Vec<TraceRecord>,
    pub best_params: Vec<f64>,
    pub best_value: f64,
}

impl OptimizationTrace {
    pub fn evaluations(&self) -> usize {
        self.iterations.last().map_or(0, |r| r.evaluations)
    }

    pub fn shots(&self) -> u64 {
        self.iterations.last().map_or(0, |r| r.shots)
    }

    /// Running minimum of the recorded values.
    pub fn best_so_far(&self) -> Vec<f64> {
        self.iterations
            .iter()
            .scan(f64::INFINITY, |best, r| {
                *best = best.min(r.value);
                Some(*best)
            })
            .collect()
    }
}

/// Counts calls against a budget and builds the trace.
struct Budgeted<'a, F> {
    f: &'a mut F,
    max: usize,
    evaluations: usize,
    shots: u64,
    base_evaluations: usize,
    base_shots: u64,
    trace: Vec<TraceRecord>,
}

impl<'a, F, E> Budgeted<'a, F>
where
    F: FnMut(&[f64]) -> E,
    E: Into<Evaluation>,
{
    fn new(f: &'a mut F, max: usize, base_evaluations: usize, base_shots: u64) -> Self {
        Self {
            f,
            max,
            evaluations: 0,
            shots: 0,
            base_evaluations,
            base_shots,
            trace: Vec::new(),
        }
    }

    fn remaining(&self) -> usize {
        self.max - self.evaluations
    }

    fn eval(&mut self, x: &[f64]) -> Option<f64> {
        if self.evaluations >= self.max {
            return None;
        }
        let e: Evaluation = (self.f)(x).into();
        self.evaluations += 1;
        self.shots += e.shots;
        Some(e.value)
    }

    fn record(&mut self, x: &[f64], value: f64) {
        self.trace.push(TraceRecord {
            iteration: 0,
            params: x.to_vec(),
            value,
            evaluations: self.base_evaluations + self.evaluations,
            shots: self.base_shots + self.shots,
        });
    }
}

/// Central differences, `2·dim` evaluations.
pub fn finite_diff_gradient<F>(mut f: F, x: &[f64], epsilon: f64) -> Vec<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + epsilon;
            let plus = f(&probe);
            probe[i] = x[i] - epsilon;
            let minus = f(&probe);
            probe[i] = x[i];
            (plus - minus) / (2.0 * epsilon)
        })
        .collect()
}

/// Number of consecutive small improvements that ends a gradient-descent run.
pub const STALL_WINDOW: usize = 5;

fn gradient_descent_inner<F, E>(b: &mut Budgeted<'_, F>, x0: &[f64], config: &OptimizerConfig)
where
    F: FnMut(&[f64]) -> E,
    E: Into<Evaluation>,
{
    let mut x = x0.to_vec();
    let Some(mut fx) = b.eval(&x) else { return };
    b.record(&x, fx);
    let mut stall = 0;
    // one step costs 2·dim gradient probes plus the new point
    while b.remaining() > 2 * x.len() {
        let mut grad = Vec::with_capacity(x.len());
        let mut probe = x.clone();
        for i in 0..x.len() {
            probe[i] = x[i] + config.fd_epsilon;
            let plus = b.eval(&probe).expect("budget checked");
            probe[i] = x[i] - config.fd_epsilon;
            let minus = b.eval(&probe).expect("budget checked");
            probe[i] = x[i];
            grad.push((plus - minus) / (2.0 * config.fd_epsilon));
        }
        for (xi, gi) in x.iter_mut().zip(&grad) {
            *xi -= config.step_size * gi;
        }
        let next = b.eval(&x).expect("budget checked");
        b.record(&x, next);
        if (fx - next).abs() < config.value_tolerance {
            stall += 1;
        } else {
            stall = 0;
        }
        fx = next;
        if stall >= STALL_WINDOW {
            break;
        }
    }
}

/// Reflection, expansion, contraction and shrink coefficients.
const NM_REFLECT: f64 = 1.0;
const NM_EXPAND: f64 = 2.0;
const NM_CONTRACT: f64 = 0.5;
const NM_SHRINK: f64 = 0.5;
/// Offset of the initial simplex vertices from the start point, per coordinate.
pub const NM_INITIAL_STEP: f64 = 0.25;
/// The value-spread stop also requires every vertex within this distance of the best one, so
/// a simplex straddling a symmetric minimum with tied values keeps contracting.
pub const NM_X_TOLERANCE: f64 = 1e-6;

fn nelder_mead_inner<F, E>(b: &mut Budgeted<'_, F>, x0: &[f64], config: &OptimizerConfig)
where
    F: FnMut(&[f64]) -> E,
    E: Into<Evaluation>,
{
    let dim = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let Some(f0) = b.eval(x0) else { return };
    simplex.push((x0.to_vec(), f0));
    for i in 0..dim {
        let mut v = x0.to_vec();
        v[i] += NM_INITIAL_STEP;
        match b.eval(&v) {
            Some(fv) => simplex.push((v, fv)),
            None => break,
        }
    }
    let record_best = |b: &mut Budgeted<'_, F>, simplex: &[(Vec<f64>, f64)]| {
        let best = simplex
            .iter()
            .min_by(|a, c| a.1.total_cmp(&c.1))
            .expect("non-empty simplex");
        let (x, v) = (best.0.clone(), best.1);
        b.record(&x, v);
    };
    if simplex.len() < dim + 1 {
        record_best(b, &simplex);
        return;
    }

    let point = |from: &[f64], toward: &[f64], t: f64| -> Vec<f64> {
        from.iter()
            .zip(toward)
            .map(|(c, w)| c + t * (w - c))
            .collect()
    };

    loop {
        simplex.sort_by(|a, c| a.1.total_cmp(&c.1));
        record_best(b, &simplex);
        let spread = simplex[dim].1 - simplex[0].1;
        let size = simplex[1..]
            .iter()
            .flat_map(|(v, _)| v.iter().zip(&simplex[0].0).map(|(a, c)| (a - c).abs()))
            .fold(0.0, f64::max);
        if spread.abs() < config.value_tolerance && size < NM_X_TOLERANCE {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|(v, _)| v[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();

        // x_r = c + α(c - x_w)
        let xr = point(&centroid, &worst.0, -NM_REFLECT);
        let Some(fr) = b.eval(&xr) else { break };
        if fr < simplex[0].1 {
            let xe = point(&centroid, &worst.0, -NM_EXPAND);
            let Some(fe) = b.eval(&xe) else {
                simplex[dim] = (xr, fr);
                simplex.sort_by(|a, c| a.1.total_cmp(&c.1));
                record_best(b, &simplex);
                break;
            };
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        let (xc, outside) = if fr < worst.1 {
            (point(&centroid, &xr, NM_CONTRACT), true)
        } else {
            (point(&centroid, &worst.0, NM_CONTRACT), false)
        };
        let Some(fc) = b.eval(&xc) else { break };
        let accept = if outside { fc <= fr } else { fc < worst.1 };
        if accept {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let xs = point(&best, &vertex.0, NM_SHRINK);
            match b.eval(&xs) {
                Some(fs) => *vertex = (xs, fs),
                None => break,
            }
        }
        if b.remaining() == 0 {
            simplex.sort_by(|a, c| a.1.total_cmp(&c.1));
            record_best(b, &simplex);
            break;
        }
    }
}

fn single_run<F, E>(
    f: &mut F,
    x0: &[f64],
    config: &OptimizerConfig,
    base_evaluations: usize,
    base_shots: u64,
) -> Vec<TraceRecord>
where
    F: FnMut(&[f64]) -> E,
    E: Into<Evaluation>,
{
    let mut b = Budgeted::new(f, config.max_evaluations, base_evaluations, base_shots);
    match config.method {
        Method::GradientDescent => gradient_descent_inner(&mut b, x0, config),
        Method::NelderMead => nelder_mead_inner(&mut b, x0, config),
    }
    b.trace
}

/// Runs the configured method from `x0`, then `restarts - 1` more times from points drawn
/// uniformly in `x0 ± π` (seeded by `config.seed`). Traces are concatenated.
pub fn minimize<F, E>(mut f: F, x0: &[f64], config: &OptimizerConfig) -> Result<OptimizationTrace>
where
    F: FnMut(&[f64]) -> E,
    E: Into<Evaluation>,
{
    config.validate()?;
    if let Some(bad) = x0.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite starting parameter {bad}"
        )));
    }
    let mut rng = seeded(config.seed);
    let mut records: Vec<TraceRecord> = Vec::new();
    for r in 0..config.restarts {
        let start: Vec<f64> = if r == 0 {
            x0.to_vec()
        } else {
            x0.iter().map(|v| v + rng.random_range(-PI..PI)).collect()
        };
        let (evals, shots) = records
            .last()
            .map_or((0, 0), |rec| (rec.evaluations, rec.shots));
        records.extend(single_run(&mut f, &start, config, evals, shots));
    }
    for (i, rec) in records.iter_mut().enumerate() {
        rec.iteration = i;
    }
    let best = records
        .iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .ok_or_else(|| Error::invalid("optimizer made no evaluations"))?;
    Ok(OptimizationTrace {
        best_params: best.params.clone(),
        best_value: best.value,
        iterations: records,
    })
}

/// `x ← x − step·∇f` with central-difference gradients.
pub fn gradient_descent<F, E>(
    f: F,
    x0: &[f64],
    config: &OptimizerConfig,
) -> Result<OptimizationTrace>
where
    F: FnMut(&[f64]) -> E,
    E: Into<Evaluation>,
{
    let config = OptimizerConfig {
        method: Method::GradientDescent,
        ..config.clone()
    };
    minimize(f, x0, &config)
}

pub fn nelder_mead<F, E>(f: F, x0: &[f64], config: &OptimizerConfig) -> Result<OptimizationTrace>
where
    F: FnMut(&[f64]) -> E,
    E: Into<Evaluation>,
{
    if x0.is_empty() {
        return Err(Error::invalid("Nelder-Mead needs at least one parameter"));
    }
    let config = OptimizerConfig {
        method: Method::NelderMead,
        ..config.clone()
    };
    minimize(f, x0, &config)
}
