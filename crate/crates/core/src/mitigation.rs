//! Zero-noise extrapolation by global gate folding.
//!
//! Folding replaces each gate `G` by `G (G⁻¹ G)^k`, which leaves the ideal unitary unchanged
//! and multiplies the number of fault locations by the odd scale `2k + 1`. Readout error is
//! not scaled.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    allocate_shots, basis_rotation_circuit, estimate_from_counts, group_terms, AllocationStrategy,
    GroupingStrategy,
};
use crate::pauli::Observable;
use crate::rng::{derive_seed, seeded};
use crate::simulator::{Circuit, NoiseModel, StateVector};

pub const DEFAULT_TRAJECTORIES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct NoiseScale(u32);

impl NoiseScale {
    pub fn new(lambda: u32) -> Result<Self> {
        if lambda.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "noise scale {lambda} must be odd and at least 1"
            )));
        }
        Ok(Self(lambda))
    }

    pub fn value(self) -> u32 {
        self.0
    }

    fn folds(self) -> usize {
        (self.0 as usize - 1) / 2
    }
}

impl TryFrom<u32> for NoiseScale {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        Self::new(v)
    }
}

impl From<NoiseScale> for u32 {
    fn from(s: NoiseScale) -> u32 {
        s.0
    }
}

impl fmt::Display for NoiseScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn fold_circuit(c: &Circuit, scale: NoiseScale) -> Circuit {
    let mut gates = Vec::with_capacity(c.len() * scale.0 as usize);
    for g in c.gates() {
        gates.push(*g);
        for _ in 0..scale.folds() {
            gates.push(g.inverse());
            gates.push(*g);
        }
    }
    Circuit::from_gates(c.n_qubits(), gates).expect("folding preserves gate validity")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Linear,
    Quadratic,
}

impl FitModel {
    pub fn degree(self) -> usize {
        match self {
            FitModel::Linear => 1,
            FitModel::Quadratic => 2,
        }
    }
}

impl FromStr for FitModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(FitModel::Linear),
            "quadratic" => Ok(FitModel::Quadratic),
            _ => Err(Error::invalid(format!(
                "unknown fit '{s}' (linear|quadratic)"
            ))),
        }
    }
}

impl fmt::Display for FitModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitModel::Linear => "linear",
            FitModel::Quadratic => "quadratic",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneConfig {
    pub scales: Vec<NoiseScale>,
    pub fit: FitModel,
    /// Noisy trajectories per scale.
    pub trajectories: usize,
    /// Shots per trajectory; `None` takes each trajectory's exact expectation.
    pub shots: Option<usize>,
}

impl Default for ZneConfig {
    fn default() -> Self {
        Self {
            scales: [1, 3, 5].map(NoiseScale).to_vec(),
            fit: FitModel::Linear,
            trajectories: DEFAULT_TRAJECTORIES,
            shots: None,
        }
    }
}

impl ZneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "noise scales must be distinct and ascending",
            ));
        }
        let needed = (self.fit.degree() + 1).max(2);
        if self.scales.len() < needed {
            return Err(Error::invalid(format!(
                "{} fit needs at least {needed} scales, got {}",
                self.fit,
                self.scales.len()
            )));
        }
        if self.trajectories == 0 {
            return Err(Error::invalid("trajectories must be at least 1"));
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shots per trajectory must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleEstimate {
    pub scale: NoiseScale,
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZneResult {
    pub extrapolated: f64,
    pub per_scale: Vec<ScaleEstimate>,
    /// Per-trajectory estimates, one list per scale.
    pub raw: Vec<Vec<f64>>,
}

/// Least-squares polynomial through `(x, y)` evaluated at 0. A constant `y` returns that
/// constant exactly.
pub fn extrapolate_to_zero(x: &[f64], y: &[f64], degree: usize) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < degree + 1 {
        return Err(Error::invalid(format!(
            "degree-{degree} fit needs {} points, got {}",
            degree + 1,
            x.len()
        )));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Ok(y[0]);
    }
    let a = DMatrix::from_fn(x.len(), degree + 1, |i, j| x[i].powi(j as i32));
    let b = DVector::from_column_slice(y);
    let coeffs = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::invalid(format!("fit failed: {e}")))?;
    Ok(coeffs[0])
}

/// Per-trajectory estimator of `⟨obs⟩`.
enum Estimator {
    Exact,
    Sampled {
        rotations: Vec<(crate::measurement::MeasurementGroup, Circuit, usize)>,
    },
}

impl Estimator {
    fn new(obs: &Observable, shots: Option<usize>) -> Result<Self> {
        let Some(shots) = shots.filter(|_| !obs.terms().iter().all(|t| t.string.is_identity()))
        else {
            return Ok(Estimator::Exact);
        };
        let groups = group_terms(obs, GroupingStrategy::QwcGreedy);
        let plan = allocate_shots(&groups, shots, AllocationStrategy::Proportional)?;
        let rotations = groups
            .into_iter()
            .enumerate()
            .map(|(g, group)| {
                let rot = basis_rotation_circuit(&group, obs.n_qubits())?;
                Ok((group, rot, plan.shots_for(g)))
            })
            .collect::<Result<_>>()?;
        Ok(Estimator::Sampled { rotations })
    }

    fn estimate(
        &self,
        obs: &Observable,
        state: &StateVector,
        noise: &NoiseModel,
        seed: u64,
    ) -> Result<f64> {
        if obs.terms().iter().all(|t| t.string.is_identity()) {
            return Ok(obs.offset());
        }
        match self {
            Estimator::Exact => obs.exact_expectation(state),
            Estimator::Sampled { rotations } => {
                let mut total = obs.offset();
                for (g, (group, rot, shots)) in rotations.iter().enumerate() {
                    let rotated = rot.run_from(state.clone())?;
                    let counts =
                        rotated.sample(*shots, Some(noise), derive_seed(seed, g as u64))?;
                    total += estimate_from_counts(group, &counts)?.contribution;
                }
                Ok(total)
            }
        }
    }
}

fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn zne_estimate(
    circuit: &Circuit,
    obs: &Observable,
    noise: &NoiseModel,
    cfg: &ZneConfig,
    seed: u64,
) -> Result<ZneResult> {
    cfg.validate()?;
    noise.validate()?;
    if obs.n_qubits() != circuit.n_qubits() {
        return Err(Error::Dimension {
            expected: circuit.n_qubits(),
            found: obs.n_qubits(),
        });
    }
    let estimator = Estimator::new(obs, cfg.shots)?;
    let mut per_scale = Vec::with_capacity(cfg.scales.len());
    let mut raw = Vec::with_capacity(cfg.scales.len());
    for &scale in &cfg.scales {
        let folded = fold_circuit(circuit, scale);
        let clean = folded.run()?;
        let clean_value = match estimator {
            Estimator::Exact => Some(estimator.estimate(obs, &clean, noise, 0)?),
            Estimator::Sampled { .. } => None,
        };
        let scale_seed = derive_seed(seed, scale.value() as u64);
        let values: Vec<f64> = (0..cfg.trajectories)
            .into_par_iter()
            .map(|t| {
                let traj_seed = derive_seed(scale_seed, t as u64);
                let mut rng = seeded(traj_seed);
                match folded.draw_faults(noise, &mut rng) {
                    None => match clean_value {
                        Some(v) => Ok(v),
                        None => estimator.estimate(obs, &clean, noise, traj_seed),
                    },
                    Some(faults) => {
                        let state = folded.run_with_faults(&faults)?;
                        estimator.estimate(obs, &state, noise, traj_seed)
                    }
                }
            })
            .collect::<Result<_>>()?;
        let (mean, std_error) = mean_and_std_error(&values);
        per_scale.push(ScaleEstimate {
            scale,
            mean,
            std_error,
        });
        raw.push(values);
    }
    let xs: Vec<f64> = per_scale.iter().map(|s| s.scale.value() as f64).collect();
    let ys: Vec<f64> = per_scale.iter().map(|s| s.mean).collect();
    Ok(ZneResult {
        extrapolated: extrapolate_to_zero(&xs, &ys, cfg.fit.degree())?,
        per_scale,
        raw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::simulator::Gate;
    use approx::assert_abs_diff_eq;

    fn sample_circuit() -> Circuit {
        Circuit::from_gates(
            2,
            [
                Gate::H(0),
                Gate::Ry(1, 0.4),
                Gate::Cnot {
                    control: 0,
                    target: 1,
                },
                Gate::Rz(1, -0.7),
            ],
        )
        .unwrap()
    }

    #[test]
    fn scale_validation() {
        assert!(NoiseScale::new(0).is_err());
        assert!(NoiseScale::new(2).is_err());
        assert_eq!(NoiseScale::new(5).unwrap().value(), 5);
    }

    #[test]
    fn folding_counts_and_identity() {
        let c = sample_circuit();
        assert_eq!(fold_circuit(&c, NoiseScale(1)), c);
        let f3 = fold_circuit(&c, NoiseScale(3));
        assert_eq!(f3.len(), 12);
        assert_eq!(f3.gates()[1], c.gates()[0].inverse());
        for s in [3, 5, 7] {
            let f = fold_circuit(&c, NoiseScale(s));
            assert!(f.run().unwrap().overlap(&c.run().unwrap()).unwrap() > 1.0 - 1e-10);
        }
    }

    #[test]
    fn fit_recovers_polynomials() {
        let x = [1.0, 3.0, 5.0];
        assert_abs_diff_eq!(
            extrapolate_to_zero(&x, &[3.0, 7.0, 11.0], 1).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        let y: Vec<f64> = x.iter().map(|v| 0.5 - 0.1 * v + 0.02 * v * v).collect();
        assert_abs_diff_eq!(
            extrapolate_to_zero(&x, &y, 2).unwrap(),
            0.5,
            epsilon = 1e-12
        );
        assert!(extrapolate_to_zero(&[1.0, 3.0], &[0.0, 1.0], 2).is_err());
    }

    #[test]
    fn config_validation() {
        let mut cfg = ZneConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.scales = vec![NoiseScale(3), NoiseScale(1)];
        assert!(cfg.validate().is_err());
        cfg.scales = vec![NoiseScale(1), NoiseScale(3)];
        cfg.fit = FitModel::Quadratic;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn noiseless_is_exact() {
        let c = sample_circuit();
        let obs = Observable::from_terms(2, &[(0.8, "Z0*Z1"), (-0.3, "X0"), (0.2, "Y1")]).unwrap();
        let exact = obs.exact_expectation(&c.run().unwrap()).unwrap();
        let res =
            zne_estimate(&c, &obs, &NoiseModel::noiseless(), &ZneConfig::default(), 1).unwrap();
        assert!((res.extrapolated - exact).abs() < 1e-9);
    }

    #[test]
    fn constant_observable() {
        let obs = Observable::constant_only(2, -0.75).unwrap();
        let res = zne_estimate(
            &sample_circuit(),
            &obs,
            &NoiseModel::default(),
            &ZneConfig::default(),
            3,
        )
        .unwrap();
        assert_eq!(res.extrapolated, -0.75);
    }

    #[test]
    fn scale_means_track_density_matrix() {
        let c = Circuit::from_gates(1, [Gate::X(0)]).unwrap();
        let z = Observable::from_terms(1, &[(1.0, "Z0")]).unwrap();
        let noise = NoiseModel::new(0.05, 0.0, 0.0, 0.0).unwrap();
        let cfg = ZneConfig {
            trajectories: 20_000,
            ..ZneConfig::default()
        };
        let res = zne_estimate(&c, &z, &noise, &cfg, 8).unwrap();
        for s in &res.per_scale {
            let rho = oracle::density_matrix_1q(&fold_circuit(&c, s.scale), 0.05).unwrap();
            let truth = oracle::expectation_dm(&rho, &z).unwrap();
            assert!(
                (s.mean - truth).abs() < 5.0 * s.std_error.max(1e-3),
                "{s:?} vs {truth}"
            );
        }
        assert!((res.extrapolated + 1.0).abs() < (res.per_scale[0].mean + 1.0).abs());
    }

    #[test]
    fn sampled_estimator_runs() {
        let c = sample_circuit();
        let obs = Observable::from_terms(2, &[(1.0, "Z0*Z1")]).unwrap();
        let cfg = ZneConfig {
            trajectories: 50,
            shots: Some(20),
            ..ZneConfig::default()
        };
        let a = zne_estimate(&c, &obs, &NoiseModel::default(), &cfg, 5).unwrap();
        let b = zne_estimate(&c, &obs, &NoiseModel::default(), &cfg, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.raw[0].len(), 50);
    }
}
