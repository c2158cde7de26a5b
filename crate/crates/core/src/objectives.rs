//! Scalar objectives over energy-labelled samples.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    pub bitstring: String,
    pub energy: f64,
    pub count: usize,
}

/// Measured bitstrings with their energies and multiplicities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    entries: Vec<SampleEntry>,
    total: usize,
}

impl SampleSet {
    pub fn new(entries: Vec<SampleEntry>) -> Result<Self> {
        if let Some(e) = entries.iter().find(|e| !e.energy.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite energy for '{}'",
                e.bitstring
            )));
        }
        let entries: Vec<SampleEntry> = entries.into_iter().filter(|e| e.count > 0).collect();
        let total = entries.iter().map(|e| e.count).sum();
        if total == 0 {
            return Err(Error::EmptySamples);
        }
        Ok(Self { entries, total })
    }

    /// Convenience for `(bitstring, energy, count)` triples.
    pub fn from_triples<S: Into<String>>(
        triples: impl IntoIterator<Item = (S, f64, usize)>,
    ) -> Result<Self> {
        Self::new(
            triples
                .into_iter()
                .map(|(b, energy, count)| SampleEntry {
                    bitstring: b.into(),
                    energy,
                    count,
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[SampleEntry] {
        &self.entries
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn min_energy(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.energy)
            .fold(f64::INFINITY, f64::min)
    }

    /// Lowest-energy entry; ties go to the earliest entry.
    pub fn best(&self) -> &SampleEntry {
        self.entries
            .iter()
            .reduce(|best, e| if e.energy < best.energy { e } else { best })
            .expect("sample sets are never empty")
    }

    pub fn expectation(&self) -> f64 {
        let sum: f64 = self.entries.iter().map(|e| e.count as f64 * e.energy).sum();
        sum / self.total as f64
    }

    /// Mean of the lowest `⌈α·N⌉` shots. Equal energies keep their original order.
    pub fn cvar(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "CVaR alpha {alpha} is outside (0, 1]"
            )));
        }
        // the small slack keeps 0.3·10 from rounding up to 4
        let keep = ((alpha * self.total as f64 - 1e-9).ceil() as usize).clamp(1, self.total);
        let mut order: Vec<&SampleEntry> = self.entries.iter().collect();
        order.sort_by(|a, b| a.energy.total_cmp(&b.energy));
        let mut remaining = keep;
        let mut sum = 0.0;
        for e in order {
            let take = e.count.min(remaining);
            sum += take as f64 * e.energy;
            remaining -= take;
            if remaining == 0 {
                break;
            }
        }
        Ok(sum / keep as f64)
    }

    /// `-log(mean(exp(-η E)))`, evaluated with a log-sum-exp shift.
    pub fn gibbs(&self, eta: f64) -> Result<f64> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("Gibbs eta {eta} must be positive")));
        }
        let shift = self
            .entries
            .iter()
            .map(|e| -eta * e.energy)
            .fold(f64::NEG_INFINITY, f64::max);
        let acc: f64 = self
            .entries
            .iter()
            .map(|e| e.count as f64 * (-eta * e.energy - shift).exp())
            .sum();
        Ok(-(shift + (acc / self.total as f64).ln()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[derive(Default)]
pub enum ObjectiveSpec {
    #[default]
    Expectation,
    Cvar {
        alpha: f64,
    },
    Gibbs {
        eta: f64,
    },
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ObjectiveSpec::Expectation => Ok(()),
            ObjectiveSpec::Cvar { alpha } if alpha > 0.0 && alpha <= 1.0 => Ok(()),
            ObjectiveSpec::Cvar { alpha } => Err(Error::invalid(format!(
                "CVaR alpha {alpha} is outside (0, 1]"
            ))),
            ObjectiveSpec::Gibbs { eta } if eta > 0.0 && eta.is_finite() => Ok(()),
            ObjectiveSpec::Gibbs { eta } => {
                Err(Error::invalid(format!("Gibbs eta {eta} must be positive")))
            }
        }
    }

    pub fn evaluate(&self, samples: &SampleSet) -> Result<f64> {
        match *self {
            ObjectiveSpec::Expectation => Ok(samples.expectation()),
            ObjectiveSpec::Cvar { alpha } => samples.cvar(alpha),
            ObjectiveSpec::Gibbs { eta } => samples.gibbs(eta),
        }
    }

    pub fn is_expectation(&self) -> bool {
        matches!(self, ObjectiveSpec::Expectation)
    }
}

impl fmt::Display for ObjectiveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveSpec::Expectation => f.write_str("expectation"),
            ObjectiveSpec::Cvar { alpha } => write!(f, "cvar:{alpha}"),
            ObjectiveSpec::Gibbs { eta } => write!(f, "gibbs:{eta}"),
        }
    }
}

/// `expectation`, `cvar:<alpha>`, `gibbs[:<eta>]` (η defaults to 1).
impl FromStr for ObjectiveSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let number = |a: &str| {
            a.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad objective parameter '{a}'")))
        };
        let spec = match (kind, arg) {
            ("expectation", None) => ObjectiveSpec::Expectation,
            ("cvar", Some(a)) => ObjectiveSpec::Cvar { alpha: number(a)? },
            ("gibbs", None) => ObjectiveSpec::Gibbs { eta: 1.0 },
            ("gibbs", Some(a)) => ObjectiveSpec::Gibbs { eta: number(a)? },
            _ => return Err(Error::invalid(format!("unknown objective '{s}'"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}
