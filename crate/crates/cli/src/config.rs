//! Config loading, merging and aggregated validation.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;
use varqlab::pauli::Observable;
use varqlab::simulator::NoiseModel;

pub enum CliError {
    /// Every problem found while validating inputs; nothing was run.
    Config(Vec<String>),
    Runtime(anyhow::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(vec![msg.into()])
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(problems) => {
                write!(f, "configuration error ({} problem(s)):", problems.len())?;
                for p in problems {
                    write!(f, "\n  - {p}")?;
                }
                Ok(())
            }
            CliError::Runtime(e) => write!(f, "runtime error: {e:#}"),
        }
    }
}

impl From<varqlab::Error> for CliError {
    fn from(e: varqlab::Error) -> Self {
        CliError::Runtime(e.into())
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Runtime(e)
    }
}

/// Collects validation failures so they can be reported together.
#[derive(Default)]
pub struct Problems(Vec<String>);

impl Problems {
    pub fn check<T, E: fmt::Display>(&mut self, field: &str, r: Result<T, E>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.push(format!("{field}: {e}"));
                None
            }
        }
    }

    pub fn require<T>(&mut self, field: &str, v: Option<T>) -> Option<T> {
        if v.is_none() {
            self.0.push(format!("{field}: required"));
        }
        v
    }

    pub fn push(&mut self, msg: impl Into<String>) {
        self.0.push(msg.into());
    }

    pub fn finish(self) -> Result<(), CliError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(self.0))
        }
    }
}

/// Overlays command-line values on an optional JSON config file. Flags win.
pub fn merge_with_file<T: Serialize + DeserializeOwned>(
    flags: &T,
    file: Option<&Path>,
) -> Result<T, CliError> {
    let Some(path) = file else {
        return serde_json::from_value(serde_json::to_value(flags).map_err(anyhow::Error::from)?)
            .map_err(|e| CliError::config(e.to_string()));
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?;
    let mut base: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))?;
    let Value::Object(base_map) = &mut base else {
        return Err(CliError::config(format!(
            "config {}: expected a JSON object",
            path.display()
        )));
    };
    if let Value::Object(over) = serde_json::to_value(flags).map_err(anyhow::Error::from)? {
        for (k, v) in over {
            if !v.is_null() {
                base_map.insert(k, v);
            }
        }
    }
    serde_json::from_value(base)
        .map_err(|e| CliError::config(format!("config {}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

pub fn load_observable(path: &Path) -> Result<Observable, String> {
    let text = read_file(path)?;
    Observable::parse(&text, None).map_err(|e| format!("{}: {e}", path.display()))
}

/// `exact` or a positive shot count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Exact,
    Count(usize),
}

impl FromStr for Shots {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "exact" => Ok(Shots::Exact),
            t => match t.parse::<usize>() {
                Ok(0) => Err("shot count must be positive".into()),
                Ok(n) => Ok(Shots::Count(n)),
                Err(_) => Err(format!("expected 'exact' or a shot count, got '{s}'")),
            },
        }
    }
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(0) => Err(serde::de::Error::custom("shot count must be positive")),
            Raw::N(n) => Ok(Shots::Count(n as usize)),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Comma-separated list on the command line, JSON array in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: fmt::Display,
{
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.trim().parse::<T>().map_err(|e| format!("'{t}': {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}

/// `none`, `default`, or `p1=..,p2=..,ro0=..,ro1=..` (omitted keys are 0).
pub fn parse_noise(s: &str) -> Result<Option<NoiseModel>, String> {
    match s.trim() {
        "none" => return Ok(None),
        "default" => return Ok(Some(NoiseModel::default())),
        _ => {}
    }
    let mut m = NoiseModel::noiseless();
    for part in s.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got '{part}'"))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| format!("bad probability '{}'", v.trim()))?;
        match k.trim() {
            "p1" => m.p1 = v,
            "p2" => m.p2 = v,
            "ro0" => m.readout_flip0 = v,
            "ro1" => m.readout_flip1 = v,
            other => return Err(format!("unknown noise key '{other}'")),
        }
    }
    m.validate().map_err(|e| e.to_string())?;
    Ok(Some(m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shots_parse_and_roundtrip() {
        assert_eq!("exact".parse::<Shots>().unwrap(), Shots::Exact);
        assert_eq!("250".parse::<Shots>().unwrap(), Shots::Count(250));
        assert!("0".parse::<Shots>().is_err());
        assert!("many".parse::<Shots>().is_err());
        let v: Shots = serde_json::from_str("1000").unwrap();
        assert_eq!(v, Shots::Count(1000));
        assert_eq!(serde_json::to_string(&Shots::Exact).unwrap(), "\"exact\"");
    }

    #[test]
    fn noise_specs() {
        assert_eq!(parse_noise("none").unwrap(), None);
        assert_eq!(parse_noise("default").unwrap(), Some(NoiseModel::default()));
        let m = parse_noise("p1=0.01,ro1=0.05").unwrap().unwrap();
        assert_eq!(
            (m.p1, m.p2, m.readout_flip0, m.readout_flip1),
            (0.01, 0.0, 0.0, 0.05)
        );
        assert!(parse_noise("p1=1.5").is_err());
        assert!(parse_noise("p3=0.1").is_err());
    }

    #[test]
    fn lists() {
        let l: List<f64> = "0.5, 1,2".parse().unwrap();
        assert_eq!(l.0, vec![0.5, 1.0, 2.0]);
        assert!("1,x".parse::<List<u32>>().is_err());
    }

    #[test]
    fn problems_aggregate() {
        let mut p = Problems::default();
        p.require::<u8>("seed", None);
        p.check::<u8, _>("shots", Err("bad"));
        match p.finish() {
            Err(CliError::Config(v)) => assert_eq!(v.len(), 2),
            _ => panic!("expected config error"),
        }
    }
}
