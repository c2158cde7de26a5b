use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde::Serialize;
use varqlab::optimizers::OptimizationTrace;

#[derive(Serialize)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub version: &'static str,
    pub wall_time_seconds: f64,
    pub threads: usize,
}

#[derive(Serialize)]
pub struct Report<I: Serialize, R: Serialize> {
    pub command: &'static str,
    pub inputs: I,
    pub results: R,
    pub provenance: Provenance,
}

impl<I: Serialize, R: Serialize> Report<I, R> {
    pub fn new(
        command: &'static str,
        inputs: I,
        results: R,
        seed: Option<u64>,
        start: Instant,
    ) -> Self {
        Report {
            command,
            inputs,
            results,
            provenance: Provenance {
                seed,
                version: env!("CARGO_PKG_VERSION"),
                wall_time_seconds: start.elapsed().as_secs_f64(),
                threads: rayon::current_num_threads(),
            },
        }
    }

    /// Pretty JSON to `path`, or to stdout when no path is given.
    pub fn emit(&self, path: Option<&Path>) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        match path {
            Some(p) => {
                fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))
            }
            None => {
                println!("{text}");
                Ok(())
            }
        }
    }
}

/// Columns `iteration,value,evaluations,shots,p0,p1,...`.
pub fn write_trace(path: &Path, trace: &OptimizationTrace) -> anyhow::Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let n_params = trace.iterations.first().map_or(0, |r| r.params.len());
    let mut header: Vec<String> = ["iteration", "value", "evaluations", "shots"]
        .map(String::from)
        .to_vec();
    header.extend((0..n_params).map(|i| format!("p{i}")));
    w.write_record(&header)?;
    for r in &trace.iterations {
        let mut row = vec![
            r.iteration.to_string(),
            r.value.to_string(),
            r.evaluations.to_string(),
            r.shots.to_string(),
        ];
        row.extend(r.params.iter().map(|p| p.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
