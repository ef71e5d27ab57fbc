//! Seeded random-answer questionnaire runs and their length statistics.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::questionnaire::{Outcome, Questionnaire, RunError, RunReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub runs: usize,
    pub seed: u64,
    pub yes_prob: f64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            runs: 1000,
            seed: 0,
            yes_prob: 0.5,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("runs must be at least 1")]
    NoRuns,
    #[error("yes probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("run {run}: {source}")]
    Run { run: usize, source: RunError },
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub total_length: usize,
    pub first_compatible_length: Option<usize>,
    pub outcome: Outcome,
    pub compatible_count: usize,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub records: Vec<RunRecord>,
    pub reports: Vec<RunReport>,
}

/// Seed of run `index` under master seed `seed`.
pub fn run_seed(seed: u64, index: usize) -> u64 {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    master.set_stream(index as u64);
    master.next_u64()
}

/// Runs the questionnaire `config.runs` times, answering each question yes
/// with probability `config.yes_prob`. Results are ordered by run index.
pub fn simulate(q: &Questionnaire, config: &SimulationConfig) -> Result<Simulation, SimulationError> {
    if config.runs == 0 {
        return Err(SimulationError::NoRuns);
    }
    if !(0.0..=1.0).contains(&config.yes_prob) {
        return Err(SimulationError::Probability(config.yes_prob));
    }
    let results: Vec<(RunRecord, RunReport)> = (0..config.runs)
        .into_par_iter()
        .map(|run| {
            let seed = run_seed(config.seed, run);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = q
                .run(|_| Some(rng.random_bool(config.yes_prob)))
                .map_err(|source| SimulationError::Run { run, source })?;
            let record = RunRecord {
                run,
                seed,
                total_length: report.history.len(),
                first_compatible_length: report.first_compatible_length(),
                outcome: report.outcome,
                compatible_count: report.status.compatible.len(),
            };
            Ok((record, report))
        })
        .collect::<Result<_, SimulationError>>()?;
    let (records, reports) = results.into_iter().unzip();
    Ok(Simulation { records, reports })
}

/// CSV with header `run,seed,total_length,first_compatible_length,outcome,compatible_count`.
pub fn to_csv(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).expect("in-memory csv write");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("utf-8 csv")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationStats {
    pub runs: usize,
    pub completed: usize,
    pub stuck: usize,
    pub with_compatible: usize,
    pub mean_total_length: f64,
    /// Mean total length over runs reaching a compatible diagnosis.
    pub mean_total_length_with_compatible: Option<f64>,
    pub mean_first_compatible_length: Option<f64>,
    pub total_histogram: BTreeMap<usize, usize>,
    pub first_compatible_histogram: BTreeMap<usize, usize>,
}

fn mean(xs: impl Iterator<Item = usize>) -> Option<f64> {
    let (sum, n) = xs.fold((0usize, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

fn histogram(xs: impl Iterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for x in xs {
        *h.entry(x).or_insert(0) += 1;
    }
    h
}

impl SimulationStats {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let with: Vec<&RunRecord> = records
            .iter()
            .filter(|r| r.first_compatible_length.is_some())
            .collect();
        SimulationStats {
            runs: records.len(),
            completed: records.iter().filter(|r| r.outcome == Outcome::Completed).count(),
            stuck: records.iter().filter(|r| r.outcome == Outcome::Stuck).count(),
            with_compatible: with.len(),
            mean_total_length: mean(records.iter().map(|r| r.total_length)).unwrap_or(0.0),
            mean_total_length_with_compatible: mean(with.iter().map(|r| r.total_length)),
            mean_first_compatible_length: mean(with.iter().filter_map(|r| r.first_compatible_length)),
            total_histogram: histogram(records.iter().map(|r| r.total_length)),
            first_compatible_histogram: histogram(with.iter().filter_map(|r| r.first_compatible_length)),
        }
    }

    /// Summary lines followed by both length histograms, one bar per length.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let opt = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:.2}"));
        let _ = writeln!(out, "runs: {}", self.runs);
        let _ = writeln!(out, "completed: {}", self.completed);
        let _ = writeln!(out, "stuck: {}", self.stuck);
        let _ = writeln!(out, "runs with a compatible diagnosis: {}", self.with_compatible);
        let _ = writeln!(out, "mean total length: {:.2}", self.mean_total_length);
        let _ = writeln!(
            out,
            "mean total length (runs with a compatible diagnosis): {}",
            opt(self.mean_total_length_with_compatible)
        );
        let _ = writeln!(
            out,
            "mean first compatible length: {}",
            opt(self.mean_first_compatible_length)
        );
        let _ = writeln!(out, "\ntotal length distribution");
        out.push_str(&render_histogram(&self.total_histogram));
        let _ = writeln!(out, "\nfirst compatible length distribution");
        out.push_str(&render_histogram(&self.first_compatible_histogram));
        out
    }
}

/// Text bars scaled so the tallest has 50 marks.
pub fn render_histogram(h: &BTreeMap<usize, usize>) -> String {
    let peak = h.values().copied().max().unwrap_or(0).max(1);
    let mut out = String::new();
    for (len, count) in h {
        let bar = "#".repeat((count * 50).div_ceil(peak));
        let _ = writeln!(out, "{len:>4} | {bar} {count}");
    }
    out
}
