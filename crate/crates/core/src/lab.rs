//! Parameter sweeps over the stochastic stages.
//!
//! A sweep varies one parameter over a list of values and, for each value,
//! collects `S_T` from repeated runs. Annealing sweeps all refine the same
//! starting set, the best of a best-choice Monte-Carlo batch.
//!
//! Seeds: each value gets `mix(seed, value.to_bits())` and each run inside it
//! `mix(value_seed, run)`, so a value's statistics do not depend on its
//! position in the list.

use serde::{Deserialize, Serialize};

use crate::anneal::{anneal, trial_costs, SaParams};
use crate::coarsen::{best_choice, monte_carlo_best_choice, BestChoiceParams};
use crate::community::CommunitySet;
use crate::enrollnet::EnrollmentNetwork;
use crate::error::{Error, Result};
use crate::format::round_sig6;
use crate::quality::total_score;
use crate::rng::mix;
use crate::stats::ScoreStats;

/// Stream index for the starting-set batch of annealing sweeps.
const START_STREAM: u64 = 0x5354_4152_54;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SweepTarget {
    BcMaxSize,
    BcMcRuns,
    SaN,
    SaAp,
    SaAlpha,
    SaTmin,
    SaIters,
}

impl SweepTarget {
    pub fn name(self) -> &'static str {
        match self {
            SweepTarget::BcMaxSize => "BC_MAX_SIZE",
            SweepTarget::BcMcRuns => "BC_MC_RUNS",
            SweepTarget::SaN => "SA_N",
            SweepTarget::SaAp => "SA_AP",
            SweepTarget::SaAlpha => "SA_ALPHA",
            SweepTarget::SaTmin => "SA_TMIN",
            SweepTarget::SaIters => "SA_ITERS",
        }
    }

    pub fn is_annealing(self) -> bool {
        !matches!(self, SweepTarget::BcMaxSize | SweepTarget::BcMcRuns)
    }

    fn integral(self) -> bool {
        matches!(
            self,
            SweepTarget::BcMaxSize | SweepTarget::BcMcRuns | SweepTarget::SaN | SweepTarget::SaIters
        )
    }
}

fn default_start_runs() -> usize {
    100
}

fn default_runs() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub target: SweepTarget,
    pub values: Vec<f64>,
    /// Runs per value. For `BC_MC_RUNS` the value itself is the run count.
    #[serde(default = "default_runs")]
    pub runs_per_value: usize,
    #[serde(default)]
    pub base_bc: BestChoiceParams,
    #[serde(default)]
    pub base_sa: SaParams,
    #[serde(default)]
    pub seed: u64,
    /// Best-choice runs used to pick the annealing start.
    #[serde(default = "default_start_runs")]
    pub start_runs: usize,
}

impl SweepSpec {
    pub fn new(target: SweepTarget, values: Vec<f64>, runs_per_value: usize) -> Self {
        Self {
            target,
            values,
            runs_per_value,
            base_bc: BestChoiceParams::default(),
            base_sa: SaParams::default(),
            seed: 0,
            start_runs: default_start_runs(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.values.is_empty() {
            return bad("sweep needs at least one value".into());
        }
        if self.runs_per_value == 0 {
            return bad("runs_per_value must be at least 1".into());
        }
        if self.target.is_annealing() && self.start_runs == 0 {
            return bad("start_runs must be at least 1".into());
        }
        self.base_bc.validate()?;
        for &v in &self.values {
            if !v.is_finite() || (self.target.integral() && (v.fract() != 0.0 || v < 1.0)) {
                return bad(format!("{} value {v} must be a positive integer", self.target.name()));
            }
            if self.target.is_annealing() {
                self.sa_params(v, 0).validate()?;
            }
        }
        Ok(())
    }

    fn sa_params(&self, value: f64, seed: u64) -> SaParams {
        let mut p = SaParams { seed, ..self.base_sa };
        match self.target {
            SweepTarget::SaN => p.trial_swaps = value as usize,
            SweepTarget::SaAp => p.acceptance_probability = value,
            SweepTarget::SaAlpha => p.cooling_rate = value,
            SweepTarget::SaTmin => p.min_temperature = value,
            SweepTarget::SaIters => p.iters_per_temp = value as usize,
            SweepTarget::BcMaxSize | SweepTarget::BcMcRuns => {}
        }
        p
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` edges; bin `i` is `[edges[i], edges[i+1])`, the last
    /// bin closed.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Freedman–Diaconis bin width over pooled integer scores, rounded up to a
/// whole number and at least 1.
pub fn bin_width(pooled: &[i64]) -> f64 {
    if pooled.len() < 2 {
        return 1.0;
    }
    let mut xs: Vec<f64> = pooled.iter().map(|&s| s as f64).collect();
    xs.sort_by(f64::total_cmp);
    let iqr = quantile(&xs, 0.75) - quantile(&xs, 0.25);
    let fd = 2.0 * iqr / (xs.len() as f64).cbrt();
    fd.ceil().max(1.0)
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Shared edges from `min` in steps of `width`, covering `max`.
pub fn bin_edges(pooled: &[i64], width: f64) -> Vec<f64> {
    let min = *pooled.iter().min().expect("non-empty") as f64;
    let max = *pooled.iter().max().expect("non-empty") as f64;
    let bins = ((max - min) / width).floor() as usize + 1;
    (0..=bins).map(|i| min + i as f64 * width).collect()
}

pub fn histogram(scores: &[i64], edges: &[f64]) -> Histogram {
    let bins = edges.len() - 1;
    let width = edges[1] - edges[0];
    let mut counts = vec![0; bins];
    for &s in scores {
        let idx = (((s as f64) - edges[0]) / width).floor();
        let idx = (idx.max(0.0) as usize).min(bins - 1);
        counts[idx] += 1;
    }
    Histogram {
        edges: edges.to_vec(),
        counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub mean: f64,
    pub std: f64,
    pub best: i64,
    pub histogram: Histogram,
    pub scores: Vec<i64>,
    /// Wall-clock milliseconds spent on this value, when measured.
    pub runtime_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub target: SweepTarget,
    pub seed: u64,
    /// `S_T` of the annealing start, for annealing sweeps.
    pub start_score: Option<i64>,
    pub bin_width: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepReport {
    /// JSON tree with sorted keys and 6-significant-digit floats. Runtimes are
    /// included only on request since they vary between runs.
    pub fn to_json(&self, include_runtime: bool) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut row = serde_json::json!({
                    "value": round_sig6(r.value),
                    "mean": round_sig6(r.mean),
                    "std": round_sig6(r.std),
                    "best": r.best,
                    "scores": r.scores,
                    "histogram": {
                        "edges": r.histogram.edges.iter().map(|&e| round_sig6(e)).collect::<Vec<_>>(),
                        "counts": r.histogram.counts,
                    },
                });
                if include_runtime {
                    row["runtime_ms"] = serde_json::json!(r.runtime_ms.map(round_sig6));
                }
                row
            })
            .collect();
        serde_json::json!({
            "target": self.target.name(),
            "seed": self.seed,
            "start_score": self.start_score,
            "bin_width": round_sig6(self.bin_width),
            "rows": rows,
        })
    }

    /// Flat `target,value,run,score` listing.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("target,value,run,score\n");
        for row in &self.rows {
            for (run, s) in row.scores.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    self.target.name(),
                    crate::format::sig6(row.value),
                    run,
                    s
                ));
            }
        }
        out
    }
}

fn map_runs<T: Send>(runs: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..runs).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..runs).map(f).collect()
    }
}

/// Best set of a best-choice Monte-Carlo batch, used as the annealing start.
pub fn starting_set(network: &EnrollmentNetwork, spec: &SweepSpec) -> Result<CommunitySet> {
    let params = BestChoiceParams {
        seed: mix(spec.seed, START_STREAM),
        ..spec.base_bc
    };
    Ok(monte_carlo_best_choice(network, &params, spec.start_runs)?.best)
}

pub fn run_sweep(network: &EnrollmentNetwork, spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let start = if spec.target.is_annealing() {
        Some(starting_set(network, spec)?)
    } else {
        None
    };
    run_sweep_with_start(network, spec, start.as_ref())
}

/// Like [`run_sweep`], with the annealing start supplied by the caller.
pub fn run_sweep_with_start(
    network: &EnrollmentNetwork,
    spec: &SweepSpec,
    start: Option<&CommunitySet>,
) -> Result<SweepReport> {
    spec.validate()?;
    let start_score = match start {
        Some(s) => Some(total_score(s, network)?),
        None if spec.target.is_annealing() => {
            return Err(Error::InvalidParameter("annealing sweep needs a starting set".into()))
        }
        None => None,
    };

    let mut raw = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let timer = Timer::start();
        let value_seed = mix(spec.seed, value.to_bits());
        let scores = match spec.target {
            SweepTarget::BcMaxSize => map_runs(spec.runs_per_value, |run| {
                let params = BestChoiceParams {
                    max_size: value as usize,
                    seed: mix(value_seed, run as u64),
                    ..spec.base_bc
                };
                total_score(&best_choice(network, &params)?, network)
            })?,
            SweepTarget::BcMcRuns => {
                let params = BestChoiceParams {
                    seed: value_seed,
                    ..spec.base_bc
                };
                monte_carlo_best_choice(network, &params, value as usize)?.scores
            }
            _ => {
                let start = start.expect("checked above");
                map_runs(spec.runs_per_value, |run| {
                    let params = spec.sa_params(value, mix(value_seed, run as u64));
                    let out = anneal(start, network, &params)?;
                    Ok(-out.best_cost)
                })?
            }
        };
        raw.push((value, scores, timer.elapsed_ms()));
    }

    let pooled: Vec<i64> = raw.iter().flat_map(|r| r.1.iter().copied()).collect();
    let width = bin_width(&pooled);
    let edges = bin_edges(&pooled, width);
    let rows = raw
        .into_iter()
        .map(|(value, scores, runtime_ms)| {
            let stats = ScoreStats::from_scores(&scores);
            SweepRow {
                value,
                mean: stats.mean,
                std: stats.std,
                best: stats.best,
                histogram: histogram(&scores, &edges),
                scores,
                runtime_ms,
            }
        })
        .collect();
    Ok(SweepReport {
        target: spec.target,
        seed: spec.seed,
        start_score,
        bin_width: width,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub mean_trial_cost: f64,
}

/// Running mean of independent single-swap trial costs for `n = 1..=max_n`.
pub fn n_convergence_curve(
    set: &CommunitySet,
    network: &EnrollmentNetwork,
    max_n: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<ConvergencePoint>> {
    if max_n == 0 {
        return Err(Error::InvalidParameter("max_n must be at least 1".into()));
    }
    let costs = trial_costs(set, network, max_n, rng)?;
    let mut sum = 0i64;
    Ok(costs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            sum += c;
            ConvergencePoint {
                n: i + 1,
                mean_trial_cost: sum as f64 / (i + 1) as f64,
            }
        })
        .collect())
}

struct Timer {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Timer {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> Option<f64> {
        #[cfg(not(target_arch = "wasm32"))]
        return Some(self.start.elapsed().as_secs_f64() * 1e3);
        #[cfg(target_arch = "wasm32")]
        None
    }
}
