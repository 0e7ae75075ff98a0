//! Best-choice clustering with a size cap and randomized tie-breaking.
//!
//! Every live community keeps its closest eligible partner (highest score
//! among partners whose merged size fits the cap). Each time that choice
//! changes the community's version is bumped and a fresh `(u, v, d)` entry is
//! pushed; popped entries with an outdated version are dropped. The top valid
//! entry is therefore always a globally best eligible pair.
//!
//! Ties are broken through a random key drawn for every community when it is
//! created: among equally scored partners the one with the largest key wins,
//! which is a uniform choice over the tied set.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::community::CommunitySet;
use crate::enrollnet::EnrollmentNetwork;
use crate::error::{Error, Result};
use crate::quality::total_score;
use crate::rng::{mix, rng_from_seed};
use crate::stats::ScoreStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScoreFn {
    /// connectivity / (|u| + |v|)
    #[default]
    Linear,
    /// connectivity / (|u| + |v|)²
    Nonlinear,
}

impl FromStr for ScoreFn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "l" | "dl" => Ok(ScoreFn::Linear),
            "nonlinear" | "n" | "dn" => Ok(ScoreFn::Nonlinear),
            other => Err(format!("unknown score function {other:?}")),
        }
    }
}

/// Exact clustering score `connectivity / denominator`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClusterScore {
    pub connectivity: u64,
    pub denominator: u64,
}

impl ClusterScore {
    pub fn new(connectivity: u64, size_u: usize, size_v: usize, score_fn: ScoreFn) -> Self {
        let size = (size_u + size_v) as u64;
        let denominator = match score_fn {
            ScoreFn::Linear => size,
            ScoreFn::Nonlinear => size * size,
        };
        Self {
            connectivity,
            denominator,
        }
    }

    pub fn value(&self) -> f64 {
        self.connectivity as f64 / self.denominator as f64
    }

    pub fn is_positive(&self) -> bool {
        self.connectivity > 0
    }
}

impl PartialEq for ClusterScore {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ClusterScore {}

impl PartialOrd for ClusterScore {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ClusterScore {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = u128::from(self.connectivity) * u128::from(other.denominator);
        let rhs = u128::from(other.connectivity) * u128::from(self.denominator);
        lhs.cmp(&rhs)
    }
}

/// Score of merging communities `u` and `v` (disjoint entity lists).
pub fn bc_score(u: &[u32], v: &[u32], network: &EnrollmentNetwork, score_fn: ScoreFn) -> ClusterScore {
    let connectivity: u64 = u
        .iter()
        .flat_map(|&i| v.iter().map(move |&k| (i, k)))
        .map(|(i, k)| u64::from(network.connectivity(i as usize, k as usize)))
        .sum();
    ClusterScore::new(connectivity, u.len(), v.len(), score_fn)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BestChoiceParams {
    pub score_fn: ScoreFn,
    pub max_size: usize,
    pub seed: u64,
}

impl Default for BestChoiceParams {
    fn default() -> Self {
        Self {
            score_fn: ScoreFn::Linear,
            max_size: 10,
            seed: 0,
        }
    }
}

impl BestChoiceParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_size == 0 {
            return Err(Error::InvalidParameter("max_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// One merge step: the two communities (sorted members) and their score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Merge {
    pub u: Vec<u32>,
    pub v: Vec<u32>,
    pub score: ClusterScore,
}

#[derive(Debug, Clone)]
pub struct BestChoiceOutcome {
    pub set: CommunitySet,
    pub merges: Vec<Merge>,
}

#[derive(Debug)]
struct Entry {
    score: ClusterScore,
    key: u64,
    id: u32,
    version: u32,
}

impl Entry {
    fn rank(&self) -> (ClusterScore, u64, u32, u32) {
        (self.score, self.key, self.id, self.version)
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.rank() == other.rank()
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank().cmp(&other.rank())
    }
}

struct Clustering<'a> {
    params: &'a BestChoiceParams,
    members: Vec<Vec<u32>>,
    adj: Vec<HashMap<u32, u64>>,
    key: Vec<u64>,
    version: Vec<u32>,
    alive: Vec<bool>,
    best: Vec<Option<(u32, ClusterScore)>>,
    heap: BinaryHeap<Entry>,
}

impl<'a> Clustering<'a> {
    fn new(network: &EnrollmentNetwork, params: &'a BestChoiceParams, rng: &mut impl rand::Rng) -> Self {
        let n = network.entity_count();
        let adj = (0..n)
            .map(|i| network.neighbors(i).iter().map(|&(k, w)| (k, u64::from(w))).collect())
            .collect();
        let mut this = Self {
            params,
            members: (0..n as u32).map(|e| vec![e]).collect(),
            adj,
            key: (0..n).map(|_| rng.gen()).collect(),
            version: vec![0; n],
            alive: vec![true; n],
            best: vec![None; n],
            heap: BinaryHeap::new(),
        };
        for u in 0..n {
            this.best[u] = this.closest(u);
            this.push(u);
        }
        this
    }

    fn candidate(&self, u: usize, w: u32, connectivity: u64) -> Option<(u32, ClusterScore)> {
        let (su, sw) = (self.members[u].len(), self.members[w as usize].len());
        (su + sw <= self.params.max_size && connectivity > 0)
            .then(|| (w, ClusterScore::new(connectivity, su, sw, self.params.score_fn)))
    }

    fn better(&self, a: (u32, ClusterScore), b: Option<(u32, ClusterScore)>) -> bool {
        match b {
            None => true,
            Some(b) => (a.1, self.key[a.0 as usize], a.0) > (b.1, self.key[b.0 as usize], b.0),
        }
    }

    fn closest(&self, u: usize) -> Option<(u32, ClusterScore)> {
        let mut best = None;
        for (&w, &c) in &self.adj[u] {
            if let Some(cand) = self.candidate(u, w, c) {
                if self.better(cand, best) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    fn push(&mut self, u: usize) {
        if let Some((_, score)) = self.best[u] {
            self.heap.push(Entry {
                score,
                key: self.key[u],
                id: u as u32,
                version: self.version[u],
            });
        }
    }

    fn set_best(&mut self, u: usize, best: Option<(u32, ClusterScore)>) {
        self.best[u] = best;
        self.version[u] += 1;
        self.push(u);
    }

    /// Merge `u` and `v`; returns the surviving id.
    fn merge(&mut self, u: usize, v: usize, rng: &mut impl rand::Rng) -> usize {
        let (keep, gone) = if self.adj[u].len() >= self.adj[v].len() { (u, v) } else { (v, u) };
        let gone_adj = std::mem::take(&mut self.adj[gone]);
        for (w, c) in gone_adj {
            if w as usize == keep {
                continue;
            }
            let wa = &mut self.adj[w as usize];
            wa.remove(&(gone as u32));
            *wa.entry(keep as u32).or_insert(0) += c;
            *self.adj[keep].entry(w).or_insert(0) += c;
        }
        self.adj[keep].remove(&(gone as u32));
        let moved = std::mem::take(&mut self.members[gone]);
        self.members[keep].extend(moved);
        self.alive[gone] = false;
        self.best[gone] = None;
        self.key[keep] = rng.gen();

        let own = self.closest(keep);
        self.set_best(keep, own);

        let neighbors: Vec<(u32, u64)> = self.adj[keep].iter().map(|(&w, &c)| (w, c)).collect();
        for (w, c) in neighbors {
            let w = w as usize;
            let current = self.best[w];
            let stale = matches!(current, Some((t, _)) if t as usize == keep || t as usize == gone);
            if stale {
                let fresh = self.closest(w);
                self.set_best(w, fresh);
            } else if let Some(cand) = self.candidate(w, keep as u32, c) {
                if self.better(cand, current) {
                    self.set_best(w, Some(cand));
                }
            }
        }
        keep
    }

    fn run(&mut self, rng: &mut impl rand::Rng, mut trace: Option<&mut Vec<Merge>>) {
        while let Some(entry) = self.heap.pop() {
            let u = entry.id as usize;
            if !self.alive[u] || self.version[u] != entry.version {
                continue;
            }
            let (v, score) = self.best[u].expect("valid entries carry a partner");
            debug_assert!(score.is_positive());
            if let Some(log) = trace.as_deref_mut() {
                let mut mu = self.members[u].clone();
                let mut mv = self.members[v as usize].clone();
                mu.sort_unstable();
                mv.sort_unstable();
                log.push(Merge { u: mu, v: mv, score });
            }
            self.merge(u, v as usize, rng);
        }
    }

    fn into_set(self, entity_count: usize) -> CommunitySet {
        let communities: Vec<Vec<u32>> = self
            .members
            .into_iter()
            .zip(self.alive)
            .filter(|(_, a)| *a)
            .map(|(mut m, _)| {
                m.sort_unstable();
                m
            })
            .collect();
        CommunitySet::new(communities, entity_count, self.params.max_size.max(1)).expect("best choice yields a partition")
    }
}

fn run_best_choice(network: &EnrollmentNetwork, params: &BestChoiceParams, trace: bool) -> Result<BestChoiceOutcome> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let mut clustering = Clustering::new(network, params, &mut rng);
    let mut merges = Vec::new();
    clustering.run(&mut rng, trace.then_some(&mut merges));
    Ok(BestChoiceOutcome {
        set: clustering.into_set(network.entity_count()),
        merges,
    })
}

/// Best-choice clustering from singletons until no eligible pair has a
/// positive score. Deterministic in `(network, params)`.
pub fn best_choice(network: &EnrollmentNetwork, params: &BestChoiceParams) -> Result<CommunitySet> {
    run_best_choice(network, params, false).map(|o| o.set)
}

/// [`best_choice`] plus the ordered list of merges performed.
pub fn best_choice_traced(network: &EnrollmentNetwork, params: &BestChoiceParams) -> Result<BestChoiceOutcome> {
    run_best_choice(network, params, true)
}

#[derive(Debug, Clone)]
pub struct MonteCarloOutcome {
    pub best: CommunitySet,
    /// Run index that produced `best` (first among equals).
    pub best_run: usize,
    pub stats: ScoreStats,
    pub scores: Vec<i64>,
}

/// Run best choice `runs` times with seeds `mix(params.seed, run)` and keep the
/// highest-scoring set.
pub fn monte_carlo_best_choice(
    network: &EnrollmentNetwork,
    params: &BestChoiceParams,
    runs: usize,
) -> Result<MonteCarloOutcome> {
    if runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    params.validate()?;
    let one = |run: usize| -> Result<(i64, CommunitySet)> {
        let p = BestChoiceParams {
            seed: mix(params.seed, run as u64),
            ..*params
        };
        let set = best_choice(network, &p)?;
        Ok((total_score(&set, network)?, set))
    };

    #[cfg(feature = "parallel")]
    let results: Vec<(i64, CommunitySet)> = {
        use rayon::prelude::*;
        (0..runs).into_par_iter().map(one).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<(i64, CommunitySet)> = (0..runs).map(one).collect::<Result<_>>()?;

    let scores: Vec<i64> = results.iter().map(|r| r.0).collect();
    let stats = ScoreStats::from_scores(&scores);
    let best_run = scores.iter().position(|&s| s == stats.best).expect("max is present");
    let best = results.into_iter().nth(best_run).expect("index in range").1;
    Ok(MonteCarloOutcome {
        best,
        best_run,
        stats,
        scores,
    })
}
