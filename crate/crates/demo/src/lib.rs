//! Browser demo over a planted synthetic network.
//!
//! Each export takes a JSON request and returns a JSON string. Missing request
//! fields fall back to the library defaults. The `*_json` functions are the
//! plain Rust entry points and the wasm exports wrap them.

use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use cohort_forge::coarsen::{monte_carlo_best_choice, BestChoiceParams};
use cohort_forge::lab::n_convergence_curve;
use cohort_forge::rng::{mix, rng_from_seed};
use cohort_forge::synthetic::{planted, PlantedSpec};
use cohort_forge::{anneal, build_network, score, CommunitySet, EnrollmentNetwork, SaParams};

/// Longest series handed to the page; longer traces are thinned.
const MAX_POINTS: usize = 2000;

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Request {
    pub network: PlantedSpec,
    pub max_size: usize,
    pub mc_runs: usize,
    pub seed: u64,
    pub sa: SaParams,
    pub max_n: usize,
}

impl Default for Request {
    fn default() -> Self {
        Self {
            network: PlantedSpec::default(),
            max_size: 10,
            mc_runs: 20,
            seed: 1,
            sa: SaParams::default(),
            max_n: 1000,
        }
    }
}

type Outcome = Result<String, String>;

fn parse(request: &str) -> Result<Request, String> {
    if request.trim().is_empty() {
        return Ok(Request::default());
    }
    serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))
}

fn network(req: &Request) -> Result<(EnrollmentNetwork, CommunitySet), String> {
    let p = planted(&req.network).map_err(|e| e.to_string())?;
    let net = build_network(&p.table, &Default::default()).map_err(|e| e.to_string())?;
    let blocks = p.truth.iter().max().map_or(0, |&b| b as usize + 1);
    let mut groups = vec![Vec::new(); blocks];
    // entities are indexed by first appearance, which is generation order
    for (e, &b) in p.truth.iter().enumerate() {
        groups[b as usize].push(e as u32);
    }
    let truth = CommunitySet::from_communities(groups, net.entity_count()).map_err(|e| e.to_string())?;
    Ok((net, truth))
}

fn best_choice_start(req: &Request, net: &EnrollmentNetwork) -> Result<(CommunitySet, Value), String> {
    let params = BestChoiceParams {
        max_size: req.max_size,
        seed: mix(req.seed, 0),
        ..Default::default()
    };
    let mc = monte_carlo_best_choice(net, &params, req.mc_runs).map_err(|e| e.to_string())?;
    let summary = json!({
        "scores": mc.scores,
        "best": mc.stats.best,
        "mean": mc.stats.mean,
        "std": mc.stats.std,
        "best_run": mc.best_run,
    });
    Ok((mc.best, summary))
}

fn total(set: &CommunitySet, net: &EnrollmentNetwork) -> Result<i64, String> {
    Ok(score(set, net).map_err(|e| e.to_string())?.total)
}

/// Keep at most `MAX_POINTS` evenly spaced entries, always including the last.
fn thin<T: Copy>(xs: &[T]) -> Vec<T> {
    if xs.len() <= MAX_POINTS {
        return xs.to_vec();
    }
    let stride = xs.len().div_ceil(MAX_POINTS);
    let mut out: Vec<T> = xs.iter().step_by(stride).copied().collect();
    if (xs.len() - 1) % stride != 0 {
        out.push(xs[xs.len() - 1]);
    }
    out
}

/// Generate a planted network and run Monte Carlo best choice on it.
pub fn cluster_json(request: &str) -> Outcome {
    let req = parse(request)?;
    let (net, truth) = network(&req)?;
    let (best, summary) = best_choice_start(&req, &net)?;
    let mut sizes = best.sizes();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    Ok(json!({
        "entities": net.entity_count(),
        "sections": net.section_count(),
        "edges": net.edge_count(),
        "planted_score": total(&truth, &net)?,
        "best_choice": summary,
        "communities": best.community_count(),
        "sizes": sizes,
    })
    .to_string())
}

/// Refine the best-choice start with simulated annealing and return the trace.
pub fn anneal_json(request: &str) -> Outcome {
    let req = parse(request)?;
    let (net, _) = network(&req)?;
    let (start, _) = best_choice_start(&req, &net)?;
    let params = SaParams {
        seed: mix(req.seed, 1),
        ..req.sa
    };
    let out = anneal(&start, &net, &params).map_err(|e| e.to_string())?;
    let trace = &out.trace;
    let estimate = trace.estimate.expect("anneal estimates its temperature");
    let index: Vec<usize> = thin(&(0..trace.moves.len()).collect::<Vec<_>>());
    let pick = |f: fn(&cohort_forge::anneal::MoveRecord) -> i64| -> Vec<i64> {
        index.iter().map(|&i| -f(&trace.moves[i])).collect()
    };
    Ok(json!({
        "start_score": -trace.initial_cost,
        "refined_score": -out.best_cost,
        "last_score": -out.last_cost,
        "t0": estimate.t0,
        "t0_clamped": estimate.clamped,
        "cooling_steps": trace.temperatures.len(),
        "moves": trace.moves.len(),
        "accepted": trace.accepted_count,
        "rejected": trace.rejected_count,
        "move_index": index.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "current": pick(|m| m.current_cost),
        "best": pick(|m| m.best_cost),
    })
    .to_string())
}

/// Running mean trial cost against the number of trial swaps.
pub fn convergence_json(request: &str) -> Outcome {
    let req = parse(request)?;
    let (net, _) = network(&req)?;
    let (start, _) = best_choice_start(&req, &net)?;
    let initial_cost = -total(&start, &net)?;
    let mut rng = rng_from_seed(mix(req.seed, 2));
    let curve = n_convergence_curve(&start, &net, req.max_n, &mut rng).map_err(|e| e.to_string())?;
    let points = thin(&curve);
    Ok(json!({
        "initial_cost": initial_cost,
        "n": points.iter().map(|p| p.n).collect::<Vec<_>>(),
        "mean_trial_cost": points.iter().map(|p| p.mean_trial_cost).collect::<Vec<_>>(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn cluster(request: &str) -> Result<String, JsValue> {
    cluster_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn anneal_trace(request: &str) -> Result<String, JsValue> {
    anneal_json(request).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn n_convergence(request: &str) -> Result<String, JsValue> {
    convergence_json(request).map_err(|e| JsValue::from_str(&e))
}
