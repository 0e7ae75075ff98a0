//! Simulated-annealing refinement of a community set.
//!
//! Moves swap two entities from different communities, so community sizes
//! never change. A move with `ΔCost < 0` is always taken; otherwise it is
//! taken when `r < exp(−ΔCost / T)` for `r` uniform in `[0, 1)`. The
//! temperature starts at a value derived from the mean cost of `N`
//! independent trial swaps and the target acceptance probability, then
//! cools geometrically until it is no longer above `min_temperature`.

use serde::{Deserialize, Serialize};

use crate::community::CommunitySet;
use crate::enrollnet::EnrollmentNetwork;
use crate::error::{Error, Result};
use crate::quality::{delta_cost_swap, score};
use crate::rng::{rng_from_seed, Rng};

/// Moves between full re-score cross-checks in debug builds.
const CROSS_CHECK_INTERVAL: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaParams {
    /// Trial swaps used to estimate the initial temperature.
    pub trial_swaps: usize,
    /// Probability of accepting an average bad move at the start, in (0, 1).
    pub acceptance_probability: f64,
    /// Geometric cooling factor, in (0, 1).
    pub cooling_rate: f64,
    pub min_temperature: f64,
    pub iters_per_temp: usize,
    pub seed: u64,
    /// Initial temperature used when the estimate is not positive.
    pub temperature_floor: f64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            trial_swaps: 600,
            acceptance_probability: 0.95,
            cooling_rate: 0.95,
            min_temperature: 0.0001,
            iters_per_temp: 50,
            seed: 0,
            temperature_floor: 1.0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if self.trial_swaps == 0 {
            return bad("trial_swaps (N) must be at least 1");
        }
        if !(self.acceptance_probability > 0.0 && self.acceptance_probability < 1.0) {
            return bad("acceptance probability must lie strictly between 0 and 1");
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return bad("cooling rate must lie strictly between 0 and 1");
        }
        if !(self.min_temperature > 0.0 && self.min_temperature.is_finite()) {
            return bad("minimum temperature must be positive");
        }
        if self.iters_per_temp == 0 {
            return bad("iterations per temperature must be at least 1");
        }
        if !(self.temperature_floor > 0.0 && self.temperature_floor.is_finite()) {
            return bad("temperature floor must be positive");
        }
        Ok(())
    }
}

/// `exp(−delta / T)` for `delta ≥ 0`, and 1 for improving moves.
pub fn acceptance_probability(delta: i64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::NonpositiveTemperature(temperature));
    }
    Ok(if delta < 0 { 1.0 } else { (-(delta as f64) / temperature).exp() })
}

/// Initial temperature `(Cost_initial − mean Cost_trial) / ln(AP)`.
///
/// `initial_minus_mean_trial` is negative when trial swaps make things worse
/// on average, which with `ln(AP) < 0` gives a positive temperature.
pub fn initial_temperature(initial_minus_mean_trial: f64, acceptance_probability: f64) -> f64 {
    initial_minus_mean_trial / acceptance_probability.ln()
}

/// Metropolis decision for one move. Draws from `rng` only when `delta ≥ 0`.
pub fn accept_move(delta: i64, temperature: f64, rng: &mut impl rand::Rng) -> bool {
    delta < 0 || rng.gen::<f64>() < (-(delta as f64) / temperature).exp()
}

/// Uniformly random pair of entities from different communities.
pub fn select_pair(set: &CommunitySet, rng: &mut impl rand::Rng) -> Result<(usize, usize)> {
    let n = set.entity_count();
    if set.community_count() < 2 {
        return Err(Error::NoSwapPossible);
    }
    // Uniform over ordered cross pairs, hence over unordered ones.
    loop {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if set.community_of(a) != set.community_of(b) {
            return Ok((a, b));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureEstimate {
    pub t0: f64,
    pub initial_cost: i64,
    pub mean_trial_cost: f64,
    /// `Cost_initial − mean Cost_trial`.
    pub initial_minus_mean_trial: f64,
    /// The raw estimate was not positive and `t0` is the floor.
    pub clamped: bool,
}

/// Costs of `count` independent single swaps, each applied to `set` as given.
pub fn trial_costs(
    set: &CommunitySet,
    network: &EnrollmentNetwork,
    count: usize,
    rng: &mut impl rand::Rng,
) -> Result<Vec<i64>> {
    let initial = score(set, network)?.cost;
    (0..count)
        .map(|_| {
            let (a, b) = select_pair(set, rng)?;
            Ok(initial + delta_cost_swap(set, network, a, b)?)
        })
        .collect()
}

pub fn estimate_initial_temperature(
    set: &CommunitySet,
    network: &EnrollmentNetwork,
    trial_swaps: usize,
    acceptance_probability: f64,
    temperature_floor: f64,
    rng: &mut impl rand::Rng,
) -> Result<TemperatureEstimate> {
    if trial_swaps == 0 {
        return Err(Error::InvalidParameter("trial_swaps (N) must be at least 1".into()));
    }
    let initial_cost = score(set, network)?.cost;
    let costs = trial_costs(set, network, trial_swaps, rng)?;
    let mean_trial_cost = costs.iter().map(|&c| c as f64).sum::<f64>() / trial_swaps as f64;
    let diff = initial_cost as f64 - mean_trial_cost;
    let raw = initial_temperature(diff, acceptance_probability);
    let clamped = !(raw > 0.0 && raw.is_finite());
    Ok(TemperatureEstimate {
        t0: if clamped { temperature_floor } else { raw },
        initial_cost,
        mean_trial_cost,
        initial_minus_mean_trial: diff,
        clamped,
    })
}

/// Number of cooling steps run from `t0`: the smallest `k` with
/// `t0·αᵏ ≤ min_temperature`, counted by the same repeated multiplication the
/// annealer uses.
pub fn cooling_steps(t0: f64, cooling_rate: f64, min_temperature: f64) -> usize {
    let mut t = t0;
    let mut k = 0;
    while t > min_temperature {
        t *= cooling_rate;
        k += 1;
    }
    k
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveRecord {
    /// Index into [`AnnealTrace::temperatures`].
    pub step: u32,
    pub current_cost: i64,
    pub best_cost: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealTrace {
    pub t0: f64,
    pub estimate: Option<TemperatureEstimate>,
    pub initial_cost: i64,
    /// Temperature in effect during each cooling step.
    pub temperatures: Vec<f64>,
    pub moves: Vec<MoveRecord>,
    pub accepted_count: usize,
    pub rejected_count: usize,
}

impl AnnealTrace {
    /// `move,temperature,current_cost,best_cost`, moves numbered from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("move,temperature,current_cost,best_cost\n");
        for (i, m) in self.moves.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                i + 1,
                crate::format::sig6(self.temperatures[m.step as usize]),
                m.current_cost,
                m.best_cost
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    /// Lowest-cost set visited, the input included.
    pub best: CommunitySet,
    pub best_cost: i64,
    /// Set in effect when the schedule ended.
    pub last: CommunitySet,
    pub last_cost: i64,
    pub trace: AnnealTrace,
}

/// Estimate the initial temperature from `params`, then anneal.
pub fn anneal(set: &CommunitySet, network: &EnrollmentNetwork, params: &SaParams) -> Result<AnnealOutcome> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let estimate = estimate_initial_temperature(
        set,
        network,
        params.trial_swaps,
        params.acceptance_probability,
        params.temperature_floor,
        &mut rng,
    )?;
    let mut outcome = run(set, network, params, estimate.t0, &mut rng)?;
    outcome.trace.estimate = Some(estimate);
    Ok(outcome)
}

/// Anneal from a fixed initial temperature, skipping the estimate.
pub fn anneal_from_temperature(
    set: &CommunitySet,
    network: &EnrollmentNetwork,
    params: &SaParams,
    t0: f64,
) -> Result<AnnealOutcome> {
    params.validate()?;
    if !(t0 > 0.0) {
        return Err(Error::NonpositiveTemperature(t0));
    }
    run(set, network, params, t0, &mut rng_from_seed(params.seed))
}

fn run(set: &CommunitySet, network: &EnrollmentNetwork, params: &SaParams, t0: f64, rng: &mut Rng) -> Result<AnnealOutcome> {
    let initial_cost = score(set, network)?.cost;
    if set.community_count() < 2 {
        return Err(Error::NoSwapPossible);
    }
    let mut current = set.clone();
    let mut current_cost = initial_cost;
    let mut best = set.clone();
    let mut best_cost = initial_cost;
    let mut trace = AnnealTrace {
        t0,
        estimate: None,
        initial_cost,
        temperatures: Vec::new(),
        moves: Vec::new(),
        accepted_count: 0,
        rejected_count: 0,
    };

    let mut t = t0;
    while t > params.min_temperature {
        let step = trace.temperatures.len() as u32;
        trace.temperatures.push(t);
        for _ in 0..params.iters_per_temp {
            let (a, b) = select_pair(&current, rng)?;
            let delta = delta_cost_swap(&current, network, a, b)?;
            if accept_move(delta, t, rng) {
                current.swap_in_place(a, b)?;
                current_cost += delta;
                trace.accepted_count += 1;
                if current_cost < best_cost {
                    best_cost = current_cost;
                    best.clone_from(&current);
                }
            } else {
                trace.rejected_count += 1;
            }
            trace.moves.push(MoveRecord {
                step,
                current_cost,
                best_cost,
            });
            if cfg!(debug_assertions) && trace.moves.len() % CROSS_CHECK_INTERVAL == 0 {
                assert_eq!(score(&current, network)?.cost, current_cost, "incremental cost drifted");
            }
        }
        t *= params.cooling_rate;
    }

    Ok(AnnealOutcome {
        best,
        best_cost,
        last: current,
        last_cost: current_cost,
        trace,
    })
}
