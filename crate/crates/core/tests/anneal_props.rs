use std::collections::HashMap;

use cohort_forge::anneal::{accept_move, cooling_steps, select_pair};
use cohort_forge::coarsen::{monte_carlo_best_choice, BestChoiceParams};
use cohort_forge::enrollnet::{build_network, NetworkOptions};
use cohort_forge::quality::total_score;
use cohort_forge::synthetic::{planted, PlantedSpec};
use cohort_forge::{anneal, anneal_from_temperature, CommunitySet, EnrollmentNetwork, SaParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture() -> (EnrollmentNetwork, CommunitySet) {
    let p = planted(&PlantedSpec { entities: 60, sections: 12, ..Default::default() }).unwrap();
    let net = build_network(&p.table, &NetworkOptions::dense()).unwrap();
    let start = monte_carlo_best_choice(&net, &BestChoiceParams { max_size: 6, seed: 2, ..Default::default() }, 5)
        .unwrap()
        .best;
    (net, start)
}

fn quick(seed: u64) -> SaParams {
    SaParams { min_temperature: 0.01, iters_per_temp: 20, seed, ..Default::default() }
}

#[test]
fn pair_selection_is_uniform_over_cross_pairs() {
    let set = CommunitySet::from_communities(vec![vec![0, 1], vec![2], vec![3, 4, 5]], 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let draws = 100_000;
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for _ in 0..draws {
        let (a, b) = select_pair(&set, &mut rng).unwrap();
        assert_ne!(set.community_of(a), set.community_of(b));
        *counts.entry((a.min(b), a.max(b))).or_default() += 1;
    }
    // 2·1 + 2·3 + 1·3 unordered cross pairs
    assert_eq!(counts.len(), 11);
    let expected = draws as f64 / 11.0;
    let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    // 10 degrees of freedom, p = 0.001
    assert!(chi2 < 29.59, "chi-square {chi2}");
}

#[test]
fn pair_selection_needs_two_communities() {
    let set = CommunitySet::from_communities(vec![vec![0, 1, 2]], 3).unwrap();
    assert!(select_pair(&set, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
}

#[test]
fn acceptance_rate_follows_boltzmann() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let trials = 100_000;
    for ratio in [0.5, 1.0, 2.0] {
        let delta = 6;
        let t = delta as f64 / ratio;
        let hits = (0..trials).filter(|_| accept_move(delta, t, &mut rng)).count();
        let p = (-ratio).exp();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let rate = hits as f64 / trials as f64;
        assert!((rate - p).abs() <= 3.0 * sigma, "ratio {ratio}: {rate} vs {p}");
    }
    assert!((0..1000).all(|_| accept_move(-1, 1e-9, &mut rng)));
}

#[test]
fn refinement_keeps_sizes_and_never_loses_score() {
    let (net, start) = fixture();
    let start_score = total_score(&start, &net).unwrap();
    for seed in 0..5 {
        let out = anneal(&start, &net, &quick(seed)).unwrap();
        for s in [&out.best, &out.last] {
            let mut a = s.sizes();
            let mut b = start.sizes();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
            assert_eq!(s.entity_count(), net.entity_count());
        }
        assert_eq!(-total_score(&out.best, &net).unwrap(), out.best_cost);
        assert_eq!(-total_score(&out.last, &net).unwrap(), out.last_cost);
        assert!(-out.best_cost >= start_score);
        let est = out.trace.estimate.unwrap();
        assert_eq!(out.trace.temperatures.len(), cooling_steps(est.t0, 0.95, 0.01));
        assert_eq!(out.trace.moves.len(), out.trace.temperatures.len() * 20);
        assert_eq!(out.trace.accepted_count + out.trace.rejected_count, out.trace.moves.len());
        assert!(out.trace.moves.windows(2).all(|w| w[1].best_cost <= w[0].best_cost));
    }
}

#[test]
fn same_seed_same_outcome() {
    let (net, start) = fixture();
    let a = anneal(&start, &net, &quick(4)).unwrap();
    let b = anneal(&start, &net, &quick(4)).unwrap();
    assert_eq!(a.best, b.best);
    assert_eq!(a.last, b.last);
    assert_eq!(a.trace.to_csv(), b.trace.to_csv());
}

#[test]
fn near_zero_temperature_is_greedy() {
    let (net, start) = fixture();
    let params = SaParams { min_temperature: 1e-12, iters_per_temp: 200, ..quick(5) };
    let out = anneal_from_temperature(&start, &net, &params, 1e-9).unwrap();
    let costs: Vec<i64> = out.trace.moves.iter().map(|m| m.current_cost).collect();
    assert!(costs.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(out.best_cost, out.last_cost);
}

#[test]
fn trace_csv_has_one_row_per_move() {
    let (net, start) = fixture();
    let out = anneal(&start, &net, &quick(6)).unwrap();
    let csv = out.trace.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("move,temperature,current_cost,best_cost"));
    assert_eq!(lines.count(), out.trace.moves.len());
}
