//! Community creation: hyperedge coarsening (plain and modified) and
//! best-choice agglomerative clustering.

mod best_choice;

pub use best_choice::{
    bc_score, best_choice, best_choice_traced, monte_carlo_best_choice, BestChoiceOutcome, BestChoiceParams,
    ClusterScore, Merge, MonteCarloOutcome, ScoreFn,
};

use std::fmt::Write as _;

use crate::community::CommunitySet;
use crate::enrollnet::EnrollmentNetwork;
use crate::quality::{inter_community_weights, QualityReport};

/// A section viewed as a net over its members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperedge {
    pub section: usize,
    pub members: Vec<u32>,
}

impl Hyperedge {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.members.len() as f64
    }
}

/// Hyperedges with at least two members in visit order: size ascending
/// (equivalently weight descending), then section index.
pub fn hyperedges(network: &EnrollmentNetwork) -> Vec<Hyperedge> {
    let mut edges: Vec<Hyperedge> = (0..network.section_count())
        .map(|s| Hyperedge {
            section: s,
            members: network.section_members(s).to_vec(),
        })
        .filter(|e| e.size() >= 2)
        .collect();
    edges.sort_by_key(|e| (e.size(), e.section));
    edges
}

fn coarsen(network: &EnrollmentNetwork, keep_remainder: bool) -> CommunitySet {
    let n = network.entity_count();
    let mut marked = vec![false; n];
    let mut communities: Vec<Vec<u32>> = Vec::new();
    for edge in hyperedges(network) {
        let unmarked: Vec<u32> = edge.members.iter().copied().filter(|&e| !marked[e as usize]).collect();
        let clean = unmarked.len() == edge.size();
        if unmarked.is_empty() || !(clean || keep_remainder) {
            continue;
        }
        for &e in &unmarked {
            marked[e as usize] = true;
        }
        communities.push(unmarked);
    }
    communities.extend((0..n as u32).filter(|&e| !marked[e as usize]).map(|e| vec![e]));
    CommunitySet::from_communities(communities, n).expect("coarsening yields a partition")
}

/// Hyperedge coarsening: a hyperedge whose members are all unmatched becomes a
/// community; any hyperedge touching a matched entity is skipped. Leftover
/// entities end up as singletons.
pub fn hyperedge_coarsen(network: &EnrollmentNetwork) -> CommunitySet {
    coarsen(network, false)
}

/// Like [`hyperedge_coarsen`], but the still-unmatched members of a partially
/// matched hyperedge are grouped into a community of their own.
pub fn modified_hyperedge_coarsen(network: &EnrollmentNetwork) -> CommunitySet {
    coarsen(network, true)
}

/// Graphviz rendering: one node per community labeled `LC<i> (int=<S_I>)`,
/// one edge per community pair carrying its external connection count.
pub fn to_dot(set: &CommunitySet, network: &EnrollmentNetwork, report: &QualityReport) -> String {
    let mut out = String::from("graph communities {\n");
    for (i, s) in report.per_community.iter().enumerate() {
        let _ = writeln!(out, "  LC{i} [label=\"LC{i} (int={})\"];", s.internal);
    }
    for (p, q, w) in inter_community_weights(set, network) {
        let _ = writeln!(out, "  LC{p} -- LC{q} [label=\"{w}\", weight={w}];");
    }
    out.push_str("}\n");
    out
}
