//! Community quality: internal/external connection counts, the total quality
//! score `S_T = Σ_j (S_I_j − S_E_j)` and the annealing cost `−S_T`.
//!
//! External connections are counted per community, so an edge between two
//! communities contributes to the `S_E` of both. All arithmetic is on integers.

use serde::{Deserialize, Serialize};

use crate::community::CommunitySet;
use crate::enrollnet::EnrollmentNetwork;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityScore {
    pub internal: u64,
    pub external: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityReport {
    pub per_community: Vec<CommunityScore>,
    pub total: i64,
    pub cost: i64,
}

fn check_cover(set: &CommunitySet, network: &EnrollmentNetwork) -> Result<()> {
    if set.entity_count() != network.entity_count() {
        return Err(Error::PartitionMismatch(format!(
            "set covers {} entities, network has {}",
            set.entity_count(),
            network.entity_count()
        )));
    }
    Ok(())
}

pub fn score(set: &CommunitySet, network: &EnrollmentNetwork) -> Result<QualityReport> {
    check_cover(set, network)?;
    let membership = set.membership();
    let per_community: Vec<CommunityScore> = set
        .communities()
        .iter()
        .enumerate()
        .map(|(j, members)| {
            let mut internal = 0u64;
            let mut external = 0u64;
            for &i in members {
                for &(k, w) in network.neighbors(i as usize) {
                    if membership[k as usize] as usize == j {
                        if k > i {
                            internal += u64::from(w);
                        }
                    } else {
                        external += u64::from(w);
                    }
                }
            }
            CommunityScore { internal, external }
        })
        .collect();
    let total: i64 = per_community.iter().map(|c| c.internal as i64 - c.external as i64).sum();
    Ok(QualityReport {
        per_community,
        total,
        cost: -total,
    })
}

/// `S_T` alone.
pub fn total_score(set: &CommunitySet, network: &EnrollmentNetwork) -> Result<i64> {
    score(set, network).map(|r| r.total)
}

/// `Cost_trial − Cost_current`.
pub fn cost_change(current: i64, trial: i64) -> i64 {
    trial - current
}

/// Change in cost if `a` and `b` exchanged communities, reading only rows
/// `a` and `b` of `C`.
///
/// With `W_int` the internal edge weight and `W` the total off-diagonal
/// weight, `S_T = W_int − 2(W − W_int) = 3·W_int − 2W`, so the cost moves by
/// `−3·ΔW_int`. The `a`–`b` edge is external before and after.
pub fn delta_cost_swap(set: &CommunitySet, network: &EnrollmentNetwork, a: usize, b: usize) -> Result<i64> {
    check_cover(set, network)?;
    let len = set.entity_count();
    for index in [a, b] {
        if index >= len {
            return Err(Error::IndexOutOfRange { index, len });
        }
    }
    let membership = set.membership();
    let (ca, cb) = (membership[a], membership[b]);
    if ca == cb {
        return Err(Error::SameCommunity(a, b));
    }
    // weight from `who` into communities ca / cb, excluding a and b themselves
    let pull = |who: usize| {
        let (mut to_a, mut to_b) = (0i64, 0i64);
        for &(k, w) in network.neighbors(who) {
            let k = k as usize;
            if k == a || k == b {
                continue;
            }
            let m = membership[k];
            if m == ca {
                to_a += i64::from(w);
            } else if m == cb {
                to_b += i64::from(w);
            }
        }
        (to_a, to_b)
    };
    let (a_to_a, a_to_b) = pull(a);
    let (b_to_a, b_to_b) = pull(b);
    let internal_gain = (a_to_b + b_to_a) - (a_to_a + b_to_b);
    Ok(-3 * internal_gain)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityFile {
    pub communities: Vec<QualityEntry>,
    pub total: i64,
    pub cost: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityEntry {
    pub id: usize,
    pub members: Vec<String>,
    pub internal: u64,
    pub external: u64,
}

impl QualityReport {
    pub fn to_file(&self, set: &CommunitySet, entity_ids: &[String]) -> QualityFile {
        QualityFile {
            communities: set
                .communities()
                .iter()
                .zip(&self.per_community)
                .enumerate()
                .map(|(id, (members, s))| QualityEntry {
                    id,
                    members: members.iter().map(|&e| entity_ids[e as usize].clone()).collect(),
                    internal: s.internal,
                    external: s.external,
                })
                .collect(),
            total: self.total,
            cost: self.cost,
        }
    }
}

/// Symmetric community-to-community external weights `(p, q, weight)`, `p < q`.
pub fn inter_community_weights(set: &CommunitySet, network: &EnrollmentNetwork) -> Vec<(usize, usize, u64)> {
    let membership = set.membership();
    let mut pairs = std::collections::BTreeMap::new();
    for (i, k, w) in network.edges() {
        let (p, q) = (membership[i] as usize, membership[k] as usize);
        if p != q {
            *pairs.entry((p.min(q), p.max(q))).or_insert(0u64) += u64::from(w);
        }
    }
    pairs.into_iter().map(|((p, q), w)| (p, q, w)).collect()
}
