use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of entity indices into disjoint, non-empty, size-capped communities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunitySet {
    communities: Vec<Vec<u32>>,
    membership: Vec<u32>,
    /// Position of each entity inside its community's member list.
    position: Vec<u32>,
    max_size: usize,
}

impl CommunitySet {
    /// Validate and build a set over entities `0..entity_count`.
    pub fn new(communities: Vec<Vec<u32>>, entity_count: usize, max_size: usize) -> Result<Self> {
        if max_size == 0 {
            return Err(Error::InvalidParameter("max_size must be at least 1".into()));
        }
        let mut membership = vec![u32::MAX; entity_count];
        let mut position = vec![u32::MAX; entity_count];
        for (c, members) in communities.iter().enumerate() {
            if members.is_empty() {
                return Err(Error::PartitionMismatch(format!("community {c} is empty")));
            }
            if members.len() > max_size {
                return Err(Error::PartitionMismatch(format!(
                    "community {c} has {} members, cap is {max_size}",
                    members.len()
                )));
            }
            for (p, &e) in members.iter().enumerate() {
                let slot = membership.get_mut(e as usize).ok_or_else(|| {
                    Error::PartitionMismatch(format!("entity {e} out of range for {entity_count} entities"))
                })?;
                if *slot != u32::MAX {
                    return Err(Error::PartitionMismatch(format!("entity {e} appears in more than one community")));
                }
                *slot = c as u32;
                position[e as usize] = p as u32;
            }
        }
        if let Some(e) = membership.iter().position(|&m| m == u32::MAX) {
            return Err(Error::PartitionMismatch(format!("entity {e} is not covered")));
        }
        Ok(Self {
            communities,
            membership,
            position,
            max_size,
        })
    }

    /// Build with the cap set to the largest community.
    pub fn from_communities(communities: Vec<Vec<u32>>, entity_count: usize) -> Result<Self> {
        let cap = communities.iter().map(Vec::len).max().unwrap_or(1).max(1);
        Self::new(communities, entity_count, cap)
    }

    pub fn singletons(entity_count: usize) -> Self {
        Self::from_communities((0..entity_count as u32).map(|e| vec![e]).collect(), entity_count)
            .expect("singletons partition")
    }

    pub fn communities(&self) -> &[Vec<u32>] {
        &self.communities
    }

    pub fn community(&self, c: usize) -> &[u32] {
        &self.communities[c]
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn entity_count(&self) -> usize {
        self.membership.len()
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn membership(&self) -> &[u32] {
        &self.membership
    }

    pub fn community_of(&self, entity: usize) -> usize {
        self.membership[entity] as usize
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.communities.iter().map(Vec::len).collect()
    }

    pub fn singleton_entities(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.communities.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
        v.sort_unstable();
        v
    }

    fn check_swap(&self, a: usize, b: usize) -> Result<()> {
        let len = self.entity_count();
        for index in [a, b] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        if self.membership[a] == self.membership[b] {
            return Err(Error::SameCommunity(a, b));
        }
        Ok(())
    }

    /// Exchange the communities of `a` and `b` in place.
    pub fn swap_in_place(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_swap(a, b)?;
        let (ca, cb) = (self.membership[a] as usize, self.membership[b] as usize);
        let (pa, pb) = (self.position[a] as usize, self.position[b] as usize);
        self.communities[ca][pa] = b as u32;
        self.communities[cb][pb] = a as u32;
        self.membership.swap(a, b);
        self.position.swap(a, b);
        Ok(())
    }

    /// Copy of the set with `a` and `b` exchanged.
    pub fn apply_swap(&self, a: usize, b: usize) -> Result<Self> {
        let mut next = self.clone();
        next.swap_in_place(a, b)?;
        Ok(next)
    }

    /// Canonical form: members sorted, communities ordered by smallest member.
    pub fn canonical(&self) -> Vec<Vec<u32>> {
        let mut out: Vec<Vec<u32>> = self
            .communities
            .iter()
            .map(|c| {
                let mut c = c.clone();
                c.sort_unstable();
                c
            })
            .collect();
        out.sort();
        out
    }
}

/// Serialized community listing, keyed by entity id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityFile {
    pub communities: Vec<CommunityEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_size: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityEntry {
    pub id: usize,
    pub members: Vec<String>,
}

impl CommunitySet {
    pub fn to_file(&self, entity_ids: &[String]) -> CommunityFile {
        CommunityFile {
            communities: self
                .communities
                .iter()
                .enumerate()
                .map(|(id, c)| CommunityEntry {
                    id,
                    members: c.iter().map(|&e| entity_ids[e as usize].clone()).collect(),
                })
                .collect(),
            max_size: Some(self.max_size),
        }
    }

    /// Resolve a community file against a network's entity ids. Every entity
    /// must appear exactly once.
    pub fn from_file(file: &CommunityFile, entity_ids: &[String]) -> Result<Self> {
        let index: HashMap<&str, u32> = entity_ids.iter().enumerate().map(|(i, e)| (e.as_str(), i as u32)).collect();
        let mut communities = Vec::with_capacity(file.communities.len());
        for entry in &file.communities {
            let members = entry
                .members
                .iter()
                .map(|m| {
                    index
                        .get(m.as_str())
                        .copied()
                        .ok_or_else(|| Error::PartitionMismatch(format!("unknown entity {m:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            communities.push(members);
        }
        let largest = communities.iter().map(Vec::len).max().unwrap_or(1);
        let cap = file.max_size.unwrap_or(largest).max(largest).max(1);
        Self::new(communities, entity_ids.len(), cap)
    }
}
