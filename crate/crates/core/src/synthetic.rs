//! Seeded synthetic membership data with planted communities.
//!
//! Entities are split into consecutive blocks of `community_size`. Each block
//! draws a random home set of sections; its members enroll mostly in home
//! sections and occasionally (probability `noise` per pick) anywhere.

use rand::seq::index::sample;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::enrollnet::{load_enrollment, EnrollmentRecord, EnrollmentTable};
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlantedSpec {
    pub entities: usize,
    pub sections: usize,
    pub community_size: usize,
    pub sections_per_entity: usize,
    pub home_sections: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for PlantedSpec {
    fn default() -> Self {
        Self {
            entities: 150,
            sections: 20,
            community_size: 10,
            sections_per_entity: 4,
            home_sections: 5,
            noise: 0.25,
            seed: 1,
        }
    }
}

impl PlantedSpec {
    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if self.entities == 0 || self.sections == 0 || self.community_size == 0 {
            return bad("entities, sections and community_size must be positive");
        }
        if self.sections_per_entity == 0 || self.sections_per_entity > self.sections {
            return bad("sections_per_entity must be between 1 and the section count");
        }
        if self.home_sections == 0 || self.home_sections > self.sections {
            return bad("home_sections must be between 1 and the section count");
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return bad("noise must lie in [0, 1]");
        }
        Ok(())
    }
}

pub struct Planted {
    pub table: EnrollmentTable,
    /// Planted block of each entity.
    pub truth: Vec<u32>,
}

pub fn planted(spec: &PlantedSpec) -> Result<Planted> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let blocks = spec.entities.div_ceil(spec.community_size);
    let homes: Vec<Vec<usize>> = (0..blocks)
        .map(|_| sample(&mut rng, spec.sections, spec.home_sections).into_vec())
        .collect();

    let width = digits(spec.entities);
    let swidth = digits(spec.sections);
    let mut rows = Vec::with_capacity(spec.entities * spec.sections_per_entity);
    let mut truth = Vec::with_capacity(spec.entities);
    for e in 0..spec.entities {
        let block = e / spec.community_size;
        truth.push(block as u32);
        let home = &homes[block];
        let mut chosen: Vec<usize> = Vec::with_capacity(spec.sections_per_entity);
        while chosen.len() < spec.sections_per_entity {
            let home_left = home.iter().any(|s| !chosen.contains(s));
            let s = if home_left && !rng.gen_bool(spec.noise) {
                home[rng.gen_range(0..home.len())]
            } else {
                rng.gen_range(0..spec.sections)
            };
            if !chosen.contains(&s) {
                chosen.push(s);
            }
        }
        for s in chosen {
            rows.push(EnrollmentRecord::new(
                format!("e{e:0width$}"),
                format!("s{s:0swidth$}"),
            ));
        }
    }
    Ok(Planted {
        table: load_enrollment(rows)?,
        truth,
    })
}

fn digits(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len()
}

/// Render a table in the `entity_id,section_id[,component]` CSV format.
pub fn to_csv(table: &EnrollmentTable) -> String {
    let with_kind = table.section_kinds().iter().any(Option::is_some);
    let mut out = String::from(if with_kind { "entity_id,section_id,component\n" } else { "entity_id,section_id\n" });
    for &(e, s) in table.records() {
        out.push_str(&table.entities()[e as usize]);
        out.push(',');
        out.push_str(&table.sections()[s as usize]);
        if with_kind {
            out.push(',');
            if let Some(k) = table.section_kinds()[s as usize] {
                out.push_str(k.code());
            }
        }
        out.push('\n');
    }
    out
}
