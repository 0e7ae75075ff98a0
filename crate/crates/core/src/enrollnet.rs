//! Membership ingestion and the entity/section network.
//!
//! An [`EnrollmentTable`] holds deduplicated `(entity, section)` rows. From it
//! [`build_network`] derives the 0/1 adjacency `A` (entity × section) and the
//! connectivity `C = A·Aᵀ` (entity × entity). Both are stored sparsely:
//! `A` as per-entity section lists, `C` as a diagonal vector plus sorted
//! off-diagonal neighbor rows.

use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ComponentKind {
    Lecture,
    Tutorial,
    Lab,
    Other,
}

impl ComponentKind {
    pub fn code(self) -> &'static str {
        match self {
            ComponentKind::Lecture => "LEC",
            ComponentKind::Tutorial => "TUT",
            ComponentKind::Lab => "LAB",
            ComponentKind::Other => "OTHER",
        }
    }
}

impl FromStr for ComponentKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LEC" | "LECTURE" => Ok(ComponentKind::Lecture),
            "TUT" | "TUTORIAL" => Ok(ComponentKind::Tutorial),
            "LAB" => Ok(ComponentKind::Lab),
            "OTHER" => Ok(ComponentKind::Other),
            other => Err(format!("unknown component kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollmentRecord {
    pub entity_id: String,
    pub section_id: String,
    pub component_kind: Option<ComponentKind>,
}

impl EnrollmentRecord {
    pub fn new(entity_id: impl Into<String>, section_id: impl Into<String>) -> Self {
        Self {
            entity_id: entity_id.into(),
            section_id: section_id.into(),
            component_kind: None,
        }
    }

    pub fn with_kind(mut self, kind: ComponentKind) -> Self {
        self.component_kind = Some(kind);
        self
    }
}

/// Deduplicated membership rows with first-appearance orderings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollmentTable {
    entities: Vec<String>,
    sections: Vec<String>,
    section_kinds: Vec<Option<ComponentKind>>,
    /// `(entity index, section index)`, unique, in first-appearance order.
    records: Vec<(u32, u32)>,
}

impl EnrollmentTable {
    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn sections(&self) -> &[String] {
        &self.sections
    }

    pub fn section_kinds(&self) -> &[Option<ComponentKind>] {
        &self.section_kinds
    }

    pub fn records(&self) -> &[(u32, u32)] {
        &self.records
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    /// Enrollment count of every section.
    pub fn section_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.sections.len()];
        for &(_, s) in &self.records {
            sizes[s as usize] += 1;
        }
        sizes
    }
}

/// Collapse duplicate rows and fix entity/section orderings by first appearance.
///
/// Rows whose entity and section are both blank are skipped. A row with
/// exactly one of them blank is malformed (rows are numbered from 1).
pub fn load_enrollment<I>(rows: I) -> Result<EnrollmentTable>
where
    I: IntoIterator<Item = EnrollmentRecord>,
{
    load_numbered(rows.into_iter().enumerate().map(|(i, r)| (i + 1, r)))
}

fn load_numbered<I>(rows: I) -> Result<EnrollmentTable>
where
    I: IntoIterator<Item = (usize, EnrollmentRecord)>,
{
    let mut entity_index: HashMap<String, u32> = HashMap::new();
    let mut section_index: HashMap<String, u32> = HashMap::new();
    let mut table = EnrollmentTable {
        entities: Vec::new(),
        sections: Vec::new(),
        section_kinds: Vec::new(),
        records: Vec::new(),
    };
    let mut seen = BTreeSet::new();

    for (row, rec) in rows {
        let entity = rec.entity_id.trim();
        let section = rec.section_id.trim();
        match (entity.is_empty(), section.is_empty()) {
            (true, true) => continue,
            (true, false) => {
                return Err(Error::MalformedRow {
                    row,
                    reason: "missing entity_id".into(),
                })
            }
            (false, true) => {
                return Err(Error::MalformedRow {
                    row,
                    reason: "missing section_id".into(),
                })
            }
            _ => {}
        }
        let e = *entity_index.entry(entity.to_string()).or_insert_with(|| {
            table.entities.push(entity.to_string());
            (table.entities.len() - 1) as u32
        });
        let s = *section_index.entry(section.to_string()).or_insert_with(|| {
            table.sections.push(section.to_string());
            table.section_kinds.push(None);
            (table.sections.len() - 1) as u32
        });
        if table.section_kinds[s as usize].is_none() {
            table.section_kinds[s as usize] = rec.component_kind;
        }
        if seen.insert((e, s)) {
            table.records.push((e, s));
        }
    }

    if table.records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(table)
}

/// Read the `entity_id,section_id[,component]` CSV format.
///
/// Rows are numbered by file line, so the first data row is row 2.
pub fn read_enrollment_csv<R: Read>(reader: R) -> Result<EnrollmentTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::MalformedRow {
            row: 1,
            reason: e.to_string(),
        })?
        .clone();
    let column = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (entity_col, section_col) = match (column("entity_id"), column("section_id")) {
        (Some(e), Some(s)) => (e, s),
        _ => {
            return Err(Error::MalformedRow {
                row: 1,
                reason: "header must name entity_id and section_id columns".into(),
            })
        }
    };
    let component_col = column("component");

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::MalformedRow {
            row: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let row = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let field = |c: usize| rec.get(c).unwrap_or("").to_string();
        let component_kind = match component_col.map(&field) {
            Some(k) if !k.is_empty() => Some(
                k.parse::<ComponentKind>()
                    .map_err(|reason| Error::MalformedRow { row, reason })?,
            ),
            _ => None,
        };
        rows.push((
            row,
            EnrollmentRecord {
                entity_id: field(entity_col),
                section_id: field(section_col),
                component_kind,
            },
        ));
    }
    load_numbered(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NetworkVariant {
    #[default]
    FullyDense,
    Sparse,
}

impl FromStr for NetworkVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "dense" | "fully_dense" => Ok(NetworkVariant::FullyDense),
            "sparse" => Ok(NetworkVariant::Sparse),
            other => Err(format!("unknown network variant {other:?}")),
        }
    }
}

/// Filtering applied when building a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkOptions {
    pub variant: NetworkVariant,
    /// Sections with more members than this are dropped from a sparse network.
    pub max_section_size: usize,
    /// Sections of these kinds are dropped from a sparse network.
    pub drop_kinds: BTreeSet<ComponentKind>,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            variant: NetworkVariant::FullyDense,
            max_section_size: 30,
            drop_kinds: BTreeSet::new(),
        }
    }
}

impl NetworkOptions {
    pub fn dense() -> Self {
        Self::default()
    }

    pub fn sparse(max_section_size: usize) -> Self {
        Self {
            variant: NetworkVariant::Sparse,
            max_section_size,
            drop_kinds: BTreeSet::new(),
        }
    }
}

/// Entity/section network with adjacency `A` and connectivity `C = A·Aᵀ`.
///
/// Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnrollmentNetwork {
    entities: Vec<String>,
    sections: Vec<String>,
    section_kinds: Vec<Option<ComponentKind>>,
    variant: NetworkVariant,
    /// Row `i` of `A`: sorted retained section indices of entity `i`.
    entity_sections: Vec<Vec<u32>>,
    /// Column `j` of `A`: sorted member entities of section `j`.
    section_members: Vec<Vec<u32>>,
    /// Off-diagonal row `i` of `C`, sorted by neighbor index, weights > 0.
    neighbors: Vec<Vec<(u32, u32)>>,
}

pub fn build_network(table: &EnrollmentTable, options: &NetworkOptions) -> Result<EnrollmentNetwork> {
    if options.max_section_size == 0 {
        return Err(Error::InvalidParameter("max_section_size must be at least 1".into()));
    }
    let sizes = table.section_sizes();
    let keep: Vec<bool> = (0..table.section_count())
        .map(|s| match options.variant {
            NetworkVariant::FullyDense => true,
            NetworkVariant::Sparse => {
                sizes[s] <= options.max_section_size
                    && table.section_kinds[s].map_or(true, |k| !options.drop_kinds.contains(&k))
            }
        })
        .collect();

    let mut remap = vec![u32::MAX; table.section_count()];
    let mut sections = Vec::new();
    let mut section_kinds = Vec::new();
    for (s, _) in keep.iter().enumerate().filter(|(_, k)| **k) {
        remap[s] = sections.len() as u32;
        sections.push(table.sections[s].clone());
        section_kinds.push(table.section_kinds[s]);
    }

    let n = table.entity_count();
    let mut entity_sections = vec![Vec::new(); n];
    let mut section_members = vec![Vec::new(); sections.len()];
    for &(e, s) in &table.records {
        let s = remap[s as usize];
        if s != u32::MAX {
            entity_sections[e as usize].push(s);
            section_members[s as usize].push(e);
        }
    }
    for row in entity_sections.iter_mut().chain(section_members.iter_mut()) {
        row.sort_unstable();
    }

    let neighbors = connectivity_rows(&entity_sections, &section_members);
    Ok(EnrollmentNetwork {
        entities: table.entities.clone(),
        sections,
        section_kinds,
        variant: options.variant,
        entity_sections,
        section_members,
        neighbors,
    })
}

/// Off-diagonal rows of `A·Aᵀ` using a dense scratch accumulator.
fn connectivity_rows(entity_sections: &[Vec<u32>], section_members: &[Vec<u32>]) -> Vec<Vec<(u32, u32)>> {
    let n = entity_sections.len();
    let mut acc = vec![0u32; n];
    let mut touched = Vec::new();
    let mut rows = Vec::with_capacity(n);
    for (i, secs) in entity_sections.iter().enumerate() {
        for &s in secs {
            for &k in &section_members[s as usize] {
                if k as usize != i {
                    if acc[k as usize] == 0 {
                        touched.push(k);
                    }
                    acc[k as usize] += 1;
                }
            }
        }
        touched.sort_unstable();
        let row: Vec<(u32, u32)> = touched.iter().map(|&k| (k, acc[k as usize])).collect();
        for &k in &touched {
            acc[k as usize] = 0;
        }
        touched.clear();
        rows.push(row);
    }
    rows
}

impl EnrollmentNetwork {
    /// Build directly from adjacency rows (`sections[i]` lists the sections of
    /// entity `i`). Entity and section ids are generated as `e<i>` / `s<j>`.
    pub fn from_adjacency(section_count: usize, entity_sections: &[Vec<usize>]) -> Self {
        let mut records = BTreeSet::new();
        for (i, secs) in entity_sections.iter().enumerate() {
            for &s in secs {
                assert!(s < section_count, "section {s} out of range");
                records.insert((i as u32, s as u32));
            }
        }
        let table = EnrollmentTable {
            entities: (0..entity_sections.len()).map(|i| format!("e{i}")).collect(),
            sections: (0..section_count).map(|j| format!("s{j}")).collect(),
            section_kinds: vec![None; section_count],
            records: records.into_iter().collect(),
        };
        build_network(&table, &NetworkOptions::dense()).expect("dense build cannot fail")
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn section_count(&self) -> usize {
        self.sections.len()
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn sections(&self) -> &[String] {
        &self.sections
    }

    pub fn section_kinds(&self) -> &[Option<ComponentKind>] {
        &self.section_kinds
    }

    pub fn variant(&self) -> NetworkVariant {
        self.variant
    }

    pub fn entity_sections(&self, i: usize) -> &[u32] {
        &self.entity_sections[i]
    }

    pub fn section_members(&self, j: usize) -> &[u32] {
        &self.section_members[j]
    }

    /// Off-diagonal nonzero entries of row `i` of `C`, sorted by column.
    pub fn neighbors(&self, i: usize) -> &[(u32, u32)] {
        &self.neighbors[i]
    }

    /// `A[i][j]`.
    pub fn adjacency(&self, i: usize, j: usize) -> u8 {
        u8::from(self.entity_sections[i].binary_search(&(j as u32)).is_ok())
    }

    /// `C[i][k]`, diagonal included.
    pub fn connectivity(&self, i: usize, k: usize) -> u32 {
        if i == k {
            return self.entity_sections[i].len() as u32;
        }
        match self.neighbors[i].binary_search_by_key(&(k as u32), |&(n, _)| n) {
            Ok(pos) => self.neighbors[i][pos].1,
            Err(_) => 0,
        }
    }

    /// Number of sections shared by two entities.
    pub fn connections(&self, i: usize, k: usize) -> Result<u32> {
        let len = self.entity_count();
        for index in [i, k] {
            if index >= len {
                return Err(Error::IndexOutOfRange { index, len });
            }
        }
        Ok(self.connectivity(i, k))
    }

    /// Entities that share no section with anyone.
    pub fn isolated_entities(&self) -> Vec<usize> {
        (0..self.entity_count()).filter(|&i| self.neighbors[i].is_empty()).collect()
    }

    /// Upper-triangle off-diagonal entries `(i, k, C[i][k])` with `i < k`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u32)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(k, _)| (k as usize) > i)
                .map(move |&(k, w)| (i, k as usize, w))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Sum of the off-diagonal upper triangle of `C`.
    pub fn total_weight(&self) -> u64 {
        self.edges().map(|(_, _, w)| u64::from(w)).sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "entities": self.entities,
            "sections": self.sections,
            "edges": self.edges().map(|(i, k, w)| [i as u64, k as u64, u64::from(w)]).collect::<Vec<_>>(),
        })
    }
}
