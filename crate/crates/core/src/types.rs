//! Core domain types: requests, rankings, group assignments, and exposure
//! vectors.
//!
//! Everything here is immutable after construction and safe to share across
//! concurrent evaluation workers.

use std::collections::{BTreeMap, BTreeSet, HashMap};

/// Opaque document identifier.
pub type DocId = String;
/// Opaque author identifier.
pub type AuthorId = String;
/// Opaque group identifier.
pub type GroupId = String;
/// Opaque query identifier.
pub type Qid = String;

/// One candidate document: its authors (in listed order) and binary relevance.
///
/// An empty author list is legal; such a document absorbs browsing attention
/// without crediting any author.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocumentRecord {
    pub doc_id: DocId,
    pub authors: Vec<AuthorId>,
    pub relevant: bool,
}

impl DocumentRecord {
    pub fn new(doc_id: impl Into<DocId>, authors: Vec<AuthorId>, relevant: bool) -> Self {
        Self {
            doc_id: doc_id.into(),
            authors,
            relevant,
        }
    }
}

/// A query together with its candidate document set.
#[derive(Debug, Clone)]
pub struct Request {
    qid: Qid,
    query_text: String,
    candidates: Vec<DocumentRecord>,
    by_id: HashMap<DocId, usize>,
}

impl Request {
    /// Builds a request. Panics if two candidates share a doc_id; candidate
    /// sets are sets by contract and duplicate ids have no meaning.
    pub fn new(
        qid: impl Into<Qid>,
        query_text: impl Into<String>,
        candidates: Vec<DocumentRecord>,
    ) -> Self {
        let mut by_id = HashMap::with_capacity(candidates.len());
        for (i, doc) in candidates.iter().enumerate() {
            let prev = by_id.insert(doc.doc_id.clone(), i);
            assert!(
                prev.is_none(),
                "duplicate doc_id {:?} in candidate set",
                doc.doc_id
            );
        }
        Self {
            qid: qid.into(),
            query_text: query_text.into(),
            candidates,
            by_id,
        }
    }

    pub fn qid(&self) -> &Qid {
        &self.qid
    }

    pub fn query_text(&self) -> &str {
        &self.query_text
    }

    pub fn candidates(&self) -> &[DocumentRecord] {
        &self.candidates
    }

    pub fn document(&self, doc_id: &str) -> Option<&DocumentRecord> {
        self.by_id.get(doc_id).map(|&i| &self.candidates[i])
    }

    pub fn contains(&self, doc_id: &str) -> bool {
        self.by_id.contains_key(doc_id)
    }

    /// Number of relevant candidates.
    pub fn relevant_count(&self) -> usize {
        self.candidates.iter().filter(|d| d.relevant).count()
    }

    /// Inverts the candidate authorship relation: author -> documents they
    /// appear on. Authors appearing in no document are absent from the map.
    pub fn author_documents(&self) -> BTreeMap<AuthorId, BTreeSet<DocId>> {
        let mut map: BTreeMap<AuthorId, BTreeSet<DocId>> = BTreeMap::new();
        for doc in &self.candidates {
            for author in &doc.authors {
                map.entry(author.clone())
                    .or_default()
                    .insert(doc.doc_id.clone());
            }
        }
        map
    }
}

/// An ordered ranking of document ids, as emitted by a system for one
/// impression. Construction does not validate: run files may contain
/// duplicates or unknown documents, which [`crate::validate`] reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking(Vec<DocId>);

impl Ranking {
    pub fn new(items: Vec<DocId>) -> Self {
        Self(items)
    }

    pub fn items(&self) -> &[DocId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DocId> {
        self.0.iter()
    }

    pub fn into_items(self) -> Vec<DocId> {
        self.0
    }
}

impl FromIterator<DocId> for Ranking {
    fn from_iter<T: IntoIterator<Item = DocId>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// The ordered list of rankings a system emitted for one query sequence,
/// one entry per impression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankingSequence {
    pub qid: Qid,
    pub rankings: Vec<Ranking>,
}

impl RankingSequence {
    pub fn new(qid: impl Into<Qid>, rankings: Vec<Ranking>) -> Self {
        Self {
            qid: qid.into(),
            rankings,
        }
    }

    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }
}

/// Author-to-group assignment. Each assigned author belongs to exactly one
/// group; authors absent from the map are unassigned.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroupAssignment {
    map: BTreeMap<AuthorId, GroupId>,
}

impl GroupAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assigns an author to a group. Re-assigning to the same group is a
    /// no-op; a conflicting assignment returns the existing group id as Err.
    pub fn assign(
        &mut self,
        author: impl Into<AuthorId>,
        group: impl Into<GroupId>,
    ) -> Result<(), GroupId> {
        let author = author.into();
        let group = group.into();
        match self.map.get(&author) {
            Some(existing) if *existing != group => Err(existing.clone()),
            Some(_) => Ok(()),
            None => {
                self.map.insert(author, group);
                Ok(())
            }
        }
    }

    pub fn group_of(&self, author: &str) -> Option<&GroupId> {
        self.map.get(author)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AuthorId, &GroupId)> {
        self.map.iter()
    }
}

impl FromIterator<(AuthorId, GroupId)> for GroupAssignment {
    /// Collects pairs, keeping the first group seen for each author.
    fn from_iter<T: IntoIterator<Item = (AuthorId, GroupId)>>(iter: T) -> Self {
        let mut ga = Self::new();
        for (a, g) in iter {
            let _ = ga.assign(a, g);
        }
        ga
    }
}

/// Accumulated exposure per author. Values are nonnegative; an absent key
/// means zero exposure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExposureVector {
    map: BTreeMap<AuthorId, f64>,
}

impl ExposureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, author: impl Into<AuthorId>, amount: f64) {
        debug_assert!(amount >= 0.0, "exposure increments are nonnegative");
        *self.map.entry(author.into()).or_insert(0.0) += amount;
    }

    /// Exposure of an author, zero if absent.
    pub fn get(&self, author: &str) -> f64 {
        self.map.get(author).copied().unwrap_or(0.0)
    }

    /// Pointwise accumulation of another vector into this one.
    pub fn merge(&mut self, other: &ExposureVector) {
        for (author, amount) in &other.map {
            *self.map.entry(author.clone()).or_insert(0.0) += amount;
        }
    }

    /// Multiplies every entry by a nonnegative factor.
    pub fn scale(&mut self, factor: f64) {
        debug_assert!(factor >= 0.0);
        for v in self.map.values_mut() {
            *v *= factor;
        }
    }

    pub fn total(&self) -> f64 {
        self.map.values().sum()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AuthorId, f64)> {
        self.map.iter().map(|(a, &v)| (a, v))
    }
}

impl FromIterator<(AuthorId, f64)> for ExposureVector {
    fn from_iter<T: IntoIterator<Item = (AuthorId, f64)>>(iter: T) -> Self {
        let mut ev = Self::new();
        for (a, v) in iter {
            ev.add(a, v);
        }
        ev
    }
}

/// Summed exposure per group. Values are nonnegative; an absent key means
/// zero exposure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupExposure {
    map: BTreeMap<GroupId, f64>,
}

impl GroupExposure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, group: impl Into<GroupId>, amount: f64) {
        *self.map.entry(group.into()).or_insert(0.0) += amount;
    }

    /// Exposure of a group, zero if absent.
    pub fn get(&self, group: &str) -> f64 {
        self.map.get(group).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.map.values().sum()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&GroupId, f64)> {
        self.map.iter().map(|(g, &v)| (g, v))
    }

    /// Union of this vector's group ids with another's, in sorted order.
    pub fn group_union<'a>(&'a self, other: &'a GroupExposure) -> BTreeSet<&'a GroupId> {
        self.map.keys().chain(other.map.keys()).collect()
    }
}

impl FromIterator<(GroupId, f64)> for GroupExposure {
    fn from_iter<T: IntoIterator<Item = (GroupId, f64)>>(iter: T) -> Self {
        let mut ge = Self::new();
        for (g, v) in iter {
            ge.add(g, v);
        }
        ge
    }
}
