//! Exact cosine top-k search over entity embeddings.

use std::cmp::Ordering;
use std::io::{BufRead, Write};

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{EntityId, EntityKind, KnowledgeGraph};
use crate::scalar::{dot, norm, Scalar};

/// Normalized cosine similarity `(cos + 1) / 2`, in `[0, 1]`.
pub fn sim_kg<F: Scalar>(a: &[F], b: &[F]) -> Result<F> {
    if a.len() != b.len() {
        return Err(Error::Vector(format!("length mismatch: {} vs {}", a.len(), b.len())));
    }
    let (na, nb) = (norm(a), norm(b));
    if na == F::zero() || nb == F::zero() {
        return Err(Error::Vector("similarity of an all-zero vector".into()));
    }
    Ok(from_cos(dot(a, b) / (na * nb)))
}

fn from_cos<F: Scalar>(cos: F) -> F {
    // Rounding can push |cos| a hair past 1.
    let half = F::of(0.5);
    ((cos + F::one()) * half).max(F::zero()).min(F::one())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexEntry {
    pub entity: EntityId,
    pub kind: EntityKind,
    pub library: Option<EntityId>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IndexFilter {
    pub kind: Option<EntityKind>,
    pub exclude_library: Option<EntityId>,
    pub restrict_library: Option<EntityId>,
}

impl IndexFilter {
    pub fn of_kind(kind: EntityKind) -> Self {
        IndexFilter {
            kind: Some(kind),
            ..Self::default()
        }
    }

    pub fn accepts(&self, e: &IndexEntry) -> bool {
        self.kind.is_none_or(|k| e.kind == k)
            && self.exclude_library.is_none_or(|l| e.library != Some(l))
            && self.restrict_library.is_none_or(|l| e.library == Some(l))
    }
}

/// Immutable row store: one contiguous buffer plus cached norms.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorIndex<F> {
    width: usize,
    entries: Vec<IndexEntry>,
    rows: Vec<F>,
    norms: Vec<F>,
}

impl<F: Scalar> VectorIndex<F> {
    /// Indexes arbitrary rows. Rows must share one length and be finite and
    /// non-zero.
    pub fn from_rows(rows: impl IntoIterator<Item = (IndexEntry, Vec<F>)>) -> Result<Self> {
        let mut index = VectorIndex {
            width: 0,
            entries: Vec::new(),
            rows: Vec::new(),
            norms: Vec::new(),
        };
        for (entry, v) in rows {
            index.push(entry, &v)?;
        }
        Ok(index)
    }

    fn push(&mut self, entry: IndexEntry, v: &[F]) -> Result<()> {
        if self.entries.is_empty() {
            self.width = v.len();
        } else if v.len() != self.width {
            return Err(Error::Vector(format!(
                "{}: length {} differs from index width {}",
                entry.entity,
                v.len(),
                self.width
            )));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Vector(format!("{}: non-finite entry", entry.entity)));
        }
        let n = norm(v);
        if n == F::zero() {
            return Err(Error::Vector(format!("{}: all-zero vector", entry.entity)));
        }
        self.entries.push(entry);
        self.rows.extend_from_slice(v);
        self.norms.push(n);
        Ok(())
    }

    /// Indexes every entity of `kg` with its embedding. ComplEx vectors are
    /// the concatenation of real and imaginary parts.
    pub fn build(kg: &KnowledgeGraph, model: &EmbeddingModel<F>) -> Result<Self> {
        Self::from_rows(kg.entities().iter().map(|e| {
            let v = model.entity_vec(e.id).map(<[F]>::to_vec).unwrap_or_default();
            (
                IndexEntry {
                    entity: e.id,
                    kind: e.kind,
                    library: e.library,
                },
                v,
            )
        }))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn entries(&self) -> &[IndexEntry] {
        &self.entries
    }

    fn position(&self, entity: EntityId) -> Option<usize> {
        // Built indexes are in id order; fall back to a scan otherwise.
        match self.entries.get(entity.index()) {
            Some(e) if e.entity == entity => Some(entity.index()),
            _ => self.entries.iter().position(|e| e.entity == entity),
        }
    }

    pub fn vector(&self, entity: EntityId) -> Option<&[F]> {
        let i = self.position(entity)?;
        Some(&self.rows[i * self.width..(i + 1) * self.width])
    }

    pub fn entry(&self, entity: EntityId) -> Option<&IndexEntry> {
        self.position(entity).map(|i| &self.entries[i])
    }

    /// Exact top-`k` by [`sim_kg`] among entries passing `filter`, ordered by
    /// similarity descending then entity id ascending.
    pub fn top_k(&self, query: &[F], k: usize, filter: &IndexFilter) -> Result<Vec<(EntityId, F)>> {
        if k == 0 {
            return Err(Error::Vector("k must be at least 1".into()));
        }
        if !self.is_empty() && query.len() != self.width {
            return Err(Error::Vector(format!(
                "query length {} differs from index width {}",
                query.len(),
                self.width
            )));
        }
        let qn = norm(query);
        if qn == F::zero() || !qn.is_finite() {
            return Err(Error::Vector("query must be finite and non-zero".into()));
        }
        let mut hits: Vec<(EntityId, F)> = self
            .entries
            .iter()
            .enumerate()
            .filter(|(_, e)| filter.accepts(e))
            .map(|(i, e)| {
                let row = &self.rows[i * self.width..(i + 1) * self.width];
                (e.entity, from_cos(dot(query, row) / (qn * self.norms[i])))
            })
            .collect();
        let order = |a: &(EntityId, F), b: &(EntityId, F)| {
            b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
        };
        if hits.len() > k {
            hits.select_nth_unstable_by(k - 1, order);
            hits.truncate(k);
        }
        hits.sort_by(order);
        Ok(hits)
    }

    /// Sidecar rows `entity_id<TAB>kind<TAB>library_id|-`.
    pub fn write_sidecar<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            let lib = e.library.map_or_else(|| "-".to_string(), |l| l.0.to_string());
            writeln!(out, "{}\t{}\t{}", e.entity.0, e.kind, lib)?;
        }
        Ok(())
    }

    /// Rebuilds an index from a model file and its sidecar.
    pub fn load<R: BufRead>(model: &EmbeddingModel<F>, sidecar: R) -> Result<Self> {
        let mut index = VectorIndex::from_rows(std::iter::empty())?;
        for (i, line) in sidecar.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Format {
                line: i + 1,
                message: m.to_string(),
            };
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(bad("expected 3 tab-separated columns"));
            }
            let entity = EntityId(cols[0].parse().map_err(|_| bad("bad entity id"))?);
            let kind: EntityKind = cols[1].parse().map_err(|_| bad("unknown entity kind"))?;
            let library = match cols[2] {
                "-" => None,
                s => Some(EntityId(s.parse().map_err(|_| bad("bad library id"))?)),
            };
            let v = model.entity_vec(entity)?;
            index.push(IndexEntry { entity, kind, library }, v)?;
        }
        Ok(index)
    }
}
