//! Knowledge-graph embedding models: ComplEx, DistMult and TransE scoring,
//! their analytic gradients, and the text model file.
//!
//! Vectors are stored flat. A ComplEx vector of dimension `d` occupies `2d`
//! slots, real parts first and imaginary parts after; DistMult and TransE
//! use `d` real slots.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::{EntityId, EntityKind, KnowledgeGraph, RelationKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    ComplEx,
    TransE,
    DistMult,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::ComplEx => "complex",
            ModelKind::TransE => "transe",
            ModelKind::DistMult => "distmult",
        }
    }

    /// Number of stored reals per vector of dimension `dim`.
    pub fn width(self, dim: usize) -> usize {
        match self {
            ModelKind::ComplEx => 2 * dim,
            ModelKind::TransE | ModelKind::DistMult => dim,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "complex" => Ok(ModelKind::ComplEx),
            "transe" => Ok(ModelKind::TransE),
            "distmult" => Ok(ModelKind::DistMult),
            other => Err(format!("unknown model kind {other:?}")),
        }
    }
}

/// Triple score `φ(h, r, t)`.
///
/// * ComplEx: `Re(Σ h·r·conj(t))`
/// * DistMult: `Σ h·r·t`
/// * TransE: `-‖h + r - t‖₂`
pub fn score<F: Scalar>(kind: ModelKind, h: &[F], r: &[F], t: &[F]) -> F {
    match kind {
        ModelKind::ComplEx => {
            let d = h.len() / 2;
            let (hr, hi) = h.split_at(d);
            let (rr, ri) = r.split_at(d);
            let (tr, ti) = t.split_at(d);
            (0..d).fold(F::zero(), |acc, k| {
                acc + hr[k] * rr[k] * tr[k] + hi[k] * rr[k] * ti[k] + hr[k] * ri[k] * ti[k]
                    - hi[k] * ri[k] * tr[k]
            })
        }
        ModelKind::DistMult => (0..h.len()).fold(F::zero(), |acc, k| acc + h[k] * r[k] * t[k]),
        ModelKind::TransE => -(0..h.len())
            .fold(F::zero(), |acc, k| {
                let x = h[k] + r[k] - t[k];
                acc + x * x
            })
            .sqrt(),
    }
}

/// Adds `scale · ∂φ/∂θ` into the three gradient buffers.
///
/// TransE has no gradient at `h + r = t`; it contributes zero there.
#[allow(clippy::too_many_arguments)]
pub fn accumulate_score_grad<F: Scalar>(
    kind: ModelKind,
    h: &[F],
    r: &[F],
    t: &[F],
    scale: F,
    gh: &mut [F],
    gr: &mut [F],
    gt: &mut [F],
) {
    match kind {
        ModelKind::ComplEx => {
            let d = h.len() / 2;
            for k in 0..d {
                let (hr, hi) = (h[k], h[d + k]);
                let (rr, ri) = (r[k], r[d + k]);
                let (tr, ti) = (t[k], t[d + k]);
                gh[k] = gh[k] + scale * (rr * tr + ri * ti);
                gh[d + k] = gh[d + k] + scale * (rr * ti - ri * tr);
                gr[k] = gr[k] + scale * (hr * tr + hi * ti);
                gr[d + k] = gr[d + k] + scale * (hr * ti - hi * tr);
                gt[k] = gt[k] + scale * (hr * rr - hi * ri);
                gt[d + k] = gt[d + k] + scale * (hi * rr + hr * ri);
            }
        }
        ModelKind::DistMult => {
            for k in 0..h.len() {
                gh[k] = gh[k] + scale * r[k] * t[k];
                gr[k] = gr[k] + scale * h[k] * t[k];
                gt[k] = gt[k] + scale * h[k] * r[k];
            }
        }
        ModelKind::TransE => {
            let dist = -score(kind, h, r, t);
            if dist <= F::zero() {
                return;
            }
            for k in 0..h.len() {
                let g = scale * (h[k] + r[k] - t[k]) / dist;
                gh[k] = gh[k] - g;
                gr[k] = gr[k] - g;
                gt[k] = gt[k] + g;
            }
        }
    }
}

/// `log(1 + exp(-y·φ))` for a label `y ∈ {+1, -1}`, computed stably.
pub fn logistic_loss<F: Scalar>(phi: F, label: F) -> F {
    let x = -label * phi;
    if x > F::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `∂/∂φ log(1 + exp(-y·φ)) = -y·σ(-y·φ)`.
pub fn logistic_loss_grad<F: Scalar>(phi: F, label: F) -> F {
    let x = -label * phi;
    let sigma = if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    };
    -label * sigma
}

/// Loss of one labelled triple including the optional L2 penalty
/// `λ(‖h‖² + ‖r‖² + ‖t‖²)`.
pub fn triple_loss<F: Scalar>(kind: ModelKind, h: &[F], r: &[F], t: &[F], label: F, l2: F) -> F {
    let penalty = if l2 > F::zero() {
        let sq = |v: &[F]| v.iter().fold(F::zero(), |a, &x| a + x * x);
        l2 * (sq(h) + sq(r) + sq(t))
    } else {
        F::zero()
    };
    logistic_loss(score(kind, h, r, t), label) + penalty
}

/// Gradient of [`triple_loss`] with respect to `(h, r, t)`.
pub fn triple_loss_grad<F: Scalar>(
    kind: ModelKind,
    h: &[F],
    r: &[F],
    t: &[F],
    label: F,
    l2: F,
) -> (Vec<F>, Vec<F>, Vec<F>) {
    let mut gh = vec![F::zero(); h.len()];
    let mut gr = vec![F::zero(); r.len()];
    let mut gt = vec![F::zero(); t.len()];
    let dphi = logistic_loss_grad(score(kind, h, r, t), label);
    accumulate_score_grad(kind, h, r, t, dphi, &mut gh, &mut gr, &mut gt);
    if l2 > F::zero() {
        let two = F::of(2.0);
        for (g, &x) in gh.iter_mut().zip(h).chain(gr.iter_mut().zip(r)).chain(gt.iter_mut().zip(t)) {
            *g = *g + two * l2 * x;
        }
    }
    (gh, gr, gt)
}

/// Trained (or initialized) embeddings for every entity and relation kind.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel<F> {
    kind: ModelKind,
    dim: usize,
    entities: Vec<F>,
    relations: Vec<F>,
}

impl<F: Scalar> EmbeddingModel<F> {
    pub fn zeros(kind: ModelKind, dim: usize, entity_count: usize) -> Self {
        let w = kind.width(dim);
        EmbeddingModel {
            kind,
            dim,
            entities: vec![F::zero(); entity_count * w],
            relations: vec![F::zero(); RelationKind::ALL.len() * w],
        }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Stored reals per vector.
    pub fn width(&self) -> usize {
        self.kind.width(self.dim)
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len() / self.width().max(1)
    }

    pub fn has_entity(&self, id: EntityId) -> bool {
        id.index() < self.entity_count()
    }

    /// Flat vector of an entity (ComplEx: real parts then imaginary parts).
    pub fn entity_vec(&self, id: EntityId) -> Result<&[F]> {
        let w = self.width();
        self.entities
            .get(id.index() * w..(id.index() + 1) * w)
            .ok_or_else(|| Error::MissingEmbedding(format!("entity {id}")))
    }

    pub fn entity_vec_mut(&mut self, id: EntityId) -> Result<&mut [F]> {
        let w = self.width();
        self.entities
            .get_mut(id.index() * w..(id.index() + 1) * w)
            .ok_or_else(|| Error::MissingEmbedding(format!("entity {id}")))
    }

    pub fn relation_vec(&self, rel: RelationKind) -> &[F] {
        let w = self.width();
        &self.relations[rel.ordinal() * w..(rel.ordinal() + 1) * w]
    }

    pub fn relation_vec_mut(&mut self, rel: RelationKind) -> &mut [F] {
        let w = self.width();
        &mut self.relations[rel.ordinal() * w..(rel.ordinal() + 1) * w]
    }

    pub fn score(&self, h: EntityId, r: RelationKind, t: EntityId) -> Result<F> {
        Ok(score(self.kind, self.entity_vec(h)?, self.relation_vec(r), self.entity_vec(t)?))
    }

    pub(crate) fn entity_data_mut(&mut self) -> &mut [F] {
        &mut self.entities
    }

    pub(crate) fn relation_data_mut(&mut self) -> &mut [F] {
        &mut self.relations
    }

    fn write_vec<W: Write>(&self, out: &mut W, v: &[F]) -> Result<()> {
        let mut first = true;
        let mut put = |out: &mut W, x: F| -> Result<()> {
            if !first {
                out.write_all(b" ")?;
            }
            first = false;
            write!(out, "{x}")?;
            Ok(())
        };
        match self.kind {
            ModelKind::ComplEx => {
                let (re, im) = v.split_at(self.dim);
                for k in 0..self.dim {
                    put(out, re[k])?;
                    put(out, im[k])?;
                }
            }
            _ => {
                for &x in v {
                    put(out, x)?;
                }
            }
        }
        writeln!(out)?;
        Ok(())
    }

    /// Writes the model file: a `model_kind dim entity_count relation_count`
    /// header, one `name<TAB>kind<TAB>values` line per entity in id order, then
    /// one `name<TAB>Relation<TAB>values` line per relation kind. ComplEx
    /// values are interleaved `re1 im1 re2 im2 ...`.
    pub fn write<W: Write>(&self, kg: &KnowledgeGraph, mut out: W) -> Result<()> {
        if kg.entity_count() != self.entity_count() {
            return Err(Error::Config(format!(
                "model has {} entities, graph has {}",
                self.entity_count(),
                kg.entity_count()
            )));
        }
        writeln!(
            out,
            "{} {} {} {}",
            self.kind,
            self.dim,
            self.entity_count(),
            RelationKind::ALL.len()
        )?;
        for e in kg.entities() {
            write!(out, "{}\t{}\t", e.name, e.kind)?;
            self.write_vec(&mut out, self.entity_vec(e.id)?)?;
        }
        for &rel in RelationKind::ALL {
            write!(out, "{rel}\tRelation\t")?;
            self.write_vec(&mut out, self.relation_vec(rel))?;
        }
        Ok(())
    }

    /// Reads a model file, mapping entity lines onto `kg` by `(kind, name)`.
    pub fn read<R: BufRead>(kg: &KnowledgeGraph, input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| fmt_err(1, "empty model file"))?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(fmt_err(1, "header must be `model_kind dim entity_count relation_count`"));
        }
        let kind: ModelKind = fields[0].parse().map_err(|m| fmt_err(1, m))?;
        let parse_n = |s: &str| s.parse::<usize>().map_err(|e| fmt_err(1, e));
        let (dim, n_ent, n_rel) = (parse_n(fields[1])?, parse_n(fields[2])?, parse_n(fields[3])?);
        if dim == 0 {
            return Err(fmt_err(1, "dimension must be positive"));
        }
        if n_ent != kg.entity_count() {
            return Err(fmt_err(1, format!("model has {n_ent} entities, graph has {}", kg.entity_count())));
        }
        if n_rel != RelationKind::ALL.len() {
            return Err(fmt_err(1, format!("expected {} relations, found {n_rel}", RelationKind::ALL.len())));
        }

        let lookup: HashMap<(EntityKind, &str), EntityId> =
            kg.entities().iter().map(|e| ((e.kind, e.name.as_str()), e.id)).collect();
        let mut model = EmbeddingModel::zeros(kind, dim, n_ent);
        let mut seen_entities = vec![false; n_ent];
        let mut seen_relations = vec![false; n_rel];
        for (i, line) in lines {
            let no = i + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(fmt_err(no, "expected name<TAB>kind<TAB>values"));
            }
            let values = model.parse_values(cols[2]).map_err(|m| fmt_err(no, m))?;
            if cols[1] == "Relation" {
                let rel: RelationKind = cols[0].parse().map_err(|m| fmt_err(no, m))?;
                model.relation_vec_mut(rel).copy_from_slice(&values);
                seen_relations[rel.ordinal()] = true;
            } else {
                let ek: EntityKind = cols[1].parse().map_err(|m| fmt_err(no, m))?;
                let id = *lookup
                    .get(&(ek, cols[0]))
                    .ok_or_else(|| fmt_err(no, format!("{ek} {:?} not in graph", cols[0])))?;
                model.entity_vec_mut(id)?.copy_from_slice(&values);
                seen_entities[id.index()] = true;
            }
        }
        if let Some(i) = seen_entities.iter().position(|s| !s) {
            return Err(Error::MissingEmbedding(kg.name(EntityId(i as u32)).to_string()));
        }
        if let Some(i) = seen_relations.iter().position(|s| !s) {
            return Err(Error::MissingEmbedding(RelationKind::ALL[i].to_string()));
        }
        Ok(model)
    }

    fn parse_values(&self, text: &str) -> std::result::Result<Vec<F>, String> {
        let raw: Vec<F> = text
            .split(' ')
            .map(|s| s.parse::<F>().map_err(|_| format!("bad number {s:?}")))
            .collect::<std::result::Result<_, _>>()?;
        if raw.len() != self.width() {
            return Err(format!("expected {} values, found {}", self.width(), raw.len()));
        }
        if raw.iter().any(|x| !x.is_finite()) {
            return Err("non-finite value".to_string());
        }
        Ok(match self.kind {
            ModelKind::ComplEx => {
                let re = raw.iter().step_by(2).copied();
                let im = raw.iter().skip(1).step_by(2).copied();
                re.chain(im).collect()
            }
            _ => raw,
        })
    }
}

fn fmt_err(line: usize, message: impl fmt::Display) -> Error {
    Error::Format {
        line,
        message: message.to_string(),
    }
}
