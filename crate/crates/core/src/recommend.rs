//! Analogical method recommendation: embedding retrieval followed by a
//! weighted re-rank over seven neighbor similarities.

use std::collections::HashMap;
use std::io::Write;
use std::str::FromStr;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{EntityId, EntityKind, KnowledgeGraph, RelationKind};
use crate::index::{sim_kg, IndexFilter, VectorIndex};
use crate::scalar::{mean_of, Scalar};

pub const DEFAULT_K_RETRIEVE: usize = 100;
pub const DEFAULT_K_RETURN: usize = 10;
pub const DEFAULT_PER_LIBRARY: usize = 3;

/// Re-ranking weights, in the order m, func, obj, it, iv, ot, neig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights<F> {
    pub m: F,
    pub func: F,
    pub obj: F,
    pub it: F,
    pub iv: F,
    pub ot: F,
    pub neig: F,
}

impl<F: Scalar> Default for Weights<F> {
    fn default() -> Self {
        Weights::from_array([0.05, 0.95, 0.8, 0.25, 0.05, 0.05, 0.95].map(F::of))
    }
}

impl<F: Scalar> Weights<F> {
    pub fn from_array(w: [F; 7]) -> Self {
        let [m, func, obj, it, iv, ot, neig] = w;
        Weights { m, func, obj, it, iv, ot, neig }
    }

    pub fn as_array(&self) -> [F; 7] {
        [self.m, self.func, self.obj, self.it, self.iv, self.ot, self.neig]
    }

    pub fn validate(&self) -> Result<()> {
        if self.as_array().iter().all(|w| w.is_finite() && *w >= F::zero()) {
            Ok(())
        } else {
            Err(Error::Config("weights must be finite and non-negative".into()))
        }
    }

    pub fn sum(&self) -> F {
        self.as_array().iter().fold(F::zero(), |a, &w| a + w)
    }

    pub fn total(&self, parts: &SimParts<F>) -> F {
        self.as_array()
            .iter()
            .zip(parts.as_array())
            .fold(F::zero(), |a, (&w, p)| a + w * p)
    }
}

impl<F: Scalar> FromStr for Weights<F> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let vals: Vec<F> = s
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<F>()
                    .map_err(|_| Error::Config(format!("weight {:?} is not a number", v.trim())))
            })
            .collect::<Result<_>>()?;
        let arr: [F; 7] = vals
            .try_into()
            .map_err(|v: Vec<F>| Error::Config(format!("expected 7 weights, got {}", v.len())))?;
        let w = Weights::from_array(arr);
        w.validate()?;
        Ok(w)
    }
}

/// Per-similarity values of one source/candidate pair, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimParts<F> {
    pub m: F,
    pub func: F,
    pub obj: F,
    pub it: F,
    pub iv: F,
    pub ot: F,
    pub neig: F,
}

impl<F: Scalar> SimParts<F> {
    pub fn as_array(&self) -> [F; 7] {
        [self.m, self.func, self.obj, self.it, self.iv, self.ot, self.neig]
    }
}

/// The embedding neighborhood of a method used by the re-rank.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborProfile<F> {
    pub method_vec: Vec<F>,
    pub obj_vec: Option<Vec<F>>,
    pub func_vecs: Vec<Vec<F>>,
    pub in_type_mean: Option<Vec<F>>,
    pub in_val_mean: Option<Vec<F>>,
    pub out_type_vec: Option<Vec<F>>,
    pub neig_vec: Vec<F>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    All,
    TargetLibrary(EntityId),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate<F> {
    pub method: EntityId,
    /// Retrieval similarity, reused as the method part of the re-rank.
    pub sim: F,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Recommendation<F> {
    pub method: EntityId,
    pub library: Option<EntityId>,
    pub total: F,
    pub parts: SimParts<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query<F> {
    pub source: EntityId,
    pub scope: Scope,
    pub k_retrieve: usize,
    pub k_return: usize,
    pub weights: Weights<F>,
}

impl<F: Scalar> Query<F> {
    pub fn new(source: EntityId, scope: Scope) -> Self {
        Query {
            source,
            scope,
            k_retrieve: DEFAULT_K_RETRIEVE,
            k_return: DEFAULT_K_RETURN,
            weights: Weights::default(),
        }
    }
}

/// Keeps at most `per_library` entries per library, preserving order.
pub fn diversity_cap<F>(ranked: Vec<Recommendation<F>>, per_library: usize) -> Vec<Recommendation<F>> {
    let mut seen: HashMap<Option<EntityId>, usize> = HashMap::new();
    ranked
        .into_iter()
        .filter(|r| {
            let n = seen.entry(r.library).or_insert(0);
            *n += 1;
            *n <= per_library
        })
        .collect()
}

/// Similarity of two optional components; absent or all-zero gives 0.
fn part<F: Scalar>(a: Option<&[F]>, b: Option<&[F]>) -> F {
    match (a, b) {
        (Some(a), Some(b)) => sim_kg(a, b).unwrap_or(F::zero()),
        _ => F::zero(),
    }
}

/// Largest similarity over all pairs of functionality vectors.
fn max_pair<F: Scalar>(a: &[Vec<F>], b: &[Vec<F>]) -> F {
    let mut best = F::zero();
    for x in a {
        for y in b {
            best = best.max(part(Some(x), Some(y)));
        }
    }
    best
}

/// Similarity parts of two profiles with a precomputed method similarity.
pub fn sim_parts<F: Scalar>(s: &NeighborProfile<F>, e: &NeighborProfile<F>, m: F) -> SimParts<F> {
    SimParts {
        m,
        func: max_pair(&s.func_vecs, &e.func_vecs),
        obj: part(s.obj_vec.as_deref(), e.obj_vec.as_deref()),
        it: part(s.in_type_mean.as_deref(), e.in_type_mean.as_deref()),
        iv: part(s.in_val_mean.as_deref(), e.in_val_mean.as_deref()),
        ot: part(s.out_type_vec.as_deref(), e.out_type_vec.as_deref()),
        neig: part(Some(&s.neig_vec), Some(&e.neig_vec)),
    }
}

pub struct Recommender<'a, F> {
    kg: &'a KnowledgeGraph,
    model: &'a EmbeddingModel<F>,
    index: &'a VectorIndex<F>,
}

impl<'a, F: Scalar> Recommender<'a, F> {
    pub fn new(kg: &'a KnowledgeGraph, model: &'a EmbeddingModel<F>, index: &'a VectorIndex<F>) -> Self {
        Recommender { kg, model, index }
    }

    fn method(&self, id: EntityId) -> Result<()> {
        let e = self.kg.entity(id)?;
        if e.kind != EntityKind::Method {
            return Err(Error::Config(format!("{} is a {}, not a Method", e.name, e.kind)));
        }
        Ok(())
    }

    fn mean_over(&self, ids: &[EntityId]) -> Result<Option<Vec<F>>> {
        let vs: Vec<&[F]> = ids.iter().map(|&c| self.model.entity_vec(c)).collect::<Result<_>>()?;
        Ok(mean_of(&vs))
    }

    pub fn build_profile(&self, method: EntityId) -> Result<NeighborProfile<F>> {
        self.method(method)?;
        let method_vec = self.model.entity_vec(method)?.to_vec();
        let out = |rel| self.kg.out(method, rel);
        let obj_vec = self.mean_over(out(RelationKind::OperationOf))?;
        let func_vecs: Vec<Vec<F>> = out(RelationKind::HasFunctionality)
            .iter()
            .map(|&f| self.model.entity_vec(f).map(<[F]>::to_vec))
            .collect::<Result<_>>()?;
        let in_type_mean = self.mean_over(out(RelationKind::HasInputType))?;
        let in_val_mean = self.mean_over(out(RelationKind::HasInputValue))?;
        let out_type_vec = self.mean_over(out(RelationKind::HasOutputType))?;

        let func_refs: Vec<&[F]> = func_vecs.iter().map(Vec::as_slice).collect();
        let func_mean = mean_of(&func_refs);
        let present: Vec<&[F]> = std::iter::once(Some(method_vec.as_slice()))
            .chain([
                obj_vec.as_deref(),
                func_mean.as_deref(),
                in_val_mean.as_deref(),
                in_type_mean.as_deref(),
                out_type_vec.as_deref(),
            ])
            .flatten()
            .collect();
        let neig_vec = mean_of(&present).expect("method vector is always present");

        Ok(NeighborProfile {
            method_vec,
            obj_vec,
            func_vecs,
            in_type_mean,
            in_val_mean,
            out_type_vec,
            neig_vec,
        })
    }

    pub fn retrieve_candidates(&self, source: EntityId, k: usize, scope: Scope) -> Result<Vec<Candidate<F>>> {
        self.method(source)?;
        let own = self.kg.entity(source)?.library;
        let mut filter = IndexFilter::of_kind(EntityKind::Method);
        match scope {
            Scope::All => filter.exclude_library = own,
            Scope::TargetLibrary(lib) => filter.restrict_library = Some(lib),
        }
        let query = self.model.entity_vec(source)?;
        // One extra slot covers the source itself when it passes the filter.
        let hits = self.index.top_k(query, k + 1, &filter)?;
        Ok(hits
            .into_iter()
            .filter(|&(m, _)| m != source)
            .take(k)
            .map(|(method, sim)| Candidate { method, sim })
            .collect())
    }

    pub fn rerank(
        &self,
        source: EntityId,
        candidates: &[Candidate<F>],
        weights: &Weights<F>,
    ) -> Result<Vec<Recommendation<F>>> {
        let sp = self.build_profile(source)?;
        let mut out = Vec::with_capacity(candidates.len());
        for c in candidates {
            let ep = self.build_profile(c.method)?;
            let parts = sim_parts(&sp, &ep, c.sim);
            out.push(Recommendation {
                method: c.method,
                library: self.kg.entity(c.method)?.library,
                total: weights.total(&parts),
                parts,
            });
        }
        out.sort_by(|a, b| {
            b.total
                .partial_cmp(&a.total)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.method.cmp(&b.method))
        });
        Ok(out)
    }

    pub fn recommend(&self, query: &Query<F>) -> Result<Vec<Recommendation<F>>> {
        query.weights.validate()?;
        if query.k_return == 0 {
            return Ok(Vec::new());
        }
        let candidates = self.retrieve_candidates(query.source, query.k_retrieve, query.scope)?;
        let mut ranked = self.rerank(query.source, &candidates, &query.weights)?;
        if query.scope == Scope::All {
            ranked = diversity_cap(ranked, DEFAULT_PER_LIBRARY);
        }
        ranked.truncate(query.k_return);
        Ok(ranked)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes `rank,method,library,total,m,func,obj,it,iv,ot,neig` rows.
pub fn write_recommendations<F: Scalar, W: Write>(
    kg: &KnowledgeGraph,
    recs: &[Recommendation<F>],
    mut out: W,
) -> Result<()> {
    writeln!(out, "rank,method,library,total,m,func,obj,it,iv,ot,neig")?;
    for (i, r) in recs.iter().enumerate() {
        let lib = r.library.map(|l| kg.name(l)).unwrap_or("-");
        write!(out, "{},{},{},{}", i + 1, csv_field(kg.name(r.method)), csv_field(lib), r.total)?;
        for p in r.parts.as_array() {
            write!(out, ",{p}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: u32, lib: u32) -> Recommendation<f64> {
        Recommendation {
            method: EntityId(method),
            library: Some(EntityId(lib)),
            total: 0.0,
            parts: SimParts::default(),
        }
    }

    #[test]
    fn default_weights() {
        let w = Weights::<f64>::default();
        assert_eq!(w.as_array(), [0.05, 0.95, 0.8, 0.25, 0.05, 0.05, 0.95]);
        assert!((w.sum() - 3.10).abs() < 1e-12);
    }

    #[test]
    fn weights_parse() {
        let w: Weights<f64> = "1,0,0,0,0,0,0.5".parse().unwrap();
        assert_eq!(w.neig, 0.5);
        assert!("1,2,3".parse::<Weights<f64>>().is_err());
        assert!("1,0,0,0,0,0,-1".parse::<Weights<f64>>().is_err());
        assert!("1,0,0,x,0,0,0".parse::<Weights<f64>>().is_err());
    }

    #[test]
    fn cap_keeps_first_three_per_library() {
        let ranked = vec![rec(1, 9), rec(2, 9), rec(3, 8), rec(4, 9), rec(5, 9), rec(6, 8)];
        let ids: Vec<u32> = diversity_cap(ranked, 3).iter().map(|r| r.method.0).collect();
        assert_eq!(ids, vec![1, 2, 3, 4, 6]);
        assert!(diversity_cap::<f64>(Vec::new(), 3).is_empty());
    }

    #[test]
    fn absent_components_contribute_zero() {
        let p = NeighborProfile {
            method_vec: vec![1.0, 0.0],
            obj_vec: None,
            func_vecs: vec![],
            in_type_mean: None,
            in_val_mean: None,
            out_type_vec: Some(vec![0.0, 1.0]),
            neig_vec: vec![1.0, 0.0],
        };
        let parts = sim_parts(&p, &p, 1.0);
        assert_eq!(parts.as_array(), [1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn func_takes_the_best_pair() {
        let mut a = NeighborProfile {
            method_vec: vec![1.0, 0.0],
            obj_vec: None,
            func_vecs: vec![vec![1.0, 0.0]],
            in_type_mean: None,
            in_val_mean: None,
            out_type_vec: None,
            neig_vec: vec![1.0, 0.0],
        };
        let b = NeighborProfile {
            func_vecs: vec![vec![0.0, 1.0]],
            ..a.clone()
        };
        assert_eq!(sim_parts(&a, &b, 1.0).func, 0.5);
        a.func_vecs.push(vec![0.0, 2.0]);
        assert_eq!(sim_parts(&a, &b, 1.0).func, 1.0);
    }
}
