//! Filtered tail-prediction evaluation of a triple scorer.

use std::collections::HashSet;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationKind, Triple};
use crate::scalar::Scalar;

pub trait TripleScorer {
    fn score_triple(&self, head: EntityId, rel: RelationKind, tail: EntityId) -> Result<f64>;
}

impl<F: Scalar> TripleScorer for EmbeddingModel<F> {
    fn score_triple(&self, head: EntityId, rel: RelationKind, tail: EntityId) -> Result<f64> {
        Ok(self.score(head, rel, tail)?.to_f64_lossy())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkPredictionReport {
    pub mrr: f64,
    pub hits_at_1: f64,
    pub hits_at_3: f64,
    pub hits_at_10: f64,
    pub count: usize,
    /// Expected MRR of a scorer that ranks candidates uniformly at random,
    /// averaged over the same queries: the mean of `H(n)/n`.
    pub random_mrr: f64,
}

/// `H(n) = 1 + 1/2 + ... + 1/n`.
pub fn harmonic(n: usize) -> f64 {
    (1..=n).map(|i| 1.0 / i as f64).sum()
}

/// Ranks the true tail of each held-out triple among every entity of a kind
/// legal for the relation's tail, skipping candidates that form another
/// known triple (from `train_kg` or `held_out`).
///
/// Ties count against the true tail: the rank is one plus the number of other
/// candidates scoring at least as high.
pub fn eval_link_prediction<S: TripleScorer + ?Sized>(
    scorer: &S,
    held_out: &[Triple],
    train_kg: &KnowledgeGraph,
) -> Result<LinkPredictionReport> {
    if held_out.is_empty() {
        return Err(Error::Eval("held-out set is empty".into()));
    }
    if let Some(t) = held_out.iter().find(|t| train_kg.contains(t)) {
        return Err(Error::Eval(format!(
            "held-out triple ({}, {}, {}) is also a training triple",
            t.head, t.rel, t.tail
        )));
    }
    let held: HashSet<Triple> = held_out.iter().copied().collect();
    let known = |t: &Triple| train_kg.contains(t) || held.contains(t);

    let mut rr_sum = 0.0;
    let mut random_sum = 0.0;
    let mut hits = [0usize; 3];
    for t in held_out {
        let true_score = scorer.score_triple(t.head, t.rel, t.tail)?;
        let mut rank = 1usize;
        let mut n = 1usize;
        for &kind in t.rel.tail_kinds() {
            for &cand in train_kg.entities_of(kind) {
                if cand == t.tail {
                    continue;
                }
                let c = Triple::new(t.head, t.rel, cand);
                if known(&c) {
                    continue;
                }
                n += 1;
                if scorer.score_triple(t.head, t.rel, cand)? >= true_score {
                    rank += 1;
                }
            }
        }
        rr_sum += 1.0 / rank as f64;
        random_sum += harmonic(n) / n as f64;
        for (h, k) in hits.iter_mut().zip([1, 3, 10]) {
            if rank <= k {
                *h += 1;
            }
        }
    }
    let count = held_out.len();
    let frac = |x: usize| x as f64 / count as f64;
    Ok(LinkPredictionReport {
        mrr: rr_sum / count as f64,
        hits_at_1: frac(hits[0]),
        hits_at_3: frac(hits[1]),
        hits_at_10: frac(hits[2]),
        count,
        random_mrr: random_sum / count as f64,
    })
}

/// Holds out a seeded random `fraction` of the triples, returning the reduced
/// graph and the held-out triples.
pub fn split_held_out(kg: &KnowledgeGraph, fraction: f64, seed: u64) -> Result<(KnowledgeGraph, Vec<Triple>)> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!("held-out fraction {fraction} is not in (0, 1)")));
    }
    let mut triples = kg.triples().to_vec();
    triples.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
    let n = ((triples.len() as f64) * fraction).round().max(1.0) as usize;
    let held: HashSet<Triple> = triples[..n].iter().copied().collect();
    let train = kg.retain_triples(|t| !held.contains(t));
    let mut held_out: Vec<Triple> = triples[..n].to_vec();
    held_out.sort_by_key(|t| (t.head, t.rel, t.tail));
    Ok((train, held_out))
}
