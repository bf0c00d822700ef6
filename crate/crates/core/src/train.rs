//! Seeded SGD training of embedding models under logistic loss with
//! kind-constrained negative sampling.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::{accumulate_score_grad, logistic_loss, logistic_loss_grad, score, EmbeddingModel, ModelKind};
use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationKind, Triple};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model_kind: ModelKind,
    pub dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub negatives_per_positive: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// L2 penalty on the embeddings touched by each example; 0 disables it.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model_kind: ModelKind::ComplEx,
            dim: 64,
            epochs: 100,
            learning_rate: 0.05,
            negatives_per_positive: 5,
            batch_size: 32,
            seed: 42,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.batch_size == 0 || self.negatives_per_positive == 0 {
            return Err(Error::Config("dim, batch_size and negatives must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config("learning rate must be positive".into()));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return Err(Error::Config("l2 must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<F> {
    pub model: EmbeddingModel<F>,
    /// Mean per-example loss of each epoch, measured before each update.
    pub loss_trace: Vec<f64>,
}

impl<F> TrainOutcome<F> {
    /// The loss trace as `epoch,mean_loss` CSV, epochs numbered from 1.
    pub fn loss_csv(&self) -> String {
        let mut out = String::from("epoch,mean_loss\n");
        for (i, l) in self.loss_trace.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i + 1, l));
        }
        out
    }
}

/// Embeddings drawn uniformly from `±0.5/√d` with the config's seed.
pub fn init_model<F: Scalar>(kg: &KnowledgeGraph, config: &TrainConfig) -> EmbeddingModel<F> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_with(kg, config, &mut rng)
}

fn init_with<F: Scalar>(kg: &KnowledgeGraph, config: &TrainConfig, rng: &mut ChaCha8Rng) -> EmbeddingModel<F> {
    let mut model = EmbeddingModel::zeros(config.model_kind, config.dim, kg.entity_count());
    let bound = 0.5 / (config.dim as f64).sqrt();
    for x in model.entity_data_mut().iter_mut() {
        *x = F::of(rng.gen_range(-bound..bound));
    }
    for x in model.relation_data_mut().iter_mut() {
        *x = F::of(rng.gen_range(-bound..bound));
    }
    model
}

/// Entities legal in the head and tail slot of each relation kind.
struct SlotCandidates {
    heads: Vec<Vec<EntityId>>,
    tails: Vec<Vec<EntityId>>,
}

impl SlotCandidates {
    fn new(kg: &KnowledgeGraph) -> Self {
        let collect = |kinds: &[crate::graph::EntityKind]| {
            let mut ids: Vec<EntityId> = kinds.iter().flat_map(|&k| kg.entities_of(k).iter().copied()).collect();
            ids.sort();
            ids
        };
        SlotCandidates {
            heads: RelationKind::ALL.iter().map(|r| collect(r.head_kinds())).collect(),
            tails: RelationKind::ALL.iter().map(|r| collect(r.tail_kinds())).collect(),
        }
    }
}

const CORRUPTION_ATTEMPTS: usize = 16;

fn corrupt(kg: &KnowledgeGraph, slots: &SlotCandidates, pos: &Triple, rng: &mut ChaCha8Rng) -> Option<Triple> {
    let replace_head = rng.gen_bool(0.5);
    let pool = if replace_head {
        &slots.heads[pos.rel.ordinal()]
    } else {
        &slots.tails[pos.rel.ordinal()]
    };
    if pool.is_empty() {
        return None;
    }
    for _ in 0..CORRUPTION_ATTEMPTS {
        let e = pool[rng.gen_range(0..pool.len())];
        let cand = if replace_head {
            Triple::new(e, pos.rel, pos.tail)
        } else {
            Triple::new(pos.head, pos.rel, e)
        };
        if !kg.contains(&cand) {
            return Some(cand);
        }
    }
    None
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Row {
    Entity(EntityId),
    Relation(RelationKind),
}

/// Trains an embedding model over every triple of `kg`.
///
/// Each epoch shuffles the positives, draws `negatives_per_positive`
/// corruptions per positive (head or tail replaced by a random entity of a
/// legal kind, accidental positives skipped), and applies summed gradients
/// once per mini-batch of positives. The run is fully determined by
/// `(kg, config)`.
pub fn train<F: Scalar>(kg: &KnowledgeGraph, config: &TrainConfig) -> Result<TrainOutcome<F>> {
    config.validate()?;
    if kg.triple_count() == 0 {
        return Err(Error::Config("cannot train on a graph without triples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut model: EmbeddingModel<F> = init_with(kg, config, &mut rng);
    let slots = SlotCandidates::new(kg);
    let kind = model.kind();
    let width = model.width();
    let lr = F::of(config.learning_rate);
    let l2 = F::of(config.l2);
    let two = F::of(2.0);

    let mut order: Vec<Triple> = kg.triples().to_vec();
    let mut loss_trace = Vec::with_capacity(config.epochs);
    let mut grads: HashMap<Row, Vec<F>> = HashMap::new();
    let mut touched: Vec<Row> = Vec::new();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        let mut examples = 0usize;
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            let mut labelled: Vec<(Triple, F)> = Vec::with_capacity(batch.len() * (1 + config.negatives_per_positive));
            for pos in batch {
                labelled.push((*pos, F::one()));
                for _ in 0..config.negatives_per_positive {
                    if let Some(neg) = corrupt(kg, &slots, pos, &mut rng) {
                        labelled.push((neg, -F::one()));
                    }
                }
            }

            for (t, label) in &labelled {
                let h = model.entity_vec(t.head)?;
                let r = model.relation_vec(t.rel);
                let tv = model.entity_vec(t.tail)?;
                let phi = score(kind, h, r, tv);
                let mut loss = logistic_loss(phi, *label);
                if config.l2 > 0.0 {
                    let sq = |v: &[F]| v.iter().fold(F::zero(), |a, &x| a + x * x);
                    loss = loss + l2 * (sq(h) + sq(r) + sq(tv));
                }
                let loss = loss.to_f64_lossy();
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss {
                        epoch: epoch + 1,
                        step: b,
                        loss,
                    });
                }
                loss_sum += loss;
                examples += 1;

                let dphi = logistic_loss_grad(phi, *label);
                let mut take = |row: Row, grads: &mut HashMap<Row, Vec<F>>| -> Vec<F> {
                    grads.remove(&row).unwrap_or_else(|| {
                        touched.push(row);
                        vec![F::zero(); width]
                    })
                };
                let mut gh = take(Row::Entity(t.head), &mut grads);
                let mut gr = take(Row::Relation(t.rel), &mut grads);
                // Head and tail may be the same entity; accumulate separately and merge.
                let mut gt = if t.tail == t.head {
                    vec![F::zero(); width]
                } else {
                    take(Row::Entity(t.tail), &mut grads)
                };
                accumulate_score_grad(kind, h, r, tv, dphi, &mut gh, &mut gr, &mut gt);
                if config.l2 > 0.0 {
                    for (g, &x) in gh.iter_mut().zip(h) {
                        *g = *g + two * l2 * x;
                    }
                    for (g, &x) in gr.iter_mut().zip(r) {
                        *g = *g + two * l2 * x;
                    }
                    for (g, &x) in gt.iter_mut().zip(tv) {
                        *g = *g + two * l2 * x;
                    }
                }
                if t.tail == t.head {
                    for (a, &b) in gh.iter_mut().zip(&gt) {
                        *a = *a + b;
                    }
                } else {
                    grads.insert(Row::Entity(t.tail), gt);
                }
                grads.insert(Row::Entity(t.head), gh);
                grads.insert(Row::Relation(t.rel), gr);
            }

            for row in touched.drain(..) {
                let g = grads.remove(&row).expect("touched rows have gradients");
                let target = match row {
                    Row::Entity(id) => model.entity_vec_mut(id)?,
                    Row::Relation(rel) => model.relation_vec_mut(rel),
                };
                for (x, gx) in target.iter_mut().zip(g) {
                    *x = *x - lr * gx;
                }
            }
        }
        loss_trace.push(if examples == 0 { 0.0 } else { loss_sum / examples as f64 });
    }

    Ok(TrainOutcome { model, loss_trace })
}
