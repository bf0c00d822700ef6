//! Benchmark loading, ranking metrics, a BM25 baseline and the two
//! evaluation scenarios (given target library, open scope).

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::embedding::EmbeddingModel;
use crate::error::{Error, Result};
use crate::graph::{EntityId, EntityKind, KnowledgeGraph, RelationKind};
use crate::index::VectorIndex;
use crate::ingest::method_simple_name;
use crate::lexicon::Lexicons;
use crate::recommend::{diversity_cap, Query, Recommendation, Recommender, Scope, SimParts, Weights, DEFAULT_PER_LIBRARY};
use crate::scalar::Scalar;
use crate::text::{lemmatize_noun, tokenize_identifier};

/// Ranked lists are cut at this depth before computing MRR and Hit@k.
pub const RANK_CUTOFF: usize = 100;
/// Precision and recall look at this many top results.
pub const LABEL_DEPTH: usize = 10;

/// Mean reciprocal rank; `None` (not found within the cutoff) counts as 0.
pub fn mrr(ranks: &[Option<usize>]) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::Eval("no rankings".into()));
    }
    let mut sum = 0.0;
    for r in ranks {
        match r {
            Some(0) => return Err(Error::Eval("ranks start at 1".into())),
            Some(r) => sum += 1.0 / *r as f64,
            None => {}
        }
    }
    Ok(sum / ranks.len() as f64)
}

pub fn hit_at_k(ranks: &[Option<usize>], k: usize) -> Result<f64> {
    if ranks.is_empty() {
        return Err(Error::Eval("no rankings".into()));
    }
    if k == 0 {
        return Err(Error::Eval("k must be at least 1".into()));
    }
    let hits = ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count();
    Ok(hits as f64 / ranks.len() as f64)
}

/// Fraction of `results` that are in `truths`; 0 when nothing is returned.
pub fn precision<T: Eq + Hash>(results: &[T], truths: &HashSet<T>) -> Result<f64> {
    if truths.is_empty() {
        return Err(Error::Eval("empty ground truth".into()));
    }
    if results.is_empty() {
        return Ok(0.0);
    }
    let hit = results.iter().filter(|r| truths.contains(r)).count();
    Ok(hit as f64 / results.len() as f64)
}

/// Fraction of `truths` found in `results`.
pub fn recall<T: Eq + Hash>(results: &[T], truths: &HashSet<T>) -> Result<f64> {
    if truths.is_empty() {
        return Err(Error::Eval("empty ground truth".into()));
    }
    let found: HashSet<&T> = results.iter().filter(|r| truths.contains(r)).collect();
    Ok(found.len() as f64 / truths.len() as f64)
}

/// 1-based position of the first element of `results` in `truths`.
pub fn first_hit<T: Eq + Hash>(results: &[T], truths: &HashSet<T>) -> Option<usize> {
    results.iter().position(|r| truths.contains(r)).map(|p| p + 1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Config {
    pub k1: f64,
    pub b: f64,
    pub top_n: usize,
}

impl Default for Bm25Config {
    fn default() -> Self {
        Bm25Config {
            k1: 1.2,
            b: 0.75,
            top_n: 100,
        }
    }
}

impl Bm25Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.k1 > 0.0 && (0.0..=1.0).contains(&self.b)) {
            return Err(Error::Config("bm25 needs k1 > 0 and 0 <= b <= 1".into()));
        }
        Ok(())
    }
}

/// Inverted-index BM25 over pre-tokenized documents.
#[derive(Debug, Clone)]
pub struct Bm25 {
    config: Bm25Config,
    doc_len: Vec<usize>,
    avg_len: f64,
    postings: HashMap<String, Vec<(usize, usize)>>,
}

impl Bm25 {
    pub fn new<S: AsRef<str>>(docs: &[Vec<S>], config: Bm25Config) -> Result<Self> {
        config.validate()?;
        let mut postings: HashMap<String, Vec<(usize, usize)>> = HashMap::new();
        let mut doc_len = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            doc_len.push(doc.len());
            let mut tf: HashMap<&str, usize> = HashMap::new();
            for t in doc {
                *tf.entry(t.as_ref()).or_default() += 1;
            }
            for (t, n) in tf {
                postings.entry(t.to_string()).or_default().push((d, n));
            }
        }
        let total: usize = doc_len.iter().sum();
        let avg_len = if docs.is_empty() { 0.0 } else { total as f64 / docs.len() as f64 };
        Ok(Bm25 {
            config,
            doc_len,
            avg_len,
            postings,
        })
    }

    pub fn len(&self) -> usize {
        self.doc_len.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_len.is_empty()
    }

    /// `ln(1 + (N - df + 0.5) / (df + 0.5))`, never negative.
    pub fn idf(&self, term: &str) -> f64 {
        let n = self.len() as f64;
        let df = self.postings.get(term).map_or(0, Vec::len) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    /// Scores of every document for the query terms; repeated query terms
    /// count once per occurrence.
    pub fn scores<S: AsRef<str>>(&self, query: &[S]) -> Vec<f64> {
        let Bm25Config { k1, b, .. } = self.config;
        let mut scores = vec![0.0; self.len()];
        for term in query {
            let Some(posts) = self.postings.get(term.as_ref()) else {
                continue;
            };
            let idf = self.idf(term.as_ref());
            for &(d, tf) in posts {
                let tf = tf as f64;
                let norm = 1.0 - b + b * self.doc_len[d] as f64 / self.avg_len;
                scores[d] += idf * tf * (k1 + 1.0) / (tf + k1 * norm);
            }
        }
        scores
    }

    /// Up to `top_n` documents with a positive score, best first, ties by
    /// ascending document index.
    pub fn top<S: AsRef<str>>(&self, query: &[S], keep: impl Fn(usize) -> bool) -> Vec<(usize, f64)> {
        let mut hits: Vec<(usize, f64)> = self
            .scores(query)
            .into_iter()
            .enumerate()
            .filter(|&(d, s)| s > 0.0 && keep(d))
            .collect();
        hits.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        hits.truncate(self.config.top_n);
        hits
    }
}

/// Splits camel case, drops stop words and lemmatizes.
pub fn clean_text(text: &str, lex: &Lexicons) -> Vec<String> {
    text.split_whitespace()
        .flat_map(tokenize_identifier)
        .filter(|t| !lex.is_stop_word(t))
        .map(|t| lemmatize_noun(&t))
        .collect()
}

/// Document text of a method: simple name, declaring type, parameter names,
/// description and functionality expressions.
pub fn method_document(kg: &KnowledgeGraph, method: EntityId) -> String {
    let mut parts = vec![method_simple_name(kg.name(method)).to_string()];
    for &c in kg.inc(method, RelationKind::HasMethod) {
        parts.push(crate::ingest::short_name(kg.name(c)).to_string());
    }
    for &p in kg.out(method, RelationKind::HasParameter) {
        parts.push(kg.name(p).rsplit('.').next().unwrap_or_default().to_string());
    }
    if let Some(d) = kg.description(method) {
        parts.push(d.to_string());
    }
    for &f in kg.out(method, RelationKind::HasFunctionality) {
        parts.push(kg.name(f).replace('|', " "));
    }
    parts.join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkPair {
    pub source: String,
    pub targets: Vec<String>,
    pub target_library: Option<String>,
}

/// Reads `source,targets,target_library` rows; targets are `;`-separated and
/// the library column is optional. A leading `source,...` header is skipped.
pub fn parse_benchmark<R: Read>(input: R) -> Result<Vec<BenchmarkPair>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 1;
        let rec = rec.map_err(|e| Error::Format {
            line: e.position().map_or(line, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let bad = |m: &str| Error::Format {
            line: rec.position().map_or(line, |p| p.line() as usize),
            message: m.to_string(),
        };
        if i == 0 && rec.get(0) == Some("source") {
            continue;
        }
        if rec.len() < 2 || rec.len() > 3 {
            return Err(bad("expected 2 or 3 columns"));
        }
        let source = rec[0].to_string();
        let targets: Vec<String> = rec[1]
            .split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(String::from)
            .collect();
        if source.is_empty() || targets.is_empty() {
            return Err(bad("source and targets must be non-empty"));
        }
        if targets.contains(&source) {
            return Err(bad("source is listed among its own targets"));
        }
        let target_library = rec.get(2).filter(|s| !s.is_empty()).map(String::from);
        out.push(BenchmarkPair {
            source,
            targets,
            target_library,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    WithTarget,
    Open,
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "with-target" => Ok(Scenario::WithTarget),
            "open" => Ok(Scenario::Open),
            _ => Err(Error::Config(format!("unknown scenario {s:?} (with-target|open)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Kge4ar,
    Bm25,
    /// Returns the ground truth first; a harness self-check.
    Oracle,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kge4ar" => Ok(Engine::Kge4ar),
            "bm25" => Ok(Engine::Bm25),
            "oracle" => Ok(Engine::Oracle),
            _ => Err(Error::Config(format!("unknown engine {s:?} (kge4ar|bm25|oracle)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub mrr: f64,
    pub hit_at_1: f64,
    pub hit_at_3: f64,
    pub hit_at_5: f64,
    pub hit_at_10: f64,
    pub precision: f64,
    pub recall: f64,
    pub query_count: usize,
}

impl MetricReport {
    pub fn from_runs(ranks: &[Option<usize>], precisions: &[f64], recalls: &[f64]) -> Result<Self> {
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        Ok(MetricReport {
            mrr: mrr(ranks)?,
            hit_at_1: hit_at_k(ranks, 1)?,
            hit_at_3: hit_at_k(ranks, 3)?,
            hit_at_5: hit_at_k(ranks, 5)?,
            hit_at_10: hit_at_k(ranks, 10)?,
            precision: mean(precisions),
            recall: mean(recalls),
            query_count: ranks.len(),
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "mrr,hit@1,hit@3,hit@5,hit@10,precision,recall,queries")?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            self.mrr,
            self.hit_at_1,
            self.hit_at_3,
            self.hit_at_5,
            self.hit_at_10,
            self.precision,
            self.recall,
            self.query_count
        )?;
        Ok(())
    }
}

impl fmt::Display for MetricReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows = [
            ("MRR", self.mrr),
            ("Hit@1", self.hit_at_1),
            ("Hit@3", self.hit_at_3),
            ("Hit@5", self.hit_at_5),
            ("Hit@10", self.hit_at_10),
            ("Precision@10", self.precision),
            ("Recall@10", self.recall),
        ];
        for (k, v) in rows {
            writeln!(f, "{k:<13}{v:.4}")?;
        }
        write!(f, "{:<13}{}", "Queries", self.query_count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutcome {
    pub report: MetricReport,
    /// Benchmark sources that could not be resolved, with the reason.
    pub skipped: Vec<(String, String)>,
}

/// Everything a scenario run reads.
pub struct EvalContext<'a, F> {
    pub kg: &'a KnowledgeGraph,
    pub model: &'a EmbeddingModel<F>,
    pub index: &'a VectorIndex<F>,
    pub lexicons: &'a Lexicons,
    pub weights: Weights<F>,
    pub k_retrieve: usize,
    pub bm25: Bm25Config,
}

impl<'a, F: Scalar> EvalContext<'a, F> {
    pub fn new(
        kg: &'a KnowledgeGraph,
        model: &'a EmbeddingModel<F>,
        index: &'a VectorIndex<F>,
        lexicons: &'a Lexicons,
    ) -> Self {
        EvalContext {
            kg,
            model,
            index,
            lexicons,
            weights: Weights::default(),
            k_retrieve: RANK_CUTOFF,
            bm25: Bm25Config::default(),
        }
    }
}

/// Resolves a method's qualified name to its unique entity.
pub fn resolve_method(kg: &KnowledgeGraph, name: &str) -> std::result::Result<EntityId, String> {
    match kg.find_named(EntityKind::Method, name).as_slice() {
        [id] => Ok(*id),
        [] => Err("no such method".into()),
        _ => Err("name is ambiguous across libraries".into()),
    }
}

struct Resolved {
    source: EntityId,
    truths: HashSet<EntityId>,
    scope: Scope,
}

fn resolve(kg: &KnowledgeGraph, pair: &BenchmarkPair, scenario: Scenario) -> std::result::Result<Resolved, String> {
    let source = resolve_method(kg, &pair.source)?;
    let truths: HashSet<EntityId> = pair
        .targets
        .iter()
        .map(|t| resolve_method(kg, t).map_err(|e| format!("target {t}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let scope = match scenario {
        Scenario::Open => Scope::All,
        Scenario::WithTarget => {
            let lib = match &pair.target_library {
                Some(name) => kg
                    .library_named(name)
                    .ok_or_else(|| format!("unknown target library {name}"))?,
                None => {
                    let libs: HashSet<Option<EntityId>> =
                        truths.iter().map(|&t| kg.entity(t).ok().and_then(|e| e.library)).collect();
                    match libs.into_iter().collect::<Vec<_>>().as_slice() {
                        [Some(l)] => *l,
                        _ => return Err("targets do not share one library".into()),
                    }
                }
            };
            Scope::TargetLibrary(lib)
        }
    };
    Ok(Resolved { source, truths, scope })
}

fn bm25_ranking<F: Scalar>(
    ctx: &EvalContext<'_, F>,
    engine: &(Bm25, Vec<EntityId>),
    source: EntityId,
    scope: Scope,
) -> Result<Vec<EntityId>> {
    let (bm25, methods) = engine;
    let kg = ctx.kg;
    let own = kg.entity(source)?.library;
    let query = clean_text(&method_document(kg, source), ctx.lexicons);
    let keep = |d: usize| {
        let m = methods[d];
        let lib = kg.entity(m).map(|e| e.library).unwrap_or(None);
        m != source
            && match scope {
                Scope::All => lib != own,
                Scope::TargetLibrary(l) => lib == Some(l),
            }
    };
    let recs: Vec<Recommendation<f64>> = bm25
        .top(&query, keep)
        .into_iter()
        .map(|(d, s)| Recommendation {
            method: methods[d],
            library: kg.entity(methods[d]).map(|e| e.library).unwrap_or(None),
            total: s,
            parts: SimParts::default(),
        })
        .collect();
    let recs = if scope == Scope::All {
        diversity_cap(recs, DEFAULT_PER_LIBRARY)
    } else {
        recs
    };
    Ok(recs.into_iter().map(|r| r.method).collect())
}

/// Runs every resolvable benchmark pair through `engine` and aggregates
/// MRR and Hit@k over the top 100, precision and recall over the top 10.
pub fn run_scenario<F: Scalar>(
    ctx: &EvalContext<'_, F>,
    benchmark: &[BenchmarkPair],
    scenario: Scenario,
    engine: Engine,
) -> Result<ScenarioOutcome> {
    let recommender = Recommender::new(ctx.kg, ctx.model, ctx.index);
    let bm25 = if engine == Engine::Bm25 {
        let methods = ctx.kg.entities_of(EntityKind::Method).to_vec();
        let docs: Vec<Vec<String>> = methods
            .iter()
            .map(|&m| clean_text(&method_document(ctx.kg, m), ctx.lexicons))
            .collect();
        let config = Bm25Config {
            top_n: ctx.bm25.top_n.max(RANK_CUTOFF),
            ..ctx.bm25
        };
        Some((Bm25::new(&docs, config)?, methods))
    } else {
        None
    };

    let mut skipped = Vec::new();
    let (mut ranks, mut precisions, mut recalls) = (Vec::new(), Vec::new(), Vec::new());
    for pair in benchmark {
        let r = match resolve(ctx.kg, pair, scenario) {
            Ok(r) => r,
            Err(why) => {
                skipped.push((pair.source.clone(), why));
                continue;
            }
        };
        let ranked: Vec<EntityId> = match engine {
            Engine::Kge4ar => {
                let query = Query {
                    source: r.source,
                    scope: r.scope,
                    k_retrieve: ctx.k_retrieve,
                    k_return: RANK_CUTOFF,
                    weights: ctx.weights,
                };
                recommender.recommend(&query)?.into_iter().map(|x| x.method).collect()
            }
            Engine::Bm25 => bm25_ranking(ctx, bm25.as_ref().expect("built above"), r.source, r.scope)?,
            Engine::Oracle => {
                let mut t: Vec<EntityId> = r.truths.iter().copied().collect();
                t.sort();
                t
            }
        };
        let ranked = &ranked[..ranked.len().min(RANK_CUTOFF)];
        let top = &ranked[..ranked.len().min(LABEL_DEPTH)];
        ranks.push(first_hit(ranked, &r.truths));
        precisions.push(precision(top, &r.truths)?);
        recalls.push(recall(top, &r.truths)?);
    }
    if ranks.is_empty() {
        return Err(Error::Eval(format!(
            "none of the {} benchmark entries could be resolved",
            benchmark.len()
        )));
    }
    Ok(ScenarioOutcome {
        report: MetricReport::from_runs(&ranks, &precisions, &recalls)?,
        skipped,
    })
}
