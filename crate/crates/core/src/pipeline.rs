//! Graph construction in its fixed stage order: structure, functionality,
//! concepts.

use crate::concepts::complete_concepts;
use crate::error::Result;
use crate::functionality::extract_functionality;
use crate::graph::KnowledgeGraph;
use crate::ingest::{build_skeleton, ConstructionReport, DocCorpus};
use crate::lexicon::Lexicons;

#[derive(Debug, Clone, PartialEq)]
pub struct BuildReport {
    pub structure: ConstructionReport,
    pub functionality_triples: usize,
    pub concept_triples: usize,
}

pub fn build_graph(corpus: &DocCorpus, lex: &Lexicons) -> Result<(KnowledgeGraph, BuildReport)> {
    let mut kg = KnowledgeGraph::new();
    let structure = build_skeleton(corpus, &mut kg).map_err(|e| e.in_stage("structure extraction"))?;
    let functionality_triples =
        extract_functionality(&mut kg, lex).map_err(|e| e.in_stage("functionality extraction"))?;
    let concept_triples = complete_concepts(&mut kg, lex).map_err(|e| e.in_stage("concept completion"))?;
    Ok((
        kg,
        BuildReport {
            structure,
            functionality_triples,
            concept_triples,
        },
    ))
}
