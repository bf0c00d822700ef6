//! Conceptual relations: concepts named by API elements, concepts mentioned
//! in descriptions, relations between concept names, and the direct
//! method-to-concept relations completed from two-hop paths.

use std::collections::{BTreeMap, HashMap};

use crate::error::Result;
use crate::graph::{EntityId, EntityKind, KnowledgeGraph, RelationKind};
use crate::ingest::short_name;
use crate::lexicon::Lexicons;
use crate::text::{tokenize_identifier, words_with_breaks};

const DETERMINERS: &[&str] = &[
    "a", "an", "the", "this", "these", "those", "each", "every", "all", "any", "some", "no", "its",
    "their", "his", "her", "our", "your", "my", "another", "such",
];

/// Suffixes that derive one concept name from another ("build" → "builder").
pub const DERIVATION_SUFFIXES: &[&str] = &["er", "or", "r", "ing", "ion", "tion", "ed"];

fn identifier_concept(identifier: &str, lex: &Lexicons) -> Option<String> {
    lex.concept_phrase(&tokenize_identifier(identifier))
}

fn link_concept(
    kg: &mut KnowledgeGraph,
    element: EntityId,
    rel: RelationKind,
    phrase: Option<String>,
) -> Result<()> {
    if let Some(phrase) = phrase {
        let c = kg.add_entity(EntityKind::Concept, &phrase, None)?;
        kg.add_triple(element, rel, c)?;
    }
    Ok(())
}

/// Links every non-method API element to the concept its name denotes.
/// Returns the number of triples added.
pub fn element_name_concepts(kg: &mut KnowledgeGraph, lex: &Lexicons) -> Result<usize> {
    let before = kg.triple_count();
    for kind in [EntityKind::Package, EntityKind::Class, EntityKind::Interface] {
        for id in kg.entities_of(kind).to_vec() {
            let phrase = identifier_concept(short_name(kg.name(id)), lex);
            link_concept(kg, id, RelationKind::InstanceClassOfConcept, phrase)?;
        }
    }
    for id in kg.entities_of(EntityKind::ReturnValue).to_vec() {
        for ty in kg.out(id, RelationKind::HasReturnValueType).to_vec() {
            let phrase = identifier_concept(short_name(kg.name(ty)), lex);
            link_concept(kg, id, RelationKind::InstanceClassOfConcept, phrase)?;
        }
    }
    for kind in [EntityKind::Parameter, EntityKind::Field] {
        for id in kg.entities_of(kind).to_vec() {
            let own = kg.name(id).rsplit('.').next().unwrap_or_default().to_string();
            let phrase = identifier_concept(&own, lex);
            link_concept(kg, id, RelationKind::InstanceParameterOfConcept, phrase)?;
        }
    }
    Ok(kg.triple_count() - before)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Det,
    Adj,
    Noun,
    Other,
}

fn tag(word: &str, lex: &Lexicons) -> Tag {
    if DETERMINERS.contains(&word) {
        return Tag::Det;
    }
    if lex.is_stop_word(word) || word.chars().all(|c| c.is_ascii_digit()) {
        return Tag::Other;
    }
    let pos = lex.pos(word);
    if pos.noun {
        Tag::Noun
    } else if pos.adjective {
        Tag::Adj
    } else if pos.verb || lex.verb_lemma(word).is_some() {
        Tag::Other
    } else {
        Tag::Noun
    }
}

/// Noun phrases of free text as normalized concept phrases, in order of first
/// appearance.
///
/// Phrases are maximal runs of determiners, adjectives and nouns, cut back to
/// their last noun; words missing from the part-of-speech list count as
/// nouns.
pub fn extract_noun_phrases(text: &str, lex: &Lexicons) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut run: Vec<(String, Tag)> = Vec::new();
    let flush = |run: &mut Vec<(String, Tag)>, out: &mut Vec<String>| {
        while run.last().is_some_and(|(_, t)| *t != Tag::Noun) {
            run.pop();
        }
        let words: Vec<&str> = run.iter().map(|(w, _)| w.as_str()).collect();
        if let Some(p) = lex.concept_phrase(&words) {
            if !out.contains(&p) {
                out.push(p);
            }
        }
        run.clear();
    };
    for item in words_with_breaks(text) {
        match item {
            Some(w) => match tag(&w, lex) {
                Tag::Other => flush(&mut run, &mut out),
                t => run.push((w, t)),
            },
            None => flush(&mut run, &mut out),
        }
    }
    flush(&mut run, &mut out);
    out
}

/// Adds `<concept, MentionedInDescription, element>` for every noun phrase
/// of every stored description. Returns the number of triples added.
pub fn description_concepts(kg: &mut KnowledgeGraph, lex: &Lexicons) -> Result<usize> {
    let before = kg.triple_count();
    let described: Vec<(EntityId, String)> = kg
        .descriptions()
        .map(|(id, d)| (id, d.to_string()))
        .collect();
    for (element, desc) in described {
        for phrase in extract_noun_phrases(&desc, lex) {
            let c = kg.add_entity(EntityKind::Concept, &phrase, None)?;
            kg.add_triple(c, RelationKind::MentionedInDescription, element)?;
        }
    }
    Ok(kg.triple_count() - before)
}

fn is_vowel(b: u8) -> bool {
    b"aeiou".contains(&b)
}

/// Names derivable from `base` by one suffix of [`DERIVATION_SUFFIXES`],
/// with final-e drop and consonant doubling before vowel suffixes.
pub fn derived_forms(base: &str) -> Vec<String> {
    let last = base.rsplit(' ').next().unwrap_or(base);
    let b = last.as_bytes();
    if b.len() < 3 || !last.bytes().all(|c| c.is_ascii_lowercase()) {
        return Vec::new();
    }
    let n = b.len();
    let cvc = !is_vowel(b[n - 1])
        && !b"wxy".contains(&b[n - 1])
        && is_vowel(b[n - 2])
        && !is_vowel(b[n - 3]);
    let mut forms = Vec::new();
    for suffix in DERIVATION_SUFFIXES {
        let vowel_initial = is_vowel(suffix.as_bytes()[0]);
        forms.push(format!("{base}{suffix}"));
        if vowel_initial && base.ends_with('e') {
            forms.push(format!("{}{suffix}", &base[..base.len() - 1]));
        }
        if vowel_initial && cvc {
            forms.push(format!("{base}{}{suffix}", b[n - 1] as char));
        }
    }
    forms.sort();
    forms.dedup();
    forms
}

/// Relations implied by concept names: derivation, facet (longest token
/// prefix), is-a (longest token suffix) and spelling variants differing
/// only in spaces. Returns the number of triples added.
pub fn concept_name_relations(kg: &mut KnowledgeGraph) -> Result<usize> {
    let before = kg.triple_count();
    let concepts: Vec<(EntityId, String)> = kg
        .entities_of(EntityKind::Concept)
        .iter()
        .map(|&id| (id, kg.name(id).to_string()))
        .collect();
    let by_name: HashMap<&str, EntityId> = concepts.iter().map(|(id, n)| (n.as_str(), *id)).collect();

    let mut new = Vec::new();
    for (id, name) in &concepts {
        for form in derived_forms(name) {
            if let Some(&derived) = by_name.get(form.as_str()) {
                new.push((derived, RelationKind::DerivedFrom, *id));
            }
        }
        let tokens: Vec<&str> = name.split(' ').collect();
        let n = tokens.len();
        if let Some(prefix) = (1..n).rev().find_map(|len| by_name.get(tokens[..len].join(" ").as_str())) {
            new.push((*id, RelationKind::FacetOf, *prefix));
        }
        if let Some(suffix) = (1..n).rev().find_map(|len| by_name.get(tokens[n - len..].join(" ").as_str())) {
            new.push((*id, RelationKind::IsA, *suffix));
        }
    }

    let mut squashed: BTreeMap<String, Vec<EntityId>> = BTreeMap::new();
    for (id, name) in &concepts {
        squashed.entry(name.replace(' ', "")).or_default().push(*id);
    }
    for group in squashed.values().filter(|g| g.len() > 1) {
        for &a in group {
            for &b in group.iter().filter(|&&b| b != a) {
                new.push((a, RelationKind::SameAs, b));
            }
        }
    }

    for (h, r, t) in new {
        kg.add_triple(h, r, t)?;
    }
    Ok(kg.triple_count() - before)
}

/// Shortcuts two-hop method/concept paths into direct relations:
///
/// | path                                                    | added            |
/// |---------------------------------------------------------|------------------|
/// | `C HasMethod M`, `C InstanceClassOfConcept X`            | `M OperationOf X`   |
/// | `M HasParameter P`, `P InstanceParameterOfConcept X`     | `M HasInputValue X` |
/// | `M HasParameterType T`, `T InstanceClassOfConcept X`     | `M HasInputType X`  |
/// | `M HasReturnValueType T`, `T InstanceClassOfConcept X`   | `M HasOutputType X` |
pub fn complete_method_relations(kg: &mut KnowledgeGraph) -> Result<usize> {
    use RelationKind::*;
    let before = kg.triple_count();
    let mut new = Vec::new();
    for &m in kg.entities_of(EntityKind::Method) {
        for &c in kg.inc(m, HasMethod) {
            new.extend(kg.out(c, InstanceClassOfConcept).iter().map(|&x| (m, OperationOf, x)));
        }
        for &p in kg.out(m, HasParameter) {
            new.extend(kg.out(p, InstanceParameterOfConcept).iter().map(|&x| (m, HasInputValue, x)));
        }
        for &t in kg.out(m, HasParameterType) {
            new.extend(kg.out(t, InstanceClassOfConcept).iter().map(|&x| (m, HasInputType, x)));
        }
        for &t in kg.out(m, HasReturnValueType) {
            new.extend(kg.out(t, InstanceClassOfConcept).iter().map(|&x| (m, HasOutputType, x)));
        }
    }
    for (h, r, t) in new {
        kg.add_triple(h, r, t)?;
    }
    Ok(kg.triple_count() - before)
}

/// Runs the four completion steps in order; returns total triples added.
pub fn complete_concepts(kg: &mut KnowledgeGraph, lex: &Lexicons) -> Result<usize> {
    Ok(element_name_concepts(kg, lex)?
        + description_concepts(kg, lex)?
        + concept_name_relations(kg)?
        + complete_method_relations(kg)?)
}
