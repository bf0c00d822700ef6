//! Functionality expressions: a standardized `(verb, category, pattern,
//! role concepts)` reading of what a method does, taken from the first
//! sentence of its description or, failing that, from its name.

use crate::error::Result;
use crate::graph::{EntityId, EntityKind, KnowledgeGraph, RelationKind};
use crate::ingest::method_simple_name;
use crate::lexicon::{Lexicons, PatternPart, PhrasePattern, Role};
use crate::text::{first_sentence, tokenize_identifier, words_with_breaks};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionalityExpression {
    pub verb: String,
    pub category: String,
    pub pattern: String,
    pub roles: Vec<(Role, String)>,
}

impl FunctionalityExpression {
    /// `verb | concept1 | concept2 | ...`
    pub fn canonical_key(&self) -> String {
        std::iter::once(self.verb.as_str())
            .chain(self.roles.iter().map(|(_, c)| c.as_str()))
            .collect::<Vec<_>>()
            .join(" | ")
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.roles.iter().map(|(_, c)| c.as_str())
    }
}

/// Words that open a subordinate clause; a role filler never extends past
/// one of them.
const CLAUSE_MARKERS: &[&str] = &[
    "which", "that", "if", "when", "whether", "unless", "because", "while", "where", "so",
];

/// Turns a method name into a pseudo-description, prepending a default verb
/// when the name does not start with one.
pub fn name_to_description(method_name: &str, lex: &Lexicons) -> String {
    let tokens = tokenize_identifier(method_name);
    let Some(first) = tokens.first() else {
        return "get".to_string();
    };
    let joined = tokens.join(" ");
    if first == "to" && tokens.len() > 1 {
        return format!("convert {joined}");
    }
    if lex.verb_lemma(first).is_some() {
        return joined;
    }
    let pos = lex.pos(first);
    if pos.adjective && !pos.noun {
        format!("check {joined}")
    } else {
        format!("get {joined}")
    }
}

/// Parses one sentence into a functionality expression, or `None` when no
/// lexicon verb occurs in it.
pub fn extract_expression(sentence: &str, lex: &Lexicons) -> Option<FunctionalityExpression> {
    let items = words_with_breaks(sentence);
    let mut verb = None;
    let mut word_pos = 0usize;
    for (i, item) in items.iter().enumerate() {
        let Some(w) = item else { continue };
        // Nouns that double as verbs ("map", "set") only count as the verb
        // when they open the sentence.
        if word_pos == 0 || !lex.pos(w).noun {
            if let Some(lemma) = lex.verb_lemma(w) {
                verb = Some((i, lemma));
                break;
            }
        }
        word_pos += 1;
    }
    let (verb_at, verb) = verb?;
    let category = lex.category_of(&verb)?.to_string();

    let remainder: Vec<&str> = items[verb_at + 1..]
        .iter()
        .map_while(|item| item.as_deref())
        .take_while(|w| !CLAUSE_MARKERS.contains(w))
        .collect();

    let mut best: Option<(usize, usize, usize, Vec<(Role, String)>)> = None;
    for (order, pattern) in lex.patterns().iter().enumerate() {
        let Some((split_at, roles)) = match_pattern(pattern, &remainder, lex) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((slots, split, _, _)) => {
                roles.len() > *slots || (roles.len() == *slots && split_at < *split)
            }
        };
        if better {
            best = Some((roles.len(), split_at, order, roles));
        }
    }

    let (pattern, roles) = match best {
        Some((_, _, order, roles)) => (lex.patterns()[order].template.clone(), roles),
        None => ("V".to_string(), Vec::new()),
    };
    Some(FunctionalityExpression {
        verb,
        category,
        pattern,
        roles,
    })
}

/// Matches the words after the verb against a template. Each literal splits
/// at its earliest occurrence. Returns the position of the first split
/// (or the remainder length) and the normalized role fillers.
fn match_pattern(
    pattern: &PhrasePattern,
    remainder: &[&str],
    lex: &Lexicons,
) -> Option<(usize, Vec<(Role, String)>)> {
    if pattern.parts.is_empty() {
        return Some((remainder.len(), Vec::new()));
    }
    let mut roles = Vec::new();
    let mut pos = 0usize;
    let mut first_split = None;
    let mut parts = pattern.parts.iter().peekable();
    while let Some(part) = parts.next() {
        let PatternPart::Slot(role) = part else { continue };
        let end = match parts.peek() {
            Some(PatternPart::Literal(lit)) => {
                let j = (pos + 1..remainder.len()).find(|&j| remainder[j] == lit)?;
                first_split.get_or_insert(j);
                j
            }
            _ => remainder.len(),
        };
        if end <= pos {
            return None;
        }
        roles.push((*role, role_filler(&remainder[pos..end], lex)?));
        pos = end + 1;
    }
    Some((first_split.unwrap_or(remainder.len()), roles))
}

/// Normalizes a role filler. `X of Y` reads as the compound `Y X`, so
/// "the number of elements" becomes "element number".
fn role_filler(words: &[&str], lex: &Lexicons) -> Option<String> {
    let segments: Vec<String> = words
        .split(|w| *w == "of")
        .filter_map(|seg| lex.concept_phrase(seg))
        .collect();
    if segments.is_empty() {
        return None;
    }
    Some(segments.into_iter().rev().collect::<Vec<_>>().join(" "))
}

/// Links a method to the shared expression entity for `expr`, creating the
/// expression, verb, category, pattern and concept entities as needed.
pub fn attach_functionality(
    kg: &mut KnowledgeGraph,
    method: EntityId,
    expr: &FunctionalityExpression,
) -> Result<EntityId> {
    let fe = kg.add_entity(EntityKind::FunctionalityExpression, &expr.canonical_key(), None)?;
    let verb = kg.add_entity(EntityKind::FunctionalityVerb, &expr.verb, None)?;
    let category = kg.add_entity(EntityKind::FunctionalityCategory, &expr.category, None)?;
    let pattern = kg.add_entity(EntityKind::PhrasePattern, &expr.pattern, None)?;
    kg.add_triple(method, RelationKind::HasFunctionality, fe)?;
    kg.add_triple(fe, RelationKind::HasVerb, verb)?;
    kg.add_triple(fe, RelationKind::InCategory, category)?;
    kg.add_triple(fe, RelationKind::HasPattern, pattern)?;
    for concept in expr.concepts() {
        let c = kg.add_entity(EntityKind::Concept, concept, None)?;
        kg.add_triple(fe, RelationKind::InvolveConcept, c)?;
    }
    Ok(fe)
}

/// Expression for a method: from the first sentence of its description,
/// falling back to its name.
pub fn method_expression(
    kg: &KnowledgeGraph,
    method: EntityId,
    lex: &Lexicons,
) -> Result<FunctionalityExpression> {
    if let Some(desc) = kg.description(method) {
        let sentence = first_sentence(desc);
        if !sentence.is_empty() {
            if let Some(expr) = extract_expression(sentence, lex) {
                return Ok(expr);
            }
        }
    }
    let name = method_simple_name(&kg.entity(method)?.name);
    let pseudo = name_to_description(name, lex);
    Ok(extract_expression(&pseudo, lex).unwrap_or_else(|| FunctionalityExpression {
        verb: "get".to_string(),
        category: lex.category_of("get").unwrap_or("get").to_string(),
        pattern: "V".to_string(),
        roles: Vec::new(),
    }))
}

/// Attaches a functionality expression to every method in the graph.
/// Returns the number of triples added.
pub fn extract_functionality(kg: &mut KnowledgeGraph, lex: &Lexicons) -> Result<usize> {
    let before = kg.triple_count();
    let methods = kg.entities_of(EntityKind::Method).to_vec();
    for m in methods {
        let expr = method_expression(kg, m, lex)?;
        attach_functionality(kg, m, &expr)?;
    }
    Ok(kg.triple_count() - before)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Direction;

    fn lex() -> Lexicons {
        Lexicons::bundled()
    }

    #[test]
    fn boxed_example() {
        let e = extract_expression("returns the number of elements in the array", &lex()).unwrap();
        assert_eq!(e.verb, "return");
        assert_eq!(e.category, "get");
        assert_eq!(e.pattern, "V {patient} in {location}");
        assert_eq!(
            e.roles,
            vec![
                (Role::Patient, "element number".to_string()),
                (Role::Location, "array".to_string())
            ]
        );
        assert_eq!(e.canonical_key(), "return | element number | array");
    }

    #[test]
    fn simple_patient() {
        let e = extract_expression("get length", &lex()).unwrap();
        assert_eq!((e.verb.as_str(), e.category.as_str()), ("get", "get"));
        assert_eq!(e.pattern, "V {patient}");
        assert_eq!(e.roles, vec![(Role::Patient, "length".to_string())]);
    }

    #[test]
    fn no_verb_no_expression() {
        assert!(extract_expression("the quick brown fox", &lex()).is_none());
    }

    #[test]
    fn longer_template_wins() {
        let e = extract_expression("copies the bytes from the stream to the file", &lex()).unwrap();
        assert_eq!(e.pattern, "V {patient} from {source} to {goal}");
        assert_eq!(e.canonical_key(), "copy | byte | stream | file");
        let e = extract_expression("Removes the key in the map", &lex()).unwrap();
        assert_eq!(e.pattern, "V {patient} in {location}");
    }

    #[test]
    fn clause_and_punctuation_end_fillers() {
        let e = extract_expression(
            "Get the number of elements in the JSONArray, included nulls",
            &lex(),
        )
        .unwrap();
        assert_eq!(e.canonical_key(), "get | element number | jsonarray");
        let e = extract_expression("Returns true if the list is empty", &lex()).unwrap();
        assert_eq!(e.canonical_key(), "return | true");
    }

    #[test]
    fn noun_homographs_are_not_verbs_mid_sentence() {
        assert!(extract_expression("Number of entries in the map", &lex()).is_none());
        let e = extract_expression("Map the keys to values", &lex()).unwrap();
        assert_eq!(e.verb, "map");
    }

    #[test]
    fn name_fallback_rules() {
        let l = lex();
        assert_eq!(name_to_description("length", &l), "get length");
        assert_eq!(name_to_description("toString", &l), "convert to string");
        assert_eq!(name_to_description("empty", &l), "check empty");
        assert_eq!(name_to_description("getInt", &l), "get int");
        assert_eq!(name_to_description("isEmpty", &l), "is empty");
        let e = extract_expression(&name_to_description("toString", &l), &l).unwrap();
        assert_eq!(e.canonical_key(), "convert | string");
    }

    #[test]
    fn shared_expression_entities() {
        let l = lex();
        let mut kg = KnowledgeGraph::new();
        let lib = kg.add_entity(EntityKind::Library, "lib", None).unwrap();
        let m1 = kg.add_entity(EntityKind::Method, "a.A.size()", Some(lib)).unwrap();
        let m2 = kg.add_entity(EntityKind::Method, "a.B.count()", Some(lib)).unwrap();
        let e = extract_expression("returns the number of elements in the array", &l).unwrap();
        let f1 = attach_functionality(&mut kg, m1, &e).unwrap();
        let f2 = attach_functionality(&mut kg, m2, &e).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(
            kg.neighbors(f1, RelationKind::HasFunctionality, Direction::In).unwrap(),
            &[m1, m2]
        );
        assert_eq!(kg.out(f1, RelationKind::InvolveConcept).len(), 2);
        let n = kg.triple_count();
        attach_functionality(&mut kg, m1, &e).unwrap();
        assert_eq!(kg.triple_count(), n);
    }
}
