//! Typed storage for the API knowledge graph.
//!
//! Entities get dense ids in insertion order. Triples have set semantics and
//! are indexed by `(entity, relation)` in both directions, so every neighbor
//! query is a map lookup returning ids in ascending order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntityId(pub u32);

impl EntityId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

macro_rules! token_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self {
                    $($name::$variant => stringify!($variant)),+
                }
            }

            pub fn ordinal(self) -> usize {
                self as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $(stringify!($variant) => Ok($name::$variant),)+
                    other => Err(format!("unknown {} {:?}", stringify!($name), other)),
                }
            }
        }
    };
}

token_enum!(
    /// The closed set of node types.
    EntityKind {
        Library,
        Package,
        Class,
        Interface,
        Field,
        Method,
        Parameter,
        ReturnValue,
        AbstractParameter,
        FunctionalityExpression,
        FunctionalityCategory,
        FunctionalityVerb,
        PhrasePattern,
        Concept,
    }
);

token_enum!(
    RelationKind {
        Extend,
        Implement,
        HasField,
        HasMethod,
        HasParameter,
        HasReturnValue,
        HasParameterType,
        HasReturnValueType,
        InstanceOfAbstractParameter,
        HasFunctionality,
        HasVerb,
        HasPattern,
        InCategory,
        InvolveConcept,
        InstanceClassOfConcept,
        InstanceParameterOfConcept,
        MentionedInDescription,
        DerivedFrom,
        FacetOf,
        IsA,
        SameAs,
        OperationOf,
        HasInputValue,
        HasInputType,
        HasOutputType,
        BelongsToLibrary,
        BelongsToPackage,
    }
);

impl EntityKind {
    /// Kinds deduplicated by name alone and shared across libraries.
    pub fn is_shared(self) -> bool {
        matches!(
            self,
            EntityKind::Concept
                | EntityKind::FunctionalityExpression
                | EntityKind::FunctionalityVerb
                | EntityKind::FunctionalityCategory
                | EntityKind::PhrasePattern
                | EntityKind::AbstractParameter
        )
    }

    pub fn is_type(self) -> bool {
        matches!(self, EntityKind::Class | EntityKind::Interface)
    }
}

use EntityKind as K;

const TYPES: &[EntityKind] = &[K::Class, K::Interface];
const ELEMENTS: &[EntityKind] = &[
    K::Package,
    K::Class,
    K::Interface,
    K::Field,
    K::Method,
    K::Parameter,
    K::ReturnValue,
];
const CONCEPT: &[EntityKind] = &[K::Concept];
const METHOD: &[EntityKind] = &[K::Method];

impl RelationKind {
    /// Entity kinds allowed in the head position.
    pub fn head_kinds(self) -> &'static [EntityKind] {
        use RelationKind::*;
        match self {
            Extend | Implement | HasField | HasMethod => TYPES,
            HasParameter | HasReturnValue | HasFunctionality => METHOD,
            HasParameterType => &[K::Method, K::Parameter],
            HasReturnValueType => &[K::Method, K::ReturnValue],
            InstanceOfAbstractParameter => &[K::Parameter],
            HasVerb | HasPattern | InCategory | InvolveConcept => &[K::FunctionalityExpression],
            InstanceClassOfConcept => &[K::Package, K::Class, K::Interface, K::ReturnValue],
            InstanceParameterOfConcept => &[K::Parameter, K::Field],
            MentionedInDescription | DerivedFrom | FacetOf | IsA | SameAs => CONCEPT,
            OperationOf | HasInputValue | HasInputType | HasOutputType => METHOD,
            BelongsToLibrary => &[K::Package, K::Class, K::Interface],
            BelongsToPackage => TYPES,
        }
    }

    /// Entity kinds allowed in the tail position.
    pub fn tail_kinds(self) -> &'static [EntityKind] {
        use RelationKind::*;
        match self {
            Extend | Implement | HasParameterType | HasReturnValueType => TYPES,
            HasField => &[K::Field],
            HasMethod => METHOD,
            HasParameter => &[K::Parameter],
            HasReturnValue => &[K::ReturnValue],
            InstanceOfAbstractParameter => &[K::AbstractParameter],
            HasFunctionality => &[K::FunctionalityExpression],
            HasVerb => &[K::FunctionalityVerb],
            HasPattern => &[K::PhrasePattern],
            InCategory => &[K::FunctionalityCategory],
            InvolveConcept | InstanceClassOfConcept | InstanceParameterOfConcept => CONCEPT,
            MentionedInDescription => ELEMENTS,
            DerivedFrom | FacetOf | IsA | SameAs => CONCEPT,
            OperationOf | HasInputValue | HasInputType | HasOutputType => CONCEPT,
            BelongsToLibrary => &[K::Library],
            BelongsToPackage => &[K::Package],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: EntityId,
    pub kind: EntityKind,
    pub name: String,
    /// Owning library entity. Libraries point at themselves; shared kinds
    /// carry `None`.
    pub library: Option<EntityId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub head: EntityId,
    pub rel: RelationKind,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: EntityId, rel: RelationKind, tail: EntityId) -> Self {
        Triple { head, rel, tail }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Out,
    In,
}

type EntityKey = (EntityKind, String, Option<EntityId>);

#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    keys: HashMap<EntityKey, EntityId>,
    by_kind: BTreeMap<EntityKind, Vec<EntityId>>,
    triples: Vec<Triple>,
    triple_set: HashSet<Triple>,
    out_adj: HashMap<(EntityId, RelationKind), Vec<EntityId>>,
    in_adj: HashMap<(EntityId, RelationKind), Vec<EntityId>>,
    descriptions: BTreeMap<EntityId, String>,
}

fn insert_sorted(list: &mut Vec<EntityId>, id: EntityId) {
    if let Err(pos) = list.binary_search(&id) {
        list.insert(pos, id);
    }
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts an entity, or returns the id of the existing entity with the
    /// same dedupe key.
    ///
    /// Shared kinds are keyed by `(kind, name)`; API elements by
    /// `(kind, name, library)`. Libraries take no `library` argument and own
    /// themselves.
    pub fn add_entity(
        &mut self,
        kind: EntityKind,
        name: &str,
        library: Option<EntityId>,
    ) -> Result<EntityId> {
        if name.is_empty() {
            return Err(Error::EmptyName(kind));
        }
        if name.contains(['\t', '\n', '\r']) {
            return Err(Error::InvalidName(name.to_string()));
        }
        match (kind, library) {
            (K::Library, Some(_)) => {
                return Err(Error::LibraryMismatch {
                    kind,
                    requirement: "own themselves and take no library",
                })
            }
            (k, Some(_)) if k.is_shared() => {
                return Err(Error::LibraryMismatch {
                    kind,
                    requirement: "are shared and carry no library",
                })
            }
            (k, None) if !k.is_shared() && k != K::Library => {
                return Err(Error::LibraryMismatch {
                    kind,
                    requirement: "require an owning library",
                })
            }
            (_, Some(lib))
                if self.entity(lib)?.kind != K::Library => {
                    return Err(Error::LibraryMismatch {
                        kind,
                        requirement: "must be owned by a Library entity",
                    });
                }
            _ => {}
        }

        let key = (kind, name.to_string(), library);
        if let Some(&id) = self.keys.get(&key) {
            return Ok(id);
        }
        let id = EntityId(self.entities.len() as u32);
        let library = if kind == K::Library { Some(id) } else { library };
        self.entities.push(Entity {
            id,
            kind,
            name: name.to_string(),
            library,
        });
        self.keys.insert(key, id);
        self.by_kind.entry(kind).or_default().push(id);
        Ok(id)
    }

    /// Adds a triple. Returns `false` when it was already present.
    pub fn add_triple(&mut self, head: EntityId, rel: RelationKind, tail: EntityId) -> Result<bool> {
        let head_kind = self.entity(head)?.kind;
        let tail_kind = self.entity(tail)?.kind;
        if !rel.head_kinds().contains(&head_kind) {
            return Err(Error::KindConstraint {
                rel,
                side: "head",
                found: head_kind,
            });
        }
        if !rel.tail_kinds().contains(&tail_kind) {
            return Err(Error::KindConstraint {
                rel,
                side: "tail",
                found: tail_kind,
            });
        }
        let triple = Triple::new(head, rel, tail);
        if !self.triple_set.insert(triple) {
            return Ok(false);
        }
        self.triples.push(triple);
        insert_sorted(self.out_adj.entry((head, rel)).or_default(), tail);
        insert_sorted(self.in_adj.entry((tail, rel)).or_default(), head);
        Ok(true)
    }

    pub fn entity(&self, id: EntityId) -> Result<&Entity> {
        self.entities.get(id.index()).ok_or(Error::UnknownEntity(id))
    }

    pub fn name(&self, id: EntityId) -> &str {
        self.entities
            .get(id.index())
            .map(|e| e.name.as_str())
            .unwrap_or("")
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple_count(&self) -> usize {
        self.triples.len()
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triple_set.contains(triple)
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Ids of all entities of `kind`, ascending.
    pub fn entities_of(&self, kind: EntityKind) -> &[EntityId] {
        self.by_kind.get(&kind).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn find(&self, kind: EntityKind, name: &str, library: Option<EntityId>) -> Option<EntityId> {
        self.keys.get(&(kind, name.to_string(), library)).copied()
    }

    /// Every entity of `kind` with this exact name, in any library.
    pub fn find_named(&self, kind: EntityKind, name: &str) -> Vec<EntityId> {
        self.entities_of(kind)
            .iter()
            .copied()
            .filter(|&id| self.name(id) == name)
            .collect()
    }

    pub fn library_named(&self, name: &str) -> Option<EntityId> {
        self.find(K::Library, name, None)
    }

    /// Neighbors of `entity` across `rel`, ascending by id.
    pub fn neighbors(&self, entity: EntityId, rel: RelationKind, dir: Direction) -> Result<&[EntityId]> {
        self.entity(entity)?;
        let map = match dir {
            Direction::Out => &self.out_adj,
            Direction::In => &self.in_adj,
        };
        Ok(map.get(&(entity, rel)).map(Vec::as_slice).unwrap_or(&[]))
    }

    /// Like [`neighbors`](Self::neighbors) for ids known to exist.
    pub fn out(&self, entity: EntityId, rel: RelationKind) -> &[EntityId] {
        self.out_adj
            .get(&(entity, rel))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn inc(&self, entity: EntityId, rel: RelationKind) -> &[EntityId] {
        self.in_adj
            .get(&(entity, rel))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Same entities (and ids) with only the triples `keep` accepts.
    pub fn retain_triples(&self, keep: impl Fn(&Triple) -> bool) -> KnowledgeGraph {
        let mut kg = KnowledgeGraph {
            entities: self.entities.clone(),
            keys: self.keys.clone(),
            by_kind: self.by_kind.clone(),
            descriptions: self.descriptions.clone(),
            ..KnowledgeGraph::default()
        };
        for t in self.triples.iter().filter(|t| keep(t)) {
            kg.add_triple(t.head, t.rel, t.tail)
                .expect("triple was valid in the source graph");
        }
        kg
    }

    pub fn set_description(&mut self, entity: EntityId, text: &str) -> Result<()> {
        self.entity(entity)?;
        // Collapsed whitespace keeps descriptions on one export line.
        let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
        if !text.is_empty() {
            self.descriptions.insert(entity, text);
        }
        Ok(())
    }

    pub fn description(&self, entity: EntityId) -> Option<&str> {
        self.descriptions.get(&entity).map(String::as_str)
    }

    pub fn descriptions(&self) -> impl Iterator<Item = (EntityId, &str)> {
        self.descriptions.iter().map(|(&id, s)| (id, s.as_str()))
    }

    /// Name of the owning library, if any.
    pub fn library_name(&self, id: EntityId) -> Option<&str> {
        let lib = self.entities.get(id.index())?.library?;
        Some(self.name(lib))
    }

    /// Entity counts in enumeration order, zero counts included.
    pub fn stats(&self) -> Vec<(EntityKind, usize)> {
        EntityKind::ALL
            .iter()
            .map(|&k| (k, self.entities_of(k).len()))
            .collect()
    }

    pub fn relation_stats(&self) -> Vec<(RelationKind, usize)> {
        let mut counts = vec![0usize; RelationKind::ALL.len()];
        for t in &self.triples {
            counts[t.rel.ordinal()] += 1;
        }
        RelationKind::ALL.iter().copied().zip(counts).collect()
    }

    pub fn write_stats<W: Write>(&self, mut out: W) -> Result<()> {
        for (kind, count) in self.stats() {
            writeln!(out, "{kind}\t{count}")?;
        }
        Ok(())
    }

    /// Writes the graph as tab-separated text.
    ///
    /// Entities come first as `@entity<TAB>name<TAB>kind<TAB>library` lines
    /// (library `-` for shared kinds), followed by one
    /// `head_name<TAB>head_kind<TAB>rel<TAB>tail_name<TAB>tail_kind` line per
    /// triple, then `@desc<TAB>name<TAB>kind<TAB>text` lines for
    /// descriptions. Fails if two entities of one kind share a name, since triple
    /// lines could not be resolved on import.
    pub fn export<W: Write>(&self, mut out: W) -> Result<()> {
        self.check_unambiguous()?;
        for e in &self.entities {
            let lib = match e.library {
                Some(l) => self.name(l),
                None => "-",
            };
            writeln!(out, "@entity\t{}\t{}\t{}", e.name, e.kind, lib)?;
        }
        self.write_triples(&mut out)?;
        for (id, text) in &self.descriptions {
            let e = &self.entities[id.index()];
            writeln!(out, "@desc\t{}\t{}\t{}", e.name, e.kind, text)?;
        }
        Ok(())
    }

    /// Writes triple lines only, in insertion order.
    pub fn write_triples<W: Write>(&self, mut out: W) -> Result<()> {
        for t in &self.triples {
            let h = &self.entities[t.head.index()];
            let tl = &self.entities[t.tail.index()];
            writeln!(out, "{}\t{}\t{}\t{}\t{}", h.name, h.kind, t.rel, tl.name, tl.kind)?;
        }
        Ok(())
    }

    fn check_unambiguous(&self) -> Result<()> {
        let mut seen: HashSet<(EntityKind, &str)> = HashSet::new();
        for e in &self.entities {
            if !seen.insert((e.kind, e.name.as_str())) {
                return Err(Error::Format {
                    line: 0,
                    message: format!(
                        "{} {:?} exists in more than one library and cannot be exported by name",
                        e.kind, e.name
                    ),
                });
            }
        }
        Ok(())
    }

    /// Reads the format produced by [`export`](Self::export).
    ///
    /// Triple lines may also reference entities that were not declared; they
    /// are created on the fly, which only works for shared kinds.
    pub fn import<R: BufRead>(input: R) -> Result<Self> {
        let mut kg = KnowledgeGraph::new();
        let mut by_name: HashMap<(EntityKind, String), EntityId> = HashMap::new();

        let mut descs: Vec<(usize, &str)> = Vec::new();
        let mut lines = Vec::new();
        for (i, line) in input.lines().enumerate() {
            lines.push((i + 1, line?));
        }

        // Export writes entities in id order, so every library precedes its
        // members and ids survive a round trip.
        for (no, line) in &lines {
            let Some(rest) = line.strip_prefix("@entity\t") else {
                continue;
            };
            let cols: Vec<&str> = rest.split('\t').collect();
            if cols.len() != 3 {
                return Err(fmt_err(*no, "entity line needs 3 columns after @entity"));
            }
            let kind: EntityKind = cols[1].parse().map_err(|m| fmt_err(*no, m))?;
            let library = match cols[2] {
                _ if kind == K::Library => None,
                "-" => None,
                lib => Some(
                    kg.library_named(lib)
                        .ok_or_else(|| fmt_err(*no, format!("unknown library {lib:?}")))?,
                ),
            };
            let id = kg.add_entity(kind, cols[0], library).map_err(|e| fmt_err(*no, e))?;
            if by_name.insert((kind, cols[0].to_string()), id).is_some() {
                return Err(fmt_err(*no, format!("{kind} {:?} declared twice", cols[0])));
            }
        }

        for (no, line) in &lines {
            if line.is_empty() || line.starts_with("@entity\t") {
                continue;
            }
            if let Some(rest) = line.strip_prefix("@desc\t") {
                descs.push((*no, rest));
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 5 {
                return Err(fmt_err(*no, format!("expected 5 columns, found {}", cols.len())));
            }
            let head_kind: EntityKind = cols[1].parse().map_err(|m| fmt_err(*no, m))?;
            let rel: RelationKind = cols[2].parse().map_err(|m| fmt_err(*no, m))?;
            let tail_kind: EntityKind = cols[4].parse().map_err(|m| fmt_err(*no, m))?;
            let mut resolve = |kind: EntityKind, name: &str| -> Result<EntityId> {
                if let Some(&id) = by_name.get(&(kind, name.to_string())) {
                    return Ok(id);
                }
                if !kind.is_shared() {
                    return Err(fmt_err(*no, format!("undeclared {kind} {name:?}")));
                }
                let id = kg.add_entity(kind, name, None).map_err(|e| fmt_err(*no, e))?;
                by_name.insert((kind, name.to_string()), id);
                Ok(id)
            };
            let head = resolve(head_kind, cols[0])?;
            let tail = resolve(tail_kind, cols[3])?;
            kg.add_triple(head, rel, tail).map_err(|e| fmt_err(*no, e))?;
        }
        for (no, rest) in descs {
            let cols: Vec<&str> = rest.splitn(3, '\t').collect();
            if cols.len() != 3 {
                return Err(fmt_err(no, "description line needs name, kind and text"));
            }
            let kind: EntityKind = cols[1].parse().map_err(|m| fmt_err(no, m))?;
            let id = by_name
                .get(&(kind, cols[0].to_string()))
                .ok_or_else(|| fmt_err(no, format!("description for undeclared {kind} {:?}", cols[0])))?;
            kg.set_description(*id, cols[2])?;
        }
        Ok(kg)
    }
}

fn fmt_err(line: usize, message: impl fmt::Display) -> Error {
    Error::Format {
        line,
        message: message.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn json_graph() -> (KnowledgeGraph, EntityId, EntityId, EntityId) {
        let mut kg = KnowledgeGraph::new();
        let lib = kg.add_entity(K::Library, "org.json", None).unwrap();
        let class = kg.add_entity(K::Class, "org.json.JSONArray", Some(lib)).unwrap();
        let method = kg
            .add_entity(K::Method, "org.json.JSONArray.length()", Some(lib))
            .unwrap();
        (kg, lib, class, method)
    }

    #[test]
    fn shared_kinds_dedupe() {
        let mut kg = KnowledgeGraph::new();
        let a = kg.add_entity(K::Concept, "json array", None).unwrap();
        let b = kg.add_entity(K::Concept, "json array", None).unwrap();
        assert_eq!(a, b);
        assert_eq!(kg.entity_count(), 1);
    }

    #[test]
    fn api_elements_get_fresh_ids() {
        let (kg, lib, class, method) = json_graph();
        assert_ne!(class, method);
        assert_eq!(kg.entity(method).unwrap().library, Some(lib));
        assert_eq!(kg.entity(lib).unwrap().library, Some(lib));
    }

    #[test]
    fn empty_name_rejected() {
        let mut kg = KnowledgeGraph::new();
        assert!(matches!(
            kg.add_entity(K::Concept, "", None),
            Err(Error::EmptyName(K::Concept))
        ));
    }

    #[test]
    fn library_ownership_enforced() {
        let mut kg = KnowledgeGraph::new();
        assert!(kg.add_entity(K::Method, "m()", None).is_err());
        let lib = kg.add_entity(K::Library, "l", None).unwrap();
        assert!(kg.add_entity(K::Concept, "c", Some(lib)).is_err());
        let c = kg.add_entity(K::Concept, "c", None).unwrap();
        assert!(kg.add_entity(K::Method, "m()", Some(c)).is_err());
    }

    #[test]
    fn triple_set_semantics_and_schema() {
        let (mut kg, _, class, method) = json_graph();
        assert!(kg.add_triple(class, RelationKind::HasMethod, method).unwrap());
        assert!(!kg.add_triple(class, RelationKind::HasMethod, method).unwrap());
        let concept = kg.add_entity(K::Concept, "json array", None).unwrap();
        let err = kg
            .add_triple(concept, RelationKind::HasMethod, method)
            .unwrap_err();
        assert!(err.to_string().contains("HasMethod"), "{err}");
        assert!(err.to_string().contains("head"), "{err}");
        assert!(matches!(
            kg.add_triple(EntityId(99), RelationKind::HasMethod, method),
            Err(Error::UnknownEntity(_))
        ));
    }

    #[test]
    fn neighbors_sorted_both_directions() {
        let (mut kg, lib, class, method) = json_graph();
        let p2 = kg.add_entity(K::Parameter, "m.b", Some(lib)).unwrap();
        let p1 = kg.add_entity(K::Parameter, "m.a", Some(lib)).unwrap();
        kg.add_triple(method, RelationKind::HasParameter, p2).unwrap();
        kg.add_triple(method, RelationKind::HasParameter, p1).unwrap();
        assert_eq!(
            kg.neighbors(method, RelationKind::HasParameter, Direction::Out).unwrap(),
            &[p2, p1]
        );
        let concept = kg.add_entity(K::Concept, "json array", None).unwrap();
        kg.add_triple(class, RelationKind::InstanceClassOfConcept, concept)
            .unwrap();
        assert_eq!(
            kg.neighbors(concept, RelationKind::InstanceClassOfConcept, Direction::In)
                .unwrap(),
            &[class]
        );
        assert!(kg
            .neighbors(concept, RelationKind::InvolveConcept, Direction::Out)
            .unwrap()
            .is_empty());
        assert!(kg
            .neighbors(EntityId(1000), RelationKind::IsA, Direction::Out)
            .is_err());
    }

    #[test]
    fn empty_graph_round_trip() {
        let kg = KnowledgeGraph::new();
        let mut buf = Vec::new();
        kg.export(&mut buf).unwrap();
        assert!(buf.is_empty());
        let back = KnowledgeGraph::import(&buf[..]).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn unknown_relation_token_reports_line() {
        let text = "a\tConcept\tIsA\tb\tConcept\nc\tConcept\tLooksLike\td\tConcept\n";
        match KnowledgeGraph::import(text.as_bytes()) {
            Err(Error::Format { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("LooksLike"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn stats_in_enumeration_order() {
        let (kg, ..) = json_graph();
        let mut buf = Vec::new();
        kg.write_stats(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 14);
        assert_eq!(lines[0], "Library\t1");
        assert_eq!(lines[2], "Class\t1");
        assert_eq!(lines[13], "Concept\t0");
    }
}
