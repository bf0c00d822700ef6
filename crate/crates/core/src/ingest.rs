//! Documentation corpus parsing and the structural skeleton of the graph.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, EntityKind, KnowledgeGraph, RelationKind};

/// Pseudo-library owning placeholder entities for types no corpus library
/// defines (`int`, `java.lang.String`, ...).
pub const EXTERNAL_LIBRARY: &str = "external";

pub const VOID: &str = "void";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocCorpus {
    pub libraries: Vec<LibraryDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LibraryDoc {
    pub coordinates: String,
    #[serde(default)]
    pub packages: Vec<PackageDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackageDoc {
    pub name: String,
    #[serde(default)]
    pub classes: Vec<ClassDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDoc {
    pub qualified_name: String,
    pub is_interface: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extends: Option<String>,
    #[serde(default)]
    pub implements: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub fields: Vec<FieldDoc>,
    #[serde(default)]
    pub methods: Vec<MethodDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDoc {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodDoc {
    pub name: String,
    #[serde(default)]
    pub params: Vec<ParamDoc>,
    pub return_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub return_description: Option<String>,
}

impl DocCorpus {
    pub fn class_count(&self) -> usize {
        self.classes().count()
    }

    pub fn method_count(&self) -> usize {
        self.classes().map(|c| c.methods.len()).sum()
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClassDoc> {
        self.libraries
            .iter()
            .flat_map(|l| &l.packages)
            .flat_map(|p| &p.classes)
    }
}

impl MethodDoc {
    /// `name(T1,T2)` with fully qualified parameter types.
    pub fn signature(&self) -> String {
        let types: Vec<&str> = self.params.iter().map(|p| p.ty.as_str()).collect();
        format!("{}({})", self.name, types.join(","))
    }
}

/// Qualified name of a method entity: `org.json.JSONArray.get(int)`.
pub fn method_qualified_name(class: &str, method: &MethodDoc) -> String {
    format!("{class}.{}", method.signature())
}

/// Simple name of a method from its qualified name: `get` for
/// `org.json.JSONArray.get(int)`.
pub fn method_simple_name(qualified: &str) -> &str {
    let head = qualified.split('(').next().unwrap_or(qualified);
    head.rsplit('.').next().unwrap_or(head)
}

/// Part after the last dot, ignoring generic arguments, array brackets and a
/// trailing method signature.
pub fn short_name(qualified: &str) -> &str {
    let head = qualified
        .split(['<', '[', '('])
        .next()
        .unwrap_or(qualified)
        .trim();
    head.rsplit('.').next().unwrap_or(head)
}

pub fn return_value_name(method_qualified: &str) -> String {
    format!("{method_qualified}.<R>")
}

pub fn parameter_name(method_qualified: &str, param: &str) -> String {
    format!("{method_qualified}.{param}")
}

pub fn abstract_parameter_name(param: &ParamDoc) -> String {
    format!("{}:{}", param.name, param.ty)
}

fn schema_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Parses and validates a corpus document.
pub fn parse_corpus(bytes: &[u8]) -> Result<DocCorpus> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let corpus: DocCorpus = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema_err(path, e.into_inner().to_string())
    })?;
    validate(&corpus)?;
    Ok(corpus)
}

fn validate(corpus: &DocCorpus) -> Result<()> {
    let mut coords = HashSet::new();
    for (li, lib) in corpus.libraries.iter().enumerate() {
        let lp = format!("libraries[{li}]");
        if lib.coordinates.trim().is_empty() {
            return Err(schema_err(format!("{lp}.coordinates"), "must not be empty"));
        }
        if lib.coordinates == EXTERNAL_LIBRARY {
            return Err(schema_err(format!("{lp}.coordinates"), "name is reserved"));
        }
        if !coords.insert(lib.coordinates.as_str()) {
            return Err(schema_err(
                format!("{lp}.coordinates"),
                format!("duplicate library {:?}", lib.coordinates),
            ));
        }
        let mut packages = HashSet::new();
        for (pi, pkg) in lib.packages.iter().enumerate() {
            let pp = format!("{lp}.packages[{pi}]");
            if pkg.name.trim().is_empty() {
                return Err(schema_err(format!("{pp}.name"), "must not be empty"));
            }
            if !packages.insert(pkg.name.as_str()) {
                return Err(schema_err(
                    format!("{pp}.name"),
                    format!("duplicate package {:?}", pkg.name),
                ));
            }
            for (ci, class) in pkg.classes.iter().enumerate() {
                let cp = format!("{pp}.classes[{ci}]");
                let prefix = format!("{}.", pkg.name);
                if !class.qualified_name.starts_with(&prefix) || class.qualified_name.len() == prefix.len() {
                    return Err(schema_err(
                        format!("{cp}.qualified_name"),
                        format!("{:?} is not inside package {:?}", class.qualified_name, pkg.name),
                    ));
                }
                for (fi, field) in class.fields.iter().enumerate() {
                    if field.name.is_empty() || field.ty.is_empty() {
                        return Err(schema_err(format!("{cp}.fields[{fi}]"), "name and type are required"));
                    }
                }
                for (mi, method) in class.methods.iter().enumerate() {
                    let mp = format!("{cp}.methods[{mi}]");
                    if method.name.is_empty() {
                        return Err(schema_err(format!("{mp}.name"), "must not be empty"));
                    }
                    if method.return_type.is_empty() {
                        return Err(schema_err(format!("{mp}.return_type"), "must not be empty"));
                    }
                    let mut names = HashSet::new();
                    for (ai, p) in method.params.iter().enumerate() {
                        if p.name.is_empty() || p.ty.is_empty() {
                            return Err(schema_err(format!("{mp}.params[{ai}]"), "name and type are required"));
                        }
                        if !names.insert(p.name.as_str()) {
                            return Err(schema_err(
                                format!("{mp}.params[{ai}].name"),
                                format!("duplicate parameter {:?}", p.name),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Entities and triples a construction step added, per kind.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConstructionReport {
    pub entities: BTreeMap<EntityKind, usize>,
    pub triples: BTreeMap<RelationKind, usize>,
}

impl ConstructionReport {
    pub fn between(before: &KnowledgeGraph, after: &KnowledgeGraph) -> Self {
        Self::from_counts(&before.stats(), &before.relation_stats(), after)
    }

    fn from_counts(
        entities_before: &[(EntityKind, usize)],
        triples_before: &[(RelationKind, usize)],
        after: &KnowledgeGraph,
    ) -> Self {
        let entities = after
            .stats()
            .into_iter()
            .zip(entities_before)
            .filter(|((_, a), (_, b))| a > b)
            .map(|((k, a), (_, b))| (k, a - b))
            .collect();
        let triples = after
            .relation_stats()
            .into_iter()
            .zip(triples_before)
            .filter(|((_, a), (_, b))| a > b)
            .map(|((k, a), (_, b))| (k, a - b))
            .collect();
        ConstructionReport { entities, triples }
    }

    pub fn total_entities(&self) -> usize {
        self.entities.values().sum()
    }

    pub fn total_triples(&self) -> usize {
        self.triples.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.triples.is_empty()
    }
}

struct SkeletonBuilder<'a> {
    kg: &'a mut KnowledgeGraph,
    external: Option<EntityId>,
}

impl SkeletonBuilder<'_> {
    /// Class or interface entity named `name`, in any library. Unknown types
    /// become placeholder classes of the external pseudo-library.
    fn resolve_type(&mut self, name: &str) -> Result<EntityId> {
        for kind in [EntityKind::Class, EntityKind::Interface] {
            let found = self.kg.find_named(kind, name);
            if let Some(&id) = found.iter().find(|&&id| self.kg.library_name(id) != Some(EXTERNAL_LIBRARY)) {
                return Ok(id);
            }
            if let Some(&id) = found.first() {
                return Ok(id);
            }
        }
        let ext = match self.external {
            Some(id) => id,
            None => {
                let id = self.kg.add_entity(EntityKind::Library, EXTERNAL_LIBRARY, None)?;
                self.external = Some(id);
                id
            }
        };
        let id = self.kg.add_entity(EntityKind::Class, name, Some(ext))?;
        self.kg.add_triple(id, RelationKind::BelongsToLibrary, ext)?;
        Ok(id)
    }
}

/// Adds the API elements of `corpus` and their structural relations.
///
/// Classes of all libraries are registered before any reference is resolved,
/// so cross-library `extends`/`implements`/parameter types link to the
/// defining class rather than to a placeholder.
pub fn build_skeleton(corpus: &DocCorpus, kg: &mut KnowledgeGraph) -> Result<ConstructionReport> {
    let entities_before = kg.stats();
    let triples_before = kg.relation_stats();
    let external = kg.library_named(EXTERNAL_LIBRARY);
    let mut b = SkeletonBuilder { kg, external };

    let mut class_ids = Vec::new();
    for lib in &corpus.libraries {
        let lib_id = b.kg.add_entity(EntityKind::Library, &lib.coordinates, None)?;
        for pkg in &lib.packages {
            let pkg_id = b.kg.add_entity(EntityKind::Package, &pkg.name, Some(lib_id))?;
            b.kg.add_triple(pkg_id, RelationKind::BelongsToLibrary, lib_id)?;
            for class in &pkg.classes {
                let kind = if class.is_interface {
                    EntityKind::Interface
                } else {
                    EntityKind::Class
                };
                let id = b.kg.add_entity(kind, &class.qualified_name, Some(lib_id))?;
                b.kg.add_triple(id, RelationKind::BelongsToPackage, pkg_id)?;
                b.kg.add_triple(id, RelationKind::BelongsToLibrary, lib_id)?;
                if let Some(d) = &class.description {
                    b.kg.set_description(id, d)?;
                }
                class_ids.push((lib_id, id, class));
            }
        }
    }

    for (lib_id, class_id, class) in class_ids {
        if let Some(parent) = &class.extends {
            let p = b.resolve_type(parent)?;
            b.kg.add_triple(class_id, RelationKind::Extend, p)?;
        }
        for iface in &class.implements {
            let p = b.resolve_type(iface)?;
            b.kg.add_triple(class_id, RelationKind::Implement, p)?;
        }
        for field in &class.fields {
            let name = format!("{}.{}", class.qualified_name, field.name);
            let f = b.kg.add_entity(EntityKind::Field, &name, Some(lib_id))?;
            b.kg.add_triple(class_id, RelationKind::HasField, f)?;
            if let Some(d) = &field.description {
                b.kg.set_description(f, d)?;
            }
        }
        for method in &class.methods {
            let qname = method_qualified_name(&class.qualified_name, method);
            let m = b.kg.add_entity(EntityKind::Method, &qname, Some(lib_id))?;
            b.kg.add_triple(class_id, RelationKind::HasMethod, m)?;
            if let Some(d) = &method.description {
                b.kg.set_description(m, d)?;
            }
            for param in &method.params {
                let p = b.kg.add_entity(EntityKind::Parameter, &parameter_name(&qname, &param.name), Some(lib_id))?;
                b.kg.add_triple(m, RelationKind::HasParameter, p)?;
                let ty = b.resolve_type(&param.ty)?;
                b.kg.add_triple(p, RelationKind::HasParameterType, ty)?;
                b.kg.add_triple(m, RelationKind::HasParameterType, ty)?;
                let ap = b.kg.add_entity(EntityKind::AbstractParameter, &abstract_parameter_name(param), None)?;
                b.kg.add_triple(p, RelationKind::InstanceOfAbstractParameter, ap)?;
                if let Some(d) = &param.description {
                    b.kg.set_description(p, d)?;
                }
            }
            let r = b.kg.add_entity(EntityKind::ReturnValue, &return_value_name(&qname), Some(lib_id))?;
            b.kg.add_triple(m, RelationKind::HasReturnValue, r)?;
            if method.return_type != VOID {
                let ty = b.resolve_type(&method.return_type)?;
                b.kg.add_triple(r, RelationKind::HasReturnValueType, ty)?;
                b.kg.add_triple(m, RelationKind::HasReturnValueType, ty)?;
            }
            if let Some(d) = &method.return_description {
                b.kg.set_description(r, d)?;
            }
        }
    }

    Ok(ConstructionReport::from_counts(&entities_before, &triples_before, kg))
}
