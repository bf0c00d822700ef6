//! Small corpora and graphs for tests, demos and benchmarks.
//!
//! Everything here is deterministic in its seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::BenchmarkPair;
use crate::graph::{EntityId, EntityKind, KnowledgeGraph, RelationKind};
use crate::ingest::{
    method_qualified_name, parse_corpus, ClassDoc, DocCorpus, LibraryDoc, MethodDoc, PackageDoc, ParamDoc,
};

/// Two JSON libraries (org.json and Gson), four classes, 21 methods.
pub const SMALL_CORPUS_JSON: &str = include_str!("../fixtures/small_corpus.json");

pub fn small_corpus() -> DocCorpus {
    parse_corpus(SMALL_CORPUS_JSON.as_bytes()).expect("bundled fixture parses")
}

/// Naming style of one mirrored copy.
struct Style {
    package_root: &'static str,
    class_prefix: &'static str,
    param_prefix: &'static str,
    alias: usize,
}

const STYLES: &[Style] = &[
    Style {
        package_root: "org.alpha",
        class_prefix: "Alpha",
        param_prefix: "",
        alias: 0,
    },
    Style {
        package_root: "net.beta",
        class_prefix: "Beta",
        param_prefix: "src",
        alias: 1,
    },
    Style {
        package_root: "io.gamma",
        class_prefix: "Gamma",
        param_prefix: "in",
        alias: 2,
    },
    Style {
        package_root: "com.delta",
        class_prefix: "Delta",
        param_prefix: "raw",
        alias: 3,
    },
];

/// Description verb, then one method-name verb per copy style. Name verbs are
/// unique within each column so renamed methods never collide.
const ACTIONS: &[(&str, [&str; 4])] = &[
    ("Returns", ["get", "fetch", "obtain", "retrieve"]),
    ("Removes", ["remove", "delete", "drop", "erase"]),
    ("Adds", ["add", "append", "insert", "push"]),
    ("Counts", ["count", "tally", "measure", "total"]),
    ("Sorts", ["sort", "order", "arrange", "rank"]),
    ("Finds", ["find", "search", "locate", "lookup"]),
    ("Copies", ["copy", "clone", "duplicate", "replicate"]),
    ("Parses", ["parse", "scan", "decode", "tokenize"]),
    ("Clears", ["clear", "reset", "purge", "wipe"]),
    ("Writes", ["write", "save", "store", "dump"]),
    ("Validates", ["validate", "verify", "assert", "ensure"]),
    ("Compares", ["compare", "diff", "contrast", "weigh"]),
];

const NOUNS: &[&str] = &[
    "element", "entry", "key", "value", "name", "header", "label", "weight", "node", "edge", "field", "row",
    "column", "token", "limit", "version",
];

const CLASS_NOUNS: &[&str] = &[
    "Buffer", "Matrix", "Queue", "Graph", "Document", "Record", "Table", "Stream", "Cache", "Schema", "Channel",
    "Ledger",
];

const PARAMS: &[(&str, &str)] = &[
    ("index", "int"),
    ("count", "int"),
    ("name", "java.lang.String"),
    ("flag", "boolean"),
    ("value", "java.lang.Object"),
    ("limit", "long"),
];

const RETURNS: &[&str] = &["void", "int", "boolean", "java.lang.String", "java.util.List", "long"];

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().chain(c).collect())
        .unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MirrorShape {
    /// Number of libraries, at most four.
    pub copies: usize,
    pub classes: usize,
    pub methods_per_class: usize,
    pub seed: u64,
}

impl Default for MirrorShape {
    fn default() -> Self {
        MirrorShape {
            copies: 2,
            classes: 3,
            methods_per_class: 6,
            seed: 7,
        }
    }
}

/// Libraries with identical structure and descriptions whose identifiers
/// are renamed per copy, so corresponding methods are analogical by
/// construction.
#[derive(Debug, Clone)]
pub struct MirroredCorpus {
    pub corpus: DocCorpus,
    pub libraries: Vec<String>,
    /// Qualified method names, one row per template method, one column per copy.
    pub groups: Vec<Vec<String>>,
}

impl MirroredCorpus {
    /// Pairs each method of copy `from` with its mirror in copy `to`.
    pub fn benchmark(&self, from: usize, to: usize) -> Vec<BenchmarkPair> {
        self.groups
            .iter()
            .map(|g| BenchmarkPair {
                source: g[from].clone(),
                targets: vec![g[to].clone()],
                target_library: Some(self.libraries[to].clone()),
            })
            .collect()
    }
}

struct TemplateMethod {
    action: usize,
    noun: &'static str,
    in_location: bool,
    params: Vec<(&'static str, &'static str)>,
    /// Index into RETURNS, or `None` for the declaring class itself.
    ret: Option<usize>,
}

pub fn mirrored_corpus(shape: &MirrorShape) -> Result<MirroredCorpus> {
    if shape.copies == 0 || shape.copies > STYLES.len() {
        return Err(Error::Config(format!("copies must be in 1..={}", STYLES.len())));
    }
    if shape.classes == 0 || shape.classes > CLASS_NOUNS.len() || shape.methods_per_class > ACTIONS.len() * NOUNS.len() {
        return Err(Error::Config("mirror shape exceeds the fixture vocabulary".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(shape.seed);
    let mut class_nouns = CLASS_NOUNS.to_vec();
    class_nouns.shuffle(&mut rng);
    class_nouns.truncate(shape.classes);

    let mut template: Vec<Vec<TemplateMethod>> = Vec::new();
    for _ in 0..shape.classes {
        let mut combos: Vec<(usize, &str)> = (0..ACTIONS.len())
            .flat_map(|a| NOUNS.iter().map(move |&n| (a, n)))
            .collect();
        combos.shuffle(&mut rng);
        let methods = combos[..shape.methods_per_class]
            .iter()
            .map(|&(action, noun)| {
                let n_params = rng.gen_range(0..=2);
                let mut pool = PARAMS.to_vec();
                pool.shuffle(&mut rng);
                let ret = if rng.gen_bool(0.2) {
                    None
                } else {
                    Some(rng.gen_range(0..RETURNS.len()))
                };
                TemplateMethod {
                    action,
                    noun,
                    in_location: rng.gen_bool(0.5),
                    params: pool[..n_params].to_vec(),
                    ret,
                }
            })
            .collect();
        template.push(methods);
    }

    let mut libraries = Vec::new();
    let mut groups: Vec<Vec<String>> = vec![Vec::new(); shape.classes * shape.methods_per_class];
    let mut corpus = DocCorpus::default();
    for style in &STYLES[..shape.copies] {
        let package = format!("{}.data", style.package_root);
        let coordinates = format!("{}:{}:1.0", style.package_root, style.class_prefix.to_lowercase());
        let class_name = |i: usize| format!("{package}.{}{}", style.class_prefix, class_nouns[i]);
        let mut classes = Vec::new();
        for (i, methods) in template.iter().enumerate() {
            let qualified = class_name(i);
            let noun = class_nouns[i].to_lowercase();
            let mut docs = Vec::new();
            for (j, m) in methods.iter().enumerate() {
                let (verb, aliases) = ACTIONS[m.action];
                let prep = if m.in_location { "in" } else { "of" };
                let params = m
                    .params
                    .iter()
                    .map(|&(p, ty)| ParamDoc {
                        name: if style.param_prefix.is_empty() {
                            p.to_string()
                        } else {
                            format!("{}{}", style.param_prefix, capitalize(p))
                        },
                        ty: ty.to_string(),
                        description: None,
                    })
                    .collect();
                let doc = MethodDoc {
                    name: format!("{}{}", aliases[style.alias], capitalize(m.noun)),
                    params,
                    return_type: m.ret.map_or_else(|| qualified.clone(), |r| RETURNS[r].to_string()),
                    description: Some(format!("{verb} the {} {prep} the {noun}.", m.noun)),
                    return_description: None,
                };
                groups[i * shape.methods_per_class + j].push(method_qualified_name(&qualified, &doc));
                docs.push(doc);
            }
            classes.push(ClassDoc {
                qualified_name: qualified,
                is_interface: false,
                extends: (i % 2 == 1).then(|| class_name(i - 1)),
                implements: Vec::new(),
                description: Some(format!("A {noun} that holds named entries.")),
                fields: Vec::new(),
                methods: docs,
            });
        }
        corpus.libraries.push(LibraryDoc {
            coordinates: coordinates.clone(),
            packages: vec![PackageDoc { name: package, classes }],
        });
        libraries.push(coordinates);
    }
    Ok(MirroredCorpus {
        corpus,
        libraries,
        groups,
    })
}

/// A graph of two isomorphic libraries sharing concepts and functionality
/// expressions: about 200 entities and 800 triples. Every method-level fact
/// of one library has a twin in the other.
pub fn synthetic_kg(seed: u64) -> KnowledgeGraph {
    use EntityKind as K;
    use RelationKind as R;

    const CLASSES: usize = 6;
    const METHODS: usize = 56;
    const CONCEPTS: usize = 50;
    const EXPRESSIONS: usize = 24;
    // Concept ranges per role: class concepts, types, values.
    const TYPES: std::ops::Range<usize> = 6..24;
    const VALUES: std::ops::Range<usize> = 24..CONCEPTS;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kg = KnowledgeGraph::new();
    let add = |kg: &mut KnowledgeGraph, k, n: &str, l| kg.add_entity(k, n, l).expect("valid fixture entity");
    let link = |kg: &mut KnowledgeGraph, h, r, t| {
        kg.add_triple(h, r, t).expect("valid fixture triple");
    };

    let concepts: Vec<EntityId> = (0..CONCEPTS).map(|i| add(&mut kg, K::Concept, &format!("concept {i}"), None)).collect();
    let exprs: Vec<EntityId> = (0..EXPRESSIONS)
        .map(|i| add(&mut kg, K::FunctionalityExpression, &format!("do | thing {i}"), None))
        .collect();

    // Each expression implies typical input/output types and a parameter
    // concept, as "get | length" implies an int result in real graphs.
    struct Typing {
        out: usize,
        input: usize,
        value: usize,
    }
    let typing: Vec<Typing> = (0..EXPRESSIONS)
        .map(|_| Typing {
            out: rng.gen_range(TYPES),
            input: rng.gen_range(TYPES),
            value: rng.gen_range(VALUES),
        })
        .collect();
    for (f, t) in exprs.iter().zip(&typing) {
        link(&mut kg, *f, R::InvolveConcept, concepts[t.value]);
    }
    for k in TYPES {
        let parent = concepts[rng.gen_range(0..TYPES.start)];
        link(&mut kg, concepts[k], R::IsA, parent);
    }

    struct Shape {
        funcs: Vec<usize>,
        out: usize,
        inputs: Vec<usize>,
        values: Vec<usize>,
    }
    let shapes: Vec<Shape> = (0..METHODS)
        .map(|_| {
            let f = rng.gen_range(0..EXPRESSIONS);
            let t = &typing[f];
            let mut funcs = vec![f];
            if rng.gen_bool(0.3) {
                funcs.push(rng.gen_range(0..EXPRESSIONS));
            }
            let out = if rng.gen_bool(0.8) { t.out } else { rng.gen_range(TYPES) };
            let mut inputs = Vec::new();
            let mut values = Vec::new();
            if rng.gen_bool(0.8) {
                inputs.push(t.input);
                values.push(t.value);
            }
            if rng.gen_bool(0.4) {
                inputs.push(rng.gen_range(TYPES));
                values.push(rng.gen_range(VALUES));
            }
            Shape {
                funcs,
                out,
                inputs,
                values,
            }
        })
        .collect();

    for lib_name in ["left", "right"] {
        let lib = add(&mut kg, K::Library, lib_name, None);
        let packages: Vec<EntityId> = (0..2)
            .map(|p| add(&mut kg, K::Package, &format!("{lib_name}.p{p}"), Some(lib)))
            .collect();
        for &p in &packages {
            link(&mut kg, p, R::BelongsToLibrary, lib);
        }
        let classes: Vec<EntityId> = (0..CLASSES)
            .map(|c| add(&mut kg, K::Class, &format!("{lib_name}.p{}.C{c}", c % 2), Some(lib)))
            .collect();
        for (c, &class) in classes.iter().enumerate() {
            link(&mut kg, class, R::BelongsToPackage, packages[c % 2]);
            link(&mut kg, class, R::BelongsToLibrary, lib);
            link(&mut kg, class, R::InstanceClassOfConcept, concepts[c]);
            if c % 2 == 1 {
                link(&mut kg, class, R::Extend, classes[c - 1]);
            }
        }
        for (j, s) in shapes.iter().enumerate() {
            let class = classes[j % CLASSES];
            let name = format!("{}.m{j}()", kg.name(class));
            let m = add(&mut kg, K::Method, &name, Some(lib));
            link(&mut kg, class, R::HasMethod, m);
            link(&mut kg, m, R::OperationOf, concepts[j % CLASSES]);
            link(&mut kg, m, R::HasOutputType, concepts[s.out]);
            for &f in &s.funcs {
                link(&mut kg, m, R::HasFunctionality, exprs[f]);
            }
            for &i in &s.inputs {
                link(&mut kg, m, R::HasInputType, concepts[i]);
            }
            for &v in &s.values {
                link(&mut kg, m, R::HasInputValue, concepts[v]);
            }
        }
    }
    kg
}
