//! Line-oriented lexicon files driving functionality and concept extraction.
//!
//! A lexicon directory holds four UTF-8 files; blank lines and lines starting
//! with `#` are ignored:
//!
//! * `verbs.tsv`: `verb<TAB>category`
//! * `patterns.txt`: one phrase pattern per line, e.g. `V {patient} in {location}`
//! * `stopwords.txt`: one word per line
//! * `pos.tsv`: `word<TAB>{n|v|a}`; a word may appear on several lines

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::text::{lemmatize_noun, verb_lemma_candidates};

pub const VERBS_FILE: &str = "verbs.tsv";
pub const PATTERNS_FILE: &str = "patterns.txt";
pub const STOPWORDS_FILE: &str = "stopwords.txt";
pub const POS_FILE: &str = "pos.tsv";

const BUNDLED_VERBS: &str = include_str!("../lexicons/verbs.tsv");
const BUNDLED_PATTERNS: &str = include_str!("../lexicons/patterns.txt");
const BUNDLED_STOPWORDS: &str = include_str!("../lexicons/stopwords.txt");
const BUNDLED_POS: &str = include_str!("../lexicons/pos.tsv");

/// Verbs the name-based fallback prepends; every lexicon must know them.
pub const DEFAULT_VERBS: [&str; 3] = ["get", "convert", "check"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Patient,
    Location,
    Goal,
    Source,
    Instrument,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Patient => "patient",
            Role::Location => "location",
            Role::Goal => "goal",
            Role::Source => "source",
            Role::Instrument => "instrument",
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "patient" => Role::Patient,
            "location" => Role::Location,
            "goal" => Role::Goal,
            "source" => Role::Source,
            "instrument" => Role::Instrument,
            other => return Err(format!("unknown role {other:?}")),
        })
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternPart {
    Slot(Role),
    Literal(String),
}

/// A verb-plus-roles template such as `V {patient} in {location}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhrasePattern {
    pub template: String,
    /// Parts after the leading `V`, alternating slot and literal.
    pub parts: Vec<PatternPart>,
}

impl PhrasePattern {
    pub fn parse(template: &str) -> std::result::Result<Self, String> {
        let mut tokens = template.split_whitespace();
        if tokens.next() != Some("V") {
            return Err(format!("pattern {template:?} must start with V"));
        }
        let mut parts = Vec::new();
        let mut last_was_slot = false;
        for tok in tokens {
            if let Some(role) = tok.strip_prefix('{').and_then(|t| t.strip_suffix('}')) {
                if last_was_slot {
                    return Err(format!("pattern {template:?} has adjacent slots"));
                }
                parts.push(PatternPart::Slot(role.parse()?));
                last_was_slot = true;
            } else {
                if !last_was_slot {
                    return Err(format!("pattern {template:?}: literal {tok:?} must follow a slot"));
                }
                parts.push(PatternPart::Literal(tok.to_lowercase()));
                last_was_slot = false;
            }
        }
        if !parts.is_empty() && !last_was_slot {
            return Err(format!("pattern {template:?} must end with a slot"));
        }
        let template = std::iter::once("V".to_string())
            .chain(parts.iter().map(|p| match p {
                PatternPart::Slot(r) => format!("{{{r}}}"),
                PatternPart::Literal(l) => l.clone(),
            }))
            .collect::<Vec<_>>()
            .join(" ");
        Ok(PhrasePattern { template, parts })
    }

    pub fn slots(&self) -> impl Iterator<Item = Role> + '_ {
        self.parts.iter().filter_map(|p| match p {
            PatternPart::Slot(r) => Some(*r),
            PatternPart::Literal(_) => None,
        })
    }

    pub fn slot_count(&self) -> usize {
        self.slots().count()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PosFlags {
    pub noun: bool,
    pub verb: bool,
    pub adjective: bool,
}

#[derive(Debug, Clone)]
pub struct Lexicons {
    verb_category: BTreeMap<String, String>,
    categories: BTreeSet<String>,
    patterns: Vec<PhrasePattern>,
    stop_words: HashSet<String>,
    pos: HashMap<String, PosFlags>,
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn lex_err(file: &str, line: usize, message: impl fmt::Display) -> Error {
    Error::Lexicon {
        file: file.to_string(),
        message: format!("line {line}: {message}"),
    }
}

impl Lexicons {
    /// The lexicons shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_texts(BUNDLED_VERBS, BUNDLED_PATTERNS, BUNDLED_STOPWORDS, BUNDLED_POS)
            .expect("bundled lexicons are valid")
    }

    pub fn load_dir(dir: &Path) -> Result<Self> {
        let read = |name: &str| {
            std::fs::read_to_string(dir.join(name)).map_err(|e| Error::Lexicon {
                file: dir.join(name).display().to_string(),
                message: e.to_string(),
            })
        };
        Self::from_texts(
            &read(VERBS_FILE)?,
            &read(PATTERNS_FILE)?,
            &read(STOPWORDS_FILE)?,
            &read(POS_FILE)?,
        )
    }

    pub fn from_texts(verbs: &str, patterns: &str, stop_words: &str, pos: &str) -> Result<Self> {
        let mut verb_category = BTreeMap::new();
        for (no, line) in content_lines(verbs) {
            let (verb, category) = line
                .split_once('\t')
                .ok_or_else(|| lex_err(VERBS_FILE, no, "expected verb<TAB>category"))?;
            let (verb, category) = (verb.trim().to_lowercase(), category.trim().to_lowercase());
            if verb.is_empty() || category.is_empty() {
                return Err(lex_err(VERBS_FILE, no, "empty verb or category"));
            }
            if let Some(prev) = verb_category.insert(verb.clone(), category.clone()) {
                if prev != category {
                    return Err(lex_err(VERBS_FILE, no, format!("{verb:?} mapped to two categories")));
                }
            }
        }
        for v in DEFAULT_VERBS {
            if !verb_category.contains_key(v) {
                return Err(lex_err(VERBS_FILE, 0, format!("missing required verb {v:?}")));
            }
        }
        let categories = verb_category.values().cloned().collect();

        let mut parsed = Vec::new();
        for (no, line) in content_lines(patterns) {
            let p = PhrasePattern::parse(line.trim()).map_err(|m| lex_err(PATTERNS_FILE, no, m))?;
            if parsed.iter().any(|q: &PhrasePattern| q.template == p.template) {
                return Err(lex_err(PATTERNS_FILE, no, format!("duplicate template {:?}", p.template)));
            }
            parsed.push(p);
        }
        if parsed.is_empty() {
            return Err(lex_err(PATTERNS_FILE, 0, "no patterns"));
        }

        let stop_words = content_lines(stop_words)
            .map(|(_, l)| l.trim().to_lowercase())
            .collect();

        let mut pos_map: HashMap<String, PosFlags> = HashMap::new();
        for (no, line) in content_lines(pos) {
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| lex_err(POS_FILE, no, "expected word<TAB>tag"))?;
            let flags = pos_map.entry(word.trim().to_lowercase()).or_default();
            match tag.trim() {
                "n" => flags.noun = true,
                "v" => flags.verb = true,
                "a" => flags.adjective = true,
                other => return Err(lex_err(POS_FILE, no, format!("unknown tag {other:?}"))),
            }
        }

        Ok(Lexicons {
            verb_category,
            categories,
            patterns: parsed,
            stop_words,
            pos: pos_map,
        })
    }

    pub fn category_of(&self, verb: &str) -> Option<&str> {
        self.verb_category.get(verb).map(String::as_str)
    }

    pub fn is_verb(&self, lemma: &str) -> bool {
        self.verb_category.contains_key(lemma)
    }

    /// Lexicon verb this word is an inflection of, if any.
    pub fn verb_lemma(&self, word: &str) -> Option<String> {
        verb_lemma_candidates(word)
            .into_iter()
            .find(|c| self.verb_category.contains_key(c))
    }

    pub fn categories(&self) -> &BTreeSet<String> {
        &self.categories
    }

    pub fn verbs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.verb_category
            .iter()
            .map(|(v, c)| (v.as_str(), c.as_str()))
    }

    pub fn patterns(&self) -> &[PhrasePattern] {
        &self.patterns
    }

    pub fn is_stop_word(&self, word: &str) -> bool {
        self.stop_words.contains(word)
    }

    pub fn pos(&self, word: &str) -> PosFlags {
        if let Some(&f) = self.pos.get(word) {
            return f;
        }
        self.pos
            .get(&lemmatize_noun(word))
            .copied()
            .unwrap_or_default()
    }

    /// Normalizes a run of words into a concept phrase: lowercase, each token
    /// lemmatized, leading stop words removed. `None` if nothing remains.
    pub fn concept_phrase<S: AsRef<str>>(&self, tokens: &[S]) -> Option<String> {
        let lemmas: Vec<String> = tokens
            .iter()
            .map(|t| t.as_ref().to_lowercase())
            .filter(|t| !t.is_empty())
            .skip_while(|t| self.is_stop_word(t))
            .map(|t| lemmatize_noun(&t))
            .collect();
        if lemmas.is_empty() {
            None
        } else {
            Some(lemmas.join(" "))
        }
    }
}
