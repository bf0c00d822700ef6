//! Identifier splitting, sentence segmentation and rule-based lemmatization.

/// Text of a description up to (excluding) its first sentence terminator.
///
/// A terminator is `.`, `!` or `?` followed by whitespace or the end of the
/// text, outside any parentheses.
pub fn first_sentence(description: &str) -> &str {
    let mut depth = 0usize;
    let mut chars = description.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            '.' | '!' | '?' if depth == 0 => {
                let at_boundary = match chars.peek() {
                    None => true,
                    Some(&(_, next)) => next.is_whitespace(),
                };
                if at_boundary {
                    return description[..i].trim();
                }
            }
            _ => {}
        }
    }
    description.trim()
}

/// Splits an identifier at underscores, lower-to-upper transitions and the
/// last capital of an acronym run; digits stay with the preceding token.
///
/// `"JSONArray"` becomes `["json", "array"]`, `"srcFile"` becomes
/// `["src", "file"]`.
pub fn tokenize_identifier(name: &str) -> Vec<String> {
    let chars: Vec<char> = name.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if !c.is_alphanumeric() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            continue;
        }
        if c.is_uppercase() && !current.is_empty() {
            let prev = chars[i - 1];
            let next_is_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_is_lower) {
                tokens.push(std::mem::take(&mut current));
            }
        }
        current.extend(c.to_lowercase());
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Lowercased word tokens of free text. Identifiers inside the text stay
/// whole (`"JSONObject"` becomes `"jsonobject"`); `.` and other
/// punctuation split words.
pub fn words(text: &str) -> Vec<String> {
    text.split(|c: char| !(c.is_alphanumeric() || c == '_'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Words together with the punctuation that breaks clauses, as `None`.
pub(crate) fn words_with_breaks(text: &str) -> Vec<Option<String>> {
    let mut out = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_alphanumeric() || c == '_' {
            current.extend(c.to_lowercase());
            continue;
        }
        if !current.is_empty() {
            out.push(Some(std::mem::take(&mut current)));
        }
        if matches!(c, ',' | ';' | ':' | '(' | ')' | '!' | '?') {
            out.push(None);
        }
    }
    if !current.is_empty() {
        out.push(Some(current));
    }
    out
}

const NOUN_EXCEPTIONS: &[(&str, &str)] = &[
    ("indices", "index"),
    ("vertices", "vertex"),
    ("matrices", "matrix"),
    ("children", "child"),
    ("people", "person"),
    ("men", "man"),
    ("women", "woman"),
    ("analyses", "analysis"),
    ("caches", "cache"),
    ("series", "series"),
    ("species", "species"),
    ("data", "data"),
    ("criteria", "criterion"),
    ("aliases", "alias"),
    ("statuses", "status"),
];

/// Singular form of a (lowercase) noun by suffix rules.
pub fn lemmatize_noun(word: &str) -> String {
    if let Some(&(_, lemma)) = NOUN_EXCEPTIONS.iter().find(|(w, _)| *w == word) {
        return lemma.to_string();
    }
    let n = word.len();
    if !word.is_ascii() || n < 4 || !word.ends_with('s') {
        return word.to_string();
    }
    if word.ends_with("ies") && n > 4 {
        return format!("{}y", &word[..n - 3]);
    }
    if ["sses", "xes", "ches", "shes"].iter().any(|s| word.ends_with(s)) {
        return word[..n - 2].to_string();
    }
    if ["ss", "us", "is", "os"].iter().any(|s| word.ends_with(s)) {
        return word.to_string();
    }
    word[..n - 1].to_string()
}

const VERB_EXCEPTIONS: &[(&str, &str)] = &[
    ("got", "get"),
    ("gotten", "get"),
    ("made", "make"),
    ("built", "build"),
    ("found", "find"),
    ("wrote", "write"),
    ("written", "write"),
    ("sent", "send"),
    ("thrown", "throw"),
    ("threw", "throw"),
    ("began", "begin"),
    ("begun", "begin"),
    ("taken", "take"),
    ("took", "take"),
    ("kept", "keep"),
    ("held", "hold"),
    ("lost", "lose"),
    ("bound", "bind"),
    ("does", "do"),
    ("did", "do"),
];

fn doubled_consonant(stem: &str) -> Option<&str> {
    let b = stem.as_bytes();
    let n = b.len();
    if n >= 3 && b[n - 1] == b[n - 2] && !b"aeiouslz".contains(&b[n - 1]) {
        Some(&stem[..n - 1])
    } else {
        None
    }
}

/// Possible base forms of an inflected verb, most literal first.
///
/// Callers pick the first candidate present in their verb lexicon.
pub fn verb_lemma_candidates(word: &str) -> Vec<String> {
    let mut out = vec![word.to_string()];
    if let Some(&(_, lemma)) = VERB_EXCEPTIONS.iter().find(|(w, _)| *w == word) {
        out.push(lemma.to_string());
    }
    if !word.is_ascii() {
        return out;
    }
    let n = word.len();
    let mut push = |s: String| {
        if s.len() >= 2 && !out.contains(&s) {
            out.push(s);
        }
    };
    if let Some(stem) = word.strip_suffix("ies") {
        push(format!("{stem}y"));
    }
    if word.ends_with("es") && n > 3 {
        push(word[..n - 2].to_string());
    }
    if word.ends_with('s') && !word.ends_with("ss") && n > 2 {
        push(word[..n - 1].to_string());
    }
    if let Some(stem) = word.strip_suffix("ing") {
        push(stem.to_string());
        push(format!("{stem}e"));
        if let Some(s) = doubled_consonant(stem) {
            push(s.to_string());
        }
    }
    if let Some(stem) = word.strip_suffix("ied") {
        push(format!("{stem}y"));
    }
    if let Some(stem) = word.strip_suffix("ed") {
        push(stem.to_string());
        push(format!("{stem}e"));
        if let Some(s) = doubled_consonant(stem) {
            push(s.to_string());
        }
    }
    out
}
