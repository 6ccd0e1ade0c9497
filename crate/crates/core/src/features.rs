//! Bug features: class and method names, code fragments and keyword
//! frequencies pulled out of a bug report's prose.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bug_ingest::BugRecord;
use crate::lexer::{self, TokenKind};
use crate::lexicon::Lexicon;
use crate::source::{self, MethodCode, SourceIndex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FeatureError {
    #[error("{key}: no method name found in the report")]
    NoMethodFound { key: String },
    #[error("{key}: {count} methods named in the report (limit {max})")]
    TooManyMethods { key: String, count: usize, max: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SentenceKind {
    Special,
    Program,
    Natural,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceClass {
    pub text: String,
    pub kind: SentenceKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugFeatures {
    pub bug_key: String,
    pub classes: Vec<String>,
    pub methods: Vec<String>,
    pub component: String,
    pub program_attrs: Vec<String>,
    pub natural_attrs: BTreeMap<String, usize>,
    #[serde(default)]
    pub sentences: Vec<SentenceClass>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureConfig {
    pub min_cs_len: usize,
    pub max_methods: usize,
    pub boost: usize,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { min_cs_len: 3, max_methods: 8, boost: 3 }
    }
}

/// Class and method names known from the source tree.
pub trait Terminology {
    fn is_class(&self, word: &str) -> bool;
    fn is_method(&self, word: &str) -> bool;
}

impl Terminology for SourceIndex {
    fn is_class(&self, word: &str) -> bool {
        self.classes.contains_key(word)
    }
    fn is_method(&self, word: &str) -> bool {
        self.methods.contains_key(word)
    }
}

/// A flat name table; every entry counts as both class and method.
impl Terminology for BTreeSet<String> {
    fn is_class(&self, word: &str) -> bool {
        self.contains(word)
    }
    fn is_method(&self, word: &str) -> bool {
        self.contains(word)
    }
}

fn ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

/// Split prose on `!`, `?`, `,` and `.`. A `.` or `!` that is glued to an
/// identifier on its right (`this.collator`, `!this`), sits between two
/// identifier characters, or starts `!=`, belongs to code and does not end
/// a sentence.
pub fn segment_sentences(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut cur = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let boundary = match c {
            ',' | '?' => true,
            '.' | '!' => {
                let next = chars.get(i + 1).copied();
                let prev = i.checked_sub(1).map(|p| chars[p]);
                let glued = next.is_some_and(ident_char);
                let flanked = prev.is_some_and(ident_char) && glued;
                let not_equal = c == '!' && next == Some('=');
                !(glued || flanked || not_equal)
            }
            _ => false,
        };
        if boundary {
            push_sentence(&mut out, &cur);
            cur.clear();
        } else {
            cur.push(c);
        }
    }
    push_sentence(&mut out, &cur);
    out
}

fn push_sentence(out: &mut Vec<String>, s: &str) {
    let s = normalize_ws(s);
    if !s.is_empty() {
        out.push(s);
    }
}

pub fn normalize_ws(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Whitespace-separated words with surrounding punctuation trimmed.
/// `plain` words are single identifiers; dotted references such as
/// `RangeQuery.equals` are split into parts but flagged as code.
struct Word<'a> {
    parts: Vec<&'a str>,
    plain: bool,
}

fn words(s: &str) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    for raw in s.split_whitespace() {
        let w = raw.trim_matches(|c: char| !ident_char(c));
        let w = w.strip_suffix("'s").unwrap_or(w);
        if w.is_empty() || !w.chars().all(|c| ident_char(c) || c == '.') {
            continue;
        }
        let parts: Vec<&str> = w.split('.').collect();
        if parts.iter().any(|p| p.is_empty() || !p.starts_with(|c: char| c.is_alphabetic() || c == '_' || c == '$')) {
            continue;
        }
        out.push(Word { plain: parts.len() == 1, parts });
    }
    out
}

/// Share of whitespace-separated words that look like code.
fn code_ratio(s: &str) -> f64 {
    let ws: Vec<&str> = s.split_whitespace().collect();
    if ws.is_empty() {
        return 0.0;
    }
    let code = ws
        .iter()
        .filter(|w| {
            w.contains(|c: char| "().=!&|<>[];{}+-*/%".contains(c))
                || lexer::is_keyword(w.trim_matches(|c: char| !ident_char(c)))
        })
        .count();
    code as f64 / ws.len() as f64
}

fn terminology_hits<'a>(s: &'a str, terms: &dyn Terminology) -> (Vec<&'a str>, Vec<&'a str>) {
    let mut classes = Vec::new();
    let mut methods = Vec::new();
    for w in words(s) {
        for p in w.parts {
            if terms.is_class(p) {
                classes.push(p);
            } else if terms.is_method(p) {
                methods.push(p);
            }
        }
    }
    (classes, methods)
}

/// Does `s` share a run of `min_len` normalized tokens with one statement
/// of `code`?
fn shares_code(s: &str, code: &MethodCode, min_len: usize) -> bool {
    let frag = source::normalize_fragment(s, &code.bindings);
    if frag.len() < min_len.max(1) {
        return false;
    }
    let mut by_stmt: BTreeMap<usize, Vec<&str>> = BTreeMap::new();
    for t in code.norm_tokens() {
        by_stmt.entry(t.statement).or_default().push(t.text.as_str());
    }
    let n = min_len.max(1);
    frag.windows(n).any(|w| by_stmt.values().any(|st| st.windows(n).any(|x| x.iter().zip(w).all(|(a, b)| *a == b))))
}

/// Special if the sentence names a known class or method; Program if it
/// reads as code and shares a token run with the bug method; else Natural.
pub fn classify_sentence(s: &str, terms: &dyn Terminology, bug_code: &[MethodCode], min_cs_len: usize) -> SentenceClass {
    let (c, m) = terminology_hits(s, terms);
    let kind = if !c.is_empty() || !m.is_empty() {
        SentenceKind::Special
    } else if code_ratio(s) >= 0.5 && bug_code.iter().any(|code| shares_code(s, code, min_cs_len)) {
        SentenceKind::Program
    } else {
        SentenceKind::Natural
    };
    SentenceClass { text: s.to_string(), kind }
}

/// All sentences of a record: title, description lines, comments.
pub fn record_sentences(bug: &BugRecord) -> Vec<String> {
    std::iter::once(bug.title.as_str())
        .chain(bug.description.split('\n'))
        .chain(bug.comments.iter().flat_map(|c| c.split('\n')))
        .flat_map(segment_sentences)
        .collect()
}

/// Bug methods for a feature set: declarations of each named method in one
/// of the named classes, or every declaration when none of them match.
pub fn resolve_bug_methods(index: &SourceIndex, classes: &[String], methods: &[String]) -> Vec<MethodCode> {
    let mut out = Vec::new();
    for name in methods {
        let locs = index.locations(name);
        let in_class: Vec<_> = locs.iter().filter(|l| classes.contains(&l.class_name)).collect();
        let chosen: Vec<_> = if in_class.is_empty() { locs.iter().collect() } else { in_class };
        out.extend(chosen.into_iter().map(|l| source::normalize_variables(&source::extract(index, l), index)));
    }
    out
}

pub fn extract_features(
    bug: &BugRecord,
    index: &SourceIndex,
    lexicon: &Lexicon,
    cfg: &FeatureConfig,
) -> Result<BugFeatures, FeatureError> {
    let sentences = record_sentences(bug);

    let mut classes: Vec<String> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    for s in &sentences {
        let (c, m) = terminology_hits(s, index);
        for x in c {
            if !classes.iter().any(|y| y == x) {
                classes.push(x.to_string());
            }
        }
        for x in m {
            if !methods.iter().any(|y| y == x) {
                methods.push(x.to_string());
            }
        }
    }
    if methods.is_empty() {
        return Err(FeatureError::NoMethodFound { key: bug.key.clone() });
    }
    if methods.len() > cfg.max_methods {
        return Err(FeatureError::TooManyMethods { key: bug.key.clone(), count: methods.len(), max: cfg.max_methods });
    }

    let code = resolve_bug_methods(index, &classes, &methods);
    // Callee merging, at name granularity.
    let kept: BTreeSet<String> = source::merge_callees(code.clone()).into_iter().map(|m| m.method_name).collect();
    methods.retain(|m| kept.contains(m));
    let code: Vec<MethodCode> = code.into_iter().filter(|m| kept.contains(&m.method_name)).collect();

    let classified: Vec<SentenceClass> =
        sentences.iter().map(|s| classify_sentence(s, index, &code, cfg.min_cs_len)).collect();

    let mut program_attrs: Vec<String> = Vec::new();
    for s in classified.iter().filter(|s| s.kind == SentenceKind::Program) {
        let p = normalize_ws(&s.text);
        if !p.is_empty() && !program_attrs.contains(&p) {
            program_attrs.push(p);
        }
    }

    let identifiers: BTreeSet<String> = code
        .iter()
        .flat_map(|m| m.tokens.iter())
        .filter(|t| t.in_body && t.kind == TokenKind::Ident)
        .map(|t| t.raw.to_lowercase())
        .collect();
    let mut natural_attrs = natural_terms(classified.iter().filter(|s| s.kind != SentenceKind::Program).map(|s| s.text.as_str()), index, lexicon);
    for (term, count) in natural_attrs.iter_mut() {
        if identifiers.contains(term) {
            // Presence in the bug method matters more than repetition.
            *count = cfg.boost.max(1);
        }
    }

    Ok(BugFeatures {
        bug_key: bug.key.clone(),
        classes,
        methods,
        component: bug.component.clone().unwrap_or_default(),
        program_attrs,
        natural_attrs,
        sentences: classified,
    })
}

/// Raw keyword counts over prose sentences: plain words, lowercased,
/// without stopwords, verbs or numbers. Terminology words are always kept.
pub fn natural_terms<'a>(
    sentences: impl Iterator<Item = &'a str>,
    terms: &dyn Terminology,
    lexicon: &Lexicon,
) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for s in sentences {
        for w in words(s).into_iter().filter(|w| w.plain) {
            let word = w.parts[0];
            let named = terms.is_class(word) || terms.is_method(word);
            if word.chars().count() < 2 || (!named && !lexicon.is_content(word)) {
                continue;
            }
            *out.entry(word.to_lowercase()).or_insert(0) += 1;
        }
    }
    out
}
