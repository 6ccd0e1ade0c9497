//! JIRA XML export parsing.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use roxmltree::{Document, Node, ParsingOptions};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::Diagnostic;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: malformed XML: {reason}", path.display())]
    MalformedXml { path: PathBuf, reason: String },
    #[error("{}: missing <{field}>", path.display())]
    MissingField { path: PathBuf, field: &'static str },
    #[error("no .xml files in {}", dir.display())]
    NoInputFiles { dir: PathBuf },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BugRecord {
    pub key: String,
    pub title: String,
    /// Markup-free. Block-level tags (`<br/>`, `<p>`, table cells, ...)
    /// become line breaks; other whitespace is collapsed.
    pub description: String,
    pub comments: Vec<String>,
    pub affected_version: String,
    pub fix_version: Option<String>,
    pub component: Option<String>,
    pub bug_type: String,
    pub resolution: Option<String>,
}

#[derive(Debug, Default)]
pub struct Ingested {
    pub records: Vec<BugRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parse one exported issue.
pub fn parse_bug_xml(path: &Path) -> Result<BugRecord, IngestError> {
    parse_bug_file(path).map(|(r, _)| r)
}

fn parse_bug_file(path: &Path) -> Result<(BugRecord, Option<Diagnostic>), IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let (text, diag) = match String::from_utf8(bytes) {
        Ok(s) => (s, None),
        Err(e) => (
            String::from_utf8_lossy(e.as_bytes()).into_owned(),
            Some(Diagnostic::new(path.display().to_string(), "invalid UTF-8 replaced")),
        ),
    };
    parse_bug_str(&text, path).map(|r| (r, diag))
}

/// Parse issue XML held in memory; `path` is only used in errors.
pub fn parse_bug_str(text: &str, path: &Path) -> Result<BugRecord, IngestError> {
    let opts = ParsingOptions { allow_dtd: true, ..ParsingOptions::default() };
    let doc = Document::parse_with_options(text, opts)
        .map_err(|e| IngestError::MalformedXml { path: path.to_path_buf(), reason: e.to_string() })?;
    let missing = |field| IngestError::MissingField { path: path.to_path_buf(), field };
    let item = doc.descendants().find(|n| n.has_tag_name("item")).ok_or(missing("item"))?;

    let child = |name: &str| item.children().find(|n| n.has_tag_name(name));
    let text_of = |name: &str| child(name).map(|n| flat_text(n)).filter(|s| !s.is_empty());

    let key = text_of("key").ok_or(missing("key"))?;
    let summary = text_of("summary").or_else(|| {
        text_of("title").map(|t| match t.strip_prefix(&format!("[{key}]")) {
            Some(rest) => rest.trim().to_string(),
            None => t,
        })
    });
    let description = child("description").map(block_text);
    if summary.is_none() && description.is_none() {
        return Err(missing("summary"));
    }
    let comments = child("comments")
        .map(|c| {
            c.children()
                .filter(|n| n.has_tag_name("comment"))
                .map(block_text)
                .filter(|s| !s.is_empty())
                .collect()
        })
        .unwrap_or_default();

    Ok(BugRecord {
        key,
        title: summary.unwrap_or_default(),
        description: description.unwrap_or_default(),
        comments,
        affected_version: text_of("version").unwrap_or_default(),
        fix_version: text_of("fixVersion"),
        component: text_of("component"),
        bug_type: text_of("type").unwrap_or_default(),
        resolution: text_of("resolution"),
    })
}

/// Parse every `*.xml` directly inside `dir`. Per-file failures become
/// diagnostics; records come back sorted by key.
pub fn ingest_directory(dir: &Path) -> Result<Ingested, IngestError> {
    let rd = fs::read_dir(dir).map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(Result::ok)
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x.eq_ignore_ascii_case("xml")))
        .collect();
    if paths.is_empty() {
        return Err(IngestError::NoInputFiles { dir: dir.to_path_buf() });
    }
    paths.sort();
    let parsed: Vec<_> = paths.par_iter().map(|p| (p, parse_bug_file(p))).collect();

    let mut out = Ingested::default();
    let mut by_key: BTreeMap<String, BugRecord> = BTreeMap::new();
    for (path, res) in parsed {
        match res {
            Ok((rec, diag)) => {
                out.diagnostics.extend(diag);
                if by_key.contains_key(&rec.key) {
                    out.diagnostics.push(Diagnostic::new(path.display().to_string(), format!("duplicate key {}, ignored", rec.key)));
                } else {
                    by_key.insert(rec.key.clone(), rec);
                }
            }
            Err(e) => out.diagnostics.push(Diagnostic::new(path.display().to_string(), e.to_string())),
        }
    }
    out.records = by_key.into_values().collect();
    Ok(out)
}

const BLOCK_TAGS: &[&str] = &[
    "br", "p", "div", "table", "tbody", "thead", "tr", "td", "th", "li", "ul", "ol", "pre", "blockquote", "h1", "h2",
    "h3", "h4", "h5", "h6", "hr",
];

/// All text below `node` on one line.
fn flat_text(node: Node) -> String {
    block_text(node).split('\n').collect::<Vec<_>>().join(" ").trim().to_string()
}

/// Text below `node` with markup removed. Handles both literal child
/// elements and HTML that was escaped into the text.
fn block_text(node: Node) -> String {
    let mut raw = String::new();
    collect(node, &mut raw);
    // Escaped HTML shows up as `<p>` etc. after XML decoding; strip it the
    // same way, then undo any HTML entities (possibly double-escaped).
    let mut text = strip_tags(&raw);
    for _ in 0..4 {
        let next = decode_entities(&text);
        if next == text {
            break;
        }
        text = strip_tags(&next);
    }
    tidy(&text)
}

fn collect(node: Node, out: &mut String) {
    for c in node.children() {
        if c.is_text() {
            // Source line breaks are just wrapping.
            out.push_str(&c.text().unwrap_or("").replace(['\n', '\r', '\t'], " "));
        } else if c.is_element() {
            let block = BLOCK_TAGS.contains(&c.tag_name().name().to_ascii_lowercase().as_str());
            if block {
                out.push('\n');
            }
            collect(c, out);
            if block {
                out.push('\n');
            }
        }
    }
}

fn strip_tags(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('<') {
        out.push_str(&rest[..i]);
        let after = &rest[i + 1..];
        let looks_like_tag = after.starts_with(|c: char| c.is_ascii_alphabetic() || c == '/' || c == '!');
        match (looks_like_tag, after.find('>')) {
            (true, Some(j)) => {
                let name: String = after
                    .trim_start_matches('/')
                    .chars()
                    .take_while(|c| c.is_ascii_alphanumeric())
                    .collect::<String>()
                    .to_ascii_lowercase();
                if BLOCK_TAGS.contains(&name.as_str()) {
                    out.push('\n');
                } else {
                    out.push(' ');
                }
                rest = &after[j + 1..];
            }
            _ => {
                out.push('<');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(i) = rest.find('&') {
        out.push_str(&rest[..i]);
        let after = &rest[i + 1..];
        let decoded = after.find(';').filter(|&j| j <= 10).and_then(|j| {
            let name = &after[..j];
            let ch = match name {
                "amp" => Some('&'),
                "lt" => Some('<'),
                "gt" => Some('>'),
                "quot" => Some('"'),
                "apos" => Some('\''),
                "nbsp" => Some(' '),
                _ => name
                    .strip_prefix("#x")
                    .or_else(|| name.strip_prefix("#X"))
                    .and_then(|h| u32::from_str_radix(h, 16).ok())
                    .or_else(|| name.strip_prefix('#').and_then(|d| d.parse().ok()))
                    .and_then(char::from_u32),
            };
            ch.map(|c| (c, j))
        });
        match decoded {
            Some((c, j)) => {
                out.push(c);
                rest = &after[j + 1..];
            }
            None => {
                out.push('&');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Collapse spaces within lines and drop empty lines.
fn tidy(s: &str) -> String {
    s.split('\n')
        .map(|l| l.split_whitespace().collect::<Vec<_>>().join(" "))
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}
