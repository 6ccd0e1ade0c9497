//! Source indexing and method extraction.
//!
//! Files are scanned lexically (no parser): class and method declarations
//! are recognised from token patterns at class-body depth, method regions
//! are delimited by balanced braces, and variable declarations are found
//! by `Type name` patterns.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::diagnostics::Diagnostic;
use crate::lexer::{self, Token, TokenKind};

/// Token text substituted for variables whose declared type is the class
/// enclosing the method. Overriding methods in sibling classes declare such
/// variables with their own class, so the placeholder keeps them comparable.
pub const SELF_TYPE: &str = "$Self";

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("no .{ext} source files under {}", dir.display())]
    NoSourceFiles { dir: PathBuf, ext: String },
    #[error("{}: unbalanced braces near line {line}", path.display())]
    UnbalancedBraces { path: PathBuf, line: usize },
    #[error("method {class}.{method} not found")]
    MethodNotFound { class: String, method: String },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexOptions {
    pub ext: String,
    pub count_annotations: bool,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions { ext: "java".to_string(), count_annotations: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub name: String,
    pub type_name: String,
    pub primitive: bool,
}

/// Where one method declaration lives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodLocation {
    pub class_name: String,
    pub method_name: String,
    pub signature: String,
    pub file: PathBuf,
    /// One-based, inclusive.
    pub start_line: usize,
    pub end_line: usize,
    #[serde(skip)]
    file_idx: usize,
    #[serde(skip)]
    first_token: usize,
    #[serde(skip)]
    open_brace: usize,
    #[serde(skip)]
    close_brace: usize,
}

#[derive(Debug)]
struct SourceFile {
    path: PathBuf,
    lines: Vec<String>,
    tokens: Vec<Token>,
    /// Fields per class declared in this file.
    fields: BTreeMap<String, Vec<FieldDecl>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub files: usize,
    pub classes: usize,
    pub total_lines: usize,
    pub code_lines: usize,
    pub methods: usize,
    /// method name -> (declarations, distinct classes)
    pub overloads: BTreeMap<String, (usize, usize)>,
}

/// Class and method names of a source tree, plus enough of each file to
/// extract method bodies later.
#[derive(Debug)]
pub struct SourceIndex {
    pub root: PathBuf,
    pub options: IndexOptions,
    pub classes: BTreeMap<String, PathBuf>,
    pub methods: BTreeMap<String, Vec<MethodLocation>>,
    /// All class and method names: the terminology table.
    pub name_table: BTreeSet<String>,
    pub diagnostics: Vec<Diagnostic>,
    files: Vec<SourceFile>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceLine {
    /// One-based line number in the file.
    pub number: usize,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeToken {
    /// Current text; variable names are replaced by type names after
    /// normalization.
    pub text: String,
    /// Text as written in the source.
    pub raw: String,
    pub kind: TokenKind,
    /// Index into `MethodCode::lines` / `statements`.
    pub statement: usize,
    pub col: usize,
    /// Strictly between the body braces.
    pub in_body: bool,
}

impl CodeToken {
    pub fn is_comparable(&self) -> bool {
        match self.kind {
            TokenKind::Ident | TokenKind::Keyword | TokenKind::Literal => true,
            TokenKind::Separator => self.text == ";",
            TokenKind::Annotation | TokenKind::Operator => false,
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        self.text == p && matches!(self.kind, TokenKind::Separator | TokenKind::Operator)
    }
}

/// One located method: retained source lines plus the token stream used
/// for comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodCode {
    pub class_name: String,
    pub method_name: String,
    pub signature: String,
    pub file: PathBuf,
    pub start_line: usize,
    pub end_line: usize,
    /// Non-blank, non-comment lines of the declaration.
    pub lines: Vec<SourceLine>,
    pub loc: usize,
    /// Per-line text with variable substitutions applied.
    pub statements: Vec<String>,
    pub tokens: Vec<CodeToken>,
    /// Raw variable name -> normalized type, from the method's parameters
    /// and locals and the class's non-primitive fields.
    pub bindings: BTreeMap<String, String>,
}

impl MethodCode {
    pub fn id(&self) -> String {
        format!("{}.{}", self.class_name, self.method_name)
    }

    /// Comparable body tokens (identifiers, keywords, literals, `;`).
    pub fn norm_tokens(&self) -> impl Iterator<Item = &CodeToken> {
        self.tokens.iter().filter(|t| t.in_body && t.is_comparable())
    }

    /// Method names called from the body.
    pub fn callees(&self) -> BTreeSet<&str> {
        let body: Vec<&CodeToken> = self.tokens.iter().filter(|t| t.in_body).collect();
        body.windows(2)
            .filter(|w| w[0].kind == TokenKind::Ident && w[1].is_punct("("))
            .map(|w| w[0].raw.as_str())
            .collect()
    }
}

impl SourceIndex {
    pub fn locations(&self, method_name: &str) -> &[MethodLocation] {
        self.methods.get(method_name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn is_class(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    pub fn is_method(&self, name: &str) -> bool {
        self.methods.contains_key(name)
    }

    pub fn fields_of(&self, loc: &MethodLocation) -> Vec<&FieldDecl> {
        let file = &self.files[loc.file_idx];
        let mut out: Vec<&FieldDecl> = file.fields.get(&loc.class_name).into_iter().flatten().collect();
        // Outer and sibling classes of the same file come after the
        // enclosing class, so their fields never shadow its own.
        for (class, fields) in &file.fields {
            if class != &loc.class_name {
                out.extend(fields.iter());
            }
        }
        out
    }

    /// Count call sites `name(` across the tree, excluding declarations.
    pub fn call_sites(&self, name: &str) -> usize {
        let decls = self.locations(name).len();
        let calls: usize = self
            .files
            .iter()
            .map(|f| {
                f.tokens
                    .windows(2)
                    .filter(|w| w[0].kind == TokenKind::Ident && w[0].text == name && w[1].is("("))
                    .count()
            })
            .sum();
        calls.saturating_sub(decls)
    }

    pub fn stats(&self) -> CorpusStats {
        let mut overloads = BTreeMap::new();
        for (name, locs) in &self.methods {
            let classes: BTreeSet<_> = locs.iter().map(|l| (&l.file, &l.class_name)).collect();
            overloads.insert(name.clone(), (locs.len(), classes.len()));
        }
        let code_lines = self
            .files
            .iter()
            .map(|f| f.tokens.iter().map(|t| t.line).collect::<BTreeSet<_>>().len())
            .sum();
        CorpusStats {
            files: self.files.len(),
            classes: self.classes.len(),
            total_lines: self.files.iter().map(|f| f.lines.len()).sum(),
            code_lines,
            methods: self.methods.values().map(Vec::len).sum(),
            overloads,
        }
    }
}

/// Scan every source file under `root` and index its classes and methods.
pub fn build_index(root: &Path, options: &IndexOptions) -> Result<SourceIndex, SourceError> {
    let mut paths: Vec<PathBuf> = WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .filter(|e| e.path().extension().is_some_and(|x| x == options.ext.as_str()))
        .map(|e| e.into_path())
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(SourceError::NoSourceFiles { dir: root.to_path_buf(), ext: options.ext.clone() });
    }

    let scanned: Vec<Result<(SourceFile, FileScan, Option<Diagnostic>), SourceError>> = paths
        .par_iter()
        .map(|path| {
            let bytes = fs::read(path).map_err(|source| SourceError::Io { path: path.clone(), source })?;
            let (text, lossy) = match String::from_utf8(bytes) {
                Ok(s) => (s, None),
                Err(e) => (
                    String::from_utf8_lossy(e.as_bytes()).into_owned(),
                    Some(Diagnostic::new(path.display().to_string(), "invalid UTF-8 replaced")),
                ),
            };
            let tokens = lexer::tokenize(&text);
            let scan = scan_file(&tokens).map_err(|line| SourceError::UnbalancedBraces { path: path.clone(), line })?;
            let lines = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l).to_string()).collect();
            let fields = scan.classes.iter().map(|c| (c.name.clone(), c.fields.clone())).collect();
            Ok((SourceFile { path: path.clone(), lines, tokens, fields }, scan, lossy))
        })
        .collect();

    let mut index = SourceIndex {
        root: root.to_path_buf(),
        options: options.clone(),
        classes: BTreeMap::new(),
        methods: BTreeMap::new(),
        name_table: BTreeSet::new(),
        diagnostics: Vec::new(),
        files: Vec::new(),
    };
    for result in scanned {
        let (file, scan, lossy) = match result {
            Ok(ok) => ok,
            Err(e @ SourceError::UnbalancedBraces { .. }) | Err(e @ SourceError::Io { .. }) => {
                index.diagnostics.push(Diagnostic::new("index", format!("skipped: {e}")));
                continue;
            }
            Err(e) => return Err(e),
        };
        index.diagnostics.extend(lossy);
        let file_idx = index.files.len();
        for class in &scan.classes {
            index.classes.entry(class.name.clone()).or_insert_with(|| file.path.clone());
        }
        for m in scan.methods {
            let first = &file.tokens[m.first_token];
            let close = &file.tokens[m.close_brace];
            index.methods.entry(m.name.clone()).or_default().push(MethodLocation {
                class_name: m.class,
                method_name: m.name,
                signature: m.signature,
                file: file.path.clone(),
                start_line: first.line + 1,
                end_line: close.line + 1,
                file_idx,
                first_token: m.first_token,
                open_brace: m.open_brace,
                close_brace: m.close_brace,
            });
        }
        index.files.push(file);
    }
    index.name_table = index.classes.keys().chain(index.methods.keys()).cloned().collect();
    Ok(index)
}

/// First declaration of `method_name` in `class_name`, in file order.
pub fn locate_method(index: &SourceIndex, class_name: &str, method_name: &str) -> Result<MethodCode, SourceError> {
    locate_methods(index, class_name, method_name)?
        .into_iter()
        .next()
        .ok_or_else(|| SourceError::MethodNotFound { class: class_name.into(), method: method_name.into() })
}

/// Every overload of `method_name` declared in `class_name`.
pub fn locate_methods(index: &SourceIndex, class_name: &str, method_name: &str) -> Result<Vec<MethodCode>, SourceError> {
    let found: Vec<MethodCode> = index
        .locations(method_name)
        .iter()
        .filter(|l| l.class_name == class_name)
        .map(|l| extract(index, l))
        .collect();
    if found.is_empty() {
        return Err(SourceError::MethodNotFound { class: class_name.into(), method: method_name.into() });
    }
    Ok(found)
}

/// Every method in the tree named `method_name`, across classes and
/// signatures.
pub fn overloaded_set(index: &SourceIndex, method_name: &str) -> Result<Vec<MethodCode>, SourceError> {
    let locs = index.locations(method_name);
    if locs.is_empty() {
        return Err(SourceError::MethodNotFound { class: "*".into(), method: method_name.into() });
    }
    Ok(locs.iter().map(|l| extract(index, l)).collect())
}

/// Cut the declaration at `loc` out of its file.
pub fn extract(index: &SourceIndex, loc: &MethodLocation) -> MethodCode {
    let file = &index.files[loc.file_idx];
    let region = &file.tokens[loc.first_token..=loc.close_brace];

    let mut by_line: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, t) in region.iter().enumerate() {
        by_line.entry(t.line).or_default().push(i);
    }

    let mut lines = Vec::new();
    let mut tokens = Vec::new();
    for (line, idxs) in by_line {
        let toks: Vec<&Token> = idxs.iter().map(|&i| &region[i]).collect();
        if !index.options.count_annotations && is_annotation_line(&toks) {
            continue;
        }
        let statement = lines.len();
        lines.push(SourceLine { number: line + 1, text: file.lines[line].clone() });
        for i in idxs {
            let abs = loc.first_token + i;
            let t = &region[i];
            // Tokens from a multi-line literal belong to the line they start on.
            tokens.push(CodeToken {
                text: t.text.clone(),
                raw: t.text.clone(),
                kind: t.kind,
                statement,
                col: t.col,
                in_body: abs > loc.open_brace && abs < loc.close_brace,
            });
        }
    }
    let statements = lines.iter().map(|l| l.text.trim().to_string()).collect();
    MethodCode {
        class_name: loc.class_name.clone(),
        method_name: loc.method_name.clone(),
        signature: loc.signature.clone(),
        file: loc.file.clone(),
        start_line: loc.start_line,
        end_line: loc.end_line,
        loc: lines.len(),
        lines,
        statements,
        tokens,
        bindings: BTreeMap::new(),
    }
}

fn is_annotation_line(toks: &[&Token]) -> bool {
    if toks.first().is_none_or(|t| t.kind != TokenKind::Annotation) {
        return false;
    }
    // `@Foo`, `@Foo(...)`, possibly several on one line.
    let mut i = 0;
    while i < toks.len() {
        if toks[i].kind != TokenKind::Annotation {
            return false;
        }
        i += 1;
        if i < toks.len() && toks[i].is("(") {
            let mut depth = 0;
            while i < toks.len() {
                if toks[i].is("(") {
                    depth += 1;
                } else if toks[i].is(")") {
                    depth -= 1;
                    if depth == 0 {
                        i += 1;
                        break;
                    }
                }
                i += 1;
            }
            if depth != 0 {
                return false;
            }
        }
    }
    true
}

/// Replace variable identifiers by their declared type names.
///
/// Parameters and locals of any type, and fields of class type, are
/// replaced. A variable typed as the enclosing class becomes [`SELF_TYPE`].
/// Method names and keywords are never touched; undeclared identifiers are
/// left as they are.
pub fn normalize_variables(m: &MethodCode, index: &SourceIndex) -> MethodCode {
    let fields = index
        .locations(&m.method_name)
        .iter()
        .find(|l| l.class_name == m.class_name && l.file == m.file && l.start_line == m.start_line)
        .map(|l| index.fields_of(l))
        .unwrap_or_default();
    normalize_with_fields(m, &fields)
}

pub(crate) fn normalize_with_fields(m: &MethodCode, fields: &[&FieldDecl]) -> MethodCode {
    let raw_view: Vec<(TokenKind, &str)> = m.tokens.iter().map(|t| (t.kind, t.raw.as_str())).collect();
    let cur_view: Vec<(TokenKind, &str)> = m.tokens.iter().map(|t| (t.kind, t.text.as_str())).collect();
    let body_start = m.tokens.iter().position(|t| t.in_body).unwrap_or(m.tokens.len());
    let raw_bindings = bindings_for(&raw_view, body_start, &m.method_name, &m.class_name, fields);
    let cur_bindings = bindings_for(&cur_view, body_start, &m.method_name, &m.class_name, fields);

    let mut out = m.clone();
    for i in 0..out.tokens.len() {
        if out.tokens[i].kind != TokenKind::Ident {
            continue;
        }
        if out.tokens.get(i + 1).is_some_and(|n| n.is_punct("(")) {
            continue;
        }
        if let Some(ty) = cur_bindings.get(&out.tokens[i].text) {
            out.tokens[i].text = ty.clone();
        }
    }
    out.statements = render_statements(&out);
    if out.bindings.is_empty() {
        out.bindings = raw_bindings;
    }
    out
}

fn render_statements(m: &MethodCode) -> Vec<String> {
    m.lines
        .iter()
        .enumerate()
        .map(|(si, line)| {
            let mut text = String::with_capacity(line.text.len());
            let mut at = 0;
            for t in m.tokens.iter().filter(|t| t.statement == si && t.kind == TokenKind::Ident) {
                if t.col < at || t.col + t.raw.len() > line.text.len() {
                    continue;
                }
                text.push_str(&line.text[at..t.col]);
                text.push_str(&t.text);
                at = t.col + t.raw.len();
            }
            text.push_str(&line.text[at..]);
            text.trim().to_string()
        })
        .collect()
}

/// Variable -> type map for one method: fields first, then parameters and
/// locals, which shadow fields.
fn bindings_for(
    toks: &[(TokenKind, &str)],
    body_start: usize,
    method_name: &str,
    class_name: &str,
    fields: &[&FieldDecl],
) -> BTreeMap<String, String> {
    let self_type = |ty: &str| if ty == class_name { SELF_TYPE.to_string() } else { ty.to_string() };
    let mut map = BTreeMap::new();
    for f in fields.iter().rev() {
        if !f.primitive {
            map.insert(f.name.clone(), self_type(&f.type_name));
        }
    }
    let mut local = BTreeMap::new();
    // Parameters: the paren group after the method name.
    if let Some(open) = (1..body_start).find(|&i| toks[i - 1] == (TokenKind::Ident, method_name) && is_p(toks[i], "(")) {
        if let Some(close) = matching(toks, open, "(", ")") {
            for (name, ty) in declarations(&toks[open..=close]) {
                local.entry(name).or_insert_with(|| self_type(&ty));
            }
        }
    }
    for (name, ty) in declarations(&toks[body_start.min(toks.len())..]) {
        local.entry(name).or_insert_with(|| self_type(&ty));
    }
    map.extend(local);
    map
}

fn is_p(t: (TokenKind, &str), p: &str) -> bool {
    t.1 == p && matches!(t.0, TokenKind::Separator | TokenKind::Operator)
}

fn matching(toks: &[(TokenKind, &str)], open: usize, o: &str, c: &str) -> Option<usize> {
    let mut depth = 0usize;
    for (i, &t) in toks.iter().enumerate().skip(open) {
        if is_p(t, o) {
            depth += 1;
        } else if is_p(t, c) {
            depth = depth.checked_sub(1)?;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Parse a type starting at `i`: `prim`, or `a.b.C<...>[]...`. Returns the
/// simple type name (generics and array brackets stripped) and the index
/// just past the type.
fn parse_type(toks: &[(TokenKind, &str)], i: usize) -> Option<(String, usize)> {
    let (kind, text) = *toks.get(i)?;
    let mut j = i + 1;
    let mut name = text.to_string();
    match kind {
        TokenKind::Keyword if lexer::is_primitive(text) => {}
        TokenKind::Ident => {
            while j + 1 < toks.len() && is_p(toks[j], ".") && toks[j + 1].0 == TokenKind::Ident {
                name = toks[j + 1].1.to_string();
                j += 2;
            }
            if j < toks.len() && is_p(toks[j], "<") {
                j = skip_generics(toks, j)?;
            }
        }
        _ => return None,
    }
    while j + 1 < toks.len() && is_p(toks[j], "[") && is_p(toks[j + 1], "]") {
        j += 2;
    }
    if j + 2 < toks.len() && is_p(toks[j], "...") {
        j += 1;
    }
    Some((name, j))
}

fn skip_generics(toks: &[(TokenKind, &str)], open: usize) -> Option<usize> {
    let mut depth: i32 = 0;
    for (j, &(kind, text)) in toks.iter().enumerate().skip(open) {
        match (kind, text) {
            (TokenKind::Operator, "<") => depth += 1,
            (TokenKind::Operator, ">") => depth -= 1,
            (TokenKind::Operator, ">>") => depth -= 2,
            (TokenKind::Operator, ">>>") => depth -= 3,
            (TokenKind::Operator, "?" | "&") => {}
            (TokenKind::Separator, "," | "." | "[" | "]") => {}
            (TokenKind::Ident, _) => {}
            (TokenKind::Keyword, t) if t == "extends" || t == "super" || lexer::is_primitive(t) => {}
            (TokenKind::Annotation, _) => {}
            _ => return None,
        }
        if depth <= 0 {
            return if depth == 0 { Some(j + 1) } else { None };
        }
    }
    None
}

/// Lexical `Type name` declarations inside a token slice.
fn declarations(toks: &[(TokenKind, &str)]) -> Vec<(String, String)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        let prev_ok = i == 0 || {
            let (k, t) = toks[i - 1];
            !(is_p(toks[i - 1], ".") || (k == TokenKind::Keyword && t == "new") || k == TokenKind::Ident || is_p(toks[i - 1], "::"))
        };
        if prev_ok {
            if let Some((ty, j)) = parse_type(toks, i) {
                if j + 1 < toks.len() && toks[j].0 == TokenKind::Ident {
                    let next = toks[j + 1];
                    if [";", "=", ",", ":", ")"].iter().any(|p| is_p(next, p)) || is_p(next, "[") {
                        out.push((toks[j].1.to_string(), ty));
                        i = j + 1;
                        continue;
                    }
                }
            }
        }
        i += 1;
    }
    out
}

/// Normalize a free-standing code fragment with a method's bindings and
/// return its comparable token texts.
pub fn normalize_fragment(text: &str, bindings: &BTreeMap<String, String>) -> Vec<String> {
    let toks = lexer::tokenize(text);
    let mut out = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if !t.is_comparable() {
            continue;
        }
        let call = toks.get(i + 1).is_some_and(|n| n.is("("));
        match bindings.get(&t.text) {
            Some(ty) if t.kind == TokenKind::Ident && !call => out.push(ty.clone()),
            _ => out.push(t.text.clone()),
        }
    }
    out
}

/// Drop methods that are called by another method in the list; only the
/// callers are analysed. Call chains are followed transitively, and inside
/// a call cycle the method listed first survives.
pub fn merge_callees(methods: Vec<MethodCode>) -> Vec<MethodCode> {
    let n = methods.len();
    let callees: Vec<BTreeSet<&str>> = methods.iter().map(MethodCode::callees).collect();
    let mut reach = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            reach[a][b] = a != b
                && methods[a].method_name != methods[b].method_name
                && callees[a].contains(methods[b].method_name.as_str());
        }
    }
    for k in 0..n {
        for a in 0..n {
            if reach[a][k] {
                for b in 0..n {
                    if reach[k][b] {
                        reach[a][b] = true;
                    }
                }
            }
        }
    }
    let dropped: Vec<bool> = (0..n)
        .map(|x| (0..n).any(|y| y != x && reach[y][x] && !(reach[x][y] && x < y)))
        .collect();
    methods.into_iter().zip(dropped).filter(|(_, d)| !d).map(|(m, _)| m).collect()
}

// ---------------------------------------------------------------------------
// File scanning

#[derive(Debug, Default)]
struct ClassScan {
    name: String,
    fields: Vec<FieldDecl>,
}

#[derive(Debug)]
struct MethodScan {
    class: String,
    name: String,
    signature: String,
    first_token: usize,
    open_brace: usize,
    close_brace: usize,
}

#[derive(Debug, Default)]
struct FileScan {
    classes: Vec<ClassScan>,
    methods: Vec<MethodScan>,
}

/// Match every `{` with its `}`; on failure return the zero-based line.
fn match_braces(tokens: &[Token]) -> Result<HashMap<usize, usize>, usize> {
    let mut stack = Vec::new();
    let mut pairs = HashMap::new();
    for (i, t) in tokens.iter().enumerate() {
        if t.is("{") {
            stack.push(i);
        } else if t.is("}") {
            let open = stack.pop().ok_or(t.line)?;
            pairs.insert(open, i);
        }
    }
    match stack.pop() {
        Some(open) => Err(tokens[open].line),
        None => Ok(pairs),
    }
}

fn scan_file(tokens: &[Token]) -> Result<FileScan, usize> {
    let braces = match_braces(tokens).map_err(|l| l + 1)?;
    let view: Vec<(TokenKind, &str)> = tokens.iter().map(|t| (t.kind, t.text.as_str())).collect();
    let mut scan = FileScan::default();
    // Stack of (class index, close-brace index).
    let mut stack: Vec<(usize, usize)> = Vec::new();
    let mut pending: Option<String> = None;
    let mut member_start = 0;
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        let after_dot = i > 0 && tokens[i - 1].is(".");
        let is_decl_kw = (t.is_keyword("class") || t.is_keyword("interface") || t.is_keyword("enum"))
            || (t.kind == TokenKind::Ident && t.text == "record" && tokens.get(i + 2).is_some_and(|n| n.is("(") || n.is("<")));
        if is_decl_kw && !after_dot && tokens.get(i + 1).is_some_and(|n| n.kind == TokenKind::Ident) {
            pending = Some(tokens[i + 1].text.clone());
            i += 2;
            continue;
        }
        let at_class_level = stack.last().is_some_and(|&(_, close)| i < close);

        if t.is("{") {
            let close = braces[&i];
            if let Some(name) = pending.take() {
                scan.classes.push(ClassScan { name, fields: Vec::new() });
                stack.push((scan.classes.len() - 1, close));
                member_start = i + 1;
                i += 1;
            } else {
                // Initializer block, enum constant body, array or anonymous
                // class inside a field initializer.
                i = close + 1;
            }
            continue;
        }
        if t.is("}") {
            if stack.last().is_some_and(|&(_, close)| close == i) {
                stack.pop();
            }
            member_start = i + 1;
            i += 1;
            continue;
        }
        if !at_class_level {
            if t.is(";") {
                member_start = i + 1;
            }
            i += 1;
            continue;
        }
        let class_idx = stack.last().unwrap().0;
        if t.is(";") {
            let fields = parse_fields(&view[member_start..i]);
            scan.classes[class_idx].fields.extend(fields);
            member_start = i + 1;
            i += 1;
            continue;
        }
        if t.is("(") && pending.is_none() {
            let class_name = scan.classes[class_idx].name.clone();
            if let Some((close_paren, body)) = method_header(tokens, &view, i, &class_name) {
                match body {
                    Some(open) => {
                        let close = braces[&open];
                        let first = skip_leading_annotations(&view, member_start, i - 1);
                        scan.methods.push(MethodScan {
                            class: class_name,
                            name: tokens[i - 1].text.clone(),
                            signature: signature_text(&tokens[first..open]),
                            first_token: member_start,
                            open_brace: open,
                            close_brace: close,
                        });
                        i = close + 1;
                    }
                    None => i = close_paren + 1,
                }
                member_start = i;
                continue;
            }
            // Not a method: skip the paren group (enum constant arguments,
            // annotation arguments, constructor parameters).
            if let Some(close) = matching(&view, i, "(", ")") {
                let ctor_body = tokens.get(close + 1).filter(|n| n.is("{")).map(|_| close + 1);
                let ctor_throws = (close + 1..tokens.len()).find(|&k| tokens[k].is("{") || tokens[k].is(";"));
                if tokens[i - 1].text == class_name && tokens[i - 1].kind == TokenKind::Ident {
                    let open = ctor_body.or(ctor_throws.filter(|&k| tokens[k].is("{")));
                    if let Some(open) = open {
                        i = braces[&open] + 1;
                        member_start = i;
                        continue;
                    }
                }
                i = close + 1;
                continue;
            }
        }
        i += 1;
    }
    Ok(scan)
}

fn skip_leading_annotations(view: &[(TokenKind, &str)], mut i: usize, limit: usize) -> usize {
    while i < limit && view[i].0 == TokenKind::Annotation {
        i += 1;
        if i < limit && is_p(view[i], "(") {
            match matching(view, i, "(", ")") {
                Some(c) => i = c + 1,
                None => break,
            }
        }
    }
    i
}

/// If the `(` at `open` starts a method header, return its closing paren
/// and the body's opening brace (None for abstract/interface methods).
fn method_header(tokens: &[Token], view: &[(TokenKind, &str)], open: usize, class_name: &str) -> Option<(usize, Option<usize>)> {
    if open < 2 {
        return None;
    }
    let name = &tokens[open - 1];
    if name.kind != TokenKind::Ident || name.text == class_name {
        return None;
    }
    let prev = &tokens[open - 2];
    let type_like = match prev.kind {
        TokenKind::Ident => true,
        TokenKind::Keyword => lexer::is_primitive(&prev.text) || prev.text == "void",
        TokenKind::Operator => prev.text == ">" || prev.text == ">>" || prev.text == ">>>",
        TokenKind::Separator => prev.text == "]",
        _ => false,
    };
    if !type_like {
        return None;
    }
    let close = matching(view, open, "(", ")")?;
    let mut k = close + 1;
    while k < tokens.len() {
        let t = &tokens[k];
        if t.is("{") {
            return Some((close, Some(k)));
        }
        if t.is(";") {
            return Some((close, None));
        }
        if t.is_keyword("throws") || t.is_keyword("default") || t.kind == TokenKind::Ident || t.is(",") || t.is(".")
            || t.is("[") || t.is("]") || t.kind == TokenKind::Literal || t.kind == TokenKind::Annotation
        {
            k += 1;
            continue;
        }
        return None;
    }
    None
}

fn signature_text(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let glue_left = matches!(t.text.as_str(), "(" | ")" | "," | "." | "[" | "]" | ">") && t.kind != TokenKind::Literal;
        let glue_right = i > 0 && matches!(tokens[i - 1].text.as_str(), "(" | "." | "[" | "<");
        if i > 0 && !glue_left && !glue_right && !(t.text == "<" && tokens[i - 1].kind == TokenKind::Ident) {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

const MODIFIERS: &[&str] = &["public", "private", "protected", "static", "final", "transient", "volatile", "abstract", "synchronized"];

fn parse_fields(toks: &[(TokenKind, &str)]) -> Vec<FieldDecl> {
    let mut i = 0;
    loop {
        match toks.get(i) {
            Some((TokenKind::Annotation, _)) => {
                i += 1;
                if toks.get(i).is_some_and(|&t| is_p(t, "(")) {
                    match matching(toks, i, "(", ")") {
                        Some(c) => i = c + 1,
                        None => return Vec::new(),
                    }
                }
            }
            Some((TokenKind::Keyword, m)) if MODIFIERS.contains(m) => i += 1,
            _ => break,
        }
    }
    let Some((ty, mut j)) = parse_type(toks, i) else { return Vec::new() };
    let primitive = lexer::is_primitive(&ty);
    let mut out = Vec::new();
    while let Some(&(TokenKind::Ident, name)) = toks.get(j) {
        j += 1;
        while j + 1 < toks.len() && is_p(toks[j], "[") && is_p(toks[j + 1], "]") {
            j += 2;
        }
        match toks.get(j) {
            None => {
                out.push(FieldDecl { name: name.into(), type_name: ty.clone(), primitive });
                break;
            }
            Some(&t) if is_p(t, ",") => {
                out.push(FieldDecl { name: name.into(), type_name: ty.clone(), primitive });
                j += 1;
            }
            Some(&t) if is_p(t, "=") => {
                out.push(FieldDecl { name: name.into(), type_name: ty.clone(), primitive });
                let mut depth = 0i32;
                j += 1;
                while let Some(&t) = toks.get(j) {
                    if is_p(t, "(") || is_p(t, "[") || is_p(t, "{") {
                        depth += 1;
                    } else if is_p(t, ")") || is_p(t, "]") || is_p(t, "}") {
                        depth -= 1;
                    } else if depth == 0 && is_p(t, ",") {
                        break;
                    }
                    j += 1;
                }
                if j >= toks.len() {
                    break;
                }
                j += 1;
            }
            _ => break,
        }
    }
    out
}
