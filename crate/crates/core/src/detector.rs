//! Similarity scoring of bug methods against their same-named siblings.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostics::Diagnostic;
use crate::features::{self, BugFeatures};
use crate::lexer::TokenKind;
use crate::source::{self, MethodCode, SourceIndex, SourceLine};
use crate::substring::{self, CommonSubstringSet, SymbolTable, TokenSeq};

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("theta must be in (0, 1], got {0}")]
    Theta(f64),
    #[error("min-cs-len must be at least 1")]
    MinCsLen,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub theta: f64,
    pub min_cs_len: usize,
    pub max_methods: usize,
    pub boost: usize,
    pub same_component: bool,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { theta: 0.5, min_cs_len: 3, max_methods: 8, boost: 3, same_component: false }
    }
}

impl DetectorConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(ConfigError::Theta(self.theta));
        }
        if self.min_cs_len == 0 {
            return Err(ConfigError::MinCsLen);
        }
        Ok(())
    }

    pub fn features(&self) -> features::FeatureConfig {
        features::FeatureConfig { min_cs_len: self.min_cs_len, max_methods: self.max_methods, boost: self.boost }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// A program fragment from the report is among the common substrings.
    ProgramHit,
    /// The common substrings cover both bodies completely.
    FullCoverage,
    Ratio,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Bug,
    Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reason {
    ProgramAttr,
    CommonSubstring,
    Keyword,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MatchedStatement {
    pub side: Side,
    /// Index into the method's retained lines.
    pub statement: usize,
    /// One-based file line.
    pub line: usize,
    pub reason: Reason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsView {
    pub text: String,
    pub freq: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramHitInfo {
    pub fragment: String,
    pub entry: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityBreakdown {
    pub sim: f64,
    pub branch: Branch,
    pub num_css: usize,
    pub num_sn: usize,
    pub num_overlap: usize,
    pub loc1: usize,
    pub loc2: usize,
    /// Set when the ratio exceeded 1 and was clamped.
    pub unclamped: Option<f64>,
    pub common_substrings: Vec<CsView>,
    /// (bug statement, candidate statement) pairs sharing a keyword.
    pub sn_pairs: Vec<(usize, usize)>,
    pub program_hit: Option<ProgramHitInfo>,
    pub matched_statements: Vec<MatchedStatement>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MethodId {
    pub class_name: String,
    pub method_name: String,
    pub signature: String,
    pub file: PathBuf,
    pub start_line: usize,
}

impl MethodId {
    pub fn of(m: &MethodCode) -> Self {
        MethodId {
            class_name: m.class_name.clone(),
            method_name: m.method_name.clone(),
            signature: m.signature.clone(),
            file: m.file.clone(),
            start_line: m.start_line,
        }
    }

    pub fn display(&self) -> String {
        format!("{}.{}", self.class_name, self.method_name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Flagged,
    Below,
}

impl Verdict {
    pub fn at(sim: f64, theta: f64) -> Self {
        if sim > theta {
            Verdict::Flagged
        } else {
            Verdict::Below
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub bug_key: String,
    pub bug_method: MethodId,
    pub candidate_method: MethodId,
    pub breakdown: SimilarityBreakdown,
    pub verdict: Verdict,
    /// Retained source lines of the candidate, for highlighting.
    #[serde(skip)]
    pub lines: Vec<SourceLine>,
}

/// A method ready for comparison: normalized code plus interned tokens.
struct Prepared {
    code: MethodCode,
    seq: TokenSeq,
    /// Lowercased raw identifiers per statement.
    idents: Vec<BTreeSet<String>>,
}

fn prepare(code: MethodCode, table: &mut SymbolTable) -> Prepared {
    let mut tokens = Vec::new();
    let mut boundaries = Vec::new();
    for t in code.tokens.iter().filter(|t| t.in_body && t.is_comparable()) {
        tokens.push(table.intern(&t.text));
        boundaries.push(t.statement);
    }
    let mut idents = vec![BTreeSet::new(); code.lines.len()];
    for t in code.tokens.iter().filter(|t| t.in_body && t.kind == TokenKind::Ident) {
        idents[t.statement].insert(t.raw.to_lowercase());
        idents[t.statement].insert(t.text.to_lowercase());
    }
    let seq = TokenSeq { tokens, origin: code.id(), boundaries };
    Prepared { code, seq, idents }
}

/// Score one pair. `c1` is the bug method; both should already be
/// normalized.
pub fn similarity(c1: &MethodCode, c2: &MethodCode, feats: &BugFeatures, cfg: &DetectorConfig) -> SimilarityBreakdown {
    let mut table = SymbolTable::new();
    let a = prepare(c1.clone(), &mut table);
    let b = prepare(c2.clone(), &mut table);
    let frags = fragment_ids(&feats.program_attrs, c1, &mut table);
    score(&a, &b, &frags, feats, cfg, &table)
}

/// Program fragments pushed through the same normalization as `bug`.
fn fragment_ids(attrs: &[String], bug: &MethodCode, table: &mut SymbolTable) -> Vec<(String, Vec<u32>)> {
    attrs
        .iter()
        .map(|p| {
            let ids = source::normalize_fragment(p, &bug.bindings).iter().map(|t| table.intern(t)).collect();
            (p.clone(), ids)
        })
        .collect()
}

fn score(
    a: &Prepared,
    b: &Prepared,
    frags: &[(String, Vec<u32>)],
    feats: &BugFeatures,
    cfg: &DetectorConfig,
    table: &SymbolTable,
) -> SimilarityBreakdown {
    let loc1 = a.code.loc;
    let loc2 = b.code.loc;
    let cs = if a.seq.is_empty() || b.seq.is_empty() {
        CommonSubstringSet::default()
    } else {
        substring::common_substrings(&a.seq, &b.seq, cfg.min_cs_len).expect("non-empty sequences")
    };

    let mut matched = BTreeSet::new();
    for e in &cs.entries {
        for &(p, q) in &e.pairs {
            matched.insert(stmt(a, Side::Bug, p, Reason::CommonSubstring));
            matched.insert(stmt(b, Side::Candidate, q, Reason::CommonSubstring));
        }
    }

    let program_hit = frags.iter().filter(|(_, ids)| ids.len() >= cfg.min_cs_len).find_map(|(text, ids)| {
        cs.entries.iter().find(|e| e.contains(ids)).map(|e| (text.clone(), e))
    });

    let full_a = fully_covered(a, &cs, 0);
    let full_b = fully_covered(b, &cs, 1);
    let (num_sn, num_overlap, sn_pairs) = keyword_pairs(a, b, &feats.natural_attrs, &full_a, &full_b);
    for &(i, j) in &sn_pairs {
        matched.insert(MatchedStatement { side: Side::Bug, statement: i, line: a.code.lines[i].number, reason: Reason::Keyword });
        matched.insert(MatchedStatement { side: Side::Candidate, statement: j, line: b.code.lines[j].number, reason: Reason::Keyword });
    }

    let common_substrings = cs.entries.iter().map(|e| CsView { text: e.render(table), freq: e.freq }).collect();
    let mut out = SimilarityBreakdown {
        sim: 0.0,
        branch: Branch::Ratio,
        num_css: cs.total,
        num_sn,
        num_overlap,
        loc1,
        loc2,
        unclamped: None,
        common_substrings,
        sn_pairs,
        program_hit: None,
        matched_statements: Vec::new(),
    };

    let whole = !a.seq.is_empty()
        && !b.seq.is_empty()
        && cs.covered(0).len() == a.seq.len()
        && cs.covered(1).len() == b.seq.len();
    if let Some((fragment, entry)) = program_hit {
        out.branch = Branch::ProgramHit;
        out.sim = 1.0;
        for &(p, q) in &entry.pairs {
            matched.insert(stmt(a, Side::Bug, p, Reason::ProgramAttr));
            matched.insert(stmt(b, Side::Candidate, q, Reason::ProgramAttr));
        }
        out.program_hit = Some(ProgramHitInfo { fragment, entry: entry.render(table) });
    } else if whole {
        out.branch = Branch::FullCoverage;
        out.sim = 1.0;
    } else if loc1 + loc2 > 0 {
        let raw = 2.0 * (cs.total + num_sn - num_overlap) as f64 / (loc1 + loc2) as f64;
        if raw > 1.0 {
            out.unclamped = Some(raw);
        }
        out.sim = raw.clamp(0.0, 1.0);
    }
    out.matched_statements = matched.into_iter().collect();
    out
}

fn stmt(p: &Prepared, side: Side, pos: usize, reason: Reason) -> MatchedStatement {
    let s = p.seq.boundaries[pos];
    MatchedStatement { side, statement: s, line: p.code.lines[s].number, reason }
}

/// Statements whose comparable tokens all sit inside one paired
/// occurrence.
fn fully_covered(p: &Prepared, cs: &CommonSubstringSet, side: usize) -> BTreeSet<usize> {
    let mut per_stmt: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in &p.seq.boundaries {
        *per_stmt.entry(s).or_insert(0) += 1;
    }
    let mut out = BTreeSet::new();
    for e in &cs.entries {
        for pair in &e.pairs {
            let start = if side == 0 { pair.0 } else { pair.1 };
            let s = p.seq.boundaries[start];
            if per_stmt.get(&s) == Some(&e.len()) {
                out.insert(s);
            }
        }
    }
    out
}

/// Statement pairs sharing an N@ keyword, each statement used at most once.
/// Returns (pairs, pairs with both sides fully covered, matching). Both
/// counts are maximum matchings, so they do not depend on argument order.
pub(crate) fn keyword_pairs_raw(
    left: &[BTreeSet<String>],
    right: &[BTreeSet<String>],
    terms: &BTreeMap<String, usize>,
    covered_l: &BTreeSet<usize>,
    covered_r: &BTreeSet<usize>,
) -> (usize, usize, Vec<(usize, usize)>) {
    fn hit<'a>(s: &'a BTreeSet<String>, terms: &BTreeMap<String, usize>) -> BTreeSet<&'a str> {
        s.iter().filter(|w| terms.contains_key(*w)).map(String::as_str).collect()
    }
    let lk: Vec<BTreeSet<&str>> = left.iter().map(|s| hit(s, terms)).collect();
    let rk: Vec<BTreeSet<&str>> = right.iter().map(|s| hit(s, terms)).collect();
    let adj: Vec<Vec<usize>> = lk
        .iter()
        .map(|l| (0..rk.len()).filter(|&j| !l.is_empty() && !l.is_disjoint(&rk[j])).collect())
        .collect();

    let mut match_r: Vec<Option<usize>> = vec![None; right.len()];
    // Covered pairs first, then extend to a maximum matching over all
    // pairs; augmenting never unmatches a vertex.
    let covered_adj: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(i, js)| js.iter().copied().filter(|j| covered_l.contains(&i) && covered_r.contains(j)).collect())
        .collect();
    let mut overlap = 0;
    for i in 0..left.len() {
        let mut seen = vec![false; right.len()];
        if augment(i, &covered_adj, &mut match_r, &mut seen) {
            overlap += 1;
        }
    }
    let mut matched_l: Vec<bool> = vec![false; left.len()];
    for i in match_r.iter().flatten() {
        matched_l[*i] = true;
    }
    let mut total = overlap;
    for i in 0..left.len() {
        if matched_l[i] {
            continue;
        }
        let mut seen = vec![false; right.len()];
        if augment(i, &adj, &mut match_r, &mut seen) {
            total += 1;
        }
    }
    let mut pairs: Vec<(usize, usize)> = match_r.iter().enumerate().filter_map(|(j, i)| i.map(|i| (i, j))).collect();
    pairs.sort_unstable();
    (total, overlap, pairs)
}

fn augment(i: usize, adj: &[Vec<usize>], match_r: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &j in &adj[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if match_r[j].is_none_or(|k| augment(k, adj, match_r, seen)) {
            match_r[j] = Some(i);
            return true;
        }
    }
    false
}

fn keyword_pairs(
    a: &Prepared,
    b: &Prepared,
    terms: &BTreeMap<String, usize>,
    full_a: &BTreeSet<usize>,
    full_b: &BTreeSet<usize>,
) -> (usize, usize, Vec<(usize, usize)>) {
    keyword_pairs_raw(&a.idents, &b.idents, terms, full_a, full_b)
}

/// Number of statement pairs sharing an N@ term (each statement used once).
pub fn sentence_keyword_matches(c1: &MethodCode, c2: &MethodCode, n_attrs: &BTreeMap<String, usize>) -> (usize, Vec<(usize, usize)>) {
    let mut table = SymbolTable::new();
    let a = prepare(c1.clone(), &mut table);
    let b = prepare(c2.clone(), &mut table);
    let (n, _, pairs) = keyword_pairs(&a, &b, n_attrs, &BTreeSet::new(), &BTreeSet::new());
    (n, pairs)
}

#[derive(Debug, Default)]
pub struct Detection {
    pub candidates: Vec<Candidate>,
    /// Bug key -> messages about that bug.
    pub diagnostics: Vec<Diagnostic>,
    /// Bug key -> bug method identities that were scored.
    pub bug_methods: BTreeMap<String, Vec<MethodId>>,
}

fn in_component(m: &MethodCode, component: &str) -> bool {
    let c = component.to_lowercase();
    m.file.components().any(|p| p.as_os_str().to_string_lossy().to_lowercase() == c)
}

/// Score every same-named sibling of every bug method.
pub fn detect(bugs: &[BugFeatures], index: &SourceIndex, cfg: &DetectorConfig) -> Detection {
    let mut out = Detection::default();
    let mut table = SymbolTable::new();
    let mut prepared: Vec<Prepared> = Vec::new();
    let mut ids: BTreeMap<(PathBuf, usize, String), usize> = BTreeMap::new();
    fn get(
        m: MethodCode,
        ids: &mut BTreeMap<(PathBuf, usize, String), usize>,
        table: &mut SymbolTable,
        prepared: &mut Vec<Prepared>,
    ) -> usize {
        let key = (m.file.clone(), m.start_line, m.method_name.clone());
        *ids.entry(key).or_insert_with(|| {
            prepared.push(prepare(m, table));
            prepared.len() - 1
        })
    }

    // (bug index, bug method ids, candidate id)
    let mut jobs: Vec<(usize, Vec<usize>, usize)> = Vec::new();
    let mut frags: Vec<BTreeMap<usize, Vec<(String, Vec<u32>)>>> = vec![BTreeMap::new(); bugs.len()];
    for (bi, feats) in bugs.iter().enumerate() {
        let bug_code = features::resolve_bug_methods(index, &feats.classes, &feats.methods);
        if bug_code.is_empty() {
            out.diagnostics.push(Diagnostic::new(&feats.bug_key, "no bug method could be located"));
            continue;
        }
        let mut by_name: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for m in bug_code {
            let id = get(m, &mut ids, &mut table, &mut prepared);
            by_name.entry(prepared[id].code.method_name.clone()).or_default().push(id);
        }
        for name in &feats.methods {
            let Some(bug_ids) = by_name.get(name) else { continue };
            for &id in bug_ids {
                out.bug_methods.entry(feats.bug_key.clone()).or_default().push(MethodId::of(&prepared[id].code));
                let f = fragment_ids(&feats.program_attrs, &prepared[id].code, &mut table);
                frags[bi].insert(id, f);
            }
            let siblings = source::overloaded_set(index, name).unwrap_or_default();
            for m in siblings {
                if cfg.same_component && !feats.component.is_empty() && !in_component(&m, &feats.component) {
                    continue;
                }
                let m = source::normalize_variables(&m, index);
                let cid = get(m, &mut ids, &mut table, &mut prepared);
                if bug_ids.contains(&cid) {
                    continue;
                }
                jobs.push((bi, bug_ids.clone(), cid));
            }
        }
    }

    let table = &table;
    let prepared = &prepared;
    let frags = &frags;
    let scored: Vec<(Candidate, Vec<Diagnostic>)> = jobs
        .par_iter()
        .map(|(bi, bug_ids, cid)| {
            let feats = &bugs[*bi];
            let cand = &prepared[*cid];
            // Several overloads of the bug method: keep the best score.
            let (best_id, br) = bug_ids
                .iter()
                .map(|&id| (id, score(&prepared[id], cand, &frags[*bi][&id], feats, cfg, table)))
                .fold(None::<(usize, SimilarityBreakdown)>, |acc, x| match acc {
                    Some(a) if a.1.sim >= x.1.sim => Some(a),
                    _ => Some(x),
                })
                .expect("at least one bug method");
            let mut diags = Vec::new();
            if let Some(raw) = br.unclamped {
                diags.push(Diagnostic::new(&feats.bug_key, format!("similarity {raw:.3} for {} clamped to 1", cand.code.id())));
            }
            let c = Candidate {
                bug_key: feats.bug_key.clone(),
                bug_method: MethodId::of(&prepared[best_id].code),
                candidate_method: MethodId::of(&cand.code),
                verdict: Verdict::at(br.sim, cfg.theta),
                breakdown: br,
                lines: cand.code.lines.clone(),
            };
            (c, diags)
        })
        .collect();

    for (c, d) in scored {
        out.candidates.push(c);
        out.diagnostics.extend(d);
    }
    // The same sibling can be reached from two bug method names; keep one.
    out.candidates.sort_by(|x, y| {
        x.bug_key
            .cmp(&y.bug_key)
            .then(y.breakdown.sim.total_cmp(&x.breakdown.sim))
            .then(x.candidate_method.cmp(&y.candidate_method))
            .then(x.bug_method.cmp(&y.bug_method))
    });
    out.candidates.dedup_by(|x, y| x.bug_key == y.bug_key && x.candidate_method == y.candidate_method);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(words: &[&str]) -> BTreeSet<String> {
        words.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn verdict_is_strict() {
        assert_eq!(Verdict::at(0.5, 0.5), Verdict::Below);
        assert_eq!(Verdict::at(0.51, 0.5), Verdict::Flagged);
        assert_eq!(Verdict::at(1.0, 1.0), Verdict::Below);
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::default().validate().is_ok());
        assert_eq!(DetectorConfig { theta: 0.0, ..Default::default() }.validate(), Err(ConfigError::Theta(0.0)));
        assert!(DetectorConfig { theta: 1.5, ..Default::default() }.validate().is_err());
        assert!(DetectorConfig { min_cs_len: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn keyword_pairing_uses_each_statement_once() {
        let terms: BTreeMap<String, usize> = [("collator".to_string(), 3)].into();
        let left = [set(&["collator", "x"]), set(&["collator"])];
        let right = [set(&["collator"])];
        let (n, _, pairs) = keyword_pairs_raw(&left, &right, &terms, &BTreeSet::new(), &BTreeSet::new());
        assert_eq!(n, 1);
        assert_eq!(pairs, [(0, 0)]);
        let (n, _, _) = keyword_pairs_raw(&left, &right, &BTreeMap::new(), &BTreeSet::new(), &BTreeSet::new());
        assert_eq!(n, 0);
    }

    #[test]
    fn keyword_pairing_prefers_covered_pairs_and_is_maximum() {
        let terms: BTreeMap<String, usize> = [("a".to_string(), 1), ("b".to_string(), 1)].into();
        // Greedy in line order would pair (0,0) and leave 1 unmatched.
        let left = [set(&["a", "b"]), set(&["a"])];
        let right = [set(&["a"]), set(&["b"])];
        let covered: BTreeSet<usize> = [1].into();
        let (n, overlap, pairs) = keyword_pairs_raw(&left, &right, &terms, &covered, &[0].into());
        assert_eq!((n, overlap), (2, 1));
        assert_eq!(pairs, [(0, 1), (1, 0)]);
        let (n2, o2, _) = keyword_pairs_raw(&right, &left, &terms, &[0].into(), &covered);
        assert_eq!((n2, o2), (n, overlap));
    }
}
