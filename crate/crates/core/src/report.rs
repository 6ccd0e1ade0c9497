//! Run reports: JSON model and text rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::detector::{Branch, Candidate, DetectorConfig, MethodId, Reason, Side, Verdict};
use crate::features::BugFeatures;
use crate::source::CorpusStats;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: DetectorConfig,
    pub per_bug: Vec<BugReport>,
    pub totals: Totals,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_sweep: Option<Vec<SweepPoint>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus_stats: Option<CorpusStats>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Totals {
    pub flagged: usize,
    pub below: usize,
    pub skipped_bugs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub theta: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub classes: Vec<String>,
    pub methods: Vec<String>,
    pub component: String,
    pub program_attrs: Vec<String>,
    pub natural_attrs: BTreeMap<String, usize>,
}

impl From<&BugFeatures> for FeatureSummary {
    fn from(f: &BugFeatures) -> Self {
        FeatureSummary {
            classes: f.classes.clone(),
            methods: f.methods.clone(),
            component: f.component.clone(),
            program_attrs: f.program_attrs.clone(),
            natural_attrs: f.natural_attrs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BugReport {
    pub bug_key: String,
    pub bug_methods: Vec<MethodId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub features: Option<FeatureSummary>,
    /// Call sites per bug method name across the tree.
    pub call_sites: BTreeMap<String, usize>,
    pub candidates: Vec<CandidateReport>,
    /// Why the bug was skipped, or other per-bug outcomes.
    pub diagnostics: Vec<String>,
    pub elapsed_ms: u64,
}

/// Statement indices (into the candidate's retained lines) and file lines
/// to mark when showing a candidate.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Highlight {
    pub program: Vec<usize>,
    pub common: Vec<usize>,
    pub keyword: Vec<usize>,
    pub lines: Vec<usize>,
}

impl Highlight {
    pub fn of(c: &Candidate) -> Self {
        let mut h = Highlight::default();
        for m in c.breakdown.matched_statements.iter().filter(|m| m.side == Side::Candidate) {
            let list = match m.reason {
                Reason::ProgramAttr => &mut h.program,
                Reason::CommonSubstring => &mut h.common,
                Reason::Keyword => &mut h.keyword,
            };
            list.push(m.statement);
            h.lines.push(m.line);
        }
        for l in [&mut h.program, &mut h.common, &mut h.keyword, &mut h.lines] {
            l.sort_unstable();
            l.dedup();
        }
        h
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    #[serde(flatten)]
    pub candidate: Candidate,
    pub highlight: Highlight,
}

impl From<Candidate> for CandidateReport {
    fn from(candidate: Candidate) -> Self {
        let highlight = Highlight::of(&candidate);
        CandidateReport { candidate, highlight }
    }
}

impl RunReport {
    /// Totals recomputed from `per_bug`.
    pub fn recount(&self) -> Totals {
        let mut t = Totals::default();
        for b in &self.per_bug {
            if b.bug_methods.is_empty() {
                t.skipped_bugs += 1;
            }
            for c in &b.candidates {
                match c.candidate.verdict {
                    Verdict::Flagged => t.flagged += 1,
                    Verdict::Below => t.below += 1,
                }
            }
        }
        t
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::ProgramHit => "ProgramHit",
        Branch::FullCoverage => "FullCoverage",
        Branch::Ratio => "Ratio",
    }
}

pub fn render_text(report: &RunReport) -> String {
    let mut s = String::new();
    let cfg = &report.config;
    let _ = writeln!(
        s,
        "rebug {}  theta={} min-cs-len={} boost={}",
        report.tool_version, cfg.theta, cfg.min_cs_len, cfg.boost
    );
    if let Some(stats) = &report.corpus_stats {
        s.push_str(&render_stats(stats));
    }
    for b in &report.per_bug {
        let _ = writeln!(s);
        let methods: Vec<String> = b.bug_methods.iter().map(MethodId::display).collect();
        let _ = writeln!(s, "{}  bug methods: {}", b.bug_key, if methods.is_empty() { "-".into() } else { methods.join(", ") });
        for d in &b.diagnostics {
            let _ = writeln!(s, "  note: {d}");
        }
        for cr in &b.candidates {
            let c = &cr.candidate;
            let br = &c.breakdown;
            let mark = if c.verdict == Verdict::Flagged { "FLAGGED" } else { "below  " };
            let _ = writeln!(
                s,
                "  {mark}  {:<40} sim={:.3}  {:<12} css={} sn={} overlap={} loc={}/{}  {}:{}",
                c.candidate_method.display(),
                br.sim,
                branch_name(br.branch),
                br.num_css,
                br.num_sn,
                br.num_overlap,
                br.loc1,
                br.loc2,
                c.candidate_method.file.display(),
                c.candidate_method.start_line
            );
        }
        for cr in b.candidates.iter().filter(|c| c.candidate.verdict == Verdict::Flagged) {
            let _ = writeln!(s);
            s.push_str(&render_highlight(&cr.candidate));
        }
    }
    if let Some(sweep) = &report.theta_sweep {
        let _ = writeln!(s);
        let _ = writeln!(s, "theta sweep:");
        for p in sweep {
            let _ = writeln!(s, "  {:.2}  {}", p.theta, p.flagged);
        }
    }
    let t = &report.totals;
    let _ = writeln!(s);
    let _ = writeln!(s, "totals: {} flagged, {} below, {} skipped", t.flagged, t.below, t.skipped_bugs);
    s
}

/// The candidate method with matched lines marked: `>` program fragment,
/// `*` common substring, `~` shared keyword.
pub fn render_highlight(c: &Candidate) -> String {
    let h = Highlight::of(c);
    let br = &c.breakdown;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} ({}:{})  sim={:.3} {}",
        c.candidate_method.display(),
        c.candidate_method.file.display(),
        c.candidate_method.start_line,
        br.sim,
        branch_name(br.branch)
    );
    if let Some(hit) = &br.program_hit {
        let _ = writeln!(s, "  P@  {}", hit.fragment);
        let _ = writeln!(s, "  CS  {}", hit.entry);
    }
    let width = c.lines.last().map_or(1, |l| l.number.to_string().len());
    for (i, line) in c.lines.iter().enumerate() {
        let mark = if h.program.contains(&i) {
            '>'
        } else if h.common.contains(&i) {
            '*'
        } else if h.keyword.contains(&i) {
            '~'
        } else {
            ' '
        };
        let _ = writeln!(s, "  {mark} {:>width$}  {}", line.number, line.text.trim_end());
    }
    s
}

pub fn render_stats(stats: &CorpusStats) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "corpus: {} files, {} classes, {} lines ({} code), {} methods",
        stats.files, stats.classes, stats.total_lines, stats.code_lines, stats.methods
    );
    let mut names: Vec<(&String, &(usize, usize))> = stats.overloads.iter().filter(|(_, v)| v.0 > 1).collect();
    names.sort_by(|a, b| b.1 .1.cmp(&a.1 .1).then(b.1 .0.cmp(&a.1 .0)).then(a.0.cmp(b.0)));
    for (name, (decls, classes)) in names.into_iter().take(25) {
        let _ = writeln!(s, "  {name:<24} {decls:>5} declarations in {classes:>4} classes");
    }
    s
}
