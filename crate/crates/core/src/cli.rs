//! Command-line driver.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};

use crate::bug_ingest;
use crate::detector::{self, DetectorConfig, Verdict};
use crate::features;
use crate::lexicon::Lexicon;
use crate::report::{self, BugReport, CandidateReport, FeatureSummary, RunReport, SweepPoint, Totals};
use crate::source::{self, IndexOptions, SourceIndex};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FATAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Find methods likely to repeat a reported bug in their same-named
/// siblings.
#[derive(Debug, Parser)]
#[command(name = "rebug", version, about)]
pub struct Args {
    /// Directory of bug report XML files.
    #[arg(long, value_name = "DIR", required_unless_present = "corpus_stats")]
    pub bugs: Option<PathBuf>,
    /// Root of the source tree.
    #[arg(long, value_name = "DIR")]
    pub src: PathBuf,
    /// Flag candidates with similarity strictly above this.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Shortest common substring counted, in tokens.
    #[arg(long, default_value_t = 3)]
    pub min_cs_len: usize,
    /// Skip bugs naming more methods than this.
    #[arg(long, default_value_t = 8)]
    pub max_methods: usize,
    /// Weight of keywords that are also identifiers in the bug method.
    #[arg(long, default_value_t = 3)]
    pub boost: usize,
    /// Only consider candidates under a directory named after the bug's
    /// component.
    #[arg(long)]
    pub same_component: bool,
    /// Source file extension.
    #[arg(long, default_value = "java")]
    pub ext: String,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Also count flagged candidates for each theta in LO:HI:STEP.
    #[arg(long, value_name = "LO:HI:STEP")]
    pub theta_sweep: Option<String>,
    /// Count annotation-only lines as code lines.
    #[arg(long)]
    pub count_annotations: bool,
    /// Zero all timing fields.
    #[arg(long)]
    pub deterministic: bool,
    /// Print source tree statistics.
    #[arg(long)]
    pub corpus_stats: bool,
}

/// Parse `LO:HI:STEP` into the inclusive list of thetas.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, step] = parts.as_slice() else {
        return Err(format!("expected LO:HI:STEP, got {spec:?}"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
    let (lo, hi, step) = (num(lo)?, num(hi)?, num(step)?);
    if step.is_nan() || step <= 0.0 || lo.is_nan() || lo <= 0.0 || hi.is_nan() || hi > 1.0 || lo > hi {
        return Err(format!("bad sweep range {spec:?}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9).collect())
}

/// Run the tool; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let cfg = DetectorConfig {
        theta: args.theta,
        min_cs_len: args.min_cs_len,
        max_methods: args.max_methods,
        boost: args.boost,
        same_component: args.same_component,
    };
    if let Err(e) = cfg.validate() {
        let _ = writeln!(err, "error: {e}");
        return EXIT_CONFIG;
    }
    let sweep = match args.theta_sweep.as_deref().map(parse_sweep).transpose() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: --theta-sweep: {e}");
            return EXIT_CONFIG;
        }
    };
    let lexicon = match Lexicon::from_env() {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "error: lexicon: {e}");
            return EXIT_CONFIG;
        }
    };

    let started = Instant::now();
    let opts = IndexOptions { ext: args.ext.clone(), count_annotations: args.count_annotations };
    let index = match source::build_index(&args.src, &opts) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FATAL;
        }
    };
    for d in &index.diagnostics {
        let _ = writeln!(err, "warning: {d}");
    }
    let stats = args.corpus_stats.then(|| index.stats());

    let Some(bugs_dir) = &args.bugs else {
        let stats = stats.expect("--bugs is only optional with --corpus-stats");
        let body = match args.format {
            Format::Text => report::render_stats(&stats),
            Format::Json => serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n",
        };
        return emit(&body, args.out.as_deref(), out, err);
    };

    let ingested = match bug_ingest::ingest_directory(bugs_dir) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_FATAL;
        }
    };
    for d in &ingested.diagnostics {
        let _ = writeln!(err, "warning: {d}");
    }

    let mut report = RunReport {
        schema_version: report::SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        per_bug: Vec::new(),
        totals: Totals::default(),
        elapsed_ms: 0,
        theta_sweep: None,
        corpus_stats: stats,
    };

    let fcfg = cfg.features();
    let mut feats = Vec::new();
    for rec in &ingested.records {
        let t0 = Instant::now();
        match features::extract_features(rec, &index, &lexicon, &fcfg) {
            Ok(f) => feats.push((f, t0.elapsed())),
            Err(e) => {
                let _ = writeln!(err, "warning: skipped {e}");
                report.per_bug.push(BugReport {
                    bug_key: rec.key.clone(),
                    bug_methods: Vec::new(),
                    features: None,
                    call_sites: Default::default(),
                    candidates: Vec::new(),
                    diagnostics: vec![format!("skipped: {e}")],
                    elapsed_ms: 0,
                });
            }
        }
    }

    for (f, extract_time) in &feats {
        let t0 = Instant::now();
        let det = detector::detect(std::slice::from_ref(f), &index, &cfg);
        let mut diagnostics = Vec::new();
        for d in &det.diagnostics {
            let _ = writeln!(err, "warning: {d}");
            diagnostics.push(d.message.clone());
        }
        let mut bug_methods = det.bug_methods.get(&f.bug_key).cloned().unwrap_or_default();
        for m in &mut bug_methods {
            m.file = relative(&index, &m.file);
        }
        let candidates = det
            .candidates
            .into_iter()
            .map(|mut c| {
                c.bug_method.file = relative(&index, &c.bug_method.file);
                c.candidate_method.file = relative(&index, &c.candidate_method.file);
                CandidateReport::from(c)
            })
            .collect();
        let elapsed = (t0.elapsed() + *extract_time).as_millis() as u64;
        report.per_bug.push(BugReport {
            bug_key: f.bug_key.clone(),
            bug_methods,
            features: Some(FeatureSummary::from(f)),
            call_sites: f.methods.iter().map(|m| (m.clone(), index.call_sites(m))).collect(),
            candidates,
            diagnostics,
            elapsed_ms: if args.deterministic { 0 } else { elapsed },
        });
    }
    report.per_bug.sort_by(|a, b| a.bug_key.cmp(&b.bug_key));
    report.totals = report.recount();
    report.theta_sweep = sweep.map(|thetas| {
        let sims: Vec<f64> = report.per_bug.iter().flat_map(|b| &b.candidates).map(|c| c.candidate.breakdown.sim).collect();
        thetas
            .into_iter()
            .map(|theta| SweepPoint { theta, flagged: sims.iter().filter(|&&s| Verdict::at(s, theta) == Verdict::Flagged).count() })
            .collect()
    });
    report.elapsed_ms = if args.deterministic { 0 } else { started.elapsed().as_millis() as u64 };

    let body = match args.format {
        Format::Text => report::render_text(&report),
        Format::Json => report.to_json(),
    };
    emit(&body, args.out.as_deref(), out, err)
}

fn relative(index: &SourceIndex, p: &Path) -> PathBuf {
    p.strip_prefix(&index.root).map(Path::to_path_buf).unwrap_or_else(|_| p.to_path_buf())
}

fn emit(body: &str, path: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let res = match path {
        Some(p) => fs::write(p, body).map_err(|e| format!("{}: {e}", p.display())),
        None => out.write_all(body.as_bytes()).map_err(|e| e.to_string()),
    };
    match res {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_FATAL
        }
    }
}
