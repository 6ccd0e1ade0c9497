#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use rebug::bug_ingest;
use rebug::features::{self, BugFeatures};
use rebug::lexicon::Lexicon;
use rebug::source::{self, IndexOptions, MethodCode, SourceIndex};

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn fixture_index() -> SourceIndex {
    source::build_index(&fixtures().join("src"), &IndexOptions::default()).unwrap()
}

pub fn fixture_features(index: &SourceIndex) -> BugFeatures {
    let rec = bug_ingest::parse_bug_xml(&fixtures().join("bugs/LUCENE-1587.xml")).unwrap();
    features::extract_features(&rec, index, &Lexicon::builtin(), &Default::default()).unwrap()
}

pub fn normalized(index: &SourceIndex, class: &str, method: &str) -> MethodCode {
    source::normalize_variables(&source::locate_method(index, class, method).unwrap(), index)
}

pub fn write_tree(root: &Path, files: &[(String, String)]) {
    for (name, body) in files {
        let p = root.join(name);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, body).unwrap();
    }
}

pub fn class_file(class: &str, fields: &str, method: &str) -> String {
    format!("package synth;\n\npublic class {class} {{\n{fields}\n{method}\n}}\n")
}

/// Two 10-line methods: 4 identical statements (one mentions `alpha`), one
/// further `alpha` statement on each side, nothing else in common.
pub fn ratio_pair() -> Vec<(String, String)> {
    let body = |tag: &str, extra: &str| {
        format!(
            "    public void run(Item item, int n) {{\n\
             \x20       item.prepare(n, 1);\n\
             \x20       item.alpha(n);\n\
             \x20       item.alpha({extra});\n\
             \x20       item.commit(n, 2);\n\
             \x20       item.close(n, 3);\n\
             \x20       item.only{tag}One();\n\
             \x20       item.only{tag}Two();\n\
             \x20       item.only{tag}Three();\n\
             \x20   }}"
        )
    };
    vec![
        ("synth/Left.java".into(), class_file("Left", "", &body("Left", "7, 8, 9"))),
        ("synth/Right.java".into(), class_file("Right", "", &body("Right", "4, 5, 6"))),
    ]
}

/// Two methods that differ only in parameter and local variable names.
pub fn renamed_pair() -> Vec<(String, String)> {
    let body = |list: &str, base: &str, sum: &str, each: &str| {
        format!(
            "    public int total(List {list}, int {base}) {{\n\
             \x20       int {sum} = {base} + 1;\n\
             \x20       for (Object {each} : {list}) {{\n\
             \x20           {sum} = {sum} + {each}.hashCode();\n\
             \x20       }}\n\
             \x20       return {sum} * 2;\n\
             \x20   }}"
        )
    };
    vec![
        ("synth/First.java".into(), class_file("First", "", &body("items", "base", "sum", "each"))),
        ("synth/Second.java".into(), class_file("Second", "", &body("xs", "start", "acc", "o"))),
    ]
}

const POOL: &[&str] = &[
    "if (item == null) return 0;",
    "buffer.append(item.name());",
    "count = count + item.size();",
    "buffer.flush(limit, count);",
    "item.touch(count, limit);",
    "limit = limit * 2 + count;",
    "buffer.mark(item, limit);",
    "if (count > limit && buffer.isEmpty()) return -1;",
];

/// Twenty `process` methods. `Worker0` is the bug method; `Worker{k}`
/// shares the first `k % 9` pool statements with it and pads the rest with
/// statements of its own. Only `Worker8` and `Worker17` reach the statement
/// quoted in the report.
pub fn worker_corpus() -> (Vec<(String, String)>, String) {
    let mut files = Vec::new();
    for k in 0..20 {
        let shared = if k == 0 { POOL.len() } else { k % 9 };
        let mut lines: Vec<String> = POOL[..shared].iter().map(|s| s.to_string()).collect();
        for j in shared..POOL.len() {
            lines.push(format!("item.step{k}x{j}();"));
        }
        let body = lines.iter().map(|l| format!("        {l}\n")).collect::<String>();
        let method = format!("    public int process(Item item, int count) {{\n{body}        return count;\n    }}");
        let fields = "    private Buffer buffer;\n    private int limit;\n";
        let class = format!("Worker{k}");
        files.push((format!("synth/{class}.java"), class_file(&class, fields, &method)));
    }
    let bug = "<rss><channel><item><key>SYN-1</key>\
        <summary>Worker0 process returns the wrong value</summary>\
        <description>The limit check in process is wrong when the buffer is empty:<br/>\
        (count &gt; limit &amp;&amp; buffer.isEmpty())<br/>should not return early</description>\
        <component>synth</component></item></channel></rss>"
        .to_string();
    (files, bug)
}

/// Comparable tokens per statement, as strings.
pub fn statement_tokens(m: &MethodCode) -> BTreeMap<usize, Vec<String>> {
    let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for t in m.norm_tokens() {
        out.entry(t.statement).or_default().push(t.text.clone());
    }
    out
}

/// Independent greedy tiling over statement token lists: the longest run
/// shared by two unmatched statements wins (earliest position sum, then
/// lexicographic token text), and both statements are then used up.
/// Returns (Σ freq, statements fully covered on each side).
pub fn brute_css(a: &MethodCode, b: &MethodCode, min_len: usize) -> (usize, BTreeSet<usize>, BTreeSet<usize>) {
    let sa = statement_tokens(a);
    let sb = statement_tokens(b);
    // Flat positions for the tie-break.
    let offsets = |s: &BTreeMap<usize, Vec<String>>| {
        let mut acc = 0;
        s.iter().map(|(k, v)| {
            let o = acc;
            acc += v.len();
            (*k, o)
        }).collect::<BTreeMap<usize, usize>>()
    };
    let (oa, ob) = (offsets(&sa), offsets(&sb));
    let mut used_a = BTreeSet::new();
    let mut used_b = BTreeSet::new();
    let (mut total, mut full_a, mut full_b) = (0, BTreeSet::new(), BTreeSet::new());
    loop {
        let mut best: Option<(usize, usize, Vec<String>, usize, usize)> = None; // (len, possum, run, sa, sb)
        for (&i, ta) in sa.iter().filter(|(i, _)| !used_a.contains(*i)) {
            for (&j, tb) in sb.iter().filter(|(j, _)| !used_b.contains(*j)) {
                for p in 0..ta.len() {
                    for q in 0..tb.len() {
                        let l = ta[p..].iter().zip(&tb[q..]).take_while(|(x, y)| x == y).count();
                        if l == 0 {
                            continue;
                        }
                        let key = (l, oa[&i] + p + ob[&j] + q, ta[p..p + l].to_vec(), i, j);
                        let better = match &best {
                            None => true,
                            Some(b) => key.0 > b.0 || (key.0 == b.0 && (key.1, &key.2) < (b.1, &b.2)),
                        };
                        if better {
                            best = Some(key);
                        }
                    }
                }
            }
        }
        let Some((l, _, run, _, _)) = best else { break };
        if l < min_len {
            break;
        }
        // Pair this run leftmost-first until it is exhausted.
        loop {
            let find = |s: &BTreeMap<usize, Vec<String>>, used: &BTreeSet<usize>| {
                s.iter().filter(|(k, _)| !used.contains(*k)).find(|(_, v)| v.windows(l).any(|w| w == run.as_slice())).map(|(k, v)| (*k, v.len()))
            };
            let (Some((i, la)), Some((j, lb))) = (find(&sa, &used_a), find(&sb, &used_b)) else { break };
            used_a.insert(i);
            used_b.insert(j);
            if la == l {
                full_a.insert(i);
            }
            if lb == l {
                full_b.insert(j);
            }
            total += 1;
        }
    }
    (total, full_a, full_b)
}

/// Statement pairs sharing a term among the raw identifiers.
pub fn keyword_edges(a: &MethodCode, b: &MethodCode, terms: &BTreeSet<String>) -> Vec<(usize, usize)> {
    let words = |m: &MethodCode| {
        let mut out: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
        for t in m.tokens.iter().filter(|t| t.in_body && t.kind == rebug::lexer::TokenKind::Ident) {
            let e = out.entry(t.statement).or_default();
            e.insert(t.raw.to_lowercase());
            e.insert(t.text.to_lowercase());
        }
        out
    };
    let (wa, wb) = (words(a), words(b));
    let mut edges = Vec::new();
    for (i, x) in &wa {
        for (j, y) in &wb {
            if x.iter().any(|w| terms.contains(w) && y.contains(w)) {
                edges.push((*i, *j));
            }
        }
    }
    edges
}

/// Largest set of edges with no shared endpoint, by exhaustive search.
pub fn brute_max_matching(edges: &[(usize, usize)]) -> usize {
    fn go(edges: &[(usize, usize)], used_l: &mut Vec<usize>, used_r: &mut Vec<usize>) -> usize {
        let Some((&(i, j), rest)) = edges.split_first() else { return 0 };
        let skip = go(rest, used_l, used_r);
        if used_l.contains(&i) || used_r.contains(&j) {
            return skip;
        }
        used_l.push(i);
        used_r.push(j);
        let take = 1 + go(rest, used_l, used_r);
        used_l.pop();
        used_r.pop();
        skip.max(take)
    }
    go(edges, &mut Vec::new(), &mut Vec::new())
}
