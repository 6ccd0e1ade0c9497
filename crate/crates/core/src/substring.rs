//! Common substrings of two token sequences.
//!
//! Matching is greedy string tiling on top of a generalized suffix array:
//! repeatedly find the longest substring shared by the still-unmatched
//! parts of both sequences, pair its occurrences leftmost-first, and mark
//! the statements holding each paired occurrence as consumed. Matches never
//! cross a statement boundary.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::suffix::{self, SuffixError};

/// Interns token texts to dense ids shared by every sequence of one
/// comparison run. Build it before going parallel.
#[derive(Debug, Default, Clone)]
pub struct SymbolTable {
    ids: HashMap<String, u32>,
    names: Vec<String>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, text: &str) -> u32 {
        if let Some(&id) = self.ids.get(text) {
            return id;
        }
        let id = self.names.len() as u32;
        self.ids.insert(text.to_string(), id);
        self.names.push(text.to_string());
        id
    }

    pub fn get(&self, text: &str) -> Option<u32> {
        self.ids.get(text).copied()
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq {
    pub tokens: Vec<u32>,
    pub origin: String,
    /// Statement index of each token; non-decreasing.
    pub boundaries: Vec<usize>,
}

impl TokenSeq {
    /// A sequence that is one single statement.
    pub fn flat(origin: impl Into<String>, tokens: Vec<u32>) -> Self {
        let boundaries = vec![0; tokens.len()];
        TokenSeq { tokens, origin: origin.into(), boundaries }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsEntry {
    pub tokens: Vec<u32>,
    pub freq: usize,
    /// Paired start positions (in a, in b).
    pub pairs: Vec<(usize, usize)>,
}

impl CsEntry {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn render(&self, table: &SymbolTable) -> String {
        self.tokens.iter().map(|&t| table.name(t)).collect::<Vec<_>>().join(" ")
    }

    pub fn contains(&self, needle: &[u32]) -> bool {
        !needle.is_empty() && self.tokens.windows(needle.len()).any(|w| w == needle)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommonSubstringSet {
    /// In the order they were matched (longest first).
    pub entries: Vec<CsEntry>,
    pub total: usize,
}

impl CommonSubstringSet {
    /// Token positions of `a` (side 0) or `b` (side 1) inside some paired
    /// occurrence.
    pub fn covered(&self, side: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for e in &self.entries {
            for p in &e.pairs {
                let start = if side == 0 { p.0 } else { p.1 };
                out.extend(start..start + e.len());
            }
        }
        out.sort_unstable();
        out
    }
}

/// Greedy common-substring tiling of `a` against `b`.
pub fn common_substrings(a: &TokenSeq, b: &TokenSeq, min_cs_len: usize) -> Result<CommonSubstringSet, SuffixError> {
    if a.is_empty() || b.is_empty() {
        return Err(SuffixError::EmptyInput);
    }
    let min_len = min_cs_len.max(1);
    let mut consumed = [vec![false; a.len()], vec![false; b.len()]];
    let seqs = [a, b];
    let mut set = CommonSubstringSet::default();

    while let Some((len, cand)) = longest_candidates(seqs, &consumed) {
        if len < min_len {
            break;
        }
        // Tie-break: earliest occurrences (position sum), then token ids.
        let best = cand
            .into_iter()
            .min_by(|x, y| (x.0[0] + x.1[0], &x.2).cmp(&(y.0[0] + y.1[0], &y.2)))
            .unwrap();
        let (occ_a, occ_b, tokens) = best;
        let pairs = pair_leftmost(seqs, &mut consumed, &occ_a, &occ_b, len);
        debug_assert!(!pairs.is_empty());
        set.total += pairs.len();
        set.entries.push(CsEntry { tokens, freq: pairs.len(), pairs });
    }
    Ok(set)
}

type Candidate = (Vec<usize>, Vec<usize>, Vec<u32>);

/// Build the generalized suffix array over the unconsumed parts and return
/// the longest shared length with all substrings of that length (sorted
/// occurrence lists in a and b, and the tokens).
fn longest_candidates(seqs: [&TokenSeq; 2], consumed: &[Vec<bool>; 2]) -> Option<(usize, Vec<Candidate>)> {
    let alphabet = seqs.iter().flat_map(|s| s.tokens.iter()).max().map_or(0, |&m| m as u64 + 1);
    let mut fresh = alphabet;
    let mut text: Vec<u64> = Vec::with_capacity(seqs[0].len() + seqs[1].len() + 1);
    // (side, position) for each text index; None for separators.
    let mut origin: Vec<Option<(usize, usize)>> = Vec::with_capacity(text.capacity());
    for side in 0..2 {
        if side == 1 {
            text.push(fresh);
            fresh += 1;
            origin.push(None);
        }
        let s = seqs[side];
        for i in 0..s.len() {
            if i > 0 && s.boundaries[i] != s.boundaries[i - 1] {
                text.push(fresh);
                fresh += 1;
                origin.push(None);
            }
            if consumed[side][i] {
                text.push(fresh);
                fresh += 1;
            } else {
                text.push(s.tokens[i] as u64);
            }
            origin.push(Some((side, i)));
        }
    }
    // Every unique filler is distinct from every real token, so no shared
    // prefix can run through one.
    let sa = suffix::build_suffix_array(&text).ok()?;
    let lcp = suffix::build_lcp(&text, &sa);
    let side_of = |k: usize| origin[sa[k]].map(|(s, _)| s);

    let mut best = 0;
    for k in 1..sa.len() {
        if lcp[k] > best && side_of(k).is_some() && side_of(k - 1).is_some() && side_of(k) != side_of(k - 1) {
            best = lcp[k];
        }
    }
    if best == 0 {
        return None;
    }
    let mut out = Vec::new();
    for iv in suffix::lcp_intervals(&lcp) {
        if iv.lcp != best {
            continue;
        }
        let mut occ = [Vec::new(), Vec::new()];
        for k in iv.lb..=iv.rb {
            if let Some((side, pos)) = origin[sa[k]] {
                occ[side].push(pos);
            }
        }
        if occ[0].is_empty() || occ[1].is_empty() {
            continue;
        }
        occ[0].sort_unstable();
        occ[1].sort_unstable();
        let p = occ[0][0];
        let tokens = seqs[0].tokens[p..p + best].to_vec();
        let [oa, ob] = occ;
        out.push((oa, ob, tokens));
    }
    Some((best, out))
}

fn pair_leftmost(
    seqs: [&TokenSeq; 2],
    consumed: &mut [Vec<bool>; 2],
    occ_a: &[usize],
    occ_b: &[usize],
    len: usize,
) -> Vec<(usize, usize)> {
    let free = |side: usize, p: usize, consumed: &[Vec<bool>; 2]| (p..p + len).all(|i| !consumed[side][i]);
    let consume = |side: usize, p: usize, consumed: &mut [Vec<bool>; 2]| {
        let s = seqs[side];
        let stmt = s.boundaries[p];
        for i in 0..s.len() {
            if s.boundaries[i] == stmt {
                consumed[side][i] = true;
            }
        }
    };
    let mut pairs = Vec::new();
    let (mut i, mut j) = (0, 0);
    loop {
        while i < occ_a.len() && !free(0, occ_a[i], consumed) {
            i += 1;
        }
        while j < occ_b.len() && !free(1, occ_b[j], consumed) {
            j += 1;
        }
        if i == occ_a.len() || j == occ_b.len() {
            break;
        }
        pairs.push((occ_a[i], occ_b[j]));
        consume(0, occ_a[i], consumed);
        consume(1, occ_b[j], consumed);
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Same greedy tiling, with naive search for the longest shared run.
    pub(crate) fn oracle(a: &TokenSeq, b: &TokenSeq, min_len: usize) -> (usize, Vec<(Vec<u32>, usize)>) {
        let seqs = [a, b];
        let mut consumed = [vec![false; a.len()], vec![false; b.len()]];
        let mut total = 0;
        let mut entries = Vec::new();
        loop {
            let run_ok = |side: usize, p: usize, l: usize, c: &[Vec<bool>; 2]| {
                let s = seqs[side];
                p + l <= s.len() && (p..p + l).all(|i| !c[side][i] && s.boundaries[i] == s.boundaries[p])
            };
            let mut found: Option<(usize, usize, usize)> = None;
            'len: for l in (1..=a.len().min(b.len())).rev() {
                let mut best: Option<(usize, Vec<u32>, usize, usize)> = None;
                for p in 0..a.len() {
                    if !run_ok(0, p, l, &consumed) {
                        continue;
                    }
                    for q in 0..b.len() {
                        if run_ok(1, q, l, &consumed) && a.tokens[p..p + l] == b.tokens[q..q + l] {
                            let key = (p + q, a.tokens[p..p + l].to_vec(), p, q);
                            if best.as_ref().is_none_or(|bk| (key.0, &key.1) < (bk.0, &bk.1)) {
                                best = Some(key);
                            }
                        }
                    }
                }
                if let Some((_, _, p, q)) = best {
                    found = Some((l, p, q));
                    break 'len;
                }
            }
            let Some((l, p, _)) = found else { break };
            if l < min_len.max(1) {
                break;
            }
            let needle = a.tokens[p..p + l].to_vec();
            let mut freq = 0;
            loop {
                let pa = (0..a.len()).find(|&x| run_ok(0, x, l, &consumed) && a.tokens[x..x + l] == needle[..]);
                let pb = (0..b.len()).find(|&x| run_ok(1, x, l, &consumed) && b.tokens[x..x + l] == needle[..]);
                let (Some(pa), Some(pb)) = (pa, pb) else { break };
                for (side, pos) in [(0, pa), (1, pb)] {
                    let st = seqs[side].boundaries[pos];
                    for i in 0..seqs[side].len() {
                        if seqs[side].boundaries[i] == st {
                            consumed[side][i] = true;
                        }
                    }
                }
                freq += 1;
            }
            total += freq;
            entries.push((needle, freq));
        }
        (total, entries)
    }

    fn seq(origin: &str, stmts: &[&[u32]]) -> TokenSeq {
        let mut tokens = Vec::new();
        let mut boundaries = Vec::new();
        for (i, s) in stmts.iter().enumerate() {
            tokens.extend_from_slice(s);
            boundaries.extend(std::iter::repeat_n(i, s.len()));
        }
        TokenSeq { tokens, origin: origin.into(), boundaries }
    }

    #[test]
    fn identical_flat_sequences_give_one_entry() {
        let a = TokenSeq::flat("a", vec![1, 2, 3, 4, 5]);
        let cs = common_substrings(&a, &a.clone(), 3).unwrap();
        assert_eq!(cs.entries.len(), 1);
        assert_eq!(cs.entries[0].tokens, a.tokens);
        assert_eq!(cs.total, 1);
    }

    #[test]
    fn disjoint_alphabets() {
        let a = TokenSeq::flat("a", vec![1, 2, 3]);
        let b = TokenSeq::flat("b", vec![4, 5, 6]);
        assert_eq!(common_substrings(&a, &b, 1).unwrap().total, 0);
        assert_eq!(common_substrings(&a, &TokenSeq::flat("e", vec![]), 1), Err(SuffixError::EmptyInput));
    }

    #[test]
    fn statement_consumption_blocks_inner_repeats() {
        // [1 2 3 9 8 7] vs [1 2 3 5 8 7]: the longer run takes the statement.
        let a = seq("a", &[&[1, 2, 3, 9, 8, 7], &[8, 7, 6]]);
        let b = seq("b", &[&[1, 2, 3, 5], &[8, 7, 6], &[8, 7, 6]]);
        let cs = common_substrings(&a, &b, 2).unwrap();
        let got: Vec<(Vec<u32>, usize)> = cs.entries.iter().map(|e| (e.tokens.clone(), e.freq)).collect();
        assert_eq!(got, [(vec![1, 2, 3], 1), (vec![8, 7, 6], 1)]);
        assert_eq!(cs.total, 2);
    }

    #[test]
    fn repeated_statements_pair_up_to_the_smaller_count() {
        let a = seq("a", &[&[4, 5, 6], &[4, 5, 6], &[4, 5, 6]]);
        let b = seq("b", &[&[4, 5, 6], &[4, 5, 6]]);
        let cs = common_substrings(&a, &b, 3).unwrap();
        assert_eq!(cs.total, 2);
        assert_eq!(cs.entries[0].pairs, [(0, 0), (3, 3)]);
    }

    fn arb_seq(alpha: u32) -> impl Strategy<Value = TokenSeq> {
        prop::collection::vec((0..alpha, prop::bool::weighted(0.2)), 1..40).prop_map(|v| {
            let mut stmt = 0;
            let mut tokens = Vec::new();
            let mut boundaries = Vec::new();
            for (t, brk) in v {
                if brk {
                    stmt += 1;
                }
                tokens.push(t);
                boundaries.push(stmt);
            }
            TokenSeq { tokens, origin: String::new(), boundaries }
        })
    }

    proptest! {
        #[test]
        fn agrees_with_oracle(a in arb_seq(4), b in arb_seq(4), min in 1usize..4) {
            let cs = common_substrings(&a, &b, min).unwrap();
            let (total, entries) = oracle(&a, &b, min);
            prop_assert_eq!(cs.total, total);
            let got: Vec<(Vec<u32>, usize)> = cs.entries.iter().map(|e| (e.tokens.clone(), e.freq)).collect();
            prop_assert_eq!(got, entries);
        }

        #[test]
        fn total_is_symmetric(a in arb_seq(3), b in arb_seq(3), min in 1usize..4) {
            prop_assert_eq!(common_substrings(&a, &b, min).unwrap().total, common_substrings(&b, &a, min).unwrap().total);
        }

        #[test]
        fn raising_min_never_increases_total(a in arb_seq(3), b in arb_seq(3), min in 1usize..5) {
            let lo = common_substrings(&a, &b, min).unwrap().total;
            let hi = common_substrings(&a, &b, min + 1).unwrap().total;
            prop_assert!(hi <= lo);
        }

        #[test]
        fn entries_occur_where_paired(a in arb_seq(3), b in arb_seq(3)) {
            let cs = common_substrings(&a, &b, 2).unwrap();
            let mut seen_a = std::collections::HashSet::new();
            let mut seen_b = std::collections::HashSet::new();
            for e in &cs.entries {
                prop_assert!(e.len() >= 2);
                prop_assert_eq!(e.freq, e.pairs.len());
                for &(p, q) in &e.pairs {
                    prop_assert_eq!(&a.tokens[p..p + e.len()], &e.tokens[..]);
                    prop_assert_eq!(&b.tokens[q..q + e.len()], &e.tokens[..]);
                    prop_assert_eq!(a.boundaries[p], a.boundaries[p + e.len() - 1]);
                    prop_assert_eq!(b.boundaries[q], b.boundaries[q + e.len() - 1]);
                    // Each statement hosts at most one paired occurrence.
                    prop_assert!(seen_a.insert(a.boundaries[p]));
                    prop_assert!(seen_b.insert(b.boundaries[q]));
                }
            }
        }

        #[test]
        fn first_entry_is_not_extendable(a in arb_seq(3), b in arb_seq(3)) {
            let cs = common_substrings(&a, &b, 1).unwrap();
            if let Some(e) = cs.entries.first() {
                let (p, q) = e.pairs[0];
                let l = e.len();
                let same_stmt_a = |i: usize| i < a.len() && a.boundaries[i] == a.boundaries[p];
                let same_stmt_b = |i: usize| i < b.len() && b.boundaries[i] == b.boundaries[q];
                let right = same_stmt_a(p + l) && same_stmt_b(q + l) && a.tokens[p + l] == b.tokens[q + l];
                let left = p > 0 && q > 0 && same_stmt_a(p - 1) && same_stmt_b(q - 1) && a.tokens[p - 1] == b.tokens[q - 1];
                prop_assert!(!right && !left);
            }
        }
    }
}
