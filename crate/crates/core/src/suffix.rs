//! Suffix array, LCP array and lcp-interval enumeration over integer
//! alphabets.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SuffixError {
    #[error("empty input sequence")]
    EmptyInput,
}

/// Suffix array by prefix doubling, O(n log² n).
pub fn build_suffix_array<T: Ord>(s: &[T]) -> Result<Vec<usize>, SuffixError> {
    let n = s.len();
    if n == 0 {
        return Err(SuffixError::EmptyInput);
    }
    let mut sa: Vec<usize> = (0..n).collect();
    sa.sort_by(|&i, &j| s[i].cmp(&s[j]));
    let mut rank = vec![0usize; n];
    for w in 1..n {
        rank[sa[w]] = rank[sa[w - 1]] + usize::from(s[sa[w - 1]] != s[sa[w]]);
    }
    let mut k = 1;
    let mut tmp = vec![0usize; n];
    while k < n && rank[sa[n - 1]] < n - 1 {
        // Rank 0 is reserved for "past the end" so shorter suffixes sort first.
        let key = |i: usize| (rank[i] + 1, if i + k < n { rank[i + k] + 1 } else { 0 });
        sa.sort_by_key(|&i| key(i));
        tmp[sa[0]] = 0;
        for w in 1..n {
            tmp[sa[w]] = tmp[sa[w - 1]] + usize::from(key(sa[w - 1]) != key(sa[w]));
        }
        std::mem::swap(&mut rank, &mut tmp);
        k *= 2;
    }
    Ok(sa)
}

/// Kasai et al. LCP: `lcp[i]` is the common prefix length of suffixes
/// `sa[i-1]` and `sa[i]`; `lcp[0] = 0`.
pub fn build_lcp<T: Eq>(s: &[T], sa: &[usize]) -> Vec<usize> {
    let n = s.len();
    assert_eq!(sa.len(), n, "suffix array length mismatch");
    let mut rank = vec![0usize; n];
    for (i, &p) in sa.iter().enumerate() {
        rank[p] = i;
    }
    let mut lcp = vec![0usize; n];
    let mut h = 0usize;
    for i in 0..n {
        if rank[i] > 0 {
            let j = sa[rank[i] - 1];
            while i + h < n && j + h < n && s[i + h] == s[j + h] {
                h += 1;
            }
            lcp[rank[i]] = h;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}

/// An lcp-interval `[lb, rb]` of the suffix array: all suffixes in it share
/// a prefix of length `lcp`, and the interval cannot be widened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LcpInterval {
    pub lcp: usize,
    pub lb: usize,
    pub rb: usize,
}

/// Enumerate every lcp-interval with `lcp > 0` (bottom-up traversal of the
/// virtual suffix tree's internal nodes). Children are reported before
/// their parents.
pub fn lcp_intervals(lcp: &[usize]) -> Vec<LcpInterval> {
    let n = lcp.len();
    let mut out = Vec::new();
    // (lcp, lb)
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    for i in 1..=n {
        let cur = if i < n { lcp[i] } else { 0 };
        let mut lb = i - 1;
        while cur < stack.last().unwrap().0 {
            let (l, b) = stack.pop().unwrap();
            lb = b;
            out.push(LcpInterval { lcp: l, lb: b, rb: i - 1 });
        }
        if cur > stack.last().unwrap().0 {
            stack.push((cur, lb));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_sa(s: &[u8]) -> Vec<usize> {
        let mut sa: Vec<usize> = (0..s.len()).collect();
        sa.sort_by(|&i, &j| s[i..].cmp(&s[j..]));
        sa
    }

    fn brute_lcp(s: &[u8], sa: &[usize]) -> Vec<usize> {
        let mut out = vec![0; sa.len()];
        for i in 1..sa.len() {
            out[i] = s[sa[i - 1]..].iter().zip(&s[sa[i]..]).take_while(|(x, y)| x == y).count();
        }
        out
    }

    #[test]
    fn banana() {
        let s = b"banana";
        let sa = build_suffix_array(s).unwrap();
        assert_eq!(sa, [5, 3, 1, 0, 4, 2]);
        assert_eq!(build_lcp(s, &sa), [0, 1, 3, 0, 0, 2]);
    }

    #[test]
    fn small_cases() {
        assert_eq!(build_suffix_array(&[7u32]).unwrap(), [0]);
        let sa = build_suffix_array(b"aaaa").unwrap();
        assert_eq!(sa, [3, 2, 1, 0]);
        assert_eq!(build_lcp(b"aaaa", &sa), [0, 1, 2, 3]);
        let sa = build_suffix_array(b"abc").unwrap();
        assert_eq!(build_lcp(b"abc", &sa), [0, 0, 0]);
        assert_eq!(build_suffix_array::<u32>(&[]), Err(SuffixError::EmptyInput));
    }

    #[test]
    fn intervals_of_banana() {
        let s = b"banana";
        let sa = build_suffix_array(s).unwrap();
        let mut iv = lcp_intervals(&build_lcp(s, &sa));
        iv.sort_by_key(|i| (i.lb, i.rb));
        assert_eq!(
            iv,
            [
                LcpInterval { lcp: 1, lb: 0, rb: 2 },
                LcpInterval { lcp: 3, lb: 1, rb: 2 },
                LcpInterval { lcp: 2, lb: 4, rb: 5 },
            ]
        );
    }

    proptest! {
        #[test]
        fn matches_brute_force(s in prop::collection::vec(0u8..8, 1..200)) {
            let sa = build_suffix_array(&s).unwrap();
            prop_assert_eq!(&sa, &brute_sa(&s));
            prop_assert_eq!(build_lcp(&s, &sa), brute_lcp(&s, &sa));
        }

        #[test]
        fn intervals_are_exact(s in prop::collection::vec(0u8..4, 1..60)) {
            let sa = build_suffix_array(&s).unwrap();
            let lcp = build_lcp(&s, &sa);
            for iv in lcp_intervals(&lcp) {
                prop_assert!(iv.lb < iv.rb);
                prop_assert_eq!(*lcp[iv.lb + 1..=iv.rb].iter().min().unwrap(), iv.lcp);
                prop_assert!(iv.lb == 0 || lcp[iv.lb] < iv.lcp);
                prop_assert!(iv.rb + 1 == s.len() || lcp[iv.rb + 1] < iv.lcp);
            }
        }
    }
}
