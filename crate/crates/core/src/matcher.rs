//! Backtracking occurrence search over index tuples.
//!
//! A pattern is compiled once into neighbour tables: when pattern index `j`
//! is placed, the candidate value only has to sit strictly between the values
//! already chosen for its nearest placed neighbours below and above. That is
//! enough for order isomorphism and keeps the inner loop to two comparisons.

/// Longest pattern the fixed-size scratch buffers accept.
pub const MAX_PATTERN_LEN: usize = 24;

const NONE: u8 = u8::MAX;

#[derive(Debug, Clone)]
struct Bounds {
    lo: Vec<u8>,
    hi: Vec<u8>,
}

impl Bounds {
    /// Neighbour tables for placing `order[0], order[1], ...` in sequence.
    fn new(pattern: &[u32], order: &[usize]) -> Bounds {
        let m = pattern.len();
        let mut lo = vec![NONE; m];
        let mut hi = vec![NONE; m];
        for (step, &j) in order.iter().enumerate() {
            for &placed in &order[..step] {
                let pv = pattern[placed];
                if pv < pattern[j] && (lo[j] == NONE || pattern[lo[j] as usize] < pv) {
                    lo[j] = placed as u8;
                }
                if pv > pattern[j] && (hi[j] == NONE || pattern[hi[j] as usize] > pv) {
                    hi[j] = placed as u8;
                }
            }
        }
        Bounds { lo, hi }
    }

    #[inline(always)]
    fn admits<V: Copy + Ord>(&self, j: usize, x: V, chosen: &[V]) -> bool {
        let lo = self.lo[j];
        if lo != NONE && x <= chosen[lo as usize] {
            return false;
        }
        let hi = self.hi[j];
        hi == NONE || x < chosen[hi as usize]
    }
}

/// A pattern compiled for repeated occurrence searches.
#[derive(Debug, Clone)]
pub struct PatternMatcher {
    pattern: Vec<u32>,
    full: Bounds,
    last: Bounds,
}

impl PatternMatcher {
    /// `pattern` must be a nonempty permutation of `1..=m` with `m <= MAX_PATTERN_LEN`.
    pub fn new(pattern: &[u32]) -> PatternMatcher {
        let m = pattern.len();
        assert!((1..=MAX_PATTERN_LEN).contains(&m), "pattern length {m} unsupported");
        let full_order: Vec<usize> = (0..m).collect();
        let mut last_order = vec![m - 1];
        last_order.extend(0..m - 1);
        PatternMatcher {
            pattern: pattern.to_vec(),
            full: Bounds::new(pattern, &full_order),
            last: Bounds::new(pattern, &last_order),
        }
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    pub fn pattern(&self) -> &[u32] {
        &self.pattern
    }

    /// Number of occurrences in `text` whose last index is the final position.
    ///
    /// `text` may hold any distinct values; only their relative order matters.
    pub fn count_ending_at_last<V: Copy + Ord + Default>(&self, text: &[V]) -> u64 {
        let m = self.pattern.len();
        let len = text.len();
        if len < m {
            return 0;
        }
        let mut chosen = [V::default(); MAX_PATTERN_LEN];
        chosen[m - 1] = text[len - 1];
        if m == 1 {
            return 1;
        }
        self.count_last_rec(text, 0, 0, len - 1, &mut chosen)
    }

    fn count_last_rec<V: Copy + Ord>(
        &self,
        text: &[V],
        j: usize,
        start: usize,
        end: usize,
        chosen: &mut [V; MAX_PATTERN_LEN],
    ) -> u64 {
        let m = self.pattern.len();
        let remaining_after = m - 2 - j;
        let mut total = 0;
        for pos in start..end - remaining_after {
            let x = text[pos];
            if self.last.admits(j, x, chosen) {
                if j + 2 == m {
                    total += 1;
                } else {
                    chosen[j] = x;
                    total += self.count_last_rec(text, j + 1, pos + 1, end, chosen);
                }
            }
        }
        total
    }

    /// Total number of occurrences in `text`.
    pub fn count<V: Copy + Ord + Default>(&self, text: &[V]) -> u64 {
        let mut total = 0;
        self.for_each(text, |_| {
            total += 1;
            true
        });
        total
    }

    /// Whether `text` has at least one occurrence.
    pub fn is_contained_in<V: Copy + Ord + Default>(&self, text: &[V]) -> bool {
        let mut found = false;
        self.for_each(text, |_| {
            found = true;
            false
        });
        found
    }

    /// Calls `f` with each occurrence as 0-based increasing positions, in
    /// lexicographic order. Returning `false` from `f` stops the search.
    pub fn for_each<V, F>(&self, text: &[V], mut f: F)
    where
        V: Copy + Ord + Default,
        F: FnMut(&[usize]) -> bool,
    {
        let m = self.pattern.len();
        if text.len() < m {
            return;
        }
        let mut chosen = [V::default(); MAX_PATTERN_LEN];
        let mut positions = [0usize; MAX_PATTERN_LEN];
        self.full_rec(text, 0, 0, &mut chosen, &mut positions, &mut f);
    }

    fn full_rec<V, F>(
        &self,
        text: &[V],
        j: usize,
        start: usize,
        chosen: &mut [V; MAX_PATTERN_LEN],
        positions: &mut [usize; MAX_PATTERN_LEN],
        f: &mut F,
    ) -> bool
    where
        V: Copy + Ord,
        F: FnMut(&[usize]) -> bool,
    {
        let m = self.pattern.len();
        let stop = text.len() - (m - 1 - j);
        for pos in start..stop {
            let x = text[pos];
            if !self.full.admits(j, x, chosen) {
                continue;
            }
            chosen[j] = x;
            positions[j] = pos;
            let keep_going = if j + 1 == m {
                f(&positions[..m])
            } else {
                self.full_rec(text, j + 1, pos + 1, chosen, positions, f)
            };
            if !keep_going {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(pattern: &[u32], text: &[u32]) -> u64 {
        let m = pattern.len();
        let n = text.len();
        let mut total = 0;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != m {
                continue;
            }
            let sub: Vec<u32> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| text[i]).collect();
            let ok = (0..m).all(|a| (0..m).all(|b| (sub[a] < sub[b]) == (pattern[a] < pattern[b])));
            total += ok as u64;
        }
        total
    }

    #[test]
    fn counts_match_subset_brute_force() {
        let texts: [&[u32]; 4] = [&[1, 5, 3, 4, 2, 6], &[4, 2, 3, 1], &[2, 1, 4, 3, 6, 5, 7], &[7, 1, 6, 2, 5, 3, 4]];
        let patterns: [&[u32]; 6] = [&[1], &[2, 1], &[2, 3, 1], &[3, 4, 1, 2], &[1, 3, 2], &[4, 2, 1, 3]];
        for t in texts {
            for q in patterns {
                let m = PatternMatcher::new(q);
                assert_eq!(m.count(t), brute(q, t), "q={q:?} t={t:?}");
                let last = brute(q, t) - brute(q, &t[..t.len() - 1]);
                assert_eq!(m.count_ending_at_last(t), last, "q={q:?} t={t:?}");
            }
        }
    }

    #[test]
    fn early_stop() {
        let m = PatternMatcher::new(&[1, 2]);
        assert!(m.is_contained_in(&[1u8, 2, 3]));
        assert!(!m.is_contained_in(&[3u8, 2, 1]));
    }
}
