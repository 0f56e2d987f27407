//! Exact counts of permutations by number of pattern occurrences.
//!
//! Two traversals are used:
//!
//! * the insertion tree, where a node is a standardized prefix and a child
//!   appends a new last value `v` (shifting values `>= v` up). Every
//!   permutation of length `n` is reached exactly once at depth `n`, and the
//!   occurrence count of a child is its parent's count plus the occurrences
//!   ending at the new last position. This drives [`occurrence_distribution`].
//! * a value-choice search that picks actual values left to right, which
//!   yields members in lexicographic order ([`members`], [`count_avoiders`]).
//!
//! Occurrence counts never decrease along either traversal, so any subtree
//! whose running count passes a cap can be cut off whole.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcher::{PatternMatcher, MAX_PATTERN_LEN};
use crate::perm::{occurrences, Permutation};

/// Default node budget: extension steps before a traversal gives up.
pub const DEFAULT_BUDGET: u64 = 10_000_000_000;

/// Largest permutation length any traversal accepts.
pub const MAX_N: usize = 16;

/// Depth at which the insertion tree is cut into independent parallel tasks.
const SPLIT_DEPTH: usize = 5;

const FLUSH_EVERY: u64 = 1 << 16;

#[derive(Debug, Clone)]
pub struct EnumConfig {
    /// `Some(1)` runs the sequential code path; `None` uses the global pool.
    pub threads: Option<usize>,
    pub budget: u64,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { threads: None, budget: DEFAULT_BUDGET }
    }
}

impl EnumConfig {
    pub fn sequential() -> Self {
        EnumConfig { threads: Some(1), ..Default::default() }
    }
}

/// Histogram of occurrence counts over all `n!` permutations of length `n`.
///
/// With a cap, every permutation with more than `r_cap` occurrences is pooled
/// into `overflow`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OccurrenceDistribution {
    pub pattern: Permutation,
    pub n: usize,
    pub r_cap: Option<usize>,
    #[serde(serialize_with = "crate::serde_util::biguints")]
    pub counts: Vec<BigUint>,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub overflow: BigUint,
}

impl OccurrenceDistribution {
    pub fn count(&self, r: usize) -> BigUint {
        self.counts.get(r).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum::<BigUint>() + &self.overflow
    }
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n).map(BigUint::from).product()
}

fn check_inputs(q: &Permutation, n: usize) -> Result<()> {
    if q.is_empty() {
        return Err(Error::EmptyPermutation);
    }
    if q.len() > MAX_PATTERN_LEN {
        return Err(Error::Precondition(format!("pattern longer than {MAX_PATTERN_LEN}")));
    }
    if n > MAX_N {
        return Err(Error::TooLarge { n, limit: MAX_N });
    }
    Ok(())
}

struct Budget<'a> {
    used: &'a AtomicU64,
    limit: u64,
    aborted: &'a AtomicBool,
    local: u64,
}

impl Budget<'_> {
    #[inline]
    fn tick(&mut self) -> bool {
        self.local += 1;
        if self.local == FLUSH_EVERY {
            self.flush()
        } else {
            true
        }
    }

    fn flush(&mut self) -> bool {
        let total = self.used.fetch_add(self.local, Ordering::Relaxed) + self.local;
        self.local = 0;
        if total > self.limit {
            self.aborted.store(true, Ordering::Relaxed);
        }
        !self.aborted.load(Ordering::Relaxed)
    }
}

#[derive(Debug, Clone)]
struct Histograms {
    /// `per_depth[d][r]`: prefixes of length `d` with `r` occurrences.
    per_depth: Vec<Vec<u64>>,
    overflow: Vec<u128>,
}

impl Histograms {
    fn new(n_max: usize) -> Self {
        Histograms { per_depth: vec![Vec::new(); n_max + 1], overflow: vec![0; n_max + 1] }
    }

    #[inline]
    fn record(&mut self, d: usize, r: usize) {
        let row = &mut self.per_depth[d];
        if row.len() <= r {
            row.resize(r + 1, 0);
        }
        row[r] += 1;
    }

    fn merge(mut self, other: Histograms) -> Histograms {
        for (mine, theirs) in self.per_depth.iter_mut().zip(other.per_depth) {
            if mine.len() < theirs.len() {
                mine.resize(theirs.len(), 0);
            }
            for (a, b) in mine.iter_mut().zip(theirs) {
                *a += b;
            }
        }
        for (a, b) in self.overflow.iter_mut().zip(other.overflow) {
            *a += b;
        }
        self
    }
}

struct Walker<'a> {
    matcher: &'a PatternMatcher,
    n_max: usize,
    cap: Option<usize>,
    /// `ways[d][n]` = n!/d!: permutations of length `n` below one depth-`d` node.
    ways: &'a [Vec<u128>],
    hist: Histograms,
    bufs: Vec<Vec<u8>>,
    budget: Budget<'a>,
    /// When set, nodes at this depth are handed to `frontier` instead of visited.
    stop_depth: Option<usize>,
    frontier: Vec<(Vec<u8>, usize)>,
}

impl Walker<'_> {
    fn visit(&mut self, d: usize, count: usize) -> bool {
        if self.stop_depth == Some(d) {
            self.frontier.push((self.bufs[d].clone(), count));
            return true;
        }
        self.hist.record(d, count);
        if d == self.n_max {
            return true;
        }
        let child = d + 1;
        for v in 1..=child as u8 {
            let (lower, upper) = self.bufs.split_at_mut(child);
            let src = &lower[d];
            let dst = &mut upper[0];
            for (slot, &x) in dst.iter_mut().zip(src) {
                *slot = if x >= v { x + 1 } else { x };
            }
            dst[d] = v;
            let total = count + self.matcher.count_ending_at_last(dst.as_slice()) as usize;
            if !self.budget.tick() {
                return false;
            }
            if self.cap.is_some_and(|cap| total > cap) {
                for n in child..=self.n_max {
                    self.hist.overflow[n] += self.ways[child][n];
                }
                continue;
            }
            if !self.visit(child, total) {
                return false;
            }
        }
        true
    }
}

fn ways_table(n_max: usize) -> Vec<Vec<u128>> {
    (0..=n_max)
        .map(|d| {
            (0..=n_max)
                .map(|n| if n < d { 0 } else { (d + 1..=n).map(|i| i as u128).product() })
                .collect()
        })
        .collect()
}

/// Distributions for every length `0..=n_max` from a single traversal.
pub fn distribution_rows(
    q: &Permutation,
    n_max: usize,
    r_cap: Option<usize>,
    cfg: &EnumConfig,
) -> Result<Vec<OccurrenceDistribution>> {
    check_inputs(q, n_max)?;
    let matcher = PatternMatcher::new(q.entries());
    let ways = ways_table(n_max);
    let used = AtomicU64::new(0);
    let aborted = AtomicBool::new(false);
    let new_walker = |stop_depth| Walker {
        matcher: &matcher,
        n_max,
        cap: r_cap,
        ways: &ways,
        hist: Histograms::new(n_max),
        bufs: (0..=n_max).map(|d| vec![0u8; d]).collect(),
        budget: Budget { used: &used, limit: cfg.budget, aborted: &aborted, local: 0 },
        stop_depth,
        frontier: Vec::new(),
    };

    let hist = if cfg.threads == Some(1) || n_max <= SPLIT_DEPTH {
        let mut walker = new_walker(None);
        let ok = walker.visit(0, 0) && walker.budget.flush();
        if !ok {
            return Err(Error::BudgetExceeded(cfg.budget));
        }
        walker.hist
    } else {
        let mut top = new_walker(Some(SPLIT_DEPTH));
        if !(top.visit(0, 0) && top.budget.flush()) {
            return Err(Error::BudgetExceeded(cfg.budget));
        }
        let frontier = std::mem::take(&mut top.frontier);
        let run = || {
            frontier
                .par_iter()
                .map(|(prefix, count)| {
                    let mut walker = new_walker(None);
                    walker.bufs[SPLIT_DEPTH].copy_from_slice(prefix);
                    let ok = walker.visit(SPLIT_DEPTH, *count) && walker.budget.flush();
                    ok.then_some(walker.hist)
                })
                .collect::<Option<Vec<_>>>()
        };
        let parts = match cfg.threads {
            Some(t) => rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?
                .install(run),
            None => run(),
        };
        let parts = parts.ok_or(Error::BudgetExceeded(cfg.budget))?;
        // fixed merge order keeps the result independent of scheduling
        parts.into_iter().fold(top.hist, Histograms::merge)
    };

    Ok((0..=n_max)
        .map(|n| {
            let row = &hist.per_depth[n];
            let len = match r_cap {
                Some(cap) => cap + 1,
                None => row.len().max(1),
            };
            let counts = (0..len).map(|r| BigUint::from(row.get(r).copied().unwrap_or(0))).collect();
            OccurrenceDistribution {
                pattern: q.clone(),
                n,
                r_cap,
                counts,
                overflow: BigUint::from(hist.overflow[n]),
            }
        })
        .collect())
}

pub fn occurrence_distribution(
    q: &Permutation,
    n: usize,
    r_cap: Option<usize>,
    cfg: &EnumConfig,
) -> Result<OccurrenceDistribution> {
    let mut rows = distribution_rows(q, n, r_cap, cfg)?;
    Ok(rows.pop().expect("row for n"))
}

/// Which occurrence counts a member search keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MemberFilter {
    Exactly(usize),
    AtMost(usize),
}

impl MemberFilter {
    fn cap(self) -> usize {
        match self {
            MemberFilter::Exactly(r) | MemberFilter::AtMost(r) => r,
        }
    }

    fn accepts(self, count: usize) -> bool {
        match self {
            MemberFilter::Exactly(r) => count == r,
            MemberFilter::AtMost(r) => count <= r,
        }
    }
}

/// Lexicographic stream of permutations of length `n` selected by occurrence count.
pub struct Members {
    matcher: PatternMatcher,
    n: usize,
    filter: MemberFilter,
    prefix: Vec<u8>,
    counts: Vec<usize>,
    next: Vec<u8>,
    used: u32,
    done: bool,
}

impl Members {
    pub fn new(q: &Permutation, n: usize, filter: MemberFilter) -> Result<Members> {
        check_inputs(q, n)?;
        Ok(Members {
            matcher: PatternMatcher::new(q.entries()),
            n,
            filter,
            prefix: Vec::with_capacity(n),
            counts: vec![0],
            next: vec![1; n + 1],
            used: 0,
            done: false,
        })
    }

    fn pop(&mut self) {
        let v = self.prefix.pop().expect("nonempty prefix");
        self.used &= !(1 << v);
        self.counts.pop();
    }
}

impl Iterator for Members {
    /// The permutation and its occurrence count.
    type Item = (Permutation, usize);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if self.n == 0 {
            self.done = true;
            return self.filter.accepts(0).then(|| (Permutation::default(), 0));
        }
        let n = self.n as u8;
        let cap = self.filter.cap();
        loop {
            let d = self.prefix.len();
            let mut cand = self.next[d];
            while cand <= n && self.used >> cand & 1 == 1 {
                cand += 1;
            }
            if cand > n {
                if d == 0 {
                    self.done = true;
                    return None;
                }
                self.pop();
                continue;
            }
            self.next[d] = cand + 1;
            self.prefix.push(cand);
            let count = self.counts[d] + self.matcher.count_ending_at_last(&self.prefix) as usize;
            if count > cap {
                self.prefix.pop();
                continue;
            }
            self.used |= 1 << cand;
            self.counts.push(count);
            if d + 1 == self.n {
                let item = self
                    .filter
                    .accepts(count)
                    .then(|| (Permutation::from_vec_unchecked(self.prefix.iter().map(|&v| v as u32).collect()), count));
                self.pop();
                if item.is_some() {
                    return item;
                }
            } else {
                self.next[d + 1] = 1;
            }
        }
    }
}

/// The members of `S_{n,r}(q)` in lexicographic order.
pub fn members(q: &Permutation, n: usize, r: usize) -> Result<impl Iterator<Item = Permutation>> {
    Ok(Members::new(q, n, MemberFilter::Exactly(r))?.map(|(p, _)| p))
}

/// `|S_n(q)|` by pruned value-choice search, independent of the insertion tree.
pub fn count_avoiders(q: &Permutation, n: usize) -> Result<BigUint> {
    let count = Members::new(q, n, MemberFilter::Exactly(0))?.count();
    Ok(BigUint::from(count))
}

/// `S_{n,r}(q)` split by whether the occurrences are pairwise entry-disjoint.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct RefinedCounts {
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub star: BigUint,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub intersecting: BigUint,
}

impl RefinedCounts {
    pub fn total(&self) -> BigUint {
        &self.star + &self.intersecting
    }
}

/// Refined counts for every `r` in `0..=r_max`.
pub fn refined_distribution(q: &Permutation, n: usize, r_max: usize) -> Result<Vec<RefinedCounts>> {
    let mut star = vec![0u64; r_max + 1];
    let mut int = vec![0u64; r_max + 1];
    for (p, r) in Members::new(q, n, MemberFilter::AtMost(r_max))? {
        if occurrences(q, &p)?.pairwise_disjoint() {
            star[r] += 1;
        } else {
            int[r] += 1;
        }
    }
    Ok(star
        .into_iter()
        .zip(int)
        .map(|(s, i)| RefinedCounts { star: s.into(), intersecting: i.into() })
        .collect())
}

pub fn refined_counts(q: &Permutation, n: usize, r: usize) -> Result<RefinedCounts> {
    Ok(refined_distribution(q, n, r)?.pop().expect("row for r"))
}

/// Members of `S*_{n,r}(q)`: exactly `r` occurrences, pairwise entry-disjoint.
pub fn star_members(q: &Permutation, n: usize, r: usize) -> Result<Vec<Permutation>> {
    let mut out = Vec::new();
    for p in members(q, n, r)? {
        if occurrences(q, &p)?.pairwise_disjoint() {
            out.push(p);
        }
    }
    Ok(out)
}

/// Converts a count known to fit in 64 bits.
pub fn small(count: &BigUint) -> u64 {
    count.to_u64().expect("count fits in u64")
}
