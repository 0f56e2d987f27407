//! Permutations in one-line notation and the primitive operations on them.
//!
//! Positions are 1-based throughout the public API.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matcher::{PatternMatcher, MAX_PATTERN_LEN};
use crate::scalar::Scalar;

/// A rearrangement of `1..=n`, possibly empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Permutation {
    entries: Vec<u32>,
}

impl Permutation {
    /// Validates that `values` is a rearrangement of `1..=n`.
    pub fn new(values: Vec<u32>) -> Result<Permutation> {
        let n = values.len();
        let mut seen = vec![false; n + 1];
        for &v in &values {
            let v = v as usize;
            if v == 0 || v > n {
                return Err(Error::NotAPermutation(format!("value {v} out of range 1..={n}")));
            }
            if seen[v] {
                return Err(Error::NotAPermutation(format!("duplicate value {v}")));
            }
            seen[v] = true;
        }
        Ok(Permutation { entries: values })
    }

    /// Accepts arbitrary integers, rejecting anything that is not `1..=n` rearranged.
    pub fn from_integers(values: &[i64]) -> Result<Permutation> {
        let converted = values
            .iter()
            .map(|&v| u32::try_from(v).map_err(|_| Error::NotAPermutation(format!("value {v} out of range"))))
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(converted)
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<u32>) -> Permutation {
        debug_assert!(Permutation::new(entries.clone()).is_ok());
        Permutation { entries }
    }

    pub fn identity(n: usize) -> Permutation {
        Permutation { entries: (1..=n as u32).collect() }
    }

    pub fn decreasing(n: usize) -> Permutation {
        Permutation { entries: (1..=n as u32).rev().collect() }
    }

    /// Replaces distinct values by their ranks.
    pub fn standardize<T: Ord>(values: &[T]) -> Permutation {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].cmp(&values[b]));
        let mut entries = vec![0u32; values.len()];
        for (rank, &idx) in order.iter().enumerate() {
            entries[idx] = rank as u32 + 1;
        }
        Permutation { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }

    /// Value at the 1-based `position`.
    pub fn at(&self, position: usize) -> u32 {
        self.entries[position - 1]
    }

    /// 1-based position of `value`.
    pub fn position_of(&self, value: u32) -> usize {
        self.entries.iter().position(|&v| v == value).expect("value present") + 1
    }

    /// The pattern formed by the entries at the given increasing positions.
    pub fn flatten(&self, positions: &[usize]) -> Result<Permutation> {
        check_positions(positions, self.len())?;
        let values: Vec<u32> = positions.iter().map(|&p| self.entries[p - 1]).collect();
        Ok(Permutation::standardize(&values))
    }

    /// Swaps the values at two 1-based positions.
    pub fn swap_positions(&self, a: usize, b: usize) -> Result<Permutation> {
        for pos in [a, b] {
            if pos == 0 || pos > self.len() {
                return Err(Error::InvalidPosition { position: pos, len: self.len() });
            }
        }
        let mut entries = self.entries.clone();
        entries.swap(a - 1, b - 1);
        Ok(Permutation { entries })
    }

    /// Renders in the interchange string form: bare digits for `n <= 9`,
    /// comma-separated otherwise.
    pub fn to_compact_string(&self) -> String {
        if self.len() <= 9 {
            self.entries.iter().map(|v| char::from(b'0' + *v as u8)).collect()
        } else {
            self.entries.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        }
    }
}

pub(crate) fn check_positions(positions: &[usize], len: usize) -> Result<()> {
    for (i, &p) in positions.iter().enumerate() {
        if p == 0 || p > len {
            return Err(Error::InvalidPosition { position: p, len });
        }
        if i > 0 && positions[i - 1] >= p {
            return Err(Error::NotIncreasing(positions.to_vec()));
        }
    }
    Ok(())
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_compact_string())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parses `"4231"`, `"4,2,3,1"` or `"10,3,1,..."`; the empty string is the
    /// empty permutation.
    fn from_str(s: &str) -> Result<Permutation> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Permutation::default());
        }
        let values: Vec<u32> = if s.contains(',') {
            s.split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<_>>()?
        } else {
            s.chars()
                .map(|c| c.to_digit(10).ok_or_else(|| Error::Parse(format!("unexpected character {c:?}"))))
                .collect::<Result<_>>()?
        };
        Permutation::new(values)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_compact_string())
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Every index tuple at which a pattern occurs, 1-based and increasing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OccurrenceSet {
    pub pattern_length: usize,
    pub tuples: Vec<Vec<usize>>,
}

impl OccurrenceSet {
    pub fn count(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// True when no two tuples share a position.
    pub fn pairwise_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.tuples.iter().flatten().all(|&p| seen.insert(p))
    }

    /// Number of tuples containing each 1-based position (index 0 unused).
    pub fn multiplicity(&self, len: usize) -> Vec<usize> {
        let mut mult = vec![0; len + 1];
        for &p in self.tuples.iter().flatten() {
            mult[p] += 1;
        }
        mult
    }

    pub fn is_subset_of(&self, other: &OccurrenceSet) -> bool {
        self.tuples.iter().all(|t| other.tuples.binary_search(t).is_ok())
    }
}

fn matcher_for(q: &Permutation) -> Result<PatternMatcher> {
    if q.is_empty() {
        return Err(Error::EmptyPermutation);
    }
    if q.len() > MAX_PATTERN_LEN {
        return Err(Error::Precondition(format!("pattern longer than {MAX_PATTERN_LEN}")));
    }
    Ok(PatternMatcher::new(q.entries()))
}

/// All occurrences of `q` in `p`, in lexicographic order.
pub fn occurrences(q: &Permutation, p: &Permutation) -> Result<OccurrenceSet> {
    let matcher = matcher_for(q)?;
    let mut tuples = Vec::new();
    matcher.for_each(p.entries(), |pos| {
        tuples.push(pos.iter().map(|&i| i + 1).collect());
        true
    });
    Ok(OccurrenceSet { pattern_length: q.len(), tuples })
}

pub fn occurrence_count(q: &Permutation, p: &Permutation) -> Result<u64> {
    Ok(matcher_for(q)?.count(p.entries()))
}

pub fn contains(p: &Permutation, q: &Permutation) -> Result<bool> {
    Ok(matcher_for(q)?.is_contained_in(p.entries()))
}

/// Appends `new_last_entry` to `prefix` (shifting values `>= new_last_entry`
/// up by one) and counts the occurrences of `q` that end at the new position.
pub fn occurrence_count_incremental(q: &Permutation, prefix: &Permutation, new_last_entry: u32) -> Result<u64> {
    let matcher = matcher_for(q)?;
    let extended = append_value(prefix, new_last_entry)?;
    Ok(matcher.count_ending_at_last(extended.entries()))
}

/// `prefix` extended by a final entry of value `v`, existing values `>= v` shifted up.
pub fn append_value(prefix: &Permutation, v: u32) -> Result<Permutation> {
    let n = prefix.len() as u32;
    if v == 0 || v > n + 1 {
        return Err(Error::Precondition(format!("insertion value {v} outside 1..={}", n + 1)));
    }
    let mut entries: Vec<u32> = prefix.entries.iter().map(|&x| if x >= v { x + 1 } else { x }).collect();
    entries.push(v);
    Ok(Permutation { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Symmetry {
    Reverse,
    Complement,
    Inverse,
    ReverseComplement,
}

impl Symmetry {
    pub const ALL: [Symmetry; 4] = [
        Symmetry::Reverse,
        Symmetry::Complement,
        Symmetry::Inverse,
        Symmetry::ReverseComplement,
    ];
}

pub fn apply_symmetry(p: &Permutation, s: Symmetry) -> Permutation {
    let n = p.len() as u32;
    let entries = match s {
        Symmetry::Reverse => p.entries.iter().rev().copied().collect(),
        Symmetry::Complement => p.entries.iter().map(|&v| n + 1 - v).collect(),
        Symmetry::Inverse => {
            let mut inv = vec![0; p.len()];
            for (i, &v) in p.entries.iter().enumerate() {
                inv[v as usize - 1] = i as u32 + 1;
            }
            inv
        }
        Symmetry::ReverseComplement => p.entries.iter().rev().map(|&v| n + 1 - v).collect(),
    };
    Permutation { entries }
}

pub fn reverse(p: &Permutation) -> Permutation {
    apply_symmetry(p, Symmetry::Reverse)
}

pub fn complement(p: &Permutation) -> Permutation {
    apply_symmetry(p, Symmetry::Complement)
}

pub fn inverse(p: &Permutation) -> Permutation {
    apply_symmetry(p, Symmetry::Inverse)
}

/// The orbit of `p` under the eight symmetries of the square, sorted and deduplicated.
pub fn symmetry_orbit(p: &Permutation) -> Vec<Permutation> {
    let mut orbit = Vec::with_capacity(8);
    for base in [p.clone(), inverse(p)] {
        let r = reverse(&base);
        orbit.push(complement(&r));
        orbit.push(r);
        orbit.push(complement(&base));
        orbit.push(base);
    }
    orbit.sort();
    orbit.dedup();
    orbit
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SumMode {
    DirectSum,
    SkewSum,
}

/// `a ⊕ b` or `a ⊖ b`.
pub fn compose(a: &Permutation, b: &Permutation, mode: SumMode) -> Permutation {
    let (na, nb) = (a.len() as u32, b.len() as u32);
    let entries = match mode {
        SumMode::DirectSum => a.entries.iter().copied().chain(b.entries.iter().map(|&v| v + na)).collect(),
        SumMode::SkewSum => a.entries.iter().map(|&v| v + nb).chain(b.entries.iter().copied()).collect(),
    };
    Permutation { entries }
}

/// Folds `parts` left to right under `mode`.
pub fn compose_all(parts: &[Permutation], mode: SumMode) -> Permutation {
    parts.iter().fold(Permutation::default(), |acc, part| compose(&acc, part, mode))
}

/// Inserts new entries at consecutive positions starting at `position`; each
/// new entry's value is placed by its key relative to the existing integer
/// values, then everything is re-ranked.
pub fn insert_block<K: Scalar>(p: &Permutation, position: usize, keys: &[K]) -> Result<Permutation> {
    let n = p.len();
    if position == 0 || position > n + 1 {
        return Err(Error::InvalidPosition { position, len: n });
    }
    for (i, k) in keys.iter().enumerate() {
        if keys[..i].iter().any(|other| other == k) {
            return Err(Error::DuplicateKey);
        }
        if let Some(v) = (1..=n as u32).find(|&v| K::from_u32(v).as_ref() == Some(k)) {
            return Err(Error::KeyCollision(v));
        }
    }
    let mut combined: Vec<K> = Vec::with_capacity(n + keys.len());
    let as_key = |v: u32| K::from_u32(v).expect("integer key");
    combined.extend(p.entries[..position - 1].iter().map(|&v| as_key(v)));
    combined.extend(keys.iter().cloned());
    combined.extend(p.entries[position - 1..].iter().map(|&v| as_key(v)));
    let mut order: Vec<usize> = (0..combined.len()).collect();
    order.sort_by(|&a, &b| combined[a].partial_cmp(&combined[b]).expect("comparable keys"));
    let mut entries = vec![0u32; combined.len()];
    for (rank, &idx) in order.iter().enumerate() {
        entries[idx] = rank as u32 + 1;
    }
    Ok(Permutation { entries })
}

pub fn delete_entry(p: &Permutation, position: usize) -> Result<Permutation> {
    if position == 0 || position > p.len() {
        return Err(Error::InvalidPosition { position, len: p.len() });
    }
    let removed = p.entries[position - 1];
    let entries = p
        .entries
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != position - 1)
        .map(|(_, &v)| if v > removed { v - 1 } else { v })
        .collect();
    Ok(Permutation { entries })
}

/// Removes every listed 1-based position and re-ranks what is left.
pub fn delete_positions(p: &Permutation, positions: &[usize]) -> Result<Permutation> {
    let mut drop = vec![false; p.len()];
    for &pos in positions {
        if pos == 0 || pos > p.len() {
            return Err(Error::InvalidPosition { position: pos, len: p.len() });
        }
        drop[pos - 1] = true;
    }
    let kept: Vec<u32> = p.entries.iter().zip(&drop).filter(|(_, &d)| !d).map(|(&v, _)| v).collect();
    Ok(Permutation::standardize(&kept))
}

/// All permutations of length `n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut current = Permutation::identity(n).into_entries();
    loop {
        out.push(Permutation { entries: current.clone() });
        // next lexicographic permutation
        let Some(i) = (1..current.len()).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..current.len()).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn perm(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn make_permutation() {
        assert_eq!(Permutation::new(vec![2, 3, 1]).unwrap(), perm("231"));
        assert!(Permutation::new(vec![]).unwrap().is_empty());
        assert!(matches!(Permutation::new(vec![1, 1, 2]), Err(Error::NotAPermutation(_))));
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::from_integers(&[-1, 1]).is_err());
    }

    #[test]
    fn string_forms() {
        assert_eq!(perm("2,3,1"), perm("231"));
        let long = Permutation::new((1..=10).rev().collect()).unwrap();
        assert_eq!(long.to_string(), "10,9,8,7,6,5,4,3,2,1");
        assert_eq!(long.to_string().parse::<Permutation>().unwrap(), long);
        assert_eq!(perm("").to_string(), "");
        assert!("12a".parse::<Permutation>().is_err());
    }

    #[test]
    fn flatten_examples() {
        assert_eq!(perm("4231").flatten(&[2, 3, 4]).unwrap(), perm("231"));
        assert_eq!(perm("153426").flatten(&[3, 4, 5]).unwrap(), perm("231"));
        assert_eq!(perm("153426").flatten(&[]).unwrap(), Permutation::default());
        assert!(perm("123").flatten(&[2, 1]).is_err());
        assert!(perm("123").flatten(&[0]).is_err());
        assert!(perm("123").flatten(&[4]).is_err());
    }

    #[test]
    fn occurrence_examples() {
        let occ = occurrences(&perm("21"), &perm("231")).unwrap();
        assert_eq!(occ.tuples, vec![vec![1, 3], vec![2, 3]]);
        let occ = occurrences(&perm("231"), &perm("4231")).unwrap();
        assert_eq!(occ.tuples, vec![vec![2, 3, 4]]);
        assert_eq!(occurrence_count(&perm("12"), &perm("1234")).unwrap(), 6);
        assert!(occurrences(&perm("1"), &Permutation::default()).unwrap().is_empty());
        assert!(occurrences(&Permutation::default(), &perm("1")).is_err());
    }

    #[test]
    fn incremental_examples() {
        // new smallest value appended to 12 gives 231
        assert_eq!(occurrence_count_incremental(&perm("21"), &perm("12"), 1).unwrap(), 2);
        assert_eq!(append_value(&perm("12"), 1).unwrap(), perm("231"));
        assert_eq!(occurrence_count_incremental(&perm("21"), &perm("12"), 3).unwrap(), 0);
        assert_eq!(occurrence_count_incremental(&perm("321"), &Permutation::default(), 1).unwrap(), 0);
        assert!(occurrence_count_incremental(&perm("21"), &perm("12"), 4).is_err());
    }

    #[test]
    fn symmetry_examples() {
        assert_eq!(complement(&perm("231")), perm("213"));
        assert_eq!(reverse(&perm("231")), perm("132"));
        assert_eq!(inverse(&perm("231")), perm("312"));
        assert_eq!(apply_symmetry(&perm("231"), Symmetry::ReverseComplement), perm("312"));
        assert_eq!(symmetry_orbit(&perm("1342")).len(), 8);
        assert_eq!(symmetry_orbit(&perm("3412")), vec![perm("2143"), perm("3412")]);
    }

    #[test]
    fn compose_examples() {
        let s = compose(&perm("12"), &perm("1"), SumMode::SkewSum);
        assert_eq!(s, perm("231"));
        assert_eq!(compose(&perm("12"), &perm("1"), SumMode::DirectSum), perm("123"));
        assert_eq!(compose(&perm("1"), &s, SumMode::SkewSum), perm("4231"));
        assert_eq!(compose_all(&[perm("1"), perm("12"), perm("1")], SumMode::SkewSum), perm("4231"));
    }

    #[test]
    fn insert_block_examples() {
        let k = |n, d| Rational64::new(n, d);
        let got = insert_block(&perm("123"), 3, &[k(3, 2), k(7, 4), k(5, 4)]).unwrap();
        assert_eq!(got, perm("153426"));
        let got = insert_block(&Permutation::default(), 1, &[k(1, 5), k(1, 10)]).unwrap();
        assert_eq!(got, perm("21"));
        let none: [Rational64; 0] = [];
        assert_eq!(insert_block(&perm("12"), 2, &none).unwrap(), perm("12"));
        assert!(matches!(insert_block(&perm("12"), 1, &[k(1, 2), k(1, 2)]), Err(Error::DuplicateKey)));
        assert!(matches!(insert_block(&perm("12"), 1, &[k(2, 1)]), Err(Error::KeyCollision(2))));
        assert!(insert_block(&perm("12"), 4, &[k(1, 2)]).is_err());
        // float keys follow the same placement rule
        assert_eq!(insert_block(&perm("123"), 3, &[1.5, 1.75, 1.25]).unwrap(), perm("153426"));
    }

    #[test]
    fn delete_examples() {
        assert_eq!(delete_entry(&perm("321"), 1).unwrap(), perm("21"));
        let mut p = perm("153426");
        for pos in [5, 4, 3] {
            p = delete_entry(&p, pos).unwrap();
        }
        assert_eq!(p, perm("123"));
        assert_eq!(delete_positions(&perm("153426"), &[3, 4, 5]).unwrap(), perm("123"));
        assert_eq!(delete_entry(&perm("1"), 1).unwrap(), Permutation::default());
        assert!(delete_entry(&perm("1"), 2).is_err());
    }

    #[test]
    fn lexicographic_listing() {
        let all = all_permutations(3);
        let strs: Vec<String> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(strs, ["123", "132", "213", "231", "312", "321"]);
        assert_eq!(all_permutations(0), vec![Permutation::default()]);
        assert_eq!(all_permutations(5).len(), 120);
    }
}
