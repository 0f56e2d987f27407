//! Executable injections behind the counting bounds, with exhaustive checkers.
//!
//! * [`inject_lower`] / [`extract_lower`]: insert `r` copies of `q` into a
//!   `q`-avoider at chosen positions, in value blocks placed above anchors so
//!   that no extra occurrence appears; and undo it.
//! * [`swap_upper`]: on permutations whose `r` occurrences are pairwise
//!   entry-disjoint, swap two entries to destroy one occurrence without
//!   creating any other.
//! * [`reduce_intersecting`]: delete the first entry shared by two occurrences.
//!
//! Every internal claim the constructions rely on is checked at runtime and
//! reported as a [`ProofGapError`] with a replayable witness.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::decomp::{check_hypotheses, is_skew_decomposable, is_sum_decomposable, sum_components};
use crate::enumeration::{distribution_rows, members, refined_counts, star_members, EnumConfig};
use crate::error::{Error, ProofGapError, Result};
use crate::matcher::PatternMatcher;
use crate::perm::{
    complement, compose, compose_all, delete_entry, delete_positions, insert_block, occurrences, reverse,
    OccurrenceSet, Permutation, SumMode,
};

/// How the values of `q` are cut into descending chunks for insertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockPlan {
    pub pattern: Permutation,
    /// Skew components `q_1, ..., q_k`.
    pub parts: Vec<Permutation>,
    pub chunk_sizes: Vec<usize>,
    /// `(highest, lowest)` value of each chunk, chunk 1 at the top.
    pub chunk_value_ranges: Vec<(u32, u32)>,
    /// `q_1 ⊖ ... ⊖ q_i` for `i = 1..k-1`.
    #[serde(skip)]
    partial_sums: Vec<Permutation>,
}

impl BlockPlan {
    pub fn k(&self) -> usize {
        self.parts.len()
    }

    /// Length of `q_1`.
    pub fn lead_len(&self) -> usize {
        self.parts[0].len()
    }

    fn chunk_of(&self, value: u32) -> usize {
        self.chunk_value_ranges
            .iter()
            .position(|&(hi, lo)| lo <= value && value <= hi)
            .expect("every value lies in a chunk")
    }
}

pub fn block_plan(q: &Permutation) -> Result<BlockPlan> {
    let report = check_hypotheses(q)?;
    if !report.lower_bound_applies {
        return Err(Error::Hypothesis(format!("{q} does not satisfy the lower-bound hypotheses")));
    }
    let parts = report.skew_parts;
    let k = parts.len();
    let m = q.len();
    let chunk_sizes: Vec<usize> = if k == 2 {
        vec![m]
    } else {
        let mut sizes = vec![parts[0].len() + parts[1].len() - 1];
        sizes.extend(parts[2..k - 1].iter().map(Permutation::len));
        sizes.push(parts[k - 1].len() + 1);
        sizes
    };
    debug_assert_eq!(chunk_sizes.iter().sum::<usize>(), m);
    let mut top = m as u32;
    let chunk_value_ranges = chunk_sizes
        .iter()
        .map(|&b| {
            let range = (top, top + 1 - b as u32);
            top -= b as u32;
            range
        })
        .collect();
    let partial_sums = (1..k).map(|i| compose_all(&parts[..i], SumMode::SkewSum)).collect();
    Ok(BlockPlan { pattern: q.clone(), parts, chunk_sizes, chunk_value_ranges, partial_sums })
}

/// `a_1, ..., a_{k-1}`; zero where no occurrence exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnchorVector(pub Vec<u32>);

impl AnchorVector {
    pub fn is_weakly_decreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }
}

/// For each partial skew sum `q_1 ⊖ ... ⊖ q_i`, the largest minimum value of
/// any of its occurrences lying entirely before `position`.
pub fn anchors(w: &Permutation, position: usize, q: &Permutation) -> Result<AnchorVector> {
    let plan = block_plan(q)?;
    anchors_for_plan(w, position, &plan)
}

fn anchors_for_plan(w: &Permutation, position: usize, plan: &BlockPlan) -> Result<AnchorVector> {
    if position == 0 || position > w.len() + 1 {
        return Err(Error::InvalidPosition { position, len: w.len() });
    }
    let prefix = &w.entries()[..position - 1];
    let values = plan
        .partial_sums
        .iter()
        .map(|partial| {
            let mut best = 0;
            PatternMatcher::new(partial.entries()).for_each(prefix, |pos| {
                let min = pos.iter().map(|&i| prefix[i]).min().expect("nonempty occurrence");
                best = best.max(min);
                true
            });
            best
        })
        .collect();
    Ok(AnchorVector(values))
}

fn perm_json(p: &Permutation) -> serde_json::Value {
    json!(p.to_compact_string())
}

/// Inserts one copy of `q` per position in `positions` (1-based slots of
/// `p`, where `|p| + 1` appends) and returns a permutation of length
/// `|p| + r|q| + |q_1|` with exactly `r` occurrences of `q`.
pub fn inject_lower(q: &Permutation, positions: &[usize], p: &Permutation) -> Result<Permutation> {
    let plan = block_plan(q)?;
    inject_with_plan(&plan, positions, p)
}

fn inject_with_plan(plan: &BlockPlan, positions: &[usize], p: &Permutation) -> Result<Permutation> {
    let q = &plan.pattern;
    let m = q.len();
    let lead = plan.lead_len();
    if positions.is_empty() {
        return Err(Error::Precondition("at least one insertion position is required".into()));
    }
    for (i, &s) in positions.iter().enumerate() {
        if s == 0 || s > p.len() + 1 {
            return Err(Error::Precondition(format!("position {s} outside 1..={}", p.len() + 1)));
        }
        if i > 0 && positions[i - 1] >= s {
            return Err(Error::NotIncreasing(positions.to_vec()));
        }
    }
    if crate::perm::contains(p, q)? {
        return Err(Error::Precondition(format!("{p} does not avoid {q}")));
    }

    let mut w = compose(&plan.parts[0], p, SumMode::DirectSum);
    let denom = m as i64 + 1;
    for (j, &s) in positions.iter().enumerate() {
        let at = s + lead + j * m;
        let a = anchors_for_plan(&w, at, plan)?;
        if !a.is_weakly_decreasing() {
            return Err(ProofGapError::new(
                "inject_lower",
                format!("anchors {:?} are not weakly decreasing", a.0),
                json!({"q": perm_json(q), "S": positions, "p": perm_json(p), "w": perm_json(&w), "position": at, "anchors": a.0}),
            )
            .into());
        }
        // chunk i lands in the gap just above a_i; within a gap, q's own order decides
        let keys: Vec<Rational64> = q
            .entries()
            .iter()
            .map(|&v| Rational64::from_integer(a.0[plan.chunk_of(v)] as i64) + Rational64::new(v as i64, denom))
            .collect();
        w = insert_block(&w, at, &keys)?;
    }

    let found = occurrences(q, &w)?.count();
    if found != positions.len() {
        return Err(ProofGapError::new(
            "inject_lower",
            format!("result has {found} occurrences, expected {}", positions.len()),
            json!({"q": perm_json(q), "S": positions, "p": perm_json(p), "result": perm_json(&w)}),
        )
        .into());
    }
    Ok(w)
}

/// Recovers `(positions, p)` from an image of [`inject_lower`].
pub fn extract_lower(q: &Permutation, w: &Permutation, r: usize) -> Result<(Vec<usize>, Permutation)> {
    let plan = block_plan(q)?;
    extract_with_plan(&plan, w, r)
}

fn extract_with_plan(plan: &BlockPlan, w: &Permutation, r: usize) -> Result<(Vec<usize>, Permutation)> {
    let q = &plan.pattern;
    let m = q.len();
    let lead = plan.lead_len();
    if r == 0 {
        return Err(Error::Precondition("r must be at least 1".into()));
    }
    if w.len() < r * m + lead {
        return Err(Error::NotInImage(format!("{w} is too short for {r} copies of {q}")));
    }
    let occ = occurrences(q, w)?;
    if occ.count() != r {
        return Err(Error::NotInImage(format!("{w} has {} occurrences of {q}, expected {r}", occ.count())));
    }
    let mut starts = Vec::with_capacity(r);
    let mut removed = Vec::with_capacity(r * m);
    for tuple in &occ.tuples {
        let start = tuple[0];
        if tuple.iter().enumerate().any(|(i, &pos)| pos != start + i) {
            return Err(Error::NotInImage(format!("occurrence {tuple:?} is not contiguous")));
        }
        if removed.last().is_some_and(|&last| last >= start) {
            return Err(Error::NotInImage("occurrences overlap".into()));
        }
        starts.push(start);
        removed.extend(tuple.iter().copied());
    }
    let base_len = w.len() - r * m - lead;
    let mut positions = Vec::with_capacity(r);
    for (j, &start) in starts.iter().enumerate() {
        let s = start as isize - (lead + j * m) as isize;
        if s < 1 || s as usize > base_len + 1 || positions.last().is_some_and(|&prev| prev >= s as usize) {
            return Err(Error::NotInImage(format!("recovered position {s} is inconsistent")));
        }
        positions.push(s as usize);
    }
    let base = delete_positions(w, &removed)?;
    if base.entries()[..lead] != plan.parts[0].entries()[..] {
        return Err(Error::NotInImage(format!("{base} does not start with {} at the bottom", plan.parts[0])));
    }
    let lead_positions: Vec<usize> = (1..=lead).collect();
    let p = delete_positions(&base, &lead_positions)?;
    Ok((positions, p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Conjugation {
    Complement,
    Reverse,
}

impl Conjugation {
    fn apply(self, p: &Permutation) -> Permutation {
        match self {
            Conjugation::Complement => complement(p),
            Conjugation::Reverse => reverse(p),
        }
    }

    fn map_position(self, pos: usize, n: usize) -> usize {
        match self {
            Conjugation::Complement => pos,
            Conjugation::Reverse => n + 1 - pos,
        }
    }
}

fn is_21(q: &Permutation) -> bool {
    q.entries() == [2, 1]
}

/// The pair of positions `(x, y)`, `x < y`, that the swap exchanges.
fn swap_pair(q: &Permutation, p: &Permutation, r: usize) -> Result<(usize, usize)> {
    if is_21(q) {
        let occ = occurrences(q, p)?;
        let (i, j) = occ
            .tuples
            .iter()
            .map(|t| (t[0], t[1]))
            .min()
            .ok_or_else(|| Error::Precondition(format!("{p} has no inversion")))?;
        if j != i + 1 || p.at(i) != p.at(j) + 1 {
            return Err(ProofGapError::new(
                "swap_upper",
                format!("chosen inversion at ({i},{j}) is not adjacent in both position and value"),
                json!({"q": "21", "p": perm_json(p), "i": i, "j": j}),
            )
            .into());
        }
        return Ok((i, j));
    }

    let n = p.len();
    let lead = sum_components(&complement(q))?.parts[0].len();
    let conj = if q.len() - lead >= 2 { Conjugation::Complement } else { Conjugation::Reverse };
    let working = conj.apply(q);
    let components = sum_components(&working)?;
    let head = components.parts[0].clone();
    let tail = compose_all(&components.parts[1..], SumMode::DirectSum);
    if tail.len() < 2 {
        return Err(ProofGapError::new(
            "swap_upper",
            format!("no split of {working} leaves a tail of size at least 2"),
            json!({"q": perm_json(q), "p": perm_json(p)}),
        )
        .into());
    }
    let u = conj.apply(p);

    // entries with a whole copy of `head` below and to their left
    let head_matcher = PatternMatcher::new(head.entries());
    let ue = u.entries();
    let above_right: Vec<usize> = (1..=n)
        .filter(|&e| {
            let below_left: Vec<u32> = ue[..e - 1].iter().copied().filter(|&x| x < ue[e - 1]).collect();
            head_matcher.is_contained_in(&below_left)
        })
        .collect();
    let v = u.flatten(&above_right)?;
    let witness = || {
        json!({
            "q": perm_json(q), "p": perm_json(p), "working_pattern": perm_json(&working),
            "head": perm_json(&head), "tail": perm_json(&tail), "S": above_right, "v": perm_json(&v),
        })
    };
    let sub_occ = occurrences(&tail, &v)?;
    if sub_occ.count() != r || !sub_occ.pairwise_disjoint() {
        return Err(ProofGapError::new(
            "swap_upper",
            format!(
                "restriction has {} occurrences of {tail} (disjoint: {}), expected {r} disjoint",
                sub_occ.count(),
                sub_occ.pairwise_disjoint()
            ),
            witness(),
        )
        .into());
    }

    let (x, y) = if is_21(&tail) || is_skew_decomposable(&tail) {
        swap_pair(&tail, &v, r)?
    } else if is_sum_decomposable(&tail) {
        // complement is skew-decomposable; positions are unchanged by it
        swap_pair(&complement(&tail), &complement(&v), r)?
    } else {
        return Err(ProofGapError::new("swap_upper", format!("tail {tail} is not separable"), witness()).into());
    };
    let a = conj.map_position(above_right[x - 1], n);
    let b = conj.map_position(above_right[y - 1], n);
    Ok((a.min(b), a.max(b)))
}

fn upper_hypotheses(q: &Permutation) -> Result<()> {
    let report = check_hypotheses(q)?;
    if !report.upper_bound_applies {
        return Err(Error::Hypothesis(format!("{q} is not separable and skew-decomposable")));
    }
    Ok(())
}

/// Returns the position whose value decreases and the swapped permutation,
/// which has exactly one occurrence fewer and no new ones.
pub fn swap_upper(q: &Permutation, p: &Permutation) -> Result<(usize, Permutation)> {
    upper_hypotheses(q)?;
    let occ = occurrences(q, p)?;
    swap_checked(q, p, &occ)
}

fn swap_checked(q: &Permutation, p: &Permutation, occ: &OccurrenceSet) -> Result<(usize, Permutation)> {
    let r = occ.count();
    if r == 0 {
        return Err(Error::Precondition(format!("{p} has no occurrence of {q}")));
    }
    if !occ.pairwise_disjoint() {
        return Err(Error::Precondition(format!("occurrences of {q} in {p} share entries")));
    }
    let (x, y) = swap_pair(q, p, r)?;
    let result = p.swap_positions(x, y)?;
    let decreased = if p.at(x) > p.at(y) { x } else { y };
    let after = occurrences(q, &result)?;
    if after.count() + 1 != r || !after.is_subset_of(occ) {
        return Err(ProofGapError::new(
            "swap_upper",
            format!("swap ({x},{y}) left {} occurrences (expected {}) or created new ones", after.count(), r - 1),
            json!({"q": perm_json(q), "p": perm_json(p), "swap": [x, y], "result": perm_json(&result)}),
        )
        .into());
    }
    Ok((decreased, result))
}

/// Deletes the first entry that lies in two or more occurrences.
pub fn reduce_intersecting(q: &Permutation, p: &Permutation) -> Result<(usize, u32, Permutation)> {
    let occ = occurrences(q, p)?;
    let mult = occ.multiplicity(p.len());
    let i = (1..=p.len())
        .find(|&i| mult[i] >= 2)
        .ok_or_else(|| Error::Precondition(format!("no entry of {p} lies in two occurrences of {q}")))?;
    let result = delete_entry(p, i)?;
    let left = occurrences(q, &result)?.count();
    if left + 2 > occ.count() {
        return Err(ProofGapError::new(
            "reduce_intersecting",
            format!("{left} occurrences remain from {}", occ.count()),
            json!({"q": perm_json(q), "p": perm_json(p), "i": i, "result": perm_json(&result)}),
        )
        .into());
    }
    Ok((i, p.at(i), result))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InjectionKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Counterexample {
    pub input: serde_json::Value,
    pub diagnosis: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proof_gap: Option<ProofGapError>,
}

/// `lhs >= rhs` (lower map) or `lhs <= rhs` (upper map), evaluated exactly.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactInequality {
    pub statement: String,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub lhs: BigUint,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub rhs: BigUint,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub map: InjectionKind,
    pub pattern: Permutation,
    pub n: usize,
    pub r: usize,
    pub domain_size: u64,
    pub injective: bool,
    pub image_in_codomain: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_new_occurrences: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round_trip_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inequality: Option<ExactInequality>,
    pub counterexamples: Vec<Counterexample>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

fn diagnose(input: serde_json::Value, err: Error) -> Counterexample {
    match err {
        Error::ProofGap(gap) => Counterexample { input, diagnosis: gap.to_string(), proof_gap: Some(gap) },
        other => Counterexample { input, diagnosis: other.to_string(), proof_gap: None },
    }
}

fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == k {
            out.push(current.clone());
            return;
        }
        for x in start..=n {
            if n - x + 1 < k - current.len() {
                break;
            }
            current.push(x);
            rec(x + 1, n, k, current, out);
            current.pop();
        }
    }
    rec(1, n, k, &mut current, &mut out);
    out
}

/// Largest `n` for which the verifiers also count the codomain by enumeration.
pub const CODOMAIN_COUNT_LIMIT: usize = 11;

/// Runs the insertion map on every `(S, p)` with `|S| = r` and `p` avoiding
/// `q` of length `n - r|q| - |q_1|`.
pub fn verify_lower(q: &Permutation, n: usize, r: usize) -> Result<VerificationReport> {
    let plan = block_plan(q)?;
    let m = q.len();
    let lead = plan.lead_len();
    if r == 0 {
        return Err(Error::Precondition("r must be at least 1".into()));
    }
    if n < r * m + lead {
        return Err(Error::Precondition(format!("n = {n} is below r|q| + |q_1| = {}", r * m + lead)));
    }
    let base_len = n - r * m - lead;
    let subsets = k_subsets(base_len + 1, r);
    let avoiders: Vec<Permutation> = members(q, base_len, 0)?.collect();
    let domain: Vec<(&Vec<usize>, &Permutation)> =
        subsets.iter().flat_map(|s| avoiders.iter().map(move |p| (s, p))).collect();

    let outcomes: Vec<_> = domain
        .par_iter()
        .map(|&(s, p)| {
            let image = inject_with_plan(&plan, s, p);
            let back = image.as_ref().ok().map(|w| extract_with_plan(&plan, w, r));
            (image, back)
        })
        .collect();

    let mut counterexamples = Vec::new();
    let mut injective = true;
    let mut image_in_codomain = true;
    let mut round_trip_ok = true;
    let mut seen: HashMap<Permutation, usize> = HashMap::with_capacity(domain.len());
    for (idx, ((s, p), (image, back))) in domain.iter().zip(outcomes).enumerate() {
        let input = json!({"S": s, "p": perm_json(p)});
        let w = match image {
            Ok(w) => w,
            Err(e) => {
                image_in_codomain = false;
                counterexamples.push(diagnose(input, e));
                continue;
            }
        };
        if w.len() != n || occurrences(q, &w)?.count() != r {
            image_in_codomain = false;
            counterexamples.push(diagnose(input.clone(), Error::NotInImage(format!("image {w} is not in S_{{{n},{r}}}"))));
        }
        match back {
            Some(Ok((s2, p2))) if &s2 == *s && &p2 == *p => {}
            Some(Ok((s2, p2))) => {
                round_trip_ok = false;
                counterexamples.push(Counterexample {
                    input: input.clone(),
                    diagnosis: format!("round trip gave S={s2:?}, p={p2}"),
                    proof_gap: None,
                });
            }
            Some(Err(e)) => {
                round_trip_ok = false;
                counterexamples.push(diagnose(input.clone(), e));
            }
            None => unreachable!("extraction runs for every image"),
        }
        if let Some(&other) = seen.get(&w) {
            injective = false;
            let (s0, p0) = domain[other];
            counterexamples.push(Counterexample {
                input,
                diagnosis: format!("image {w} also produced by S={s0:?}, p={p0}"),
                proof_gap: None,
            });
        } else {
            seen.insert(w, idx);
        }
    }

    let domain_size = domain.len() as u64;
    let inequality = if n <= CODOMAIN_COUNT_LIMIT {
        let rows = distribution_rows(q, n, Some(r), &EnumConfig::default())?;
        let lhs = rows[n].count(r);
        let rhs = BigUint::from(domain_size);
        let holds = lhs >= rhs;
        if !holds {
            counterexamples.push(Counterexample {
                input: json!({"n": n, "r": r}),
                diagnosis: format!("|S_{{n,r}}(q)| = {lhs} < domain size {rhs}"),
                proof_gap: None,
            });
        }
        Some(ExactInequality {
            statement: format!("|S_{{{n},{r}}}({q})| >= C({},{r}) * |S_{base_len}({q})|", base_len + 1),
            lhs,
            rhs,
            holds,
        })
    } else {
        None
    };

    Ok(VerificationReport {
        map: InjectionKind::Lower,
        pattern: q.clone(),
        n,
        r,
        domain_size,
        injective,
        image_in_codomain,
        no_new_occurrences: None,
        round_trip_ok: Some(round_trip_ok),
        inequality,
        counterexamples,
    })
}

/// Runs the swap map on every member of `S*_{n,r}(q)`.
pub fn verify_upper(q: &Permutation, n: usize, r: usize) -> Result<VerificationReport> {
    upper_hypotheses(q)?;
    if r == 0 {
        return Err(Error::Precondition("r must be at least 1".into()));
    }
    let domain = star_members(q, n, r)?;
    let outcomes: Vec<_> = domain
        .par_iter()
        .map(|p| -> Result<_> {
            let occ = occurrences(q, p)?;
            let swapped = swap_checked(q, p, &occ);
            let checks = match &swapped {
                Ok((_, res)) => {
                    let after = occurrences(q, res)?;
                    Some((after.count() + 1 == r && after.pairwise_disjoint(), after.is_subset_of(&occ)))
                }
                Err(_) => None,
            };
            Ok((swapped, checks))
        })
        .collect::<Result<_>>()?;

    let mut counterexamples = Vec::new();
    let mut injective = true;
    let mut image_in_codomain = true;
    let mut no_new = true;
    let mut seen: HashMap<(usize, Permutation), usize> = HashMap::with_capacity(domain.len());
    for (idx, (p, (swapped, checks))) in domain.iter().zip(outcomes).enumerate() {
        let input = json!({"p": perm_json(p)});
        let (pos, res) = match swapped {
            Ok(out) => out,
            Err(e) => {
                image_in_codomain = false;
                no_new = false;
                counterexamples.push(diagnose(input, e));
                continue;
            }
        };
        let (in_codomain, subset) = checks.expect("checks run for every image");
        if !in_codomain {
            image_in_codomain = false;
            counterexamples.push(Counterexample {
                input: input.clone(),
                diagnosis: format!("image {res} is not in S*_{{{n},{}}}", r - 1),
                proof_gap: None,
            });
        }
        if !subset {
            no_new = false;
            counterexamples.push(Counterexample {
                input: input.clone(),
                diagnosis: format!("image {res} has an occurrence not present before the swap"),
                proof_gap: None,
            });
        }
        match seen.get(&(pos, res.clone())) {
            Some(&other) => {
                injective = false;
                counterexamples.push(Counterexample {
                    input,
                    diagnosis: format!("image ({pos}, {res}) also produced by {}", domain[other]),
                    proof_gap: None,
                });
            }
            None => {
                seen.insert((pos, res), idx);
            }
        }
    }

    let domain_size = domain.len() as u64;
    let codomain = refined_counts(q, n, r - 1)?.star;
    let lhs = BigUint::from(domain_size);
    let rhs = BigUint::from(n) * &codomain;
    let holds = lhs <= rhs;
    if !holds {
        counterexamples.push(Counterexample {
            input: json!({"n": n, "r": r}),
            diagnosis: format!("|S*_{{n,r}}| = {lhs} > n * |S*_{{n,r-1}}| = {rhs}"),
            proof_gap: None,
        });
    }
    Ok(VerificationReport {
        map: InjectionKind::Upper,
        pattern: q.clone(),
        n,
        r,
        domain_size,
        injective,
        image_in_codomain,
        no_new_occurrences: Some(no_new),
        round_trip_ok: None,
        inequality: Some(ExactInequality {
            statement: format!("|S*_{{{n},{r}}}({q})| <= {n} * |S*_{{{n},{}}}({q})|", r - 1),
            lhs,
            rhs,
            holds,
        }),
        counterexamples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_permutations;

    fn perm(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    #[test]
    fn block_plan_examples() {
        let plan = block_plan(&perm("231")).unwrap();
        assert_eq!(plan.chunk_sizes, vec![3]);
        assert_eq!(plan.chunk_value_ranges, vec![(3, 1)]);
        let plan = block_plan(&perm("4231")).unwrap();
        assert_eq!(plan.chunk_sizes, vec![2, 2]);
        assert_eq!(plan.chunk_value_ranges, vec![(4, 3), (2, 1)]);
        let plan = block_plan(&perm("2341")).unwrap();
        assert_eq!(plan.chunk_sizes, vec![4]);
        assert!(matches!(block_plan(&perm("4312")), Err(Error::Hypothesis(_))));
        assert!(matches!(block_plan(&perm("3142")), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn block_plan_longer_pattern() {
        // 1 ⊖ 12 ⊖ 12 ⊖ 1 = 645231
        let q = compose_all(&[perm("1"), perm("12"), perm("12"), perm("1")], SumMode::SkewSum);
        assert_eq!(q, perm("645231"));
        let plan = block_plan(&q).unwrap();
        assert_eq!(plan.parts.len(), 4);
        assert_eq!(plan.chunk_sizes, vec![2, 2, 2]);
        assert_eq!(plan.chunk_sizes.iter().sum::<usize>(), q.len());
    }

    #[test]
    fn anchor_examples() {
        assert_eq!(anchors(&perm("123"), 3, &perm("231")).unwrap(), AnchorVector(vec![1]));
        assert_eq!(anchors(&perm("12"), 1, &perm("231")).unwrap(), AnchorVector(vec![0]));
        // increasing pairs of 153426: the largest minimum is 5 (from 5,6)
        assert_eq!(anchors(&perm("153426"), 7, &perm("231")).unwrap(), AnchorVector(vec![5]));
        let a = anchors(&perm("1234"), 5, &perm("4231")).unwrap();
        assert_eq!(a.0.len(), 2);
        assert!(a.is_weakly_decreasing());
    }

    #[test]
    fn inject_examples() {
        let q = perm("231");
        let w1 = inject_lower(&q, &[1], &perm("1")).unwrap();
        assert_eq!(w1, perm("153426"));
        let w2 = inject_lower(&q, &[2], &perm("1")).unwrap();
        assert_eq!(occurrences(&q, &w2).unwrap().count(), 1);
        assert_ne!(w1, w2);
        let w3 = inject_lower(&q, &[1], &Permutation::default()).unwrap();
        assert_eq!(w3, perm("15342"));
    }

    #[test]
    fn inject_rejects_bad_input() {
        let q = perm("231");
        assert!(matches!(inject_lower(&q, &[3], &perm("1")), Err(Error::Precondition(_))));
        assert!(matches!(inject_lower(&q, &[], &perm("1")), Err(Error::Precondition(_))));
        assert!(matches!(inject_lower(&q, &[2, 1], &perm("12")), Err(Error::NotIncreasing(_))));
        assert!(matches!(inject_lower(&q, &[1], &perm("231")), Err(Error::Precondition(_))));
        assert!(matches!(inject_lower(&perm("4312"), &[1], &perm("1")), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn extract_examples() {
        let q = perm("231");
        assert_eq!(extract_lower(&q, &perm("153426"), 1).unwrap(), (vec![1], perm("1")));
        assert!(matches!(extract_lower(&q, &perm("123456"), 1), Err(Error::NotInImage(_))));
    }

    #[test]
    fn round_trip_small_domains() {
        for q in ["231", "2341", "3412", "4231", "4213", "4123"] {
            let q = perm(q);
            for r in 1..=2 {
                for base in 0..=3 {
                    for p in all_permutations(base) {
                        if crate::perm::contains(&p, &q).unwrap() {
                            continue;
                        }
                        for s in k_subsets(base + 1, r) {
                            let w = inject_lower(&q, &s, &p).unwrap();
                            assert_eq!(extract_lower(&q, &w, r).unwrap(), (s.clone(), p.clone()), "q={q} w={w}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn swap_examples() {
        assert_eq!(swap_upper(&perm("21"), &perm("21")).unwrap(), (1, perm("12")));
        assert_eq!(swap_upper(&perm("21"), &perm("2143")).unwrap(), (1, perm("1243")));
        assert_eq!(swap_upper(&perm("231"), &perm("231")).unwrap(), (2, perm("321")));
    }

    #[test]
    fn swap_rejects_bad_input() {
        assert!(matches!(swap_upper(&perm("21"), &perm("321")), Err(Error::Precondition(_))));
        assert!(matches!(swap_upper(&perm("21"), &perm("123")), Err(Error::Precondition(_))));
        assert!(matches!(swap_upper(&perm("3142"), &perm("3142")), Err(Error::Hypothesis(_))));
        assert!(matches!(swap_upper(&perm("12"), &perm("12")), Err(Error::Hypothesis(_))));
    }

    #[test]
    fn reduce_examples() {
        let (i, v, res) = reduce_intersecting(&perm("21"), &perm("321")).unwrap();
        assert_eq!((i, v, res), (1, 3, perm("21")));
        assert!(matches!(reduce_intersecting(&perm("21"), &perm("2143")), Err(Error::Precondition(_))));
    }

    #[test]
    fn reduce_on_all_intersecting_231_at_5() {
        let q = perm("231");
        let mut seen = 0;
        for p in all_permutations(5) {
            let occ = occurrences(&q, &p).unwrap();
            if occ.count() >= 2 && !occ.pairwise_disjoint() {
                let (_, _, res) = reduce_intersecting(&q, &p).unwrap();
                assert!(occurrences(&q, &res).unwrap().count() + 2 <= occ.count());
                seen += 1;
            }
        }
        assert!(seen > 0);
    }

    #[test]
    fn verify_examples() {
        let report = verify_lower(&perm("231"), 6, 1).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.domain_size, 2);
        let ineq = report.inequality.unwrap();
        assert_eq!((ineq.lhs, ineq.rhs), (BigUint::from(84u32), BigUint::from(2u32)));

        let report = verify_lower(&perm("231"), 8, 1).unwrap();
        assert!(report.passed());
        assert_eq!(report.domain_size, 20);

        let report = verify_upper(&perm("21"), 4, 1).unwrap();
        assert!(report.passed());
        assert_eq!(report.domain_size, 3);

        let report = verify_upper(&perm("231"), 4, 1).unwrap();
        assert!(report.passed(), "{:?}", report.counterexamples.first());
    }

    #[test]
    fn upper_restriction_gap_is_reported() {
        // S = {6, 5, 3} in the reversed picture flattens to 321: three
        // overlapping inversions where the recursion expects one.
        let err = swap_upper(&perm("231"), &perm("132564")).unwrap_err();
        let Error::ProofGap(gap) = err else { panic!("expected a proof gap, got {err:?}") };
        assert_eq!(gap.witness["v"], "321");
        assert_eq!(gap.witness["tail"], "21");

        let report = verify_upper(&perm("231"), 6, 1).unwrap();
        assert!(report.injective);
        assert!(!report.passed());
        assert!(report.counterexamples.iter().all(|c| c.proof_gap.is_some()));
        assert!(report.inequality.unwrap().holds);
    }

    #[test]
    fn verifier_hypothesis_errors() {
        assert!(matches!(verify_lower(&perm("4321"), 8, 1), Err(Error::Hypothesis(_))));
        assert!(matches!(verify_upper(&perm("2413"), 6, 1), Err(Error::Hypothesis(_))));
        assert!(matches!(verify_lower(&perm("231"), 4, 1), Err(Error::Precondition(_))));
    }

    #[test]
    fn subsets_enumerate() {
        assert_eq!(k_subsets(4, 2).len(), 6);
        assert_eq!(k_subsets(3, 3), vec![vec![1, 2, 3]]);
        assert!(k_subsets(2, 3).is_empty());
    }
}
