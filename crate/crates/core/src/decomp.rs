//! Direct-sum and skew-sum decomposition, separability, and the structural
//! hypotheses that gate the counting bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{complement, compose_all, contains, Permutation, SumMode};

/// A maximal decomposition `parts[0] ∘ parts[1] ∘ ...` under one sum mode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentList {
    pub mode: SumMode,
    pub parts: Vec<Permutation>,
}

impl ComponentList {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn compose(&self) -> Permutation {
        compose_all(&self.parts, self.mode)
    }
}

/// Greedy shortest-prefix splitting: a cut is allowed after position `j`
/// exactly when the prefix's values are `{1..j}`.
pub fn sum_components(p: &Permutation) -> Result<ComponentList> {
    if p.is_empty() {
        return Err(Error::EmptyPermutation);
    }
    let mut parts = Vec::new();
    let mut start = 0;
    let mut max = 0;
    for (i, &v) in p.entries().iter().enumerate() {
        max = max.max(v);
        if max as usize == i + 1 {
            parts.push(Permutation::standardize(&p.entries()[start..=i]));
            start = i + 1;
        }
    }
    Ok(ComponentList { mode: SumMode::DirectSum, parts })
}

pub fn skew_components(p: &Permutation) -> Result<ComponentList> {
    let sum = sum_components(&complement(p))?;
    Ok(ComponentList {
        mode: SumMode::SkewSum,
        parts: sum.parts.iter().map(complement).collect(),
    })
}

pub fn is_indecomposable(p: &Permutation) -> bool {
    sum_components(p).map(|c| c.len() == 1).unwrap_or(false)
}

pub fn is_skew_decomposable(p: &Permutation) -> bool {
    skew_components(p).map(|c| c.len() >= 2).unwrap_or(false)
}

pub fn is_sum_decomposable(p: &Permutation) -> bool {
    sum_components(p).map(|c| c.len() >= 2).unwrap_or(false)
}

/// Avoids both 2413 and 3142.
pub fn is_separable(p: &Permutation) -> bool {
    let forbidden = [
        Permutation::from_vec_unchecked(vec![2, 4, 1, 3]),
        Permutation::from_vec_unchecked(vec![3, 1, 4, 2]),
    ];
    forbidden.iter().all(|f| !contains(p, f).expect("nonempty pattern"))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub pattern: Permutation,
    pub is_indecomposable: bool,
    pub is_skew_decomposable: bool,
    pub skew_parts: Vec<Permutation>,
    pub middle_parts_not_one: bool,
    pub is_separable: bool,
    pub lower_bound_applies: bool,
    pub upper_bound_applies: bool,
    pub thm41_applies: bool,
}

pub fn check_hypotheses(q: &Permutation) -> Result<HypothesisReport> {
    if q.len() < 2 {
        return Err(Error::PatternTooShort(format!("{q:?} has length {} < 2", q.len())));
    }
    let skew = skew_components(q)?;
    let k = skew.len();
    let is_indecomposable = is_indecomposable(q);
    let is_skew_decomposable = k >= 2;
    let middle_parts_not_one = k < 3 || skew.parts[1..k - 1].iter().all(|part| part.len() != 1);
    let is_separable = is_separable(q);
    let lower_bound_applies = is_indecomposable && is_skew_decomposable && middle_parts_not_one;
    let upper_bound_applies = is_separable && is_skew_decomposable;
    Ok(HypothesisReport {
        pattern: q.clone(),
        is_indecomposable,
        is_skew_decomposable,
        skew_parts: skew.parts,
        middle_parts_not_one,
        is_separable,
        lower_bound_applies,
        upper_bound_applies,
        thm41_applies: lower_bound_applies && upper_bound_applies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::all_permutations;

    fn perm(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn parts(list: &ComponentList) -> Vec<String> {
        list.parts.iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn sum_component_examples() {
        assert_eq!(parts(&sum_components(&perm("1324")).unwrap()), ["1", "21", "1"]);
        assert_eq!(parts(&sum_components(&perm("231")).unwrap()), ["231"]);
        assert_eq!(parts(&sum_components(&perm("123")).unwrap()), ["1", "1", "1"]);
        assert!(sum_components(&Permutation::default()).is_err());
    }

    #[test]
    fn skew_component_examples() {
        assert_eq!(parts(&skew_components(&perm("4231")).unwrap()), ["1", "12", "1"]);
        assert_eq!(parts(&skew_components(&perm("231")).unwrap()), ["12", "1"]);
        assert_eq!(parts(&skew_components(&perm("3142")).unwrap()), ["3142"]);
        assert!(skew_components(&Permutation::default()).is_err());
    }

    #[test]
    fn separability_examples() {
        assert!(!is_separable(&perm("3142")));
        assert!(!is_separable(&perm("2413")));
        assert!(is_separable(&perm("4231")));
        assert!(is_separable(&Permutation::default()));
    }

    #[test]
    fn hypothesis_examples() {
        let r = check_hypotheses(&perm("231")).unwrap();
        assert!(r.lower_bound_applies && r.upper_bound_applies && r.thm41_applies);
        let r = check_hypotheses(&perm("4312")).unwrap();
        assert_eq!(r.skew_parts, vec![perm("1"), perm("1"), perm("12")]);
        assert!(!r.middle_parts_not_one);
        assert!(!r.lower_bound_applies && r.upper_bound_applies && !r.thm41_applies);
        let r = check_hypotheses(&perm("3142")).unwrap();
        assert!(!r.is_skew_decomposable && !r.is_separable);
        assert!(!r.lower_bound_applies && !r.upper_bound_applies && !r.thm41_applies);
        assert!(check_hypotheses(&perm("1")).is_err());
    }

    #[test]
    fn decompositions_round_trip() {
        for n in 1..=8 {
            for p in all_permutations(n) {
                let sum = sum_components(&p).unwrap();
                let skew = skew_components(&p).unwrap();
                assert_eq!(sum.compose(), p);
                assert_eq!(skew.compose(), p);
                // maximality: no part splits further
                assert!(sum.parts.iter().all(is_indecomposable));
                assert!(skew.parts.iter().all(|q| !is_skew_decomposable(q)));
            }
        }
    }

    /// Independent separability oracle: a permutation is separable iff it is
    /// 1 or it splits as a nontrivial direct or skew sum of separable parts,
    /// trying every split point.
    fn separable_by_tree(p: &[u32]) -> bool {
        let n = p.len();
        if n <= 1 {
            return true;
        }
        for cut in 1..n {
            let (left, right) = p.split_at(cut);
            let lmax = *left.iter().max().unwrap();
            let lmin = *left.iter().min().unwrap();
            let direct = lmax as usize == cut;
            let skew = lmin as usize == n - cut + 1;
            if direct || skew {
                let l = Permutation::standardize(left);
                let r = Permutation::standardize(right);
                if separable_by_tree(l.entries()) && separable_by_tree(r.entries()) {
                    return true;
                }
            }
        }
        false
    }

    #[test]
    fn separability_agrees_with_tree_construction() {
        for n in 0..=8 {
            for p in all_permutations(n) {
                assert_eq!(is_separable(&p), separable_by_tree(p.entries()), "{p}");
            }
        }
    }

    #[test]
    fn hypothesis_flags_against_definitions() {
        for p in all_permutations(4) {
            let r = check_hypotheses(&p).unwrap();
            // brute-force definitions, independent of the component scanners
            let entries = p.entries();
            let direct_cut = (1..4).any(|c| *entries[..c].iter().max().unwrap() as usize == c);
            let skew_cut = (1..4).any(|c| *entries[..c].iter().min().unwrap() as usize == 4 - c + 1);
            assert_eq!(r.is_indecomposable, !direct_cut, "{p}");
            assert_eq!(r.is_skew_decomposable, skew_cut, "{p}");
            assert_eq!(r.thm41_applies, r.lower_bound_applies && r.upper_bound_applies);
        }
        let applies: Vec<String> = all_permutations(4)
            .into_iter()
            .filter(|p| check_hypotheses(p).unwrap().thm41_applies)
            .map(|p| p.to_string())
            .collect();
        assert_eq!(applies, ["2341", "2431", "3241", "3412", "4123", "4132", "4213", "4231"]);
    }
}
