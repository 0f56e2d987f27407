//! Closed forms, generating-function expansion, ratio tables, effective Wilf
//! classes and the exact inequality audit.

pub mod series;

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_integer::{binomial, Integer};
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::decomp::check_hypotheses;
use crate::enumeration::{count_avoiders, distribution_rows, refined_distribution, EnumConfig, RefinedCounts};
use crate::error::{Error, Result};
use crate::perm::{all_permutations, Permutation};
use crate::table::{table_build, CountTable};
use crate::RationalSeries;
use series::PowerSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedForm {
    /// `C(2n, n) / (n + 1)`
    Catalan,
    /// `(3/n) C(2n, n+3)`: permutations with one 321 occurrence.
    Noonan321,
    /// `C(2n-3, n-3)`: permutations with one 231 occurrence.
    Bona231,
}

fn binom(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    binomial(BigUint::from(n), BigUint::from(k))
}

fn exact_div(num: BigUint, den: BigUint, what: &str) -> Result<BigUint> {
    let (quot, rem) = num.div_rem(&den);
    if !rem.is_zero() {
        return Err(Error::InexactDivision(format!("{what}: {num} / {den}")));
    }
    Ok(quot)
}

pub fn closed_form(kind: ClosedForm, n: usize) -> Result<BigUint> {
    match kind {
        ClosedForm::Catalan => exact_div(binom(2 * n, n), BigUint::from(n + 1), "catalan"),
        ClosedForm::Noonan321 => {
            if n == 0 {
                return Err(Error::Precondition("noonan321 needs n >= 1".into()));
            }
            exact_div(BigUint::from(3u32) * binom(2 * n, n + 3), BigUint::from(n), "noonan321")
        }
        ClosedForm::Bona231 => Ok(if n < 3 { BigUint::zero() } else { binom(2 * n - 3, n - 3) }),
    }
}

/// The stated linear coefficient of the 1342 denominator; it gives constant term 4/3.
pub const PRINTED_1342_LINEAR_COEFFICIENT: i64 = 12;

/// `32z / (-8z^2 + c z + 1 - (1 - 8z)^{3/2})` expanded to `z^order`.
pub fn series_1342(order: usize, linear_coefficient: &BigRational) -> Result<RationalSeries> {
    let work = order + 1;
    let int = |v: i64| BigRational::from_integer(BigInt::from(v));
    let root = PowerSeries::binomial(int(-8), BigRational::new(3.into(), 2.into()), work);
    let poly = PowerSeries::new(vec![int(1), linear_coefficient.clone(), int(-8)], work);
    let denominator = (&poly - &root).shift_down(1)?;
    if denominator.coeff(0).is_zero() {
        return Err(Error::Series("denominator vanishes to second order at z = 0".into()));
    }
    // the numerator's z cancels against the denominator's
    let expansion = denominator.reciprocal()?.scale(&int(32));
    Ok(expansion.truncate(order))
}

/// Picks the linear coefficient that makes the constant term equal
/// `constant_term` (the number of empty permutations, 1).
pub fn resolve_1342_linear_coefficient(constant_term: &BigRational) -> Result<BigRational> {
    if constant_term.is_zero() {
        return Err(Error::Series("constant term must be nonzero".into()));
    }
    // with c = 0 the denominator's z-coefficient is d0; it moves one-for-one with c
    let zero = BigRational::zero();
    let d0 = BigRational::from_integer(32.into()) / series_1342(0, &zero)?.coeff(0);
    Ok(BigRational::from_integer(32.into()) / constant_term - d0)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesCheck {
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub linear_coefficient: BigRational,
    #[serde(serialize_with = "crate::serde_util::rationals")]
    pub coefficients: Vec<BigRational>,
    /// Largest `n` compared against enumeration.
    pub checked_up_to: usize,
    /// First index where the expansion and enumeration disagree.
    pub first_mismatch: Option<usize>,
}

/// The printed form against the enumeration-resolved form of the 1342 series.
#[derive(Debug, Clone, Serialize)]
pub struct SeriesDiscrepancy {
    pub printed: SeriesCheck,
    pub resolved: SeriesCheck,
    #[serde(serialize_with = "crate::serde_util::biguints")]
    pub enumerated: Vec<BigUint>,
}

fn check_against(coeffs: &[BigRational], counts: &[BigUint]) -> Option<usize> {
    counts
        .iter()
        .zip(coeffs)
        .position(|(count, c)| *c != BigRational::from_integer(BigInt::from(count.clone())))
}

/// Expands both forms to `order` and compares them with `|S_n(1342)|` for `n <= enumerate_to`.
pub fn series_1342_report(order: usize, enumerate_to: usize) -> Result<SeriesDiscrepancy> {
    let q: Permutation = "1342".parse()?;
    let enumerated = (0..=enumerate_to).map(|n| count_avoiders(&q, n)).collect::<Result<Vec<_>>>()?;
    let build = |c: BigRational| -> Result<SeriesCheck> {
        let coefficients = series_1342(order.max(enumerate_to), &c)?.into_coeffs();
        let first_mismatch = check_against(&coefficients, &enumerated);
        Ok(SeriesCheck {
            linear_coefficient: c,
            coefficients: coefficients[..=order].to_vec(),
            checked_up_to: enumerate_to,
            first_mismatch,
        })
    };
    let printed = build(BigRational::from_integer(PRINTED_1342_LINEAR_COEFFICIENT.into()))?;
    let one = BigRational::from_integer(BigInt::from(enumerated[0].clone()));
    let resolved = build(resolve_1342_linear_coefficient(&one)?)?;
    Ok(SeriesDiscrepancy { printed, resolved, enumerated })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegevRow {
    pub n: usize,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub avoiders: BigUint,
    /// True when `value` is the square of the ratio (half-integral exponent).
    pub squared: bool,
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub value: BigRational,
}

/// `|S_n(k...1)| n^{(k^2-2k)/2} / (k-1)^{2n}`, squared when the exponent is
/// half-integral. Diagnostic only.
pub fn regev_ratio(k: usize, n_max: usize) -> Result<Vec<RegevRow>> {
    if k < 2 {
        return Err(Error::Precondition(format!("k = {k} < 2")));
    }
    let pattern = Permutation::decreasing(k);
    let twice_exponent = (k * k - 2 * k) as u32;
    let squared = twice_exponent % 2 == 1;
    (1..=n_max)
        .map(|n| {
            let avoiders = count_avoiders(&pattern, n)?;
            let nn = BigInt::from(n);
            let base = BigInt::from(k - 1);
            let value = if squared {
                let a = BigInt::from(avoiders.clone());
                BigRational::new(&a * &a * Pow::pow(&nn, twice_exponent), Pow::pow(&base, 4 * n as u32))
            } else {
                BigRational::new(
                    BigInt::from(avoiders.clone()) * Pow::pow(&nn, twice_exponent / 2),
                    Pow::pow(&base, 2 * n as u32),
                )
            };
            Ok(RegevRow { n, avoiders, squared, value })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub n: usize,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub count: BigUint,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub avoiders: BigUint,
    /// `count / (n^r * avoiders)`
    #[serde(serialize_with = "crate::serde_util::rational")]
    pub rho: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioTable {
    pub pattern: Permutation,
    pub r: usize,
    pub rows: Vec<RatioRow>,
    /// Over rows with a positive ratio.
    #[serde(serialize_with = "crate::serde_util::opt_rational")]
    pub min: Option<BigRational>,
    #[serde(serialize_with = "crate::serde_util::opt_rational")]
    pub max: Option<BigRational>,
}

impl RatioTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count,avoiders,rho,rho_approx\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{:.6e}\n",
                row.n,
                row.count,
                row.avoiders,
                row.rho,
                row.rho.to_f64().unwrap_or(f64::NAN)
            ));
        }
        out
    }
}

pub fn ratio_from_table(table: &CountTable, r: usize) -> Result<RatioTable> {
    let mut rows = Vec::new();
    for (&n, row) in &table.rows {
        if n == 0 {
            continue;
        }
        let count = row.counts.get(r).cloned().ok_or_else(|| {
            Error::Precondition(format!("table for {} only records r <= {}", table.pattern, table.r_max))
        })?;
        let avoiders = row.counts[0].clone();
        if avoiders.is_zero() {
            return Err(Error::Precondition(format!("|S_{n}({})| = 0", table.pattern)));
        }
        let den = BigInt::from(avoiders.clone()) * Pow::pow(&BigInt::from(n), r as u32);
        let rho = BigRational::new(BigInt::from(count.clone()), den);
        rows.push(RatioRow { n, count, avoiders, rho });
    }
    let positive = rows.iter().map(|row| &row.rho).filter(|rho| !rho.is_zero());
    let min = positive.clone().min().cloned();
    let max = positive.max().cloned();
    Ok(RatioTable { pattern: table.pattern.clone(), r, rows, min, max })
}

pub fn ratio_table(
    q: &Permutation,
    r: usize,
    n_max: usize,
    cache_dir: Option<&Path>,
    cfg: &EnumConfig,
) -> Result<RatioTable> {
    let built = table_build(q, n_max, r, cache_dir, cfg)?;
    ratio_from_table(&built.table, r)
}

/// `(n, counts r = 0..=r_max, overflow)` over the grid.
pub type Signature = Vec<(usize, Vec<BigUint>, BigUint)>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilfPartition {
    pub length: usize,
    pub n_max: usize,
    pub r_max: usize,
    /// Blocks in order of their smallest member; members sorted.
    pub blocks: Vec<Vec<Permutation>>,
}

impl WilfPartition {
    pub fn block_of(&self, p: &Permutation) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(p))
    }
}

pub fn signature(q: &Permutation, n_max: usize, r_max: usize, cfg: &EnumConfig) -> Result<Signature> {
    Ok(distribution_rows(q, n_max, Some(r_max), cfg)?
        .into_iter()
        .skip(1)
        .map(|d| (d.n, d.counts, d.overflow))
        .collect())
}

/// Groups all patterns of `length` by identical count signatures.
pub fn wilf_partition(length: usize, n_max: usize, r_max: usize, cfg: &EnumConfig) -> Result<WilfPartition> {
    let patterns = all_permutations(length);
    let signatures = patterns
        .par_iter()
        .map(|q| signature(q, n_max, r_max, cfg))
        .collect::<Result<Vec<_>>>()?;
    let mut groups: BTreeMap<Signature, Vec<Permutation>> = BTreeMap::new();
    for (q, sig) in patterns.into_iter().zip(signatures) {
        groups.entry(sig).or_default().push(q);
    }
    let mut blocks: Vec<Vec<Permutation>> = groups.into_values().collect();
    for block in &mut blocks {
        block.sort();
    }
    blocks.sort();
    Ok(WilfPartition { length, n_max, r_max, blocks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InequalityFamily {
    /// `|S_{n,r}| >= C(n-rm-l+1, r) |S_{n-rm-l}|`
    LowerInjection,
    /// `|S*_{n,r}| <= n |S*_{n,r-1}|`
    StarSwap,
    /// `|S^int_{n,r}| <= n^2 sum_{i<=r-2} |S_{n-1,i}|`
    IntersectingReduction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditPoint {
    pub family: InequalityFamily,
    pub n: usize,
    pub r: usize,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub lhs: BigUint,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub rhs: BigUint,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub pattern: Permutation,
    pub n_max: usize,
    pub r_max: usize,
    pub lower_bound_applies: bool,
    pub upper_bound_applies: bool,
    pub points: Vec<AuditPoint>,
}

impl AuditReport {
    pub fn failures(&self) -> impl Iterator<Item = &AuditPoint> {
        self.points.iter().filter(|p| !p.holds)
    }

    pub fn all_hold(&self) -> bool {
        self.points.iter().all(|p| p.holds)
    }
}

/// Checks the three inequality families exactly at every computable grid point.
pub fn inequality_audit(q: &Permutation, n_max: usize, r_max: usize) -> Result<AuditReport> {
    let report = check_hypotheses(q)?;
    let m = q.len();
    let lead = report.skew_parts[0].len();
    // refined[n][r] for n in 0..=n_max
    let refined: Vec<Vec<RefinedCounts>> = (0..=n_max)
        .into_par_iter()
        .map(|n| refined_distribution(q, n, r_max))
        .collect::<Result<_>>()?;
    let total = |n: usize, r: usize| refined[n][r].total();

    let mut points = Vec::new();
    let mut push = |family, n, r, lhs: BigUint, rhs: BigUint, lower_is_lhs: bool| {
        let holds = if lower_is_lhs { lhs <= rhs } else { lhs >= rhs };
        points.push(AuditPoint { family, n, r, lhs, rhs, holds });
    };
    for n in 1..=n_max {
        for r in 1..=r_max {
            if report.lower_bound_applies && n >= r * m + lead {
                let base = n - r * m - lead;
                let rhs = binom(base + 1, r) * total(base, 0);
                push(InequalityFamily::LowerInjection, n, r, total(n, r), rhs, false);
            }
            if report.upper_bound_applies {
                let rhs = BigUint::from(n) * &refined[n][r - 1].star;
                push(InequalityFamily::StarSwap, n, r, refined[n][r].star.clone(), rhs, true);
            }
            let tail: BigUint = (0..r.saturating_sub(1)).map(|i| total(n - 1, i)).sum();
            let rhs = BigUint::from(n * n) * tail;
            push(InequalityFamily::IntersectingReduction, n, r, refined[n][r].intersecting.clone(), rhs, true);
        }
    }
    Ok(AuditReport {
        pattern: q.clone(),
        n_max,
        r_max,
        lower_bound_applies: report.lower_bound_applies,
        upper_bound_applies: report.upper_bound_applies,
        points,
    })
}

/// The ratio `|S_{n,r}| / (n^r |S_n|)` rendered approximately, for display only.
pub fn approx(rho: &BigRational) -> f64 {
    rho.to_f64().unwrap_or(f64::NAN)
}
