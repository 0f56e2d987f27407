//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use permlab::analysis::{inequality_audit, series_1342_report, wilf_partition};
use permlab::decomp::check_hypotheses;
use permlab::enumeration::{count_avoiders, distribution_rows, factorial, occurrence_distribution};
use permlab::injections::{block_plan, verify_lower, verify_upper};
use permlab::perm::{all_permutations, symmetry_orbit};
use permlab::{EnumConfig, Permutation};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn perm(s: &str) -> Permutation {
    s.parse().unwrap()
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn catalan(n: u64) -> BigUint {
    binomial(big(2 * n), big(n)) / big(n + 1)
}

fn c1_catalan() -> Outcome {
    for q in ["231", "321"] {
        for n in 0..=10u64 {
            let got = count_avoiders(&perm(q), n as usize).map_err(|e| e.to_string())?;
            if got != catalan(n) {
                return Err(format!("|S_{n}({q})| = {got}, Catalan gives {}", catalan(n)));
            }
        }
    }
    Ok("231 and 321 avoiders match Catalan numbers for n <= 10".into())
}

fn c2_one_occurrence() -> Outcome {
    let noonan = |n: u64| {
        if n < 3 {
            big(0)
        } else {
            big(3) * binomial(big(2 * n), big(n + 3)) / big(n)
        }
    };
    let bona = |n: u64| if n < 3 { big(0) } else { binomial(big(2 * n - 3), big(n - 3)) };
    let cfg = EnumConfig::default();
    for (q, formula) in [("321", &noonan as &dyn Fn(u64) -> BigUint), ("231", &bona)] {
        let rows = distribution_rows(&perm(q), 10, Some(1), &cfg).map_err(|e| e.to_string())?;
        for row in rows {
            let want = formula(row.n as u64);
            if row.count(1) != want {
                return Err(format!("|S_{{{},1}}({q})| = {}, formula gives {want}", row.n, row.count(1)));
            }
        }
    }
    let spot = |q: &str| occurrence_distribution(&perm(q), 5, Some(1), &cfg).map(|d| d.count(1));
    let (a, b) = (spot("321").map_err(|e| e.to_string())?, spot("231").map_err(|e| e.to_string())?);
    if (a.clone(), b.clone()) != (big(27), big(21)) {
        return Err(format!("n = 5 spot values {a}, {b}"));
    }
    Ok("closed forms hold for n <= 10; n = 5 gives 27 and 21".into())
}

fn c3_series() -> Outcome {
    let report = series_1342_report(8, 8).map_err(|e| e.to_string())?;
    let four_thirds = BigRational::new(4.into(), 3.into());
    if report.printed.coefficients[0] != four_thirds {
        return Err(format!("printed constant term is {}", report.printed.coefficients[0]));
    }
    if report.printed.first_mismatch != Some(0) {
        return Err("printed coefficient was not flagged at n = 0".into());
    }
    if let Some(i) = report.resolved.first_mismatch {
        return Err(format!("resolved series disagrees with enumeration at n = {i}"));
    }
    println!("  discrepancy report: {}", serde_json::to_string(&report).unwrap());
    Ok(format!(
        "c = {} matches |S_n(1342)| for n <= 8; printed c = 12 gives constant term 4/3",
        report.resolved.linear_coefficient
    ))
}

fn c4_wilf_equalities() -> Outcome {
    for n in 0..=9 {
        let a = count_avoiders(&perm("3412"), n).map_err(|e| e.to_string())?;
        let b = count_avoiders(&perm("4321"), n).map_err(|e| e.to_string())?;
        let c = count_avoiders(&perm("4312"), n).map_err(|e| e.to_string())?;
        if a != b || a != c {
            return Err(format!("n = {n}: 3412 -> {a}, 4321 -> {b}, 4312 -> {c}"));
        }
    }
    Ok("|S_n(3412)| = |S_n(4321)| = |S_n(4312)| for n <= 9".into())
}

fn c5_effective_classes() -> Outcome {
    let part = wilf_partition(4, 7, 2, &EnumConfig::default()).map_err(|e| e.to_string())?;
    if part.blocks.len() != 7 {
        return Err(format!("{} blocks", part.blocks.len()));
    }
    let reps = ["4321", "4312", "4123", "3412", "4231", "4213", "3142"];
    let blocks: BTreeSet<_> = reps.iter().filter_map(|r| part.block_of(&perm(r))).collect();
    if blocks.len() != 7 {
        return Err("representatives share a block".into());
    }
    Ok("7 blocks, one representative each".into())
}

fn c6_hypothesis_gate() -> Outcome {
    let settled = ["3412", "4231", "4213", "4123"];
    let mut seen = BTreeSet::new();
    let mut applies_in = BTreeSet::new();
    for q in all_permutations(4) {
        let class: BTreeSet<Permutation> = symmetry_orbit(&q).into_iter().collect();
        let rep = class.iter().next().unwrap().clone();
        if !seen.insert(rep) {
            continue;
        }
        let mut any = false;
        for p in &class {
            any |= check_hypotheses(p).map_err(|e| e.to_string())?.thm41_applies;
        }
        let named = settled.iter().any(|s| class.contains(&perm(s)));
        if any != named {
            let list: Vec<String> = class.iter().map(|p| p.to_string()).collect();
            return Err(format!("class {list:?}: applies = {any}, expected {named}"));
        }
        if any {
            applies_in.insert(class.iter().next().unwrap().to_string());
        }
    }
    for q in ["4321", "4312", "3142"] {
        if check_hypotheses(&perm(q)).map_err(|e| e.to_string())?.thm41_applies {
            return Err(format!("{q} passes the gate"));
        }
    }
    for q in settled {
        if !check_hypotheses(&perm(q)).map_err(|e| e.to_string())?.thm41_applies {
            return Err(format!("{q} fails the gate"));
        }
    }
    Ok(format!("{} of {} symmetry classes pass; 4321, 4312, 3142 do not", applies_in.len(), seen.len()))
}

fn c7_lower_injection() -> Outcome {
    let mut checked = 0usize;
    let mut elements = 0u64;
    for q in ["231", "2341", "3412", "4231", "4213", "4123"] {
        let q = perm(q);
        let m = q.len();
        let lead = block_plan(&q).map_err(|e| e.to_string())?.lead_len();
        let mut grid: Vec<(usize, usize)> = (m + lead..=m + lead + 4).map(|n| (n, 1)).collect();
        let mut n = 2 * m + lead;
        loop {
            let base = n - 2 * m - lead;
            let avoiders = count_avoiders(&q, base).map_err(|e| e.to_string())?;
            let domain = binomial(big(base as u64 + 1), big(2)) * avoiders;
            if domain > big(100_000) {
                break;
            }
            grid.push((n, 2));
            n += 1;
        }
        for (n, r) in grid {
            let report = verify_lower(&q, n, r).map_err(|e| e.to_string())?;
            if !report.passed() {
                let first = report.counterexamples.first().map(|c| serde_json::to_string(c).unwrap());
                return Err(format!("q = {q}, n = {n}, r = {r}: {first:?}"));
            }
            checked += 1;
            elements += report.domain_size;
        }
    }
    Ok(format!("{checked} grid points, {elements} domain elements, no counterexamples"))
}

fn c8_upper_injection() -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut first_witness = None;
    for q in ["21", "231", "3412", "4231", "4213"] {
        let q = perm(q);
        let n_max = if q.len() == 4 { 7 } else { 8 };
        for n in q.len()..=n_max {
            for r in 1..=3 {
                let report = verify_upper(&q, n, r).map_err(|e| e.to_string())?;
                checked += 1;
                if !report.passed() {
                    let gaps = report.counterexamples.iter().filter(|c| c.proof_gap.is_some()).count();
                    failures.push(format!("{q}/n={n}/r={r}: {gaps} of {}", report.domain_size));
                    if first_witness.is_none() {
                        first_witness = report.counterexamples.first().map(|c| serde_json::to_string(c).unwrap());
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        return Ok(format!("{checked} grid points, no proof gaps"));
    }
    println!("  proof gaps (q/n/r: inputs hit of domain): {}", failures.join(", "));
    if let Some(w) = first_witness {
        println!("  first witness: {w}");
    }
    Err(format!("{} of {checked} grid points report proof gaps", failures.len()))
}

fn c9_audit() -> Outcome {
    let mut points = 0;
    for q in ["231", "3412", "4231", "4213", "4123"] {
        let report = inequality_audit(&perm(q), 9, 3).map_err(|e| e.to_string())?;
        if let Some(f) = report.failures().next() {
            return Err(format!("{q}: {}", serde_json::to_string(f).unwrap()));
        }
        points += report.points.len();
    }
    Ok(format!("{points} audit points hold"))
}

fn c10_consistency() -> Outcome {
    let par = EnumConfig::default();
    let seq = EnumConfig::sequential();
    for q in ["231", "321", "3412", "4231", "1342"] {
        let a = distribution_rows(&perm(q), 9, None, &par).map_err(|e| e.to_string())?;
        let b = distribution_rows(&perm(q), 9, None, &seq).map_err(|e| e.to_string())?;
        for row in &a {
            if row.total() != factorial(row.n) {
                return Err(format!("{q}, n = {}: row sums to {}", row.n, row.total()));
            }
        }
        if serde_json::to_string(&a).unwrap() != serde_json::to_string(&b).unwrap() {
            return Err(format!("{q}: parallel and sequential differ"));
        }
    }
    for q in all_permutations(4) {
        let base = distribution_rows(&q, 7, None, &par).map_err(|e| e.to_string())?;
        for image in symmetry_orbit(&q) {
            let other = distribution_rows(&image, 7, None, &par).map_err(|e| e.to_string())?;
            let same = base.iter().zip(&other).all(|(x, y)| x.counts == y.counts && x.overflow == y.overflow);
            if !same {
                return Err(format!("{q} and its image {image} differ"));
            }
        }
    }
    Ok("rows sum to n!; parallel = sequential; symmetric patterns agree for n <= 7".into())
}

fn c11_performance() -> Outcome {
    let limit = Duration::from_secs(300);
    let start = Instant::now();
    let dist = occurrence_distribution(&perm("3412"), 10, None, &EnumConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if dist.total() != factorial(10) || !dist.overflow.is_zero() {
        return Err("n = 10 distribution does not sum to 10!".into());
    }
    if elapsed > limit {
        return Err(format!("took {elapsed:.1?}"));
    }
    let max_r = dist.counts.len() - 1;
    let avoiders = dist.count(0).to_u64().unwrap_or(0);
    Ok(format!("3412 at n = 10 in {elapsed:.1?} ({avoiders} avoiders, max r = {max_r})"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("catalan avoiders", c1_catalan),
        ("one-occurrence closed forms", c2_one_occurrence),
        ("1342 generating function", c3_series),
        ("wilf equalities", c4_wilf_equalities),
        ("effective wilf classes", c5_effective_classes),
        ("hypothesis gate", c6_hypothesis_gate),
        ("lower injection", c7_lower_injection),
        ("upper injection", c8_upper_injection),
        ("inequality audit", c9_audit),
        ("consistency", c10_consistency),
        ("performance", c11_performance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
