//! Count tables `(n, r) -> |S_{n,r}(q)|` and their on-disk cache.
//!
//! The cache holds one file per pattern, `<cache_dir>/<pattern>.jsonl`, one
//! JSON object per line:
//!
//! ```text
//! {"q":"231","n":6,"r":0,"count":"132"}
//! {"q":"231","n":6,"r":"overflow","count":"18"}
//! ```
//!
//! A cached row is reused when it lists every `r` up to the requested cap and
//! its entries sum to `n!`. Files are replaced by write-then-rename.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::warn;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::enumeration::{distribution_rows, factorial, EnumConfig};
use crate::error::{Error, Result};
use crate::perm::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TableRow {
    #[serde(serialize_with = "crate::serde_util::biguints")]
    pub counts: Vec<BigUint>,
    #[serde(serialize_with = "crate::serde_util::biguint")]
    pub overflow: BigUint,
}

impl TableRow {
    pub fn total(&self) -> BigUint {
        self.counts.iter().sum::<BigUint>() + &self.overflow
    }
}

/// Exact counts for one pattern; `counts[r]` for `r <= r_max`, the rest pooled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CountTable {
    pub pattern: Permutation,
    pub r_max: usize,
    pub rows: BTreeMap<usize, TableRow>,
}

impl CountTable {
    pub fn count(&self, n: usize, r: usize) -> Option<&BigUint> {
        self.rows.get(&n)?.counts.get(r)
    }

    pub fn avoiders(&self, n: usize) -> Option<&BigUint> {
        self.count(n, 0)
    }

    /// `n,r,count` with the pooled bucket written as `r = overflow`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,r,count\n");
        for (n, row) in &self.rows {
            for (r, c) in row.counts.iter().enumerate() {
                out.push_str(&format!("{n},{r},{c}\n"));
            }
            out.push_str(&format!("{n},overflow,{}\n", row.overflow));
        }
        out
    }
}

/// A table plus which rows came from the cache.
#[derive(Debug, Clone)]
pub struct TableBuild {
    pub table: CountTable,
    pub computed: Vec<usize>,
    pub reused: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheLine {
    q: String,
    n: usize,
    r: serde_json::Value,
    count: String,
}

#[derive(Debug, Default, Clone)]
struct CachedRow {
    exact: BTreeMap<usize, BigUint>,
    overflow: Option<BigUint>,
}

impl CachedRow {
    /// The row truncated to `r_max`, if it is complete enough to answer.
    fn answer(&self, n: usize, r_max: usize) -> Option<TableRow> {
        let counts: Vec<BigUint> = (0..=r_max).map(|r| self.exact.get(&r).cloned()).collect::<Option<_>>()?;
        let total = factorial(n);
        let listed: BigUint = self.exact.values().sum::<BigUint>() + self.overflow.clone().unwrap_or_default();
        if listed != total {
            return None;
        }
        let head: BigUint = counts.iter().sum();
        Some(TableRow { overflow: total - head, counts })
    }
}

pub fn cache_path(cache_dir: &Path, q: &Permutation) -> PathBuf {
    cache_dir.join(format!("{}.jsonl", q.to_compact_string()))
}

fn parse_cache(text: &str, q: &Permutation) -> Result<BTreeMap<usize, CachedRow>> {
    let mut rows: BTreeMap<usize, CachedRow> = BTreeMap::new();
    let key = q.to_compact_string();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Cache(format!("line {}: {what}", lineno + 1));
        let parsed: CacheLine = serde_json::from_str(line).map_err(|e| bad(&e.to_string()))?;
        if parsed.q != key {
            return Err(bad(&format!("pattern {:?} in file for {key:?}", parsed.q)));
        }
        let count: BigUint = parsed.count.parse().map_err(|_| bad("count is not a decimal string"))?;
        let row = rows.entry(parsed.n).or_default();
        match &parsed.r {
            serde_json::Value::Number(num) => {
                let r = num.as_u64().ok_or_else(|| bad("r is not a nonnegative integer"))? as usize;
                row.exact.insert(r, count);
            }
            serde_json::Value::String(s) if s == "overflow" => row.overflow = Some(count),
            _ => return Err(bad("r must be an integer or \"overflow\"")),
        }
    }
    Ok(rows)
}

fn render_cache(q: &Permutation, rows: &BTreeMap<usize, CachedRow>) -> String {
    let key = q.to_compact_string();
    let mut out = String::new();
    let mut line = |n: usize, r: serde_json::Value, count: &BigUint| {
        let l = CacheLine { q: key.clone(), n, r, count: count.to_string() };
        out.push_str(&serde_json::to_string(&l).expect("cache line serializes"));
        out.push('\n');
    };
    for (&n, row) in rows {
        for (&r, c) in &row.exact {
            line(n, r.into(), c);
        }
        if let Some(o) = &row.overflow {
            line(n, "overflow".into(), o);
        }
    }
    out
}

fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp.{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("cache"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Builds rows `0..=n_max` with `r <= r_max` plus overflow, reusing and
/// extending the cache in `cache_dir` when given.
pub fn table_build(
    q: &Permutation,
    n_max: usize,
    r_max: usize,
    cache_dir: Option<&Path>,
    cfg: &EnumConfig,
) -> Result<TableBuild> {
    let mut warnings = Vec::new();
    let mut cached = BTreeMap::new();
    let path = cache_dir.map(|d| cache_path(d, q));
    if let Some(path) = &path {
        match fs::read_to_string(path) {
            Ok(text) => match parse_cache(&text, q) {
                Ok(rows) => cached = rows,
                Err(e) => {
                    let msg = format!("ignoring corrupt cache {}: {e}", path.display());
                    warn!("{msg}");
                    warnings.push(msg);
                }
            },
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => {
                let msg = format!("ignoring unreadable cache {}: {e}", path.display());
                warn!("{msg}");
                warnings.push(msg);
            }
        }
    }

    let mut rows = BTreeMap::new();
    let mut reused = Vec::new();
    let mut missing = Vec::new();
    for n in 0..=n_max {
        match cached.get(&n).and_then(|row: &CachedRow| row.answer(n, r_max)) {
            Some(row) => {
                rows.insert(n, row);
                reused.push(n);
            }
            None => missing.push(n),
        }
    }

    if let Some(&deepest) = missing.last() {
        let fresh = distribution_rows(q, deepest, Some(r_max), cfg)?;
        for &n in &missing {
            let d = &fresh[n];
            rows.insert(n, TableRow { counts: d.counts.clone(), overflow: d.overflow.clone() });
            cached.insert(
                n,
                CachedRow {
                    exact: d.counts.iter().cloned().enumerate().collect(),
                    overflow: Some(d.overflow.clone()),
                },
            );
        }
        if let Some(path) = &path {
            write_atomically(path, &render_cache(q, &cached))?;
        }
    }

    Ok(TableBuild {
        table: CountTable { pattern: q.clone(), r_max, rows },
        computed: missing,
        reused,
        warnings,
    })
}
