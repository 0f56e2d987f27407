//! Plain-text layouts for the default `--format table`.

use std::fmt::Display;

use permlab::analysis::{approx, RatioTable};
use permlab::table::CountTable;
use permlab::Error;

pub fn parse_positions(s: &str) -> Result<Vec<usize>, Error> {
    s.split(',')
        .map(|part| part.trim().parse::<usize>().map_err(|e| Error::Parse(format!("position {part:?}: {e}"))))
        .collect()
}

fn align(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> =
        (0..cols).map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0)).collect();
    rows.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(c, cell)| format!("{cell:>w$}", w = widths[c]))
                .collect::<Vec<_>>()
                .join("  ")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn count_table_text(table: &CountTable) -> String {
    let mut header = vec!["n".to_string()];
    header.extend((0..=table.r_max).map(|r| format!("r={r}")));
    header.push("overflow".into());
    let mut rows = vec![header];
    for (n, row) in &table.rows {
        let mut line = vec![n.to_string()];
        line.extend(row.counts.iter().map(|c| c.to_string()));
        line.push(row.overflow.to_string());
        rows.push(line);
    }
    align(&rows)
}

pub fn ratio_text(table: &RatioTable) -> String {
    let mut rows = vec![vec!["n".into(), "count".into(), "avoiders".into(), "rho".into(), "~rho".into()]];
    for row in &table.rows {
        rows.push(vec![
            row.n.to_string(),
            row.count.to_string(),
            row.avoiders.to_string(),
            row.rho.to_string(),
            format!("{:.6e}", approx(&row.rho)),
        ]);
    }
    let mut out = align(&rows);
    if let (Some(min), Some(max)) = (&table.min, &table.max) {
        out.push_str(&format!("\nmin {min} (~{:.6e})  max {max} (~{:.6e})", approx(min), approx(max)));
    }
    out
}

pub fn two_column<T: Display>(header: &str, values: &[T], sep: &str) -> String {
    let mut out = header.to_string();
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("\n{i}{sep}{v}"));
    }
    out
}
