use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use permlab::analysis::{
    inequality_audit, ratio_table, series_1342, series_1342_report, wilf_partition, PRINTED_1342_LINEAR_COEFFICIENT,
};
use permlab::decomp::{check_hypotheses, is_separable, skew_components, sum_components};
use permlab::enumeration::EnumConfig;
use permlab::injections::{extract_lower, inject_lower, swap_upper, verify_lower, verify_upper};
use permlab::table::table_build;
use permlab::{Error, Permutation};

mod render;

use render::{count_table_text, parse_positions, two_column};

#[derive(Parser, Debug)]
#[command(name = "permlab", version, about = "Pattern occurrence counting and injection checks")]
struct Cli {
    /// Shorthand for `--format json`.
    #[arg(long, global = true)]
    json: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,

    /// Directory of the count cache.
    #[arg(long, global = true, env = "PERMLAB_CACHE", default_value = "./permlab-cache")]
    cache: PathBuf,

    /// Worker threads for enumeration; 1 runs sequentially.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Node budget for one enumeration.
    #[arg(long, global = true)]
    budget: Option<u64>,

    /// Print elapsed time on stderr.
    #[arg(long, global = true)]
    timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Map {
    Lower,
    Upper,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// |S_{n,r}(q)|
    Count {
        #[arg(long)]
        pattern: Permutation,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
    },
    /// Counts for every n <= n_max and r <= r_max, plus the overflow bucket.
    Table {
        #[arg(long)]
        pattern: Permutation,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        r_max: usize,
    },
    /// Sum and skew components, plus the hypothesis flags when |p| >= 2.
    Decompose { perm: Permutation },
    /// Hypothesis report for a pattern.
    Check { pattern: Permutation },
    /// Lower-bound insertion of r copies at the given slots.
    Inject {
        #[arg(long)]
        pattern: Permutation,
        /// Comma-separated 1-based slots.
        #[arg(long)]
        positions: String,
        #[arg(long)]
        perm: Permutation,
    },
    /// Inverse of `inject`.
    Extract {
        #[arg(long)]
        pattern: Permutation,
        #[arg(long)]
        perm: Permutation,
        #[arg(long)]
        r: usize,
    },
    /// Upper-bound swap removing one occurrence.
    Swap {
        #[arg(long)]
        pattern: Permutation,
        #[arg(long)]
        perm: Permutation,
    },
    /// Exhaustive check of one injection.
    Verify {
        #[arg(value_enum)]
        map: Map,
        #[arg(long)]
        pattern: Permutation,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
    },
    /// Effective Wilf classes of all patterns of one length.
    Wilf {
        #[arg(long)]
        length: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        r_max: usize,
    },
    /// Generating function expansion.
    Series {
        #[arg(long, default_value = "1342")]
        id: String,
        #[arg(long, default_value_t = 10)]
        terms: usize,
        /// Linear coefficient of the denominator, e.g. 20 or 41/2.
        #[arg(long)]
        linear_coef: Option<BigRational>,
    },
    /// |S_{n,r}(q)| / (n^r |S_n(q)|) for n <= n_max.
    Ratio {
        #[arg(long)]
        pattern: Permutation,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        n_max: usize,
    },
    /// Exact inequality audit over a grid.
    Audit {
        #[arg(long)]
        pattern: Permutation,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 3)]
        r_max: usize,
    },
}

/// What a command produced: rendered text and whether it counts as a failure.
struct Output {
    text: String,
    failed: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, failed: false }
    }
}

fn with_schema<T: Serialize>(value: &T) -> Value {
    let mut out = json!({ "schema": 1 });
    match serde_json::to_value(value).expect("serializable") {
        Value::Object(fields) => out.as_object_mut().unwrap().extend(fields),
        other => {
            out["value"] = other;
        }
    }
    out
}

fn json_text<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(&with_schema(value)).expect("serializable")
}

impl Cli {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else {
            self.format
        }
    }

    fn config(&self) -> EnumConfig {
        let mut cfg = EnumConfig::default();
        if self.threads == Some(1) {
            cfg = EnumConfig::sequential();
        }
        if let Some(b) = self.budget {
            cfg.budget = b;
        }
        cfg
    }
}

fn run(cli: &Cli) -> Result<Output, Error> {
    let format = cli.format();
    let cfg = cli.config();
    let cache = Some(cli.cache.as_path());
    match &cli.command {
        Command::Count { pattern, n, r } => {
            let built = table_build(pattern, *n, *r, cache, &cfg)?;
            warn_all(&built.warnings);
            let count = built.table.count(*n, *r).cloned().unwrap_or_default();
            Ok(Output::ok(match format {
                Format::Json => json_text(&json!({
                    "pattern": pattern, "n": n, "r": r, "count": count.to_string(),
                })),
                Format::Csv => format!("n,r,count\n{n},{r},{count}"),
                Format::Table => count.to_string(),
            }))
        }
        Command::Table { pattern, n_max, r_max } => {
            let built = table_build(pattern, *n_max, *r_max, cache, &cfg)?;
            warn_all(&built.warnings);
            Ok(Output::ok(match format {
                Format::Json => json_text(&built.table),
                Format::Csv => built.table.to_csv().trim_end().to_string(),
                Format::Table => count_table_text(&built.table),
            }))
        }
        Command::Decompose { perm } => {
            let mut out = json!({
                "permutation": perm,
                "sum_parts": sum_components(perm)?,
                "skew_parts": skew_components(perm)?,
                "is_separable": is_separable(perm),
            });
            if perm.len() >= 2 {
                out["hypotheses"] = serde_json::to_value(check_hypotheses(perm)?).expect("serializable");
            }
            Ok(Output::ok(json_text(&out)))
        }
        Command::Check { pattern } => Ok(Output::ok(json_text(&check_hypotheses(pattern)?))),
        Command::Inject { pattern, positions, perm } => {
            let slots = parse_positions(positions)?;
            let result = inject_lower(pattern, &slots, perm)?;
            Ok(Output::ok(match format {
                Format::Json => json_text(&json!({
                    "pattern": pattern, "positions": slots, "perm": perm, "result": result,
                })),
                _ => result.to_string(),
            }))
        }
        Command::Extract { pattern, perm, r } => {
            let (slots, base) = extract_lower(pattern, perm, *r)?;
            Ok(Output::ok(match format {
                Format::Json => json_text(&json!({
                    "pattern": pattern, "perm": perm, "positions": slots, "result": base,
                })),
                _ => {
                    let slots: Vec<String> = slots.iter().map(usize::to_string).collect();
                    format!("{} {base}", slots.join(","))
                }
            }))
        }
        Command::Swap { pattern, perm } => {
            let (position, result) = swap_upper(pattern, perm)?;
            Ok(Output::ok(match format {
                Format::Json => json_text(&json!({
                    "pattern": pattern, "perm": perm, "position": position, "result": result,
                })),
                _ => format!("{position} {result}"),
            }))
        }
        Command::Verify { map, pattern, n, r } => {
            let report = match map {
                Map::Lower => verify_lower(pattern, *n, *r)?,
                Map::Upper => verify_upper(pattern, *n, *r)?,
            };
            let failed = !report.passed();
            let text = if failed || format == Format::Json {
                json_text(&report)
            } else {
                let ineq = report.inequality.as_ref().map(|i| format!("; {}", i.statement)).unwrap_or_default();
                format!("pass: {} elements checked{ineq}", report.domain_size)
            };
            Ok(Output { text, failed })
        }
        Command::Wilf { length, n_max, r_max } => {
            let partition = wilf_partition(*length, *n_max, *r_max, &cfg)?;
            Ok(Output::ok(match format {
                Format::Json => json_text(&partition),
                Format::Csv => {
                    let mut out = String::from("block,pattern");
                    for (i, block) in partition.blocks.iter().enumerate() {
                        for p in block {
                            out.push_str(&format!("\n{},{p}", i + 1));
                        }
                    }
                    out
                }
                Format::Table => {
                    let lines: Vec<String> = partition
                        .blocks
                        .iter()
                        .enumerate()
                        .map(|(i, b)| {
                            let names: Vec<String> = b.iter().map(|p| p.to_string()).collect();
                            format!("{:>3}  {}", i + 1, names.join(" "))
                        })
                        .collect();
                    format!("{} blocks\n{}", partition.blocks.len(), lines.join("\n"))
                }
            }))
        }
        Command::Series { id, terms, linear_coef } => {
            if id != "1342" {
                return Err(Error::Precondition(format!("no series registered for {id}")));
            }
            if *terms == 0 {
                return Err(Error::Precondition("--terms must be at least 1".into()));
            }
            let order = terms - 1;
            if let Some(c) = linear_coef {
                let coeffs = series_1342(order, c)?.into_coeffs();
                return Ok(Output::ok(match format {
                    Format::Json => json_text(&json!({
                        "id": id,
                        "linear_coefficient": c.to_string(),
                        "coefficients": coeffs.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
                    })),
                    Format::Csv => two_column("n,coefficient", &coeffs, ","),
                    Format::Table => two_column("n  coefficient", &coeffs, "  "),
                }));
            }
            let report = series_1342_report(order, order.min(9))?;
            Ok(Output::ok(match format {
                Format::Json => json_text(&report),
                Format::Csv => two_column("n,coefficient", &report.resolved.coefficients, ","),
                Format::Table => {
                    let mut out = format!(
                        "printed c = {PRINTED_1342_LINEAR_COEFFICIENT}: constant term {}, first mismatch at n = {}\n",
                        report.printed.coefficients[0],
                        report.printed.first_mismatch.map_or("none".into(), |i| i.to_string()),
                    );
                    out.push_str(&format!(
                        "resolved c = {}: matches enumeration for n <= {}\n",
                        report.resolved.linear_coefficient, report.resolved.checked_up_to
                    ));
                    out.push_str(&two_column("n  coefficient", &report.resolved.coefficients, "  "));
                    out
                }
            }))
        }
        Command::Ratio { pattern, r, n_max } => {
            let table = ratio_table(pattern, *r, *n_max, cache, &cfg)?;
            Ok(Output::ok(match format {
                Format::Json => json_text(&table),
                Format::Csv => table.to_csv().trim_end().to_string(),
                Format::Table => render::ratio_text(&table),
            }))
        }
        Command::Audit { pattern, n_max, r_max } => {
            let report = inequality_audit(pattern, *n_max, *r_max)?;
            let failed = !report.all_hold();
            let text = if failed || format == Format::Json {
                json_text(&report)
            } else {
                format!("{} inequalities hold", report.points.len())
            };
            Ok(Output { text, failed })
        }
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        log::warn!("{w}");
    }
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    let start = Instant::now();
    let outcome = run(&cli);
    if cli.timing {
        eprintln!("elapsed: {:.3?}", start.elapsed());
    }
    match outcome {
        Ok(out) => {
            emit(&out.text);
            if out.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Error::ProofGap(gap)) => {
            emit(&json_text(&json!({ "proof_gap": gap })));
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("permlab: {e}");
            ExitCode::from(2)
        }
    }
}
