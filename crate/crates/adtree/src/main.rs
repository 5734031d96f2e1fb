//! Command-line surface: build and serialize trees, answer count and
//! contingency-table queries, run the three search consumers, generate
//! synthetic data, evaluate analytic bounds, and run benchmark suites.
//!
//! Exit codes: 0 on success, 2 on usage errors (unknown flags, bad
//! grammar), 1 on data errors reported by the library.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use adtree::bench::{self, BenchReport};
use adtree::bounds::{memory_bounds, BoundParams};
use adtree::contab;
use adtree::ml::{self, HillClimbConfig};
use adtree::{AdTree, CsvOptions, Dataset, Error, Query, Result, SynthConfig};

#[derive(Parser)]
#[command(
    name = "adtree",
    version,
    about = "Cached counting queries over categorical datasets"
)]
struct Cli {
    /// Emit machine-readable JSON instead of aligned text.
    #[arg(long, global = true)]
    json: bool,

    /// CSV field delimiter.
    #[arg(long, global = true, default_value_t = ',')]
    delimiter: char,

    #[command(subcommand)]
    cmd: Cmd,
}

/// Arguments shared by every subcommand that reads a dataset or tree file.
#[derive(Args)]
struct InputOpts {
    /// Input file: a CSV dataset, or a saved tree (then --data is required).
    input: PathBuf,

    /// Leaf-list threshold: nodes matching fewer records keep a record list
    /// instead of expanding. 1 disables leaf lists.
    #[arg(long, env = "ADTREE_RMIN", default_value_t = 1)]
    rmin: u64,

    /// Value-map sidecar JSON fixing value codes and arities per column.
    #[arg(long)]
    maps: Option<PathBuf>,

    /// CSV dataset to attach when the input is a saved tree.
    #[arg(long)]
    data: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a tree from a CSV dataset and report its size.
    Build {
        #[command(flatten)]
        input: InputOpts,
        /// Write the tree to this path for later reloading.
        #[arg(long)]
        save: Option<PathBuf>,
    },
    /// Count the records matching a conjunctive query.
    Count {
        #[command(flatten)]
        input: InputOpts,
        /// Query text: `name=value(,name=value)*`, or positional `@i=c`.
        #[arg(long)]
        q: String,
    },
    /// Build a contingency table over a set of attributes.
    Contab {
        #[command(flatten)]
        input: InputOpts,
        /// Comma-separated attribute names (or `@i` positions).
        #[arg(long)]
        attrs: String,
        /// Optional condition query restricting the counted records.
        #[arg(long)]
        cond: Option<String>,
        /// Render every cell (zeros included) as TSV instead of sparse JSON.
        #[arg(long)]
        dense: bool,
    },
    /// Rank attribute subsets by information gain for a target.
    Features {
        #[command(flatten)]
        input: InputOpts,
        /// Target attribute name (or `@i`).
        #[arg(long)]
        target: String,
        /// Input-subset size.
        #[arg(long)]
        n: usize,
        /// Number of ranked subsets to print.
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Search Bayes-net structures by stochastic hill climbing.
    Bayes {
        #[command(flatten)]
        input: InputOpts,
        #[arg(long)]
        iters: u64,
        #[arg(long, default_value_t = 1)]
        restarts: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Search conjunctive rules predicting a target value.
    Rules {
        #[command(flatten)]
        input: InputOpts,
        /// Target as `name=value` (or `@i=c`).
        #[arg(long)]
        target: String,
        /// Antecedent size.
        #[arg(long)]
        n: usize,
        /// Minimum support.
        #[arg(long)]
        smin: u64,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Generate a synthetic three-layer dataset as CSV.
    Synth {
        #[arg(long)]
        records: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// JSON wiring config overriding the default 24-attribute layout
        /// (record count and seed are still taken from the flags).
        #[arg(long)]
        wiring: Option<PathBuf>,
    },
    /// Evaluate analytic worst-case size and build-cost bounds.
    Bounds {
        /// Number of (binary) attributes.
        #[arg(long)]
        m: u64,
        /// Number of records.
        #[arg(long)]
        r: u64,
        /// Per-attribute probability of value 2 for the skewed and
        /// correlated models.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, env = "ADTREE_RMIN", default_value_t = 1)]
        rmin: u64,
    },
    /// Run a benchmark suite against the linear-counting baseline.
    Bench {
        /// Input CSV; omitted means synthetic data (--records, --seed).
        input: Option<PathBuf>,
        #[arg(long)]
        suite: Suite,
        #[arg(long, env = "ADTREE_RMIN", default_value_t = 1)]
        rmin: u64,
        #[arg(long)]
        maps: Option<PathBuf>,
        /// Synthetic record count when no input CSV is given.
        #[arg(long, default_value_t = 10_000)]
        records: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Request count for the contab suite.
        #[arg(long, default_value_t = 50)]
        requests: usize,
        /// Attribute-set size cap for the contab suite.
        #[arg(long, default_value_t = 4)]
        max_attrs: usize,
        /// Hill-climb iterations for the bayes suite.
        #[arg(long, default_value_t = 200)]
        iters: u64,
        /// Timing repetitions; the median is reported.
        #[arg(long, default_value_t = bench::DEFAULT_REPS)]
        reps: usize,
        /// Thresholds for the rmin-sweep suite.
        #[arg(long, value_delimiter = ',', default_values_t = [1u64, 4, 16, 64, 256])]
        rmins: Vec<u64>,
        /// Record counts for the size-sweep suite.
        #[arg(long, value_delimiter = ',', default_values_t = [30_000usize, 60_000, 125_000])]
        sizes: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Contab,
    Features,
    Rules,
    Bayes,
    RminSweep,
    SizeSweep,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn csv_options(delimiter: char, maps: Option<&Path>) -> Result<CsvOptions> {
    if !delimiter.is_ascii() {
        return Err(Error::Argument(format!(
            "delimiter must be a single ASCII character, got {delimiter:?}"
        )));
    }
    let value_maps = match maps {
        None => None,
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            Some(serde_json::from_str(&text).map_err(|e| {
                Error::Config(format!("bad value-map sidecar {}: {e}", path.display()))
            })?)
        }
    };
    Ok(CsvOptions {
        delimiter: delimiter as u8,
        missing_marker: None,
        value_maps,
    })
}

/// True when the file looks like a saved tree rather than a CSV: saved
/// trees are JSON objects, so the first non-whitespace byte is `{`.
fn looks_like_tree(path: &Path) -> Result<bool> {
    let text = std::fs::read_to_string(path)?;
    Ok(text.trim_start().starts_with('{'))
}

fn load_tree(opts: &InputOpts, delimiter: char) -> Result<AdTree> {
    let csv_opts = csv_options(delimiter, opts.maps.as_deref())?;
    if looks_like_tree(&opts.input)? {
        let data = opts.data.as_ref().ok_or_else(|| {
            Error::Argument(format!(
                "{} is a saved tree; pass the matching CSV via --data",
                opts.input.display()
            ))
        })?;
        let dataset = Dataset::load_csv(data, &csv_opts)?.into_arc();
        AdTree::load(&opts.input, dataset)
    } else {
        let dataset = Dataset::load_csv(&opts.input, &csv_opts)?.into_arc();
        AdTree::build(dataset, opts.rmin)
    }
}

fn resolve_attr(dataset: &Dataset, token: &str) -> Result<usize> {
    let token = token.trim();
    if let Some(idx) = dataset.attr_index(token) {
        return Ok(idx);
    }
    if let Some(rest) = token.strip_prefix('@') {
        let i: usize = rest
            .parse()
            .map_err(|_| Error::Argument(format!("bad attribute position {token:?}")))?;
        if i >= 1 && i <= dataset.num_attrs() {
            return Ok(i - 1);
        }
        return Err(Error::Argument(format!(
            "attribute position {i} out of range (M = {})",
            dataset.num_attrs()
        )));
    }
    Err(Error::Argument(format!("unknown attribute {token:?}")))
}

fn resolve_attr_list(dataset: &Dataset, text: &str) -> Result<Vec<usize>> {
    text.split(',').map(|t| resolve_attr(dataset, t)).collect()
}

/// Resolves a `name=value` pair to an (attribute, code) term.
fn resolve_term(dataset: &Dataset, text: &str) -> Result<(usize, u32)> {
    let q = Query::parse(text, dataset)?;
    match q.terms() {
        [term] => Ok(*term),
        _ => Err(Error::Argument(format!(
            "expected a single name=value pair, got {text:?}"
        ))),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!(
        "{}",
        serde_json::to_string_pretty(value).map_err(|e| Error::Config(e.to_string()))?
    );
    Ok(())
}

fn print_tree_stats(tree: &AdTree, json: bool) -> Result<()> {
    let stats = tree.stats();
    if json {
        return print_json(&stats);
    }
    println!("count nodes     {}", stats.ad_nodes);
    println!("vary nodes      {}", stats.vary_nodes);
    println!("leaf lists      {}", stats.leaf_lists);
    println!("leaf entries    {}", stats.leaf_list_entries);
    println!("estimated bytes {}", stats.estimated_bytes);
    println!("r_min           {}", stats.r_min);
    println!("build time      {:.3}s", stats.build_time_secs);
    Ok(())
}

fn print_table(
    dataset: &Dataset,
    table: &contab::ContingencyTable,
    dense: bool,
    json: bool,
) -> Result<()> {
    if dense && !json {
        for (tuple, count) in table.dense_rows(contab::DENSE_ROW_CAP)? {
            let mut fields: Vec<String> = table
                .attrs()
                .iter()
                .zip(&tuple)
                .map(|(&a, &v)| dataset.string_for(a, v).to_string())
                .collect();
            fields.push(count.to_string());
            println!("{}", fields.join("\t"));
        }
        return Ok(());
    }
    // Sparse JSON: cells keyed by the value tuple, zero cells omitted.
    let names: Vec<&str> = table
        .attrs()
        .iter()
        .map(|&a| dataset.attr_names()[a].as_str())
        .collect();
    let cells: Vec<serde_json::Value> = table
        .cells()
        .map(|(tuple, count)| serde_json::json!({ "tuple": tuple, "count": count }))
        .collect();
    let condition: Vec<serde_json::Value> = table
        .condition()
        .terms()
        .iter()
        .map(|&(a, v)| serde_json::json!({ "attr": dataset.attr_names()[a], "value": v }))
        .collect();
    print_json(&serde_json::json!({
        "attrs": names,
        "condition": condition,
        "total": table.total(),
        "cells": cells,
    }))
}

fn print_bench(report: &BenchReport, json: bool) -> Result<()> {
    if json {
        return print_json(report);
    }
    println!(
        "{:<40} {:>12} {:>12} {:>9} {:>10} {:>10} {:>10} {:>12}",
        "task", "tree secs", "linear secs", "speedup", "build s", "nodes", "vary", "est. bytes"
    );
    for row in &report.rows {
        println!(
            "{:<40} {:>12.6} {:>12.6} {:>9.2} {:>10.3} {:>10} {:>10} {:>12}",
            row.label,
            row.adtree_secs,
            row.linear_secs,
            row.speedup,
            row.build_secs,
            row.ad_nodes,
            row.vary_nodes,
            row.estimated_bytes
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Build { input, save } => {
            let tree = load_tree(&input, cli.delimiter)?;
            if let Some(path) = &save {
                tree.save(path)?;
            }
            print_tree_stats(&tree, cli.json)
        }
        Cmd::Count { input, q } => {
            let tree = load_tree(&input, cli.delimiter)?;
            let query = Query::parse(&q, tree.dataset())?;
            let n = contab::count(&tree, &query)?;
            if cli.json {
                print_json(&serde_json::json!({ "query": q, "count": n }))
            } else {
                println!("{n}");
                Ok(())
            }
        }
        Cmd::Contab {
            input,
            attrs,
            cond,
            dense,
        } => {
            let tree = load_tree(&input, cli.delimiter)?;
            let attrs = resolve_attr_list(tree.dataset(), &attrs)?;
            let condition = match &cond {
                None => Query::empty(),
                Some(text) => Query::parse(text, tree.dataset())?,
            };
            let table = contab::make_contab_conditional(&tree, &attrs, &condition)?;
            print_table(tree.dataset(), &table, dense, cli.json)
        }
        Cmd::Features {
            input,
            target,
            n,
            top,
        } => {
            let tree = load_tree(&input, cli.delimiter)?;
            let target = resolve_attr(tree.dataset(), &target)?;
            let mut scores = ml::feature_select(&tree, target, n)?;
            scores.truncate(top);
            if cli.json {
                return print_json(&scores);
            }
            for s in &scores {
                let names: Vec<&str> = s
                    .attrs
                    .iter()
                    .map(|&a| tree.dataset().attr_names()[a].as_str())
                    .collect();
                println!("{:<30} {:.4}", names.join(","), s.gain);
            }
            Ok(())
        }
        Cmd::Bayes {
            input,
            iters,
            restarts,
            seed,
        } => {
            let tree = load_tree(&input, cli.delimiter)?;
            let cfg = HillClimbConfig {
                iterations: iters,
                restarts,
                seed,
                ..HillClimbConfig::default()
            };
            let result = ml::bn_hill_climb(&tree, &cfg)?;
            let names = tree.dataset().attr_names();
            if cli.json {
                let parents: Vec<serde_json::Value> = (0..tree.num_attrs())
                    .map(|i| {
                        serde_json::json!({
                            "node": names[i],
                            "parents": result.best.parents(i).iter()
                                .map(|&p| names[p].as_str()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                return print_json(&serde_json::json!({
                    "score": result.best_score,
                    "order": result.best.order().iter()
                        .map(|&i| names[i].as_str()).collect::<Vec<_>>(),
                    "structure": parents,
                }));
            }
            println!("score {:.4}", result.best_score);
            let order: Vec<&str> = result.best.order().iter().map(|&i| names[i].as_str()).collect();
            println!("order {}", order.join(" < "));
            for i in 0..tree.num_attrs() {
                let parents = result.best.parents(i);
                if !parents.is_empty() {
                    let ps: Vec<&str> = parents.iter().map(|&p| names[p].as_str()).collect();
                    println!("{} <- {}", names[i], ps.join(","));
                }
            }
            Ok(())
        }
        Cmd::Rules {
            input,
            target,
            n,
            smin,
            top,
        } => {
            let tree = load_tree(&input, cli.delimiter)?;
            let (target_attr, target_value) = resolve_term(tree.dataset(), &target)?;
            let rules = ml::rule_search(&tree, target_attr, target_value, n, smin, top)?;
            if cli.json {
                return print_json(&rules);
            }
            let ds = tree.dataset();
            for r in &rules {
                let terms: Vec<String> = r
                    .antecedent
                    .terms()
                    .iter()
                    .map(|&(a, v)| format!("{}={}", ds.attr_names()[a], ds.string_for(a, v)))
                    .collect();
                println!(
                    "{} => {}={}  score {:.4}  support {}  hits {}",
                    terms.join(","),
                    ds.attr_names()[r.target_attr],
                    ds.string_for(r.target_attr, r.target_value),
                    r.score(),
                    r.support,
                    r.hits
                );
            }
            Ok(())
        }
        Cmd::Synth {
            records,
            seed,
            out,
            wiring,
        } => {
            let mut cfg = match &wiring {
                None => SynthConfig::with_defaults(records, seed),
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str(&text).map_err(|e| {
                        Error::Config(format!("bad wiring config {}: {e}", path.display()))
                    })?
                }
            };
            cfg.n_records = records;
            cfg.seed = seed;
            let dataset = adtree::synth_generate(&cfg)?;
            let file = std::fs::File::create(&out)?;
            dataset.write_csv(file, cli.delimiter as u8)?;
            if cli.json {
                print_json(&serde_json::json!({
                    "out": out.display().to_string(),
                    "records": dataset.num_records(),
                    "attrs": dataset.num_attrs(),
                    "seed": seed,
                }))
            } else {
                println!(
                    "wrote {} records x {} attributes to {}",
                    dataset.num_records(),
                    dataset.num_attrs(),
                    out.display()
                );
                Ok(())
            }
        }
        Cmd::Bounds { m, r, p, rmin } => {
            let report = memory_bounds(&BoundParams {
                num_attrs: m,
                num_records: r,
                r_min: rmin,
                skew_p: p,
            })?;
            if cli.json {
                return print_json(&report);
            }
            println!("M = {m}, R = {r}, r_min = {rmin}");
            println!("full worst case (2^M)      {}", report.full_worst_case);
            println!("row-limited bound          {}", report.row_limited);
            println!("  with leaf lists          {}", report.row_limited_leaf_lists);
            if let (Some(s), Some(sl), Some(c), Some(cl)) = (
                &report.skewed,
                &report.skewed_leaf_lists,
                &report.correlated,
                &report.correlated_leaf_lists,
            ) {
                println!("skewed bound (p = {})    {s}", p.unwrap());
                println!("  with leaf lists          {sl}");
                println!("correlated bound           {c}");
                println!("  with leaf lists          {cl}");
            }
            println!("build cost bound           {}", report.build_cost);
            Ok(())
        }
        Cmd::Bench {
            input,
            suite,
            rmin,
            maps,
            records,
            seed,
            requests,
            max_attrs,
            iters,
            reps,
            rmins,
            sizes,
        } => {
            let dataset = match &input {
                Some(path) => {
                    let opts = csv_options(cli.delimiter, maps.as_deref())?;
                    Dataset::load_csv(path, &opts)?.into_arc()
                }
                None => {
                    adtree::synth_generate(&SynthConfig::with_defaults(records, seed))?.into_arc()
                }
            };
            let last = dataset.num_attrs() - 1;
            let report = match suite {
                Suite::Contab => {
                    bench::contab_suite(dataset, rmin, requests, max_attrs, seed, reps)?
                }
                Suite::Features => bench::features_suite(dataset, rmin, last, 2, reps)?,
                Suite::Rules => {
                    let smin = (dataset.num_records() as u64 / 100).max(1);
                    bench::rules_suite(dataset, rmin, last, 1, 2, smin, reps)?
                }
                Suite::Bayes => bench::bayes_suite(dataset, rmin, iters, seed, reps)?,
                Suite::RminSweep => bench::rmin_sweep(dataset, &rmins)?,
                Suite::SizeSweep => {
                    let _ = dataset; // size sweep generates its own datasets
                    bench::size_sweep(&sizes, seed, rmin)?
                }
            };
            print_bench(&report, cli.json)
        }
    }
}
