mod config;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use serde_json::json;

use gencollatz::catalog::{self, verify_catalog, CycleCatalog};
use gencollatz::cycle::Cycle;
use gencollatz::mapping::{BranchCounts, MappingDef};
use gencollatz::nodes::{
    bound_c, generate_nodes, lambda_exact, ln_lambda, NodeOptions, NodeStop, TwoBranchFamily,
    DEFAULT_PRECISION_BITS,
};
use gencollatz::oracle::{enumerate_cycles_exact, DEFAULT_BUDGET};
use gencollatz::search::{
    search_node, search_range, SearchOptions, SearchReport, SignPolicy, DEFAULT_BLOCK,
    DEFAULT_NODE_START_CAP,
};
use gencollatz::table;

use config::{
    check_precision, parse_constant, usage, CliError, CliResult, CutoffArgs,
    MappingArgs, OutputArgs, OutputFormat, RunConfig,
};

const FAMILY_HELP: &str = "\
Families:
  collatz        g(3n) = 2n, g(3n-2) = 4n-3, g(3n-1) = 4n-1 (also: g)
  3x1            x even -> x/2, x odd -> (3x+1)/2 (also: 3x+1)
  matthews       x/4, (3x-3)/4, (5x-2)/4, (17x-3)/4 on classes 0-3 mod 4
  perm:<1-6>     the six permutations of the outputs 2n, 4n-3, 4n-1 over the
                 input classes 3n, 3n-2, 3n-1. Variants 1-4 assign
                   1: 2n, 4n-3, 4n-1   (= collatz)
                   2: 2n, 4n-1, 4n-3
                   3: 4n-3, 4n-1, 2n
                   4: 4n-3, 2n, 4n-1
                 and 5-6 are the remaining two in lexicographic order:
                   5: 4n-1, 2n, 4n-3
                   6: 4n-1, 4n-3, 2n
  carnielli-T:<d>, carnielli-L:<d>
                 Carnielli's d-branch generalizations
  custom:<file>  JSON mapping {\"d\": 3, \"branches\": [{\"m\": 2, \"r\": 0}, ...]},
                 step x -> (m_i x - r_i) / d on residue class i

Exit codes: 0 success, 1 failed check or I/O error, 2 usage error.";

#[derive(Parser, Debug)]
#[command(name = "gencollatz", version, about = "Cycles of generalized 3x+1 mappings", after_help = FAMILY_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Precision {
    /// Working precision in bits (at least 64).
    #[arg(long, env = "GENCOLLATZ_PRECISION", default_value_t = DEFAULT_PRECISION_BITS)]
    precision: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Node table of a two-ratio family.
    Nodes {
        #[arg(long, short = 'f', default_value = "collatz")]
        family: String,
        /// Last main node to emit; 0 emits the seeds only.
        #[arg(long, default_value_t = 7)]
        depth: u64,
        /// Bound numerator: collatz, atkin, 3x1 or a positive ratio.
        #[arg(long)]
        constant: Option<String>,
        /// Compare against the bundled reference table (collatz and 3x1).
        #[arg(long)]
        check_paper: bool,
        #[command(flatten)]
        precision: Precision,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Cycle search over a range of starts.
    Search {
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long, allow_hyphen_values = true)]
        lo: BigInt,
        #[arg(long, allow_hyphen_values = true)]
        hi: BigInt,
        #[command(flatten)]
        cutoffs: CutoffArgs,
        /// Worker cap.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write the found cycles as a catalog.
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Searches 1 <= |m| <= C for cycles with the counts of one node.
    SearchNode {
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        k2: u64,
        #[arg(long)]
        constant: Option<String>,
        /// positive, negative, both or by-side (default depends on the family).
        #[arg(long)]
        signs: Option<String>,
        /// Refuse bounds above this many starts per sign.
        #[arg(long, default_value_t = DEFAULT_NODE_START_CAP)]
        cap: u64,
        #[command(flatten)]
        cutoffs: CutoffArgs,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Re-checks a catalog file or a bundled catalog by name.
    Verify {
        /// Path, or one of: collatz, 3x1, perm:3, matthews.
        catalog: String,
        /// Check against this mapping instead of the catalog's own.
        #[command(flatten)]
        mapping: MappingArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Prints iterates with branch indices and running (k1, k2).
    Trajectory {
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long, allow_hyphen_values = true)]
        start: BigInt,
        #[arg(long)]
        steps: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact list of all cycles up to a period.
    Oracle {
        #[command(flatten)]
        mapping: MappingArgs,
        #[arg(long)]
        max_period: u32,
        /// Largest number of branch sequences to examine.
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact λ for given branch counts.
    Lambda {
        #[command(flatten)]
        mapping: MappingArgs,
        #[command(flatten)]
        counts: CountArgs,
        #[command(flatten)]
        precision: Precision,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Least-element bound C for given branch counts.
    Bound {
        #[command(flatten)]
        mapping: MappingArgs,
        #[command(flatten)]
        counts: CountArgs,
        #[arg(long)]
        constant: Option<String>,
        #[command(flatten)]
        precision: Precision,
        #[command(flatten)]
        out: OutputArgs,
    },
}

#[derive(Args, Debug, Clone)]
struct CountArgs {
    /// Growth steps.
    #[arg(long, requires = "k2", conflicts_with = "counts")]
    k1: Option<u64>,
    /// Contraction steps.
    #[arg(long, requires = "k1")]
    k2: Option<u64>,
    /// Per-branch counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<u64>>,
}

impl CountArgs {
    fn resolve(&self, mapping: &MappingDef) -> CliResult<BranchCounts> {
        match (&self.counts, self.k1, self.k2) {
            (Some(c), None, None) => {
                if c.len() != mapping.d() as usize {
                    return Err(usage(format!(
                        "--counts needs {} values, got {}",
                        mapping.d(),
                        c.len()
                    )));
                }
                Ok(BranchCounts { counts: c.clone() })
            }
            (None, Some(k1), Some(k2)) => {
                TwoBranchFamily::from_mapping("", mapping)
                    .map_err(|e| usage(format!("{e}; use --counts")))?;
                Ok(gencollatz::search::node_counts(mapping, k1, k2))
            }
            _ => Err(usage("give --k1 and --k2, or --counts")),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Failed(m) => eprintln!("{m}"),
                CliError::Other(_) => eprintln!("error: {e}"),
            }
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Nodes {
            family,
            depth,
            constant,
            check_paper,
            precision,
            out,
        } => cmd_nodes(&family, depth, constant.as_deref(), check_paper, precision.precision, &out),
        Command::Search {
            mapping,
            lo,
            hi,
            cutoffs,
            threads,
            catalog,
            out,
        } => {
            let cfg = RunConfig::new(&mapping, Some(&cutoffs), DEFAULT_PRECISION_BITS, None, &out)?;
            cmd_search(&cfg, &lo, &hi, threads, catalog)
        }
        Command::SearchNode {
            mapping,
            k1,
            k2,
            constant,
            signs,
            cap,
            cutoffs,
            threads,
            out,
        } => {
            let cfg = RunConfig::new(
                &mapping,
                Some(&cutoffs),
                DEFAULT_PRECISION_BITS,
                constant.as_deref(),
                &out,
            )?;
            cmd_search_node(&cfg, k1, k2, signs.as_deref(), cap, threads)
        }
        Command::Verify { catalog, mapping, out } => cmd_verify(&catalog, &mapping, &out),
        Command::Trajectory {
            mapping,
            start,
            steps,
            out,
        } => {
            let (m, _) = mapping.resolve()?;
            cmd_trajectory(&m, &start, steps, &out)
        }
        Command::Oracle {
            mapping,
            max_period,
            budget,
            out,
        } => {
            let (m, label) = mapping.resolve()?;
            cmd_oracle(&m, &label, max_period, budget, &out)
        }
        Command::Lambda {
            mapping,
            counts,
            precision,
            out,
        } => {
            let (m, _) = mapping.resolve()?;
            let bits = check_precision(precision.precision)?;
            cmd_lambda(&m, &counts.resolve(&m)?, bits, &out)
        }
        Command::Bound {
            mapping,
            counts,
            constant,
            precision,
            out,
        } => {
            let cfg = RunConfig::new(
                &mapping,
                None,
                precision.precision,
                constant.as_deref(),
                &out,
            )?;
            let c = counts.resolve(&cfg.mapping)?;
            cmd_bound(&cfg, &c)
        }
    }
}

fn cmd_nodes(
    family: &str,
    depth: u64,
    constant: Option<&str>,
    check: bool,
    precision: u32,
    out: &OutputArgs,
) -> CliResult {
    let precision = check_precision(precision)?;
    let mapping_args = MappingArgs {
        family: Some(family.to_string()),
        file: None,
    };
    let (mapping, label) = mapping_args.resolve()?;
    let fam = TwoBranchFamily::from_mapping(&label, &mapping).map_err(|e| usage(e.to_string()))?;
    let reference = if check {
        match label.as_str() {
            "collatz" => Some(table::fixtures::collatz()),
            "3x1" => Some(table::fixtures::three_x_plus_one()),
            _ => return Err(usage("--check-paper needs --family collatz or 3x1")),
        }
    } else {
        None
    };
    let run_depth = reference
        .as_ref()
        .map_or(depth, |t| depth.max(table::fixtures::depth(t)));
    let opts = NodeOptions {
        stop: NodeStop::MainNodes(run_depth),
        constant: constant.map(parse_constant).transpose()?,
        precision_bits: precision,
    };
    let nodes = generate_nodes(&fam, &opts)?;
    let shown: Vec<_> = nodes
        .iter()
        .filter(|n| n.main <= depth.max(1))
        .cloned()
        .collect();
    let rows = table::node_rows(&shown);
    let text = match out.format {
        OutputFormat::Json => table::render_json(&rows),
        OutputFormat::Csv => table::render_csv(&rows),
        OutputFormat::Pretty => table::render_pretty(&rows),
    };
    out.emit(&text)?;
    if let Some(t) = reference {
        let report = table::check_reference(&nodes, &t);
        let bad = report.failures();
        let mut msg = format!(
            "reference check: {} of {} rows within tolerance",
            report.rows.len() - bad.len(),
            report.rows.len()
        );
        for r in &bad {
            let d = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.2e}"));
            write!(
                msg,
                "\n  ({},{}): found={} side={} k={} dλ={} dlnC={}",
                r.k1,
                r.k2,
                r.found,
                r.side_ok,
                r.k_ok,
                d(r.lambda_diff),
                d(r.ln_c_diff)
            )
            .unwrap();
        }
        if !bad.is_empty() {
            return Err(CliError::Failed(msg));
        }
        eprintln!("{msg}");
    }
    Ok(())
}

fn options(cfg: &RunConfig, threads: Option<usize>) -> CliResult<SearchOptions> {
    if threads == Some(0) {
        return Err(usage("--threads must be positive"));
    }
    Ok(SearchOptions {
        limits: cfg.limits.clone(),
        threads,
        block: DEFAULT_BLOCK,
    })
}

fn cycle_fields(c: &Cycle) -> [String; 4] {
    let counts: Vec<String> = c.counts.counts.iter().map(u64::to_string).collect();
    let elems: Vec<String> = c.elements.iter().map(BigInt::to_string).collect();
    [
        c.period().to_string(),
        c.min_element().to_string(),
        counts.join(" "),
        elems.join(" "),
    ]
}

fn search_csv(r: &SearchReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["period", "min", "hits", "counts", "elements"])?;
    for h in &r.cycles {
        let [p, m, k, e] = cycle_fields(&h.cycle);
        w.write_record([p, m, h.hits.to_string(), k, e])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}

fn search_pretty(r: &SearchReport, label: &str) -> String {
    let t = &r.tallies;
    let mut s = format!(
        "{label} on [{}, {}]: {} cycles\n  starts {}  entered a cycle {}  on a cycle {}  step cutoff {}  magnitude cutoff {}\n",
        r.lo,
        r.hi,
        r.cycles.len(),
        t.starts,
        t.entered_cycle,
        t.in_cycle,
        t.step_limit,
        t.magnitude_limit
    );
    for h in &r.cycles {
        let head: Vec<String> = h.cycle.elements.iter().take(8).map(|x| x.to_string()).collect();
        let more = if h.cycle.period() > 8 { " ..." } else { "" };
        writeln!(
            s,
            "  period {:>5}  min {:>8}  hits {:>7}  <{}{more}>",
            h.cycle.period(),
            h.cycle.min_element(),
            h.hits,
            head.join(", ")
        )
        .unwrap();
    }
    s
}

fn cmd_search(
    cfg: &RunConfig,
    lo: &BigInt,
    hi: &BigInt,
    threads: Option<usize>,
    catalog_path: Option<PathBuf>,
) -> CliResult {
    if lo > hi {
        return Err(usage(format!("empty range: --lo {lo} is above --hi {hi}")));
    }
    let mut report = search_range(&cfg.mapping, lo, hi, &options(cfg, threads)?)?;
    report.family = Some(cfg.label.clone());
    let text = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
        OutputFormat::Csv => search_csv(&report)?,
        OutputFormat::Pretty => search_pretty(&report, &cfg.label),
    };
    cfg.emit(&text)?;
    if let Some(p) = catalog_path {
        std::fs::write(&p, report.catalog().to_json())
            .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", p.display()))?;
    }
    Ok(())
}

fn cmd_search_node(
    cfg: &RunConfig,
    k1: u64,
    k2: u64,
    signs: Option<&str>,
    cap: u64,
    threads: Option<usize>,
) -> CliResult {
    let signs = signs
        .map(|s| match s {
            "positive" => Ok(SignPolicy::Positive),
            "negative" => Ok(SignPolicy::Negative),
            "both" => Ok(SignPolicy::Both),
            "by-side" => Ok(SignPolicy::BySide),
            other => Err(usage(format!("unknown sign policy '{other}'"))),
        })
        .transpose()?;
    let constant = match &cfg.constant {
        Some(c) => c.clone(),
        None => TwoBranchFamily::from_mapping("", &cfg.mapping)
            .map_err(|e| usage(e.to_string()))?
            .default_constant
            .ok_or_else(|| usage("this family needs --constant"))?,
    };
    let r = search_node(&cfg.mapping, k1, k2, &constant, signs, &options(cfg, threads)?, cap)?;
    let text = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&r)?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["period", "min", "counts", "elements"])?;
            for c in &r.cycles {
                w.write_record(cycle_fields(c))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?
        }
        OutputFormat::Pretty => {
            let mut s = format!(
                "node ({k1},{k2}) on {}: λ = {} ≈ {}\nC = {} (ln C = {}, constant {}{})\nsigns: {:?}\n",
                cfg.label,
                r.lambda,
                r.lambda.to_decimal(15),
                r.c,
                r.ln_c,
                r.constant,
                if r.used_abs_lambda { ", using |λ|" } else { "" },
                r.signs
            );
            for rep in r.positive.iter().chain(r.negative.iter()) {
                s.push_str(&search_pretty(rep, &cfg.label));
            }
            writeln!(s, "cycles with these counts: {}", r.cycles.len()).unwrap();
            for c in &r.cycles {
                writeln!(s, "  period {} min {}", c.period(), c.min_element()).unwrap();
            }
            s
        }
    };
    cfg.emit(&text)
}

fn cmd_verify(target: &str, mapping: &MappingArgs, out: &OutputArgs) -> CliResult {
    let cat = match catalog::fixtures::by_name(target) {
        Some(c) if !std::path::Path::new(target).exists() => c,
        _ => CycleCatalog::load(std::path::Path::new(target))?,
    };
    let m = if mapping.family.is_some() || mapping.file.is_some() {
        mapping.resolve()?.0
    } else {
        cat.mapping.clone()
    };
    let report = verify_catalog(&m, &cat);
    let text = match out.format {
        OutputFormat::Json => serde_json::to_string_pretty(&report)?,
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["index", "ok", "period", "min", "problems"])?;
            for e in &report.entries {
                w.write_record([
                    e.index.to_string(),
                    e.ok.to_string(),
                    e.period.map(|p| p.to_string()).unwrap_or_default(),
                    e.min.as_ref().map(|p| p.to_string()).unwrap_or_default(),
                    e.problems.join("; "),
                ])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?
        }
        OutputFormat::Pretty => {
            let mut s = String::new();
            for e in &report.entries {
                let period = e.period.map_or("?".into(), |p| p.to_string());
                let min = e.min.as_ref().map_or("?".into(), |p| p.to_string());
                let status = if e.ok { "ok" } else { "FAIL" };
                writeln!(s, "{:>4}  {status:<4}  period {period:>5}  min {min}", e.index).unwrap();
                for p in &e.problems {
                    writeln!(s, "        {p}").unwrap();
                }
            }
            for (a, b) in &report.shared {
                writeln!(s, "entries {a} and {b} share elements").unwrap();
            }
            if report.mapping_mismatch {
                writeln!(s, "catalog mapping differs from {m}").unwrap();
            }
            s
        }
    };
    out.emit(&text)?;
    if report.ok() {
        eprintln!("{}: {} cycles verified", target, report.entries.len());
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{target}: verification failed ({} of {} entries bad)",
            report.failures(),
            report.entries.len()
        )))
    }
}

fn cmd_trajectory(m: &MappingDef, start: &BigInt, steps: u64, out: &OutputArgs) -> CliResult {
    let traj = m.trajectory(start, steps, None)?;
    let mut counts = BranchCounts::zeros(m.d());
    let mut rows = Vec::with_capacity(traj.steps.len());
    for s in &traj.steps {
        counts.counts[s.branch] += 1;
        let (k1, k2) = counts.growth_split(m);
        rows.push((s.value.clone(), s.branch, k1, k2));
    }
    let text = match out.format {
        OutputFormat::Json => {
            let steps: Vec<_> = rows
                .iter()
                .enumerate()
                .map(|(i, (v, b, k1, k2))| {
                    json!({"step": i + 1, "value": big_json(v), "branch": b, "k1": k1, "k2": k2})
                })
                .collect();
            let lambda = lambda_exact(m, &counts);
            serde_json::to_string_pretty(&json!({
                "mapping": m,
                "start": big_json(start),
                "steps": steps,
                "counts": counts,
                "lambda": lambda,
            }))?
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["step", "value", "branch", "k1", "k2"])?;
            w.write_record(["0".into(), start.to_string(), String::new(), "0".into(), "0".into()])?;
            for (i, (v, b, k1, k2)) in rows.iter().enumerate() {
                w.write_record([
                    (i + 1).to_string(),
                    v.to_string(),
                    b.to_string(),
                    k1.to_string(),
                    k2.to_string(),
                ])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?
        }
        OutputFormat::Pretty => {
            let values: Vec<String> = traj.values().iter().map(BigInt::to_string).collect();
            let mut s = values.join(" ");
            s.push_str("\n\n step  value  branch  (k1,k2)\n");
            for (i, (v, b, k1, k2)) in rows.iter().enumerate() {
                writeln!(s, "{:>5}  {v}  {b}  ({k1},{k2})", i + 1).unwrap();
            }
            if !rows.is_empty() {
                writeln!(s, "λ = {}", lambda_exact(m, &counts).to_decimal(15)).unwrap();
            }
            s
        }
    };
    out.emit(&text)
}

fn big_json(v: &BigInt) -> serde_json::Value {
    match i64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

fn cmd_oracle(m: &MappingDef, label: &str, max_period: u32, budget: u64, out: &OutputArgs) -> CliResult {
    let e = enumerate_cycles_exact(m, max_period, budget).map_err(|e| usage(e.to_string()))?;
    let cat = e.catalog().with_family(label);
    let text = match out.format {
        OutputFormat::Json => cat.to_json(),
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["period", "min", "counts", "elements"])?;
            for c in &e.cycles {
                w.write_record(cycle_fields(c))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?
        }
        OutputFormat::Pretty => {
            let mut s = format!(
                "{label}: {} cycles with period <= {max_period} ({} sequences, {} with slope 1)\n",
                e.cycles.len(),
                e.sequences,
                e.degenerate
            );
            for c in &e.cycles {
                let elems: Vec<String> = c.elements.iter().map(BigInt::to_string).collect();
                writeln!(s, "  period {:>3}  <{}>", c.period(), elems.join(", ")).unwrap();
            }
            s
        }
    };
    out.emit(&text)
}

fn cmd_lambda(m: &MappingDef, counts: &BranchCounts, bits: u32, out: &OutputArgs) -> CliResult {
    let exact = lambda_exact(m, counts);
    let ln = ln_lambda(m, counts, bits).ok().map(|v| v.to_decimal(15));
    let (k1, k2) = counts.growth_split(m);
    let decimal = exact.to_decimal(15);
    let text = match out.format {
        OutputFormat::Json => serde_json::to_string_pretty(&json!({
            "counts": counts,
            "k1": k1,
            "k2": k2,
            "lambda": exact,
            "decimal": decimal,
            "ln_lambda": ln,
        }))?,
        OutputFormat::Csv => format!(
            "k1,k2,lambda,decimal,ln_lambda\n{k1},{k2},{exact},{decimal},{}\n",
            ln.clone().unwrap_or_default()
        ),
        OutputFormat::Pretty => format!(
            "({k1},{k2}) λ = {exact}\n  ≈ {decimal}\n  ln λ = {}\n",
            ln.unwrap_or_else(|| "undefined".into())
        ),
    };
    out.emit(&text)
}

fn cmd_bound(cfg: &RunConfig, counts: &BranchCounts) -> CliResult {
    let constant = match &cfg.constant {
        Some(c) => c.clone(),
        None => TwoBranchFamily::from_mapping("", &cfg.mapping)
            .ok()
            .and_then(|f| f.default_constant)
            .ok_or_else(|| usage("this family needs --constant"))?,
    };
    let b = bound_c(&cfg.mapping, counts, &constant, cfg.precision_bits)?;
    let (k1, k2) = counts.growth_split(&cfg.mapping);
    let c = b.c.to_decimal(table::LN_C_DIGITS);
    let ln_c = b.ln_c.to_decimal(table::LN_C_DIGITS);
    let text = match cfg.format {
        OutputFormat::Json => serde_json::to_string_pretty(&json!({
            "k1": k1,
            "k2": k2,
            "constant": b.constant,
            "c": c,
            "ln_c": ln_c,
            "used_abs_lambda": b.used_abs_lambda,
        }))?,
        OutputFormat::Csv => format!("k1,k2,constant,c,ln_c\n{k1},{k2},{},{c},{ln_c}\n", b.constant),
        OutputFormat::Pretty => {
            let note = if b.used_abs_lambda { " (using |λ|)" } else { "" };
            format!("({k1},{k2}) constant {}: C = {c}, ln C = {ln_c}{note}\n", b.constant)
        }
    };
    cfg.emit(&text)
}
