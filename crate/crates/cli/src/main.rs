//! `concentrator`: command-line access to the bound evaluator, the
//! exponent analysis, the graph lab and the certification suite.
//!
//! Exit codes: 0 certified, 1 refuted, 2 undecided or budget exceeded,
//! 64 usage error.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use concentrator_core::bound::{
    lhs_sum, s_max, Budget, Mode, ScanOptions, SmaxOutcome, SumOptions, SumReport,
};
use concentrator_core::certify::{run_all, summary_json, CertifyOptions};
use concentrator_core::constants::{constants, ConstantsJson};
use concentrator_core::lab::{
    bad_event_census, build_graph, pair_counts, parse_edge_list, parse_graph_json, random_search,
    sample_permutation, verify_concentrator, BipartiteGraph, SearchOptions, TrialRng,
    DEFAULT_SUBSET_BUDGET,
};
use concentrator_core::parse::parse_rational;
use concentrator_core::phi::{
    c_star, certify_critical_value, critical_points, max_phi_k3, MaxPhiOptions, RootOptions,
};
use concentrator_core::{Error, Precision, Verdict};

const EXIT_CERTIFIED: u8 = 0;
const EXIT_REFUTED: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "concentrator",
    version,
    about = "Certified evaluation of a random concentrator construction"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Output::Json, global = true)]
    output: Output,
    /// Omit wall-clock timings so identical runs give identical output.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Worker threads for parallel-capable operations.
    #[arg(long, env = "CONCENTRATOR_WORKERS", default_value_t = 1, global = true)]
    workers: usize,
    /// Decimal digits for extended-precision certification.
    #[arg(long, default_value_t = 60, global = true)]
    precision: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Interval,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Interval => Mode::Interval,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the union-bound sum at (m, s).
    Sum {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Maximum number of terms.
        #[arg(long)]
        budget: Option<u64>,
        /// Maximum wall time in seconds.
        #[arg(long)]
        time_budget: Option<f64>,
    },
    /// Find s(m), the largest s with the sum certified below one.
    Smax {
        #[arg(long)]
        m: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Interval)]
        mode: ModeArg,
        /// Evaluate every s instead of stopping at the first certified one.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        time_budget: Option<f64>,
    },
    /// Critical points and maximum of the exponent at k = 3.
    Phi {
        #[arg(long, default_value = "5.7")]
        c: String,
        /// Grid step for the maximum sweep.
        #[arg(long, default_value_t = 1e-3)]
        grid_step: f64,
    },
    /// The threshold c* where the maximum exponent crosses zero.
    Cstar {
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Seeded random search for graphs passing exhaustive verification.
    Search {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Subset budget per verification.
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: u64,
    },
    /// Verify the concentrator property of one graph.
    Verify {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(long)]
        q: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: u64,
    },
    /// List the Hall violations of one graph with their (k, l, r) shape.
    Census {
        #[command(flatten)]
        graph: GraphSource,
        #[arg(long, default_value_t = DEFAULT_SUBSET_BUDGET)]
        budget: u64,
    },
    /// Emit the graph G(π) for a seeded permutation.
    Graph {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        s: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
    },
    /// Approximation constants for a given degree.
    Constants {
        #[arg(long)]
        gamma: String,
    },
    /// Run every certification check.
    CertifyAll {
        /// Skip the 31 <= m <= 151 range.
        #[arg(long)]
        no_stretch: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Json,
    EdgeList,
}

#[derive(Args)]
struct GraphSource {
    /// Graph file, JSON or edge list.
    #[arg(long, conflicts_with_all = ["seed", "trial"])]
    input: Option<PathBuf>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trial: Option<u64>,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Budget(_) | Error::Solver(_) => EXIT_UNDECIDED,
            Error::Domain(_) | Error::Invalid(_) | Error::Parse { .. } => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

type CliResult = Result<u8, Failure>;

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Certified => EXIT_CERTIFIED,
        Verdict::Refuted => EXIT_REFUTED,
        Verdict::Undecided => EXIT_UNDECIDED,
    }
}

fn budget(terms: Option<u64>, seconds: Option<f64>) -> Result<Budget, Failure> {
    let max_time = match seconds {
        Some(t) if t.is_finite() && t >= 0.0 => Some(Duration::from_secs_f64(t)),
        Some(t) => return Err(usage(format!("invalid time budget {t}"))),
        None => None,
    };
    Ok(Budget {
        max_terms: terms,
        max_time,
    })
}

/// Prints a line; a closed pipe is not an error.
fn out(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit_json(v: &Value) {
    out(&serde_json::to_string_pretty(v).expect("serializable"));
}

fn text_lines(v: &Value, prefix: &str, out: &mut Vec<String>) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let p = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                text_lines(x, &p, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, x) in items.iter().enumerate() {
                text_lines(x, &format!("{prefix}[{i}]"), out);
            }
        }
        other => out.push(format!("{prefix}: {other}")),
    }
}

/// JSON or flattened `key: value` text; CSV only where a command has rows.
fn emit(g: &Global, v: &Value, csv: Option<String>) -> Result<(), Failure> {
    match g.output {
        Output::Json => emit_json(v),
        Output::Text => {
            let mut lines = Vec::new();
            text_lines(v, "", &mut lines);
            out(&lines.join("\n"));
        }
        Output::Csv => match csv {
            Some(c) => out(c.trim_end()),
            None => return Err(usage("this command has no CSV output")),
        },
    }
    Ok(())
}

fn precision(g: &Global) -> Result<Precision, Failure> {
    Ok(Precision::digits(g.precision)?)
}

fn rational(s: &str) -> Result<concentrator_core::Rational, Failure> {
    Ok(parse_rational(s)?)
}

fn load_graph(src: &GraphSource) -> Result<BipartiteGraph, Failure> {
    if let Some(path) = &src.input {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        let mut g = if text.trim_start().starts_with('{') {
            parse_graph_json(&text)?
        } else {
            parse_edge_list(&text)?
        };
        if let Some(s) = src.s {
            g = BipartiteGraph::new(g.m, Some(s), g.edges().to_vec())?;
        }
        return Ok(g);
    }
    let (Some(m), Some(s)) = (src.m, src.s) else {
        return Err(usage(
            "give --input FILE, or --m and --s with an optional --seed",
        ));
    };
    if s > 6 * m {
        return Err(usage(format!("s = {s} outside [0, 6m]")));
    }
    let n = (36 * m - s) as usize;
    let perm = sample_permutation(
        n,
        &mut TrialRng::new(src.seed.unwrap_or(42), src.trial.unwrap_or(0)),
    );
    Ok(build_graph(m, s, &perm)?)
}

fn sum_report(g: &Global, rep: &SumReport) -> CliResult {
    emit(g, &rep.to_json(g.deterministic), Some(rep.per_k_csv()))?;
    Ok(verdict_code(rep.verdict()))
}

fn run(cli: Cli) -> CliResult {
    let g = &cli.global;
    match cli.command {
        Command::Sum {
            m,
            s,
            mode,
            budget: terms,
            time_budget,
        } => {
            let opts = SumOptions {
                mode: mode.into(),
                workers: g.workers,
                budget: budget(terms, time_budget)?,
            };
            sum_report(g, &lhs_sum(m, s, &opts)?)
        }
        Command::Smax {
            m,
            mode,
            full,
            budget: terms,
            time_budget,
        } => {
            let mut opts = ScanOptions::new(mode.into());
            if full {
                opts = opts.full();
            }
            opts.workers = g.workers;
            opts.budget = budget(terms, time_budget)?;
            let rep = s_max(m, &opts)?;
            let mut v = rep.to_json(g.deterministic);
            if let Some(s) = rep.s_max() {
                v["note"] = json!(if s >= 6 * m {
                    format!("s(m)/m >= 6 holds at m = {m}")
                } else {
                    format!("s(m)/m >= 6 fails at m = {m}: s({m}) = {s} < {}", 6 * m)
                });
            }
            let csv =
                rep.reports
                    .iter()
                    .fold(String::from("s,mode,approx,verdict\n"), |mut acc, r| {
                        acc.push_str(&format!(
                            "{},{},{:e},{}\n",
                            r.s,
                            json!(r.mode).as_str().unwrap_or(""),
                            r.total.approx(),
                            json!(r.verdict()).as_str().unwrap_or("")
                        ));
                        acc
                    });
            emit(g, &v, Some(csv))?;
            Ok(match rep.outcome {
                SmaxOutcome::Found(_) => EXIT_CERTIFIED,
                SmaxOutcome::Undecided { .. } => EXIT_UNDECIDED,
            })
        }
        Command::Phi { c, grid_step } => {
            let cq = rational(&c)?;
            let cf = cq.to_f64().unwrap_or(f64::NAN);
            let max = max_phi_k3(cf, &MaxPhiOptions { grid_step })?;
            let points = if cf < 6.0 {
                critical_points(cf, &RootOptions::default())?
            } else {
                Vec::new()
            };
            let cert = if cf < 6.0 {
                Some(certify_critical_value(&cq, precision(g)?)?)
            } else {
                None
            };
            let v = json!({
                "c": c,
                "critical_points": points,
                "max": max,
                "certified": cert,
            });
            let csv = points.iter().fold(
                String::from("c,l,r,value,residual_l,residual_r\n"),
                |mut acc, p| {
                    acc.push_str(&format!(
                        "{},{},{},{:e},{:e},{:e}\n",
                        p.c, p.l, p.r, p.value, p.residual_l, p.residual_r
                    ));
                    acc
                },
            );
            emit(g, &v, Some(csv))?;
            Ok(match &cert {
                Some(c) if c.negative => EXIT_CERTIFIED,
                Some(c) if c.positive => EXIT_REFUTED,
                _ => EXIT_UNDECIDED,
            })
        }
        Command::Cstar { tol } => {
            let rep = c_star(tol)?;
            emit(g, &json!(rep), None)?;
            Ok(EXIT_CERTIFIED)
        }
        Command::Search {
            m,
            s,
            q,
            trials,
            seed,
            budget,
        } => {
            let opts = SearchOptions {
                q,
                workers: g.workers,
                subset_budget: budget,
                ..SearchOptions::default()
            };
            let rep = random_search(m, s, trials, seed, &opts)?;
            emit(g, &rep.to_json(), None)?;
            Ok(if rep.good_count > 0 {
                EXIT_CERTIFIED
            } else {
                EXIT_UNDECIDED
            })
        }
        Command::Verify { graph, q, budget } => {
            let gr = load_graph(&graph)?;
            let q = q.unwrap_or(3 * gr.m);
            let res = verify_concentrator(&gr, q, budget)?;
            let mut v = json!(res);
            v["m"] = json!(gr.m);
            v["q"] = json!(q);
            emit(g, &v, None)?;
            Ok(if res.is_concentrator {
                EXIT_CERTIFIED
            } else {
                EXIT_REFUTED
            })
        }
        Command::Census { graph, budget } => {
            let gr = load_graph(&graph)?;
            if gr.s.is_none() {
                return Err(usage("census needs --s for graphs read from files"));
            }
            let events = bad_event_census(&gr, Some(budget))?;
            let counts = pair_counts(&gr, Some(budget))?;
            let shapes: Vec<Value> = counts
                .counts
                .iter()
                .map(|(&(k, l, r), &n)| json!({ "k": k, "l": l, "r": r, "pairs": n.to_string() }))
                .collect();
            let v = json!({ "m": gr.m, "s": gr.s, "violations": events, "pair_counts": shapes });
            let csv = counts.counts.iter().fold(
                String::from("k,l,r,pairs\n"),
                |mut acc, (&(k, l, r), n)| {
                    acc.push_str(&format!("{k},{l},{r},{n}\n"));
                    acc
                },
            );
            emit(g, &v, Some(csv))?;
            Ok(if events.is_empty() {
                EXIT_CERTIFIED
            } else {
                EXIT_REFUTED
            })
        }
        Command::Graph {
            m,
            s,
            seed,
            trial,
            format,
        } => {
            if s > 6 * m {
                return Err(usage(format!("s = {s} outside [0, 6m]")));
            }
            let perm = sample_permutation((36 * m - s) as usize, &mut TrialRng::new(seed, trial));
            let gr = build_graph(m, s, &perm)?;
            match format {
                GraphFormat::Json => emit_json(&gr.to_json()),
                GraphFormat::EdgeList => out(gr.to_edge_list().trim_end()),
            }
            Ok(EXIT_CERTIFIED)
        }
        Command::Constants { gamma } => {
            let rep = constants(&rational(&gamma)?)?;
            emit(g, &json!(ConstantsJson::from(&rep)), None)?;
            Ok(EXIT_CERTIFIED)
        }
        Command::CertifyAll { no_stretch } => {
            let opts = CertifyOptions {
                workers: g.workers,
                precision: precision(g)?,
                stretch: !no_stretch,
            };
            let results = run_all(&opts);
            match g.output {
                Output::Text => {
                    for r in &results {
                        out(&r.line());
                    }
                }
                _ => emit(g, &summary_json(&results, g.deterministic), None)?,
            }
            Ok(if results.iter().all(|r| r.passed) {
                EXIT_CERTIFIED
            } else {
                EXIT_REFUTED
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
