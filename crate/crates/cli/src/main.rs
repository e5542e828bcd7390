use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use eulerian_core::counting::{
    eul_backtrack, eul_exact_with, integral_s_from_count, CountError, CountMethod, CountOptions, MAX_BACKTRACK_EDGES,
    MAX_ORIENTATION_EDGES,
};
use eulerian_core::estimator::{
    estimate_eul, ratio_row, run_experiment, table_to_csv, table_to_json, ExperimentConfig, BAND,
};
use eulerian_core::exact::spanning_tree_count;
use eulerian_core::graph::{classify, gen_even_graph, parse_graph, Graph, MAX_VERTICES};
use eulerian_core::lemmalab::{
    corpus, run_suite, summarize, summary_to_csv, verdicts_to_json_lines, CorpusEntry, LemmaVerdict, SuiteConfig,
    MAX_TAIL_VERTICES,
};
use eulerian_core::probe::{mc_s0_with_threads, ProbeReport, DEFAULT_EPSILON, MAX_BRUTE_VERTICES};
use eulerian_core::spectral::graph_spectrum;

const CONVENTION: &str =
    "Eulerian circuits are closed directed edge sequences up to rotation; a circuit and its reversal count separately";

#[derive(Parser)]
#[command(
    name = "eulcount",
    version,
    about = "Count, estimate and probe Eulerian circuits of simple even graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a connected even graph as an edge list.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.8)]
        p: f64,
    },
    /// Exact Eulerian circuit count.
    Count {
        #[arg(long = "in")]
        input: PathBuf,
        /// Count by direct trail enumeration instead of orientations.
        #[arg(long)]
        backtrack: bool,
        #[arg(long, default_value_t = 0)]
        root: usize,
    },
    /// Closed-form estimate, compared with the exact count when feasible.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        no_exact: bool,
    },
    /// Laplacian spectrum summary.
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Monte-Carlo estimate of the dominant-region contour integral.
    Probe {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        no_exact: bool,
    },
    /// Check the Laplacian inequalities on one graph or the fixed-seed corpus.
    Verify {
        #[arg(long = "in")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        sigma: f64,
        #[arg(long, default_value_t = 0.3)]
        a: f64,
        #[arg(long, default_value_t = 1000)]
        contractions: usize,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        corpus_size: u64,
        /// Also write the per-check summary CSV here.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Estimate/exact ratio table over generated graphs.
    Report {
        #[arg(long, default_value_t = 6)]
        n_min: usize,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 0.8)]
        p: f64,
        #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
        count: u64,
        #[arg(long, default_value_t = 0.5)]
        min_sigma: f64,
    },
}

struct Failure {
    code: String,
    message: String,
    exit: u8,
}

impl Failure {
    fn domain(code: &str, message: impl ToString) -> Self {
        Failure {
            code: code.to_string(),
            message: message.to_string(),
            exit: 1,
        }
    }

    fn usage(message: impl ToString) -> Self {
        Failure {
            code: "USAGE".into(),
            message: message.to_string(),
            exit: 2,
        }
    }
}

impl From<CountError> for Failure {
    fn from(e: CountError) -> Self {
        Failure::domain(e.code(), e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}: {}", f.code, f.message);
            ExitCode::from(f.exit)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Gen { n, p } => gen(cli, *n, *p),
        Command::Count { input, backtrack, root } => count(cli, &read_graph(input)?, *backtrack, *root),
        Command::Estimate { input, no_exact } => estimate(cli, &read_graph(input)?, *no_exact),
        Command::Spectrum { input } => spectrum(cli, &read_graph(input)?),
        Command::Probe {
            input,
            epsilon,
            samples,
            no_exact,
        } => probe(cli, &read_graph(input)?, *epsilon, *samples, *no_exact),
        Command::Verify {
            input,
            sigma,
            a,
            contractions,
            corpus_size,
            summary,
        } => {
            let entries = match input {
                Some(path) => {
                    let g = read_graph(path)?;
                    vec![CorpusEntry {
                        id: path.display().to_string(),
                        seed: cli.seed,
                        n: g.n(),
                        p: f64::NAN,
                        graph: Some(g),
                    }]
                }
                None => corpus(1..=*corpus_size, 6, 30),
            };
            let config = SuiteConfig {
                sigma: *sigma,
                a: *a,
                contractions: *contractions,
                seed: cli.seed,
                threads: cli.threads,
            };
            verify(cli, &entries, &config, summary.as_deref())
        }
        Command::Report {
            n_min,
            n_max,
            p,
            count,
            min_sigma,
        } => {
            let config = ExperimentConfig {
                n_min: *n_min,
                n_max: *n_max,
                p: *p,
                count: *count as usize,
                seed: cli.seed,
                min_sigma: *min_sigma,
                threads: cli.threads,
            };
            report(cli, &config)
        }
    }
}

fn read_graph(path: &Path) -> Result<Graph, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::domain("IO_ERROR", format!("{}: {e}", path.display())))?;
    parse_graph(&text).map_err(|e| Failure::domain(e.code(), e))
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::domain("IO_ERROR", format!("{}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::domain("IO_ERROR", e))
        }
    }
}

fn guards() -> Value {
    json!({
        "max_vertices": MAX_VERTICES,
        "max_orientation_edges": MAX_ORIENTATION_EDGES,
        "max_backtrack_edges": MAX_BACKTRACK_EDGES,
        "max_brute_tree_sum_vertices": MAX_BRUTE_VERTICES,
        "max_tree_enumeration_vertices": MAX_TAIL_VERTICES,
    })
}

fn envelope(cli: &Cli, command: &str, result: Value) -> Value {
    json!({
        "tool": "eulcount",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": cli.seed,
        "threads": cli.threads,
        "guards": guards(),
        "convention": CONVENTION,
        "result": result,
    })
}

fn to_text(doc: &Value) -> String {
    let mut out = format!(
        "# eulcount {} {} seed={}\n# {}\n",
        doc["version"].as_str().unwrap_or(""),
        doc["command"].as_str().unwrap_or(""),
        doc["seed"],
        CONVENTION
    );
    if let Some(map) = doc["result"].as_object() {
        for (k, v) in map {
            match v {
                Value::String(s) => out.push_str(&format!("{k}: {s}\n")),
                other => out.push_str(&format!("{k}: {other}\n")),
            }
        }
    }
    out
}

fn emit_document(cli: &Cli, command: &str, result: Value, csv: Option<String>) -> Result<(), Failure> {
    let doc = envelope(cli, command, result);
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => emit(cli, &format!("{}\n", serde_json::to_string_pretty(&doc).expect("json"))),
        Format::Text => emit(cli, &to_text(&doc)),
        Format::Csv => match csv {
            Some(c) => emit(cli, &c),
            None => Err(Failure::usage(format!("{command} has no CSV output"))),
        },
    }
}

fn gen(cli: &Cli, n: usize, p: f64) -> Result<(), Failure> {
    let g = gen_even_graph(n, p, cli.seed).map_err(|e| Failure::domain(e.code(), e))?;
    match cli.format.unwrap_or(Format::Text) {
        Format::Text => emit(
            cli,
            &format!(
                "# eulcount {} gen n={n} p={p} seed={}\n{}",
                env!("CARGO_PKG_VERSION"),
                cli.seed,
                g.to_edge_list()
            ),
        ),
        Format::Json => {
            let edges: Vec<[usize; 2]> = g.edges().iter().map(|&(u, v)| [u + 1, v + 1]).collect();
            let result = json!({"n": g.n(), "E": g.edge_count(), "p": p, "edges": edges});
            emit_document(cli, "gen", result, None)
        }
        Format::Csv => Err(Failure::usage("gen has no CSV output")),
    }
}

fn method_name(m: CountMethod) -> &'static str {
    match m {
        CountMethod::BestSum => "best_sum",
        CountMethod::Backtrack => "backtrack",
    }
}

fn count(cli: &Cli, g: &Graph, backtrack: bool, root: usize) -> Result<(), Failure> {
    let result = if backtrack {
        let eul = eul_backtrack(g)?;
        json!({
            "n": g.n(),
            "E": g.edge_count(),
            "eul": eul.to_string(),
            "t": spanning_tree_count(g).to_string(),
            "method": method_name(CountMethod::Backtrack),
        })
    } else {
        let r = eul_exact_with(
            g,
            CountOptions {
                root,
                threads: cli.threads,
            },
        )?;
        json!({
            "n": g.n(),
            "E": g.edge_count(),
            "eul": r.eul.to_string(),
            "t": r.tree_count.to_string(),
            "orientations": r.orientation_count.to_string(),
            "method": method_name(r.method),
            "root": root,
        })
    };
    let csv = format!(
        "n,E,eul,t\n{},{},{},{}\n",
        result["n"],
        result["E"],
        result["eul"].as_str().unwrap_or(""),
        result["t"].as_str().unwrap_or("")
    );
    emit_document(cli, "count", result, Some(csv))
}

fn exact_or_guard(
    g: &Graph,
    threads: usize,
    skip: bool,
) -> Result<(Option<eulerian_core::BigCount>, Option<String>), Failure> {
    if skip {
        return Ok((None, Some("exact count skipped".into())));
    }
    match eul_exact_with(g, CountOptions { root: 0, threads }) {
        Ok(r) => Ok((Some(r.eul), None)),
        Err(e @ CountError::TooLarge { .. }) => Ok((None, Some(e.to_string()))),
        Err(e) => Err(e.into()),
    }
}

fn estimate(cli: &Cli, g: &Graph, no_exact: bool) -> Result<(), Failure> {
    let mut report = estimate_eul(g).map_err(|e| Failure::domain(e.code(), e))?;
    let (exact, note) = exact_or_guard(g, cli.threads, no_exact)?;
    if let Some(e) = &exact {
        report = report.with_exact(e);
    }
    let mut result = serde_json::to_value(&report).expect("json");
    result["exact"] = exact.as_ref().map_or(Value::Null, |e| Value::String(e.to_string()));
    if let Some(n) = note {
        result["note"] = Value::String(n);
    }
    let opts = CountOptions {
        root: 0,
        threads: cli.threads,
    };
    let csv = (!no_exact).then(|| table_to_csv(&[ratio_row("input", g, opts)]));
    emit_document(cli, "estimate", result, csv)
}

fn spectrum(cli: &Cli, g: &Graph) -> Result<(), Failure> {
    let s = graph_spectrum(g);
    let class = classify(g);
    let mut result = serde_json::to_value(&s).expect("json");
    result["n"] = json!(g.n());
    result["E"] = json!(g.edge_count());
    result["min_degree"] = json!(g.min_degree());
    result["max_degree"] = json!(g.max_degree());
    result["classification"] = serde_json::to_value(class).expect("json");
    let csv = format!(
        "n,E,lambda1,lambda_max,sigma_hat\n{},{},{},{},{}\n",
        g.n(),
        g.edge_count(),
        s.lambda1,
        s.lambda_max,
        s.sigma_hat
    );
    emit_document(cli, "spectrum", result, Some(csv))
}

fn probe(cli: &Cli, g: &Graph, epsilon: f64, samples: usize, no_exact: bool) -> Result<(), Failure> {
    let est =
        mc_s0_with_threads(g, epsilon, samples, cli.seed, cli.threads).map_err(|e| Failure::domain(e.code(), e))?;
    let (exact, note) = exact_or_guard(g, cli.threads, no_exact)?;
    let s_exact = exact.as_ref().map(|e| integral_s_from_count(g, e));
    let report = ProbeReport::new(g, &est, cli.seed, s_exact);
    let mut result = serde_json::to_value(&report).expect("json");
    result["accepted"] = json!(est.accepted);
    result["region_volume"] = json!(est.region_volume);
    result["half_width"] = json!(est.half_width);
    if let Some(n) = note {
        result["note"] = Value::String(n);
    }
    emit_document(cli, "probe", result, None)
}

fn verify(
    cli: &Cli,
    entries: &[CorpusEntry],
    config: &SuiteConfig,
    summary_path: Option<&Path>,
) -> Result<(), Failure> {
    let verdicts = run_suite(entries, config).map_err(|e| Failure::domain(e.code(), e))?;
    let summary = summarize(&verdicts);
    let csv = summary_to_csv(&summary).map_err(|e| Failure::domain("IO_ERROR", e))?;
    if let Some(path) = summary_path {
        fs::write(path, &csv).map_err(|e| Failure::domain("IO_ERROR", format!("{}: {e}", path.display())))?;
    }
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => {
            let header = json!({
                "tool": "eulcount",
                "version": env!("CARGO_PKG_VERSION"),
                "command": "verify",
                "seed": cli.seed,
                "guards": guards(),
                "convention": CONVENTION,
                "config": config,
                "corpus": entries,
            });
            emit(cli, &format!("{header}\n{}", verdicts_to_json_lines(&verdicts)))?
        }
        Format::Csv => emit(cli, &csv)?,
        Format::Text => {
            let mut out = format!("# eulcount {} verify seed={}\n", env!("CARGO_PKG_VERSION"), cli.seed);
            for s in &summary {
                out.push_str(&format!(
                    "{:<28} asserted {:>5}  violations {:>3}  measured {:>4}  out-of-hypothesis {:>4}  skipped {:>4}\n",
                    s.lemma, s.asserted, s.violations, s.measured, s.out_of_hypothesis, s.skipped
                ));
            }
            emit(cli, &out)?
        }
    }
    let violations: Vec<&LemmaVerdict> = verdicts.iter().filter(|v| v.is_violation()).collect();
    match violations.first() {
        None => Ok(()),
        Some(v) => Err(Failure::domain(
            "LEMMA_VIOLATION",
            format!("{} violations, first: {} on {}", violations.len(), v.lemma, v.graph_id),
        )),
    }
}

fn report(cli: &Cli, config: &ExperimentConfig) -> Result<(), Failure> {
    let exp = run_experiment(config).map_err(|e| Failure::domain(e.code(), e))?;
    let summary = serde_json::to_value(&exp.summary).expect("json");
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            emit(cli, &table_to_csv(&exp.rows))?;
            eprintln!("{summary}");
            Ok(())
        }
        Format::Json | Format::Text => {
            let result = json!({
                "config": config,
                "rows": table_to_json(&exp.rows),
                "summary": summary,
                "band": [BAND.0, BAND.1],
                "note": "the band [0.70, 1.30] with a 90% pass rate is a calibrated acceptance rule, not a published protocol",
            });
            emit_document(cli, "report", result, None)
        }
    }
}
