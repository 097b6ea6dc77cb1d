use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use plateau_core::ingest::{parse_edge_list, parse_swc, write_tree_edge_list, ParsedInput};
use plateau_core::plateaux::{certify, counterexample_dump};
use plateau_core::report::{
    collect_corpus, corpus_histograms, run_batch, run_fuzz, AnalysisOptions, BatchOutcome, Envelope, FuzzConfig,
    InputFormat, SCHEMA,
};
use plateau_core::spectral::{
    detect_plateaux, eigen_with, laplacian, multiplicity, EigenOptions, DEFAULT_HALF_WIDTH, LAMBDA_MINUS,
    LAMBDA_PLUS,
};
use plateau_core::{simplify, VertexId};

const EXIT_INVARIANT: u8 = 2;

#[derive(Parser)]
#[command(name = "plateau", version, about = "Tree simplification and Laplacian plateau certification")]
struct Cli {
    /// Largest Laplacian dimension that will be decomposed.
    #[arg(long, global = true, env = "PLATEAU_MAX_VERTICES", default_value_t = 10_000)]
    size_cap: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Contract degree-2 chains of a rooted tree.
    Simplify {
        #[command(flatten)]
        input: InputArgs,
        /// Write the JSON report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Laplacian spectrum and its plateaux.
    Spectrum {
        #[command(flatten)]
        input: InputArgs,
        /// Include eigenvectors (columns, in eigenvalue order).
        #[arg(long)]
        vectors: bool,
        #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
        window: f64,
        /// Smallest cluster size reported as a plateau.
        #[arg(long, default_value_t = 2)]
        min_multiplicity: usize,
    },
    /// Certify the plateau multiplicities of a graph.
    Verify {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
        window: f64,
        /// Write the counterexample dump here as well as to stderr.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Simplify and certify every tree in a corpus directory.
    Batch {
        dir: PathBuf,
        /// CSV output path; stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = default_parallel())]
        parallel: usize,
        #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
        window: f64,
    },
    /// Degree histograms of a corpus before and after simplification.
    Hist { dir: PathBuf },
    /// Check the plateau, pendant and simplification invariants on random trees.
    Fuzz {
        #[arg(long, default_value_t = 500)]
        trees: usize,
        #[arg(long, default_value_t = 300)]
        max_vertices: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Spine probabilities, cycled across trees.
        #[arg(long = "spine-prob", value_delimiter = ',', default_values_t = [0.0, 0.3, 0.7])]
        spine_prob: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_HALF_WIDTH)]
        window: f64,
        #[arg(long, default_value_t = default_parallel())]
        parallel: usize,
        /// Directory for counterexample dumps.
        #[arg(long)]
        dump_dir: Option<PathBuf>,
        /// Include every per-tree case in the JSON.
        #[arg(long)]
        cases: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Swc,
    Edgelist,
}

#[derive(Args)]
struct InputArgs {
    input: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Root id for edge lists (overrides a `root` header).
    #[arg(long, allow_hyphen_values = true)]
    root: Option<i64>,
}

impl InputArgs {
    fn load(&self) -> Result<ParsedInput> {
        let text = fs::read_to_string(&self.input).with_context(|| format!("reading {}", self.input.display()))?;
        let format = match self.format {
            Some(Format::Swc) => InputFormat::Swc,
            Some(Format::Edgelist) => InputFormat::Edgelist,
            None => InputFormat::from_path(&self.input),
        };
        let parsed = match format {
            InputFormat::Swc => {
                if self.root.is_some() {
                    bail!("--root applies to edge lists only");
                }
                parse_swc(&text).map(ParsedInput::Tree)
            }
            InputFormat::Edgelist => parse_edge_list(&text, self.root),
        };
        parsed.with_context(|| format!("parsing {}", self.input.display()))
    }

    fn name(&self) -> String {
        self.input.display().to_string()
    }
}

fn default_parallel() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn check_window(window: f64) -> Result<(), clap::Error> {
    if window > 0.0 && window.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--window must be positive, got {window}")))
    }
}

fn usage(msg: String) -> clap::Error {
    use clap::CommandFactory;
    Cli::command().error(clap::error::ErrorKind::InvalidValue, msg)
}

fn emit(value: &impl serde::Serialize, output: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(p) => fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => write_stdout(format!("{text}\n").as_bytes())?,
    }
    Ok(())
}

// A closed pipe (e.g. `| head`) is not an error.
fn write_stdout(bytes: &[u8]) -> Result<()> {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn cmd_simplify(input: &InputArgs, output: Option<&Path>) -> Result<ExitCode> {
    let tree = input
        .load()?
        .into_tree()
        .ok_or_else(|| anyhow!("{}: input has a cycle; simplification needs a tree", input.name()))?;
    let s = simplify(&tree);
    let g = tree.graph();
    let id_map: serde_json::Map<String, Value> = g
        .vertices()
        .map(|v| (g.label(v).to_string(), s.new_index(v).map_or(Value::Null, |n| json!(n.index()))))
        .collect();
    let result = json!({
        "root": s.tree.root(),
        "root_id": s.tree.graph().label(s.tree.root()),
        "n": s.tree.n(),
        "edges": s.tree.graph().edges(),
        "ids": (0..s.tree.n()).map(|i| s.tree.graph().label(VertexId(i))).collect::<Vec<_>>(),
        "id_map": id_map,
        "edge_list": write_tree_edge_list(&s.tree),
        "stats": s.stats,
    });
    emit(&Envelope::new(input.name(), result), output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_spectrum(input: &InputArgs, vectors: bool, window: f64, min_mult: usize, cap: usize) -> Result<ExitCode> {
    check_window(window)?;
    let parsed = input.load()?;
    let l = laplacian(parsed.graph());
    let s = eigen_with(&l, EigenOptions { want_vectors: vectors, max_dimension: cap })?;
    let plateaux = detect_plateaux(&s, min_mult, window);
    let points: Vec<(usize, f64)> = s.eigenvalues.iter().copied().enumerate().collect();
    let mut result = json!({
        "n": s.n(),
        "window": window,
        "eigenvalues": s.eigenvalues,
        "plateaux": plateaux,
        "points": points,
        "m_minus": multiplicity(&s, LAMBDA_MINUS, window)?,
        "m_plus": multiplicity(&s, LAMBDA_PLUS, window)?,
    });
    if let Some(v) = &s.eigenvectors {
        let cols: Vec<Vec<f64>> = v.column_iter().map(|c| c.iter().copied().collect()).collect();
        result["eigenvectors"] = json!(cols);
    }
    emit(&Envelope::new(input.name(), result), None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(input: &InputArgs, window: f64, dump: Option<&Path>, cap: usize) -> Result<ExitCode> {
    check_window(window)?;
    let parsed = input.load()?;
    let g = parsed.graph();
    let l = laplacian(g);
    let s = eigen_with(&l, EigenOptions { want_vectors: false, max_dimension: cap })?;
    let cert = certify(g, &l, &s, window)?;
    emit(&Envelope::new(input.name(), &cert), None)?;
    if cert.holds() {
        return Ok(ExitCode::SUCCESS);
    }
    let root = parsed.tree().map(|t| t.root());
    let names: Vec<&str> = cert.violations.iter().map(|v| v.name()).collect();
    let detail: Vec<String> = cert.violations.iter().map(|v| format!("{v:?}")).collect();
    let text = counterexample_dump(g, root, &names.join(", "), &detail.join("\n"));
    eprint!("{text}");
    if let Some(p) = dump {
        fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(ExitCode::from(EXIT_INVARIANT))
}

fn batch_csv(outcome: &BatchOutcome) -> Result<Vec<u8>> {
    let mut out = format!("# schema: {SCHEMA}\n").into_bytes();
    let mut rows = csv::Writer::from_writer(Vec::new());
    for r in &outcome.rows {
        rows.serialize(r)?;
    }
    out.extend(rows.into_inner().map_err(|e| anyhow!("{e}"))?);
    out.extend_from_slice(b"\n# aggregates\n");
    let mut agg = csv::Writer::from_writer(Vec::new());
    for a in &outcome.aggregates {
        agg.serialize(a)?;
    }
    out.extend(agg.into_inner().map_err(|e| anyhow!("{e}"))?);
    Ok(out)
}

fn cmd_batch(dir: &Path, output: Option<&Path>, parallel: usize, window: f64, cap: usize) -> Result<ExitCode> {
    check_window(window)?;
    if parallel == 0 {
        return Err(usage("--parallel must be at least 1".into()).into());
    }
    let entries = collect_corpus(dir)?;
    let outcome = run_batch(&entries, AnalysisOptions { half_width: window, max_dimension: cap }, parallel);
    for f in &outcome.failures {
        eprintln!("warning: skipped {}: {}", f.tree_id, f.error);
    }
    if outcome.rows.is_empty() {
        bail!("no tree in {} could be analysed", dir.display());
    }
    let bytes = batch_csv(&outcome)?;
    match output {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => write_stdout(&bytes)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_hist(dir: &Path) -> Result<ExitCode> {
    let entries = collect_corpus(dir)?;
    let report = corpus_histograms(&entries)?;
    for f in &report.failures {
        eprintln!("warning: skipped {}: {}", f.tree_id, f.error);
    }
    emit(&Envelope::new(dir.display().to_string(), &report), None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fuzz(cfg: FuzzConfig, dump_dir: Option<&Path>, with_cases: bool) -> Result<ExitCode> {
    if cfg.trees == 0 {
        return Err(usage("--trees must be at least 1".into()).into());
    }
    if !(cfg.half_width > 0.0) {
        return Err(usage(format!("--window must be positive, got {}", cfg.half_width)).into());
    }
    if cfg.parallel == 0 {
        return Err(usage("--parallel must be at least 1".into()).into());
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let summary = run_fuzz(&cfg)?;
    let mut result = serde_json::to_value(&summary)?;
    if with_cases {
        result["cases"] = serde_json::to_value(&summary.cases)?;
    }
    emit(&Envelope::new(format!("fuzz seed {}", cfg.seed), result), None)?;
    if summary.passed() {
        return Ok(ExitCode::SUCCESS);
    }
    if let Some(d) = dump_dir {
        fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
    }
    for case in summary.cases.iter().filter(|c| !c.violations.is_empty()) {
        for (k, text) in case.dumps.iter().enumerate() {
            eprint!("{text}");
            if let Some(d) = dump_dir {
                let p = d.join(format!("case-{}-{k}.txt", case.index));
                fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
            }
        }
    }
    Ok(ExitCode::from(EXIT_INVARIANT))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cap = cli.size_cap;
    match cli.command {
        Command::Simplify { input, output } => cmd_simplify(&input, output.as_deref()),
        Command::Spectrum { input, vectors, window, min_multiplicity } => {
            cmd_spectrum(&input, vectors, window, min_multiplicity, cap)
        }
        Command::Verify { input, window, dump } => cmd_verify(&input, window, dump.as_deref(), cap),
        Command::Batch { dir, output, parallel, window } => cmd_batch(&dir, output.as_deref(), parallel, window, cap),
        Command::Hist { dir } => cmd_hist(&dir),
        Command::Fuzz { trees, max_vertices, seed, spine_prob, window, parallel, dump_dir, cases } => {
            let cfg = FuzzConfig {
                trees,
                max_vertices,
                seed,
                spine_probabilities: spine_prob,
                half_width: window,
                parallel,
            };
            cmd_fuzz(cfg, dump_dir.as_deref(), cases)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            if let Some(clap_err) = e.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return ExitCode::from(clap_err.exit_code() as u8);
            }
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
