//! Corpus-level reports: per-tree batch rows with per-cluster aggregates,
//! degree histograms, and seeded fuzz campaigns over random trees.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::error::{ParseError, SpecError, SpectralError};
use crate::graph::{Graph, RootedTree};
use crate::ingest::{make, parse_edge_list, parse_swc, ParsedInput, TreeSpec};
use crate::plateaux::{
    certify, check_conjecture_with, counterexample_dump, faria_check_with, PlateauCertificate,
};
use crate::simplify::{audit, simplify, SimplificationStats};
use crate::spectral::{eigen_with, laplacian, EigenOptions, DEFAULT_HALF_WIDTH, DEFAULT_MAX_DIMENSION};

/// Version tag carried by every JSON and CSV output.
pub const SCHEMA: &str = "plateau-report/1";

/// Sidecar file mapping corpus files to cluster labels, one
/// `<relative path> <label>` pair per line.
pub const CLUSTER_MANIFEST: &str = "clusters.txt";

#[derive(Debug, Serialize)]
pub struct Envelope<T: Serialize> {
    pub schema: &'static str,
    pub input: String,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(input: impl Into<String>, result: T) -> Self {
        Envelope { schema: SCHEMA, input: input.into(), result }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: input has a cycle; a rooted tree is required")]
    NotATree { path: PathBuf },
    #[error("{0}")]
    Spectral(#[from] SpectralError),
    #[error("{0}")]
    Spec(#[from] SpecError),
    #[error("no input files found under {0}")]
    EmptyCorpus(PathBuf),
    #[error("{0}")]
    Usage(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Swc,
    Edgelist,
}

impl InputFormat {
    /// `.swc` files are SWC, everything else is an edge list.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("swc") => InputFormat::Swc,
            _ => InputFormat::Edgelist,
        }
    }
}

pub fn load_input(path: &Path, format: InputFormat) -> Result<ParsedInput, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io { path: path.into(), source })?;
    let parsed = match format {
        InputFormat::Swc => parse_swc(&text).map(ParsedInput::Tree),
        InputFormat::Edgelist => parse_edge_list(&text, None),
    };
    parsed.map_err(|source| ReportError::Parse { path: path.into(), source })
}

pub fn load_tree(path: &Path, format: InputFormat) -> Result<RootedTree, ReportError> {
    load_input(path, format)?.into_tree().ok_or_else(|| ReportError::NotATree { path: path.into() })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub tree_id: String,
    pub cluster_label: Option<String>,
    pub path: PathBuf,
}

fn is_tree_file(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref(),
        Some("swc" | "txt" | "edges" | "el")
    ) && path.file_name().and_then(|n| n.to_str()) != Some(CLUSTER_MANIFEST)
}

/// Tree files under `dir` (one level of subdirectories), sorted by id. The
/// cluster label is the subdirectory name unless the manifest says otherwise.
pub fn collect_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, ReportError> {
    let io = |source| ReportError::Io { path: dir.into(), source };
    let mut entries = Vec::new();
    for item in fs::read_dir(dir).map_err(io)? {
        let path = item.map_err(io)?.path();
        if path.is_dir() {
            let label = path.file_name().and_then(|n| n.to_str()).map(str::to_owned);
            for sub in fs::read_dir(&path).map_err(|source| ReportError::Io { path: path.clone(), source })? {
                let p = sub.map_err(|source| ReportError::Io { path: path.clone(), source })?.path();
                if p.is_file() && is_tree_file(&p) {
                    entries.push(entry_for(dir, p, label.clone()));
                }
            }
        } else if is_tree_file(&path) {
            entries.push(entry_for(dir, path, None));
        }
    }
    let manifest = dir.join(CLUSTER_MANIFEST);
    if manifest.is_file() {
        let text = fs::read_to_string(&manifest).map_err(|source| ReportError::Io { path: manifest, source })?;
        let labels: BTreeMap<&str, &str> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .filter_map(|l| l.split_once(char::is_whitespace))
            .map(|(k, v)| (k.trim(), v.trim()))
            .collect();
        for e in &mut entries {
            if let Some(l) = labels.get(e.tree_id.as_str()) {
                e.cluster_label = Some((*l).to_owned());
            }
        }
    }
    entries.sort_by(|a, b| a.tree_id.cmp(&b.tree_id));
    if entries.is_empty() {
        return Err(ReportError::EmptyCorpus(dir.into()));
    }
    Ok(entries)
}

fn entry_for(root: &Path, path: PathBuf, cluster_label: Option<String>) -> CorpusEntry {
    let tree_id = path.strip_prefix(root).unwrap_or(&path).to_string_lossy().replace('\\', "/");
    CorpusEntry { tree_id, cluster_label, path }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchRow {
    pub tree_id: String,
    pub cluster_label: Option<String>,
    pub original_count: usize,
    pub simplified_count: usize,
    pub reduction_percent: f64,
    pub m_minus: usize,
    pub m_plus: usize,
    pub m_exact: usize,
    pub tau_vi: usize,
    pub theorem_holds: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct AnalysisOptions {
    pub half_width: f64,
    pub max_dimension: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { half_width: DEFAULT_HALF_WIDTH, max_dimension: DEFAULT_MAX_DIMENSION }
    }
}

/// Simplified tree, its statistics and the plateau certificate.
#[derive(Clone, Debug)]
pub struct TreeAnalysis {
    pub simplified: RootedTree,
    pub stats: SimplificationStats,
    pub certificate: PlateauCertificate,
}

/// Full pipeline for one tree: simplify, decompose, certify.
pub fn analyze_tree(tree: &RootedTree, opts: AnalysisOptions) -> Result<TreeAnalysis, SpectralError> {
    let s = simplify(tree);
    let g = s.tree.graph();
    let l = laplacian(g);
    let spectrum = eigen_with(&l, EigenOptions { want_vectors: false, max_dimension: opts.max_dimension })?;
    let certificate = certify(g, &l, &spectrum, opts.half_width)?;
    Ok(TreeAnalysis { simplified: s.tree, stats: s.stats, certificate })
}

pub fn batch_row(entry: &CorpusEntry, a: &TreeAnalysis) -> BatchRow {
    BatchRow {
        tree_id: entry.tree_id.clone(),
        cluster_label: entry.cluster_label.clone(),
        original_count: a.stats.original_vertex_count,
        simplified_count: a.stats.simplified_vertex_count,
        reduction_percent: a.stats.reduction_percent,
        m_minus: a.certificate.m_minus,
        m_plus: a.certificate.m_plus,
        m_exact: a.certificate.m_exact,
        tau_vi: a.certificate.tau_vi,
        theorem_holds: a.certificate.holds(),
    }
}

#[derive(Debug, Serialize)]
pub struct BatchFailure {
    pub tree_id: String,
    pub error: String,
}

#[derive(Debug, Serialize)]
pub struct BatchOutcome {
    pub rows: Vec<BatchRow>,
    pub failures: Vec<BatchFailure>,
    pub aggregates: Vec<ClusterAggregate>,
}

fn pool(parallel: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(parallel.max(1)).build().expect("thread pool")
}

/// Analyses every corpus entry with up to `parallel` workers. Failing files
/// are collected rather than aborting the batch; rows stay in id order.
pub fn run_batch(entries: &[CorpusEntry], opts: AnalysisOptions, parallel: usize) -> BatchOutcome {
    let results: Vec<Result<BatchRow, BatchFailure>> = pool(parallel).install(|| {
        entries
            .par_iter()
            .map(|e| {
                let fail = |err: String| BatchFailure { tree_id: e.tree_id.clone(), error: err };
                let tree = load_tree(&e.path, InputFormat::from_path(&e.path)).map_err(|x| fail(x.to_string()))?;
                let a = analyze_tree(&tree, opts).map_err(|x| fail(x.to_string()))?;
                Ok(batch_row(e, &a))
            })
            .collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(f) => failures.push(f),
        }
    }
    let aggregates = aggregate(&rows);
    BatchOutcome { rows, failures, aggregates }
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClusterAggregate {
    /// Cluster label, `"no"` for unlabelled trees and `"all"` for the total.
    pub cluster: String,
    pub tree_count: usize,
    pub original_mean: f64,
    pub original_std: f64,
    pub simplified_mean: f64,
    pub simplified_std: f64,
    /// Mean of per-tree reduction percentages.
    pub reduction_mean: f64,
    pub reduction_std: f64,
    /// Mean of `m(lambda-) + m(lambda+)`.
    pub combined_multiplicity_mean: f64,
    pub combined_multiplicity_std: f64,
    pub m_minus_mean: f64,
}

fn summarize(cluster: String, rows: &[&BatchRow]) -> ClusterAggregate {
    let col = |f: fn(&BatchRow) -> f64| rows.iter().map(|r| f(r)).collect::<Vec<f64>>();
    let (original_mean, original_std) = mean_std(&col(|r| r.original_count as f64));
    let (simplified_mean, simplified_std) = mean_std(&col(|r| r.simplified_count as f64));
    let (reduction_mean, reduction_std) = mean_std(&col(|r| r.reduction_percent));
    let (combined_multiplicity_mean, combined_multiplicity_std) = mean_std(&col(|r| (r.m_minus + r.m_plus) as f64));
    let (m_minus_mean, _) = mean_std(&col(|r| r.m_minus as f64));
    ClusterAggregate {
        cluster,
        tree_count: rows.len(),
        original_mean,
        original_std,
        simplified_mean,
        simplified_std,
        reduction_mean,
        reduction_std,
        combined_multiplicity_mean,
        combined_multiplicity_std,
        m_minus_mean,
    }
}

/// One aggregate per cluster label (sorted), then the corpus-wide `"all"` row.
pub fn aggregate(rows: &[BatchRow]) -> Vec<ClusterAggregate> {
    if rows.is_empty() {
        return Vec::new();
    }
    let mut groups: BTreeMap<String, Vec<&BatchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.cluster_label.clone().unwrap_or_else(|| "no".into())).or_default().push(r);
    }
    let mut out: Vec<ClusterAggregate> = groups.into_iter().map(|(k, v)| summarize(k, &v)).collect();
    out.push(summarize("all".into(), &rows.iter().collect::<Vec<_>>()));
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DegreeHistogram {
    pub counts: BTreeMap<usize, usize>,
    pub total_vertices: usize,
    pub trees: usize,
}

impl DegreeHistogram {
    pub fn add(&mut self, g: &Graph) {
        for v in g.vertices() {
            *self.counts.entry(g.degree(v)).or_default() += 1;
        }
        self.total_vertices += g.n();
        self.trees += 1;
    }

    pub fn count(&self, degree: usize) -> usize {
        self.counts.get(&degree).copied().unwrap_or(0)
    }
}

#[derive(Debug, Serialize)]
pub struct HistogramReport {
    pub original: DegreeHistogram,
    pub simplified: DegreeHistogram,
    pub failures: Vec<BatchFailure>,
}

pub fn degree_histograms<'a>(trees: impl IntoIterator<Item = &'a RootedTree>) -> (DegreeHistogram, DegreeHistogram) {
    let mut original = DegreeHistogram::default();
    let mut simplified = DegreeHistogram::default();
    for t in trees {
        original.add(t.graph());
        simplified.add(simplify(t).tree.graph());
    }
    (original, simplified)
}

pub fn corpus_histograms(entries: &[CorpusEntry]) -> Result<HistogramReport, ReportError> {
    let mut trees = Vec::new();
    let mut failures = Vec::new();
    for e in entries {
        match load_tree(&e.path, InputFormat::from_path(&e.path)) {
            Ok(t) => trees.push(t),
            Err(err) => failures.push(BatchFailure { tree_id: e.tree_id.clone(), error: err.to_string() }),
        }
    }
    if trees.is_empty() {
        return Err(ReportError::Usage("no readable trees in corpus".into()));
    }
    let (original, simplified) = degree_histograms(&trees);
    Ok(HistogramReport { original, simplified, failures })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzConfig {
    pub trees: usize,
    pub max_vertices: usize,
    pub seed: u64,
    /// Spine probabilities cycled across generated trees.
    pub spine_probabilities: Vec<f64>,
    pub half_width: f64,
    pub parallel: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig {
            trees: 500,
            max_vertices: 300,
            seed: 7,
            spine_probabilities: vec![0.0, 0.3, 0.7],
            half_width: DEFAULT_HALF_WIDTH,
            parallel: 1,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), ReportError> {
        if self.trees == 0 {
            return Err(ReportError::Usage("--trees must be at least 1".into()));
        }
        if self.max_vertices < 2 {
            return Err(ReportError::Usage("--max-vertices must be at least 2".into()));
        }
        if self.spine_probabilities.is_empty() || self.spine_probabilities.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(ReportError::Usage("spine probabilities must lie in [0, 1]".into()));
        }
        if !(self.half_width > 0.0) {
            return Err(ReportError::Usage("window half-width must be positive".into()));
        }
        Ok(())
    }

    /// The `index`-th generated tree spec; depends only on the seed and index.
    pub fn spec(&self, index: usize) -> TreeSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        let n = rng.gen_range(2..=self.max_vertices);
        TreeSpec::Random {
            n,
            seed: rng.gen(),
            spine_probability: self.spine_probabilities[index % self.spine_probabilities.len()],
        }
    }
}

/// Everything checked for one generated tree.
#[derive(Clone, Debug, Serialize)]
pub struct FuzzCase {
    pub index: usize,
    pub spec: TreeSpec,
    pub original_count: usize,
    pub simplified_count: usize,
    pub tau_vi: usize,
    pub m_minus: usize,
    pub m_plus: usize,
    pub m_exact: usize,
    pub nullity: usize,
    pub independent_rank: usize,
    pub max_residual: f64,
    pub faria: crate::plateaux::FariaReport,
    pub conjecture: crate::plateaux::ConjectureReport,
    /// Names of every failed check.
    pub violations: Vec<String>,
    #[serde(skip)]
    pub dumps: Vec<String>,
}

impl FuzzCase {
    pub fn slack(&self) -> isize {
        self.m_exact as isize - self.tau_vi as isize
    }
}

pub fn run_fuzz_case(cfg: &FuzzConfig, index: usize) -> Result<FuzzCase, ReportError> {
    let spec = cfg.spec(index);
    let tree = make(&spec)?;
    let s = simplify(&tree);
    let g = s.tree.graph();
    let root = Some(s.tree.root());
    let l = laplacian(g);
    let spectrum = eigen_with(&l, EigenOptions::default())?;
    let cert = certify(g, &l, &spectrum, cfg.half_width)?;
    let faria = faria_check_with(g, &spectrum, cfg.half_width)?;
    let conjecture = check_conjecture_with(g, &spectrum, 2, cfg.half_width).map_err(|e| match e {
        crate::error::PlateauError::Spectral(x) => ReportError::Spectral(x),
        other => ReportError::Usage(other.to_string()),
    })?;

    let mut violations = Vec::new();
    let mut dumps = Vec::new();
    let detail = format!("fuzz seed {} index {index} spec {spec:?}", cfg.seed);
    for v in &cert.violations {
        violations.push(v.name().to_owned());
        dumps.push(counterexample_dump(g, root, v.name(), &format!("{detail}\n{v:?}")));
    }
    if !faria.holds {
        violations.push("faria_bound".into());
        dumps.push(counterexample_dump(g, root, "faria_bound", &format!("{detail}\n{faria:?}")));
    }
    if !conjecture.holds {
        violations.push("conjecture_j2".into());
        dumps.push(counterexample_dump(g, root, "conjecture_j2", &format!("{detail}\n{conjecture:?}")));
    }
    for v in audit(&tree, &s) {
        violations.push(v.name().to_owned());
        dumps.push(counterexample_dump(
            tree.graph(),
            Some(tree.root()),
            v.name(),
            &format!("{detail}\n{v:?}"),
        ));
    }

    Ok(FuzzCase {
        index,
        original_count: tree.n(),
        simplified_count: s.tree.n(),
        tau_vi: cert.tau_vi,
        m_minus: cert.m_minus,
        m_plus: cert.m_plus,
        m_exact: cert.m_exact,
        nullity: cert.nullity,
        independent_rank: cert.independent_rank(),
        max_residual: cert.max_residual,
        faria,
        conjecture,
        violations,
        dumps,
        spec,
    })
}

#[derive(Debug, Serialize)]
pub struct FuzzSummary {
    pub config: FuzzConfig,
    pub trees: usize,
    pub violating_trees: usize,
    pub violation_counts: BTreeMap<String, usize>,
    /// Number of trees with each value of `m_exact - tau_vi`.
    pub slack_distribution: BTreeMap<isize, usize>,
    pub max_residual: f64,
    pub max_simplified_vertices: usize,
    #[serde(skip)]
    pub cases: Vec<FuzzCase>,
}

impl FuzzSummary {
    pub fn passed(&self) -> bool {
        self.violating_trees == 0
    }
}

pub fn run_fuzz(cfg: &FuzzConfig) -> Result<FuzzSummary, ReportError> {
    cfg.validate()?;
    let cases: Result<Vec<FuzzCase>, ReportError> =
        pool(cfg.parallel).install(|| (0..cfg.trees).into_par_iter().map(|i| run_fuzz_case(cfg, i)).collect());
    let cases = cases?;
    let mut violation_counts = BTreeMap::new();
    let mut slack_distribution = BTreeMap::new();
    for c in &cases {
        for v in &c.violations {
            *violation_counts.entry(v.clone()).or_default() += 1;
        }
        *slack_distribution.entry(c.slack()).or_default() += 1;
    }
    Ok(FuzzSummary {
        config: cfg.clone(),
        trees: cases.len(),
        violating_trees: cases.iter().filter(|c| !c.violations.is_empty()).count(),
        violation_counts,
        slack_distribution,
        max_residual: cases.iter().map(|c| c.max_residual).fold(0.0, f64::max),
        max_simplified_vertices: cases.iter().map(|c| c.simplified_count).max().unwrap_or(0),
        cases,
    })
}
