//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use plateau_core::graph::{Graph, RootedTree};
use plateau_core::ingest::{make, parse_swc, write_swc, TreeSpec};
use plateau_core::plateaux::{
    certify, check_conjecture_with, exact_plateau_multiplicity, faria_check_with, pendant_pj_counts, plateau_nullity,
    RESIDUAL_TOLERANCE,
};
use plateau_core::report::{run_fuzz, FuzzConfig, FuzzSummary};
use plateau_core::simplify::simplify;
use plateau_core::spectral::{
    eigen, interval_count, laplacian, multiplicity, path_spectrum, starlike_branch_eigenvalues, Spectrum,
    LAMBDA_MINUS, LAMBDA_PLUS,
};

const WINDOW: f64 = 1e-10;

type Outcome = Result<String, String>;

fn spectrum(g: &Graph) -> Spectrum {
    eigen(&laplacian(g), false).expect("eigendecomposition")
}

fn starlike(k: usize, m: usize) -> Graph {
    make(&TreeSpec::StarlikeUniform { k, m }).unwrap().into_graph()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

/// Window count at lambda-, checked against the exact nullity.
fn oracle_consistent(g: &Graph, s: &Spectrum) -> Result<(), String> {
    let nullity = plateau_nullity(g);
    ensure(nullity % 2 == 0, || format!("odd nullity {nullity}"))?;
    let window = multiplicity(s, LAMBDA_MINUS, WINDOW).unwrap();
    ensure(window == nullity / 2, || format!("window {window} vs exact {}", nullity / 2))
}

fn c1_simplification_fixtures() -> Outcome {
    let start = Instant::now();
    let p6 = make(&TreeSpec::Path { n: 6, root_position: 2 }).unwrap();
    let p4 = make(&TreeSpec::Path { n: 4, root_position: 2 }).unwrap();
    let out = simplify(&p6).tree;
    ensure(out.canonical_form() == p4.canonical_form(), || "P6 did not simplify to P4".into())?;
    ensure(out.graph() == p4.graph() && out.root() == p4.root(), || "P4 differs after relabelling".into())?;

    let p5 = make(&TreeSpec::Path { n: 5, root_position: 3 }).unwrap();
    let same = simplify(&p5).tree;
    ensure(same.graph() == p5.graph() && same.root() == p5.root(), || "P5 changed".into())?;
    within(start.elapsed(), Duration::from_secs(1))?;
    Ok(format!("P6->P4 and P5 fixed point in {:?}", start.elapsed()))
}

fn c2_path_spectrum() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 2..=200 {
        let g = make(&TreeSpec::Path { n, root_position: 1 }).unwrap().into_graph();
        let s = spectrum(&g);
        // Closed form written out here rather than taken from the library.
        for (k, got) in s.eigenvalues.iter().enumerate() {
            let want = 2.0 - 2.0 * (k as f64 * PI / n as f64).cos();
            worst = worst.max((got - want).abs());
        }
        let lib = path_spectrum(n).unwrap();
        for (a, b) in lib.iter().zip(&s.eigenvalues) {
            worst = worst.max((a - b).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("max deviation {worst:e}"))?;
    within(start.elapsed(), Duration::from_secs(30))?;
    Ok(format!("n = 2..200, max deviation {worst:.2e}, {:?}", start.elapsed()))
}

fn c3_proposition() -> Outcome {
    let start = Instant::now();
    for k in 2..=10 {
        let g = starlike(k, 2);
        let s = spectrum(&g);
        let mm = multiplicity(&s, LAMBDA_MINUS, WINDOW).unwrap();
        let mp = multiplicity(&s, LAMBDA_PLUS, WINDOW).unwrap();
        let ex = exact_plateau_multiplicity(&g);
        ensure(mm == k - 1 && mp == k - 1 && ex == k - 1, || {
            format!("S({k}.2): window {mm}/{mp}, exact {ex}, expected {}", k - 1)
        })?;
    }
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!("S(k.2), k = 2..10: m = k-1 by window and exact rank, {:?}", start.elapsed()))
}

fn c4_das_lemma() -> Outcome {
    let start = Instant::now();
    for k in 3..=5 {
        for m in 2..=4 {
            let s = spectrum(&starlike(k, m));
            for p in (2..=2 * m).step_by(2) {
                let value = 2.0 + 2.0 * (p as f64 * PI / (2 * m + 1) as f64).cos();
                let count = interval_count(&s, value - 1e-8, value + 1e-8).unwrap();
                ensure(count >= k - 1, || format!("S({k}.{m}), p = {p}: value {value} appears {count} times"))?;
            }
            let lib = starlike_branch_eigenvalues(k, m).unwrap();
            ensure(lib.len() == m && lib.iter().all(|&(_, mult)| mult == k - 1), || "closed form".into())?;
        }
    }
    within(start.elapsed(), Duration::from_secs(10))?;
    Ok(format!("k = 3..5, m = 2..4, {:?}", start.elapsed()))
}

fn fuzz_config() -> FuzzConfig {
    FuzzConfig {
        trees: 500,
        max_vertices: 300,
        seed: 7,
        spine_probabilities: vec![0.0, 0.3, 0.7],
        half_width: WINDOW,
        parallel: std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

fn c5_theorem_fuzz(summary: &FuzzSummary, elapsed: Duration) -> Outcome {
    let mut failures = Vec::new();
    for c in &summary.cases {
        let ok = c.m_minus == c.m_plus
            && c.m_minus == c.m_exact
            && c.m_exact >= c.tau_vi
            && c.max_residual <= RESIDUAL_TOLERANCE
            && c.independent_rank == c.tau_vi;
        if !ok {
            failures.push(c.index);
        }
    }
    ensure(summary.trees == 500, || format!("{} trees", summary.trees))?;
    ensure(failures.is_empty(), || format!("violations at trees {failures:?}"))?;
    within(elapsed, Duration::from_secs(300))?;
    let tau_max = summary.cases.iter().map(|c| c.tau_vi).max().unwrap_or(0);
    Ok(format!(
        "500 trees, 0 violations, max tau {tau_max}, max residual {:.1e}, slack {:?}, {elapsed:?}",
        summary.max_residual, summary.slack_distribution
    ))
}

fn c6_exact_oracle(summary: &FuzzSummary) -> Outcome {
    let mut checked = 0;
    for k in 2..=10 {
        let g = starlike(k, 2);
        oracle_consistent(&g, &spectrum(&g)).map_err(|e| format!("S({k}.2): {e}"))?;
        checked += 1;
    }
    for k in 3..=5 {
        for m in 2..=4 {
            let g = starlike(k, m);
            oracle_consistent(&g, &spectrum(&g)).map_err(|e| format!("S({k}.{m}): {e}"))?;
            checked += 1;
        }
    }
    for c in &summary.cases {
        ensure(c.nullity % 2 == 0 && c.nullity / 2 == c.m_minus, || {
            format!("fuzz tree {}: nullity {}, window {}", c.index, c.nullity, c.m_minus)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} graphs: nullity even and nullity/2 equals the window count"))
}

fn c7_faria(summary: &FuzzSummary) -> Outcome {
    for c in &summary.cases {
        ensure(c.faria.holds, || format!("fuzz tree {}: {:?}", c.index, c.faria))?;
    }
    for leaves in 3..=10 {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        let g = Graph::from_edges(leaves + 1, &edges).unwrap();
        let r = faria_check_with(&g, &spectrum(&g), WINDOW).unwrap();
        ensure(r.holds && r.p - r.q == r.m_one, || format!("K1,{leaves}: {r:?}"))?;
    }
    Ok(format!("{} fuzzed trees and K1,3..K1,10 (with equality)", summary.trees))
}

fn c8_conjecture_cases() -> Outcome {
    for k in 3..=5 {
        for m in 2..=4 {
            let g = starlike(k, m);
            let s = spectrum(&g);
            for j in 2..m {
                let counts = pendant_pj_counts(&g, j).unwrap();
                ensure(counts == (0, 0), || format!("S({k}.{m}), j = {j}: {counts:?}"))?;
            }
            let r = check_conjecture_with(&g, &s, m, WINDOW).unwrap();
            ensure((r.p_j, r.q_j) == (k, 1), || format!("S({k}.{m}), j = m: {:?}", (r.p_j, r.q_j)))?;
            ensure(r.holds && k - 1 <= r.max_multiplicity, || format!("S({k}.{m}): {r:?}"))?;
        }
    }
    Ok("S(k.m), k = 3..5, m = 2..4".into())
}

fn c9_simplification_properties(summary: &FuzzSummary) -> Outcome {
    let simplify_checks = [
        "invalid_tree",
        "not_idempotent",
        "nontrivial_count_changed",
        "degree_changed",
        "root_removed",
        "root_neighbour_removed",
        "spine_lost",
        "adjacent_trivial",
        "chain_not_contracted",
    ];
    let bad: Vec<_> = summary
        .violation_counts
        .iter()
        .filter(|(k, _)| simplify_checks.contains(&k.as_str()))
        .collect();
    ensure(bad.is_empty(), || format!("{bad:?}"))?;
    let before: usize = summary.cases.iter().map(|c| c.original_count).sum();
    let after: usize = summary.cases.iter().map(|c| c.simplified_count).sum();
    Ok(format!("{} trees, {before} -> {after} vertices, 0 violations", summary.trees))
}

fn c10_performance() -> Outcome {
    let tree = make(&TreeSpec::Random { n: 2000, seed: 2024, spine_probability: 0.3 }).unwrap();
    let text = write_swc(&tree);
    let start = Instant::now();
    let parsed: RootedTree = parse_swc(&text).map_err(|e| e.to_string())?;
    let s = simplify(&parsed);
    let g = s.tree.graph();
    let l = laplacian(g);
    let spec = eigen(&l, false).map_err(|e| e.to_string())?;
    let cert = certify(g, &l, &spec, WINDOW).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(cert.holds(), || format!("{:?}", cert.violations))?;
    within(elapsed, Duration::from_secs(60))?;
    Ok(format!(
        "n = 2000 -> {} vertices, m = {}, tau = {}, {elapsed:?}",
        s.tree.n(),
        cert.m_exact,
        cert.tau_vi
    ))
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "simplification fixtures", c1_simplification_fixtures()));
    results.push((2, "path spectrum", c2_path_spectrum()));
    results.push((3, "S(k.2) multiplicities", c3_proposition()));
    results.push((4, "starlike branch eigenvalues", c4_das_lemma()));

    let start = Instant::now();
    let fuzz = run_fuzz(&fuzz_config());
    let elapsed = start.elapsed();
    match fuzz {
        Ok(summary) => {
            results.push((5, "plateau theorem fuzz", c5_theorem_fuzz(&summary, elapsed)));
            results.push((6, "exact oracle consistency", c6_exact_oracle(&summary)));
            results.push((7, "pendant bound p - q <= m(1)", c7_faria(&summary)));
            results.push((8, "pendant path case analysis", c8_conjecture_cases()));
            results.push((9, "simplification properties", c9_simplification_properties(&summary)));
        }
        Err(e) => {
            for (id, name) in [(5, "plateau theorem fuzz"), (6, "exact oracle consistency"), (7, "pendant bound"), (9, "simplification properties")] {
                results.push((id, name, Err(format!("fuzz run failed: {e}"))));
            }
            results.push((8, "pendant path case analysis", c8_conjecture_cases()));
        }
    }
    results.push((10, "performance smoke", c10_performance()));

    let mut failed = 0;
    for (id, name, outcome) in &results {
        match outcome {
            Ok(msg) => println!("PASS criterion {id:>2} ({name}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {id:>2} ({name}): {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
