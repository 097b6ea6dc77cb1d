//! Eigenvalue plateaux at `(3 -/+ sqrt 5) / 2`.
//!
//! Every branch vertex carrying `c >= 2` pendant paths of two vertices
//! (`branch - mid - leaf`) contributes `c - 1` explicit eigenvectors for each
//! root of `x^2 - 3x + 1`. Summed over branch vertices this gives the lower
//! bound `tau` on both multiplicities. The two multiplicities are always equal
//! because the roots are algebraic conjugates and the characteristic
//! polynomial has integer coefficients; here that equality is checked
//! numerically and with an exact integer rank of `L^2 - 3L + I`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{PlateauError, SpectralError};
use crate::exact::rank_sparse;
use crate::graph::{Graph, VertexId};
use crate::ingest::write_edge_list;
use crate::spectral::{
    eigen_with, eigenvalue_clusters, laplacian, multiplicity, EigenOptions, LaplacianMatrix, Spectrum,
    DEFAULT_HALF_WIDTH, LAMBDA_MINUS, LAMBDA_PLUS,
};

/// Largest acceptable `|L x - lambda x|_inf` for a constructed eigenvector.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

/// Pendant vertices, their degree-2 neighbours, and the branch vertices those
/// neighbours hang from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PendantStructure {
    /// Degree-1 vertices.
    pub v1: Vec<VertexId>,
    /// Degree-2 vertices adjacent to a leaf.
    pub v21: Vec<VertexId>,
    /// Degree >= 3 vertices adjacent to some member of `v21`, ascending.
    pub vi: Vec<VertexId>,
    /// `c(v)` for each member of `vi`, same order.
    pub c: Vec<usize>,
    pub tau_vi: usize,
    pub kappa: usize,
    pub v21_i: Vec<VertexId>,
    pub v1_i: Vec<VertexId>,
    pub vr: Vec<VertexId>,
}

impl PendantStructure {
    pub fn c_of(&self, v: VertexId) -> Option<usize> {
        self.vi.binary_search(&v).ok().map(|i| self.c[i])
    }
}

pub fn pendant_structure(g: &Graph) -> PendantStructure {
    let deg = g.degrees();
    let v1: Vec<VertexId> = g.vertices().filter(|v| deg[v.index()] == 1).collect();
    let is_v21 = |v: VertexId| deg[v.index()] == 2 && g.neighbors(v).iter().any(|u| deg[u.index()] == 1);
    let v21: Vec<VertexId> = g.vertices().filter(|&v| is_v21(v)).collect();

    let mut in_v21 = vec![false; g.n()];
    for v in &v21 {
        in_v21[v.index()] = true;
    }
    let mut vi = Vec::new();
    let mut c = Vec::new();
    for v in g.vertices().filter(|v| deg[v.index()] >= 3) {
        let count = g.neighbors(v).iter().filter(|u| in_v21[u.index()]).count();
        if count > 0 {
            vi.push(v);
            c.push(count);
        }
    }

    let mut in_vi = vec![false; g.n()];
    for v in &vi {
        in_vi[v.index()] = true;
    }
    let v21_i: Vec<VertexId> =
        v21.iter().copied().filter(|&v| g.neighbors(v).iter().any(|u| in_vi[u.index()])).collect();
    let mut in_v21_i = vec![false; g.n()];
    for v in &v21_i {
        in_v21_i[v.index()] = true;
    }
    let v1_i: Vec<VertexId> =
        v1.iter().copied().filter(|&v| g.neighbors(v).iter().any(|u| in_v21_i[u.index()])).collect();
    let mut covered = in_vi.clone();
    for v in v21_i.iter().chain(&v1_i) {
        covered[v.index()] = true;
    }
    let vr = g.vertices().filter(|v| !covered[v.index()]).collect();

    PendantStructure {
        tau_vi: c.iter().map(|&x| x - 1).sum(),
        kappa: vi.len(),
        v1,
        v21,
        vi,
        c,
        v21_i,
        v1_i,
        vr,
    }
}

/// A pendant path `branch - mid - leaf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainTriple {
    pub branch: VertexId,
    pub mid: VertexId,
    pub leaf: VertexId,
}

/// For each member of `VI` (ascending), its pendant paths sorted by mid vertex.
pub fn chain_triples(ps: &PendantStructure, g: &Graph) -> BTreeMap<VertexId, Vec<ChainTriple>> {
    let mut out: BTreeMap<VertexId, Vec<ChainTriple>> = BTreeMap::new();
    for &mid in &ps.v21_i {
        let nbrs = g.neighbors(mid);
        assert_eq!(nbrs.len(), 2, "pendant neighbour {mid} must have degree 2");
        let (leaf, branch) = if g.degree(nbrs[0]) == 1 { (nbrs[0], nbrs[1]) } else { (nbrs[1], nbrs[0]) };
        assert_eq!(g.degree(leaf), 1, "{mid} has no leaf neighbour");
        assert!(g.degree(branch) >= 3, "{mid} joins a leaf to a vertex of degree < 3");
        out.entry(branch).or_default().push(ChainTriple { branch, mid, leaf });
    }
    for triples in out.values_mut() {
        triples.sort_by_key(|t| t.mid);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstructedEigenvector {
    pub lambda: f64,
    pub branch: VertexId,
    /// Pendant path carrying `x_lambda` (the smallest mid index at `branch`).
    pub first: ChainTriple,
    /// Pendant path carrying `-x_lambda`.
    pub partner: ChainTriple,
    #[serde(skip)]
    pub values: Vec<f64>,
}

impl ConstructedEigenvector {
    /// Nonzero entries as `(vertex, value)`.
    pub fn support(&self) -> Vec<(VertexId, f64)> {
        self.values.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (VertexId(i), x)).collect()
    }
}

fn check_plateau_value(lambda: f64) -> Result<(), SpectralError> {
    if (lambda * lambda - 3.0 * lambda + 1.0).abs() > 1e-12 {
        return Err(SpectralError::NotPlateauValue(lambda));
    }
    Ok(())
}

/// The `tau` eigenvectors for `lambda`, a root of `x^2 - 3x + 1`. For a
/// branch vertex with pendant paths `t_0 < t_1 < ...` (by mid index), vector
/// `l` is `x_lambda = (-1/(2 - lambda), -1)` on `(mid, leaf)` of `t_0` and
/// `-x_lambda` on `t_l`, zero elsewhere.
pub fn construct_eigenvectors(g: &Graph, lambda: f64) -> Result<Vec<ConstructedEigenvector>, SpectralError> {
    check_plateau_value(lambda)?;
    let ps = pendant_structure(g);
    Ok(build_vectors(g.n(), &chain_triples(&ps, g), lambda))
}

fn build_vectors(
    n: usize,
    triples: &BTreeMap<VertexId, Vec<ChainTriple>>,
    lambda: f64,
) -> Vec<ConstructedEigenvector> {
    let mid_value = -1.0 / (2.0 - lambda);
    let mut out = Vec::new();
    for (&branch, chains) in triples {
        let first = chains[0];
        for &partner in &chains[1..] {
            let mut values = vec![0.0; n];
            values[first.mid.index()] = mid_value;
            values[first.leaf.index()] = -1.0;
            values[partner.mid.index()] = -mid_value;
            values[partner.leaf.index()] = 1.0;
            out.push(ConstructedEigenvector { lambda, branch, first, partner, values });
        }
    }
    out
}

/// Sparse rows of `L^2 - 3L + I`.
pub fn plateau_polynomial_rows(g: &Graph) -> Vec<Vec<(usize, i64)>> {
    let l_row = |v: VertexId| -> Vec<(usize, i64)> {
        let mut r: Vec<(usize, i64)> = g.neighbors(v).iter().map(|u| (u.index(), -1)).collect();
        r.push((v.index(), g.degree(v) as i64));
        r
    };
    g.vertices()
        .map(|v| {
            let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
            for (k, lik) in l_row(v) {
                for (j, lkj) in l_row(VertexId(k)) {
                    *acc.entry(j).or_default() += lik * lkj;
                }
                *acc.entry(k).or_default() -= 3 * lik;
            }
            *acc.entry(v.index()).or_default() += 1;
            acc.into_iter().filter(|&(_, x)| x != 0).collect()
        })
        .collect()
}

/// Nullity of `L^2 - 3L + I` over the rationals, i.e. `m(lambda-) + m(lambda+)`.
pub fn plateau_nullity(g: &Graph) -> usize {
    g.n() - rank_sparse(plateau_polynomial_rows(g), g.n())
}

/// Exact common multiplicity of `lambda-` and `lambda+`.
///
/// # Panics
/// If the nullity of `L^2 - 3L + I` is odd, which no integer Laplacian allows.
pub fn exact_plateau_multiplicity(g: &Graph) -> usize {
    let nullity = plateau_nullity(g);
    assert!(nullity % 2 == 0, "odd nullity {nullity} of L^2 - 3L + I");
    nullity / 2
}

/// A failed certificate check.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "invariant", rename_all = "snake_case")]
pub enum Violation {
    /// Window counts at the two roots differ.
    WindowAsymmetry { m_minus: usize, m_plus: usize },
    /// A window count differs from the exact multiplicity.
    WindowDisagreesWithExact { lambda: f64, window: usize, exact: usize, half_width: f64 },
    OddNullity { nullity: usize },
    BelowLowerBound { exact: usize, tau_vi: usize },
    ResidualTooLarge { lambda: f64, residual: f64 },
    RankDeficient { lambda: f64, rank: usize, tau_vi: usize },
    BranchRowNonzero { branch: VertexId, value: f64 },
}

impl Violation {
    pub fn name(&self) -> &'static str {
        match self {
            Violation::WindowAsymmetry { .. } => "window_asymmetry",
            Violation::WindowDisagreesWithExact { .. } => "window_disagrees_with_exact",
            Violation::OddNullity { .. } => "odd_nullity",
            Violation::BelowLowerBound { .. } => "below_lower_bound",
            Violation::ResidualTooLarge { .. } => "residual_too_large",
            Violation::RankDeficient { .. } => "rank_deficient",
            Violation::BranchRowNonzero { .. } => "branch_row_nonzero",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PlateauCertificate {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub half_width: f64,
    pub m_minus: usize,
    pub m_plus: usize,
    pub nullity: usize,
    pub m_exact: usize,
    pub tau_vi: usize,
    pub kappa: usize,
    /// `m_exact - tau_vi`, the multiplicity not explained by pendant paths.
    pub slack: isize,
    pub max_residual: f64,
    pub max_branch_row: f64,
    pub independent_rank_minus: usize,
    pub independent_rank_plus: usize,
    pub eigenvectors: Vec<ConstructedEigenvector>,
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl PlateauCertificate {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn independent_rank(&self) -> usize {
        self.independent_rank_minus.min(self.independent_rank_plus)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub half_width: f64,
    pub max_dimension: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { half_width: DEFAULT_HALF_WIDTH, max_dimension: EigenOptions::default().max_dimension }
    }
}

/// Numerical rank of a set of vectors (singular values above `1e-9 * s_max`).
pub fn numerical_rank(vectors: &[Vec<f64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let n = vectors[0].len();
    let m = DMatrix::from_fn(n, vectors.len(), |i, j| vectors[j][i]);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > 1e-9 * top).count()
}

pub fn verify_theorem(g: &Graph) -> Result<PlateauCertificate, SpectralError> {
    verify_theorem_with(g, VerifyOptions::default())
}

pub fn verify_theorem_with(g: &Graph, opts: VerifyOptions) -> Result<PlateauCertificate, SpectralError> {
    let l = laplacian(g);
    let spectrum = eigen_with(&l, EigenOptions { want_vectors: false, max_dimension: opts.max_dimension })?;
    certify(g, &l, &spectrum, opts.half_width)
}

/// Certificate from an already computed spectrum of `l = laplacian(g)`.
pub fn certify(
    g: &Graph,
    l: &LaplacianMatrix,
    spectrum: &Spectrum,
    half_width: f64,
) -> Result<PlateauCertificate, SpectralError> {
    let m_minus = multiplicity(spectrum, LAMBDA_MINUS, half_width)?;
    let m_plus = multiplicity(spectrum, LAMBDA_PLUS, half_width)?;
    let ps = pendant_structure(g);
    let triples = chain_triples(&ps, g);
    let nullity = plateau_nullity(g);
    let m_exact = nullity / 2;

    let mut violations = Vec::new();
    let mut warnings = Vec::new();
    if m_minus != m_plus {
        violations.push(Violation::WindowAsymmetry { m_minus, m_plus });
    }
    if nullity % 2 != 0 {
        violations.push(Violation::OddNullity { nullity });
    }
    for (lambda, window) in [(LAMBDA_MINUS, m_minus), (LAMBDA_PLUS, m_plus)] {
        if window != m_exact {
            warnings.push(format!(
                "window [{:.12}, {:.12}] counts {window} eigenvalues but the exact multiplicity is {m_exact}",
                lambda - half_width,
                lambda + half_width
            ));
            violations.push(Violation::WindowDisagreesWithExact { lambda, window, exact: m_exact, half_width });
        }
    }
    if m_exact < ps.tau_vi {
        violations.push(Violation::BelowLowerBound { exact: m_exact, tau_vi: ps.tau_vi });
    }

    let mut eigenvectors = Vec::new();
    let mut max_residual = 0.0f64;
    let mut max_branch_row = 0.0f64;
    let mut ranks = [0usize; 2];
    for (slot, lambda) in [LAMBDA_MINUS, LAMBDA_PLUS].into_iter().enumerate() {
        let vecs = build_vectors(g.n(), &triples, lambda);
        let mut worst = 0.0f64;
        for v in &vecs {
            worst = worst.max(crate::spectral::residual(l, &v.values, lambda));
            let row = l.apply_row(v.branch.index(), &v.values).abs();
            max_branch_row = max_branch_row.max(row);
            if row > RESIDUAL_TOLERANCE {
                violations.push(Violation::BranchRowNonzero { branch: v.branch, value: row });
            }
        }
        if worst > RESIDUAL_TOLERANCE {
            violations.push(Violation::ResidualTooLarge { lambda, residual: worst });
        }
        max_residual = max_residual.max(worst);
        let values: Vec<Vec<f64>> = vecs.iter().map(|v| v.values.clone()).collect();
        ranks[slot] = numerical_rank(&values);
        if ranks[slot] != ps.tau_vi {
            violations.push(Violation::RankDeficient { lambda, rank: ranks[slot], tau_vi: ps.tau_vi });
        }
        eigenvectors.extend(vecs);
    }

    Ok(PlateauCertificate {
        lambda_minus: LAMBDA_MINUS,
        lambda_plus: LAMBDA_PLUS,
        half_width,
        m_minus,
        m_plus,
        nullity,
        m_exact,
        tau_vi: ps.tau_vi,
        kappa: ps.kappa,
        slack: m_exact as isize - ps.tau_vi as isize,
        max_residual,
        max_branch_row,
        independent_rank_minus: ranks[0],
        independent_rank_plus: ranks[1],
        eigenvectors,
        violations,
        warnings,
    })
}

/// Edge-list text naming the failed invariant, replayable with
/// `parse_edge_list` (the header lines are comments).
pub fn counterexample_dump(g: &Graph, root: Option<VertexId>, invariant: &str, detail: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# invariant: {invariant}");
    for line in detail.lines() {
        let _ = writeln!(out, "# {line}");
    }
    out.push_str(&write_edge_list(g, root));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FariaReport {
    /// Pendant vertices.
    pub p: usize,
    /// Vertices adjacent to at least one pendant vertex.
    pub q: usize,
    pub m_one: usize,
    pub holds: bool,
}

pub fn faria_counts(g: &Graph) -> (usize, usize) {
    let p = g.vertices().filter(|&v| g.degree(v) == 1).count();
    let q = g.vertices().filter(|&v| g.neighbors(v).iter().any(|&u| g.degree(u) == 1)).count();
    (p, q)
}

pub fn faria_check(g: &Graph) -> Result<FariaReport, SpectralError> {
    let s = eigen_with(&laplacian(g), EigenOptions::default())?;
    faria_check_with(g, &s, DEFAULT_HALF_WIDTH)
}

pub fn faria_check_with(g: &Graph, s: &Spectrum, half_width: f64) -> Result<FariaReport, SpectralError> {
    let (p, q) = faria_counts(g);
    let m_one = multiplicity(s, 1.0, half_width)?;
    Ok(FariaReport { p, q, m_one, holds: p as isize - q as isize <= m_one as isize })
}

/// `(p_j, q_j)`: trivial vertices next to a degree > 2 vertex `u` that start
/// a length-`j` trivial path from `u` to a pendant vertex, and the number of
/// distinct such `u`. Degree-2 vertices count as trivial.
pub fn pendant_pj_counts(g: &Graph, j: usize) -> Result<(usize, usize), PlateauError> {
    if j < 2 {
        return Err(PlateauError::PathLengthTooSmall(j));
    }
    let mut p = 0;
    let mut q = 0;
    for u in g.vertices().filter(|&u| g.degree(u) > 2) {
        let mut hits = 0;
        for &v in g.neighbors(u) {
            if g.degree(v) != 2 {
                continue;
            }
            let (mut prev, mut cur, mut len) = (u, v, 1);
            while g.degree(cur) == 2 && len <= j {
                let next = if g.neighbors(cur)[0] == prev { g.neighbors(cur)[1] } else { g.neighbors(cur)[0] };
                prev = cur;
                cur = next;
                len += 1;
            }
            if len == j && g.degree(cur) == 1 {
                hits += 1;
            }
        }
        p += hits;
        if hits > 0 {
            q += 1;
        }
    }
    Ok((p, q))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjectureReport {
    pub j: usize,
    pub p_j: usize,
    pub q_j: usize,
    pub max_multiplicity: usize,
    /// An eigenvalue whose multiplicity meets the bound, when one exists.
    pub witness: Option<f64>,
    pub holds: bool,
}

pub fn check_conjecture(g: &Graph, j: usize) -> Result<ConjectureReport, PlateauError> {
    let s = eigen_with(&laplacian(g), EigenOptions::default())?;
    check_conjecture_with(g, &s, j, DEFAULT_HALF_WIDTH)
}

pub fn check_conjecture_with(
    g: &Graph,
    s: &Spectrum,
    j: usize,
    half_width: f64,
) -> Result<ConjectureReport, PlateauError> {
    let (p_j, q_j) = pendant_pj_counts(g, j)?;
    let best = eigenvalue_clusters(s, half_width).into_iter().max_by_key(|c| c.multiplicity);
    let max_multiplicity = best.as_ref().map_or(0, |c| c.multiplicity);
    let holds = p_j as isize - q_j as isize <= max_multiplicity as isize;
    Ok(ConjectureReport {
        j,
        p_j,
        q_j,
        max_multiplicity,
        witness: if holds { best.map(|c| c.value) } else { None },
        holds,
    })
}
