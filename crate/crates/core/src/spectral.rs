//! Graph Laplacians and their spectra.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::SpectralError;
use crate::graph::Graph;

/// Smaller root of `x^2 - 3x + 1`, equal to `2 - 2cos(pi/5)`.
pub const LAMBDA_MINUS: f64 = 0.381_966_011_250_105_1;
/// Larger root of `x^2 - 3x + 1`, equal to `2 - 2cos(3pi/5)`.
pub const LAMBDA_PLUS: f64 = 2.618_033_988_749_895;

/// Default half-width of the window used to count a numerical eigenvalue.
pub const DEFAULT_HALF_WIDTH: f64 = 1e-10;

/// Largest matrix dimension `eigen` accepts unless told otherwise.
pub const DEFAULT_MAX_DIMENSION: usize = 10_000;

/// `L = D - A` as a dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaplacianMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// `L x`, in floating point.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()).collect()
    }

    /// Row `i` of `L` applied to `x`.
    pub fn apply_row(&self, i: usize, x: &[f64]) -> f64 {
        self.row(i).iter().zip(x).map(|(&a, &b)| a as f64 * b).sum()
    }
}

pub fn laplacian(g: &Graph) -> LaplacianMatrix {
    let n = g.n();
    let mut entries = vec![0i64; n * n];
    for v in g.vertices() {
        let i = v.index();
        entries[i * n + i] = g.degree(v) as i64;
        for u in g.neighbors(v) {
            entries[i * n + u.index()] = -1;
        }
    }
    LaplacianMatrix { n, entries }
}

/// Sorted eigenvalues of a Laplacian, with eigenvectors as matching columns
/// when requested.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<DMatrix<f64>>,
    /// Backward-error scale of the solver: `n * eps * max(1, lambda_max)`.
    pub solve_tolerance: f64,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn eigenvector(&self, k: usize) -> Option<Vec<f64>> {
        self.eigenvectors.as_ref().map(|m| m.column(k).iter().copied().collect())
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    pub want_vectors: bool,
    pub max_dimension: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { want_vectors: false, max_dimension: DEFAULT_MAX_DIMENSION }
    }
}

pub fn eigen(l: &LaplacianMatrix, want_vectors: bool) -> Result<Spectrum, SpectralError> {
    eigen_with(l, EigenOptions { want_vectors, ..Default::default() })
}

/// Full symmetric eigendecomposition (Householder tridiagonalisation followed
/// by implicit QR), sorted ascending.
pub fn eigen_with(l: &LaplacianMatrix, opts: EigenOptions) -> Result<Spectrum, SpectralError> {
    let n = l.n();
    if n == 0 {
        return Err(SpectralError::Empty);
    }
    if n > opts.max_dimension {
        return Err(SpectralError::TooLarge { n, cap: opts.max_dimension });
    }
    let (values, vectors) = if opts.want_vectors {
        let eig = SymmetricEigen::new(l.to_dmatrix());
        (eig.eigenvalues, Some(eig.eigenvectors))
    } else {
        (l.to_dmatrix().symmetric_eigenvalues(), None)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let eigenvectors = vectors.map(|v| DMatrix::from_fn(n, n, |i, j| v[(i, order[j])]));
    let top = eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    Ok(Spectrum { eigenvalues, eigenvectors, solve_tolerance: n as f64 * f64::EPSILON * top })
}

/// Number of eigenvalues in `[target - half_width, target + half_width]`.
pub fn multiplicity(s: &Spectrum, target: f64, half_width: f64) -> Result<usize, SpectralError> {
    if !(half_width > 0.0) {
        return Err(SpectralError::NonPositiveWindow(half_width));
    }
    interval_count(s, target - half_width, target + half_width)
}

/// Number of eigenvalues in the closed interval `[lo, hi]`.
pub fn interval_count(s: &Spectrum, lo: f64, hi: f64) -> Result<usize, SpectralError> {
    if !(lo <= hi) {
        return Err(SpectralError::InvalidArgument(format!("empty interval [{lo}, {hi}]")));
    }
    let first = s.eigenvalues.partition_point(|&x| x < lo);
    let past = s.eigenvalues.partition_point(|&x| x <= hi);
    Ok(past - first)
}

/// Closed-form Laplacian spectrum of `P_n`: `2 - 2cos(k pi / n)`, `k = 0..n`.
pub fn path_spectrum(n: usize) -> Result<Vec<f64>, SpectralError> {
    if n == 0 {
        return Err(SpectralError::InvalidArgument("path needs n >= 1".into()));
    }
    // Increasing in k already.
    Ok((0..n).map(|k| 2.0 - 2.0 * (k as f64 * PI / n as f64).cos()).collect())
}

/// Eigenvalues of `S(k.m)` contributed by its identical branches:
/// `2 + 2cos(p pi / (2m + 1))` for even `p` in `2..=2m`, each `k - 1` times.
pub fn starlike_branch_eigenvalues(k: usize, m: usize) -> Result<Vec<(f64, usize)>, SpectralError> {
    if k < 2 || m < 1 {
        return Err(SpectralError::InvalidArgument(format!("S({k}.{m}) needs k >= 2, m >= 1")));
    }
    let denom = (2 * m + 1) as f64;
    Ok((1..=m).map(|h| (2.0 + 2.0 * ((2 * h) as f64 * PI / denom).cos(), k - 1)).collect())
}

/// A run of numerically equal eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Plateau {
    pub value: f64,
    pub multiplicity: usize,
    /// Half-open range into the sorted eigenvalue list.
    pub start: usize,
    pub end: usize,
}

/// Greedy left-to-right clusters of the sorted spectrum: a new cluster starts
/// whenever the gap to the previous eigenvalue exceeds `2 * half_width`.
pub fn eigenvalue_clusters(s: &Spectrum, half_width: f64) -> Vec<Plateau> {
    let ev = &s.eigenvalues;
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=ev.len() {
        if i == ev.len() || ev[i] - ev[i - 1] > 2.0 * half_width {
            if i > start {
                let members = &ev[start..i];
                out.push(Plateau {
                    value: members.iter().sum::<f64>() / members.len() as f64,
                    multiplicity: members.len(),
                    start,
                    end: i,
                });
            }
            start = i;
        }
    }
    out
}

pub fn detect_plateaux(s: &Spectrum, min_multiplicity: usize, half_width: f64) -> Vec<Plateau> {
    let floor = min_multiplicity.max(2);
    eigenvalue_clusters(s, half_width).into_iter().filter(|p| p.multiplicity >= floor).collect()
}

/// `max_k |L x_k - lambda_k x_k|` over all computed eigenpairs.
pub fn max_residual(l: &LaplacianMatrix, s: &Spectrum) -> Result<f64, SpectralError> {
    let vecs = s.eigenvectors.as_ref().ok_or(SpectralError::NoEigenvectors)?;
    let mut worst = 0.0f64;
    for (k, &lam) in s.eigenvalues.iter().enumerate() {
        let x: Vec<f64> = vecs.column(k).iter().copied().collect();
        worst = worst.max(residual(l, &x, lam));
    }
    Ok(worst)
}

/// `|L x - lambda x|_inf`.
pub fn residual(l: &LaplacianMatrix, x: &[f64], lambda: f64) -> f64 {
    l.apply(x).iter().zip(x).map(|(lx, xi)| (lx - lambda * xi).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{make, TreeSpec};

    fn spectrum_of(spec: TreeSpec) -> Spectrum {
        eigen(&laplacian(make(&spec).unwrap().graph()), false).unwrap()
    }

    /// Integer characteristic polynomial `det(xI - M)` by Faddeev-LeVerrier,
    /// coefficients from the leading one down.
    fn char_poly(m: &[Vec<i64>]) -> Vec<i128> {
        let n = m.len();
        let mm: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let mut coeffs = vec![1i128];
        let mut acc = vec![vec![0i128; n]; n]; // M_k
        for k in 1..=n {
            // M_k = M * M_{k-1} + c_{k-1} I, with M_0 = 0, c_0 = 1
            let prev = acc.clone();
            for i in 0..n {
                for j in 0..n {
                    let mut s: i128 = (0..n).map(|t| mm[i][t] * prev[t][j]).sum();
                    if i == j {
                        s += coeffs[k - 1];
                    }
                    acc[i][j] = s;
                }
            }
            let tr: i128 = (0..n).map(|i| (0..n).map(|t| mm[i][t] * acc[t][i]).sum::<i128>()).sum();
            assert_eq!(tr % k as i128, 0);
            coeffs.push(-tr / k as i128);
        }
        coeffs
    }

    /// Multiplicity of an integer root by repeated synthetic division.
    fn root_multiplicity(mut p: Vec<i128>, r: i128) -> usize {
        let mut count = 0;
        loop {
            let mut q = Vec::with_capacity(p.len() - 1);
            let mut carry = 0i128;
            for &c in &p {
                carry = carry * r + c;
                q.push(carry);
            }
            if *q.last().unwrap() != 0 || p.len() == 1 {
                return count;
            }
            q.pop();
            p = q;
            count += 1;
        }
    }

    #[test]
    fn single_edge_matrix() {
        let l = laplacian(&Graph::from_edges(2, &[(0, 1)]).unwrap());
        assert_eq!(l.to_rows(), vec![vec![1, -1], vec![-1, 1]]);
    }

    #[test]
    fn p3_spectrum_matches_characteristic_polynomial() {
        let l = laplacian(&Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap());
        assert_eq!(l.to_rows(), vec![vec![1, -1, 0], vec![-1, 2, -1], vec![0, -1, 1]]);
        let p = char_poly(&l.to_rows());
        assert_eq!(p, vec![1, -4, 3, 0]); // x (x - 1)(x - 3)
        let s = eigen(&l, false).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn pendant_pair_block() {
        let l = laplacian(make(&TreeSpec::StarlikeUniform { k: 3, m: 2 }).unwrap().graph());
        // vertex 1 is a degree-2 mid vertex, vertex 2 its leaf
        assert_eq!([[l.get(1, 1), l.get(1, 2)], [l.get(2, 1), l.get(2, 2)]], [[2, -1], [-1, 1]]);
    }

    #[test]
    fn claw_spectrum() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let l = laplacian(&g);
        let p = char_poly(&l.to_rows());
        assert_eq!(root_multiplicity(p.clone(), 0), 1);
        assert_eq!(root_multiplicity(p.clone(), 1), 2);
        assert_eq!(root_multiplicity(p, 4), 1);
        let s = eigen(&l, false).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([0.0, 1.0, 1.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn single_vertex() {
        let s = eigen(&laplacian(&Graph::from_edges(1, &[]).unwrap()), true).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0]);
    }

    #[test]
    fn p5_contains_both_plateau_values() {
        let s = spectrum_of(TreeSpec::Path { n: 5, root_position: 1 });
        assert_eq!(multiplicity(&s, LAMBDA_MINUS, DEFAULT_HALF_WIDTH).unwrap(), 1);
        assert_eq!(multiplicity(&s, LAMBDA_PLUS, DEFAULT_HALF_WIDTH).unwrap(), 1);
        assert!((LAMBDA_MINUS - (2.0 - 2.0 * (PI / 5.0).cos())).abs() < 1e-15);
        assert!((LAMBDA_PLUS - (2.0 - 2.0 * (3.0 * PI / 5.0).cos())).abs() < 1e-15);
    }

    #[test]
    fn plateau_constants_are_conjugate_roots() {
        assert!((LAMBDA_MINUS + LAMBDA_PLUS - 3.0).abs() < 1e-15);
        assert!((LAMBDA_MINUS * LAMBDA_PLUS - 1.0).abs() < 1e-15);
        assert!((LAMBDA_MINUS - (3.0 - 5f64.sqrt()) / 2.0).abs() < 1e-16);
    }

    #[test]
    fn window_multiplicity_on_s52() {
        let s = spectrum_of(TreeSpec::StarlikeUniform { k: 5, m: 2 });
        assert_eq!(multiplicity(&s, LAMBDA_MINUS, DEFAULT_HALF_WIDTH).unwrap(), 4);
        assert_eq!(multiplicity(&s, 0.0, DEFAULT_HALF_WIDTH).unwrap(), 1);
        assert!(matches!(multiplicity(&s, 0.0, 0.0), Err(SpectralError::NonPositiveWindow(_))));
        assert!(multiplicity(&s, 0.0, -1.0).is_err());
    }

    #[test]
    fn path_closed_forms() {
        let p5 = path_spectrum(5).unwrap();
        let want = [0.0, 0.381_966_011_250_105, 1.381_966_011_250_105, 2.618_033_988_749_895, 3.618_033_988_749_895];
        for (a, b) in p5.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        let p2 = path_spectrum(2).unwrap();
        assert!((p2[0]).abs() < 1e-15 && (p2[1] - 2.0).abs() < 1e-15);
        let p4 = path_spectrum(4).unwrap();
        let s2 = 2f64.sqrt();
        for (a, b) in p4.iter().zip([0.0, 2.0 - s2, 2.0, 2.0 + s2]) {
            assert!((a - b).abs() < 1e-12);
        }
        let numeric = spectrum_of(TreeSpec::Path { n: 4, root_position: 1 });
        for (a, b) in p4.iter().zip(&numeric.eigenvalues) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(path_spectrum(0).is_err());
    }

    #[test]
    fn das_branch_values() {
        let m2 = starlike_branch_eigenvalues(7, 2).unwrap();
        assert!((m2[0].0 - LAMBDA_PLUS).abs() < 1e-14);
        assert!((m2[1].0 - LAMBDA_MINUS).abs() < 1e-14);
        assert!(m2.iter().all(|&(_, mult)| mult == 6));
        assert!(starlike_branch_eigenvalues(3, 2).unwrap().iter().all(|&(_, mult)| mult == 2));
        let m1 = starlike_branch_eigenvalues(2, 1).unwrap();
        assert_eq!(m1.len(), 1);
        assert!((m1[0].0 - 1.0).abs() < 1e-14);
        assert_eq!(m1[0].1, 1);
        assert!(starlike_branch_eigenvalues(1, 2).is_err());
        assert!(starlike_branch_eigenvalues(3, 0).is_err());
    }

    #[test]
    fn plateaux_of_s42() {
        let s = spectrum_of(TreeSpec::StarlikeUniform { k: 4, m: 2 });
        let found = detect_plateaux(&s, 2, DEFAULT_HALF_WIDTH);
        assert_eq!(found.len(), 2);
        assert!((found[0].value - LAMBDA_MINUS).abs() < 1e-10);
        assert!((found[1].value - LAMBDA_PLUS).abs() < 1e-10);
        assert!(found.iter().all(|p| p.multiplicity == 3 && p.end - p.start == 3));
    }

    #[test]
    fn no_plateaux_on_p6_and_one_on_claw() {
        let s = spectrum_of(TreeSpec::Path { n: 6, root_position: 1 });
        assert!(detect_plateaux(&s, 2, DEFAULT_HALF_WIDTH).is_empty());
        let claw = eigen(&laplacian(&Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()), false).unwrap();
        let found = detect_plateaux(&claw, 2, DEFAULT_HALF_WIDTH);
        assert_eq!(found.len(), 1);
        assert!((found[0].value - 1.0).abs() < 1e-12);
        assert_eq!(found[0].multiplicity, 2);
    }

    #[test]
    fn size_cap_enforced() {
        let l = laplacian(make(&TreeSpec::Path { n: 20, root_position: 1 }).unwrap().graph());
        let err = eigen_with(&l, EigenOptions { want_vectors: false, max_dimension: 10 }).unwrap_err();
        assert_eq!(err, SpectralError::TooLarge { n: 20, cap: 10 });
    }

    #[test]
    fn eigenvectors_are_orthonormal_with_small_residuals() {
        let t = make(&TreeSpec::Random { n: 80, seed: 3, spine_probability: 0.3 }).unwrap();
        let l = laplacian(t.graph());
        let s = eigen(&l, true).unwrap();
        let v = s.eigenvectors.as_ref().unwrap();
        let gram = v.transpose() * v;
        let mut worst = 0.0f64;
        for i in 0..s.n() {
            for j in 0..s.n() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - want).abs());
            }
        }
        assert!(worst < 1e-8, "gram deviation {worst}");
        assert!(max_residual(&l, &s).unwrap() <= 1e-9 * s.max().max(1.0));
    }
}
