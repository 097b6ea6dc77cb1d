//! Exact rank of integer matrices.
//!
//! Two fraction-free routes: dense Bareiss elimination, and a sparse
//! row-combination scheme that keeps each row primitive (content divided out)
//! and picks pivots by a minimum-fill heuristic. Both work over arbitrary
//! precision integers and agree exactly; the sparse one is what scales to the
//! few-thousand-vertex graphs handled here.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Rank over the rationals by Bareiss elimination.
pub fn rank_bareiss(rows: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let nrows = a.len();
    let ncols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut rank = 0;
    for col in 0..ncols {
        if rank == nrows {
            break;
        }
        let Some(p) = (rank..nrows).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        let pivot = &pivot_row[col];
        for row in rest.iter_mut() {
            let factor = std::mem::take(&mut row[col]);
            for j in col + 1..ncols {
                let v = pivot * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
        }
        prev = pivot.clone();
        rank += 1;
    }
    rank
}

type SparseRow = Vec<(usize, BigInt)>;

fn make_primitive(row: &mut SparseRow) {
    let mut g = BigInt::zero();
    for (_, v) in row.iter() {
        g = g.gcd(v);
        if g.is_one() {
            return;
        }
    }
    if g > BigInt::one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
}

// a * x - b * y, merged by column, dropping zeros.
fn combine(a: &BigInt, x: &SparseRow, b: &BigInt, y: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(x.len() + y.len());
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let cx = x.get(i).map_or(usize::MAX, |e| e.0);
        let cy = y.get(j).map_or(usize::MAX, |e| e.0);
        if cx < cy {
            out.push((cx, a * &x[i].1));
            i += 1;
        } else if cy < cx {
            out.push((cy, -(b * &y[j].1)));
            j += 1;
        } else {
            let v = a * &x[i].1 - b * &y[j].1;
            if !v.is_zero() {
                out.push((cx, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank over the rationals of a sparse integer matrix given as rows of
/// `(column, value)` entries with columns in `0..ncols`.
pub fn rank_sparse(rows: Vec<Vec<(usize, i64)>>, ncols: usize) -> usize {
    let mut rows: Vec<Option<SparseRow>> = rows
        .into_iter()
        .map(|r| {
            let mut r: SparseRow = r.into_iter().filter(|e| e.1 != 0).map(|(c, v)| (c, BigInt::from(v))).collect();
            r.sort_by_key(|e| e.0);
            if r.is_empty() {
                None
            } else {
                make_primitive(&mut r);
                Some(r)
            }
        })
        .collect();

    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); ncols];
    let mut col_count = vec![0usize; ncols];
    for (i, r) in rows.iter().enumerate() {
        if let Some(r) = r {
            for &(c, _) in r {
                col_rows[c].push(i);
                col_count[c] += 1;
            }
        }
    }

    let mut rank = 0;
    loop {
        // Sparsest remaining row, then its least-shared column.
        let Some(pr) = rows
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.as_ref().map(|r| (r.len(), i)))
            .min()
            .map(|(_, i)| i)
        else {
            break;
        };
        let pivot_row = rows[pr].take().expect("chosen row is active");
        let &(pc, ref pv) = pivot_row
            .iter()
            .min_by_key(|(c, v)| (col_count[*c], v.magnitude().bits()))
            .expect("active rows are nonempty");
        let pv = pv.clone();
        for &(c, _) in &pivot_row {
            col_count[c] -= 1;
        }
        rank += 1;

        let mut touched = std::mem::take(&mut col_rows[pc]);
        touched.sort_unstable();
        touched.dedup();
        for i in touched {
            let Some(row) = rows[i].as_ref() else { continue };
            let Ok(pos) = row.binary_search_by_key(&pc, |e| e.0) else { continue };
            let factor = &row[pos].1;
            let g = pv.gcd(factor);
            let a = &pv / &g;
            let b = factor / &g;
            let mut next = combine(&a, row, &b, &pivot_row);
            for &(c, _) in row {
                col_count[c] -= 1;
            }
            if next.is_empty() {
                rows[i] = None;
                continue;
            }
            make_primitive(&mut next);
            if next[0].1.is_negative() {
                for (_, v) in next.iter_mut() {
                    *v = -std::mem::take(v);
                }
            }
            {
                let old = rows[i].as_ref().expect("active");
                for &(c, _) in &next {
                    col_count[c] += 1;
                    if old.binary_search_by_key(&c, |e| e.0).is_err() {
                        col_rows[c].push(i);
                    }
                }
            }
            rows[i] = Some(next);
        }
    }
    rank
}

/// Dense rows to sparse `(column, value)` rows.
pub fn to_sparse(rows: &[Vec<i64>]) -> Vec<Vec<(usize, i64)>> {
    rows.iter()
        .map(|r| r.iter().enumerate().filter(|(_, &v)| v != 0).map(|(c, &v)| (c, v)).collect())
        .collect()
}
