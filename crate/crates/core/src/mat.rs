//! Dense exact matrices and the subspace calculus.
//!
//! Row-major storage; all eliminations are plain exact Gaussian elimination
//! over a [`Field`]. Subspaces are represented by matrices whose columns form
//! a (not necessarily reduced) spanning set; `col_space` reduces them to a
//! basis with identifiable pivots.

use crate::field::Field;
use std::fmt;

#[derive(Clone, PartialEq)]
pub struct Mat<E> {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<E>,
}

impl<E: fmt::Debug> fmt::Debug for Mat<E> {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(fm, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(fm, "  {:?}", &self.entries[r * self.cols..(r + 1) * self.cols])?;
        }
        write!(fm, "]")
    }
}

impl<E: Clone> Mat<E> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Mat { rows, cols, entries }
    }

    pub fn from_rows(rows_elems: Vec<Vec<E>>) -> Self {
        let rows = rows_elems.len();
        let cols = rows_elems.first().map_or(0, |r| r.len());
        for r in &rows_elems {
            assert_eq!(r.len(), cols, "ragged matrix rows");
        }
        Mat {
            rows,
            cols,
            entries: rows_elems.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &E {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: E) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn col(&self, c: usize) -> Vec<E> {
        (0..self.rows).map(|r| self.at(r, c).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Mat::from_fn(self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    /// Horizontal concatenation (same row count).
    pub fn hcat(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Mat::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.at(r, c).clone()
            } else {
                other.at(r, c - self.cols).clone()
            }
        })
    }

    pub fn map<T: Clone>(&self, mut f: impl FnMut(&E) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(&mut f).collect(),
        }
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        Mat::from_fn(self.rows, idx.len(), |r, c| self.at(r, idx[c]).clone())
    }
}

pub fn zero_mat<F: Field>(f: &F, rows: usize, cols: usize) -> Mat<F::Elem> {
    Mat::from_fn(rows, cols, |_, _| f.zero())
}

pub fn identity<F: Field>(f: &F, n: usize) -> Mat<F::Elem> {
    Mat::from_fn(n, n, |r, c| if r == c { f.one() } else { f.zero() })
}

pub fn scalar_mat<F: Field>(f: &F, n: usize, s: &F::Elem) -> Mat<F::Elem> {
    Mat::from_fn(n, n, |r, c| if r == c { s.clone() } else { f.zero() })
}

pub fn mat_add<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat::from_fn(a.rows, a.cols, |r, c| f.add(a.at(r, c), b.at(r, c)))
}

pub fn mat_sub<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols));
    Mat::from_fn(a.rows, a.cols, |r, c| f.sub(a.at(r, c), b.at(r, c)))
}

pub fn mat_neg<F: Field>(f: &F, a: &Mat<F::Elem>) -> Mat<F::Elem> {
    a.map(|e| f.neg(e))
}

pub fn mat_scale<F: Field>(f: &F, s: &F::Elem, a: &Mat<F::Elem>) -> Mat<F::Elem> {
    a.map(|e| f.mul(s, e))
}

pub fn mat_mul<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    assert_eq!(a.cols, b.rows, "shape mismatch in mat_mul");
    Mat::from_fn(a.rows, b.cols, |r, c| {
        let mut acc = f.zero();
        for k in 0..a.cols {
            if !f.is_zero(a.at(r, k)) && !f.is_zero(b.at(k, c)) {
                acc = f.add(&acc, &f.mul(a.at(r, k), b.at(k, c)));
            }
        }
        acc
    })
}

pub fn mat_vec<F: Field>(f: &F, a: &Mat<F::Elem>, v: &[F::Elem]) -> Vec<F::Elem> {
    assert_eq!(a.cols, v.len());
    (0..a.rows)
        .map(|r| {
            let mut acc = f.zero();
            for (k, x) in v.iter().enumerate() {
                if !f.is_zero(a.at(r, k)) && !f.is_zero(x) {
                    acc = f.add(&acc, &f.mul(a.at(r, k), x));
                }
            }
            acc
        })
        .collect()
}

pub fn is_zero_mat<F: Field>(f: &F, a: &Mat<F::Elem>) -> bool {
    (0..a.rows).all(|r| (0..a.cols).all(|c| f.is_zero(a.at(r, c))))
}

/// Row echelon form: returns (reduced matrix, pivot columns).
///
/// Fully reduced (RREF): pivots are 1 with zeros above and below.
pub fn rref<F: Field>(f: &F, m: &Mat<F::Elem>) -> (Mat<F::Elem>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..a.cols {
        if row >= a.rows {
            break;
        }
        // Prefer a pivot equal to +-1 to keep entries small.
        let mut sel = None;
        for r in row..a.rows {
            if !f.is_zero(a.at(r, col)) {
                if sel.is_none() {
                    sel = Some(r);
                }
                let e = a.at(r, col);
                if *e == f.one() || *e == f.neg(&f.one()) {
                    sel = Some(r);
                    break;
                }
            }
        }
        let Some(sel) = sel else { continue };
        if sel != row {
            for c in 0..a.cols {
                let x = a.at(row, c).clone();
                let y = a.at(sel, c).clone();
                a.set(row, c, y);
                a.set(sel, c, x);
            }
        }
        let inv = f.inv(a.at(row, col)).expect("pivot nonzero");
        for c in col..a.cols {
            let v = f.mul(&inv, a.at(row, c));
            a.set(row, c, v);
        }
        for r in 0..a.rows {
            if r != row && !f.is_zero(a.at(r, col)) {
                let factor = a.at(r, col).clone();
                for c in col..a.cols {
                    let v = f.sub(a.at(r, c), &f.mul(&factor, a.at(row, c)));
                    a.set(r, c, v);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

pub fn rank<F: Field>(f: &F, m: &Mat<F::Elem>) -> usize {
    rref(f, m).1.len()
}

/// Basis of the kernel (columns), via RREF free-variable parametrization.
/// Free variables are read in increasing column order, so particular
/// solutions are always the lexicographically-first pivot solutions.
pub fn kernel<F: Field>(f: &F, m: &Mat<F::Elem>) -> Mat<F::Elem> {
    let (r, pivots) = rref(f, m);
    let n = m.cols;
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let mut basis = zero_mat(f, n, free.len());
    for (k, &fc) in free.iter().enumerate() {
        basis.set(fc, k, f.one());
        for (prow, &pc) in pivots.iter().enumerate() {
            let coeff = r.at(prow, fc);
            if !f.is_zero(coeff) {
                basis.set(pc, k, f.neg(coeff));
            }
        }
    }
    basis
}

/// Basis of the column space: the pivot columns of the input.
pub fn col_space<F: Field>(f: &F, m: &Mat<F::Elem>) -> Mat<F::Elem> {
    let (_, pivots) = rref(f, m);
    m.select_cols(&pivots)
}

/// One solution of `A x = b`, or `None`; free variables set to zero.
pub fn solve<F: Field>(f: &F, a: &Mat<F::Elem>, b: &[F::Elem]) -> Option<Vec<F::Elem>> {
    assert_eq!(a.rows, b.len());
    let aug = a.hcat(&Mat::from_fn(a.rows, 1, |r, _| b[r].clone()));
    let (r, pivots) = rref(f, &aug);
    if pivots.contains(&a.cols) {
        return None; // pivot in the constant column: inconsistent
    }
    let mut x = vec![f.zero(); a.cols];
    for (prow, &pc) in pivots.iter().enumerate() {
        x[pc] = r.at(prow, a.cols).clone();
    }
    Some(x)
}

/// Solve `A X = B` columnwise.
pub fn solve_mat<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Option<Mat<F::Elem>> {
    let mut cols = Vec::with_capacity(b.cols);
    for c in 0..b.cols {
        cols.push(solve(f, a, &b.col(c))?);
    }
    Some(Mat::from_fn(a.cols, b.cols, |r, c| cols[c][r].clone()))
}

pub fn inverse<F: Field>(f: &F, a: &Mat<F::Elem>) -> Option<Mat<F::Elem>> {
    if a.rows != a.cols {
        return None;
    }
    let sol = solve_mat(f, a, &identity(f, a.rows))?;
    // solve_mat returns *a* solution; for square full-rank systems it is the inverse.
    if rank(f, a) == a.rows {
        Some(sol)
    } else {
        None
    }
}

/// Determinant by elimination.
pub fn det<F: Field>(f: &F, m: &Mat<F::Elem>) -> F::Elem {
    assert_eq!(m.rows, m.cols);
    let n = m.rows;
    let mut a = m.clone();
    let mut acc = f.one();
    for col in 0..n {
        let mut sel = None;
        for r in col..n {
            if !f.is_zero(a.at(r, col)) {
                sel = Some(r);
                break;
            }
        }
        let Some(sel) = sel else { return f.zero() };
        if sel != col {
            acc = f.neg(&acc);
            for c in 0..n {
                let x = a.at(col, c).clone();
                let y = a.at(sel, c).clone();
                a.set(col, c, y);
                a.set(sel, c, x);
            }
        }
        let piv = a.at(col, col).clone();
        acc = f.mul(&acc, &piv);
        let inv = f.inv(&piv).expect("nonzero pivot");
        for r in (col + 1)..n {
            if !f.is_zero(a.at(r, col)) {
                let factor = f.mul(a.at(r, col), &inv);
                for c in col..n {
                    let v = f.sub(a.at(r, c), &f.mul(&factor, a.at(col, c)));
                    a.set(r, c, v);
                }
            }
        }
    }
    acc
}

// --- subspace calculus (columns span the subspace) ----------------------

/// Does `v` lie in the column span of `basis`?
pub fn in_span<F: Field>(f: &F, basis: &Mat<F::Elem>, v: &[F::Elem]) -> bool {
    solve(f, basis, v).is_some()
}

pub fn span_contains<F: Field>(f: &F, big: &Mat<F::Elem>, small: &Mat<F::Elem>) -> bool {
    (0..small.cols).all(|c| in_span(f, big, &small.col(c)))
}

pub fn spans_equal<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> bool {
    span_contains(f, a, b) && span_contains(f, b, a)
}

/// Basis of `span(a) + span(b)`.
pub fn span_sum<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    col_space(f, &a.hcat(b))
}

/// Basis of `span(a) ∩ span(b)`.
pub fn span_intersect<F: Field>(f: &F, a: &Mat<F::Elem>, b: &Mat<F::Elem>) -> Mat<F::Elem> {
    // Solve a u = b w: kernel of [a | -b], read off the u part.
    let stacked = a.hcat(&mat_neg(f, b));
    let ker = kernel(f, &stacked);
    let mut gens = zero_mat(f, a.rows, ker.cols);
    for c in 0..ker.cols {
        let u: Vec<F::Elem> = (0..a.cols).map(|i| ker.at(i, c).clone()).collect();
        let vec = mat_vec(f, a, &u);
        for (r, x) in vec.into_iter().enumerate() {
            gens.set(r, c, x);
        }
    }
    col_space(f, &gens)
}

/// Preimage `{x : m x ∈ span(w)}` as a column basis.
pub fn preimage<F: Field>(f: &F, m: &Mat<F::Elem>, w: &Mat<F::Elem>) -> Mat<F::Elem> {
    let stacked = m.hcat(&mat_neg(f, w));
    let ker = kernel(f, &stacked);
    let proj = Mat::from_fn(m.cols, ker.cols, |r, c| ker.at(r, c).clone());
    col_space(f, &proj)
}

/// Extends `inside` (independent columns contained in `ambient`'s span) to a
/// basis of `ambient`'s span; returns the appended complement columns.
pub fn complement_in<F: Field>(
    f: &F,
    inside: &Mat<F::Elem>,
    ambient: &Mat<F::Elem>,
) -> Mat<F::Elem> {
    let combined = inside.hcat(ambient);
    let (_, pivots) = rref(f, &combined);
    let picked: Vec<usize> = pivots
        .iter()
        .copied()
        .filter(|&c| c >= inside.cols)
        .map(|c| c - inside.cols)
        .collect();
    ambient.select_cols(&picked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::rat::rat_i64;

    fn qm(rows: Vec<Vec<i64>>) -> Mat<crate::rat::Rat> {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(rat_i64).collect())
                .collect(),
        )
    }

    #[test]
    fn rank_kernel_image_examples() {
        let f = Rationals;
        // 2x2 identity: rank 2, empty kernel, full image.
        let id = identity(&f, 2);
        assert_eq!(rank(&f, &id), 2);
        assert_eq!(kernel(&f, &id).cols, 0);
        assert_eq!(col_space(&f, &id).cols, 2);
        // zero 3x2: rank 0, kernel full.
        let z = zero_mat(&f, 3, 2);
        assert_eq!(rank(&f, &z), 0);
        assert_eq!(kernel(&f, &z).cols, 2);
        // second row twice the first: rank 1.
        let m = qm(vec![vec![1, 2], vec![2, 4]]);
        assert_eq!(rank(&f, &m), 1);
        let k = kernel(&f, &m);
        assert_eq!(k.cols, 1);
        assert!(is_zero_mat(&f, &mat_mul(&f, &m, &k)));
    }

    #[test]
    fn solve_and_inverse() {
        let f = Rationals;
        let a = qm(vec![vec![2, 1], vec![1, 1]]);
        let inv = inverse(&f, &a).unwrap();
        assert_eq!(mat_mul(&f, &a, &inv), identity(&f, 2));
        assert_eq!(det(&f, &a), rat_i64(1));
        let b = vec![rat_i64(3), rat_i64(2)];
        let x = solve(&f, &a, &b).unwrap();
        assert_eq!(mat_vec(&f, &a, &x), b);
        let sing = qm(vec![vec![1, 2], vec![2, 4]]);
        assert!(inverse(&f, &sing).is_none());
        assert_eq!(det(&f, &sing), rat_i64(0));
        assert!(solve(&f, &sing, &[rat_i64(0), rat_i64(1)]).is_none());
    }

    #[test]
    fn subspace_calculus() {
        let f = Rationals;
        let e1 = qm(vec![vec![1], vec![0], vec![0]]);
        let e12 = qm(vec![vec![1, 0], vec![0, 1], vec![0, 0]]);
        let e23 = qm(vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        let inter = span_intersect(&f, &e12, &e23);
        assert_eq!(inter.cols, 1);
        assert!(spans_equal(
            &f,
            &inter,
            &qm(vec![vec![0], vec![1], vec![0]])
        ));
        let sum = span_sum(&f, &e12, &e23);
        assert_eq!(sum.cols, 3);
        assert!(span_contains(&f, &e12, &e1));
        let comp = complement_in(&f, &e1, &e12);
        assert_eq!(comp.cols, 1);
        // preimage of span(e1) under projection onto coords (1,2).
        let proj = qm(vec![vec![1, 0, 0], vec![0, 1, 0]]);
        let pre = preimage(&f, &proj, &qm(vec![vec![1], vec![0]]));
        assert_eq!(pre.cols, 2); // e1 and e3
    }
}
