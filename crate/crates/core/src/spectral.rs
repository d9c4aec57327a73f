//! The spectral sequence of a filtered complex.
//!
//! Pages are computed by the standard subquotient formulas
//! `Z_r^{p,q} = F^p K^{p+q} ∩ d^{-1} F^{p+r} K^{p+q+1}` and
//! `E_r^{p,q} = Z_r^{p,q} / (Z_{r-1}^{p+1,q-1} + d Z_{r-1}^{p-r+1,q+r-2})`,
//! with `d_r`-ranks read off the induced maps. Everything is exact subspace
//! arithmetic, so `dim E_{r+1} = dim ker d_r - rank(d_r in)` is asserted,
//! not assumed.

use crate::complex::Complex;
use crate::field::Field;
use crate::mat::*;
use std::collections::BTreeMap;

/// A complex with a finite decreasing filtration by subcomplexes.
///
/// `bases[k][t]` is a column basis of `F^{p_lo + t}` in degree `lo + k`;
/// `F^p` is the full space for `p < p_lo` and zero for `p > p_hi`.
#[derive(Clone)]
pub struct FilteredComplex<F: Field> {
    pub complex: Complex<F>,
    pub p_lo: i64,
    pub p_hi: i64,
    pub bases: Vec<Vec<Mat<F::Elem>>>,
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum FiltrationError {
    #[error("filtration step F^{p} not contained in F^{q} at degree {deg}")]
    NotNested { p: i64, q: i64, deg: i64 },
    #[error("differential does not preserve F^{p} at degree {deg}")]
    NotStable { p: i64, deg: i64 },
    #[error("filtration table has wrong shape")]
    BadShape,
}

impl<F: Field> FilteredComplex<F> {
    /// Basis of `F^p` in degree `n`.
    pub fn step(&self, p: i64, n: i64) -> Mat<F::Elem> {
        let f = &self.complex.field;
        let dim = self.complex.dim(n);
        if p < self.p_lo {
            return identity(f, dim);
        }
        if p > self.p_hi {
            return zero_mat(f, dim, 0);
        }
        let k = n - self.complex.lo;
        if k < 0 || k as usize >= self.bases.len() {
            return zero_mat(f, dim, 0);
        }
        self.bases[k as usize][(p - self.p_lo) as usize].clone()
    }

    pub fn validate(&self) -> Result<(), FiltrationError> {
        let f = &self.complex.field;
        if self.bases.len() != self.complex.dims.len() {
            return Err(FiltrationError::BadShape);
        }
        let width = (self.p_hi - self.p_lo + 1) as usize;
        for row in &self.bases {
            if row.len() != width {
                return Err(FiltrationError::BadShape);
            }
        }
        for n in self.complex.lo..=self.complex.hi() {
            for p in self.p_lo..=self.p_hi {
                let cur = self.step(p, n);
                let prev = self.step(p - 1, n);
                if !span_contains(f, &prev, &cur) {
                    return Err(FiltrationError::NotNested { p: p - 1, q: p, deg: n });
                }
                let img = mat_mul(f, &self.complex.d(n), &cur);
                let next = self.step(p, n + 1);
                if !span_contains(f, &next, &img) {
                    return Err(FiltrationError::NotStable { p, deg: n });
                }
            }
        }
        Ok(())
    }
}

/// One page of the spectral sequence: `(p,q) ↦ dim E_r^{p,q}` plus the rank of
/// each `d_r` emanating from `(p,q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPage {
    pub r: i64,
    pub entries: BTreeMap<(i64, i64), usize>,
    pub d_ranks: BTreeMap<(i64, i64), usize>,
}

impl SpectralPage {
    pub fn dim(&self, p: i64, q: i64) -> usize {
        self.entries.get(&(p, q)).copied().unwrap_or(0)
    }
    pub fn d_rank(&self, p: i64, q: i64) -> usize {
        self.d_ranks.get(&(p, q)).copied().unwrap_or(0)
    }
    pub fn is_zero_map_page(&self) -> bool {
        self.d_ranks.values().all(|&r| r == 0)
    }
}

struct Engine<'a, F: Field> {
    fc: &'a FilteredComplex<F>,
}

impl<'a, F: Field> Engine<'a, F> {
    /// `Z_r^{p,q}` for `r >= 1`; `Z_0^{p,q} = F^p K^{p+q}`.
    fn z(&self, r: i64, p: i64, q: i64) -> Mat<F::Elem> {
        let f = &self.fc.complex.field;
        let n = p + q;
        let fp = self.fc.step(p, n);
        if r <= 0 {
            return fp;
        }
        let d = self.fc.complex.d(n);
        let target = self.fc.step(p + r, n + 1);
        // {x in F^p : d x in F^{p+r}} = F^p ∩ d^{-1}(F^{p+r})
        let dfp = mat_mul(f, &d, &fp);
        let ker = kernel(f, &dfp.hcat(&mat_neg(f, &target)));
        let mut gens = zero_mat(f, self.fc.complex.dim(n), ker.cols);
        for c in 0..ker.cols {
            let u: Vec<F::Elem> = (0..fp.cols).map(|i| ker.at(i, c).clone()).collect();
            let v = mat_vec(f, &fp, &u);
            for (row, x) in v.into_iter().enumerate() {
                gens.set(row, c, x);
            }
        }
        col_space(f, &gens)
    }

    /// Denominator `D_r^{p,q} = Z_{r-1}^{p+1,q-1} + d Z_{r-1}^{p-r+1,q+r-2}`.
    fn denom(&self, r: i64, p: i64, q: i64) -> Mat<F::Elem> {
        let f = &self.fc.complex.field;
        let z1 = self.z(r - 1, p + 1, q - 1);
        let zsrc = self.z(r - 1, p - r + 1, q + r - 2);
        let dz = mat_mul(f, &self.fc.complex.d(p + q - 1), &zsrc);
        span_sum(f, &z1, &dz)
    }
}

/// Computes pages `1..=r_max`. The internal consistency identity
/// `dim E_{r+1} = dim E_r - rank(out) - rank(in)` is asserted for every cell.
pub fn spectral_sequence<F: Field>(fc: &FilteredComplex<F>, r_max: i64) -> Vec<SpectralPage> {
    let eng = Engine { fc };
    let f = &fc.complex.field;
    let lo = fc.complex.lo;
    let hi = fc.complex.hi();
    let mut pages = Vec::new();
    for r in 1..=r_max {
        let mut entries = BTreeMap::new();
        let mut d_ranks = BTreeMap::new();
        for n in lo..=hi {
            for p in fc.p_lo..=fc.p_hi.max(fc.p_lo) {
                let q = n - p;
                let z = eng.z(r, p, q);
                let den = eng.denom(r, p, q);
                let dim = z.cols - den.cols;
                if dim > 0 {
                    entries.insert((p, q), dim);
                }
                // rank of d_r out of (p,q)
                let dz = mat_mul(f, &fc.complex.d(n), &z);
                let den_t = eng.denom(r, p + r, q - r + 1);
                let rk = span_sum(f, &dz, &den_t).cols - den_t.cols;
                if rk > 0 {
                    d_ranks.insert((p, q), rk);
                }
            }
        }
        pages.push(SpectralPage { r, entries, d_ranks });
    }
    // Consistency across consecutive pages.
    for w in pages.windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        let r = cur.r;
        let keys: std::collections::BTreeSet<(i64, i64)> = cur
            .entries
            .keys()
            .chain(next.entries.keys())
            .copied()
            .collect();
        for (p, q) in keys {
            let rank_out = cur.d_rank(p, q);
            let rank_in = cur.d_rank(p - r, q + r - 1);
            assert_eq!(
                next.dim(p, q),
                cur.dim(p, q) - rank_out - rank_in,
                "page bookkeeping failed at r={r} (p,q)=({p},{q})"
            );
        }
    }
    pages
}

/// The page index from which every later differential is forced to vanish:
/// once `r` exceeds the filtration width the supports can no longer interact.
pub fn stable_page_index<F: Field>(fc: &FilteredComplex<F>) -> i64 {
    (fc.p_hi - fc.p_lo + 2).max(2)
}

/// The limit page together with the convergence check
/// `Σ_p dim E_∞^{p,n-p} = dim H^n` for every degree.
pub fn infinity_page<F: Field>(fc: &FilteredComplex<F>) -> (SpectralPage, bool) {
    let r = stable_page_index(fc);
    let pages = spectral_sequence(fc, r);
    let last = pages.last().expect("at least one page").clone();
    let mut ok = last.is_zero_map_page();
    for n in fc.complex.lo..=fc.complex.hi() {
        let total: usize = last
            .entries
            .iter()
            .filter(|((p, q), _)| p + q == n)
            .map(|(_, d)| d)
            .sum();
        if total != fc.complex.cohomology(n).dim {
            ok = false;
        }
    }
    (last, ok)
}

/// The filtration with a single step: `F^0` = everything, `F^1 = 0`.
pub fn trivial_filtration<F: Field>(c: &Complex<F>) -> FilteredComplex<F> {
    let f = c.field.clone();
    let bases = c
        .dims
        .iter()
        .map(|&d| vec![identity(&f, d)])
        .collect();
    FilteredComplex { complex: c.clone(), p_lo: 0, p_hi: 0, bases }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rationals;
    use crate::rat::{rat_i64, Rat};

    fn qmat(rows: Vec<Vec<i64>>) -> Mat<Rat> {
        Mat::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(rat_i64).collect())
                .collect(),
        )
    }

    #[test]
    fn trivial_filtration_reproduces_cohomology() {
        let c = Complex::new(
            Rationals,
            0,
            vec![2, 3, 1],
            vec![
                qmat(vec![vec![0, 0], vec![0, 0], vec![1, -1]]),
                qmat(vec![vec![-4, 0, 0]]),
            ],
        );
        let fc = trivial_filtration(&c);
        fc.validate().unwrap();
        let pages = spectral_sequence(&fc, 3);
        for (n, h) in c.cohomology_dims() {
            assert_eq!(pages[0].dim(0, n), h, "E_1 at degree {n}");
        }
        for page in &pages {
            assert!(page.is_zero_map_page());
            assert_eq!(page.entries, pages[0].entries);
        }
        let (inf, ok) = infinity_page(&fc);
        assert!(ok);
        assert_eq!(inf.entries, pages[0].entries);
    }

    #[test]
    fn two_step_filtration_of_acyclic_complex() {
        // 0 -> Q -id-> Q -> 0 filtered by the subcomplex (0, Q).
        let c = Complex::new(Rationals, 0, vec![1, 1], vec![qmat(vec![vec![1]])]);
        let bases = vec![
            vec![identity(&Rationals, 1), zero_mat(&Rationals, 1, 0)],
            vec![identity(&Rationals, 1), identity(&Rationals, 1)],
        ];
        let fc = FilteredComplex { complex: c, p_lo: 0, p_hi: 1, bases };
        fc.validate().unwrap();
        let (inf, ok) = infinity_page(&fc);
        assert!(ok);
        assert!(inf.entries.is_empty(), "E_infinity vanishes: {:?}", inf.entries);
        // E_1 is nonzero (the associated graded sees both lines) but dies.
        let pages = spectral_sequence(&fc, 2);
        assert!(!pages[0].entries.is_empty());
        assert!(!pages[0].is_zero_map_page());
    }

    #[test]
    fn rejects_unstable_filtration() {
        let c = Complex::new(Rationals, 0, vec![1, 1], vec![qmat(vec![vec![1]])]);
        // F^1 = (Q, 0) is not d-stable.
        let bases = vec![
            vec![identity(&Rationals, 1), identity(&Rationals, 1)],
            vec![identity(&Rationals, 1), zero_mat(&Rationals, 1, 0)],
        ];
        let fc = FilteredComplex { complex: c, p_lo: 0, p_hi: 1, bases };
        assert!(matches!(
            fc.validate(),
            Err(FiltrationError::NotStable { .. })
        ));
    }
}
