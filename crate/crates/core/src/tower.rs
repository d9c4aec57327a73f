//! Exact models of the coefficient fields.
//!
//! `K0` is the unramified layer `Q[x]/(m)` with `m` monic of degree `f`
//! irreducible mod `p` (so `{1,x,...}` is a Witt basis and the valuation of an
//! element is the minimum of the coordinate valuations), carrying the order-`f`
//! automorphism `sigma`. `K = K0[y]/(E)` is a totally ramified extension cut
//! out by an Eisenstein polynomial `E`; its root is the uniformizer `pi` with
//! `v_p(pi) = 1/e`. These are global fields dense in the p-adic ones, so all
//! linear algebra downstream stays exact.

use crate::rat::{format_rat, int_ord_p, rat_i64, rat_vp, Int, Rat};
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::sync::Arc;

#[derive(Debug, Clone, thiserror::Error)]
pub enum TowerError {
    #[error("invalid tower: {0}")]
    BadTower(String),
    #[error("layer mismatch: expected {expected:?}, got {got:?}")]
    LayerMismatch { expected: Layer, got: Layer },
    #[error("division by zero")]
    DivisionByZero,
    #[error("coordinate length {got} does not match layer dimension {expected}")]
    BadCoords { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Layer {
    K0,
    K,
}

/// `v_p` extended to the tower; `Infinity` is the valuation of zero.
#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    Finite(Rat),
    Infinity,
}

impl Valuation {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Valuation::Infinity, Valuation::Infinity) => Some(Ordering::Equal),
            (Valuation::Infinity, _) => Some(Ordering::Greater),
            (_, Valuation::Infinity) => Some(Ordering::Less),
            (Valuation::Finite(a), Valuation::Finite(b)) => a.partial_cmp(b),
        }
    }
}

/// The fixed arithmetic data of `Q_p ⊂ K0 ⊂ K`.
///
/// Immutable once built; shared via `Arc` by every object that lives over it.
#[derive(Debug, Clone)]
pub struct Tower {
    pub p: Int,
    pub f: usize,
    /// Monic integer polynomial of degree `f`, ascending coefficients
    /// (length `f+1`). For `f = 1` this is the formal `x` and never used.
    pub k0_modulus: Vec<Rat>,
    /// `f x f` row-major matrix of `sigma` acting on `K0` coordinates.
    pub sigma_mat: Vec<Rat>,
    pub e: usize,
    /// Monic Eisenstein polynomial of degree `e` over `K0`, ascending
    /// coefficients (length `e+1`), each a `K0` coordinate vector.
    pub eisenstein: Vec<Vec<Rat>>,
    /// Reductions of `x^k` (k < 2f-1) to `K0` coordinates.
    x_red: Vec<Vec<Rat>>,
    /// Reductions of `y^k` (k < 2e-1) to `K`-over-`K0` coordinates.
    y_red: Vec<Vec<Vec<Rat>>>,
}

fn is_prime(n: &Int) -> bool {
    if *n < Int::from(2) {
        return false;
    }
    let two = Int::from(2);
    if *n == two {
        return true;
    }
    if (n % &two).is_zero() {
        return false;
    }
    let mut d = Int::from(3);
    while &d * &d <= *n {
        if (n % &d).is_zero() {
            return false;
        }
        d += 2;
    }
    true
}

impl Tower {
    /// Builds and fully validates a tower.
    pub fn new(
        p: Int,
        f: usize,
        k0_modulus: Option<Vec<Rat>>,
        sigma_mat: Option<Vec<Rat>>,
        e: usize,
        eisenstein: Vec<Vec<Rat>>,
    ) -> Result<Arc<Tower>, TowerError> {
        let bad = |m: String| Err(TowerError::BadTower(m));
        if !is_prime(&p) {
            return bad(format!("p = {p} is not prime"));
        }
        if f != 1 && f != 2 {
            return bad(format!("residue degree f = {f} unsupported (need 1 or 2)"));
        }
        if e == 0 {
            return bad("ramification degree e must be positive".into());
        }
        let k0_modulus = match (f, k0_modulus) {
            (1, _) => vec![Rat::zero(), Rat::one()],
            (_, None) => return bad("f = 2 requires k0_modulus".into()),
            (_, Some(m)) => m,
        };
        if k0_modulus.len() != f + 1 || !k0_modulus[f].is_one() {
            return bad("k0_modulus must be monic of degree f".into());
        }
        if k0_modulus.iter().any(|c| !c.denom().is_one()) {
            return bad("k0_modulus must have integer coefficients".into());
        }
        if f == 2 && !quadratic_irreducible_mod_p(&p, &k0_modulus) {
            return bad("k0_modulus is reducible mod p; {1,x} is not a Witt basis".into());
        }
        let sigma_mat = match (f, sigma_mat) {
            (1, _) => vec![Rat::one()],
            (_, None) => return bad("f = 2 requires sigma_matrix".into()),
            (_, Some(s)) => s,
        };
        if sigma_mat.len() != f * f {
            return bad("sigma_matrix has wrong shape".into());
        }

        let x_red = reduce_powers_rat(&k0_modulus, f);
        let mut tower = Tower {
            p,
            f,
            k0_modulus,
            sigma_mat,
            e,
            eisenstein,
            x_red,
            y_red: Vec::new(),
        };

        if f == 2 {
            tower.check_sigma()?;
        }
        tower.check_eisenstein()?;
        tower.y_red = tower.reduce_powers_k0();
        Ok(Arc::new(tower))
    }

    /// The rational prime field as a trivial tower (`f = e = 1`, `pi = p`).
    pub fn qp(p: i64) -> Arc<Tower> {
        let pr = Int::from(p);
        let eis = vec![vec![Rat::from_integer(-pr.clone())], vec![Rat::one()]];
        Tower::new(pr, 1, None, None, 1, eis).expect("Q_p tower")
    }

    fn check_sigma(&self) -> Result<(), TowerError> {
        let bad = |m: String| Err(TowerError::BadTower(m));
        let one = self.k0_one();
        // sigma fixes Q.
        if self.k0_sigma(&one) != one {
            return bad("sigma does not fix 1".into());
        }
        // sigma^f = id on the basis.
        for i in 0..self.f {
            let mut v = self.k0_zero();
            v[i] = Rat::one();
            let mut w = v.clone();
            for _ in 0..self.f {
                w = self.k0_sigma(&w);
            }
            if w != v {
                return bad(format!("sigma^{} is not the identity", self.f));
            }
        }
        // Multiplicative on the spanning set {1, x}: sigma(x*x) = sigma(x)^2.
        let x = self.k0_x();
        let lhs = self.k0_sigma(&self.k0_mul(&x, &x));
        let sx = self.k0_sigma(&x);
        let rhs = self.k0_mul(&sx, &sx);
        if lhs != rhs {
            return bad("sigma is not multiplicative on the basis".into());
        }
        if self.k0_sigma(&x) == x {
            return bad("sigma must have exact order f = 2".into());
        }
        // Order-f field automorphisms of the unramified layer preserve v_p
        // automatically; spot-check the basis anyway.
        if self.k0_vp(&self.k0_sigma(&x)) != self.k0_vp(&x) {
            return bad("sigma does not preserve the valuation of x".into());
        }
        Ok(())
    }

    fn check_eisenstein(&self) -> Result<(), TowerError> {
        let bad = |m: String| Err(TowerError::BadTower(m));
        if self.eisenstein.len() != self.e + 1 {
            return bad("eisenstein must have degree e".into());
        }
        for c in &self.eisenstein {
            if c.len() != self.f {
                return bad("eisenstein coefficients must be K0 elements".into());
            }
        }
        if self.eisenstein[self.e] != self.k0_one() {
            return bad("eisenstein must be monic".into());
        }
        match self.k0_vp(&self.eisenstein[0]) {
            Valuation::Finite(v) if v == rat_i64(1) => {}
            _ => return bad("eisenstein constant term must have v_p = 1".into()),
        }
        for c in self.eisenstein.iter().take(self.e).skip(1) {
            match self.k0_vp(c) {
                Valuation::Infinity => {}
                Valuation::Finite(v) if v > Rat::zero() => {}
                _ => return bad("eisenstein middle coefficients need positive valuation".into()),
            }
        }
        Ok(())
    }

    pub fn k0_dim(&self) -> usize {
        self.f
    }

    pub fn k_dim(&self) -> usize {
        self.e * self.f
    }

    pub fn k0_zero(&self) -> Vec<Rat> {
        vec![Rat::zero(); self.f]
    }

    pub fn k0_one(&self) -> Vec<Rat> {
        let mut v = self.k0_zero();
        v[0] = Rat::one();
        v
    }

    fn k0_x(&self) -> Vec<Rat> {
        let mut v = self.k0_zero();
        if self.f > 1 {
            v[1] = Rat::one();
        }
        v
    }

    pub fn k0_from_rat(&self, r: Rat) -> Vec<Rat> {
        let mut v = self.k0_zero();
        v[0] = r;
        v
    }

    pub fn k0_add(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn k0_neg(&self, a: &[Rat]) -> Vec<Rat> {
        a.iter().map(|x| -x).collect()
    }

    pub fn k0_mul(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let f = self.f;
        let mut conv = vec![Rat::zero(); 2 * f - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                if !y.is_zero() {
                    conv[i + j] += x * y;
                }
            }
        }
        let mut out = self.k0_zero();
        for (k, c) in conv.iter().enumerate() {
            if !c.is_zero() {
                for (t, r) in self.x_red[k].iter().enumerate() {
                    out[t] += c * r;
                }
            }
        }
        out
    }

    pub fn k0_is_zero(&self, a: &[Rat]) -> bool {
        a.iter().all(|x| x.is_zero())
    }

    pub fn k0_inv(&self, a: &[Rat]) -> Option<Vec<Rat>> {
        if self.k0_is_zero(a) {
            return None;
        }
        if self.f == 1 {
            return Some(vec![Rat::one() / &a[0]]);
        }
        // Solve (mult-by-a) b = 1.
        let cols: Vec<Vec<Rat>> = (0..self.f)
            .map(|j| {
                let mut ej = self.k0_zero();
                ej[j] = Rat::one();
                self.k0_mul(a, &ej)
            })
            .collect();
        solve_square(&cols, &self.k0_one())
    }

    pub fn k0_sigma(&self, a: &[Rat]) -> Vec<Rat> {
        let f = self.f;
        let mut out = self.k0_zero();
        for i in 0..f {
            for j in 0..f {
                out[i] += &self.sigma_mat[i * f + j] * &a[j];
            }
        }
        out
    }

    pub fn k0_sigma_inv(&self, a: &[Rat]) -> Vec<Rat> {
        // sigma has order f, so sigma^{-1} = sigma^{f-1}.
        let mut v = a.to_vec();
        for _ in 0..self.f - 1 {
            v = self.k0_sigma(&v);
        }
        v
    }

    /// `v_p` on `K0`: minimum coordinate valuation (Witt basis).
    pub fn k0_vp(&self, a: &[Rat]) -> Valuation {
        let mut best: Option<Rat> = None;
        for c in a {
            if let Some(v) = rat_vp(&self.p, c) {
                best = Some(match best {
                    None => v,
                    Some(b) => {
                        if v < b {
                            v
                        } else {
                            b
                        }
                    }
                });
            }
        }
        match best {
            Some(v) => Valuation::Finite(v),
            None => Valuation::Infinity,
        }
    }

    // --- K layer ------------------------------------------------------

    pub fn k_zero(&self) -> Vec<Rat> {
        vec![Rat::zero(); self.k_dim()]
    }

    pub fn k_one(&self) -> Vec<Rat> {
        let mut v = self.k_zero();
        v[0] = Rat::one();
        v
    }

    /// The uniformizer `pi` (the class of `y`), as a `K` element.
    pub fn k_pi(&self) -> Vec<Rat> {
        if self.e == 1 {
            // y = -c0 in K0 = K.
            return self.k0_neg(&self.eisenstein[0]);
        }
        let mut v = self.k_zero();
        v[self.f] = Rat::one();
        v
    }

    pub fn k_embed(&self, a: &[Rat]) -> Vec<Rat> {
        let mut v = self.k_zero();
        v[..self.f].clone_from_slice(a);
        v
    }

    fn k_chunk<'a>(&self, a: &'a [Rat], i: usize) -> &'a [Rat] {
        &a[i * self.f..(i + 1) * self.f]
    }

    pub fn k_add(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    pub fn k_neg(&self, a: &[Rat]) -> Vec<Rat> {
        a.iter().map(|x| -x).collect()
    }

    pub fn k_is_zero(&self, a: &[Rat]) -> bool {
        a.iter().all(|x| x.is_zero())
    }

    pub fn k_mul(&self, a: &[Rat], b: &[Rat]) -> Vec<Rat> {
        let e = self.e;
        let mut conv: Vec<Vec<Rat>> = vec![self.k0_zero(); 2 * e - 1];
        for i in 0..e {
            let ai = self.k_chunk(a, i);
            if self.k0_is_zero(ai) {
                continue;
            }
            for j in 0..e {
                let bj = self.k_chunk(b, j);
                if !self.k0_is_zero(bj) {
                    let prod = self.k0_mul(ai, bj);
                    conv[i + j] = self.k0_add(&conv[i + j], &prod);
                }
            }
        }
        let mut out: Vec<Vec<Rat>> = vec![self.k0_zero(); e];
        for (k, c) in conv.iter().enumerate() {
            if !self.k0_is_zero(c) {
                for t in 0..e {
                    let r = &self.y_red[k][t];
                    if !self.k0_is_zero(r) {
                        let add = self.k0_mul(c, r);
                        out[t] = self.k0_add(&out[t], &add);
                    }
                }
            }
        }
        out.concat()
    }

    pub fn k_inv(&self, a: &[Rat]) -> Option<Vec<Rat>> {
        if self.k_is_zero(a) {
            return None;
        }
        let n = self.k_dim();
        let cols: Vec<Vec<Rat>> = (0..n)
            .map(|j| {
                let mut ej = self.k_zero();
                ej[j] = Rat::one();
                self.k_mul(a, &ej)
            })
            .collect();
        solve_square(&cols, &self.k_one())
    }

    /// `v_p` on `K`: `min_i (v_p(a_i) + i/e)` over the `y`-coordinates.
    /// The candidate values are pairwise distinct mod 1, so the minimum is
    /// attained once and the ultrametric inequality is an equality.
    pub fn k_vp(&self, a: &[Rat]) -> Valuation {
        let mut best: Option<Rat> = None;
        for i in 0..self.e {
            if let Valuation::Finite(v) = self.k0_vp(self.k_chunk(a, i)) {
                let cand = v + Rat::new(Int::from(i as i64), Int::from(self.e as i64));
                best = Some(match best {
                    None => cand,
                    Some(b) => {
                        if cand < b {
                            cand
                        } else {
                            b
                        }
                    }
                });
            }
        }
        match best {
            Some(v) => Valuation::Finite(v),
            None => Valuation::Infinity,
        }
    }

    fn reduce_powers_k0(&self) -> Vec<Vec<Vec<Rat>>> {
        // y^k as K-over-K0 coordinate vectors, for k < 2e-1.
        let e = self.e;
        let mut out: Vec<Vec<Vec<Rat>>> = Vec::with_capacity(2 * e - 1);
        for k in 0..e {
            let mut v = vec![self.k0_zero(); e];
            v[k] = self.k0_one();
            out.push(v);
        }
        for k in e..(2 * e - 1) {
            // y^k = y * y^{k-1}, then reduce y^e = -(c_{e-1} y^{e-1} + ... + c_0).
            let prev = out[k - 1].clone();
            let mut shifted = vec![self.k0_zero(); e + 1];
            for (i, c) in prev.iter().enumerate() {
                shifted[i + 1] = c.clone();
            }
            let top = shifted[e].clone();
            let mut v: Vec<Vec<Rat>> = shifted[..e].to_vec();
            if !self.k0_is_zero(&top) {
                for (i, c) in self.eisenstein.iter().take(e).enumerate() {
                    let sub = self.k0_mul(&top, c);
                    v[i] = self.k0_add(&v[i], &self.k0_neg(&sub));
                }
            }
            out.push(v);
        }
        out
    }
}

fn reduce_powers_rat(modulus: &[Rat], f: usize) -> Vec<Vec<Rat>> {
    let mut out: Vec<Vec<Rat>> = Vec::with_capacity(2 * f - 1);
    for k in 0..f {
        let mut v = vec![Rat::zero(); f];
        v[k] = Rat::one();
        out.push(v);
    }
    for k in f..(2 * f).saturating_sub(1) {
        let prev = out[k - 1].clone();
        let mut shifted = vec![Rat::zero(); f + 1];
        for (i, c) in prev.iter().enumerate() {
            shifted[i + 1] = c.clone();
        }
        let top = shifted[f].clone();
        let mut v: Vec<Rat> = shifted[..f].to_vec();
        if !top.is_zero() {
            for i in 0..f {
                v[i] -= &top * &modulus[i];
            }
        }
        out.push(v);
    }
    out
}

fn quadratic_irreducible_mod_p(p: &Int, m: &[Rat]) -> bool {
    // m = x^2 + b x + c with integer b, c. Just scan for roots; tower primes
    // are small by construction.
    let b = m[1].numer().clone();
    let c = m[0].numer().clone();
    let mut t = Int::zero();
    while &t < p {
        let val = (&t * &t + &b * &t + &c) % p;
        if val.is_zero() {
            return false;
        }
        t += 1;
    }
    true
}

/// Solve `A b = rhs` for square `A` given by columns; `None` if singular.
fn solve_square(cols: &[Vec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = rhs.len();
    let mut aug: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            let mut row: Vec<Rat> = (0..n).map(|j| cols[j][i].clone()).collect();
            row.push(rhs[i].clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..n {
        let mut sel = None;
        for (r, row) in aug.iter().enumerate().skip(pivot_row) {
            if !row[col].is_zero() {
                sel = Some(r);
                break;
            }
        }
        let sel = sel?;
        aug.swap(pivot_row, sel);
        let inv = Rat::one() / aug[pivot_row][col].clone();
        for x in aug[pivot_row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != pivot_row && !aug[r][col].is_zero() {
                let factor = aug[r][col].clone();
                for c in col..=n {
                    let sub = &factor * &aug[pivot_row][c];
                    aug[r][c] -= sub;
                }
            }
        }
        pivot_row += 1;
    }
    Some(aug.iter().map(|row| row[n].clone()).collect())
}

// --- spec-facing element wrapper ---------------------------------------

/// A scalar in one of the two layers, as exposed by the CLI surface.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldElement {
    pub layer: Layer,
    pub coords: Vec<Rat>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Mul,
    Inv,
}

impl Tower {
    fn check_elem(&self, a: &FieldElement) -> Result<(), TowerError> {
        let expected = match a.layer {
            Layer::K0 => self.k0_dim(),
            Layer::K => self.k_dim(),
        };
        if a.coords.len() != expected {
            return Err(TowerError::BadCoords {
                expected,
                got: a.coords.len(),
            });
        }
        Ok(())
    }

    pub fn valuation(&self, a: &FieldElement) -> Result<Valuation, TowerError> {
        self.check_elem(a)?;
        Ok(match a.layer {
            Layer::K0 => self.k0_vp(&a.coords),
            Layer::K => self.k_vp(&a.coords),
        })
    }

    pub fn sigma(&self, a: &FieldElement) -> Result<FieldElement, TowerError> {
        self.check_elem(a)?;
        match a.layer {
            Layer::K0 => Ok(FieldElement {
                layer: Layer::K0,
                coords: self.k0_sigma(&a.coords),
            }),
            Layer::K => Err(TowerError::LayerMismatch {
                expected: Layer::K0,
                got: Layer::K,
            }),
        }
    }

    pub fn field_arith(
        &self,
        a: &FieldElement,
        b: Option<&FieldElement>,
        kind: ArithKind,
    ) -> Result<FieldElement, TowerError> {
        self.check_elem(a)?;
        if let Some(b) = b {
            self.check_elem(b)?;
            if b.layer != a.layer {
                return Err(TowerError::LayerMismatch {
                    expected: a.layer,
                    got: b.layer,
                });
            }
        }
        let coords = match (kind, a.layer) {
            (ArithKind::Add, Layer::K0) => self.k0_add(&a.coords, &b.unwrap().coords),
            (ArithKind::Add, Layer::K) => self.k_add(&a.coords, &b.unwrap().coords),
            (ArithKind::Mul, Layer::K0) => self.k0_mul(&a.coords, &b.unwrap().coords),
            (ArithKind::Mul, Layer::K) => self.k_mul(&a.coords, &b.unwrap().coords),
            (ArithKind::Inv, Layer::K0) => {
                self.k0_inv(&a.coords).ok_or(TowerError::DivisionByZero)?
            }
            (ArithKind::Inv, Layer::K) => {
                self.k_inv(&a.coords).ok_or(TowerError::DivisionByZero)?
            }
        };
        Ok(FieldElement {
            layer: a.layer,
            coords,
        })
    }

    /// `v_p` of `p` itself, normalization check.
    pub fn vp_of_p(&self) -> Valuation {
        self.k0_vp(&self.k0_from_rat(Rat::from_integer(self.p.clone())))
    }
}

pub fn format_k0(a: &[Rat]) -> String {
    if a.len() == 1 {
        format_rat(&a[0])
    } else {
        format!("[{}]", a.iter().map(format_rat).collect::<Vec<_>>().join(", "))
    }
}

/// Smallest positive quadratic non-residue mod an odd prime.
pub fn smallest_nonresidue(p: &Int) -> Int {
    let mut c = Int::from(2);
    loop {
        let mut is_res = false;
        let mut t = Int::zero();
        while &t < p {
            if (&t * &t - &c) .clone() % p == Int::zero() {
                is_res = true;
                break;
            }
            t += 1;
        }
        if !is_res {
            return c;
        }
        c += 1;
        assert!(int_ord_p(p, &c) == 0 || &c < p, "nonresidue search overran");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat_frac;

    fn quad_tower(p: i64) -> Arc<Tower> {
        let pr = Int::from(p);
        let c = smallest_nonresidue(&pr);
        let modulus = vec![Rat::from_integer(-c), Rat::zero(), Rat::one()];
        let sigma = vec![Rat::one(), Rat::zero(), Rat::zero(), -Rat::one()];
        let eis = vec![vec![Rat::from_integer(-pr.clone()), Rat::zero()], vec![Rat::one(), Rat::zero()]];
        Tower::new(pr, 2, Some(modulus), Some(sigma), 1, eis).unwrap()
    }

    fn ramified_tower(p: i64) -> Arc<Tower> {
        // K = Q_p(sqrt(p)): y^2 - p.
        let pr = Int::from(p);
        let eis = vec![
            vec![Rat::from_integer(-pr.clone())],
            vec![Rat::zero()],
            vec![Rat::one()],
        ];
        Tower::new(pr, 1, None, None, 2, eis).unwrap()
    }

    #[test]
    fn valuation_examples() {
        let t = Tower::qp(5);
        // v_p(p) = 1, v_p(1) = 0.
        assert_eq!(t.vp_of_p(), Valuation::Finite(rat_i64(1)));
        let one = FieldElement {
            layer: Layer::K0,
            coords: t.k0_one(),
        };
        assert_eq!(t.valuation(&one).unwrap(), Valuation::Finite(rat_i64(0)));
        let zero = FieldElement {
            layer: Layer::K0,
            coords: t.k0_zero(),
        };
        assert_eq!(t.valuation(&zero).unwrap(), Valuation::Infinity);
    }

    #[test]
    fn ramified_pi_has_half_valuation() {
        let t = ramified_tower(5);
        let pi = FieldElement {
            layer: Layer::K,
            coords: t.k_pi(),
        };
        // pi^2 is a p-unit multiple of p by the Eisenstein relation.
        assert_eq!(t.valuation(&pi).unwrap(), Valuation::Finite(rat_frac(1, 2)));
        let sq = t.k_mul(&t.k_pi(), &t.k_pi());
        assert_eq!(sq, t.k_embed(&t.k0_from_rat(rat_i64(5))));
    }

    #[test]
    fn sigma_examples() {
        let t = Tower::qp(7);
        let a = FieldElement {
            layer: Layer::K0,
            coords: t.k0_from_rat(rat_frac(3, 7)),
        };
        assert_eq!(t.sigma(&a).unwrap(), a);

        let q = quad_tower(5);
        let x = FieldElement {
            layer: Layer::K0,
            coords: vec![Rat::zero(), Rat::one()],
        };
        let sx = q.sigma(&x).unwrap();
        assert_eq!(sx.coords, vec![Rat::zero(), -Rat::one()]);
        assert_eq!(q.sigma(&sx).unwrap(), x);
        let one = FieldElement {
            layer: Layer::K0,
            coords: q.k0_one(),
        };
        assert_eq!(q.sigma(&one).unwrap(), one);
    }

    #[test]
    fn arithmetic_examples() {
        let t = Tower::qp(5);
        let a = FieldElement {
            layer: Layer::K0,
            coords: t.k0_from_rat(rat_frac(1, 2)),
        };
        let b = FieldElement {
            layer: Layer::K0,
            coords: t.k0_from_rat(rat_frac(1, 3)),
        };
        let s = t.field_arith(&a, Some(&b), ArithKind::Add).unwrap();
        assert_eq!(s.coords, t.k0_from_rat(rat_frac(5, 6)));

        let p = FieldElement {
            layer: Layer::K0,
            coords: t.k0_from_rat(rat_i64(5)),
        };
        let ip = t.field_arith(&p, None, ArithKind::Inv).unwrap();
        assert_eq!(ip.coords, t.k0_from_rat(rat_frac(1, 5)));
        let zero = FieldElement {
            layer: Layer::K0,
            coords: t.k0_zero(),
        };
        assert!(matches!(
            t.field_arith(&zero, None, ArithKind::Inv),
            Err(TowerError::DivisionByZero)
        ));
    }

    #[test]
    fn valuation_is_multiplicative_and_ultrametric() {
        for t in [Tower::qp(5), quad_tower(5), ramified_tower(3)] {
            let samples: Vec<Vec<Rat>> = (0..t.k_dim())
                .map(|i| {
                    let mut v = t.k_zero();
                    v[i] = rat_frac(3, 5);
                    v[0] += rat_i64((i as i64) - 1);
                    v
                })
                .collect();
            for a in &samples {
                for b in &samples {
                    let va = t.k_vp(a);
                    let vb = t.k_vp(b);
                    let vab = t.k_vp(&t.k_mul(a, b));
                    if let (Valuation::Finite(x), Valuation::Finite(y)) = (&va, &vb) {
                        assert_eq!(vab, Valuation::Finite(x + y));
                    }
                    let vsum = t.k_vp(&t.k_add(a, b));
                    let min = if va <= vb { va.clone() } else { vb.clone() };
                    assert!(vsum >= min, "ultrametric violated");
                }
            }
        }
    }

    #[test]
    fn inversion_is_exact() {
        for t in [quad_tower(5), ramified_tower(5)] {
            let mut a = t.k_zero();
            a[0] = rat_frac(2, 3);
            if t.k_dim() > 1 {
                a[1] = rat_i64(5);
            }
            let inv = t.k_inv(&a).unwrap();
            assert_eq!(t.k_mul(&a, &inv), t.k_one());
        }
    }

    #[test]
    fn rejects_bad_towers() {
        assert!(Tower::new(Int::from(4), 1, None, None, 1,
            vec![vec![-rat_i64(4)], vec![Rat::one()]]).is_err());
        // Eisenstein constant term with wrong valuation.
        assert!(Tower::new(Int::from(5), 1, None, None, 2,
            vec![vec![rat_i64(1)], vec![Rat::zero()], vec![Rat::one()]]).is_err());
        // Reducible quadratic mod p (x^2 - 1 mod 5 has roots).
        assert!(Tower::new(
            Int::from(5),
            2,
            Some(vec![-Rat::one(), Rat::zero(), Rat::one()]),
            Some(vec![Rat::one(), Rat::zero(), Rat::zero(), -Rat::one()]),
            1,
            vec![vec![-rat_i64(5), Rat::zero()], vec![Rat::one(), Rat::zero()]],
        )
        .is_err());
    }
}
