//! Built-in example objects and seeded random generators.
//!
//! The generators only ever produce *valid* data (admissible modules, honest
//! chain maps), built compositionally from blocks whose admissibility is known
//! and transported along random changes of basis.

use crate::complex::Complex;
use crate::field::{Field, K0Field, KField, Rationals};
use crate::mat::*;
use crate::mfcx::{hom_zero, GammaData, HomElem, MfComplex};
use crate::module::{FilteredPhiNModule, Filtration, K0Elem, KElem};
use crate::phodge::PadicHodgeComplex;
use crate::rat::{rat_i64, Rat};
use crate::tower::{smallest_nonresidue, Tower};
use num_traits::{One, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// The plain `Q_p` model.
pub fn tq(p: i64) -> Arc<Tower> {
    Tower::qp(p)
}

/// Unramified quadratic layer: `x^2 - c` with `c` the smallest non-residue.
pub fn quad_tower(p: i64) -> Arc<Tower> {
    let pr = num_bigint::BigInt::from(p);
    let c = smallest_nonresidue(&pr);
    let modulus = vec![Rat::from_integer(-c), Rat::zero(), Rat::one()];
    let sigma = vec![Rat::one(), Rat::zero(), Rat::zero(), -Rat::one()];
    let eis = vec![
        vec![Rat::from_integer(-pr.clone()), Rat::zero()],
        vec![Rat::one(), Rat::zero()],
    ];
    Tower::new(pr, 2, Some(modulus), Some(sigma), 1, eis).expect("quadratic tower")
}

/// Totally ramified quadratic layer: `y^2 - p`.
pub fn ramified_tower(p: i64) -> Arc<Tower> {
    let pr = num_bigint::BigInt::from(p);
    let eis = vec![
        vec![Rat::from_integer(-pr.clone())],
        vec![Rat::zero()],
        vec![Rat::one()],
    ];
    Tower::new(pr, 1, None, None, 2, eis).expect("ramified tower")
}

/// The split multiplicative ("Tate curve") module: `phi = diag(1, p)`,
/// `N e_2 = e_1`, `F^1 = span(e_2 + c e_1)`.
pub fn tate_module(t: &Arc<Tower>, c: i64) -> FilteredPhiNModule {
    let k = KField(t.clone());
    let p = Rat::from_integer(t.p.clone());
    let phi = Mat::from_rows(vec![
        vec![t.k0_one(), t.k0_zero()],
        vec![t.k0_zero(), t.k0_from_rat(p)],
    ]);
    let nmat = Mat::from_rows(vec![
        vec![t.k0_zero(), t.k0_one()],
        vec![t.k0_zero(), t.k0_zero()],
    ]);
    let line = Mat::from_fn(2, 1, |r, _| {
        if r == 0 {
            t.k_embed(&t.k0_from_rat(rat_i64(c)))
        } else {
            t.k_one()
        }
    });
    let filt = Filtration { jumps: vec![(0, identity(&k, 2)), (1, line)] };
    FilteredPhiNModule { tower: t.clone(), dim: 2, phi, nmat, filt }
}

/// Good-reduction elliptic-curve module: companion matrix of
/// `x^2 - a_p x + p`, `N = 0`, jumps at 0 and 1 with `F^1 = span(e_1)`.
/// Requires `a_p^2 - 4p` to not be a perfect square (so the Frobenius has no
/// rational eigenvalue and the module has no proper subobjects).
pub fn elliptic_module(t: &Arc<Tower>, a_p: i64) -> FilteredPhiNModule {
    let k0 = K0Field(t.clone());
    let k = KField(t.clone());
    let p = Rat::from_integer(t.p.clone());
    let phi = Mat::from_rows(vec![
        vec![t.k0_zero(), t.k0_from_rat(-p)],
        vec![t.k0_one(), t.k0_from_rat(rat_i64(a_p))],
    ]);
    let line = Mat::from_fn(2, 1, |r, _| if r == 0 { t.k_one() } else { t.k_zero() });
    let filt = Filtration { jumps: vec![(0, identity(&k, 2)), (1, line)] };
    FilteredPhiNModule {
        tower: t.clone(),
        dim: 2,
        phi,
        nmat: zero_mat(&k0, 2, 2),
        filt,
    }
}

/// `phi = diag(p^a, p^b)` (a < b), `N = 0`, jumps at `a` (full) and `b`
/// (`span(e_2)`): the split ordinary shape, admissible.
pub fn split_ordinary(t: &Arc<Tower>, a: i64, b: i64) -> FilteredPhiNModule {
    assert!(a < b);
    let k0 = K0Field(t.clone());
    let k = KField(t.clone());
    let pa = crate::rat::rat_pow_int(&t.p, a);
    let pb = crate::rat::rat_pow_int(&t.p, b);
    let phi = Mat::from_rows(vec![
        vec![t.k0_from_rat(pa), t.k0_zero()],
        vec![t.k0_zero(), t.k0_from_rat(pb)],
    ]);
    let e2 = Mat::from_fn(2, 1, |r, _| if r == 1 { t.k_one() } else { t.k_zero() });
    let filt = Filtration { jumps: vec![(a, identity(&k, 2)), (b, e2)] };
    FilteredPhiNModule {
        tower: t.clone(),
        dim: 2,
        phi,
        nmat: zero_mat(&k0, 2, 2),
        filt,
    }
}

/// A random invertible integer matrix over K0 with small entries.
pub fn random_basis_change(t: &Arc<Tower>, rng: &mut ChaCha8Rng, dim: usize) -> Mat<K0Elem> {
    let k0 = K0Field(t.clone());
    loop {
        let m = Mat::from_fn(dim, dim, |_, _| t.k0_from_rat(rat_i64(rng.gen_range(-2..=2))));
        if dim == 0 || rank(&k0, &m) == dim {
            return m;
        }
    }
}

/// A seeded random *admissible* module: a small admissible block (or sum or
/// tensor of two), conjugated by a random basis change.
pub fn random_admissible_module(t: &Arc<Tower>, rng: &mut ChaCha8Rng) -> FilteredPhiNModule {
    let base = |rng: &mut ChaCha8Rng| -> FilteredPhiNModule {
        match rng.gen_range(0..4) {
            0 => FilteredPhiNModule::unit_twist(t, rng.gen_range(-2..=2)),
            1 => tate_module(t, rng.gen_range(-2..=2)),
            2 => elliptic_module(t, if rng.gen_bool(0.5) { 1 } else { 2 }),
            _ => {
                let a = rng.gen_range(-1..=0);
                let b = rng.gen_range(1..=2);
                split_ordinary(t, a, b)
            }
        }
    };
    let m = match rng.gen_range(0..6) {
        0..=2 => base(rng),
        3 => {
            let a = FilteredPhiNModule::unit_twist(t, rng.gen_range(-1..=1));
            let b = base(rng);
            a.direct_sum(&b).unwrap()
        }
        4 => {
            let a = FilteredPhiNModule::unit_twist(t, rng.gen_range(-1..=1));
            let b = base(rng);
            a.tensor(&b).unwrap()
        }
        _ => base(rng),
    };
    let p = random_basis_change(t, rng, m.dim);
    m.conjugate(&p).unwrap()
}

/// A seeded random bounded complex of admissible modules (length <= 2) with
/// categorical differentials, conjugated degreewise.
pub fn random_mf_complex(t: &Arc<Tower>, rng: &mut ChaCha8Rng) -> MfComplex {
    let k0 = K0Field(t.clone());
    let lo = rng.gen_range(-1..=1);
    let cx = match rng.gen_range(0..5) {
        0 => MfComplex::concentrated(random_admissible_module(t, rng), lo),
        1 => {
            // zero differential two-term complex
            let a = random_admissible_module(t, rng);
            let b = random_admissible_module(t, rng);
            let d = zero_mat(&k0, b.dim, a.dim);
            MfComplex { tower: t.clone(), lo, modules: vec![a, b], diffs: vec![d] }
        }
        2 => {
            // identity two-term (acyclic)
            let a = random_admissible_module(t, rng);
            let d = identity(&k0, a.dim);
            MfComplex { tower: t.clone(), lo, modules: vec![a.clone(), a], diffs: vec![d] }
        }
        3 => {
            // inclusion M -> M ⊕ L
            let a = random_admissible_module(t, rng);
            let l = FilteredPhiNModule::unit_twist(t, rng.gen_range(-1..=1));
            let sum = a.direct_sum(&l).unwrap();
            let d = Mat::from_fn(sum.dim, a.dim, |r, c| {
                if r == c {
                    k0.one()
                } else {
                    k0.zero()
                }
            });
            MfComplex { tower: t.clone(), lo, modules: vec![a, sum], diffs: vec![d] }
        }
        _ => {
            // projection M ⊕ L -> L
            let a = random_admissible_module(t, rng);
            let l = FilteredPhiNModule::unit_twist(t, rng.gen_range(-1..=1));
            let sum = a.direct_sum(&l).unwrap();
            let d = Mat::from_fn(l.dim, sum.dim, |r, c| {
                if c == a.dim + r {
                    k0.one()
                } else {
                    k0.zero()
                }
            });
            MfComplex { tower: t.clone(), lo, modules: vec![sum, l], diffs: vec![d] }
        }
    };
    // degreewise conjugation
    let ps: Vec<Mat<K0Elem>> = cx
        .modules
        .iter()
        .map(|m| random_basis_change(t, rng, m.dim))
        .collect();
    let mut modules = Vec::new();
    for (m, p) in cx.modules.iter().zip(&ps) {
        modules.push(m.conjugate(p).unwrap());
    }
    let mut diffs = Vec::new();
    for (i, d) in cx.diffs.iter().enumerate() {
        let p_inv = inverse(&k0, &ps[i]).unwrap();
        diffs.push(mat_mul(&k0, &ps[i + 1], &mat_mul(&k0, d, &p_inv)));
    }
    MfComplex { tower: t.clone(), lo: cx.lo, modules, diffs }
}

/// A random element of the space of tilde cocycles:
/// `(x,y,z) ∈ Ker^0 psi` with `d_B(x,y,z) ∈ im(phi')`.
pub fn random_tilde_cocycle(
    gd: &GammaData,
    rng: &mut ChaCha8Rng,
) -> (HomElem<K0Elem>, HomElem<K0Elem>, HomElem<KElem>) {
    let q = Rationals;
    let ker0 = kernel(&q, &gd.psi_map.mat(0));
    // condition: d_B k u ∈ im phi^1
    let db = gd.b.d(0);
    let dk = mat_mul(&q, &db, &ker0);
    let im_phi = col_space(&q, &gd.phi_map.mat(1));
    let pre = preimage(&q, &dk, &im_phi);
    // random combination
    let mut v = vec![q.zero(); gd.b.dim(0)];
    for c in 0..pre.cols {
        let coeff = rat_i64(rng.gen_range(-2..=2));
        if coeff.is_zero() {
            continue;
        }
        let u = pre.col(c);
        let w = mat_vec(&q, &ker0, &u);
        for (i, x) in w.into_iter().enumerate() {
            v[i] += coeff.clone() * x;
        }
    }
    gd.split_b(0, &v)
}

/// A random degree-0 Hom element (any matrices; used by the hat witness).
pub fn random_hom0(
    l: &MfComplex,
    m: &MfComplex,
    rng: &mut ChaCha8Rng,
) -> HomElem<K0Elem> {
    let k0 = K0Field(l.tower.clone());
    let lu = l.underlying();
    let mu = m.underlying();
    let mut x = hom_zero(&k0, &lu, &mu, 0);
    let keys: Vec<i64> = x.blocks.keys().copied().collect();
    for j in keys {
        let rows = m.dim(j);
        let cols = l.dim(j);
        x.blocks.insert(
            j,
            Mat::from_fn(rows, cols, |_, _| l.tower.k0_from_rat(rat_i64(rng.gen_range(-2..=2)))),
        );
    }
    x
}


/// A pHC that is acyclic in every specialization: only the middle `K`
/// complex is nonzero, an identity cone, with zero comparison maps.
pub fn acyclic_phc(t: &Arc<Tower>, dim: usize) -> PadicHodgeComplex {
    let k0 = K0Field(t.clone());
    let kf = KField(t.clone());
    PadicHodgeComplex {
        tower: t.clone(),
        rig: Complex::new(k0, 0, vec![0, 0], vec![zero_mat(&K0Field(t.clone()), 0, 0)]),
        phi: vec![zero_mat(&K0Field(t.clone()), 0, 0), zero_mat(&K0Field(t.clone()), 0, 0)],
        n_op: vec![zero_mat(&K0Field(t.clone()), 0, 0), zero_mat(&K0Field(t.clone()), 0, 0)],
        k_spec: Complex::new(kf.clone(), 0, vec![dim, dim], vec![identity(&kf, dim)]),
        dr: Complex::new(kf.clone(), 0, vec![0, 0], vec![zero_mat(&kf, 0, 0)]),
        dr_filt: vec![Filtration { jumps: vec![] }, Filtration { jumps: vec![] }],
        alpha: vec![zero_mat(&kf, dim, 0), zero_mat(&kf, dim, 0)],
        beta: vec![zero_mat(&kf, dim, 0), zero_mat(&kf, dim, 0)],
    }
}

/// A seeded random pHC that satisfies the (HK) surrogate and strictness:
/// a Theta image, possibly perturbed by an acyclic summand on the K side.
pub fn random_hk_phc(t: &Arc<Tower>, rng: &mut ChaCha8Rng) -> PadicHodgeComplex {
    let th = PadicHodgeComplex::theta(&random_mf_complex(t, rng));
    if rng.gen_bool(0.5) {
        th.direct_sum(&acyclic_phc(t, rng.gen_range(1..=2)))
    } else {
        th
    }
}

/// A hand-built non-Theta pHC: rigid side from one complex, de Rham side from
/// another, glued into their direct sum on the K side. Valid, but generically
/// neither strict-compatible nor (HK).
pub fn mixed_phc(x: &MfComplex, y: &MfComplex) -> PadicHodgeComplex {
    let t = x.tower.clone();
    let kf = KField(t.clone());
    let lo = x.lo.min(y.lo);
    let hi = x.hi().max(y.hi());
    let xk = x.extend_k();
    let yk = y.extend_k();
    let pad0 = |c: &Complex<K0Field>| -> Complex<K0Field> {
        let k0 = K0Field(t.clone());
        Complex::new(
            k0.clone(),
            lo,
            (lo..=hi).map(|n| c.dim(n)).collect(),
            (lo..hi).map(|n| c.d(n)).collect(),
        )
    };
    let padk = |c: &Complex<KField>| -> Complex<KField> {
        Complex::new(
            kf.clone(),
            lo,
            (lo..=hi).map(|n| c.dim(n)).collect(),
            (lo..hi).map(|n| c.d(n)).collect(),
        )
    };
    let k_spec = Complex::new(
        kf.clone(),
        lo,
        (lo..=hi).map(|n| xk.dim(n) + yk.dim(n)).collect(),
        (lo..hi)
            .map(|n| crate::complex::block_diag(&kf, &xk.d(n), &yk.d(n)))
            .collect(),
    );
    let alpha = (lo..=hi)
        .map(|n| {
            Mat::from_fn(k_spec.dim(n), x.dim(n), |r, c| {
                if r == c { kf.one() } else { kf.zero() }
            })
        })
        .collect();
    let beta = (lo..=hi)
        .map(|n| {
            Mat::from_fn(k_spec.dim(n), y.dim(n), |r, c| {
                if r >= xk.dim(n) && r - xk.dim(n) == c {
                    kf.one()
                } else {
                    kf.zero()
                }
            })
        })
        .collect();
    PadicHodgeComplex {
        tower: t.clone(),
        rig: pad0(&x.underlying()),
        phi: (lo..=hi).map(|n| x.phi_at(n)).collect(),
        n_op: (lo..=hi).map(|n| x.nmat_at(n)).collect(),
        k_spec,
        dr: padk(&yk),
        dr_filt: (lo..=hi).map(|n| y.module(n).filt.clone()).collect(),
        alpha,
        beta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::{admissibility, AdmissibilityMode, AdmissibilityVerdict};
    use rand::SeedableRng;

    #[test]
    fn builtin_modules_are_valid_and_admissible() {
        let t = tq(5);
        for m in [
            tate_module(&t, 1),
            elliptic_module(&t, 2),
            split_ordinary(&t, 0, 1),
        ] {
            m.validate().unwrap();
            assert_eq!(m.hodge_number(), m.newton_number());
            match admissibility(&m, AdmissibilityMode::Random { seed: 7, trials: 20 }).unwrap() {
                AdmissibilityVerdict::NoViolationFound { .. }
                | AdmissibilityVerdict::Admissible { .. } => {}
                v => panic!("violation on a built-in block: {v:?}"),
            }
        }
    }

    #[test]
    fn phc_generators_are_valid() {
        let t = tq(5);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        acyclic_phc(&t, 2).validate().unwrap();
        assert!(acyclic_phc(&t, 2).is_hk()); // all cohomology zero on both sides
        for _ in 0..6 {
            let hk = random_hk_phc(&t, &mut rng);
            hk.validate().unwrap();
            assert!(hk.is_hk());
            assert!(hk.strictness_check());
            let mx = mixed_phc(&random_mf_complex(&t, &mut rng), &random_mf_complex(&t, &mut rng));
            mx.validate().unwrap();
        }
    }

    #[test]
    fn random_generators_produce_valid_objects() {
        let t = tq(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..12 {
            let m = random_admissible_module(&t, &mut rng);
            m.validate().unwrap();
            assert_eq!(m.hodge_number(), m.newton_number());
            let cx = random_mf_complex(&t, &mut rng);
            cx.validate().unwrap();
        }
    }
}
