//! Seeded, deterministic property suites covering every stated invariant,
//! plus the sign-convention mutation tripwire. The CLI `selftest` verb runs
//! all of them; the acceptance tests call into the same drivers.

use crate::builtin::*;
use crate::complex::{cone, ChainMap, Complex};
use crate::field::{Field, K0Field, KField, Rationals};
use crate::mat::*;
use crate::mfcx::*;
use crate::module::{admissibility, AdmissibilityMode, AdmissibilityVerdict, FilteredPhiNModule};
use crate::phodge::{ext_phc, gamma_to_lambda, LambdaData, PadicHodgeComplex};
use crate::rat::{rat_i64, Rat};
use crate::spectral::{infinity_page, trivial_filtration};
use crate::syntomic::{les_check, les_check_impl, leray, smooth_split, syn_cohomology};
use crate::tower::Tower;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub struct SuiteResult {
    pub name: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &str) -> Self {
        SuiteResult { name: name.into(), checks: 0, failures: Vec::new() }
    }
    fn check(&mut self, ok: bool, what: impl Fn() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn towers() -> Vec<Arc<Tower>> {
    vec![tq(5), quad_tower(5), ramified_tower(3)]
}

/// Random bounded complex of Q-vector spaces with honest `d∘d = 0`.
fn random_q_complex(rng: &mut ChaCha8Rng) -> Complex<Rationals> {
    let q = Rationals;
    let a = rng.gen_range(1..=3usize);
    let b = rng.gen_range(1..=3usize);
    let c = rng.gen_range(0..=2usize);
    let d0 = Mat::from_fn(b, a, |_, _| rat_i64(rng.gen_range(-2..=2)));
    // second differential: anything annihilating the image of d0
    let ann = crate::module::ann_rows(&q, &col_space(&q, &d0), b);
    let mix = Mat::from_fn(c, ann.rows, |_, _| rat_i64(rng.gen_range(-1..=1)));
    let d1 = mat_mul(&q, &mix, &ann);
    Complex::new(q, rng.gen_range(-1..=1), vec![a, b, c], vec![d0, d1])
}

pub fn tower_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = SuiteResult::new("tower");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for t in towers() {
        for _ in 0..trials {
            let rand_elem = |rng: &mut ChaCha8Rng| -> Vec<Rat> {
                let denoms = [1i64, 2, 5];
                (0..t.k_dim())
                    .map(|_| {
                        Rat::new(
                            num_bigint::BigInt::from(rng.gen_range(-9i64..=9)),
                            num_bigint::BigInt::from(denoms[rng.gen_range(0..denoms.len())]),
                        )
                    })
                    .collect()
            };
            let a = rand_elem(&mut rng);
            let b = rand_elem(&mut rng);
            let va = t.k_vp(&a);
            let vb = t.k_vp(&b);
            let vab = t.k_vp(&t.k_mul(&a, &b));
            if let (crate::tower::Valuation::Finite(x), crate::tower::Valuation::Finite(y)) =
                (&va, &vb)
            {
                out.check(
                    vab == crate::tower::Valuation::Finite(x + y),
                    || "v(ab) = v(a) + v(b)".into(),
                );
            }
            let vsum = t.k_vp(&t.k_add(&a, &b));
            let min = if va <= vb { va.clone() } else { vb.clone() };
            out.check(vsum >= min, || "ultrametric inequality".into());
            if !t.k_is_zero(&a) {
                let inv = t.k_inv(&a).unwrap();
                out.check(t.k_mul(&a, &inv) == t.k_one(), || "inv(a)·a = 1".into());
            }
            // sigma preserves valuation and multiplies
            let a0: Vec<Rat> = a[..t.k0_dim()].to_vec();
            let b0: Vec<Rat> = b[..t.k0_dim()].to_vec();
            out.check(
                t.k0_vp(&t.k0_sigma(&a0)) == t.k0_vp(&a0),
                || "sigma preserves v_p".into(),
            );
            out.check(
                t.k0_sigma(&t.k0_mul(&a0, &b0)) == t.k0_mul(&t.k0_sigma(&a0), &t.k0_sigma(&b0)),
                || "sigma multiplicative".into(),
            );
        }
    }
    out
}

pub fn linear_suite(seed: u64, trials: usize) -> SuiteResult {
    let q = Rationals;
    let mut out = SuiteResult::new("linear");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    for _ in 0..trials {
        let c = random_q_complex(&mut rng);
        out.check(c.validate().is_ok(), || "random complex validates".into());
        // Euler characteristic via cohomology
        let chi_h: i64 = c
            .degrees()
            .map(|n| {
                let s = if n.rem_euclid(2) == 0 { 1 } else { -1 };
                s * c.cohomology(n).dim as i64
            })
            .sum();
        out.check(chi_h == c.euler_char(), || "Euler characteristic".into());
        // shift bookkeeping
        let k = rng.gen_range(-2..=2i64);
        for n in c.lo - 3..c.hi() + 3 {
            out.check(
                c.shift(k).cohomology(n).dim == c.cohomology(n + k).dim,
                || "H(C[k]) = H(C) shifted".into(),
            );
        }
        // cone long exact sequence at the target node
        let d = random_q_complex(&mut rng);
        // build a chain map by composing with zero (the only generic one) and
        // a scalar self-map of c
        let lambda = rat_i64(rng.gen_range(-2..=2));
        let self_map = ChainMap::new(
            c.clone(),
            c.clone(),
            c.degrees().map(|n| scalar_mat(&q, c.dim(n), &lambda)).collect(),
        );
        let cd = cone(&self_map).unwrap();
        for n in c.lo - 1..=c.hi() + 1 {
            let hf = self_map.induced_on_cohomology(n);
            let hincl = cd.incl.induced_on_cohomology(n);
            out.check(
                rank(&q, &hincl) == c.cohomology(n).dim - rank(&q, &hf),
                || "cone LES exactness at H(B)".into(),
            );
        }
        let _ = d;
        // trivial filtration: E_1 = cohomology, later pages constant
        let fc = trivial_filtration(&c);
        let pages = crate::spectral::spectral_sequence(&fc, 3);
        for (n, h) in c.cohomology_dims() {
            out.check(pages[0].dim(0, n) == h, || "E_1 of trivial filtration".into());
        }
        out.check(
            pages.iter().all(|p| p.is_zero_map_page() && p.entries == pages[0].entries),
            || "trivial filtration is constant from page 1".into(),
        );
        let (_, conv) = infinity_page(&fc);
        out.check(conv, || "spectral sequence converges".into());
    }
    out
}

pub fn module_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = SuiteResult::new("module");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
    for t in towers() {
        for _ in 0..trials.min(12) {
            let m = random_admissible_module(&t, &mut rng);
            out.check(m.validate().is_ok(), || "random module validates".into());
            out.check(m.hodge_number() == m.newton_number(), || "t_H = t_N".into());
            // basis independence of t_N
            let p = random_basis_change(&t, &mut rng, m.dim);
            let conj = m.conjugate(&p).unwrap();
            out.check(conj.newton_number() == m.newton_number(), || "t_N conjugation".into());
            out.check(conj.hodge_number() == m.hodge_number(), || "t_H conjugation".into());
            // tensor Leibniz, dual negation, direct-sum additivity
            let l = random_admissible_module(&t, &mut rng);
            if l.dim * m.dim <= 6 {
                let lm = l.tensor(&m).unwrap();
                out.check(lm.validate().is_ok(), || "tensor validates".into());
                out.check(
                    lm.newton_number()
                        == rat_i64(l.dim as i64) * m.newton_number()
                            + rat_i64(m.dim as i64) * l.newton_number(),
                    || "t_N Leibniz under tensor".into(),
                );
                let hom = FilteredPhiNModule::internal_hom(&l, &m).unwrap();
                out.check(hom.validate().is_ok(), || "internal hom validates".into());
            }
            let sum = l.direct_sum(&m).unwrap();
            out.check(
                sum.newton_number() == l.newton_number() + m.newton_number()
                    && sum.hodge_number() == l.hodge_number() + m.hodge_number(),
                || "t additivity in direct sums".into(),
            );
            let dual = m.dual().unwrap();
            out.check(
                dual.newton_number() == -m.newton_number()
                    && dual.hodge_number() == -m.hodge_number(),
                || "dual negates invariants".into(),
            );
            let dd = dual.dual().unwrap();
            out.check(
                dd.newton_number() == m.newton_number() && dd.dim == m.dim,
                || "double dual preserves invariants".into(),
            );
        }
    }
    out
}

/// Independent brute-force count of chain maps `L -> M[n]` modulo homotopy,
/// assembled directly from the morphism equations over Q. Kept deliberately
/// separate from the Gamma implementation it cross-checks.
pub fn chain_maps_mod_homotopy(l: &MfComplex, m: &MfComplex, n: i64) -> usize {
    let q = Rationals;
    let t = &l.tower;
    let rst = Restrictor { tower: t.clone() };
    let f = t.f;
    let lu = l.underlying();
    let mu = m.underlying();
    let lk = l.extend_k();
    let mk = m.extend_k();
    let kf = KField(t.clone());

    // Degreewise-morphism space at Hom degree `deg`: Q-solution basis.
    let morphism_space = |deg: i64| -> (Mat<Rat>, usize) {
        let layout = hom_layout(&lu, &mu, deg);
        let total_q = layout.total * f;
        let mut rows: Vec<Mat<Rat>> = Vec::new();
        for (bi, &(j, mr, lc)) in layout.blocks.iter().enumerate() {
            let off = layout.offsets[bi] * f;
            let width = mr * lc * f;
            let embed = |constraint: Mat<Rat>| -> Mat<Rat> {
                let mut big = zero_mat(&q, constraint.rows, total_q);
                add_block(&q, &mut big, 0, off, &constraint);
                big
            };
            // phi: F A_L = A_M sigma(F)
            let k0 = K0Field(t.clone());
            let lhs = rst.k0_linear(&crate::module::kron(
                &k0,
                &l.phi_at(j).transpose(),
                &identity(&k0, mr),
            ));
            let rhs_lin = rst.k0_linear(&crate::module::kron(
                &k0,
                &identity(&k0, lc),
                &m.phi_at(deg + j),
            ));
            let s = Mat::from_fn(f, f, |r, c| t.sigma_mat[r * f + c].clone());
            let mut sig = zero_mat(&q, mr * lc * f, mr * lc * f);
            for b in 0..mr * lc {
                add_block(&q, &mut sig, b * f, b * f, &s);
            }
            let rhs = mat_mul(&q, &rhs_lin, &sig);
            rows.push(embed(mat_sub(&q, &lhs, &rhs)));
            // N: F N_L = N_M F
            let lhs_n = rst.k0_linear(&crate::module::kron(
                &k0,
                &l.nmat_at(j).transpose(),
                &identity(&k0, mr),
            ));
            let rhs_n = rst.k0_linear(&crate::module::kron(
                &k0,
                &identity(&k0, lc),
                &m.nmat_at(deg + j),
            ));
            rows.push(embed(mat_sub(&q, &lhs_n, &rhs_n)));
            // filtration: for each jump (s, B) of L^j: ann(F^s M) (F_K u) = 0
            let lmod = l.module(j);
            let mmod = m.module(deg + j);
            let incl = rst.incl_k(mr * lc);
            for (sj, bmat) in &lmod.filt.jumps {
                let target = mmod.filt.step(&kf, mmod.dim, *sj);
                let ann = crate::module::ann_rows(&kf, &target, mmod.dim);
                if ann.rows == 0 {
                    continue;
                }
                for cix in 0..bmat.cols {
                    let u = Mat::from_fn(1, lc, |_, cc| bmat.at(cc, cix).clone());
                    let con_k = crate::module::kron(&kf, &u, &ann);
                    rows.push(embed(mat_mul(&q, &rst.k_linear(&con_k), &incl)));
                }
            }
            let _ = width;
        }
        let total_rows: usize = rows.iter().map(|r| r.rows).sum();
        let mut stacked = zero_mat(&q, total_rows, total_q);
        let mut off = 0;
        for r in &rows {
            add_block(&q, &mut stacked, off, 0, r);
            off += r.rows;
        }
        (kernel(&q, &stacked), total_q)
    };

    // chain condition for f: L -> M[n]: f_{j+1} d_L = (-1)^n d_M f_j, i.e.
    // the Hom-complex differential of f vanishes.
    let hom_q = Restrictor { tower: t.clone() }.complex_k0(&hom_vec_complex(
        &K0Field(t.clone()),
        &lu,
        &mu,
    ));
    let (morph_n, _) = morphism_space(n);
    let d_n = hom_q.d(n);
    // chain maps: morphisms killed by the Hom differential
    let chain_constraint = mat_mul(&q, &d_n, &morph_n);
    let inner = kernel(&q, &chain_constraint);
    let chain_maps = col_space(&q, &mat_mul(&q, &morph_n, &inner));
    // homotopies: degreewise morphisms one degree down, mapped by d_Hom
    let (morph_h, _) = morphism_space(n - 1);
    let boundaries = col_space(&q, &mat_mul(&q, &hom_q.d(n - 1), &morph_h));
    let _ = (mk, lk);
    // boundaries of morphisms are chain maps, so the quotient dimension is
    // the difference (taking the intersection keeps this honest numerically)
    let inter = span_intersect(&q, &chain_maps, &boundaries);
    chain_maps.cols - inter.cols
}

pub fn gamma_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = SuiteResult::new("gamma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3));
    let t = tq(5);
    for _ in 0..trials {
        let l = random_mf_complex(&t, &mut rng);
        let m = random_mf_complex(&t, &mut rng);
        let gd = match GammaData::new(&l, &m) {
            Ok(g) => g,
            Err(e) => {
                out.check(false, || format!("gamma assembly: {e}"));
                continue;
            }
        };
        let ext = ext_groups(&gd);
        // Euler characteristic identity
        let chi_ext: i64 = (gd.gamma_m2.lo..=gd.gamma_m2.hi())
            .map(|n| if n.rem_euclid(2) == 0 { ext.dim(n) as i64 } else { -(ext.dim(n) as i64) })
            .sum();
        let chi_abc: i64 = (gd.a.lo..=gd.a.hi())
            .map(|n| {
                let s = if n.rem_euclid(2) == 0 { 1 } else { -1 };
                s * (gd.a.dim(n) as i64 - gd.b.dim(n) as i64 + gd.c.dim(n) as i64)
            })
            .sum();
        out.check(chi_ext == chi_abc, || "Euler characteristic of Ext".into());
        // vanishing bounds
        let lo_bound = gd.hom.lo;
        let hi_bound = gd.hom.hi() + 2;
        for nn in lo_bound - 2..=hi_bound + 2 {
            if nn < lo_bound || nn > hi_bound {
                out.check(ext.dim(nn) == 0, || "Ext vanishing range".into());
            }
        }
        // shift compatibility for a random k
        let k = rng.gen_range(-1..=1i64);
        if k != 0 {
            if let Ok(gd_k) = GammaData::new(&l, &m.shift(k)) {
                let ext_k = ext_groups(&gd_k);
                for nn in lo_bound - 1..=hi_bound + 1 {
                    out.check(
                        ext_k.dim(nn) == ext.dim(nn + k),
                        || "Ext^n(L, M[k]) = Ext^{n+k}(L, M)".into(),
                    );
                }
            }
        }
        // identity class: for a nonzero single module in degree 0 (an acyclic
        // complex has Hom_{D^b}(L, L) = 0, so the bound is module-only)
        if l.modules.len() == 1 && l.dim(l.lo) > 0 {
            let gd_ll = GammaData::new(&l, &l).unwrap();
            out.check(ext_groups(&gd_ll).dim(0) >= 1, || "Ext^0(L,L) sees the identity".into());
        }
        // Gamma(L, -) exactness on a split short exact sequence
        let m2 = random_mf_complex(&t, &mut rng);
        if let (Ok(sum), Ok(gd1), Ok(gd2)) = (
            m.direct_sum(&m2),
            GammaData::new(&l, &m),
            GammaData::new(&l, &m2),
        ) {
            if let Ok(gds) = GammaData::new(&l, &sum) {
                for nn in gds.gamma_m2.lo..=gds.gamma_m2.hi() {
                    out.check(
                        gds.gamma_m2.dim(nn) == gd1.gamma_m2.dim(nn) + gd2.gamma_m2.dim(nn),
                        || "Gamma terms additive on split exact sequences".into(),
                    );
                    out.check(
                        gds.gamma_m2.cohomology(nn).dim
                            == gd1.gamma_m2.cohomology(nn).dim + gd2.gamma_m2.cohomology(nn).dim,
                        || "long exact sequence of a split pair".into(),
                    );
                }
            }
        }
        // homotopy Homs against the brute-force enumeration
        for nn in [0i64, 1] {
            let brute = chain_maps_mod_homotopy(&l, &m, nn);
            out.check(
                homotopy_hom(&gd, nn) == brute,
                || format!("H^{nn}(Ker phi) = brute-force chain maps mod homotopy"),
            );
        }
    }
    out
}

pub fn witness_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = SuiteResult::new("witness");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4));
    let t = tq(5);
    for _ in 0..trials {
        let l = random_mf_complex(&t, &mut rng);
        let m = random_mf_complex(&t, &mut rng);
        let gd = match GammaData::new(&l, &m) {
            Ok(g) => g,
            Err(e) => {
                out.check(false, || format!("gamma assembly: {e}"));
                continue;
            }
        };
        let (x, y, z) = random_tilde_cocycle(&gd, &mut rng);
        match tilde_witness(&gd, &x, &y, &z) {
            Ok(w) => {
                out.check(w.all_hold(), || format!("tilde witness identities: {:?}", w.identities));
                // t_N/t_H additivity along 0 -> M -> M' -> L' -> 0: the
                // quotient is built from twists of L, so the totals are pinned.
                for i in w.m_prime.lo..=w.m_prime.hi() {
                    let tn_expected = m.module(i).newton_number()
                        + rat_i64(2) * l.module(i + 1).newton_number()
                        + rat_i64(3) * l.module(i).newton_number()
                        + l.module(i - 1).newton_number()
                        - rat_i64((l.dim(i + 1) + l.dim(i)) as i64);
                    out.check(
                        w.m_prime.module(i).newton_number() == tn_expected,
                        || "t_N additive along the witness exact sequences".into(),
                    );
                    let th_expected = m.module(i).hodge_number()
                        + rat_i64(2) * l.module(i + 1).hodge_number()
                        + rat_i64(3) * l.module(i).hodge_number()
                        + l.module(i - 1).hodge_number()
                        - rat_i64((l.dim(i + 1) + l.dim(i)) as i64);
                    out.check(
                        w.m_prime.module(i).hodge_number() == th_expected,
                        || "t_H additive along the witness exact sequences".into(),
                    );
                }
            }
            Err(e) => out.check(false, || format!("tilde witness failed: {e}")),
        }
        let xh = random_hom0(&l, &m, &mut rng);
        match hat_witness(&l, &m, &xh) {
            Ok(w) => {
                out.check(w.all_hold(), || format!("hat witness identities: {:?}", w.identities));
                let r = 2 * w.r0 as i64;
                for i in w.m_prime.lo..=w.m_prime.hi() {
                    // telescope: pair j is (M^i(-j) ⊕ M^{i-1}(-j))
                    let tri = rat_i64(r * (r + 1) / 2);
                    let tn_expected = rat_i64(r + 1) * m.module(i).newton_number()
                        + rat_i64(r) * m.module(i - 1).newton_number()
                        + tri.clone() * rat_i64((m.dim(i) + m.dim(i - 1)) as i64);
                    out.check(
                        w.m_prime.module(i).newton_number() == tn_expected,
                        || "t_N additive along the telescope".into(),
                    );
                    let th_expected = rat_i64(r + 1) * m.module(i).hodge_number()
                        + rat_i64(r) * m.module(i - 1).hodge_number()
                        + tri * rat_i64((m.dim(i) + m.dim(i - 1)) as i64);
                    out.check(
                        w.m_prime.module(i).hodge_number() == th_expected,
                        || "t_H additive along the telescope".into(),
                    );
                }
            }
            Err(e) => out.check(false, || format!("hat witness failed: {e}")),
        }
        // pHC analogues with L = Theta(unit)
        let tl = PadicHodgeComplex::theta(&MfComplex::unit(&t));
        let tm = PadicHodgeComplex::theta(&m);
        let ld = match LambdaData::new(&tl, &tm) {
            Ok(ld) => ld,
            Err(e) => {
                out.check(false, || format!("lambda assembly: {e}"));
                continue;
            }
        };
        let (xp, yp, zp, wp) = random_lambda_tilde_cocycle(&ld, &mut rng);
        match crate::phodge::tilde_witness_phc(&ld, &xp, &yp, &zp, &wp) {
            Ok(w) => out.check(w.all_hold(), || format!("pHC tilde witness: {:?}", w.identities)),
            Err(e) => out.check(false, || format!("pHC tilde witness failed: {e}")),
        }
        let unit_cx = MfComplex::unit(&t);
        let xr = random_hom0(&unit_cx, &m, &mut rng);
        match crate::phodge::hat_witness_phc(&tl, &tm, &xr) {
            Ok((w, _)) => out.check(w.all_hold(), || format!("pHC hat witness: {:?}", w.identities)),
            Err(e) => out.check(false, || format!("pHC hat witness failed: {e}")),
        }
    }
    out
}

/// A random cocycle of `Coker Phi'` on the Lambda side, represented by
/// `(x, y, z, w) ∈ Ker^0 Psi` with `d(x,y,z,w) ∈ im Phi'`.
pub fn random_lambda_tilde_cocycle(
    ld: &LambdaData,
    rng: &mut ChaCha8Rng,
) -> (
    HomElem<crate::module::K0Elem>,
    HomElem<crate::module::K0Elem>,
    HomElem<crate::module::KElem>,
    HomElem<crate::module::KElem>,
) {
    let q = Rationals;
    let ker0 = kernel(&q, &ld.psi_map.mat(0));
    let db = ld.b.d(0);
    let dk = mat_mul(&q, &db, &ker0);
    let im_phi = col_space(&q, &ld.phi_map.mat(1));
    let pre = preimage(&q, &dk, &im_phi);
    let mut v = vec![q.zero(); ld.b.dim(0)];
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
    // split the B coordinates into (x, y, z, w)
    let t = ld.l.tower.clone();
    let rst = &ld.restrictor;
    let k0 = K0Field(t.clone());
    let kf = KField(t.clone());
    let rr0 = ld.rr.dim(0);
    let rk0 = ld.rk.dim(0);
    let x = hom_from_coords(&k0, &ld.l.rig, &ld.m.rig, 0, &rst.un_k0_vec(&v[0..rr0]));
    let y = hom_from_coords(&k0, &ld.l.rig, &ld.m.rig, 0, &rst.un_k0_vec(&v[rr0..2 * rr0]));
    let z = hom_from_coords(
        &kf,
        &ld.l.rig_k(),
        &ld.m.k_spec,
        0,
        &rst.un_k_vec(&v[2 * rr0..2 * rr0 + rk0]),
    );
    let w = hom_from_coords(
        &kf,
        &ld.l.dr,
        &ld.m.k_spec,
        0,
        &rst.un_k_vec(&v[2 * rr0 + rk0..]),
    );
    (x, y, z, w)
}

pub fn comparison_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = SuiteResult::new("comparison");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5));
    let t = tq(5);
    for i in 0..trials {
        // alternate single admissible modules and 2-term complexes
        let l = if i % 2 == 0 {
            MfComplex::concentrated(random_admissible_module(&t, &mut rng), 0)
        } else {
            MfComplex::unit(&t)
        };
        let m = if i % 3 == 0 {
            MfComplex::concentrated(random_admissible_module(&t, &mut rng), 0)
        } else {
            random_mf_complex(&t, &mut rng)
        };
        match gamma_to_lambda(&l, &m) {
            Ok(cmp) => {
                out.check(cmp.is_quasi_iso(), || {
                    format!("gamma_to_lambda quasi-iso: {:?}", cmp.cohomology_report)
                });
                // degreewise injectivity of the comparison chain map
                for n in cmp.iota.source.lo..=cmp.iota.source.hi() {
                    let mat = cmp.iota.mat(n);
                    out.check(
                        rank(&Rationals, &mat) == mat.cols,
                        || format!("iota injective in degree {n}"),
                    );
                }
                let eg = ext_groups(&cmp.gamma);
                match ext_phc(&cmp.lambda) {
                    Ok(el) => {
                        for d in cmp.gamma.gamma_m2.lo - 1..=cmp.gamma.gamma_m2.hi() + 1 {
                            out.check(eg.dim(d) == el.dim(d), || {
                                format!("ext dims agree at degree {d}")
                            });
                        }
                    }
                    Err(e) => out.check(false, || format!("ext_phc: {e}")),
                }
            }
            Err(e) => out.check(false, || format!("comparison failed: {e}")),
        }
        // Theta images are strict and satisfy the (HK) surrogate
        let th = PadicHodgeComplex::theta(&m);
        out.check(th.strictness_check(), || "Theta image strict".into());
        out.check(th.is_hk(), || "Theta image satisfies (HK) surrogate".into());
        // Remark-level quasi-isomorphism Lambda(K0, M) -> Lambda_0(M): dims agree
        let tl = PadicHodgeComplex::theta(&MfComplex::unit(&t));
        if let (Ok(ld), Ok(l0)) = (LambdaData::new(&tl, &th), crate::syntomic::lambda0(&th, 0)) {
            for n in ld.lambda_m2.lo..=ld.lambda_m2.hi() {
                out.check(
                    ld.lambda_m2.cohomology(n).dim == l0.total.cohomology(n).dim,
                    || format!("Lambda(K0,M) vs Lambda_0(M) at degree {n}"),
                );
            }
        } else {
            out.check(false, || "lambda/lambda0 assembly failed".into());
        }
    }
    out
}

pub fn syntomic_suite(seed: u64, trials: usize) -> SuiteResult {
    let mut out = SuiteResult::new("syntomic");
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(6));
    let t = tq(5);
    for _ in 0..trials {
        let m = random_mf_complex(&t, &mut rng);
        let n = rng.gen_range(-1..=1i64);
        let th = PadicHodgeComplex::theta(&m);
        // syn = ext consistency (two code paths)
        match (syn_cohomology(&th, n), GammaData::new(&MfComplex::unit(&t), &m.twist(n))) {
            (Ok(syn), Ok(gd)) => {
                let ext = ext_groups(&gd);
                for d in syn.lo..=syn.hi {
                    out.check(
                        syn.h_syn.get(&d).copied().unwrap_or(0) == ext.dim(d),
                        || format!("syn vs ext at degree {d}"),
                    );
                }
            }
            _ => out.check(false, || "syn/ext assembly failed".into()),
        }
        // LES exactness on Theta images and on hand-built non-Theta pHCs
        match les_check(&th, n) {
            Ok(rep) => out.check(rep.all_exact(), || "les exact on Theta image".into()),
            Err(e) => out.check(false, || format!("les: {e}")),
        }
        let mixed = mixed_phc(&m, &random_mf_complex(&t, &mut rng));
        match les_check(&mixed, n) {
            Ok(rep) => out.check(rep.all_exact(), || "les exact on mixed pHC".into()),
            Err(e) => out.check(false, || format!("les mixed: {e}")),
        }
        // Leray on a strict HK input
        let hk = random_hk_phc(&t, &mut rng);
        match leray(&hk, n) {
            Ok(rep) => out.check(rep.all_ok(), || {
                format!(
                    "leray: e2={} degen={} conv={}",
                    rep.e2_matches, rep.degenerates_at_r3, rep.converges
                )
            }),
            Err(e) => out.check(false, || format!("leray: {e}")),
        }
        // smooth split on N = 0 inputs
        let k0 = K0Field(t.clone());
        let n_zero = (m.lo..=m.hi()).all(|i| is_zero_mat(&k0, &m.nmat_at(i)));
        if n_zero {
            match smooth_split(&th, n) {
                Ok(rep) => out.check(rep.all_ok(), || "smooth splitting verified".into()),
                Err(e) => out.check(false, || format!("split: {e}")),
            }
        }
        // admissibility RANDOM mode finds no violation on admissible inputs
        for md in &m.modules {
            if md.dim > 0 {
                match admissibility(md, AdmissibilityMode::Random { seed: rng.gen(), trials: 5 }) {
                    Ok(AdmissibilityVerdict::NoViolationFound { .. })
                    | Ok(AdmissibilityVerdict::Admissible { .. }) => out.check(true, String::new),
                    other => out.check(false, || format!("admissibility: {other:?}")),
                }
            }
        }
    }
    out
}

/// The documented negative test: flipping the cone sign convention must make
/// the Gamma/Lambda comparison (suite 2) and the LES machinery (suite 5) fail.
pub struct TripwireReport {
    pub gamma_side_failed: bool,
    pub les_side_failed: bool,
    pub standard_passes: bool,
}

impl TripwireReport {
    pub fn tripped(&self) -> bool {
        self.gamma_side_failed && self.les_side_failed && self.standard_passes
    }
}

pub fn mutation_tripwire(seed: u64) -> TripwireReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = tq(5);
    let l = MfComplex::unit(&t);
    // The sign convention only matters across a nonzero differential, so the
    // target is a two-term complex with d = id, summed with a random one.
    let k0 = K0Field(t.clone());
    let unit = FilteredPhiNModule::unit(&t);
    let fixture = MfComplex {
        tower: t.clone(),
        lo: 0,
        modules: vec![unit.clone(), unit],
        diffs: vec![identity(&k0, 1)],
    };
    let m = fixture.direct_sum(&random_mf_complex(&t, &mut rng)).expect("same tower");
    let th = PadicHodgeComplex::theta(&m);

    let standard_gamma = GammaData::new(&l, &m).is_ok();
    let standard_les = les_check(&th, 1).map(|r| r.all_exact()).unwrap_or(false);

    let flipped_gamma_failed = GammaData::build(&l, &m, false).is_err();
    let flipped_les_failed = match les_check_impl(&th, 1, false) {
        Err(_) => true,
        Ok(rep) => !rep.all_exact(),
    };
    TripwireReport {
        gamma_side_failed: flipped_gamma_failed,
        les_side_failed: flipped_les_failed,
        standard_passes: standard_gamma && standard_les,
    }
}

pub fn run_all(seed: u64, trials: usize) -> Vec<SuiteResult> {
    let mut results = vec![
        tower_suite(seed, trials),
        linear_suite(seed, trials),
        module_suite(seed, trials),
        gamma_suite(seed, trials.min(10)),
        witness_suite(seed, trials.min(8)),
        comparison_suite(seed, trials.min(10)),
        syntomic_suite(seed, trials.min(8)),
    ];
    let mut tw = SuiteResult::new("mutation-tripwire");
    if trials > 0 {
        let trip = mutation_tripwire(seed);
        tw.check(trip.tripped(), || {
            format!(
                "gamma_failed={} les_failed={} standard={}",
                trip.gamma_side_failed, trip.les_side_failed, trip.standard_passes
            )
        });
    }
    results.push(tw);
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brute_force_homotopy_agrees_on_unit() {
        let t = tq(5);
        let l = MfComplex::unit(&t);
        let gd = GammaData::new(&l, &l).unwrap();
        assert_eq!(chain_maps_mod_homotopy(&l, &l, 0), 1);
        assert_eq!(homotopy_hom(&gd, 0), 1);
        assert_eq!(chain_maps_mod_homotopy(&l, &l, 1), 0);
    }

    #[test]
    fn tripwire_trips() {
        let rep = mutation_tripwire(42);
        assert!(rep.tripped(), "gamma={} les={} std={}",
            rep.gamma_side_failed, rep.les_side_failed, rep.standard_passes);
    }

    #[test]
    fn all_suites_pass_smoke() {
        for r in run_all(0, 3) {
            assert!(r.passed(), "suite {} failed: {:?}", r.name, r.failures);
        }
    }

    #[test]
    fn zero_trials_is_vacuous_pass() {
        for r in run_all(1, 0) {
            assert!(r.passed());
        }
    }
}
