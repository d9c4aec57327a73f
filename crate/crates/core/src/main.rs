//! `synkernel`: file-driven CLI over the exact p-adic Hodge kernel.
//!
//! One JSON document describes one workspace (a coefficient tower plus named
//! objects); every verb reads the workspace, computes, and prints a JSON
//! report on stdout. Exit code 0 means every check in the report passed,
//! 1 means some check failed, 2 is a usage or input error.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use synkernel::builtin;
use synkernel::doc::{builtin_example_doc, builtin_workspace, parse_workspace, Workspace};
use synkernel::field::K0Field;
use synkernel::mat::Mat;
use synkernel::mfcx::{ext_groups, GammaData, MfComplex};
use synkernel::module::{admissibility, AdmissibilityMode, AdmissibilityVerdict};
use synkernel::phodge::{LambdaData, PadicHodgeComplex};
use synkernel::rat::{format_rat, parse_rat};
use synkernel::selftest;
use synkernel::syntomic;

#[derive(Parser)]
#[command(name = "synkernel", version, about = "exact syntomic-cohomology kernel")]
struct Cli {
    /// Workspace document (defaults to the built-in example workspace).
    #[arg(long, global = true)]
    file: Option<String>,
    /// Prime for the default workspace when no file is given.
    #[arg(long, global = true, default_value_t = 5)]
    prime: i64,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Eigen,
    Oracle,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKind {
    Tilde,
    Hat,
    TildePhc,
    HatPhc,
}

#[derive(Subcommand)]
enum Verb {
    /// Validate named objects (or the whole workspace).
    Validate { names: Vec<String> },
    /// Newton/Hodge numbers and admissibility of a module.
    Invariants {
        name: String,
        #[arg(long, value_enum, default_value = "random")]
        mode: Mode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        trials: usize,
        /// JSON array of subspaces for oracle mode (each an array of basis
        /// vectors over K0).
        #[arg(long)]
        oracle: Option<String>,
    },
    /// Ext groups between two complexes (modules sit in degree 0).
    Ext {
        l: String,
        m: String,
        #[arg(long, default_value_t = 0)]
        twist: i64,
        /// Restrict the report to a single degree.
        #[arg(long)]
        degree: Option<i64>,
    },
    /// Syntomic cohomology of a p-adic Hodge complex.
    Syn {
        name: String,
        #[arg(long, default_value_t = 0)]
        twist: i64,
        /// Restrict the report to a single degree.
        #[arg(long)]
        degree: Option<i64>,
    },
    /// Long-exact-sequence exactness report.
    Les {
        name: String,
        #[arg(long, default_value_t = 0)]
        twist: i64,
    },
    /// Leray spectral sequence with E_2 comparison and convergence.
    Leray {
        name: String,
        #[arg(long, default_value_t = 0)]
        twist: i64,
    },
    /// Smooth-case splitting (requires N = 0 on the rigid side).
    Split {
        name: String,
        #[arg(long, default_value_t = 0)]
        twist: i64,
    },
    /// Totalize a named double complex; reports the total and its cohomology.
    Simplicial { name: String },
    /// Run a witness construction on seeded random data.
    Witness {
        kind: WitnessKind,
        l: String,
        m: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Emit a built-in example document (or list the available names).
    Examples {
        name: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run every property suite with the given seed; deterministic.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 25)]
        trials: usize,
    },
}

fn load_workspace(cli: &Cli) -> Result<Workspace, String> {
    match &cli.file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
            parse_workspace(&text).map_err(|e| e.to_string())
        }
        None => Ok(builtin_workspace(cli.prime)),
    }
}

fn dims_json(lo: i64, dims: &[usize]) -> Value {
    json!({"lo": lo, "dims": dims})
}

fn get_complex(ws: &Workspace, name: &str) -> Result<MfComplex, String> {
    ws.complex(name).ok_or(format!("unknown complex or module {name:?}"))
}

fn get_phc(ws: &Workspace, name: &str) -> Result<PadicHodgeComplex, String> {
    ws.phodge_of(name).ok_or(format!("unknown object {name:?}"))
}

fn run(cli: &Cli) -> Result<(Value, bool), String> {
    let ws = load_workspace(cli)?;
    match &cli.verb {
        Verb::Validate { names } => {
            let mut items = Vec::new();
            let mut pass = true;
            let mut check = |name: &str, res: Result<(), String>| {
                let ok = res.is_ok();
                pass &= ok;
                items.push(json!({
                    "name": name,
                    "pass": ok,
                    "error": res.err(),
                }));
            };
            let wanted = |n: &str| names.is_empty() || names.iter().any(|x| x == n);
            for (name, m) in &ws.modules {
                if wanted(name) {
                    check(name, m.validate().map_err(|e| e.to_string()));
                }
            }
            for (name, c) in &ws.complexes {
                if wanted(name) {
                    check(name, c.validate().map_err(|e| e.to_string()));
                }
            }
            for (name, p) in &ws.phodge {
                if wanted(name) {
                    check(name, p.validate().map_err(|e| e.to_string()));
                }
            }
            for (name, d) in &ws.doubles {
                if wanted(name) {
                    check(name, d.validate().map_err(|e| e.to_string()));
                }
            }
            for (name, f) in &ws.chain_maps {
                if wanted(name) {
                    check(name, f.validate().map_err(|e| e.to_string()));
                }
            }
            if items.is_empty() {
                return Err("no matching objects".into());
            }
            Ok((json!({"verb": "validate", "objects": items, "pass": pass}), pass))
        }
        Verb::Invariants { name, mode, seed, trials, oracle } => {
            let m = ws
                .modules
                .get(name)
                .ok_or(format!("unknown module {name:?}"))?;
            let mode = match mode {
                Mode::Eigen => AdmissibilityMode::Eigen,
                Mode::Random => AdmissibilityMode::Random { seed: *seed, trials: *trials },
                Mode::Oracle => {
                    let text = oracle
                        .as_ref()
                        .ok_or("oracle mode needs --oracle with a JSON subspace list")?;
                    let v: Value =
                        serde_json::from_str(text).map_err(|e| format!("--oracle: {e}"))?;
                    let arr = v.as_array().ok_or("--oracle: expected array")?;
                    let k0 = K0Field(m.tower.clone());
                    let mut subs = Vec::new();
                    for sub in arr {
                        let vecs = sub.as_array().ok_or("--oracle: expected array of vectors")?;
                        let mut cols = Vec::new();
                        for vv in vecs {
                            let coords = vv.as_array().ok_or("--oracle: expected vector")?;
                            let mut col = Vec::new();
                            for c in coords {
                                let s = c.as_str().ok_or("--oracle: entries are strings")?;
                                let r = parse_rat(s).map_err(|e| format!("--oracle: {e}"))?;
                                col.push(m.tower.k0_from_rat(r));
                            }
                            cols.push(col);
                        }
                        let mat = if cols.is_empty() {
                            synkernel::mat::zero_mat(&k0, m.dim, 0)
                        } else {
                            Mat::from_fn(m.dim, cols.len(), |r, c| cols[c][r].clone())
                        };
                        subs.push(mat);
                    }
                    AdmissibilityMode::Oracle(subs)
                }
            };
            let verdict = admissibility(m, mode).map_err(|e| e.to_string())?;
            let (kind, detail, pass) = match &verdict {
                AdmissibilityVerdict::Admissible { subspaces_checked } => (
                    "admissible",
                    json!({"subspaces_checked": subspaces_checked}),
                    true,
                ),
                AdmissibilityVerdict::NoViolationFound { trials } => (
                    "no-violation-found",
                    json!({"trials": trials, "note": "not a proof"}),
                    true,
                ),
                AdmissibilityVerdict::NotAdmissible { t_h, t_n, .. } => (
                    "not-admissible",
                    json!({"t_h": format_rat(t_h), "t_n": format_rat(t_n)}),
                    false,
                ),
            };
            Ok((
                json!({
                    "verb": "invariants",
                    "module": name,
                    "newton_number": format_rat(&m.newton_number()),
                    "hodge_number": format_rat(&m.hodge_number()),
                    "admissibility": {"verdict": kind, "detail": detail},
                    "pass": pass,
                }),
                pass,
            ))
        }
        Verb::Ext { l, m, twist, degree } => {
            let lc = get_complex(&ws, l)?;
            let mc = get_complex(&ws, m)?.twist(*twist);
            let gd = GammaData::new(&lc, &mc).map_err(|e| e.to_string())?;
            let ext = ext_groups(&gd);
            if let Some(d) = degree {
                return Ok((
                    json!({
                        "verb": "ext",
                        "l": l, "m": m, "twist": twist, "degree": d,
                        "dim": ext.dim(*d),
                        "pass": true,
                    }),
                    true,
                ));
            }
            let reps: Value = (gd.gamma_m2.lo..=gd.gamma_m2.hi())
                .filter(|n| ext.dim(*n) > 0)
                .map(|n| {
                    let h = gd.gamma_m2.cohomology(n);
                    let cols: Vec<Vec<String>> = (0..h.reps.cols)
                        .map(|c| h.reps.col(c).iter().map(format_rat).collect())
                        .collect();
                    (n.to_string(), json!(cols))
                })
                .collect::<serde_json::Map<String, Value>>()
                .into();
            Ok((
                json!({
                    "verb": "ext",
                    "l": l, "m": m, "twist": twist,
                    "H": dims_json(ext.lo, &ext.dims),
                    "representatives": reps,
                    "pass": true,
                }),
                true,
            ))
        }
        Verb::Syn { name, twist, degree } => {
            let phc = get_phc(&ws, name)?;
            let rep = syntomic::syn_cohomology(&phc, *twist).map_err(|e| e.to_string())?;
            if let Some(d) = degree {
                return Ok((
                    json!({
                        "verb": "syn",
                        "name": name, "twist": twist, "degree": d,
                        "dim": rep.h_syn.get(d).copied().unwrap_or(0),
                        "pass": true,
                    }),
                    true,
                ));
            }
            let to_json = |m: &std::collections::BTreeMap<i64, usize>| -> Value {
                m.iter()
                    .map(|(k, v)| (k.to_string(), json!(v)))
                    .collect::<serde_json::Map<_, _>>()
                    .into()
            };
            Ok((
                json!({
                    "verb": "syn",
                    "name": name, "twist": twist,
                    "H_syn": to_json(&rep.h_syn),
                    "H_A": to_json(&rep.h_a),
                    "H_B": to_json(&rep.h_b),
                    "H_C": to_json(&rep.h_c),
                    "H_alpha": to_json(&rep.h_alpha),
                    "H_beta": to_json(&rep.h_beta),
                    "pass": true,
                }),
                true,
            ))
        }
        Verb::Les { name, twist } => {
            let phc = get_phc(&ws, name)?;
            let rep = syntomic::les_check(&phc, *twist).map_err(|e| e.to_string())?;
            let pass = rep.all_exact();
            let failures: Vec<Value> = rep
                .nodes
                .iter()
                .filter(|(_, _, ok)| !ok)
                .map(|(seq, deg, _)| json!({"sequence": seq, "degree": deg}))
                .collect();
            Ok((
                json!({
                    "verb": "les",
                    "name": name, "twist": twist,
                    "nodes_checked": rep.nodes.len(),
                    "failures": failures,
                    "pass": pass,
                }),
                pass,
            ))
        }
        Verb::Leray { name, twist } => {
            let phc = get_phc(&ws, name)?;
            let rep = syntomic::leray(&phc, *twist).map_err(|e| e.to_string())?;
            let pass = rep.all_ok();
            let pages: Vec<Value> = rep
                .pages
                .iter()
                .map(|(r, cells)| {
                    let cells: Vec<Value> = cells
                        .iter()
                        .map(|(&(i, j), &d)| json!({"i": i, "j": j, "dim": d}))
                        .collect();
                    json!({"r": r, "cells": cells})
                })
                .collect();
            Ok((
                json!({
                    "verb": "leray",
                    "name": name, "twist": twist,
                    "pages": pages,
                    "e2_matches_ext": rep.e2_matches,
                    "degenerates_at_E3": rep.degenerates_at_r3,
                    "converges": rep.converges,
                    "pass": pass,
                }),
                pass,
            ))
        }
        Verb::Split { name, twist } => {
            let phc = get_phc(&ws, name)?;
            let rep = syntomic::smooth_split(&phc, *twist).map_err(|e| e.to_string())?;
            let pass = rep.all_ok();
            let rows: Vec<Value> = rep
                .rows
                .iter()
                .map(|&(i, hs, hb, hc)| {
                    json!({"degree": i, "H_syn": hs, "H_tilde": hb, "H_cone": hc})
                })
                .collect();
            Ok((
                json!({
                    "verb": "split",
                    "name": name, "twist": twist,
                    "rows": rows,
                    "split_verified": rep.split_verified,
                    "twist_identity": rep.twist_identity,
                    "pass": pass,
                }),
                pass,
            ))
        }
        Verb::Simplicial { name } => {
            let dc = ws
                .doubles
                .get(name)
                .ok_or(format!("unknown double complex {name:?}"))?;
            let total = dc.total().map_err(|e| e.to_string())?;
            let h: Vec<usize> = (total.lo..=total.hi())
                .map(|n| total.underlying().cohomology(n).dim)
                .collect();
            Ok((
                json!({
                    "verb": "simplicial",
                    "name": name,
                    "total": {
                        "lo": total.lo,
                        "dims": (total.lo..=total.hi()).map(|n| total.dim(n)).collect::<Vec<_>>(),
                    },
                    "cohomology": dims_json(total.lo, &h),
                    "pass": true,
                }),
                true,
            ))
        }
        Verb::Witness { kind, l, m, seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
            let lc = get_complex(&ws, l)?;
            let mc = get_complex(&ws, m)?;
            let (identities, dims): (Vec<(String, bool)>, Value) = match kind {
                WitnessKind::Tilde => {
                    let gd = GammaData::new(&lc, &mc).map_err(|e| e.to_string())?;
                    let (x, y, z) = builtin::random_tilde_cocycle(&gd, &mut rng);
                    let w = synkernel::mfcx::tilde_witness(&gd, &x, &y, &z)
                        .map_err(|e| e.to_string())?;
                    let dims: Vec<usize> =
                        (w.m_prime.lo..=w.m_prime.hi()).map(|n| w.m_prime.dim(n)).collect();
                    (w.identities, dims_json(w.m_prime.lo, &dims))
                }
                WitnessKind::Hat => {
                    let x = builtin::random_hom0(&lc, &mc, &mut rng);
                    let w =
                        synkernel::mfcx::hat_witness(&lc, &mc, &x).map_err(|e| e.to_string())?;
                    let dims: Vec<usize> =
                        (w.m_prime.lo..=w.m_prime.hi()).map(|n| w.m_prime.dim(n)).collect();
                    (w.identities, dims_json(w.m_prime.lo, &dims))
                }
                WitnessKind::TildePhc => {
                    let tl = PadicHodgeComplex::theta(&lc);
                    let tm = PadicHodgeComplex::theta(&mc);
                    let ld = LambdaData::new(&tl, &tm).map_err(|e| e.to_string())?;
                    let (x, y, z, wv) = selftest::random_lambda_tilde_cocycle(&ld, &mut rng);
                    let w = synkernel::phodge::tilde_witness_phc(&ld, &x, &y, &z, &wv)
                        .map_err(|e| e.to_string())?;
                    let dims: Vec<usize> = (w.m_prime.lo()..=w.m_prime.hi())
                        .map(|n| w.m_prime.rig.dim(n))
                        .collect();
                    (w.identities, dims_json(w.m_prime.lo(), &dims))
                }
                WitnessKind::HatPhc => {
                    let tl = PadicHodgeComplex::theta(&lc);
                    let tm = PadicHodgeComplex::theta(&mc);
                    let x = builtin::random_hom0(&lc, &mc, &mut rng);
                    let (w, r0) = synkernel::phodge::hat_witness_phc(&tl, &tm, &x)
                        .map_err(|e| e.to_string())?;
                    let dims: Vec<usize> = (w.m_prime.lo()..=w.m_prime.hi())
                        .map(|n| w.m_prime.rig.dim(n))
                        .collect();
                    let mut ids = w.identities;
                    ids.push((format!("r0 = {r0}"), true));
                    (ids, dims_json(w.m_prime.lo(), &dims))
                }
            };
            let pass = identities.iter().all(|(_, ok)| *ok);
            let id_json: Vec<Value> = identities
                .iter()
                .map(|(name, ok)| json!({"identity": name, "holds": ok}))
                .collect();
            Ok((
                json!({
                    "verb": "witness",
                    "l": l, "m": m, "seed": seed,
                    "m_prime_dims": dims,
                    "identities": id_json,
                    "pass": pass,
                }),
                pass,
            ))
        }
        Verb::Examples { name, seed } => match name {
            None => Ok((
                json!({
                    "verb": "examples",
                    "available": ["unit", "unit1", "tate-curve", "elliptic", "ordinary", "random", "random-complex"],
                    "pass": true,
                }),
                true,
            )),
            Some(n) => {
                let doc = builtin_example_doc(n, cli.prime, *seed)
                    .ok_or(format!("unknown example {n:?}"))?;
                Ok((doc, true))
            }
        },
        Verb::Selftest { seed, trials } => {
            let results = selftest::run_all(*seed, *trials);
            let pass = results.iter().all(|r| r.passed());
            let suites: Vec<Value> = results
                .iter()
                .map(|r| {
                    json!({
                        "suite": r.name,
                        "checks": r.checks,
                        "failures": r.failures,
                        "pass": r.passed(),
                    })
                })
                .collect();
            Ok((
                json!({"verb": "selftest", "seed": seed, "trials": trials, "suites": suites, "pass": pass}),
                pass,
            ))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, pass)) => {
            println!("{}", serde_json::to_string_pretty(&report).expect("serialize"));
            std::process::exit(if pass { 0 } else { 1 });
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
