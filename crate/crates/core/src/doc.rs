//! Workspace documents: one UTF-8 JSON file describes one tower and a set of
//! named modules, complexes, p-adic Hodge complexes, double complexes and
//! chain maps. Everything is validated on load; the first violation is
//! reported with a JSON-pointer location.
//!
//! Scalars are decimal integer-fraction strings `"a"` / `"a/b"`. A `K0`
//! element is a plain string when `f = 1`, otherwise an array of `f` strings;
//! a `K` element likewise with `e*f` coordinates. Matrices are row-major
//! arrays in the basis-image convention `phi(e_i) = sum_j a_{ij} e_j` (the
//! library transposes to coordinate-action form internally). Filtrations are
//! jump lists `{"jump": i, "basis": [vector, ...]}`.

use crate::builtin;
use crate::complex::Complex;
use crate::field::{Field, K0Field, KField};
use crate::mat::Mat;
use crate::mfcx::{MfChainMap, MfComplex};
use crate::module::{FilteredPhiNModule, Filtration, K0Elem, KElem};
use crate::phodge::PadicHodgeComplex;
use crate::rat::{format_rat, parse_rat, Rat};
use crate::syntomic::MfDoubleComplex;
use crate::tower::Tower;
use num_bigint::BigInt;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
#[error("{pointer}: {message}")]
pub struct DocError {
    pub pointer: String,
    pub message: String,
}

fn err<T>(ptr: &str, msg: impl Into<String>) -> Result<T, DocError> {
    Err(DocError { pointer: ptr.to_string(), message: msg.into() })
}

pub struct Workspace {
    pub tower: Arc<Tower>,
    pub modules: BTreeMap<String, FilteredPhiNModule>,
    pub complexes: BTreeMap<String, MfComplex>,
    pub phodge: BTreeMap<String, PadicHodgeComplex>,
    pub doubles: BTreeMap<String, MfDoubleComplex>,
    pub chain_maps: BTreeMap<String, MfChainMap>,
}

impl Workspace {
    /// Resolve a name as an MF complex: either a named complex or a named
    /// module placed in degree 0.
    pub fn complex(&self, name: &str) -> Option<MfComplex> {
        if let Some(c) = self.complexes.get(name) {
            return Some(c.clone());
        }
        self.modules
            .get(name)
            .map(|m| MfComplex::concentrated(m.clone(), 0))
    }

    /// Resolve a name as a pHC: a named pHC, or Theta of a complex/module.
    pub fn phodge_of(&self, name: &str) -> Option<PadicHodgeComplex> {
        if let Some(p) = self.phodge.get(name) {
            return Some(p.clone());
        }
        self.complex(name).map(|c| PadicHodgeComplex::theta(&c))
    }
}

// --- low-level readers ----------------------------------------------------

fn get<'a>(v: &'a Value, key: &str, ptr: &str) -> Result<&'a Value, DocError> {
    v.get(key)
        .ok_or(DocError { pointer: format!("{ptr}/{key}"), message: "missing field".into() })
}

fn as_obj<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>, DocError> {
    v.as_object().ok_or(DocError { pointer: ptr.into(), message: "expected object".into() })
}

fn as_arr<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>, DocError> {
    v.as_array().ok_or(DocError { pointer: ptr.into(), message: "expected array".into() })
}

fn as_i64(v: &Value, ptr: &str) -> Result<i64, DocError> {
    v.as_i64().ok_or(DocError { pointer: ptr.into(), message: "expected integer".into() })
}

fn as_usize(v: &Value, ptr: &str) -> Result<usize, DocError> {
    let n = as_i64(v, ptr)?;
    if n < 0 {
        return err(ptr, "expected nonnegative integer");
    }
    Ok(n as usize)
}

fn read_rat(v: &Value, ptr: &str) -> Result<Rat, DocError> {
    match v {
        Value::String(s) => parse_rat(s).map_err(|m| DocError { pointer: ptr.into(), message: m }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(crate::rat::rat_i64(i))
            } else {
                err(ptr, "numbers must be integers or strings \"a/b\"")
            }
        }
        _ => err(ptr, "expected a rational as string \"a/b\""),
    }
}

/// A coordinate vector of `width` rationals: a plain scalar when width = 1,
/// otherwise an array.
fn read_coords(v: &Value, width: usize, ptr: &str) -> Result<Vec<Rat>, DocError> {
    if width == 1 && !v.is_array() {
        return Ok(vec![read_rat(v, ptr)?]);
    }
    let arr = as_arr(v, ptr)?;
    if arr.len() != width {
        return err(ptr, format!("expected {width} coordinates, got {}", arr.len()));
    }
    arr.iter()
        .enumerate()
        .map(|(i, x)| read_rat(x, &format!("{ptr}/{i}")))
        .collect()
}

fn read_k0(v: &Value, t: &Tower, ptr: &str) -> Result<K0Elem, DocError> {
    read_coords(v, t.k0_dim(), ptr)
}

fn read_k(v: &Value, t: &Tower, ptr: &str) -> Result<KElem, DocError> {
    read_coords(v, t.k_dim(), ptr)
}

/// Reads a matrix in basis-image rows convention and transposes to the
/// internal action form. `rows`/`cols` are the source/target dimensions of
/// the map (so the JSON array has `rows` rows of length `cols` after the
/// convention: row i = image of e_i in the target basis).
fn read_mat_k0(
    v: &Value,
    t: &Tower,
    src: usize,
    dst: usize,
    ptr: &str,
) -> Result<Mat<K0Elem>, DocError> {
    let arr = as_arr(v, ptr)?;
    if arr.len() != src {
        return err(ptr, format!("expected {src} rows, got {}", arr.len()));
    }
    let mut rows = Vec::with_capacity(src);
    for (i, row) in arr.iter().enumerate() {
        let rptr = format!("{ptr}/{i}");
        let row = as_arr(row, &rptr)?;
        if row.len() != dst {
            return err(&rptr, format!("expected {dst} entries, got {}", row.len()));
        }
        let mut out = Vec::with_capacity(dst);
        for (j, e) in row.iter().enumerate() {
            out.push(read_k0(e, t, &format!("{rptr}/{j}"))?);
        }
        rows.push(out);
    }
    // transpose: action(v) = A^T v
    let k0 = K0Field(dummy_arc(t));
    Ok(Mat::from_fn(dst, src, |r, c| {
        if rows.is_empty() {
            k0.zero()
        } else {
            rows[c][r].clone()
        }
    }))
}

fn read_mat_k(
    v: &Value,
    t: &Tower,
    src: usize,
    dst: usize,
    ptr: &str,
) -> Result<Mat<KElem>, DocError> {
    let arr = as_arr(v, ptr)?;
    if arr.len() != src {
        return err(ptr, format!("expected {src} rows, got {}", arr.len()));
    }
    let mut rows = Vec::with_capacity(src);
    for (i, row) in arr.iter().enumerate() {
        let rptr = format!("{ptr}/{i}");
        let row = as_arr(row, &rptr)?;
        if row.len() != dst {
            return err(&rptr, format!("expected {dst} entries, got {}", row.len()));
        }
        let mut out = Vec::with_capacity(dst);
        for (j, e) in row.iter().enumerate() {
            out.push(read_k(e, t, &format!("{rptr}/{j}"))?);
        }
        rows.push(out);
    }
    let kf = KField(dummy_arc(t));
    Ok(Mat::from_fn(dst, src, |r, c| {
        if rows.is_empty() {
            kf.zero()
        } else {
            rows[c][r].clone()
        }
    }))
}

// The readers only need the arithmetic, not shared ownership; wrap a clone.
fn dummy_arc(t: &Tower) -> Arc<Tower> {
    Arc::new(t.clone())
}

fn read_filtration(
    v: &Value,
    t: &Arc<Tower>,
    dim: usize,
    ptr: &str,
) -> Result<Filtration, DocError> {
    let arr = as_arr(v, ptr)?;
    let mut jumps = Vec::new();
    for (i, item) in arr.iter().enumerate() {
        let iptr = format!("{ptr}/{i}");
        let jump = as_i64(get(item, "jump", &iptr)?, &format!("{iptr}/jump"))?;
        let bptr = format!("{iptr}/basis");
        let basis_arr = as_arr(get(item, "basis", &iptr)?, &bptr)?;
        let mut cols = Vec::new();
        for (c, vec) in basis_arr.iter().enumerate() {
            let vptr = format!("{bptr}/{c}");
            let v = as_arr(vec, &vptr)?;
            if v.len() != dim {
                return err(&vptr, format!("expected {dim} coordinates, got {}", v.len()));
            }
            let mut col = Vec::with_capacity(dim);
            for (r, e) in v.iter().enumerate() {
                col.push(read_k(e, t, &format!("{vptr}/{r}"))?);
            }
            cols.push(col);
        }
        let kf = KField(t.clone());
        let basis = if cols.is_empty() {
            crate::mat::zero_mat(&kf, dim, 0)
        } else {
            Mat::from_fn(dim, cols.len(), |r, c| cols[c][r].clone())
        };
        jumps.push((jump, basis));
    }
    Ok(Filtration { jumps })
}

// --- the document parser ----------------------------------------------------

pub fn parse_workspace(text: &str) -> Result<Workspace, DocError> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| DocError { pointer: "".into(), message: format!("JSON syntax: {e}") })?;
    parse_workspace_value(&v)
}

pub fn parse_workspace_value(v: &Value) -> Result<Workspace, DocError> {
    let root = as_obj(v, "")?;
    let tower = parse_tower(get(v, "tower", "")?)?;
    let mut ws = Workspace {
        tower: tower.clone(),
        modules: BTreeMap::new(),
        complexes: BTreeMap::new(),
        phodge: BTreeMap::new(),
        doubles: BTreeMap::new(),
        chain_maps: BTreeMap::new(),
    };
    if let Some(mods) = root.get("modules") {
        for (name, mv) in as_obj(mods, "/modules")? {
            let ptr = format!("/modules/{name}");
            let m = parse_module(mv, &tower, &ptr)?;
            m.validate().map_err(|e| DocError { pointer: ptr.clone(), message: e.to_string() })?;
            ws.modules.insert(name.clone(), m);
        }
    }
    if let Some(cxs) = root.get("complexes") {
        for (name, cv) in as_obj(cxs, "/complexes")? {
            let ptr = format!("/complexes/{name}");
            let c = parse_complex(cv, &ws, &ptr)?;
            c.validate().map_err(|e| DocError { pointer: ptr.clone(), message: e.to_string() })?;
            ws.complexes.insert(name.clone(), c);
        }
    }
    if let Some(ph) = root.get("phodge") {
        for (name, pv) in as_obj(ph, "/phodge")? {
            let ptr = format!("/phodge/{name}");
            let p = parse_phodge(pv, &tower, &ptr)?;
            p.validate().map_err(|e| DocError { pointer: ptr.clone(), message: e.to_string() })?;
            ws.phodge.insert(name.clone(), p);
        }
    }
    if let Some(dc) = root.get("double_complexes") {
        for (name, dv) in as_obj(dc, "/double_complexes")? {
            let ptr = format!("/double_complexes/{name}");
            let d = parse_double(dv, &ws, &ptr)?;
            d.validate().map_err(|e| DocError { pointer: ptr.clone(), message: e.to_string() })?;
            ws.doubles.insert(name.clone(), d);
        }
    }
    if let Some(cm) = root.get("chain_maps") {
        for (name, mv) in as_obj(cm, "/chain_maps")? {
            let ptr = format!("/chain_maps/{name}");
            let m = parse_chain_map(mv, &ws, &ptr)?;
            m.validate().map_err(|e| DocError { pointer: ptr.clone(), message: e.to_string() })?;
            ws.chain_maps.insert(name.clone(), m);
        }
    }
    Ok(ws)
}

fn parse_tower(v: &Value) -> Result<Arc<Tower>, DocError> {
    let ptr = "/tower";
    let p_v = get(v, "p", ptr)?;
    let p: BigInt = match p_v {
        Value::Number(_) => BigInt::from(as_i64(p_v, &format!("{ptr}/p"))?),
        Value::String(s) => s
            .parse()
            .map_err(|_| DocError { pointer: format!("{ptr}/p"), message: "bad integer".into() })?,
        _ => return err(&format!("{ptr}/p"), "expected integer"),
    };
    let _ = p_v;
    let f = as_usize(get(v, "f", ptr)?, &format!("{ptr}/f"))?;
    let e = as_usize(get(v, "e", ptr)?, &format!("{ptr}/e"))?;
    let k0_modulus = match v.get("k0_modulus") {
        None | Some(Value::Null) => None,
        Some(mv) => {
            let arr = as_arr(mv, &format!("{ptr}/k0_modulus"))?;
            let mut out = Vec::new();
            for (i, c) in arr.iter().enumerate() {
                out.push(read_rat(c, &format!("{ptr}/k0_modulus/{i}"))?);
            }
            Some(out)
        }
    };
    let sigma = match v.get("sigma_matrix") {
        None | Some(Value::Null) => None,
        Some(sv) => {
            let arr = as_arr(sv, &format!("{ptr}/sigma_matrix"))?;
            let mut out = Vec::new();
            for (i, row) in arr.iter().enumerate() {
                let rptr = format!("{ptr}/sigma_matrix/{i}");
                for (j, x) in as_arr(row, &rptr)?.iter().enumerate() {
                    out.push(read_rat(x, &format!("{rptr}/{j}"))?);
                }
            }
            Some(out)
        }
    };
    // Eisenstein: array of e+1 K0 elements, ascending; build a provisional
    // tower context just for coordinate width.
    let eis_arr = as_arr(get(v, "eisenstein", ptr)?, &format!("{ptr}/eisenstein"))?;
    let mut eis = Vec::new();
    for (i, c) in eis_arr.iter().enumerate() {
        eis.push(read_coords(c, f, &format!("{ptr}/eisenstein/{i}"))?);
    }
    Tower::new(p, f, k0_modulus, sigma, e, eis)
        .map_err(|e| DocError { pointer: ptr.into(), message: e.to_string() })
}

fn parse_module(
    v: &Value,
    t: &Arc<Tower>,
    ptr: &str,
) -> Result<FilteredPhiNModule, DocError> {
    let dim = as_usize(get(v, "dim", ptr)?, &format!("{ptr}/dim"))?;
    let phi = read_mat_k0(get(v, "phi", ptr)?, t, dim, dim, &format!("{ptr}/phi"))?;
    let nmat = read_mat_k0(get(v, "n", ptr)?, t, dim, dim, &format!("{ptr}/n"))?;
    let filt = read_filtration(get(v, "filtration", ptr)?, t, dim, &format!("{ptr}/filtration"))?;
    Ok(FilteredPhiNModule { tower: t.clone(), dim, phi, nmat, filt })
}

fn parse_complex(v: &Value, ws: &Workspace, ptr: &str) -> Result<MfComplex, DocError> {
    let lo = as_i64(get(v, "lo", ptr)?, &format!("{ptr}/lo"))?;
    let names = as_arr(get(v, "modules", ptr)?, &format!("{ptr}/modules"))?;
    let mut modules = Vec::new();
    for (i, nv) in names.iter().enumerate() {
        let nptr = format!("{ptr}/modules/{i}");
        let name = nv.as_str().ok_or(DocError {
            pointer: nptr.clone(),
            message: "expected module name".into(),
        })?;
        let m = ws
            .modules
            .get(name)
            .ok_or(DocError { pointer: nptr, message: format!("unresolved module {name:?}") })?;
        modules.push(m.clone());
    }
    let d_arr = as_arr(get(v, "d", ptr)?, &format!("{ptr}/d"))?;
    if d_arr.len() + 1 != modules.len().max(1) {
        return err(
            &format!("{ptr}/d"),
            format!("expected {} differentials", modules.len().saturating_sub(1)),
        );
    }
    let mut diffs = Vec::new();
    for (i, dv) in d_arr.iter().enumerate() {
        let src = modules[i].dim;
        let dst = modules[i + 1].dim;
        diffs.push(read_mat_k0(dv, &ws.tower, src, dst, &format!("{ptr}/d/{i}"))?);
    }
    Ok(MfComplex { tower: ws.tower.clone(), lo, modules, diffs })
}

fn parse_phodge(
    v: &Value,
    t: &Arc<Tower>,
    ptr: &str,
) -> Result<PadicHodgeComplex, DocError> {
    let lo = as_i64(get(v, "lo", ptr)?, &format!("{ptr}/lo"))?;
    let read_dims = |v: &Value, ptr: &str| -> Result<Vec<usize>, DocError> {
        as_arr(v, ptr)?
            .iter()
            .enumerate()
            .map(|(i, x)| as_usize(x, &format!("{ptr}/{i}")))
            .collect()
    };
    // rig
    let rig_v = get(v, "rig", ptr)?;
    let rptr = format!("{ptr}/rig");
    let rig_dims = read_dims(get(rig_v, "dims", &rptr)?, &format!("{rptr}/dims"))?;
    let nmats = rig_dims.len();
    let read_mats_k0 = |v: &Value,
                        dims_src: &[usize],
                        dims_dst: &[usize],
                        ptr: &str|
     -> Result<Vec<Mat<K0Elem>>, DocError> {
        let arr = as_arr(v, ptr)?;
        if arr.len() != dims_src.len() {
            return err(ptr, format!("expected {} matrices", dims_src.len()));
        }
        arr.iter()
            .enumerate()
            .map(|(i, m)| read_mat_k0(m, t, dims_src[i], dims_dst[i], &format!("{ptr}/{i}")))
            .collect()
    };
    let dshift: Vec<usize> = rig_dims.iter().skip(1).copied().collect();
    let rig_d = read_mats_k0(
        get(rig_v, "d", &rptr)?,
        &rig_dims[..nmats.saturating_sub(1)],
        &dshift,
        &format!("{rptr}/d"),
    )?;
    let phi = read_mats_k0(get(rig_v, "phi", &rptr)?, &rig_dims, &rig_dims, &format!("{rptr}/phi"))?;
    let n_op = read_mats_k0(get(rig_v, "n", &rptr)?, &rig_dims, &rig_dims, &format!("{rptr}/n"))?;
    let rig = Complex::new(K0Field(t.clone()), lo, rig_dims.clone(), rig_d);

    let read_complex_k = |v: &Value, ptr: &str| -> Result<Complex<KField>, DocError> {
        let dims = read_dims(get(v, "dims", ptr)?, &format!("{ptr}/dims"))?;
        let arr = as_arr(get(v, "d", ptr)?, &format!("{ptr}/d"))?;
        if arr.len() + 1 != dims.len().max(1) {
            return err(&format!("{ptr}/d"), "wrong number of differentials");
        }
        let mut diffs = Vec::new();
        for (i, m) in arr.iter().enumerate() {
            diffs.push(read_mat_k(m, t, dims[i], dims[i + 1], &format!("{ptr}/d/{i}"))?);
        }
        Ok(Complex::new(KField(t.clone()), lo, dims, diffs))
    };
    let k_spec = read_complex_k(get(v, "k", ptr)?, &format!("{ptr}/k"))?;
    let dr_v = get(v, "dr", ptr)?;
    let dr = read_complex_k(dr_v, &format!("{ptr}/dr"))?;
    let filt_arr = as_arr(get(dr_v, "filtration", &format!("{ptr}/dr"))?, &format!("{ptr}/dr/filtration"))?;
    if filt_arr.len() != dr.dims.len() {
        return err(&format!("{ptr}/dr/filtration"), "one jump list per degree required");
    }
    let mut dr_filt = Vec::new();
    for (i, fv) in filt_arr.iter().enumerate() {
        dr_filt.push(read_filtration(fv, t, dr.dims[i], &format!("{ptr}/dr/filtration/{i}"))?);
    }
    let read_mats_k = |v: &Value,
                       src: &[usize],
                       dst: &dyn Fn(usize) -> usize,
                       ptr: &str|
     -> Result<Vec<Mat<KElem>>, DocError> {
        let arr = as_arr(v, ptr)?;
        if arr.len() != src.len() {
            return err(ptr, format!("expected {} matrices", src.len()));
        }
        arr.iter()
            .enumerate()
            .map(|(i, m)| read_mat_k(m, t, src[i], dst(i), &format!("{ptr}/{i}")))
            .collect()
    };
    let alpha = read_mats_k(
        get(v, "alpha", ptr)?,
        &rig_dims,
        &|i| k_spec.dims.get(i).copied().unwrap_or(0),
        &format!("{ptr}/alpha"),
    )?;
    let beta = read_mats_k(
        get(v, "beta", ptr)?,
        &dr.dims.clone(),
        &|i| k_spec.dims.get(i).copied().unwrap_or(0),
        &format!("{ptr}/beta"),
    )?;
    Ok(PadicHodgeComplex {
        tower: t.clone(),
        rig,
        phi,
        n_op,
        k_spec,
        dr,
        dr_filt,
        alpha,
        beta,
    })
}

fn parse_double(v: &Value, ws: &Workspace, ptr: &str) -> Result<MfDoubleComplex, DocError> {
    let row_lo = as_i64(get(v, "row_lo", ptr)?, &format!("{ptr}/row_lo"))?;
    let col_lo = as_i64(get(v, "col_lo", ptr)?, &format!("{ptr}/col_lo"))?;
    let grid = as_arr(get(v, "modules", ptr)?, &format!("{ptr}/modules"))?;
    let mut modules: Vec<Vec<FilteredPhiNModule>> = Vec::new();
    for (i, row) in grid.iter().enumerate() {
        let rptr = format!("{ptr}/modules/{i}");
        let mut out = Vec::new();
        for (j, nv) in as_arr(row, &rptr)?.iter().enumerate() {
            let nptr = format!("{rptr}/{j}");
            let name = nv.as_str().ok_or(DocError {
                pointer: nptr.clone(),
                message: "expected module name".into(),
            })?;
            let m = ws.modules.get(name).ok_or(DocError {
                pointer: nptr,
                message: format!("unresolved module {name:?}"),
            })?;
            out.push(m.clone());
        }
        modules.push(out);
    }
    let read_grid = |key: &str, rows: usize, shape: &dyn Fn(usize, usize) -> (usize, usize)| -> Result<Vec<Vec<Mat<K0Elem>>>, DocError> {
        let gptr = format!("{ptr}/{key}");
        let arr = as_arr(get(v, key, ptr)?, &gptr)?;
        if arr.len() != rows {
            return err(&gptr, format!("expected {rows} rows"));
        }
        let mut out = Vec::new();
        for (i, row) in arr.iter().enumerate() {
            let rptr = format!("{gptr}/{i}");
            let mut mats = Vec::new();
            for (j, mv) in as_arr(row, &rptr)?.iter().enumerate() {
                let (src, dst) = shape(i, j);
                mats.push(read_mat_k0(mv, &ws.tower, src, dst, &format!("{rptr}/{j}"))?);
            }
            out.push(mats);
        }
        Ok(out)
    };
    let nr = modules.len();
    let mods = modules.clone();
    let vert = read_grid("vert", nr.saturating_sub(1), &|i, j| {
        (mods[i][j].dim, mods[i + 1][j].dim)
    })?;
    let mods2 = modules.clone();
    let horiz = read_grid("horiz", nr, &|i, j| (mods2[i][j].dim, mods2[i][j + 1].dim))?;
    Ok(MfDoubleComplex { tower: ws.tower.clone(), row_lo, col_lo, modules, vert, horiz })
}

fn parse_chain_map(v: &Value, ws: &Workspace, ptr: &str) -> Result<MfChainMap, DocError> {
    let sname = get(v, "source", ptr)?
        .as_str()
        .ok_or(DocError { pointer: format!("{ptr}/source"), message: "expected name".into() })?;
    let tname = get(v, "target", ptr)?
        .as_str()
        .ok_or(DocError { pointer: format!("{ptr}/target"), message: "expected name".into() })?;
    let source = ws.complex(sname).ok_or(DocError {
        pointer: format!("{ptr}/source"),
        message: format!("unresolved complex {sname:?}"),
    })?;
    let target = ws.complex(tname).ok_or(DocError {
        pointer: format!("{ptr}/target"),
        message: format!("unresolved complex {tname:?}"),
    })?;
    let arr = as_arr(get(v, "mats", ptr)?, &format!("{ptr}/mats"))?;
    let mut mats = Vec::new();
    for (i, mv) in arr.iter().enumerate() {
        let n = source.lo + i as i64;
        mats.push(read_mat_k0(
            mv,
            &ws.tower,
            source.dim(n),
            target.dim(n),
            &format!("{ptr}/mats/{i}"),
        )?);
    }
    Ok(MfChainMap { source, target, mats })
}

// --- emission ----------------------------------------------------------------

fn emit_rat(x: &Rat) -> Value {
    Value::String(format_rat(x))
}

fn emit_coords(v: &[Rat]) -> Value {
    if v.len() == 1 {
        emit_rat(&v[0])
    } else {
        Value::Array(v.iter().map(emit_rat).collect())
    }
}

/// Action-form matrix back to the basis-image rows convention.
fn emit_mat(m: &Mat<Vec<Rat>>) -> Value {
    let t = m.transpose();
    Value::Array(
        (0..t.rows)
            .map(|r| Value::Array((0..t.cols).map(|c| emit_coords(t.at(r, c))).collect()))
            .collect(),
    )
}

fn emit_filtration(f: &Filtration) -> Value {
    Value::Array(
        f.jumps
            .iter()
            .map(|(j, b)| {
                json!({
                    "jump": j,
                    "basis": (0..b.cols)
                        .map(|c| Value::Array((0..b.rows).map(|r| emit_coords(b.at(r, c))).collect()))
                        .collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

pub fn emit_tower(t: &Tower) -> Value {
    let mut obj = Map::new();
    obj.insert("p".into(), Value::String(t.p.to_string()));
    obj.insert("f".into(), json!(t.f));
    obj.insert("e".into(), json!(t.e));
    if t.f > 1 {
        obj.insert(
            "k0_modulus".into(),
            Value::Array(t.k0_modulus.iter().map(emit_rat).collect()),
        );
        obj.insert(
            "sigma_matrix".into(),
            Value::Array(
                (0..t.f)
                    .map(|r| {
                        Value::Array((0..t.f).map(|c| emit_rat(&t.sigma_mat[r * t.f + c])).collect())
                    })
                    .collect(),
            ),
        );
    }
    obj.insert(
        "eisenstein".into(),
        Value::Array(t.eisenstein.iter().map(|c| emit_coords(c)).collect()),
    );
    Value::Object(obj)
}

pub fn emit_module(m: &FilteredPhiNModule) -> Value {
    json!({
        "dim": m.dim,
        "phi": emit_mat(&m.phi),
        "n": emit_mat(&m.nmat),
        "filtration": emit_filtration(&m.filt),
    })
}

pub fn emit_workspace(ws: &Workspace) -> Value {
    let mut root = Map::new();
    root.insert("tower".into(), emit_tower(&ws.tower));
    if !ws.modules.is_empty() {
        let mut mods = Map::new();
        for (name, m) in &ws.modules {
            mods.insert(name.clone(), emit_module(m));
        }
        root.insert("modules".into(), Value::Object(mods));
    }
    if !ws.complexes.is_empty() {
        let mut cxs = Map::new();
        for (name, c) in &ws.complexes {
            // complexes reference anonymous inline modules by synthesized names
            let mod_names: Vec<String> =
                (0..c.modules.len()).map(|i| format!("{name}.{i}")).collect();
            cxs.insert(
                name.clone(),
                json!({
                    "lo": c.lo,
                    "modules": mod_names,
                    "d": c.diffs.iter().map(emit_mat).collect::<Vec<_>>(),
                }),
            );
            // ensure referenced modules exist in the document
            let mods = root
                .entry("modules")
                .or_insert_with(|| Value::Object(Map::new()));
            if let Value::Object(map) = mods {
                for (i, m) in c.modules.iter().enumerate() {
                    map.insert(format!("{name}.{i}"), emit_module(m));
                }
            }
        }
        root.insert("complexes".into(), Value::Object(cxs));
    }
    Value::Object(root)
}

/// The default workspace available without any `--file`: the standard tower
/// at `p = 5` with the built-in example modules and complexes.
pub fn builtin_workspace(p: i64) -> Workspace {
    let t = builtin::tq(p);
    let mut modules = BTreeMap::new();
    modules.insert("unit".into(), FilteredPhiNModule::unit(&t));
    modules.insert("unit1".into(), FilteredPhiNModule::unit_twist(&t, 1));
    modules.insert("unit-1".into(), FilteredPhiNModule::unit_twist(&t, -1));
    modules.insert("tate-curve".into(), builtin::tate_module(&t, 1));
    modules.insert("elliptic".into(), builtin::elliptic_module(&t, 2));
    modules.insert("ordinary".into(), builtin::split_ordinary(&t, 0, 1));
    let mut complexes = BTreeMap::new();
    let k0 = K0Field(t.clone());
    complexes.insert(
        "unit-sum".into(),
        MfComplex {
            tower: t.clone(),
            lo: 0,
            modules: vec![
                FilteredPhiNModule::unit(&t),
                FilteredPhiNModule::unit_twist(&t, 1),
            ],
            diffs: vec![crate::mat::zero_mat(&k0, 1, 1)],
        },
    );
    Workspace {
        tower: t,
        modules,
        complexes,
        phodge: BTreeMap::new(),
        doubles: BTreeMap::new(),
        chain_maps: BTreeMap::new(),
    }
}

/// Document for one named built-in example (`examples` CLI verb).
pub fn builtin_example_doc(name: &str, p: i64, seed: u64) -> Option<Value> {
    use rand::SeedableRng;
    let t = builtin::tq(p);
    let module = match name {
        "unit" => Some(FilteredPhiNModule::unit(&t)),
        "unit1" => Some(FilteredPhiNModule::unit_twist(&t, 1)),
        "tate-curve" => Some(builtin::tate_module(&t, 1)),
        "elliptic" => Some(builtin::elliptic_module(&t, 2)),
        "ordinary" => Some(builtin::split_ordinary(&t, 0, 1)),
        "random" => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            Some(builtin::random_admissible_module(&t, &mut rng))
        }
        "random-complex" => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let c = builtin::random_mf_complex(&t, &mut rng);
            let mut ws = Workspace {
                tower: t,
                modules: BTreeMap::new(),
                complexes: BTreeMap::new(),
                phodge: BTreeMap::new(),
                doubles: BTreeMap::new(),
                chain_maps: BTreeMap::new(),
            };
            ws.complexes.insert(name.to_string(), c);
            return Some(emit_workspace(&ws));
        }
        _ => None,
    }?;
    let mut ws = Workspace {
        tower: t,
        modules: BTreeMap::new(),
        complexes: BTreeMap::new(),
        phodge: BTreeMap::new(),
        doubles: BTreeMap::new(),
        chain_maps: BTreeMap::new(),
    };
    ws.modules.insert(name.to_string(), module);
    Some(emit_workspace(&ws))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_docs_parse() {
        for name in ["unit", "tate-curve", "elliptic", "ordinary", "random"] {
            let doc = builtin_example_doc(name, 5, 7).unwrap();
            let text = serde_json::to_string_pretty(&doc).unwrap();
            let ws = parse_workspace(&text).unwrap();
            assert!(ws.modules.contains_key(name));
        }
        assert!(builtin_example_doc("nope", 5, 0).is_none());
    }

    #[test]
    fn round_trip_is_identity_on_canonical_form() {
        let ws = builtin_workspace(5);
        let doc = emit_workspace(&ws);
        let text = serde_json::to_string(&doc).unwrap();
        let ws2 = parse_workspace(&text).unwrap();
        let doc2 = emit_workspace(&ws2);
        assert_eq!(doc, doc2);
    }

    #[test]
    fn rejects_axiom_violations_with_pointer() {
        // phi = id with N = e2 -> e1 breaks N phi = p phi N.
        let text = r#"{
            "tower": {"p": "5", "f": 1, "e": 1, "eisenstein": ["-5", "1"]},
            "modules": {
                "bad": {
                    "dim": 2,
                    "phi": [["1","0"],["0","1"]],
                    "n": [["0","0"],["1","0"]],
                    "filtration": [
                        {"jump": 0, "basis": [["1","0"],["0","1"]]},
                        {"jump": 1, "basis": [["0","1"]]}
                    ]
                }
            }
        }"#;
        let e = match parse_workspace(text) {
            Err(e) => e,
            Ok(_) => panic!("expected a validation error"),
        };
        assert_eq!(e.pointer, "/modules/bad");
        assert!(e.message.contains("N phi = p phi N"), "{}", e.message);
    }

    #[test]
    fn tate_curve_document_validates() {
        let doc = builtin_example_doc("tate-curve", 5, 0).unwrap();
        let ws = parse_workspace(&serde_json::to_string(&doc).unwrap()).unwrap();
        let m = &ws.modules["tate-curve"];
        assert_eq!(m.newton_number(), crate::rat::rat_i64(1));
        assert_eq!(m.hodge_number(), crate::rat::rat_i64(1));
    }
}
