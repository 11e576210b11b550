//! Library of structure maps between evaluated functors.
//!
//! Module-level maps (inclusions, multiplications, comultiplications, the
//! Frobenius-power inclusion) are certified by operator commutation. The skew
//! maps of the comparison machinery are natural only over F_q; they are
//! certified by naturality checks on random F_q-matrices instead, and the
//! engine fixes k = F_q so their coefficient twists are identities.

use super::apply::{apply, tensor_embed};
use super::eval::{compositions, eval, multitwist_inner, words_of_content, Caps};
use super::expr::Expr;
use super::module::{is_module_map, Weight, WeightedModule};
use crate::error::EngineError;
use crate::field::{binom_mod_p, Fel, FqCtx, Mat};
use std::collections::HashMap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct NatMap {
    pub name: String,
    pub source_expr: Expr,
    pub target_expr: Expr,
    pub source: Arc<WeightedModule>,
    pub target: Arc<WeightedModule>,
    pub matrix: Mat,
    pub certified: bool,
}

/// Context for a named structure map.
#[derive(Debug, Clone, Default)]
pub struct NatCtx {
    pub degrees: Vec<u32>,
    pub expr: Option<Expr>,
}

/// Build a named structure map at rank n.
///
/// Names: div_to_ten(d) | ten_to_sym(d) | ten_to_ext(d) | ext_to_ten(d) |
/// sym_mult(a,b) | sym_comult(a,b) | div_mult(a,b) | div_comult(a,b) |
/// frob_incl(r) | frob_incl_full(r) | skew_sum(expr; a,s) |
/// skew_diag(expr; a,s) | skew_iso(expr; level).
pub fn nat_map(
    name: &str,
    ctx: &NatCtx,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<NatMap, EngineError> {
    let deg = |i: usize| -> Result<u32, EngineError> {
        ctx.degrees.get(i).copied().ok_or_else(|| EngineError::InvalidJob {
            detail: format!("{name} needs degree argument #{i}"),
        })
    };
    match name {
        "div_to_ten" => div_to_ten(deg(0)?, n, field, caps),
        "ten_to_sym" => ten_to_sym(deg(0)?, n, field, caps),
        "ten_to_ext" => ten_to_ext(deg(0)?, n, field, caps),
        "ext_to_ten" => ext_to_ten(deg(0)?, n, field, caps),
        "sym_mult" => pairing(Pairing::SymMult, deg(0)?, deg(1)?, n, field, caps),
        "sym_comult" => pairing(Pairing::SymComult, deg(0)?, deg(1)?, n, field, caps),
        "div_mult" => pairing(Pairing::DivMult, deg(0)?, deg(1)?, n, field, caps),
        "div_comult" => pairing(Pairing::DivComult, deg(0)?, deg(1)?, n, field, caps),
        "frob_incl" => frob_incl(deg(0)?, false, n, field, caps),
        "frob_incl_full" => frob_incl(deg(0)?, true, n, field, caps),
        "skew_sum" | "skew_diag" | "skew_iso" => {
            let e = ctx.expr.clone().ok_or_else(|| EngineError::InvalidJob {
                detail: format!("{name} needs a functor expression"),
            })?;
            match name {
                "skew_sum" => skew_sum(&e, deg(0)?, deg(1)?, n, field, caps),
                "skew_diag" => skew_diag(&e, deg(0)?, deg(1)?, n, field, caps),
                _ => skew_iso(&e, deg(0)?, n, field, caps),
            }
        }
        _ => Err(EngineError::UnknownName { name: name.to_string() }),
    }
}

fn finish(
    name: &str,
    source_expr: Expr,
    target_expr: Expr,
    source: Arc<WeightedModule>,
    target: Arc<WeightedModule>,
    matrix: Mat,
) -> Result<NatMap, EngineError> {
    let certified = is_module_map(&source, &target, &matrix);
    Ok(NatMap { name: name.to_string(), source_expr, target_expr, source, target, matrix, certified })
}

/// Basis index of each word inside the canonical order of Ten(d).
fn ten_index(d: u16, n: usize) -> HashMap<Vec<u8>, usize> {
    let mut out = HashMap::new();
    let mut idx = 0;
    for w in compositions(d, n) {
        for word in words_of_content(&w) {
            out.insert(word, idx);
            idx += 1;
        }
    }
    out
}

/// Canonical index of the single basis vector per weight for Sym/Div.
fn comp_index(d: u16, n: usize) -> HashMap<Weight, usize> {
    compositions(d, n).into_iter().enumerate().map(|(i, w)| (w, i)).collect()
}

fn div_to_ten(d: u32, n: usize, field: &Arc<FqCtx>, caps: &Caps) -> Result<NatMap, EngineError> {
    let (se, te) = (Expr::Div(d), Expr::Ten(d));
    let (src, tgt) = (eval(&se, n, field, caps)?, eval(&te, n, field, caps)?);
    let tidx = ten_index(d as u16, n);
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    for (c, w) in compositions(d as u16, n).iter().enumerate() {
        for word in words_of_content(w) {
            m.set(tidx[&word], c, 1);
        }
    }
    finish("div_to_ten", se, te, src, tgt, m)
}

fn ten_to_sym(d: u32, n: usize, field: &Arc<FqCtx>, caps: &Caps) -> Result<NatMap, EngineError> {
    let (se, te) = (Expr::Ten(d), Expr::Sym(d));
    let (src, tgt) = (eval(&se, n, field, caps)?, eval(&te, n, field, caps)?);
    let cidx = comp_index(d as u16, n);
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    let mut c = 0;
    for w in compositions(d as u16, n) {
        for _word in words_of_content(&w) {
            m.set(cidx[&w], c, 1);
            c += 1;
        }
    }
    finish("ten_to_sym", se, te, src, tgt, m)
}

fn sort_sign(word: &[u8]) -> Option<(Vec<u8>, bool)> {
    // None when a letter repeats; otherwise (sorted word, inversion parity)
    let mut sorted = word.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|p| p[0] == p[1]) {
        return None;
    }
    let mut inv = 0usize;
    for i in 0..word.len() {
        for j in i + 1..word.len() {
            if word[i] > word[j] {
                inv += 1;
            }
        }
    }
    Some((sorted, inv % 2 == 1))
}

fn ten_to_ext(d: u32, n: usize, field: &Arc<FqCtx>, caps: &Caps) -> Result<NatMap, EngineError> {
    let (se, te) = (Expr::Ten(d), Expr::Ext(d));
    let (src, tgt) = (eval(&se, n, field, caps)?, eval(&te, n, field, caps)?);
    // Ext basis: one vector per 0/1 weight, canonical order = weight order
    let eidx: HashMap<Weight, usize> = tgt.blocks.keys().cloned().zip(0..).collect();
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    let mut c = 0;
    for w in compositions(d as u16, n) {
        for word in words_of_content(&w) {
            if let Some((_sorted, odd)) = sort_sign(&word) {
                let coeff = if odd { field.neg(1) } else { 1 };
                m.set(eidx[&w], c, coeff);
            }
            c += 1;
        }
    }
    finish("ten_to_ext", se, te, src, tgt, m)
}

fn ext_to_ten(d: u32, n: usize, field: &Arc<FqCtx>, caps: &Caps) -> Result<NatMap, EngineError> {
    let (se, te) = (Expr::Ext(d), Expr::Ten(d));
    let (src, tgt) = (eval(&se, n, field, caps)?, eval(&te, n, field, caps)?);
    let tidx = ten_index(d as u16, n);
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    for (c, w) in src.blocks.keys().enumerate() {
        for word in words_of_content(w) {
            let (_s, odd) = sort_sign(&word).expect("multiplicity-free content");
            m.set(tidx[&word], c, if odd { field.neg(1) } else { 1 });
        }
    }
    finish("ext_to_ten", se, te, src, tgt, m)
}

enum Pairing {
    SymMult,
    SymComult,
    DivMult,
    DivComult,
}

fn pairing(
    kind: Pairing,
    a: u32,
    b: u32,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<NatMap, EngineError> {
    let p = field.p() as u64;
    let piece = |d: u32| match kind {
        Pairing::SymMult | Pairing::SymComult => Expr::Sym(d),
        _ => Expr::Div(d),
    };
    let pair_expr = Expr::tensor(piece(a), piece(b));
    let total_expr = piece(a + b);
    let (name, se, te): (&str, Expr, Expr) = match kind {
        Pairing::SymMult => ("sym_mult", pair_expr.clone(), total_expr.clone()),
        Pairing::DivMult => ("div_mult", pair_expr.clone(), total_expr.clone()),
        Pairing::SymComult => ("sym_comult", total_expr.clone(), pair_expr.clone()),
        Pairing::DivComult => ("div_comult", total_expr.clone(), pair_expr.clone()),
    };
    let src = eval(&se, n, field, caps)?;
    let tgt = eval(&te, n, field, caps)?;
    let ma = eval(&piece(a), n, field, caps)?;
    let mb = eval(&piece(b), n, field, caps)?;
    let embed = tensor_embed(&ma, &mb);
    let ia = comp_index(a as u16, n);
    let ib = comp_index(b as u16, n);
    let itot = comp_index((a + b) as u16, n);
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    match kind {
        Pairing::SymMult | Pairing::DivMult => {
            for (alpha, &ga) in &ia {
                for (beta, &gb) in &ib {
                    let pair_idx = embed[ga * mb.dim() + gb];
                    let total: Weight = alpha.iter().zip(beta).map(|(&x, &y)| x + y).collect();
                    let coeff = match kind {
                        Pairing::DivMult => {
                            let mut c = 1u64;
                            for (x, y) in alpha.iter().zip(beta) {
                                c = c * binom_mod_p((x + y) as u64, *x as u64, p) % p;
                            }
                            c
                        }
                        _ => 1,
                    };
                    if coeff % p != 0 {
                        m.set(itot[&total], pair_idx, field.from_int(coeff));
                    }
                }
            }
        }
        Pairing::SymComult | Pairing::DivComult => {
            for (cw, &ci) in &itot {
                for (alpha, &ga) in &ia {
                    if alpha.iter().zip(cw).any(|(&x, &c)| x > c) {
                        continue;
                    }
                    let beta: Weight = cw.iter().zip(alpha).map(|(&c, &x)| c - x).collect();
                    let gb = ib[&beta];
                    let pair_idx = embed[ga * mb.dim() + gb];
                    let coeff = match kind {
                        Pairing::SymComult => {
                            let mut c = 1u64;
                            for (x, cc) in alpha.iter().zip(cw) {
                                c = c * binom_mod_p(*cc as u64, *x as u64, p) % p;
                            }
                            c
                        }
                        _ => 1,
                    };
                    if coeff % p != 0 {
                        m.set(pair_idx, ci, field.from_int(coeff));
                    }
                }
            }
        }
    }
    finish(name, se, te, src, tgt, m)
}

/// Id^(r) ↪ Sym(p)∘Id^(r−1) (or Sym(p^r) in the full form): the p-th power map.
fn frob_incl(
    r: u32,
    full: bool,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<NatMap, EngineError> {
    if r == 0 {
        return Err(EngineError::InvalidJob { detail: "frob_incl needs r >= 1".into() });
    }
    let p = field.p();
    let se = Expr::twist(Expr::Id, r);
    let te = if full {
        Expr::Sym(p.pow(r))
    } else {
        Expr::compose(Expr::Sym(p), Expr::twist(Expr::Id, r - 1))
    };
    let src = eval(&se, n, field, caps)?;
    let tgt = eval(&te, n, field, caps)?;
    let toff = tgt.offsets();
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    for (c, w) in src.blocks.keys().enumerate() {
        // source basis x_i of weight p^r ε_i maps to the p^r-th power
        // monomial, the unique target vector of the same weight
        let off = toff.get(w).copied().ok_or_else(|| EngineError::ShapeMismatch {
            detail: "frobenius power target block missing".into(),
        })?;
        debug_assert_eq!(tgt.block_dim(w), 1);
        m.set(off, c, 1);
    }
    finish(if full { "frob_incl_full" } else { "frob_incl" }, se, te, src, tgt, m)
}

/// 𝔰𝔲𝔪 : E^(a|s) → E over F_q (all coefficient twists are identities at k = F_q).
fn skew_sum(
    e: &Expr,
    a: u32,
    s: u32,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<NatMap, EngineError> {
    let caps = caps.with_degree_at_least(e.max_degree_at(field.p() as u64) * (field.p() as u64).pow(a * s.saturating_sub(1)));
    let se = Expr::MultiTwist(Box::new(e.clone()), a, s);
    let src = eval(&se, n, field, &caps)?;
    let tgt = eval(e, n, field, &caps)?;
    // the inner canonical basis vector g sits over one coordinate of k^n;
    // 𝔰𝔲𝔪 sends it there (coefficient twists are identities over F_q)
    let inner = eval(&multitwist_inner(a, s), n, field, &caps)?;
    let iw = inner.weight_of_index();
    let smat = Mat::from_fn(field, n, inner.dim(), |i, g| {
        u32::from(iw[g].iter().position(|&x| x != 0) == Some(i))
    });
    let raw = apply(e, &smat, &caps)?; // eval(e, ns) → eval(e, n)
    let fwd = super::apply::compose_perm(e, &multitwist_inner(a, s), n, field, &caps)?;
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    for rr in 0..raw.rows {
        for cc in 0..raw.cols {
            let v = raw.get(rr, cc);
            if v != 0 {
                m.set(rr, fwd[cc], v);
            }
        }
    }
    let certified = fq_natural(&se, e, &m, n, field, &caps)?;
    Ok(NatMap {
        name: "skew_sum".into(),
        source_expr: se,
        target_expr: e.clone(),
        source: src,
        target: tgt,
        matrix: m,
        certified,
    })
}

/// 𝔡𝔦𝔞𝔤 : E → E^(a|s) over F_q.
fn skew_diag(
    e: &Expr,
    a: u32,
    s: u32,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<NatMap, EngineError> {
    let caps = caps.with_degree_at_least(e.max_degree_at(field.p() as u64) * (field.p() as u64).pow(a * s.saturating_sub(1)));
    let te = Expr::MultiTwist(Box::new(e.clone()), a, s);
    let src = eval(e, n, field, &caps)?;
    let tgt = eval(&te, n, field, &caps)?;
    let inner = eval(&multitwist_inner(a, s), n, field, &caps)?;
    let iw = inner.weight_of_index();
    let dmat = Mat::from_fn(field, inner.dim(), n, |g, j| {
        u32::from(iw[g].iter().position(|&x| x != 0) == Some(j))
    });
    let raw = apply(e, &dmat, &caps)?; // eval(e, n) → eval(e, ns)
    let fwd = super::apply::compose_perm(e, &multitwist_inner(a, s), n, field, &caps)?;
    let mut m = Mat::zero(field, tgt.dim(), src.dim());
    for rr in 0..raw.rows {
        for cc in 0..raw.cols {
            let v = raw.get(rr, cc);
            if v != 0 {
                m.set(fwd[rr], cc, v);
            }
        }
    }
    let certified = fq_natural(e, &te, &m, n, field, &caps)?;
    Ok(NatMap {
        name: "skew_diag".into(),
        source_expr: e.clone(),
        target_expr: te,
        source: src,
        target: tgt,
        matrix: m,
        certified,
    })
}

/// 𝔦𝔰𝔬 : E ≅ E^(level) over F_q: the identity on basis labels.
fn skew_iso(
    e: &Expr,
    level: u32,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<NatMap, EngineError> {
    let caps = caps.with_degree_at_least(e.max_degree_at(field.p() as u64) * (field.p() as u64).pow(level));
    let te = Expr::twist(e.clone(), level);
    let src = eval(e, n, field, &caps)?;
    let tgt = eval(&te, n, field, &caps)?;
    let m = Mat::identity(field, src.dim());
    let certified = fq_natural(e, &te, &m, n, field, &caps)?;
    Ok(NatMap {
        name: "skew_iso".into(),
        source_expr: e.clone(),
        target_expr: te,
        source: src,
        target: tgt,
        matrix: m,
        certified,
    })
}

/// Naturality over F_q on random square matrices g: φ ∘ S(g) = T(g) ∘ φ.
fn fq_natural(
    se: &Expr,
    te: &Expr,
    m: &Mat,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<bool, EngineError> {
    let mut st = 0x5eed_1234u64;
    let q = field.q() as u64;
    for _ in 0..20 {
        let g = Mat::from_fn(field, n, n, |_, _| {
            st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((st >> 33) % q) as Fel
        });
        let sg = apply(se, &g, caps)?;
        let tg = apply(te, &g, caps)?;
        if m.mul(&sg) != tg.mul(m) {
            return Ok(false);
        }
    }
    Ok(true)
}
