//! Functorial action on matrices: apply(E, f) is the matrix of E(f) in the
//! canonical bases of eval(E, a) and eval(E, b), for f: k^a → k^b.
//!
//! The recursion is generic over the scalar ring so that composition
//! operators can be extracted from matrices over GF(q)[t]/(t^D).

use super::eval::{
    compositions, eval, leaf_dim, multitwist_inner, param_inner, words_of_content, Caps,
};
use super::expr::Expr;
use super::module::{Weight, WeightedModule};
use crate::error::EngineError;
use crate::field::{binom_mod_p, FqCtx, FqRing, Mat, PolyMat, RingCtx};
use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

/// Matrix of E(f) over the base field.
pub fn apply(expr: &Expr, f: &Mat, caps: &Caps) -> Result<Mat, EngineError> {
    let pm = PolyMat::<FqRing>::from_mat(f);
    let out = apply_in(expr, &pm, f.field(), caps)?;
    Ok(out.to_mat())
}

fn ring_pow<C: RingCtx>(ring: &C, x: &C::El, k: u16) -> C::El {
    let mut acc = ring.one();
    for _ in 0..k {
        acc = ring.mul(&acc, x);
    }
    acc
}

struct Locator {
    weights: Vec<Weight>,
    offsets: BTreeMap<Weight, usize>,
    dims: BTreeMap<Weight, usize>,
}

impl Locator {
    fn new(m: &WeightedModule) -> Locator {
        Locator { weights: m.weight_of_index(), offsets: m.offsets(), dims: m.blocks.clone() }
    }

    fn local(&self, g: usize) -> (&Weight, usize) {
        let w = &self.weights[g];
        (w, g - self.offsets[w])
    }
}

/// Generic-scalar apply; `f` is tgt_rank × src_rank.
pub fn apply_in<C: RingCtx>(
    expr: &Expr,
    f: &PolyMat<C>,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<PolyMat<C>, EngineError> {
    let (a, b) = (f.cols, f.rows);
    let ring = &f.ring;
    let p = field.p() as u64;
    match expr {
        Expr::Id => {
            // eval(Id, n) sorts the unit weights ascending, so its canonical
            // basis is e_n, …, e_1; conjugate by the reversal
            let mut out = PolyMat::zero(ring, b, a);
            for i in 0..b {
                for j in 0..a {
                    out.set(i, j, f.get(b - 1 - i, a - 1 - j).clone());
                }
            }
            Ok(out)
        }
        Expr::Sym(d) => {
            let d = *d as u16;
            let src = compositions(d, a);
            let tgt = compositions(d, b);
            let tgt_idx: HashMap<Weight, usize> =
                tgt.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
            let mut out = PolyMat::zero(ring, tgt.len(), src.len());
            for (ci, mu) in src.iter().enumerate() {
                let mut acc: BTreeMap<Weight, C::El> = BTreeMap::new();
                acc.insert(vec![0u16; b], ring.one());
                for (i, &mult) in mu.iter().enumerate() {
                    for _ in 0..mult {
                        let mut next: BTreeMap<Weight, C::El> = BTreeMap::new();
                        for (e, v) in &acc {
                            for u in 0..b {
                                let c = f.get(u, i);
                                if ring.is_zero(c) {
                                    continue;
                                }
                                let mut e2 = e.clone();
                                e2[u] += 1;
                                let add = ring.mul(v, c);
                                let slot = next.entry(e2).or_insert_with(|| ring.zero());
                                *slot = ring.add(slot, &add);
                            }
                        }
                        acc = next;
                    }
                }
                for (e, v) in acc {
                    if !ring.is_zero(&v) {
                        out.set(tgt_idx[&e], ci, v);
                    }
                }
            }
            Ok(out)
        }
        Expr::Div(d) => {
            let d = *d as u16;
            let src = compositions(d, a);
            let tgt = compositions(d, b);
            let tgt_idx: HashMap<Weight, usize> =
                tgt.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
            let mut out = PolyMat::zero(ring, tgt.len(), src.len());
            for (ci, mu) in src.iter().enumerate() {
                // Π_i γ_{mu_i}(f·x_i), divided products with binomial carries
                let mut acc: BTreeMap<Weight, C::El> = BTreeMap::new();
                acc.insert(vec![0u16; b], ring.one());
                for (i, &mult) in mu.iter().enumerate() {
                    if mult == 0 {
                        continue;
                    }
                    let mut next: BTreeMap<Weight, C::El> = BTreeMap::new();
                    for nu in compositions(mult, b) {
                        // coefficient Π_u col[u]^{nu_u}
                        let mut coeff = ring.one();
                        let mut zero = false;
                        for (u, &nuu) in nu.iter().enumerate() {
                            if nuu > 0 {
                                let c = f.get(u, i);
                                if ring.is_zero(c) {
                                    zero = true;
                                    break;
                                }
                                coeff = ring.mul(&coeff, &ring_pow(ring, c, nuu));
                            }
                        }
                        if zero || ring.is_zero(&coeff) {
                            continue;
                        }
                        for (e, v) in &acc {
                            // γ_e · γ_nu = Π_u C(e_u + nu_u, nu_u) γ_{e+nu}
                            let mut carry = 1u64;
                            for (u, &nuu) in nu.iter().enumerate() {
                                if nuu > 0 {
                                    carry = carry
                                        * binom_mod_p((e[u] + nuu) as u64, nuu as u64, p)
                                        % p;
                                }
                            }
                            if carry == 0 {
                                continue;
                            }
                            let mut e2 = e.clone();
                            for (slot, &nuu) in e2.iter_mut().zip(&nu) {
                                *slot += nuu;
                            }
                            let term = ring.mul(
                                &ring.mul(v, &coeff),
                                &ring.from_fel(carry as u32),
                            );
                            let slot = next.entry(e2).or_insert_with(|| ring.zero());
                            *slot = ring.add(slot, &term);
                        }
                    }
                    acc = next;
                }
                for (e, v) in acc {
                    if !ring.is_zero(&v) {
                        out.set(tgt_idx[&e], ci, v);
                    }
                }
            }
            Ok(out)
        }
        Expr::Ext(d) => {
            let d = *d as usize;
            let src: Vec<Vec<usize>> = subsets(a, d);
            let tgt: Vec<Vec<usize>> = subsets(b, d);
            let mut out = PolyMat::zero(ring, tgt.len(), src.len());
            for (ci, s) in src.iter().enumerate() {
                for (ri, t) in tgt.iter().enumerate() {
                    let det = minor_det(ring, f, t, s);
                    if !ring.is_zero(&det) {
                        out.set(ri, ci, det);
                    }
                }
            }
            Ok(out)
        }
        Expr::Ten(d) => {
            let d = *d as u16;
            let src_words = ten_basis(d, a);
            let tgt_words = ten_basis(d, b);
            let mut out = PolyMat::zero(ring, tgt_words.len(), src_words.len());
            for (ci, w) in src_words.iter().enumerate() {
                for (ri, u) in tgt_words.iter().enumerate() {
                    let mut prod = ring.one();
                    let mut zero = false;
                    for (x, y) in u.iter().zip(w) {
                        let c = f.get(*x as usize - 1, *y as usize - 1);
                        if ring.is_zero(c) {
                            zero = true;
                            break;
                        }
                        prod = ring.mul(&prod, c);
                    }
                    if !zero && !ring.is_zero(&prod) {
                        out.set(ri, ci, prod);
                    }
                }
            }
            Ok(out)
        }
        Expr::Twist(e, r) => apply_in(e, &f.frobenius(*r), field, caps),
        Expr::MultiTwist(e, aa, s) => {
            let inner = multitwist_inner(*aa, *s);
            apply_compose(e, &inner, f, field, caps)
        }
        Expr::Param(e, dims) => match param_inner(dims) {
            Some(inner) => apply_compose(e, &inner, f, field, caps),
            None => {
                let dim0 = eval(e, 0, field, caps)?.dim();
                Ok(PolyMat::identity(ring, dim0))
            }
        },
        Expr::Compose(x, y) => apply_compose(x, y, f, field, caps),
        Expr::Sum(x, y) => {
            let fa = apply_in(x, f, field, caps)?;
            let fb = apply_in(y, f, field, caps)?;
            let (sa, sb) = (eval(x, a, field, caps)?, eval(y, a, field, caps)?);
            let (ta, tb) = (eval(x, b, field, caps)?, eval(y, b, field, caps)?);
            let src_embed = sum_embeds(&[&sa, &sb]);
            let tgt_embed = sum_embeds(&[&ta, &tb]);
            let mut out =
                PolyMat::zero(ring, tb.dim() + ta.dim(), sa.dim() + sb.dim());
            for (pi, part) in [&fa, &fb].into_iter().enumerate() {
                for r in 0..part.rows {
                    for c in 0..part.cols {
                        let v = part.get(r, c);
                        if !ring.is_zero(v) {
                            out.set(tgt_embed[pi][r], src_embed[pi][c], v.clone());
                        }
                    }
                }
            }
            Ok(out)
        }
        Expr::Tensor(x, y) => {
            let fa = apply_in(x, f, field, caps)?;
            let fb = apply_in(y, f, field, caps)?;
            let (sa, sb) = (eval(x, a, field, caps)?, eval(y, a, field, caps)?);
            let (ta, tb) = (eval(x, b, field, caps)?, eval(y, b, field, caps)?);
            let src_embed = tensor_embed(&sa, &sb);
            let tgt_embed = tensor_embed(&ta, &tb);
            let mut out = PolyMat::zero(ring, ta.dim() * tb.dim(), sa.dim() * sb.dim());
            for r1 in 0..fa.rows {
                for c1 in 0..fa.cols {
                    let v1 = fa.get(r1, c1);
                    if ring.is_zero(v1) {
                        continue;
                    }
                    for r2 in 0..fb.rows {
                        for c2 in 0..fb.cols {
                            let v2 = fb.get(r2, c2);
                            if ring.is_zero(v2) {
                                continue;
                            }
                            out.set(
                                tgt_embed[r1 * fb.rows + r2],
                                src_embed[c1 * fb.cols + c2],
                                ring.mul(v1, v2),
                            );
                        }
                    }
                }
            }
            Ok(out)
        }
        Expr::Kuhn(e) => Ok(apply_in(e, &f.transpose(), field, caps)?.transpose()),
        Expr::CDual(e) => apply_in(e, &f.transpose(), field, caps),
    }
}

fn apply_compose<C: RingCtx>(
    outer: &Expr,
    inner: &Expr,
    f: &PolyMat<C>,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<PolyMat<C>, EngineError> {
    let inner_f = apply_in(inner, f, field, caps)?;
    let big = apply_in(outer, &inner_f, field, caps)?;
    // permute into the degree-relabeled canonical order of the composite
    let fwd_src = compose_perm(outer, inner, f.cols, field, caps)?;
    let fwd_tgt = compose_perm(outer, inner, f.rows, field, caps)?;
    let ring = &f.ring;
    let mut out = PolyMat::zero(ring, big.rows, big.cols);
    for r in 0..big.rows {
        for c in 0..big.cols {
            let v = big.get(r, c);
            if !ring.is_zero(v) {
                out.set(fwd_tgt[r], fwd_src[c], v.clone());
            }
        }
    }
    Ok(out)
}

/// Permutation big-canonical → composite-canonical used by eval's relabel.
pub fn compose_perm(
    outer: &Expr,
    inner_expr: &Expr,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<Vec<usize>, EngineError> {
    let inner = eval(inner_expr, n, field, caps)?;
    let mprime = inner.dim();
    if mprime > caps.max_inner_rank {
        return Err(EngineError::RankCap { needed: mprime, cap: caps.max_inner_rank });
    }
    let big = eval(outer, mprime, field, caps)?;
    let inner_weights = inner.weight_of_index();
    let new_weights: Vec<Weight> = big
        .weight_of_index()
        .iter()
        .map(|kappa| {
            let mut w = vec![0u16; n];
            for (j, &kj) in kappa.iter().enumerate() {
                if kj != 0 {
                    for (slot, &vj) in w.iter_mut().zip(&inner_weights[j]) {
                        *slot += kj * vj;
                    }
                }
            }
            w
        })
        .collect();
    let mut order: Vec<usize> = (0..new_weights.len()).collect();
    order.sort_by(|&x, &y| new_weights[x].cmp(&new_weights[y]).then(x.cmp(&y)));
    let mut fwd = vec![0usize; order.len()];
    for (new_idx, &old_idx) in order.iter().enumerate() {
        fwd[old_idx] = new_idx;
    }
    Ok(fwd)
}

/// Canonical basis of Ten(d) at rank n: blocks ascending, words lex within.
fn ten_basis(d: u16, n: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for w in compositions(d, n) {
        out.extend(words_of_content(&w));
    }
    out
}

/// Size-d subsets of 0..n in the block order of Ext(d): ascending by
/// indicator weight (lexicographic), which is what eval uses.
fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let comps = compositions(d as u16, n);
    comps
        .into_iter()
        .filter(|w| w.iter().all(|&c| c <= 1))
        .map(|w| w.iter().enumerate().filter(|(_, &c)| c == 1).map(|(i, _)| i).collect())
        .collect()
}

fn minor_det<C: RingCtx>(ring: &C, f: &PolyMat<C>, rows: &[usize], cols: &[usize]) -> C::El {
    // Laplace along the first column; fine at the small degrees we support
    match cols.len() {
        0 => ring.one(),
        1 => f.get(rows[0], cols[0]).clone(),
        _ => {
            let mut acc = ring.zero();
            let rest: Vec<usize> = cols[1..].to_vec();
            for (k, &r) in rows.iter().enumerate() {
                let c = f.get(r, cols[0]);
                if ring.is_zero(c) {
                    continue;
                }
                let sub_rows: Vec<usize> =
                    rows.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, &x)| x).collect();
                let sub = minor_det(ring, f, &sub_rows, &rest);
                let term = ring.mul(c, &sub);
                let signed = if k % 2 == 0 { term } else { ring.neg(&term) };
                acc = ring.add(&acc, &signed);
            }
            acc
        }
    }
}

/// Per-summand map: summand global index → merged global index.
pub fn sum_embeds(parts: &[&WeightedModule]) -> Vec<Vec<usize>> {
    let (merged, block_embeds) = WeightedModule::direct_sum(parts);
    let merged_offsets = merged.offsets();
    parts
        .iter()
        .enumerate()
        .map(|(pi, part)| {
            let loc = Locator::new(part);
            (0..part.dim())
                .map(|g| {
                    let (w, local) = loc.local(g);
                    merged_offsets[w] + block_embeds[pi][w] + local
                })
                .collect()
        })
        .collect()
}

/// Pair index (row-major over a × b global indices) → tensor-canonical global index.
pub fn tensor_embed(a: &WeightedModule, b: &WeightedModule) -> Vec<usize> {
    let layout = super::module::TensorLayout::new(a, b);
    let mut offsets = BTreeMap::new();
    let mut off = 0;
    for (w, d) in &layout.blocks {
        offsets.insert(w.clone(), off);
        off += d;
    }
    let la = Locator::new(a);
    let lb = Locator::new(b);
    let mut out = vec![0usize; a.dim() * b.dim()];
    for ga in 0..a.dim() {
        let (w1, l1) = la.local(ga);
        for gb in 0..b.dim() {
            let (w2, l2) = lb.local(gb);
            let w: Weight = w1.iter().zip(w2).map(|(&x, &y)| x + y).collect();
            let pair_off = layout.pair_offset(&w, w1, w2).expect("pair exists");
            let d2 = b.block_dim(w2);
            out[ga * b.dim() + gb] = offsets[&w] + pair_off + l1 * d2 + l2;
        }
    }
    out
}

/// `leaf_dim` re-export check helper (dims match eval) kept for tests.
pub fn expected_leaf_dim(expr: &Expr, n: usize) -> Option<usize> {
    leaf_dim(expr, n)
}
