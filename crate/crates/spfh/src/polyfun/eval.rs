//! Evaluation of functor expressions at k^n as weight-graded Schur-algebra
//! modules.
//!
//! Leaves get their operator matrices from closed combinatorial formulas.
//! Twists relabel (the twisted e_i^(m·p^r) is the original e_i^(m)).
//! Compositions — including mtwist and param, which desugar to compositions
//! with a sum of twisted identities — extract operators as t-coefficients of
//! the outer functor applied to inner(I + t·E_{i,i+1}) over GF(q)[t]/(t^D+1).

use super::apply::apply_in;
use super::expr::Expr;
use super::module::{op_target, BlockShift, OpKind, Weight, WeightedModule};
use crate::error::EngineError;
use crate::field::{binom_mod_p, Fel, FqCtx, Mat, PolyMat, TPolyRing};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

/// Resource caps; evaluation refuses (with a structured error) to cross them.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Largest homogeneous degree evaluated (spec default 10).
    pub max_degree: u64,
    /// Largest inner rank for compositions.
    pub max_inner_rank: usize,
    /// Largest total dimension of a single evaluation.
    pub max_eval_dim: usize,
    /// Largest column count of a single weight block in resolutions.
    pub max_block_cols: usize,
    /// Largest per-object dimension in the truncated category.
    pub max_object_dim: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_degree: 10,
            max_inner_rank: 64,
            max_eval_dim: 5_000_000,
            max_block_cols: 200_000,
            max_object_dim: 1 << 20,
        }
    }
}

impl Caps {
    /// A copy with the degree cap raised to at least `d` (internal pipelines
    /// that slice multitwists need components beyond the user-facing cap).
    pub fn with_degree_at_least(&self, d: u64) -> Caps {
        let mut c = self.clone();
        c.max_degree = c.max_degree.max(d);
        c
    }
}

/// All compositions of d into n parts, ascending lexicographic order.
pub fn compositions(d: u16, n: usize) -> Vec<Weight> {
    fn go(d: u16, n: usize, cur: &mut Weight, out: &mut Vec<Weight>) {
        if n == 1 {
            cur.push(d);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 0..=d {
            cur.push(first);
            go(d - first, n - 1, cur, out);
            cur.pop();
        }
    }
    if n == 0 {
        return if d == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    go(d, n, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// Words (1-based letters) with the given content, ascending lexicographic order.
pub fn words_of_content(w: &Weight) -> Vec<Vec<u8>> {
    let d: u16 = w.iter().sum();
    let mut letters = Vec::with_capacity(d as usize);
    for (i, &c) in w.iter().enumerate() {
        for _ in 0..c {
            letters.push((i + 1) as u8);
        }
    }
    // lex-ordered distinct permutations
    let mut out = Vec::new();
    permute_distinct(&mut letters, 0, &mut out);
    out.sort();
    out
}

fn permute_distinct(letters: &mut Vec<u8>, k: usize, out: &mut Vec<Vec<u8>>) {
    if k == letters.len() {
        out.push(letters.clone());
        return;
    }
    let mut seen = [false; 256];
    for i in k..letters.len() {
        let c = letters[i];
        if seen[c as usize] {
            continue;
        }
        seen[c as usize] = true;
        letters.swap(k, i);
        permute_distinct(letters, k + 1, out);
        letters.swap(k, i);
    }
}

pub fn multinomial_dim(w: &Weight) -> usize {
    let d: u64 = w.iter().map(|&x| x as u64).sum();
    let mut num = 1u128;
    let mut rem = d;
    for &c in w {
        // C(rem, c)
        let mut b = 1u128;
        for t in 0..c as u64 {
            b = b * (rem - t) as u128 / (t as u128 + 1);
        }
        num *= b;
        rem -= c as u64;
    }
    num as usize
}

fn binom_usize(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let mut out = 1u128;
    for t in 0..b {
        out = out * (a - t) as u128 / (t as u128 + 1);
    }
    out as usize
}

/// Closed-form dimension of a leaf evaluation.
pub fn leaf_dim(expr: &Expr, n: usize) -> Option<usize> {
    Some(match expr {
        Expr::Id => n,
        Expr::Sym(d) | Expr::Div(d) => {
            if *d == 0 {
                1
            } else {
                binom_usize(n + *d as usize - 1, *d as usize)
            }
        }
        Expr::Ext(d) => binom_usize(n, *d as usize),
        Expr::Ten(d) => n.checked_pow(*d)?,
        _ => return None,
    })
}

fn leaf(expr: &Expr, n: usize, field: &Arc<FqCtx>, caps: &Caps) -> Result<WeightedModule, EngineError> {
    if let Some(dim) = leaf_dim(expr, n) {
        if dim > caps.max_eval_dim {
            return Err(EngineError::RankCap { needed: dim, cap: caps.max_eval_dim });
        }
    }
    let p = field.p() as u64;
    let mut m = WeightedModule::empty(field, n);
    match expr {
        Expr::Id => {
            for i in 0..n {
                m.blocks.insert(unit_weight(n, i), 1);
            }
            for i in 1..n as u16 {
                let one = Mat::from_fn(field, 1, 1, |_, _| 1);
                let mut es = BlockShift::default();
                es.blocks.insert(unit_weight(n, i as usize), one.clone());
                m.ops.insert((OpKind::E, i, 1), es);
                let mut fs = BlockShift::default();
                fs.blocks.insert(unit_weight(n, i as usize - 1), one);
                m.ops.insert((OpKind::F, i, 1), fs);
            }
        }
        Expr::Sym(d) | Expr::Div(d) => {
            let is_div = matches!(expr, Expr::Div(_));
            for w in compositions(*d as u16, n) {
                m.blocks.insert(w, 1);
            }
            for i in 1..n as u16 {
                for mm in 1..=*d as u16 {
                    for kind in [OpKind::E, OpKind::F] {
                        let op = (kind, i, mm);
                        let mut shift = BlockShift::default();
                        for w in m.blocks.keys() {
                            let Some(tgt) = op_target(op, w) else { continue };
                            let ii = i as usize - 1;
                            let coeff = if is_div {
                                // γ_w ↦ C(w[to] + m, m) γ_tgt
                                let to = if kind == OpKind::E { ii } else { ii + 1 };
                                binom_mod_p(w[to] as u64 + mm as u64, mm as u64, p)
                            } else {
                                // x^w ↦ C(w[from], m) x^tgt
                                let from = if kind == OpKind::E { ii + 1 } else { ii };
                                binom_mod_p(w[from] as u64, mm as u64, p)
                            };
                            if coeff % p == 0 {
                                continue;
                            }
                            let _ = tgt;
                            let mat = Mat::from_fn(field, 1, 1, |_, _| (coeff % p) as Fel);
                            shift.blocks.insert(w.clone(), mat);
                        }
                        if !shift.blocks.is_empty() {
                            m.ops.insert(op, shift);
                        }
                    }
                }
            }
        }
        Expr::Ext(d) => {
            for w in compositions(*d as u16, n) {
                if w.iter().all(|&c| c <= 1) {
                    m.blocks.insert(w, 1);
                }
            }
            for i in 1..n as u16 {
                for kind in [OpKind::E, OpKind::F] {
                    let op = (kind, i, 1);
                    let mut shift = BlockShift::default();
                    for w in m.blocks.keys() {
                        let Some(tgt) = op_target(op, w) else { continue };
                        if tgt.iter().any(|&c| c > 1) {
                            continue;
                        }
                        let mat = Mat::from_fn(field, 1, 1, |_, _| 1);
                        shift.blocks.insert(w.clone(), mat);
                    }
                    if !shift.blocks.is_empty() {
                        m.ops.insert(op, shift);
                    }
                }
            }
        }
        Expr::Ten(d) => {
            let mut word_index: HashMap<Weight, HashMap<Vec<u8>, usize>> = HashMap::new();
            for w in compositions(*d as u16, n) {
                let words = words_of_content(&w);
                if words.is_empty() {
                    continue;
                }
                let idx: HashMap<Vec<u8>, usize> =
                    words.iter().enumerate().map(|(k, v)| (v.clone(), k)).collect();
                m.blocks.insert(w.clone(), words.len());
                word_index.insert(w, idx);
            }
            for i in 1..n as u16 {
                for mm in 1..=*d as u16 {
                    for kind in [OpKind::E, OpKind::F] {
                        let op = (kind, i, mm);
                        let (from, to) = match kind {
                            OpKind::E => (i as u8 + 1, i as u8),
                            OpKind::F => (i as u8, i as u8 + 1),
                        };
                        let mut shift = BlockShift::default();
                        for (w, &sdim) in &m.blocks {
                            let Some(tgt) = op_target(op, w) else { continue };
                            let Some(tidx) = word_index.get(&tgt) else { continue };
                            let src_words = words_of_content(w);
                            let mut mat = Mat::zero(field, tidx.len(), sdim);
                            for (c, word) in src_words.iter().enumerate() {
                                let positions: Vec<usize> = word
                                    .iter()
                                    .enumerate()
                                    .filter(|(_, &l)| l == from)
                                    .map(|(t, _)| t)
                                    .collect();
                                for subset in k_subsets(&positions, mm as usize) {
                                    let mut tw = word.clone();
                                    for &t in &subset {
                                        tw[t] = to;
                                    }
                                    let r = tidx[&tw];
                                    let cur = mat.get(r, c);
                                    mat.set(r, c, field.add(cur, 1));
                                }
                            }
                            if !mat.is_zero() {
                                shift.blocks.insert(w.clone(), mat);
                            }
                        }
                        if !shift.blocks.is_empty() {
                            m.ops.insert(op, shift);
                        }
                    }
                }
            }
        }
        _ => unreachable!("leaf() called on non-leaf"),
    }
    Ok(m)
}

fn unit_weight(n: usize, i: usize) -> Weight {
    let mut w = vec![0u16; n];
    w[i] = 1;
    w
}

fn k_subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > items.len() {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        // next combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + items.len() - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The inner direct sum I^(0) ⊕ I^(a) ⊕ … ⊕ I^((s−1)a) behind mtwist.
pub fn multitwist_inner(a: u32, s: u32) -> Expr {
    let mut it = (0..s).map(|j| Expr::twist(Expr::Id, j * a));
    let first = it.next().expect("s >= 1");
    it.fold(first, Expr::sum)
}

/// The inner sum of dim(V) copies of the identity behind param.
pub fn param_inner(dims: &[u32]) -> Option<Expr> {
    let total: u32 = dims.iter().sum();
    if total == 0 {
        return None;
    }
    let mut it = (0..total).map(|_| Expr::Id);
    let first = it.next().unwrap();
    Some(it.fold(first, Expr::sum))
}

type MemoKey = (u64, usize, u64, u32);
static EVAL_MEMO: OnceLock<Mutex<HashMap<MemoKey, Arc<WeightedModule>>>> = OnceLock::new();

fn memo() -> &'static Mutex<HashMap<MemoKey, Arc<WeightedModule>>> {
    EVAL_MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Evaluate a (covariant) functor expression on k^n. The result may be
/// inhomogeneous (a direct sum of homogeneous pieces, split on demand).
pub fn eval(
    expr: &Expr,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<Arc<WeightedModule>, EngineError> {
    let p = field.p() as u64;
    let maxdeg = expr.max_degree_at(p);
    if maxdeg > caps.max_degree {
        return Err(EngineError::DegreeCap {
            expr: expr.to_string(),
            degree: maxdeg,
            cap: caps.max_degree,
        });
    }
    let key = (expr.hash64(), n, field.spec.p, field.spec.r);
    if let Some(hit) = memo().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let mut m = eval_raw(expr, n, field, caps)?;
    m.faithful = m.degrees().last().map_or(true, |&d| n >= d as usize);
    if m.dim() > caps.max_eval_dim {
        return Err(EngineError::RankCap { needed: m.dim(), cap: caps.max_eval_dim });
    }
    let arc = Arc::new(m);
    memo().lock().unwrap().insert(key, arc.clone());
    Ok(arc)
}

/// Evaluate and insist on a single homogeneous piece.
pub fn eval_homogeneous(
    expr: &Expr,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<Arc<WeightedModule>, EngineError> {
    let m = eval(expr, n, field, caps)?;
    if !m.is_homogeneous() {
        return Err(EngineError::ShapeMismatch {
            detail: format!("{expr} is not homogeneous on k^{n}"),
        });
    }
    Ok(m)
}

fn eval_raw(
    expr: &Expr,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<WeightedModule, EngineError> {
    match expr {
        Expr::Id | Expr::Sym(_) | Expr::Ext(_) | Expr::Div(_) | Expr::Ten(_) => {
            leaf(expr, n, field, caps)
        }
        Expr::Twist(e, r) => Ok(eval(e, n, field, caps)?.twist(*r)),
        Expr::Sum(a, b) => {
            let ma = eval(a, n, field, caps)?;
            let mb = eval(b, n, field, caps)?;
            Ok(WeightedModule::direct_sum(&[&ma, &mb]).0)
        }
        Expr::Tensor(a, b) => {
            let ma = eval(a, n, field, caps)?;
            let mb = eval(b, n, field, caps)?;
            Ok(WeightedModule::tensor(&ma, &mb))
        }
        Expr::MultiTwist(e, a, s) => {
            let inner = multitwist_inner(*a, *s);
            compose_general(e, &inner, n, field, caps)
        }
        Expr::Param(e, dims) => match param_inner(dims) {
            Some(inner) => compose_general(e, &inner, n, field, caps),
            None => {
                // V = 0: only the degree-0 part of E survives
                let zero = eval(e, 0, field, caps)?;
                let mut m = WeightedModule::empty(field, n);
                if zero.dim() > 0 {
                    m.blocks.insert(vec![0; n], zero.dim());
                }
                Ok(m)
            }
        },
        Expr::Compose(a, b) => compose_general(a, b, n, field, caps),
        Expr::Kuhn(e) => Ok(eval(e, n, field, caps)?.kuhn_dual()),
        Expr::CDual(_) => Err(EngineError::Contravariant { expr: expr.to_string() }),
    }
}

fn compose_general(
    outer: &Expr,
    inner_expr: &Expr,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<WeightedModule, EngineError> {
    let inner = eval(inner_expr, n, field, caps)?;
    let mprime = inner.dim();
    if mprime > caps.max_inner_rank {
        return Err(EngineError::RankCap { needed: mprime, cap: caps.max_inner_rank });
    }
    let big = eval(outer, mprime, field, caps)?;
    let inner_weights = inner.weight_of_index();
    let big_weights = big.weight_of_index();
    let new_weights: Vec<Weight> = big_weights
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
    let shell = WeightedModule {
        field: field.clone(),
        n: mprime,
        blocks: big.blocks.clone(),
        ops: BTreeMap::new(),
        faithful: true,
    };
    let (mut out, fwd) = shell.relabel(&new_weights);
    out.n = n;
    let out_weights = out.weight_of_index();
    let out_offsets = out.offsets();
    let maxdeg = out.degrees().last().copied().unwrap_or(0) as usize;
    let tring = TPolyRing { base: field.clone(), cap: maxdeg };
    let inner_offsets = inner.offsets();
    for kind in [OpKind::E, OpKind::F] {
        for i in 1..n as u16 {
            // inner(x_i(t)) = Σ_m ρ_inner(op^(m)) t^m, m = 0 term the identity
            let mut a_t = PolyMat::identity(&tring, mprime);
            let mut any = false;
            for ((k2, i2, m2), shift) in &inner.ops {
                if *k2 != kind || *i2 != i {
                    continue;
                }
                for (srcw, mat) in &shift.blocks {
                    let tgtw = op_target((*k2, *i2, *m2), srcw).unwrap();
                    let (Some(&so), Some(&to)) = (inner_offsets.get(srcw), inner_offsets.get(&tgtw))
                    else {
                        continue;
                    };
                    for r in 0..mat.rows {
                        for c in 0..mat.cols {
                            let v = mat.get(r, c);
                            if v != 0 {
                                let mut poly = a_t.get(to + r, so + c).clone();
                                while poly.0.len() <= *m2 as usize {
                                    poly.0.push(0);
                                }
                                poly.0[*m2 as usize] = field.add(poly.0[*m2 as usize], v);
                                a_t.set(to + r, so + c, poly);
                                any = true;
                            }
                        }
                    }
                }
            }
            if !any {
                continue;
            }
            let bmat = apply_in(outer, &a_t, field, caps)?;
            for m in 1..=maxdeg {
                let coeff = bmat.coeff(m);
                if coeff.is_zero() {
                    continue;
                }
                let op = (kind, i, m as u16);
                let mut entries: BTreeMap<Weight, Vec<(usize, usize, Fel)>> = BTreeMap::new();
                for r in 0..coeff.rows {
                    for c in 0..coeff.cols {
                        let v = coeff.get(r, c);
                        if v == 0 {
                            continue;
                        }
                        let (gs, gt) = (fwd[c], fwd[r]);
                        let sw = &out_weights[gs];
                        let tw = &out_weights[gt];
                        debug_assert_eq!(op_target(op, sw).as_ref(), Some(tw));
                        entries.entry(sw.clone()).or_default().push((gt, gs, v));
                    }
                }
                let mut shift = BlockShift::default();
                for (sw, es) in entries {
                    let tw = op_target(op, &sw).unwrap();
                    let mut mat =
                        Mat::zero(field, out.block_dim(&tw), out.block_dim(&sw));
                    let (so, to) = (out_offsets[&sw], out_offsets[&tw]);
                    for (gt, gs, v) in es {
                        mat.set(gt - to, gs - so, v);
                    }
                    shift.blocks.insert(sw, mat);
                }
                out.ops.insert(op, shift);
            }
        }
    }
    Ok(out)
}

/// The labeled block of a module at one weight (dimension and offset).
pub fn weight_space(m: &WeightedModule, w: &Weight) -> (usize, usize) {
    let dim = m.block_dim(w);
    let off = m.offsets().get(w).copied().unwrap_or(0);
    (dim, off)
}
