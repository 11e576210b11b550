//! Yoneda machinery: Hom(Γ^λ, M) ≅ M_λ made effective.
//!
//! For each shape λ we run the operator closure of the canonical generator
//! γ_λ once, recording a replay trace (which operator applied to which
//! already-collected vector produced each new basis vector) and, per weight,
//! the inverse of the collected-vector matrix. Transporting the trace with
//! carries in any module M then realizes the module map Γ^λ → M attached to
//! a generator value v ∈ M_λ — by the Yoneda lemma the map exists, so the
//! transport is consistent; we certify anyway where it matters.

use super::ModuleMap;
use crate::error::EngineError;
use crate::field::{Echelon, Fel, FqCtx, Mat};
use crate::polyfun::{eval, Caps, Expr, OpKind, Weight, WeightedModule};
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayStep {
    /// Index into the collected list whose vector the operator is applied to.
    pub src: usize,
    pub op: (OpKind, u16, u16),
}

/// The cached closure data of one Γ^λ at one rank.
pub struct GammaInfo {
    pub lambda: Weight,
    pub module: Arc<WeightedModule>,
    /// Global index of the canonical generator γ_λ inside the λ-weight block.
    pub gen_global: usize,
    /// Steps 1..dim (step t produced collected vector t; vector 0 is γ_λ).
    pub replay: Vec<ReplayStep>,
    /// Weight of each collected vector.
    pub collect_weight: Vec<Weight>,
    /// Per weight: positions (collection indices) of its vectors, in order.
    pub slots: BTreeMap<Weight, Vec<usize>>,
    /// Per weight: inverse of the matrix whose columns are the collected
    /// vectors of that weight (block coordinates).
    pub inv: BTreeMap<Weight, Mat>,
}

type GammaKey = (Weight, usize, u64, u32);
static GAMMA_CACHE: OnceLock<Mutex<HashMap<GammaKey, Arc<GammaInfo>>>> = OnceLock::new();

fn cache() -> &'static Mutex<HashMap<GammaKey, Arc<GammaInfo>>> {
    GAMMA_CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Evaluate Γ^λ and compute (or fetch) its closure trace.
pub fn gamma_info(
    lambda: &Weight,
    n: usize,
    field: &Arc<FqCtx>,
    caps: &Caps,
) -> Result<Arc<GammaInfo>, EngineError> {
    let key = (lambda.clone(), n, field.spec.p, field.spec.r);
    if let Some(hit) = cache().lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let expr = Expr::gamma_lambda(lambda);
    let module = eval(&expr, n, field, caps)?;
    let gen_global = generator_index(lambda, &module);
    let info = close_from(module.clone(), lambda.clone(), gen_global)?;
    let arc = Arc::new(info);
    cache().lock().unwrap().insert(key, arc.clone());
    Ok(arc)
}

/// Global index of γ_λ = x_1^(λ1) ⊗ … ⊗ x_n^(λn) in the canonical basis.
fn generator_index(lambda: &Weight, module: &WeightedModule) -> usize {
    // Γ^λ = Div(λ1) ⊗ … : the canonical generator is the basis vector of the
    // λ-weight block whose tensor label is (λ1·ε1, …, λn·εn). Factors are
    // multiplicity-one per weight, so the label is determined by the chain of
    // tensor-pair offsets; we locate it by walking the tensor layouts.
    // Because every Div factor has one basis vector per weight, the pair
    // (μ1, …, μn) with μi = λi·εi is a single basis vector; its offset within
    // the λ-block is the accumulated pair offset in the left-fold tensor
    // layout. Rather than re-deriving the fold here, we use that the label
    // components are the lexicographically largest weights summing to λ that
    // are reachable: μi = λi·εi is the unique tuple with support in slot i.
    // The left-fold pair order sorts by (w_left, w_right); we compute the
    // offset by rebuilding the fold over the factor block sets.
    let n = module.n;
    let offsets = module.offsets();
    let base = offsets[lambda];
    // factor weight lists: Div(λi) at rank n has one vector per composition
    // of λi; the left fold accumulates pairs in lex order of (acc, next).
    // We simulate the fold tracking the offset of our target tuple inside its
    // accumulated-weight block.
    #[allow(clippy::type_complexity)]
    fn fold_offset(
        factors: &[Vec<Weight>],
        target: &[Weight],
    ) -> (BTreeMap<Weight, usize>, usize, Weight) {
        // returns (block dims of the fold, offset of target, weight of target)
        let mut dims: BTreeMap<Weight, usize> = BTreeMap::new();
        for w in &factors[0] {
            dims.insert(w.clone(), 1);
        }
        let mut toff = 0usize;
        let mut tw = target[0].clone();
        for (fi, factor) in factors.iter().enumerate().skip(1) {
            let mut new_dims: BTreeMap<Weight, usize> = BTreeMap::new();
            let mut new_toff = 0usize;
            let new_tw: Weight = tw.iter().zip(&target[fi]).map(|(&a, &b)| a + b).collect();
            // pairs in lex order of (left weight, right weight)
            let mut offset_in_block: BTreeMap<Weight, usize> = BTreeMap::new();
            for (wl, dl) in &dims {
                for wr in factor {
                    let w: Weight = wl.iter().zip(wr).map(|(&a, &b)| a + b).collect();
                    let entry = offset_in_block.entry(w.clone()).or_insert(0);
                    if w == new_tw && *wl == tw && *wr == target[fi] {
                        new_toff = *entry + toff; // left-major, right dim 1
                    }
                    *entry += dl;
                    *new_dims.entry(w).or_insert(0) += dl;
                }
            }
            dims = new_dims;
            toff = new_toff;
            tw = new_tw;
        }
        (dims, toff, tw)
    }
    let factors: Vec<Vec<Weight>> = lambda
        .iter()
        .map(|&li| crate::polyfun::compositions(li, n))
        .collect();
    let target: Vec<Weight> = lambda
        .iter()
        .enumerate()
        .map(|(i, &li)| {
            let mut w = vec![0u16; n];
            w[i] = li;
            w
        })
        .collect();
    if factors.is_empty() {
        return 0;
    }
    let (_dims, off, tw) = fold_offset(&factors, &target);
    debug_assert_eq!(&tw, lambda);
    base + off
}

/// Operator closure from a unit start vector, recording the replay trace.
fn close_from(
    module: Arc<WeightedModule>,
    lambda: Weight,
    gen_global: usize,
) -> Result<GammaInfo, EngineError> {
    let field = module.field.clone();
    let dim = module.dim();
    let offsets = module.offsets();
    let mut ech: BTreeMap<Weight, Echelon> = BTreeMap::new();
    for (w, d) in &module.blocks {
        ech.insert(w.clone(), Echelon::new(&field, *d));
    }
    let mut collected: Vec<(Weight, Vec<Fel>)> = Vec::new();
    let mut slots: BTreeMap<Weight, Vec<usize>> = BTreeMap::new();
    let mut replay: Vec<ReplayStep> = Vec::new();
    let mut start = vec![0 as Fel; module.block_dim(&lambda)];
    start[gen_global - offsets[&lambda]] = 1;
    ech.get_mut(&lambda).unwrap().insert(start.clone());
    slots.entry(lambda.clone()).or_default().push(0);
    collected.push((lambda.clone(), start));
    let ops = module.op_ids();
    let mut cursor = 0;
    while cursor < collected.len() && collected.len() < dim {
        let (w, v) = collected[cursor].clone();
        for &op in &ops {
            if let Some((tw, image)) = module.op_apply(op, &w, &v) {
                if image.iter().all(|&x| x == 0) {
                    continue;
                }
                let e = ech.get_mut(&tw).unwrap();
                if e.insert(image.clone()) {
                    replay.push(ReplayStep { src: cursor, op });
                    slots.entry(tw.clone()).or_default().push(collected.len());
                    collected.push((tw, image));
                    if collected.len() == dim {
                        break;
                    }
                }
            }
        }
        cursor += 1;
    }
    if collected.len() != dim {
        return Err(EngineError::ShapeMismatch {
            detail: format!(
                "closure of Γ^{:?} spanned {} of {} dimensions",
                lambda,
                collected.len(),
                dim
            ),
        });
    }
    // per-weight inverse change of basis
    let mut inv = BTreeMap::new();
    for (w, idxs) in &slots {
        let d = module.block_dim(w);
        let mut x = Mat::zero(&field, d, idxs.len());
        for (c, &t) in idxs.iter().enumerate() {
            x.set_col(c, &collected[t].1);
        }
        debug_assert_eq!(d, idxs.len());
        let xinv = x
            .solve_right(&Mat::identity(&field, d))
            .expect("collected vectors form a basis");
        inv.insert(w.clone(), xinv);
    }
    let collect_weight = collected.into_iter().map(|(w, _)| w).collect();
    Ok(GammaInfo { lambda, module, gen_global, replay, collect_weight, slots, inv })
}

impl GammaInfo {
    /// Transport the trace with vector carries: the module map Γ^λ → M with
    /// γ_λ ↦ v, returned as per-weight blocks (target-block × Γ-block).
    pub fn transport(&self, m: &WeightedModule, v: &[Fel]) -> BTreeMap<Weight, Mat> {
        assert_eq!(v.len(), m.block_dim(&self.lambda), "generator value must sit in M_λ");
        let field = &m.field;
        let mut carries: Vec<Vec<Fel>> = Vec::with_capacity(self.collect_weight.len());
        carries.push(v.to_vec());
        for step in &self.replay {
            let w = &self.collect_weight[step.src];
            let y = &carries[step.src];
            let img = match m.op_apply(step.op, w, y) {
                Some((tw, img)) => {
                    debug_assert_eq!(&tw, &self.collect_weight[carries.len()]);
                    img
                }
                None => vec![0; m.block_dim(&self.collect_weight[carries.len()])],
            };
            carries.push(img);
        }
        let mut out = BTreeMap::new();
        for (w, idxs) in &self.slots {
            let mdim = m.block_dim(w);
            if mdim == 0 {
                continue;
            }
            let mut y = Mat::zero(field, mdim, idxs.len());
            for (c, &t) in idxs.iter().enumerate() {
                y.set_col(c, &carries[t]);
            }
            let block = y.mul(&self.inv[w]);
            if !block.is_zero() {
                out.insert(w.clone(), block);
            }
        }
        out
    }

    /// Transport with matrix carries: the evaluation structure
    /// Ev: M_λ → Hom(Γ^λ, M), stored as per-collection-slot matrices
    /// A_t: M_λ → M_{w_t} (so Ev(v) has carries A_t·v).
    pub fn ev_info(&self, m: &Arc<WeightedModule>) -> EvInfo {
        let field = &m.field;
        let lam_dim = m.block_dim(&self.lambda);
        let mut mats: Vec<Mat> = Vec::with_capacity(self.collect_weight.len());
        mats.push(Mat::identity(field, lam_dim));
        for step in &self.replay {
            let w = &self.collect_weight[step.src];
            let a = &mats[step.src];
            let tw = &self.collect_weight[mats.len()];
            let img = match m.op_block(step.op, w) {
                Some(o) => o.mul(a),
                None => Mat::zero(field, m.block_dim(tw), lam_dim),
            };
            mats.push(img);
        }
        EvInfo { lambda: self.lambda.clone(), target: m.clone(), mats }
    }

    /// The cover map as a ModuleMap (γ_λ ↦ v).
    pub fn cover_map(
        self: &Arc<Self>,
        m: &Arc<WeightedModule>,
        v: &[Fel],
    ) -> ModuleMap {
        let blocks = self.transport(m, v);
        ModuleMap {
            source: self.module.clone(),
            target: m.clone(),
            blocks,
            certified: false,
        }
    }
}

/// Evaluation structure Hom(Γ^λ, M) ≅ M_λ: for a vector x in a Γ^λ weight
/// block and a generator value v, the value of the attached map at x is
/// Σ_t (inv·x)_t · A_t v. Holds matrix carries per collection slot.
pub struct EvInfo {
    pub lambda: Weight,
    pub target: Arc<WeightedModule>,
    mats: Vec<Mat>,
}

impl EvInfo {
    /// The linear map M_λ → M_w, v ↦ (Ev v)(x), for x in the Γ^λ block of
    /// weight w (block coordinates), given the Γ-info that produced us.
    pub fn value_map(&self, info: &GammaInfo, w: &Weight, x: &[Fel]) -> Mat {
        let field = &self.target.field;
        let lam_dim = self.target.block_dim(&self.lambda);
        let out_dim = self.target.block_dim(w);
        let mut out = Mat::zero(field, out_dim, lam_dim);
        let Some(idxs) = info.slots.get(w) else { return out };
        let coords = info.inv[w].matvec(x);
        for (c, &t) in idxs.iter().enumerate() {
            let coef = coords[c];
            if coef == 0 {
                continue;
            }
            out = out.add(&self.mats[t].scale(coef));
        }
        out
    }
}

/// A direct sum of standard projectives Γ^λ with its bookkeeping.
pub struct Projective {
    pub lambdas: Vec<Weight>,
    pub infos: Vec<Arc<GammaInfo>>,
    pub module: Arc<WeightedModule>,
    /// Per summand, per weight: offset of the summand block inside the merged block.
    pub embeds: Vec<BTreeMap<Weight, usize>>,
}

impl Projective {
    pub fn build(
        lambdas: Vec<Weight>,
        n: usize,
        field: &Arc<FqCtx>,
        caps: &Caps,
    ) -> Result<Projective, EngineError> {
        use rayon::prelude::*;
        // distinct shapes first, in parallel (gamma_info memoizes)
        let mut distinct: Vec<Weight> = lambdas.clone();
        distinct.sort();
        distinct.dedup();
        distinct
            .par_iter()
            .map(|l| gamma_info(l, n, field, caps).map(|_| ()))
            .collect::<Result<Vec<()>, _>>()?;
        let infos: Vec<Arc<GammaInfo>> = lambdas
            .iter()
            .map(|l| gamma_info(l, n, field, caps))
            .collect::<Result<_, _>>()?;
        let parts: Vec<&WeightedModule> = infos.iter().map(|i| i.module.as_ref()).collect();
        if parts.is_empty() {
            return Ok(Projective {
                lambdas,
                infos,
                module: Arc::new(WeightedModule::empty(field, n)),
                embeds: Vec::new(),
            });
        }
        let (merged, embeds) = WeightedModule::direct_sum(&parts);
        Ok(Projective { lambdas, infos, module: Arc::new(merged), embeds })
    }

    pub fn dim(&self) -> usize {
        self.module.dim()
    }

    /// Assemble a map ⊕ Γ^λj → M from per-summand blocks.
    pub fn assemble_map(
        &self,
        target: &Arc<WeightedModule>,
        summand_blocks: &[BTreeMap<Weight, Mat>],
    ) -> ModuleMap {
        let field = &target.field;
        let mut blocks: BTreeMap<Weight, Mat> = BTreeMap::new();
        for (w, &sdim) in &self.module.blocks {
            let tdim = target.block_dim(w);
            if tdim == 0 || sdim == 0 {
                continue;
            }
            let mut mat = Mat::zero(field, tdim, sdim);
            let mut any = false;
            for (j, sb) in summand_blocks.iter().enumerate() {
                if let Some(b) = sb.get(w) {
                    let off = self.embeds[j][w];
                    for r in 0..b.rows {
                        for c in 0..b.cols {
                            let v = b.get(r, c);
                            if v != 0 {
                                mat.set(r, off + c, v);
                                any = true;
                            }
                        }
                    }
                }
            }
            if any {
                blocks.insert(w.clone(), mat);
            }
        }
        ModuleMap { source: self.module.clone(), target: target.clone(), blocks, certified: false }
    }

    /// Slice the rows of a vector in the merged block w belonging to summand j.
    pub fn summand_slice<'a>(&self, j: usize, w: &Weight, v: &'a [Fel]) -> &'a [Fel] {
        let off = self.embeds[j][w];
        let d = self.infos[j].module.block_dim(w);
        &v[off..off + d]
    }

    /// Global index of summand j's canonical generator in the merged module.
    pub fn generator_global(&self, j: usize) -> usize {
        let info = &self.infos[j];
        let w = &info.lambda;
        let local = info.gen_global - info.module.offsets()[w];
        self.module.offsets()[w] + self.embeds[j][w] + local
    }
}

/// The Yoneda cover of M under a generator-selection policy: a Γ^λ-sum P and
/// a surjection P ↠ M sending each canonical generator to a chosen weight
/// vector; the chosen vectors generate M under the operator actions.
pub fn yoneda_cover(
    m: &Arc<WeightedModule>,
    policy: super::CoverPolicy,
    caps: &Caps,
) -> Result<(Projective, ModuleMap), EngineError> {
    use rayon::prelude::*;
    let generators = super::resolve::select_generators(m, policy);
    let field = m.field.clone();
    let lambdas: Vec<Weight> = generators.iter().map(|(w, _)| w.clone()).collect();
    let proj = Projective::build(lambdas, m.n, &field, caps)?;
    let summand_blocks: Vec<BTreeMap<Weight, Mat>> = proj
        .infos
        .par_iter()
        .zip(&generators)
        .map(|(info, (_, v))| info.transport(m, v))
        .collect();
    let mut map = proj.assemble_map(m, &summand_blocks);
    // surjectivity certificate: rank equals dim M
    let rank: usize = map.rank();
    if rank != m.dim() {
        return Err(EngineError::ShapeMismatch {
            detail: format!("cover rank {rank} ≠ dim {}", m.dim()),
        });
    }
    if !map.certify() {
        return Err(EngineError::ShapeMismatch {
            detail: "cover map failed operator-commutation certification".into(),
        });
    }
    Ok((proj, map))
}
