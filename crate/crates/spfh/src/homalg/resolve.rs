//! Quasi-minimal projective resolutions by sums of standard projectives.
//!
//! Generators are chosen greedily: walk the weights in the policy order and
//! take any weight vector not in the operator closure of what was already
//! chosen. True (radical-minimal) covers are not needed for Ext dimensions.

use super::cover::{yoneda_cover, Projective};
use super::ModuleMap;
use crate::error::EngineError;
use crate::field::{Echelon, Fel, Mat};
use crate::polyfun::{Caps, Weight, WeightedModule};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Generator-selection policy: the order in which weights are examined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CoverPolicy {
    /// Lexicographically descending weights (default; picks dominant weights first).
    LexDesc,
    /// Lexicographically ascending weights.
    LexAsc,
}

impl Default for CoverPolicy {
    fn default() -> Self {
        CoverPolicy::LexDesc
    }
}

/// Greedy generator selection: weight vectors outside the closure of the
/// previously chosen ones, scanned in policy order. Deterministic.
pub fn select_generators(
    m: &WeightedModule,
    policy: CoverPolicy,
) -> Vec<(Weight, Vec<Fel>)> {
    let field = &m.field;
    let mut closure: BTreeMap<Weight, Echelon> = BTreeMap::new();
    for (w, d) in &m.blocks {
        closure.insert(w.clone(), Echelon::new(field, *d));
    }
    let mut weights: Vec<Weight> = m.blocks.keys().cloned().collect();
    if policy == CoverPolicy::LexDesc {
        weights.reverse();
    }
    let ops = m.op_ids();
    let mut out = Vec::new();
    for w in &weights {
        loop {
            let free = {
                let ech = &closure[w];
                if ech.rank() == m.block_dim(w) {
                    None
                } else {
                    ech.first_missing_unit()
                }
            };
            let Some(unit) = free else { break };
            let mut v = vec![0 as Fel; m.block_dim(w)];
            v[unit] = 1;
            out.push((w.clone(), v.clone()));
            // grow the closure from v
            let mut work: Vec<(Weight, Vec<Fel>)> = vec![(w.clone(), v)];
            if closure.get_mut(w).unwrap().insert(work[0].1.clone()) {
                let mut cursor = 0;
                while cursor < work.len() {
                    let (cw, cv) = work[cursor].clone();
                    for &op in &ops {
                        if let Some((tw, img)) = m.op_apply(op, &cw, &cv) {
                            if img.iter().any(|&x| x != 0)
                                && closure.get_mut(&tw).unwrap().insert(img.clone())
                            {
                                work.push((tw, img));
                            }
                        }
                    }
                    cursor += 1;
                }
            }
        }
    }
    out
}

/// One step of a resolution: P_i and its differential into the previous stage
/// (the augmentation P_0 → M at i = 0).
pub struct ResStep {
    pub proj: Projective,
    /// d_i : P_i → P_{i−1} (i ≥ 1) or the augmentation P_0 → M.
    pub map: ModuleMap,
    /// Exactness certificate: per-step rank(d_{i+1}) = nullity(d_i) holds by
    /// construction; this records the verified rank and nullity.
    pub rank: usize,
    pub nullity: usize,
}

/// A chain of Γ^λ-sums resolving a module, with certified differentials.
pub struct Resolution {
    pub target: Arc<WeightedModule>,
    pub steps: Vec<ResStep>,
    pub policy: CoverPolicy,
    /// True when the final kernel vanished (the resolution terminated).
    pub finished: bool,
}

impl Resolution {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Verify d ∘ d = 0 on every adjacent pair.
    pub fn verify_complex(&self) -> bool {
        for i in 1..self.steps.len() {
            if !self.steps[i - 1].map.compose(&self.steps[i].map).is_zero() {
                return false;
            }
        }
        true
    }
}

/// Kernel of a module map as a module: per-weight kernel bases with
/// restricted operator actions, plus the inclusion map.
pub fn kernel_module(
    map: &ModuleMap,
    caps: &Caps,
) -> Result<(Arc<WeightedModule>, ModuleMap), EngineError> {
    let src = &map.source;
    let field = &src.field;
    for (w, &d) in &src.blocks {
        if d > caps.max_block_cols {
            return Err(EngineError::BlockCap {
                weight: format!("{w:?}"),
                cols: d,
                cap: caps.max_block_cols,
            });
        }
    }
    // per-weight kernel bases, in parallel
    let kernels: BTreeMap<Weight, Mat> = src
        .blocks
        .par_iter()
        .map(|(w, _)| {
            let k = map.block_or_zero(w).kernel();
            (w.clone(), k)
        })
        .collect();
    let mut km = WeightedModule::empty(field, src.n);
    for (w, k) in &kernels {
        if k.cols > 0 {
            km.blocks.insert(w.clone(), k.cols);
        }
    }
    // restricted operators: solve K_{w'} Z = O · K_w blockwise
    let op_entries: Vec<_> = src
        .ops
        .iter()
        .flat_map(|(op, shift)| shift.blocks.keys().map(move |w| (*op, w.clone())))
        .collect();
    let computed: Vec<(crate::polyfun::OpId, Weight, Option<Mat>)> = op_entries
        .par_iter()
        .map(|(op, w)| {
            let kw = &kernels[w];
            if kw.cols == 0 {
                return (*op, w.clone(), None);
            }
            let tw = crate::polyfun::op_target(*op, w).unwrap();
            let Some(ktw) = kernels.get(&tw) else { return (*op, w.clone(), None) };
            if ktw.cols == 0 {
                return (*op, w.clone(), None);
            }
            let o = src.op_block(*op, w).unwrap();
            let image = o.mul(kw);
            let z = ktw
                .solve_right(&image)
                .expect("operator image of a kernel stays in the kernel");
            if z.is_zero() {
                (*op, w.clone(), None)
            } else {
                (*op, w.clone(), Some(z))
            }
        })
        .collect();
    for (op, w, z) in computed {
        if let Some(z) = z {
            km.ops.entry(op).or_default().blocks.insert(w, z);
        }
    }
    km.faithful = src.faithful;
    let km = Arc::new(km);
    let incl = ModuleMap {
        source: km.clone(),
        target: src.clone(),
        blocks: kernels.into_iter().filter(|(_, k)| k.cols > 0).collect(),
        certified: false,
    };
    Ok((km, incl))
}

fn trace_enabled() -> bool {
    static ON: std::sync::OnceLock<bool> = std::sync::OnceLock::new();
    *ON.get_or_init(|| std::env::var("SPFH_TRACE").is_ok())
}

macro_rules! trace {
    ($($arg:tt)*) => {
        if trace_enabled() {
            eprintln!($($arg)*);
        }
    };
}

/// Resolve M to length L: P_L → … → P_0 → M with certified exactness.
pub fn resolve(
    m: &Arc<WeightedModule>,
    length: usize,
    policy: CoverPolicy,
    caps: &Caps,
) -> Result<Resolution, EngineError> {
    let mut steps: Vec<ResStep> = Vec::new();
    let mut finished = false;
    // current stage: the module to cover, plus the inclusion into P_{i-1}
    let mut current: Arc<WeightedModule> = m.clone();
    let mut incl: Option<ModuleMap> = None;
    for _i in 0..=length {
        if current.dim() == 0 {
            finished = true;
            break;
        }
        let t0 = std::time::Instant::now();
        let (proj, cover) = yoneda_cover(&current, policy, caps)?;
        trace!(
            "resolve step {_i}: cover {} summands, dim {} over {} ({:?})",
            proj.lambdas.len(),
            proj.dim(),
            current.dim(),
            t0.elapsed()
        );
        // the differential includes the covered kernel back into P_{i-1}
        let map = match &incl {
            Some(inc) => inc.compose(&cover),
            None => cover.clone(),
        };
        // exactness certificate: rank d_i = dim of the stage being covered
        let rank = map.rank();
        if rank != current.dim() {
            return Err(EngineError::ShapeMismatch {
                detail: format!("step rank {rank} ≠ covered dimension {}", current.dim()),
            });
        }
        let nullity = proj.dim() - rank;
        if _i == length {
            // the last kernel stays implicit: top-degree Ext reads it off the
            // row space of the last differential
            steps.push(ResStep { proj, map, rank, nullity });
            break;
        }
        let tk = std::time::Instant::now();
        let (kernel, kincl) = kernel_module(&cover, caps)?;
        trace!("resolve step {_i}: kernel dim {} ({:?})", kernel.dim(), tk.elapsed());
        debug_assert_eq!(kernel.dim(), nullity);
        steps.push(ResStep { proj, map, rank, nullity });
        current = kernel;
        incl = Some(kincl);
    }
    let res = Resolution { target: m.clone(), steps, policy, finished };
    if !res.verify_complex() {
        return Err(EngineError::ShapeMismatch { detail: "d∘d ≠ 0 in resolution".into() });
    }
    Ok(res)
}
