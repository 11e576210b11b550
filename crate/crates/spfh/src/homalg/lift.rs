//! Chain lifting: the comparison theorem made effective. A map M → M' lifts
//! through a Γ^λ-sum resolution of M into any exact complex over M' (not
//! necessarily projective — twisted resolutions are the main customer).

use super::resolve::Resolution;
use super::ModuleMap;
use crate::error::EngineError;
use crate::field::Mat;
use crate::polyfun::WeightedModule;
use std::collections::BTreeMap;
use std::sync::Arc;

/// An exact complex … → C_1 → C_0 → M → 0. maps[0] is the augmentation
/// C_0 → M; maps[i] is d_i : C_i → C_{i−1}.
pub struct ExactComplex {
    pub target: Arc<WeightedModule>,
    pub objects: Vec<Arc<WeightedModule>>,
    pub maps: Vec<ModuleMap>,
}

impl ExactComplex {
    pub fn from_resolution(res: &Resolution) -> ExactComplex {
        ExactComplex {
            target: res.target.clone(),
            objects: res.steps.iter().map(|s| s.proj.module.clone()).collect(),
            maps: res.steps.iter().map(|s| s.map.clone()).collect(),
        }
    }

    /// Reindex every object and map by a Frobenius twist (weights scale by
    /// p^r, matrices unchanged). Exactness is preserved; projectivity is not.
    pub fn twist(&self, r: u32) -> ExactComplex {
        let tw_mod = |m: &Arc<WeightedModule>| Arc::new(m.twist(r));
        let scale = |w: &crate::polyfun::Weight, p: u32, r: u32| -> crate::polyfun::Weight {
            let s = p.pow(r) as u16;
            w.iter().map(|&x| x * s).collect()
        };
        let p = self.target.field.p();
        let tw_map = |map: &ModuleMap, src: &Arc<WeightedModule>, tgt: &Arc<WeightedModule>| {
            let blocks: BTreeMap<_, _> = map
                .blocks
                .iter()
                .map(|(w, m)| (scale(w, p, r), m.clone()))
                .collect();
            ModuleMap { source: src.clone(), target: tgt.clone(), blocks, certified: map.certified }
        };
        let target = tw_mod(&self.target);
        let objects: Vec<_> = self.objects.iter().map(tw_mod).collect();
        let mut maps = Vec::new();
        for (i, m) in self.maps.iter().enumerate() {
            let tgt = if i == 0 { &target } else { &objects[i - 1] };
            maps.push(tw_map(m, &objects[i], tgt));
        }
        ExactComplex { target, objects, maps }
    }
}

impl ExactComplex {
    /// Extend with zero stages so a longer resolution can lift into it; valid
    /// because the complex stays exact when it already terminated.
    pub fn pad_to(&mut self, len: usize) {
        while self.objects.len() < len {
            let field = self.target.field.clone();
            let n = self.target.n;
            let zero = Arc::new(WeightedModule::empty(&field, n));
            let prev = self.objects.last().cloned().unwrap_or_else(|| self.target.clone());
            self.maps.push(ModuleMap::zero(&zero, &prev));
            self.objects.push(zero);
        }
    }
}

/// A chain map u_• over f: M → M' from a resolution into an exact complex.
pub struct ChainMap {
    pub maps: Vec<ModuleMap>,
}

impl ChainMap {
    /// Verify the commuting squares d'_i ∘ u_i = u_{i−1} ∘ d_i (and the
    /// augmentation square against f).
    pub fn verify(&self, f: &ModuleMap, source: &Resolution, target: &ExactComplex) -> bool {
        for i in 0..self.maps.len() {
            let lhs = target.maps[i].compose(&self.maps[i]);
            let rhs = if i == 0 {
                f.compose(&source.steps[0].map)
            } else {
                self.maps[i - 1].compose(&source.steps[i].map)
            };
            let diff = lhs.add(&negate(&rhs));
            if !diff.is_zero() {
                return false;
            }
        }
        true
    }
}

fn negate(map: &ModuleMap) -> ModuleMap {
    ModuleMap {
        source: map.source.clone(),
        target: map.target.clone(),
        blocks: map.blocks.iter().map(|(w, m)| (w.clone(), m.neg())).collect(),
        certified: false,
    }
}

/// Lift f: M → M' to u_•: P_• → C_• with d' ∘ u = u ∘ d, u over f.
/// Uses the Yoneda data of the source projectives: each u_i is determined by
/// the images of the canonical generators, solved per weight block inside the
/// target complex (solvable by exactness).
pub fn chain_lift(
    f: &ModuleMap,
    source: &Resolution,
    target: &ExactComplex,
) -> Result<ChainMap, EngineError> {
    if target.objects.len() < source.steps.len() {
        return Err(EngineError::ShapeMismatch {
            detail: format!(
                "target complex has {} stages, source resolution {}",
                target.objects.len(),
                source.steps.len()
            ),
        });
    }
    let mut lifted: Vec<ModuleMap> = Vec::new();
    for (i, step) in source.steps.iter().enumerate() {
        let cur_obj = &target.objects[i];
        let mut summand_blocks = Vec::new();
        for (j, info) in step.proj.infos.iter().enumerate() {
            let lam = &step.proj.lambdas[j];
            // rhs: where the generator must land in C_{i-1} (or M' for i = 0)
            let gen_global = step.proj.generator_global(j);
            let local = gen_global - step.proj.module.offsets()[lam];
            let x = match step.map.block(lam) {
                Some(b) => b.col(local),
                None => vec![0; step.map.target.block_dim(lam)],
            };
            let rhs: Vec<u32> = if i == 0 {
                f.apply_vec(lam, &x)
            } else {
                lifted[i - 1].apply_vec(lam, &x)
            };
            let tdim = target.maps[i].target.block_dim(lam);
            debug_assert_eq!(rhs.len(), tdim);
            let w = if rhs.iter().all(|&v| v == 0) {
                vec![0; cur_obj.block_dim(lam)]
            } else {
                let dblock = target.maps[i].block_or_zero(lam);
                let rhs_mat = {
                    let field = &cur_obj.field;
                    let mut m = Mat::zero(field, tdim, 1);
                    m.set_col(0, &rhs);
                    m
                };
                let sol = dblock.solve_right(&rhs_mat).ok_or_else(|| {
                    EngineError::ShapeMismatch {
                        detail: format!("lift failed at step {i}: target complex not exact there"),
                    }
                })?;
                sol.col(0)
            };
            summand_blocks.push(info.transport(cur_obj, &w));
        }
        lifted.push(step.proj.assemble_map(cur_obj, &summand_blocks));
    }
    let chain = ChainMap { maps: lifted };
    if !chain.verify(f, source, target) {
        return Err(EngineError::ShapeMismatch {
            detail: "chain lift failed the commuting-square check".into(),
        });
    }
    Ok(chain)
}
