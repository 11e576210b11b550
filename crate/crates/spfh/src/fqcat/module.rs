//! Modules over the truncated category: per-object spaces with morphism
//! actions. Standard projective sums act by index remapping, restricted
//! strict polynomial functors act through `apply`, and kernels act through
//! their parent's coordinates.

use super::{FqMor, Gen, TruncCat};
use crate::error::EngineError;
use crate::field::Mat;
use crate::polyfun::{apply, eval, Caps, Expr, WeightedModule};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// A functor on the truncated category.
pub enum CatModule {
    /// ⊕_t P^{j_t} with P^j = k[Hom(F_q^j, −)].
    ProjSum { cat: Arc<TruncCat>, js: Vec<usize> },
    /// t*E: object values eval(E, m), generator actions apply(E, ·).
    Restricted {
        cat: Arc<TruncCat>,
        expr: Expr,
        caps: Caps,
        evals: Vec<Arc<WeightedModule>>,
    },
    /// A subfunctor of a parent, given per-object basis columns in parent
    /// coordinates (used for resolution kernels).
    Sub { parent: Arc<CatModule>, basis: Vec<Mat> },
}

impl std::fmt::Debug for CatModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CatModule::ProjSum { js, .. } => write!(f, "ProjSum{js:?}"),
            CatModule::Restricted { expr, .. } => write!(f, "t*({expr})"),
            CatModule::Sub { parent, basis } => {
                write!(f, "Sub({:?}; dims {:?})", parent, basis.iter().map(|b| b.cols).collect::<Vec<_>>())
            }
        }
    }
}

impl CatModule {
    pub fn cat(&self) -> &Arc<TruncCat> {
        match self {
            CatModule::ProjSum { cat, .. } | CatModule::Restricted { cat, .. } => cat,
            CatModule::Sub { parent, .. } => parent.cat(),
        }
    }

    pub fn nmax(&self) -> usize {
        self.cat().nmax
    }

    pub fn dim(&self, m: usize) -> usize {
        match self {
            CatModule::ProjSum { cat, js } => {
                js.iter().map(|&j| cat.hom_count(j, m) as usize).sum()
            }
            CatModule::Restricted { evals, .. } => evals[m].dim(),
            CatModule::Sub { basis, .. } => basis[m].cols,
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        (0..=self.nmax()).map(|m| self.dim(m)).collect()
    }

    /// Action on an arbitrary morphism: dim(b) × dim(a).
    pub fn act(&self, f: &FqMor) -> Mat {
        match self {
            CatModule::ProjSum { cat, js } => {
                let field = &cat.field;
                let q = cat.q();
                let mut out = Mat::zero(field, self.dim(f.b), self.dim(f.a));
                let (mut roff, mut coff) = (0usize, 0usize);
                for &j in js {
                    let src = cat.hom_count(j, f.a) as usize;
                    for code in 0..src {
                        let g = FqMor::decode(field, j, f.a, code as u64);
                        let fg = FqMor::new(f.mat.mul(&g.mat));
                        out.set(roff + fg.encode(q) as usize, coff + code, 1);
                    }
                    roff += cat.hom_count(j, f.b) as usize;
                    coff += src;
                }
                out
            }
            CatModule::Restricted { expr, caps, .. } => {
                apply(expr, &f.mat, caps).expect("restricted action within caps")
            }
            CatModule::Sub { parent, basis } => {
                let pf = parent.act(f);
                let image = pf.mul(&basis[f.a]);
                basis[f.b]
                    .solve_right(&image)
                    .expect("subfunctor closed under the action")
            }
        }
    }

    pub fn gen_act(&self, g: &Gen) -> Mat {
        let field = &self.cat().field;
        self.act(&FqMor::new(g.matrix(field)))
    }

    /// Basis index of the morphism g: j_t → m inside summand t of a ProjSum.
    pub fn proj_index(&self, t: usize, g: &FqMor) -> usize {
        match self {
            CatModule::ProjSum { cat, js } => {
                let mut off = 0;
                for &j in js.iter().take(t) {
                    off += cat.hom_count(j, g.b) as usize;
                }
                off + g.encode(cat.q()) as usize
            }
            _ => panic!("proj_index on a non-projective module"),
        }
    }
}

/// Memoized generator/morphism actions of one module, keyed by encoding.
pub struct ActionCache {
    module: Arc<CatModule>,
    cache: Mutex<HashMap<(usize, usize, u64), Arc<Mat>>>,
}

impl ActionCache {
    pub fn new(module: Arc<CatModule>) -> ActionCache {
        ActionCache { module, cache: Mutex::new(HashMap::new()) }
    }

    pub fn module(&self) -> &Arc<CatModule> {
        &self.module
    }

    pub fn act(&self, f: &FqMor) -> Arc<Mat> {
        let key = (f.a, f.b, f.encode(self.module.cat().q()));
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let m = Arc::new(self.module.act(f));
        self.cache.lock().unwrap().insert(key, m.clone());
        m
    }
}

/// Standard projective P^j = k[Hom(F_q^j, −)], with dim P^j(m) = q^(jm).
pub fn build_proj(cat: &Arc<TruncCat>, j: usize) -> Result<CatModule, EngineError> {
    if j > cat.nmax {
        return Err(EngineError::InvalidJob {
            detail: format!("P^{j} outside the truncated range 0..={}", cat.nmax),
        });
    }
    Ok(CatModule::ProjSum { cat: cat.clone(), js: vec![j] })
}

/// Certify functoriality of a module on random composable pairs.
pub fn certify_functoriality(m: &CatModule, samples: usize) -> bool {
    let cat = m.cat();
    let field = &cat.field;
    let mut st = 0x00c0_ffeeu64;
    let mut rand_below = |n: u64| {
        st = st.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (st >> 33) % n.max(1)
    };
    for _ in 0..samples {
        let a = rand_below(cat.nmax as u64 + 1) as usize;
        let b = rand_below(cat.nmax as u64 + 1) as usize;
        let c = rand_below(cat.nmax as u64 + 1) as usize;
        let f = FqMor::decode(field, b, c, rand_below(cat.hom_count(b, c)));
        let g = FqMor::decode(field, a, b, rand_below(cat.hom_count(a, b)));
        let fg = FqMor::new(f.mat.mul(&g.mat));
        if m.act(&fg) != m.act(&f).mul(&m.act(&g)) {
            return false;
        }
        let id = FqMor::new(Mat::identity(field, a));
        if m.act(&id) != Mat::identity(field, m.dim(a)) {
            return false;
        }
    }
    true
}

/// t*E: the restriction of a strict polynomial functor along extension of
/// scalars, evaluated objectwise (with k = F_q the extension is plain
/// evaluation over F_q).
pub fn restrict(
    cat: &Arc<TruncCat>,
    expr: &Expr,
    caps: &Caps,
) -> Result<CatModule, EngineError> {
    let p = cat.field.p() as u64;
    let caps = caps.with_degree_at_least(expr.max_degree_at(p));
    let evals: Vec<Arc<WeightedModule>> = (0..=cat.nmax)
        .map(|m| eval(expr, m, &cat.field, &caps))
        .collect::<Result<_, _>>()?;
    for (m, e) in evals.iter().enumerate() {
        if e.dim() > caps.max_object_dim {
            return Err(EngineError::ObjectCap {
                object: m,
                dim: e.dim(),
                cap: caps.max_object_dim,
            });
        }
    }
    Ok(CatModule::Restricted { cat: cat.clone(), expr: expr.clone(), caps, evals })
}
