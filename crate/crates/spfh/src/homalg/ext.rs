//! Ext and Tor through the Yoneda identification Hom(Γ^λ, N) ≅ N_λ.
//!
//! The Hom-complex of a Γ^λ-sum resolution P_• against N has cochain spaces
//! ⊕_j N_{λ_ij}; the differential entries come from evaluating the attached
//! maps on the images of the canonical generators under d. Tor is computed
//! through the duality dim Tor_i(E, F) = dim Ext^i(F, E-dual).

use super::cover::EvInfo;
use super::resolve::{resolve, CoverPolicy, Resolution};
use super::{Certificate, GradedDims};
use crate::error::EngineError;
use crate::field::{Fel, FqCtx, Mat};
use crate::polyfun::{eval, Caps, Expr, Weight, WeightedModule};
use std::collections::BTreeMap;
use std::sync::Arc;

/// The computed Hom-complex data: cochain dimensions, differentials, and the
/// pieces needed to produce and pull back cocycles.
pub struct ExtData {
    pub target: Arc<WeightedModule>,
    /// Cochain space dimension per homological degree (index 0 = Hom(P_0, N)).
    pub cochain_dims: Vec<usize>,
    /// D_i : Hom(P_{i-1}, N) → Hom(P_i, N); differentials[i] is D_{i+1}
    /// (mapping cochain i to cochain i+1).
    pub differentials: Vec<Mat>,
    /// Per cochain degree: the (summand λ_j, N_λ-block dim) layout.
    pub layout: Vec<Vec<(Weight, usize)>>,
    pub dims: Vec<usize>,
}

impl ExtData {
    /// Cohomology dimension in the given degree.
    pub fn dim(&self, i: usize) -> usize {
        self.dims.get(i).copied().unwrap_or(0)
    }

    /// A basis of cocycle representatives in degree i (cochain coordinates),
    /// spanning the cohomology modulo coboundaries. Tied to this resolution.
    pub fn cocycle_basis(&self, i: usize, field: &Arc<FqCtx>) -> Vec<Vec<Fel>> {
        if i >= self.cochain_dims.len() {
            return Vec::new();
        }
        let zi = match self.differentials.get(i) {
            Some(d) => d.kernel(),
            None => Mat::identity(field, self.cochain_dims[i]),
        };
        let bi = if i == 0 {
            Mat::zero(field, self.cochain_dims[0], 0)
        } else {
            // image of D_i: columns spanning the coboundaries
            self.differentials[i - 1].clone()
        };
        // pick cocycle columns independent modulo the coboundary span
        let mut picked: Vec<Vec<Fel>> = Vec::new();
        let mut span = bi;
        for c in 0..zi.cols {
            let cand = zi.select_columns(&[c]);
            let joint = Mat::hstack(field, &[&span, &cand]);
            if joint.rank() > span.rank() {
                picked.push(cand.col(0));
                span = joint;
            }
        }
        picked
    }
}

/// Build the Hom-complex of a resolution against N.
pub fn hom_complex(
    res: &Resolution,
    n_mod: &Arc<WeightedModule>,
    caps: &Caps,
) -> Result<ExtData, EngineError> {
    let field = &n_mod.field;
    let steps = &res.steps;
    let mut layout: Vec<Vec<(Weight, usize)>> = Vec::new();
    let mut cochain_dims = Vec::new();
    for step in steps {
        let lams: Vec<(Weight, usize)> = step
            .proj
            .lambdas
            .iter()
            .map(|l| (l.clone(), n_mod.block_dim(l)))
            .collect();
        cochain_dims.push(lams.iter().map(|(_, d)| d).sum());
        layout.push(lams);
    }
    // Ev structures per distinct λ
    let mut evs: BTreeMap<Weight, (Arc<super::cover::GammaInfo>, EvInfo)> = BTreeMap::new();
    for step in steps {
        for (j, l) in step.proj.lambdas.iter().enumerate() {
            if !evs.contains_key(l) {
                let info = step.proj.infos[j].clone();
                let ev = info.ev_info(n_mod);
                evs.insert(l.clone(), (info, ev));
            }
        }
    }
    let _ = caps;
    let mut differentials = Vec::new();
    for i in 1..steps.len() {
        let (prev, cur) = (&steps[i - 1], &steps[i]);
        let rows = cochain_dims[i];
        let cols = cochain_dims[i - 1];
        let mut d = Mat::zero(field, rows, cols);
        // column blocks: summand j of P_{i-1}; row blocks: summand j' of P_i
        let mut row_off = 0;
        for (jp, (lam_p, nd_p)) in layout[i].iter().enumerate() {
            if *nd_p == 0 {
                row_off += nd_p;
                continue;
            }
            // x = d_i(γ_{j'}) lives in the λ' block of P_{i-1}
            let gen_global = cur.proj.generator_global(jp);
            let off = cur.proj.module.offsets()[lam_p];
            let local = gen_global - off;
            let x_block = cur.map.block(lam_p);
            let mut col_off = 0;
            for (j, (lam, nd)) in layout[i - 1].iter().enumerate() {
                if *nd == 0 {
                    col_off += nd;
                    continue;
                }
                if let Some(xb) = x_block {
                    let x = xb.col(local);
                    let xj = prev.proj.summand_slice(j, lam_p, &x);
                    if xj.iter().any(|&v| v != 0) {
                        let (info, ev) = &evs[lam];
                        let t = ev.value_map(info, lam_p, xj);
                        for r in 0..t.rows {
                            for c in 0..t.cols {
                                let v = t.get(r, c);
                                if v != 0 {
                                    d.set(row_off + r, col_off + c, v);
                                }
                            }
                        }
                    }
                }
                col_off += nd;
            }
            row_off += nd_p;
        }
        differentials.push(d);
    }
    // top degree: cochains whose attached maps vanish on the kernel of the
    // last differential, i.e. whose value rows lie in its row space
    if !res.finished && !steps.is_empty() {
        let last = steps.last().unwrap();
        let li = steps.len() - 1;
        let pmod = &last.proj.module;
        // row-reduction data per weight block of the last differential
        let mut spaces: BTreeMap<Weight, (Vec<usize>, Mat)> = BTreeMap::new();
        for (w, &pd) in &pmod.blocks {
            let block = last.map.block_or_zero(w);
            let (_r, pivots, red) = block.rref();
            let _ = pd;
            spaces.insert(w.clone(), (pivots, red));
        }
        let reduce = |w: &Weight, v: &mut Vec<u32>| {
            if let Some((pivots, red)) = spaces.get(w) {
                for (i, &p) in pivots.iter().enumerate() {
                    let c = v[p];
                    if c != 0 {
                        let nc = field.neg(c);
                        for (slot, j) in v.iter_mut().zip(0..red.cols) {
                            let rv = red.get(i, j);
                            if rv != 0 {
                                *slot = field.add(*slot, field.mul(nc, rv));
                            }
                        }
                    }
                }
            }
        };
        let residue_len: usize =
            pmod.blocks.iter().map(|(w, &d)| n_mod.block_dim(w) * d).sum();
        let mut cols: Vec<Vec<u32>> = Vec::new();
        for (j, (lam, nd)) in layout[li].iter().enumerate() {
            for e in 0..*nd {
                let mut unit = vec![0u32; *nd];
                unit[e] = 1;
                let blocks = last.proj.infos[j].transport(n_mod, &unit);
                let mut residue = Vec::with_capacity(residue_len);
                for (w, &pd) in &pmod.blocks {
                    let nw = n_mod.block_dim(w);
                    if nw == 0 || pd == 0 {
                        residue.extend(std::iter::repeat(0).take(nw * pd));
                        continue;
                    }
                    // ψ's block at w, embedded at the summand offset
                    let off = last.proj.embeds[j][w];
                    let sumd = last.proj.infos[j].module.block_dim(w);
                    for r in 0..nw {
                        let mut row = vec![0u32; pd];
                        if let Some(b) = blocks.get(w) {
                            for c in 0..sumd.min(b.cols) {
                                row[off + c] = b.get(r, c);
                            }
                        }
                        reduce(w, &mut row);
                        residue.extend(row);
                    }
                }
                cols.push(residue);
            }
        }
        let mut top = Mat::zero(field, residue_len, cochain_dims[li]);
        for (c, col) in cols.iter().enumerate() {
            top.set_col(c, col);
        }
        differentials.push(top);
    }
    // cohomology dimensions
    let mut dims = Vec::new();
    for i in 0..steps.len() {
        let z = match differentials.get(i) {
            Some(d) => cochain_dims[i] - d.rank(),
            None => cochain_dims[i],
        };
        let b = if i == 0 { 0 } else { differentials[i - 1].rank() };
        dims.push(z - b);
    }
    Ok(ExtData { target: n_mod.clone(), cochain_dims, differentials, layout, dims })
}

/// Ext^i(M, N) for i in 0..=max_degree, from homogeneous evaluated modules.
pub fn ext_modules(
    m: &Arc<WeightedModule>,
    n_mod: &Arc<WeightedModule>,
    max_degree: usize,
    policy: CoverPolicy,
    caps: &Caps,
) -> Result<(GradedDims, ExtData, Resolution), EngineError> {
    if m.degree() != n_mod.degree() || m.dim() == 0 || n_mod.dim() == 0 {
        // different homogeneous degrees: the zero space in every degree
        let res = resolve(m, 0, policy, caps)?;
        let data = ExtData {
            target: n_mod.clone(),
            cochain_dims: vec![],
            differentials: vec![],
            layout: vec![],
            dims: vec![],
        };
        return Ok((
            GradedDims {
                dims: vec![0; max_degree + 1],
                certificate: Certificate::Exact { resolution_len: 0 },
            },
            data,
            res,
        ));
    }
    let res = resolve(m, max_degree, policy, caps)?;
    let data = hom_complex(&res, n_mod, caps)?;
    let mut dims: Vec<usize> = (0..=max_degree).map(|i| data.dim(i)).collect();
    dims.truncate(max_degree + 1);
    Ok((
        GradedDims {
            dims,
            certificate: Certificate::Exact { resolution_len: res.len() },
        },
        data,
        res,
    ))
}

/// Ext from expressions: evaluates both sides at a faithful rank and runs the
/// resolution pipeline. Inhomogeneous inputs are matched componentwise.
pub fn ext(
    f_expr: &Expr,
    g_expr: &Expr,
    max_degree: usize,
    n: Option<usize>,
    field: &Arc<FqCtx>,
    policy: CoverPolicy,
    caps: &Caps,
) -> Result<GradedDims, EngineError> {
    let p = field.p() as u64;
    let n = n.unwrap_or_else(|| {
        (f_expr.max_degree_at(p).max(g_expr.max_degree_at(p)) as usize).max(1)
    });
    let fm = eval(f_expr, n, field, caps)?;
    let gm = eval(g_expr, n, field, caps)?;
    let fparts = fm.split_by_degree();
    let gparts = gm.split_by_degree();
    let mut dims = vec![0usize; max_degree + 1];
    let mut res_len = 0usize;
    for (d, fpart) in &fparts {
        let Some(gpart) = gparts.get(d) else { continue };
        if (*d as usize) > n {
            return Err(EngineError::ShapeMismatch {
                detail: format!("rank {n} is not faithful for degree {d}; raise n"),
            });
        }
        let (g, _, res) = ext_modules(
            &Arc::new(fpart.clone()),
            &Arc::new(gpart.clone()),
            max_degree,
            policy,
            caps,
        )?;
        for (i, v) in g.dims.iter().enumerate() {
            dims[i] += v;
        }
        res_len = res_len.max(res.len());
    }
    Ok(GradedDims { dims, certificate: Certificate::Exact { resolution_len: res_len } })
}

/// Hom/Ext dims with cocycle representatives for downstream chain work.
pub fn ext_with_cocycles(
    m: &Arc<WeightedModule>,
    n_mod: &Arc<WeightedModule>,
    max_degree: usize,
    policy: CoverPolicy,
    caps: &Caps,
) -> Result<(GradedDims, ExtData, Resolution), EngineError> {
    ext_modules(m, n_mod, max_degree, policy, caps)
}

/// Tor through duality: dim Tor_i(E, F) = dim Ext^i(F, E^dual), where the
/// contravariant E = cdual(E0) has dual the Kuhn dual of E0.
pub fn tor(
    e_expr: &Expr,
    f_expr: &Expr,
    max_degree: usize,
    n: Option<usize>,
    field: &Arc<FqCtx>,
    policy: CoverPolicy,
    caps: &Caps,
) -> Result<GradedDims, EngineError> {
    let e0 = e_expr.peel_cdual().ok_or_else(|| EngineError::Contravariant {
        expr: format!("tor needs a contravariant first argument cdual(E); got {e_expr}"),
    })?;
    let dual = Expr::Kuhn(Box::new(e0.clone()));
    ext(f_expr, &dual, max_degree, n, field, policy, caps)
}
