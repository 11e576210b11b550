//! Hom-spaces: a basis of the module maps M → N, i.e. the commutant of the
//! generating family {weight idempotents, e_i^(m), f_i^(m)}.

use super::ModuleMap;
use crate::field::{Fel, Mat};
use crate::polyfun::{op_target, Weight, WeightedModule};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Basis of Hom(M, N). Maps of different homogeneity degrees are zero, which
/// falls out of weight preservation (no common weights, no unknowns).
pub fn hom_space(m: &Arc<WeightedModule>, n: &Arc<WeightedModule>) -> Vec<ModuleMap> {
    assert_eq!(m.n, n.n, "hom needs a common rank");
    let field = &m.field;
    // unknowns: entries of X_w (dim N_w × dim M_w) over common weights
    let mut offsets: BTreeMap<Weight, usize> = BTreeMap::new();
    let mut total = 0usize;
    for (w, &md) in &m.blocks {
        let nd = n.block_dim(w);
        if nd > 0 {
            offsets.insert(w.clone(), total);
            total += nd * md;
        }
    }
    if total == 0 {
        return Vec::new();
    }
    let unknown = |w: &Weight, r: usize, c: usize| -> usize {
        offsets[w] + r * m.block_dim(w) + c
    };
    // constraint rows: X_{w'} · O_M − O_N · X_w = 0 per op and source weight
    let mut rows: Vec<Vec<(usize, Fel)>> = Vec::new();
    let mut ops: Vec<_> = m.ops.keys().chain(n.ops.keys()).cloned().collect();
    ops.sort_unstable();
    ops.dedup();
    for op in ops {
        for w in m.blocks.keys() {
            let Some(tw) = op_target(op, w) else { continue };
            let (mw, mtw) = (m.block_dim(w), m.block_dim(&tw));
            let (nw, ntw) = (n.block_dim(w), n.block_dim(&tw));
            if mtw == 0 && nw == 0 {
                continue;
            }
            let om = m.op_block(op, w);
            let on = n.op_block(op, w);
            let x_tw_exists = mtw > 0 && ntw > 0;
            let x_w_exists = mw > 0 && nw > 0;
            // entry (r', c) of the constraint, r' < ntw, c < mw
            for rp in 0..ntw {
                for c in 0..mw {
                    let mut row: Vec<(usize, Fel)> = Vec::new();
                    if x_tw_exists {
                        if let Some(om) = om {
                            for cp in 0..mtw {
                                let v = om.get(cp, c);
                                if v != 0 {
                                    row.push((unknown(&tw, rp, cp), v));
                                }
                            }
                        }
                    }
                    if x_w_exists {
                        if let Some(on) = on {
                            for r in 0..nw {
                                let v = on.get(rp, r);
                                if v != 0 {
                                    row.push((unknown(w, r, c), field.neg(v)));
                                }
                            }
                        }
                    }
                    if !row.is_empty() {
                        rows.push(row);
                    }
                }
            }
        }
    }
    let mut sys = Mat::zero(field, rows.len(), total);
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            let cur = sys.get(i, j);
            sys.set(i, j, field.add(cur, v));
        }
    }
    let kernel = sys.kernel();
    let mut out = Vec::new();
    for k in 0..kernel.cols {
        let mut blocks: BTreeMap<Weight, Mat> = BTreeMap::new();
        for (w, &off) in &offsets {
            let (nd, md) = (n.block_dim(w), m.block_dim(w));
            let mut mat = Mat::zero(field, nd, md);
            let mut any = false;
            for r in 0..nd {
                for c in 0..md {
                    let v = kernel.get(off + r * md + c, k);
                    if v != 0 {
                        mat.set(r, c, v);
                        any = true;
                    }
                }
            }
            if any {
                blocks.insert(w.clone(), mat);
            }
        }
        let mut map =
            ModuleMap { source: m.clone(), target: n.clone(), blocks, certified: false };
        let ok = map.certify();
        debug_assert!(ok, "hom_space solution fails certification");
        out.push(map);
    }
    out
}

/// Search for an invertible element of Hom(M, N): an explicit isomorphism
/// witness. Tries basis elements, then small linear combinations.
pub fn find_isomorphism(m: &Arc<WeightedModule>, n: &Arc<WeightedModule>) -> Option<ModuleMap> {
    if m.dim() != n.dim() || m.blocks != n.blocks {
        return None;
    }
    let basis = hom_space(m, n);
    let full = m.dim();
    let is_iso = |map: &ModuleMap| map.rank() == full;
    if let Some(map) = basis.iter().find(|h| is_iso(h)) {
        return Some(map.clone());
    }
    // pairwise combinations with small scalars
    let field = &m.field;
    let scalars: Vec<Fel> = (1..field.q().min(8)).collect();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            for &c in &scalars {
                let mut cand = basis[i].add(&scale_map(&basis[j], c));
                if is_iso(&cand) {
                    cand.certify();
                    return Some(cand);
                }
            }
        }
    }
    None
}

fn scale_map(map: &ModuleMap, c: Fel) -> ModuleMap {
    ModuleMap {
        source: map.source.clone(),
        target: map.target.clone(),
        blocks: map.blocks.iter().map(|(w, m)| (w.clone(), m.scale(c))).collect(),
        certified: false,
    }
}
