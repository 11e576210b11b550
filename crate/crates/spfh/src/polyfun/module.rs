//! Weight-graded modules over the Schur algebra S(n, d).
//!
//! A module is a weight-decomposed space together with the matrices of the
//! divided-power raising and lowering operators e_i^(m), f_i^(m) for
//! 1 <= i < n, 1 <= m <= d. Together with the (implicit) weight idempotents
//! these generate S(n, d), so commuting with them is exactly being a module
//! map. Operators are stored block-sparse: e_i^(m) sends the weight-μ block
//! into the weight-(μ + m·ε_i − m·ε_{i+1}) block and is zero elsewhere.

use crate::field::{Fel, FqCtx, Mat};
use std::collections::BTreeMap;
use std::sync::Arc;

/// A weight: a composition of the degree into n parts.
pub type Weight = Vec<u16>;

pub fn weight_degree(w: &Weight) -> u16 {
    w.iter().sum()
}

/// Which operator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OpKind {
    /// e_i^(m): moves m units from slot i+1 to slot i (raising).
    E,
    /// f_i^(m): moves m units from slot i to slot i+1 (lowering).
    F,
}

/// Operator id: family, index i (1-based, 1 <= i < n), divided power m >= 1.
pub type OpId = (OpKind, u16, u16);

/// Target weight of an operator on a source weight, if it stays a composition.
pub fn op_target(op: OpId, w: &Weight) -> Option<Weight> {
    let (kind, i, m) = op;
    let i = i as usize - 1;
    let (from, to) = match kind {
        OpKind::E => (i + 1, i),
        OpKind::F => (i, i + 1),
    };
    if (w[from] as u32) < m as u32 {
        return None;
    }
    let mut out = w.clone();
    out[from] -= m;
    out[to] += m;
    Some(out)
}

/// Block-sparse weight-shifting map: per source weight, a (target-dim × source-dim) matrix.
#[derive(Debug, Clone, Default)]
pub struct BlockShift {
    pub blocks: BTreeMap<Weight, Mat>,
}

/// A weight-graded S(n, d)-module (mixed degrees allowed internally; the
/// public eval interface splits by degree).
#[derive(Debug, Clone)]
pub struct WeightedModule {
    pub field: Arc<FqCtx>,
    pub n: usize,
    pub blocks: BTreeMap<Weight, usize>,
    pub ops: BTreeMap<OpId, BlockShift>,
    pub faithful: bool,
}

impl WeightedModule {
    pub fn empty(field: &Arc<FqCtx>, n: usize) -> WeightedModule {
        WeightedModule {
            field: field.clone(),
            n,
            blocks: BTreeMap::new(),
            ops: BTreeMap::new(),
            faithful: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.blocks.values().sum()
    }

    pub fn block_dim(&self, w: &Weight) -> usize {
        self.blocks.get(w).copied().unwrap_or(0)
    }

    /// Global offset of each block in the canonical basis order.
    pub fn offsets(&self) -> BTreeMap<Weight, usize> {
        let mut out = BTreeMap::new();
        let mut off = 0;
        for (w, d) in &self.blocks {
            out.insert(w.clone(), off);
            off += d;
        }
        out
    }

    /// Weight of each global basis index.
    pub fn weight_of_index(&self) -> Vec<Weight> {
        let mut out = Vec::with_capacity(self.dim());
        for (w, d) in &self.blocks {
            for _ in 0..*d {
                out.push(w.clone());
            }
        }
        out
    }

    pub fn degrees(&self) -> Vec<u16> {
        let mut ds: Vec<u16> = self.blocks.keys().map(weight_degree).collect();
        ds.sort_unstable();
        ds.dedup();
        ds
    }

    pub fn is_homogeneous(&self) -> bool {
        self.degrees().len() <= 1
    }

    pub fn degree(&self) -> Option<u16> {
        let ds = self.degrees();
        match ds.len() {
            0 => Some(0),
            1 => Some(ds[0]),
            _ => None,
        }
    }

    /// Largest divided power stored (operators above act as zero).
    pub fn max_power(&self) -> u16 {
        self.degrees().last().copied().unwrap_or(0)
    }

    pub fn op_block(&self, op: OpId, w: &Weight) -> Option<&Mat> {
        self.ops.get(&op)?.blocks.get(w)
    }

    /// All operator ids potentially nonzero on this module.
    pub fn op_ids(&self) -> Vec<OpId> {
        let maxm = self.max_power();
        let mut out = Vec::new();
        for i in 1..self.n as u16 {
            for m in 1..=maxm {
                out.push((OpKind::E, i, m));
                out.push((OpKind::F, i, m));
            }
        }
        out
    }

    /// Apply an operator to a vector supported in one weight block.
    pub fn op_apply(&self, op: OpId, w: &Weight, v: &[Fel]) -> Option<(Weight, Vec<Fel>)> {
        let tgt = op_target(op, w)?;
        if self.block_dim(&tgt) == 0 {
            return None;
        }
        let mat = self.op_block(op, w)?;
        Some((tgt, mat.matvec(v)))
    }

    /// Split a mixed-degree module into its homogeneous pieces.
    pub fn split_by_degree(&self) -> BTreeMap<u16, WeightedModule> {
        let mut out: BTreeMap<u16, WeightedModule> = BTreeMap::new();
        for (w, d) in &self.blocks {
            let m = out
                .entry(weight_degree(w))
                .or_insert_with(|| WeightedModule::empty(&self.field, self.n));
            m.blocks.insert(w.clone(), *d);
        }
        for (op, shift) in &self.ops {
            for (w, mat) in &shift.blocks {
                let deg = weight_degree(w);
                if let Some(m) = out.get_mut(&deg) {
                    m.ops.entry(*op).or_default().blocks.insert(w.clone(), mat.clone());
                }
            }
        }
        for m in out.values_mut() {
            m.faithful = self.faithful && m.degree().map(|d| self.n >= d as usize).unwrap_or(true);
        }
        out
    }

    /// Direct sum; returns the merged module and, per summand, the embedding
    /// offset of each of its blocks inside the merged block.
    pub fn direct_sum(parts: &[&WeightedModule]) -> (WeightedModule, Vec<BTreeMap<Weight, usize>>) {
        let field = parts[0].field.clone();
        let n = parts[0].n;
        let mut merged = WeightedModule::empty(&field, n);
        let mut embeds = Vec::with_capacity(parts.len());
        for part in parts {
            assert_eq!(part.n, n, "direct sum needs a common rank");
            let mut embed = BTreeMap::new();
            for (w, d) in &part.blocks {
                let slot = merged.blocks.entry(w.clone()).or_insert(0);
                embed.insert(w.clone(), *slot);
                *slot += d;
            }
            embeds.push(embed);
        }
        // operators: block-diagonal in the merged coordinates
        let mut all_ops: Vec<OpId> = Vec::new();
        for part in parts {
            for op in part.ops.keys() {
                if !all_ops.contains(op) {
                    all_ops.push(*op);
                }
            }
        }
        for op in all_ops {
            let mut shift = BlockShift::default();
            for (w, &sdim) in &merged.blocks {
                let Some(tgt) = op_target(op, w) else { continue };
                let tdim = merged.block_dim(&tgt);
                if tdim == 0 {
                    continue;
                }
                let mut any = false;
                let mut mat = Mat::zero(&field, tdim, sdim);
                for (pidx, part) in parts.iter().enumerate() {
                    let (Some(&so), Some(&to)) = (embeds[pidx].get(w), embeds[pidx].get(&tgt))
                    else {
                        continue;
                    };
                    if let Some(block) = part.op_block(op, w) {
                        for i in 0..block.rows {
                            for j in 0..block.cols {
                                let v = block.get(i, j);
                                if v != 0 {
                                    mat.set(to + i, so + j, v);
                                    any = true;
                                }
                            }
                        }
                    }
                }
                if any {
                    shift.blocks.insert(w.clone(), mat);
                }
            }
            if !shift.blocks.is_empty() {
                merged.ops.insert(op, shift);
            }
        }
        merged.faithful = parts.iter().all(|p| p.faithful);
        (merged, embeds)
    }

    /// Tensor product. Basis of the merged μ-block: pairs of blocks
    /// (μ1, μ2) with μ1 + μ2 = μ in lexicographic order of (μ1, μ2), then
    /// row-major (left index major) inside the pair.
    pub fn tensor(a: &WeightedModule, b: &WeightedModule) -> WeightedModule {
        assert_eq!(a.n, b.n);
        let field = a.field.clone();
        let n = a.n;
        let layout = TensorLayout::new(a, b);
        let mut out = WeightedModule::empty(&field, n);
        out.blocks = layout.blocks.clone();
        let maxm = {
            let da = a.max_power();
            let db = b.max_power();
            da + db
        };
        for i in 1..n as u16 {
            for m in 1..=maxm {
                for kind in [OpKind::E, OpKind::F] {
                    let op = (kind, i, m);
                    let mut shift = BlockShift::default();
                    for (w, &sdim) in &out.blocks {
                        let Some(tgt) = op_target(op, w) else { continue };
                        let tdim = out.block_dim(&tgt);
                        if tdim == 0 {
                            continue;
                        }
                        let mut mat = Mat::zero(&field, tdim, sdim);
                        let mut any = false;
                        // divided-power Leibniz: op^(m)(x⊗y) = Σ_{u+v=m} op^(u)x ⊗ op^(v)y
                        for (w1, w2, soff) in layout.pairs(w) {
                            let (d1, d2) = (a.block_dim(w1), b.block_dim(w2));
                            for u in 0..=m {
                                let v = m - u;
                                // left factor target/source
                                let (t1, m1) = if u == 0 {
                                    (w1.clone(), None)
                                } else {
                                    match op_target((kind, i, u), w1) {
                                        Some(t) => (t, Some(a.op_block((kind, i, u), w1))),
                                        None => continue,
                                    }
                                };
                                if u > 0 && m1.as_ref().is_none_or(|o| o.is_none()) {
                                    continue;
                                }
                                let (t2, m2) = if v == 0 {
                                    (w2.clone(), None)
                                } else {
                                    match op_target((kind, i, v), w2) {
                                        Some(t) => (t, Some(b.op_block((kind, i, v), w2))),
                                        None => continue,
                                    }
                                };
                                if v > 0 && m2.as_ref().is_none_or(|o| o.is_none()) {
                                    continue;
                                }
                                let Some(toff) = layout.pair_offset(&tgt, &t1, &t2) else {
                                    continue;
                                };
                                let (td1, td2) = (a.block_dim(&t1), b.block_dim(&t2));
                                // entry ((r1,r2),(c1,c2)) = M1[r1,c1] * M2[r2,c2]
                                for r1 in 0..td1 {
                                    for c1 in 0..d1 {
                                        let x = match &m1 {
                                            Some(Some(mm)) => mm.get(r1, c1),
                                            _ => u16::from(r1 == c1) as Fel,
                                        };
                                        if x == 0 {
                                            continue;
                                        }
                                        for r2 in 0..td2 {
                                            for c2 in 0..d2 {
                                                let y = match &m2 {
                                                    Some(Some(mm)) => mm.get(r2, c2),
                                                    _ => u16::from(r2 == c2) as Fel,
                                                };
                                                if y == 0 {
                                                    continue;
                                                }
                                                let row = toff + r1 * td2 + r2;
                                                let col = soff + c1 * d2 + c2;
                                                let cur = mat.get(row, col);
                                                mat.set(row, col, field.add(cur, field.mul(x, y)));
                                                any = true;
                                            }
                                        }
                                    }
                                }
                            }
                        }
                        if any {
                            shift.blocks.insert(w.clone(), mat);
                        }
                    }
                    if !shift.blocks.is_empty() {
                        out.ops.insert(op, shift);
                    }
                }
            }
        }
        out.faithful = a.faithful && b.faithful;
        out
    }

    /// Frobenius twist: weights scale by p^r, operator powers reindex
    /// (e_i^(m·p^r) of the twist is e_i^(m) of the original).
    pub fn twist(&self, r: u32) -> WeightedModule {
        let scale = (self.field.p() as u64).pow(r) as u16;
        let mut out = WeightedModule::empty(&self.field, self.n);
        let relabel = |w: &Weight| -> Weight { w.iter().map(|&x| x * scale).collect() };
        for (w, d) in &self.blocks {
            out.blocks.insert(relabel(w), *d);
        }
        for ((kind, i, m), shift) in &self.ops {
            let mut ns = BlockShift::default();
            for (w, mat) in &shift.blocks {
                ns.blocks.insert(relabel(w), mat.clone());
            }
            out.ops.insert((*kind, *i, *m * scale), ns);
        }
        out.faithful = self.faithful;
        out
    }

    /// Kuhn dual: same weights, operators transposed with e and f exchanged.
    pub fn kuhn_dual(&self) -> WeightedModule {
        let mut out = WeightedModule::empty(&self.field, self.n);
        out.blocks = self.blocks.clone();
        for ((kind, i, m), shift) in &self.ops {
            let flipped = match kind {
                OpKind::E => OpKind::F,
                OpKind::F => OpKind::E,
            };
            let mut ns = BlockShift::default();
            for (src, mat) in &shift.blocks {
                // original: src → tgt; dual: tgt → src with transposed matrix
                let tgt = op_target((*kind, *i, *m), src).expect("stored op block has a target");
                ns.blocks.insert(tgt, mat.transpose());
            }
            out.ops.insert((flipped, *i, *m), ns);
        }
        out.faithful = self.faithful;
        out
    }

    /// Rebuild with new weight labels per global basis index. New order is the
    /// stable sort by (new weight, old global index); returns the map
    /// old global index → new global index. Operators must remain weight-shift
    /// maps in the new labels (asserted).
    pub fn relabel(&self, new_weights: &[Weight]) -> (WeightedModule, Vec<usize>) {
        assert_eq!(new_weights.len(), self.dim());
        let field = self.field.clone();
        let nlen = new_weights.first().map(|w| w.len()).unwrap_or(self.n);
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&x, &y| new_weights[x].cmp(&new_weights[y]).then(x.cmp(&y)));
        let mut fwd = vec![0usize; self.dim()];
        for (new_idx, &old_idx) in order.iter().enumerate() {
            fwd[old_idx] = new_idx;
        }
        let mut out = WeightedModule::empty(&field, nlen);
        for &old_idx in &order {
            *out.blocks.entry(new_weights[old_idx].clone()).or_insert(0) += 1;
        }
        let new_offsets = out.offsets();
        let old_offsets = self.offsets();
        // transport each stored operator block entrywise
        for (op, shift) in &self.ops {
            // the twisted power reindexing happens in twist(); here powers stay
            let mut entries: BTreeMap<Weight, Vec<(usize, usize, Fel)>> = BTreeMap::new();
            for (src_w, mat) in &shift.blocks {
                let tgt_w = op_target(*op, src_w).expect("stored op block has a target");
                let so = old_offsets[src_w];
                let Some(&to) = old_offsets.get(&tgt_w) else { continue };
                for r in 0..mat.rows {
                    for c in 0..mat.cols {
                        let v = mat.get(r, c);
                        if v == 0 {
                            continue;
                        }
                        let gsrc = fwd[so + c];
                        let gtgt = fwd[to + r];
                        let nw_src = &new_weights[order[gsrc]];
                        // sanity: the op must shift new weights consistently
                        let expect = op_target(*op, nw_src);
                        let nw_tgt = &new_weights[order[gtgt]];
                        assert_eq!(
                            expect.as_ref(),
                            Some(nw_tgt),
                            "relabel broke the weight-shift invariant"
                        );
                        entries.entry(nw_src.clone()).or_default().push((gtgt, gsrc, v));
                    }
                }
            }
            let mut ns = BlockShift::default();
            for (nw_src, es) in entries {
                let tgt = op_target(*op, &nw_src).unwrap();
                let sdim = out.block_dim(&nw_src);
                let tdim = out.block_dim(&tgt);
                let soff = new_offsets[&nw_src];
                let toff = new_offsets[&tgt];
                let mut mat = Mat::zero(&field, tdim, sdim);
                for (gt, gs, v) in es {
                    mat.set(gt - toff, gs - soff, v);
                }
                ns.blocks.insert(nw_src, mat);
            }
            if !ns.blocks.is_empty() {
                out.ops.insert(*op, ns);
            }
        }
        out.faithful = self.faithful;
        (out, fwd)
    }

    /// Check e_i^(a)·e_i^(b) = C(a+b, a)·e_i^(a+b) (and the f version) as matrices.
    pub fn verify_divided_power_relations(&self) -> bool {
        let f = &self.field;
        let maxm = self.max_power();
        for i in 1..self.n as u16 {
            for kind in [OpKind::E, OpKind::F] {
                for a in 1..=maxm {
                    for b in 1..=maxm - a.min(maxm) {
                        if a + b > maxm {
                            continue;
                        }
                        let coeff = f.binom((a + b) as u64, a as u64);
                        for (w, &sdim) in &self.blocks {
                            if sdim == 0 {
                                continue;
                            }
                            let opb = (kind, i, b);
                            let opa = (kind, i, a);
                            let opab = (kind, i, a + b);
                            let via = op_target(opb, w).and_then(|mid| {
                                let mb = self.op_block(opb, w)?;
                                let ma = self.op_block(opa, &mid)?;
                                Some(ma.mul(mb))
                            });
                            let direct = op_target(opab, w)
                                .filter(|t| self.block_dim(t) > 0)
                                .map(|t| match self.op_block(opab, w) {
                                    Some(m) => m.scale(coeff),
                                    None => Mat::zero(f, self.block_dim(&t), sdim),
                                });
                            match (via, direct) {
                                (Some(lhs), Some(rhs)) => {
                                    if lhs != rhs {
                                        return false;
                                    }
                                }
                                (Some(lhs), None) => {
                                    if !lhs.is_zero() {
                                        return false;
                                    }
                                }
                                (None, Some(rhs)) => {
                                    if coeff != 0 && !rhs.is_zero() {
                                        return false;
                                    }
                                }
                                (None, None) => {}
                            }
                        }
                    }
                }
            }
        }
        true
    }
}

/// Split a global (canonical-order) matrix source → target into per-weight
/// blocks; None if any entry crosses weights (not weight-preserving).
pub fn global_to_blocks(
    src: &WeightedModule,
    tgt: &WeightedModule,
    m: &Mat,
) -> Option<BTreeMap<Weight, Mat>> {
    if m.cols != src.dim() || m.rows != tgt.dim() {
        return None;
    }
    let sw = src.weight_of_index();
    let tw = tgt.weight_of_index();
    let soff = src.offsets();
    let toff = tgt.offsets();
    let mut out: BTreeMap<Weight, Mat> = BTreeMap::new();
    for r in 0..m.rows {
        for c in 0..m.cols {
            let v = m.get(r, c);
            if v == 0 {
                continue;
            }
            if sw[c] != tw[r] {
                return None;
            }
            let w = &sw[c];
            let block = out.entry(w.clone()).or_insert_with(|| {
                Mat::zero(&src.field, tgt.block_dim(w), src.block_dim(w))
            });
            block.set(r - toff[w], c - soff[w], v);
        }
    }
    Some(out)
}

/// Assemble per-weight blocks into a global matrix.
pub fn blocks_to_global(
    src: &WeightedModule,
    tgt: &WeightedModule,
    blocks: &BTreeMap<Weight, Mat>,
) -> Mat {
    let soff = src.offsets();
    let toff = tgt.offsets();
    let mut out = Mat::zero(&src.field, tgt.dim(), src.dim());
    for (w, b) in blocks {
        let (Some(&so), Some(&to)) = (soff.get(w), toff.get(w)) else { continue };
        for r in 0..b.rows {
            for c in 0..b.cols {
                let v = b.get(r, c);
                if v != 0 {
                    out.set(to + r, so + c, v);
                }
            }
        }
    }
    out
}

/// True when the global matrix is weight-preserving and commutes with every
/// stored operator of source and target — i.e. is a module map.
pub fn is_module_map(src: &WeightedModule, tgt: &WeightedModule, m: &Mat) -> bool {
    let Some(blocks) = global_to_blocks(src, tgt, m) else { return false };
    let field = &src.field;
    let mut ops: Vec<OpId> = src.ops.keys().chain(tgt.ops.keys()).cloned().collect();
    ops.sort_unstable();
    ops.dedup();
    for op in ops {
        for (w, &sdim) in &src.blocks {
            let Some(tw) = op_target(op, w) else { continue };
            let tdim = tgt.block_dim(&tw);
            // φ_{tw} ∘ op_src[w] vs op_tgt[w] ∘ φ_w, zero-defaulted blocks
            let lhs = match (blocks.get(&tw), src.op_block(op, w)) {
                (Some(phi), Some(o)) => phi.mul(o),
                _ => Mat::zero(field, tdim, sdim),
            };
            let rhs = match (tgt.op_block(op, w), blocks.get(w)) {
                (Some(o), Some(phi)) => o.mul(phi),
                _ => Mat::zero(field, tdim, sdim),
            };
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

/// Layout of a tensor product: where the (μ1, μ2) pair sits inside the merged block.
pub struct TensorLayout {
    pub blocks: BTreeMap<Weight, usize>,
    /// merged weight → list of (w1, w2, offset within merged block)
    pair_offsets: BTreeMap<Weight, Vec<(Weight, Weight, usize)>>,
}

impl TensorLayout {
    pub fn new(a: &WeightedModule, b: &WeightedModule) -> TensorLayout {
        let mut blocks: BTreeMap<Weight, usize> = BTreeMap::new();
        let mut pair_offsets: BTreeMap<Weight, Vec<(Weight, Weight, usize)>> = BTreeMap::new();
        for (w1, d1) in &a.blocks {
            for (w2, d2) in &b.blocks {
                let w: Weight = w1.iter().zip(w2).map(|(&x, &y)| x + y).collect();
                let entry = blocks.entry(w.clone()).or_insert(0);
                pair_offsets.entry(w).or_default().push((w1.clone(), w2.clone(), *entry));
                *entry += d1 * d2;
            }
        }
        // pair lists were pushed in (w1, w2) lex order because of BTree iteration ✓
        TensorLayout { blocks, pair_offsets }
    }

    pub fn pairs(&self, w: &Weight) -> impl Iterator<Item = (&Weight, &Weight, usize)> {
        self.pair_offsets.get(w).into_iter().flatten().map(|(a, b, o)| (a, b, *o))
    }

    pub fn pair_offset(&self, w: &Weight, w1: &Weight, w2: &Weight) -> Option<usize> {
        self.pair_offsets
            .get(w)?
            .iter()
            .find(|(a, b, _)| a == w1 && b == w2)
            .map(|(_, _, o)| *o)
    }
}
