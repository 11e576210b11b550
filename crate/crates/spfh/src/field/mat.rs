//! Dense exact matrices over GF(q): bitpacked rows for q = 2, scalar rows
//! otherwise. Everything is immutable-after-construction in practice; the
//! mutating helpers are used only while assembling.

use super::{Fel, FqCtx};
use std::fmt;
use std::sync::Arc;

#[derive(Clone)]
enum Data {
    /// Row-major bitpacked rows, `wpr` words per row, little-endian bit order.
    Bit { wpr: usize, words: Vec<u64> },
    /// Row-major scalar entries.
    Gen { entries: Vec<Fel> },
}

/// A dense matrix over a fixed finite field.
#[derive(Clone)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    field: Arc<FqCtx>,
    data: Data,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} over GF({})", self.rows, self.cols, self.field.q())?;
        for i in 0..self.rows.min(16) {
            let row: Vec<String> = (0..self.cols.min(32)).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "  [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl PartialEq for Mat {
    fn eq(&self, other: &Self) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) != other.get(i, j) {
                    return false;
                }
            }
        }
        true
    }
}
impl Eq for Mat {}

impl Mat {
    pub fn zero(field: &Arc<FqCtx>, rows: usize, cols: usize) -> Mat {
        let data = if field.is_gf2() {
            let wpr = cols.div_ceil(64);
            Data::Bit { wpr, words: vec![0; wpr * rows] }
        } else {
            Data::Gen { entries: vec![0; rows * cols] }
        };
        Mat { rows, cols, field: field.clone(), data }
    }

    pub fn identity(field: &Arc<FqCtx>, n: usize) -> Mat {
        let mut m = Mat::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn from_fn(field: &Arc<FqCtx>, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Fel) -> Mat {
        let mut m = Mat::zero(field, rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                let v = f(i, j);
                if v != 0 {
                    m.set(i, j, v);
                }
            }
        }
        m
    }

    pub fn from_rows(field: &Arc<FqCtx>, rows: &[Vec<Fel>]) -> Mat {
        let r = rows.len();
        let c = rows.first().map_or(0, |r| r.len());
        Mat::from_fn(field, r, c, |i, j| rows[i][j])
    }

    pub fn field(&self) -> &Arc<FqCtx> {
        &self.field
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fel {
        debug_assert!(i < self.rows && j < self.cols);
        match &self.data {
            Data::Bit { wpr, words } => ((words[i * wpr + j / 64] >> (j % 64)) & 1) as Fel,
            Data::Gen { entries } => entries[i * self.cols + j],
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fel) {
        debug_assert!(i < self.rows && j < self.cols);
        match &mut self.data {
            Data::Bit { wpr, words } => {
                let w = &mut words[i * *wpr + j / 64];
                if v & 1 == 1 {
                    *w |= 1 << (j % 64);
                } else {
                    *w &= !(1 << (j % 64));
                }
            }
            Data::Gen { entries } => entries[i * self.cols + j] = v,
        }
    }

    pub fn is_zero(&self) -> bool {
        match &self.data {
            Data::Bit { words, .. } => words.iter().all(|&w| w == 0),
            Data::Gen { entries } => entries.iter().all(|&e| e == 0),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        match (&mut out.data, &other.data) {
            (Data::Bit { words, .. }, Data::Bit { words: ow, .. }) => {
                for (a, b) in words.iter_mut().zip(ow) {
                    *a ^= b;
                }
            }
            (Data::Gen { entries }, Data::Gen { entries: oe }) => {
                for (a, &b) in entries.iter_mut().zip(oe) {
                    *a = self.field.add(*a, b);
                }
            }
            _ => unreachable!("mixed storage"),
        }
        out
    }

    pub fn scale(&self, c: Fel) -> Mat {
        if c == 1 {
            return self.clone();
        }
        let f = &self.field;
        Mat::from_fn(f, self.rows, self.cols, |i, j| f.mul(self.get(i, j), c))
    }

    pub fn neg(&self) -> Mat {
        let f = &self.field;
        if f.p() == 2 {
            return self.clone();
        }
        Mat::from_fn(f, self.rows, self.cols, |i, j| f.neg(self.get(i, j)))
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "shape mismatch in mul");
        let f = &self.field;
        let mut out = Mat::zero(f, self.rows, other.cols);
        match (&self.data, &other.data, &mut out.data) {
            (Data::Bit { wpr, words }, Data::Bit { wpr: owpr, words: ow }, Data::Bit { words: res, .. }) => {
                for i in 0..self.rows {
                    let arow = &words[i * wpr..(i + 1) * wpr];
                    let dst = &mut res[i * owpr..(i + 1) * owpr];
                    for (k64, &aw) in arow.iter().enumerate() {
                        let mut aw = aw;
                        while aw != 0 {
                            let bit = aw.trailing_zeros() as usize;
                            aw &= aw - 1;
                            let k = k64 * 64 + bit;
                            let brow = &ow[k * owpr..(k + 1) * owpr];
                            for (d, &b) in dst.iter_mut().zip(brow) {
                                *d ^= b;
                            }
                        }
                    }
                }
            }
            _ => {
                for i in 0..self.rows {
                    for k in 0..self.cols {
                        let a = self.get(i, k);
                        if a == 0 {
                            continue;
                        }
                        for j in 0..other.cols {
                            let b = other.get(k, j);
                            if b != 0 {
                                let cur = out.get(i, j);
                                out.set(i, j, f.add(cur, f.mul(a, b)));
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Matrix-vector product (vector as a column given by a slice).
    pub fn matvec(&self, v: &[Fel]) -> Vec<Fel> {
        assert_eq!(self.cols, v.len());
        let f = &self.field;
        let mut out = vec![0; self.rows];
        for (i, slot) in out.iter_mut().enumerate() {
            let mut acc = 0;
            for (j, &x) in v.iter().enumerate() {
                if x != 0 {
                    acc = f.add(acc, f.mul(self.get(i, j), x));
                }
            }
            *slot = acc;
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let f = &self.field;
        Mat::from_fn(f, self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn col(&self, j: usize) -> Vec<Fel> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[Fel]) {
        assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self.set(i, j, x);
        }
    }

    pub fn hstack(field: &Arc<FqCtx>, parts: &[&Mat]) -> Mat {
        let rows = parts.first().map_or(0, |m| m.rows);
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Mat::zero(field, rows, cols);
        let mut off = 0;
        for m in parts {
            assert_eq!(m.rows, rows);
            for i in 0..m.rows {
                for j in 0..m.cols {
                    let v = m.get(i, j);
                    if v != 0 {
                        out.set(i, off + j, v);
                    }
                }
            }
            off += m.cols;
        }
        out
    }

    pub fn vstack(field: &Arc<FqCtx>, parts: &[&Mat]) -> Mat {
        let cols = parts.first().map_or(0, |m| m.cols);
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut out = Mat::zero(field, rows, cols);
        let mut off = 0;
        for m in parts {
            assert_eq!(m.cols, cols);
            for i in 0..m.rows {
                for j in 0..m.cols {
                    let v = m.get(i, j);
                    if v != 0 {
                        out.set(off + i, j, v);
                    }
                }
            }
            off += m.rows;
        }
        out
    }

    pub fn block_diag(field: &Arc<FqCtx>, parts: &[&Mat]) -> Mat {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Mat::zero(field, rows, cols);
        let (mut ro, mut co) = (0, 0);
        for m in parts {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    let v = m.get(i, j);
                    if v != 0 {
                        out.set(ro + i, co + j, v);
                    }
                }
            }
            ro += m.rows;
            co += m.cols;
        }
        out
    }

    /// Kronecker product, row-major index convention: (i1, i2) ↦ i1 * rows2 + i2.
    pub fn kron(&self, other: &Mat) -> Mat {
        let f = &self.field;
        let mut out = Mat::zero(f, self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.get(i1, j1);
                if a == 0 {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        let b = other.get(i2, j2);
                        if b != 0 {
                            out.set(i1 * other.rows + i2, j1 * other.cols + j2, f.mul(a, b));
                        }
                    }
                }
            }
        }
        out
    }

    pub fn select_columns(&self, idx: &[usize]) -> Mat {
        let f = &self.field;
        Mat::from_fn(f, self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Mat {
        let f = &self.field;
        Mat::from_fn(f, idx.len(), self.cols, |i, j| self.get(idx[i], j))
    }

    /// Entrywise x ↦ x^(p^steps).
    pub fn frobenius(&self, steps: i64) -> Mat {
        let f = &self.field;
        Mat::from_fn(f, self.rows, self.cols, |i, j| f.frobenius(self.get(i, j), steps))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        match &mut self.data {
            Data::Bit { wpr, words } => {
                for k in 0..*wpr {
                    words.swap(a * *wpr + k, b * *wpr + k);
                }
            }
            Data::Gen { entries } => {
                for k in 0..self.cols {
                    entries.swap(a * self.cols + k, b * self.cols + k);
                }
            }
        }
    }

    /// row[dst] += c * row[src]
    fn add_scaled_row(&mut self, dst: usize, src: usize, c: Fel) {
        if c == 0 {
            return;
        }
        let f = self.field.clone();
        match &mut self.data {
            Data::Bit { wpr, words } => {
                for k in 0..*wpr {
                    let v = words[src * *wpr + k];
                    words[dst * *wpr + k] ^= v;
                }
            }
            Data::Gen { entries } => {
                for k in 0..self.cols {
                    let v = entries[src * self.cols + k];
                    if v != 0 {
                        let d = &mut entries[dst * self.cols + k];
                        *d = f.add(*d, f.mul(c, v));
                    }
                }
            }
        }
    }

    fn scale_row(&mut self, r: usize, c: Fel) {
        if c == 1 {
            return;
        }
        let f = self.field.clone();
        match &mut self.data {
            Data::Bit { .. } => {}
            Data::Gen { entries } => {
                for k in 0..self.cols {
                    let v = &mut entries[r * self.cols + k];
                    *v = f.mul(*v, c);
                }
            }
        }
    }

    /// Reduced row echelon form: returns (rank, pivot columns, reduced matrix).
    pub fn rref(&self) -> (usize, Vec<usize>, Mat) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let mut pr = None;
            for r in row..m.rows {
                if m.get(r, col) != 0 {
                    pr = Some(r);
                    break;
                }
            }
            let Some(pr) = pr else { continue };
            m.swap_rows(row, pr);
            let inv = m.field.inv(m.get(row, col));
            m.scale_row(row, inv);
            for r in 0..m.rows {
                if r != row {
                    let c = m.get(r, col);
                    if c != 0 {
                        let nc = m.field.neg(c);
                        m.add_scaled_row(r, row, nc);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (pivots.len(), pivots, m)
    }

    pub fn rank(&self) -> usize {
        self.rref().0
    }

    /// Basis of the right null space, returned as columns of a matrix.
    pub fn kernel(&self) -> Mat {
        let (rank, pivots, red) = self.rref();
        let f = &self.field;
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Mat::zero(f, self.cols, free.len());
        for (kidx, &fc) in free.iter().enumerate() {
            out.set(fc, kidx, 1);
            for (prow, &pc) in pivots.iter().enumerate().take(rank) {
                let v = red.get(prow, fc);
                if v != 0 {
                    out.set(pc, kidx, f.neg(v));
                }
            }
        }
        out
    }

    /// Any X with self · X = rhs, or None if inconsistent.
    pub fn solve_right(&self, rhs: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, rhs.rows);
        let f = &self.field;
        let aug = Mat::hstack(f, &[self, rhs]);
        let (_, pivots, red) = aug.rref();
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = Mat::zero(f, self.cols, rhs.cols);
        for (prow, &pc) in pivots.iter().enumerate() {
            for j in 0..rhs.cols {
                let v = red.get(prow, self.cols + j);
                if v != 0 {
                    x.set(pc, j, v);
                }
            }
        }
        Some(x)
    }

    /// Rank of [self | other] minus rank of self: how much `other`'s column
    /// space sticks out of `self`'s.
    pub fn column_space_excess(&self, other: &Mat) -> usize {
        let joint = Mat::hstack(&self.field, &[self, other]);
        joint.rank() - self.rank()
    }

    /// Stable byte encoding (little-endian words for q = 2, little-endian u32
    /// entries otherwise), used by the resolution cache.
    pub fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        match &self.data {
            Data::Bit { words, .. } => {
                for w in words {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
            Data::Gen { entries } => {
                for e in entries {
                    out.extend_from_slice(&e.to_le_bytes());
                }
            }
        }
    }

    pub fn decode(field: &Arc<FqCtx>, buf: &[u8], pos: &mut usize) -> Option<Mat> {
        let take = |pos: &mut usize, n: usize| -> Option<&[u8]> {
            let s = buf.get(*pos..*pos + n)?;
            *pos += n;
            Some(s)
        };
        let rows = u64::from_le_bytes(take(pos, 8)?.try_into().ok()?) as usize;
        let cols = u64::from_le_bytes(take(pos, 8)?.try_into().ok()?) as usize;
        let mut m = Mat::zero(field, rows, cols);
        match &mut m.data {
            Data::Bit { wpr, words } => {
                for i in 0..rows * *wpr {
                    words[i] = u64::from_le_bytes(take(pos, 8)?.try_into().ok()?);
                }
            }
            Data::Gen { entries } => {
                for i in 0..rows * cols {
                    entries[i] = u32::from_le_bytes(take(pos, 4)?.try_into().ok()?);
                }
            }
        }
        Some(m)
    }
}

/// An incremental row-echelon basis of a subspace of k^dim, supporting
/// membership tests and reduction. Rows are kept reduced; over GF(2) the
/// rows are bitpacked.
pub struct Echelon {
    field: Arc<FqCtx>,
    pub dim: usize,
    rows: EchRows,
}

enum EchRows {
    Gen(Vec<(usize, Vec<Fel>)>),
    Bit { wpr: usize, rows: Vec<(usize, Vec<u64>)> },
}

fn pack_bits(v: &[Fel], wpr: usize) -> Vec<u64> {
    let mut out = vec![0u64; wpr];
    for (i, &x) in v.iter().enumerate() {
        if x & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

impl Echelon {
    pub fn new(field: &Arc<FqCtx>, dim: usize) -> Echelon {
        let rows = if field.is_gf2() {
            EchRows::Bit { wpr: dim.div_ceil(64), rows: Vec::new() }
        } else {
            EchRows::Gen(Vec::new())
        };
        Echelon { field: field.clone(), dim, rows }
    }

    pub fn rank(&self) -> usize {
        match &self.rows {
            EchRows::Gen(r) => r.len(),
            EchRows::Bit { rows, .. } => rows.len(),
        }
    }

    /// Reduce v against the basis in place; returns the pivot position if the
    /// residue is nonzero.
    fn reduce(&self, v: &mut [Fel]) -> Option<usize> {
        let f = &self.field;
        match &self.rows {
            EchRows::Gen(rows) => {
                for (piv, row) in rows {
                    let c = v[*piv];
                    if c != 0 {
                        let nc = f.neg(c);
                        for (slot, &rv) in v.iter_mut().zip(row) {
                            if rv != 0 {
                                *slot = f.add(*slot, f.mul(nc, rv));
                            }
                        }
                    }
                }
                v.iter().position(|&x| x != 0)
            }
            EchRows::Bit { wpr, rows } => {
                let mut packed = pack_bits(v, *wpr);
                for (piv, row) in rows {
                    if (packed[piv / 64] >> (piv % 64)) & 1 == 1 {
                        for (a, b) in packed.iter_mut().zip(row) {
                            *a ^= b;
                        }
                    }
                }
                let mut first = None;
                for (w, &word) in packed.iter().enumerate() {
                    if word != 0 {
                        first = Some(w * 64 + word.trailing_zeros() as usize);
                        break;
                    }
                }
                for (i, slot) in v.iter_mut().enumerate() {
                    *slot = ((packed[i / 64] >> (i % 64)) & 1) as Fel;
                }
                first
            }
        }
    }

    /// Insert v; returns true if it enlarged the span.
    pub fn insert(&mut self, mut v: Vec<Fel>) -> bool {
        assert_eq!(v.len(), self.dim);
        let Some(piv) = self.reduce(&mut v) else { return false };
        let f = self.field.clone();
        match &mut self.rows {
            EchRows::Gen(rows) => {
                let inv = f.inv(v[piv]);
                if inv != 1 {
                    for x in v.iter_mut() {
                        *x = f.mul(*x, inv);
                    }
                }
                for (_, row) in rows.iter_mut() {
                    let c = row[piv];
                    if c != 0 {
                        let nc = f.neg(c);
                        for (slot, &rv) in row.iter_mut().zip(&v) {
                            if rv != 0 {
                                *slot = f.add(*slot, f.mul(nc, rv));
                            }
                        }
                    }
                }
                let at = rows.partition_point(|(p, _)| *p < piv);
                rows.insert(at, (piv, v));
            }
            EchRows::Bit { wpr, rows } => {
                let packed = pack_bits(&v, *wpr);
                for (_, row) in rows.iter_mut() {
                    if (row[piv / 64] >> (piv % 64)) & 1 == 1 {
                        for (a, b) in row.iter_mut().zip(&packed) {
                            *a ^= b;
                        }
                    }
                }
                let at = rows.partition_point(|(p, _)| *p < piv);
                rows.insert(at, (piv, packed));
            }
        }
        true
    }

    pub fn contains(&self, v: &[Fel]) -> bool {
        let mut w = v.to_vec();
        self.reduce(&mut w).is_none()
    }

    /// First standard basis vector not in the span, if any.
    pub fn first_missing_unit(&self) -> Option<usize> {
        (0..self.dim).find(|&i| {
            let mut v = vec![0; self.dim];
            v[i] = 1;
            !self.contains(&v)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FqCtx;

    fn lcg(state: &mut u64) -> u64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        *state >> 33
    }

    #[test]
    fn rref_identical_rows_gf2() {
        let f = FqCtx::new(2, 1).unwrap();
        let m = Mat::from_rows(&f, &[vec![1, 1], vec![1, 1]]);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn rref_identity() {
        let f = FqCtx::new(5, 1).unwrap();
        let m = Mat::identity(&f, 3);
        let (rank, _, red) = m.rref();
        assert_eq!(rank, 3);
        assert_eq!(red, m);
    }

    #[test]
    fn rank_via_determinant_gf3() {
        // det [[1,2],[2,1]] = 1 - 4 = -3 = 0 mod 3, so rank 1
        let f = FqCtx::new(3, 1).unwrap();
        let m = Mat::from_rows(&f, &[vec![1, 2], vec![2, 1]]);
        let det = f.sub(f.mul(m.get(0, 0), m.get(1, 1)), f.mul(m.get(0, 1), m.get(1, 0)));
        assert_eq!(det, 0);
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn kernel_cases() {
        let f = FqCtx::new(2, 1).unwrap();
        assert_eq!(Mat::zero(&f, 2, 2).kernel().cols, 2);
        assert_eq!(Mat::identity(&f, 4).kernel().cols, 0);
    }

    #[test]
    fn random_rank_nullity_and_remult() {
        let mut st = 0xfeed_beefu64;
        for (p, r) in [(2u64, 1u32), (3, 1), (2, 2), (7, 1)] {
            let f = FqCtx::new(p, r).unwrap();
            for _ in 0..20 {
                let m = Mat::from_fn(&f, 5, 8, |_, _| (lcg(&mut st) % f.q() as u64) as Fel);
                let k = m.kernel();
                assert_eq!(m.rank() + k.cols, 8);
                assert!(m.mul(&k).is_zero());
                assert_eq!(k.rank(), k.cols);
            }
        }
    }

    #[test]
    fn solve_then_substitute() {
        let mut st = 17u64;
        let f = FqCtx::new(3, 2).unwrap();
        for _ in 0..20 {
            let a = Mat::from_fn(&f, 6, 4, |_, _| (lcg(&mut st) % 9) as Fel);
            let x0 = Mat::from_fn(&f, 4, 2, |_, _| (lcg(&mut st) % 9) as Fel);
            let b = a.mul(&x0);
            let x = a.solve_right(&b).expect("consistent by construction");
            assert_eq!(a.mul(&x), b);
        }
    }

    #[test]
    fn rank_invariant_under_permutation() {
        let mut st = 99u64;
        let f = FqCtx::new(2, 1).unwrap();
        let m = Mat::from_fn(&f, 6, 6, |_, _| (lcg(&mut st) % 2) as Fel);
        let perm = [3usize, 1, 5, 0, 4, 2];
        let pm = m.select_rows(&perm).select_columns(&perm);
        assert_eq!(m.rank(), pm.rank());
    }

    #[test]
    fn echelon_membership() {
        let f = FqCtx::new(3, 1).unwrap();
        let mut e = Echelon::new(&f, 4);
        assert!(e.insert(vec![1, 2, 0, 1]));
        assert!(e.insert(vec![0, 1, 1, 0]));
        assert!(!e.insert(vec![1, 0, 1, 1])); // 1*r1 - 2*r2... dependent: r1 + r2*? check: r1 - 2 r2 = (1,0,-2,1) = (1,0,1,1) mod 3
        assert!(e.contains(&[2, 2, 1, 2]));
        assert!(!e.contains(&[2, 1, 1, 2]));
        assert_eq!(e.rank(), 2);
    }

    #[test]
    fn encode_decode_roundtrip() {
        let mut st = 5u64;
        for (p, r) in [(2u64, 1u32), (3, 2)] {
            let f = FqCtx::new(p, r).unwrap();
            let m = Mat::from_fn(&f, 7, 5, |_, _| (lcg(&mut st) % f.q() as u64) as Fel);
            let mut buf = Vec::new();
            m.encode(&mut buf);
            let mut pos = 0;
            let m2 = Mat::decode(&f, &buf, &mut pos).unwrap();
            assert_eq!(pos, buf.len());
            assert_eq!(m, m2);
        }
    }
}
