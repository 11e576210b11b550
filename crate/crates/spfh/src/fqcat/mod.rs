//! The truncated category of F_q-vector spaces: objects F_q^0, …, F_q^N and
//! all linear maps, with morphism actions stored only on a generating set.
//! Arbitrary actions are computed on demand through an epi-mono factorization
//! of the morphism into generator words.

pub mod ext;
pub mod module;

pub use ext::{cat_ext, cat_hom, cat_hom_complex, cat_resolve, cat_tor, restrict_functor, stabilization_scan, CatExtData, CatResolution, ScanReport};
pub use module::build_proj;
pub use module::CatModule;

use crate::error::EngineError;
use crate::field::{Fel, FqCtx, Mat};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// A morphism F_q^a → F_q^b: a b×a matrix over F_q.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FqMor {
    pub a: usize,
    pub b: usize,
    pub mat: Mat,
}

impl FqMor {
    pub fn new(mat: Mat) -> FqMor {
        FqMor { a: mat.cols, b: mat.rows, mat }
    }

    /// Encode as an integer in 0..q^(ab), column-major base-q digits.
    pub fn encode(&self, q: u64) -> u64 {
        let mut code = 0u64;
        for j in (0..self.a).rev() {
            for i in (0..self.b).rev() {
                code = code * q + self.mat.get(i, j) as u64;
            }
        }
        code
    }

    pub fn decode(field: &Arc<FqCtx>, a: usize, b: usize, mut code: u64) -> FqMor {
        let q = field.q() as u64;
        let mut mat = Mat::zero(field, b, a);
        for j in 0..a {
            for i in 0..b {
                mat.set(i, j, (code % q) as Fel);
                code /= q;
            }
        }
        FqMor { a, b, mat }
    }
}

/// Generating morphisms: standard inclusions/projections between adjacent
/// objects and GL generators (transvections over an additive basis of F_q,
/// one dilation by a multiplicative generator) per object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gen {
    /// m → m+1, embedding the first m coordinates.
    Incl(usize),
    /// m+1 → m, dropping the last coordinate.
    Proj(usize),
    /// m → m, I + λ·E_{ij} with i ≠ j.
    Transv { m: usize, i: usize, j: usize, lam: Fel },
    /// m → m, diagonal with u ≠ 0 at position pos.
    Dilat { m: usize, pos: usize, u: Fel },
}

impl Gen {
    pub fn source(&self) -> usize {
        match self {
            Gen::Incl(m) => *m,
            Gen::Proj(m) => *m + 1,
            Gen::Transv { m, .. } | Gen::Dilat { m, .. } => *m,
        }
    }

    pub fn target(&self) -> usize {
        match self {
            Gen::Incl(m) => *m + 1,
            Gen::Proj(m) => *m,
            Gen::Transv { m, .. } | Gen::Dilat { m, .. } => *m,
        }
    }

    pub fn matrix(&self, field: &Arc<FqCtx>) -> Mat {
        match *self {
            Gen::Incl(m) => Mat::from_fn(field, m + 1, m, |i, j| u32::from(i == j)),
            Gen::Proj(m) => Mat::from_fn(field, m, m + 1, |i, j| u32::from(i == j)),
            Gen::Transv { m, i, j, lam } => {
                let mut mat = Mat::identity(field, m);
                mat.set(i, j, lam);
                mat
            }
            Gen::Dilat { m, pos, u } => {
                let mut mat = Mat::identity(field, m);
                mat.set(pos, pos, u);
                mat
            }
        }
    }
}

/// The truncated category with its factorization machinery.
pub struct TruncCat {
    pub field: Arc<FqCtx>,
    pub nmax: usize,
    factored: Mutex<HashMap<(usize, usize, u64), Arc<Vec<Gen>>>>,
}

impl std::fmt::Debug for TruncCat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TruncCat(q = {}, N = {})", self.field.q(), self.nmax)
    }
}

impl TruncCat {
    pub fn new(field: &Arc<FqCtx>, nmax: usize) -> Result<Arc<TruncCat>, EngineError> {
        let q = field.q() as u64;
        // default caps: q ∈ {2, 3, 4}, N ≤ 4 at q = 2, N ≤ 3 otherwise
        let max_n = if q == 2 { 4 } else { 3 };
        if !(q == 2 || q == 3 || q == 4) || nmax > max_n {
            return Err(EngineError::InvalidJob {
                detail: format!("truncated category caps: q ∈ {{2,3,4}}, N ≤ {max_n} at q = {q}"),
            });
        }
        Ok(Arc::new(TruncCat { field: field.clone(), nmax, factored: Mutex::new(HashMap::new()) }))
    }

    pub fn q(&self) -> u64 {
        self.field.q() as u64
    }

    /// Morphism count |Hom(F_q^a, F_q^b)| = q^(ab).
    pub fn hom_count(&self, a: usize, b: usize) -> u64 {
        self.q().pow((a * b) as u32)
    }

    /// All category generators with source ≤ N.
    pub fn generators(&self) -> Vec<Gen> {
        let field = &self.field;
        let mut out = Vec::new();
        for m in 0..self.nmax {
            out.push(Gen::Incl(m));
            out.push(Gen::Proj(m));
        }
        // additive basis of F_q: the polynomial-basis digits 1, x, x², …
        let p = field.p() as u64;
        let adds: Vec<Fel> = (0..field.spec.r).map(|k| p.pow(k) as Fel).collect();
        for m in 2..=self.nmax {
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        for &lam in &adds {
                            out.push(Gen::Transv { m, i, j, lam });
                        }
                    }
                }
            }
        }
        let g = field.generator();
        if g != 1 {
            for m in 1..=self.nmax {
                out.push(Gen::Dilat { m, pos: 0, u: g });
            }
        }
        out
    }

    /// Factor f into a generator word (composition right-to-left:
    /// f = word[0] ∘ word[1] ∘ …). Deterministic, memoized.
    pub fn factor(&self, f: &FqMor) -> Arc<Vec<Gen>> {
        let key = (f.a, f.b, f.encode(self.q()));
        if let Some(hit) = self.factored.lock().unwrap().get(&key) {
            return hit.clone();
        }
        let word = Arc::new(self.factor_uncached(f));
        self.factored.lock().unwrap().insert(key, word.clone());
        word
    }

    fn factor_uncached(&self, f: &FqMor) -> Vec<Gen> {
        let field = &self.field;
        let (a, b) = (f.a, f.b);
        let mut g = f.mat.clone();
        let mut left: Vec<Gen> = Vec::new(); // f = left ∘ g ∘ right
        let mut right: Vec<Gen> = Vec::new();
        let mut k = 0usize;
        while k < a.min(b) {
            // pivot search in g[k.., k..]
            let mut pivot = None;
            'search: for r in k..b {
                for c in k..a {
                    if g.get(r, c) != 0 {
                        pivot = Some((r, c));
                        break 'search;
                    }
                }
            }
            let Some((r, c)) = pivot else { break };
            if g.get(k, k) == 0 {
                if r != k && g.get(k, c) == 0 {
                    // add row r into row k: T = I + E_{k,r}; g ← T·g, left gets T^{-1}
                    let t = Gen::Transv { m: b, i: k, j: r, lam: 1 };
                    g = t.matrix(field).mul(&g);
                    left.push(Gen::Transv { m: b, i: k, j: r, lam: field.neg(1) });
                }
                if g.get(k, k) == 0 {
                    // add col c' into col k for some c' with g[k][c'] ≠ 0
                    let cc = (k..a).find(|&cc| g.get(k, cc) != 0).expect("pivot row nonzero");
                    let s = Gen::Transv { m: a, i: cc, j: k, lam: 1 };
                    g = g.mul(&s.matrix(field));
                    right.insert(0, Gen::Transv { m: a, i: cc, j: k, lam: field.neg(1) });
                }
            }
            let u = g.get(k, k);
            debug_assert!(u != 0);
            if u != 1 {
                let d = Gen::Dilat { m: b, pos: k, u: field.inv(u) };
                g = d.matrix(field).mul(&g);
                left.push(Gen::Dilat { m: b, pos: k, u });
            }
            // clear the rest of column k and row k
            for r2 in 0..b {
                if r2 != k {
                    let v = g.get(r2, k);
                    if v != 0 {
                        let t = Gen::Transv { m: b, i: r2, j: k, lam: field.neg(v) };
                        g = t.matrix(field).mul(&g);
                        left.push(Gen::Transv { m: b, i: r2, j: k, lam: v });
                    }
                }
            }
            for c2 in 0..a {
                if c2 != k {
                    let v = g.get(k, c2);
                    if v != 0 {
                        let s = Gen::Transv { m: a, i: k, j: c2, lam: field.neg(v) };
                        g = g.mul(&s.matrix(field));
                        right.insert(0, Gen::Transv { m: a, i: k, j: c2, lam: v });
                    }
                }
            }
            k += 1;
        }
        let rank = k;
        debug_assert!({
            let mut ok = true;
            for i in 0..b {
                for j in 0..a {
                    let want = u32::from(i == j && i < rank);
                    ok &= g.get(i, j) == want;
                }
            }
            ok
        });
        // f = left ∘ (incl chain rank→b) ∘ (proj chain a→rank) ∘ right
        let mut word = left;
        for m in (rank..b).rev() {
            word.push(Gen::Incl(m));
        }
        for m in rank..a {
            word.push(Gen::Proj(m));
        }
        word.extend(right);
        word
    }

    /// Multiply out a factorization word back into a matrix (for checks).
    pub fn word_matrix(&self, word: &[Gen], a: usize) -> Mat {
        let field = &self.field;
        let mut m = Mat::identity(field, a);
        for g in word.iter().rev() {
            m = g.matrix(field).mul(&m);
        }
        m
    }

    /// Exhaustive factorization check over all pairs with q^(ab) ≤ limit:
    /// every morphism factors as (iso)∘(inclusions)∘(projections)∘(iso).
    pub fn verify_factorization(&self, limit: u64) -> Result<usize, EngineError> {
        let mut checked = 0usize;
        for a in 0..=self.nmax {
            for b in 0..=self.nmax {
                let count = self.hom_count(a, b);
                if count > limit {
                    continue;
                }
                for code in 0..count {
                    let f = FqMor::decode(&self.field, a, b, code);
                    let word = self.factor_uncached(&f);
                    let back = self.word_matrix(&word, a);
                    if back != f.mat {
                        return Err(EngineError::ShapeMismatch {
                            detail: format!("factorization failed for {a}→{b} code {code}"),
                        });
                    }
                    checked += 1;
                }
            }
        }
        Ok(checked)
    }

    /// All morphisms a → b, in encoding order.
    pub fn all_morphisms(&self, a: usize, b: usize) -> impl Iterator<Item = FqMor> + '_ {
        let field = self.field.clone();
        (0..self.hom_count(a, b)).map(move |code| FqMor::decode(&field, a, b, code))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorization_roundtrip_small() {
        for (p, r, n) in [(2u64, 1u32, 3usize), (3, 1, 2), (2, 2, 2)] {
            let f = FqCtx::new(p, r).unwrap();
            let cat = TruncCat::new(&f, n).unwrap();
            let checked = cat.verify_factorization(1 << 12).unwrap();
            assert!(checked > 0);
        }
    }

    #[test]
    fn morphism_counts() {
        let f = FqCtx::new(2, 1).unwrap();
        let cat = TruncCat::new(&f, 4).unwrap();
        assert_eq!(cat.hom_count(2, 3), 64);
        assert_eq!(cat.hom_count(0, 3), 1);
    }

    #[test]
    fn encode_decode_roundtrip_m() {
        let f = FqCtx::new(3, 1).unwrap();
        let cat = TruncCat::new(&f, 3).unwrap();
        for code in 0..cat.hom_count(2, 2) {
            let m = FqMor::decode(&f, 2, 2, code);
            assert_eq!(m.encode(3), code);
        }
    }

    #[test]
    fn caps_rejected() {
        let f = FqCtx::new(5, 1).unwrap();
        assert!(TruncCat::new(&f, 2).is_err());
        let f2 = FqCtx::new(2, 1).unwrap();
        assert!(TruncCat::new(&f2, 5).is_err());
    }
}
