//! Truncated polynomial scalars and generic dense matrices over them.
//!
//! `apply` needs to evaluate a functor on matrices whose entries live in
//! GF(q)[t]/(t^(cap+1)): the divided-power operators of a composite functor
//! are the t-coefficients of the inner functor applied to a transvection
//! I + t·E. This module provides just enough ring-generic machinery for that.

use super::{Fel, FqCtx, Mat};
use std::sync::Arc;

/// The scalar operations `apply` is generic over.
pub trait RingCtx: Clone {
    type El: Clone + PartialEq + std::fmt::Debug;
    fn zero(&self) -> Self::El;
    fn one(&self) -> Self::El;
    fn from_fel(&self, v: Fel) -> Self::El;
    fn add(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn mul(&self, a: &Self::El, b: &Self::El) -> Self::El;
    fn neg(&self, a: &Self::El) -> Self::El;
    fn is_zero(&self, a: &Self::El) -> bool;
    /// x ↦ x^(p^steps) for steps >= 0; a ring endomorphism in characteristic p.
    fn frob(&self, a: &Self::El, steps: u32) -> Self::El;
}

#[derive(Clone)]
pub struct FqRing(pub Arc<FqCtx>);

impl RingCtx for FqRing {
    type El = Fel;
    fn zero(&self) -> Fel {
        0
    }
    fn one(&self) -> Fel {
        1
    }
    fn from_fel(&self, v: Fel) -> Fel {
        v
    }
    fn add(&self, a: &Fel, b: &Fel) -> Fel {
        self.0.add(*a, *b)
    }
    fn mul(&self, a: &Fel, b: &Fel) -> Fel {
        self.0.mul(*a, *b)
    }
    fn neg(&self, a: &Fel) -> Fel {
        self.0.neg(*a)
    }
    fn is_zero(&self, a: &Fel) -> bool {
        *a == 0
    }
    fn frob(&self, a: &Fel, steps: u32) -> Fel {
        self.0.frobenius(*a, steps as i64)
    }
}

/// Coefficients ascending in t, truncated past `cap`.
#[derive(Clone, PartialEq, Debug)]
pub struct TruncPoly(pub Vec<Fel>);

#[derive(Clone)]
pub struct TPolyRing {
    pub base: Arc<FqCtx>,
    pub cap: usize,
}

impl RingCtx for TPolyRing {
    type El = TruncPoly;
    fn zero(&self) -> TruncPoly {
        TruncPoly(Vec::new())
    }
    fn one(&self) -> TruncPoly {
        TruncPoly(vec![1])
    }
    fn from_fel(&self, v: Fel) -> TruncPoly {
        if v == 0 { TruncPoly(Vec::new()) } else { TruncPoly(vec![v]) }
    }
    fn add(&self, a: &TruncPoly, b: &TruncPoly) -> TruncPoly {
        let n = a.0.len().max(b.0.len());
        let mut out = vec![0; n];
        for (i, slot) in out.iter_mut().enumerate() {
            let x = a.0.get(i).copied().unwrap_or(0);
            let y = b.0.get(i).copied().unwrap_or(0);
            *slot = self.base.add(x, y);
        }
        TruncPoly(out)
    }
    fn mul(&self, a: &TruncPoly, b: &TruncPoly) -> TruncPoly {
        if a.0.is_empty() || b.0.is_empty() {
            return TruncPoly(Vec::new());
        }
        let n = (a.0.len() + b.0.len() - 1).min(self.cap + 1);
        let mut out = vec![0; n];
        for (i, &x) in a.0.iter().enumerate() {
            if x == 0 || i > self.cap {
                continue;
            }
            for (j, &y) in b.0.iter().enumerate() {
                if y == 0 || i + j > self.cap {
                    continue;
                }
                out[i + j] = self.base.add(out[i + j], self.base.mul(x, y));
            }
        }
        TruncPoly(out)
    }
    fn neg(&self, a: &TruncPoly) -> TruncPoly {
        TruncPoly(a.0.iter().map(|&x| self.base.neg(x)).collect())
    }
    fn is_zero(&self, a: &TruncPoly) -> bool {
        a.0.iter().all(|&x| x == 0)
    }
    fn frob(&self, a: &TruncPoly, steps: u32) -> TruncPoly {
        // (Σ c_i t^i)^(p^s) = Σ c_i^(p^s) t^(i p^s) in characteristic p
        let mut stride = 1usize;
        for _ in 0..steps {
            stride = stride.saturating_mul(self.base.p() as usize);
        }
        let mut out = vec![0; (a.0.len().saturating_sub(1) * stride + 1).min(self.cap + 1)];
        for (i, &c) in a.0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let d = i * stride;
            if d <= self.cap && d < out.len() {
                out[d] = self.base.frobenius(c, steps as i64);
            }
        }
        TruncPoly(out)
    }
}

/// Dense matrix over a generic scalar ring; only used transiently by `apply`.
#[derive(Clone)]
pub struct PolyMat<C: RingCtx> {
    pub rows: usize,
    pub cols: usize,
    pub ring: C,
    pub data: Vec<C::El>,
}

impl<C: RingCtx> PolyMat<C> {
    pub fn zero(ring: &C, rows: usize, cols: usize) -> Self {
        PolyMat { rows, cols, ring: ring.clone(), data: vec![ring.zero(); rows * cols] }
    }

    pub fn identity(ring: &C, n: usize) -> Self {
        let mut m = Self::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, ring.one());
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &C::El {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: C::El) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let r = &self.ring;
        let mut out = Self::zero(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if r.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !r.is_zero(b) {
                        let v = r.add(out.get(i, j), &r.mul(a, b));
                        out.set(i, j, v);
                    }
                }
            }
        }
        out
    }

    pub fn block_diag(ring: &C, parts: &[&Self]) -> Self {
        let rows = parts.iter().map(|m| m.rows).sum();
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Self::zero(ring, rows, cols);
        let (mut ro, mut co) = (0, 0);
        for m in parts {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    out.set(ro + i, co + j, m.get(i, j).clone());
                }
            }
            ro += m.rows;
            co += m.cols;
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn frobenius(&self, steps: u32) -> Self {
        let mut out = Self::zero(&self.ring, self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.ring.frob(self.get(i, j), steps));
            }
        }
        out
    }
}

impl PolyMat<FqRing> {
    pub fn from_mat(m: &Mat) -> Self {
        let ring = FqRing(m.field().clone());
        let mut out = Self::zero(&ring, m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                out.set(i, j, m.get(i, j));
            }
        }
        out
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_fn(&self.ring.0, self.rows, self.cols, |i, j| *self.get(i, j))
    }
}

impl PolyMat<TPolyRing> {
    /// Lift a field matrix to polynomials (degree-0 coefficients).
    pub fn constant(ring: &TPolyRing, m: &Mat) -> Self {
        let mut out = Self::zero(ring, m.rows, m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                out.set(i, j, ring.from_fel(m.get(i, j)));
            }
        }
        out
    }

    /// Extract the coefficient of t^d as a field matrix.
    pub fn coeff(&self, d: usize) -> Mat {
        Mat::from_fn(&self.ring.base, self.rows, self.cols, |i, j| {
            self.get(i, j).0.get(d).copied().unwrap_or(0)
        })
    }

    /// Largest degree with a nonzero coefficient anywhere.
    pub fn max_degree(&self) -> usize {
        self.data
            .iter()
            .filter_map(|p| p.0.iter().rposition(|&c| c != 0))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FqCtx;

    #[test]
    fn truncation_and_frobenius() {
        let f = FqCtx::new(2, 1).unwrap();
        let r = TPolyRing { base: f, cap: 4 };
        let t = TruncPoly(vec![0, 1]);
        let t2 = r.mul(&t, &t);
        assert_eq!(t2.0, vec![0, 0, 1]);
        let t4 = r.frob(&t2, 1);
        assert_eq!(t4.0, vec![0, 0, 0, 0, 1]);
        let t8 = r.mul(&t4, &t4);
        assert!(r.is_zero(&t8));
    }
}
