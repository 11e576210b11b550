//! Exact arithmetic over GF(p) and GF(p^r) for small p, r.
//!
//! Elements of GF(p^r) are stored as integers in `0..q` whose base-p digits
//! are the coefficients of a polynomial residue modulo a fixed irreducible
//! polynomial (the shipped Conway polynomial where available, otherwise the
//! deterministic minimal primitive polynomial for that (p, r)).
//! Multiplication goes through exp/log tables built from a generator, so a
//! context is cheap to use once constructed. Fields with q > 2^16 are
//! rejected.

mod conway;
mod mat;
mod poly;

pub use mat::{Echelon, Mat};
pub use poly::{FqRing, PolyMat, RingCtx, TPolyRing, TruncPoly};

use std::fmt;
use std::sync::Arc;

/// Largest supported field size.
pub const MAX_Q: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldError {
    NotPrime(u64),
    BadExtensionDegree(u32),
    TooLarge { p: u64, r: u32 },
    NoModulus { p: u64, r: u32 },
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::NotPrime(p) => write!(f, "{p} is not prime"),
            FieldError::BadExtensionDegree(r) => write!(f, "extension degree {r} must be >= 1"),
            FieldError::TooLarge { p, r } => {
                write!(f, "q = {p}^{r} exceeds the supported cap 2^16")
            }
            FieldError::NoModulus { p, r } => {
                write!(f, "no irreducible modulus available for GF({p}^{r})")
            }
        }
    }
}

impl std::error::Error for FieldError {}

/// Description of a finite field GF(p^r).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FieldSpec {
    pub p: u64,
    pub r: u32,
    pub q: u64,
    /// Coefficients of the irreducible modulus, ascending degree (length r+1).
    pub modulus: Vec<u64>,
    /// Where the modulus came from ("conway table" or "minimal primitive search").
    pub modulus_source: String,
}

/// A finite field element, an integer in `0..q` (base-p digits = poly coefficients).
pub type Fel = u32;

/// Field context: the spec plus multiplication tables.
pub struct FqCtx {
    pub spec: FieldSpec,
    q: u32,
    p: u32,
    /// exp[i] = g^i for 0 <= i < q-1, extended to 2(q-1) to skip a mod.
    exp: Vec<Fel>,
    /// log[x] for x in 1..q, log[0] unused.
    log: Vec<u32>,
}

impl fmt::Debug for FqCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FqCtx(GF({}^{}))", self.spec.p, self.spec.r)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FqCtx {
    pub fn new(p: u64, r: u32) -> Result<Arc<FqCtx>, FieldError> {
        if !is_prime(p) {
            return Err(FieldError::NotPrime(p));
        }
        if r == 0 {
            return Err(FieldError::BadExtensionDegree(r));
        }
        let q = p.checked_pow(r).filter(|&q| q <= MAX_Q).ok_or(FieldError::TooLarge { p, r })?;
        let (modulus, modulus_source) = conway::modulus_for(p, r)?;
        let spec = FieldSpec { p, r, q, modulus, modulus_source };
        let mut ctx = FqCtx {
            q: q as u32,
            p: p as u32,
            exp: Vec::new(),
            log: Vec::new(),
            spec,
        };
        ctx.build_tables();
        Ok(Arc::new(ctx))
    }

    /// Polynomial-representation multiply, used only to bootstrap the tables.
    fn slow_mul(&self, a: Fel, b: Fel) -> Fel {
        let p = self.p as u64;
        let r = self.spec.r as usize;
        let to_digits = |mut x: u64| -> Vec<u64> {
            let mut d = vec![0u64; 2 * r];
            for slot in d.iter_mut().take(r) {
                *slot = x % p;
                x /= p;
            }
            d
        };
        let da = to_digits(a as u64);
        let db = to_digits(b as u64);
        let mut prod = vec![0u64; 2 * r];
        for (i, &ca) in da.iter().enumerate().take(r) {
            if ca == 0 {
                continue;
            }
            for (j, &cb) in db.iter().enumerate().take(r) {
                prod[i + j] = (prod[i + j] + ca * cb) % p;
            }
        }
        // reduce modulo the monic modulus
        for deg in (r..2 * r).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for (k, &mk) in self.spec.modulus.iter().enumerate().take(r) {
                let idx = deg - r + k;
                prod[idx] = (prod[idx] + c * (p - mk % p) % p) % p;
            }
        }
        let mut out = 0u64;
        for i in (0..r).rev() {
            out = out * p + prod[i];
        }
        out as Fel
    }

    fn build_tables(&mut self) {
        let q = self.q as usize;
        // find a generator of the multiplicative group by brute force
        let order = (q - 1) as u64;
        let mut gen = 0;
        'outer: for cand in 2..q as Fel {
            let mut x = 1 as Fel;
            for k in 1..order {
                x = self.slow_mul(x, cand);
                if x == 1 && k < order {
                    continue 'outer;
                }
            }
            x = self.slow_mul(x, cand);
            if x == 1 {
                gen = cand;
                break;
            }
        }
        if q == 2 {
            gen = 1;
        }
        assert!(gen != 0, "no generator found for GF({})", q);
        let mut exp = vec![0 as Fel; 2 * (q - 1).max(1)];
        let mut log = vec![0u32; q];
        let mut x = 1 as Fel;
        for (i, slot) in exp.iter_mut().enumerate().take(q - 1) {
            *slot = x;
            log[x as usize] = i as u32;
            x = self.slow_mul(x, gen);
        }
        for i in q - 1..2 * (q - 1) {
            exp[i] = exp[i - (q - 1)];
        }
        self.exp = exp;
        self.log = log;
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn is_gf2(&self) -> bool {
        self.q == 2
    }

    #[inline]
    pub fn add(&self, a: Fel, b: Fel) -> Fel {
        if self.spec.r == 1 {
            let s = a + b;
            if s >= self.q { s - self.q } else { s }
        } else {
            // digitwise mod p
            let p = self.p;
            let mut out = 0;
            let mut mult = 1;
            let (mut a, mut b) = (a, b);
            while a != 0 || b != 0 {
                let s = (a % p + b % p) % p;
                out += s * mult;
                mult *= p;
                a /= p;
                b /= p;
            }
            out
        }
    }

    #[inline]
    pub fn neg(&self, a: Fel) -> Fel {
        if self.spec.r == 1 {
            if a == 0 { 0 } else { self.q - a }
        } else {
            let p = self.p;
            let mut out = 0;
            let mut mult = 1;
            let mut a = a;
            while a != 0 {
                let d = a % p;
                out += if d == 0 { 0 } else { p - d } * mult;
                mult *= p;
                a /= p;
            }
            out
        }
    }

    #[inline]
    pub fn sub(&self, a: Fel, b: Fel) -> Fel {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fel, b: Fel) -> Fel {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }

    #[inline]
    pub fn inv(&self, a: Fel) -> Fel {
        assert!(a != 0, "inverse of zero");
        let order = self.q - 1;
        self.exp[(order - self.log[a as usize]) as usize % order as usize]
    }

    pub fn pow(&self, a: Fel, e: u64) -> Fel {
        if a == 0 {
            return if e == 0 { 1 } else { 0 };
        }
        let order = (self.q - 1) as u64;
        self.exp[((self.log[a as usize] as u64 * (e % order)) % order) as usize]
    }

    /// x ↦ x^(p^steps); steps may be negative (inverse Frobenius, by perfectness).
    pub fn frobenius(&self, x: Fel, steps: i64) -> Fel {
        if x == 0 {
            return 0;
        }
        let order = (self.q - 1) as u64;
        // p^steps mod (q-1); for negative steps use p^(r - (steps mod r)) since p^r = 1 mod ... on exponents:
        // x^(p^r) = x for all x, so p-powers act on exponents modulo the order of p in (Z/(q-1))*,
        // which divides r. Reduce steps mod r first.
        let r = self.spec.r as i64;
        let s = steps.rem_euclid(r) as u32;
        let mut e = 1u64;
        for _ in 0..s {
            e = (e * self.spec.p) % order.max(1);
        }
        if order == 0 {
            return x;
        }
        self.pow(x, e)
    }

    /// All field elements, 0..q.
    pub fn elements(&self) -> impl Iterator<Item = Fel> {
        0..self.q
    }

    /// Multiplicative generator g (exp[1]).
    pub fn generator(&self) -> Fel {
        if self.q == 2 { 1 } else { self.exp[1] }
    }

    /// Binomial coefficient C(a, b) reduced into the field (via its prime subfield).
    pub fn binom(&self, a: u64, b: u64) -> Fel {
        binom_mod_p(a, b, self.spec.p) as Fel
    }

    /// Embed an integer (mod p) into the field.
    pub fn from_int(&self, v: u64) -> Fel {
        (v % self.spec.p) as Fel
    }

    /// A stable one-line key for cache naming.
    pub fn key(&self) -> String {
        format!("p{}r{}", self.spec.p, self.spec.r)
    }
}

/// C(a, b) mod p by the Lucas rule.
pub fn binom_mod_p(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let (mut a, mut b) = (a, b);
    let mut out = 1u64;
    while b > 0 || a > 0 {
        let (ad, bd) = (a % p, b % p);
        if bd > ad {
            return 0;
        }
        // C(ad, bd) exactly, both < p <= 2^16
        let mut c = 1u64;
        for i in 0..bd {
            c = c * (ad - i) / (i + 1);
        }
        out = out * (c % p) % p;
        a /= p;
        b /= p;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gf4_table() {
        let f = FqCtx::new(2, 2).unwrap();
        let g = f.generator();
        // x^2 + x + 1 = 0, so g^2 = g + 1
        assert_eq!(f.mul(g, g), f.add(g, 1));
        assert_eq!(f.frobenius(g, 1), f.mul(g, g));
    }

    #[test]
    fn frobenius_inverse_pair_gf9() {
        let f = FqCtx::new(3, 2).unwrap();
        for x in f.elements() {
            assert_eq!(f.frobenius(f.frobenius(x, 1), -1), x);
        }
    }

    #[test]
    fn frobenius_is_additive_hom() {
        for (p, r) in [(2, 4), (3, 2), (5, 1), (7, 2)] {
            let f = FqCtx::new(p, r).unwrap();
            for a in f.elements() {
                for b in f.elements() {
                    assert_eq!(f.frobenius(f.add(a, b), 1), f.add(f.frobenius(a, 1), f.frobenius(b, 1)));
                    assert_eq!(f.frobenius(f.mul(a, b), 1), f.mul(f.frobenius(a, 1), f.frobenius(b, 1)));
                }
            }
        }
    }

    #[test]
    fn frobenius_composes_additively_in_steps() {
        let f = FqCtx::new(2, 3).unwrap();
        for x in f.elements() {
            for a in -3i64..=3 {
                for b in -3i64..=3 {
                    assert_eq!(f.frobenius(f.frobenius(x, a), b), f.frobenius(x, a + b));
                }
            }
        }
    }

    #[test]
    fn frobenius_bijective_perfectness() {
        for (p, r) in [(2, 8), (3, 4), (251, 1)] {
            let f = FqCtx::new(p, r).unwrap();
            let mut seen = vec![false; f.q() as usize];
            for x in f.elements() {
                let y = f.frobenius(x, 1);
                assert!(!seen[y as usize]);
                seen[y as usize] = true;
            }
        }
    }

    #[test]
    fn rejects_oversize_and_nonprime() {
        assert!(matches!(FqCtx::new(4, 1), Err(FieldError::NotPrime(4))));
        assert!(matches!(FqCtx::new(2, 17), Err(FieldError::TooLarge { .. })));
    }

    #[test]
    fn field_axioms_small() {
        for (p, r) in [(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)] {
            let f = FqCtx::new(p, r).unwrap();
            for a in f.elements() {
                if a != 0 {
                    assert_eq!(f.mul(a, f.inv(a)), 1);
                }
                for b in f.elements() {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements() {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }
}
