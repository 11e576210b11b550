//! Irreducible moduli for the supported extension fields.
//!
//! The shipped entries are Conway polynomials for the (p, r) pairs the
//! engine actually exercises. Anything else below the q <= 2^16 cap gets the
//! lexicographically minimal primitive polynomial, found by a deterministic
//! search, so cache keys stay reproducible either way.

use super::{is_prime, FieldError, MAX_Q};

/// (p, r, coefficients ascending; monic of degree r). Conway polynomials.
const TABLE: &[(u64, u32, &[u64])] = &[
    (2, 1, &[1, 1]),
    (2, 2, &[1, 1, 1]),
    (2, 3, &[1, 1, 0, 1]),
    (2, 4, &[1, 1, 0, 0, 1]),
    (2, 5, &[1, 0, 1, 0, 0, 1]),
    (2, 6, &[1, 1, 0, 1, 1, 0, 1]),
    (2, 7, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, 8, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (3, 1, &[1, 1]),
    (3, 2, &[2, 2, 1]),
    (3, 3, &[1, 2, 0, 1]),
    (3, 4, &[2, 0, 0, 2, 1]),
    (5, 1, &[3, 1]),
    (5, 2, &[2, 4, 1]),
    (7, 1, &[4, 1]),
    (7, 2, &[3, 6, 1]),
];

pub fn modulus_for(p: u64, r: u32) -> Result<(Vec<u64>, String), FieldError> {
    debug_assert!(is_prime(p) && r >= 1);
    if p.checked_pow(r).map(|q| q > MAX_Q).unwrap_or(true) {
        return Err(FieldError::TooLarge { p, r });
    }
    if r == 1 {
        // GF(p) needs no modulus beyond x - g; record x - g with g the
        // smallest primitive root for spec completeness.
        let g = smallest_primitive_root(p);
        return Ok((vec![(p - g) % p, 1], "conway table".into()));
    }
    for &(tp, tr, coeffs) in TABLE {
        if tp == p && tr == r {
            return Ok((coeffs.to_vec(), "conway table".into()));
        }
    }
    search_minimal_primitive(p, r)
        .map(|m| (m, "minimal primitive search".into()))
        .ok_or(FieldError::NoModulus { p, r })
}

fn smallest_primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let mut factors = Vec::new();
    let mut n = order;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    let pow_mod = |mut b: u64, mut e: u64| -> u64 {
        let mut acc = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        acc
    };
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, order / f) != 1))
        .expect("primitive root exists")
}

/// Lexicographically smallest monic primitive polynomial of degree r over GF(p)
/// (coefficients compared low degree first).
fn search_minimal_primitive(p: u64, r: u32) -> Option<Vec<u64>> {
    let q = p.checked_pow(r)?;
    let rr = r as usize;
    let mut coeffs = vec![0u64; rr + 1];
    coeffs[rr] = 1;
    let total = p.checked_pow(r)?;
    for code in 0..total {
        let mut c = code;
        for slot in coeffs.iter_mut().take(rr) {
            *slot = c % p;
            c /= p;
        }
        if coeffs[0] == 0 {
            continue; // reducible: x divides
        }
        if is_primitive(&coeffs, p, q) {
            return Some(coeffs);
        }
    }
    None
}

/// Checks that x generates the multiplicative group of GF(p)[x]/(m).
fn is_primitive(modulus: &[u64], p: u64, q: u64) -> bool {
    let r = modulus.len() - 1;
    let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut prod = vec![0u64; 2 * r];
        for (i, &ca) in a.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (j, &cb) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ca * cb) % p;
            }
        }
        for deg in (r..2 * r).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            prod[deg] = 0;
            for k in 0..r {
                prod[deg - r + k] = (prod[deg - r + k] + c * (p - modulus[k] % p)) % p;
            }
        }
        prod.truncate(r);
        prod
    };
    let one = {
        let mut v = vec![0u64; r];
        v[0] = 1;
        v
    };
    let x = {
        let mut v = vec![0u64; r];
        if r > 1 {
            v[1] = 1;
        } else {
            v[0] = (p - modulus[0] % p) % p;
        }
        v
    };
    let pow = |e: u64| -> Vec<u64> {
        let mut acc = one.clone();
        let mut base = x.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(&acc, &base);
            }
            base = mul(&base, &base);
            e >>= 1;
        }
        acc
    };
    let order = q - 1;
    if pow(order) != one {
        return false; // not even irreducible/invertible
    }
    let mut factors = Vec::new();
    let mut n = order;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            factors.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors.iter().all(|&f| pow(order / f) != one)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_moduli_are_primitive() {
        for &(p, r, coeffs) in TABLE {
            if r > 1 {
                assert!(is_primitive(coeffs, p, p.pow(r)), "GF({p}^{r}) table entry not primitive");
            }
        }
    }

    #[test]
    fn fallback_search_small() {
        let m = search_minimal_primitive(11, 2).unwrap();
        assert!(is_primitive(&m, 11, 121));
    }
}
