//! The functor-expression language.
//!
//! Grammar (whitespace insignificant, `*` = tensor, `+` = direct sum,
//! `@` = composition, binding `@` > `*` > `+`, all left-associative):
//!
//! ```text
//! id | sym(d) | ext(d) | div(d) | ten(d) | twist(E,r) | mtwist(E,a,s)
//!    | param(E,[d0,d1,...]) | kuhn(E) | cdual(E) | E*E | E+E | E@E | (E)
//! ```
//!
//! The grammar is versioned; the version participates in cache keys.

use std::fmt;

pub const GRAMMAR_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Id,
    Sym(u32),
    Ext(u32),
    Div(u32),
    Ten(u32),
    Twist(Box<Expr>, u32),
    /// `MultiTwist(E, a, s)` = E ∘ (I^(0) ⊕ I^(a) ⊕ … ⊕ I^((s−1)a)).
    MultiTwist(Box<Expr>, u32, u32),
    /// Parameter space given by graded dimensions `[d0, d1, ...]`.
    Param(Box<Expr>, Vec<u32>),
    Tensor(Box<Expr>, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Compose(Box<Expr>, Box<Expr>),
    Kuhn(Box<Expr>),
    CDual(Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    Covariant,
    Contravariant,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub at: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.at, self.message)
    }
}

impl std::error::Error for ParseError {}

impl Expr {
    /// Homogeneity degree at characteristic p (twists scale by p^r);
    /// None when inhomogeneous.
    pub fn degree_at(&self, p: u64) -> Option<u64> {
        match self {
            Expr::Id => Some(1),
            Expr::Sym(d) | Expr::Ext(d) | Expr::Div(d) | Expr::Ten(d) => Some(*d as u64),
            Expr::Twist(e, r) => Some(e.degree_at(p)? * p.pow(*r)),
            Expr::MultiTwist(e, a, s) => {
                // s = 1 is E itself; a = 0 is E(v^{⊕s}), still homogeneous
                if *s == 1 || *a == 0 { e.degree_at(p) } else { None }
            }
            Expr::Param(e, _) => e.degree_at(p),
            Expr::Tensor(a, b) => Some(a.degree_at(p)? + b.degree_at(p)?),
            Expr::Sum(a, b) => {
                let (da, db) = (a.degree_at(p)?, b.degree_at(p)?);
                if da == db { Some(da) } else { None }
            }
            Expr::Compose(a, b) => Some(a.degree_at(p)? * b.degree_at(p)?),
            Expr::Kuhn(e) | Expr::CDual(e) => e.degree_at(p),
        }
    }

    /// Largest homogeneous degree that can occur in the evaluation.
    pub fn max_degree_at(&self, p: u64) -> u64 {
        match self {
            Expr::Id => 1,
            Expr::Sym(d) | Expr::Ext(d) | Expr::Div(d) | Expr::Ten(d) => *d as u64,
            Expr::Twist(e, r) => e.max_degree_at(p) * p.pow(*r),
            Expr::MultiTwist(e, a, s) => e.max_degree_at(p) * p.pow(a * (s.saturating_sub(1))),
            Expr::Param(e, _) => e.max_degree_at(p),
            Expr::Tensor(a, b) => a.max_degree_at(p) + b.max_degree_at(p),
            Expr::Sum(a, b) => a.max_degree_at(p).max(b.max_degree_at(p)),
            Expr::Compose(a, b) => a.max_degree_at(p) * b.max_degree_at(p),
            Expr::Kuhn(e) | Expr::CDual(e) => e.max_degree_at(p),
        }
    }

    pub fn variance(&self) -> Variance {
        let flips = self.count_cduals();
        if flips % 2 == 0 { Variance::Covariant } else { Variance::Contravariant }
    }

    fn count_cduals(&self) -> u32 {
        match self {
            Expr::Id | Expr::Sym(_) | Expr::Ext(_) | Expr::Div(_) | Expr::Ten(_) => 0,
            Expr::Twist(e, _) | Expr::MultiTwist(e, _, _) | Expr::Param(e, _) | Expr::Kuhn(e) => {
                e.count_cduals()
            }
            Expr::CDual(e) => 1 + e.count_cduals(),
            Expr::Tensor(a, b) | Expr::Sum(a, b) | Expr::Compose(a, b) => {
                a.count_cduals() + b.count_cduals()
            }
        }
    }

    /// For the Tor path: strips a single outer `cdual`, leaving the covariant core.
    pub fn peel_cdual(&self) -> Option<&Expr> {
        match self {
            Expr::CDual(e) if e.variance() == Variance::Covariant => Some(e),
            _ => None,
        }
    }

    pub fn tensor(a: Expr, b: Expr) -> Expr {
        Expr::Tensor(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Expr, b: Expr) -> Expr {
        Expr::Sum(Box::new(a), Box::new(b))
    }

    pub fn compose(a: Expr, b: Expr) -> Expr {
        Expr::Compose(Box::new(a), Box::new(b))
    }

    pub fn twist(e: Expr, r: u32) -> Expr {
        if r == 0 { e } else { Expr::Twist(Box::new(e), r) }
    }

    /// Γ^λ = Div(λ1) ⊗ … ⊗ Div(λn), zero parts contributing the unit Div(0).
    pub fn gamma_lambda(lambda: &[u16]) -> Expr {
        let mut it = lambda.iter().map(|&a| Expr::Div(a as u32));
        let first = it.next().unwrap_or(Expr::Div(0));
        it.fold(first, Expr::tensor)
    }

    /// Stable 64-bit structural hash (FNV-1a over the canonical text + grammar version).
    pub fn hash64(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        eat(format!("v{GRAMMAR_VERSION};{self}").as_bytes());
        h
    }

    pub fn parse(s: &str) -> Result<Expr, ParseError> {
        let mut p = Parser { src: s.as_bytes(), pos: 0 };
        let e = p.parse_sum()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // parenthesize children whenever the child binds looser than the parent
        fn prec(e: &Expr) -> u8 {
            match e {
                Expr::Sum(..) => 1,
                Expr::Tensor(..) => 2,
                Expr::Compose(..) => 3,
                _ => 4,
            }
        }
        fn go(e: &Expr, parent: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let me = prec(e);
            let need = me < parent || (me == parent && me < 4);
            if need {
                write!(f, "(")?;
            }
            match e {
                Expr::Id => write!(f, "id")?,
                Expr::Sym(d) => write!(f, "sym({d})")?,
                Expr::Ext(d) => write!(f, "ext({d})")?,
                Expr::Div(d) => write!(f, "div({d})")?,
                Expr::Ten(d) => write!(f, "ten({d})")?,
                Expr::Twist(e, r) => write!(f, "twist({e},{r})")?,
                Expr::MultiTwist(e, a, s) => write!(f, "mtwist({e},{a},{s})")?,
                Expr::Param(e, dims) => {
                    let list: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
                    write!(f, "param({e},[{}])", list.join(","))?;
                }
                Expr::Kuhn(e) => write!(f, "kuhn({e})")?,
                Expr::CDual(e) => write!(f, "cdual({e})")?,
                Expr::Sum(a, b) => {
                    go(a, 1, f)?;
                    write!(f, "+")?;
                    go(b, 2, f)?;
                }
                Expr::Tensor(a, b) => {
                    go(a, 2, f)?;
                    write!(f, "*")?;
                    go(b, 3, f)?;
                }
                Expr::Compose(a, b) => {
                    go(a, 3, f)?;
                    write!(f, "@")?;
                    go(b, 4, f)?;
                }
            }
            if need {
                write!(f, ")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, m: &str) -> ParseError {
        ParseError { at: self.pos, message: m.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn parse_sum(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_tensor()?;
        while self.peek() == Some(b'+') {
            self.pos += 1;
            let rhs = self.parse_tensor()?;
            e = Expr::sum(e, rhs);
        }
        Ok(e)
    }

    fn parse_tensor(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_compose()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let rhs = self.parse_compose()?;
            e = Expr::tensor(e, rhs);
        }
        Ok(e)
    }

    fn parse_compose(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.parse_atom()?;
        while self.peek() == Some(b'@') {
            self.pos += 1;
            let rhs = self.parse_atom()?;
            e = Expr::compose(e, rhs);
        }
        Ok(e)
    }

    fn parse_uint(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn parse_atom(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let e = self.parse_sum()?;
            self.eat(b')')?;
            return Ok(e);
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
        match word.as_str() {
            "id" => Ok(Expr::Id),
            "sym" | "ext" | "div" | "ten" => {
                self.eat(b'(')?;
                let d = self.parse_uint()?;
                self.eat(b')')?;
                Ok(match word.as_str() {
                    "sym" => Expr::Sym(d),
                    "ext" => Expr::Ext(d),
                    "div" => Expr::Div(d),
                    _ => Expr::Ten(d),
                })
            }
            "twist" => {
                self.eat(b'(')?;
                let e = self.parse_sum()?;
                self.eat(b',')?;
                let r = self.parse_uint()?;
                self.eat(b')')?;
                Ok(Expr::twist(e, r))
            }
            "mtwist" => {
                self.eat(b'(')?;
                let e = self.parse_sum()?;
                self.eat(b',')?;
                let a = self.parse_uint()?;
                self.eat(b',')?;
                let s = self.parse_uint()?;
                self.eat(b')')?;
                if s == 0 {
                    return Err(self.err("mtwist needs s >= 1"));
                }
                Ok(Expr::MultiTwist(Box::new(e), a, s))
            }
            "param" => {
                self.eat(b'(')?;
                let e = self.parse_sum()?;
                self.eat(b',')?;
                self.eat(b'[')?;
                let mut dims = Vec::new();
                if self.peek() != Some(b']') {
                    loop {
                        dims.push(self.parse_uint()?);
                        if self.peek() == Some(b',') {
                            self.pos += 1;
                        } else {
                            break;
                        }
                    }
                }
                self.eat(b']')?;
                self.eat(b')')?;
                Ok(Expr::Param(Box::new(e), dims))
            }
            "kuhn" => {
                self.eat(b'(')?;
                let e = self.parse_sum()?;
                self.eat(b')')?;
                Ok(Expr::Kuhn(Box::new(e)))
            }
            "cdual" => {
                self.eat(b'(')?;
                let e = self.parse_sum()?;
                self.eat(b')')?;
                Ok(Expr::CDual(Box::new(e)))
            }
            _ => Err(ParseError { at: start, message: format!("unknown functor '{word}'") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        for s in [
            "id",
            "sym(2)",
            "twist(id,1)",
            "mtwist(id,1,4)",
            "div(2)*ten(3)+ext(1)",
            "sym(2)@twist(id,2)",
            "param(sym(2),[1,0,1])",
            "kuhn(sym(3))",
            "cdual(div(2))",
            "(sym(1)+sym(2))*div(2)",
        ] {
            let e = Expr::parse(s).unwrap();
            let printed = e.to_string();
            assert_eq!(Expr::parse(&printed).unwrap(), e, "roundtrip failed for {s}");
        }
    }

    #[test]
    fn whitespace_insignificant() {
        assert_eq!(
            Expr::parse("  div( 2 ) * ten(1)  ").unwrap(),
            Expr::parse("div(2)*ten(1)").unwrap()
        );
    }

    #[test]
    fn precedence() {
        // @ binds tighter than *, which binds tighter than +
        let e = Expr::parse("sym(1)+div(2)*sym(2)@id").unwrap();
        assert_eq!(
            e,
            Expr::sum(
                Expr::Sym(1),
                Expr::tensor(Expr::Div(2), Expr::compose(Expr::Sym(2), Expr::Id))
            )
        );
    }

    #[test]
    fn degrees() {
        let p = 2;
        assert_eq!(Expr::parse("twist(id,2)").unwrap().degree_at(p), Some(4));
        assert_eq!(Expr::parse("sym(2)@twist(id,1)").unwrap().degree_at(p), Some(4));
        assert_eq!(Expr::parse("sym(1)+sym(2)").unwrap().degree_at(p), None);
        assert_eq!(Expr::parse("mtwist(sym(2),1,4)").unwrap().max_degree_at(p), 16);
    }

    #[test]
    fn variance_and_peel() {
        let e = Expr::parse("cdual(div(2))").unwrap();
        assert_eq!(e.variance(), Variance::Contravariant);
        assert_eq!(e.peel_cdual(), Some(&Expr::Div(2)));
        assert_eq!(Expr::parse("kuhn(sym(2))").unwrap().variance(), Variance::Covariant);
    }

    #[test]
    fn hash_stability() {
        let a = Expr::parse("div(2)*div(1)").unwrap();
        let b = Expr::parse("div(2) * div(1)").unwrap();
        assert_eq!(a.hash64(), b.hash64());
        assert_ne!(a.hash64(), Expr::parse("div(1)*div(2)").unwrap().hash64());
    }
}
