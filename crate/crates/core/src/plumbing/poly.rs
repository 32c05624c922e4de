//! Sparse Laurent polynomials over the rationals in smoothing variables and
//! named symbols.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::symbol::Symbol;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    /// Smoothing parameter of the edge with this label.
    S(String),
    Sym(Symbol),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::S(e) => write!(f, "s[{e}]"),
            Var::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Sorted `(variable, nonzero exponent)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(Vec<(Var, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: Var, exp: i32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(v, exp)])
        }
    }

    pub fn factors(&self) -> &[(Var, i32)] {
        &self.0
    }

    pub fn exponent(&self, v: &Var) -> i32 {
        self.0.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }

    /// Exponent of `s[edge]`.
    pub fn s_exponent(&self, edge: &str) -> i32 {
        self.0
            .iter()
            .find(|(w, _)| matches!(w, Var::S(e) if e == edge))
            .map_or(0, |(_, e)| *e)
    }

    /// Sum of smoothing-variable exponents.
    pub fn s_degree(&self) -> i32 {
        self.0.iter().filter(|(v, _)| matches!(v, Var::S(_))).map(|(_, e)| e).sum()
    }

    pub fn max_s_exponent(&self) -> i32 {
        self.0.iter().filter(|(v, _)| matches!(v, Var::S(_))).map(|(_, e)| *e).max().unwrap_or(0)
    }

    /// The monomial with smoothing variables removed.
    pub fn symbol_part(&self) -> Monomial {
        Monomial(self.0.iter().filter(|(v, _)| matches!(v, Var::Sym(_))).cloned().collect())
    }

    pub fn s_part(&self) -> Monomial {
        Monomial(self.0.iter().filter(|(v, _)| matches!(v, Var::S(_))).cloned().collect())
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut map: BTreeMap<Var, i32> = self.0.iter().cloned().collect();
        for (v, e) in &other.0 {
            *map.entry(v.clone()).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|(_, e)| *e != 0).collect())
    }

    /// True when `other` divides `self` with nonnegative quotient exponents.
    pub fn divisible_by(&self, other: &Monomial) -> bool {
        other.0.iter().all(|(v, e)| self.exponent(v) >= *e)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::term(c, Monomial::one())
    }

    pub fn integer(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn symbol(s: Symbol) -> Self {
        Poly::term(BigRational::one(), Monomial::var(Var::Sym(s), 1))
    }

    pub fn s(edge: &str, exp: i32) -> Self {
        Poly::term(BigRational::one(), Monomial::var(Var::S(edge.to_string()), exp))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, x)| (m.clone(), x * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly { terms: self.terms.iter().map(|(n, c)| (n.mul(m), c.clone())).collect() }
    }

    /// Drops every monomial with some smoothing exponent above `t`.
    pub fn truncate_s(&self, t: Option<u32>) -> Poly {
        match t {
            None => self.clone(),
            Some(t) => Poly {
                terms: self
                    .terms
                    .iter()
                    .filter(|(m, _)| m.max_s_exponent() <= t as i32)
                    .map(|(m, c)| (m.clone(), c.clone()))
                    .collect(),
            },
        }
    }

    /// Terms whose total smoothing degree equals `d`.
    pub fn s_homogeneous_part(&self, d: i32) -> Poly {
        self.filter(|m| m.s_degree() == d)
    }

    pub fn filter(&self, keep: impl Fn(&Monomial) -> bool) -> Poly {
        Poly {
            terms: self.terms.iter().filter(|(m, _)| keep(m)).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    pub fn min_s_degree(&self) -> Option<i32> {
        self.terms.keys().map(Monomial::s_degree).min()
    }

    /// Replaces each symbol by a polynomial; smoothing variables are kept.
    pub fn substitute(&self, f: &impl Fn(&Symbol) -> Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut acc = Poly::term(c.clone(), Monomial::one());
            for (v, e) in m.factors() {
                match v {
                    Var::S(_) => acc = acc.mul_monomial(&Monomial::var(v.clone(), *e)),
                    Var::Sym(s) => {
                        assert!(*e > 0, "symbol substitution needs nonnegative exponents");
                        let image = f(s);
                        for _ in 0..*e {
                            acc = &acc * &image;
                        }
                    }
                }
            }
            out.add_assign(&acc);
        }
        out
    }

    /// Canonical ordering: by smoothing degree, then by monomial.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &BigRational)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| (a.0.s_degree(), a.0).cmp(&(b.0.s_degree(), b.0)));
        v
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign(&-rhs);
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

pub(crate) fn format_rational(c: &BigRational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            let sign = if c.is_negative() { "-" } else { "+" };
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let a = c.abs();
            let unit = m.factors().is_empty();
            match (a.is_one(), unit) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{m}")?,
                (false, true) => write!(f, "{}", format_rational(&a))?,
                (false, false) => write!(f, "{}*{m}", format_rational(&a))?,
            }
        }
        Ok(())
    }
}
