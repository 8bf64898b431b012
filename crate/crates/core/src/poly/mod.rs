//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Every polynomial carries a shared [`VarSet`]; arithmetic between
//! polynomials over different variable sets is a programming error and
//! panics, the same way mismatched shapes do in array libraries. Use
//! [`Polynomial::embed`] to move a polynomial into a larger set first.

mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use parse::parse_poly;

/// Exact rational number used for every coefficient and point coordinate.
pub type Rational = num_rational::BigRational;

/// Shorthand for an integer-valued [`Rational`].
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Shorthand for `num / den`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error at column {column}: {message}")]
    Syntax { column: usize, message: String },
    #[error("unknown variable `{name}` at column {column}")]
    UnknownVariable { name: String, column: usize },
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("invalid variable name `{0}`")]
    InvalidVariable(String),
    #[error("variable `{0}` is not present in the target variable set")]
    MissingVariable(String),
}

/// Ordered list of distinct variable names shared by all polynomials of one
/// computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

fn valid_ident(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Arc<VarSet>, PolyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = VarSet {
            names: Vec::new(),
            index: HashMap::new(),
        };
        for name in names {
            out.push(name.into())?;
        }
        Ok(Arc::new(out))
    }

    fn push(&mut self, name: String) -> Result<(), PolyError> {
        if !valid_ident(&name) {
            return Err(PolyError::InvalidVariable(name));
        }
        if self.index.contains_key(&name) {
            return Err(PolyError::DuplicateVariable(name));
        }
        self.index.insert(name.clone(), self.names.len());
        self.names.push(name);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// A new set with `extra` appended after the existing names.
    pub fn extended<I, S>(&self, extra: I) -> Result<Arc<VarSet>, PolyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out = self.clone();
        for name in extra {
            out.push(name.into())?;
        }
        Ok(Arc::new(out))
    }

    /// A name based on `base` that does not clash with any existing name.
    pub fn fresh_name(&self, base: &str) -> String {
        let mut name = base.to_string();
        while self.index.contains_key(&name) {
            name.push('_');
        }
        name
    }

    /// Keeps only the variables at `keep` (in the given order).
    pub fn subset(&self, keep: &[usize]) -> Arc<VarSet> {
        let names: Vec<String> = keep.iter().map(|&i| self.names[i].clone()).collect();
        VarSet::new(names).expect("subset of a valid set is valid")
    }
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.names.join(" "))
    }
}

pub(crate) fn same_vars(a: &Arc<VarSet>, b: &Arc<VarSet>) -> bool {
    Arc::ptr_eq(a, b) || a.names == b.names
}

/// Dense exponent vector. Its `Ord` is graded reverse lexicographic, which is
/// the canonical printing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn from_exponents(exps: Vec<u32>) -> Self {
        Monomial(exps)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| *a.max(b))
                .collect(),
        )
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Indices of the variables with a positive exponent.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(i, _)| i)
    }
}

pub(crate) fn grevlex_cmp(a: &[u32], b: &[u32]) -> Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    match da.cmp(&db) {
        Ordering::Equal => {}
        o => return o,
    }
    for (x, y) in a.iter().zip(b).rev() {
        if x != y {
            // smaller exponent in the last differing variable wins
            return y.cmp(x);
        }
    }
    Ordering::Equal
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        grevlex_cmp(&self.0, &other.0)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial over the rationals in canonical form: no zero coefficients,
/// terms keyed by monomial.
#[derive(Debug, Clone)]
pub struct Polynomial {
    vars: Arc<VarSet>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        same_vars(&self.vars, &other.vars) && self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl Polynomial {
    pub fn zero(vars: &Arc<VarSet>) -> Self {
        Polynomial {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Arc<VarSet>, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(vars.len()), c);
        }
        p
    }

    pub fn one(vars: &Arc<VarSet>) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn var(vars: &Arc<VarSet>, i: usize) -> Self {
        assert!(i < vars.len(), "variable index out of range");
        let mut p = Self::zero(vars);
        p.terms
            .insert(Monomial::var(vars.len(), i), Rational::one());
        p
    }

    /// The variable called `name`, if present.
    pub fn var_named(vars: &Arc<VarSet>, name: &str) -> Option<Self> {
        vars.index_of(name).map(|i| Self::var(vars, i))
    }

    pub fn from_terms<I>(vars: &Arc<VarSet>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), vars.len(), "monomial arity mismatch");
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded reverse lexicographic order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.vars.len()))
    }

    /// `Some(c)` if the polynomial is the constant `c` (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exponent(var))
            .max()
            .unwrap_or(0)
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exponent(var) > 0)
    }

    /// Indices of variables that occur with a positive exponent.
    pub fn variables_used(&self) -> Vec<usize> {
        (0..self.vars.len()).filter(|&i| self.involves(i)).collect()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.vars);
        }
        Polynomial {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.vars);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Splits `self = c * x_var + rest` when `var` occurs only linearly with a
    /// constant coefficient `c`. Returns `(c, rest)`.
    pub fn linear_part(&self, var: usize) -> Option<(Rational, Polynomial)> {
        let unit = Monomial::var(self.vars.len(), var);
        let mut coeff = None;
        let mut rest = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.exponent(var) == 0 {
                rest.terms.insert(m.clone(), c.clone());
            } else if *m == unit {
                coeff = Some(c.clone());
            } else {
                return None;
            }
        }
        coeff.map(|c| (c, rest))
    }

    /// Ring homomorphism sending variable `i` to `images[i]`; all images must
    /// share one variable set, which becomes the result's.
    pub fn map_vars(&self, target: &Arc<VarSet>, images: &[Polynomial]) -> Polynomial {
        assert_eq!(
            images.len(),
            self.vars.len(),
            "one image per variable required"
        );
        for im in images {
            assert!(
                same_vars(&im.vars, target),
                "image over a foreign variable set"
            );
        }
        let mut powers: HashMap<(usize, u32), Polynomial> = HashMap::new();
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut term = Polynomial::constant(target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = powers.entry((i, e)).or_insert_with(|| images[i].pow(e));
                term = &term * pw;
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        out
    }

    /// Simultaneous substitution of the bound variables; unbound variables
    /// are left alone.
    pub fn substitute(&self, bindings: &[(usize, Polynomial)]) -> Polynomial {
        let mut images: Vec<Polynomial> = (0..self.vars.len())
            .map(|i| Polynomial::var(&self.vars, i))
            .collect();
        for (v, p) in bindings {
            assert!(
                same_vars(&p.vars, &self.vars),
                "binding over a foreign variable set"
            );
            images[*v] = p.clone();
        }
        self.map_vars(&self.vars, &images)
    }

    pub fn partial_derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.exponent(var);
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[var] -= 1;
            out.add_term(Monomial(exps), c * Rational::from_integer(BigInt::from(e)));
        }
        out
    }

    pub fn evaluate(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.vars.len(), "point arity mismatch");
        let mut total = Rational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    v *= num_traits::pow(x.clone(), e as usize);
                }
            }
            total += v;
        }
        total
    }

    /// Re-expresses the polynomial over `target`, matching variables by name.
    pub fn embed(&self, target: &Arc<VarSet>) -> Result<Polynomial, PolyError> {
        if same_vars(&self.vars, target) {
            return Ok(self.clone());
        }
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, name) in self.vars.names().iter().enumerate() {
            match target.index_of(name) {
                Some(j) => map.push(Some(j)),
                None if self.involves(i) => return Err(PolyError::MissingVariable(name.clone())),
                None => map.push(None),
            }
        }
        let mut out = Polynomial::zero(target);
        for (m, c) in &self.terms {
            let mut exps = vec![0; target.len()];
            for (i, &e) in m.0.iter().enumerate() {
                if let Some(j) = map[i] {
                    exps[j] += e;
                }
            }
            out.add_term(Monomial(exps), c.clone());
        }
        Ok(out)
    }

    /// Leading coefficient in the canonical (grevlex) order.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next_back()
    }

    /// Scales so the canonical leading coefficient is one.
    pub fn monic(&self) -> Polynomial {
        match self.leading_coefficient() {
            Some(c) => self.scale(&c.recip()),
            None => self.clone(),
        }
    }

    fn check_compatible(&self, other: &Polynomial) {
        assert!(
            same_vars(&self.vars, &other.vars),
            "polynomials over different variable sets: [{}] vs [{}]",
            self.vars,
            other.vars
        );
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        self.check_compatible(rhs);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        self.check_compatible(rhs);
        let mut out = Polynomial::zero(&self.vars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(fmt_rational(&abs));
            }
            for (i, &e) in m.0.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(self.vars.name(i).to_string()),
                    _ => factors.push(format!("{}^{}", self.vars.name(i), e)),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(names: &[&str]) -> Arc<VarSet> {
        VarSet::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn varset_rejects_duplicates_and_bad_names() {
        assert!(matches!(
            VarSet::new(["x", "x"]),
            Err(PolyError::DuplicateVariable(_))
        ));
        assert!(matches!(
            VarSet::new(["1x"]),
            Err(PolyError::InvalidVariable(_))
        ));
        let v = vs(&["x", "y"]);
        assert_eq!(v.fresh_name("x"), "x_");
        assert_eq!(v.fresh_name("t"), "t");
    }

    #[test]
    fn grevlex_orders_by_degree_then_last_variable() {
        // x > y > z; x*z < y^2 in grevlex
        let xz = Monomial::from_exponents(vec![1, 0, 1]);
        let yy = Monomial::from_exponents(vec![0, 2, 0]);
        assert!(yy > xz);
        let x = Monomial::var(3, 0);
        assert!(xz > x);
        assert!(Monomial::var(3, 0) > Monomial::var(3, 1));
    }

    #[test]
    fn power_rule_and_zero_derivative() {
        let v = vs(&["x", "y", "z", "w"]);
        let p = parse_poly("x^2 + z^3 + w^2*x", &v).unwrap();
        let d = p.partial_derivative(0);
        assert_eq!(d, parse_poly("2*x + w^2", &v).unwrap());
        let c = Polynomial::constant(&v, rat(5));
        assert!(c.partial_derivative(1).is_zero());
    }

    #[test]
    fn derivative_term_by_term() {
        // d/dw (y^2 z + y w^2 + z^2) = 2 y w
        let v = vs(&["y", "z", "w"]);
        let p = parse_poly("y^2*z + y*w^2 + z^2", &v).unwrap();
        assert_eq!(p.partial_derivative(2), parse_poly("2*y*w", &v).unwrap());
    }

    #[test]
    fn substitution_examples() {
        let v = vs(&["x", "y", "z", "a"]);
        let p = parse_poly("x^2 + z^3 - a*y", &v).unwrap();
        let y_img = parse_poly("-a*x", &v).unwrap();
        assert_eq!(
            p.substitute(&[(1, y_img)]),
            parse_poly("x^2 + z^3 + a^2*x", &v).unwrap()
        );
        let q = parse_poly("z^2 - a*x", &v).unwrap();
        let untouched = q.substitute(&[(1, parse_poly("a*z^2", &v).unwrap())]);
        assert_eq!(untouched, q);
        assert_eq!(p.substitute(&[(0, Polynomial::var(&v, 0))]), p);
    }

    #[test]
    fn evaluation_examples() {
        let v = vs(&["x", "y", "a3"]);
        let p = parse_poly("x - a3*y", &v).unwrap();
        assert_eq!(p.evaluate(&[rat(6), rat(2), rat(3)]), rat(0));
        let q = parse_poly("x^2 + y^3", &v).unwrap();
        assert_eq!(q.evaluate(&[rat(0), rat(0), rat(7)]), rat(0));
        assert_eq!(
            Polynomial::zero(&v).evaluate(&[rat(1), ratio(1, 2), rat(3)]),
            rat(0)
        );
    }

    #[test]
    fn display_is_canonical() {
        let v = vs(&["x", "y"]);
        let p = parse_poly("-x + 1/2*y^2 - 3", &v).unwrap();
        assert_eq!(p.to_string(), "1/2*y^2 - x - 3");
        assert_eq!(Polynomial::zero(&v).to_string(), "0");
        assert_eq!(parse_poly("-x*y", &v).unwrap().to_string(), "-x*y");
    }

    #[test]
    fn linear_part_requires_constant_coefficient() {
        let v = vs(&["x", "y", "a"]);
        let p = parse_poly("y + a*x", &v).unwrap();
        let (c, rest) = p.linear_part(1).unwrap();
        assert_eq!(c, rat(1));
        assert_eq!(rest, parse_poly("a*x", &v).unwrap());
        assert!(p.linear_part(0).is_none());
        assert!(parse_poly("y^2 + y", &v).unwrap().linear_part(1).is_none());
        assert!(p.linear_part(2).is_none());
    }

    #[test]
    fn embed_matches_by_name() {
        let small = vs(&["y", "x"]);
        let big = vs(&["x", "y", "z"]);
        let p = parse_poly("x*y^2 + 1", &small).unwrap();
        let q = p.embed(&big).unwrap();
        assert_eq!(q, parse_poly("x*y^2 + 1", &big).unwrap());
        let r = parse_poly("z", &big).unwrap();
        assert!(matches!(
            r.embed(&small),
            Err(PolyError::MissingVariable(_))
        ));
    }

    #[test]
    #[should_panic(expected = "different variable sets")]
    fn mixing_variable_sets_panics() {
        let a = vs(&["x"]);
        let b = vs(&["y"]);
        let _ = &Polynomial::var(&a, 0) + &Polynomial::var(&b, 0);
    }
}
