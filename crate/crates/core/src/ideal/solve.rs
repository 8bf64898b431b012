//! Rational points of zero-dimensional ideals, one variable at a time.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{
    eliminate, groebner_basis, ideal_dimension, is_trivial, GroebnerLimits, IdealError,
    MonomialOrder,
};
use crate::poly::{Polynomial, Rational, VarSet};

/// All rational points of `V(I)`, plus whether they exhaust the complex
/// points (every univariate elimination polynomial met on the way splits
/// into rational linear factors).
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroDimSolution {
    pub points: Vec<Vec<Rational>>,
    pub complete: bool,
}

pub fn rational_points(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    limits: &GroebnerLimits,
) -> Result<ZeroDimSolution, IdealError> {
    let gb = groebner_basis(vars, gens, &MonomialOrder::GrevLex, limits)?;
    if is_trivial(&gb) {
        return Ok(ZeroDimSolution {
            points: Vec::new(),
            complete: true,
        });
    }
    let dim = ideal_dimension(&gb);
    if dim != 0 {
        return Err(IdealError::NotZeroDimensional(dim));
    }
    let free: Vec<usize> = (0..vars.len()).collect();
    let mut assignment = vec![Rational::zero(); vars.len()];
    let mut out = ZeroDimSolution {
        points: Vec::new(),
        complete: true,
    };
    descend(
        vars,
        gb.generators(),
        &free,
        &mut assignment,
        &mut out,
        limits,
    )?;
    out.points.sort();
    Ok(out)
}

fn descend(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    free: &[usize],
    assignment: &mut Vec<Rational>,
    out: &mut ZeroDimSolution,
    limits: &GroebnerLimits,
) -> Result<(), IdealError> {
    let Some((&v, rest)) = free.split_last() else {
        if gens
            .iter()
            .all(|g| g.as_constant().is_some_and(|c| c.is_zero()))
        {
            out.points.push(assignment.clone());
        }
        return Ok(());
    };
    let elim = eliminate(vars, gens, rest, limits)?;
    if elim.iter().any(|g| g.is_constant() && !g.is_zero()) {
        return Ok(());
    }
    let Some(generator) = elim.first() else {
        return Err(IdealError::NotZeroDimensional(1));
    };
    let coeffs = univariate(generator, v);
    let roots = rational_roots(&coeffs)?;
    if squarefree_degree(&coeffs) != roots.len() {
        out.complete = false;
    }
    for r in roots {
        assignment[v] = r.clone();
        let value = Polynomial::constant(vars, r);
        let next: Vec<Polynomial> = gens
            .iter()
            .map(|g| g.substitute(&[(v, value.clone())]))
            .filter(|g| !g.is_zero())
            .collect();
        descend(vars, &next, rest, assignment, out, limits)?;
    }
    assignment[v] = Rational::zero();
    Ok(())
}

/// Coefficients by ascending degree of a polynomial involving only `v`.
fn univariate(p: &Polynomial, v: usize) -> Vec<Rational> {
    let mut c = vec![Rational::zero(); p.degree_in(v) as usize + 1];
    for (m, a) in p.terms() {
        c[m.exponent(v) as usize] += a;
    }
    c
}

fn trim(mut p: Vec<Rational>) -> Vec<Rational> {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

fn poly_rem(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1;
        let q = &r[k] / &lead;
        for i in 0..=db {
            let t = &q * &b[i];
            r[k - db + i] -= t;
        }
        r = trim(r);
    }
    r
}

fn poly_gcd(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = poly_rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn squarefree_degree(p: &[Rational]) -> usize {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return 0;
    }
    let dp: Vec<Rational> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
        .collect();
    let g = poly_gcd(&p, &dp);
    (p.len() - 1) - (g.len() - 1)
}

fn divisors(n: &BigInt) -> Result<Vec<u64>, IdealError> {
    let n = n.abs().to_u64().ok_or(IdealError::CoefficientTooLarge)?;
    if n > 1_000_000_000_000 {
        return Err(IdealError::CoefficientTooLarge);
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    Ok(out)
}

fn eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Distinct rational roots, ascending.
fn rational_roots(p: &[Rational]) -> Result<Vec<Rational>, IdealError> {
    let p = trim(p.to_vec());
    if p.len() <= 1 {
        return Ok(Vec::new());
    }
    let lcm = p.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p
        .iter()
        .map(|c| (c * Rational::from_integer(lcm.clone())).to_integer())
        .collect();
    let shift = ints.iter().position(|c| !c.is_zero()).unwrap();
    let mut roots = Vec::new();
    if shift > 0 {
        roots.push(Rational::zero());
    }
    let core: Vec<BigInt> = ints[shift..].to_vec();
    if core.len() > 1 {
        let ps = divisors(&core[0])?;
        let qs = divisors(core.last().unwrap())?;
        let as_rat: Vec<Rational> = core
            .iter()
            .map(|c| Rational::from_integer(c.clone()))
            .collect();
        for &num in &ps {
            for &den in &qs {
                for sign in [1i64, -1] {
                    let cand = Rational::new(BigInt::from(num) * sign, BigInt::from(den));
                    if !roots.contains(&cand) && eval(&as_rat, &cand).is_zero() {
                        roots.push(cand);
                    }
                }
            }
        }
    }
    roots.sort();
    Ok(roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, rat, ratio};

    #[test]
    fn roots_of_split_polynomial() {
        // (x - 1/2)(x + 3) x^2 = x^4 + 5/2 x^3 - 3/2 x^2
        let p = vec![rat(0), rat(0), ratio(-3, 2), ratio(5, 2), rat(1)];
        assert_eq!(
            rational_roots(&p).unwrap(),
            vec![rat(-3), rat(0), ratio(1, 2)]
        );
        assert_eq!(squarefree_degree(&p), 3);
    }

    #[test]
    fn irrational_roots_mark_incomplete() {
        let v = VarSet::new(["x", "y"]).unwrap();
        let gens = vec![
            parse_poly("x^2 - 2", &v).unwrap(),
            parse_poly("y", &v).unwrap(),
        ];
        let sol = rational_points(&v, &gens, &GroebnerLimits::default()).unwrap();
        assert!(sol.points.is_empty());
        assert!(!sol.complete);
    }

    #[test]
    fn finds_all_points_of_a_finite_set() {
        let v = VarSet::new(["x", "y"]).unwrap();
        let gens = vec![
            parse_poly("x^2 - x", &v).unwrap(),
            parse_poly("y - 2*x", &v).unwrap(),
        ];
        let sol = rational_points(&v, &gens, &GroebnerLimits::default()).unwrap();
        assert_eq!(sol.points, vec![vec![rat(0), rat(0)], vec![rat(1), rat(2)]]);
        assert!(sol.complete);
    }

    #[test]
    fn positive_dimension_is_an_error() {
        let v = VarSet::new(["x", "y"]).unwrap();
        let gens = vec![parse_poly("x*y", &v).unwrap()];
        assert_eq!(
            rational_points(&v, &gens, &GroebnerLimits::default()),
            Err(IdealError::NotZeroDimensional(1))
        );
    }
}
