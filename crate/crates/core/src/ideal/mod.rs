//! Gröbner bases and the ideal operations built on them: normal forms,
//! membership, elimination, saturation and Krull dimension.
//!
//! Buchberger's algorithm with the coprime and chain criteria and
//! normal (lowest lcm degree) pair selection. Desk-scale only; the
//! [`GroebnerLimits`] caps turn runaway instances into errors.

mod solve;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::poly::{same_vars, Monomial, PolyError, Polynomial, Rational, VarSet};

pub use solve::{rational_points, ZeroDimSolution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error("resource limit exceeded: more than {limit} S-pairs processed")]
    TooManyPairs { limit: usize },
    #[error("resource limit exceeded: intermediate degree {degree} above cap {limit}")]
    DegreeTooHigh { degree: u32, limit: u32 },
    #[error("cannot saturate by the zero polynomial")]
    ZeroSaturator,
    #[error("ideal is not zero-dimensional (dimension {0})")]
    NotZeroDimensional(i64),
    #[error("coefficient too large for rational root search")]
    CoefficientTooLarge,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Caps on a single Gröbner computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroebnerLimits {
    pub max_pairs: usize,
    pub max_degree: u32,
}

impl Default for GroebnerLimits {
    fn default() -> Self {
        GroebnerLimits {
            max_pairs: 50_000,
            max_degree: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonomialOrder {
    GrevLex,
    /// Lexicographic with respect to the variable-set order.
    Lex,
    /// Grevlex on the front block, ties broken by grevlex on the rest. Any
    /// monomial involving a front variable beats every monomial without one.
    BlockElimination {
        front: Vec<bool>,
    },
}

impl MonomialOrder {
    pub fn block(nvars: usize, front: &[usize]) -> Self {
        let mut mask = vec![false; nvars];
        for &i in front {
            mask[i] = true;
        }
        MonomialOrder::BlockElimination { front: mask }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let (a, b) = (a.exponents(), b.exponents());
        match self {
            MonomialOrder::GrevLex => crate::poly::grevlex_cmp(a, b),
            MonomialOrder::Lex => a.cmp(b),
            MonomialOrder::BlockElimination { front } => {
                block_cmp(a, b, front, true).then_with(|| block_cmp(a, b, front, false))
            }
        }
    }
}

fn block_cmp(a: &[u32], b: &[u32], mask: &[bool], side: bool) -> Ordering {
    let deg = |m: &[u32]| -> u32 {
        m.iter()
            .zip(mask)
            .filter(|(_, &f)| f == side)
            .map(|(e, _)| *e)
            .sum()
    };
    match deg(a).cmp(&deg(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    for i in (0..a.len()).rev() {
        if mask[i] == side && a[i] != b[i] {
            return b[i].cmp(&a[i]);
        }
    }
    Ordering::Equal
}

/// Terms sorted strictly descending in some monomial order.
type Terms = Vec<(Monomial, Rational)>;

fn to_terms(p: &Polynomial, order: &MonomialOrder) -> Terms {
    let mut t: Terms = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
    t.sort_by(|x, y| order.cmp(&y.0, &x.0));
    t
}

fn from_terms(vars: &Arc<VarSet>, t: Terms) -> Polynomial {
    Polynomial::from_terms(vars, t)
}

fn make_monic(t: &mut Terms) {
    if let Some((_, lc)) = t.first() {
        if !lc.is_one() {
            let inv = lc.recip();
            for (_, c) in t.iter_mut() {
                *c *= &inv;
            }
        }
    }
}

/// `a - c * m * g`, merging two descending term lists.
fn sub_scaled(
    a: &[(Monomial, Rational)],
    c: &Rational,
    m: &Monomial,
    g: &Terms,
    order: &MonomialOrder,
) -> Terms {
    let mut out = Vec::with_capacity(a.len() + g.len());
    let mut i = 0;
    let mut j = 0;
    while i < a.len() || j < g.len() {
        if j == g.len() {
            out.extend_from_slice(&a[i..]);
            break;
        }
        let gm = m.mul(&g[j].0);
        if i == a.len() {
            out.push((gm, -(c * &g[j].1)));
            j += 1;
            continue;
        }
        match order.cmp(&a[i].0, &gm) {
            Ordering::Greater => {
                out.push(a[i].clone());
                i += 1;
            }
            Ordering::Less => {
                out.push((gm, -(c * &g[j].1)));
                j += 1;
            }
            Ordering::Equal => {
                let v = &a[i].1 - c * &g[j].1;
                if !v.is_zero() {
                    out.push((gm, v));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Full reduction of `p` by the monic polynomials in `basis`.
fn reduce(mut p: Terms, basis: &[&Terms], order: &MonomialOrder) -> Terms {
    let mut rem: Terms = Vec::new();
    let mut start = 0;
    while start < p.len() {
        let (lm, lc) = (&p[start].0, &p[start].1);
        let divisor = basis.iter().find(|g| g[0].0.divides(lm));
        match divisor {
            Some(g) => {
                let q = g[0].0.quotient_of(lm);
                let c = lc / &g[0].1;
                p = sub_scaled(&p[start..], &c, &q, g, order);
                start = 0;
            }
            None => {
                rem.push(p[start].clone());
                start += 1;
            }
        }
    }
    rem
}

/// A generating set together with its order; when `is_groebner` holds the
/// generators form the reduced Gröbner basis, sorted by descending leading
/// monomial.
#[derive(Debug, Clone)]
pub struct IdealBasis {
    vars: Arc<VarSet>,
    generators: Vec<Polynomial>,
    order: MonomialOrder,
    is_groebner: bool,
    sorted: Vec<Terms>,
}

impl IdealBasis {
    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn is_groebner(&self) -> bool {
        self.is_groebner
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.sorted.iter().map(|t| t[0].0.clone()).collect()
    }

    pub fn into_generators(self) -> Vec<Polynomial> {
        self.generators
    }
}

struct Pair {
    i: usize,
    j: usize,
    lcm: Monomial,
}

fn spoly(f: &Terms, g: &Terms, lcm: &Monomial, order: &MonomialOrder) -> Terms {
    let mf = f[0].0.quotient_of(lcm);
    let mg = g[0].0.quotient_of(lcm);
    let lhs: Terms = f.iter().map(|(m, c)| (m.mul(&mf), c.clone())).collect();
    sub_scaled(&lhs, &Rational::one(), &mg, g, order)
}

fn degree_of(t: &Terms) -> u32 {
    t.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
pub fn groebner_basis(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    order: &MonomialOrder,
    limits: &GroebnerLimits,
) -> Result<IdealBasis, IdealError> {
    for g in gens {
        assert!(
            same_vars(g.vars(), vars),
            "generator over a foreign variable set"
        );
    }
    let mut basis: Vec<Terms> = Vec::new();
    let mut pairs: Vec<Pair> = Vec::new();
    let mut pending: HashSet<(usize, usize)> = HashSet::new();

    let add = |t: Terms,
               basis: &mut Vec<Terms>,
               pairs: &mut Vec<Pair>,
               pending: &mut HashSet<(usize, usize)>| {
        let k = basis.len();
        for (i, b) in basis.iter().enumerate() {
            let lcm = b[0].0.lcm(&t[0].0);
            pairs.push(Pair { i, j: k, lcm });
            pending.insert((i, k));
        }
        basis.push(t);
    };

    for g in gens {
        let t = to_terms(g, order);
        let refs: Vec<&Terms> = basis.iter().collect();
        let mut r = reduce(t, &refs, order);
        if r.is_empty() {
            continue;
        }
        let d = degree_of(&r);
        if d > limits.max_degree {
            return Err(IdealError::DegreeTooHigh {
                degree: d,
                limit: limits.max_degree,
            });
        }
        make_monic(&mut r);
        add(r, &mut basis, &mut pairs, &mut pending);
    }

    let mut processed = 0usize;
    while !pairs.is_empty() {
        let (idx, _) = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                a.lcm
                    .degree()
                    .cmp(&b.lcm.degree())
                    .then_with(|| order.cmp(&a.lcm, &b.lcm))
                    .then_with(|| (a.j, a.i).cmp(&(b.j, b.i)))
            })
            .unwrap();
        let pair = pairs.swap_remove(idx);
        pending.remove(&(pair.i, pair.j));

        let (fi, fj) = (&basis[pair.i], &basis[pair.j]);
        if fi[0].0.is_coprime(&fj[0].0) {
            continue;
        }
        let chain = (0..basis.len()).any(|k| {
            k != pair.i
                && k != pair.j
                && basis[k][0].0.divides(&pair.lcm)
                && !pending.contains(&(pair.i.min(k), pair.i.max(k)))
                && !pending.contains(&(pair.j.min(k), pair.j.max(k)))
        });
        if chain {
            continue;
        }

        processed += 1;
        if processed > limits.max_pairs {
            return Err(IdealError::TooManyPairs {
                limit: limits.max_pairs,
            });
        }
        let s = spoly(fi, fj, &pair.lcm, order);
        let refs: Vec<&Terms> = basis.iter().collect();
        let mut r = reduce(s, &refs, order);
        if r.is_empty() {
            continue;
        }
        let d = degree_of(&r);
        if d > limits.max_degree {
            return Err(IdealError::DegreeTooHigh {
                degree: d,
                limit: limits.max_degree,
            });
        }
        make_monic(&mut r);
        add(r, &mut basis, &mut pairs, &mut pending);
    }

    let sorted = interreduce(basis, order);
    let generators = sorted.iter().map(|t| from_terms(vars, t.clone())).collect();
    Ok(IdealBasis {
        vars: vars.clone(),
        generators,
        order: order.clone(),
        is_groebner: true,
        sorted,
    })
}

/// Minimalises and fully inter-reduces a Gröbner basis.
fn interreduce(mut basis: Vec<Terms>, order: &MonomialOrder) -> Vec<Terms> {
    basis.sort_by(|a, b| order.cmp(&a[0].0, &b[0].0));
    let mut minimal: Vec<Terms> = Vec::new();
    for t in basis {
        if !minimal.iter().any(|m| m[0].0.divides(&t[0].0)) {
            minimal.push(t);
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for k in 0..minimal.len() {
        let others: Vec<&Terms> = minimal
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != k)
            .map(|(_, t)| t)
            .collect();
        let mut r = reduce(minimal[k].clone(), &others, order);
        make_monic(&mut r);
        out.push(r);
    }
    out.sort_by(|a, b| order.cmp(&b[0].0, &a[0].0));
    out
}

/// Remainder of `p` modulo a Gröbner basis; zero iff `p` lies in the ideal.
pub fn normal_form(p: &Polynomial, basis: &IdealBasis) -> Polynomial {
    assert!(basis.is_groebner, "normal form needs a Gröbner basis");
    let p = p
        .embed(&basis.vars)
        .expect("polynomial outside the basis variable set");
    let refs: Vec<&Terms> = basis.sorted.iter().collect();
    from_terms(
        &basis.vars,
        reduce(to_terms(&p, &basis.order), &refs, &basis.order),
    )
}

pub fn contains(basis: &IdealBasis, p: &Polynomial) -> bool {
    normal_form(p, basis).is_zero()
}

/// True iff the ideal is the whole ring.
pub fn is_trivial(basis: &IdealBasis) -> bool {
    basis
        .generators
        .iter()
        .any(|g| g.is_constant() && !g.is_zero())
}

/// Krull dimension of the vanishing set: the size of a largest variable
/// subset containing the support of no leading monomial. `-1` for the unit
/// ideal.
pub fn ideal_dimension(basis: &IdealBasis) -> i64 {
    assert!(basis.is_groebner, "dimension needs a Gröbner basis");
    if is_trivial(basis) {
        return -1;
    }
    let n = basis.vars.len();
    let supports: Vec<Vec<usize>> = basis
        .sorted
        .iter()
        .map(|t| t[0].0.support().collect())
        .collect();
    let mut chosen = vec![false; n];
    let mut best = 0usize;
    max_independent(0, 0, &mut chosen, &supports, &mut best);
    best as i64
}

fn max_independent(
    i: usize,
    size: usize,
    chosen: &mut Vec<bool>,
    supports: &[Vec<usize>],
    best: &mut usize,
) {
    let n = chosen.len();
    if size + (n - i) <= *best {
        return;
    }
    if i == n {
        *best = size;
        return;
    }
    chosen[i] = true;
    let ok = supports.iter().all(|s| !s.iter().all(|&v| chosen[v]));
    if ok {
        max_independent(i + 1, size + 1, chosen, supports, best);
    }
    chosen[i] = false;
    max_independent(i + 1, size, chosen, supports, best);
}

/// Generators of the elimination ideal `I ∩ k[vars \ drop]`, still expressed
/// over `vars`.
pub fn eliminate(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    drop: &[usize],
    limits: &GroebnerLimits,
) -> Result<Vec<Polynomial>, IdealError> {
    let order = MonomialOrder::block(vars.len(), drop);
    let gb = groebner_basis(vars, gens, &order, limits)?;
    Ok(gb
        .into_generators()
        .into_iter()
        .filter(|g| drop.iter().all(|&d| !g.involves(d)))
        .collect())
}

/// Generators of `I : f^∞`, via `I + (t f - 1)` with a fresh `t` eliminated.
pub fn saturate(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    f: &Polynomial,
    limits: &GroebnerLimits,
) -> Result<Vec<Polynomial>, IdealError> {
    if f.is_zero() {
        return Err(IdealError::ZeroSaturator);
    }
    if f.is_constant() {
        return Ok(groebner_basis(vars, gens, &MonomialOrder::GrevLex, limits)?.into_generators());
    }
    let t_name = vars.fresh_name("t");
    let ext = vars.extended([t_name])?;
    let t = ext.len() - 1;
    let mut ext_gens: Vec<Polynomial> = gens
        .iter()
        .map(|g| g.embed(&ext))
        .collect::<Result<_, _>>()?;
    let fe = f.embed(&ext)?;
    ext_gens.push(&(&Polynomial::var(&ext, t) * &fe) - &Polynomial::one(&ext));
    let elim = eliminate(&ext, &ext_gens, &[t], limits)?;
    let back: Vec<Polynomial> = elim
        .iter()
        .map(|g| g.embed(vars))
        .collect::<Result<_, _>>()?;
    Ok(groebner_basis(vars, &back, &MonomialOrder::GrevLex, limits)?.into_generators())
}

/// Saturation by a product, one factor at a time.
pub fn saturate_by_factors(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    factors: &[Polynomial],
    limits: &GroebnerLimits,
) -> Result<Vec<Polynomial>, IdealError> {
    let mut cur = gens.to_vec();
    for f in factors {
        cur = saturate(vars, &cur, f, limits)?;
    }
    Ok(cur)
}

/// Ideal equality by mutual normal-form reduction.
pub fn ideals_equal(
    vars: &Arc<VarSet>,
    a: &[Polynomial],
    b: &[Polynomial],
    limits: &GroebnerLimits,
) -> Result<bool, IdealError> {
    let ga = groebner_basis(vars, a, &MonomialOrder::GrevLex, limits)?;
    let gb = groebner_basis(vars, b, &MonomialOrder::GrevLex, limits)?;
    Ok(b.iter().all(|p| contains(&ga, p)) && a.iter().all(|p| contains(&gb, p)))
}

/// True iff `g` vanishes on every (complex) point of `V(gens)`, by the
/// Rabinowitsch trick.
pub fn in_radical(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    g: &Polynomial,
    limits: &GroebnerLimits,
) -> Result<bool, IdealError> {
    if g.is_zero() {
        return Ok(true);
    }
    let t_name = vars.fresh_name("t");
    let ext = vars.extended([t_name])?;
    let t = ext.len() - 1;
    let mut ext_gens: Vec<Polynomial> = gens
        .iter()
        .map(|p| p.embed(&ext))
        .collect::<Result<_, _>>()?;
    ext_gens.push(&Polynomial::one(&ext) - &(&Polynomial::var(&ext, t) * &g.embed(&ext)?));
    let gb = groebner_basis(&ext, &ext_gens, &MonomialOrder::GrevLex, limits)?;
    Ok(is_trivial(&gb))
}

/// Dimension of `V(gens)` (grevlex basis).
pub fn dimension_of(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    limits: &GroebnerLimits,
) -> Result<i64, IdealError> {
    let gb = groebner_basis(vars, gens, &MonomialOrder::GrevLex, limits)?;
    Ok(ideal_dimension(&gb))
}
