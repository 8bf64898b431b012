//! Matrices of polynomials, minor ideals and determinantal presentations.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::ideal::{dimension_of, GroebnerLimits, IdealError};
use crate::linalg::QMatrix;
use crate::poly::{parse_poly, PolyError, Polynomial, Rational, VarSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetError {
    #[error("matrix shape error: {0}")]
    Shape(String),
    #[error("t = {t} is out of range for a {m}x{n} matrix")]
    RankOutOfRange { t: usize, m: usize, n: usize },
    #[error("point does not lie on the variety (rank {rank} >= t = {t})")]
    NotOnVariety { rank: usize, t: usize },
    #[error("matrix vanishes at the origin; nothing to reduce")]
    NothingToReduce,
    #[error("origin is not on the variety (rank {rank} at the origin, t = {t})")]
    OriginNotOnVariety { rank: usize, t: usize },
    #[error("pivot {entry} at ({row}, {col}) has no polynomial inverse")]
    NonPolynomialInverse {
        row: usize,
        col: usize,
        entry: String,
    },
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] != i + n - k) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// Dense row-major matrix of polynomials over one variable set.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    vars: Arc<VarSet>,
    entries: Vec<Polynomial>,
}

impl PolyMatrix {
    pub fn new(
        vars: &Arc<VarSet>,
        rows: usize,
        cols: usize,
        entries: Vec<Polynomial>,
    ) -> Result<Self, DetError> {
        if entries.len() != rows * cols {
            return Err(DetError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        let entries = entries
            .iter()
            .map(|e| e.embed(vars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMatrix {
            rows,
            cols,
            vars: vars.clone(),
            entries,
        })
    }

    pub fn zeros(vars: &Arc<VarSet>, rows: usize, cols: usize) -> Self {
        PolyMatrix {
            rows,
            cols,
            vars: vars.clone(),
            entries: vec![Polynomial::zero(vars); rows * cols],
        }
    }

    /// Parses a rectangular table of expressions.
    pub fn parse<S: AsRef<str>>(vars: &Arc<VarSet>, rows: &[Vec<S>]) -> Result<Self, DetError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(DetError::Shape("ragged rows".into()));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|s| parse_poly(s.as_ref(), vars))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyMatrix {
            rows: rows.len(),
            cols,
            vars: vars.clone(),
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn entries(&self) -> &[Polynomial] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Polynomial {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Polynomial) {
        self.entries[i * self.cols + j] = p;
    }

    pub fn row(&self, i: usize) -> &[Polynomial] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = PolyMatrix::zeros(&self.vars, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Re-expresses all entries over `target`.
    pub fn embed(&self, target: &Arc<VarSet>) -> Result<Self, DetError> {
        PolyMatrix::new(target, self.rows, self.cols, self.entries.clone())
    }

    /// `self` on top of `below`; both must share a variable set.
    pub fn stack(&self, below: &PolyMatrix) -> Result<Self, DetError> {
        if self.cols != below.cols {
            return Err(DetError::Shape(format!(
                "cannot stack {} over {} columns",
                self.cols, below.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend(below.entries.iter().cloned());
        PolyMatrix::new(&self.vars, self.rows + below.rows, self.cols, entries)
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        let entries: Vec<Polynomial> = self.entries.iter().map(f).collect();
        let vars = entries
            .first()
            .map_or_else(|| self.vars.clone(), |e| e.vars().clone());
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            vars,
            entries,
        }
    }

    pub fn evaluate(&self, point: &[Rational]) -> QMatrix {
        let rows = (0..self.rows)
            .map(|i| self.row(i).iter().map(|e| e.evaluate(point)).collect())
            .collect();
        QMatrix::from_rows(rows).unwrap_or_else(|_| QMatrix::zeros(self.rows, self.cols))
    }

    /// Determinant of the sub-matrix on `rows × cols` (equal lengths).
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Polynomial {
        let mut memo = HashMap::new();
        self.minor_memo(rows, cols, &mut memo)
    }

    fn minor_memo(
        &self,
        rows: &[usize],
        cols: &[usize],
        memo: &mut HashMap<(Vec<usize>, Vec<usize>), Polynomial>,
    ) -> Polynomial {
        assert_eq!(rows.len(), cols.len(), "minor needs a square selection");
        match rows.len() {
            0 => return Polynomial::one(&self.vars),
            1 => return self.get(rows[0], cols[0]).clone(),
            _ => {}
        }
        let key = (rows.to_vec(), cols.to_vec());
        if let Some(p) = memo.get(&key) {
            return p.clone();
        }
        // Laplace expansion along the first selected row.
        let mut acc = Polynomial::zero(&self.vars);
        for (k, &c) in cols.iter().enumerate() {
            let e = self.get(rows[0], c);
            if e.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, &c)| c)
                .collect();
            let sub = self.minor_memo(&rows[1..], &rest, memo);
            let term = e * &sub;
            acc = if k % 2 == 0 {
                &acc + &term
            } else {
                &acc - &term
            };
        }
        memo.insert(key, acc.clone());
        acc
    }

    pub fn determinant(&self) -> Result<Polynomial, DetError> {
        if self.rows != self.cols {
            return Err(DetError::Shape(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let idx: Vec<usize> = (0..self.rows).collect();
        Ok(self.minor(&idx, &idx))
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|e| format!("({e})")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// All `t × t` minors, ordered lexicographically by (row set, column set).
pub fn minors(m: &PolyMatrix, t: usize) -> Result<Vec<Polynomial>, DetError> {
    if t == 0 || t > m.rows.min(m.cols) {
        return Err(DetError::RankOutOfRange {
            t,
            m: m.rows,
            n: m.cols,
        });
    }
    let mut memo = HashMap::new();
    let col_sets = combinations(m.cols, t);
    let mut out = Vec::new();
    for rs in combinations(m.rows, t) {
        for cs in &col_sets {
            out.push(m.minor_memo(&rs, cs, &mut memo));
        }
    }
    Ok(out)
}

/// Rank of `m` evaluated at `point`.
pub fn rank_at(m: &PolyMatrix, point: &[Rational]) -> usize {
    m.evaluate(point).rank()
}

/// `X = F⁻¹(rank < t)` for an `m × n` matrix `F` in `N` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct DetPresentation {
    matrix: PolyMatrix,
    t: usize,
    label: String,
}

impl DetPresentation {
    pub fn new(matrix: PolyMatrix, t: usize, label: impl Into<String>) -> Result<Self, DetError> {
        if matrix.rows == 0 || matrix.cols == 0 {
            return Err(DetError::Shape(
                "presentation matrix must be non-empty".into(),
            ));
        }
        if t == 0 || t > matrix.rows.min(matrix.cols) {
            return Err(DetError::RankOutOfRange {
                t,
                m: matrix.rows,
                n: matrix.cols,
            });
        }
        Ok(DetPresentation {
            matrix,
            t,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &PolyMatrix {
        &self.matrix
    }

    pub fn m(&self) -> usize {
        self.matrix.rows
    }

    pub fn n(&self) -> usize {
        self.matrix.cols
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.matrix.vars
    }

    /// Number of ambient coordinates `N`.
    pub fn ambient_dim(&self) -> usize {
        self.matrix.vars.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn expected_codim(&self) -> usize {
        (self.m() - self.t + 1) * (self.n() - self.t + 1)
    }

    /// Generators of the ideal of `X`.
    pub fn ideal(&self) -> Vec<Polynomial> {
        minors(&self.matrix, self.t).expect("t validated on construction")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeterminantalReport {
    pub ideal_dim: i64,
    pub expected_codim: usize,
    pub codim: i64,
    pub verdict: bool,
}

pub fn check_determinantal(
    p: &DetPresentation,
    limits: &GroebnerLimits,
) -> Result<DeterminantalReport, DetError> {
    let ideal_dim = dimension_of(p.vars(), &p.ideal(), limits)?;
    let codim = p.ambient_dim() as i64 - ideal_dim;
    let expected_codim = p.expected_codim();
    Ok(DeterminantalReport {
        ideal_dim,
        expected_codim,
        codim,
        verdict: codim == expected_codim as i64,
    })
}

/// The `s` with `point ∈ X^s`, i.e. rank + 1.
pub fn stratum_at(p: &DetPresentation, point: &[Rational]) -> Result<usize, DetError> {
    let rank = rank_at(&p.matrix, point);
    if rank >= p.t {
        return Err(DetError::NotOnVariety { rank, t: p.t });
    }
    Ok(rank + 1)
}

pub fn transpose_presentation(p: &DetPresentation) -> DetPresentation {
    DetPresentation {
        matrix: p.matrix.transpose(),
        t: p.t,
        label: p.label.clone(),
    }
}

/// Splits off the identity block `F(0)` carries: pivots on pure nonzero
/// constants until the matrix vanishes at the origin.
pub fn reduce_presentation(p: &DetPresentation) -> Result<DetPresentation, DetError> {
    let origin = vec![Rational::zero(); p.ambient_dim()];
    let rank = rank_at(&p.matrix, &origin);
    if rank == 0 {
        return Err(DetError::NothingToReduce);
    }
    if rank >= p.t {
        return Err(DetError::OriginNotOnVariety { rank, t: p.t });
    }
    let mut m = p.matrix.clone();
    let mut t = p.t;
    loop {
        let nonzero_at_origin: Vec<(usize, usize)> = (0..m.rows)
            .flat_map(|i| (0..m.cols).map(move |j| (i, j)))
            .filter(|&(i, j)| !m.get(i, j).constant_term().is_zero())
            .collect();
        let Some(&first) = nonzero_at_origin.first() else {
            break;
        };
        let pivot = nonzero_at_origin
            .iter()
            .copied()
            .find(|&(i, j)| m.get(i, j).is_constant());
        let Some((k, l)) = pivot else {
            return Err(DetError::NonPolynomialInverse {
                row: first.0 + 1,
                col: first.1 + 1,
                entry: m.get(first.0, first.1).to_string(),
            });
        };
        let inv = m.get(k, l).constant_term().recip();
        let mut entries = Vec::with_capacity((m.rows - 1) * (m.cols - 1));
        for i in (0..m.rows).filter(|&i| i != k) {
            for j in (0..m.cols).filter(|&j| j != l) {
                let corr = (m.get(i, l) * m.get(k, j)).scale(&inv);
                entries.push(m.get(i, j) - &corr);
            }
        }
        m = PolyMatrix {
            rows: m.rows - 1,
            cols: m.cols - 1,
            vars: m.vars.clone(),
            entries,
        };
        t -= 1;
    }
    DetPresentation::new(m, t, p.label.clone())
}

/// Closure dimensions of the strata and the inequalities they feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StrataReport {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub ambient_dim: usize,
    /// `dims[s-1] = dim V(s×s minors)`, the closure of `X^s`.
    pub dims: Vec<i64>,
    pub tilde_is_determinantal: bool,
    pub tilde_equals_tjur: bool,
    pub transpose_tilde_is_determinantal: bool,
    pub transpose_tilde_equals_tjur: bool,
}

impl StrataReport {
    /// Evaluates the inequalities from recorded dimensions alone.
    pub fn from_dims(m: usize, n: usize, t: usize, ambient_dim: usize, dims: Vec<i64>) -> Self {
        let big_n = ambient_dim as i64;
        let (mi, ni, ti) = (m as i64, n as i64, t as i64);
        let row_bound = |s: i64| big_n - (mi - s + 1) * (ni - ti + 1);
        let col_bound = |s: i64| big_n - (mi - ti + 1) * (ni - s + 1);
        let all = |range: std::ops::Range<usize>, ok: &dyn Fn(i64, i64) -> bool| {
            range.into_iter().all(|s| ok(dims[s - 1], s as i64))
        };
        StrataReport {
            m,
            n,
            t,
            ambient_dim,
            tilde_is_determinantal: all(1..t + 1, &|d, s| d <= row_bound(s)),
            tilde_equals_tjur: all(1..t, &|d, s| d < row_bound(s)),
            transpose_tilde_is_determinantal: all(1..t + 1, &|d, s| d <= col_bound(s)),
            transpose_tilde_equals_tjur: all(1..t, &|d, s| d < col_bound(s)),
            dims,
        }
    }
}

pub fn strata_report(
    p: &DetPresentation,
    limits: &GroebnerLimits,
) -> Result<StrataReport, DetError> {
    let mut dims = Vec::with_capacity(p.t);
    for s in 1..=p.t {
        dims.push(dimension_of(p.vars(), &minors(&p.matrix, s)?, limits)?);
    }
    Ok(StrataReport::from_dims(
        p.m(),
        p.n(),
        p.t,
        p.ambient_dim(),
        dims,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn mat(vars: &Arc<VarSet>, rows: &[&[&str]]) -> PolyMatrix {
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        PolyMatrix::parse(vars, &rows).unwrap()
    }

    fn f1() -> DetPresentation {
        let v = VarSet::new(["x", "y", "z", "w"]).unwrap();
        DetPresentation::new(mat(&v, &[&["w^3", "y", "x"], &["z", "w", "y^3"]]), 2, "F1").unwrap()
    }

    fn parse_all(v: &Arc<VarSet>, s: &[&str]) -> Vec<Polynomial> {
        s.iter().map(|e| parse_poly(e, v).unwrap()).collect()
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
        assert!(combinations(2, 3).is_empty());
    }

    #[test]
    fn one_minors_are_entries() {
        let p = f1();
        assert_eq!(
            minors(p.matrix(), 1).unwrap(),
            p.matrix().entries().to_vec()
        );
    }

    #[test]
    fn e7_determinant() {
        let v = VarSet::new(["x", "y", "z"]).unwrap();
        let m = mat(&v, &[&["y", "x^2 + z^3"], &["-x", "y"]]);
        assert_eq!(
            minors(&m, 2).unwrap(),
            parse_all(&v, &["y^2 + x^3 + x*z^3"])
        );
    }

    #[test]
    fn f1_two_minors() {
        let p = f1();
        let v = p.vars();
        assert_eq!(
            minors(p.matrix(), 2).unwrap(),
            parse_all(v, &["w^4 - y*z", "w^3*y^3 - x*z", "y^4 - x*w"])
        );
    }

    #[test]
    fn minors_reject_bad_t() {
        let p = f1();
        assert_eq!(
            minors(p.matrix(), 3),
            Err(DetError::RankOutOfRange { t: 3, m: 2, n: 3 })
        );
        assert!(minors(p.matrix(), 0).is_err());
    }

    #[test]
    fn determinantal_checks() {
        let lim = GroebnerLimits::default();
        let r = check_determinantal(&f1(), &lim).unwrap();
        assert_eq!((r.codim, r.expected_codim, r.verdict), (2, 2, true));

        let v = VarSet::new(["x"]).unwrap();
        let p = DetPresentation::new(mat(&v, &[&["x", "0"], &["0", "x"]]), 1, "").unwrap();
        let r = check_determinantal(&p, &lim).unwrap();
        assert_eq!(
            (r.ideal_dim, r.codim, r.expected_codim, r.verdict),
            (0, 1, 4, false)
        );
    }

    #[test]
    fn ranks_and_strata() {
        let p = f1();
        let origin = vec![rat(0); 4];
        let q = vec![rat(0), rat(0), rat(1), rat(0)];
        assert_eq!(rank_at(p.matrix(), &origin), 0);
        assert_eq!(rank_at(p.matrix(), &q), 1);
        assert_eq!(stratum_at(&p, &origin).unwrap(), 1);
        assert_eq!(stratum_at(&p, &q).unwrap(), 2);
        let off = vec![rat(0), rat(1), rat(1), rat(0)];
        assert!(matches!(
            stratum_at(&p, &off),
            Err(DetError::NotOnVariety { .. })
        ));
    }

    #[test]
    fn transpose_round_trip() {
        let p = f1();
        let t = transpose_presentation(&p);
        assert_eq!((t.m(), t.n()), (3, 2));
        assert_eq!(transpose_presentation(&t), p);
    }

    #[test]
    fn reduce_identity_block() {
        let v = VarSet::new(["f", "g", "h"]).unwrap();
        let p = DetPresentation::new(mat(&v, &[&["1", "0"], &["0", "f"]]), 2, "").unwrap();
        let r = reduce_presentation(&p).unwrap();
        assert_eq!((r.m(), r.n(), r.t()), (1, 1, 1));
        assert_eq!(r.matrix().get(0, 0), &parse_poly("f", &v).unwrap());

        let p = DetPresentation::new(mat(&v, &[&["1", "g"], &["h", "f"]]), 2, "").unwrap();
        let r = reduce_presentation(&p).unwrap();
        assert_eq!(r.matrix().get(0, 0), &parse_poly("f - h*g", &v).unwrap());
    }

    #[test]
    fn reduce_errors() {
        assert_eq!(reduce_presentation(&f1()), Err(DetError::NothingToReduce));
        let v = VarSet::new(["x"]).unwrap();
        let p = DetPresentation::new(mat(&v, &[&["1 + x", "0"], &["0", "x"]]), 2, "").unwrap();
        assert!(matches!(
            reduce_presentation(&p),
            Err(DetError::NonPolynomialInverse { row: 1, col: 1, .. })
        ));
        let p = DetPresentation::new(mat(&v, &[&["1", "0"], &["0", "1"]]), 2, "").unwrap();
        assert!(matches!(
            reduce_presentation(&p),
            Err(DetError::OriginNotOnVariety { .. })
        ));
    }

    #[test]
    fn strata_of_the_paired_examples() {
        let lim = GroebnerLimits::default();
        let s = strata_report(&f1(), &lim).unwrap();
        assert_eq!(s.dims, vec![0, 2]);
        assert!(!s.tilde_equals_tjur);
        assert!(s.transpose_tilde_equals_tjur);
        let s = strata_report(&transpose_presentation(&f1()), &lim).unwrap();
        assert!(s.tilde_equals_tjur);
        assert!(!s.transpose_tilde_equals_tjur);
    }
}
