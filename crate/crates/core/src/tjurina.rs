//! Affine charts of the Tjurina transform.
//!
//! For a chart `I ⊂ {1..n}` with `|I| = t-1` the row space of `F(x)` is
//! written as the row space of `A_I(a)`, a `(t-1) × n` matrix with unit
//! columns at `I`. The chart is cut out by the `m(n-t+1)` entries
//! `f_{ki} - Σ_j a_{ji} f_{k i_j}` for `i ∉ I`.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::detvar::{
    minors, transpose_presentation, DetError, DetPresentation, PolyMatrix, StrataReport,
};
use crate::ideal::IdealError;
use crate::linalg::QMatrix;
use crate::poly::{PolyError, Polynomial, Rational, VarSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TjurinaError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("point is not in the overlap of the two charts")]
    NotInOverlap,
    #[error("operation requires t = 1, got t = {0}")]
    NeedsTOne(usize),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Row space charts belong to `Tjur`, column space charts to `Tjurᵀ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Row,
    Column,
}

/// A subset `I` of column (or row) indices, stored 0-based and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct ChartIndex {
    set: Vec<usize>,
    side: Side,
}

impl ChartIndex {
    /// `one_based` lists the members of `I` as printed (starting at 1).
    pub fn new(one_based: &[usize], side: Side) -> Result<Self, TjurinaError> {
        if one_based.contains(&0) {
            return Err(TjurinaError::InvalidChart("indices start at 1".into()));
        }
        let mut set: Vec<usize> = one_based.iter().map(|i| i - 1).collect();
        set.sort_unstable();
        if set.windows(2).any(|w| w[0] == w[1]) {
            return Err(TjurinaError::InvalidChart("repeated index".into()));
        }
        Ok(ChartIndex { set, side })
    }

    pub fn row(one_based: &[usize]) -> Result<Self, TjurinaError> {
        Self::new(one_based, Side::Row)
    }

    pub fn column(one_based: &[usize]) -> Result<Self, TjurinaError> {
        Self::new(one_based, Side::Column)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// 0-based members.
    pub fn indices(&self) -> &[usize] {
        &self.set
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.set.iter().map(|i| i + 1).collect()
    }

    /// Columns of `A_I` that carry chart variables.
    pub fn free_columns(&self, width: usize) -> Vec<usize> {
        (0..width).filter(|i| !self.set.contains(i)).collect()
    }

    fn validate(&self, t: usize, width: usize) -> Result<(), TjurinaError> {
        if self.set.len() + 1 != t {
            return Err(TjurinaError::InvalidChart(format!(
                "chart {:?} has {} elements, expected t-1 = {}",
                self.one_based(),
                self.set.len(),
                t - 1
            )));
        }
        if self.set.iter().any(|&i| i >= width) {
            return Err(TjurinaError::InvalidChart(format!(
                "chart {:?} exceeds the {} available indices",
                self.one_based(),
                width
            )));
        }
        Ok(())
    }

    /// All charts of the given side for a `t` and width.
    pub fn all(t: usize, width: usize, side: Side) -> Vec<ChartIndex> {
        if t == 0 {
            return Vec::new();
        }
        crate::detvar::combinations(width, t - 1)
            .into_iter()
            .map(|set| ChartIndex { set, side })
            .collect()
    }
}

impl fmt::Display for ChartIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.one_based().iter().map(ToString::to_string).collect();
        let prefix = if self.side == Side::Column { "T" } else { "" };
        write!(f, "{prefix}{{{}}}", items.join(","))
    }
}

/// Names of the chart variables `a_{ji}`, column-major over `i ∉ I`.
/// With a single row (`t = 2`) the row index is dropped: `a{i}`.
pub fn chart_variable_names(chart: &ChartIndex, t: usize, width: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in chart.free_columns(width) {
        for j in 0..t.saturating_sub(1) {
            if t == 2 {
                out.push(format!("a{}", i + 1));
            } else {
                out.push(format!("a{}_{}", j + 1, i + 1));
            }
        }
    }
    out
}

/// The `(t-1) × width` matrix `A_I` over its own chart variables.
pub fn chart_matrix(
    chart: &ChartIndex,
    t: usize,
    width: usize,
) -> Result<PolyMatrix, TjurinaError> {
    chart.validate(t, width)?;
    let vars = VarSet::new(chart_variable_names(chart, t, width))?;
    chart_matrix_over(chart, t, width, &vars, &(0..vars.len()).collect::<Vec<_>>())
}

/// `A_I` with its chart variables at `chart_vars` of `vars`.
fn chart_matrix_over(
    chart: &ChartIndex,
    t: usize,
    width: usize,
    vars: &Arc<VarSet>,
    chart_vars: &[usize],
) -> Result<PolyMatrix, TjurinaError> {
    let rows = t - 1;
    let mut a = PolyMatrix::zeros(vars, rows, width);
    for (j, &col) in chart.set.iter().enumerate() {
        a.set(j, col, Polynomial::one(vars));
    }
    let mut k = 0;
    for i in chart.free_columns(width) {
        for j in 0..rows {
            a.set(j, i, Polynomial::var(vars, chart_vars[k]));
            k += 1;
        }
    }
    Ok(a)
}

fn working_matrix(p: &DetPresentation, side: Side) -> PolyMatrix {
    match side {
        Side::Row => p.matrix().clone(),
        Side::Column => p.matrix().transpose(),
    }
}

/// Ambient variables followed by the chart variables (renamed on clash).
fn chart_space(
    p: &DetPresentation,
    chart: &ChartIndex,
    width: usize,
) -> Result<(Arc<VarSet>, Vec<usize>), TjurinaError> {
    let base = p.vars();
    let mut names: Vec<String> = Vec::new();
    for name in chart_variable_names(chart, p.t(), width) {
        let mut fresh = base.fresh_name(&name);
        while names.contains(&fresh) {
            fresh.push('_');
        }
        names.push(fresh);
    }
    let vars = base.extended(names)?;
    let chart_vars = (base.len()..vars.len()).collect();
    Ok((vars, chart_vars))
}

/// `A_I` stacked over `F` (or `Fᵀ` for column charts) in chart space.
pub fn stacked_matrix(p: &DetPresentation, chart: &ChartIndex) -> Result<PolyMatrix, TjurinaError> {
    let g = working_matrix(p, chart.side);
    chart.validate(p.t(), g.cols())?;
    let (vars, chart_vars) = chart_space(p, chart, g.cols())?;
    let a = chart_matrix_over(chart, p.t(), g.cols(), &vars, &chart_vars)?;
    Ok(a.stack(&g.embed(&vars)?)?)
}

/// A chart of the Tjurina transform together with the eliminations applied
/// to it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartPresentation {
    source: DetPresentation,
    chart: ChartIndex,
    vars: Arc<VarSet>,
    chart_vars: Vec<usize>,
    generators: Vec<Polynomial>,
    ledger: Vec<(usize, Polynomial)>,
    matrix: PolyMatrix,
}

impl ChartPresentation {
    pub fn source(&self) -> &DetPresentation {
        &self.source
    }

    pub fn chart(&self) -> &ChartIndex {
        &self.chart
    }

    /// Ambient coordinates followed by chart coordinates.
    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn chart_vars(&self) -> &[usize] {
        &self.chart_vars
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.generators
    }

    /// Eliminations `(v, v - h)` in the order applied.
    pub fn ledger(&self) -> &[(usize, Polynomial)] {
        &self.ledger
    }

    /// `F'_I` as built, before any elimination.
    pub fn matrix(&self) -> &PolyMatrix {
        &self.matrix
    }

    /// Remaining generators together with the ledger's defining equations;
    /// this generates the chart ideal in the full chart space.
    pub fn full_ideal(&self) -> Vec<Polynomial> {
        let mut out = self.generators.clone();
        out.extend(self.ledger.iter().map(|(_, g)| g.clone()));
        out
    }

    /// Variables not eliminated so far.
    pub fn free_vars(&self) -> Vec<usize> {
        (0..self.vars.len())
            .filter(|v| !self.ledger.iter().any(|(w, _)| w == v))
            .collect()
    }

    /// Replaces the generators, keeping the ledger.
    pub fn with_generators(&self, generators: Vec<Polynomial>) -> Self {
        ChartPresentation {
            generators,
            ..self.clone()
        }
    }

    /// Lifts a point of the eliminated coordinates back to full chart
    /// space by replaying the ledger in reverse.
    pub fn lift_point(&self, point: &[Rational]) -> Vec<Rational> {
        let mut full = point.to_vec();
        for (v, g) in self.ledger.iter().rev() {
            // g = v - h, so h(p) = v - g(p) evaluated with v = 0.
            full[*v] = Rational::zero();
            full[*v] = -g.evaluate(&full);
        }
        full
    }
}

/// Builds the generators of `T̃jur_I` from the closed formula.
pub fn chart_presentation(
    p: &DetPresentation,
    chart: &ChartIndex,
) -> Result<ChartPresentation, TjurinaError> {
    let g = working_matrix(p, chart.side);
    let width = g.cols();
    let t = p.t();
    chart.validate(t, width)?;
    let (vars, chart_vars) = chart_space(p, chart, width)?;
    let g = g.embed(&vars)?;
    let a = chart_matrix_over(chart, t, width, &vars, &chart_vars)?;
    let free = chart.free_columns(width);
    let mut entries = Vec::with_capacity(g.rows() * free.len());
    for k in 0..g.rows() {
        for &i in &free {
            let mut e = g.get(k, i).clone();
            for (j, &ij) in chart.set.iter().enumerate() {
                e = &e - &(a.get(j, i) * g.get(k, ij));
            }
            entries.push(e);
        }
    }
    let matrix = PolyMatrix::new(&vars, g.rows(), free.len(), entries.clone())?;
    Ok(ChartPresentation {
        source: p.clone(),
        chart: chart.clone(),
        vars,
        chart_vars,
        generators: entries,
        ledger: Vec::new(),
        matrix,
    })
}

/// Coordinates of the same `(t-1)`-plane in chart `to`, via
/// `(A_I(a)[:, J])⁻¹ A_I(a)`.
pub fn chart_transition(
    from: &ChartIndex,
    to: &ChartIndex,
    width: usize,
    coords: &[Rational],
) -> Result<Vec<Rational>, TjurinaError> {
    if from.side != to.side {
        return Err(TjurinaError::InvalidChart(
            "charts on different sides".into(),
        ));
    }
    let t = from.set.len() + 1;
    from.validate(t, width)?;
    to.validate(t, width)?;
    let rows = t - 1;
    let free_from = from.free_columns(width);
    if coords.len() != rows * free_from.len() {
        return Err(TjurinaError::InvalidChart(format!(
            "{} coordinates given, chart has {}",
            coords.len(),
            rows * free_from.len()
        )));
    }
    let mut a = QMatrix::zeros(rows, width);
    for (j, &c) in from.set.iter().enumerate() {
        a.set(j, c, Rational::one());
    }
    let mut k = 0;
    for &i in &free_from {
        for j in 0..rows {
            a.set(j, i, coords[k].clone());
            k += 1;
        }
    }
    let block = a.select_columns(&to.set);
    let inv = block.inverse().map_err(|_| TjurinaError::NotInOverlap)?;
    let b = &inv * &a;
    let mut out = Vec::with_capacity(coords.len());
    for i in to.free_columns(width) {
        for j in 0..rows {
            out.push(b.get(j, i).clone());
        }
    }
    Ok(out)
}

/// Solves generators that are linear with constant coefficient in some
/// variable. Variables are scanned in order (ambient before chart), and
/// generators in order; after each elimination the scan restarts.
pub fn eliminate_linear(cp: &ChartPresentation) -> ChartPresentation {
    let mut gens = cp.generators.clone();
    let mut ledger = cp.ledger.clone();
    'outer: loop {
        for v in 0..cp.vars.len() {
            for (k, g) in gens.iter().enumerate() {
                let Some((c, rest)) = g.linear_part(v) else {
                    continue;
                };
                let h = rest.scale(&(-c.recip()));
                let binding = [(v, h.clone())];
                let next: Vec<Polynomial> = gens
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != k)
                    .map(|(_, p)| p.substitute(&binding))
                    .filter(|p| !p.is_zero())
                    .collect();
                ledger = ledger
                    .into_iter()
                    .map(|(w, d)| (w, d.substitute(&binding)))
                    .collect();
                ledger.push((v, &Polynomial::var(&cp.vars, v) - &h));
                gens = next;
                continue 'outer;
            }
        }
        break;
    }
    ChartPresentation {
        generators: gens,
        ledger,
        ..cp.clone()
    }
}

pub fn tjur_equals_tilde(strata: &StrataReport) -> bool {
    strata.tilde_equals_tjur
}

pub fn tjur_transpose_equals_tilde(strata: &StrataReport) -> bool {
    strata.transpose_tilde_equals_tjur
}

/// Local complete intersection tests for the Tjurina transform and its
/// transpose, evaluated from `(m, n, t, N)` and stratum dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CriterionReport {
    pub m: usize,
    pub n: usize,
    pub t: usize,
    pub ambient_dim: usize,
    pub dim_x: i64,
    pub dim_x1: i64,
    pub x2_nonempty: bool,
    /// `N - m(n-t+1)` and `N - n(m-t+1)`.
    pub bound_tjur: i64,
    pub bound_transpose: i64,
    pub by_n_tjur: bool,
    pub by_n_transpose: bool,
    pub by_t_tjur: bool,
    pub by_t_transpose: bool,
    pub by_codim_tjur: bool,
    pub by_codim_transpose: bool,
    pub tjur_lci: bool,
    pub transpose_lci: bool,
}

/// Assumes the caller has established that `X` is an EIDS.
pub fn lci_criteria(
    m: usize,
    n: usize,
    t: usize,
    ambient_dim: usize,
    dim_x1: i64,
    x2_nonempty: bool,
) -> CriterionReport {
    let (mi, ni, ti, big_n) = (m as i64, n as i64, t as i64, ambient_dim as i64);
    let dim_x = big_n - (mi - ti + 1) * (ni - ti + 1);
    let bound_tjur = big_n - mi * (ni - ti + 1);
    let bound_transpose = big_n - ni * (mi - ti + 1);
    let by_n_tjur = bound_tjur > dim_x1;
    let by_n_transpose = bound_transpose > dim_x1;
    let by_t = t >= 3 && x2_nonempty;
    let by_t_tjur = by_t && ni - 1 < mi * (ti - 2);
    let by_t_transpose = by_t && mi - 1 < ni * (ti - 2);
    let by_codim_tjur = t == 2 && ni <= dim_x - dim_x1;
    let by_codim_transpose = t == 2 && mi <= dim_x - dim_x1;
    CriterionReport {
        m,
        n,
        t,
        ambient_dim,
        dim_x,
        dim_x1,
        x2_nonempty,
        bound_tjur,
        bound_transpose,
        by_n_tjur,
        by_n_transpose,
        by_t_tjur,
        by_t_transpose,
        by_codim_tjur,
        by_codim_transpose,
        tjur_lci: t == 1 || by_n_tjur || by_t_tjur || by_codim_tjur,
        transpose_lci: t == 1 || by_n_transpose || by_t_transpose || by_codim_transpose,
    }
}

/// With `t = 1` the Grassmannian is a point and the transform is `X`.
pub fn tjur_identity_t1(p: &DetPresentation) -> Result<bool, TjurinaError> {
    if p.t() != 1 {
        return Err(TjurinaError::NeedsTOne(p.t()));
    }
    let chart = ChartIndex::row(&[])?;
    let cp = chart_presentation(p, &chart)?;
    let a = chart_matrix(&chart, 1, p.n())?;
    Ok(a.rows() == 0
        && cp.generators() == p.matrix().entries()
        && cp.vars().len() == p.ambient_dim())
}

/// The `t × t` minors of the stacked matrix, for cross-checks against the
/// closed formula.
pub fn stacked_minors(
    p: &DetPresentation,
    chart: &ChartIndex,
) -> Result<Vec<Polynomial>, TjurinaError> {
    let s = stacked_matrix(p, chart)?;
    Ok(minors(&s, p.t())?)
}

/// `chart_presentation` on the column side, through the transpose.
pub fn transpose_chart_presentation(
    p: &DetPresentation,
    one_based: &[usize],
) -> Result<ChartPresentation, TjurinaError> {
    chart_presentation(&transpose_presentation(p), &ChartIndex::row(one_based)?)
}
