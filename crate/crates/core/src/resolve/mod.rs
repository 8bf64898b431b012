//! Chart pipelines, renamings and exceptional divisor incidences, plus the
//! script runner that chains them into a resolution.

mod script;

use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::detvar::{DetError, DetPresentation};
use crate::format::FormatError;
use crate::ideal::{
    groebner_basis, ideal_dimension, is_trivial, rational_points, saturate, GroebnerLimits,
    IdealError, MonomialOrder,
};
use crate::poly::{parse_poly, PolyError, Polynomial, Rational, VarSet};
use crate::smooth::{is_smooth_point, smoothness_report, SmoothnessReport};
use crate::tjurina::{
    chart_presentation, eliminate_linear, ChartIndex, ChartPresentation, TjurinaError,
};

pub use script::{
    parse_script, parse_script_file, run_script, ChartReport, ContinuationCheck, DetCheck, Failure,
    GraphEdge, IncidenceReport, ResolutionScript, ScriptReport, StepReport,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResolveError {
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Tjurina(#[from] TjurinaError),
    #[error(transparent)]
    Det(#[from] DetError),
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformOptions {
    pub eliminate: bool,
    /// Expression over the variables left after elimination.
    pub saturate_by: Option<String>,
    pub smoothness: bool,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            eliminate: true,
            saturate_by: None,
            smoothness: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformReport {
    pub chart: ChartPresentation,
    /// Variables not eliminated.
    pub reduced_vars: Arc<VarSet>,
    /// Final generators over `reduced_vars`.
    pub generators: Vec<Polynomial>,
    pub saturated_by: Option<Polynomial>,
    pub smoothness: Option<SmoothnessReport>,
}

/// The chart's generators over the variables that survived elimination.
pub fn reduced_space(
    cp: &ChartPresentation,
) -> Result<(Arc<VarSet>, Vec<Polynomial>), ResolveError> {
    let vars = cp.vars().subset(&cp.free_vars());
    let gens = cp
        .generators()
        .iter()
        .map(|g| g.embed(&vars))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((vars, gens))
}

/// chart presentation → elimination → saturation → Jacobian report.
pub fn run_transform(
    p: &DetPresentation,
    chart: &ChartIndex,
    opts: &TransformOptions,
    limits: &GroebnerLimits,
) -> Result<TransformReport, ResolveError> {
    let mut cp = chart_presentation(p, chart)?;
    if opts.eliminate {
        cp = eliminate_linear(&cp);
    }
    let (reduced_vars, mut generators) = reduced_space(&cp)?;
    let mut saturated_by = None;
    if let Some(expr) = &opts.saturate_by {
        let f = parse_poly(expr, &reduced_vars)?;
        generators = saturate(&reduced_vars, &generators, &f, limits)?;
        saturated_by = Some(f);
    }
    let smoothness = if opts.smoothness {
        Some(smoothness_report(&reduced_vars, &generators, limits)?)
    } else {
        None
    };
    Ok(TransformReport {
        chart: cp,
        reduced_vars,
        generators,
        saturated_by,
        smoothness,
    })
}

/// A simultaneous signed renaming `old ↦ ±new` of a variable set.
#[derive(Debug, Clone, PartialEq)]
pub struct Renaming {
    pub target: Arc<VarSet>,
    /// For each old variable: its index in `target` and whether it is negated.
    pub images: Vec<(usize, bool)>,
}

impl Renaming {
    /// `pairs` are `(old, new, negate)`; unmentioned variables keep their
    /// names.
    pub fn new(vars: &Arc<VarSet>, pairs: &[(String, String, bool)]) -> Result<Self, ResolveError> {
        let mut names: Vec<String> = vars.names().to_vec();
        let mut neg = vec![false; vars.len()];
        let mut seen = Vec::new();
        for (old, new, negate) in pairs {
            let Some(i) = vars.index_of(old) else {
                return Err(ResolveError::Invalid(format!(
                    "cannot rename unknown variable `{old}`"
                )));
            };
            if seen.contains(&i) {
                return Err(ResolveError::Invalid(format!(
                    "variable `{old}` renamed twice"
                )));
            }
            seen.push(i);
            names[i] = new.clone();
            neg[i] = *negate;
        }
        let target = VarSet::new(names.clone())
            .map_err(|e| ResolveError::Invalid(format!("renaming produces clashing names: {e}")))?;
        Ok(Renaming {
            images: (0..vars.len()).map(|i| (i, neg[i])).collect(),
            target,
        })
    }

    /// Like [`Renaming::new`], but variables in `movable` whose names clash
    /// with a new name get `_` suffixes instead of causing an error. Used to
    /// keep eliminated coordinates out of the way.
    pub fn displacing(
        vars: &Arc<VarSet>,
        pairs: &[(String, String, bool)],
        movable: &[usize],
    ) -> Result<Self, ResolveError> {
        let mut pairs = pairs.to_vec();
        let mut taken: Vec<String> = vars.names().to_vec();
        for (old, new, _) in &pairs {
            if let Some(i) = vars.index_of(old) {
                taken[i] = new.clone();
            }
        }
        for &i in movable {
            let name = vars.name(i);
            if pairs.iter().any(|(old, _, _)| old == name) {
                continue;
            }
            if taken.iter().enumerate().any(|(j, n)| j != i && n == name) {
                let mut fresh = format!("{name}_");
                while taken.contains(&fresh) {
                    fresh.push('_');
                }
                taken[i] = fresh.clone();
                pairs.push((name.to_string(), fresh, false));
            }
        }
        Self::new(vars, &pairs)
    }

    pub fn identity(vars: &Arc<VarSet>) -> Self {
        Renaming {
            target: vars.clone(),
            images: (0..vars.len()).map(|i| (i, false)).collect(),
        }
    }

    pub fn apply(&self, p: &Polynomial) -> Polynomial {
        let images: Vec<Polynomial> = self
            .images
            .iter()
            .map(|&(j, negate)| {
                let v = Polynomial::var(&self.target, j);
                if negate {
                    -v
                } else {
                    v
                }
            })
            .collect();
        p.map_vars(&self.target, &images)
    }

    /// Coordinates of a target-space point in the source space.
    pub fn pull_back(&self, point: &[Rational]) -> Vec<Rational> {
        self.images
            .iter()
            .map(|&(j, negate)| {
                if negate {
                    -point[j].clone()
                } else {
                    point[j].clone()
                }
            })
            .collect()
    }
}

/// A named exceptional curve given by generators over a chart space.
#[derive(Debug, Clone, PartialEq)]
pub struct Divisor {
    pub name: String,
    pub generators: Vec<Polynomial>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeetPoint {
    pub coords: Vec<Rational>,
    pub smooth: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Meeting {
    Disjoint,
    /// Zero-dimensional intersection; `complete` is false if some points
    /// are irrational.
    Points {
        points: Vec<MeetPoint>,
        complete: bool,
    },
    Positive {
        dim: i64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Incidence {
    pub a: String,
    pub b: String,
    pub meeting: Meeting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeetKind {
    Disjoint,
    Smooth,
    Singular,
    Curve,
}

impl Meeting {
    /// Summary used against script expectations; `None` when the points
    /// are a mix of smooth and singular.
    pub fn kind(&self) -> Option<MeetKind> {
        match self {
            Meeting::Disjoint => Some(MeetKind::Disjoint),
            Meeting::Positive { .. } => Some(MeetKind::Curve),
            Meeting::Points { points, .. } => {
                if points.iter().all(|p| p.smooth) && !points.is_empty() {
                    Some(MeetKind::Smooth)
                } else if points.iter().all(|p| !p.smooth) && !points.is_empty() {
                    Some(MeetKind::Singular)
                } else {
                    None
                }
            }
        }
    }
}

/// Pairwise intersections of divisors on `V(chart)`, each point classified
/// as a smooth or singular point of the chart variety.
pub fn divisor_incidence(
    vars: &Arc<VarSet>,
    chart: &[Polynomial],
    divisors: &[Divisor],
    limits: &GroebnerLimits,
) -> Result<Vec<Incidence>, ResolveError> {
    for (i, d) in divisors.iter().enumerate() {
        if divisors[..i].iter().any(|e| e.name == d.name) {
            return Err(ResolveError::Invalid(format!(
                "divisor `{}` declared twice",
                d.name
            )));
        }
        let mut gens = chart.to_vec();
        gens.extend(d.generators.iter().cloned());
        if is_trivial(&groebner_basis(
            vars,
            &gens,
            &MonomialOrder::GrevLex,
            limits,
        )?) {
            return Err(ResolveError::Invalid(format!(
                "divisor `{}` does not meet this chart",
                d.name
            )));
        }
    }
    let cb = groebner_basis(vars, chart, &MonomialOrder::GrevLex, limits)?;
    let codim = (vars.len() as i64 - ideal_dimension(&cb)) as usize;
    let mut out = Vec::new();
    for i in 0..divisors.len() {
        for j in i + 1..divisors.len() {
            out.push(pair_incidence(
                vars,
                chart,
                codim,
                &divisors[i],
                &divisors[j],
                limits,
            )?);
        }
    }
    Ok(out)
}

/// Intersection of two distinct divisors on a chart of codimension `codim`.
pub fn pair_incidence(
    vars: &Arc<VarSet>,
    chart: &[Polynomial],
    codim: usize,
    a: &Divisor,
    b: &Divisor,
    limits: &GroebnerLimits,
) -> Result<Incidence, ResolveError> {
    if a.name == b.name {
        return Err(ResolveError::Invalid(format!(
            "divisor `{}` paired with itself",
            a.name
        )));
    }
    let mut gens = chart.to_vec();
    gens.extend(a.generators.iter().cloned());
    gens.extend(b.generators.iter().cloned());
    let gb = groebner_basis(vars, &gens, &MonomialOrder::GrevLex, limits)?;
    let meeting = if is_trivial(&gb) {
        Meeting::Disjoint
    } else {
        let dim = ideal_dimension(&gb);
        if dim > 0 {
            Meeting::Positive { dim }
        } else {
            let sol = rational_points(vars, gb.generators(), limits)?;
            let points = sol
                .points
                .into_iter()
                .map(|c| MeetPoint {
                    smooth: is_smooth_point(vars, chart, codim, &c),
                    coords: c,
                })
                .collect();
            Meeting::Points {
                points,
                complete: sol.complete,
            }
        }
    };
    Ok(Incidence {
        a: a.name.clone(),
        b: b.name.clone(),
        meeting,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detvar::PolyMatrix;
    use crate::poly::rat;

    fn pres(names: &[&str], rows: &[&[&str]], t: usize) -> DetPresentation {
        let v = VarSet::new(names.iter().copied()).unwrap();
        let rows: Vec<Vec<&str>> = rows.iter().map(|r| r.to_vec()).collect();
        DetPresentation::new(PolyMatrix::parse(&v, &rows).unwrap(), t, "").unwrap()
    }

    #[test]
    fn t_one_transform_is_identity() {
        let p = pres(&["x", "y", "z"], &[&["x*y - z^5"]], 1);
        let opts = TransformOptions {
            eliminate: false,
            ..Default::default()
        };
        let r = run_transform(
            &p,
            &ChartIndex::row(&[]).unwrap(),
            &opts,
            &GroebnerLimits::default(),
        )
        .unwrap();
        assert_eq!(r.generators, p.matrix().entries().to_vec());
    }

    #[test]
    fn signed_renaming() {
        let v = VarSet::new(["x", "z", "w", "a2"]).unwrap();
        let r = Renaming::new(
            &v,
            &[
                ("a2".into(), "y".into(), false),
                ("z".into(), "z".into(), true),
            ],
        )
        .unwrap();
        let p = parse_poly("a2*z - w*z - a2*w", &v).unwrap();
        assert_eq!(
            r.apply(&p),
            parse_poly("-(y*z + y*w - w*z)", &r.target).unwrap()
        );
        assert_eq!(
            r.pull_back(&[rat(1), rat(2), rat(3), rat(4)]),
            vec![rat(1), rat(-2), rat(3), rat(4)]
        );
        assert!(Renaming::new(&v, &[("a2".into(), "x".into(), false)]).is_err());
        assert!(Renaming::new(&v, &[("q".into(), "y".into(), false)]).is_err());
    }

    #[test]
    fn incidence_on_the_second_surface() {
        let v = VarSet::new(["x", "z", "w", "y"]).unwrap();
        let chart = vec![
            parse_poly("z^2 + y*w^2 + y^2*z", &v).unwrap(),
            parse_poly("x + w^2 + y*z", &v).unwrap(),
        ];
        let d = |name: &str, gens: &[&str]| Divisor {
            name: name.into(),
            generators: gens.iter().map(|g| parse_poly(g, &v).unwrap()).collect(),
        };
        let divs = vec![d("E1", &["z", "y"]), d("E2", &["x", "w"])];
        let inc = divisor_incidence(&v, &chart, &divs, &GroebnerLimits::default()).unwrap();
        assert_eq!(inc.len(), 1);
        assert_eq!(inc[0].meeting.kind(), Some(MeetKind::Singular));
        let Meeting::Points { points, complete } = &inc[0].meeting else {
            panic!()
        };
        assert!(complete);
        assert_eq!(points[0].coords, vec![rat(0); 4]);

        let dup = vec![d("E1", &["z", "y"]), d("E1", &["x", "w"])];
        assert!(divisor_incidence(&v, &chart, &dup, &GroebnerLimits::default()).is_err());
        let empty = vec![d("E9", &["x - 1", "z", "w"])];
        assert!(divisor_incidence(&v, &chart, &empty, &GroebnerLimits::default()).is_err());
        assert!(pair_incidence(
            &v,
            &chart,
            2,
            &divs[0],
            &divs[0],
            &GroebnerLimits::default()
        )
        .is_err());
    }
}
