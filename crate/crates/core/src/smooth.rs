//! Jacobian criterion.

use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use crate::detvar::{minors, PolyMatrix};
use crate::ideal::{
    groebner_basis, ideal_dimension, is_trivial, rational_points, GroebnerLimits, IdealError,
    MonomialOrder,
};
use crate::poly::{Polynomial, Rational, VarSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    /// `V(gens)` is empty.
    Empty,
    Smooth,
    /// Zero-dimensional singular locus. `complete` is false when some
    /// singular points are not rational.
    SingularAt {
        #[serde(serialize_with = "ser_points")]
        points: Vec<Vec<Rational>>,
        complete: bool,
    },
    SingularPositiveDim {
        dim: i64,
    },
}

fn ser_points<S: serde::Serializer>(pts: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
    let text: Vec<Vec<String>> = pts
        .iter()
        .map(|p| p.iter().map(ToString::to_string).collect())
        .collect();
    serde::Serialize::serialize(&text, s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothnessReport {
    pub verdict: Verdict,
    pub dim: i64,
    pub codim: i64,
    /// Dimension of `V(gens + c×c Jacobian minors)`; `-1` when smooth.
    pub singular_dim: i64,
    /// Smooth: the Jacobian ideal's reduced basis is `{1}`. Isolated
    /// singular points: each one was checked against every generator of
    /// the Jacobian ideal.
    pub certified: bool,
}

impl SmoothnessReport {
    pub fn is_smooth(&self) -> bool {
        matches!(self.verdict, Verdict::Smooth | Verdict::Empty)
    }
}

pub fn jacobian(vars: &Arc<VarSet>, gens: &[Polynomial]) -> PolyMatrix {
    let entries: Vec<Polynomial> = gens
        .iter()
        .flat_map(|g| (0..vars.len()).map(move |v| g.partial_derivative(v)))
        .collect();
    PolyMatrix::new(vars, gens.len(), vars.len(), entries).expect("jacobian shape")
}

/// Generators of the singular locus ideal for a variety of codimension `c`.
pub fn singular_locus_ideal(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    codim: usize,
) -> Vec<Polynomial> {
    let mut out = gens.to_vec();
    if codim > 0 && codim <= gens.len().min(vars.len()) {
        out.extend(
            minors(&jacobian(vars, gens), codim)
                .expect("codim in range")
                .into_iter()
                .filter(|p| !p.is_zero()),
        );
    }
    out
}

/// Uses the global codimension, so points on components of smaller
/// dimension are reported as singular.
pub fn smoothness_report(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    limits: &GroebnerLimits,
) -> Result<SmoothnessReport, IdealError> {
    let gb = groebner_basis(vars, gens, &MonomialOrder::GrevLex, limits)?;
    if is_trivial(&gb) {
        return Ok(SmoothnessReport {
            verdict: Verdict::Empty,
            dim: -1,
            codim: vars.len() as i64 + 1,
            singular_dim: -1,
            certified: true,
        });
    }
    let dim = ideal_dimension(&gb);
    let codim = vars.len() as i64 - dim;
    let nonzero: Vec<Polynomial> = gens.iter().filter(|g| !g.is_zero()).cloned().collect();
    if codim == 0 {
        return Ok(SmoothnessReport {
            verdict: Verdict::Smooth,
            dim,
            codim,
            singular_dim: -1,
            certified: true,
        });
    }
    let sing = singular_locus_ideal(vars, &nonzero, codim as usize);
    let jb = groebner_basis(vars, &sing, &MonomialOrder::GrevLex, limits)?;
    if is_trivial(&jb) {
        return Ok(SmoothnessReport {
            verdict: Verdict::Smooth,
            dim,
            codim,
            singular_dim: -1,
            certified: true,
        });
    }
    let singular_dim = ideal_dimension(&jb);
    let (verdict, certified) = if singular_dim == 0 {
        let sol = rational_points(vars, jb.generators(), limits)?;
        let ok = !sol.points.is_empty()
            && sol
                .points
                .iter()
                .all(|p| sing.iter().all(|g| g.evaluate(p).is_zero()));
        (
            Verdict::SingularAt {
                points: sol.points,
                complete: sol.complete,
            },
            ok,
        )
    } else {
        (Verdict::SingularPositiveDim { dim: singular_dim }, false)
    };
    Ok(SmoothnessReport {
        verdict,
        dim,
        codim,
        singular_dim,
        certified,
    })
}

/// Whether `point` is a smooth point of `V(gens)` of codimension `codim`:
/// it lies on the variety and the Jacobian there has rank `codim`.
pub fn is_smooth_point(
    vars: &Arc<VarSet>,
    gens: &[Polynomial],
    codim: usize,
    point: &[Rational],
) -> bool {
    gens.iter().all(|g| g.evaluate(point).is_zero())
        && jacobian(vars, gens).evaluate(point).rank() == codim
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_poly, rat};

    fn run(names: &[&str], gens: &[&str]) -> SmoothnessReport {
        let v = VarSet::new(names.iter().copied()).unwrap();
        let g: Vec<Polynomial> = gens.iter().map(|s| parse_poly(s, &v).unwrap()).collect();
        smoothness_report(&v, &g, &GroebnerLimits::default()).unwrap()
    }

    #[test]
    fn smooth_surface() {
        assert_eq!(
            run(&["x", "y", "v"], &["x + y + v^2*x*y"]).verdict,
            Verdict::Smooth
        );
        assert_eq!(run(&["x", "y", "z"], &["x"]).verdict, Verdict::Smooth);
    }

    #[test]
    fn isolated_singularity() {
        let r = run(&["x", "z", "w"], &["x^2 + z^3 + w^2*x"]);
        assert_eq!(
            r.verdict,
            Verdict::SingularAt {
                points: vec![vec![rat(0), rat(0), rat(0)]],
                complete: true
            }
        );
        assert!(r.certified);
    }

    #[test]
    fn empty_and_positive_dimensional() {
        assert_eq!(run(&["x"], &["1"]).verdict, Verdict::Empty);
        assert_eq!(
            run(&["x", "y", "z"], &["x*y"]).verdict,
            Verdict::SingularPositiveDim { dim: 1 }
        );
    }

    #[test]
    fn point_test() {
        let v = VarSet::new(["x", "y"]).unwrap();
        let g = vec![parse_poly("y^2 - x^3", &v).unwrap()];
        assert!(!is_smooth_point(&v, &g, 1, &[rat(0), rat(0)]));
        assert!(is_smooth_point(&v, &g, 1, &[rat(1), rat(1)]));
        assert!(!is_smooth_point(&v, &g, 1, &[rat(1), rat(2)]));
    }
}
