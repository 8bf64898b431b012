//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use tjurina_core::resolve::{parse_script, ResolutionScript};
use tjurina_core::{parse_poly, DetPresentation, PolyMatrix, Polynomial, VarSet};

pub const E7_SCRIPT: &str = include_str!("../../core/scripts/e7.rsc");

/// The 2x3 presentation with entries `w^k, y, x` over `z, w, y^l`.
pub fn f1(k: u32, l: u32) -> DetPresentation {
    let v = VarSet::new(["x", "y", "z", "w"]).unwrap();
    let a = format!("w^{k}");
    let b = format!("y^{l}");
    let m = PolyMatrix::parse(
        &v,
        &[vec![a.as_str(), "y", "x"], vec!["z", "w", b.as_str()]],
    )
    .unwrap();
    DetPresentation::new(m, 2, "F1").unwrap()
}

/// Generic 2x2 minors of a 2x4 matrix of distinct variables.
pub fn generic_minors() -> (Arc<VarSet>, Vec<Polynomial>) {
    let v = VarSet::new(["a", "b", "c", "d", "e", "f", "g", "h"]).unwrap();
    let src = [
        "a*f - b*e",
        "a*g - c*e",
        "a*h - d*e",
        "b*g - c*f",
        "b*h - d*f",
        "c*h - d*g",
    ];
    let gens = src.iter().map(|s| parse_poly(s, &v).unwrap()).collect();
    (v, gens)
}

pub fn e7() -> ResolutionScript {
    parse_script(E7_SCRIPT).unwrap()
}
