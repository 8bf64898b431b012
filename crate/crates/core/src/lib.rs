//! Exact symbolic toolkit for determinantal singularities and their
//! Tjurina transforms.

pub mod detvar;
pub mod format;
pub mod ideal;
pub mod linalg;
pub mod modellab;
pub mod poly;
pub mod resolve;
pub mod smooth;
pub mod tjurina;

pub use detvar::{DetError, DetPresentation, PolyMatrix, StrataReport};
pub use ideal::{GroebnerLimits, IdealBasis, IdealError, MonomialOrder};
pub use linalg::{LinalgError, QMatrix, QSubspace};
pub use poly::{parse_poly, Monomial, PolyError, Polynomial, Rational, VarSet};
pub use tjurina::{ChartIndex, ChartPresentation, CriterionReport, Side, TjurinaError};
