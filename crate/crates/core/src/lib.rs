//! Two-parameter singularly perturbed boundary value problems: asymptotic
//! decompositions, a layer-adapted reference solver and bound verification.

pub mod error;
pub mod expansion;
pub mod output;
pub mod polyexp;
pub mod problem;
pub mod quadrature;
pub mod refsolve;
pub mod series;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use polyexp::{PolyExp, PolyExpTerm};
pub use problem::{EnergyNorm, MuPair, Regime, RegimeKind, TwoParamProblem};
pub use series::{CoeffFn, PowerSeries};
