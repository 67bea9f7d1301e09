//! Sensitivity functions `ξ_s(x)`, the similarity law
//! `ξ_s(λx) = γ(λ,s)·ξ_η(λ,s)(x)` and its special cases, translational
//! maps, representations, psychometric families and fitting.

pub mod cli;
pub mod config;
pub mod curve;
pub mod error;
pub mod eta;
pub mod families;
pub mod fitting;
pub mod grid;
pub mod laws;
pub mod lundberg;
pub mod report;
pub mod representations;
pub mod scales;
pub mod table2d;

pub use config::RunConfig;
pub use curve::Curve;
pub use error::{Error, Result};
pub use eta::{EtaMap, GammaMap};
pub use families::{make_family, FamilyKind, SensitivityFamily};
pub use fitting::{FitResult, SampleSet};
pub use grid::Grid;
pub use laws::{classify_laws, iverson_residual, Classification, LawLabel};
pub use report::ResidualReport;
pub use representations::{make_psychometric, PsychometricFamily, Representation};
pub use scales::{Interval, Knots, ScaleFunction};
pub use table2d::Table2d;
