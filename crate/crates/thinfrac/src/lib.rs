//! Numerical laboratory for a thin (fractional) two-phase free boundary
//! problem in the extension formulation: the weighted energy
//! `J(u) = int |y|^a |grad u|^2 + int_{y=0} lambda^+ X{u>0} + lambda^- X{u<0}`
//! with `a = 1 - 2s`, its discrete minimizers, the closed-form comparison
//! barriers, and quantitative free-boundary diagnostics (growth exponents,
//! nondegeneracy, phase separation, flatness decay).

pub mod barriers;
pub mod energy;
pub mod error;
pub mod fb;
pub mod field;
pub mod grid;
pub mod minimize;
pub mod operator;
pub mod params;
pub mod profiles;
pub mod report;

pub use error::{Error, Result};
pub use field::ScalarField;
pub use grid::{GridSpec, Region};
pub use params::ProblemParams;
pub use report::{AnalysisReport, Verdict};
