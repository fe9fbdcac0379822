//! Computational harmonic analysis on finite weighted point clouds.
//!
//! A [`space::Space`] is a point cloud with a quasi-distance and a nested
//! chain of levels, each carrying an enlargement radius and its own
//! quasi-triangle and doubling constants; balls, averages and oscillations
//! are only ever formed where those constants are declared to hold. On top
//! of that sit the classical constructions of local harmonic analysis:
//!
//! - [`axioms`]: measured verification of the declared structure;
//! - [`covering`]: Vitali selection and finite ball covers of a level;
//! - [`dyadic`]: Christ-style dyadic cube forests with measured geometry;
//! - [`maximal`]: localized Hardy-Littlewood maximal operators with
//!   weak- and strong-type checks;
//! - [`sharp`]: dyadic and ball sharp (oscillation) maximal functions;
//! - [`cz`]: Calderon-Zygmund stopping-time families over a forest;
//! - [`fs`]: Fefferman-Stein style comparisons of maximal and sharp norms;
//! - [`bmo`]: BMO seminorms, the John-Nirenberg iterative construction and
//!   its exponential-decay verifier.
//!
//! Every verifier returns a serializable report whose measured constants
//! and pass flags make the inequality it checks auditable after the fact.

pub mod axioms;
pub mod bmo;
pub mod builtin;
pub mod covering;
pub mod cz;
pub mod dyadic;
pub mod error;
pub mod fs;
pub mod functions;
pub mod io;
pub mod maximal;
pub mod num;
pub mod set;
pub mod sharp;
pub mod space;

pub use error::{Error, Result};
pub use set::{PointId, PointSet};
pub use space::{Level, LocalStructure, PointCloud, Rho, SampledFunction, Space};
