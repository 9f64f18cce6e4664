//! Numerical checks for the existence of multivariable limits.
//!
//! * [`expr`] parses and evaluates the function; undefined evaluations mark
//!   points outside its domain.
//! * [`geometry`] maps between Cartesian points and polar/hyperspherical
//!   offsets around the center.
//! * [`paths`] defines approach paths (rays, power curves `y = c x^(m/n)`,
//!   spirals, certified polylines).
//! * [`construction`] searches for points violating a candidate limit on
//!   halving radii and extracts convergent-angle subsequences.
//! * [`analyzer`] combines path probes and refutation into a verdict.
//! * [`witness`] reads and writes the witness files.

pub mod analyzer;
pub mod construction;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod paths;
pub mod witness;

pub use analyzer::{analyze, path_limit, refute, AnalyzerConfig, ProbeResult, ProbeStatus, Verdict, VerdictKind};
pub use construction::{bisect_angles, bw_subsequence, AngleInterval, BisectionWitness, PolarSample, ViolationOutcome, ViolationSearch};
pub use error::{Error, ParseError};
pub use expr::{EvalResult, Expression};
pub use geometry::{Center, PolarOffset};
pub use paths::{check_descent, point_at, polyline_from_witness, DescentCertificate, PathSpec};
