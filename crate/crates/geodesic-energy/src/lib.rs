//! Minimal geodesics in real coordinate space by discrete energy minimization.
//!
//! A Riemannian metric on `R^D` is given as a field of symmetric positive-definite
//! matrices `H(x)`. The energy of a curve is discretized with finite differences
//! and a one-point quadrature of the metric factor (midpoint or left endpoint),
//! and minimized over point sequences with constrained endpoints. Linear
//! interpolation of the minimizing sequence recovers a curve whose length
//! approaches the minimal length between the endpoint sets.
//!
//! The crate also ships the supporting machinery needed to study that scheme
//! quantitatively: high-order quadrature for reference energies and lengths,
//! a Runge–Kutta/shooting oracle for reference geodesics, a-priori constants
//! and error envelopes for the discrete optimum, and a CSV/JSON study driver
//! used by the `geodesic-energy` CLI.

pub mod bounds;
pub mod config;
pub mod curve;
pub mod energy;
pub mod error;
pub mod metric;
pub mod oracle;
pub mod quad;
pub mod sets;
pub mod solver;
pub mod study;

pub use bounds::TheoryConstants;
pub use config::ProblemConfig;
pub use curve::{LinearInterpolant, PointSequence};
pub use energy::{DiscreteObjective, Functional, QuadratureRule};
pub use error::Error;
pub use metric::{ChristoffelTensor, MetricField};
pub use sets::EndpointSet;
pub use solver::{SolveConfig, SolveReport};
