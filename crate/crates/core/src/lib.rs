//! Numeric differential-geometry engine for parametrized submanifolds of
//! flat Kahler space R^2m.
//!
//! The crate evaluates immersion charts with second-order jets, builds the
//! induced metric, frames, Christoffel symbols, and second fundamental form
//! per point, decomposes the tangent space into holomorphic / totally real /
//! pointwise slant distributions through the spectrum of the tangential part
//! of the complex structure, recovers warping functions of biwarped product
//! charts, and audits the connection, shape-operator, and curvature-bound
//! identities that hold on such submanifolds.

pub mod ambient;
pub mod audit;
pub mod catalog;
pub mod error;
pub mod expr;
pub mod grid;
pub mod immersion;
pub mod jet;
pub mod linalg;
pub mod slant;
pub mod tol;
pub mod warped;

pub use ambient::AmbientSpace;
pub use error::{GeomError, Result};
pub use expr::{parse_expression, Expr, ParseError};
pub use immersion::{ImmersionChart, ParamSpec, PointGeometry};
pub use jet::{evaluate_jet2, Jet2};
pub use linalg::{orthonormalize, sym_eigen, Basis, Inner, SymMatrix};
pub use slant::{SlantSplit, TangentialOperator};
pub use tol::Tolerances;
pub use warped::{BlockStructure, WarpedProductSpec};
