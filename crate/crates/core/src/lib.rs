//! Numerical laboratory for the divergence-form curvature equation
//! div(Du/√(1+|Du|²)) = f(u) with zero Dirichlet data, on geodesic balls
//! of rotationally symmetric metrics and on 2-D star-shaped domains.
//!
//! The crate solves the radial and finite-element Dirichlet problems,
//! recovers the overdetermined boundary flux u_ν/w, and evaluates the
//! integral identities and inequalities that constrain such solutions:
//! the P-function minimum principle, a Heintze–Karcher–Ros bound, a
//! Soap-Bubble deficit, and a Pohozaev identity for closed conformal
//! vector fields — including their exact equality on spherical caps.

pub mod error;
pub mod fem;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod metric;
pub mod nonlinearity;
pub mod quadrature;
pub mod radial;

pub use error::{Error, Result};
pub use fem::{solve_fem, recover_boundary_flux, FemOptions, FemSolution};
pub use geometry::{boundary_trace, BoundaryTrace, Domain2D};
pub use mesh::{mesh_polar, read_mesh, refine, write_mesh, Mesh, ScalarField};
pub use metric::{ConformalField, MetricSpec, Warp};
pub use nonlinearity::Nonlinearity;
pub use radial::{cap_oracle, solve_radial, RadialOptions, RadialSolution};
