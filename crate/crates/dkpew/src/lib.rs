//! Toolkit for the dispersionless-KP / Einstein--Weyl / hyper-Kahler
//! correspondence.
//!
//! The crate is organized around a single scalar field `u(x, y, t)` subject to
//! the dispersionless KP equation
//!
//! ```text
//! (u_t - u u_x)_x = u_yy
//! ```
//!
//! and the geometric structures it induces:
//!
//! * [`solutions`] -- exact solution families evaluated as truncated Taylor
//!   jets, plus the hodograph solver for the y-independent reduction.
//! * [`transforms`] -- point symmetries of the equation (Galilean boosts and
//!   conformal reparametrizations of time) acting on solution specs.
//! * [`weyl_geometry`] -- the induced three-dimensional Weyl structure
//!   `(h, nu)`, its curvature, conformal-Einstein residual, distinguished
//!   scalar, symmetry checks, and Weyl geodesics.
//! * [`lax`] -- the spectral-parameter Lax pair on `(x, y, t, lambda)` and its
//!   four-dimensional lift to `(x, y, t, z)`.
//! * [`hyperkahler`] -- the lifted metric, its null tetrad and self-dual
//!   two-forms, the abelian monopole data, and the Killing-vector reduction
//!   back to three dimensions.
//! * [`minitwistor`] -- line-incidence utilities: contact form, simplicity
//!   obstructions, Laurent-series Darboux coordinates, and intersection of
//!   twistor lines with causal classification.
//! * [`evolve`] -- a pseudo-spectral time stepper for the evolutionary form
//!   `u_t = u u_x + dx^{-1} u_yy` on a doubly periodic grid.
//!
//! Shared numerical infrastructure lives in [`jet`] (truncated trivariate
//! Taylor arithmetic), [`poly`] (univariate polynomials), [`fd`] (fourth-order
//! finite-difference stencils), [`geometry`] (generic Levi-Civita curvature
//! from a metric closure), and [`report`] (residual tables).

pub mod error;
pub mod fd;
pub mod geometry;
pub mod jet;
pub mod poly;
pub mod report;

pub mod evolve;
pub mod hyperkahler;
pub mod lax;
pub mod minitwistor;
pub mod solutions;
pub mod transforms;
pub mod weyl_geometry;

pub use error::{Error, Result};
pub use jet::Jet3;
pub use poly::Poly1;
pub use solutions::{Family, JetPoint, SolutionSpec};
