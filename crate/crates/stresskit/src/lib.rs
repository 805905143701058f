//! Self-stressability analysis for multidimensional trivalent tensegrities.
//!
//! A *d-framework* is a collection of (d−1)-dimensional planes (edges) and
//! d-dimensional planes (faces) in `R^D`, together with incidences and a unit
//! normal per incidence. A *self-stress* assigns a scalar to each face so that
//! the weighted normals cancel along every edge. This crate decides whether a
//! nonzero self-stress exists by four interchangeable routes:
//!
//! * direct nullspace of the equilibrium system ([`framework`]),
//! * stress monodromy along face-cycles ([`paths`]),
//! * HF-surgery reduction to length-3 cycles with Cayley-algebra
//!   incidence conditions ([`surgery`]),
//! * exactness of a discrete multiplicative 1-form on the dual graph
//!   ([`oneform`]).
//!
//! The [`rframework`] module adds realizations of regular CW complexes
//! (R-frameworks), liftings, spherical vertex links, and the prism-chain
//! construction of a framework that is locally but not globally stressable.
//! [`catalog`] holds deterministic builders for the worked examples used as
//! regression oracles, and [`io`] the file formats consumed by the CLI.

pub mod affine;
pub mod catalog;
pub mod check;
pub mod error;
pub mod framework;
pub mod io;
pub mod oneform;
pub mod paths;
pub mod random;
pub mod rframework;
pub mod surgery;
pub mod tol;

pub(crate) mod numeric;

pub use affine::AffineSubspace;
pub use error::{Error, Result};
pub use framework::{DFramework, EdgeId, FaceId, Stress, StressSpace};
pub use paths::FacePath;
pub use tol::Tolerances;
