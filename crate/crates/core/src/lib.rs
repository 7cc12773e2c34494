//! Proximal point algorithm on spheres with the `tan d sin d` resolvent,
//! CAT(kappa) rescaling, and brute-force oracles to check it against.

pub mod diagnostics;
pub mod error;
pub mod functionals;
pub mod geometry;
pub mod oracle;
pub mod ppa;
pub mod resolvent;
pub mod sampling;

pub use error::{Error, Result};
pub use functionals::{ConvexFunctional, FunctionalKind, PenaltyKernel};
pub use geometry::{ModelSpace, SpherePoint};
pub use ppa::{run_ppa, PpaTrace, RunConfig, StepSchedule, StopReason};
pub use resolvent::{resolve, InnerMethod, InnerSolverConfig, ResolventResult};
