//! Decides whether a smooth dynamical system admits a coarser deterministic
//! level of description.
//!
//! The toolkit combines a small symbolic expression kernel with numerical
//! verification: Lie brackets and symmetry checks, closure and invariance
//! conditions for candidate fibrations, the fully solved linear case,
//! trajectory-level commuting-diagram verification, and numerical quotient
//! map construction by canonicalization onto a cross-section.

pub mod checks;
pub mod error;
pub mod expr;
pub mod field;
pub mod flow;
pub mod linear;
pub mod quotient;
pub mod sample;

pub use checks::{CheckReport, Method, ProjectionClass, Verdict};
pub use error::{Error, Result};
pub use expr::{is_zero, is_zero_with, parse, Coords, ScalarExpr, ZeroVerdict};
pub use field::{Guard, GuardRel, LieBasis, ProjectionMap, ProlongedField, VectorField};
pub use flow::{IntegrationMethod, IntegratorConfig, Trajectory};
pub use linear::{LinearProjection, LinearReduction, LinearSystem, StructureConstants};
pub use quotient::CrossSection;
pub use sample::{DomainBox, HaltonSampler};
