//! Exact median geometry for finite CAT(0) cube complexes and right-angled
//! Artin groups, with a seeded random-walk laboratory on top.

mod bits;
pub mod family;
pub mod harness;
pub mod median;
pub mod raag;
pub mod report;
pub mod walk;
pub mod wallgeom;

pub use family::{generate_family, FamilySpec};
pub use median::{build_complex, ComplexError, FiniteMedianComplex, Halfspace, Vertex, Wall};
pub use report::VerificationReport;
