//! Numerical toolkit for mass comparison on toric ALE/ALF 4-manifolds:
//! rod data, explicit instanton families, the hyperbolic-plane reduction,
//! flux masses, conical angle defects, a harmonic-map relaxation solver,
//! and the assembled comparison inequality.

pub mod compare;
pub mod defects;
pub mod error;
pub mod families;
pub mod geometry;
pub mod linalg;
pub mod mass;
pub mod quad;
pub mod rod;
pub mod solver;

pub use error::{Error, Result};
pub use families::{AsymptoticClass, BrillField, BrillSample, ClassKind, FamilyParams};
pub use linalg::{Mat2, Sym2};
pub use rod::{corner_admissible, validate_rod_data, CrossSection, RodDataSet, RodStructure};

/// Worker-count cap honored by the parallel engines (env IML_THREADS).
pub fn worker_threads() -> usize {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("IML_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n > 0).map_or(avail, |n| n.min(avail)),
        Err(_) => avail,
    }
}
