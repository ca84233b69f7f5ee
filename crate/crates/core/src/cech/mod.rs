//! Finite covers, group-valued Čech cochains, Z/2 cohomology of nerves, the
//! spin obstruction of SO(3) transition data, section gluing and the
//! pre-Hilbert product.
//!
//! Simplices are sorted element lists. A 1-cochain stores `q_αβ` for `α < β`
//! and reads `q_βα = q_αβ⁻¹`.

mod cochain;
mod cohomology;
mod cover;
mod gf2;
mod glue;
mod group;
mod io;
mod spin;

pub use cochain::{coboundary, coboundary_matrix, cocycle_defect, cocycle_of_chain, Cochain};
pub use cohomology::{z2_cohomology, CohomologyReport};
pub use cover::{circle_cover, disk_cover, faces, sphere4, torus7, Cover, Simplex, MAX_DEGREE};
pub use gf2::Gf2Matrix;
pub use glue::{
    glue_sections, pre_hilbert_product, sections_from_seed, GluedSection, Incompatibility, LocalSections, PreHilbert,
    GLUE_TOL, PARTITION_TOL,
};
pub use group::{Element, Group, MEMBERSHIP_TOL};
pub use io::{parse_cover, CoverDocument};
pub use spin::{
    angle_chain, canonical_sign, h1_pair, klein_chain, lift_rotation, rotation_of, spin_obstruction,
    spin_obstruction_with_flips, z_rotation, SpinObstruction, COCYCLE_TOL,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CechError {
    #[error("invalid cover: {0}")]
    Cover(String),
    #[error("nerve is not downward closed: {simplex:?} lacks face {face:?}")]
    Incomplete { simplex: Simplex, face: Simplex },
    #[error("group error: {0}")]
    Group(String),
    #[error("matrix is not orthogonal (deviation {deviation:e})")]
    NotOrthogonal { deviation: f64 },
    #[error("missing cochain value on {0:?}")]
    Missing(Simplex),
    #[error("expected a {expected}-cochain, got degree {found}")]
    Degree { expected: usize, found: usize },
    #[error("coboundary needs an abelian group, got {0}")]
    NonAbelian(String),
    #[error("transition data is not a cocycle on {simplex:?} (deviation {deviation:e})")]
    NotCocycle { simplex: Simplex, deviation: f64 },
    #[error("partition of unity: {0}")]
    Partition(String),
    #[error("cover file: {0}")]
    Format(String),
}
