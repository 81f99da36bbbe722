//! Embedded finite simplicial complexes in R^2 and R^3.

mod complex;
mod hull;
mod linalg;
mod locate;
mod lp;
mod point;
mod simplex;
mod subdivide;

pub(crate) use complex::simplex_key;
pub use complex::{
    intersect_properly, validate_complex, Incidence, SimplexId, SimplicialComplex, SubComplex,
    ValidationReport, Violation,
};
pub use hull::{distance_to_hull, min_norm_hull, project_origin, HullProjection};
pub use locate::{locate_point_in_complex, LocatedPoint, PointLocator};
pub use point::{Point, Vector, MAX_DIM};
pub use simplex::{
    barycentric, faces_of, geometric_independence, locate_in_simplex, orientation, volume,
    BarycentricCoords, Face, Location, Simplex, VertexId,
};
pub use subdivide::{subdivide_uniform, Subdivision};

/// Relative tolerance of rank decisions.
pub const RANK_REL_TOL: f64 = 1e-10;
/// Allowed reconstruction error of barycentric coordinates.
pub const BARY_RECON_TOL: f64 = 1e-9;
/// Barycentric coordinates above this count as strictly positive.
pub const INTERIOR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("dimension {0} is not supported (expected 2 or 3)")]
    UnsupportedDimension(usize),
    #[error("coordinates must be finite")]
    NonFinite,
    #[error("empty point list")]
    Empty,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point is not on the affine hull of the simplex")]
    OutsideAffineHull,
    #[error("simplex is degenerate")]
    Degenerate,
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
}
