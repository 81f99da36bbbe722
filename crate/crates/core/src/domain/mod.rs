//! The set E (a grid-aligned union of closed cells and lower faces) and the
//! input map f.

mod expr;
mod field;
mod grid;
mod interval;

pub use expr::{parse_expr, CompiledExpr, EvalError, Expr, Func, ParseError, ParseErrorKind};
pub use field::{BoxRegion, FieldSpec, LipschitzBound, LipschitzMethod, SampledField};
pub use grid::{
    box_distance, clamp_to_box, for_each_incident_cell, DomainE, GridFace, GridIndex, GridSpec,
    GRID_SNAP_TOL,
};
pub use interval::{Interval, IntervalError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DomainError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("component {component}: {error}")]
    Parse { component: usize, error: ParseError },
    #[error("no Lipschitz enclosure for d f{} / d x{}: {error}; supply a bound or change the field", component + 1, variable + 1)]
    Lipschitz {
        component: usize,
        variable: usize,
        error: IntervalError,
    },
}
