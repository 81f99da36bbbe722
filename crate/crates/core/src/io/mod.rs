//! File formats, pipeline orchestration, document checking and SVG output.

mod check;
mod format;
pub(crate) mod pipeline;
mod svg;

pub use check::{check_document, CheckFailure, CheckReport};
pub use format::{
    from_json, read_file, read_json, sha256_hex, to_json, write_atomic, DomainDoc, FieldDoc,
    FormatError, SamplesDoc,
};
pub use pipeline::{
    choose_subdivisions, interior_zero_scan, load_inputs, local_lipschitz, required_subdivisions,
    run_pipeline, validate_inputs, verify_run, Certificates, ComplexDoc, ConfigEcho, FailureClass,
    InputEcho, Inputs, InteriorScan, PipelineError, ResultDocument, RunConfig, RunOutcome, Stage,
    TriangulationStats, ValidationSummary, MIN_SUBDIVISIONS, RESULT_FORMAT,
};
pub use svg::{render_svg, RenderOptions, Slice};
