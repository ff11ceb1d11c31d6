//! Fingerprint minutiae toolkit.
//!
//! The pipeline runs a grayscale scan through binarization, boundary
//! whitening, and thinning, locates ridge terminations and bifurcations
//! by crossing number on the skeleton, and verifies prints by aligning
//! minutiae sets in polar coordinates around candidate reference pairs.
//! On top of that sit a data-matrix (CSV) interchange format, an overlay
//! renderer, and an FMR/FNMR evaluation harness with a threshold sweep.
//!
//! Modules follow the stages: [`imaging`] (PGM I/O and rasters),
//! [`preprocess`] (binarize, whiten, thin), [`minutiae`] (extraction and
//! the data matrix), [`matcher`] (scoring), [`evaluation`] (dataset
//! protocols), [`pipeline`] (stage plumbing), and [`synth`]
//! (deterministic sample data).

pub mod angle;
pub mod evaluation;
pub mod imaging;
pub mod matcher;
pub mod minutiae;
pub mod pipeline;
pub mod preprocess;
pub mod synth;

pub use evaluation::{
    evaluate, run_enrollee, run_imposter, sweep, AttemptKind, AttemptOutcome, AttemptRecord,
    DatasetManifest, EvalError, EvalReport, ManifestEntry, SweepPoint,
};
pub use imaging::{render_overlay, BinaryImage, GrayImage, ImageError};
pub use matcher::{
    count_matches, match_sets, polar_transform, rotateval, Decision, MatchConfig, MatchError,
    MatchResult, PolarMinutia,
};
pub use minutiae::{
    bifurcation_angle, crossing_number, extract, termination_angle, Minutia, MinutiaType,
    MinutiaeError, MinutiaeSet,
};
pub use pipeline::{
    extract_from_path, extract_minutiae, skeletonize, PipelineConfig, PipelineError, ThresholdMode,
};
pub use preprocess::{
    binarize, ridge_components, thin, whiten_boundary, BinarizeConfig, PreprocessError, ThinConfig,
};
