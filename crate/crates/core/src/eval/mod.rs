//! Experiment harness: metrics, cross-validation, sweeps and plotting data.

mod boundary;
mod cv;
mod metrics;
mod stats;
mod sweep;

pub use boundary::{
    export_boundaries, BoundaryExport, ClassGrid, GeodesicBoundary, DEFAULT_RESOLUTION,
    GEODESIC_SAMPLES,
};
pub use cv::{
    cross_validate, fold_indices, CvOptions, CvRecord, CvResult, CvSummary, ModelKind,
    PairedComparison, PredictorSpec, PredictorSummary,
};
pub use metrics::{accuracy, average_precision, f1_scores, f1_scores_with_vocabulary, F1Scores};
pub use stats::{linear_fit, paired_t_test, summarize, LinearFit, Summary, TTestOutcome};
pub use sweep::{scaling_sweep, SweepAxis, SweepConfig, SweepRow};
