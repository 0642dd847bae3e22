//! ℓ₁-regularized SVM benchmark: data ingestion, problem construction and
//! the Chambolle-Pock vs inertial comparison.

mod experiment;
mod libsvm;
mod problem;

pub use experiment::{
    compute_reference, run_algorithm, run_comparison, run_experiment, Algorithm, ExperimentConfig, ExperimentResult, Reference, RunResult, ACCURACY_LEVELS,
};
pub use libsvm::{parse_libsvm, read_libsvm_file, Dataset, ParseOptions};
pub use problem::{build_svm_problem, build_with_steps, svm_matrix, SvmProblem, STEP_FACTOR};

/// Path of the bundled 145-sample liver-disorders training set (features
/// scaled to `[−1, 1]`).
pub fn bundled_dataset_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/liver-disorders_scale.libsvm")
}
