//! The l1-regularized SVM on the bundled liver-disorders data: Chambolle-Pock
//! against the inertial primal-dual method for three relaxation parameters.
//!
//!     cargo run --release --example inertial_svm [path.libsvm]

use devsplit::svm::{self, Algorithm, ExperimentConfig, ParseOptions, ACCURACY_LEVELS};

fn main() -> devsplit::Result<()> {
    let path = std::env::args().nth(1).map(Into::into).unwrap_or_else(svm::bundled_dataset_path);
    let data = svm::read_libsvm_file(&path, ParseOptions::default())?;
    let prob = svm::build_svm_problem(&data, 0.1, 0)?;
    println!("{} samples, {} features, ||L|| ~ {:.4}", prob.n_samples(), prob.n_features(), prob.op_norm);

    let runs: Vec<(Algorithm, f64)> = [Algorithm::Cp, Algorithm::Alg4].iter().flat_map(|a| [0.5, 1.0, 1.5].map(|l| (*a, l))).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let result = svm::run_comparison(&prob, &runs, &ExperimentConfig::default(), threads)?;
    println!("reference objective {:.10} ({} iterations)", result.reference.objective, result.reference.iterations);
    let levels = ACCURACY_LEVELS.map(|t| format!("{t:e}"));
    println!("{:<6} {:>6} {:>8} {:>8} {:>8}", "alg", "lambda", levels[0], levels[1], levels[2]);
    for r in &result.runs {
        let its = r.iterations_to.map(|i| i.map_or("-".into(), |i| i.to_string()));
        println!("{:<6} {:>6} {:>8} {:>8} {:>8}", r.algorithm, r.lambda, its[0], its[1], its[2]);
    }
    let x = result.reference.primal(&prob);
    println!("training accuracy at the reference: {:.3}", prob.training_accuracy(&x));
    Ok(())
}
