//! A primal-dual problem with a smooth term:
//! `min ½‖x − c‖² + ξ‖x‖₁ + Σ max(0, 1 − (Kx)ᵢ)`, solved with the
//! Condat-Vu instance of the core, with and without deviations.

use std::sync::Arc;

use devsplit::fb::{solve, MomentumPolicy, Sequence, SolveOptions, ZeroPolicy, ZetaPolicy};
use devsplit::metric::{operator_norm_estimate, PowerIterOptions};
use devsplit::operators::{make_quadratic_gradient, DenseMatrix, HingeSum, L1Norm, LinearMap};
use devsplit::primal_dual::PdProblem;
use devsplit::synthetic::gaussian_matrix;

fn main() -> devsplit::Result<()> {
    let mut rng = devsplit::rng::stream(0, "condat-vu-example");
    let (n, d) = (30, 10);
    let k = gaussian_matrix(&mut rng, n, d);
    let c: Vec<f64> = (0..d).map(|i| (i as f64 - 4.5) / 3.0).collect();
    let smooth = make_quadratic_gradient(DenseMatrix::identity(d), c)?;

    let norm = operator_norm_estimate(&k, &PowerIterOptions::default())?.value;
    let map: Arc<dyn LinearMap> = Arc::new(k);
    let tau = 0.5 / norm;
    let sigma = 0.5 / norm;
    let problem = PdProblem::new(Arc::new(L1Norm::new(0.1)), Arc::new(HingeSum), map, Some(Arc::new(smooth)), tau, sigma, norm)?;

    let s = problem.schedules(1e-6, Sequence::Constant(1.0), ZetaPolicy::Uniform { seed: 0 });
    let w0 = vec![0.0; d + n];
    let plain = solve(&problem, &w0, &s, &mut ZeroPolicy, &SolveOptions::new(200_000, 1e-10))?;
    let (rx, rmu) = problem.kkt_residuals(&plain.x)?;
    println!("zero deviations: {} steps, kkt residuals {rx:.1e} / {rmu:.1e}", plain.iterations());

    let opts = SolveOptions::new(200_000, 1e-10).with_reference(plain.x.clone());
    let mom = solve(&problem, &w0, &s, &mut MomentumPolicy::default(), &opts)?;
    println!("momentum:        {} steps", mom.iterations());
    println!("x = {:.4?}", &plain.x[..d]);
    Ok(())
}
