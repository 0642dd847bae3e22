//! The one-dimensional problem `0 ∈ ∂|x| + (x − 1)` (solution 0), solved with
//! and without deviations.

use devsplit::fb::{solve, MomentumPolicy, Schedules, SolveOptions, SplittingProblem, ZeroPolicy, ZetaPolicy};
use devsplit::synthetic::toy1d;

fn main() -> devsplit::Result<()> {
    let problem = toy1d();
    let gamma = 1.0 / problem.beta();
    let opts = SolveOptions::new(100, 1e-12).with_reference(vec![0.0]);

    let plain = solve(&problem, &[1.0], &Schedules::constant(1e-6, gamma, 1.0, ZetaPolicy::Zero), &mut ZeroPolicy, &opts)?;
    println!("zero deviations: {:?} after {} steps, x = {:e}", plain.status, plain.iterations(), plain.x[0]);

    // under-relaxed, with and without the momentum policy
    let s = Schedules::constant(1e-6, gamma, 0.3, ZetaPolicy::Uniform { seed: 1 });
    let slow = solve(&problem, &[1.0], &s, &mut ZeroPolicy, &opts)?;
    let fast = solve(&problem, &[1.0], &s, &mut MomentumPolicy::default(), &opts)?;
    println!("lambda = 0.3: {} steps without deviations, {} with momentum", slow.iterations(), fast.iterations());
    for r in fast.records.iter().take(5) {
        println!("  n={} a={:.3} ell^2={:.3e} residual bound={:.3e}", r.n, r.scaling_a.unwrap_or(0.0), r.ell_sq, r.residual_bound);
    }
    Ok(())
}
