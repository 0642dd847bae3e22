//! Fixed points of nonexpansive maps: a rotation composed with a ball
//! projection, and the forward-backward map of a lasso problem.

use std::sync::Arc;

use devsplit::fb::{solve, MomentumPolicy, Schedules, SolveOptions, ZeroPolicy, ZetaPolicy};
use devsplit::km::{BallProjection, Composition, ForwardBackwardMap, KmProblem, NonexpansiveMap, Rotation2d};
use devsplit::synthetic::quadratic_l1;

fn main() -> devsplit::Result<()> {
    let t: Arc<dyn NonexpansiveMap> = Arc::new(Composition(vec![
        Arc::new(Rotation2d { theta: 2.5 }),
        Arc::new(BallProjection { center: vec![2.0, 0.0], radius: 1.0 }),
    ]));
    let problem = KmProblem::new(2, t);
    for lambda in [0.5, 1.0, 1.5] {
        let s = Schedules::constant(1e-6, 1.0, lambda, ZetaPolicy::Uniform { seed: 7 });
        let opts = SolveOptions::new(100_000, 1e-12);
        let plain = solve(&problem, &[5.0, 5.0], &s, &mut ZeroPolicy, &opts)?;
        let mom = solve(&problem, &[5.0, 5.0], &s, &mut MomentumPolicy::default(), &opts)?;
        println!(
            "lambda {lambda}: {:>5} steps plain, {:>5} with momentum, ||Tx - x|| = {:.1e}",
            plain.iterations(),
            mom.iterations(),
            problem.fixed_point_residual(&mom.x)
        );
    }

    let inst = quadratic_l1(1, 25)?;
    let fb = ForwardBackwardMap::new(inst.problem(), 1.0 / inst.beta())?;
    let problem = KmProblem::new(25, Arc::new(fb));
    let s = Schedules::constant(1e-6, 1.0, 1.8, ZetaPolicy::Uniform { seed: 1 });
    let t = solve(&problem, &[0.0; 25], &s, &mut MomentumPolicy::default(), &SolveOptions::new(100_000, 1e-12))?;
    println!("lasso via its forward-backward map: {} steps, objective {:.8}", t.iterations(), inst.objective(&t.x));
    Ok(())
}
