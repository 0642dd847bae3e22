//! A random `½xᵀQx − bᵀx + ξ‖x‖₁` problem. Compares zero deviations, the
//! momentum policy and a policy that always proposes 100x over budget.

use devsplit::diagnostics::check_trace;
use devsplit::fb::{solve, DeviationPolicy, HostilePolicy, MomentumMode, MomentumPolicy, Schedules, SolveOptions, ZeroPolicy, ZetaPolicy};
use devsplit::synthetic::quadratic_l1;

fn main() -> devsplit::Result<()> {
    let inst = quadratic_l1(3, 40)?;
    let problem = inst.problem();
    let gamma = 1.5 / inst.beta();
    let s = Schedules::constant(1e-6, gamma, 1.0, ZetaPolicy::Uniform { seed: 3 });
    let x0 = vec![1.0; 40];

    // a tight solve for the reference point
    let x_star = solve(&problem, &x0, &s, &mut ZeroPolicy, &SolveOptions::new(1_000_000, 1e-14))?.x;
    println!("objective at the solution: {:.10}", inst.objective(&x_star));

    let runs: Vec<(&str, Box<dyn DeviationPolicy>)> = vec![
        ("zero", Box::new(ZeroPolicy)),
        ("momentum (v only)", Box::new(MomentumPolicy::default())),
        ("momentum (u and v)", Box::new(MomentumPolicy::default().with_mode(MomentumMode::Both))),
        ("hostile x100", Box::new(HostilePolicy::new(100.0, 0))),
    ];
    for (name, mut policy) in runs {
        let opts = SolveOptions::new(100_000, 1e-10).with_reference(x_star.clone());
        let t = solve(&problem, &x0, &s, policy.as_mut(), &opts)?;
        let rep = check_trace(&t)?;
        println!("{name:<20} {:>6} steps  lyapunov violations {}", t.iterations(), rep.violations.len());
    }
    Ok(())
}
