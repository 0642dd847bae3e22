//! Writes a trace, reads it back and runs the runtime checks: the two
//! Lyapunov inequalities, summability, monotonicity and a linear-rate fit.

use devsplit::diagnostics::{audit_convergence, check_lyapunov, fit_linear_rate, LyapunovInput, RateWindow, LYAPUNOV_SLACK};
use devsplit::fb::{solve, MomentumPolicy, Schedules, SolveOptions, ZeroPolicy, ZetaPolicy};
use devsplit::synthetic::quadratic_l1;
use devsplit::trace;

fn main() -> devsplit::Result<()> {
    let inst = quadratic_l1(5, 30)?;
    let problem = inst.problem();
    let s = Schedules::constant(1e-6, 1.0 / inst.beta(), 1.2, ZetaPolicy::Uniform { seed: 5 });
    let x0 = vec![2.0; 30];
    let x_star = solve(&problem, &x0, &s, &mut ZeroPolicy, &SolveOptions::new(1_000_000, 1e-14))?.x;
    let t = solve(&problem, &x0, &s, &mut MomentumPolicy::default(), &SolveOptions::new(100_000, 1e-11).with_reference(x_star))?;

    let path = std::env::temp_dir().join("devsplit-lyapunov-audit.csv");
    t.write(&path)?;
    let audit_file = trace::audit_path(&path);
    let audit = trace::read_audit(&audit_file, std::fs::File::open(&audit_file)?)?;
    let input = LyapunovInput::from_audit(&audit)?;

    let rep = check_lyapunov(&input, LYAPUNOV_SLACK);
    println!("{} steps, {} violations, largest lhs - rhs {:.2e}", input.steps(), rep.violations.len(), rep.max_gap);
    let conv = audit_convergence(&input, LYAPUNOV_SLACK, 1e-6);
    println!("summability {}, monotone {}, tail deviation {:.1e}", conv.summability_ok, conv.fejer_ok, conv.tail_deviation_rel);
    let dist = t.distances.as_ref().map(|d| d.primal_rel()).unwrap_or_default();
    let fit = fit_linear_rate(&dist, &RateWindow::default())?;
    println!("rate fit over {:?}: q_hat {:.5}, r^2 {:?}", fit.window, fit.q_hat, fit.r_squared);
    println!("trace written to {} and {}", path.display(), audit_file.display());
    Ok(())
}
