//! Solve the default shell, run every residual check, then confirm each
//! check trips under its deliberate fault.
//!
//! ```text
//! cargo run --release --example validate_shell
//! ```

use std::time::Instant;

use vlasov_shell::ansatz::{AnsatzConfig, SupportBox};
use vlasov_shell::solver::{solve_fixed_point, ShellProblem, SolverConfig};
use vlasov_shell::validation::{validate, validate_with_fault, Fault, Thresholds};

fn main() -> vlasov_shell::Result<()> {
    let support = SupportBox::new(1.0, 0.965, 0.97, 14.5, 16.0)?;
    let problem = ShellProblem::new(
        AnsatzConfig::new(support, 1e-3, 1.0)?,
        SolverConfig::default(),
    )?;

    let t = Instant::now();
    let sol = solve_fixed_point(&problem)?;
    println!(
        "solved in {:.2?}: {} iterations, M^delta = {:.12}, R_min = {:.6}, R_max = {:.6}",
        t.elapsed(),
        sol.iterations,
        sol.m_delta,
        sol.r_min,
        sol.r_max
    );
    let norms: Vec<String> = sol
        .update_norms
        .iter()
        .map(|n| format!("{n:.3e}"))
        .collect();
    println!("update norms: {}", norms.join(" "));

    let thresholds = Thresholds::default();
    let report = validate(&sol, thresholds)?;
    println!(
        "clean: rev1 {:.3e}  rev2 {:.3e}  tov {:.3e}  mass gap {:.3e}  lapse c {:.6e}  passed {}",
        report.rev1_residual,
        report.rev2_residual,
        report.tov_residual,
        report.mass_agreement,
        report.lapse_constant,
        report.passed()
    );

    for fault in [
        Fault::SCALE_MU,
        Fault::ZeroTangentialPressure,
        Fault::TRUNCATE_SHELL,
        Fault::AMPLITUDE_BLOWUP,
    ] {
        let r = validate_with_fault(&problem, &sol, fault, thresholds)?;
        println!(
            "{:>16}: rev2 {:.3e}  tov {:.3e}  vacuum_ok {}  horizon_ok {}  passed {}{}",
            fault.name(),
            r.rev2_residual,
            r.tov_residual,
            r.vacuum_match_ok,
            r.horizon_ok,
            r.passed(),
            r.error.map(|e| format!("  ({e})")).unwrap_or_default()
        );
    }
    Ok(())
}
