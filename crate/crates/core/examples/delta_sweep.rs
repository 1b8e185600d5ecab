//! Sweep the shell amplitude and show that the mass gain `M^delta - M` is
//! linear in `delta` for small `delta`.
//!
//! ```text
//! cargo run --release --example delta_sweep
//! ```

use rayon::prelude::*;
use vlasov_shell::ansatz::{AnsatzConfig, SupportBox};
use vlasov_shell::solver::{solve_fixed_point, ShellProblem, SolverConfig};

fn main() -> vlasov_shell::Result<()> {
    let support = SupportBox::new(1.0, 0.965, 0.97, 14.5, 16.0)?;
    let base = ShellProblem::new(
        AnsatzConfig::new(support, 0.0, 1.0)?,
        SolverConfig::default(),
    )?;
    let deltas = [1e-6, 1e-5, 1e-4, 1e-3, 3e-3, 1e-2, 3e-2];
    let results: Vec<_> = deltas
        .par_iter()
        .map(|&d| base.with_delta(d).and_then(|p| solve_fixed_point(&p)))
        .collect();

    println!(
        "{:>8} {:>18} {:>14} {:>10} {:>10} {:>5}",
        "delta", "M^delta", "(M^d - M)/d", "R_min", "R_max", "iter"
    );
    for (d, res) in deltas.iter().zip(results) {
        match res {
            Ok(s) => println!(
                "{d:>8.0e} {:>18.12} {:>14.8} {:>10.5} {:>10.5} {:>5}",
                s.m_delta,
                (s.m_delta - 1.0) / d,
                s.r_min,
                s.r_max,
                s.iterations
            ),
            Err(e) => println!("{d:>8.0e} failed: {e}"),
        }
    }
    Ok(())
}
