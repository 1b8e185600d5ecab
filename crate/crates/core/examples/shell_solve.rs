//! Solve one shell and print a coarse table of the metric and matter
//! profiles; with an output directory, also write the CSV files.
//!
//! ```text
//! cargo run --release --example shell_solve -- [delta] [out_dir]
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use vlasov_shell::ansatz::{AnsatzConfig, SupportBox};
use vlasov_shell::output::{write_mu_lambda, write_profiles};
use vlasov_shell::solver::{solve_fixed_point, ShellProblem, SolverConfig};

fn main() -> vlasov_shell::Result<()> {
    let mut args = std::env::args().skip(1);
    let delta: f64 = args
        .next()
        .map(|s| s.parse().expect("delta must be a number"))
        .unwrap_or(1e-3);
    let out_dir = args.next().map(PathBuf::from);

    let support = SupportBox::new(1.0, 0.965, 0.97, 14.5, 16.0)?;
    let ansatz = AnsatzConfig::new(support, delta, 1.0)?;
    let problem = ShellProblem::new(ansatz, SolverConfig::default())?;
    let b = problem.bounds()?;
    println!(
        "domain [{:.4}, {:.4}], delta_max = {:.3}, eta = {:.4}",
        b.r_inner(problem.mass()),
        b.r_outer,
        b.delta_max,
        problem.ansatz.eta
    );

    let sol = solve_fixed_point(&problem)?;
    println!(
        "{} iterations, M^delta = {:.12} (direct {:.12}), shell [{:.6}, {:.6}]",
        sol.iterations, sol.m_delta, sol.m_delta_direct, sol.r_min, sol.r_max
    );
    println!("lapse shift c = {:.6e}\n", sol.lapse_constant());

    println!(
        "{:>9} {:>13} {:>13} {:>11} {:>11} {:>11}",
        "r", "mu", "lambda", "rho", "p", "pT"
    );
    let grid = sol.grid();
    let stride = (grid.len() / 20).max(1);
    for i in (0..grid.len()).step_by(stride) {
        println!(
            "{:>9.4} {:>13.6e} {:>13.6e} {:>11.3e} {:>11.3e} {:>11.3e}",
            grid.node(i),
            sol.metric.mu_nodes()[i],
            sol.lambda[i],
            sol.profiles.rho[i],
            sol.profiles.p[i],
            sol.profiles.p_t[i]
        );
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        write_mu_lambda(
            &sol,
            BufWriter::new(File::create(dir.join("mu_lambda.csv"))?),
        )?;
        write_profiles(
            &sol,
            BufWriter::new(File::create(dir.join("profiles.csv"))?),
        )?;
        println!("\nwrote {}", dir.display());
    }
    Ok(())
}
