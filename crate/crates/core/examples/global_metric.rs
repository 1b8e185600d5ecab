//! Glue the grid solution to Schwarzschild on both sides and sample the
//! resulting spacetime from near the horizon out to large radius.
//!
//! ```text
//! cargo run --release --example global_metric
//! ```

use vlasov_shell::ansatz::{AnsatzConfig, SupportBox};
use vlasov_shell::solver::{extend_global, solve_fixed_point, ShellProblem, SolverConfig};

fn main() -> vlasov_shell::Result<()> {
    let support = SupportBox::new(1.0, 0.965, 0.97, 14.5, 16.0)?;
    let problem = ShellProblem::new(
        AnsatzConfig::new(support, 1e-2, 1.0)?,
        SolverConfig::default(),
    )?;
    let sol = solve_fixed_point(&problem)?;
    let global = extend_global(&sol);
    println!(
        "inner mass {} | matter on [{:.4}, {:.4}] | outer mass {:.10} | c = {:.6e}\n",
        global.mass, global.r_inner, global.r_outer, global.m_delta, global.lapse_constant
    );

    println!(
        "{:>10} {:>12} {:>16} {:>16} {:>16}",
        "r", "piece", "mu", "mu + c", "lambda"
    );
    let mut radii = vec![
        2.01,
        2.5,
        3.0,
        4.0,
        8.0,
        12.0,
        16.0,
        20.0,
        50.0,
        1e3,
        1e6,
        global.r_inner,
        global.r_outer,
    ];
    radii.sort_by(f64::total_cmp);
    for r in radii {
        let p = global.eval(r)?;
        println!(
            "{r:>10.4} {:>12} {:>16.9e} {:>16.9e} {:>16.9e}",
            format!("{:?}", p.piece),
            p.mu,
            p.mu_shifted,
            p.lambda
        );
    }

    // A jump of size J at r shows up as J in the second difference; a smooth
    // join gives O(eps^2).
    let eps = 1e-6;
    println!();
    for r in [global.r_inner, global.r_outer] {
        let (a, m, b) = (
            global.eval(r - eps)?,
            global.eval(r)?,
            global.eval(r + eps)?,
        );
        println!(
            "second difference at r = {r:.4}: mu {:.2e}, lambda {:.2e}",
            (b.mu - 2.0 * m.mu + a.mu).abs(),
            (b.lambda - 2.0 * m.lambda + a.lambda).abs()
        );
    }
    Ok(())
}
