//! Properties of converged shells: structure, consistency between routes,
//! and behaviour under grid refinement.

use std::sync::OnceLock;

use vlasov_shell::ansatz::{AnsatzConfig, SupportBox};
use vlasov_shell::matter::MatterEvaluator;
use vlasov_shell::metric::MetricField;
use vlasov_shell::potential::Schwarzschild;
use vlasov_shell::solver::{
    apply_solution_operator, extend_global, perturbed_roots, solve_fixed_point, Piece,
    ShellProblem, ShellSolution, SolverConfig,
};
use vlasov_shell::validation::{einstein_residuals, fresh_profiles};
use vlasov_shell::ShellError;

fn problem(delta: f64, n: usize) -> ShellProblem {
    let support = SupportBox::new(1.0, 0.965, 0.97, 14.5, 16.0).unwrap();
    let ansatz = AnsatzConfig::new(support, delta, 1.0).unwrap();
    ShellProblem::new(
        ansatz,
        SolverConfig {
            n,
            ..SolverConfig::default()
        },
    )
    .unwrap()
}

fn shell() -> &'static ShellSolution {
    static SOL: OnceLock<ShellSolution> = OnceLock::new();
    SOL.get_or_init(|| solve_fixed_point(&problem(1e-3, 2000)).unwrap())
}

#[test]
fn radial_pressure_never_exceeds_density() {
    let sol = shell();
    for i in 0..sol.grid().len() {
        assert!(sol.profiles.p[i] <= sol.profiles.rho[i], "node {i}");
        assert!(sol.profiles.p[i] >= 0.0 && sol.profiles.p_t[i] >= 0.0);
    }
}

#[test]
fn mass_is_constant_below_the_shell() {
    let sol = shell();
    for i in 0..sol.grid().len() {
        if sol.grid().node(i) <= sol.r_min {
            assert_eq!(sol.mass[i], 1.0);
        }
    }
}

#[test]
fn two_mass_routes_agree() {
    let sol = shell();
    assert!((sol.m_delta - sol.m_delta_direct).abs() < 1e-9);
    assert!(sol.m_delta > 1.0);
}

#[test]
fn lambda_is_continuous_at_the_outer_edge() {
    let sol = shell();
    let global = extend_global(sol);
    let r = global.r_outer;
    let inside = global.eval(r).unwrap();
    let outside = global.eval(r * (1.0 + 1e-12)).unwrap();
    assert_eq!(inside.piece, Piece::Matter);
    assert_eq!(outside.piece, Piece::OuterVacuum);
    assert!((inside.lambda - outside.lambda).abs() < 1e-8);
    assert!((inside.mu - outside.mu).abs() < 1e-8);
    let exact = -0.5 * (1.0 - 2.0 * sol.m_delta / r).ln();
    assert!((inside.lambda - exact).abs() < 1e-8);
}

#[test]
fn matter_vanishes_at_the_domain_ends() {
    let sol = shell();
    let ev = sol.evaluator().unwrap();
    let grid = sol.grid();
    for r in [grid.r_lo(), grid.r_hi()] {
        assert_eq!(ev.big_g(r).unwrap(), 0.0);
        assert_eq!(ev.big_h(r).unwrap(), 0.0);
    }
}

#[test]
fn perturbed_roots_move_by_order_delta() {
    let sol = shell();
    let sch = Schwarzschild::new(1.0).unwrap();
    for point in sol.problem.ansatz.support.corners() {
        let base = sch.roots(point);
        let moved = perturbed_roots(&sol.metric, point).unwrap();
        for i in 0..3 {
            let (a, b) = (base.get(i).unwrap(), moved.get(i).unwrap());
            // Relative shift bounded by a few times the metric perturbation.
            assert!(
                (a - b).abs() / a < 100.0 * sol.delta(),
                "root {i}: {a} vs {b}"
            );
        }
    }
}

#[test]
fn first_operator_step_is_order_delta() {
    let d = |delta: f64| {
        let p = problem(delta, 1000);
        let sch = MetricField::schwarzschild(p.grid().unwrap(), 1.0).unwrap();
        let step = apply_solution_operator(&sch, &p.ansatz, 64).unwrap();
        step.metric.c1_distance(&sch)
    };
    let (a, b) = (d(1e-4), d(1e-3));
    assert!(a > 0.0);
    // Linear to leading order in delta.
    assert!((b / a - 10.0).abs() < 1.0, "ratio {}", b / a);
}

#[test]
fn updates_contract() {
    let sol = shell();
    for w in sol.update_norms.windows(2) {
        assert!(w[1] < 0.1 * w[0], "{:?}", sol.update_norms);
    }
}

#[test]
fn refinement_converges_and_residuals_shrink() {
    let sols: Vec<ShellSolution> = [500, 1000, 2000]
        .iter()
        .map(|&n| solve_fixed_point(&problem(1e-3, n)).unwrap())
        .collect();
    let e1 = (sols[0].m_delta - sols[1].m_delta).abs();
    let e2 = (sols[1].m_delta - sols[2].m_delta).abs();
    assert!(e2 < e1 / 3.0, "mass differences {e1:e} {e2:e}");

    let residual = |s: &ShellSolution| {
        let profiles = fresh_profiles(s).unwrap();
        let (a, b) = einstein_residuals(s, &profiles);
        a.max(b)
    };
    let (r0, r1) = (residual(&sols[0]), residual(&sols[1]));
    assert!(r1 < r0 / 3.0, "residuals {r0:e} {r1:e}");
}

#[test]
fn quadrature_node_doubling_is_stable() {
    let sol = shell();
    let cfg = &sol.problem.ansatz;
    let coarse = MatterEvaluator::new(&sol.metric, cfg, 64).unwrap();
    let fine = MatterEvaluator::new(&sol.metric, cfg, 128).unwrap();
    let centre = cfg.support.center().e;
    for k in 0..20 {
        let r = sol.r_min + 0.2 + (sol.r_max - sol.r_min - 1.2) * k as f64 / 19.0;
        let pairs = [
            (coarse.big_g(r).unwrap(), fine.big_g(r).unwrap()),
            (coarse.big_h(r).unwrap(), fine.big_h(r).unwrap()),
            (
                coarse.p_tangential(r).unwrap(),
                fine.p_tangential(r).unwrap(),
            ),
            (
                coarse.g_phi(r, centre).unwrap(),
                fine.g_phi(r, centre).unwrap(),
            ),
        ];
        for (a, b) in pairs {
            assert!((a - b).abs() <= 1e-7 * b.abs(), "r = {r}: {a:e} vs {b:e}");
        }
    }
}

#[test]
fn huge_amplitude_violates_the_horizon_condition() {
    let mut p = problem(1e-3, 1000);
    p.ansatz.amplitude = 1e6;
    match solve_fixed_point(&p) {
        Err(ShellError::HorizonViolation { ratio, .. }) => assert!(ratio >= 1.0),
        other => panic!("expected a horizon violation, got {other:?}"),
    }
}

#[test]
fn mass_gain_is_nondecreasing_in_delta() {
    let masses: Vec<f64> = [0.0, 1e-4, 1e-3]
        .iter()
        .map(|&d| solve_fixed_point(&problem(d, 1000)).unwrap().m_delta)
        .collect();
    assert_eq!(masses[0], 1.0);
    assert!(masses[0] < masses[1] && masses[1] < masses[2]);
}

/// Reference values for the default shell (delta = 1e-3, N = 2000, 64-node
/// quadrature), recorded from a release build.
#[test]
fn matches_golden_values() {
    let text = include_str!("golden/default_shell.json");
    let golden: serde_json::Value = serde_json::from_str(text).unwrap();
    let get = |k: &str| golden[k].as_str().unwrap().parse::<f64>().unwrap();
    let sol = shell();
    assert_eq!(
        sol.iterations as u64,
        golden["iterations"].as_u64().unwrap()
    );
    for (key, value) in [
        ("Mdelta", sol.m_delta),
        ("Rmin", sol.r_min),
        ("Rmax", sol.r_max),
        ("lapse_constant", sol.lapse_constant()),
    ] {
        let want = get(key);
        assert!(
            (value - want).abs() <= 1e-10 * want.abs(),
            "{key}: {value} vs {want}"
        );
    }
}
