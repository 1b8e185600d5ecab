//! Fixed-point construction of the metric potential `mu` on `[2M+rho, R]`.
//!
//! The solution operator is
//!
//! ```text
//! T(mu)(r) = mu_0 + ∫_{2M+rho}^r [4 pi s H(s) + m(s)/s^2] / [1 - 2m(s)/s] ds
//! m(r)     = M + 4 pi ∫_{2M+rho}^r s^2 G(s) ds
//! ```
//!
//! and Picard iteration `mu <- T(mu)` starts from Schwarzschild. The mass-`M`
//! vacuum part of the integrand has the closed-form antiderivative
//! `½ log(1 - 2M/r)`, so only the matter correction is integrated numerically.

use serde::{Deserialize, Serialize};

use crate::ansatz::{AnsatzConfig, SupportBox};
use crate::error::{Result, ShellError};
use crate::matter::{MatterEvaluator, MatterProfiles, DEFAULT_QUAD_NODES};
use crate::metric::{MetricField, RadialGrid};
use crate::potential::{ParameterPoint, RadialRoots, Root, Schwarzschild};
use crate::quadrature::{bisect, cumulative_simpson, GaussLegendre};

/// Panels of the Gauss–Legendre rule used for the independent shell-mass
/// integral.
const MASS_PANELS: usize = 64;
const MASS_PANEL_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub margin: f64,
    pub quad_nodes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            n: 2000,
            tol: 1e-10,
            max_iter: 100,
            margin: 0.5,
            quad_nodes: DEFAULT_QUAD_NODES,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 5 {
            return Err(ShellError::Config(format!(
                "solver.N must be >= 5, got {}",
                self.n
            )));
        }
        if !(self.tol > 0.0) {
            return Err(ShellError::Config(format!(
                "solver.tol must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(ShellError::Config("solver.max_iter must be >= 1".into()));
        }
        if !(self.margin > 0.0 && self.margin < 1.0) {
            return Err(ShellError::Config(format!(
                "solver.margin must lie in (0, 1), got {}",
                self.margin
            )));
        }
        if self.quad_nodes < 2 {
            return Err(ShellError::Config(format!(
                "solver.quad_nodes must be >= 2, got {}",
                self.quad_nodes
            )));
        }
        Ok(())
    }
}

/// Interval `[2M + rho, R]` and the bifurcation bound `delta_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainBounds {
    pub rho: f64,
    pub r_outer: f64,
    pub delta_max: f64,
}

impl DomainBounds {
    pub fn r_inner(&self, mass: f64) -> f64 {
        2.0 * mass + self.rho
    }
}

pub fn domain_bounds(mass: f64, support: &SupportBox, margin: f64) -> Result<DomainBounds> {
    if !(margin > 0.0 && margin < 1.0) {
        return Err(ShellError::Domain(format!(
            "margin must lie in (0, 1), got {margin}"
        )));
    }
    let sch = Schwarzschild::new(mass)?;
    let mut r0_min = f64::INFINITY;
    let mut r2_max = 0.0f64;
    for corner in support.corners() {
        let roots = sch.roots(corner);
        if !roots.is_three_simple() {
            return Err(ShellError::InvalidBox(format!(
                "corner (E = {}, l = {}) lacks three simple roots",
                corner.e, corner.ell
            )));
        }
        r0_min = r0_min.min(roots.r0().unwrap_or(f64::NAN));
        r2_max = r2_max.max(roots.r2().unwrap_or(f64::NAN));
    }
    let rho = margin * (r0_min - 2.0 * mass);
    let r_outer = r2_max + margin * mass;
    let delta_max = (r0_min - (2.0 * mass + rho)).min(r_outer - r2_max);
    Ok(DomainBounds {
        rho,
        r_outer,
        delta_max,
    })
}

/// Roots of `e^{2mu(r)}(1 + l/r^2) = E^2` near the three Schwarzschild roots.
///
/// Each bracket starts at `10 * ||mu - mu_Sch||_{C^1} * M` around the
/// Schwarzschild root and doubles until the sign changes, capped at half the
/// distance to the neighbouring roots and at the grid ends.
pub fn perturbed_roots(metric: &MetricField, point: ParameterPoint) -> Result<RadialRoots> {
    let mass = metric.mass();
    let sch = Schwarzschild::new(mass)?;
    let base = sch.roots(point);
    if !base.is_three_simple() {
        return Err(ShellError::Domain(format!(
            "(E = {}, l = {}) has no three simple Schwarzschild roots",
            point.e, point.ell
        )));
    }
    let grid = metric.grid();
    let e_sq = point.e_sq();
    let f = |r: f64| metric.effective_potential_unchecked(point.ell, r) - e_sq;
    let sch_r: Vec<f64> = base.roots().iter().map(|r| r.r).collect();
    let start = (10.0 * metric.schwarzschild_distance() * mass).max(1e-10 * mass);
    let tol = 1e-12 * mass;

    let mut out = Vec::with_capacity(3);
    for (i, &r_sch) in sch_r.iter().enumerate() {
        let left_cap = if i == 0 {
            r_sch - sch.horizon()
        } else {
            r_sch - sch_r[i - 1]
        };
        let right_cap = if i + 1 == sch_r.len() {
            f64::INFINITY
        } else {
            sch_r[i + 1] - r_sch
        };
        let cap = 0.5 * left_cap.min(right_cap);
        let too_far = || ShellError::MetricTooFar {
            index: i,
            near: r_sch,
            e: point.e,
            ell: point.ell,
        };
        if !grid.contains(r_sch) {
            return Err(too_far());
        }
        let mut delta = start.min(cap);
        let found = loop {
            let lo = (r_sch - delta).max(grid.r_lo());
            let hi = (r_sch + delta).min(grid.r_hi());
            let (f_lo, f_hi) = (f(lo), f(hi));
            if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() != f_hi.signum() {
                break bisect(f, lo, hi, tol);
            }
            if delta >= cap {
                break None;
            }
            delta = (2.0 * delta).min(cap);
        };
        match found {
            Some(r) => out.push(Root { r, multiplicity: 1 }),
            None => return Err(too_far()),
        }
    }
    Ok(RadialRoots::new(out))
}

/// `(R_min, R_max) = (r_1, r_2)` at `(E2, l1)` for the given metric.
pub fn shell_radii(metric: &MetricField, support: &SupportBox) -> Result<(f64, f64)> {
    let roots = perturbed_roots(metric, support.extremal_point())?;
    let (r_min, r_max) = match (roots.r1(), roots.r2()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(ShellError::Domain("perturbed roots incomplete".into())),
    };
    if !(r_min > 4.0 * metric.mass()) {
        return Err(ShellError::Domain(format!(
            "R_min = {r_min} is not above 4M"
        )));
    }
    Ok((r_min, r_max))
}

/// `m(r) = M + 4 pi ∫ s^2 rho(s) ds` by cumulative Simpson on the grid.
pub fn mass_from_density(grid: &RadialGrid, mass: f64, rho: &[f64]) -> Vec<f64> {
    let integrand: Vec<f64> = rho
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let r = grid.node(i);
            4.0 * std::f64::consts::PI * r * r * g
        })
        .collect();
    cumulative_simpson(&integrand, grid.step())
        .into_iter()
        .map(|c| mass + c)
        .collect()
}

pub fn mass_function(
    metric: &MetricField,
    cfg: &AnsatzConfig,
    quad_nodes: usize,
) -> Result<Vec<f64>> {
    let profiles = MatterEvaluator::new(metric, cfg, quad_nodes)?.profiles();
    Ok(mass_from_density(
        metric.grid(),
        metric.mass(),
        &profiles.rho,
    ))
}

/// `lambda = -½ log(1 - 2m/r)`; the first node with `2m >= r` is an error.
pub fn lambda_from_mass(m: &[f64], grid: &RadialGrid) -> Result<Vec<f64>> {
    if m.len() != grid.len() {
        return Err(ShellError::Domain(format!(
            "mass has {} entries for a {}-node grid",
            m.len(),
            grid.len()
        )));
    }
    m.iter()
        .enumerate()
        .map(|(i, &mi)| {
            let r = grid.node(i);
            let ratio = 2.0 * mi / r;
            if !(ratio < 1.0) {
                return Err(ShellError::HorizonViolation { node: i, r, ratio });
            }
            Ok(-0.5 * (1.0 - ratio).ln())
        })
        .collect()
}

/// Result of one application of `T`: the new metric and the matter data it
/// was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStep {
    pub metric: MetricField,
    pub mass: Vec<f64>,
    pub profiles: MatterProfiles,
    pub shell_inner: f64,
}

pub fn apply_solution_operator(
    metric: &MetricField,
    cfg: &AnsatzConfig,
    quad_nodes: usize,
) -> Result<OperatorStep> {
    let evaluator = MatterEvaluator::new(metric, cfg, quad_nodes)?;
    let profiles = evaluator.profiles();
    let grid = *metric.grid();
    let big_m = metric.mass();
    let mass = mass_from_density(&grid, big_m, &profiles.rho);
    lambda_from_mass(&mass, &grid)?;

    let nodes = grid.nodes();
    let mut mu_prime = Vec::with_capacity(grid.len());
    let mut correction = Vec::with_capacity(grid.len());
    for (i, &r) in nodes.iter().enumerate() {
        let full = (4.0 * std::f64::consts::PI * r * profiles.p[i] + mass[i] / (r * r))
            / (1.0 - 2.0 * mass[i] / r);
        let vacuum = (big_m / (r * r)) / (1.0 - 2.0 * big_m / r);
        mu_prime.push(full);
        correction.push(full - vacuum);
    }
    let sch = Schwarzschild::new(big_m)?;
    let mu: Vec<f64> = cumulative_simpson(&correction, grid.step())
        .into_iter()
        .zip(&nodes)
        .map(|(c, &r)| sch.mu(r) + c)
        .collect();
    Ok(OperatorStep {
        metric: MetricField::new(grid, big_m, mu, mu_prime)?,
        mass,
        profiles,
        shell_inner: evaluator.shell_inner(),
    })
}

/// Everything needed to set up and run one solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellProblem {
    pub ansatz: AnsatzConfig,
    pub solver: SolverConfig,
}

impl ShellProblem {
    pub fn new(ansatz: AnsatzConfig, solver: SolverConfig) -> Result<Self> {
        solver.validate()?;
        Ok(Self { ansatz, solver })
    }

    pub fn mass(&self) -> f64 {
        self.ansatz.support.mass()
    }

    pub fn bounds(&self) -> Result<DomainBounds> {
        domain_bounds(self.mass(), &self.ansatz.support, self.solver.margin)
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        let b = self.bounds()?;
        RadialGrid::new(b.r_inner(self.mass()), b.r_outer, self.solver.n)
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Ok(Self {
            ansatz: self.ansatz.with_delta(delta)?,
            solver: self.solver,
        })
    }
}

/// Converged static shell on `[2M + rho, R]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShellSolution {
    pub problem: ShellProblem,
    pub bounds: DomainBounds,
    pub metric: MetricField,
    pub lambda: Vec<f64>,
    pub mass: Vec<f64>,
    pub r_min: f64,
    pub r_max: f64,
    /// `m(R)`.
    pub m_delta: f64,
    /// `M + 4 pi ∫_{R_min}^{R_max} r^2 rho dr` by Gauss–Legendre panels.
    pub m_delta_direct: f64,
    pub profiles: MatterProfiles,
    pub iterations: usize,
    pub final_update_norm: f64,
    /// `||mu_{k+1} - mu_k||_{C^1}` per iteration.
    pub update_norms: Vec<f64>,
}

impl ShellSolution {
    pub fn grid(&self) -> &RadialGrid {
        self.metric.grid()
    }

    pub fn delta(&self) -> f64 {
        self.problem.ansatz.delta
    }

    pub fn mass_parameter(&self) -> f64 {
        self.metric.mass()
    }

    pub fn lapse_constant(&self) -> f64 {
        let r = self.grid().r_hi();
        let mu_r = *self.metric.mu_nodes().last().unwrap_or(&0.0);
        0.5 * (1.0 - 2.0 * self.m_delta / r).ln() - mu_r
    }

    pub fn evaluator(&self) -> Result<MatterEvaluator<'_>> {
        MatterEvaluator::new(
            &self.metric,
            &self.problem.ansatz,
            self.problem.solver.quad_nodes,
        )
    }
}

pub fn solve_fixed_point(problem: &ShellProblem) -> Result<ShellSolution> {
    let mass = problem.mass();
    let bounds = problem.bounds()?;
    let delta = problem.ansatz.delta;
    if !(delta < bounds.delta_max) {
        return Err(ShellError::Domain(format!(
            "delta = {delta} is not below delta_max = {}",
            bounds.delta_max
        )));
    }
    let grid = RadialGrid::new(bounds.r_inner(mass), bounds.r_outer, problem.solver.n)?;
    let mut metric = MetricField::schwarzschild(grid, mass)?;
    let mut norms = Vec::new();
    let mut last_step = None;
    for _ in 0..problem.solver.max_iter {
        let step = apply_solution_operator(&metric, &problem.ansatz, problem.solver.quad_nodes)?;
        let norm = step.metric.c1_distance(&metric);
        norms.push(norm);
        metric = step.metric.clone();
        last_step = Some(step);
        if norm < problem.solver.tol {
            break;
        }
        if !norm.is_finite() {
            break;
        }
    }
    let last_norm = *norms.last().unwrap_or(&f64::NAN);
    if !(last_norm < problem.solver.tol) {
        return Err(ShellError::NonConvergence {
            iterations: norms.len(),
            last_norm,
        });
    }
    let step = last_step.ok_or(ShellError::NonConvergence {
        iterations: 0,
        last_norm,
    })?;
    let lambda = lambda_from_mass(&step.mass, &grid)?;
    let (r_min, r_max) = shell_radii(&metric, &problem.ansatz.support)?;
    let m_delta = *step.mass.last().unwrap_or(&mass);
    let m_delta_direct = direct_shell_mass(&metric, problem, r_min, r_max)?;
    Ok(ShellSolution {
        problem: *problem,
        bounds,
        metric,
        lambda,
        mass: step.mass,
        r_min,
        r_max,
        m_delta,
        m_delta_direct,
        profiles: step.profiles,
        iterations: norms.len(),
        final_update_norm: last_norm,
        update_norms: norms,
    })
}

fn direct_shell_mass(
    metric: &MetricField,
    problem: &ShellProblem,
    r_min: f64,
    r_max: f64,
) -> Result<f64> {
    let mass = problem.mass();
    if problem.ansatz.delta == 0.0 {
        return Ok(mass);
    }
    let ev = MatterEvaluator::new(metric, &problem.ansatz, problem.solver.quad_nodes)?;
    let rule = GaussLegendre::new(MASS_PANEL_NODES);
    let width = (r_max - r_min) / MASS_PANELS as f64;
    let mut total = 0.0;
    for k in 0..MASS_PANELS {
        let a = r_min + k as f64 * width;
        for (r, w) in rule.mapped(a, a + width) {
            total += w * r * r * ev.big_g(r)?;
        }
    }
    Ok(mass + 4.0 * std::f64::consts::PI * total)
}

/// `M^delta`, checked against the direct shell integral.
pub fn total_mass(solution: &ShellSolution) -> f64 {
    solution.m_delta
}

/// Which piece of the glued spacetime a radius falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Piece {
    InnerVacuum,
    Matter,
    OuterVacuum,
}

/// Metric functions at one radius of the glued spacetime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalPoint {
    pub piece: Piece,
    /// Continuous across both gluing radii.
    pub mu: f64,
    /// `mu + c`, tending to 0 at infinity.
    pub mu_shifted: f64,
    pub lambda: f64,
}

/// Schwarzschild of mass `M` inside, the grid solution, Schwarzschild of mass
/// `M^delta` outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMetric {
    pub mass: f64,
    pub m_delta: f64,
    pub r_inner: f64,
    pub r_outer: f64,
    pub lapse_constant: f64,
    metric: MetricField,
    lambda: Vec<f64>,
}

impl GlobalMetric {
    pub fn eval(&self, r: f64) -> Result<GlobalPoint> {
        if !(r > 2.0 * self.mass) {
            return Err(ShellError::Domain(format!(
                "r = {r} is not outside the horizon"
            )));
        }
        let c = self.lapse_constant;
        if r < self.r_inner {
            let mu = 0.5 * (1.0 - 2.0 * self.mass / r).ln();
            return Ok(GlobalPoint {
                piece: Piece::InnerVacuum,
                mu,
                mu_shifted: mu + c,
                lambda: -mu,
            });
        }
        if r > self.r_outer {
            let shifted = 0.5 * (1.0 - 2.0 * self.m_delta / r).ln();
            return Ok(GlobalPoint {
                piece: Piece::OuterVacuum,
                mu: shifted - c,
                mu_shifted: shifted,
                lambda: -shifted,
            });
        }
        let mu = self.metric.mu_at(r)?;
        let grid = self.metric.grid();
        let t = (r - grid.r_lo()) / grid.step();
        let k = (t.floor() as usize).min(grid.len() - 2);
        let frac = t - k as f64;
        // Linear in the deviation from Schwarzschild, exact where it vanishes.
        let sch = |x: f64| 0.5 * (1.0 - 2.0 * self.mass / x).ln();
        let (r0, r1) = (grid.node(k), grid.node(k + 1));
        let dev = (1.0 - frac) * (self.lambda[k] + sch(r0)) + frac * (self.lambda[k + 1] + sch(r1));
        let lambda = dev - sch(r);
        Ok(GlobalPoint {
            piece: Piece::Matter,
            mu,
            mu_shifted: mu + c,
            lambda,
        })
    }
}

pub fn extend_global(solution: &ShellSolution) -> GlobalMetric {
    let grid = solution.grid();
    GlobalMetric {
        mass: solution.mass_parameter(),
        m_delta: solution.m_delta,
        r_inner: grid.r_lo(),
        r_outer: grid.r_hi(),
        lapse_constant: solution.lapse_constant(),
        metric: solution.metric.clone(),
        lambda: solution.lambda.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(delta: f64, n: usize) -> ShellProblem {
        let b = SupportBox::new(1.0, 0.965, 0.97, 14.5, 16.0).unwrap();
        let a = AnsatzConfig::new(b, delta, 1.0).unwrap();
        ShellProblem::new(
            a,
            SolverConfig {
                n,
                ..SolverConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn bounds_straddle_roots() {
        let p = problem(0.0, 101);
        let b = p.bounds().unwrap();
        let sch = Schwarzschild::new(1.0).unwrap();
        for c in p.ansatz.support.corners() {
            let roots = sch.roots(c);
            assert!(2.0 + b.rho < roots.r0().unwrap());
            assert!(b.r_outer > roots.r2().unwrap());
        }
        assert!(b.delta_max > 0.0);
        assert!(domain_bounds(1.0, &p.ansatz.support, 0.0).is_err());
    }

    #[test]
    fn perturbed_roots_reduce_to_schwarzschild() {
        let p = problem(0.0, 2001);
        let m = MetricField::schwarzschild(p.grid().unwrap(), 1.0).unwrap();
        let sch = Schwarzschild::new(1.0).unwrap();
        let pt = ParameterPoint::new(0.968, 15.1).unwrap();
        let a = perturbed_roots(&m, pt).unwrap();
        let b = sch.roots(pt);
        for i in 0..3 {
            assert!((a.get(i).unwrap() - b.get(i).unwrap()).abs() < 1e-9);
        }
        assert!(perturbed_roots(&m, ParameterPoint::new(1.2, 15.0).unwrap()).is_err());
    }

    #[test]
    fn lambda_boundary_and_violation() {
        let grid = RadialGrid::new(4.0, 8.0, 5).unwrap();
        let lam = lambda_from_mass(&[1.0; 5], &grid).unwrap();
        assert!((lam[0] + 0.5 * 0.5f64.ln()).abs() < 1e-15);
        let sch = Schwarzschild::new(1.0).unwrap();
        assert!((lam[0] + sch.mu(4.0)).abs() < 1e-15);
        let bad = [1.0, 1.0, 3.5, 1.0, 1.0];
        assert!(matches!(
            lambda_from_mass(&bad, &grid),
            Err(ShellError::HorizonViolation { node: 2, .. })
        ));
    }

    #[test]
    fn vacuum_is_a_fixed_point() {
        let p = problem(0.0, 401);
        let sol = solve_fixed_point(&p).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.metric.schwarzschild_distance() < 1e-10);
        assert_eq!(sol.m_delta, 1.0);
        assert_eq!(sol.lapse_constant(), 0.0);
        let g = extend_global(&sol);
        let sch = Schwarzschild::new(1.0).unwrap();
        for r in [2.1, 5.0, 30.0] {
            assert!((g.eval(r).unwrap().mu - sch.mu(r)).abs() < 1e-12);
        }
        assert!(g.eval(2.0).is_err());
    }

    #[test]
    fn perturbed_vacuum_input_maps_to_schwarzschild() {
        let p = problem(0.0, 401);
        let grid = p.grid().unwrap();
        let m = MetricField::perturbed_schwarzschild(grid, 1.0, |_| 1e-3, |_| 0.0).unwrap();
        let step = apply_solution_operator(&m, &p.ansatz, 64).unwrap();
        assert!(step.metric.schwarzschild_distance() < 1e-12);
    }

    #[test]
    fn small_shell_converges() {
        let p = problem(1e-3, 801);
        let sol = solve_fixed_point(&p).unwrap();
        assert!(sol.iterations <= 50);
        assert!(sol.m_delta > 1.0);
        assert!(sol.r_min > 4.0 && sol.r_min < sol.r_max);
        assert!(sol.lambda.iter().all(|l| l.is_finite()));
    }
}
