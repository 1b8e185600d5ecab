//! Independent checks that a [`ShellSolution`] solves the reduced
//! Einstein–Vlasov system, plus deliberate faults that each check must catch.
//!
//! Matter terms are re-evaluated against the final metric rather than taken
//! from the solver, and derivatives come from fourth-order central
//! differences of the stored node values.

use std::f64::consts::PI;

use serde_json::Value;

use crate::error::{Result, ShellError};
use crate::matter::{MatterEvaluator, MatterProfiles};
use crate::output::{json_f64, object};
use crate::solver::{
    lambda_from_mass, mass_from_density, solve_fixed_point, ShellProblem, ShellSolution,
};

/// Probe radii per vacuum side in [`support_check`].
const SUPPORT_PROBES: usize = 25;

/// Error budgets, echoed into every report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub einstein: f64,
    pub tov: f64,
    pub vacuum: f64,
    pub vacuum_mu_prime: f64,
    pub support: f64,
    pub mass_agreement: f64,
    /// `2m/r` must stay below `1 - horizon_slack`.
    pub horizon_slack: f64,
    /// Additive guard in the TOV normalization.
    pub tov_epsilon: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            einstein: 1e-6,
            tov: 1e-3,
            vacuum: 1e-8,
            vacuum_mu_prime: 1e-7,
            support: 1e-14,
            mass_agreement: 1e-9,
            horizon_slack: 1e-6,
            tov_epsilon: 1e-30,
        }
    }
}

impl Thresholds {
    pub fn to_json(&self) -> Value {
        object([
            ("rev1", json_f64(self.einstein)),
            ("rev2", json_f64(self.einstein)),
            ("tov", json_f64(self.tov)),
            ("vacuum", json_f64(self.vacuum)),
            ("vacuum_mu_prime", json_f64(self.vacuum_mu_prime)),
            ("support", json_f64(self.support)),
            ("mass_agreement", json_f64(self.mass_agreement)),
            ("horizon_slack", json_f64(self.horizon_slack)),
            ("tov_epsilon", json_f64(self.tov_epsilon)),
        ])
    }
}

/// Deliberate corruptions used to show the checks are not vacuous.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    /// `mu` and `mu'` multiplied by this factor.
    ScaleMu(f64),
    /// Tangential pressure replaced by 0.
    ZeroTangentialPressure,
    /// Matter removed above `R_max - depth`; `m` and `lambda` recomputed.
    TruncateShell { depth: f64 },
    /// Re-solve with the profile amplitude multiplied by this factor.
    AmplitudeBlowup(f64),
}

impl Fault {
    pub const SCALE_MU: Fault = Fault::ScaleMu(1.01);
    pub const TRUNCATE_SHELL: Fault = Fault::TruncateShell { depth: 2.0 };
    pub const AMPLITUDE_BLOWUP: Fault = Fault::AmplitudeBlowup(1e6);

    pub fn name(&self) -> &'static str {
        match self {
            Fault::ScaleMu(_) => "scale_mu",
            Fault::ZeroTangentialPressure => "zero_pt",
            Fault::TruncateShell { .. } => "truncate_shell",
            Fault::AmplitudeBlowup(_) => "amplitude_blowup",
        }
    }

    /// Parses the names produced by [`Fault::name`] into the default faults.
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "scale_mu" => Ok(Fault::SCALE_MU),
            "zero_pt" => Ok(Fault::ZeroTangentialPressure),
            "truncate_shell" => Ok(Fault::TRUNCATE_SHELL),
            "amplitude_blowup" => Ok(Fault::AMPLITUDE_BLOWUP),
            other => Err(ShellError::Config(format!(
                "unknown fault `{other}` (expected scale_mu, zero_pt, truncate_shell or amplitude_blowup)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonCheck {
    pub ok: bool,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VacuumMatch {
    pub ok: bool,
    pub inner_error: f64,
    pub outer_lambda_error: f64,
    pub outer_mu_prime_error: f64,
    pub lapse_constant: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub fault: Option<Fault>,
    /// Set when the (faulted) solve itself failed.
    pub error: Option<String>,
    pub rev1_residual: f64,
    pub rev2_residual: f64,
    pub tov_residual: f64,
    pub support_ok: bool,
    pub horizon_ok: bool,
    pub max_horizon_ratio: f64,
    pub vacuum_match_ok: bool,
    pub vacuum: Option<VacuumMatch>,
    pub radii_ok: bool,
    pub mass_agreement: f64,
    pub lapse_constant: f64,
    pub thresholds: Thresholds,
}

impl ValidationReport {
    pub fn rev1_ok(&self) -> bool {
        self.rev1_residual < self.thresholds.einstein
    }

    pub fn rev2_ok(&self) -> bool {
        self.rev2_residual < self.thresholds.einstein
    }

    pub fn tov_ok(&self) -> bool {
        self.tov_residual < self.thresholds.tov
    }

    pub fn mass_ok(&self) -> bool {
        self.mass_agreement < self.thresholds.mass_agreement
    }

    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.rev1_ok()
            && self.rev2_ok()
            && self.tov_ok()
            && self.mass_ok()
            && self.support_ok
            && self.horizon_ok
            && self.vacuum_match_ok
            && self.radii_ok
    }

    fn failed_solve(fault: Option<Fault>, err: &ShellError, thresholds: Thresholds) -> Self {
        let horizon = match err {
            ShellError::HorizonViolation { ratio, .. } => Some(*ratio),
            _ => None,
        };
        Self {
            fault,
            error: Some(err.to_string()),
            rev1_residual: f64::NAN,
            rev2_residual: f64::NAN,
            tov_residual: f64::NAN,
            support_ok: false,
            horizon_ok: horizon.is_none(),
            max_horizon_ratio: horizon.unwrap_or(f64::NAN),
            vacuum_match_ok: false,
            vacuum: None,
            radii_ok: false,
            mass_agreement: f64::NAN,
            lapse_constant: f64::NAN,
            thresholds,
        }
    }

    pub fn to_json(&self) -> Value {
        let vac = self.vacuum.map(|v| {
            object([
                ("inner_error", json_f64(v.inner_error)),
                ("outer_lambda_error", json_f64(v.outer_lambda_error)),
                ("outer_mu_prime_error", json_f64(v.outer_mu_prime_error)),
            ])
        });
        object([
            ("passed", Value::Bool(self.passed())),
            (
                "fault",
                self.fault
                    .map_or(Value::Null, |f| Value::String(f.name().into())),
            ),
            (
                "error",
                self.error.clone().map_or(Value::Null, Value::String),
            ),
            (
                "residuals",
                object([
                    ("rev1", json_f64(self.rev1_residual)),
                    ("rev2", json_f64(self.rev2_residual)),
                    ("tov", json_f64(self.tov_residual)),
                ]),
            ),
            (
                "checks",
                object([
                    ("rev1_ok", Value::Bool(self.rev1_ok())),
                    ("rev2_ok", Value::Bool(self.rev2_ok())),
                    ("tov_ok", Value::Bool(self.tov_ok())),
                    ("support_ok", Value::Bool(self.support_ok)),
                    ("horizon_ok", Value::Bool(self.horizon_ok)),
                    ("vacuum_match_ok", Value::Bool(self.vacuum_match_ok)),
                    ("radii_ok", Value::Bool(self.radii_ok)),
                    ("mass_ok", Value::Bool(self.mass_ok())),
                ]),
            ),
            ("max_horizon_ratio", json_f64(self.max_horizon_ratio)),
            ("vacuum", vac.unwrap_or(Value::Null)),
            ("mass_agreement", json_f64(self.mass_agreement)),
            ("lapse_constant", json_f64(self.lapse_constant)),
            ("thresholds", self.thresholds.to_json()),
        ])
    }
}

/// Fourth-order central difference at interior node `i` (`2 <= i < n-2`).
#[inline]
fn central_diff(f: &[f64], i: usize, h: f64) -> f64 {
    (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * h)
}

/// Matter profiles re-evaluated on the solution's final metric.
pub fn fresh_profiles(sol: &ShellSolution) -> Result<MatterProfiles> {
    Ok(sol.evaluator()?.profiles())
}

/// Sup residuals of the two first-order Einstein equations.
///
/// `lambda'` and `mu'` are the exact mass-`M` Schwarzschild derivatives plus
/// a central difference of the deviation from Schwarzschild, which keeps the
/// stencil error of the steep vacuum part near `2M + rho` out of the residual.
pub fn einstein_residuals(sol: &ShellSolution, profiles: &MatterProfiles) -> (f64, f64) {
    let grid = sol.grid();
    let h = grid.step();
    let big_m = sol.mass_parameter();
    let nodes = grid.nodes();
    let mu_sch: Vec<f64> = nodes
        .iter()
        .map(|&r| 0.5 * (1.0 - 2.0 * big_m / r).ln())
        .collect();
    let mu = sol.metric.mu_nodes();
    let lam = &sol.lambda;
    let mu_dev: Vec<f64> = mu.iter().zip(&mu_sch).map(|(a, b)| a - b).collect();
    let lam_dev: Vec<f64> = lam.iter().zip(&mu_sch).map(|(a, b)| a + b).collect();
    let (mut rev1, mut rev2) = (0.0f64, 0.0f64);
    for i in 2..grid.len() - 2 {
        let r = nodes[i];
        let dmu_sch = big_m / (r * (r - 2.0 * big_m));
        let e2l = (-2.0 * lam[i]).exp();
        let dl = -dmu_sch + central_diff(&lam_dev, i, h);
        let dm = dmu_sch + central_diff(&mu_dev, i, h);
        let a = e2l * (2.0 * r * dl - 1.0) + 1.0 - 8.0 * PI * r * r * profiles.rho[i];
        let b = e2l * (2.0 * r * dm + 1.0) - 1.0 - 8.0 * PI * r * r * profiles.p[i];
        rev1 = rev1.max(a.abs());
        rev2 = rev2.max(b.abs());
    }
    (rev1, rev2)
}

/// Normalized sup residual of `p' + mu'(p + rho) + (2/r)(p - p_T) = 0` over
/// nodes strictly inside the shell.
pub fn tov_residual(sol: &ShellSolution, profiles: &MatterProfiles, epsilon: f64) -> f64 {
    let grid = sol.grid();
    let h = grid.step();
    let dmu = sol.metric.mu_prime_nodes();
    let (mut res, mut s_dp, mut s_grav) = (0.0f64, 0.0f64, 0.0f64);
    for i in 2..grid.len() - 2 {
        let r = grid.node(i);
        if !(r > sol.r_min && r < sol.r_max) {
            continue;
        }
        let dp = central_diff(&profiles.p, i, h);
        let grav = dmu[i] * (profiles.p[i] + profiles.rho[i]);
        let aniso = 2.0 / r * (profiles.p[i] - profiles.p_t[i]);
        res = res.max((dp + grav + aniso).abs());
        s_dp = s_dp.max(dp.abs());
        s_grav = s_grav.max(grav.abs());
    }
    res / (s_dp + s_grav + epsilon)
}

/// Matter vanishes at probes outside `[R_min - eta, R_max]` and is positive
/// somewhere inside when `delta > 0`.
pub fn support_check(sol: &ShellSolution, ev: &MatterEvaluator<'_>, tol: f64) -> Result<bool> {
    let grid = sol.grid();
    let eta = sol.problem.ansatz.eta;
    let mut probes = Vec::with_capacity(2 * SUPPORT_PROBES);
    let inner = (grid.r_lo(), sol.r_min - eta);
    let outer = (sol.r_max + 1e-6, grid.r_hi());
    for (a, b) in [inner, outer] {
        if b > a {
            for k in 0..SUPPORT_PROBES {
                probes.push(a + (b - a) * (k as f64 + 0.5) / SUPPORT_PROBES as f64);
            }
        }
    }
    for r in probes {
        let m = ev.moments(r)?;
        if !(m.rho < tol && m.p < tol) {
            return Ok(false);
        }
    }
    if sol.delta() > 0.0 {
        let mut positive = false;
        for k in 0..SUPPORT_PROBES {
            let r = sol.r_min + (sol.r_max - sol.r_min) * (k as f64 + 0.5) / SUPPORT_PROBES as f64;
            if ev.big_g(r)? > 0.0 {
                positive = true;
                break;
            }
        }
        return Ok(positive);
    }
    Ok(true)
}

pub fn horizon_condition(sol: &ShellSolution, slack: f64) -> HorizonCheck {
    let grid = sol.grid();
    let max_ratio = sol
        .mass
        .iter()
        .enumerate()
        .map(|(i, m)| 2.0 * m / grid.node(i))
        .fold(0.0, f64::max);
    HorizonCheck {
        ok: max_ratio < 1.0 - slack,
        max_ratio,
    }
}

/// Inner nodes against mass-`M` Schwarzschild, outer nodes against mass
/// `M^delta` Schwarzschild with `M^delta` from the direct shell integral.
pub fn vacuum_match(sol: &ShellSolution, thresholds: &Thresholds) -> VacuumMatch {
    let grid = sol.grid();
    let big_m = sol.mass_parameter();
    let m_delta = sol.m_delta_direct;
    let mu = sol.metric.mu_nodes();
    let dmu = sol.metric.mu_prime_nodes();
    let (mut inner, mut outer_l, mut outer_d) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..grid.len() {
        let r = grid.node(i);
        if r < sol.r_min {
            let mu_s = 0.5 * (1.0 - 2.0 * big_m / r).ln();
            inner = inner
                .max((mu[i] - mu_s).abs())
                .max((sol.lambda[i] + mu_s).abs());
        } else if r > sol.r_max {
            let target = 1.0 - 2.0 * m_delta / r;
            outer_l = outer_l.max(((-2.0 * sol.lambda[i]).exp() - target).abs());
            let d_s = m_delta / (r * (r - 2.0 * m_delta));
            outer_d = outer_d.max((dmu[i] - d_s).abs());
        }
    }
    VacuumMatch {
        ok: inner < thresholds.vacuum
            && outer_l < thresholds.vacuum
            && outer_d < thresholds.vacuum_mu_prime,
        inner_error: inner,
        outer_lambda_error: outer_l,
        outer_mu_prime_error: outer_d,
        lapse_constant: sol.lapse_constant(),
    }
}

/// Runs every check on `sol`.
pub fn validate(sol: &ShellSolution, thresholds: Thresholds) -> Result<ValidationReport> {
    let profiles = fresh_profiles(sol)?;
    report(sol, &profiles, None, thresholds)
}

fn report(
    sol: &ShellSolution,
    profiles: &MatterProfiles,
    fault: Option<Fault>,
    thresholds: Thresholds,
) -> Result<ValidationReport> {
    let (rev1, rev2) = einstein_residuals(sol, profiles);
    let tov = tov_residual(sol, profiles, thresholds.tov_epsilon);
    let ev = sol.evaluator()?;
    let support_ok = support_check(sol, &ev, thresholds.support)?;
    let horizon = horizon_condition(sol, thresholds.horizon_slack);
    let vacuum = vacuum_match(sol, &thresholds);
    let radii_ok = sol.r_min > 4.0 * sol.mass_parameter() && sol.r_min < sol.r_max;
    Ok(ValidationReport {
        fault,
        error: None,
        rev1_residual: rev1,
        rev2_residual: rev2,
        tov_residual: tov,
        support_ok,
        horizon_ok: horizon.ok,
        max_horizon_ratio: horizon.max_ratio,
        vacuum_match_ok: vacuum.ok,
        vacuum: Some(vacuum),
        radii_ok,
        mass_agreement: (sol.m_delta - sol.m_delta_direct).abs(),
        lapse_constant: vacuum.lapse_constant,
        thresholds,
    })
}

/// Applies `fault` to `sol` (or re-solves `problem` for amplitude faults) and
/// runs the checks on the result.
pub fn validate_with_fault(
    problem: &ShellProblem,
    sol: &ShellSolution,
    fault: Fault,
    thresholds: Thresholds,
) -> Result<ValidationReport> {
    match fault {
        Fault::ScaleMu(factor) => {
            let mut bad = sol.clone();
            let mu = bad.metric.mu_nodes().iter().map(|v| v * factor).collect();
            let dmu = bad
                .metric
                .mu_prime_nodes()
                .iter()
                .map(|v| v * factor)
                .collect();
            bad.metric =
                crate::metric::MetricField::new(*sol.grid(), sol.mass_parameter(), mu, dmu)?;
            let profiles = fresh_profiles(&bad)?;
            report(&bad, &profiles, Some(fault), thresholds)
        }
        Fault::ZeroTangentialPressure => {
            let mut profiles = fresh_profiles(sol)?;
            profiles.p_t.iter_mut().for_each(|v| *v = 0.0);
            report(sol, &profiles, Some(fault), thresholds)
        }
        Fault::TruncateShell { depth } => {
            let cut = sol.r_max - depth;
            let mut profiles = fresh_profiles(sol)?;
            let mut bad = sol.clone();
            for i in 0..sol.grid().len() {
                if sol.grid().node(i) > cut {
                    profiles.rho[i] = 0.0;
                    profiles.p[i] = 0.0;
                    profiles.p_t[i] = 0.0;
                }
            }
            bad.mass = mass_from_density(sol.grid(), sol.mass_parameter(), &profiles.rho);
            bad.lambda = lambda_from_mass(&bad.mass, sol.grid())?;
            bad.m_delta = *bad.mass.last().unwrap_or(&sol.m_delta);
            report(&bad, &profiles, Some(fault), thresholds)
        }
        Fault::AmplitudeBlowup(factor) => {
            let mut blown = *problem;
            blown.ansatz.amplitude *= factor;
            match solve_fixed_point(&blown) {
                Ok(s) => {
                    let profiles = fresh_profiles(&s)?;
                    report(&s, &profiles, Some(fault), thresholds)
                }
                Err(e) => Ok(ValidationReport::failed_solve(Some(fault), &e, thresholds)),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{AnsatzConfig, SupportBox};
    use crate::solver::SolverConfig;

    fn problem(delta: f64) -> ShellProblem {
        let b = SupportBox::new(1.0, 0.965, 0.97, 14.5, 16.0).unwrap();
        let a = AnsatzConfig::new(b, delta, 1.0).unwrap();
        ShellProblem::new(
            a,
            SolverConfig {
                n: 1001,
                ..SolverConfig::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn vacuum_passes_everything() {
        let p = problem(0.0);
        let sol = solve_fixed_point(&p).unwrap();
        let rep = validate(&sol, Thresholds::default()).unwrap();
        assert!(
            rep.rev1_residual < 1e-9 && rep.rev2_residual < 1e-9,
            "{rep:?}"
        );
        assert_eq!(rep.tov_residual, 0.0);
        assert!(rep.passed(), "{rep:?}");
        assert_eq!(rep.lapse_constant, 0.0);
        let h = horizon_condition(&sol, 1e-6);
        assert!((h.max_ratio - 2.0 / sol.grid().r_lo()).abs() < 1e-15);
    }

    #[test]
    fn fault_names_round_trip() {
        for f in [
            Fault::SCALE_MU,
            Fault::ZeroTangentialPressure,
            Fault::TRUNCATE_SHELL,
            Fault::AMPLITUDE_BLOWUP,
        ] {
            assert_eq!(Fault::parse(f.name()).unwrap(), f);
        }
        assert!(Fault::parse("nope").is_err());
    }
}
