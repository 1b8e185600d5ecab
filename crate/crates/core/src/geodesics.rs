//! Fixed-step RK4 integration of the reduced radial geodesic system
//!
//! ```text
//! dr/dtau = w,    dw/dtau = -½ dE_l/dr
//! ```
//!
//! used to cross-check the analytic orbit classification.

use std::io::Write;

use crate::error::{Result, ShellError};
use crate::potential::{OrbitClass, ParameterPoint, Schwarzschild};

/// Radius (in units of `M`) beyond which motion is declared unbounded.
pub const ESCAPE_RADIUS: f64 = 1e3;

/// Relative distance to `2M` at which the integration stops at the horizon.
pub const HORIZON_STOP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialState {
    pub r: f64,
    /// `dr/dtau`.
    pub w: f64,
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    HorizonReached,
    TauMaxReached,
    Escaped,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::HorizonReached => "horizon",
            Termination::TauMaxReached => "tau_max",
            Termination::Escaped => "escaped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOptions {
    pub tau_max: f64,
    pub step: f64,
    /// Keep every `stride`-th state in [`Trajectory::samples`]; diagnostics
    /// always see every step.
    pub stride: usize,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            tau_max: 2e3,
            step: 1e-3,
            stride: 1,
        }
    }
}

/// An integrated radial orbit with per-step diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub point: ParameterPoint,
    pub samples: Vec<RadialState>,
    pub termination: Termination,
    /// Radii at which `w` changed sign (extremal step sample).
    pub turning_points: Vec<f64>,
    /// `sup |E^2 - E_l(r) - w^2|` over all steps.
    pub max_conservation_error: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r_start: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> Option<&RadialState> {
        self.samples.last()
    }

    /// Writes `tau,r,w` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tau,r,w")?;
        for s in &self.samples {
            writeln!(
                out,
                "{},{},{}",
                crate::output::fmt_f64(s.tau),
                crate::output::fmt_f64(s.r),
                crate::output::fmt_f64(s.w)
            )?;
        }
        Ok(())
    }
}

/// `(dr/dtau, dw/dtau) = (w, -½ E_l'(r))`.
pub fn radial_rhs(sch: &Schwarzschild, ell: f64, state: &RadialState) -> Result<(f64, f64)> {
    let accel = -0.5 * sch.potential_derivative(ell, state.r)?;
    Ok((state.w, accel))
}

/// Integrates from `r0` with initial velocity `w_sign * sqrt(E^2 - E_l(r0))`.
pub fn integrate_orbit(
    sch: &Schwarzschild,
    point: ParameterPoint,
    r0: f64,
    w_sign: f64,
    tau_max: f64,
    step: f64,
) -> Result<Trajectory> {
    integrate_orbit_with(
        sch,
        point,
        r0,
        w_sign,
        OrbitOptions {
            tau_max,
            step,
            stride: 1,
        },
    )
}

pub fn integrate_orbit_with(
    sch: &Schwarzschild,
    point: ParameterPoint,
    r0: f64,
    w_sign: f64,
    opts: OrbitOptions,
) -> Result<Trajectory> {
    if !(opts.step > 0.0) || !(opts.tau_max > 0.0) {
        return Err(ShellError::Domain(
            "step and tau_max must be positive".into(),
        ));
    }
    let e_sq = point.e_sq();
    let ell = point.ell;
    let potential = sch.potential(ell, r0)?;
    let slack = e_sq - potential;
    if slack < -1e-12 {
        return Err(ShellError::Inadmissible {
            r: r0,
            e_sq,
            potential,
        });
    }
    // Within the admissibility tolerance the start is a turning point; the
    // square root would otherwise turn roundoff into a velocity of ~1e-8.
    let w0 = if slack <= 1e-12 {
        0.0
    } else {
        w_sign.signum() * slack.sqrt()
    };
    let horizon_stop = sch.horizon() * (1.0 + HORIZON_STOP);
    let escape = ESCAPE_RADIUS * sch.mass();
    let stride = opts.stride.max(1);

    let accel = |r: f64| -0.5 * sch.potential_derivative_unchecked(ell, r);
    let residual = |r: f64, w: f64| (e_sq - sch.potential_unchecked(ell, r) - w * w).abs();

    let mut state = RadialState {
        r: r0,
        w: w0,
        tau: 0.0,
    };
    let mut samples = vec![state];
    let mut turning_points = Vec::new();
    let mut max_err = residual(r0, w0);
    let (mut r_min, mut r_max) = (r0, r0);
    let h = opts.step;
    let n_steps = (opts.tau_max / h).ceil() as u64;
    let mut termination = Termination::TauMaxReached;

    for k in 1..=n_steps {
        let (r, w) = (state.r, state.w);
        let k1r = w;
        let k1w = accel(r);
        let k2r = w + 0.5 * h * k1w;
        let k2w = accel(r + 0.5 * h * k1r);
        let k3r = w + 0.5 * h * k2w;
        let k3w = accel(r + 0.5 * h * k2r);
        let k4r = w + h * k3w;
        let k4w = accel(r + h * k3r);
        let r_new = r + h / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r);
        let w_new = w + h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        let next = RadialState {
            r: r_new,
            w: w_new,
            tau: k as f64 * h,
        };

        if r_new <= horizon_stop {
            termination = Termination::HorizonReached;
            samples.push(next);
            break;
        }
        if w != 0.0 && w_new != 0.0 && w.signum() != w_new.signum() {
            // Extremal sample of the pair: smaller r at a perihelion.
            let turn = if w < 0.0 { r.min(r_new) } else { r.max(r_new) };
            turning_points.push(turn);
        }
        max_err = max_err.max(residual(r_new, w_new));
        r_min = r_min.min(r_new);
        r_max = r_max.max(r_new);
        state = next;
        if (k as usize).is_multiple_of(stride) {
            samples.push(state);
        }
        if r_new > escape {
            termination = Termination::Escaped;
            break;
        }
    }
    if samples.last().map(|s| s.tau) != Some(state.tau)
        && termination != Termination::HorizonReached
    {
        samples.push(state);
    }

    Ok(Trajectory {
        point,
        samples,
        termination,
        turning_points,
        max_conservation_error: max_err,
        r_min,
        r_max,
        r_start: r0,
    })
}

/// Outcome of matching a trajectory against an analytic class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCheck {
    pub expected: OrbitClass,
    pub agrees: bool,
    pub detail: String,
    /// Radial range covered by the integrated segment(s).
    pub r_min: f64,
    pub r_max: f64,
    pub max_conservation_error: f64,
}

/// Qualitative signature test of one forward trajectory.
///
/// A single segment cannot always tell an inward absorbed orbit from a
/// plunge; [`verify_geodesic`] integrates both time directions for that.
pub fn verify_class(traj: &Trajectory, expected: OrbitClass) -> ClassCheck {
    let turns = traj.turning_points.len();
    let agrees = match expected {
        OrbitClass::TrappedOscillating => {
            traj.termination == Termination::TauMaxReached && turns >= 2 && traj.r_max > traj.r_min
        }
        OrbitClass::AbsorbedFromFinite => {
            traj.termination == Termination::HorizonReached && turns <= 1
        }
        OrbitClass::ScatteringHyperbolic => traj.termination == Termination::Escaped && turns <= 1,
        OrbitClass::PlungeFromInfinity => {
            traj.termination != Termination::TauMaxReached && turns == 0
        }
        OrbitClass::CircularStable | OrbitClass::CircularUnstable | OrbitClass::CircularIsco => {
            traj.termination == Termination::TauMaxReached
                && (traj.r_max - traj.r_start).abs() < 1e-6
                && (traj.r_start - traj.r_min).abs() < 1e-6
        }
    };
    ClassCheck {
        expected,
        agrees,
        detail: format!(
            "termination={} turning_points={} r in [{:.6}, {:.6}]",
            traj.termination.as_str(),
            turns,
            traj.r_min,
            traj.r_max
        ),
        r_min: traj.r_min,
        r_max: traj.r_max,
        max_conservation_error: traj.max_conservation_error,
    }
}

/// Integrates the geodesic through `r_init` in both directions of proper
/// time and checks the combined signature against `expected`.
pub fn verify_geodesic(
    sch: &Schwarzschild,
    point: ParameterPoint,
    r_init: f64,
    expected: OrbitClass,
    opts: OrbitOptions,
) -> Result<ClassCheck> {
    let fwd = integrate_orbit_with(sch, point, r_init, 1.0, opts)?;
    let bwd = integrate_orbit_with(sch, point, r_init, -1.0, opts)?;
    let ends = [fwd.termination, bwd.termination];
    let count = |t: Termination| ends.iter().filter(|&&e| e == t).count();
    let turns = fwd.turning_points.len() + bwd.turning_points.len();
    let at_turning_point = (point.e_sq() - sch.potential(point.ell, r_init)?).abs() < 1e-12;
    let agrees = match expected {
        OrbitClass::TrappedOscillating => count(Termination::TauMaxReached) == 2 && turns >= 2,
        OrbitClass::AbsorbedFromFinite => {
            count(Termination::HorizonReached) == 2 && (turns == 1 || at_turning_point)
        }
        OrbitClass::ScatteringHyperbolic => {
            count(Termination::Escaped) == 2 && (turns == 1 || at_turning_point)
        }
        OrbitClass::PlungeFromInfinity => {
            count(Termination::HorizonReached) == 1
                && count(Termination::Escaped) == 1
                && turns == 0
        }
        _ => verify_class(&fwd, expected).agrees && verify_class(&bwd, expected).agrees,
    };
    Ok(ClassCheck {
        expected,
        agrees,
        detail: format!(
            "forward[{}] backward[{}] turning_points={}",
            fwd.termination.as_str(),
            bwd.termination.as_str(),
            turns
        ),
        r_min: fwd.r_min.min(bwd.r_min),
        r_max: fwd.r_max.max(bwd.r_max),
        max_conservation_error: fwd.max_conservation_error.max(bwd.max_conservation_error),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::E_ISCO;

    fn sch() -> Schwarzschild {
        Schwarzschild::new(1.0).unwrap()
    }

    #[test]
    fn rhs_vanishes_at_circular_points() {
        let s = sch();
        let (dr, dw) = radial_rhs(
            &s,
            12.0,
            &RadialState {
                r: 6.0,
                w: 0.0,
                tau: 0.0,
            },
        )
        .unwrap();
        assert_eq!(dr, 0.0);
        assert!(dw.abs() < 1e-16);
        let (_, dw) = radial_rhs(
            &s,
            16.0,
            &RadialState {
                r: 4.0,
                w: 0.0,
                tau: 0.0,
            },
        )
        .unwrap();
        assert!(dw.abs() < 1e-16);
        let h = 1e-6;
        let fd = (s.potential_unchecked(16.0, 4.0 + h) - s.potential_unchecked(16.0, 4.0 - h))
            / (2.0 * h);
        assert!(fd.abs() < 1e-9);
        let (dr, dw) = radial_rhs(
            &s,
            16.0,
            &RadialState {
                r: 7.0,
                w: 0.0,
                tau: 0.0,
            },
        )
        .unwrap();
        assert_eq!(dr, 0.0);
        assert!(dw.abs() > 1e-4);
        assert!(radial_rhs(
            &s,
            16.0,
            &RadialState {
                r: 2.0,
                w: 0.0,
                tau: 0.0
            }
        )
        .is_err());
    }

    #[test]
    fn trapped_orbit_turns_at_analytic_roots() {
        let s = sch();
        let p = ParameterPoint::new(0.97, 16.0).unwrap();
        let roots = s.roots(p);
        let (r1, r2) = (roots.r1().unwrap(), roots.r2().unwrap());
        let traj = integrate_orbit_with(
            &s,
            p,
            0.5 * (r1 + r2),
            1.0,
            OrbitOptions {
                tau_max: 3000.0,
                step: 1e-3,
                stride: 100,
            },
        )
        .unwrap();
        assert_eq!(traj.termination, Termination::TauMaxReached);
        assert!((traj.r_min - r1).abs() < 1e-4, "{} vs {r1}", traj.r_min);
        assert!((traj.r_max - r2).abs() < 1e-4, "{} vs {r2}", traj.r_max);
        assert!(
            traj.max_conservation_error < 1e-9,
            "{}",
            traj.max_conservation_error
        );
        assert!(verify_class(&traj, OrbitClass::TrappedOscillating).agrees);
        assert!(!verify_class(&traj, OrbitClass::AbsorbedFromFinite).agrees);
    }

    #[test]
    fn isco_stays_circular() {
        let s = sch();
        let p = ParameterPoint::new(E_ISCO, 12.0).unwrap();
        let traj = integrate_orbit(&s, p, 6.0, 1.0, 100.0, 1e-3).unwrap();
        assert!((traj.r_max - 6.0).abs() < 1e-8 && (traj.r_min - 6.0).abs() < 1e-8);
        assert!(verify_class(&traj, OrbitClass::CircularIsco).agrees);
    }

    #[test]
    fn absorbed_orbit_reaches_horizon() {
        let s = sch();
        let p = ParameterPoint::new(0.97, 16.0).unwrap();
        let r0 = s.roots(p).r0().unwrap();
        let traj = integrate_orbit(&s, p, 0.5 * (2.0 + r0), -1.0, 1e3, 1e-3).unwrap();
        assert_eq!(traj.termination, Termination::HorizonReached);
        assert!(traj.final_state().unwrap().tau < 1e3);
        assert!(traj.max_conservation_error < 1e-9);
        let check = verify_geodesic(
            &s,
            p,
            0.5 * (2.0 + r0),
            OrbitClass::AbsorbedFromFinite,
            OrbitOptions {
                tau_max: 1e3,
                step: 1e-3,
                stride: 1000,
            },
        )
        .unwrap();
        assert!(check.agrees, "{}", check.detail);
    }

    #[test]
    fn scattering_orbit_escapes() {
        let s = sch();
        let p = ParameterPoint::new(1.01, 20.0).unwrap();
        let roots = s.roots(p);
        let outer = roots.roots().last().unwrap().r;
        let traj = integrate_orbit_with(
            &s,
            p,
            outer,
            1.0,
            OrbitOptions {
                tau_max: 1e4,
                step: 1e-3,
                stride: 1000,
            },
        )
        .unwrap();
        assert_eq!(traj.termination, Termination::Escaped);
        assert!(verify_class(&traj, OrbitClass::ScatteringHyperbolic).agrees);
    }

    #[test]
    fn inadmissible_start_is_rejected() {
        let s = sch();
        let p = ParameterPoint::new(0.97, 16.0).unwrap();
        let roots = s.roots(p);
        let forbidden = 0.5 * (roots.r0().unwrap() + roots.r1().unwrap());
        assert!(matches!(
            integrate_orbit(&s, p, forbidden, 1.0, 1.0, 1e-3),
            Err(ShellError::Inadmissible { .. })
        ));
    }

    #[test]
    fn csv_dump_has_header() {
        let s = sch();
        let p = ParameterPoint::new(0.97, 16.0).unwrap();
        let traj = integrate_orbit(&s, p, 10.0, 1.0, 0.002, 1e-3).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("tau,r,w"));
        assert_eq!(lines.count(), 3);
    }
}
