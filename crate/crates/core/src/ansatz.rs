//! Distribution-function ingredients: the profile `Phi`, the cut-offs
//! `chi_eta` and `Psi_eta`, the support box and the gap constant `eta`.

use crate::error::{Result, ShellError};
use crate::metric::MetricField;
use crate::potential::{ParameterPoint, Schwarzschild, E_ISCO};
use crate::solver::perturbed_roots;

/// Exponent of each one-dimensional bump factor `[(x-a)(b-x)]^k`.
pub const BUMP_POWER: i32 = 3;

/// Smallest admissible `eta`, in units of `M`.
pub const MIN_ETA: f64 = 1e-6;

/// Samples per box edge checked against `A_bound`.
const EDGE_SAMPLES: usize = 16;

/// Compact parameter box `[E1, E2] x [l1, l2]` inside `A_bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBox {
    mass: f64,
    pub e1: f64,
    pub e2: f64,
    pub ell1: f64,
    pub ell2: f64,
}

impl SupportBox {
    pub fn new(mass: f64, e1: f64, e2: f64, ell1: f64, ell2: f64) -> Result<Self> {
        let sch = Schwarzschild::new(mass)?;
        let bad = |msg: String| Err(ShellError::InvalidBox(msg));
        if ![e1, e2, ell1, ell2].iter().all(|v| v.is_finite()) {
            return bad("non-finite box edge".into());
        }
        if !(E_ISCO < e1 && e1 < e2 && e2 < 1.0) {
            return bad(format!(
                "need sqrt(8/9) < E1 < E2 < 1, got E1 = {e1}, E2 = {e2}"
            ));
        }
        let l_lb = sch.l_bounds(e2)?.lower;
        let l_ub = sch.l_bounds(e1)?.upper.unwrap_or(f64::INFINITY);
        if !(l_lb < ell1 && ell1 < ell2 && ell2 < l_ub) {
            return bad(format!(
                "need l_lb(E2) = {l_lb} < l1 < l2 < l_ub(E1) = {l_ub}, got l1 = {ell1}, l2 = {ell2}"
            ));
        }
        let out = Self {
            mass,
            e1,
            e2,
            ell1,
            ell2,
        };
        for point in out.boundary_samples() {
            if !sch.in_a_bound(point) {
                return bad(format!(
                    "box point (E = {}, l = {}) is not in A_bound",
                    point.e, point.ell
                ));
            }
        }
        Ok(out)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn contains(&self, e: f64, ell: f64) -> bool {
        e >= self.e1 && e <= self.e2 && ell >= self.ell1 && ell <= self.ell2
    }

    pub fn corners(&self) -> [ParameterPoint; 4] {
        [
            ParameterPoint {
                e: self.e1,
                ell: self.ell1,
            },
            ParameterPoint {
                e: self.e1,
                ell: self.ell2,
            },
            ParameterPoint {
                e: self.e2,
                ell: self.ell1,
            },
            ParameterPoint {
                e: self.e2,
                ell: self.ell2,
            },
        ]
    }

    /// Corner where the perihelion is smallest and the aphelion largest.
    pub fn extremal_point(&self) -> ParameterPoint {
        ParameterPoint {
            e: self.e2,
            ell: self.ell1,
        }
    }

    pub fn center(&self) -> ParameterPoint {
        ParameterPoint {
            e: 0.5 * (self.e1 + self.e2),
            ell: 0.5 * (self.ell1 + self.ell2),
        }
    }

    fn boundary_samples(&self) -> Vec<ParameterPoint> {
        let mut pts = Vec::with_capacity(4 * EDGE_SAMPLES);
        for i in 0..EDGE_SAMPLES {
            let t = i as f64 / (EDGE_SAMPLES - 1) as f64;
            let e = self.e1 + t * (self.e2 - self.e1);
            let ell = self.ell1 + t * (self.ell2 - self.ell1);
            pts.push(ParameterPoint { e, ell: self.ell1 });
            pts.push(ParameterPoint { e, ell: self.ell2 });
            pts.push(ParameterPoint { e: self.e1, ell });
            pts.push(ParameterPoint { e: self.e2, ell });
        }
        pts
    }
}

/// Profile and cut-off parameters, immutable once built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnsatzConfig {
    pub support: SupportBox,
    pub delta: f64,
    pub amplitude: f64,
    pub eta: f64,
}

impl AnsatzConfig {
    /// Uses the quarter-gap `eta` from [`compute_eta`].
    pub fn new(support: SupportBox, delta: f64, amplitude: f64) -> Result<Self> {
        let eta = compute_eta(support.mass(), &support)?;
        Self::with_eta(support, delta, amplitude, eta)
    }

    pub fn with_eta(support: SupportBox, delta: f64, amplitude: f64, eta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(ShellError::Domain(format!(
                "delta must be >= 0, got {delta}"
            )));
        }
        if !(amplitude > 0.0) || !amplitude.is_finite() {
            return Err(ShellError::Domain(format!(
                "amplitude must be > 0, got {amplitude}"
            )));
        }
        let limit = compute_eta(support.mass(), &support)?;
        if !(eta > 0.0) || eta > limit * (1.0 + 1e-12) {
            return Err(ShellError::Domain(format!(
                "eta must lie in (0, {limit}], got {eta}"
            )));
        }
        Ok(Self {
            support,
            delta,
            amplitude,
            eta,
        })
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::with_eta(self.support, delta, self.amplitude, self.eta)
    }
}

/// `[(x-a)(b-x)]^k / ((b-a)/2)^{2k}` on `[a, b]`, zero outside; peaks at 1.
#[inline]
pub fn bump(x: f64, a: f64, b: f64) -> f64 {
    if x <= a || x >= b {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    let q = (x - a) * (b - x) / (half * half);
    q.powi(BUMP_POWER)
}

/// `Phi(E, l; delta) = delta * amplitude * b_E(E) * b_l(l)`.
pub fn phi(e: f64, ell: f64, cfg: &AnsatzConfig) -> f64 {
    if cfg.delta == 0.0 {
        return 0.0;
    }
    let b = &cfg.support;
    cfg.delta * cfg.amplitude * bump(e, b.e1, b.e2) * bump(ell, b.ell1, b.ell2)
}

/// Quintic smoothstep: 0 below `-eta`, 1 above 0.
pub fn chi_eta(s: f64, eta: f64) -> f64 {
    if s >= 0.0 {
        1.0
    } else if s <= -eta {
        0.0
    } else {
        let t = (s + eta) / eta;
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// `chi_eta(r - r_1(mu, E, l))` on the box, 0 off it.
pub fn psi_eta(
    r: f64,
    point: ParameterPoint,
    metric: &MetricField,
    cfg: &AnsatzConfig,
) -> Result<f64> {
    if !cfg.support.contains(point.e, point.ell) {
        return Ok(0.0);
    }
    let roots = perturbed_roots(metric, point)?;
    let r1 = roots
        .r1()
        .ok_or_else(|| ShellError::Domain("perturbed roots lack r_1".into()))?;
    Ok(chi_eta(r - r1, cfg.eta))
}

/// Quarter of the Schwarzschild gap `r_1 - r_0` at `(E2, l1)`, the box
/// point where the gap is smallest.
pub fn compute_eta(mass: f64, support: &SupportBox) -> Result<f64> {
    let sch = Schwarzschild::new(mass)?;
    let roots = sch.roots(support.extremal_point());
    let (r0, r1) = match (roots.r0(), roots.r1()) {
        (Some(r0), Some(r1)) if roots.is_three_simple() => (r0, r1),
        _ => {
            return Err(ShellError::InvalidBox(
                "no three simple roots at (E2, l1)".into(),
            ))
        }
    };
    let eta = 0.25 * (r1 - r0);
    if eta < MIN_ETA * mass {
        return Err(ShellError::InvalidBox(format!(
            "gap at (E2, l1) too small: eta = {eta:e}"
        )));
    }
    Ok(eta)
}
