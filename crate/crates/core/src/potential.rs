//! Timelike geodesic structure of the Schwarzschild exterior.
//!
//! Everything here is a pure function of the black-hole mass `M` and the
//! conserved pair `(E, l)`, where `E` is the energy per unit rest mass and `l`
//! the squared total angular momentum. Radial motion is governed by
//!
//! ```text
//! E^2 = E_l(r) + w^2,     E_l(r) = (1 - 2M/r)(1 + l/r^2)
//! ```
//!
//! so turning points are the roots of `E_l(r) = E^2`, a cubic in `u = 1/r`.
//! Roots are counted with Cardano's formula and every simple root is then
//! polished by bisection on the monotone branch of `E_l` that contains it.

use crate::error::{Result, ShellError};
use crate::quadrature::bisect;

/// `sqrt(8/9)`: the smallest energy of any timelike orbit outside the horizon.
pub const E_ISCO: f64 = 0.942_809_041_582_063_4;

/// Discriminant magnitude (normalized units, `M = 1`) below which a root of
/// the cubic is reported as double or triple.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// Relative guard against the coordinate singularity at `r = 2M`.
pub const HORIZON_GUARD: f64 = 1e-12;

/// Conserved energy and squared angular momentum of a unit-mass particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterPoint {
    pub e: f64,
    pub ell: f64,
}

impl ParameterPoint {
    pub fn new(e: f64, ell: f64) -> Result<Self> {
        if !(e > 0.0) || !e.is_finite() {
            return Err(ShellError::Domain(format!(
                "energy must be positive, got {e}"
            )));
        }
        if !(ell >= 0.0) || !ell.is_finite() {
            return Err(ShellError::Domain(format!(
                "angular momentum squared must be nonnegative, got {ell}"
            )));
        }
        Ok(Self { e, ell })
    }

    pub fn e_sq(&self) -> f64 {
        self.e * self.e
    }
}

/// Radii of the local maximum (`r_max`) and minimum (`r_min`) of `E_l`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalRadii {
    pub r_max: f64,
    pub r_min: f64,
}

/// Values of `E_l` at its critical radii (both are squared energies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremalEnergies {
    pub e_sq_max: f64,
    pub e_sq_min: f64,
}

/// Angular-momentum window of trapped orbits at fixed energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularBounds {
    pub lower: f64,
    /// Only defined for `E < 1`.
    pub upper: Option<f64>,
}

/// One root of `E_l(r) = E^2` with its multiplicity (1, 2 or 3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub r: f64,
    pub multiplicity: u8,
}

/// Distinct roots of `E_l(r) = E^2` outside the horizon, sorted ascending.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RadialRoots {
    roots: Vec<Root>,
}

impl RadialRoots {
    pub fn new(mut roots: Vec<Root>) -> Self {
        roots.sort_by(|a, b| a.r.total_cmp(&b.r));
        Self { roots }
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        self.roots.get(i).map(|root| root.r)
    }

    pub fn r0(&self) -> Option<f64> {
        self.get(0)
    }

    pub fn r1(&self) -> Option<f64> {
        self.get(1)
    }

    pub fn r2(&self) -> Option<f64> {
        self.get(2)
    }

    /// True when there are exactly three simple roots (the trapped case).
    pub fn is_three_simple(&self) -> bool {
        self.roots.len() == 3 && self.roots.iter().all(|r| r.multiplicity == 1)
    }

    pub fn has_multiple_root(&self) -> bool {
        self.roots.iter().any(|r| r.multiplicity > 1)
    }
}

/// Qualitative fate of a timelike geodesic in the Schwarzschild exterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OrbitClass {
    /// Bounded oscillation between a perihelion and an aphelion.
    TrappedOscillating,
    /// Starts at (or below) an outer turning point and falls into the horizon.
    AbsorbedFromFinite,
    /// Comes in from infinity, bounces off the barrier and escapes.
    ScatteringHyperbolic,
    /// No turning point: connects the horizon with infinity.
    PlungeFromInfinity,
    CircularStable,
    CircularUnstable,
    /// Marginally stable circular orbit at `r = 6M`.
    CircularIsco,
}

impl OrbitClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrbitClass::TrappedOscillating => "TrappedOscillating",
            OrbitClass::AbsorbedFromFinite => "AbsorbedFromFinite",
            OrbitClass::ScatteringHyperbolic => "ScatteringHyperbolic",
            OrbitClass::PlungeFromInfinity => "PlungeFromInfinity",
            OrbitClass::CircularStable => "CircularStable",
            OrbitClass::CircularUnstable => "CircularUnstable",
            OrbitClass::CircularIsco => "CircularISCO",
        }
    }

    pub fn is_circular(&self) -> bool {
        matches!(
            self,
            OrbitClass::CircularStable | OrbitClass::CircularUnstable | OrbitClass::CircularIsco
        )
    }
}

impl std::fmt::Display for OrbitClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parameter-space regions `A_bound`, `A_unbound`, `A_abs`, `A_circ`, plus
/// the turning-point-free region (`E >= 1`, `l < l_lb(E)`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterRegion {
    Bound,
    Unbound,
    Absorbing,
    Circular,
    Free,
    /// `E^2 < 8/9` or otherwise no timelike orbit outside the horizon.
    Forbidden,
}

/// Schwarzschild exterior of mass `M` in geometric units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schwarzschild {
    mass: f64,
}

impl Default for Schwarzschild {
    fn default() -> Self {
        Self { mass: 1.0 }
    }
}

impl Schwarzschild {
    pub fn new(mass: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(ShellError::Domain(format!(
                "mass must be positive, got {mass}"
            )));
        }
        Ok(Self { mass })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn horizon(&self) -> f64 {
        2.0 * self.mass
    }

    fn check_exterior(&self, r: f64) -> Result<()> {
        if !(r > self.horizon() * (1.0 + HORIZON_GUARD)) || !r.is_finite() {
            return Err(ShellError::Domain(format!(
                "radius {r} is not outside the horizon 2M = {}",
                self.horizon()
            )));
        }
        Ok(())
    }

    /// `E_l(r) = (1 - 2M/r)(1 + l/r^2)`; no horizon check.
    #[inline]
    pub fn potential_unchecked(&self, ell: f64, r: f64) -> f64 {
        (1.0 - 2.0 * self.mass / r) * (1.0 + ell / (r * r))
    }

    pub fn potential(&self, ell: f64, r: f64) -> Result<f64> {
        self.check_exterior(r)?;
        Ok(self.potential_unchecked(ell, r))
    }

    /// `dE_l/dr = (2/r^4)(M r^2 - l r + 3 M l)`.
    #[inline]
    pub fn potential_derivative_unchecked(&self, ell: f64, r: f64) -> f64 {
        let m = self.mass;
        2.0 * (m * r * r - ell * r + 3.0 * m * ell) / r.powi(4)
    }

    pub fn potential_derivative(&self, ell: f64, r: f64) -> Result<f64> {
        self.check_exterior(r)?;
        Ok(self.potential_derivative_unchecked(ell, r))
    }

    /// `e^{2 mu}` of the Schwarzschild lapse.
    pub fn lapse_sq(&self, r: f64) -> f64 {
        1.0 - 2.0 * self.mass / r
    }

    /// `mu(r) = ½ log(1 - 2M/r)`.
    pub fn mu(&self, r: f64) -> f64 {
        0.5 * (1.0 - 2.0 * self.mass / r).ln()
    }

    /// `mu'(r) = M / (r (r - 2M))`.
    pub fn mu_prime(&self, r: f64) -> f64 {
        self.mass / (r * (r - 2.0 * self.mass))
    }

    /// `lambda(r) = -½ log(1 - 2M/r)`.
    pub fn lambda(&self, r: f64) -> f64 {
        -self.mu(r)
    }

    /// Critical radii of `E_l`. Absent for `l < 12 M^2`; both equal `6M` at
    /// `l = 12 M^2`.
    pub fn critical_radii(&self, ell: f64) -> Option<CriticalRadii> {
        let m = self.mass;
        let l_c = 12.0 * m * m;
        if ell < l_c * (1.0 - 1e-14) {
            return None;
        }
        if ell <= l_c * (1.0 + 1e-14) {
            return Some(CriticalRadii {
                r_max: 6.0 * m,
                r_min: 6.0 * m,
            });
        }
        let d = (1.0 - l_c / ell).sqrt();
        // (l/2M)(1 - d) rewritten without cancellation.
        let r_max = 6.0 * m / (1.0 + d);
        let r_min = ell / (2.0 * m) * (1.0 + d);
        Some(CriticalRadii { r_max, r_min })
    }

    /// `E_l` at the critical radii via the closed forms
    /// `8/9 + (l - 12M^2) / (9 M r_crit)`.
    pub fn extremal_energies(&self, ell: f64) -> Option<ExtremalEnergies> {
        let m = self.mass;
        let crit = self.critical_radii(ell)?;
        let excess = (ell - 12.0 * m * m).max(0.0);
        Some(ExtremalEnergies {
            e_sq_max: 8.0 / 9.0 + excess / (9.0 * m * crit.r_max),
            e_sq_min: 8.0 / 9.0 + excess / (9.0 * m * crit.r_min),
        })
    }

    /// `l_lb(E)` and `l_ub(E)`: the angular momenta at which `E^2` equals the
    /// maximum and the minimum of `E_l`.
    pub fn l_bounds(&self, e: f64) -> Result<AngularBounds> {
        if !(e > E_ISCO) {
            return Err(ShellError::Domain(format!(
                "l bounds need E > sqrt(8/9), got {e}"
            )));
        }
        let m = self.mass;
        let alpha = 9.0 / 8.0 * e * e - 1.0;
        let radical = 8.0 * alpha * (alpha * alpha + alpha).sqrt();
        let base = 1.0 - 4.0 * alpha - 8.0 * alpha * alpha;
        let lower = 12.0 * m * m / (base + radical);
        let upper = if e < 1.0 {
            Some(12.0 * m * m / (base - radical))
        } else {
            None
        };
        Ok(AngularBounds { lower, upper })
    }

    /// Membership in `A_bound`: `sqrt(8/9) < E < 1`, `l > 12M^2` and
    /// `l_lb(E) < l < l_ub(E)`.
    pub fn in_a_bound(&self, point: ParameterPoint) -> bool {
        let m = self.mass;
        if !(point.e > E_ISCO && point.e < 1.0 && point.ell > 12.0 * m * m) {
            return false;
        }
        match self.l_bounds(point.e) {
            Ok(AngularBounds {
                lower,
                upper: Some(upper),
            }) => lower < point.ell && point.ell < upper,
            _ => false,
        }
    }

    /// Which parameter-space region `(E, l)` falls in.
    pub fn region(&self, point: ParameterPoint) -> ParameterRegion {
        let m = self.mass;
        let l_c = 12.0 * m * m;
        let (e, ell) = (point.e, point.ell);
        let e_sq = point.e_sq();
        if (e_sq - 8.0 / 9.0).abs() < 1e-14 && (ell - l_c).abs() < 1e-12 * l_c {
            return ParameterRegion::Circular;
        }
        if !(e > E_ISCO) {
            return ParameterRegion::Forbidden;
        }
        let bounds = match self.l_bounds(e) {
            Ok(b) => b,
            Err(_) => return ParameterRegion::Forbidden,
        };
        if ell > l_c {
            let on = |l: f64| (ell - l).abs() <= 1e-12 * l;
            if on(bounds.lower) || bounds.upper.is_some_and(on) {
                return ParameterRegion::Circular;
            }
            if e < 1.0 {
                let upper = bounds.upper.unwrap_or(f64::INFINITY);
                if ell > bounds.lower && ell < upper {
                    ParameterRegion::Bound
                } else if ell < bounds.lower {
                    ParameterRegion::Absorbing
                } else {
                    // l > l_ub(E): E^2 below the potential minimum.
                    ParameterRegion::Forbidden
                }
            } else if ell > bounds.lower {
                ParameterRegion::Unbound
            } else {
                ParameterRegion::Free
            }
        } else if e < 1.0 {
            ParameterRegion::Absorbing
        } else {
            ParameterRegion::Free
        }
    }

    /// Roots of `E_l(r) = E^2` with `r > 2M`.
    pub fn roots(&self, point: ParameterPoint) -> RadialRoots {
        let m = self.mass;
        let e_sq = point.e_sq();
        let big_l = point.ell / (m * m);
        let horizon_x = 0.5 / (1.0 + HORIZON_GUARD);
        let approx = cubic_roots_in_x(big_l, e_sq);
        let crit = self.critical_radii(point.ell);

        let mut roots = Vec::with_capacity(3);
        for (x, mult) in approx {
            if !(x > 0.0 && x < horizon_x) {
                continue;
            }
            let r_guess = m / x;
            match mult {
                3 => roots.push(Root {
                    r: 6.0 * m,
                    multiplicity: 3,
                }),
                2 => {
                    let snapped = crit
                        .map(|c| {
                            if (c.r_max - r_guess).abs() <= (c.r_min - r_guess).abs() {
                                c.r_max
                            } else {
                                c.r_min
                            }
                        })
                        .unwrap_or(r_guess);
                    roots.push(Root {
                        r: snapped,
                        multiplicity: 2,
                    });
                }
                _ => match self.polish_root(point, r_guess, crit) {
                    Some(r) => roots.push(Root { r, multiplicity: 1 }),
                    None => {
                        // No sign change on the monotone branch: the root is a
                        // numerically coalesced pair sitting on a critical radius.
                        if let Some(c) = crit {
                            let r = if (c.r_max - r_guess).abs() <= (c.r_min - r_guess).abs() {
                                c.r_max
                            } else {
                                c.r_min
                            };
                            if !roots.iter().any(|root: &Root| root.r == r) {
                                roots.push(Root { r, multiplicity: 2 });
                            }
                        }
                    }
                },
            }
        }
        RadialRoots::new(roots)
    }

    /// Monotone branch of `E_l` containing `r`.
    fn monotone_branch(&self, r: f64, crit: Option<CriticalRadii>) -> (f64, f64) {
        let lo = self.horizon() * (1.0 + HORIZON_GUARD);
        match crit {
            Some(c) if c.r_max < c.r_min => {
                if r < c.r_max {
                    (lo, c.r_max)
                } else if r < c.r_min {
                    (c.r_max, c.r_min)
                } else {
                    (c.r_min, f64::INFINITY)
                }
            }
            _ => (lo, f64::INFINITY),
        }
    }

    fn polish_root(
        &self,
        point: ParameterPoint,
        guess: f64,
        crit: Option<CriticalRadii>,
    ) -> Option<f64> {
        let e_sq = point.e_sq();
        let f = |r: f64| self.potential_unchecked(point.ell, r) - e_sq;
        let (branch_lo, branch_hi) = self.monotone_branch(guess, crit);
        let mut delta = 1e-8 * guess;
        loop {
            let lo = (guess - delta).max(branch_lo);
            let hi = (guess + delta).min(branch_hi);
            let (f_lo, f_hi) = (f(lo), f(hi));
            if f_lo == 0.0 {
                return Some(lo);
            }
            if f_hi == 0.0 {
                return Some(hi);
            }
            if f_lo.signum() != f_hi.signum() {
                return bisect(f, lo, hi, 4.0 * f64::EPSILON * guess);
            }
            if lo <= branch_lo && hi >= branch_hi {
                return None;
            }
            delta *= 8.0;
            if !delta.is_finite() || delta > 1e12 * self.mass {
                return None;
            }
        }
    }

    /// Classifies the geodesic through `r_init` with parameters `point`,
    /// using the allowed region of `E_l <= E^2` that contains `r_init`.
    pub fn classify_orbit(
        &self,
        point: ParameterPoint,
        r_init: f64,
        inward: bool,
    ) -> Result<OrbitClass> {
        let _ = inward;
        self.check_exterior(r_init)?;
        let e_sq = point.e_sq();
        let potential = self.potential_unchecked(point.ell, r_init);
        let tol = 1e-12 * e_sq.max(1.0);
        if e_sq < potential - tol {
            return Err(ShellError::Inadmissible {
                r: r_init,
                e_sq,
                potential,
            });
        }

        let roots = self.roots(point);
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * self.mass.max(a.abs());

        for root in roots.roots() {
            if root.multiplicity > 1 && rel(root.r, r_init) {
                if root.multiplicity == 3 {
                    return Ok(OrbitClass::CircularIsco);
                }
                if let Some(c) = self.critical_radii(point.ell) {
                    if rel(root.r, c.r_min) && c.r_min > c.r_max {
                        return Ok(OrbitClass::CircularStable);
                    }
                }
                return Ok(OrbitClass::CircularUnstable);
            }
        }

        // Partition (2M, inf) at the roots; classify by the allowed interval
        // whose closure holds r_init.
        let mut edges = vec![self.horizon()];
        edges.extend(roots.roots().iter().map(|r| r.r));
        edges.push(f64::INFINITY);
        let allowed = |a: f64, b: f64| {
            let probe = if b.is_finite() {
                0.5 * (a + b)
            } else {
                2.0 * a + 1e3 * self.mass
            };
            self.potential_unchecked(point.ell, probe) <= e_sq
        };
        let slack = 1e-9 * self.mass.max(r_init);
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            if r_init >= a - slack && r_init <= b + slack && allowed(a, b) {
                let lower_is_horizon = a == self.horizon();
                let upper_is_infinite = !b.is_finite();
                return Ok(match (lower_is_horizon, upper_is_infinite) {
                    (true, true) => OrbitClass::PlungeFromInfinity,
                    (true, false) => OrbitClass::AbsorbedFromFinite,
                    (false, true) => OrbitClass::ScatteringHyperbolic,
                    (false, false) => OrbitClass::TrappedOscillating,
                });
            }
        }
        Err(ShellError::Inadmissible {
            r: r_init,
            e_sq,
            potential,
        })
    }
}

/// Real roots of `2L x^3 - L x^2 + 2x - (1 - E^2) = 0` (the turning-point
/// cubic in `x = M/r`) with multiplicities. Multiplicity is decided by the
/// discriminant of the monic cubic.
pub fn cubic_roots_in_x(big_l: f64, e_sq: f64) -> Vec<(f64, u8)> {
    let c0 = -(1.0 - e_sq);
    if big_l == 0.0 {
        return vec![(-c0 / 2.0, 1)];
    }
    // Monic: x^3 + a x^2 + b x + c.
    let a = -0.5;
    let b = 1.0 / big_l;
    let c = c0 / (2.0 * big_l);
    let shift = -a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = -(4.0 * p * p * p + 27.0 * q * q);

    let mut out = Vec::with_capacity(3);
    if disc.abs() < DISCRIMINANT_TOL {
        if p.abs() < 1e-9 && q.abs() < 1e-12 {
            out.push((shift, 3));
        } else {
            let double = -3.0 * q / (2.0 * p);
            let simple = 3.0 * q / p;
            out.push((double + shift, 2));
            out.push((simple + shift, 1));
        }
    } else if disc > 0.0 {
        let amp = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (2.0 * p) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        for k in 0..3 {
            let t = amp * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos();
            out.push((t + shift, 1));
        }
    } else {
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let t = (-q / 2.0 + s).cbrt() + (-q / 2.0 - s).cbrt();
        out.push((t + shift, 1));
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}
