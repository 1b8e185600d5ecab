//! Matter functionals `g_Phi`, `h_Phi`, `G_Phi = rho`, `H_Phi = p` and the
//! tangential pressure `p_T`.
//!
//! For fixed `r` the integration runs over `D_r` intersected with the support
//! box. In the energy direction `E = sqrt(c) + w^2` with
//! `c = e^{2mu}(1 + l1/r^2)` removes the square-root endpoint. In the
//! angular direction `l = l1 + (1 - u^2) * Delta(E)` turns the
//! `(1-s)^{-1/2}` weight into `2 du`. Both are split where the support of
//! `Phi` ends, so every piece has a smooth integrand.
//!
//! On `D_r` intersected with the box, `Psi_eta` is exactly the indicator of
//! `r >= R_min(mu)`. The perihelion `r_1(mu, E, l)` is smallest and the
//! inner root `r_0` largest at `(E2, l1)`, and the two are more than `eta`
//! apart. Every admissible `(E, l)` at radius `r` then has either
//! `r >= r_1 >= R_min`, where `chi_eta = 1`, or `r <= r_0 < r_1 - eta`,
//! where `chi_eta = 0`. [`MatterEvaluator`] uses this in place of per-point
//! root finding. [`crate::ansatz::psi_eta`] keeps the direct definition.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::ansatz::{bump, AnsatzConfig};
use crate::error::{Result, ShellError};
use crate::metric::MetricField;
use crate::quadrature::GaussLegendre;
use crate::solver::perturbed_roots;

/// Default Gauss–Legendre order of the energy integral.
pub const DEFAULT_QUAD_NODES: usize = 64;

/// Node count of the angular rule. After the `u` substitution the angular
/// integrand is a polynomial of degree at most `4k + 4` in `u`, which this
/// rule integrates exactly for the bump power `k = 3`.
const ANGULAR_NODES: usize = 16;

/// Energy density, radial and tangential pressure per grid node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatterProfiles {
    pub rho: Vec<f64>,
    pub p: Vec<f64>,
    pub p_t: Vec<f64>,
}

impl MatterProfiles {
    pub fn zeros(n: usize) -> Self {
        Self {
            rho: vec![0.0; n],
            p: vec![0.0; n],
            p_t: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// `(rho, p, p_T)` at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Moments {
    pub rho: f64,
    pub p: f64,
    pub p_t: f64,
}

/// Angular integrals at fixed `(r, E)`: `g`, `h` and the `l`-weighted `k`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct Angular {
    g: f64,
    h: f64,
    k: f64,
}

/// Matter functionals against one metric snapshot.
#[derive(Debug, Clone)]
pub struct MatterEvaluator<'a> {
    metric: &'a MetricField,
    cfg: &'a AnsatzConfig,
    energy_rule: GaussLegendre,
    angular_rule: GaussLegendre,
    shell_inner: f64,
}

impl<'a> MatterEvaluator<'a> {
    /// Locates `R_min(mu)` for the snapshot; fails when the metric is too far
    /// from Schwarzschild for the perturbed roots to exist.
    pub fn new(metric: &'a MetricField, cfg: &'a AnsatzConfig, quad_nodes: usize) -> Result<Self> {
        if quad_nodes < 2 {
            return Err(ShellError::Domain(format!(
                "need at least 2 quadrature nodes, got {quad_nodes}"
            )));
        }
        let roots = perturbed_roots(metric, cfg.support.extremal_point())?;
        let shell_inner = roots
            .r1()
            .ok_or_else(|| ShellError::Domain("perturbed roots lack r_1".into()))?;
        Ok(Self {
            metric,
            cfg,
            energy_rule: GaussLegendre::new(quad_nodes),
            angular_rule: GaussLegendre::new(ANGULAR_NODES),
            shell_inner,
        })
    }

    pub fn metric(&self) -> &MetricField {
        self.metric
    }

    /// `R_min(mu)`, below which all matter integrals vanish.
    pub fn shell_inner(&self) -> f64 {
        self.shell_inner
    }

    fn mu_checked(&self, r: f64) -> Result<f64> {
        self.metric.mu_at(r)
    }

    /// Angular integrals with `Delta = l_{D_r} - l1 > 0` and `b_E(E)` folded in.
    fn angular(&self, delta_l: f64, weight_e: f64) -> Angular {
        let b = &self.cfg.support;
        let span = b.ell2 - b.ell1;
        let u_lo = if delta_l > span {
            (1.0 - span / delta_l).sqrt()
        } else {
            0.0
        };
        let mut acc = Angular::default();
        for (u, w) in self.angular_rule.mapped(u_lo, 1.0) {
            let ell = b.ell1 + (1.0 - u * u) * delta_l;
            let f = 2.0 * w * bump(ell, b.ell1, b.ell2);
            acc.g += f;
            acc.h += f * u * u;
            acc.k += f * ell;
        }
        let scale = self.cfg.delta * self.cfg.amplitude * weight_e;
        Angular {
            g: acc.g * scale,
            h: acc.h * scale,
            k: acc.k * scale,
        }
    }

    /// `Delta(E) = r^2 e^{-2mu} (E^2 - c)` and `b_E(E)`, or `None` outside
    /// the effective support.
    fn energy_slice(&self, r: f64, mu: f64, e: f64) -> Option<Angular> {
        let b = &self.cfg.support;
        if self.cfg.delta == 0.0 || r < self.shell_inner || e <= b.e1 || e >= b.e2 {
            return None;
        }
        let c = (2.0 * mu).exp() * (1.0 + b.ell1 / (r * r));
        let gap = e * e - c;
        if gap <= 0.0 {
            return None;
        }
        let delta_l = r * r * (-2.0 * mu).exp() * gap;
        Some(self.angular(delta_l, bump(e, b.e1, b.e2)))
    }

    pub fn g_phi(&self, r: f64, e: f64) -> Result<f64> {
        let mu = self.mu_checked(r)?;
        Ok(self.energy_slice(r, mu, e).map_or(0.0, |a| a.g))
    }

    pub fn h_phi(&self, r: f64, e: f64) -> Result<f64> {
        let mu = self.mu_checked(r)?;
        Ok(self.energy_slice(r, mu, e).map_or(0.0, |a| a.h))
    }

    /// All three moments at `r` from one pass over the quadrature nodes.
    pub fn moments(&self, r: f64) -> Result<Moments> {
        let mu = self.mu_checked(r)?;
        Ok(self.moments_with_mu(r, mu))
    }

    fn moments_with_mu(&self, r: f64, mu: f64) -> Moments {
        let b = &self.cfg.support;
        if self.cfg.delta == 0.0 || r < self.shell_inner {
            return Moments::default();
        }
        let c = (2.0 * mu).exp() * (1.0 + b.ell1 / (r * r));
        let sqrt_c = c.sqrt();
        let lower = sqrt_c.max(b.e1);
        if lower >= b.e2 {
            return Moments::default();
        }
        let e_full = mu.exp() * (1.0 + b.ell2 / (r * r)).sqrt();
        let mut cuts = vec![lower];
        if e_full > lower && e_full < b.e2 {
            cuts.push(e_full);
        }
        cuts.push(b.e2);

        let exp_m2mu = (-2.0 * mu).exp();
        let (mut rho, mut p, mut p_t) = (0.0, 0.0, 0.0);
        for piece in cuts.windows(2) {
            let w_lo = (piece[0] - sqrt_c).max(0.0).sqrt();
            let w_hi = (piece[1] - sqrt_c).max(0.0).sqrt();
            for (w, weight) in self.energy_rule.mapped(w_lo, w_hi) {
                let e = sqrt_c + w * w;
                let b_e = bump(e, b.e1, b.e2);
                if b_e == 0.0 || w == 0.0 {
                    continue;
                }
                // E^2 - c = w^2 (E + sqrt c), without cancellation.
                let plus = e + sqrt_c;
                let gap = w * w * plus;
                let root = w * plus.sqrt();
                let a = self.angular(r * r * exp_m2mu * gap, b_e);
                let jac = 2.0 * w * weight;
                rho += jac * e * e * root * a.g;
                p += jac * gap * root * a.h;
                p_t += jac * root * a.k;
            }
        }
        let exp_m4mu = exp_m2mu * exp_m2mu;
        Moments {
            rho: 2.0 * PI * exp_m4mu * rho,
            p: 2.0 * PI * exp_m4mu * p,
            p_t: PI / (r * r) * exp_m2mu * p_t,
        }
    }

    pub fn big_g(&self, r: f64) -> Result<f64> {
        Ok(self.moments(r)?.rho)
    }

    pub fn big_h(&self, r: f64) -> Result<f64> {
        Ok(self.moments(r)?.p)
    }

    pub fn p_tangential(&self, r: f64) -> Result<f64> {
        Ok(self.moments(r)?.p_t)
    }

    /// Moments at every grid node, evaluated in parallel.
    pub fn profiles(&self) -> MatterProfiles {
        let grid = self.metric.grid();
        let mu = self.metric.mu_nodes();
        let moments: Vec<Moments> = (0..grid.len())
            .into_par_iter()
            .map(|i| self.moments_with_mu(grid.node(i), mu[i]))
            .collect();
        MatterProfiles {
            rho: moments.iter().map(|m| m.rho).collect(),
            p: moments.iter().map(|m| m.p).collect(),
            p_t: moments.iter().map(|m| m.p_t).collect(),
        }
    }
}

pub fn g_phi(r: f64, metric: &MetricField, e: f64, cfg: &AnsatzConfig) -> Result<f64> {
    MatterEvaluator::new(metric, cfg, DEFAULT_QUAD_NODES)?.g_phi(r, e)
}

pub fn h_phi(r: f64, metric: &MetricField, e: f64, cfg: &AnsatzConfig) -> Result<f64> {
    MatterEvaluator::new(metric, cfg, DEFAULT_QUAD_NODES)?.h_phi(r, e)
}

pub fn big_g(r: f64, metric: &MetricField, cfg: &AnsatzConfig) -> Result<f64> {
    MatterEvaluator::new(metric, cfg, DEFAULT_QUAD_NODES)?.big_g(r)
}

pub fn big_h(r: f64, metric: &MetricField, cfg: &AnsatzConfig) -> Result<f64> {
    MatterEvaluator::new(metric, cfg, DEFAULT_QUAD_NODES)?.big_h(r)
}

pub fn p_tangential(r: f64, metric: &MetricField, cfg: &AnsatzConfig) -> Result<f64> {
    MatterEvaluator::new(metric, cfg, DEFAULT_QUAD_NODES)?.p_tangential(r)
}
