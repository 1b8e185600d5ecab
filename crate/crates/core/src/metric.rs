//! Radial grid and the sampled metric potential `mu` with its derivative.

use crate::error::{Result, ShellError};
use crate::potential::Schwarzschild;

/// Uniform nodes on `[r_lo, r_hi]`, where `r_lo = 2M + rho` and `r_hi = R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    r_lo: f64,
    r_hi: f64,
    n: usize,
}

impl RadialGrid {
    pub fn new(r_lo: f64, r_hi: f64, n: usize) -> Result<Self> {
        if n < 5 {
            return Err(ShellError::Domain(format!(
                "grid needs at least 5 nodes, got {n}"
            )));
        }
        if !(r_lo < r_hi) || !r_lo.is_finite() || !r_hi.is_finite() {
            return Err(ShellError::Domain(format!(
                "bad grid interval [{r_lo}, {r_hi}]"
            )));
        }
        Ok(Self { r_lo, r_hi, n })
    }

    pub fn r_lo(&self) -> f64 {
        self.r_lo
    }

    pub fn r_hi(&self) -> f64 {
        self.r_hi
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn step(&self) -> f64 {
        (self.r_hi - self.r_lo) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.r_hi
        } else {
            self.r_lo + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_lo && r <= self.r_hi
    }

    /// Interval index `k` with `r` in `[r_k, r_{k+1}]`.
    fn interval(&self, r: f64) -> usize {
        let k = ((r - self.r_lo) / self.step()).floor();
        (k.max(0.0) as usize).min(self.n - 2)
    }
}

/// Metric potential `mu` and `mu'` sampled on a [`RadialGrid`].
///
/// Between nodes `mu` is a cubic Hermite interpolant built from the stored
/// derivatives, with the Fritsch–Carlson limiter applied on any interval where
/// those derivatives would break monotonicity of the data. On intervals where
/// the limiter is inactive the Hermite cubic is applied to the deviation from
/// mass-`M` Schwarzschild, whose closed form is added back, so a vacuum
/// metric is reproduced to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    grid: RadialGrid,
    mass: f64,
    mu: Vec<f64>,
    mu_prime: Vec<f64>,
    dev: Vec<f64>,
    dev_prime: Vec<f64>,
    sch_distance: f64,
}

impl MetricField {
    pub fn new(grid: RadialGrid, mass: f64, mu: Vec<f64>, mu_prime: Vec<f64>) -> Result<Self> {
        if mu.len() != grid.len() || mu_prime.len() != grid.len() {
            return Err(ShellError::Domain(format!(
                "metric arrays have {} / {} entries for a {}-node grid",
                mu.len(),
                mu_prime.len(),
                grid.len()
            )));
        }
        if let Some(i) = mu.iter().chain(&mu_prime).position(|v| !v.is_finite()) {
            return Err(ShellError::Domain(format!(
                "non-finite metric value at index {i}"
            )));
        }
        let sch = Schwarzschild::new(mass)?;
        if grid.r_lo() <= sch.horizon() {
            return Err(ShellError::Domain(format!(
                "grid starts at {} inside the horizon",
                grid.r_lo()
            )));
        }
        let mut dev = Vec::with_capacity(grid.len());
        let mut dev_prime = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let r = grid.node(i);
            dev.push(mu[i] - sch.mu(r));
            dev_prime.push(mu_prime[i] - sch.mu_prime(r));
        }
        let d0 = dev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let d1 = dev_prime.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Ok(Self {
            grid,
            mass,
            mu,
            mu_prime,
            dev,
            dev_prime,
            sch_distance: d0 + d1,
        })
    }

    /// Mass-`M` Schwarzschild potential sampled on `grid`.
    pub fn schwarzschild(grid: RadialGrid, mass: f64) -> Result<Self> {
        let sch = Schwarzschild::new(mass)?;
        let nodes = grid.nodes();
        let mu = nodes.iter().map(|&r| sch.mu(r)).collect();
        let mu_prime = nodes.iter().map(|&r| sch.mu_prime(r)).collect();
        Self::new(grid, mass, mu, mu_prime)
    }

    /// Schwarzschild plus `f(r)` with derivative `df(r)`.
    pub fn perturbed_schwarzschild<F, G>(grid: RadialGrid, mass: f64, f: F, df: G) -> Result<Self>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let sch = Schwarzschild::new(mass)?;
        let nodes = grid.nodes();
        let mu = nodes.iter().map(|&r| sch.mu(r) + f(r)).collect();
        let mu_prime = nodes.iter().map(|&r| sch.mu_prime(r) + df(r)).collect();
        Self::new(grid, mass, mu, mu_prime)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    /// Mass of the inner Schwarzschild region this metric is measured against.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn mu_nodes(&self) -> &[f64] {
        &self.mu
    }

    pub fn mu_prime_nodes(&self) -> &[f64] {
        &self.mu_prime
    }

    /// `||mu - mu_Sch||_{C^1}` over the grid nodes.
    pub fn schwarzschild_distance(&self) -> f64 {
        self.sch_distance
    }

    /// Discrete C¹ distance: `max |Δmu| + max |Δmu'|` over nodes.
    pub fn c1_distance(&self, other: &MetricField) -> f64 {
        let d0 = self
            .mu
            .iter()
            .zip(&other.mu)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let d1 = self
            .mu_prime
            .iter()
            .zip(&other.mu_prime)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        d0 + d1
    }

    fn check(&self, r: f64) -> Result<()> {
        if !self.grid.contains(r) {
            return Err(ShellError::Domain(format!(
                "r = {r} outside metric grid [{}, {}]",
                self.grid.r_lo(),
                self.grid.r_hi()
            )));
        }
        Ok(())
    }

    /// Interpolated `(mu, mu')` at `r`; caller guarantees `r` is on the grid.
    #[inline]
    pub fn eval_unchecked(&self, r: f64) -> (f64, f64) {
        let k = self.grid.interval(r);
        let h = self.grid.step();
        let x0 = self.grid.node(k);
        let t = (r - x0) / h;
        let (y0, y1) = (self.mu[k], self.mu[k + 1]);
        let (m0, m1) = (self.mu_prime[k], self.mu_prime[k + 1]);
        let secant = (y1 - y0) / h;
        let limited = if secant == 0.0 {
            Some((0.0, 0.0))
        } else {
            let a = (m0 / secant).max(0.0);
            let b = (m1 / secant).max(0.0);
            let s = a * a + b * b;
            if s > 9.0 {
                let tau = 3.0 / s.sqrt();
                Some((tau * a * secant, tau * b * secant))
            } else if a == 0.0 || b == 0.0 {
                Some((a * secant, b * secant))
            } else {
                None
            }
        };
        match limited {
            Some((l0, l1)) => hermite(t, h, y0, y1, l0, l1),
            None => {
                let (d, dd) = hermite(
                    t,
                    h,
                    self.dev[k],
                    self.dev[k + 1],
                    self.dev_prime[k],
                    self.dev_prime[k + 1],
                );
                let x = 1.0 - 2.0 * self.mass / r;
                (0.5 * x.ln() + d, self.mass / (r * r * x) + dd)
            }
        }
    }

    pub fn mu_at(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.eval_unchecked(r).0)
    }

    pub fn mu_prime_at(&self, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.eval_unchecked(r).1)
    }

    /// `E_l(r) = e^{2 mu(r)} (1 + l/r^2)` for this metric.
    pub fn effective_potential(&self, ell: f64, r: f64) -> Result<f64> {
        self.check(r)?;
        Ok(self.effective_potential_unchecked(ell, r))
    }

    #[inline]
    pub fn effective_potential_unchecked(&self, ell: f64, r: f64) -> f64 {
        let mu = self.eval_unchecked(r).0;
        (2.0 * mu).exp() * (1.0 + ell / (r * r))
    }
}

/// Cubic Hermite value and slope at local coordinate `t` in `[0, 1]`.
#[inline]
fn hermite(t: f64, h: f64, y0: f64, y1: f64, m0: f64, m1: f64) -> (f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
    let d00 = (6.0 * t2 - 6.0 * t) / h;
    let d10 = 3.0 * t2 - 4.0 * t + 1.0;
    let d01 = (-6.0 * t2 + 6.0 * t) / h;
    let d11 = 3.0 * t2 - 2.0 * t;
    let slope = d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1;
    (value, slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::new(2.5, 25.0, 2001).unwrap()
    }

    #[test]
    fn schwarzschild_interpolation_is_accurate() {
        let m = MetricField::schwarzschild(grid(), 1.0).unwrap();
        let s = Schwarzschild::new(1.0).unwrap();
        assert_eq!(m.schwarzschild_distance(), 0.0);
        for i in 0..500 {
            let r = 2.5 + 22.5 * (i as f64 + 0.37) / 500.0;
            let (mu, dmu) = m.eval_unchecked(r);
            assert!((mu - s.mu(r)).abs() < 1e-14, "r={r}");
            assert!((dmu - s.mu_prime(r)).abs() < 1e-13, "r={r}");
        }
    }

    #[test]
    fn general_potential_reduces_to_schwarzschild() {
        let m = MetricField::schwarzschild(grid(), 1.0).unwrap();
        assert!((m.effective_potential(12.0, 6.0).unwrap() - 8.0 / 9.0).abs() < 1e-12);
        assert!(m.effective_potential(12.0, 30.0).is_err());
        let flat = MetricField::new(grid(), 1.0, vec![0.0; 2001], vec![0.0; 2001]).unwrap();
        for r in [2.5, 7.3, 25.0] {
            assert_eq!(flat.effective_potential(0.0, r).unwrap(), 1.0);
        }
    }

    #[test]
    fn limiter_keeps_monotone_data_monotone() {
        // Overshooting slopes on a step-like profile.
        let g = RadialGrid::new(3.0, 7.0, 5).unwrap();
        let mu = vec![0.0, 0.0, 1.0, 1.0, 1.0];
        let dmu = vec![0.0, 5.0, 5.0, 0.0, 0.0];
        let m = MetricField::new(g, 1.0, mu, dmu).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=400 {
            let v = m.mu_at(3.0 + 4.0 * i as f64 / 400.0).unwrap();
            assert!(v >= prev - 1e-15);
            assert!((-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn perturbed_potential_within_mean_value_bound() {
        // ||delta mu||_{C^1} = 1e-3 split evenly between value and slope.
        let amp = 5e-4;
        let m =
            MetricField::perturbed_schwarzschild(grid(), 1.0, |r| amp * r.sin(), |r| amp * r.cos())
                .unwrap();
        assert!(m.schwarzschild_distance() <= 1e-3 + 1e-12);
        let s = Schwarzschild::new(1.0).unwrap();
        let (ell, r) = (16.0, 5.0);
        let diff = (m.effective_potential(ell, r).unwrap() - s.potential(ell, r).unwrap()).abs();
        let bound = 2.0 * 1e-3 * (1.0 + ell / (r * r)) * (2.0 * s.mu(r)).exp();
        assert!(diff < bound, "{diff} >= {bound}");
    }
}
