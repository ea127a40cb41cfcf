//! Densities tabulated on a uniform 1-D grid.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1d {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid1d {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid("grid", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        if points < 3 {
            return Err(invalid("grid", "need at least 3 points"));
        }
        Ok(Grid1d { lo, hi, points })
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.lo + self.step() * i as f64
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(move |i| self.x(i))
    }

    /// Trapezoid rule of tabulated values.
    pub fn integrate(&self, ys: &[f64]) -> f64 {
        let inner: f64 = ys.iter().sum();
        self.step() * (inner - 0.5 * (ys[0] + ys[ys.len() - 1]))
    }
}

/// Piecewise-linear density on a grid, normalized by the trapezoid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Density1d {
    grid: Grid1d,
    values: Vec<f64>,
    cdf: Vec<f64>,
}

impl Density1d {
    /// Normalizes nonnegative tabulated values.
    pub fn from_values(grid: Grid1d, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points {
            return Err(Error::DimensionMismatch { expected: grid.points, got: values.len() });
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(invalid("density", "values must be finite and nonnegative"));
        }
        let mass = grid.integrate(&values);
        if !(mass > 0.0) {
            return Err(invalid("density", "zero total mass"));
        }
        let values: Vec<f64> = values.into_iter().map(|v| v / mass).collect();
        let h = grid.step();
        let mut cdf = Vec::with_capacity(values.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in values.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cdf.push(acc);
        }
        let total = acc;
        cdf.iter_mut().for_each(|c| *c /= total);
        Ok(Density1d { grid, values, cdf })
    }

    /// Tabulates `exp(log_f)` after shifting by its maximum.
    pub fn from_log_fn(grid: Grid1d, log_f: impl Fn(f64) -> f64) -> Result<Self> {
        let logs: Vec<f64> = grid.xs().map(log_f).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !top.is_finite() {
            return Err(invalid("density", "log density is not finite anywhere"));
        }
        Self::from_values(grid, logs.iter().map(|l| (l - top).exp()).collect())
    }

    pub fn grid(&self) -> &Grid1d {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `∫ f(x) p(x) dx` by the trapezoid rule.
    pub fn expect(&self, f: impl Fn(f64) -> f64) -> f64 {
        let ys: Vec<f64> = self.grid.xs().zip(&self.values).map(|(x, p)| f(x) * p).collect();
        self.grid.integrate(&ys)
    }

    /// Probability mass on `[a, b]`, exact for the piecewise-linear density.
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        (self.cdf_at(b) - self.cdf_at(a)).max(0.0)
    }

    pub fn cdf_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g.lo {
            return 0.0;
        }
        if x >= g.hi {
            return 1.0;
        }
        let h = g.step();
        let i = (((x - g.lo) / h).floor() as usize).min(g.points - 2);
        let t = x - g.x(i);
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let slope = (p1 - p0) / h;
        // cdf is renormalized by the same trapezoid total, so values integrate to 1
        self.cdf[i] + p0 * t + 0.5 * slope * t * t
    }

    /// Inverse-CDF draw; exact for the piecewise-linear density.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let i = match self.cdf.partition_point(|&c| c <= u) {
            0 => 0,
            k => (k - 1).min(self.grid.points - 2),
        };
        let h = self.grid.step();
        let (p0, p1) = (self.values[i], self.values[i + 1]);
        let need = (u - self.cdf[i]).max(0.0);
        // solve p0·t + (p1−p0)/(2h)·t² = need on [0, h]
        let a = 0.5 * (p1 - p0) / h;
        let disc = (p0 * p0 + 4.0 * a * need).max(0.0);
        let denom = p0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * need / denom } else { 0.0 };
        self.grid.x(i) + t.clamp(0.0, h)
    }
}
