use crate::density::Density1d;
use crate::error::{invalid, Error, Result};

fn check_order(q: f64) -> Result<()> {
    if q > 1.0 && q.is_finite() {
        Ok(())
    } else {
        Err(invalid("q", format!("Rényi order must be finite and exceed 1, got {q}")))
    }
}

/// `(1/(q−1)) ln Σ P_b^q R_b^{1−q}` over cells, in log space. `+∞` if `P`
/// charges a cell where `R` has no mass.
fn discrete_renyi(q: f64, cells: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut logs = Vec::new();
    for (p, r) in cells {
        if p > 0.0 {
            if r <= 0.0 {
                return f64::INFINITY;
            }
            logs.push(q * p.ln() + (1.0 - q) * r.ln());
        }
    }
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return 0.0;
    }
    let lse = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln();
    (lse / (q - 1.0)).max(0.0)
}

/// Trapezoid estimate of `R_q(p‖r)` for densities on a common grid.
pub fn grid_renyi_1d(p: &Density1d, r: &Density1d, q: f64) -> Result<f64> {
    check_order(q)?;
    if p.grid() != r.grid() {
        return Err(Error::Precondition("densities must share a grid".into()));
    }
    if p.values() == r.values() {
        return Ok(0.0);
    }
    // trapezoid weights turn both densities into discrete laws
    let last = p.values().len() - 1;
    let w = |i: usize| if i == 0 || i == last { 0.5 } else { 1.0 };
    let mass = |v: &[f64]| v.iter().enumerate().map(|(i, x)| w(i) * x).sum::<f64>();
    let (mp, mr) = (mass(p.values()), mass(r.values()));
    let cells = p.values().iter().zip(r.values()).enumerate().map(|(i, (a, b))| (w(i) * a / mp, w(i) * b / mr));
    Ok(discrete_renyi(q, cells))
}

/// Plug-in histogram estimate of `R_q(μ̂‖π)`: `bins` equal-width cells over the
/// sample range, with `π`'s cell masses taken from its exact CDF.
pub fn histogram_renyi(samples: &[f64], reference: &Density1d, bins: usize, q: f64) -> Result<f64> {
    check_order(q)?;
    if samples.is_empty() {
        return Err(Error::Empty("samples"));
    }
    if bins == 0 {
        return Err(invalid("bins", "must be positive"));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(invalid("samples", "must be finite"));
    }
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        // a point mass is singular with respect to any density
        return Ok(f64::INFINITY);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in samples {
        let b = (((s - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = samples.len() as f64;
    let cells = counts.iter().enumerate().map(|(b, &c)| {
        let a = lo + width * b as f64;
        let e = if b + 1 == bins { hi } else { a + width };
        (c as f64 / n, reference.interval_mass(a, e))
    });
    Ok(discrete_renyi(q, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::Grid1d;
    use crate::noisy_gd::gaussian_renyi_1d;
    use crate::rng::stream_rng;
    use rand_distr::{Distribution, Normal};

    fn gauss(g: Grid1d, m: f64, v: f64) -> Density1d {
        Density1d::from_log_fn(g, |x| -(x - m).powi(2) / (2.0 * v)).unwrap()
    }

    fn grid() -> Grid1d {
        Grid1d::new(-14.0, 15.0, 1 << 14).unwrap()
    }

    #[test]
    fn equal_and_shifted() {
        let p = gauss(grid(), 0.0, 1.0);
        assert_eq!(grid_renyi_1d(&p, &p, 2.0).unwrap(), 0.0);
        let r = gauss(grid(), 1.0, 1.0);
        assert!((grid_renyi_1d(&p, &r, 2.0).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn monotone_in_order() {
        let p = gauss(grid(), 0.3, 1.2);
        let r = gauss(grid(), -0.2, 1.5);
        let vals: Vec<f64> = [1.5, 2.0, 4.0, 8.0].iter().map(|&q| grid_renyi_1d(&p, &r, q).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
        let exact = gaussian_renyi_1d(4.0, 0.3, 1.2, -0.2, 1.5).unwrap();
        assert!((vals[2] - exact).abs() < 1e-3);
    }

    #[test]
    fn absolute_continuity_violation_is_infinite() {
        let g = Grid1d::new(0.0, 1.0, 5).unwrap();
        let p = Density1d::from_values(g, vec![1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let r = Density1d::from_values(g, vec![0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(grid_renyi_1d(&p, &r, 2.0).unwrap().is_infinite());
        assert!(grid_renyi_1d(&r, &p, 2.0).unwrap().is_finite());
    }

    #[test]
    fn histogram_of_exact_samples_is_near_zero() {
        let reference = gauss(Grid1d::new(-12.0, 12.0, 1 << 14).unwrap(), 0.0, 1.0);
        let mut rng = stream_rng(11, 0);
        let xs: Vec<f64> = (0..100_000).map(|_| reference.sample(&mut rng)).collect();
        let est = histogram_renyi(&xs, &reference, 256, 2.0).unwrap();
        assert!(est < 0.01, "{est}");
        let shifted: Vec<f64> = {
            let nd = Normal::new(1.0, 1.0).unwrap();
            (0..100_000).map(|_| nd.sample(&mut rng)).collect()
        };
        let est = histogram_renyi(&shifted, &reference, 256, 2.0).unwrap();
        assert!((est - 1.0).abs() < 0.05, "{est}");
    }
}
