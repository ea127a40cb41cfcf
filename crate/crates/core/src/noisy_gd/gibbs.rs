use serde::{Deserialize, Serialize};

use crate::density::{Density1d, Grid1d};
use crate::error::{invalid, Error, Result};
use crate::model::{Database, Objective};
use crate::scalar::Scalar;

/// Resolution of the Gibbs grid: `points` nodes spanning `center ± half_width_sds`
/// standard deviations of the envelope `N(0, σ²/λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GibbsGrid {
    pub points: usize,
    pub half_width_sds: f64,
    #[serde(default)]
    pub center: f64,
}

impl Default for GibbsGrid {
    fn default() -> Self {
        GibbsGrid { points: 1 << 14, half_width_sds: 12.0, center: 0.0 }
    }
}

/// Density `π(D)(θ) ∝ exp(−L_D(θ)/σ²)` in one dimension.
pub fn gibbs_oracle_1d<T: Scalar>(
    obj: &Objective<T>,
    db: &Database<T>,
    sigma2: T,
    grid: &GibbsGrid,
) -> Result<Density1d> {
    if obj.dim() != 1 || db.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: obj.dim().max(db.dim()) });
    }
    if !(obj.reg_lambda > T::zero()) {
        return Err(Error::Precondition("Gibbs density needs reg_lambda > 0 to be normalizable".into()));
    }
    if !(sigma2 > T::zero()) {
        return Err(invalid("sigma2", "must be positive"));
    }
    if !(grid.half_width_sds >= 12.0) {
        return Err(invalid("grid", "must cover at least 12 envelope standard deviations"));
    }
    let s2 = sigma2.as_f64();
    let sd = (s2 / obj.reg_lambda.as_f64()).sqrt();
    let half = grid.half_width_sds * sd;
    let g = Grid1d::new(grid.center - half, grid.center + half, grid.points)?;
    Density1d::from_log_fn(g, |x| -obj.value_unchecked(db, &[T::lit(x)]).as_f64() / s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LossModel;
    use std::f64::consts::PI;

    #[test]
    fn constant_loss_gives_gaussian() {
        let obj = Objective::new(LossModel::bounded_nonconvex(1, 0.3).unwrap(), 1.0, None).unwrap();
        let db = Database::from_rows(vec![vec![0.0]; 4]).unwrap();
        let s2 = 0.5;
        let d = gibbs_oracle_1d(&obj, &db, s2, &GibbsGrid::default()).unwrap();
        let sup = d
            .grid()
            .xs()
            .zip(d.values())
            .map(|(x, p)| (p - (-x * x / (2.0 * s2)).exp() / (2.0 * PI * s2).sqrt()).abs())
            .fold(0.0, f64::max);
        assert!(sup < 1e-6, "sup {sup}");
        assert!((d.mass() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bounded_loss_ratio() {
        let a: f64 = 0.4;
        let (s2, lambda) = (0.8, 2.0);
        let obj = Objective::new(LossModel::bounded_nonconvex(1, a).unwrap(), lambda, None).unwrap();
        let db = Database::from_rows(vec![vec![1.0], vec![-0.5], vec![0.25]]).unwrap();
        let d = gibbs_oracle_1d(&obj, &db, s2, &GibbsGrid::default()).unwrap();
        let v = s2 / lambda;
        let (lo, hi) = ((-2.0 * a / s2).exp(), (2.0 * a / s2).exp());
        for (x, p) in d.grid().xs().zip(d.values()) {
            let g = (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
            if g > 1e-200 {
                let r = p / g;
                assert!(r >= lo * (1.0 - 1e-9) && r <= hi * (1.0 + 1e-9), "ratio {r} at {x}");
            }
        }
    }

    #[test]
    fn rejects_unregularized_and_narrow() {
        let db = Database::from_rows(vec![vec![0.0]]).unwrap();
        let obj = Objective::new(LossModel::bounded_nonconvex(1, 0.3).unwrap(), 0.0, None).unwrap();
        assert!(gibbs_oracle_1d(&obj, &db, 1.0, &GibbsGrid::default()).is_err());
        let obj = Objective::new(LossModel::bounded_nonconvex(1, 0.3).unwrap(), 1.0, None).unwrap();
        let narrow = GibbsGrid { half_width_sds: 6.0, ..GibbsGrid::default() };
        assert!(gibbs_oracle_1d(&obj, &db, 1.0, &narrow).is_err());
    }
}
