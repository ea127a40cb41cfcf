use rand::Rng;
use serde::Serialize;

use crate::error::{ensure_positive, Result};
use crate::model::{clip_gradient, LossModel};
use crate::rng::stream_rng;
use crate::vector;

/// Pairwise checks of the per-record clipped gradient field
/// `g(θ) = Clip_L(∇ℓ(θ; x))` for one loss model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClippingRow {
    pub loss: &'static str,
    pub pairs: usize,
    pub clip: f64,
    /// Fraction of evaluated gradients that were actually clipped.
    pub clipped_fraction: f64,
    /// `max ‖g(θ) − g(θ′)‖ / (β‖θ − θ′‖)`; at most one when smoothness holds.
    pub max_smoothness_ratio: f64,
    /// `min ⟨g(θ) − g(θ′), θ − θ′⟩ / scale`; `None` for non-convex losses.
    pub min_monotone: Option<f64>,
    pub smooth_ok: bool,
    pub monotone_ok: bool,
}

fn ball_point<R: Rng + ?Sized>(d: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let n = vector::norm(&v);
    let r = radius * rng.random::<f64>().powf(1.0 / d as f64);
    if n > 0.0 {
        vector::scale(r / n, &mut v);
    }
    v
}

/// Draws `pairs` triples `(x, θ, θ′)` with `‖x‖ ≤ record_radius` and
/// `‖θ‖, ‖θ′‖ ≤ theta_radius`, and checks smoothness (always) and
/// monotonicity (convex losses) of the clipped gradient.
pub fn clipping_checks(
    loss: &LossModel<f64>,
    clip: f64,
    pairs: usize,
    record_radius: f64,
    theta_radius: f64,
    root: u64,
) -> Result<ClippingRow> {
    ensure_positive("clip", clip)?;
    ensure_positive("record_radius", record_radius)?;
    ensure_positive("theta_radius", theta_radius)?;
    let d = loss.dim;
    let beta = loss.smoothness;
    let mut rng = stream_rng(root, 0);
    let (mut clipped, mut worst_ratio, mut worst_mono) = (0usize, 0.0f64, f64::INFINITY);
    for _ in 0..pairs {
        let x = ball_point(d, record_radius, &mut rng);
        let t1 = ball_point(d, theta_radius, &mut rng);
        let t2 = ball_point(d, theta_radius, &mut rng);
        let (r1, r2) = (loss.gradient(&t1, &x), loss.gradient(&t2, &x));
        clipped += usize::from(vector::norm(&r1) > clip) + usize::from(vector::norm(&r2) > clip);
        let g1 = clip_gradient(&r1, clip)?;
        let g2 = clip_gradient(&r2, clip)?;
        let dg = vector::sub(&g1, &g2);
        let dt = vector::sub(&t1, &t2);
        let step = vector::norm(&dt);
        if step > 0.0 {
            worst_ratio = worst_ratio.max(vector::norm(&dg) / (beta * step));
        }
        let scale = 1f64.max(vector::norm(&g1) * step).max(vector::norm(&g2) * step);
        worst_mono = worst_mono.min(vector::dot(&dg, &dt) / scale);
    }
    let convex = loss.is_convex();
    Ok(ClippingRow {
        loss: loss.kind.name(),
        pairs,
        clip,
        clipped_fraction: clipped as f64 / (2 * pairs).max(1) as f64,
        max_smoothness_ratio: worst_ratio,
        min_monotone: convex.then_some(worst_mono),
        smooth_ok: worst_ratio <= 1.0 + 1e-12,
        monotone_ok: !convex || worst_mono >= -1e-10,
    })
}
