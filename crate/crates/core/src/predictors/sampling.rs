use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::raster::Heatmap;

/// Default sampling temperature for location heatmaps.
pub const DEFAULT_TAU: f64 = 0.8;

/// `p^(1/τ)` renormalized; zero entries stay zero.
pub fn tempered_probabilities(p: &[f64], tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("temperature must be positive, got {tau}")));
    }
    let max = p.iter().cloned().fold(0.0f64, f64::max);
    if !(max > 0.0) {
        return Err(Error::InvalidArgument("distribution has no mass".into()));
    }
    // scale by the maximum first so small τ cannot underflow everything
    let mut out: Vec<f64> = p
        .iter()
        .map(|&v| if v > 0.0 { (v / max).powf(1.0 / tau) } else { 0.0 })
        .collect();
    let z: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= z);
    Ok(out)
}

/// Inverse-CDF draw from an (unnormalized) nonnegative weight vector.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Draws a pixel from the heatmap sharpened by temperature `tau`; returns
/// its index and the world point at its center.
pub fn temper_sample<R: Rng + ?Sized>(heatmap: &Heatmap, tau: f64, rng: &mut R) -> Result<(usize, Point)> {
    let p = tempered_probabilities(&heatmap.values, tau)?;
    let i = sample_index(&p, rng);
    Ok((i, heatmap.pixel_world(i)))
}
