use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::distance;
use crate::scene::Scene;

/// Length scale of the centroid term, in meters.
pub const SIMILARITY_SIGMA: f64 = 1.0;
pub const HISTOGRAM_BINS: usize = 20;

/// Scene similarity in `[0, 1]`: the mean of a category-profile overlap and
/// a geometric term.
///
/// The profile term is `1 − ½‖pa − pb‖₁` over normalized category counts.
/// The geometric term greedily pairs same-category objects by centroid
/// distance, scores each pair `exp(−d / σ)` and averages over the larger
/// scene's object count, so unmatched objects count as zero.
pub fn scene_similarity(a: &Scene, b: &Scene, num_categories: usize) -> f64 {
    0.5 * category_overlap(a, b, num_categories) + 0.5 * geometric_overlap(a, b)
}

pub fn category_overlap(a: &Scene, b: &Scene, num_categories: usize) -> f64 {
    let (ca, cb) = (a.category_counts(num_categories), b.category_counts(num_categories));
    let (na, nb) = (ca.iter().sum::<usize>(), cb.iter().sum::<usize>());
    match (na, nb) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => {
            let l1: f64 = ca
                .iter()
                .zip(&cb)
                .map(|(&x, &y)| (x as f64 / na as f64 - y as f64 / nb as f64).abs())
                .sum();
            1.0 - 0.5 * l1
        }
    }
}

pub fn geometric_overlap(a: &Scene, b: &Scene) -> f64 {
    let n = a.objects.len().max(b.objects.len());
    if n == 0 {
        return 1.0;
    }
    // every same-category pair, closest first; ties by index pair
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, x) in a.objects.iter().enumerate() {
        for (j, y) in b.objects.iter().enumerate() {
            if x.category_id == y.category_id {
                pairs.push((distance(x.position, y.position), i, j));
            }
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0).then((p.1.min(p.2), p.1.max(p.2)).cmp(&(q.1.min(q.2), q.1.max(q.2)))));
    let mut used_a = vec![false; a.objects.len()];
    let mut used_b = vec![false; b.objects.len()];
    let mut total = 0.0;
    for (d, i, j) in pairs {
        if used_a[i] || used_b[j] {
            continue;
        }
        used_a[i] = true;
        used_b[j] = true;
        total += (-d / SIMILARITY_SIGMA).exp();
    }
    total / n as f64
}

/// Per generated scene, its highest similarity to any sample scene, and a
/// histogram of those maxima over `[0, 1]` in bins of 0.05.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityProfile {
    pub maxima: Vec<f64>,
    pub histogram: Vec<u64>,
}

pub fn histogram(values: &[f64]) -> Vec<u64> {
    let mut h = vec![0u64; HISTOGRAM_BINS];
    for &v in values {
        let bin = ((v * HISTOGRAM_BINS as f64).floor() as usize).min(HISTOGRAM_BINS - 1);
        h[bin] += 1;
    }
    h
}

pub fn max_similarity_profile(generated: &[Scene], sample: &[Scene], num_categories: usize) -> SimilarityProfile {
    let maxima: Vec<f64> = generated
        .par_iter()
        .map(|g| {
            sample
                .iter()
                .map(|s| scene_similarity(g, s, num_categories))
                .fold(0.0, f64::max)
        })
        .collect();
    SimilarityProfile {
        histogram: histogram(&maxima),
        maxima,
    }
}
