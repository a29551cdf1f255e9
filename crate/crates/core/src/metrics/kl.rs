use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Scene;

/// Additive smoothing applied to reference counts when the synthesized
/// distribution puts mass on a category the reference never shows.
pub const KL_SMOOTHING: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionSource {
    Corpus,
    Synth,
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryDistribution {
    pub probabilities: Vec<f64>,
    pub source: DistributionSource,
}

/// Object instances per category over a set of scenes.
pub fn category_counts(scenes: &[Scene], num_categories: usize) -> Vec<u64> {
    let mut counts = vec![0u64; num_categories];
    for s in scenes {
        for (c, n) in counts.iter_mut().zip(s.category_counts(num_categories)) {
            *c += n as u64;
        }
    }
    counts
}

pub fn category_distribution(
    scenes: &[Scene],
    num_categories: usize,
    source: DistributionSource,
) -> Result<CategoryDistribution> {
    let counts = category_counts(scenes, num_categories);
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyInput("scenes without objects"));
    }
    Ok(CategoryDistribution {
        probabilities: counts.iter().map(|&c| c as f64 / total as f64).collect(),
        source,
    })
}

pub fn uniform_distribution(num_categories: usize) -> CategoryDistribution {
    CategoryDistribution {
        probabilities: vec![1.0 / num_categories as f64; num_categories],
        source: DistributionSource::Uniform,
    }
}

/// `Σ p log(p / q)`; terms with `p = 0` contribute nothing, and mass on a
/// `q = 0` category makes the divergence infinite.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| if qi > 0.0 { pi * (pi / qi).ln() } else { f64::INFINITY })
        .sum()
}

/// Reference distribution for comparing against `p`: raw frequencies, or
/// frequencies of counts + [`KL_SMOOTHING`] when `p` covers a category the
/// reference lacks.
pub fn reference_distribution(p: &[f64], reference_counts: &[u64]) -> Vec<f64> {
    let needs_smoothing = p.iter().zip(reference_counts).any(|(&pi, &c)| pi > 0.0 && c == 0);
    let alpha = if needs_smoothing { KL_SMOOTHING } else { 0.0 };
    let total: f64 = reference_counts.iter().map(|&c| c as f64 + alpha).sum();
    reference_counts.iter().map(|&c| (c as f64 + alpha) / total).collect()
}

/// `D_KL(P_synth ‖ P_reference)` over per-category instance frequencies.
pub fn category_kl(synth: &[Scene], reference: &[Scene], num_categories: usize) -> Result<f64> {
    if synth.is_empty() || reference.is_empty() {
        return Err(Error::EmptyInput("scene set"));
    }
    let p = category_distribution(synth, num_categories, DistributionSource::Synth)?;
    distribution_kl(&p.probabilities, reference, num_categories)
}

/// Divergence of an arbitrary category distribution from a scene set.
pub fn distribution_kl(p: &[f64], reference: &[Scene], num_categories: usize) -> Result<f64> {
    let counts = category_counts(reference, num_categories);
    if counts.iter().sum::<u64>() == 0 {
        return Err(Error::EmptyInput("reference scenes without objects"));
    }
    Ok(kl_divergence(p, &reference_distribution(p, &counts)))
}

/// The divergence a generator drawing categories uniformly would score.
pub fn uniform_baseline_kl(reference: &[Scene], num_categories: usize) -> Result<f64> {
    distribution_kl(&uniform_distribution(num_categories).probabilities, reference, num_categories)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    #[test]
    fn analytic_values() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
        let d = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]);
        assert!((d - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
    }

    #[test]
    fn smoothing_only_when_needed() {
        assert_eq!(reference_distribution(&[0.5, 0.5], &[1, 3]), vec![0.25, 0.75]);
        let q = reference_distribution(&[0.5, 0.5], &[0, 4]);
        assert!((q[0] - 0.1 / 4.2).abs() < 1e-15);
    }

    #[test]
    fn matches_termwise_sum() {
        let mut rng = seeded(8);
        for _ in 0..20 {
            let n = rng.random_range(2..10);
            let mut p: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let (sp, sq): (f64, f64) = (p.iter().sum(), q.iter().sum());
            p.iter_mut().for_each(|v| *v /= sp);
            q.iter_mut().for_each(|v| *v /= sq);
            let mut oracle = 0.0;
            for i in 0..n {
                oracle += p[i] * (p[i].ln() - q[i].ln());
            }
            assert!((kl_divergence(&p, &q) - oracle).abs() < 1e-12);
        }
    }
}
