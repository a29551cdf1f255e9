use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::linear::{Dataset, SoftmaxRegression};
use super::optim::LbfgsConfig;
use super::sampling::sample_index;
use crate::error::{Error, Result};
use crate::geometry::{circular_distance, normalize_angle};
use crate::raster::{FloorPlanImage, OCCUPANCY, WALL};

pub const CARDINALS: [f64; 4] = [0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2];

/// Nearest of the four cardinal directions; exact ties go to the smaller
/// angle in `[0, 2π)`, so 7π/4 snaps to 0. Distances within 1e-12 of each
/// other count as ties.
pub fn snap_cardinal(theta: f64) -> f64 {
    let t = normalize_angle(theta);
    let mut best = CARDINALS[0];
    let mut best_d = circular_distance(t, best);
    for &c in &CARDINALS[1..] {
        let d = circular_distance(t, c);
        if d < best_d - 1e-12 {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Training label for the snap classifier.
pub fn is_snapped(theta: f64) -> bool {
    circular_distance(theta, snap_cardinal(theta)) < 0.5f64.to_radians()
}

/// A decoded orientation: the predicted front-vector x component, the sign
/// of its y component, the reconstructed y component, and the final angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationSample {
    pub cos: f64,
    pub sign: f64,
    pub sin: f64,
    pub theta: f64,
    pub snapped: bool,
}

/// Rebuilds the angle from `cos θ` and the sign of `sin θ`, snapping it to
/// the nearest cardinal direction when `snap` is set.
pub fn decode_orientation(cos: f64, sign: f64, snap: bool) -> OrientationSample {
    let cos = cos.clamp(-1.0, 1.0);
    let sign = if sign < 0.0 { -1.0 } else { 1.0 };
    let sin = sign * (1.0 - cos * cos).max(0.0).sqrt();
    let raw = normalize_angle(sin.atan2(cos));
    let theta = if snap { snap_cardinal(raw) } else { raw };
    OrientationSample {
        cos,
        sign,
        sin,
        theta,
        snapped: snap,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrappedComponent {
    pub mu: f64,
    pub sigma: f64,
    pub weight: f64,
}

/// Mixture of wrapped normal distributions on the circle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WrappedMixture {
    pub components: Vec<WrappedComponent>,
}

/// Number of wraps summed on each side when evaluating densities.
const WRAPS: i32 = 3;
const SIGMA_FLOOR: f64 = 1e-3;
const LN_SQRT_TAU: f64 = 0.918_938_533_204_672_7;

fn log_normal(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - LN_SQRT_TAU
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Number of values differing by more than `1e-9`.
fn distinct_count(sorted: &[f64]) -> usize {
    if sorted.is_empty() {
        return 0;
    }
    1 + sorted.windows(2).filter(|w| w[1] - w[0] > 1e-9).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Stop when the mean log-likelihood improves by less than this.
    pub tol: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self { max_iter: 300, tol: 1e-6 }
    }
}

impl WrappedMixture {
    /// Mean log-density of `data`.
    pub fn log_likelihood(&self, data: &[f64]) -> f64 {
        let mut buf = Vec::new();
        data.iter().map(|&x| self.log_density_with(x, &mut buf)).sum::<f64>() / data.len().max(1) as f64
    }

    fn log_density_with(&self, x: f64, buf: &mut Vec<f64>) -> f64 {
        buf.clear();
        for c in &self.components {
            if c.weight <= 0.0 {
                continue;
            }
            for j in -WRAPS..=WRAPS {
                buf.push(c.weight.ln() + log_normal(x + TAU * j as f64, c.mu, c.sigma));
            }
        }
        log_sum_exp(buf)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let weights: Vec<f64> = self.components.iter().map(|c| c.weight).collect();
        let c = &self.components[sample_index(&weights, rng)];
        let z: f64 = StandardNormal.sample(rng);
        normalize_angle(c.mu + c.sigma * z)
    }

    /// Expectation-maximization fit with `k` components (fewer when the
    /// data has fewer distinct values). Returns the mixture and the mean
    /// log-likelihood before every M-step.
    pub fn fit(data: &[f64], k: usize, cfg: &EmConfig) -> Result<(Self, Vec<f64>)> {
        if data.is_empty() {
            return Err(Error::EmptyInput("orientation samples"));
        }
        let mut sorted: Vec<f64> = data.iter().map(|&x| normalize_angle(x)).collect();
        sorted.sort_by(f64::total_cmp);
        let k = k.min(distinct_count(&sorted)).max(1);
        let n = sorted.len();
        let mut comps: Vec<WrappedComponent> = (0..k)
            .map(|i| WrappedComponent {
                mu: sorted[((2 * i + 1) * n / (2 * k)).min(n - 1)],
                sigma: (PI / k as f64).max(0.1),
                weight: 1.0 / k as f64,
            })
            .collect();
        let width = (2 * WRAPS + 1) as usize;
        let mut resp = vec![0.0; k * width];
        let mut history = Vec::new();
        for _ in 0..cfg.max_iter {
            let mut ll = 0.0;
            let mut nk = vec![0.0; k];
            let mut sx = vec![0.0; k];
            let mut sxx = vec![0.0; k];
            for &x in &sorted {
                for (ci, c) in comps.iter().enumerate() {
                    for j in 0..width {
                        let xj = x + TAU * (j as i32 - WRAPS) as f64;
                        resp[ci * width + j] = if c.weight > 0.0 {
                            c.weight.ln() + log_normal(xj, c.mu, c.sigma)
                        } else {
                            f64::NEG_INFINITY
                        };
                    }
                }
                let l = log_sum_exp(&resp);
                ll += l;
                for ci in 0..k {
                    for j in 0..width {
                        let r = (resp[ci * width + j] - l).exp();
                        let xj = x + TAU * (j as i32 - WRAPS) as f64;
                        nk[ci] += r;
                        sx[ci] += r * xj;
                        sxx[ci] += r * xj * xj;
                    }
                }
            }
            let ll = ll / n as f64;
            let converged = history.last().is_some_and(|&prev: &f64| ll - prev < cfg.tol);
            history.push(ll);
            if converged {
                break;
            }
            for ci in 0..k {
                if nk[ci] < 1e-12 {
                    comps[ci].weight = 0.0;
                    continue;
                }
                let mu = sx[ci] / nk[ci];
                let var = (sxx[ci] / nk[ci] - mu * mu).max(0.0);
                comps[ci] = WrappedComponent {
                    mu,
                    sigma: var.sqrt().max(SIGMA_FLOOR),
                    weight: nk[ci] / n as f64,
                };
            }
        }
        let mut mixture = WrappedMixture {
            components: comps
                .into_iter()
                .filter(|c| c.weight > 0.0)
                .map(|c| WrappedComponent {
                    mu: normalize_angle(c.mu),
                    ..c
                })
                .collect(),
        };
        mixture.merge_duplicates();
        Ok((mixture, history))
    }

    /// Folds components with (nearly) equal mean and spread together.
    fn merge_duplicates(&mut self) {
        let mut out: Vec<WrappedComponent> = Vec::new();
        for c in self.components.drain(..) {
            match out
                .iter_mut()
                .find(|o| circular_distance(o.mu, c.mu) < 1e-6 && (o.sigma - c.sigma).abs() < 1e-6)
            {
                Some(o) => o.weight += c.weight,
                None => out.push(c),
            }
        }
        let total: f64 = out.iter().map(|c| c.weight).sum();
        out.iter_mut().for_each(|c| c.weight /= total);
        self.components = out;
    }
}

/// What a category's angle is measured against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceFrame {
    /// World angle.
    Absolute,
    /// Angle relative to the direction from the object to its nearest wall.
    NearestWall,
}

/// World direction from the image center toward the closest wall pixels,
/// averaged over pixels within one pixel of the minimum distance.
pub fn nearest_wall_direction(img: &FloorPlanImage) -> Option<f64> {
    let r = img.resolution();
    let half = r as f64 / 2.0;
    let wall = img.channel(WALL);
    let mut pts = Vec::new();
    let mut dmin = f64::INFINITY;
    for row in 0..r {
        for col in 0..r {
            if wall[row * r + col] != 0.0 {
                let (du, dv) = (col as f64 + 0.5 - half, row as f64 + 0.5 - half);
                let d = du.hypot(dv);
                dmin = dmin.min(d);
                pts.push((du, dv, d));
            }
        }
    }
    if pts.is_empty() {
        return None;
    }
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(du, dv, d) in &pts {
        if d <= dmin + 1.0 && d > 0.0 {
            sx += du / d;
            sy += dv / d;
        }
    }
    if sx.hypot(sy) < 1e-9 {
        let &(du, dv, _) = pts.iter().min_by(|a, b| a.2.total_cmp(&b.2))?;
        sx = du;
        sy = dv;
    }
    Some(normalize_angle(sy.atan2(sx) + img.frame.angle))
}

pub const SNAP_DIM: usize = 4;

/// Inputs of the snap classifier: nearest-wall distance (scaled), how far
/// the nearest wall is from axis-aligned, local occupancy, bias.
pub fn snap_features(img: &FloorPlanImage) -> [f64; SNAP_DIM] {
    let r = img.resolution();
    let mpp = img.meters_per_pixel();
    let half = r as f64 / 2.0;
    let wall = img.channel(WALL);
    let mut dmin = f64::INFINITY;
    for row in 0..r {
        for col in 0..r {
            if wall[row * r + col] != 0.0 {
                dmin = dmin.min((col as f64 + 0.5 - half).hypot(row as f64 + 0.5 - half));
            }
        }
    }
    let wall_d = if dmin.is_finite() { (dmin * mpp).min(3.0) / 3.0 } else { 1.0 };
    let misalign = nearest_wall_direction(img).map(|a| (2.0 * a).sin().abs()).unwrap_or(0.0);
    let c = r / 2;
    let occ = [(c - 1, c - 1), (c, c - 1), (c - 1, c), (c, c)]
        .iter()
        .filter(|&&(col, row)| img.get(OCCUPANCY, col, row) != 0.0)
        .count() as f64
        / 4.0;
    [wall_d, misalign, occ, 1.0]
}

/// One training observation for the orientation model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationObservation {
    pub category_id: usize,
    pub theta: f64,
    pub snap_label: bool,
    pub wall_direction: Option<f64>,
    pub snap_features: [f64; SNAP_DIM],
}

impl OrientationObservation {
    pub fn from_image(img: &FloorPlanImage, category_id: usize, theta: f64) -> Self {
        Self {
            category_id,
            theta,
            snap_label: is_snapped(theta),
            wall_direction: nearest_wall_direction(img),
            snap_features: snap_features(img),
        }
    }

    fn relative(&self, frame: ReferenceFrame) -> f64 {
        match (frame, self.wall_direction) {
            (ReferenceFrame::NearestWall, Some(phi)) => normalize_angle(self.theta - phi),
            _ => self.theta,
        }
    }
}

/// Angular bins used to compare how concentrated a category's angles are
/// in each reference frame. Bins are centered on the cardinal directions.
pub const FRAME_BINS: usize = 16;

/// Entropy of the angle histogram over [`FRAME_BINS`] bins. Unlike the
/// likelihood of a fitted mixture it does not reward frames whose angles
/// are exactly repeated over frames carrying a little measurement noise.
pub fn binned_entropy(angles: impl Iterator<Item = f64>) -> f64 {
    let width = TAU / FRAME_BINS as f64;
    let mut counts = [0usize; FRAME_BINS];
    let mut n = 0usize;
    for a in angles {
        let b = ((normalize_angle(a) + width / 2.0) / width).floor() as usize % FRAME_BINS;
        counts[b] += 1;
        n += 1;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryOrientation {
    pub frame: ReferenceFrame,
    pub mixture: WrappedMixture,
    pub snap: SoftmaxRegression,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationModel {
    pub per_category: Vec<Option<CategoryOrientation>>,
    pub trained: bool,
}

/// Fit diagnostics for one category.
#[derive(Clone, Debug, PartialEq)]
pub struct OrientationFit {
    pub category_id: usize,
    pub em_history: Vec<f64>,
    pub snap_history: Vec<f64>,
}

impl OrientationModel {
    pub fn untrained(num_categories: usize) -> Self {
        Self {
            per_category: vec![None; num_categories],
            trained: false,
        }
    }

    /// Fits one mixture per category in the reference frame where its angles
    /// are most concentrated, plus a logistic snap classifier.
    pub fn train(
        observations: &[OrientationObservation],
        num_categories: usize,
        k: usize,
        em: &EmConfig,
    ) -> Result<(Self, Vec<OrientationFit>)> {
        if observations.is_empty() {
            return Err(Error::EmptyInput("orientation examples"));
        }
        let mut model = Self::untrained(num_categories);
        let mut fits = Vec::new();
        for cat in 0..num_categories {
            let obs: Vec<&OrientationObservation> = observations.iter().filter(|o| o.category_id == cat).collect();
            if obs.is_empty() {
                continue;
            }
            let frame = [ReferenceFrame::NearestWall, ReferenceFrame::Absolute]
                .into_iter()
                .map(|f| (binned_entropy(obs.iter().map(|o| o.relative(f))), f))
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, f)| f)
                .expect("two frames");
            let data: Vec<f64> = obs.iter().map(|o| o.relative(frame)).collect();
            let (mixture, em_history) = WrappedMixture::fit(&data, k, em)?;
            let mut data = Dataset::new(SNAP_DIM);
            for o in &obs {
                data.push(&o.snap_features, o.snap_label as usize, 1.0);
            }
            let mut snap = SoftmaxRegression::zeros(2, SNAP_DIM);
            let r = snap.fit(&data, 1e-3, &LbfgsConfig::default());
            model.per_category[cat] = Some(CategoryOrientation { frame, mixture, snap });
            fits.push(OrientationFit {
                category_id: cat,
                em_history,
                snap_history: r.history,
            });
        }
        model.trained = true;
        Ok((model, fits))
    }

    /// Samples a facing angle for `category_id` at the center of `local_img`.
    pub fn predict<R: Rng + ?Sized>(&self, local_img: &FloorPlanImage, category_id: usize, rng: &mut R) -> Result<OrientationSample> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        let m = self
            .per_category
            .get(category_id)
            .and_then(|m| m.as_ref())
            .ok_or(Error::Untrained)?;
        let reference = match m.frame {
            ReferenceFrame::NearestWall => nearest_wall_direction(local_img).unwrap_or(0.0),
            ReferenceFrame::Absolute => 0.0,
        };
        let theta = m.mixture.sample(rng) + reference;
        let snap = m.snap.probabilities(&snap_features(local_img))[1] >= 0.5;
        Ok(decode_orientation(theta.cos(), theta.sin(), snap))
    }
}
