use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::orientation::EmConfig;
use super::sampling::sample_index;
use crate::error::{Error, Result};
use crate::raster::{FloorPlanImage, FLOOR, OCCUPANCY};
use crate::scene::CategoryVocabulary;

const EIGEN_FLOOR: f64 = 1e-6;
const LN_TAU: f64 = 1.837_877_066_409_345_5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub mean: [f64; 2],
    /// Symmetric covariance `[[a, b], [b, c]]` stored as `[a, b, c]`.
    pub cov: [f64; 3],
    pub weight: f64,
}

impl GaussianComponent {
    fn log_density(&self, x: [f64; 2]) -> f64 {
        let [a, b, c] = self.cov;
        let det = a * c - b * b;
        let (dx, dy) = (x[0] - self.mean[0], x[1] - self.mean[1]);
        let q = (c * dx * dx - 2.0 * b * dx * dy + a * dy * dy) / det;
        -0.5 * q - 0.5 * det.ln() - LN_TAU
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        let [a, b, c] = self.cov;
        let l11 = a.sqrt();
        let l21 = b / l11;
        let l22 = (c - l21 * l21).max(0.0).sqrt();
        let z1: f64 = StandardNormal.sample(rng);
        let z2: f64 = StandardNormal.sample(rng);
        [self.mean[0] + l11 * z1, self.mean[1] + l21 * z1 + l22 * z2]
    }
}

/// Raises the eigenvalues of a 2×2 covariance to at least `floor`.
pub fn floor_eigenvalues(cov: [f64; 3], floor: f64) -> [f64; 3] {
    let [a, b, c] = cov;
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let (l1, l2) = (mid + rad, mid - rad);
    if l2 >= floor {
        return cov;
    }
    // unit eigenvector of l1
    let (vx, vy) = if b.abs() > 1e-300 {
        let (x, y) = (l1 - c, b);
        let n = x.hypot(y);
        (x / n, y / n)
    } else if a >= c {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let (l1, l2) = (l1.max(floor), l2.max(floor));
    // V diag(l1, l2) Vᵀ with the second eigenvector (-vy, vx)
    [
        l1 * vx * vx + l2 * vy * vy,
        (l1 - l2) * vx * vy,
        l1 * vy * vy + l2 * vx * vx,
    ]
}

/// Two-dimensional Gaussian mixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gmm2 {
    pub components: Vec<GaussianComponent>,
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

impl Gmm2 {
    pub fn log_likelihood(&self, data: &[[f64; 2]]) -> f64 {
        let mut buf = vec![0.0; self.components.len()];
        data.iter()
            .map(|&x| {
                for (b, c) in buf.iter_mut().zip(&self.components) {
                    *b = c.weight.ln() + c.log_density(x);
                }
                log_sum_exp(&buf)
            })
            .sum::<f64>()
            / data.len().max(1) as f64
    }

    /// Draws a component index and a point from it.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, [f64; 2]) {
        let w: Vec<f64> = self.components.iter().map(|c| c.weight).collect();
        let k = sample_index(&w, rng);
        (k, self.components[k].sample(rng))
    }

    /// EM fit with k-means++ seeding. Returns the mixture and the mean
    /// log-likelihood before every M-step.
    pub fn fit<R: Rng + ?Sized>(data: &[[f64; 2]], k: usize, cfg: &EmConfig, rng: &mut R) -> Result<(Self, Vec<f64>)> {
        if data.is_empty() {
            return Err(Error::EmptyInput("dimension samples"));
        }
        let n = data.len();
        let mut distinct: Vec<[f64; 2]> = data.to_vec();
        distinct.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        distinct.dedup();
        let k = k.min(distinct.len()).max(1);

        // k-means++ seeds
        let d2 = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2);
        let mut seeds = vec![data[rng.random_range(0..n)]];
        while seeds.len() < k {
            let w: Vec<f64> = data
                .iter()
                .map(|&x| seeds.iter().map(|&s| d2(x, s)).fold(f64::INFINITY, f64::min))
                .collect();
            if w.iter().sum::<f64>() <= 0.0 {
                break;
            }
            seeds.push(data[sample_index(&w, rng)]);
        }
        let k = seeds.len();
        let mean = [
            data.iter().map(|x| x[0]).sum::<f64>() / n as f64,
            data.iter().map(|x| x[1]).sum::<f64>() / n as f64,
        ];
        let mut cov = [0.0; 3];
        for x in data {
            let (dx, dy) = (x[0] - mean[0], x[1] - mean[1]);
            cov[0] += dx * dx / n as f64;
            cov[1] += dx * dy / n as f64;
            cov[2] += dy * dy / n as f64;
        }
        let cov = floor_eigenvalues(cov, EIGEN_FLOOR.max(1e-4));
        let mut comps: Vec<GaussianComponent> = seeds
            .into_iter()
            .map(|m| GaussianComponent {
                mean: m,
                cov,
                weight: 1.0 / k as f64,
            })
            .collect();

        let mut history = Vec::new();
        let mut resp = vec![0.0; k];
        for _ in 0..cfg.max_iter {
            let mut ll = 0.0;
            let mut nk = vec![0.0; k];
            let mut s1 = vec![[0.0; 2]; k];
            let mut s2 = vec![[0.0; 3]; k];
            for &x in data {
                for (r, c) in resp.iter_mut().zip(&comps) {
                    *r = if c.weight > 0.0 {
                        c.weight.ln() + c.log_density(x)
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                let l = log_sum_exp(&resp);
                ll += l;
                for ci in 0..k {
                    let r = (resp[ci] - l).exp();
                    nk[ci] += r;
                    s1[ci][0] += r * x[0];
                    s1[ci][1] += r * x[1];
                    s2[ci][0] += r * x[0] * x[0];
                    s2[ci][1] += r * x[0] * x[1];
                    s2[ci][2] += r * x[1] * x[1];
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
                let m = [s1[ci][0] / nk[ci], s1[ci][1] / nk[ci]];
                let raw = [
                    s2[ci][0] / nk[ci] - m[0] * m[0],
                    s2[ci][1] / nk[ci] - m[0] * m[1],
                    s2[ci][2] / nk[ci] - m[1] * m[1],
                ];
                comps[ci] = GaussianComponent {
                    mean: m,
                    cov: floor_eigenvalues(raw, EIGEN_FLOOR),
                    weight: nk[ci] / n as f64,
                };
            }
        }
        comps.retain(|c| c.weight > 0.0);
        let total: f64 = comps.iter().map(|c| c.weight).sum();
        comps.iter_mut().for_each(|c| c.weight /= total);
        Ok((Gmm2 { components: comps }, history))
    }
}

/// Free distance from the image center to the nearest obstacle along the
/// image axes: `[+u, -u, +v, -v]` in meters.
///
/// Floor objects are blocked by other objects and by the outside of the
/// room. The outside starts at the first pixel whose center is off the
/// floor, which puts the measured boundary within half a pixel of the inner
/// wall face; the wall channel is drawn straddling that face and would
/// undercount by up to a pixel. Supported objects are blocked by the edge of
/// the occupied surface they sit on.
pub fn clearance(img: &FloorPlanImage, supported: bool) -> [f64; 4] {
    let r = img.resolution();
    let mpp = img.meters_per_pixel();
    let c = r / 2;
    let blocked = |col: usize, row: usize| {
        let occ = img.get(OCCUPANCY, col, row) != 0.0;
        if supported {
            !occ
        } else {
            occ || img.get(FLOOR, col, row) == 0.0
        }
    };
    // the center lies on a pixel corner; scan the two straddling lines
    let scan = |along: &dyn Fn(usize, usize) -> bool, steps: &mut dyn Iterator<Item = (usize, f64)>| {
        for (i, dist) in steps {
            if along(i, c - 1) || along(i, c) {
                return dist;
            }
        }
        c as f64 * mpp
    };
    let horiz = |i: usize, line: usize| blocked(i, line);
    let vert = |i: usize, line: usize| blocked(line, i);
    let plus_u = scan(&horiz, &mut (c..r).map(|i| (i, (i - c) as f64 * mpp)));
    let minus_u = scan(&horiz, &mut (0..c).rev().map(|i| (i, (c - 1 - i) as f64 * mpp)));
    let plus_v = scan(&vert, &mut (c..r).map(|i| (i, (i - c) as f64 * mpp)));
    let minus_v = scan(&vert, &mut (0..c).rev().map(|i| (i, (c - 1 - i) as f64 * mpp)));
    [plus_u, minus_u, plus_v, minus_v]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimsSample {
    pub dims: [f64; 2],
    /// The accepted draw's mixture component.
    pub component: usize,
    pub draws: usize,
    /// True when every draw exceeded the clearance and the last one was
    /// shrunk to fit.
    pub clamped: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionsModel {
    /// Mixture over `(ln w, ln d)` per category.
    pub per_category: Vec<Option<Gmm2>>,
    pub rejection_limit: usize,
    pub trained: bool,
}

/// Fit diagnostics for one category.
#[derive(Clone, Debug, PartialEq)]
pub struct DimsFit {
    pub category_id: usize,
    pub em_history: Vec<f64>,
}

impl DimensionsModel {
    pub fn untrained(num_categories: usize, rejection_limit: usize) -> Self {
        Self {
            per_category: vec![None; num_categories],
            rejection_limit,
            trained: false,
        }
    }

    /// Fits one mixture per category on `(category, [w, d])` pairs.
    pub fn train<R: Rng + ?Sized>(
        examples: &[(usize, [f64; 2])],
        num_categories: usize,
        k: usize,
        rejection_limit: usize,
        em: &EmConfig,
        rng: &mut R,
    ) -> Result<(Self, Vec<DimsFit>)> {
        if examples.is_empty() {
            return Err(Error::EmptyInput("dimension examples"));
        }
        let mut model = Self::untrained(num_categories, rejection_limit);
        let mut fits = Vec::new();
        for cat in 0..num_categories {
            let data: Vec<[f64; 2]> = examples
                .iter()
                .filter(|(c, _)| *c == cat)
                .map(|(_, d)| [d[0].ln(), d[1].ln()])
                .collect();
            if data.is_empty() {
                continue;
            }
            let (gmm, em_history) = Gmm2::fit(&data, k, em, rng)?;
            model.per_category[cat] = Some(gmm);
            fits.push(DimsFit {
                category_id: cat,
                em_history,
            });
        }
        model.trained = true;
        Ok((model, fits))
    }

    /// Samples `(w, d)` for an object at the center of the rotated local
    /// image, redrawing while the box exceeds the measured clearance.
    pub fn predict<R: Rng + ?Sized>(
        &self,
        local_img: &FloorPlanImage,
        category_id: usize,
        vocab: &CategoryVocabulary,
        rng: &mut R,
    ) -> Result<DimsSample> {
        if !self.trained {
            return Err(Error::Untrained);
        }
        let gmm = self
            .per_category
            .get(category_id)
            .and_then(|g| g.as_ref())
            .ok_or(Error::Untrained)?;
        let cl = clearance(local_img, vocab.is_second_tier(category_id));
        let (cx, cy) = (cl[0].min(cl[1]), cl[2].min(cl[3]));
        let limit = self.rejection_limit.max(1);
        let mut last = (0, [0.0; 2]);
        for draw in 1..=limit {
            let (k, z) = gmm.sample(rng);
            let dims = [z[0].exp(), z[1].exp()];
            last = (k, dims);
            if dims[0] / 2.0 <= cx && dims[1] / 2.0 <= cy {
                return Ok(DimsSample {
                    dims,
                    component: k,
                    draws: draw,
                    clamped: false,
                });
            }
        }
        let (k, dims) = last;
        Ok(DimsSample {
            dims: [dims[0].min(2.0 * cx).max(1e-3), dims[1].min(2.0 * cy).max(1e-3)],
            component: k,
            draws: limit,
            clamped: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{render, ImageFrame, RasterConfig};
    use crate::rng::seeded;
    use crate::scene::{Room, Scene};

    fn vocab() -> CategoryVocabulary {
        CategoryVocabulary::new(&["table"], &[])
    }

    fn big_room_image() -> FloorPlanImage {
        let s = Scene::empty(Room::rectangle(11.0, 11.0, "hall"));
        render(&s, 1, &RasterConfig::default()).unwrap()
    }

    fn point_model(w: f64, d: f64) -> DimensionsModel {
        DimensionsModel {
            per_category: vec![Some(Gmm2 {
                components: vec![GaussianComponent {
                    mean: [w.ln(), d.ln()],
                    cov: [1e-14, 0.0, 1e-14],
                    weight: 1.0,
                }],
            })],
            rejection_limit: 20,
            trained: true,
        }
    }

    #[test]
    fn degenerate_mixture_with_room() {
        let m = point_model(0.5, 0.4);
        let s = m.predict(&big_room_image(), 0, &vocab(), &mut seeded(1)).unwrap();
        assert!((s.dims[0] - 0.5).abs() < 1e-6 && (s.dims[1] - 0.4).abs() < 1e-6);
        assert!(!s.clamped);
    }

    #[test]
    fn clearance_bounds_width() {
        // square room 1.2 m wide centered on the image: at most 0.6 m free
        // on each side of the center
        let s = Scene::empty(Room::from_polygon(
            vec![[-0.6, -0.6], [0.6, -0.6], [0.6, 0.6], [-0.6, 0.6]],
            "closet",
        ));
        let img = render(&s, 1, &RasterConfig::default()).unwrap();
        assert_eq!(img.frame.center, [0.0, 0.0]);
        let cl = clearance(&img, false);
        assert!(cl.iter().all(|&c| c <= 0.6));
        let m = point_model(3.0, 3.0);
        let mut rng = seeded(3);
        for _ in 0..50 {
            let d = m.predict(&img, 0, &vocab(), &mut rng).unwrap();
            assert!(d.dims[0] <= 1.2 && d.dims[1] <= 1.2);
            assert!(d.clamped);
        }
        let frame = ImageFrame::new(64, 0.1875, [0.0, 0.0]);
        assert_eq!(frame.pixel_of([0.01, 0.01]), Some((32, 32)));
    }

    #[test]
    fn eigen_floor_is_noop_when_satisfied() {
        let c = [2.0, 0.5, 1.0];
        assert_eq!(floor_eigenvalues(c, 1e-6), c);
        let f = floor_eigenvalues([1.0, 1.0, 1.0], 0.1);
        let det = f[0] * f[2] - f[1] * f[1];
        assert!((det - 0.2).abs() < 1e-12, "{f:?}");
    }

    #[test]
    fn constant_size_recovered() {
        let examples: Vec<(usize, [f64; 2])> = (0..30).map(|_| (0, [0.8, 0.5])).collect();
        let (m, fits) = DimensionsModel::train(&examples, 1, 3, 20, &EmConfig::default(), &mut seeded(5)).unwrap();
        let g = m.per_category[0].as_ref().unwrap();
        assert_eq!(g.components.len(), 1);
        assert!((g.components[0].mean[0].exp() - 0.8).abs() < 1e-9);
        assert!(fits[0].em_history.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn two_component_recovery() {
        let truth = Gmm2 {
            components: vec![
                GaussianComponent { mean: [0.0, -0.5], cov: [0.01, 0.002, 0.01], weight: 0.4 },
                GaussianComponent { mean: [0.7, 0.3], cov: [0.01, -0.003, 0.02], weight: 0.6 },
            ],
        };
        let mut rng = seeded(12);
        let data: Vec<[f64; 2]> = (0..3000).map(|_| truth.sample(&mut rng).1).collect();
        let (fit, hist) = Gmm2::fit(&data, 2, &EmConfig::default(), &mut rng).unwrap();
        assert!(hist.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        for t in &truth.components {
            let m = fit
                .components
                .iter()
                .min_by(|a, b| {
                    let da = (a.mean[0] - t.mean[0]).hypot(a.mean[1] - t.mean[1]);
                    let db = (b.mean[0] - t.mean[0]).hypot(b.mean[1] - t.mean[1]);
                    da.total_cmp(&db)
                })
                .unwrap();
            // within 10% in size space
            for j in 0..2 {
                let (a, b) = (m.mean[j].exp(), t.mean[j].exp());
                assert!((a - b).abs() / b < 0.1);
            }
        }
    }
}
