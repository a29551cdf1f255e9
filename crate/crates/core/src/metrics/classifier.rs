use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::distance;
use crate::predictors::is_snapped;
use crate::predictors::linear::{Dataset, SoftmaxRegression};
use crate::predictors::optim::LbfgsConfig;
use crate::raster::{scan_polygon, ImageFrame};
use crate::rng::stream;
use crate::scene::Scene;

pub const CV_FOLDS: usize = 5;
/// Grid spacing used to measure occupied floor area, in meters.
pub const AREA_GRID: f64 = 0.025;
const CLASSIFIER_L2: f64 = 1e-3;

/// Floor area inside the room covered by at least one floor-standing object.
/// Parts of footprints that overlap each other or cross the walls are not
/// counted twice or at all.
pub fn occupied_floor_area(scene: &Scene) -> f64 {
    let poly = &scene.room.floor_polygon;
    if poly.len() < 3 {
        return 0.0;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in poly {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let res = (extent / AREA_GRID).ceil() as usize + 2;
    let frame = ImageFrame::new(res, AREA_GRID, [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0]);
    let mut inside = vec![0u8; res * res];
    scan_polygon(&frame, poly, |c, r| inside[r * res + c] = 1);
    for o in scene.objects.iter().filter(|o| o.is_floor_supported()) {
        scan_polygon(&frame, &o.footprint_polygon(), |c, r| {
            let px = &mut inside[r * res + c];
            if *px == 1 {
                *px = 2;
            }
        });
    }
    inside.iter().filter(|&&v| v == 2).count() as f64 * AREA_GRID * AREA_GRID
}

/// Mean distance from each object's centroid to its nearest neighbor's;
/// zero with fewer than two objects.
pub fn mean_nearest_neighbor_distance(scene: &Scene) -> f64 {
    let objs = &scene.objects;
    if objs.len() < 2 {
        return 0.0;
    }
    let total: f64 = objs
        .iter()
        .enumerate()
        .map(|(i, a)| {
            objs.iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, b)| distance(a.position, b.position))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / objs.len() as f64
}

/// `[counts per category, occupied area, mean NN distance, snapped fraction,
/// object count]`.
pub fn scene_features(scene: &Scene, num_categories: usize) -> Vec<f64> {
    let mut f: Vec<f64> = scene
        .category_counts(num_categories)
        .into_iter()
        .map(|n| n as f64)
        .collect();
    let n = scene.objects.len();
    let snapped = scene.objects.iter().filter(|o| is_snapped(o.theta)).count();
    f.push(occupied_floor_area(scene));
    f.push(mean_nearest_neighbor_distance(scene));
    f.push(if n == 0 { 0.0 } else { snapped as f64 / n as f64 });
    f.push(n as f64);
    f
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    /// Mean of the held-out fold accuracies.
    pub accuracy: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Fold index per item of each class. Both classes are shuffled with the
/// same seed, so equally sized paired sets keep each pair in one fold.
fn fold_assignment(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream(seed, 0));
    let mut folds = vec![0; n];
    for (pos, &i) in idx.iter().enumerate() {
        folds[i] = pos % CV_FOLDS;
    }
    folds
}

/// Real-versus-synthetic accuracy of a standardized logistic classifier on
/// [`scene_features`], estimated by stratified 5-fold cross-validation.
pub fn feature_classifier_eval(real: &[Scene], synth: &[Scene], num_categories: usize, seed: u64) -> Result<ClassifierReport> {
    if real.len() < CV_FOLDS || synth.len() < CV_FOLDS {
        return Err(Error::EmptyInput("each class needs at least one scene per fold"));
    }
    let rows: Vec<(Vec<f64>, usize, usize)> = [(real, 0usize), (synth, 1usize)]
        .into_iter()
        .flat_map(|(set, label)| {
            let folds = fold_assignment(set.len(), seed);
            set.iter()
                .zip(folds)
                .map(move |(s, fold)| (scene_features(s, num_categories), label, fold))
        })
        .collect();
    let dim = rows[0].0.len();
    let mut fold_accuracies = Vec::with_capacity(CV_FOLDS);
    for k in 0..CV_FOLDS {
        let train: Vec<&(Vec<f64>, usize, usize)> = rows.iter().filter(|r| r.2 != k).collect();
        let mut mean = vec![0.0; dim];
        for r in &train {
            mean.iter_mut().zip(&r.0).for_each(|(m, x)| *m += x / train.len() as f64);
        }
        let mut sd = vec![0.0; dim];
        for r in &train {
            sd.iter_mut()
                .zip(&r.0)
                .zip(&mean)
                .for_each(|((s, x), m)| *s += (x - m).powi(2) / train.len() as f64);
        }
        let sd: Vec<f64> = sd.into_iter().map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 }).collect();
        let standardize = |x: &[f64]| -> Vec<f64> {
            let mut z: Vec<f64> = x.iter().zip(&mean).zip(&sd).map(|((x, m), s)| (x - m) / s).collect();
            z.push(1.0);
            z
        };
        let mut data = Dataset::new(dim + 1);
        for r in &train {
            data.push(&standardize(&r.0), r.1, 1.0);
        }
        let mut model = SoftmaxRegression::zeros(2, dim + 1);
        model.fit(&data, CLASSIFIER_L2, &LbfgsConfig::default());
        let test: Vec<_> = rows.iter().filter(|r| r.2 == k).collect();
        let correct = test
            .iter()
            .filter(|r| {
                let p = model.probabilities(&standardize(&r.0));
                let predicted = usize::from(p[1] >= p[0]);
                predicted == r.1
            })
            .count();
        fold_accuracies.push(correct as f64 / test.len() as f64);
    }
    Ok(ClassifierReport {
        accuracy: fold_accuracies.iter().sum::<f64>() / CV_FOLDS as f64,
        fold_accuracies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{bedroom_vocabulary, generate_synthetic_corpus, GeneratorParams};
    use crate::scene::{ParentId, Room, SceneObject};

    fn obj(id: u32, pos: [f64; 2], dims: [f64; 2]) -> SceneObject {
        SceneObject {
            id,
            category_id: 0,
            position: pos,
            base_height: 0.0,
            theta: 0.0,
            dims,
            height: 0.5,
            model_id: "m".into(),
            parent_id: ParentId::Floor,
        }
    }

    #[test]
    fn occupied_area_counts_union_inside_room() {
        let mut s = Scene::empty(Room::rectangle(4.0, 4.0, "x"));
        s.objects.push(obj(0, [1.0, 1.0], [1.0, 1.0]));
        assert!((occupied_floor_area(&s) - 1.0).abs() < 0.03);
        // overlapping half
        s.objects.push(obj(1, [1.5, 1.0], [1.0, 1.0]));
        assert!((occupied_floor_area(&s) - 1.5).abs() < 0.03);
        // straddling the left wall: half outside
        let mut t = Scene::empty(Room::rectangle(4.0, 4.0, "x"));
        t.objects.push(obj(0, [0.0, 2.0], [1.0, 1.0]));
        assert!((occupied_floor_area(&t) - 0.5).abs() < 0.03);
    }

    #[test]
    fn nearest_neighbor_mean() {
        let mut s = Scene::empty(Room::rectangle(10.0, 10.0, "x"));
        s.objects.push(obj(0, [1.0, 1.0], [0.5, 0.5]));
        assert_eq!(mean_nearest_neighbor_distance(&s), 0.0);
        s.objects.push(obj(1, [2.0, 1.0], [0.5, 0.5]));
        s.objects.push(obj(2, [5.0, 1.0], [0.5, 0.5]));
        assert!((mean_nearest_neighbor_distance(&s) - 5.0 / 3.0).abs() < 1e-12);
    }

    fn corpus(n: usize, seed: u64) -> Vec<Scene> {
        generate_synthetic_corpus(&GeneratorParams::default(), n, seed).scenes
    }

    #[test]
    fn relabeled_copies_are_indistinguishable() {
        let real = corpus(100, 3);
        let c = bedroom_vocabulary().len();
        let r = feature_classifier_eval(&real, &real, c, 0).unwrap();
        assert!((r.accuracy - 0.5).abs() <= 0.05, "{}", r.accuracy);
    }

    #[test]
    fn emptied_copies_are_separable() {
        let real = corpus(100, 4);
        let empty: Vec<Scene> = real.iter().map(|s| Scene::empty(s.room.clone())).collect();
        let c = bedroom_vocabulary().len();
        let r = feature_classifier_eval(&real, &empty, c, 0).unwrap();
        assert!(r.accuracy >= 0.95, "{}", r.accuracy);
    }
}
