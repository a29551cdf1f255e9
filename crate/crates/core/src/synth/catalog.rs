use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::ModelSpec;
use crate::error::{Error, Result};
use crate::scene::Scene;

/// A retrievable object model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelEntry {
    pub model_id: String,
    pub category_id: usize,
    /// `(w, d, h)` in meters.
    pub dims: [f64; 3],
    /// Opaque reference to the model's geometry.
    #[serde(default)]
    pub mesh_ref: String,
    /// Scenes in which this model appeared together with each category.
    pub cooccurrence: Vec<u64>,
}

pub const CATALOG_KIND: &str = "model_catalog";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelCatalog {
    pub entries: Vec<ModelEntry>,
}

/// Relative slack around the nearest size match within which co-occurrence
/// decides between candidates.
pub const RETRIEVAL_SLACK: f64 = 0.1;

impl ModelCatalog {
    pub fn new(mut entries: Vec<ModelEntry>) -> Self {
        entries.sort_by(|a, b| a.model_id.cmp(&b.model_id));
        Self { entries }
    }

    /// Every model used in `scenes`, with dims taken from its first use and
    /// co-occurrence counted per scene.
    pub fn from_scenes(scenes: &[Scene], num_categories: usize) -> Self {
        let mut map: BTreeMap<String, ModelEntry> = BTreeMap::new();
        for scene in scenes {
            let present = scene.category_counts(num_categories);
            let mut seen = std::collections::BTreeSet::new();
            for o in &scene.objects {
                if o.category_id >= num_categories {
                    continue;
                }
                let e = map.entry(o.model_id.clone()).or_insert_with(|| ModelEntry {
                    model_id: o.model_id.clone(),
                    category_id: o.category_id,
                    dims: [o.dims[0], o.dims[1], o.height],
                    mesh_ref: format!("mesh://{}", o.model_id),
                    cooccurrence: vec![0; num_categories],
                });
                if seen.insert(o.model_id.as_str()) {
                    for (c, n) in e.cooccurrence.iter_mut().zip(&present) {
                        *c += u64::from(*n > 0);
                    }
                }
            }
        }
        Self::new(map.into_values().collect())
    }

    /// Adds pool models missing from the catalog, with zero co-occurrence.
    pub fn with_pool(mut self, pool: &[ModelSpec], num_categories: usize) -> Self {
        for m in pool {
            if self.entries.iter().all(|e| e.model_id != m.model_id) {
                self.entries.push(ModelEntry {
                    model_id: m.model_id.clone(),
                    category_id: m.category_id,
                    dims: m.dims,
                    mesh_ref: format!("mesh://{}", m.model_id),
                    cooccurrence: vec![0; num_categories],
                });
            }
        }
        Self::new(self.entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, model_id: &str) -> Option<&ModelEntry> {
        self.entries.iter().find(|e| e.model_id == model_id)
    }

    fn size_distance(e: &ModelEntry, dims: [f64; 2]) -> f64 {
        (e.dims[0] - dims[0]).hypot(e.dims[1] - dims[1])
    }

    fn preference(e: &ModelEntry, scene: &Scene) -> u64 {
        let present = scene.category_counts(e.cooccurrence.len());
        e.cooccurrence
            .iter()
            .zip(present)
            .filter(|(_, n)| *n > 0)
            .map(|(c, _)| *c)
            .sum()
    }

    /// Models of `category_id` in retrieval order: the best match first,
    /// then the rest by increasing size distance (ties by model id).
    ///
    /// The best match is the nearest in `(w, d)`; among models within
    /// [`RETRIEVAL_SLACK`] of the nearest distance the one co-occurring most
    /// with the scene's categories wins, ties by model id.
    pub fn ranked(&self, category_id: usize, dims: [f64; 2], scene: &Scene) -> Result<Vec<&ModelEntry>> {
        let mut cands: Vec<(f64, &ModelEntry)> = self
            .entries
            .iter()
            .filter(|e| e.category_id == category_id)
            .map(|e| (Self::size_distance(e, dims), e))
            .collect();
        if cands.is_empty() {
            return Err(Error::NoCatalogEntry(category_id));
        }
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.model_id.cmp(&b.1.model_id)));
        let limit = cands[0].0 * (1.0 + RETRIEVAL_SLACK);
        let best = cands
            .iter()
            .enumerate()
            .take_while(|(_, (d, _))| *d <= limit)
            .max_by(|(_, (_, a)), (_, (_, b))| {
                Self::preference(a, scene)
                    .cmp(&Self::preference(b, scene))
                    .then_with(|| b.model_id.cmp(&a.model_id))
            })
            .map(|(i, _)| i)
            .expect("at least one candidate");
        let first = cands.remove(best);
        Ok(std::iter::once(first.1).chain(cands.into_iter().map(|c| c.1)).collect())
    }

    /// The best match for a predicted size.
    pub fn retrieve(&self, category_id: usize, dims: [f64; 2], scene: &Scene) -> Result<&ModelEntry> {
        Ok(self.ranked(category_id, dims, scene)?[0])
    }
}

pub fn retrieve_model<'a>(
    catalog: &'a ModelCatalog,
    category_id: usize,
    dims: [f64; 2],
    scene: &Scene,
) -> Result<&'a ModelEntry> {
    catalog.retrieve(category_id, dims, scene)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::scene::{ParentId, Room, SceneObject};
    use rand::Rng;

    fn entry(id: &str, cat: usize, w: f64, d: f64, co: Vec<u64>) -> ModelEntry {
        ModelEntry {
            model_id: id.into(),
            category_id: cat,
            dims: [w, d, 1.0],
            mesh_ref: String::new(),
            cooccurrence: co,
        }
    }

    fn scene_with(cat: usize) -> Scene {
        let mut s = Scene::empty(Room::rectangle(5.0, 5.0, "living"));
        s.objects.push(SceneObject {
            id: 0,
            category_id: cat,
            position: [2.0, 2.0],
            base_height: 0.0,
            theta: 0.0,
            dims: [2.0, 1.0],
            height: 0.8,
            model_id: "sofa".into(),
            parent_id: ParentId::Floor,
        });
        s
    }

    #[test]
    fn exact_match_wins() {
        let cat = ModelCatalog::new(vec![
            entry("a", 0, 1.0, 1.0, vec![0, 0]),
            entry("b", 0, 1.5, 0.5, vec![0, 0]),
        ]);
        let s = Scene::empty(Room::rectangle(4.0, 4.0, "x"));
        assert_eq!(cat.retrieve(0, [1.5, 0.5], &s).unwrap().model_id, "b");
        assert!(matches!(cat.retrieve(1, [1.0, 1.0], &s), Err(Error::NoCatalogEntry(1))));
    }

    #[test]
    fn cooccurrence_breaks_distance_ties() {
        // category 1 is a sofa present in the scene
        let cat = ModelCatalog::new(vec![
            entry("a", 0, 1.0, 1.0, vec![0, 1]),
            entry("b", 0, 1.2, 1.0, vec![0, 9]),
        ]);
        let s = scene_with(1);
        assert_eq!(cat.retrieve(0, [1.1, 1.0], &s).unwrap().model_id, "b");
        let empty = Scene::empty(Room::rectangle(4.0, 4.0, "x"));
        assert_eq!(cat.retrieve(0, [1.1, 1.0], &empty).unwrap().model_id, "a");
    }

    #[test]
    fn nearest_matches_linear_scan() {
        let mut rng = seeded(77);
        let s = Scene::empty(Room::rectangle(4.0, 4.0, "x"));
        for _ in 0..100 {
            let n = rng.random_range(1..20);
            let entries: Vec<ModelEntry> = (0..n)
                .map(|i| entry(&format!("m{i:02}"), 0, rng.random_range(0.2..2.0), rng.random_range(0.2..2.0), vec![0]))
                .collect();
            let q = [rng.random_range(0.2..2.0), rng.random_range(0.2..2.0)];
            let mut best = &entries[0];
            let mut bd = f64::INFINITY;
            for e in &entries {
                let d = ((e.dims[0] - q[0]).powi(2) + (e.dims[1] - q[1]).powi(2)).sqrt();
                if d < bd || (d == bd && e.model_id < best.model_id) {
                    bd = d;
                    best = e;
                }
            }
            let cat = ModelCatalog::new(entries.clone());
            // with no co-occurrence, the slack window resolves by model id
            let got = cat.retrieve(0, q, &s).unwrap();
            let d = ((got.dims[0] - q[0]).powi(2) + (got.dims[1] - q[1]).powi(2)).sqrt();
            assert!(d <= bd * 1.1 + 1e-12);
            let window_min_id = entries
                .iter()
                .filter(|e| ((e.dims[0] - q[0]).powi(2) + (e.dims[1] - q[1]).powi(2)).sqrt() <= bd * 1.1)
                .map(|e| e.model_id.clone())
                .min()
                .unwrap();
            assert_eq!(got.model_id, window_min_id);
            let ranked = cat.ranked(0, q, &s).unwrap();
            assert_eq!(ranked.len(), n);
        }
    }
}
