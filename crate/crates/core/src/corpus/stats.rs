use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::scene::{CategoryVocabulary, ParentId, Scene};

/// Exact counts gathered from a training corpus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub num_scenes: usize,
    /// Instances per category.
    pub frequency: Vec<u64>,
    /// Mean `w · d` per category; zero for unseen categories.
    pub mean_footprint_area: Vec<f64>,
    /// For each category, the categories observed supporting it (empty for
    /// first-tier categories).
    pub supporter_sets: Vec<BTreeSet<usize>>,
    /// `cooccurrence[a][b]`: scenes containing both `a` and `b`; on the
    /// diagonal, scenes containing at least two instances of `a`.
    pub cooccurrence: Vec<Vec<u64>>,
    /// Largest object count seen per room type.
    pub max_object_count: BTreeMap<String, usize>,
}

impl CorpusStats {
    pub fn num_categories(&self) -> usize {
        self.frequency.len()
    }

    /// Copy of `vocab` carrying these frequencies and areas.
    pub fn annotate(&self, vocab: &CategoryVocabulary) -> CategoryVocabulary {
        let mut v = vocab.clone();
        v.set_statistics(&self.frequency, &self.mean_footprint_area);
        v
    }

    /// Largest count over all room types.
    pub fn overall_max_objects(&self) -> usize {
        self.max_object_count.values().copied().max().unwrap_or(0)
    }

    /// Per-category share of all instances.
    pub fn category_distribution(&self) -> Vec<f64> {
        let total: u64 = self.frequency.iter().sum();
        self.frequency
            .iter()
            .map(|&f| if total == 0 { 0.0 } else { f as f64 / total as f64 })
            .collect()
    }
}

pub fn corpus_stats(scenes: &[Scene], vocab: &CategoryVocabulary) -> CorpusStats {
    let c = vocab.len();
    let mut stats = CorpusStats {
        num_scenes: scenes.len(),
        frequency: vec![0; c],
        mean_footprint_area: vec![0.0; c],
        supporter_sets: vec![BTreeSet::new(); c],
        cooccurrence: vec![vec![0; c]; c],
        max_object_count: BTreeMap::new(),
    };
    let mut area_sum = vec![0.0; c];
    for scene in scenes {
        let counts = scene.category_counts(c);
        for o in &scene.objects {
            if o.category_id >= c {
                continue;
            }
            stats.frequency[o.category_id] += 1;
            area_sum[o.category_id] += o.footprint_area();
            if let ParentId::Object(pid) = o.parent_id {
                if let Some(parent) = scene.object(pid) {
                    if parent.category_id < c {
                        stats.supporter_sets[o.category_id].insert(parent.category_id);
                    }
                }
            }
        }
        for a in 0..c {
            for b in 0..c {
                let present = if a == b { counts[a] >= 2 } else { counts[a] > 0 && counts[b] > 0 };
                stats.cooccurrence[a][b] += present as u64;
            }
        }
        let entry = stats.max_object_count.entry(scene.room_type().to_string()).or_insert(0);
        *entry = (*entry).max(scene.objects.len());
    }
    for k in 0..c {
        if stats.frequency[k] > 0 {
            stats.mean_footprint_area[k] = area_sum[k] / stats.frequency[k] as f64;
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Room, SceneObject};

    fn obj(id: u32, cat: usize, parent: ParentId) -> SceneObject {
        SceneObject {
            id,
            category_id: cat,
            position: [1.0, 1.0],
            base_height: 0.0,
            theta: 0.0,
            dims: [1.0, 2.0],
            height: 0.5,
            model_id: "m".into(),
            parent_id: parent,
        }
    }

    #[test]
    fn bed_and_nightstand() {
        let v = CategoryVocabulary::new(&["bed", "nightstand", "lamp"], &["lamp"]);
        let mut s = Scene::empty(Room::rectangle(4.0, 4.0, "bedroom"));
        s.objects = vec![obj(0, 0, ParentId::Floor), obj(1, 1, ParentId::Floor), obj(2, 2, ParentId::Object(1))];
        let st = corpus_stats(&[s], &v);
        assert_eq!(st.cooccurrence[0][1], 1);
        assert_eq!(st.cooccurrence[1][0], 1);
        assert_eq!(st.cooccurrence[0][0], 0);
        assert_eq!(st.supporter_sets[2], BTreeSet::from([1]));
        assert_eq!(st.frequency, vec![1, 1, 1]);
        assert_eq!(st.mean_footprint_area[0], 2.0);
        assert_eq!(st.max_object_count["bedroom"], 3);
    }
}
