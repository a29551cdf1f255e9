//! Object orderings used when extracting training examples.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BinaryHeap};

use rand::Rng;

use super::types::{CategoryVocabulary, ParentId, Scene};
use crate::error::{Error, Result};

/// Index of each object's parent within `scene.objects`, or `None` for the
/// floor. Fails when a parent id does not exist.
fn parent_indices(scene: &Scene) -> Result<Vec<Option<usize>>> {
    let index: BTreeMap<u32, usize> = scene.objects.iter().enumerate().map(|(i, o)| (o.id, i)).collect();
    scene
        .objects
        .iter()
        .map(|o| match o.parent_id {
            ParentId::Floor => Ok(None),
            ParentId::Object(pid) => index
                .get(&pid)
                .copied()
                .map(Some)
                .ok_or_else(|| Error::InvalidScene(format!("object {} has unknown parent {}", o.id, pid))),
        })
        .collect()
}

#[derive(PartialEq)]
struct Key {
    second_tier: bool,
    importance: f64,
    id: u32,
    index: usize,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.second_tier
            .cmp(&other.second_tier)
            .then(other.importance.total_cmp(&self.importance))
            .then(self.id.cmp(&other.id))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical insertion order, as indices into `scene.objects`.
///
/// Floor-supported objects come first, by descending category importance
/// (ties by ascending object id); supported objects follow, and every
/// child is emitted after its parent.
pub fn canonical_order(scene: &Scene, vocab: &CategoryVocabulary) -> Result<Vec<usize>> {
    let parents = parent_indices(scene)?;
    let n = scene.objects.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            children[*p].push(i);
        }
    }
    let key = |i: usize| {
        let o = &scene.objects[i];
        Reverse(Key {
            second_tier: !o.is_floor_supported(),
            importance: vocab.importance(o.category_id),
            id: o.id,
            index: i,
        })
    };
    let mut heap: BinaryHeap<_> = (0..n).filter(|&i| parents[i].is_none()).map(key).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(k)) = heap.pop() {
        order.push(k.index);
        for &c in &children[k.index] {
            heap.push(key(c));
        }
    }
    if order.len() != n {
        return Err(Error::InvalidScene("cyclic support relations".into()));
    }
    Ok(order)
}

fn subtree_sizes(children: &[Vec<usize>], roots: &[usize]) -> Vec<usize> {
    let mut size = vec![1usize; children.len()];
    // post-order via explicit stack
    let mut stack: Vec<(usize, bool)> = roots.iter().map(|&r| (r, false)).collect();
    while let Some((v, done)) = stack.pop() {
        if done {
            size[v] = 1 + children[v].iter().map(|&c| size[c]).sum::<usize>();
        } else {
            stack.push((v, true));
            stack.extend(children[v].iter().map(|&c| (c, false)));
        }
    }
    size
}

/// Uniformly random valid insertion order: floor-supported objects first,
/// children after their parents.
///
/// Floor objects are shuffled uniformly. Supported objects form a forest
/// under their parents; picking each next root with probability
/// proportional to its subtree size yields a uniform linear extension.
pub fn randomized_order<R: Rng + ?Sized>(scene: &Scene, rng: &mut R) -> Result<Vec<usize>> {
    let parents = parent_indices(scene)?;
    let n = scene.objects.len();
    let mut first: Vec<usize> = (0..n).filter(|&i| parents[i].is_none()).collect();
    for i in (1..first.len()).rev() {
        let j = rng.random_range(0..=i);
        first.swap(i, j);
    }

    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ready: Vec<usize> = Vec::new();
    for (i, p) in parents.iter().enumerate() {
        if let Some(p) = *p {
            if parents[p].is_none() {
                ready.push(i);
            } else {
                children[p].push(i);
            }
        }
    }
    let size = subtree_sizes(&children, &ready);
    let mut order = first;
    while !ready.is_empty() {
        let total: usize = ready.iter().map(|&r| size[r]).sum();
        let mut pick = rng.random_range(0..total);
        let mut slot = 0;
        for (k, &r) in ready.iter().enumerate() {
            if pick < size[r] {
                slot = k;
                break;
            }
            pick -= size[r];
        }
        let v = ready.swap_remove(slot);
        order.push(v);
        ready.extend(children[v].iter().copied());
    }
    if order.len() != n {
        return Err(Error::InvalidScene("cyclic support relations".into()));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::scene::types::{Room, SceneObject};

    fn vocab() -> CategoryVocabulary {
        let mut v = CategoryVocabulary::new(&["a", "b", "lamp"], &["lamp"]);
        v.set_statistics(&[100, 1000, 500], &[2.0, 0.1, 0.5]);
        v
    }

    fn obj(id: u32, cat: usize, parent: ParentId) -> SceneObject {
        SceneObject {
            id,
            category_id: cat,
            position: [1.0, 1.0],
            base_height: 0.0,
            theta: 0.0,
            dims: [0.5, 0.5],
            height: 0.5,
            model_id: String::new(),
            parent_id: parent,
        }
    }

    fn scene(objects: Vec<SceneObject>) -> Scene {
        Scene {
            room: Room::rectangle(4.0, 4.0, "bedroom"),
            objects,
        }
    }

    #[test]
    fn importance_orders_floor_objects() {
        // a: 2.0 * 100 = 200, b: 0.1 * 1000 = 100
        let s = scene(vec![obj(0, 1, ParentId::Floor), obj(1, 0, ParentId::Floor)]);
        assert_eq!(canonical_order(&s, &vocab()).unwrap(), vec![1, 0]);
    }

    #[test]
    fn child_follows_parent_despite_importance() {
        let mut v = vocab();
        v.set_statistics(&[100, 1000, 100_000], &[2.0, 0.1, 0.5]);
        let s = scene(vec![obj(7, 2, ParentId::Object(3)), obj(3, 1, ParentId::Floor), obj(1, 0, ParentId::Floor)]);
        let order = canonical_order(&s, &v).unwrap();
        assert_eq!(order, vec![2, 1, 0]);
    }

    #[test]
    fn cycle_is_rejected() {
        let s = scene(vec![obj(0, 0, ParentId::Object(1)), obj(1, 0, ParentId::Object(0))]);
        assert!(canonical_order(&s, &vocab()).is_err());
        assert!(randomized_order(&s, &mut seeded(1)).is_err());
    }

    #[test]
    fn unknown_parent_is_rejected() {
        let s = scene(vec![obj(0, 2, ParentId::Object(42))]);
        assert!(matches!(canonical_order(&s, &vocab()), Err(Error::InvalidScene(_))));
    }

    #[test]
    fn randomized_single_and_deterministic() {
        let s = scene(vec![obj(0, 0, ParentId::Floor)]);
        assert_eq!(randomized_order(&s, &mut seeded(3)).unwrap(), vec![0]);
        let s = scene((0..6).map(|i| obj(i, (i % 2) as usize, ParentId::Floor)).collect());
        let a = randomized_order(&s, &mut seeded(11)).unwrap();
        let b = randomized_order(&s, &mut seeded(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn randomized_respects_tiers() {
        let s = scene(vec![
            obj(0, 2, ParentId::Object(2)),
            obj(1, 0, ParentId::Floor),
            obj(2, 1, ParentId::Floor),
            obj(3, 2, ParentId::Object(1)),
        ]);
        let mut rng = seeded(5);
        for _ in 0..200 {
            let order = randomized_order(&s, &mut rng).unwrap();
            let pos = |i: usize| order.iter().position(|&x| x == i).unwrap();
            assert!(pos(1) < 2 && pos(2) < 2);
        }
    }
}
