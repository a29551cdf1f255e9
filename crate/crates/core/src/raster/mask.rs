use super::image::{FloorPlanImage, CATEGORY_BASE, FLOOR};
use crate::corpus::CorpusStats;
use crate::scene::{CategoryVocabulary, Tier};

/// Pixels where an object of `category_id` may be centered.
///
/// Second-tier categories may only land on the top surface of an object
/// whose category was observed supporting them; first-tier categories land
/// on floor not yet covered by first-tier objects. Both are restricted to
/// the floor polygon.
pub fn support_mask(img: &FloorPlanImage, category_id: usize, vocab: &CategoryVocabulary, stats: &CorpusStats) -> Vec<bool> {
    let floor = img.channel(FLOOR);
    let n = floor.len();
    let nc = img.num_categories().min(vocab.len());
    let mut mask: Vec<bool> = floor.iter().map(|&v| v != 0.0).collect();
    match vocab.tier(category_id) {
        Some(Tier::Second) => {
            let mut covered = vec![false; n];
            if let Some(supporters) = stats.supporter_sets.get(category_id) {
                for &s in supporters.iter().filter(|&&s| s < nc) {
                    for (c, &v) in covered.iter_mut().zip(img.channel(CATEGORY_BASE + s)) {
                        *c |= v != 0.0;
                    }
                }
            }
            for (m, c) in mask.iter_mut().zip(covered) {
                *m &= c;
            }
        }
        Some(Tier::First) => {
            for cat in (0..nc).filter(|&c| vocab.tier(c) == Some(Tier::First)) {
                for (m, &v) in mask.iter_mut().zip(img.channel(CATEGORY_BASE + cat)) {
                    *m &= v == 0.0;
                }
            }
        }
        None => mask.iter_mut().for_each(|m| *m = false),
    }
    mask
}
