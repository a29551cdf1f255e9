//! Shared setup for the benchmarks: a bundle trained on a generated corpus
//! with the catalog and rooms to synthesize into.

use plansynth_core::corpus::{filter_corpus, generate_synthetic_corpus, model_pool, Corpus, FilterRules, GeneratorParams};
use plansynth_core::predictors::{train_bundle, TrainConfig};
use plansynth_core::{ModelCatalog, PredictorBundle, Room, Result};

pub struct Setup {
    pub corpus: Corpus,
    pub bundle: PredictorBundle,
    pub catalog: ModelCatalog,
    /// Rooms from an independently seeded corpus.
    pub rooms: Vec<Room>,
}

/// Trains on `n_train` filtered generator scenes with `cfg`.
pub fn setup(n_train: usize, n_rooms: usize, cfg: &TrainConfig) -> Result<Setup> {
    let params = GeneratorParams::default();
    let pool = model_pool(&params);
    let raw = generate_synthetic_corpus(&params, n_train, cfg.seed);
    let rules = FilterRules {
        canonical_dims: pool.iter().map(|m| (m.model_id.clone(), m.dims)).collect(),
        ..FilterRules::default()
    };
    let corpus = Corpus {
        scenes: filter_corpus(&raw.scenes, &raw.vocabulary, &rules),
        vocabulary: raw.vocabulary,
    };
    let (bundle, _) = train_bundle(&corpus, cfg)?;
    let c = corpus.vocabulary.len();
    let catalog = ModelCatalog::from_scenes(&corpus.scenes, c).with_pool(&pool, c);
    let rooms = generate_synthetic_corpus(&params, n_rooms, cfg.seed.wrapping_add(1))
        .scenes
        .into_iter()
        .map(|s| s.room)
        .collect();
    Ok(Setup {
        corpus,
        bundle,
        catalog,
        rooms,
    })
}

/// A reduced training configuration for quick setups.
pub fn quick_config(seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        category_examples: 10,
        location_examples: 2,
        orientation_examples: 4,
        dims_examples: 4,
        ..TrainConfig::default()
    }
}
