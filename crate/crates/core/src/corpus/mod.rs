//! Scene corpora: file I/O, filtering and augmentation, the synthetic
//! bedroom generator, corpus statistics and training-example extraction.

pub mod extract;
pub mod filter;
pub mod generator;
mod io;
mod stats;

pub use extract::{
    extract_category_examples, extract_dims_examples, extract_location_examples, extract_orientation_examples,
    location_example, DimsExample, OrientationExample, EMPTY_PIXEL_WEIGHT,
};
pub use filter::{filter_corpus, rotate_quarter_turns, FilterRules};
pub use generator::{
    bedroom_vocabulary, generate_synthetic_corpus, model_pool, GeneratorParams, ModelSpec, BED, CATEGORY_NAMES, DESK,
    DRESSER, NIGHTSTAND, OFFICE_CHAIR, TABLE_LAMP, WARDROBE,
};
pub use io::{load_corpus, read_corpus, save_corpus, write_corpus, Corpus};
pub use stats::{corpus_stats, CorpusStats};
