//! Scene synthesis and completion by sequential object insertion.

mod catalog;
mod checks;
mod config;
mod engine;
mod fixed;

pub use catalog::{retrieve_model, ModelCatalog, ModelEntry, CATALOG_KIND, RETRIEVAL_SLACK};
pub use checks::{collision_check, overhang_check, resolve_contacts, OVERHANG_SUPPORT_FRACTION};
pub use config::{Attempt, StepOutcome, SynthesisConfig, SynthesisTrace, TraceStep};
pub use fixed::FixedModules;
pub use engine::{
    complete, insert_step, place_category, place_object, suggest, synthesize, DecisionModules, Placement, StepResult,
    Suggestion,
};
