use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::scene::Room;
use crate::synth::{synthesize, DecisionModules, ModelCatalog, SynthesisConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub mean_seconds: f64,
    pub min_seconds: f64,
    pub max_seconds: f64,
    /// Timed runs, not counting the discarded warm-up.
    pub runs: usize,
    pub mean_objects: f64,
}

/// Wall-clock seconds per full synthesis over `n` runs cycling through
/// `rooms`, after one discarded warm-up run. Run `i` uses seed
/// `derive_seed(cfg.seed, i)`.
pub fn bench_synthesis(
    rooms: &[Room],
    catalog: &ModelCatalog,
    modules: &dyn DecisionModules,
    cfg: &SynthesisConfig,
    n: usize,
) -> Result<BenchReport> {
    if rooms.is_empty() || n == 0 {
        return Err(Error::EmptyInput("benchmark rooms"));
    }
    let mut times = Vec::with_capacity(n);
    let mut objects = 0usize;
    for i in 0..=n {
        let run_cfg = SynthesisConfig {
            seed: derive_seed(cfg.seed, i as u64),
            ..cfg.clone()
        };
        let start = Instant::now();
        let (scene, _) = synthesize(&rooms[i % rooms.len()], catalog, modules, &run_cfg)?;
        let secs = start.elapsed().as_secs_f64();
        if i > 0 {
            times.push(secs);
            objects += scene.objects.len();
        }
    }
    Ok(BenchReport {
        mean_seconds: times.iter().sum::<f64>() / n as f64,
        min_seconds: times.iter().cloned().fold(f64::INFINITY, f64::min),
        max_seconds: times.iter().cloned().fold(0.0, f64::max),
        runs: n,
        mean_objects: objects as f64 / n as f64,
    })
}
