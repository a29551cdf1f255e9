//! Generates a bedroom corpus, trains a bundle, synthesizes rooms and
//! prints the evaluation numbers.
//!
//! `cargo run --release -p plansynth-core --example pipeline -- [train] [synth]`

use std::time::Instant;

use plansynth_core::corpus::{filter_corpus, generate_synthetic_corpus, model_pool, Corpus, FilterRules, GeneratorParams};
use plansynth_core::metrics::{category_counts, category_kl, feature_classifier_eval, perturb_scenes, uniform_baseline_kl};
use plansynth_core::predictors::{train_bundle, TrainConfig};
use plansynth_core::rng::seeded;
use plansynth_core::synth::{synthesize, ModelCatalog, StepOutcome, SynthesisConfig};
use plansynth_core::Scene;

fn mean_objects(scenes: &[Scene]) -> f64 {
    scenes.iter().map(|s| s.objects.len()).sum::<usize>() as f64 / scenes.len().max(1) as f64
}

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let n_train = args.first().copied().unwrap_or(1000);
    let n_synth = args.get(1).copied().unwrap_or(500);
    let params = GeneratorParams::default();
    let t = Instant::now();
    let raw = generate_synthetic_corpus(&params, n_train, 1);
    let pool = model_pool(&params);
    let rules = FilterRules {
        canonical_dims: pool.iter().map(|m| (m.model_id.clone(), m.dims)).collect(),
        ..FilterRules::default()
    };
    let corpus = Corpus {
        scenes: filter_corpus(&raw.scenes, &raw.vocabulary, &rules),
        vocabulary: raw.vocabulary.clone(),
    };
    println!("corpus {} scenes in {:.2}s", corpus.scenes.len(), t.elapsed().as_secs_f64());

    let t = Instant::now();
    let (bundle, report) = train_bundle(&corpus, &TrainConfig::default()).unwrap();
    println!(
        "trained in {:.2}s (category rows {}, location rows {})",
        t.elapsed().as_secs_f64(),
        report.category_rows,
        report.location_rows
    );
    let c = corpus.vocabulary.len();
    let catalog = ModelCatalog::from_scenes(&corpus.scenes, c).with_pool(&pool, c);

    let held_out = generate_synthetic_corpus(&params, n_synth, 2);
    let t = Instant::now();
    let mut synth = Vec::new();
    let (mut failed, mut capped, mut resamples, mut steps) = (0, 0, 0, 0);
    for (i, s) in held_out.scenes.iter().enumerate() {
        let cfg = SynthesisConfig {
            seed: i as u64,
            ..Default::default()
        };
        let (scene, trace) = synthesize(&s.room, &catalog, &bundle, &cfg).unwrap();
        match trace.final_outcome() {
            Some(StepOutcome::Failed) => failed += 1,
            Some(StepOutcome::Cap) => capped += 1,
            _ => {}
        }
        resamples += trace.steps.iter().map(|s| s.category_resamples()).sum::<usize>();
        steps += trace.steps.len();
        synth.push(scene);
    }
    let secs = t.elapsed().as_secs_f64();
    println!(
        "synthesized {} in {:.2}s ({:.4}s/scene), failed {failed}, capped {capped}, resamples/step {:.3}",
        synth.len(),
        secs,
        secs / synth.len() as f64,
        resamples as f64 / steps as f64
    );
    println!("objects/scene synth {:.2} real {:.2}", mean_objects(&synth), mean_objects(&corpus.scenes));
    println!("counts synth {:?}", category_counts(&synth, c));
    println!("counts real  {:?}", category_counts(&corpus.scenes, c));
    println!(
        "KL {:.4}  uniform {:.4}",
        category_kl(&synth, &corpus.scenes, c).unwrap(),
        uniform_baseline_kl(&corpus.scenes, c).unwrap()
    );
    let real = &held_out.scenes;
    println!("classifier {:.4}", feature_classifier_eval(real, &synth, c, 0).unwrap().accuracy);
    for frac in [0.01, 0.05, 0.10] {
        let p = perturb_scenes(real, frac, &mut seeded(11));
        println!("perturbed {frac}: {:.4}", feature_classifier_eval(real, &p, c, 0).unwrap().accuracy);
    }
}
