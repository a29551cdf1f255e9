//! Subcommands. Each maps onto one library operation; results go to a
//! file or, as JSON, to stdout.

use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use plansynth_core::corpus::{
    filter_corpus, generate_synthetic_corpus, load_corpus, model_pool, save_corpus, Corpus, FilterRules, GeneratorParams,
};
use plansynth_core::formats::{read_document, write_document};
use plansynth_core::metrics::{
    bench_synthesis, category_kl, feature_classifier_eval, max_similarity_profile, perturb_scenes,
    uniform_baseline_kl, EvalReport,
};
use plansynth_core::predictors::{train_bundle, TrainConfig};
use plansynth_core::rng::{derive_seed, stream};
use plansynth_core::synth::{complete, synthesize, CATALOG_KIND};
use plansynth_core::{ModelCatalog, PredictorBundle, Room, Scene, SynthesisConfig};

use crate::api::{router, AppState, Loaded, SceneResponse};

#[derive(Debug, Parser)]
#[command(name = "plansynth", version, about = "Sequential indoor scene synthesis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic bedroom corpus.
    GenCorpus {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Generator parameters as JSON.
        #[arg(long)]
        params: Option<PathBuf>,
        /// Apply the cleaning rules (scale filter against the generator's
        /// model sizes) before writing.
        #[arg(long)]
        filter: bool,
    },
    /// Train a predictor bundle and build a model catalog from a corpus.
    Train {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        catalog_out: PathBuf,
        /// Training configuration as JSON; `--seed` overrides its seed.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Synthesize scenes, either into one room or into the rooms of a corpus.
    Synth {
        #[command(flatten)]
        model: ModelArgs,
        /// A room JSON document; prints `{scene, trace}`.
        #[arg(long, conflicts_with = "rooms")]
        room: Option<PathBuf>,
        /// Corpus whose rooms are reused; writes a corpus of results.
        #[arg(long, requires = "out")]
        rooms: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Complete a partial scene; prints `{scene, trace}`.
    Complete {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        scene: PathBuf,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Category-distribution KL of a synthesized corpus against a reference.
    EvalKl {
        #[arg(long)]
        synth: PathBuf,
        #[arg(long)]
        reference: PathBuf,
    },
    /// Maximum-similarity profile of generated scenes against a sample.
    EvalSim {
        #[arg(long)]
        generated: PathBuf,
        #[arg(long)]
        sample: PathBuf,
    },
    /// Feature-based real-vs-synthetic classification accuracy.
    EvalClassifier {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synth: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also report accuracy against perturbed copies of the real
        /// scenes at these fractions of object size.
        #[arg(long, value_delimiter = ',')]
        perturb: Vec<f64>,
    },
    /// Mean synthesis time per scene over the rooms of a corpus.
    Bench {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        rooms: PathBuf,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[command(flatten)]
        synth: SynthArgs,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, requires = "catalog")]
        bundle: Option<PathBuf>,
        #[arg(long)]
        catalog: Option<PathBuf>,
        #[arg(long, env = "PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Where `/train` writes bundles and catalogs.
        #[arg(long, default_value = "plansynth-data")]
        data_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub bundle: PathBuf,
    #[arg(long)]
    pub catalog: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Synthesis configuration as JSON; `--seed` overrides its seed.
    #[arg(long)]
    pub synth_config: Option<PathBuf>,
}

impl SynthArgs {
    fn config(&self) -> Result<SynthesisConfig> {
        let mut cfg = match &self.synth_config {
            Some(p) => read_json::<SynthesisConfig>(p)?,
            None => SynthesisConfig::default(),
        };
        cfg.seed = self.seed;
        cfg.check()?;
        Ok(cfg)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    plansynth_core::formats::parse_json(&text, 1).with_context(|| format!("parsing {}", path.display()))
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn load_model(args: &ModelArgs) -> Result<Loaded> {
    let bundle = PredictorBundle::load(&args.bundle).with_context(|| format!("loading {}", args.bundle.display()))?;
    let catalog: ModelCatalog =
        read_document(&args.catalog, CATALOG_KIND).with_context(|| format!("loading {}", args.catalog.display()))?;
    Ok(Loaded {
        bundle,
        catalog,
        bundle_path: Some(args.bundle.clone()),
    })
}

fn load(path: &Path) -> Result<Corpus> {
    load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn rooms_of(path: &Path) -> Result<Vec<Room>> {
    let rooms: Vec<Room> = load(path)?.scenes.into_iter().map(|s| s.room).collect();
    if rooms.is_empty() {
        bail!("{} holds no scenes", path.display());
    }
    Ok(rooms)
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenCorpus {
            n,
            seed,
            out,
            params,
            filter,
        } => {
            let params = match params {
                Some(p) => read_json::<GeneratorParams>(&p)?,
                None => GeneratorParams::default(),
            };
            let mut corpus = generate_synthetic_corpus(&params, n, seed);
            if filter {
                let rules = FilterRules {
                    canonical_dims: model_pool(&params).into_iter().map(|m| (m.model_id, m.dims)).collect(),
                    ..FilterRules::default()
                };
                corpus.scenes = filter_corpus(&corpus.scenes, &corpus.vocabulary, &rules);
            }
            save_corpus(&corpus, &out)?;
            eprintln!("wrote {} scenes to {}", corpus.scenes.len(), out.display());
        }
        Command::Train {
            corpus,
            out,
            catalog_out,
            config,
            seed,
        } => {
            let corpus = load(&corpus)?;
            let mut cfg = match config {
                Some(p) => read_json::<TrainConfig>(&p)?,
                None => TrainConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let (bundle, report) = train_bundle(&corpus, &cfg)?;
            bundle.save(&out)?;
            let catalog = ModelCatalog::from_scenes(&corpus.scenes, corpus.vocabulary.len());
            write_document(&catalog_out, CATALOG_KIND, &catalog)?;
            eprintln!(
                "trained on {} scenes ({} category rows, {} location rows); catalog holds {} models",
                corpus.scenes.len(),
                report.category_rows,
                report.location_rows,
                catalog.len()
            );
        }
        Command::Synth {
            model,
            room,
            rooms,
            n,
            out,
            synth,
        } => {
            let loaded = load_model(&model)?;
            let cfg = synth.config()?;
            match (room, rooms) {
                (Some(room), _) => {
                    let room: Room = read_json(&room)?;
                    let (scene, trace) = synthesize(&room, &loaded.catalog, &loaded.bundle, &cfg)?;
                    print_json(&SceneResponse {
                        schema_version: plansynth_core::formats::SCHEMA_VERSION,
                        scene,
                        trace,
                    })?;
                }
                (None, Some(rooms)) => {
                    let rooms = rooms_of(&rooms)?;
                    let n = n.unwrap_or(rooms.len());
                    let mut scenes = Vec::with_capacity(n);
                    for i in 0..n {
                        let run = SynthesisConfig {
                            seed: derive_seed(cfg.seed, i as u64),
                            ..cfg.clone()
                        };
                        scenes.push(synthesize(&rooms[i % rooms.len()], &loaded.catalog, &loaded.bundle, &run)?.0);
                    }
                    let out = out.expect("clap requires --out with --rooms");
                    let corpus = Corpus {
                        vocabulary: loaded.bundle.vocabulary.clone(),
                        scenes,
                    };
                    save_corpus(&corpus, &out)?;
                    eprintln!("wrote {n} scenes to {}", out.display());
                }
                (None, None) => bail!("one of --room or --rooms is required"),
            }
        }
        Command::Complete { model, scene, synth } => {
            let loaded = load_model(&model)?;
            let scene: Scene = read_json(&scene)?;
            let (scene, trace) = complete(&scene, &loaded.catalog, &loaded.bundle, &synth.config()?)?;
            print_json(&SceneResponse {
                schema_version: plansynth_core::formats::SCHEMA_VERSION,
                scene,
                trace,
            })?;
        }
        Command::EvalKl { synth, reference } => {
            let (synth, reference) = (load(&synth)?, load(&reference)?);
            let c = reference.vocabulary.len();
            print_json(&EvalReport {
                kl: Some(category_kl(&synth.scenes, &reference.scenes, c)?),
                uniform_kl: Some(uniform_baseline_kl(&reference.scenes, c)?),
                ..EvalReport::default()
            })?;
        }
        Command::EvalSim { generated, sample } => {
            let (generated, sample) = (load(&generated)?, load(&sample)?);
            let c = sample.vocabulary.len();
            print_json(&EvalReport {
                similarity: Some(max_similarity_profile(&generated.scenes, &sample.scenes, c)),
                ..EvalReport::default()
            })?;
        }
        Command::EvalClassifier {
            real,
            synth,
            seed,
            perturb,
        } => {
            let (real, synth) = (load(&real)?, load(&synth)?);
            let c = real.vocabulary.len();
            let accuracy = feature_classifier_eval(&real.scenes, &synth.scenes, c, seed)?.accuracy;
            let mut perturbed_accuracy = Vec::new();
            for (i, &frac) in perturb.iter().enumerate() {
                let copies = perturb_scenes(&real.scenes, frac, &mut stream(seed, 1 + i as u64));
                perturbed_accuracy.push((frac, feature_classifier_eval(&real.scenes, &copies, c, seed)?.accuracy));
            }
            print_json(&EvalReport {
                classifier_accuracy: Some(accuracy),
                perturbed_accuracy,
                ..EvalReport::default()
            })?;
        }
        Command::Bench { model, rooms, n, synth } => {
            let loaded = load_model(&model)?;
            let rooms = rooms_of(&rooms)?;
            let report = bench_synthesis(&rooms, &loaded.catalog, &loaded.bundle, &synth.config()?, n)?;
            print_json(&report)?;
        }
        Command::Serve {
            bundle,
            catalog,
            port,
            host,
            data_dir,
        } => {
            let loaded = match (bundle, catalog) {
                (Some(bundle), Some(catalog)) => Some(load_model(&ModelArgs { bundle, catalog })?),
                _ => None,
            };
            let addr: SocketAddr = format!("{host}:{port}").parse().context("invalid --host or --port")?;
            serve(AppState::new(loaded, data_dir), addr)?;
        }
    }
    Ok(())
}

fn serve(state: AppState, addr: SocketAddr) -> Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        tracing::info!(%addr, bundle_loaded = state.loaded().is_some(), "listening");
        axum::serve(listener, router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
