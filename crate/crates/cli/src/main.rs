mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use tdabc::evaluation::ClassifierKind;
use tdabc::{EdgeCap, EpsilonMode, Metric, Recovery, Selector};

use config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "tdabc", version, about = "Persistence-guided label propagation classifier")]
struct Cli {
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a named dataset as `<name>.csv` plus `<name>.spec.json`.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Compute the persistence diagram and barcode of a dataset.
    Persistence {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        rips: RipsFlags,
    },
    /// Hold out part of a dataset and label it.
    Classify {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        rips: RipsFlags,
        #[command(flatten)]
        selection: SelectionFlags,
        /// Share of each class to hold out.
        #[arg(long)]
        test_fraction: Option<f64>,
        /// Explicit comma-separated test indices instead of a random split.
        #[arg(long, value_delimiter = ',')]
        test_indices: Option<Vec<usize>>,
    },
    /// Repeated stratified cross-validation of TDABC and the baselines.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        rips: RipsFlags,
        #[command(flatten)]
        selection: SelectionFlags,
        /// Run all imbalance ramp steps instead of a single dataset.
        #[arg(long)]
        ramp: bool,
        /// Restrict the ramp to these steps.
        #[arg(long, value_delimiter = ',', requires = "ramp")]
        steps: Option<Vec<usize>>,
        /// Classifiers to run (TDABC-A, TDABC-M, TDABC-R, KNN, WKNN).
        #[arg(long, value_delimiter = ',')]
        classifiers: Option<Vec<ClassifierKind>>,
        /// Run only these baselines next to the TDABC variants.
        #[arg(long, value_delimiter = ',', value_parser = ["knn", "wknn"])]
        baseline: Option<Vec<String>>,
        #[arg(long)]
        k: Option<usize>,
        /// Weight baseline votes by inverse class frequency.
        #[arg(long)]
        balanced: bool,
        #[arg(long)]
        folds: Option<usize>,
        #[arg(long)]
        repeats: Option<usize>,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Named dataset (circles, moons, swissroll, normal, sphere, sphere-small,
    /// iris, wine, cancer, ramp1..ramp16).
    #[arg(long)]
    dataset: Option<String>,
    /// CSV file with a header row.
    #[arg(long, conflicts_with = "dataset")]
    input: Option<PathBuf>,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [env: TDABC_OUT_DIR, default: results].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RipsFlags {
    #[arg(long)]
    max_dim: Option<usize>,
    /// `auto`, `inf`, or a number.
    #[arg(long)]
    max_edge: Option<EdgeCap>,
    #[arg(long)]
    metric: Option<Metric>,
    /// Largest complex the builder may produce.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct SelectionFlags {
    /// `max`, `rand` or `avg`.
    #[arg(long)]
    selector: Option<Selector>,
    /// `birth`, `death` or `mid`.
    #[arg(long)]
    epsilon_mode: Option<EpsilonMode>,
    /// `sublevel` or `lifespan`.
    #[arg(long)]
    recovery: Option<Recovery>,
}

impl Common {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(d) = &self.dataset {
            c.dataset = Some(d.clone());
            c.input = None;
        }
        if let Some(p) = &self.input {
            c.input = Some(p.clone());
            c.dataset = None;
        }
        if let Some(l) = &self.label_column {
            c.label_column = l.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(o) = &self.out {
            c.out = Some(o.clone());
        }
    }
}

impl RipsFlags {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(d) = self.max_dim {
            c.rips.max_dim = d;
        }
        if let Some(e) = self.max_edge {
            c.rips.max_edge = e;
        }
        if let Some(m) = self.metric {
            c.rips.metric = m;
        }
        if let Some(b) = self.budget {
            c.rips.budget = b;
        }
    }
}

impl SelectionFlags {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(s) = self.selector {
            c.policy.selector = s;
        }
        if let Some(e) = self.epsilon_mode {
            c.policy.epsilon_mode = e;
        }
        if let Some(r) = self.recovery {
            c.policy.recovery = r;
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if cli.jobs.is_some() {
        config.jobs = cli.jobs;
    }
    if let Some(jobs) = config.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }

    let failures = match cli.command {
        Command::Generate { common } => {
            common.apply(&mut config);
            commands::generate(&config)?;
            0
        }
        Command::Persistence { common, rips } => {
            common.apply(&mut config);
            rips.apply(&mut config);
            commands::persistence(&config)?;
            0
        }
        Command::Classify {
            common,
            rips,
            selection,
            test_fraction,
            test_indices,
        } => {
            common.apply(&mut config);
            rips.apply(&mut config);
            selection.apply(&mut config);
            if let Some(f) = test_fraction {
                config.test_fraction = f;
            }
            commands::classify(&config, test_indices.as_deref())?;
            0
        }
        Command::Evaluate {
            common,
            rips,
            selection,
            ramp,
            steps,
            classifiers,
            baseline,
            k,
            balanced,
            folds,
            repeats,
        } => {
            common.apply(&mut config);
            rips.apply(&mut config);
            selection.apply(&mut config);
            if let Some(list) = classifiers {
                config.classifiers = list;
            }
            if let Some(names) = baseline {
                config.classifiers.retain(|c| c.is_tdabc());
                for name in names {
                    config.classifiers.push(name.parse()?);
                }
            }
            if let Some(k) = k {
                config.knn.k = k;
            }
            if balanced {
                config.knn.balanced = true;
            }
            if let Some(f) = folds {
                config.plan.folds = f;
            }
            if let Some(r) = repeats {
                config.plan.repeats = r;
            }
            if ramp {
                commands::evaluate_ramp(&config, steps.as_deref())?
            } else {
                commands::evaluate(&config)?
            }
        }
    };

    if failures > 0 {
        log::error!("{failures} classifier folds failed");
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
