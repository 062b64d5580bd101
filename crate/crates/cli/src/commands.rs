//! Subcommand bodies. Each returns the number of failed folds (zero for
//! commands without folds).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use tdabc::classifier::{classify_all, write_predictions_csv};
use tdabc::datasets::{by_name, load_csv, load_points_csv, LabeledDataset, RAMP_STEPS};
use tdabc::evaluation::{run_experiment, run_ramp, split, FoldPlan};
use tdabc::{boundary_reduce, build_rips, pairwise_distances, AssociationTable, Error};

use crate::config::RunConfig;

/// Loads the configured dataset. With `labels_optional`, a CSV lacking the
/// label column is read as unlabeled points.
fn load(config: &RunConfig, labels_optional: bool) -> Result<LabeledDataset> {
    match (&config.dataset, &config.input) {
        (Some(name), _) => Ok(by_name(name, config.seed)?),
        (None, Some(path)) => match load_csv(path, &config.label_column) {
            Err(Error::MissingLabelColumn(_)) if labels_optional => Ok(load_points_csv(path)?),
            other => Ok(other?),
        },
        (None, None) => bail!("no input: pass --dataset <name> or --input <file.csv>"),
    }
}

fn out_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

pub fn generate(config: &RunConfig) -> Result<()> {
    let Some(name) = &config.dataset else {
        bail!("generate needs --dataset <name>");
    };
    let dataset = by_name(name, config.seed)?;
    let (csv, spec) = dataset.save(&out_dir(config)?)?;
    println!("{} points, classes {:?}", dataset.len(), dataset.class_counts());
    println!("wrote {}", csv.display());
    println!("wrote {}", spec.display());
    Ok(())
}

pub fn persistence(config: &RunConfig) -> Result<()> {
    let dataset = load(config, true)?;
    let dist = pairwise_distances(&dataset.cloud, config.rips.metric)?;
    let complex = build_rips(&dist, &config.rips)?;
    let diagram = boundary_reduce(&complex);
    log::info!("{} simplices, {} intervals", complex.len(), diagram.intervals.len());

    let dir = out_dir(config)?;
    let csv = dir.join(format!("{}.diagram.csv", dataset.name));
    let json = dir.join(format!("{}.diagram.json", dataset.name));
    let barcode = dir.join(format!("{}.barcode.csv", dataset.name));
    diagram.save(&csv, &json)?;
    let mut buf = Vec::new();
    diagram.write_barcode_csv(&mut buf)?;
    write(&barcode, &buf)?;
    for path in [csv, json, barcode] {
        println!("wrote {}", path.display());
    }
    Ok(())
}

/// Test indices: the explicit list, or the first fold of a stratified split
/// with `1 / test_fraction` folds.
fn holdout(dataset: &LabeledDataset, config: &RunConfig, explicit: Option<&[usize]>) -> Result<Vec<usize>> {
    if let Some(indices) = explicit {
        if let Some(&bad) = indices.iter().find(|&&i| i >= dataset.len()) {
            bail!("test index {bad} out of range for {} points", dataset.len());
        }
        return Ok(indices.to_vec());
    }
    let f = config.test_fraction;
    if !(f > 0.0 && f < 1.0) {
        bail!("test fraction must lie in (0, 1), got {f}");
    }
    let plan = FoldPlan {
        folds: ((1.0 / f).round() as usize).max(2),
        repeats: 1,
        stratified: true,
        seed: config.seed,
    };
    let mut folds = split(&dataset.labels, &plan)?;
    Ok(folds.swap_remove(0).test)
}

pub fn classify(config: &RunConfig, test_indices: Option<&[usize]>) -> Result<()> {
    let dataset = load(config, false)?;
    let test = holdout(&dataset, config, test_indices)?;
    let table = AssociationTable::from_split(&dataset.labels, dataset.n_classes, &test)?;
    let dist = pairwise_distances(&dataset.cloud, config.rips.metric)?;
    let complex = build_rips(&dist, &config.rips)?;
    let diagram = boundary_reduce(&complex);
    let policy = config.experiment().policy;
    let predictions = classify_all(&complex, &diagram, &dist, &table, &policy)?;

    let correct = predictions
        .iter()
        .filter(|p| table.truth(p.vertex) == Some(p.label))
        .count();
    println!(
        "{}: {correct}/{} test points correct ({:.4})",
        dataset.name,
        predictions.len(),
        correct as f64 / predictions.len().max(1) as f64
    );

    let dir = out_dir(config)?;
    let csv = dir.join(format!("{}.predictions.csv", dataset.name));
    let json = dir.join(format!("{}.predictions.json", dataset.name));
    let mut buf = Vec::new();
    write_predictions_csv(&predictions, dataset.n_classes, &mut buf)?;
    write(&csv, &buf)?;
    write(&json, (serde_json::to_string_pretty(&predictions)? + "\n").as_bytes())?;
    println!("wrote {}", csv.display());
    println!("wrote {}", json.display());
    Ok(())
}

pub fn evaluate(config: &RunConfig) -> Result<usize> {
    let dataset = load(config, false)?;
    let report = run_experiment(&dataset, &config.experiment())?;
    for path in report.save(&out_dir(config)?, &dataset.name)? {
        println!("wrote {}", path.display());
    }
    Ok(report.failures())
}

pub fn evaluate_ramp(config: &RunConfig, steps: Option<&[usize]>) -> Result<usize> {
    let all: Vec<usize> = (1..=RAMP_STEPS).collect();
    let report = run_ramp(steps.unwrap_or(&all), config.seed, &config.experiment())?;
    for path in report.save(&out_dir(config)?)? {
        println!("wrote {}", path.display());
    }
    Ok(report.failures())
}
