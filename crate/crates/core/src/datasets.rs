//! Synthetic generators, CSV ingestion and the bundled real datasets.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::Rng as _;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rips::PointCloud;
use crate::rng::{self, Rng};

/// How a dataset was produced; serialized next to every emitted dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSpec {
    Circles {
        n_per_class: usize,
        noise: f64,
        seed: u64,
    },
    Moons {
        n_per_class: usize,
        noise: f64,
        seed: u64,
    },
    Swissroll {
        n_per_class: usize,
        n_classes: usize,
        noise: f64,
        seed: u64,
    },
    Gaussian {
        dims: usize,
        sizes: Vec<usize>,
        means: Vec<f64>,
        stdev: f64,
        seed: u64,
    },
    Sphere {
        sizes: Vec<usize>,
        mean: f64,
        stdev: f64,
        seed: u64,
    },
    ImbalanceRamp {
        step: usize,
        seed: u64,
    },
    Csv {
        path: PathBuf,
        label_column: String,
    },
    Bundled {
        name: String,
    },
    LogShift {
        shift: f64,
        source: Box<DatasetSpec>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub cloud: PointCloud,
    pub labels: Vec<usize>,
    pub n_classes: usize,
    pub spec: DatasetSpec,
}

impl LabeledDataset {
    pub fn new(name: impl Into<String>, cloud: PointCloud, labels: Vec<usize>, spec: DatasetSpec) -> Result<Self> {
        if labels.len() != cloud.len() {
            return Err(Error::DimensionMismatch {
                index: labels.len().min(cloud.len()),
                expected: cloud.len(),
                found: labels.len(),
            });
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Ok(LabeledDataset {
            name: name.into(),
            cloud,
            labels,
            n_classes,
            spec,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Writes `x0,..,x{d-1},label`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.cloud.dim()).map(|i| format!("x{i}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for (p, l) in self.cloud.iter().zip(&self.labels) {
            let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            row.push(l.to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Writes `<dir>/<name>.csv` and `<dir>/<name>.spec.json`.
    pub fn save(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let json_path = dir.join(format!("{}.spec.json", self.name));
        let file = std::fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        self.write_csv(std::io::BufWriter::new(file))?;
        let json = serde_json::to_string_pretty(&self.spec)?;
        std::fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;
        Ok((csv_path, json_path))
    }
}

fn require_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(Error::InvalidConfig(format!(
            "class sizes must be positive, got {sizes:?}"
        )));
    }
    Ok(())
}

fn jitter(rng: &mut Rng, scale: f64) -> f64 {
    if scale == 0.0 {
        0.0
    } else {
        scale * rng.sample::<f64, _>(StandardNormal)
    }
}

fn build(name: &str, rows: Vec<Vec<f64>>, labels: Vec<usize>, spec: DatasetSpec) -> Result<LabeledDataset> {
    LabeledDataset::new(name, PointCloud::new(rows)?, labels, spec)
}

/// Evenly spaced angles in `[0, 2π)`, endpoint excluded.
fn ring(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| 2.0 * PI * i as f64 / n as f64)
}

/// Two concentric circles of radius 1 (class 0) and 0.5 (class 1), with
/// Gaussian jitter of scale `noise/100`.
pub fn make_circles(n_per_class: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    require_sizes(&[n_per_class])?;
    let mut rng = rng::stream(seed, &[0xc12c1e]);
    let scale = noise / 100.0;
    let mut rows = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for (class, radius) in [(0, 1.0), (1, 0.5)] {
        for t in ring(n_per_class) {
            let x = radius * t.cos() + jitter(&mut rng, scale);
            let y = radius * t.sin() + jitter(&mut rng, scale);
            rows.push(vec![x, y]);
            labels.push(class);
        }
    }
    build(
        "circles",
        rows,
        labels,
        DatasetSpec::Circles {
            n_per_class,
            noise,
            seed,
        },
    )
}

/// Two interleaving half circles with Gaussian jitter of scale `noise/100`.
pub fn make_moons(n_per_class: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    require_sizes(&[n_per_class])?;
    let mut rng = rng::stream(seed, &[0x300f5]);
    let scale = noise / 100.0;
    let step = if n_per_class > 1 {
        PI / (n_per_class - 1) as f64
    } else {
        0.0
    };
    let mut rows = Vec::with_capacity(2 * n_per_class);
    let mut labels = Vec::with_capacity(2 * n_per_class);
    for class in 0..2 {
        for i in 0..n_per_class {
            let t = i as f64 * step;
            let (x, y) = if class == 0 {
                (t.cos(), t.sin())
            } else {
                (1.0 - t.cos(), 0.5 - t.sin())
            };
            rows.push(vec![x + jitter(&mut rng, scale), y + jitter(&mut rng, scale)]);
            labels.push(class);
        }
    }
    build(
        "moons",
        rows,
        labels,
        DatasetSpec::Moons {
            n_per_class,
            noise,
            seed,
        },
    )
}

/// A 3-D spiral sheet scaled to unit radius. Points are ordered along the
/// spiral and cut into `n_classes` consecutive bands of `n_per_class` points.
pub fn make_swissroll(n_per_class: usize, n_classes: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    require_sizes(&[n_per_class, n_classes])?;
    let mut rng = rng::stream(seed, &[0x5715]);
    let scale = noise / 100.0;
    let n = n_per_class * n_classes;
    let t_max = 4.5 * PI;
    let mut params: Vec<(f64, f64)> = (0..n)
        .map(|_| (1.5 * PI * (1.0 + 2.0 * rng.random::<f64>()), rng.random::<f64>()))
        .collect();
    params.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (i, (t, h)) in params.into_iter().enumerate() {
        let x = t * t.cos() / t_max;
        let y = 21.0 * h / t_max;
        let z = t * t.sin() / t_max;
        rows.push(vec![
            x + jitter(&mut rng, scale),
            y + jitter(&mut rng, scale),
            z + jitter(&mut rng, scale),
        ]);
        labels.push(i / n_per_class);
    }
    build(
        "swissroll",
        rows,
        labels,
        DatasetSpec::Swissroll {
            n_per_class,
            n_classes,
            noise,
            seed,
        },
    )
}

/// Class `c` sampled per dimension from `N(means[c], stdev²)`.
pub fn make_gaussian_classes(
    dims: usize,
    sizes: &[usize],
    means: &[f64],
    stdev: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    require_sizes(sizes)?;
    if sizes.len() != means.len() {
        return Err(Error::InvalidConfig(format!(
            "{} class sizes but {} means",
            sizes.len(),
            means.len()
        )));
    }
    if dims == 0 || stdev.is_nan() || stdev < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "need dims > 0 and stdev ≥ 0, got {dims} and {stdev}"
        )));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, (&size, &mean)) in sizes.iter().zip(means).enumerate() {
        let mut rng = rng::stream(seed, &[0x9a55, c as u64]);
        for _ in 0..size {
            rows.push((0..dims).map(|_| mean + jitter(&mut rng, stdev)).collect());
            labels.push(c);
        }
    }
    let spec = DatasetSpec::Gaussian {
        dims,
        sizes: sizes.to_vec(),
        means: means.to_vec(),
        stdev,
        seed,
    };
    build("normal", rows, labels, spec)
}

/// Shell radius `mean·(1 + c·stdev)` of class `c`. Consecutive shells sit
/// `mean·stdev` apart, well inside the radial noise, so classes entangle.
pub fn sphere_radius(mean: f64, stdev: f64, class: usize) -> f64 {
    mean * (1.0 + class as f64 * stdev)
}

/// Class `c` on a sphere shell of radius [`sphere_radius`] with Gaussian
/// radial noise of scale `stdev`.
pub fn make_sphere(sizes: &[usize], mean: f64, stdev: f64, seed: u64) -> Result<LabeledDataset> {
    require_sizes(sizes)?;
    if mean.is_nan() || mean <= 0.0 || stdev.is_nan() || stdev < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "need mean > 0 and stdev ≥ 0, got {mean} and {stdev}"
        )));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &size) in sizes.iter().enumerate() {
        let mut rng = rng::stream(seed, &[0x5f3e, c as u64]);
        let r0 = sphere_radius(mean, stdev, c);
        for _ in 0..size {
            let dir: [f64; 3] = loop {
                let d = [0; 3].map(|_| rng.sample::<f64, _>(StandardNormal));
                let norm = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-9 {
                    break d.map(|x| x / norm);
                }
            };
            let r = r0 + jitter(&mut rng, stdev);
            rows.push(dir.iter().map(|x| r * x).collect());
            labels.push(c);
        }
    }
    let spec = DatasetSpec::Sphere {
        sizes: sizes.to_vec(),
        mean,
        stdev,
        seed,
    };
    build("sphere", rows, labels, spec)
}

pub const RAMP_STEPS: usize = 16;
pub const RAMP_MINORITY: usize = 50;

/// Step `step` of the imbalance ramp: class 0 holds 50 points from
/// `N((0,0), 1.1²)`, identical at every step; class 1 holds `50·step` points
/// from `N((2,2), 2.2²)`, each step extending the previous one.
pub fn make_imbalance_ramp(step: usize, seed: u64) -> Result<LabeledDataset> {
    if !(1..=RAMP_STEPS).contains(&step) {
        return Err(Error::InvalidConfig(format!(
            "ramp step must lie in 1..={RAMP_STEPS}, got {step}"
        )));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (class, count, mean, stdev) in [(0, RAMP_MINORITY, 0.0, 1.1), (1, RAMP_MINORITY * step, 2.0, 2.2)] {
        let normal = Normal::new(mean, stdev).expect("positive stdev");
        let mut rng = rng::stream(seed, &[0x4a3b, class as u64]);
        for _ in 0..count {
            rows.push(vec![normal.sample(&mut rng), normal.sample(&mut rng)]);
            labels.push(class);
        }
    }
    build(
        &format!("ramp{step:02}"),
        rows,
        labels,
        DatasetSpec::ImbalanceRamp { step, seed },
    )
}

/// Parses a headed numeric CSV. Labels in `label_column` are factorized in
/// sorted order, numerically when every label parses as a number.
pub fn parse_csv<R: Read>(reader: R, label_column: &str, name: &str, spec: DatasetSpec) -> Result<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;

    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = i + 2;
        let mut features = Vec::with_capacity(record.len().saturating_sub(1));
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                raw_labels.push(field.to_string());
                continue;
            }
            let x: f64 = field.parse().map_err(|_| Error::Parse {
                row: row_no,
                column: j + 1,
                message: format!("`{field}` is not a number"),
            })?;
            features.push(x);
        }
        rows.push(features);
    }

    let numeric: Option<Vec<f64>> = raw_labels.iter().map(|l| l.parse().ok()).collect();
    let labels = match numeric {
        Some(values) => {
            let mut distinct = values.clone();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            values
                .iter()
                .map(|v| distinct.iter().position(|d| d == v).expect("present"))
                .collect()
        }
        None => {
            let distinct: Vec<&String> = raw_labels.iter().collect::<BTreeSet<_>>().into_iter().collect();
            raw_labels
                .iter()
                .map(|l| distinct.iter().position(|d| *d == l).expect("present"))
                .collect()
        }
    };
    build(name, rows, labels, spec)
}

pub fn load_csv(path: &Path, label_column: &str) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map_or_else(|| "dataset".to_string(), |s| s.to_string_lossy().into_owned());
    let spec = DatasetSpec::Csv {
        path: path.to_path_buf(),
        label_column: label_column.to_string(),
    };
    parse_csv(std::io::BufReader::new(file), label_column, &name, spec)
}

/// Reads a headed numeric CSV with no label column; every point gets label 0.
pub fn load_points_csv(path: &Path) -> Result<LabeledDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<f64>().map_err(|_| Error::Parse {
                    row: i + 2,
                    column: j + 1,
                    message: format!("`{field}` is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let labels = vec![0; rows.len()];
    let name = path
        .file_stem()
        .map_or_else(|| "points".to_string(), |s| s.to_string_lossy().into_owned());
    let spec = DatasetSpec::Csv {
        path: path.to_path_buf(),
        label_column: String::new(),
    };
    build(&name, rows, labels, spec)
}

/// `x ↦ ln(x + M)` with `M = 1 − min`, so every argument is at least 1.
pub fn log_shift(dataset: &LabeledDataset) -> LabeledDataset {
    let min = dataset
        .cloud
        .iter()
        .flat_map(|p| p.iter().copied())
        .fold(f64::INFINITY, f64::min);
    let shift = if min.is_finite() { 1.0 - min } else { 1.0 };
    LabeledDataset {
        // clamp so rounding in x + M cannot dip below 1
        cloud: dataset.cloud.map_coordinates(|x| (x + shift).max(1.0).ln()),
        spec: DatasetSpec::LogShift {
            shift,
            source: Box::new(dataset.spec.clone()),
        },
        ..dataset.clone()
    }
}

const IRIS: &str = include_str!("../data/iris.csv");
const WINE: &str = include_str!("../data/wine.csv");
const CANCER: &str = include_str!("../data/cancer.csv");

/// Bundled real datasets. Wine and cancer come log-shifted, since their
/// features span several orders of magnitude.
pub fn bundled(name: &str) -> Result<LabeledDataset> {
    let (text, shifted) = match name {
        "iris" => (IRIS, false),
        "wine" => (WINE, true),
        "cancer" => (CANCER, true),
        _ => return Err(Error::UnknownDataset(name.to_string())),
    };
    let spec = DatasetSpec::Bundled { name: name.to_string() };
    let raw = parse_csv(text.as_bytes(), "label", name, spec)?;
    Ok(if shifted { log_shift(&raw) } else { raw })
}

/// Names accepted by [`by_name`]; `ramp<N>` for N in 1..=16 is accepted too.
pub const DATASET_NAMES: [&str; 9] = [
    "circles",
    "moons",
    "swissroll",
    "normal",
    "sphere",
    "sphere-small",
    "iris",
    "wine",
    "cancer",
];

pub const SPHERE_SIZES: [usize; 5] = [500, 100, 25, 16, 12];
pub const SPHERE_SMALL_SIZES: [usize; 5] = [250, 50, 12, 8, 6];
pub const SPHERE_MEAN: f64 = 0.3;
pub const SPHERE_STDEV: f64 = 0.147;

/// The standard configurations of every named dataset.
pub fn by_name(name: &str, seed: u64) -> Result<LabeledDataset> {
    match name {
        "circles" => make_circles(25, 3.0, seed),
        "moons" => make_moons(100, 10.0, seed),
        "swissroll" => make_swissroll(50, 6, 10.0, seed),
        "normal" => make_gaussian_classes(350, &[60, 10, 50, 100, 80], &[0.0, 0.3, 0.18, 0.67, 0.0], 0.3, seed),
        "sphere" => make_sphere(&SPHERE_SIZES, SPHERE_MEAN, SPHERE_STDEV, seed),
        "sphere-small" => {
            let mut d = make_sphere(&SPHERE_SMALL_SIZES, SPHERE_MEAN, SPHERE_STDEV, seed)?;
            d.name = "sphere-small".into();
            Ok(d)
        }
        "iris" | "wine" | "cancer" => bundled(name),
        _ => match name.strip_prefix("ramp").and_then(|s| s.parse::<usize>().ok()) {
            Some(step) if (1..=RAMP_STEPS).contains(&step) => make_imbalance_ramp(step, seed),
            _ => Err(Error::UnknownDataset(name.to_string())),
        },
    }
}
