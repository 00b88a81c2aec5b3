//! Dataset ingestion, normalization, splitting, synthetic targets and fit
//! metrics.
//!
//! The on-disk format is a UTF-8 CSV with header `x1,...,xD,f`, one sample per
//! row, LF or CRLF line endings. All cells must parse as finite numbers.

use std::fs::File;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::sample::seeded_index_sample;

/// A set of D-dimensional sample points with scalar targets.
///
/// `feature_std` records the cumulative per-column divisors applied by
/// normalization (all ones for raw data), so raw coordinates can always be
/// mapped into model space.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub points: Array2<f64>,
    pub targets: Array1<f64>,
    pub feature_std: Array1<f64>,
    pub normalized: bool,
}

impl Dataset {
    pub fn new(points: Array2<f64>, targets: Array1<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "dataset must have at least one row and one feature".into(),
            ));
        }
        if targets.len() != points.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} target values for {} points",
                targets.len(),
                points.nrows()
            )));
        }
        if points.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset entries".into()));
        }
        let dim = points.ncols();
        Ok(Dataset {
            points,
            targets,
            feature_std: Array1::ones(dim),
            normalized: false,
        })
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    fn take_rows(&self, idx: &[usize]) -> Dataset {
        let points = self.points.select(Axis(0), idx);
        let targets = self.targets.select(Axis(0), idx);
        Dataset {
            points,
            targets,
            feature_std: self.feature_std.clone(),
            normalized: self.normalized,
        }
    }
}

/// Train/test partition request: `n_train` rows drawn by `seed`.
#[derive(Debug, Clone, Copy)]
pub struct SplitSpec {
    pub n_train: usize,
    pub seed: u64,
}

/// Reads a dataset from a `x1,...,xD,f` CSV file. Features are left raw.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let path_str = path.display().to_string();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path_str.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::MalformedDataset {
            path: path_str.clone(),
            detail: format!("unreadable header: {e}"),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.len() < 2 || headers.last().map(String::as_str) != Some("f") {
        return Err(Error::MalformedDataset {
            path: path_str,
            detail: format!(
                "header must be x1,...,xD,f; got '{}'",
                headers.join(",")
            ),
        });
    }
    let dim = headers.len() - 1;
    for (j, h) in headers[..dim].iter().enumerate() {
        let expected = format!("x{}", j + 1);
        if h != &expected {
            return Err(Error::MalformedDataset {
                path: path_str,
                detail: format!("header column {} is '{h}', expected '{expected}'", j + 1),
            });
        }
    }

    let mut values: Vec<f64> = Vec::new();
    let mut targets: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // header is line 1
        let record = record.map_err(|e| Error::MalformedDataset {
            path: path_str.clone(),
            detail: format!("row {line}: {e}"),
        })?;
        if record.len() != dim + 1 {
            return Err(Error::MalformedDataset {
                path: path_str,
                detail: format!(
                    "row {line} has {} columns, expected {}",
                    record.len(),
                    dim + 1
                ),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let column = headers[j].clone();
            let v: f64 = cell.trim().parse().map_err(|_| Error::MalformedDataset {
                path: path_str.clone(),
                detail: format!("non-numeric value '{cell}' at row {line}, column {column}"),
            })?;
            if !v.is_finite() {
                return Err(Error::MalformedDataset {
                    path: path_str,
                    detail: format!("non-finite value '{cell}' at row {line}, column {column}"),
                });
            }
            if j < dim {
                values.push(v);
            } else {
                targets.push(v);
            }
        }
    }
    if targets.is_empty() {
        return Err(Error::MalformedDataset {
            path: path_str,
            detail: "no data rows".into(),
        });
    }
    let n = targets.len();
    let points = Array2::from_shape_vec((n, dim), values)
        .expect("row-major fill matches the declared shape");
    Dataset::new(points, Array1::from_vec(targets))
}

/// Divides every feature column by its sample standard deviation so each has
/// unit scale. Targets are untouched and no mean shift is applied.
pub fn normalize_features(d: &Dataset) -> Result<Dataset> {
    normalize_features_with(d, false)
}

/// Normalization with optional mean-centering of the features first.
/// Centering is off in the standard pipeline; scale is what the isotropic
/// kernel needs.
pub fn normalize_features_with(d: &Dataset, center: bool) -> Result<Dataset> {
    let mut points = d.points.clone();
    let mut feature_std = d.feature_std.clone();
    for j in 0..d.dim() {
        let col = d.points.column(j);
        let std = sample_std(col);
        if std <= 0.0 || !std.is_finite() {
            return Err(Error::ZeroVarianceColumn {
                column: format!("x{}", j + 1),
            });
        }
        let mean = if center { col.mean().unwrap_or(0.0) } else { 0.0 };
        let mut out = points.column_mut(j);
        out.zip_mut_with(&col, |o, &v| *o = (v - mean) / std);
        feature_std[j] *= std;
    }
    Ok(Dataset {
        points,
        targets: d.targets.clone(),
        feature_std,
        normalized: true,
    })
}

/// Applies fixed per-column divisors (e.g. the divisors recorded by a fit on
/// another split) instead of recomputing them from this data.
pub fn apply_feature_scaling(d: &Dataset, divisors: ArrayView1<'_, f64>) -> Result<Dataset> {
    if divisors.len() != d.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} divisors for {} features",
            divisors.len(),
            d.dim()
        )));
    }
    if divisors.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(Error::InvalidArgument(
            "feature divisors must be positive and finite".into(),
        ));
    }
    let mut points = d.points.clone();
    for (j, &s) in divisors.iter().enumerate() {
        points.column_mut(j).mapv_inplace(|v| v / s);
    }
    let mut feature_std = d.feature_std.clone();
    feature_std.zip_mut_with(&divisors, |f, &s| *f *= s);
    Ok(Dataset {
        points,
        targets: d.targets.clone(),
        feature_std,
        normalized: true,
    })
}

/// Seeded train/test partition: disjoint, exhaustive, deterministic per seed.
/// Row order within each part follows the original dataset.
pub fn split(d: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset)> {
    if spec.n_train == 0 || spec.n_train >= d.len() {
        return Err(Error::InvalidArgument(format!(
            "n_train must be in 1..{} (dataset has {} rows), got {}",
            d.len() - 1,
            d.len(),
            spec.n_train
        )));
    }
    let train_idx = seeded_index_sample(d.len(), spec.n_train, spec.seed);
    let mut in_train = vec![false; d.len()];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let test_idx: Vec<usize> = (0..d.len()).filter(|&i| !in_train[i]).collect();
    Ok((d.take_rows(&train_idx), d.take_rows(&test_idx)))
}

/// Synthetic target functions used as desk-scale stand-ins for a real
/// potential surface. Points are seeded uniform draws from `[-1, 1]^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthFunction {
    /// `f(x) = sum_i sin(pi * x_i)`; zero at the origin.
    AdditiveSine,
    /// Two Gaussian wells:
    /// `f(x) = -exp(-|x - c|^2 / (2 w^2)) - 0.7 exp(-|x + c|^2 / (2 w^2))`
    /// with `c = (0.5, ..., 0.5)` and `w = 0.35`. At the first well center the
    /// value is exactly `-1 - 0.7 exp(-D / (2 w^2))`.
    GaussianWells,
    /// Valley-shaped coupling:
    /// `f(x) = sum_{i<D} (x_{i+1} - x_i^2)^2 + 0.1 (1 - x_i)^2`,
    /// degenerating to `0.1 (1 - x_1)^2` for `D = 1`.
    RosenbrockLike,
}

pub const GAUSSIAN_WELLS_WIDTH: f64 = 0.35;
pub const GAUSSIAN_WELLS_SECOND_AMPLITUDE: f64 = 0.7;

impl std::str::FromStr for SynthFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive_sine" => Ok(SynthFunction::AdditiveSine),
            "gaussian_wells" => Ok(SynthFunction::GaussianWells),
            "rosenbrock_like" => Ok(SynthFunction::RosenbrockLike),
            other => Err(Error::InvalidArgument(format!(
                "unknown synthetic function '{other}'"
            ))),
        }
    }
}

impl SynthFunction {
    /// Closed-form target value at a point.
    pub fn value(&self, x: ArrayView1<'_, f64>) -> f64 {
        match self {
            SynthFunction::AdditiveSine => {
                x.iter().map(|&v| (std::f64::consts::PI * v).sin()).sum()
            }
            SynthFunction::GaussianWells => {
                let w2 = 2.0 * GAUSSIAN_WELLS_WIDTH * GAUSSIAN_WELLS_WIDTH;
                let mut r2_pos = 0.0;
                let mut r2_neg = 0.0;
                for &v in x.iter() {
                    let dp = v - 0.5;
                    let dn = v + 0.5;
                    r2_pos += dp * dp;
                    r2_neg += dn * dn;
                }
                -(-r2_pos / w2).exp()
                    - GAUSSIAN_WELLS_SECOND_AMPLITUDE * (-r2_neg / w2).exp()
            }
            SynthFunction::RosenbrockLike => {
                if x.len() == 1 {
                    let d = 1.0 - x[0];
                    return 0.1 * d * d;
                }
                let mut acc = 0.0;
                for i in 0..x.len() - 1 {
                    let a = x[i + 1] - x[i] * x[i];
                    let b = 1.0 - x[i];
                    acc += a * a + 0.1 * b * b;
                }
                acc
            }
        }
    }
}

/// Generates a seeded dataset from one of the named closed-form functions.
pub fn synth_function(name: SynthFunction, dim: usize, n: usize, seed: u64) -> Result<Dataset> {
    use rand::Rng;
    use rand::SeedableRng;

    if dim == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!(
            "synth_function requires dim >= 1 and n >= 1, got dim={dim}, n={n}"
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let points = Array2::from_shape_fn((n, dim), |_| rng.random::<f64>() * 2.0 - 1.0);
    let targets = Array1::from_iter(points.rows().into_iter().map(|row| name.value(row)));
    Dataset::new(points, targets)
}

/// Root-mean-square difference of two equal-length vectors.
pub fn rmse(pred: ArrayView1<'_, f64>, actual: ArrayView1<'_, f64>) -> Result<f64> {
    if pred.len() != actual.len() || pred.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "rmse expects equal nonzero lengths, got {} and {}",
            pred.len(),
            actual.len()
        )));
    }
    let sum: f64 = pred
        .iter()
        .zip(actual.iter())
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// Sample Pearson correlation coefficient, clamped into `[-1, 1]`.
pub fn pearson(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "pearson expects equal lengths >= 2, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len() as f64;
    let mean_a = a.sum() / n;
    let mean_b = b.sum() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        let dx = x - mean_a;
        let dy = y - mean_b;
        cov += dx * dy;
        var_a += dx * dx;
        var_b += dy * dy;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return Err(Error::InvalidArgument(
            "pearson is undefined for zero-variance input".into(),
        ));
    }
    Ok((cov / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Unbiased sample variance (n - 1 denominator); zero for fewer than two
/// values.
pub fn sample_variance(v: ArrayView1<'_, f64>) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let mean = v.sum() / n as f64;
    v.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
}

/// Sample standard deviation.
pub fn sample_std(v: ArrayView1<'_, f64>) -> f64 {
    sample_variance(v).sqrt()
}
