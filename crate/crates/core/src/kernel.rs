//! Matern-family covariance functions and covariance-matrix assembly.
//!
//! The length scale is parametrized on a log axis: a `KernelSpec` stores `l`
//! and every family evaluates with the effective length scale `exp(l)`, so a
//! grid over `l` maps directly onto the scan axis used for tuning.

use ndarray::{Array2, ArrayView1, ArrayView2, Axis};
use ndarray::parallel::prelude::*;

use crate::error::{Error, Result};

/// Covariance families with closed-form expressions.
///
/// `SquaredExponential` is the smoothness limit of the Matern family; the
/// half-integer members have Bessel-free closed forms. General non-half-integer
/// smoothness is deliberately unsupported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    SquaredExponential,
    Matern12,
    Matern32,
    Matern52,
}

impl KernelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "squared-exponential",
            KernelFamily::Matern12 => "matern12",
            KernelFamily::Matern32 => "matern32",
            KernelFamily::Matern52 => "matern52",
        }
    }
}

impl std::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "squared-exponential" | "se" | "rbf" => Ok(KernelFamily::SquaredExponential),
            "matern12" => Ok(KernelFamily::Matern12),
            "matern32" => Ok(KernelFamily::Matern32),
            "matern52" => Ok(KernelFamily::Matern52),
            other => Err(Error::InvalidArgument(format!(
                "unknown kernel family '{other}' (expected squared-exponential, matern12, matern32 or matern52)"
            ))),
        }
    }
}

/// An isotropic kernel: family, log length scale `l` and prefactor `sigma2`.
///
/// The kernel value at zero distance equals `sigma2` exactly for every family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    /// Log length scale; the effective length scale is `exp(l)`.
    pub l: f64,
    /// Variance prefactor, must be positive.
    pub sigma2: f64,
}

impl KernelSpec {
    /// Squared-exponential spec with unit prefactor.
    pub fn squared_exponential(l: f64) -> Self {
        KernelSpec {
            family: KernelFamily::SquaredExponential,
            l,
            sigma2: 1.0,
        }
    }

    pub fn new(family: KernelFamily, l: f64, sigma2: f64) -> Result<Self> {
        let spec = KernelSpec { family, l, sigma2 };
        spec.validate()?;
        Ok(spec)
    }

    /// Same family and prefactor with a different log length scale.
    pub fn with_l(&self, l: f64) -> Self {
        KernelSpec { l, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0) || !self.sigma2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kernel sigma2 must be positive and finite, got {}",
                self.sigma2
            )));
        }
        if !self.l.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kernel log length scale must be finite, got {}",
                self.l
            )));
        }
        Ok(())
    }

    /// Kernel value as a function of squared Euclidean distance.
    ///
    /// Round-off can push externally computed squared distances slightly
    /// negative, so the value is clamped at zero before the square root.
    #[inline]
    pub(crate) fn eval_r2(&self, r2: f64) -> f64 {
        let r2 = r2.max(0.0);
        let ell = self.l.exp();
        match self.family {
            KernelFamily::SquaredExponential => self.sigma2 * (-r2 / (2.0 * ell * ell)).exp(),
            KernelFamily::Matern12 => self.sigma2 * (-r2.sqrt() / ell).exp(),
            KernelFamily::Matern32 => {
                let z = 3.0_f64.sqrt() * r2.sqrt() / ell;
                self.sigma2 * (1.0 + z) * (-z).exp()
            }
            KernelFamily::Matern52 => {
                let z = 5.0_f64.sqrt() * r2.sqrt() / ell;
                self.sigma2 * (1.0 + z + z * z / 3.0) * (-z).exp()
            }
        }
    }
}

#[inline]
fn squared_distance(x: ArrayView1<'_, f64>, x2: ArrayView1<'_, f64>) -> f64 {
    let mut r2 = 0.0;
    for (a, b) in x.iter().zip(x2.iter()) {
        let d = a - b;
        r2 += d * d;
    }
    r2
}

/// Evaluates the covariance between two points.
pub fn kernel_eval(spec: &KernelSpec, x: ArrayView1<'_, f64>, x2: ArrayView1<'_, f64>) -> Result<f64> {
    spec.validate()?;
    if x.len() != x2.len() || x.is_empty() {
        return Err(Error::DimensionMismatch(format!(
            "kernel_eval expects equal nonzero dimensions, got {} and {}",
            x.len(),
            x2.len()
        )));
    }
    if x.iter().chain(x2.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("kernel_eval coordinates".into()));
    }
    Ok(spec.eval_r2(squared_distance(x, x2)))
}

/// Covariance matrix between two point sets: entry `(i, j)` is
/// `k(rows[i], cols[j])`. No jitter is added.
///
/// With a single query row this is the prediction row vector; with the full
/// training set against a center subset it is the rectangular design matrix.
pub fn cross_covariance(
    spec: &KernelSpec,
    rows: ArrayView2<'_, f64>,
    cols: ArrayView2<'_, f64>,
) -> Result<Array2<f64>> {
    spec.validate()?;
    if rows.ncols() != cols.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "cross_covariance point dimensions differ: {} vs {}",
            rows.ncols(),
            cols.ncols()
        )));
    }
    if rows.nrows() == 0 || cols.nrows() == 0 || rows.ncols() == 0 {
        return Err(Error::InvalidArgument(
            "cross_covariance requires nonempty point sets".into(),
        ));
    }

    let mut out = Array2::zeros((rows.nrows(), cols.nrows()));
    let non_finite = std::sync::atomic::AtomicBool::new(false);
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut out_row)| {
            let xi = rows.row(i);
            for (j, out_ij) in out_row.iter_mut().enumerate() {
                let r2 = squared_distance(xi, cols.row(j));
                if !r2.is_finite() {
                    non_finite.store(true, std::sync::atomic::Ordering::Relaxed);
                    return;
                }
                *out_ij = spec.eval_r2(r2);
            }
        });
    if non_finite.load(std::sync::atomic::Ordering::Relaxed) {
        return Err(Error::NonFinite("cross_covariance coordinates".into()));
    }
    Ok(out)
}

/// Square covariance matrix over one point set with `delta` added on the
/// diagonal: `K = k(points, points) + delta * I`.
pub fn gram_with_jitter(
    spec: &KernelSpec,
    points: ArrayView2<'_, f64>,
    delta: f64,
) -> Result<Array2<f64>> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "jitter delta must be nonnegative, got {delta}"
        )));
    }
    let mut k = cross_covariance(spec, points, points)?;
    for i in 0..k.nrows() {
        k[[i, i]] += delta;
    }
    Ok(k)
}
