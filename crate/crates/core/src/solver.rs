//! Linear-algebra core: truncated-SVD pseudoinverse solves, a normal-equation
//! oracle, and a log-determinant utility.
//!
//! The pseudoinverse path factors `A = U S V^T`, reciprocates the singular
//! values that pass a relative cutoff and zeros the rest. An optional `delta`
//! is added to each retained singular value before reciprocation, damping the
//! reciprocal as `1/(s + delta)`; with `delta = 0` the solve reduces to the
//! exact minimum-norm least-squares solution.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::cholesky::{Cholesky, SolveC, UPLO};
use ndarray_linalg::svddc::{JobSvd, SVDDC};

use crate::error::{Error, Result};

/// Options for the truncated-SVD solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvdSolveOptions {
    /// Relative singular-value cutoff: values at or below
    /// `truncation_tol * s_max` are treated as zero. `None` selects the
    /// conventional `machine epsilon * max(n, m)`.
    pub truncation_tol: Option<f64>,
    /// Nonnegative damping added to each retained singular value before
    /// reciprocation. Zero by default; the rectangular path does not need it.
    pub delta: f64,
}

impl Default for SvdSolveOptions {
    fn default() -> Self {
        SvdSolveOptions {
            truncation_tol: None,
            delta: 0.0,
        }
    }
}

impl SvdSolveOptions {
    pub fn with_delta(delta: f64) -> Self {
        SvdSolveOptions {
            truncation_tol: None,
            delta,
        }
    }

    fn validate(&self) -> Result<()> {
        if let Some(t) = self.truncation_tol {
            if !(t >= 0.0) || !t.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "truncation_tol must be nonnegative and finite, got {t}"
                )));
            }
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "svd delta must be nonnegative and finite, got {}",
                self.delta
            )));
        }
        Ok(())
    }

    fn relative_tol(&self, n: usize, m: usize) -> f64 {
        self.truncation_tol
            .unwrap_or(f64::EPSILON * n.max(m) as f64)
    }
}

fn check_matrix(a: ArrayView2<'_, f64>, what: &str) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::InvalidArgument(format!("{what} matrix is zero-size")));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{what} matrix entries")));
    }
    Ok(())
}

fn check_rhs(y: ArrayView1<'_, f64>, n: usize, what: &str) -> Result<()> {
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{what} right-hand side has length {}, expected {}",
            y.len(),
            n
        )));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("{what} right-hand side")));
    }
    Ok(())
}

/// Thin SVD of a dense matrix, reused for solving and for forming the
/// pseudoinverse without factoring twice.
#[derive(Debug, Clone)]
pub struct SvdFactor {
    n: usize,
    m: usize,
    u: Array2<f64>,
    s: Array1<f64>,
    vt: Array2<f64>,
}

impl SvdFactor {
    pub fn new(a: ArrayView2<'_, f64>) -> Result<Self> {
        check_matrix(a, "svd input")?;
        let (n, m) = a.dim();
        let (u, s, vt) = a.to_owned().svddc(JobSvd::Some)?;
        let u = u.ok_or_else(|| Error::SingularSystem("svd did not return U".into()))?;
        let vt = vt.ok_or_else(|| Error::SingularSystem("svd did not return V^T".into()))?;
        Ok(SvdFactor { n, m, u, s, vt })
    }

    fn cutoff(&self, opts: &SvdSolveOptions) -> f64 {
        let s_max = self.s.iter().cloned().fold(0.0, f64::max);
        opts.relative_tol(self.n, self.m) * s_max
    }

    /// Number of singular values kept at the given options.
    pub fn retained(&self, opts: &SvdSolveOptions) -> usize {
        let cutoff = self.cutoff(opts);
        self.s.iter().filter(|&&s| s > cutoff).count()
    }

    /// Minimum-norm least-squares solve `c = V S^+ U^T y`.
    pub fn solve(&self, y: ArrayView1<'_, f64>, opts: &SvdSolveOptions) -> Result<Array1<f64>> {
        opts.validate()?;
        check_rhs(y, self.n, "svd solve")?;
        let cutoff = self.cutoff(opts);
        let mut z = self.u.t().dot(&y);
        for (zi, &si) in z.iter_mut().zip(self.s.iter()) {
            if si > cutoff {
                *zi /= si + opts.delta;
            } else {
                *zi = 0.0;
            }
        }
        Ok(self.vt.t().dot(&z))
    }

    /// Dense pseudoinverse `A^+ = V S^+ U^T` (an `m x n` matrix).
    pub fn pseudoinverse(&self, opts: &SvdSolveOptions) -> Result<Array2<f64>> {
        opts.validate()?;
        let cutoff = self.cutoff(opts);
        // Scale the rows of V^T by the damped reciprocal singular values,
        // then (S^+ V^T)^T U^T = V S^+ U^T.
        let mut scaled_vt = self.vt.clone();
        for (mut row, &si) in scaled_vt.rows_mut().into_iter().zip(self.s.iter()) {
            let factor = if si > cutoff { 1.0 / (si + opts.delta) } else { 0.0 };
            row.mapv_inplace(|v| v * factor);
        }
        Ok(scaled_vt.t().dot(&self.u.t()))
    }
}

/// Least-squares solve of `A c = y` through the truncated-SVD pseudoinverse.
///
/// With `delta = 0` this returns the minimum-norm least-squares solution.
pub fn pseudo_solve(
    a: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    opts: &SvdSolveOptions,
) -> Result<Array1<f64>> {
    opts.validate()?;
    check_rhs(y, a.nrows(), "pseudo_solve")?;
    SvdFactor::new(a)?.solve(y, opts)
}

/// Number of singular values of `a` that survive truncation under `opts`.
pub fn truncated_rank(a: ArrayView2<'_, f64>, opts: &SvdSolveOptions) -> Result<usize> {
    opts.validate()?;
    Ok(SvdFactor::new(a)?.retained(opts))
}

/// Solves `(A^T A) c = A^T y` by Cholesky factorization of the normal
/// equations. Test oracle for `pseudo_solve`; only sensible on
/// well-conditioned systems.
pub fn normal_equation_solve(a: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
    check_matrix(a, "normal_equation")?;
    check_rhs(y, a.nrows(), "normal_equation")?;
    let ata = a.t().dot(&a);
    let aty = a.t().dot(&y);
    ata.solvec(&aty)
        .map_err(|e| Error::SingularSystem(format!("A^T A factorization failed: {e}")))
}

fn check_symmetric(k: ArrayView2<'_, f64>, rtol: f64, what: &str) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} expects a square matrix, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    let scale = k.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut max_asym = 0.0_f64;
    for i in 0..k.nrows() {
        for j in (i + 1)..k.ncols() {
            max_asym = max_asym.max((k[[i, j]] - k[[j, i]]).abs());
        }
    }
    if max_asym > rtol * scale {
        return Err(Error::InvalidArgument(format!(
            "{what} matrix is not symmetric (max asymmetry {max_asym:.3e} vs scale {scale:.3e})"
        )));
    }
    Ok(())
}

/// Coefficient solve for the square GPR path.
///
/// Routed through the same truncated SVD as the rectangular path so that a
/// near-singular `K` at `delta = 0` degrades by truncation instead of blowing
/// up in a direct inverse.
pub fn solve_square(
    k: ArrayView2<'_, f64>,
    f: ArrayView1<'_, f64>,
    opts: &SvdSolveOptions,
) -> Result<Array1<f64>> {
    check_symmetric(k, 1e-10, "solve_square")?;
    pseudo_solve(k, f, opts)
}

/// `ln |K|` of a symmetric positive-definite matrix via Cholesky
/// factorization: twice the sum of the logs of the factor diagonal.
pub fn log_det_psd(k: ArrayView2<'_, f64>) -> Result<f64> {
    check_matrix(k, "log_det")?;
    check_symmetric(k, 1e-10, "log_det")?;
    let l = k
        .cholesky(UPLO::Lower)
        .map_err(|e| Error::NotPositiveDefinite(format!("cholesky failed: {e}")))?;
    Ok(2.0 * l.diag().iter().map(|d| d.ln()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        Array2::from_shape_fn((n, m), |_| rng.random::<f64>() * 2.0 - 1.0)
    }

    #[test]
    fn identity_solve() {
        let a = Array2::eye(3);
        let y = array![1.0, 2.0, 3.0];
        let c = pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()).unwrap();
        assert_abs_diff_eq!(c.as_slice().unwrap(), y.as_slice().unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn overdetermined_constant_column_gives_mean() {
        let a = array![[1.0], [1.0]];
        let y = array![1.0, 3.0];
        let c = pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()).unwrap();
        assert_abs_diff_eq!(c[0], 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rank_deficient_minimum_norm() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let y = array![2.0, 2.0];
        let c = pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()).unwrap();
        assert_abs_diff_eq!(c[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn minimum_norm_over_solution_family() {
        // Rank-1 fixtures: all least-squares solutions are c + t * null, and
        // the pseudoinverse picks the member orthogonal to the null space.
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let a0 = rng.random::<f64>() + 0.5;
            let b0 = rng.random::<f64>() + 0.5;
            let t = rng.random::<f64>() * 2.0 - 1.0;
            let a = array![[a0, b0], [t * a0, t * b0]];
            let y = array![rng.random::<f64>(), rng.random::<f64>()];
            let c = pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()).unwrap();
            let null = array![-b0, a0];
            assert_abs_diff_eq!(c.dot(&null), 0.0, epsilon = 1e-12);
            let norm = c.dot(&c).sqrt();
            for k in [-1.0, -0.1, 0.1, 1.0] {
                let other = &c + &(&null * k);
                assert!(norm <= other.dot(&other).sqrt() + 1e-12);
            }
        }
    }

    #[test]
    fn residual_stationarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let eps = 1e-4;
        for _ in 0..20 {
            let a = random_matrix(12, 5, &mut rng);
            let y = Array2::from_shape_fn((12, 1), |_| rng.random::<f64>())
                .column(0)
                .to_owned();
            let c = pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()).unwrap();
            let base = {
                let r = &a.dot(&c) - &y;
                r.dot(&r).sqrt()
            };
            for _ in 0..5 {
                let mut p = Array2::from_shape_fn((5, 1), |_| rng.random::<f64>() * 2.0 - 1.0)
                    .column(0)
                    .to_owned();
                let norm = p.dot(&p).sqrt();
                p.mapv_inplace(|v| v / norm);
                let r = &a.dot(&(&c + &(&p * eps))) - &y;
                assert!(r.dot(&r).sqrt() >= base - 1e-9);
            }
        }
    }

    #[test]
    fn truncation_monotone_in_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let a = random_matrix(20, 8, &mut rng);
        let mut prev = usize::MAX;
        for tol in [0.0, 1e-12, 1e-6, 1e-2, 0.5, 1.1] {
            let opts = SvdSolveOptions {
                truncation_tol: Some(tol),
                delta: 0.0,
            };
            let rank = truncated_rank(a.view(), &opts).unwrap();
            assert!(rank <= prev);
            prev = rank;
        }
        assert_eq!(prev, 0, "a relative tolerance above 1 must drop everything");
    }

    #[test]
    fn agrees_with_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = random_matrix(100, 30, &mut rng);
        let y = Array2::from_shape_fn((100, 1), |_| rng.random::<f64>())
            .column(0)
            .to_owned();
        let c1 = pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()).unwrap();
        let c2 = normal_equation_solve(a.view(), y.view()).unwrap();
        for (u, v) in c1.iter().zip(c2.iter()) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-8);
        }
    }

    #[test]
    fn normal_equation_trivial_cases() {
        let c = normal_equation_solve(Array2::eye(2).view(), array![5.0, 7.0].view()).unwrap();
        assert_abs_diff_eq!(c[0], 5.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c[1], 7.0, epsilon = 1e-12);
        let a = array![[1.0], [1.0]];
        let c = normal_equation_solve(a.view(), array![1.0, 3.0].view()).unwrap();
        assert_abs_diff_eq!(c[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn normal_equation_singular_errors() {
        let a = array![[1.0, 1.0], [1.0, 1.0]];
        let y = array![1.0, 1.0];
        assert!(normal_equation_solve(a.view(), y.view()).is_err());
    }

    #[test]
    fn solve_square_diagonal() {
        let k = Array2::eye(4) * 2.0;
        let f = array![2.0, 4.0, 6.0, 8.0];
        let c = solve_square(k.view(), f.view(), &SvdSolveOptions::default()).unwrap();
        for (i, v) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert_abs_diff_eq!(c[i], v, epsilon = 1e-13);
        }
    }

    #[test]
    fn solve_square_rejects_asymmetric() {
        let k = array![[1.0, 0.5], [0.0, 1.0]];
        let f = array![1.0, 1.0];
        assert!(matches!(
            solve_square(k.view(), f.view(), &SvdSolveOptions::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn log_det_identity_and_diagonal() {
        assert_abs_diff_eq!(log_det_psd(Array2::eye(5).view()).unwrap(), 0.0, epsilon = 1e-14);
        let k = Array2::eye(2) * 4.0;
        assert_abs_diff_eq!(
            log_det_psd(k.view()).unwrap(),
            2.0 * 4.0_f64.ln(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn log_det_non_pd_errors() {
        let k = array![[1.0, 2.0], [2.0, 1.0]]; // eigenvalues 3 and -1
        assert!(matches!(
            log_det_psd(k.view()),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn zero_size_and_non_finite_rejected() {
        let a = Array2::<f64>::zeros((0, 3));
        let y = Array1::<f64>::zeros(0);
        assert!(pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()).is_err());
        let a = array![[f64::NAN]];
        let y = array![1.0];
        assert!(matches!(
            pseudo_solve(a.view(), y.view(), &SvdSolveOptions::default()),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn delta_damps_the_solution() {
        let a = Array2::eye(2);
        let y = array![1.0, 1.0];
        let c = pseudo_solve(a.view(), y.view(), &SvdSolveOptions::with_delta(1.0)).unwrap();
        // Singular values are 1, damped reciprocal is 1/(1+1).
        assert_abs_diff_eq!(c[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1], 0.5, epsilon = 1e-14);
    }
}
