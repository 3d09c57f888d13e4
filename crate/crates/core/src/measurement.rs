//! Data matrices of time-space samples, their norms, the strong-convergence
//! surrogate and the limit-synthesis operator `R_G(D) = lim_n Σ_j d_nj g_j`.

use nalgebra::DVector;
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{top_bessel_direction, VectorSystem};
use crate::hilbert::{check_dim, HVector};
use crate::scalar::{cx, Real};

/// Default absolute tolerance on tail row differences.
pub const DEFAULT_CAUCHY_EPS: f64 = 1e-10;

/// Rows `r_n = (d_n1, …, d_nJ)` of sampled data, indexed from `n = 0`.
///
/// A streaming matrix accepts appended rows from a single producer; once
/// finalized it is immutable and may be shared freely.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix<T: Real> {
    rows: Vec<DVector<Complex<T>>>,
    cols: usize,
    streaming: bool,
}

impl<T: Real> DataMatrix<T> {
    pub fn from_rows(rows: Vec<DVector<Complex<T>>>) -> Result<Self> {
        let cols = rows
            .first()
            .map(|r| r.len())
            .ok_or_else(|| Error::InvalidArgument("data matrix needs at least one row".into()))?;
        let mut m = Self::streaming(cols);
        for r in rows {
            m.push_row(r)?;
        }
        Ok(m.finalize())
    }

    pub fn from_vecs(rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        Self::from_rows(rows.into_iter().map(DVector::from_vec).collect())
    }

    /// Matrix with `n` rows all equal to `row`.
    pub fn constant(row: &DVector<Complex<T>>, n: usize) -> Result<Self> {
        Self::from_rows(vec![row.clone(); n.max(1)])
    }

    /// Empty, unbounded matrix with `cols` columns.
    pub fn streaming(cols: usize) -> Self {
        Self { rows: Vec::new(), cols, streaming: true }
    }

    pub fn push_row(&mut self, row: DVector<Complex<T>>) -> Result<()> {
        check_dim("data matrix row", self.cols, row.len())?;
        if !row.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite("data matrix row"));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Closes the stream; the row count becomes a finite `N`.
    pub fn finalize(mut self) -> Self {
        self.streaming = false;
        self
    }

    pub fn is_streaming(&self) -> bool {
        self.streaming
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> &[DVector<Complex<T>>] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &DVector<Complex<T>> {
        &self.rows[n]
    }

    pub fn entry(&self, n: usize, j: usize) -> Complex<T> {
        self.rows[n][j]
    }

    /// First `n` rows as a finite matrix.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        Self::from_rows(self.rows.iter().take(n).cloned().collect())
    }

    /// `(Dx)_n = Σ_j d_nj x_j`.
    pub fn apply(&self, x: &DVector<Complex<T>>) -> Result<DVector<Complex<T>>> {
        check_dim("data matrix action", self.cols, x.len())?;
        Ok(DVector::from_iterator(self.rows.len(), self.rows.iter().map(|r| r.dot(x))))
    }

    /// `αD₁ + βD₂` for equally shaped matrices.
    pub fn combine(&self, alpha: Complex<T>, other: &Self, beta: Complex<T>) -> Result<Self> {
        check_dim("data matrix combination (rows)", self.row_count(), other.row_count())?;
        check_dim("data matrix combination (cols)", self.cols, other.cols)?;
        Self::from_rows(
            self.rows.iter().zip(&other.rows).map(|(a, b)| a * alpha + b * beta).collect(),
        )
    }

    /// Frobenius norm `(Σ_n ‖r_n‖²)^{1/2}`.
    pub fn frobenius(&self) -> T {
        self.rows.iter().map(|r| r.norm_squared()).fold(T::zero(), |a, b| a + b).sqrt()
    }
}

/// `Σ_n ‖r_n‖₂`, the norm of the finite-horizon measurement space.
pub fn norm_finite<T: Real>(d: &DataMatrix<T>) -> Result<T> {
    if d.is_streaming() {
        return Err(Error::StreamingNorm);
    }
    Ok(d.rows().iter().map(|r| r.norm()).fold(T::zero(), |a, b| a + b))
}

/// `sup_n ‖r_n‖₂`, which equals the ℓ²→ℓ∞ operator norm of `D`.
///
/// For a streaming matrix this is the supremum over the rows produced so far.
pub fn norm_sup<T: Real>(d: &DataMatrix<T>) -> T {
    d.rows().iter().map(|r| r.norm()).fold(T::zero(), |a, b| a.max(b))
}

/// Index of a row of maximal norm.
pub fn argmax_row<T: Real>(d: &DataMatrix<T>) -> usize {
    let mut best = 0;
    let mut best_norm = T::zero();
    for (n, r) in d.rows().iter().enumerate() {
        let v = r.norm();
        if v > best_norm {
            best = n;
            best_norm = v;
        }
    }
    best
}

/// Unit-direction maximizer for row `n`: `x_j = |d_nj|² / d_nj` (zero where
/// `d_nj = 0`), which gives `(Dx)_n = ‖r_n‖²` and `‖x‖ = ‖r_n‖`.
pub fn row_maximizer<T: Real>(d: &DataMatrix<T>, n: usize) -> DVector<Complex<T>> {
    d.row(n).map(|z| {
        let m2 = z.re * z.re + z.im * z.im;
        if m2 == T::zero() {
            Complex::new(T::zero(), T::zero())
        } else {
            Complex::new(m2, T::zero()) / z
        }
    })
}

/// `‖Dx‖∞ / ‖x‖₂`.
pub fn linfty_ratio<T: Real>(d: &DataMatrix<T>, x: &DVector<Complex<T>>) -> Result<T> {
    let y = d.apply(x)?;
    let sup = y.iter().map(|z| (z.re * z.re + z.im * z.im).sqrt()).fold(T::zero(), |a, b| a.max(b));
    Ok(sup / x.norm())
}

/// Outcome of the finite-data strong-convergence test.
#[derive(Clone, Debug, PartialEq)]
pub struct StrongTest<T: Real> {
    pub strong: bool,
    /// Estimate of the limit row `t` (the final row).
    pub limit_row: DVector<Complex<T>>,
    pub limit_row_index: usize,
    /// `max ‖r_i − r_last‖` over the tail window.
    pub tail_deviation: T,
    pub window: usize,
}

/// Tail window length: the last `max(4, N/4)` rows (capped at `N`).
pub fn tail_window(n: usize) -> usize {
    (n / 4).max(4).min(n)
}

/// Finite-data surrogate for membership in the strongly convergent class:
/// the rows in the tail window must all lie within `eps` of the final row.
pub fn is_strong<T: Real>(d: &DataMatrix<T>, eps: T) -> Result<StrongTest<T>> {
    let n = d.row_count();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("strong-convergence test needs at least 2 rows, got {n}")));
    }
    if eps <= T::zero() {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let window = tail_window(n);
    let last = d.row(n - 1);
    let tail_deviation = d.rows()[n - window..]
        .iter()
        .map(|r| (r - last).norm())
        .fold(T::zero(), |a, b| a.max(b));
    Ok(StrongTest {
        strong: tail_deviation < eps,
        limit_row: last.clone(),
        limit_row_index: n - 1,
        tail_deviation,
        window,
    })
}

/// Partial synthesis `(DG)_n = Σ_j d_nj g_j`.
pub fn row_synthesis<T: Real>(d: &DataMatrix<T>, g: &VectorSystem<T>, n: usize) -> Result<HVector<T>> {
    check_dim("row synthesis", g.len(), d.col_count())?;
    g.synthesis(d.row(n))
}

/// `R_G(D) = Σ_j t_j g_j` where `t` is the limit row.
pub fn limit_synthesis<T: Real>(d: &DataMatrix<T>, g: &VectorSystem<T>, eps: T) -> Result<HVector<T>> {
    check_dim("limit synthesis", g.len(), d.col_count())?;
    let test = is_strong(d, eps)?;
    if !test.strong {
        return Err(Error::NotStrong { deviation: test.tail_deviation.as_f64(), eps: eps.as_f64() });
    }
    g.synthesis(&test.limit_row)
}

/// Largest observed `‖R_G(D)‖ / ‖D‖_{ℓ²→ℓ∞}` over random strongly convergent
/// matrices and the constant-row matrix built from the top Bessel direction.
///
/// The constant-row matrix attains `√C_G`, so the result equals it up to
/// rounding.
pub fn operator_norm_ratio<T: Real>(g: &VectorSystem<T>, trials: usize, seed: u64) -> Result<T> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let eps = T::lit(DEFAULT_CAUCHY_EPS);
    let (_, top) = top_bessel_direction(g);
    let row = g.analysis(&top)?;
    let mut best = T::zero();
    let constant = DataMatrix::constant(&row, 8)?;
    let sup = norm_sup(&constant);
    if sup > T::zero() {
        best = limit_synthesis(&constant, g, eps)?.norm() / sup;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..trials {
        let d = random_convergent(&mut rng, g.len(), 12);
        let sup = norm_sup(&d);
        if sup == T::zero() {
            continue;
        }
        let ratio = limit_synthesis(&d, g, eps)?.norm() / sup;
        best = best.max(ratio);
    }
    Ok(best)
}

/// Random matrix whose trailing rows are identical (hence strongly convergent).
fn random_convergent<T: Real>(rng: &mut ChaCha8Rng, cols: usize, n: usize) -> DataMatrix<T> {
    let gauss = |rng: &mut ChaCha8Rng| T::lit(rng.sample::<f64, _>(StandardNormal));
    let limit = DVector::from_fn(cols, |_, _| cx(gauss(rng), gauss(rng)));
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        if k + 4 < n {
            rows.push(DVector::from_fn(cols, |_, _| cx(gauss(rng), gauss(rng))));
        } else {
            rows.push(limit.clone());
        }
    }
    DataMatrix::from_rows(rows).expect("non-empty")
}

/// Norms and membership summary for a data matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormsReport {
    pub norm_sup: f64,
    pub norm_finite: Option<f64>,
    pub is_strong: bool,
    pub eps: f64,
    pub limit_row_index: i64,
}

pub fn norms_report<T: Real>(d: &DataMatrix<T>, eps: T) -> Result<NormsReport> {
    let norm_finite = if d.is_streaming() { None } else { Some(norm_finite(d)?.as_f64()) };
    let (strong, idx) = if d.row_count() >= 2 {
        let t = is_strong(d, eps)?;
        (t.strong, t.limit_row_index as i64)
    } else {
        (false, d.row_count() as i64 - 1)
    };
    Ok(NormsReport {
        norm_sup: norm_sup(d).as_f64(),
        norm_finite,
        is_strong: strong,
        eps: eps.as_f64(),
        limit_row_index: idx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    fn unit_row(j: usize, cols: usize, scale: f64) -> DVector<Complex<f64>> {
        let mut r = DVector::zeros(cols);
        r[j] = re(scale);
        r
    }

    #[test]
    fn zero_matrix_norms() {
        let d = DataMatrix::<f64>::from_rows(vec![DVector::zeros(3); 4]).unwrap();
        assert_eq!(norm_finite(&d).unwrap(), 0.0);
        assert_eq!(norm_sup(&d), 0.0);
    }

    #[test]
    fn unit_rows() {
        let d = DataMatrix::from_rows(vec![unit_row(0, 2, 1.0), unit_row(1, 2, 1.0)]).unwrap();
        assert!((norm_finite(&d).unwrap() - 2.0).abs() < 1e-15);
        let d = DataMatrix::from_rows(vec![unit_row(0, 2, 1.0), unit_row(1, 2, 2.0)]).unwrap();
        assert!((norm_sup(&d) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn streaming_matrix_refuses_finite_norm() {
        let mut d = DataMatrix::<f64>::streaming(2);
        d.push_row(unit_row(0, 2, 3.0)).unwrap();
        assert_eq!(norm_finite(&d), Err(Error::StreamingNorm));
        assert!((norm_sup(&d) - 3.0).abs() < 1e-15);
        let d = d.finalize();
        assert!((norm_finite(&d).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_rows_are_strong() {
        let row = DVector::from_vec(vec![cx(1.0, 2.0), cx(-0.5, 0.0)]);
        let d = DataMatrix::constant(&row, 10).unwrap();
        let t = is_strong(&d, 1e-12).unwrap();
        assert!(t.strong);
        assert_eq!(t.limit_row, row);
    }

    #[test]
    fn rotating_rows_are_not_strong() {
        let rows = (0..40).map(|n| unit_row(n % 3, 3, 1.0)).collect();
        let d = DataMatrix::from_rows(rows).unwrap();
        assert!(!is_strong(&d, 0.9).unwrap().strong);
        let g = VectorSystem::orthonormal_basis(3);
        assert!(matches!(limit_synthesis(&d, &g, 0.9), Err(Error::NotStrong { .. })));
    }

    #[test]
    fn single_row_is_rejected() {
        let d = DataMatrix::from_rows(vec![unit_row(0, 2, 1.0)]).unwrap();
        assert!(is_strong(&d, 1e-3).is_err());
    }

    #[test]
    fn tail_window_sizes() {
        assert_eq!(tail_window(2), 2);
        assert_eq!(tail_window(10), 4);
        assert_eq!(tail_window(100), 25);
    }

    #[test]
    fn delta_rows_synthesize_the_vector() {
        let g = VectorSystem::new(vec![
            HVector::from_real(&[1.0, 2.0]).unwrap(),
            HVector::from_real(&[0.0, -1.0]).unwrap(),
        ])
        .unwrap();
        let d = DataMatrix::constant(&unit_row(1, 2, 1.0), 6).unwrap();
        let v = limit_synthesis(&d, &g, 1e-12).unwrap();
        assert!(v.distance(g.get(1)) < 1e-15);
    }

    #[test]
    fn orthonormal_ratio_is_one() {
        let g = VectorSystem::<f64>::orthonormal_basis(5);
        assert!((operator_norm_ratio(&g, 10, 3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn doubled_vector_ratio_is_sqrt_two() {
        let e1 = HVector::<f64>::unit(3, 0);
        let g = VectorSystem::new(vec![e1.clone(), e1]).unwrap();
        assert!((operator_norm_ratio(&g, 10, 3).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn report_for_streaming_has_null_finite_norm() {
        let mut d = DataMatrix::<f64>::streaming(1);
        for _ in 0..5 {
            d.push_row(unit_row(0, 1, 1.0)).unwrap();
        }
        let r = norms_report(&d, 1e-10).unwrap();
        assert!(r.norm_finite.is_none());
        assert!(r.is_strong);
        assert_eq!(r.limit_row_index, 4);
    }
}
