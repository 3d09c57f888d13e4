//! Reconstruction of the source term from sampled data.
//!
//! * two consecutive sample rows and a frame for the whole space
//!   ([`recover_two_sample`], [`recover_general_form`]);
//! * the limit of infinitely many rows synthesized against a dual of the
//!   stationary adjoint system ([`recover_infinite`]);
//! * per-step recovery of a time-varying source ([`recover_time_varying`]);
//! * recovery from the derivative of a continuous observation curve
//!   ([`recover_continuous`]).
//!
//! All maps are linear in the data, so a perturbation `δ` of the input moves
//! the output by at most `stability_constant · ‖δ‖`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dynamics::{stationary_adjoint_system, DiscreteSystem, LinearDynamics};
use crate::error::{Error, Result};
use crate::frames::{bessel_bound, canonical_dual, coefficient_matrix, frame_bounds_on, FrameBounds, VectorSystem};
use crate::hilbert::{check_dim, spectral_norm, HOperator, HVector, Subspace};
use crate::measurement::{is_strong, limit_synthesis, row_synthesis, DataMatrix, DEFAULT_CAUCHY_EPS};
use crate::scalar::{cx, re, Real};

/// Default row budget for streaming infinite-horizon recovery.
pub const DEFAULT_MAX_ROWS: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecoveryMethod {
    TwoSample,
    InfiniteHorizon,
    TimeVarying,
    Continuous,
}

impl RecoveryMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecoveryMethod::TwoSample => "two_sample",
            RecoveryMethod::InfiniteHorizon => "infinite_horizon",
            RecoveryMethod::TimeVarying => "time_varying",
            RecoveryMethod::Continuous => "continuous",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualKind {
    /// `‖ŵ − w_true‖`.
    Truth,
    /// Internal consistency of the data with the model.
    Consistency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DifferenceScheme {
    /// `(D(h) − D(0)) / h`, error `O(h)`.
    Forward,
    /// `(D(h) − D(−h)) / 2h`, error `O(h²)`.
    Central,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport<T: Real> {
    pub method: RecoveryMethod,
    pub w_hat: HVector<T>,
    pub residual: T,
    pub residual_kind: ResidualKind,
    /// Operator norm of the (linear) recovery map on the data it consumed.
    pub stability_constant: T,
    /// `‖(DG̃)_n − ŵ‖` per row for the infinite-horizon method; empty otherwise.
    pub trace: Vec<T>,
    /// Coordinates of `ŵ` in the orthonormal basis of `W`, when known.
    pub coefficients: Option<DVector<Complex<T>>>,
    pub converged: bool,
    pub rows_used: usize,
    pub scheme: Option<DifferenceScheme>,
}

impl<T: Real> RecoveryReport<T> {
    fn new(method: RecoveryMethod, w_hat: HVector<T>, residual: T, stability_constant: T, rows_used: usize) -> Self {
        Self {
            method,
            w_hat,
            residual,
            residual_kind: ResidualKind::Consistency,
            stability_constant,
            trace: Vec::new(),
            coefficients: None,
            converged: true,
            rows_used,
            scheme: None,
        }
    }

    /// Replaces the residual with the distance to the known source.
    pub fn with_truth(mut self, truth: &HVector<T>) -> Self {
        self.residual = self.w_hat.distance(truth);
        self.residual_kind = ResidualKind::Truth;
        self
    }

    /// Attaches the coordinates of `ŵ` in the basis of `w`.
    pub fn with_subspace(mut self, w: &Subspace<T>) -> Result<Self> {
        self.coefficients = Some(w.coordinates(&self.w_hat)?);
        Ok(self)
    }

    /// Geometric-mean decay factor of the trace over the part of it that is
    /// well above the rounding floor (second half of the significant prefix).
    pub fn decay_rate(&self) -> Option<T> {
        observed_decay_rate(&self.trace)
    }
}

/// Geometric-mean ratio `trace[n+1]/trace[n]` over the second half of the
/// prefix where `trace[n] > 1e-11 · trace[0]`.
pub fn observed_decay_rate<T: Real>(trace: &[T]) -> Option<T> {
    let first = *trace.first()?;
    if first <= T::zero() {
        return None;
    }
    let floor = first * T::lit(1e-11);
    let significant = trace.iter().take_while(|&&x| x > floor).count();
    if significant < 4 {
        return None;
    }
    let start = significant / 2;
    let end = significant - 1;
    let steps = T::from_usize(end - start)?;
    Some(((trace[end] / trace[start]).ln() / steps).exp())
}

fn full_space_bounds<T: Real>(g: &VectorSystem<T>) -> Result<FrameBounds<T>> {
    let bounds = frame_bounds_on(g, &Subspace::full(g.dim()))?;
    if !bounds.is_frame() {
        return Err(Error::FullSpaceFrameRequired { lower: bounds.lower.as_f64(), upper: bounds.upper.as_f64() });
    }
    Ok(bounds)
}

fn check_frame_inputs<T: Real>(a: &HOperator<T>, g: &VectorSystem<T>, dual: &VectorSystem<T>) -> Result<()> {
    check_dim("recovery operator", g.dim(), a.dim())?;
    check_dim("recovery dual frame", g.dim(), dual.dim())?;
    check_dim("recovery dual frame size", g.len(), dual.len())
}

/// Recovery from consecutive rows when `G` frames the whole space.
///
/// Holds `G`, a dual `G̃`, the coefficients `a_ij = ⟨A* g_j, g̃_i⟩` and the
/// two linear blocks acting on the earlier and later row.
#[derive(Clone, Debug)]
pub struct FrameRecovery<T: Real> {
    operator: HOperator<T>,
    sampling: VectorSystem<T>,
    dual: VectorSystem<T>,
    coefficients: DMatrix<Complex<T>>,
    bounds: FrameBounds<T>,
}

impl<T: Real> FrameRecovery<T> {
    /// Uses the canonical dual of `g`.
    pub fn new(a: &HOperator<T>, g: &VectorSystem<T>) -> Result<Self> {
        let bounds = full_space_bounds(g)?;
        let dual = canonical_dual(g, &Subspace::full(g.dim()))?;
        Self::assemble(a, g, dual, bounds)
    }

    pub fn with_dual(a: &HOperator<T>, g: &VectorSystem<T>, dual: &VectorSystem<T>) -> Result<Self> {
        check_frame_inputs(a, g, dual)?;
        let bounds = full_space_bounds(g)?;
        Self::assemble(a, g, dual.clone(), bounds)
    }

    fn assemble(a: &HOperator<T>, g: &VectorSystem<T>, dual: VectorSystem<T>, bounds: FrameBounds<T>) -> Result<Self> {
        let coefficients = coefficient_matrix(a, g, &dual)?;
        Ok(Self { operator: a.clone(), sampling: g.clone(), dual, coefficients, bounds })
    }

    pub fn dual(&self) -> &VectorSystem<T> {
        &self.dual
    }

    pub fn coefficients(&self) -> &DMatrix<Complex<T>> {
        &self.coefficients
    }

    pub fn bounds(&self) -> FrameBounds<T> {
        self.bounds
    }

    /// `c_j = later_j − Σ_i conj(a_ij) earlier_i`, i.e. `⟨w, g_j⟩` on model data.
    fn source_coefficients(&self, earlier: &DVector<Complex<T>>, later: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        later - self.coefficients.adjoint() * earlier
    }

    fn check_row(&self, row: &DVector<Complex<T>>) -> Result<()> {
        check_dim("sample row length", self.sampling.len(), row.len())
    }

    /// `ŵ = Σ_j (later_j − Σ_i conj(a_ij) earlier_i) g̃_j`.
    pub fn recover_pair(
        &self,
        earlier: &DVector<Complex<T>>,
        later: &DVector<Complex<T>>,
        method: RecoveryMethod,
    ) -> Result<RecoveryReport<T>> {
        self.check_row(earlier)?;
        self.check_row(later)?;
        let c = self.source_coefficients(earlier, later);
        let w_hat = self.dual.synthesis(&c)?;
        let consistency = (self.sampling.analysis(&w_hat)? - &c).norm();
        Ok(RecoveryReport::new(method, w_hat, consistency, self.pair_stability(), 2))
    }

    /// Operator norm of `(r_0, r_1) ↦ ŵ` for the coefficient form, with
    /// respect to `‖r_0‖ + ‖r_1‖`.
    pub fn pair_stability(&self) -> T {
        let d = self.dual.synthesis_matrix();
        spectral_norm(&(d * self.coefficients.adjoint())).max(spectral_norm(d))
    }

    /// `ŵ = Σ_j (d_1j − ⟨A Σ_k d_0k g̃_k, g_j⟩) g̃_j`, defined on arbitrary
    /// two-row data.
    pub fn recover_general(&self, d: &DataMatrix<T>) -> Result<RecoveryReport<T>> {
        if d.row_count() < 2 {
            return Err(Error::InvalidArgument("general-form recovery needs at least 2 rows".into()));
        }
        self.check_row(d.row(0))?;
        let block = self.general_block();
        let c = d.row(1) - &block * d.row(0);
        let w_hat = self.dual.synthesis(&c)?;
        let consistency = (self.sampling.analysis(&w_hat)? - &c).norm();
        let stability = spectral_norm(&(self.dual.synthesis_matrix() * &block)).max(spectral_norm(self.dual.synthesis_matrix()));
        Ok(RecoveryReport::new(RecoveryMethod::TwoSample, w_hat, consistency, stability, 2))
    }

    /// `G* A G̃`.
    fn general_block(&self) -> DMatrix<Complex<T>> {
        self.sampling.synthesis_matrix().adjoint() * self.operator.matrix() * self.dual.synthesis_matrix()
    }

    /// Upper bound `(2 max{1/c, C‖A‖²/c²})^{1/2}` on the general-form map
    /// with respect to the Frobenius norm of the two rows.
    pub fn frame_bound_estimate(&self) -> T {
        let c = self.bounds.lower;
        let upper = self.bounds.upper;
        let a = self.operator.norm();
        let two = T::lit(2.0);
        (two * (T::one() / c).max(upper * a * a / (c * c))).sqrt()
    }
}

/// Two-sample recovery from the first two rows.
pub fn recover_two_sample<T: Real>(
    row0: &DVector<Complex<T>>,
    row1: &DVector<Complex<T>>,
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
) -> Result<RecoveryReport<T>> {
    FrameRecovery::with_dual(a, g, dual)?.recover_pair(row0, row1, RecoveryMethod::TwoSample)
}

/// Recovery operator acting on raw two-row matrices.
pub fn recover_general_form<T: Real>(
    d: &DataMatrix<T>,
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
) -> Result<RecoveryReport<T>> {
    FrameRecovery::with_dual(a, g, dual)?.recover_general(d)
}

/// Two-sample recovery from rows `n` and `n + 1`.
pub fn recover_from_pair<T: Real>(
    d: &DataMatrix<T>,
    n: usize,
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
) -> Result<RecoveryReport<T>> {
    if n + 1 >= d.row_count() {
        return Err(Error::InvalidArgument(format!("rows {n} and {} not available", n + 1)));
    }
    FrameRecovery::with_dual(a, g, dual)?.recover_pair(d.row(n), d.row(n + 1), RecoveryMethod::TwoSample)
}

/// Averages the pairwise estimates over every consecutive pair of rows.
///
/// Extension for noisy constant-source data; not used by default.
pub fn recover_pair_averaged<T: Real>(
    d: &DataMatrix<T>,
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
) -> Result<RecoveryReport<T>> {
    if d.row_count() < 2 {
        return Err(Error::InvalidArgument("pair averaging needs at least 2 rows".into()));
    }
    let rec = FrameRecovery::with_dual(a, g, dual)?;
    let pairs = d.row_count() - 1;
    let mut sum = DVector::zeros(g.dim());
    let mut consistency = T::zero();
    for n in 0..pairs {
        let r = rec.recover_pair(d.row(n), d.row(n + 1), RecoveryMethod::TwoSample)?;
        consistency = consistency.max(r.residual);
        sum += r.w_hat.coords();
    }
    let scale = T::one() / T::from_usize(pairs).expect("pair count");
    // each row feeds at most two pairs
    let stability = rec.pair_stability() * scale * T::lit(2.0);
    Ok(RecoveryReport::new(
        RecoveryMethod::TwoSample,
        HVector::from_raw(sum * re(scale)),
        consistency,
        stability,
        d.row_count(),
    ))
}

/// `ŵ = lim_n Σ_j d_nj g̃_j` for a dual `g̃` of the stationary adjoint system.
pub fn recover_infinite<T: Real>(
    d: &DataMatrix<T>,
    adjoint_dual: &VectorSystem<T>,
    eps: T,
) -> Result<RecoveryReport<T>> {
    check_dim("infinite-horizon dual size", adjoint_dual.len(), d.col_count())?;
    let w_hat = limit_synthesis(d, adjoint_dual, eps)?;
    let trace = (0..d.row_count())
        .map(|n| row_synthesis(d, adjoint_dual, n).map(|v| v.distance(&w_hat)))
        .collect::<Result<Vec<_>>>()?;
    let bound = bessel_bound(adjoint_dual).sqrt();
    let tail = is_strong(d, eps)?.tail_deviation;
    let mut report = RecoveryReport::new(RecoveryMethod::InfiniteHorizon, w_hat, bound * tail, bound, d.row_count());
    report.trace = trace;
    Ok(report)
}

/// Infinite-horizon recovery prepared for a fixed sampling system.
#[derive(Clone, Debug)]
pub struct InfiniteHorizonRecovery<T: Real> {
    space: Subspace<T>,
    adjoint_system: VectorSystem<T>,
    dual: VectorSystem<T>,
    bounds: FrameBounds<T>,
}

impl<T: Real> InfiniteHorizonRecovery<T> {
    /// `adjoint_system` is `{S* g_j}`; it must frame `space`.
    pub fn new(adjoint_system: VectorSystem<T>, space: &Subspace<T>) -> Result<Self> {
        let bounds = frame_bounds_on(&adjoint_system, space)?;
        if !bounds.is_frame() {
            return Err(Error::RecoverabilityFails { lower: bounds.lower.as_f64(), upper: bounds.upper.as_f64() });
        }
        let dual = canonical_dual(&adjoint_system, space)?;
        Ok(Self { space: space.clone(), adjoint_system, dual, bounds })
    }

    /// Builds `{S* g_j}` from the dynamics.
    pub fn for_dynamics<S: LinearDynamics<T> + ?Sized>(sys: &S, g: &VectorSystem<T>) -> Result<Self> {
        let adjoint = stationary_adjoint_system(sys, g)?;
        Self::new(adjoint, sys.source_space())
    }

    pub fn dual(&self) -> &VectorSystem<T> {
        &self.dual
    }

    pub fn adjoint_system(&self) -> &VectorSystem<T> {
        &self.adjoint_system
    }

    pub fn bounds(&self) -> FrameBounds<T> {
        self.bounds
    }

    pub fn recover(&self, d: &DataMatrix<T>, eps: T) -> Result<RecoveryReport<T>> {
        recover_infinite(d, &self.dual, eps)?.with_subspace(&self.space)
    }

    /// Consumes rows from `states` until the tail test passes or `max_rows`
    /// rows have been read.
    pub fn recover_streaming<I>(&self, states: I, g: &VectorSystem<T>, eps: T, max_rows: usize) -> Result<RecoveryReport<T>>
    where
        I: IntoIterator<Item = Result<HVector<T>>>,
    {
        let mut d = DataMatrix::streaming(g.len());
        let mut last = None;
        for x in states.into_iter().take(max_rows) {
            d.push_row(g.analysis(&x?)?)?;
            if d.row_count() >= 8 {
                let t = is_strong(&d, eps)?;
                last = Some(t.tail_deviation);
                if t.strong {
                    return self.recover(&d.finalize(), eps);
                }
            }
        }
        Err(Error::NotStrong {
            deviation: last.map(|x| x.as_f64()).unwrap_or(f64::INFINITY),
            eps: eps.as_f64(),
        })
    }
}

/// Runs a linear discrete system and recovers its source from the infinite
/// horizon data, stopping as soon as the rows have settled.
pub fn recover_infinite_for_system<T: Real>(
    sys: &DiscreteSystem<T>,
    g: &VectorSystem<T>,
    eps: Option<T>,
    max_rows: Option<usize>,
) -> Result<RecoveryReport<T>> {
    let rec = InfiniteHorizonRecovery::for_dynamics(sys, g)?;
    rec.recover_streaming(
        sys.trajectory(),
        g,
        eps.unwrap_or_else(|| T::lit(DEFAULT_CAUCHY_EPS)),
        max_rows.unwrap_or(DEFAULT_MAX_ROWS),
    )
}

/// `ŵ_n = Σ_j (d_{n+1,j} − Σ_i conj(a_ij) d_{n,i}) g̃_j` for `n = 0..N−2`.
pub fn recover_time_varying<T: Real>(
    d: &DataMatrix<T>,
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
) -> Result<Vec<RecoveryReport<T>>> {
    if d.row_count() < 2 {
        return Err(Error::InvalidArgument("time-varying recovery needs at least 2 rows".into()));
    }
    let rec = FrameRecovery::with_dual(a, g, dual)?;
    (0..d.row_count() - 1)
        .map(|n| rec.recover_pair(d.row(n), d.row(n + 1), RecoveryMethod::TimeVarying))
        .collect()
}

/// Observations `D_c(t) = (⟨x(t), g_j⟩)_j` at a set of (possibly negative) times.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve<T: Real> {
    times: Vec<T>,
    data: DataMatrix<T>,
}

impl<T: Real> SampledCurve<T> {
    pub fn new(times: Vec<T>, data: DataMatrix<T>) -> Result<Self> {
        check_dim("curve samples", times.len(), data.row_count())?;
        if times.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidArgument("curve times must be strictly increasing".into()));
        }
        Ok(Self { times, data })
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn data(&self) -> &DataMatrix<T> {
        &self.data
    }

    fn row_at(&self, t: T, scale: T) -> Option<&DVector<Complex<T>>> {
        let tol = T::lit(1e-12) * scale.max(T::one());
        self.times.iter().position(|&s| (s - t).abs() <= tol).map(|i| self.data.row(i))
    }
}

/// Samples a continuous system at arbitrary times.
pub fn sample_curve<T: Real>(
    sys: &crate::dynamics::ContinuousSystem<T>,
    g: &VectorSystem<T>,
    times: &[T],
) -> Result<SampledCurve<T>> {
    let rows = times
        .iter()
        .map(|&t| sys.state_at(t).and_then(|x| g.analysis(&x)))
        .collect::<Result<Vec<_>>>()?;
    SampledCurve::new(times.to_vec(), DataMatrix::from_rows(rows)?)
}

/// `ŵ = Σ_j (d_j'(0) − Σ_i conj(a_ij) d_i(0)) g̃_j` with the derivative
/// replaced by a difference quotient of step `h`.
///
/// Without an explicit scheme, central differences are used when the curve
/// holds a sample at `−h`.
pub fn recover_continuous<T: Real>(
    curve: &SampledCurve<T>,
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
    h: T,
    scheme: Option<DifferenceScheme>,
) -> Result<RecoveryReport<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidArgument("step h must be positive".into()));
    }
    let rec = FrameRecovery::with_dual(a, g, dual)?;
    let missing = |t: &str| Error::InvalidArgument(format!("curve has no sample at t = {t}"));
    let at0 = curve.row_at(T::zero(), h).ok_or_else(|| missing("0"))?;
    let at_h = curve.row_at(h, h).ok_or_else(|| missing("h"))?;
    let at_minus = curve.row_at(-h, h);
    let scheme = match scheme {
        Some(s) => s,
        None if at_minus.is_some() => DifferenceScheme::Central,
        None => DifferenceScheme::Forward,
    };
    let derivative = match scheme {
        DifferenceScheme::Forward => (at_h - at0) * re(T::one() / h),
        DifferenceScheme::Central => {
            let back = at_minus.ok_or_else(|| missing("-h"))?;
            (at_h - back) * re(T::one() / (T::lit(2.0) * h))
        }
    };
    let mut report = rec.recover_pair(at0, &derivative, RecoveryMethod::Continuous)?;
    let d = rec.dual().synthesis_matrix();
    let ca = rec.coefficients().adjoint();
    let n = ca.nrows();
    report.stability_constant = match scheme {
        DifferenceScheme::Forward => {
            let inv_h = re(T::one() / h);
            let block0 = d * (DMatrix::identity(n, n) * inv_h + &ca);
            spectral_norm(&block0).max(spectral_norm(d) / h)
        }
        DifferenceScheme::Central => {
            let half = T::one() / (T::lit(2.0) * h);
            spectral_norm(&(d * &ca)).max(spectral_norm(d) * half)
        }
    };
    report.scheme = Some(scheme);
    report.rows_used = if scheme == DifferenceScheme::Central { 3 } else { 2 };
    Ok(report)
}

/// A recovery procedure that is linear in the data matrix.
pub trait LinearRecovery<T: Real> {
    /// Ambient dimension of the output.
    fn output_dim(&self) -> usize;

    fn recover_map(&self, d: &DataMatrix<T>) -> Result<HVector<T>>;
}

impl<T: Real> LinearRecovery<T> for FrameRecovery<T> {
    fn output_dim(&self) -> usize {
        self.sampling.dim()
    }

    fn recover_map(&self, d: &DataMatrix<T>) -> Result<HVector<T>> {
        Ok(self.recover_general(d)?.w_hat)
    }
}

/// Limit synthesis against a fixed dual; linear on matrices whose trailing
/// rows have settled.
impl<T: Real> LinearRecovery<T> for InfiniteHorizonRecovery<T> {
    fn output_dim(&self) -> usize {
        self.space.ambient_dim()
    }

    fn recover_map(&self, d: &DataMatrix<T>) -> Result<HVector<T>> {
        check_dim("infinite-horizon dual size", self.dual.len(), d.col_count())?;
        self.dual.synthesis(d.row(d.row_count() - 1))
    }
}

/// Wraps a closure as a [`LinearRecovery`].
pub struct FnRecovery<F> {
    dim: usize,
    f: F,
}

impl<F> FnRecovery<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T: Real, F: Fn(&DataMatrix<T>) -> Result<HVector<T>>> LinearRecovery<T> for FnRecovery<F> {
    fn output_dim(&self) -> usize {
        self.dim
    }

    fn recover_map(&self, d: &DataMatrix<T>) -> Result<HVector<T>> {
        (self.f)(d)
    }
}

/// Explicit matrix of a linear recovery map on `rows × cols` data, columns
/// ordered row-major `(n, j)`.
pub fn recovery_matrix<T: Real, R: LinearRecovery<T> + ?Sized>(
    rec: &R,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<Complex<T>>> {
    let dim = rec.output_dim();
    let mut m = DMatrix::zeros(dim, rows * cols);
    for n in 0..rows {
        for j in 0..cols {
            let mut data = vec![DVector::zeros(cols); rows];
            data[n][j] = Complex::new(T::one(), T::zero());
            let out = rec.recover_map(&DataMatrix::from_rows(data)?)?;
            check_dim("recovery output", dim, out.dim())?;
            m.set_column(n * cols + j, out.coords());
        }
    }
    Ok(m)
}

/// Estimated operator norm of a linear recovery map with respect to the
/// finite-horizon norm `Σ_n ‖r_n‖` on `rows × cols` data.
///
/// For that norm the operator norm is the largest spectral norm among the
/// per-row blocks. Each block is probed with `trials` random unit inputs and
/// the best probe is refined by power iteration on `B* B`.
pub fn estimate_stability<T: Real, R: LinearRecovery<T> + ?Sized>(
    rec: &R,
    rows: usize,
    cols: usize,
    trials: usize,
    seed: u64,
) -> Result<T> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("data shape must be non-empty".into()));
    }
    let m = recovery_matrix(rec, rows, cols)?;
    let mut best = T::zero();
    for n in 0..rows {
        let block = m.columns(n * cols, cols).into_owned();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(n as u64));
        best = best.max(block_norm_estimate(&block, trials.max(1), &mut rng));
    }
    Ok(best)
}

fn block_norm_estimate<T: Real>(block: &DMatrix<Complex<T>>, trials: usize, rng: &mut ChaCha8Rng) -> T {
    let cols = block.ncols();
    let gauss = |rng: &mut ChaCha8Rng| T::lit(rng.sample::<f64, _>(StandardNormal));
    let mut best_start = None;
    let mut best_value = T::zero();
    for _ in 0..trials {
        let x = DVector::from_fn(cols, |_, _| cx(gauss(rng), gauss(rng)));
        let n = x.norm();
        if n == T::zero() {
            continue;
        }
        let x = x.unscale(n);
        let value = (block * &x).norm();
        if best_start.is_none() || value > best_value {
            best_value = value;
            best_start = Some(x);
        }
    }
    let Some(mut x) = best_start else { return best_value };
    let gram = block.adjoint() * block;
    let tol = T::lit(1e-15);
    let mut estimate = best_value;
    for _ in 0..50_000 {
        let y = &gram * &x;
        let ny = y.norm();
        if ny == T::zero() {
            break;
        }
        x = y.unscale(ny);
        let next = (block * &x).norm();
        let done = (next - estimate).abs() <= tol * next;
        estimate = estimate.max(next);
        if done {
            break;
        }
    }
    estimate
}
