//! Constructions that exercise the limits of recovery.
//!
//! * [`build_adversarial`]: a contractive diagonal system with a single
//!   sampling vector whose first `N` samples vanish although the source is
//!   nonzero; only the infinite-horizon method can see it.
//! * [`build_unstable`]: `A = I` with `g_j = e_j / j`, where exact recovery
//!   from two rows exists but its norm grows with the dimension.
//! * [`random_instance`]: seeded random systems for property tests.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dynamics::{iterate, sample, DiscreteSystem};
use crate::error::{Error, Result};
use crate::frames::{frame_bounds_on, FrameBounds, VectorSystem};
use crate::hilbert::{check_dim, spectral_radius, HOperator, HVector, Subspace};
use crate::measurement::{DataMatrix, DEFAULT_CAUCHY_EPS};
use crate::recovery::{InfiniteHorizonRecovery, LinearRecovery, DEFAULT_MAX_ROWS};
use crate::scalar::{cx, modulus, re, Real};

/// Largest condition number accepted for the leading `N × N` block.
pub const ADVERSARIAL_CONDITION_LIMIT: f64 = 1e12;

pub(crate) fn complex_gaussian<T: Real>(rng: &mut ChaCha8Rng) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    cx(T::lit(re), T::lit(im))
}

pub(crate) fn gaussian_matrix<T: Real>(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<Complex<T>> {
    // column-major fill keeps the draw order independent of nalgebra internals
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        for i in 0..rows {
            m[(i, j)] = complex_gaussian(rng);
        }
    }
    m
}

/// Default eigenvalues `λ_i = i / (N + 1)`.
pub fn default_lambdas(n: usize) -> Vec<f64> {
    (1..=n).map(|i| i as f64 / (n + 1) as f64).collect()
}

/// Fills `total - given.len()` further values in `(0, 1)` by repeatedly
/// bisecting the widest gap, so all values stay distinct.
fn extend_lambdas(given: &[f64], total: usize) -> Vec<f64> {
    let mut points: Vec<f64> = given.to_vec();
    let mut out = given.to_vec();
    while out.len() < total {
        let mut sorted = points.clone();
        sorted.push(0.0);
        sorted.push(1.0);
        sorted.sort_by(|a, b| a.total_cmp(b));
        let (lo, hi) = sorted
            .windows(2)
            .map(|p| (p[0], p[1]))
            .max_by(|a, b| (a.1 - a.0).total_cmp(&(b.1 - b.0)))
            .expect("at least two points");
        let mid = 0.5 * (lo + hi);
        points.push(mid);
        out.push(mid);
    }
    out
}

/// Diagonal system whose first `N` samples against `g` vanish.
#[derive(Clone, Debug)]
pub struct AdversarialInstance<T: Real> {
    pub horizon: usize,
    /// Diagonal of `A`, length `d`; the first `N` are the requested values.
    pub lambdas: Vec<T>,
    pub dim: usize,
    /// `(a_1, …, a_N)`, the support of `x_0`.
    pub coefficients: DVector<Complex<T>>,
    pub x0: HVector<T>,
    pub c: Complex<T>,
    /// `w_k = 2^{-k}`.
    pub w: HVector<T>,
    /// `g = (I − A) w`.
    pub g: HVector<T>,
    /// Condition number of the leading block.
    pub condition: T,
}

impl<T: Real> AdversarialInstance<T> {
    pub fn operator(&self) -> HOperator<T> {
        HOperator::diagonal_real(&self.lambdas).expect("finite diagonal").with_label("adversarial diagonal")
    }

    pub fn space(&self) -> Subspace<T> {
        Subspace::span(&self.w).expect("w is nonzero")
    }

    pub fn sampling(&self) -> VectorSystem<T> {
        VectorSystem::new(vec![self.g.clone()]).expect("single vector")
    }

    /// `x_{n+1} = A x_n + c w` started at the adversarial `x_0`.
    pub fn system(&self) -> DiscreteSystem<T> {
        DiscreteSystem::new(self.operator(), self.space(), self.w.scaled(self.c), self.x0.clone())
            .expect("consistent construction")
    }

    /// The same dynamics with `x_0 = 0` and no source.
    pub fn zero_system(&self) -> DiscreteSystem<T> {
        DiscreteSystem::new(self.operator(), self.space(), HVector::zeros(self.dim), HVector::zeros(self.dim))
            .expect("consistent construction")
    }
}

/// Solves for `x_0 = (a_1, …, a_N, 0, …)` so that `⟨x_n, g⟩ = 0` for
/// `n < N`, given the source `c w`.
///
/// Row `n` of the homogeneous system is `[λ_1ⁿ g_1, …, λ_Nⁿ g_N, b_n]` with
/// `b_n = ⟨w, (I + A + … + A^{n−1}) g⟩` and `b_0 = 0`.
pub fn build_adversarial<T: Real>(
    horizon: usize,
    lambdas: Option<&[f64]>,
    c: Complex<T>,
    dim: usize,
) -> Result<AdversarialInstance<T>> {
    if horizon == 0 {
        return Err(Error::InvalidArgument("horizon N must be positive".into()));
    }
    if modulus(c) == T::zero() || !crate::scalar::is_finite(&c) {
        return Err(Error::InvalidArgument("scale c must be nonzero and finite".into()));
    }
    if dim < horizon + 1 {
        return Err(Error::InvalidArgument(format!("dimension {dim} must be at least N + 1 = {}", horizon + 1)));
    }
    let given = match lambdas {
        Some(l) => l.to_vec(),
        None => default_lambdas(horizon),
    };
    check_dim("adversarial eigenvalues", horizon, given.len())?;
    if given.iter().any(|&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::InvalidArgument("eigenvalues must lie in (0, 1)".into()));
    }
    for (i, a) in given.iter().enumerate() {
        if given[..i].iter().any(|b| a == b) {
            return Err(Error::InvalidArgument("eigenvalues must be distinct".into()));
        }
    }
    let lambdas: Vec<T> = extend_lambdas(&given, dim).into_iter().map(T::lit).collect();
    let w: Vec<T> = (1..=dim).map(|k| T::lit(0.5f64.powi(k as i32))).collect();
    let g: Vec<T> = lambdas.iter().zip(&w).map(|(&l, &wk)| (T::one() - l) * wk).collect();

    let mut block = DMatrix::<Complex<T>>::zeros(horizon, horizon);
    let mut b = DVector::<Complex<T>>::zeros(horizon);
    for n in 0..horizon {
        for k in 0..horizon {
            block[(n, k)] = re(lambdas[k].powi(n as i32) * g[k]);
        }
        // ⟨w, Λ_n g⟩ with Λ_n = Σ_{m<n} A^m, summed over every coordinate
        let mut bn = T::zero();
        for k in 0..dim {
            let partial = (0..n).fold(T::zero(), |acc, m| acc + lambdas[k].powi(m as i32));
            bn += w[k] * partial * g[k];
        }
        b[n] = re(bn);
    }
    let sv = block.clone().svd(false, false).singular_values;
    let smin = sv.min();
    let condition = if smin > T::zero() { sv.max() / smin } else { T::max_value().unwrap_or_else(T::one) };
    if !(condition < T::lit(ADVERSARIAL_CONDITION_LIMIT)) {
        return Err(Error::IllConditioned {
            condition: condition.as_f64(),
            hint: "choose better separated eigenvalues or a shorter horizon".into(),
        });
    }
    let rhs = -(b * c);
    let coefficients = block
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::IllConditioned { condition: f64::INFINITY, hint: "singular leading block".into() })?;
    let mut x0 = DVector::zeros(dim);
    x0.rows_mut(0, horizon).copy_from(&coefficients);
    Ok(AdversarialInstance {
        horizon,
        lambdas,
        dim,
        coefficients,
        x0: HVector::new(x0)?,
        c,
        w: HVector::from_real(&w)?,
        g: HVector::from_real(&g)?,
        condition,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImpossibilityReport {
    pub horizon: usize,
    /// `max_{n<N} |⟨x_n, g⟩| / ‖g‖`.
    pub leading_max: f64,
    pub leading_vanish: bool,
    /// `|⟨x_N, g⟩|`, the first sample that carries information.
    pub first_informative: f64,
    pub zero_system_identical: bool,
    /// Smallest singular value of the `N`-row system restricted to the
    /// source unknowns after eliminating the initial state.
    pub restricted_sigma_min: f64,
    pub recovery_residual: f64,
    pub recovered: bool,
    pub rows_used: usize,
    pub passed: bool,
}

/// Checks that the first `N` rows cannot distinguish `c w` from `0` while
/// the infinite-horizon method recovers `c w`.
pub fn verify_impossibility<T: Real>(inst: &AdversarialInstance<T>) -> Result<ImpossibilityReport> {
    let n = inst.horizon;
    let sys = inst.system();
    let g = inst.sampling();
    let data = sample(&iterate(&sys, n + 1)?, &g)?;
    let zero = sample(&iterate(&inst.zero_system(), n)?, &g)?;
    let g_norm = inst.g.norm();
    let leading = (0..n).map(|k| modulus(data.entry(k, 0))).fold(T::zero(), |a, b| a.max(b));
    let leading_max = (leading / g_norm).as_f64();
    let identical = (0..n).all(|k| modulus(data.entry(k, 0) - zero.entry(k, 0)) <= T::lit(1e-10) * g_norm);
    let restricted = restricted_min_singular_value(&sys.operator().clone(), &g, &sys.space().clone(), n)?;
    let rec = InfiniteHorizonRecovery::for_dynamics(&sys, &g)?;
    let report = rec.recover_streaming(sys.trajectory(), &g, T::lit(DEFAULT_CAUCHY_EPS), DEFAULT_MAX_ROWS)?;
    let residual = report.w_hat.distance(&inst.w.scaled(inst.c)).as_f64();
    let leading_vanish = leading_max < 1e-10;
    let recovered = residual < 1e-7;
    Ok(ImpossibilityReport {
        horizon: n,
        leading_max,
        leading_vanish,
        first_informative: modulus(data.entry(n, 0)).as_f64(),
        zero_system_identical: identical,
        restricted_sigma_min: restricted.as_f64(),
        recovery_residual: residual,
        recovered,
        rows_used: report.rows_used,
        passed: leading_vanish && identical && recovered && restricted.as_f64() < 1e-8,
    })
}

/// `σ_min((I − P_X) M_w)` for the stacked `N`-row sampling system.
///
/// Row `(n, j)` of the system reads `⟨x_n, g_j⟩ = g_j* Aⁿ x_0 + g_j* Λ_n B α`
/// with `B` an orthonormal basis of `W` and `w = B α`. `P_X` projects onto
/// the range of the `x_0` block. A value near zero means some nonzero source
/// produces data indistinguishable from a change of initial state.
pub fn restricted_min_singular_value<T: Real>(
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    space: &Subspace<T>,
    rows: usize,
) -> Result<T> {
    let d = a.dim();
    check_dim("sampling system", d, g.dim())?;
    check_dim("source subspace", d, space.ambient_dim())?;
    if space.is_trivial() || rows == 0 {
        return Err(Error::EmptySubspace);
    }
    let jn = g.len();
    let gs = g.synthesis_matrix().adjoint();
    let mut mx = DMatrix::zeros(rows * jn, d);
    let mut mw = DMatrix::zeros(rows * jn, d);
    let mut power = DMatrix::<Complex<T>>::identity(d, d);
    let mut partial = DMatrix::<Complex<T>>::zeros(d, d);
    for n in 0..rows {
        mx.rows_mut(n * jn, jn).copy_from(&(&gs * &power));
        mw.rows_mut(n * jn, jn).copy_from(&(&gs * &partial));
        partial += &power;
        power = a.matrix() * power;
    }
    let mw = mw * space.basis_matrix();
    let svd = mx.svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.max();
    let tol = top * T::lit(1e-12);
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    let range = u.columns(0, rank);
    let residual = &mw - range * (range.adjoint() * &mw);
    Ok(residual.svd(false, false).singular_values.min())
}

/// `R(D) = Σ_j j (d_1j − d_0j) e_j`, exact for `A = I`, `g_j = e_j / j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnstableRecovery {
    pub dim: usize,
}

impl<T: Real> LinearRecovery<T> for UnstableRecovery {
    fn output_dim(&self) -> usize {
        self.dim
    }

    fn recover_map(&self, d: &DataMatrix<T>) -> Result<HVector<T>> {
        if d.row_count() < 2 {
            return Err(Error::InvalidArgument("needs two rows".into()));
        }
        check_dim("unstable recovery data", self.dim, d.col_count())?;
        let v = DVector::from_fn(self.dim, |j, _| {
            (d.entry(1, j) - d.entry(0, j)) * re(T::from_usize(j + 1).expect("index"))
        });
        HVector::new(v)
    }
}

#[derive(Clone, Debug)]
pub struct UnstableInstance<T: Real> {
    pub operator: HOperator<T>,
    pub sampling: VectorSystem<T>,
    pub recovery: UnstableRecovery,
}

impl<T: Real> UnstableInstance<T> {
    /// Source anywhere in the space.
    pub fn system(&self, x0: HVector<T>, w: HVector<T>) -> Result<DiscreteSystem<T>> {
        let d = self.operator.dim();
        DiscreteSystem::new(self.operator.clone(), Subspace::full(d), w, x0)
    }
}

pub fn build_unstable<T: Real>(dim: usize) -> Result<UnstableInstance<T>> {
    if dim < 2 {
        return Err(Error::InvalidArgument("dimension must be at least 2".into()));
    }
    let vectors = (0..dim)
        .map(|j| HVector::unit(dim, j).scaled(re(T::one() / T::from_usize(j + 1).expect("index"))))
        .collect();
    Ok(UnstableInstance {
        operator: HOperator::identity(dim).with_label("identity"),
        sampling: VectorSystem::new(vectors)?,
        recovery: UnstableRecovery { dim },
    })
}

#[derive(Clone, Debug)]
pub struct RandomInstance<T: Real> {
    pub system: DiscreteSystem<T>,
    pub sampling: VectorSystem<T>,
    /// Bounds of `{P_W (I − A*)⁻¹ g_j}` on `W`.
    pub adjoint_bounds: FrameBounds<T>,
    /// `{P_W (I − A*)⁻¹ g_j}` frames `W`.
    pub frame_condition: bool,
    /// `G` frames the whole space.
    pub full_frame: bool,
}

/// Seeded random system with `ρ(A) = rho_target`, a random `W` of the given
/// dimension, `w ∈ W`, `x_0` and `J` sampling vectors, all complex Gaussian.
pub fn random_instance<T: Real>(
    seed: u64,
    dim: usize,
    count: usize,
    rho_target: f64,
    subspace_dim: usize,
) -> Result<RandomInstance<T>> {
    if !(rho_target > 0.0 && rho_target < 1.0) {
        return Err(Error::InvalidArgument("target spectral radius must lie in (0, 1)".into()));
    }
    if dim == 0 || count == 0 || subspace_dim == 0 || subspace_dim > dim {
        return Err(Error::InvalidArgument("need dim ≥ 1, J ≥ 1 and 1 ≤ subspace dim ≤ dim".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = HOperator::new(gaussian_matrix(&mut rng, dim, dim))?;
    let rho = spectral_radius(&raw)?;
    let a = raw.scaled(re(T::lit(rho_target) / rho)).with_label("random contraction");
    let basis = gaussian_matrix::<T>(&mut rng, dim, subspace_dim);
    let vectors: Vec<HVector<T>> = basis.column_iter().map(|c| HVector::from_raw(c.into_owned())).collect();
    let space = Subspace::from_vectors(dim, &vectors)?;
    let alpha = gaussian_matrix::<T>(&mut rng, space.rank(), 1).column(0).into_owned();
    let w = space.embed(&alpha)?;
    let x0 = HVector::from_raw(gaussian_matrix::<T>(&mut rng, dim, 1).column(0).into_owned());
    let sampling = VectorSystem::from_columns(&gaussian_matrix(&mut rng, dim, count))?;
    let system = DiscreteSystem::new(a, space, w, x0)?;
    let adjoint = crate::dynamics::stationary_adjoint_system(&system, &sampling)?;
    let adjoint_bounds = frame_bounds_on(&adjoint, system.space())?;
    let full_frame = frame_bounds_on(&sampling, &Subspace::full(dim))?.is_frame();
    Ok(RandomInstance { system, sampling, frame_condition: adjoint_bounds.is_frame(), adjoint_bounds, full_frame })
}
