//! Trajectories of source-driven linear systems.
//!
//! * [`DiscreteSystem`]: `x_{n+1} = A x_n + w`, `w ∈ W`.
//! * [`LinearDynamics`]: history-dependent linear recursions with a
//!   stationary map `S : W → H`.
//! * [`ContinuousSystem`]: `x'(t) = A x(t) + w` with bounded `A`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::frames::VectorSystem;
use crate::hilbert::{
    check_dim, matrix_power, resolvent_at_one, spectral_radius, HOperator, HVector, Subspace,
};
use crate::measurement::DataMatrix;
use crate::scalar::{re, Real};

/// Relative tolerance for `w ∈ W`.
pub const SOURCE_MEMBERSHIP_TOL: f64 = 1e-10;

/// `x_{n+1} = A x_n + w` with `w` confined to `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteSystem<T: Real> {
    operator: HOperator<T>,
    space: Subspace<T>,
    source: HVector<T>,
    initial: HVector<T>,
}

impl<T: Real> DiscreteSystem<T> {
    pub fn new(
        operator: HOperator<T>,
        space: Subspace<T>,
        source: HVector<T>,
        initial: HVector<T>,
    ) -> Result<Self> {
        let d = operator.dim();
        check_dim("system source subspace", d, space.ambient_dim())?;
        check_dim("system source", d, source.dim())?;
        check_dim("system initial state", d, initial.dim())?;
        if !space.contains(&source, T::lit(SOURCE_MEMBERSHIP_TOL))? {
            return Err(Error::InvalidArgument("source term does not lie in the source subspace".into()));
        }
        Ok(Self { operator, space, source, initial })
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    pub fn operator(&self) -> &HOperator<T> {
        &self.operator
    }

    pub fn space(&self) -> &Subspace<T> {
        &self.space
    }

    pub fn source(&self) -> &HVector<T> {
        &self.source
    }

    pub fn initial(&self) -> &HVector<T> {
        &self.initial
    }

    pub fn with_initial(&self, initial: HVector<T>) -> Result<Self> {
        Self::new(self.operator.clone(), self.space.clone(), self.source.clone(), initial)
    }

    pub fn with_source(&self, source: HVector<T>) -> Result<Self> {
        Self::new(self.operator.clone(), self.space.clone(), source, self.initial.clone())
    }

    /// Lazy state sequence `x_0, x_1, …`.
    pub fn trajectory(&self) -> Trajectory<'_, T> {
        Trajectory { system: self, state: Some(self.initial.coords().clone()), step: 0, failed: false }
    }
}

/// Iterator over the states of a [`DiscreteSystem`]; yields an error and
/// stops once the divergence guard trips.
pub struct Trajectory<'a, T: Real> {
    system: &'a DiscreteSystem<T>,
    state: Option<DVector<Complex<T>>>,
    step: usize,
    failed: bool,
}

impl<T: Real> Iterator for Trajectory<'_, T> {
    type Item = Result<HVector<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let current = self.state.take()?;
        let norm = current.norm();
        if !norm.is_finite() || norm > T::divergence_threshold() {
            self.failed = true;
            return Some(Err(Error::DivergentTrajectory { step: self.step, norm: norm.as_f64() }));
        }
        let next = self.system.operator.matrix() * &current + self.system.source.coords();
        self.state = Some(next);
        self.step += 1;
        Some(Ok(HVector::from_raw(current)))
    }
}

/// `x_0, …, x_{N−1}` by direct recursion.
pub fn iterate<T: Real>(sys: &DiscreteSystem<T>, n: usize) -> Result<Vec<HVector<T>>> {
    if n == 0 {
        return Err(Error::InvalidArgument("iterate needs N >= 1".into()));
    }
    sys.trajectory().take(n).collect()
}

/// `x_n = Aⁿ x_0 + (I − Aⁿ)(I − A)⁻¹ w`.
pub fn closed_form<T: Real>(sys: &DiscreteSystem<T>, n: u32) -> Result<HVector<T>> {
    let resolvent = resolvent_at_one(sys.operator())?;
    let d = sys.dim();
    let power = matrix_power(sys.operator().matrix(), n);
    let stationary = resolvent.inverse.matrix() * sys.source().coords();
    let x = &power * sys.initial().coords() + (DMatrix::identity(d, d) - &power) * stationary;
    Ok(HVector::from_raw(x))
}

/// The stationary map `S = (I − A)⁻¹|_W` and its adjoint `S* = P_W (I − A*)⁻¹`.
#[derive(Clone, Debug)]
pub struct StationaryMap<T: Real> {
    /// `(I − A)⁻¹ P_W`, which agrees with `S` on `W` and vanishes on `W^⊥`.
    pub forward: HOperator<T>,
    pub adjoint: HOperator<T>,
    pub spectral_radius: T,
    /// `ρ(A) < 1`: every trajectory converges to `S(w)`.
    pub attracting: bool,
    pub condition: T,
}

impl<T: Real> StationaryMap<T> {
    pub fn apply(&self, w: &HVector<T>) -> Result<HVector<T>> {
        self.forward.apply(w)
    }

    /// `{S* g_j}_j`.
    pub fn adjoint_system(&self, g: &VectorSystem<T>) -> Result<VectorSystem<T>> {
        g.map(&self.adjoint)
    }
}

/// Builds `S` for the linear system. When `ρ(A) ≥ 1` the map still exists
/// (as long as `1 ∉ σ(A)`) but `attracting` is false.
pub fn stationary_map<T: Real>(sys: &DiscreteSystem<T>) -> Result<StationaryMap<T>> {
    stationary_map_for(sys.operator(), sys.space())
}

pub fn stationary_map_for<T: Real>(a: &HOperator<T>, space: &Subspace<T>) -> Result<StationaryMap<T>> {
    check_dim("stationary map", a.dim(), space.ambient_dim())?;
    let resolvent = resolvent_at_one(a)?;
    let rho = spectral_radius(a)?;
    let p = space.projector();
    let forward = HOperator::from_raw(resolvent.inverse.matrix() * p.matrix());
    let adjoint = forward.adjoint();
    Ok(StationaryMap {
        forward,
        adjoint,
        spectral_radius: rho,
        attracting: rho < T::one(),
        condition: resolvent.condition,
    })
}

/// Row `n`, column `j` is `⟨x_n, g_j⟩`.
pub fn sample<T: Real>(states: &[HVector<T>], g: &VectorSystem<T>) -> Result<DataMatrix<T>> {
    let rows = states.iter().map(|x| g.analysis(x)).collect::<Result<Vec<_>>>()?;
    DataMatrix::from_rows(rows)
}

/// `x_{n+1} = A x_n + w_n` for a prescribed source schedule; returns
/// `sources.len() + 1` states.
pub fn iterate_time_varying<T: Real>(
    a: &HOperator<T>,
    initial: &HVector<T>,
    sources: &[HVector<T>],
) -> Result<Vec<HVector<T>>> {
    check_dim("time-varying initial state", a.dim(), initial.dim())?;
    let mut states = Vec::with_capacity(sources.len() + 1);
    let mut x = initial.coords().clone();
    for (n, w) in sources.iter().enumerate() {
        check_dim("time-varying source", a.dim(), w.dim())?;
        let next = a.matrix() * &x + w.coords();
        states.push(HVector::from_raw(x));
        let norm = next.norm();
        if !norm.is_finite() || norm > T::divergence_threshold() {
            return Err(Error::DivergentTrajectory { step: n + 1, norm: norm.as_f64() });
        }
        x = next;
    }
    states.push(HVector::from_raw(x));
    Ok(states)
}

/// A recursion `x_n = F_n(x_0, …, x_{n−1}, w)` that is linear in its
/// arguments, with a stationary map `S : W → H`.
///
/// The three structural properties (existence of a stationary state for
/// every source, boundedness of `S`, attraction of every trajectory) are
/// not assumed; [`check_stationarity`] and [`attraction_profile`] measure
/// them on concrete instances.
pub trait LinearDynamics<T: Real> {
    fn dim(&self) -> usize;

    fn source_space(&self) -> &Subspace<T>;

    /// Next state from the full history `x_0, …, x_{n−1}` (non-empty).
    fn next_state(&self, history: &[HVector<T>], source: &HVector<T>) -> HVector<T>;

    /// `S(w)`.
    fn stationary(&self, source: &HVector<T>) -> Result<HVector<T>>;
}

impl<T: Real> LinearDynamics<T> for DiscreteSystem<T> {
    fn dim(&self) -> usize {
        self.dim()
    }

    fn source_space(&self) -> &Subspace<T> {
        &self.space
    }

    fn next_state(&self, history: &[HVector<T>], source: &HVector<T>) -> HVector<T> {
        let last = history.last().expect("non-empty history");
        HVector::from_raw(self.operator.matrix() * last.coords() + source.coords())
    }

    fn stationary(&self, source: &HVector<T>) -> Result<HVector<T>> {
        let r = resolvent_at_one(&self.operator)?;
        r.inverse.apply(source)
    }
}

/// `x_n = Σ_{k=1..m} A_k x_{n−k} + B w`, with missing history padded by `x_0`.
///
/// The stationary state is `S(w) = (I − Σ_k A_k)⁻¹ B w`.
#[derive(Clone, Debug)]
pub struct MultiStepSystem<T: Real> {
    lags: Vec<HOperator<T>>,
    input: HOperator<T>,
    space: Subspace<T>,
}

impl<T: Real> MultiStepSystem<T> {
    pub fn new(lags: Vec<HOperator<T>>, input: HOperator<T>, space: Subspace<T>) -> Result<Self> {
        if lags.is_empty() {
            return Err(Error::InvalidArgument("multi-step system needs at least one lag".into()));
        }
        let d = input.dim();
        for a in &lags {
            check_dim("multi-step lag", d, a.dim())?;
        }
        check_dim("multi-step source subspace", d, space.ambient_dim())?;
        Ok(Self { lags, input, space })
    }

    /// `Σ_k A_k`.
    pub fn lag_sum(&self) -> HOperator<T> {
        let d = self.input.dim();
        let mut s = DMatrix::zeros(d, d);
        for a in &self.lags {
            s += a.matrix();
        }
        HOperator::from_raw(s)
    }
}

impl<T: Real> LinearDynamics<T> for MultiStepSystem<T> {
    fn dim(&self) -> usize {
        self.input.dim()
    }

    fn source_space(&self) -> &Subspace<T> {
        &self.space
    }

    fn next_state(&self, history: &[HVector<T>], source: &HVector<T>) -> HVector<T> {
        let n = history.len();
        let mut x = self.input.matrix() * source.coords();
        for (k, a) in self.lags.iter().enumerate() {
            let past = if k < n { &history[n - 1 - k] } else { &history[0] };
            x += a.matrix() * past.coords();
        }
        HVector::from_raw(x)
    }

    fn stationary(&self, source: &HVector<T>) -> Result<HVector<T>> {
        let r = resolvent_at_one(&self.lag_sum())?;
        Ok(HVector::from_raw(r.inverse.matrix() * self.input.matrix() * source.coords()))
    }
}

type StepFn<T> = dyn Fn(&[HVector<T>], &HVector<T>) -> HVector<T> + Send + Sync;
type StationaryFn<T> = dyn Fn(&HVector<T>) -> HVector<T> + Send + Sync;

/// Caller-supplied step and stationary map.
pub struct GeneralSystem<T: Real> {
    dim: usize,
    space: Subspace<T>,
    step: Box<StepFn<T>>,
    stationary: Box<StationaryFn<T>>,
}

impl<T: Real> GeneralSystem<T> {
    pub fn new(
        space: Subspace<T>,
        step: impl Fn(&[HVector<T>], &HVector<T>) -> HVector<T> + Send + Sync + 'static,
        stationary: impl Fn(&HVector<T>) -> HVector<T> + Send + Sync + 'static,
    ) -> Self {
        Self { dim: space.ambient_dim(), space, step: Box::new(step), stationary: Box::new(stationary) }
    }
}

impl<T: Real> LinearDynamics<T> for GeneralSystem<T> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn source_space(&self) -> &Subspace<T> {
        &self.space
    }

    fn next_state(&self, history: &[HVector<T>], source: &HVector<T>) -> HVector<T> {
        (self.step)(history, source)
    }

    fn stationary(&self, source: &HVector<T>) -> Result<HVector<T>> {
        Ok((self.stationary)(source))
    }
}

/// `x_0, …, x_{n−1}` for any [`LinearDynamics`].
pub fn run<T: Real, S: LinearDynamics<T> + ?Sized>(
    sys: &S,
    initial: &HVector<T>,
    source: &HVector<T>,
    n: usize,
) -> Result<Vec<HVector<T>>> {
    check_dim("general system initial state", sys.dim(), initial.dim())?;
    check_dim("general system source", sys.dim(), source.dim())?;
    if n == 0 {
        return Err(Error::InvalidArgument("run needs N >= 1".into()));
    }
    let mut states = vec![initial.clone()];
    while states.len() < n {
        let next = sys.next_state(&states, source);
        let norm = next.norm();
        if !norm.is_finite() || norm > T::divergence_threshold() {
            return Err(Error::DivergentTrajectory { step: states.len(), norm: norm.as_f64() });
        }
        states.push(next);
    }
    Ok(states)
}

/// `max_{n < n_check} ‖x_n − S(w)‖ / ‖S(w)‖` for the run started at `S(w)`.
pub fn check_stationarity<T: Real, S: LinearDynamics<T> + ?Sized>(
    sys: &S,
    source: &HVector<T>,
    n_check: usize,
) -> Result<T> {
    let fixed = sys.stationary(source)?;
    let scale = fixed.norm();
    let states = run(sys, &fixed, source, n_check.max(1))?;
    let dev = states.iter().map(|x| x.distance(&fixed)).fold(T::zero(), |a, b| a.max(b));
    Ok(if scale > T::zero() { dev / scale } else { dev })
}

/// `‖x_n − S(w)‖` for `n < horizon`.
pub fn attraction_profile<T: Real, S: LinearDynamics<T> + ?Sized>(
    sys: &S,
    initial: &HVector<T>,
    source: &HVector<T>,
    horizon: usize,
) -> Result<Vec<T>> {
    let fixed = sys.stationary(source)?;
    Ok(run(sys, initial, source, horizon)?.iter().map(|x| x.distance(&fixed)).collect())
}

/// Matrix of `S` on the orthonormal basis of `W` (`dim × rank`).
pub fn stationary_matrix<T: Real, S: LinearDynamics<T> + ?Sized>(sys: &S) -> Result<DMatrix<Complex<T>>> {
    let space = sys.source_space();
    if space.is_trivial() {
        return Err(Error::EmptySubspace);
    }
    let cols = space
        .basis_vectors()
        .iter()
        .map(|b| sys.stationary(b).map(HVector::into_coords))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_columns(&cols))
}

/// `{S* g_j}_j ⊂ W` with `S* g = B M* g` for `M` the matrix of `S`.
pub fn stationary_adjoint_system<T: Real, S: LinearDynamics<T> + ?Sized>(
    sys: &S,
    g: &VectorSystem<T>,
) -> Result<VectorSystem<T>> {
    check_dim("stationary adjoint system", sys.dim(), g.dim())?;
    let m = stationary_matrix(sys)?;
    let b = sys.source_space().basis_matrix();
    VectorSystem::from_columns(&(b * m.adjoint() * g.synthesis_matrix()))
}

/// Generators with `‖A⁻¹‖·‖A‖` above this use the augmented exponential.
const INTEGRAL_CONDITION_LIMIT: f64 = 1e8;

/// `x'(t) = A x(t) + w`, `x(0) = x_0`, sampled on `t_grid`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousSystem<T: Real> {
    generator: HOperator<T>,
    source: HVector<T>,
    initial: HVector<T>,
    t_grid: Vec<T>,
}

impl<T: Real> ContinuousSystem<T> {
    pub fn new(
        generator: HOperator<T>,
        source: HVector<T>,
        initial: HVector<T>,
        t_grid: Vec<T>,
    ) -> Result<Self> {
        let d = generator.dim();
        check_dim("continuous source", d, source.dim())?;
        check_dim("continuous initial state", d, initial.dim())?;
        match t_grid.first() {
            Some(t0) if *t0 == T::zero() => {}
            _ => return Err(Error::InvalidArgument("time grid must start at 0".into())),
        }
        if t_grid.windows(2).any(|p| !(p[1] > p[0])) || t_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument("time grid must be strictly increasing".into()));
        }
        Ok(Self { generator, source, initial, t_grid })
    }

    pub fn generator(&self) -> &HOperator<T> {
        &self.generator
    }

    pub fn source(&self) -> &HVector<T> {
        &self.source
    }

    pub fn initial(&self) -> &HVector<T> {
        &self.initial
    }

    pub fn t_grid(&self) -> &[T] {
        &self.t_grid
    }

    /// `x(t) = e^{tA} x_0 + (∫₀ᵗ e^{sA} ds) w`, valid for any real `t`
    /// (bounded generator).
    pub fn state_at(&self, t: T) -> Result<HVector<T>> {
        let d = self.generator.dim();
        let a = self.generator.matrix();
        let well_conditioned = {
            let sv = a.clone().svd(false, false).singular_values;
            let smin = sv.min();
            smin > T::zero() && sv.max() / smin < T::lit(INTEGRAL_CONDITION_LIMIT)
        };
        let x = if well_conditioned {
            let e = expm(&(a * re(t)))?;
            let homogeneous = &e * self.initial.coords();
            let forced = (e - DMatrix::identity(d, d)) * self.source.coords();
            let integral = a
                .clone()
                .lu()
                .solve(&forced)
                .ok_or_else(|| Error::ExpmFailure("singular generator".into()))?;
            homogeneous + integral
        } else {
            // exp(t [[A, w], [0, 0]]) = [[e^{tA}, (∫₀ᵗ e^{sA} ds) w], [0, 1]]
            let mut aug = DMatrix::zeros(d + 1, d + 1);
            aug.view_mut((0, 0), (d, d)).copy_from(a);
            aug.view_mut((0, d), (d, 1)).copy_from(self.source.coords());
            let e = expm(&(aug * re(t)))?;
            e.view((0, 0), (d, d)) * self.initial.coords() + e.view((0, d), (d, 1)).column(0)
        };
        HVector::new(x).map_err(|_| Error::ExpmFailure("non-finite state".into()))
    }
}

/// States `x(t)` on the system's time grid.
pub fn evolve_continuous<T: Real>(sys: &ContinuousSystem<T>) -> Result<Vec<HVector<T>>> {
    sys.t_grid.iter().map(|&t| sys.state_at(t)).collect()
}

/// Matrix exponential by scaling and squaring with a Padé approximant.
pub fn expm<T: Real>(m: &DMatrix<Complex<T>>) -> Result<DMatrix<Complex<T>>> {
    if m.iter().all(|z| z.is_zero()) {
        return Ok(DMatrix::identity(m.nrows(), m.ncols()));
    }
    let e = m.exp();
    if e.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(e)
    } else {
        Err(Error::ExpmFailure("non-finite result".into()))
    }
}
