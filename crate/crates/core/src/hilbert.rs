//! Finite truncation of ℓ²: vectors, bounded operators, closed subspaces and
//! the spectral utilities the rest of the crate builds on.
//!
//! Inner products are linear in the first argument:
//! `⟨u, v⟩ = Σ_k u_k · conj(v_k)`.

use std::ops::{Add, Neg, Sub};

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{is_finite, re, Real};

/// Relative drop tolerance used by modified Gram–Schmidt.
pub const GRAM_SCHMIDT_DROP: f64 = 1e-12;

/// Condition number beyond which `(I - A)⁻¹` is refused.
pub const RESOLVENT_CONDITION_LIMIT: f64 = 1e12;

/// Element of the truncated Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct HVector<T: Real> {
    coords: DVector<Complex<T>>,
}

impl<T: Real> HVector<T> {
    pub fn new(coords: DVector<Complex<T>>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("vector dimension must be positive".into()));
        }
        if !coords.iter().all(is_finite) {
            return Err(Error::NonFinite("vector"));
        }
        Ok(Self { coords })
    }

    pub fn from_complex(coords: Vec<Complex<T>>) -> Result<Self> {
        Self::new(DVector::from_vec(coords))
    }

    pub fn from_real(coords: &[T]) -> Result<Self> {
        Self::new(DVector::from_iterator(coords.len(), coords.iter().map(|&x| re(x))))
    }

    /// Wraps coordinates produced by arithmetic on already valid vectors.
    pub(crate) fn from_raw(coords: DVector<Complex<T>>) -> Self {
        Self { coords }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(DVector::zeros(dim))
    }

    /// Canonical basis vector `e_k` (0-based index).
    pub fn unit(dim: usize, k: usize) -> Self {
        let mut v = DVector::zeros(dim);
        v[k] = Complex::one();
        Self::from_raw(v)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &DVector<Complex<T>> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<Complex<T>> {
        self.coords
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        self.coords.as_slice()
    }

    pub fn norm(&self) -> T {
        self.coords.norm()
    }

    /// `⟨self, other⟩ = Σ self_k · conj(other_k)`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        inner(&self.coords, &other.coords)
    }

    pub fn scaled(&self, alpha: Complex<T>) -> Self {
        Self::from_raw(&self.coords * alpha)
    }

    pub fn distance(&self, other: &Self) -> T {
        (&self.coords - &other.coords).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(is_finite)
    }
}

impl<'a, T: Real> Add<&'a HVector<T>> for &'a HVector<T> {
    type Output = HVector<T>;
    fn add(self, rhs: &'a HVector<T>) -> HVector<T> {
        HVector::from_raw(&self.coords + &rhs.coords)
    }
}

impl<'a, T: Real> Sub<&'a HVector<T>> for &'a HVector<T> {
    type Output = HVector<T>;
    fn sub(self, rhs: &'a HVector<T>) -> HVector<T> {
        HVector::from_raw(&self.coords - &rhs.coords)
    }
}

impl<T: Real> Neg for &HVector<T> {
    type Output = HVector<T>;
    fn neg(self) -> HVector<T> {
        HVector::from_raw(-&self.coords)
    }
}

/// `Σ u_k conj(v_k)` on raw coordinate vectors.
pub(crate) fn inner<T: Real>(u: &DVector<Complex<T>>, v: &DVector<Complex<T>>) -> Complex<T> {
    v.dotc(u)
}

/// Bounded operator on the truncated space, stored as a dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HOperator<T: Real> {
    entries: DMatrix<Complex<T>>,
    label: Option<String>,
}

impl<T: Real> HOperator<T> {
    pub fn new(entries: DMatrix<Complex<T>>) -> Result<Self> {
        if entries.nrows() == 0 {
            return Err(Error::InvalidArgument("operator dimension must be positive".into()));
        }
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch {
                context: "square operator",
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        if !entries.iter().all(is_finite) {
            return Err(Error::NonFinite("operator"));
        }
        Ok(Self { entries, label: None })
    }

    pub fn from_real(entries: &DMatrix<T>) -> Result<Self> {
        Self::new(entries.map(re))
    }

    pub(crate) fn from_raw(entries: DMatrix<Complex<T>>) -> Self {
        Self { entries, label: None }
    }

    /// Attaches a name used in diagnostics.
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or("unnamed")
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_raw(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_raw(DMatrix::zeros(dim, dim))
    }

    pub fn diagonal(values: &[Complex<T>]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(values)))
    }

    pub fn diagonal_real(values: &[T]) -> Result<Self> {
        let v: Vec<_> = values.iter().map(|&x| re(x)).collect();
        Self::diagonal(&v)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex<T>> {
        &self.entries
    }

    pub fn apply(&self, v: &HVector<T>) -> Result<HVector<T>> {
        check_dim("operator application", self.dim(), v.dim())?;
        Ok(HVector::from_raw(&self.entries * v.coords()))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_raw(self.entries.adjoint())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_dim("operator composition", self.dim(), other.dim())?;
        Ok(Self::from_raw(&self.entries * &other.entries))
    }

    pub fn pow(&self, n: u32) -> Self {
        Self::from_raw(matrix_power(&self.entries, n))
    }

    pub fn scaled(&self, alpha: Complex<T>) -> Self {
        Self::from_raw(&self.entries * alpha)
    }

    /// `I - self`.
    pub fn identity_minus(&self) -> Self {
        Self::from_raw(DMatrix::identity(self.dim(), self.dim()) - &self.entries)
    }

    /// Operator (spectral) norm.
    pub fn norm(&self) -> T {
        spectral_norm(&self.entries)
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { context, expected, found })
    }
}

pub(crate) fn matrix_power<T: Real>(m: &DMatrix<Complex<T>>, mut n: u32) -> DMatrix<Complex<T>> {
    let mut result = DMatrix::identity(m.nrows(), m.ncols());
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Largest singular value.
pub(crate) fn spectral_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    if m.is_empty() {
        return T::zero();
    }
    m.clone().svd(false, false).singular_values.max()
}

/// Closed subspace spanned by an orthonormal basis (possibly empty).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace<T: Real> {
    ambient: usize,
    basis: DMatrix<Complex<T>>,
}

impl<T: Real> Subspace<T> {
    /// Orthonormalizes `vectors` with two passes of modified Gram–Schmidt,
    /// dropping directions whose residual falls below the relative drop
    /// tolerance.
    pub fn from_vectors(ambient: usize, vectors: &[HVector<T>]) -> Result<Self> {
        let drop = T::lit(GRAM_SCHMIDT_DROP);
        let mut accepted: Vec<DVector<Complex<T>>> = Vec::new();
        for v in vectors {
            check_dim("subspace generator", ambient, v.dim())?;
            let original = v.norm();
            if original == T::zero() {
                continue;
            }
            let mut r = v.coords().clone();
            for _ in 0..2 {
                for b in &accepted {
                    let proj = inner(&r, b);
                    r -= b * proj;
                }
            }
            let n = r.norm();
            if n > drop * original {
                accepted.push(r.unscale(n));
            }
        }
        let basis = if accepted.is_empty() {
            DMatrix::zeros(ambient, 0)
        } else {
            DMatrix::from_columns(&accepted)
        };
        Ok(Self { ambient, basis })
    }

    /// The whole ambient space with its canonical basis.
    pub fn full(ambient: usize) -> Self {
        Self { ambient, basis: DMatrix::identity(ambient, ambient) }
    }

    pub fn trivial(ambient: usize) -> Self {
        Self { ambient, basis: DMatrix::zeros(ambient, 0) }
    }

    pub fn span(v: &HVector<T>) -> Result<Self> {
        Self::from_vectors(v.dim(), std::slice::from_ref(v))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_trivial(&self) -> bool {
        self.rank() == 0
    }

    /// Basis vectors as columns of an `ambient × rank` matrix.
    pub fn basis_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<HVector<T>> {
        self.basis.column_iter().map(|c| HVector::from_raw(c.into_owned())).collect()
    }

    /// `P_W = B B*`.
    pub fn projector(&self) -> HOperator<T> {
        HOperator::from_raw(&self.basis * self.basis.adjoint())
    }

    pub fn project(&self, v: &HVector<T>) -> Result<HVector<T>> {
        check_dim("projection", self.ambient, v.dim())?;
        Ok(HVector::from_raw(&self.basis * (self.basis.adjoint() * v.coords())))
    }

    /// Coordinates of `P_W v` in the orthonormal basis.
    pub fn coordinates(&self, v: &HVector<T>) -> Result<DVector<Complex<T>>> {
        check_dim("subspace coordinates", self.ambient, v.dim())?;
        Ok(self.basis.adjoint() * v.coords())
    }

    /// Maps basis coordinates back to the ambient space.
    pub fn embed(&self, coeffs: &DVector<Complex<T>>) -> Result<HVector<T>> {
        check_dim("subspace embedding", self.rank(), coeffs.len())?;
        Ok(HVector::from_raw(&self.basis * coeffs))
    }

    /// `‖P_W v − v‖ ≤ rel_tol · ‖v‖`.
    pub fn contains(&self, v: &HVector<T>, rel_tol: T) -> Result<bool> {
        let p = self.project(v)?;
        Ok(p.distance(v) <= rel_tol * v.norm())
    }
}

/// Spectral radius `max |λ|` over the eigenvalues of `a`.
///
/// The complex matrix `X + iY` is embedded as the real matrix
/// `[[X, -Y], [Y, X]]`, whose spectrum is `σ(A) ∪ conj(σ(A))`, and the real
/// Schur form of the embedding is used.
pub fn spectral_radius<T: Real>(a: &HOperator<T>) -> Result<T> {
    let values = eigenvalue_moduli(a)?;
    Ok(values.into_iter().fold(T::zero(), |acc, x| acc.max(x)))
}

/// Moduli of all eigenvalues of the real embedding (each eigenvalue of `a`
/// appears together with its conjugate).
pub(crate) fn eigenvalue_moduli<T: Real>(a: &HOperator<T>) -> Result<Vec<T>> {
    let m = a.matrix();
    let d = m.nrows();
    if m.iter().all(|z| z.is_zero()) {
        return Ok(vec![T::zero(); 2 * d]);
    }
    let mut real = DMatrix::<T>::zeros(2 * d, 2 * d);
    for i in 0..d {
        for j in 0..d {
            let z = m[(i, j)];
            real[(i, j)] = z.re;
            real[(i + d, j + d)] = z.re;
            real[(i, j + d)] = -z.im;
            real[(i + d, j)] = z.im;
        }
    }
    let schur = Schur::try_new(real, T::default_epsilon(), 200 * (2 * d).max(10))
        .ok_or_else(|| Error::EigenNonConvergence { operator: a.label().to_string() })?;
    let eig = schur.complex_eigenvalues();
    let moduli: Vec<T> = eig.iter().map(|z| (z.re * z.re + z.im * z.im).sqrt()).collect();
    if moduli.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenNonConvergence { operator: a.label().to_string() });
    }
    Ok(moduli)
}

/// `(I − A)⁻¹` together with the 2-norm condition number of `I − A`.
#[derive(Clone, Debug)]
pub struct Resolvent<T: Real> {
    pub inverse: HOperator<T>,
    pub condition: T,
}

pub fn resolvent_at_one<T: Real>(a: &HOperator<T>) -> Result<Resolvent<T>> {
    let shifted = a.identity_minus();
    let sv = shifted.matrix().clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > T::zero() { smax / smin } else { T::max_value().unwrap_or(smax) };
    let limit = T::lit(RESOLVENT_CONDITION_LIMIT);
    if smin <= T::zero() || !condition.is_finite() || condition > limit {
        return Err(Error::IllConditionedResolvent { condition: condition.as_f64() });
    }
    let inverse = shifted
        .matrix()
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::IllConditionedResolvent { condition: f64::INFINITY })?;
    let inverse = HOperator::new(inverse)
        .map_err(|_| Error::IllConditionedResolvent { condition: condition.as_f64() })?;
    Ok(Resolvent { inverse, condition })
}

/// `Λₙ = I + A + … + Aⁿ⁻¹`, with `Λ₀ = 0`.
pub fn geometric_sum<T: Real>(a: &HOperator<T>, n: usize) -> HOperator<T> {
    let d = a.dim();
    let mut sum = DMatrix::zeros(d, d);
    let mut power = DMatrix::identity(d, d);
    for _ in 0..n {
        sum += &power;
        power = a.matrix() * &power;
    }
    HOperator::from_raw(sum)
}

/// Orthogonal projection of `v` onto `w`.
pub fn project<T: Real>(w: &Subspace<T>, v: &HVector<T>) -> Result<HVector<T>> {
    w.project(v)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn hermitian_eigen<T: Real>(m: &DMatrix<Complex<T>>) -> (DVector<T>, DMatrix<Complex<T>>) {
    let n = m.nrows();
    if n == 0 {
        return (DVector::zeros(0), DMatrix::zeros(0, 0));
    }
    let half = re(T::lit(0.5));
    let sym = (m + m.adjoint()) * half;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_columns(
        &order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>(),
    );
    (values, vectors)
}
