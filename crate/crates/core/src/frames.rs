//! Bessel and frame analysis of finite vector systems.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{check_dim, hermitian_eigen, resolvent_at_one, HOperator, HVector, Subspace};
use crate::scalar::Real;

/// A system counts as a frame for a subspace when `lower > FRAME_RANK_TOL · upper`.
pub const FRAME_RANK_TOL: f64 = 1e-10;

/// Finite family `{g_j}` of sampling vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSystem<T: Real> {
    dim: usize,
    vectors: Vec<HVector<T>>,
    // columns are the g_j
    synthesis: DMatrix<Complex<T>>,
}

impl<T: Real> VectorSystem<T> {
    pub fn new(vectors: Vec<HVector<T>>) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidArgument("vector system needs at least one vector".into()))?;
        let dim = first.dim();
        for v in &vectors {
            check_dim("vector system", dim, v.dim())?;
        }
        let cols: Vec<DVector<Complex<T>>> = vectors.iter().map(|v| v.coords().clone()).collect();
        let synthesis = DMatrix::from_columns(&cols);
        Ok(Self { dim, vectors, synthesis })
    }

    /// Builds the system from the columns of a `dim × J` matrix.
    pub fn from_columns(m: &DMatrix<Complex<T>>) -> Result<Self> {
        let vectors = m
            .column_iter()
            .map(|c| HVector::new(c.into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    /// Canonical orthonormal basis of the ambient space.
    pub fn orthonormal_basis(dim: usize) -> Self {
        Self::new((0..dim).map(|k| HVector::unit(dim, k)).collect()).expect("dim > 0")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[HVector<T>] {
        &self.vectors
    }

    pub fn get(&self, j: usize) -> &HVector<T> {
        &self.vectors[j]
    }

    /// `dim × J` matrix whose columns are the `g_j`.
    pub fn synthesis_matrix(&self) -> &DMatrix<Complex<T>> {
        &self.synthesis
    }

    /// `v ↦ (⟨v, g_j⟩)_j`.
    pub fn analysis(&self, v: &HVector<T>) -> Result<DVector<Complex<T>>> {
        check_dim("analysis operator", self.dim, v.dim())?;
        Ok(self.synthesis.adjoint() * v.coords())
    }

    /// `c ↦ Σ_j c_j g_j`.
    pub fn synthesis(&self, coeffs: &DVector<Complex<T>>) -> Result<HVector<T>> {
        check_dim("synthesis operator", self.len(), coeffs.len())?;
        Ok(HVector::from_raw(&self.synthesis * coeffs))
    }

    /// `v ↦ Σ_j ⟨v, g_j⟩ g_j`.
    pub fn frame_operator(&self) -> HOperator<T> {
        HOperator::from_raw(&self.synthesis * self.synthesis.adjoint())
    }

    /// Applies `op` to every vector.
    pub fn map(&self, op: &HOperator<T>) -> Result<Self> {
        check_dim("vector system map", self.dim, op.dim())?;
        Self::from_columns(&(op.matrix() * &self.synthesis))
    }
}

/// Optimal frame bounds of a system relative to a (sub)space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FrameBounds<T: Real> {
    pub lower: T,
    pub upper: T,
    pub subspace_rank: usize,
}

impl<T: Real> FrameBounds<T> {
    /// Scale-invariant frame test: `lower > 1e-10 · upper`.
    pub fn is_frame(&self) -> bool {
        self.upper > T::zero() && self.lower > T::lit(FRAME_RANK_TOL) * self.upper
    }
}

/// Optimal Bessel bound `C_G`: the largest eigenvalue of the frame operator.
pub fn bessel_bound<T: Real>(g: &VectorSystem<T>) -> T {
    top_bessel_direction(g).0
}

/// Bessel bound together with a unit vector attaining it.
pub fn top_bessel_direction<T: Real>(g: &VectorSystem<T>) -> (T, HVector<T>) {
    let s = g.synthesis_matrix();
    let (values, vectors) = if g.len() < g.dim() {
        // Work with the smaller Gram matrix G*G and map its top eigenvector back.
        let (vals, vecs) = hermitian_eigen(&(s.adjoint() * s));
        let top = vecs.column(vals.len() - 1).into_owned();
        let lifted = s * top;
        let n = lifted.norm();
        let dir = if n > T::zero() { lifted.unscale(n) } else { unit_coords(g.dim()) };
        (vals, DMatrix::from_columns(&[dir]))
    } else {
        let (vals, vecs) = hermitian_eigen(&(s * s.adjoint()));
        let top = vecs.column(vals.len() - 1).into_owned();
        (vals, DMatrix::from_columns(&[top]))
    };
    let c = values[values.len() - 1].max(T::zero());
    (c, HVector::from_raw(vectors.column(0).into_owned()))
}

fn unit_coords<T: Real>(dim: usize) -> DVector<Complex<T>> {
    HVector::<T>::unit(dim, 0).into_coords()
}

/// Restricted frame operator `B* S B` for the orthonormal basis `B` of `w`.
fn restricted_frame_operator<T: Real>(
    g: &VectorSystem<T>,
    w: &Subspace<T>,
) -> Result<DMatrix<Complex<T>>> {
    check_dim("frame bounds", w.ambient_dim(), g.dim())?;
    if w.is_trivial() {
        return Err(Error::EmptySubspace);
    }
    let coeffs = w.basis_matrix().adjoint() * g.synthesis_matrix();
    Ok(&coeffs * coeffs.adjoint())
}

/// Optimal bounds in `c‖w‖² ≤ Σ_j |⟨w, g_j⟩|² ≤ C‖w‖²` over `w ∈ W`.
pub fn frame_bounds_on<T: Real>(g: &VectorSystem<T>, w: &Subspace<T>) -> Result<FrameBounds<T>> {
    let op = restricted_frame_operator(g, w)?;
    let (values, _) = hermitian_eigen(&op);
    Ok(FrameBounds {
        lower: values[0].max(T::zero()),
        upper: values[values.len() - 1].max(T::zero()),
        subspace_rank: w.rank(),
    })
}

/// Canonical dual `{g̃_j} ⊂ W` with `Σ_j ⟨w, g_j⟩ g̃_j = w` for all `w ∈ W`.
///
/// Only the frame operator restricted to `W` is inverted, so `G` need not
/// frame the ambient space.
pub fn canonical_dual<T: Real>(g: &VectorSystem<T>, w: &Subspace<T>) -> Result<VectorSystem<T>> {
    let op = restricted_frame_operator(g, w)?;
    let (values, vectors) = hermitian_eigen(&op);
    let lower = values[0].max(T::zero());
    let upper = values[values.len() - 1].max(T::zero());
    let bounds = FrameBounds { lower, upper, subspace_rank: w.rank() };
    if !bounds.is_frame() {
        return Err(Error::NotAFrame { lower: lower.as_f64(), upper: upper.as_f64() });
    }
    let inv_diag = DMatrix::from_diagonal(&values.map(|x| Complex::new(T::one() / x, T::zero())));
    let inverse = &vectors * inv_diag * vectors.adjoint();
    let b = w.basis_matrix();
    let duals = b * inverse * (b.adjoint() * g.synthesis_matrix());
    VectorSystem::from_columns(&duals)
}

/// `a_ij = ⟨A* g_j, g̃_i⟩`, the expansion coefficients of `A* g_j` in `G`.
pub fn coefficient_matrix<T: Real>(
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
) -> Result<DMatrix<Complex<T>>> {
    check_dim("coefficient matrix", g.dim(), a.dim())?;
    check_dim("coefficient matrix", g.dim(), dual.dim())?;
    check_dim("coefficient matrix (dual size)", g.len(), dual.len())?;
    // entry (i, j) = Σ_k (A* g_j)_k conj(g̃_i)_k = (G̃* A* G)_{ij}
    Ok(dual.synthesis_matrix().adjoint() * a.matrix().adjoint() * g.synthesis_matrix())
}

/// `{P_W (I − A*)⁻¹ g_j}_j`, the system whose frame property on `W` decides
/// stable recoverability of sources in `W`.
pub fn recoverability_system<T: Real>(
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    w: &Subspace<T>,
) -> Result<VectorSystem<T>> {
    check_dim("recoverability system", g.dim(), a.dim())?;
    check_dim("recoverability system", g.dim(), w.ambient_dim())?;
    let resolvent = resolvent_at_one(a)?;
    let adjoint_resolvent = resolvent.inverse.adjoint();
    let m = w.projector().matrix() * adjoint_resolvent.matrix() * g.synthesis_matrix();
    VectorSystem::from_columns(&m)
}

/// Residual `max_j ‖A* g_j − Σ_i a_ij g_i‖` of the coefficient expansion.
pub fn expansion_residual<T: Real>(
    a: &HOperator<T>,
    g: &VectorSystem<T>,
    coeffs: &DMatrix<Complex<T>>,
) -> T {
    let lhs = a.matrix().adjoint() * g.synthesis_matrix();
    let rhs = g.synthesis_matrix() * coeffs;
    (lhs - rhs)
        .column_iter()
        .map(|c| c.norm())
        .fold(T::zero(), |acc, x| acc.max(x))
}

/// Residual of the dual reconstruction identity `Σ_j ⟨v, g_j⟩ g̃_j = v`.
pub fn reconstruction_residual<T: Real>(
    g: &VectorSystem<T>,
    dual: &VectorSystem<T>,
    v: &HVector<T>,
) -> Result<T> {
    let coeffs = g.analysis(v)?;
    Ok(dual.synthesis(&coeffs)?.distance(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::re;

    #[test]
    fn orthonormal_basis_is_parseval() {
        let g = VectorSystem::<f64>::orthonormal_basis(6);
        assert!((bessel_bound(&g) - 1.0).abs() < 1e-14);
        let b = frame_bounds_on(&g, &Subspace::full(6)).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-14 && (b.upper - 1.0).abs() < 1e-14);
    }

    #[test]
    fn duplicated_vector_doubles_bound() {
        let e1 = HVector::<f64>::unit(3, 0);
        let g = VectorSystem::new(vec![e1.clone(), e1]).unwrap();
        assert!((bessel_bound(&g) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_line_is_not_framed() {
        let g = VectorSystem::new(vec![HVector::<f64>::unit(3, 0)]).unwrap();
        let w = Subspace::span(&HVector::unit(3, 1)).unwrap();
        let b = frame_bounds_on(&g, &w).unwrap();
        assert_eq!(b.lower, 0.0);
        assert!(!b.is_frame());
        assert!(matches!(canonical_dual(&g, &w), Err(Error::NotAFrame { .. })));
    }

    #[test]
    fn empty_subspace_is_rejected() {
        let g = VectorSystem::<f64>::orthonormal_basis(3);
        assert!(matches!(frame_bounds_on(&g, &Subspace::trivial(3)), Err(Error::EmptySubspace)));
    }

    #[test]
    fn scalar_frame_dual() {
        let g = VectorSystem::new(vec![HVector::<f64>::unit(2, 0).scaled(re(2.0))]).unwrap();
        let w = Subspace::span(&HVector::unit(2, 0)).unwrap();
        let dual = canonical_dual(&g, &w).unwrap();
        assert!((dual.get(0).coords()[0].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_basis_is_self_dual() {
        let g = VectorSystem::<f64>::orthonormal_basis(5);
        let dual = canonical_dual(&g, &Subspace::full(5)).unwrap();
        assert!((dual.synthesis_matrix() - g.synthesis_matrix()).norm() < 1e-14);
    }

    #[test]
    fn coefficient_matrix_trivial_operators() {
        let g = VectorSystem::<f64>::orthonormal_basis(4);
        let dual = canonical_dual(&g, &Subspace::full(4)).unwrap();
        let zero = coefficient_matrix(&HOperator::zeros(4), &g, &dual).unwrap();
        assert!(zero.iter().all(|z| z.norm() == 0.0));
        let id = coefficient_matrix(&HOperator::identity(4), &g, &dual).unwrap();
        assert!((id - DMatrix::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn recoverability_system_of_zero_operator_is_projection() {
        let g = VectorSystem::new(vec![
            HVector::<f64>::from_real(&[1.0, 2.0, 3.0]).unwrap(),
            HVector::from_real(&[0.0, -1.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let w = Subspace::from_vectors(3, &[HVector::unit(3, 0), HVector::unit(3, 2)]).unwrap();
        let sys = recoverability_system(&HOperator::zeros(3), &g, &w).unwrap();
        for (out, gj) in sys.vectors().iter().zip(g.vectors()) {
            assert!(out.distance(&w.project(gj).unwrap()) < 1e-14);
        }
    }
}
