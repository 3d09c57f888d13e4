//! Independent reference computations for the integration tests.
//!
//! Nothing here calls into the library's numerical routines: inner products,
//! trajectories and stacked systems are assembled with explicit loops, and
//! eigenvalues come from a characteristic polynomial or a complex Schur form.
#![allow(dead_code)]

use fr_core::{DMatrix, DVector, HOperatorF64, HVectorF64, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cgauss(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_dvec(rng: &mut ChaCha8Rng, d: usize) -> DVector<C64> {
    DVector::from_fn(d, |_, _| cgauss(rng))
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> HVectorF64 {
    HVectorF64::new(random_dvec(rng, d)).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<C64> {
    DMatrix::from_fn(r, c, |_, _| cgauss(rng))
}

/// Random operator rescaled so that its spectral norm is `norm`.
pub fn random_operator_with_norm(rng: &mut ChaCha8Rng, d: usize, norm: f64) -> HOperatorF64 {
    let m = random_matrix(rng, d, d);
    let s = m.clone().svd(false, false).singular_values.max();
    HOperatorF64::new(m * C64::new(norm / s, 0.0)).unwrap()
}

/// `Σ_k u_k conj(v_k)` by hand.
pub fn naive_inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len());
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..u.len() {
        acc += u[k] * v[k].conj();
    }
    acc
}

pub fn naive_norm(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn naive_matvec(a: &DMatrix<C64>, x: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.nrows()];
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            out[i] += a[(i, k)] * x[k];
        }
    }
    out
}

pub fn naive_matmul(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = DMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..a.ncols() {
                acc += a[(i, k)] * b[(k, j)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// `x_0, …, x_{n−1}` of `x_{k+1} = A x_k + w`.
pub fn naive_trajectory(a: &DMatrix<C64>, x0: &[C64], w: &[C64], n: usize) -> Vec<Vec<C64>> {
    let mut out = vec![x0.to_vec()];
    while out.len() < n {
        let next: Vec<C64> = naive_matvec(a, out.last().unwrap()).iter().zip(w).map(|(a, b)| a + b).collect();
        out.push(next);
    }
    out
}

/// `d_nj = ⟨x_n, g_j⟩`.
pub fn naive_samples(states: &[Vec<C64>], g: &[Vec<C64>]) -> Vec<Vec<C64>> {
    states.iter().map(|x| g.iter().map(|gj| naive_inner(x, gj)).collect()).collect()
}

/// Characteristic polynomial coefficients `c_0..c_d` (monic, `c_d = 1`) by
/// the Faddeev–LeVerrier recursion. Fine for small, well-scaled matrices.
pub fn char_poly(a: &DMatrix<C64>) -> Vec<C64> {
    let d = a.nrows();
    let mut coeffs = vec![C64::new(0.0, 0.0); d + 1];
    coeffs[d] = C64::new(1.0, 0.0);
    let mut m = DMatrix::<C64>::zeros(d, d);
    for k in 1..=d {
        let mut next = naive_matmul(a, &m);
        for i in 0..d {
            next[(i, i)] += coeffs[d - k + 1];
        }
        m = next;
        let am = naive_matmul(a, &m);
        let trace: C64 = (0..d).map(|i| am[(i, i)]).sum();
        coeffs[d - k] = -trace / C64::new(k as f64, 0.0);
    }
    coeffs
}

/// Roots of a monic polynomial by Durand–Kerner iteration.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let d = coeffs.len() - 1;
    let eval = |z: C64| coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let radius = 1.0 + coeffs[..d].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..d).map(|k| seed.powu(k as u32) * radius * 0.5).collect();
    for _ in 0..5000 {
        let mut moved = 0.0f64;
        for i in 0..d {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..d {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 {
            break;
        }
    }
    roots
}

pub fn companion_spectral_radius(a: &DMatrix<C64>) -> f64 {
    poly_roots(&char_poly(a)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral radius from nalgebra's complex Schur decomposition.
pub fn schur_spectral_radius(a: &DMatrix<C64>) -> f64 {
    let t = a.clone().schur().unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)].norm()).fold(0.0, f64::max)
}

pub fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().svd(false, false).singular_values.max()
}

/// Solves the stacked system `⟨Aⁿ x_0 + Λ_n B α, g_j⟩ = d_nj`, `n < rows`,
/// for `(x_0, α)` by SVD least squares and returns `w = B α`.
///
/// The rows are assembled with hand-written loops; only the final solve
/// uses a library SVD.
pub fn least_squares_source(
    a: &DMatrix<C64>,
    g: &[Vec<C64>],
    basis: &DMatrix<C64>,
    data: &[Vec<C64>],
) -> DVector<C64> {
    let d = a.nrows();
    let r = basis.ncols();
    let jn = g.len();
    let rows = data.len();
    let mut m = DMatrix::<C64>::zeros(rows * jn, d + r);
    let mut rhs = DVector::<C64>::zeros(rows * jn);
    let mut power = DMatrix::<C64>::identity(d, d);
    let mut partial = DMatrix::<C64>::zeros(d, d);
    let lambda_b_cache = |p: &DMatrix<C64>| naive_matmul(p, basis);
    for n in 0..rows {
        let lb = lambda_b_cache(&partial);
        for j in 0..jn {
            let row = n * jn + j;
            // ⟨P x, g⟩ = Σ_l (Σ_k conj(g_k) P_kl) x_l
            for l in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += g[j][k].conj() * power[(k, l)];
                }
                m[(row, l)] = acc;
            }
            for l in 0..r {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += g[j][k].conj() * lb[(k, l)];
                }
                m[(row, d + l)] = acc;
            }
            rhs[row] = data[n][j];
        }
        for i in 0..d {
            for k in 0..d {
                partial[(i, k)] += power[(i, k)];
            }
        }
        power = naive_matmul(a, &power);
    }
    let svd = m.svd(true, true);
    let cutoff = svd.singular_values.max() * 1e-12;
    let sol = svd.solve(&rhs, cutoff).unwrap();
    basis * sol.rows(d, r)
}

pub fn columns(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
