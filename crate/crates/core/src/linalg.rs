//! Dense and sparse complex linear algebra used throughout the crate.
//!
//! Everything here works on `nalgebra` matrices of [`C64`]. Site matrices in
//! the reduction chains are extremely sparse (identities, selectors, single
//! matrix units), so the environment transfers in [`LevelMatrix`] switch to a
//! coordinate-list product when a matrix has few nonzeros.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `max |m_ij - conj(m_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in i..m.ncols() {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Largest entry modulus of `m - 1`.
pub fn identity_deviation(m: &CMatrix) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((m[(i, j)] - target).norm());
        }
    }
    dev
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn is_zero(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re == 0.0 && z.im == 0.0)
}

/// Multiplies `v` by a unit phase so that the first component of largest
/// modulus becomes real and positive.
pub fn fix_phase(v: &mut [C64]) {
    let mut best = 0usize;
    let mut best_norm = -1.0;
    for (i, z) in v.iter().enumerate() {
        // strict comparison keeps the lowest index among exact ties; near ties
        // are resolved relative to the running maximum
        if z.norm() > best_norm * (1.0 + 1e-12) {
            best = i;
            best_norm = z.norm();
        }
    }
    if best_norm > 0.0 {
        let phase = v[best].conj() / best_norm;
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Lowest eigenpair of a dense Hermitian matrix. The eigenvector is
/// normalized and phase-fixed.
pub fn lowest_eigenpair_dense(h: &CMatrix) -> Result<(f64, Vec<C64>)> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::Shape(format!("{}x{} eigenproblem", h.nrows(), h.ncols())));
    }
    let herm = (h + h.adjoint()) * c(0.5);
    let eig = SymmetricEigen::try_new(herm, 1e-15, 0)
        .ok_or_else(|| Error::Eigensolver("dense Hermitian solve did not converge".into()))?;
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty spectrum");
    let mut v: Vec<C64> = eig.eigenvectors.column(idx).iter().copied().collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    fix_phase(&mut v);
    Ok((value, v))
}

/// Smallest eigenvalue of a dense Hermitian matrix, using a real solve when
/// every entry is real.
pub fn lowest_eigenvalue_dense(h: &CMatrix) -> Result<f64> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::Shape(format!("{}x{} eigenproblem", h.nrows(), h.ncols())));
    }
    if h.iter().all(|z| z.im == 0.0) {
        let real = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| 0.5 * (h[(i, j)].re + h[(j, i)].re));
        let values = real.symmetric_eigenvalues();
        return Ok(values.iter().copied().fold(f64::INFINITY, f64::min));
    }
    let herm = (h + h.adjoint()) * c(0.5);
    let values = herm.symmetric_eigenvalues();
    Ok(values.iter().copied().fold(f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual norm `|H v - theta v|` at which the Ritz pair is accepted.
    pub tol: f64,
    pub max_krylov: usize,
    pub max_restarts: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_krylov: 48, max_restarts: 200 }
    }
}

/// Lowest eigenpair of a Hermitian operator given as a matrix-vector product,
/// by restarted Lanczos with full reorthogonalization.
///
/// The Krylov space always contains `start`, so the returned eigenvalue never
/// exceeds the Rayleigh quotient of `start`.
pub fn lowest_eigenpair_lanczos<F>(apply: F, start: &[C64], opts: LanczosOptions) -> Result<(f64, Vec<C64>)>
where
    F: Fn(&[C64]) -> Vec<C64>,
{
    let dim = start.len();
    let n0 = norm(start);
    if dim == 0 || !(n0 > 0.0) || !n0.is_finite() {
        return Err(Error::Eigensolver("Lanczos start vector has zero norm".into()));
    }
    let mut x: Vec<C64> = start.iter().map(|z| z / n0).collect();
    let mut theta = f64::INFINITY;

    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<C64>> = vec![x.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let krylov = opts.max_krylov.min(dim).max(1);
        let mut exhausted = false;
        let mut ritz: (f64, DVector<f64>) = (0.0, DVector::zeros(1));
        let mut residual = f64::INFINITY;

        for k in 0..krylov {
            let mut w = apply(&basis[k]);
            let alpha = dot(&basis[k], &w).re;
            alphas.push(alpha);
            for _ in 0..2 {
                for b in &basis {
                    let proj = dot(b, &w);
                    w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= proj * bi);
                }
            }
            let beta = norm(&w);
            ritz = lowest_tridiagonal(&alphas, &betas);
            let last = ritz.1[ritz.1.len() - 1];
            residual = (beta * last).abs();
            let scale = alphas.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            if beta <= 1e-13 * scale {
                exhausted = true;
                residual = 0.0;
                break;
            }
            if residual < opts.tol || k + 1 == krylov {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|z| z / beta).collect());
        }

        let coeffs = &ritz.1;
        let mut y = vec![ZERO; dim];
        for (i, b) in basis.iter().enumerate().take(coeffs.len()) {
            let ci = coeffs[i];
            y.iter_mut().zip(b).for_each(|(yi, bi)| *yi += bi * ci);
        }
        let ny = norm(&y);
        y.iter_mut().for_each(|z| *z /= ny);
        theta = ritz.0;
        x = y;
        if exhausted || residual < opts.tol {
            fix_phase(&mut x);
            return Ok((theta, x));
        }
    }
    Err(Error::Eigensolver(format!(
        "Lanczos did not reach residual {:.1e} (last Ritz value {theta})",
        opts.tol
    )))
}

fn lowest_tridiagonal(alphas: &[f64], betas: &[f64]) -> (f64, DVector<f64>) {
    let k = alphas.len();
    let mut t = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (idx, value) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty");
    (value, eig.eigenvectors.column(idx).into_owned())
}

/// Hermitian positive semidefinite square root, with eigenvalues in
/// `[-neg_tol, 0)` clipped to zero.
pub fn psd_sqrt(m: &CMatrix, neg_tol: f64) -> Result<CMatrix> {
    let herm = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::try_new(herm, 1e-15, 0)
        .ok_or_else(|| Error::Eigensolver("PSD square root did not converge".into()))?;
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -neg_tol {
        return Err(Error::InfeasibleCompletion { min_eigenvalue: min });
    }
    let roots = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&v| c(v.max(0.0).sqrt())),
    );
    let u = &eig.eigenvectors;
    Ok(u * CMatrix::from_diagonal(&roots) * u.adjoint())
}

/// Thin factorization `m = q * r` where `q` has orthonormal columns and `r`
/// has a real nonnegative diagonal.
///
/// With `shrink`, columns beyond the numerical rank (relative cutoff `1e-14`)
/// are dropped via an SVD.
pub fn qr_positive(m: &CMatrix, shrink: bool) -> (CMatrix, CMatrix) {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.r();
    for i in 0..r.nrows() {
        let d = r[(i, i)];
        let mag = d.norm();
        if mag > 0.0 {
            let phase = d / mag;
            q.column_mut(i).iter_mut().for_each(|z| *z *= phase);
            r.row_mut(i).iter_mut().for_each(|z| *z *= phase.conj());
        }
    }
    if shrink {
        let sv = r.clone().singular_values();
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let rank = sv.iter().filter(|&&s| s > 1e-14 * smax && s > 0.0).count();
        if rank < r.nrows() {
            return svd_factor(m, rank.max(1));
        }
    }
    (q, r)
}

fn svd_factor(m: &CMatrix, rank: usize) -> (CMatrix, CMatrix) {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let keep = &order[..rank];
    let mut q = CMatrix::zeros(m.nrows(), rank);
    let mut r = CMatrix::zeros(rank, m.ncols());
    for (k, &i) in keep.iter().enumerate() {
        q.set_column(k, &u.column(i));
        let s = svd.singular_values[i];
        r.set_row(k, &(vt.row(i) * c(s)));
    }
    (q, r)
}

/// Closest matrix with orthonormal columns (polar factor `U V^†`).
pub fn polar_isometry(m: &CMatrix) -> CMatrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// A site matrix together with a coordinate list of its nonzeros when it is
/// sparse enough for the list product to pay off.
#[derive(Debug, Clone)]
pub struct LevelMatrix {
    pub dense: CMatrix,
    sparse: Option<Vec<(usize, usize, C64)>>,
    zero: bool,
}

impl LevelMatrix {
    pub fn new(dense: CMatrix) -> Self {
        let entries: Vec<(usize, usize, C64)> = dense
            .column_iter()
            .enumerate()
            .flat_map(|(j, col)| {
                col.iter()
                    .enumerate()
                    .filter(|(_, z)| z.re != 0.0 || z.im != 0.0)
                    .map(move |(i, z)| (i, j, *z))
                    .collect::<Vec<_>>()
            })
            .collect();
        let zero = entries.is_empty();
        let total = dense.nrows() * dense.ncols();
        let sparse = if entries.len() * 6 <= total { Some(entries) } else { None };
        Self { dense, sparse, zero }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// `self^† * env * other`.
    pub fn sandwich_left(&self, env: &CMatrix, other: &LevelMatrix) -> CMatrix {
        let env_other = match &other.sparse {
            Some(entries) => {
                let mut out = CMatrix::zeros(env.nrows(), other.dense.ncols());
                for &(r, col, v) in entries {
                    let src = env.column(r);
                    let mut dst = out.column_mut(col);
                    dst.iter_mut().zip(src.iter()).for_each(|(d, s)| *d += s * v);
                }
                out
            }
            None => env * &other.dense,
        };
        match &self.sparse {
            Some(entries) => {
                let mut out = CMatrix::zeros(self.dense.ncols(), env_other.ncols());
                for &(r, col, v) in entries {
                    let vc = v.conj();
                    for k in 0..env_other.ncols() {
                        out[(col, k)] += vc * env_other[(r, k)];
                    }
                }
                out
            }
            None => self.dense.adjoint() * env_other,
        }
    }

    /// `self * env * other^†`.
    pub fn sandwich_right(&self, env: &CMatrix, other: &LevelMatrix) -> CMatrix {
        let self_env = match &self.sparse {
            Some(entries) => {
                let mut out = CMatrix::zeros(self.dense.nrows(), env.ncols());
                for &(r, col, v) in entries {
                    for k in 0..env.ncols() {
                        out[(r, k)] += v * env[(col, k)];
                    }
                }
                out
            }
            None => &self.dense * env,
        };
        match &other.sparse {
            Some(entries) => {
                let mut out = CMatrix::zeros(self_env.nrows(), other.dense.nrows());
                for &(r, col, v) in entries {
                    let vc = v.conj();
                    let src = self_env.column(col);
                    let mut dst = out.column_mut(r);
                    dst.iter_mut().zip(src.iter()).for_each(|(d, s)| *d += s * vc);
                }
                out
            }
            None => self_env * other.dense.adjoint(),
        }
    }

    /// `lhs * self` for a dense left factor.
    pub fn left_mul(&self, lhs: &CMatrix) -> CMatrix {
        match &self.sparse {
            Some(entries) => {
                let mut out = CMatrix::zeros(lhs.nrows(), self.dense.ncols());
                for &(r, col, v) in entries {
                    let src = lhs.column(r);
                    let mut dst = out.column_mut(col);
                    dst.iter_mut().zip(src.iter()).for_each(|(d, s)| *d += s * v);
                }
                out
            }
            None => lhs * &self.dense,
        }
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&a + a.adjoint()) * c(0.5)
    }

    #[test]
    fn lanczos_matches_dense() {
        let h = random_hermitian(60, 3);
        let (dense, _) = lowest_eigenpair_dense(&h).unwrap();
        let start: Vec<C64> = (0..60).map(|i| C64::new(1.0 + i as f64 * 0.01, 0.0)).collect();
        let (lz, v) = lowest_eigenpair_lanczos(
            |x| (&h * DVector::from_column_slice(x)).iter().copied().collect(),
            &start,
            LanczosOptions { tol: 1e-11, max_krylov: 20, max_restarts: 500 },
        )
        .unwrap();
        assert!((dense - lz).abs() < 1e-10, "{dense} vs {lz}");
        assert!((norm(&v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let h = random_hermitian(8, 5);
        let psd = &h * h.adjoint();
        let root = psd_sqrt(&psd, 1e-12).unwrap();
        assert!(max_abs(&(&root * &root - &psd)) < 1e-10);
        assert!(hermitian_deviation(&root) < 1e-12);
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        let m = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-0.1)]));
        assert!(matches!(psd_sqrt(&m, 1e-9), Err(Error::InfeasibleCompletion { .. })));
    }

    #[test]
    fn qr_positive_diagonal_and_shrink() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = CMatrix::from_fn(6, 3, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let (q, r) = qr_positive(&a, true);
        assert!(identity_deviation(&(q.adjoint() * &q)) < 1e-13);
        assert!(max_abs(&(&q * &r - &a)) < 1e-13);
        for i in 0..3 {
            assert!(r[(i, i)].im == 0.0 && r[(i, i)].re >= 0.0);
        }
        // rank-one input collapses to one column
        let col = a.column(0).into_owned();
        let rank_one = CMatrix::from_fn(6, 3, |i, j| col[i] * c(j as f64 + 1.0));
        let (q1, r1) = qr_positive(&rank_one, true);
        assert_eq!(q1.ncols(), 1);
        assert!(max_abs(&(&q1 * &r1 - &rank_one)) < 1e-12);
    }

    #[test]
    fn sparse_and_dense_sandwiches_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut a = CMatrix::zeros(10, 7);
        a[(2, 3)] = C64::new(0.5, -0.25);
        a[(9, 0)] = c(1.0);
        let b = CMatrix::from_fn(10, 7, |_, _| C64::new(rng.random_range(-1.0..1.0), 0.3));
        let env = CMatrix::from_fn(10, 10, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let la = LevelMatrix::new(a.clone());
        let lb = LevelMatrix::new(b.clone());
        let left = la.sandwich_left(&env, &lb);
        assert!(max_abs(&(left - a.adjoint() * &env * &b)) < 1e-13);
        let renv = CMatrix::from_fn(7, 7, |i, j| c((i * 7 + j) as f64 * 0.1));
        let right = la.sandwich_right(&renv, &lb);
        assert!(max_abs(&(right - &a * &renv * b.adjoint())) < 1e-12);
        let lm = la.left_mul(&env);
        assert!(max_abs(&(lm - &env * &a)) < 1e-13);
    }

    #[test]
    fn phase_fix_picks_first_largest() {
        let mut v = vec![C64::new(0.0, 0.5), C64::new(0.0, -0.5), c(0.1)];
        fix_phase(&mut v);
        assert!((v[0] - c(0.5)).norm() < 1e-15);
        assert!((v[1] - c(-0.5)).norm() < 1e-15);
    }
}
