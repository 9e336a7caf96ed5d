use super::MatrixProductState;
use crate::error::{Error, Result};
use crate::hamiltonian::{ChainHamiltonian, LocalTerm, TermMatrix};
use crate::linalg::{is_zero, CMatrix, LevelMatrix, C64, ONE, ZERO};
use crate::mpo::Mpo;

impl MatrixProductState {
    /// `sqrt(<psi|psi>)` by transfer contraction.
    pub fn norm(&self) -> f64 {
        let mut env = CMatrix::from_element(1, 1, ONE);
        for site in self.sites() {
            let levels = site.levels();
            env = levels
                .iter()
                .filter(|l| !l.is_zero())
                .fold(CMatrix::zeros(site.right_dim(), site.right_dim()), |acc, l| acc + l.sandwich_left(&env, l));
        }
        env[(0, 0)].re.max(0.0).sqrt()
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &MatrixProductState) -> Result<C64> {
        if self.len() != other.len() || self.d() != other.d() {
            return Err(Error::Shape(format!(
                "overlap of n={}, d={} with n={}, d={}",
                self.len(),
                self.d(),
                other.len(),
                other.d()
            )));
        }
        let mut env = CMatrix::from_element(1, 1, ONE);
        for (a, b) in self.sites().iter().zip(other.sites()) {
            if a.left_dim() != env.nrows() || b.left_dim() != env.ncols() {
                return Err(Error::Shape("inconsistent bond dimensions".into()));
            }
            let la = a.levels();
            let lb = b.levels();
            let mut next = CMatrix::zeros(a.right_dim(), b.right_dim());
            for (x, y) in la.iter().zip(&lb) {
                if !x.is_zero() && !y.is_zero() {
                    next += x.sandwich_left(&env, y);
                }
            }
            env = next;
        }
        Ok(env[(0, 0)])
    }

    /// Dense amplitude vector of length `d^n`, big-endian in the site index.
    pub fn to_dense(&self, cap: usize) -> Result<Vec<C64>> {
        let d = self.d();
        let total = (d as f64).powi(self.len() as i32);
        if total > cap as f64 {
            return Err(Error::CapExceeded { requested: total.min(usize::MAX as f64) as usize, cap });
        }
        // rows: configuration prefixes, columns: current right bond
        let mut acc = CMatrix::from_element(1, 1, ONE);
        for site in self.sites() {
            let rows = acc.nrows();
            let mut next = CMatrix::zeros(rows * d, site.right_dim());
            for s in 0..d {
                let part = &acc * site.matrix(s);
                for p in 0..rows {
                    next.row_mut(p * d + s).copy_from(&part.row(p));
                }
            }
            acc = next;
        }
        Ok(acc.column(0).iter().copied().collect())
    }

    /// `<psi| h^(start) |psi>` for one window, with `start` 0-based.
    pub fn window_expectation(&self, term: &LocalTerm, start: usize) -> Result<f64> {
        let cache = EnvironmentCache::new(self);
        cache.window_expectation(term, start)
    }

    /// `<psi|H|psi>` in a single left-to-right environment pass.
    ///
    /// The state is not normalized first; for a normalized state this is the
    /// energy.
    pub fn energy(&self, hamiltonian: &ChainHamiltonian) -> Result<f64> {
        if hamiltonian.n() != self.len() || hamiltonian.d() != self.d() {
            return Err(Error::Shape(format!(
                "Hamiltonian on n={}, d={} applied to state with n={}, d={}",
                hamiltonian.n(),
                hamiltonian.d(),
                self.len(),
                self.d()
            )));
        }
        Ok(Mpo::from_chain(hamiltonian).expectation(self))
    }

    /// Sum of per-window expectations plus edge fields, computed window by
    /// window from cached norm environments.
    pub fn energy_by_windows(&self, hamiltonian: &ChainHamiltonian) -> Result<f64> {
        let cache = EnvironmentCache::new(self);
        let mut total = 0.0;
        for start in 0..hamiltonian.window_count() {
            total += cache.window_expectation(hamiltonian.term(), start)?;
        }
        if let Some(edges) = hamiltonian.edges() {
            total += cache.site_expectation(&edges.first, 0)?;
            total += cache.site_expectation(&edges.last, self.len() - 1)?;
        }
        Ok(total)
    }
}

/// Left and right norm environments of a state, for evaluating many local
/// expectation values.
#[derive(Debug, Clone)]
pub struct EnvironmentCache {
    levels: Vec<Vec<LevelMatrix>>,
    left: Vec<CMatrix>,
    right: Vec<CMatrix>,
}

impl EnvironmentCache {
    pub fn new(psi: &MatrixProductState) -> Self {
        let n = psi.len();
        let levels: Vec<Vec<LevelMatrix>> = psi.sites().iter().map(|s| s.levels()).collect();
        let mut left = Vec::with_capacity(n + 1);
        left.push(CMatrix::from_element(1, 1, ONE));
        for (j, site) in psi.sites().iter().enumerate() {
            let env = &left[j];
            let next = levels[j]
                .iter()
                .filter(|l| !l.is_zero())
                .fold(CMatrix::zeros(site.right_dim(), site.right_dim()), |acc, l| acc + l.sandwich_left(env, l));
            left.push(next);
        }
        let mut right = vec![CMatrix::zeros(0, 0); n + 1];
        right[n] = CMatrix::from_element(1, 1, ONE);
        for j in (0..n).rev() {
            let site = psi.site(j);
            let next = levels[j]
                .iter()
                .filter(|l| !l.is_zero())
                .fold(CMatrix::zeros(site.left_dim(), site.left_dim()), |acc, l| {
                    acc + l.sandwich_right(&right[j + 1], l)
                });
            right[j] = next;
        }
        Self { levels, left, right }
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn norm_squared(&self) -> f64 {
        self.left[self.len()][(0, 0)].re
    }

    /// Left norm environment on bond `j` (to the left of site `j`).
    pub fn left(&self, j: usize) -> &CMatrix {
        &self.left[j]
    }

    /// Right norm environment on bond `j` (to the left of site `j`).
    pub fn right(&self, j: usize) -> &CMatrix {
        &self.right[j]
    }

    pub fn window_expectation(&self, term: &LocalTerm, start: usize) -> Result<f64> {
        let r = term.r();
        if start + r > self.len() {
            return Err(Error::Shape(format!(
                "window [{start}, {}) outside a chain of {} sites",
                start + r,
                self.len()
            )));
        }
        if term.d() != self.levels[0].len() {
            return Err(Error::Shape(format!("term has d = {}, state d = {}", term.d(), self.levels[0].len())));
        }
        let left = &self.left[start];
        let right = &self.right[start + r];
        let d = term.d();
        match term.matrix() {
            TermMatrix::Diagonal(entries) => {
                let mut total = 0.0;
                for &(index, value) in entries {
                    let digits = digits_of(index, d, r);
                    let mut x = left.clone();
                    let mut dead = false;
                    for (k, &s) in digits.iter().enumerate() {
                        let lv = &self.levels[start + k][s];
                        if lv.is_zero() {
                            dead = true;
                            break;
                        }
                        x = lv.sandwich_left(&x, lv);
                        if is_zero(&x) {
                            dead = true;
                            break;
                        }
                    }
                    if !dead {
                        total += value * trace_product(&x, right).re;
                    }
                }
                Ok(total)
            }
            TermMatrix::Dense(h) => {
                let products = self.window_products(start, r);
                let configs = products.len();
                let mut total = ZERO;
                for sp in 0..configs {
                    let col_nonzero = (0..configs).any(|s| h[(s, sp)] != ZERO);
                    if !col_nonzero {
                        continue;
                    }
                    let m = left * &products[sp] * right;
                    for s in 0..configs {
                        let hv = h[(s, sp)];
                        if hv == ZERO {
                            continue;
                        }
                        let inner: C64 = products[s].iter().zip(m.iter()).map(|(a, b)| a.conj() * b).sum();
                        total += hv * inner;
                    }
                }
                Ok(total.re)
            }
        }
    }

    /// `<psi| op_j |psi>` for a single-site operator.
    pub fn site_expectation(&self, op: &CMatrix, j: usize) -> Result<f64> {
        let term = LocalTerm::dense(1, op.nrows(), op.clone())?;
        self.window_expectation(&term, j)
    }

    /// `A_{s_0} ... A_{s_{r-1}}` for every window configuration, big-endian.
    fn window_products(&self, start: usize, r: usize) -> Vec<CMatrix> {
        let dl = self.left[start].nrows();
        let mut products = vec![CMatrix::identity(dl, dl)];
        for k in 0..r {
            let levels = &self.levels[start + k];
            let mut next = Vec::with_capacity(products.len() * levels.len());
            for p in &products {
                for l in levels {
                    next.push(l.left_mul(p));
                }
            }
            products = next;
        }
        products
    }
}

/// Base-`d` digits of `index`, most significant first.
pub(crate) fn digits_of(mut index: usize, d: usize, r: usize) -> Vec<usize> {
    let mut digits = vec![0; r];
    for k in (0..r).rev() {
        digits[k] = index % d;
        index /= d;
    }
    digits
}

/// `tr(a b)` without forming the product.
pub(crate) fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let mut t = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            t += a[(i, k)] * b[(k, i)];
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{ChainHamiltonian, LocalTerm};
    use crate::linalg::{c, dot};
    use crate::mps::random_mps;

    #[test]
    fn dense_product_state_index() {
        // |1,0> with d = 2 sits at index 2 (big-endian)
        let psi = MatrixProductState::product_state(&[1, 0], 2).unwrap();
        let v = psi.to_dense(16).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(v[2], ONE);
        assert_eq!(v.iter().filter(|z| **z != ZERO).count(), 1);
    }

    #[test]
    fn dense_cap_enforced() {
        let psi = MatrixProductState::product_state(&[0; 5], 2).unwrap();
        assert!(matches!(psi.to_dense(16), Err(Error::CapExceeded { requested: 32, cap: 16 })));
    }

    #[test]
    fn norm_matches_dense_and_scaling() {
        let psi = random_mps(7, 2, &[1, 2, 4, 5, 4, 3, 2, 1], 17).unwrap();
        let v = psi.to_dense(1 << 12).unwrap();
        let dense = dot(&v, &v).re.sqrt();
        assert!((psi.norm() - dense).abs() < 1e-10 * dense);
        let canon = psi.left_canonicalize().unwrap();
        assert!((canon.norm() - 1.0).abs() < 1e-12);
        assert!((canon.scale_site(3, c(2.0)).norm() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_of_orthogonal_products_is_zero() {
        let a = MatrixProductState::product_state(&[0, 1, 1], 2).unwrap();
        let b = MatrixProductState::product_state(&[0, 0, 1], 2).unwrap();
        assert_eq!(a.overlap(&b).unwrap(), ZERO);
        assert_eq!(a.overlap(&a).unwrap(), ONE);
    }

    #[test]
    fn overlap_matches_dense() {
        let a = random_mps(6, 3, &[1, 3, 4, 4, 3, 3, 1], 1).unwrap();
        let b = random_mps(6, 3, &[1, 2, 3, 4, 3, 2, 1], 2).unwrap();
        let va = a.to_dense(1 << 12).unwrap();
        let vb = b.to_dense(1 << 12).unwrap();
        let want = dot(&va, &vb);
        let got = a.overlap(&b).unwrap();
        assert!((want - got).norm() < 1e-10 * want.norm().max(1.0));
    }

    #[test]
    fn identity_window_on_canonical_state() {
        let psi = random_mps(5, 2, &[1, 2, 4, 2, 2, 1], 4).unwrap().left_canonicalize().unwrap();
        let id = LocalTerm::identity(2, 2).unwrap();
        for start in 0..4 {
            assert!((psi.window_expectation(&id, start).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn projector_on_all_ones_configuration() {
        let psi = MatrixProductState::product_state(&[0; 10], 4).unwrap();
        let h = ChainHamiltonian::new(LocalTerm::projector(), 10).unwrap();
        for start in 0..5 {
            assert_eq!(psi.window_expectation(h.term(), start).unwrap(), 1.0);
        }
        assert!((psi.energy(&h).unwrap() - 5.0).abs() < 1e-12);
        assert!((psi.energy_by_windows(&h).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn window_out_of_range() {
        let psi = MatrixProductState::product_state(&[0; 3], 2).unwrap();
        let id = LocalTerm::identity(2, 2).unwrap();
        assert!(psi.window_expectation(&id, 2).is_err());
    }
}
