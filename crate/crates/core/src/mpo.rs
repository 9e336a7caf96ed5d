//! Matrix product operator form of a chain Hamiltonian.
//!
//! Bond index 0 means "no window started yet", index 1 "a window has been
//! completed", and the remaining indices track a window in progress. The left
//! boundary selects 0 and the right boundary selects 1, so only windows that
//! fit entirely inside the chain contribute.

use crate::hamiltonian::{sparse_op, ChainHamiltonian, SparseOp};
use crate::linalg::{is_zero, CMatrix, LevelMatrix, C64, ONE, ZERO};
use crate::mps::MatrixProductState;

#[derive(Debug, Clone)]
pub struct MpoEntry {
    pub left: usize,
    pub right: usize,
    /// Nonzero elements `(s, s', value)` of the local operator `<s|W|s'>`.
    pub op: SparseOp,
}

#[derive(Debug, Clone)]
pub struct MpoSite {
    pub left_dim: usize,
    pub right_dim: usize,
    pub entries: Vec<MpoEntry>,
}

#[derive(Debug, Clone)]
pub struct Mpo {
    d: usize,
    sites: Vec<MpoSite>,
}

impl Mpo {
    pub fn from_chain(h: &ChainHamiltonian) -> Self {
        let n = h.n();
        let d = h.d();
        let chain = h.term().operator_chain();
        let r = chain.len();
        debug_assert!(chain.windows(2).all(|w| w[0].right_dim == w[1].left_dim));
        // offsets of the in-progress blocks
        let mut offsets = vec![0usize; r];
        let mut bond = 2;
        for k in 1..r {
            offsets[k] = bond;
            bond += chain[k].left_dim;
        }
        let id: SparseOp = (0..d).map(|s| (s, s, ONE)).collect();
        let mut bulk = vec![
            MpoEntry { left: 0, right: 0, op: id.clone() },
            MpoEntry { left: 1, right: 1, op: id },
        ];
        for (k, factor) in chain.iter().enumerate() {
            for (a, b, op) in &factor.entries {
                let left = if k == 0 { 0 } else { offsets[k] + a };
                let right = if k == r - 1 { 1 } else { offsets[k + 1] + b };
                bulk.push(MpoEntry { left, right, op: op.clone() });
            }
        }
        let mut sites: Vec<MpoSite> = (0..n)
            .map(|_| MpoSite { left_dim: bond, right_dim: bond, entries: bulk.clone() })
            .collect();
        if let Some(edges) = h.edges() {
            sites[0].entries.push(MpoEntry { left: 0, right: 1, op: sparse_op(&edges.first) });
            sites[n - 1].entries.push(MpoEntry { left: 0, right: 1, op: sparse_op(&edges.last) });
        }
        // boundary vectors
        let first = &mut sites[0];
        first.entries.retain(|e| e.left == 0);
        first.left_dim = 1;
        let last = &mut sites[n - 1];
        last.entries.retain(|e| e.right == 1);
        last.entries.iter_mut().for_each(|e| e.right = 0);
        last.right_dim = 1;
        Self { d, sites }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn site(&self, j: usize) -> &MpoSite {
        &self.sites[j]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims: Vec<usize> = self.sites.iter().map(|s| s.left_dim).collect();
        dims.push(self.sites.last().map_or(1, |s| s.right_dim));
        dims
    }

    /// `<psi|H|psi>` by one left-to-right pass.
    pub fn expectation(&self, psi: &MatrixProductState) -> f64 {
        let mut env = vec![CMatrix::from_element(1, 1, ONE)];
        for (j, site) in self.sites.iter().enumerate() {
            let levels = psi.site(j).levels();
            env = left_step(&env, site, &levels, psi.site(j).right_dim());
        }
        env[0][(0, 0)].re
    }

    /// Dense operator, for small chains only.
    pub fn to_dense(&self) -> CMatrix {
        let d = self.d;
        let mut acc = vec![CMatrix::from_element(1, 1, ONE)];
        for site in &self.sites {
            let dim = acc[0].nrows() * d;
            let mut next = vec![CMatrix::zeros(dim, dim); site.right_dim];
            for e in &site.entries {
                let mut local = CMatrix::zeros(d, d);
                for &(s, sp, v) in &e.op {
                    local[(s, sp)] += v;
                }
                next[e.right] += acc[e.left].kronecker(&local);
            }
            acc = next;
        }
        acc.swap_remove(0)
    }
}

/// `L'[b] = sum W[a,b]_{s s'} A_s^† L[a] A_{s'}`, with `L` indexed (bra, ket).
pub(crate) fn left_step(env: &[CMatrix], site: &MpoSite, levels: &[LevelMatrix], dr: usize) -> Vec<CMatrix> {
    let mut next = vec![CMatrix::zeros(dr, dr); site.right_dim];
    let live: Vec<bool> = env.iter().map(|m| !is_zero(m)).collect();
    for e in &site.entries {
        if !live[e.left] {
            continue;
        }
        for &(s, sp, v) in &e.op {
            if levels[s].is_zero() || levels[sp].is_zero() {
                continue;
            }
            let term = levels[s].sandwich_left(&env[e.left], &levels[sp]);
            next[e.right] += term * v;
        }
    }
    next
}

/// `R'[a] = sum W[a,b]_{s s'} A_{s'} R[b] A_s^†`, with `R` indexed (ket, bra).
pub(crate) fn right_step(env: &[CMatrix], site: &MpoSite, levels: &[LevelMatrix], dl: usize) -> Vec<CMatrix> {
    let mut next = vec![CMatrix::zeros(dl, dl); site.left_dim];
    let live: Vec<bool> = env.iter().map(|m| !is_zero(m)).collect();
    for e in &site.entries {
        if !live[e.right] {
            continue;
        }
        for &(s, sp, v) in &e.op {
            if levels[s].is_zero() || levels[sp].is_zero() {
                continue;
            }
            let term = levels[sp].sandwich_right(&env[e.right], &levels[s]);
            next[e.left] += term * v;
        }
    }
    next
}

/// `(H X)_s = sum W[a,b]_{s s'} L[a] X_{s'} R[b]` for one site.
pub(crate) fn apply_site(left: &[CMatrix], right: &[CMatrix], site: &MpoSite, x: &[CMatrix]) -> Vec<CMatrix> {
    let d = x.len();
    let (dl, dr) = (x[0].nrows(), x[0].ncols());
    let live_l: Vec<bool> = left.iter().map(|m| !is_zero(m)).collect();
    let live_r: Vec<bool> = right.iter().map(|m| !is_zero(m)).collect();
    // stage one: L[a] X_{s'}, cached per (a, s')
    let mut lx: Vec<Option<CMatrix>> = vec![None; left.len() * d];
    // stage two: Y[b][s] = sum v L[a] X_{s'}
    let mut y: Vec<Option<CMatrix>> = vec![None; site.right_dim * d];
    for e in &site.entries {
        if !live_l[e.left] || !live_r[e.right] {
            continue;
        }
        for &(s, sp, v) in &e.op {
            let key = e.left * d + sp;
            if lx[key].is_none() {
                lx[key] = Some(&left[e.left] * &x[sp]);
            }
            let term = lx[key].as_ref().expect("cached") * v;
            let slot = &mut y[e.right * d + s];
            match slot {
                Some(acc) => *acc += term,
                None => *slot = Some(term),
            }
        }
    }
    let mut out = vec![CMatrix::zeros(dl, dr); d];
    for (idx, acc) in y.into_iter().enumerate() {
        if let Some(acc) = acc {
            let (b, s) = (idx / d, idx % d);
            out[s] += acc * &right[b];
        }
    }
    out
}

/// Contracts `sum_w tr(L[w] R[w])`.
pub(crate) fn close(left: &[CMatrix], right: &[CMatrix]) -> C64 {
    left.iter()
        .zip(right)
        .map(|(l, r)| crate::mps::trace_product(l, r))
        .fold(ZERO, |a, b| a + b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::LocalTerm;
    use crate::linalg::{c, max_abs};
    use crate::mps::random_mps;

    #[test]
    fn tfi_mpo_matches_dense() {
        let h = ChainHamiltonian::tfi(5, 0.9, true).unwrap();
        let mpo = Mpo::from_chain(&h);
        assert!(max_abs(&(mpo.to_dense() - h.dense_hamiltonian(1 << 10).unwrap())) < 1e-12);
    }

    #[test]
    fn diagonal_mpo_matches_dense() {
        let term = LocalTerm::diagonal(3, 2, &[(0, 1.0), (5, -2.0), (7, 0.5)]).unwrap();
        let h = ChainHamiltonian::new(term, 6).unwrap();
        let mpo = Mpo::from_chain(&h);
        assert!(max_abs(&(mpo.to_dense() - h.dense_hamiltonian(1 << 10).unwrap())) < 1e-12);
    }

    #[test]
    fn projector_bond_dimension() {
        let h = ChainHamiltonian::new(LocalTerm::projector(), 8).unwrap();
        let dims = Mpo::from_chain(&h).bond_dims();
        assert_eq!(dims[0], 1);
        assert_eq!(dims[4], 22);
        assert_eq!(dims[8], 1);
    }

    #[test]
    fn single_window_chain() {
        let term = LocalTerm::tfi(0.4);
        let h = ChainHamiltonian::new(term.clone(), 2).unwrap();
        assert!(max_abs(&(Mpo::from_chain(&h).to_dense() - term.to_dense_matrix())) < 1e-13);
    }

    #[test]
    fn expectation_matches_window_sum() {
        let h = ChainHamiltonian::tfi(7, 1.2, true).unwrap();
        let psi = random_mps(7, 2, &[1, 2, 4, 3, 4, 4, 2, 1], 5).unwrap();
        let a = psi.energy(&h).unwrap();
        let b = psi.energy_by_windows(&h).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn environments_close_at_every_bond() {
        let h = ChainHamiltonian::tfi(5, 0.6, false).unwrap();
        let mpo = Mpo::from_chain(&h);
        let psi = random_mps(5, 2, &[1, 2, 3, 3, 2, 1], 11).unwrap();
        let levels: Vec<Vec<LevelMatrix>> = psi.sites().iter().map(|s| s.levels()).collect();
        let mut lefts = vec![vec![CMatrix::from_element(1, 1, ONE)]];
        for j in 0..5 {
            let next = left_step(&lefts[j], mpo.site(j), &levels[j], psi.site(j).right_dim());
            lefts.push(next);
        }
        let mut rights = vec![Vec::new(); 6];
        rights[5] = vec![CMatrix::from_element(1, 1, ONE)];
        for j in (0..5).rev() {
            rights[j] = right_step(&rights[j + 1], mpo.site(j), &levels[j], psi.site(j).left_dim());
        }
        let e = mpo.expectation(&psi);
        for j in 0..=5 {
            assert!((close(&lefts[j], &rights[j]) - c(e)).norm() < 1e-10 * e.abs().max(1.0));
        }
        // applying at a site and contracting with the same tensor gives the energy
        for j in 0..5 {
            let x = psi.site(j).matrices();
            let hx = apply_site(&lefts[j], &rights[j + 1], mpo.site(j), x);
            let val: C64 = x.iter().zip(&hx).map(|(a, b)| a.iter().zip(b.iter()).map(|(p, q)| p.conj() * q).sum::<C64>()).sum();
            assert!((val - c(e)).norm() < 1e-10 * e.abs().max(1.0));
        }
    }
}
