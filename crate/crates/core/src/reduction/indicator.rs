//! Indicator matrices: `P * prod_j M^(j)_{w_j}` is zero unless the binary
//! word `w` has exactly one 1, at position `j = k N + l`, in which case it is
//! a single matrix unit at row `k + 1`, column `l`, weighted by `V_{k,l}`.
//!
//! State space of dimension `D = 2N^2 + N` (0-based):
//! * `0..N`: "done" states, one per column `l`;
//! * `N..N^2+N`: "marked" states `s = (k + 1) N + l`;
//! * `N^2+N..D`: unused states that only absorb gauge completion.
//!
//! Reading a product row by row, a marked row `s_j` survives `M_1` at every
//! site except its own, where `M_2` moves it to the done state `l_j`. Done
//! states are scaled by `alpha` under `M_1` and killed by `M_2`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorFamily {
    n: usize,
    /// `(M_1, M_2)` per site, in site order `j = k N + l`.
    sites: Vec<(CMatrix, CMatrix)>,
    target: DMatrix<f64>,
    values: DMatrix<f64>,
    gamma: f64,
    gamma_halvings: u32,
}

/// `D = 2N^2 + N`.
pub fn indicator_dim(n: usize) -> usize {
    2 * n * n + n
}

/// Nonzero entries `(row, col)` of the shift `P = sum_{k,l} E(k + 1, (k + 1) N + l)`,
/// all equal to one.
pub fn shift_entries(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            out.push((k + 1, (k + 1) * n + l));
        }
    }
    out
}

pub fn shift_operator(n: usize) -> DMatrix<f64> {
    let d = indicator_dim(n);
    let mut p = DMatrix::zeros(d, d);
    for (r, col) in shift_entries(n) {
        p[(r, col)] = 1.0;
    }
    p
}

/// Site carrying the pair `(k, l)`.
pub fn site_of(n: usize, k: usize, l: usize) -> usize {
    k * n + l
}

/// Row and column of the single nonzero entry produced by the one-hot word
/// at site `k N + l`.
pub fn outcome_position(k: usize, l: usize) -> (usize, usize) {
    (k + 1, l)
}

impl IndicatorFamily {
    /// Builds the family for the table `Y` (entries in `[0, 1)`), starting
    /// from scale `gamma` and halving it until the weights are feasible.
    pub fn build(y: &DMatrix<f64>, gamma: f64) -> Result<Self> {
        let n = y.nrows();
        if n < 2 || y.ncols() != n {
            return Err(Error::Shape(format!("Y must be N x N with N >= 2, got {}x{}", y.nrows(), y.ncols())));
        }
        if let Some(v) = y.iter().find(|v| !(**v >= 0.0 && **v < 1.0)) {
            return Err(Error::Box(format!("table entry {v} outside [0, 1)")));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::Box(format!("gamma = {gamma} outside (0, 1]")));
        }
        let floor = 0.5f64.powi((n * n) as i32);
        let mut g = gamma;
        let mut halvings = 0;
        let betas = loop {
            if let Some(b) = solve_weights(y, g) {
                break b;
            }
            g *= 0.5;
            halvings += 1;
            if g < floor {
                return Err(Error::InfeasibleWeights { gamma: g });
            }
        };
        let sites = (0..n * n).map(|j| site_matrices(n, j, &betas)).collect();
        let values = realized_values(n, &betas);
        Ok(Self { n, sites, target: y.clone(), values, gamma: g, gamma_halvings: halvings })
    }

    /// Reassembles a family from stored site matrices, e.g. read back from
    /// an instance file. Realized values are recomputed from the matrices.
    pub fn from_parts(target: DMatrix<f64>, gamma: f64, gamma_halvings: u32, sites: Vec<(CMatrix, CMatrix)>) -> Result<Self> {
        let n = target.nrows();
        let d = indicator_dim(n);
        if sites.len() != n * n {
            return Err(Error::Shape(format!("{} indicator sites for N = {n}", sites.len())));
        }
        if sites.iter().any(|(a, b)| a.shape() != (d, d) || b.shape() != (d, d)) {
            return Err(Error::Shape(format!("indicator matrices must be {d}x{d}")));
        }
        let betas: Vec<f64> = (0..n * n)
            .map(|j| {
                let (k, l) = (j / n, j % n);
                sites[j].1[((k + 1) * n + l, l)].re
            })
            .collect();
        let values = realized_values(n, &betas);
        Ok(Self { n, sites, target, values, gamma, gamma_halvings })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        indicator_dim(self.n)
    }

    pub fn sites(&self) -> &[(CMatrix, CMatrix)] {
        &self.sites
    }

    pub fn sites_mut(&mut self) -> &mut [(CMatrix, CMatrix)] {
        &mut self.sites
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.target
    }

    /// `V_{k,l}` as designed by the weight solve.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_halvings(&self) -> u32 {
        self.gamma_halvings
    }

    /// `gamma * Y_{k,l}`, the values the contract promises.
    pub fn expected_values(&self) -> DMatrix<f64> {
        &self.target * self.gamma
    }
}

/// `beta_j` per site such that `beta_{j(k,l)} prod_{k' > k} alpha_{j(k',l)} = gamma Y_{k,l}`,
/// solved from the last site of each column group backwards.
fn solve_weights(y: &DMatrix<f64>, gamma: f64) -> Option<Vec<f64>> {
    let n = y.nrows();
    let mut betas = vec![0.0; n * n];
    for l in 0..n {
        let mut survive = 1.0f64;
        for k in (0..n).rev() {
            let want = gamma * y[(k, l)];
            if want == 0.0 {
                continue;
            }
            if survive <= 0.0 {
                return None;
            }
            let beta = want / survive;
            if !(beta < 1.0) {
                return None;
            }
            betas[site_of(n, k, l)] = beta;
            survive *= (1.0 - beta * beta).sqrt();
        }
    }
    Some(betas)
}

fn realized_values(n: usize, betas: &[f64]) -> DMatrix<f64> {
    let mut v = DMatrix::zeros(n, n);
    for l in 0..n {
        let mut survive = 1.0f64;
        for k in (0..n).rev() {
            let beta = betas[site_of(n, k, l)];
            v[(k, l)] = beta * survive;
            survive *= (1.0 - beta * beta).sqrt();
        }
    }
    v
}

/// `(M_1, M_2)` for site `j`, with the column deficits of the core parts
/// filled in at distinct unused rows (first of `M_1`, then of `M_2`) so that
/// `M_1^† M_1 + M_2^† M_2 = 1` exactly.
fn site_matrices(n: usize, j: usize, betas: &[f64]) -> (CMatrix, CMatrix) {
    let d = indicator_dim(n);
    let (k, l) = (j / n, j % n);
    let s = (k + 1) * n + l;
    let beta = betas[j];
    let alpha = (1.0 - beta * beta).sqrt();
    let mut m1 = CMatrix::zeros(d, d);
    let mut m2 = CMatrix::zeros(d, d);
    for done in 0..n {
        m1[(done, done)] = c(if done == l { alpha } else { 1.0 });
    }
    for marked in n..(n * n + n) {
        if marked != s {
            m1[(marked, marked)] = c(1.0);
        }
    }
    if beta != 0.0 {
        m2[(s, l)] = c(beta);
    }
    let mut norms = vec![0.0f64; d];
    for col in 0..d {
        norms[col] = m1.column(col).iter().chain(m2.column(col).iter()).map(|z| z.norm_sqr()).sum();
    }
    let unused = (n * n + n)..d;
    let mut slots = unused.clone().map(|r| (0usize, r)).chain(unused.map(|r| (1usize, r)));
    for (col, norm) in norms.into_iter().enumerate() {
        let deficit = 1.0 - norm;
        if deficit <= 1e-15 {
            continue;
        }
        let (which, row) = slots.next().expect("2N^2 completion slots suffice");
        let target = if which == 0 { &mut m1 } else { &mut m2 };
        target[(row, col)] = c(deficit.sqrt());
    }
    (m1, m2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::identity_deviation;

    #[test]
    fn shift_for_two() {
        // 1-based (2,3), (2,4), (3,5), (3,6)
        assert_eq!(shift_entries(2), vec![(1, 2), (1, 3), (2, 4), (2, 5)]);
        let p = shift_operator(2);
        assert_eq!(p.iter().filter(|v| **v != 0.0).count(), 4);
    }

    #[test]
    fn sites_are_gauge_exact() {
        let y = DMatrix::from_fn(3, 3, |a, b| 0.1 + 0.1 * (a * 3 + b) as f64);
        let fam = IndicatorFamily::build(&y, 1.0).unwrap();
        for (m1, m2) in fam.sites() {
            let g = m1.adjoint() * m1 + m2.adjoint() * m2;
            assert!(identity_deviation(&g) < 1e-12);
        }
        let diff = fam.values() - fam.expected_values();
        assert!(diff.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn gamma_is_halved_when_needed() {
        let y = DMatrix::from_element(4, 4, 0.9);
        let fam = IndicatorFamily::build(&y, 1.0).unwrap();
        assert!(fam.gamma() < 1.0);
        assert_eq!(fam.gamma(), 0.5f64.powi(fam.gamma_halvings() as i32));
    }

    #[test]
    fn reassembly_recovers_values() {
        let y = DMatrix::from_element(2, 2, 0.5);
        let fam = IndicatorFamily::build(&y, 1.0).unwrap();
        let again =
            IndicatorFamily::from_parts(fam.target().clone(), fam.gamma(), fam.gamma_halvings(), fam.sites().to_vec())
                .unwrap();
        assert_eq!(again.values(), fam.values());
    }

    #[test]
    fn rejects_out_of_range_table() {
        let y = DMatrix::from_element(2, 2, 1.0);
        assert!(matches!(IndicatorFamily::build(&y, 1.0), Err(Error::Box(_))));
    }
}
