//! Finite open-boundary matrix product states.
//!
//! A state on `n` sites with local dimension `d` is a list of [`SiteTensor`]s;
//! site `j` (0-based) holds `d` complex matrices of shape `D_j x D_{j+1}` and
//! the amplitude of the configuration `(i_0, ..., i_{n-1})` is the 1x1 product
//! `A^(0)_{i_0} ... A^(n-1)_{i_{n-1}}`.
//!
//! Dense amplitude vectors use big-endian configuration order: site 0 is the
//! most significant digit.

mod canonical;
mod contract;

pub use contract::EnvironmentCache;
pub(crate) use contract::{digits_of, trace_product};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{c, identity_deviation, CMatrix, LevelMatrix, C64};

/// Default tolerance for the per-site gauge condition.
pub const TOL_GAUGE: f64 = 1e-10;
/// Default tolerance on `<psi|psi> = 1`.
pub const TOL_NORM: f64 = 1e-10;
/// Default cap on the number of dense amplitudes (`d^n`).
pub const DEFAULT_DENSE_CAP: usize = 1 << 20;

/// The `d` matrices of one site.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteTensor {
    matrices: Vec<CMatrix>,
}

impl SiteTensor {
    pub fn new(matrices: Vec<CMatrix>) -> Result<Self> {
        let first = matrices
            .first()
            .ok_or_else(|| Error::Shape("site tensor needs at least one matrix".into()))?;
        let shape = first.shape();
        if shape.0 == 0 || shape.1 == 0 {
            return Err(Error::Shape("site matrices must be nonempty".into()));
        }
        if let Some(bad) = matrices.iter().find(|m| m.shape() != shape) {
            return Err(Error::Shape(format!(
                "site matrices disagree in shape: {:?} vs {:?}",
                shape,
                bad.shape()
            )));
        }
        Ok(Self { matrices })
    }

    /// A site with all levels zero except those given.
    pub fn from_levels(d: usize, rows: usize, cols: usize, levels: Vec<(usize, CMatrix)>) -> Result<Self> {
        let mut matrices = vec![CMatrix::zeros(rows, cols); d];
        for (level, m) in levels {
            if level >= d {
                return Err(Error::Shape(format!("level {level} out of range for d = {d}")));
            }
            matrices[level] = m;
        }
        Self::new(matrices)
    }

    pub fn d(&self) -> usize {
        self.matrices.len()
    }

    pub fn left_dim(&self) -> usize {
        self.matrices[0].nrows()
    }

    pub fn right_dim(&self) -> usize {
        self.matrices[0].ncols()
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, level: usize) -> &CMatrix {
        &self.matrices[level]
    }

    pub fn matrices_mut(&mut self) -> &mut [CMatrix] {
        &mut self.matrices
    }

    pub fn into_matrices(self) -> Vec<CMatrix> {
        self.matrices
    }

    /// `sum_i A_i^† A_i`.
    pub fn gauge_sum(&self) -> CMatrix {
        self.matrices.iter().fold(CMatrix::zeros(self.right_dim(), self.right_dim()), |acc, a| {
            acc + a.adjoint() * a
        })
    }

    /// `|| sum_i A_i^† A_i - 1 ||_max`.
    pub fn gauge_residual(&self) -> f64 {
        identity_deviation(&self.gauge_sum())
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self { matrices: self.matrices.iter().map(|m| m * factor).collect() }
    }

    /// Levels stacked vertically: row `s * D_l + a`, column `b`.
    pub fn stacked_rows(&self) -> CMatrix {
        let (dl, dr) = (self.left_dim(), self.right_dim());
        let mut out = CMatrix::zeros(self.d() * dl, dr);
        for (s, m) in self.matrices.iter().enumerate() {
            out.view_mut((s * dl, 0), (dl, dr)).copy_from(m);
        }
        out
    }

    pub fn from_stacked_rows(stacked: &CMatrix, d: usize) -> Result<Self> {
        if stacked.nrows() % d != 0 {
            return Err(Error::Shape(format!("{} rows do not split into {d} levels", stacked.nrows())));
        }
        let dl = stacked.nrows() / d;
        Self::new((0..d).map(|s| stacked.view((s * dl, 0), (dl, stacked.ncols())).into_owned()).collect())
    }

    /// Levels stacked horizontally: row `a`, column `s * D_r + b`.
    pub fn stacked_cols(&self) -> CMatrix {
        let (dl, dr) = (self.left_dim(), self.right_dim());
        let mut out = CMatrix::zeros(dl, self.d() * dr);
        for (s, m) in self.matrices.iter().enumerate() {
            out.view_mut((0, s * dr), (dl, dr)).copy_from(m);
        }
        out
    }

    pub fn from_stacked_cols(stacked: &CMatrix, d: usize) -> Result<Self> {
        if stacked.ncols() % d != 0 {
            return Err(Error::Shape(format!("{} columns do not split into {d} levels", stacked.ncols())));
        }
        let dr = stacked.ncols() / d;
        Self::new((0..d).map(|s| stacked.view((0, s * dr), (stacked.nrows(), dr)).into_owned()).collect())
    }

    /// Flattened parameters, index `(s * D_l + a) * D_r + b`.
    pub fn to_vector(&self) -> Vec<C64> {
        let (dl, dr) = (self.left_dim(), self.right_dim());
        let mut v = Vec::with_capacity(self.d() * dl * dr);
        for m in &self.matrices {
            for a in 0..dl {
                for b in 0..dr {
                    v.push(m[(a, b)]);
                }
            }
        }
        v
    }

    pub fn from_vector(v: &[C64], d: usize, dl: usize, dr: usize) -> Result<Self> {
        if v.len() != d * dl * dr {
            return Err(Error::Shape(format!("{} parameters for a {d}x{dl}x{dr} site", v.len())));
        }
        Self::new((0..d).map(|s| CMatrix::from_fn(dl, dr, |a, b| v[(s * dl + a) * dr + b])).collect())
    }

    pub(crate) fn levels(&self) -> Vec<LevelMatrix> {
        self.matrices.iter().map(|m| LevelMatrix::new(m.clone())).collect()
    }
}

/// A finite MPS with open boundary conditions (`D_0 = D_n = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixProductState {
    sites: Vec<SiteTensor>,
    center: Option<usize>,
}

impl MatrixProductState {
    pub fn from_sites(sites: Vec<SiteTensor>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Shape("an MPS needs at least one site".into()));
        }
        let d = sites[0].d();
        if sites[0].left_dim() != 1 || sites[sites.len() - 1].right_dim() != 1 {
            return Err(Error::Profile("open boundary requires D_first = D_last = 1".into()));
        }
        for (j, pair) in sites.windows(2).enumerate() {
            if pair[0].right_dim() != pair[1].left_dim() {
                return Err(Error::Shape(format!(
                    "bond {} mismatch: site {j} has {} columns, site {} has {} rows",
                    j + 1,
                    pair[0].right_dim(),
                    j + 1,
                    pair[1].left_dim()
                )));
            }
        }
        if let Some(j) = sites.iter().position(|s| s.d() != d) {
            return Err(Error::Shape(format!("site {j} has local dimension {} != {d}", sites[j].d())));
        }
        Ok(Self { sites, center: None })
    }

    /// A product state `|levels[0], levels[1], ...>` with all bonds 1.
    pub fn product_state(levels: &[usize], d: usize) -> Result<Self> {
        let sites = levels
            .iter()
            .map(|&l| SiteTensor::from_levels(d, 1, 1, vec![(l, CMatrix::from_element(1, 1, c(1.0)))]))
            .collect::<Result<Vec<_>>>()?;
        let mut psi = Self::from_sites(sites)?;
        psi.center = Some(0);
        Ok(psi)
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn d(&self) -> usize {
        self.sites[0].d()
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn site(&self, j: usize) -> &SiteTensor {
        &self.sites[j]
    }

    pub fn into_sites(self) -> Vec<SiteTensor> {
        self.sites
    }

    pub fn orthogonality_center(&self) -> Option<usize> {
        self.center
    }

    pub(crate) fn set_center(&mut self, center: Option<usize>) {
        self.center = center;
    }

    /// Replaces one site; the new tensor must fit the neighbouring bonds.
    pub fn replace_site(&mut self, j: usize, site: SiteTensor) -> Result<()> {
        let old = &self.sites[j];
        if site.left_dim() != old.left_dim() || site.right_dim() != old.right_dim() || site.d() != old.d() {
            return Err(Error::Shape(format!(
                "site {j}: replacement {}x{}x{} does not fit {}x{}x{}",
                site.d(),
                site.left_dim(),
                site.right_dim(),
                old.d(),
                old.left_dim(),
                old.right_dim()
            )));
        }
        self.sites[j] = site;
        self.center = None;
        Ok(())
    }

    /// Replaces sites `j` and `j + 1` together; the shared bond may change.
    pub(crate) fn replace_pair(&mut self, j: usize, left: SiteTensor, right: SiteTensor) {
        debug_assert_eq!(left.right_dim(), right.left_dim());
        self.sites[j] = left;
        self.sites[j + 1] = right;
    }

    /// Bond dimensions `D_0, ..., D_n`.
    pub fn bond_profile(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.sites.iter().map(|s| s.left_dim()).collect();
        p.push(1);
        p
    }

    pub fn max_bond(&self) -> usize {
        self.bond_profile().into_iter().max().unwrap_or(1)
    }

    /// Per-site gauge residuals `|| sum_i A_i^† A_i - 1 ||_max`.
    pub fn gauge_residuals(&self) -> Vec<f64> {
        self.sites.iter().map(SiteTensor::gauge_residual).collect()
    }

    /// Multiplies every matrix of site `j` by `factor`.
    pub fn scale_site(&self, j: usize, factor: C64) -> Self {
        let mut out = self.clone();
        out.sites[j] = out.sites[j].scaled(factor);
        out.center = None;
        out
    }

    /// Inserts `g g^{-1}` on the bond between sites `bond - 1` and `bond`.
    pub fn insert_gauge(&self, bond: usize, g: &CMatrix) -> Result<Self> {
        if bond == 0 || bond >= self.len() {
            return Err(Error::Shape(format!("bond {bond} is not an inner bond")));
        }
        let inv = g
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Shape("gauge matrix is singular".into()))?;
        let mut out = self.clone();
        for m in out.sites[bond - 1].matrices_mut() {
            *m = &*m * g;
        }
        for m in out.sites[bond].matrices_mut() {
            *m = &inv * &*m;
        }
        out.center = None;
        Ok(out)
    }
}

/// Checks `D_0 = D_n = 1`, positivity, and `D_{j+1} <= d D_j`, `D_j <= d D_{j+1}`.
pub fn validate_profile(d: usize, profile: &[usize]) -> Result<()> {
    if d == 0 {
        return Err(Error::Profile("local dimension must be positive".into()));
    }
    if profile.len() < 2 {
        return Err(Error::Profile("profile needs n + 1 >= 2 entries".into()));
    }
    if profile[0] != 1 || profile[profile.len() - 1] != 1 {
        return Err(Error::Profile(format!(
            "open boundary requires D_first = D_last = 1, got {} and {}",
            profile[0],
            profile[profile.len() - 1]
        )));
    }
    for (j, w) in profile.windows(2).enumerate() {
        if w[0] == 0 || w[1] == 0 {
            return Err(Error::Profile(format!("zero bond at position {j}")));
        }
        if w[1] > d * w[0] || w[0] > d * w[1] {
            return Err(Error::Profile(format!(
                "bonds {} -> {} at site {j} exceed the local dimension {d}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

/// The largest valid profile with every bond capped at `max_bond`.
pub fn capped_profile(n: usize, d: usize, max_bond: usize) -> Vec<usize> {
    (0..=n)
        .map(|j| {
            let left = (d as f64).powi(j as i32);
            let right = (d as f64).powi((n - j) as i32);
            left.min(right).min(max_bond as f64) as usize
        })
        .collect()
}

/// A random MPS with i.i.d. complex Gaussian entries, deterministic in `seed`.
pub fn random_mps(n: usize, d: usize, profile: &[usize], seed: u64) -> Result<MatrixProductState> {
    if profile.len() != n + 1 {
        return Err(Error::Profile(format!("{} bond entries for {n} sites", profile.len())));
    }
    validate_profile(d, profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = (0..n)
        .map(|j| {
            let matrices = (0..d)
                .map(|_| {
                    DMatrix::from_fn(profile[j], profile[j + 1], |_, _| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        C64::new(re, im)
                    })
                })
                .collect();
            SiteTensor::new(matrices)
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixProductState::from_sites(sites)
}

/// A site tensor of the given shape with Gaussian entries.
pub(crate) fn random_site(d: usize, dl: usize, dr: usize, rng: &mut ChaCha8Rng) -> SiteTensor {
    let matrices = (0..d)
        .map(|_| {
            DMatrix::from_fn(dl, dr, |_, _| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                C64::new(re, im)
            })
        })
        .collect();
    SiteTensor::new(matrices).expect("consistent shapes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_legal_mps() {
        let psi = random_mps(1, 2, &[1, 1], 0).unwrap();
        assert_eq!(psi.len(), 1);
        assert_eq!(psi.site(0).matrices().len(), 2);
        assert_eq!(psi.site(0).matrix(0).shape(), (1, 1));
    }

    #[test]
    fn shapes_chain_through_profile() {
        let psi = random_mps(4, 2, &[1, 2, 4, 2, 1], 11).unwrap();
        let shapes: Vec<_> = psi.sites().iter().map(|s| (s.left_dim(), s.right_dim())).collect();
        assert_eq!(shapes, vec![(1, 2), (2, 4), (4, 2), (2, 1)]);
        assert_eq!(psi.bond_profile(), vec![1, 2, 4, 2, 1]);
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        let a = random_mps(5, 3, &[1, 3, 4, 3, 3, 1], 7).unwrap();
        let b = random_mps(5, 3, &[1, 3, 4, 3, 3, 1], 7).unwrap();
        assert_eq!(a, b);
        let c = random_mps(5, 3, &[1, 3, 4, 3, 3, 1], 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_profiles_are_rejected() {
        assert!(matches!(random_mps(2, 2, &[2, 2, 1], 0), Err(Error::Profile(_))));
        assert!(matches!(random_mps(2, 2, &[1, 3, 1], 0), Err(Error::Profile(_))));
        assert!(matches!(random_mps(3, 2, &[1, 2, 1], 0), Err(Error::Profile(_))));
    }

    #[test]
    fn scaled_site_residual() {
        let psi = MatrixProductState::product_state(&[0, 1, 0], 2).unwrap();
        assert!(psi.gauge_residuals().iter().all(|&r| r == 0.0));
        let scaled = psi.scale_site(1, c(2.0));
        assert_eq!(scaled.gauge_residuals()[1], 3.0);
    }

    #[test]
    fn capped_profile_is_valid() {
        let p = capped_profile(10, 2, 16);
        assert_eq!(p, vec![1, 2, 4, 8, 16, 16, 16, 8, 4, 2, 1]);
        validate_profile(2, &p).unwrap();
    }

    #[test]
    fn vector_round_trip() {
        let psi = random_mps(3, 3, &[1, 3, 2, 1], 4).unwrap();
        let site = psi.site(1);
        let v = site.to_vector();
        let back = SiteTensor::from_vector(&v, 3, 3, 2).unwrap();
        assert_eq!(&back, site);
        let rows = SiteTensor::from_stacked_rows(&site.stacked_rows(), 3).unwrap();
        assert_eq!(&rows, site);
        let cols = SiteTensor::from_stacked_cols(&site.stacked_cols(), 3).unwrap();
        assert_eq!(&cols, site);
    }
}
