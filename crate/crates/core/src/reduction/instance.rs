use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{ChainHamiltonian, LocalTerm};
use crate::linalg::{c, CMatrix, C64};
use crate::mps::{EnvironmentCache, MatrixProductState, SiteTensor};

use super::bqp::{BqpInstance, PenaltyTable, BOX_TOL};
use super::embedding::{embed_point, embed_variables, fixed_center_tensors, kappa, LEVELS};
use super::indicator::{indicator_dim, IndicatorFamily};

/// Residual allowed on every fixed site.
pub const FIXED_GAUGE_TOL: f64 = 1e-12;

/// Window length of the projector term.
const WINDOW: usize = 6;

/// Site ranges of the four regions (plus optional padding), 0-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    /// `N`.
    pub n_vars: usize,
    /// `D = 2N^2 + N`.
    pub dim: usize,
    /// `m = ceil(log2 D)`.
    pub m: usize,
    /// `N^2 + 6 + 2m`.
    pub base_sites: usize,
    /// Total number of sites, padding included.
    pub sites: usize,
    pub left_tail: Range<usize>,
    pub left_center: Range<usize>,
    pub right_center: Range<usize>,
    pub right_tail: Range<usize>,
    pub padding: Range<usize>,
}

impl Layout {
    pub fn new(n: usize, padding: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Instance(format!("need N >= 2, got {n}")));
        }
        let dim = indicator_dim(n);
        let m = ceil_log2(dim);
        let base = n * n + 6 + 2 * m;
        let left_tail = 0..m;
        let left_center = m..m + 6;
        let right_center = m + 6..m + 6 + n * n;
        let right_tail = right_center.end..right_center.end + m;
        let padding = base..base + padding;
        Ok(Self {
            n_vars: n,
            dim,
            m,
            base_sites: base,
            sites: padding.end,
            left_tail,
            left_center,
            right_center,
            right_tail,
            padding,
        })
    }

    /// The two free sites, offsets 2 and 4 of the left centre.
    pub fn free_sites(&self) -> [usize; 2] {
        [self.m + 2, self.m + 4]
    }

    pub fn region(&self, site: usize) -> Region {
        if self.left_tail.contains(&site) {
            Region::LeftTail
        } else if self.left_center.contains(&site) {
            Region::LeftCenter
        } else if self.right_center.contains(&site) {
            Region::RightCenter
        } else if self.right_tail.contains(&site) {
            Region::RightTail
        } else {
            Region::Padding
        }
    }

    /// Classification of the window starting at `start`.
    pub fn window_kind(&self, start: usize) -> WindowKind {
        let sites = start..start + WINDOW;
        let tail_pair = sites.clone().zip(sites.clone().skip(1)).any(|(a, b)| {
            let (ra, rb) = (self.region(a), self.region(b));
            (ra == Region::LeftTail && rb == Region::LeftTail) || (ra.is_right_tail() && rb.is_right_tail())
        });
        if tail_pair {
            WindowKind::Tail
        } else if sites.clone().any(|j| self.left_center.contains(&j)) {
            WindowKind::LeftCenter
        } else if sites.clone().all(|j| self.right_center.contains(&j)) {
            WindowKind::RightCenter
        } else {
            WindowKind::Boundary
        }
    }
}

fn ceil_log2(x: usize) -> usize {
    let mut m = 0;
    while (1usize << m) < x {
        m += 1;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    LeftTail,
    LeftCenter,
    RightCenter,
    RightTail,
    Padding,
}

impl Region {
    fn is_right_tail(self) -> bool {
        matches!(self, Region::RightTail | Region::Padding)
    }
}

/// `Tail` windows contain two adjacent sites of one tail, which carry
/// disjoint level pairs, so they vanish identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    Tail,
    LeftCenter,
    RightCenter,
    Boundary,
}

/// `n = a D + b`. Without a requested target this is just `n` divided by
/// `D` with remainder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineRecord {
    pub a: usize,
    pub b: usize,
    pub padding: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssemblyOptions {
    /// Starting scale of the indicator values; halved until feasible.
    pub gamma: f64,
    /// Pad the chain to `a D + b` sites.
    pub affine_target: Option<(usize, usize)>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { gamma: 1.0, affine_target: None }
    }
}

#[derive(Debug, Clone)]
pub struct WindowEnergy {
    pub start: usize,
    pub kind: WindowKind,
    pub energy: f64,
}

/// A fully assembled chain encoding one BQP instance. The stored state has
/// the free sites at the embedding of `c = d = 0`.
#[derive(Debug, Clone)]
pub struct ReductionInstance {
    bqp: BqpInstance,
    layout: Layout,
    penalty: PenaltyTable,
    family: IndicatorFamily,
    gamma_requested: f64,
    affine: AffineRecord,
    hamiltonian: ChainHamiltonian,
    state: MatrixProductState,
}

pub fn assemble_instance(bqp: &BqpInstance, opts: &AssemblyOptions) -> Result<ReductionInstance> {
    let n = bqp.n_big();
    let base = Layout::new(n, 0)?;
    let affine = match opts.affine_target {
        None => AffineRecord { a: base.base_sites / base.dim, b: base.base_sites % base.dim, padding: 0 },
        Some((a, b)) => {
            let target = a
                .checked_mul(base.dim)
                .and_then(|v| v.checked_add(b))
                .ok_or_else(|| Error::Instance("affine target overflows".into()))?;
            if target < base.base_sites {
                return Err(Error::Instance(format!(
                    "affine target {a} * {} + {b} = {target} is below the {} sites the chain needs",
                    base.dim, base.base_sites
                )));
            }
            AffineRecord { a, b, padding: target - base.base_sites }
        }
    };
    let layout = Layout::new(n, affine.padding)?;
    let penalty = PenaltyTable::from_bqp(bqp);
    let family = IndicatorFamily::build(&penalty.matrix(), opts.gamma)?;
    let sites = build_sites(&layout, &family)?;
    let state = MatrixProductState::from_sites(sites)?;
    let instance = ReductionInstance {
        bqp: bqp.clone(),
        hamiltonian: ChainHamiltonian::new(LocalTerm::projector(), layout.sites)?,
        layout,
        penalty,
        family,
        gamma_requested: opts.gamma,
        affine,
        state,
    };
    if let Some((site, r)) = instance.worst_fixed_site() {
        if r > FIXED_GAUGE_TOL {
            return Err(Error::Structure(format!("fixed site {site} has gauge residual {r:.3e}")));
        }
    }
    Ok(instance)
}

fn build_sites(layout: &Layout, family: &IndicatorFamily) -> Result<Vec<SiteTensor>> {
    let n = layout.n_vars;
    let dim = layout.dim;
    let m = layout.m;
    let mut sites = Vec::with_capacity(layout.sites);
    for t in 0..m {
        sites.push(left_tail_site(t, dim)?);
    }
    let centre = fixed_center_tensors(n)?;
    let (a3, a5) = embed_variables(&vec![C64::new(0.0, 0.0); n], &vec![C64::new(0.0, 0.0); n], n)?;
    sites.push(centre.first);
    sites.push(centre.selector);
    sites.push(a3);
    sites.push(centre.contraction);
    sites.push(a5);
    sites.push(centre.last);
    for (m1, m2) in family.sites() {
        sites.push(SiteTensor::from_levels(LEVELS, dim, dim, vec![(2, m1.clone()), (3, m2.clone())])?);
    }
    for u in 0..m {
        sites.push(right_tail_site(u, m, dim)?);
    }
    let last_pair = level_pair(m - 1);
    for p in 0..layout.padding.len() {
        let level = if p % 2 == 0 { (last_pair.0 + 2) % LEVELS } else { last_pair.0 };
        sites.push(SiteTensor::from_levels(LEVELS, 1, 1, vec![(level, CMatrix::from_element(1, 1, c(1.0)))])?);
    }
    Ok(sites)
}

/// Tail sites alternate between levels `(0, 1)` and `(2, 3)`.
fn level_pair(t: usize) -> (usize, usize) {
    if t % 2 == 0 {
        (0, 1)
    } else {
        (2, 3)
    }
}

/// Doubles the bond dimension (capped at `D`): the two levels route the
/// incoming index to the lower and upper half of the outgoing one.
fn left_tail_site(t: usize, dim: usize) -> Result<SiteTensor> {
    let dl = (1usize << t).min(dim);
    let dr = (1usize << (t + 1)).min(dim);
    let (la, lb) = level_pair(t);
    let mut a = CMatrix::zeros(dl, dr);
    let mut b = CMatrix::zeros(dl, dr);
    for r in 0..dl {
        a[(r, r)] = c(1.0);
        if r + dl < dr {
            b[(r, r + dl)] = c(1.0);
        }
    }
    SiteTensor::from_levels(LEVELS, dl, dr, vec![(la, a), (lb, b)])
}

/// Halves the bond dimension; columns fed by both levels carry `1/sqrt 2`.
fn right_tail_site(u: usize, m: usize, dim: usize) -> Result<SiteTensor> {
    let dl = (1usize << (m - u)).min(dim);
    let dr = (1usize << (m - u - 1)).min(dim);
    let (la, lb) = level_pair(u);
    let shared = dl - dr;
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let mut a = CMatrix::zeros(dl, dr);
    let mut b = CMatrix::zeros(dl, dr);
    for r in 0..dr {
        a[(r, r)] = c(if r < shared { half } else { 1.0 });
    }
    for r in dr..dl {
        b[(r, r - dr)] = c(half);
    }
    SiteTensor::from_levels(LEVELS, dl, dr, vec![(la, a), (lb, b)])
}

impl ReductionInstance {
    /// Rebuilds an instance from a stored chain. The indicator family is
    /// read off the right-centre tensors, so tampering shows up in
    /// verification rather than being silently repaired.
    pub fn from_components(
        bqp: BqpInstance,
        penalty: PenaltyTable,
        gamma_requested: f64,
        gamma: f64,
        gamma_halvings: u32,
        affine: AffineRecord,
        state: MatrixProductState,
    ) -> Result<Self> {
        let n = bqp.n_big();
        let layout = Layout::new(n, affine.padding)?;
        if state.len() != layout.sites || state.d() != LEVELS {
            return Err(Error::Document(format!(
                "chain has {} sites of dimension {}, layout needs {} of dimension {LEVELS}",
                state.len(),
                state.d(),
                layout.sites
            )));
        }
        if penalty.y.len() != n {
            return Err(Error::Document(format!("penalty table is {}x?, expected {n}x{n}", penalty.y.len())));
        }
        let dim = layout.dim;
        let mut pairs = Vec::with_capacity(n * n);
        for j in layout.right_center.clone() {
            let s = state.site(j);
            if s.left_dim() != dim || s.right_dim() != dim {
                return Err(Error::Document(format!("right-centre site {j} is not {dim}x{dim}")));
            }
            pairs.push((s.matrix(2).clone(), s.matrix(3).clone()));
        }
        let family = IndicatorFamily::from_parts(penalty.matrix(), gamma, gamma_halvings, pairs)?;
        Ok(Self {
            hamiltonian: ChainHamiltonian::new(LocalTerm::projector(), layout.sites)?,
            bqp,
            layout,
            penalty,
            family,
            gamma_requested,
            affine,
            state,
        })
    }

    pub fn bqp(&self) -> &BqpInstance {
        &self.bqp
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// `N`.
    pub fn n_vars(&self) -> usize {
        self.layout.n_vars
    }

    pub fn penalty(&self) -> &PenaltyTable {
        &self.penalty
    }

    pub fn family(&self) -> &IndicatorFamily {
        &self.family
    }

    pub fn kappa(&self) -> f64 {
        kappa(self.layout.n_vars)
    }

    pub fn gamma(&self) -> f64 {
        self.family.gamma()
    }

    pub fn gamma_requested(&self) -> f64 {
        self.gamma_requested
    }

    pub fn affine(&self) -> AffineRecord {
        self.affine
    }

    pub fn hamiltonian(&self) -> &ChainHamiltonian {
        &self.hamiltonian
    }

    pub fn state(&self) -> &MatrixProductState {
        &self.state
    }

    pub fn free_sites(&self) -> [usize; 2] {
        self.layout.free_sites()
    }

    pub fn is_free(&self, site: usize) -> bool {
        self.free_sites().contains(&site)
    }

    /// `(site, residual)` for every site except the free ones.
    pub fn fixed_site_residuals(&self) -> Vec<(usize, f64)> {
        (0..self.layout.sites)
            .filter(|j| !self.is_free(*j))
            .map(|j| (j, self.state.site(j).gauge_residual()))
            .collect()
    }

    pub fn worst_fixed_site(&self) -> Option<(usize, f64)> {
        self.fixed_site_residuals().into_iter().max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// The chain with both free sites replaced.
    pub fn state_with_tensors(&self, a3: SiteTensor, a5: SiteTensor) -> Result<MatrixProductState> {
        let [f3, f5] = self.free_sites();
        let mut psi = self.state.clone();
        psi.replace_site(f3, a3)?;
        psi.replace_site(f5, a5)?;
        Ok(psi)
    }

    pub fn state_with(&self, cv: &[C64], dv: &[C64]) -> Result<MatrixProductState> {
        let (a3, a5) = embed_variables(cv, dv, self.n_vars())?;
        self.state_with_tensors(a3, a5)
    }

    /// The chain at the point `c = sqrt x`, `d = sqrt y`.
    pub fn state_at_point(&self, x: &[f64], y: &[f64]) -> Result<MatrixProductState> {
        let (a3, a5) = embed_point(x, y, self.n_vars())?;
        self.state_with_tensors(a3, a5)
    }

    pub fn energy_with(&self, cv: &[C64], dv: &[C64]) -> Result<f64> {
        self.state_with(cv, dv)?.energy(&self.hamiltonian)
    }

    pub fn window_kinds(&self) -> Vec<WindowKind> {
        (0..self.hamiltonian.window_count()).map(|s| self.layout.window_kind(s)).collect()
    }

    /// Per-window expectations of the chain with free sites set by `(c, d)`.
    pub fn window_energy_profile(&self, cv: &[C64], dv: &[C64]) -> Result<Vec<WindowEnergy>> {
        let psi = self.state_with(cv, dv)?;
        self.profile_of(&psi)
    }

    pub fn profile_of(&self, psi: &MatrixProductState) -> Result<Vec<WindowEnergy>> {
        let cache = EnvironmentCache::new(psi);
        let term = self.hamiltonian.term();
        (0..self.hamiltonian.window_count())
            .map(|start| {
                Ok(WindowEnergy { start, kind: self.layout.window_kind(start), energy: cache.window_expectation(term, start)? })
            })
            .collect()
    }

    /// `sum_{k,l} V_{k,l}^2 kappa^2 x_l y_k`, the closed-form model of the
    /// energy routed through the indicator family.
    pub fn shortcut_energy(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        shortcut_energy(x, y, self.family.values(), self.kappa())
    }
}

pub fn shortcut_energy(x: &[f64], y: &[f64], values: &DMatrix<f64>, kappa: f64) -> Result<f64> {
    let n = values.nrows();
    if x.len() != n || y.len() != n {
        return Err(Error::Shape(format!("x and y need {n} entries, got {} and {}", x.len(), y.len())));
    }
    for (name, v) in [("x", x), ("y", y)] {
        if let Some((i, t)) = v.iter().enumerate().find(|(_, t)| !(**t >= -BOX_TOL && **t <= 1.0 + BOX_TOL)) {
            return Err(Error::Box(format!("{name}[{i}] = {t}")));
        }
    }
    let k2 = kappa * kappa;
    let mut total = 0.0;
    for k in 0..n {
        for l in 0..n {
            let v = values[(k, l)];
            total += v * v * k2 * x[l] * y[k];
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize) -> BqpInstance {
        let k = n - 1;
        BqpInstance::new(DMatrix::from_fn(k, k, |i, j| if i == j { -0.5 } else { 0.25 })).unwrap()
    }

    #[test]
    fn layout_constants() {
        let l = Layout::new(2, 0).unwrap();
        assert_eq!((l.sites, l.dim, l.m), (18, 10, 4));
        let l = Layout::new(3, 0).unwrap();
        assert_eq!((l.sites, l.dim, l.m), (25, 21, 5));
        assert_eq!(l.free_sites(), [7, 9]);
    }

    #[test]
    fn assembled_chain_is_gauge_exact_and_normalized() {
        let inst = assemble_instance(&small(3), &AssemblyOptions::default()).unwrap();
        assert!(inst.worst_fixed_site().unwrap().1 <= FIXED_GAUGE_TOL);
        assert!((inst.state().norm() - 1.0).abs() < 1e-12);
        for (j, s) in inst.state().sites().iter().enumerate() {
            assert!(s.gauge_residual() < 1e-11, "site {j}");
        }
    }

    #[test]
    fn tail_windows_vanish_and_profile_adds_up() {
        let inst = assemble_instance(&small(2), &AssemblyOptions::default()).unwrap();
        let cv = [c(0.8), C64::new(0.1, 0.3)];
        let dv = [c(0.5), c(0.9)];
        let profile = inst.window_energy_profile(&cv, &dv).unwrap();
        let total: f64 = profile.iter().map(|w| w.energy).sum();
        let direct = inst.energy_with(&cv, &dv).unwrap();
        assert!((total - direct).abs() < 1e-12);
        assert!(profile.iter().any(|w| w.kind == WindowKind::Tail));
        for w in profile.iter().filter(|w| w.kind == WindowKind::Tail) {
            assert!(w.energy.abs() < 1e-12);
        }
    }

    #[test]
    fn padding_meets_affine_target() {
        let bqp = small(2);
        let inst = assemble_instance(&bqp, &AssemblyOptions { gamma: 1.0, affine_target: Some((2, 3)) }).unwrap();
        assert_eq!(inst.layout().sites, 23);
        assert_eq!(inst.affine(), AffineRecord { a: 2, b: 3, padding: 5 });
        assert!((inst.state().norm() - 1.0).abs() < 1e-12);
        let plain = assemble_instance(&bqp, &AssemblyOptions::default()).unwrap();
        assert_eq!(plain.affine(), AffineRecord { a: 1, b: 8, padding: 0 });
        assert!(assemble_instance(&bqp, &AssemblyOptions { gamma: 1.0, affine_target: Some((1, 0)) }).is_err());
    }

    #[test]
    fn shortcut_single_term() {
        let mut v = DMatrix::zeros(2, 2);
        v[(0, 0)] = 0.5;
        assert_eq!(shortcut_energy(&[1.0, 0.0], &[1.0, 0.0], &v, 2.0).unwrap(), 1.0);
        assert_eq!(shortcut_energy(&[0.0, 0.0], &[0.0, 0.0], &v, 2.0).unwrap(), 0.0);
    }
}
