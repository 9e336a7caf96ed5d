//! Variational ground-state search: single-site sweeps and simultaneous
//! optimization of a set of sites.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::ChainHamiltonian;
use crate::linalg::{
    dot, lowest_eigenpair_dense, lowest_eigenpair_lanczos, polar_isometry, CMatrix, LanczosOptions, C64, ONE,
};
use crate::mpo::{apply_site, close, left_step, right_step, Mpo, MpoSite};
use crate::mps::{random_site, MatrixProductState, SiteTensor, TOL_GAUGE};

/// Effective problems up to this dimension are solved densely.
pub const DEFAULT_DENSE_LIMIT: usize = 128;

#[derive(Debug, Clone, Copy)]
pub struct DmrgOptions {
    pub max_sweeps: usize,
    /// A sweep that lowers the energy by less than this ends the run.
    pub tol_energy: f64,
    pub dense_limit: usize,
    pub lanczos: LanczosOptions,
}

impl Default for DmrgOptions {
    fn default() -> Self {
        Self { max_sweeps: 100, tol_energy: 1e-12, dense_limit: DEFAULT_DENSE_LIMIT, lanczos: LanczosOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub initial_energy: f64,
    /// Energy after every local solve, in order.
    pub energies: Vec<f64>,
    pub final_energy: f64,
    pub sweeps: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl SweepReport {
    /// Largest increase between consecutive recorded energies (0 when the
    /// trace never goes up).
    pub fn max_increase(&self) -> f64 {
        std::iter::once(self.initial_energy)
            .chain(self.energies.iter().copied())
            .collect::<Vec<_>>()
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// The quadratic form `x^† H_eff x` of one site with every other site fixed.
#[derive(Debug, Clone)]
pub struct EffectiveProblem {
    site: usize,
    d: usize,
    dl: usize,
    dr: usize,
    left: Vec<CMatrix>,
    right: Vec<CMatrix>,
    mpo: MpoSite,
}

impl EffectiveProblem {
    pub fn site(&self) -> usize {
        self.site
    }

    /// `d * D_l * D_r`, the number of free parameters.
    pub fn dim(&self) -> usize {
        self.d * self.dl * self.dr
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mats = to_matrices(x, self.d, self.dl, self.dr);
        flatten(&apply_site(&self.left, &self.right, &self.mpo, &mats))
    }

    pub fn expectation(&self, x: &[C64]) -> f64 {
        dot(x, &self.apply(x)).re
    }

    /// Explicit matrix, built column by column.
    pub fn to_dense(&self, cap: usize) -> Result<CMatrix> {
        let dim = self.dim();
        if dim > cap {
            return Err(Error::CapExceeded { requested: dim, cap });
        }
        let mut out = CMatrix::zeros(dim, dim);
        let mut e = vec![C64::new(0.0, 0.0); dim];
        for col in 0..dim {
            e[col] = ONE;
            for (row, v) in self.apply(&e).into_iter().enumerate() {
                out[(row, col)] = v;
            }
            e[col] = C64::new(0.0, 0.0);
        }
        Ok(out)
    }

    /// Lowest eigenpair. `start` seeds the iterative solver, so the result
    /// never lies above the Rayleigh quotient of `start`.
    pub fn lowest(&self, start: &[C64], opts: &DmrgOptions) -> Result<(f64, Vec<C64>)> {
        let dim = self.dim();
        if dim <= opts.dense_limit {
            return lowest_eigenpair_dense(&self.to_dense(dim)?);
        }
        let start: Vec<C64> = if start.iter().all(|z| z.norm() == 0.0) {
            (0..dim).map(|i| C64::new(1.0 + (i % 7) as f64 * 0.1, 0.0)).collect()
        } else {
            start.to_vec()
        };
        match lowest_eigenpair_lanczos(|x| self.apply(x), &start, opts.lanczos) {
            Ok(pair) => Ok(pair),
            Err(_) if dim <= 4096 => lowest_eigenpair_dense(&self.to_dense(dim)?),
            Err(e) => Err(e),
        }
    }
}

/// Brings `psi` into mixed-canonical form centred at `j` and returns it with
/// the effective problem of that site.
pub fn effective_problem(
    psi: &MatrixProductState,
    h: &ChainHamiltonian,
    j: usize,
) -> Result<(MatrixProductState, EffectiveProblem)> {
    check_fit(psi, h)?;
    let centred = psi.mixed_canonical(j)?;
    let mpo = Mpo::from_chain(h);
    let problem = raw_problem(&centred, &mpo, j);
    Ok((centred, problem))
}

/// Effective problem with the other sites taken as they are.
fn raw_problem(psi: &MatrixProductState, mpo: &Mpo, j: usize) -> EffectiveProblem {
    let mut left = vec![CMatrix::from_element(1, 1, ONE)];
    for k in 0..j {
        left = left_step(&left, mpo.site(k), &psi.site(k).levels(), psi.site(k).right_dim());
    }
    let mut right = vec![CMatrix::from_element(1, 1, ONE)];
    for k in ((j + 1)..psi.len()).rev() {
        right = right_step(&right, mpo.site(k), &psi.site(k).levels(), psi.site(k).left_dim());
    }
    let site = psi.site(j);
    EffectiveProblem {
        site: j,
        d: site.d(),
        dl: site.left_dim(),
        dr: site.right_dim(),
        left,
        right,
        mpo: mpo.site(j).clone(),
    }
}

fn check_fit(psi: &MatrixProductState, h: &ChainHamiltonian) -> Result<()> {
    if psi.len() != h.n() || psi.d() != h.d() {
        return Err(Error::Shape(format!(
            "Hamiltonian on n={}, d={} for a state with n={}, d={}",
            h.n(),
            h.d(),
            psi.len(),
            psi.d()
        )));
    }
    Ok(())
}

/// Replaces site `j` by the lowest eigenvector of its effective problem.
/// The returned state is normalized with orthogonality centre `j`.
pub fn optimize_site(
    psi: &MatrixProductState,
    h: &ChainHamiltonian,
    j: usize,
    opts: &DmrgOptions,
) -> Result<(MatrixProductState, f64)> {
    check_fit(psi, h)?;
    let mut state = psi.normalized()?.mixed_canonical(j)?;
    let mpo = Mpo::from_chain(h);
    let problem = raw_problem(&state, &mpo, j);
    let energy = solve_in_place(&mut state, &problem, opts)?;
    state.set_center(Some(j));
    Ok((state, energy))
}

/// Solves the local problem and writes the result into `state` unless it
/// would raise the energy. Returns the energy afterwards.
fn solve_in_place(state: &mut MatrixProductState, problem: &EffectiveProblem, opts: &DmrgOptions) -> Result<f64> {
    let j = problem.site;
    let current = state.site(j).to_vector();
    let before = problem.expectation(&current);
    let (_, v) = problem.lowest(&current, opts)?;
    let after = problem.expectation(&v);
    if after <= before {
        let center = state.orthogonality_center();
        state.replace_site(j, SiteTensor::from_vector(&v, problem.d, problem.dl, problem.dr)?)?;
        state.set_center(center);
        Ok(after)
    } else {
        Ok(before)
    }
}

/// Single-site sweeps, left to right and back, until the energy stalls.
pub fn sweep(
    psi: &MatrixProductState,
    h: &ChainHamiltonian,
    opts: &DmrgOptions,
) -> Result<(MatrixProductState, SweepReport)> {
    check_fit(psi, h)?;
    let clock = Instant::now();
    let n = psi.len();
    let mpo = Mpo::from_chain(h);
    let mut state = psi.right_canonicalize()?;
    let mut lefts: Vec<Vec<CMatrix>> = vec![Vec::new(); n + 1];
    let mut rights: Vec<Vec<CMatrix>> = vec![Vec::new(); n + 1];
    lefts[0] = vec![CMatrix::from_element(1, 1, ONE)];
    rights[n] = vec![CMatrix::from_element(1, 1, ONE)];
    for k in (1..n).rev() {
        rights[k] = right_step(&rights[k + 1], mpo.site(k), &state.site(k).levels(), state.site(k).left_dim());
    }
    let initial_energy = mpo.expectation(&state);
    let mut energies = Vec::new();
    let mut last = initial_energy;
    let mut converged = false;
    let mut sweeps = 0;

    let problem_at = |state: &MatrixProductState, lefts: &[Vec<CMatrix>], rights: &[Vec<CMatrix>], j: usize| {
        let site = state.site(j);
        EffectiveProblem {
            site: j,
            d: site.d(),
            dl: site.left_dim(),
            dr: site.right_dim(),
            left: lefts[j].clone(),
            right: rights[j + 1].clone(),
            mpo: mpo.site(j).clone(),
        }
    };

    while sweeps < opts.max_sweeps {
        sweeps += 1;
        for j in 0..n {
            let problem = problem_at(&state, &lefts, &rights, j);
            energies.push(solve_in_place(&mut state, &problem, opts)?);
            if j + 1 < n {
                state.shift_center_right(j)?;
                lefts[j + 1] = left_step(&lefts[j], mpo.site(j), &state.site(j).levels(), state.site(j).right_dim());
            }
        }
        for j in (0..n.saturating_sub(1)).rev() {
            // site j + 1 was just solved; move the centre onto j
            state.shift_center_left(j + 1)?;
            let k = j + 1;
            rights[k] = right_step(&rights[k + 1], mpo.site(k), &state.site(k).levels(), state.site(k).left_dim());
            let problem = problem_at(&state, &lefts, &rights, j);
            energies.push(solve_in_place(&mut state, &problem, opts)?);
        }
        let now = *energies.last().expect("at least one solve");
        let decrease = last - now;
        last = now;
        if decrease < opts.tol_energy {
            converged = true;
            break;
        }
    }
    state.set_center(Some(0));
    let report = SweepReport {
        initial_energy,
        final_energy: last,
        energies,
        sweeps,
        converged,
        wall_time_s: Some(clock.elapsed().as_secs_f64()),
    };
    Ok((state, report))
}

/// How a single site is re-optimized inside a site set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocalSolver {
    /// Standard mixed-canonical eigenproblem. Other sites are re-gauged,
    /// which leaves the state but not their tensors unchanged.
    Eigen,
    /// Minimizes over left-isometric tensors of the site while every other
    /// tensor stays literally fixed. Needs a left-canonical chain.
    Isometric,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SiteSetStrategy {
    /// Cyclic single-site solves over the set.
    Alternating { local: LocalSolver, max_rounds: usize },
    /// Alternating from the given state and `starts - 1` random ones; the
    /// lowest energy wins, ties going to the earliest start.
    Multistart { local: LocalSolver, starts: usize, seed: u64, max_rounds: usize },
    /// Exhaustive scan of a structured candidate set, optionally followed
    /// by isometric polishing of the winner.
    Enumerate { polish: bool },
}

/// One assignment of the free sites.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub label: Vec<u8>,
    /// Tensors for the free sites, in the order of [`CandidateSet::free_sites`].
    pub tensors: Vec<SiteTensor>,
}

/// A finite family of assignments of a fixed set of free sites.
pub trait CandidateSet: Sync {
    fn free_sites(&self) -> Vec<usize>;

    /// Candidates in their canonical scan order.
    fn candidates(&self) -> Result<Vec<Candidate>>;

    /// The quantity minimized over the candidates; the chain energy unless
    /// the family defines a calibrated objective.
    fn score(&self, candidate: &Candidate, chain_energy: f64) -> Result<f64> {
        let _ = candidate;
        Ok(chain_energy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteSetReport {
    pub strategy: String,
    pub sites: Vec<usize>,
    pub initial_energy: f64,
    /// Energy after every local solve of the selected run.
    pub energies: Vec<f64>,
    pub final_energy: f64,
    pub rounds: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub start_energies: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_start: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates_scanned: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_label: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polished_energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// Lowers the energy by varying the tensors of every site in `sites`.
pub fn optimize_site_set(
    psi: &MatrixProductState,
    h: &ChainHamiltonian,
    sites: &[usize],
    strategy: &SiteSetStrategy,
    opts: &DmrgOptions,
    candidates: Option<&dyn CandidateSet>,
) -> Result<(MatrixProductState, SiteSetReport)> {
    check_fit(psi, h)?;
    if sites.is_empty() {
        return Err(Error::Shape("the site set is empty".into()));
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.iter().find(|&&j| j >= psi.len()) {
        return Err(Error::Shape(format!("site {bad} outside a chain of {}", psi.len())));
    }
    let clock = Instant::now();
    let mpo = Mpo::from_chain(h);
    let mut result = match *strategy {
        SiteSetStrategy::Alternating { local, max_rounds } => {
            let run = alternating(psi, &mpo, &sorted, local, max_rounds, opts)?;
            let report = run.report("alternating", &sorted);
            (run.state, report)
        }
        SiteSetStrategy::Multistart { local, starts, seed, max_rounds } => {
            multistart(psi, &mpo, &sorted, local, starts.max(1), seed, max_rounds, opts)?
        }
        SiteSetStrategy::Enumerate { polish } => {
            let set = candidates.ok_or_else(|| {
                Error::UnsupportedStrategy("enumeration needs a structured candidate set (reduction instance)".into())
            })?;
            enumerate(psi, &mpo, &sorted, set, polish, opts)?
        }
    };
    result.1.wall_time_s = Some(clock.elapsed().as_secs_f64());
    Ok(result)
}

struct Run {
    state: MatrixProductState,
    initial: f64,
    energies: Vec<f64>,
    rounds: usize,
    converged: bool,
}

impl Run {
    fn final_energy(&self) -> f64 {
        self.energies.last().copied().unwrap_or(self.initial)
    }

    fn report(&self, strategy: &str, sites: &[usize]) -> SiteSetReport {
        SiteSetReport {
            strategy: strategy.into(),
            sites: sites.to_vec(),
            initial_energy: self.initial,
            energies: self.energies.clone(),
            final_energy: self.final_energy(),
            rounds: self.rounds,
            converged: self.converged,
            start_energies: Vec::new(),
            best_start: None,
            candidates_scanned: None,
            best_label: None,
            best_score: None,
            polished_energy: None,
            wall_time_s: None,
        }
    }
}

fn alternating(
    psi: &MatrixProductState,
    mpo: &Mpo,
    sites: &[usize],
    local: LocalSolver,
    max_rounds: usize,
    opts: &DmrgOptions,
) -> Result<Run> {
    let mut state = match local {
        LocalSolver::Eigen => psi.normalized()?,
        LocalSolver::Isometric => {
            require_left_canonical(psi, sites)?;
            let mut s = psi.clone();
            for &j in sites {
                let iso = project_isometric(s.site(j))?;
                s.replace_site(j, iso)?;
            }
            s
        }
    };
    let initial = mpo.expectation(&state);
    let mut energies = Vec::new();
    let mut last = initial;
    let mut rounds = 0;
    let mut converged = false;
    while rounds < max_rounds.max(1) {
        rounds += 1;
        for &j in sites {
            let e = match local {
                LocalSolver::Eigen => {
                    state = state.mixed_canonical(j)?;
                    let problem = raw_problem(&state, mpo, j);
                    solve_in_place(&mut state, &problem, opts)?
                }
                LocalSolver::Isometric => {
                    let problem = raw_problem(&state, mpo, j);
                    isometric_in_place(&mut state, &problem)?
                }
            };
            energies.push(e);
        }
        let now = *energies.last().expect("nonempty site set");
        let decrease = last - now;
        last = now;
        if decrease < opts.tol_energy {
            converged = true;
            break;
        }
    }
    Ok(Run { state, initial, energies, rounds, converged })
}

#[allow(clippy::too_many_arguments)]
fn multistart(
    psi: &MatrixProductState,
    mpo: &Mpo,
    sites: &[usize],
    local: LocalSolver,
    starts: usize,
    seed: u64,
    max_rounds: usize,
    opts: &DmrgOptions,
) -> Result<(MatrixProductState, SiteSetReport)> {
    let runs: Vec<Result<Run>> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let start = if k == 0 { psi.clone() } else { randomized(psi, sites, local, seed.wrapping_add(k as u64))? };
            alternating(&start, mpo, sites, local, max_rounds, opts)
        })
        .collect();
    let runs: Vec<Run> = runs.into_iter().collect::<Result<_>>()?;
    let mut best = 0;
    for (k, run) in runs.iter().enumerate() {
        if run.final_energy() < runs[best].final_energy() {
            best = k;
        }
    }
    let start_energies = runs.iter().map(Run::final_energy).collect();
    let mut runs = runs;
    let chosen = runs.swap_remove(best);
    let mut report = chosen.report("multistart", sites);
    report.start_energies = start_energies;
    report.best_start = Some(best);
    Ok((chosen.state, report))
}

fn randomized(psi: &MatrixProductState, sites: &[usize], local: LocalSolver, seed: u64) -> Result<MatrixProductState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = psi.clone();
    for &j in sites {
        let s = psi.site(j);
        let mut t = random_site(s.d(), s.left_dim(), s.right_dim(), &mut rng);
        if local == LocalSolver::Isometric {
            t = project_isometric(&t)?;
        }
        out.replace_site(j, t)?;
    }
    Ok(out)
}

fn enumerate(
    psi: &MatrixProductState,
    mpo: &Mpo,
    sites: &[usize],
    set: &dyn CandidateSet,
    polish: bool,
    opts: &DmrgOptions,
) -> Result<(MatrixProductState, SiteSetReport)> {
    let mut free = set.free_sites();
    free.sort_unstable();
    if free != sites {
        return Err(Error::UnsupportedStrategy(format!(
            "candidate set varies sites {free:?}, requested {sites:?}"
        )));
    }
    let candidates = set.candidates()?;
    if candidates.is_empty() {
        return Err(Error::UnsupportedStrategy("empty candidate set".into()));
    }
    let lo = sites[0];
    let hi = *sites.last().expect("nonempty");
    let mut left = vec![CMatrix::from_element(1, 1, ONE)];
    for k in 0..lo {
        left = left_step(&left, mpo.site(k), &psi.site(k).levels(), psi.site(k).right_dim());
    }
    let mut right = vec![CMatrix::from_element(1, 1, ONE)];
    for k in ((hi + 1)..psi.len()).rev() {
        right = right_step(&right, mpo.site(k), &psi.site(k).levels(), psi.site(k).left_dim());
    }
    let initial = mpo.expectation(psi);
    let scored: Vec<Result<(f64, f64)>> = candidates
        .par_iter()
        .map(|cand| {
            if cand.tensors.len() != sites.len() {
                return Err(Error::Shape("candidate does not cover the free sites".into()));
            }
            let mut env = left.clone();
            for k in lo..=hi {
                let tensor = match sites.iter().position(|&j| j == k) {
                    Some(p) => &cand.tensors[p],
                    None => psi.site(k),
                };
                env = left_step(&env, mpo.site(k), &tensor.levels(), tensor.right_dim());
            }
            let energy = close(&env, &right).re;
            Ok((energy, set.score(cand, energy)?))
        })
        .collect();
    let scored: Vec<(f64, f64)> = scored.into_iter().collect::<Result<_>>()?;
    let mut best = 0;
    for (k, s) in scored.iter().enumerate() {
        if s.1 < scored[best].1 {
            best = k;
        }
    }
    let mut state = psi.clone();
    for (p, &j) in sites.iter().enumerate() {
        state.replace_site(j, candidates[best].tensors[p].clone())?;
    }
    let chain_energy = scored[best].0;
    let mut report = SiteSetReport {
        strategy: "enumerate".into(),
        sites: sites.to_vec(),
        initial_energy: initial,
        energies: vec![chain_energy],
        final_energy: chain_energy,
        rounds: 1,
        converged: true,
        start_energies: Vec::new(),
        best_start: None,
        candidates_scanned: Some(candidates.len()),
        best_label: Some(candidates[best].label.clone()),
        best_score: Some(scored[best].1),
        polished_energy: None,
        wall_time_s: None,
    };
    if polish {
        let run = alternating(&state, mpo, sites, LocalSolver::Isometric, opts.max_sweeps, opts)?;
        report.polished_energy = Some(run.final_energy());
        report.energies.extend(run.energies.iter().copied());
        state = run.state;
    }
    Ok((state, report))
}

fn require_left_canonical(psi: &MatrixProductState, free: &[usize]) -> Result<()> {
    for (j, site) in psi.sites().iter().enumerate() {
        if free.contains(&j) {
            let s = site;
            if s.d() * s.left_dim() < s.right_dim() {
                return Err(Error::Structure(format!(
                    "site {j} ({}x{}x{}) cannot hold a left isometry",
                    s.d(),
                    s.left_dim(),
                    s.right_dim()
                )));
            }
            continue;
        }
        let r = site.gauge_residual();
        if r > TOL_GAUGE {
            return Err(Error::Structure(format!(
                "isometric solves need a left-canonical chain; site {j} has residual {r:.3e}"
            )));
        }
    }
    Ok(())
}

/// Closest left-isometric tensor. A zero tensor maps to a fixed isometry.
fn project_isometric(site: &SiteTensor) -> Result<SiteTensor> {
    let stacked = site.stacked_rows();
    let iso = if stacked.iter().all(|z| z.norm() == 0.0) {
        CMatrix::identity(stacked.nrows(), stacked.ncols())
    } else {
        polar_isometry(&stacked)
    };
    SiteTensor::from_stacked_rows(&iso, site.d())
}

const ISO_MAX_ITERS: usize = 2000;
const ISO_GRAD_TOL: f64 = 1e-9;

/// Riemannian gradient descent on the Stiefel manifold of left isometries
/// with a polar retraction and Armijo backtracking.
fn isometric_in_place(state: &mut MatrixProductState, problem: &EffectiveProblem) -> Result<f64> {
    let j = problem.site;
    let d = problem.d;
    let energy_of = |x: &CMatrix| -> (f64, CMatrix) {
        let v = stacked_to_vector(x, d);
        let hv = problem.apply(&v);
        (dot(&v, &hv).re, vector_to_stacked(&hv, d, problem.dl, problem.dr))
    };
    let mut x = state.site(j).stacked_rows();
    let (mut f, mut hx) = energy_of(&x);
    let start = f;
    let mut step = 1.0;
    for _ in 0..ISO_MAX_ITERS {
        let g = &hx * C64::new(2.0, 0.0);
        let xg = x.adjoint() * &g;
        let sym = (&xg + xg.adjoint()) * C64::new(0.5, 0.0);
        let grad = &g - &x * sym;
        let gnorm2: f64 = grad.iter().map(|z| z.norm_sqr()).sum();
        if gnorm2.sqrt() < ISO_GRAD_TOL {
            break;
        }
        let mut accepted = None;
        let mut t = step;
        for _ in 0..60 {
            let trial = polar_isometry(&(&x - &grad * C64::new(t, 0.0)));
            let (ft, ht) = energy_of(&trial);
            if ft <= f - 1e-4 * t * gnorm2 {
                accepted = Some((trial, ft, ht, t));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, ft, ht, t)) => {
                let gain = f - ft;
                x = trial;
                f = ft;
                hx = ht;
                step = (t * 2.0).min(1e3);
                if gain <= 1e-15 * f.abs().max(1.0) {
                    break;
                }
            }
            None => break,
        }
    }
    if f <= start {
        let center = state.orthogonality_center();
        state.replace_site(j, SiteTensor::from_stacked_rows(&x, d)?)?;
        state.set_center(center);
        Ok(f)
    } else {
        Ok(start)
    }
}

fn to_matrices(x: &[C64], d: usize, dl: usize, dr: usize) -> Vec<CMatrix> {
    (0..d).map(|s| CMatrix::from_fn(dl, dr, |a, b| x[(s * dl + a) * dr + b])).collect()
}

fn flatten(mats: &[CMatrix]) -> Vec<C64> {
    let mut v = Vec::with_capacity(mats.iter().map(|m| m.len()).sum());
    for m in mats {
        for a in 0..m.nrows() {
            for b in 0..m.ncols() {
                v.push(m[(a, b)]);
            }
        }
    }
    v
}

fn stacked_to_vector(x: &CMatrix, _d: usize) -> Vec<C64> {
    // row-major order of the stacked matrix is the parameter order
    let mut v = Vec::with_capacity(x.len());
    for r in 0..x.nrows() {
        for c in 0..x.ncols() {
            v.push(x[(r, c)]);
        }
    }
    v
}

fn vector_to_stacked(v: &[C64], d: usize, dl: usize, dr: usize) -> CMatrix {
    CMatrix::from_fn(d * dl, dr, |r, c| v[r * dr + c])
}
