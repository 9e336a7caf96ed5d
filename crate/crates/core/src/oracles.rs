//! Brute-force and dense references. Nothing here reuses the constructive
//! code paths it is meant to check: objectives, shift operators and
//! products are recomputed from their definitions.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::hamiltonian::ChainHamiltonian;
use crate::linalg::{identity_deviation, lowest_eigenvalue_dense, C64};
use crate::reduction::{BqpInstance, IndicatorFamily, ReductionInstance, WindowKind};

/// Largest number of binary variables `bqp_min` will scan.
pub const BQP_SCAN_CAP: usize = 24;
/// Largest grid `grid_min_big` will scan.
pub const GRID_CAP: u64 = 100_000_000;
/// Indicator families up to this `N` are checked word by word.
pub const EXHAUSTIVE_INDICATOR_LIMIT: usize = 4;
/// Magnitude above which a product entry counts as nonzero.
pub const ENTRY_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub oracle: String,
    /// SHA-256 of the oracle input.
    pub input_digest: String,
    /// `None` for characterization reports that do not gate anything.
    pub passed: Option<bool>,
    /// True only when the whole domain was scanned.
    pub exhaustive: bool,
    pub payload: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

impl OracleReport {
    pub fn failed(&self) -> bool {
        self.passed == Some(false)
    }

    /// The report without timing, for byte-stable output.
    pub fn without_timing(mut self) -> Self {
        self.wall_time_s = None;
        self
    }
}

#[derive(Default)]
struct Hasher(Sha256);

impl Hasher {
    fn tag(mut self, s: &str) -> Self {
        self.0.update((s.len() as u64).to_le_bytes());
        self.0.update(s.as_bytes());
        self
    }

    fn reals(mut self, v: impl IntoIterator<Item = f64>) -> Self {
        for t in v {
            self.0.update(t.to_le_bytes());
        }
        self
    }

    fn complex(self, v: impl IntoIterator<Item = C64>) -> Self {
        self.reals(v.into_iter().flat_map(|z| [z.re, z.im]))
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

fn bqp_digest(bqp: &BqpInstance) -> String {
    Hasher::default().tag("bqp").reals(bqp.matrix().iter().copied()).finish()
}

/// Exact minimum of `b M b^T` over all binary `b` and every minimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BqpMin {
    pub value: f64,
    /// Lexicographic order, most significant bit first.
    pub argmins: Vec<Vec<u8>>,
    pub scanned: u64,
}

/// `q(b) = sum_i b_i (M_ii + 2 sum_{j>i} b_j M_ij)`, summed from scratch.
fn quadratic(m: &DMatrix<f64>, bits: &[u8]) -> f64 {
    let k = bits.len();
    let mut q = 0.0;
    for i in 0..k {
        if bits[i] == 0 {
            continue;
        }
        let mut row = m[(i, i)];
        for j in i + 1..k {
            if bits[j] != 0 {
                row += 2.0 * m[(i, j)];
            }
        }
        q += row;
    }
    q
}

fn bits_of(word: u64, k: usize) -> Vec<u8> {
    (0..k).map(|i| ((word >> (k - 1 - i)) & 1) as u8).collect()
}

/// Scans all `2^(N-1)` binary vectors. Blocks of low bits are walked in Gray
/// code order for speed; near-minimal vectors are re-evaluated from scratch
/// before the final comparison, with ties resolved at `1e-12`.
pub fn bqp_min(bqp: &BqpInstance) -> Result<BqpMin> {
    let m = bqp.matrix();
    let k = bqp.vars();
    if k > BQP_SCAN_CAP {
        return Err(Error::CapExceeded { requested: k, cap: BQP_SCAN_CAP });
    }
    let low = k.min(12);
    let high = k - low;
    let loose = 1e-9;
    let blocks: Vec<(f64, Vec<u64>)> = (0u64..1 << high)
        .into_par_iter()
        .map(|prefix| {
            let base = prefix << low;
            let mut bits = bits_of(base, k);
            let mut q = quadratic(m, &bits);
            // field h_i = sum_j M_ij b_j
            let mut field: Vec<f64> = (0..k).map(|i| (0..k).filter(|&j| bits[j] != 0).map(|j| m[(i, j)]).sum()).collect();
            let mut word = base;
            let mut best = q;
            let mut near = vec![word];
            for t in 1u64..(1 << low) {
                let p = t.trailing_zeros() as usize;
                let i = k - 1 - p;
                let sign = if bits[i] == 0 { 1.0 } else { -1.0 };
                q += sign * 2.0 * field[i] + m[(i, i)];
                bits[i] ^= 1;
                word ^= 1 << p;
                for (r, f) in field.iter_mut().enumerate() {
                    *f += sign * m[(r, i)];
                }
                if q < best - loose {
                    best = q;
                    near.clear();
                    near.push(word);
                } else if q <= best + loose {
                    best = best.min(q);
                    near.push(word);
                }
            }
            (best, near)
        })
        .collect();
    let floor = blocks.iter().map(|b| b.0).fold(f64::INFINITY, f64::min);
    let mut exact: Vec<(u64, f64)> = blocks
        .iter()
        .filter(|b| b.0 <= floor + 2.0 * loose)
        .flat_map(|b| b.1.iter().copied())
        .map(|w| (w, quadratic(m, &bits_of(w, k))))
        .collect();
    let value = exact.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    exact.retain(|e| e.1 <= value + 1e-12);
    exact.sort_by_key(|e| e.0);
    Ok(BqpMin { value, argmins: exact.into_iter().map(|e| bits_of(e.0, k)).collect(), scanned: 1 << k })
}

/// Smallest eigenvalue of the dense Hamiltonian.
pub fn dense_ground_energy(h: &ChainHamiltonian, cap: usize) -> Result<f64> {
    lowest_eigenvalue_dense(&h.dense_hamiltonian(cap)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMin {
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Grid points within `near_tol` of the minimum (at most `NEAR_LIMIT`).
    pub near: Vec<(Vec<f64>, Vec<f64>)>,
    pub near_tol: f64,
    pub points: u64,
}

const NEAR_LIMIT: usize = 10_000;

fn grid_point(mut index: u64, res: u64, len: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for slot in v.iter_mut().rev() {
        *slot = (index % (res + 1)) as f64 / res as f64;
        index /= res + 1;
    }
    v
}

/// Minimum of the penalty objective over `{0, 1/res, ..., 1}^{2N}`,
/// evaluated directly from its formula at every grid point.
pub fn grid_min_big(bqp: &BqpInstance, res: u32, near_tol: f64) -> Result<GridMin> {
    if res == 0 {
        return Err(Error::Instance("grid resolution must be positive".into()));
    }
    let n = bqp.n_big();
    let res = res as u64;
    let points = (res + 1).saturating_pow(2 * n as u32);
    if points > GRID_CAP {
        return Err(Error::CapExceeded { requested: points as usize, cap: GRID_CAP as usize });
    }
    let side = (res + 1).pow(n as u32);
    let m = bqp.matrix();
    let k = n - 1;
    let w = 1.0 / (2.0 * (k * k) as f64);
    let ys: Vec<Vec<f64>> = (0..side).map(|j| grid_point(j, res, n)).collect();
    // per x: every (y index, value) within near_tol of the best value for that x
    let per_x: Vec<Vec<(u64, f64)>> = (0..side)
        .into_par_iter()
        .map(|i| {
            let x = grid_point(i, res, n);
            let mut quad = 0.0;
            for a in 0..k {
                for b in 0..k {
                    quad += x[a] * m[(a, b)] * x[b];
                }
            }
            let vals: Vec<f64> = ys
                .iter()
                .map(|y| {
                    let mut f = 0.0;
                    for a in 0..k {
                        f += 2.0 * x[a] * y[a] - x[a] - y[a];
                    }
                    f - x[k] * y[k] + w * quad
                })
                .collect();
            let best = vals.iter().copied().fold(f64::INFINITY, f64::min);
            vals.into_iter().enumerate().filter(|(_, f)| *f <= best + near_tol).map(|(j, f)| (j as u64, f)).collect()
        })
        .collect();
    let mut value = f64::INFINITY;
    let mut arg = (0u64, 0u64);
    for (i, list) in per_x.iter().enumerate() {
        for &(j, f) in list {
            if f < value {
                value = f;
                arg = (i as u64, j);
            }
        }
    }
    let mut near = Vec::new();
    for (i, list) in per_x.iter().enumerate() {
        for &(j, f) in list {
            if f <= value + near_tol && near.len() < NEAR_LIMIT {
                near.push((grid_point(i as u64, res, n), ys[j as usize].clone()));
            }
        }
    }
    Ok(GridMin { value, x: grid_point(arg.0, res, n), y: ys[arg.1 as usize].clone(), near, near_tol, points })
}

#[derive(Debug, Clone)]
pub struct IndicatorCheckOptions {
    /// Random words drawn when the family is too large to scan.
    pub samples: usize,
    pub seed: u64,
    /// Scan every word when `N` is at most this.
    pub exhaustive_limit: usize,
}

impl Default for IndicatorCheckOptions {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 0, exhaustive_limit: EXHAUSTIVE_INDICATOR_LIMIT }
    }
}

/// Sparse rows of one indicator matrix.
type SparseRows = Vec<Vec<(usize, C64)>>;

fn sparse_rows(m: &crate::linalg::CMatrix) -> SparseRows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).filter(|&c| m[(r, c)] != C64::new(0.0, 0.0)).map(|c| (c, m[(r, c)])).collect())
        .collect()
}

/// The `N` rows of `P * prod M` that can be nonzero, i.e. rows `1..=N`.
type Rows = Vec<Vec<C64>>;

fn start_rows(n: usize, dim: usize) -> Rows {
    // P = sum_{k,l} E(k + 1, (k + 1) N + l), 0-based
    (0..n)
        .map(|k| {
            let mut row = vec![C64::new(0.0, 0.0); dim];
            for l in 0..n {
                row[(k + 1) * n + l] = C64::new(1.0, 0.0);
            }
            row
        })
        .collect()
}

fn step(rows: &Rows, m: &SparseRows) -> Rows {
    let dim = m.len();
    rows.iter()
        .map(|row| {
            let mut out = vec![C64::new(0.0, 0.0); dim];
            for (r, &v) in row.iter().enumerate() {
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for &(c, w) in &m[r] {
                    out[c] += v * w;
                }
            }
            out
        })
        .collect()
}

fn is_zero_rows(rows: &Rows) -> bool {
    rows.iter().all(|r| r.iter().all(|z| *z == C64::new(0.0, 0.0)))
}

/// Outcome of one word: `None` for the zero matrix, otherwise every entry
/// above `ENTRY_TOL` as `(row of P, column, value)`.
fn classify(rows: &Rows) -> Vec<(usize, usize, C64)> {
    let mut hits = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if v.norm() > ENTRY_TOL {
                hits.push((k + 1, c, v));
            }
        }
    }
    hits
}

#[derive(Default)]
struct Tally {
    words: u64,
    zero: u64,
    nonzero: Vec<(u64, Vec<(usize, usize, C64)>)>,
}

fn word_string(word: u64, len: usize) -> String {
    (0..len).map(|j| if (word >> j) & 1 == 1 { '1' } else { '0' }).collect()
}

fn dfs(j: usize, word: u64, rows: Rows, sites: &[(SparseRows, SparseRows)], tally: &mut Tally) {
    let len = sites.len();
    if is_zero_rows(&rows) {
        let rest = 1u64 << (len - j);
        tally.words += rest;
        tally.zero += rest;
        return;
    }
    if j == len {
        tally.words += 1;
        let hits = classify(&rows);
        if hits.is_empty() {
            tally.zero += 1;
        } else {
            tally.nonzero.push((word, hits));
        }
        return;
    }
    dfs(j + 1, word, step(&rows, &sites[j].0), sites, tally);
    dfs(j + 1, word | (1 << j), step(&rows, &sites[j].1), sites, tally);
}

fn eval_word(word: u64, start: &Rows, sites: &[(SparseRows, SparseRows)]) -> Vec<(usize, usize, C64)> {
    let mut rows = start.clone();
    for (j, (m1, m2)) in sites.iter().enumerate() {
        rows = step(&rows, if (word >> j) & 1 == 1 { m2 } else { m1 });
        if is_zero_rows(&rows) {
            return Vec::new();
        }
    }
    classify(&rows)
}

/// Checks that `P prod_j M^(j)_{w_j}` is zero or a single matrix unit for
/// every word (or a seeded sample of words), that nonzero outcomes land on
/// distinct positions carrying `gamma * Y`, and that every site pair
/// satisfies the gauge condition.
pub fn verify_indicator_family(fam: &IndicatorFamily, opts: &IndicatorCheckOptions) -> OracleReport {
    let clock = Instant::now();
    let n = fam.n();
    let dim = fam.dim();
    let len = n * n;
    let sites: Vec<(SparseRows, SparseRows)> =
        fam.sites().iter().map(|(a, b)| (sparse_rows(a), sparse_rows(b))).collect();
    let expected = fam.expected_values();
    let digest = Hasher::default()
        .tag("indicator")
        .reals(expected.iter().copied())
        .complex(fam.sites().iter().flat_map(|(a, b)| a.iter().chain(b.iter()).copied().collect::<Vec<_>>()))
        .finish();
    let start = start_rows(n, dim);
    let exhaustive = n <= opts.exhaustive_limit && len < 64;
    let tally = if exhaustive {
        let split = len.min(6);
        let parts: Vec<Tally> = (0u64..1 << split)
            .into_par_iter()
            .map(|prefix| {
                let mut rows = start.clone();
                for j in 0..split {
                    let m = if (prefix >> j) & 1 == 1 { &sites[j].1 } else { &sites[j].0 };
                    rows = step(&rows, m);
                }
                let mut t = Tally::default();
                dfs(split, prefix, rows, &sites, &mut t);
                t
            })
            .collect();
        let mut all = Tally::default();
        for p in parts {
            all.words += p.words;
            all.zero += p.zero;
            all.nonzero.extend(p.nonzero);
        }
        all
    } else {
        let mut words: Vec<u64> = vec![0];
        words.extend((0..len).map(|j| 1u64 << j));
        let extra = opts.samples.saturating_sub(words.len());
        let chunk = 4096;
        let chunks = extra.div_ceil(chunk);
        let sampled: Vec<u64> = (0..chunks)
            .into_par_iter()
            .flat_map_iter(|ci| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(ci as u64));
                let count = chunk.min(extra - ci * chunk);
                (0..count)
                    .map(|i| {
                        if i % 2 == 0 {
                            rng.random::<u64>() & ((1u64 << len) - 1)
                        } else {
                            let ones = rng.random_range(1..=3);
                            (0..ones).fold(0u64, |w, _| w | (1 << rng.random_range(0..len)))
                        }
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        words.extend(sampled);
        let results: Vec<(u64, Vec<(usize, usize, C64)>)> =
            words.par_iter().map(|&w| (w, eval_word(w, &start, &sites))).collect();
        let mut t = Tally::default();
        for (w, hits) in results {
            t.words += 1;
            if hits.is_empty() {
                t.zero += 1;
            } else {
                t.nonzero.push((w, hits));
            }
        }
        t
    };

    let mut failures: Vec<Value> = Vec::new();
    let mut fail = |word: Option<u64>, reason: String| {
        if failures.len() < 20 {
            failures.push(json!({ "word": word.map(|w| word_string(w, len)), "reason": reason }));
        }
    };
    let mut nonzero = tally.nonzero;
    nonzero.sort_by_key(|e| e.0);
    nonzero.dedup_by_key(|e| e.0);
    let mut seen: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut max_value_error: f64 = 0.0;
    let mut failure_count = 0usize;
    for (word, hits) in &nonzero {
        if hits.len() != 1 {
            failure_count += 1;
            fail(Some(*word), format!("{} nonzero entries", hits.len()));
            continue;
        }
        let (r, c, v) = hits[0];
        if let Some(prev) = seen.insert((r, c), *word) {
            failure_count += 1;
            fail(Some(*word), format!("position ({r}, {c}) already produced by {}", word_string(prev, len)));
        }
        if r == 0 || r > n || c >= n {
            failure_count += 1;
            fail(Some(*word), format!("entry at ({r}, {c}) outside the value table"));
            continue;
        }
        let want = expected[(r - 1, c)];
        let err = (v - C64::new(want, 0.0)).norm();
        max_value_error = max_value_error.max(err);
        if err > 1e-12 {
            failure_count += 1;
            fail(Some(*word), format!("value {v} at ({r}, {c}), expected {want}"));
        }
    }
    let expected_nonzero = expected.iter().filter(|v| v.abs() > ENTRY_TOL).count();
    if exhaustive && nonzero.len() != expected_nonzero {
        failure_count += 1;
        fail(None, format!("{} nonzero outcomes, expected {expected_nonzero}", nonzero.len()));
    }
    if !exhaustive {
        // every one-hot word was included; each nonzero table entry must be reached
        for k in 0..n {
            for l in 0..n {
                if expected[(k, l)].abs() > ENTRY_TOL && !seen.contains_key(&(k + 1, l)) {
                    failure_count += 1;
                    fail(None, format!("table entry ({k}, {l}) never produced"));
                }
            }
        }
    }
    let residuals: Vec<f64> =
        fam.sites().iter().map(|(a, b)| identity_deviation(&(a.adjoint() * a + b.adjoint() * b))).collect();
    let max_gauge = residuals.iter().copied().fold(0.0, f64::max);
    for (j, r) in residuals.iter().enumerate() {
        if *r > 1e-12 {
            failure_count += 1;
            fail(None, format!("indicator site {j} gauge residual {r:.3e}"));
        }
    }
    let positions: Vec<Value> = if len <= 16 {
        nonzero
            .iter()
            .filter(|e| e.1.len() == 1)
            .map(|(w, h)| json!({ "word": word_string(*w, len), "row": h[0].0, "col": h[0].1, "value": h[0].2.re }))
            .collect()
    } else {
        Vec::new()
    };
    OracleReport {
        oracle: "indicator-family".into(),
        input_digest: digest,
        passed: Some(failure_count == 0),
        exhaustive,
        payload: json!({
            "N": n,
            "D": dim,
            "gamma": fam.gamma(),
            "words_checked": tally.words,
            "zero_outcomes": tally.zero,
            "nonzero_outcomes": nonzero.len(),
            "expected_nonzero": expected_nonzero,
            "max_value_error": max_value_error,
            "max_gauge_residual": max_gauge,
            "failure_count": failure_count,
            "failures": failures,
            "positions": positions,
        }),
        wall_time_s: Some(clock.elapsed().as_secs_f64()),
    }
}

/// Gauge residual of every fixed site of an instance.
pub fn fixed_gauge_check(inst: &ReductionInstance, tol: f64) -> OracleReport {
    let clock = Instant::now();
    let residuals = inst.fixed_site_residuals();
    let failing: Vec<Value> =
        residuals.iter().filter(|r| !(r.1 <= tol)).map(|(j, r)| json!({ "site": j, "residual": r })).collect();
    let worst = residuals.iter().map(|r| r.1).fold(0.0, f64::max);
    let digest = Hasher::default()
        .tag("fixed-sites")
        .complex(
            inst.state()
                .sites()
                .iter()
                .flat_map(|s| s.matrices().iter().flat_map(|m| m.iter().copied()).collect::<Vec<_>>()),
        )
        .finish();
    OracleReport {
        oracle: "fixed-gauge".into(),
        input_digest: digest,
        passed: Some(failing.is_empty()),
        exhaustive: true,
        payload: json!({ "sites": residuals.len(), "tolerance": tol, "max_residual": worst, "failing": failing }),
        wall_time_s: Some(clock.elapsed().as_secs_f64()),
    }
}

/// Per-window energies for `samples` random `(c, d)`. Gated on the
/// structural zeros of tail windows and on window sums matching the MPO
/// energy; everything else is recorded as a finding.
pub fn windows_decomposition_check(inst: &ReductionInstance, samples: usize, seed: u64) -> Result<OracleReport> {
    let clock = Instant::now();
    let n = inst.n_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        (0..n)
            .map(|_| {
                let r: f64 = rng.random::<f64>();
                let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                C64::from_polar(r, phi)
            })
            .collect()
    };
    let points: Vec<(Vec<C64>, Vec<C64>)> = (0..samples).map(|_| (draw(&mut rng), draw(&mut rng))).collect();
    let y_table = inst.penalty().matrix();
    let kinds = inst.window_kinds();
    let records: Vec<Result<Value>> = points
        .par_iter()
        .map(|(cv, dv)| {
            let psi = inst.state_with(cv, dv)?;
            let energy = psi.energy(inst.hamiltonian())?;
            let profile = inst.profile_of(&psi)?;
            let sum: f64 = profile.iter().map(|w| w.energy).sum();
            let by_kind = |k: WindowKind| profile.iter().filter(|w| w.kind == k).map(|w| w.energy).sum::<f64>();
            let tail_max = profile.iter().filter(|w| w.kind == WindowKind::Tail).map(|w| w.energy.abs()).fold(0.0, f64::max);
            let x: Vec<f64> = cv.iter().map(|z| z.norm_sqr()).collect();
            let y: Vec<f64> = dv.iter().map(|z| z.norm_sqr()).collect();
            let shortcut = inst.shortcut_energy(&x, &y)?;
            let mut literal = 0.0;
            for k in 0..n {
                for l in 0..n {
                    literal += x[k] * y_table[(k, l)] * y[l];
                }
            }
            literal /= n as f64;
            let objective = crate::reduction::big_objective(&x, &y, inst.bqp())?;
            Ok(json!({
                "energy": energy,
                "window_sum": sum,
                "additivity_error": (sum - energy).abs(),
                "tail_max_abs": tail_max,
                "left_center": by_kind(WindowKind::LeftCenter),
                "right_center": by_kind(WindowKind::RightCenter),
                "boundary": by_kind(WindowKind::Boundary),
                "shortcut": shortcut,
                "literal_identity": literal,
                "objective": objective,
                "profile": profile.iter().map(|w| w.energy).collect::<Vec<_>>(),
            }))
        })
        .collect();
    let records: Vec<Value> = records.into_iter().collect::<Result<_>>()?;
    let get = |r: &Value, key: &str| r[key].as_f64().unwrap_or(f64::NAN);
    let tail_max = records.iter().map(|r| get(r, "tail_max_abs")).fold(0.0, f64::max);
    let additivity = records.iter().map(|r| get(r, "additivity_error")).fold(0.0, f64::max);
    let literal_gap = records.iter().map(|r| (get(r, "energy") - get(r, "literal_identity")).abs()).fold(0.0, f64::max);
    let shortcut_gap = records.iter().map(|r| (get(r, "energy") - get(r, "shortcut")).abs()).fold(0.0, f64::max);
    let rc_max = records.iter().map(|r| get(r, "right_center").abs()).fold(0.0, f64::max);
    let lc_min = records.iter().map(|r| get(r, "left_center")).fold(f64::INFINITY, f64::min);
    let (sxy, sxx) = records.iter().fold((0.0, 0.0), |(a, b), r| {
        let (e, s) = (get(r, "energy"), get(r, "shortcut"));
        (a + e * s, b + s * s)
    });
    let ratio = if sxx > 0.0 { Some(sxy / sxx) } else { None };
    let passed = tail_max <= 1e-12 && additivity <= 1e-12;
    let digest = Hasher::default()
        .tag("windows")
        .reals([seed as f64, samples as f64])
        .reals(inst.bqp().matrix().iter().copied())
        .finish();
    let layout = inst.layout();
    Ok(OracleReport {
        oracle: "windows-decomposition".into(),
        input_digest: digest,
        passed: Some(passed),
        exhaustive: false,
        payload: json!({
            "N": n,
            "D": layout.dim,
            "m": layout.m,
            "n": layout.sites,
            "kappa": inst.kappa(),
            "gamma": inst.gamma(),
            "gamma_requested": inst.gamma_requested(),
            "y_scale": inst.penalty().y_scale,
            "samples": samples,
            "seed": seed,
            "window_kinds": kinds,
            "tail_windows": kinds.iter().filter(|k| **k == WindowKind::Tail).count(),
            "tail_max_abs": tail_max,
            "additivity_max_error": additivity,
            "findings": {
                "literal_identity_observed": literal_gap <= 1e-9,
                "literal_identity_max_gap": literal_gap,
                "shortcut_identity_observed": shortcut_gap <= 1e-9,
                "shortcut_max_gap": shortcut_gap,
                "chain_over_shortcut_fit": ratio,
                "right_center_contributes": rc_max > 1e-12,
                "right_center_max_abs": rc_max,
                "left_center_min": lc_min,
                "signed_objective_representable": false,
            },
            "records": records,
        }),
        wall_time_s: Some(clock.elapsed().as_secs_f64()),
    })
}

/// Digest of a BQP matrix, as used in oracle reports.
pub fn bqp_input_digest(bqp: &BqpInstance) -> String {
    bqp_digest(bqp)
}

/// `bqp_min` wrapped as a report.
pub fn bqp_min_report(bqp: &BqpInstance) -> Result<OracleReport> {
    let clock = Instant::now();
    let r = bqp_min(bqp)?;
    Ok(OracleReport {
        oracle: "bqp-min".into(),
        input_digest: bqp_digest(bqp),
        passed: None,
        exhaustive: true,
        payload: serde_json::to_value(&r)?,
        wall_time_s: Some(clock.elapsed().as_secs_f64()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduction::{bit_strings, build_indicator_family};

    #[test]
    fn bqp_min_examples() {
        let one = BqpInstance::from_rows(&[vec![-1.0]]).unwrap();
        let r = bqp_min(&one).unwrap();
        assert_eq!((r.value, r.argmins.clone()), (-1.0, vec![vec![1]]));
        let tied = BqpInstance::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let r = bqp_min(&tied).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.argmins, vec![vec![0, 0], vec![1, 1]]);
        let zero = BqpInstance::new(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(bqp_min(&zero).unwrap().argmins.len(), 8);
    }

    #[test]
    fn gray_code_scan_matches_direct_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = 14;
        let m = DMatrix::from_fn(k, k, |_, _| rng.random_range(-1.0..1.0));
        let bqp = BqpInstance::new(m).unwrap();
        let fast = bqp_min(&bqp).unwrap();
        let slow = bit_strings(k).map(|b| bqp.value(&b)).fold(f64::INFINITY, f64::min);
        assert!((fast.value - slow).abs() < 1e-12);
        assert_eq!(bqp.value(&fast.argmins[0]), slow);
    }

    #[test]
    fn grid_examples() {
        let zero = BqpInstance::from_rows(&[vec![0.0]]).unwrap();
        let g = grid_min_big(&zero, 4, 1e-9).unwrap();
        assert_eq!(g.value, -2.0);
        assert_eq!(g.near.len(), 2);
        let corners = grid_min_big(&zero, 1, 0.0).unwrap();
        assert_eq!(corners.points, 16);
        assert!(grid_min_big(&zero, 200, 0.0).is_err());
    }

    #[test]
    fn dense_two_site_tfi() {
        let h = ChainHamiltonian::tfi(2, 1.0, true).unwrap();
        let e = dense_ground_energy(&h, 1 << 10).unwrap();
        assert!((e + 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn indicator_fault_is_located() {
        let y = DMatrix::from_element(2, 2, 0.5);
        let good = build_indicator_family(&y, 1.0).unwrap();
        let r = verify_indicator_family(&good, &IndicatorCheckOptions::default());
        assert_eq!(r.passed, Some(true), "{}", r.payload);
        assert!(r.exhaustive);
        assert_eq!(r.payload["words_checked"], 16);
        let mut bad = good.clone();
        let (k, l) = (1, 0);
        bad.sites_mut()[k * 2 + l].1[((k + 1) * 2 + l, l)] += C64::new(1e-3, 0.0);
        let r = verify_indicator_family(&bad, &IndicatorCheckOptions::default());
        assert_eq!(r.passed, Some(false));
        let failures = r.payload["failures"].as_array().unwrap();
        assert!(failures.iter().any(|f| f["word"] == "0010"), "{failures:?}");
    }

    #[test]
    fn sampled_mode_is_not_exhaustive() {
        let y = DMatrix::from_element(2, 2, 0.3);
        let fam = build_indicator_family(&y, 1.0).unwrap();
        let opts = IndicatorCheckOptions { samples: 200, seed: 1, exhaustive_limit: 1 };
        let r = verify_indicator_family(&fam, &opts);
        assert!(!r.exhaustive);
        assert_eq!(r.passed, Some(true), "{}", r.payload);
    }
}
