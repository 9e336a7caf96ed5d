use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the `[-1, 1]` entry bound and the unit box.
pub const BOX_TOL: f64 = 1e-12;

/// Where a BQP instance came from; needed to map values back to the
/// original problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BqpSource {
    Matrix,
    Qubo,
    Clique { vertices: usize, edges: usize, penalty: f64 },
    IndependentSet { vertices: usize, edges: usize, penalty: f64 },
}

/// Minimize `b M b^T` over binary `b` of length `N - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BqpInstance {
    m: DMatrix<f64>,
    /// Original objective = `scale * b M b^T`.
    scale: f64,
    source: BqpSource,
}

impl BqpInstance {
    /// Symmetrizes `m` and checks `|M_ij| <= 1`.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_source(m, 1.0, BqpSource::Matrix)
    }

    pub fn with_source(m: DMatrix<f64>, scale: f64, source: BqpSource) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::Instance(format!("M must be square and nonempty, got {}x{}", m.nrows(), m.ncols())));
        }
        if let Some(v) = m.iter().find(|v| !v.is_finite()) {
            return Err(Error::Instance(format!("non-finite entry {v}")));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::Instance(format!("scale must be positive, got {scale}")));
        }
        let sym = (&m + m.transpose()) * 0.5;
        if let Some(v) = sym.iter().find(|v| v.abs() > 1.0 + BOX_TOL) {
            return Err(Error::Instance(format!("entry {v} outside [-1, 1]")));
        }
        Ok(Self { m: sym.map(|v| v.clamp(-1.0, 1.0)), scale, source })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(Error::Instance("M rows must all have length N - 1".into()));
        }
        Self::new(DMatrix::from_fn(k, k, |i, j| rows[i][j]))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Number of binary variables, `N - 1`.
    pub fn vars(&self) -> usize {
        self.m.nrows()
    }

    /// `N`, one more than the number of binary variables.
    pub fn n_big(&self) -> usize {
        self.m.nrows() + 1
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn source(&self) -> &BqpSource {
        &self.source
    }

    /// `b M b^T` for a 0/1 vector.
    pub fn value(&self, bits: &[u8]) -> f64 {
        let k = self.vars();
        let mut total = 0.0;
        for i in 0..k {
            if bits[i] == 0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..k {
                if bits[j] != 0 {
                    row += self.m[(i, j)];
                }
            }
            total += row;
        }
        total
    }

    /// Value in the units of the original problem.
    pub fn unscaled(&self, value: f64) -> f64 {
        value * self.scale
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.vars()).map(|i| self.m.row(i).iter().copied().collect()).collect()
    }
}

/// All `2^k` bit strings of length `k`, most significant bit first, in
/// lexicographic order.
pub fn bit_strings(k: usize) -> impl Iterator<Item = Vec<u8>> {
    (0u64..(1u64 << k)).map(move |v| (0..k).map(|i| ((v >> (k - 1 - i)) & 1) as u8).collect())
}

fn check_box(name: &str, v: &[f64]) -> Result<()> {
    for (i, &t) in v.iter().enumerate() {
        if !(t >= -BOX_TOL && t <= 1.0 + BOX_TOL) {
            return Err(Error::Box(format!("{name}[{i}] = {t}")));
        }
    }
    Ok(())
}

/// The penalty objective
/// `f(x, y) = 2 sum_{k<N} x_k y_k - sum_{k<N} (x_k + y_k) - x_N y_N + x' M x'^T / (2 (N-1)^2)`
/// over `x, y` in `[0, 1]^N`, where `x'` drops the last coordinate. Indices
/// here are 0-based, so the distinguished coordinate is `N - 1`.
pub fn big_objective(x: &[f64], y: &[f64], bqp: &BqpInstance) -> Result<f64> {
    let n = bqp.n_big();
    if x.len() != n || y.len() != n {
        return Err(Error::Shape(format!("x and y need {n} entries, got {} and {}", x.len(), y.len())));
    }
    check_box("x", x)?;
    check_box("y", y)?;
    let k = n - 1;
    let mut f = 0.0;
    for i in 0..k {
        f += 2.0 * x[i] * y[i] - x[i] - y[i];
    }
    f -= x[k] * y[k];
    let m = bqp.matrix();
    let mut quad = 0.0;
    for i in 0..k {
        let mut row = 0.0;
        for j in 0..k {
            row += m[(i, j)] * x[j];
        }
        quad += x[i] * row;
    }
    Ok(f + quad / (2.0 * (k * k) as f64))
}

/// A minimizer of the penalty objective: `x = (b, 1)`, `y = (1 - b, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub bits: Vec<u8>,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Witness {
    pub fn from_bits(bits: &[u8]) -> Self {
        let mut x: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
        let mut y: Vec<f64> = bits.iter().map(|&b| 1.0 - b as f64).collect();
        x.push(1.0);
        y.push(1.0);
        Self { bits: bits.to_vec(), x, y }
    }

    /// Checks `y_k = 1 - x_k` with `x_k` binary for `k < N - 1` and
    /// `x_N = y_N = 1`.
    pub fn satisfies_conditions(x: &[f64], y: &[f64]) -> bool {
        let k = x.len() - 1;
        (0..k).all(|i| (x[i] == 0.0 || x[i] == 1.0) && y[i] == 1.0 - x[i]) && x[k] == 1.0 && y[k] == 1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BigMinimum {
    pub value: f64,
    pub binary_minimum: f64,
    /// Every binary witness, in lexicographic order of `bits`.
    pub witnesses: Vec<Witness>,
}

/// `min f = -N + min_b(b M b^T) / (2 (N-1)^2)` together with all witnesses.
pub fn big_minimum(bqp: &BqpInstance) -> Result<BigMinimum> {
    let oracle = crate::oracles::bqp_min(bqp)?;
    let n = bqp.n_big();
    let k = n - 1;
    let value = -(n as f64) + oracle.value / (2.0 * (k * k) as f64);
    let witnesses = oracle.argmins.iter().map(|b| Witness::from_bits(b)).collect();
    Ok(BigMinimum { value, binary_minimum: oracle.value, witnesses })
}

/// Signed bilinear table `S` with `x S y^T = f(x, y)` whenever `y_k = 1 - x_k`
/// for `k < N - 1` and `x_N = y_N = 1`.
pub fn penalty_surrogate(bqp: &BqpInstance) -> DMatrix<f64> {
    let n = bqp.n_big();
    let k = n - 1;
    let w = 1.0 / (2.0 * (k * k) as f64);
    let m = bqp.matrix();
    let mut s = DMatrix::zeros(n, n);
    for a in 0..k {
        for b in 0..k {
            s[(a, b)] = if a == b { 2.0 } else { 0.0 } - w * m[(a, b)];
        }
        s[(a, k)] = -1.0 + w * m.row(a).iter().sum::<f64>();
        s[(k, a)] = -1.0;
    }
    s[(k, k)] = -1.0;
    s
}

/// Nonnegative magnitude table stored in the chain, `Y = |S| / y_scale`
/// with `y_scale = max |S| + 1`, plus the signs that were dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyTable {
    pub y: Vec<Vec<f64>>,
    pub signs: Vec<Vec<i8>>,
    pub y_scale: f64,
}

impl PenaltyTable {
    pub fn from_bqp(bqp: &BqpInstance) -> Self {
        let s = penalty_surrogate(bqp);
        let n = s.nrows();
        let y_scale = s.iter().fold(0.0f64, |a, v| a.max(v.abs())) + 1.0;
        let y = (0..n).map(|a| (0..n).map(|b| s[(a, b)].abs() / y_scale).collect()).collect();
        let signs = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| match s[(a, b)] {
                        v if v > 0.0 => 1,
                        v if v < 0.0 => -1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        Self { y, signs, y_scale }
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.y.len();
        DMatrix::from_fn(n, n, |a, b| self.y[a][b])
    }

    /// `y_scale * sum_{kl} sign_kl Y_kl x_k y_l`, which equals the penalty
    /// objective on witnesses.
    pub fn signed_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let n = self.y.len();
        let mut t = 0.0;
        for a in 0..n {
            for b in 0..n {
                t += self.signs[a][b] as f64 * self.y[a][b] * x[a] * y[b];
            }
        }
        t * self.y_scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_examples() {
        let zero = BqpInstance::from_rows(&[vec![0.0]]).unwrap();
        assert_eq!(big_objective(&[0.0, 0.0], &[0.0, 0.0], &zero).unwrap(), 0.0);
        assert_eq!(big_objective(&[0.0, 1.0], &[1.0, 1.0], &zero).unwrap(), -2.0);
        let ones = BqpInstance::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(big_objective(&[0.0, 0.0, 1.0], &[1.0, 1.0, 1.0], &ones).unwrap(), -3.0);
        assert!(matches!(big_objective(&[1.5, 0.0], &[0.0, 0.0], &zero), Err(Error::Box(_))));
    }

    #[test]
    fn asymmetric_input_is_symmetrized() {
        let b = BqpInstance::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(b.matrix()[(0, 1)], 0.5);
        assert_eq!(b.matrix()[(1, 0)], 0.5);
        assert!(BqpInstance::from_rows(&[vec![2.0]]).is_err());
    }

    #[test]
    fn surrogate_matches_objective_on_witnesses() {
        let b = BqpInstance::from_rows(&[
            vec![0.3, -0.7, 0.1],
            vec![-0.7, -1.0, 0.4],
            vec![0.1, 0.4, 0.9],
        ])
        .unwrap();
        let s = penalty_surrogate(&b);
        let table = PenaltyTable::from_bqp(&b);
        for bits in bit_strings(3) {
            let w = Witness::from_bits(&bits);
            let f = big_objective(&w.x, &w.y, &b).unwrap();
            let mut bil = 0.0;
            for i in 0..4 {
                for j in 0..4 {
                    bil += w.x[i] * s[(i, j)] * w.y[j];
                }
            }
            assert!((f - bil).abs() < 1e-12);
            assert!((f - table.signed_form(&w.x, &w.y)).abs() < 1e-12);
        }
        assert!(table.y.iter().flatten().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn bit_strings_are_lexicographic() {
        let all: Vec<Vec<u8>> = bit_strings(2).collect();
        assert_eq!(all, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }
}
