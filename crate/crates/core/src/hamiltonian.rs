//! r-local, translationally invariant chain Hamiltonians
//! `H = sum_{i=0}^{n-r} h^(i)` with open boundaries.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_deviation, identity, kron, CMatrix, C64, ZERO};

const HERMITIAN_TOL: f64 = 1e-12;

/// Matrix of a local term. Diagonal terms keep only their nonzero entries,
/// indexed by big-endian window configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum TermMatrix {
    Dense(CMatrix),
    Diagonal(Vec<(usize, f64)>),
}

/// A Hermitian operator acting on `r` consecutive sites of dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTerm {
    r: usize,
    d: usize,
    matrix: TermMatrix,
}

impl LocalTerm {
    pub fn dense(r: usize, d: usize, matrix: CMatrix) -> Result<Self> {
        let dim = checked_dim(r, d)?;
        if matrix.shape() != (dim, dim) {
            return Err(Error::Shape(format!(
                "term on {r} sites of dimension {d} must be {dim}x{dim}, got {:?}",
                matrix.shape()
            )));
        }
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { r, d, matrix: TermMatrix::Dense(matrix) })
    }

    /// A diagonal term from `(configuration index, value)` pairs. Repeated
    /// indices are summed; zeros are dropped.
    pub fn diagonal(r: usize, d: usize, entries: &[(usize, f64)]) -> Result<Self> {
        let dim = checked_dim(r, d)?;
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for &(index, value) in entries {
            if index >= dim {
                return Err(Error::Shape(format!("diagonal index {index} >= {dim}")));
            }
            if !value.is_finite() {
                return Err(Error::Shape(format!("diagonal value at {index} is not finite")));
            }
            *merged.entry(index).or_insert(0.0) += value;
        }
        let entries = merged.into_iter().filter(|&(_, v)| v != 0.0).collect();
        Ok(Self { r, d, matrix: TermMatrix::Diagonal(entries) })
    }

    pub fn identity(r: usize, d: usize) -> Result<Self> {
        let dim = checked_dim(r, d)?;
        let entries: Vec<(usize, f64)> = (0..dim).map(|i| (i, 1.0)).collect();
        Self::diagonal(r, d, &entries)
    }

    /// `h = sum_{alpha..xi} h_{alpha..xi} sigma_alpha (x) ... (x) sigma_xi` over
    /// an operator basis of `d x d` matrices. Keys are the basis indices of
    /// each factor, one per site of the window.
    pub fn from_basis_coefficients(coefficients: &BTreeMap<Vec<usize>, C64>, basis: &[CMatrix]) -> Result<Self> {
        let first = basis.first().ok_or_else(|| Error::Shape("empty operator basis".into()))?;
        let d = first.nrows();
        if basis.iter().any(|b| b.shape() != (d, d)) {
            return Err(Error::Shape("basis operators must all be d x d".into()));
        }
        let r = coefficients
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| Error::Shape("no coefficients given".into()))?;
        if r == 0 {
            return Err(Error::Shape("coefficient keys must name at least one site".into()));
        }
        let dim = checked_dim(r, d)?;
        let mut total = CMatrix::zeros(dim, dim);
        for (key, &coef) in coefficients {
            if key.len() != r {
                return Err(Error::Shape(format!("mixed locality in coefficient keys ({} vs {r})", key.len())));
            }
            if let Some(&bad) = key.iter().find(|&&k| k >= basis.len()) {
                return Err(Error::Shape(format!("basis index {bad} out of range")));
            }
            let product = key[1..]
                .iter()
                .fold(basis[key[0]].clone(), |acc, &k| kron(&acc, &basis[k]));
            total += product * coef;
        }
        Self::dense(r, d, total)
    }

    /// The 6-local, 4-level term `sum_{k=1}^{4} |k><k|^(x)6`.
    pub fn projector() -> Self {
        let r = 6;
        let d: usize = 4;
        // |kkkkkk> sits at (k-1) * (1 + 4 + ... + 4^5)
        let stride: usize = (0..r).map(|p| d.pow(p as u32)).sum();
        let entries: Vec<(usize, f64)> = (0..d).map(|k| (k * stride, 1.0)).collect();
        Self::diagonal(r, d, &entries).expect("valid projector")
    }

    /// Transverse-field Ising bond term `-Z(x)Z - (g/2)(X(x)1 + 1(x)X)`.
    pub fn tfi(g: f64) -> Self {
        let (x, z) = (pauli_x(), pauli_z());
        let id = identity(2);
        let m = -kron(&z, &z) - (kron(&x, &id) + kron(&id, &x)) * c(g / 2.0);
        Self::dense(2, 2, m).expect("TFI term is Hermitian")
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn dim(&self) -> usize {
        self.d.pow(self.r as u32)
    }

    pub fn matrix(&self) -> &TermMatrix {
        &self.matrix
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.matrix, TermMatrix::Diagonal(_))
    }

    pub fn to_dense_matrix(&self) -> CMatrix {
        match &self.matrix {
            TermMatrix::Dense(m) => m.clone(),
            TermMatrix::Diagonal(entries) => {
                let dim = self.dim();
                let mut m = CMatrix::zeros(dim, dim);
                for &(i, v) in entries {
                    m[(i, i)] = c(v);
                }
                m
            }
        }
    }

    /// `trace(h)`.
    pub fn trace(&self) -> f64 {
        match &self.matrix {
            TermMatrix::Dense(m) => m.diagonal().iter().map(|z| z.re).sum(),
            TermMatrix::Diagonal(entries) => entries.iter().map(|e| e.1).sum(),
        }
    }

    /// `h` as a chain of `r` operator-valued factors `F_k[a, b]`, with
    /// `F_0` having a single left index and `F_{r-1}` a single right index.
    /// Each factor entry is a sparse `d x d` operator `(s, s', value)`.
    pub(crate) fn operator_chain(&self) -> Vec<Factor> {
        match &self.matrix {
            TermMatrix::Diagonal(entries) => diagonal_chain(self.r, self.d, entries),
            TermMatrix::Dense(m) => dense_chain(self.r, self.d, m),
        }
    }
}

pub(crate) type SparseOp = Vec<(usize, usize, C64)>;

/// One factor of an operator chain: `(left index, right index, operator)`.
#[derive(Debug, Clone)]
pub(crate) struct Factor {
    pub left_dim: usize,
    pub right_dim: usize,
    pub entries: Vec<(usize, usize, SparseOp)>,
}

fn diagonal_chain(r: usize, d: usize, entries: &[(usize, f64)]) -> Vec<Factor> {
    let terms = entries.len().max(1);
    let configs: Vec<(Vec<usize>, f64)> =
        entries.iter().map(|&(i, v)| (crate::mps::digits_of(i, d, r), v)).collect();
    if r == 1 {
        let op: SparseOp = configs.iter().map(|(s, v)| (s[0], s[0], c(*v))).collect();
        return vec![Factor { left_dim: 1, right_dim: 1, entries: vec![(0, 0, op)] }];
    }
    let mut chain = Vec::with_capacity(r);
    for k in 0..r {
        let left_dim = if k == 0 { 1 } else { terms };
        let right_dim = if k == r - 1 { 1 } else { terms };
        let entries = configs
            .iter()
            .enumerate()
            .map(|(t, (s, v))| {
                let weight = if k == 0 { *v } else { 1.0 };
                let a = if k == 0 { 0 } else { t };
                let b = if k == r - 1 { 0 } else { t };
                (a, b, vec![(s[k], s[k], c(weight))])
            })
            .collect();
        chain.push(Factor { left_dim, right_dim, entries });
    }
    chain
}

/// Operator Schmidt decomposition by successive SVDs.
fn dense_chain(r: usize, d: usize, m: &CMatrix) -> Vec<Factor> {
    let dd = d * d;
    if r == 1 {
        return vec![Factor { left_dim: 1, right_dim: 1, entries: vec![(0, 0, sparse_op(m))] }];
    }
    // t[p_0 ... p_{r-1}] with p_k = s_k * d + s'_k, big-endian
    let total = dd.pow(r as u32);
    let mut t = vec![ZERO; total];
    let dim = d.pow(r as u32);
    for row in 0..dim {
        let s = crate::mps::digits_of(row, d, r);
        for col in 0..dim {
            let v = m[(row, col)];
            if v == ZERO {
                continue;
            }
            let sp = crate::mps::digits_of(col, d, r);
            let idx = (0..r).fold(0, |acc, k| acc * dd + s[k] * d + sp[k]);
            t[idx] = v;
        }
    }
    let mut chain = Vec::with_capacity(r);
    let mut chi = 1usize;
    let mut rest = total / dd;
    let mut current = CMatrix::from_row_slice(chi * dd, rest, &t);
    for _ in 0..(r - 1) {
        let svd = current.clone().svd(true, true);
        let u = svd.u.expect("u");
        let vt = svd.v_t.expect("v_t");
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > 1e-14 * smax && svd.singular_values[i] > 0.0)
            .collect();
        let keep = if keep.is_empty() { vec![0] } else { keep };
        let new_chi = keep.len();
        let mut entries = Vec::new();
        for a in 0..chi {
            for (bi, &b) in keep.iter().enumerate() {
                let op: SparseOp = (0..dd)
                    .filter_map(|p| {
                        let v = u[(a * dd + p, b)];
                        (v != ZERO).then_some((p / d, p % d, v))
                    })
                    .collect();
                if !op.is_empty() {
                    entries.push((a, bi, op));
                }
            }
        }
        chain.push(Factor { left_dim: chi, right_dim: new_chi, entries });
        rest /= dd;
        let mut next = CMatrix::zeros(new_chi * dd, rest);
        for (bi, &b) in keep.iter().enumerate() {
            let s = svd.singular_values[b];
            for p in 0..dd {
                for q in 0..rest {
                    next[(bi * dd + p, q)] = vt[(b, p * rest + q)] * s;
                }
            }
        }
        chi = new_chi;
        current = next;
    }
    let mut entries = Vec::new();
    for a in 0..chi {
        let op: SparseOp = (0..dd)
            .filter_map(|p| {
                let v = current[(a * dd + p, 0)];
                (v != ZERO).then_some((p / d, p % d, v))
            })
            .collect();
        if !op.is_empty() {
            entries.push((a, 0, op));
        }
    }
    chain.push(Factor { left_dim: chi, right_dim: 1, entries });
    chain
}

pub(crate) fn sparse_op(m: &CMatrix) -> SparseOp {
    let mut op = Vec::new();
    for s in 0..m.nrows() {
        for sp in 0..m.ncols() {
            if m[(s, sp)] != ZERO {
                op.push((s, sp, m[(s, sp)]));
            }
        }
    }
    op
}

fn checked_dim(r: usize, d: usize) -> Result<usize> {
    if r == 0 || d == 0 {
        return Err(Error::Shape("locality and local dimension must be positive".into()));
    }
    d.checked_pow(r as u32)
        .filter(|&dim| dim <= 1 << 24)
        .ok_or_else(|| Error::Shape(format!("d^r = {d}^{r} is too large for an explicit term")))
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, c(1.0), c(1.0), ZERO])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), ZERO, ZERO, c(-1.0)])
}

/// Single-site operators added on the first and last site.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFields {
    pub first: CMatrix,
    pub last: CMatrix,
}

/// `H = sum_{i=0}^{n-r} h^(i)` plus optional edge fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainHamiltonian {
    term: LocalTerm,
    n: usize,
    edges: Option<EdgeFields>,
}

impl ChainHamiltonian {
    pub fn new(term: LocalTerm, n: usize) -> Result<Self> {
        if n < term.r() {
            return Err(Error::Shape(format!("chain of {n} sites is shorter than the term locality {}", term.r())));
        }
        Ok(Self { term, n, edges: None })
    }

    pub fn with_edges(mut self, first: CMatrix, last: CMatrix) -> Result<Self> {
        let d = self.term.d();
        for op in [&first, &last] {
            if op.shape() != (d, d) {
                return Err(Error::Shape(format!("edge field must be {d}x{d}")));
            }
            let deviation = hermitian_deviation(op);
            if deviation > HERMITIAN_TOL {
                return Err(Error::NotHermitian { deviation });
            }
        }
        self.edges = Some(EdgeFields { first, last });
        Ok(self)
    }

    /// Transverse-field Ising chain. With `boundary_corrected`, the end sites
    /// receive the missing half field so every site sees `-g X`.
    pub fn tfi(n: usize, g: f64, boundary_corrected: bool) -> Result<Self> {
        let chain = Self::new(LocalTerm::tfi(g), n)?;
        if boundary_corrected {
            let half = pauli_x() * c(-g / 2.0);
            chain.with_edges(half.clone(), half)
        } else {
            Ok(chain)
        }
    }

    pub fn term(&self) -> &LocalTerm {
        &self.term
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.term.d()
    }

    pub fn r(&self) -> usize {
        self.term.r()
    }

    pub fn edges(&self) -> Option<&EdgeFields> {
        self.edges.as_ref()
    }

    pub fn window_count(&self) -> usize {
        self.n - self.term.r() + 1
    }

    /// Dense `d^n x d^n` matrix, big-endian. `cap` bounds the dimension.
    pub fn dense_hamiltonian(&self, cap: usize) -> Result<CMatrix> {
        let d = self.d();
        let dim = (d as f64).powi(self.n as i32);
        if dim > cap as f64 {
            return Err(Error::CapExceeded { requested: dim.min(usize::MAX as f64) as usize, cap });
        }
        let dim = dim as usize;
        let h = self.term.to_dense_matrix();
        let r = self.r();
        let mut total = CMatrix::zeros(dim, dim);
        for start in 0..self.window_count() {
            let left = d.pow(start as u32);
            let right = d.pow((self.n - start - r) as u32);
            total += kron(&kron(&identity(left), &h), &identity(right));
        }
        if let Some(edges) = &self.edges {
            let rest = d.pow((self.n - 1) as u32);
            total += kron(&edges.first, &identity(rest));
            total += kron(&identity(rest), &edges.last);
        }
        Ok(total)
    }

    /// `H v` for a dense big-endian vector, without forming `H`.
    pub fn apply_dense(&self, v: &[C64]) -> Result<Vec<C64>> {
        let d = self.d();
        let dim = d.checked_pow(self.n as u32).ok_or(Error::CapExceeded { requested: usize::MAX, cap: usize::MAX })?;
        if v.len() != dim {
            return Err(Error::Shape(format!("vector of length {} for dimension {dim}", v.len())));
        }
        let mut out = vec![ZERO; dim];
        let r = self.r();
        let h = self.term.to_dense_matrix();
        let block = d.pow(r as u32);
        for start in 0..self.window_count() {
            apply_block(&h, v, &mut out, d.pow((self.n - start - r) as u32), block);
        }
        if let Some(edges) = &self.edges {
            apply_block(&edges.first, v, &mut out, d.pow((self.n - 1) as u32), d);
            apply_block(&edges.last, v, &mut out, 1, d);
        }
        Ok(out)
    }
}

/// Adds `(1 (x) op (x) 1_inner) v` to `out`, where `inner` is the dimension
/// of the factors to the right of `op`.
fn apply_block(op: &CMatrix, v: &[C64], out: &mut [C64], inner: usize, block: usize) {
    let stride = block * inner;
    let outer = v.len() / stride;
    let nz: Vec<(usize, usize, C64)> = sparse_op(op);
    for o in 0..outer {
        for i in 0..inner {
            let base = o * stride + i;
            for &(s, sp, val) in &nz {
                out[base + s * inner] += val * v[base + sp * inner];
            }
        }
    }
}
