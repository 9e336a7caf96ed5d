//! JSON documents. Floats are written in shortest round-trip form, so
//! reading a written document reproduces every tensor bit for bit.

use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{ChainHamiltonian, LocalTerm, TermMatrix};
use crate::linalg::{CMatrix, C64};
use crate::mps::{MatrixProductState, SiteTensor};
use crate::reduction::{
    kappa, AffineRecord, BqpInstance, BqpSource, Layout, PenaltyTable, ReductionInstance,
};

pub const INSTANCE_VERSION: u32 = 1;

/// A complex matrix, dense (row-major `re`/`im`) or as a list of nonzero
/// `[row, col, re, im]` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixDoc {
    Sparse { rows: usize, cols: usize, entries: Vec<(usize, usize, f64, f64)> },
    Dense { rows: usize, cols: usize, re: Vec<f64>, im: Vec<f64> },
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let zero = C64::new(0.0, 0.0);
        let nnz = m.iter().filter(|z| **z != zero).count();
        if 2 * nnz < rows * cols {
            let mut entries = Vec::with_capacity(nnz);
            for r in 0..rows {
                for c in 0..cols {
                    let z = m[(r, c)];
                    if z != zero {
                        entries.push((r, c, z.re, z.im));
                    }
                }
            }
            Self::Sparse { rows, cols, entries }
        } else {
            let mut re = Vec::with_capacity(rows * cols);
            let mut im = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    re.push(m[(r, c)].re);
                    im.push(m[(r, c)].im);
                }
            }
            Self::Dense { rows, cols, re, im }
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        match self {
            Self::Sparse { rows, cols, entries } => {
                let mut m = CMatrix::zeros(*rows, *cols);
                for &(r, c, re, im) in entries {
                    if r >= *rows || c >= *cols {
                        return Err(Error::Document(format!("entry ({r}, {c}) outside {rows}x{cols}")));
                    }
                    m[(r, c)] = C64::new(re, im);
                }
                Ok(m)
            }
            Self::Dense { rows, cols, re, im } => {
                if re.len() != rows * cols || im.len() != rows * cols {
                    return Err(Error::Document(format!(
                        "dense {rows}x{cols} matrix with {} real and {} imaginary parts",
                        re.len(),
                        im.len()
                    )));
                }
                Ok(CMatrix::from_fn(*rows, *cols, |r, c| C64::new(re[r * cols + c], im[r * cols + c])))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteDoc {
    pub site: usize,
    pub matrices: Vec<MatrixDoc>,
}

impl SiteDoc {
    fn new(site: usize, t: &SiteTensor) -> Self {
        Self { site, matrices: t.matrices().iter().map(MatrixDoc::from_matrix).collect() }
    }

    fn to_tensor(&self) -> Result<SiteTensor> {
        SiteTensor::new(self.matrices.iter().map(MatrixDoc::to_matrix).collect::<Result<_>>()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MpsDocument {
    pub n: usize,
    pub d: usize,
    pub bond_profile: Vec<usize>,
    pub sites: Vec<SiteDoc>,
}

impl MpsDocument {
    pub fn from_state(psi: &MatrixProductState) -> Self {
        Self {
            n: psi.len(),
            d: psi.d(),
            bond_profile: psi.bond_profile(),
            sites: psi.sites().iter().enumerate().map(|(j, s)| SiteDoc::new(j, s)).collect(),
        }
    }

    pub fn to_state(&self) -> Result<MatrixProductState> {
        let psi = state_from_sites(self.n, self.sites.iter())?;
        if psi.d() != self.d || psi.bond_profile() != self.bond_profile {
            return Err(Error::Document("local dimension or bond profile disagrees with the tensors".into()));
        }
        Ok(psi)
    }
}

fn state_from_sites<'a>(n: usize, docs: impl Iterator<Item = &'a SiteDoc>) -> Result<MatrixProductState> {
    let mut slots: Vec<Option<SiteTensor>> = vec![None; n];
    for doc in docs {
        let slot = slots
            .get_mut(doc.site)
            .ok_or_else(|| Error::Document(format!("site {} outside a chain of {n}", doc.site)))?;
        if slot.is_some() {
            return Err(Error::Document(format!("site {} given twice", doc.site)));
        }
        *slot = Some(doc.to_tensor()?);
    }
    let sites = slots
        .into_iter()
        .enumerate()
        .map(|(j, s)| s.ok_or_else(|| Error::Document(format!("site {j} missing"))))
        .collect::<Result<Vec<_>>>()?;
    MatrixProductState::from_sites(sites)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TermDoc {
    Diagonal { entries: Vec<(usize, f64)> },
    Dense { matrix: MatrixDoc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub first: MatrixDoc,
    pub last: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianDoc {
    pub n: usize,
    pub r: usize,
    pub d: usize,
    pub term: TermDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<EdgeDoc>,
}

impl HamiltonianDoc {
    pub fn from_chain(h: &ChainHamiltonian) -> Self {
        let term = match h.term().matrix() {
            TermMatrix::Diagonal(entries) => TermDoc::Diagonal { entries: entries.clone() },
            TermMatrix::Dense(m) => TermDoc::Dense { matrix: MatrixDoc::from_matrix(m) },
        };
        Self {
            n: h.n(),
            r: h.r(),
            d: h.d(),
            term,
            edges: h.edges().map(|e| EdgeDoc {
                first: MatrixDoc::from_matrix(&e.first),
                last: MatrixDoc::from_matrix(&e.last),
            }),
        }
    }

    pub fn to_chain(&self) -> Result<ChainHamiltonian> {
        let term = match &self.term {
            TermDoc::Diagonal { entries } => LocalTerm::diagonal(self.r, self.d, entries)?,
            TermDoc::Dense { matrix } => LocalTerm::dense(self.r, self.d, matrix.to_matrix()?)?,
        };
        let h = ChainHamiltonian::new(term, self.n)?;
        match &self.edges {
            None => Ok(h),
            Some(e) => h.with_edges(e.first.to_matrix()?, e.last.to_matrix()?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BqpDoc {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    #[serde(default = "unit")]
    pub scale: f64,
    #[serde(default = "matrix_source")]
    pub source: BqpSource,
}

fn unit() -> f64 {
    1.0
}

fn matrix_source() -> BqpSource {
    BqpSource::Matrix
}

impl BqpDoc {
    pub fn from_bqp(b: &BqpInstance) -> Self {
        Self { m: b.rows(), scale: b.scale(), source: b.source().clone() }
    }

    pub fn to_bqp(&self) -> Result<BqpInstance> {
        let k = self.m.len();
        if self.m.iter().any(|r| r.len() != k) {
            return Err(Error::Document("M must be square".into()));
        }
        BqpInstance::with_source(DMatrix::from_fn(k, k, |i, j| self.m[i][j]), self.scale, self.source.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub gamma_requested: f64,
    pub gamma_halvings: u32,
    pub penalty: PenaltyTable,
    pub affine: AffineRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    pub version: u32,
    #[serde(rename = "N")]
    pub n_vars: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    pub m: usize,
    pub n: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub layout: Layout,
    pub hamiltonian: HamiltonianDoc,
    pub fixed_sites: Vec<SiteDoc>,
    pub free_sites: Vec<SiteDoc>,
    pub bqp: BqpDoc,
    pub provenance: Provenance,
}

impl InstanceDocument {
    pub fn from_instance(inst: &ReductionInstance) -> Self {
        let layout = inst.layout().clone();
        let psi = inst.state();
        let (free, fixed): (Vec<usize>, Vec<usize>) = (0..psi.len()).partition(|&j| inst.is_free(j));
        Self {
            version: INSTANCE_VERSION,
            n_vars: layout.n_vars,
            dim: layout.dim,
            m: layout.m,
            n: layout.sites,
            kappa: inst.kappa(),
            gamma: inst.gamma(),
            hamiltonian: HamiltonianDoc::from_chain(inst.hamiltonian()),
            fixed_sites: fixed.iter().map(|&j| SiteDoc::new(j, psi.site(j))).collect(),
            free_sites: free.iter().map(|&j| SiteDoc::new(j, psi.site(j))).collect(),
            bqp: BqpDoc::from_bqp(inst.bqp()),
            provenance: Provenance {
                generator: format!("mpshl {}", env!("CARGO_PKG_VERSION")),
                gamma_requested: inst.gamma_requested(),
                gamma_halvings: inst.family().gamma_halvings(),
                penalty: inst.penalty().clone(),
                affine: inst.affine(),
            },
            layout,
        }
    }

    pub fn to_instance(&self) -> Result<ReductionInstance> {
        if self.version != INSTANCE_VERSION {
            return Err(Error::Document(format!("unsupported instance version {}", self.version)));
        }
        let bqp = self.bqp.to_bqp()?;
        let expected = Layout::new(bqp.n_big(), self.provenance.affine.padding)?;
        if expected != self.layout
            || self.n_vars != expected.n_vars
            || self.dim != expected.dim
            || self.m != expected.m
            || self.n != expected.sites
        {
            return Err(Error::Document("layout constants disagree with N and padding".into()));
        }
        if self.kappa != kappa(self.n_vars) {
            return Err(Error::Document(format!("kappa {} does not match N = {}", self.kappa, self.n_vars)));
        }
        let free = expected.free_sites();
        if self.free_sites.iter().map(|s| s.site).collect::<Vec<_>>() != free {
            return Err(Error::Document(format!("free sites must be exactly {free:?}")));
        }
        let state = state_from_sites(self.n, self.fixed_sites.iter().chain(&self.free_sites))?;
        let h = self.hamiltonian.to_chain()?;
        let reference = ChainHamiltonian::new(LocalTerm::projector(), self.n)?;
        if HamiltonianDoc::from_chain(&h) != HamiltonianDoc::from_chain(&reference) {
            return Err(Error::Document("hamiltonian is not the six-site projector chain".into()));
        }
        ReductionInstance::from_components(
            bqp,
            self.provenance.penalty.clone(),
            self.provenance.gamma_requested,
            self.gamma,
            self.provenance.gamma_halvings,
            self.provenance.affine,
            state,
        )
    }
}

pub fn instance_to_json(inst: &ReductionInstance) -> Result<String> {
    Ok(serde_json::to_string(&InstanceDocument::from_instance(inst))?)
}

pub fn instance_from_json(text: &str) -> Result<ReductionInstance> {
    let doc: InstanceDocument = serde_json::from_str(text)?;
    doc.to_instance()
}

pub fn write_instance(path: &Path, inst: &ReductionInstance) -> Result<()> {
    std::fs::write(path, instance_to_json(inst)?)?;
    Ok(())
}

pub fn read_instance(path: &Path) -> Result<ReductionInstance> {
    instance_from_json(&std::fs::read_to_string(path)?)
}

/// A BQP matrix as JSON: `{"M": [[...], ...]}`, optionally with `scale`
/// and `source`.
pub fn parse_bqp_json(text: &str) -> Result<BqpInstance> {
    let doc: BqpDoc = serde_json::from_str(text)?;
    doc.to_bqp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mps::random_mps;
    use crate::reduction::{assemble_instance, AssemblyOptions};

    #[test]
    fn matrix_docs_round_trip() {
        let mut m = CMatrix::zeros(3, 2);
        m[(1, 0)] = C64::new(0.1, -1.0 / 3.0);
        let sparse = MatrixDoc::from_matrix(&m);
        assert!(matches!(sparse, MatrixDoc::Sparse { .. }));
        let text = serde_json::to_string(&sparse).unwrap();
        let back: MatrixDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
        let full = CMatrix::from_fn(2, 2, |r, c| C64::new(r as f64 + 0.7, c as f64 / 7.0));
        let text = serde_json::to_string(&MatrixDoc::from_matrix(&full)).unwrap();
        let back: MatrixDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_matrix().unwrap(), full);
    }

    #[test]
    fn state_round_trip() {
        let psi = random_mps(5, 3, &[1, 3, 4, 4, 2, 1], 9).unwrap();
        let text = serde_json::to_string(&MpsDocument::from_state(&psi)).unwrap();
        let doc: MpsDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(doc.to_state().unwrap().sites(), psi.sites());
    }

    #[test]
    fn instance_round_trip_is_bit_exact() {
        let bqp = BqpInstance::from_rows(&[vec![0.3, -0.1], vec![-0.1, -0.7]]).unwrap();
        let inst = assemble_instance(&bqp, &AssemblyOptions::default()).unwrap();
        let text = instance_to_json(&inst).unwrap();
        let back = instance_from_json(&text).unwrap();
        assert_eq!(back.state().sites(), inst.state().sites());
        assert_eq!(back.family().values(), inst.family().values());
        assert_eq!(instance_to_json(&back).unwrap(), text);
    }
}
