//! The six left-centre sites. Offsets below are relative to the first
//! centre site; the free sites are offsets 2 and 3's neighbours 2 and 4.
//!
//! With all four levels of physical dimension `d = 4`, only levels 0 and 1
//! are used here. The level-0 product over offsets 2, 3, 4 is
//! `kappa * c^† d` in its top-left `N x N` block, where
//! `kappa = 1 / (N sqrt N)`.

use crate::error::{Error, Result};
use crate::linalg::{c, identity, max_abs, psd_sqrt, CMatrix, C64};
use crate::mps::SiteTensor;

use super::indicator::indicator_dim;

/// Physical dimension of the reduction chain.
pub const LEVELS: usize = 4;

/// Entries below this are treated as structural zeros when reading
/// variables back.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// `kappa(N) = 1 / (N sqrt N)`.
pub fn kappa(n: usize) -> f64 {
    let n = n as f64;
    1.0 / (n * n.sqrt())
}

/// Hermitian PSD square root of `1 - sum_i A_i^† A_i`, so that appending it
/// to `partial` satisfies the gauge condition.
pub fn gauge_complete(partial: &[CMatrix], dim: usize) -> Result<CMatrix> {
    let mut rest = identity(dim);
    for a in partial {
        if a.ncols() != dim {
            return Err(Error::Shape(format!("partial matrix has {} columns, expected {dim}", a.ncols())));
        }
        rest -= a.adjoint() * a;
    }
    let diagonal = (0..dim).all(|i| (0..dim).all(|j| i == j || rest[(i, j)] == C64::new(0.0, 0.0)));
    if !diagonal {
        return psd_sqrt(&rest, 1e-9);
    }
    // exact and sparse when nothing mixes
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let v = rest[(i, i)].re;
        if v < -1e-9 {
            return Err(Error::InfeasibleCompletion { min_eigenvalue: v });
        }
        out[(i, i)] = c(v.max(0.0).sqrt());
    }
    Ok(out)
}

/// Fixed tensors at offsets 0, 1, 3 and 5 of the left centre.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterTensors {
    pub first: SiteTensor,
    pub selector: SiteTensor,
    pub contraction: SiteTensor,
    pub last: SiteTensor,
}

impl CenterTensors {
    /// `(offset, tensor)` pairs.
    pub fn by_offset(&self) -> [(usize, &SiteTensor); 4] {
        [(0, &self.first), (1, &self.selector), (3, &self.contraction), (5, &self.last)]
    }
}

pub fn fixed_center_tensors(n: usize) -> Result<CenterTensors> {
    let dim = indicator_dim(n);
    let first = SiteTensor::from_levels(LEVELS, dim, dim, vec![(0, identity(dim))])?;
    let mut top = CMatrix::zeros(dim, dim);
    let mut bottom = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        if i < n {
            top[(i, i)] = c(1.0);
        } else {
            bottom[(i, i)] = c(1.0);
        }
    }
    let selector = SiteTensor::from_levels(LEVELS, dim, dim, vec![(0, top), (1, bottom)])?;
    let mut gather = CMatrix::zeros(dim, dim);
    for l in 0..n {
        gather[(l, 0)] = c(1.0 / n as f64);
    }
    let rest = gauge_complete(std::slice::from_ref(&gather), dim)?;
    let contraction = SiteTensor::from_levels(LEVELS, dim, dim, vec![(0, gather), (1, rest)])?;
    let last = SiteTensor::from_levels(LEVELS, dim, dim, vec![(0, identity(dim))])?;
    Ok(CenterTensors { first, selector, contraction, last })
}

fn check_unit(name: &str, v: &[C64]) -> Result<()> {
    for (i, z) in v.iter().enumerate() {
        if !(z.norm() <= 1.0 + 1e-12) {
            return Err(Error::Box(format!("|{name}[{i}]| = {} > 1", z.norm())));
        }
    }
    Ok(())
}

/// Tensors for the two free sites encoding `(c, d)`.
pub fn embed_variables(cv: &[C64], dv: &[C64], n: usize) -> Result<(SiteTensor, SiteTensor)> {
    if cv.len() != n || dv.len() != n {
        return Err(Error::Shape(format!("c and d need {n} entries, got {} and {}", cv.len(), dv.len())));
    }
    check_unit("c", cv)?;
    check_unit("d", dv)?;
    let dim = indicator_dim(n);
    let mut a3 = CMatrix::zeros(dim, dim);
    for k in 0..n {
        a3[(k, k)] = cv[k].conj();
    }
    let a3_rest = gauge_complete(std::slice::from_ref(&a3), dim)?;
    let mut a5 = CMatrix::zeros(dim, dim);
    let spread = 1.0 / (n as f64).sqrt();
    for l in 0..n {
        a5[(0, l)] = dv[l] * spread;
    }
    let a5_rest = gauge_complete(std::slice::from_ref(&a5), dim)?;
    Ok((
        SiteTensor::from_levels(LEVELS, dim, dim, vec![(0, a3), (1, a3_rest)])?,
        SiteTensor::from_levels(LEVELS, dim, dim, vec![(0, a5), (1, a5_rest)])?,
    ))
}

/// Embedding of a real point `x, y` of the box via `c = sqrt x`, `d = sqrt y`.
pub fn embed_point(x: &[f64], y: &[f64], n: usize) -> Result<(SiteTensor, SiteTensor)> {
    for (name, v) in [("x", x), ("y", y)] {
        if let Some((i, t)) = v.iter().enumerate().find(|(_, t)| !(**t >= 0.0 && **t <= 1.0)) {
            return Err(Error::Box(format!("{name}[{i}] = {t}")));
        }
    }
    let cv: Vec<C64> = x.iter().map(|t| c(t.sqrt())).collect();
    let dv: Vec<C64> = y.iter().map(|t| c(t.sqrt())).collect();
    embed_variables(&cv, &dv, n)
}

/// Reads `x_k = |c_k|^2`, `y_k = |d_k|^2` back from tensors in embedded
/// form, rejecting anything else.
pub fn extract_variables(a3: &SiteTensor, a5: &SiteTensor, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let dim = indicator_dim(n);
    for (name, t) in [("first", a3), ("second", a5)] {
        if t.d() != LEVELS || t.left_dim() != dim || t.right_dim() != dim {
            return Err(Error::Structure(format!(
                "{name} free site has shape {}x{}x{}, expected {LEVELS}x{dim}x{dim}",
                t.d(),
                t.left_dim(),
                t.right_dim()
            )));
        }
        for level in 2..LEVELS {
            let mag = max_abs(t.matrix(level));
            if mag > STRUCTURE_TOL {
                return Err(Error::Structure(format!("{name} free site uses level {level} (max entry {mag:.3e})")));
            }
        }
    }
    let m3 = a3.matrix(0);
    for i in 0..dim {
        for j in 0..dim {
            if (i != j || i >= n) && m3[(i, j)].norm() > STRUCTURE_TOL {
                return Err(Error::Structure(format!(
                    "first free site level 0 has off-pattern entry ({i}, {j}) = {:.3e}",
                    m3[(i, j)].norm()
                )));
            }
        }
    }
    let m5 = a5.matrix(0);
    for i in 0..dim {
        for j in 0..dim {
            if (i != 0 || j >= n) && m5[(i, j)].norm() > STRUCTURE_TOL {
                return Err(Error::Structure(format!(
                    "second free site level 0 has off-pattern entry ({i}, {j}) = {:.3e}",
                    m5[(i, j)].norm()
                )));
            }
        }
    }
    let x = (0..n).map(|k| m3[(k, k)].norm_sqr()).collect();
    let y = (0..n).map(|k| n as f64 * m5[(0, k)].norm_sqr()).collect();
    Ok((x, y))
}

/// Reads variables from arbitrary free tensors through the channel that the
/// fixed centre actually transmits: the row sums of the first block and the
/// first row of the second, clamped into the box.
pub fn extract_relaxed(a3: &SiteTensor, a5: &SiteTensor, n: usize) -> (Vec<f64>, Vec<f64>) {
    let m3 = a3.matrix(0);
    let m5 = a5.matrix(0);
    let x = (0..n)
        .map(|a| {
            let u: C64 = (0..n).map(|l| m3[(a, l)]).sum();
            u.norm_sqr().clamp(0.0, 1.0)
        })
        .collect();
    let y = (0..n).map(|k| (n as f64 * m5[(0, k)].norm_sqr()).clamp(0.0, 1.0)).collect();
    (x, y)
}
