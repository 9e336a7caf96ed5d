use super::{MatrixProductState, SiteTensor};
use crate::error::{Error, Result};
use crate::linalg::{qr_positive, CMatrix};

impl MatrixProductState {
    /// Brings every site into left-canonical form, `sum_i A_i^† A_i = 1`,
    /// sweeping left to right with orthogonal factorizations.
    ///
    /// The result is normalized. Bonds whose numerical rank is below the
    /// current dimension shrink (relative cutoff `1e-14`).
    pub fn left_canonicalize(&self) -> Result<Self> {
        let n = self.len();
        let mut out = self.clone();
        let mut carry: Option<CMatrix> = None;
        for j in 0..n {
            let site = match carry.take() {
                Some(r) => apply_left(&r, &out.sites[j]),
                None => out.sites[j].clone(),
            };
            let (q, r) = qr_positive(&site.stacked_rows(), true);
            out.sites[j] = SiteTensor::from_stacked_rows(&q, site.d())?;
            carry = Some(r);
        }
        let last = carry.expect("at least one site");
        let norm = last[(0, 0)].norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroState);
        }
        // the 1x1 remainder is the norm times a phase; both are dropped
        out.center = Some(n - 1);
        Ok(out)
    }

    /// Brings every site into right-canonical form, `sum_i A_i A_i^† = 1`.
    /// The result is normalized.
    pub fn right_canonicalize(&self) -> Result<Self> {
        let n = self.len();
        let mut out = self.clone();
        let mut carry: Option<CMatrix> = None;
        for j in (0..n).rev() {
            let site = match carry.take() {
                Some(l) => apply_right(&out.sites[j], &l),
                None => out.sites[j].clone(),
            };
            let (q, l) = lq_positive(&site.stacked_cols(), true);
            out.sites[j] = SiteTensor::from_stacked_cols(&q, site.d())?;
            carry = Some(l);
        }
        let first = carry.expect("at least one site");
        let norm = first[(0, 0)].norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroState);
        }
        out.center = Some(0);
        Ok(out)
    }

    /// Mixed-canonical form with orthogonality center `center`: sites to the
    /// left are left-canonical, sites to the right right-canonical. The norm
    /// of the state is carried by the center site. Bond dimensions are kept.
    pub fn mixed_canonical(&self, center: usize) -> Result<Self> {
        let n = self.len();
        if center >= n {
            return Err(Error::Shape(format!("center {center} outside 0..{n}")));
        }
        let mut out = self.clone();
        for j in 0..center {
            out.shift_center_right(j)?;
        }
        for j in ((center + 1)..n).rev() {
            out.shift_center_left(j)?;
        }
        out.center = Some(center);
        Ok(out)
    }

    /// The same state scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::ZeroState);
        }
        let target = self.center.unwrap_or(0);
        let mut out = self.scale_site(target, crate::linalg::c(1.0 / nrm));
        out.center = self.center;
        Ok(out)
    }

    /// Left-orthogonalizes site `j` and pushes the remainder into site `j + 1`.
    pub(crate) fn shift_center_right(&mut self, j: usize) -> Result<()> {
        let site = &self.sites[j];
        let (q, r) = qr_positive(&site.stacked_rows(), false);
        let left = SiteTensor::from_stacked_rows(&q, site.d())?;
        let right = apply_left(&r, &self.sites[j + 1]);
        self.replace_pair(j, left, right);
        self.center = Some(j + 1);
        Ok(())
    }

    /// Right-orthogonalizes site `j` and pushes the remainder into site `j - 1`.
    pub(crate) fn shift_center_left(&mut self, j: usize) -> Result<()> {
        let site = &self.sites[j];
        let (q, l) = lq_positive(&site.stacked_cols(), false);
        let right = SiteTensor::from_stacked_cols(&q, site.d())?;
        let left = apply_right(&self.sites[j - 1], &l);
        self.replace_pair(j - 1, left, right);
        self.center = Some(j - 1);
        Ok(())
    }
}

/// `m = l * q` with orthonormal rows in `q`.
fn lq_positive(m: &CMatrix, shrink: bool) -> (CMatrix, CMatrix) {
    let (q, r) = qr_positive(&m.adjoint(), shrink);
    (q.adjoint(), r.adjoint())
}

fn apply_left(r: &CMatrix, site: &SiteTensor) -> SiteTensor {
    SiteTensor::new(site.matrices().iter().map(|a| r * a).collect()).expect("consistent shapes")
}

fn apply_right(site: &SiteTensor, l: &CMatrix) -> SiteTensor {
    SiteTensor::new(site.matrices().iter().map(|a| a * l).collect()).expect("consistent shapes")
}

#[cfg(test)]
mod tests {
    use crate::linalg::{c, dot, identity_deviation, C64};
    use crate::mps::{random_mps, MatrixProductState};

    #[test]
    fn product_state_unchanged_up_to_phase() {
        let psi = MatrixProductState::product_state(&[1, 0, 1], 2).unwrap();
        let out = psi.left_canonicalize().unwrap();
        for (a, b) in psi.sites().iter().zip(out.sites()) {
            for (ma, mb) in a.matrices().iter().zip(b.matrices()) {
                assert!((ma[(0, 0)].norm() - mb[(0, 0)].norm()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_state_canonical_and_same_ray() {
        let psi = random_mps(6, 2, &[1, 2, 4, 4, 2, 2, 1], 42).unwrap();
        let out = psi.left_canonicalize().unwrap();
        let max_res = out.gauge_residuals().into_iter().fold(0.0, f64::max);
        assert!(max_res < 1e-12, "{max_res}");
        let vin = psi.to_dense(1 << 10).unwrap();
        let vout = out.to_dense(1 << 10).unwrap();
        let nin = dot(&vin, &vin).re.sqrt();
        assert!((dot(&vout, &vin).norm() - nin).abs() < 1e-10 * nin.max(1.0));
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let psi = random_mps(5, 3, &[1, 3, 5, 3, 3, 1], 8).unwrap().left_canonicalize().unwrap();
        let again = psi.left_canonicalize().unwrap();
        for (a, b) in psi.sites().iter().zip(again.sites()) {
            for (ma, mb) in a.matrices().iter().zip(b.matrices()) {
                assert!(crate::linalg::max_abs(&(ma - mb)) < 1e-12);
            }
        }
    }

    #[test]
    fn right_and_mixed_forms() {
        let psi = random_mps(5, 2, &[1, 2, 4, 4, 2, 1], 3).unwrap();
        let right = psi.right_canonicalize().unwrap();
        for s in right.sites() {
            let sum = s.matrices().iter().fold(crate::linalg::CMatrix::zeros(s.left_dim(), s.left_dim()), |acc, a| {
                acc + a * a.adjoint()
            });
            assert!(identity_deviation(&sum) < 1e-12);
        }
        let mixed = psi.mixed_canonical(2).unwrap();
        assert!((mixed.norm() - psi.norm()).abs() < 1e-10 * psi.norm());
        assert!(mixed.site(0).gauge_residual() < 1e-12);
        assert!(mixed.site(1).gauge_residual() < 1e-12);
        let ov = mixed.overlap(&psi).unwrap();
        assert!((ov - C64::from(psi.norm() * psi.norm())).norm() < 1e-9 * psi.norm().powi(2));
    }

    #[test]
    fn rank_deficient_bond_shrinks() {
        // the middle bond carries rank one
        let psi = random_mps(3, 2, &[1, 2, 2, 1], 1).unwrap();
        let mut sites = psi.into_sites();
        for m in sites[1].matrices_mut() {
            let col = m.column(0).into_owned();
            m.set_column(1, &(col * c(2.0)));
        }
        let psi = MatrixProductState::from_sites(sites).unwrap();
        let out = psi.left_canonicalize().unwrap();
        assert_eq!(out.bond_profile(), vec![1, 2, 1, 1]);
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}
