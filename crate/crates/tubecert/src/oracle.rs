//! Brute-force ground truth for finite categories: the GNS representation
//! of the tube algebra built from Ω, the spectrum of Δ on the weight-1
//! admissible corner, and the exact spectral gap.

use crate::cone::Cone;
use crate::fusion::FaElement;
use crate::scalar::C64;
use crate::tube::TubeAlgebra;
use nalgebra::{Cholesky, DMatrix, SymmetricEigen};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("Ω Gram matrix is not positive definite (tube data inconsistent)")]
    GramNotPd,
    #[error("GNS action of a self-adjoint element is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error(transparent)]
    Tube(#[from] crate::tube::TubeError),
}

/// The GNS space of the tube algebra under ⟨a,b⟩ = Ω(b*·a), together with
/// the weight-1 admissible corner L²(A)·p₁ (spanned by the gradings with
/// source x = 1).
pub struct GnsModel {
    pub tube: Arc<TubeAlgebra<C64>>,
    pub dim: usize,
    pub corner_dim: usize,
    /// basis indices spanning the corner
    corner: Vec<usize>,
    /// Cholesky factor of the corner Gram: M = L·Lᴴ
    corner_l: DMatrix<C64>,
    corner_l_inv_h: DMatrix<C64>,
    /// Cholesky factor of the full Gram (kept for the *-rep checks)
    full_l: DMatrix<C64>,
    full_l_inv_h: DMatrix<C64>,
    /// max deviation of matrix(a*) from matrix(a)† over the basis elements
    pub star_rep_residual: f64,
}

fn hermitize(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Builds the GNS model.  The Gram matrix M\[i\]\[j\] = Ω(bᵢ*·bⱼ) must be
/// Hermitian positive definite; the right-multiplication representation
/// is verified to be a *-representation on all basis elements.
pub fn build_gns(tube: Arc<TubeAlgebra<C64>>) -> Result<GnsModel, OracleError> {
    let n = tube.dim();
    // precompute the structure constants once; later actions contract them
    let _ = tube.structure_constants();
    // M[i][j] = Ω(b_i* · b_j) = ⟨b_j, b_i⟩ so that ⟨ξ,η⟩ = ηᴴ M ξ
    let mut m = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        let bi_star = tube.star(&tube.basis_element(i));
        for j in 0..n {
            let prod = tube.multiply(&bi_star, &tube.basis_element(j));
            m[(i, j)] = tube.omega(&prod);
        }
    }
    let herm_res = (&m - m.adjoint()).map(|z| z.norm()).max();
    if herm_res > 1e-9 {
        return Err(OracleError::GramNotPd);
    }
    let m = hermitize(&m);
    let chol = Cholesky::new(m.clone()).ok_or(OracleError::GramNotPd)?;
    let full_l = chol.l();
    let full_l_inv_h = full_l
        .adjoint()
        .try_inverse()
        .ok_or(OracleError::GramNotPd)?;

    let corner: Vec<usize> = (0..n)
        .filter(|&i| tube.basis()[i].key.x == tube.skel.unit())
        .collect();
    let mc = DMatrix::<C64>::from_fn(corner.len(), corner.len(), |a, b| {
        m[(corner[a], corner[b])]
    });
    let chol_c = Cholesky::new(hermitize(&mc)).ok_or(OracleError::GramNotPd)?;
    let corner_l = chol_c.l();
    let corner_l_inv_h = corner_l
        .adjoint()
        .try_inverse()
        .ok_or(OracleError::GramNotPd)?;

    let mut model = GnsModel {
        tube,
        dim: n,
        corner_dim: corner.len(),
        corner,
        corner_l,
        corner_l_inv_h,
        full_l,
        full_l_inv_h,
        star_rep_residual: 0.0,
    };
    // verify: matrix(a·b) = matrix(b)·matrix(a) and matrix(a*) = matrix(a)†
    let mut worst = 0.0f64;
    for i in 0..n {
        let a = model.tube.basis_element(i);
        let ra = model.full_action(&a)?;
        let rastar = model.full_action(&model.tube.star(&a))?;
        worst = worst.max((&rastar - ra.adjoint()).map(|z| z.norm()).max());
    }
    model.star_rep_residual = worst;
    Ok(model)
}

impl GnsModel {
    /// Matrix of right multiplication ξ ↦ ξ·a on the full GNS space in the
    /// orthonormalised basis, by contraction of the structure constants.
    pub fn full_action(
        &self,
        a: &crate::tube::TubeElement<C64>,
    ) -> Result<DMatrix<C64>, OracleError> {
        let n = self.dim;
        let alpha = self.tube.expand(a)?;
        let sc = self.tube.structure_constants();
        let mut raw = DMatrix::<C64>::zeros(n, n);
        for i in 0..n {
            for (j, aj) in alpha.iter().enumerate() {
                if aj.norm() == 0.0 {
                    continue;
                }
                for (k, c) in &sc.mult[i][j] {
                    raw[(*k, i)] += aj * c;
                }
            }
        }
        Ok(self.full_l.adjoint() * raw * &self.full_l_inv_h)
    }

    /// Matrix of right multiplication by a corner element (A_{1,1}) on the
    /// admissible corner subspace, orthonormalised.
    pub fn corner_action(
        &self,
        a: &crate::tube::TubeElement<C64>,
    ) -> Result<DMatrix<C64>, OracleError> {
        let nc = self.corner.len();
        let alpha = self.tube.expand(a)?;
        let sc = self.tube.structure_constants();
        let mut raw = DMatrix::<C64>::zeros(nc, nc);
        for (col, &i) in self.corner.iter().enumerate() {
            for (j, aj) in alpha.iter().enumerate() {
                if aj.norm() == 0.0 {
                    continue;
                }
                for (k, c) in &sc.mult[i][j] {
                    let contrib = aj * c;
                    if contrib.norm() > 1e-14 {
                        if let Some(row) = self.corner.iter().position(|&x| x == *k) {
                            raw[(row, col)] += contrib;
                        } else {
                            return Err(OracleError::Tube(
                                crate::tube::TubeError::OutsideGrading(
                                    "corner not invariant".into(),
                                ),
                            ));
                        }
                    }
                }
            }
        }
        Ok(self.corner_l.adjoint() * raw * &self.corner_l_inv_h)
    }
}

/// Spectrum of Δ over the weight-1 admissible representations.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// sorted distinct eigenvalues with multiplicities
    pub eigenvalues: Vec<(f64, usize)>,
    /// smallest non-zero eigenvalue
    pub gap: f64,
    pub zero_multiplicity: usize,
    pub hermitian_residual: f64,
}

impl fmt::Display for SpectralReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "admissible spectrum of Δ:")?;
        for (v, m) in &self.eigenvalues {
            writeln!(f, "  {v:>18.12}  (multiplicity {m})")?;
        }
        write!(
            f,
            "gap = {:.12}  (zero multiplicity {})",
            self.gap, self.zero_multiplicity
        )
    }
}

/// Hermitian eigendecomposition of the action of Δ on the admissible
/// corner.  Eigenvalues below 1e−9·(1+‖Δ‖) in absolute value are
/// classified as zero; the gap is the smallest non-zero eigenvalue.
pub fn admissible_spectrum(
    model: &GnsModel,
    delta: &FaElement<C64>,
) -> Result<SpectralReport, OracleError> {
    let a = model.tube.embed(delta);
    let mat = model.corner_action(&a)?;
    let herm_res = (&mat - mat.adjoint()).map(|z| z.norm()).max();
    let norm_est = mat.map(|z| z.norm()).max();
    if herm_res > 1e-8 * (1.0 + norm_est) {
        return Err(OracleError::NotHermitian(herm_res));
    }
    let eig = SymmetricEigen::new(hermitize(&mat));
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let zero_tol = 1e-9 * (1.0 + norm_est);
    let mut grouped: Vec<(f64, usize)> = Vec::new();
    for v in &vals {
        match grouped.last_mut() {
            Some((gv, gm)) if (*gv - v).abs() < 1e-9 * (1.0 + norm_est) => {
                *gm += 1;
            }
            _ => grouped.push((*v, 1)),
        }
    }
    let zero_multiplicity = vals.iter().filter(|v| v.abs() < zero_tol).count();
    let gap = vals
        .iter()
        .cloned()
        .filter(|v| *v >= zero_tol)
        .fold(f64::INFINITY, f64::min);
    Ok(SpectralReport {
        eigenvalues: grouped,
        gap,
        zero_multiplicity,
        hermitian_residual: herm_res,
    })
}

/// Report of the admissibility ⇔ cone-positivity cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub trials: usize,
    /// worst (most negative) vector-state value of π(Λ(Q)) over random PSD Q
    pub worst_violation: f64,
}

/// Verifies that every vector state of the corner representation is
/// non-negative on random cone elements Λ(Q), Q ⪰ 0: the finite-dimensional
/// content of "weight-1 admissible ⇔ Σ²C-positive".
pub fn crosscheck_admissibility(
    model: &GnsModel,
    cone: &Cone<C64>,
    trials: usize,
    seed: u64,
) -> Result<AdmissibilityReport, OracleError> {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let mut gram = cone.zero_gram();
        for (ci, col) in cone.columns.iter().enumerate() {
            let n = col.tube_indices.len();
            let m = crate::mat::Mat::from_fn(n, n, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            gram[ci] = m.matmul(&m.dagger());
        }
        let lam = cone.assemble(&gram);
        // normalise so violations are compared on a common scale
        let scale = lam.max_abs_approx().max(1e-12);
        let a = model.tube.embed(&lam);
        let mat = model.corner_action(&a)?;
        let min_ev = SymmetricEigen::new(hermitize(&mat))
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        worst = worst.min(min_ev / scale);
    }
    Ok(AdmissibilityReport {
        trials,
        worst_violation: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::cone::ConeSupport;
    use crate::fusion::LaplacianSpec;

    fn model(name: &str) -> GnsModel {
        let skel = builtin::builtin_category(name)
            .unwrap()
            .skeleton_f64()
            .unwrap();
        build_gns(Arc::new(TubeAlgebra::new(Arc::new(skel), None))).unwrap()
    }

    fn delta_of(model: &GnsModel, gens: &[&str]) -> FaElement<C64> {
        let data = model.tube.skel.fusion.clone();
        let labels = gens.iter().map(|g| data.label_of(g).unwrap()).collect();
        let spec = LaplacianSpec::uniform(labels);
        crate::fusion::build_laplacian(&spec, &data, &model.tube.skel.dims).unwrap()
    }

    #[test]
    fn gns_dimensions() {
        let m = model("vec_z2");
        assert_eq!(m.dim, 4);
        assert_eq!(m.corner_dim, 2);
        assert!(m.star_rep_residual < 1e-10, "{}", m.star_rep_residual);
        let m = model("fib");
        assert_eq!(m.dim, 7);
        assert_eq!(m.corner_dim, 3);
        let m = model("ising");
        assert_eq!(m.dim, 12);
        assert_eq!(m.corner_dim, 4);
        let m = model("vec_z3");
        assert_eq!(m.dim, 9);
        assert_eq!(m.corner_dim, 3);
    }

    #[test]
    fn right_representation_antihomomorphism() {
        // matrix(a·b) = matrix(b)·matrix(a) on random basis pairs
        let m = model("ising");
        let n = m.dim;
        for (i, j) in [(0, 1), (2, 5), (7, 3), (n - 1, n - 2)] {
            let a = m.tube.basis_element(i);
            let b = m.tube.basis_element(j);
            let ra = m.full_action(&a).unwrap();
            let rb = m.full_action(&b).unwrap();
            let rab = m.full_action(&m.tube.multiply(&a, &b)).unwrap();
            let res = (&rab - &rb * &ra).map(|z| z.norm()).max();
            assert!(res < 1e-10, "({i},{j}): {res}");
        }
    }

    #[test]
    fn spectrum_vec_z2() {
        let m = model("vec_z2");
        let delta = delta_of(&m, &["g"]);
        let report = admissible_spectrum(&m, &delta).unwrap();
        assert_eq!(report.zero_multiplicity, 1);
        assert!((report.gap - 2.0).abs() < 1e-12, "{report}");
    }

    #[test]
    fn spectrum_fib() {
        let m = model("fib");
        let delta = delta_of(&m, &["tau"]);
        let report = admissible_spectrum(&m, &delta).unwrap();
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        let expected = 1.0 + phi.powi(-2);
        assert!((report.gap - expected).abs() < 1e-9, "{report}");
        // spectrum is exactly {0, 1+φ⁻²}
        assert_eq!(report.eigenvalues.len(), 2, "{report}");
    }

    #[test]
    fn spectrum_ising() {
        let m = model("ising");
        let delta = delta_of(&m, &["sigma"]);
        let report = admissible_spectrum(&m, &delta).unwrap();
        // all eigenvalues lie in {0, 1, 2}
        for (v, _) in &report.eigenvalues {
            let nearest = [0.0, 1.0, 2.0]
                .iter()
                .map(|t| (v - t).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 1e-9, "eigenvalue {v} not in {{0,1,2}}");
        }
        assert!((report.gap - 1.0).abs() < 1e-9, "{report}");
    }

    #[test]
    fn spectrum_vec_z3_default_generators() {
        let m = model("vec_z3");
        let delta = delta_of(&m, &["g", "g^2"]);
        let report = admissible_spectrum(&m, &delta).unwrap();
        // characters give Δ ∈ {0, 3/2, 3/2}
        assert!((report.gap - 1.5).abs() < 1e-9, "{report}");
    }

    #[test]
    fn admissibility_crosscheck() {
        for name in ["vec_z2", "fib", "ising"] {
            let m = model(name);
            let skel = m.tube.skel.clone();
            let cone = Cone::new(
                m.tube.clone(),
                ConeSupport::full(skel.fusion.rank()),
            )
            .unwrap();
            let report = crosscheck_admissibility(&m, &cone, 100, 7).unwrap();
            assert!(
                report.worst_violation > -1e-8,
                "{name}: {}",
                report.worst_violation
            );
            // the check has teeth: negated cone elements violate
            let mut gram = cone.zero_gram();
            let (uc, up) = cone.unit_position();
            gram[uc][(up, up)] = C64::new(1.0, 0.0);
            let neg = cone.assemble(&gram).scale(&C64::new(-1.0, 0.0));
            let mat = m.corner_action(&m.tube.embed(&neg)).unwrap();
            let min_ev = SymmetricEigen::new(hermitize(&mat))
                .eigenvalues
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert!(min_ev < -0.5, "{name}: negated unit should violate");
        }
    }
}
