//! The tube cone Σ²C = { Σ aᵢaᵢ* : aᵢ ∈ ⋃_x A_{x,1} }: the assembly map
//! from Gram matrices to fusion-algebra elements, constructive order-unit
//! and Laplacian-positivity certificates, ℓ¹ residual absorption, and
//! exact verification of certificates.

use crate::category::{parse_real_exact, real_exact_to_string, Category};
use crate::fusion::{FaElement, Label, LaplacianSpec};
use crate::mat::{ldl_psd_check, Mat, PsdCheck};
use crate::scalar::{Exact, Rational, Scalar, Sign};
use crate::skeleton::{Morphism, Word};
use crate::tube::{TubeAlgebra, TubeElement, TubeError, TubeKey};
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("support too small: needs label '{0}'")]
    SupportTooSmall(String),
    #[error("element is not self-adjoint")]
    NotSelfAdjoint,
    #[error("order-unit construction failed: {0}")]
    OrderUnit(String),
    #[error(transparent)]
    Tube(#[from] TubeError),
    #[error(transparent)]
    Scalar(#[from] crate::scalar::ScalarError),
    #[error("certificate invalid: {0}")]
    Certificate(String),
    #[error(transparent)]
    Fusion(#[from] crate::fusion::FusionError),
    #[error(transparent)]
    Category(#[from] crate::category::CategoryError),
}

/// Support of the truncated cone: source labels X and weight labels W;
/// both always contain the unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConeSupport {
    pub xs: Vec<Label>,
    pub ws: Vec<Label>,
}

impl ConeSupport {
    pub fn full(rank: usize) -> ConeSupport {
        ConeSupport {
            xs: (0..rank).map(Label).collect(),
            ws: (0..rank).map(Label).collect(),
        }
    }
}

/// One column of the cone: the basis of ⊕_{w ∈ W} A^w_{x,1}.
#[derive(Debug, Clone)]
pub struct ConeColumn {
    pub x: Label,
    /// indices into the tube algebra's basis
    pub tube_indices: Vec<usize>,
}

/// A Hermitian Gram matrix per cone column.
pub type Gram<S> = Vec<Mat<S>>;

/// The truncated tube cone with its precomputed products b_p·b_q*.
pub struct Cone<S: Scalar> {
    pub tube: Arc<TubeAlgebra<S>>,
    pub support: ConeSupport,
    pub columns: Vec<ConeColumn>,
    /// products[col][p][q] = b_p · b_q* expanded in the Irr basis of ℂ[C]
    products: Vec<Vec<Vec<FaElement<S>>>>,
}

impl<S: Scalar> Cone<S> {
    /// Builds the cone table on the given support.  The tube algebra must
    /// carry every weight of the ambient (finite) label set so that the
    /// products b_p·b_q* are computed without truncation; the support only
    /// restricts which basis vectors generate the cone.
    pub fn new(tube: Arc<TubeAlgebra<S>>, support: ConeSupport) -> Result<Cone<S>, ConeError> {
        let unit = tube.skel.unit();
        let mut support = support;
        if !support.xs.contains(&unit) {
            support.xs.push(unit);
        }
        if !support.ws.contains(&unit) {
            support.ws.push(unit);
        }
        support.xs.sort();
        support.xs.dedup();
        support.ws.sort();
        support.ws.dedup();
        let mut columns = Vec::new();
        for &x in &support.xs {
            let idxs: Vec<usize> = tube
                .basis_for(&[x], &[unit], &support.ws)
                .into_iter()
                .map(|(i, _)| i)
                .collect();
            if !idxs.is_empty() {
                columns.push(ConeColumn {
                    x,
                    tube_indices: idxs,
                });
            }
        }
        let mut products = Vec::new();
        for col in &columns {
            let n = col.tube_indices.len();
            let elems: Vec<TubeElement<S>> = col
                .tube_indices
                .iter()
                .map(|&i| tube.basis_element(i))
                .collect();
            let stars: Vec<TubeElement<S>> = elems.iter().map(|e| tube.star(e)).collect();
            let mut table = Vec::with_capacity(n);
            for p in 0..n {
                let mut row = Vec::with_capacity(n);
                for q in 0..n {
                    let prod = tube.multiply(&elems[p], &stars[q]);
                    row.push(tube.corner_to_fusion(&prod)?);
                }
                table.push(row);
            }
            products.push(table);
        }
        Ok(Cone {
            tube,
            support,
            columns,
            products,
        })
    }

    pub fn column_dims(&self) -> Vec<(Label, usize)> {
        self.columns
            .iter()
            .map(|c| (c.x, c.tube_indices.len()))
            .collect()
    }

    pub fn zero_gram(&self) -> Gram<S> {
        self.columns
            .iter()
            .map(|c| Mat::<S>::zeros(c.tube_indices.len(), c.tube_indices.len()))
            .collect()
    }

    /// Position (column, row) of the p_1 basis vector.
    pub fn unit_position(&self) -> (usize, usize) {
        let unit = self.tube.skel.unit();
        let key = TubeKey {
            x: unit,
            y: unit,
            w: unit,
        };
        for (ci, col) in self.columns.iter().enumerate() {
            if col.x != unit {
                continue;
            }
            for (pi, &ti) in col.tube_indices.iter().enumerate() {
                if self.tube.basis()[ti].key == key {
                    return (ci, pi);
                }
            }
        }
        unreachable!("cone support always contains the unit column");
    }

    /// The product b_p·b_q* of column basis vectors, in the Irr basis.
    pub fn product(&self, col: usize, p: usize, q: usize) -> &FaElement<S> {
        &self.products[col][p][q]
    }

    /// The assembly map Λ(Q) = Σ_x Σ_pq Q_x\[p,q\] · (b_p·b_q*).
    pub fn assemble(&self, gram: &Gram<S>) -> FaElement<S> {
        assert_eq!(gram.len(), self.columns.len(), "gram shape mismatch");
        let mut out = FaElement::zero();
        for (ci, q) in gram.iter().enumerate() {
            let n = self.columns[ci].tube_indices.len();
            assert_eq!((q.rows, q.cols), (n, n), "gram block shape mismatch");
            for p in 0..n {
                for r in 0..n {
                    let c = &q[(p, r)];
                    if c.is_zero() {
                        continue;
                    }
                    out = out.add(&self.products[ci][p][r].scale(c));
                }
            }
        }
        out
    }

    /// Expands an element of A_{x,1} into the column's coordinates; errors
    /// if the element's support leaves the declared weight set.
    pub fn column_vector(&self, col: usize, elem: &TubeElement<S>) -> Result<Vec<S>, ConeError> {
        let column = &self.columns[col];
        let unit = self.tube.skel.unit();
        for (k, _) in elem.components() {
            if k.x != column.x || k.y != unit || !self.support.ws.contains(&k.w) {
                return Err(ConeError::SupportTooSmall(
                    self.tube.skel.fusion.name(k.w).to_string(),
                ));
            }
        }
        let coeffs = self.tube.expand(elem)?;
        Ok(column
            .tube_indices
            .iter()
            .map(|&i| coeffs[i].clone())
            .collect())
    }

    fn column_of(&self, x: Label) -> Result<usize, ConeError> {
        self.columns
            .iter()
            .position(|c| c.x == x)
            .ok_or_else(|| ConeError::SupportTooSmall(self.tube.skel.fusion.name(x).to_string()))
    }

    /// Adds the rank-one outer product scale·v·v† to the column's block.
    pub fn add_rank_one(&self, gram: &mut Gram<S>, col: usize, v: &[S], scale: &S) {
        let block = &mut gram[col];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, vj) in v.iter().enumerate() {
                if vj.is_zero() {
                    continue;
                }
                let cur = block[(i, j)].clone();
                block[(i, j)] = cur + scale.clone() * vi.clone() * vj.conj();
            }
        }
    }

    pub fn add_gram(&self, gram: &mut Gram<S>, other: &Gram<S>, scale: &S) {
        for (g, o) in gram.iter_mut().zip(other.iter()) {
            *g = g.add(&o.scale(scale));
        }
    }

    // -- constructive certificates --------------------------------------------

    /// Order-unit certificate: for b = Ψ^z_{1,x}(γ) with γ ∈ C(z, x⊗z),
    /// produces R = ‖σ‖·d(z) and a Gram decomposition G with
    /// Λ(G) = R·1 − b*·b.
    ///
    /// The positive element σ = AA† with A = (γ†⊗1_z̄)(1_x⊗R̄_z) satisfies
    /// σ² = s·σ where s = A†A ∈ End(x) is a scalar, so ‖σ‖ = s and
    /// τ = (s·1 − σ)^½ = √s·(1 − σ/s) is exactly representable.  The family
    /// c_{y,α} = Ψ^z_{1,y}((α†⊗1_z)(τ⊗1_z)(1_z⊗R_z)), α ∈ onb C(y, z⊗z̄),
    /// satisfies Σ c*c = s·d(z)·1 − b*·b; the constructor re-verifies this
    /// identity before returning.
    pub fn order_unit_certificate(
        &self,
        z: &Word,
        x: Label,
        gamma: &Morphism<S>,
    ) -> Result<OrderUnitCertificate<S>, ConeError> {
        let tube = &*self.tube;
        let skel = &*tube.skel;
        let data = &skel.fusion;
        let unit = skel.unit();
        let zbar = z.dual(data);
        let id_x = skel.identity(&skel.word(&[x]));
        let id_z = skel.identity(z);
        let id_zbar = skel.identity(&zbar);

        let b = tube.psi(z, unit, x, gamma)?;
        let b_star = tube.star(&b);
        let bstar_b = tube.corner_to_fusion(&tube.multiply(&b_star, &b))?;

        // A = (γ† ⊗ 1_z̄)(1_x ⊗ R̄_z): x → z⊗z̄; σ = AA†; s = A†A scalar
        let rbar = skel.word_cap(z); // ∈ C(1, z⊗z̄)
        let a_mor = skel.compose(
            &skel.tensor(&gamma.dagger(), &id_zbar),
            &skel.tensor(&id_x, &rbar),
        );
        let s = skel.compose(&a_mor.dagger(), &a_mor).expect_scalar();
        let d_z = z
            .letters()
            .iter()
            .fold(S::one(), |acc, &l| acc * skel.dims[l.0].clone());
        let r_bound = s.clone() * d_z;
        if s.is_zero() {
            // A = 0 forces γ = 0 and b = 0; nothing to certify
            return Ok(OrderUnitCertificate {
                r_bound,
                gram: self.zero_gram(),
                bstar_b,
            });
        }
        let sigma = skel.compose(&a_mor, &a_mor.dagger());
        let sqrt_s = s.sqrt_nonneg()?;
        let zz = z.concat(&zbar);
        let tau = skel
            .identity(&zz)
            .sub(&sigma.scale(&s.inv()))
            .scale(&sqrt_s);

        // base = (τ ⊗ 1_z)(1_z ⊗ R_z): z → (z·z̄)·z with the cup on the right
        let r_cup = skel.word_cup(z); // ∈ C(1, z̄·z)
        let intro = skel.tensor(&id_z, &r_cup);
        let base = skel.compose(&skel.tensor(&tau, &id_z), &intro);

        let mut gram = self.zero_gram();
        let mut total = TubeElement::<S>::zero();
        for y in data.simples() {
            let alphas = skel.tree_basis(&zz, y);
            if alphas.is_empty() {
                continue;
            }
            let col = self.column_of(y)?;
            for alpha in &alphas {
                let am = skel.tree_morphism(alpha);
                let g = skel.compose(&skel.tensor(&am.dagger(), &id_z), &base);
                let c = tube.psi(z, unit, y, &g)?;
                let c_star = tube.star(&c);
                let v = self.column_vector(col, &c_star)?;
                self.add_rank_one(&mut gram, col, &v, &S::one());
                total = total.add(&tube.multiply(&c_star, &c));
            }
        }
        // verify Σ c*c = R·1 − b*·b
        let total_fa = tube.corner_to_fusion(&total)?;
        let expect = FaElement::unit(data).scale(&r_bound).sub(&bstar_b);
        let defect = total_fa.sub(&expect);
        if S::EXACT {
            if !defect.is_zero() {
                return Err(ConeError::OrderUnit(format!(
                    "exact order-unit identity failed: defect {defect:?}"
                )));
            }
        } else if defect.max_abs_approx() > 1e-8 * (1.0 + r_bound.approx().norm()) {
            return Err(ConeError::OrderUnit(format!(
                "order-unit identity residual {:.3e}",
                defect.max_abs_approx()
            )));
        }
        Ok(OrderUnitCertificate {
            r_bound,
            gram,
            bstar_b,
        })
    }

    /// Gram decomposition for the Laplacian: Λ(result) = Δ exactly, built
    /// from the per-generator squares (1 − α/d)*(1 − α/d) and the order-unit
    /// certificates for d(α)²·1 − ᾱ·α, scaled by ν(α)/(2κ).
    pub fn laplacian_positivity_certificate(
        &self,
        spec: &LaplacianSpec,
    ) -> Result<Gram<S>, ConeError> {
        let tube = &*self.tube;
        let skel = &*tube.skel;
        let data = &skel.fusion;
        spec.validate(data)?;
        let kappa = spec.kappa(&skel.dims);
        let two_kappa_inv = (S::from_int(2) * kappa).inv();
        let mut gram = self.zero_gram();
        let (uc, up) = self.unit_position();
        for &alpha in &spec.generators {
            let nu = S::from_rat(&spec.weights[&alpha]);
            let d = skel.dims[alpha.0].clone();
            let abar = data.dual(alpha);
            // square piece: a = (1 − α/d)* = 1 − ᾱ/d as a unit-column vector
            let col_unit = &self.columns[uc];
            let mut v = vec![S::zero(); col_unit.tube_indices.len()];
            v[up] = S::one();
            let pos_abar = col_unit
                .tube_indices
                .iter()
                .position(|&i| {
                    tube.basis()[i].key
                        == TubeKey {
                            x: skel.unit(),
                            y: skel.unit(),
                            w: abar,
                        }
                })
                .ok_or_else(|| ConeError::SupportTooSmall(data.name(abar).to_string()))?;
            v[pos_abar] = -d.inv();
            let scale_sq = nu.clone() * d.clone() * two_kappa_inv.clone();
            self.add_rank_one(&mut gram, uc, &v, &scale_sq);
            // order-unit piece for d(α)²·1 − ᾱ·α
            let zw = skel.word(&[alpha]);
            let ou = self.order_unit_certificate(&zw, skel.unit(), &skel.identity(&zw))?;
            let scale_ou = nu * d.inv() * two_kappa_inv.clone();
            self.add_gram(&mut gram, &ou.gram, &scale_ou);
        }
        Ok(gram)
    }

    /// ℓ¹ absorption: for self-adjoint r returns (η, G) with G PSD and
    /// Λ(G) = η·1 + r exactly, η ≤ |c_1| + Σ_{z≠1} |c_z|·d(z).
    pub fn l1_absorption(&self, r: &FaElement<S>) -> Result<(S, Gram<S>), ConeError> {
        let tube = &*self.tube;
        let skel = &*tube.skel;
        let data = &skel.fusion;
        if r.star(data) != *r {
            return Err(ConeError::NotSelfAdjoint);
        }
        let unit = skel.unit();
        let mut eta = S::zero();
        let mut gram = self.zero_gram();
        let (uc, up) = self.unit_position();
        // unit coefficient: a non-negative part goes straight into the Gram
        let c1 = r.coeff(unit);
        if !c1.is_zero() {
            match c1.real_sign() {
                Sign::Pos => {
                    let mut v = vec![S::zero(); self.columns[uc].tube_indices.len()];
                    v[up] = S::one();
                    self.add_rank_one(&mut gram, uc, &v, &c1);
                }
                Sign::Neg => {
                    eta = eta + (-c1);
                }
                Sign::Zero => {}
            }
        }
        // dual pairs: 2|c|d·1 + (c z + c̄ z̄) = |c|d·square + (|c|/d)·orderunit
        let labels: Vec<Label> = r.support().map(|(l, _)| l).filter(|&l| l != unit).collect();
        for &z in &labels {
            let zbar = data.dual(z);
            if zbar < z {
                continue; // handled from the partner label
            }
            let c = r.coeff(z);
            if c.is_zero() {
                continue;
            }
            let c_eff = if z == zbar {
                c.clone() * S::from_rat(&Rational::new(1.into(), 2.into()))
            } else {
                c.clone()
            };
            let abs_c = c_eff.modulus()?;
            let u = (-c_eff.clone()).div(&abs_c);
            let d = skel.dims[z.0].clone();
            eta = eta + S::from_int(2) * abs_c.clone() * d.clone();
            // square piece: a = 1 − ū z̄ / d on the unit column
            let mut v = vec![S::zero(); self.columns[uc].tube_indices.len()];
            v[up] = S::one();
            let pos_zbar = self.columns[uc]
                .tube_indices
                .iter()
                .position(|&i| {
                    tube.basis()[i].key
                        == TubeKey {
                            x: unit,
                            y: unit,
                            w: zbar,
                        }
                })
                .ok_or_else(|| ConeError::SupportTooSmall(data.name(zbar).to_string()))?;
            v[pos_zbar] = -(u.conj().div(&d));
            let scale_sq = abs_c.clone() * d.clone();
            self.add_rank_one(&mut gram, uc, &v, &scale_sq);
            // order-unit piece: (|c|/d)(d²·1 − z̄·z)
            let zw = skel.word(&[z]);
            let ou = self.order_unit_certificate(&zw, unit, &skel.identity(&zw))?;
            let scale_ou = abs_c.div(&d);
            self.add_gram(&mut gram, &ou.gram, &scale_ou);
        }
        Ok((eta, gram))
    }
}

/// Result of the order-unit construction.
pub struct OrderUnitCertificate<S> {
    /// R = ‖σ‖·d(z)
    pub r_bound: S,
    /// Gram decomposition with Λ(gram) = R·1 − b*·b
    pub gram: Gram<S>,
    /// b*·b in the Irr basis (for callers and tests)
    pub bstar_b: FaElement<S>,
}

// ---------------------------------------------------------------------------
// Certificates and exact verification
// ---------------------------------------------------------------------------

pub const VERIFIER_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exact complex scalar as (re, im) exact real strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CScalarFile {
    pub re: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub im: String,
}

impl CScalarFile {
    pub fn from_exact(v: &Exact) -> CScalarFile {
        let conj = v.conj_ref();
        let half = Exact::from_rational(Rational::new(1.into(), 2.into()));
        let re = v.add_ref(&conj).mul_ref(&half);
        let im = v
            .sub_ref(&conj)
            .mul_ref(&half)
            .mul_ref(&Exact::i().neg_ref());
        CScalarFile {
            re: real_exact_to_string(&re),
            im: if im.is_zero_val() {
                String::new()
            } else {
                real_exact_to_string(&im)
            },
        }
    }

    pub fn to_exact(&self, ambient: u64) -> Result<Exact, ConeError> {
        let re = parse_real_exact(&self.re, ambient)?;
        if self.im.is_empty() {
            return Ok(re);
        }
        let im = parse_real_exact(&self.im, ambient)?;
        Ok(re.add_ref(&im.mul_ref(&Exact::i())))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramBlockFile {
    /// column label name
    pub x: String,
    pub dim: usize,
    /// row-major entries
    pub entries: Vec<CScalarFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaplacianFile {
    pub generators: Vec<String>,
    pub weights: Vec<(String, String)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupportFile {
    pub xs: Vec<String>,
    pub ws: Vec<String>,
}

/// A machine-verifiable certificate of Δ² − kΔ + ε·1 ∈ Σ²C(support).
///
/// The claim decomposes as Λ(gram_sos) + residual = Δ² − kΔ + ε_solve·1 and
/// Λ(gram_absorb) = residual + (ε − ε_solve)·1 with both Gram families PSD,
/// so Λ(gram_sos + gram_absorb) = Δ² − kΔ + ε·1 exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub verifier_version: String,
    pub category: String,
    pub category_hash: String,
    pub field: String,
    pub k: String,
    pub eps: String,
    pub eps_solve: String,
    pub eta: String,
    pub laplacian: LaplacianFile,
    pub support: SupportFile,
    pub gram_sos: Vec<GramBlockFile>,
    pub gram_absorb: Vec<GramBlockFile>,
    pub residual: Vec<(String, CScalarFile)>,
}

impl CertificateFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serialises")
    }

    pub fn parse(json: &str) -> Result<CertificateFile, ConeError> {
        serde_json::from_str(json).map_err(|e| ConeError::Certificate(format!("bad JSON: {e}")))
    }
}

/// One verification check with its outcome.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub accepted: bool,
    pub k: String,
    pub eps: String,
    pub checks: Vec<VerifyCheck>,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "certificate {}: k = {}, eps = {}",
            if self.accepted { "ACCEPTED" } else { "REJECTED" },
            self.k,
            self.eps
        )?;
        for c in &self.checks {
            writeln!(
                f,
                "  [{}] {} — {}",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

fn parse_rational(s: &str) -> Result<Rational, ConeError> {
    s.parse()
        .map_err(|_| ConeError::Certificate(format!("bad rational '{s}'")))
}

fn gram_to_file(cone: &Cone<Exact>, gram: &Gram<Exact>) -> Vec<GramBlockFile> {
    let data = &cone.tube.skel.fusion;
    cone.columns
        .iter()
        .zip(gram.iter())
        .map(|(col, block)| GramBlockFile {
            x: data.name(col.x).to_string(),
            dim: block.rows,
            entries: block
                .entries()
                .map(|(_, _, v)| CScalarFile::from_exact(v))
                .collect(),
        })
        .collect()
}

fn gram_from_file(
    cone: &Cone<Exact>,
    blocks: &[GramBlockFile],
    ambient: u64,
) -> Result<Gram<Exact>, ConeError> {
    let data = &cone.tube.skel.fusion;
    let mut gram = cone.zero_gram();
    if blocks.len() != cone.columns.len() {
        return Err(ConeError::Certificate(format!(
            "expected {} gram blocks, found {}",
            cone.columns.len(),
            blocks.len()
        )));
    }
    for (bi, bf) in blocks.iter().enumerate() {
        let col = &cone.columns[bi];
        if data.name(col.x) != bf.x {
            return Err(ConeError::Certificate(format!(
                "gram block {} is for column '{}', expected '{}'",
                bi,
                bf.x,
                data.name(col.x)
            )));
        }
        let n = col.tube_indices.len();
        if bf.dim != n || bf.entries.len() != n * n {
            return Err(ConeError::Certificate(format!(
                "gram block '{}' has wrong dimension",
                bf.x
            )));
        }
        let mut m = Mat::<Exact>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = bf.entries[i * n + j].to_exact(ambient)?;
            }
        }
        gram[bi] = m;
    }
    Ok(gram)
}

/// Assembles a certificate file from exact data.
#[allow(clippy::too_many_arguments)]
pub fn certificate_file(
    category: &Category,
    cone: &Cone<Exact>,
    spec: &LaplacianSpec,
    k: &Rational,
    eps: &Rational,
    eps_solve: &Rational,
    eta: &Exact,
    gram_sos: &Gram<Exact>,
    gram_absorb: &Gram<Exact>,
    residual: &FaElement<Exact>,
) -> CertificateFile {
    let data = &category.fusion;
    CertificateFile {
        verifier_version: VERIFIER_VERSION.to_string(),
        category: category.name.clone(),
        category_hash: category.content_hash(),
        field: category.field.as_str(),
        k: k.to_string(),
        eps: eps.to_string(),
        eps_solve: eps_solve.to_string(),
        eta: real_exact_to_string(eta),
        laplacian: LaplacianFile {
            generators: spec
                .generators
                .iter()
                .map(|&l| data.name(l).to_string())
                .collect(),
            weights: spec
                .weights
                .iter()
                .map(|(&l, w)| (data.name(l).to_string(), w.to_string()))
                .collect(),
        },
        support: SupportFile {
            xs: cone
                .support
                .xs
                .iter()
                .map(|&l| data.name(l).to_string())
                .collect(),
            ws: cone
                .support
                .ws
                .iter()
                .map(|&l| data.name(l).to_string())
                .collect(),
        },
        gram_sos: gram_to_file(cone, gram_sos),
        gram_absorb: gram_to_file(cone, gram_absorb),
        residual: residual
            .support()
            .map(|(l, c)| (data.name(l).to_string(), CScalarFile::from_exact(c)))
            .collect(),
    }
}

/// Verifies a certificate file against a category with zero tolerance.
///
/// Checks, in exact arithmetic: the category hash, PSD-ness of every Gram
/// block (LDL* with exact pivot signs), the residual identity
/// Λ(gram_sos) + residual = Δ² − kΔ + ε_solve·1, the absorption identity
/// Λ(gram_absorb) = residual + (ε − ε_solve)·1, and the final claim.
pub fn verify_certificate(
    cert: &CertificateFile,
    category: &Category,
) -> Result<VerifyReport, ConeError> {
    let mut checks: Vec<VerifyCheck> = Vec::new();
    fn push(checks: &mut Vec<VerifyCheck>, name: &str, passed: bool, detail: String) {
        checks.push(VerifyCheck {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    let data = &category.fusion;
    let ambient = category.field.ambient();
    let hash = category.content_hash();
    let hash_ok = hash == cert.category_hash;
    push(
        &mut checks,
        "category hash",
        hash_ok,
        format!(
            "certificate {}.. vs category {}..",
            &cert.category_hash[..12.min(cert.category_hash.len())],
            &hash[..12]
        ),
    );
    if !hash_ok {
        // the remaining identities are meaningless against another category
        return Ok(VerifyReport {
            accepted: false,
            k: cert.k.clone(),
            eps: cert.eps.clone(),
            checks,
        });
    }

    let k = parse_rational(&cert.k)?;
    let eps = parse_rational(&cert.eps)?;
    let eps_solve = parse_rational(&cert.eps_solve)?;
    push(
        &mut checks,
        "parameters",
        eps.is_positive() && eps_solve.is_positive() && eps_solve <= eps,
        format!("k = {k}, eps = {eps}, eps_solve = {eps_solve}"),
    );

    // rebuild the exact cone on the certificate's support
    let skel = Arc::new(category.skeleton_exact()?);
    let tube = Arc::new(TubeAlgebra::new(skel.clone(), None));
    let mut xs = Vec::new();
    for name in &cert.support.xs {
        xs.push(data.label_of(name)?);
    }
    let mut ws = Vec::new();
    for name in &cert.support.ws {
        ws.push(data.label_of(name)?);
    }
    let cone = Cone::new(tube, ConeSupport { xs, ws })?;

    // Laplacian
    let mut generators = Vec::new();
    for name in &cert.laplacian.generators {
        generators.push(data.label_of(name)?);
    }
    let mut weights = std::collections::BTreeMap::new();
    for (name, w) in &cert.laplacian.weights {
        weights.insert(data.label_of(name)?, parse_rational(w)?);
    }
    let spec = LaplacianSpec {
        generators,
        weights,
    };
    let delta = crate::fusion::build_laplacian(&spec, data, &skel.dims)?;
    let delta_sq = delta.multiply(&delta, data);

    // Gram blocks PSD
    let gram_sos = gram_from_file(&cone, &cert.gram_sos, ambient)?;
    let gram_absorb = gram_from_file(&cone, &cert.gram_absorb, ambient)?;
    for (name, gram) in [("gram_sos PSD", &gram_sos), ("gram_absorb PSD", &gram_absorb)] {
        let mut all = true;
        let mut detail = String::from("all blocks PSD (exact LDL*)");
        for (ci, block) in gram.iter().enumerate() {
            match ldl_psd_check(block) {
                PsdCheck::Psd { .. } => {}
                PsdCheck::NotPsd { detail: d } => {
                    all = false;
                    detail = format!("Q not PSD in column {ci}: {d}");
                    break;
                }
                PsdCheck::NotHermitian => {
                    all = false;
                    detail = format!("block {ci} is not Hermitian");
                    break;
                }
            }
        }
        push(&mut checks, name, all, detail);
    }

    // residual identity: Λ(gram_sos) + residual = Δ² − kΔ + ε_solve·1
    let mut residual = FaElement::<Exact>::zero();
    for (name, c) in &cert.residual {
        residual.insert(data.label_of(name)?, c.to_exact(ambient)?);
    }
    let target = delta_sq.sub(&delta.scale(&Exact::from_rational(k.clone())));
    let target_solve =
        target.add(&FaElement::unit(data).scale(&Exact::from_rational(eps_solve.clone())));
    let lhs = cone.assemble(&gram_sos).add(&residual);
    let diff = lhs.sub(&target_solve);
    push(
        &mut checks,
        "residual identity",
        diff.is_zero(),
        if diff.is_zero() {
            "Λ(gram_sos) + residual = Δ² − kΔ + eps_solve·1 exactly".to_string()
        } else {
            format!("defect: {diff:?}")
        },
    );

    // absorption identity: Λ(gram_absorb) = residual + (ε − ε_solve)·1
    let slack = Exact::from_rational(&eps - &eps_solve);
    let absorb_target = residual.add(&FaElement::unit(data).scale(&slack));
    let diff2 = cone.assemble(&gram_absorb).sub(&absorb_target);
    push(
        &mut checks,
        "absorption identity",
        diff2.is_zero(),
        if diff2.is_zero() {
            "Λ(gram_absorb) = residual + (eps − eps_solve)·1 exactly".to_string()
        } else {
            format!("defect: {diff2:?}")
        },
    );

    // eta sanity (informational bound recorded by the prover)
    let eta = parse_real_exact(&cert.eta, ambient)?;
    push(
        &mut checks,
        "eta",
        eta.is_real_val() && eta.sign() != Sign::Neg,
        format!("eta = {}", cert.eta),
    );

    // final claim (implied by the two identities, re-checked directly)
    let total = cone.assemble(&gram_sos).add(&cone.assemble(&gram_absorb));
    let target_final =
        target.add(&FaElement::unit(data).scale(&Exact::from_rational(eps.clone())));
    let diff3 = total.sub(&target_final);
    push(
        &mut checks,
        "final claim",
        diff3.is_zero(),
        if diff3.is_zero() {
            "Λ(gram_sos + gram_absorb) = Δ² − kΔ + eps·1 ∈ Σ²C(support)".to_string()
        } else {
            format!("defect: {diff3:?}")
        },
    );

    let accepted = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        accepted,
        k: cert.k.clone(),
        eps: cert.eps.clone(),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::scalar::C64;
    use num_traits::Zero;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn cone_exact(name: &str) -> Cone<Exact> {
        let cat = builtin::builtin_category(name).unwrap();
        let skel = Arc::new(cat.skeleton_exact().unwrap());
        let tube = Arc::new(TubeAlgebra::new(skel, None));
        let rank = cat.fusion.rank();
        Cone::new(tube, ConeSupport::full(rank)).unwrap()
    }

    fn cone_f64(name: &str) -> Cone<C64> {
        let cat = builtin::builtin_category(name).unwrap();
        let skel = Arc::new(cat.skeleton_f64().unwrap());
        let tube = Arc::new(TubeAlgebra::new(skel, None));
        let rank = cat.fusion.rank();
        Cone::new(tube, ConeSupport::full(rank)).unwrap()
    }

    #[test]
    fn column_structure() {
        // Vec(Z/2): only the unit column, 2-dimensional
        let c = cone_exact("vec_z2");
        assert_eq!(c.column_dims().len(), 1);
        assert_eq!(c.column_dims()[0].1, 2);
        // Fibonacci: unit column of dim 2, tau column of dim 1
        let c = cone_exact("fib");
        let dims = c.column_dims();
        assert_eq!(dims.len(), 2);
        assert_eq!(dims[0].1, 2);
        assert_eq!(dims[1].1, 1);
        // Ising: unit column of dim 3, eps column of dim 1 (sigma empty)
        let c = cone_exact("ising");
        let dims = c.column_dims();
        assert_eq!(dims.len(), 2);
        assert_eq!(dims[0].1, 3);
        assert_eq!(dims[1].1, 1);
    }

    #[test]
    fn unit_gram_assembles_to_unit() {
        let c = cone_exact("fib");
        let mut gram = c.zero_gram();
        let (uc, up) = c.unit_position();
        gram[uc][(up, up)] = Exact::int(1);
        let out = c.assemble(&gram);
        assert_eq!(out, FaElement::unit(&c.tube.skel.fusion));
    }

    #[test]
    fn identity_gram_on_fib_unit_column() {
        // the unit column basis is {embed(1), embed(τ)}, so the identity
        // Gram assembles to Σ_w w·w̄ = 1 + (1 + τ) = 2·1 + τ
        let c = cone_exact("fib");
        let data = c.tube.skel.fusion.clone();
        let tau = data.label_of("tau").unwrap();
        let (uc, _) = c.unit_position();
        let mut gram = c.zero_gram();
        let n = c.columns[uc].tube_indices.len();
        gram[uc] = Mat::identity(n);
        let out = c.assemble(&gram);
        let expect = FaElement::from_coeffs([
            (data.unit(), Exact::int(2)),
            (tau, Exact::int(1)),
        ]);
        assert_eq!(out, expect);
    }

    #[test]
    fn assemble_hermitian_to_self_adjoint_and_omega_positive() {
        let c = cone_f64("ising");
        let data = c.tube.skel.fusion.clone();
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..25 {
            let mut gram = c.zero_gram();
            for (ci, col) in c.columns.iter().enumerate() {
                let n = col.tube_indices.len();
                let m = Mat::from_fn(n, n, |_, _| {
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                gram[ci] = m.matmul(&m.dagger());
            }
            let out = c.assemble(&gram);
            assert!(out.sub(&out.star(&data)).max_abs_approx() < 1e-10);
            // Ω(Λ(Q)) = unit coefficient ≥ 0
            assert!(out.coeff(data.unit()).re > -1e-12);
        }
    }

    #[test]
    fn salience_on_rank_one_directions() {
        let c = cone_exact("fib");
        for (ci, col) in c.columns.iter().enumerate() {
            let n = col.tube_indices.len();
            for p in 0..n {
                let mut gram = c.zero_gram();
                gram[ci][(p, p)] = Exact::int(1);
                assert!(!c.assemble(&gram).is_zero());
            }
            let v: Vec<Exact> = (0..n).map(|i| Exact::int(i as i64 + 1)).collect();
            let mut gram = c.zero_gram();
            c.add_rank_one(&mut gram, ci, &v, &Exact::int(1));
            assert!(!c.assemble(&gram).is_zero());
        }
    }

    #[test]
    fn order_unit_simple_objects_exact() {
        for name in ["vec_z2", "vec_z3", "fib", "ising"] {
            let c = cone_exact(name);
            let skel = c.tube.skel.clone();
            let data = skel.fusion.clone();
            for z in data.simples() {
                let zw = skel.word(&[z]);
                let ou = c
                    .order_unit_certificate(&zw, skel.unit(), &skel.identity(&zw))
                    .unwrap();
                // R = d(z)²
                let d = skel.dims[z.0].clone();
                assert_eq!(ou.r_bound, d.clone() * d.clone(), "{name} R = d² for {z:?}");
                // Λ(gram) + z̄·z = d²·1 exactly
                let lhs = c.assemble(&ou.gram).add(&ou.bstar_b);
                let rhs = FaElement::unit(&data).scale(&(d.clone() * d));
                assert!(lhs.sub(&rhs).is_zero(), "{name} {z:?}");
            }
        }
    }

    #[test]
    fn order_unit_fib_tau_value() {
        // Λ(certificate) = φ²·1 − τ̄·τ = φ·1 − τ
        let c = cone_exact("fib");
        let skel = c.tube.skel.clone();
        let data = skel.fusion.clone();
        let tau = data.label_of("tau").unwrap();
        let zw = skel.word(&[tau]);
        let ou = c
            .order_unit_certificate(&zw, skel.unit(), &skel.identity(&zw))
            .unwrap();
        let phi = skel.dims[tau.0].clone();
        let lam = c.assemble(&ou.gram);
        let expect = FaElement::unit(&data)
            .scale(&phi)
            .sub(&FaElement::basis(tau));
        assert!(lam.sub(&expect).is_zero());
        for block in &ou.gram {
            assert!(ldl_psd_check(block).is_psd());
        }
    }

    #[test]
    fn order_unit_generic_morphisms_float() {
        // every element is bounded: the constructive certificate verifies
        // for random γ on one- and two-letter words, in every builtin
        let mut rng = StdRng::seed_from_u64(23);
        for name in ["vec_z2", "vec_z3", "fib", "ising"] {
            let c = cone_f64(name);
            let skel = c.tube.skel.clone();
            let simples: Vec<crate::fusion::Label> = skel.fusion.simples().collect();
            for z_letters in [
                vec![simples[simples.len() - 1]],
                vec![simples[simples.len() - 1], simples[1 % simples.len()]],
            ] {
                let z = skel.word(&z_letters);
                let gamma = crate::tube::random_morphism_f64(&skel, &z, &z, &mut rng);
                if gamma.is_zero() {
                    continue;
                }
                let ou = c
                    .order_unit_certificate(&z, skel.unit(), &gamma)
                    .expect("order-unit certificate for generic γ");
                let lhs = c.assemble(&ou.gram).add(&ou.bstar_b);
                let rhs = FaElement::<C64>::unit(&skel.fusion).scale(&ou.r_bound);
                assert!(
                    lhs.sub(&rhs).max_abs_approx() < 1e-8,
                    "{name} {z_letters:?}"
                );
            }
        }
    }

    #[test]
    fn laplacian_certificate_exact() {
        use crate::fusion::build_laplacian;
        for (name, gens) in [
            ("vec_z2", vec!["g"]),
            ("fib", vec!["tau"]),
            ("ising", vec!["sigma"]),
        ] {
            let c = cone_exact(name);
            let skel = c.tube.skel.clone();
            let data = skel.fusion.clone();
            let labels: Vec<Label> = gens.iter().map(|g| data.label_of(g).unwrap()).collect();
            let spec = LaplacianSpec::uniform(labels);
            let gram = c.laplacian_positivity_certificate(&spec).unwrap();
            let delta = build_laplacian(&spec, &data, &skel.dims).unwrap();
            assert!(c.assemble(&gram).sub(&delta).is_zero(), "{name}");
            for block in &gram {
                assert!(ldl_psd_check(block).is_psd(), "{name}");
            }
        }
    }

    #[test]
    fn vec_z2_laplacian_is_half_square() {
        // Δ = 1 − g = ½(1−g)*(1−g): rank-one ½·vv† with v = (1, −1)
        let c = cone_exact("vec_z2");
        let g = c.tube.skel.fusion.label_of("g").unwrap();
        let spec = LaplacianSpec::uniform(vec![g]);
        let gram = c.laplacian_positivity_certificate(&spec).unwrap();
        let half = Exact::from_rational(Rational::new(1.into(), 2.into()));
        assert_eq!(gram[0][(0, 0)], half);
        assert_eq!(gram[0][(1, 1)], half);
        assert_eq!(gram[0][(0, 1)], half.neg_ref());
    }

    #[test]
    fn l1_absorption_examples() {
        // r = 0 → eta = 0, empty decomposition
        let c = cone_exact("fib");
        let (eta, gram) = c.l1_absorption(&FaElement::zero()).unwrap();
        assert!(eta.is_zero());
        assert!(c.assemble(&gram).is_zero());

        // r = −τ → eta = φ, Λ(G) = φ·1 − τ exactly
        let data = c.tube.skel.fusion.clone();
        let tau = data.label_of("tau").unwrap();
        let r = FaElement::from_coeffs([(tau, Exact::int(-1))]);
        let (eta, gram) = c.l1_absorption(&r).unwrap();
        let phi = c.tube.skel.dims[tau.0].clone();
        assert_eq!(eta, phi);
        let lam = c.assemble(&gram);
        let expect = FaElement::unit(&data).scale(&eta).add(&r);
        assert!(lam.sub(&expect).is_zero());
        for b in &gram {
            assert!(ldl_psd_check(b).is_psd());
        }

        // r = i·g − i·g² in Vec(Z/3) → eta = 2, exact decomposition
        let c3 = cone_exact("vec_z3");
        let d3 = c3.tube.skel.fusion.clone();
        let g = d3.label_of("g").unwrap();
        let g2 = d3.label_of("g^2").unwrap();
        let r = FaElement::from_coeffs([(g, Exact::i()), (g2, Exact::i().neg_ref())]);
        let (eta, gram) = c3.l1_absorption(&r).unwrap();
        assert_eq!(eta, Exact::int(2));
        let lam = c3.assemble(&gram);
        let expect = FaElement::unit(&d3).scale(&eta).add(&r);
        assert!(lam.sub(&expect).is_zero());
        for b in &gram {
            assert!(ldl_psd_check(b).is_psd());
        }

        // non-self-adjoint input is rejected
        let bad = FaElement::from_coeffs([(g, Exact::i())]);
        assert!(c3.l1_absorption(&bad).is_err());
    }

    #[test]
    fn hand_built_certificate_vec_z2_verifies() {
        // Δ = 1 − g has Δ² = 2Δ, so Δ² − 2Δ = 0 and ε·1 = ε·p₁p₁*.
        let cat = builtin::builtin_category("vec_z2").unwrap();
        let c = cone_exact("vec_z2");
        let data = c.tube.skel.fusion.clone();
        let g = data.label_of("g").unwrap();
        let spec = LaplacianSpec::uniform(vec![g]);
        let eps = Rational::new(1.into(), 100.into());
        let (uc, up) = c.unit_position();
        let mut gram_sos = c.zero_gram();
        gram_sos[uc][(up, up)] = Exact::from_rational(eps.clone());
        let gram_absorb = c.zero_gram();
        let cert = certificate_file(
            &cat,
            &c,
            &spec,
            &Rational::new(2.into(), 1.into()),
            &eps,
            &eps,
            &Exact::int(0),
            &gram_sos,
            &gram_absorb,
            &FaElement::zero(),
        );
        let report = verify_certificate(&cert, &cat).unwrap();
        assert!(report.accepted, "{report}");

        // same certificate with k = 2.1 = 21/10 must be rejected
        let mut bad = cert.clone();
        bad.k = "21/10".to_string();
        let report = verify_certificate(&bad, &cat).unwrap();
        assert!(!report.accepted);

        // corrupting the Gram to an indefinite matrix must be rejected
        let mut bad2 = cert.clone();
        bad2.gram_sos[0].entries[1] = CScalarFile {
            re: "1".into(),
            im: String::new(),
        };
        bad2.gram_sos[0].entries[2] = CScalarFile {
            re: "1".into(),
            im: String::new(),
        };
        let report = verify_certificate(&bad2, &cat).unwrap();
        assert!(!report.accepted);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name.contains("gram_sos") && !c.passed));
    }

    #[test]
    fn certificate_roundtrip_json() {
        // a valid certificate for k = 0: Δ² = a·a* with a = Δ on the unit
        // column, plus ε at the unit position
        let cat = builtin::builtin_category("fib").unwrap();
        let c = cone_exact("fib");
        let data = c.tube.skel.fusion.clone();
        let tau = data.label_of("tau").unwrap();
        let spec = LaplacianSpec::uniform(vec![tau]);
        let skel = c.tube.skel.clone();
        let delta = crate::fusion::build_laplacian(&spec, &data, &skel.dims).unwrap();
        let (uc, up) = c.unit_position();
        let mut v = vec![Exact::int(0); c.columns[uc].tube_indices.len()];
        for (pi, &ti) in c.columns[uc].tube_indices.iter().enumerate() {
            let w = c.tube.basis()[ti].key.w;
            v[pi] = delta.coeff(w);
        }
        let mut gram_sos = c.zero_gram();
        c.add_rank_one(&mut gram_sos, uc, &v, &Exact::int(1));
        let eps = Rational::new(1.into(), 50.into());
        gram_sos[uc][(up, up)] = gram_sos[uc][(up, up)]
            .clone()
            .add_ref(&Exact::from_rational(eps.clone()));
        let cert = certificate_file(
            &cat,
            &c,
            &spec,
            &Rational::zero(),
            &eps,
            &eps,
            &Exact::int(0),
            &gram_sos,
            &c.zero_gram(),
            &FaElement::zero(),
        );
        let json = cert.to_json();
        let cert2 = CertificateFile::parse(&json).unwrap();
        let report = verify_certificate(&cert2, &cat).unwrap();
        assert!(report.accepted, "{report}");
    }
}
