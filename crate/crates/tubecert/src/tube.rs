//! The tube algebra A = ⊕_{x,y,w} C(w⊗x, y⊗w): graded basis, convolution
//! product, star, the weight-1 functional Ω, the Ψ maps, and the
//! identification of the fusion algebra with the (1,1) corner.

use crate::fusion::{FaElement, Label};
use crate::mat::Mat;
use crate::scalar::{Scalar, C64};
use crate::skeleton::{FusionTree, Morphism, Skeleton, Word};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TubeError {
    #[error("tube element has support outside the algebra's gradings ({0})")]
    OutsideGrading(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Grading key of a tube-algebra component: source x, target y, weight w.
/// The component lives in A^w_{x,y} = C(w⊗x, y⊗w).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TubeKey {
    pub x: Label,
    pub y: Label,
    pub w: Label,
}

impl fmt::Debug for TubeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A^{}_{{{},{}}}", self.w.0, self.x.0, self.y.0)
    }
}

/// One orthonormal basis vector of A^w_{x,y}: the rank-one morphism
/// T_tgt ∘ T_src† over a common root.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TubeBasisVector {
    pub key: TubeKey,
    pub root: Label,
    pub tree_src: FusionTree,
    pub tree_tgt: FusionTree,
}

/// A finitely supported element of the tube algebra.
#[derive(Clone)]
pub struct TubeElement<S> {
    components: BTreeMap<TubeKey, Morphism<S>>,
}

impl<S: Scalar> TubeElement<S> {
    pub fn zero() -> TubeElement<S> {
        TubeElement {
            components: BTreeMap::new(),
        }
    }

    pub fn component(&self, key: &TubeKey) -> Option<&Morphism<S>> {
        self.components.get(key)
    }

    pub fn components(&self) -> impl Iterator<Item = (&TubeKey, &Morphism<S>)> {
        self.components.iter()
    }

    pub fn insert(&mut self, key: TubeKey, m: Morphism<S>) {
        if m.is_zero() {
            return;
        }
        match self.components.remove(&key) {
            Some(existing) => {
                let sum = existing.add(&m);
                if !sum.is_zero() {
                    self.components.insert(key, sum);
                }
            }
            None => {
                self.components.insert(key, m);
            }
        }
    }

    pub fn add(&self, other: &TubeElement<S>) -> TubeElement<S> {
        let mut out = self.clone();
        for (k, m) in &other.components {
            out.insert(*k, m.clone());
        }
        out
    }

    pub fn sub(&self, other: &TubeElement<S>) -> TubeElement<S> {
        self.add(&other.scale(&(-S::one())))
    }

    pub fn scale(&self, s: &S) -> TubeElement<S> {
        if s.is_zero() {
            return TubeElement::zero();
        }
        TubeElement {
            components: self
                .components
                .iter()
                .map(|(k, m)| (*k, m.scale(s)))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.components
            .values()
            .map(|m| m.max_abs())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &TubeElement<S>) -> f64 {
        self.sub(other).max_abs()
    }
}

impl<S: Scalar> fmt::Debug for TubeElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TubeElement{:?}",
            self.components.keys().collect::<Vec<_>>()
        )
    }
}

/// Precomputed structure constants over the algebra's full basis.
pub struct StructureConstants<S> {
    /// mult\[i\]\[j\] = expansion of b_i · b_j
    pub mult: Vec<Vec<Vec<(usize, S)>>>,
    /// star\[i\] = expansion of b_i*
    pub star: Vec<Vec<(usize, S)>>,
}

/// The tube algebra of a skeletal category, restricted to a weight set
/// (the full simple set for finite categories; a truncation otherwise).
pub struct TubeAlgebra<S: Scalar> {
    pub skel: Arc<Skeleton<S>>,
    pub weights: Vec<Label>,
    basis: Vec<TubeBasisVector>,
    index: BTreeMap<TubeKey, Vec<usize>>,
    truncated: bool,
    sc: OnceLock<StructureConstants<S>>,
}

impl<S: Scalar> TubeAlgebra<S> {
    pub fn new(skel: Arc<Skeleton<S>>, weights: Option<Vec<Label>>) -> TubeAlgebra<S> {
        let all: Vec<Label> = skel.fusion.simples().collect();
        let weights = weights.unwrap_or_else(|| all.clone());
        let truncated = weights.len() != all.len();
        let mut basis = Vec::new();
        let mut index: BTreeMap<TubeKey, Vec<usize>> = BTreeMap::new();
        for &w in &weights {
            for x in skel.fusion.simples() {
                for y in skel.fusion.simples() {
                    let key = TubeKey { x, y, w };
                    let src_w = skel.word(&[w, x]);
                    let tgt_w = skel.word(&[y, w]);
                    for r in skel.fusion.simples() {
                        let src_trees = skel.tree_basis(&src_w, r);
                        let tgt_trees = skel.tree_basis(&tgt_w, r);
                        for ts in &src_trees {
                            for tt in &tgt_trees {
                                index.entry(key).or_default().push(basis.len());
                                basis.push(TubeBasisVector {
                                    key,
                                    root: r,
                                    tree_src: ts.clone(),
                                    tree_tgt: tt.clone(),
                                });
                            }
                        }
                    }
                }
            }
        }
        TubeAlgebra {
            skel,
            weights,
            basis,
            index,
            truncated,
            sc: OnceLock::new(),
        }
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[TubeBasisVector] {
        &self.basis
    }

    /// Basis vectors of selected gradings, with their global indices.
    pub fn basis_for(
        &self,
        xs: &[Label],
        ys: &[Label],
        ws: &[Label],
    ) -> Vec<(usize, &TubeBasisVector)> {
        self.basis
            .iter()
            .enumerate()
            .filter(|(_, v)| {
                xs.contains(&v.key.x) && ys.contains(&v.key.y) && ws.contains(&v.key.w)
            })
            .collect()
    }

    pub fn basis_element(&self, i: usize) -> TubeElement<S> {
        let v = &self.basis[i];
        let mut out = TubeElement::zero();
        out.insert(v.key, self.skel.tree_pair(&v.tree_tgt, &v.tree_src));
        out
    }

    /// Expansion of an element in the orthonormal tree-pair basis.
    pub fn expand(&self, a: &TubeElement<S>) -> Result<Vec<S>, TubeError> {
        let mut coeffs = vec![S::zero(); self.basis.len()];
        for (key, m) in a.components() {
            let Some(idxs) = self.index.get(key) else {
                return Err(TubeError::OutsideGrading(format!("{key:?}")));
            };
            let src_w = self.skel.word(&[key.w, key.x]);
            let tgt_w = self.skel.word(&[key.y, key.w]);
            for &i in idxs {
                let v = &self.basis[i];
                if let Some(block) = m.block(v.root) {
                    let src_trees = self.skel.tree_basis(&src_w, v.root);
                    let tgt_trees = self.skel.tree_basis(&tgt_w, v.root);
                    let is = src_trees.iter().position(|t| *t == v.tree_src).unwrap();
                    let it = tgt_trees.iter().position(|t| *t == v.tree_tgt).unwrap();
                    coeffs[i] = block[(it, is)].clone();
                }
            }
        }
        Ok(coeffs)
    }

    /// The convolution product, evaluated by the defining formula
    /// (a·b)^k = Σ_{s,m,l,V} (1_y ⊗ V†)(a^m ⊗ 1_l)(1_m ⊗ b^l)(V ⊗ 1_x).
    pub fn multiply(&self, a: &TubeElement<S>, b: &TubeElement<S>) -> TubeElement<S> {
        let skel = &*self.skel;
        let mut out = TubeElement::zero();
        for (ka, ma) in a.components() {
            for (kb, mb) in b.components() {
                // a ∈ A_{s,j}, b ∈ A_{i,s}: the product needs a.x = b.y
                if ka.x != kb.y {
                    continue;
                }
                let (m_w, l_w) = (ka.w, kb.w);
                let id_j = skel.identity(&skel.word(&[ka.y]));
                let id_i = skel.identity(&skel.word(&[kb.x]));
                let id_l = skel.identity(&skel.word(&[l_w]));
                let id_m = skel.identity(&skel.word(&[m_w]));
                let inner = skel.compose(&skel.tensor(ma, &id_l), &skel.tensor(&id_m, mb));
                let ml_word = skel.word(&[m_w, l_w]);
                for &k in &self.weights {
                    for v in skel.tree_basis(&ml_word, k) {
                        let vm = skel.tree_morphism(&v);
                        let left = skel.tensor(&id_j, &vm.dagger());
                        let right = skel.tensor(&vm, &id_i);
                        let term = skel.compose(&left, &skel.compose(&inner, &right));
                        out.insert(
                            TubeKey {
                                x: kb.x,
                                y: ka.y,
                                w: k,
                            },
                            term,
                        );
                    }
                }
            }
        }
        out
    }

    /// The antilinear star: the weight-w component γ contributes
    /// (R̄† ⊗ 1 ⊗ 1)(1 ⊗ γ† ⊗ 1)(1 ⊗ 1 ⊗ R) at weight w̄, with (R, R̄)
    /// the fixed standard solution for the pair (w̄, w).
    pub fn star(&self, a: &TubeElement<S>) -> TubeElement<S> {
        let skel = &*self.skel;
        let data = &skel.fusion;
        let mut out = TubeElement::zero();
        for (k, m) in a.components() {
            let wb = data.dual(k.w);
            let (r, rbar) = skel.cup(wb).clone();
            let id_wb = skel.identity(&skel.word(&[wb]));
            let id_x = skel.identity(&skel.word(&[k.x]));
            let id_y = skel.identity(&skel.word(&[k.y]));
            let intro = skel.tensor(&skel.tensor(&id_wb, &id_y), &r);
            let mid = skel.tensor(&skel.tensor(&id_wb, &m.dagger()), &id_wb);
            let cap = skel.tensor(&skel.tensor(&rbar.dagger(), &id_x), &id_wb);
            let term = skel.compose(&cap, &skel.compose(&mid, &intro));
            out.insert(
                TubeKey {
                    x: k.y,
                    y: k.x,
                    w: wb,
                },
                term,
            );
        }
        out
    }

    /// Ω: the weight-1 diagonal trace, Ω(γ) = δ_{x=y} δ_{w=1} Tr_x(γ).
    pub fn omega(&self, a: &TubeElement<S>) -> S {
        let unit = self.skel.unit();
        let mut total = S::zero();
        for (k, m) in a.components() {
            if k.w == unit && k.x == k.y {
                total = total + self.skel.trace(m);
            }
        }
        total
    }

    /// Ψ^z_{x,y}(γ) for γ ∈ C(z⊗x, y⊗z): the finitely supported family
    /// Σ_{α ∈ onb C(w,z)} (1_y ⊗ α†) γ (α ⊗ 1_x) over weights w.
    pub fn psi(
        &self,
        z: &Word,
        x: Label,
        y: Label,
        gamma: &Morphism<S>,
    ) -> Result<TubeElement<S>, TubeError> {
        let skel = &*self.skel;
        let expect_src = z.concat(&skel.word(&[x]));
        let expect_tgt = skel.word(&[y]).concat(z);
        if gamma.source != expect_src || gamma.target != expect_tgt {
            return Err(TubeError::Shape(format!(
                "psi: expected C({expect_src:?}, {expect_tgt:?}), got C({:?}, {:?})",
                gamma.source, gamma.target
            )));
        }
        let id_x = skel.identity(&skel.word(&[x]));
        let id_y = skel.identity(&skel.word(&[y]));
        let mut out = TubeElement::zero();
        for &w in &self.weights {
            for alpha in skel.tree_basis(z, w) {
                let am = skel.tree_morphism(&alpha);
                let term = skel.compose(
                    &skel.tensor(&id_y, &am.dagger()),
                    &skel.compose(gamma, &skel.tensor(&am, &id_x)),
                );
                out.insert(TubeKey { x, y, w }, term);
            }
        }
        Ok(out)
    }

    /// The unital *-embedding of the fusion algebra onto A_{1,1}:
    /// w ↦ Ψ^w_{1,1}(1_w), extended linearly.
    pub fn embed(&self, x: &FaElement<S>) -> TubeElement<S> {
        let unit = self.skel.unit();
        let mut out = TubeElement::zero();
        for (w, c) in x.support() {
            let id_w = self.skel.identity(&self.skel.word(&[w]));
            out.insert(
                TubeKey {
                    x: unit,
                    y: unit,
                    w,
                },
                id_w.scale(c),
            );
        }
        out
    }

    /// Inverse of [`TubeAlgebra::embed`] on the (1,1) corner.
    pub fn corner_to_fusion(&self, a: &TubeElement<S>) -> Result<FaElement<S>, TubeError> {
        let unit = self.skel.unit();
        let mut out = FaElement::zero();
        for (k, m) in a.components() {
            if k.x != unit || k.y != unit {
                return Err(TubeError::OutsideGrading(format!(
                    "{k:?} is not in the (1,1) corner"
                )));
            }
            let block = m
                .block(k.w)
                .ok_or_else(|| TubeError::Shape(format!("empty corner block at {k:?}")))?;
            out.insert(k.w, block[(0, 0)].clone());
        }
        Ok(out)
    }

    /// The projection p_m = 1_m ∈ A^1_{m,m}.
    pub fn projector(&self, m: Label) -> TubeElement<S> {
        let unit = self.skel.unit();
        let mut out = TubeElement::zero();
        out.insert(
            TubeKey {
                x: m,
                y: m,
                w: unit,
            },
            self.skel.identity(&self.skel.word(&[m])),
        );
        out
    }

    /// Structure constants over the full basis (computed once, cached).
    pub fn structure_constants(&self) -> &StructureConstants<S> {
        self.sc.get_or_init(|| {
            let n = self.basis.len();
            let mut mult = Vec::with_capacity(n);
            for i in 0..n {
                let bi = self.basis_element(i);
                let mut row = Vec::with_capacity(n);
                for j in 0..n {
                    let bj = self.basis_element(j);
                    let prod = self.multiply(&bi, &bj);
                    let coeffs = self.expand(&prod).expect("product stays in grading");
                    row.push(
                        coeffs
                            .into_iter()
                            .enumerate()
                            .filter(|(_, c)| !c.is_zero())
                            .collect::<Vec<_>>(),
                    );
                }
                mult.push(row);
            }
            let mut star = Vec::with_capacity(n);
            for i in 0..n {
                let s = self.star(&self.basis_element(i));
                let coeffs = self.expand(&s).expect("star stays in grading");
                star.push(
                    coeffs
                        .into_iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .collect::<Vec<_>>(),
                );
            }
            StructureConstants { mult, star }
        })
    }

    /// Product in coefficient form via the cached structure constants.
    pub fn multiply_coeffs(&self, a: &[S], b: &[S]) -> Vec<S> {
        let sc = self.structure_constants();
        let n = self.basis.len();
        let mut out = vec![S::zero(); n];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if bj.is_zero() {
                    continue;
                }
                let c = ai.clone() * bj.clone();
                for (k, m) in &sc.mult[i][j] {
                    out[*k] = out[*k].clone() + c.clone() * m.clone();
                }
            }
        }
        out
    }

    /// Star in coefficient form (antilinear) via the cached table.
    pub fn star_coeffs(&self, a: &[S]) -> Vec<S> {
        let sc = self.structure_constants();
        let n = self.basis.len();
        let mut out = vec![S::zero(); n];
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            let c = ai.conj();
            for (j, m) in &sc.star[i] {
                out[*j] = out[*j].clone() + c.clone() * m.clone();
            }
        }
        out
    }

    /// Ω in coefficient form.
    pub fn omega_coeffs(&self, a: &[S]) -> S {
        let mut total = S::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            total = total + ai.clone() * self.omega(&self.basis_element(i));
        }
        total
    }

    /// Gram matrix G\[j,i\] = Ω(b_j*·b_i) of the basis under ⟨a,b⟩ = Ω(b*·a).
    pub fn omega_gram(&self) -> Mat<S> {
        let n = self.dim();
        let mut g = Mat::<S>::zeros(n, n);
        let unit = |i: usize| {
            let mut v = vec![S::zero(); n];
            v[i] = S::one();
            v
        };
        let stars: Vec<Vec<S>> = (0..n).map(|j| self.star_coeffs(&unit(j))).collect();
        for i in 0..n {
            let ei = unit(i);
            for (j, sj) in stars.iter().enumerate() {
                g[(j, i)] = self.omega_coeffs(&self.multiply_coeffs(sj, &ei));
            }
        }
        g
    }
}

/// Serialisable dump of float structure constants, keyed by the content
/// hash of the category file so a cache is never applied to the wrong
/// category.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ScCacheFile {
    pub category_hash: String,
    pub dim: usize,
    /// mult\[i\]\[j\] = \[(k, re, im), ...\]
    pub mult: Vec<Vec<Vec<(usize, f64, f64)>>>,
    pub star: Vec<Vec<(usize, f64, f64)>>,
}

impl TubeAlgebra<C64> {
    /// Exports the (float) structure constants for cache reuse across runs.
    pub fn export_sc(&self, category_hash: &str) -> ScCacheFile {
        let sc = self.structure_constants();
        ScCacheFile {
            category_hash: category_hash.to_string(),
            dim: self.dim(),
            mult: sc
                .mult
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|cell| cell.iter().map(|(k, c)| (*k, c.re, c.im)).collect())
                        .collect()
                })
                .collect(),
            star: sc
                .star
                .iter()
                .map(|cell| cell.iter().map(|(k, c)| (*k, c.re, c.im)).collect())
                .collect(),
        }
    }

    /// Installs cached structure constants; rejected if the hash or the
    /// basis dimension does not match this algebra.
    pub fn import_sc(&self, cache: ScCacheFile, category_hash: &str) -> Result<(), TubeError> {
        if cache.category_hash != category_hash || cache.dim != self.dim() {
            return Err(TubeError::Shape(
                "structure-constant cache does not match this category".into(),
            ));
        }
        let sc = StructureConstants {
            mult: cache
                .mult
                .into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|cell| {
                            cell.into_iter()
                                .map(|(k, re, im)| (k, C64::new(re, im)))
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            star: cache
                .star
                .into_iter()
                .map(|cell| {
                    cell.into_iter()
                        .map(|(k, re, im)| (k, C64::new(re, im)))
                        .collect()
                })
                .collect(),
        };
        let _ = self.sc.set(sc);
        Ok(())
    }
}

/// Numerical validation of the tube-algebra axioms on random elements.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TubeAxiomReport {
    pub dim: usize,
    pub assoc_residual: f64,
    pub star_antimult_residual: f64,
    pub star_involution_residual: f64,
    pub psi_mult_residual: f64,
    pub projector_residual: f64,
    pub embed_hom_residual: f64,
    pub omega_trace_residual: f64,
    pub gram_min_eigenvalue: f64,
    pub gram_hermitian_residual: f64,
}

impl TubeAxiomReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.assoc_residual < tol
            && self.star_antimult_residual < tol
            && self.star_involution_residual < tol
            && self.psi_mult_residual < tol
            && self.projector_residual < tol
            && self.embed_hom_residual < tol
            && self.omega_trace_residual < tol
            && self.gram_hermitian_residual < tol
            && self.gram_min_eigenvalue > 0.0
    }
}

impl fmt::Display for TubeAxiomReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tube algebra dimension: {}", self.dim)?;
        writeln!(
            f,
            "  associativity residual:       {:.3e}",
            self.assoc_residual
        )?;
        writeln!(
            f,
            "  star anti-mult residual:      {:.3e}",
            self.star_antimult_residual
        )?;
        writeln!(
            f,
            "  star involution residual:     {:.3e}",
            self.star_involution_residual
        )?;
        writeln!(
            f,
            "  psi multiplication residual:  {:.3e}",
            self.psi_mult_residual
        )?;
        writeln!(
            f,
            "  projector residual:           {:.3e}",
            self.projector_residual
        )?;
        writeln!(
            f,
            "  embed homomorphism residual:  {:.3e}",
            self.embed_hom_residual
        )?;
        writeln!(
            f,
            "  omega trace residual:         {:.3e}",
            self.omega_trace_residual
        )?;
        writeln!(
            f,
            "  omega Gram min eigenvalue:    {:.6}",
            self.gram_min_eigenvalue
        )?;
        write!(
            f,
            "  omega Gram hermiticity:       {:.3e}",
            self.gram_hermitian_residual
        )
    }
}

/// Runs the axiom suite on the float tube algebra with random triples.
pub fn axiom_report(tube: &TubeAlgebra<C64>, trials: usize, seed: u64) -> TubeAxiomReport {
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(seed);
    let n = tube.dim();
    let random_coeffs = |rng: &mut StdRng| -> Vec<C64> {
        (0..n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    };
    let dist = |a: &[C64], b: &[C64]| -> f64 {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    let mut assoc = 0.0f64;
    let mut antimult = 0.0f64;
    let mut involution = 0.0f64;
    for _ in 0..trials {
        let a = random_coeffs(&mut rng);
        let b = random_coeffs(&mut rng);
        let c = random_coeffs(&mut rng);
        let ab_c = tube.multiply_coeffs(&tube.multiply_coeffs(&a, &b), &c);
        let a_bc = tube.multiply_coeffs(&a, &tube.multiply_coeffs(&b, &c));
        assoc = assoc.max(dist(&ab_c, &a_bc));
        let ab_star = tube.star_coeffs(&tube.multiply_coeffs(&a, &b));
        let bstar_astar = tube.multiply_coeffs(&tube.star_coeffs(&b), &tube.star_coeffs(&a));
        antimult = antimult.max(dist(&ab_star, &bstar_astar));
        involution = involution.max(dist(&tube.star_coeffs(&tube.star_coeffs(&a)), &a));
    }

    // Ψ-multiplication compatibility: Ψ^{z1}(γ1)·Ψ^{z2}(γ2) =
    // Ψ^{z1⊗z2}((γ1⊗1)(1⊗γ2)) for random γ's on single-letter words.
    let skel = &*tube.skel;
    let simples: Vec<Label> = skel.fusion.simples().collect();
    let mut psi_res = 0.0f64;
    for _ in 0..trials.min(20) {
        let z1 = skel.word(&[simples[rng.gen_range(0..simples.len())]]);
        let z2 = skel.word(&[simples[rng.gen_range(0..simples.len())]]);
        let x1 = simples[rng.gen_range(0..simples.len())];
        let y1 = simples[rng.gen_range(0..simples.len())];
        let x2 = simples[rng.gen_range(0..simples.len())];
        let src1 = z1.concat(&skel.word(&[x1]));
        let tgt1 = skel.word(&[y1]).concat(&z1);
        let src2 = z2.concat(&skel.word(&[x2]));
        let tgt2 = skel.word(&[x1]).concat(&z2); // y2 = x1 so the product is non-trivial
        let g1 = random_morphism_f64(skel, &src1, &tgt1, &mut rng);
        let g2 = random_morphism_f64(skel, &src2, &tgt2, &mut rng);
        if g1.is_zero() || g2.is_zero() {
            continue;
        }
        let p1 = tube.psi(&z1, x1, y1, &g1).unwrap();
        let p2 = tube.psi(&z2, x2, x1, &g2).unwrap();
        let lhs = tube.multiply(&p1, &p2);
        let id_z1 = skel.identity(&z1);
        let id_z2 = skel.identity(&z2);
        let combined = skel.compose(&skel.tensor(&g1, &id_z2), &skel.tensor(&id_z1, &g2));
        let rhs = tube.psi(&z1.concat(&z2), x2, y1, &combined).unwrap();
        psi_res = psi_res.max(lhs.distance(&rhs));
    }

    // projections: p_m p_m' = δ_mm' p_m, self-adjoint
    let mut proj = 0.0f64;
    for &m1 in &simples {
        let p1 = tube.projector(m1);
        proj = proj.max(tube.star(&p1).distance(&p1));
        for &m2 in &simples {
            let p2 = tube.projector(m2);
            let prod = tube.multiply(&p1, &p2);
            let expect = if m1 == m2 {
                p1.clone()
            } else {
                TubeElement::zero()
            };
            proj = proj.max(prod.distance(&expect));
        }
    }

    // embed is a unital *-homomorphism on simple pairs
    let mut embed_res = 0.0f64;
    for &a in &simples {
        let ea = tube.embed(&FaElement::basis(a));
        let star_embedded = tube.star(&ea);
        let embedded_star = tube.embed(&FaElement::<C64>::basis(a).star(&skel.fusion));
        embed_res = embed_res.max(star_embedded.distance(&embedded_star));
        for &b in &simples {
            let eb = tube.embed(&FaElement::basis(b));
            let lhs = tube.multiply(&ea, &eb);
            let rhs = tube
                .embed(&FaElement::<C64>::basis(a).multiply(&FaElement::basis(b), &skel.fusion));
            embed_res = embed_res.max(lhs.distance(&rhs));
        }
    }

    // Ω is tracial: Ω(ab) = Ω(ba) on random pairs
    let mut omega_trace = 0.0f64;
    for _ in 0..trials {
        let a = random_coeffs(&mut rng);
        let b = random_coeffs(&mut rng);
        let d = tube.omega_coeffs(&tube.multiply_coeffs(&a, &b))
            - tube.omega_coeffs(&tube.multiply_coeffs(&b, &a));
        omega_trace = omega_trace.max(d.norm());
    }

    // Gram positivity
    let g = tube.omega_gram();
    let mut herm = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            herm = herm.max((g[(i, j)] - g[(j, i)].conj()).norm());
        }
    }
    let gm = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (g[(i, j)].re + g[(j, i)].re));
    let min_eig = nalgebra::SymmetricEigen::new(gm)
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);

    TubeAxiomReport {
        dim: n,
        assoc_residual: assoc,
        star_antimult_residual: antimult,
        star_involution_residual: involution,
        psi_mult_residual: psi_res,
        projector_residual: proj,
        embed_hom_residual: embed_res,
        omega_trace_residual: omega_trace,
        gram_min_eigenvalue: min_eig,
        gram_hermitian_residual: herm,
    }
}

/// Random morphism with independent uniform complex entries.
pub fn random_morphism_f64<R: rand::Rng>(
    skel: &Skeleton<C64>,
    src: &Word,
    tgt: &Word,
    rng: &mut R,
) -> Morphism<C64> {
    let mut out = Morphism::zero(src.clone(), tgt.clone());
    for r in skel.roots(src) {
        let ns = skel.tree_basis(src, r).len();
        let nt = skel.tree_basis(tgt, r).len();
        if ns == 0 || nt == 0 {
            continue;
        }
        let m = Mat::from_fn(nt, ns, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        out.set_block(r, m);
    }
    out
}
