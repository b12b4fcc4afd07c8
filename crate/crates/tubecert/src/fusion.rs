//! Fusion-ring combinatorics: validation of fusion data, Frobenius–Perron
//! dimensions, arithmetic in the fusion algebra, and the Laplacian element.

use crate::scalar::{Rational, Scalar};
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Index of a simple object in the fusion data's label table.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Label(pub usize);

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("unknown simple label '{0}'")]
    UnknownLabel(String),
    #[error("fusion data invalid: {0}")]
    Invalid(String),
    #[error("Frobenius–Perron iteration failed to converge")]
    FpDivergence,
    #[error("Laplacian parameters invalid: {0}")]
    BadLaplacian(String),
}

/// The combinatorial skeleton of a fusion category: simple labels, unit,
/// duality involution and fusion coefficients N_{ab}^c.
#[derive(Clone, Debug)]
pub struct FusionData {
    names: Vec<String>,
    unit: Label,
    dual: Vec<Label>,
    n: Vec<u32>, // dense (a,b,c) -> N_{ab}^c
}

impl FusionData {
    pub fn new(
        names: Vec<String>,
        unit: usize,
        dual: Vec<usize>,
        coefficients: &[(usize, usize, usize, u32)],
    ) -> FusionData {
        let k = names.len();
        assert!(unit < k && dual.len() == k);
        let mut n = vec![0u32; k * k * k];
        for &(a, b, c, m) in coefficients {
            n[(a * k + b) * k + c] = m;
        }
        FusionData {
            names,
            unit: Label(unit),
            dual: dual.into_iter().map(Label).collect(),
            n,
        }
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn unit(&self) -> Label {
        self.unit
    }

    pub fn dual(&self, a: Label) -> Label {
        self.dual[a.0]
    }

    pub fn name(&self, a: Label) -> &str {
        &self.names[a.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn label_of(&self, name: &str) -> Result<Label, FusionError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(Label)
            .ok_or_else(|| FusionError::UnknownLabel(name.to_string()))
    }

    pub fn simples(&self) -> impl Iterator<Item = Label> {
        (0..self.rank()).map(Label)
    }

    pub fn n(&self, a: Label, b: Label, c: Label) -> u32 {
        let k = self.rank();
        self.n[(a.0 * k + b.0) * k + c.0]
    }

    /// Channels of a⊗b with their multiplicities.
    pub fn fuse(&self, a: Label, b: Label) -> Vec<(Label, u32)> {
        self.simples()
            .filter_map(|c| {
                let m = self.n(a, b, c);
                (m > 0).then_some((c, m))
            })
            .collect()
    }

    /// dim C(root, ℓ₁⊗…⊗ℓ_n) from the fusion coefficients alone.
    pub fn word_channel_dim(&self, letters: &[Label], root: Label) -> u64 {
        let mut state: BTreeMap<Label, u64> = BTreeMap::new();
        state.insert(self.unit, 1);
        for &l in letters {
            let mut next: BTreeMap<Label, u64> = BTreeMap::new();
            for (&e, &cnt) in &state {
                for (c, m) in self.fuse(e, l) {
                    *next.entry(c).or_insert(0) += cnt * m as u64;
                }
            }
            state = next;
        }
        state.get(&root).copied().unwrap_or(0)
    }

    /// Checks all fusion-ring identities, returning every violation found.
    pub fn validate(&self) -> FusionReport {
        let mut failures = Vec::new();
        let k = self.rank();
        let u = self.unit;
        for a in self.simples() {
            if self.dual(self.dual(a)) != a {
                failures.push(format!(
                    "duality violation: dual(dual({})) = {}",
                    self.name(a),
                    self.name(self.dual(self.dual(a)))
                ));
            }
        }
        if self.dual(u) != u {
            failures.push("duality violation: dual(1) != 1".into());
        }
        for b in self.simples() {
            for c in self.simples() {
                let expect = u32::from(b == c);
                if self.n(u, b, c) != expect {
                    failures.push(format!(
                        "unit violation: N(1,{},{}) = {}",
                        self.name(b),
                        self.name(c),
                        self.n(u, b, c)
                    ));
                }
                if self.n(b, u, c) != expect {
                    failures.push(format!(
                        "unit violation: N({},1,{}) = {}",
                        self.name(b),
                        self.name(c),
                        self.n(b, u, c)
                    ));
                }
            }
        }
        for a in self.simples() {
            for b in self.simples() {
                let expect = u32::from(b == self.dual(a));
                if self.n(a, b, u) != expect {
                    failures.push(format!(
                        "duality violation: N({},{},1) = {} but dual({}) = {}",
                        self.name(a),
                        self.name(b),
                        self.n(a, b, u),
                        self.name(a),
                        self.name(self.dual(a))
                    ));
                }
            }
        }
        // associativity: Σ_e N_ab^e N_ec^d = Σ_f N_bc^f N_af^d
        for a in self.simples() {
            for b in self.simples() {
                for c in self.simples() {
                    for d in self.simples() {
                        let lhs: u64 = self
                            .simples()
                            .map(|e| self.n(a, b, e) as u64 * self.n(e, c, d) as u64)
                            .sum();
                        let rhs: u64 = self
                            .simples()
                            .map(|f| self.n(b, c, f) as u64 * self.n(a, f, d) as u64)
                            .sum();
                        if lhs != rhs {
                            failures.push(format!(
                                "associativity violation at ({},{},{};{}): {} vs {}",
                                self.name(a),
                                self.name(b),
                                self.name(c),
                                self.name(d),
                                lhs,
                                rhs
                            ));
                        }
                    }
                }
            }
        }
        // Frobenius reciprocity
        for a in self.simples() {
            for b in self.simples() {
                for c in self.simples() {
                    let n0 = self.n(a, b, c);
                    let n1 = self.n(c, self.dual(b), a);
                    let n2 = self.n(self.dual(a), c, b);
                    if n0 != n1 || n0 != n2 {
                        failures.push(format!(
                            "Frobenius violation at ({},{},{}): {} / {} / {}",
                            self.name(a),
                            self.name(b),
                            self.name(c),
                            n0,
                            n1,
                            n2
                        ));
                    }
                }
            }
        }
        let _ = k;
        FusionReport { failures }
    }

    /// Frobenius–Perron dimensions by power iteration on the total fusion
    /// matrix, normalised so that d(1) = 1.
    pub fn fp_dimensions(&self) -> Result<Vec<f64>, FusionError> {
        let k = self.rank();
        let mut v = vec![1.0f64; k];
        let mut prev = v.clone();
        for _ in 0..100_000 {
            let mut w = vec![0.0f64; k];
            for b in 0..k {
                for a in 0..k {
                    for c in 0..k {
                        let m = self.n(Label(a), Label(b), Label(c));
                        if m > 0 {
                            w[b] += m as f64 * v[c];
                        }
                    }
                }
            }
            let norm = w[self.unit.0];
            if norm <= 0.0 || !norm.is_finite() {
                return Err(FusionError::FpDivergence);
            }
            for x in w.iter_mut() {
                *x /= norm;
            }
            let delta = w
                .iter()
                .zip(prev.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            prev = w.clone();
            v = w;
            if delta < 1e-14 {
                return Ok(v);
            }
        }
        Err(FusionError::FpDivergence)
    }

    /// Breadth-first reachability in the fusion graph with edges a → c when
    /// N_{as}^c > 0 for some s ∈ S, starting from the unit.
    pub fn reachable_from_unit(&self, s_set: &[Label], depth_cap: usize) -> Vec<Label> {
        let mut seen = vec![false; self.rank()];
        seen[self.unit.0] = true;
        let mut frontier = vec![self.unit];
        for _ in 0..depth_cap {
            let mut next = Vec::new();
            for &a in &frontier {
                for &s in s_set {
                    for (c, _) in self.fuse(a, s) {
                        if !seen[c.0] {
                            seen[c.0] = true;
                            next.push(c);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        self.simples().filter(|l| seen[l.0]).collect()
    }

    pub fn is_generating(&self, s_set: &[Label]) -> bool {
        self.reachable_from_unit(s_set, 4 * self.rank()).len() == self.rank()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FusionReport {
    pub failures: Vec<String>,
}

impl FusionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for FusionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "fusion data: pass")
        } else {
            writeln!(f, "fusion data: FAIL")?;
            for x in &self.failures {
                writeln!(f, "  - {x}")?;
            }
            Ok(())
        }
    }
}

/// An element of the fusion algebra ℂ\[C\]: a finitely supported linear
/// combination of simple labels.
#[derive(Clone, PartialEq)]
pub struct FaElement<S> {
    coeffs: BTreeMap<Label, S>,
}

impl<S: Scalar> FaElement<S> {
    pub fn zero() -> FaElement<S> {
        FaElement {
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(l: Label) -> FaElement<S> {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(l, S::one());
        FaElement { coeffs }
    }

    pub fn unit(data: &FusionData) -> FaElement<S> {
        FaElement::basis(data.unit())
    }

    pub fn from_coeffs(pairs: impl IntoIterator<Item = (Label, S)>) -> FaElement<S> {
        let mut e = FaElement::zero();
        for (l, c) in pairs {
            e.insert(l, c);
        }
        e
    }

    pub fn insert(&mut self, l: Label, c: S) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(l).or_insert_with(S::zero);
        *entry = entry.clone() + c;
        if entry.is_zero() {
            self.coeffs.remove(&l);
        }
    }

    pub fn coeff(&self, l: Label) -> S {
        self.coeffs.get(&l).cloned().unwrap_or_else(S::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (Label, &S)> {
        self.coeffs.iter().map(|(l, c)| (*l, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &FaElement<S>) -> FaElement<S> {
        let mut out = self.clone();
        for (l, c) in &other.coeffs {
            out.insert(*l, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &FaElement<S>) -> FaElement<S> {
        self.add(&other.scale(&(-S::one())))
    }

    pub fn scale(&self, s: &S) -> FaElement<S> {
        let mut out = FaElement::zero();
        for (l, c) in &self.coeffs {
            out.insert(*l, c.clone() * s.clone());
        }
        out
    }

    /// Bilinear extension of a·b = Σ_c N_{ab}^c c.
    pub fn multiply(&self, other: &FaElement<S>, data: &FusionData) -> FaElement<S> {
        let mut out = FaElement::zero();
        for (&a, ca) in &self.coeffs {
            for (&b, cb) in &other.coeffs {
                let cab = ca.clone() * cb.clone();
                for (c, m) in data.fuse(a, b) {
                    out.insert(c, cab.clone() * S::from_int(m as i64));
                }
            }
        }
        out
    }

    /// Conjugate-linear star: (Σ c_a a)* = Σ conj(c_a) ā.
    pub fn star(&self, data: &FusionData) -> FaElement<S> {
        let mut out = FaElement::zero();
        for (&a, c) in &self.coeffs {
            out.insert(data.dual(a), c.conj());
        }
        out
    }

    pub fn is_self_adjoint(&self, data: &FusionData) -> bool {
        self.star(data) == *self
    }

    pub fn max_abs_approx(&self) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.approx().norm())
            .fold(0.0, f64::max)
    }
}

impl<S: Scalar> fmt::Debug for FaElement<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (l, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})·{l:?}")?;
        }
        Ok(())
    }
}

/// Parameters of the Laplacian Δ = 1 − (1/κ) Σ_{α∈S} ν(α)·α.
#[derive(Clone, Debug)]
pub struct LaplacianSpec {
    pub generators: Vec<Label>,
    pub weights: BTreeMap<Label, Rational>,
}

impl LaplacianSpec {
    /// Constant weight 1 on the given symmetric generating set.
    pub fn uniform(generators: Vec<Label>) -> LaplacianSpec {
        let weights = generators
            .iter()
            .map(|&l| (l, Rational::one()))
            .collect();
        LaplacianSpec {
            generators,
            weights,
        }
    }

    /// All non-unit simples with weight 1 (the default for finite categories).
    pub fn default_for(data: &FusionData) -> LaplacianSpec {
        LaplacianSpec::uniform(data.simples().filter(|&l| l != data.unit()).collect())
    }

    pub fn validate(&self, data: &FusionData) -> Result<(), FusionError> {
        if self.generators.is_empty() {
            return Err(FusionError::BadLaplacian("S is empty".into()));
        }
        for &a in &self.generators {
            if !self.generators.contains(&data.dual(a)) {
                return Err(FusionError::BadLaplacian(format!(
                    "S is not symmetric: missing dual of {}",
                    data.name(a)
                )));
            }
            let w = self
                .weights
                .get(&a)
                .ok_or_else(|| FusionError::BadLaplacian(format!("missing weight for {}", data.name(a))))?;
            if !w.is_positive() {
                return Err(FusionError::BadLaplacian(format!(
                    "weight of {} is not positive",
                    data.name(a)
                )));
            }
            if self.weights.get(&data.dual(a)) != Some(w) {
                return Err(FusionError::BadLaplacian(format!(
                    "weights not symmetric at {}",
                    data.name(a)
                )));
            }
        }
        if !data.is_generating(&self.generators) {
            return Err(FusionError::BadLaplacian(
                "S is not generating (fusion-graph reachability failed)".into(),
            ));
        }
        Ok(())
    }

    /// κ = Σ ν(α) d(α), in the scalar domain of the supplied dimensions.
    pub fn kappa<S: Scalar>(&self, dims: &[S]) -> S {
        let mut k = S::zero();
        for &a in &self.generators {
            k = k + S::from_rat(&self.weights[&a]) * dims[a.0].clone();
        }
        k
    }
}

/// Δ = 1 − (1/κ) Σ ν(α)·α with κ = Σ ν(α) d(α).
pub fn build_laplacian<S: Scalar>(
    spec: &LaplacianSpec,
    data: &FusionData,
    dims: &[S],
) -> Result<FaElement<S>, FusionError> {
    spec.validate(data)?;
    let kappa = spec.kappa(dims);
    let kinv = kappa.inv();
    let mut delta = FaElement::unit(data);
    for &a in &spec.generators {
        let c = S::from_rat(&spec.weights[&a]) * kinv.clone();
        delta.insert(a, -c);
    }
    Ok(delta)
}
