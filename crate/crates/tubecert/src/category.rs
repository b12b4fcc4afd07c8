//! Category data: the runtime bundle of fusion rules and F-symbols in both
//! scalar domains, and the textual category file format.
//!
//! The file is JSON with fields `name`, `simples`, `unit`, `dual`, `fusion`
//! (rows `[a, b, c, N]`) and `fsymbols` (rows
//! `[a, b, c, d, e, alpha, beta, f, mu, nu, re, im]`).  The optional `field`
//! tag selects the exact scalar domain: `"rational"`, `"sqrt2"`, `"sqrt5"`
//! (or `"sqrtD"` generally), or `"float"`.  For exact fields the `re`/`im`
//! slots hold exact strings such as `"1/2+1/2*sqrt(5)"` or
//! `"(-1/2+1/2*sqrt(5))*rt(1/2+1/2*sqrt(5))"`; plain integers are accepted
//! in any field.

use crate::fusion::{FusionData, Label};
use crate::scalar::{Exact, Quad, Scalar, C64};
use crate::skeleton::{dims_from_f, FKey, FTable, Skeleton};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CategoryError {
    #[error("category file malformed: {0}")]
    Malformed(String),
    #[error("category '{0}' requires an exact scalar field but is tagged float")]
    NoExactField(String),
    #[error(transparent)]
    Fusion(#[from] crate::fusion::FusionError),
    #[error(transparent)]
    Skeleton(#[from] crate::skeleton::SkelError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which exact scalar field the category's structure constants live in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Rational,
    Sqrt(u64),
    Float,
}

impl FieldTag {
    pub fn as_str(&self) -> String {
        match self {
            FieldTag::Rational => "rational".into(),
            FieldTag::Sqrt(d) => format!("sqrt{d}"),
            FieldTag::Float => "float".into(),
        }
    }

    pub fn parse(s: &str) -> Result<FieldTag, CategoryError> {
        match s {
            "rational" => Ok(FieldTag::Rational),
            "float" => Ok(FieldTag::Float),
            _ => {
                if let Some(d) = s.strip_prefix("sqrt") {
                    let d: u64 = d
                        .parse()
                        .map_err(|_| CategoryError::Malformed(format!("bad field tag '{s}'")))?;
                    Ok(FieldTag::Sqrt(d))
                } else {
                    Err(CategoryError::Malformed(format!("bad field tag '{s}'")))
                }
            }
        }
    }

    pub fn ambient(&self) -> u64 {
        match self {
            FieldTag::Sqrt(d) => *d,
            _ => 0,
        }
    }
}

/// A loaded category: fusion data plus F-symbols in the exact field (when
/// available) and in floating point.
#[derive(Clone)]
pub struct Category {
    pub name: String,
    pub fusion: FusionData,
    pub field: FieldTag,
    ftable_exact: Option<FTable<Exact>>,
    ftable_f64: FTable<C64>,
}

impl Category {
    pub fn from_exact_table(
        name: &str,
        fusion: FusionData,
        field: FieldTag,
        entries: BTreeMap<FKey, Exact>,
    ) -> Category {
        let exact = FTable::new(entries);
        let f64_table = exact.map_scalar(|v| v.approx());
        Category {
            name: name.to_string(),
            fusion,
            field,
            ftable_exact: Some(exact),
            ftable_f64: f64_table,
        }
    }

    pub fn ftable_f64(&self) -> &FTable<C64> {
        &self.ftable_f64
    }

    pub fn ftable_exact(&self) -> Option<&FTable<Exact>> {
        self.ftable_exact.as_ref()
    }

    pub fn has_exact(&self) -> bool {
        self.ftable_exact.is_some()
    }

    pub fn skeleton_f64(&self) -> Result<Skeleton<C64>, CategoryError> {
        Ok(Skeleton::new(
            Arc::new(self.fusion.clone()),
            self.ftable_f64.clone(),
        )?)
    }

    pub fn skeleton_exact(&self) -> Result<Skeleton<Exact>, CategoryError> {
        let t = self
            .ftable_exact
            .as_ref()
            .ok_or_else(|| CategoryError::NoExactField(self.name.clone()))?;
        Ok(Skeleton::new(Arc::new(self.fusion.clone()), t.clone())?)
    }

    pub fn exact_dims(&self) -> Result<Vec<Exact>, CategoryError> {
        let t = self
            .ftable_exact
            .as_ref()
            .ok_or_else(|| CategoryError::NoExactField(self.name.clone()))?;
        Ok(dims_from_f(&self.fusion, t)?)
    }

    /// Canonical category file for this category.
    pub fn to_file(&self) -> CategoryFile {
        let names = self.fusion.names();
        let lab = |l: Label| names[l.0].clone();
        let mut fusion_rows = Vec::new();
        for a in self.fusion.simples() {
            for b in self.fusion.simples() {
                for c in self.fusion.simples() {
                    let n = self.fusion.n(a, b, c);
                    if n > 0 {
                        fusion_rows.push((lab(a), lab(b), lab(c), n));
                    }
                }
            }
        }
        let mut fsymbols = Vec::new();
        match &self.ftable_exact {
            Some(t) => {
                for (k, v) in t.entries() {
                    let (re, im) = split_exact_complex(v);
                    fsymbols.push(FRow {
                        a: lab(k.a),
                        b: lab(k.b),
                        c: lab(k.c),
                        d: lab(k.d),
                        e: lab(k.e),
                        alpha: k.alpha,
                        beta: k.beta,
                        f: lab(k.f),
                        mu: k.mu,
                        nu: k.nu,
                        re: ScalarSlot::Exact(real_exact_to_string(&re)),
                        im: ScalarSlot::Exact(real_exact_to_string(&im)),
                    });
                }
            }
            None => {
                for (k, v) in self.ftable_f64.entries() {
                    fsymbols.push(FRow {
                        a: lab(k.a),
                        b: lab(k.b),
                        c: lab(k.c),
                        d: lab(k.d),
                        e: lab(k.e),
                        alpha: k.alpha,
                        beta: k.beta,
                        f: lab(k.f),
                        mu: k.mu,
                        nu: k.nu,
                        re: ScalarSlot::Float(v.re),
                        im: ScalarSlot::Float(v.im),
                    });
                }
            }
        }
        CategoryFile {
            name: self.name.clone(),
            field: Some(self.field.as_str()),
            simples: names.to_vec(),
            unit: lab(self.fusion.unit()),
            dual: self
                .fusion
                .simples()
                .map(|a| (lab(a), lab(self.fusion.dual(a))))
                .collect(),
            fusion: fusion_rows,
            fsymbols,
        }
    }

    /// Content hash of the canonical category file (hex SHA-256).
    pub fn content_hash(&self) -> String {
        let file = self.to_file();
        let json = serde_json::to_string(&file).expect("category file serialises");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        hex_string(&h.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Splits an exact complex scalar into real and imaginary parts.
fn split_exact_complex(v: &Exact) -> (Exact, Exact) {
    let conj = v.conj_ref();
    let half = Exact::from_rational(crate::scalar::Rational::new(1.into(), 2.into()));
    let re = v.add_ref(&conj).mul_ref(&half);
    let im = v
        .sub_ref(&conj)
        .mul_ref(&half)
        .mul_ref(&Exact::i().neg_ref());
    (re, im)
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

/// A scalar slot in the file: a float, or an exact real string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScalarSlot {
    Float(f64),
    Exact(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FRow {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub e: String,
    pub alpha: u8,
    pub beta: u8,
    pub f: String,
    pub mu: u8,
    pub nu: u8,
    pub re: ScalarSlot,
    pub im: ScalarSlot,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoryFile {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub simples: Vec<String>,
    pub unit: String,
    pub dual: BTreeMap<String, String>,
    pub fusion: Vec<(String, String, String, u32)>,
    pub fsymbols: Vec<FRow>,
}

impl CategoryFile {
    pub fn parse(json: &str) -> Result<CategoryFile, CategoryError> {
        Ok(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("category file serialises")
    }

    pub fn into_category(self) -> Result<Category, CategoryError> {
        let field = match &self.field {
            Some(tag) => FieldTag::parse(tag)?,
            None => FieldTag::Float,
        };
        let k = self.simples.len();
        let index = |name: &str| -> Result<usize, CategoryError> {
            self.simples
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| CategoryError::Malformed(format!("unknown simple '{name}'")))
        };
        let unit = index(&self.unit)?;
        let mut dual = vec![usize::MAX; k];
        for (a, ab) in &self.dual {
            dual[index(a)?] = index(ab)?;
        }
        if dual.contains(&usize::MAX) {
            return Err(CategoryError::Malformed("dual map incomplete".into()));
        }
        let mut coeffs = Vec::new();
        for (a, b, c, n) in &self.fusion {
            if *n == 0 {
                return Err(CategoryError::Malformed(
                    "fusion rows must have N > 0".into(),
                ));
            }
            coeffs.push((index(a)?, index(b)?, index(c)?, *n));
        }
        let fusion = FusionData::new(self.simples.clone(), unit, dual, &coeffs);
        let report = fusion.validate();
        if !report.passed() {
            return Err(CategoryError::Malformed(format!(
                "fusion identities violated: {}",
                report.failures.join("; ")
            )));
        }

        let ambient = field.ambient();
        let mut exact_entries: BTreeMap<FKey, Exact> = BTreeMap::new();
        let mut float_entries: BTreeMap<FKey, C64> = BTreeMap::new();
        let want_exact = field != FieldTag::Float;
        for row in &self.fsymbols {
            let key = FKey {
                a: Label(index(&row.a)?),
                b: Label(index(&row.b)?),
                c: Label(index(&row.c)?),
                d: Label(index(&row.d)?),
                e: Label(index(&row.e)?),
                alpha: row.alpha,
                beta: row.beta,
                f: Label(index(&row.f)?),
                mu: row.mu,
                nu: row.nu,
            };
            let u = fusion.unit();
            if key.a == u || key.b == u || key.c == u {
                return Err(CategoryError::Malformed(format!(
                    "F-symbol entry for ({},{},{}) violates the trivial gauge for unit labels",
                    row.a, row.b, row.c
                )));
            }
            if want_exact {
                let re = slot_to_exact(&row.re, ambient)?;
                let im = slot_to_exact(&row.im, ambient)?;
                let v = re.add_ref(&im.mul_ref(&Exact::i()));
                if !v.is_zero_val() {
                    exact_entries.insert(key, v);
                }
            } else {
                let (re, im) = (slot_to_f64(&row.re), slot_to_f64(&row.im));
                let v = C64::new(re, im);
                if v.norm() > 0.0 {
                    float_entries.insert(key, v);
                }
            }
        }
        if want_exact {
            Ok(Category::from_exact_table(
                &self.name,
                fusion,
                field,
                exact_entries,
            ))
        } else {
            Ok(Category {
                name: self.name,
                fusion,
                field,
                ftable_exact: None,
                ftable_f64: FTable::new(float_entries),
            })
        }
    }
}

fn slot_to_f64(slot: &ScalarSlot) -> f64 {
    match slot {
        ScalarSlot::Float(x) => *x,
        ScalarSlot::Exact(s) => parse_real_exact(s, 0)
            .map(|e| e.to_c64().re)
            .unwrap_or(f64::NAN),
    }
}

fn slot_to_exact(slot: &ScalarSlot, ambient: u64) -> Result<Exact, CategoryError> {
    match slot {
        ScalarSlot::Float(x) => {
            if x.fract() == 0.0 && x.abs() < 2.0_f64.powi(52) {
                Ok(Exact::int(*x as i64))
            } else {
                Err(CategoryError::Malformed(format!(
                    "non-integer float {x} in an exact-field category; use an exact string"
                )))
            }
        }
        ScalarSlot::Exact(s) => parse_real_exact(s, ambient)
            .map_err(|e| CategoryError::Malformed(format!("bad exact scalar '{s}': {e}"))),
    }
}

// ---------------------------------------------------------------------------
// Exact real string grammar
// ---------------------------------------------------------------------------

/// Formats a real exact value as `term + term + …` with
/// `term = (quad)` or `(quad)*rt(quad)*…`.
pub fn real_exact_to_string(x: &Exact) -> String {
    assert!(x.is_real_val(), "file slots hold real values");
    if x.is_zero_val() {
        return "0".to_string();
    }
    let mut parts = Vec::new();
    for (rads, c) in x.terms() {
        let mut s = format!("({})", c.re);
        for r in rads {
            s.push_str(&format!("*rt({r})"));
        }
        parts.push(s);
    }
    parts.join(" + ")
}

/// Parses the grammar emitted by [`real_exact_to_string`]; also accepts a
/// bare quad string like `1/2+1/2*sqrt(5)` or an integer.
pub fn parse_real_exact(s: &str, ambient: u64) -> Result<Exact, crate::scalar::ScalarError> {
    use crate::scalar::ScalarError;
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if compact.is_empty() {
        return Err(ScalarError::Parse("empty scalar".into()));
    }
    // split top-level '+' / '-' (depth 0)
    let bytes = compact.as_bytes();
    let mut terms: Vec<(bool, String)> = Vec::new(); // (negative, body)
    let mut depth = 0usize;
    let mut cur = String::new();
    let mut neg = false;
    for (i, &ch) in bytes.iter().enumerate() {
        match ch {
            b'(' => {
                depth += 1;
                cur.push('(');
            }
            b')' => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| ScalarError::Parse("unbalanced parens".into()))?;
                cur.push(')');
            }
            b'+' | b'-' if depth == 0 && i > 0 => {
                terms.push((neg, cur.clone()));
                cur.clear();
                neg = ch == b'-';
            }
            b'-' if depth == 0 && i == 0 => {
                neg = true;
            }
            _ => cur.push(ch as char),
        }
    }
    terms.push((neg, cur));
    let mut acc = Exact::int(0);
    for (negated, body) in terms {
        let mut factor = Exact::int(1);
        for piece in split_top_level(&body, b'*')? {
            let val = if let Some(inner) = piece
                .strip_prefix("rt(")
                .and_then(|x| x.strip_suffix(')'))
            {
                let q = Quad::parse(inner)?;
                Exact::radical(q)
            } else if let Some(inner) =
                piece.strip_prefix('(').and_then(|x| x.strip_suffix(')'))
            {
                Exact::from_quad(Quad::parse(inner)?)
            } else {
                Exact::from_quad(Quad::parse(&piece)?)
            };
            factor = factor.mul_ref(&val);
        }
        if negated {
            factor = factor.neg_ref();
        }
        acc = acc.add_ref(&factor);
    }
    Ok(promote(acc, ambient))
}

fn promote(x: Exact, ambient: u64) -> Exact {
    if ambient == 0 || x.field() == ambient {
        x
    } else {
        // join with 0·√ambient to pin the ambient field
        x.add_ref(&Exact::from_quad(Quad::sqrt_d(ambient)).mul_ref(&Exact::int(0)))
    }
}

fn split_top_level(s: &str, sep: u8) -> Result<Vec<String>, crate::scalar::ScalarError> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut cur = String::new();
    for &ch in s.as_bytes() {
        match ch {
            b'(' => {
                depth += 1;
                cur.push('(');
            }
            b')' => {
                depth = depth.checked_sub(1).ok_or_else(|| {
                    crate::scalar::ScalarError::Parse("unbalanced parens".into())
                })?;
                cur.push(')');
            }
            c if c == sep && depth == 0 => {
                out.push(cur.clone());
                cur.clear();
            }
            c => cur.push(c as char),
        }
    }
    out.push(cur);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;
    use crate::scalar::Rational;

    #[test]
    fn category_file_roundtrip_builtins() {
        for name in ["vec_z2", "vec_z3", "fib", "ising"] {
            let cat = builtin::builtin_category(name).unwrap();
            let file = cat.to_file();
            let json = file.to_json();
            let reparsed = CategoryFile::parse(&json).unwrap().into_category().unwrap();
            assert_eq!(reparsed.fusion.rank(), cat.fusion.rank());
            assert_eq!(reparsed.content_hash(), cat.content_hash(), "{name}");
            // skeletons agree numerically
            let s1 = cat.skeleton_f64().unwrap();
            let s2 = reparsed.skeleton_f64().unwrap();
            for z in cat.fusion.simples() {
                assert!((s1.dims[z.0] - s2.dims[z.0]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_string_grammar_roundtrip() {
        let phi = Quad::new(
            Rational::new(1.into(), 2.into()),
            Rational::new(1.into(), 2.into()),
            5,
        );
        // 1/√φ = (1/φ)·√φ
        let x = Exact::radical(phi.clone()).mul_ref(&Exact::from_quad(phi.inv()));
        let s = real_exact_to_string(&x);
        let y = parse_real_exact(&s, 5).unwrap();
        assert_eq!(x, y);
        // plain quad form
        let q = parse_real_exact("1/2+1/2*sqrt(5)", 5).unwrap();
        assert_eq!(q, Exact::from_quad(phi));
    }

    #[test]
    fn rejects_unit_gauge_violation() {
        let cat = builtin::builtin_category("vec_z2").unwrap();
        let mut file = cat.to_file();
        file.fsymbols.push(FRow {
            a: "1".into(),
            b: "g".into(),
            c: "g".into(),
            d: "1".into(),
            e: "g".into(),
            alpha: 0,
            beta: 0,
            f: "1".into(),
            mu: 0,
            nu: 0,
            re: ScalarSlot::Float(1.0),
            im: ScalarSlot::Float(0.0),
        });
        let json = file.to_json();
        assert!(CategoryFile::parse(&json).unwrap().into_category().is_err());
    }
}
