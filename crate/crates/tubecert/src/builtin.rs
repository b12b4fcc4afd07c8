//! Built-in categories with exact F-symbol tables: pointed cyclic-group
//! categories with trivial cocycle, Fibonacci, and Ising.

use crate::category::{Category, CategoryError, FieldTag};
use crate::fusion::{FusionData, Label};
use crate::scalar::{Exact, Quad, Rational};
use crate::skeleton::FKey;
use std::collections::BTreeMap;

/// Looks up a built-in category by name: `vec_zN` (N ≥ 2), `fib`, `ising`.
pub fn builtin_category(name: &str) -> Result<Category, CategoryError> {
    if let Some(n) = name.strip_prefix("vec_z") {
        let n: usize = n
            .parse()
            .map_err(|_| CategoryError::Malformed(format!("unknown builtin '{name}'")))?;
        if !(2..=24).contains(&n) {
            return Err(CategoryError::Malformed(format!(
                "vec_zN supports 2 <= N <= 24, got {n}"
            )));
        }
        return Ok(vec_zn(n));
    }
    match name {
        "fib" => Ok(fibonacci()),
        "ising" => Ok(ising()),
        _ => Err(CategoryError::Malformed(format!(
            "unknown builtin '{name}' (available: vec_zN, fib, ising)"
        ))),
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["vec_z2", "vec_z3", "fib", "ising"]
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

/// Vec(ℤ/n) with the trivial cocycle: all admissible F-symbols are 1.
pub fn vec_zn(n: usize) -> Category {
    let names: Vec<String> = (0..n)
        .map(|i| match i {
            0 => "1".to_string(),
            1 => "g".to_string(),
            _ => format!("g^{i}"),
        })
        .collect();
    let dual: Vec<usize> = (0..n).map(|i| (n - i) % n).collect();
    let mut coeffs = Vec::new();
    for a in 0..n {
        for b in 0..n {
            coeffs.push((a, b, (a + b) % n, 1));
        }
    }
    let fusion = FusionData::new(names, 0, dual, &coeffs);
    let mut entries = BTreeMap::new();
    for a in 1..n {
        for b in 1..n {
            for c in 1..n {
                let e = (a + b) % n;
                let f = (b + c) % n;
                let d = (a + b + c) % n;
                entries.insert(
                    FKey {
                        a: Label(a),
                        b: Label(b),
                        c: Label(c),
                        d: Label(d),
                        e: Label(e),
                        alpha: 0,
                        beta: 0,
                        f: Label(f),
                        mu: 0,
                        nu: 0,
                    },
                    Exact::int(1),
                );
            }
        }
    }
    Category::from_exact_table(&format!("vec_z{n}"), fusion, FieldTag::Rational, entries)
}

/// The Fibonacci category: simples {1, τ}, τ⊗τ = 1 ⊕ τ.
pub fn fibonacci() -> Category {
    let fusion = FusionData::new(
        vec!["1".into(), "tau".into()],
        0,
        vec![0, 1],
        &[
            (0, 0, 0, 1),
            (0, 1, 1, 1),
            (1, 0, 1, 1),
            (1, 1, 0, 1),
            (1, 1, 1, 1),
        ],
    );
    let one = Label(0);
    let tau = Label(1);
    let phi = Quad::new(half(), half(), 5);
    let phi_inv = phi.inv(); // = φ − 1
    // 1/√φ = √φ / φ
    let inv_sqrt_phi = Exact::radical(phi.clone()).mul_ref(&Exact::from_quad(phi_inv.clone()));
    let mut entries = BTreeMap::new();
    let key = |e: Label, f: Label, d: Label| FKey {
        a: tau,
        b: tau,
        c: tau,
        d,
        e,
        alpha: 0,
        beta: 0,
        f,
        mu: 0,
        nu: 0,
    };
    // [F^{τττ}_τ] = [[1/φ, 1/√φ], [1/√φ, −1/φ]] in the channel order (1, τ)
    entries.insert(key(one, one, tau), Exact::from_quad(phi_inv.clone()));
    entries.insert(key(one, tau, tau), inv_sqrt_phi.clone());
    entries.insert(key(tau, one, tau), inv_sqrt_phi);
    entries.insert(key(tau, tau, tau), Exact::from_quad(phi_inv.neg()));
    // [F^{τττ}_1] = [1] (only channel e = f = τ)
    entries.insert(key(tau, tau, one), Exact::int(1));
    Category::from_exact_table("fib", fusion, FieldTag::Sqrt(5), entries)
}

/// The Ising category: simples {1, ε, σ}, ε⊗ε = 1, ε⊗σ = σ, σ⊗σ = 1 ⊕ ε.
pub fn ising() -> Category {
    let fusion = FusionData::new(
        vec!["1".into(), "eps".into(), "sigma".into()],
        0,
        vec![0, 1, 2],
        &[
            (0, 0, 0, 1),
            (0, 1, 1, 1),
            (0, 2, 2, 1),
            (1, 0, 1, 1),
            (2, 0, 2, 1),
            (1, 1, 0, 1),
            (1, 2, 2, 1),
            (2, 1, 2, 1),
            (2, 2, 0, 1),
            (2, 2, 1, 1),
        ],
    );
    let one = Label(0);
    let eps = Label(1);
    let sig = Label(2);
    let inv_sqrt2 = Quad::new(Rational::from_integer(0.into()), half(), 2); // √2/2
    let mut entries = BTreeMap::new();
    let mut put = |a, b, c, d, e, f, v: Exact| {
        entries.insert(
            FKey {
                a,
                b,
                c,
                d,
                e,
                alpha: 0,
                beta: 0,
                f,
                mu: 0,
                nu: 0,
            },
            v,
        );
    };
    // χ is the nondegenerate bicharacter on ℤ/2: χ(ε,ε) = −1.
    // (ε,ε,ε), (ε,ε,σ), (σ,ε,ε), (σ,σ,ε), (ε,σ,σ) associators are trivial.
    put(eps, eps, eps, eps, one, one, Exact::int(1));
    put(eps, eps, sig, sig, one, sig, Exact::int(1));
    put(sig, eps, eps, sig, sig, one, Exact::int(1));
    put(sig, sig, eps, one, eps, sig, Exact::int(1));
    put(sig, sig, eps, eps, one, sig, Exact::int(1));
    put(eps, sig, sig, one, sig, eps, Exact::int(1));
    put(eps, sig, sig, eps, sig, one, Exact::int(1));
    // (ε,σ,ε): F = χ(ε,ε) = −1
    put(eps, sig, eps, sig, sig, sig, Exact::int(-1));
    // (σ,ε,σ): F^{σεσ}_d = χ(ε,d)
    put(sig, eps, sig, one, sig, sig, Exact::int(1));
    put(sig, eps, sig, eps, sig, sig, Exact::int(-1));
    // (σ,σ,σ): [F^{σσσ}_σ]_{e,f} = χ(e,f)/√2 over channels (1, ε)
    put(sig, sig, sig, sig, one, one, Exact::from_quad(inv_sqrt2.clone()));
    put(sig, sig, sig, sig, one, eps, Exact::from_quad(inv_sqrt2.clone()));
    put(sig, sig, sig, sig, eps, one, Exact::from_quad(inv_sqrt2.clone()));
    put(
        sig,
        sig,
        sig,
        sig,
        eps,
        eps,
        Exact::from_quad(inv_sqrt2.neg()),
    );
    Category::from_exact_table("ising", fusion, FieldTag::Sqrt(2), entries)
}
