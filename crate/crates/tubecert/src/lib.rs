//! tubecert: sum-of-squares spectral-gap certificates for the tube algebra
//! of a unitary fusion category.
//!
//! The library builds the tube algebra of a fusion category from fusion
//! rules and F-symbols, searches for Gram-matrix certificates of
//! `Δ² − kΔ + ε·1` in the tube cone with a dense interior-point SDP solver,
//! rounds them to exact arithmetic, and verifies them with zero tolerance.
//! A brute-force GNS oracle provides the exact spectral gap for finite
//! categories to cross-validate every certified bound.
//!
//! The numeric core is generic over the scalar type through
//! [`scalar::Scalar`]; concrete instantiations are [`FloatScalar`]
//! (`Complex64`) for search and validation, and [`ExactScalar`] (radical
//! extensions of a real quadratic field) for certificates.
//!
//! ```
//! use std::sync::Arc;
//! use tubecert::{builtin, cone, fusion, oracle, sdp, tube};
//!
//! let cat = builtin::builtin_category("fib").unwrap();
//! let tau = cat.fusion.label_of("tau").unwrap();
//! let spec = fusion::LaplacianSpec::uniform(vec![tau]);
//!
//! // exact spectral gap from the GNS oracle
//! let skel = cat.skeleton_f64().unwrap();
//! let delta = fusion::build_laplacian(&spec, &cat.fusion, &skel.dims).unwrap();
//! let model = oracle::build_gns(Arc::new(tube::TubeAlgebra::new(Arc::new(skel), None))).unwrap();
//! let gap = oracle::admissible_spectrum(&model, &delta).unwrap().gap;
//! let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
//! assert!((gap - (1.0 + phi.powi(-2))).abs() < 1e-9);
//!
//! // a certificate of Δ² − kΔ + ε·1 ∈ Σ²C, verified with zero tolerance
//! let support = cone::ConeSupport::full(cat.fusion.rank());
//! let cone_f = cone::Cone::new(
//!     Arc::new(tube::TubeAlgebra::new(Arc::new(cat.skeleton_f64().unwrap()), None)),
//!     support.clone(),
//! )
//! .unwrap();
//! let cone_x = cone::Cone::new(
//!     Arc::new(tube::TubeAlgebra::new(Arc::new(cat.skeleton_exact().unwrap()), None)),
//!     support,
//! )
//! .unwrap();
//! let eps = "1/50".parse().unwrap();
//! let out = sdp::certify(&cat, &cone_f, &cone_x, &spec, &eps, None, &Default::default())
//!     .unwrap();
//! assert!(out.k.to_string().len() > 0);
//! let report = cone::verify_certificate(&out.certificate, &cat).unwrap();
//! assert!(report.accepted);
//! ```

// index-based loops mirror the tensor formulas they implement
#![allow(clippy::needless_range_loop)]

pub mod builtin;
pub mod category;
pub mod cli;
pub mod cone;
pub mod fusion;
pub mod mat;
pub mod oracle;
pub mod scalar;
pub mod sdp;
pub mod skeleton;
pub mod tube;

/// Floating-point scalar used for numerical search and validation.
pub type FloatScalar = scalar::C64;

/// Exact scalar used for certificates and verification.
pub type ExactScalar = scalar::Exact;
