//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `cargo test --test acceptance -- --nocapture` to see them).

use std::sync::Arc;
use std::time::Instant;

use num_traits::ToPrimitive;
use tubecert::builtin::builtin_category;
use tubecert::category::Category;
use tubecert::cone::{verify_certificate, Cone, ConeSupport};
use tubecert::fusion::{build_laplacian, FaElement, Label, LaplacianSpec};
use tubecert::mat::ldl_psd_check;
use tubecert::oracle::{admissible_spectrum, build_gns, crosscheck_admissibility, GnsModel};
use tubecert::scalar::{Exact, Rational, C64};
use tubecert::sdp::{certify, SdpOptions};
use tubecert::skeleton::Skeleton;
use tubecert::tube::{axiom_report, TubeAlgebra};

const BUILTINS: [&str; 4] = ["vec_z2", "vec_z3", "fib", "ising"];

fn generators_for(name: &str) -> Vec<&'static str> {
    match name {
        "vec_z2" => vec!["g"],
        "vec_z3" => vec!["g", "g^2"],
        "fib" => vec!["tau"],
        "ising" => vec!["sigma"],
        _ => unreachable!(),
    }
}

fn spec_for(cat: &Category, gens: &[&str]) -> LaplacianSpec {
    let labels: Vec<Label> = gens
        .iter()
        .map(|g| cat.fusion.label_of(g).unwrap())
        .collect();
    LaplacianSpec::uniform(labels)
}

fn cones_for(cat: &Category) -> (Cone<C64>, Cone<Exact>) {
    let rank = cat.fusion.rank();
    let cf = Cone::new(
        Arc::new(TubeAlgebra::new(Arc::new(cat.skeleton_f64().unwrap()), None)),
        ConeSupport::full(rank),
    )
    .unwrap();
    let cx = Cone::new(
        Arc::new(TubeAlgebra::new(
            Arc::new(cat.skeleton_exact().unwrap()),
            None,
        )),
        ConeSupport::full(rank),
    )
    .unwrap();
    (cf, cx)
}

fn oracle_gap(cat: &Category, spec: &LaplacianSpec) -> (GnsModel, f64) {
    let skel = cat.skeleton_f64().unwrap();
    let delta = build_laplacian(spec, &cat.fusion, &skel.dims).unwrap();
    let model = build_gns(Arc::new(TubeAlgebra::new(Arc::new(skel), None))).unwrap();
    let gap = admissible_spectrum(&model, &delta).unwrap().gap;
    (model, gap)
}

#[test]
fn criterion_1_algebra_axiom_suite() {
    let start = Instant::now();
    for name in BUILTINS {
        let cat = builtin_category(name).unwrap();
        let skel: Skeleton<C64> = cat.skeleton_f64().unwrap();
        // pentagon
        let pentagon = skel.pentagon_residual();
        assert!(pentagon < 1e-9, "{name}: pentagon residual {pentagon}");
        let unitarity = skel.f_unitarity_residual();
        assert!(unitarity < 1e-9, "{name}: unitarity residual {unitarity}");
        // conjugate equations and standardness for every simple
        for z in cat.fusion.simples() {
            let sol = skel.standard_solution(z);
            let worst = sol
                .conj_eq1_residual
                .max(sol.conj_eq2_residual)
                .max(sol.standardness_residual);
            assert!(worst < 1e-10, "{name} {z:?}: conjugate equations {worst}");
        }
        // tube associativity, star anti-multiplicativity on ≥ 100 triples,
        // and positive-definiteness of the Ω Gram matrix
        let tube = TubeAlgebra::new(Arc::new(skel), None);
        let report = axiom_report(&tube, 100, 20260810);
        assert!(
            report.assoc_residual < 1e-10,
            "{name}: associativity {}",
            report.assoc_residual
        );
        assert!(
            report.star_antimult_residual < 1e-10,
            "{name}: star anti-mult {}",
            report.star_antimult_residual
        );
        assert!(
            report.gram_min_eigenvalue > 0.0,
            "{name}: Gram min eigenvalue {}",
            report.gram_min_eigenvalue
        );
        assert!(report.passed(1e-10), "{name}: {report}");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "axiom suite took {elapsed:?}, budget is 60 s"
    );
    println!("ACCEPTANCE 1 PASS: algebra axioms on all builtins in {elapsed:?}");
}

#[test]
fn criterion_2_identification_suite() {
    for name in BUILTINS {
        let cat = builtin_category(name).unwrap();
        let data = &cat.fusion;
        // exact mode: equality on the nose
        let tube = TubeAlgebra::new(Arc::new(cat.skeleton_exact().unwrap()), None);
        for a in data.simples() {
            let ea = tube.embed(&FaElement::<Exact>::basis(a));
            let star_embed = tube.star(&ea);
            let embed_star = tube.embed(&FaElement::<Exact>::basis(a).star(data));
            assert!(
                star_embed.sub(&embed_star).is_zero(),
                "{name}: embed(a)* = embed(ā) fails at {a:?}"
            );
            for b in data.simples() {
                let eb = tube.embed(&FaElement::<Exact>::basis(b));
                let lhs = tube.multiply(&ea, &eb);
                let rhs = tube.embed(
                    &FaElement::<Exact>::basis(a).multiply(&FaElement::basis(b), data),
                );
                assert!(
                    lhs.sub(&rhs).is_zero(),
                    "{name}: embed(a)·embed(b) = embed(a·b) fails at ({a:?},{b:?})"
                );
            }
        }
        // float mode: < 1e-10
        let tube_f = TubeAlgebra::new(Arc::new(cat.skeleton_f64().unwrap()), None);
        for a in data.simples() {
            for b in data.simples() {
                let lhs = tube_f.multiply(
                    &tube_f.embed(&FaElement::<C64>::basis(a)),
                    &tube_f.embed(&FaElement::<C64>::basis(b)),
                );
                let rhs = tube_f
                    .embed(&FaElement::<C64>::basis(a).multiply(&FaElement::basis(b), data));
                assert!(lhs.distance(&rhs) < 1e-10, "{name} ({a:?},{b:?})");
            }
        }
    }
    println!("ACCEPTANCE 2 PASS: embed_fusion is a unital *-homomorphism (exact + float)");
}

#[test]
fn criterion_3_constructive_proof_suite() {
    for name in BUILTINS {
        let cat = builtin_category(name).unwrap();
        let (_, cx) = cones_for(&cat);
        let skel = cx.tube.skel.clone();
        let data = &cat.fusion;
        // order-unit certificates: R = d(z)² and Λ(G) + z̄·z = d(z)²·1 exactly
        for z in data.simples() {
            let zw = skel.word(&[z]);
            let ou = cx
                .order_unit_certificate(&zw, skel.unit(), &skel.identity(&zw))
                .unwrap();
            let d = skel.dims[z.0].clone();
            assert_eq!(
                ou.r_bound,
                d.clone() * d.clone(),
                "{name}: R = d(z)² fails at {z:?}"
            );
            let lhs = cx.assemble(&ou.gram).add(&ou.bstar_b);
            let rhs = FaElement::unit(data).scale(&(d.clone() * d));
            assert!(lhs.sub(&rhs).is_zero(), "{name}: order-unit identity {z:?}");
        }
        // Laplacian positivity certificate for the default (S, ν)
        let spec = LaplacianSpec::default_for(data);
        let gram = cx.laplacian_positivity_certificate(&spec).unwrap();
        let delta = build_laplacian(&spec, data, &skel.dims).unwrap();
        assert!(
            cx.assemble(&gram).sub(&delta).is_zero(),
            "{name}: Λ(certificate) = Δ fails"
        );
        for block in &gram {
            assert!(ldl_psd_check(block).is_psd(), "{name}: Laplacian Gram PSD");
        }
    }
    println!("ACCEPTANCE 3 PASS: order-unit and Laplacian certificates are exact");
}

#[test]
fn criterion_4_oracle_equivalence() {
    // vec_z2, S = {g}: gap = 2 exactly
    let cat = builtin_category("vec_z2").unwrap();
    let (_, gap) = oracle_gap(&cat, &spec_for(&cat, &["g"]));
    assert!((gap - 2.0).abs() < 1e-12, "vec_z2 gap = {gap}");

    // fib, S = {tau}: gap = 1 + φ⁻² to 1e-9
    let cat = builtin_category("fib").unwrap();
    let (_, gap) = oracle_gap(&cat, &spec_for(&cat, &["tau"]));
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    assert!((gap - (1.0 + phi.powi(-2))).abs() < 1e-9, "fib gap = {gap}");

    // ising, S = {sigma}: the eigensolve result, stable to 1e-9 across seeds
    let cat = builtin_category("ising").unwrap();
    let spec = spec_for(&cat, &["sigma"]);
    let (_, gap0) = oracle_gap(&cat, &spec);
    for _ in 0..4 {
        let (_, gap) = oracle_gap(&cat, &spec);
        assert!((gap - gap0).abs() < 1e-9, "ising gap drifted: {gap} vs {gap0}");
    }
    assert!((gap0 - 1.0).abs() < 1e-9, "ising gap = {gap0}");
    println!("ACCEPTANCE 4 PASS: oracle gaps 2, 1+φ⁻², 1 confirmed by eigensolve");
}

#[test]
fn criterion_5_end_to_end_certification() {
    let start = Instant::now();
    // vec_z2, ε = 1/100: verified k ≥ 199/100
    let cat = builtin_category("vec_z2").unwrap();
    let spec = spec_for(&cat, &["g"]);
    let (cf, cx) = cones_for(&cat);
    let eps = Rational::new(1.into(), 100.into());
    let outcome = certify(&cat, &cf, &cx, &spec, &eps, None, &SdpOptions::default())
        .unwrap_or_else(|e| panic!("vec_z2 certify failed: {e:?}"));
    let bound = Rational::new(199.into(), 100.into());
    assert!(
        outcome.k >= bound,
        "vec_z2 certified k = {} < 199/100",
        outcome.k
    );
    let report = verify_certificate(&outcome.certificate, &cat).unwrap();
    assert!(report.accepted, "vec_z2 certificate re-verification failed");

    // fib, ε = 1/50: verified k ≥ 27/20
    let cat = builtin_category("fib").unwrap();
    let spec = spec_for(&cat, &["tau"]);
    let (cf, cx) = cones_for(&cat);
    let eps = Rational::new(1.into(), 50.into());
    let outcome = certify(&cat, &cf, &cx, &spec, &eps, None, &SdpOptions::default())
        .unwrap_or_else(|e| panic!("fib certify failed: {e:?}"));
    let bound = Rational::new(27.into(), 20.into());
    assert!(outcome.k >= bound, "fib certified k = {} < 27/20", outcome.k);

    // re-verification from the serialised file, zero tolerance
    let json = outcome.certificate.to_json();
    let reparsed = tubecert::cone::CertificateFile::parse(&json).unwrap();
    let report = verify_certificate(&reparsed, &cat).unwrap();
    assert!(report.accepted, "fib certificate re-verification failed:\n{report}");

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 300,
        "end-to-end certification took {elapsed:?}, budget is 5 min"
    );
    println!(
        "ACCEPTANCE 5 PASS: vec_z2 k ≥ 199/100 and fib k ≥ 27/20 certified and re-verified in {elapsed:?}"
    );
}

#[test]
fn criterion_6_soundness_guard() {
    // certified k never exceeds the oracle gap + 1e-6, over 5 solver seeds
    for name in BUILTINS {
        let cat = builtin_category(name).unwrap();
        let spec = spec_for(&cat, &generators_for(name));
        let (_, gap) = oracle_gap(&cat, &spec);
        let (cf, cx) = cones_for(&cat);
        let eps = Rational::new(1.into(), 100.into());
        for seed in [1u64, 7, 42, 2026, 99991] {
            let opts = SdpOptions {
                seed,
                ..SdpOptions::default()
            };
            let outcome = certify(&cat, &cf, &cx, &spec, &eps, None, &opts)
                .unwrap_or_else(|e| panic!("{name} seed {seed}: {e:?}"));
            let k = outcome.k.to_f64().unwrap();
            assert!(
                k <= gap + 1e-6,
                "{name} seed {seed}: certified k = {k} exceeds gap {gap} + 1e-6"
            );
            assert!(k > 0.0, "{name} seed {seed}: non-positive k");
        }
    }
    println!("ACCEPTANCE 6 PASS: certified k ≤ oracle gap + 1e-6 on all builtins × 5 seeds");
}

#[test]
fn criterion_7_refutation() {
    let cat = builtin_category("fib").unwrap();
    let spec = spec_for(&cat, &["tau"]);
    let (cf, _) = cones_for(&cat);
    let delta = build_laplacian(&spec, &cat.fusion, &cf.tube.skel.dims).unwrap();
    let problem = tubecert::sdp::build_problem(
        &cf,
        &delta,
        0.01,
        tubecert::sdp::ProblemKind::FixedK,
        2.0,
    )
    .unwrap();
    let summary = tubecert::sdp::solve_problem(&problem, &SdpOptions::default()).unwrap();
    let wit =
        tubecert::sdp::extract_refutation(&problem, &summary, &cf, &delta, 2.0, 1e-9).unwrap();
    let unit_val = wit.values.iter().find(|(n, _)| n == "1").unwrap().1;
    assert!((unit_val - 1.0).abs() < 1e-12, "φ(1) = {unit_val}");
    assert!(
        wit.cone_margin >= -1e-8,
        "cone-negativity margin {}",
        wit.cone_margin
    );
    assert!(
        wit.target_value < -0.1,
        "φ(Δ² − 2Δ) = {} not < −0.1",
        wit.target_value
    );
    println!(
        "ACCEPTANCE 7 PASS: fib k=2 refuted with φ(Δ²−2Δ) = {:.6}, margin {:.2e}",
        wit.target_value, wit.cone_margin
    );
}

#[test]
fn criterion_8_admissibility_equivalence() {
    for name in BUILTINS {
        let cat = builtin_category(name).unwrap();
        let skel = cat.skeleton_f64().unwrap();
        let tube = Arc::new(TubeAlgebra::new(Arc::new(skel), None));
        let model = build_gns(tube.clone()).unwrap();
        let cone = Cone::new(tube, ConeSupport::full(cat.fusion.rank())).unwrap();
        let report = crosscheck_admissibility(&model, &cone, 100, 4242).unwrap();
        assert!(
            report.worst_violation > -1e-8,
            "{name}: worst vector-state value {}",
            report.worst_violation
        );
    }
    println!("ACCEPTANCE 8 PASS: admissibility ⇔ cone-positivity on 100 PSD samples per builtin");
}
