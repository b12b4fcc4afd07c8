//! Command-line entry point: validation, certification, refutation, the
//! spectral oracle, and certificate verification as reproducible runs.
//!
//! Exit codes: 0 success; 1 verification or feasibility failure; 2 input
//! error; 3 numerical failure.

use crate::builtin::builtin_category;
use crate::category::{Category, CategoryFile};
use crate::cone::{verify_certificate, CertificateFile, Cone, ConeSupport};
use crate::fusion::{Label, LaplacianSpec};
use crate::oracle::{admissible_spectrum, build_gns, crosscheck_admissibility};
use crate::scalar::{Rational, C64, Exact};
use crate::sdp::{certify, CertifyFailure, SdpOptions};
use crate::tube::{axiom_report, TubeAlgebra};
use clap::{Args, Parser, Subcommand};
use num_traits::Signed;
use std::path::PathBuf;
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "tubecert",
    version,
    about = "Sum-of-squares spectral-gap certificates for tube algebras of unitary fusion categories"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct CatArgs {
    /// Built-in category: vec_zN, fib, ising
    #[arg(long)]
    builtin: Option<String>,
    /// Category data file (JSON)
    #[arg(long)]
    file: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct LapArgs {
    /// Generating set, comma separated (default: all non-unit simples)
    #[arg(long = "S", value_name = "LABELS")]
    s: Option<String>,
    /// Weights as name=rational pairs, comma separated (default: all 1)
    #[arg(long)]
    nu: Option<String>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    /// Solver tolerance
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Solver seed (jitters the initial point; runs are deterministic per seed)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Support radius in the fusion graph (default: all simples)
    #[arg(long)]
    radius: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check fusion identities, F-symbol unitarity and pentagon, conjugate
    /// equations, and the tube-algebra axioms
    Validate {
        #[command(flatten)]
        cat: CatArgs,
    },
    /// Print dimensions, fusion matrices and tube-algebra sizes
    Info {
        #[command(flatten)]
        cat: CatArgs,
        /// Write the report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Produce a verified certificate of Δ² − kΔ + ε·1 ∈ Σ²C
    Certify {
        #[command(flatten)]
        cat: CatArgs,
        #[command(flatten)]
        lap: LapArgs,
        /// Target ε as an exact rational (e.g. 1/100)
        #[arg(long)]
        eps: String,
        /// Fixed k as an exact rational; omitted = optimise k
        #[arg(long)]
        k: Option<String>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Certificate output path (default <name>-certificate.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for an annular-state witness against Δ² − kΔ + ε·1 ∈ Σ²C
    Refute {
        #[command(flatten)]
        cat: CatArgs,
        #[command(flatten)]
        lap: LapArgs,
        /// The k to refute, as an exact rational
        #[arg(long)]
        k: String,
        /// ε for the feasibility problem (default 1/100)
        #[arg(long, default_value = "1/100")]
        eps: String,
        #[command(flatten)]
        solver: SolverArgs,
        /// Witness output path (default <name>-refutation.json)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact spectral gap of Δ over all weight-1 admissible representations
    #[command(name = "oracle-gap")]
    OracleGap {
        #[command(flatten)]
        cat: CatArgs,
        #[command(flatten)]
        lap: LapArgs,
        /// Write the spectrum as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-verify a certificate file in exact arithmetic
    Verify {
        /// Certificate file
        cert: PathBuf,
        #[command(flatten)]
        cat: CatArgs,
    },
}

struct CliError {
    code: i32,
    msg: String,
}

impl CliError {
    fn input(msg: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_INPUT,
            msg: msg.into(),
        }
    }

    fn numerical(msg: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_NUMERICAL,
            msg: msg.into(),
        }
    }

    fn fail(msg: impl Into<String>) -> CliError {
        CliError {
            code: EXIT_FAIL,
            msg: msg.into(),
        }
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.cmd {
        Cmd::Validate { cat } => cmd_validate(&load_category(&cat)?),
        Cmd::Info { cat, out } => cmd_info(&load_category(&cat)?, out.as_deref()),
        Cmd::Certify {
            cat,
            lap,
            eps,
            k,
            solver,
            out,
        } => {
            let category = load_category(&cat)?;
            cmd_certify(&category, &lap, &eps, k.as_deref(), &solver, out.as_deref())
        }
        Cmd::Refute {
            cat,
            lap,
            k,
            eps,
            solver,
            out,
        } => {
            let category = load_category(&cat)?;
            cmd_refute(&category, &lap, &k, &eps, &solver, out.as_deref())
        }
        Cmd::OracleGap { cat, lap, out } => {
            let category = load_category(&cat)?;
            cmd_oracle_gap(&category, &lap, out.as_deref())
        }
        Cmd::Verify { cert, cat } => {
            let category = load_category(&cat)?;
            cmd_verify(&category, &cert)
        }
    }
}

fn load_category(args: &CatArgs) -> Result<Category, CliError> {
    match (&args.builtin, &args.file) {
        (Some(name), None) => {
            builtin_category(name).map_err(|e| CliError::input(e.to_string()))
        }
        (None, Some(path)) => {
            let json = std::fs::read_to_string(path)
                .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
            CategoryFile::parse(&json)
                .and_then(CategoryFile::into_category)
                .map_err(|e| CliError::input(e.to_string()))
        }
        _ => Err(CliError::input(
            "select a category with exactly one of --builtin or --file",
        )),
    }
}

fn parse_exact_rational(s: &str, what: &str) -> Result<Rational, CliError> {
    let r: Rational = s.parse().map_err(|_| {
        CliError::input(format!(
            "{what} must be an exact rational like 3/2 or 1/100 (floats are refused); got '{s}'"
        ))
    })?;
    Ok(r)
}

fn laplacian_spec(category: &Category, lap: &LapArgs) -> Result<LaplacianSpec, CliError> {
    let data = &category.fusion;
    let generators: Vec<Label> = match &lap.s {
        None => data.simples().filter(|&l| l != data.unit()).collect(),
        Some(s) => {
            let mut out = Vec::new();
            for name in s.split(',').filter(|x| !x.is_empty()) {
                out.push(
                    data.label_of(name.trim())
                        .map_err(|e| CliError::input(e.to_string()))?,
                );
            }
            out
        }
    };
    let mut spec = LaplacianSpec::uniform(generators);
    if let Some(nu) = &lap.nu {
        for pair in nu.split(',').filter(|x| !x.is_empty()) {
            let (name, val) = pair
                .split_once('=')
                .ok_or_else(|| CliError::input(format!("bad --nu entry '{pair}'")))?;
            let l = data
                .label_of(name.trim())
                .map_err(|e| CliError::input(e.to_string()))?;
            let w = parse_exact_rational(val.trim(), "--nu weight")?;
            if !w.is_positive() {
                return Err(CliError::input("--nu weights must be positive"));
            }
            spec.weights.insert(l, w);
        }
    }
    spec.validate(data)
        .map_err(|e| CliError::input(e.to_string()))?;
    Ok(spec)
}

fn support_for(category: &Category, spec: &LaplacianSpec, radius: Option<usize>) -> ConeSupport {
    match radius {
        None => ConeSupport::full(category.fusion.rank()),
        Some(r) => {
            let ball = category.fusion.reachable_from_unit(&spec.generators, r);
            ConeSupport {
                xs: ball.clone(),
                ws: ball,
            }
        }
    }
}

fn write_out(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_validate(category: &Category) -> Result<i32, CliError> {
    let mut ok = true;
    let report = category.fusion.validate();
    println!("{report}");
    ok &= report.passed();

    let skel = category
        .skeleton_f64()
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let unitarity = skel.f_unitarity_residual();
    let pentagon = skel.pentagon_residual();
    println!("F-symbol unitarity residual:  {unitarity:.3e}");
    println!("pentagon residual:            {pentagon:.3e}");
    ok &= unitarity < 1e-9 && pentagon < 1e-9;

    let fp = category
        .fusion
        .fp_dimensions()
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let mut dim_res = 0.0f64;
    for z in category.fusion.simples() {
        dim_res = dim_res.max((skel.dims[z.0].re - fp[z.0]).abs());
    }
    println!("dims vs Perron iteration:     {dim_res:.3e}");
    ok &= dim_res < 1e-9;

    let mut conj_res = 0.0f64;
    for z in category.fusion.simples() {
        let sol = skel.standard_solution(z);
        conj_res = conj_res
            .max(sol.conj_eq1_residual)
            .max(sol.conj_eq2_residual)
            .max(sol.standardness_residual)
            .max((sol.rr.re - fp[z.0]).abs());
    }
    println!("conjugate equations residual: {conj_res:.3e}");
    ok &= conj_res < 1e-10;

    let tube = TubeAlgebra::new(Arc::new(skel), None);
    let tube_report = axiom_report(&tube, 25, 1);
    println!("{tube_report}");
    ok &= tube_report.passed(1e-10);

    if ok {
        println!("validate: PASS");
        Ok(EXIT_OK)
    } else {
        println!("validate: FAIL");
        Ok(EXIT_FAIL)
    }
}

fn cmd_info(category: &Category, out: Option<&std::path::Path>) -> Result<i32, CliError> {
    let data = &category.fusion;
    let skel = category
        .skeleton_f64()
        .map_err(|e| CliError::numerical(e.to_string()))?;
    println!("category: {} (field {})", category.name, category.field.as_str());
    println!("hash: {}", category.content_hash());
    println!("simples ({}):", data.rank());
    let exact_dims = category.exact_dims().ok();
    for z in data.simples() {
        let exact = exact_dims
            .as_ref()
            .map(|d| format!("  = {}", d[z.0]))
            .unwrap_or_default();
        println!(
            "  {:>8}  dual {:>8}  d = {:.12}{exact}",
            data.name(z),
            data.name(data.dual(z)),
            skel.dims[z.0].re
        );
    }
    println!("fusion matrices N_a[b,c]:");
    for a in data.simples() {
        println!("  N_{}:", data.name(a));
        for b in data.simples() {
            let row: Vec<String> = data
                .simples()
                .map(|c| data.n(a, b, c).to_string())
                .collect();
            println!("    [{}]", row.join(" "));
        }
    }
    let tube = TubeAlgebra::new(Arc::new(skel), None);
    println!("tube algebra dimension: {}", tube.dim());
    let cone = Cone::new(Arc::new(tube), ConeSupport::full(data.rank()))
        .map_err(|e| CliError::numerical(e.to_string()))?;
    println!("cone columns (source label: dimension):");
    for (x, n) in cone.column_dims() {
        println!("  {}: {}", data.name(x), n);
    }
    if let Some(path) = out {
        let report = serde_json::json!({
            "category": category.name,
            "hash": category.content_hash(),
            "field": category.field.as_str(),
            "simples": data.names(),
            "dims": data.simples().map(|z| skel_dim(category, z)).collect::<Vec<_>>(),
            "tube_dimension": cone.tube.dim(),
            "cone_columns": cone
                .column_dims()
                .iter()
                .map(|(x, n)| (data.name(*x).to_string(), n))
                .collect::<Vec<_>>(),
        });
        write_out(path, &serde_json::to_string_pretty(&report).unwrap())?;
    }
    Ok(EXIT_OK)
}

fn skel_dim(category: &Category, z: Label) -> f64 {
    category
        .skeleton_f64()
        .map(|s| s.dims[z.0].re)
        .unwrap_or(f64::NAN)
}

struct Cones {
    cone_f: Cone<C64>,
    cone_x: Cone<Exact>,
}

fn build_cones(
    category: &Category,
    spec: &LaplacianSpec,
    radius: Option<usize>,
) -> Result<Cones, CliError> {
    if !category.has_exact() {
        return Err(CliError::input(format!(
            "category '{}' is tagged float; certificates need an exact field \
             (rational or sqrtD) in the category file",
            category.name
        )));
    }
    let support = support_for(category, spec, radius);
    let skel_f = category
        .skeleton_f64()
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let skel_x = category
        .skeleton_exact()
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let cone_f = Cone::new(Arc::new(TubeAlgebra::new(Arc::new(skel_f), None)), support.clone())
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let cone_x = Cone::new(Arc::new(TubeAlgebra::new(Arc::new(skel_x), None)), support)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    Ok(Cones { cone_f, cone_x })
}

fn print_oracle_gap(category: &Category, spec: &LaplacianSpec) -> Option<f64> {
    let skel = category.skeleton_f64().ok()?;
    let dims = skel.dims.clone();
    let delta = crate::fusion::build_laplacian(spec, &category.fusion, &dims).ok()?;
    let tube = Arc::new(TubeAlgebra::new(Arc::new(skel), None));
    let model = build_gns(tube).ok()?;
    let report = admissible_spectrum(&model, &delta).ok()?;
    println!("oracle gap: {:.12}", report.gap);
    Some(report.gap)
}

fn cmd_certify(
    category: &Category,
    lap: &LapArgs,
    eps: &str,
    k: Option<&str>,
    solver: &SolverArgs,
    out: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    let eps = parse_exact_rational(eps, "--eps")?;
    if !eps.is_positive() {
        return Err(CliError::input("--eps must be positive"));
    }
    let fixed_k = match k {
        Some(s) => Some(parse_exact_rational(s, "--k")?),
        None => None,
    };
    let spec = laplacian_spec(category, lap)?;
    let cones = build_cones(category, &spec, solver.radius)?;
    let opts = SdpOptions {
        tol: solver.tol,
        seed: solver.seed,
        ..SdpOptions::default()
    };
    print_oracle_gap(category, &spec);

    match certify(
        category,
        &cones.cone_f,
        &cones.cone_x,
        &spec,
        &eps,
        fixed_k.as_ref(),
        &opts,
    ) {
        Ok(outcome) => {
            let path = out
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(format!("{}-certificate.json", category.name)));
            write_out(&path, &outcome.certificate.to_json())?;
            if let Some(kopt) = outcome.optimizer_k {
                println!("optimiser k: {kopt:.9}");
            }
            println!(
                "certified: Δ² − kΔ + ε·1 ∈ Σ²C with k = {} (≈ {:.9}), ε = {}",
                outcome.k,
                outcome.k.to_f64(),
                outcome.eps
            );
            println!(
                "eps_solve = {}, eta = {}, margin = {:.3e}, projection {}",
                outcome.eps_solve,
                outcome.eta,
                outcome.margin,
                if outcome.projected { "exact" } else { "absorbed" }
            );
            println!("certificate written to {}", path.display());
            // independent re-verification from the file on disk
            let json = std::fs::read_to_string(&path)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            let cert = CertificateFile::parse(&json)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            let report =
                verify_certificate(&cert, category).map_err(|e| CliError::numerical(e.to_string()))?;
            print!("{report}");
            if report.accepted {
                Ok(EXIT_OK)
            } else {
                Ok(EXIT_FAIL)
            }
        }
        Err(CertifyFailure::Refuted(wit)) => {
            let path = out
                .map(|p| p.with_extension("refutation.json"))
                .unwrap_or_else(|| PathBuf::from(format!("{}-refutation.json", category.name)));
            write_out(&path, &serde_json::to_string_pretty(&*wit).unwrap())?;
            println!(
                "k = {} is infeasible at this support: refutation witness written to {}",
                fixed_k.map(|k| k.to_string()).unwrap_or_default(),
                path.display()
            );
            println!(
                "witness: φ(Δ²−kΔ) = {:.6}, cone margin {:.3e}{}",
                wit.target_value,
                wit.cone_margin,
                if wit.truncated {
                    " (truncated support: refutation is relative to it)"
                } else {
                    ""
                }
            );
            Ok(EXIT_FAIL)
        }
        Err(CertifyFailure::EtaTooLarge { eta, budget }) => Err(CliError::numerical(format!(
            "rounding destroyed the certificate: eta = {eta} exceeds the budget {budget}; \
             decrease k or increase --eps"
        ))),
        Err(CertifyFailure::Error(e)) => Err(CliError::numerical(e.to_string())),
    }
}

trait RationalF64 {
    fn to_f64(&self) -> f64;
}

impl RationalF64 for Rational {
    fn to_f64(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn cmd_refute(
    category: &Category,
    lap: &LapArgs,
    k: &str,
    eps: &str,
    solver: &SolverArgs,
    out: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    let k = parse_exact_rational(k, "--k")?;
    let eps = parse_exact_rational(eps, "--eps")?;
    let spec = laplacian_spec(category, lap)?;
    let support = support_for(category, &spec, solver.radius);
    let skel_f = category
        .skeleton_f64()
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let cone_f = Cone::new(Arc::new(TubeAlgebra::new(Arc::new(skel_f), None)), support)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let data = &category.fusion;
    let delta = crate::fusion::build_laplacian(&spec, data, &cone_f.tube.skel.dims)
        .map_err(|e| CliError::input(e.to_string()))?;
    let opts = SdpOptions {
        tol: solver.tol,
        seed: solver.seed,
        ..SdpOptions::default()
    };
    let problem = crate::sdp::build_problem(
        &cone_f,
        &delta,
        eps.to_f64(),
        crate::sdp::ProblemKind::FixedK,
        k.to_f64(),
    )
    .map_err(|e| CliError::numerical(e.to_string()))?;
    let summary = crate::sdp::solve_problem(&problem, &opts)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    match crate::sdp::extract_refutation(&problem, &summary, &cone_f, &delta, k.to_f64(), 1e-9) {
        Ok(wit) => {
            let path = out
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(format!("{}-refutation.json", category.name)));
            write_out(&path, &serde_json::to_string_pretty(&wit).unwrap())?;
            println!("refutation witness written to {}", path.display());
            println!("φ(1) = 1 with values:");
            for (name, v) in &wit.values {
                println!("  φ({name}) = {v:.9}");
            }
            println!("cone-positivity margin: {:.3e}", wit.cone_margin);
            println!("φ(Δ² − kΔ) = {:.9} < 0", wit.target_value);
            if wit.truncated {
                println!("note: support is truncated; the refutation is relative to it");
            }
            Ok(EXIT_OK)
        }
        Err(crate::sdp::SdpError::NoRefutation(margin)) => {
            println!(
                "no refutation: Δ² − kΔ + ε·1 is feasible at this support (margin {margin:.3e})"
            );
            Ok(EXIT_FAIL)
        }
        Err(e) => Err(CliError::numerical(e.to_string())),
    }
}

fn cmd_oracle_gap(
    category: &Category,
    lap: &LapArgs,
    out: Option<&std::path::Path>,
) -> Result<i32, CliError> {
    let spec = laplacian_spec(category, lap)?;
    let skel = category
        .skeleton_f64()
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let delta = crate::fusion::build_laplacian(&spec, &category.fusion, &skel.dims)
        .map_err(|e| CliError::input(e.to_string()))?;
    let tube = Arc::new(TubeAlgebra::new(Arc::new(skel), None));
    let model = build_gns(tube.clone()).map_err(|e| CliError::numerical(e.to_string()))?;
    let report = admissible_spectrum(&model, &delta)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    println!("{report}");
    // the admissibility cross-check guards the star/positivity conventions
    let cone = Cone::new(tube, ConeSupport::full(category.fusion.rank()))
        .map_err(|e| CliError::numerical(e.to_string()))?;
    let cross = crosscheck_admissibility(&model, &cone, 100, 11)
        .map_err(|e| CliError::numerical(e.to_string()))?;
    println!(
        "admissibility cross-check: worst vector-state value {:.3e} over {} PSD samples",
        cross.worst_violation, cross.trials
    );
    if let Some(path) = out {
        let json = serde_json::json!({
            "category": category.name,
            "spectrum": report.eigenvalues,
            "gap": report.gap,
            "zero_multiplicity": report.zero_multiplicity,
            "crosscheck_worst": cross.worst_violation,
        });
        write_out(path, &serde_json::to_string_pretty(&json).unwrap())?;
    }
    if cross.worst_violation < -1e-8 {
        return Err(CliError::fail(
            "admissibility cross-check failed (convention bug guard)",
        ));
    }
    Ok(EXIT_OK)
}

fn cmd_verify(category: &Category, cert_path: &std::path::Path) -> Result<i32, CliError> {
    let json = std::fs::read_to_string(cert_path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", cert_path.display())))?;
    let cert = CertificateFile::parse(&json).map_err(|e| CliError::input(e.to_string()))?;
    let report =
        verify_certificate(&cert, category).map_err(|e| CliError::numerical(e.to_string()))?;
    print!("{report}");
    if report.accepted {
        Ok(EXIT_OK)
    } else {
        Ok(EXIT_FAIL)
    }
}
