//! Numerical search for cone certificates: a dense primal-dual interior
//! point SDP solver with Nesterov–Todd scaling, the problem builders for
//! "maximise k subject to Λ(Q) + kΔ = Δ² + ε·1, Q ⪰ 0" and its fixed-k
//! margin variant, exact rounding of solutions, and dual-witness
//! extraction for refutations.

use crate::cone::{Cone, ConeError, Gram};
use crate::fusion::{FaElement, Label};
use crate::mat::{ldl_psd_check, Mat};
use crate::scalar::{Exact, Rational, Scalar, C64};
use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("numerical breakdown: {0}")]
    Breakdown(String),
    #[error("support too small: label '{0}' cannot be reached by the cone products")]
    SupportTooSmall(String),
    #[error("rounding failed: {0}")]
    Rounding(String),
    #[error("problem is feasible at this k (margin {0:.3e}); no refutation exists")]
    NoRefutation(f64),
    #[error(transparent)]
    Cone(#[from] ConeError),
    #[error("complex structure constants are not supported by the float SDP stage")]
    ComplexUnsupported,
}

#[derive(Debug, Clone)]
pub struct SdpOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// denominator bound for rationalisation (default 2^48)
    pub max_denominator: u64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions {
            tol: 1e-9,
            max_iter: 200,
            seed: 0,
            max_denominator: 1u64 << 48,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Solved,
    Stalled,
}

/// A dense SDP in primal standard form: minimise ⟨C,X⟩ subject to
/// ⟨A_i, X⟩ = b_i and X ⪰ 0 block-diagonal.
pub struct SdpInput {
    pub block_dims: Vec<usize>,
    /// per row: coefficient matrix per block (None = zero), and the rhs
    pub rows: Vec<(Vec<Option<DMatrix<f64>>>, f64)>,
    pub objective: Vec<Option<DMatrix<f64>>>,
    pub row_labels: Vec<String>,
}

impl SdpInput {
    /// Plain-text dump for offline inspection.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "blocks: {:?}", self.block_dims);
        for (i, (mats, rhs)) in self.rows.iter().enumerate() {
            let _ = writeln!(s, "row {} ({}): rhs = {}", i, self.row_labels[i], rhs);
            for (b, m) in mats.iter().enumerate() {
                if let Some(m) = m {
                    let _ = writeln!(s, "  block {b}: {m:.6}");
                }
            }
        }
        let _ = writeln!(s, "objective:");
        for (b, m) in self.objective.iter().enumerate() {
            if let Some(m) = m {
                let _ = writeln!(s, "  block {b}: {m:.6}");
            }
        }
        s
    }
}

/// Solver output; residuals are recomputed from the returned matrices.
pub struct SdpOutput {
    pub status: SolveStatus,
    pub x: Vec<DMatrix<f64>>,
    pub s: Vec<DMatrix<f64>>,
    pub y: DVector<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub gap: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub min_block_eigenvalues: Vec<f64>,
    pub iterations: usize,
}

fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    nalgebra::SymmetricEigen::new(sym(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Largest α ∈ (0, 1] keeping X + α·ΔX positive definite (with a 0.98
/// fraction-to-boundary factor), via the Cholesky factor of X.
fn max_step(x: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let chol = match nalgebra::Cholesky::new(sym(x)) {
        Some(c) => c,
        None => return 0.0,
    };
    let l: DMatrix<f64> = chol.l();
    let linv = l.try_inverse().expect("triangular factor invertible");
    let scaled = &linv * sym(dx) * linv.transpose();
    let lam = min_eig(&scaled);
    if lam >= 0.0 {
        1.0
    } else {
        (-0.98 / lam).min(1.0)
    }
}

/// Primal-dual interior-point method with NT scaling and an adaptive
/// centring parameter.  Deterministic for a fixed seed; the seed only
/// jitters the initial point.
pub fn solve_sdp(input: &SdpInput, opts: &SdpOptions) -> Result<SdpOutput, SdpError> {
    let nb = input.block_dims.len();
    let m = input.rows.len();
    if m == 0 {
        return Err(SdpError::Breakdown("no constraints".into()));
    }
    let b_vec = DVector::from_iterator(m, input.rows.iter().map(|r| r.1));
    let data_scale = 1.0
        + b_vec.amax()
        + input
            .objective
            .iter()
            .flatten()
            .map(|c| c.amax())
            .fold(0.0, f64::max);

    // deterministic jitter from the seed
    let mut state = opts.seed.wrapping_mul(6364136223846793005).wrapping_add(1);
    let mut jitter = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) as f64) / (u32::MAX as f64) * 1e-4
    };

    let mut x: Vec<DMatrix<f64>> = input
        .block_dims
        .iter()
        .map(|&n| DMatrix::identity(n, n) * (data_scale * (1.0 + jitter())))
        .collect();
    let mut s: Vec<DMatrix<f64>> = input
        .block_dims
        .iter()
        .map(|&n| DMatrix::identity(n, n) * (data_scale * (1.0 + jitter())))
        .collect();
    let mut y = DVector::zeros(m);
    let n_total: usize = input.block_dims.iter().sum();

    let apply_a = |x: &[DMatrix<f64>]| -> DVector<f64> {
        DVector::from_iterator(
            m,
            input.rows.iter().map(|(mats, _)| {
                mats.iter()
                    .zip(x.iter())
                    .map(|(a, xb)| a.as_ref().map_or(0.0, |a| inner(a, xb)))
                    .sum::<f64>()
            }),
        )
    };
    let apply_at = |y: &DVector<f64>| -> Vec<DMatrix<f64>> {
        let mut out: Vec<DMatrix<f64>> = input
            .block_dims
            .iter()
            .map(|&n| DMatrix::zeros(n, n))
            .collect();
        for (i, (mats, _)) in input.rows.iter().enumerate() {
            for (b, a) in mats.iter().enumerate() {
                if let Some(a) = a {
                    out[b] += a * y[i];
                }
            }
        }
        out
    };
    let cmat = |b: usize| -> DMatrix<f64> {
        input.objective[b]
            .clone()
            .unwrap_or_else(|| DMatrix::zeros(input.block_dims[b], input.block_dims[b]))
    };

    let mut iterations = 0;
    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let rp = &b_vec - apply_a(&x);
        let aty = apply_at(&y);
        let rd: Vec<DMatrix<f64>> = (0..nb).map(|b| cmat(b) - &aty[b] - &s[b]).collect();
        let mu: f64 = x
            .iter()
            .zip(s.iter())
            .map(|(xb, sb)| inner(xb, sb))
            .sum::<f64>()
            / n_total as f64;
        let rp_norm = rp.norm() / (1.0 + b_vec.norm());
        let rd_norm = rd.iter().map(|r| r.norm()).fold(0.0, f64::max) / data_scale;
        let res = rp_norm.max(rd_norm).max(mu / data_scale);
        if res < opts.tol {
            break;
        }

        // NT scaling per block: W = G Gᵀ with W S W = X
        let mut g_fac: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
        for b in 0..nb {
            let lx = nalgebra::Cholesky::new(sym(&x[b]))
                .ok_or_else(|| SdpError::Breakdown("X lost positive definiteness".into()))?;
            let ls = nalgebra::Cholesky::new(sym(&s[b]))
                .ok_or_else(|| SdpError::Breakdown("S lost positive definiteness".into()))?;
            let m0 = ls.l().transpose() * lx.l();
            let svd = nalgebra::SVD::new(m0, true, true);
            let vt = svd.v_t.as_ref().unwrap();
            let sig_inv_half = DMatrix::from_diagonal(&svd.singular_values.map(|s| {
                if s <= 1e-300 {
                    0.0
                } else {
                    s.powf(-0.5)
                }
            }));
            let g = lx.l() * vt.transpose() * sig_inv_half;
            g_fac.push(g);
        }
        let w_conj = |b: usize, mtx: &DMatrix<f64>| -> DMatrix<f64> {
            let g = &g_fac[b];
            let inner_m = g.transpose() * sym(mtx) * g;
            g * inner_m * g.transpose()
        };

        // Schur complement M[i][j] = Σ_b ⟨A_i, W A_j W⟩
        let mut schur = DMatrix::zeros(m, m);
        let mut wa: Vec<Vec<Option<DMatrix<f64>>>> = Vec::with_capacity(m);
        for (mats, _) in &input.rows {
            let row: Vec<Option<DMatrix<f64>>> = mats
                .iter()
                .enumerate()
                .map(|(b, a)| a.as_ref().map(|a| w_conj(b, a)))
                .collect();
            wa.push(row);
        }
        for i in 0..m {
            for j in 0..m {
                let mut v = 0.0;
                for b in 0..nb {
                    if let (Some(ai), Some(waj)) = (&input.rows[i].0[b], &wa[j][b]) {
                        v += inner(ai, waj);
                    }
                }
                schur[(i, j)] = v;
            }
        }
        let schur_chol = nalgebra::Cholesky::new(sym(&schur))
            .or_else(|| {
                let mut ridge = sym(&schur);
                for i in 0..m {
                    ridge[(i, i)] += 1e-12 * (1.0 + schur[(i, i)].abs());
                }
                nalgebra::Cholesky::new(ridge)
            })
            .ok_or_else(|| SdpError::Breakdown("singular KKT (Schur) system".into()))?;

        let sinv: Vec<DMatrix<f64>> = (0..nb)
            .map(|b| {
                nalgebra::Cholesky::new(sym(&s[b]))
                    .map(|c| c.inverse())
                    .unwrap()
            })
            .collect();
        let direction = |sigma: f64| -> (Vec<DMatrix<f64>>, Vec<DMatrix<f64>>, DVector<f64>) {
            // A(W Aᵀ(Δy) W) = rp − A(σμS⁻¹ − X − W Rd W)
            let mut rhs = rp.clone();
            let mut base: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
            for b in 0..nb {
                let t = &sinv[b] * (sigma * mu) - &x[b] - w_conj(b, &rd[b]);
                base.push(t);
            }
            for (i, (mats, _)) in input.rows.iter().enumerate() {
                let mut v = 0.0;
                for (b, a) in mats.iter().enumerate() {
                    if let Some(a) = a {
                        v += inner(a, &base[b]);
                    }
                }
                rhs[i] -= v;
            }
            let dy = schur_chol.solve(&rhs);
            let at_dy = apply_at(&dy);
            let mut dx: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
            let mut ds: Vec<DMatrix<f64>> = Vec::with_capacity(nb);
            for b in 0..nb {
                let dsb = &rd[b] - &at_dy[b];
                let dxb = &sinv[b] * (sigma * mu) - &x[b] - w_conj(b, &dsb);
                dx.push(sym(&dxb));
                ds.push(sym(&dsb));
            }
            (dx, ds, dy)
        };

        // predictor to choose the centring parameter
        let (dx_aff, ds_aff, _) = direction(0.0);
        let mut ap = 1.0f64;
        let mut ad = 1.0f64;
        for b in 0..nb {
            ap = ap.min(max_step(&x[b], &dx_aff[b]));
            ad = ad.min(max_step(&s[b], &ds_aff[b]));
        }
        let mu_aff: f64 = (0..nb)
            .map(|b| inner(&(&x[b] + &dx_aff[b] * ap), &(&s[b] + &ds_aff[b] * ad)))
            .sum::<f64>()
            / n_total as f64;
        let sigma = ((mu_aff / mu).powi(3)).clamp(1e-6, 0.9);

        let (dx, ds, dy) = direction(sigma);
        let mut ap = 1.0f64;
        let mut ad = 1.0f64;
        for b in 0..nb {
            ap = ap.min(max_step(&x[b], &dx[b]));
            ad = ad.min(max_step(&s[b], &ds[b]));
        }
        for b in 0..nb {
            x[b] += &dx[b] * ap;
            s[b] += &ds[b] * ad;
            x[b] = sym(&x[b]);
            s[b] = sym(&s[b]);
        }
        y += dy * ad;
    }

    // recompute accuracy measures from the final iterates
    let rp = &b_vec - apply_a(&x);
    let aty = apply_at(&y);
    let rd_norm = (0..nb)
        .map(|b| (cmat(b) - &aty[b] - &s[b]).norm())
        .fold(0.0, f64::max);
    let primal_obj: f64 = (0..nb).map(|b| inner(&cmat(b), &x[b])).sum();
    let dual_obj = b_vec.dot(&y);
    let gap: f64 = x.iter().zip(s.iter()).map(|(a, b)| inner(a, b)).sum();
    let min_eigs: Vec<f64> = x.iter().map(min_eig).collect();
    let rp_norm = rp.norm() / (1.0 + b_vec.norm());
    let status = if rp_norm
        .max(rd_norm / data_scale)
        .max(gap.abs() / (n_total as f64 * data_scale))
        < opts.tol * 100.0
    {
        SolveStatus::Solved
    } else {
        SolveStatus::Stalled
    };
    Ok(SdpOutput {
        status,
        x,
        s,
        y,
        primal_objective: primal_obj,
        dual_objective: dual_obj,
        gap,
        primal_residual: rp_norm,
        dual_residual: rd_norm,
        min_block_eigenvalues: min_eigs,
        iterations,
    })
}

/// Alternating-projection fallback for feasibility problems: alternately
/// projects onto the PSD blocks and onto the affine constraint set.
pub fn solve_alternating_projections(
    input: &SdpInput,
    iters: usize,
) -> Result<Vec<DMatrix<f64>>, SdpError> {
    let nb = input.block_dims.len();
    let m = input.rows.len();
    let b_vec = DVector::from_iterator(m, input.rows.iter().map(|r| r.1));
    let mut gram = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut v = 0.0;
            for b in 0..nb {
                if let (Some(a), Some(c)) = (&input.rows[i].0[b], &input.rows[j].0[b]) {
                    v += inner(a, c);
                }
            }
            gram[(i, j)] = v;
        }
    }
    let chol = nalgebra::Cholesky::new(gram.clone()).or_else(|| {
        let mut g = gram.clone();
        for i in 0..m {
            g[(i, i)] += 1e-12;
        }
        nalgebra::Cholesky::new(g)
    });
    let chol = chol.ok_or_else(|| SdpError::Breakdown("degenerate constraint Gram".into()))?;
    let mut x: Vec<DMatrix<f64>> = input
        .block_dims
        .iter()
        .map(|&n| DMatrix::identity(n, n))
        .collect();
    for _ in 0..iters {
        // affine projection
        let ax = DVector::from_iterator(
            m,
            input.rows.iter().map(|(mats, _)| {
                mats.iter()
                    .zip(x.iter())
                    .map(|(a, xb)| a.as_ref().map_or(0.0, |a| inner(a, xb)))
                    .sum::<f64>()
            }),
        );
        let lam = chol.solve(&(&b_vec - &ax));
        for b in 0..nb {
            for (i, (mats, _)) in input.rows.iter().enumerate() {
                if let Some(a) = &mats[b] {
                    x[b] += a * lam[i];
                }
            }
        }
        // PSD projection
        for xb in x.iter_mut() {
            let eig = nalgebra::SymmetricEigen::new(sym(xb));
            let vals = eig.eigenvalues.map(|v| v.max(0.0));
            *xb = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        }
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Problem builders over the cone
// ---------------------------------------------------------------------------

/// Which scalar variable the problem carries besides the Gram blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// maximise k in Λ(Q) + kΔ = Δ² + ε·1
    OptimizeK,
    /// maximise m in Λ(Q') + m·Λ(I) = Δ² − kΔ + ε·1 (margin of feasibility)
    FixedK,
}

pub struct SdpProblem {
    pub kind: ProblemKind,
    pub input: SdpInput,
    pub labels: Vec<Label>,
    /// per cone column: its block index in the SDP
    pub column_blocks: Vec<usize>,
    /// the (plus, minus) scalar blocks encoding the free variable
    pub scalar_blocks: (usize, usize),
}

fn real_coeff(c: &C64) -> Result<f64, SdpError> {
    if c.im.abs() > 1e-10 * (1.0 + c.re.abs()) {
        return Err(SdpError::ComplexUnsupported);
    }
    Ok(c.re)
}

/// Builds the SDP.  Constraint rows are indexed by the Irr labels appearing
/// in any product b_p·b_q*, in Δ², Δ, or the unit; a target label carrying
/// a non-zero coefficient that no product can reach is a hard error.
pub fn build_problem(
    cone: &Cone<C64>,
    delta: &FaElement<C64>,
    eps: f64,
    kind: ProblemKind,
    fixed_k: f64,
) -> Result<SdpProblem, SdpError> {
    let data = cone.tube.skel.fusion.clone();
    let unit = data.unit();
    let mut label_set: Vec<Label> = Vec::new();
    let mut seen = vec![false; data.rank()];
    let touch = |l: Label, seen: &mut Vec<bool>, set: &mut Vec<Label>| {
        if !seen[l.0] {
            seen[l.0] = true;
            set.push(l);
        }
    };
    touch(unit, &mut seen, &mut label_set);
    let delta_sq = delta.multiply(delta, &data);
    for (l, _) in delta.support() {
        touch(l, &mut seen, &mut label_set);
    }
    for (l, _) in delta_sq.support() {
        touch(l, &mut seen, &mut label_set);
    }
    let ncols = cone.columns.len();
    let mut reachable = vec![false; data.rank()];
    for ci in 0..ncols {
        let n = cone.columns[ci].tube_indices.len();
        for p in 0..n {
            for q in 0..n {
                for (l, c) in cone.product(ci, p, q).support() {
                    if c.norm() > 1e-12 {
                        reachable[l.0] = true;
                        touch(l, &mut seen, &mut label_set);
                    }
                }
            }
        }
    }
    label_set.sort();
    let target = delta_sq.add(&FaElement::unit(&data).scale(&C64::new(eps, 0.0)));
    let target = match kind {
        ProblemKind::OptimizeK => target,
        ProblemKind::FixedK => target.sub(&delta.scale(&C64::new(fixed_k, 0.0))),
    };
    for (l, c) in target.support() {
        if c.norm() > 1e-12 && !reachable[l.0] {
            return Err(SdpError::SupportTooSmall(data.name(l).to_string()));
        }
    }

    // blocks: cone columns, then the two 1×1 scalar blocks
    let mut block_dims: Vec<usize> = cone.columns.iter().map(|c| c.tube_indices.len()).collect();
    let column_blocks: Vec<usize> = (0..ncols).collect();
    let plus_block = block_dims.len();
    block_dims.push(1);
    let minus_block = block_dims.len();
    block_dims.push(1);

    // Λ(I) coefficients for the margin column
    let mut lambda_id = FaElement::<C64>::zero();
    for ci in 0..ncols {
        let n = cone.columns[ci].tube_indices.len();
        for p in 0..n {
            lambda_id = lambda_id.add(cone.product(ci, p, p));
        }
    }

    let mut rows = Vec::new();
    let mut row_labels = Vec::new();
    for &l in &label_set {
        let mut mats: Vec<Option<DMatrix<f64>>> = vec![None; block_dims.len()];
        for ci in 0..ncols {
            let n = cone.columns[ci].tube_indices.len();
            let mut a = DMatrix::zeros(n, n);
            let mut nonzero = false;
            for p in 0..n {
                for q in 0..n {
                    let c = real_coeff(&cone.product(ci, p, q).coeff(l))?;
                    if c != 0.0 {
                        nonzero = true;
                    }
                    a[(p, q)] += 0.5 * c;
                    a[(q, p)] += 0.5 * c;
                }
            }
            if nonzero {
                mats[column_blocks[ci]] = Some(a);
            }
        }
        let scalar_coeff = match kind {
            ProblemKind::OptimizeK => real_coeff(&delta.coeff(l))?,
            ProblemKind::FixedK => real_coeff(&lambda_id.coeff(l))?,
        };
        if scalar_coeff != 0.0 {
            mats[plus_block] = Some(DMatrix::from_element(1, 1, scalar_coeff));
            mats[minus_block] = Some(DMatrix::from_element(1, 1, -scalar_coeff));
        }
        let rhs = real_coeff(&target.coeff(l))?;
        rows.push((mats, rhs));
        row_labels.push(data.name(l).to_string());
    }

    // objective: maximise the scalar = minimise (−plus + minus)
    let mut objective: Vec<Option<DMatrix<f64>>> = vec![None; block_dims.len()];
    objective[plus_block] = Some(DMatrix::from_element(1, 1, -1.0));
    objective[minus_block] = Some(DMatrix::from_element(1, 1, 1.0));

    Ok(SdpProblem {
        kind,
        input: SdpInput {
            block_dims,
            rows,
            objective,
            row_labels,
        },
        labels: label_set,
        column_blocks,
        scalar_blocks: (plus_block, minus_block),
    })
}

/// Solver result in cone terms: the optimal scalar (k or the margin m) and
/// the Gram blocks (for the fixed-k problem the margin is folded back in:
/// Q = Q' + m·I).
pub struct SolveSummary {
    pub scalar: f64,
    pub gram: Vec<DMatrix<f64>>,
    pub output: SdpOutput,
}

pub fn solve_problem(problem: &SdpProblem, opts: &SdpOptions) -> Result<SolveSummary, SdpError> {
    let out = solve_sdp(&problem.input, opts)?;
    let (pb, mb) = problem.scalar_blocks;
    let scalar = out.x[pb][(0, 0)] - out.x[mb][(0, 0)];
    let mut gram: Vec<DMatrix<f64>> = problem
        .column_blocks
        .iter()
        .map(|&b| out.x[b].clone())
        .collect();
    if problem.kind == ProblemKind::FixedK {
        for g in gram.iter_mut() {
            let n = g.nrows();
            *g += DMatrix::<f64>::identity(n, n) * scalar;
        }
    }
    Ok(SolveSummary {
        scalar,
        gram,
        output: out,
    })
}

// ---------------------------------------------------------------------------
// Exact rounding
// ---------------------------------------------------------------------------

/// Best rational approximation with bounded denominator (continued
/// fractions).
pub fn rationalize(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let negative = x < 0.0;
    let mut x = x.abs();
    let (mut p0, mut q0) = (BigInt::from(0), BigInt::from(1));
    let (mut p1, mut q1) = (BigInt::from(1), BigInt::from(0));
    let bound = BigInt::from(max_den);
    for _ in 0..64 {
        let a = x.floor();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        if q2 > bound {
            break;
        }
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        let frac = x - a;
        if frac < 1e-15 {
            break;
        }
        x = 1.0 / frac;
    }
    if q1.is_zero() {
        return Rational::zero();
    }
    let r = Rational::new(p1, q1);
    if negative {
        -r
    } else {
        r
    }
}

/// Gaussian elimination over the exact field; free variables are set to
/// zero.  Returns None if the system is inconsistent.
fn solve_exact_system(a: &mut [Vec<Exact>], rhs: &mut [Exact]) -> Option<Vec<Exact>> {
    let m = a.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let n = a[0].len();
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut row = 0usize;
    for col in 0..n {
        if row >= m {
            break;
        }
        let Some(piv) = (row..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, piv);
        rhs.swap(row, piv);
        let inv = a[row][col].inv();
        for j in col..n {
            a[row][j] = a[row][j].clone() * inv.clone();
        }
        rhs[row] = rhs[row].clone() * inv;
        for i in 0..m {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..n {
                    a[i][j] = a[i][j].clone() - f.clone() * a[row][j].clone();
                }
                rhs[i] = rhs[i].clone() - f * rhs[row].clone();
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    for i in row..m {
        if !rhs[i].is_zero() {
            return None;
        }
    }
    let mut v = vec![Exact::zero(); n];
    for (r, c) in pivots {
        v[c] = rhs[r].clone();
    }
    Some(v)
}

/// Result of exact rounding.
pub struct RoundedGram {
    pub gram: Gram<Exact>,
    /// exact residual target − Λ(gram)
    pub residual: FaElement<Exact>,
    /// whether the affine projection brought the residual to exactly zero
    pub projected: bool,
}

/// Rounds float Gram blocks to exact arithmetic against the exact target:
/// rationalises entries with a denominator bound, projects exactly back
/// onto the affine set Λ(Q) = target when the system is consistent,
/// enforces PSD by a diagonal shift when the exact LDL* rejects a block,
/// and recomputes the exact residual.
pub fn round_to_exact(
    gram_float: &[DMatrix<f64>],
    cone: &Cone<Exact>,
    target: &FaElement<Exact>,
    opts: &SdpOptions,
) -> Result<RoundedGram, SdpError> {
    let data = cone.tube.skel.fusion.clone();
    // 1. rationalise (symmetrised)
    let mut gram: Gram<Exact> = Vec::with_capacity(cone.columns.len());
    for (ci, col) in cone.columns.iter().enumerate() {
        let n = col.tube_indices.len();
        let gf = &gram_float[ci];
        let mut m = Mat::<Exact>::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * (gf[(i, j)] + gf[(j, i)]);
                let r = rationalize(v, opts.max_denominator);
                m[(i, j)] = Exact::from_rational(r.clone());
                if i != j {
                    m[(j, i)] = Exact::from_rational(r);
                }
            }
        }
        gram.push(m);
    }

    // 2. exact affine projection over the upper-triangle entries (the
    //    parametrisation assumes real products; complex categories fall
    //    back to the residual-absorption path)
    let mut vars: Vec<(usize, usize, usize)> = Vec::new();
    for (ci, col) in cone.columns.iter().enumerate() {
        let n = col.tube_indices.len();
        for i in 0..n {
            for j in i..n {
                vars.push((ci, i, j));
            }
        }
    }
    let defect = target.sub(&cone.assemble(&gram));
    let all_real = (0..cone.columns.len()).all(|ci| {
        let n = cone.columns[ci].tube_indices.len();
        (0..n).all(|p| (0..n).all(|q| cone.product(ci, p, q).support().all(|(_, c)| c.is_real())))
    });
    let mut projected = defect.is_zero();
    if all_real && !defect.is_zero() {
        let labels: Vec<Label> = data.simples().collect();
        let mut a_rows: Vec<Vec<Exact>> = Vec::new();
        let mut rhs: Vec<Exact> = Vec::new();
        for &l in &labels {
            let mut arow = Vec::with_capacity(vars.len());
            for &(ci, i, j) in &vars {
                let c = if i == j {
                    cone.product(ci, i, i).coeff(l)
                } else {
                    cone.product(ci, i, j)
                        .coeff(l)
                        .add_ref(&cone.product(ci, j, i).coeff(l))
                };
                arow.push(c);
            }
            a_rows.push(arow);
            rhs.push(defect.coeff(l));
        }
        if let Some(corr) = solve_exact_system(&mut a_rows, &mut rhs) {
            for (vi, &(ci, i, j)) in vars.iter().enumerate() {
                if corr[vi].is_zero() {
                    continue;
                }
                gram[ci][(i, j)] = gram[ci][(i, j)].clone() + corr[vi].clone();
                if i != j {
                    gram[ci][(j, i)] = gram[ci][(j, i)].clone() + corr[vi].clone();
                }
            }
            projected = true;
        }
    }

    // 3. PSD enforcement: exact LDL*; on failure shift by λ·I with λ twice
    //    the float eigenvalue estimate (the shift re-introduces a residual,
    //    absorbed downstream)
    for (ci, block) in gram.iter_mut().enumerate() {
        if ldl_psd_check(block).is_psd() {
            continue;
        }
        let n = block.rows;
        let approx = DMatrix::from_fn(n, n, |i, j| block[(i, j)].approx().re);
        let lam = (-min_eig(&approx)).max(0.0);
        let shift = rationalize(lam * 2.0 + 1e-12, opts.max_denominator);
        let shift = Exact::from_rational(shift);
        for i in 0..n {
            block[(i, i)] = block[(i, i)].clone() + shift.clone();
        }
        if !ldl_psd_check(block).is_psd() {
            return Err(SdpError::Rounding(format!(
                "column {ci}: block not PSD after shift"
            )));
        }
        projected = false;
    }

    let residual = target.sub(&cone.assemble(&gram));
    Ok(RoundedGram {
        gram,
        residual,
        projected,
    })
}

// ---------------------------------------------------------------------------
// End-to-end certification
// ---------------------------------------------------------------------------

/// Outcome of a successful certification run.
pub struct CertifyOutcome {
    pub certificate: crate::cone::CertificateFile,
    pub k: Rational,
    pub eps: Rational,
    pub eps_solve: Rational,
    pub eta: Exact,
    pub optimizer_k: Option<f64>,
    pub margin: f64,
    pub iterations: usize,
    pub projected: bool,
}

/// Why certification did not produce a certificate.
#[derive(Debug)]
pub enum CertifyFailure {
    /// fixed k is infeasible at this truncation; the dual witness refutes it
    Refuted(Box<RefutationWitness>),
    /// the solver or rounding failed
    Error(SdpError),
    /// rounding left a residual too large for the ε budget
    EtaTooLarge { eta: String, budget: String },
}

impl From<SdpError> for CertifyFailure {
    fn from(e: SdpError) -> Self {
        CertifyFailure::Error(e)
    }
}

impl From<ConeError> for CertifyFailure {
    fn from(e: ConeError) -> Self {
        CertifyFailure::Error(SdpError::Cone(e))
    }
}

fn rational_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Largest rational ≤ x with bounded denominator.
fn rationalize_below(x: f64, max_den: u64) -> Rational {
    let mut r = rationalize(x, max_den);
    let step = Rational::new(BigInt::from(1), BigInt::from(max_den));
    while rational_f64(&r) > x {
        r -= step.clone();
    }
    r
}

/// The full certification pipeline.
///
/// With `fixed_k = None` the target k is found by one optimising solve:
/// k_final is backed off to the larger root of t² − k*t + ε_solve = 0 (the
/// spectral point at the optimum), which keeps the certified k at or below
/// the true gap.  A second fixed-k solve with maximal PSD margin produces
/// an interior Gram matrix, which is rationalised, projected exactly onto
/// the affine constraint set, and absorbed into a verified certificate with
/// final ε ≤ the requested ε.  Every emitted certificate re-verifies before
/// this function returns.
pub fn certify(
    category: &crate::category::Category,
    cone_f: &Cone<C64>,
    cone_x: &Cone<Exact>,
    spec: &crate::fusion::LaplacianSpec,
    eps: &Rational,
    fixed_k: Option<&Rational>,
    opts: &SdpOptions,
) -> Result<CertifyOutcome, CertifyFailure> {
    let data = cone_f.tube.skel.fusion.clone();
    let delta_f =
        crate::fusion::build_laplacian(spec, &data, &cone_f.tube.skel.dims).map_err(|e| {
            CertifyFailure::Error(SdpError::Breakdown(format!("laplacian: {e}")))
        })?;
    let delta_x = crate::fusion::build_laplacian(spec, &data, &cone_x.tube.skel.dims)
        .map_err(|e| CertifyFailure::Error(SdpError::Breakdown(format!("laplacian: {e}"))))?;

    // solver ε: 7/8 of the request, leaving an absorption budget of ε/8
    let eps_solve = eps * Rational::new(7.into(), 8.into());
    let eta_budget = eps - &eps_solve;
    let eps_solve_f = rational_f64(&eps_solve);

    // choose k
    let mut optimizer_k = None;
    let mut k_final: Rational = match fixed_k {
        Some(k) => k.clone(),
        None => {
            let problem = build_problem(cone_f, &delta_f, eps_solve_f, ProblemKind::OptimizeK, 0.0)?;
            let summary = solve_problem(&problem, opts)?;
            let k_star = summary.scalar;
            optimizer_k = Some(k_star);
            let slack = (summary.output.primal_residual
                + summary.output.dual_residual
                + summary.output.gap.abs())
            .max(1e-9);
            // back off to the larger root of t² − k*·t + ε = 0
            let disc = (k_star * k_star - 4.0 * eps_solve_f).max(0.0);
            let r_plus = 0.5 * (k_star + disc.sqrt());
            let k_target = r_plus - 10.0 * slack - 1e-7;
            if k_target <= 0.0 {
                return Err(CertifyFailure::Error(SdpError::Breakdown(format!(
                    "no positive k certifiable (optimiser k = {k_star:.6})"
                ))));
            }
            rationalize_below(k_target, 1_000_000)
        }
    };

    // fixed-k margin solve (with a small retry loop when optimising)
    let mut attempt = 0usize;
    let summary = loop {
        let problem = build_problem(
            cone_f,
            &delta_f,
            eps_solve_f,
            ProblemKind::FixedK,
            rational_f64(&k_final),
        )?;
        let mut summary = solve_problem(&problem, opts)?;
        if summary.output.status == SolveStatus::Stalled && summary.scalar > 1e-9 {
            // robustness fallback: alternating projections refine the
            // feasible point; the margin is folded in afterwards
            if let Ok(x) = solve_alternating_projections(&problem.input, 2000) {
                let gram: Vec<DMatrix<f64>> = problem
                    .column_blocks
                    .iter()
                    .map(|&b| x[b].clone())
                    .collect();
                let m = x[problem.scalar_blocks.0][(0, 0)] - x[problem.scalar_blocks.1][(0, 0)];
                let mut folded = gram;
                for g in folded.iter_mut() {
                    let n = g.nrows();
                    *g += DMatrix::<f64>::identity(n, n) * m;
                }
                summary.gram = folded;
            }
        }
        if summary.scalar > 1e-9 {
            break summary;
        }
        if fixed_k.is_some() {
            // infeasible as requested: extract the dual witness
            let wit = extract_refutation(
                &problem,
                &summary,
                cone_f,
                &delta_f,
                rational_f64(&k_final),
                1e-9,
            )?;
            return Err(CertifyFailure::Refuted(Box::new(wit)));
        }
        attempt += 1;
        if attempt > 3 {
            return Err(CertifyFailure::Error(SdpError::Breakdown(format!(
                "margin solve failed at k = {k_final} (margin {:.3e})",
                summary.scalar
            ))));
        }
        // back k off a little further and retry
        k_final = rationalize_below(rational_f64(&k_final) * 0.98 - 1e-9, 1_000_000);
        if rational_f64(&k_final) <= 0.0 {
            return Err(CertifyFailure::Error(SdpError::Breakdown(
                "k collapsed to zero during back-off".into(),
            )));
        }
    };

    // exact target and rounding
    let target = delta_x
        .multiply(&delta_x, &data)
        .sub(&delta_x.scale(&Exact::from_rational(k_final.clone())))
        .add(&FaElement::unit(&data).scale(&Exact::from_rational(eps_solve.clone())));
    let rounded = round_to_exact(&summary.gram, cone_x, &target, opts)?;

    // absorb the residual
    let (eta, gram_resid) = cone_x.l1_absorption(&rounded.residual)?;
    let budget = Exact::from_rational(eta_budget.clone());
    let slack = budget.clone() - eta.clone();
    if !slack.is_real_val() || slack.real_sign() == crate::scalar::Sign::Neg {
        return Err(CertifyFailure::EtaTooLarge {
            eta: format!("{eta}"),
            budget: format!("{eta_budget}"),
        });
    }
    let mut gram_absorb = gram_resid;
    let (uc, up) = cone_x.unit_position();
    gram_absorb[uc][(up, up)] = gram_absorb[uc][(up, up)].clone() + slack;

    let cert = crate::cone::certificate_file(
        category,
        cone_x,
        spec,
        &k_final,
        eps,
        &eps_solve,
        &eta,
        &rounded.gram,
        &gram_absorb,
        &rounded.residual,
    );
    // a certificate is never emitted without re-verification
    let report = crate::cone::verify_certificate(&cert, category)?;
    if !report.accepted {
        return Err(CertifyFailure::Error(SdpError::Rounding(format!(
            "internal: emitted certificate failed verification\n{report}"
        ))));
    }
    Ok(CertifyOutcome {
        certificate: cert,
        k: k_final,
        eps: eps.clone(),
        eps_solve,
        eta,
        optimizer_k,
        margin: summary.scalar,
        iterations: summary.output.iterations,
        projected: rounded.projected,
    })
}

// ---------------------------------------------------------------------------
// Refutation extraction
// ---------------------------------------------------------------------------

/// A weight-1 annular-state witness against Δ² − kΔ + ε·1 ∈ Σ²C(support):
/// a functional φ with φ(1) = 1, φ ⪰ 0 on the truncated cone up to the
/// reported margin, and φ(Δ² − kΔ) < 0.
#[derive(Debug, Clone, Serialize)]
pub struct RefutationWitness {
    pub k: f64,
    /// φ on the Irr labels (real parts; built-in categories are real)
    pub values: Vec<(String, f64)>,
    /// min eigenvalue over the cone-positivity matrices [φ(b_p·b_q*)]
    pub cone_margin: f64,
    /// φ(Δ² − kΔ)
    pub target_value: f64,
    /// the witness only refutes membership relative to this truncation
    pub truncated: bool,
    pub support_xs: Vec<String>,
    pub support_ws: Vec<String>,
}

/// Extracts the annular-state witness from the dual vector of a fixed-k
/// margin solve whose optimal margin came out negative.
pub fn extract_refutation(
    problem: &SdpProblem,
    summary: &SolveSummary,
    cone: &Cone<C64>,
    delta: &FaElement<C64>,
    k: f64,
    margin_tol: f64,
) -> Result<RefutationWitness, SdpError> {
    assert_eq!(problem.kind, ProblemKind::FixedK);
    if summary.scalar > -margin_tol {
        return Err(SdpError::NoRefutation(summary.scalar));
    }
    let data = cone.tube.skel.fusion.clone();
    let unit = data.unit();
    let raw: Vec<(Label, f64)> = problem
        .labels
        .iter()
        .zip(summary.output.y.iter())
        .map(|(&l, &v)| (l, v))
        .collect();
    let unit_val = raw
        .iter()
        .find(|(l, _)| *l == unit)
        .map(|(_, v)| *v)
        .unwrap_or(0.0);
    if unit_val.abs() < 1e-12 || !unit_val.is_finite() {
        return Err(SdpError::Breakdown(
            "dual vector fails normalisation (φ(1) ≈ 0)".into(),
        ));
    }
    // normalise to φ(1) = 1, choosing the sign that makes the
    // cone-positivity matrices PSD
    let mut best: Option<(f64, Vec<(Label, f64)>)> = None;
    for flip in [1.0f64, -1.0] {
        let cand: Vec<(Label, f64)> = raw
            .iter()
            .map(|&(l, v)| (l, v / (flip * unit_val.abs()) * flip.signum()))
            .collect();
        // rescale so φ(1) = 1 exactly
        let uv = cand
            .iter()
            .find(|(l, _)| *l == unit)
            .map(|(_, v)| *v)
            .unwrap();
        if uv.abs() < 1e-12 {
            continue;
        }
        let cand: Vec<(Label, f64)> = cand.iter().map(|&(l, v)| (l, v / uv)).collect();
        let margin = cone_margin(cone, &cand);
        match &best {
            Some((bm, _)) if *bm >= margin => {}
            _ => best = Some((margin, cand)),
        }
    }
    let (margin, phi) = best.unwrap();
    let delta_sq = delta.multiply(delta, &data);
    let expr = delta_sq.sub(&delta.scale(&C64::new(k, 0.0)));
    let mut value = 0.0;
    for (l, c) in expr.support() {
        let yv = phi
            .iter()
            .find(|(ll, _)| *ll == l)
            .map(|(_, v)| *v)
            .unwrap_or(0.0);
        value += yv * c.re;
    }
    Ok(RefutationWitness {
        k,
        values: phi
            .iter()
            .map(|&(l, v)| (data.name(l).to_string(), v))
            .collect(),
        cone_margin: margin,
        target_value: value,
        truncated: cone.tube.is_truncated()
            || cone.support.xs.len() != data.rank()
            || cone.support.ws.len() != data.rank(),
        support_xs: cone
            .support
            .xs
            .iter()
            .map(|&l| data.name(l).to_string())
            .collect(),
        support_ws: cone
            .support
            .ws
            .iter()
            .map(|&l| data.name(l).to_string())
            .collect(),
    })
}

/// Min eigenvalue over the matrices [φ(b_p·b_q*)]_{p,q} per column.
pub fn cone_margin(cone: &Cone<C64>, phi: &[(Label, f64)]) -> f64 {
    let mut worst = f64::INFINITY;
    for ci in 0..cone.columns.len() {
        let n = cone.columns[ci].tube_indices.len();
        let m = DMatrix::from_fn(n, n, |p, q| {
            phi.iter()
                .map(|&(l, v)| v * cone.product(ci, p, q).coeff(l).re)
                .sum::<f64>()
        });
        worst = worst.min(min_eig(&m));
    }
    worst
}
