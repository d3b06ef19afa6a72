//! Eigenspace constructions for the nonzero eigenvalues of A + hA_c.
//!
//! Every case reduces, per eigenpair (π, y) of the symmetric matrix P, to
//! a (2q+1)-dimensional block system in a q-vector b and a scalar c:
//!
//!   x₁ = ((1+hλ)/λ)·(b ⊗ y),   x₂ = b ⊗ y,   x₃ = c·y,
//!   [ρ_π L + σ_π I] b = κπc·1,   (λ+κ)c = κ((1+hλ)/λ)·b_j,
//!
//! with ρ_π = π(μ/λ + μh + η) and σ_π = (πκ(1+hλ) + λ²)/λ. The case
//! formulas pick λ and solve the block system; the auxiliary matrices
//! G, F, M and the branch-selected pseudoinverse vectors ψ/φ build the
//! bordered kernels. Every constructed vector is certified by its
//! residual against the assembled matrix, never trusted.

use serde::{Deserialize, Serialize};

use crate::linalg::{spectral_norm, to_complex, CMat, CVector, Vector, C64};
use crate::{Result, ToleranceConfig};

use super::SwitchedSystemMatrices;

/// The nonzero-eigenvalue cases (items ii–x of the eigenstructure
/// analysis).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenspaceCase {
    Ii,
    Iii,
    Iv,
    V,
    Vi,
    Vii,
    Viii,
    Ix,
    X,
}

impl EigenspaceCase {
    pub fn all() -> [EigenspaceCase; 9] {
        use EigenspaceCase::*;
        [Ii, Iii, Iv, V, Vi, Vii, Viii, Ix, X]
    }

    pub fn label(&self) -> &'static str {
        match self {
            EigenspaceCase::Ii => "ii",
            EigenspaceCase::Iii => "iii",
            EigenspaceCase::Iv => "iv",
            EigenspaceCase::V => "v",
            EigenspaceCase::Vi => "vi",
            EigenspaceCase::Vii => "vii",
            EigenspaceCase::Viii => "viii",
            EigenspaceCase::Ix => "ix",
            EigenspaceCase::X => "x",
        }
    }
}

/// Result of one case verification on one instance.
#[derive(Debug, Clone)]
pub struct EigenspaceReport {
    pub case: EigenspaceCase,
    /// Whether the gating condition fired anywhere on the instance.
    pub applicable: bool,
    /// Total eigenvector candidates constructed (and residual-checked).
    pub constructed: usize,
    /// How many came from the pseudoinverse machinery (ψ/φ bordered
    /// kernels) rather than a direct block kernel.
    pub machinery_vectors: usize,
    /// Largest relative residual ‖(M−λI)x‖/‖x‖ over the constructions.
    pub max_relative_residual: f64,
    pub notes: Vec<String>,
}

impl EigenspaceReport {
    fn empty(case: EigenspaceCase) -> Self {
        Self {
            case,
            applicable: false,
            constructed: 0,
            machinery_vectors: 0,
            max_relative_residual: 0.0,
            notes: Vec::new(),
        }
    }
}

const GATE_EPS: f64 = 1e-9;

struct BlockContext {
    m: CMat,
    l: CMat,
    q: usize,
    n: usize,
    j0: usize,
    coeffs: super::McoCoefficients,
    /// Eigenpairs (π, y) of P, orthonormal y.
    p_pairs: Vec<(f64, Vector)>,
}

impl BlockContext {
    fn new(inst: &SwitchedSystemMatrices, tol: &ToleranceConfig) -> Option<Self> {
        let sym_defect = (&inst.p - inst.p.transpose()).norm();
        if sym_defect > tol.residual_tol * (1.0 + inst.p.norm()) {
            return None;
        }
        let eig = inst.p.clone().symmetric_eigen();
        let mut pairs = Vec::with_capacity(inst.n);
        for (i, pi) in eig.eigenvalues.iter().enumerate() {
            pairs.push((*pi, eig.eigenvectors.column(i).into_owned()));
        }
        let m = inst.a_plus_h_ac();
        Some(Self {
            m: to_complex(&m),
            l: to_complex(&inst.l),
            q: inst.q,
            n: inst.n,
            j0: inst.j - 1,
            coeffs: inst.coeffs,
            p_pairs: pairs,
        })
    }

    fn rho(&self, pi: f64, lambda: C64) -> C64 {
        let c = &self.coeffs;
        C64::new(pi, 0.0) * (c.mu / lambda + C64::new(c.mu * c.h + c.eta, 0.0))
    }

    fn sigma(&self, pi: f64, lambda: C64) -> C64 {
        let c = &self.coeffs;
        (pi * c.kappa * (C64::new(1.0, 0.0) + lambda * c.h) + lambda * lambda) / lambda
    }

    fn tau(&self, pi: f64, lambda: C64) -> C64 {
        let c = &self.coeffs;
        let kappa = C64::new(c.kappa, 0.0);
        kappa * kappa * pi * (C64::new(1.0, 0.0) + lambda * c.h)
            / (lambda * (lambda + kappa))
    }

    fn x1_scale(&self, lambda: C64) -> C64 {
        (C64::new(1.0, 0.0) + lambda * self.coeffs.h) / lambda
    }

    /// Assemble [x1_scale·(b⊗y); b⊗y; c·y] and return its relative residual.
    fn residual(&self, lambda: C64, b: &CVector, y: &Vector, c: C64, x1_scale: C64) -> Option<f64> {
        let (n, q) = (self.n, self.q);
        let dim = 2 * n * q + n;
        let mut x = CVector::zeros(dim);
        for a in 0..q {
            for r in 0..n {
                let v = b[a] * y[r];
                x[a * n + r] = x1_scale * v;
                x[n * q + a * n + r] = v;
            }
        }
        for r in 0..n {
            x[2 * n * q + r] = c * y[r];
        }
        let norm = x.norm();
        if norm < 1e-12 {
            return None;
        }
        let mut mx = &self.m * &x;
        for i in 0..dim {
            mx[i] -= lambda * x[i];
        }
        Some(mx.norm() / norm)
    }

    fn record(
        &self,
        report: &mut EigenspaceReport,
        lambda: C64,
        b: &CVector,
        y: &Vector,
        c: C64,
        x1_scale: C64,
        machinery: bool,
    ) {
        if let Some(res) = self.residual(lambda, b, y, c, x1_scale) {
            report.constructed += 1;
            if machinery {
                report.machinery_vectors += 1;
            }
            if res > report.max_relative_residual {
                report.max_relative_residual = res;
            }
        }
    }
}

fn c_ones(q: usize) -> CVector {
    CVector::from_element(q, C64::new(1.0, 0.0))
}

fn c_unit(q: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(q);
    v[i] = C64::new(1.0, 0.0);
    v
}

fn quad_roots(b: C64, c: C64) -> [C64; 2] {
    let disc = b * b - C64::new(4.0, 0.0) * c;
    let s = disc.sqrt();
    [(-b + s) / 2.0, (-b - s) / 2.0]
}

fn c_svd(m: &CMat) -> Result<(CMat, Vector, CMat)> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.ok_or(crate::Error::SvdFailed)?;
    let v_t = svd.v_t.ok_or(crate::Error::SvdFailed)?;
    Ok((u, svd.singular_values, v_t))
}

/// Complex Moore–Penrose pseudoinverse, Newton–Schulz polished (see
/// linalg::pinv for why the decomposition alone is not enough).
fn cpinv(m: &CMat) -> Result<CMat> {
    let (u, s, v_t) = c_svd(m)?;
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = m.nrows().max(m.ncols()) as f64 * smax * 1e-13;
    let k = s.len();
    let mut sinv = CMat::zeros(k, k);
    for i in 0..k {
        if s[i] > cutoff {
            sinv[(i, i)] = C64::new(1.0 / s[i], 0.0);
        }
    }
    let mut x = v_t.adjoint() * sinv * u.adjoint();
    let two_id = CMat::identity(m.nrows(), m.nrows()).map(|z| z * 2.0);
    for _ in 0..2 {
        x = &x * (&two_id - m * &x);
    }
    Ok(x)
}

/// Orthonormal kernel basis of a complex matrix at a relative cutoff.
fn c_kernel(m: &CMat, rel: f64) -> Result<Vec<CVector>> {
    let cols = m.ncols();
    let work = if m.nrows() < cols {
        let mut padded = CMat::zeros(cols, cols);
        padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let (_, s, v_t) = c_svd(&work)?;
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = rel * smax.max(1.0);
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
    for i in order {
        if s[i] <= cutoff {
            out.push(v_t.row(i).transpose().map(|z| z.conj()));
        }
    }
    Ok(out)
}

fn is_singular(m: &CMat) -> Result<bool> {
    let s = m.clone().svd(false, false).singular_values;
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(smin <= 1e-8 * smax.max(1.0))
}

/// The branch-selected pseudoinverse vector ψ of the bordered system
/// [F; χ·g_jᵀ]: ψ = (χg_jᵀ(I − F⁺F))⁺ when that row is nonzero, else
/// ψ = χ(1 + |χ|²·g_jᵀ(FᴴF)⁺g_j)⁻¹·(FᴴF)⁺g_j.
#[cfg_attr(not(test), allow(dead_code))]
fn bordered_psi(f: &CMat, chi: C64, j0: usize) -> Result<CVector> {
    let q = f.ncols();
    let fp = cpinv(f)?;
    let gj = c_unit(q, j0);
    let deflect = &gj - &fp * (f * &gj);
    if (chi * C64::new(deflect.norm(), 0.0)).norm() > 1e-10 * (1.0 + gj.norm()) {
        // Row vector r with r_i = χ·conj(deflect_i); ψ = rᴴ/(r·rᴴ).
        let denom = chi * chi.conj() * deflect.norm_squared();
        Ok(deflect.map(|z| chi.conj() * z / denom))
    } else {
        let fhf = f.adjoint() * f;
        let core = cpinv(&fhf)? * &gj;
        let denom = C64::new(1.0, 0.0) + C64::new(chi.norm_sqr(), 0.0) * gj.dotc(&core);
        Ok(core.map(|z| chi * z / denom))
    }
}

/// Kernel family of the bordered system [F; χ·g_jᵀ] b = 0 through the
/// stacked pseudoinverse: b_l = (I − S⁺S)·g_l. Every returned b satisfies
/// F b = 0 and b_j = 0 (for χ ≠ 0).
fn bordered_machinery_vectors(f: &CMat, chi: C64, j0: usize) -> Result<Vec<CVector>> {
    let q = f.ncols();
    let mut s = CMat::zeros(q + 1, q);
    s.view_mut((0, 0), (q, q)).copy_from(f);
    s[(q, j0)] = chi;
    let sp = cpinv(&s)?;
    let proj = &sp * &s;
    let scale = s
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let mut out = Vec::new();
    for l in 0..q {
        let gl = c_unit(q, l);
        let b = &gl - &proj * &gl;
        // When the bordered kernel is empty but S is ill-conditioned, the
        // projector residue leaves junk; keep only certified kernel
        // vectors.
        if b.norm() > 1e-9 && (&s * &b).norm() <= 1e-8 * scale * b.norm() {
            out.push(b);
        }
    }
    Ok(out)
}

/// λ₁,₂-style roots for the P-eigenvalue π.
fn lambda12(coeffs: &super::McoCoefficients, pi: f64) -> [C64; 2] {
    quad_roots(
        C64::new(coeffs.kappa * (1.0 + pi * coeffs.h), 0.0),
        C64::new(coeffs.kappa * pi, 0.0),
    )
}

/// λ₅,₆-style roots for the P-eigenvalue π.
fn lambda56(coeffs: &super::McoCoefficients, pi: f64) -> [C64; 2] {
    quad_roots(
        C64::new(pi * coeffs.kappa * coeffs.h, 0.0),
        C64::new(pi * coeffs.kappa, 0.0),
    )
}

fn lambda_usable(lambda: C64, kappa: f64) -> bool {
    lambda.norm() > GATE_EPS && (lambda + C64::new(kappa, 0.0)).norm() > GATE_EPS
}

/// Construct and residual-check the eigenvectors a case claims, wherever
/// its gating condition holds on this instance. A report with
/// `applicable: false` means the gate never fired (not an error).
pub fn verify_eigenspace_case(
    inst: &SwitchedSystemMatrices,
    case: EigenspaceCase,
    tol: &ToleranceConfig,
) -> Result<EigenspaceReport> {
    let mut report = EigenspaceReport::empty(case);
    let Some(ctx) = BlockContext::new(inst, tol) else {
        report
            .notes
            .push("P is not symmetric; eigenbasis construction skipped".into());
        return Ok(report);
    };
    let c = inst.coeffs;
    match case {
        EigenspaceCase::Ii => {
            if c.kappa == 0.0 {
                return Ok(report);
            }
            for (pi, y) in &ctx.p_pairs {
                if pi.abs() < GATE_EPS {
                    continue;
                }
                for lambda in lambda12(&c, *pi) {
                    if !lambda_usable(lambda, c.kappa) {
                        continue;
                    }
                    let f = ctx.l.map(|z| z * ctx.rho(*pi, lambda))
                        - CMat::identity(ctx.q, ctx.q).map(|z| z * c.kappa);
                    if is_singular(&f)? {
                        continue; // case iii territory
                    }
                    report.applicable = true;
                    let b = c_ones(ctx.q);
                    let x3 = C64::new(-1.0 / pi, 0.0);
                    ctx.record(&mut report, lambda, &b, y, x3, ctx.x1_scale(lambda), false);
                }
            }
        }
        EigenspaceCase::Iii => {
            if c.kappa == 0.0 || (c.kappa * c.h - 1.0).abs() <= GATE_EPS {
                return Ok(report);
            }
            for (pi, y) in &ctx.p_pairs {
                if pi.abs() < GATE_EPS {
                    continue;
                }
                for lambda in lambda12(&c, *pi) {
                    if !lambda_usable(lambda, c.kappa) {
                        continue;
                    }
                    let g = ctx.l.map(|z| z * ctx.rho(*pi, lambda))
                        - CMat::identity(ctx.q, ctx.q).map(|z| z * c.kappa);
                    if !is_singular(&g)? {
                        continue;
                    }
                    report.applicable = true;
                    // w₀ family: b = 1, x₃ = −y/π.
                    ctx.record(
                        &mut report,
                        lambda,
                        &c_ones(ctx.q),
                        y,
                        C64::new(-1.0 / pi, 0.0),
                        ctx.x1_scale(lambda),
                        false,
                    );
                    // Bordered kernel of [G; g_jᵀ] through the ψ machinery.
                    for b in bordered_machinery_vectors(&g, C64::new(c.kappa, 0.0), ctx.j0)? {
                        ctx.record(
                            &mut report,
                            lambda,
                            &b,
                            y,
                            C64::new(0.0, 0.0),
                            ctx.x1_scale(lambda),
                            true,
                        );
                    }
                }
            }
        }
        EigenspaceCase::Iv | EigenspaceCase::V => {
            let nus: Vec<C64> = if case == EigenspaceCase::Iv {
                crate::linalg::complex_eigenvalues(&(-inst.l.clone()))?
                    .into_iter()
                    .filter(|nu| nu.norm() > 1e-9 * spectral_norm(&inst.l).max(1.0))
                    .collect()
            } else {
                Vec::new()
            };
            for (pi, y) in &ctx.p_pairs {
                if pi.abs() < GATE_EPS {
                    continue;
                }
                let lambdas: Vec<C64> = if case == EigenspaceCase::Iv {
                    let mut ls = Vec::new();
                    for &nu in &nus {
                        let b = C64::new(pi * c.kappa * c.h, 0.0)
                            - C64::new(*pi, 0.0) * nu * (c.eta + c.mu * c.h);
                        let cc = C64::new(pi * c.kappa, 0.0) - C64::new(*pi, 0.0) * nu * c.mu;
                        ls.extend(quad_roots(b, cc));
                    }
                    ls
                } else {
                    lambda56(&c, *pi).to_vec()
                };
                for lambda in lambdas {
                    if !lambda_usable(lambda, c.kappa) {
                        continue;
                    }
                    let rho = ctx.rho(*pi, lambda);
                    if rho.norm() <= GATE_EPS {
                        continue;
                    }
                    let sigma = ctx.sigma(*pi, lambda);
                    if case == EigenspaceCase::Iv && sigma.norm() <= GATE_EPS {
                        continue; // κ/λ + λ + κh = 0 belongs to case v
                    }
                    let f = ctx.l.map(|z| z * rho) + CMat::identity(ctx.q, ctx.q).map(|z| z * sigma);
                    if !is_singular(&f)? {
                        continue;
                    }
                    let before = report.constructed;
                    let tau = if c.kappa > 0.0 {
                        ctx.tau(*pi, lambda)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                    // Full block family: b ∈ ker(F − τ·1g_jᵀ), with
                    // c = τ·b_j/(κπ).
                    let mut bordered = f.clone();
                    for r in 0..ctx.q {
                        bordered[(r, ctx.j0)] -= tau;
                    }
                    let scale = bordered
                        .clone()
                        .svd(false, false)
                        .singular_values
                        .iter()
                        .cloned()
                        .fold(0.0_f64, f64::max)
                        .max(1.0);
                    for b in c_kernel(&bordered, 1e-10)? {
                        if (&bordered * &b).norm() > 1e-8 * scale * b.norm() {
                            continue;
                        }
                        let x3 = if c.kappa > 0.0 {
                            tau * b[ctx.j0] / C64::new(c.kappa * pi, 0.0)
                        } else {
                            C64::new(0.0, 0.0)
                        };
                        ctx.record(&mut report, lambda, &b, y, x3, ctx.x1_scale(lambda), false);
                    }
                    // Paper machinery sub-family (b_j = 0 slice), when nonzero.
                    if tau.norm() > GATE_EPS {
                        for b in bordered_machinery_vectors(&f, tau, ctx.j0)? {
                            ctx.record(
                                &mut report,
                                lambda,
                                &b,
                                y,
                                C64::new(0.0, 0.0),
                                ctx.x1_scale(lambda),
                                true,
                            );
                        }
                    }
                    // The case fires only when λ is actually realized by a
                    // nontrivial block solution.
                    if report.constructed > before {
                        report.applicable = true;
                    }
                }
            }
        }
        EigenspaceCase::Vi => {
            if c.mu != 0.0 || c.eta != 0.0 || c.kappa == 0.0 {
                return Ok(report);
            }
            for (pi, y) in &ctx.p_pairs {
                if pi.abs() < GATE_EPS {
                    continue;
                }
                for lambda in lambda56(&c, *pi) {
                    if !lambda_usable(lambda, c.kappa) {
                        continue;
                    }
                    report.applicable = true;
                    for l in 0..ctx.q {
                        if l == ctx.j0 {
                            continue;
                        }
                        let b = c_unit(ctx.q, l); // g_l − (g_jᵀg_l)g_j with l ≠ j
                        ctx.record(
                            &mut report,
                            lambda,
                            &b,
                            y,
                            C64::new(0.0, 0.0),
                            ctx.x1_scale(lambda),
                            false,
                        );
                    }
                }
            }
        }
        EigenspaceCase::Vii => {
            if c.kappa == 0.0 || (c.kappa * c.h - 1.0).abs() > GATE_EPS {
                return Ok(report);
            }
            let lambda = C64::new(-c.kappa, 0.0);
            for (pi, y) in &ctx.p_pairs {
                let k_mat = ctx.l.map(|z| z * C64::new(c.eta * pi, 0.0))
                    - CMat::identity(ctx.q, ctx.q).map(|z| z * c.kappa);
                if !is_singular(&k_mat)? {
                    continue;
                }
                report.applicable = true;
                // x₁ = 0 here: 1 + hλ = 1 − hκ = 0.
                for b in c_kernel(&k_mat, 1e-10)? {
                    ctx.record(&mut report, lambda, &b, y, C64::new(0.0, 0.0), C64::new(0.0, 0.0), false);
                }
                // One affine representative with c ≠ 0 when the system is consistent.
                let rhs = c_ones(ctx.q).map(|z| z * c.kappa * *pi);
                let b = cpinv(&k_mat)? * &rhs;
                if (&k_mat * &b - &rhs).norm() <= 1e-8 * (1.0 + rhs.norm()) {
                    ctx.record(&mut report, lambda, &b, y, C64::new(1.0, 0.0), C64::new(0.0, 0.0), false);
                }
            }
        }
        EigenspaceCase::Viii => {
            let gate = c.mu == 0.0
                && c.eta == 0.0
                && c.kappa > 0.0
                && (c.h - 1.0 - 1.0 / c.kappa).abs() <= GATE_EPS;
            if !gate {
                return Ok(report);
            }
            let lambda = C64::new(-c.kappa, 0.0);
            for (pi, y) in &ctx.p_pairs {
                if (pi - 1.0).abs() > 1e-8 {
                    continue; // only π = 1 blocks carry this eigenvalue
                }
                report.applicable = true;
                for l in 0..ctx.q {
                    if l == ctx.j0 {
                        continue;
                    }
                    let b = c_unit(ctx.q, l);
                    // x₁ = x₂: (1+hλ)/λ = 1 at h = 1 + 1/κ, λ = −κ.
                    ctx.record(&mut report, lambda, &b, y, C64::new(0.0, 0.0), C64::new(1.0, 0.0), false);
                }
            }
        }
        EigenspaceCase::Ix => {
            let gate = c.kappa > 0.0
                && (c.h - 1.0 - 1.0 / c.kappa).abs() <= GATE_EPS
                && (c.mu + c.eta) > 0.0;
            if !gate {
                return Ok(report);
            }
            let lambda = C64::new(-c.kappa, 0.0);
            // β-family omitted: L b = c·1 with c ≠ 0 requires 1 ∈ ran(L),
            // impossible for a digraph Laplacian (its left kernel contains a
            // nonnegative vector with positive sum). The γ family survives.
            let vectors = bordered_machinery_vectors(&ctx.l, C64::new(1.0, 0.0), ctx.j0)?;
            for (pi, y) in &ctx.p_pairs {
                if (pi - 1.0).abs() > 1e-8 {
                    continue;
                }
                for b in &vectors {
                    report.applicable = true;
                    ctx.record(&mut report, lambda, b, y, C64::new(0.0, 0.0), C64::new(1.0, 0.0), true);
                }
            }
        }
        EigenspaceCase::X => {
            if c.kappa == 0.0 || (c.kappa * c.h - 1.0).abs() <= GATE_EPS {
                return Ok(report);
            }
            let lambda = C64::new(-c.kappa, 0.0);
            let x1_scale = C64::new((c.kappa * c.h - 1.0) / c.kappa, 0.0);
            for (pi, y) in &ctx.p_pairs {
                if pi.abs() < GATE_EPS {
                    continue;
                }
                let rho = C64::new(pi * ((c.mu / c.kappa) * (c.kappa * c.h - 1.0) + c.eta), 0.0);
                let sigma = C64::new(pi * (c.kappa * c.h - 1.0) - c.kappa, 0.0);
                let m_mat = ctx.l.map(|z| z * rho) + CMat::identity(ctx.q, ctx.q).map(|z| z * sigma);
                if !is_singular(&m_mat)? {
                    continue;
                }
                for b in bordered_machinery_vectors(&m_mat, C64::new(1.0, 0.0), ctx.j0)? {
                    report.applicable = true;
                    ctx.record(&mut report, lambda, &b, y, C64::new(0.0, 0.0), x1_scale, true);
                }
            }
        }
    }
    Ok(report)
}
