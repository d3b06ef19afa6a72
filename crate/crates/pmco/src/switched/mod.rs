//! Switched-system matrices for one optimizer iteration and the verifiers
//! for the closed-form claims about them.
//!
//! One iteration of the theorem-mode dynamics on the stacked state
//! Z = [x_1..x_q; v_1..v_q; p] is the linear map I + h·A^[j] + h²·A_c
//! (or I + B^[j] + h²·A_c on the best-jump branch). The builders here
//! assemble A^[j], A_c, and B^[j] block-exactly; the rest of the module
//! predicts their ranks, kernels, and spectra in closed form and checks
//! every prediction against the SVD/eigensolver oracles.

mod eigenspace;
mod spectrum;
mod theorem;

pub use eigenspace::{verify_eigenspace_case, EigenspaceCase, EigenspaceReport};
pub use spectrum::{
    containment_check, predicted_spectrum_a, predicted_spectrum_b, ContainmentReport,
    SpectrumCase, SpectrumPrediction,
};
pub use theorem::{check_theorem_conditions, transition_matrices_semistable, ConditionReport};

use serde::{Deserialize, Serialize};

use crate::linalg::{kron, null_space, ones, subspace_equal, unit_vector, Mat, Subspace, Vector};
use crate::semistability::is_semisimple_zero;
use crate::{Error, Result, ToleranceConfig};

/// Per-iteration coefficient draw (μ, η, κ, h).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McoCoefficients {
    pub mu: f64,
    pub eta: f64,
    pub kappa: f64,
    pub h: f64,
}

impl McoCoefficients {
    pub fn new(mu: f64, eta: f64, kappa: f64, h: f64) -> Result<Self> {
        let c = Self { mu, eta, kappa, h };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.mu, self.eta, self.kappa, self.h];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("coefficients"));
        }
        if self.mu < 0.0 || self.eta < 0.0 || self.kappa < 0.0 {
            return Err(Error::InvalidConfig("mu, eta, kappa must be nonnegative".into()));
        }
        if self.h <= 0.0 {
            return Err(Error::InvalidConfig("h must be strictly positive".into()));
        }
        Ok(())
    }
}

fn check_instance_dims(j: usize, l: &Mat, p: &Mat) -> Result<(usize, usize)> {
    let q = l.nrows();
    let n = p.nrows();
    if l.ncols() != q || q < 2 {
        return Err(Error::DimensionMismatch(format!(
            "Laplacian must be square with q >= 2, got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    if p.ncols() != n || n == 0 {
        return Err(Error::DimensionMismatch(format!(
            "P must be square and nonempty, got {}x{}",
            p.nrows(),
            p.ncols()
        )));
    }
    if j == 0 || j > q {
        return Err(Error::IndexOutOfRange(format!("j = {j} not in 1..={q}")));
    }
    Ok((n, q))
}

/// E^[j]: n × nq block row with I_n in the j-th block (j is 1-based).
pub fn build_e(j: usize, n: usize, q: usize) -> Result<Mat> {
    if j == 0 || j > q {
        return Err(Error::IndexOutOfRange(format!("j = {j} not in 1..={q}")));
    }
    let mut e = Mat::zeros(n, n * q);
    for i in 0..n {
        e[(i, (j - 1) * n + i)] = 1.0;
    }
    Ok(e)
}

/// W^[j] = (1_{q×1} ⊗ P)·E^[j]: P repeated down the j-th block column.
pub fn build_w(j: usize, p: &Mat, q: usize) -> Result<Mat> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::DimensionMismatch("W builder needs square P".into()));
    }
    let stacked = kron(&Mat::from_element(q, 1, 1.0), p)?;
    Ok(stacked * build_e(j, n, q)?)
}

/// The (2nq+n)-square iteration matrix A^[j].
pub fn build_a(j: usize, coeffs: &McoCoefficients, l: &Mat, p: &Mat) -> Result<Mat> {
    let (n, q) = check_instance_dims(j, l, p)?;
    crate::linalg::ensure_finite(l, "Laplacian")?;
    crate::linalg::ensure_finite(p, "P")?;
    let nq = n * q;
    let id_q = Mat::identity(q, q);
    let mut a = Mat::zeros(2 * nq + n, 2 * nq + n);
    a.view_mut((0, nq), (nq, nq)).copy_from(&Mat::identity(nq, nq));
    let middle_left = -coeffs.mu * kron(l, p)? - coeffs.kappa * kron(&id_q, p)?;
    a.view_mut((nq, 0), (nq, nq)).copy_from(&middle_left);
    let middle_mid = -coeffs.eta * kron(l, p)?;
    a.view_mut((nq, nq), (nq, nq)).copy_from(&middle_mid);
    let middle_right = coeffs.kappa * kron(&Mat::from_element(q, 1, 1.0), p)?;
    a.view_mut((nq, 2 * nq), (nq, n)).copy_from(&middle_right);
    let e = build_e(j, n, q)?;
    a.view_mut((2 * nq, 0), (n, nq)).copy_from(&(coeffs.kappa * &e));
    a.view_mut((2 * nq, 2 * nq), (n, n))
        .copy_from(&(-coeffs.kappa * Mat::identity(n, n)));
    Ok(a)
}

/// A_c: the row-addition companion, nonzero only in its first block row,
/// which equals the middle block row of A^[j].
pub fn build_ac(coeffs: &McoCoefficients, l: &Mat, p: &Mat) -> Result<Mat> {
    let (n, q) = check_instance_dims(1, l, p)?;
    let nq = n * q;
    let a = build_a(1, coeffs, l, p)?;
    let mut ac = Mat::zeros(2 * nq + n, 2 * nq + n);
    ac.view_mut((0, 0), (nq, 2 * nq + n))
        .copy_from(&a.view((nq, 0), (nq, 2 * nq + n)).into_owned());
    Ok(ac)
}

/// B^[j]: the best-jump iteration matrix of the switched model.
pub fn build_b(j: usize, coeffs: &McoCoefficients, l: &Mat, p: &Mat) -> Result<Mat> {
    let (n, q) = check_instance_dims(j, l, p)?;
    let nq = n * q;
    let a = build_a(j, coeffs, l, p)?;
    let mut b = Mat::zeros(2 * nq + n, 2 * nq + n);
    b.view_mut((0, nq), (nq, nq))
        .copy_from(&(coeffs.h * Mat::identity(nq, nq)));
    b.view_mut((nq, 0), (nq, 2 * nq + n))
        .copy_from(&(coeffs.h * a.view((nq, 0), (nq, 2 * nq + n)).into_owned()));
    b.view_mut((2 * nq, 0), (n, nq)).copy_from(&build_e(j, n, q)?);
    b.view_mut((2 * nq, 2 * nq), (n, n))
        .copy_from(&(-Mat::identity(n, n)));
    Ok(b)
}

/// One iteration's worth of switched-system matrices plus their inputs.
#[derive(Debug, Clone)]
pub struct SwitchedSystemMatrices {
    pub a_j: Mat,
    pub a_c: Mat,
    pub b_j: Mat,
    pub j: usize,
    pub n: usize,
    pub q: usize,
    pub l: Mat,
    pub p: Mat,
    pub coeffs: McoCoefficients,
}

impl SwitchedSystemMatrices {
    pub fn assemble(j: usize, coeffs: McoCoefficients, l: Mat, p: Mat) -> Result<Self> {
        coeffs.validate()?;
        let (n, q) = check_instance_dims(j, &l, &p)?;
        let a_j = build_a(j, &coeffs, &l, &p)?;
        let a_c = build_ac(&coeffs, &l, &p)?;
        let b_j = build_b(j, &coeffs, &l, &p)?;
        Ok(Self {
            a_j,
            a_c,
            b_j,
            j,
            n,
            q,
            l,
            p,
            coeffs,
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.n * self.q + self.n
    }

    /// A^[j] + h·A_c.
    pub fn a_plus_h_ac(&self) -> Mat {
        &self.a_j + self.coeffs.h * &self.a_c
    }

    /// B^[j] + h²·A_c.
    pub fn b_plus_h2_ac(&self) -> Mat {
        &self.b_j + self.coeffs.h * self.coeffs.h * &self.a_c
    }

    /// I + h·A^[j] + h²·A_c: the no-jump transition matrix.
    pub fn transition_a(&self) -> Mat {
        Mat::identity(self.dim(), self.dim()) + self.coeffs.h * self.a_plus_h_ac()
    }

    /// I + B^[j] + h²·A_c: the best-jump transition matrix.
    pub fn transition_b(&self) -> Mat {
        Mat::identity(self.dim(), self.dim()) + self.b_plus_h2_ac()
    }
}

/// The four coefficient sign cases of the rank/kernel analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RankCase {
    MuZeroKappaZero,
    MuZeroKappaNonzero,
    MuNonzeroKappaNonzero,
    MuNonzeroKappaZero,
}

impl RankCase {
    pub fn of(coeffs: &McoCoefficients) -> Self {
        match (coeffs.mu == 0.0, coeffs.kappa == 0.0) {
            (true, true) => RankCase::MuZeroKappaZero,
            (true, false) => RankCase::MuZeroKappaNonzero,
            (false, false) => RankCase::MuNonzeroKappaNonzero,
            (false, true) => RankCase::MuNonzeroKappaZero,
        }
    }
}

/// Closed-form rank of A^[j] by coefficient case.
pub fn predicted_rank_a(
    coeffs: &McoCoefficients,
    rank_l: usize,
    rank_p: usize,
    n: usize,
    q: usize,
) -> usize {
    match RankCase::of(coeffs) {
        RankCase::MuZeroKappaZero => n * q,
        RankCase::MuZeroKappaNonzero | RankCase::MuNonzeroKappaNonzero => {
            2 * n * q - (q - 1) * (n - rank_p)
        }
        RankCase::MuNonzeroKappaZero => n * q + rank_l * rank_p,
    }
}

/// Orthonormal basis of ker(L) arranged so the first vector spans the
/// ones direction (which is always in the kernel). Returned unnormalized
/// companions: (ones, [w_1, ..]) with the w_l orthonormal and ⟂ ones.
pub fn laplacian_kernel_split(l: &Mat, tol: &ToleranceConfig) -> Result<Vec<Vector>> {
    let q = l.nrows();
    let kernel = null_space(l, tol)?;
    let mut basis: Vec<Vector> = vec![ones(q) / (q as f64).sqrt()];
    for col in kernel.basis().column_iter() {
        let mut v = col.into_owned();
        for b in &basis {
            let dot = b.dot(&v);
            v -= b * dot;
        }
        if v.norm() > 1e-8 {
            basis.push(v.normalize());
        }
    }
    if basis.len() != kernel.dim() {
        return Err(Error::DimensionMismatch(
            "Laplacian kernel does not contain the ones vector; not a Laplacian?".into(),
        ));
    }
    Ok(basis)
}

/// Construct the closed-form kernel of A^[j] for the active coefficient
/// case and orthonormalize it. The basis dimension always matches
/// (2nq+n) − predicted_rank_a.
pub fn predicted_kernel_a(
    coeffs: &McoCoefficients,
    l: &Mat,
    p: &Mat,
    j: usize,
    tol: &ToleranceConfig,
) -> Result<Subspace> {
    let (n, q) = check_instance_dims(j, l, p)?;
    let nq = n * q;
    let dim = 2 * nq + n;
    let j0 = j - 1;
    let mut cols: Vec<Vector> = Vec::new();
    let embed_z1 = |z1: &Vector| -> Vector {
        let mut v = Vector::zeros(dim);
        v.rows_mut(0, nq).copy_from(z1);
        v
    };
    let embed_z1_z3 = |z1: &Vector, z3: &Vector| -> Vector {
        let mut v = Vector::zeros(dim);
        v.rows_mut(0, nq).copy_from(z1);
        v.rows_mut(2 * nq, n).copy_from(z3);
        v
    };
    let kron_vec = |w: &Vector, y: &Vector| -> Vector {
        let mut out = Vector::zeros(w.len() * y.len());
        for a in 0..w.len() {
            for b in 0..y.len() {
                out[a * y.len() + b] = w[a] * y[b];
            }
        }
        out
    };

    match RankCase::of(coeffs) {
        RankCase::MuZeroKappaZero => {
            // z1 and z3 free, z2 = 0.
            for i in 0..nq {
                cols.push(embed_z1(&unit_vector(nq, i)));
            }
            for i in 0..n {
                let mut v = Vector::zeros(dim);
                v[2 * nq + i] = 1.0;
                cols.push(v);
            }
        }
        RankCase::MuZeroKappaNonzero => {
            let ker_p = null_space(p, tol)?;
            for i in 0..n {
                let z1 = kron_vec(&ones(q), &unit_vector(n, i));
                cols.push(embed_z1_z3(&z1, &unit_vector(n, i)));
            }
            // The s = j block-terms cancel in the closed form, so only s ≠ j appears.
            for s in 0..q {
                if s == j0 {
                    continue;
                }
                for r in 0..ker_p.dim() {
                    let jr = ker_p.basis().column(r).into_owned();
                    cols.push(embed_z1(&kron_vec(&unit_vector(q, s), &jr)));
                }
            }
        }
        RankCase::MuNonzeroKappaNonzero => {
            let ker_p = null_space(p, tol)?;
            let w_basis = laplacian_kernel_split(l, tol)?;
            let p_pinv = crate::linalg::pinv(p, tol)?;
            let weight = Mat::identity(n, n) - &p_pinv * p;
            for i in 0..n {
                let z1 = kron_vec(&ones(q), &unit_vector(n, i));
                cols.push(embed_z1_z3(&z1, &unit_vector(n, i)));
            }
            for w in w_basis.iter().skip(1) {
                for m in 0..n {
                    let u = &weight * unit_vector(n, m);
                    if u.norm() < 1e-14 {
                        continue;
                    }
                    let z1 = kron_vec(w, &u);
                    let z3 = w[j0] * &u;
                    cols.push(embed_z1_z3(&z1, &z3));
                }
            }
            for s in 0..q {
                for r in 0..ker_p.dim() {
                    let jr = ker_p.basis().column(r).into_owned();
                    let z1 = kron_vec(&unit_vector(q, s), &jr);
                    let z3 = if s == j0 { jr.clone() } else { Vector::zeros(n) };
                    cols.push(embed_z1_z3(&z1, &z3));
                }
            }
        }
        RankCase::MuNonzeroKappaZero => {
            let ker_p = null_space(p, tol)?;
            let w_basis = laplacian_kernel_split(l, tol)?;
            for w in &w_basis {
                for i in 0..n {
                    cols.push(embed_z1(&kron_vec(w, &unit_vector(n, i))));
                }
            }
            for s in 0..q {
                for r in 0..ker_p.dim() {
                    let jr = ker_p.basis().column(r).into_owned();
                    cols.push(embed_z1(&kron_vec(&unit_vector(q, s), &jr)));
                }
            }
            for i in 0..n {
                let mut v = Vector::zeros(dim);
                v[2 * nq + i] = 1.0;
                cols.push(v);
            }
        }
    }
    Subspace::from_spanning(dim, &cols, tol)
}

/// Both shift-invariance kernel identities:
/// ker(A) = ker(A + hA_c) and ker(A(A+hA_c)) = ker((A+hA_c)²).
pub fn kernel_shift_invariance_check(
    a_j: &Mat,
    a_c: &Mat,
    h: f64,
    tol: &ToleranceConfig,
) -> Result<bool> {
    let shifted = a_j + h * a_c;
    let first = subspace_equal(&null_space(a_j, tol)?, &null_space(&shifted, tol)?, tol)?;
    let lhs = null_space(&(a_j * &shifted), tol)?;
    let rhs = null_space(&(&shifted * &shifted), tol)?;
    Ok(first && subspace_equal(&lhs, &rhs, tol)?)
}

/// Semisimplicity dichotomy for the zero eigenvalue of A + hA_c:
/// κ = 0 forces a defective zero; κ ≠ 0 makes zero semisimple exactly
/// when P has full rank.
pub fn zero_semisimple_dichotomy_check(
    a_j: &Mat,
    a_c: &Mat,
    h: f64,
    coeffs: &McoCoefficients,
    rank_p: usize,
    n: usize,
    tol: &ToleranceConfig,
) -> Result<bool> {
    let shifted = a_j + h * a_c;
    let semisimple = is_semisimple_zero(&shifted, tol)?;
    let expected = if coeffs.kappa == 0.0 {
        false
    } else {
        rank_p == n
    };
    Ok(semisimple == expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{laplacian, random_digraph, Digraph};
    use crate::rngkey::{stream, Domain};
    use crate::semistability::random_paracontracting;
    use rand::Rng;

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn coeffs(mu: f64, eta: f64, kappa: f64, h: f64) -> McoCoefficients {
        McoCoefficients::new(mu, eta, kappa, h).unwrap()
    }

    #[test]
    fn e_matrix_shapes() {
        let e = build_e(1, 1, 2).unwrap();
        assert_eq!(e, Mat::from_row_slice(1, 2, &[1.0, 0.0]));
        let e = build_e(2, 2, 2).unwrap();
        assert_eq!(e.view((0, 2), (2, 2)).into_owned(), Mat::identity(2, 2));
        assert_eq!(e.view((0, 0), (2, 2)).into_owned(), Mat::zeros(2, 2));
    }

    #[test]
    fn e_extracts_block_from_stacked_ones() {
        // E^[j](1 ⊗ e_i) = e_i for all i, j with n, q <= 3.
        for n in 1..=3usize {
            for q in 2..=3usize {
                for j in 1..=q {
                    let e = build_e(j, n, q).unwrap();
                    for i in 0..n {
                        let v = kron(
                            &Mat::from_element(q, 1, 1.0),
                            &Mat::from_column_slice(n, 1, unit_vector(n, i).as_slice()),
                        )
                        .unwrap();
                        let out = &e * v.column(0);
                        assert_eq!(out, unit_vector(n, i));
                    }
                }
            }
        }
    }

    #[test]
    fn w_matrix_scalar_example() {
        let w = build_w(1, &Mat::from_row_slice(1, 1, &[1.0]), 2).unwrap();
        assert_eq!(w, Mat::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn w_rank_identities() {
        let t = tol();
        let mut rng = stream(3, Domain::Sweep, 10, 0);
        for trial in 0..30 {
            let n = 1 + trial % 3;
            let q = 2 + trial % 2;
            let full = rng.gen::<bool>() || n == 1;
            let p = random_paracontracting(n, 0.1, 0.9, if full { 1 } else { 0 }, false, &mut rng);
            let p = if full {
                p
            } else {
                // Knock an eigenvalue to zero for a rank-deficient sample.
                let mut d = p.clone().symmetric_eigen();
                d.eigenvalues[0] = 0.0;
                d.recompose()
            };
            let rp = crate::linalg::numerical_rank(&p, &t).unwrap();
            for j in 1..=q {
                let w = build_w(j, &p, q).unwrap();
                assert_eq!(crate::linalg::numerical_rank(&w, &t).unwrap(), rp);
                let iqp = kron(&Mat::identity(q, q), &p).unwrap();
                let diff = &iqp - &w;
                assert_eq!(
                    crate::linalg::numerical_rank(&diff, &t).unwrap(),
                    (q - 1) * rp
                );
            }
        }
    }

    #[test]
    fn a_collapses_without_coefficients() {
        let l = laplacian(&Digraph::complete(2).unwrap());
        let p = Mat::identity(1, 1);
        let a = build_a(1, &coeffs(0.0, 0.0, 0.0, 1.0), &l, &p).unwrap();
        let mut expected = Mat::zeros(5, 5);
        expected.view_mut((0, 2), (2, 2)).copy_from(&Mat::identity(2, 2));
        assert_eq!(a, expected);
    }

    #[test]
    fn a_hand_assembled_5x5() {
        // n=1, q=2, P=[1], L=[[1,-1],[-1,1]], mu=eta=0, kappa=1.
        let l = Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let p = Mat::identity(1, 1);
        let a = build_a(1, &coeffs(0.0, 0.0, 1.0, 1.0), &l, &p).unwrap();
        #[rustfmt::skip]
        let expected = Mat::from_row_slice(5, 5, &[
            0.0, 0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0, 0.0,
            -1.0, 0.0, 0.0, 0.0, 1.0,
            0.0, -1.0, 0.0, 0.0, 1.0,
            1.0, 0.0, 0.0, 0.0, -1.0,
        ]);
        assert_eq!(a, expected);
    }

    #[test]
    fn ac_first_row_matches_a_middle_row() {
        let mut rng = stream(5, Domain::Sweep, 11, 0);
        let l = laplacian(&random_digraph(3, 0.5, &mut rng).unwrap());
        let p = random_paracontracting(2, 0.1, 0.9, 1, false, &mut rng);
        let c = coeffs(0.3, 0.5, 0.8, 0.4);
        let a = build_a(2, &c, &l, &p).unwrap();
        let ac = build_ac(&c, &l, &p).unwrap();
        let nq = 6;
        assert_eq!(
            ac.view((0, 0), (nq, 2 * nq + 2)).into_owned(),
            a.view((nq, 0), (nq, 2 * nq + 2)).into_owned()
        );
        assert_eq!(ac.view((nq, 0), (nq + 2, 2 * nq + 2)).into_owned(), Mat::zeros(nq + 2, 2 * nq + 2));
    }

    #[test]
    fn b_blocks_at_unit_h() {
        let l = Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        let p = Mat::identity(1, 1);
        let b = build_b(1, &coeffs(0.0, 0.0, 0.0, 1.0), &l, &p).unwrap();
        assert_eq!(b.view((0, 2), (2, 2)).into_owned(), Mat::identity(2, 2));
        assert_eq!(b.view((4, 0), (1, 2)).into_owned(), Mat::from_row_slice(1, 2, &[1.0, 0.0]));
        assert_eq!(b[(4, 4)], -1.0);
    }

    #[test]
    fn b_vs_a_structural_diff() {
        // B's middle row is h times A's; B's bottom row drops the kappa scaling.
        let mut rng = stream(5, Domain::Sweep, 12, 0);
        let l = laplacian(&random_digraph(3, 0.5, &mut rng).unwrap());
        let p = random_paracontracting(2, 0.1, 0.9, 1, false, &mut rng);
        let c = coeffs(0.2, 0.7, 0.5, 1.3);
        let a = build_a(2, &c, &l, &p).unwrap();
        let b = build_b(2, &c, &l, &p).unwrap();
        let nq = 6;
        let dim = 2 * nq + 2;
        assert_eq!(
            b.view((nq, 0), (nq, dim)).into_owned(),
            c.h * a.view((nq, 0), (nq, dim)).into_owned()
        );
        let e = build_e(2, 2, 3).unwrap();
        assert_eq!(b.view((2 * nq, 0), (2, nq)).into_owned(), e);
    }

    #[test]
    fn predicted_rank_examples() {
        assert_eq!(predicted_rank_a(&coeffs(0.0, 0.3, 0.0, 1.0), 2, 2, 2, 3), 6);
        assert_eq!(predicted_rank_a(&coeffs(0.0, 0.3, 0.5, 1.0), 2, 2, 2, 3), 12);
        assert_eq!(predicted_rank_a(&coeffs(0.4, 0.3, 0.0, 1.0), 2, 2, 2, 3), 10);
    }

    #[test]
    fn rank_and_kernel_agree_on_random_instances() {
        let t = tol();
        let mut rng = stream(17, Domain::Sweep, 13, 0);
        for trial in 0..60u64 {
            let n = 1 + (trial as usize) % 3;
            let q = 2 + (trial as usize) % 3;
            let case = trial % 4;
            let mu = if case == 0 || case == 1 { 0.0 } else { rng.gen_range(0.1..1.0) };
            let kappa = if case == 0 || case == 3 { 0.0 } else { rng.gen_range(0.1..1.0) };
            let eta = if rng.gen::<bool>() { rng.gen_range(0.1..1.0) } else { 0.0 };
            let c = coeffs(mu, eta, kappa, 1.0);
            let full = rng.gen::<bool>() || n == 1;
            let mut p = random_paracontracting(n, 0.1, 0.9, 1, false, &mut rng);
            if !full && n > 1 {
                let mut d = p.clone().symmetric_eigen();
                d.eigenvalues[0] = 0.0;
                p = d.recompose();
            }
            let l = laplacian(&random_digraph(q, 0.4, &mut rng).unwrap());
            let rp = crate::linalg::numerical_rank(&p, &t).unwrap();
            let rl = crate::linalg::numerical_rank(&l, &t).unwrap();
            let j = 1 + (trial as usize) % q;
            let a = build_a(j, &c, &l, &p).unwrap();
            let ra = crate::linalg::numerical_rank(&a, &t).unwrap();
            assert_eq!(ra, predicted_rank_a(&c, rl, rp, n, q), "case {case} n={n} q={q}");

            let predicted = predicted_kernel_a(&c, &l, &p, j, &t).unwrap();
            let actual = null_space(&a, &t).unwrap();
            assert_eq!(predicted.dim(), actual.dim());
            for col in predicted.basis().column_iter() {
                let v = col.into_owned();
                assert!((&a * &v).norm() <= 1e-10 * v.norm().max(1.0));
            }
            if RankCase::of(&c) != RankCase::MuNonzeroKappaNonzero {
                assert!(subspace_equal(&predicted, &actual, &t).unwrap());
            }
        }
    }

    #[test]
    fn shift_invariance_and_dichotomy() {
        let t = tol();
        let mut rng = stream(23, Domain::Sweep, 14, 0);
        for trial in 0..24u64 {
            let n = 1 + (trial as usize) % 3;
            let q = 2 + (trial as usize) % 3;
            let case = trial % 4;
            let mu = if case == 0 || case == 1 { 0.0 } else { rng.gen_range(0.1..1.0) };
            let kappa = if case == 0 || case == 3 { 0.0 } else { rng.gen_range(0.1..1.0) };
            let eta = rng.gen_range(0.0..1.0);
            let c = coeffs(mu, eta, kappa, 1.0);
            let full = rng.gen::<bool>() || n == 1;
            let mut p = random_paracontracting(n, 0.1, 0.9, 1, false, &mut rng);
            if !full && n > 1 {
                let mut d = p.clone().symmetric_eigen();
                d.eigenvalues[0] = 0.0;
                p = d.recompose();
            }
            let l = laplacian(&random_digraph(q, 0.4, &mut rng).unwrap());
            let j = 1 + (trial as usize) % q;
            let a = build_a(j, &c, &l, &p).unwrap();
            let ac = build_ac(&c, &l, &p).unwrap();
            for h in [0.0, 0.3, 1.0, 2.5] {
                assert!(kernel_shift_invariance_check(&a, &ac, h, &t).unwrap());
            }
            let rp = crate::linalg::numerical_rank(&p, &t).unwrap();
            assert!(zero_semisimple_dichotomy_check(&a, &ac, 0.7, &c, rp, n, &t).unwrap());
        }
    }
}
