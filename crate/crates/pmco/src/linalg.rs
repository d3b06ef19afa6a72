//! Dense real/complex kernels and subspace algebra.
//!
//! Everything here is the *oracle* side of the crate: SVD-based rank,
//! null space, pseudoinverse, the eigensolver, and an orthonormal-basis
//! subspace type with sum/intersection/equality. The switched-system
//! verifiers check every closed-form claim against these routines, so
//! none of the closed forms are allowed to leak into this module.

use nalgebra::{Complex, DMatrix, DVector};

use crate::{Error, Result, ToleranceConfig};

pub type Mat = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) fn ensure_finite(m: &Mat, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &Mat, b: &Mat) -> Result<Mat> {
    ensure_finite(a, "kron lhs")?;
    ensure_finite(b, "kron rhs")?;
    Ok(a.kronecker(b))
}

/// i-th standard basis vector of R^n (0-based index).
pub fn unit_vector(n: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(n);
    e[i] = 1.0;
    e
}

/// Column vector of ones.
pub fn ones(n: usize) -> Vector {
    Vector::from_element(n, 1.0)
}

fn svd_sorted(a: &Mat) -> Result<(Mat, Vector, Mat)> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.ok_or(Error::SvdFailed)?;
    let v_t = svd.v_t.ok_or(Error::SvdFailed)?;
    Ok((u, svd.singular_values, v_t))
}

fn rank_from_singular_values(s: &Vector, rows: usize, cols: usize, tol: &ToleranceConfig) -> usize {
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    if smax == 0.0 {
        return 0;
    }
    let cutoff = rows.max(cols) as f64 * smax * tol.rank_rel_tol;
    s.iter().filter(|&&x| x > cutoff).count()
}

/// Numerical rank: singular values above max(rows, cols)·σ_max·rank_rel_tol.
pub fn numerical_rank(a: &Mat, tol: &ToleranceConfig) -> Result<usize> {
    ensure_finite(a, "numerical_rank input")?;
    let s = a.clone().singular_values();
    Ok(rank_from_singular_values(&s, a.nrows(), a.ncols(), tol))
}

/// Orthonormal basis of ker(a). The dimension is cols − numerical_rank.
///
/// The basis comes from the kernel projector I − A⁺A built on the
/// polished pseudoinverse, because the iterative SVD's trailing singular
/// vectors can carry ~1e-6 of row-space contamination.
pub fn null_space(a: &Mat, tol: &ToleranceConfig) -> Result<Subspace> {
    ensure_finite(a, "null_space input")?;
    let cols = a.ncols();
    let rank = numerical_rank(a, tol)?;
    let dim = cols - rank;
    if dim == 0 {
        return Ok(Subspace::trivial(cols));
    }
    if rank == 0 {
        return Ok(Subspace::full(cols));
    }
    let ap = pinv(a, tol)?;
    let proj = Mat::identity(cols, cols) - ap * a;
    let (u, _, _) = svd_sorted(&proj)?;
    Ok(Subspace::from_orthonormal(cols, u.columns(0, dim).into()))
}

/// Moore–Penrose pseudoinverse via SVD, polished with two Newton–Schulz
/// steps (X ← X(2I − AX)). The polish squares the singular-vector error
/// of the decomposition, which the iterative SVD can leave as large as
/// ~1e-6; after polishing the four Penrose identities hold to near
/// machine precision.
pub fn pinv(a: &Mat, tol: &ToleranceConfig) -> Result<Mat> {
    ensure_finite(a, "pinv input")?;
    let (u, s, v_t) = svd_sorted(a)?;
    let smax = s.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = a.nrows().max(a.ncols()) as f64 * smax * tol.rank_rel_tol;
    let k = s.len();
    let mut sinv = Mat::zeros(k, k);
    for i in 0..k {
        if s[i] > cutoff {
            sinv[(i, i)] = 1.0 / s[i];
        }
    }
    let mut x = v_t.transpose() * sinv * u.transpose();
    let id = Mat::identity(a.nrows(), a.nrows());
    for _ in 0..2 {
        x = &x * (2.0 * &id - a * &x);
    }
    Ok(x)
}

/// Largest singular value.
pub fn spectral_norm(a: &Mat) -> f64 {
    a.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn to_complex(a: &Mat) -> CMat {
    a.map(|x| C64::new(x, 0.0))
}

/// Full complex spectrum (with algebraic multiplicity) via the real Schur form.
///
/// The QR iteration is capped; matrices with exactly repeated structure can
/// stall it, in which case a relative perturbation of a few ulps is applied
/// and the decomposition retried. The perturbation is orders of magnitude
/// below every tolerance in the crate.
pub fn complex_eigenvalues(a: &Mat) -> Result<Vec<C64>> {
    ensure_finite(a, "eigenvalue input")?;
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.amax().max(1.0);
    let mut work = a.clone();
    for attempt in 0..4 {
        if let Some(schur) = work.clone().try_schur(1e-15, 200 * n.max(8) * (attempt + 1)) {
            let ev = schur.complex_eigenvalues();
            let out: Vec<C64> = ev.iter().cloned().collect();
            if out.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Ok(out);
            }
        }
        // Deterministic jitter proportional to the matrix scale.
        let eps = scale * 1e-14 * (attempt + 1) as f64;
        for i in 0..n {
            for j in 0..n {
                let t = ((i * 31 + j * 17 + attempt * 7) % 13) as f64 / 13.0 - 0.5;
                work[(i, j)] = a[(i, j)] + eps * t;
            }
        }
    }
    Err(Error::EigenFailed)
}

/// Right-singular vectors of a complex matrix, ordered by ascending singular value.
fn smallest_right_singular_vectors(m: &CMat, count: usize) -> Result<Vec<CVector>> {
    let cols = m.ncols();
    let work = if m.nrows() < cols {
        let mut padded = CMat::zeros(cols, cols);
        padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::SvdFailed)?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[i]
            .partial_cmp(&svd.singular_values[j])
            .unwrap()
    });
    Ok(order
        .into_iter()
        .take(count)
        .map(|i| v_t.row(i).transpose().map(|z| z.conj()))
        .collect())
}

/// Full eigendecomposition: one (eigenvalue, right eigenvector) pair per
/// algebraic multiplicity. Eigenvectors come from the smallest right-singular
/// vector of A − λI, which stays accurate even when λ itself is the poorly
/// conditioned member of a defective cluster. Each pair satisfies
/// ‖A·x − λx‖ ≤ residual_tol·‖A‖·‖x‖ or the call errors out.
pub fn eigen(a: &Mat, tol: &ToleranceConfig) -> Result<Vec<(C64, CVector)>> {
    let eigenvalues = complex_eigenvalues(a)?;
    let n = a.nrows();
    let ac = to_complex(a);
    let norm_a = spectral_norm(a).max(1.0);
    // Group equal-ish eigenvalues so repeated roots receive independent
    // kernel vectors where the geometric multiplicity allows it.
    let mut remaining: Vec<C64> = eigenvalues.clone();
    let mut pairs: Vec<(C64, CVector)> = Vec::with_capacity(n);
    while let Some(lambda) = remaining.first().cloned() {
        let cluster_tol = tol.eig_match_tol * norm_a;
        let (cluster, rest): (Vec<C64>, Vec<C64>) = remaining
            .into_iter()
            .partition(|z| (z - lambda).norm() <= cluster_tol);
        remaining = rest;
        let mut shifted = ac.clone();
        for i in 0..n {
            shifted[(i, i)] -= lambda;
        }
        let vectors = smallest_right_singular_vectors(&shifted, cluster.len())?;
        let sharpen = |x: &CVector| -> CVector {
            // One inverse-iteration step; amplifies the near-kernel
            // component beyond what the SVD vectors deliver.
            let lu = shifted.clone().full_piv_lu();
            match lu.solve(x) {
                Some(y) if y.norm().is_finite() && y.norm() > 1e-8 => {
                    let ny = y.norm();
                    y.map(|z| z / ny)
                }
                _ => x.clone(),
            }
        };
        for (k, lam) in cluster.iter().enumerate() {
            let mut x = sharpen(&vectors[k.min(vectors.len() - 1)]);
            let mut residual = (&ac * &x - x.scale_mut_ref(*lam)).norm();
            if residual > tol.residual_tol * norm_a {
                // Defective cluster: fall back to the best available vector.
                x = sharpen(&vectors[0]);
                residual = (&ac * &x - x.scale_mut_ref(*lam)).norm();
            }
            if residual > tol.residual_tol * norm_a {
                return Err(Error::EigenFailed);
            }
            pairs.push((*lam, x));
        }
    }
    Ok(pairs)
}

trait ScaleRef {
    fn scale_mut_ref(&self, s: C64) -> CVector;
}

impl ScaleRef for CVector {
    fn scale_mut_ref(&self, s: C64) -> CVector {
        self.map(|z| z * s)
    }
}

/// A linear subspace of R^ambient stored as an orthonormal column basis.
/// The trivial subspace is a zero-column basis, never an error.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient: usize,
    basis: Mat,
}

impl Subspace {
    pub fn trivial(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Mat::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            basis: Mat::identity(ambient, ambient),
        }
    }

    pub(crate) fn from_orthonormal(ambient: usize, basis: Mat) -> Self {
        debug_assert_eq!(basis.nrows(), ambient);
        Self { ambient, basis }
    }

    /// Orthonormalize an arbitrary spanning set (rank-revealing SVD).
    pub fn from_spanning(ambient: usize, columns: &[Vector], tol: &ToleranceConfig) -> Result<Self> {
        if columns.is_empty() {
            return Ok(Self::trivial(ambient));
        }
        for c in columns {
            if c.len() != ambient {
                return Err(Error::DimensionMismatch(format!(
                    "spanning column has length {}, ambient is {}",
                    c.len(),
                    ambient
                )));
            }
            if !c.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite("spanning column"));
            }
        }
        let m = Mat::from_columns(columns);
        let (u, s, _) = svd_sorted(&m)?;
        let rank = rank_from_singular_values(&s, m.nrows(), m.ncols(), tol);
        Ok(Self::from_orthonormal(ambient, u.columns(0, rank).into()))
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Distance from v to the subspace, relative to ‖v‖.
    pub fn residual(&self, v: &Vector) -> f64 {
        let nv = v.norm();
        if nv == 0.0 {
            return 0.0;
        }
        let proj = &self.basis * (self.basis.transpose() * v);
        (v - proj).norm() / nv
    }

    pub fn contains(&self, v: &Vector, tol: &ToleranceConfig) -> bool {
        self.residual(v) <= tol.subspace_angle_tol
    }

    /// Orthogonal complement.
    pub fn complement(&self, tol: &ToleranceConfig) -> Result<Subspace> {
        if self.dim() == 0 {
            return Ok(Subspace::full(self.ambient));
        }
        null_space(&self.basis.transpose(), tol)
    }

    /// Check basisᵀ·basis = I within tolerance; part of the type's invariant.
    pub fn is_orthonormal(&self, tol: f64) -> bool {
        let g = self.basis.transpose() * &self.basis;
        let id = Mat::identity(self.dim(), self.dim());
        (g - id).norm() <= tol
    }
}

fn check_same_ambient(s1: &Subspace, s2: &Subspace) -> Result<()> {
    if s1.ambient != s2.ambient {
        return Err(Error::DimensionMismatch(format!(
            "subspace ambient dims differ: {} vs {}",
            s1.ambient, s2.ambient
        )));
    }
    Ok(())
}

/// Column space of the concatenated bases.
pub fn subspace_sum(s1: &Subspace, s2: &Subspace, tol: &ToleranceConfig) -> Result<Subspace> {
    check_same_ambient(s1, s2)?;
    let cols: Vec<Vector> = s1
        .basis
        .column_iter()
        .chain(s2.basis.column_iter())
        .map(|c| c.into_owned())
        .collect();
    Subspace::from_spanning(s1.ambient, &cols, tol)
}

/// Intersection via orthogonal-complement duality:
/// S1 ∩ S2 = (S1⊥ + S2⊥)⊥.
pub fn subspace_intersection(
    s1: &Subspace,
    s2: &Subspace,
    tol: &ToleranceConfig,
) -> Result<Subspace> {
    check_same_ambient(s1, s2)?;
    let c1 = s1.complement(tol)?;
    let c2 = s2.complement(tol)?;
    let sum = subspace_sum(&c1, &c2, tol)?;
    sum.complement(tol)
}

/// Largest principal angle between two subspaces of equal dimension,
/// computed through sines (‖(I − P1)B2‖) so tiny angles stay resolvable.
pub fn max_principal_angle(s1: &Subspace, s2: &Subspace) -> f64 {
    if s1.dim() == 0 && s2.dim() == 0 {
        return 0.0;
    }
    let sin1 = {
        let proj = &s1.basis * (s1.basis.transpose() * &s2.basis);
        spectral_norm(&(&s2.basis - proj))
    };
    let sin2 = {
        let proj = &s2.basis * (s2.basis.transpose() * &s1.basis);
        spectral_norm(&(&s1.basis - proj))
    };
    sin1.max(sin2).min(1.0).asin()
}

/// Equal dimension and all principal angles below subspace_angle_tol.
pub fn subspace_equal(s1: &Subspace, s2: &Subspace, tol: &ToleranceConfig) -> Result<bool> {
    check_same_ambient(s1, s2)?;
    if s1.dim() != s2.dim() {
        return Ok(false);
    }
    Ok(max_principal_angle(s1, s2) < tol.subspace_angle_tol)
}

/// x ⊙ S = Σ_i x_i e_i ⊗ S, the block-scaled stacking of a subspace.
pub fn odot(x: &Vector, s: &Subspace, tol: &ToleranceConfig) -> Result<Subspace> {
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("odot weight vector"));
    }
    let n = x.len();
    let m = s.ambient_dim();
    let mut cols = Vec::with_capacity(n * s.dim());
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        for c in s.basis.column_iter() {
            let mut v = Vector::zeros(n * m);
            for r in 0..m {
                v[i * m + r] = x[i] * c[r];
            }
            cols.push(v);
        }
    }
    Subspace::from_spanning(n * m, &cols, tol)
}

/// ker(A⊗B) = ker(A⊗I) + ker(I⊗B), checked with the null-space oracle.
/// The identity factors must act on the column side (I_k with k = cols(B),
/// I_m with m = cols(A)) for the three kernels to share the ambient space
/// R^{m·k}; for square factors this is the familiar row-side statement.
pub fn kron_kernel_decomposition_check(a: &Mat, b: &Mat, tol: &ToleranceConfig) -> Result<bool> {
    let m = a.ncols();
    let k = b.ncols();
    let lhs = null_space(&kron(a, b)?, tol)?;
    let left = null_space(&kron(a, &Mat::identity(k, k))?, tol)?;
    let right = null_space(&kron(&Mat::identity(m, m), b)?, tol)?;
    let rhs = subspace_sum(&left, &right, tol)?;
    subspace_equal(&lhs, &rhs, tol)
}
