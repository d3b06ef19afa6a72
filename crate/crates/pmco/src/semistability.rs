//! Discrete-time semistability, paracontraction, and convergent-product
//! predicates.
//!
//! Two independent characterizations of paracontraction live here: the
//! three-condition test (nontrivially semistable + norm bound + kernel
//! identity) and a randomized falsifier of the raw definition. Their
//! agreement over generated matrices is one of the acceptance gates.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{
    complex_eigenvalues, null_space, numerical_rank, spectral_norm, subspace_equal, Mat,
    Vector,
};
use crate::{Error, Result, ToleranceConfig};

/// Candidate paracontracting matrix with cached certification results.
#[derive(Debug, Clone)]
pub struct ParaMatrix {
    pub p: Mat,
    pub certification: Certification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Certification {
    pub norm_le_one: bool,
    pub semistable: bool,
    pub nontrivial: bool,
    pub kernel_condition: bool,
}

impl ParaMatrix {
    pub fn certify(p: Mat, tol: &ToleranceConfig) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::DimensionMismatch("ParaMatrix must be square".into()));
        }
        let norm_le_one = spectral_norm(&p) <= 1.0 + tol.residual_tol;
        let semistable = is_discrete_time_semistable(&p, tol)?;
        let n = p.nrows();
        let nontrivial = (&p - Mat::identity(n, n)).norm() > tol.residual_tol;
        let kernel_condition = lemma_kernel_condition(&p, tol)?;
        Ok(Self {
            p,
            certification: Certification {
                norm_le_one,
                semistable,
                nontrivial,
                kernel_condition,
            },
        })
    }

    pub fn is_certified_paracontracting(&self) -> bool {
        let c = &self.certification;
        c.norm_le_one && c.semistable && c.nontrivial && c.kernel_condition
    }
}

/// Uniform-dimension pool of square matrices for product iterations.
#[derive(Debug, Clone)]
pub struct MatrixPool {
    pub members: Vec<Mat>,
    pub labels: Vec<String>,
}

impl MatrixPool {
    pub fn new(members: Vec<Mat>, labels: Vec<String>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidConfig("matrix pool must be nonempty".into()));
        }
        let n = members[0].nrows();
        for m in &members {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(
                    "pool members must be square with uniform dimension".into(),
                ));
            }
        }
        let labels = if labels.len() == members.len() {
            labels
        } else {
            (0..members.len()).map(|i| format!("P{i}")).collect()
        };
        Ok(Self { members, labels })
    }

    pub fn dim(&self) -> usize {
        self.members[0].nrows()
    }
}

/// spec(A) inside the open unit disc except possibly a semisimple 1.
pub fn is_discrete_time_semistable(a: &Mat, tol: &ToleranceConfig) -> Result<bool> {
    let ev = complex_eigenvalues(a)?;
    let mut has_one = false;
    for z in &ev {
        let near_one = (z - crate::linalg::C64::new(1.0, 0.0)).norm() < tol.eig_match_tol;
        if near_one {
            has_one = true;
        } else if z.norm() >= 1.0 + tol.eig_match_tol {
            return Ok(false);
        } else if z.norm() >= 1.0 - tol.eig_match_tol {
            // On the unit circle but away from 1.
            return Ok(false);
        }
    }
    if has_one {
        let n = a.nrows();
        let shifted = a - Mat::identity(n, n);
        let r1 = numerical_rank(&shifted, tol)?;
        let r2 = numerical_rank(&(&shifted * &shifted), tol)?;
        return Ok(r1 == r2);
    }
    Ok(true)
}

/// Repeated squaring: Some(limit) when ‖A^{2m} − A^m‖ drops below tol
/// before max_doublings, None when powers diverge or never settle.
pub fn semistable_limit_oracle(a: &Mat, max_doublings: usize, tol: f64) -> Result<Option<Mat>> {
    crate::linalg::ensure_finite(a, "limit oracle input")?;
    let mut power = a.clone();
    for _ in 0..max_doublings {
        let squared = &power * &power;
        if !squared.iter().all(|x| x.is_finite()) || squared.norm() > 1e150 {
            return Ok(None);
        }
        if (&squared - &power).norm() < tol {
            return Ok(Some(squared));
        }
        power = squared;
    }
    Ok(None)
}

/// The kernel identity from the three-condition characterization. Note
/// (W−I)ᵀ(W−I) + Wᵀ − I + W − I expands to WᵀW − I.
fn lemma_kernel_condition(w: &Mat, tol: &ToleranceConfig) -> Result<bool> {
    let n = w.nrows();
    let id = Mat::identity(n, n);
    let shifted = w - &id;
    let lhs = w.transpose() * w - &id;
    let rhs = shifted.transpose() * &shifted + &shifted * &shifted;
    let k_lhs = null_space(&lhs, tol)?;
    let k_rhs = null_space(&rhs, tol)?;
    subspace_equal(&k_lhs, &k_rhs, tol)
}

/// Three-condition paracontraction test: nontrivially discrete-time
/// semistable, ‖W‖ ≤ 1, and ker(WᵀW−I) = ker((W−I)ᵀ(W−I)+(W−I)²).
/// Returns false for W = I (the nontriviality clause).
pub fn is_paracontracting_lemma1(w: &Mat, tol: &ToleranceConfig) -> Result<bool> {
    let pm = ParaMatrix::certify(w.clone(), tol)?;
    Ok(pm.is_certified_paracontracting())
}

/// Randomized falsifier of the definition: Wx ≠ x must force ‖Wx‖ < ‖x‖.
///
/// The strict contraction is only resolvable in f64 away from the fixed
/// subspace (the deficit is quadratic in the distance), so directions
/// within max(tol, 1e-5) of fixed are treated as the "Wx = x" bucket.
/// Returns true for W = I: the definition is vacuous there.
pub fn paracontraction_definition_check<R: Rng>(
    w: &Mat,
    sample_count: usize,
    rng: &mut R,
    tol: &ToleranceConfig,
) -> Result<bool> {
    let n = w.nrows();
    if n != w.ncols() {
        return Err(Error::DimensionMismatch("definition check needs square W".into()));
    }
    let fixed = null_space(&(w - Mat::identity(n, n)), tol)?;
    let fixed_threshold = tol.residual_tol.max(1e-5);
    let mut samples: Vec<Vector> = Vec::with_capacity(sample_count + 2 * fixed.dim() + 4 + n);
    for _ in 0..sample_count {
        samples.push(random_unit(n, rng));
    }
    // Directions inside and orthogonal to ker(W − I).
    for c in fixed.basis().column_iter() {
        samples.push(c.into_owned());
    }
    if fixed.dim() < n {
        let proj = |v: &Vector| -> Vector { v - fixed.basis() * (fixed.basis().transpose() * v) };
        for _ in 0..4 {
            let v = proj(&random_unit(n, rng));
            if v.norm() > 1e-8 {
                samples.push(v.normalize());
            }
        }
    }
    // Norm-boundary directions: right singular vectors with σ near or
    // above 1. These are the only places a norm-preserving move can hide,
    // and random unit vectors almost never land on them.
    {
        let svd = w.clone().svd(false, true);
        if let Some(v_t) = svd.v_t {
            for (i, sigma) in svd.singular_values.iter().enumerate() {
                if *sigma >= 1.0 - 1e-9 {
                    samples.push(v_t.row(i).transpose());
                }
            }
        }
    }
    for u in &samples {
        let wu = w * u;
        let moved = (&wu - u).norm();
        if moved > fixed_threshold {
            if wu.norm() >= 1.0 - 1e-13 {
                return Ok(false);
            }
        } else if wu.norm() < 1.0 - 10.0 * fixed_threshold {
            // Near-fixed directions must not contract sharply.
            return Ok(false);
        }
    }
    Ok(true)
}

fn random_unit<R: Rng>(n: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-8 {
            return v / norm;
        }
    }
}

/// 0 is a semisimple eigenvalue iff rank(A) = rank(A²); errors when A has
/// full rank (zero is not an eigenvalue at all).
pub fn is_semisimple_zero(a: &Mat, tol: &ToleranceConfig) -> Result<bool> {
    let r = numerical_rank(a, tol)?;
    if r == a.ncols() {
        return Err(Error::ZeroNotEigenvalue);
    }
    let r2 = numerical_rank(&(a * a), tol)?;
    Ok(r == r2)
}

/// Discrete-time approximate semiobservability:
/// ∩_k ker(C(I − A_k)) = ker(I − A_ref), with the intersection computed by
/// stacking the C(I − A_k) blocks.
pub fn approx_semiobservable(
    family: &MatrixPool,
    c: &Mat,
    a_ref: &Mat,
    tol: &ToleranceConfig,
) -> Result<bool> {
    let n = family.dim();
    if c.ncols() != n || a_ref.nrows() != n || a_ref.ncols() != n {
        return Err(Error::DimensionMismatch(
            "approx_semiobservable: C and A_ref must match the family dimension".into(),
        ));
    }
    let id = Mat::identity(n, n);
    let m = c.nrows();
    let mut stacked = Mat::zeros(m * family.members.len(), n);
    for (k, a) in family.members.iter().enumerate() {
        let block = c * (&id - a);
        stacked.view_mut((k * m, 0), (m, n)).copy_from(&block);
    }
    let lhs = null_space(&stacked, tol)?;
    let rhs = null_space(&(&id - a_ref), tol)?;
    subspace_equal(&lhs, &rhs, tol)
}

/// Outcome of a product iteration run.
#[derive(Debug, Clone)]
pub struct ProductRun {
    pub steps: usize,
    pub limit: Option<Vector>,
    /// ‖x_{i+1} − x_i‖ history (one entry per step).
    pub deltas: Vec<f64>,
    /// Hypothesis warnings for pool members that fail the three-condition set.
    pub warnings: Vec<String>,
}

/// x_{i+1} = Q_i x_i with Q_i chosen by the selector. Convergence is
/// declared after 50 consecutive steps with ‖Δx‖ < tol.
pub fn product_iteration<S: FnMut(usize) -> usize>(
    pool: &MatrixPool,
    mut selector: S,
    x0: &Vector,
    max_steps: usize,
    tol: f64,
    tols: &ToleranceConfig,
) -> Result<ProductRun> {
    const WINDOW: usize = 50;
    if x0.len() != pool.dim() {
        return Err(Error::DimensionMismatch(
            "product_iteration: x0 dimension must match the pool".into(),
        ));
    }
    let mut warnings = Vec::new();
    for (k, m) in pool.members.iter().enumerate() {
        let pm = ParaMatrix::certify(m.clone(), tols)?;
        let c = pm.certification;
        if !(c.semistable && c.norm_le_one && c.kernel_condition) {
            warnings.push(format!(
                "{} fails product hypotheses (semistable={}, norm_le_one={}, kernel={})",
                pool.labels[k], c.semistable, c.norm_le_one, c.kernel_condition
            ));
        }
    }
    let mut x = x0.clone();
    let mut deltas = Vec::new();
    let mut quiet = 0usize;
    for step in 0..max_steps {
        let pick = selector(step) % pool.members.len();
        let next = &pool.members[pick] * &x;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NumericAbort { iter: step });
        }
        let delta = (&next - &x).norm();
        deltas.push(delta);
        x = next;
        if delta < tol {
            quiet += 1;
            if quiet >= WINDOW {
                return Ok(ProductRun {
                    steps: step + 1,
                    limit: Some(x),
                    deltas,
                    warnings,
                });
            }
        } else {
            quiet = 0;
        }
    }
    Ok(ProductRun {
        steps: max_steps,
        limit: None,
        deltas,
        warnings,
    })
}

/// ‖(I − P_k)·limit‖ ≤ tol·(1 + ‖limit‖) for every index in
/// `infinitely_often`.
pub fn limit_membership_check(
    limit: &Vector,
    pool: &MatrixPool,
    infinitely_often: &[usize],
    tol: f64,
) -> Result<bool> {
    if !limit.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("limit vector"));
    }
    let n = pool.dim();
    let id = Mat::identity(n, n);
    let bound = tol * (1.0 + limit.norm());
    for &k in infinitely_often {
        let m = &pool.members[k];
        if ((&id - m) * limit).norm() > bound {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Symmetric paracontracting generator: P = V·diag(d)·Vᵀ with V random
/// orthogonal. `ones` eigenvalues are pinned to 1; the rest are drawn from
/// ±[lo, hi] (or [lo, hi] when `positive`), so the result certifies under
/// the three-condition test whenever some eigenvalue differs from 1.
pub fn random_paracontracting<R: Rng>(
    n: usize,
    lo: f64,
    hi: f64,
    ones: usize,
    positive: bool,
    rng: &mut R,
) -> Mat {
    let v = random_orthogonal(n, rng);
    let mut d = Vector::zeros(n);
    for i in 0..n {
        if i < ones.min(n) {
            d[i] = 1.0;
        } else {
            let mag = rng.gen_range(lo..=hi);
            d[i] = if positive || rng.gen::<bool>() { mag } else { -mag };
        }
    }
    &v * Mat::from_diagonal(&d) * v.transpose()
}

pub fn random_orthogonal<R: Rng>(n: usize, rng: &mut R) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    // Fix the sign convention so the distribution is Haar.
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngkey::{stream, Domain};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn semistable_examples() {
        let t = tol();
        let d = Mat::from_partial_diagonal(2, 2, &[1.0, 0.5]);
        assert!(is_discrete_time_semistable(&d, &t).unwrap());
        let jordan = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(!is_discrete_time_semistable(&jordan, &t).unwrap());
        let reflect = Mat::from_partial_diagonal(2, 2, &[1.0, -1.0]);
        assert!(!is_discrete_time_semistable(&reflect, &t).unwrap());
    }

    #[test]
    fn limit_oracle_examples() {
        let d = Mat::from_partial_diagonal(2, 2, &[1.0, 0.5]);
        let lim = semistable_limit_oracle(&d, 64, 1e-12).unwrap().unwrap();
        assert!((lim - Mat::from_partial_diagonal(2, 2, &[1.0, 0.0])).norm() < 1e-10);

        let grow = Mat::from_row_slice(1, 1, &[2.0]);
        assert!(semistable_limit_oracle(&grow, 64, 1e-12).unwrap().is_none());
    }

    #[test]
    fn limit_oracle_matches_spectral_projector() {
        // Symmetric P with spectrum {1, 0.9, -0.2}: the limit is the
        // projector onto the eigenvalue-1 eigenspace.
        let mut rng = stream(21, Domain::PMatrix, 0, 0);
        let v = random_orthogonal(3, &mut rng);
        let d = Mat::from_partial_diagonal(3, 3, &[1.0, 0.9, -0.2]);
        let p = &v * &d * v.transpose();
        let lim = semistable_limit_oracle(&p, 200, 5e-11).unwrap().unwrap();
        let proj = v.column(0) * v.column(0).transpose();
        assert!((lim - proj).norm() < 1e-8);
    }

    #[test]
    fn agreement_between_characterizations() {
        // Semistable <=> the power limit exists, over random symmetric and
        // a few crafted nonsymmetric matrices.
        let t = tol();
        let mut rng = stream(5, Domain::Sweep, 7, 0);
        for i in 0..60 {
            let n = 2 + (i % 5);
            let a = if i % 3 == 0 {
                random_paracontracting(n, 0.05, 0.95, 1, false, &mut rng)
            } else {
                Mat::from_fn(n, n, |_, _| rng.gen_range(-0.6..0.6))
            };
            let semi = is_discrete_time_semistable(&a, &t).unwrap();
            let limit = semistable_limit_oracle(&a, 256, 1e-11).unwrap();
            assert_eq!(semi, limit.is_some(), "disagreement on {a}");
        }
    }

    #[test]
    fn lemma1_examples() {
        let t = tol();
        assert!(is_paracontracting_lemma1(&(Mat::identity(2, 2) * 0.5), &t).unwrap());
        assert!(!is_paracontracting_lemma1(&Mat::identity(2, 2), &t).unwrap());
        let jordan = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(!is_paracontracting_lemma1(&jordan, &t).unwrap());
        // Norm 1 with a moved unit vector: pure kernel-condition violator.
        let shear = Mat::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        assert!(!is_paracontracting_lemma1(&shear, &t).unwrap());
    }

    #[test]
    fn definition_check_examples() {
        let t = tol();
        let mut rng = stream(2, Domain::Sweep, 3, 0);
        assert!(
            paracontraction_definition_check(&(Mat::identity(2, 2) * 0.5), 50, &mut rng, &t)
                .unwrap()
        );
        let d = Mat::from_partial_diagonal(2, 2, &[1.0, 0.5]);
        assert!(paracontraction_definition_check(&d, 50, &mut rng, &t).unwrap());
        let jordan = Mat::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(!paracontraction_definition_check(&jordan, 50, &mut rng, &t).unwrap());
        // Vacuous at W = I.
        assert!(
            paracontraction_definition_check(&Mat::identity(3, 3), 50, &mut rng, &t).unwrap()
        );
    }

    #[test]
    fn semisimple_zero_examples() {
        let t = tol();
        assert!(is_semisimple_zero(&Mat::zeros(2, 2), &t).unwrap());
        let nil = Mat::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(!is_semisimple_zero(&nil, &t).unwrap());
        assert!(is_semisimple_zero(&Mat::from_partial_diagonal(2, 2, &[0.0, 3.0]), &t).unwrap());
        assert!(matches!(
            is_semisimple_zero(&Mat::identity(2, 2), &t),
            Err(Error::ZeroNotEigenvalue)
        ));
    }

    #[test]
    fn semiobservable_examples() {
        let t = tol();
        let a = Mat::from_partial_diagonal(2, 2, &[1.0, 0.5]);
        let pool = MatrixPool::new(vec![a.clone()], vec![]).unwrap();
        assert!(approx_semiobservable(&pool, &Mat::identity(2, 2), &a, &t).unwrap());

        let id_pool = MatrixPool::new(vec![Mat::identity(2, 2)], vec![]).unwrap();
        assert!(approx_semiobservable(&id_pool, &Mat::identity(2, 2), &Mat::identity(2, 2), &t)
            .unwrap());

        // family = {diag(1, .5), diag(.5, 1)}: intersection of kernels is {0},
        // so a_ref must have ker(I - a_ref) = {0}.
        let fam = MatrixPool::new(
            vec![
                Mat::from_partial_diagonal(2, 2, &[1.0, 0.5]),
                Mat::from_partial_diagonal(2, 2, &[0.5, 1.0]),
            ],
            vec![],
        )
        .unwrap();
        let a_ref = Mat::from_partial_diagonal(2, 2, &[0.3, 0.4]);
        assert!(approx_semiobservable(&fam, &Mat::identity(2, 2), &a_ref, &t).unwrap());
        let bad_ref = Mat::from_partial_diagonal(2, 2, &[1.0, 0.4]);
        assert!(!approx_semiobservable(&fam, &Mat::identity(2, 2), &bad_ref, &t).unwrap());
    }

    #[test]
    fn product_iteration_examples() {
        let t = tol();
        let pool =
            MatrixPool::new(vec![Mat::from_partial_diagonal(2, 2, &[1.0, 0.5])], vec![]).unwrap();
        let x0 = Vector::from_vec(vec![1.0, 1.0]);
        let run = product_iteration(&pool, |_| 0, &x0, 100_000, 1e-12, &t).unwrap();
        let lim = run.limit.unwrap();
        assert!((lim - Vector::from_vec(vec![1.0, 0.0])).norm() < 1e-9);
        assert!(run.warnings.is_empty());

        let id_pool = MatrixPool::new(vec![Mat::identity(2, 2)], vec![]).unwrap();
        let run = product_iteration(&id_pool, |_| 0, &x0, 1000, 1e-12, &t).unwrap();
        assert_eq!(run.limit.unwrap(), x0);
    }

    #[test]
    fn product_round_robin_lands_in_common_kernel() {
        let t = tol();
        // Commuting diagonal paracontractors with common fixed space e1.
        let p1 = Mat::from_partial_diagonal(3, 3, &[1.0, 0.5, 1.0]);
        let p2 = Mat::from_partial_diagonal(3, 3, &[1.0, 1.0, -0.3]);
        let pool = MatrixPool::new(vec![p1, p2], vec![]).unwrap();
        let x0 = Vector::from_vec(vec![1.0, 1.0, 1.0]);
        let run = product_iteration(&pool, |i| i % 2, &x0, 100_000, 1e-11, &t).unwrap();
        let lim = run.limit.clone().unwrap();
        assert!(limit_membership_check(&lim, &pool, &[0, 1], 1e-8).unwrap());
        assert!((lim[1].abs() + lim[2].abs()) < 1e-8);
        assert!((lim[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn limit_membership_trivial_cases() {
        let pool =
            MatrixPool::new(vec![Mat::from_partial_diagonal(2, 2, &[1.0, 0.5])], vec![]).unwrap();
        assert!(limit_membership_check(&Vector::zeros(2), &pool, &[0], 1e-12).unwrap());
        let e1 = Vector::from_vec(vec![1.0, 0.0]);
        assert!(limit_membership_check(&e1, &pool, &[0], 1e-12).unwrap());
    }

    #[test]
    fn generator_certifies() {
        let t = tol();
        let mut rng = stream(31, Domain::PMatrix, 0, 0);
        for i in 0..40 {
            let n = 1 + (i % 5);
            let p = random_paracontracting(n, 0.05, 0.95, 1, false, &mut rng);
            let pm = ParaMatrix::certify(p, &t).unwrap();
            if n == 1 {
                // A 1x1 generator with the single eigenvalue pinned to 1 is I.
                assert!(pm.certification.semistable);
            } else {
                assert!(pm.is_certified_paracontracting(), "{:?}", pm.certification);
            }
        }
    }
}
