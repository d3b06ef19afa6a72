//! Randomized verification sweeps for every closed-form claim.
//!
//! Each sweep draws instances from seeded streams, runs the relevant
//! checks, and emits one record per (claim, instance). Failing records
//! carry the instance seed so `analyze` can replay them.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::graph::{laplacian, random_digraph, Digraph};
use crate::linalg::{
    kron, null_space, numerical_rank, odot, subspace_equal, subspace_intersection, subspace_sum,
    unit_vector, Mat, Subspace, Vector,
};
use crate::rngkey::{stream, Domain};
use crate::semistability::{
    is_paracontracting_lemma1, limit_membership_check, paracontraction_definition_check,
    product_iteration, random_orthogonal, random_paracontracting, MatrixPool,
};
use crate::switched::{
    build_a, build_ac, build_e, build_w, containment_check, kernel_shift_invariance_check,
    predicted_kernel_a, predicted_rank_a, predicted_spectrum_a, predicted_spectrum_b,
    verify_eigenspace_case, zero_semisimple_dichotomy_check, EigenspaceCase, McoCoefficients,
    SwitchedSystemMatrices,
};
use crate::{Result, ToleranceConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Instance count for the switched-system sweeps (claims 4–8).
    #[serde(default = "default_instances")]
    pub instances: u64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_q_max")]
    pub q_max: usize,
    #[serde(default)]
    pub seed: u64,
    /// Optional claim filter; omit for the full battery. Known names:
    /// "EW", "ker", "S", "1", "3", "4", "5", "6", "7", "8".
    #[serde(default)]
    pub lemmas: Option<Vec<String>>,
    /// Restrict the rank/kernel sweep to one coefficient case
    /// ("i" | "ii" | "iii" | "iv").
    #[serde(default)]
    pub lemma4_case: Option<String>,
    /// W-matrix count for the paracontraction equivalence sweep.
    #[serde(default = "default_para_instances")]
    pub paracontraction_instances: u64,
    /// Product-iteration run count per selector.
    #[serde(default = "default_product_runs")]
    pub product_runs: u64,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_instances() -> u64 {
    500
}
fn default_n_max() -> usize {
    3
}
fn default_q_max() -> usize {
    4
}
fn default_para_instances() -> u64 {
    200
}
fn default_product_runs() -> u64 {
    100
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRecord {
    pub lemma: String,
    pub instance_seed: u64,
    pub n: usize,
    pub q: usize,
    pub case: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

impl VerifyConfig {
    fn wants(&self, lemma: &str) -> bool {
        match &self.lemmas {
            None => true,
            Some(list) => list.iter().any(|l| l == lemma),
        }
    }
}

/// Random full- or deficient-rank symmetric paracontracting matrix.
fn sample_p(rng: &mut ChaCha8Rng, n: usize, allow_deficient: bool) -> Mat {
    let p = random_paracontracting(n, 0.1, 0.9, 1, false, rng);
    if allow_deficient && n > 1 && rng.gen::<f64>() < 0.4 {
        let mut eig = p.symmetric_eigen();
        eig.eigenvalues[0] = 0.0;
        eig.recompose()
    } else {
        p
    }
}

fn sample_graph(rng: &mut ChaCha8Rng, q: usize) -> Digraph {
    random_digraph(q, 0.4, rng).expect("q >= 2")
}

struct Instance {
    seed: u64,
    n: usize,
    q: usize,
    j: usize,
    coeffs: McoCoefficients,
    l: Mat,
    p: Mat,
    rank_l: usize,
    rank_p: usize,
    case: &'static str,
}

fn draw_instance(
    cfg: &VerifyConfig,
    idx: u64,
    tol: &ToleranceConfig,
    force_case: Option<&'static str>,
    full_rank_p: bool,
) -> Instance {
    let seed = cfg.seed.wrapping_mul(0x9e37).wrapping_add(idx);
    let mut rng = stream(seed, Domain::Sweep, idx, 0);
    let n = 1 + (rng.gen::<u64>() as usize) % cfg.n_max;
    let q = 2 + (rng.gen::<u64>() as usize) % (cfg.q_max - 1);
    let case = match force_case {
        Some(c) => c,
        None => match idx % 4 {
            0 => "i",
            1 => "ii",
            2 => "iii",
            _ => "iv",
        },
    };
    let mu = if case == "i" || case == "ii" {
        0.0
    } else {
        rng.gen_range(0.05..1.0)
    };
    let kappa = if case == "i" || case == "iv" {
        0.0
    } else {
        rng.gen_range(0.05..1.0)
    };
    let eta = if rng.gen::<f64>() < 0.3 {
        0.0
    } else {
        rng.gen_range(0.05..1.0)
    };
    let h = rng.gen_range(0.1..2.0);
    let p = sample_p(&mut rng, n, !full_rank_p);
    let g = sample_graph(&mut rng, q);
    let l = laplacian(&g);
    let j = 1 + (rng.gen::<u64>() as usize) % q;
    let rank_l = numerical_rank(&l, tol).unwrap();
    let rank_p = numerical_rank(&p, tol).unwrap();
    Instance {
        seed,
        n,
        q,
        j,
        coeffs: McoCoefficients {
            mu,
            eta,
            kappa,
            h,
        },
        l,
        p,
        rank_l,
        rank_p,
        case,
    }
}

fn sweep_lemma_ew(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    let count = cfg.instances.min(200);
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let seed = cfg.seed.wrapping_add(0xE17).wrapping_add(idx);
            let mut rng = stream(seed, Domain::Sweep, idx, 1);
            let n = 1 + (rng.gen::<u64>() as usize) % 3;
            let q = 2 + (rng.gen::<u64>() as usize) % 2;
            let p = sample_p(&mut rng, n, true);
            let rank_p = numerical_rank(&p, tol).unwrap();
            let mut pass = true;
            let mut failures: Vec<String> = Vec::new();
            let iq_p = kron(&Mat::identity(q, q), &p).unwrap();
            let ker_p = null_space(&p, tol).unwrap();
            for j in 1..=q {
                let e = build_e(j, n, q).unwrap();
                let w = build_w(j, &p, q).unwrap();
                if numerical_rank(&w, tol).unwrap() != rank_p {
                    pass = false;
                    failures.push(format!("rank(W^[{j}]) != rank(P)"));
                }
                if numerical_rank(&(&iq_p - &w), tol).unwrap() != (q - 1) * rank_p {
                    pass = false;
                    failures.push(format!("rank(IqP - W^[{j}]) != (q-1)rank(P)"));
                }
                // E(1 ⊗ A) = A for a random A.
                let a = Mat::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
                let stacked = kron(&Mat::from_element(q, 1, 1.0), &a).unwrap();
                if (&e * &stacked - &a).norm() > 1e-12 {
                    pass = false;
                    failures.push("E(1⊗A) != A".into());
                }
                for i in 0..n {
                    // W(w ⊗ e_i) = w_j (Iq⊗P)(1 ⊗ e_i) for a random w.
                    let wv = Vector::from_fn(q, |_, _| rng.gen_range(-1.0..1.0));
                    let we = kron_vec(&wv, &unit_vector(n, i));
                    let rhs = kron_vec(&Vector::from_element(q, 1.0), &(&p * unit_vector(n, i)));
                    if (&w * &we - wv[j - 1] * rhs).norm() > 1e-10 {
                        pass = false;
                        failures.push("W(w⊗e_i) identity".into());
                    }
                    // E(w ⊗ e_i) = w_j e_i.
                    if (&e * &we - wv[j - 1] * unit_vector(n, i)).norm() > 1e-12 {
                        pass = false;
                        failures.push("E(w⊗e_i) identity".into());
                    }
                }
                for s in 0..q {
                    for r in 0..ker_p.dim() {
                        let jr = ker_p.basis().column(r).into_owned();
                        let gs_jr = kron_vec(&unit_vector(q, s), &jr);
                        let expect = if s == j - 1 { jr.clone() } else { Vector::zeros(n) };
                        if (&e * &gs_jr - expect).norm() > 1e-10 {
                            pass = false;
                            failures.push("E(g_s⊗j_r) identity".into());
                        }
                        if (&w * &gs_jr).norm() > 1e-10 {
                            pass = false;
                            failures.push("W(g_s⊗j_r) != 0".into());
                        }
                    }
                }
                // ker(W − Iq⊗P) = 1 ⊗ span{e_i} + (1 − g_j) ⊙ ker(P).
                let lhs = null_space(&(&w - &iq_p), tol).unwrap();
                let ones_block = {
                    let cols: Vec<Vector> = (0..n)
                        .map(|i| kron_vec(&Vector::from_element(q, 1.0), &unit_vector(n, i)))
                        .collect();
                    Subspace::from_spanning(n * q, &cols, tol).unwrap()
                };
                let mut ones_minus_gj = Vector::from_element(q, 1.0);
                ones_minus_gj[j - 1] = 0.0;
                let odot_part = odot(&ones_minus_gj, &ker_p, tol).unwrap();
                let rhs = subspace_sum(&ones_block, &odot_part, tol).unwrap();
                if !subspace_equal(&lhs, &rhs, tol).unwrap() {
                    pass = false;
                    failures.push("ker(W − IqP) decomposition".into());
                }
            }
            VerifyRecord {
                lemma: "EW".into(),
                instance_seed: seed,
                n,
                q,
                case: format!("rank_p={rank_p}"),
                pass,
                detail: json!({ "failures": failures }),
            }
        })
        .collect()
}

fn kron_vec(a: &Vector, b: &Vector) -> Vector {
    let mut out = Vector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

fn sweep_lemma_ker(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    let count = cfg.instances.min(200);
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let seed = cfg.seed.wrapping_add(0x3E8).wrapping_add(idx);
            let mut rng = stream(seed, Domain::Sweep, idx, 2);
            let dims = |rng: &mut ChaCha8Rng| {
                (
                    1 + (rng.gen::<u64>() as usize) % 4,
                    1 + (rng.gen::<u64>() as usize) % 4,
                )
            };
            let (an, am) = dims(&mut rng);
            let (bl, bk) = dims(&mut rng);
            // Mix full-rank and deliberately deficient factors.
            let mut a = Mat::from_fn(an, am, |_, _| rng.gen_range(-1.0..1.0));
            let mut b = Mat::from_fn(bl, bk, |_, _| rng.gen_range(-1.0..1.0));
            if rng.gen::<f64>() < 0.5 && an > 1 {
                let row = a.row(0).into_owned();
                a.set_row(an - 1, &row);
            }
            if rng.gen::<f64>() < 0.5 && bk > 1 {
                let col = b.column(0).into_owned();
                b.set_column(bk - 1, &col);
            }
            let pass = crate::linalg::kron_kernel_decomposition_check(&a, &b, tol).unwrap();
            VerifyRecord {
                lemma: "ker".into(),
                instance_seed: seed,
                n: an,
                q: bl,
                case: format!("{an}x{am} ⊗ {bl}x{bk}"),
                pass,
                detail: json!({}),
            }
        })
        .collect()
}

fn sweep_lemma_s(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    let count = cfg.instances.min(200);
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let seed = cfg.seed.wrapping_add(0x5).wrapping_add(idx);
            let mut rng = stream(seed, Domain::Sweep, idx, 3);
            let dim = 3 + (rng.gen::<u64>() as usize) % 4;
            // S1 ⊆ S2 makes S1 ∪ S2 a subspace, the lemma's hypothesis.
            let d2 = 1 + (rng.gen::<u64>() as usize) % dim;
            let d1 = 1 + (rng.gen::<u64>() as usize) % d2;
            let d3 = 1 + (rng.gen::<u64>() as usize) % dim;
            let basis = random_orthogonal(dim, &mut rng);
            let cols = |lo: usize, hi: usize| -> Vec<Vector> {
                (lo..hi).map(|i| basis.column(i).into_owned()).collect()
            };
            let s2 = Subspace::from_spanning(dim, &cols(0, d2), tol).unwrap();
            let s1 = Subspace::from_spanning(dim, &cols(0, d1), tol).unwrap();
            let mut c3: Vec<Vector> = Vec::new();
            for _ in 0..d3 {
                c3.push(Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0)));
            }
            let s3 = Subspace::from_spanning(dim, &c3, tol).unwrap();
            let total = subspace_sum(&subspace_sum(&s1, &s2, tol).unwrap(), &s3, tol).unwrap();
            let i12 = subspace_intersection(&s1, &s2, tol).unwrap();
            let i23 = subspace_intersection(&s2, &s3, tol).unwrap();
            let i31 = subspace_intersection(&s3, &s1, tol).unwrap();
            let i123 = subspace_intersection(&i12, &s3, tol).unwrap();
            let lhs = total.dim() as i64;
            let rhs = s1.dim() as i64 + s2.dim() as i64 + s3.dim() as i64
                - i12.dim() as i64
                - i23.dim() as i64
                - i31.dim() as i64
                + i123.dim() as i64;
            VerifyRecord {
                lemma: "S".into(),
                instance_seed: seed,
                n: dim,
                q: 0,
                case: format!("dims {},{},{}", s1.dim(), s2.dim(), s3.dim()),
                pass: lhs == rhs,
                detail: json!({"lhs": lhs, "rhs": rhs}),
            }
        })
        .collect()
}

/// The paracontraction equivalence sweep: certified generators mixed with
/// norm, semistability, and kernel-condition violators.
fn sweep_lemma_1(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    (0..cfg.paracontraction_instances)
        .into_par_iter()
        .map(|idx| {
            let seed = cfg.seed.wrapping_add(0x1111).wrapping_add(idx);
            let mut rng = stream(seed, Domain::Sweep, idx, 4);
            let n = 2 + (rng.gen::<u64>() as usize) % 4;
            let kind = idx % 4;
            let (w, kind_name) = match kind {
                0 => (random_paracontracting(n, 0.05, 0.95, 1, false, &mut rng), "certified"),
                1 => {
                    // Norm violator: scale past 1.
                    let p = random_paracontracting(n, 0.05, 0.95, 1, false, &mut rng);
                    (p * 1.05, "norm_violator")
                }
                2 => {
                    // Semistability violator: an eigenvalue at −1 or a
                    // defective 1.
                    let v = random_orthogonal(n, &mut rng);
                    if rng.gen::<bool>() {
                        let mut d = Vector::from_fn(n, |_, _| rng.gen_range(-0.9..0.9));
                        d[0] = -1.0;
                        (&v * Mat::from_diagonal(&d) * v.transpose(), "semistability_violator")
                    } else {
                        let mut jordan = Mat::identity(n, n) * 0.5;
                        jordan[(0, 0)] = 1.0;
                        jordan[(0, 1)] = 1.0;
                        jordan[(1, 1)] = 1.0;
                        (&v * jordan * v.transpose(), "semistability_violator")
                    }
                }
                _ => {
                    // Kernel-condition violator: norm exactly 1 with a
                    // moved unit vector (shear embedded in the top block).
                    let v = random_orthogonal(n, &mut rng);
                    let mut m = Mat::zeros(n, n);
                    m[(1, 0)] = 1.0;
                    for i in 2..n {
                        m[(i, i)] = rng.gen_range(-0.8..0.8);
                    }
                    (&v * m * v.transpose(), "kernel_violator")
                }
            };
            let lemma_says = is_paracontracting_lemma1(&w, tol).unwrap();
            let samples = 10 * n * n;
            let mut sample_rng = stream(seed, Domain::Sweep, idx, 5);
            let definition_says =
                paracontraction_definition_check(&w, samples, &mut sample_rng, tol).unwrap();
            VerifyRecord {
                lemma: "1".into(),
                instance_seed: seed,
                n,
                q: 0,
                case: kind_name.into(),
                pass: lemma_says == definition_says,
                detail: json!({"lemma1": lemma_says, "definition": definition_says}),
            }
        })
        .collect()
}

fn sweep_lemma_3(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    (0..cfg.product_runs)
        .into_par_iter()
        .flat_map(|idx| {
            let seed = cfg.seed.wrapping_add(0x3333).wrapping_add(idx);
            let mut rng = stream(seed, Domain::Sweep, idx, 6);
            let n = 2 + (rng.gen::<u64>() as usize) % 5;
            let pool_size = 1 + (rng.gen::<u64>() as usize) % 5;
            let members: Vec<Mat> = (0..pool_size)
                .map(|_| random_paracontracting(n, 0.05, 0.9, 1, false, &mut rng))
                .collect();
            let nontrivial = members
                .iter()
                .all(|m| (m - Mat::identity(n, n)).norm() > 1e-9);
            let pool = MatrixPool::new(members, vec![]).unwrap();
            let x0 = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)).normalize();
            let mut selector_rng = stream(seed, Domain::Selector, idx, 0);
            let picks: Vec<usize> = (0..100_000)
                .map(|_| selector_rng.gen_range(0..pool.members.len()))
                .collect();
            ["round_robin", "random"]
                .into_iter()
                .map(|selector_name| {
                    let run = match selector_name {
                        "round_robin" => {
                            product_iteration(&pool, |i| i % pool.members.len(), &x0, 100_000, 1e-9, tol)
                        }
                        _ => product_iteration(&pool, |i| picks[i], &x0, 100_000, 1e-9, tol),
                    }
                    .unwrap();
                    let converged = run.limit.is_some();
                    let membership = if converged && nontrivial {
                        let all: Vec<usize> = (0..pool.members.len()).collect();
                        limit_membership_check(run.limit.as_ref().unwrap(), &pool, &all, 1e-7)
                            .unwrap()
                    } else {
                        true
                    };
                    VerifyRecord {
                        lemma: "3".into(),
                        instance_seed: seed,
                        n,
                        q: pool.members.len(),
                        case: selector_name.into(),
                        pass: converged && membership && run.warnings.is_empty(),
                        detail: json!({
                            "steps": run.steps,
                            "converged": converged,
                            "membership": membership,
                            "warnings": run.warnings,
                        }),
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn sweep_lemma_4(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    let force: Option<&'static str> = match cfg.lemma4_case.as_deref() {
        Some("i") => Some("i"),
        Some("ii") => Some("ii"),
        Some("iii") => Some("iii"),
        Some("iv") => Some("iv"),
        _ => None,
    };
    (0..cfg.instances)
        .into_par_iter()
        .flat_map(|idx| {
            let inst = draw_instance(cfg, idx, tol, force, false);
            let a = build_a(inst.j, &inst.coeffs, &inst.l, &inst.p).unwrap();
            let rank_actual = numerical_rank(&a, tol).unwrap();
            let rank_pred =
                predicted_rank_a(&inst.coeffs, inst.rank_l, inst.rank_p, inst.n, inst.q);
            let rank_rec = VerifyRecord {
                lemma: "4".into(),
                instance_seed: inst.seed,
                n: inst.n,
                q: inst.q,
                case: format!("rank_{}", inst.case),
                pass: rank_actual == rank_pred,
                detail: json!({"computed": rank_actual, "predicted": rank_pred}),
            };

            let predicted = predicted_kernel_a(&inst.coeffs, &inst.l, &inst.p, inst.j, tol).unwrap();
            let actual = null_space(&a, tol).unwrap();
            let mut max_res: f64 = 0.0;
            for col in predicted.basis().column_iter() {
                let v = col.into_owned();
                let r = (&a * &v).norm() / v.norm().max(1e-300);
                if r > max_res {
                    max_res = r;
                }
            }
            let dims_match = predicted.dim() == actual.dim();
            let residual_ok = max_res <= 1e-10;
            let span_ok = if inst.case == "iii" {
                true // dimension + residual only; the weights involve P⁺
            } else {
                subspace_equal(&predicted, &actual, tol).unwrap()
            };
            let kernel_rec = VerifyRecord {
                lemma: "4".into(),
                instance_seed: inst.seed,
                n: inst.n,
                q: inst.q,
                case: format!("kernel_{}", inst.case),
                pass: dims_match && residual_ok && span_ok,
                detail: json!({
                    "dim_predicted": predicted.dim(),
                    "dim_computed": actual.dim(),
                    "max_residual": max_res,
                    "span_checked": inst.case != "iii",
                }),
            };
            vec![rank_rec, kernel_rec]
        })
        .collect()
}

fn sweep_lemma_5(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    (0..cfg.instances)
        .into_par_iter()
        .map(|idx| {
            let inst = draw_instance(cfg, idx, tol, None, false);
            let a = build_a(inst.j, &inst.coeffs, &inst.l, &inst.p).unwrap();
            let ac = build_ac(&inst.coeffs, &inst.l, &inst.p).unwrap();
            let mut pass = true;
            for h in [0.0, 0.3, 1.0, 2.5] {
                if !kernel_shift_invariance_check(&a, &ac, h, tol).unwrap() {
                    pass = false;
                }
            }
            VerifyRecord {
                lemma: "5".into(),
                instance_seed: inst.seed,
                n: inst.n,
                q: inst.q,
                case: inst.case.into(),
                pass,
                detail: json!({"h_values": [0.0, 0.3, 1.0, 2.5]}),
            }
        })
        .collect()
}

fn sweep_lemma_6(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    (0..cfg.instances)
        .into_par_iter()
        .map(|idx| {
            let inst = draw_instance(cfg, idx, tol, None, false);
            let a = build_a(inst.j, &inst.coeffs, &inst.l, &inst.p).unwrap();
            let ac = build_ac(&inst.coeffs, &inst.l, &inst.p).unwrap();
            let pass = zero_semisimple_dichotomy_check(
                &a,
                &ac,
                inst.coeffs.h,
                &inst.coeffs,
                inst.rank_p,
                inst.n,
                tol,
            )
            .unwrap();
            VerifyRecord {
                lemma: "6".into(),
                instance_seed: inst.seed,
                n: inst.n,
                q: inst.q,
                case: format!("{}_rankP{}", inst.case, inst.rank_p),
                pass,
                detail: json!({"kappa": inst.coeffs.kappa}),
            }
        })
        .collect()
}

/// Engineered instances that fire the conditional eigenspace gates
/// (vii–x and iii need exact coefficient relations).
fn engineered_eigenspace_instances(seed: u64) -> Vec<(SwitchedSystemMatrices, &'static str)> {
    let mut out = Vec::new();
    let mut rng = stream(seed, Domain::Sweep, 0xE16, 7);
    let complete3 = laplacian(&Digraph::complete(3).unwrap());
    let ell = 3.0; // complete digraph on 3 nodes has eigenvalue 3
    let p2 = random_paracontracting(2, 0.3, 0.8, 1, true, &mut rng);

    // iii: μ = 0, η = κ/ℓ makes ρL − κI singular at the real λ_{1,2}(1).
    let kappa = 0.8;
    let c = McoCoefficients { mu: 0.0, eta: kappa / ell, kappa, h: 3.0 };
    out.push((
        SwitchedSystemMatrices::assemble(1, c, complete3.clone(), p2.clone()).unwrap(),
        "iii",
    ));
    // vii: κh = 1 with ηπL − κI singular at π = 1.
    let kappa = 0.5;
    let c = McoCoefficients { mu: 0.3, eta: kappa / ell, kappa, h: 1.0 / kappa };
    out.push((
        SwitchedSystemMatrices::assemble(2, c, complete3.clone(), p2.clone()).unwrap(),
        "vii",
    ));
    // viii: μ = η = 0, h = 1 + 1/κ.
    let kappa = 0.8;
    let c = McoCoefficients { mu: 0.0, eta: 0.0, kappa, h: 1.0 + 1.0 / kappa };
    out.push((
        SwitchedSystemMatrices::assemble(1, c, complete3.clone(), p2.clone()).unwrap(),
        "viii",
    ));
    // ix and v: disconnected components give ker(L) vectors vanishing at j.
    let mut adj = vec![0u8; 25];
    for (a, b) in [(0usize, 1usize), (1, 0), (2, 3), (3, 4), (4, 2)] {
        adj[a * 5 + b] = 1;
    }
    let disconnected = laplacian(&Digraph::new(5, adj).unwrap());
    let kappa = 0.6;
    let c = McoCoefficients { mu: 0.2, eta: 0.4, kappa, h: 1.0 + 1.0 / kappa };
    out.push((
        SwitchedSystemMatrices::assemble(1, c, disconnected.clone(), p2.clone()).unwrap(),
        "ix",
    ));
    let c = McoCoefficients { mu: 0.3, eta: 0.4, kappa: 0.6, h: 0.9 };
    out.push((
        SwitchedSystemMatrices::assemble(1, c, disconnected, p2.clone()).unwrap(),
        "v",
    ));
    // x: κh ≠ 1 with ηℓ = κ + 1 − κh at π = 1.
    let kappa = 0.9;
    let h = 1.4;
    let c = McoCoefficients { mu: 0.0, eta: (kappa + 1.0 - kappa * h) / ell, kappa, h };
    out.push((
        SwitchedSystemMatrices::assemble(2, c, complete3.clone(), p2.clone()).unwrap(),
        "x",
    ));
    // vi: μ = η = 0 with generic κ, h.
    let c = McoCoefficients { mu: 0.0, eta: 0.0, kappa: 0.7, h: 1.1 };
    out.push((
        SwitchedSystemMatrices::assemble(2, c, complete3, p2).unwrap(),
        "vi",
    ));
    out
}

fn sweep_lemma_7(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    let mut records: Vec<VerifyRecord> = (0..cfg.instances)
        .into_par_iter()
        .flat_map(|idx| {
            // Containment assumes rank(P) = n.
            let inst = draw_instance(cfg, idx, tol, None, true);
            let sys = SwitchedSystemMatrices::assemble(
                inst.j,
                inst.coeffs,
                inst.l.clone(),
                inst.p.clone(),
            )
            .unwrap();
            let pred = predicted_spectrum_a(&inst.coeffs, &inst.l, &inst.p, tol).unwrap();
            let rep = containment_check(&sys.a_plus_h_ac(), &pred, 1e-6).unwrap();
            let mut recs = vec![VerifyRecord {
                lemma: "7".into(),
                instance_seed: inst.seed,
                n: inst.n,
                q: inst.q,
                case: format!("containment_{}", inst.case),
                pass: rep.pass,
                detail: json!({
                    "worst_distance": rep.worst_distance,
                    "defective_matches": rep.defective_matches,
                    "mismatches": rep.mismatches.len(),
                }),
            }];
            for case in EigenspaceCase::all() {
                let r = verify_eigenspace_case(&sys, case, tol).unwrap();
                if r.applicable {
                    recs.push(VerifyRecord {
                        lemma: "7".into(),
                        instance_seed: inst.seed,
                        n: inst.n,
                        q: inst.q,
                        case: format!("eigenspace_{}", case.label()),
                        pass: r.constructed > 0 && r.max_relative_residual <= 1e-7,
                        detail: json!({
                            "constructed": r.constructed,
                            "machinery_vectors": r.machinery_vectors,
                            "max_relative_residual": r.max_relative_residual,
                        }),
                    });
                }
            }
            recs
        })
        .collect();
    // Gate-firing instances for the conditional cases.
    for (sys, label) in engineered_eigenspace_instances(cfg.seed) {
        for case in EigenspaceCase::all() {
            let r = verify_eigenspace_case(&sys, case, tol).unwrap();
            if r.applicable {
                records.push(VerifyRecord {
                    lemma: "7".into(),
                    instance_seed: cfg.seed,
                    n: sys.n,
                    q: sys.q,
                    case: format!("eigenspace_{}_engineered_{}", case.label(), label),
                    pass: r.constructed > 0 && r.max_relative_residual <= 1e-7,
                    detail: json!({
                        "constructed": r.constructed,
                        "max_relative_residual": r.max_relative_residual,
                    }),
                });
            }
        }
    }
    records
}

fn sweep_lemma_8(cfg: &VerifyConfig, tol: &ToleranceConfig) -> Vec<VerifyRecord> {
    (0..cfg.instances)
        .into_par_iter()
        .flat_map(|idx| {
            let inst = draw_instance(cfg, idx, tol, None, true);
            let sys = SwitchedSystemMatrices::assemble(
                inst.j,
                inst.coeffs,
                inst.l.clone(),
                inst.p.clone(),
            )
            .unwrap();
            let m = sys.b_plus_h2_ac();
            let pred = predicted_spectrum_b(&inst.coeffs, &inst.l, &inst.p, tol).unwrap();
            let rep = containment_check(&m, &pred, 1e-6).unwrap();
            let mut recs = vec![VerifyRecord {
                lemma: "8".into(),
                instance_seed: inst.seed,
                n: inst.n,
                q: inst.q,
                case: format!("containment_{}", inst.case),
                pass: rep.pass,
                detail: json!({
                    "worst_distance": rep.worst_distance,
                    "defective_matches": rep.defective_matches,
                }),
            }];
            if inst.coeffs.h * inst.coeffs.kappa != 0.0 {
                let ss = crate::semistability::is_semisimple_zero(&m, tol).unwrap();
                recs.push(VerifyRecord {
                    lemma: "8".into(),
                    instance_seed: inst.seed,
                    n: inst.n,
                    q: inst.q,
                    case: "zero_semisimple".into(),
                    pass: ss,
                    detail: json!({"h_kappa": inst.coeffs.h * inst.coeffs.kappa}),
                });
            }
            recs
        })
        .collect()
}

/// Run the requested sweeps and return all records.
pub fn run_sweeps(cfg: &VerifyConfig) -> Result<Vec<VerifyRecord>> {
    let tol = ToleranceConfig::default();
    let mut records = Vec::new();
    if cfg.wants("EW") {
        records.extend(sweep_lemma_ew(cfg, &tol));
    }
    if cfg.wants("ker") {
        records.extend(sweep_lemma_ker(cfg, &tol));
    }
    if cfg.wants("S") {
        records.extend(sweep_lemma_s(cfg, &tol));
    }
    if cfg.wants("1") {
        records.extend(sweep_lemma_1(cfg, &tol));
    }
    if cfg.wants("3") {
        records.extend(sweep_lemma_3(cfg, &tol));
    }
    if cfg.wants("4") {
        records.extend(sweep_lemma_4(cfg, &tol));
    }
    if cfg.wants("5") {
        records.extend(sweep_lemma_5(cfg, &tol));
    }
    if cfg.wants("6") {
        records.extend(sweep_lemma_6(cfg, &tol));
    }
    if cfg.wants("7") {
        records.extend(sweep_lemma_7(cfg, &tol));
    }
    if cfg.wants("8") {
        records.extend(sweep_lemma_8(cfg, &tol));
    }
    Ok(records)
}

/// Write verify.jsonl and verify_summary.json; returns true when every
/// record passed.
pub fn cmd_verify(config_path: &Path, out: &Path) -> Result<bool> {
    let cfg: VerifyConfig = super::read_config(config_path)?;
    std::fs::create_dir_all(out)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| crate::Error::InvalidConfig(format!("worker pool: {e}")))?;
    let records = pool.install(|| run_sweeps(&cfg))?;

    let mut jsonl = fs::File::create(out.join("verify.jsonl"))?;
    for r in &records {
        serde_json::to_writer(&mut jsonl, r)?;
        jsonl.write_all(b"\n")?;
    }

    let mut per_lemma: HashMap<String, (u64, u64)> = HashMap::new();
    let mut failing_seeds: Vec<u64> = Vec::new();
    for r in &records {
        let entry = per_lemma.entry(r.lemma.clone()).or_insert((0, 0));
        entry.1 += 1;
        if r.pass {
            entry.0 += 1;
        } else {
            failing_seeds.push(r.instance_seed);
        }
    }
    failing_seeds.sort_unstable();
    failing_seeds.dedup();
    let mut lemma_names: Vec<&String> = per_lemma.keys().collect();
    lemma_names.sort();
    let summary = json!({
        "total": records.len(),
        "passed": records.iter().filter(|r| r.pass).count(),
        "per_lemma": lemma_names.iter().map(|name| {
            let (pass, total) = per_lemma[name.as_str()];
            json!({"lemma": name, "passed": pass, "total": total})
        }).collect::<Vec<_>>(),
        "failing_seeds": failing_seeds,
    });
    let mut sfile = fs::File::create(out.join("verify_summary.json"))?;
    serde_json::to_writer_pretty(&mut sfile, &summary)?;
    sfile.write_all(b"\n")?;
    Ok(records.iter().all(|r| r.pass))
}
