//! Single-instance analysis: build the switched-system matrices, print
//! ranks, kernels, predicted vs computed spectra, and the hypothesis
//! report.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::graph::{gds_topology, laplacian, Digraph, DigraphJson, GdsSchedule};
use crate::linalg::{complex_eigenvalues, null_space, numerical_rank, Mat};
use crate::rngkey::{stream, Domain};
use crate::semistability::random_paracontracting;
use crate::switched::{
    check_theorem_conditions, containment_check, predicted_rank_a, predicted_spectrum_a,
    predicted_spectrum_b, verify_eigenspace_case, EigenspaceCase, McoCoefficients,
    SwitchedSystemMatrices,
};
use crate::{Result, ToleranceConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeConfig {
    pub n: usize,
    pub q: usize,
    #[serde(default = "default_j")]
    pub j: usize,
    pub mu: f64,
    pub eta: f64,
    pub kappa: f64,
    pub h: f64,
    #[serde(default)]
    pub seed: u64,
    /// Explicit topology; omitted means a seeded GDS draw with the
    /// all-information group {1, 2} (or {1} when q = 2).
    #[serde(default)]
    pub graph: Option<DigraphJson>,
    /// Eigenvalues for the P matrix; omitted means a seeded draw from
    /// [0.3, 0.9] with one eigenvalue pinned to 1.
    #[serde(default)]
    pub p_spectrum: Option<Vec<f64>>,
}

fn default_j() -> usize {
    1
}

fn fmt_complex(z: crate::linalg::C64) -> String {
    if z.im.abs() < 1e-12 {
        format!("{:.6}", z.re)
    } else {
        format!("{:.6}{:+.6}i", z.re, z.im)
    }
}

/// Build the instance described by the config.
pub fn build_instance(cfg: &AnalyzeConfig) -> Result<SwitchedSystemMatrices> {
    let coeffs = McoCoefficients::new(cfg.mu, cfg.eta, cfg.kappa, cfg.h)?;
    let g: Digraph = match &cfg.graph {
        Some(json) => Digraph::try_from(json)?,
        None => {
            let all_info = if cfg.q > 2 { vec![1, 2] } else { vec![1] };
            let schedule = GdsSchedule::new(cfg.q, all_info, 1)?;
            let mut rng = stream(cfg.seed, Domain::Topology, 0, 0);
            gds_topology(&schedule, &mut rng)?
        }
    };
    if g.node_count() != cfg.q {
        return Err(crate::Error::InvalidConfig(
            "graph node count does not match q".into(),
        ));
    }
    let p = match &cfg.p_spectrum {
        Some(spec) => {
            if spec.len() != cfg.n {
                return Err(crate::Error::InvalidConfig(
                    "p_spectrum must have length n".into(),
                ));
            }
            let mut rng = stream(cfg.seed, Domain::PMatrix, 0, 0);
            let v = crate::semistability::random_orthogonal(cfg.n, &mut rng);
            let d = Mat::from_diagonal(&crate::linalg::Vector::from_vec(spec.clone()));
            &v * d * v.transpose()
        }
        None => {
            let mut rng = stream(cfg.seed, Domain::PMatrix, 0, 0);
            random_paracontracting(cfg.n, 0.3, 0.9, 1, true, &mut rng)
        }
    };
    SwitchedSystemMatrices::assemble(cfg.j, coeffs, laplacian(&g), p)
}

/// Write analysis.json and print the table. Returns the JSON document.
pub fn cmd_analyze(config_path: &Path, out: &Path) -> Result<serde_json::Value> {
    let cfg: AnalyzeConfig = super::read_config(config_path)?;
    let tol = ToleranceConfig::default();
    let inst = build_instance(&cfg)?;
    fs::create_dir_all(out)?;

    let a = &inst.a_j;
    let shifted = inst.a_plus_h_ac();
    let b_shifted = inst.b_plus_h2_ac();
    let rank_l = numerical_rank(&inst.l, &tol)?;
    let rank_p = numerical_rank(&inst.p, &tol)?;
    let rank_a = numerical_rank(a, &tol)?;
    let rank_pred = predicted_rank_a(&inst.coeffs, rank_l, rank_p, inst.n, inst.q);
    let kernel_a = null_space(a, &tol)?;
    let kernel_shifted = null_space(&shifted, &tol)?;

    let pred_a = predicted_spectrum_a(&inst.coeffs, &inst.l, &inst.p, &tol)?;
    let pred_b = predicted_spectrum_b(&inst.coeffs, &inst.l, &inst.p, &tol)?;
    let contain_a = containment_check(&shifted, &pred_a, 1e-6)?;
    let contain_b = containment_check(&b_shifted, &pred_b, 1e-6)?;
    let spec_a = complex_eigenvalues(&shifted)?;
    let spec_b = complex_eigenvalues(&b_shifted)?;
    let conditions = check_theorem_conditions(&inst, &tol)?;

    let mut eigenspace_reports = Vec::new();
    for case in EigenspaceCase::all() {
        let r = verify_eigenspace_case(&inst, case, &tol)?;
        eigenspace_reports.push(json!({
            "case": case.label(),
            "applicable": r.applicable,
            "constructed": r.constructed,
            "max_relative_residual": r.max_relative_residual,
        }));
    }

    let doc = json!({
        "n": inst.n,
        "q": inst.q,
        "j": inst.j,
        "coefficients": inst.coeffs,
        "rank": {
            "laplacian": rank_l,
            "p": rank_p,
            "a": rank_a,
            "a_predicted": rank_pred,
            "match": rank_a == rank_pred,
        },
        "kernel_dims": {
            "a": kernel_a.dim(),
            "a_plus_h_ac": kernel_shifted.dim(),
        },
        "spectrum_a": {
            "computed": spec_a.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "predicted": pred_a.values().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "containment_pass": contain_a.pass,
            "worst_distance": contain_a.worst_distance,
        },
        "spectrum_b": {
            "computed": spec_b.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "predicted": pred_b.values().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "containment_pass": contain_b.pass,
            "worst_distance": contain_b.worst_distance,
        },
        "conditions": conditions,
        "eigenspace_cases": eigenspace_reports,
    });

    let mut f = fs::File::create(out.join("analysis.json"))?;
    serde_json::to_writer_pretty(&mut f, &doc)?;
    f.write_all(b"\n")?;

    println!("instance: n={} q={} j={}", inst.n, inst.q, inst.j);
    println!(
        "coefficients: mu={} eta={} kappa={} h={}",
        inst.coeffs.mu, inst.coeffs.eta, inst.coeffs.kappa, inst.coeffs.h
    );
    println!("rank(L) = {rank_l}   rank(P) = {rank_p}");
    println!(
        "rank(A) = {rank_a}   closed form = {rank_pred}   {}",
        if rank_a == rank_pred { "match" } else { "MISMATCH" }
    );
    println!(
        "dim ker(A) = {}   dim ker(A + hA_c) = {}",
        kernel_a.dim(),
        kernel_shifted.dim()
    );
    println!(
        "spectrum containment: A {}   B {}",
        if contain_a.pass { "pass" } else { "FAIL" },
        if contain_b.pass { "pass" } else { "FAIL" }
    );
    println!(
        "hypotheses: H1={} H2={} H3={} H4={} H5={}   (‖I+hA+h²Ac‖ = {:.6}, ‖I+B+h²Ac‖ = {:.6})",
        conditions.h1,
        conditions.h2,
        conditions.h3,
        conditions.h4,
        conditions.h5,
        conditions.norm_transition_a,
        conditions.norm_transition_b
    );
    let mut spec_sorted = spec_a.clone();
    spec_sorted.sort_by(|x, y| (x.re, x.im).partial_cmp(&(y.re, y.im)).unwrap());
    println!(
        "spec(A + hA_c): {}",
        spec_sorted
            .iter()
            .map(|z| fmt_complex(*z))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(doc)
}
