//! The paracontracting coordination optimizer.
//!
//! Two update rules share the swarm machinery:
//!
//! * `algorithm1`: v_k ← P v_k + ηPΣ(v_j−v_k) + μPΣ(x_j−x_k) + κP(p−x_k),
//!   x_k ← x_k + v_k, per-agent coefficient draws, personal bests, and the
//!   sequential best-update loop;
//! * `theorem`: the switched-linear form, one coefficient draw per
//!   iteration — a full iteration equals Z⁺ = (I + hA^[j] + h²A_c)Z, or
//!   Z⁺ = (I + B^[j] + h²A_c)Z when the incumbent best is beaten.
//!
//! Every random draw comes from a stream keyed by (seed, domain, t, k),
//! so results are bitwise identical for any worker count and any agent
//! evaluation order.

mod objective;
mod trace;

pub use objective::Objective;
pub use trace::{convergence_metrics, ConvergenceMetrics, IterationRecord, IterationTrace};

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{gds_topology, laplacian, Digraph, GdsSchedule};
use crate::linalg::{numerical_rank, Mat, Vector};
use crate::rngkey::{stream, Domain};
use crate::semistability::random_paracontracting;
use crate::switched::{
    check_theorem_conditions, transition_matrices_semistable, McoCoefficients,
    SwitchedSystemMatrices,
};
use crate::{Error, Result, ToleranceConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Algorithm1,
    Theorem,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Coefficient law Ω: either a finite set sampled uniformly per
/// coefficient, or independent uniform ranges per coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OmegaSpec {
    Set(Vec<f64>),
    Ranges {
        ranges: OmegaRanges,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OmegaRanges {
    pub eta: [f64; 2],
    pub mu: [f64; 2],
    pub kappa: [f64; 2],
    #[serde(default = "unit_range")]
    pub h: [f64; 2],
}

fn unit_range() -> [f64; 2] {
    [1.0, 1.0]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub all_info: Vec<usize>,
    #[serde(default = "default_regen")]
    pub regenerate_every: usize,
}

fn default_regen() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PMatrixSpec {
    pub spectrum_min: f64,
    pub spectrum_max: f64,
    #[serde(default = "default_ones")]
    pub ones: usize,
}

fn default_ones() -> usize {
    1
}

/// Optional enforcement of the literal theorem hypotheses in the
/// theorem-mode sampling gate. All default to off; H1 and direct
/// transition semistability are always enforced.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremGate {
    #[serde(default)]
    pub enforce_h2: bool,
    #[serde(default)]
    pub enforce_h3: bool,
    #[serde(default)]
    pub enforce_h4: bool,
    #[serde(default)]
    pub enforce_h5: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: usize,
    pub q: usize,
    pub objective: String,
    pub bounds: Bounds,
    pub omega: OmegaSpec,
    pub topology: TopologySpec,
    pub p_matrix: PMatrixSpec,
    pub max_iters: usize,
    pub seed: u64,
    #[serde(default = "default_stop_tol")]
    pub stop_tol: f64,
    #[serde(default = "default_stop_window")]
    pub stop_window: usize,
    #[serde(default)]
    pub velocity_bounds: Option<Bounds>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub theorem_gate: Option<TheoremGate>,
}

fn default_stop_tol() -> f64 {
    1e-10
}

fn default_stop_window() -> usize {
    2000
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.q < 2 {
            return Err(Error::InvalidConfig("need n >= 1 and q >= 2".into()));
        }
        if self.bounds.lower.len() != self.n || self.bounds.upper.len() != self.n {
            return Err(Error::InvalidConfig("bounds must have length n".into()));
        }
        for i in 0..self.n {
            if !(self.bounds.lower[i] < self.bounds.upper[i]) {
                return Err(Error::InvalidConfig(
                    "bounds.lower must be strictly below bounds.upper".into(),
                ));
            }
        }
        if let Some(vb) = &self.velocity_bounds {
            if vb.lower.len() != self.n || vb.upper.len() != self.n {
                return Err(Error::InvalidConfig("velocity_bounds must have length n".into()));
            }
        }
        match &self.omega {
            OmegaSpec::Set(s) => {
                if s.is_empty() {
                    return Err(Error::InvalidConfig("omega set must be nonempty".into()));
                }
                if s.iter().any(|v| *v < 0.0 || !v.is_finite()) {
                    return Err(Error::InvalidConfig("omega values must be finite and >= 0".into()));
                }
            }
            OmegaSpec::Ranges { ranges } => {
                for r in [ranges.eta, ranges.mu, ranges.kappa, ranges.h] {
                    if !(r[0] <= r[1]) || r[0] < 0.0 || !r[1].is_finite() {
                        return Err(Error::InvalidConfig("omega ranges must be ordered and >= 0".into()));
                    }
                }
            }
        }
        if self.max_iters < 1 && self.mode == Mode::Theorem {
            // max_iters = 0 returns the initial best; allowed.
        }
        if self.p_matrix.spectrum_min <= 0.0
            || self.p_matrix.spectrum_max > 1.0
            || self.p_matrix.spectrum_min > self.p_matrix.spectrum_max
        {
            return Err(Error::InvalidConfig(
                "p_matrix spectrum must satisfy 0 < min <= max <= 1".into(),
            ));
        }
        if Objective::from_name(&self.objective).is_none() {
            return Err(Error::InvalidConfig(format!(
                "unknown objective '{}'",
                self.objective
            )));
        }
        GdsSchedule::new(self.q, self.topology.all_info.clone(), self.topology.regenerate_every)?;
        Ok(())
    }

    /// Default algorithm1-mode configuration on the sphere objective.
    pub fn default_algorithm1(n: usize, q: usize, seed: u64) -> Self {
        Self {
            mode: Mode::Algorithm1,
            n,
            q,
            objective: "sphere".into(),
            bounds: Bounds {
                lower: vec![-5.0; n],
                upper: vec![5.0; n],
            },
            omega: OmegaSpec::Ranges {
                ranges: OmegaRanges {
                    eta: [0.0, 0.1],
                    mu: [0.0, 0.1],
                    kappa: [0.0, 0.15],
                    h: [1.0, 1.0],
                },
            },
            topology: TopologySpec {
                all_info: vec![1, 2],
                regenerate_every: 1,
            },
            p_matrix: PMatrixSpec {
                spectrum_min: 0.98,
                spectrum_max: 0.9999,
                ones: 1,
            },
            max_iters: 2000,
            seed,
            stop_tol: default_stop_tol(),
            stop_window: default_stop_window(),
            velocity_bounds: None,
            workers: None,
            theorem_gate: None,
        }
    }
}

/// Positions, velocities, bests. Personal bests are maintained in
/// algorithm1 mode only.
#[derive(Debug, Clone)]
pub struct SwarmState {
    pub positions: Vec<Vector>,
    pub velocities: Vec<Vector>,
    pub personal_bests: Vec<Vector>,
    pub personal_best_f: Vec<f64>,
    pub global_best: Vector,
    pub global_best_f: f64,
    pub iteration: usize,
}

impl SwarmState {
    fn ensure_finite(&self, iter: usize) -> Result<()> {
        let ok = self
            .positions
            .iter()
            .chain(self.velocities.iter())
            .all(|v| v.iter().all(|x| x.is_finite()))
            && self.global_best.iter().all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::NumericAbort { iter })
        }
    }
}

/// Uniform swarm initialization; p_k = x_k, p = argmin f(p_k).
pub fn init_swarm(config: &RunConfig, objective: Objective) -> Result<SwarmState> {
    let n = config.n;
    let (vlo, vhi): (Vec<f64>, Vec<f64>) = match &config.velocity_bounds {
        Some(vb) => (vb.lower.clone(), vb.upper.clone()),
        None => (vec![-1.0; n], vec![1.0; n]),
    };
    let mut positions = Vec::with_capacity(config.q);
    let mut velocities = Vec::with_capacity(config.q);
    for k in 0..config.q {
        let mut rng = stream(config.seed, Domain::Init, 0, k as u64);
        let x = Vector::from_fn(n, |i, _| {
            rng.gen_range(config.bounds.lower[i]..=config.bounds.upper[i])
        });
        let v = Vector::from_fn(n, |i, _| {
            if vlo[i] == vhi[i] {
                vlo[i]
            } else {
                rng.gen_range(vlo[i]..=vhi[i])
            }
        });
        positions.push(x);
        velocities.push(v);
    }
    let personal_bests = positions.clone();
    let personal_best_f: Vec<f64> = personal_bests.iter().map(|x| objective.eval(x)).collect();
    if personal_best_f.iter().any(|f| !f.is_finite()) {
        return Err(Error::NumericAbort { iter: 0 });
    }
    let best = argmin(&personal_best_f);
    Ok(SwarmState {
        global_best: personal_bests[best].clone(),
        global_best_f: personal_best_f[best],
        positions,
        velocities,
        personal_bests,
        personal_best_f,
        iteration: 0,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// One coefficient draw. Algorithm1 mode ignores h (position steps are
/// unit steps); theorem mode draws h from the same law.
pub fn sample_coefficients<R: Rng>(omega: &OmegaSpec, rng: &mut R, mode: Mode) -> McoCoefficients {
    let draw = |rng: &mut R, range: [f64; 2]| {
        if range[0] == range[1] {
            range[0]
        } else {
            rng.gen_range(range[0]..range[1])
        }
    };
    match omega {
        OmegaSpec::Set(values) => {
            let pick = |rng: &mut R| values[rng.gen_range(0..values.len())];
            let eta = pick(rng);
            let mu = pick(rng);
            let kappa = pick(rng);
            let h = if mode == Mode::Theorem { pick(rng).max(f64::MIN_POSITIVE) } else { 1.0 };
            McoCoefficients { mu, eta, kappa, h }
        }
        OmegaSpec::Ranges { ranges } => {
            let eta = draw(rng, ranges.eta);
            let mu = draw(rng, ranges.mu);
            let kappa = draw(rng, ranges.kappa);
            let h = if mode == Mode::Theorem {
                draw(rng, ranges.h).max(f64::MIN_POSITIVE)
            } else {
                1.0
            };
            McoCoefficients { mu, eta, kappa, h }
        }
    }
}

/// Snapshot of the state shared by every agent update within one
/// iteration (the C/D temporaries of the parallel loop).
pub struct Snapshot {
    pub positions: Vec<Vector>,
    pub velocities: Vec<Vector>,
    pub global_best: Vector,
}

/// Velocity update for all agents against a common snapshot. Neighbor
/// sums use the Laplacian identity Σ_{j∈N_k}(y_j − y_k) = −(L·Y)_k.
/// Theorem mode carries the step factor h on the coupling terms and an
/// identity leading term; algorithm1 mode applies P to the old velocity.
pub fn step_velocity(
    snapshot: &Snapshot,
    coeffs: &[McoCoefficients],
    p: &Mat,
    topology: &Digraph,
    mode: Mode,
) -> Vec<Vector> {
    let q = snapshot.positions.len();
    let n = snapshot.positions[0].len();
    let l = laplacian(topology);
    let mut lx: Vec<Vector> = vec![Vector::zeros(n); q];
    let mut lv: Vec<Vector> = vec![Vector::zeros(n); q];
    for k in 0..q {
        for j in 0..q {
            let w = l[(k, j)];
            if w != 0.0 {
                lx[k] += w * &snapshot.positions[j];
                lv[k] += w * &snapshot.velocities[j];
            }
        }
    }
    (0..q)
        .map(|k| {
            let c = &coeffs[k.min(coeffs.len() - 1)];
            let attract = &snapshot.global_best - &snapshot.positions[k];
            match mode {
                Mode::Algorithm1 => {
                    p * &snapshot.velocities[k]
                        + p * &lv[k] * (-c.eta)
                        + p * &lx[k] * (-c.mu)
                        + p * attract * c.kappa
                }
                Mode::Theorem => {
                    &snapshot.velocities[k]
                        + p * &lv[k] * (-c.h * c.eta)
                        + p * &lx[k] * (-c.h * c.mu)
                        + p * attract * (c.h * c.kappa)
                }
            }
        })
        .collect()
}

/// x_k += v_k (algorithm1) or x_k += h·v_k (theorem), with the velocities
/// already advanced.
pub fn step_position(positions: &[Vector], new_velocities: &[Vector], mode: Mode, h: f64) -> Vec<Vector> {
    let factor = match mode {
        Mode::Algorithm1 => 1.0,
        Mode::Theorem => h,
    };
    positions
        .iter()
        .zip(new_velocities)
        .map(|(x, v)| x + factor * v)
        .collect()
}

/// Algorithm1 best update: the sequential per-agent loop, then a final
/// sweep so the network best never trails a personal best.
pub fn update_global_best_algorithm1(
    state: &mut SwarmState,
    coeffs: &[McoCoefficients],
    objective: Objective,
    fx: &[f64],
) {
    let q = state.positions.len();
    for k in 0..q {
        if fx[k] < state.personal_best_f[k] {
            state.personal_bests[k] = state.positions[k].clone();
            state.personal_best_f[k] = fx[k];
            let kappa = coeffs[k.min(coeffs.len() - 1)].kappa;
            state.global_best =
                &state.global_best + kappa * (&state.personal_bests[k] - &state.global_best);
            state.global_best_f = objective.eval(&state.global_best);
            if state.personal_best_f[k] < state.global_best_f {
                state.global_best = state.personal_bests[k].clone();
                state.global_best_f = state.personal_best_f[k];
            }
        }
    }
    let best = argmin(&state.personal_best_f);
    if state.personal_best_f[best] < state.global_best_f {
        state.global_best = state.personal_bests[best].clone();
        state.global_best_f = state.personal_best_f[best];
    }
}

/// Theorem-mode best update against the snapshot positions: jump to the
/// best old position when it beats the incumbent, else drag by hκ.
pub fn update_global_best_theorem(
    state: &mut SwarmState,
    snapshot_positions: &[Vector],
    fx_old: &[f64],
    coeffs: &McoCoefficients,
    objective: Objective,
) {
    let j = argmin(fx_old);
    let xj = &snapshot_positions[j];
    if fx_old[j] < state.global_best_f {
        state.global_best = xj.clone();
    } else {
        state.global_best =
            &state.global_best + (coeffs.h * coeffs.kappa) * (xj - &state.global_best);
    }
    state.global_best_f = objective.eval(&state.global_best);
}

/// Outcome of a full optimization run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub best_x: Vector,
    pub best_f: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: IterationTrace,
}

/// Transition-gate verdict cache for theorem-mode draws, keyed by the
/// coefficient bits, the adjacency bytes, and j.
type GateCache = HashMap<(u64, u64, u64, u64, Vec<u8>, usize), bool>;

fn gate_key(c: &McoCoefficients, g: &Digraph, j: usize) -> (u64, u64, u64, u64, Vec<u8>, usize) {
    let q = g.node_count();
    let mut adj = Vec::with_capacity(q * q);
    for i in 0..q {
        for jj in 0..q {
            adj.push(g.edge(i, jj));
        }
    }
    (
        c.mu.to_bits(),
        c.eta.to_bits(),
        c.kappa.to_bits(),
        c.h.to_bits(),
        adj,
        j,
    )
}

/// The theorem-mode sampling battery. H1 plus direct discrete-time
/// semistability of both transition matrices is always required; the
/// enforce_* flags add the literal H2–H5 conditions (H4 can never pass,
/// so enforcing it reproduces the infeasible-Ω diagnostic).
fn theorem_draw_admissible(
    coeffs: &McoCoefficients,
    g: &Digraph,
    p: &Mat,
    j: usize,
    h1_precomputed: bool,
    gate: &TheoremGate,
    tol: &ToleranceConfig,
    cache: &mut GateCache,
) -> Result<bool> {
    if !h1_precomputed {
        return Ok(false);
    }
    let key = gate_key(coeffs, g, j);
    if let Some(hit) = cache.get(&key) {
        return Ok(*hit);
    }
    let inst = SwitchedSystemMatrices::assemble(j, *coeffs, laplacian(g), p.clone())?;
    let mut ok = transition_matrices_semistable(&inst, tol)?;
    if ok && (gate.enforce_h2 || gate.enforce_h3 || gate.enforce_h4 || gate.enforce_h5) {
        let rep = check_theorem_conditions(&inst, tol)?;
        ok = (!gate.enforce_h2 || rep.h2)
            && (!gate.enforce_h3 || rep.h3)
            && (!gate.enforce_h4 || rep.h4)
            && (!gate.enforce_h5 || rep.h5);
    }
    cache.insert(key, ok);
    Ok(ok)
}

/// Run the optimizer to completion.
pub fn run(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let tol = ToleranceConfig::default();
    let objective = Objective::from_name(&config.objective)
        .ok_or_else(|| Error::InvalidConfig("unknown objective".into()))?;
    let schedule = GdsSchedule::new(
        config.q,
        config.topology.all_info.clone(),
        config.topology.regenerate_every,
    )?;
    let mut p_rng = stream(config.seed, Domain::PMatrix, 0, 0);
    let p = random_paracontracting(
        config.n,
        config.p_matrix.spectrum_min,
        config.p_matrix.spectrum_max,
        config.p_matrix.ones,
        true,
        &mut p_rng,
    );
    let h1 = {
        let pm = crate::semistability::ParaMatrix::certify(p.clone(), &tol)?;
        let cert = pm.certification;
        cert.norm_le_one
            && cert.semistable
            && cert.kernel_condition
            && numerical_rank(&p, &tol)? == config.n
    };
    let gate = config.theorem_gate.clone().unwrap_or_default();
    let workers = config.workers.unwrap_or(1).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;

    let mut state = init_swarm(config, objective)?;
    let mut trace = IterationTrace::new();
    let mut topology: Option<Digraph> = None;
    let mut cache: GateCache = HashMap::new();
    let mut quiet = 0usize;
    let mut converged = false;
    let mut last_best_f = state.global_best_f;
    let mut last_best_x = state.global_best.clone();

    for t in 0..config.max_iters {
        state.iteration = t;
        if topology.is_none() || t % schedule.regenerate_every == 0 {
            let mut rng = stream(config.seed, Domain::Topology, t as u64, 0);
            topology = Some(gds_topology(&schedule, &mut rng)?);
        }
        let g = topology.as_ref().unwrap();

        // Objective evaluations of the snapshot positions (the only
        // concurrent section; values are position-indexed so the worker
        // count cannot reorder anything).
        let fx_old: Vec<f64> = pool.install(|| {
            use rayon::prelude::*;
            state
                .positions
                .par_iter()
                .map(|x| objective.eval(x))
                .collect()
        });
        if fx_old.iter().any(|f| !f.is_finite()) {
            return Err(Error::NumericAbort { iter: t });
        }

        // Coefficient draws.
        let (coeffs, condition_flags) = match config.mode {
            Mode::Algorithm1 => {
                let per_agent: Vec<McoCoefficients> = (0..config.q)
                    .map(|k| {
                        let mut rng =
                            stream(config.seed, Domain::Coefficients, t as u64, k as u64 + 1);
                        sample_coefficients(&config.omega, &mut rng, Mode::Algorithm1)
                    })
                    .collect();
                (per_agent, None)
            }
            Mode::Theorem => {
                let j = argmin(&fx_old) + 1;
                let mut rng = stream(config.seed, Domain::Coefficients, t as u64, 0);
                let mut accepted = None;
                for _attempt in 0..1000 {
                    let c = sample_coefficients(&config.omega, &mut rng, Mode::Theorem);
                    if theorem_draw_admissible(&c, g, &p, j, h1, &gate, &tol, &mut cache)? {
                        accepted = Some(c);
                        break;
                    }
                }
                let c = accepted.ok_or(Error::InfeasibleOmega(1000))?;
                let flags = trace::ConditionFlags {
                    h1,
                    semistable: true,
                    h4_norm_a: None,
                };
                (vec![c; 1], Some(flags))
            }
        };

        // Snapshot, then the simultaneous velocity/position updates.
        let snapshot = Snapshot {
            positions: state.positions.clone(),
            velocities: state.velocities.clone(),
            global_best: state.global_best.clone(),
        };
        let new_v = step_velocity(&snapshot, &coeffs, &p, g, config.mode);
        let new_x = step_position(&snapshot.positions, &new_v, config.mode, coeffs[0].h);
        state.velocities = new_v;
        state.positions = new_x;
        state.ensure_finite(t)?;

        let prev_best = state.global_best.clone();
        match config.mode {
            Mode::Algorithm1 => {
                let fx_new: Vec<f64> = pool.install(|| {
                    use rayon::prelude::*;
                    state
                        .positions
                        .par_iter()
                        .map(|x| objective.eval(x))
                        .collect()
                });
                if fx_new.iter().any(|f| !f.is_finite()) {
                    return Err(Error::NumericAbort { iter: t });
                }
                update_global_best_algorithm1(&mut state, &coeffs, objective, &fx_new);
            }
            Mode::Theorem => {
                update_global_best_theorem(
                    &mut state,
                    &snapshot.positions,
                    &fx_old,
                    &coeffs[0],
                    objective,
                );
            }
        }
        if !state.global_best_f.is_finite() {
            return Err(Error::NumericAbort { iter: t });
        }

        let max_speed = state
            .velocities
            .iter()
            .map(|v| v.norm())
            .fold(0.0_f64, f64::max);
        let spread = state
            .positions
            .iter()
            .map(|x| (x - &state.global_best).norm())
            .fold(0.0_f64, f64::max);
        let delta_p = (&state.global_best - &prev_best).norm();
        trace.push(IterationRecord {
            t,
            f_best: state.global_best_f,
            max_speed,
            spread,
            delta_p,
            coefficients: coeffs.clone(),
            topology_edges: g.neighbors_count_signature(),
            conditions: condition_flags,
        });

        // Stop when f(p) has settled for a full window.
        if (state.global_best_f - last_best_f).abs() < config.stop_tol {
            quiet += 1;
            if quiet >= config.stop_window {
                converged = true;
                last_best_f = state.global_best_f;
                last_best_x = state.global_best.clone();
                break;
            }
        } else {
            quiet = 0;
        }
        last_best_f = state.global_best_f;
        last_best_x = state.global_best.clone();
    }

    Ok(RunOutcome {
        best_x: last_best_x,
        best_f: last_best_f,
        iterations: trace.records.len(),
        converged,
        trace,
    })
}

impl Digraph {
    /// Compact per-node out-degree signature used as a topology id in
    /// traces.
    pub fn neighbors_count_signature(&self) -> u64 {
        let q = self.node_count();
        let mut h: u64 = 1469598103934665603;
        for i in 0..q {
            for j in 0..q {
                h ^= self.edge(i, j) as u64;
                h = h.wrapping_mul(1099511628211);
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_config(mode: Mode, n: usize, q: usize, seed: u64) -> RunConfig {
        let mut c = RunConfig::default_algorithm1(n, q, seed);
        c.mode = mode;
        c
    }

    #[test]
    fn init_swarm_degenerate_bounds() {
        let mut c = sphere_config(Mode::Algorithm1, 2, 4, 7);
        c.bounds = Bounds {
            lower: vec![1.0, 2.0],
            upper: vec![1.0 + 1e-300, 2.0 + 1e-300],
        };
        let s = init_swarm(&c, Objective::Sphere).unwrap();
        for x in &s.positions {
            assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn init_best_is_min_over_agents() {
        let c = sphere_config(Mode::Algorithm1, 2, 4, 11);
        let s = init_swarm(&c, Objective::Sphere).unwrap();
        let min_f = s
            .positions
            .iter()
            .map(|x| Objective::Sphere.eval(x))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(s.global_best_f, min_f);
    }

    #[test]
    fn init_deterministic_across_calls() {
        let c = sphere_config(Mode::Algorithm1, 3, 5, 99);
        let a = init_swarm(&c, Objective::Sphere).unwrap();
        let b = init_swarm(&c, Objective::Sphere).unwrap();
        for k in 0..5 {
            assert_eq!(a.positions[k], b.positions[k]);
            assert_eq!(a.velocities[k], b.velocities[k]);
        }
    }

    #[test]
    fn velocity_collapses_without_coefficients() {
        let c = McoCoefficients {
            mu: 0.0,
            eta: 0.0,
            kappa: 0.0,
            h: 1.0,
        };
        let g = Digraph::complete(3).unwrap();
        let p = Mat::identity(2, 2) * 0.9;
        let snapshot = Snapshot {
            positions: vec![Vector::from_vec(vec![1.0, 0.0]); 3],
            velocities: vec![
                Vector::from_vec(vec![0.5, -0.25]),
                Vector::from_vec(vec![1.0, 2.0]),
                Vector::from_vec(vec![0.0, 0.0]),
            ],
            global_best: Vector::zeros(2),
        };
        let out = step_velocity(&snapshot, &[c], &p, &g, Mode::Algorithm1);
        for (k, v) in out.iter().enumerate() {
            assert!((v - &p * &snapshot.velocities[k]).norm() < 1e-15);
        }
    }

    #[test]
    fn consensus_is_a_fixed_point() {
        let c = McoCoefficients {
            mu: 0.4,
            eta: 0.3,
            kappa: 0.8,
            h: 1.0,
        };
        let g = Digraph::complete(4).unwrap();
        let p = Mat::identity(2, 2) * 0.95;
        let point = Vector::from_vec(vec![0.3, -0.7]);
        let snapshot = Snapshot {
            positions: vec![point.clone(); 4],
            velocities: vec![Vector::zeros(2); 4],
            global_best: point.clone(),
        };
        for mode in [Mode::Algorithm1, Mode::Theorem] {
            let out = step_velocity(&snapshot, &[c], &p, &g, mode);
            for v in &out {
                assert!(v.norm() < 1e-15);
            }
        }
    }

    #[test]
    fn agent_order_permutation_invariance() {
        // Per-agent draws are keyed by (seed, t, k), so evaluating agents
        // in any order yields the same committed state.
        let config = sphere_config(Mode::Algorithm1, 2, 5, 23);
        let draws: Vec<McoCoefficients> = (0..config.q)
            .map(|k| {
                let mut rng = stream(config.seed, Domain::Coefficients, 3, k as u64 + 1);
                sample_coefficients(&config.omega, &mut rng, Mode::Algorithm1)
            })
            .collect();
        let reversed: Vec<McoCoefficients> = (0..config.q)
            .rev()
            .map(|k| {
                let mut rng = stream(config.seed, Domain::Coefficients, 3, k as u64 + 1);
                sample_coefficients(&config.omega, &mut rng, Mode::Algorithm1)
            })
            .rev()
            .collect();
        for (a, b) in draws.iter().zip(&reversed) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn max_iters_zero_returns_init_best() {
        let mut c = sphere_config(Mode::Algorithm1, 2, 4, 3);
        c.max_iters = 0;
        let out = run(&c).unwrap();
        let s = init_swarm(&c, Objective::Sphere).unwrap();
        assert_eq!(out.best_f, s.global_best_f);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn constant_objective_keeps_best_fixed() {
        let mut c = sphere_config(Mode::Theorem, 2, 4, 5);
        c.objective = "constant".into();
        c.omega = OmegaSpec::Ranges {
            ranges: OmegaRanges {
                eta: [0.2, 0.2],
                mu: [0.3, 0.3],
                kappa: [0.5, 0.5],
                h: [0.3, 0.3],
            },
        };
        c.max_iters = 3000;
        c.stop_tol = 0.0; // run the full horizon
        let out = run(&c).unwrap();
        let init = init_swarm(&c, Objective::Constant).unwrap();
        // f is constant, so the p-jump branch never fires after init and p
        // can only drag toward x_min = x_1 (lowest index); under the
        // contraction everything meets at a common point with v -> 0.
        assert_eq!(out.best_f, 0.0);
        assert!(out.trace.records.last().unwrap().max_speed < 1e-10);
        assert!(out.trace.records.last().unwrap().spread < 1e-8);
        drop(init);
    }

    #[test]
    fn theorem_iteration_matches_matrix_form() {
        // One theorem-mode iteration equals Z+ = (I + hA + h²A_c)Z off the
        // jump branch and (I + B + h²A_c)Z on it.
        let mut config = sphere_config(Mode::Theorem, 2, 3, 17);
        config.omega = OmegaSpec::Ranges {
            ranges: OmegaRanges {
                eta: [0.25, 0.25],
                mu: [0.15, 0.15],
                kappa: [0.5, 0.5],
                h: [0.2, 0.2],
            },
        };
        let objective = Objective::Sphere;
        let mut state = init_swarm(&config, objective).unwrap();
        let schedule = GdsSchedule::new(3, vec![1], 1).unwrap();
        let mut trng = stream(config.seed, Domain::Topology, 0, 0);
        let g = gds_topology(&schedule, &mut trng).unwrap();
        let mut prng = stream(config.seed, Domain::PMatrix, 0, 0);
        let p = random_paracontracting(2, 0.9, 0.99, 1, true, &mut prng);
        let coeffs = McoCoefficients {
            mu: 0.15,
            eta: 0.25,
            kappa: 0.5,
            h: 0.2,
        };

        for force_jump in [false, true] {
            if force_jump {
                // Make the incumbent beatable.
                state.global_best = Vector::from_vec(vec![50.0, 50.0]);
                state.global_best_f = objective.eval(&state.global_best);
            } else {
                state.global_best = Vector::zeros(2);
                state.global_best_f = 0.0;
            }
            let n = config.n;
            let q = config.q;
            let mut z = Vector::zeros(2 * n * q + n);
            for k in 0..q {
                for i in 0..n {
                    z[k * n + i] = state.positions[k][i];
                    z[n * q + k * n + i] = state.velocities[k][i];
                }
            }
            for i in 0..n {
                z[2 * n * q + i] = state.global_best[i];
            }
            let fx: Vec<f64> = state.positions.iter().map(|x| objective.eval(x)).collect();
            let j = argmin(&fx) + 1;
            let inst =
                SwitchedSystemMatrices::assemble(j, coeffs, laplacian(&g), p.clone()).unwrap();
            let jump = fx[j - 1] < state.global_best_f;
            assert_eq!(jump, force_jump);
            let m = if jump {
                inst.transition_b()
            } else {
                inst.transition_a()
            };
            let z_next = &m * &z;

            let snapshot = Snapshot {
                positions: state.positions.clone(),
                velocities: state.velocities.clone(),
                global_best: state.global_best.clone(),
            };
            let new_v = step_velocity(&snapshot, &[coeffs], &p, &g, Mode::Theorem);
            let new_x = step_position(&snapshot.positions, &new_v, Mode::Theorem, coeffs.h);
            let mut sim = state.clone();
            sim.velocities = new_v;
            sim.positions = new_x;
            update_global_best_theorem(&mut sim, &snapshot.positions, &fx, &coeffs, objective);

            let mut z_sim = Vector::zeros(2 * n * q + n);
            for k in 0..q {
                for i in 0..n {
                    z_sim[k * n + i] = sim.positions[k][i];
                    z_sim[n * q + k * n + i] = sim.velocities[k][i];
                }
            }
            for i in 0..n {
                z_sim[2 * n * q + i] = sim.global_best[i];
            }
            let rel = (&z_next - &z_sim).norm() / z_next.norm().max(1.0);
            assert!(rel < 1e-12, "matrix form mismatch {rel} (jump={jump})");
        }
    }

    #[test]
    fn run_rejects_bad_config() {
        let mut c = sphere_config(Mode::Algorithm1, 2, 4, 3);
        c.objective = "nonsense".into();
        assert!(matches!(run(&c), Err(Error::InvalidConfig(_))));
    }
}
