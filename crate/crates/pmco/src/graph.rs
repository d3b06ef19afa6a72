//! Node-fixed dynamic digraphs, Laplacians, and the grouped directed
//! structure (GDS) topology generator.
//!
//! Convention: entry a[i][j] = 1 means node i has an information edge to
//! node j (i "listens to" j); degrees and Laplacians follow the row-sum
//! convention, so L·1 = 0 exactly.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::{complex_eigenvalues, Mat};
use crate::{Error, Result};

/// Directed graph snapshot with 0/1 adjacency and a zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    q: usize,
    adjacency: Vec<u8>,
}

impl Digraph {
    pub fn new(q: usize, adjacency: Vec<u8>) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidConfig("digraph needs at least 2 nodes".into()));
        }
        if adjacency.len() != q * q {
            return Err(Error::DimensionMismatch(format!(
                "adjacency has {} entries, expected {}",
                adjacency.len(),
                q * q
            )));
        }
        if adjacency.iter().any(|&a| a > 1) {
            return Err(Error::InvalidConfig("adjacency entries must be 0 or 1".into()));
        }
        for i in 0..q {
            if adjacency[i * q + i] != 0 {
                return Err(Error::InvalidConfig("adjacency diagonal must be zero".into()));
            }
        }
        Ok(Self { q, adjacency })
    }

    pub fn empty(q: usize) -> Result<Self> {
        Self::new(q, vec![0; q * q])
    }

    pub fn complete(q: usize) -> Result<Self> {
        let mut adj = vec![1u8; q * q];
        for i in 0..q {
            adj[i * q + i] = 0;
        }
        Self::new(q, adj)
    }

    pub fn node_count(&self) -> usize {
        self.q
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edge(i, j) != 0
    }

    pub fn edge(&self, i: usize, j: usize) -> u8 {
        self.adjacency[i * self.q + j]
    }

    /// Out-neighbors of node i: the j with a[i][j] = 1.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.q).filter(|&j| self.edge(i, j) == 1).collect()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.neighbors(i).len()
    }

    /// Induced subgraph adjacency over the given node set (order kept).
    fn induced(&self, nodes: &[usize]) -> Vec<u8> {
        let m = nodes.len();
        let mut adj = vec![0u8; m * m];
        for (a, &i) in nodes.iter().enumerate() {
            for (b, &j) in nodes.iter().enumerate() {
                adj[a * m + b] = self.edge(i, j);
            }
        }
        adj
    }
}

/// Diagonal out-degree matrix.
pub fn degree_matrix(g: &Digraph) -> Mat {
    let q = g.node_count();
    let mut d = Mat::zeros(q, q);
    for i in 0..q {
        d[(i, i)] = g.out_degree(i) as f64;
    }
    d
}

/// L = Δ − A; row sums are exactly zero.
pub fn laplacian(g: &Digraph) -> Mat {
    let q = g.node_count();
    let mut l = degree_matrix(g);
    for i in 0..q {
        for j in 0..q {
            l[(i, j)] -= g.edge(i, j) as f64;
        }
    }
    l
}

fn reachable_all(adj: &[u8], q: usize, start: usize, transpose: bool) -> bool {
    let mut seen = vec![false; q];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in 0..q {
            let e = if transpose { adj[v * q + u] } else { adj[u * q + v] };
            if e != 0 && !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == q
}

fn adj_strongly_connected(adj: &[u8], q: usize) -> bool {
    if q == 1 {
        return true;
    }
    reachable_all(adj, q, 0, false) && reachable_all(adj, q, 0, true)
}

/// Every node reaches every other node along directed edges.
pub fn is_strongly_connected(g: &Digraph) -> bool {
    adj_strongly_connected(&g.adjacency, g.node_count())
}

/// Every eigenvalue of −L has real part ≤ tol.
pub fn laplacian_spectrum_sign_check(l: &Mat, tol: f64) -> Result<bool> {
    let neg = -l.clone();
    let ev = complex_eigenvalues(&neg)?;
    Ok(ev.iter().all(|z| z.re <= tol))
}

/// Two-group GDS schedule: the all-information group hears everyone,
/// the half-information group never hears the all-information group.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GdsSchedule {
    pub q: usize,
    /// 1-based node ids of the all-information group.
    pub all_info_group: Vec<usize>,
    /// 1-based node ids of the half-information group (complement).
    pub half_info_group: Vec<usize>,
    /// Iterations between topology redraws.
    pub regenerate_every: usize,
}

impl GdsSchedule {
    pub fn new(q: usize, all_info: Vec<usize>, regenerate_every: usize) -> Result<Self> {
        if regenerate_every == 0 {
            return Err(Error::InvalidConfig("regenerate_every must be >= 1".into()));
        }
        if all_info.is_empty() || all_info.len() >= q {
            return Err(Error::InvalidConfig(
                "all-info group must be nonempty and a strict subset of the nodes".into(),
            ));
        }
        let mut seen = vec![false; q + 1];
        for &id in &all_info {
            if id == 0 || id > q || seen[id] {
                return Err(Error::InvalidConfig(format!(
                    "all-info group contains an invalid or repeated node id {id}"
                )));
            }
            seen[id] = true;
        }
        let half: Vec<usize> = (1..=q).filter(|i| !seen[*i]).collect();
        Ok(Self {
            q,
            all_info_group: all_info,
            half_info_group: half,
            regenerate_every,
        })
    }
}

/// Random strongly connected wiring inside a group: a directed Hamiltonian
/// cycle over a random node order, plus each remaining edge with
/// probability 0.3.
fn wire_group<R: Rng>(adj: &mut [u8], q: usize, nodes0: &[usize], rng: &mut R) {
    let m = nodes0.len();
    if m <= 1 {
        return;
    }
    let mut order: Vec<usize> = nodes0.to_vec();
    for i in (1..m).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    for w in 0..m {
        let a = order[w];
        let b = order[(w + 1) % m];
        adj[a * q + b] = 1;
    }
    for &a in nodes0 {
        for &b in nodes0 {
            if a != b && rng.gen::<f64>() < 0.3 {
                adj[a * q + b] = 1;
            }
        }
    }
}

/// Draw a GDS topology: both induced group subgraphs strongly connected,
/// all-info nodes hear every half-info node, half-info nodes never hear
/// all-info nodes.
pub fn gds_topology<R: Rng>(schedule: &GdsSchedule, rng: &mut R) -> Result<Digraph> {
    let q = schedule.q;
    let all0: Vec<usize> = schedule.all_info_group.iter().map(|i| i - 1).collect();
    let half0: Vec<usize> = schedule.half_info_group.iter().map(|i| i - 1).collect();
    let mut adj = vec![0u8; q * q];
    wire_group(&mut adj, q, &all0, rng);
    wire_group(&mut adj, q, &half0, rng);
    for &a in &all0 {
        for &b in &half0 {
            adj[a * q + b] = 1;
        }
    }
    let g = Digraph::new(q, adj)?;
    debug_assert!(adj_strongly_connected(&g.induced(&all0), all0.len()));
    debug_assert!(adj_strongly_connected(&g.induced(&half0), half0.len()));
    Ok(g)
}

/// Structural check for a GDS output: the three clauses of the generator's
/// contract, asserted directly with no tolerance.
pub fn gds_structure_ok(g: &Digraph, schedule: &GdsSchedule) -> bool {
    let all0: Vec<usize> = schedule.all_info_group.iter().map(|i| i - 1).collect();
    let half0: Vec<usize> = schedule.half_info_group.iter().map(|i| i - 1).collect();
    let groups_ok = adj_strongly_connected(&g.induced(&all0), all0.len())
        && adj_strongly_connected(&g.induced(&half0), half0.len());
    let hears_all = all0
        .iter()
        .all(|&a| half0.iter().all(|&b| g.edge(a, b) == 1));
    let half_deaf = half0
        .iter()
        .all(|&b| all0.iter().all(|&a| g.edge(b, a) == 0));
    groups_ok && hears_all && half_deaf
}

/// Adjacency-list JSON form: {"q": int, "edges": [[i, j], ...]} with
/// 1-based node ids.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DigraphJson {
    pub q: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Digraph> for DigraphJson {
    fn from(g: &Digraph) -> Self {
        let q = g.node_count();
        let mut edges = Vec::new();
        for i in 0..q {
            for j in 0..q {
                if g.edge(i, j) == 1 {
                    edges.push([i + 1, j + 1]);
                }
            }
        }
        Self { q, edges }
    }
}

impl TryFrom<&DigraphJson> for Digraph {
    type Error = Error;

    fn try_from(json: &DigraphJson) -> Result<Digraph> {
        let q = json.q;
        let mut adj = vec![0u8; q * q];
        for &[i, j] in &json.edges {
            if i == 0 || j == 0 || i > q || j > q {
                return Err(Error::InvalidConfig(format!("edge [{i},{j}] out of range")));
            }
            if i == j {
                return Err(Error::InvalidConfig("self-loops are not allowed".into()));
            }
            adj[(i - 1) * q + (j - 1)] = 1;
        }
        Digraph::new(q, adj)
    }
}

/// Uniform random digraph with edge probability p (test instrumentation
/// for the verification sweeps; not a GDS draw).
pub fn random_digraph<R: Rng>(q: usize, p: f64, rng: &mut R) -> Result<Digraph> {
    let mut adj = vec![0u8; q * q];
    for i in 0..q {
        for j in 0..q {
            if i != j && rng.gen::<f64>() < p {
                adj[i * q + j] = 1;
            }
        }
    }
    Digraph::new(q, adj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngkey::{stream, Domain};
    use crate::ToleranceConfig;

    #[test]
    fn degree_and_laplacian_basics() {
        let empty = Digraph::empty(3).unwrap();
        assert_eq!(degree_matrix(&empty), Mat::zeros(3, 3));
        assert_eq!(laplacian(&empty), Mat::zeros(3, 3));

        let complete = Digraph::complete(3).unwrap();
        assert_eq!(degree_matrix(&complete), Mat::identity(3, 3) * 2.0);
        let l = laplacian(&complete);
        let expected = Mat::identity(3, 3) * 3.0 - Mat::from_element(3, 3, 1.0);
        assert_eq!(l, expected);

        let two_cycle = Digraph::new(2, vec![0, 1, 1, 0]).unwrap();
        assert_eq!(degree_matrix(&two_cycle), Mat::identity(2, 2));
        assert_eq!(
            laplacian(&two_cycle),
            Mat::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0])
        );
    }

    #[test]
    fn laplacian_annihilates_ones_exactly() {
        let mut rng = stream(7, Domain::Sweep, 0, 0);
        for t in 0..50 {
            let q = 2 + (t % 7);
            let g = random_digraph(q, 0.4, &mut rng).unwrap();
            let l = laplacian(&g);
            let ones = crate::linalg::ones(q);
            assert_eq!((l * ones).iter().filter(|x| **x != 0.0).count(), 0);
        }
    }

    #[test]
    fn strong_connectivity() {
        assert!(is_strongly_connected(&Digraph::complete(4).unwrap()));
        assert!(!is_strongly_connected(&Digraph::empty(3).unwrap()));
        // directed 3-cycle
        let cyc = Digraph::new(3, vec![0, 1, 0, 0, 0, 1, 1, 0, 0]).unwrap();
        assert!(is_strongly_connected(&cyc));
    }

    #[test]
    fn gds_matches_figure_structure() {
        let schedule = GdsSchedule::new(6, vec![1, 2], 1).unwrap();
        let mut rng = stream(11, Domain::Topology, 0, 0);
        for _ in 0..20 {
            let g = gds_topology(&schedule, &mut rng).unwrap();
            assert!(gds_structure_ok(&g, &schedule));
        }
    }

    #[test]
    fn gds_minimal_two_nodes() {
        let schedule = GdsSchedule::new(2, vec![1], 1).unwrap();
        let mut rng = stream(3, Domain::Topology, 0, 0);
        let g = gds_topology(&schedule, &mut rng).unwrap();
        assert_eq!(g.edge(0, 1), 1);
        assert_eq!(g.edge(1, 0), 0);
    }

    #[test]
    fn spectrum_sign_over_random_digraphs() {
        let t = ToleranceConfig::default();
        let mut rng = stream(5, Domain::Sweep, 1, 0);
        for i in 0..200 {
            let q = 2 + (i % 7);
            let g = random_digraph(q, 0.35, &mut rng).unwrap();
            let l = laplacian(&g);
            assert!(laplacian_spectrum_sign_check(&l, t.eig_match_tol).unwrap());
        }
    }

    #[test]
    fn laplacian_rank_bound_and_sc_equality() {
        let t = ToleranceConfig::default();
        let mut rng = stream(9, Domain::Sweep, 2, 0);
        let mut seen_sc = 0;
        for i in 0..150 {
            let q = 2 + (i % 6);
            let g = random_digraph(q, 0.5, &mut rng).unwrap();
            let r = crate::linalg::numerical_rank(&laplacian(&g), &t).unwrap();
            assert!(r <= q - 1);
            if is_strongly_connected(&g) {
                seen_sc += 1;
                assert_eq!(r, q - 1);
            }
        }
        assert!(seen_sc > 20);
    }

    #[test]
    fn digraph_json_round_trip() {
        let schedule = GdsSchedule::new(5, vec![1, 2], 1).unwrap();
        let mut rng = stream(13, Domain::Topology, 4, 0);
        let g = gds_topology(&schedule, &mut rng).unwrap();
        let json = DigraphJson::from(&g);
        let back = Digraph::try_from(&json).unwrap();
        assert_eq!(g, back);
    }
}
