use std::sync::Arc;

use rand::Rng;

use crate::cvar::{empirical_cvar, exact_cvar_uniform_sum, RiskLevel, SampleBatch};
use crate::error::{Error, Result};
use crate::geometry::FeasibleSet;
use crate::linalg::Matrix;
use crate::problems::paths::{yen_k_shortest_paths, Path};
use crate::problems::StochasticViProblem;
use crate::rng::RngStream;
use crate::scalar::Real;

/// Directed edge with cost `t_e (1 + u_e · scale · f_e / c_e)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub tail: usize,
    pub head: usize,
    pub free_flow_time: T,
    pub capacity: T,
    /// `u_e ~ U(lo, hi)`; `None` means `u_e ≡ 0`.
    pub noise: Option<(T, T)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdPair<T> {
    pub origin: usize,
    pub destination: usize,
    pub demand: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingNetwork<T> {
    pub node_count: usize,
    pub edges: Vec<Edge<T>>,
    pub od_pairs: Vec<OdPair<T>>,
    /// Selected paths per OD pair, in the order of `od_pairs`.
    pub paths: Vec<Vec<Path>>,
    /// Dimensionless constant multiplying `f_e / c_e`.
    pub congestion_scale: T,
}

impl<T: Real> RoutingNetwork<T> {
    pub fn new(node_count: usize, edges: Vec<Edge<T>>) -> Result<Self> {
        for (i, e) in edges.iter().enumerate() {
            if e.tail >= node_count || e.head >= node_count {
                return Err(Error::InvalidNetwork(format!("edge {i} references a node outside 0..{node_count}")));
            }
            if !(e.free_flow_time > T::zero() && e.capacity > T::zero()) {
                return Err(Error::InvalidNetwork(format!("edge {i} needs positive free-flow time and capacity")));
            }
            if let Some((lo, hi)) = e.noise {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(Error::InvalidNetwork(format!("edge {i} has an invalid noise interval")));
                }
            }
        }
        Ok(Self { node_count, edges, od_pairs: Vec::new(), paths: Vec::new(), congestion_scale: T::lit(100.0) })
    }

    pub fn with_od_pairs(mut self, od_pairs: Vec<OdPair<T>>) -> Result<Self> {
        for (w, od) in od_pairs.iter().enumerate() {
            if od.origin >= self.node_count || od.destination >= self.node_count || od.origin == od.destination {
                return Err(Error::InvalidNetwork(format!("OD pair {w} has invalid endpoints")));
            }
            if !(od.demand >= T::zero() && od.demand.is_finite()) {
                return Err(Error::InvalidNetwork(format!("OD pair {w} has negative demand")));
            }
        }
        self.od_pairs = od_pairs;
        self.paths.clear();
        Ok(self)
    }

    /// Puts `U(lo, hi)` noise on every edge touching one of `nodes`.
    pub fn with_noise_at_nodes(mut self, nodes: &[usize], lo: T, hi: T) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::DegenerateInterval);
        }
        for e in &mut self.edges {
            if nodes.contains(&e.tail) || nodes.contains(&e.head) {
                e.noise = Some((lo, hi));
            }
        }
        Ok(self)
    }

    /// Selects the `k` paths with smallest free-flow time for every OD pair.
    pub fn select_paths(&mut self, k: usize) -> Result<()> {
        let mut paths = Vec::with_capacity(self.od_pairs.len());
        for (w, od) in self.od_pairs.iter().enumerate() {
            let found = yen_k_shortest_paths(self, od.origin, od.destination, k);
            if found.is_empty() {
                return Err(Error::InvalidNetwork(format!(
                    "OD pair {w} ({} -> {}) has no path",
                    od.origin + 1,
                    od.destination + 1
                )));
            }
            paths.push(found);
        }
        self.paths = paths;
        self.validate_paths()
    }

    pub fn path_count(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }

    pub fn all_paths(&self) -> impl Iterator<Item = &Path> {
        self.paths.iter().flatten()
    }

    /// Edge × path 0/1 matrix.
    pub fn incidence(&self) -> Matrix<T> {
        let mut m = Matrix::zeros(self.edges.len(), self.path_count());
        for (p, path) in self.all_paths().enumerate() {
            for &e in &path.edges {
                m[(e, p)] = T::one();
            }
        }
        m
    }

    /// `f = incidence · h`
    pub fn edge_flows(&self, h: &[T]) -> Vec<T> {
        let mut f = vec![T::zero(); self.edges.len()];
        for (path, &hp) in self.all_paths().zip(h) {
            for &e in &path.edges {
                f[e] += hp;
            }
        }
        f
    }

    fn validate_paths(&self) -> Result<()> {
        for (od, group) in self.od_pairs.iter().zip(&self.paths) {
            for path in group {
                let mut at = od.origin;
                for &e in &path.edges {
                    let edge = self.edges.get(e).ok_or_else(|| Error::InvalidNetwork(format!("unknown edge {e}")))?;
                    if edge.tail != at {
                        return Err(Error::InvalidNetwork(format!("path breaks at edge {e}")));
                    }
                    at = edge.head;
                }
                if at != od.destination {
                    return Err(Error::InvalidNetwork("path does not reach its destination".into()));
                }
            }
        }
        Ok(())
    }
}

/// How `F` is evaluated for a routing game.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RoutingMapOracle {
    /// Closed-form CVaR of each path cost, a sum of independent uniforms.
    ClosedForm,
    /// Empirical CVaR over a fixed batch of `samples` events.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Builds the routing game over the `k_paths` cheapest free-flow paths of
/// every OD pair, with the closed-form map.
pub fn build_routing_game<T: Real>(
    network: &RoutingNetwork<T>,
    k_paths: usize,
    level: RiskLevel<T>,
) -> Result<StochasticViProblem<T>> {
    build_routing_game_with(network, k_paths, level, RoutingMapOracle::ClosedForm)
}

pub fn build_routing_game_with<T: Real>(
    network: &RoutingNetwork<T>,
    k_paths: usize,
    level: RiskLevel<T>,
    oracle: RoutingMapOracle,
) -> Result<StochasticViProblem<T>> {
    if network.od_pairs.is_empty() {
        return Err(Error::InvalidNetwork("no OD pairs".into()));
    }
    let mut net = network.clone();
    net.select_paths(k_paths)?;
    let n = net.path_count();

    let mut groups = Vec::with_capacity(net.od_pairs.len());
    let mut start = Vec::with_capacity(n);
    let mut offset = 0;
    for (od, paths) in net.od_pairs.iter().zip(&net.paths) {
        let idx: Vec<usize> = (offset..offset + paths.len()).collect();
        offset += paths.len();
        let share = od.demand / T::from_usize(paths.len()).unwrap();
        start.extend(std::iter::repeat_n(share, paths.len()));
        groups.push((idx, od.demand));
    }
    let feasible = FeasibleSet::simplex_product(n, &groups)?;
    let od_groups = groups.into_iter().map(|(idx, _)| idx).collect();

    let model = Arc::new(CostModel::new(&net));
    let sampler = {
        let model = Arc::clone(&model);
        move |h: &[T], count: usize, stream: &RngStream| model.sample(h, count, stream)
    };
    let (exact, tolerance, oracle_label) = match oracle {
        RoutingMapOracle::ClosedForm => {
            let model = Arc::clone(&model);
            let map = move |h: &[T]| model.exact(h, level);
            (Arc::new(map) as Arc<dyn crate::problems::ExactMap<T>>, T::lit(1e-9), "closed-form".to_string())
        }
        RoutingMapOracle::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::EmptyBatch);
            }
            let model = Arc::clone(&model);
            let map = move |h: &[T]| model.monte_carlo(h, samples, &RngStream::new(seed, 0), level);
            (
                Arc::new(map) as Arc<dyn crate::problems::ExactMap<T>>,
                T::lit(5e-3),
                format!("monte-carlo N={samples} seed={seed}, relative accuracy about 5e-3"),
            )
        }
    };

    let noisy = net.edges.iter().filter(|e| e.noise.is_some()).count();
    Ok(StochasticViProblem {
        name: "routing".into(),
        sampler: Arc::new(sampler),
        exact_map: Some(exact),
        exact_map_tolerance: tolerance,
        feasible,
        level,
        od_groups: Some(od_groups),
        default_start: start,
        labels: vec![
            ("kind".into(), "routing".into()),
            ("nodes".into(), net.node_count.to_string()),
            ("edges".into(), net.edges.len().to_string()),
            ("noisy_edges".into(), noisy.to_string()),
            ("paths".into(), n.to_string()),
            ("exact_map".into(), oracle_label),
        ],
    })
}

/// Path costs as `base_p + Σ_{e ∈ p, noisy} w_e(h) u_e`, with
/// `w_e = t_e · scale · f_e / c_e`.
struct CostModel<T: Real> {
    edges: Vec<Edge<T>>,
    paths: Vec<Vec<usize>>,
    base: Vec<T>,
    scale: T,
    /// Noisy edges of each path.
    noisy: Vec<Vec<usize>>,
    noisy_edges: Vec<usize>,
}

impl<T: Real> CostModel<T> {
    fn new(net: &RoutingNetwork<T>) -> Self {
        let paths: Vec<Vec<usize>> = net.all_paths().map(|p| p.edges.clone()).collect();
        let base = paths.iter().map(|p| p.iter().map(|&e| net.edges[e].free_flow_time).sum()).collect();
        let noisy = paths.iter().map(|p| p.iter().copied().filter(|&e| net.edges[e].noise.is_some()).collect()).collect();
        let noisy_edges = (0..net.edges.len()).filter(|&e| net.edges[e].noise.is_some()).collect();
        Self { edges: net.edges.clone(), paths, base, scale: net.congestion_scale, noisy, noisy_edges }
    }

    fn weights(&self, h: &[T]) -> Vec<T> {
        let mut f = vec![T::zero(); self.edges.len()];
        for (p, &hp) in self.paths.iter().zip(h) {
            for &e in p {
                f[e] += hp;
            }
        }
        self.edges.iter().zip(f).map(|(e, fe)| e.free_flow_time * self.scale * fe / e.capacity).collect()
    }

    /// Draws of `u_e` for one edge: `count` values from stream component `e`.
    fn draws(&self, e: usize, count: usize, stream: &RngStream) -> Vec<T> {
        let (lo, hi) = self.edges[e].noise.unwrap();
        let mut rng = stream.component(e as u64);
        (0..count).map(|_| lo + (hi - lo) * T::lit(rng.gen::<f64>())).collect()
    }

    fn sample(&self, h: &[T], count: usize, stream: &RngStream) -> Result<SampleBatch<T>> {
        let n = self.paths.len();
        let w = self.weights(h);
        let mut u = vec![Vec::new(); self.edges.len()];
        for &e in &self.noisy_edges {
            u[e] = self.draws(e, count, stream);
        }
        let mut values = Vec::with_capacity(count * n);
        #[allow(clippy::needless_range_loop)]
        for j in 0..count {
            for (p, base) in self.base.iter().enumerate() {
                let mut c = *base;
                for &e in &self.noisy[p] {
                    c += w[e] * u[e][j];
                }
                values.push(c);
            }
        }
        SampleBatch::new(count, n, values)
    }

    fn exact(&self, h: &[T], level: RiskLevel<T>) -> Result<Vec<T>> {
        let w = self.weights(h);
        let mut out = Vec::with_capacity(self.paths.len());
        for (p, base) in self.base.iter().enumerate() {
            let intervals: Vec<(T, T)> = self.noisy[p]
                .iter()
                .map(|&e| {
                    let (lo, hi) = self.edges[e].noise.unwrap();
                    let (a, b) = (w[e] * lo, w[e] * hi);
                    if a <= b {
                        (a, b)
                    } else {
                        (b, a)
                    }
                })
                .collect();
            let tail = if intervals.is_empty() { T::zero() } else { exact_cvar_uniform_sum(&intervals, level)? };
            out.push(*base + tail);
        }
        Ok(out)
    }

    /// Column by column, regenerating each edge's draws, so memory stays at
    /// one column even for very large batches.
    fn monte_carlo(&self, h: &[T], count: usize, stream: &RngStream, level: RiskLevel<T>) -> Result<Vec<T>> {
        let w = self.weights(h);
        let mut out = Vec::with_capacity(self.paths.len());
        for (p, base) in self.base.iter().enumerate() {
            let mut col = vec![*base; count];
            for &e in &self.noisy[p] {
                for (c, u) in col.iter_mut().zip(self.draws(e, count, stream)) {
                    *c += w[e] * u;
                }
            }
            out.push(empirical_cvar(&col, level)?);
        }
        Ok(out)
    }
}
