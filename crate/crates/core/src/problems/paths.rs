use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::problems::routing::RoutingNetwork;
use crate::scalar::Real;

/// Loopless directed path, stored as edge indices and the visited nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub edges: Vec<usize>,
    pub nodes: Vec<usize>,
    /// Total free-flow time.
    pub cost: f64,
}

impl Path {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.cost.total_cmp(&other.cost).then_with(|| self.edges.cmp(&other.edges))
    }
}

/// Up to `k` loopless `origin → dest` paths with the smallest free-flow time
/// (Yen's algorithm), sorted by cost and then by edge index sequence.
///
/// Enumeration continues past `k` while further candidates tie with the
/// `k`-th cost, so the lexicographic tie-break sees every tied path.
pub fn yen_k_shortest_paths<T: Real>(network: &RoutingNetwork<T>, origin: usize, dest: usize, k: usize) -> Vec<Path> {
    if k == 0 || origin == dest || origin >= network.node_count || dest >= network.node_count {
        return Vec::new();
    }
    let graph = Graph::new(network);
    let no_edges = vec![false; graph.weights.len()];
    let no_nodes = vec![false; network.node_count];
    let Some(first) = graph.shortest(origin, dest, &no_edges, &no_nodes) else {
        return Vec::new();
    };
    let mut accepted = vec![graph.path_from(origin, first)];
    let mut candidates: Vec<Path> = Vec::new();
    loop {
        let last = accepted.last().unwrap().clone();
        for i in 0..last.edges.len() {
            let spur_node = last.nodes[i];
            let root = &last.edges[..i];
            let mut banned_edges = no_edges.clone();
            for p in &accepted {
                if p.edges.len() > i && &p.edges[..i] == root {
                    banned_edges[p.edges[i]] = true;
                }
            }
            let mut banned_nodes = no_nodes.clone();
            for &v in &last.nodes[..i] {
                banned_nodes[v] = true;
            }
            if let Some(spur) = graph.shortest(spur_node, dest, &banned_edges, &banned_nodes) {
                let mut edges = root.to_vec();
                edges.extend(spur);
                if !accepted.iter().any(|p| p.edges == edges) && !candidates.iter().any(|p| p.edges == edges) {
                    candidates.push(graph.path_from(origin, edges));
                }
            }
        }
        let Some(best) = (0..candidates.len()).min_by(|&a, &b| candidates[a].key_cmp(&candidates[b])) else {
            break;
        };
        if accepted.len() >= k && candidates[best].cost > accepted[k - 1].cost {
            break;
        }
        accepted.push(candidates.swap_remove(best));
    }
    accepted.sort_by(Path::key_cmp);
    accepted.truncate(k);
    accepted
}

struct Graph {
    out: Vec<Vec<usize>>,
    tails: Vec<usize>,
    heads: Vec<usize>,
    weights: Vec<f64>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Graph {
    fn new<T: Real>(network: &RoutingNetwork<T>) -> Self {
        let mut out = vec![Vec::new(); network.node_count];
        for (i, e) in network.edges.iter().enumerate() {
            out[e.tail].push(i);
        }
        Self {
            out,
            tails: network.edges.iter().map(|e| e.tail).collect(),
            heads: network.edges.iter().map(|e| e.head).collect(),
            weights: network.edges.iter().map(|e| e.free_flow_time.as_f64()).collect(),
        }
    }

    /// Dijkstra over the edges that are not banned, avoiding banned nodes.
    fn shortest(&self, src: usize, dst: usize, banned_edges: &[bool], banned_nodes: &[bool]) -> Option<Vec<usize>> {
        let n = self.out.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Entry(0.0, src));
        while let Some(Entry(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if v == dst {
                break;
            }
            for &e in &self.out[v] {
                let w = self.heads[e];
                if banned_edges[e] || banned_nodes[w] {
                    continue;
                }
                let nd = d + self.weights[e];
                if nd < dist[w] {
                    dist[w] = nd;
                    via[w] = e;
                    heap.push(Entry(nd, w));
                }
            }
        }
        if !dist[dst].is_finite() {
            return None;
        }
        let mut edges = Vec::new();
        let mut v = dst;
        while v != src {
            let e = via[v];
            edges.push(e);
            v = self.tails[e];
        }
        edges.reverse();
        Some(edges)
    }

    fn path_from(&self, origin: usize, edges: Vec<usize>) -> Path {
        let mut nodes = vec![origin];
        nodes.extend(edges.iter().map(|&e| self.heads[e]));
        let cost = edges.iter().map(|&e| self.weights[e]).sum();
        Path { edges, nodes, cost }
    }
}
