//! COP-optimal route selection.
//!
//! After closed-form power allocation the minimum COP of a route is a
//! strictly increasing function of `Σ ψ_n^(2/(2+α))`, so the best route is a
//! shortest path under link weights `ψ^(2/(2+α))`. Neither λ_e nor ζ enters
//! the weights, hence they never change which route is chosen.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::{distance, NetworkInstance, Point, SystemParams};
use crate::outage::{psi, DerivedConstants, Route};
use crate::power::{allocate_powers, PowerSolution};

/// Routing weight of a link with outage coefficient `psi`.
pub fn link_weight(psi: f64, alpha: f64) -> f64 {
    psi.powf(2.0 / (2.0 + alpha))
}

/// Complete digraph over the legitimate nodes with symmetric link weights.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    positions: Vec<Point>,
    params: SystemParams,
    /// Row-major `n x n`; `f64::INFINITY` marks a missing link.
    weights: Vec<f64>,
}

impl WeightedGraph {
    pub fn new(positions: Vec<Point>, params: SystemParams, max_link_distance: Option<f64>) -> Self {
        let n = positions.len();
        let mut weights = vec![f64::INFINITY; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = distance(positions[i], positions[j]);
                if d <= 0.0 || max_link_distance.is_some_and(|cap| d > cap) {
                    continue;
                }
                let w = link_weight(psi(&params, d), params.alpha);
                weights[i * n + j] = w;
                weights[j * n + i] = w;
            }
        }
        Self { positions, params, weights }
    }

    pub fn from_instance(instance: &NetworkInstance, params: &SystemParams) -> Self {
        Self::new(instance.nodes.clone(), *params, None)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn weight(&self, i: usize, j: usize) -> Option<f64> {
        let w = self.weights[i * self.len() + j];
        w.is_finite().then_some(w)
    }

    pub fn path_weight(&self, nodes: &[usize]) -> f64 {
        nodes.windows(2).map(|w| self.weights[w[0] * self.len() + w[1]]).sum()
    }

    pub fn route(&self, nodes: Vec<usize>) -> Result<Route> {
        Route::through(&self.positions, nodes, &self.params)
    }
}

/// A node path with its total weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPath {
    pub nodes: Vec<usize>,
    pub weight: f64,
}

impl WeightedPath {
    pub fn hops(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Weight, then hop count, then lexicographic node order.
    fn rank(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.nodes.len().cmp(&other.nodes.len()))
            .then_with(|| self.nodes.cmp(&other.nodes))
    }
}

fn check_endpoints(graph: &WeightedGraph, source: usize, destination: usize) -> Result<()> {
    if source >= graph.len() || destination >= graph.len() {
        return Err(Error::InvalidInput("source or destination outside the graph".into()));
    }
    if source == destination {
        return Err(Error::InvalidInput("source equals destination".into()));
    }
    Ok(())
}

/// Dense O(M²) Dijkstra. Labels compare by weight, then hop count, then the
/// node sequence; extending two labels by the same node preserves that
/// order, so the label-setting argument still yields the overall minimum.
pub fn shortest_path(graph: &WeightedGraph, source: usize, destination: usize) -> Result<WeightedPath> {
    check_endpoints(graph, source, destination)?;
    let n = graph.len();
    let mut best: Vec<Option<WeightedPath>> = vec![None; n];
    let mut done = vec![false; n];
    best[source] = Some(WeightedPath { nodes: vec![source], weight: 0.0 });

    loop {
        let next = (0..n)
            .filter(|&v| !done[v])
            .filter_map(|v| best[v].as_ref().map(|p| (v, p)))
            .min_by(|a, b| a.1.rank(b.1))
            .map(|(v, _)| v);
        let Some(u) = next else { break };
        done[u] = true;
        if u == destination {
            break;
        }
        let here = best[u].clone().expect("settled node has a label");
        for v in 0..n {
            if done[v] {
                continue;
            }
            let Some(w) = graph.weight(u, v) else { continue };
            let mut nodes = here.nodes.clone();
            nodes.push(v);
            let cand = WeightedPath { nodes, weight: here.weight + w };
            if best[v].as_ref().is_none_or(|cur| cand.rank(cur) == Ordering::Less) {
                best[v] = Some(cand);
            }
        }
    }
    best[destination]
        .take()
        .ok_or_else(|| Error::Infeasible(format!("no path from {source} to {destination}")))
}

/// The minimum-weight route from `source` to `destination`.
pub fn find_optimal_route(graph: &WeightedGraph, source: usize, destination: usize) -> Result<Route> {
    let path = shortest_path(graph, source, destination)?;
    graph.route(path.nodes)
}

pub const DEFAULT_MAX_ENUMERATION_NODES: usize = 8;

/// Every simple path from `source` to `destination`, with weights.
/// Refuses graphs larger than `max_nodes`.
pub fn enumerate_all_routes(
    graph: &WeightedGraph,
    source: usize,
    destination: usize,
    max_nodes: usize,
) -> Result<Vec<WeightedPath>> {
    if graph.len() > max_nodes {
        return Err(Error::TooManyNodes { nodes: graph.len(), max_nodes });
    }
    check_endpoints(graph, source, destination)?;

    fn walk(
        graph: &WeightedGraph,
        destination: usize,
        stack: &mut Vec<usize>,
        on_path: &mut [bool],
        weight: f64,
        out: &mut Vec<WeightedPath>,
    ) {
        let u = *stack.last().expect("non-empty stack");
        if u == destination {
            out.push(WeightedPath { nodes: stack.clone(), weight });
            return;
        }
        for v in 0..graph.len() {
            if on_path[v] {
                continue;
            }
            if let Some(w) = graph.weight(u, v) {
                on_path[v] = true;
                stack.push(v);
                walk(graph, destination, stack, on_path, weight + w, out);
                stack.pop();
                on_path[v] = false;
            }
        }
    }

    let mut out = Vec::new();
    let mut on_path = vec![false; graph.len()];
    on_path[source] = true;
    walk(graph, destination, &mut vec![source], &mut on_path, 0.0, &mut out);
    Ok(out)
}

/// Route, powers and minimum COP from the full secure-routing pipeline.
#[derive(Debug, Clone)]
pub struct SecureRoute {
    pub route: Route,
    pub solution: PowerSolution,
    pub weight: f64,
}

/// Link weights, shortest path, then closed-form power allocation.
pub fn run_algorithm_1(instance: &NetworkInstance, params: &SystemParams) -> Result<SecureRoute> {
    let constants = DerivedConstants::new(params)?;
    let graph = WeightedGraph::from_instance(instance, params);
    let path = shortest_path(&graph, instance.source, instance.destination)?;
    let route = graph.route(path.nodes)?;
    let solution = allocate_powers(&route, &constants, params.alpha)?;
    Ok(SecureRoute { route, solution, weight: path.weight })
}
