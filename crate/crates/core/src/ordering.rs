//! Sweep paths: permutations mapping chain slots to original spin indices.
//!
//! The tensor-network machinery sweeps a 1D chain, so every instance needs a
//! path laying its spins on a line. Path quality is measured by graph
//! bandwidth, the maximal slot distance spanned by an edge: operator bond
//! dimension and effective interaction range both grow with it. The heuristic
//! is a breadth-first layering from a pseudo-peripheral vertex with children
//! ordered by (degree, index), a cheap greedy bandwidth reducer.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::instance::GraphInstance;

/// Permutation of 0..n: `order[k]` is the original spin placed at slot k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SitePath {
    order: Vec<usize>,
}

impl SitePath {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        if n == 0 {
            return Err(Error::EmptyInput("path is empty".into()));
        }
        let mut seen = vec![false; n];
        for &v in &order {
            if v >= n || seen[v] {
                return Err(Error::Construction(format!(
                    "order is not a permutation of 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(SitePath { order })
    }

    /// Parses a comma-separated permutation such as `"2,0,1"`.
    pub fn parse(text: &str) -> Result<Self> {
        let order = text
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Construction(format!("bad path entry {tok:?}")))
            })
            .collect::<Result<Vec<usize>>>()?;
        SitePath::new(order)
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Inverse permutation: `positions()[v]` is the slot holding spin v.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (slot, &v) in self.order.iter().enumerate() {
            pos[v] = slot;
        }
        pos
    }
}

pub fn identity_path(n: usize) -> Result<SitePath> {
    if n == 0 {
        return Err(Error::InvalidSize("path needs at least one site".into()));
    }
    Ok(SitePath {
        order: (0..n).collect(),
    })
}

/// Maximal |slot(i) − slot(j)| over the instance's edges; 0 if edgeless.
pub fn bandwidth(inst: &GraphInstance, path: &SitePath) -> Result<usize> {
    if path.len() != inst.n() {
        return Err(Error::DimensionMismatch(format!(
            "path over {} slots applied to {} spins",
            path.len(),
            inst.n()
        )));
    }
    let pos = path.positions();
    Ok(inst
        .edges()
        .iter()
        .map(|&(i, j, _)| pos[i].abs_diff(pos[j]))
        .max()
        .unwrap_or(0))
}

/// Greedy bandwidth-reduction order. Disconnected components are laid out
/// contiguously, taken in order of their smallest vertex.
pub fn heuristic_path(inst: &GraphInstance) -> SitePath {
    SitePath {
        order: layered_order(&inst.adjacency()),
    }
}

fn layered_order(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for v in 0..n {
        if seen[v] {
            continue;
        }
        let component = collect_component(adj, v);
        let start = peripheral_start(adj, &component);
        expand_layers(adj, start, &mut seen, &mut order);
    }
    order
}

fn collect_component(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    let mut comp = Vec::new();
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        comp.push(u);
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    comp
}

/// BFS eccentricity and the last layer reached.
fn eccentricity(adj: &[Vec<usize>], start: usize) -> (usize, Vec<usize>) {
    let mut dist = vec![usize::MAX; adj.len()];
    let mut queue = VecDeque::from([start]);
    dist[start] = 0;
    let mut ecc = 0;
    let mut last = vec![start];
    while let Some(u) = queue.pop_front() {
        if dist[u] > ecc {
            ecc = dist[u];
            last.clear();
        }
        if dist[u] == ecc {
            last.push(u);
        }
        for &w in &adj[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    (ecc, last)
}

/// Pseudo-peripheral vertex: start from the component's minimal (degree,
/// index) vertex and hop to a farthest vertex while eccentricity grows.
fn peripheral_start(adj: &[Vec<usize>], component: &[usize]) -> usize {
    let mut x = component
        .iter()
        .copied()
        .min_by_key(|&v| (adj[v].len(), v))
        .expect("nonempty component");
    let (mut ecc_x, mut last) = eccentricity(adj, x);
    loop {
        let y = last
            .iter()
            .copied()
            .min_by_key(|&v| (adj[v].len(), v))
            .expect("nonempty layer");
        let (ecc_y, last_y) = eccentricity(adj, y);
        if ecc_y > ecc_x {
            x = y;
            ecc_x = ecc_y;
            last = last_y;
        } else {
            return x;
        }
    }
}

fn expand_layers(adj: &[Vec<usize>], start: usize, seen: &mut [bool], order: &mut Vec<usize>) {
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(u) = queue.pop_front() {
        order.push(u);
        let mut children: Vec<usize> = adj[u].iter().copied().filter(|&w| !seen[w]).collect();
        children.sort_by_key(|&w| (adj[w].len(), w));
        for w in children {
            seen[w] = true;
            queue.push_back(w);
        }
    }
}
