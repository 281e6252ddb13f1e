//! Classical spin-glass problem instances.
//!
//! An instance is a simple graph with one real coupling per edge and the
//! energy function E(σ) = −Σ_{(i,j)} J_ij σ_i σ_j over configurations
//! σ ∈ {−1,+1}^n. Supported families: open chains, rectangular grids, and
//! random regular graphs from the pairing model. Generation is a pure
//! function of (n, kind, dist, seed): topology first, then couplings drawn
//! in lexicographic edge order, so instance files are bit-reproducible.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Coupling distribution for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingDist {
    /// Uniform on {−1, +1}.
    Pm1,
    /// Standard normal.
    Gaussian,
}

impl CouplingDist {
    pub fn label(self) -> &'static str {
        match self {
            CouplingDist::Pm1 => "pm1",
            CouplingDist::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pm1" => Ok(CouplingDist::Pm1),
            "gaussian" => Ok(CouplingDist::Gaussian),
            other => Err(Error::InvalidParameter(format!(
                "unknown coupling distribution {other:?} (expected \"pm1\" or \"gaussian\")"
            ))),
        }
    }

    fn draw(self, rng: &mut Rng) -> f64 {
        match self {
            CouplingDist::Pm1 => rng.pm1(),
            CouplingDist::Gaussian => rng.standard_normal(),
        }
    }
}

/// Graph family of an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// Open chain: edges (i, i+1).
    Chain,
    /// Rectangular lattice with `w` columns and `h` rows, site (r, c) at
    /// index r·w + c.
    Grid { w: usize, h: usize },
    /// Random graph with every vertex of degree `d`.
    Regular { d: usize },
}

impl InstanceKind {
    pub fn label(self) -> &'static str {
        match self {
            InstanceKind::Chain => "chain",
            InstanceKind::Grid { .. } => "grid",
            InstanceKind::Regular { .. } => "regular",
        }
    }
}

/// Spin assignment σ ∈ {−1,+1}^n.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinConfiguration {
    values: Vec<i8>,
}

impl SpinConfiguration {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyInput("spin configuration is empty".into()));
        }
        if let Some(&v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidParameter(format!(
                "spin value {v} is not in {{-1,+1}}"
            )));
        }
        Ok(SpinConfiguration { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Configuration with every spin negated.
    pub fn flipped(&self) -> SpinConfiguration {
        SpinConfiguration {
            values: self.values.iter().map(|&v| -v).collect(),
        }
    }
}

/// A coupling graph with frozen topology and couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphInstance {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    kind: InstanceKind,
    dist: CouplingDist,
    seed: u64,
}

impl GraphInstance {
    /// Validates indices, uniqueness, and the kind-specific topology
    /// invariant, then stores edges sorted lexicographically by (i, j).
    pub fn new(
        n: usize,
        mut edges: Vec<(usize, usize, f64)>,
        kind: InstanceKind,
        dist: CouplingDist,
        seed: u64,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("instance needs at least one spin".into()));
        }
        for &(i, j, _) in &edges {
            if i >= j {
                return Err(Error::Construction(format!(
                    "edge ({i}, {j}) is not in i < j form"
                )));
            }
            if j >= n {
                return Err(Error::IndexOutOfRange(format!(
                    "edge ({i}, {j}) exceeds spin count {n}"
                )));
            }
        }
        edges.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        if edges.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::Construction("duplicate edge".into()));
        }
        let inst = GraphInstance {
            n,
            edges,
            kind,
            dist,
            seed,
        };
        inst.check_kind()?;
        Ok(inst)
    }

    fn check_kind(&self) -> Result<()> {
        match self.kind {
            InstanceKind::Chain => {
                let want: Vec<(usize, usize)> = (1..self.n).map(|j| (j - 1, j)).collect();
                let got: Vec<(usize, usize)> = self.edges.iter().map(|e| (e.0, e.1)).collect();
                if got != want {
                    return Err(Error::Construction(
                        "chain instance must have exactly the edges (i, i+1)".into(),
                    ));
                }
            }
            InstanceKind::Grid { w, h } => {
                if w == 0 || h == 0 || w * h != self.n {
                    return Err(Error::Construction(format!(
                        "grid {w}x{h} does not match n={}",
                        self.n
                    )));
                }
                let want: HashSet<(usize, usize)> = grid_edges(w, h).into_iter().collect();
                let got: HashSet<(usize, usize)> =
                    self.edges.iter().map(|e| (e.0, e.1)).collect();
                if got != want {
                    return Err(Error::Construction(
                        "grid instance edges do not form the rectangular lattice".into(),
                    ));
                }
            }
            InstanceKind::Regular { d } => {
                let mut deg = vec![0usize; self.n];
                for &(i, j, _) in &self.edges {
                    deg[i] += 1;
                    deg[j] += 1;
                }
                if let Some(v) = deg.iter().position(|&k| k != d) {
                    return Err(Error::Construction(format!(
                        "vertex {v} has degree {} in a {d}-regular instance",
                        deg[v]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }

    pub fn dist(&self) -> CouplingDist {
        self.dist
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Neighbor lists in ascending index order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j, _) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// E(σ) = −Σ_{(i,j)} J_ij σ_i σ_j.
    pub fn classical_energy(&self, config: &SpinConfiguration) -> Result<f64> {
        if config.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "configuration has {} spins, instance has {}",
                config.len(),
                self.n
            )));
        }
        let v = config.values();
        let mut e = 0.0;
        for &(i, j, coupling) in &self.edges {
            e -= coupling * f64::from(v[i]) * f64::from(v[j]);
        }
        Ok(e)
    }

    pub fn to_json(&self) -> String {
        let (kind, params) = kind_fields(self.kind);
        let file = InstanceFile {
            n: self.n,
            kind: kind.to_string(),
            params,
            dist: self.dist.label().to_string(),
            seed: self.seed,
            edges: self.edges.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("instance serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)
            .map_err(|e| Error::Construction(format!("malformed instance file: {e}")))?;
        let kind = kind_from_fields(&file.kind, &file.params)?;
        let dist = CouplingDist::parse(&file.dist)?;
        GraphInstance::new(file.n, file.edges, kind, dist, file.seed)
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    kind: String,
    params: serde_json::Map<String, serde_json::Value>,
    dist: String,
    seed: u64,
    edges: Vec<(usize, usize, f64)>,
}

fn kind_fields(kind: InstanceKind) -> (&'static str, serde_json::Map<String, serde_json::Value>) {
    let mut params = serde_json::Map::new();
    match kind {
        InstanceKind::Chain => {}
        InstanceKind::Grid { w, h } => {
            params.insert("w".into(), w.into());
            params.insert("h".into(), h.into());
        }
        InstanceKind::Regular { d } => {
            params.insert("d".into(), d.into());
        }
    }
    (kind.label(), params)
}

fn kind_from_fields(
    kind: &str,
    params: &serde_json::Map<String, serde_json::Value>,
) -> Result<InstanceKind> {
    let get = |key: &str| -> Result<usize> {
        params
            .get(key)
            .and_then(|v| v.as_u64())
            .map(|v| v as usize)
            .ok_or_else(|| Error::Construction(format!("kind {kind:?} needs integer param {key:?}")))
    };
    match kind {
        "chain" => Ok(InstanceKind::Chain),
        "grid" => Ok(InstanceKind::Grid {
            w: get("w")?,
            h: get("h")?,
        }),
        "regular" => Ok(InstanceKind::Regular { d: get("d")? }),
        other => Err(Error::Construction(format!("unknown instance kind {other:?}"))),
    }
}

fn grid_edges(w: usize, h: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for r in 0..h {
        for c in 0..w {
            let v = r * w + c;
            if c + 1 < w {
                edges.push((v, v + 1));
            }
            if r + 1 < h {
                edges.push((v, v + w));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Generates an instance deterministically from (n, kind, dist, seed).
///
/// For regular graphs the pairing model is retried until it yields a simple
/// graph; couplings are then drawn in lexicographic edge order from the same
/// stream, so the result is still a pure function of the arguments.
pub fn generate_instance(
    n: usize,
    kind: InstanceKind,
    dist: CouplingDist,
    seed: u64,
) -> Result<GraphInstance> {
    if n < 2 {
        return Err(Error::InvalidSize(format!(
            "instance needs at least 2 spins, got {n}"
        )));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let pairs: Vec<(usize, usize)> = match kind {
        InstanceKind::Chain => (1..n).map(|j| (j - 1, j)).collect(),
        InstanceKind::Grid { w, h } => {
            if w * h != n {
                return Err(Error::InvalidParameter(format!(
                    "grid {w}x{h} does not match n={n}"
                )));
            }
            grid_edges(w, h)
        }
        InstanceKind::Regular { d } => regular_pairs(n, d, &mut rng)?,
    };
    let edges = pairs
        .into_iter()
        .map(|(i, j)| (i, j, dist.draw(&mut rng)))
        .collect();
    GraphInstance::new(n, edges, kind, dist, seed)
}

/// Pairing model: shuffle n·d stubs, pair consecutive entries, reject
/// attempts containing self-loops or multi-edges.
fn regular_pairs(n: usize, d: usize, rng: &mut Rng) -> Result<Vec<(usize, usize)>> {
    if d < 3 {
        return Err(Error::InvalidParameter(format!(
            "regular instances need degree >= 3, got {d}"
        )));
    }
    if d >= n {
        return Err(Error::InvalidParameter(format!(
            "degree {d} is not realizable on {n} vertices"
        )));
    }
    if n * d % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "n*d = {}*{} is odd, no {d}-regular graph exists",
            n, d
        )));
    }
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    const MAX_ATTEMPTS: usize = 1000;
    'attempt: for _ in 0..MAX_ATTEMPTS {
        rng.shuffle(&mut stubs);
        let mut seen = HashSet::with_capacity(n * d / 2);
        let mut pairs = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a == b || !seen.insert((a, b)) {
                continue 'attempt;
            }
            pairs.push((a, b));
        }
        pairs.sort_unstable();
        return Ok(pairs);
    }
    Err(Error::Construction(format!(
        "pairing model failed to produce a simple {d}-regular graph on {n} vertices"
    )))
}

/// Open chain with every coupling +1.
pub fn ferromagnetic_chain(n: usize) -> Result<GraphInstance> {
    let edges = (1..n).map(|j| (j - 1, j, 1.0)).collect();
    GraphInstance::new(n, edges, InstanceKind::Chain, CouplingDist::Pm1, 0)
}

/// Rectangular grid with every coupling +1.
pub fn ferromagnetic_grid(w: usize, h: usize) -> Result<GraphInstance> {
    let edges = grid_edges(w, h).into_iter().map(|(i, j)| (i, j, 1.0)).collect();
    GraphInstance::new(w * h, edges, InstanceKind::Grid { w, h }, CouplingDist::Pm1, 0)
}
