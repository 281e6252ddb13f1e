//! Matrix product operator for the interpolating Hamiltonian
//! H(s) = (1−s)·(−Σ_i S^x_i) + s·(−Σ_{(i,j)} J_ij S^z_i S^z_j).
//!
//! Spin-1/2 operators: S^z = diag(1/2, −1/2), S^x = offdiag(1/2, 1/2). The
//! coupling graph is routed along a slot path, and couplings whose endpoints
//! are not adjacent slots are handled by a finite-state automaton: between
//! slots the operator bond carries one state per coupling that has placed
//! its first S^z but not yet met its second. Walking the bond states from
//! left to right, a term is "ready" (nothing placed), "done" (completed), or
//! "carrying" a pending S^z; the boundary bonds pin ready on the left and
//! done on the right. Bond dimension at a cut is therefore
//! 2 + (couplings straddling the cut), the exact automaton minimum for this
//! interaction, with no compression needed.

use std::collections::BTreeMap;

use ndarray::{Array2, Array4};

use crate::contract::{env_left_update, unit_env};
use crate::error::{Error, Result};
use crate::instance::GraphInstance;
use crate::mps::Mps;
use crate::ordering::SitePath;

/// Schedule parameter s ∈ [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulePoint {
    s: f64,
}

impl SchedulePoint {
    pub fn new(s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidParameter(format!(
                "schedule parameter must lie in [0, 1], got {s}"
            )));
        }
        Ok(SchedulePoint { s })
    }

    pub fn value(self) -> f64 {
        self.s
    }
}

/// Hamiltonian as per-site rank-4 tensors
/// (left op-bond, physical out, physical in, right op-bond).
#[derive(Debug, Clone)]
pub struct Mpo {
    pub(crate) tensors: Vec<Array4<f64>>,
}

/// Automaton states on one bond: ready and done are always present on
/// interior bonds; carriers hold couplings with one S^z placed.
struct BondStates {
    ready: Option<usize>,
    done: Option<usize>,
    carriers: BTreeMap<(usize, usize), usize>,
}

impl BondStates {
    fn len(&self) -> usize {
        self.ready.is_some() as usize + self.done.is_some() as usize + self.carriers.len()
    }
}

impl Mpo {
    pub fn n(&self) -> usize {
        self.tensors.len()
    }

    /// Operator bond dimensions, boundaries included (length n+1).
    pub fn op_bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.n() + 1);
        dims.push(1);
        for t in &self.tensors {
            dims.push(t.dim().3);
        }
        dims
    }

    pub fn tensors(&self) -> &[Array4<f64>] {
        &self.tensors
    }

    /// ⟨ψ|H|ψ⟩ by transfer contraction. The state is not renormalized.
    pub fn expectation(&self, psi: &Mps) -> Result<f64> {
        if self.n() != psi.n() {
            return Err(Error::DimensionMismatch(format!(
                "operator on {} sites applied to state on {} sites",
                self.n(),
                psi.n()
            )));
        }
        let mut env = unit_env();
        for (w, a) in self.tensors.iter().zip(psi.tensors()) {
            env = env_left_update(&env, a, w, a);
        }
        Ok(env[[0, 0, 0]])
    }

    /// Full matrix in the slot product basis (slot 0 most significant);
    /// refuses above 10 sites.
    pub fn dense(&self) -> Result<Array2<f64>> {
        let n = self.n();
        if n > 10 {
            return Err(Error::Capacity(format!(
                "dense operator on {n} sites would be 2^{n} squared"
            )));
        }
        // One partial matrix per live bond state, grown site by site.
        let mut blocks: Vec<Array2<f64>> = vec![Array2::from_elem((1, 1), 1.0)];
        for w in &self.tensors {
            let (dl, _, _, dr) = w.dim();
            debug_assert_eq!(dl, blocks.len());
            let grown_dim = blocks[0].dim().0 * 2;
            let mut next = vec![Array2::<f64>::zeros((grown_dim, grown_dim)); dr];
            for (l, block) in blocks.iter().enumerate() {
                for (r, target) in next.iter_mut().enumerate() {
                    let local = Array2::from_shape_fn((2, 2), |(o, i)| w[[l, o, i, r]]);
                    if local.iter().all(|&x| x == 0.0) {
                        continue;
                    }
                    *target += &kron(block, &local);
                }
            }
            blocks = next;
        }
        debug_assert_eq!(blocks.len(), 1);
        Ok(blocks.pop().expect("single terminal state"))
    }
}

fn kron(a: &Array2<f64>, b: &Array2<f64>) -> Array2<f64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let scale = a[[i, j]];
            if scale == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = scale * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Builds the MPO for H(s) with the instance's couplings routed along the
/// given slot path.
pub fn build_hamiltonian(inst: &GraphInstance, path: &SitePath, s: SchedulePoint) -> Result<Mpo> {
    let n = inst.n();
    if path.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "path over {} slots applied to {} spins",
            path.len(),
            n
        )));
    }
    let pos = path.positions();
    // Couplings in slot coordinates; inactive ones (s·J = 0) never enter the
    // automaton, so the field-only operator keeps bond dimension 2.
    let mut slot_edges: Vec<(usize, usize, f64)> = Vec::new();
    for &(i, j, coupling) in inst.edges() {
        if s.value() * coupling != 0.0 {
            let (a, b) = (pos[i].min(pos[j]), pos[i].max(pos[j]));
            slot_edges.push((a, b, coupling));
        }
    }
    slot_edges.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));

    let states_at = |cut: usize| -> BondStates {
        let mut carriers = BTreeMap::new();
        if cut > 0 && cut < n {
            for &(a, b, _) in &slot_edges {
                if a < cut && cut <= b {
                    let next = 2 + carriers.len();
                    carriers.insert((a, b), next);
                }
            }
        }
        BondStates {
            ready: (cut < n).then_some(0),
            done: if cut == n {
                Some(0)
            } else if cut > 0 {
                Some(1)
            } else {
                None
            },
            carriers,
        }
    };

    let field = -(1.0 - s.value());
    let sx = [[0.0, 0.5], [0.5, 0.0]];
    let sz = [[0.5, 0.0], [0.0, -0.5]];
    let eye = [[1.0, 0.0], [0.0, 1.0]];
    let put = |w: &mut Array4<f64>, l: usize, r: usize, op: &[[f64; 2]; 2], coeff: f64| {
        for o in 0..2 {
            for i in 0..2 {
                w[[l, o, i, r]] += coeff * op[o][i];
            }
        }
    };

    let mut tensors = Vec::with_capacity(n);
    for site in 0..n {
        let left = states_at(site);
        let right = states_at(site + 1);
        let mut w = Array4::zeros((left.len(), 2, 2, right.len()));
        if let (Some(l), Some(r)) = (left.ready, right.ready) {
            put(&mut w, l, r, &eye, 1.0);
        }
        if let (Some(l), Some(r)) = (left.done, right.done) {
            put(&mut w, l, r, &eye, 1.0);
        }
        if let (Some(l), Some(r)) = (left.ready, right.done) {
            put(&mut w, l, r, &sx, field);
        }
        for &(a, b, coupling) in &slot_edges {
            if a == site {
                let l = left.ready.expect("ready state precedes its couplings");
                let r = right.carriers[&(a, b)];
                put(&mut w, l, r, &sz, 1.0);
            } else if a < site && site < b {
                let l = left.carriers[&(a, b)];
                let r = right.carriers[&(a, b)];
                put(&mut w, l, r, &eye, 1.0);
            } else if b == site {
                let l = left.carriers[&(a, b)];
                let r = right.done.expect("done state follows completed couplings");
                put(&mut w, l, r, &sz, -s.value() * coupling);
            }
        }
        tensors.push(w);
    }
    Ok(Mpo { tensors })
}
