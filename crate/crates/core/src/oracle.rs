//! Exact references for small instances: dense and matrix-free ground-state
//! solvers for H(s), exhaustive classical minimization, and entanglement
//! spectra straight from a statevector.
//!
//! Basis convention everywhere: slot 0 is the most significant bit of the
//! statevector index, bit value 0 means spin up (σ = +1). The matrix-free
//! solver seeds the Lanczos iteration with the uniform positive vector; that
//! seed lives in the flip-symmetric sector, so when the classical endpoint
//! splits into a near-degenerate doublet the solver deterministically
//! returns the symmetric member instead of an arbitrary mix.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::instance::{GraphInstance, SpinConfiguration};
use crate::lanczos::lowest_eigenpair;
use crate::linalg::svd_econ;
use crate::mpo::SchedulePoint;
use crate::ordering::SitePath;
use crate::spectrum::EntanglementSpectrum;

/// Largest slot count the dense-matrix oracles accept.
pub const DENSE_CAP: usize = 10;
/// Largest slot count `exact_ground` accepts.
pub const GROUND_CAP: usize = 14;
/// Largest spin count `brute_force_minimum` accepts.
pub const BRUTE_CAP: usize = 24;

/// Normalized wavefunction over the full slot product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<f64>,
}

impl StateVector {
    /// Wraps amplitudes of length 2^n, requiring norm 1 within 1e-12.
    pub fn new(amplitudes: Vec<f64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidSize(format!(
                "statevector length must be a power of two covering at least one slot, got {len}"
            )));
        }
        if !amplitudes.iter().all(|a| a.is_finite()) {
            return Err(Error::Numerical("statevector has non-finite amplitudes".into()));
        }
        let norm: f64 = amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Numerical(format!(
                "statevector norm {norm} is not 1 within 1e-12"
            )));
        }
        Ok(StateVector { amplitudes })
    }

    pub fn n(&self) -> usize {
        self.amplitudes.len().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Signed inner product ⟨self|other⟩.
    pub fn inner(&self, other: &StateVector) -> Result<f64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::DimensionMismatch(format!(
                "statevectors of length {} and {}",
                self.amplitudes.len(),
                other.amplitudes.len()
            )));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a * b)
            .sum())
    }
}

/// Couplings mapped into slot coordinates, endpoints ordered.
fn slot_couplings(inst: &GraphInstance, path: &SitePath) -> Result<Vec<(usize, usize, f64)>> {
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
        .map(|&(i, j, c)| (pos[i].min(pos[j]), pos[i].max(pos[j]), c))
        .collect())
}

/// Classical diagonal of H(1) over all basis states: entry b holds
/// −Σ J z_a z_b / 4 with z read from the bits of b.
fn classical_diagonal(n: usize, couplings: &[(usize, usize, f64)]) -> Vec<f64> {
    let dim = 1usize << n;
    let mut diag = vec![0.0; dim];
    for b in 0..dim {
        let mut e = 0.0;
        for &(a, c, coupling) in couplings {
            let za = if b >> (n - 1 - a) & 1 == 0 { 1.0 } else { -1.0 };
            let zc = if b >> (n - 1 - c) & 1 == 0 { 1.0 } else { -1.0 };
            e -= coupling * za * zc / 4.0;
        }
        diag[b] = e;
    }
    diag
}

/// Full matrix of H(s) in the slot product basis; refuses above 10 slots.
pub fn dense_hamiltonian(
    inst: &GraphInstance,
    path: &SitePath,
    s: SchedulePoint,
) -> Result<Array2<f64>> {
    let n = inst.n();
    if n > DENSE_CAP {
        return Err(Error::Capacity(format!(
            "dense Hamiltonian limited to {DENSE_CAP} slots, got {n}"
        )));
    }
    let couplings = slot_couplings(inst, path)?;
    let diag = classical_diagonal(n, &couplings);
    let dim = 1usize << n;
    let mut h = Array2::zeros((dim, dim));
    let field = -(1.0 - s.value()) / 2.0;
    for b in 0..dim {
        h[[b, b]] = s.value() * diag[b];
        for k in 0..n {
            let flipped = b ^ (1 << (n - 1 - k));
            h[[b, flipped]] += field;
        }
    }
    Ok(h)
}

/// Ground state and energy of H(s) by matrix-free Lanczos; refuses above
/// 14 slots. The energy is accurate to 1e-10.
pub fn exact_ground(
    inst: &GraphInstance,
    path: &SitePath,
    s: SchedulePoint,
) -> Result<(StateVector, f64)> {
    let n = inst.n();
    if n > GROUND_CAP {
        return Err(Error::Capacity(format!(
            "exact ground state limited to {GROUND_CAP} slots, got {n}"
        )));
    }
    let couplings = slot_couplings(inst, path)?;
    let diag = classical_diagonal(n, &couplings);
    let dim = 1usize << n;
    let field = -(1.0 - s.value()) / 2.0;
    let sv = s.value();
    let matvec = |v: &Array1<f64>| {
        let mut out = Array1::zeros(dim);
        for b in 0..dim {
            let mut x = sv * diag[b] * v[b];
            for k in 0..n {
                x += field * v[b ^ (1 << (n - 1 - k))];
            }
            out[b] = x;
        }
        out
    };

    let mut seed = Array1::from_elem(dim, (dim as f64).sqrt().recip());
    let mut energy = 0.0;
    let mut vector = seed.clone();
    let mut converged = false;
    for _ in 0..40 {
        let out = lowest_eigenpair(matvec, &seed, 1e-12, 300)?;
        energy = out.value;
        vector = out.vector;
        if out.converged {
            converged = true;
            break;
        }
        seed = vector.clone();
    }
    if !converged {
        return Err(Error::Numerical(
            "ground-state iteration failed to converge".into(),
        ));
    }

    // Canonical global sign: the largest-magnitude amplitude is positive.
    let lead = vector
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.abs().total_cmp(&b.abs()))
        .map(|(i, _)| i)
        .expect("nonempty vector");
    if vector[lead] < 0.0 {
        vector.mapv_inplace(|x| -x);
    }
    let norm = vector.dot(&vector).sqrt();
    let amplitudes: Vec<f64> = vector.iter().map(|x| x / norm).collect();
    Ok((StateVector::new(amplitudes)?, energy))
}

/// Exhaustive classical minimum of −Σ J σ σ; refuses above 24 spins.
///
/// The walk fixes σ_0 = +1 (global flip symmetry) and visits the remaining
/// configurations in Gray-code order, updating the energy incrementally by
/// one flipped spin per step. Candidate minima are re-evaluated from
/// scratch before acceptance, so accumulated drift never decides a
/// comparison; exact ties go to the lexicographically smallest
/// configuration with −1 ordered before +1.
pub fn brute_force_minimum(inst: &GraphInstance) -> Result<(SpinConfiguration, f64)> {
    let n = inst.n();
    if n > BRUTE_CAP {
        return Err(Error::Capacity(format!(
            "exhaustive minimization limited to {BRUTE_CAP} spins, got {n}"
        )));
    }
    let exact = |spins: &[i8]| -> f64 {
        let mut e = 0.0;
        for &(i, j, c) in inst.edges() {
            e -= c * spins[i] as f64 * spins[j] as f64;
        }
        e
    };
    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(i, j, c) in inst.edges() {
        neighbors[i].push((j, c));
        neighbors[j].push((i, c));
    }

    let mut spins = vec![1i8; n];
    let mut energy = exact(&spins);
    let mut best = spins.clone();
    let mut best_energy = energy;
    if n > 1 {
        for t in 1u64..1 << (n - 1) {
            let j = 1 + t.trailing_zeros() as usize;
            let local: f64 = neighbors[j]
                .iter()
                .map(|&(k, c)| c * spins[k] as f64)
                .sum();
            energy += 2.0 * spins[j] as f64 * local;
            spins[j] = -spins[j];
            if energy <= best_energy + 1e-9 {
                let fresh = exact(&spins);
                if fresh < best_energy || (fresh == best_energy && spins < best) {
                    best_energy = fresh;
                    best.copy_from_slice(&spins);
                }
            }
        }
    }
    Ok((SpinConfiguration::new(best)?, best_energy))
}

/// Entanglement spectrum of a statevector across the cut after the given
/// number of leading slots.
pub fn exact_cut_spectrum(v: &StateVector, cut: usize) -> Result<EntanglementSpectrum> {
    let n = v.n();
    if cut == 0 || cut >= n {
        return Err(Error::IndexOutOfRange(format!(
            "cut {cut} outside 1..{n}"
        )));
    }
    let rows = 1usize << cut;
    let cols = 1usize << (n - cut);
    let block = Array2::from_shape_vec((rows, cols), v.amplitudes.clone())
        .expect("length 2^n splits at any cut");
    let (_, singulars, _) = svd_econ(block)?;
    let weights: Vec<f64> = singulars.iter().map(|s| s * s).collect();
    EntanglementSpectrum::new(weights, cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        ferromagnetic_chain, ferromagnetic_grid, generate_instance, CouplingDist, GraphInstance,
        InstanceKind,
    };
    use crate::mps::Mps;
    use crate::ordering::{heuristic_path, identity_path};
    use crate::rng::Rng;
    use ndarray_linalg::{Eigh, UPLO};

    fn schedule(s: f64) -> SchedulePoint {
        SchedulePoint::new(s).unwrap()
    }

    fn single_site() -> GraphInstance {
        GraphInstance::new(1, vec![], InstanceKind::Chain, CouplingDist::Pm1, 0).unwrap()
    }

    #[test]
    fn statevector_is_validated() {
        assert!(StateVector::new(vec![1.0]).is_err());
        assert!(StateVector::new(vec![0.5, 0.5, 0.5]).is_err());
        assert!(StateVector::new(vec![1.0, 1.0]).is_err());
        assert!(StateVector::new(vec![f64::NAN, 0.0]).is_err());
        let v = StateVector::new(vec![0.5, 0.5, 0.5, 0.5]).unwrap();
        assert_eq!(v.n(), 2);
        let w = StateVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!((v.inner(&w).unwrap() - 0.5).abs() < 1e-15);
        assert!(v.inner(&StateVector::new(vec![1.0, 0.0]).unwrap()).is_err());
    }

    #[test]
    fn single_site_ground_energy_tracks_field() {
        let inst = single_site();
        let path = identity_path(1).unwrap();
        for s in [0.0, 0.3, 0.7, 1.0] {
            let (_, e) = exact_ground(&inst, &path, schedule(s)).unwrap();
            assert!((e + (1.0 - s) / 2.0).abs() < 1e-12, "s={s}: {e}");
        }
    }

    #[test]
    fn two_site_field_ground_is_plus_x_product() {
        let inst = ferromagnetic_chain(2).unwrap();
        let path = identity_path(2).unwrap();
        let (v, e) = exact_ground(&inst, &path, schedule(0.0)).unwrap();
        assert!((e + 1.0).abs() < 1e-12);
        for a in v.amplitudes() {
            assert!((a - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn two_site_midpoint_matches_explicit_matrix() {
        let inst = ferromagnetic_chain(2).unwrap();
        let path = identity_path(2).unwrap();
        let s = schedule(0.5);
        let h = dense_hamiltonian(&inst, &path, s).unwrap();
        let f = -0.25;
        let expected = ndarray::arr2(&[
            [-0.125, f, f, 0.0],
            [f, 0.125, 0.0, f],
            [f, 0.0, 0.125, f],
            [0.0, f, f, -0.125],
        ]);
        assert!((&h - &expected).iter().all(|d| d.abs() < 1e-15));
        let (vals, _) = h.eigh(UPLO::Lower).unwrap();
        let (_, e) = exact_ground(&inst, &path, s).unwrap();
        assert!((e - vals[0]).abs() < 1e-11);
    }

    #[test]
    fn lanczos_ground_matches_dense_spectrum() {
        let cases = [
            (generate_instance(5, InstanceKind::Chain, CouplingDist::Gaussian, 3).unwrap(), 0.3),
            (
                generate_instance(6, InstanceKind::Regular { d: 3 }, CouplingDist::Gaussian, 8)
                    .unwrap(),
                0.65,
            ),
            (
                generate_instance(6, InstanceKind::Grid { w: 3, h: 2 }, CouplingDist::Pm1, 5)
                    .unwrap(),
                0.999,
            ),
        ];
        for (inst, s) in cases {
            let path = heuristic_path(&inst);
            let h = dense_hamiltonian(&inst, &path, schedule(s)).unwrap();
            let (vals, _) = h.eigh(UPLO::Lower).unwrap();
            let (v, e) = exact_ground(&inst, &path, schedule(s)).unwrap();
            assert!((e - vals[0]).abs() < 1e-10, "s={s}");
            let amp = Array1::from_vec(v.amplitudes().to_vec());
            let sandwich = amp.dot(&h.dot(&amp));
            assert!((sandwich - e).abs() < 1e-10);
        }
    }

    #[test]
    fn ground_vector_overlaps_dense_away_from_degeneracy() {
        let inst =
            generate_instance(6, InstanceKind::Chain, CouplingDist::Gaussian, 12).unwrap();
        let path = identity_path(6).unwrap();
        for s in [0.2, 0.5, 0.9] {
            let h = dense_hamiltonian(&inst, &path, schedule(s)).unwrap();
            let (_, vecs) = h.eigh(UPLO::Lower).unwrap();
            let (v, _) = exact_ground(&inst, &path, schedule(s)).unwrap();
            let overlap: f64 = v
                .amplitudes()
                .iter()
                .zip(vecs.column(0))
                .map(|(a, b)| a * b)
                .sum();
            assert!(overlap.abs() > 1.0 - 1e-8, "s={s}: {overlap}");
        }
    }

    #[test]
    fn ground_energy_is_path_invariant() {
        let inst = generate_instance(6, InstanceKind::Regular { d: 3 }, CouplingDist::Gaussian, 21)
            .unwrap();
        let s = schedule(0.7);
        let (_, via_identity) = exact_ground(&inst, &identity_path(6).unwrap(), s).unwrap();
        let (_, via_heuristic) = exact_ground(&inst, &heuristic_path(&inst), s).unwrap();
        assert!((via_identity - via_heuristic).abs() < 1e-10);
    }

    #[test]
    fn classical_endpoint_selects_symmetric_doublet_member() {
        let inst = ferromagnetic_chain(4).unwrap();
        let path = identity_path(4).unwrap();
        let (v, e) = exact_ground(&inst, &path, schedule(1.0)).unwrap();
        // Ground doublet of the chain at s=1 is all-up/all-down with energy
        // −3/4; the symmetric seed picks the even combination.
        assert!((e + 0.75).abs() < 1e-11);
        let amps = v.amplitudes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((amps[0] - r).abs() < 1e-8);
        assert!((amps[15] - r).abs() < 1e-8);
        let bulk: f64 = amps[1..15].iter().map(|a| a * a).sum();
        assert!(bulk < 1e-16);
    }

    #[test]
    fn leading_amplitude_sign_is_canonical() {
        for seed in 0..4 {
            let inst =
                generate_instance(5, InstanceKind::Chain, CouplingDist::Gaussian, seed).unwrap();
            let path = identity_path(5).unwrap();
            let (v, _) = exact_ground(&inst, &path, schedule(0.6)).unwrap();
            let lead = v
                .amplitudes()
                .iter()
                .fold(0.0f64, |acc, a| if a.abs() > acc.abs() { *a } else { acc });
            assert!(lead > 0.0);
        }
    }

    #[test]
    fn size_caps_are_enforced() {
        let big = ferromagnetic_chain(11).unwrap();
        let path = identity_path(11).unwrap();
        assert!(matches!(
            dense_hamiltonian(&big, &path, schedule(0.5)),
            Err(Error::Capacity(_))
        ));
        let bigger = ferromagnetic_chain(15).unwrap();
        let path = identity_path(15).unwrap();
        assert!(matches!(
            exact_ground(&bigger, &path, schedule(0.5)),
            Err(Error::Capacity(_))
        ));
        let huge = ferromagnetic_chain(25).unwrap();
        assert!(matches!(brute_force_minimum(&huge), Err(Error::Capacity(_))));
    }

    #[test]
    fn ferromagnetic_minima_are_aligned() {
        let (config, e) = brute_force_minimum(&ferromagnetic_chain(2).unwrap()).unwrap();
        assert_eq!(config.values(), &[1, 1]);
        assert!((e + 1.0).abs() < 1e-15);
        let (config, e) = brute_force_minimum(&ferromagnetic_grid(2, 2).unwrap()).unwrap();
        assert_eq!(config.values(), &[1, 1, 1, 1]);
        assert!((e + 4.0).abs() < 1e-15);
    }

    #[test]
    fn frustrated_triangle_minimum() {
        let inst = GraphInstance::new(
            3,
            vec![(0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)],
            InstanceKind::Regular { d: 2 },
            CouplingDist::Pm1,
            0,
        )
        .unwrap();
        let (config, e) = brute_force_minimum(&inst).unwrap();
        assert!((e + 1.0).abs() < 1e-15);
        assert_eq!(config.values(), &[1, -1, -1]);
    }

    /// Plain full scan over all 2^n configurations, gauge applied afterward.
    fn naive_minimum(inst: &GraphInstance) -> (Vec<i8>, f64) {
        let n = inst.n();
        let mut best_energy = f64::INFINITY;
        let mut best: Vec<i8> = Vec::new();
        for b in 0..1u64 << n {
            let spins: Vec<i8> = (0..n)
                .map(|k| if b >> (n - 1 - k) & 1 == 0 { 1 } else { -1 })
                .collect();
            if spins[0] != 1 {
                continue;
            }
            let mut e = 0.0;
            for &(i, j, c) in inst.edges() {
                e -= c * spins[i] as f64 * spins[j] as f64;
            }
            if e < best_energy || (e == best_energy && spins < best) {
                best_energy = e;
                best = spins;
            }
        }
        (best, best_energy)
    }

    #[test]
    fn gray_walk_agrees_with_naive_scan() {
        for seed in 0..6 {
            let dist = if seed % 2 == 0 { CouplingDist::Gaussian } else { CouplingDist::Pm1 };
            let inst = generate_instance(9, InstanceKind::Regular { d: 4 }, dist, seed).unwrap();
            let (config, e) = brute_force_minimum(&inst).unwrap();
            let (naive_config, naive_e) = naive_minimum(&inst);
            assert_eq!(e, naive_e, "seed {seed}");
            assert_eq!(config.values(), &naive_config[..], "seed {seed}");
            let direct = inst.classical_energy(&config).unwrap();
            assert!((direct - e).abs() < 1e-12);
        }
    }

    #[test]
    fn minimum_energy_is_flip_invariant() {
        let inst =
            generate_instance(10, InstanceKind::Chain, CouplingDist::Gaussian, 33).unwrap();
        let (config, e) = brute_force_minimum(&inst).unwrap();
        let flipped = config.flipped();
        assert_eq!(inst.classical_energy(&flipped).unwrap(), e);
        assert_eq!(config.values()[0], 1);
    }

    #[test]
    fn cut_spectra_of_simple_states() {
        let product = StateVector::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let spec = exact_cut_spectrum(&product, 1).unwrap();
        assert_eq!(spec.probs().len(), 1);
        assert!((spec.probs()[0] - 1.0).abs() < 1e-14);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = StateVector::new(vec![r, 0.0, 0.0, r]).unwrap();
        let spec = exact_cut_spectrum(&bell, 1).unwrap();
        assert_eq!(spec.probs().len(), 2);
        assert!((spec.probs()[0] - 0.5).abs() < 1e-14);
        assert!((spec.probs()[1] - 0.5).abs() < 1e-14);

        assert!(exact_cut_spectrum(&bell, 0).is_err());
        assert!(exact_cut_spectrum(&bell, 2).is_err());
    }

    #[test]
    fn cut_spectra_match_tensor_network_spectra() {
        let mut rng = Rng::seed_from_u64(44);
        let raw: Vec<f64> = (0..64).map(|_| rng.standard_normal()).collect();
        let norm: f64 = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
        let amps: Vec<f64> = raw.iter().map(|x| x / norm).collect();
        let v = StateVector::new(amps.clone()).unwrap();
        let mut psi = Mps::from_statevector(&amps).unwrap();
        for cut in 1..6 {
            let direct = exact_cut_spectrum(&v, cut).unwrap();
            let network = psi.entanglement_spectrum(cut).unwrap();
            for (a, b) in direct.probs().iter().zip(network.probs()) {
                assert!((a - b).abs() < 1e-10, "cut {cut}");
            }
        }
    }

    #[test]
    fn midpoint_chain_spectrum_matches_network_import() {
        let inst = ferromagnetic_chain(8).unwrap();
        let path = identity_path(8).unwrap();
        let (v, _) = exact_ground(&inst, &path, schedule(0.5)).unwrap();
        let mut psi = Mps::from_statevector(v.amplitudes()).unwrap();
        let direct = exact_cut_spectrum(&v, 4).unwrap();
        let network = psi.entanglement_spectrum(4).unwrap();
        for (a, b) in direct.probs().iter().zip(network.probs()) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}
