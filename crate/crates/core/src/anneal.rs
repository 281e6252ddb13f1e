//! Adaptive ground-state tracking from the transverse-field endpoint to the
//! classical endpoint.
//!
//! The driver starts from the product state along +x, the exact ground
//! state at s=0, and walks s upward. Each move proposes s' = s + δs, solves
//! the ground state at s' seeded with the current state, and measures the
//! fidelity |⟨current|proposed⟩|. A fidelity below f_min rejects the move
//! and halves δs; after growth_after consecutive acceptances δs doubles up
//! to ds_max. When δs falls below ds_min the run stops and reports itself
//! aborted rather than failing. Accepted steps append telemetry: the
//! per-cut maxima of entanglement entropy, index spread, and effective
//! spectrum size, which together show how much bond dimension the sweep
//! actually exercised and where along the schedule it peaked.
//!
//! The run ends at s_final, just short of the classical endpoint, where the
//! tracked state is a near-equal superposition of the two flip-related
//! optima. Readout therefore collapses the state site by site instead of
//! reading marginal signs, so it lands on one optimum rather than on the
//! meaningless average of both.
//!
//! Late in the schedule the two lowest states of a flip-symmetric instance
//! approach exact degeneracy, and their splitting eventually falls below
//! the solver's truncation noise. From that point the seeded solve can
//! return a symmetry-broken branch while the tracked state is still the
//! even superposition; the fidelity then pins near 1/√2 no matter how small
//! δs gets, and the run aborts through the step floor. On chains this
//! tipping point moves toward smaller s as n grows: runs at n ≤ 16 reach
//! s_final, while much longer chains abort after the entanglement peak has
//! already been recorded, which is the quantity the scaling studies fit.
//!
//! Reports are byte-for-byte deterministic for identical inputs. That rules
//! out clock readings, so the wall_time_ms column carries a deterministic
//! work estimate (counted operations over a nominal per-millisecond rate)
//! instead of a measured duration.

use serde::Serialize;

use crate::dmrg::{solve_ground, DmrgSettings};
use crate::error::{Error, Result};
use crate::instance::{GraphInstance, SpinConfiguration};
use crate::mpo::{build_hamiltonian, SchedulePoint};
use crate::mps::Mps;
use crate::ordering::SitePath;
use crate::spectrum::{self, EntanglementSpectrum};

/// Nominal throughput used to convert the deterministic work estimate into
/// the wall_time_ms telemetry column.
const NOMINAL_FLOPS_PER_MS: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealParams {
    /// Initial schedule step δs.
    pub ds_init: f64,
    /// Abort floor for δs.
    pub ds_min: f64,
    /// Growth cap for δs.
    pub ds_max: f64,
    /// Fidelity acceptance threshold in (0, 1).
    pub f_min: f64,
    /// Readout point in (0, 1].
    pub s_final: f64,
    /// Consecutive accepted steps before δs doubles.
    pub growth_after: usize,
    pub dmrg: DmrgSettings,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            ds_init: 0.05,
            ds_min: 1e-6,
            ds_max: 0.1,
            f_min: 0.9,
            s_final: 0.999,
            growth_after: 2,
            dmrg: DmrgSettings::default(),
        }
    }
}

impl AnnealParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ds_min > 0.0 && self.ds_min <= self.ds_init && self.ds_init <= self.ds_max
            && self.ds_max <= 1.0)
        {
            return Err(Error::InvalidParameter(format!(
                "step sizes must satisfy 0 < ds_min ≤ ds_init ≤ ds_max ≤ 1, got {} / {} / {}",
                self.ds_min, self.ds_init, self.ds_max
            )));
        }
        if !(self.f_min > 0.0 && self.f_min < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "fidelity threshold must lie in (0, 1), got {}",
                self.f_min
            )));
        }
        if !(self.s_final > 0.0 && self.s_final <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "readout point must lie in (0, 1], got {}",
                self.s_final
            )));
        }
        if self.growth_after == 0 {
            return Err(Error::InvalidParameter(
                "growth threshold must be positive".into(),
            ));
        }
        self.dmrg.validate()
    }
}

/// Telemetry for one accepted step: the state after the move plus per-cut
/// maxima of its entanglement observables.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub s: f64,
    pub ds: f64,
    pub fidelity: f64,
    pub energy: f64,
    pub max_bond_dim: usize,
    pub max_vn_entropy: f64,
    pub max_index_sigma: f64,
    pub m_eff_1e2: usize,
    pub m_eff_1e3: usize,
    pub sweeps_used: usize,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub steps: Vec<StepRecord>,
    pub final_config: SpinConfiguration,
    pub final_classical_energy: f64,
    pub global_max_bond_dim: usize,
    pub global_max_entropy: f64,
    pub s_peak_entropy: f64,
    pub aborted: bool,
    pub abort_reason: Option<String>,
}

#[derive(Serialize)]
struct Summary<'a> {
    final_config: &'a [i8],
    final_classical_energy: f64,
    global_max_bond_dim: usize,
    global_max_entropy: f64,
    s_peak_entropy: f64,
    aborted: bool,
    abort_reason: &'a Option<String>,
}

impl RunReport {
    /// One row per accepted step under the fixed telemetry header.
    pub fn telemetry_csv(&self) -> String {
        let mut out = String::from(
            "step,s,ds,fidelity,energy,max_bond_dim,max_vn_entropy,max_index_sigma,m_eff_1e2,m_eff_1e3,sweeps_used,wall_time_ms\n",
        );
        for (k, r) in self.steps.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{}\n",
                k + 1,
                r.s,
                r.ds,
                r.fidelity,
                r.energy,
                r.max_bond_dim,
                r.max_vn_entropy,
                r.max_index_sigma,
                r.m_eff_1e2,
                r.m_eff_1e3,
                r.sweeps_used,
                r.wall_time_ms,
            ));
        }
        out
    }

    pub fn summary_json(&self) -> String {
        let summary = Summary {
            final_config: self.final_config.values(),
            final_classical_energy: self.final_classical_energy,
            global_max_bond_dim: self.global_max_bond_dim,
            global_max_entropy: self.global_max_entropy,
            s_peak_entropy: self.s_peak_entropy,
            aborted: self.aborted,
            abort_reason: &self.abort_reason,
        };
        let mut text = serde_json::to_string_pretty(&summary).expect("plain data serializes");
        text.push('\n');
        text
    }
}

/// Location and height of the entropy peak over the accepted steps, ties to
/// the smaller s.
pub fn peak_entropy_location(report: &RunReport) -> Result<(f64, f64)> {
    let first = report
        .steps
        .first()
        .ok_or_else(|| Error::EmptyInput("run accepted no steps".into()))?;
    let mut peak = (first.s, first.max_vn_entropy);
    for r in &report.steps[1..] {
        if r.max_vn_entropy > peak.1 {
            peak = (r.s, r.max_vn_entropy);
        }
    }
    Ok(peak)
}

pub fn run_qwa(inst: &GraphInstance, path: &SitePath, params: &AnnealParams) -> Result<RunReport> {
    run_qwa_with(inst, path, params, |_, _, _| ())
}

/// Runs the anneal, invoking the observer after every accepted step with
/// the step record, the state, and its cut spectra.
pub fn run_qwa_with<F>(
    inst: &GraphInstance,
    path: &SitePath,
    params: &AnnealParams,
    mut observe: F,
) -> Result<RunReport>
where
    F: FnMut(&StepRecord, &Mps, &[EntanglementSpectrum]),
{
    params.validate()?;
    let n = inst.n();
    if path.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "path over {} slots applied to {} spins",
            path.len(),
            n
        )));
    }

    let mut psi = Mps::product_plus_x(n)?;
    let mut s = 0.0;
    let mut ds = params.ds_init;
    let mut streak = 0usize;
    let mut steps: Vec<StepRecord> = Vec::new();
    let mut aborted = false;
    let mut abort_reason = None;

    while s < params.s_final {
        let proposal = (s + ds).min(params.s_final);
        let schedule = SchedulePoint::new(proposal)?;
        let h = build_hamiltonian(inst, path, schedule)?;
        let solved = match solve_ground(&psi, &h, &params.dmrg) {
            Ok(r) => r,
            Err(e) => {
                aborted = true;
                abort_reason = Some(format!("ground solve failed at s={proposal}: {e}"));
                break;
            }
        };
        let fidelity = psi.overlap(&solved.psi)?;
        if fidelity < params.f_min {
            streak = 0;
            ds /= 2.0;
            if ds < params.ds_min {
                aborted = true;
                abort_reason = Some(format!(
                    "step size {ds:e} fell below the floor {:e} at s={s} (fidelity {fidelity})",
                    params.ds_min
                ));
                break;
            }
            continue;
        }

        let used_ds = proposal - s;
        s = proposal;
        psi = solved.psi;
        let spectra = psi.all_cut_spectra()?;
        let mut max_entropy = 0.0f64;
        let mut max_sigma = 0.0f64;
        let mut m_eff_1e2 = 1usize;
        let mut m_eff_1e3 = 1usize;
        for sp in &spectra {
            max_entropy = max_entropy.max(spectrum::von_neumann(sp));
            let (_, variance) = spectrum::index_variance(sp);
            max_sigma = max_sigma.max(variance.sqrt());
            m_eff_1e2 = m_eff_1e2.max(spectrum::m_eff(sp, 1e-2)?);
            m_eff_1e3 = m_eff_1e3.max(spectrum::m_eff(sp, 1e-3)?);
        }
        let record = StepRecord {
            s,
            ds: used_ds,
            fidelity,
            energy: solved.energy,
            max_bond_dim: solved.max_bond_dim,
            max_vn_entropy: max_entropy,
            max_index_sigma: max_sigma,
            m_eff_1e2,
            m_eff_1e3,
            sweeps_used: solved.sweeps_used,
            wall_time_ms: (solved.flops_estimate / NOMINAL_FLOPS_PER_MS) as u64,
        };
        observe(&record, &psi, &spectra);
        steps.push(record);
        streak += 1;
        if streak >= params.growth_after {
            streak = 0;
            ds = (ds * 2.0).min(params.ds_max);
        }
    }

    let slot_signs = psi.collapse_z()?;
    let mut values = vec![0i8; n];
    for (slot, &vertex) in path.order().iter().enumerate() {
        values[vertex] = slot_signs.values()[slot];
    }
    let final_config = SpinConfiguration::new(values)?;
    let final_classical_energy = inst.classical_energy(&final_config)?;

    let mut global_max_bond_dim = 1;
    let mut global_max_entropy = 0.0f64;
    let mut s_peak_entropy = 0.0;
    for r in &steps {
        global_max_bond_dim = global_max_bond_dim.max(r.max_bond_dim);
        if r.max_vn_entropy > global_max_entropy {
            global_max_entropy = r.max_vn_entropy;
            s_peak_entropy = r.s;
        }
    }

    Ok(RunReport {
        steps,
        final_config,
        final_classical_energy,
        global_max_bond_dim,
        global_max_entropy,
        s_peak_entropy,
        aborted,
        abort_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ferromagnetic_chain, generate_instance, CouplingDist, InstanceKind};
    use crate::oracle::{brute_force_minimum, exact_ground};
    use crate::ordering::identity_path;

    #[test]
    fn params_are_validated() {
        assert!(AnnealParams::default().validate().is_ok());
        let bad = AnnealParams {
            ds_min: 0.2,
            ..AnnealParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealParams {
            f_min: 1.0,
            ..AnnealParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealParams {
            s_final: 0.0,
            ..AnnealParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealParams {
            growth_after: 0,
            ..AnnealParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = AnnealParams {
            ds_max: 1.5,
            ..AnnealParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn two_spin_ferromagnet_aligns() {
        let inst = ferromagnetic_chain(2).unwrap();
        let path = identity_path(2).unwrap();
        let report = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        assert!(!report.aborted);
        let values = report.final_config.values();
        assert!(values == [1, 1] || values == [-1, -1]);
        assert!((report.final_classical_energy + 1.0).abs() < 1e-12);
        assert!(!report.steps.is_empty());
        let last = report.steps.last().unwrap();
        assert!((last.s - 0.999).abs() < 1e-12);
        for r in &report.steps {
            assert!(r.fidelity >= 0.9);
            assert!(r.max_vn_entropy <= (r.max_bond_dim as f64).ln() + 1e-9);
        }
    }

    #[test]
    fn gaussian_chain_recovers_exhaustive_minimum() {
        let inst = generate_instance(8, InstanceKind::Chain, CouplingDist::Gaussian, 11).unwrap();
        let path = identity_path(8).unwrap();
        let report = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        assert!(!report.aborted);
        let (_, best) = brute_force_minimum(&inst).unwrap();
        assert!(
            (report.final_classical_energy - best).abs() < 1e-9,
            "{} vs {best}",
            report.final_classical_energy
        );
    }

    #[test]
    fn accepted_steps_track_exact_ground_state() {
        let inst = ferromagnetic_chain(8).unwrap();
        let path = identity_path(8).unwrap();
        let mut overlaps = Vec::new();
        run_qwa_with(&inst, &path, &AnnealParams::default(), |record, psi, _| {
            let schedule = SchedulePoint::new(record.s).unwrap();
            let (v, _) = exact_ground(&inst, &path, schedule).unwrap();
            let reference = Mps::from_statevector(v.amplitudes()).unwrap();
            overlaps.push(psi.overlap(&reference).unwrap());
        })
        .unwrap();
        assert!(!overlaps.is_empty());
        for o in overlaps {
            assert!(o >= 0.999, "overlap fell to {o}");
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let inst = generate_instance(6, InstanceKind::Chain, CouplingDist::Gaussian, 4).unwrap();
        let path = identity_path(6).unwrap();
        let a = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        let b = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        assert_eq!(a.telemetry_csv(), b.telemetry_csv());
        assert_eq!(a.summary_json(), b.summary_json());
        assert_eq!(a.steps, b.steps);
    }

    #[test]
    fn energies_move_continuously() {
        let inst = generate_instance(6, InstanceKind::Chain, CouplingDist::Gaussian, 9).unwrap();
        let path = identity_path(6).unwrap();
        let report = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        let coupling_mass: f64 = inst.edges().iter().map(|&(_, _, c)| c.abs()).sum();
        let slope_bound = 2.0 * (inst.n() as f64 / 2.0 + coupling_mass / 4.0);
        for pair in report.steps.windows(2) {
            let de = (pair[1].energy - pair[0].energy).abs();
            assert!(de <= slope_bound * pair[1].ds + 1e-9, "ΔE {de} over {}", pair[1].ds);
        }
    }

    #[test]
    fn peak_location_prefers_smaller_s_on_ties() {
        let template = StepRecord {
            s: 0.0,
            ds: 0.1,
            fidelity: 1.0,
            energy: 0.0,
            max_bond_dim: 2,
            max_vn_entropy: 0.0,
            max_index_sigma: 0.0,
            m_eff_1e2: 1,
            m_eff_1e3: 1,
            sweeps_used: 1,
            wall_time_ms: 0,
        };
        let step = |s: f64, entropy: f64| StepRecord {
            s,
            max_vn_entropy: entropy,
            ..template.clone()
        };
        let mut report = RunReport {
            steps: vec![step(0.2, 0.1), step(0.5, 0.5), step(0.8, 0.3)],
            final_config: SpinConfiguration::new(vec![1]).unwrap(),
            final_classical_energy: 0.0,
            global_max_bond_dim: 2,
            global_max_entropy: 0.5,
            s_peak_entropy: 0.5,
            aborted: false,
            abort_reason: None,
        };
        assert_eq!(peak_entropy_location(&report).unwrap(), (0.5, 0.5));

        report.steps = vec![step(0.3, 0.4)];
        assert_eq!(peak_entropy_location(&report).unwrap(), (0.3, 0.4));

        report.steps = vec![step(0.2, 0.4), step(0.6, 0.4)];
        assert_eq!(peak_entropy_location(&report).unwrap(), (0.2, 0.4));

        report.steps.clear();
        assert!(peak_entropy_location(&report).is_err());
    }

    #[test]
    fn underflowing_step_size_aborts_cleanly() {
        let inst = generate_instance(4, InstanceKind::Chain, CouplingDist::Gaussian, 2).unwrap();
        let path = identity_path(4).unwrap();
        let params = AnnealParams {
            ds_init: 0.5,
            ds_min: 0.4,
            ds_max: 0.5,
            f_min: 1.0 - 1e-9,
            ..AnnealParams::default()
        };
        let report = run_qwa(&inst, &path, &params).unwrap();
        assert!(report.aborted);
        let reason = report.abort_reason.as_deref().unwrap();
        assert!(reason.contains("below the floor"), "{reason}");
        assert_eq!(report.final_config.values().len(), 4);
        let json = report.summary_json();
        assert!(json.contains("\"aborted\": true"));
    }

    #[test]
    fn csv_has_fixed_header_and_full_rows() {
        let inst = ferromagnetic_chain(2).unwrap();
        let path = identity_path(2).unwrap();
        let report = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        let csv = report.telemetry_csv();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,s,ds,fidelity,energy,max_bond_dim,max_vn_entropy,max_index_sigma,m_eff_1e2,m_eff_1e3,sweeps_used,wall_time_ms"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), report.steps.len());
        for (k, row) in rows.iter().enumerate() {
            let fields: Vec<&str> = row.split(',').collect();
            assert_eq!(fields.len(), 12);
            assert_eq!(fields[0], (k + 1).to_string());
        }
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn summary_json_has_exact_key_order() {
        let inst = ferromagnetic_chain(2).unwrap();
        let path = identity_path(2).unwrap();
        let report = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        let json = report.summary_json();
        let keys = [
            "final_config",
            "final_classical_energy",
            "global_max_bond_dim",
            "global_max_entropy",
            "s_peak_entropy",
            "aborted",
            "abort_reason",
        ];
        let mut last = 0;
        for key in keys {
            let at = json.find(&format!("\"{key}\"")).unwrap_or_else(|| panic!("missing {key}"));
            assert!(at > last || last == 0, "{key} out of order");
            last = at;
        }
        assert!(json.contains("\"abort_reason\": null"));
        let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed["final_config"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn single_spin_run_has_flat_telemetry() {
        let inst = crate::instance::GraphInstance::new(
            1,
            vec![],
            InstanceKind::Chain,
            CouplingDist::Pm1,
            0,
        )
        .unwrap();
        let path = identity_path(1).unwrap();
        let report = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        assert!(!report.aborted);
        assert_eq!(report.final_config.values(), &[1]);
        assert_eq!(report.final_classical_energy, 0.0);
        assert_eq!(report.global_max_bond_dim, 1);
        assert_eq!(report.global_max_entropy, 0.0);
        for r in &report.steps {
            assert_eq!(r.max_bond_dim, 1);
            assert_eq!(r.max_vn_entropy, 0.0);
            assert_eq!(r.m_eff_1e2, 1);
            assert!(r.fidelity >= 0.9);
        }
    }

    #[test]
    fn global_maxima_match_step_maxima() {
        let inst = generate_instance(8, InstanceKind::Chain, CouplingDist::Gaussian, 11).unwrap();
        let path = identity_path(8).unwrap();
        let report = run_qwa(&inst, &path, &AnnealParams::default()).unwrap();
        let step_max_bond = report.steps.iter().map(|r| r.max_bond_dim).max().unwrap();
        let step_max_entropy = report
            .steps
            .iter()
            .map(|r| r.max_vn_entropy)
            .fold(0.0f64, f64::max);
        assert_eq!(report.global_max_bond_dim, step_max_bond);
        assert_eq!(report.global_max_entropy, step_max_entropy);
        let (s_peak, peak) = peak_entropy_location(&report).unwrap();
        assert_eq!(s_peak, report.s_peak_entropy);
        assert_eq!(peak, report.global_max_entropy);
    }
}
