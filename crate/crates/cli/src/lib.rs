//! Scenario layer behind the `qwa` binary: instance generation, single
//! annealed runs, validation against exhaustive search, and scaling sweeps
//! over lists of sizes.
//!
//! Scenario functions return a process exit code: 0 for a clean pass, 1 for
//! a run that completed but aborted or failed validation. Unusable inputs
//! (missing files, malformed parameters) surface as errors, which the
//! binary maps to exit code 2. Output files are written through a temp file
//! plus rename, so each artifact is either complete or absent.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use qwa_core::anneal::{run_qwa, AnnealParams, RunReport};
use qwa_core::instance::{
    ferromagnetic_chain, ferromagnetic_grid, generate_instance, CouplingDist, GraphInstance,
    InstanceKind,
};
use qwa_core::oracle::{brute_force_minimum, BRUTE_CAP};
use qwa_core::ordering::{heuristic_path, identity_path, SitePath};

/// Site-ordering choice: a named strategy or an explicit permutation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathChoice {
    Identity,
    Heuristic,
    Explicit(Vec<usize>),
}

impl FromStr for PathChoice {
    type Err = String;

    fn from_str(text: &str) -> std::result::Result<Self, String> {
        match text {
            "identity" => Ok(PathChoice::Identity),
            "heuristic" => Ok(PathChoice::Heuristic),
            other => match SitePath::parse(other) {
                Ok(path) => Ok(PathChoice::Explicit(path.order().to_vec())),
                Err(e) => Err(format!(
                    "expected \"identity\", \"heuristic\", or a comma-separated permutation: {e}"
                )),
            },
        }
    }
}

impl PathChoice {
    /// Materializes the choice for a concrete instance.
    pub fn resolve(&self, inst: &GraphInstance) -> Result<SitePath> {
        let path = match self {
            PathChoice::Identity => identity_path(inst.n())?,
            PathChoice::Heuristic => heuristic_path(inst),
            PathChoice::Explicit(order) => {
                let path = SitePath::new(order.clone())?;
                if path.len() != inst.n() {
                    bail!(
                        "explicit path covers {} sites but the instance has {}",
                        path.len(),
                        inst.n()
                    );
                }
                path
            }
        };
        Ok(path)
    }
}

/// Parses an instance-kind spec: `chain`, `grid:WxH`, or `regular:D`.
pub fn parse_kind(text: &str) -> Result<InstanceKind> {
    if text == "chain" {
        return Ok(InstanceKind::Chain);
    }
    if let Some(dims) = text.strip_prefix("grid:") {
        let (w, h) = dims
            .split_once('x')
            .with_context(|| format!("grid spec {dims:?} is not WxH"))?;
        let w: usize = w.parse().with_context(|| format!("bad grid width {w:?}"))?;
        let h: usize = h.parse().with_context(|| format!("bad grid height {h:?}"))?;
        return Ok(InstanceKind::Grid { w, h });
    }
    if let Some(d) = text.strip_prefix("regular:") {
        let d: usize = d.parse().with_context(|| format!("bad degree {d:?}"))?;
        return Ok(InstanceKind::Regular { d });
    }
    bail!("unknown instance kind {text:?} (expected \"chain\", \"grid:WxH\", or \"regular:D\")")
}

/// Where a scenario gets its instance.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    File(PathBuf),
    Generated {
        n: usize,
        kind: InstanceKind,
        dist: CouplingDist,
        seed: u64,
    },
}

impl InstanceSource {
    pub fn load(&self) -> Result<GraphInstance> {
        match self {
            InstanceSource::File(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read instance file {}", path.display()))?;
                GraphInstance::from_json(&text)
                    .with_context(|| format!("cannot parse instance file {}", path.display()))
            }
            InstanceSource::Generated { n, kind, dist, seed } => {
                Ok(generate_instance(*n, *kind, *dist, *seed)?)
            }
        }
    }
}

/// Annealer knobs exposed on the command line; `params` copies them onto the
/// library defaults.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub eps: f64,
    pub m_max: usize,
    pub f_min: f64,
    pub ds: f64,
    pub ds_min: f64,
    pub ds_max: f64,
    pub s_final: f64,
    pub path: PathChoice,
}

impl Default for RunSettings {
    fn default() -> Self {
        let p = AnnealParams::default();
        RunSettings {
            eps: p.dmrg.epsilon,
            m_max: p.dmrg.m_max,
            f_min: p.f_min,
            ds: p.ds_init,
            ds_min: p.ds_min,
            ds_max: p.ds_max,
            s_final: p.s_final,
            path: PathChoice::Heuristic,
        }
    }
}

impl RunSettings {
    pub fn params(&self) -> AnnealParams {
        let mut p = AnnealParams::default();
        p.dmrg.epsilon = self.eps;
        p.dmrg.m_max = self.m_max;
        p.f_min = self.f_min;
        p.ds_init = self.ds;
        p.ds_min = self.ds_min;
        p.ds_max = self.ds_max;
        p.s_final = self.s_final;
        p
    }
}

/// Writes `contents` through a sibling temp file and a rename, so the file
/// at `path` is either complete or absent.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path
        .parent()
        .with_context(|| format!("output path {} has no parent directory", path.display()))?;
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).with_context(|| format!("cannot write {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("cannot move {} into place", tmp.display()))?;
    Ok(())
}

/// Generates an instance and writes it as JSON under `out`; returns the
/// file path.
pub fn scenario_gen(
    n: usize,
    kind: InstanceKind,
    dist: CouplingDist,
    seed: u64,
    out: &Path,
) -> Result<PathBuf> {
    let inst = generate_instance(n, kind, dist, seed)?;
    let name = format!(
        "{}_{}_n{}_seed{}.json",
        inst.kind().label(),
        inst.dist().label(),
        n,
        seed
    );
    let path = out.join(name);
    let mut text = inst.to_json();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    write_atomic(&path, &text)?;
    Ok(path)
}

/// A completed run plus where its artifacts were written.
#[derive(Debug)]
pub struct RunArtifacts {
    pub report: RunReport,
    pub telemetry_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Anneals one instance and writes `telemetry.csv` and `summary.json` under
/// `out`. Exit code 1 when the run aborted.
pub fn scenario_run(
    inst: &GraphInstance,
    settings: &RunSettings,
    out: &Path,
) -> Result<(RunArtifacts, i32)> {
    let path = settings.path.resolve(inst)?;
    let report = run_qwa(inst, &path, &settings.params())?;
    let telemetry_path = out.join("telemetry.csv");
    write_atomic(&telemetry_path, &report.telemetry_csv())?;
    let summary_path = out.join("summary.json");
    write_atomic(&summary_path, &report.summary_json())?;
    let code = if report.aborted { 1 } else { 0 };
    Ok((
        RunArtifacts {
            report,
            telemetry_path,
            summary_path,
        },
        code,
    ))
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub n: usize,
    pub annealed_energy: f64,
    pub exhaustive_energy: f64,
    pub energy_gap: f64,
    pub aborted: bool,
    pub passed: bool,
}

/// Anneals one instance and checks the final energy against exhaustive
/// search, writing `validation.json` next to the run artifacts. Exit code 1
/// when the energies disagree or the run aborted. Instances above the
/// exhaustive-search cap are rejected.
pub fn scenario_validate(
    inst: &GraphInstance,
    settings: &RunSettings,
    out: &Path,
) -> Result<(ValidationReport, i32)> {
    if inst.n() > BRUTE_CAP {
        bail!(
            "validation compares against exhaustive search, which allows at most {BRUTE_CAP} spins (instance has {})",
            inst.n()
        );
    }
    let (artifacts, _) = scenario_run(inst, settings, out)?;
    let report = &artifacts.report;
    let (_, best) = brute_force_minimum(inst)?;
    let gap = report.final_classical_energy - best;
    let passed = !report.aborted && gap.abs() <= 1e-9;
    let validation = ValidationReport {
        n: inst.n(),
        annealed_energy: report.final_classical_energy,
        exhaustive_energy: best,
        energy_gap: gap,
        aborted: report.aborted,
        passed,
    };
    let text = serde_json::to_string_pretty(&validation)? + "\n";
    write_atomic(&out.join("validation.json"), &text)?;
    Ok((validation, if passed { 0 } else { 1 }))
}

/// Scaling families: chains under both coupling distributions, or narrow
/// ferromagnetic strips where bond growth is the observable of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingFamily {
    Chains1d,
    Strips2d,
}

/// One aggregate line of a scaling sweep.
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub label: String,
    pub n: usize,
    pub global_max_entropy: f64,
    pub global_max_bond_dim: usize,
    pub s_peak_entropy: f64,
    /// Whether the final energy matched exhaustive search; absent when the
    /// instance is too large to search.
    pub solved: Option<bool>,
}

/// Renders aggregate rows sorted by size. The solved cell is empty when
/// exhaustive search was not feasible for that size.
pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut sorted: Vec<&AggregateRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.n);
    let mut out = String::from("n,global_max_entropy,global_max_bond_dim,s_peak_entropy,solved\n");
    for r in sorted {
        let solved = match r.solved {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n, r.global_max_entropy, r.global_max_bond_dim, r.s_peak_entropy, solved
        );
    }
    out
}

/// Runs a scaling sweep over `sizes`: each instance gets its own
/// subdirectory of artifacts under `out`, and `aggregate.csv` collects one
/// row per run. Exit code 1 when any run aborted.
///
/// `Chains1d` runs a uniform ferromagnetic chain and a seeded gaussian
/// chain at every size; `Strips2d` runs ferromagnetic strips of width 2
/// and 4, so every size must be divisible by 4.
pub fn scenario_scaling(
    family: ScalingFamily,
    sizes: &[usize],
    settings: &RunSettings,
    seed: u64,
    out: &Path,
) -> Result<(Vec<AggregateRow>, i32)> {
    if sizes.is_empty() {
        bail!("scaling needs at least one size");
    }
    let mut ordered = sizes.to_vec();
    ordered.sort_unstable();
    ordered.dedup();
    let mut specs: Vec<(String, GraphInstance)> = Vec::new();
    for &n in &ordered {
        match family {
            ScalingFamily::Chains1d => {
                specs.push((format!("uniform_chain_n{n}"), ferromagnetic_chain(n)?));
                specs.push((
                    format!("gaussian_chain_n{n}"),
                    generate_instance(
                        n,
                        InstanceKind::Chain,
                        CouplingDist::Gaussian,
                        seed.wrapping_add(n as u64),
                    )?,
                ));
            }
            ScalingFamily::Strips2d => {
                for w in [2usize, 4] {
                    if n % w != 0 || n / w < 2 {
                        bail!("strip width {w} needs a size divisible by {w} with at least two rows, got {n}");
                    }
                    specs.push((format!("strip_w{w}_n{n}"), ferromagnetic_grid(w, n / w)?));
                }
            }
        }
    }
    let mut rows = Vec::new();
    let mut worst = 0;
    for (label, inst) in &specs {
        let (artifacts, code) = scenario_run(inst, settings, &out.join(label))?;
        worst = worst.max(code);
        let report = artifacts.report;
        let solved = if inst.n() <= BRUTE_CAP {
            let (_, best) = brute_force_minimum(inst)?;
            Some(!report.aborted && (report.final_classical_energy - best).abs() <= 1e-9)
        } else {
            None
        };
        rows.push(AggregateRow {
            label: label.clone(),
            n: inst.n(),
            global_max_entropy: report.global_max_entropy,
            global_max_bond_dim: report.global_max_bond_dim,
            s_peak_entropy: report.s_peak_entropy,
            solved,
        });
    }
    write_atomic(&out.join("aggregate.csv"), &aggregate_csv(&rows))?;
    Ok((rows, worst))
}

/// Least-squares fit of S ≈ alpha·ln(n) + beta over (n, S) points; returns
/// (alpha, beta, RMS residual). Needs at least three distinct sizes.
pub fn fit_log_scaling(points: &[(usize, f64)]) -> qwa_core::Result<(f64, f64, f64)> {
    use qwa_core::Error;
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::EmptyInput(format!(
            "log fit needs at least 3 distinct sizes, got {}",
            distinct.len()
        )));
    }
    for &(n, v) in points {
        if n == 0 {
            return Err(Error::InvalidParameter("size 0 has no logarithm".into()));
        }
        if !v.is_finite() {
            return Err(Error::Numerical(format!("non-finite value {v} in log fit")));
        }
    }
    let k = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / k;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / k;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, p) in xs.iter().zip(points) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (p.1 - mean_y);
    }
    let alpha = sxy / sxx;
    let beta = mean_y - alpha * mean_x;
    let mut sq = 0.0;
    for (x, p) in xs.iter().zip(points) {
        let r = p.1 - (alpha * x + beta);
        sq += r * r;
    }
    Ok((alpha, beta, (sq / k).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_logarithmic_growth() {
        let points: Vec<(usize, f64)> =
            [8, 16, 32].iter().map(|&n| (n, (n as f64).ln())).collect();
        let (alpha, beta, rms) = fit_log_scaling(&points).unwrap();
        assert!((alpha - 1.0).abs() < 1e-9);
        assert!(beta.abs() < 1e-9);
        assert!(rms.abs() < 1e-9);
    }

    #[test]
    fn fit_handles_a_constant_series() {
        let points = vec![(8usize, 0.7), (16, 0.7), (32, 0.7)];
        let (alpha, beta, rms) = fit_log_scaling(&points).unwrap();
        assert!(alpha.abs() < 1e-12);
        assert!((beta - 0.7).abs() < 1e-12);
        assert!(rms.abs() < 1e-12);
    }

    #[test]
    fn fit_requires_three_distinct_sizes() {
        assert!(fit_log_scaling(&[(8, 1.0), (16, 2.0)]).is_err());
        assert!(fit_log_scaling(&[(8, 1.0), (8, 1.1), (16, 2.0)]).is_err());
        assert!(fit_log_scaling(&[]).is_err());
    }

    #[test]
    fn fit_reports_scatter_around_the_trend() {
        let mut points = Vec::new();
        for (i, &n) in [8usize, 16, 32, 64].iter().enumerate() {
            let noise = if i % 2 == 0 { 0.01 } else { -0.01 };
            points.push((n, 0.5 * (n as f64).ln() + 0.2 + noise));
        }
        let (alpha, _, rms) = fit_log_scaling(&points).unwrap();
        assert!((alpha - 0.5).abs() < 0.02);
        assert!(rms > 0.0 && rms < 0.011);
    }

    #[test]
    fn path_choice_parses_named_strategies_and_permutations() {
        assert_eq!("identity".parse::<PathChoice>().unwrap(), PathChoice::Identity);
        assert_eq!(
            "heuristic".parse::<PathChoice>().unwrap(),
            PathChoice::Heuristic
        );
        assert_eq!(
            "2,0,1".parse::<PathChoice>().unwrap(),
            PathChoice::Explicit(vec![2, 0, 1])
        );
        assert!("northwest".parse::<PathChoice>().is_err());
        assert!("0,0,1".parse::<PathChoice>().is_err());
    }

    #[test]
    fn explicit_path_must_cover_the_instance() {
        let inst = ferromagnetic_chain(4).unwrap();
        let choice = PathChoice::Explicit(vec![2, 0, 1]);
        assert!(choice.resolve(&inst).is_err());
        let full = PathChoice::Explicit(vec![3, 2, 1, 0]);
        assert_eq!(full.resolve(&inst).unwrap().order(), &[3, 2, 1, 0]);
    }

    #[test]
    fn kind_specs_cover_the_three_families() {
        assert_eq!(parse_kind("chain").unwrap(), InstanceKind::Chain);
        assert_eq!(
            parse_kind("grid:2x4").unwrap(),
            InstanceKind::Grid { w: 2, h: 4 }
        );
        assert_eq!(parse_kind("regular:3").unwrap(), InstanceKind::Regular { d: 3 });
        assert!(parse_kind("torus").is_err());
        assert!(parse_kind("grid:2by4").is_err());
        assert!(parse_kind("regular:x").is_err());
    }

    #[test]
    fn aggregate_rows_sort_by_size_with_an_optional_solved_cell() {
        let rows = vec![
            AggregateRow {
                label: "c".into(),
                n: 32,
                global_max_entropy: 1.25,
                global_max_bond_dim: 7,
                s_peak_entropy: 0.5,
                solved: None,
            },
            AggregateRow {
                label: "a".into(),
                n: 8,
                global_max_entropy: 0.5,
                global_max_bond_dim: 3,
                s_peak_entropy: 0.4,
                solved: Some(true),
            },
            AggregateRow {
                label: "b".into(),
                n: 8,
                global_max_entropy: 0.75,
                global_max_bond_dim: 4,
                s_peak_entropy: 0.45,
                solved: Some(false),
            },
        ];
        let csv = aggregate_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "n,global_max_entropy,global_max_bond_dim,s_peak_entropy,solved"
        );
        assert_eq!(lines[1], "8,0.5,3,0.4,1");
        assert_eq!(lines[2], "8,0.75,4,0.45,0");
        assert_eq!(lines[3], "32,1.25,7,0.5,");
        assert_eq!(lines.len(), 4);
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn atomic_writes_leave_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("nested").join("out.csv");
        write_atomic(&target, "a,b\n1,2\n").unwrap();
        assert_eq!(fs::read_to_string(&target).unwrap(), "a,b\n1,2\n");
        let entries: Vec<_> = fs::read_dir(target.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(entries, vec![std::ffi::OsString::from("out.csv")]);
    }
}
