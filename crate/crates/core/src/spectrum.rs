//! Entanglement-spectrum statistics.
//!
//! A bipartition's reduced density matrix has eigenvalues p_1 ≥ p_2 ≥ … that
//! form a discrete probability distribution. Everything the telemetry tracks
//! derives from it: the von Neumann entropy S = ⟨−ln p_i⟩, the mean and
//! variance of the eigenvalue index, the effective dimension m(ε) needed to
//! keep the discarded tail strictly below ε, and a Chebyshev estimate
//! ⌈⟨i⟩ + σ/√ε⌉ that upper-bounds m(ε) without scanning the tail.

use crate::error::{Error, Result};

/// Reduced-density-matrix eigenvalues at one bond, descending and normalized.
#[derive(Debug, Clone)]
pub struct EntanglementSpectrum {
    probs: Vec<f64>,
    cut: usize,
}

/// Eigenvalues below this are round-off, not entanglement; they are dropped
/// so entropies stay finite and tail counts meaningful.
const PROB_FLOOR: f64 = 1e-16;

impl EntanglementSpectrum {
    /// Builds a spectrum from raw nonnegative weights (e.g. squared singular
    /// values): sorts descending, normalizes, drops entries below the floor.
    pub fn new(weights: Vec<f64>, cut: usize) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("spectrum has no eigenvalues".into()));
        }
        if let Some(&w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::Numerical(format!(
                "spectrum weight {w} is negative or not finite"
            )));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::Numerical("spectrum weights sum to zero".into()));
        }
        let mut probs: Vec<f64> = weights
            .iter()
            .map(|w| w / total)
            .filter(|&p| p >= PROB_FLOOR)
            .collect();
        if probs.is_empty() {
            return Err(Error::Numerical(
                "all spectrum weights fall below the floor".into(),
            ));
        }
        probs.sort_unstable_by(|a, b| b.total_cmp(a));
        let kept: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= kept;
        }
        Ok(EntanglementSpectrum { probs, cut })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    /// Number of retained eigenvalues N_T.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// S = −Σ p_i ln p_i in nats.
pub fn von_neumann(spec: &EntanglementSpectrum) -> f64 {
    let s: f64 = spec.probs().iter().map(|&p| p * p.ln()).sum();
    (-s).max(0.0)
}

/// (⟨i⟩, σ²) of the eigenvalue index, indices counted from 1 in
/// descending-p order.
pub fn index_variance(spec: &EntanglementSpectrum) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for (k, &p) in spec.probs().iter().enumerate() {
        let i = (k + 1) as f64;
        mean += i * p;
        second += i * i * p;
    }
    (mean, (second - mean * mean).max(0.0))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

/// Smallest count whose discarded tail is strictly below epsilon, never
/// less than 1. Shared by m_eff and bond truncation.
pub(crate) fn keep_count(probs: &[f64], epsilon: f64) -> usize {
    let mut keep = probs.len();
    let mut tail = 0.0;
    while keep > 1 {
        let grown = tail + probs[keep - 1];
        if grown < epsilon {
            tail = grown;
            keep -= 1;
        } else {
            break;
        }
    }
    keep
}

/// Smallest m with Σ_{i>m} p_i < ε (strict).
pub fn m_eff(spec: &EntanglementSpectrum, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    Ok(keep_count(spec.probs(), epsilon))
}

/// Chebyshev estimate ⌈⟨i⟩ + σ/√ε⌉; always ≥ m_eff at the same ε.
pub fn chebyshev_m(spec: &EntanglementSpectrum, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    let (mean, var) = index_variance(spec);
    Ok((mean + var.sqrt() / epsilon.sqrt()).ceil() as usize)
}

/// Bundled metrics for one spectrum at a fixed set of tolerances.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub vn_entropy: f64,
    pub index_mean: f64,
    pub index_variance: f64,
    pub m_eff: Vec<(f64, usize)>,
    pub chebyshev_m: Vec<(f64, usize)>,
}

impl SpectrumReport {
    pub fn build(spec: &EntanglementSpectrum, epsilons: &[f64]) -> Result<SpectrumReport> {
        let (index_mean, variance) = index_variance(spec);
        let mut m_eff_map = Vec::with_capacity(epsilons.len());
        let mut cheb_map = Vec::with_capacity(epsilons.len());
        for &eps in epsilons {
            m_eff_map.push((eps, m_eff(spec, eps)?));
            cheb_map.push((eps, chebyshev_m(spec, eps)?));
        }
        Ok(SpectrumReport {
            vn_entropy: von_neumann(spec),
            index_mean,
            index_variance: variance,
            m_eff: m_eff_map,
            chebyshev_m: cheb_map,
        })
    }
}
