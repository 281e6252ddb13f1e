//! Thin LAPACK wrappers for bond splitting.

use ndarray::{Array1, Array2};
use ndarray_linalg::{JobSvd, SVDDCInto, SVDInto};

use crate::error::{Error, Result};
use crate::spectrum::keep_count;

/// Economy SVD: U (rows × k), singular values (k), V^T (k × cols) with
/// k = min(rows, cols). Tries the divide-and-conquer driver first and falls
/// back to the standard one, which is slower but more robust.
pub(crate) fn svd_econ(a: Array2<f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (rows, cols) = a.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidSize("cannot factor an empty matrix".into()));
    }
    let k = rows.min(cols);
    match a.clone().svddc_into(JobSvd::Some) {
        Ok((Some(u), s, Some(vt))) => Ok((u, s, vt)),
        _ => {
            let (u, s, vt) = a
                .svd_into(true, true)
                .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e}")))?;
            let u = u.ok_or_else(|| Error::Numerical("missing left singular vectors".into()))?;
            let vt = vt.ok_or_else(|| Error::Numerical("missing right singular vectors".into()))?;
            // The plain driver returns full square factors; slice to economy.
            let u = u.slice_move(ndarray::s![.., ..k]);
            let vt = vt.slice_move(ndarray::s![..k, ..]);
            Ok((u, s, vt))
        }
    }
}

/// One truncated bond split.
#[derive(Debug)]
pub(crate) struct SplitOutcome {
    /// Left isometry, (rows × kept).
    pub left: Array2<f64>,
    /// Retained singular values, unnormalized.
    pub singulars: Vec<f64>,
    /// Right factor V^T, (kept × cols).
    pub right: Array2<f64>,
    /// Discarded probability mass Σ_{i>kept} p_i.
    pub discarded_weight: f64,
    /// Whether the dimension cap cut deeper than the tolerance asked.
    pub cap_bound: bool,
}

/// Factors a two-site block and keeps the smallest head of the Schmidt
/// spectrum whose discarded tail is strictly below epsilon, capped at m_max.
pub(crate) fn split_truncate(a: Array2<f64>, epsilon: f64, m_max: usize) -> Result<SplitOutcome> {
    if epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "truncation tolerance must be positive, got {epsilon}"
        )));
    }
    if m_max == 0 {
        return Err(Error::InvalidParameter("bond cap must be at least 1".into()));
    }
    let (u, s, vt) = svd_econ(a)?;
    let total: f64 = s.iter().map(|x| x * x).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Numerical(format!(
            "two-site block has squared norm {total}"
        )));
    }
    let probs: Vec<f64> = s.iter().map(|x| x * x / total).collect();
    let wanted = keep_count(&probs, epsilon);
    let cap_bound = wanted > m_max;
    let kept = wanted.min(m_max);
    let discarded_weight: f64 = probs[kept..].iter().rev().sum();
    Ok(SplitOutcome {
        left: u.slice(ndarray::s![.., ..kept]).to_owned(),
        singulars: s.iter().take(kept).copied().collect(),
        right: vt.slice(ndarray::s![..kept, ..]).to_owned(),
        discarded_weight,
        cap_bound,
    })
}
