//! Lowest eigenpair of a symmetric operator by the Lanczos iteration.
//!
//! The operator is supplied matrix-free as a closure. Every new Krylov
//! vector is reorthogonalized against the full stored basis (two passes),
//! which keeps the basis numerically orthogonal at the cost of storing it;
//! callers here work at modest dimensions where that trade is right.
//! Convergence targets the smallest Ritz value theta with residual
//! beta·|y_last| ≤ tol·max(1, |theta|). The iteration finds the lowest
//! eigenvalue within the Krylov space seeded by the start vector, so seeds
//! orthogonal to the true ground state stay orthogonal; callers pick seeds
//! with full support when that matters.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::error::{Error, Result};

pub(crate) struct LanczosOutcome {
    pub value: f64,
    pub vector: Array1<f64>,
    pub matvecs: usize,
    pub converged: bool,
}

/// Smallest eigenpair of the tridiagonal matrix with the given diagonal and
/// off-diagonal entries.
fn tridiag_ground(alphas: &[f64], betas: &[f64]) -> Result<(f64, Array1<f64>)> {
    let k = alphas.len();
    if k == 1 {
        return Ok((alphas[0], Array1::ones(1)));
    }
    let mut t = Array2::zeros((k, k));
    for (i, &a) in alphas.iter().enumerate() {
        t[[i, i]] = a;
    }
    for (i, &b) in betas.iter().take(k - 1).enumerate() {
        t[[i + 1, i]] = b;
        t[[i, i + 1]] = b;
    }
    let (vals, vecs) = t
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Numerical(format!("tridiagonal eigensolve failed: {e}")))?;
    Ok((vals[0], vecs.column(0).to_owned()))
}

pub(crate) fn lowest_eigenpair<F>(
    mut apply: F,
    seed: &Array1<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<LanczosOutcome>
where
    F: FnMut(&Array1<f64>) -> Array1<f64>,
{
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "eigensolver tolerance must be positive and finite, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter(
            "eigensolver iteration budget must be positive".into(),
        ));
    }
    let dim = seed.len();
    if dim == 0 {
        return Err(Error::EmptyInput("eigensolver seed is empty".into()));
    }
    let seed_norm = seed.dot(seed).sqrt();
    if !(seed_norm > 0.0 && seed_norm.is_finite()) {
        return Err(Error::Numerical(format!(
            "eigensolver seed has invalid norm {seed_norm}"
        )));
    }

    let mut basis: Vec<Array1<f64>> = vec![seed / seed_norm];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut matvecs = 0;

    loop {
        let it = alphas.len();
        let mut w = apply(&basis[it]);
        matvecs += 1;
        if w.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "operator mapped dimension {dim} to {}",
                w.len()
            )));
        }
        if !w.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical(
                "operator produced a non-finite vector".into(),
            ));
        }
        alphas.push(basis[it].dot(&w));
        // Two reorthogonalization passes; the first already includes the
        // textbook alpha/beta subtractions.
        for _ in 0..2 {
            for u in &basis {
                let c = u.dot(&w);
                w.scaled_add(-c, u);
            }
        }
        let beta = w.dot(&w).sqrt();

        let (theta, y) = tridiag_ground(&alphas, &betas)?;
        let scale = theta.abs().max(1.0);
        let residual = beta * y[y.len() - 1].abs();
        let converged = residual <= tol * scale;
        let breakdown = beta <= 1e-14 * scale;
        if converged || breakdown || basis.len() == dim || matvecs >= max_iter {
            let mut vector = Array1::zeros(dim);
            for (c, u) in y.iter().zip(&basis) {
                vector.scaled_add(*c, u);
            }
            let norm = vector.dot(&vector).sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::Numerical(
                    "eigensolver produced a degenerate Ritz vector".into(),
                ));
            }
            vector /= norm;
            return Ok(LanczosOutcome {
                value: theta,
                vector,
                matvecs,
                converged: converged || breakdown,
            });
        }
        betas.push(beta);
        basis.push(w / beta);
    }
}
