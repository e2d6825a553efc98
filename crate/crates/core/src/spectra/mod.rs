//! Eigensolvers, ancilla-sector reduction and gadget verification.

mod lanczos;
mod schur;
mod sector;
mod sweep;
mod verify;

pub use lanczos::{eig_lanczos, LanczosOptions, LanczosResult};
pub use schur::refine_low_band;
pub use sector::{flip_symmetric, reduce_to_sector, sector_expectations, SectorReduction};
pub use sweep::{delta_sweep, error_scaling, fit_slope, single_term_error, ScalingResult, SweepPoint, SweepSpec};
pub use verify::{verify_gadget, verify_with_metadata, Hypothesis, SectorLow, SpectrumReport, VerifyOptions};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::Result;
use crate::pauli::PauliSum;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

/// Full spectrum, ascending. Uses the real symmetric path when the matrix is real.
pub fn eig_dense(h: &PauliSum, limit: usize) -> Result<Vec<f64>> {
    if let Some(m) = h.to_dense_real(limit)? {
        return Ok(sorted(m.symmetric_eigen().eigenvalues.iter().copied().collect()));
    }
    let m = h.to_dense_limited(limit)?;
    Ok(sorted(m.symmetric_eigen().eigenvalues.iter().copied().collect()))
}

/// Eigenvalues ascending with eigenvectors as columns in the same order.
pub fn eig_dense_vectors(h: &PauliSum, limit: usize) -> Result<(Vec<f64>, DMatrix<Complex64>)> {
    let m = h.to_dense_limited(limit)?;
    let rows = m.nrows();
    let e = m.symmetric_eigen();
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[a].total_cmp(&e.eigenvalues[b]));
    let vals = idx.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(rows, idx.len(), |r, c| e.eigenvectors[(r, idx[c])]);
    Ok((vals, vecs))
}

/// Lowest `count` eigenvalues: dense when `n <= dense_limit`, Lanczos otherwise.
pub fn lowest(h: &PauliSum, count: usize, dense_limit: usize, opts: &LanczosOptions) -> Result<Vec<f64>> {
    if h.n_qubits() <= dense_limit {
        let mut e = eig_dense(h, dense_limit)?;
        e.truncate(count);
        Ok(e)
    } else {
        Ok(eig_lanczos(h, count, opts)?.values)
    }
}
