//! Low-band eigenvalues through the exact fixed point `z = eig(Sigma(z))`.
//!
//! With `L` the states whose register qubits are all 0 and `Q` the rest,
//! `Sigma(z) = H_LL + H_LQ (z - H_QQ)^-1 H_QL`. When the penalty gap is huge
//! compared to the band, dense diagonalization of the whole matrix loses
//! about `eps_mach * |H|` absolutely, while this route keeps the large scales
//! inside a well-conditioned solve.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gadget::selfenergy::block;
use crate::pauli::PauliSum;

fn solve_fixed_points<T>(
    hll: DMatrix<T>,
    hlq: DMatrix<T>,
    hql: DMatrix<T>,
    hqq: DMatrix<T>,
    guesses: &[f64],
) -> Result<Vec<f64>>
where
    T: ComplexField<RealField = f64> + Copy,
{
    let sigma = |z: f64| -> Result<Vec<f64>> {
        let mut a = -hqq.clone();
        for i in 0..a.nrows() {
            a[(i, i)] += T::from_real(z);
        }
        let x = a.lu().solve(&hql).ok_or(Error::SingularResolvent { z })?;
        let mut e: Vec<f64> = (&hll + &hlq * x).symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        Ok(e)
    };
    let mut out: Vec<f64> = Vec::with_capacity(guesses.len());
    let mut seen: Vec<(f64, f64)> = Vec::new();
    for &g in guesses {
        // guesses this close share a fixed point
        if let Some(&(_, z)) = seen.iter().find(|(h, _)| (h - g).abs() <= 1e-6) {
            out.push(z);
            continue;
        }
        let mut z = g;
        let mut done = false;
        for _ in 0..60 {
            let e = sigma(z)?;
            let next = e
                .iter()
                .copied()
                .min_by(|a, b| (a - z).abs().total_cmp(&(b - z).abs()))
                .ok_or_else(|| Error::NoConvergence("empty low space".into()))?;
            let step = (next - z).abs();
            z = next;
            if step <= 1e-13 * z.abs().max(1.0) {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::NoConvergence(format!("self-consistent level near {g}")));
        }
        seen.push((g, z));
        out.push(z);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Refines approximate low-band eigenvalues `guesses` of `h + penalty`, where
/// `register_qubits` lists the qubits that are 0 throughout the band's
/// dominant subspace. `penalty` must be diagonal and vanish on that subspace.
pub fn refine_low_band(
    h: &PauliSum,
    penalty: Option<&PauliSum>,
    register_qubits: &[usize],
    guesses: &[f64],
) -> Result<Vec<f64>> {
    let n = h.n_qubits();
    let mask = register_qubits.iter().fold(0usize, |m, &q| m | 1 << q);
    let (low, high): (Vec<usize>, Vec<usize>) = (0..1usize << n).partition(|&b| b & mask == 0);
    let hll = block(h, &low, &low)?;
    let hlq = block(h, &low, &high)?;
    let hql = block(h, &high, &low)?;
    let mut hqq = block(h, &high, &high)?;
    if let Some(p) = penalty {
        if p.iter().any(|(t, _)| t.x_words().iter().any(|&w| w != 0)) {
            return Err(Error::InvalidParameter("penalty must be diagonal".into()));
        }
        let d = p.diagonal()?;
        for (i, &b) in high.iter().enumerate() {
            hqq[(i, i)] += Complex64::new(d[b], 0.0);
        }
    }
    if h.has_real_matrix() {
        let re = |m: DMatrix<Complex64>| m.map(|c| c.re);
        solve_fixed_points(re(hll), re(hlq), re(hql), re(hqq), guesses)
    } else {
        solve_fixed_points(hll, hlq, hql, hqq, guesses)
    }
}
