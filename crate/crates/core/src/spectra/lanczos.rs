//! Block Lanczos with full reorthogonalization and thick restart.
//!
//! Every new Krylov vector is orthogonalized twice against the whole stored
//! basis, so the projected matrix is built entry by entry. On restart the
//! lowest Ritz vectors are kept along with the not-yet-expanded frontier.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::PauliSum;

pub const MAX_LANCZOS_QUBITS: usize = 24;

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Matrix-vector products allowed.
    pub max_iters: usize,
    /// Residual norm required for each wanted Ritz pair.
    pub tol: f64,
    pub seed: u64,
    /// Start block size; 0 picks `min(m, 4)`.
    pub block: usize,
    /// Stored basis size before a restart; 0 picks a default from `m`.
    pub max_basis: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_iters: 20_000,
            tol: 1e-8,
            seed: 7,
            block: 0,
            max_basis: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

type Vector = Vec<Complex64>;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.par_iter()
        .zip(b.par_iter())
        .with_min_len(4096)
        .map(|(x, y)| x.conj() * y)
        .reduce(|| Complex64::new(0.0, 0.0), |p, q| p + q)
}

fn norm(a: &[Complex64]) -> f64 {
    dot(a, a).re.sqrt()
}

fn axpy(y: &mut [Complex64], a: Complex64, x: &[Complex64]) {
    y.par_iter_mut()
        .zip(x.par_iter())
        .with_min_len(4096)
        .for_each(|(y, x)| *y += a * x);
}

/// Removes the span of `basis` from `w` (two passes); returns the projections.
fn orthogonalize(basis: &[Vector], w: &mut [Complex64]) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        for (i, v) in basis.iter().enumerate() {
            let c = dot(v, w);
            h[i] += c;
            axpy(w, -c, v);
        }
    }
    h
}

struct Krylov<'a> {
    op: &'a PauliSum,
    dim: usize,
    basis: Vec<Vector>,
    /// Projected matrix over the basis; only expanded columns are complete.
    t: Vec<Vec<Complex64>>,
    expanded: usize,
    matvecs: usize,
    rng: ChaCha8Rng,
    scale: f64,
}

impl Krylov<'_> {
    /// Appends the normalized remainder of `w`; returns its norm if kept.
    fn push(&mut self, mut w: Vector) -> Option<f64> {
        orthogonalize(&self.basis, &mut w);
        let nw = norm(&w);
        if nw <= 1e-10 * self.scale.max(1.0) || self.basis.len() >= self.dim {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= nw);
        self.basis.push(w);
        for row in &mut self.t {
            row.push(Complex64::new(0.0, 0.0));
        }
        self.t.push(vec![Complex64::new(0.0, 0.0); self.basis.len()]);
        Some(nw)
    }

    fn random(&mut self) -> Vector {
        (0..self.dim)
            .map(|_| Complex64::new(self.rng.random::<f64>() - 0.5, self.rng.random::<f64>() - 0.5))
            .collect()
    }

    fn expand_next(&mut self) -> Result<()> {
        let j = self.expanded;
        let mut w = vec![Complex64::new(0.0, 0.0); self.dim];
        self.op.matvec(&self.basis[j], &mut w)?;
        self.matvecs += 1;
        let h = orthogonalize(&self.basis, &mut w);
        for (i, c) in h.into_iter().enumerate() {
            self.t[i][j] = c;
            self.t[j][i] = c.conj();
        }
        self.t[j][j] = Complex64::new(self.t[j][j].re, 0.0);
        self.expanded += 1;
        let l = self.basis.len();
        if let Some(b) = self.push(w) {
            self.t[l][j] = Complex64::new(b, 0.0);
            self.t[j][l] = Complex64::new(b, 0.0);
        }
        Ok(())
    }

    /// Ritz pairs of the expanded block, ascending, with residual norms.
    fn ritz(&self) -> (Vec<f64>, DMatrix<Complex64>, Vec<f64>) {
        let e = self.expanded;
        let a = DMatrix::from_fn(e, e, |i, j| self.t[i][j]);
        let eig = a.symmetric_eigen();
        let mut idx: Vec<usize> = (0..e).collect();
        idx.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
        let vals: Vec<f64> = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let y = DMatrix::from_fn(e, e, |r, c| eig.eigenvectors[(r, idx[c])]);
        let res = (0..e)
            .map(|c| {
                let mut s = 0.0;
                for f in e..self.basis.len() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for r in 0..e {
                        acc += self.t[f][r] * y[(r, c)];
                    }
                    s += acc.norm_sqr();
                }
                s.sqrt()
            })
            .collect();
        (vals, y, res)
    }

    fn restart(&mut self, keep: usize) {
        let e = self.expanded;
        let (vals, y, _) = self.ritz();
        let keep = keep.min(e);
        let mut fresh: Vec<Vector> = (0..keep)
            .into_par_iter()
            .map(|c| {
                let mut v = vec![Complex64::new(0.0, 0.0); self.dim];
                for r in 0..e {
                    axpy(&mut v, y[(r, c)], &self.basis[r]);
                }
                v
            })
            .collect();
        let front: Vec<Vector> = self.basis.drain(e..).collect();
        let len = keep + front.len();
        let mut t = vec![vec![Complex64::new(0.0, 0.0); len]; len];
        for a in 0..keep {
            t[a][a] = Complex64::new(vals[a], 0.0);
            for (fi, f) in (e..e + front.len()).enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..e {
                    acc += self.t[f][r] * y[(r, a)];
                }
                t[keep + fi][a] = acc;
                t[a][keep + fi] = acc.conj();
            }
        }
        fresh.extend(front);
        self.basis = fresh;
        self.t = t;
        self.expanded = keep;
    }
}

/// The `m` lowest eigenvalues of a Hermitian Pauli sum without forming its matrix.
pub fn eig_lanczos(h: &PauliSum, m: usize, opts: &LanczosOptions) -> Result<LanczosResult> {
    let n = h.n_qubits();
    if n > MAX_LANCZOS_QUBITS {
        return Err(Error::TooLarge { what: "Lanczos register", size: n, limit: MAX_LANCZOS_QUBITS });
    }
    if m == 0 {
        return Err(Error::InvalidParameter("at least one eigenvalue must be requested".into()));
    }
    let dim = 1usize << n;
    let m = m.min(dim);
    let block = if opts.block == 0 { m.min(4) } else { opts.block }.min(dim);
    let max_basis = if opts.max_basis == 0 { (3 * m + 3 * block).max(40) } else { opts.max_basis }
        .max(m + 2 * block)
        .min(dim);
    let mut k = Krylov {
        op: h,
        dim,
        basis: Vec::new(),
        t: Vec::new(),
        expanded: 0,
        matvecs: 0,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        scale: h.norm_bound(),
    };
    for _ in 0..block {
        let v = k.random();
        k.push(v);
    }
    let keep = (m + block).max(2 * m).min(max_basis - block);
    let mut last_check = 0;
    loop {
        if k.expanded == k.basis.len() {
            // frontier exhausted: the expanded space is invariant
            if k.basis.len() == dim || {
                let v = k.random();
                k.push(v).is_none()
            } {
                let (vals, _, res) = k.ritz();
                if vals.len() >= m {
                    return Ok(LanczosResult {
                        values: vals[..m].to_vec(),
                        residuals: res[..m].to_vec(),
                        matvecs: k.matvecs,
                    });
                }
            }
            continue;
        }
        k.expand_next()?;
        if k.expanded >= m && (k.expanded - last_check >= block || k.basis.len() >= max_basis) {
            last_check = k.expanded;
            let (vals, _, res) = k.ritz();
            if res[..m].iter().all(|&r| r <= opts.tol) {
                return Ok(LanczosResult {
                    values: vals[..m].to_vec(),
                    residuals: res[..m].to_vec(),
                    matvecs: k.matvecs,
                });
            }
        }
        if k.matvecs >= opts.max_iters {
            let (_, _, res) = k.ritz();
            return Err(Error::NoConvergence(format!(
                "{} matvecs, residuals {:?}",
                k.matvecs,
                &res[..m.min(res.len())]
            )));
        }
        // a basis that can hold the whole space never needs a restart
        if max_basis < dim && k.basis.len() >= max_basis && k.expanded > keep {
            k.restart(keep);
            last_check = k.expanded;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::eig_dense;

    #[test]
    fn product_state_ground() {
        let terms: Vec<(f64, String)> = (0..20).map(|i| (-1.0, format!("Z{i}"))).collect();
        let refs: Vec<(f64, &str)> = terms.iter().map(|(c, s)| (*c, s.as_str())).collect();
        let h = PauliSum::from_real_strs(20, &refs).unwrap();
        let r = eig_lanczos(&h, 1, &LanczosOptions::default()).unwrap();
        assert!((r.values[0] + 20.0).abs() < 1e-8);
    }

    #[test]
    fn degenerate_spectrum() {
        let h = PauliSum::from_real_strs(3, &[(1.0, "Z0"), (1.0, "Z1")]).unwrap();
        let r = eig_lanczos(&h, 4, &LanczosOptions::default()).unwrap();
        let want = [-2.0, -2.0, 0.0, 0.0];
        for (a, b) in r.values.iter().zip(want) {
            assert!((a - b).abs() < 1e-8, "{:?}", r.values);
        }
    }

    #[test]
    fn nearly_full_spectrum() {
        let h = PauliSum::from_real_strs(4, &[(0.4, "X0 X1"), (-0.7, "Z2 Z3"), (0.3, "X3 Z0"), (0.9, "Z1")]).unwrap();
        let d = eig_dense(&h, 14).unwrap();
        for m in [8, 15, 16] {
            let r = eig_lanczos(&h, m, &LanczosOptions::default()).unwrap();
            assert!(r.values.iter().zip(&d).all(|(a, b)| (a - b).abs() < 1e-8));
        }
        let tight = LanczosOptions { max_iters: 1, ..Default::default() };
        assert!(matches!(eig_lanczos(&h, 15, &tight), Err(Error::NoConvergence(_))));
    }

    #[test]
    fn matches_dense_small() {
        let h = PauliSum::from_real_strs(
            6,
            &[(0.4, "X0 X1"), (-0.7, "Z2 Z3"), (0.3, "X4 Z5"), (0.2, "Y0 Y5"), (0.9, "Z1"), (0.5, "X3 X2")],
        )
        .unwrap();
        let d = eig_dense(&h, 14).unwrap();
        let opts = LanczosOptions { max_basis: 24, ..Default::default() };
        let r = eig_lanczos(&h, 6, &opts).unwrap();
        for (a, b) in r.values.iter().zip(&d) {
            assert!((a - b).abs() < 1e-8, "{:?} vs {:?}", r.values, &d[..6]);
        }
    }
}
