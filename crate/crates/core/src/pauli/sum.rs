use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{Letter, PauliTerm, MAX_DENSE_QUBITS};
use crate::error::{Error, Result};

/// Coefficients below this magnitude are dropped by [`PauliSum::simplify`].
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// A complex-weighted sum of Pauli strings on a fixed register.
///
/// Terms are kept in a `BTreeMap`, so iteration order is the canonical mask
/// order and every serialization is reproducible.
#[derive(Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliTerm, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> PauliSum {
        PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, c: f64) -> PauliSum {
        let mut s = PauliSum::zero(n_qubits);
        s.add_term(PauliTerm::identity(n_qubits), Complex64::new(c, 0.0))
            .expect("identity term has the right width");
        s
    }

    pub fn from_term(term: PauliTerm, c: Complex64) -> PauliSum {
        let mut s = PauliSum::zero(term.n_qubits());
        s.terms.insert(term, c);
        s
    }

    /// Convenience constructor from `(coefficient, "X0 Z1")` pairs.
    pub fn from_real_strs(n_qubits: usize, items: &[(f64, &str)]) -> Result<PauliSum> {
        let mut s = PauliSum::zero(n_qubits);
        for &(c, t) in items {
            s.add_term(PauliTerm::parse(n_qubits, t)?, Complex64::new(c, 0.0))?;
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliTerm, &Complex64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, t: &PauliTerm) -> Complex64 {
        self.terms.get(t).copied().unwrap_or_default()
    }

    /// Accumulates `c * term` without dropping anything.
    pub fn add_term(&mut self, term: PauliTerm, c: Complex64) -> Result<()> {
        if term.n_qubits() != self.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: term.n_qubits(),
            });
        }
        *self.terms.entry(term).or_default() += c;
        Ok(())
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = self.clone();
        out.add_assign(other)?;
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &PauliSum) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        for (t, c) in &other.terms {
            *self.terms.entry(t.clone()).or_default() += *c;
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(t, v)| (t.clone(), v * c)).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> PauliSum {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn product(&self, other: &PauliSum) -> Result<PauliSum> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            });
        }
        let mut out = PauliSum::zero(self.n_qubits);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let (ph, t) = a.mul_unchecked(b);
                *out.terms.entry(t).or_default() += ca * cb * ph.to_complex();
            }
        }
        Ok(out)
    }

    /// Merges equal strings (already implicit in the map) and drops small coefficients.
    pub fn simplify(&self, tol: f64) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.norm() >= tol)
                .map(|(t, c)| (t.clone(), *c))
                .collect(),
        }
    }

    /// Zeros real or imaginary parts below `tol`, then drops vanished terms.
    pub fn chop(&self, tol: f64) -> PauliSum {
        let clip = |v: f64| if v.abs() < tol { 0.0 } else { v };
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self
                .terms
                .iter()
                .map(|(t, c)| (t.clone(), Complex64::new(clip(c.re), clip(c.im))))
                .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
                .collect(),
        }
    }

    /// Hermitian iff every coefficient is real to within `1e-12`.
    pub fn is_hermitian(&self) -> bool {
        self.terms.values().all(|c| c.im.abs() <= DEFAULT_TOLERANCE)
    }

    /// Sum of coefficient magnitudes; bounds the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    pub fn max_locality(&self) -> usize {
        self.terms.keys().map(PauliTerm::weight).max().unwrap_or(0)
    }

    pub fn identity_coeff(&self) -> Complex64 {
        self.coeff(&PauliTerm::identity(self.n_qubits))
    }

    /// Same terms on a wider register.
    pub fn widen(&self, new_n: usize) -> Result<PauliSum> {
        let map: Vec<usize> = (0..self.n_qubits).collect();
        self.embed(&map, new_n)
    }

    pub fn embed(&self, map: &[usize], new_n: usize) -> Result<PauliSum> {
        let mut out = PauliSum::zero(new_n);
        for (t, c) in &self.terms {
            out.add_term(t.embed(map, new_n)?, *c)?;
        }
        Ok(out)
    }

    /// Right-multiplies by a single string.
    pub fn mul_term(&self, p: &PauliTerm) -> Result<PauliSum> {
        self.product(&PauliSum::from_term(p.clone(), Complex64::new(1.0, 0.0)))
    }

    /// Dense matrix, limited to [`MAX_DENSE_QUBITS`].
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        self.to_dense_limited(MAX_DENSE_QUBITS)
    }

    pub fn to_dense_limited(&self, limit: usize) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > limit {
            return Err(Error::TooLarge {
                what: "dense Hamiltonian",
                size: self.n_qubits,
                limit,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (t, c) in &self.terms {
            for b in 0..dim as u64 {
                let (amp, out) = t.apply_to_basis(b);
                m[(out as usize, b as usize)] += amp * c;
            }
        }
        Ok(m)
    }

    /// Real symmetric dense matrix for a Hermitian sum whose matrix is real
    /// (for real coefficients: every term has an even number of Y letters).
    pub fn to_dense_real(&self, limit: usize) -> Result<Option<DMatrix<f64>>> {
        if !self.is_hermitian() || !self.has_real_matrix() {
            return Ok(None);
        }
        let m = self.to_dense_limited(limit)?;
        Ok(Some(m.map(|c| c.re)))
    }

    /// `y = H x` without building a matrix. Deterministic for any thread count:
    /// each output entry is gathered by exactly one task in a fixed term order.
    pub fn matvec(&self, v: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        let dim = self.check_dim(v.len())?;
        if out.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: out.len(),
            });
        }
        let ops = self.masks()?;
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let i = i as u64;
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, z, c) in &ops {
                let j = i ^ x;
                let s = if (z & j).count_ones() & 1 == 1 { -c } else { c };
                acc += s * v[j as usize];
            }
            *o = acc;
        });
        Ok(())
    }

    /// Real version of [`PauliSum::matvec`] for sums whose matrix is real.
    pub fn matvec_real(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let dim = self.check_dim(v.len())?;
        if out.len() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                got: out.len(),
            });
        }
        let ops: Vec<(u64, u64, f64)> = self
            .masks()?
            .into_iter()
            .map(|(x, z, c)| (x, z, c.re))
            .collect();
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let i = i as u64;
            let mut acc = 0.0;
            for &(x, z, c) in &ops {
                let j = i ^ x;
                let s = if (z & j).count_ones() & 1 == 1 { -c } else { c };
                acc += s * v[j as usize];
            }
            *o = acc;
        });
        Ok(())
    }

    /// True when the matrix in the computational basis is real.
    pub fn has_real_matrix(&self) -> bool {
        self.terms.iter().all(|(t, c)| {
            let ph = Complex64::new(0.0, 1.0).powi(t.y_count() as i32) * c;
            ph.im.abs() <= DEFAULT_TOLERANCE
        })
    }

    /// Diagonal of the matrix in the computational basis.
    pub fn diagonal(&self) -> Result<Vec<f64>> {
        let dim = self.check_dim(1usize << self.n_qubits.min(40))?;
        let diag: Vec<(u64, f64)> = self
            .terms
            .iter()
            .filter(|(t, _)| t.x_words().iter().all(|&w| w == 0))
            .map(|(t, c)| (t.z_words()[0], c.re))
            .collect();
        Ok((0..dim as u64)
            .into_par_iter()
            .map(|i| {
                diag.iter()
                    .map(|&(z, c)| if (z & i).count_ones() & 1 == 1 { -c } else { c })
                    .sum()
            })
            .collect())
    }

    fn check_dim(&self, len: usize) -> Result<usize> {
        if self.n_qubits > 40 {
            return Err(Error::TooLarge {
                what: "state vector register",
                size: self.n_qubits,
                limit: 40,
            });
        }
        let dim = 1usize << self.n_qubits;
        if len != dim {
            return Err(Error::LengthMismatch { expected: dim, got: len });
        }
        Ok(dim)
    }

    /// `(x, z, c * i^{|x&z|})` per term, the form used by the gather kernels.
    pub(crate) fn masks(&self) -> Result<Vec<(u64, u64, Complex64)>> {
        self.terms
            .iter()
            .map(|(t, c)| {
                let (x, z) = t.masks_u64().ok_or(Error::TooLarge {
                    what: "mask register",
                    size: self.n_qubits,
                    limit: 64,
                })?;
                let ph = Complex64::new(0.0, 1.0).powi((x & z).count_ones() as i32);
                Ok((x, z, c * ph))
            })
            .collect()
    }

    /// Splits into the terms satisfying `pred` and the rest.
    pub fn partition(&self, mut pred: impl FnMut(&PauliTerm) -> bool) -> (PauliSum, PauliSum) {
        let mut yes = PauliSum::zero(self.n_qubits);
        let mut no = PauliSum::zero(self.n_qubits);
        for (t, c) in &self.terms {
            if pred(t) {
                yes.terms.insert(t.clone(), *c);
            } else {
                no.terms.insert(t.clone(), *c);
            }
        }
        (yes, no)
    }

    /// Letters adjacent to qubit pairs, used to check coupling types.
    pub fn two_body_letters(&self) -> Vec<((usize, Letter), (usize, Letter))> {
        self.terms
            .keys()
            .filter(|t| t.weight() == 2)
            .map(|t| {
                let ls: Vec<_> = t.letters().collect();
                (ls[0], ls[1])
            })
            .collect()
    }
}

impl fmt::Debug for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliSum[{}] {{", self.n_qubits)?;
        for (t, c) in &self.terms {
            write!(f, " ({}{:+}i) {};", c.re, c.im, t)?;
        }
        write!(f, " }}")
    }
}
