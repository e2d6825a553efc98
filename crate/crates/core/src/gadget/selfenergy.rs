//! Self-energy on the penalty ground space of one gadget round.
//!
//! The low space `L-` holds every basis state in which each register of the
//! round is all-0 or all-1; everything else is `L+`. Basis states of `L-` are
//! listed in ascending index order.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::GadgetRound;
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, MAX_DENSE_QUBITS};

/// A matrix on `L-` together with the full-space index of each basis state.
#[derive(Clone, Debug)]
pub struct LowSpaceMatrix {
    pub basis: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

impl LowSpaceMatrix {
    /// Largest singular value of the difference.
    pub fn distance(&self, other: &LowSpaceMatrix) -> f64 {
        let d = &self.matrix - &other.matrix;
        d.singular_values().max()
    }
}

fn register_masks(registers: &[Vec<usize>]) -> Vec<u64> {
    registers
        .iter()
        .map(|r| r.iter().fold(0u64, |m, &q| m | (1u64 << q)))
        .collect()
}

fn in_low(b: usize, masks: &[u64]) -> bool {
    masks.iter().all(|&m| {
        let s = b as u64 & m;
        s == 0 || s == m
    })
}

/// Full-space indices of `L-`, ascending.
pub fn low_space(n_qubits: usize, registers: &[Vec<usize>]) -> Vec<usize> {
    let masks = register_masks(registers);
    (0..1usize << n_qubits).filter(|&b| in_low(b, &masks)).collect()
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            what: "self-energy register",
            size: n,
            limit: MAX_DENSE_QUBITS,
        });
    }
    Ok(())
}

/// `<rows[a]| op |cols[b]>`.
pub(crate) fn block(op: &PauliSum, rows: &[usize], cols: &[usize]) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << op.n_qubits();
    let mut pos = vec![u32::MAX; dim];
    for (i, &r) in rows.iter().enumerate() {
        pos[r] = i as u32;
    }
    let masks = op.masks()?;
    let mut m = DMatrix::zeros(rows.len(), cols.len());
    for (j, &b) in cols.iter().enumerate() {
        for &(x, z, c) in &masks {
            let tgt = b ^ x as usize;
            let p = pos[tgt];
            if p != u32::MAX {
                let s = if (z & b as u64).count_ones() % 2 == 1 { -c } else { c };
                m[(p as usize, j)] += s;
            }
        }
    }
    Ok(m)
}

/// Restriction of `op` to the low space of `registers`.
pub fn restrict(op: &PauliSum, registers: &[Vec<usize>]) -> Result<LowSpaceMatrix> {
    guard(op.n_qubits())?;
    let basis = low_space(op.n_qubits(), registers);
    let matrix = block(op, &basis, &basis)?;
    Ok(LowSpaceMatrix { basis, matrix })
}

/// Exact `Sigma-(z) = z - (P- G(z) P-)^-1`, computed as the Schur complement
/// `H-- + H-+ (z - H++)^-1 H+-`.
pub fn self_energy_numeric(
    h_tilde: &PauliSum,
    registers: &[Vec<usize>],
    z: f64,
) -> Result<LowSpaceMatrix> {
    let n = h_tilde.n_qubits();
    guard(n)?;
    let masks = register_masks(registers);
    let (low, high): (Vec<usize>, Vec<usize>) = (0..1usize << n).partition(|&b| in_low(b, &masks));
    let hmm = block(h_tilde, &low, &low)?;
    if high.is_empty() {
        return Ok(LowSpaceMatrix { basis: low, matrix: hmm });
    }
    let hpm = block(h_tilde, &high, &low)?;
    let hmp = block(h_tilde, &low, &high)?;
    let mut a = block(h_tilde, &high, &high)?.scale(-1.0);
    for i in 0..high.len() {
        a[(i, i)] += Complex64::new(z, 0.0);
    }
    let x = a
        .lu()
        .solve(&hpm)
        .ok_or(Error::SingularResolvent { z })?;
    Ok(LowSpaceMatrix {
        basis: low,
        matrix: hmm + hmp * x,
    })
}

/// Partial sum `V- + sum_{k=2}^{order} V-+ G+ (V+ G+)^{k-2} V+-` with
/// `G+ = (z - H0)^-1` on `L+` and `H0` the (diagonal) penalty.
pub fn self_energy_series(
    v: &PauliSum,
    penalty: &PauliSum,
    registers: &[Vec<usize>],
    z: f64,
    order: usize,
) -> Result<LowSpaceMatrix> {
    if !(1..=4).contains(&order) {
        return Err(Error::SeriesOrder(order));
    }
    let n = v.n_qubits();
    guard(n)?;
    if penalty.iter().any(|(t, _)| t.x_words().iter().any(|&w| w != 0)) {
        return Err(Error::InvalidParameter("penalty must be diagonal".into()));
    }
    let masks = register_masks(registers);
    let dim = 1usize << n;
    let low_flag: Vec<bool> = (0..dim).map(|b| in_low(b, &masks)).collect();
    let basis: Vec<usize> = (0..dim).filter(|&b| low_flag[b]).collect();
    let e0 = penalty.diagonal()?;
    let g: Vec<Complex64> = (0..dim)
        .map(|b| {
            if low_flag[b] {
                Ok(Complex64::new(0.0, 0.0))
            } else if (z - e0[b]).abs() < 1e-300 {
                Err(Error::SingularResolvent { z })
            } else {
                Ok(Complex64::new(1.0 / (z - e0[b]), 0.0))
            }
        })
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(basis.len(), basis.len());
    let mut vy = vec![Complex64::new(0.0, 0.0); dim];
    for (j, &b) in basis.iter().enumerate() {
        let mut y = vec![Complex64::new(0.0, 0.0); dim];
        y[b] = Complex64::new(1.0, 0.0);
        for _ in 0..order {
            v.matvec(&y, &mut vy)?;
            for (i, &r) in basis.iter().enumerate() {
                out[(i, j)] += vy[r];
            }
            // g vanishes on L-, so this also projects onto L+
            for ((yy, w), gg) in y.iter_mut().zip(&vy).zip(&g) {
                *yy = gg * w;
            }
        }
    }
    Ok(LowSpaceMatrix { basis, matrix: out })
}

impl GadgetRound {
    pub fn self_energy_numeric(&self, z: f64) -> Result<LowSpaceMatrix> {
        self_energy_numeric(&self.output, &self.ancillas, z)
    }

    pub fn self_energy_series(&self, z: f64, order: usize) -> Result<LowSpaceMatrix> {
        self_energy_series(&self.v, &self.penalty, &self.ancillas, z, order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::{gadgetize_once, mu};
    use crate::pauli::PauliTerm;
    use crate::shaping::InteractionSet;

    fn single(delta: f64) -> GadgetRound {
        let h = PauliSum::from_real_strs(3, &[(0.5, "Z0 Y1 Y2")]).unwrap();
        gadgetize_once(&h, delta, &InteractionSet::default(), 3)
            .unwrap()
            .rounds
            .remove(0)
    }

    #[test]
    fn low_space_counts() {
        let l = low_space(6, &[vec![3, 4, 5]]);
        assert_eq!(l.len(), 16);
        assert_eq!(l[8], 0b111000);
        assert_eq!(low_space(9, &[vec![3, 4, 5], vec![6, 7, 8]]).len(), 32);
    }

    #[test]
    fn unperturbed_penalty_is_zero() {
        let p = crate::gadget::penalty(3, 5.0, &[1, 2, 3], 4).unwrap();
        let s = self_energy_numeric(&p, &[vec![1, 2, 3]], 0.0).unwrap();
        assert!(s.matrix.iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn order_two_cancels_lambda() {
        let r = single(1e4);
        let s2 = r.self_energy_series(0.0, 2).unwrap();
        // H_else is empty, so V- = Lambda and the order-2 term removes it
        assert!(s2.matrix.iter().all(|c| c.norm() < 1e-9), "{}", s2.matrix);
    }

    #[test]
    fn order_three_flip_block() {
        let d = 1e4;
        let r = single(d);
        let s3 = r.self_energy_series(0.0, 3).unwrap();
        let m = mu(3, d);
        let coeff = 6.0 * m.powi(3) / (d * d);
        assert!((coeff - 1.0).abs() < 1e-12);
        let abc = r.terms[0].product().unwrap();
        let flip = PauliTerm::parse(6, "X3 X4 X5").unwrap();
        let want = restrict(&abc.widen(6).unwrap().mul_term(&flip).unwrap(), &r.ancillas).unwrap();
        // off-register-diagonal blocks carry only the flip process
        let pos = |b: usize| s3.basis.iter().position(|&x| x == b).unwrap();
        for lb in 0..8 {
            for lb2 in 0..8 {
                let got = s3.matrix[(pos(lb2 | 0b111000), pos(lb))];
                let w = want.matrix[(pos(lb2 | 0b111000), pos(lb))];
                assert!((got - w).norm() < 1e-9, "{got} vs {w}");
            }
        }
    }

    #[test]
    fn series_approaches_numeric() {
        let mut last = f64::INFINITY;
        for d in [1e3, 1e4, 1e5] {
            let r = single(d);
            let a = r.self_energy_series(0.0, 3).unwrap();
            let b = r.self_energy_numeric(0.0).unwrap();
            let e = a.distance(&b);
            assert!(e < last);
            last = e;
        }
    }

    #[test]
    fn bad_order() {
        let r = single(1e3);
        assert!(matches!(r.self_energy_series(0.0, 5), Err(Error::SeriesOrder(5))));
    }
}
