//! Exact reduction onto a joint eigenspace of the register flip operators.
//!
//! `F_s` flips every ancilla of register `s`. When every term commutes with
//! every `F_s`, each sector with signs `l_s` is spanned by the symmetrized
//! states built from basis states whose pivot bit (first ancilla of each
//! register) is 0. A term with masks `(x, z)` then acts inside the sector as
//! `(x xor F_S, z)` with the pivots removed and an extra sign `prod_{s in S} l_s`,
//! where `S` holds the registers whose pivot is in `x`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliTerm};

/// A Hamiltonian restricted to one flip sector.
#[derive(Clone, Debug)]
pub struct SectorReduction {
    pub hamiltonian: PauliSum,
    /// `kept[j]` is the original qubit behind reduced qubit `j`.
    pub kept: Vec<usize>,
    pub signs: Vec<i8>,
}

fn flip_mask(reg: &[usize]) -> u64 {
    reg.iter().fold(0, |m, &q| m | 1u64 << q)
}

/// True when every term commutes with every register flip.
pub fn flip_symmetric(h: &PauliSum, registers: &[Vec<usize>]) -> bool {
    let masks: Vec<u64> = registers.iter().map(|r| flip_mask(r)).collect();
    h.iter().all(|(t, _)| match t.masks_u64() {
        Some((_, z)) => masks.iter().all(|&f| (z & f).count_ones() % 2 == 0),
        None => false,
    })
}

fn compress(v: u64, kept: &[usize]) -> u64 {
    kept.iter()
        .enumerate()
        .fold(0, |acc, (j, &q)| acc | ((v >> q) & 1) << j)
}

fn ipow(k: u32) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// Restricts `h` to the sector with flip eigenvalues `signs` (one `+1`/`-1` per register).
pub fn reduce_to_sector(h: &PauliSum, registers: &[Vec<usize>], signs: &[i8]) -> Result<SectorReduction> {
    if signs.len() != registers.len() || signs.iter().any(|s| s.abs() != 1) {
        return Err(Error::InvalidParameter("one sign of +1 or -1 per register".into()));
    }
    let n = h.n_qubits();
    if n > 64 {
        return Err(Error::TooLarge { what: "sector register", size: n, limit: 64 });
    }
    if !flip_symmetric(h, registers) {
        return Err(Error::InvalidParameter(
            "Hamiltonian does not commute with the register flips".into(),
        ));
    }
    let masks: Vec<u64> = registers.iter().map(|r| flip_mask(r)).collect();
    let pivots: Vec<usize> = registers
        .iter()
        .map(|r| {
            r.iter().copied().min().ok_or_else(|| Error::InvalidParameter("empty register".into()))
        })
        .collect::<Result<_>>()?;
    let mut pivot_mask = 0u64;
    for &p in &pivots {
        if pivot_mask >> p & 1 == 1 {
            return Err(Error::AncillaOverlap { qubit: p });
        }
        pivot_mask |= 1 << p;
    }
    let kept: Vec<usize> = (0..n).filter(|&q| pivot_mask >> q & 1 == 0).collect();
    let m = kept.len();
    let mut out = PauliSum::zero(m.max(1));
    for (t, &c) in h.iter() {
        let (x, z) = t.masks_u64().expect("checked width");
        let mut xe = x;
        let mut chi = 1.0;
        for (s, &p) in pivots.iter().enumerate() {
            if x >> p & 1 == 1 {
                xe ^= masks[s];
                chi *= signs[s] as f64;
            }
        }
        debug_assert_eq!(xe & pivot_mask, 0);
        let (xr, zr) = (compress(xe, &kept), compress(z, &kept));
        let ph = ipow((x & z).count_ones()) * ipow(4 - (xr & zr).count_ones() % 4);
        out.add_term(PauliTerm::from_masks(m.max(1), xr, zr)?, c * ph * chi)?;
    }
    Ok(SectorReduction {
        hamiltonian: out.chop(1e-14),
        kept,
        signs: signs.to_vec(),
    })
}

/// `<v| (|0..0><1..1| + h.c.)_s |v>` per register, for each column of `vecs`.
pub fn sector_expectations(vecs: &DMatrix<Complex64>, registers: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let masks: Vec<u64> = registers.iter().map(|r| flip_mask(r)).collect();
    (0..vecs.ncols())
        .map(|c| {
            let v = vecs.column(c);
            masks
                .iter()
                .map(|&f| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..v.len() {
                        let s = b as u64 & f;
                        if s == 0 || s == f {
                            acc += v[b].conj() * v[(b as u64 ^ f) as usize];
                        }
                    }
                    acc.re
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::eig_dense;

    fn sorted_union(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
        a.extend(b);
        a.sort_by(f64::total_cmp);
        a
    }

    #[test]
    fn sectors_partition_spectrum() {
        // register {1,2} with a flip-symmetric Hamiltonian
        let h = PauliSum::from_real_strs(
            3,
            &[(0.7, "Z1 Z2"), (0.3, "X1"), (0.2, "X2 Z0"), (0.5, "Y1 Y2"), (0.1, "X0"), (0.4, "Z0")],
        )
        .unwrap();
        let regs = vec![vec![1, 2]];
        assert!(flip_symmetric(&h, &regs));
        let plus = reduce_to_sector(&h, &regs, &[1]).unwrap();
        let minus = reduce_to_sector(&h, &regs, &[-1]).unwrap();
        assert_eq!(plus.kept, vec![0, 2]);
        let got = sorted_union(
            eig_dense(&plus.hamiltonian, 14).unwrap(),
            eig_dense(&minus.hamiltonian, 14).unwrap(),
        );
        let want = eig_dense(&h, 14).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn flip_operator_itself() {
        let h = PauliSum::from_real_strs(3, &[(1.0, "X0 X1 X2")]).unwrap();
        let r = reduce_to_sector(&h, &[vec![0, 1, 2]], &[-1]).unwrap();
        assert_eq!(r.hamiltonian, PauliSum::identity(2, -1.0));
    }

    #[test]
    fn asymmetric_rejected() {
        let h = PauliSum::from_real_strs(2, &[(1.0, "Z0")]).unwrap();
        assert!(reduce_to_sector(&h, &[vec![0, 1]], &[1]).is_err());
    }

    #[test]
    fn expectations_of_cat_state() {
        let mut v = DMatrix::zeros(4, 1);
        v[(0, 0)] = Complex64::new(0.5f64.sqrt(), 0.0);
        v[(3, 0)] = Complex64::new(0.5f64.sqrt(), 0.0);
        let e = sector_expectations(&v, &[vec![0, 1]]);
        assert!((e[0][0] - 1.0).abs() < 1e-12);
    }
}
