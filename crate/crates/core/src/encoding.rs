//! Jordan-Wigner and Bravyi-Kitaev encodings of fermionic ladder operators.
//!
//! Bravyi-Kitaev uses the Fenwick-tree layout: qubit `j` stores the parity of
//! modes `j - lowbit(j + 1) + 1 ..= j`. Tree nodes past the last real qubit are
//! dropped, so the register has exactly `n` qubits for any `n`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{FermionHamiltonian, Ladder};
use crate::pauli::{Letter, PauliSum, PauliTerm, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EncodingScheme {
    JordanWigner,
    BravyiKitaev,
}

impl FromStr for EncodingScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jw" | "jordan-wigner" => Ok(EncodingScheme::JordanWigner),
            "bk" | "bravyi-kitaev" => Ok(EncodingScheme::BravyiKitaev),
            _ => Err(Error::InvalidParameter(format!("unknown encoding `{s}`"))),
        }
    }
}

impl fmt::Display for EncodingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingScheme::JordanWigner => "jw",
            EncodingScheme::BravyiKitaev => "bk",
        })
    }
}

/// Update, parity, flip and remainder sets of one mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSets {
    pub j: usize,
    pub update: Vec<usize>,
    pub parity: Vec<usize>,
    pub flip: Vec<usize>,
    pub remainder: Vec<usize>,
}

fn lowbit(v: usize) -> usize {
    v & v.wrapping_neg()
}

/// Fenwick-children chain starting at `j - 1` and stopping below `stop`.
fn chain_down(j: usize, stop: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut k = j as isize - 1;
    while k >= stop as isize {
        out.push(k as usize);
        k = ((k as usize) & (k as usize + 1)) as isize - 1;
    }
    out.sort_unstable();
    out
}

pub fn index_sets(j: usize, n: usize) -> Result<IndexSets> {
    if j >= n {
        return Err(Error::OrbitalOutOfRange {
            index: j,
            n_orbitals: n,
        });
    }
    let padded = n.next_power_of_two();
    let mut update = Vec::new();
    let mut k = j | (j + 1);
    while k < padded {
        if k < n {
            update.push(k);
        }
        k |= k + 1;
    }
    let parity = chain_down(j, 0);
    let flip = chain_down(j, j + 1 - lowbit(j + 1));
    let remainder = parity.iter().copied().filter(|q| !flip.contains(q)).collect();
    Ok(IndexSets {
        j,
        update,
        parity,
        flip,
        remainder,
    })
}

fn string(n: usize, parts: &[(&[usize], Letter)], extra: &[(usize, Letter)]) -> PauliTerm {
    let mut letters: Vec<(usize, Letter)> = extra.to_vec();
    for (qs, l) in parts {
        letters.extend(qs.iter().map(|&q| (q, *l)));
    }
    PauliTerm::from_letters(n, &letters).expect("encoding sets are disjoint and in range")
}

/// Encoded `a_j†` (dagger) or `a_j` as a two-term Pauli sum.
pub fn encode_ladder(j: usize, dagger: bool, scheme: EncodingScheme, n: usize) -> Result<PauliSum> {
    if j >= n {
        return Err(Error::OrbitalOutOfRange {
            index: j,
            n_orbitals: n,
        });
    }
    let (real_term, imag_term) = match scheme {
        EncodingScheme::JordanWigner => {
            let below: Vec<usize> = (0..j).collect();
            (
                string(n, &[(&below, Letter::Z)], &[(j, Letter::X)]),
                string(n, &[(&below, Letter::Z)], &[(j, Letter::Y)]),
            )
        }
        EncodingScheme::BravyiKitaev => {
            let s = index_sets(j, n)?;
            let rho = if j % 2 == 0 { &s.parity } else { &s.remainder };
            (
                string(
                    n,
                    &[(&s.update, Letter::X), (&s.parity, Letter::Z)],
                    &[(j, Letter::X)],
                ),
                string(n, &[(&s.update, Letter::X), (rho, Letter::Z)], &[(j, Letter::Y)]),
            )
        }
    };
    let sign = if dagger { -0.5 } else { 0.5 };
    let mut out = PauliSum::zero(n);
    out.add_term(real_term, Complex64::new(0.5, 0.0))?;
    out.add_term(imag_term, Complex64::new(0.0, sign))?;
    Ok(out)
}

/// Qubit image of a fermionic Hamiltonian.
pub fn transform(h: &FermionHamiltonian, scheme: EncodingScheme) -> Result<PauliSum> {
    let n = h.n_orbitals;
    let ladders: Vec<[PauliSum; 2]> = (0..n)
        .map(|j| {
            Ok([
                encode_ladder(j, false, scheme, n)?,
                encode_ladder(j, true, scheme, n)?,
            ])
        })
        .collect::<Result<_>>()?;
    let encode = |ops: &[Ladder]| -> Result<PauliSum> {
        let mut acc = PauliSum::identity(n, 1.0);
        for l in ops {
            if l.orbital >= n {
                return Err(Error::OrbitalOutOfRange {
                    index: l.orbital,
                    n_orbitals: n,
                });
            }
            acc = acc.product(&ladders[l.orbital][l.dagger as usize])?;
        }
        Ok(acc)
    };
    let parts: Vec<PauliSum> = h
        .monomials
        .par_iter()
        .map(|m| Ok(encode(&m.ops)?.scale_real(m.coeff)))
        .collect::<Result<_>>()?;
    let mut out = PauliSum::identity(n, h.constant);
    for p in &parts {
        out.add_assign(p)?;
    }
    Ok(out.chop(DEFAULT_TOLERANCE))
}

pub fn max_locality(p: &PauliSum) -> usize {
    p.max_locality()
}

/// Dense permutation `|f> -> |beta f>` taking occupation vectors to Bravyi-Kitaev qubit states.
pub fn bk_basis_map(state: u64, n: usize) -> u64 {
    let mut out = 0u64;
    for j in 0..n {
        let start = j + 1 - lowbit(j + 1);
        let range = ((1u64 << (j + 1)) - 1) & !((1u64 << start) - 1);
        out |= (((state & range).count_ones() & 1) as u64) << j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fermion::{build_fermion_hamiltonian, ops_matrix, IntegralTable};

    fn t(n: usize, s: &str) -> PauliTerm {
        PauliTerm::parse(n, s).unwrap()
    }

    #[test]
    fn fenwick_sets_n4() {
        let s0 = index_sets(0, 4).unwrap();
        assert_eq!(s0.update, vec![1, 3]);
        assert!(s0.parity.is_empty() && s0.flip.is_empty());
        let s3 = index_sets(3, 4).unwrap();
        assert!(s3.update.is_empty());
        assert_eq!(s3.parity, vec![1, 2]);
        assert_eq!(s3.flip, vec![1, 2]);
        assert!(s3.remainder.is_empty());
        let s1 = index_sets(0, 1).unwrap();
        assert!(s1.update.is_empty() && s1.parity.is_empty());
        assert!(index_sets(4, 4).is_err());
    }

    #[test]
    fn set_invariants() {
        for n in 1..=16usize {
            let log = (n as f64).log2().ceil() as usize;
            for j in 0..n {
                let s = index_sets(j, n).unwrap();
                assert!(s.update.len() <= log.max(0) && s.parity.len() <= log);
                assert!(s.update.iter().all(|q| !s.parity.contains(q)));
                assert!(s.remainder.iter().all(|q| s.parity.contains(q)));
            }
        }
    }

    #[test]
    fn jw_examples() {
        let a = encode_ladder(0, true, EncodingScheme::JordanWigner, 1).unwrap();
        assert_eq!(a.coeff(&t(1, "X0")), Complex64::new(0.5, 0.0));
        assert_eq!(a.coeff(&t(1, "Y0")), Complex64::new(0.0, -0.5));
        let a = encode_ladder(2, true, EncodingScheme::JordanWigner, 3).unwrap();
        assert_eq!(a.coeff(&t(3, "Z0 Z1 X2")), Complex64::new(0.5, 0.0));
        assert_eq!(a.coeff(&t(3, "Z0 Z1 Y2")), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn bk_creation_mode0() {
        let a = encode_ladder(0, true, EncodingScheme::BravyiKitaev, 4).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a.coeff(&t(4, "X0 X1 X3")), Complex64::new(0.5, 0.0));
        assert_eq!(a.coeff(&t(4, "Y0 X1 X3")), Complex64::new(0.0, -0.5));
    }

    #[test]
    fn bk_ladder_is_conjugated_occupation_ladder() {
        // Oracle: permute the occupation-basis matrix by the BK basis map.
        for n in 1..=6 {
            let dim = 1usize << n;
            for j in 0..n {
                for dagger in [false, true] {
                    let occ = ops_matrix(&[Ladder { orbital: j, dagger }], n).unwrap();
                    let enc = encode_ladder(j, dagger, EncodingScheme::BravyiKitaev, n)
                        .unwrap()
                        .to_dense()
                        .unwrap();
                    for r in 0..dim {
                        for c in 0..dim {
                            let br = bk_basis_map(r as u64, n) as usize;
                            let bc = bk_basis_map(c as u64, n) as usize;
                            let d = enc[(br, bc)] - Complex64::new(occ[(r, c)], 0.0);
                            assert!(d.norm() < 1e-14, "n={n} j={j} dagger={dagger}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn number_operator_jw() {
        let mut tab = IntegralTable::zeros(1);
        tab.set_h(0, 0, 1.0).unwrap();
        let h = build_fermion_hamiltonian(&tab).unwrap();
        let p = transform(&h, EncodingScheme::JordanWigner).unwrap();
        let want = PauliSum::from_real_strs(1, &[(0.5, ""), (-0.5, "Z0")]).unwrap();
        assert_eq!(p, want);
        assert_eq!(max_locality(&p), 1);
    }

    #[test]
    fn jw_long_hop_locality() {
        let h = FermionHamiltonian {
            n_orbitals: 8,
            constant: 0.0,
            monomials: vec![
                crate::fermion::Monomial {
                    coeff: 1.0,
                    ops: vec![Ladder::create(7), Ladder::annihilate(0)],
                },
                crate::fermion::Monomial {
                    coeff: 1.0,
                    ops: vec![Ladder::create(0), Ladder::annihilate(7)],
                },
            ],
        };
        let p = transform(&h, EncodingScheme::JordanWigner).unwrap();
        assert_eq!(max_locality(&p), 8);
        assert!(p.is_hermitian());
    }

    #[test]
    fn scheme_parsing() {
        assert_eq!("BK".parse::<EncodingScheme>().unwrap(), EncodingScheme::BravyiKitaev);
        assert_eq!("jw".parse::<EncodingScheme>().unwrap(), EncodingScheme::JordanWigner);
        assert!("parity".parse::<EncodingScheme>().is_err());
    }
}
