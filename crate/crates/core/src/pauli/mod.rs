//! Pauli strings in symplectic bitmask form and weighted sums of them.
//!
//! A [`PauliTerm`] stores one `x` bit and one `z` bit per qubit. The letter on
//! qubit `q` is read off as
//!
//! | x | z | letter |
//! |---|---|--------|
//! | 0 | 0 | I      |
//! | 1 | 0 | X      |
//! | 1 | 1 | Y      |
//! | 0 | 1 | Z      |
//!
//! `Y` is stored as itself, so every term is one of the `4^n` Hermitian Pauli
//! strings and any phase produced by multiplication lives in the coefficient
//! of the enclosing [`PauliSum`].
//!
//! Qubit 0 is the least-significant bit of a computational basis index.

mod sum;
pub mod text;

pub use sum::{PauliSum, DEFAULT_TOLERANCE};
pub use text::{parse_pauli_text, Digits};

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest register for which dense matrices are built on request.
pub const MAX_DENSE_QUBITS: usize = 14;

/// Single-qubit Pauli letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c.to_ascii_uppercase() {
            'I' => Some(Letter::I),
            'X' => Some(Letter::X),
            'Y' => Some(Letter::Y),
            'Z' => Some(Letter::Z),
            _ => None,
        }
    }
}

/// One of the four unit phases that a product of Pauli strings can pick up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    /// Phase `i^k`.
    pub fn from_exponent(k: i64) -> Phase {
        match k.rem_euclid(4) {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> i64 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }
}

fn words_for(n_qubits: usize) -> usize {
    n_qubits.div_ceil(64).max(1)
}

/// A Pauli string on a fixed-size register.
///
/// Equality, hashing and ordering are all on `(n_qubits, x, z)`, so two terms
/// are equal exactly when they denote the same operator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliTerm {
    n_qubits: usize,
    x: Box<[u64]>,
    z: Box<[u64]>,
}

impl PauliTerm {
    pub fn identity(n_qubits: usize) -> PauliTerm {
        let w = words_for(n_qubits);
        PauliTerm {
            n_qubits,
            x: vec![0; w].into_boxed_slice(),
            z: vec![0; w].into_boxed_slice(),
        }
    }

    /// Builds a term from `(qubit, letter)` pairs. Repeating a qubit is an error.
    pub fn from_letters(n_qubits: usize, letters: &[(usize, Letter)]) -> Result<PauliTerm> {
        let mut t = PauliTerm::identity(n_qubits);
        for &(q, l) in letters {
            if q >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
            }
            if t.letter(q) != Letter::I {
                return Err(Error::InvalidParameter(format!(
                    "qubit {q} appears twice in a Pauli string"
                )));
            }
            t.set_letter(q, l);
        }
        Ok(t)
    }

    /// Parses the compact form used throughout the crate, e.g. `"X0 Z1 X2"`.
    /// An empty string is the identity.
    pub fn parse(n_qubits: usize, s: &str) -> Result<PauliTerm> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            letters.push(parse_letter_token(tok).map_err(|m| Error::Parse {
                line: 0,
                message: m,
            })?);
        }
        PauliTerm::from_letters(n_qubits, &letters)
    }

    /// Builds a term directly from `u64` masks (registers of at most 64 qubits).
    pub fn from_masks(n_qubits: usize, x: u64, z: u64) -> Result<PauliTerm> {
        if n_qubits > 64 {
            return Err(Error::TooLarge {
                what: "mask register",
                size: n_qubits,
                limit: 64,
            });
        }
        let valid = if n_qubits == 64 { u64::MAX } else { (1u64 << n_qubits) - 1 };
        if (x | z) & !valid != 0 {
            let q = 63 - ((x | z) & !valid).leading_zeros() as usize;
            return Err(Error::QubitOutOfRange { qubit: q, n_qubits });
        }
        let mut t = PauliTerm::identity(n_qubits);
        t.x[0] = x;
        t.z[0] = z;
        Ok(t)
    }

    /// Builds a term from mask words; bits at or above `n_qubits` must be clear.
    pub(crate) fn from_words(n_qubits: usize, x: &[u64], z: &[u64]) -> PauliTerm {
        debug_assert_eq!(x.len(), words_for(n_qubits));
        PauliTerm {
            n_qubits,
            x: x.into(),
            z: z.into(),
        }
    }

    pub fn single(n_qubits: usize, qubit: usize, letter: Letter) -> Result<PauliTerm> {
        PauliTerm::from_letters(n_qubits, &[(qubit, letter)])
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn letter(&self, q: usize) -> Letter {
        let (w, b) = (q / 64, q % 64);
        Letter::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    fn set_letter(&mut self, q: usize, l: Letter) {
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = l.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    /// Low 64 bits of the masks; `None` for registers wider than 64 qubits.
    pub fn masks_u64(&self) -> Option<(u64, u64)> {
        (self.n_qubits <= 64).then(|| (self.x[0], self.z[0]))
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(self.z.iter()).all(|&w| w == 0)
    }

    /// Number of non-identity letters (the locality of the term).
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(self.z.iter())
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn y_count(&self) -> usize {
        self.x
            .iter()
            .zip(self.z.iter())
            .map(|(x, z)| (x & z).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.letters().map(|(q, _)| q).collect()
    }

    /// Non-identity letters in ascending qubit order.
    pub fn letters(&self) -> impl Iterator<Item = (usize, Letter)> + '_ {
        self.x
            .iter()
            .zip(self.z.iter())
            .enumerate()
            .flat_map(|(w, (&x, &z))| {
                let mut bits = x | z;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        return None;
                    }
                    let b = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(w * 64 + b)
                })
            })
            .map(move |q| (q, self.letter(q)))
    }

    fn check_same(&self, other: &PauliTerm) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            Err(Error::QubitMismatch {
                left: self.n_qubits,
                right: other.n_qubits,
            })
        } else {
            Ok(())
        }
    }

    /// Operator product `self * other = phase * product`.
    pub fn mul(&self, other: &PauliTerm) -> Result<(Phase, PauliTerm)> {
        self.check_same(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &PauliTerm) -> (Phase, PauliTerm) {
        let mut plus = 0i64;
        let mut minus = 0i64;
        let w = self.x.len();
        let mut x = vec![0u64; w];
        let mut z = vec![0u64; w];
        for i in 0..w {
            let (x1, z1, x2, z2) = (self.x[i], self.z[i], other.x[i], other.z[i]);
            let (lx1, ly1, lz1) = (x1 & !z1, x1 & z1, !x1 & z1);
            let (lx2, ly2, lz2) = (x2 & !z2, x2 & z2, !x2 & z2);
            // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
            plus += ((lx1 & ly2) | (ly1 & lz2) | (lz1 & lx2)).count_ones() as i64;
            minus += ((lx1 & lz2) | (ly1 & lx2) | (lz1 & ly2)).count_ones() as i64;
            x[i] = x1 ^ x2;
            z[i] = z1 ^ z2;
        }
        (
            Phase::from_exponent(plus - minus),
            PauliTerm {
                n_qubits: self.n_qubits,
                x: x.into_boxed_slice(),
                z: z.into_boxed_slice(),
            },
        )
    }

    /// True iff the two strings commute, from the parity of the symplectic product.
    pub fn commutes(&self, other: &PauliTerm) -> Result<bool> {
        self.check_same(other)?;
        Ok(self.commutes_unchecked(other))
    }

    pub(crate) fn commutes_unchecked(&self, other: &PauliTerm) -> bool {
        let mut parity = 0u32;
        for i in 0..self.x.len() {
            parity ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones() & 1;
        }
        parity == 0
    }

    /// Relabels qubit `q` to `map[q]` on a register of `new_n` qubits.
    pub fn embed(&self, map: &[usize], new_n: usize) -> Result<PauliTerm> {
        if map.len() < self.n_qubits {
            return Err(Error::InvalidParameter(format!(
                "relabeling covers {} qubits but the term has {}",
                map.len(),
                self.n_qubits
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &t in &map[..self.n_qubits] {
            if t >= new_n {
                return Err(Error::QubitOutOfRange {
                    qubit: t,
                    n_qubits: new_n,
                });
            }
            if !seen.insert(t) {
                return Err(Error::NonInjectiveMap { target: t });
            }
        }
        let mut out = PauliTerm::identity(new_n);
        for (q, l) in self.letters() {
            out.set_letter(map[q], l);
        }
        Ok(out)
    }

    /// Places the term on a wider register without relabeling.
    pub fn widen(&self, new_n: usize) -> Result<PauliTerm> {
        let map: Vec<usize> = (0..self.n_qubits).collect();
        self.embed(&map, new_n)
    }

    /// Action on a basis state: `P|b> = amplitude * |b'>`.
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let (x, z) = (self.x[0], self.z[0]);
        let mut k = (x & z).count_ones() as i64;
        if (z & b).count_ones() & 1 == 1 {
            k += 2;
        }
        (Phase::from_exponent(k).to_complex(), b ^ x)
    }

    /// Dense matrix in the computational basis.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        if self.n_qubits > MAX_DENSE_QUBITS {
            return Err(Error::TooLarge {
                what: "dense Pauli matrix",
                size: self.n_qubits,
                limit: MAX_DENSE_QUBITS,
            });
        }
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim as u64 {
            let (amp, out) = self.apply_to_basis(b);
            m[(out as usize, b as usize)] = amp;
        }
        Ok(m)
    }
}

pub(crate) fn parse_letter_token(tok: &str) -> std::result::Result<(usize, Letter), String> {
    let mut chars = tok.chars();
    let c = chars.next().ok_or_else(|| "empty letter token".to_string())?;
    let letter = Letter::from_char(c).ok_or_else(|| format!("unknown Pauli letter in `{tok}`"))?;
    let idx: usize = chars
        .as_str()
        .parse()
        .map_err(|_| format!("bad qubit index in `{tok}`"))?;
    Ok((idx, letter))
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for (q, l) in self.letters() {
            if !first {
                write!(f, " ")?;
            }
            write!(f, "{}{}", l.as_char(), q)?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliTerm[{}]({})", self.n_qubits, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: usize, s: &str) -> PauliTerm {
        PauliTerm::parse(n, s).unwrap()
    }

    #[test]
    fn single_qubit_table() {
        let (p, r) = t(1, "X0").mul(&t(1, "Y0")).unwrap();
        assert_eq!((p, r), (Phase::PlusI, t(1, "Z0")));
        let (p, r) = t(1, "Z0").mul(&t(1, "Z0")).unwrap();
        assert_eq!((p, r), (Phase::PlusOne, PauliTerm::identity(1)));
        let (p, r) = t(1, "Y0").mul(&t(1, "X0")).unwrap();
        assert_eq!((p, r), (Phase::MinusI, t(1, "Z0")));
    }

    #[test]
    fn two_qubit_product_matches_dense() {
        // (X0 Z1)(Z0 Z1) = XZ (x) ZZ = (-iY) (x) I
        let (p, r) = t(2, "X0 Z1").mul(&t(2, "Z0 Z1")).unwrap();
        assert_eq!((p, r.clone()), (Phase::MinusI, t(2, "Y0")));
        let lhs = t(2, "X0 Z1").to_dense().unwrap() * t(2, "Z0 Z1").to_dense().unwrap();
        let rhs = r.to_dense().unwrap() * p.to_complex();
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn commutation_examples() {
        assert!(!t(1, "X0").commutes(&t(1, "Z0")).unwrap());
        assert!(t(2, "X0 X1").commutes(&t(2, "Z0 Z1")).unwrap());
        assert!(t(3, "X0 X2").commutes(&t(3, "Z0 Z2")).unwrap());
    }

    #[test]
    fn mismatched_registers_are_rejected() {
        assert!(matches!(
            t(1, "X0").mul(&t(2, "X0")),
            Err(Error::QubitMismatch { left: 1, right: 2 })
        ));
        assert!(t(1, "X0").commutes(&t(2, "X0")).is_err());
    }

    #[test]
    fn weight_support_embed() {
        assert_eq!(t(3, "X0 Z1 X2").weight(), 3);
        assert_eq!(PauliTerm::identity(5).weight(), 0);
        let e = t(2, "Z0 Z1").embed(&[4, 9], 13).unwrap();
        assert_eq!(e, t(13, "Z4 Z9"));
        assert_eq!(e.support(), vec![4, 9]);
        assert!(matches!(
            t(2, "Z0 Z1").embed(&[3, 3], 13),
            Err(Error::NonInjectiveMap { target: 3 })
        ));
    }

    #[test]
    fn wide_registers_use_multiple_words() {
        let a = t(130, "X3 Y70 Z129");
        let b = t(130, "Z3 Y70 Z129");
        let (p, r) = a.mul(&b).unwrap();
        assert_eq!(r, t(130, "Y3"));
        assert_eq!(p, Phase::MinusI);
        assert_eq!(a.weight(), 3);
        assert_eq!(a.support(), vec![3, 70, 129]);
        assert!(!a.commutes(&b).unwrap());
    }

    #[test]
    fn display_round_trips() {
        let a = t(5, "Y0 X3 Z4");
        assert_eq!(a.to_string(), "Y0 X3 Z4");
        assert_eq!(PauliTerm::parse(5, &a.to_string()).unwrap(), a);
        assert_eq!(PauliTerm::identity(2).to_string(), "I");
    }

    #[test]
    fn duplicate_qubit_rejected() {
        assert!(PauliTerm::parse(3, "X0 Z0").is_err());
        assert!(PauliTerm::parse(3, "X5").is_err());
    }
}
