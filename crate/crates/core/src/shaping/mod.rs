//! Splitting a qubit Hamiltonian into a directly realizable part and groups
//! of high-locality terms, each written as a product of commuting factors.

mod group;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliTerm, DEFAULT_TOLERANCE};

pub use group::group_and_factor;

/// A two-body coupling type, stored with its letters sorted (`XZ` covers `ZX`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Coupling(pub Letter, pub Letter);

impl Coupling {
    pub fn new(a: Letter, b: Letter) -> Coupling {
        if a <= b {
            Coupling(a, b)
        } else {
            Coupling(b, a)
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.0.as_char(), self.1.as_char())
    }
}

/// Set of two-body couplings the target hardware provides. One-body terms are always allowed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionSet(pub BTreeSet<Coupling>);

impl Default for InteractionSet {
    fn default() -> Self {
        InteractionSet(
            [
                Coupling::new(Letter::Z, Letter::Z),
                Coupling::new(Letter::X, Letter::X),
                Coupling::new(Letter::X, Letter::Z),
            ]
            .into_iter()
            .collect(),
        )
    }
}

impl FromStr for InteractionSet {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut set = BTreeSet::new();
        for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let ls: Vec<Letter> = item.chars().filter_map(Letter::from_char).collect();
            if item.chars().count() != 2 || ls.len() != 2 || ls.contains(&Letter::I) {
                return Err(Error::InvalidParameter(format!("bad coupling `{item}`")));
            }
            set.insert(Coupling::new(ls[0], ls[1]));
        }
        Ok(InteractionSet(set))
    }
}

impl fmt::Display for InteractionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.0.iter().map(|c| c.to_string().to_lowercase()).collect();
        f.write_str(&v.join(","))
    }
}

impl InteractionSet {
    /// Identity, one-body and allowed two-body strings.
    pub fn realizes(&self, t: &PauliTerm) -> bool {
        match t.weight() {
            0 | 1 => true,
            2 => {
                let ls: Vec<Letter> = t.letters().map(|(_, l)| l).collect();
                self.0.contains(&Coupling::new(ls[0], ls[1]))
            }
            _ => false,
        }
    }
}

/// A sum of terms written as a product of pairwise commuting factors.
#[derive(Clone, Debug, PartialEq)]
pub struct FactoredTerm {
    pub factors: Vec<PauliSum>,
    pub original: PauliSum,
}

impl FactoredTerm {
    pub fn k(&self) -> usize {
        self.factors.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.original.n_qubits()
    }

    pub fn product(&self) -> Result<PauliSum> {
        let mut acc = PauliSum::identity(self.n_qubits(), 1.0);
        for f in &self.factors {
            acc = acc.product(f)?;
        }
        Ok(acc.simplify(DEFAULT_TOLERANCE))
    }
}

/// Output of [`shape`].
#[derive(Clone, Debug)]
pub struct ShapedHamiltonian {
    pub realizable: PauliSum,
    pub factored: Vec<FactoredTerm>,
}

impl ShapedHamiltonian {
    /// `realizable + sum of factor products`, for reconstruction checks.
    pub fn reconstruct(&self) -> Result<PauliSum> {
        let mut acc = self.realizable.clone();
        for f in &self.factored {
            acc.add_assign(&f.product()?)?;
        }
        Ok(acc.simplify(DEFAULT_TOLERANCE))
    }
}

/// Splits off the realizable terms and factors everything else into groups
/// of at most `target_k` commuting factors.
pub fn shape(h: &PauliSum, allowed: &InteractionSet, target_k: usize) -> Result<ShapedHamiltonian> {
    if target_k < 2 {
        return Err(Error::InvalidParameter(format!(
            "factor count must be at least 2, got {target_k}"
        )));
    }
    let h = h.simplify(DEFAULT_TOLERANCE);
    let (realizable, rest) = h.partition(|t| allowed.realizes(t));
    let factored = group_and_factor(&rest, target_k)?;
    Ok(ShapedHamiltonian {
        realizable,
        factored,
    })
}

/// Realizable part and the grouped remainder, each group as a plain sum.
pub fn split_two_local(h: &PauliSum, allowed: &InteractionSet) -> Result<(PauliSum, Vec<PauliSum>)> {
    let s = shape(h, allowed, 3)?;
    Ok((s.realizable, s.factored.into_iter().map(|f| f.original).collect()))
}

/// Factors one group. A group the grouping rule splits further is only
/// accepted when it is a single string, which always factors letter by letter.
pub fn factor_commuting(group: &PauliSum, target_k: usize) -> Result<FactoredTerm> {
    let group = group.simplify(DEFAULT_TOLERANCE);
    let mut parts = group_and_factor(&group, target_k)?;
    if parts.len() == 1 {
        return Ok(parts.pop().unwrap());
    }
    if group.len() == 1 {
        let (t, c) = group.iter().next().unwrap();
        return Ok(group::per_position(t, *c, target_k));
    }
    Err(Error::Factorization(format!(
        "group of {} terms splits into {} products",
        group.len(),
        parts.len()
    )))
}

/// Replaces each `Y_i Y_j` pair by `(-X_i X_j)(Z_i Z_j)`. Returns the factors
/// of `coeff * t`: the Y-free remainder first, then one `(-XX, ZZ)` pair per
/// Y pair in ascending qubit order. `coeff` multiplies the first factor.
pub fn eliminate_yy(t: &PauliTerm, coeff: Complex64) -> Result<Vec<(Complex64, PauliTerm)>> {
    let ys: Vec<usize> = t
        .letters()
        .filter(|&(_, l)| l == Letter::Y)
        .map(|(q, _)| q)
        .collect();
    if ys.len() % 2 == 1 {
        return Err(Error::OddYCount { term: t.to_string() });
    }
    let n = t.n_qubits();
    let one = Complex64::new(1.0, 0.0);
    let rest: Vec<(usize, Letter)> = t.letters().filter(|&(_, l)| l != Letter::Y).collect();
    let mut out = Vec::new();
    if !rest.is_empty() || ys.is_empty() {
        out.push((one, PauliTerm::from_letters(n, &rest)?));
    }
    for p in ys.chunks(2) {
        out.push((
            -one,
            PauliTerm::from_letters(n, &[(p[0], Letter::X), (p[1], Letter::X)])?,
        ));
        out.push((
            one,
            PauliTerm::from_letters(n, &[(p[0], Letter::Z), (p[1], Letter::Z)])?,
        ));
    }
    out[0].0 *= coeff;
    Ok(out)
}

/// Diagnostics for a [`FactoredTerm`].
#[derive(Clone, Debug, PartialEq)]
pub struct FactorReport {
    /// `commutes[i][j]` for factor pairs.
    pub commutes: Vec<Vec<bool>>,
    pub all_commute: bool,
    /// Largest coefficient of `product - original`.
    pub residual: f64,
    /// Frobenius norm of the same difference on the support, when small enough.
    pub dense_residual: Option<f64>,
}

impl FactorReport {
    pub fn ok(&self) -> bool {
        self.all_commute && self.residual <= DEFAULT_TOLERANCE
    }
}

/// Largest support for the dense residual check.
pub const MAX_DENSE_SUPPORT: usize = 12;

pub fn validate_factored(f: &FactoredTerm) -> FactorReport {
    let k = f.factors.len();
    let mut commutes = vec![vec![true; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                commutes[i][j] = f.factors[i].iter().all(|(a, _)| {
                    f.factors[j]
                        .iter()
                        .all(|(b, _)| a.commutes(b).unwrap_or(false))
                });
            }
        }
    }
    let all_commute = commutes.iter().flatten().all(|&c| c);
    let diff = f
        .product()
        .and_then(|p| p.add(&f.original.scale_real(-1.0)))
        .map(|d| d.simplify(0.0));
    let residual = match &diff {
        Ok(d) => d.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    let dense_residual = diff.ok().and_then(|d| {
        let mut support: BTreeSet<usize> = BTreeSet::new();
        for s in f.factors.iter().chain(std::iter::once(&f.original)) {
            for (t, _) in s.iter() {
                support.extend(t.support());
            }
        }
        if support.len() > MAX_DENSE_SUPPORT {
            return None;
        }
        let mut map = vec![0usize; d.n_qubits()];
        for (i, q) in support.iter().enumerate() {
            map[*q] = i;
        }
        let m = support.len().max(1);
        let mut small = PauliSum::zero(m);
        for (t, c) in d.iter() {
            let letters: Vec<(usize, Letter)> = t.letters().map(|(q, l)| (map[q], l)).collect();
            small
                .add_term(PauliTerm::from_letters(m, &letters).ok()?, *c)
                .ok()?;
        }
        small.to_dense().ok().map(|mat| mat.norm())
    });
    FactorReport {
        commutes,
        all_commute,
        residual,
        dense_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: usize, s: &str) -> PauliTerm {
        PauliTerm::parse(n, s).unwrap()
    }

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn product_of(n: usize, fs: &[(Complex64, PauliTerm)]) -> PauliSum {
        let mut acc = PauliSum::identity(n, 1.0);
        for (c, p) in fs {
            acc = acc.product(&PauliSum::from_term(p.clone(), *c)).unwrap();
        }
        acc
    }

    #[test]
    fn yy_elimination_z0y1y2() {
        let fs = eliminate_yy(&t(3, "Z0 Y1 Y2"), one()).unwrap();
        assert_eq!(
            fs,
            vec![(one(), t(3, "Z0")), (-one(), t(3, "X1 X2")), (one(), t(3, "Z1 Z2"))]
        );
        let p = product_of(3, &fs);
        let want = PauliSum::from_term(t(3, "Z0 Y1 Y2"), one());
        assert!((p.to_dense().unwrap() - want.to_dense().unwrap()).norm() < 1e-14);
    }

    #[test]
    fn yy_elimination_four_ys() {
        let fs = eliminate_yy(&t(4, "Y0 Y1 Y2 Y3"), one()).unwrap();
        assert_eq!(fs.len(), 4);
        assert_eq!(fs[0], (-one(), t(4, "X0 X1")));
        assert_eq!(fs[3], (one(), t(4, "Z2 Z3")));
        assert!(fs.iter().all(|(_, p)| p.letters().all(|(_, l)| l != Letter::Y)));
        let p = product_of(4, &fs);
        let want = PauliSum::from_term(t(4, "Y0 Y1 Y2 Y3"), one());
        assert!((p.to_dense().unwrap() - want.to_dense().unwrap()).norm() < 1e-14);
    }

    #[test]
    fn yy_elimination_passthrough_and_odd() {
        let fs = eliminate_yy(&t(3, "X0 Z2"), Complex64::new(0.5, 0.0)).unwrap();
        assert_eq!(fs, vec![(Complex64::new(0.5, 0.0), t(3, "X0 Z2"))]);
        assert!(matches!(
            eliminate_yy(&t(3, "X1 Y2 Z0"), one()),
            Err(Error::OddYCount { .. })
        ));
    }

    #[test]
    fn interaction_set_parsing() {
        let s: InteractionSet = "zz,xx,xz".parse().unwrap();
        assert_eq!(s, InteractionSet::default());
        assert!(s.realizes(&t(3, "Z0 X2")));
        assert!(s.realizes(&t(3, "X0 Z2")));
        assert!(!s.realizes(&t(3, "Y0 Y2")));
        assert!("zq".parse::<InteractionSet>().is_err());
        assert_eq!(s.to_string(), "xx,xz,zz");
    }

    #[test]
    fn split_trivial_cases() {
        let h = PauliSum::from_real_strs(3, &[(1.0, "Z0 Z1"), (0.5, "X2"), (-0.2, "")]).unwrap();
        let (r, g) = split_two_local(&h, &InteractionSet::default()).unwrap();
        assert_eq!(r, h);
        assert!(g.is_empty());
        let h = PauliSum::from_real_strs(4, &[(1.0, "X0 X1 X2 X3")]).unwrap();
        let (r, g) = split_two_local(&h, &InteractionSet::default()).unwrap();
        assert!(r.is_empty());
        assert_eq!(g, vec![h]);
    }

    #[test]
    fn factor_examples() {
        let g = PauliSum::from_real_strs(4, &[(0.12, "Z0 Z2 Z3"), (-0.22, "Z1 Z2 Z3")]).unwrap();
        let f = factor_commuting(&g, 3).unwrap();
        let want_a = PauliSum::from_real_strs(4, &[(0.12, "Z0"), (-0.22, "Z1")]).unwrap();
        assert_eq!(f.factors[0], want_a);
        assert_eq!(f.factors[1], PauliSum::from_real_strs(4, &[(1.0, "Z2")]).unwrap());
        assert_eq!(f.factors[2], PauliSum::from_real_strs(4, &[(1.0, "Z3")]).unwrap());
        assert!(validate_factored(&f).ok());

        let g = PauliSum::from_real_strs(4, &[(0.7, "X1 Y2 Z3")]).unwrap();
        let f = factor_commuting(&g, 3).unwrap();
        assert_eq!(f.factors[0], PauliSum::from_real_strs(4, &[(0.7, "X1")]).unwrap());
        assert_eq!(f.factors[1], PauliSum::from_real_strs(4, &[(1.0, "Y2")]).unwrap());
        assert_eq!(f.factors[2], PauliSum::from_real_strs(4, &[(1.0, "Z3")]).unwrap());
        assert!(validate_factored(&f).ok());
    }

    #[test]
    fn validation_flags_problems() {
        let f = FactoredTerm {
            factors: vec![
                PauliSum::from_real_strs(1, &[(1.0, "Z0")]).unwrap(),
                PauliSum::from_real_strs(1, &[(1.0, "X0")]).unwrap(),
            ],
            original: PauliSum::from_term(t(1, "Y0"), Complex64::new(0.0, -1.0)),
        };
        let r = validate_factored(&f);
        assert!(!r.all_commute);
        assert!(r.residual > 1.0);
        let f = FactoredTerm {
            factors: vec![PauliSum::from_real_strs(2, &[(1.0, "Z0")]).unwrap()],
            original: PauliSum::from_real_strs(2, &[(1.0, "Z1")]).unwrap(),
        };
        let r = validate_factored(&f);
        assert!(r.all_commute);
        assert!(r.residual > 0.5);
        assert!(r.dense_residual.unwrap() > 0.5);
    }
}
