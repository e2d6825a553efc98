//! Second-quantized electronic Hamiltonians and an occupation-basis oracle.
//!
//! The two-body coefficient `g[i][j][k][l]` multiplies `a_i† a_j† a_k a_l`
//! with an overall factor of one half. In the chemists' `(pq|rs)` notation
//! this is `g[i][j][k][l] = (il|jk)`. External files written in the other
//! convention must be permuted before loading.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::text::format_real;
use crate::pauli::Digits;

/// Largest mode count for dense occupation-basis matrices.
pub const MAX_ORBITALS_DENSE: usize = 14;

const SYM_TOL: f64 = 1e-12;

/// One- and two-electron integrals over spin orbitals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralTable {
    n_orbitals: usize,
    h: Vec<f64>,
    g: Vec<f64>,
    /// Constant offset (nuclear repulsion or frozen-core energy).
    pub constant: f64,
}

impl IntegralTable {
    pub fn zeros(n_orbitals: usize) -> IntegralTable {
        IntegralTable {
            n_orbitals,
            h: vec![0.0; n_orbitals.pow(2)],
            g: vec![0.0; n_orbitals.pow(4)],
            constant: 0.0,
        }
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    fn hi(&self, i: usize, j: usize) -> usize {
        i * self.n_orbitals + j
    }

    fn gi(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        ((i * self.n_orbitals + j) * self.n_orbitals + k) * self.n_orbitals + l
    }

    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.h[self.hi(i, j)]
    }

    pub fn g(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.g[self.gi(i, j, k, l)]
    }

    fn check_index(&self, idx: &[usize]) -> Result<()> {
        for &i in idx {
            if i >= self.n_orbitals {
                return Err(Error::OrbitalOutOfRange {
                    index: i,
                    n_orbitals: self.n_orbitals,
                });
            }
        }
        Ok(())
    }

    pub fn set_h(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        self.check_index(&[i, j])?;
        let k = self.hi(i, j);
        self.h[k] = v;
        Ok(())
    }

    pub fn set_g(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) -> Result<()> {
        self.check_index(&[i, j, k, l])?;
        let m = self.gi(i, j, k, l);
        self.g[m] = v;
        Ok(())
    }

    /// Checks `h[i][j] == h[j][i]` and `g[i][j][k][l] == g[l][k][j][i]`.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_orbitals;
        for i in 0..n {
            for j in 0..n {
                if (self.h(i, j) - self.h(j, i)).abs() > SYM_TOL {
                    return Err(Error::Asymmetric(format!(
                        "h[{i}][{j}] = {} but h[{j}][{i}] = {}",
                        self.h(i, j),
                        self.h(j, i)
                    )));
                }
                for k in 0..n {
                    for l in 0..n {
                        let a = self.g(i, j, k, l);
                        let b = self.g(l, k, j, i);
                        if (a - b).abs() > SYM_TOL {
                            return Err(Error::Asymmetric(format!(
                                "g[{i}][{j}][{k}][{l}] = {a} but g[{l}][{k}][{j}][{i}] = {b}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Entries uniform in `[-1, 1]`, symmetrized to satisfy [`IntegralTable::validate`].
    pub fn random<R: Rng>(n: usize, rng: &mut R) -> IntegralTable {
        let mut t = IntegralTable::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = rng.random_range(-1.0..=1.0);
                t.set_h(i, j, v).unwrap();
                t.set_h(j, i, v).unwrap();
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let (a, b) = (t.gi(i, j, k, l), t.gi(l, k, j, i));
                        if a <= b {
                            let v = rng.random_range(-1.0..=1.0);
                            t.g[a] = v;
                            t.g[b] = v;
                        }
                    }
                }
            }
        }
        t
    }

    /// Parses the `norb` / `h` / `g` / `e0` text format. Unlisted entries are zero.
    pub fn parse(src: &str) -> Result<IntegralTable> {
        let mut table: Option<IntegralTable> = None;
        let mut seen = std::collections::HashSet::new();
        for (ln, raw) in src.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |m: String| Error::Parse {
                line: line_no,
                message: m,
            };
            let toks: Vec<&str> = line.split_whitespace().collect();
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| err(format!("bad orbital index `{s}`")))
            };
            let val = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| err(format!("bad value `{s}`")))
            };
            match toks[0] {
                "norb" => {
                    if table.is_some() {
                        return Err(err("duplicate `norb` line".into()));
                    }
                    let n = toks
                        .get(1)
                        .map(|s| idx(s))
                        .transpose()?
                        .filter(|&n| n > 0 && toks.len() == 2)
                        .ok_or_else(|| err("`norb` needs one positive integer".into()))?;
                    table = Some(IntegralTable::zeros(n));
                }
                kind @ ("h" | "g" | "e0") => {
                    let t = table
                        .as_mut()
                        .ok_or_else(|| err("`norb` must come first".into()))?;
                    let arity = match kind {
                        "h" => 2,
                        "g" => 4,
                        _ => 0,
                    };
                    if toks.len() != arity + 2 {
                        return Err(err(format!(
                            "`{kind}` needs {arity} indices and a value"
                        )));
                    }
                    let ix: Vec<usize> = toks[1..=arity]
                        .iter()
                        .map(|s| idx(s))
                        .collect::<Result<_>>()?;
                    let v = val(toks[arity + 1])?;
                    if !seen.insert((kind, ix.clone())) {
                        return Err(err(format!("duplicate entry `{kind} {ix:?}`")));
                    }
                    let res = match kind {
                        "h" => t.set_h(ix[0], ix[1], v),
                        "g" => t.set_g(ix[0], ix[1], ix[2], ix[3], v),
                        _ => {
                            t.constant = v;
                            Ok(())
                        }
                    };
                    res.map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown record `{other}`"))),
            }
        }
        let t = table.ok_or(Error::Parse {
            line: 0,
            message: "missing `norb` header".into(),
        })?;
        t.validate()?;
        Ok(t)
    }

    pub fn to_text(&self, digits: Digits) -> String {
        let n = self.n_orbitals;
        let mut out = format!("norb {n}\n");
        if self.constant != 0.0 {
            out += &format!("e0 {}\n", format_real(self.constant, digits));
        }
        for i in 0..n {
            for j in 0..n {
                if self.h(i, j) != 0.0 {
                    out += &format!("h {i} {j} {}\n", format_real(self.h(i, j), digits));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let v = self.g(i, j, k, l);
                        if v != 0.0 {
                            out += &format!("g {i} {j} {k} {l} {}\n", format_real(v, digits));
                        }
                    }
                }
            }
        }
        out
    }
}

/// A ladder operator: orbital index and whether it is a creation operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub orbital: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(orbital: usize) -> Ladder {
        Ladder {
            orbital,
            dagger: true,
        }
    }

    pub fn annihilate(orbital: usize) -> Ladder {
        Ladder {
            orbital,
            dagger: false,
        }
    }
}

/// Coefficient times a product of ladder operators, leftmost first.
#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub ops: Vec<Ladder>,
}

impl Monomial {
    pub fn adjoint(&self) -> Monomial {
        Monomial {
            coeff: self.coeff,
            ops: self
                .ops
                .iter()
                .rev()
                .map(|l| Ladder {
                    orbital: l.orbital,
                    dagger: !l.dagger,
                })
                .collect(),
        }
    }

    fn is_standard_pattern(&self) -> bool {
        let d: Vec<bool> = self.ops.iter().map(|l| l.dagger).collect();
        d == [true, false] || d == [true, true, false, false]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermionHamiltonian {
    pub n_orbitals: usize,
    pub constant: f64,
    pub monomials: Vec<Monomial>,
}

/// One monomial per nonzero integral; the two-body part carries the factor one half.
pub fn build_fermion_hamiltonian(t: &IntegralTable) -> Result<FermionHamiltonian> {
    t.validate()?;
    let n = t.n_orbitals;
    let mut monomials = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = t.h(i, j);
            if v != 0.0 {
                monomials.push(Monomial {
                    coeff: v,
                    ops: vec![Ladder::create(i), Ladder::annihilate(j)],
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t.g(i, j, k, l);
                    if v != 0.0 {
                        monomials.push(Monomial {
                            coeff: 0.5 * v,
                            ops: vec![
                                Ladder::create(i),
                                Ladder::create(j),
                                Ladder::annihilate(k),
                                Ladder::annihilate(l),
                            ],
                        });
                    }
                }
            }
        }
    }
    Ok(FermionHamiltonian {
        n_orbitals: n,
        constant: t.constant,
        monomials,
    })
}

impl FermionHamiltonian {
    /// True when every monomial is `a†a` or `a†a†aa` and the conjugate of each
    /// monomial appears with the same coefficient.
    pub fn is_hermitian(&self) -> bool {
        self.monomials.iter().all(|m| {
            m.is_standard_pattern() && {
                let adj = m.adjoint();
                adj.ops == m.ops
                    || self
                        .monomials
                        .iter()
                        .any(|o| o.ops == adj.ops && (o.coeff - m.coeff).abs() <= SYM_TOL)
            }
        })
    }
}

/// Applies one ladder operator to a basis state: `None` if it annihilates it.
pub fn apply_ladder(l: Ladder, state: u64) -> Option<(f64, u64)> {
    let bit = 1u64 << l.orbital;
    let occupied = state & bit != 0;
    if occupied == l.dagger {
        return None;
    }
    let below = (state & (bit - 1)).count_ones();
    let sign = if below % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, state ^ bit))
}

/// Applies a product of ladder operators, rightmost first.
pub fn apply_ops(ops: &[Ladder], state: u64) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut s = state;
    for &l in ops.iter().rev() {
        let (sg, ns) = apply_ladder(l, s)?;
        sign *= sg;
        s = ns;
    }
    Some((sign, s))
}

fn check_dense(n: usize) -> Result<usize> {
    if n > MAX_ORBITALS_DENSE {
        return Err(Error::TooLarge {
            what: "occupation-basis matrix",
            size: n,
            limit: MAX_ORBITALS_DENSE,
        });
    }
    Ok(1usize << n)
}

fn matrix_from_columns(dim: usize, col: impl Fn(u64) -> Vec<(usize, f64)> + Sync + Send) -> DMatrix<f64> {
    let cols: Vec<Vec<(usize, f64)>> = (0..dim as u64).into_par_iter().map(col).collect();
    let mut m = DMatrix::zeros(dim, dim);
    for (c, entries) in cols.into_iter().enumerate() {
        for (r, v) in entries {
            m[(r, c)] += v;
        }
    }
    m
}

/// Dense matrix of a product of ladder operators on `n` modes.
pub fn ops_matrix(ops: &[Ladder], n: usize) -> Result<DMatrix<f64>> {
    let dim = check_dense(n)?;
    if let Some(l) = ops.iter().find(|l| l.orbital >= n) {
        return Err(Error::OrbitalOutOfRange {
            index: l.orbital,
            n_orbitals: n,
        });
    }
    Ok(matrix_from_columns(dim, |b| {
        apply_ops(ops, b)
            .map(|(s, o)| vec![(o as usize, s)])
            .unwrap_or_default()
    }))
}

/// Exact matrix in the occupation basis `|f_{n-1} ... f_0>`.
pub fn occupation_matrix(h: &FermionHamiltonian) -> Result<DMatrix<f64>> {
    let dim = check_dense(h.n_orbitals)?;
    let mut m = matrix_from_columns(dim, |b| {
        h.monomials
            .iter()
            .filter_map(|mono| apply_ops(&mono.ops, b).map(|(s, o)| (o as usize, s * mono.coeff)))
            .collect()
    });
    for i in 0..dim {
        m[(i, i)] += h.constant;
    }
    Ok(m)
}

/// `sum_j a_j† a_j`.
pub fn number_operator(n: usize) -> FermionHamiltonian {
    FermionHamiltonian {
        n_orbitals: n,
        constant: 0.0,
        monomials: (0..n)
            .map(|j| Monomial {
                coeff: 1.0,
                ops: vec![Ladder::create(j), Ladder::annihilate(j)],
            })
            .collect(),
    }
}

/// Diagonal matrix of `(-1)^N`.
pub fn parity_operator(n: usize) -> Result<DMatrix<f64>> {
    let dim = check_dense(n)?;
    Ok(DMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            0.0
        } else if (r as u64).count_ones() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_number_term() {
        let mut t = IntegralTable::zeros(1);
        t.set_h(0, 0, 1.0).unwrap();
        let h = build_fermion_hamiltonian(&t).unwrap();
        assert_eq!(h.monomials.len(), 1);
        assert_eq!(h.monomials[0].coeff, 1.0);
    }

    #[test]
    fn two_body_half_factor() {
        let mut t = IntegralTable::zeros(2);
        t.set_g(0, 1, 1, 0, 2.0).unwrap();
        let h = build_fermion_hamiltonian(&t).unwrap();
        assert_eq!(h.monomials.len(), 1);
        let m = &h.monomials[0];
        assert_eq!(m.coeff, 1.0);
        assert_eq!(
            m.ops,
            vec![
                Ladder::create(0),
                Ladder::create(1),
                Ladder::annihilate(1),
                Ladder::annihilate(0)
            ]
        );
    }

    #[test]
    fn creation_on_one_mode() {
        let m = ops_matrix(&[Ladder::create(0)], 1).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]));
    }

    #[test]
    fn hop_sign() {
        // a_1† a_0 maps |01> to |10> with sign +1
        let m = ops_matrix(&[Ladder::create(1), Ladder::annihilate(0)], 2).unwrap();
        let mut want = DMatrix::zeros(4, 4);
        want[(2, 1)] = 1.0;
        assert_eq!(m, want);
    }

    #[test]
    fn anticommutators_exact() {
        let n = 5;
        let id = DMatrix::<f64>::identity(1 << n, 1 << n);
        let a: Vec<_> = (0..n).map(|j| ops_matrix(&[Ladder::annihilate(j)], n).unwrap()).collect();
        let ad: Vec<_> = (0..n).map(|j| ops_matrix(&[Ladder::create(j)], n).unwrap()).collect();
        for j in 0..n {
            for k in 0..n {
                let ac = &a[j] * &ad[k] + &ad[k] * &a[j];
                let want = if j == k { id.clone() } else { DMatrix::zeros(1 << n, 1 << n) };
                assert_eq!(ac, want);
                let aa = &a[j] * &a[k] + &a[k] * &a[j];
                assert!(aa.iter().all(|&v| v == 0.0));
            }
        }
    }

    #[test]
    fn number_spectrum() {
        let m = occupation_matrix(&number_operator(3)).unwrap();
        let mut d: Vec<f64> = (0..8).map(|i| m[(i, i)]).collect();
        d.sort_by(f64::total_cmp);
        assert_eq!(d, vec![0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 3.0]);
        let m2 = occupation_matrix(&number_operator(2)).unwrap();
        assert_eq!(m2[(3, 3)], 2.0);
    }

    #[test]
    fn random_tables_are_hermitian_and_conserve_number() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let p = parity_operator(4).unwrap();
        let nm = occupation_matrix(&number_operator(4)).unwrap();
        for _ in 0..5 {
            let t = IntegralTable::random(4, &mut rng);
            let h = build_fermion_hamiltonian(&t).unwrap();
            assert!(h.is_hermitian());
            let m = occupation_matrix(&h).unwrap();
            assert!((&m - m.transpose()).amax() < 1e-12);
            assert!((&m * &nm - &nm * &m).amax() < 1e-12);
            assert!((&m * &p - &p * &m).amax() < 1e-12);
        }
    }

    #[test]
    fn parser_rejects_asymmetry() {
        let e = IntegralTable::parse("norb 2\nh 0 1 0.5\n").unwrap_err();
        assert!(e.to_string().contains("h[0][1]"));
        let e = IntegralTable::parse("norb 2\ng 0 1 1 1 0.5\n").unwrap_err();
        assert!(e.to_string().contains("g[0][1][1][1]"));
    }

    #[test]
    fn parser_errors() {
        assert!(matches!(
            IntegralTable::parse("h 0 0 1\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            IntegralTable::parse("norb 2\nh 0 3 1\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            IntegralTable::parse("norb 2\nh 0 0 1\nh 0 0 2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut t = IntegralTable::random(3, &mut rng);
        t.constant = 0.25;
        let back = IntegralTable::parse(&t.to_text(Digits::RoundTrip)).unwrap();
        assert_eq!(back, t);
    }
}
