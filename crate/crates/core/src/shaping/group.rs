//! Greedy grouping and factoring.
//!
//! Terms are handled as `c X_x Z_z` (so `Y = iXZ` moves into `c`).
//!
//! 1. Binomial extraction. Two terms with the same `x` whose `z` masks differ
//!    by `d`, with `Z_d` commuting with `X_x` and coefficients equal up to a
//!    sign `s`, sum to `c X_x Z_z (1 + s Z_d)`. The `(d, s)` pairing the most
//!    terms wins; Z letters shared by every representative and disjoint from
//!    all X supports are pulled into the binomial while it stays 2-local.
//!    Representatives recurse, so one term can collect several binomials.
//! 2. Common-part sums. Terms `P r_i` sharing a part `P` of weight two or more,
//!    with single letters `r_i` elsewhere, become `P (sum_i c_i r_i)`.
//! 3. Whatever is left is one term, split into single letters, with each
//!    `Y_i Y_j` pair going to `X_i X_j` and `Z_i Z_j`. Letters that
//!    anticommute with a binomial are merged so the factors commute.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::FactoredTerm;
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliTerm, DEFAULT_TOLERANCE};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Mask(Box<[u64]>);

impl Mask {
    fn zero(w: usize) -> Mask {
        Mask(vec![0; w].into_boxed_slice())
    }

    fn single(w: usize, q: usize) -> Mask {
        let mut m = Mask::zero(w);
        m.0[q / 64] |= 1 << (q % 64);
        m
    }

    fn zip(&self, o: &Mask, f: impl Fn(u64, u64) -> u64) -> Mask {
        Mask(self.0.iter().zip(o.0.iter()).map(|(a, b)| f(*a, *b)).collect())
    }

    fn xor(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a ^ b)
    }

    fn and(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a & b)
    }

    fn or(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a | b)
    }

    fn minus(&self, o: &Mask) -> Mask {
        self.zip(o, |a, b| a & !b)
    }

    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn has(&self, q: usize) -> bool {
        (self.0[q / 64] >> (q % 64)) & 1 == 1
    }

    fn bits(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for (i, &w) in self.0.iter().enumerate() {
            let mut b = w;
            while b != 0 {
                v.push(i * 64 + b.trailing_zeros() as usize);
                b &= b - 1;
            }
        }
        v
    }
}

fn ipow(k: usize) -> Complex64 {
    Complex64::new(0.0, 1.0).powi(k as i32)
}

/// `c X_x Z_z`, plus the original terms it stands for.
#[derive(Clone, Debug)]
struct Xz {
    x: Mask,
    z: Mask,
    c: Complex64,
    orig: Vec<(PauliTerm, Complex64)>,
}

/// A factor as a list of `(c, x, z)` meaning `sum c X_x Z_z`.
type RawFactor = Vec<(Complex64, Mask, Mask)>;

struct Ctx {
    n: usize,
    w: usize,
    target_k: usize,
    out: Vec<FactoredTerm>,
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= DEFAULT_TOLERANCE * a.norm().max(b.norm()).max(1.0)
}

/// Groups every term of `rest` and factors each group.
pub fn group_and_factor(rest: &PauliSum, target_k: usize) -> Result<Vec<FactoredTerm>> {
    let n = rest.n_qubits();
    let w = n.div_ceil(64).max(1);
    let mut ctx = Ctx {
        n,
        w,
        target_k,
        out: Vec::new(),
    };
    let mut even = Vec::new();
    for (t, c) in rest.iter() {
        if t.y_count() % 2 == 1 {
            ctx.out.push(per_position(t, *c, target_k));
            continue;
        }
        let x = Mask(t.x_words().into());
        let z = Mask(t.z_words().into());
        let y = x.and(&z).count();
        even.push(Xz {
            x,
            z,
            c: c * ipow(y),
            orig: vec![(t.clone(), *c)],
        });
    }
    ctx.extract(even, Vec::new())?;
    let mut out = ctx.out;
    out.sort_by(|a, b| min_term(&a.original).cmp(&min_term(&b.original)));
    Ok(out)
}

fn min_term(s: &PauliSum) -> Option<PauliTerm> {
    s.iter().next().map(|(t, _)| t.clone())
}

impl Ctx {
    fn extract(&mut self, terms: Vec<Xz>, binoms: Vec<RawFactor>) -> Result<()> {
        if terms.is_empty() {
            return Ok(());
        }
        if binoms.len() + 1 < self.target_k {
            if let Some((d, sign, pairs)) = best_binomial(&terms) {
                let mut used = vec![false; terms.len()];
                let mut reps = Vec::new();
                for (a, b) in pairs {
                    used[a] = true;
                    used[b] = true;
                    let mut r = terms[a].clone();
                    r.orig.extend(terms[b].orig.iter().cloned());
                    reps.push(r);
                }
                let x_all = reps.iter().fold(Mask::zero(self.w), |m, r| m.or(&r.x));
                let mut common = reps
                    .iter()
                    .fold(reps[0].z.clone(), |m, r| m.and(&r.z))
                    .minus(&x_all)
                    .minus(&d);
                if common.count() + d.count() > 2 {
                    common = Mask::zero(self.w);
                }
                for r in &mut reps {
                    r.z = r.z.xor(&common);
                }
                let f: RawFactor = vec![
                    (Complex64::new(1.0, 0.0), Mask::zero(self.w), common.clone()),
                    (Complex64::new(sign, 0.0), Mask::zero(self.w), common.xor(&d)),
                ];
                let mut inner = binoms.clone();
                inner.push(f);
                self.extract(reps, inner)?;
                let rest: Vec<Xz> = terms
                    .into_iter()
                    .zip(used)
                    .filter(|(_, u)| !u)
                    .map(|(t, _)| t)
                    .collect();
                return self.extract(rest, binoms);
            }
        }
        let mut terms = terms;
        while binoms.len() + 2 <= self.target_k {
            let Some((common, members)) = best_common(&terms, &binoms) else {
                break;
            };
            let mut r_factor: RawFactor = Vec::new();
            let mut orig = Vec::new();
            let mut taken = vec![false; terms.len()];
            for &(i, ref rx, ref rz) in &members {
                taken[i] = true;
                r_factor.push((terms[i].c, rx.clone(), rz.clone()));
                orig.extend(terms[i].orig.iter().cloned());
            }
            let c0 = r_factor[0].0;
            let scalar = if r_factor.iter().all(|(c, _, _)| close(*c, c0)) {
                for f in &mut r_factor {
                    f.0 = Complex64::new(1.0, 0.0);
                }
                c0
            } else {
                Complex64::new(1.0, 0.0)
            };
            let mut atoms = self.atoms(&common.0, &common.1, &binoms);
            atoms.push(r_factor);
            self.emit(atoms, binoms.clone(), scalar, orig)?;
            terms = terms
                .into_iter()
                .zip(taken)
                .filter(|(_, t)| !t)
                .map(|(t, _)| t)
                .collect();
        }
        for t in terms {
            let atoms = self.atoms(&t.x, &t.z, &binoms);
            self.emit(atoms, binoms.clone(), t.c, t.orig)?;
        }
        Ok(())
    }

    /// Single-letter and Y-pair pieces of `X_x Z_z`, merged where they
    /// anticommute with a binomial.
    fn atoms(&self, x: &Mask, z: &Mask, binoms: &[RawFactor]) -> Vec<RawFactor> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Mask::zero(self.w);
        let mut pieces: Vec<(Mask, Mask)> = Vec::new();
        for q in x.minus(z).or(&z.minus(x)).bits() {
            let s = Mask::single(self.w, q);
            if x.has(q) {
                pieces.push((s, zero.clone()));
            } else {
                pieces.push((zero.clone(), s));
            }
        }
        let ys = x.and(z).bits();
        for p in ys.chunks(2) {
            let m = Mask::single(self.w, p[0]).or(&Mask::single(self.w, p[1]));
            pieces.push((m.clone(), zero.clone()));
            pieces.push((zero.clone(), m));
        }
        // union-find over pieces anticommuting with the same binomial
        let mut parent: Vec<usize> = (0..pieces.len()).collect();
        fn root(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for b in binoms {
            let d = b
                .iter()
                .fold(zero.clone(), |m, (_, _, z)| m.or(z))
                .minus(&b.iter().fold(b[0].2.clone(), |m, (_, _, z)| m.and(z)));
            let hit: Vec<usize> = (0..pieces.len())
                .filter(|&i| pieces[i].0.and(&d).count() % 2 == 1)
                .collect();
            for w in hit.windows(2) {
                let (a, c) = (root(&mut parent, w[0]), root(&mut parent, w[1]));
                parent[a.max(c)] = a.min(c);
            }
        }
        let mut merged: BTreeMap<usize, (Mask, Mask)> = BTreeMap::new();
        for i in 0..pieces.len() {
            let r = root(&mut parent, i);
            let e = merged
                .entry(r)
                .or_insert_with(|| (zero.clone(), zero.clone()));
            e.0 = e.0.or(&pieces[i].0);
            e.1 = e.1.or(&pieces[i].1);
        }
        merged
            .into_values()
            .map(|(x, z)| vec![(one, x, z)])
            .collect()
    }

    fn emit(
        &mut self,
        mut atoms: Vec<RawFactor>,
        binoms: Vec<RawFactor>,
        scalar: Complex64,
        orig: Vec<(PauliTerm, Complex64)>,
    ) -> Result<()> {
        let n_fixed = binoms.len();
        // atoms are ordered by lowest qubit; merge the lightest neighbours
        atoms.sort_by_key(|a| min_qubit(a));
        while atoms.len() > 1 && atoms.len() + n_fixed > self.target_k {
            let single_terms: Vec<usize> = (0..atoms.len() - 1)
                .filter(|&i| atoms[i].len() == 1 && atoms[i + 1].len() == 1)
                .collect();
            let Some(&i) = single_terms
                .iter()
                .min_by_key(|&&i| raw_weight(&atoms[i]) + raw_weight(&atoms[i + 1]))
            else {
                break;
            };
            let b = atoms.remove(i + 1);
            let a = &mut atoms[i];
            let (x, z) = (a[0].1.or(&b[0].1), a[0].2.or(&b[0].2));
            a[0] = (a[0].0 * b[0].0, x, z);
        }
        let mut factors: Vec<PauliSum> = atoms
            .iter()
            .chain(binoms.iter())
            .map(|f| self.to_sum(f))
            .collect();
        if factors.len() > self.target_k {
            return Err(Error::Factorization(format!(
                "needs {} factors, limit is {}",
                factors.len(),
                self.target_k
            )));
        }
        while factors.len() < self.target_k {
            factors.push(PauliSum::identity(self.n, 1.0));
        }
        order_and_scale(&mut factors, scalar);
        let mut original = PauliSum::zero(self.n);
        for (t, c) in orig {
            original.add_term(t, c)?;
        }
        self.out.push(FactoredTerm { factors, original });
        Ok(())
    }

    fn to_sum(&self, f: &RawFactor) -> PauliSum {
        let mut s = PauliSum::zero(self.n);
        for (c, x, z) in f {
            let y = x.and(z).count();
            let t = PauliTerm::from_words(self.n, &x.0, &z.0);
            // X_x Z_z = i^{-y} P(x, z)
            s.add_term(t, c * ipow(4 - y % 4)).expect("same register");
        }
        s
    }
}

fn min_qubit(f: &RawFactor) -> usize {
    f.iter()
        .flat_map(|(_, x, z)| x.or(z).bits())
        .min()
        .unwrap_or(usize::MAX)
}

fn raw_weight(f: &RawFactor) -> usize {
    f.iter().map(|(_, x, z)| x.or(z).count()).max().unwrap_or(0)
}

fn support_bounds(s: &PauliSum) -> (usize, usize) {
    let qs: Vec<usize> = s.iter().flat_map(|(t, _)| t.support()).collect();
    match (qs.iter().max(), qs.iter().min()) {
        (Some(&hi), Some(&lo)) => (hi, lo),
        _ => (usize::MAX, usize::MAX),
    }
}

/// Sorts factors by (highest qubit, term count, lowest qubit, terms) with
/// identity padding last, then puts `scalar` on the first single-term factor.
fn order_and_scale(factors: &mut [PauliSum], scalar: Complex64) {
    factors.sort_by(|a, b| {
        let (ha, la) = support_bounds(a);
        let (hb, lb) = support_bounds(b);
        (ha, a.len(), la)
            .cmp(&(hb, b.len(), lb))
            .then_with(|| {
                let ta: Vec<_> = a.iter().map(|(t, _)| t.clone()).collect();
                let tb: Vec<_> = b.iter().map(|(t, _)| t.clone()).collect();
                ta.cmp(&tb)
            })
    });
    let idx = factors
        .iter()
        .position(|f| f.len() == 1 && !f.iter().next().unwrap().0.is_identity())
        .unwrap_or(0);
    factors[idx] = factors[idx].scale(scalar);
}

/// One factor per non-identity letter, the coefficient on the first.
pub(super) fn per_position(t: &PauliTerm, c: Complex64, target_k: usize) -> FactoredTerm {
    let n = t.n_qubits();
    let mut factors: Vec<PauliSum> = t
        .letters()
        .map(|(q, l)| {
            PauliSum::from_term(
                PauliTerm::single(n, q, l).expect("letter in range"),
                Complex64::new(1.0, 0.0),
            )
        })
        .collect();
    while factors.len() < target_k {
        factors.push(PauliSum::identity(n, 1.0));
    }
    order_and_scale(&mut factors, c);
    FactoredTerm {
        factors,
        original: PauliSum::from_term(t.clone(), c),
    }
}

/// Best `(d, sign)` and the index pairs `(representative, partner)` it joins.
fn best_binomial(terms: &[Xz]) -> Option<(Mask, f64, Vec<(usize, usize)>)> {
    let mut cands: Vec<(Mask, f64)> = Vec::new();
    for i in 0..terms.len() {
        for j in i + 1..terms.len() {
            let (a, b) = (&terms[i], &terms[j]);
            if a.x != b.x {
                continue;
            }
            let d = a.z.xor(&b.z);
            if d.count() > 2 || d.and(&a.x).count() % 2 == 1 {
                continue;
            }
            for s in [1.0, -1.0] {
                if close(b.c, a.c * s) && !cands.contains(&(d.clone(), s)) {
                    cands.push((d.clone(), s));
                }
            }
        }
    }
    cands.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut best: Option<(Mask, f64, Vec<(usize, usize)>)> = None;
    for (d, s) in cands {
        let pairs = match_pairs(terms, &d, s);
        if best.as_ref().is_none_or(|b| pairs.len() > b.2.len()) {
            best = Some((d, s, pairs));
        }
    }
    best.filter(|b| !b.2.is_empty())
}

fn match_pairs(terms: &[Xz], d: &Mask, s: f64) -> Vec<(usize, usize)> {
    let mut used = vec![false; terms.len()];
    let mut pairs = Vec::new();
    for i in 0..terms.len() {
        if used[i] {
            continue;
        }
        let a = &terms[i];
        let partner_z = a.z.xor(d);
        let Some(j) = (0..terms.len()).find(|&j| {
            !used[j] && j != i && terms[j].x == a.x && terms[j].z == partner_z
        }) else {
            continue;
        };
        // representative: the member with fewer bits inside d
        let (r, p) = if a.z.and(d).count() <= terms[j].z.and(d).count() {
            (i, j)
        } else {
            (j, i)
        };
        if !close(terms[p].c, terms[r].c * s) {
            continue;
        }
        used[i] = true;
        used[j] = true;
        pairs.push((r, p));
    }
    pairs
}

/// Largest set of terms `P r_i` sharing a part `P` (weight at least two) with
/// single letters `r_i` that commute with every binomial.
#[allow(clippy::type_complexity)]
fn best_common(terms: &[Xz], binoms: &[RawFactor]) -> Option<((Mask, Mask), Vec<(usize, Mask, Mask)>)> {
    let w = terms.first()?.x.0.len();
    let bz: Vec<Mask> = binoms
        .iter()
        .map(|b| b.iter().fold(Mask::zero(w), |m, (_, _, z)| m.or(z)))
        .collect();
    let mut groups: BTreeMap<(Mask, Mask), Vec<(usize, Mask, Mask)>> = BTreeMap::new();
    for (i, t) in terms.iter().enumerate() {
        let supp = t.x.or(&t.z);
        if supp.count() < 3 {
            continue;
        }
        for q in supp.bits() {
            let both = t.x.has(q) && t.z.has(q);
            if both {
                continue;
            }
            let s = Mask::single(w, q);
            let (rx, rz) = if t.x.has(q) {
                (s.clone(), Mask::zero(w))
            } else {
                (Mask::zero(w), s.clone())
            };
            if bz.iter().any(|z| rx.and(z).count() % 2 == 1) {
                continue;
            }
            let key = (t.x.minus(&s), t.z.minus(&s));
            groups.entry(key).or_default().push((i, rx, rz));
        }
    }
    let mut best: Option<((Mask, Mask), Vec<(usize, Mask, Mask)>)> = None;
    for (k, v) in groups {
        let mut seen = Vec::new();
        let v: Vec<_> = v
            .into_iter()
            .filter(|(i, _, _)| {
                let fresh = !seen.contains(i);
                seen.push(*i);
                fresh
            })
            .collect();
        if v.len() >= 2 && best.as_ref().is_none_or(|b| v.len() > b.1.len()) {
            best = Some((k, v));
        }
    }
    best.filter(|(k, _)| !k.0.or(&k.1).is_zero())
}
