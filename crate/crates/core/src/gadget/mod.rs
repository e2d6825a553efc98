//! Bit-flip gadgets: penalty registers, perturbations and compensation terms,
//! applied round by round until every term is realizable.
//!
//! For a group `O_1 O_2 ... O_k` with fresh ancillas `u_1..u_k`:
//!
//! ```text
//! H_s    = Delta / (2(k-1)) * sum_{i<j} (1 - Z_{u_i} Z_{u_j})
//! mu_k   = (Delta^(k-1) / k!)^(1/k)
//! V      = H_else + Lambda + mu_k * sum_i O_i X_{u_i}
//! Lambda = (mu_k^2 / Delta) * sum_i O_i^2
//! ```

mod meta;
pub mod process;
pub mod selfenergy;

pub use meta::{GadgetMetadata, RoundMeta, TermMeta};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliSum, PauliTerm, DEFAULT_TOLERANCE};
use crate::shaping::{shape, FactoredTerm, InteractionSet};

/// `(Delta^(k-1) / k!)^(1/k)`.
pub fn mu(k: usize, delta: f64) -> f64 {
    let fact: f64 = (1..=k).map(|i| i as f64).product();
    (delta.powi(k as i32 - 1) / fact).powf(1.0 / k as f64)
}

/// Spectral cutoffs of the unperturbed penalty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cutoffs {
    pub lambda_star: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
}

impl Cutoffs {
    pub fn for_delta(delta: f64) -> Cutoffs {
        Cutoffs {
            lambda_star: delta / 2.0,
            lambda_plus: delta,
            lambda_minus: 0.0,
        }
    }
}

/// One gadget round.
#[derive(Clone, Debug)]
pub struct GadgetRound {
    /// 1-based round number.
    pub index: usize,
    pub delta: f64,
    pub terms: Vec<FactoredTerm>,
    pub mu: Vec<f64>,
    /// `ancillas[s][i]` couples to factor `i` of term `s`.
    pub ancillas: Vec<Vec<usize>>,
    /// Realizable part of the round input, on `n_before` qubits.
    pub h_else: PauliSum,
    /// Compensation, on `n_before` qubits.
    pub lambda: PauliSum,
    pub penalty: PauliSum,
    pub n_before: usize,
    pub n_after: usize,
    pub cutoffs: Cutoffs,
    /// Sum of coefficient magnitudes of V.
    pub v_norm_bound: f64,
    /// `V`, kept apart from the penalty so that its small entries are not
    /// rounded against the penalty constant.
    pub v: PauliSum,
    /// Full Hamiltonian after this round, `v + penalty`.
    pub output: PauliSum,
}

impl GadgetRound {
    /// `H_else + sum_s (prod_i O_{s,i}) (x) F_s` on `n_after` qubits, where `F_s`
    /// flips every ancilla of register `s`. On the penalty ground space this is
    /// what the series reproduces at leading order.
    pub fn effective_target(&self) -> Result<PauliSum> {
        let mut acc = self.h_else.widen(self.n_after)?;
        for (t, reg) in self.terms.iter().zip(&self.ancillas) {
            let flip = PauliTerm::from_letters(
                self.n_after,
                &reg.iter().map(|&q| (q, Letter::X)).collect::<Vec<_>>(),
            )?;
            acc.add_assign(&t.product()?.widen(self.n_after)?.mul_term(&flip)?)?;
        }
        Ok(acc.simplify(DEFAULT_TOLERANCE))
    }
}

/// The compiled Hamiltonian and its round history.
#[derive(Clone, Debug)]
pub struct GadgetHamiltonian {
    pub hamiltonian: PauliSum,
    pub rounds: Vec<GadgetRound>,
    pub logical_qubits: usize,
    pub allowed: InteractionSet,
    pub warnings: Vec<String>,
}

impl GadgetHamiltonian {
    pub fn n_qubits(&self) -> usize {
        self.hamiltonian.n_qubits()
    }

    /// Ancilla registers of every round, in order.
    pub fn registers(&self) -> Vec<Vec<usize>> {
        self.rounds.iter().flat_map(|r| r.ancillas.clone()).collect()
    }

    pub fn metadata(&self) -> GadgetMetadata {
        GadgetMetadata::from_gadget(self)
    }

    /// True when every term is identity, one-body or an allowed two-body coupling.
    pub fn is_realizable(&self) -> bool {
        self.hamiltonian.iter().all(|(t, _)| self.allowed.realizes(t))
    }
}

/// `Delta / (2(k-1)) * sum_{i<j} (1 - Z_i Z_j)` over the listed ancillas.
pub fn penalty(k: usize, delta: f64, ancillas: &[usize], n_qubits: usize) -> Result<PauliSum> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "penalty register needs k >= 3, got {k}"
        )));
    }
    if ancillas.len() != k {
        return Err(Error::InvalidParameter(format!(
            "{} ancillas given for a k = {k} register",
            ancillas.len()
        )));
    }
    let w = delta / (2.0 * (k as f64 - 1.0));
    let mut out = PauliSum::zero(n_qubits);
    if delta == 0.0 {
        return Ok(out);
    }
    for i in 0..k {
        for j in i + 1..k {
            out.add_term(PauliTerm::identity(n_qubits), Complex64::new(w, 0.0))?;
            out.add_term(
                PauliTerm::from_letters(n_qubits, &[(ancillas[i], Letter::Z), (ancillas[j], Letter::Z)])?,
                Complex64::new(-w, 0.0),
            )?;
        }
    }
    Ok(out.simplify(DEFAULT_TOLERANCE))
}

fn check_ancillas(n_before: usize, n_after: usize, ancillas: &[Vec<usize>]) -> Result<()> {
    let mut seen = vec![false; n_after];
    for &q in ancillas.iter().flatten() {
        if q < n_before || q >= n_after || seen[q] {
            return Err(Error::AncillaOverlap { qubit: q });
        }
        seen[q] = true;
    }
    Ok(())
}

/// `(mu^2 / Delta) * sum_s sum_i O_{s,i}^2` on the logical register.
pub fn compensation(terms: &[FactoredTerm], delta: f64) -> Result<PauliSum> {
    let n = terms.first().map(|t| t.n_qubits()).unwrap_or(1);
    let mut out = PauliSum::zero(n);
    for t in terms {
        let m = mu(t.k(), delta);
        let w = m * m / delta;
        for f in &t.factors {
            out.add_assign(&f.product(f)?.scale_real(w))?;
        }
    }
    Ok(out.chop(DEFAULT_TOLERANCE))
}

/// `H_else + Lambda + sum_s mu_s sum_i O_{s,i} X_{u_{s,i}}` on `n_after` qubits.
pub fn perturbation(
    terms: &[FactoredTerm],
    ancillas: &[Vec<usize>],
    delta: f64,
    h_else: &PauliSum,
    lambda: &PauliSum,
    n_after: usize,
) -> Result<PauliSum> {
    let n_before = h_else.n_qubits();
    check_ancillas(n_before, n_after, ancillas)?;
    let mut v = h_else.widen(n_after)?;
    v.add_assign(&lambda.widen(n_after)?)?;
    for (t, reg) in terms.iter().zip(ancillas) {
        if reg.len() != t.k() {
            return Err(Error::InvalidParameter(format!(
                "term has {} factors but {} ancillas",
                t.k(),
                reg.len()
            )));
        }
        let m = mu(t.k(), delta);
        for (f, &u) in t.factors.iter().zip(reg) {
            let xu = PauliTerm::single(n_after, u, Letter::X)?;
            v.add_assign(&f.widen(n_after)?.mul_term(&xu)?.scale_real(m))?;
        }
    }
    Ok(v.chop(DEFAULT_TOLERANCE))
}

fn build_round(
    index: usize,
    h_else: &PauliSum,
    terms: Vec<FactoredTerm>,
    delta: f64,
) -> Result<GadgetRound> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gap must be positive and finite, got {delta}"
        )));
    }
    let n_before = h_else.n_qubits();
    let mut next = n_before;
    let mut ancillas = Vec::new();
    for t in &terms {
        ancillas.push((next..next + t.k()).collect::<Vec<_>>());
        next += t.k();
    }
    let n_after = next;
    let lambda = if terms.is_empty() {
        PauliSum::zero(n_before)
    } else {
        compensation(&terms, delta)?
    };
    let v = perturbation(&terms, &ancillas, delta, h_else, &lambda, n_after)?;
    let mut pen = PauliSum::zero(n_after);
    for (t, reg) in terms.iter().zip(&ancillas) {
        pen.add_assign(&penalty(t.k(), delta, reg, n_after)?)?;
    }
    let pen = pen.simplify(DEFAULT_TOLERANCE);
    let output = v.add(&pen)?.chop(DEFAULT_TOLERANCE);
    Ok(GadgetRound {
        index,
        delta,
        mu: terms.iter().map(|t| mu(t.k(), delta)).collect(),
        terms,
        ancillas,
        h_else: h_else.clone(),
        lambda,
        penalty: pen,
        n_before,
        n_after,
        cutoffs: Cutoffs::for_delta(delta),
        v_norm_bound: v.norm_bound(),
        v,
        output,
    })
}

fn norm_warning(r: &GadgetRound) -> Option<String> {
    (r.v_norm_bound > r.cutoffs.lambda_star).then(|| {
        format!(
            "round {}: |V| bound {:.6e} exceeds Delta/2 = {:.6e}",
            r.index, r.v_norm_bound, r.cutoffs.lambda_star
        )
    })
}

/// One round from an explicit split. With no terms the input comes back unchanged.
pub fn gadgetize_round(
    h2local: &PauliSum,
    terms: Vec<FactoredTerm>,
    delta: f64,
) -> Result<GadgetHamiltonian> {
    let allowed = InteractionSet::default();
    if terms.is_empty() {
        return Ok(GadgetHamiltonian {
            hamiltonian: h2local.clone(),
            rounds: Vec::new(),
            logical_qubits: h2local.n_qubits(),
            allowed,
            warnings: Vec::new(),
        });
    }
    let r = build_round(1, h2local, terms, delta)?;
    Ok(GadgetHamiltonian {
        hamiltonian: r.output.clone(),
        warnings: norm_warning(&r).into_iter().collect(),
        rounds: vec![r],
        logical_qubits: h2local.n_qubits(),
        allowed,
    })
}

/// Where the scalar of a factored Pauli string goes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CouplingSplit {
    /// Whole coefficient on the first factor, as produced by shaping.
    #[default]
    FirstFactor,
    /// `|c|^(1/k)` on every factor, phase on the first. Only applied to terms
    /// whose factors are all single Pauli strings.
    Balanced,
}

/// Redistributes the scalar of `t` according to `split`.
pub fn split_coupling(t: &FactoredTerm, split: CouplingSplit) -> FactoredTerm {
    if split == CouplingSplit::FirstFactor || t.factors.iter().any(|f| f.len() != 1) {
        return t.clone();
    }
    let k = t.k();
    let c: Complex64 = t.factors.iter().map(|f| *f.iter().next().unwrap().1).product();
    let r = c.norm().powf(1.0 / k as f64);
    let phase = if c.norm() > 0.0 { c / c.norm() } else { Complex64::new(1.0, 0.0) };
    let factors = t
        .factors
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (p, _) = f.iter().next().unwrap();
            let w = if i == 0 { phase * r } else { Complex64::new(r, 0.0) };
            PauliSum::from_term(p.clone(), w)
        })
        .collect();
    FactoredTerm {
        factors,
        original: t.original.clone(),
    }
}

/// Shapes `h` and applies exactly one round, whether or not the result is
/// realizable. Useful for studying a single gadget in isolation.
pub fn gadgetize_once(
    h: &PauliSum,
    delta: f64,
    allowed: &InteractionSet,
    target_k: usize,
) -> Result<GadgetHamiltonian> {
    gadgetize_once_with(h, delta, allowed, target_k, CouplingSplit::FirstFactor)
}

pub fn gadgetize_once_with(
    h: &PauliSum,
    delta: f64,
    allowed: &InteractionSet,
    target_k: usize,
    split: CouplingSplit,
) -> Result<GadgetHamiltonian> {
    let shaped = shape(&h.simplify(DEFAULT_TOLERANCE), allowed, target_k)?;
    let terms = shaped.factored.iter().map(|t| split_coupling(t, split)).collect();
    let mut g = gadgetize_round(&shaped.realizable, terms, delta)?;
    g.allowed = allowed.clone();
    Ok(g)
}

/// Gap schedule for nested rounds, `delta_{r+1} = delta_r^beta`.
pub fn nested_deltas(delta1: f64, beta: f64, rounds: usize) -> Vec<f64> {
    std::iter::successors(Some(delta1), |d| Some(d.powf(beta))).take(rounds).collect()
}

/// Repeats shape-then-gadgetize with `deltas[r]` for round `r` until every
/// term is realizable.
pub fn gadgetize(
    h: &PauliSum,
    deltas: &[f64],
    allowed: &InteractionSet,
    target_k: usize,
) -> Result<GadgetHamiltonian> {
    let mut current = h.simplify(DEFAULT_TOLERANCE);
    let mut rounds: Vec<GadgetRound> = Vec::new();
    let mut warnings = Vec::new();
    loop {
        let shaped = shape(&current, allowed, target_k)?;
        if shaped.factored.is_empty() {
            break;
        }
        let Some(&delta) = deltas.get(rounds.len()) else {
            return Err(Error::RoundLimit {
                limit: deltas.len(),
                remaining: shaped.factored.iter().map(|f| f.original.len()).sum(),
            });
        };
        let r = build_round(rounds.len() + 1, &shaped.realizable, shaped.factored, delta)?;
        warnings.extend(norm_warning(&r));
        current = r.output.clone();
        rounds.push(r);
    }
    if let Some((t, _)) = current.iter().find(|(t, _)| !allowed.realizes(t)) {
        return Err(Error::Unrealizable { term: t.to_string() });
    }
    Ok(GadgetHamiltonian {
        hamiltonian: current,
        rounds,
        logical_qubits: h.n_qubits(),
        allowed: allowed.clone(),
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shaping::factor_commuting;

    fn eig_sorted(p: &PauliSum) -> Vec<f64> {
        let m = p.to_dense_real(14).unwrap().unwrap();
        let mut e: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn mu_closed_form() {
        assert!((mu(3, 6.0) - 6f64.cbrt()).abs() < 1e-12);
        let d = 1e3;
        assert!((mu(3, d) / (d * d / 6.0).cbrt() - 1.0).abs() < 1e-12);
        assert!((mu(2, 4.0) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn penalty_spectrum_k3() {
        let p = penalty(3, 1.0, &[0, 1, 2], 3).unwrap();
        let e = eig_sorted(&p);
        let want = [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        for (a, b) in e.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(penalty(3, 0.0, &[0, 1, 2], 3).unwrap().is_empty());
        assert!(penalty(2, 1.0, &[0, 1], 2).is_err());
    }

    #[test]
    fn three_penalties_constant() {
        let d = 7.0;
        let mut p = PauliSum::zero(9);
        for s in 0..3 {
            p.add_assign(&penalty(3, d, &[3 * s, 3 * s + 1, 3 * s + 2], 9).unwrap())
                .unwrap();
        }
        assert!((p.identity_coeff().re - 9.0 * d / 4.0).abs() < 1e-12);
        assert_eq!(p.len(), 10);
        assert!(p.iter().filter(|(t, _)| t.weight() == 2).all(|(_, c)| (c.re + d / 4.0).abs() < 1e-12));
    }

    #[test]
    fn single_factor_lambda() {
        let g = PauliSum::from_real_strs(3, &[(1.0, "Z0 Z1 Z2")]).unwrap();
        let f = factor_commuting(&g, 3).unwrap();
        let l = compensation(&[f], 10.0).unwrap();
        let m = mu(3, 10.0);
        assert_eq!(l.len(), 1);
        assert!((l.identity_coeff().re - 3.0 * m * m / 10.0).abs() < 1e-12);
    }

    #[test]
    fn single_term_structure() {
        let h = PauliSum::from_real_strs(3, &[(0.5, "Z0 Y1 Y2")]).unwrap();
        let g = gadgetize_once(&h, 1000.0, &InteractionSet::default(), 3).unwrap();
        assert_eq!(g.n_qubits(), 6);
        assert_eq!(g.rounds.len(), 1);
        assert_eq!(g.hamiltonian.max_locality(), 3);
        assert!(g.hamiltonian.is_hermitian());
        assert_eq!(g.registers(), vec![vec![3, 4, 5]]);
    }

    #[test]
    fn two_local_input_is_untouched() {
        let h = PauliSum::from_real_strs(3, &[(0.5, "Z0 Z1"), (0.1, "X2")]).unwrap();
        let g = gadgetize(&h, &[], &InteractionSet::default(), 3).unwrap();
        assert!(g.rounds.is_empty());
        assert_eq!(g.hamiltonian, h);
    }

    #[test]
    fn round_limit_and_bad_delta() {
        let h = PauliSum::from_real_strs(3, &[(0.5, "Z0 Z1 Z2")]).unwrap();
        assert!(matches!(
            gadgetize(&h, &[], &InteractionSet::default(), 3),
            Err(Error::RoundLimit { .. })
        ));
        assert!(gadgetize(&h, &[-1.0], &InteractionSet::default(), 3).is_err());
    }

    #[test]
    fn overlapping_ancillas_rejected() {
        let h = PauliSum::from_real_strs(3, &[(0.5, "Z0 Z1 Z2")]).unwrap();
        let f = factor_commuting(&h, 3).unwrap();
        let e = perturbation(&[f], &[vec![3, 3, 4]], 1.0, &PauliSum::zero(3), &PauliSum::zero(3), 6);
        assert!(matches!(e, Err(Error::AncillaOverlap { qubit: 3 })));
    }

    #[test]
    fn nested_schedule() {
        let d = nested_deltas(100.0, 1.5, 3);
        assert_eq!(d[..2], [100.0, 1000.0]);
        assert!((d[2] / 1000f64.powf(1.5) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn balanced_split_keeps_product() {
        let h = PauliSum::from_real_strs(3, &[(-8.0, "X0 Y1 Z2")]).unwrap();
        let sh = shape(&h, &InteractionSet::default(), 3).unwrap();
        let b = split_coupling(&sh.factored[0], CouplingSplit::Balanced);
        assert!(b.product().unwrap().add(&h.scale_real(-1.0)).unwrap().simplify(1e-12).is_empty());
        for (i, f) in b.factors.iter().enumerate() {
            let c = f.iter().next().unwrap().1;
            assert!((c.re.abs() - 2.0).abs() < 1e-12 && (i == 0 || c.re > 0.0));
        }
    }

    #[test]
    fn odd_y_term_one_round() {
        let h = PauliSum::from_real_strs(3, &[(1.0, "X0 Y1 Z2")]).unwrap();
        let g = gadgetize_once(&h, 100.0, &InteractionSet::default(), 3).unwrap();
        assert_eq!(g.n_qubits(), 6);
        // the Y factor couples as Y X, outside the allowed set
        assert!(!g.is_realizable());
        assert!(g.hamiltonian.is_hermitian());
    }
}
