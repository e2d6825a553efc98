//! Symbolic enumeration of the self-energy series as ancilla-flip processes.
//!
//! Each step of a process is either `D = H_else + Lambda` (ancillas untouched)
//! or a flip of ancilla `u_{s,i}` carrying `mu_s O_{s,i}`. Intermediate
//! states must leave the penalty ground space; the final state must return
//! to it. A register holding `m` flipped bits costs `Delta m (k-m) / (k-1)`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::GadgetRound;
use crate::error::{Error, Result};
use crate::pauli::{PauliSum, DEFAULT_TOLERANCE};

/// One step of a process.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    D,
    Flip { register: usize, factor: usize },
}

/// Contributions of all processes sharing an order, a set of touched
/// registers, a set of registers left flipped and a number of `D` steps.
#[derive(Clone, Debug)]
pub struct ProcessClass {
    pub order: usize,
    pub touched: Vec<usize>,
    pub flipped: Vec<usize>,
    pub d_steps: usize,
    /// Sum of `O_m ... O_1` times couplings and resolvent factors.
    pub operator: PauliSum,
    pub paths: usize,
}

/// Contribution of one explicit step sequence, applied left to right in time.
pub fn path_operator(round: &GadgetRound, steps: &[Step], z: f64) -> Result<Option<PauliSum>> {
    let d = round.h_else.add(&round.lambda)?;
    let k: Vec<usize> = round.ancillas.iter().map(|a| a.len()).collect();
    let mut state: Vec<u64> = vec![0; k.len()];
    let mut acc = PauliSum::identity(round.n_before, 1.0);
    for (t, s) in steps.iter().enumerate() {
        let op = match *s {
            Step::D => d.clone(),
            Step::Flip { register, factor } => {
                let f = round
                    .terms
                    .get(register)
                    .and_then(|x| x.factors.get(factor))
                    .ok_or_else(|| Error::InvalidParameter(format!("no factor {register}.{factor}")))?;
                state[register] ^= 1 << factor;
                f.scale_real(round.mu[register])
            }
        };
        acc = op.product(&acc)?;
        let e = energy(&state, &k, round.delta);
        let last = t + 1 == steps.len();
        if last != (e == 0.0) {
            return Ok(None);
        }
        if !last {
            acc = acc.scale_real(1.0 / (z - e));
        }
    }
    Ok(Some(acc.chop(DEFAULT_TOLERANCE)))
}

fn energy(state: &[u64], k: &[usize], delta: f64) -> f64 {
    state
        .iter()
        .zip(k)
        .map(|(&s, &k)| {
            let m = s.count_ones() as f64;
            let k = k as f64;
            delta * m * (k - m) / (k - 1.0)
        })
        .sum()
}

/// All processes of exactly `order` steps starting in the all-0 ancilla state.
pub fn enumerate(round: &GadgetRound, order: usize, z: f64) -> Result<Vec<ProcessClass>> {
    if !(1..=4).contains(&order) {
        return Err(Error::SeriesOrder(order));
    }
    let mut steps = vec![Step::D];
    for (s, reg) in round.ancillas.iter().enumerate() {
        for i in 0..reg.len() {
            steps.push(Step::Flip { register: s, factor: i });
        }
    }
    let mut classes: BTreeMap<(Vec<usize>, Vec<usize>, usize), (PauliSum, usize)> = BTreeMap::new();
    let total = steps.len().pow(order as u32);
    for idx in 0..total {
        let mut r = idx;
        let path: Vec<Step> = (0..order)
            .map(|_| {
                let s = steps[r % steps.len()];
                r /= steps.len();
                s
            })
            .collect();
        let Some(op) = path_operator(round, &path, z)? else {
            continue;
        };
        let mut touched: Vec<usize> = path
            .iter()
            .filter_map(|s| match s {
                Step::Flip { register, .. } => Some(*register),
                Step::D => None,
            })
            .collect();
        touched.sort_unstable();
        touched.dedup();
        let flipped: Vec<usize> = touched
            .iter()
            .copied()
            .filter(|&reg| {
                path.iter()
                    .filter(|s| matches!(s, Step::Flip { register, .. } if *register == reg))
                    .count()
                    % 2
                    == 1
            })
            .collect();
        let d_steps = path.iter().filter(|s| **s == Step::D).count();
        let e = classes
            .entry((touched, flipped, d_steps))
            .or_insert_with(|| (PauliSum::zero(round.n_before), 0));
        e.0.add_assign(&op)?;
        e.1 += 1;
    }
    Ok(classes
        .into_iter()
        .map(|((touched, flipped, d_steps), (op, paths))| ProcessClass {
            order,
            touched,
            flipped,
            d_steps,
            operator: op.chop(DEFAULT_TOLERANCE),
            paths,
        })
        .collect())
}

/// True when `p` is a multiple of the identity up to `tol`.
pub fn is_scalar(p: &PauliSum, tol: f64) -> bool {
    p.iter().all(|(t, c)| t.is_identity() || c.norm() <= tol)
}

/// Identity coefficient, for reporting constant shifts.
pub fn scalar_part(p: &PauliSum) -> Complex64 {
    p.identity_coeff()
}
