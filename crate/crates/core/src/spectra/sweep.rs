use serde::{Deserialize, Serialize};

use super::{verify_gadget, VerifyOptions};
use crate::error::{Error, Result};
use crate::gadget::{gadgetize_once_with, CouplingSplit};
use crate::pauli::PauliSum;
use crate::shaping::InteractionSet;

/// Bisection bracket and stopping rule, in log space.
#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub lo: f64,
    pub hi: f64,
    /// Stop when `hi / lo < 1 + rel_tol`.
    pub rel_tol: f64,
    pub target_k: usize,
    pub split: CouplingSplit,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            lo: 1.0,
            hi: 1e12,
            rel_tol: 1e-3,
            target_k: 3,
            split: CouplingSplit::Balanced,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub eps: f64,
    pub delta_min: f64,
    pub eps_obs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingResult {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
}

/// Observed error of the one-round gadget for `term` at gap `delta`.
pub fn single_term_error(
    term: &PauliSum,
    delta: f64,
    target_k: usize,
    split: CouplingSplit,
    opts: &VerifyOptions,
) -> Result<f64> {
    let g = gadgetize_once_with(term, delta, &InteractionSet::default(), target_k, split)?;
    Ok(verify_gadget(term, &g, f64::INFINITY, None, opts)?.max_error)
}

fn bisect(term: &PauliSum, eps: f64, spec: &SweepSpec, opts: &VerifyOptions) -> Result<(f64, f64)> {
    let err = |d: f64| single_term_error(term, d, spec.target_k, spec.split, opts);
    let e_lo = err(spec.lo)?;
    if e_lo <= eps {
        return Ok((spec.lo, e_lo));
    }
    let mut e_hi = err(spec.hi)?;
    if e_hi > eps {
        return Err(Error::Bracket(format!(
            "eps_obs {e_hi:.3e} > {eps} even at delta {:e}; scanned [{:e}, {:e}]",
            spec.hi, spec.lo, spec.hi
        )));
    }
    let (mut lo, mut hi) = (spec.lo, spec.hi);
    while hi / lo > 1.0 + spec.rel_tol {
        let mid = (lo * hi).sqrt();
        let e = err(mid)?;
        if e <= eps {
            hi = mid;
            e_hi = e;
        } else {
            lo = mid;
        }
    }
    Ok((hi, e_hi))
}

/// Smallest gap reaching `eps` for `alpha * unit_term`, over the grid `alphas x eps_list`.
pub fn delta_sweep(
    unit_term: &PauliSum,
    alphas: &[f64],
    eps_list: &[f64],
    spec: &SweepSpec,
    opts: &VerifyOptions,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::new();
    for &alpha in alphas {
        let term = unit_term.scale_real(alpha).simplify(1e-12);
        for &eps in eps_list {
            if !(eps > 0.0) {
                return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
            }
            let (delta_min, eps_obs) = bisect(&term, eps, spec, opts)?;
            out.push(SweepPoint { alpha, eps, delta_min, eps_obs });
        }
    }
    Ok(out)
}

/// Least-squares slope of `log10 y` against `log10 x`; points with `y <= 0` are skipped.
pub fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let p: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if p.len() < 2 {
        return 0.0;
    }
    let n = p.len() as f64;
    let mx = p.iter().map(|q| q.0).sum::<f64>() / n;
    let my = p.iter().map(|q| q.1).sum::<f64>() / n;
    let sxy: f64 = p.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = p.iter().map(|q| (q.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `eps_obs` over a grid of gaps and the fitted log-log slope.
pub fn error_scaling(
    term: &PauliSum,
    deltas: &[f64],
    target_k: usize,
    split: CouplingSplit,
    opts: &VerifyOptions,
) -> Result<ScalingResult> {
    let points = deltas
        .iter()
        .map(|&d| Ok((d, single_term_error(term, d, target_k, split, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalingResult { slope: fit_slope(&points), points })
}
