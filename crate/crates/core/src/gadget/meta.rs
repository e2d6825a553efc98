//! Key-value sidecar describing gadget rounds.
//!
//! ```text
//! logical_qubits = 4
//! total_qubits = 13
//! allowed = xx,xz,zz
//! rounds = 1
//! round1.delta = 1000
//! round1.term0.ancillas = 4 5 6
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Cutoffs, GadgetHamiltonian};
use crate::error::{Error, Result};
use crate::shaping::InteractionSet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermMeta {
    pub k: usize,
    pub mu: f64,
    pub ancillas: Vec<usize>,
    /// Canonical text of the factored product.
    pub original: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundMeta {
    pub delta: f64,
    pub qubits_before: usize,
    pub qubits_after: usize,
    pub lambda_star: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub v_norm_bound: f64,
    pub terms: Vec<TermMeta>,
}

impl RoundMeta {
    pub fn cutoffs(&self) -> Cutoffs {
        Cutoffs {
            lambda_star: self.lambda_star,
            lambda_plus: self.lambda_plus,
            lambda_minus: self.lambda_minus,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadgetMetadata {
    pub logical_qubits: usize,
    pub total_qubits: usize,
    pub allowed: String,
    pub rounds: Vec<RoundMeta>,
}

impl GadgetMetadata {
    pub fn from_gadget(g: &GadgetHamiltonian) -> GadgetMetadata {
        GadgetMetadata {
            logical_qubits: g.logical_qubits,
            total_qubits: g.n_qubits(),
            allowed: g.allowed.to_string(),
            rounds: g
                .rounds
                .iter()
                .map(|r| RoundMeta {
                    delta: r.delta,
                    qubits_before: r.n_before,
                    qubits_after: r.n_after,
                    lambda_star: r.cutoffs.lambda_star,
                    lambda_plus: r.cutoffs.lambda_plus,
                    lambda_minus: r.cutoffs.lambda_minus,
                    v_norm_bound: r.v_norm_bound,
                    terms: r
                        .terms
                        .iter()
                        .zip(&r.mu)
                        .zip(&r.ancillas)
                        .map(|((t, &mu), a)| TermMeta {
                            k: t.k(),
                            mu,
                            ancillas: a.clone(),
                            original: original_text(&t.original),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn registers(&self) -> Vec<Vec<usize>> {
        self.rounds
            .iter()
            .flat_map(|r| r.terms.iter().map(|t| t.ancillas.clone()))
            .collect()
    }

    /// Penalty of the last round on the full register, or zero without rounds.
    pub fn last_penalty(&self) -> Result<crate::PauliSum> {
        let mut p = crate::PauliSum::zero(self.total_qubits.max(1));
        if let Some(r) = self.rounds.last() {
            for t in &r.terms {
                p.add_assign(&super::penalty(t.k, r.delta, &t.ancillas, self.total_qubits)?)?;
            }
        }
        Ok(p.simplify(crate::pauli::DEFAULT_TOLERANCE))
    }

    pub fn allowed_set(&self) -> Result<InteractionSet> {
        self.allowed.parse()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: String, v: String| {
            s.push_str(&k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("logical_qubits".into(), self.logical_qubits.to_string());
        kv("total_qubits".into(), self.total_qubits.to_string());
        kv("allowed".into(), self.allowed.clone());
        kv("rounds".into(), self.rounds.len().to_string());
        for (ri, r) in self.rounds.iter().enumerate() {
            let p = format!("round{}", ri + 1);
            kv(format!("{p}.delta"), format!("{:?}", r.delta));
            kv(format!("{p}.qubits_before"), r.qubits_before.to_string());
            kv(format!("{p}.qubits_after"), r.qubits_after.to_string());
            kv(format!("{p}.lambda_star"), format!("{:?}", r.lambda_star));
            kv(format!("{p}.lambda_plus"), format!("{:?}", r.lambda_plus));
            kv(format!("{p}.lambda_minus"), format!("{:?}", r.lambda_minus));
            kv(format!("{p}.v_norm_bound"), format!("{:?}", r.v_norm_bound));
            kv(format!("{p}.terms"), r.terms.len().to_string());
            for (ti, t) in r.terms.iter().enumerate() {
                let q = format!("{p}.term{ti}");
                kv(format!("{q}.k"), t.k.to_string());
                kv(format!("{q}.mu"), format!("{:?}", t.mu));
                kv(
                    format!("{q}.ancillas"),
                    t.ancillas.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "),
                );
                kv(format!("{q}.original"), t.original.clone());
            }
        }
        s
    }

    pub fn parse(src: &str) -> Result<GadgetMetadata> {
        let mut map: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in src.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("expected `key = value`, got `{line}`"),
                });
            };
            let k = k.trim().to_string();
            if map.insert(k.clone(), (i + 1, v.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate key `{k}`"),
                });
            }
        }
        let get = |k: &str| -> Result<&(usize, String)> {
            map.get(k).ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing key `{k}`"),
            })
        };
        fn num<T: std::str::FromStr>(k: &str, e: &(usize, String)) -> Result<T> {
            e.1.parse().map_err(|_| Error::Parse {
                line: e.0,
                message: format!("bad value for `{k}`: `{}`", e.1),
            })
        }
        let n_rounds: usize = num("rounds", get("rounds")?)?;
        let mut rounds = Vec::with_capacity(n_rounds);
        for ri in 1..=n_rounds {
            let f = |name: &str| -> Result<f64> {
                let k = format!("round{ri}.{name}");
                num(&k, get(&k)?)
            };
            let u = |name: &str| -> Result<usize> {
                let k = format!("round{ri}.{name}");
                num(&k, get(&k)?)
            };
            let mut terms = Vec::new();
            for ti in 0..u("terms")? {
                let kk = format!("round{ri}.term{ti}.ancillas");
                let e = get(&kk)?;
                let ancillas = e
                    .1
                    .split_whitespace()
                    .map(|a| num::<usize>(&kk, &(e.0, a.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                terms.push(TermMeta {
                    k: u(&format!("term{ti}.k"))?,
                    mu: f(&format!("term{ti}.mu"))?,
                    ancillas,
                    original: map
                        .get(&format!("round{ri}.term{ti}.original"))
                        .map(|e| e.1.clone())
                        .unwrap_or_default(),
                });
            }
            rounds.push(RoundMeta {
                delta: f("delta")?,
                qubits_before: u("qubits_before")?,
                qubits_after: u("qubits_after")?,
                lambda_star: f("lambda_star")?,
                lambda_plus: f("lambda_plus")?,
                lambda_minus: f("lambda_minus")?,
                v_norm_bound: f("v_norm_bound")?,
                terms,
            });
        }
        let m = GadgetMetadata {
            logical_qubits: num("logical_qubits", get("logical_qubits")?)?,
            total_qubits: num("total_qubits", get("total_qubits")?)?,
            allowed: get("allowed")?.1.clone(),
            rounds,
        };
        m.allowed_set()?;
        Ok(m)
    }
}

fn original_text(p: &crate::PauliSum) -> String {
    p.iter()
        .map(|(t, c)| {
            if c.im == 0.0 {
                format!("{:?} {t}", c.re)
            } else {
                format!("({:?}{:+?}i) {t}", c.re, c.im)
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::gadgetize;
    use crate::PauliSum;

    #[test]
    fn sidecar_round_trip() {
        let h = PauliSum::from_real_strs(4, &[(0.3, "Z0 Z1 Z2"), (0.2, "X0 X1 Z3")]).unwrap();
        let g = gadgetize(&h, &[50.0, 3000.0], &InteractionSet::default(), 3).unwrap();
        let m = g.metadata();
        let text = m.to_text();
        assert!(text.contains("round1.term0.ancillas = 4 5 6"));
        assert_eq!(GadgetMetadata::parse(&text).unwrap(), m);
    }

    #[test]
    fn sidecar_errors() {
        assert!(GadgetMetadata::parse("rounds = x").is_err());
        assert!(GadgetMetadata::parse("rounds = 0\nrounds = 0").is_err());
        assert!(GadgetMetadata::parse("rounds = 0\nlogical_qubits = 2").is_err());
    }
}
