//! Interaction graph of a 2-local Hamiltonian, with DOT and JSON export.
//!
//! Nodes are qubits, carrying their one-body Z and X weights. Edges are the
//! two-body terms. ZZ is drawn solid, XX dashed and XZ dotted; an XZ edge is
//! stored X endpoint first.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gadget::{GadgetHamiltonian, GadgetMetadata};
use crate::pauli::text::format_sig;
use crate::pauli::{Letter, PauliSum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Logical,
    /// Introduced in gadget round `round` (1-based) for term `term`.
    Ancilla { round: usize, term: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EdgeClass {
    ZZ,
    XX,
    XZ,
}

impl EdgeClass {
    pub fn style(self) -> &'static str {
        match self {
            EdgeClass::ZZ => "solid",
            EdgeClass::XX => "dashed",
            EdgeClass::XZ => "dotted",
        }
    }

    fn color(self) -> &'static str {
        match self {
            EdgeClass::ZZ => "black",
            EdgeClass::XX => "red",
            EdgeClass::XZ => "blue",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub qubit: usize,
    pub role: Role,
    pub z: f64,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// For XZ, the qubit carrying X.
    pub a: usize,
    pub b: usize,
    pub class: EdgeClass,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    /// Identity coefficient, not drawn.
    pub offset: f64,
}

fn real(c: num_complex::Complex64, what: &dyn std::fmt::Display) -> Result<f64> {
    if c.im.abs() > 1e-12 * c.re.abs().max(1.0) {
        return Err(Error::NotTwoLocal(format!("complex coefficient on {what}")));
    }
    Ok(c.re)
}

impl InteractionGraph {
    /// Builds the graph of `h`. `roles[q]` defaults to logical when missing.
    pub fn new(h: &PauliSum, roles: &[Role]) -> Result<InteractionGraph> {
        let n = h.n_qubits();
        let mut nodes: Vec<Node> = (0..n)
            .map(|q| Node {
                qubit: q,
                role: roles.get(q).copied().unwrap_or(Role::Logical),
                z: 0.0,
                x: 0.0,
            })
            .collect();
        let mut edges = Vec::new();
        let mut offset = 0.0;
        for (t, c) in h.iter() {
            let w = real(*c, t)?;
            let ls: Vec<(usize, Letter)> = t.letters().collect();
            match ls.as_slice() {
                [] => offset += w,
                [(q, Letter::Z)] => nodes[*q].z += w,
                [(q, Letter::X)] => nodes[*q].x += w,
                [(p, lp), (q, lq)] => {
                    let (a, b, class) = match (lp, lq) {
                        (Letter::Z, Letter::Z) => (*p, *q, EdgeClass::ZZ),
                        (Letter::X, Letter::X) => (*p, *q, EdgeClass::XX),
                        (Letter::X, Letter::Z) => (*p, *q, EdgeClass::XZ),
                        (Letter::Z, Letter::X) => (*q, *p, EdgeClass::XZ),
                        _ => return Err(Error::NotTwoLocal(format!("coupling {t} is not ZZ, XX or XZ"))),
                    };
                    edges.push(Edge { a, b, class, weight: w });
                }
                _ => return Err(Error::NotTwoLocal(format!("term {t} cannot be drawn"))),
            }
        }
        Ok(InteractionGraph { nodes, edges, offset })
    }

    pub fn from_metadata(h: &PauliSum, meta: &GadgetMetadata) -> Result<InteractionGraph> {
        let mut roles = vec![Role::Logical; h.n_qubits()];
        for (ri, r) in meta.rounds.iter().enumerate() {
            for (ti, t) in r.terms.iter().enumerate() {
                for &q in &t.ancillas {
                    if q < roles.len() {
                        roles[q] = Role::Ancilla { round: ri + 1, term: ti };
                    }
                }
            }
        }
        InteractionGraph::new(h, &roles)
    }

    pub fn from_gadget(g: &GadgetHamiltonian) -> Result<InteractionGraph> {
        InteractionGraph::from_metadata(&g.hamiltonian, &g.metadata())
    }

    pub fn count(&self, class: EdgeClass) -> usize {
        self.edges.iter().filter(|e| e.class == class).count()
    }

    /// Triples of ancilla qubits joined pairwise by ZZ edges, ascending.
    pub fn ancilla_triangles(&self) -> Vec<[usize; 3]> {
        let anc = |q: usize| matches!(self.nodes[q].role, Role::Ancilla { .. });
        let zz: BTreeSet<(usize, usize)> = self
            .edges
            .iter()
            .filter(|e| e.class == EdgeClass::ZZ && anc(e.a) && anc(e.b))
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect();
        let mut out = Vec::new();
        for &(a, b) in &zz {
            for &(b2, c) in zz.range((b, 0)..(b + 1, 0)) {
                debug_assert_eq!(b2, b);
                if zz.contains(&(a, c)) {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph interactions {\n  node [shape=circle];\n");
        for n in &self.nodes {
            let (shape, tag) = match n.role {
                Role::Logical => ("circle", String::new()),
                Role::Ancilla { round, term } => ("doublecircle", format!(" r{round}.t{term}")),
            };
            let _ = writeln!(
                s,
                "  q{} [shape={shape}, label=\"{}{tag}\", z=\"{}\", x=\"{}\"];",
                n.qubit,
                n.qubit,
                format_sig(n.z, 12),
                format_sig(n.x, 12)
            );
        }
        for e in &self.edges {
            let label = match e.class {
                EdgeClass::XZ => format!("X{} Z{}: {}", e.a, e.b, format_sig(e.weight, 12)),
                _ => format_sig(e.weight, 12),
            };
            let _ = writeln!(
                s,
                "  q{} -- q{} [style={}, color={}, label=\"{label}\"];",
                e.a,
                e.b,
                e.class.style(),
                e.class.color()
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}
