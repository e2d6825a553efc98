//! End-to-end compilation: parse, encode, gadgetize, draw and optionally
//! verify, writing one artifact set per run.

use std::fs;
use std::path::{Path, PathBuf};

use crate::encoding::{transform, EncodingScheme};
use crate::error::{Error, Result};
use crate::fermion::{build_fermion_hamiltonian, IntegralTable};
use crate::gadget::{gadgetize, nested_deltas, GadgetHamiltonian};
use crate::graph::InteractionGraph;
use crate::pauli::{parse_pauli_text, Digits, PauliSum, DEFAULT_TOLERANCE};
use crate::shaping::InteractionSet;
use crate::spectra::{verify_gadget, SpectrumReport, VerifyOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Integrals,
    Pauli,
}

impl InputFormat {
    /// `.int` files are integral tables, anything else is Pauli text.
    pub fn detect(path: &Path) -> InputFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some("int") => InputFormat::Integrals,
            _ => InputFormat::Pauli,
        }
    }
}

impl std::str::FromStr for InputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "integrals" | "int" => Ok(InputFormat::Integrals),
            "pauli" => Ok(InputFormat::Pauli),
            _ => Err(Error::InvalidParameter(format!("unknown input format `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DeltaSchedule {
    /// One gap per round, in order.
    Fixed(Vec<f64>),
    /// `delta1, delta1^beta, ...` for as many rounds as needed.
    Nested { delta1: f64, beta: f64 },
}

impl Default for DeltaSchedule {
    fn default() -> Self {
        DeltaSchedule::Nested { delta1: 1e3, beta: 1.5 }
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub encoding: EncodingScheme,
    pub allowed: InteractionSet,
    pub deltas: DeltaSchedule,
    pub max_rounds: usize,
    pub target_k: usize,
    pub eps: f64,
    pub verify: bool,
    /// Eigenvalues compared; `None` compares the full target spectrum.
    pub count: Option<usize>,
    pub drop_tol: f64,
    pub digits: Digits,
    pub solver: VerifyOptions,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> PipelineConfig {
        let input = input.into();
        PipelineConfig {
            format: InputFormat::detect(&input),
            input,
            encoding: EncodingScheme::BravyiKitaev,
            allowed: InteractionSet::default(),
            deltas: DeltaSchedule::default(),
            max_rounds: 8,
            target_k: 3,
            eps: 0.01,
            verify: false,
            count: None,
            drop_tol: DEFAULT_TOLERANCE,
            digits: Digits::default(),
            solver: VerifyOptions::default(),
            out_dir: out_dir.into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match &self.deltas {
            DeltaSchedule::Fixed(d) if d.iter().any(|&x| !(x > 0.0 && x.is_finite())) => {
                return bad(format!("gaps must be positive, got {d:?}"))
            }
            DeltaSchedule::Nested { delta1, beta } if !(*delta1 > 0.0 && *beta > 0.0) => {
                return bad(format!("bad nested schedule delta1={delta1} beta={beta}"))
            }
            _ => {}
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.drop_tol >= 0.0) {
            return bad(format!("drop tolerance must be nonnegative, got {}", self.drop_tol));
        }
        Ok(())
    }

    pub fn delta_list(&self) -> Vec<f64> {
        match &self.deltas {
            DeltaSchedule::Fixed(d) => d.clone(),
            DeltaSchedule::Nested { delta1, beta } => nested_deltas(*delta1, *beta, self.max_rounds),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Artifacts {
    pub target: PauliSum,
    pub gadget: GadgetHamiltonian,
    pub graph: InteractionGraph,
    pub report: Option<SpectrumReport>,
    /// Files written, in order.
    pub files: Vec<PathBuf>,
}

impl Artifacts {
    /// False only when verification ran and missed `eps`.
    pub fn passed(&self) -> bool {
        self.report.as_ref().is_none_or(|r| r.passed)
    }
}

pub const TARGET_FILE: &str = "target.pauli";
pub const HAMILTONIAN_FILE: &str = "compiled.pauli";
pub const METADATA_FILE: &str = "compiled.meta";
pub const DOT_FILE: &str = "graph.dot";
pub const JSON_FILE: &str = "graph.json";
pub const REPORT_FILE: &str = "report.txt";
pub const REPORT_KV_FILE: &str = "report.kv";

/// Reads the input as a qubit Hamiltonian, encoding integral tables first.
pub fn load_target(path: &Path, format: InputFormat, encoding: EncodingScheme, drop_tol: f64) -> Result<PauliSum> {
    let src = fs::read_to_string(path).map_err(|e| Error::from(e).at("parse"))?;
    match format {
        InputFormat::Pauli => parse_pauli_text(&src).map_err(|e| e.at("parse")),
        InputFormat::Integrals => {
            let table = IntegralTable::parse(&src).map_err(|e| e.at("parse"))?;
            let fh = build_fermion_hamiltonian(&table).map_err(|e| e.at("transform"))?;
            Ok(transform(&fh, encoding).map_err(|e| e.at("transform"))?.simplify(drop_tol))
        }
    }
}

pub fn compile(cfg: &PipelineConfig) -> Result<Artifacts> {
    cfg.validate().map_err(|e| e.at("config"))?;
    let target = load_target(&cfg.input, cfg.format, cfg.encoding, cfg.drop_tol)?;
    let gadget = gadgetize(&target, &cfg.delta_list(), &cfg.allowed, cfg.target_k).map_err(|e| e.at("gadgetize"))?;
    let graph = InteractionGraph::from_gadget(&gadget).map_err(|e| e.at("graph"))?;
    let report = if cfg.verify {
        Some(verify_gadget(&target, &gadget, cfg.eps, cfg.count, &cfg.solver).map_err(|e| e.at("verify"))?)
    } else {
        None
    };

    let mut out = vec![
        (TARGET_FILE, target.to_text(cfg.digits)),
        (HAMILTONIAN_FILE, gadget.hamiltonian.to_text(cfg.digits)),
        (METADATA_FILE, gadget.metadata().to_text()),
        (DOT_FILE, graph.to_dot()),
        (JSON_FILE, graph.to_json().map_err(|e| e.at("graph"))?),
    ];
    if let Some(r) = &report {
        out.push((REPORT_FILE, r.to_text()));
        out.push((REPORT_KV_FILE, r.to_key_value()));
    }
    let files = write_all(&cfg.out_dir, &out).map_err(|e| e.at("write"))?;
    Ok(Artifacts { target, gadget, graph, report, files })
}

/// Writes every file or none: on failure the files already written are removed.
pub fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>> {
    let created_dir = !dir.exists();
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
            return Err(e.into());
        }
        written.push(path);
    }
    Ok(written)
}
