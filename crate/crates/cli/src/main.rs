use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chemgadget::encoding::EncodingScheme;
use chemgadget::gadget::{gadgetize, CouplingSplit, GadgetMetadata};
use chemgadget::graph::InteractionGraph;
use chemgadget::pauli::text::format_sig;
use chemgadget::pauli::{parse_pauli_text, Digits, DEFAULT_TOLERANCE};
use chemgadget::pipeline::{self, DeltaSchedule, InputFormat, PipelineConfig};
use chemgadget::shaping::{shape, InteractionSet};
use chemgadget::spectra::{delta_sweep, lowest, verify_with_metadata, LanczosOptions, SweepSpec, VerifyOptions};
use chemgadget::{Error, PauliSum, Result};

#[derive(Parser)]
#[command(name = "chemgadget", version, about = "Compile molecular Hamiltonians to 2-local ZZ/XX/XZ form")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integral table to qubit Hamiltonian.
    Transform {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "bk")]
        encoding: EncodingScheme,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        drop_tol: f64,
        #[command(flatten)]
        fmt: FormatArgs,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split off realizable terms and factor the rest.
    Shape {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        shaping: ShapingArgs,
    },
    /// Gadgetize a qubit Hamiltonian round by round.
    Gadgetize {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        shaping: ShapingArgs,
        #[command(flatten)]
        gaps: GapArgs,
        #[command(flatten)]
        fmt: FormatArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Spectrum of a Hamiltonian, or a compiled Hamiltonian checked against its target.
    Verify {
        #[arg(long)]
        input: PathBuf,
        /// Target Hamiltonian; requires --meta.
        #[arg(long, requires = "meta")]
        target: Option<PathBuf>,
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long)]
        count: Option<usize>,
        /// Write the eigenvalues, one per line.
        #[arg(long)]
        golden_out: Option<PathBuf>,
        /// Directory for report.txt and report.kv.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Smallest gap reaching eps for alpha times a single Pauli string.
    Sweep {
        #[arg(long, default_value = "X1 Y2 Z3")]
        term: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,5,10")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.01")]
        eps: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Split::Balanced)]
        split: Split,
        #[arg(long, default_value_t = 1.0)]
        lo: f64,
        #[arg(long, default_value_t = 1e12)]
        hi: f64,
        #[arg(long, default_value_t = 1e-3)]
        rel_tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Interaction graph of a compiled Hamiltonian.
    Graph {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        meta: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = GraphFormat::Dot)]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every stage, writing the full artifact set.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
        /// integrals or pauli; detected from the extension by default.
        #[arg(long)]
        format: Option<InputFormat>,
        #[arg(long, default_value = "bk")]
        encoding: EncodingScheme,
        #[command(flatten)]
        shaping: ShapingArgs,
        #[command(flatten)]
        gaps: GapArgs,
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        drop_tol: f64,
        #[command(flatten)]
        fmt: FormatArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ShapingArgs {
    #[arg(long, default_value = "zz,xx,xz")]
    allowed: InteractionSet,
    /// Factors per group.
    #[arg(long, default_value_t = 3)]
    k: usize,
}

#[derive(Args)]
struct GapArgs {
    /// Gap per round, comma separated. Overrides --delta1/--beta.
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long, default_value_t = 1e3)]
    delta1: f64,
    #[arg(long, default_value_t = 1.5)]
    beta: f64,
    #[arg(long, default_value_t = 8)]
    max_rounds: usize,
}

impl GapArgs {
    fn schedule(&self) -> DeltaSchedule {
        if self.delta.is_empty() {
            DeltaSchedule::Nested { delta1: self.delta1, beta: self.beta }
        } else {
            DeltaSchedule::Fixed(self.delta.clone())
        }
    }
}

#[derive(Args)]
struct FormatArgs {
    /// Print coefficients so they parse back exactly instead of 12 digits.
    #[arg(long)]
    round_trip: bool,
}

impl FormatArgs {
    fn digits(&self) -> Digits {
        if self.round_trip {
            Digits::RoundTrip
        } else {
            Digits::default()
        }
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, env = "CHEMGADGET_MAX_DENSE_QUBITS", default_value_t = 14)]
    max_dense_qubits: usize,
    #[arg(long, env = "CHEMGADGET_LANCZOS_ITERS", default_value_t = 20_000)]
    lanczos_iters: usize,
    #[arg(long, env = "CHEMGADGET_SEED", default_value_t = 7)]
    seed: u64,
}

impl SolverArgs {
    fn options(&self) -> VerifyOptions {
        VerifyOptions {
            dense_limit: self.max_dense_qubits,
            lanczos: LanczosOptions {
                max_iters: self.lanczos_iters,
                seed: self.seed,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    First,
    Balanced,
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

fn read_pauli(p: &Path) -> Result<PauliSum> {
    parse_pauli_text(&fs::read_to_string(p)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| format_sig(*x, 12)).collect::<Vec<_>>().join(" ")
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Transform { input, encoding, drop_tol, fmt, out } => {
            let h = pipeline::load_target(&input, InputFormat::Integrals, encoding, drop_tol)?;
            emit(out.as_deref(), &h.to_text(fmt.digits()))?;
        }
        Cmd::Shape { input, shaping } => {
            let h = read_pauli(&input)?;
            let s = shape(&h, &shaping.allowed, shaping.k)?;
            let mut text = format!("# realizable ({} terms)\n", s.realizable.len());
            text.push_str(&s.realizable.to_text(Digits::default()));
            for (i, f) in s.factored.iter().enumerate() {
                text.push_str(&format!("# group {i}: k = {}\n", f.k()));
                for (j, factor) in f.factors.iter().enumerate() {
                    let terms: Vec<String> = factor
                        .iter()
                        .map(|(t, c)| format!("{} {t}", format_sig(c.re, 12)))
                        .collect();
                    text.push_str(&format!("factor {j}: {}\n", terms.join(" + ")));
                }
            }
            print!("{text}");
        }
        Cmd::Gadgetize { input, shaping, gaps, fmt, out } => {
            let h = read_pauli(&input)?;
            let cfg = PipelineConfig {
                deltas: gaps.schedule(),
                max_rounds: gaps.max_rounds,
                ..PipelineConfig::new(&input, &out)
            };
            cfg.validate()?;
            let g = gadgetize(&h, &cfg.delta_list(), &shaping.allowed, shaping.k)?;
            pipeline::write_all(
                &out,
                &[
                    (pipeline::HAMILTONIAN_FILE, g.hamiltonian.to_text(fmt.digits())),
                    (pipeline::METADATA_FILE, g.metadata().to_text()),
                ],
            )?;
            for w in &g.warnings {
                eprintln!("warning: {w}");
            }
            println!("{} rounds, {} qubits", g.rounds.len(), g.n_qubits());
        }
        Cmd::Verify { input, target, meta, eps, count, golden_out, out, solver } => {
            let h = read_pauli(&input)?;
            let opts = solver.options();
            let Some(target) = target else {
                let n = 1usize.checked_shl(h.n_qubits() as u32).unwrap_or(usize::MAX);
                let e = lowest(&h, count.unwrap_or(n).min(n), opts.dense_limit, &opts.lanczos)?;
                let text: String = e.iter().map(|v| format_sig(*v, 12) + "\n").collect();
                emit(golden_out.as_deref(), &text)?;
                return Ok(true);
            };
            let t = read_pauli(&target)?;
            let m = GadgetMetadata::parse(&fs::read_to_string(meta.expect("clap requires --meta"))?)?;
            let r = verify_with_metadata(&t, &h, &m, eps, count, &opts)?;
            if let Some(g) = golden_out {
                fs::write(g, r.eigenvalues.iter().map(|v| format_sig(*v, 12) + "\n").collect::<String>())?;
            }
            if let Some(dir) = out {
                pipeline::write_all(
                    &dir,
                    &[(pipeline::REPORT_FILE, r.to_text()), (pipeline::REPORT_KV_FILE, r.to_key_value())],
                )?;
            }
            print!("{}", r.to_text());
            return Ok(r.passed);
        }
        Cmd::Sweep { term, alpha, eps, split, lo, hi, rel_tol, solver } => {
            let unit = parse_pauli_text(&format!("1 {term}\n"))?;
            if unit.len() != 1 {
                return Err(Error::InvalidParameter(format!("`{term}` is not a single Pauli string")));
            }
            let spec = SweepSpec {
                lo,
                hi,
                rel_tol,
                split: match split {
                    Split::First => CouplingSplit::FirstFactor,
                    Split::Balanced => CouplingSplit::Balanced,
                },
                ..Default::default()
            };
            println!("alpha eps delta_min eps_obs");
            for p in delta_sweep(&unit, &alpha, &eps, &spec, &solver.options())? {
                println!("{}", list(&[p.alpha, p.eps, p.delta_min, p.eps_obs]));
            }
        }
        Cmd::Graph { input, meta, format, out } => {
            let h = read_pauli(&input)?;
            let g = match meta {
                Some(m) => InteractionGraph::from_metadata(&h, &GadgetMetadata::parse(&fs::read_to_string(m)?)?)?,
                None => InteractionGraph::new(&h, &[])?,
            };
            let text = match format {
                GraphFormat::Dot => g.to_dot(),
                GraphFormat::Json => g.to_json()?,
            };
            emit(out.as_deref(), &text)?;
        }
        Cmd::Pipeline {
            input,
            format,
            encoding,
            shaping,
            gaps,
            verify,
            eps,
            count,
            drop_tol,
            fmt,
            solver,
            out,
        } => {
            let mut cfg = PipelineConfig::new(&input, &out);
            if let Some(f) = format {
                cfg.format = f;
            }
            cfg.encoding = encoding;
            cfg.allowed = shaping.allowed;
            cfg.target_k = shaping.k;
            cfg.deltas = gaps.schedule();
            cfg.max_rounds = gaps.max_rounds;
            cfg.verify = verify;
            cfg.eps = eps;
            cfg.count = count;
            cfg.drop_tol = drop_tol;
            cfg.digits = fmt.digits();
            cfg.solver = solver.options();
            let a = pipeline::compile(&cfg)?;
            for w in &a.gadget.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{} logical + {} ancilla qubits, {} rounds, deltas {}",
                a.gadget.logical_qubits,
                a.gadget.n_qubits() - a.gadget.logical_qubits,
                a.gadget.rounds.len(),
                list(&a.gadget.rounds.iter().map(|r| r.delta).collect::<Vec<_>>())
            );
            if let Some(r) = &a.report {
                print!("{}", r.to_text());
            }
            return Ok(a.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
