use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{debug, warn};
use serde_json::{json, Value};

use spincircuit::bqp::{em_instance, six_vertex_instance, verify_reduction, ExchangeCircuitSpec, Reference};
use spincircuit::circuit::{amplitude_dense, is_unitary, Circuit, DEFAULT_MAX_DENSE_QUBITS};
use spincircuit::compiler::{circuit_to_edge_model, circuit_to_vertex_model, compile};
use spincircuit::error::ErrorCategory;
use spincircuit::fermion::matchgate::MATCHGATE_TOL;
use spincircuit::fermion::{amplitude_matchgate, is_matchgate, partition_planar_ising_with, simulate_xz_circuit, PlanarOptions};
use spincircuit::hadamard::{estimate_amplitude, estimate_amplitude_exact, UNITARITY_TOL};
use spincircuit::io::{parse_circuit, parse_model, CircuitDocument, JsonComplex, ModelDocument};
use spincircuit::matrix::{relative_error, C64};
use spincircuit::spin_models::{brute_force_partition, free_fermion_condition, BoundaryConfig, SpinModel, DEFAULT_MAX_BRUTE_SPINS};
use spincircuit::{Error, Result};

const EXIT_MISMATCH: u8 = 1;

#[derive(Parser)]
#[command(name = "spincircuit", version, about = "Spin-model partition functions as circuit amplitudes")]
struct Cli {
    /// Largest state vector for dense simulation, in qubit equivalents.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_DENSE_QUBITS)]
    max_dense_qubits: usize,
    /// Largest exhaustive sum, in free spins (qubit equivalents).
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_BRUTE_SPINS)]
    max_brute_spins: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a model document into a circuit document.
    Compile {
        #[arg(long)]
        model: PathBuf,
    },
    /// Read a circuit back as a vertex or edge model.
    Decompile {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum, default_value_t = Target::Vertex)]
        target: Target,
        /// Minimum number of layers (vertex) or columns (edge).
        #[arg(long, default_value_t = 1)]
        min_layers: usize,
    },
    /// Evaluate a partition function or amplitude with one method.
    Evaluate {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Test gates or site tensors for a structural property.
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, conflicts_with = "unitary", required_unless_present = "unitary")]
        free_fermion: bool,
        #[arg(long)]
        unitary: bool,
    },
    /// Build a hard instance and verify it when within caps.
    Reduce {
        #[command(subcommand)]
        kind: ReduceKind,
    },
    /// Evaluate with several methods and compare the values.
    Crosscheck {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', required = true)]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        sampling: Sampling,
    },
}

#[derive(Subcommand)]
enum ReduceKind {
    SixVertex {
        #[arg(long)]
        spec: PathBuf,
    },
    Edge {
        #[arg(long)]
        circuit: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Vertex,
    Edge,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Method {
    Brute,
    Dense,
    Matchgate,
    Pfaffian,
    Hadamard,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Brute => "brute",
            Method::Dense => "dense",
            Method::Matchgate => "matchgate",
            Method::Pfaffian => "pfaffian",
            Method::Hadamard => "hadamard",
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    circuit: Option<PathBuf>,
}

#[derive(Args)]
struct Input {
    #[command(flatten)]
    source: Source,
    /// Left boundary as comma-separated spins; overrides the document.
    #[arg(long, value_delimiter = ',')]
    left: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    right: Option<Vec<usize>>,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report the infinite-sample limit instead of sampling.
    #[arg(long)]
    exact: bool,
    /// Fail on the singular planar point instead of perturbing it.
    #[arg(long)]
    strict_singular: bool,
}

struct Caps {
    dense: usize,
    brute: usize,
}

enum Loaded {
    Model(SpinModel),
    Circuit(Circuit),
}

struct Problem {
    loaded: Loaded,
    left: BoundaryConfig,
    right: BoundaryConfig,
}

impl Problem {
    fn wires(&self) -> usize {
        match &self.loaded {
            Loaded::Model(m) => m.lattice().wires(),
            Loaded::Circuit(c) => c.wires(),
        }
    }

    fn layers(&self) -> usize {
        match &self.loaded {
            Loaded::Model(m) => m.lattice().layers(),
            Loaded::Circuit(c) => c.depth(),
        }
    }

    fn circuit(&self) -> Result<Circuit> {
        match &self.loaded {
            Loaded::Model(m) => compile(m),
            Loaded::Circuit(c) => Ok(c.clone()),
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load(input: &Input) -> Result<Problem> {
    let (loaded, doc_boundary) = match (&input.source.model, &input.source.circuit) {
        (Some(p), _) => {
            let doc = parse_model(&read(p)?)?;
            (Loaded::Model(doc.to_model()?), doc.boundary())
        }
        (None, Some(p)) => (Loaded::Circuit(parse_circuit(&read(p)?)?.to_circuit()?), None),
        (None, None) => return Err(Error::InvalidInput("pass --model or --circuit".into())),
    };
    let n = match &loaded {
        Loaded::Model(m) => m.lattice().wires(),
        Loaded::Circuit(c) => c.wires(),
    };
    let (doc_left, doc_right) = doc_boundary.unwrap_or_else(|| (BoundaryConfig::zeros(n), BoundaryConfig::zeros(n)));
    let left = input.left.clone().map(BoundaryConfig::new).unwrap_or(doc_left);
    let right = input.right.clone().map(BoundaryConfig::new).unwrap_or(doc_right);
    Ok(Problem { loaded, left, right })
}

fn complex(c: C64) -> Value {
    serde_json::to_value(JsonComplex(c)).expect("finite floats serialize")
}

/// Value of `problem` under `method`, plus method-specific fields.
fn evaluate(problem: &Problem, method: Method, sampling: &Sampling, caps: &Caps) -> Result<(C64, Value)> {
    let (l, r) = (&problem.left, &problem.right);
    let mut extra = json!({});
    let value = match method {
        Method::Brute => match &problem.loaded {
            Loaded::Model(m) => brute_force_partition(m, l, r, caps.brute)?,
            Loaded::Circuit(c) => brute_force_partition(&circuit_to_vertex_model(c, 1)?.into(), l, r, caps.brute)?,
        },
        Method::Dense => amplitude_dense(&problem.circuit()?, l, r, caps.dense)?,
        Method::Matchgate => amplitude_matchgate(&problem.circuit()?, l, r)?,
        Method::Pfaffian => match &problem.loaded {
            Loaded::Model(SpinModel::Edge(em)) => {
                let opts = PlanarOptions { perturb_singular: !sampling.strict_singular };
                partition_planar_ising_with(em, l, r, &opts)?
            }
            Loaded::Model(SpinModel::Vertex(_)) => {
                return Err(Error::NotIsingForm("vertex models have no planar Ising form".into()))
            }
            Loaded::Circuit(c) => simulate_xz_circuit(c, l, r)?,
        },
        Method::Hadamard => {
            let c = problem.circuit()?;
            if sampling.exact {
                extra = json!({ "exact": true });
                estimate_amplitude_exact(&c, l, r)?
            } else {
                let est = estimate_amplitude(&c, l, r, sampling.eps, sampling.delta, sampling.seed)?;
                extra = json!({ "eps": est.eps, "delta": est.delta, "samples": est.samples, "seed": est.seed });
                est.value
            }
        }
    };
    Ok((value, extra))
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn run(cli: Cli) -> Result<(Value, u8)> {
    let caps = Caps { dense: cli.max_dense_qubits, brute: cli.max_brute_spins };
    match cli.command {
        Command::Compile { model } => {
            let doc = parse_model(&read(&model)?)?;
            let circuit = compile(&doc.to_model()?)?;
            Ok((serde_json::to_value(CircuitDocument::from_circuit(&circuit)).expect("serializable"), 0))
        }
        Command::Decompile { circuit, target, min_layers } => {
            let c = parse_circuit(&read(&circuit)?)?.to_circuit()?;
            let model: SpinModel = match target {
                Target::Vertex => circuit_to_vertex_model(&c, min_layers)?.into(),
                Target::Edge => circuit_to_edge_model(&c, min_layers)?.into(),
            };
            Ok((serde_json::to_value(ModelDocument::from_model(&model, None)).expect("serializable"), 0))
        }
        Command::Evaluate { input, method, sampling } => {
            let problem = load(&input)?;
            let start = Instant::now();
            let (value, extra) = evaluate(&problem, method, &sampling, &caps)?;
            let out = json!({
                "value": complex(value),
                "method": method.name(),
                "wires": problem.wires(),
                "layers": problem.layers(),
                "runtime_ms": start.elapsed().as_secs_f64() * 1e3,
            });
            Ok((merge(out, extra), 0))
        }
        Command::Check { input, free_fermion, unitary } => {
            let problem = load(&input)?;
            let failing: Vec<usize> = if free_fermion {
                match &problem.loaded {
                    Loaded::Model(SpinModel::Vertex(vm)) => {
                        let mut bad = Vec::new();
                        for (i, t) in vm.site_weights().iter().enumerate() {
                            if !free_fermion_condition(t, MATCHGATE_TOL)? {
                                bad.push(i);
                            }
                        }
                        bad
                    }
                    _ => {
                        let c = problem.circuit()?;
                        (0..c.len()).filter(|&i| !is_matchgate(&c.gates()[i], MATCHGATE_TOL)).collect()
                    }
                }
            } else {
                debug_assert!(unitary);
                let c = problem.circuit()?;
                (0..c.len()).filter(|&i| !is_unitary(&c.gates()[i], UNITARITY_TOL)).collect()
            };
            let property = if free_fermion { "free_fermion" } else { "unitary" };
            let items = match &problem.loaded {
                Loaded::Model(SpinModel::Vertex(_)) if free_fermion => "sites",
                _ => "gates",
            };
            Ok((json!({ "property": property, "holds": failing.is_empty(), "failing": failing, "items": items }), 0))
        }
        Command::Reduce { kind } => {
            let (instance, report) = match kind {
                ReduceKind::SixVertex { spec } => {
                    let spec: ExchangeCircuitSpec = serde_json::from_str(&read(&spec)?)
                        .map_err(|e| Error::InvalidInput(format!("malformed spec: {e}")))?;
                    spec.validate()?;
                    let inst = six_vertex_instance(&spec)?;
                    let report = verify_reduction(&inst, Reference::LogicalZero(&spec), 1e-9);
                    (inst, report)
                }
                ReduceKind::Edge { circuit } => {
                    let c = parse_circuit(&read(&circuit)?)?.to_circuit()?;
                    let inst = em_instance(&c)?;
                    let report = verify_reduction(&inst, Reference::Circuit(&c), 1e-9);
                    (inst, report)
                }
            };
            let report = match report {
                Ok(r) => serde_json::to_value(r).expect("serializable"),
                Err(e @ Error::TooLarge(_)) => {
                    warn!("verification skipped: {e}");
                    Value::Null
                }
                Err(e) => return Err(e),
            };
            let model = ModelDocument::from_model(&instance.model, Some((&instance.left, &instance.right)));
            Ok((json!({ "model": model, "report": report }), 0))
        }
        Command::Crosscheck { input, methods, tol, sampling } => {
            let problem = load(&input)?;
            let mut values = serde_json::Map::new();
            let mut results = Vec::new();
            for &m in &methods {
                let (v, _) = evaluate(&problem, m, &sampling, &caps)?;
                debug!("{} = {v}", m.name());
                values.insert(m.name().to_string(), complex(v));
                results.push(v);
            }
            let mut worst = 0.0f64;
            for (i, &a) in results.iter().enumerate() {
                for &b in &results[i + 1..] {
                    worst = worst.max(relative_error(a, b));
                }
            }
            let passed = worst <= tol;
            let out = json!({
                "values": values,
                "max_rel_error": worst,
                "tol": tol,
                "passed": passed,
                "wires": problem.wires(),
                "layers": problem.layers(),
            });
            Ok((out, if passed { 0 } else { EXIT_MISMATCH }))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        ErrorCategory::InvalidInput => 2,
        ErrorCategory::MethodInapplicable => 3,
        ErrorCategory::ResourceCap => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok((out, code)) => {
            let text = serde_json::to_string_pretty(&out).expect("serializable");
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    eprintln!("error: cannot write output: {e}");
                    ExitCode::from(2)
                }
                _ => ExitCode::from(code),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
