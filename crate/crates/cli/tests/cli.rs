use std::path::PathBuf;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

use spincircuit::bqp::exchange_gate;
use spincircuit::circuit::{Circuit, Gate};
use spincircuit::io::{CircuitDocument, ModelDocument};
use spincircuit::lattice::{Lattice, LatticeKind};
use spincircuit::matrix::{Matrix, C64};
use spincircuit::spin_models::{BoundaryConfig, SpinModel, VertexModel, WeightTensor};

const ONES_CHAIN: &str = r#"{"type":"edge","q":2,"lattice":{"kind":"rectangular","wires":1,"layers":3},
  "weights":{"uniform":[[1,1],[1,1]]},"boundary":{"left":[0],"right":[0]}}"#;

struct Workdir(TempDir);

impl Workdir {
    fn new() -> Self {
        Workdir(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spincircuit")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad stdout ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

fn value(v: &Value) -> C64 {
    C64::new(v["value"][0].as_f64().unwrap(), v["value"][1].as_f64().unwrap())
}

fn random_vertex_model(rng: &mut ChaCha8Rng) -> String {
    let lattice = Lattice::new(LatticeKind::TiltedSquare, 3, 3).unwrap();
    let weights = lattice
        .sites()
        .iter()
        .map(|_| {
            let rows = (0..4).map(|_| (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()).collect();
            WeightTensor::new(2, 2, Matrix::from_rows(rows).unwrap()).unwrap()
        })
        .collect();
    let model: SpinModel = VertexModel::new(lattice, 2, weights).unwrap().into();
    let (l, r) = (BoundaryConfig::new(vec![1, 0, 1]), BoundaryConfig::new(vec![0, 1, 1]));
    serde_json::to_string(&ModelDocument::from_model(&model, Some((&l, &r)))).unwrap()
}

fn exchange_circuit() -> String {
    let mut c = Circuit::new(3, 2);
    c.push(Gate::new(vec![1, 2], 2, exchange_gate(0.3)).unwrap()).unwrap();
    c.push(Gate::new(vec![2, 3], 2, exchange_gate(-0.7)).unwrap()).unwrap();
    serde_json::to_string(&CircuitDocument::from_circuit(&c)).unwrap()
}

#[test]
fn brute_force_on_ones_chain() {
    let dir = Workdir::new();
    let m = dir.file("chain.json", ONES_CHAIN);
    let out = run(&["evaluate", "--method", "brute", "--model", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["value"], serde_json::json!([2.0, 0.0]));
    assert_eq!(v["method"], "brute");
    assert_eq!((v["wires"].as_u64(), v["layers"].as_u64()), (Some(1), Some(3)));
    assert!(v["runtime_ms"].is_number());
}

#[test]
fn crosscheck_random_vertex_models() {
    let dir = Workdir::new();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..3 {
        let m = dir.file(&format!("m{i}.json"), &random_vertex_model(&mut rng));
        let out = run(&["crosscheck", "--methods", "brute,dense", "--tol", "1e-9", "--model", m.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn crosscheck_mismatch_exits_one() {
    let dir = Workdir::new();
    let c = dir.file("c.json", &exchange_circuit());
    let out = run(&["crosscheck", "--methods", "dense,hadamard", "--eps", "0.5", "--circuit", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn matchgate_on_exchange_circuit_is_inapplicable() {
    let dir = Workdir::new();
    let c = dir.file("c.json", &exchange_circuit());
    let out = run(&["evaluate", "--method", "matchgate", "--circuit", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("matchgate"));
    assert!(out.stdout.is_empty());
}

#[test]
fn invalid_input_exits_two() {
    let dir = Workdir::new();
    let bad = dir.file("bad.json", "{\"type\":\"edge\"");
    assert_eq!(run(&["evaluate", "--method", "dense", "--model", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(run(&["evaluate", "--method", "dense", "--model", "/nonexistent.json"]).status.code(), Some(2));
    let m = dir.file("chain.json", ONES_CHAIN);
    let out = run(&["evaluate", "--method", "dense", "--left", "3", "--model", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn caps_exit_four() {
    let dir = Workdir::new();
    let m = dir.file("m.json", &random_vertex_model(&mut ChaCha8Rng::seed_from_u64(2)));
    let out = run(&["--max-brute-spins", "2", "evaluate", "--method", "brute", "--model", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let out = run(&["evaluate", "--max-dense-qubits", "2", "--method", "dense", "--model", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn hadamard_is_seed_deterministic() {
    let dir = Workdir::new();
    let c = dir.file("c.json", &exchange_circuit());
    let args = ["evaluate", "--method", "hadamard", "--seed", "7", "--left", "0,1,0", "--right", "1,0,0", "--circuit", c.to_str().unwrap()];
    let (a, b) = (json(&run(&args)), json(&run(&args)));
    assert_eq!(a["value"].to_string(), b["value"].to_string());
    assert_eq!((a["seed"].as_u64(), a["samples"].as_u64()), (Some(7), Some(1753)));
    let exact = json(&run(&["evaluate", "--method", "dense", "--left", "0,1,0", "--right", "1,0,0", "--circuit", c.to_str().unwrap()]));
    assert!((value(&a) - value(&exact)).norm() < 0.1);
}

#[test]
fn compile_decompile_round_trip() {
    let dir = Workdir::new();
    let m = dir.file("m.json", &random_vertex_model(&mut ChaCha8Rng::seed_from_u64(3)));
    let out = run(&["compile", "--model", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let c = dir.file("c.json", &String::from_utf8(out.stdout).unwrap());
    let out = run(&["decompile", "--circuit", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let back = dir.file("back.json", &String::from_utf8(out.stdout).unwrap());
    let eval = |path: &PathBuf| {
        let out = run(&["evaluate", "--method", "dense", "--left", "1,0,1", "--right", "0,1,1", "--model", path.to_str().unwrap()]);
        value(&json(&out))
    };
    assert!((eval(&m) - eval(&back)).norm() < 1e-12);
}

#[test]
fn check_flags() {
    let dir = Workdir::new();
    let c = dir.file("c.json", &exchange_circuit());
    let out = json(&run(&["check", "--unitary", "--circuit", c.to_str().unwrap()]));
    assert_eq!(out["holds"], true);
    let out = json(&run(&["check", "--free-fermion", "--circuit", c.to_str().unwrap()]));
    assert_eq!(out["holds"], false);
    assert_eq!(out["failing"], serde_json::json!([0, 1]));
}

#[test]
fn reductions() {
    let dir = Workdir::new();
    let spec = dir.file("spec.json", r#"{"logical_qubits":1,"pulses":[{"wire":2,"t":0.4},{"wire":1,"t":-1.0}]}"#);
    let out = run(&["reduce", "six-vertex", "--spec", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["report"]["passed"], true);
    assert_eq!(v["model"]["type"], "vertex");
    assert_eq!(v["model"]["boundary"]["left"], serde_json::json!([0, 1, 0, 1]));

    let h = std::f64::consts::FRAC_1_SQRT_2;
    let circuit = format!(r#"{{"wires":2,"q":2,"gates":[{{"wires":[1],"matrix":[[{h},{h}],[{h},{}]]}},{{"wires":[1,2],"matrix":[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,-1]]}}]}}"#, -h);
    let c = dir.file("c.json", &circuit);
    let v = json(&run(&["reduce", "edge", "--circuit", c.to_str().unwrap()]));
    assert_eq!(v["report"]["passed"], true);
    assert_eq!(v["model"]["type"], "edge");

    let x = dir.file("x.json", &exchange_circuit());
    assert_eq!(run(&["reduce", "edge", "--circuit", x.to_str().unwrap()]).status.code(), Some(3));
}
