//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use spincircuit::bqp::{EdgeGateKind, ExchangeCircuitSpec, ExchangePulse};
use spincircuit::circuit::{Circuit, Gate};
use spincircuit::lattice::{Lattice, LatticeKind};
use spincircuit::matrix::{Matrix, C64, I};
use spincircuit::spin_models::{
    eight_vertex_tensor, ising_table, six_vertex_tensor, BoundaryConfig, EdgeModel, EdgeWeightTable, VertexModel,
    WeightTensor,
};

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn random_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
    Matrix::from_rows((0..n).map(|_| (0..n).map(|_| random_c(rng)).collect()).collect()).unwrap()
}

pub fn random_boundary(rng: &mut ChaCha8Rng, n: usize, q: usize) -> BoundaryConfig {
    BoundaryConfig::new((0..n).map(|_| rng.gen_range(0..q)).collect())
}

pub fn random_vertex_model(rng: &mut ChaCha8Rng, kind: LatticeKind, q: usize, wires: usize, layers: usize) -> VertexModel {
    let lattice = Lattice::new(kind, wires, layers).unwrap();
    let weights = lattice
        .sites()
        .iter()
        .map(|s| {
            let k = s.wires.len();
            WeightTensor::new(q, k, random_matrix(rng, q.pow(k as u32))).unwrap()
        })
        .collect();
    VertexModel::new(lattice, q, weights).unwrap()
}

pub fn random_edge_model(rng: &mut ChaCha8Rng, q: usize, rows: usize, columns: usize) -> EdgeModel {
    let lattice = Lattice::new(LatticeKind::Rectangular, rows, columns).unwrap();
    let tables = (0..lattice.site_count()).map(|_| EdgeWeightTable::new(q, random_matrix(rng, q)).unwrap()).collect();
    EdgeModel::new(lattice, q, tables).unwrap()
}

/// Zero-field Ising model with random per-edge couplings.
pub fn random_ising(rng: &mut ChaCha8Rng, rows: usize, columns: usize, complex: bool) -> EdgeModel {
    let lattice = Lattice::new(LatticeKind::Rectangular, rows, columns).unwrap();
    let tables = (0..lattice.site_count())
        .map(|_| ising_table(if complex { random_c(rng) } else { c(rng.gen_range(-1.0..1.0)) }))
        .collect();
    EdgeModel::new(lattice, 2, tables).unwrap()
}

/// Haar-ish element of U(2): `e^{iφ} [[a, -b̄], [b, ā]]`.
pub fn random_unitary2(rng: &mut ChaCha8Rng) -> [C64; 4] {
    let (a, b) = (random_c(rng), random_c(rng));
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let (a, b) = (a / norm, b / norm);
    let phase = C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU));
    [phase * a, -phase * b.conj(), phase * b, phase * a.conj()]
}

/// Random invertible matchgate; unitary blocks when `unitary` is set.
pub fn random_matchgate(rng: &mut ChaCha8Rng, unitary: bool) -> Matrix {
    let (a, mut b) = if unitary {
        (random_unitary2(rng), random_unitary2(rng))
    } else {
        (std::array::from_fn(|_| random_c(rng)), std::array::from_fn(|_| random_c(rng)))
    };
    let da = a[0] * a[3] - a[1] * a[2];
    let db = b[0] * b[3] - b[1] * b[2];
    let s = (da / db).sqrt();
    b.iter_mut().for_each(|x| *x *= s);
    eight_vertex_tensor(&[a[0], a[1], b[0], b[1], b[2], b[3], a[2], a[3]]).into_matrix()
}

/// Brickwork of random matchgates, `depth` layers deep.
pub fn random_matchgate_circuit(rng: &mut ChaCha8Rng, wires: usize, depth: usize, unitary_fraction: f64) -> Circuit {
    let mut circuit = Circuit::new(wires, 2);
    for layer in 0..depth {
        let mut w = 1 + layer % 2;
        while w < wires {
            let unitary = rng.gen_bool(unitary_fraction);
            let g = random_matchgate(rng, unitary);
            circuit.push(Gate::new(vec![w, w + 1], 2, g).unwrap()).unwrap();
            w += 2;
        }
    }
    circuit
}

pub fn random_unitary_six_vertex(rng: &mut ChaCha8Rng) -> WeightTensor {
    let u = random_unitary2(rng);
    let tau = std::f64::consts::TAU;
    let (p, r) = (C64::from_polar(1.0, rng.gen_range(0.0..tau)), C64::from_polar(1.0, rng.gen_range(0.0..tau)));
    six_vertex_tensor(&[p, u[0], u[1], u[2], u[3], r])
}

pub fn rx(theta: f64) -> Matrix {
    let (co, s) = (c(theta.cos()), I * theta.sin());
    Matrix::from_rows(vec![vec![co, s], vec![s, co]]).unwrap()
}

pub fn rzz(beta: f64) -> Matrix {
    let (p, m) = (C64::from_polar(1.0, beta), C64::from_polar(1.0, -beta));
    Matrix::diagonal(&[p, m, m, p])
}

/// Alternating layers of X rotations and ZZ couplings with random angles.
pub fn random_xz_circuit(rng: &mut ChaCha8Rng, wires: usize, rounds: usize) -> Circuit {
    let mut circ = Circuit::new(wires, 2);
    for _ in 0..rounds {
        for w in 1..=wires {
            circ.push(Gate::new(vec![w], 2, rx(rng.gen_range(-3.0..3.0))).unwrap()).unwrap();
        }
        for w in 1..wires {
            circ.push(Gate::new(vec![w, w + 1], 2, rzz(rng.gen_range(-3.0..3.0))).unwrap()).unwrap();
        }
    }
    circ
}

pub fn random_exchange_spec(rng: &mut ChaCha8Rng, max_pulses: usize) -> ExchangeCircuitSpec {
    let pulses = (0..rng.gen_range(0..=max_pulses))
        .map(|_| ExchangePulse { wire: rng.gen_range(1..4), t: rng.gen_range(-3.2..3.2) })
        .collect();
    ExchangeCircuitSpec::new(1, pulses).unwrap()
}

pub fn random_edge_gate_circuit(rng: &mut ChaCha8Rng, wires: usize, gates: usize) -> Circuit {
    let mut circuit = Circuit::new(wires, 2);
    for _ in 0..gates {
        let kinds: Vec<EdgeGateKind> = EdgeGateKind::ALL.into_iter().filter(|k| k.arity() <= wires).collect();
        let k = kinds[rng.gen_range(0..kinds.len())];
        let w = rng.gen_range(1..=wires + 1 - k.arity());
        circuit.push(k.gate(w).unwrap()).unwrap();
    }
    circuit
}

/// Zero-safe relative deviation: relative to `|reference|`, absolute below 1e-12.
pub fn deviation(value: C64, reference: C64) -> f64 {
    (value - reference).norm() / reference.norm().max(1e-12)
}
