//! Translation between spin models and circuits.
//!
//! A vertex model becomes one gate per site, in site order. An edge model
//! becomes alternating slices: vertical edges turn into diagonal two-wire
//! gates `Σ w_ij |ij⟩⟨ij|`, horizontal edges into one-wire gates
//! `Σ w_ij |i⟩⟨j|` (row = spin further from the right boundary). Circuits
//! never carry boundary data, so one compiled circuit serves every `(L, R)`.

use std::collections::HashMap;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, LatticeKind, SiteKind};
use crate::matrix::Matrix;
use crate::spin_models::{EdgeModel, EdgeWeightTable, SpinModel, VertexModel, WeightTensor, PATTERN_TOL};

pub fn compile_vertex_model(vm: &VertexModel) -> Result<Circuit> {
    let lattice = vm.lattice();
    let gates = lattice
        .sites()
        .iter()
        .zip(vm.site_weights())
        .map(|(site, t)| Gate::new(site.wires.clone(), vm.q(), t.matrix().clone()))
        .collect::<Result<Vec<_>>>()?;
    Circuit::from_gates(lattice.wires(), vm.q(), gates)
}

pub fn compile_edge_model(em: &EdgeModel) -> Result<Circuit> {
    let lattice = em.lattice();
    let q = em.q();
    let gates = lattice
        .sites()
        .iter()
        .zip(em.weights())
        .map(|(site, table)| match site.kind {
            SiteKind::Vertical { .. } => {
                let diag: Vec<_> = (0..q * q).map(|k| table.get(k / q, k % q)).collect();
                Gate::new(site.wires.clone(), q, Matrix::diagonal(&diag))
            }
            _ => Gate::new(site.wires.clone(), q, table.matrix().clone()),
        })
        .collect::<Result<Vec<_>>>()?;
    Circuit::from_gates(lattice.wires(), q, gates)
}

pub fn compile(model: &SpinModel) -> Result<Circuit> {
    match model {
        SpinModel::Vertex(vm) => compile_vertex_model(vm),
        SpinModel::Edge(em) => compile_edge_model(em),
    }
}

/// Reads a circuit of adjacent two-wire gates as a square-lattice vertex model.
///
/// Gates are placed as early as the brickwork parity and earlier gates on
/// the same wires allow. One-wire gates are folded into a neighbouring site
/// as `U ⊗ I` or `I ⊗ U`. Unused sites get identity tensors; `min_layers`
/// pads the lattice with extra identity layers.
pub fn circuit_to_vertex_model(circuit: &Circuit, min_layers: usize) -> Result<VertexModel> {
    let n = circuit.wires();
    let q = circuit.q();
    if n < 2 {
        return Err(Error::NotBrickwork(format!("brickwork needs at least 2 wires, got {n}")));
    }
    let mut front = vec![0usize; n + 1];
    // (layer, lowest wire) -> accumulated site matrix
    let mut placed: HashMap<(usize, usize), Matrix> = HashMap::new();
    let mut max_layer = 0;
    for gate in circuit.gates() {
        let gate = gate.sorted_wires();
        let (w, m) = match *gate.wires() {
            [a, b] if b == a + 1 => (a, gate.matrix().clone()),
            [a] => {
                // fold into whichever neighbouring site comes first
                let candidates = [(a, true), (a.wrapping_sub(1), false)];
                let (lo, upper) = candidates
                    .into_iter()
                    .filter(|&(lo, _)| lo >= 1 && lo < n)
                    .min_by_key(|&(lo, _)| brick_layer(lo, front[lo].max(front[lo + 1])))
                    .expect("n >= 2 leaves a neighbour");
                let id = Matrix::identity(q);
                let m = if upper { gate.matrix().kron(&id) } else { id.kron(gate.matrix()) };
                (lo, m)
            }
            _ => {
                return Err(Error::NotBrickwork(format!(
                    "gate on wires {:?} is not on adjacent wires",
                    gate.wires()
                )))
            }
        };
        let layer = brick_layer(w, front[w].max(front[w + 1]));
        front[w] = layer;
        front[w + 1] = layer;
        max_layer = max_layer.max(layer);
        placed.insert((layer, w), m);
    }
    let layers = max_layer.max(min_layers).max(1);
    let lattice = Lattice::new(LatticeKind::TiltedSquare, n, layers)?;
    let weights = lattice
        .sites()
        .iter()
        .map(|s| match placed.remove(&(s.layer, s.lowest_wire())) {
            Some(m) => WeightTensor::new(q, 2, m),
            None => Ok(WeightTensor::identity(q, 2)),
        })
        .collect::<Result<Vec<_>>>()?;
    VertexModel::new(lattice, q, weights)
}

/// First brickwork layer after `after` whose parity hosts a site starting at `w`.
fn brick_layer(w: usize, after: usize) -> usize {
    let l = after + 1;
    if l % 2 == w % 2 {
        l
    } else {
        l + 1
    }
}

/// Reads a circuit of one-wire gates and adjacent diagonal two-wire gates as
/// a rectangular edge model with at least `min_columns` columns.
pub fn circuit_to_edge_model(circuit: &Circuit, min_columns: usize) -> Result<EdgeModel> {
    let n = circuit.wires();
    let q = circuit.q();
    let mut front = vec![0usize; n + 1];
    // (slice, row) -> table
    let mut placed: HashMap<(usize, usize), Matrix> = HashMap::new();
    let mut max_slice = 0;
    for gate in circuit.gates() {
        let gate = gate.sorted_wires();
        match *gate.wires() {
            [r] => {
                // next horizontal (even) slice strictly after the wire's last use
                let s = front[r] + if front[r].is_multiple_of(2) { 2 } else { 1 };
                front[r] = s;
                max_slice = max_slice.max(s);
                placed.insert((s, r), gate.matrix().clone());
            }
            [r, r2] if r2 == r + 1 => {
                let m = gate.matrix();
                let dim = q * q;
                for i in 0..dim {
                    for j in 0..dim {
                        if i != j && m[(i, j)].norm() > PATTERN_TOL {
                            return Err(Error::NotEdgeShaped(format!(
                                "two-wire gate on ({r}, {r2}) is not diagonal"
                            )));
                        }
                    }
                }
                let mut s = front[r].max(front[r2]);
                s += if s.is_multiple_of(2) { 1 } else { 0 };
                if placed.contains_key(&(s, r)) {
                    s += 2;
                }
                front[r] = s;
                front[r2] = s;
                max_slice = max_slice.max(s);
                let mut table = Matrix::zeros(q, q);
                for k in 0..dim {
                    table[(k / q, k % q)] = m[(k, k)];
                }
                placed.insert((s, r), table);
            }
            _ => {
                return Err(Error::NotEdgeShaped(format!(
                    "gate on wires {:?} is neither one-wire nor adjacent two-wire",
                    gate.wires()
                )))
            }
        }
    }
    let columns = (max_slice / 2 + 1).max(min_columns).max(1);
    let lattice = Lattice::new(LatticeKind::Rectangular, n, columns)?;
    let weights = lattice
        .sites()
        .iter()
        .map(|s| match placed.remove(&(s.layer, s.lowest_wire())) {
            Some(m) => EdgeWeightTable::new(q, m),
            None => Ok(match s.kind {
                // a vertical edge that constrains nothing
                SiteKind::Vertical { .. } => EdgeWeightTable::ones(q),
                _ => EdgeWeightTable::identity(q),
            }),
        })
        .collect::<Result<Vec<_>>>()?;
    EdgeModel::new(lattice, q, weights)
}
