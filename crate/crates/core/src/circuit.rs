//! Circuit IR and the dense statevector evaluator of `⟨L| C |R⟩`.
//!
//! Gates are applied in list order: `gates[0]` acts first on `|R⟩`. Basis
//! indices put wire 1 in the most significant digit.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64, ONE, ZERO};
use crate::spin_models::BoundaryConfig;

/// Default cap for the dense engine, in qubit equivalents.
pub const DEFAULT_MAX_DENSE_QUBITS: usize = 26;

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    wires: Vec<usize>,
    /// Local dimension of each wire, aligned with `wires`.
    dims: Vec<usize>,
    matrix: Matrix,
}

impl Gate {
    pub fn new(wires: Vec<usize>, q: usize, matrix: Matrix) -> Result<Self> {
        let dims = vec![q; wires.len()];
        Self::with_dims(wires, dims, matrix)
    }

    /// Gate over mixed-radix wires; only the Hadamard-test ancilla uses this.
    pub fn with_dims(wires: Vec<usize>, dims: Vec<usize>, matrix: Matrix) -> Result<Self> {
        if wires.is_empty() || wires.len() != dims.len() {
            return Err(Error::ShapeMismatch("gate needs at least one wire".into()));
        }
        let mut sorted = wires.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != wires.len() || sorted[0] == 0 {
            return Err(Error::ShapeMismatch(format!("gate wires {wires:?} must be distinct and 1-based")));
        }
        let dim: usize = dims.iter().product();
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::ShapeMismatch(format!(
                "gate on {} wires needs a {dim}×{dim} matrix, got {}×{}",
                wires.len(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        if !matrix.is_finite() {
            return Err(Error::InvalidInput("non-finite gate entry".into()));
        }
        Ok(Self { wires, dims, matrix })
    }

    pub fn wires(&self) -> &[usize] {
        &self.wires
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn arity(&self) -> usize {
        self.wires.len()
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { wires: self.wires.clone(), dims: self.dims.clone(), matrix: self.matrix.scale(s) }
    }

    /// The same operator with its wires listed in ascending order.
    pub fn sorted_wires(&self) -> Self {
        let k = self.wires.len();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| self.wires[i]);
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self.clone();
        }
        let new_dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let dim = self.matrix.rows();
        // new digit position p holds old digit order[p]
        let remap = |idx: usize| -> usize {
            let digits = digits_of(idx, &new_dims);
            let mut old = vec![0; k];
            for (p, &o) in order.iter().enumerate() {
                old[o] = digits[p];
            }
            index_of(&old, &self.dims)
        };
        let mut m = Matrix::zeros(dim, dim);
        for i in 0..dim {
            let oi = remap(i);
            for j in 0..dim {
                m[(i, j)] = self.matrix[(oi, remap(j))];
            }
        }
        Self { wires: order.iter().map(|&o| self.wires[o]).collect(), dims: new_dims, matrix: m }
    }
}

fn digits_of(mut idx: usize, dims: &[usize]) -> Vec<usize> {
    let mut d = vec![0; dims.len()];
    for p in (0..dims.len()).rev() {
        d[p] = idx % dims[p];
        idx /= dims[p];
    }
    d
}

fn index_of(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&d, &q)| acc * q + d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    wires: usize,
    q: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(wires: usize, q: usize) -> Self {
        Self { wires, q, gates: Vec::new() }
    }

    pub fn from_gates(wires: usize, q: usize, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Self::new(wires, q);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        if let Some(&w) = gate.wires.iter().find(|&&w| w > self.wires) {
            return Err(Error::WireOutOfRange { wire: w, wires: self.wires });
        }
        if gate.dims.iter().any(|&d| d != self.q) {
            return Err(Error::ShapeMismatch(format!(
                "gate dims {:?} in a q = {} circuit",
                gate.dims, self.q
            )));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn wires(&self) -> usize {
        self.wires
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gates_mut(&mut self) -> &mut [Gate] {
        &mut self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Number of greedy parallel layers (gates on disjoint wires share a layer).
    pub fn depth(&self) -> usize {
        let mut front = vec![0usize; self.wires + 1];
        let mut depth = 0;
        for g in &self.gates {
            let layer = g.wires.iter().map(|&w| front[w]).max().unwrap_or(0) + 1;
            for &w in &g.wires {
                front[w] = layer;
            }
            depth = depth.max(layer);
        }
        depth
    }
}

/// Dense state vector over mixed-radix wires.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn basis(dims: Vec<usize>, values: &[usize]) -> Result<Self> {
        if values.len() != dims.len() || values.iter().zip(&dims).any(|(&v, &d)| v >= d) {
            return Err(Error::InvalidBoundary(format!("basis state {values:?} for dims {dims:?}")));
        }
        let size: usize = dims.iter().product();
        let mut amps = vec![ZERO; size];
        amps[index_of(values, &dims)] = ONE;
        Ok(Self { dims, amps })
    }

    pub fn from_amplitudes(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        if dims.iter().product::<usize>() != amps.len() {
            return Err(Error::ShapeMismatch("amplitude count does not match dims".into()));
        }
        Ok(Self { dims, amps })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitude(&self, values: &[usize]) -> C64 {
        self.amps[index_of(values, &self.dims)]
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies `gate` by contracting it into the state in place.
    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        let n = self.dims.len();
        for (&w, &d) in gate.wires.iter().zip(&gate.dims) {
            if w > n {
                return Err(Error::WireOutOfRange { wire: w, wires: n });
            }
            if self.dims[w - 1] != d {
                return Err(Error::ShapeMismatch(format!("wire {w} has dimension {}, gate expects {d}", self.dims[w - 1])));
            }
        }
        let mut strides = vec![1usize; n];
        for w in (0..n.saturating_sub(1)).rev() {
            strides[w] = strides[w + 1] * self.dims[w + 1];
        }
        let local = gate.matrix.rows();
        let offsets: Vec<usize> = (0..local)
            .map(|l| {
                digits_of(l, &gate.dims)
                    .iter()
                    .zip(&gate.wires)
                    .map(|(&d, &w)| d * strides[w - 1])
                    .sum()
            })
            .collect();
        // Visit every base index whose gate digits are all zero by counting
        // over the remaining wires.
        let others: Vec<usize> = (0..n).filter(|w| !gate.wires.contains(&(w + 1))).collect();
        let mut counter = vec![0usize; others.len()];
        let mut gathered = vec![ZERO; local];
        let m = &gate.matrix;
        loop {
            let base: usize = others.iter().zip(&counter).map(|(&w, &c)| c * strides[w]).sum();
            for (g, &o) in gathered.iter_mut().zip(&offsets) {
                *g = self.amps[base + o];
            }
            for (i, &o) in offsets.iter().enumerate() {
                let row = m.row(i);
                let mut acc = ZERO;
                for (a, b) in row.iter().zip(&gathered) {
                    acc += a * b;
                }
                self.amps[base + o] = acc;
            }
            let mut pos = others.len();
            loop {
                if pos == 0 {
                    return Ok(());
                }
                pos -= 1;
                counter[pos] += 1;
                if counter[pos] < self.dims[others[pos]] {
                    break;
                }
                counter[pos] = 0;
            }
        }
    }
}

fn check_dense_cap(dims: &[usize], max_qubits: usize) -> Result<()> {
    let bits: f64 = dims.iter().map(|&d| (d as f64).log2()).sum();
    if bits > max_qubits as f64 + 1e-9 {
        return Err(Error::TooLarge(format!(
            "{bits:.1} qubit equivalents exceed the dense cap of {max_qubits}"
        )));
    }
    Ok(())
}

/// Runs `gates` on a mixed-radix register starting from `initial`.
pub fn evolve(dims: &[usize], gates: &[Gate], initial: &[usize], max_qubits: usize) -> Result<StateVector> {
    check_dense_cap(dims, max_qubits)?;
    let mut state = StateVector::basis(dims.to_vec(), initial)?;
    for g in gates {
        state.apply(g)?;
    }
    Ok(state)
}

/// `⟨L| G_T ··· G_1 |R⟩` by statevector contraction.
pub fn amplitude_dense(
    circuit: &Circuit,
    left: &BoundaryConfig,
    right: &BoundaryConfig,
    max_qubits: usize,
) -> Result<C64> {
    left.validate(circuit.wires, circuit.q)?;
    right.validate(circuit.wires, circuit.q)?;
    let dims = vec![circuit.q; circuit.wires];
    let state = evolve(&dims, &circuit.gates, right.values(), max_qubits)?;
    Ok(state.amplitude(left.values()))
}

/// `‖M†M − I‖_max ≤ tol`.
pub fn is_unitary(gate: &Gate, tol: f64) -> bool {
    matrix_is_unitary(&gate.matrix, tol)
}

pub fn matrix_is_unitary(m: &Matrix, tol: f64) -> bool {
    m.is_square() && (&m.adjoint() * m).max_abs_diff(&Matrix::identity(m.rows())) <= tol
}

/// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ M` with a two-level control on `control`.
pub fn controlled(gate: &Gate, control: usize) -> Result<Gate> {
    let dim = gate.matrix.rows();
    let mut m = Matrix::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        m[(i, i)] = ONE;
        for j in 0..dim {
            m[(dim + i, dim + j)] = gate.matrix[(i, j)];
        }
    }
    let mut wires = vec![control];
    wires.extend_from_slice(&gate.wires);
    let mut dims = vec![2];
    dims.extend_from_slice(&gate.dims);
    Gate::with_dims(wires, dims, m)
}

/// Cyclic shift `S|l⟩ = |(l + amount) mod q⟩` on one wire.
pub fn shift_gate(q: usize, amount: usize, wire: usize) -> Result<Gate> {
    if amount >= q {
        return Err(Error::InvalidInput(format!("shift {amount} out of range for q = {q}")));
    }
    let mut m = Matrix::zeros(q, q);
    for l in 0..q {
        m[((l + amount) % q, l)] = ONE;
    }
    Gate::new(vec![wire], q, m)
}
