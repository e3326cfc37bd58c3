//! Hard instances: spin models whose partition functions encode quantum
//! amplitudes, built from exchange-pulse circuits (six-vertex) and from
//! `{I₁, H, P, I₂, CP}` circuits (edge models), plus a numerical check of
//! each encoding.

use serde::{Deserialize, Serialize};

use crate::circuit::{amplitude_dense, Circuit, Gate, StateVector, DEFAULT_MAX_DENSE_QUBITS};
use crate::compiler::{circuit_to_edge_model, circuit_to_vertex_model};
use crate::error::{Error, Result};
use crate::matrix::{relative_error, Matrix, C64, I, ONE, ZERO};
use crate::spin_models::{
    brute_force_partition, has_six_vertex_form, BoundaryConfig, SpinModel, DEFAULT_MAX_BRUTE_SPINS, PATTERN_TOL,
};

/// Tolerance for recognising gates of the edge-model gate set.
pub const GATE_SET_TOL: f64 = 1e-12;

/// Deviations below this multiple of the reference scale count as rounding.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Two-qubit exchange pulse of duration `t`:
/// corners `e^{2it}`, inner block `[[cos 2t, i sin 2t], [i sin 2t, cos 2t]]`.
///
/// This is `e^{it} · exp(it(σx⊗σx + σy⊗σy + σz⊗σz))`, so it differs from
/// the bare exponential by a global phase.
pub fn exchange_gate(t: f64) -> Matrix {
    let a = C64::from_polar(1.0, 2.0 * t);
    let c = C64::new((2.0 * t).cos(), 0.0);
    let s = I * (2.0 * t).sin();
    Matrix::from_rows(vec![
        vec![a, ZERO, ZERO, ZERO],
        vec![ZERO, c, s, ZERO],
        vec![ZERO, s, c, ZERO],
        vec![ZERO, ZERO, ZERO, a],
    ])
    .expect("4×4")
}

/// The gate `V` with `V|01⟩ = (|01⟩ - |10⟩)/√2`, fixing `|00⟩` and `|11⟩`.
pub fn singlet_gate() -> Matrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Matrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, h, h, 0.0],
        &[0.0, -h, h, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
    .expect("4×4")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangePulse {
    /// Lower wire of the adjacent pair `(wire, wire + 1)`.
    pub wire: usize,
    pub t: f64,
}

/// An exchange-pulse program on `4 · logical_qubits` physical wires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExchangeCircuitSpec {
    pub logical_qubits: usize,
    pub pulses: Vec<ExchangePulse>,
}

impl ExchangeCircuitSpec {
    pub fn new(logical_qubits: usize, pulses: Vec<ExchangePulse>) -> Result<Self> {
        let spec = ExchangeCircuitSpec { logical_qubits, pulses };
        spec.validate()?;
        Ok(spec)
    }

    pub fn wires(&self) -> usize {
        4 * self.logical_qubits
    }

    pub fn validate(&self) -> Result<()> {
        if self.logical_qubits == 0 {
            return Err(Error::InvalidInput("an exchange circuit needs at least one logical qubit".into()));
        }
        let n = self.wires();
        for p in &self.pulses {
            if p.wire == 0 || p.wire >= n {
                let wire = if p.wire == 0 { 0 } else { p.wire + 1 };
                return Err(Error::WireOutOfRange { wire, wires: n });
            }
            if !p.t.is_finite() {
                return Err(Error::InvalidInput(format!("pulse angle {} is not finite", p.t)));
            }
        }
        Ok(())
    }

    /// The bare pulse circuit `C`.
    pub fn circuit(&self) -> Result<Circuit> {
        self.validate()?;
        let mut c = Circuit::new(self.wires(), 2);
        for p in &self.pulses {
            c.push(Gate::new(vec![p.wire, p.wire + 1], 2, exchange_gate(p.t))?)?;
        }
        Ok(c)
    }

    /// `C' = (V†)^{⊗2n} C V^{⊗2n}` with `V` on pairs `(1,2), (3,4), …`,
    /// so that `⟨(01)…|C'|(01)…⟩` is the singlet-product amplitude of `C`.
    pub fn encoded_circuit(&self) -> Result<Circuit> {
        let n = self.wires();
        let v = singlet_gate();
        let vd = v.adjoint();
        let mut c = Circuit::new(n, 2);
        for w in (1..n).step_by(2) {
            c.push(Gate::new(vec![w, w + 1], 2, v.clone())?)?;
        }
        for g in self.circuit()?.gates() {
            c.push(g.clone())?;
        }
        for w in (1..n).step_by(2) {
            c.push(Gate::new(vec![w, w + 1], 2, vd.clone())?)?;
        }
        Ok(c)
    }
}

/// A spin model with the boundary configurations its reduction prescribes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionInstance {
    pub model: SpinModel,
    pub left: BoundaryConfig,
    pub right: BoundaryConfig,
}

/// Six-vertex model on a tilted square lattice whose partition function
/// with staggered boundaries `0101…` on both sides is `⟨0_L|C|0_L⟩`.
pub fn six_vertex_instance(spec: &ExchangeCircuitSpec) -> Result<ReductionInstance> {
    let vm = circuit_to_vertex_model(&spec.encoded_circuit()?, 1)?;
    debug_assert!(vm.site_weights().iter().all(|t| has_six_vertex_form(t.matrix(), PATTERN_TOL)));
    let b = BoundaryConfig::staggered(spec.wires());
    Ok(ReductionInstance { model: vm.into(), left: b.clone(), right: b })
}

/// `⟨0_L|C|0_L⟩` by dense simulation, where `|0_L⟩` is the explicit
/// product of singlets `(|01⟩ - |10⟩)/√2` on pairs `(1,2), (3,4), …`.
pub fn logical_zero_amplitude(spec: &ExchangeCircuitSpec) -> Result<C64> {
    let n = spec.wires();
    if n > DEFAULT_MAX_DENSE_QUBITS {
        return Err(Error::TooLarge(format!("{n} wires exceed the dense cap of {DEFAULT_MAX_DENSE_QUBITS}")));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let singlet = [ZERO, C64::new(h, 0.0), C64::new(-h, 0.0), ZERO];
    let mut amps = vec![ONE];
    for _ in 0..n / 2 {
        amps = amps.iter().flat_map(|&a| singlet.iter().map(move |&s| a * s)).collect();
    }
    let zero_l = StateVector::from_amplitudes(vec![2; n], amps)?;
    let mut state = zero_l.clone();
    for g in spec.circuit()?.gates() {
        state.apply(g)?;
    }
    Ok(zero_l.inner(&state))
}

/// Members of the edge-model gate set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeGateKind {
    Identity1,
    Hadamard,
    Phase,
    Identity2,
    ControlledPhase,
}

impl EdgeGateKind {
    pub const ALL: [EdgeGateKind; 5] = [
        EdgeGateKind::Identity1,
        EdgeGateKind::Hadamard,
        EdgeGateKind::Phase,
        EdgeGateKind::Identity2,
        EdgeGateKind::ControlledPhase,
    ];

    pub fn arity(self) -> usize {
        match self {
            EdgeGateKind::Identity1 | EdgeGateKind::Hadamard | EdgeGateKind::Phase => 1,
            EdgeGateKind::Identity2 | EdgeGateKind::ControlledPhase => 2,
        }
    }

    pub fn matrix(self) -> Matrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            EdgeGateKind::Identity1 => Matrix::identity(2),
            EdgeGateKind::Hadamard => Matrix::from_real_rows(&[&[h, h], &[h, -h]]).expect("2×2"),
            EdgeGateKind::Phase => Matrix::diagonal(&[ONE, I]),
            EdgeGateKind::Identity2 => Matrix::identity(4),
            EdgeGateKind::ControlledPhase => Matrix::diagonal(&[ONE, ONE, ONE, -ONE]),
        }
    }

    /// Places the gate on `wire` (and `wire + 1` for two-wire kinds).
    pub fn gate(self, wire: usize) -> Result<Gate> {
        let wires = if self.arity() == 1 { vec![wire] } else { vec![wire, wire + 1] };
        Gate::new(wires, 2, self.matrix())
    }

    /// Recognises a gate of the set on adjacent wires.
    pub fn classify(gate: &Gate) -> Option<EdgeGateKind> {
        let gate = gate.sorted_wires();
        if gate.dims().iter().any(|&d| d != 2) {
            return None;
        }
        match *gate.wires() {
            [_] => {}
            [a, b] if b == a + 1 => {}
            _ => return None,
        }
        EdgeGateKind::ALL.into_iter().find(|k| {
            k.arity() == gate.arity() && gate.matrix().max_abs_diff(&k.matrix()) <= GATE_SET_TOL
        })
    }
}

/// Edge model whose partition function with all-zero boundaries is
/// `⟨0…0|C|0…0⟩` for a circuit over `{I₁, H, P, I₂, CP}`.
pub fn em_instance(circuit: &Circuit) -> Result<ReductionInstance> {
    if circuit.q() != 2 {
        return Err(Error::UnsupportedGate(format!("the gate set acts on qubits, got q = {}", circuit.q())));
    }
    for (i, g) in circuit.gates().iter().enumerate() {
        if EdgeGateKind::classify(g).is_none() {
            return Err(Error::UnsupportedGate(format!("gate {i} on wires {:?} is outside {{I1, H, P, I2, CP}}", g.wires())));
        }
    }
    let em = circuit_to_edge_model(circuit, 1)?;
    let b = BoundaryConfig::zeros(circuit.wires());
    Ok(ReductionInstance { model: em.into(), left: b.clone(), right: b })
}

/// What a reduction instance is compared against.
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// `⟨L|C|R⟩` with the instance's boundaries.
    Circuit(&'a Circuit),
    /// `⟨0_L|C|0_L⟩` with explicit singlet states.
    LogicalZero(&'a ExchangeCircuitSpec),
}

impl Reference<'_> {
    pub fn amplitude(&self, left: &BoundaryConfig, right: &BoundaryConfig) -> Result<C64> {
        match self {
            Reference::Circuit(c) => amplitude_dense(c, left, right, DEFAULT_MAX_DENSE_QUBITS),
            Reference::LogicalZero(spec) => logical_zero_amplitude(spec),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionReport {
    /// Exhaustive partition function of the instance.
    pub partition: C64,
    pub reference: C64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Compares the exhaustive partition function of `instance` with the
/// dense reference amplitude. Passes when the deviation is at most
/// `(tol + ROUNDING_SLACK) · max(1, |reference|)`.
pub fn verify_reduction(instance: &ReductionInstance, reference: Reference<'_>, tol: f64) -> Result<ReductionReport> {
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidInput(format!("tolerance must be non-negative, got {tol}")));
    }
    let partition = brute_force_partition(&instance.model, &instance.left, &instance.right, DEFAULT_MAX_BRUTE_SPINS)?;
    let reference = reference.amplitude(&instance.left, &instance.right)?;
    let abs_error = (partition - reference).norm();
    let rel_error = relative_error(partition, reference);
    let passed = abs_error <= (tol + ROUNDING_SLACK) * reference.norm().max(1.0);
    Ok(ReductionReport { partition, reference, abs_error, rel_error, tol, passed })
}
