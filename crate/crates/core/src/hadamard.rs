//! Simulated Hadamard-test estimation of `⟨L| C |R⟩` for unitary circuits.
//!
//! The off-diagonal amplitude is first made diagonal, `⟨L|C|R⟩ = ⟨L|C·S|L⟩`
//! with `S` the wire-wise cyclic shift taking `|L⟩` to `|R⟩`. An ancilla in
//! `|+⟩` controls `U = C·S`; measuring it in the X basis gives `+1` with
//! probability `(1 + Re⟨L|U|L⟩)/2`, in the Y basis `(1 + Im⟨L|U|L⟩)/2`.
//! Outcome probabilities are computed exactly, then sampled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::circuit::{controlled, evolve, is_unitary, shift_gate, Circuit, Gate, DEFAULT_MAX_DENSE_QUBITS};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64};
use crate::spin_models::BoundaryConfig;

/// Gate unitarity tolerance for the estimator.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AmplitudeEstimate {
    pub value: C64,
    pub eps: f64,
    pub delta: f64,
    /// Samples per quadrature.
    pub samples: u64,
    pub seed: u64,
}

/// `⌈(4 / eps²) ln(4 / delta)⌉`: by Hoeffding each quadrature mean of `±1`
/// samples is within `eps/√2` with probability at least `1 - delta/2`.
pub fn sample_count(eps: f64, delta: f64) -> Result<u64> {
    check_precision(eps, delta)?;
    let m = (4.0 / (eps * eps) * (4.0 / delta).ln()).ceil();
    if !m.is_finite() || m > u64::MAX as f64 {
        return Err(Error::TooLarge(format!("eps = {eps} needs {m:e} samples")));
    }
    Ok((m as u64).max(1))
}

fn check_precision(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be positive, got {eps}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidInput(format!("delta must lie in (0, 1), got {delta}")));
    }
    Ok(())
}

/// Exact ancilla statistics `(P_x(+1), P_y(+1))` of the Hadamard test.
pub fn outcome_probabilities(circuit: &Circuit, left: &BoundaryConfig, right: &BoundaryConfig) -> Result<(f64, f64)> {
    let n = circuit.wires();
    let q = circuit.q();
    left.validate(n, q)?;
    right.validate(n, q)?;
    for g in circuit.gates() {
        if !is_unitary(g, UNITARITY_TOL) {
            return Err(Error::NotUnitary(format!("gate on wires {:?}", g.wires())));
        }
    }
    let shifted = |g: &Gate| Gate::with_dims(g.wires().iter().map(|w| w + 1).collect(), g.dims().to_vec(), g.matrix().clone());
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hadamard = Matrix::from_real_rows(&[&[h, h], &[h, -h]]).expect("2×2");
    let mut gates = vec![Gate::with_dims(vec![1], vec![2], hadamard)?];
    for w in 1..=n {
        let amount = (right.values()[w - 1] + q - left.values()[w - 1]) % q;
        if amount != 0 {
            gates.push(controlled(&shift_gate(q, amount, w + 1)?, 1)?);
        }
    }
    for g in circuit.gates() {
        gates.push(controlled(&shifted(g)?, 1)?);
    }
    let mut dims = vec![2];
    dims.extend(std::iter::repeat_n(q, n));
    let mut initial = vec![0];
    initial.extend_from_slice(left.values());
    let state = evolve(&dims, &gates, &initial, DEFAULT_MAX_DENSE_QUBITS)?;
    let amps = state.amplitudes();
    let half = amps.len() / 2;
    let (mut px, mut py) = (0.0, 0.0);
    for k in 0..half {
        let (a0, a1) = (amps[k], amps[k + half]);
        px += ((a0 + a1) * h).norm_sqr();
        py += ((a0 - C64::i() * a1) * h).norm_sqr();
    }
    Ok((px.clamp(0.0, 1.0), py.clamp(0.0, 1.0)))
}

/// Seeded Hadamard-test estimate: all real-part samples are drawn first,
/// then all imaginary-part samples, from one `ChaCha8Rng` stream.
pub fn estimate_amplitude(
    circuit: &Circuit,
    left: &BoundaryConfig,
    right: &BoundaryConfig,
    eps: f64,
    delta: f64,
    seed: u64,
) -> Result<AmplitudeEstimate> {
    let samples = sample_count(eps, delta)?;
    let (px, py) = outcome_probabilities(circuit, left, right)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = |p: f64| {
        let mut total: i64 = 0;
        for _ in 0..samples {
            total += if rng.gen::<f64>() < p { 1 } else { -1 };
        }
        total as f64 / samples as f64
    };
    let re = mean(px);
    let im = mean(py);
    Ok(AmplitudeEstimate { value: C64::new(re, im), eps, delta, samples, seed })
}

/// The infinite-sample limit: `(2 P_x - 1) + i (2 P_y - 1)`.
pub fn estimate_amplitude_exact(circuit: &Circuit, left: &BoundaryConfig, right: &BoundaryConfig) -> Result<C64> {
    let (px, py) = outcome_probabilities(circuit, left, right)?;
    Ok(C64::new(2.0 * px - 1.0, 2.0 * py - 1.0))
}
