//! Matchgate circuits as free-fermion evolutions.
//!
//! Under the Jordan–Wigner map a matchgate on adjacent wires is a Gaussian
//! operator, so `G_T ··· G_1 |R⟩` stays a fermionic Gaussian state. The
//! state is kept in Thouless form relative to a Fock reference `|r⟩`:
//!
//! `|ψ⟩ = z · exp(Σ_{i<j} Z_ij b†_i b†_j) |r⟩`,
//!
//! where `b_j = a_j` on empty reference modes and `b_j = a†_j` on occupied
//! ones. A gate updates `(z, Z)` in `O(N²)`; when the state's weight moves
//! off the reference on the gate's pair, the pair is flipped in `r`.
//! Amplitudes are `z · sign · Pf(Z_S)` with `S` the modes where `⟨L|`
//! differs from `r`.

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64, ONE, ZERO};
use crate::spin_models::{free_fermion_sides, has_eight_vertex_form, BoundaryConfig};

use super::pfaffian::pfaffian_in_place;

/// Relative tolerance for the zero pattern, the free-fermion equality and
/// block invertibility.
pub const MATCHGATE_TOL: f64 = 1e-10;

/// Whether `gate` is a binary two-wire gate with the eight-vertex zero
/// pattern whose even and odd blocks have equal determinants.
pub fn is_matchgate(gate: &Gate, tol: f64) -> bool {
    gate.arity() == 2 && gate.dims() == [2, 2] && matrix_is_matchgate(gate.matrix(), tol)
}

pub fn matrix_is_matchgate(m: &Matrix, tol: f64) -> bool {
    let scale = m.max_abs().max(1.0);
    if !has_eight_vertex_form(m, tol * scale) {
        return false;
    }
    let (even, odd) = free_fermion_sides(m);
    (even - odd).norm() <= tol * scale * scale
}

/// Full precondition check for the free-fermion engine.
pub fn check_matchgate(gate: &Gate, tol: f64) -> Result<()> {
    let w = gate.wires();
    if gate.arity() != 2 || gate.dims() != [2, 2] {
        return Err(Error::NotMatchgate(format!("gate on wires {w:?} is not a binary two-wire gate")));
    }
    if w[0].abs_diff(w[1]) != 1 {
        return Err(Error::NotMatchgate(format!("gate on wires {w:?} does not act on adjacent wires")));
    }
    if !matrix_is_matchgate(gate.matrix(), tol) {
        return Err(Error::NotMatchgate(format!(
            "gate on wires {w:?} violates the zero pattern or the free-fermion condition"
        )));
    }
    let scale = gate.matrix().max_abs().max(1.0);
    let (even, odd) = free_fermion_sides(gate.matrix());
    if even.norm() <= tol * scale * scale || odd.norm() <= tol * scale * scale {
        return Err(Error::NonInvertibleGate(format!("gate on wires {w:?} has a singular block")));
    }
    Ok(())
}

/// `⟨L| C |R⟩` for a circuit of matchgates, in `O(T·N² + N³)`.
pub fn amplitude_matchgate(circuit: &Circuit, left: &BoundaryConfig, right: &BoundaryConfig) -> Result<C64> {
    if circuit.q() != 2 {
        return Err(Error::NotMatchgate(format!("matchgates act on qubits, circuit has q = {}", circuit.q())));
    }
    left.validate(circuit.wires(), 2)?;
    right.validate(circuit.wires(), 2)?;
    for g in circuit.gates() {
        check_matchgate(g, MATCHGATE_TOL)?;
    }
    let mut state = ThoulessState::basis(right.values());
    for g in circuit.gates() {
        let g = g.sorted_wires();
        state.apply(g.wires()[0] - 1, g.matrix())?;
    }
    Ok(state.amplitude(left.values()))
}

#[derive(Debug, Clone)]
struct ThoulessState {
    n: usize,
    reference: Vec<bool>,
    scalar: C64,
    /// Row-major antisymmetric `n × n` Thouless matrix.
    z: Vec<C64>,
}

impl ThoulessState {
    fn basis(values: &[usize]) -> Self {
        let n = values.len();
        Self { n, reference: values.iter().map(|&v| v == 1).collect(), scalar: ONE, z: vec![ZERO; n * n] }
    }

    /// `(-1)^{occupied reference modes before i}`.
    fn prefix_sign(&self, i: usize) -> f64 {
        if self.reference[..i].iter().filter(|&&o| o).count() % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn at(&self, i: usize, j: usize) -> C64 {
        self.z[i * self.n + j]
    }

    fn set(&mut self, i: usize, j: usize, v: C64) {
        self.z[i * self.n + j] = v;
        self.z[j * self.n + i] = -v;
    }

    /// Applies a matchgate on modes `(p, p + 1)`.
    fn apply(&mut self, p: usize, m: &Matrix) -> Result<()> {
        let q = p + 1;
        let mut g = local_matrix(m, self.reference[p], self.reference[q]);
        let zpq = self.at(p, q);
        let stay = g[0][0] + g[0][3] * zpq;
        let flip = g[3][0] + g[3][3] * zpq;
        let mut sign = 1.0;
        if flip.norm() > stay.norm() {
            // express the result relative to the reference with (p, q) flipped
            let old = g;
            g[0] = old[3];
            g[1] = old[2];
            g[2] = old[1].map(|x| -x);
            g[3] = old[0].map(|x| -x);
            sign = self.prefix_sign(p) * self.prefix_sign(q);
            self.reference[p] = !self.reference[p];
            self.reference[q] = !self.reference[q];
        }
        let c0 = g[0][0] + g[0][3] * zpq;
        if c0 == ZERO || !c0.is_finite() {
            return Err(Error::NumericalBreakdown(format!("lost the reference on modes ({}, {})", p + 1, q + 1)));
        }
        let inv = ONE / c0;
        let d0 = -g[0][3] * inv;
        let a = g[3][0] + g[3][3] * zpq;
        let n = self.n;
        let row_p: Vec<C64> = (0..n).map(|k| self.at(p, k)).collect();
        let row_q: Vec<C64> = (0..n).map(|k| self.at(q, k)).collect();
        if d0 != ZERO {
            for k in 0..n {
                if k == p || k == q {
                    continue;
                }
                for l in k + 1..n {
                    if l == p || l == q {
                        continue;
                    }
                    let v = self.at(k, l) + d0 * (row_p[k] * row_q[l] - row_p[l] * row_q[k]);
                    self.set(k, l, v);
                }
            }
        }
        for k in 0..n {
            if k == p || k == q {
                continue;
            }
            self.set(p, k, (g[1][1] * row_p[k] + g[1][2] * row_q[k]) * inv);
            self.set(q, k, (g[2][1] * row_p[k] + g[2][2] * row_q[k]) * inv);
        }
        self.set(p, q, a * inv);
        self.scalar *= c0 * sign;
        Ok(())
    }

    fn amplitude(&self, values: &[usize]) -> C64 {
        let s: Vec<usize> = (0..self.n).filter(|&i| (values[i] == 1) != self.reference[i]).collect();
        if s.len() % 2 == 1 {
            return ZERO;
        }
        let sign: f64 = s.iter().map(|&i| self.prefix_sign(i)).product();
        let k = s.len();
        let mut sub: Vec<C64> = Vec::with_capacity(k * k);
        for &i in &s {
            for &j in &s {
                sub.push(self.at(i, j));
            }
        }
        self.scalar * sign * pfaffian_in_place(&mut sub, k)
    }
}

/// The gate in the basis `(∅, b†_p, b†_q, b†_p b†_q)` over the local
/// reference `|r_p r_q⟩`; indices follow that order.
fn local_matrix(m: &Matrix, rp: bool, rq: bool) -> [[C64; 4]; 4] {
    // basis vectors as (qubit index 2x + y, sign)
    let vac = (2 * rp as usize + rq as usize, 1.0);
    let create_p = |(idx, s): (usize, f64)| (idx ^ 2, s);
    // the Jordan–Wigner string on mode q picks up the occupation of p
    let create_q = |(idx, s): (usize, f64)| (idx ^ 1, if idx & 2 != 0 { -s } else { s });
    let basis = [vac, create_p(vac), create_q(vac), create_p(create_q(vac))];
    let mut g = [[ZERO; 4]; 4];
    for (a, &(ia, sa)) in basis.iter().enumerate() {
        for (b, &(ib, sb)) in basis.iter().enumerate() {
            g[a][b] = m[(ia, ib)] * (sa * sb);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::amplitude_dense;
    use crate::matrix::I;
    use crate::spin_models::eight_vertex_tensor;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_c(rng: &mut ChaCha8Rng) -> C64 {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    /// Random invertible matchgate: random even block, odd block rescaled
    /// to the same determinant.
    fn random_matchgate(rng: &mut ChaCha8Rng) -> Matrix {
        let a: [C64; 4] = std::array::from_fn(|_| random_c(rng));
        let mut b: [C64; 4] = std::array::from_fn(|_| random_c(rng));
        let da = a[0] * a[3] - a[1] * a[2];
        let db = b[0] * b[3] - b[1] * b[2];
        let s = (da / db).sqrt();
        b.iter_mut().for_each(|x| *x *= s);
        eight_vertex_tensor(&[a[0], a[1], b[0], b[1], b[2], b[3], a[2], a[3]]).into_matrix()
    }

    fn v_gate() -> Matrix {
        let s = 0.5f64.sqrt();
        let c = |x: f64| C64::new(x, 0.0);
        eight_vertex_tensor(&[c(1.0), ZERO, c(s), c(s), c(-s), c(s), ZERO, c(1.0)]).into_matrix()
    }

    fn bits(k: usize, n: usize) -> BoundaryConfig {
        BoundaryConfig::new((0..n).map(|i| (k >> (n - 1 - i)) & 1).collect())
    }

    #[test]
    fn predicates() {
        let id = Gate::new(vec![1, 2], 2, Matrix::identity(4)).unwrap();
        assert!(is_matchgate(&id, 1e-12));
        assert!(matrix_is_matchgate(&v_gate(), 1e-12));
        let t = std::f64::consts::PI / 8.0;
        let a = C64::from_polar(1.0, 2.0 * t);
        let (co, si) = (C64::new((2.0 * t).cos(), 0.0), I * (2.0 * t).sin());
        let exchange = eight_vertex_tensor(&[a, ZERO, co, si, si, co, ZERO, a]).into_matrix();
        assert!(!matrix_is_matchgate(&exchange, 1e-12));
        let x = Gate::new(vec![1], 2, Matrix::identity(2)).unwrap();
        assert!(!is_matchgate(&x, 1e-12));
    }

    #[test]
    fn identity_circuit_is_delta() {
        let mut c = Circuit::new(4, 2);
        c.push(Gate::new(vec![2, 3], 2, Matrix::identity(4)).unwrap()).unwrap();
        for l in 0..16 {
            for r in 0..16 {
                let a = amplitude_matchgate(&c, &bits(l, 4), &bits(r, 4)).unwrap();
                assert_eq!(a, if l == r { ONE } else { ZERO });
            }
        }
    }

    #[test]
    fn single_v_gate() {
        let c = Circuit::from_gates(2, 2, vec![Gate::new(vec![1, 2], 2, v_gate()).unwrap()]).unwrap();
        let b = BoundaryConfig::new(vec![0, 1]);
        let a = amplitude_matchgate(&c, &b, &b).unwrap();
        assert!((a - C64::new(0.5f64.sqrt(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn random_circuits_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..20 {
            let n = 2 + trial % 7;
            let mut c = Circuit::new(n, 2);
            for _ in 0..3 * n {
                let w = rng.gen_range(1..n);
                let wires = if rng.gen_bool(0.5) { vec![w, w + 1] } else { vec![w + 1, w] };
                c.push(Gate::new(wires, 2, random_matchgate(&mut rng)).unwrap()).unwrap();
            }
            for _ in 0..8 {
                let (l, r) = (bits(rng.gen_range(0..1 << n), n), bits(rng.gen_range(0..1 << n), n));
                let fast = amplitude_matchgate(&c, &l, &r).unwrap();
                let dense = amplitude_dense(&c, &l, &r, 26).unwrap();
                assert!(
                    (fast - dense).norm() <= 1e-8 * dense.norm().max(1e-3),
                    "trial {trial}: {fast} vs {dense}"
                );
            }
        }
    }

    #[test]
    fn swap_like_gates_force_reference_changes() {
        // even block maps |00⟩ to |11⟩ exactly, odd block swaps |01⟩ and |10⟩
        let c = |x: f64| C64::new(x, 0.0);
        let m = eight_vertex_tensor(&[ZERO, c(1.0), ZERO, c(-1.0), c(1.0), ZERO, c(-1.0), ZERO]).into_matrix();
        assert!(matrix_is_matchgate(&m, 1e-12));
        let mut circ = Circuit::new(4, 2);
        for w in [1, 2, 3, 2, 1, 3] {
            circ.push(Gate::new(vec![w, w + 1], 2, m.clone()).unwrap()).unwrap();
        }
        for l in 0..16 {
            for r in [0, 5, 9, 15] {
                let fast = amplitude_matchgate(&circ, &bits(l, 4), &bits(r, 4)).unwrap();
                let dense = amplitude_dense(&circ, &bits(l, 4), &bits(r, 4), 26).unwrap();
                assert!((fast - dense).norm() < 1e-12, "{l} {r}: {fast} vs {dense}");
            }
        }
    }

    #[test]
    fn scalar_is_tracked_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut c = Circuit::new(5, 2);
        for w in [1, 3, 2, 4, 1, 3] {
            c.push(Gate::new(vec![w, w + 1], 2, random_matchgate(&mut rng)).unwrap()).unwrap();
        }
        let (l, r) = (bits(0b10110, 5), bits(0b01101, 5));
        let base = amplitude_matchgate(&c, &l, &r).unwrap();
        let lambda = C64::new(-0.4, 2.5);
        c.gates_mut()[2] = c.gates()[2].scaled(lambda);
        let scaled = amplitude_matchgate(&c, &l, &r).unwrap();
        assert!((scaled - lambda * base).norm() < 1e-12 * (lambda * base).norm().max(1.0));
    }

    #[test]
    fn closure_under_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let p = &random_matchgate(&mut rng) * &random_matchgate(&mut rng);
            assert!(matrix_is_matchgate(&p, 1e-10));
        }
    }

    #[test]
    fn rejects_non_matchgates() {
        let mut c = Circuit::new(3, 2);
        c.push(Gate::new(vec![1, 3], 2, Matrix::identity(4)).unwrap()).unwrap();
        let z = BoundaryConfig::zeros(3);
        assert!(matches!(amplitude_matchgate(&c, &z, &z), Err(Error::NotMatchgate(_))));
        let singular = Matrix::diagonal(&[ONE, ZERO, ZERO, ZERO]);
        let c = Circuit::from_gates(2, 2, vec![Gate::new(vec![1, 2], 2, singular).unwrap()]).unwrap();
        let z = BoundaryConfig::zeros(2);
        assert!(matches!(amplitude_matchgate(&c, &z, &z), Err(Error::NonInvertibleGate(_))));
    }
}
