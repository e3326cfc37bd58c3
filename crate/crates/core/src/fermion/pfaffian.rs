//! Pfaffians by pivoted skew-symmetric Gaussian elimination.

use crate::error::{Error, Result};
use crate::matrix::{Matrix, C64, ONE, ZERO};

/// Antisymmetry tolerance, relative to the largest entry.
pub const ANTISYMMETRY_TOL: f64 = 1e-10;

/// Pf(A) for a square, even-dimensional, antisymmetric matrix.
pub fn pfaffian(a: &Matrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::ShapeMismatch(format!("{}×{} matrix has no pfaffian", a.rows(), a.cols())));
    }
    let n = a.rows();
    let scale = a.max_abs().max(1.0);
    for i in 0..n {
        for j in i..n {
            let asym = (a[(i, j)] + a[(j, i)]).norm();
            if asym > ANTISYMMETRY_TOL * scale {
                return Err(Error::NotAntisymmetric(format!("entries ({i}, {j}) differ from antisymmetry by {asym:e}")));
            }
        }
    }
    if n % 2 == 1 {
        return Err(Error::OddDimension(n));
    }
    let mut data = a.as_slice().to_vec();
    Ok(pfaffian_in_place(&mut data, n))
}

/// Pfaffian of a row-major `n × n` antisymmetric buffer; the buffer is consumed.
pub(crate) fn pfaffian_in_place(a: &mut [C64], n: usize) -> C64 {
    if n % 2 == 1 {
        return ZERO;
    }
    let mut pf = ONE;
    let mut labels: Vec<usize> = (0..n).collect();
    let (_, rest) = eliminate_pairs(a, n, n, &mut pf, &mut labels);
    if rest != 0 {
        return ZERO;
    }
    pf
}

/// Runs skew Gaussian elimination on the leading `limit` indices of `a`,
/// pairing only among those indices. Returns `(eliminated, remaining)`.
///
/// On return the leading `eliminated` indices are consumed and `pf` has
/// absorbed their pivots and swap signs; the trailing block starting at
/// `eliminated` holds the Schur complement, with any unpaired indices
/// from the first `limit` moved to its front. `remaining` counts those.
/// `labels` is permuted alongside the rows.
pub(crate) fn eliminate_pairs(
    a: &mut [C64],
    n: usize,
    limit: usize,
    pf: &mut C64,
    labels: &mut [usize],
) -> (usize, usize) {
    let mut k = 0;
    let mut end = limit;
    while end - k >= 2 {
        // largest candidate partner for k among the eliminable rows
        let mut kp = k + 1;
        let mut best = a[(k + 1) * n + k].norm();
        for i in k + 2..end {
            let v = a[i * n + k].norm();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if best == 0.0 || best < 1e-13 * column_scale(a, n, k) {
            // no usable partner yet: defer k behind the eliminable range
            end -= 1;
            if k != end {
                swap_index(a, n, k, end);
                labels.swap(k, end);
                *pf = -*pf;
            }
            continue;
        }
        if kp != k + 1 {
            swap_index(a, n, k + 1, kp);
            labels.swap(k + 1, kp);
            *pf = -*pf;
        }
        let pivot = a[k * n + k + 1];
        *pf *= pivot;
        let inv = ONE / pivot;
        // A[i][j] += tau_i A[j][k+1] - A[i][k+1] tau_j with tau = A[k][k+2..] / pivot
        let tau: Vec<C64> = (k + 2..n).map(|j| a[k * n + j] * inv).collect();
        let col: Vec<C64> = (k + 2..n).map(|i| a[i * n + k + 1]).collect();
        for (ii, i) in (k + 2..n).enumerate() {
            let (ti, ci) = (tau[ii], col[ii]);
            let row = &mut a[i * n + k + 2..i * n + n];
            for (jj, x) in row.iter_mut().enumerate() {
                *x += ti * col[jj] - ci * tau[jj];
            }
        }
        k += 2;
    }
    (k, limit - k)
}

/// Largest live entry below the diagonal in column `k`.
fn column_scale(a: &[C64], n: usize, k: usize) -> f64 {
    (k + 1..n).map(|i| a[i * n + k].norm()).fold(0.0, f64::max)
}

/// Swaps rows and columns `i` and `j`.
fn swap_index(a: &mut [C64], n: usize, i: usize, j: usize) {
    for c in 0..n {
        a.swap(i * n + c, j * n + c);
    }
    for r in 0..n {
        a.swap(r * n + i, r * n + j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_antisymmetric(n: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        m
    }

    /// Sum over perfect matchings with the permutation sign.
    fn pfaffian_by_matchings(a: &Matrix) -> C64 {
        fn rec(a: &Matrix, free: &mut Vec<usize>) -> C64 {
            if free.is_empty() {
                return ONE;
            }
            let i = free.remove(0);
            let mut total = ZERO;
            for k in 0..free.len() {
                let j = free.remove(k);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                total += a[(i, j)] * sign * rec(a, free);
                free.insert(k, j);
            }
            free.insert(0, i);
            total
        }
        rec(a, &mut (0..a.rows()).collect())
    }

    #[test]
    fn two_by_two() {
        let a = C64::new(0.3, -2.0);
        let m = Matrix::from_rows(vec![vec![ZERO, a], vec![-a, ZERO]]).unwrap();
        assert_eq!(pfaffian(&m).unwrap(), a);
    }

    #[test]
    fn four_by_four_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_antisymmetric(4, &mut rng);
        let expected = m[(0, 1)] * m[(2, 3)] - m[(0, 2)] * m[(1, 3)] + m[(0, 3)] * m[(1, 2)];
        assert!((pfaffian(&m).unwrap() - expected).norm() < 1e-14);
    }

    #[test]
    fn square_is_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in [2, 6, 8, 12] {
            let m = random_antisymmetric(n, &mut rng);
            let pf = pfaffian(&m).unwrap();
            let det = m.determinant();
            assert!((pf * pf - det).norm() <= 1e-9 * det.norm().max(1.0));
        }
    }

    #[test]
    fn matches_matching_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in [2, 4, 6, 8] {
            let m = random_antisymmetric(n, &mut rng);
            let pf = pfaffian(&m).unwrap();
            let oracle = pfaffian_by_matchings(&m);
            assert!((pf - oracle).norm() < 1e-12 * oracle.norm().max(1.0));
        }
    }

    #[test]
    fn sparse_matrices_need_deferral() {
        // perfect matching 0-3, 1-2 only: Pf = a03 a12
        let mut m = Matrix::zeros(4, 4);
        let (x, y) = (C64::new(2.0, 0.0), C64::new(0.0, 3.0));
        m[(0, 3)] = x;
        m[(3, 0)] = -x;
        m[(1, 2)] = y;
        m[(2, 1)] = -y;
        assert!((pfaffian(&m).unwrap() - x * y).norm() < 1e-15);
        assert_eq!(pfaffian(&Matrix::zeros(4, 4)).unwrap(), ZERO);
    }

    #[test]
    fn permutation_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = random_antisymmetric(6, &mut rng);
        let perm = [3, 0, 5, 1, 4, 2];
        let mut p = Matrix::zeros(6, 6);
        for (i, &j) in perm.iter().enumerate() {
            p[(j, i)] = ONE;
        }
        let permuted = &(&p.transpose() * &m) * &p;
        let lhs = pfaffian(&permuted).unwrap();
        let rhs = p.determinant() * pfaffian(&m).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn partial_elimination_leaves_schur_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let m = random_antisymmetric(8, &mut rng);
        let full = pfaffian(&m).unwrap();
        let mut data = m.as_slice().to_vec();
        let mut pf = ONE;
        let mut labels: Vec<usize> = (0..8).collect();
        let (done, left) = eliminate_pairs(&mut data, 8, 4, &mut pf, &mut labels);
        assert_eq!((done, left), (4, 0));
        let rest = Matrix::from_rows((4..8).map(|i| data[i * 8 + 4..i * 8 + 8].to_vec()).collect()).unwrap();
        let total = pf * pfaffian(&rest).unwrap();
        assert!((total - full).norm() < 1e-12 * full.norm().max(1.0));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(pfaffian(&Matrix::zeros(3, 3)), Err(Error::OddDimension(3))));
        let mut m = Matrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        m[(1, 0)] = ONE;
        assert!(matches!(pfaffian(&m), Err(Error::NotAntisymmetric(_))));
        assert!(matches!(pfaffian(&Matrix::zeros(2, 3)), Err(Error::ShapeMismatch(_))));
    }
}
