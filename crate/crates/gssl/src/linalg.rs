//! Dense LU factorization with partial pivoting.
//!
//! Small and dependency-free; the systems solved here are the
//! `(I - T_uu)` blocks of desk-scale transition matrices.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};

/// LU factors of a square matrix, `P A = L U` with unit lower triangle.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: Array2<f64>,
    perm: Vec<usize>,
    condition_estimate: f64,
}

impl LuFactors {
    /// Factorize with partial pivoting. Fails only on a (numerically) zero
    /// pivot, i.e. an exactly singular system. Ill-conditioned systems are
    /// solved anyway — a hyper-local kernel routinely produces
    /// near-isolated inputs whose rows are close to singular yet decouple
    /// harmlessly — and the pivot-ratio condition estimate is kept for
    /// diagnostics.
    pub fn factorize(a: Array2<f64>) -> Result<LuFactors> {
        let n = a.nrows();
        if n != a.ncols() {
            return Err(Error::invalid("matrix must be square"));
        }
        let mut lu = a;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut max_pivot: f64 = 0.0;
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_val = lu[[k, k]].abs();
            for r in (k + 1)..n {
                let v = lu[[r, k]].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = r;
                }
            }
            if pivot_val < 1e-300 {
                return Err(Error::SingularSystem {
                    condition_estimate: f64::INFINITY,
                });
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for c in 0..n {
                    let tmp = lu[[k, c]];
                    lu[[k, c]] = lu[[pivot_row, c]];
                    lu[[pivot_row, c]] = tmp;
                }
            }
            max_pivot = max_pivot.max(pivot_val);
            min_pivot = min_pivot.min(pivot_val);
            let pivot = lu[[k, k]];
            for r in (k + 1)..n {
                let factor = lu[[r, k]] / pivot;
                lu[[r, k]] = factor;
                for c in (k + 1)..n {
                    lu[[r, c]] -= factor * lu[[k, c]];
                }
            }
        }
        Ok(LuFactors {
            lu,
            perm,
            condition_estimate: max_pivot / min_pivot,
        })
    }

    /// Ratio of the extreme pivot magnitudes; a cheap lower bound on the
    /// true condition number.
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    /// Solve `A x = b` using the stored factors.
    pub fn solve(&self, b: ArrayView1<'_, f64>) -> Array1<f64> {
        let n = self.lu.nrows();
        debug_assert_eq!(b.len(), n);
        let mut x = Array1::zeros(n);
        // Forward substitution on the permuted right-hand side.
        for i in 0..n {
            let mut sum = b[self.perm[i]];
            for j in 0..i {
                sum -= self.lu[[i, j]] * x[j];
            }
            x[i] = sum;
        }
        // Back substitution.
        for i in (0..n).rev() {
            let mut sum = x[i];
            for j in (i + 1)..n {
                sum -= self.lu[[i, j]] * x[j];
            }
            x[i] = sum / self.lu[[i, i]];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn solves_a_known_system() {
        let a = array![[2.0, 1.0], [1.0, 3.0]];
        let f = LuFactors::factorize(a.clone()).unwrap();
        let x = f.solve(array![5.0, 10.0].view());
        let r = a.dot(&x);
        assert!((r[0] - 5.0).abs() < 1e-12);
        assert!((r[1] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = array![[0.0, 1.0], [1.0, 0.0]];
        let f = LuFactors::factorize(a).unwrap();
        let x = f.solve(array![3.0, 7.0].view());
        assert!((x[0] - 7.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        match LuFactors::factorize(a) {
            Err(crate::error::Error::SingularSystem { .. }) => {}
            other => panic!("expected singular system, got {other:?}"),
        }
    }

    #[test]
    fn random_round_trips() {
        use crate::seeding::rng_from_seed;
        use rand::Rng;
        let mut rng = rng_from_seed(31);
        for _ in 0..20 {
            let n = rng.random_range(1..30);
            let mut a = Array2::zeros((n, n));
            for v in a.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            // Diagonal dominance keeps these well conditioned.
            for i in 0..n {
                a[[i, i]] += n as f64;
            }
            let mut b = Array1::zeros(n);
            for v in b.iter_mut() {
                *v = rng.random_range(-1.0..1.0);
            }
            let x = LuFactors::factorize(a.clone()).unwrap().solve(b.view());
            let r = a.dot(&x) - &b;
            let err = r.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(err < 1e-10, "residual {err}");
        }
    }
}
