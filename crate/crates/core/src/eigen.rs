//! Dense symmetric eigensolver by cyclic Jacobi rotations.

/// Off-diagonal Frobenius norm below which the matrix counts as diagonal.
pub const JACOBI_TOLERANCE: f64 = 1e-10;

/// Maximum number of full sweeps over the upper triangle.
pub const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum EigenError {
    #[error("matrix has {len} values, expected {n}x{n}")]
    Shape { n: usize, len: usize },
    #[error("matrix is not symmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("matrix contains non-finite values")]
    NonFinite,
    #[error(
        "Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal norm {off_norm:e})"
    )]
    NotConverged { sweeps: usize, off_norm: f64 },
}

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Row-major `n x n`; column `k` is the eigenvector of `values[k]`.
    pub vectors: Vec<f64>,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<f64> {
        let n = self.n();
        (0..n).map(|r| self.vectors[r * n + k]).collect()
    }

    /// `V diag(values) V^T`, row-major.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n)
                    .map(|k| self.vectors[i * n + k] * self.values[k] * self.vectors[j * n + k])
                    .sum();
            }
        }
        out
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            sum += 2.0 * a[i * n + j] * a[i * n + j];
        }
    }
    sum.sqrt()
}

/// Diagonalizes the row-major symmetric matrix `matrix` (`n x n`).
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<SymmetricEigen, EigenError> {
    if matrix.len() != n * n {
        return Err(EigenError::Shape {
            n,
            len: matrix.len(),
        });
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (matrix[i * n + j], matrix[j * n + i]);
            if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                return Err(EigenError::Asymmetric { i, j });
            }
        }
    }

    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a, n);
    while off > JACOBI_TOLERANCE {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(EigenError::NotConverged {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                // Rotation angle that annihilates a[p][q]; t is the smaller root.
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        off = off_diagonal_norm(&a, n);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y]).then(x.cmp(&y)));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        for r in 0..n {
            vectors[r * n + col] = v[r * n + k];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two() {
        let e = symmetric_eigen(&[2.0, 1.0, 1.0, 2.0], 2).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
        let v = e.vector(1);
        assert!((v[0].abs() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn diagonal_input_needs_no_sweeps() {
        let e = symmetric_eigen(&[3.0, 0.0, 0.0, -1.0], 2).unwrap();
        assert_eq!(e.values, vec![-1.0, 3.0]);
        assert_eq!(e.sweeps, 0);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let n = 6;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 7 + j * 3) % 11) as f64 / 5.0 - 1.0;
                m[i * n + j] = x;
                m[j * n + i] = x;
            }
        }
        let e = symmetric_eigen(&m, n).unwrap();
        let r = e.reconstruct();
        for (x, y) in r.iter().zip(&m) {
            assert!((x - y).abs() < 1e-9);
        }
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n)
                    .map(|r| e.vectors[r * n + a] * e.vectors[r * n + b])
                    .sum();
                assert!((dot - if a == b { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            symmetric_eigen(&[1.0], 2),
            Err(EigenError::Shape { .. })
        ));
        assert!(matches!(
            symmetric_eigen(&[0.0, 1.0, 2.0, 0.0], 2),
            Err(EigenError::Asymmetric { .. })
        ));
        assert_eq!(symmetric_eigen(&[f64::NAN], 1), Err(EigenError::NonFinite));
    }
}
