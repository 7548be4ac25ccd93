use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

const SVD_MAX_SWEEPS: usize = 80;
const SVD_ZERO_REL: f64 = 1e-14;

/// Dense row-major real matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Thin singular value decomposition data: singular values (descending) and the full
/// set of right singular vectors as columns of `v` (`cols × cols`).
#[derive(Clone, Debug)]
pub struct Svd {
    pub values: Vec<f64>,
    pub v: RealMatrix,
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        ensure!(data.len() == rows * cols, "expected {} entries, got {}", rows * cols, data.len());
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        ensure!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    /// Stacks column vectors side by side.
    pub fn from_columns(nrows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        ensure!(columns.iter().all(|c| c.len() == nrows), "column length mismatch");
        let mut m = Self::zeros(nrows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "matvec length mismatch");
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// `selfᵀ y`.
    pub fn tmatvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "tmatvec length mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        ensure!(
            self.rows == other.rows && self.cols == other.cols,
            "shape mismatch: {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Appends the rows of `other` below `self`.
    pub fn vstack(&self, other: &Self) -> Result<Self> {
        ensure!(self.cols == other.cols || self.rows == 0, "vstack column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Self { rows: self.rows + other.rows, cols: other.cols, data })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// One-sided (Hestenes) Jacobi SVD.
    ///
    /// Orthogonalizes the columns of `A V`; the column norms are the singular values.
    /// Works for any shape; null directions appear as zero-norm columns.
    pub fn svd(&self) -> Result<Svd> {
        let (m, n) = (self.rows, self.cols);
        // Column-major working copy of A·V.
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| self.column(j)).collect();
        let mut v = RealMatrix::identity(n);
        // Columns below this squared norm are numerically zero and never rotated.
        let floor = (SVD_ZERO_REL * self.frobenius_norm()).powi(2);
        let mut converged = false;
        for _ in 0..SVD_MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n {
                for q in p + 1..n {
                    let (alpha, beta, gamma) = {
                        let (cp, cq) = (&cols[p], &cols[q]);
                        let mut a = 0.0;
                        let mut b = 0.0;
                        let mut g = 0.0;
                        for i in 0..m {
                            a += cp[i] * cp[i];
                            b += cq[i] * cq[i];
                            g += cp[i] * cq[i];
                        }
                        (a, b, g)
                    };
                    if alpha <= floor || beta <= floor || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (2.0 * gamma);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    let (lo, hi) = cols.split_at_mut(q);
                    let (cp, cq) = (&mut lo[p], &mut hi[0]);
                    for i in 0..m {
                        let x = cp[i];
                        let y = cq[i];
                        cp[i] = c * x - s * y;
                        cq[i] = s * x + c * y;
                    }
                    for i in 0..n {
                        let x = v[(i, p)];
                        let y = v[(i, q)];
                        v[(i, p)] = c * x - s * y;
                        v[(i, q)] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical {
                routine: "svd",
                detail: format!("one-sided Jacobi did not converge in {SVD_MAX_SWEEPS} sweeps ({m}x{n})"),
            });
        }
        let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
        let values = order.iter().map(|&j| norms[j]).collect();
        let mut vs = RealMatrix::zeros(n, n);
        for (new, &old) in order.iter().enumerate() {
            for i in 0..n {
                vs[(i, new)] = v[(i, old)];
            }
        }
        Ok(Svd { values, v: vs })
    }

    /// Largest singular value (operator 2-norm).
    pub fn spectral_norm(&self) -> Result<f64> {
        Ok(self.svd()?.values.first().copied().unwrap_or(0.0))
    }

    /// Solves `self · x = b` for symmetric positive definite `self` by Cholesky.
    pub fn solve_spd(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.rows;
        ensure!(self.cols == n && b.len() == n, "solve_spd shape mismatch");
        let mut l = RealMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = self[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::Degenerate(format!("matrix not positive definite at pivot {j}")));
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / d;
            }
        }
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= l[(i, k)] * y[k];
            }
            y[i] /= l[(i, i)];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= l[(k, i)] * y[k];
            }
            y[i] /= l[(i, i)];
        }
        Ok(y)
    }
}

impl Svd {
    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let top = self.values.first().copied().unwrap_or(0.0);
        self.values.iter().filter(|&&s| s > rel_tol * top && s > 0.0).count()
    }

    /// Right singular vectors spanning the numerical kernel.
    pub fn kernel(&self, rel_tol: f64) -> Vec<Vec<f64>> {
        let r = self.rank(rel_tol);
        (r..self.v.cols()).map(|j| self.v.column(j)).collect()
    }

    /// Ratio of the smallest retained to the largest discarded singular value, `None`
    /// when nothing is discarded.
    pub fn gap_at(&self, rank: usize) -> Option<f64> {
        if rank == 0 || rank >= self.values.len() {
            return None;
        }
        let kept = self.values[rank - 1];
        let dropped = self.values[rank];
        Some(if dropped == 0.0 { f64::INFINITY } else { kept / dropped })
    }
}

impl Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rows: usize, cols: usize, seed: u64) -> RealMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
        RealMatrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn svd_reconstructs_gram_matrix() {
        for (r, c) in [(6, 4), (3, 7), (5, 5), (1, 3)] {
            let a = gaussian(r, c, (r * 10 + c) as u64);
            let svd = a.svd().unwrap();
            // AᵀA = V Σ² Vᵀ
            let ata = a.transpose().matmul(&a);
            let mut sigma2 = RealMatrix::zeros(c, c);
            for i in 0..c {
                sigma2[(i, i)] = svd.values[i] * svd.values[i];
            }
            let rebuilt = svd.v.matmul(&sigma2).matmul(&svd.v.transpose());
            assert!(rebuilt.sub(&ata).unwrap().max_abs() < 1e-10);
            let vtv = svd.v.transpose().matmul(&svd.v);
            assert!(vtv.sub(&RealMatrix::identity(c)).unwrap().max_abs() < 1e-12);
            assert_eq!(svd.rank(1e-10), r.min(c));
        }
    }

    #[test]
    fn kernel_of_wide_matrix() {
        let a = gaussian(2, 5, 77);
        let svd = a.svd().unwrap();
        let ker = svd.kernel(1e-10);
        assert_eq!(ker.len(), 3);
        for k in &ker {
            assert!(a.matvec(k).iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = RealMatrix::from_rows(&[vec![0.0, 3.0], vec![-2.0, 0.0]]).unwrap();
        let svd = a.svd().unwrap();
        assert!((svd.values[0] - 3.0).abs() < 1e-15 && (svd.values[1] - 2.0).abs() < 1e-15);
        assert_eq!(svd.gap_at(1), Some(1.5));
        assert_eq!(svd.gap_at(2), None);
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let g = gaussian(6, 4, 5);
        let mut a = g.transpose().matmul(&g);
        for i in 0..4 {
            a[(i, i)] += 0.1;
        }
        let x = vec![1.0, -2.0, 0.5, 3.0];
        let b = a.matvec(&x);
        let sol = a.solve_spd(&b).unwrap();
        assert!(sol.iter().zip(&x).all(|(s, t)| (s - t).abs() < 1e-10));
        assert!(RealMatrix::from_rows(&[vec![-1.0]]).unwrap().solve_spd(&[1.0]).is_err());
    }
}
