//! Dense linear algebra over exact rationals, plus the few f64 helpers the
//! numeric oracles need. Dimensions here are tiny (at most a few dozen rows),
//! so plain Gaussian elimination is the right tool.

use crate::symexpr::{to_f64, Rat};
use num::{One, Signed, Zero};

/// Row-major exact rational matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c));
        RatMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut m = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn matmul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.rows);
        let mut m = RatMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                if self[(i, k)].is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = &self[(i, k)] * &other[(k, j)];
                    m[(i, j)] += prod;
                }
            }
        }
        m
    }

    /// Reduced row echelon form in place; returns pivot column indices.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row >= self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self[(r, col)].is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self[(row, col)].recip();
            for j in col..self.cols {
                let v = &self[(row, j)] * &inv;
                self[(row, j)] = v;
            }
            for r in 0..self.rows {
                if r != row && !self[(r, col)].is_zero() {
                    let factor = self[(r, col)].clone();
                    for j in col..self.cols {
                        let v = &self[(row, j)] * &factor;
                        self[(r, j)] -= v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::new();
        for &f in &free {
            let mut v = vec![Rat::zero(); self.cols];
            v[f] = Rat::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -m[(r, f)].clone();
            }
            basis.push(v);
        }
        basis
    }

    /// Solve `A x = b`; `None` when inconsistent. Free variables are set to 0.
    pub fn solve(&self, b: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = RatMatrix::zeros(self.rows, self.cols + 1);
        for i in 0..self.rows {
            for j in 0..self.cols {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, self.cols)] = b[i].clone();
        }
        let pivots = aug.rref();
        if pivots.contains(&self.cols) {
            return None; // pivot in the rhs column: inconsistent
        }
        let mut x = vec![Rat::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug[(r, self.cols)].clone();
        }
        Some(x)
    }

    pub fn inverse(&self) -> Option<RatMatrix> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = RatMatrix::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug[(i, j)] = self[(i, j)].clone();
            }
            aug[(i, n + i)] = Rat::one();
        }
        let pivots = aug.rref();
        if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
            return None;
        }
        let mut inv = RatMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                inv[(i, j)] = aug[(i, n + j)].clone();
            }
        }
        Some(inv)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// Signature (positive, negative, null) of a symmetric matrix by exact
    /// congruence diagonalization (symmetric row/column elimination).
    pub fn signature(&self) -> (usize, usize, usize) {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut m = self.clone();
        let (mut pos, mut neg, mut null) = (0, 0, 0);
        let mut active: Vec<usize> = (0..n).collect();
        while let Some(&first) = active.first() {
            // find a nonzero diagonal pivot among active indices
            let pivot = active.iter().copied().find(|&i| !m[(i, i)].is_zero());
            let p = match pivot {
                Some(p) => p,
                None => {
                    // all active diagonal entries are zero: look for a nonzero
                    // off-diagonal pair and fold it onto the diagonal with a
                    // congruence by (row_i += row_j; col_i += col_j)
                    let mut found = None;
                    'search: for (ai, &i) in active.iter().enumerate() {
                        for &j in &active[ai + 1..] {
                            if !m[(i, j)].is_zero() {
                                found = Some((i, j));
                                break 'search;
                            }
                        }
                    }
                    match found {
                        None => {
                            null += active.len();
                            break;
                        }
                        Some((i, j)) => {
                            for k in 0..n {
                                let v = m[(j, k)].clone();
                                m[(i, k)] += v;
                            }
                            for k in 0..n {
                                let v = m[(k, j)].clone();
                                m[(k, i)] += v;
                            }
                            i
                        }
                    }
                }
            };
            let _ = first;
            let d = m[(p, p)].clone();
            if d.is_positive() {
                pos += 1;
            } else {
                neg += 1;
            }
            // eliminate row/column p symmetrically from the other active indices
            let others: Vec<usize> = active.iter().copied().filter(|&i| i != p).collect();
            for &i in &others {
                if m[(i, p)].is_zero() {
                    continue;
                }
                let factor = &m[(i, p)] / &d;
                for k in 0..n {
                    let v = &m[(p, k)] * &factor;
                    m[(i, k)] -= v;
                }
                for k in 0..n {
                    let v = &m[(k, p)] * &factor;
                    m[(k, i)] -= v;
                }
            }
            active = others;
        }
        (pos, neg, null)
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| to_f64(&self[(i, j)])).collect())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

/// Numeric rank of an f64 matrix by Gaussian elimination with partial
/// pivoting; entries below `tol` (relative to the largest entry) are noise.
pub fn f64_rank(mut m: Vec<Vec<f64>>, tol: f64) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let scale = m
        .iter()
        .flatten()
        .fold(0.0f64, |a, &b| a.max(b.abs()))
        .max(1.0);
    let thresh = tol * scale;
    let mut rank = 0;
    let mut row = 0;
    for col in 0..cols {
        if row >= rows {
            break;
        }
        let (p, best) = (row..rows)
            .map(|r| (r, m[r][col].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if best <= thresh {
            continue;
        }
        m.swap(row, p);
        let pivot = m[row].clone();
        for target in m.iter_mut().skip(row + 1) {
            let f = target[col] / pivot[col];
            for (x, pv) in target.iter_mut().zip(&pivot).skip(col) {
                *x -= f * pv;
            }
        }
        rank += 1;
        row += 1;
    }
    rank
}

/// Solve a small square f64 system by Gaussian elimination with partial
/// pivoting; returns `None` when the matrix is numerically singular.
pub fn f64_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    for col in 0..n {
        let (p, best) = (col..n)
            .map(|r| (r, a[r][col].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if best < 1e-14 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        let pivot = a[col].clone();
        for r in col + 1..n {
            let f = a[r][col] / pivot[col];
            for (x, pv) in a[r].iter_mut().zip(&pivot).skip(col) {
                *x -= f * pv;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

pub fn mat3_mul_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += m[i][j] * v[j];
        }
    }
    out
}

pub fn mat3_transpose(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = m[j][i];
        }
    }
    t
}

pub fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
