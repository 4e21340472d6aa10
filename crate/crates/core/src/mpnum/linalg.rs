//! Small dense linear algebra on [`Float`] entries.

use std::ops::{Index, IndexMut};

use rug::Float;

use super::{MpError, PrecisionContext};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Float>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![Float::new(prec); rows * cols],
        }
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        let mut m = Matrix::zeros(n, n, prec);
        for i in 0..n {
            m[(i, i)] = Float::with_val(prec, 1);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Float>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_f64(prec: u32, rows: &[&[f64]]) -> Self {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Float::with_val(prec, v)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Float] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows, self.prec());
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let prec = self.prec();
        let mut out = Matrix::zeros(self.rows, other.cols, prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = Float::with_val(prec, a * &other[(k, j)]);
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    fn prec(&self) -> u32 {
        self.data.first().map_or(64, Float::prec)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Float;
    fn index(&self, (i, j): (usize, usize)) -> &Float {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Float {
        &mut self.data[i * self.cols + j]
    }
}

/// `M = L·diag(d)·U` with `L` unit lower and `U` unit upper triangular.
#[derive(Clone, Debug, PartialEq)]
pub struct Ldu {
    pub l: Matrix,
    pub d: Vec<Float>,
    pub u: Matrix,
}

impl Ldu {
    pub fn reconstruct(&self) -> Matrix {
        let mut lu = self.l.clone();
        for i in 0..lu.rows() {
            for j in 0..lu.cols() {
                lu[(i, j)] *= &self.d[j];
            }
        }
        lu.mul(&self.u)
    }
}

/// Unpivoted Gaussian elimination. The k-th pivot is the ratio of the
/// k-th and (k−1)-th leading principal minors; it is rejected when it has
/// cancelled to below `10^-(digits-8)` of the original diagonal entry.
pub fn ldu_bidiagonalize(m: &Matrix, ctx: &PrecisionContext) -> Result<Ldu, MpError> {
    let n = m.rows();
    if n != m.cols() {
        return Err(MpError::InvalidArgument(format!(
            "LDU needs a square matrix, got {}x{}",
            n,
            m.cols()
        )));
    }
    let prec = ctx.prec();
    let cutoff = ctx.pow10(-(ctx.digits as i32) + 8);
    let mut a = m.clone();
    let mut l = Matrix::identity(n, prec);
    let mut u = Matrix::identity(n, prec);
    let mut d = Vec::with_capacity(n);
    for k in 0..n {
        let pivot = a[(k, k)].clone();
        let scale = Float::with_val(prec, m[(k, k)].abs_ref());
        if pivot.is_zero() || Float::with_val(prec, pivot.abs_ref()) <= scale * &cutoff {
            return Err(MpError::SingularMinor(k));
        }
        for i in k + 1..n {
            l[(i, k)] = Float::with_val(prec, &a[(i, k)] / &pivot);
        }
        for j in k + 1..n {
            u[(k, j)] = Float::with_val(prec, &a[(k, j)] / &pivot);
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let upd = Float::with_val(prec, &l[(i, k)] * &a[(k, j)]);
                a[(i, j)] -= upd;
            }
        }
        d.push(pivot);
    }
    Ok(Ldu { l, d, u })
}

/// Inverse of a unit lower triangular matrix by forward substitution.
pub fn lower_unit_inverse(l: &Matrix) -> Matrix {
    let n = l.rows();
    let prec = l.prec();
    let mut inv = Matrix::identity(n, prec);
    for i in 0..n {
        for j in 0..i {
            let mut s = Float::new(prec);
            for k in j..i {
                s += Float::with_val(prec, &l[(i, k)] * &inv[(k, j)]);
            }
            inv[(i, j)] = -s;
        }
    }
    inv
}

/// Inverse of a unit upper triangular matrix.
pub fn upper_unit_inverse(u: &Matrix) -> Matrix {
    lower_unit_inverse(&u.transpose()).transpose()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve_dense(a: &Matrix, b: &[Float]) -> Result<Vec<Float>, MpError> {
    let n = a.rows();
    if n != a.cols() || n != b.len() {
        return Err(MpError::InvalidArgument("dimension mismatch in solve".into()));
    }
    let prec = a.prec().max(b.first().map_or(64, Float::prec));
    let mut m = a.clone();
    let mut rhs: Vec<Float> = b.to_vec();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| {
                m[(i, k)]
                    .clone()
                    .abs()
                    .partial_cmp(&m[(j, k)].clone().abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty range");
        if m[(piv, k)].is_zero() {
            return Err(MpError::SingularMinor(k));
        }
        if piv != k {
            for j in 0..n {
                let tmp = m[(k, j)].clone();
                m[(k, j)] = m[(piv, j)].clone();
                m[(piv, j)] = tmp;
            }
            rhs.swap(k, piv);
        }
        for i in k + 1..n {
            let f = Float::with_val(prec, &m[(i, k)] / &m[(k, k)]);
            for j in k..n {
                let upd = Float::with_val(prec, &f * &m[(k, j)]);
                m[(i, j)] -= upd;
            }
            let upd = Float::with_val(prec, &f * &rhs[k]);
            rhs[i] -= upd;
        }
    }
    let mut x = vec![Float::new(prec); n];
    for i in (0..n).rev() {
        let mut s = rhs[i].clone();
        for j in i + 1..n {
            s -= Float::with_val(prec, &m[(i, j)] * &x[j]);
        }
        x[i] = s / &m[(i, i)];
    }
    Ok(x)
}
