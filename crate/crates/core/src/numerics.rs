//! Dense complex linear algebra used by every detector.
//!
//! Matrices at the scales this crate targets have order at most a few
//! dozen, so everything is plain row-major storage and direct solves.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVector = Vec<C64>;

/// Relative residual bound checked (in debug builds) after every solve.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-10;
/// Absolute tolerance used when checking that a matrix is Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {}x{} matrix",
                data.len(),
                rows,
                cols
            )));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CMatrix { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn conj_transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    /// `self · x`.
    pub fn mul_vec(&self, x: &[C64]) -> CVector {
        assert_eq!(x.len(), self.cols, "mul_vec: dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(C64::new(0.0, 0.0), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `selfᴴ · y`, without forming the conjugate transpose.
    pub fn conj_mul_vec(&self, y: &[C64]) -> CVector {
        assert_eq!(y.len(), self.rows, "conj_mul_vec: dimension mismatch");
        let mut out = vec![C64::new(0.0, 0.0); self.cols];
        for (r, yr) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * yr;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (i..self.cols).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol)
            })
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// `Hᴴ H`. Only the upper triangle is computed; the lower is mirrored so
/// the result is exactly Hermitian.
pub fn gram(h: &CMatrix) -> CMatrix {
    let n = h.cols();
    let mut g = CMatrix::zeros(n, n);
    for r in 0..h.rows() {
        let row = h.row(r);
        for i in 0..n {
            let a = row[i].conj();
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for j in i..n {
                g[(i, j)] += a * row[j];
            }
        }
    }
    for i in 0..n {
        g[(i, i)].im = 0.0;
        for j in (i + 1)..n {
            g[(j, i)] = g[(i, j)].conj();
        }
    }
    g
}

/// Cholesky factor `L` of `G·scale + shift·I`, reusable across many
/// right-hand sides.
#[derive(Clone, Debug)]
pub struct HermitianFactor {
    n: usize,
    // Lower triangle, row-major, full n×n storage.
    l: Vec<C64>,
    #[cfg(debug_assertions)]
    system: CMatrix,
}

impl HermitianFactor {
    pub fn new(g: &CMatrix, scale: f64, shift: f64) -> Result<Self> {
        if g.rows() != g.cols() {
            return Err(Error::Dimension(format!(
                "system matrix is {}x{}, expected square",
                g.rows(),
                g.cols()
            )));
        }
        let n = g.rows();
        let mut l = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = g[(i, j)] * scale;
                if i == j {
                    sum += shift;
                }
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k].conj();
                }
                if i == j {
                    let d = sum.re;
                    if !(d > 0.0) || !d.is_finite() {
                        return Err(Error::Singular(format!(
                            "non-positive pivot {d:e} at row {i}"
                        )));
                    }
                    l[i * n + i] = C64::new(d.sqrt(), 0.0);
                } else {
                    l[i * n + j] = sum / l[j * n + j].re;
                }
            }
        }
        Ok(HermitianFactor {
            n,
            l,
            #[cfg(debug_assertions)]
            system: {
                let mut s = g.clone();
                for z in s.as_mut_slice() {
                    *z *= scale;
                }
                for i in 0..n {
                    s[(i, i)] += shift;
                }
                s
            },
        })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[C64]) -> CVector {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [C64]) {
        let n = self.n;
        assert_eq!(x.len(), n, "solve: dimension mismatch");
        #[cfg(debug_assertions)]
        let b = x.to_vec();
        // L y = b
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.l[i * n + k] * x[k];
            }
            x[i] = s / self.l[i * n + i].re;
        }
        // Lᴴ x = y
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.l[k * n + i].conj() * x[k];
            }
            x[i] = s / self.l[i * n + i].re;
        }
        #[cfg(debug_assertions)]
        {
            // Normwise backward error; a plain ‖b‖-relative bound is not
            // attainable once the shift is tiny and the system ill-conditioned.
            let ax = self.system.mul_vec(x);
            let res = norm2(&ax.iter().zip(&b).map(|(a, c)| a - c).collect::<Vec<_>>());
            let a_norm = norm2(self.system.as_slice());
            let bound = SOLVE_RESIDUAL_TOL * (a_norm * norm2(x) + norm2(&b));
            debug_assert!(res <= bound, "solve residual {res:e} exceeds {bound:e}");
        }
    }
}

/// Solves `(G·scale + shift·I) x = b`.
pub fn regularized_hermitian_solve(g: &CMatrix, scale: f64, shift: f64, b: &[C64]) -> Result<CVector> {
    if b.len() != g.rows() {
        return Err(Error::Dimension(format!(
            "rhs length {} for order-{} system",
            b.len(),
            g.rows()
        )));
    }
    Ok(HermitianFactor::new(g, scale, shift)?.solve(b))
}

/// Clamps the real part of entry `k` to `[-alpha[k], alpha[k]]` and the
/// imaginary part to `[-beta[k], beta[k]]`.
pub fn box_project(v: &[C64], alpha: &[f64], beta: &[f64]) -> CVector {
    let mut out = v.to_vec();
    box_project_in_place(&mut out, alpha, beta);
    out
}

pub fn box_project_in_place(v: &mut [C64], alpha: &[f64], beta: &[f64]) {
    assert!(
        v.len() == alpha.len() && v.len() == beta.len(),
        "box_project: bounds length mismatch"
    );
    for ((z, &a), &b) in v.iter_mut().zip(alpha).zip(beta) {
        z.re = z.re.clamp(-a, a);
        z.im = z.im.clamp(-b, b);
    }
}

pub fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm2_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm1(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).sum()
}
