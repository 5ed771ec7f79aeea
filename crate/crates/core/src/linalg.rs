//! Fixed-size complex matrices and a small dense eigenvalue solver.
//!
//! Everything here is sized at compile time; the walk only ever needs 2×2
//! coin blocks and the 4×4 Fourier-space generator.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major square complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat<const N: usize>(pub [[C64; N]; N]);

pub type Mat2 = Mat<2>;
pub type Mat4 = Mat<4>;

impl<const N: usize> Default for Mat<N> {
    fn default() -> Self {
        Self::zeros()
    }
}

impl<const N: usize> Mat<N> {
    pub fn zeros() -> Self {
        Mat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_diag(d: [C64; N]) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn conj(&self) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z = z.conj());
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    pub fn mul_vec(&self, v: &[C64; N]) -> [C64; N] {
        let mut out = [ZERO; N];
        for (o, row) in out.iter_mut().zip(&self.0) {
            *o = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |(M M* − I)_ij|`.
    pub fn unitarity_residual(&self) -> f64 {
        (*self * self.adjoint() - Self::identity()).max_abs()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> C64 {
        let mut a = self.0;
        let mut det = ONE;
        for col in 0..N {
            let pivot = (col..N)
                .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
                .unwrap_or(col);
            if a[pivot][col] == ZERO {
                return ZERO;
            }
            if pivot != col {
                a.swap(pivot, col);
                det = -det;
            }
            det *= a[col][col];
            for row in col + 1..N {
                let f = a[row][col] / a[col][col];
                for k in col..N {
                    let v = a[col][k];
                    a[row][k] -= f * v;
                }
            }
        }
        det
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zeros();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                for j in 0..N {
                    out.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        out
    }
}

/// Kronecker product of two 2×2 blocks, indexed `(2i + k, 2j + l)`.
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out.0[2 * i + k][2 * j + l] = a.0[i][j] * b.0[k][l];
                }
            }
        }
    }
    out
}

const EIG_MAX_ITER: usize = 500;

/// Eigenvalues of a small dense complex matrix.
///
/// Householder reduction to upper Hessenberg form followed by single-shift
/// complex QR sweeps (Wilkinson shift, Givens rotations) with deflation.
/// Eigenvalues come out in deflation order, bottom of the matrix first.
pub fn eigenvalues<const N: usize>(m: &Mat<N>) -> Result<[C64; N]> {
    if m.0.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidParameter(
            "eigenvalue input has non-finite entries".into(),
        ));
    }
    let mut h = m.0;
    hessenberg(&mut h);

    let mut out = [ZERO; N];
    if N == 0 {
        return Ok(out);
    }
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut hi = N - 1;
    let mut iter = 0usize;
    let mut since_deflation = 0usize;
    loop {
        if hi == 0 {
            out[0] = h[0][0];
            break;
        }
        // Locate the top of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let off = h[lo][lo - 1].norm();
            let diag = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            let reference = if diag > 0.0 { diag } else { scale };
            if off <= f64::EPSILON * reference {
                h[lo][lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            out[hi] = h[hi][hi];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iter += 1;
        since_deflation += 1;
        if iter > EIG_MAX_ITER {
            return Err(Error::NonConvergence { iterations: EIG_MAX_ITER });
        }
        let shift = if since_deflation % 11 == 10 {
            // exceptional shift to break cycles
            h[hi][hi] + C64::new(0.75 * h[hi][hi - 1].norm(), 0.0)
        } else {
            wilkinson_shift(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        };
        qr_sweep(&mut h, lo, hi, shift);
    }
    Ok(out)
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let (l1, l2) = (half_tr + root, half_tr - root);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// One explicit shifted QR step on the active window `lo..=hi`.
fn qr_sweep<const N: usize>(h: &mut [[C64; N]; N], lo: usize, hi: usize, shift: C64) {
    for i in lo..=hi {
        h[i][i] -= shift;
    }
    let mut rotations = [(ZERO, ZERO); N];
    for k in lo..hi {
        let (x, y) = (h[k][k], h[k + 1][k]);
        let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
        let (c, s) = if r == 0.0 {
            (ONE, ZERO)
        } else {
            (x / r, y / r)
        };
        // G = [[c̄, s̄], [−s, c]] applied from the left to rows k, k+1.
        for j in k..=hi {
            let (u, v) = (h[k][j], h[k + 1][j]);
            h[k][j] = c.conj() * u + s.conj() * v;
            h[k + 1][j] = -s * u + c * v;
        }
        rotations[k] = (c, s);
    }
    for k in lo..hi {
        let (c, s) = rotations[k];
        // Right-multiply by G* on columns k, k+1.
        for i in lo..=(k + 2).min(hi) {
            let (u, v) = (h[i][k], h[i][k + 1]);
            h[i][k] = u * c + v * s;
            h[i][k + 1] = -u * s.conj() + v * c.conj();
        }
    }
    for i in lo..=hi {
        h[i][i] += shift;
    }
}

fn hessenberg<const N: usize>(h: &mut [[C64; N]; N]) {
    if N < 3 {
        return;
    }
    for k in 0..N - 2 {
        let alpha_norm = (k + 1..N).map(|i| h[i][k].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let mut v = [ZERO; N];
        for i in k + 1..N {
            v[i] = h[i][k];
        }
        v[k + 1] += phase * alpha_norm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H ← (I − 2vv*/v*v) H (I − 2vv*/v*v)
        for j in 0..N {
            let dot: C64 = (k + 1..N).map(|i| v[i].conj() * h[i][j]).sum();
            let f = dot * (2.0 / vnorm2);
            for i in k + 1..N {
                h[i][j] -= v[i] * f;
            }
        }
        for i in 0..N {
            let dot: C64 = (k + 1..N).map(|j| h[i][j] * v[j]).sum();
            let f = dot * (2.0 / vnorm2);
            for j in k + 1..N {
                h[i][j] -= f * v[j].conj();
            }
        }
        for i in k + 2..N {
            h[i][k] = ZERO;
        }
    }
}
