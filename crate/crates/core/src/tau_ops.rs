//! Calculus on `2 pi`-periodic functions of the fast variable: the average
//! `Pi`, the mean-zero antiderivatives `L^{-1}(I - Pi)` and `L^{-2}(I - Pi)`,
//! and the closed-form oscillation matrices `A(tau)`, `B(tau)`, `C`.
//!
//! Everything is computed through the discrete `tau`-Fourier transform, which
//! is exact for trigonometric polynomials resolved by the grid.

use std::ops::{Add, Mul, Sub};

use crate::field::{SpinorField, TwoScaleField};
use crate::spectral::{FftPair, TauGrid, C64, I};

/// Complex 2x2 matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        Self::new(one, C64::default(), C64::default(), one)
    }

    pub fn diag(a: C64, d: C64) -> Self {
        Self::new(a, C64::default(), C64::default(), d)
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Self::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn max_abs_diff(&self, other: &Mat2) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.0[r][c] - other.0[r][c]).norm());
            }
        }
        d
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[C64::default(); 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        Mat2(out)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut out = self;
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] += o.0[r][c];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + o.scale(C64::new(-1.0, 0.0))
    }
}

/// Pauli matrix `alpha`.
pub fn alpha() -> Mat2 {
    let one = C64::new(1.0, 0.0);
    Mat2::new(C64::default(), one, one, C64::default())
}

/// Pauli matrix `beta`.
pub fn beta() -> Mat2 {
    Mat2::diag(C64::new(1.0, 0.0), C64::new(-1.0, 0.0))
}

/// `A(tau) = [[0, e^{2i tau}], [e^{-2i tau}, 0]]`.
pub fn a_matrix(tau: f64) -> Mat2 {
    let e = C64::from_polar(1.0, 2.0 * tau);
    Mat2::new(C64::default(), e, e.conj(), C64::default())
}

/// `B(tau) = L^{-1} A = -(i/2) [[0, e^{2i tau}], [-e^{-2i tau}, 0]]`.
pub fn b_matrix(tau: f64) -> Mat2 {
    let e = C64::from_polar(1.0, 2.0 * tau);
    Mat2::new(C64::default(), e, -e.conj(), C64::default()).scale(-I * 0.5)
}

/// `C = A(tau) B(tau) = (i/2) diag(1, -1)`.
pub fn c_matrix() -> Mat2 {
    Mat2::diag(I * 0.5, -I * 0.5)
}

/// `(A(tau), B(tau), C)`.
pub fn osc_matrices(tau: f64) -> (Mat2, Mat2, Mat2) {
    (a_matrix(tau), b_matrix(tau), c_matrix())
}

/// Average over the grid, i.e. the zeroth Fourier coefficient.
pub fn pi_avg_samples(h: &[C64]) -> C64 {
    h.iter().sum::<C64>() / h.len() as f64
}

fn antiderivative_samples(h: &[C64], power: i32) -> Vec<C64> {
    let n = h.len();
    let fft = FftPair::new(n);
    let mut buf = h.to_vec();
    fft.forward(&mut buf);
    buf[0] = C64::default();
    for (k, c) in buf.iter_mut().enumerate().skip(1) {
        let l = crate::spectral::signed_mode(k, n) as f64;
        *c /= (I * l).powi(power);
    }
    fft.inverse(&mut buf);
    buf
}

/// `L^{-1}(I - Pi) h` on grid samples.
pub fn linv_samples(h: &[C64]) -> Vec<C64> {
    antiderivative_samples(h, 1)
}

/// `L^{-2}(I - Pi) h` on grid samples.
pub fn linv2_samples(h: &[C64]) -> Vec<C64> {
    antiderivative_samples(h, 2)
}

/// Matrix-valued samples `M(tau_j)`.
pub fn sample_matrix_fn(grid: &TauGrid, f: impl Fn(f64) -> Mat2) -> Vec<Mat2> {
    grid.points().into_iter().map(f).collect()
}

fn entrywise(ms: &[Mat2], op: impl Fn(&[C64]) -> Vec<C64>) -> Vec<Mat2> {
    let mut out = vec![Mat2::default(); ms.len()];
    for r in 0..2 {
        for c in 0..2 {
            let col: Vec<C64> = ms.iter().map(|m| m.0[r][c]).collect();
            for (o, v) in out.iter_mut().zip(op(&col)) {
                o.0[r][c] = v;
            }
        }
    }
    out
}

pub fn pi_avg_matrix(ms: &[Mat2]) -> Mat2 {
    let mut out = Mat2::default();
    for r in 0..2 {
        for c in 0..2 {
            let col: Vec<C64> = ms.iter().map(|m| m.0[r][c]).collect();
            out.0[r][c] = pi_avg_samples(&col);
        }
    }
    out
}

pub fn linv_matrix(ms: &[Mat2]) -> Vec<Mat2> {
    entrywise(ms, linv_samples)
}

pub fn linv2_matrix(ms: &[Mat2]) -> Vec<Mat2> {
    entrywise(ms, linv2_samples)
}

/// Apply a per-`x`-column transform along `tau` to both components.
fn along_tau(u: &TwoScaleField, op: impl Fn(&mut [C64], &FftPair)) -> TwoScaleField {
    let nt = u.tau_grid().len();
    let nx = u.space_grid().len();
    let fft = FftPair::new(nt);
    let mut out = u.clone();
    let mut col = vec![C64::default(); nt];
    for comp in 0..2 {
        let data = out.component_mut(comp);
        for m in 0..nx {
            for j in 0..nt {
                col[j] = data[j * nx + m];
            }
            op(&mut col, &fft);
            for j in 0..nt {
                data[j * nx + m] = col[j];
            }
        }
    }
    out
}

fn antiderivative(u: &TwoScaleField, power: i32) -> TwoScaleField {
    along_tau(u, |col, fft| {
        let n = col.len();
        fft.forward(col);
        col[0] = C64::default();
        for (k, c) in col.iter_mut().enumerate().skip(1) {
            let l = crate::spectral::signed_mode(k, n) as f64;
            *c /= (I * l).powi(power);
        }
        fft.inverse(col);
    })
}

/// `Pi u`: the `tau`-average of every `x`-column.
pub fn pi_avg(u: &TwoScaleField) -> SpinorField {
    let nt = u.tau_grid().len();
    let mut out = u.row(0);
    for j in 1..nt {
        out = &out + &u.row(j);
    }
    &out * (1.0 / nt as f64)
}

/// `L^{-1}(I - Pi) u`, mean-zero in `tau`.
pub fn linv(u: &TwoScaleField) -> TwoScaleField {
    antiderivative(u, 1)
}

/// `L^{-2}(I - Pi) u`, mean-zero in `tau`.
pub fn linv2(u: &TwoScaleField) -> TwoScaleField {
    antiderivative(u, 2)
}

/// `(I - Pi) u`.
pub fn remove_mean(u: &TwoScaleField) -> TwoScaleField {
    let mean = TwoScaleField::broadcast(*u.tau_grid(), &pi_avg(u));
    u - &mean
}

/// Exact spectral `partial_tau` of every `x`-column.
pub fn dtau(u: &TwoScaleField) -> TwoScaleField {
    along_tau(u, |col, fft| {
        let n = col.len();
        fft.forward(col);
        for (k, c) in col.iter_mut().enumerate() {
            *c *= I * crate::spectral::signed_mode(k, n) as f64;
        }
        fft.inverse(col);
    })
}
