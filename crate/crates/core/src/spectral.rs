//! Periodic grids in `x` and in the fast variable `tau`, together with the
//! Fourier machinery built on them.
//!
//! Both directions use the same conventions:
//!
//! * the forward transform carries the `1/N` factor,
//!   `c_l = (1/N) sum_j u_j exp(-i mu_l (x_j - a))`, so that the synthesis
//!   `u(x) = sum_l c_l exp(i mu_l (x - a))` reproduces the samples exactly;
//! * coefficients are kept in FFT order; index `k >= N/2` stands for the
//!   negative mode `l = k - N`. The single Nyquist index `k = N/2` is mode
//!   `l = -N/2`; there is no `+N/2` mode.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::field::{SpinorField, TwoScaleField};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Signed mode number of FFT index `k` on an `n`-point grid.
#[inline]
pub fn signed_mode(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// FFT index of the signed mode `l` (`-n/2 <= l < n/2`).
#[inline]
pub fn fft_index(l: i64, n: usize) -> usize {
    l.rem_euclid(n as i64) as usize
}

/// Uniform periodic grid on `[a, b)` with `n` points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    a: f64,
    b: f64,
    n: usize,
}

impl SpaceGrid {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= a {
            return invalid(format!("space grid needs a < b, got a={a}, b={b}"));
        }
        if n < 4 || n % 2 != 0 {
            return invalid(format!("space grid size N must be even and >= 4, got {n}"));
        }
        Ok(Self { a, b, n })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn dx(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.a + j as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// `mu_l = 2 pi l / (b - a)`.
    pub fn mu(&self, l: i64) -> f64 {
        2.0 * PI * l as f64 / (self.b - self.a)
    }

    /// Wave number carried by FFT index `k`.
    pub fn mu_at(&self, k: usize) -> f64 {
        self.mu(signed_mode(k, self.n))
    }

    /// Wave numbers in ascending mode order `l = -N/2 .. N/2-1`.
    pub fn modes(&self) -> Vec<f64> {
        let half = (self.n / 2) as i64;
        (-half..half).map(|l| self.mu(l)).collect()
    }

    /// Whether `self` is `other` refined by an integer factor on the same interval.
    pub fn refinement_factor(&self, coarse: &SpaceGrid) -> Option<usize> {
        if self.a != coarse.a || self.b != coarse.b || self.n % coarse.n != 0 {
            return None;
        }
        Some(self.n / coarse.n)
    }
}

impl fmt::Display for SpaceGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}) x {}", self.a, self.b, self.n)
    }
}

/// Uniform grid on the torus `[0, 2 pi)` for the fast variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauGrid {
    n: usize,
}

impl TauGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return invalid(format!("tau grid size N_tau must be even and >= 4, got {n}"));
        }
        Ok(Self { n })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dtau(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn tau(&self, j: usize) -> f64 {
        j as f64 * self.dtau()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.tau(j)).collect()
    }

    pub fn mode(&self, k: usize) -> i64 {
        signed_mode(k, self.n)
    }
}

/// Forward/inverse pair of plans with the normalization described in the
/// module docs.
#[derive(Clone)]
pub struct FftPair {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FftPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftPair").field("n", &self.n).finish()
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// Samples to coefficients (with the `1/N` factor).
    pub fn forward(&self, buf: &mut [C64]) {
        let mut scratch = vec![C64::default(); self.scratch_len()];
        self.forward_with_scratch(buf, &mut scratch);
    }

    /// Coefficients to samples.
    pub fn inverse(&self, buf: &mut [C64]) {
        let mut scratch = vec![C64::default(); self.scratch_len()];
        self.inverse_with_scratch(buf, &mut scratch);
    }

    /// `buf` may hold several consecutive transforms of length `n`.
    pub fn forward_with_scratch(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.forward.process_with_scratch(buf, scratch);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
    }

    pub fn inverse_with_scratch(&self, buf: &mut [C64], scratch: &mut [C64]) {
        self.inverse.process_with_scratch(buf, scratch);
    }
}

/// Spectral derivative of order `order` of one periodic line of samples.
pub fn differentiate_line(fft: &FftPair, grid: &SpaceGrid, line: &mut [C64], order: u32) {
    if order == 0 {
        return;
    }
    fft.forward(line);
    for (k, c) in line.iter_mut().enumerate() {
        *c *= (I * grid.mu_at(k)).powu(order);
    }
    fft.inverse(line);
}

/// Dense matrix realizing spectral `tau`-differentiation on the collocation grid,
/// `d_{n,m} = (i/N_tau) sum_l l exp(i l (tau_n - tau_m))`.
#[derive(Clone, Debug)]
pub struct DtauMatrix {
    matrix: DMatrix<C64>,
}

impl DtauMatrix {
    pub fn new(grid: &TauGrid) -> Self {
        // Column m is the spectral derivative of the m-th unit vector.
        let n = grid.len();
        let fft = FftPair::new(n);
        let mut matrix = DMatrix::zeros(n, n);
        let mut col = vec![C64::default(); n];
        for m in 0..n {
            col.iter_mut().for_each(|c| *c = C64::default());
            col[m] = C64::new(1.0, 0.0);
            fft.forward(&mut col);
            for (k, c) in col.iter_mut().enumerate() {
                *c *= I * grid.mode(k) as f64;
            }
            fft.inverse(&mut col);
            for (r, c) in col.iter().enumerate() {
                matrix[(r, m)] = *c;
            }
        }
        Self { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.matrix.nrows();
        (0..n)
            .map(|r| (0..n).map(|m| self.matrix[(r, m)] * v[m]).sum())
            .collect()
    }
}

pub fn dtau_matrix(grid: &TauGrid) -> DtauMatrix {
    DtauMatrix::new(grid)
}

/// Evaluate the `tau`-trigonometric interpolant of `u` at an arbitrary `tau`
/// (reduced modulo `2 pi`), for every `x` sample.
pub fn trig_interp_tau(u: &TwoScaleField, tau: f64) -> SpinorField {
    let tg = u.tau_grid();
    let nt = tg.len();
    let tau = tau.rem_euclid(2.0 * PI);
    let phases: Vec<C64> = (0..nt)
        .map(|k| C64::from_polar(1.0, tg.mode(k) as f64 * tau))
        .collect();
    let fft = FftPair::new(nt);
    let space = *u.space_grid();
    let nx = space.len();
    let mut out = SpinorField::zeros(space);
    let mut col = vec![C64::default(); nt];
    for comp in 0..2 {
        let src = u.component(comp);
        let dst = out.component_mut(comp);
        for m in 0..nx {
            for j in 0..nt {
                col[j] = src[j * nx + m];
            }
            fft.forward(&mut col);
            dst[m] = col.iter().zip(&phases).map(|(c, p)| c * p).sum();
        }
    }
    out
}
