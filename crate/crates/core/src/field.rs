//! Sampled two-component fields: [`SpinorField`] on the `x` grid and
//! [`TwoScaleField`] on the `(tau, x)` tensor grid.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{differentiate_line, FftPair, SpaceGrid, TauGrid, C64};
use crate::tau_ops::Mat2;

/// `(a, b) = a1 conj(b1) + a2 conj(b2)`.
#[inline]
pub fn inner(a: [C64; 2], b: [C64; 2]) -> C64 {
    a[0] * b[0].conj() + a[1] * b[1].conj()
}

/// Complex pair `(phi_1(x_j), phi_2(x_j))` at every grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorField {
    grid: SpaceGrid,
    c1: Vec<C64>,
    c2: Vec<C64>,
}

impl SpinorField {
    pub fn zeros(grid: SpaceGrid) -> Self {
        let n = grid.len();
        Self { grid, c1: vec![C64::default(); n], c2: vec![C64::default(); n] }
    }

    pub fn from_components(grid: SpaceGrid, c1: Vec<C64>, c2: Vec<C64>) -> Result<Self> {
        if c1.len() != grid.len() || c2.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "components of length {}/{} on a grid of {} points",
                c1.len(),
                c2.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, c1, c2 })
    }

    pub fn from_fn(grid: SpaceGrid, mut f: impl FnMut(f64) -> [C64; 2]) -> Self {
        let (c1, c2) = grid.points().into_iter().map(|x| {
            let [a, b] = f(x);
            (a, b)
        }).unzip();
        Self { grid, c1, c2 }
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.c1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }

    pub fn component(&self, c: usize) -> &[C64] {
        if c == 0 { &self.c1 } else { &self.c2 }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [C64] {
        if c == 0 { &mut self.c1 } else { &mut self.c2 }
    }

    #[inline]
    pub fn at(&self, j: usize) -> [C64; 2] {
        [self.c1[j], self.c2[j]]
    }

    #[inline]
    pub fn set(&mut self, j: usize, v: [C64; 2]) {
        self.c1[j] = v[0];
        self.c2[j] = v[1];
    }

    pub fn map(&self, mut f: impl FnMut(usize, [C64; 2]) -> [C64; 2]) -> Self {
        let mut out = self.clone();
        for j in 0..self.len() {
            out.set(j, f(j, self.at(j)));
        }
        out
    }

    /// Pointwise product with a real scalar profile.
    pub fn scale_by(&self, profile: &[f64]) -> Self {
        self.map(|j, [a, b]| [a * profile[j], b * profile[j]])
    }

    pub fn apply_matrix(&self, m: &Mat2) -> Self {
        self.map(|_, v| m.apply(v))
    }

    /// Spectral derivative of the given order.
    pub fn dx(&self, order: u32) -> Self {
        let mut out = self.clone();
        let fft = FftPair::new(self.grid.len());
        differentiate_line(&fft, &self.grid, &mut out.c1, order);
        differentiate_line(&fft, &self.grid, &mut out.c2, order);
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.c1.iter().chain(&self.c2).fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.c1.iter().chain(&self.c2).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn check_same_grid(&self, other: &SpinorField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{} vs {}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Every `factor`-th sample, as a field on the coarse grid.
    pub fn subsample(&self, coarse: SpaceGrid) -> Result<Self> {
        let factor = self.grid.refinement_factor(&coarse).ok_or_else(|| {
            Error::GridMismatch(format!("{} is not a refinement of {}", self.grid, coarse))
        })?;
        let pick = |v: &[C64]| v.iter().step_by(factor).copied().collect::<Vec<_>>();
        Ok(Self { grid: coarse, c1: pick(&self.c1), c2: pick(&self.c2) })
    }
}

macro_rules! impl_linear_ops {
    ($ty:ty) => {
        impl Add for &$ty {
            type Output = $ty;
            fn add(self, rhs: &$ty) -> $ty {
                let mut out = self.clone();
                out.c1.iter_mut().zip(&rhs.c1).for_each(|(a, b)| *a += b);
                out.c2.iter_mut().zip(&rhs.c2).for_each(|(a, b)| *a += b);
                out
            }
        }

        impl Sub for &$ty {
            type Output = $ty;
            fn sub(self, rhs: &$ty) -> $ty {
                let mut out = self.clone();
                out.c1.iter_mut().zip(&rhs.c1).for_each(|(a, b)| *a -= b);
                out.c2.iter_mut().zip(&rhs.c2).for_each(|(a, b)| *a -= b);
                out
            }
        }

        impl Add for $ty {
            type Output = $ty;
            fn add(self, rhs: $ty) -> $ty {
                &self + &rhs
            }
        }

        impl Sub for $ty {
            type Output = $ty;
            fn sub(self, rhs: $ty) -> $ty {
                &self - &rhs
            }
        }

        impl Mul<C64> for &$ty {
            type Output = $ty;
            fn mul(self, s: C64) -> $ty {
                let mut out = self.clone();
                out.c1.iter_mut().chain(out.c2.iter_mut()).for_each(|a| *a *= s);
                out
            }
        }

        impl Mul<f64> for &$ty {
            type Output = $ty;
            fn mul(self, s: f64) -> $ty {
                self * C64::new(s, 0.0)
            }
        }

        impl Mul<C64> for $ty {
            type Output = $ty;
            fn mul(self, s: C64) -> $ty {
                &self * s
            }
        }

        impl Mul<f64> for $ty {
            type Output = $ty;
            fn mul(self, s: f64) -> $ty {
                &self * s
            }
        }

        impl Neg for $ty {
            type Output = $ty;
            fn neg(self) -> $ty {
                &self * -1.0
            }
        }
    };
}

impl_linear_ops!(SpinorField);
impl_linear_ops!(TwoScaleField);

/// Two-component field on the `N_tau x N` tensor grid, stored `tau`-row by
/// `tau`-row: sample `(tau_j, x_m)` sits at index `j * N + m`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoScaleField {
    tau: TauGrid,
    space: SpaceGrid,
    c1: Vec<C64>,
    c2: Vec<C64>,
}

impl TwoScaleField {
    pub fn zeros(tau: TauGrid, space: SpaceGrid) -> Self {
        let n = tau.len() * space.len();
        Self { tau, space, c1: vec![C64::default(); n], c2: vec![C64::default(); n] }
    }

    pub fn from_components(tau: TauGrid, space: SpaceGrid, c1: Vec<C64>, c2: Vec<C64>) -> Result<Self> {
        let n = tau.len() * space.len();
        if c1.len() != n || c2.len() != n {
            return Err(Error::GridMismatch(format!(
                "two-scale components of length {}/{} for a {}x{} grid",
                c1.len(),
                c2.len(),
                tau.len(),
                space.len()
            )));
        }
        Ok(Self { tau, space, c1, c2 })
    }

    /// `f(tau_j, m)` for every `tau` node `j` and `x` index `m`.
    pub fn from_fn(tau: TauGrid, space: SpaceGrid, mut f: impl FnMut(f64, usize) -> [C64; 2]) -> Self {
        let mut out = Self::zeros(tau, space);
        let nx = space.len();
        for j in 0..tau.len() {
            let t = tau.tau(j);
            for m in 0..nx {
                out.set(j, m, f(t, m));
            }
        }
        out
    }

    /// The `tau`-independent field equal to `s` on every row.
    pub fn broadcast(tau: TauGrid, s: &SpinorField) -> Self {
        Self::from_fn(tau, *s.grid(), |_, m| s.at(m))
    }

    pub fn tau_grid(&self) -> &TauGrid {
        &self.tau
    }

    pub fn space_grid(&self) -> &SpaceGrid {
        &self.space
    }

    pub fn component(&self, c: usize) -> &[C64] {
        if c == 0 { &self.c1 } else { &self.c2 }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [C64] {
        if c == 0 { &mut self.c1 } else { &mut self.c2 }
    }

    #[inline]
    pub fn at(&self, j: usize, m: usize) -> [C64; 2] {
        let i = j * self.space.len() + m;
        [self.c1[i], self.c2[i]]
    }

    #[inline]
    pub fn set(&mut self, j: usize, m: usize, v: [C64; 2]) {
        let i = j * self.space.len() + m;
        self.c1[i] = v[0];
        self.c2[i] = v[1];
    }

    /// The `x`-section at the `j`-th `tau` node.
    pub fn row(&self, j: usize) -> SpinorField {
        let nx = self.space.len();
        let r = j * nx..(j + 1) * nx;
        SpinorField {
            grid: self.space,
            c1: self.c1[r.clone()].to_vec(),
            c2: self.c2[r].to_vec(),
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64, usize, [C64; 2]) -> [C64; 2]) -> Self {
        let mut out = self.clone();
        for j in 0..self.tau.len() {
            let t = self.tau.tau(j);
            for m in 0..self.space.len() {
                out.set(j, m, f(t, m, self.at(j, m)));
            }
        }
        out
    }

    /// Pointwise `M(tau_j) U(tau_j, x_m)`.
    pub fn apply_tau_matrix(&self, m: impl Fn(f64) -> Mat2) -> Self {
        let mats: Vec<Mat2> = self.tau.points().into_iter().map(m).collect();
        self.clone()
            .map_rows(|j, row| row.iter_mut().for_each(|v| *v = mats[j].apply(*v)))
    }

    fn map_rows(mut self, mut f: impl FnMut(usize, &mut [[C64; 2]])) -> Self {
        let nx = self.space.len();
        let mut buf = vec![[C64::default(); 2]; nx];
        for j in 0..self.tau.len() {
            for m in 0..nx {
                buf[m] = self.at(j, m);
            }
            f(j, &mut buf);
            for m in 0..nx {
                self.set(j, m, buf[m]);
            }
        }
        self
    }

    /// `M(tau_j) S(x_m)` for a `tau`-independent section `S`.
    pub fn tau_matrix_times(tau: TauGrid, m: impl Fn(f64) -> Mat2, s: &SpinorField) -> Self {
        Self::broadcast(tau, s).apply_tau_matrix(m)
    }

    pub fn scale_by(&self, profile: &[f64]) -> Self {
        self.map(|_, m, [a, b]| [a * profile[m], b * profile[m]])
    }

    /// Spectral `x`-derivative applied row by row.
    pub fn dx(&self, order: u32) -> Self {
        let mut out = self.clone();
        if order == 0 {
            return out;
        }
        let nx = self.space.len();
        let fft = FftPair::new(nx);
        for comp in [&mut out.c1, &mut out.c2] {
            for row in comp.chunks_mut(nx) {
                differentiate_line(&fft, &self.space, row, order);
            }
        }
        out
    }

    pub fn max_norm(&self) -> f64 {
        self.c1.iter().chain(&self.c2).fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.c1.iter().chain(&self.c2).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `sup_tau ( dx sum_m |U(tau, x_m)|^2 )^(1/2)`, the discrete `L^inf_tau L^2_x` norm.
    pub fn linf_tau_l2_x(&self) -> f64 {
        let nx = self.space.len();
        let dx = self.space.dx();
        (0..self.tau.len())
            .map(|j| {
                let r = j * nx..(j + 1) * nx;
                let s: f64 = self.c1[r.clone()].iter().chain(&self.c2[r]).map(|c| c.norm_sqr()).sum();
                (s * dx).sqrt()
            })
            .fold(0.0, f64::max)
    }
}
