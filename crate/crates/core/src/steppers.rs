//! Fully discrete first-order (UA1) and second-order (UA2) schemes for the
//! two-scale problem
//!
//! `dt U + eps^{-2} dtau U = -eps^{-1} A(tau) dx U + F(t, tau, U)`,
//!
//! Fourier pseudo-spectral in `x` and `tau`, semi-implicit in time. For every
//! spatial mode `l` the implicit part couples the two components through
//! `(i mu_l / eps) e^{+-2i tau}` and is solved by eliminating `u_2`, which
//! leaves one dense `N_tau x N_tau` system per mode. Those systems are
//! factorized once per `(eps, dt, grids)`.

use std::fmt;
use std::str::FromStr;

use log::warn;
use nalgebra::{DMatrix, DVector, Dyn, LU};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{SpinorField, TwoScaleField};
use crate::initdata::{prepare_initial_data, G1Variant};
use crate::model::{filter, DiracModel, FilterDirection};
use crate::spectral::{dtau_matrix, signed_mode, trig_interp_tau, FftPair, SpaceGrid, TauGrid, C64, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ua1,
    Ua2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ua1 => "ua1",
            Scheme::Ua2 => "ua2",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ua1" => Ok(Scheme::Ua1),
            "ua2" => Ok(Scheme::Ua2),
            other => invalid(format!("unknown scheme '{other}' (expected ua1 or ua2)")),
        }
    }
}

/// Time-step coefficient of the UA2 prediction solve.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictionVariant {
    /// First-order solve over `dt/2`, landing at `t_n + dt/2`:
    /// `A^{1/2} = (2/dt) Id + D_tau/eps^2`.
    #[default]
    HalfStep,
    /// `A^{1/2} = Id/(2 dt) + D_tau/eps^2` with right-hand side `u^n/(2 dt) + f^n`.
    Printed,
}

impl PredictionVariant {
    /// Effective step length `h` of the prediction's first-order solve.
    pub fn step_length(self, dt: f64) -> f64 {
        match self {
            PredictionVariant::HalfStep => 0.5 * dt,
            PredictionVariant::Printed => 2.0 * dt,
        }
    }
}

impl fmt::Display for PredictionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PredictionVariant::HalfStep => "halfstep",
            PredictionVariant::Printed => "printed",
        })
    }
}

impl FromStr for PredictionVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "halfstep" | "half-step" => Ok(PredictionVariant::HalfStep),
            "printed" => Ok(PredictionVariant::Printed),
            other => invalid(format!("unknown UA2 prediction variant '{other}' (expected halfstep or printed)")),
        }
    }
}

/// Options shared by every propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperOptions {
    pub scheme: Scheme,
    pub dt: f64,
    pub n_tau: usize,
    pub prediction: PredictionVariant,
}

/// One family of per-mode systems
///
/// `P u1' + k (i mu_l/eps) E u2' = s1`, `P u2' + k (i mu_l/eps) E* u1' = s2`,
///
/// with `E = diag(e^{2i tau_j})`. Eliminating `u2'` gives
/// `B^l u1' = (eps/(k i mu_l)) P E* s1 - s2` with
/// `B^l = (eps/(k i mu_l)) P E* P - k (i mu_l/eps) E*`, and then
/// `u2' = (eps/(k i mu_l)) E* (s1 - P u1')`.
#[derive(Clone, Debug)]
struct BlockFamily {
    kappa: f64,
    p: DMatrix<C64>,
    p_lu: LU<C64, Dyn, Dyn>,
    /// Factorizations of `B^l` for `l = -N/2 ..= -1`, stored at index `l + N/2`.
    b_lu: Vec<LU<C64, Dyn, Dyn>>,
}

fn b_matrix_for(p: &DMatrix<C64>, e_star: &[C64], eps: f64, kappa: f64, mu: f64) -> DMatrix<C64> {
    let c = C64::new(eps, 0.0) / (I * kappa * mu);
    let mut pe = p.clone();
    for (j, mut col) in pe.column_iter_mut().enumerate() {
        col *= e_star[j];
    }
    let mut b = &pe * p * c;
    let d = I * (kappa * mu / eps);
    for (j, es) in e_star.iter().enumerate() {
        b[(j, j)] -= d * es;
    }
    b
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |a, c| a.max(c.norm()))
}

impl BlockFamily {
    fn build(p: DMatrix<C64>, kappa: f64, eps: f64, dt: f64, space: &SpaceGrid, e_star: &[C64]) -> Result<Self> {
        let p_lu = p.clone().lu();
        if !p_lu.is_invertible() {
            return Err(Error::Singular { epsilon: eps, dt, mode: 0 });
        }
        let half = space.len() as i64 / 2;
        let b_lu = (-half..0)
            .map(|l| {
                let mu = space.mu(l);
                let b = b_matrix_for(&p, e_star, eps, kappa, mu);
                if l > -half {
                    let b_pos = b_matrix_for(&p, e_star, eps, kappa, space.mu(-l));
                    let sum = max_abs(&(&b + &b_pos));
                    if sum > 1e-12 * max_abs(&b) {
                        return Err(Error::NumericalConsistency(format!(
                            "B^l + B^-l = {sum:e} for l={l} (expected antisymmetry)"
                        )));
                    }
                }
                let lu = b.lu();
                if !lu.is_invertible() {
                    return Err(Error::Singular { epsilon: eps, dt, mode: l });
                }
                Ok(lu)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { kappa, p, p_lu, b_lu })
    }

    /// Solves the coupled system for mode `l` with right-hand sides `s1`, `s2`.
    fn solve(&self, l: i64, mu: f64, eps: f64, e_star: &[C64], s1: &DVector<C64>, s2: &DVector<C64>) -> (DVector<C64>, DVector<C64>) {
        if l == 0 {
            let u1 = self.p_lu.solve(s1).expect("factorization checked at build");
            let u2 = self.p_lu.solve(s2).expect("factorization checked at build");
            return (u1, u2);
        }
        let c = C64::new(eps, 0.0) / (I * self.kappa * mu);
        let es1 = DVector::from_iterator(s1.len(), s1.iter().zip(e_star).map(|(a, e)| a * e));
        let mut rhs = &self.p * es1 * c - s2;
        let half = self.b_lu.len() as i64;
        let idx = if l < 0 {
            (l + half) as usize
        } else {
            // B^l = -B^{-l}
            rhs.neg_mut();
            (half - l) as usize
        };
        self.b_lu[idx].solve_mut(&mut rhs);
        let u1 = rhs;
        let r = s1 - &self.p * &u1;
        let u2 = DVector::from_iterator(r.len(), r.iter().zip(e_star).map(|(a, e)| a * e * c));
        (u1, u2)
    }
}

/// Cached matrices and factorizations for one `(scheme, eps, dt, grids)` tuple.
#[derive(Clone, Debug)]
pub struct SchemeMatrices {
    scheme: Scheme,
    epsilon: f64,
    dt: f64,
    tau: TauGrid,
    space: SpaceGrid,
    prediction: PredictionVariant,
    e_star: Vec<C64>,
    /// UA1: `A = Id/dt + D/eps^2`; UA2: `A^+ = Id/dt + D/(2 eps^2)` with `k = 1/2`.
    main: BlockFamily,
    /// UA2 only: `A^- = Id/dt - D/(2 eps^2)`.
    a_minus: Option<DMatrix<C64>>,
    /// UA2 only: the prediction family.
    predict: Option<BlockFamily>,
}

fn shifted_identity(d: &DMatrix<C64>, diag: f64, d_scale: f64) -> DMatrix<C64> {
    let n = d.nrows();
    let mut m = d * C64::new(d_scale, 0.0);
    for j in 0..n {
        m[(j, j)] += diag;
    }
    m
}

impl SchemeMatrices {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn tau_grid(&self) -> &TauGrid {
        &self.tau
    }

    pub fn space_grid(&self) -> &SpaceGrid {
        &self.space
    }

    pub fn prediction(&self) -> PredictionVariant {
        self.prediction
    }

    /// The implicit matrix of the `l = 0` equations (`A` for UA1, `A^+` for UA2).
    pub fn main_matrix(&self) -> &DMatrix<C64> {
        &self.main.p
    }

    pub fn minus_matrix(&self) -> Option<&DMatrix<C64>> {
        self.a_minus.as_ref()
    }

    pub fn prediction_matrix(&self) -> Option<&DMatrix<C64>> {
        self.predict.as_ref().map(|f| &f.p)
    }
}

pub fn build_matrices(
    m: &DiracModel,
    dt: f64,
    tau: TauGrid,
    scheme: Scheme,
    prediction: PredictionVariant,
) -> Result<SchemeMatrices> {
    if !(dt > 0.0 && dt.is_finite()) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    let eps = m.epsilon();
    let space = *m.grid();
    let d = dtau_matrix(&tau).into_matrix();
    let e_star: Vec<C64> = tau.points().iter().map(|t| C64::from_polar(1.0, -2.0 * t)).collect();
    let inv_e2 = 1.0 / (eps * eps);
    let (main, a_minus, predict) = match scheme {
        Scheme::Ua1 => {
            let a = shifted_identity(&d, 1.0 / dt, inv_e2);
            (BlockFamily::build(a, 1.0, eps, dt, &space, &e_star)?, None, None)
        }
        Scheme::Ua2 => {
            let a_plus = shifted_identity(&d, 1.0 / dt, 0.5 * inv_e2);
            let a_minus = shifted_identity(&d, 1.0 / dt, -0.5 * inv_e2);
            let h = prediction.step_length(dt);
            let a_half = shifted_identity(&d, 1.0 / h, inv_e2);
            (
                BlockFamily::build(a_plus, 0.5, eps, dt, &space, &e_star)?,
                Some(a_minus),
                Some(BlockFamily::build(a_half, 1.0, eps, dt, &space, &e_star)?),
            )
        }
    };
    Ok(SchemeMatrices { scheme, epsilon: eps, dt, tau, space, prediction, e_star, main, a_minus, predict })
}

/// Fourier coefficients in `x`, stored mode by mode: entry `k * N_tau + j`
/// holds mode `k` (FFT order) at node `tau_j`.
struct Modal {
    c: [Vec<C64>; 2],
}

impl Modal {
    fn from_field(u: &TwoScaleField, fft: &FftPair) -> Self {
        let nt = u.tau_grid().len();
        let nx = u.space_grid().len();
        let mut scratch = vec![C64::default(); fft.scratch_len()];
        let mut c = [vec![C64::default(); nt * nx], vec![C64::default(); nt * nx]];
        for (comp, out) in c.iter_mut().enumerate() {
            let mut rows = u.component(comp).to_vec();
            fft.forward_with_scratch(&mut rows, &mut scratch);
            for j in 0..nt {
                for k in 0..nx {
                    out[k * nt + j] = rows[j * nx + k];
                }
            }
        }
        Self { c }
    }

    fn into_field(self, tau: TauGrid, space: SpaceGrid, fft: &FftPair) -> TwoScaleField {
        let nt = tau.len();
        let nx = space.len();
        let mut scratch = vec![C64::default(); fft.scratch_len()];
        let mut out = TwoScaleField::zeros(tau, space);
        for comp in 0..2 {
            let dst = out.component_mut(comp);
            for k in 0..nx {
                for j in 0..nt {
                    dst[j * nx + k] = self.c[comp][k * nt + j];
                }
            }
            fft.inverse_with_scratch(dst, &mut scratch);
        }
        out
    }

    fn mode(&self, comp: usize, k: usize, nt: usize) -> DVector<C64> {
        DVector::from_column_slice(&self.c[comp][k * nt..(k + 1) * nt])
    }
}

/// State of a two-scale propagation.
#[derive(Clone, Debug)]
pub struct TwoScaleState {
    pub step: usize,
    pub t: f64,
    pub field: TwoScaleField,
    pub scheme: Scheme,
}

impl TwoScaleState {
    pub fn new(field: TwoScaleField, scheme: Scheme) -> Self {
        Self { step: 0, t: 0.0, field, scheme }
    }
}

fn check_compatible(s: &TwoScaleState, m: &DiracModel, mats: &SchemeMatrices) -> Result<()> {
    if s.field.tau_grid() != &mats.tau || s.field.space_grid() != &mats.space || m.grid() != &mats.space {
        return Err(Error::GridMismatch("state, model and scheme matrices use different grids".into()));
    }
    if m.epsilon() != mats.epsilon {
        return invalid(format!(
            "scheme matrices were built for epsilon={} but the model has epsilon={}",
            mats.epsilon,
            m.epsilon()
        ));
    }
    Ok(())
}

/// Solves every mode of a first-order family with step length `h`:
/// `P u' + (i mu/eps) E u2' = u/h + f`, and the partner equation.
fn first_order_solve(family: &BlockFamily, mats: &SchemeMatrices, h: f64, u: &Modal, f: &Modal) -> Modal {
    let nt = mats.tau.len();
    let nx = mats.space.len();
    let eps = mats.epsilon;
    let solved: Vec<(DVector<C64>, DVector<C64>)> = (0..nx)
        .into_par_iter()
        .map(|k| {
            let l = signed_mode(k, nx);
            let r1 = u.mode(0, k, nt) / C64::new(h, 0.0) + f.mode(0, k, nt);
            let r2 = u.mode(1, k, nt) / C64::new(h, 0.0) + f.mode(1, k, nt);
            family.solve(l, mats.space.mu(l), eps, &mats.e_star, &r1, &r2)
        })
        .collect();
    gather(solved, nt)
}

fn gather(solved: Vec<(DVector<C64>, DVector<C64>)>, nt: usize) -> Modal {
    let nx = solved.len();
    let mut c = [vec![C64::default(); nt * nx], vec![C64::default(); nt * nx]];
    for (k, (a, b)) in solved.into_iter().enumerate() {
        c[0][k * nt..(k + 1) * nt].copy_from_slice(a.as_slice());
        c[1][k * nt..(k + 1) * nt].copy_from_slice(b.as_slice());
    }
    Modal { c }
}

fn finish(s: &TwoScaleState, field: TwoScaleField, dt: f64) -> Result<TwoScaleState> {
    if !field.is_finite() {
        return Err(Error::Divergence { step: s.step + 1 });
    }
    Ok(TwoScaleState { step: s.step + 1, t: (s.step + 1) as f64 * dt, field, scheme: s.scheme })
}

/// One step of the first-order scheme.
pub fn ua1_step(s: &TwoScaleState, m: &DiracModel, mats: &SchemeMatrices) -> Result<TwoScaleState> {
    check_compatible(s, m, mats)?;
    if mats.scheme != Scheme::Ua1 {
        return invalid("ua1_step needs matrices built for ua1");
    }
    let fft = FftPair::new(mats.space.len());
    let f = Modal::from_field(&m.nonlinearity_two_scale(s.t, &s.field), &fft);
    let u = Modal::from_field(&s.field, &fft);
    let next = first_order_solve(&mats.main, mats, mats.dt, &u, &f);
    finish(s, next.into_field(mats.tau, mats.space, &fft), mats.dt)
}

/// One step of the second-order scheme: a first-order prediction to the
/// midpoint followed by a Crank-Nicolson correction with the midpoint
/// nonlinearity.
pub fn ua2_step(s: &TwoScaleState, m: &DiracModel, mats: &SchemeMatrices) -> Result<TwoScaleState> {
    check_compatible(s, m, mats)?;
    let (Some(predict), Some(a_minus)) = (&mats.predict, &mats.a_minus) else {
        return invalid("ua2_step needs matrices built for ua2");
    };
    let fft = FftPair::new(mats.space.len());
    let nt = mats.tau.len();
    let nx = mats.space.len();
    let eps = mats.epsilon;
    let dt = mats.dt;

    let u = Modal::from_field(&s.field, &fft);
    let f = Modal::from_field(&m.nonlinearity_two_scale(s.t, &s.field), &fft);
    let half = first_order_solve(predict, mats, mats.prediction.step_length(dt), &u, &f);
    let u_half = half.into_field(mats.tau, mats.space, &fft);
    let f_half = Modal::from_field(&m.nonlinearity_two_scale(s.t + 0.5 * dt, &u_half), &fft);

    let kappa = mats.main.kappa;
    let solved: Vec<(DVector<C64>, DVector<C64>)> = (0..nx)
        .into_par_iter()
        .map(|k| {
            let l = signed_mode(k, nx);
            let mu = mats.space.mu(l);
            let u1 = u.mode(0, k, nt);
            let u2 = u.mode(1, k, nt);
            // Explicit half of the Crank-Nicolson coupling.
            let coup = I * (kappa * mu / eps);
            let e_u2 = DVector::from_iterator(nt, u2.iter().zip(&mats.e_star).map(|(a, e)| a * e.conj() * coup));
            let e_u1 = DVector::from_iterator(nt, u1.iter().zip(&mats.e_star).map(|(a, e)| a * e * coup));
            let s1 = a_minus * &u1 + f_half.mode(0, k, nt) - e_u2;
            let s2 = a_minus * &u2 + f_half.mode(1, k, nt) - e_u1;
            mats.main.solve(l, mu, eps, &mats.e_star, &s1, &s2)
        })
        .collect();
    finish(s, gather(solved, nt).into_field(mats.tau, mats.space, &fft), dt)
}

/// Advances a state by one step of the scheme the matrices were built for.
pub fn step(s: &TwoScaleState, m: &DiracModel, mats: &SchemeMatrices) -> Result<TwoScaleState> {
    match mats.scheme {
        Scheme::Ua1 => ua1_step(s, m, mats),
        Scheme::Ua2 => ua2_step(s, m, mats),
    }
}

/// Number of steps of length `dt` covering `[0, t_final]`, rounding with a
/// warning when `t_final` is not a multiple of `dt`.
pub fn step_count(t_final: f64, dt: f64) -> Result<usize> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return invalid(format!("final time must be nonnegative, got {t_final}"));
    }
    if !(dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    let ratio = t_final / dt;
    let n = ratio.round();
    if (ratio - n).abs() > 1e-8 * ratio.max(1.0) {
        warn!("final time {t_final} is not a multiple of dt={dt}; using {n} steps (t={})", n * dt);
    }
    Ok(n as usize)
}

/// Prepares the initial two-scale data and integrates to `t_final`, calling
/// `hook` on the initial state and after every step.
#[allow(clippy::too_many_arguments)]
pub fn propagate_with(
    m: &DiracModel,
    phi0: &SpinorField,
    order: u32,
    g1: G1Variant,
    opts: &StepperOptions,
    t_final: f64,
    mut hook: impl FnMut(&TwoScaleState),
) -> Result<TwoScaleState> {
    let tau = TauGrid::new(opts.n_tau)?;
    let n = step_count(t_final, opts.dt)?;
    let prepared = prepare_initial_data(phi0, m, tau, order, g1)?;
    let mats = build_matrices(m, opts.dt, tau, opts.scheme, opts.prediction)?;
    let mut state = TwoScaleState::new(prepared.field, opts.scheme);
    hook(&state);
    for _ in 0..n {
        state = step(&state, m, &mats)?;
        hook(&state);
    }
    Ok(state)
}

pub fn propagate(
    m: &DiracModel,
    phi0: &SpinorField,
    order: u32,
    g1: G1Variant,
    opts: &StepperOptions,
    t_final: f64,
) -> Result<TwoScaleState> {
    propagate_with(m, phi0, order, g1, opts, t_final, |_| {})
}

/// `Phi(t_n, x) = diag(e^{-i t_n/eps^2}, e^{i t_n/eps^2}) U^n(t_n/eps^2, x)`,
/// with spectral interpolation in `tau`.
pub fn reconstruct_phi(s: &TwoScaleState, epsilon: f64) -> SpinorField {
    let tau_star = s.t / (epsilon * epsilon);
    let u = trig_interp_tau(&s.field, tau_star);
    filter(&u, s.t, epsilon, FilterDirection::Inverse)
}

/// Dense `2 N_tau x 2 N_tau` matrix of
/// `Q_mu = Id + (dt/eps) i mu A(tau) + (dt/eps^2) D_tau`
/// acting on `C^2`-valued `tau`-samples ordered `(u_1(tau_0..), u_2(tau_0..))`.
pub fn q_matrix(epsilon: f64, dt: f64, mu: f64, tau: &TauGrid) -> DMatrix<C64> {
    let n = tau.len();
    let d = dtau_matrix(tau).into_matrix();
    let mut q = DMatrix::zeros(2 * n, 2 * n);
    let s = dt / (epsilon * epsilon);
    let c = I * (dt / epsilon * mu);
    for r in 0..n {
        for col in 0..n {
            let v = d[(r, col)] * s;
            q[(r, col)] = v;
            q[(n + r, n + col)] = v;
        }
        q[(r, r)] += 1.0;
        q[(n + r, n + r)] += 1.0;
        let e = C64::from_polar(1.0, 2.0 * tau.tau(r));
        q[(r, n + r)] = c * e;
        q[(n + r, r)] = c * e.conj();
    }
    q
}

/// `max_tau |v(tau)|` for a `C^2`-valued sample vector in the layout of [`q_matrix`].
fn sup_norm(v: &DVector<C64>, n: usize) -> f64 {
    (0..n).map(|j| (v[j].norm_sqr() + v[n + j].norm_sqr()).sqrt()).fold(0.0, f64::max)
}

/// Right-hand sides used by [`q_nonexpansive_check`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProbeKind {
    /// Independent random values at every `tau` node.
    Nodal,
    /// Random trigonometric polynomials of degree at most `degree`.
    BandLimited { degree: usize },
}

/// Largest observed `max_tau |Q^{-1} W| / max_tau |W|` over `trials` random `W`.
pub fn q_nonexpansive_check(
    epsilon: f64,
    dt: f64,
    mu: f64,
    n_tau: usize,
    trials: usize,
    kind: ProbeKind,
    seed: u64,
) -> Result<f64> {
    let tau = TauGrid::new(n_tau)?;
    let q = q_matrix(epsilon, dt, mu, &tau);
    let lu = q.lu();
    if !lu.is_invertible() {
        return Err(Error::Singular { epsilon, dt, mode: 0 });
    }
    let n = n_tau;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let w = match kind {
            ProbeKind::Nodal => DVector::from_fn(2 * n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
            ProbeKind::BandLimited { degree } => {
                let deg = degree as i64;
                let coeffs: Vec<[C64; 2]> = (-deg..=deg)
                    .map(|_| {
                        [
                            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                        ]
                    })
                    .collect();
                DVector::from_fn(2 * n, |r, _| {
                    let (comp, j) = (r / n, r % n);
                    let t = tau.tau(j);
                    coeffs
                        .iter()
                        .zip(-deg..=deg)
                        .map(|(c, k)| c[comp] * C64::from_polar(1.0, k as f64 * t))
                        .sum()
                })
            }
        };
        let v = lu.solve(&w).expect("checked invertible");
        worst = worst.max(sup_norm(&v, n) / sup_norm(&w, n));
    }
    Ok(worst)
}
