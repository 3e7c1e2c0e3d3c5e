//! The `eps -> 0` limit model `dt U = C dx^2 U + F_e(t, U)`, a pair of
//! coupled nonlinear Schrodinger equations, solved by Strang splitting,
//! and its comparison with the Dirac solution across `eps`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{ls_slope, linf_error};
use crate::error::{invalid, Result};
use crate::field::SpinorField;
use crate::model::{filter, DiracModel, FilterDirection, Problem};
use crate::spectral::{FftPair, C64};
use crate::steppers::step_count;

#[derive(Clone, Debug, PartialEq)]
pub struct LimitState {
    pub t: f64,
    pub u: SpinorField,
}

/// Exact flow of `dt u_1 = -i[V_e + lambda q] u_1`, `dt u_2 = -i[V_e - lambda q] u_2`
/// with `q = |u_1|^2 - |u_2|^2` (invariant), `V_e` frozen at time `t_mid`.
fn nonlinear_flow(u: &SpinorField, m: &DiracModel, t_mid: f64, h: f64) -> SpinorField {
    let ve = m.v_e_profile(t_mid);
    let lambda = m.lambda();
    u.map(|j, [a, b]| {
        let q = a.norm_sqr() - b.norm_sqr();
        [a * C64::from_polar(1.0, -(ve[j] + lambda * q) * h), b * C64::from_polar(1.0, -(ve[j] - lambda * q) * h)]
    })
}

/// Exact flow of `dt U = C dx^2 U`: mode `l` of `u_1` gains `e^{-i mu_l^2 h/2}`, of `u_2` `e^{+i mu_l^2 h/2}`.
fn linear_flow(u: &SpinorField, fft: &FftPair, h: f64) -> SpinorField {
    let grid = *u.grid();
    let mut out = u.clone();
    for (c, sign) in [(0usize, -1.0), (1, 1.0)] {
        let line = out.component_mut(c);
        fft.forward(line);
        for (k, v) in line.iter_mut().enumerate() {
            let mu = grid.mu_at(k);
            *v *= C64::from_polar(1.0, sign * 0.5 * mu * mu * h);
        }
        fft.inverse(line);
    }
    out
}

/// One Strang step: half nonlinear, full linear, half nonlinear.
pub fn limit_step(s: &LimitState, m: &DiracModel, dt: f64) -> Result<LimitState> {
    if !(dt > 0.0) {
        return invalid(format!("time step must be positive, got {dt}"));
    }
    s.u.check_same_grid(&SpinorField::zeros(*m.grid()))?;
    let fft = FftPair::new(m.grid().len());
    Ok(limit_step_with(s, m, dt, &fft))
}

fn limit_step_with(s: &LimitState, m: &DiracModel, dt: f64, fft: &FftPair) -> LimitState {
    let h = 0.5 * dt;
    let u = nonlinear_flow(&s.u, m, s.t + 0.5 * h, h);
    let u = linear_flow(&u, fft, dt);
    let u = nonlinear_flow(&u, m, s.t + 1.5 * h, h);
    LimitState { t: s.t + dt, u }
}

/// Integrates the limit model from `U(0) = Phi_0` to `t_final`.
pub fn limit_solve(m: &DiracModel, phi0: &SpinorField, t_final: f64, dt: f64) -> Result<SpinorField> {
    let n = step_count(t_final, dt)?;
    let mut s = LimitState { t: 0.0, u: phi0.clone() };
    s.u.check_same_grid(&SpinorField::zeros(*m.grid()))?;
    let fft = FftPair::new(m.grid().len());
    for _ in 0..n {
        s = limit_step_with(&s, m, dt, &fft);
    }
    Ok(s.u)
}

/// `Phi = diag(e^{-it/eps^2}, e^{it/eps^2}) U`.
pub fn limit_reconstruct(u: &SpinorField, t: f64, epsilon: f64) -> SpinorField {
    filter(u, t, epsilon, FilterDirection::Inverse)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitRow {
    pub epsilon: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitReport {
    pub rows: Vec<LimitRow>,
    /// Least-squares slope of `log(error)` against `log(eps)`.
    pub slope: f64,
}

/// Compares `Phi^eps(t_final)` from `reference` with the reconstructed limit
/// solution for every `eps`. The limit solution is computed once; only the
/// reconstruction phases depend on `eps`.
pub fn limit_compare(
    problem: &Problem,
    epsilons: &[f64],
    n: usize,
    t_final: f64,
    limit_dt: f64,
    reference: impl Fn(&DiracModel, &SpinorField) -> Result<SpinorField> + Sync,
) -> Result<LimitReport> {
    if epsilons.len() < 2 {
        return invalid("the limit comparison needs at least two epsilon values");
    }
    let phi0 = problem.initial_data(n)?;
    let base = problem.model(n)?;
    let u = limit_solve(&base, &phi0, t_final, limit_dt)?;
    let rows: Vec<LimitRow> = epsilons
        .par_iter()
        .map(|&e| {
            let m = base.with_epsilon(e)?;
            let phi = reference(&m, &phi0)?;
            let error = linf_error(&phi, &limit_reconstruct(&u, t_final, e))?;
            Ok(LimitRow { epsilon: e, error })
        })
        .collect::<Result<_>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon.ln(), r.error.ln())).collect();
    Ok(LimitReport { slope: ls_slope(&pts), rows })
}
