//! Scalar toy model `dt u + eps^{-2} dtau u + i eps^{-1} a(tau) u = 0`:
//! exact solution, prepared initial data and the finite-difference estimate
//! of `max |dt^p u(0, tau)|` across `eps`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{signed_mode, FftPair};

const I: C64 = C64::new(0.0, 1.0);

/// Zero-mean, `2 pi`-periodic coefficient `a(tau)` with its antiderivative
/// `b(tau) = int_0^tau a`.
#[derive(Clone, Debug, PartialEq)]
pub enum ToyCoefficient {
    Zero,
    Cos,
    Sin,
    Cos2,
    /// Trigonometric interpolant of samples on a uniform `tau` grid;
    /// `b` is obtained by spectral integration.
    Sampled { coeffs: Vec<C64> },
}

impl ToyCoefficient {
    /// Builds a sampled coefficient from values at `tau_j = 2 pi j / n`.
    pub fn sampled(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 || n % 2 != 0 {
            return invalid(format!("a(tau) needs an even number (>= 2) of samples, got {n}"));
        }
        let mut coeffs: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        FftPair::new(n).forward(&mut coeffs);
        if coeffs[0].norm() >= 1e-13 {
            return invalid(format!("a(tau) must have zero mean, got mean {:e}", coeffs[0].re));
        }
        coeffs[0] = C64::default();
        Ok(Self::Sampled { coeffs })
    }

    pub fn a(&self, tau: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Cos => tau.cos(),
            Self::Sin => tau.sin(),
            Self::Cos2 => (2.0 * tau).cos(),
            Self::Sampled { coeffs } => {
                let n = coeffs.len();
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * C64::from_polar(1.0, signed_mode(k, n) as f64 * tau))
                    .sum::<C64>()
                    .re
            }
        }
    }

    pub fn b(&self, tau: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Cos => tau.sin(),
            Self::Sin => 1.0 - tau.cos(),
            Self::Cos2 => 0.5 * (2.0 * tau).sin(),
            Self::Sampled { coeffs } => {
                let n = coeffs.len();
                coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| {
                        let l = signed_mode(k, n) as f64;
                        c * (C64::from_polar(1.0, l * tau) - 1.0) / (I * l)
                    })
                    .sum::<C64>()
                    .re
            }
        }
    }

    /// `tau`-mean of `a`, approximated by the trapezoidal rule on 256 nodes
    /// (exact for the registry entries).
    pub fn mean(&self) -> f64 {
        let n = 256;
        (0..n).map(|j| self.a(2.0 * PI * j as f64 / n as f64)).sum::<f64>() / n as f64
    }
}

impl fmt::Display for ToyCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("zero"),
            Self::Cos => f.write_str("cos"),
            Self::Sin => f.write_str("sin"),
            Self::Cos2 => f.write_str("cos2"),
            Self::Sampled { coeffs } => write!(f, "sampled[{}]", coeffs.len()),
        }
    }
}

impl FromStr for ToyCoefficient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" | "0" => Ok(Self::Zero),
            "cos" => Ok(Self::Cos),
            "sin" => Ok(Self::Sin),
            "cos2" | "cos2tau" => Ok(Self::Cos2),
            other => invalid(format!("unknown toy coefficient '{other}' (expected zero|cos|sin|cos2)")),
        }
    }
}

impl Serialize for ToyCoefficient {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ToyCoefficient {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyProblem {
    pub a: ToyCoefficient,
    pub u0: C64,
    pub epsilon: f64,
    /// Derivative order whose uniform boundedness is targeted.
    pub p: u32,
}

impl ToyProblem {
    pub fn new(a: ToyCoefficient, u0: C64, epsilon: f64, p: u32) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return invalid(format!("epsilon must lie in (0, 1], got {epsilon}"));
        }
        if p < 1 {
            return invalid("derivative order p must be at least 1");
        }
        let mean = a.mean();
        if mean.abs() >= 1e-13 {
            return invalid(format!("a(tau) must have zero mean, got {mean:e}"));
        }
        Ok(Self { a, u0, epsilon, p })
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.u0, epsilon, self.p)
    }
}

/// `u(t, tau) = e^{-i eps b(tau)} e^{i eps b(tau - t/eps^2)} u_in(tau - t/eps^2)`.
pub fn toy_exact(prob: &ToyProblem, u_in: &dyn Fn(f64) -> C64, t: f64, tau: f64) -> C64 {
    let e = prob.epsilon;
    let s = tau - t / (e * e);
    C64::from_polar(1.0, e * (prob.a.b(s) - prob.a.b(tau))) * u_in(s)
}

/// `u_in(tau) = u_0 sum_{k=0}^{2p-1} (-i eps b(tau))^k / k!`.
pub fn toy_prepared_initial(prob: &ToyProblem) -> impl Fn(f64) -> C64 + '_ {
    move |tau| {
        let z = -I * prob.epsilon * prob.a.b(tau);
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        for k in 1..2 * prob.p {
            term = term * z / k as f64;
            sum += term;
        }
        prob.u0 * sum
    }
}

/// One row of the derivative-boundedness table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToyBoundRow {
    pub epsilon: f64,
    pub estimate: f64,
}

/// `eps in {2^-1, ..., 2^-6}`.
pub fn default_toy_epsilons() -> Vec<f64> {
    (1..=6).map(|j| 2f64.powi(-j)).collect()
}

const TAU_PROBES: usize = 64;

/// Central-difference estimate of `max_tau |dt^p u(0, tau)|` with step
/// `h = eps^2/100`, using the prepared data when `prepared` and the constant
/// `u_0` otherwise. Only `p <= 3` has a stencil.
pub fn toy_derivative_estimate(prob: &ToyProblem, prepared: bool) -> Result<f64> {
    if prob.p > 3 {
        return invalid(format!("finite-difference stencils exist only up to p = 3, got {}", prob.p));
    }
    let h = prob.epsilon * prob.epsilon / 100.0;
    let u0 = prob.u0;
    let flat = move |_: f64| u0;
    let prep = toy_prepared_initial(prob);
    let u_in: &dyn Fn(f64) -> C64 = if prepared { &prep } else { &flat };
    let mut worst: f64 = 0.0;
    for j in 0..TAU_PROBES {
        let tau = 2.0 * PI * j as f64 / TAU_PROBES as f64;
        let u = |k: i32| toy_exact(prob, u_in, k as f64 * h, tau);
        let d = match prob.p {
            1 => (u(1) - u(-1)) / (2.0 * h),
            2 => (u(1) - u(0) * 2.0 + u(-1)) / (h * h),
            _ => (u(2) - u(1) * 2.0 + u(-1) * 2.0 - u(-2)) / (2.0 * h * h * h),
        };
        worst = worst.max(d.norm());
    }
    Ok(worst)
}

/// Sweeps [`toy_derivative_estimate`] over `epsilons`.
pub fn toy_derivative_bound(prob: &ToyProblem, prepared: bool, epsilons: &[f64]) -> Result<Vec<ToyBoundRow>> {
    if epsilons.is_empty() {
        return invalid("toy sweep needs at least one epsilon");
    }
    epsilons
        .iter()
        .map(|&e| {
            let p = prob.with_epsilon(e)?;
            Ok(ToyBoundRow { epsilon: e, estimate: toy_derivative_estimate(&p, prepared)? })
        })
        .collect()
}

/// Ratios `estimate(eps_{k+1}) / estimate(eps_k)` between successive rows.
pub fn successive_ratios(rows: &[ToyBoundRow]) -> Vec<f64> {
    rows.windows(2).map(|w| w[1].estimate / w[0].estimate).collect()
}
