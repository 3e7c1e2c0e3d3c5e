//! The Dirac problem definition: external potentials, the nonlinearity `F`
//! and its derivatives, the filtering map and the conserved functionals.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{inner, SpinorField, TwoScaleField};
use crate::spectral::{SpaceGrid, C64, I};
use crate::tau_ops::{alpha, beta};

/// Named closed-form potential `V(t, x)` with analytic time derivatives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Potential {
    Zero,
    Constant { value: f64 },
    /// `(1 - x) / (2 + 2 x^2)`
    DecayingRational,
    /// `(x + 1)^2 / (1 + x^2)`
    ShiftedRational,
    /// `rate * t`
    LinearInTime { rate: f64 },
    /// `amplitude * sin(omega t)`
    Oscillating { amplitude: f64, omega: f64 },
}

impl Potential {
    pub fn value(&self, t: f64, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::Constant { value } => value,
            Potential::DecayingRational => (1.0 - x) / (2.0 + 2.0 * x * x),
            Potential::ShiftedRational => (x + 1.0) * (x + 1.0) / (1.0 + x * x),
            Potential::LinearInTime { rate } => rate * t,
            Potential::Oscillating { amplitude, omega } => amplitude * (omega * t).sin(),
        }
    }

    pub fn dt(&self, t: f64, _x: f64) -> f64 {
        match *self {
            Potential::LinearInTime { rate } => rate,
            Potential::Oscillating { amplitude, omega } => amplitude * omega * (omega * t).cos(),
            _ => 0.0,
        }
    }

    pub fn dtt(&self, t: f64, _x: f64) -> f64 {
        match *self {
            Potential::Oscillating { amplitude, omega } => -amplitude * omega * omega * (omega * t).sin(),
            _ => 0.0,
        }
    }

    pub fn is_static(&self) -> bool {
        !matches!(self, Potential::LinearInTime { .. } | Potential::Oscillating { .. })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero) || matches!(self, Potential::Constant { value } if *value == 0.0)
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Potential::Zero => write!(f, "zero"),
            Potential::Constant { value } => write!(f, "const:{value}"),
            Potential::DecayingRational => write!(f, "decaying-rational"),
            Potential::ShiftedRational => write!(f, "shifted-rational"),
            Potential::LinearInTime { rate } => write!(f, "linear-time:{rate}"),
            Potential::Oscillating { amplitude, omega } => write!(f, "sin-time:{amplitude}:{omega}"),
        }
    }
}

impl FromStr for Potential {
    type Err = Error;

    /// Accepts the forms produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|p| p.parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidConfig(format!("bad numeric argument in potential '{s}'")))
        };
        match parts[0] {
            "zero" => Ok(Potential::Zero),
            "const" => Ok(Potential::Constant { value: num(1)? }),
            "decaying-rational" => Ok(Potential::DecayingRational),
            "shifted-rational" => Ok(Potential::ShiftedRational),
            "linear-time" => Ok(Potential::LinearInTime { rate: num(1)? }),
            "sin-time" => Ok(Potential::Oscillating { amplitude: num(1)?, omega: num(2)? }),
            other => invalid(format!("unknown potential '{other}'")),
        }
    }
}

/// Initial profile `Phi_0(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialCondition {
    /// `phi_1 = exp(-x^2)/sqrt(2)`, `phi_2 = exp(-sqrt(2) x^2)`.
    GaussianPair,
    /// `(c1, c2) exp(i mu_l (x - a))`.
    PlaneWave { mode: i64, c1: f64, c2: f64 },
}

impl InitialCondition {
    pub fn sample(&self, grid: SpaceGrid) -> SpinorField {
        match *self {
            InitialCondition::GaussianPair => SpinorField::from_fn(grid, |x| {
                [
                    C64::new((-x * x).exp() / SQRT_2, 0.0),
                    C64::new((-SQRT_2 * x * x).exp(), 0.0),
                ]
            }),
            InitialCondition::PlaneWave { mode, c1, c2 } => {
                let mu = grid.mu(mode);
                let a = grid.a();
                SpinorField::from_fn(grid, |x| {
                    let e = C64::from_polar(1.0, mu * (x - a));
                    [e * c1, e * c2]
                })
            }
        }
    }
}

/// Problem data independent of the discretization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    pub epsilon: f64,
    pub lambda: f64,
    pub v_e: Potential,
    pub v_m: Potential,
    pub a: f64,
    pub b: f64,
    pub initial: InitialCondition,
}

impl Problem {
    pub fn grid(&self, n: usize) -> Result<SpaceGrid> {
        SpaceGrid::new(self.a, self.b, n)
    }

    pub fn model(&self, n: usize) -> Result<DiracModel> {
        DiracModel::new(self.epsilon, self.lambda, self.v_e.clone(), self.v_m.clone(), self.grid(n)?)
    }

    pub fn initial_data(&self, n: usize) -> Result<SpinorField> {
        Ok(self.initial.sample(self.grid(n)?))
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }
}

/// The three reference experiments on `(-8, 8)` with Gaussian data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Example {
    /// Nonlinear, no magnetic potential.
    I,
    /// Linear, with magnetic potential.
    II,
    /// Nonlinear, with magnetic potential.
    III,
}

impl Example {
    pub fn problem(self, epsilon: f64) -> Problem {
        let (v_m, lambda) = match self {
            Example::I => (Potential::Zero, 0.5),
            Example::II => (Potential::ShiftedRational, 0.0),
            Example::III => (Potential::ShiftedRational, 0.5),
        };
        Problem {
            epsilon,
            lambda,
            v_e: Potential::DecayingRational,
            v_m,
            a: -8.0,
            b: 8.0,
            initial: InitialCondition::GaussianPair,
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Example::I => "I",
            Example::II => "II",
            Example::III => "III",
        };
        f.write_str(s)
    }
}

impl FromStr for Example {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Example::I),
            "II" | "2" => Ok(Example::II),
            "III" | "3" => Ok(Example::III),
            other => invalid(format!("unknown example '{other}' (expected I, II or III)")),
        }
    }
}

/// Nonlinearity at one point, with `e2 = exp(2 i tau)`:
/// `-i [v_e + v_m A(tau)] u - i lambda (beta u, u) beta u`.
#[inline]
pub fn f_point(v_e: f64, v_m: f64, lambda: f64, e2: C64, u: [C64; 2]) -> [C64; 2] {
    let q = u[0].norm_sqr() - u[1].norm_sqr();
    [
        -I * (u[0] * (v_e + lambda * q) + e2 * u[1] * v_m),
        -I * (u[1] * (v_e - lambda * q) + e2.conj() * u[0] * v_m),
    ]
}

/// Real-linear derivative of [`f_point`] in `u` along `w`.
#[inline]
pub fn df_du_point(v_e: f64, v_m: f64, lambda: f64, e2: C64, u: [C64; 2], w: [C64; 2]) -> [C64; 2] {
    let q = u[0].norm_sqr() - u[1].norm_sqr();
    // 2 Re (beta w, u)
    let dq = 2.0 * (w[0] * u[0].conj() - w[1] * u[1].conj()).re;
    [
        -I * (w[0] * (v_e + lambda * q) + e2 * w[1] * v_m + u[0] * (lambda * dq)),
        -I * (w[1] * (v_e - lambda * q) + e2.conj() * w[0] * v_m - u[1] * (lambda * dq)),
    ]
}

/// Second derivative of the cubic part of [`f_point`] in `u` along `(w, w)`.
#[inline]
pub fn d2f_du2_point(lambda: f64, u: [C64; 2], w: [C64; 2]) -> [C64; 2] {
    let bww = w[0].norm_sqr() - w[1].norm_sqr();
    let re_bwu = (w[0] * u[0].conj() - w[1] * u[1].conj()).re;
    [
        -I * lambda * (u[0] * (2.0 * bww) + w[0] * (4.0 * re_bwu)),
        I * lambda * (u[1] * (2.0 * bww) + w[1] * (4.0 * re_bwu)),
    ]
}

/// Direction of the filtering map.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterDirection {
    /// `u = diag(e^{it/eps^2}, e^{-it/eps^2}) Phi`
    Forward,
    /// `Phi = diag(e^{-it/eps^2}, e^{it/eps^2}) u`
    Inverse,
}

pub fn filter(phi: &SpinorField, t: f64, epsilon: f64, direction: FilterDirection) -> SpinorField {
    let theta = match direction {
        FilterDirection::Forward => t / (epsilon * epsilon),
        FilterDirection::Inverse => -t / (epsilon * epsilon),
    };
    let p = C64::from_polar(1.0, theta.rem_euclid(2.0 * PI));
    phi.map(|_, [a, b]| [a * p, b * p.conj()])
}

/// `M = dx sum_j |phi_1|^2 + |phi_2|^2`.
pub fn mass(phi: &SpinorField) -> f64 {
    let s: f64 = phi.component(0).iter().chain(phi.component(1)).map(|c| c.norm_sqr()).sum();
    s * phi.grid().dx()
}

/// The problem definition on a concrete grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiracModel {
    epsilon: f64,
    lambda: f64,
    v_e: Potential,
    v_m: Potential,
    grid: SpaceGrid,
}

impl DiracModel {
    pub fn new(epsilon: f64, lambda: f64, v_e: Potential, v_m: Potential, grid: SpaceGrid) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return invalid(format!("epsilon must lie in (0, 1], got {epsilon}"));
        }
        if !lambda.is_finite() {
            return invalid("lambda must be finite");
        }
        Ok(Self { epsilon, lambda, v_e, v_m, grid })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn v_e(&self) -> &Potential {
        &self.v_e
    }

    pub fn v_m(&self) -> &Potential {
        &self.v_m
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    pub fn has_static_potentials(&self) -> bool {
        self.v_e.is_static() && self.v_m.is_static()
    }

    pub fn with_grid(&self, grid: SpaceGrid) -> Self {
        Self { grid, ..self.clone() }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(epsilon, self.lambda, self.v_e.clone(), self.v_m.clone(), self.grid)
    }

    fn profile(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.grid.points().into_iter().map(f).collect()
    }

    pub fn v_e_profile(&self, t: f64) -> Vec<f64> {
        self.profile(|x| self.v_e.value(t, x))
    }

    pub fn v_m_profile(&self, t: f64) -> Vec<f64> {
        self.profile(|x| self.v_m.value(t, x))
    }

    pub fn dt_v_e_profile(&self, t: f64) -> Vec<f64> {
        self.profile(|x| self.v_e.dt(t, x))
    }

    pub fn dt_v_m_profile(&self, t: f64) -> Vec<f64> {
        self.profile(|x| self.v_m.dt(t, x))
    }

    pub fn dtt_v_e_profile(&self, t: f64) -> Vec<f64> {
        self.profile(|x| self.v_e.dtt(t, x))
    }

    pub fn dtt_v_m_profile(&self, t: f64) -> Vec<f64> {
        self.profile(|x| self.v_m.dtt(t, x))
    }

    /// `F(t, tau, u)` at every grid point.
    pub fn nonlinearity(&self, t: f64, tau: f64, u: &SpinorField) -> SpinorField {
        let (ve, vm) = (self.v_e_profile(t), self.v_m_profile(t));
        let e2 = C64::from_polar(1.0, 2.0 * tau);
        u.map(|j, v| f_point(ve[j], vm[j], self.lambda, e2, v))
    }

    /// `F_e(t, u) = -i [V_e u + lambda (beta u, u) beta u]`, the `tau`-average of `F`.
    pub fn nonlinearity_e(&self, t: f64, u: &SpinorField) -> SpinorField {
        let ve = self.v_e_profile(t);
        u.map(|j, v| f_point(ve[j], 0.0, self.lambda, C64::new(1.0, 0.0), v))
    }

    /// Real-linear derivative `dF/du (t, tau, u) w`.
    pub fn df_du(&self, t: f64, tau: f64, u: &SpinorField, w: &SpinorField) -> SpinorField {
        let (ve, vm) = (self.v_e_profile(t), self.v_m_profile(t));
        let e2 = C64::from_polar(1.0, 2.0 * tau);
        u.map(|j, v| df_du_point(ve[j], vm[j], self.lambda, e2, v, w.at(j)))
    }

    /// `dF_e/du (t, u) w`.
    pub fn df_e_du(&self, t: f64, u: &SpinorField, w: &SpinorField) -> SpinorField {
        let ve = self.v_e_profile(t);
        u.map(|j, v| df_du_point(ve[j], 0.0, self.lambda, C64::new(1.0, 0.0), v, w.at(j)))
    }

    /// `dF/dt (t, tau, u) = -i [dt V_e + dt V_m A(tau)] u`.
    pub fn df_dt(&self, t: f64, tau: f64, u: &SpinorField) -> SpinorField {
        let (ve, vm) = (self.dt_v_e_profile(t), self.dt_v_m_profile(t));
        let e2 = C64::from_polar(1.0, 2.0 * tau);
        u.map(|j, v| f_point(ve[j], vm[j], 0.0, e2, v))
    }

    pub fn df_e_dt(&self, t: f64, u: &SpinorField) -> SpinorField {
        let ve = self.dt_v_e_profile(t);
        u.map(|j, v| f_point(ve[j], 0.0, 0.0, C64::new(1.0, 0.0), v))
    }

    /// `F(t, tau_j, U(tau_j, .))` on the whole two-scale grid.
    pub fn nonlinearity_two_scale(&self, t: f64, u: &TwoScaleField) -> TwoScaleField {
        let (ve, vm) = (self.v_e_profile(t), self.v_m_profile(t));
        let lambda = self.lambda;
        u.map(|tau, m, v| f_point(ve[m], vm[m], lambda, C64::from_polar(1.0, 2.0 * tau), v))
    }

    pub fn df_du_two_scale(&self, t: f64, u: &TwoScaleField, w: &TwoScaleField) -> TwoScaleField {
        let (ve, vm) = (self.v_e_profile(t), self.v_m_profile(t));
        let tg = *u.tau_grid();
        let nx = self.grid.len();
        let mut out = u.clone();
        for j in 0..tg.len() {
            let e2 = C64::from_polar(1.0, 2.0 * tg.tau(j));
            for m in 0..nx {
                let v = df_du_point(ve[m], vm[m], self.lambda, e2, u.at(j, m), w.at(j, m));
                out.set(j, m, v);
            }
        }
        out
    }

    pub fn df_dt_two_scale(&self, t: f64, u: &TwoScaleField) -> TwoScaleField {
        let (ve, vm) = (self.dt_v_e_profile(t), self.dt_v_m_profile(t));
        u.map(|tau, m, v| f_point(ve[m], vm[m], 0.0, C64::from_polar(1.0, 2.0 * tau), v))
    }

    /// Energy of `phi` for static potentials, evaluated at `t = 0`.
    pub fn energy(&self, phi: &SpinorField) -> Result<f64> {
        energy(phi, self)
    }
}

pub fn nonlinearity_f(t: f64, tau: f64, u: &SpinorField, m: &DiracModel) -> SpinorField {
    m.nonlinearity(t, tau, u)
}

pub fn f_e(t: f64, u: &SpinorField, m: &DiracModel) -> SpinorField {
    m.nonlinearity_e(t, u)
}

pub fn df_du(t: f64, tau: f64, u: &SpinorField, w: &SpinorField, m: &DiracModel) -> SpinorField {
    m.df_du(t, tau, u, w)
}

pub fn df_dt(t: f64, tau: f64, u: &SpinorField, m: &DiracModel) -> SpinorField {
    m.df_dt(t, tau, u)
}

/// Quadrature of the energy density
/// `(1/eps^2)(Phi, beta Phi) - (i/eps)(Phi, alpha dx Phi) + V_e |Phi|^2
///  + V_m (Phi, alpha Phi) + (lambda/2) (beta Phi, Phi)^2`.
///
/// Brackets are conjugate-linear in the first slot, so the kinetic term is
/// the expectation of `-(i/eps) alpha dx`. The quartic term is the one whose
/// variation gives the cubic term
/// `lambda (beta Phi, Phi) beta Phi` of the equation, so this is the
/// conserved Hamiltonian.
///
/// Potentials are evaluated at `t = 0`; the functional is only conserved
/// when they are static.
pub fn energy(phi: &SpinorField, m: &DiracModel) -> Result<f64> {
    phi.check_same_grid(&SpinorField::zeros(*m.grid()))?;
    let eps = m.epsilon;
    let ve = m.v_e_profile(0.0);
    let vm = m.v_m_profile(0.0);
    let dphi = phi.dx(1);
    let (al, be) = (alpha(), beta());
    let mut total = C64::default();
    let mut scale = 0.0f64;
    for j in 0..phi.len() {
        let p = phi.at(j);
        let n2 = p[0].norm_sqr() + p[1].norm_sqr();
        let terms = [
            inner(p, be.apply(p)) / (eps * eps),
            -I / eps * inner(al.apply(dphi.at(j)), p),
            C64::new(ve[j] * n2, 0.0),
            inner(p, al.apply(p)) * vm[j],
            inner(be.apply(p), p).powi(2) * (0.5 * m.lambda),
        ];
        for t in terms {
            total += t;
            scale += t.norm();
        }
    }
    let dx = phi.grid().dx();
    total *= dx;
    scale *= dx;
    if total.im.abs() > 1e-10 * scale.max(1.0) {
        return Err(Error::NumericalConsistency(format!(
            "energy has imaginary part {:.3e} (real part {:.6e})",
            total.im, total.re
        )));
    }
    Ok(total.re)
}
