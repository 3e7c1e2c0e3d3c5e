//! Independent oracles shared by the integration tests. Nothing here reuses
//! the library's FFT-based operators: differentiation matrices are assembled
//! from their defining finite sums, and the original (unfiltered) Dirac
//! equation is integrated by an operator-splitting method.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use ua_dirac::model::DiracModel;
use ua_dirac::steppers::PredictionVariant;
use ua_dirac::spectral::{SpaceGrid, TauGrid, C64};
use ua_dirac::{SpinorField, TwoScaleField};

pub const I: C64 = C64::new(0.0, 1.0);

/// `d_{n,m} = (1/N) sum_{l=-N/2}^{N/2-1} (i mu_l) exp(i mu_l (x_n - x_m))`.
pub fn literal_dx(grid: &SpaceGrid) -> DMatrix<C64> {
    let n = grid.len();
    let len = grid.b() - grid.a();
    let h = n as i64 / 2;
    DMatrix::from_fn(n, n, |r, c| {
        let dx = grid.x(r) - grid.x(c);
        (-h..h)
            .map(|l| {
                let mu = 2.0 * PI * l as f64 / len;
                I * mu * C64::from_polar(1.0, mu * dx)
            })
            .sum::<C64>()
            / n as f64
    })
}

/// `d_{n,m} = (i/N_tau) sum_{l=-N_tau/2}^{N_tau/2-1} l exp(i l (tau_n - tau_m))`.
pub fn literal_dtau(tau: &TauGrid) -> DMatrix<C64> {
    let n = tau.len();
    let h = n as i64 / 2;
    DMatrix::from_fn(n, n, |r, c| {
        let d = tau.tau(r) - tau.tau(c);
        (-h..h).map(|l| I * l as f64 * C64::from_polar(1.0, l as f64 * d)).sum::<C64>() / n as f64
    })
}

/// Unknown ordering of the monolithic systems: `(component, tau_j, x_m)`.
pub fn flatten(u: &TwoScaleField) -> DVector<C64> {
    DVector::from_iterator(
        2 * u.component(0).len(),
        u.component(0).iter().chain(u.component(1)).copied(),
    )
}

pub fn unflatten(v: &DVector<C64>, tau: TauGrid, space: SpaceGrid) -> TwoScaleField {
    let n = tau.len() * space.len();
    TwoScaleField::from_components(tau, space, v.as_slice()[..n].to_vec(), v.as_slice()[n..].to_vec()).unwrap()
}

/// Matrix of the linear two-scale operator
/// `K U = eps^{-2} dtau U + eps^{-1} A(tau) dx U` on the whole grid.
pub fn transport_operator(eps: f64, tau: &TauGrid, space: &SpaceGrid) -> DMatrix<C64> {
    let (nt, nx) = (tau.len(), space.len());
    let block = nt * nx;
    let dt_m = literal_dtau(tau);
    let dx_m = literal_dx(space);
    let mut k = DMatrix::zeros(2 * block, 2 * block);
    for comp in 0..2 {
        let off = comp * block;
        for j in 0..nt {
            for jj in 0..nt {
                for m in 0..nx {
                    k[(off + j * nx + m, off + jj * nx + m)] += dt_m[(j, jj)] / (eps * eps);
                }
            }
        }
    }
    for j in 0..nt {
        let e2 = C64::from_polar(1.0, 2.0 * tau.tau(j));
        for m in 0..nx {
            for mm in 0..nx {
                let d = dx_m[(m, mm)] / eps;
                // row of u1 couples to u2 through e^{2i tau}, and vice versa
                k[(j * nx + m, block + j * nx + mm)] += e2 * d;
                k[(block + j * nx + m, j * nx + mm)] += e2.conj() * d;
            }
        }
    }
    k
}

fn identity_plus(k: &DMatrix<C64>, diag: f64, scale: f64) -> DMatrix<C64> {
    let n = k.nrows();
    let mut m = k * C64::new(scale, 0.0);
    for i in 0..n {
        m[(i, i)] += diag;
    }
    m
}

/// Backward-Euler step of length `h` with explicit forcing `f`:
/// `(U' - U)/h + K U' = f`.
pub fn dense_first_order(k: &DMatrix<C64>, h: f64, u: &DVector<C64>, f: &DVector<C64>) -> DVector<C64> {
    let m = identity_plus(k, 1.0 / h, 1.0);
    let rhs = u / C64::new(h, 0.0) + f;
    m.lu().solve(&rhs).unwrap()
}

/// Crank-Nicolson step: `(U' - U)/dt + K (U' + U)/2 = f`.
pub fn dense_crank_nicolson(k: &DMatrix<C64>, dt: f64, u: &DVector<C64>, f: &DVector<C64>) -> DVector<C64> {
    let plus = identity_plus(k, 1.0 / dt, 0.5);
    let minus = identity_plus(k, 1.0 / dt, -0.5);
    let rhs = minus * u + f;
    plus.lu().solve(&rhs).unwrap()
}

fn nyquist_free_modes(n: usize) -> impl Iterator<Item = (usize, i64)> {
    let h = n as i64 / 2;
    (0..n).map(move |k| (k, if (k as i64) < h { k as i64 } else { k as i64 - n as i64 }))
}

/// Naive DFT with the `1/N` forward normalization.
pub fn dft(v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n)
        .map(|k| {
            v.iter()
                .enumerate()
                .map(|(j, x)| x * C64::from_polar(1.0, -2.0 * PI * (k * j) as f64 / n as f64))
                .sum::<C64>()
                / n as f64
        })
        .collect()
}

pub fn idft(c: &[C64]) -> Vec<C64> {
    let n = c.len();
    (0..n)
        .map(|j| {
            c.iter()
                .enumerate()
                .map(|(k, x)| x * C64::from_polar(1.0, 2.0 * PI * (k * j) as f64 / n as f64))
                .sum::<C64>()
        })
        .collect()
}

/// Strang splitting for the original Dirac equation
/// `i dt Phi = -(i/eps) alpha dx Phi + eps^{-2} beta Phi + (V_e + V_m alpha) Phi + lambda (beta Phi, Phi) beta Phi`
/// with static potentials. The free Dirac flow is exact per Fourier mode;
/// the potential/nonlinear flow is split again into the exact `V_m alpha`
/// rotation and the exact phase rotation of the remaining diagonal part.
pub struct DiracSplitting {
    eps: f64,
    lambda: f64,
    ve: Vec<f64>,
    vm: Vec<f64>,
    mu: Vec<f64>,
}

impl DiracSplitting {
    pub fn new(m: &DiracModel) -> Self {
        let g = *m.grid();
        let n = g.len();
        let len = g.b() - g.a();
        let mu = nyquist_free_modes(n).map(|(_, l)| 2.0 * PI * l as f64 / len).collect();
        Self { eps: m.epsilon(), lambda: m.lambda(), ve: m.v_e_profile(0.0), vm: m.v_m_profile(0.0), mu }
    }

    fn free(&self, phi: &mut [Vec<C64>; 2], t: f64) {
        let e = self.eps;
        let c1 = dft(&phi[0]);
        let c2 = dft(&phi[1]);
        let mut o1 = vec![C64::default(); c1.len()];
        let mut o2 = vec![C64::default(); c1.len()];
        for k in 0..c1.len() {
            // H = (mu/eps) alpha + beta/eps^2, H^2 = w^2 Id
            let (a, b) = (self.mu[k] / e, 1.0 / (e * e));
            let w = (a * a + b * b).sqrt();
            let (cs, sn) = ((w * t).cos(), (w * t).sin());
            // exp(-i H t) = cos(w t) Id - i sin(w t) H / w
            let h11 = b / w;
            let h12 = a / w;
            o1[k] = c1[k] * (cs - I * sn * h11) - I * sn * h12 * c2[k];
            o2[k] = -I * sn * h12 * c1[k] + c2[k] * (cs + I * sn * h11);
        }
        phi[0] = idft(&o1);
        phi[1] = idft(&o2);
    }

    fn local(&self, phi: &mut [Vec<C64>; 2], t: f64) {
        for j in 0..phi[0].len() {
            let (mut p1, mut p2) = (phi[0][j], phi[1][j]);
            let half = 0.5 * t;
            // V_m alpha rotation over t/2
            let (c, s) = ((self.vm[j] * half).cos(), (self.vm[j] * half).sin());
            let r = |p1: C64, p2: C64| (p1 * c - I * s * p2, -I * s * p1 + p2 * c);
            (p1, p2) = r(p1, p2);
            let q = p1.norm_sqr() - p2.norm_sqr();
            p1 *= C64::from_polar(1.0, -(self.ve[j] + self.lambda * q) * t);
            p2 *= C64::from_polar(1.0, -(self.ve[j] - self.lambda * q) * t);
            (p1, p2) = r(p1, p2);
            phi[0][j] = p1;
            phi[1][j] = p2;
        }
    }

    pub fn solve(&self, phi0: &SpinorField, t_final: f64, steps: usize) -> SpinorField {
        let dt = t_final / steps as f64;
        let mut phi = [phi0.component(0).to_vec(), phi0.component(1).to_vec()];
        for _ in 0..steps {
            self.local(&mut phi, 0.5 * dt);
            self.free(&mut phi, dt);
            self.local(&mut phi, 0.5 * dt);
        }
        let [a, b] = phi;
        SpinorField::from_components(*phi0.grid(), a, b).unwrap()
    }
}

/// Least-squares slope of `log(err)` against `log(dt)`.
pub fn slope(dts: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub fn random_field(tau: TauGrid, space: SpaceGrid, seed: u64) -> TwoScaleField {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    TwoScaleField::from_fn(tau, space, |_, _| {
        [
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        ]
    })
}

pub fn max_diff(a: &TwoScaleField, b: &TwoScaleField) -> f64 {
    (a - b).max_norm()
}

pub fn dense_ua1(m: &DiracModel, u: &TwoScaleField, dt: f64) -> TwoScaleField {
    let (tau, space) = (*u.tau_grid(), *u.space_grid());
    let k = transport_operator(m.epsilon(), &tau, &space);
    let f = flatten(&m.nonlinearity_two_scale(0.0, u));
    unflatten(&dense_first_order(&k, dt, &flatten(u), &f), tau, space)
}

pub fn dense_ua2(m: &DiracModel, u: &TwoScaleField, dt: f64, prediction: PredictionVariant) -> TwoScaleField {
    let (tau, space) = (*u.tau_grid(), *u.space_grid());
    let k = transport_operator(m.epsilon(), &tau, &space);
    let f = flatten(&m.nonlinearity_two_scale(0.0, u));
    let un = flatten(u);
    let half = unflatten(&dense_first_order(&k, prediction.step_length(dt), &un, &f), tau, space);
    let f_half = flatten(&m.nonlinearity_two_scale(0.5 * dt, &half));
    unflatten(&dense_crank_nicolson(&k, dt, &un, &f_half), tau, space)
}
