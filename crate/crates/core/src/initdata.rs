//! Chapman-Enskog prepared initial data `U_k(tau, x)`, `k = 0..=5`, for the
//! two-scale problem, together with the auxiliary functions they are built
//! from.
//!
//! Every correction term carries a factor `e^{+-2i tau} - 1`, so each
//! prepared field equals `Phi_0` on the `tau = 0` row.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{SpinorField, TwoScaleField};
use crate::model::{d2f_du2_point, df_du_point, f_point, DiracModel};
use crate::spectral::{TauGrid, C64, I};
use crate::tau_ops::{a_matrix, b_matrix, c_matrix, dtau, linv, linv2, pi_avg, Mat2};

/// Which definition of the auxiliary `g_1` enters `U_4` and `U_5`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum G1Variant {
    /// `g_1 = L^{-1}(I - Pi)[A f_1]`.
    #[default]
    Printed,
    /// `g_1 = L^{-1}(I - Pi)[A dx f_1]`, mirroring `g_2`.
    Dx,
}

impl fmt::Display for G1Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            G1Variant::Printed => "printed",
            G1Variant::Dx => "dx",
        })
    }
}

impl FromStr for G1Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "printed" => Ok(G1Variant::Printed),
            "dx" => Ok(G1Variant::Dx),
            other => invalid(format!("unknown g1 variant '{other}' (expected printed or dx)")),
        }
    }
}

fn e2(tau: f64) -> C64 {
    C64::from_polar(1.0, 2.0 * tau)
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

fn zero() -> C64 {
    C64::default()
}

/// `[[0, e2 - 1], [1 - e2*, 0]]`
fn m1(tau: f64) -> Mat2 {
    let e = e2(tau);
    Mat2::new(zero(), e - 1.0, one() - e.conj(), zero())
}

/// `diag(1 - e2, 1 - e2*)`
fn m2(tau: f64) -> Mat2 {
    let e = e2(tau);
    Mat2::diag(one() - e, one() - e.conj())
}

/// `[[0, 1 - e2], [1 - e2*, 0]]`
fn m3(tau: f64) -> Mat2 {
    let e = e2(tau);
    Mat2::new(zero(), one() - e, one() - e.conj(), zero())
}

/// `diag(e2 - 1, e2* - 1)`
fn m4(tau: f64) -> Mat2 {
    let e = e2(tau);
    Mat2::diag(e - 1.0, e.conj() - 1.0)
}

/// `[[0, e2 - 1], [e2* - 1, 0]]`
fn m5(tau: f64) -> Mat2 {
    let e = e2(tau);
    Mat2::new(zero(), e - 1.0, e.conj() - 1.0, zero())
}

/// `diag(1 - e2, e2* - 1)`
fn m6(tau: f64) -> Mat2 {
    let e = e2(tau);
    Mat2::diag(one() - e, e.conj() - 1.0)
}

/// `diag(e2 - 1, 1 - e2*)`
fn m7(tau: f64) -> Mat2 {
    let e = e2(tau);
    Mat2::diag(e - 1.0, one() - e.conj())
}

/// Auxiliary functions of the expansion. Entries not needed for the
/// requested level are `None`.
#[derive(Clone, Debug, Default)]
pub struct Auxiliaries {
    pub f0: Option<TwoScaleField>,
    pub f1: Option<TwoScaleField>,
    pub f2: Option<TwoScaleField>,
    pub f3: Option<TwoScaleField>,
    pub g1: Option<TwoScaleField>,
    pub g2: Option<TwoScaleField>,
    pub v: Option<TwoScaleField>,
    pub w0: Option<TwoScaleField>,
    pub w1: Option<TwoScaleField>,
    pub f_t: Option<TwoScaleField>,
    pub h0: Option<TwoScaleField>,
    pub h1: Option<TwoScaleField>,
    pub z_e: Option<SpinorField>,
    pub z_m: Option<SpinorField>,
    /// Intermediate prepared fields `U_1`, `U_2` (with its `V_m` term) and `U_3`.
    pub u1: Option<TwoScaleField>,
    pub u2_eps: Option<TwoScaleField>,
    pub u3: Option<TwoScaleField>,
}

impl Auxiliaries {
    /// `(name, field)` for every `tau`-dependent auxiliary that has been built.
    pub fn named(&self) -> Vec<(&'static str, &TwoScaleField)> {
        [
            ("f0", &self.f0),
            ("f1", &self.f1),
            ("f2", &self.f2),
            ("f3", &self.f3),
            ("g1", &self.g1),
            ("g2", &self.g2),
            ("v", &self.v),
            ("w0", &self.w0),
            ("w1", &self.w1),
            ("f_t", &self.f_t),
            ("h0", &self.h0),
            ("h1", &self.h1),
        ]
        .into_iter()
        .filter_map(|(n, f)| f.as_ref().map(|f| (n, f)))
        .collect()
    }
}

/// A prepared initial field and the auxiliaries used to build it.
#[derive(Clone, Debug)]
pub struct PreparedData {
    pub order: u32,
    pub field: TwoScaleField,
    pub aux: Auxiliaries,
}

/// Shared ingredients: spatial derivatives of `Phi_0` and the potentials at `t = 0`.
struct Ingredients<'a> {
    m: &'a DiracModel,
    tg: TauGrid,
    phi0: &'a SpinorField,
    eps: f64,
    vm0: Vec<f64>,
    /// `dx^k Phi_0`, `k = 0..=5`
    d: Vec<SpinorField>,
    /// `F_e(0, Phi_0)`
    fe0: SpinorField,
}

impl<'a> Ingredients<'a> {
    fn new(phi0: &'a SpinorField, m: &'a DiracModel, tg: TauGrid) -> Self {
        let d = (0..=5).map(|k| phi0.dx(k)).collect();
        Self {
            m,
            tg,
            phi0,
            eps: m.epsilon(),
            vm0: m.v_m_profile(0.0),
            d,
            fe0: m.nonlinearity_e(0.0, phi0),
        }
    }

    fn tm(&self, mat: fn(f64) -> Mat2, s: &SpinorField) -> TwoScaleField {
        TwoScaleField::tau_matrix_times(self.tg, mat, s)
    }

    fn bc(&self, s: &SpinorField) -> TwoScaleField {
        TwoScaleField::broadcast(self.tg, s)
    }

    fn f(&self, u: &TwoScaleField) -> TwoScaleField {
        self.m.nonlinearity_two_scale(0.0, u)
    }

    /// `h - h(tau = 0)`.
    fn shifted(&self, h: &TwoScaleField) -> TwoScaleField {
        h - &self.bc(&h.row(0))
    }

    fn vm_phi0(&self) -> SpinorField {
        self.phi0.scale_by(&self.vm0)
    }

    /// `C dx^2 Phi_0 + F_e(0, Phi_0)`
    fn limit_rhs(&self) -> SpinorField {
        &self.d[2].apply_matrix(&c_matrix()) + &self.fe0
    }

    fn u1(&self) -> TwoScaleField {
        let e = self.eps;
        &self.bc(self.phi0) + &(self.tm(m1, &self.d[1]) * (I * e / 2.0))
    }

    fn u2_eps(&self, u1: &TwoScaleField) -> TwoScaleField {
        let e = self.eps;
        u1 + &(self.tm(m2, &self.d[2]) * (e * e / 4.0)) - self.tm(m1, &self.vm_phi0()) * (e * e / 2.0)
    }

    /// `Z_m = dt V_m(0) Phi_0 + V_m(0) (C dx^2 Phi_0 + F_e(0, Phi_0))`
    fn z_m(&self) -> SpinorField {
        let dvm = self.m.dt_v_m_profile(0.0);
        &self.phi0.scale_by(&dvm) + &self.limit_rhs().scale_by(&self.vm0)
    }

    /// `Z_e = dF_e/du(0, Phi_0)(C dx^2 Phi_0 + F_e(0, Phi_0)) + dF_e/dt(0, Phi_0)`
    fn z_e(&self) -> SpinorField {
        &self.m.df_e_du(0.0, self.phi0, &self.limit_rhs()) + &self.m.df_e_dt(0.0, self.phi0)
    }

    /// `L^{-1}(I-Pi)[dF/dt(0, Phi_0) + dF/du(0, Phi_0)(C dx^2 Phi_0 + F_e(0, Phi_0))]`
    fn h0(&self) -> TwoScaleField {
        let p = self.bc(self.phi0);
        let w = self.bc(&self.limit_rhs());
        let inner = &self.m.df_dt_two_scale(0.0, &p) + &self.m.df_du_two_scale(0.0, &p, &w);
        linv(&inner)
    }
}

/// Builds the auxiliaries that enter `U_level`.
pub fn aux_functions(
    phi0: &SpinorField,
    m: &DiracModel,
    tau: TauGrid,
    level: u32,
    g1_variant: G1Variant,
) -> Result<Auxiliaries> {
    if level > 5 {
        return invalid(format!("initial-data order must lie in 0..=5, got {level}"));
    }
    phi0.check_same_grid(&SpinorField::zeros(*m.grid()))?;
    let ing = Ingredients::new(phi0, m, tau);
    build_aux(&ing, level, g1_variant)
}

fn build_aux(ing: &Ingredients<'_>, level: u32, g1_variant: G1Variant) -> Result<Auxiliaries> {
    let mut aux = Auxiliaries::default();
    if level == 0 {
        return Ok(aux);
    }
    let e = ing.eps;
    let u1 = ing.u1();
    aux.u1 = Some(u1.clone());
    if level == 1 {
        return Ok(aux);
    }
    aux.f0 = Some(linv(&ing.f(&ing.bc(ing.phi0))));
    let u2_eps = ing.u2_eps(&u1);
    aux.u2_eps = Some(u2_eps.clone());
    if level == 2 {
        return Ok(aux);
    }
    let f1 = linv(&ing.f(&u1));
    aux.f1 = Some(f1.clone());
    if level == 3 {
        return Ok(aux);
    }
    aux.f2 = Some(linv(&ing.f(&u2_eps)));
    let a_f1 = match g1_variant {
        G1Variant::Printed => f1.apply_tau_matrix(a_matrix),
        G1Variant::Dx => f1.dx(1).apply_tau_matrix(a_matrix),
    };
    aux.g1 = Some(linv(&a_f1));
    let h0 = ing.h0();
    aux.f_t = Some(linv(&h0));
    aux.h0 = Some(h0);
    aux.z_m = Some(ing.z_m());
    if level == 4 {
        return Ok(aux);
    }

    let u2 = &u2_eps - &(ing.shifted(aux.f0.as_ref().unwrap()) * (e * e));
    let u3 = assemble_u3(ing, &u2, &f1);
    aux.f3 = Some(linv(&ing.f(&u3)));
    aux.u3 = Some(u3);
    aux.g2 = Some(linv(&aux.f2.as_ref().unwrap().dx(1).apply_tau_matrix(a_matrix)));
    let a_dx_f1 = f1.dx(1).apply_tau_matrix(a_matrix);
    aux.v = Some(linv(&linv(&a_dx_f1).apply_tau_matrix(a_matrix)));
    aux.w0 = Some(linv2(&aux.h0.as_ref().unwrap().dx(1).apply_tau_matrix(a_matrix)));

    // H_1 = dF/dt(U_1) + dF/du(U_1)[W], with the real-linear derivative applied
    // once to the sum W of all its arguments.
    let b0 = b_matrix(0.0);
    let c = c_matrix();
    let pi_f_u1 = pi_avg(&ing.f(&u1));
    let pi_a_dx_f1 = pi_avg(&a_dx_f1);
    let w_const = &(&(&ing.d[2] + &(ing.d[3].apply_matrix(&b0) * e)).apply_matrix(&c) + &pi_f_u1) - &(pi_a_dx_f1 * e);
    let w_osc = ing.tm(b_matrix, &(&ing.d[3].apply_matrix(&c) + &ing.fe0.dx(1)));
    let w = &ing.bc(&w_const) - &(w_osc * e);
    let h1 = &m_df_dt(ing, &u1) + &ing.m.df_du_two_scale(0.0, &u1, &w);
    aux.w1 = Some(linv2(&h1));
    aux.h1 = Some(h1);
    aux.z_e = Some(ing.z_e());
    Ok(aux)
}

fn m_df_dt(ing: &Ingredients<'_>, u: &TwoScaleField) -> TwoScaleField {
    ing.m.df_dt_two_scale(0.0, u)
}

fn assemble_u3(ing: &Ingredients<'_>, u2: &TwoScaleField, f1: &TwoScaleField) -> TwoScaleField {
    let e = ing.eps;
    let e2 = e * e;
    let e3 = e2 * e;
    let mut u = u2 + &(ing.shifted(f1) * e2);
    u = &u + &(ing.tm(m1, &ing.d[3]) * (I * e3 / 4.0));
    u = &u + &(ing.tm(m2, &ing.vm_phi0().dx(1)) * (I * e3 / 4.0));
    &u + &(ing.tm(m3, &ing.fe0.dx(1)) * (e3 / 4.0))
}

/// Assembles `U_order(tau_j, x_m)`.
pub fn prepare_initial_data(
    phi0: &SpinorField,
    m: &DiracModel,
    tau: TauGrid,
    order: u32,
    g1_variant: G1Variant,
) -> Result<PreparedData> {
    let aux = aux_functions(phi0, m, tau, order, g1_variant)?;
    let ing = Ingredients::new(phi0, m, tau);
    let e = ing.eps;
    let (e2, e3, e4, e5) = (e * e, e * e * e, e.powi(4), e.powi(5));
    let field = match order {
        0 => ing.bc(phi0),
        1 => aux.u1.clone().unwrap(),
        2 => aux.u2_eps.clone().unwrap(),
        _ => {
            let get = |f: &Option<TwoScaleField>| f.as_ref().unwrap().clone();
            let f0 = get(&aux.f0);
            let f1 = get(&aux.f1);
            let u2 = &get(&aux.u2_eps) - &(ing.shifted(&f0) * e2);
            match order {
                3 => assemble_u3(&ing, &u2, &f1),
                4 => {
                    let f2 = get(&aux.f2);
                    let g1 = get(&aux.g1);
                    let f_t = get(&aux.f_t);
                    let u1 = get(&aux.u1);
                    let terms = [
                        ing.shifted(&f2) * e2,
                        ing.tm(m1, &ing.d[3]) * (I * e3 / 4.0),
                        ing.tm(m3, &pi_avg(&ing.f(&u1)).dx(1)) * (e3 / 4.0),
                        ing.shifted(&g1) * (-e3),
                        ing.tm(m1, &f1.row(0).dx(1)) * (-I * e3 / 2.0),
                        ing.tm(m4, &ing.d[4]) * (-3.0 * e4 / 16.0),
                        ing.tm(m1, &ing.vm_phi0().dx(2)) * (-e4 / 8.0),
                        ing.tm(m5, &pi_avg(&f1.dx(2).apply_tau_matrix(a_matrix))) * (e4 / 4.0),
                        ing.tm(m6, &ing.fe0.dx(2)) * (-I * e4 / 8.0),
                        ing.shifted(&f_t) * (-e4),
                    ];
                    terms.iter().fold(u2, |acc, t| &acc + t)
                }
                5 => {
                    let f2 = get(&aux.f2);
                    let f3 = get(&aux.f3);
                    let g1 = get(&aux.g1);
                    let g2 = get(&aux.g2);
                    let v = get(&aux.v);
                    let w0 = get(&aux.w0);
                    let w1 = get(&aux.w1);
                    let u1 = get(&aux.u1);
                    let u2_eps = get(&aux.u2_eps);
                    let z_m = aux.z_m.clone().unwrap();
                    let z_e = aux.z_e.clone().unwrap();
                    let terms = [
                        ing.shifted(&f3) * e2,
                        ing.tm(m1, &ing.d[3]) * (I * e3 / 4.0),
                        ing.tm(m3, &pi_avg(&ing.f(&u2_eps)).dx(1)) * (e3 / 4.0),
                        ing.shifted(&g2) * (-e3),
                        ing.tm(m1, &f2.row(0).dx(1)) * (-I * e3 / 2.0),
                        ing.tm(m4, &f1.row(0).dx(2)) * (e4 / 4.0),
                        ing.tm(m6, &pi_avg(&ing.f(&u1)).dx(2)) * (-I * e4 / 8.0),
                        ing.tm(m4, &ing.d[4]) * (-3.0 * e4 / 16.0),
                        ing.tm(m1, &g1.row(0).dx(1)) * (I * e4 / 2.0),
                        ing.shifted(&v) * e4,
                        ing.shifted(&w1) * (-e4),
                        ing.tm(m5, &pi_avg(&f1.dx(2).apply_tau_matrix(a_matrix))) * (e4 / 4.0),
                        ing.tm(m1, &ing.d[5]) * (3.0 * I * e5 / 16.0),
                        ing.shifted(&w0) * e5,
                        ing.tm(m5, &ing.fe0.dx(3)) * (-3.0 * e5 / 16.0),
                        ing.tm(m6, &pi_avg(&f1.dx(3).apply_tau_matrix(a_matrix))) * (I * e5 / 8.0),
                        ing.tm(m7, &z_m.dx(1)) * (-e5 / 8.0),
                        ing.tm(m4, &ing.vm_phi0().dx(3)) * (-I * e5 / 8.0),
                        ing.tm(m1, &z_e.dx(1)) * (-I * e5 / 8.0),
                    ];
                    terms.iter().fold(u2, |acc, t| &acc + t)
                }
                _ => unreachable!("order validated by aux_functions"),
            }
        }
    };
    Ok(PreparedData { order, field, aux })
}

/// Exact time derivatives `dt^p U(0)`, `p = 1..=3`, of the two-scale
/// problem started from `u0`, obtained by differentiating the equation
/// `dt U = L U + F(t, tau, U)` with `L U = -eps^{-2} dtau U - eps^{-1} A dx U`.
///
/// Returns `[dt U, dt^2 U, dt^3 U]` truncated to `max_order` entries.
pub fn initial_time_derivatives(u0: &TwoScaleField, m: &DiracModel, max_order: usize) -> Vec<TwoScaleField> {
    let e = m.epsilon();
    let ell = |u: &TwoScaleField| -> TwoScaleField {
        &(dtau(u) * (-1.0 / (e * e))) - &(u.dx(1).apply_tau_matrix(a_matrix) * (1.0 / e))
    };
    let mut out = Vec::new();
    if max_order == 0 {
        return out;
    }
    let ut = &ell(u0) + &m.nonlinearity_two_scale(0.0, u0);
    out.push(ut.clone());
    if max_order == 1 {
        return out;
    }
    let fu = |w: &TwoScaleField| m.df_du_two_scale(0.0, u0, w);
    let utt = &(&ell(&ut) + &m.df_dt_two_scale(0.0, u0)) + &fu(&ut);
    out.push(utt.clone());
    if max_order == 2 {
        return out;
    }
    let (ve, vm) = (m.v_e_profile(0.0), m.v_m_profile(0.0));
    let (dve, dvm) = (m.dt_v_e_profile(0.0), m.dt_v_m_profile(0.0));
    let (ddve, ddvm) = (m.dtt_v_e_profile(0.0), m.dtt_v_m_profile(0.0));
    let tg = *u0.tau_grid();
    let nx = u0.space_grid().len();
    let mut rest = TwoScaleField::zeros(tg, *u0.space_grid());
    for j in 0..tg.len() {
        let ph = e2(tg.tau(j));
        for k in 0..nx {
            let (u, w1, w2) = (u0.at(j, k), ut.at(j, k), utt.at(j, k));
            let ftt = f_point(ddve[k], ddvm[k], 0.0, ph, u);
            let ftu = f_point(dve[k], dvm[k], 0.0, ph, w1);
            let fuu = d2f_du2_point(m.lambda(), u, w1);
            let fu2 = df_du_point(ve[k], vm[k], m.lambda(), ph, u, w2);
            rest.set(
                j,
                k,
                [
                    ftt[0] + ftu[0] * 2.0 + fuu[0] + fu2[0],
                    ftt[1] + ftu[1] * 2.0 + fuu[1] + fu2[1],
                ],
            );
        }
    }
    out.push(&ell(&utt) + &rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Example, Potential};
    use crate::spectral::SpaceGrid;
    use crate::tau_ops::pi_avg_samples;

    fn setup(ex: Example, eps: f64) -> (SpinorField, DiracModel, TauGrid) {
        let p = ex.problem(eps);
        (p.initial_data(64).unwrap(), p.model(64).unwrap(), TauGrid::new(32).unwrap())
    }

    fn row0_diff(u: &TwoScaleField, phi0: &SpinorField) -> f64 {
        (&u.row(0) - phi0).max_norm()
    }

    #[test]
    fn helper_matrices_relations() {
        for tau in [0.0, 0.4, 1.7, 3.0] {
            let b0 = b_matrix(0.0);
            // B - B(0) = -(i/2) M1
            assert!((b_matrix(tau) - b0).max_abs_diff(&m1(tau).scale(-I * 0.5)) < 1e-15);
            // A - A(0) = -M3 = M5 - ... consistency of the sign patterns
            assert!((a_matrix(tau) - a_matrix(0.0)).max_abs_diff(&m3(tau).scale(-one())) < 1e-15);
            assert!(m4(tau).max_abs_diff(&m2(tau).scale(-one())) < 1e-15);
            assert!(m7(tau).max_abs_diff(&m6(tau).scale(-one())) < 1e-15);
            for m in [m1, m2, m3, m4, m5, m6, m7] {
                assert!(m(0.0).max_abs_diff(&Mat2::new(zero(), zero(), zero(), zero())) < 1e-15);
            }
        }
    }

    #[test]
    fn every_order_matches_phi0_at_tau_zero() {
        for ex in [Example::I, Example::II, Example::III] {
            for eps in [1.0, 0.25, 1.0 / 64.0] {
                let (phi0, m, tg) = setup(ex, eps);
                for order in 0..=5 {
                    for g1 in [G1Variant::Printed, G1Variant::Dx] {
                        let p = prepare_initial_data(&phi0, &m, tg, order, g1).unwrap();
                        assert!(row0_diff(&p.field, &phi0) < 1e-14, "{ex} eps={eps} order={order}");
                        assert!(p.field.is_finite());
                    }
                }
            }
        }
    }

    #[test]
    fn order_out_of_range_is_rejected() {
        let (phi0, m, tg) = setup(Example::I, 0.5);
        assert!(matches!(
            prepare_initial_data(&phi0, &m, tg, 6, G1Variant::Printed),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let (_, m, tg) = setup(Example::I, 0.5);
        let phi0 = Example::I.problem(0.5).initial_data(32).unwrap();
        assert!(prepare_initial_data(&phi0, &m, tg, 3, G1Variant::Printed).is_err());
    }

    #[test]
    fn linv_auxiliaries_have_zero_tau_mean() {
        let (phi0, m, tg) = setup(Example::III, 0.25);
        let aux = aux_functions(&phi0, &m, tg, 5, G1Variant::Printed).unwrap();
        let named = aux.named();
        assert_eq!(named.len(), 12);
        for (name, f) in named {
            if name == "h1" {
                continue;
            }
            let mean = pi_avg(f).max_norm();
            assert!(mean < 1e-13, "{name}: {mean:e}");
        }
    }

    #[test]
    fn f0_and_h0_vanish_without_magnetic_potential() {
        let (phi0, m, tg) = setup(Example::I, 0.25);
        let aux = aux_functions(&phi0, &m, tg, 5, G1Variant::Printed).unwrap();
        assert!(aux.f0.unwrap().max_norm() < 1e-15);
        assert!(aux.h0.unwrap().max_norm() < 1e-15);
        assert!(aux.f_t.unwrap().max_norm() < 1e-15);
    }

    #[test]
    fn f0_f_t_h0_match_closed_forms() {
        let (phi0, m, tg) = setup(Example::III, 0.25);
        let aux = aux_functions(&phi0, &m, tg, 5, G1Variant::Printed).unwrap();
        let vm0 = m.v_m_profile(0.0);
        let f0_closed = TwoScaleField::tau_matrix_times(tg, b_matrix, &phi0.scale_by(&vm0)) * (-I);
        assert!((&aux.f0.unwrap() - &f0_closed).max_norm() < 1e-12);
        let z_m = aux.z_m.clone().unwrap();
        let h0_closed = TwoScaleField::tau_matrix_times(tg, b_matrix, &z_m) * (-I);
        assert!((&aux.h0.unwrap() - &h0_closed).max_norm() < 1e-11);
        let ft_closed = TwoScaleField::tau_matrix_times(tg, a_matrix, &z_m) * (I / 4.0);
        assert!((&aux.f_t.unwrap() - &ft_closed).max_norm() < 1e-11);
    }

    #[test]
    fn time_dependent_magnetic_potential_enters_z_m() {
        let grid = SpaceGrid::new(-8.0, 8.0, 64).unwrap();
        let m = DiracModel::new(
            0.5,
            0.5,
            Potential::Zero,
            Potential::Oscillating { amplitude: 1.0, omega: 2.0 },
            grid,
        )
        .unwrap();
        let phi0 = crate::model::InitialCondition::GaussianPair.sample(grid);
        let tg = TauGrid::new(32).unwrap();
        let aux = aux_functions(&phi0, &m, tg, 5, G1Variant::Printed).unwrap();
        // V_m(0) = 0 and dt V_m(0) = 2, so Z_m = 2 Phi_0
        assert!((&aux.z_m.clone().unwrap() - &(&phi0 * 2.0)).max_norm() < 1e-14);
        let h0_closed = TwoScaleField::tau_matrix_times(tg, b_matrix, &aux.z_m.unwrap()) * (-I);
        assert!((&aux.h0.unwrap() - &h0_closed).max_norm() < 1e-12);
    }

    #[test]
    fn u3_structural_form_matches_explicit_form() {
        // The expansion writes the O(eps^3) part of U_3 both through B, A, C and
        // through the explicit matrices; both must agree.
        let (phi0, m, tg) = setup(Example::III, 0.3);
        let e: f64 = 0.3;
        let aux = aux_functions(&phi0, &m, tg, 5, G1Variant::Printed).unwrap();
        let f0 = aux.f0.clone().unwrap();
        let b0 = b_matrix(0.0);
        let c = c_matrix();
        let d3 = phi0.dx(3);
        let fe0 = m.nonlinearity_e(0.0, &phi0);
        let bdiff = |s: &SpinorField| {
            TwoScaleField::tau_matrix_times(tg, |t| b_matrix(t) - b_matrix(0.0), s)
        };
        let adiff = |s: &SpinorField| {
            TwoScaleField::tau_matrix_times(tg, |t| a_matrix(t) - a_matrix(0.0), s)
        };
        let structural = &(&(bdiff(&d3.apply_matrix(&(b0 * b0))) * (-e.powi(3)))
            - &(adiff(&(&d3.apply_matrix(&c) + &fe0.dx(1))) * (e.powi(3) / 4.0)))
            + &(bdiff(&f0.row(0).dx(1)) * e.powi(3));
        let vm0 = m.v_m_profile(0.0);
        let explicit = &(&TwoScaleField::tau_matrix_times(tg, m1, &d3) * (I * e.powi(3) / 4.0)
            + TwoScaleField::tau_matrix_times(tg, m2, &phi0.scale_by(&vm0).dx(1)) * (I * e.powi(3) / 4.0))
            + &(TwoScaleField::tau_matrix_times(tg, m3, &fe0.dx(1)) * (e.powi(3) / 4.0));
        assert!((&structural - &explicit).max_norm() < 1e-12);
    }

    #[test]
    fn u2_structural_form_matches_explicit_form() {
        let (phi0, m, tg) = setup(Example::II, 0.4);
        let e: f64 = 0.4;
        let aux = aux_functions(&phi0, &m, tg, 2, G1Variant::Printed).unwrap();
        let f0 = aux.f0.unwrap();
        let b0 = b_matrix(0.0);
        let bdiff = |s: &SpinorField| {
            TwoScaleField::tau_matrix_times(tg, |t| b_matrix(t) - b_matrix(0.0), s)
        };
        let structural = &(&(&TwoScaleField::broadcast(tg, &phi0) - &(bdiff(&phi0.dx(1)) * e))
            - &(bdiff(&phi0.dx(2).apply_matrix(&b0)) * (e * e)))
            + &((&f0 - &TwoScaleField::broadcast(tg, &f0.row(0))) * (e * e));
        assert!((&structural - &aux.u2_eps.unwrap()).max_norm() < 1e-12);
    }

    fn max_diff(a: u32, b: u32, eps: f64) -> f64 {
        let (phi0, m, tg) = setup(Example::III, eps);
        let ua = prepare_initial_data(&phi0, &m, tg, a, G1Variant::Printed).unwrap();
        let ub = prepare_initial_data(&phi0, &m, tg, b, G1Variant::Printed).unwrap();
        (&ua.field - &ub.field).max_norm()
    }

    #[test]
    fn corrections_shrink_with_epsilon() {
        for order in 1..=5 {
            let r = max_diff(order, 0, 1.0 / 32.0) / max_diff(order, 0, 1.0 / 64.0);
            assert!((r - 2.0).abs() < 0.2, "order {order}: ratio {r}");
        }
    }

    #[test]
    fn successive_orders_differ_by_matching_powers() {
        for k in 2u32..=5 {
            let d: Vec<f64> = [0.25, 0.125, 0.0625].iter().map(|&e| max_diff(k, k - 1, e)).collect();
            let slope = (d[0] / d[2]).log2() / 2.0;
            assert!((slope - k as f64).abs() < 0.25, "U{k}-U{}: slope {slope} from {d:?}", k - 1);
        }
    }

    #[test]
    fn u3_departs_from_base_u2_at_second_order() {
        let diff = |eps: f64| {
            let (phi0, m, tg) = setup(Example::III, eps);
            let aux = aux_functions(&phi0, &m, tg, 3, G1Variant::Printed).unwrap();
            let f0 = aux.f0.unwrap();
            let base = &aux.u2_eps.unwrap() - &((&f0 - &TwoScaleField::broadcast(tg, &f0.row(0))) * (eps * eps));
            let u3 = prepare_initial_data(&phi0, &m, tg, 3, G1Variant::Printed).unwrap();
            (&u3.field - &base).max_norm()
        };
        let (a, b, c) = (diff(0.25), diff(0.125), diff(0.0625));
        assert!((a / b - 4.0).abs() < 1.0 && (b / c - 4.0).abs() < 0.6, "{a} {b} {c}");
    }

    #[test]
    fn gaussian_data_is_tau_band_limited() {
        // The cubic nonlinearity keeps every auxiliary a low-degree trigonometric
        // polynomial in tau; the top half of the tau spectrum must be empty.
        let (phi0, m, tg) = setup(Example::III, 0.5);
        let p = prepare_initial_data(&phi0, &m, tg, 5, G1Variant::Dx).unwrap();
        let n = tg.len();
        let fft = crate::spectral::FftPair::new(n);
        for xm in (0..64).step_by(7) {
            for comp in 0..2 {
                let mut col: Vec<C64> = (0..n).map(|j| p.field.at(j, xm)[comp]).collect();
                let mean = pi_avg_samples(&col);
                fft.forward(&mut col);
                assert!((col[0] - mean).norm() < 1e-14);
                for (k, c) in col.iter().enumerate() {
                    let l = crate::spectral::signed_mode(k, n).abs();
                    if l > 12 {
                        assert!(c.norm() < 1e-12, "mode {l}: {}", c.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn time_derivatives_of_constant_free_state_vanish() {
        let grid = SpaceGrid::new(0.0, 2.0 * std::f64::consts::PI, 8).unwrap();
        let m = DiracModel::new(0.5, 0.0, Potential::Zero, Potential::Zero, grid).unwrap();
        let tg = TauGrid::new(8).unwrap();
        let u0 = TwoScaleField::from_fn(tg, grid, |_, _| [C64::new(0.3, 0.1), C64::new(-0.2, 0.5)]);
        for d in initial_time_derivatives(&u0, &m, 3) {
            assert!(d.max_norm() < 1e-13);
        }
    }

    #[test]
    fn time_derivatives_match_linear_closed_form() {
        // For a single tau-mode and x-mode with F = 0 the problem is linear:
        // dt U = -eps^{-2} dtau U - eps^{-1} A dx U, so the derivatives are
        // powers of that operator; compare the nonlinear recursion against
        // direct repeated application.
        let grid = SpaceGrid::new(0.0, 2.0 * std::f64::consts::PI, 8).unwrap();
        let m = DiracModel::new(0.5, 0.0, Potential::Zero, Potential::Zero, grid).unwrap();
        let tg = TauGrid::new(16).unwrap();
        let u0 = TwoScaleField::from_fn(tg, grid, |t, k| {
            let x = grid.x(k);
            [C64::from_polar(1.0, t + x), C64::from_polar(0.5, 2.0 * x - 3.0 * t)]
        });
        let ds = initial_time_derivatives(&u0, &m, 3);
        let ell = |u: &TwoScaleField| &(dtau(u) * -4.0) - &(u.dx(1).apply_tau_matrix(a_matrix) * 2.0);
        let mut expect = u0.clone();
        for d in &ds {
            expect = ell(&expect);
            assert!((d - &expect).max_norm() < 1e-10 * expect.max_norm());
        }
    }

    #[test]
    fn g1_variant_parse() {
        assert_eq!("dx".parse::<G1Variant>().unwrap(), G1Variant::Dx);
        assert_eq!("printed".parse::<G1Variant>().unwrap(), G1Variant::Printed);
        assert!("x".parse::<G1Variant>().is_err());
        assert_eq!(G1Variant::default(), G1Variant::Printed);
    }
}
