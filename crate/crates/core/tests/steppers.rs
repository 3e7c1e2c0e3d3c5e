mod common;

use common::*;
use nalgebra::DVector;
use ua_dirac::initdata::{prepare_initial_data, G1Variant};
use ua_dirac::model::{DiracModel, Example, Potential};
use ua_dirac::spectral::{SpaceGrid, TauGrid, C64};
use ua_dirac::steppers::{
    build_matrices, propagate, reconstruct_phi, step, PredictionVariant, Scheme, StepperOptions, TwoScaleState,
};
use ua_dirac::SpinorField;

fn time_dependent_model(eps: f64, space: SpaceGrid) -> DiracModel {
    DiracModel::new(
        eps,
        0.7,
        Potential::Oscillating { amplitude: 0.3, omega: 2.0 },
        Potential::LinearInTime { rate: 0.5 },
        space,
    )
    .unwrap()
}

#[test]
fn ua1_step_matches_dense_monolithic_solve() {
    let tau = TauGrid::new(4).unwrap();
    let space = SpaceGrid::new(-8.0, 8.0, 4).unwrap();
    for (i, &eps) in [1.0, 0.5, 0.0625].iter().enumerate() {
        for (mi, m) in [Example::III.problem(eps).model(4).unwrap(), time_dependent_model(eps, space)]
            .into_iter()
            .enumerate()
        {
            let u = random_field(tau, space, 10 * i as u64 + mi as u64);
            let dt = 0.05;
            let mats = build_matrices(&m, dt, tau, Scheme::Ua1, PredictionVariant::HalfStep).unwrap();
            let got = step(&TwoScaleState::new(u.clone(), Scheme::Ua1), &m, &mats).unwrap();
            let want = dense_ua1(&m, &u, dt);
            let err = max_diff(&got.field, &want);
            assert!(err < 1e-11, "eps={eps} model={mi}: {err:e}");
        }
    }
}

#[test]
fn ua2_step_matches_dense_monolithic_solve() {
    let tau = TauGrid::new(4).unwrap();
    let space = SpaceGrid::new(-8.0, 8.0, 4).unwrap();
    for prediction in [PredictionVariant::HalfStep, PredictionVariant::Printed] {
        for (i, &eps) in [1.0, 0.5, 0.0625].iter().enumerate() {
            for (mi, m) in [Example::III.problem(eps).model(4).unwrap(), time_dependent_model(eps, space)]
                .into_iter()
                .enumerate()
            {
                let u = random_field(tau, space, 100 + 10 * i as u64 + mi as u64);
                let dt = 0.05;
                let mats = build_matrices(&m, dt, tau, Scheme::Ua2, prediction).unwrap();
                let got = step(&TwoScaleState::new(u.clone(), Scheme::Ua2), &m, &mats).unwrap();
                let want = dense_ua2(&m, &u, dt, prediction);
                let err = max_diff(&got.field, &want);
                assert!(err < 1e-11, "{prediction:?} eps={eps} model={mi}: {err:e}");
            }
        }
    }
}

#[test]
fn literal_differentiation_matrices_are_exact_on_resolved_modes() {
    let space = SpaceGrid::new(-8.0, 8.0, 8).unwrap();
    let d = literal_dx(&space);
    let mu = space.mu(2);
    let v = DVector::from_fn(8, |j, _| C64::from_polar(1.0, mu * (space.x(j) - space.a())));
    let dv = &d * &v;
    for j in 0..8 {
        assert!((dv[j] - I * mu * v[j]).norm() < 1e-12);
    }
    let tau = TauGrid::new(8).unwrap();
    let dt = literal_dtau(&tau);
    let v = DVector::from_fn(8, |j, _| C64::from_polar(1.0, -3.0 * tau.tau(j)));
    let dv = &dt * &v;
    for j in 0..8 {
        assert!((dv[j] + I * 3.0 * v[j]).norm() < 1e-12);
    }
}

fn self_convergence(scheme: Scheme, order: u32) -> f64 {
    let eps = 1.0;
    let problem = Example::I.problem(eps);
    let m = problem.model(64).unwrap();
    let phi0 = problem.initial_data(64).unwrap();
    let t = 0.25;
    let run = |dt: f64| {
        let opts = StepperOptions { scheme, dt, n_tau: 16, prediction: PredictionVariant::HalfStep };
        let s = propagate(&m, &phi0, order, G1Variant::Printed, &opts, t).unwrap();
        reconstruct_phi(&s, eps)
    };
    let opts_ref = StepperOptions { scheme: Scheme::Ua2, dt: 0.25 / 1024.0, n_tau: 16, prediction: PredictionVariant::HalfStep };
    let reference = reconstruct_phi(&propagate(&m, &phi0, order, G1Variant::Printed, &opts_ref, t).unwrap(), eps);
    let dts = [0.05, 0.025, 0.0125, 0.00625];
    let errs: Vec<f64> = dts.iter().map(|&dt| (&run(dt) - &reference).max_norm()).collect();
    slope(&dts, &errs)
}

#[test]
fn ua1_converges_at_first_order_for_unit_epsilon() {
    let p = self_convergence(Scheme::Ua1, 2);
    assert!((0.85..1.2).contains(&p), "order {p}");
}

#[test]
fn ua2_converges_at_second_order_for_unit_epsilon() {
    let p = self_convergence(Scheme::Ua2, 2);
    assert!((1.8..2.2).contains(&p), "order {p}");
}

#[test]
fn reconstruction_matches_splitting_of_the_original_equation() {
    let eps = 0.5;
    let t = 0.25;
    let n = 64;
    let problem = Example::III.problem(eps);
    let m = problem.model(n).unwrap();
    let phi0 = problem.initial_data(n).unwrap();
    let opts = StepperOptions { scheme: Scheme::Ua2, dt: t / 512.0, n_tau: 32, prediction: PredictionVariant::HalfStep };
    let ua = reconstruct_phi(&propagate(&m, &phi0, 5, G1Variant::Printed, &opts, t).unwrap(), eps);
    let split = DiracSplitting::new(&m).solve(&phi0, t, 4096);
    let err = (&ua - &split).max_norm();
    assert!(err < 1e-4, "{err:e}");
}

#[test]
fn large_steps_stay_bounded_for_small_epsilon() {
    // No step-size restriction tied to eps: dt is far above eps^2 here.
    let eps = 2f64.powi(-6);
    let problem = Example::I.problem(eps);
    let m = problem.model(64).unwrap();
    let phi0 = problem.initial_data(64).unwrap();
    for scheme in [Scheme::Ua1, Scheme::Ua2] {
        let opts = StepperOptions { scheme, dt: 0.1, n_tau: 16, prediction: PredictionVariant::HalfStep };
        let s = propagate(&m, &phi0, 3, G1Variant::Printed, &opts, 1.0).unwrap();
        let phi = reconstruct_phi(&s, eps);
        assert!(phi.is_finite());
        assert!(phi.max_norm() < 2.0, "{scheme}: {}", phi.max_norm());
    }
}

#[test]
fn prepared_data_is_a_valid_starting_state_for_both_schemes() {
    let eps = 0.25;
    let problem = Example::II.problem(eps);
    let m = problem.model(32).unwrap();
    let phi0: SpinorField = problem.initial_data(32).unwrap();
    let tau = TauGrid::new(8).unwrap();
    let u0 = prepare_initial_data(&phi0, &m, tau, 2, G1Variant::Printed).unwrap().field;
    let s = TwoScaleState::new(u0, Scheme::Ua2);
    assert!((&reconstruct_phi(&s, eps) - &phi0).max_norm() < 1e-12);
}
