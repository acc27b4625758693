//! End-to-end regressions for the recovery pipeline on the three-bar problem.

use binrec::experiments::{averaged_error, sign_mismatch_fraction, RecoveryProblem};
use binrec::solver::run_recovery_with;
use binrec::{
    error_metric, gradient_flow_run, initial_guess, min_feature_width, parameter_heuristics,
    project_binary, run_recovery, stationarity_residual, BinaryPattern, FeFunction, ModelParams,
    NoiseSpec, Potential, StopRule,
};

const ALPHA: f64 = 0.01;

fn setup(potential: Potential, gamma: f64) -> (RecoveryProblem, ModelParams) {
    let pattern = BinaryPattern::three_bars();
    let params = parameter_heuristics(min_feature_width(&pattern), potential)
        .unwrap()
        .with_problem(ALPHA, gamma);
    let problem = RecoveryProblem::new(pattern, ALPHA, params.h).unwrap();
    (problem, params)
}

#[test]
fn averaged_error_regression() {
    // Frozen from a reference run: 0.0966 (well) and 0.0375 (obstacle).
    for potential in Potential::ALL {
        let (problem, params) = setup(potential, 0.2);
        let avg = averaged_error(&problem, &params, potential, 20, 0).unwrap();
        assert_eq!(avg.failures, 0);
        assert!(avg.mean < 0.1, "{potential}: mean E = {}", avg.mean);
        assert!(avg.runs.iter().all(|r| r.converged && r.monotone));
        let again = averaged_error(&problem, &params, potential, 20, 0).unwrap();
        assert_eq!(avg.mean.to_bits(), again.mean.to_bits());
    }
}

#[test]
fn noise_free_truth_is_recovered() {
    for potential in Potential::ALL {
        let (problem, params) = setup(potential, 0.0);
        let y_d = problem
            .data(NoiseSpec {
                gamma: 0.0,
                seed: 0,
            })
            .unwrap();
        let from_truth =
            run_recovery(&y_d, &problem.blur, &params, potential, &problem.u_true).unwrap();
        let e = error_metric(&project_binary(&from_truth.final_u), &problem.u_true).unwrap();
        assert_eq!(e, 0.0, "{potential}");
        let (_, from_data) = problem.solve(&params, potential, 0).unwrap();
        let e = error_metric(&project_binary(&from_data.final_u), &problem.u_true).unwrap();
        assert_eq!(e, 0.0, "{potential}");
    }
}

#[test]
fn gradient_flow_matches_recovery_and_smaller_steps_stay_monotone() {
    for potential in Potential::ALL {
        let (problem, params) = setup(potential, 0.2);
        let y_d = problem
            .data(NoiseSpec {
                gamma: 0.2,
                seed: 3,
            })
            .unwrap();
        let u0 = initial_guess(&y_d);
        let dt = 1.0 / params.rho;
        let flow = gradient_flow_run(&y_d, &problem.blur, &params, potential, &u0, dt).unwrap();
        let with_rho = ModelParams {
            rho: 1.0 / dt,
            ..params
        };
        let direct = run_recovery(&y_d, &problem.blur, &with_rho, potential, &u0).unwrap();
        assert_eq!(direct.final_u.coeffs(), flow.final_u.coeffs());
        assert_eq!(direct.energies, flow.energies);

        // With a reciprocal that round-trips exactly, the traces coincide with the plain rho run.
        let exact = ModelParams { rho: 1.0, ..params };
        let direct = run_recovery(&y_d, &problem.blur, &exact, potential, &u0).unwrap();
        let flow = gradient_flow_run(&y_d, &problem.blur, &params, potential, &u0, 1.0).unwrap();
        assert_eq!(direct.energies, flow.energies);
        assert_eq!(direct.iterations, flow.iterations);

        let half = gradient_flow_run(
            &y_d,
            &problem.blur,
            &params,
            potential,
            &u0,
            0.5 / params.rho,
        )
        .unwrap();
        assert!(half.monotone, "{potential}: {:?}", half.violations);
    }
    let (problem, params) = setup(Potential::SmoothDoubleWell, 0.2);
    let y_d = problem
        .data(NoiseSpec {
            gamma: 0.2,
            seed: 3,
        })
        .unwrap();
    assert!(gradient_flow_run(
        &y_d,
        &problem.blur,
        &params,
        Potential::SmoothDoubleWell,
        &y_d,
        0.0
    )
    .is_err());
}

#[test]
fn converged_iterates_are_nearly_stationary() {
    for potential in Potential::ALL {
        let (problem, mut params) = setup(potential, 0.2);
        let y_d = problem
            .data(NoiseSpec {
                gamma: 0.2,
                seed: 1,
            })
            .unwrap();
        let u0 = initial_guess(&y_d);
        let start = stationarity_residual(&u0, &y_d, &problem.blur, &params, potential).unwrap();
        params.tol = 1e-10;
        let r = run_recovery(&y_d, &problem.blur, &params, potential, &u0).unwrap();
        assert!(r.converged);
        let end =
            stationarity_residual(&r.final_u, &y_d, &problem.blur, &params, potential).unwrap();
        assert!(
            end < 1e-6 * start.max(1.0),
            "{potential}: {start:e} -> {end:e}"
        );
    }
}

#[test]
fn obstacle_iterates_stay_in_box() {
    let (problem, params) = setup(Potential::DoubleObstacle, 0.4);
    let y_d = problem
        .data(NoiseSpec {
            gamma: 0.4,
            seed: 9,
        })
        .unwrap();
    let mut checked = 0;
    run_recovery_with(
        &y_d,
        &problem.blur,
        &params,
        Potential::DoubleObstacle,
        &initial_guess(&y_d),
        StopRule::L2Diff,
        |_, u| {
            assert!(u.coeffs().iter().all(|v| (-1.0..=1.0).contains(v)));
            checked += 1;
        },
    )
    .unwrap();
    assert!(checked > 0);
}

#[test]
fn potentials_agree_at_small_epsilon() {
    // A quarter of the heuristic interface width, with h/eps kept at pi/8.
    for seed in 0..10 {
        let mut outputs = Vec::new();
        for potential in Potential::ALL {
            let (_, mut params) = setup(potential, 0.2);
            params.epsilon /= 4.0;
            params.h /= 4.0;
            let problem =
                RecoveryProblem::new(BinaryPattern::three_bars(), ALPHA, params.h).unwrap();
            let (_, r) = problem.solve(&params, potential, seed).unwrap();
            outputs.push(project_binary(&r.final_u));
        }
        let mismatch = sign_mismatch_fraction(&outputs[0], &outputs[1]).unwrap();
        assert!(
            mismatch < 0.02,
            "seed {seed}: projections differ on {:.2}% of nodes",
            100.0 * mismatch
        );
    }
}

#[test]
fn energy_stop_rule_terminates_earlier_or_equal() {
    let (problem, mut params) = setup(Potential::SmoothDoubleWell, 0.2);
    let y_d = problem
        .data(NoiseSpec {
            gamma: 0.2,
            seed: 2,
        })
        .unwrap();
    let u0 = initial_guess(&y_d);
    params.tol = 1e-7;
    let r = run_recovery_with(
        &y_d,
        &problem.blur,
        &params,
        Potential::SmoothDoubleWell,
        &u0,
        StopRule::EnergyChange,
        |_, _| {},
    )
    .unwrap();
    assert!(r.converged);
    let n = r.energies.len();
    let last = if n >= 2 {
        r.energies[n - 2]
    } else {
        r.initial_energy
    };
    assert!((r.energies[n - 1] - last).abs() < params.tol);
}

#[test]
fn zero_start_is_allowed_for_both_potentials() {
    for potential in Potential::ALL {
        let (problem, params) = setup(potential, 0.2);
        let y_d = problem
            .data(NoiseSpec {
                gamma: 0.2,
                seed: 4,
            })
            .unwrap();
        let zero = FeFunction::constant(problem.mesh().clone(), 0.0);
        let r = run_recovery(&y_d, &problem.blur, &params, potential, &zero).unwrap();
        assert!(r.converged && r.monotone);
    }
}
