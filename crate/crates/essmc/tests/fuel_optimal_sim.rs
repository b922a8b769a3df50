//! Trajectory-level semantics of the time-optimal and fuel-optimal laws
//! on the undisturbed plant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use essmc::control::{minimum_time, ControllerParams};
use essmc::sim::{
    default_eps_sigma, detect_convergence, discrete_eps_dsigma, run_closed_loop, DisturbanceSpec,
    PlantParams, SimConfig,
};

// Fine enough that the one-sample switching-curve overshoot (which grows like
// sqrt(dt)) stays well inside the settle-time slack below.
const DT: f64 = 2e-4;

fn run_state(controller: ControllerParams, x1: f64, x2: f64, t_end: f64) -> essmc::sim::Trace {
    let cfg = SimConfig {
        dt: DT,
        t_end,
        sigma0: x1,
        sigma_dot0: x2,
        v0: 0.0,
        plant: PlantParams::normalized(0.0, 1.0),
        disturbance: DisturbanceSpec::default(),
        controller,
        seed: 0,
    };
    run_closed_loop(&cfg).unwrap()
}

fn settle_time(trace: &essmc::sim::Trace, sigma0: f64) -> (bool, f64, f64) {
    let report = detect_convergence(
        trace,
        default_eps_sigma(sigma0),
        discrete_eps_dsigma(1.0, 0.0, DT),
    );
    (
        report.converged,
        report.t_converge.unwrap_or(f64::INFINITY),
        report.final_fuel,
    )
}

#[test]
fn time_optimal_rest_to_rest_takes_two_sqrt_of_distance() {
    let trace = run_state(ControllerParams::time_optimal(None), 1.0, 0.0, 4.0);
    let t_star = minimum_time(1.0, 0.0, 1.0);
    assert!((t_star - 2.0).abs() < 1e-12);
    let (converged, t, fuel) = settle_time(&trace, 1.0);
    assert!(converged);
    assert!(t >= 0.95 * t_star && t <= t_star + 0.02, "t = {t}");
    // bang-bang all the way: fuel equals elapsed authority
    assert!((fuel - 1.0 * trace.records.last().unwrap().t).abs() < 0.02);
}

#[test]
fn fuel_optimal_k2_is_slower_but_much_cheaper() {
    let t_star = minimum_time(1.0, 0.0, 1.0);
    let to = run_state(ControllerParams::time_optimal(None), 1.0, 0.0, 6.0);
    let fo = run_state(ControllerParams::fuel_optimal(None, 2.0), 1.0, 0.0, 6.0);

    let (c_to, t_to, _) = settle_time(&to, 1.0);
    let (c_fo, t_fo, _) = settle_time(&fo, 1.0);
    assert!(c_to && c_fo);
    assert!(t_fo > t_to);
    assert!(t_fo <= 1.02 * 2.0 * t_star + 0.1, "t_fo = {t_fo}");

    // fuel up to the respective settle times
    let fuel_at = |trace: &essmc::sim::Trace, t: f64| {
        trace
            .records
            .iter()
            .find(|r| r.t >= t)
            .map(|r| r.e)
            .unwrap_or_else(|| trace.records.last().unwrap().e)
    };
    let fuel_to = fuel_at(&to, t_to);
    let fuel_fo = fuel_at(&fo, t_fo);
    assert!(
        fuel_fo < 0.5 * fuel_to,
        "fuel_fo = {fuel_fo}, fuel_to = {fuel_to}"
    );

    // the coast is a real interval, not a sampling artifact
    let coast_samples = fo
        .records
        .iter()
        .take_while(|r| r.t <= t_fo)
        .filter(|r| r.u == 0.0)
        .count();
    assert!(coast_samples > 100, "{coast_samples} coast samples");
}

#[test]
fn k_equal_one_reproduces_the_time_optimal_trajectory_bitwise() {
    let to = run_state(ControllerParams::time_optimal(None), 1.0, 0.4, 5.0);
    let fo = run_state(ControllerParams::fuel_optimal(None, 1.0), 1.0, 0.4, 5.0);
    for (a, b) in to.records.iter().zip(fo.records.iter()) {
        assert_eq!(a.u.to_bits(), b.u.to_bits(), "t = {}", a.t);
        assert_eq!(a.sigma.to_bits(), b.sigma.to_bits());
    }
}

#[test]
fn random_states_settle_within_the_scaled_time_at_lower_fuel() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for case in 0..6 {
        let x1 = rng.gen_range(0.3..1.5) * if case % 2 == 0 { 1.0 } else { -1.0 };
        let x2 = rng.gen_range(-1.0..1.0);
        let t_star = minimum_time(x1, x2, 1.0);
        let horizon = 2.5 * t_star + 2.0;

        let to = run_state(ControllerParams::time_optimal(None), x1, x2, horizon);
        let fo = run_state(ControllerParams::fuel_optimal(None, 2.0), x1, x2, horizon);
        let (c_to, t_to, _) = settle_time(&to, x1);
        let (c_fo, t_fo, _) = settle_time(&fo, x1);
        assert!(c_to && c_fo, "case {case} ({x1:.3}, {x2:.3})");
        assert!(
            t_to <= 1.02 * t_star + 0.05,
            "case {case}: time-optimal {t_to} vs minimum {t_star}"
        );
        assert!(
            t_fo <= 1.02 * 2.0 * t_star + 0.1,
            "case {case}: fuel-optimal {t_fo} vs scaled {}",
            2.0 * t_star
        );

        let fuel = |trace: &essmc::sim::Trace, t: f64| {
            trace
                .records
                .iter()
                .find(|r| r.t >= t)
                .map(|r| r.e)
                .unwrap()
        };
        assert!(
            fuel(&fo, t_fo) < fuel(&to, t_to),
            "case {case}: fuel did not improve"
        );
    }
}
