//! Simulated extremum-to-extremum contraction against the closed-form
//! cycle analysis, and the finite-time bound as an actual upper bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use essmc::control::ControllerParams;
use essmc::convergence::{compute_cycle_factors, convergence_time_bound, cycle_map, CycleLaw};
use essmc::sim::{
    default_eps_sigma, detect_convergence, discrete_eps_dsigma, run_closed_loop, DisturbanceSpec,
    PlantParams, SimConfig,
};

/// Confirmed extrema in confirmation order, read off the sigma_M column.
/// Right after a confirmation the relay reverses and carves a second
/// vertex a few samples later, re-confirming a value within O(U (N dt)^2)
/// of the first; collapse those into one macro extremum.
fn extremum_sequence(trace: &essmc::sim::Trace) -> Vec<f64> {
    let mut seq: Vec<f64> = Vec::new();
    for r in &trace.records {
        match seq.last_mut() {
            Some(last) if *last == r.sigma_m => {}
            Some(last) if (r.sigma_m - *last).abs() <= 1e-3 * last.abs() + 1e-9 => {
                *last = r.sigma_m;
            }
            _ => seq.push(r.sigma_m),
        }
    }
    seq
}

fn run_from_rest(
    beta1: f64,
    beta2: f64,
    delta: f64,
    disturbance: DisturbanceSpec,
    seed: u64,
) -> essmc::sim::Trace {
    let cfg = SimConfig {
        dt: 1e-4,
        t_end: 15.0,
        sigma0: 1.0,
        sigma_dot0: 0.0,
        v0: 0.0,
        plant: PlantParams::normalized(delta, 1.0),
        disturbance,
        controller: ControllerParams::es_sosmc(None, beta1, beta2),
        seed,
    };
    run_closed_loop(&cfg).unwrap()
}

#[test]
fn undisturbed_contraction_matches_the_cycle_map() {
    for (beta1, beta2) in [(0.85, 0.27), (0.65, 0.65), (0.97, 0.05), (0.7, -0.1)] {
        let trace = run_from_rest(beta1, beta2, 0.0, DisturbanceSpec::default(), 0);
        let seq = extremum_sequence(&trace);
        assert!(seq.len() >= 4, "({beta1}, {beta2}): {seq:?}");
        assert_eq!(seq[0], 1.0);
        let predicted = cycle_map(1.0, beta1, beta2, 0.0, 0.0, 0.0)
            .unwrap()
            .next_extremum;
        let eta = predicted.abs();
        for w in seq[..4.min(seq.len())].windows(2) {
            let measured = (w[1] / w[0]).abs();
            assert!(
                (measured - eta).abs() <= 0.02 * eta + 1e-4,
                "({beta1}, {beta2}): measured {measured} vs predicted {eta}"
            );
            // sign of the next extremum matches the map as well
            assert_eq!((w[1] / w[0]).signum(), predicted.signum());
        }
    }
}

#[test]
fn adversarial_flip_realizes_the_all_aiding_corner() {
    for (beta1, beta2, delta) in [(0.85, 0.27, 0.2), (0.9, 0.5, 0.35), (0.8, 0.0, 0.3)] {
        let trace = run_from_rest(beta1, beta2, delta, DisturbanceSpec::WorstCaseFlip, 0);
        let seq = extremum_sequence(&trace);
        assert!(seq.len() >= 3, "({beta1}, {beta2}): {seq:?}");
        let corner = cycle_map(1.0, beta1, beta2, -delta, -delta, -delta)
            .unwrap()
            .next_extremum
            .abs();
        let factors = compute_cycle_factors(1.0, delta, beta1, beta2, CycleLaw::EsSosmc).unwrap();
        let measured = (seq[1] / seq[0]).abs();
        assert!(
            (measured - corner).abs() <= 0.02 * corner + 1e-4,
            "({beta1}, {beta2}, {delta}): measured {measured} vs corner {corner}"
        );
        assert!(measured <= factors.max_eta() + 0.02 * factors.max_eta() + 1e-4);
    }
}

#[test]
fn noisy_contraction_never_beats_the_enumerated_worst_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..8 {
        let beta1: f64 = rng.gen_range(0.4..0.95);
        let low = (2.0 * 0.25 + 0.08 - beta1).max(-0.8);
        let beta2 = rng.gen_range(low..beta1 - 0.02);
        let trace = run_from_rest(
            beta1,
            beta2,
            0.25,
            DisturbanceSpec::SeededNoise {
                amplitude: None,
                seed: None,
            },
            case,
        );
        let factors = compute_cycle_factors(1.0, 0.25, beta1, beta2, CycleLaw::EsSosmc).unwrap();
        let seq = extremum_sequence(&trace);
        let cap = factors.max_eta() * 1.02 + 5e-3;
        for w in seq.windows(2).take(4) {
            if w[0].abs() < 1e-3 {
                break;
            }
            let measured = (w[1] / w[0]).abs();
            assert!(
                measured <= cap,
                "case {case} ({beta1:.3}, {beta2:.3}): {measured} > {cap}"
            );
        }
    }
}

#[test]
fn convergence_time_stays_under_the_published_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0;
    for case in 0..25 {
        let u: f64 = rng.gen_range(0.5..2.0);
        let ratio = [0.0, 0.2, 0.3][case % 3];
        let delta = ratio * u;
        let beta1: f64 = rng.gen_range(0.1..0.9);
        let low = (2.0 * ratio + 0.08 - beta1).max(-0.85);
        if low >= beta1 - 0.02 {
            continue;
        }
        let beta2 = rng.gen_range(low..beta1 - 0.02);
        let sigma0: f64 = [1.0, -1.0, 0.5, -0.5][case % 4];
        let sigma_dot0 = rng.gen_range(-0.5..0.5);

        let factors = compute_cycle_factors(u, delta, beta1, beta2, CycleLaw::EsSosmc).unwrap();
        // first extremum can overshoot sigma0 by the velocity-kill distance
        let sigma_m1 = sigma0.abs() + sigma_dot0 * sigma_dot0 / (2.0 * (u - delta));
        let bound = convergence_time_bound(u, delta, sigma_dot0, sigma_m1, &factors).unwrap();

        for disturbance in [
            DisturbanceSpec::WorstCaseFlip,
            DisturbanceSpec::SeededNoise {
                amplitude: None,
                seed: None,
            },
        ] {
            let cfg = SimConfig {
                dt: 1e-3,
                t_end: 1.2 * bound + 1.0,
                sigma0,
                sigma_dot0,
                v0: 0.0,
                plant: PlantParams::normalized(delta, u),
                disturbance,
                controller: ControllerParams::es_sosmc(None, beta1, beta2),
                seed: case as u64,
            };
            let trace = run_closed_loop(&cfg).unwrap();
            let report = detect_convergence(
                &trace,
                default_eps_sigma(sigma0),
                discrete_eps_dsigma(u, delta, cfg.dt),
            );
            assert!(
                report.converged,
                "case {case} ({beta1:.3}, {beta2:.3}, {ratio}) never settled"
            );
            let t = report.t_converge.unwrap();
            assert!(
                t <= 1.05 * bound + 0.1,
                "case {case}: t = {t} vs bound {bound}"
            );
        }
        checked += 1;
    }
    assert!(checked >= 20, "only {checked} parameter draws were usable");
}

#[test]
fn infeasible_pair_oscillates_and_never_settles_under_the_flip() {
    // beta1 + beta2 = 0.35 < 2 delta / U = 0.6: the deep all-aiding cycle
    // expands by (U + delta - U(b1+b2)) / (U - delta) = 1.357 per cycle.
    let factors = compute_cycle_factors(1.0, 0.3, 0.3, 0.05, CycleLaw::EsSosmc).unwrap();
    assert!(!factors.contractive());
    let cfg = SimConfig {
        dt: 1e-3,
        t_end: 20.0,
        sigma0: 1.0,
        sigma_dot0: 0.0,
        v0: 0.0,
        plant: PlantParams::normalized(0.3, 1.0),
        disturbance: DisturbanceSpec::WorstCaseFlip,
        controller: ControllerParams::es_sosmc(None, 0.3, 0.05),
        seed: 0,
    };
    let trace = run_closed_loop(&cfg).unwrap();
    let report = detect_convergence(
        &trace,
        default_eps_sigma(1.0),
        discrete_eps_dsigma(1.0, 0.3, cfg.dt),
    );
    assert!(!report.converged);
    assert!(report.zero_crossings > 3);
    let late_max = trace
        .records
        .iter()
        .rev()
        .take(trace.records.len() / 4)
        .fold(0.0f64, |m, r| m.max(r.sigma.abs()));
    assert!(late_max > 1.5, "late max {late_max}");
}
