//! Subcommand handlers. Each one ends by printing a JSON summary to
//! stdout; file outputs are opt-in through flags.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Deserialize;
use serde_json::json;

use essmc::chatter::{predict_chatter_closed_form, solve_harmonic_balance};
use essmc::control::{fuel_optimal_psi, minimum_time, validate_params, ControllerParams};
use essmc::scenario::{
    compare_controllers, normalized_authority, normalized_delta, run_scan_scenario,
    run_stabilization_scenario, ScenarioConfig, ScenarioKind,
};
use essmc::sim::{
    default_eps_sigma, detect_convergence, discrete_eps_dsigma, run_closed_loop, ConvergenceReport,
    DisturbanceSpec, PlantParams, SimConfig, Trace,
};
use essmc::surface::{
    calibrate_roughness, estimate_psd, generate_surface, write_profile_csv, write_psd_csv,
    SurfaceParams,
};
use essmc::tuner::{tune, write_grid_csv};
use essmc::{EssmcError, Result};

use crate::{
    ChatterArgs, ChatterMethod, CompareArgs, FuelArgs, ScenarioKindArg, SimulateArgs, SurfaceArgs,
    TuneArgs, ValidateArgs,
};

/// What a `simulate` or `validate` config file may hold. The wrapper key
/// disambiguates: without it the file must be a full closed-loop config.
#[derive(Deserialize)]
#[serde(untagged)]
enum ConfigFile {
    Scenario { scenario: ScenarioConfig },
    Plain(Box<SimConfig>),
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

/// Record of what a run did. Carries wall time, so it is the one output
/// that is not byte-stable across reruns.
fn write_manifest(
    path: &Path,
    config: serde_json::Value,
    seed: Option<u64>,
    outputs: &[PathBuf],
    started: Instant,
) -> Result<()> {
    write_json(
        path,
        &json!({
            "command": std::env::args().collect::<Vec<_>>(),
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "config": config,
            "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "duration_s": started.elapsed().as_secs_f64(),
        }),
    )
}

pub(crate) fn simulate(args: &SimulateArgs, started: Instant) -> Result<()> {
    match load_json::<ConfigFile>(&args.config)? {
        ConfigFile::Scenario { mut scenario } => {
            if let Some(seed) = args.seed {
                scenario.seed = seed;
            }
            if scenario.controllers.len() != 1 {
                return Err(EssmcError::Config(
                    "scenario simulate runs exactly one controller; list one under \
                     `controllers` or use `essmc compare`"
                        .into(),
                ));
            }
            let controller = scenario.controllers[0].clone();
            let resolved = scenario.resolve()?;
            if args.dry_run {
                return print_json(&json!({ "resolved": resolved, "warnings": [] }));
            }
            let (trace, metrics) = match resolved.kind {
                ScenarioKind::Scan => run_scan_scenario(&scenario, &controller)?,
                ScenarioKind::Machining => run_stabilization_scenario(&scenario, &controller)?,
            };
            let mut outputs = Vec::new();
            if let Some(out) = &args.out {
                trace.write_csv(BufWriter::new(File::create(out)?))?;
                outputs.push(out.clone());
            }
            print_json(&json!({
                "kind": resolved.kind,
                "seed": resolved.seed,
                "dt": resolved.dt,
                "t_end": resolved.t_end,
                "metrics": metrics,
            }))?;
            if let Some(m) = &args.manifest {
                write_manifest(
                    m,
                    serde_json::to_value(&resolved)?,
                    args.seed,
                    &outputs,
                    started,
                )?;
            }
            Ok(())
        }
        ConfigFile::Plain(mut config) => {
            if let Some(seed) = args.seed {
                config.seed = seed;
            }
            config.validate()?;
            let warnings = config.warnings();
            if args.dry_run {
                let mut resolved = (*config).clone();
                resolved.controller = config.resolved_controller();
                return print_json(&json!({ "resolved": resolved, "warnings": warnings }));
            }
            let trace = run_closed_loop(&config)?;
            let eps_sigma = args
                .eps_sigma
                .unwrap_or_else(|| default_eps_sigma(config.sigma0));
            let eps_dsigma = args.eps_dsigma.unwrap_or_else(|| {
                discrete_eps_dsigma(config.plant.u_max, config.plant.delta, config.dt)
            });
            let report = detect_convergence(&trace, eps_sigma, eps_dsigma);
            let mut outputs = Vec::new();
            if let Some(out) = &args.out {
                trace.write_csv(BufWriter::new(File::create(out)?))?;
                outputs.push(out.clone());
            }
            let last = trace.records.last().expect("trace is never empty");
            print_json(&json!({
                "label": config.resolved_controller().label(),
                "dt": config.dt,
                "t_end": config.t_end,
                "steps": trace.len() - 1,
                "seed": config.seed,
                "converged": report.converged,
                "t_converge": report.t_converge,
                "zero_crossings": report.zero_crossings,
                "fuel": report.final_fuel,
                "sigma_final": last.sigma,
                "dsigma_final": last.dsigma,
                "eps_sigma": eps_sigma,
                "eps_dsigma": eps_dsigma,
                "config_digest": trace.meta.config_digest,
                "warnings": warnings,
            }))?;
            if let Some(m) = &args.manifest {
                write_manifest(
                    m,
                    serde_json::to_value(&*config)?,
                    args.seed,
                    &outputs,
                    started,
                )?;
            }
            Ok(())
        }
    }
}

/// Filesystem-safe name from a controller label.
fn slug(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    let mut pending_dash = true;
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
            pending_dash = false;
        } else if !pending_dash {
            out.push('-');
            pending_dash = true;
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

pub(crate) fn compare(args: &CompareArgs, started: Instant) -> Result<()> {
    let mut cfg: ScenarioConfig = match &args.config {
        Some(path) => load_json(path)?,
        None => match args.kind {
            ScenarioKindArg::Scan => ScenarioConfig::scan(),
            ScenarioKindArg::Machining => ScenarioConfig::machining(),
        },
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.dry_run {
        return print_json(&json!({ "resolved": cfg.resolve()? }));
    }
    let (traces, report) = compare_controllers(&cfg)?;
    let mut outputs = Vec::new();
    if let Some(dir) = &args.out_dir {
        fs::create_dir_all(dir)?;
        for (i, trace) in traces.iter().enumerate() {
            let path = dir.join(format!("trace_{i:02}_{}.csv", slug(&trace.label)));
            trace.write_csv(BufWriter::new(File::create(&path)?))?;
            outputs.push(path);
        }
        let report_path = dir.join("comparison.json");
        write_json(&report_path, &report)?;
        outputs.push(report_path);
    }
    print_json(&report)?;
    if let Some(m) = &args.manifest {
        write_manifest(m, serde_json::to_value(&cfg)?, args.seed, &outputs, started)?;
    }
    Ok(())
}

pub(crate) fn tune_grid(args: &TuneArgs, started: Instant) -> Result<()> {
    let (grid, result) = tune(args.delta_ratio, args.resolution, args.j_hat_max)?;
    let mut outputs = Vec::new();
    if let Some(path) = &args.grid_csv {
        write_grid_csv(&grid, BufWriter::new(File::create(path)?))?;
        outputs.push(path.clone());
    }
    if let Some(path) = &args.out {
        write_json(path, &result)?;
        outputs.push(path.clone());
    }
    print_json(&result)?;
    if let Some(m) = &args.manifest {
        let config = json!({
            "delta_ratio": args.delta_ratio,
            "resolution": args.resolution,
            "j_hat_max": args.j_hat_max,
        });
        write_manifest(m, config, None, &outputs, started)?;
    }
    Ok(())
}

pub(crate) fn chatter(args: &ChatterArgs) -> Result<()> {
    let beta2 = args.beta2.unwrap_or(args.beta1);
    match args.method {
        ChatterMethod::ClosedForm => print_json(&predict_chatter_closed_form(
            args.mu, args.beta1, beta2, args.u,
        )?),
        ChatterMethod::Balance => {
            print_json(&solve_harmonic_balance(args.mu, args.beta1, beta2, args.u)?)
        }
        ChatterMethod::Both => print_json(&json!({
            "closed_form": predict_chatter_closed_form(args.mu, args.beta1, beta2, args.u)?,
            "balance": solve_harmonic_balance(args.mu, args.beta1, beta2, args.u)?,
        })),
    }
}

pub(crate) fn surface(args: &SurfaceArgs, started: Instant) -> Result<()> {
    let mut params = SurfaceParams {
        roughness: args.roughness,
        nu: args.nu,
        v0: args.v0,
        seed: args.seed,
        dt: args.dt,
        duration: args.duration,
    };
    params.validate()?;
    let mut calibrated = false;
    if let Some(target) = args.calibrate_ptp {
        params.roughness = calibrate_roughness(&params, target)?;
        calibrated = true;
    }
    if args.dry_run {
        return print_json(&json!({ "resolved": params, "calibrated": calibrated }));
    }
    let profile = generate_surface(&params)?;
    let mut outputs = Vec::new();
    if let Some(path) = &args.out {
        write_profile_csv(&profile, BufWriter::new(File::create(path)?))?;
        outputs.push(path.clone());
    }
    if let Some(path) = &args.psd_out {
        let psd = estimate_psd(&profile, args.segments)?;
        write_psd_csv(&psd, &params, BufWriter::new(File::create(path)?))?;
        outputs.push(path.clone());
    }
    let omega0 = params.omega0();
    print_json(&json!({
        "params": params,
        "omega0": omega0,
        "calibrated": calibrated,
        "n": profile.len(),
        "peak_to_peak": profile.peak_to_peak(),
        "variance": profile.variance(),
        "variance_theory": std::f64::consts::PI * params.roughness * params.nu / omega0,
    }))?;
    if let Some(m) = &args.manifest {
        write_manifest(
            m,
            serde_json::to_value(&params)?,
            Some(args.seed),
            &outputs,
            started,
        )?;
    }
    Ok(())
}

fn fuel_at(trace: &Trace, t: Option<f64>) -> Option<f64> {
    t.map(|t| {
        let k = ((t / trace.dt).round() as usize).min(trace.records.len() - 1);
        trace.records[k].e
    })
}

fn case_json(report: &ConvergenceReport, trace: &Trace) -> serde_json::Value {
    json!({
        "converged": report.converged,
        "t_settle": report.t_converge,
        "fuel_at_settle": fuel_at(trace, report.t_converge),
        "fuel_total": report.final_fuel,
    })
}

pub(crate) fn fuel_optimal(args: &FuelArgs, started: Instant) -> Result<()> {
    let psi = fuel_optimal_psi(args.k)?;
    let t_star = minimum_time(args.x1, args.x2, args.u);
    let t_end = args.t_end.unwrap_or(1.2 * args.k * t_star + 1.0);
    let base = SimConfig {
        dt: args.dt,
        t_end,
        sigma0: args.x1,
        sigma_dot0: args.x2,
        v0: 0.0,
        plant: PlantParams::normalized(0.0, args.u),
        disturbance: DisturbanceSpec::default(),
        controller: ControllerParams::off(),
        seed: 0,
    };
    let run = |controller: ControllerParams| -> Result<(Trace, ConvergenceReport)> {
        let mut cfg = base.clone();
        cfg.controller = controller;
        let trace = run_closed_loop(&cfg)?;
        let report = detect_convergence(
            &trace,
            default_eps_sigma(args.x1),
            discrete_eps_dsigma(args.u, 0.0, args.dt),
        );
        Ok((trace, report))
    };
    let (to_trace, to_report) = run(ControllerParams::time_optimal(None))?;
    let (fo_trace, fo_report) = run(ControllerParams::fuel_optimal(None, args.k))?;

    let mut outputs = Vec::new();
    if let Some(prefix) = &args.out_prefix {
        let to_path = PathBuf::from(format!("{}_time_optimal.csv", prefix.display()));
        let fo_path = PathBuf::from(format!("{}_fuel_optimal.csv", prefix.display()));
        to_trace.write_csv(BufWriter::new(File::create(&to_path)?))?;
        fo_trace.write_csv(BufWriter::new(File::create(&fo_path)?))?;
        outputs.push(to_path);
        outputs.push(fo_path);
    }

    let fuel_ratio = match (
        fuel_at(&fo_trace, fo_report.t_converge),
        fuel_at(&to_trace, to_report.t_converge),
    ) {
        (Some(fo), Some(to)) if to > 0.0 => Some(fo / to),
        _ => None,
    };
    print_json(&json!({
        "x1": args.x1,
        "x2": args.x2,
        "u_max": args.u,
        "k": args.k,
        "dt": args.dt,
        "t_end": t_end,
        "t_star": t_star,
        "time_cap": args.k * t_star,
        "psi": psi,
        "time_optimal": case_json(&to_report, &to_trace),
        "fuel_optimal": case_json(&fo_report, &fo_trace),
        "fuel_ratio": fuel_ratio,
    }))?;
    if let Some(m) = &args.manifest {
        write_manifest(m, serde_json::to_value(&base)?, None, &outputs, started)?;
    }
    Ok(())
}

pub(crate) fn validate(args: &ValidateArgs) -> Result<()> {
    match load_json::<ConfigFile>(&args.config)? {
        ConfigFile::Plain(config) => {
            config.validate()?;
            let report = validate_params(&config.resolved_controller(), &config.plant)?;
            let feasible = report.feasible;
            print_json(&json!({
                "mode": "plain",
                "report": report,
                "warnings": config.warnings(),
            }))?;
            if feasible {
                Ok(())
            } else {
                Err(EssmcError::Infeasible(
                    "controller fails its convergence conditions for this plant".into(),
                ))
            }
        }
        ConfigFile::Scenario { scenario } => {
            let res = scenario.resolve()?;
            let u_norm = normalized_authority(&res.mech);
            // Validation runs against the design-point plant: the override
            // ratio when set, the measured surface load otherwise.
            let delta = match res.delta_ratio_override {
                Some(r) => r * u_norm,
                None => {
                    let profile = generate_surface(&res.mech.surface)?;
                    normalized_delta(&res.mech, &profile)
                }
            };
            let plant = PlantParams::normalized(delta, u_norm);
            plant.validate()?;
            let mut reports = Vec::new();
            for c in &res.controllers {
                let mut cn = c.clone();
                // Controller authority is a force; the plant is normalized
                // by the mass.
                let u_force = match cn.u_max {
                    Some(u) => u,
                    None => res.mech.u_force,
                };
                cn.u_max = Some(u_force / res.mech.m);
                reports.push(validate_params(&cn, &plant)?);
            }
            let all_feasible = reports.iter().all(|r| r.feasible);
            print_json(&json!({
                "mode": "scenario",
                "plant": plant,
                "reports": reports,
            }))?;
            if all_feasible {
                Ok(())
            } else {
                Err(EssmcError::Infeasible(
                    "at least one controller fails its convergence conditions".into(),
                ))
            }
        }
    }
}
