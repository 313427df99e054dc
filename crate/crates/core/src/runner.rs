//! Command implementations behind the CLI: scenario evaluation, sweeps,
//! simulation runs, reference-table validation, and artifact emission.
//!
//! Every CSV starts with a comment line carrying the scenario name and the
//! config hash, then a header row. Floating-point output uses six significant
//! digits. Outputs contain no timestamps unless timings are requested, so a
//! given (config, seed) pair reproduces every artifact byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::approx::{ModelSetting, Scaling};
use crate::capacity::{evaluate_phi, find_capacity, BoundStatus, CapacityResult, ScenarioParams, WarmCache};
use crate::config::{builtin, ScenarioConfig};
use crate::ctmc::{build_model, ModeledRoute};
use crate::error::Result;
use crate::junction::{route_loads, Junction};
use crate::par;
use crate::phase::{fit_hypoexp, moments};
use crate::sim::{capacity_bounds, simulate, SimConfig};

/// Six significant digits, plain decimal notation.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (5 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

#[derive(Debug, Clone)]
pub struct RunContext {
    pub config: ScenarioConfig,
    pub setting: ModelSetting,
    pub scaling: Scaling,
    pub out_dir: PathBuf,
    /// Worker-pool size for sweep scenarios; 1 keeps everything sequential.
    pub jobs: usize,
    /// Overrides the configured simulation seed.
    pub seed: Option<u64>,
    /// Adds wall-time columns to iteration traces (breaks byte determinism).
    pub timings: bool,
}

impl RunContext {
    pub fn new(config: ScenarioConfig, out_dir: impl Into<PathBuf>) -> Self {
        RunContext {
            setting: config.model.setting,
            scaling: config.model.scaling,
            out_dir: out_dir.into(),
            jobs: 1,
            seed: None,
            timings: false,
            config,
        }
    }

    fn open_csv(&self, name: &str) -> Result<(PathBuf, fs::File)> {
        fs::create_dir_all(&self.out_dir)?;
        let path = self.out_dir.join(name);
        let mut file = fs::File::create(&path)?;
        writeln!(file, "# scenario={} config_hash={}", self.config.name, self.config.hash())?;
        Ok((path, file))
    }

    fn params<'a>(
        &self,
        junction: &'a Junction,
        traffic: &'a crate::junction::TrafficSpec,
    ) -> ScenarioParams<'a> {
        ScenarioParams {
            junction,
            traffic,
            setting: self.setting,
            scaling: self.scaling,
            v_a: self.config.arrival_cv,
            build: self.config.build_options(),
            solve: self.config.solve_options(),
        }
    }
}

/// Phase-fit diagnostic for one (mean, cv) target.
pub fn fit_report_line(mean: f64, cv: f64) -> Result<String> {
    let spec = fit_hypoexp(mean, cv)?;
    let (m, v) = moments(&spec);
    let mut out = String::new();
    writeln!(out, "target mean={} cv={}", fmt6(mean), fmt6(cv)).unwrap();
    writeln!(out, "phases k={} split k*={}", spec.k, spec.k_star).unwrap();
    for i in 1..=spec.k {
        writeln!(out, "  phase {i}: rate {}", fmt6(spec.rate(i))).unwrap();
    }
    writeln!(out, "realized mean={} cv={}", fmt6(m), fmt6(v)).unwrap();
    Ok(out)
}

/// Per-route fit report for the scenario at a given total train count.
pub fn fit_report_scenario(ctx: &RunContext, n_total: f64) -> Result<String> {
    let junction = ctx.config.junction()?;
    let spec = ctx.config.traffic_spec(n_total)?;
    let loads = route_loads(&junction, &spec, ctx.config.arrival_cv)?;
    let mut out = String::new();
    writeln!(
        out,
        "scenario={} setting={} n_total={}",
        ctx.config.name,
        ctx.setting.label(),
        fmt6(n_total)
    )
    .unwrap();
    for load in loads.iter().filter(|l| l.lambda > 0.0) {
        let arrival_cv = if ctx.setting.arrival_is_phase_type() { ctx.config.arrival_cv } else { 1.0 };
        let service_cv = if ctx.setting.service_is_phase_type() { load.v_s } else { 1.0 };
        let a = fit_hypoexp(1.0 / load.lambda, arrival_cv)?;
        let s = fit_hypoexp(load.b, service_cv)?;
        let name = &junction.routes[load.route].name;
        writeln!(
            out,
            "route {name}: arrival k={} rates ({}, {}); service k={} rates ({}, {})",
            a.k,
            fmt6(a.rate_a),
            fmt6(a.rate_b),
            s.k,
            fmt6(s.rate_a),
            fmt6(s.rate_b)
        )
        .unwrap();
    }
    Ok(out)
}

#[derive(Debug)]
pub struct QueueLengthsReport {
    pub csv_path: PathBuf,
    /// (n_total, route id, scaled queue length, quality factor)
    pub rows: Vec<(f64, usize, f64, f64)>,
}

/// Queue lengths per route over the configured train-count grid.
pub fn queue_lengths(ctx: &RunContext) -> Result<QueueLengthsReport> {
    let junction = ctx.config.junction()?;
    let traffic = ctx.config.traffic_spec(0.0)?;
    let params = ctx.params(&junction, &traffic);
    let (path, mut file) = ctx.open_csv(&format!(
        "queue_lengths_{}_{}.csv",
        ctx.setting.label(),
        ctx.scaling.label()
    ))?;
    writeln!(
        file,
        "n_total,route,lambda,mu,rho,v_s,l_raw,l_scaled,qf,l_limit,states,transitions"
    )?;
    let mut grid = ctx.config.sweep.n_totals.clone();
    grid.sort_by(f64::total_cmp);
    let mut cache: Option<WarmCache> = None;
    let mut rows = Vec::new();
    for &n in &grid {
        let eval = evaluate_phi(&params, n, &mut cache)?;
        for r in &eval.per_route {
            writeln!(
                file,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                fmt6(n),
                junction.routes[r.route].name,
                fmt6(r.lambda),
                fmt6(r.mu),
                fmt6(r.rho),
                fmt6(r.v_s),
                fmt6(r.l_raw),
                fmt6(r.l_scaled),
                fmt6(r.qf),
                fmt6(r.l_limit),
                eval.states,
                eval.transitions
            )?;
            rows.push((n, r.route, r.l_scaled, r.qf));
        }
    }
    Ok(QueueLengthsReport { csv_path: path, rows })
}

#[derive(Debug)]
pub struct CapacityReport {
    pub result: CapacityResult,
    pub summary: String,
    pub json_path: PathBuf,
    pub trace_path: PathBuf,
}

fn write_trace(
    ctx: &RunContext,
    name: &str,
    trace: &[(f64, f64)],
    wall: Option<&[f64]>,
) -> Result<PathBuf> {
    let (path, mut file) = ctx.open_csv(name)?;
    if let (true, Some(wall)) = (ctx.timings, wall) {
        writeln!(file, "iteration,n_total,phi,wall_time_s")?;
        for (i, ((n, phi), w)) in trace.iter().zip(wall).enumerate() {
            writeln!(file, "{i},{},{},{}", fmt6(*n), fmt6(*phi), fmt6(*w))?;
        }
    } else {
        writeln!(file, "iteration,n_total,phi")?;
        for (i, (n, phi)) in trace.iter().enumerate() {
            writeln!(file, "{i},{},{}", fmt6(*n), fmt6(*phi))?;
        }
    }
    Ok(path)
}

pub fn capacity(ctx: &RunContext) -> Result<CapacityReport> {
    let junction = ctx.config.junction()?;
    let traffic = ctx.config.traffic_spec(0.0)?;
    let params = ctx.params(&junction, &traffic);
    let started = Instant::now();
    let result = find_capacity(&params, &ctx.config.capacity_options())?;
    let elapsed = started.elapsed().as_secs_f64();

    let bottleneck_name = junction.routes[result.bottleneck].name.clone();
    let summary = format!(
        "n_max={} bottleneck={} evaluations={} converged={}",
        fmt6(result.n_max),
        bottleneck_name,
        result.evaluations,
        result.converged
    );

    let tag = format!("{}_{}", ctx.setting.label(), ctx.scaling.label());
    let trace_path = write_trace(ctx, &format!("iterations_{tag}.csv"), &result.trace, None)?;

    fs::create_dir_all(&ctx.out_dir)?;
    let json_path = ctx.out_dir.join(format!("capacity_{tag}.json"));
    let qf: serde_json::Map<String, serde_json::Value> = result
        .route_evals
        .iter()
        .map(|r| {
            (
                junction.routes[r.route].name.clone(),
                serde_json::json!({
                    "qf": r.qf,
                    "l_scaled": r.l_scaled,
                    "l_limit": r.l_limit,
                    "rho": r.rho,
                }),
            )
        })
        .collect();
    let mut doc = serde_json::json!({
        "scenario": ctx.config.name,
        "config_hash": ctx.config.hash(),
        "setting": ctx.setting.label(),
        "scaling": ctx.scaling.label(),
        "p_main": ctx.config.traffic.p_main,
        "n_max": result.n_max,
        "converged": result.converged,
        "status": match result.status {
            BoundStatus::Bracketed => "bracketed",
            BoundStatus::AboveUpperBound => "above-upper-bound",
            BoundStatus::BelowLowerBound => "below-lower-bound",
        },
        "bottleneck": bottleneck_name,
        "evaluations": result.evaluations,
        "routes": qf,
    });
    if ctx.timings {
        doc["wall_time_s"] = serde_json::json!(elapsed);
    }
    fs::write(&json_path, serde_json::to_string_pretty(&doc)? + "\n")?;

    Ok(CapacityReport { result, summary, json_path, trace_path })
}

#[derive(Debug)]
pub struct SweepRow {
    pub p_main: f64,
    pub outcome: Result<CapacityResult>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub csv_path: PathBuf,
    pub rows: Vec<SweepRow>,
    pub failures: usize,
}

/// Capacity determination across the main-share grid. Failures of individual
/// scenarios are recorded and the sweep continues.
pub fn sweep(ctx: &RunContext) -> Result<SweepReport> {
    let junction = ctx.config.junction()?;
    let shares = ctx.config.sweep.p_main.clone();
    let outcomes: Vec<Result<CapacityResult>> = par::map_indexed(
        shares.len(),
        ctx.jobs > 1,
        |i| -> Result<CapacityResult> {
            let traffic = ctx.config.traffic_spec(0.0)?.with_p_main(shares[i]);
            let params = ctx.params(&junction, &traffic);
            find_capacity(&params, &ctx.config.capacity_options())
        },
    );

    let tag = format!("{}_{}", ctx.setting.label(), ctx.scaling.label());
    let (path, mut file) = ctx.open_csv(&format!("sweep_{tag}.csv"))?;
    writeln!(file, "p_main,n_max,bottleneck,evaluations,converged,status,error")?;
    let mut rows = Vec::new();
    let mut failures = 0usize;
    for (share, outcome) in shares.iter().zip(outcomes) {
        match &outcome {
            Ok(r) => {
                writeln!(
                    file,
                    "{},{},{},{},{},{},",
                    fmt6(*share),
                    fmt6(r.n_max),
                    junction.routes[r.bottleneck].name,
                    r.evaluations,
                    r.converged,
                    match r.status {
                        BoundStatus::Bracketed => "bracketed",
                        BoundStatus::AboveUpperBound => "above-upper-bound",
                        BoundStatus::BelowLowerBound => "below-lower-bound",
                    }
                )?;
                write_trace(
                    ctx,
                    &format!("iterations_{tag}_p{:.2}.csv", share),
                    &r.trace,
                    None,
                )?;
            }
            Err(e) => {
                failures += 1;
                writeln!(file, "{},,,,,error,\"{}\"", fmt6(*share), e)?;
            }
        }
        rows.push(SweepRow { p_main: *share, outcome });
    }
    Ok(SweepReport { csv_path: path, rows, failures })
}

#[derive(Debug)]
pub struct SimReport {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Runs the discrete-event oracle over the train-count grid. The simulated
/// processes are always the fitted general-independent ones (arrival at the
/// configured coefficient, service at the per-route coefficient), regardless
/// of the analytical setting under study.
pub fn simulate_grid(ctx: &RunContext) -> Result<SimReport> {
    let junction = ctx.config.junction()?;
    let mut cfg: SimConfig = ctx.config.sim_config();
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    let (path, mut file) = ctx.open_csv("simulate.csv")?;
    writeln!(file, "n_total,route,mean_queue,std_err,replications,horizon_min")?;

    let mut grid = ctx.config.sweep.n_totals.clone();
    grid.sort_by(f64::total_cmp);
    let mut grid_results: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut limits: Vec<f64> = Vec::new();
    for &n in &grid {
        let spec = ctx.config.traffic_spec(n)?;
        let loads = route_loads(&junction, &spec, ctx.config.arrival_cv)?;
        let active: Vec<_> = loads.iter().filter(|l| l.lambda > 0.0).collect();
        if active.is_empty() {
            continue;
        }
        let modeled: Vec<ModeledRoute> = active
            .iter()
            .map(|l| {
                Ok(ModeledRoute {
                    route: l.route,
                    arrival: fit_hypoexp(1.0 / l.lambda, ctx.config.arrival_cv)?,
                    service: fit_hypoexp(l.b, l.v_s)?,
                })
            })
            .collect::<Result<_>>()?;
        let result = simulate(&junction.conflicts, &modeled, &cfg)?;
        for s in &result.per_route {
            writeln!(
                file,
                "{},{},{},{},{},{}",
                fmt6(n),
                junction.routes[s.route].name,
                fmt6(s.mean_queue),
                fmt6(s.std_err),
                cfg.replications,
                fmt6(cfg.horizon)
            )?;
        }
        limits = active.iter().map(|l| l.l_limit).collect();
        grid_results.push((n, result.per_route.iter().map(|s| s.mean_queue).collect()));
        if ctx.config.simulation.emit_trace {
            write_sim_trace(ctx, n, &junction, &modeled, &cfg)?;
        }
    }

    let (lb, ub) = if grid_results.is_empty() {
        (None, None)
    } else {
        capacity_bounds(&grid_results, &limits)?
    };
    fs::create_dir_all(&ctx.out_dir)?;
    let summary_path = ctx.out_dir.join("simulate_summary.json");
    let doc = serde_json::json!({
        "scenario": ctx.config.name,
        "config_hash": ctx.config.hash(),
        "seed": cfg.seed,
        "replications": cfg.replications,
        "horizon_min": cfg.horizon,
        "capacity_lower_bound": lb,
        "capacity_upper_bound": ub,
    });
    fs::write(&summary_path, serde_json::to_string_pretty(&doc)? + "\n")?;
    Ok(SimReport { csv_path: path, summary_path })
}

fn write_sim_trace(
    ctx: &RunContext,
    n: f64,
    junction: &Junction,
    modeled: &[ModeledRoute],
    cfg: &SimConfig,
) -> Result<()> {
    let traced = crate::sim::simulate_traced(&junction.conflicts, modeled, cfg)?;
    let (_, mut file) = ctx.open_csv(&format!("sim_trace_n{}.csv", fmt6(n)))?;
    writeln!(file, "replication,minute,route,queue")?;
    for (rep, samples) in traced.iter().enumerate() {
        for (k, row) in samples.iter().enumerate() {
            let minute = cfg.warmup + cfg.sample_interval * (k + 1) as f64;
            for (i, q) in row.iter().enumerate() {
                writeln!(
                    file,
                    "{rep},{},{},{}",
                    fmt6(minute),
                    junction.routes[modeled[i].route].name,
                    q
                )?;
            }
        }
    }
    Ok(())
}

#[derive(Debug)]
pub struct ExportReport {
    pub edges_path: PathBuf,
    pub states_path: PathBuf,
    pub prism_path: Option<PathBuf>,
    pub states: usize,
    pub transitions: usize,
}

/// Writes the chain for one train count as an edge list plus state table,
/// optionally with a PRISM-style module rendering.
pub fn export_model(ctx: &RunContext, n_total: f64, prism: bool) -> Result<ExportReport> {
    let junction = ctx.config.junction()?;
    let spec = ctx.config.traffic_spec(n_total)?;
    let loads = route_loads(&junction, &spec, ctx.config.arrival_cv)?;
    let modeled: Vec<ModeledRoute> = loads
        .iter()
        .filter(|l| l.lambda > 0.0)
        .map(|l| {
            let arrival_cv = if ctx.setting.arrival_is_phase_type() { ctx.config.arrival_cv } else { 1.0 };
            let service_cv = if ctx.setting.service_is_phase_type() { l.v_s } else { 1.0 };
            Ok(ModeledRoute {
                route: l.route,
                arrival: fit_hypoexp(1.0 / l.lambda, arrival_cv)?,
                service: fit_hypoexp(l.b, service_cv)?,
            })
        })
        .collect::<Result<_>>()?;
    let model = build_model(&junction.conflicts, &modeled, &ctx.config.build_options())?;

    fs::create_dir_all(&ctx.out_dir)?;
    let edges_path = ctx.out_dir.join(format!("model_{}_edges.txt", ctx.setting.label()));
    let mut f = fs::File::create(&edges_path)?;
    model.export_edge_list(&mut f)?;
    let states_path = ctx.out_dir.join(format!("model_{}_states.txt", ctx.setting.label()));
    let mut f = fs::File::create(&states_path)?;
    model.export_state_table(&mut f)?;
    let prism_path = if prism {
        let path = ctx.out_dir.join(format!("model_{}.prism", ctx.setting.label()));
        let names: Vec<String> = junction.routes.iter().map(|r| r.name.clone()).collect();
        let mut f = fs::File::create(&path)?;
        model.export_prism(&names, &junction.conflicts, &mut f)?;
        Some(path)
    } else {
        None
    };
    Ok(ExportReport {
        edges_path,
        states_path,
        prism_path,
        states: model.state_count(),
        transitions: model.transition_count(),
    })
}

#[derive(Debug)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug)]
pub struct ValidationOutcome {
    pub checks: Vec<CheckLine>,
    pub csv_path: PathBuf,
}

impl ValidationOutcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Re-derives the published reference values: model sizes, case-study service
/// parameters, and validation capacities. Heavy fully-phase-type rows only run
/// with `full`.
pub fn validate_tables(out_dir: &Path, full: bool) -> Result<ValidationOutcome> {
    let mut checks: Vec<CheckLine> = Vec::new();
    let mut check = |name: &str, passed: bool, detail: String| {
        checks.push(CheckLine { name: name.into(), passed, detail });
    };

    // model sizes for the validation junction
    let val = builtin::validation();
    let val_junction = val.junction()?;
    let sizes: &[(ModelSetting, Option<usize>)] = &[
        (ModelSetting::MM, Some(10_368)),
        (ModelSetting::PhM, None),
        (ModelSetting::MPh, Some(623_376)),
    ];
    for &(setting, expect) in sizes {
        let ctx = RunContext {
            setting,
            ..RunContext::new(val.clone(), out_dir)
        };
        let spec = val.traffic_spec(20.0)?;
        let loads = route_loads(&val_junction, &spec, val.arrival_cv)?;
        let modeled: Vec<ModeledRoute> = loads
            .iter()
            .map(|l| {
                Ok(ModeledRoute {
                    route: l.route,
                    arrival: fit_hypoexp(1.0 / l.lambda, if setting.arrival_is_phase_type() { 0.8 } else { 1.0 })?,
                    service: fit_hypoexp(l.b, if setting.service_is_phase_type() { l.v_s } else { 1.0 })?,
                })
            })
            .collect::<Result<_>>()?;
        let model = build_model(&val_junction.conflicts, &modeled, &ctx.config.build_options())?;
        let detail = format!("states={} transitions={}", model.state_count(), model.transition_count());
        match expect {
            Some(e) => check(&format!("model-size {}", setting.label()), model.state_count() == e, detail),
            None => check(&format!("model-size {}", setting.label()), true, detail),
        }
    }
    if full {
        let ctx = RunContext {
            setting: ModelSetting::PhPh,
            ..RunContext::new(val.clone(), out_dir)
        };
        let spec = val.traffic_spec(20.0)?;
        let loads = route_loads(&val_junction, &spec, val.arrival_cv)?;
        let modeled: Vec<ModeledRoute> = loads
            .iter()
            .map(|l| {
                Ok(ModeledRoute {
                    route: l.route,
                    arrival: fit_hypoexp(1.0 / l.lambda, 0.8)?,
                    service: fit_hypoexp(l.b, l.v_s)?,
                })
            })
            .collect::<Result<_>>()?;
        let model = build_model(&val_junction.conflicts, &modeled, &ctx.config.build_options())?;
        let inside = (5_000_000..=10_000_000).contains(&model.state_count());
        check(
            "model-size PhPh",
            inside,
            format!("states={} transitions={}", model.state_count(), model.transition_count()),
        );
    }

    // case-study service rates and variation coefficients
    let case = builtin::case_study();
    let case_junction = case.junction()?;
    let reference: &[(f64, [f64; 8])] = &[
        (0.1, [0.25, 0.20, 0.36, 0.19, 0.27, 0.36, 0.52, 0.33]),
        (0.2, [0.26, 0.21, 0.36, 0.19, 0.29, 0.40, 0.51, 0.33]),
        (0.3, [0.26, 0.21, 0.35, 0.18, 0.31, 0.43, 0.51, 0.34]),
        (0.4, [0.27, 0.21, 0.35, 0.18, 0.33, 0.45, 0.50, 0.34]),
        (0.5, [0.28, 0.22, 0.34, 0.18, 0.34, 0.47, 0.49, 0.34]),
        (0.6, [0.28, 0.22, 0.34, 0.17, 0.36, 0.49, 0.48, 0.34]),
        (0.7, [0.29, 0.22, 0.33, 0.17, 0.37, 0.51, 0.47, 0.33]),
        (0.8, [0.29, 0.22, 0.32, 0.16, 0.39, 0.52, 0.45, 0.33]),
        (0.9, [0.30, 0.22, 0.32, 0.16, 0.40, 0.53, 0.44, 0.32]),
    ];
    let mut worst: f64 = 0.0;
    for &(p, expected) in reference {
        let spec = case.traffic_spec(40.0)?.with_p_main(p);
        let loads = route_loads(&case_junction, &spec, case.arrival_cv)?;
        for (i, l) in loads.iter().enumerate() {
            worst = worst.max((l.mu - expected[i]).abs());
            worst = worst.max((l.v_s - expected[4 + i]).abs());
        }
    }
    check(
        "case-study-parameters",
        worst <= 0.005,
        format!("max |deviation| = {}", fmt6(worst)),
    );

    // validation capacities, exponential rows
    let expected_caps = [
        (Scaling::None, ModelSetting::MM, 11.70, 0.3),
        (Scaling::Kingman, ModelSetting::MM, 16.80, 0.3),
        (Scaling::Hertel, ModelSetting::MM, 17.29, 0.3),
    ];
    for (scaling, setting, expect, tol) in expected_caps {
        let ctx = RunContext {
            setting,
            scaling,
            ..RunContext::new(val.clone(), out_dir)
        };
        let traffic = val.traffic_spec(0.0)?;
        let junction = val.junction()?;
        let params = ctx.params(&junction, &traffic);
        let r = find_capacity(&params, &val.capacity_options())?;
        check(
            &format!("capacity {}/{}", scaling.label(), setting.label()),
            (r.n_max - expect).abs() <= tol && (7..=13).contains(&r.evaluations),
            format!("n_max={} evaluations={}", fmt6(r.n_max), r.evaluations),
        );
    }
    if full {
        for (setting, expect, tol, p_main) in [
            (ModelSetting::PhM, 12.97, 0.3, 0.5),
            (ModelSetting::MPh, 14.53, 0.3, 0.5),
            (ModelSetting::PhPh, 16.90, 0.4, 0.1),
        ] {
            let ctx = RunContext {
                setting,
                scaling: Scaling::None,
                ..RunContext::new(val.clone(), out_dir)
            };
            let traffic = val.traffic_spec(0.0)?.with_p_main(p_main);
            let junction = val.junction()?;
            let params = ctx.params(&junction, &traffic);
            let r = find_capacity(&params, &val.capacity_options())?;
            check(
                &format!("capacity none/{} p={p_main}", setting.label()),
                (r.n_max - expect).abs() <= tol,
                format!("n_max={} evaluations={}", fmt6(r.n_max), r.evaluations),
            );
        }
        // case-study timetable capacities
        for (p_main, expect, tol) in [(0.5, 11.93, 0.2), (0.1, 15.78, 0.3), (0.9, 14.47, 0.3)] {
            let ctx = RunContext::new(case.clone(), out_dir);
            let traffic = case.traffic_spec(0.0)?.with_p_main(p_main);
            let params = ctx.params(&case_junction, &traffic);
            let r = find_capacity(&params, &case.capacity_options())?;
            check(
                &format!("case-study capacity p={p_main}"),
                (r.n_max - expect).abs() <= tol && case_junction.routes[r.bottleneck].name == "r3",
                format!(
                    "n_max={} bottleneck={}",
                    fmt6(r.n_max),
                    case_junction.routes[r.bottleneck].name
                ),
            );
        }
    }

    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join("validate_tables.csv");
    let mut file = fs::File::create(&csv_path)?;
    writeln!(file, "check,passed,detail")?;
    for c in &checks {
        writeln!(file, "{},{},\"{}\"", c.name, c.passed, c.detail)?;
    }
    Ok(ValidationOutcome { checks, csv_path })
}
