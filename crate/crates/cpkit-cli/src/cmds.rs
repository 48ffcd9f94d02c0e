// SPDX-License-Identifier: MIT OR Apache-2.0

//! Implementations of the five subcommands.

use crate::config::RunConfig;
use crate::errors::CliError;
use crate::io::{atomic_write, fmt_label, read_series};
use crate::svg;
use cpkit::detect::{estimate_sigma_mad, pelt, pelt_auto, select_bic};
use cpkit::ews::{ews_rate, EwsConfig};
use cpkit::inference::{bootstrap_ci, permutation_test};
use cpkit::power::{cell_seed, location_tolerance, run_cell, run_grid};
use cpkit::simulate::{gen_series, make_signal, true_breakpoints};
use cpkit::{DetectorConfig, Method, Scenario, ScenarioSpec, SeedSpec};
use std::path::{Path, PathBuf};

/// Use the given seed or draw one from entropy and announce it, so every run
/// is reproducible after the fact.
pub fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            println!("seed: {s} (drawn from entropy; pass --seed {s} to reproduce)");
            s
        }
    }
}

fn run_in_pool<T: Send>(
    workers: usize,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    if workers == 0 {
        f()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| CliError::input(e.to_string()))?;
        pool.install(f)
    }
}

pub struct DetectArgs {
    pub input: PathBuf,
    pub method: Method,
    pub k_max: Option<usize>,
    pub penalty: Option<f64>,
    pub perms: usize,
    pub boots: usize,
    pub seed: Option<u64>,
    pub aggregate_mean: bool,
    pub out: Option<PathBuf>,
}

pub fn cmd_detect(args: DetectArgs) -> Result<(), CliError> {
    let series = read_series(&args.input, args.aggregate_mean)?;
    let mut cfg = DetectorConfig::default();
    if let Some(k) = args.k_max {
        cfg.k_max = k;
    }
    println!("series: {} (n = {})", args.input.display(), series.len());

    let result = match args.method {
        Method::BinsegBic => select_bic(&series, &cfg)?,
        Method::Pelt => match args.penalty {
            Some(beta) => pelt(&series, beta, &cfg)?,
            None => pelt_auto(&series, &cfg)?,
        },
    };
    println!("method: {}", result.method);
    let labels: Vec<String> = result
        .breakpoints()
        .iter()
        .map(|&b| fmt_label(series.label_at(b)))
        .collect();
    if labels.is_empty() {
        println!("breakpoints: none");
    } else {
        println!("breakpoints: {}", labels.join(", "));
    }
    if let Some(trace) = &result.bic_trace {
        let fmt: Vec<String> = trace
            .iter()
            .enumerate()
            .map(|(k, b)| format!("K={k}: {b:.3}"))
            .collect();
        println!("bic_trace: {}", fmt.join("  "));
    }
    if let Some(beta) = result.penalty_used {
        println!("penalty: {beta:.4}");
    }
    match result.sigma_hat {
        Some(s) => println!("sigma_hat: {s:.4}"),
        None => {
            if let Ok(s) = estimate_sigma_mad(&series) {
                println!("sigma_hat: {s:.4}");
            }
        }
    }
    if result.degenerate_sigma {
        println!("warning: noise estimate collapsed to its floor; penalty is unreliable");
    }

    if args.perms > 0 || args.boots > 0 {
        let seed = resolve_seed(args.seed);
        if args.perms > 0 {
            let report = permutation_test(&series, &cfg, args.perms, seed)?;
            println!(
                "permutation: p = {} ({} permutations, delta-BIC = {:.3})",
                report.p_value, report.n_perm, report.observed_stat
            );
        }
        if args.boots > 0 {
            let k_hat = result.breakpoints().len();
            if k_hat == 0 {
                println!("bootstrap: skipped (no changepoints detected)");
            } else {
                let report = bootstrap_ci(&series, k_hat, args.boots, 0.95, seed)?;
                for iv in &report.intervals {
                    println!(
                        "bootstrap 95% CI: {} [{}, {}]",
                        fmt_label(iv.estimate),
                        fmt_label(iv.lower),
                        fmt_label(iv.upper)
                    );
                }
                if report.skipped > 0 {
                    println!(
                        "bootstrap: {} of {} resamples could not place {} breakpoints",
                        report.skipped, report.n_boot, k_hat
                    );
                }
            }
        }
    }

    if let Some(out) = &args.out {
        let mut csv = String::from("breakpoint,time\n");
        for &b in result.breakpoints() {
            csv.push_str(&format!("{b},{}\n", fmt_label(series.label_at(b))));
        }
        atomic_write(out, &csv)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

pub struct PowerGridArgs {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: usize,
    pub reps: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn cmd_power_grid(args: PowerGridArgs) -> Result<(), CliError> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(reps) = args.reps {
        cfg.grid.reps = reps;
    }
    cfg.grid.validate()?;
    let seed = resolve_seed(args.seed.or(cfg.master_seed));
    let out_csv = args
        .out
        .or(cfg.out_csv)
        .unwrap_or_else(|| PathBuf::from("power_grid.csv"));
    let svg_prefix = cfg
        .svg_prefix
        .unwrap_or_else(|| out_csv.with_extension(""));

    let table = run_in_pool(args.workers, || {
        Ok(run_grid(&cfg.grid, seed, 0)?)
    })?;
    atomic_write(&out_csv, &table.to_csv())?;
    println!("wrote {}", out_csv.display());

    for &k in &cfg.grid.k_values {
        let rows: Vec<String> = cfg.grid.n_values.iter().map(|n| format!("n = {n}")).collect();
        let cols: Vec<String> = cfg.grid.es_values.iter().map(|es| format!("{es}")).collect();
        let values: Vec<Vec<Option<f64>>> = cfg
            .grid
            .n_values
            .iter()
            .map(|&n| {
                cfg.grid
                    .es_values
                    .iter()
                    .map(|&es| {
                        table
                            .cell(n, es, k)
                            .and_then(|c| c.stats.as_ref())
                            .map(|s| s.pct_correct_k)
                    })
                    .collect()
            })
            .collect();
        let title = format!(
            "Correct-K power (%), {} detector, K_true = {k}",
            cfg.grid.detector
        );
        let path = PathBuf::from(format!("{}_k{k}.svg", svg_prefix.display()));
        atomic_write(&path, &svg::heatmap(&title, &rows, &cols, &values))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub struct StudyArgs {
    pub seed: Option<u64>,
    pub workers: usize,
    pub reps: usize,
    pub out: PathBuf,
}

/// AR(1) robustness study: n = 18, K = 2, both detectors, phi sweep.
pub fn cmd_ar1_study(args: StudyArgs) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::input("reps must be >= 1"));
    }
    let seed = resolve_seed(args.seed);
    let (n, k) = (18usize, 2usize);
    let es_values = [0.5, 1.0, 1.5, 2.0, 3.0, 5.0];
    let phis = [0.0, 0.3, 0.6];

    let mut csv = String::from(
        "detector,phi,effect_size,n,k_true,reps,pct_correct_k,pct_correct_k_and_loc,\
under_rate,over_rate,mean_k_hat,master_seed\n",
    );
    run_in_pool(args.workers, || {
        for detector in [Method::BinsegBic, Method::Pelt] {
            for &phi in &phis {
                for &es in &es_values {
                    let spec = ScenarioSpec::new(n, es, k).with_phi(phi);
                    let cell = run_cell(
                        &spec,
                        args.reps,
                        detector,
                        cell_seed(seed, n, es, k, phi),
                    )?;
                    let s = cell.stats.expect("n=18, K=2 is feasible");
                    csv.push_str(&format!(
                        "{detector},{phi},{es},{n},{k},{},{},{},{},{},{},{seed}\n",
                        args.reps,
                        s.pct_correct_k,
                        s.pct_correct_k_and_loc,
                        s.under_rate,
                        s.over_rate,
                        s.mean_k_hat
                    ));
                }
            }
        }
        Ok(())
    })?;
    atomic_write(&args.out, &csv)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

/// EWS-vs-changepoint study: step and internal-ramp scenarios at n = 18,
/// K = 1, shared per-ES seeds.
pub fn cmd_ews_study(args: StudyArgs) -> Result<(), CliError> {
    if args.reps == 0 {
        return Err(CliError::input("reps must be >= 1"));
    }
    let seed = resolve_seed(args.seed);
    let n = 18usize;
    let es_values = [0.5, 1.0, 1.5, 2.0, 3.0, 5.0];
    let ews_cfg = EwsConfig::default();
    let tol = location_tolerance(n)?;
    let cfg = DetectorConfig::default();
    let truth = true_breakpoints(n, 1);

    let mut rows = Vec::new();
    run_in_pool(args.workers, || {
        for &es in &es_values {
            let cs = cell_seed(seed, n, es, 1, 0.0);
            let ramp = ScenarioSpec::new(n, es, 1).with_scenario(Scenario::InternalRamp);
            let ews = ews_rate(&ramp, args.reps, &ews_cfg, cs)?;

            // Changepoint column: any BIC-selected breakpoint within the
            // location tolerance of the (single) true changepoint.
            let step = ScenarioSpec::new(n, es, 1);
            let mut hits = 0usize;
            for rep in 0..args.reps {
                let (series, _) = gen_series(&step, SeedSpec::new(cs, rep as u64))?;
                let det = select_bic(&series, &cfg)?;
                if det
                    .breakpoints()
                    .iter()
                    .any(|&b| b.abs_diff(truth[0]) <= tol)
                {
                    hits += 1;
                }
            }
            let cp = 100.0 * hits as f64 / args.reps as f64;
            rows.push((es, ews, cp));
        }
        Ok(())
    })?;

    let mut csv = String::from("effect_size,ews_rate,cp_detect_rate,reps,master_seed\n");
    for &(es, ews, cp) in &rows {
        csv.push_str(&format!("{es},{ews},{cp},{},{seed}\n", args.reps));
    }
    atomic_write(&args.out, &csv)?;
    println!("wrote {}", args.out.display());
    match rows.iter().find(|&&(_, ews, cp)| cp > ews) {
        Some(&(es, _, _)) => println!("crossover_es: {es}"),
        None => println!("crossover_es: none within tested range"),
    }
    Ok(())
}

pub struct SimulateArgs {
    pub n: usize,
    pub effect_size: f64,
    pub n_bkps: usize,
    pub phi: f64,
    pub sigma: f64,
    pub baseline: f64,
    pub scenario: Scenario,
    pub seed: Option<u64>,
    pub rep: u64,
    pub out: PathBuf,
}

pub fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let spec = ScenarioSpec {
        n: args.n,
        effect_size: args.effect_size,
        n_bkps: args.n_bkps,
        sigma: args.sigma,
        baseline: args.baseline,
        phi: args.phi,
        scenario: args.scenario,
    };
    spec.validate()?;
    let seed = resolve_seed(args.seed);
    let (series, bps) = gen_series(&spec, SeedSpec::new(seed, args.rep))?;
    let (signal, _) = make_signal(&spec)?;

    let mut csv = String::from("time,value\n");
    for (t, v) in series.values().iter().enumerate() {
        csv.push_str(&format!("{t},{v}\n"));
    }
    atomic_write(&args.out, &csv)?;

    let sidecar = sidecar_path(&args.out);
    let mut truth = String::from("segment,start,end,level\n");
    let mut start = 0usize;
    for (i, &b) in bps.iter().chain(std::iter::once(&spec.n)).enumerate() {
        truth.push_str(&format!("{i},{start},{b},{}\n", signal[start]));
        start = b;
    }
    atomic_write(&sidecar, &truth)?;
    println!("wrote {} and {}", args.out.display(), sidecar.display());
    if bps.is_empty() {
        println!("true breakpoints: none");
    } else {
        let fmt: Vec<String> = bps.iter().map(|b| b.to_string()).collect();
        println!("true breakpoints: {}", fmt.join(", "));
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => out.with_extension(format!("truth.{ext}")),
        None => out.with_extension("truth"),
    }
}
