use std::path::{Path, PathBuf};

use shiftdens_core::density::{bandwidth_lscv, bandwidth_theoretical, default_x_grid, kde};
use shiftdens_core::estimation::{EstimatorConfig, ShiftEstimator, TauGrid};
use shiftdens_core::experiments::suites::{DENSITY_SIGMA, LASER_SIGMA};
use shiftdens_core::experiments::{run_suite, Suite, SuiteSize};
use shiftdens_core::signal::{generate_panel_with_shifts, sample_shifts, ShiftDistribution, Signal};

use crate::config::{BandwidthSpec, RunConfig};
use crate::error::{data, usage, CliError, CliResult};
use crate::files::{format_panel, format_true_shifts, read_panel, read_shift_values, write_atomic};
use crate::{BenchArgs, DensityArgs, EstimateArgs, SimulateArgs};

fn load_config(path: Option<&PathBuf>) -> CliResult<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), |p| RunConfig::load(p))
}

fn numbers(spec: &str, what: &str, count: usize) -> CliResult<Vec<f64>> {
    let values: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("{what} '{spec}': expected {count} comma-separated numbers")))?;
    if values.len() != count {
        return Err(CliError::Usage(format!("{what} '{spec}': expected {count} comma-separated numbers")));
    }
    Ok(values)
}

fn parse_signal(spec: &str) -> CliResult<Signal> {
    match spec.split_once(':') {
        None if spec == "single-harmonic" => Ok(Signal::single_harmonic()),
        None if spec == "half-sine" => Ok(Signal::half_sine()),
        None if spec == "laser" => Signal::laser(1.0, 100.0).map_err(usage),
        Some(("laser", args)) => {
            let v = numbers(args, "laser", 2)?;
            Signal::laser(v[0], v[1]).map_err(usage)
        }
        _ => Err(CliError::Usage(format!(
            "unknown signal '{spec}' (use single-harmonic, half-sine, laser, or laser:A,B)"
        ))),
    }
}

fn parse_dist(spec: &str) -> CliResult<ShiftDistribution> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    match name {
        "bimodal" if args.is_empty() => Ok(ShiftDistribution::bimodal_preset()),
        "uniform" => {
            let v = numbers(args, "uniform", 2)?;
            ShiftDistribution::uniform(v[0], v[1]).map_err(usage)
        }
        "bump" => {
            let v = numbers(args, "bump", 2)?;
            ShiftDistribution::cosine_bump(v[0], v[1]).map_err(usage)
        }
        "point" => {
            let v = numbers(args, "point", 1)?;
            ShiftDistribution::point_mass(v[0]).map_err(usage)
        }
        _ => Err(CliError::Usage(format!(
            "unknown distribution '{spec}' (use uniform:LO,HI, bump:C,W, bimodal, or point:X)"
        ))),
    }
}

struct SimulationPlan {
    signal: Signal,
    dist: ShiftDistribution,
    offset: f64,
    n: usize,
    j: usize,
    sigma: f64,
}

fn preset(name: &str) -> CliResult<SimulationPlan> {
    let laser = |amplitude: f64| Signal::laser(amplitude, 100.0).map_err(usage);
    Ok(match name {
        "sim1" => SimulationPlan {
            signal: Signal::half_sine(),
            dist: ShiftDistribution::bimodal_preset(),
            offset: 0.0,
            n: 100,
            j: 50,
            sigma: DENSITY_SIGMA,
        },
        "sim2" => SimulationPlan {
            signal: laser(1.0)?,
            dist: ShiftDistribution::cosine_bump(0.0, 0.1).map_err(usage)?,
            offset: 0.35,
            n: 100,
            j: 30,
            sigma: DENSITY_SIGMA,
        },
        "illustration" | "demo" => SimulationPlan {
            signal: laser(if name == "demo" { 0.015 } else { 1.0 })?,
            dist: ShiftDistribution::point_mass(0.0).map_err(usage)?,
            offset: 0.35,
            n: 800,
            j: 1,
            sigma: LASER_SIGMA,
        },
        _ => {
            return Err(CliError::Usage(format!(
                "unknown preset '{name}' (use sim1, sim2, illustration, or demo)"
            )))
        }
    })
}

fn default_shifts_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or_else(|| "panel".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.shifts.csv"))
}

pub fn simulate(args: &SimulateArgs) -> CliResult<u8> {
    let cfg = load_config(args.config.as_ref())?;
    let mut plan = preset(args.preset.as_deref().unwrap_or("sim1"))?;
    if let Some(s) = &args.signal {
        plan.signal = parse_signal(s)?;
    }
    if let Some(d) = &args.dist {
        plan.dist = parse_dist(d)?;
    }
    if let Some(o) = args.offset {
        plan.offset = o;
    }
    plan.n = args.n.unwrap_or(plan.n);
    plan.j = args.j.unwrap_or(plan.j);
    plan.sigma = args.sigma.or(cfg.sigma).unwrap_or(plan.sigma);
    let seed = args.seed.or(cfg.seed).unwrap_or(1);
    if !(plan.sigma.is_finite() && plan.sigma >= 0.0) {
        return Err(CliError::Usage(format!("--sigma must be nonnegative, got {}", plan.sigma)));
    }
    if plan.n < 4 || plan.j == 0 {
        return Err(CliError::Usage("need --n >= 4 and --j >= 1".into()));
    }
    let mut shifts: Vec<f64> = sample_shifts(&plan.dist, plan.j, seed)
        .map_err(usage)?
        .into_iter()
        .map(|s| s + plan.offset)
        .collect();
    if let Some(g) = &args.grid {
        let v = numbers(g, "--grid", 3)?;
        if v[2] < 3.0 || v[2].fract() != 0.0 {
            return Err(CliError::Usage(format!("--grid '{g}': M must be an integer >= 3")));
        }
        let grid = TauGrid::new(v[0], v[1], v[2] as usize).map_err(usage)?;
        for s in &mut shifts {
            *s = grid.point(grid.nearest_index(*s));
        }
    }
    let panel = generate_panel_with_shifts(&[plan.signal], &shifts, plan.sigma, plan.n, seed).map_err(usage)?;
    let shifts_out = args.shifts_out.clone().unwrap_or_else(|| default_shifts_path(&args.out));
    write_atomic(&args.out, &format_panel(&panel))?;
    write_atomic(&shifts_out, &format_true_shifts(&shifts))?;
    println!(
        "wrote {} curves x {} points to {} and shifts to {}",
        panel.curves(),
        panel.n(),
        args.out.display(),
        shifts_out.display()
    );
    Ok(0)
}

pub fn estimate(args: &EstimateArgs) -> CliResult<u8> {
    let cfg = load_config(args.config.as_ref())?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.shifts_out.clone())
        .ok_or_else(|| CliError::Usage("no output path: pass --out or set shifts_out".into()))?;
    let panel = read_panel(&args.panel)?;
    let mut ec = EstimatorConfig::new(cfg.tau_grid.clone())
        .with_refine(cfg.refine)
        .with_beta(cfg.beta);
    if let Some(k) = cfg.k_max {
        ec = ec.with_k_grid((1..=k).collect());
    }
    let estimator = ShiftEstimator::new(ec, panel.n()).map_err(usage)?;
    let mut text = String::from("curve_id,theta_hat,K_selected,M_max,degenerate_flag\n");
    let mut degenerate = 0;
    for (j, r) in estimator.estimate_panel(&panel).into_iter().enumerate() {
        let e = r.map_err(data)?;
        degenerate += usize::from(e.degenerate);
        text.push_str(&format!(
            "{},{},{},{},{}\n",
            j + 1,
            e.value(),
            e.selected_k,
            e.selected_m(),
            u8::from(e.degenerate)
        ));
    }
    write_atomic(&out, &text)?;
    println!("estimated {} shifts ({degenerate} degenerate) to {}", panel.curves(), out.display());
    Ok(0)
}

pub fn density(args: &DensityArgs) -> CliResult<u8> {
    let cfg = load_config(args.config.as_ref())?;
    let kernel = match &args.kernel {
        Some(k) => shiftdens_core::density::Kernel::by_name(k).map_err(usage)?,
        None => cfg.kernel.clone(),
    };
    let policy = match &args.bandwidth {
        Some(b) => BandwidthSpec::parse(b).map_err(CliError::Usage)?,
        None => cfg.bandwidth.clone(),
    };
    let out = args
        .out
        .clone()
        .or_else(|| cfg.density_out.clone())
        .ok_or_else(|| CliError::Usage("no output path: pass --out or set density_out".into()))?;
    let points = read_shift_values(&args.shifts)?;
    let h = match policy {
        BandwidthSpec::Fixed(h) => h,
        BandwidthSpec::Theoretical(beta) => {
            let n = args
                .n
                .or(cfg.n)
                .ok_or_else(|| CliError::Usage("the theoretical bandwidth needs --n (curve length)".into()))?;
            bandwidth_theoretical(n, points.len(), beta).map_err(usage)?
        }
        BandwidthSpec::Lscv => {
            let sel = bandwidth_lscv(&points, &kernel, &cfg.h_grid).map_err(data)?;
            if sel.single_candidate {
                eprintln!("shiftdens: warning: h_grid has a single candidate; no cross-validation performed");
            }
            sel.bandwidth
        }
    };
    let est = kde(&points, &kernel, h, &default_x_grid(&points, h)).map_err(data)?;
    let mut text = String::from("x,phi_hat\n");
    for (x, v) in est.x_grid.iter().zip(&est.values) {
        text.push_str(&format!("{x},{v}\n"));
    }
    write_atomic(&out, &text)?;
    println!("h={h}, kernel={}, J={}", kernel.id(), points.len());
    Ok(0)
}

pub fn bench(args: &BenchArgs) -> CliResult<u8> {
    let suite: Suite = args.suite.parse().map_err(usage)?;
    let size = if args.smoke { SuiteSize::Smoke } else { SuiteSize::Full };
    let report = run_suite(suite, args.seed, size).map_err(data)?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["kind", "name", "value", "detail"]).map_err(io)?;
    for m in &report.metrics {
        w.write_record(["metric", &m.name, &m.value.to_string(), ""]).map_err(io)?;
    }
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        w.write_record(["check", &c.name, status, &c.detail]).map_err(io)?;
        println!("{status} {suite} {}: {}", c.name, c.detail);
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    write_atomic(&args.out, &String::from_utf8_lossy(&bytes))?;
    Ok(if report.all_passed() { 0 } else { 1 })
}
