//! The four subcommands: analyze, sweep, simulate, lifespan.

use std::io::Write;

use gwcell::branching::{spectral, SweepVar};
use gwcell::lifespan::expected_lifespan;
use gwcell::model::{
    jump_profile, rejuvenation_interval, rejuvenation_states, transition_kernel, MAlphaParams,
    ModelParams, ModelSpec,
};
use gwcell::simulator::{
    export_tree, simulate_lifespan, PopulationSim, PopulationState, TreeFormat,
    DEFAULT_POPULATION_CAP, DEFAULT_STEP_CAP,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig, TreeFileFormat};
use crate::output::{csv_field, num, open_out, opt_num, write_failed};
use crate::CliError;

#[derive(Serialize)]
struct AnalyzeReport {
    params: ModelSpec,
    rejuvenation: RejuvenationReport,
    jump: JumpReport,
    division_probs: Vec<f64>,
    lifespan: LifespanReport,
    growth: GrowthReport,
    stable_distribution: Vec<f64>,
    reproductive_value: Vec<f64>,
}

#[derive(Serialize)]
struct RejuvenationReport {
    interval: Option<(usize, usize)>,
    states: Vec<usize>,
}

#[derive(Serialize)]
struct JumpReport {
    h: Vec<f64>,
    d: Vec<f64>,
}

#[derive(Serialize)]
struct LifespanReport {
    lambda: Vec<f64>,
    truncated: bool,
}

#[derive(Serialize)]
struct GrowthReport {
    r: f64,
    a: f64,
    criticality: String,
    decomposed: bool,
    iterations: u64,
    residual: f64,
}

/// One JSON report with the rejuvenation structure, jump and division
/// curves, lifespans, and the growth spectrum.
pub fn cmd_analyze(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.format_or(OutputFormat::Json) != OutputFormat::Json {
        return Err(CliError::config("analyze emits json; drop --format csv".into()));
    }
    let params = cfg.resolve_model()?;
    let kernel = transition_kernel(&params);
    let jump = jump_profile(&kernel);
    let states = rejuvenation_states(&kernel);
    let interval = params
        .malpha()
        .and_then(|ma| rejuvenation_interval(ma).bounds());
    let lifespan = expected_lifespan(&params)?;
    let spec = spectral(&params)?;
    let report = AnalyzeReport {
        params: ModelSpec::from(&params),
        rejuvenation: RejuvenationReport { interval, states },
        jump: JumpReport {
            h: jump.h,
            d: jump.d,
        },
        division_probs: params.division_probs().to_vec(),
        lifespan: LifespanReport {
            lambda: lifespan.lambda,
            truncated: lifespan.truncated,
        },
        growth: GrowthReport {
            r: spec.r,
            a: spec.a,
            criticality: spec.criticality.to_string(),
            decomposed: spec.decomposed,
            iterations: spec.iterations,
            residual: spec.residual,
        },
        stable_distribution: spec.v,
        reproductive_value: spec.u,
    };
    let mut w = open_out(&cfg.out)?;
    serde_json::to_writer_pretty(&mut w, &report)
        .map_err(|e| CliError::numerical(format!("write failed: {e}")))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(write_failed)
}

#[derive(Serialize)]
struct SweepRow {
    sweep_var: String,
    value: f64,
    r: Option<f64>,
    a: Option<f64>,
    criticality: Option<String>,
    i1: Option<usize>,
    i2: Option<usize>,
    lambda_0: Option<f64>,
    error: Option<String>,
}

fn sweep_row(var: SweepVar, base: &MAlphaParams, value: f64) -> SweepRow {
    let mut row = SweepRow {
        sweep_var: var.to_string(),
        value,
        r: None,
        a: None,
        criticality: None,
        i1: None,
        i2: None,
        lambda_0: None,
        error: None,
    };
    let outcome = var.apply(base, value).and_then(|ma| {
        let params = ma.params();
        let spec = spectral(&params)?;
        let lifespan = expected_lifespan(&params)?;
        Ok((ma, spec, lifespan))
    });
    match outcome {
        Ok((ma, spec, lifespan)) => {
            row.r = Some(spec.r);
            row.a = Some(spec.a);
            row.criticality = Some(spec.criticality.to_string());
            if let Some((i1, i2)) = rejuvenation_interval(&ma).bounds() {
                row.i1 = Some(i1);
                row.i2 = Some(i2);
            }
            row.lambda_0 = Some(lifespan.lambda[0]);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Sweeps one family parameter over a value list; each row carries the
/// growth spectrum, rejuvenation endpoints and lambda_0, or an error.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.resolve_model()?;
    let base = *params.malpha().ok_or_else(|| {
        CliError::config("sweep varies the (m, alpha) family; give --n --m --p --alpha".into())
    })?;
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("sweep needs --var and --values".into()))?;
    if sweep.values.is_empty() {
        return Err(CliError::config("sweep needs a non-empty --values list".into()));
    }
    let var: SweepVar = sweep.var.parse().map_err(CliError::from_config_error)?;
    let rows: Vec<SweepRow> = sweep
        .values
        .par_iter()
        .map(|&v| sweep_row(var, &base, v))
        .collect();

    let mut w = open_out(&cfg.out)?;
    match cfg.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            writeln!(w, "sweep_var,value,r,a,criticality,i1,i2,lambda_0,error")
                .map_err(write_failed)?;
            for row in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{}",
                    row.sweep_var,
                    num(row.value),
                    opt_num(row.r),
                    opt_num(row.a),
                    row.criticality.as_deref().unwrap_or(""),
                    row.i1.map(|v| v.to_string()).unwrap_or_default(),
                    row.i2.map(|v| v.to_string()).unwrap_or_default(),
                    opt_num(row.lambda_0),
                    csv_field(row.error.as_deref().unwrap_or("")),
                )
                .map_err(write_failed)?;
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)
                .map_err(|e| CliError::numerical(format!("write failed: {e}")))?;
            w.write_all(b"\n").map_err(write_failed)?;
        }
    }
    w.flush().map_err(write_failed)?;
    if rows.iter().all(|r| r.error.is_some()) {
        return Err(CliError::numerical("every sweep point failed".into()));
    }
    Ok(())
}

fn initial_state(cfg: &RunConfig, params: &ModelParams) -> Result<PopulationState, CliError> {
    let n = params.n();
    if let Some(counts) = &cfg.initial_counts {
        if counts.len() != n {
            return Err(CliError::config(format!(
                "initial_counts must have length n = {n}, got {}",
                counts.len()
            )));
        }
        return Ok(PopulationState::new(counts.clone()));
    }
    if let Some(cells) = cfg.cells {
        let age = cfg.start_age.unwrap_or(0);
        if age >= n {
            return Err(CliError::config(format!(
                "--start-age must be below n = {n}, got {age}"
            )));
        }
        let mut counts = vec![0; n];
        counts[age] = cells;
        return Ok(PopulationState::new(counts));
    }
    Err(CliError::config(
        "simulate needs an initial population: --cells (with optional --start-age) or initial_counts".into(),
    ))
}

fn state_row(w: &mut dyn Write, state: &PopulationState) -> Result<(), CliError> {
    let mut line = format!("{},{},{}", state.t, state.total(), state.senescent);
    for c in &state.counts {
        line.push(',');
        line.push_str(&c.to_string());
    }
    writeln!(w, "{line}").map_err(write_failed)
}

fn write_tree(cfg: &RunConfig, sim: PopulationSim) -> Result<(), CliError> {
    let Some(path) = &cfg.tree_out else {
        return Ok(());
    };
    let format = match cfg.tree_format.unwrap_or(TreeFileFormat::Json) {
        TreeFileFormat::Json => TreeFormat::Json,
        TreeFileFormat::Dot => TreeFormat::Dot,
    };
    let tree = sim.into_tree().expect("tree recording was requested");
    std::fs::write(path, export_tree(&tree, format))
        .map_err(|e| CliError::numerical(format!("cannot write {}: {e}", path.display())))
}

/// Streams one population trajectory as CSV, one row per generation, with an
/// optional genealogy export. Rows already written survive a cap breach; the
/// breach adds a `#` marker row and exits with the resource code.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.format_or(OutputFormat::Csv) != OutputFormat::Csv {
        return Err(CliError::config("simulate emits csv; drop --format json".into()));
    }
    let params = cfg.resolve_model()?;
    let seed = cfg
        .seed
        .ok_or_else(|| CliError::config("simulate requires --seed".into()))?;
    let horizon = cfg
        .horizon
        .ok_or_else(|| CliError::config("simulate requires --horizon".into()))?;
    let initial = initial_state(cfg, &params)?;
    let cap = cfg.cap.unwrap_or(DEFAULT_POPULATION_CAP);
    let record_tree = cfg.tree_out.is_some();

    let mut sim = PopulationSim::new(&params, &initial, seed, cap, record_tree)?;
    let mut w = open_out(&cfg.out)?;
    let mut header = String::from("t,total,senescent");
    for i in 0..params.n() {
        header.push_str(&format!(",count_{i}"));
    }
    writeln!(w, "{header}").map_err(write_failed)?;
    state_row(w.as_mut(), &sim.state())?;
    for _ in 0..horizon {
        match sim.advance() {
            Ok(state) => state_row(w.as_mut(), &state)?,
            Err(e @ gwcell::Error::PopulationCap { t, population, cap }) => {
                writeln!(w, "# truncated at t={t}: population {population} exceeds cap {cap}")
                    .map_err(write_failed)?;
                w.flush().map_err(write_failed)?;
                write_tree(cfg, sim)?;
                return Err(CliError::from(e));
            }
            Err(e) => return Err(CliError::from(e)),
        }
    }
    w.flush().map_err(write_failed)?;
    write_tree(cfg, sim)
}

#[derive(Serialize)]
struct LifespanRow {
    i: usize,
    lambda_analytic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_mc_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_mc_stderr: Option<f64>,
}

/// Expected replicative lifespan per start age, optionally cross-checked by
/// Monte Carlo lineages (`--samples`).
pub fn cmd_lifespan(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.resolve_model()?;
    let lifespan = expected_lifespan(&params)?;
    let samples = cfg.samples.unwrap_or(0);
    let seed = cfg.seed.unwrap_or(0);
    let step_cap = cfg.step_cap.unwrap_or(DEFAULT_STEP_CAP);
    let mut rows = Vec::with_capacity(params.n());
    for (i, &lambda) in lifespan.lambda.iter().take(params.n()).enumerate() {
        let mut row = LifespanRow {
            i,
            lambda_analytic: lambda,
            lambda_mc_mean: None,
            lambda_mc_stderr: None,
        };
        if samples > 0 {
            let mc = simulate_lifespan(&params, i, samples, seed.wrapping_add(i as u64), step_cap)?;
            row.lambda_mc_mean = Some(mc.mean);
            row.lambda_mc_stderr = Some(mc.std_error);
        }
        rows.push(row);
    }
    let mut w = open_out(&cfg.out)?;
    match cfg.format_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            if samples > 0 {
                writeln!(w, "i,lambda_analytic,lambda_mc_mean,lambda_mc_stderr")
                    .map_err(write_failed)?;
                for row in &rows {
                    writeln!(
                        w,
                        "{},{},{},{}",
                        row.i,
                        num(row.lambda_analytic),
                        opt_num(row.lambda_mc_mean),
                        opt_num(row.lambda_mc_stderr)
                    )
                    .map_err(write_failed)?;
                }
            } else {
                writeln!(w, "i,lambda_analytic").map_err(write_failed)?;
                for row in &rows {
                    writeln!(w, "{},{}", row.i, num(row.lambda_analytic)).map_err(write_failed)?;
                }
            }
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut w, &rows)
                .map_err(|e| CliError::numerical(format!("write failed: {e}")))?;
            w.write_all(b"\n").map_err(write_failed)?;
        }
    }
    w.flush().map_err(write_failed)
}
