//! Subcommand implementations.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use neurofri::encoder::Encoder;
use neurofri::io::write_json;
use neurofri::kernels::SamplingKernel;
use neurofri::recon::{build_g, ReconstructionReport};
use neurofri::scenarios::{fraction_of_bound, signal_classes, Configuration, Scenario};
use neurofri::signal_model::SignalKind;
use neurofri::synth::{random_signal, trial_rng, RandomSignalSpec};
use neurofri::{Execution, FriError};

use crate::builtin::{self, BUILTINS};
use crate::config::{ConfigError, Expectation, ScenarioConfig};
use crate::output::{write_run, RunReport, Status};

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
    Reconstruction(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Reconstruction(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Config(m) | CliError::Reconstruction(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Io(format!("{e:#}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

fn io_error(e: FriError) -> CliError {
    CliError::Io(e.to_string())
}

type CliResult<T> = Result<T, CliError>;

fn template(grid_density: Option<usize>) -> Encoder {
    let enc = Encoder::new(1.0, 1.0);
    match grid_density {
        Some(d) => enc.with_grid_density(d),
        None => enc,
    }
}

fn check_density(grid_density: Option<usize>) -> CliResult<()> {
    match grid_density {
        Some(d) if d < 2 => Err(CliError::Config("grid density must be at least 2".into())),
        _ => Ok(()),
    }
}

fn load(spec: &str) -> CliResult<ScenarioConfig> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path)?;
        return Ok(ScenarioConfig::from_toml(&text)?);
    }
    match builtin::find(spec) {
        Some(b) => Ok(builtin::config(b)?),
        None => Err(CliError::Config(format!(
            "'{spec}' is neither a configuration file nor a built-in scenario (see `neurofri list`)"
        ))),
    }
}

fn is_insufficient(e: &FriError) -> bool {
    matches!(
        e,
        FriError::InsufficientEvents { .. } | FriError::InsufficientTotalEvents { .. }
    )
}

/// Result of one configured run, before anything is written.
struct Executed {
    scenario: Scenario,
    streams: Vec<neurofri::encoder::EventStream>,
    report: RunReport,
}

fn execute(cfg: &ScenarioConfig, template: &Encoder) -> CliResult<Executed> {
    let resolved = cfg.resolve(template)?;
    let scenario = resolved.scenario;
    // encoding only fails on signals the configuration should not have produced
    let streams = scenario
        .encode(template)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut report = RunReport::new(&scenario, &resolved.bounds, &streams, cfg.tolerance);
    match scenario.reconstruct(&streams) {
        Ok(reports) => {
            let max_error = reports
                .iter()
                .map(|r| r.err.unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            report.max_error = Some(max_error);
            report.reports = reports;
            report.status = match cfg.expect {
                Expectation::Success if max_error <= cfg.tolerance => Status::Pass,
                Expectation::Success => {
                    report.error = Some(format!(
                        "parameter error {max_error:.3e} exceeds tolerance {:.1e}",
                        cfg.tolerance
                    ));
                    Status::Fail
                }
                Expectation::InsufficientEvents => {
                    report.error =
                        Some("decoding succeeded where too few events were expected".into());
                    Status::Fail
                }
            };
        }
        Err(e) => {
            report.status = if cfg.expect == Expectation::InsufficientEvents && is_insufficient(&e)
            {
                Status::ExpectedFailure
            } else {
                Status::Fail
            };
            report.error = Some(e.to_string());
        }
    }
    Ok(Executed {
        scenario,
        streams,
        report,
    })
}

fn fmt_sci(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.2e}")
    } else {
        v.to_string()
    }
}

fn worst<'a>(
    reports: impl IntoIterator<Item = &'a ReconstructionReport>,
    f: impl Fn(&ReconstructionReport) -> f64,
) -> Option<f64> {
    reports.into_iter().map(f).reduce(f64::max)
}

pub fn run(spec: &str, out: Option<PathBuf>, grid_density: Option<usize>) -> CliResult<()> {
    check_density(grid_density)?;
    let cfg = load(spec)?;
    let run = execute(&cfg, &template(grid_density))?;
    let dir = out.unwrap_or_else(|| Path::new("out").join(&cfg.name));
    write_run(&dir, &run.scenario, &run.streams, &run.report)?;

    let r = &run.report;
    println!(
        "scenario {} ({:?}, K = {}, T = {})",
        r.scenario, r.configuration, r.model_order, r.period
    );
    for c in &r.channels {
        println!(
            "  channel {}: C = {:.6e}, bound {:.6e}, {} events",
            c.channel, c.threshold, c.bound, c.events
        );
    }
    if !r.reports.is_empty() {
        let cond = worst(&r.reports, |x| x.condition_g).unwrap_or(f64::NAN);
        let residual = worst(&r.reports, |x| x.residual).unwrap_or(f64::NAN);
        println!(
            "  cond(G) {}, residual {}, max error {}",
            fmt_sci(cond),
            fmt_sci(residual),
            fmt_sci(r.max_error.unwrap_or(f64::NAN))
        );
    }
    println!(
        "  status {}, artifacts in {}",
        r.status.label(),
        dir.display()
    );
    match &r.error {
        Some(e) if r.status != Status::Pass => Err(CliError::Reconstruction(e.clone())),
        _ => Ok(()),
    }
}

/// One line of the verification table.
struct Row {
    name: String,
    events: String,
    cond: String,
    residual: String,
    error: String,
    status: Status,
    note: String,
}

impl Row {
    fn property(name: &str, ok: bool, note: String) -> Self {
        Row {
            name: name.into(),
            events: "-".into(),
            cond: "-".into(),
            residual: "-".into(),
            error: "-".into(),
            status: if ok { Status::Pass } else { Status::Fail },
            note,
        }
    }
}

fn scenario_row(name: &str, result: CliResult<Executed>) -> Row {
    match result {
        Ok(run) => {
            let r = &run.report;
            let events: Vec<String> = r.channels.iter().map(|c| c.events.to_string()).collect();
            Row {
                name: name.into(),
                events: events.join("+"),
                cond: worst(&r.reports, |x| x.condition_g)
                    .map(fmt_sci)
                    .unwrap_or("-".into()),
                residual: worst(&r.reports, |x| x.residual)
                    .map(fmt_sci)
                    .unwrap_or("-".into()),
                error: r.max_error.map(fmt_sci).unwrap_or("-".into()),
                status: r.status,
                note: r.error.clone().unwrap_or_default(),
            }
        }
        Err(e) => Row {
            name: name.into(),
            events: "-".into(),
            cond: "-".into(),
            residual: "-".into(),
            error: "-".into(),
            status: Status::Fail,
            note: e.to_string(),
        },
    }
}

const PROPERTY_DRAWS: u64 = 100;
const CLASS_TRIALS: u64 = 20;
const PROPERTY_SEED: u64 = 0x7e57;

/// Threshold below the bound yields at least `2K+1` events, and the event
/// matrix built from them is well conditioned.
fn event_properties(template: &Encoder) -> Vec<Row> {
    let outcomes = Execution::default().map_tasks(PROPERTY_DRAWS as usize, |i| {
        let mut rng = trial_rng(PROPERTY_SEED, i as u64);
        let k = 1 + (i % 8);
        let spec = RandomSignalSpec::new(SignalKind::DiracStream, k, 1.0);
        let x = random_signal(&mut rng, &spec)?;
        let kernel = SamplingKernel::sms(0, k, 1.0);
        let c = fraction_of_bound(&x, &kernel, 0.95)?;
        let scenario = Scenario {
            name: String::new(),
            configuration: Configuration::Single,
            kernel,
            signals: vec![x],
            thresholds: vec![c],
        };
        let enc = Encoder {
            execution: Execution::Sequential,
            ..*template
        };
        let stream = scenario.encode(&enc)?.remove(0);
        let cond = build_g(&stream.times(), k, 1.0)?.condition_number();
        let required = 2 * k + 1;
        Ok::<_, FriError>((stream.len() >= required, cond))
    });
    let mut counted = 0;
    let mut worst_cond: f64 = 0.0;
    let mut failures = Vec::new();
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok((enough, cond)) => {
                counted += enough as usize;
                worst_cond = worst_cond.max(cond);
            }
            Err(e) => failures.push(format!("draw {i}: {e}")),
        }
    }
    let n = PROPERTY_DRAWS as usize;
    vec![
        Row::property(
            "property: L >= 2K+1 below bound",
            counted == n && failures.is_empty(),
            format!(
                "{counted}/{n} draws{}",
                failures
                    .first()
                    .map(|f| format!("; {f}"))
                    .unwrap_or_default()
            ),
        ),
        Row::property(
            "property: G invertible",
            worst_cond < 1e10 && failures.is_empty(),
            format!("worst cond(G) {} over {n} draws", fmt_sci(worst_cond)),
        ),
    ]
}

/// Random single-channel trials per class. A trial passes when it is exact
/// or the decoder flags it as ill-conditioned.
fn class_properties(template: &Encoder) -> Vec<Row> {
    signal_classes()
        .iter()
        .map(|(name, kind)| {
            let results = Execution::default().map_tasks(CLASS_TRIALS as usize, |i| {
                let spec = RandomSignalSpec::new(*kind, 5, 1.0);
                let x = random_signal(&mut trial_rng(PROPERTY_SEED + 1, i as u64), &spec)?;
                let kernel = SamplingKernel::sms(0, 5, 1.0);
                let c = fraction_of_bound(&x, &kernel, 0.9)?;
                let scenario = Scenario {
                    name: String::new(),
                    configuration: Configuration::Single,
                    kernel,
                    signals: vec![x],
                    thresholds: vec![c],
                };
                let enc = Encoder {
                    execution: Execution::Sequential,
                    ..*template
                };
                let out = scenario.run(&enc)?;
                Ok::<_, FriError>((out.max_error(), out.reports[0].ill_conditioned))
            });
            let mut exact = 0;
            let mut unflagged = 0;
            let mut errors = 0;
            for r in &results {
                match r {
                    Ok((err, _)) if *err <= 1e-8 => exact += 1,
                    Ok((_, true)) => {}
                    Ok((_, false)) => unflagged += 1,
                    Err(_) => errors += 1,
                }
            }
            Row::property(
                &format!("property: random {name} trials"),
                unflagged == 0 && errors == 0,
                format!(
                    "{exact}/{CLASS_TRIALS} exact, {unflagged} unflagged misses, {errors} errors"
                ),
            )
        })
        .collect()
}

pub fn verify(out: Option<PathBuf>, grid_density: Option<usize>) -> CliResult<()> {
    check_density(grid_density)?;
    let template = template(grid_density);
    let mut rows = Vec::new();
    for b in BUILTINS {
        let result = builtin::config(b)
            .map_err(CliError::from)
            .and_then(|cfg| execute(&cfg, &template));
        if let (Some(dir), Ok(run)) = (&out, &result) {
            write_run(&dir.join(b.name), &run.scenario, &run.streams, &run.report)?;
        }
        rows.push(scenario_row(b.name, result));
    }
    rows.extend(event_properties(&template));
    rows.extend(class_properties(&template));

    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(8).max(8);
    println!(
        "{:<width$}  {:>7}  {:>9}  {:>9}  {:>9}  {:<8}  note",
        "scenario", "L", "cond(G)", "residual", "max err", "result"
    );
    for r in &rows {
        println!(
            "{:<width$}  {:>7}  {:>9}  {:>9}  {:>9}  {:<8}  {}",
            r.name,
            r.events,
            r.cond,
            r.residual,
            r.error,
            r.status.label(),
            r.note
        );
    }
    let failed = rows.iter().filter(|r| !r.status.ok()).count();
    println!("{} of {} checks passed", rows.len() - failed, rows.len());
    if failed > 0 {
        return Err(CliError::Reconstruction(format!("{failed} checks failed")));
    }
    Ok(())
}

pub struct SweepArgs {
    pub trials: usize,
    pub seed: u64,
    pub model_order: usize,
    pub class: String,
    pub fraction: f64,
    pub tolerance: f64,
    pub out: Option<PathBuf>,
    pub grid_density: Option<usize>,
}

#[derive(Serialize)]
struct TrialRecord {
    trial: usize,
    seed: u64,
    #[serde(rename = "C")]
    threshold: Option<f64>,
    truth_tau: Vec<f64>,
    truth_a: Vec<f64>,
    report: Option<ReconstructionReport>,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct SweepSummary {
    class: String,
    #[serde(rename = "K")]
    model_order: usize,
    seed: u64,
    trials: usize,
    fraction: f64,
    tolerance: f64,
    passed: usize,
    /// Misses the decoder flagged as ill-conditioned.
    flagged_misses: usize,
    unflagged_misses: usize,
    errors: usize,
    median_error: Option<f64>,
    max_error: Option<f64>,
}

fn sweep_trial(args: &SweepArgs, kind: SignalKind, template: &Encoder, i: usize) -> TrialRecord {
    let mut record = TrialRecord {
        trial: i,
        seed: args.seed,
        threshold: None,
        truth_tau: Vec::new(),
        truth_a: Vec::new(),
        report: None,
        passed: false,
        error: None,
    };
    let mut attempt = || -> Result<(), FriError> {
        let spec = RandomSignalSpec::new(kind, args.model_order, 1.0);
        let x = random_signal(&mut trial_rng(args.seed, i as u64), &spec)?;
        record.truth_tau = x.supports().to_vec();
        record.truth_a = x.amplitudes().to_vec();
        let kernel = SamplingKernel::sms(0, args.model_order, 1.0);
        let c = fraction_of_bound(&x, &kernel, args.fraction)?;
        record.threshold = Some(c);
        let scenario = Scenario {
            name: format!("trial-{i}"),
            configuration: Configuration::Single,
            kernel,
            signals: vec![x],
            thresholds: vec![c],
        };
        let enc = Encoder {
            execution: Execution::Sequential,
            ..*template
        };
        let mut out = scenario.run(&enc)?;
        let report = out.reports.remove(0);
        record.passed = report.err.is_some_and(|e| e <= args.tolerance);
        record.report = Some(report);
        Ok(())
    };
    if let Err(e) = attempt() {
        record.error = Some(e.to_string());
    }
    record
}

pub fn sweep(args: &SweepArgs) -> CliResult<()> {
    check_density(args.grid_density)?;
    let kind = signal_classes()
        .iter()
        .find(|(name, _)| *name == args.class)
        .map(|(_, k)| *k)
        .ok_or_else(|| {
            CliError::Config(format!(
                "unknown class '{}': use dirac, pulse, d1 or d2",
                args.class
            ))
        })?;
    if args.model_order == 0 || args.trials == 0 {
        return Err(CliError::Config(
            "trials and model order must be positive".into(),
        ));
    }
    if !(args.fraction > 0.0 && args.fraction < 1.0) {
        return Err(CliError::Config("fraction must lie in (0, 1)".into()));
    }
    let template = template(args.grid_density);
    let records =
        Execution::default().map_tasks(args.trials, |i| sweep_trial(args, kind, &template, i));

    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| Path::new("out").join(format!("sweep-{}", args.seed)));
    std::fs::create_dir_all(&dir)?;
    let digits = (args.trials - 1).to_string().len().max(4);
    for r in &records {
        write_json(&dir.join(format!("trial-{:0digits$}.json", r.trial)), r).map_err(io_error)?;
    }

    let mut errors: Vec<f64> = records
        .iter()
        .filter_map(|r| r.report.as_ref()?.err)
        .collect();
    errors.sort_by(f64::total_cmp);
    let missed = |flagged: bool| {
        records
            .iter()
            .filter(|r| !r.passed)
            .filter(|r| {
                r.report
                    .as_ref()
                    .is_some_and(|rep| rep.ill_conditioned == flagged)
            })
            .count()
    };
    let summary = SweepSummary {
        class: args.class.clone(),
        model_order: args.model_order,
        seed: args.seed,
        trials: args.trials,
        fraction: args.fraction,
        tolerance: args.tolerance,
        passed: records.iter().filter(|r| r.passed).count(),
        flagged_misses: missed(true),
        unflagged_misses: missed(false),
        errors: records.iter().filter(|r| r.error.is_some()).count(),
        median_error: errors.get(errors.len() / 2).copied(),
        max_error: errors.last().copied(),
    };
    write_json(&dir.join("summary.json"), &summary).map_err(io_error)?;
    println!(
        "{} trials of {} with K = {}: {} within {:.0e}, {} flagged misses, {} unflagged misses, {} errors",
        summary.trials,
        summary.class,
        summary.model_order,
        summary.passed,
        summary.tolerance,
        summary.flagged_misses,
        summary.unflagged_misses,
        summary.errors
    );
    println!(
        "median error {}, max error {}, results in {}",
        summary.median_error.map(fmt_sci).unwrap_or("-".into()),
        summary.max_error.map(fmt_sci).unwrap_or("-".into()),
        dir.display()
    );
    if summary.passed < summary.trials {
        return Err(CliError::Reconstruction(format!(
            "{} of {} trials missed the tolerance",
            summary.trials - summary.passed,
            summary.trials
        )));
    }
    Ok(())
}

pub fn list() -> CliResult<()> {
    let width = BUILTINS.iter().map(|b| b.name.len()).max().unwrap_or(0);
    for b in BUILTINS {
        println!("{:<width$}  {}", b.name, b.summary);
    }
    Ok(())
}

pub fn show(name: &str) -> CliResult<()> {
    let b = builtin::find(name)
        .ok_or_else(|| CliError::Config(format!("no built-in scenario named '{name}'")))?;
    print!("{}", b.toml.trim_start());
    Ok(())
}
