//! Run artifacts: event files, the JSON report and plot-ready CSV tables.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use neurofri::encoder::{t_transform, EventStream};
use neurofri::io::{write_event_files, write_json};
use neurofri::recon::ReconstructionReport;
use neurofri::scenarios::Scenario;
use neurofri::signal_model::{FilteredSignal, FriSignal, Waveform};

/// Points of the dense plotting grid over one period.
pub const PLOT_POINTS: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Decoding refused as the configuration expected.
    ExpectedFailure,
    Fail,
}

impl Status {
    pub fn ok(self) -> bool {
        self != Status::Fail
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::ExpectedFailure => "EXPECTED",
            Status::Fail => "FAIL",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelSummary {
    pub channel: usize,
    #[serde(rename = "C")]
    pub threshold: f64,
    pub bound: f64,
    pub events: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    pub tau: Vec<f64>,
    pub a: Vec<f64>,
}

/// Everything `report.json` records about one run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub configuration: neurofri::scenarios::Configuration,
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "K")]
    pub model_order: usize,
    pub kernel_order: usize,
    pub channels: Vec<ChannelSummary>,
    pub truth: Vec<Parameters>,
    pub reports: Vec<ReconstructionReport>,
    pub max_error: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn truths(scenario: &Scenario) -> Vec<&FriSignal> {
    match scenario.configuration {
        neurofri::scenarios::Configuration::Mimo => scenario.signals.iter().collect(),
        _ => vec![&scenario.signals[0]],
    }
}

impl RunReport {
    pub fn new(
        scenario: &Scenario,
        bounds: &[f64],
        streams: &[EventStream],
        tolerance: f64,
    ) -> Self {
        Self {
            scenario: scenario.name.clone(),
            configuration: scenario.configuration,
            period: scenario.period(),
            model_order: scenario.signals[0].model_order(),
            kernel_order: scenario.kernel.order,
            channels: streams
                .iter()
                .zip(bounds)
                .map(|(s, &bound)| ChannelSummary {
                    channel: s.channel,
                    threshold: s.threshold,
                    bound,
                    events: s.len(),
                })
                .collect(),
            truth: truths(scenario)
                .into_iter()
                .map(|x| Parameters {
                    tau: x.supports().to_vec(),
                    a: x.amplitudes().to_vec(),
                })
                .collect(),
            reports: Vec::new(),
            max_error: None,
            tolerance,
            status: Status::Fail,
            error: None,
        }
    }
}

/// Signal with the recovered parameters, when they form a valid signal.
fn estimate(truth: &FriSignal, report: &ReconstructionReport) -> Option<FriSignal> {
    FriSignal::new(
        truth.kind(),
        report.a.clone(),
        report.tau.clone(),
        truth.period(),
    )
    .ok()
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// `signal.csv`: dense grid of `x`, `f`, and their reconstructions per
/// signal. Dirac streams have no time-domain value and leave `x` empty.
fn write_signal_table(
    path: &Path,
    scenario: &Scenario,
    reports: &[ReconstructionReport],
) -> std::io::Result<()> {
    let period = scenario.period();
    let truths = truths(scenario);
    let filtered: Vec<Option<FilteredSignal>> = truths
        .iter()
        .map(|x| FilteredSignal::new(x, &scenario.kernel).ok())
        .collect();
    let estimates: Vec<Option<FriSignal>> = truths
        .iter()
        .enumerate()
        .map(|(i, x)| reports.get(i).and_then(|r| estimate(x, r)))
        .collect();
    let estimate_filtered: Vec<Option<FilteredSignal>> = estimates
        .iter()
        .map(|e| {
            e.as_ref()
                .and_then(|e| FilteredSignal::new(e, &scenario.kernel).ok())
        })
        .collect();

    let mut w = BufWriter::new(fs::File::create(path)?);
    let mut header = vec!["t".to_string()];
    for i in 1..=truths.len() {
        header.extend([
            format!("x_{i}"),
            format!("f_{i}"),
            format!("x_rec_{i}"),
            format!("f_rec_{i}"),
        ]);
    }
    writeln!(w, "{}", header.join(","))?;
    for n in 0..PLOT_POINTS {
        let t = period * n as f64 / (PLOT_POINTS - 1) as f64;
        let mut row = vec![t.to_string()];
        for i in 0..truths.len() {
            row.push(cell(truths[i].time_value(t)));
            row.push(cell(filtered[i].as_ref().map(|f| f.value(t))));
            row.push(cell(estimates[i].as_ref().and_then(|e| e.time_value(t))));
            row.push(cell(estimate_filtered[i].as_ref().map(|f| f.value(t))));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

/// `raster.csv`: one row per event with the signal level it certifies.
fn write_raster(path: &Path, streams: &[EventStream]) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "channel,t,p,f")?;
    for s in streams {
        for (e, (_, f)) in s.events.iter().zip(t_transform(s)) {
            writeln!(w, "{},{},{},{}", s.channel, e.t, e.polarity, f)?;
        }
    }
    w.flush()
}

/// `stems.csv`: true and recovered `(tau, a)` per signal.
fn write_stems(
    path: &Path,
    scenario: &Scenario,
    reports: &[ReconstructionReport],
) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "signal,source,tau,a")?;
    for (i, x) in truths(scenario).iter().enumerate() {
        for (tau, a) in x.supports().iter().zip(x.amplitudes()) {
            writeln!(w, "{},truth,{},{}", i + 1, tau, a)?;
        }
        if let Some(r) = reports.get(i) {
            for (tau, a) in r.tau.iter().zip(&r.a) {
                writeln!(w, "{},estimate,{},{}", i + 1, tau, a)?;
            }
        }
    }
    w.flush()
}

/// Writes every artifact of a run into `dir`.
pub fn write_run(
    dir: &Path,
    scenario: &Scenario,
    streams: &[EventStream],
    report: &RunReport,
) -> anyhow::Result<()> {
    fs::create_dir_all(dir)?;
    write_event_files(
        &dir.join("events.csv"),
        &dir.join("events.meta.json"),
        streams,
        scenario.period(),
        Some(report.model_order),
    )?;
    write_json(&dir.join("report.json"), report)?;
    write_signal_table(&dir.join("signal.csv"), scenario, &report.reports)?;
    write_raster(&dir.join("raster.csv"), streams)?;
    write_stems(&dir.join("stems.csv"), scenario, &report.reports)?;
    Ok(())
}
