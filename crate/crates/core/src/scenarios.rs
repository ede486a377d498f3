//! Ready-made experiment set-ups: a signal (or one per channel), a sampling
//! kernel and encoder thresholds.
//!
//! Randomised set-ups draw from a seeded stream and keep the first draw whose
//! configuration is usable. Usability is judged only from quantities the
//! experimenter can observe (event counts and the conditioning diagnostics of
//! the reconstruction report), never from the ground truth.

use serde::{Deserialize, Serialize};

use crate::encoder::{max_threshold_for, Encoder, EventStream};
use crate::error::{FriError, Result};
use crate::kernels::SamplingKernel;
use crate::multichannel::{
    encode_channels, mimo_reconstruct, simo_reconstruct, simo_threshold_bounds, simo_thresholds,
    subrate_thresholds, BankConfig, ChannelBank,
};
use crate::recon::{reconstruct, ModelSpec, ReconstructionReport};
use crate::signal_model::{FilteredSignal, FriSignal, Pulse, SignalKind};
use crate::synth::{
    common_support_signals, random_signal, trial_rng, AmplitudeLaw, RandomSignalSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Configuration {
    Single,
    Simo,
    Mimo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub configuration: Configuration,
    pub kernel: SamplingKernel,
    /// One signal for single and SIMO set-ups, one per channel for MIMO.
    pub signals: Vec<FriSignal>,
    /// One threshold per channel.
    pub thresholds: Vec<f64>,
}

/// Events and per-channel reports of one run. Single and SIMO runs yield one
/// report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub streams: Vec<EventStream>,
    pub reports: Vec<ReconstructionReport>,
}

impl Outcome {
    /// Largest ground-truth error over all reports.
    pub fn max_error(&self) -> f64 {
        self.reports
            .iter()
            .map(|r| r.err.unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }
}

impl Scenario {
    pub fn period(&self) -> f64 {
        self.signals[0].period()
    }

    pub fn model(&self) -> ModelSpec {
        ModelSpec::new(self.signals[0].kind(), self.signals[0].model_order())
    }

    pub fn channels(&self) -> usize {
        self.thresholds.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.signals.is_empty() || self.thresholds.is_empty() {
            return Err(FriError::InvalidArgument(
                "a scenario needs a signal and a threshold".into(),
            ));
        }
        let expected = match self.configuration {
            Configuration::Single => (1, 1),
            Configuration::Simo => (1, self.thresholds.len()),
            Configuration::Mimo => (self.thresholds.len(), self.thresholds.len()),
        };
        if (self.signals.len(), self.thresholds.len()) != expected
            || (self.configuration == Configuration::Single && self.thresholds.len() != 1)
        {
            return Err(FriError::InvalidArgument(format!(
                "{:?} set-up with {} signals and {} thresholds",
                self.configuration,
                self.signals.len(),
                self.thresholds.len()
            )));
        }
        let first = &self.signals[0];
        if self.signals.iter().any(|s| {
            s.kind() != first.kind()
                || s.model_order() != first.model_order()
                || s.period() != first.period()
        }) {
            return Err(FriError::InvalidArgument(
                "all channels must share kind, K and T".into(),
            ));
        }
        Ok(())
    }

    pub fn filtered(&self) -> Result<Vec<FilteredSignal>> {
        self.signals
            .iter()
            .map(|s| FilteredSignal::new(s, &self.kernel))
            .collect()
    }

    pub fn encode(&self, template: &Encoder) -> Result<Vec<EventStream>> {
        self.validate()?;
        let filtered = self.filtered()?;
        let template = Encoder {
            period: self.period(),
            horizon: self.period(),
            ..*template
        };
        let refs: Vec<&FilteredSignal> = match self.configuration {
            Configuration::Mimo => filtered.iter().collect(),
            _ => vec![&filtered[0]; self.channels()],
        };
        encode_channels(&refs, &self.thresholds, &template, template.execution)
    }

    /// Decodes recorded streams and scores them against the ground truth.
    pub fn reconstruct(&self, streams: &[EventStream]) -> Result<Vec<ReconstructionReport>> {
        let model = self.model();
        let period = self.period();
        let reports = match self.configuration {
            Configuration::Single => {
                let s = streams
                    .first()
                    .ok_or_else(|| FriError::InvalidArgument("no event stream".into()))?;
                vec![reconstruct(s, &model, period)?]
            }
            Configuration::Simo => {
                let bank = ChannelBank::new(BankConfig::Simo, streams.to_vec())?;
                vec![simo_reconstruct(&bank, &model, period)?]
            }
            Configuration::Mimo => {
                let bank = ChannelBank::new(BankConfig::Mimo, streams.to_vec())?;
                mimo_reconstruct(&bank, &model, period)?
            }
        };
        let truths: Vec<&FriSignal> = match self.configuration {
            Configuration::Mimo => self.signals.iter().collect(),
            _ => vec![&self.signals[0]],
        };
        Ok(reports
            .into_iter()
            .zip(truths)
            .map(|(r, x)| r.with_ground_truth(x))
            .collect())
    }

    pub fn run(&self, template: &Encoder) -> Result<Outcome> {
        let streams = self.encode(template)?;
        let reports = self.reconstruct(&streams)?;
        Ok(Outcome { streams, reports })
    }
}

/// The cubic B-spline pulse compressed ten-fold, `beta3(10 t)`.
pub fn narrow_cubic_pulse() -> Pulse {
    Pulse::ScaledBspline {
        order: 3,
        scale: 0.1,
    }
}

/// The four signal classes used by the multichannel experiments.
pub fn signal_classes() -> [(&'static str, SignalKind); 4] {
    [
        ("dirac", SignalKind::DiracStream),
        (
            "pulse",
            SignalKind::PulseStream {
                pulse: narrow_cubic_pulse(),
            },
        ),
        ("d1", SignalKind::LSpline { degree: 0 }),
        ("d2", SignalKind::LSpline { degree: 1 }),
    ]
}

/// Five unit Diracs equally spaced on `[0.25, 0.75]`, zeroth-order kernel,
/// `C = 1/11`.
pub fn dirac_grid() -> Result<Scenario> {
    let tau = vec![0.25, 0.375, 0.5, 0.625, 0.75];
    Ok(Scenario {
        name: "dirac-grid".into(),
        configuration: Configuration::Single,
        kernel: SamplingKernel::sms(0, 5, 1.0),
        signals: vec![FriSignal::new(
            SignalKind::DiracStream,
            vec![1.0; 5],
            tau,
            1.0,
        )?],
        thresholds: vec![1.0 / 11.0],
    })
}

/// Five narrow cubic B-spline pulses, zeroth-order kernel, `C = 0.015`.
pub fn pulse_example() -> Result<Scenario> {
    let kind = SignalKind::PulseStream {
        pulse: narrow_cubic_pulse(),
    };
    Ok(Scenario {
        name: "pulse-stream".into(),
        configuration: Configuration::Single,
        kernel: SamplingKernel::sms(0, 5, 1.0),
        signals: vec![FriSignal::new(
            kind,
            vec![0.49, -0.65, 0.47, -0.52, 0.22],
            vec![0.22, 0.35, 0.46, 0.62, 0.79],
            1.0,
        )?],
        thresholds: vec![0.015],
    })
}

/// Threshold `fraction * (f_max - f_min) / (2K + 1)` for one channel.
pub fn fraction_of_bound(
    signal: &FriSignal,
    kernel: &SamplingKernel,
    fraction: f64,
) -> Result<f64> {
    let f = FilteredSignal::new(signal, kernel)?;
    Ok(fraction * max_threshold_for(&f, signal.period(), 2 * signal.model_order() + 1)?)
}

/// A random single-channel signal with threshold at `fraction` of the
/// single-channel bound.
pub fn random_single(
    spec: &RandomSignalSpec,
    kernel_order: usize,
    seed: u64,
    fraction: f64,
) -> Result<Scenario> {
    let kernel = SamplingKernel::sms(kernel_order, spec.model_order, spec.period);
    let x = random_signal(&mut trial_rng(seed, 0), spec)?;
    let c = fraction_of_bound(&x, &kernel, fraction)?;
    Ok(Scenario {
        name: format!("single-{seed}"),
        configuration: Configuration::Single,
        kernel,
        signals: vec![x],
        thresholds: vec![c],
    })
}

/// SIMO set-up with the default distinct thresholds `bound (0.9 - 0.05 i)`.
pub fn simo_default(
    spec: &RandomSignalSpec,
    kernel_order: usize,
    channels: usize,
    seed: u64,
) -> Result<Scenario> {
    let kernel = SamplingKernel::sms(kernel_order, spec.model_order, spec.period);
    let x = random_signal(&mut trial_rng(seed, 0), spec)?;
    let f = FilteredSignal::new(&x, &kernel)?;
    let (_, bound) = simo_threshold_bounds(&f, spec.period, channels, spec.model_order)?;
    Ok(Scenario {
        name: format!("simo-{seed}"),
        configuration: Configuration::Simo,
        kernel,
        signals: vec![x],
        thresholds: simo_thresholds(bound, channels)?,
    })
}

/// Candidate grid for the sub-rate threshold search.
const SUBRATE_STEPS: usize = 100;
/// The search counts events on a grid this much coarser than the final
/// encoder; the final streams are checked again.
const SEARCH_COARSENING: usize = 10;

fn is_subrate(streams: &[EventStream], required: usize) -> bool {
    streams.iter().all(|s| s.len() < required)
        && streams.iter().map(|s| s.len()).sum::<usize>() >= required
}

/// SIMO set-up in which every channel alone is below the single-channel
/// event requirement while the bank meets it. Tries up to `max_draws`
/// signals from `seed` and keeps the first whose joint reconstruction is
/// not flagged ill-conditioned.
pub fn subrate_simo(
    spec: &RandomSignalSpec,
    kernel_order: usize,
    channels: usize,
    seed: u64,
    template: &Encoder,
    max_draws: u64,
) -> Result<Scenario> {
    let kernel = SamplingKernel::sms(kernel_order, spec.model_order, spec.period);
    let required = 2 * spec.model_order + 1;
    let template = Encoder {
        period: spec.period,
        horizon: spec.period,
        ..*template
    };
    let coarse = Encoder {
        grid_density: (template.grid_density / SEARCH_COARSENING).max(1000),
        ..template
    };
    for draw in 0..max_draws {
        let x = random_signal(&mut trial_rng(seed, draw), spec)?;
        let f = FilteredSignal::new(&x, &kernel)?;
        let Some(choice) =
            subrate_thresholds(&f, &coarse, channels, spec.model_order, SUBRATE_STEPS)?
        else {
            continue;
        };
        let scenario = Scenario {
            name: format!("simo-subrate-{seed}-{draw}"),
            configuration: Configuration::Simo,
            kernel,
            signals: vec![x],
            thresholds: choice.thresholds,
        };
        let streams = scenario.encode(&template)?;
        if !is_subrate(&streams, required) {
            continue;
        }
        let bank = ChannelBank::new(BankConfig::Simo, streams)?;
        match simo_reconstruct(&bank, &scenario.model(), spec.period) {
            Ok(r) if !r.ill_conditioned => return Ok(scenario),
            _ => continue,
        }
    }
    Err(FriError::InvalidArgument(format!(
        "no well-conditioned sub-rate configuration in {max_draws} draws"
    )))
}

/// MIMO set-up: `channels` signals sharing supports, thresholds at
/// `fraction` of each channel's bound. Keeps the first of up to `max_draws`
/// draws whose reports are all well-conditioned.
pub fn common_support_mimo(
    spec: &RandomSignalSpec,
    kernel_order: usize,
    channels: usize,
    seed: u64,
    fraction: f64,
    template: &Encoder,
    max_draws: u64,
) -> Result<Scenario> {
    let kernel = SamplingKernel::sms(kernel_order, spec.model_order, spec.period);
    for draw in 0..max_draws {
        let signals = common_support_signals(&mut trial_rng(seed, draw), spec, channels)?;
        let thresholds = signals
            .iter()
            .map(|x| fraction_of_bound(x, &kernel, fraction))
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario {
            name: format!("mimo-{seed}-{draw}"),
            configuration: Configuration::Mimo,
            kernel,
            signals,
            thresholds,
        };
        let streams = scenario.encode(template)?;
        let bank = ChannelBank::new(BankConfig::Mimo, streams)?;
        match mimo_reconstruct(&bank, &scenario.model(), spec.period) {
            Ok(rs) if rs.iter().all(|r| !r.ill_conditioned) => return Ok(scenario),
            _ => continue,
        }
    }
    Err(FriError::InvalidArgument(format!(
        "no well-conditioned common-support draw in {max_draws} attempts"
    )))
}

/// Generator settings for the multichannel experiments: uniform supports
/// at least `T/50` apart and standard-normal amplitudes.
pub fn multichannel_spec(kind: SignalKind, model_order: usize) -> RandomSignalSpec {
    RandomSignalSpec::new(kind, model_order, 1.0).with_amplitudes(AmplitudeLaw::StandardNormal)
}
