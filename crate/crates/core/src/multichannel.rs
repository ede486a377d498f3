//! Multichannel reconstruction.
//!
//! SIMO: several encoders with distinct thresholds watch the same filtered
//! signal; their amplitude samples are pooled into one Fourier fit.
//! MIMO: each channel sees its own signal, all sharing one support set; a
//! single annihilating filter is fitted to every channel at once.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::encoder::{dynamic_range, t_transform, Encoder, EventStream};
use crate::error::{FriError, Result};
use crate::linalg::smallest_right_singular_vector;
use crate::par::Execution;
use crate::prony::{
    annihilating_filter, annihilation_matrix, filter_from_system, recover_coefficients_many,
    supports_from_roots, AnnihilatingFilter,
};
use crate::recon::{
    assemble, exponential_sequence, fourier_from_events, fourier_from_samples,
    reconstruct_from_estimate, FourierEstimate, ModelSpec, ReconstructionReport, Tail,
};
use crate::signal_model::{FourierVector, Waveform};

/// Trigger times closer than this across channels are treated as one sample.
pub const DEDUP_RESOLUTION: f64 = 1e-12;

/// Block residual (relative to the channel norm) above which channels are
/// judged not to share a support set.
const COMMON_SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BankConfig {
    Simo,
    Mimo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBank {
    config: BankConfig,
    streams: Vec<EventStream>,
}

impl ChannelBank {
    /// Channel numbers must be unique; SIMO banks also require pairwise-distinct
    /// thresholds.
    pub fn new(config: BankConfig, streams: Vec<EventStream>) -> Result<Self> {
        if streams.is_empty() {
            return Err(FriError::InvalidArgument(
                "a channel bank needs at least one stream".into(),
            ));
        }
        for (i, s) in streams.iter().enumerate() {
            s.validate()?;
            if streams[..i].iter().any(|o| o.channel == s.channel) {
                return Err(FriError::InvalidArgument(format!(
                    "channel {} appears twice",
                    s.channel
                )));
            }
        }
        if config == BankConfig::Simo {
            for i in 0..streams.len() {
                for j in i + 1..streams.len() {
                    if streams[i].threshold == streams[j].threshold {
                        return Err(FriError::DuplicateThresholds {
                            first: streams[i].channel,
                            second: streams[j].channel,
                            value: streams[i].threshold,
                        });
                    }
                }
            }
        }
        Ok(Self { config, streams })
    }

    pub fn config(&self) -> BankConfig {
        self.config
    }

    pub fn channels(&self) -> usize {
        self.streams.len()
    }

    pub fn streams(&self) -> &[EventStream] {
        &self.streams
    }

    pub fn thresholds(&self) -> Vec<f64> {
        self.streams.iter().map(|s| s.threshold).collect()
    }

    pub fn event_counts(&self) -> Vec<usize> {
        self.streams.iter().map(|s| s.len()).collect()
    }

    pub fn into_streams(self) -> Vec<EventStream> {
        self.streams
    }
}

/// Encodes one waveform per channel with a shared encoder template. Channels
/// are numbered from 1.
pub fn encode_channels<W: Waveform>(
    signals: &[&W],
    thresholds: &[f64],
    template: &Encoder,
    exec: Execution,
) -> Result<Vec<EventStream>> {
    if signals.len() != thresholds.len() {
        return Err(FriError::InvalidArgument(format!(
            "{} signals for {} thresholds",
            signals.len(),
            thresholds.len()
        )));
    }
    exec.map_tasks(signals.len(), |i| {
        let enc = Encoder {
            threshold: thresholds[i],
            channel: i + 1,
            ..*template
        };
        enc.encode(signals[i])
    })
    .into_iter()
    .collect()
}

/// Pooled `(t, f)` samples sorted by time, ties broken by channel number. A
/// sample within [`DEDUP_RESOLUTION`] of one already kept from another
/// channel is dropped, so the result does not depend on stream order.
pub fn pooled_samples(bank: &ChannelBank) -> Vec<(f64, f64)> {
    let mut rows: Vec<(f64, f64, usize)> = bank
        .streams
        .iter()
        .flat_map(|s| {
            t_transform(s)
                .into_iter()
                .map(move |(t, f)| (t, f, s.channel))
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    let mut kept: Vec<(f64, f64, usize)> = Vec::with_capacity(rows.len());
    for row in rows {
        if let Some(last) = kept.last() {
            if last.2 != row.2 && row.0 - last.0 <= DEDUP_RESOLUTION {
                continue;
            }
        }
        kept.push(row);
    }
    kept.into_iter().map(|(t, f, _)| (t, f)).collect()
}

/// Joint single-signal reconstruction from all channels of a SIMO bank.
pub fn simo_reconstruct(
    bank: &ChannelBank,
    model: &ModelSpec,
    period: f64,
) -> Result<ReconstructionReport> {
    if bank.config != BankConfig::Simo {
        return Err(FriError::InvalidArgument(
            "simo_reconstruct needs a SIMO bank".into(),
        ));
    }
    let samples = pooled_samples(bank);
    let required = 2 * model.model_order + 1;
    if samples.len() < required {
        return Err(FriError::InsufficientTotalEvents {
            found: samples.len(),
            required,
        });
    }
    let estimate = fourier_from_samples(&samples, model.model_order, period)?;
    reconstruct_from_estimate(&estimate, model, samples.len())
}

/// Open interval `(0, Q (f_max - f_min) / (2K + 1))` for SIMO thresholds.
pub fn simo_threshold_bounds<W: Waveform + ?Sized>(
    f: &W,
    period: f64,
    channels: usize,
    model_order: usize,
) -> Result<(f64, f64)> {
    if channels == 0 || model_order == 0 {
        return Err(FriError::InvalidArgument("need Q >= 1 and K >= 1".into()));
    }
    let range = dynamic_range(f, period).range();
    if range < 1e-12 {
        return Err(FriError::DegenerateSignal { range });
    }
    Ok((0.0, channels as f64 * range / (2 * model_order + 1) as f64))
}

/// Default distinct thresholds `bound * (0.9 - 0.05 i)` for `i = 1..=Q`.
pub fn simo_thresholds(bound: f64, channels: usize) -> Result<Vec<f64>> {
    if channels == 0 || channels > 17 {
        return Err(FriError::InvalidArgument(format!(
            "the default rule supports 1 to 17 channels, got {channels}"
        )));
    }
    Ok((1..=channels)
        .map(|i| bound * (0.9 - 0.05 * i as f64))
        .collect())
}

/// Thresholds chosen by [`subrate_thresholds`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubrateChoice {
    pub thresholds: Vec<f64>,
    pub counts: Vec<usize>,
    /// Condition number of the pooled event-time system.
    pub condition: f64,
}

/// Searches thresholds strictly inside the SIMO bound so that every channel
/// alone records fewer than `2K + 1` events while the bank as a whole
/// records at least `2K + 1`.
///
/// Candidates are `bound * j / steps`. All but the last two channels take
/// the candidates with the most events; the last pair is chosen
/// exhaustively to minimise the condition number of the pooled system.
/// Returns `None` when no candidate set qualifies.
pub fn subrate_thresholds<W: Waveform + ?Sized>(
    f: &W,
    template: &Encoder,
    channels: usize,
    model_order: usize,
    steps: usize,
) -> Result<Option<SubrateChoice>> {
    if channels < 2 {
        return Err(FriError::InvalidArgument(
            "sub-rate sampling needs at least two channels".into(),
        ));
    }
    let (_, bound) = simo_threshold_bounds(f, template.period, channels, model_order)?;
    let required = 2 * model_order + 1;
    let candidates: Vec<f64> = (1..steps)
        .map(|j| bound * j as f64 / steps as f64)
        .collect();
    let streams: Vec<Result<EventStream>> = template.execution.map_slice(&candidates, |&c| {
        Encoder {
            threshold: c,
            execution: Execution::Sequential,
            ..*template
        }
        .encode(f)
    });
    let mut usable: Vec<EventStream> = Vec::new();
    for s in streams {
        let s = s?;
        if s.len() < required {
            usable.push(s);
        }
    }
    // most events first; larger thresholds break ties
    usable.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(b.threshold.total_cmp(&a.threshold))
    });
    if usable.len() < channels {
        return Ok(None);
    }
    let fixed = &usable[..channels - 2];
    let rest = &usable[channels - 2..];
    let fixed_count: usize = fixed.iter().map(|s| s.len()).sum();

    let pairs: Vec<(usize, usize)> = (0..rest.len())
        .flat_map(|i| (i + 1..rest.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| fixed_count + rest[i].len() + rest[j].len() >= required)
        .collect();
    let conds: Vec<f64> = template.execution.map_slice(&pairs, |&(i, j)| {
        let mut set: Vec<EventStream> = fixed.to_vec();
        set.push(rest[i].clone());
        set.push(rest[j].clone());
        pooled_condition(set, model_order, template.period)
    });
    let best = pairs
        .iter()
        .zip(&conds)
        .filter(|(_, c)| c.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1));
    Ok(best.map(|(&(i, j), &condition)| {
        let chosen: Vec<&EventStream> = fixed.iter().chain([&rest[i], &rest[j]]).collect();
        SubrateChoice {
            thresholds: chosen.iter().map(|s| s.threshold).collect(),
            counts: chosen.iter().map(|s| s.len()).collect(),
            condition,
        }
    }))
}

fn pooled_condition(mut set: Vec<EventStream>, model_order: usize, period: f64) -> f64 {
    for (i, s) in set.iter_mut().enumerate() {
        s.channel = i + 1;
    }
    let Ok(bank) = ChannelBank::new(BankConfig::Simo, set) else {
        return f64::INFINITY;
    };
    let times: Vec<f64> = pooled_samples(&bank).iter().map(|r| r.0).collect();
    if times.len() < 2 * model_order + 1 {
        return f64::INFINITY;
    }
    crate::recon::build_g(&times, model_order, period)
        .map(|g| g.condition_number())
        .unwrap_or(f64::INFINITY)
}

fn block_residual(
    block: &DMatrix<crate::signal_model::C64>,
    h: &nalgebra::DVector<crate::signal_model::C64>,
    scale: f64,
) -> f64 {
    (block * h).norm() / scale.max(f64::MIN_POSITIVE)
}

/// Common annihilating filter of several exponential-sum sequences sharing
/// their roots. The sequences may have independent amplitudes.
pub fn mimo_block_annihilate(
    sequences: &[FourierVector],
    model_order: usize,
) -> Result<AnnihilatingFilter> {
    if sequences.is_empty() {
        return Err(FriError::InvalidArgument(
            "no channels to annihilate".into(),
        ));
    }
    let blocks: Vec<DMatrix<_>> = sequences
        .iter()
        .map(|y| annihilation_matrix(y, model_order))
        .collect::<Result<_>>()?;
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut stacked = DMatrix::zeros(rows, model_order + 1);
    let mut at = 0;
    for b in &blocks {
        stacked.view_mut((at, 0), b.shape()).copy_from(b);
        at += b.nrows();
    }

    let (h, _) = smallest_right_singular_vector(&stacked);
    let (worst, residual) = blocks
        .iter()
        .zip(sequences)
        .map(|(b, y)| block_residual(b, &h, y.norm()))
        .enumerate()
        .fold(
            (0, 0.0f64),
            |acc, (i, r)| if r > acc.1 { (i, r) } else { acc },
        );
    if residual > COMMON_SUPPORT_TOL
        && sequences
            .iter()
            .all(|y| annihilating_filter(y, model_order).is_ok())
    {
        return Err(FriError::NoCommonSupport {
            channel: worst + 1,
            residual,
        });
    }
    filter_from_system(&stacked, model_order)
}

/// Per-channel reports sharing one support estimate.
pub fn mimo_reconstruct(
    bank: &ChannelBank,
    model: &ModelSpec,
    period: f64,
) -> Result<Vec<ReconstructionReport>> {
    if bank.config != BankConfig::Mimo {
        return Err(FriError::InvalidArgument(
            "mimo_reconstruct needs a MIMO bank".into(),
        ));
    }
    let estimates: Vec<FourierEstimate> = Execution::default()
        .map_slice(&bank.streams, |s| {
            fourier_from_events(s, model.model_order, period)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let sequences: Vec<FourierVector> = estimates
        .iter()
        .map(|e| exponential_sequence(&e.fourier, model.kind))
        .collect::<Result<_>>()?;
    let filter = mimo_block_annihilate(&sequences, model.model_order)?;
    let supports = supports_from_roots(&filter.roots, period);
    let fourier: Vec<FourierVector> = estimates.iter().map(|e| e.fourier.clone()).collect();
    let fits = recover_coefficients_many(&fourier, &supports, |l| {
        model.kind.spectral_weight(l, period)
    })?;
    Ok(estimates
        .iter()
        .zip(fits)
        .zip(&sequences)
        .zip(&bank.streams)
        .map(|(((est, fit), y), s)| {
            let tail = Tail {
                kind: model.kind,
                supports: supports.clone(),
                annihilation_residual: filter.convolution_residual(y) / y.norm(),
                filter: filter.clone(),
            };
            assemble(est, &tail, fit, s.len())
        })
        .collect())
}
