//! Neuromorphic (send-on-delta) encoder and its decoder-side helpers.
//!
//! An event is emitted at the first instant the signal has moved by the
//! threshold `C` from its value at the previous event. The encoder tracks the
//! reference level as `f(t0) + C * (sum of polarities)`, the same expression the
//! t-transform uses, so the decoder recovers the amplitudes bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{FriError, Result};
use crate::par::Execution;
use crate::scan::{bisect_first, golden_extremum, Grid};
use crate::signal_model::Waveform;

/// Grid points per period used to bracket crossings.
pub const DEFAULT_ENCODER_DENSITY: usize = 100_000;
/// Grid points per period used to locate the signal extrema.
pub const DEFAULT_EXTREMA_DENSITY: usize = 10_000;

const EXTREMUM_TOL: f64 = 1e-12;
const RANGE_TOL: f64 = 1e-10;
const DEGENERATE_RANGE: f64 = 1e-12;
const TOUCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub polarity: i8,
}

/// Events of one encoder channel plus the side information the decoder needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventStream {
    pub channel: usize,
    pub threshold: f64,
    pub t0: f64,
    pub f0: f64,
    /// End of the measurement window (the period `T` by default).
    pub horizon: f64,
    pub events: Vec<Event>,
}

impl EventStream {
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.t).collect()
    }

    /// Checks ordering, polarity values and the threshold sign.
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(FriError::InvalidArgument(format!(
                "threshold {} must be positive",
                self.threshold
            )));
        }
        let mut prev = self.t0;
        for (i, e) in self.events.iter().enumerate() {
            if e.polarity != 1 && e.polarity != -1 {
                return Err(FriError::Format(format!(
                    "event {i} has polarity {}",
                    e.polarity
                )));
            }
            if !(e.t > prev) {
                return Err(FriError::DuplicateTimes { index: i });
            }
            prev = e.t;
        }
        Ok(())
    }
}

/// Rounds a time stamp to 15 significant digits, the resolution of the event
/// file format. Such values survive a text round trip unchanged.
pub fn quantize_time(t: f64) -> f64 {
    format!("{t:.14e}").parse().expect("formatted float parses")
}

/// Threshold-crossing encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Encoder {
    pub threshold: f64,
    pub period: f64,
    pub t0: f64,
    /// Window end; defaults to `period`. Events at or after it are dropped.
    pub horizon: f64,
    pub grid_density: usize,
    pub channel: usize,
    pub execution: Execution,
}

impl Encoder {
    pub fn new(threshold: f64, period: f64) -> Self {
        Self {
            threshold,
            period,
            t0: 0.0,
            horizon: period,
            grid_density: DEFAULT_ENCODER_DENSITY,
            channel: 0,
            execution: Execution::default(),
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_grid_density(mut self, density: usize) -> Self {
        self.grid_density = density;
        self
    }

    pub fn with_channel(mut self, channel: usize) -> Self {
        self.channel = channel;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn encode<W: Waveform + ?Sized>(&self, f: &W) -> Result<EventStream> {
        let c = self.threshold;
        if !(c > 0.0 && c.is_finite()) {
            return Err(FriError::InvalidArgument(format!(
                "threshold {c} must be positive"
            )));
        }
        if !(self.period > 0.0) || !(self.horizon > self.t0) {
            return Err(FriError::InvalidArgument("empty measurement window".into()));
        }
        if self.grid_density < 2 {
            return Err(FriError::InvalidArgument(
                "grid density must be at least 2".into(),
            ));
        }
        let span = self.horizon - self.t0;
        let cells = ((span / self.period) * self.grid_density as f64).ceil() as usize;
        let grid = Grid::sample(f, self.t0, self.horizon, cells, self.execution);

        // Split the window at refined extrema so that f is monotone on each piece.
        let mut breaks: Vec<(f64, f64)> = vec![(grid.times[0], grid.values[0])];
        for (i, is_max) in grid.local_extrema() {
            let (t, v) = golden_extremum(
                f,
                grid.times[i - 1],
                grid.times[i + 1],
                is_max,
                EXTREMUM_TOL,
            );
            let (t, v) = if (is_max && grid.values[i] > v) || (!is_max && grid.values[i] < v) {
                (grid.times[i], grid.values[i])
            } else {
                (t, v)
            };
            if t > breaks.last().unwrap().0 {
                breaks.push((t, v));
            }
        }
        let end = *grid.times.last().unwrap();
        if end > breaks.last().unwrap().0 {
            breaks.push((end, *grid.values.last().unwrap()));
        }

        let f0 = grid.values[0];
        let mut level_index: i64 = 0;
        let mut events = Vec::new();
        let mut last_t = self.t0;
        'pieces: for piece in breaks.windows(2) {
            let (mut u, mut fu) = piece[0];
            let (v, fv) = piece[1];
            if u < last_t {
                u = last_t;
                fu = f.value(u);
            }
            let dir: i64 = if fv >= fu { 1 } else { -1 };
            loop {
                let target = f0 + c * (level_index + dir) as f64;
                let dirf = dir as f64;
                // grazing the level within round-off still counts as a crossing
                if dirf * (fv - target) < -TOUCH_TOL * (1.0 + target.abs()) {
                    break;
                }
                let reached = |t: f64| dirf * (f.value(t) - target) >= 0.0;
                let mut t_hit = quantize_time(bisect_first(u, v, reached));
                if t_hit <= last_t {
                    t_hit = next_up(last_t);
                }
                if t_hit >= self.horizon {
                    break 'pieces;
                }
                events.push(Event {
                    t: t_hit,
                    polarity: dir as i8,
                });
                level_index += dir;
                last_t = t_hit;
                u = t_hit;
            }
        }

        Ok(EventStream {
            channel: self.channel,
            threshold: c,
            t0: self.t0,
            f0,
            horizon: self.horizon,
            events,
        })
    }
}

fn next_up(t: f64) -> f64 {
    let mut q = quantize_time(t);
    let mut step = t.abs().max(1e-300) * 1e-15;
    while q <= t {
        q = quantize_time(t + step);
        step *= 2.0;
    }
    q
}

/// Amplitude samples `f(t_m) = f(t0) + C * sum_{i<=m} p_i`.
pub fn t_transform(stream: &EventStream) -> Vec<(f64, f64)> {
    let mut level: i64 = 0;
    stream
        .events
        .iter()
        .map(|e| {
            level += e.polarity as i64;
            (e.t, stream.f0 + stream.threshold * level as f64)
        })
        .collect()
}

/// Largest gap between consecutive time points, counting `t0` as the first.
pub fn sampling_density(stream: &EventStream) -> Result<f64> {
    if stream.events.is_empty() {
        return Err(FriError::TooFewEvents { found: 1 });
    }
    let mut prev = stream.t0;
    let mut widest = 0.0f64;
    for e in &stream.events {
        widest = widest.max(e.t - prev);
        prev = e.t;
    }
    Ok(widest)
}

/// Global extrema of a waveform over a window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
}

impl Extrema {
    pub fn range(&self) -> f64 {
        self.max - self.min
    }
}

/// Extrema over `[start, end]` by a dense scan (`density` points per
/// `period`) refined with golden-section search.
pub fn find_extrema<W: Waveform + ?Sized>(
    f: &W,
    start: f64,
    end: f64,
    period: f64,
    density: usize,
    exec: Execution,
) -> Extrema {
    let cells = (((end - start) / period) * density as f64).ceil() as usize;
    let grid = Grid::sample(f, start, end, cells, exec);
    let (mut min, mut argmin, mut max, mut argmax) =
        (f64::INFINITY, start, f64::NEG_INFINITY, start);
    for (&t, &v) in grid.times.iter().zip(&grid.values) {
        if v < min {
            min = v;
            argmin = t;
        }
        if v > max {
            max = v;
            argmax = t;
        }
    }
    for (i, is_max) in grid.local_extrema() {
        let (t, v) = golden_extremum(f, grid.times[i - 1], grid.times[i + 1], is_max, RANGE_TOL);
        if is_max && v > max {
            max = v;
            argmax = t;
        }
        if !is_max && v < min {
            min = v;
            argmin = t;
        }
    }
    Extrema {
        min,
        argmin,
        max,
        argmax,
    }
}

/// Extrema over one period `[0, T]` at the default scan density.
pub fn dynamic_range<W: Waveform + ?Sized>(f: &W, period: f64) -> Extrema {
    find_extrema(
        f,
        0.0,
        period,
        period,
        DEFAULT_EXTREMA_DENSITY,
        Execution::default(),
    )
}

fn checked_range<W: Waveform + ?Sized>(f: &W, period: f64) -> Result<f64> {
    let range = dynamic_range(f, period).range();
    if range < DEGENERATE_RANGE {
        return Err(FriError::DegenerateSignal { range });
    }
    Ok(range)
}

/// `(f_max - f_min) / L`: every threshold strictly below this yields at
/// least `L` events over the period.
pub fn max_threshold_for<W: Waveform + ?Sized>(
    f: &W,
    period: f64,
    min_events: usize,
) -> Result<f64> {
    if min_events == 0 {
        return Err(FriError::InvalidArgument("L must be positive".into()));
    }
    Ok(checked_range(f, period)? / min_events as f64)
}

/// `(f_max - f_min) / (rho + 1)` for rate of innovation `rho`.
pub fn critical_threshold<W: Waveform + ?Sized>(
    f: &W,
    period: f64,
    rate_of_innovation: f64,
) -> Result<f64> {
    if !(rate_of_innovation > 0.0) {
        return Err(FriError::InvalidArgument(
            "rate of innovation must be positive".into(),
        ));
    }
    Ok(checked_range(f, period)? / (rate_of_innovation + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn stream(t0: f64, times: &[f64], pols: &[i8]) -> EventStream {
        EventStream {
            channel: 0,
            threshold: 0.5,
            t0,
            f0: 1.0,
            horizon: 1.0,
            events: times
                .iter()
                .zip(pols)
                .map(|(&t, &p)| Event { t, polarity: p })
                .collect(),
        }
    }

    #[test]
    fn constant_signal_has_no_events() {
        let s = Encoder::new(0.1, 1.0).encode(&|_t: f64| 3.0).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.f0, 3.0);
    }

    #[test]
    fn ramp_events_exclude_period_end() {
        let s = Encoder::new(0.25, 1.0).encode(&|t: f64| t).unwrap();
        let times = s.times();
        assert_eq!(times.len(), 3);
        for (t, want) in times.iter().zip([0.25, 0.5, 0.75]) {
            assert!((t - want).abs() < 1e-14);
        }
        assert!(s.events.iter().all(|e| e.polarity == 1));
        // a window that extends past 1.0 catches the fourth crossing
        let s = Encoder::new(0.25, 1.0)
            .with_horizon(1.01)
            .encode(&|t: f64| t)
            .unwrap();
        assert_eq!(s.len(), 4);
    }

    #[test]
    fn tangent_touch_counts_as_event() {
        // extrema exactly one threshold away from the current level
        let f = |t: f64| (2.0 * PI * t).sin();
        let s = Encoder::new(1.0, 1.0).encode(&f).unwrap();
        let pols: Vec<i8> = s.events.iter().map(|e| e.polarity).collect();
        assert_eq!(pols, vec![1, -1, -1]);
        for (e, want) in s.events.iter().zip([0.25, 0.5, 0.75]) {
            assert!((e.t - want).abs() < 1e-5);
        }
    }

    #[test]
    fn sine_events_alternate_levels() {
        let f = |t: f64| (2.0 * PI * t).sin();
        let s = Encoder::new(0.3, 1.0).encode(&f).unwrap();
        let samples = t_transform(&s);
        for (t, v) in samples {
            assert!((f(t) - v).abs() < 1e-10);
        }
        s.validate().unwrap();
    }

    #[test]
    fn t_transform_monotone_and_alternating() {
        let s = stream(0.0, &[0.1, 0.2, 0.3], &[1, 1, 1]);
        let v = t_transform(&s);
        assert_eq!(v[2].1, 1.0 + 3.0 * 0.5);
        let s = stream(0.0, &[0.1, 0.2, 0.3, 0.4], &[1, -1, 1, -1]);
        let v = t_transform(&s);
        assert_eq!(v[1].1, 1.0);
        assert_eq!(v[3].1, 1.0);
    }

    #[test]
    fn sampling_density_is_widest_gap() {
        assert!(
            (sampling_density(&stream(0.0, &[0.1, 0.2, 0.5], &[1, 1, 1])).unwrap() - 0.3).abs()
                < 1e-15
        );
        let uniform: Vec<f64> = (1..10).map(|i| i as f64 * 0.1).collect();
        let d = sampling_density(&stream(0.0, &uniform, &[1; 9])).unwrap();
        assert!((d - 0.1).abs() < 1e-12);
        assert_eq!(
            sampling_density(&stream(0.0, &[], &[])),
            Err(FriError::TooFewEvents { found: 1 })
        );
    }

    #[test]
    fn threshold_bounds_for_sine() {
        let f = |t: f64| (2.0 * PI * t).sin();
        assert!((max_threshold_for(&f, 1.0, 4).unwrap() - 0.5).abs() < 1e-12);
        assert!((critical_threshold(&f, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(
            max_threshold_for(&|_t: f64| 2.0, 1.0, 3),
            Err(FriError::DegenerateSignal { .. })
        ));
    }

    #[test]
    fn quantized_times_round_trip_through_text() {
        for t in [0.1, 1.0 / 3.0, 0.987_654_321_012_345_6, 1e-7 * PI] {
            let q = quantize_time(t);
            let back: f64 = format!("{q:.14e}").parse().unwrap();
            assert_eq!(back.to_bits(), q.to_bits());
            assert!((q - t).abs() <= 1e-14 * t.abs());
        }
    }

    #[test]
    fn validate_rejects_disorder() {
        assert_eq!(
            stream(0.0, &[0.1, 0.1], &[1, 1]).validate(),
            Err(FriError::DuplicateTimes { index: 1 })
        );
        assert!(stream(0.0, &[0.1], &[2]).validate().is_err());
    }
}
