//! Event files and result files.
//!
//! Events are stored as CSV with header `channel,t,p`, one row per event,
//! times written with 15 significant digits. Per-channel side information
//! (threshold, start time, start value, window) lives in a JSON sidecar.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::encoder::{Event, EventStream};
use crate::error::{FriError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMeta {
    pub channel: usize,
    #[serde(rename = "C")]
    pub threshold: f64,
    pub t0: f64,
    pub f0: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventMeta {
    #[serde(rename = "T")]
    pub period: f64,
    #[serde(rename = "K")]
    pub model_order: Option<usize>,
    pub channels: Vec<ChannelMeta>,
}

impl EventMeta {
    pub fn describe(streams: &[EventStream], period: f64, model_order: Option<usize>) -> Self {
        Self {
            period,
            model_order,
            channels: streams
                .iter()
                .map(|s| ChannelMeta {
                    channel: s.channel,
                    threshold: s.threshold,
                    t0: s.t0,
                    f0: s.f0,
                    horizon: s.horizon,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    channel: usize,
    t: String,
    p: i8,
}

pub fn format_time(t: f64) -> String {
    format!("{t:.14e}")
}

pub fn write_events_csv<W: Write>(out: W, streams: &[EventStream]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for s in streams {
        for e in &s.events {
            w.serialize(Row {
                channel: s.channel,
                t: format_time(e.t),
                p: e.polarity,
            })?;
        }
    }
    // header even when there are no events
    if streams.iter().all(|s| s.events.is_empty()) {
        w.write_record(["channel", "t", "p"])?;
    }
    w.flush()?;
    Ok(())
}

/// Rows as `(channel, event)` in file order.
pub fn read_events_csv<R: Read>(input: R) -> Result<Vec<(usize, Event)>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["channel", "t", "p"] {
        return Err(FriError::Format(format!(
            "expected header channel,t,p, found {headers:?}"
        )));
    }
    r.deserialize::<Row>()
        .map(|row| {
            let row = row?;
            let t: f64 = row
                .t
                .trim()
                .parse()
                .map_err(|_| FriError::Format(format!("bad event time {:?}", row.t)))?;
            Ok((row.channel, Event { t, polarity: row.p }))
        })
        .collect()
}

/// Reassembles streams from CSV rows and sidecar metadata, in sidecar order.
pub fn assemble_streams(rows: Vec<(usize, Event)>, meta: &EventMeta) -> Result<Vec<EventStream>> {
    let mut streams: Vec<EventStream> = meta
        .channels
        .iter()
        .map(|c| EventStream {
            channel: c.channel,
            threshold: c.threshold,
            t0: c.t0,
            f0: c.f0,
            horizon: c.horizon,
            events: Vec::new(),
        })
        .collect();
    for (channel, event) in rows {
        let s = streams
            .iter_mut()
            .find(|s| s.channel == channel)
            .ok_or_else(|| {
                FriError::Format(format!("event for channel {channel} missing from metadata"))
            })?;
        s.events.push(event);
    }
    for s in &streams {
        s.validate()?;
    }
    Ok(streams)
}

pub fn write_event_files(
    csv_path: &Path,
    meta_path: &Path,
    streams: &[EventStream],
    period: f64,
    model_order: Option<usize>,
) -> Result<()> {
    write_events_csv(BufWriter::new(File::create(csv_path)?), streams)?;
    write_json(
        meta_path,
        &EventMeta::describe(streams, period, model_order),
    )
}

pub fn read_event_files(
    csv_path: &Path,
    meta_path: &Path,
) -> Result<(Vec<EventStream>, EventMeta)> {
    let meta: EventMeta = read_json(meta_path)?;
    let rows = read_events_csv(BufReader::new(File::open(csv_path)?))?;
    Ok((assemble_streams(rows, &meta)?, meta))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}
