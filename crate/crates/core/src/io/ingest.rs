//! Joining recorded per-RSU RSS streams with a position track.
//!
//! Each track record is matched against every stream independently: the RSS
//! record nearest in time is taken if it lies within the tolerance (ties go
//! to the earlier record). A sample is emitted only when all streams match;
//! nothing is interpolated or imputed.
//!
//! Positions must already be in a local planar frame in meters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{parse_f64, read_text};
use crate::channel::{Dataset, Deployment, LabeledSample, Position};
use crate::error::{invalid, Error, Result};

/// Half the period of 1 Hz logging.
pub const DEFAULT_TOLERANCE_S: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct RssStream {
    pub rsu_id: usize,
    /// `(timestamp_s, rss_dbm)`, strictly increasing in time.
    pub records: Vec<(f64, f64)>,
}

impl RssStream {
    pub fn new(rsu_id: usize, records: Vec<(f64, f64)>) -> Result<Self> {
        check_increasing(records.iter().map(|r| r.0))?;
        Ok(Self { rsu_id, records })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackRecord {
    pub timestamp_s: f64,
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpsTrack {
    pub records: Vec<TrackRecord>,
}

impl GpsTrack {
    pub fn new(records: Vec<TrackRecord>) -> Result<Self> {
        check_increasing(records.iter().map(|r| r.timestamp_s))?;
        Ok(Self { records })
    }
}

fn check_increasing(ts: impl Iterator<Item = f64>) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (i, t) in ts.enumerate() {
        if !t.is_finite() {
            return Err(invalid(format!("record {i}: timestamp is not finite")));
        }
        if t <= prev {
            return Err(invalid(format!(
                "record {i}: timestamp {t} does not increase (previous {prev})"
            )));
        }
        prev = t;
    }
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JoinStats {
    pub track_records: usize,
    pub emitted: usize,
    /// Track records dropped because at least one stream had no match.
    pub dropped: usize,
    /// Per stream: track records for which that stream had no record within tolerance.
    pub unmatched_per_stream: Vec<usize>,
    /// Per stream: number of track records it matched.
    pub matched_per_stream: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct JoinOutput {
    pub dataset: Dataset,
    pub stats: JoinStats,
}

/// Index of the record nearest to `t` within `tolerance`; ties pick the earlier one.
pub fn nearest_within(timestamps: &[f64], t: f64, tolerance: f64) -> Option<usize> {
    let after = timestamps.partition_point(|&x| x < t);
    let candidates = [after.checked_sub(1), (after < timestamps.len()).then_some(after)];
    let mut best: Option<(usize, f64)> = None;
    for i in candidates.into_iter().flatten() {
        let gap = (timestamps[i] - t).abs();
        if gap <= tolerance && best.is_none_or(|(_, g)| gap < g) {
            best = Some((i, gap));
        }
    }
    best.map(|(i, _)| i)
}

/// Streams are taken in RSU order: `streams[i]` belongs to `deployment.rsus()[i]`.
pub fn join_streams(
    streams: &[RssStream],
    track: &GpsTrack,
    deployment: &Deployment,
    tolerance_s: f64,
) -> Result<JoinOutput> {
    if streams.is_empty() {
        return Err(invalid("at least one RSS stream is required"));
    }
    if !(tolerance_s > 0.0 && tolerance_s.is_finite()) {
        return Err(invalid(format!("join tolerance must be positive, got {tolerance_s}")));
    }
    if streams.len() != deployment.len() {
        return Err(Error::DimensionMismatch {
            expected: deployment.len(),
            got: streams.len(),
        });
    }
    let times: Vec<Vec<f64>> = streams
        .iter()
        .map(|s| s.records.iter().map(|r| r.0).collect())
        .collect();
    let mut stats = JoinStats {
        track_records: track.records.len(),
        unmatched_per_stream: vec![0; streams.len()],
        matched_per_stream: vec![0; streams.len()],
        ..JoinStats::default()
    };
    let mut samples = Vec::new();
    for rec in &track.records {
        let mut rss = Vec::with_capacity(streams.len());
        for (k, (stream, ts)) in streams.iter().zip(&times).enumerate() {
            match nearest_within(ts, rec.timestamp_s, tolerance_s) {
                Some(i) => {
                    stats.matched_per_stream[k] += 1;
                    rss.push(stream.records[i].1);
                }
                None => stats.unmatched_per_stream[k] += 1,
            }
        }
        if rss.len() == streams.len() {
            samples.push(LabeledSample {
                position: rec.position,
                rss,
            });
        } else {
            stats.dropped += 1;
        }
    }
    stats.emitted = samples.len();
    if samples.is_empty() {
        return Err(Error::EmptyJoin(format!(
            "{} track records, matches per stream {:?}",
            stats.track_records, stats.matched_per_stream
        )));
    }
    Ok(JoinOutput {
        dataset: Dataset::new(deployment.clone(), None, samples)?,
        stats,
    })
}

fn parse_table(text: &str, header: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = rdr.records();
    let first = match records.next() {
        Some(r) => r.map_err(|e| Error::parse(1, e.to_string()))?,
        None => return Err(Error::parse(1, "missing header row")),
    };
    let found: Vec<&str> = first.iter().map(str::trim).collect();
    if found != header {
        return Err(Error::parse(
            1,
            format!("expected header {}, found {:?}", header.join(","), found.join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        if rec.len() == 1 && rec.get(0).is_some_and(|f| f.trim().is_empty()) {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        let values = header
            .iter()
            .zip(rec.iter())
            .map(|(name, f)| parse_f64(f, line, name))
            .collect::<Result<Vec<_>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

fn check_row_order(rows: &[(usize, Vec<f64>)]) -> Result<()> {
    for pair in rows.windows(2) {
        if pair[1].1[0] <= pair[0].1[0] {
            return Err(Error::parse(pair[1].0, "timestamps must be strictly increasing"));
        }
    }
    Ok(())
}

/// RSS stream CSV: `timestamp_s,rss_dbm`.
pub fn parse_stream(text: &str, rsu_id: usize) -> Result<RssStream> {
    let rows = parse_table(text, &["timestamp_s", "rss_dbm"])?;
    check_row_order(&rows)?;
    RssStream::new(rsu_id, rows.into_iter().map(|(_, v)| (v[0], v[1])).collect())
}

/// Position track CSV: `timestamp_s,x_m,y_m`.
pub fn parse_track(text: &str) -> Result<GpsTrack> {
    let rows = parse_table(text, &["timestamp_s", "x_m", "y_m"])?;
    check_row_order(&rows)?;
    GpsTrack::new(
        rows.into_iter()
            .map(|(_, v)| TrackRecord {
                timestamp_s: v[0],
                position: Position::new(v[1], v[2]),
            })
            .collect(),
    )
}

pub fn read_stream(path: &Path, rsu_id: usize) -> Result<RssStream> {
    parse_stream(&read_text(path)?, rsu_id).map_err(|e| e.with_path(path))
}

pub fn read_track(path: &Path) -> Result<GpsTrack> {
    parse_track(&read_text(path)?).map_err(|e| e.with_path(path))
}
