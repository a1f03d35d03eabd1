//! On-disk formats for calibrations and power grids.
//!
//! Grids are stored as a JSON envelope carrying a format version and the
//! sha256 of the compact payload, or as a flat CSV with one row per
//! `(detector, beta, signal)` cell.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::{CalibratedDetector, CellFlags, PowerCell, PowerGrid, SignalKind, TOOL_VERSION};
use crate::detectors::DetectorKind;
use crate::error::{Error, Result};

pub const GRID_FORMAT_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 9] =
    ["detector", "n", "beta", "signal_kind", "signal", "power", "reps", "boundary_value", "flag"];

fn major(version: &str) -> &str {
    version.split('.').next().unwrap_or(version)
}

/// Rejects unknown detector names with a precise error before serde gets a
/// chance to report a generic one.
fn check_detector_names(v: &Value) -> Result<()> {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match (k.as_str(), x) {
                    ("detector" | "kind", Value::String(s)) => {
                        DetectorKind::from_name(s)?;
                    }
                    ("detectors", Value::Array(items)) => {
                        for i in items {
                            if let Value::String(s) = i {
                                DetectorKind::from_name(s)?;
                            }
                        }
                    }
                    _ => check_detector_names(x)?,
                }
            }
            Ok(())
        }
        Value::Array(items) => items.iter().try_for_each(check_detector_names),
        _ => Ok(()),
    }
}

pub fn save_calibration<W: Write>(calibrated: &[CalibratedDetector], mut w: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, calibrated)?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Loads a calibration file, refusing files from another major tool version.
pub fn load_calibration<R: Read>(r: R) -> Result<Vec<CalibratedDetector>> {
    let v: Value = serde_json::from_reader(r)?;
    check_detector_names(&v)?;
    let out: Vec<CalibratedDetector> = serde_json::from_value(v)?;
    for c in &out {
        if major(&c.tool_version) != major(TOOL_VERSION) {
            return Err(Error::VersionMismatch { expected: TOOL_VERSION.into(), found: c.tool_version.clone() });
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format_version: u32,
    tool_version: String,
    checksum: String,
    payload: Value,
}

fn checksum(payload: &Value) -> String {
    hex::encode(Sha256::digest(payload.to_string().as_bytes()))
}

pub fn save_grid_json<W: Write>(grid: &PowerGrid, mut w: W, pretty: bool) -> Result<()> {
    let payload = serde_json::to_value(grid)?;
    let env = Envelope {
        format_version: GRID_FORMAT_VERSION,
        tool_version: TOOL_VERSION.into(),
        checksum: checksum(&payload),
        payload,
    };
    if pretty {
        serde_json::to_writer_pretty(&mut w, &env)?;
    } else {
        serde_json::to_writer(&mut w, &env)?;
    }
    w.write_all(b"\n")?;
    Ok(())
}

pub fn load_grid_json<R: Read>(r: R) -> Result<PowerGrid> {
    let env: Envelope = serde_json::from_reader(r)?;
    if env.format_version != GRID_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            expected: GRID_FORMAT_VERSION.to_string(),
            found: env.format_version.to_string(),
        });
    }
    check_detector_names(&env.payload)?;
    let computed = checksum(&env.payload);
    if computed != env.checksum {
        return Err(Error::Checksum { stored: env.checksum, computed });
    }
    Ok(serde_json::from_value(env.payload)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_grid_csv<W: Write>(cells: &[PowerCell], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for c in cells {
        out.write_record([
            c.detector.name().to_string(),
            c.n.to_string(),
            c.beta.to_string(),
            c.signal_kind.as_str().to_string(),
            c.signal.to_string(),
            opt(c.power),
            c.reps.to_string(),
            opt(c.boundary_value),
            c.flag.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_grid_csv<R: Read>(r: R) -> Result<Vec<PowerCell>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Parse { line: 1, msg: format!("expected header {}", CSV_HEADER.join(",")) });
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec?;
        let bad = |what: &str| Error::Parse { line, msg: format!("bad {what}") };
        let f = |j: usize, what: &str| rec[j].parse::<f64>().map_err(|_| bad(what));
        let of = |j: usize, what: &str| {
            if rec[j].is_empty() {
                Ok(None)
            } else {
                rec[j].parse::<f64>().map(Some).map_err(|_| bad(what))
            }
        };
        out.push(PowerCell {
            detector: DetectorKind::from_name(&rec[0])?,
            n: rec[1].parse().map_err(|_| bad("n"))?,
            beta: f(2, "beta")?,
            signal_kind: SignalKind::parse(&rec[3]).ok_or_else(|| bad("signal_kind"))?,
            signal: f(4, "signal")?,
            power: of(5, "power")?,
            reps: rec[6].parse().map_err(|_| bad("reps"))?,
            boundary_value: of(7, "boundary_value")?,
            flag: rec[8].parse::<CellFlags>().map_err(|_| bad("flag"))?,
        });
    }
    Ok(out)
}
