//! Hourly demand / supply profiles for the dispatch experiment.
//!
//! CSV layout: header `hour,demand_mw,supply_mw`, then one row per hour.

use std::io::{Read, Write};
use std::path::Path;

use serde::Deserialize;

use super::rng::DataRng;
use crate::error::{Result, SocoError};

/// Seed of the bundled synthetic week.
pub const BUNDLED_PROFILE_SEED: u64 = 2017;
pub const BUNDLED_HOURS: usize = 168;

/// The bundled synthetic profile, as written by [`write_dispatch_csv`] for
/// `synthetic_profile(168, BUNDLED_PROFILE_SEED)`.
pub const BUNDLED_PROFILE_CSV: &str = include_str!("../../data/dispatch_synthetic.csv");

#[derive(Clone, Debug, PartialEq)]
pub struct DispatchProfile {
    pub demand: Vec<f64>,
    pub supply: Vec<f64>,
}

impl DispatchProfile {
    pub fn len(&self) -> usize {
        self.demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.demand.is_empty()
    }
}

#[derive(Deserialize)]
struct Row {
    hour: f64,
    demand_mw: f64,
    supply_mw: f64,
}

/// Parses a profile and checks it has `expected_rows` rows. Negative demand
/// is rejected; negative supply is clamped to zero with a warning.
pub fn parse_dispatch_csv(reader: impl Read, expected_rows: usize) -> Result<DispatchProfile> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| SocoError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let expected = ["hour", "demand_mw", "supply_mw"];
    if headers.iter().collect::<Vec<_>>() != expected {
        return Err(SocoError::Parse {
            line: 1,
            message: format!(
                "expected header {}, found {}",
                expected.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut demand = Vec::new();
    let mut supply = Vec::new();
    for (i, record) in rdr.deserialize::<Row>().enumerate() {
        let line = i + 2;
        let row = record.map_err(|e| SocoError::Parse {
            line,
            message: e.to_string(),
        })?;
        if !row.hour.is_finite() || !row.demand_mw.is_finite() || !row.supply_mw.is_finite() {
            return Err(SocoError::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        if row.demand_mw < 0.0 {
            return Err(SocoError::Parse {
                line,
                message: format!("negative demand {}", row.demand_mw),
            });
        }
        let s = if row.supply_mw < 0.0 {
            log::warn!("line {line}: negative supply {} clamped to 0", row.supply_mw);
            0.0
        } else {
            row.supply_mw
        };
        demand.push(row.demand_mw);
        supply.push(s);
    }
    if demand.len() != expected_rows {
        return Err(SocoError::Length {
            expected: expected_rows,
            found: demand.len(),
        });
    }
    Ok(DispatchProfile { demand, supply })
}

pub fn ingest_dispatch_csv(path: &Path, expected_rows: usize) -> Result<DispatchProfile> {
    let file = std::fs::File::open(path)?;
    parse_dispatch_csv(file, expected_rows)
}

/// Seeded synthetic week: a daily demand cycle around 1150 MW plus noise and
/// a slowly varying wind supply that is clipped at zero.
pub fn synthetic_profile(hours: usize, seed: u64) -> DispatchProfile {
    let mut rng = DataRng::new(seed);
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut demand = Vec::with_capacity(hours);
    let mut supply = Vec::with_capacity(hours);
    let mut wind = 40.0;
    for h in 0..hours {
        let phase = two_pi * (h as f64 - 9.0) / 24.0;
        let d = 1150.0 + 250.0 * phase.sin() + 60.0 * (2.0 * phase).sin().max(0.0) + 20.0 * rng.normal();
        wind = (0.9 * wind + 4.0 + 12.0 * rng.normal()).max(0.0);
        demand.push(round2(d.max(0.0)));
        supply.push(round2(wind));
    }
    DispatchProfile { demand, supply }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn write_dispatch_csv(profile: &DispatchProfile, out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| SocoError::Io(std::io::Error::other(e));
    w.write_record(["hour", "demand_mw", "supply_mw"]).map_err(io)?;
    for (h, (d, s)) in profile.demand.iter().zip(&profile.supply).enumerate() {
        w.write_record([(h + 1).to_string(), format!("{d:.2}"), format!("{s:.2}")])
            .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
