//! File formats.
//!
//! * Bradley–Terry data: CSV with header `i,j,x_ij,x_ji`, one row per pair of
//!   0-based player indices, `x_ij` the number of wins of `i` over `j`.
//! * Mixture components: JSON `{"omega_size": n, "components": [[p(x)...], ...]}`.
//! * Classification data: CSV with a header; columns named `x...` are
//!   features and columns named `y...` the one-hot response, features first.

use std::io::{Read, Write};

use geodesic_core::linalg::Matrix;
use geodesic_core::models::{BradleyTerryModel, BtObservation, MixtureModel};
use geodesic_core::varinf::VIDataset;
use serde::{Deserialize, Serialize};

use crate::BenchError;

#[derive(Debug, Serialize, Deserialize)]
struct PairRecord {
    i: usize,
    j: usize,
    x_ij: u32,
    x_ji: u32,
}

/// Reads pairwise results into a row-major `N × N` win matrix.
pub fn read_bt_csv<R: Read>(reader: R) -> Result<(BradleyTerryModel, BtObservation), BenchError> {
    let records: Vec<PairRecord> = csv::Reader::from_reader(reader)
        .deserialize()
        .collect::<Result<_, _>>()?;
    let players = records.iter().map(|r| r.i.max(r.j) + 1).max().unwrap_or(0);
    let mut wins = vec![0u32; players * players];
    for r in &records {
        if r.i == r.j {
            return Err(BenchError::Config(format!(
                "pair ({}, {}) compares a player with itself",
                r.i, r.j
            )));
        }
        wins[r.i * players + r.j] += r.x_ij;
        wins[r.j * players + r.i] += r.x_ji;
    }
    Ok(BradleyTerryModel::from_wins(players, wins)?)
}

pub fn write_bt_csv<W: Write>(writer: W, obs: &BtObservation) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    let n = obs.players();
    for i in 0..n {
        for j in i + 1..n {
            w.serialize(PairRecord {
                i,
                j,
                x_ij: obs.wins(i, j),
                x_ji: obs.wins(j, i),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub omega_size: usize,
    pub components: Vec<Vec<f64>>,
}

impl MixtureSpec {
    pub fn into_model(self) -> Result<MixtureModel, BenchError> {
        Ok(MixtureModel::new(self.omega_size, self.components)?)
    }
}

pub fn read_mixture_json<R: Read>(reader: R) -> Result<MixtureSpec, BenchError> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn write_mixture_json<W: Write>(writer: W, spec: &MixtureSpec) -> Result<(), BenchError> {
    serde_json::to_writer_pretty(writer, spec)?;
    Ok(())
}

pub fn read_dataset_csv<R: Read>(reader: R) -> Result<VIDataset, BenchError> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    let features = header.iter().take_while(|h| h.starts_with('x')).count();
    let classes = header.len() - features;
    if features == 0 || classes < 2 || !header.iter().skip(features).all(|h| h.starts_with('y')) {
        return Err(BenchError::Config(format!(
            "dataset header must be x columns followed by at least two y columns, got {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| BenchError::Config(format!("row {}: `{field}` is not a number", rows + 1)))?;
            if k < features { x.push(v) } else { y.push(v) }
        }
        rows += 1;
    }
    let design = Matrix::from_row_major(rows, features, x)?;
    let responses = Matrix::from_row_major(rows, classes, y)?;
    Ok(VIDataset::from_one_hot(design, &responses)?)
}

pub fn write_dataset_csv<W: Write>(writer: W, data: &VIDataset) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<String> = (1..=data.features())
        .map(|k| format!("x{k}"))
        .chain((1..=data.classes()).map(|c| format!("y{c}")))
        .collect();
    w.write_record(&header)?;
    for i in 0..data.samples() {
        let mut row: Vec<String> = data.x(i).iter().map(f64::to_string).collect();
        row.extend((0..data.classes()).map(|c| if data.labels()[i] == c { "1" } else { "0" }.to_owned()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
