//! CSV metrics and JSON snapshot writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::config::ModelVariant;
use crate::engine::{AggregateRound, BatchOutput, NetworkSnapshot, RoundMetrics, METRIC_COLUMNS};
use crate::Error;

/// Which run a CSV row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunLabel {
    Run(usize),
    Aggregate,
}

impl std::fmt::Display for RunLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunLabel::Run(id) => write!(f, "{id}"),
            RunLabel::Aggregate => f.write_str("aggregate"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub model: ModelVariant,
    pub run: RunLabel,
    pub round: u32,
    /// `value` for a single run, `mean` or `std` for aggregates.
    pub statistic: &'static str,
    pub values: [f64; METRIC_COLUMNS.len()],
}

pub fn run_rows(metrics: &[RoundMetrics]) -> Vec<MetricsRow> {
    metrics
        .iter()
        .map(|m| MetricsRow {
            model: m.model,
            run: RunLabel::Run(m.run_id),
            round: m.round_index,
            statistic: "value",
            values: m.values(),
        })
        .collect()
}

pub fn aggregate_rows(model: ModelVariant, aggregate: &[AggregateRound]) -> Vec<MetricsRow> {
    aggregate
        .iter()
        .flat_map(|a| {
            [("mean", a.mean), ("std", a.std_dev)].map(|(statistic, values)| MetricsRow {
                model,
                run: RunLabel::Aggregate,
                round: a.round_index,
                statistic,
                values,
            })
        })
        .collect()
}

pub fn csv_header() -> Vec<&'static str> {
    ["model", "run", "round", "statistic"]
        .into_iter()
        .chain(METRIC_COLUMNS)
        .collect()
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes a header and one line per row, reals with six decimals.
pub fn write_metrics_csv(rows: &[MetricsRow], out: impl Write) -> Result<(), csv::Error> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(csv_header())?;
    for row in rows {
        let mut record = vec![
            row.model.to_string(),
            row.run.to_string(),
            row.round.to_string(),
            row.statistic.to_owned(),
        ];
        record.extend(row.values.iter().map(|v| format!("{v:.6}")));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn export_metrics_csv(rows: &[MetricsRow], path: &Path) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    write_metrics_csv(rows, BufWriter::new(file)).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

pub fn export_network_snapshot(snapshot: &NetworkSnapshot, path: &Path) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut out = BufWriter::new(file);
    let json_error = |source| Error::Json {
        path: path.to_path_buf(),
        source,
    };
    serde_json::to_writer_pretty(&mut out, snapshot).map_err(json_error)?;
    out.write_all(b"\n")
        .and_then(|_| out.flush())
        .map_err(|e| io_error(path, e))
}

pub fn read_network_snapshot(path: &Path) -> Result<NetworkSnapshot, Error> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file)).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

/// `snapshot_run000_round0005.json` for run 0, round 5.
pub fn snapshot_file_name(run: usize, round: u32) -> String {
    format!("snapshot_run{run:03}_round{round:04}.json")
}

pub const RUNS_FILE: &str = "metrics_runs.csv";
pub const AGGREGATE_FILE: &str = "metrics_aggregate.csv";

/// Writes per-run metrics, aggregate metrics and every snapshot of a batch
/// into `dir`, creating it if needed.
pub fn export_batch(batch: &BatchOutput, dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let per_run: Vec<MetricsRow> = batch
        .runs
        .iter()
        .flat_map(|r| run_rows(&r.metrics))
        .collect();
    export_metrics_csv(&per_run, &dir.join(RUNS_FILE))?;
    export_metrics_csv(
        &aggregate_rows(batch.model, &batch.aggregate),
        &dir.join(AGGREGATE_FILE),
    )?;
    for run in &batch.runs {
        for snapshot in &run.snapshots {
            export_network_snapshot(
                snapshot,
                &dir.join(snapshot_file_name(run.run_id, snapshot.round)),
            )?;
        }
    }
    Ok(())
}
