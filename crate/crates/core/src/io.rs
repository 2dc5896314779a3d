//! CSV and JSON serialization of datasets and analysis results.
//!
//! CSV output uses a mandatory header row, `,` separators and RFC 4180
//! quoting. JSON documents are pretty-printed with a trailing newline and
//! keep struct field order.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::ergodic::{AutocorrSeries, BifurcationScan};
use crate::landscapes::{Sample, SyntheticDataset, Teacher};
use crate::markov::SpectralReport;
use crate::stability::StabilityReport;
use crate::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetMetadata {
    n: usize,
    d: usize,
    p: f64,
    seed: u64,
    teacher: Teacher,
    clean_labels: Vec<f64>,
    corrupted: Vec<bool>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetDocument {
    metadata: DatasetMetadata,
    /// One row per sample: the inputs followed by the label.
    samples: Vec<Vec<f64>>,
}

pub fn dataset_to_json(ds: &SyntheticDataset) -> Result<String> {
    let doc = DatasetDocument {
        metadata: DatasetMetadata {
            n: ds.n,
            d: ds.d,
            p: ds.p,
            seed: ds.seed,
            teacher: ds.teacher.clone(),
            clean_labels: ds.clean_labels.clone(),
            corrupted: ds.corrupted.clone(),
        },
        samples: ds
            .samples
            .iter()
            .map(|z| z.x.iter().copied().chain([z.y]).collect())
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc)?;
    s.push('\n');
    Ok(s)
}

pub fn dataset_from_json(text: &str) -> Result<SyntheticDataset> {
    let doc: DatasetDocument = serde_json::from_str(text)?;
    let m = doc.metadata;
    if doc.samples.len() != m.n || m.clean_labels.len() != m.n || m.corrupted.len() != m.n {
        return Err(Error::param("dataset arrays disagree with n"));
    }
    let samples = doc
        .samples
        .into_iter()
        .map(|mut row| {
            if row.len() != m.d + 1 {
                return Err(Error::Dimension {
                    expected: m.d + 1,
                    got: row.len(),
                    context: "dataset row",
                });
            }
            let y = row.pop().expect("non-empty row");
            Ok(Sample::new(row, y))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticDataset {
        n: m.n,
        d: m.d,
        p: m.p,
        seed: m.seed,
        teacher: m.teacher,
        samples,
        clean_labels: m.clean_labels,
        corrupted: m.corrupted,
    })
}

pub fn write_dataset(ds: &SyntheticDataset, path: &Path) -> Result<()> {
    std::fs::write(path, dataset_to_json(ds)?)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<SyntheticDataset> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    dataset_from_json(&text)
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    std::fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

/// Columns `eta, init_id, sample_index, value, period, diverged`; one row
/// per retained sample. A diverged orbit with no samples contributes one
/// row with an empty value.
pub fn write_bifurcation_csv<W: Write>(scan: &BifurcationScan, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["eta", "init_id", "sample_index", "value", "period", "diverged"])?;
    for c in &scan.cells {
        let period = c.period.map(|p| p.to_string()).unwrap_or_default();
        let diverged = c.diverged_at.is_some().to_string();
        let eta = c.eta.to_string();
        let init = c.init_id.to_string();
        if c.samples.is_empty() {
            w.write_record([eta.as_str(), &init, "", "", &period, &diverged])?;
        }
        for (i, v) in c.samples.iter().enumerate() {
            w.write_record([eta.as_str(), &init, &i.to_string(), &v.to_string(), &period, &diverged])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `lag, C, guard_flag`.
pub fn write_autocorr_csv<W: Write>(series: &AutocorrSeries, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["lag", "C", "guard_flag"])?;
    let guard = series.guard.to_string();
    for (lag, c) in series.values.iter().enumerate() {
        w.write_record([lag.to_string(), c.to_string(), guard.clone()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `pair_id, probe_id, diff`; diverged pairs contribute no rows.
pub fn write_stability_csv<W: Write>(report: &StabilityReport, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["pair_id", "probe_id", "diff"])?;
    for r in &report.results {
        for (probe, d) in r.diffs.iter().enumerate() {
            w.write_record([r.pair_id.to_string(), probe.to_string(), d.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Columns `mode_index, modulus`.
pub fn write_spectrum_csv<W: Write>(report: &SpectralReport, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["mode_index", "modulus"])?;
    for (i, m) in report.moduli.iter().enumerate() {
        w.write_record([i.to_string(), m.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a CSV produced by `emit` to `path`.
pub fn write_csv_file(path: &Path, emit: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    emit(&mut f)?;
    f.flush()?;
    Ok(())
}
