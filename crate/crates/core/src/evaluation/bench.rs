//! Batch effectiveness and efficiency runs over a set of subjects.
//!
//! Only the segmentation call itself is timed. Loading the snapshot and
//! truth, and anything else needed to prepare inputs, happens before the
//! clock starts.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::welch::{welch_t, WelchT};
use super::{evaluate, GroundTruth};
use crate::clustering::segment_page;
use crate::geometry::Rect;
use crate::snapshot::{load_snapshot, PageSnapshot};

/// One entry of a bench manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectSpec {
    pub snapshot_dir: PathBuf,
    pub truth_file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub subject_id: String,
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
    pub seconds: f64,
    pub segments: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRow {
    pub fn ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchMean {
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
    pub seconds: f64,
    pub subjects: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub precision: WelchT,
    pub recall: WelchT,
    pub fmeasure: WelchT,
    pub seconds: WelchT,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub mean: Option<BenchMean>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

fn subject_name(spec: &SubjectSpec) -> String {
    spec.snapshot_dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.snapshot_dir.display().to_string())
}

/// Default loader: snapshot directory plus truth file.
pub fn load_subject(spec: &SubjectSpec) -> Result<(PageSnapshot, GroundTruth), String> {
    let snapshot = load_snapshot(&spec.snapshot_dir).map_err(|e| e.to_string())?;
    let truth = GroundTruth::load(&spec.truth_file).map_err(|e| e.to_string())?;
    Ok((snapshot, truth))
}

pub fn benchmark(subjects: &[SubjectSpec]) -> BenchReport {
    benchmark_with(subjects, load_subject, |s| {
        segment_page(s).segments.iter().map(|seg| seg.bbox).collect()
    })
}

/// Runs `segment` on every subject `load` can prepare. Failures become
/// flagged rows and are left out of the means.
pub fn benchmark_with<L, S>(subjects: &[SubjectSpec], load: L, segment: S) -> BenchReport
where
    L: Fn(&SubjectSpec) -> Result<(PageSnapshot, GroundTruth), String>,
    S: Fn(&PageSnapshot) -> Vec<Rect>,
{
    let rows: Vec<BenchRow> = subjects
        .iter()
        .map(|spec| match load(spec) {
            Ok((snapshot, truth)) => {
                let truth_rects = truth.rects();
                let start = Instant::now();
                let output = segment(&snapshot);
                let seconds = start.elapsed().as_secs_f64();
                let report = evaluate(&output, &truth_rects);
                BenchRow {
                    subject_id: truth.subject_id,
                    precision: report.precision,
                    recall: report.recall,
                    fmeasure: report.fmeasure,
                    seconds,
                    segments: output.len(),
                    error: None,
                }
            }
            Err(error) => {
                log::warn!("subject {} failed: {error}", spec.snapshot_dir.display());
                BenchRow {
                    subject_id: subject_name(spec),
                    precision: 0.0,
                    recall: 0.0,
                    fmeasure: 0.0,
                    seconds: 0.0,
                    segments: 0,
                    error: Some(error),
                }
            }
        })
        .collect();
    let mean = mean_row(&rows);
    BenchReport {
        rows,
        mean,
        comparison: None,
    }
}

fn mean_row(rows: &[BenchRow]) -> Option<BenchMean> {
    let ok: Vec<&BenchRow> = rows.iter().filter(|r| r.ok()).collect();
    if ok.is_empty() {
        return None;
    }
    let n = ok.len() as f64;
    let avg = |f: fn(&BenchRow) -> f64| ok.iter().map(|r| f(r)).sum::<f64>() / n;
    Some(BenchMean {
        precision: avg(|r| r.precision),
        recall: avg(|r| r.recall),
        fmeasure: avg(|r| r.fmeasure),
        seconds: avg(|r| r.seconds),
        subjects: ok.len(),
    })
}

/// Welch t per metric, this tool's successful rows against another's.
pub fn compare_reports(ours: &BenchReport, theirs: &BenchReport) -> Result<Comparison, super::WelchError> {
    let column = |report: &BenchReport, f: fn(&BenchRow) -> f64| -> Vec<f64> {
        report.rows.iter().filter(|r| r.ok()).map(f).collect()
    };
    let test = |f: fn(&BenchRow) -> f64| welch_t(&column(ours, f), &column(theirs, f));
    Ok(Comparison {
        precision: test(|r| r.precision)?,
        recall: test(|r| r.recall)?,
        fmeasure: test(|r| r.fmeasure)?,
        seconds: test(|r| r.seconds)?,
    })
}

impl BenchReport {
    /// Aligned-column text rendering.
    pub fn to_table(&self) -> String {
        let width = self
            .rows
            .iter()
            .map(|r| r.subject_id.len())
            .chain([7])
            .max()
            .unwrap_or(7);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>9}  {:>9}  {:>9}  {:>9}  {:>8}",
            "subject", "precision", "recall", "f-measure", "seconds", "segments"
        );
        for r in &self.rows {
            match &r.error {
                None => {
                    let _ = writeln!(
                        out,
                        "{:<width$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>9.4}  {:>8}",
                        r.subject_id, r.precision, r.recall, r.fmeasure, r.seconds, r.segments
                    );
                }
                Some(e) => {
                    let _ = writeln!(out, "{:<width$}  FAILED: {e}", r.subject_id);
                }
            }
        }
        if let Some(m) = &self.mean {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>9.4}  {:>8}",
                "mean", m.precision, m.recall, m.fmeasure, m.seconds, ""
            );
        }
        if let Some(c) = &self.comparison {
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.3}  {:>9.3}  {:>9.3}  {:>9.3}  {:>8}",
                "welch t", c.precision.t, c.recall.t, c.fmeasure.t, c.seconds.t, ""
            );
            let _ = writeln!(
                out,
                "{:<width$}  {:>9.2}  {:>9.2}  {:>9.2}  {:>9.2}  {:>8}",
                "dof", c.precision.dof, c.recall.dof, c.fmeasure.dof, c.seconds.dof, ""
            );
        }
        out
    }
}
