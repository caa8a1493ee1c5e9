//! Area-overlap scoring of generated segments against ground truth.
//!
//! Each generated segment is paired with one truth segment and split into a
//! true-positive part (the overlap) and a false-positive part (the rest).
//! False negatives run the other way: each truth segment is paired with one
//! generated segment and its uncovered area counts. The scores are computed
//! for a subject as a whole, without averaging.

pub mod bench;
pub mod welch;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Rect;

pub use bench::{benchmark, benchmark_with, BenchReport, BenchRow, SubjectSpec};
pub use welch::{welch_t, WelchError, WelchT};

#[derive(Debug, Error)]
pub enum TruthError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed truth file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSegment {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl TruthSegment {
    pub fn rect(&self) -> Rect {
        Rect::new(self.x, self.y, self.w, self.h)
    }
}

/// `truth.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub subject_id: String,
    pub segments: Vec<TruthSegment>,
}

impl GroundTruth {
    pub fn from_rects(subject_id: impl Into<String>, rects: &[Rect]) -> Self {
        GroundTruth {
            subject_id: subject_id.into(),
            segments: rects
                .iter()
                .map(|r| TruthSegment { x: r.x, y: r.y, w: r.w, h: r.h, label: None })
                .collect(),
        }
    }

    pub fn rects(&self) -> Vec<Rect> {
        self.segments.iter().map(TruthSegment::rect).collect()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TruthError> {
        let path = path.as_ref();
        let raw = fs::read_to_string(path).map_err(|source| TruthError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let truth: GroundTruth = serde_json::from_str(&raw).map_err(|e| TruthError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if let Some(bad) = truth
            .segments
            .iter()
            .find(|s| !s.rect().is_finite() || s.w < 0.0 || s.h < 0.0)
        {
            return Err(TruthError::Malformed {
                path: path.to_path_buf(),
                reason: format!("invalid segment {bad:?}"),
            });
        }
        Ok(truth)
    }
}

/// How a segment finds its counterpart in the other set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairingMetric {
    /// Largest intersection area, nearest centroid when nothing overlaps.
    #[default]
    Overlap,
    /// Nearest centroid only.
    Centroid,
}

fn nearest_centroid(r: &Rect, candidates: &[Rect]) -> Option<usize> {
    let c = r.center();
    candidates
        .iter()
        .enumerate()
        .map(|(i, g)| (i, c.distance(&g.center())))
        .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
            Some((_, bd)) if bd <= d => best,
            _ => Some((i, d)),
        })
        .map(|(i, _)| i)
}

/// Counterpart of `r` among `candidates`; ties resolve to the lowest index.
pub fn pair_with(r: &Rect, candidates: &[Rect], metric: PairingMetric) -> Option<usize> {
    if metric == PairingMetric::Overlap {
        let best = candidates
            .iter()
            .enumerate()
            .map(|(i, g)| (i, r.intersection_area(g)))
            .fold(None, |best: Option<(usize, f64)>, (i, a)| match best {
                Some((_, ba)) if ba >= a => best,
                _ => Some((i, a)),
            });
        if let Some((i, area)) = best {
            if area > 0.0 {
                return Some(i);
            }
        }
    }
    nearest_centroid(r, candidates)
}

/// Truth counterpart of a generated segment.
pub fn pair_to_truth(output: &Rect, truth: &[Rect]) -> Option<usize> {
    pair_with(output, truth, PairingMetric::Overlap)
}

fn paired_area(r: &Rect, partner: Option<&Rect>, overlap: bool) -> f64 {
    match (partner, overlap) {
        (Some(p), true) => r.intersection_area(p),
        (Some(p), false) => r.difference_area(p),
        (None, true) => 0.0,
        (None, false) => r.area(),
    }
}

fn pairing(from: &[Rect], to: &[Rect], metric: PairingMetric) -> Vec<Option<usize>> {
    from.iter().map(|r| pair_with(r, to, metric)).collect()
}

pub fn tp_area(output: &[Rect], truth: &[Rect]) -> f64 {
    output
        .iter()
        .map(|r| paired_area(r, pair_to_truth(r, truth).map(|i| &truth[i]), true))
        .fold(0.0, |a, b| a + b)
}

pub fn fp_area(output: &[Rect], truth: &[Rect]) -> f64 {
    output
        .iter()
        .map(|r| paired_area(r, pair_to_truth(r, truth).map(|i| &truth[i]), false))
        .fold(0.0, |a, b| a + b)
}

pub fn fn_area(output: &[Rect], truth: &[Rect]) -> f64 {
    truth
        .iter()
        .map(|g| paired_area(g, pair_with(g, output, PairingMetric::Overlap).map(|i| &output[i]), false))
        .fold(0.0, |a, b| a + b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub precision: f64,
    pub recall: f64,
    pub fmeasure: f64,
    /// Truth index paired with each generated segment.
    pub output_pairing: Vec<Option<usize>>,
    /// Generated-segment index paired with each truth segment.
    pub truth_pairing: Vec<Option<usize>>,
}

pub fn evaluate(output: &[Rect], truth: &[Rect]) -> EvalReport {
    evaluate_with(output, truth, PairingMetric::Overlap)
}

pub fn evaluate_with(output: &[Rect], truth: &[Rect], metric: PairingMetric) -> EvalReport {
    let output_pairing = pairing(output, truth, metric);
    let truth_pairing = pairing(truth, output, metric);
    let sum = |rects: &[Rect], pairs: &[Option<usize>], other: &[Rect], overlap: bool| -> f64 {
        rects
            .iter()
            .zip(pairs)
            .map(|(r, p)| paired_area(r, p.map(|i| &other[i]), overlap))
            .fold(0.0, |a, b| a + b)
    };
    let tp = sum(output, &output_pairing, truth, true);
    let fp = sum(output, &output_pairing, truth, false);
    let fn_ = sum(truth, &truth_pairing, output, false);

    let both_empty = output.is_empty() && truth.is_empty();
    let ratio = |num: f64, den: f64| {
        if den > 0.0 {
            num / den
        } else if both_empty {
            1.0
        } else {
            0.0
        }
    };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let fmeasure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    EvalReport {
        tp,
        fp,
        fn_,
        precision,
        recall,
        fmeasure,
        output_pairing,
        truth_pairing,
    }
}
