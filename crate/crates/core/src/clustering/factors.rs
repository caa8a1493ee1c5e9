//! Data-derived scaling factors: weighted modes of the distances and
//! alignment differences observed between adjacent objects.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ClusteringError;
use crate::adjacency::Neighborhood;
use crate::geometry::{box_distance, Rect};

/// One histogram bin: center value, population and its weighted score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinScore {
    pub value: f64,
    pub frequency: usize,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFactors {
    pub sigma_d: f64,
    pub sigma_a: f64,
    pub distance_bins: Vec<BinScore>,
    pub alignment_bins: Vec<BinScore>,
}

/// Minimal alignment difference over left, right, top, bottom, horizontal
/// center and vertical center.
pub fn alignment_difference(a: &Rect, b: &Rect) -> f64 {
    let ca = a.center();
    let cb = b.center();
    [
        (a.x - b.x).abs(),
        (a.right() - b.right()).abs(),
        (a.y - b.y).abs(),
        (a.bottom() - b.bottom()).abs(),
        (ca.x - cb.x).abs(),
        (ca.y - cb.y).abs(),
    ]
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

fn directed_pairs<'a>(
    boxes: &'a [Rect],
    neighborhood: &'a Neighborhood,
) -> impl Iterator<Item = (&'a Rect, &'a Rect)> + 'a {
    neighborhood
        .adjacency
        .iter()
        .enumerate()
        .flat_map(move |(o, ns)| ns.iter().map(move |&n| (&boxes[o], &boxes[n])))
}

/// Box distances over every directed adjacent pair.
pub fn pairwise_adjacent_distances(
    boxes: &[Rect],
    neighborhood: &Neighborhood,
) -> Result<Vec<f64>, ClusteringError> {
    let d: Vec<f64> = directed_pairs(boxes, neighborhood)
        .map(|(a, b)| box_distance(a, b))
        .collect();
    if d.is_empty() {
        Err(ClusteringError::EmptyAdjacency)
    } else {
        Ok(d)
    }
}

/// Alignment differences over every directed adjacent pair.
pub fn pairwise_alignment_differences(
    boxes: &[Rect],
    neighborhood: &Neighborhood,
) -> Result<Vec<f64>, ClusteringError> {
    let e: Vec<f64> = directed_pairs(boxes, neighborhood)
        .map(|(a, b)| alignment_difference(a, b))
        .collect();
    if e.is_empty() {
        Err(ClusteringError::EmptyAdjacency)
    } else {
        Ok(e)
    }
}

/// 1-px bins keyed by floor(value); centers sit at k + 0.5.
fn histogram(values: &[f64]) -> BTreeMap<i64, usize> {
    let mut bins = BTreeMap::new();
    for v in values {
        *bins.entry(v.floor() as i64).or_insert(0) += 1;
    }
    bins
}

/// Scores every bin and returns (argmax center, all bins). Bins are visited
/// in ascending order and only a strictly better score replaces the
/// incumbent, so ties resolve to the smaller value.
fn weighted_mode(
    values: &[f64],
    score: impl Fn(f64, usize) -> f64,
) -> Result<(f64, Vec<BinScore>), ClusteringError> {
    if values.is_empty() {
        return Err(ClusteringError::EmptyAdjacency);
    }
    let bins: Vec<BinScore> = histogram(values)
        .into_iter()
        .map(|(k, frequency)| {
            let value = k as f64 + 0.5;
            BinScore {
                value,
                frequency,
                score: score(value, frequency),
            }
        })
        .collect();
    let best = bins
        .iter()
        .fold(None::<&BinScore>, |best, b| match best {
            Some(cur) if cur.score >= b.score => Some(cur),
            _ => Some(b),
        })
        .expect("non-empty");
    Ok((best.value, bins))
}

/// Distance factor: the bin maximizing value × frequency.
pub fn distance_factor(distances: &[f64]) -> Result<f64, ClusteringError> {
    distance_bins(distances).map(|(s, _)| s)
}

fn distance_bins(distances: &[f64]) -> Result<(f64, Vec<BinScore>), ClusteringError> {
    weighted_mode(distances, |v, f| v * f as f64)
}

/// Alignment factor: the bin maximizing frequency / value.
pub fn alignment_factor(alignments: &[f64]) -> Result<f64, ClusteringError> {
    alignment_bins(alignments).map(|(s, _)| s)
}

fn alignment_bins(alignments: &[f64]) -> Result<(f64, Vec<BinScore>), ClusteringError> {
    weighted_mode(alignments, |v, f| f as f64 / v)
}

/// Both factors from the adjacency of `boxes`.
pub fn scaling_factors(
    boxes: &[Rect],
    neighborhood: &Neighborhood,
) -> Result<ScalingFactors, ClusteringError> {
    let (sigma_d, distance_bins) = distance_bins(&pairwise_adjacent_distances(boxes, neighborhood)?)?;
    let (sigma_a, alignment_bins) =
        alignment_bins(&pairwise_alignment_differences(boxes, neighborhood)?)?;
    Ok(ScalingFactors {
        sigma_d,
        sigma_a,
        distance_bins,
        alignment_bins,
    })
}
