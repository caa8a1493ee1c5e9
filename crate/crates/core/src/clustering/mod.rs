//! Contextual clustering of visual objects into segments, and the end-to-end
//! segmentation pipeline.
//!
//! Pairwise distance is the product of three factors: the box gap clamped to
//! 1 at or below the distance factor, the alignment difference clamped the
//! same way at the alignment factor, and the mean fg/bg color difference in
//! units of just-noticeable difference (floored at 1). Objects then cluster
//! by DBSCAN with `eps = 1`, `min_pts = 1`.

pub mod dbscan;
pub mod factors;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{abstract_page, VisualObject};
use crate::adjacency::{build_adjacency, Neighborhood, DEFAULT_K};
use crate::features::{build_features, delta_e76, FeatureVector};
use crate::geometry::{box_distance, Rect};
use crate::snapshot::PageSnapshot;
pub use dbscan::{dbscan, Label};
pub use factors::{
    alignment_difference, alignment_factor, distance_factor, pairwise_adjacent_distances,
    pairwise_alignment_differences, scaling_factors, BinScore, ScalingFactors,
};

/// CIE76 just-noticeable difference.
pub const JND: f64 = 2.3;
/// Density radius once distances are expressed relative to the factors.
pub const EPS: f64 = 1.0;
pub const MIN_PTS: usize = 1;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClusteringError {
    #[error("no object has an adjacent neighbor")]
    EmptyAdjacency,
}

/// Dense symmetric matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Fills the upper triangle from `f(a, b)` (a < b) and mirrors it.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for a in 0..n {
            for b in a + 1..n {
                let d = f(a, b);
                data[a * n + b] = d;
                data[b * n + a] = d;
            }
        }
        DistanceMatrix { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.n..(a + 1) * self.n]
    }
}

/// Values at or below `sigma` become 1, the rest pass through.
#[inline]
pub fn clamp(x: f64, sigma: f64) -> f64 {
    if x <= sigma {
        1.0
    } else {
        x
    }
}

/// Mean of the background and foreground ΔE, in JND units, never below 1.
pub fn color_distance(a: &FeatureVector, b: &FeatureVector) -> f64 {
    let mean = (delta_e76(&a.bg, &b.bg) + delta_e76(&a.fg, &b.fg)) / 2.0;
    mean.max(JND) / JND
}

pub fn build_distance_matrix(features: &[FeatureVector], factors: &ScalingFactors) -> DistanceMatrix {
    let boxes: Vec<Rect> = features.iter().map(FeatureVector::bounds).collect();
    DistanceMatrix::from_fn(features.len(), |a, b| {
        clamp(box_distance(&boxes[a], &boxes[b]), factors.sigma_d)
            * clamp(alignment_difference(&boxes[a], &boxes[b]), factors.sigma_a)
            * color_distance(&features[a], &features[b])
    })
}

/// Partition of object ids; each inner list is ascending and clusters are
/// ordered by their smallest member.
pub fn cluster(matrix: &DistanceMatrix) -> Vec<Vec<usize>> {
    let labels = dbscan(matrix, EPS, MIN_PTS);
    let count = labels
        .iter()
        .filter_map(|l| match l {
            Label::Cluster(c) => Some(c + 1),
            Label::Noise => None,
        })
        .max()
        .unwrap_or(0);
    let mut clusters = vec![Vec::new(); count];
    for (id, label) in labels.into_iter().enumerate() {
        match label {
            Label::Cluster(c) => clusters[c].push(id),
            Label::Noise => unreachable!("min_pts = 1 leaves no noise"),
        }
    }
    clusters
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub id: usize,
    pub member_ids: Vec<usize>,
    pub xpaths: Vec<String>,
    pub bbox: Rect,
}

pub fn segments_from_clusters(partition: &[Vec<usize>], objects: &[VisualObject]) -> Vec<Segment> {
    let mut segments: Vec<Segment> = partition
        .iter()
        .filter(|members| !members.is_empty())
        .map(|members| {
            let mut member_ids = members.clone();
            member_ids.sort_unstable();
            let bbox = member_ids
                .iter()
                .map(|&i| objects[i].bounds)
                .reduce(|a, b| a.union(&b))
                .expect("non-empty cluster");
            Segment {
                id: 0,
                xpaths: member_ids.iter().map(|&i| objects[i].xpath.clone()).collect(),
                member_ids,
                bbox,
            }
        })
        .collect();
    segments.sort_by(|a, b| {
        a.bbox
            .y
            .total_cmp(&b.bbox.y)
            .then(a.bbox.x.total_cmp(&b.bbox.x))
            .then(a.member_ids[0].cmp(&b.member_ids[0]))
    });
    for (i, s) in segments.iter_mut().enumerate() {
        s.id = i;
    }
    segments
}

/// Everything the pipeline derived, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub objects: Vec<VisualObject>,
    pub features: Vec<FeatureVector>,
    pub neighborhood: Neighborhood,
    pub factors: Option<ScalingFactors>,
    pub segments: Vec<Segment>,
    /// Set when the page had nothing to segment.
    pub empty_page: bool,
}

/// Clusters already-extracted objects. With no adjacency at all (a single
/// object) both factors are zero.
pub fn segment_objects(objects: Vec<VisualObject>, features: Vec<FeatureVector>) -> Segmentation {
    let boxes: Vec<Rect> = features.iter().map(FeatureVector::bounds).collect();
    let neighborhood = build_adjacency(&boxes, DEFAULT_K);
    let factors = scaling_factors(&boxes, &neighborhood).ok();
    let effective = factors.clone().unwrap_or(ScalingFactors {
        sigma_d: 0.0,
        sigma_a: 0.0,
        distance_bins: Vec::new(),
        alignment_bins: Vec::new(),
    });
    let matrix = build_distance_matrix(&features, &effective);
    let partition = cluster(&matrix);
    let segments = segments_from_clusters(&partition, &objects);
    Segmentation {
        objects,
        features,
        neighborhood,
        factors,
        segments,
        empty_page: false,
    }
}

/// Full pipeline from a snapshot to segments.
pub fn segment_page(snapshot: &PageSnapshot) -> Segmentation {
    match abstract_page(snapshot) {
        Ok(objects) => {
            let features = build_features(&objects, snapshot);
            segment_objects(objects, features)
        }
        Err(_) => {
            log::warn!("{}: no visible objects to segment", snapshot.url);
            Segmentation {
                objects: Vec::new(),
                features: Vec::new(),
                neighborhood: Neighborhood::default(),
                factors: None,
                segments: Vec::new(),
                empty_page: true,
            }
        }
    }
}

/// `segments.json` entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub id: usize,
    pub bbox: Rect,
    pub xpaths: Vec<String>,
}

/// `segments.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentsFile {
    pub url: String,
    pub generated_at: Option<String>,
    pub segments: Vec<SegmentRecord>,
}

impl SegmentsFile {
    pub fn new(url: impl Into<String>, generated_at: Option<String>, segments: &[Segment]) -> Self {
        SegmentsFile {
            url: url.into(),
            generated_at,
            segments: segments
                .iter()
                .map(|s| SegmentRecord {
                    id: s.id,
                    bbox: s.bbox,
                    xpaths: s.xpaths.clone(),
                })
                .collect(),
        }
    }

    pub fn bboxes(&self) -> Vec<Rect> {
        self.segments.iter().map(|s| s.bbox).collect()
    }
}
