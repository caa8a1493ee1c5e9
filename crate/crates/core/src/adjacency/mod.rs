//! Line-of-sight adjacency neighborhoods.
//!
//! An object's neighborhood starts as its `k` nearest objects by box
//! distance. A neighbor stays adjacent when the minimum-distance segment
//! joining the two boxes does not pass through the interior of any other
//! member of that nearest set.

mod rtree;

use serde::{Deserialize, Serialize};

pub use crate::geometry::{box_distance, min_distance_segment};
use crate::geometry::{segment_crosses_interior, Rect};
pub use rtree::SpatialIndex;

/// Size of the nearest-neighbor candidate set.
pub const DEFAULT_K: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Neighborhood {
    /// Adjacent ids per object, nearest first.
    pub adjacency: Vec<Vec<usize>>,
    /// Nearest-neighbor ids per object, nearest first.
    pub knn: Vec<Vec<usize>>,
}

/// Directed adjacency edge, for debug dumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub distance: f64,
}

impl Neighborhood {
    pub fn edges(&self, boxes: &[Rect]) -> Vec<Edge> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(from, ns)| {
                ns.iter().map(move |&to| Edge {
                    from,
                    to,
                    distance: box_distance(&boxes[from], &boxes[to]),
                })
            })
            .collect()
    }

    /// JSON edge list, `[{"from":..,"to":..,"distance":..}, ...]`.
    pub fn to_json(&self, boxes: &[Rect]) -> String {
        serde_json::to_string_pretty(&self.edges(boxes)).expect("edges serialize")
    }
}

/// The `k` nearest neighbors of object `o`, ties broken by id.
pub fn knn(index: &SpatialIndex, o: usize, k: usize) -> Vec<usize> {
    index
        .nearest(&index.rect(o), k, Some(o))
        .into_iter()
        .map(|(id, _)| id)
        .collect()
}

/// Members of `nearest` that `o` can see.
fn line_of_sight(boxes: &[Rect], o: usize, nearest: &[usize]) -> Vec<usize> {
    nearest
        .iter()
        .copied()
        .filter(|&n| {
            let seg = min_distance_segment(&boxes[o], &boxes[n]);
            !nearest
                .iter()
                .any(|&m| m != n && segment_crosses_interior(&seg, &boxes[m]))
        })
        .collect()
}

pub fn build_adjacency(boxes: &[Rect], k: usize) -> Neighborhood {
    let index = SpatialIndex::new(boxes);
    let knn: Vec<Vec<usize>> = (0..boxes.len()).map(|o| self::knn(&index, o, k)).collect();
    let adjacency = knn
        .iter()
        .enumerate()
        .map(|(o, nearest)| line_of_sight(boxes, o, nearest))
        .collect();
    Neighborhood { adjacency, knn }
}
