//! Static, bulk-loaded R-tree over object boxes (sort-tile-recursive packing).
//!
//! Nearest-neighbor search is best-first over box-to-box distance; results
//! are identical to a full sort by `(distance, id)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{box_distance, segment_crosses_interior, Rect, Segment2D};

const NODE_CAPACITY: usize = 8;

#[derive(Debug, Clone)]
struct Node {
    bounds: Rect,
    kind: NodeKind,
}

#[derive(Debug, Clone)]
enum NodeKind {
    /// Object ids.
    Leaf(Vec<usize>),
    /// Child node indices.
    Inner(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    boxes: Vec<Rect>,
    nodes: Vec<Node>,
    root: Option<usize>,
}

fn hull<'a>(rects: impl IntoIterator<Item = &'a Rect>) -> Rect {
    rects
        .into_iter()
        .copied()
        .reduce(|a, b| a.union(&b))
        .unwrap_or_default()
}

/// Groups items into runs of at most `NODE_CAPACITY`, tiling by center x
/// then center y.
fn str_pack(mut items: Vec<(usize, Rect)>) -> Vec<Vec<(usize, Rect)>> {
    let n = items.len();
    let pages = n.div_ceil(NODE_CAPACITY);
    let slices = (pages as f64).sqrt().ceil().max(1.0) as usize;
    let per_slice = slices * NODE_CAPACITY;
    items.sort_by(|a, b| a.1.center().x.total_cmp(&b.1.center().x).then(a.0.cmp(&b.0)));
    let mut groups = Vec::with_capacity(pages);
    for slice in items.chunks_mut(per_slice) {
        slice.sort_by(|a, b| a.1.center().y.total_cmp(&b.1.center().y).then(a.0.cmp(&b.0)));
        groups.extend(slice.chunks(NODE_CAPACITY).map(<[_]>::to_vec));
    }
    groups
}

#[derive(Debug, PartialEq)]
struct Candidate {
    dist: f64,
    /// Nodes (0) are expanded before entries (1) at equal distance.
    rank: u8,
    index: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed: BinaryHeap is a max-heap
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.rank.cmp(&self.rank))
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl SpatialIndex {
    /// Builds the index; object ids are positions in `boxes`.
    pub fn new(boxes: &[Rect]) -> Self {
        let mut index = SpatialIndex {
            boxes: boxes.to_vec(),
            nodes: Vec::new(),
            root: None,
        };
        if boxes.is_empty() {
            return index;
        }
        let mut level: Vec<(usize, Rect)> = str_pack(boxes.iter().copied().enumerate().collect())
            .into_iter()
            .map(|group| {
                let bounds = hull(group.iter().map(|(_, r)| r));
                let ids = group.into_iter().map(|(id, _)| id).collect();
                index.push(Node { bounds, kind: NodeKind::Leaf(ids) })
            })
            .collect();
        while level.len() > 1 {
            level = str_pack(level)
                .into_iter()
                .map(|group| {
                    let bounds = hull(group.iter().map(|(_, r)| r));
                    let children = group.into_iter().map(|(i, _)| i).collect();
                    index.push(Node { bounds, kind: NodeKind::Inner(children) })
                })
                .collect();
        }
        index.root = Some(level[0].0);
        index
    }

    fn push(&mut self, node: Node) -> (usize, Rect) {
        let bounds = node.bounds;
        self.nodes.push(node);
        (self.nodes.len() - 1, bounds)
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn rect(&self, id: usize) -> Rect {
        self.boxes[id]
    }

    /// The `k` objects closest to `query` by box distance, nearest first,
    /// ties broken by id. `exclude` is skipped (typically the query object).
    pub fn nearest(&self, query: &Rect, k: usize, exclude: Option<usize>) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(k.min(self.len()));
        let Some(root) = self.root else { return out };
        if k == 0 {
            return out;
        }
        let mut heap = BinaryHeap::new();
        heap.push(Candidate {
            dist: box_distance(query, &self.nodes[root].bounds),
            rank: 0,
            index: root,
        });
        while let Some(c) = heap.pop() {
            if c.rank == 1 {
                out.push((c.index, c.dist));
                if out.len() == k {
                    break;
                }
                continue;
            }
            match &self.nodes[c.index].kind {
                NodeKind::Leaf(ids) => {
                    for &id in ids.iter().filter(|&&id| Some(id) != exclude) {
                        heap.push(Candidate {
                            dist: box_distance(query, &self.boxes[id]),
                            rank: 1,
                            index: id,
                        });
                    }
                }
                NodeKind::Inner(children) => {
                    for &child in children {
                        heap.push(Candidate {
                            dist: box_distance(query, &self.nodes[child].bounds),
                            rank: 0,
                            index: child,
                        });
                    }
                }
            }
        }
        out
    }

    fn collect(&self, node_pass: impl Fn(&Rect) -> bool, entry_pass: impl Fn(&Rect) -> bool) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack: Vec<usize> = self.root.into_iter().collect();
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            if !node_pass(&node.bounds) {
                continue;
            }
            match &node.kind {
                NodeKind::Leaf(ids) => out.extend(ids.iter().copied().filter(|&id| entry_pass(&self.boxes[id]))),
                NodeKind::Inner(children) => stack.extend(children),
            }
        }
        out.sort_unstable();
        out
    }

    /// Ids of boxes meeting `r` (closed intersection), ascending.
    pub fn intersecting(&self, r: &Rect) -> Vec<usize> {
        self.collect(|b| b.intersection(r).is_some(), |b| b.intersection(r).is_some())
    }

    /// Ids of boxes whose interior the open segment passes through, ascending.
    pub fn crossed_by(&self, seg: &Segment2D) -> Vec<usize> {
        let bounds = seg.bounds();
        self.collect(
            |b| b.intersection(&bounds).is_some(),
            |b| segment_crosses_interior(seg, b),
        )
    }
}
