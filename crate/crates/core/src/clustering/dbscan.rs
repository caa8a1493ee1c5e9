//! DBSCAN over a precomputed distance matrix.

use std::collections::VecDeque;

use super::DistanceMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Cluster(usize),
    Noise,
}

/// Classic DBSCAN. A point's neighborhood is every point within `eps`
/// (inclusive), itself included, and it is a core point when that
/// neighborhood holds at least `min_pts` points. Clusters are numbered in
/// order of their lowest-index core point.
pub fn dbscan(matrix: &DistanceMatrix, eps: f64, min_pts: usize) -> Vec<Label> {
    let n = matrix.len();
    let mut labels: Vec<Option<Label>> = vec![None; n];
    let region = |p: usize| -> Vec<usize> { (0..n).filter(|&q| matrix.get(p, q) <= eps).collect() };
    let mut next = 0;
    for p in 0..n {
        if labels[p].is_some() {
            continue;
        }
        let seeds = region(p);
        if seeds.len() < min_pts {
            labels[p] = Some(Label::Noise);
            continue;
        }
        let cluster = next;
        next += 1;
        labels[p] = Some(Label::Cluster(cluster));
        let mut queue: VecDeque<usize> = seeds.into_iter().filter(|&q| q != p).collect();
        while let Some(q) = queue.pop_front() {
            match labels[q] {
                Some(Label::Cluster(_)) => continue,
                Some(Label::Noise) => {
                    // border point: joins, but does not expand
                    labels[q] = Some(Label::Cluster(cluster));
                    continue;
                }
                None => labels[q] = Some(Label::Cluster(cluster)),
            }
            let reach = region(q);
            if reach.len() >= min_pts {
                queue.extend(reach.into_iter().filter(|&r| !matches!(labels[r], Some(Label::Cluster(_)))));
            }
        }
    }
    labels.into_iter().map(|l| l.expect("every point labelled")).collect()
}
