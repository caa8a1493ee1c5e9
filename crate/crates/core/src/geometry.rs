//! Axis-aligned rectangles and the small amount of planar geometry the
//! pipeline needs: gaps between boxes, closest-point segments and
//! segment/rectangle interior tests.

use serde::{Deserialize, Serialize};

/// A box in page pixels. `x`/`y` is the top-left corner.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A closed straight segment between two points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment2D {
    pub start: Point,
    pub end: Point,
}

impl Segment2D {
    pub fn length(&self) -> f64 {
        self.start.distance(&self.end)
    }

    pub fn is_degenerate(&self) -> bool {
        self.start == self.end
    }

    pub fn bounds(&self) -> Rect {
        Rect::from_corners(
            self.start.x.min(self.end.x),
            self.start.y.min(self.end.y),
            self.start.x.max(self.end.x),
            self.start.y.max(self.end.y),
        )
    }
}

impl Rect {
    pub const fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        Rect { x, y, w, h }
    }

    pub fn from_corners(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect::new(x0, y0, x1 - x0, y1 - y0)
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    #[inline]
    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    #[inline]
    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn center(&self) -> Point {
        Point::new(self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite()
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x + dx, self.y + dy, self.w, self.h)
    }

    /// Closed intersection. Returns `None` when the boxes do not meet at all;
    /// touching boxes yield a zero-area rectangle.
    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let x0 = self.x.max(other.x);
        let y0 = self.y.max(other.y);
        let x1 = self.right().min(other.right());
        let y1 = self.bottom().min(other.bottom());
        (x0 <= x1 && y0 <= y1).then(|| Rect::from_corners(x0, y0, x1, y1))
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        self.intersection(other).map_or(0.0, |r| r.area())
    }

    /// True when the open interiors share at least one point.
    pub fn interiors_overlap(&self, other: &Rect) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x >= self.x
            && other.y >= self.y
            && other.right() <= self.right()
            && other.bottom() <= self.bottom()
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect::from_corners(
            self.x.min(other.x),
            self.y.min(other.y),
            self.right().max(other.right()),
            self.bottom().max(other.bottom()),
        )
    }

    /// `self − other` as at most four disjoint rectangles (top band, bottom
    /// band, then left and right pieces of the middle band).
    pub fn difference(&self, other: &Rect) -> Vec<Rect> {
        let Some(cut) = self.intersection(other).filter(|r| r.area() > 0.0) else {
            return if self.area() > 0.0 { vec![*self] } else { Vec::new() };
        };
        let mut out = Vec::with_capacity(4);
        let mut push = |r: Rect| {
            if r.w > 0.0 && r.h > 0.0 {
                out.push(r);
            }
        };
        push(Rect::from_corners(self.x, self.y, self.right(), cut.y));
        push(Rect::from_corners(self.x, cut.bottom(), self.right(), self.bottom()));
        push(Rect::from_corners(self.x, cut.y, cut.x, cut.bottom()));
        push(Rect::from_corners(cut.right(), cut.y, self.right(), cut.bottom()));
        out
    }

    pub fn difference_area(&self, other: &Rect) -> f64 {
        self.difference(other).iter().map(Rect::area).fold(0.0, |a, b| a + b)
    }
}

/// Per-axis gap between two closed intervals, 0 when they overlap or touch.
#[inline]
fn axis_gap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (b0 - a1).max(a0 - b1).max(0.0)
}

/// Minimum Euclidean distance between two closed rectangles.
pub fn box_distance(a: &Rect, b: &Rect) -> f64 {
    let dx = axis_gap(a.x, a.right(), b.x, b.right());
    let dy = axis_gap(a.y, a.bottom(), b.y, b.bottom());
    (dx * dx + dy * dy).sqrt()
}

/// Endpoint coordinates on one axis: facing edges when the projections are
/// separated (touching counts as separated with a zero gap), otherwise the
/// midpoint of the shared projection for both ends.
fn axis_endpoints(a0: f64, a1: f64, b0: f64, b1: f64) -> (f64, f64) {
    if a1 <= b0 {
        (a1, b0)
    } else if b1 <= a0 {
        (a0, b1)
    } else {
        let mid = (a0.max(b0) + a1.min(b1)) / 2.0;
        (mid, mid)
    }
}

/// The minimum-distance line joining `a` to `b`, running from `a`'s
/// boundary to `b`'s. Boxes whose interiors overlap are joined center to
/// center.
pub fn min_distance_segment(a: &Rect, b: &Rect) -> Segment2D {
    if a.interiors_overlap(b) {
        return Segment2D {
            start: a.center(),
            end: b.center(),
        };
    }
    let (sx, ex) = axis_endpoints(a.x, a.right(), b.x, b.right());
    let (sy, ey) = axis_endpoints(a.y, a.bottom(), b.y, b.bottom());
    Segment2D {
        start: Point::new(sx, sy),
        end: Point::new(ex, ey),
    }
}

#[inline]
fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Open projection interval of the segment on one axis vs the open interval
/// of the rectangle. A segment perpendicular to the axis projects to a point.
#[inline]
fn projections_overlap(s0: f64, s1: f64, r0: f64, r1: f64) -> bool {
    let (lo, hi) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
    if lo == hi {
        r0 < lo && lo < r1
    } else {
        lo < r1 && r0 < hi
    }
}

/// Does the open segment (endpoints excluded) pass through the open interior
/// of `r`? Touching the boundary or running along an edge does not count.
///
/// Separating-axis test over the two box axes and the segment normal; only
/// products and comparisons are used, so results are exact on integer and
/// half-integer coordinates.
pub fn segment_crosses_interior(seg: &Segment2D, r: &Rect) -> bool {
    if seg.is_degenerate() || r.w <= 0.0 || r.h <= 0.0 {
        return false;
    }
    let (p, q) = (seg.start, seg.end);
    if !projections_overlap(p.x, q.x, r.x, r.right()) {
        return false;
    }
    if !projections_overlap(p.y, q.y, r.y, r.bottom()) {
        return false;
    }
    let corners = [
        Point::new(r.x, r.y),
        Point::new(r.right(), r.y),
        Point::new(r.right(), r.bottom()),
        Point::new(r.x, r.bottom()),
    ];
    let mut pos = false;
    let mut neg = false;
    for c in corners {
        let s = cross(p, q, c);
        pos |= s > 0.0;
        neg |= s < 0.0;
    }
    pos && neg
}
