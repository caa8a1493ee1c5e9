//! Fixture builders and independent oracles shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::rngs::StdRng;
use rand::Rng;

use pageseg_core::snapshot::{default_style, NodeKind, Viewport, TEXT_TAG};
use pageseg_core::{PageSnapshot, RawNode, Rect};

pub const WHITE: [u8; 3] = [255, 255, 255];
pub const BLACK: [u8; 3] = [0, 0, 0];
pub const YELLOW: [u8; 3] = [255, 255, 0];

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures")
}

fn css(c: [u8; 3]) -> String {
    format!("rgb({}, {}, {})", c[0], c[1], c[2])
}

/// Paints a synthetic page and records the nodes a browser would report.
pub struct PageBuilder {
    pub img: RgbImage,
    pub nodes: Vec<RawNode>,
    pub url: String,
}

impl PageBuilder {
    pub fn new(w: u32, h: u32, bg: [u8; 3]) -> Self {
        PageBuilder {
            img: RgbImage::from_pixel(w, h, Rgb(bg)),
            nodes: Vec::new(),
            url: "http://localhost/fixture.html".into(),
        }
    }

    pub fn fill(&mut self, r: Rect, c: [u8; 3]) {
        let x1 = (r.right() as u32).min(self.img.width());
        let y1 = (r.bottom() as u32).min(self.img.height());
        for y in r.y.max(0.0) as u32..y1 {
            for x in r.x.max(0.0) as u32..x1 {
                self.img.put_pixel(x, y, Rgb(c));
            }
        }
    }

    /// Element that paints a background; not itself a visual object.
    pub fn block(&mut self, xpath: &str, r: Rect, bg: [u8; 3]) {
        self.fill(r, bg);
        let mut style = default_style();
        style.insert("background-color".into(), css(bg));
        self.push(xpath, "DIV", NodeKind::Element, None, r, style, false);
    }

    /// Text node plus glyph-like strokes painted in its color.
    pub fn text(&mut self, xpath: &str, r: Rect, fg: [u8; 3], content: &str) {
        let mut x = r.x + 1.0;
        while x + 5.0 <= r.right() {
            self.fill(Rect::new(x, r.y + 3.0, 5.0, (r.h - 6.0).max(1.0)), fg);
            x += 8.0;
        }
        let mut style = default_style();
        style.insert("color".into(), css(fg));
        self.push(xpath, TEXT_TAG, NodeKind::TextNode, Some(content.into()), r, style, true);
    }

    pub fn image(&mut self, xpath: &str, r: Rect, c: [u8; 3]) {
        self.fill(r, c);
        self.push(xpath, "IMG", NodeKind::Element, None, r, default_style(), true);
    }

    pub fn input(&mut self, xpath: &str, r: Rect, fg: [u8; 3], bg: [u8; 3]) {
        self.fill(r, bg);
        let mut style = default_style();
        style.insert("color".into(), css(fg));
        style.insert("background-color".into(), css(bg));
        self.push(xpath, "INPUT", NodeKind::Element, None, r, style, true);
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        xpath: &str,
        tag: &str,
        kind: NodeKind,
        text: Option<String>,
        bounds: Rect,
        style: BTreeMap<String, String>,
        is_leaf: bool,
    ) {
        self.nodes.push(RawNode {
            xpath: xpath.into(),
            tag: tag.into(),
            kind,
            text,
            bounds,
            style,
            is_leaf,
        });
    }

    pub fn build(self) -> PageSnapshot {
        PageSnapshot {
            url: self.url,
            viewport: Viewport::default(),
            device_pixel_ratio: 1.0,
            nodes: self.nodes,
            screenshot: self.img,
            captured_at: Some("2024-01-01T00:00:00Z".into()),
            skipped_iframes: 0,
        }
    }
}

fn hull(rects: &[Rect]) -> Rect {
    rects.iter().copied().reduce(|a, b| a.union(&b)).unwrap()
}

/// Three side-by-side colored blocks with 40 px gutters. Each holds five
/// left-aligned black text lines. Truth is the hull of each block's lines.
pub fn three_block_page() -> (PageSnapshot, Vec<Rect>) {
    let colors = [[230, 240, 255], [255, 235, 215], [220, 250, 220]];
    let mut page = PageBuilder::new(1000, 400, WHITE);
    page.url = "http://localhost/three-blocks.html".into();
    let mut truth = Vec::new();
    for (b, color) in colors.iter().enumerate() {
        let bx = 40.0 + b as f64 * 320.0;
        let block = Rect::new(bx, 40.0, 280.0, 200.0);
        page.block(&format!("/html[1]/body[1]/div[{}]", b + 1), block, *color);
        let mut lines = Vec::new();
        for l in 0..5 {
            let width = [240.0, 200.0, 232.0, 176.0, 216.0][l];
            let r = Rect::new(bx + 16.0, 56.0 + l as f64 * 20.0, width, 16.0);
            page.text(
                &format!("/html[1]/body[1]/div[{}]/p[{}]/text()[1]", b + 1, l + 1),
                r,
                BLACK,
                "lorem ipsum",
            );
            lines.push(r);
        }
        truth.push(hull(&lines));
    }
    (page.build(), truth)
}

/// Nav bar of four bold items on yellow with a 2 px black border, then two
/// large headings each followed by a paragraph, on a white 1366-wide page.
/// Returns the snapshot and the expected grouping as xpath sets.
pub fn nav_headings_page() -> (PageSnapshot, Vec<Vec<String>>) {
    let mut page = PageBuilder::new(1366, 420, WHITE);
    page.url = "http://localhost/nav-headings.html".into();
    // Border box, then yellow content with 4 px padding so item rings sit
    // on the nav's own background.
    let nav = Rect::new(8.0, 8.0, 1350.0, 30.0);
    page.block("/html[1]/body[1]/div[1]", nav, BLACK);
    page.fill(Rect::new(10.0, 10.0, 1346.0, 26.0), YELLOW);
    let items = [("Home", 44.0), ("News", 42.0), ("FAQ", 32.0), ("Contact", 62.0)];
    let slot = 1346.0 / 4.0;
    let mut nav_xpaths = Vec::new();
    for (i, (label, w)) in items.iter().enumerate() {
        let cx = 10.0 + slot * (i as f64 + 0.5);
        let r = Rect::new((cx - w / 2.0).round(), 14.0, *w, 18.0);
        let xp = format!("/html[1]/body[1]/div[1]/div[{}]/text()[1]", i + 1);
        page.text(&xp, r, BLACK, label);
        nav_xpaths.push(xp);
    }
    let mut groups = vec![nav_xpaths];
    // Heading padding 8vh top / 2vh bottom at 768 px viewport, font 5vw.
    let mut y = 38.0;
    for (k, (title, tw)) in [("Resources", 340.0), ("About Us", 290.0)].iter().enumerate() {
        let head_xp = format!("/html[1]/body[1]/div[{}]/text()[1]", 2 + 2 * k);
        let para_xp = format!("/html[1]/body[1]/div[{}]/text()[1]", 3 + 2 * k);
        y += 61.0;
        page.text(&head_xp, Rect::new(8.0, y, *tw, 78.0), BLACK, title);
        y += 78.0 + 15.0;
        page.text(
            &para_xp,
            Rect::new(8.0, y, 412.0, 18.0),
            BLACK,
            "Lorem ipsum dolor sit amet, consectetur adipiscing ...",
        );
        y += 18.0;
        groups.push(vec![head_xp, para_xp]);
    }
    (page.build(), groups)
}

const PALETTE: [[u8; 3]; 6] = [
    [255, 255, 255],
    [235, 240, 250],
    [250, 235, 220],
    [40, 40, 60],
    [220, 250, 225],
    [255, 255, 0],
];

/// Random multi-block page with text, images and form controls. Every
/// object stays at least 4 px clear of the image border.
pub fn random_page(rng: &mut StdRng, max_blocks: usize) -> PageSnapshot {
    let cols = rng.gen_range(1..=3usize);
    let rows = rng.gen_range(1..=max_blocks.div_ceil(cols).max(1));
    let col_w = rng.gen_range(160..=320) as f64;
    let gutter = rng.gen_range(8..=48) as f64;
    let w = (cols as f64 * (col_w + gutter) + gutter) as u32;
    let mut page = PageBuilder::new(w, 8, WHITE);
    let mut blocks = Vec::new();
    let mut y = gutter;
    for r in 0..rows {
        let h = rng.gen_range(40..=160) as f64;
        for c in 0..cols {
            blocks.push((r, c, Rect::new(gutter + c as f64 * (col_w + gutter), y, col_w, h)));
        }
        y += h + gutter;
    }
    page.img = RgbImage::from_pixel(w, y as u32 + 8, Rgb(WHITE));
    for (r, c, rect) in blocks {
        let bg = PALETTE[rng.gen_range(0..PALETTE.len())];
        let base = format!("/html[1]/body[1]/div[{}]/div[{}]", r + 1, c + 1);
        page.block(&base, rect, bg);
        let fg = if bg == PALETTE[3] { WHITE } else { BLACK };
        let centered = rng.gen_bool(0.3);
        let mut ly = rect.y + 6.0;
        let mut i = 0;
        while ly + 16.0 <= rect.bottom() - 6.0 {
            i += 1;
            let lw = rng.gen_range(24..=(col_w as i64 - 12)) as f64;
            let lx = if centered { rect.x + ((col_w - lw) / 2.0).floor() } else { rect.x + 6.0 };
            let lr = Rect::new(lx, ly, lw, 16.0);
            match rng.gen_range(0..10) {
                0 => page.image(&format!("{base}/img[{i}]"), Rect::new(lx, ly, 16.0 + lw / 4.0, 16.0), [200, 30, 30]),
                1 => page.input(&format!("{base}/input[{i}]"), Rect::new(lx, ly, lw.min(120.0), 16.0), BLACK, WHITE),
                _ => page.text(&format!("{base}/p[{i}]/text()[1]"), lr, fg, "text"),
            }
            ly += 16.0 + rng.gen_range(2..=8) as f64;
        }
    }
    page.build()
}

/// Columns of text blocks holding roughly `n` text objects in total.
pub fn dense_page(n: usize) -> PageSnapshot {
    let per_block = 10;
    let blocks = n.div_ceil(per_block);
    let cols = 4;
    let rows = blocks.div_ceil(cols);
    let mut page = PageBuilder::new(1366, (rows * 240 + 40) as u32, WHITE);
    let mut made = 0;
    for b in 0..blocks {
        let (r, c) = (b / cols, b % cols);
        let rect = Rect::new(20.0 + c as f64 * 335.0, 40.0 + r as f64 * 240.0, 300.0, 200.0);
        page.block(&format!("/html[1]/body[1]/div[{}]", b + 1), rect, PALETTE[b % PALETTE.len()]);
        for l in 0..per_block {
            if made == n {
                break;
            }
            let w = 120.0 + ((b * 7 + l * 13) % 150) as f64;
            let lr = Rect::new(rect.x + 8.0, rect.y + 2.0 + l as f64 * 19.0, w, 16.0);
            let fg = if b % PALETTE.len() == 3 { WHITE } else { BLACK };
            page.text(&format!("/html[1]/body[1]/div[{}]/p[{}]/text()[1]", b + 1, l + 1), lr, fg, "row");
            made += 1;
        }
    }
    page.build()
}

/// Shifts every box by an integer offset and pads the screenshot with the
/// page background so each pixel keeps its color relative to the boxes.
pub fn translate(s: &PageSnapshot, dx: u32, dy: u32) -> PageSnapshot {
    let bg = *s.screenshot.get_pixel(0, 0);
    let mut img = RgbImage::from_pixel(s.screenshot.width() + dx, s.screenshot.height() + dy, bg);
    image::imageops::replace(&mut img, &s.screenshot, i64::from(dx), i64::from(dy));
    let mut out = s.clone();
    out.screenshot = img;
    for n in &mut out.nodes {
        n.bounds = n.bounds.translate(f64::from(dx), f64::from(dy));
    }
    out
}

// ---------------------------------------------------------------- oracles

/// Reference Lab values of the 16 basic colors (D65, 2° observer), from an
/// independent colour-science implementation.
pub const LAB_REFERENCE: [(&str, [f64; 3]); 16] = [
    ("black", [0.0, 0.0, 0.0]),
    ("silver", [77.7044, -0.0020, 0.0038]),
    ("gray", [53.5850, -0.0015, 0.0028]),
    ("white", [100.0, -0.0025, 0.0047]),
    ("maroon", [25.5354, 48.0450, 38.0571]),
    ("red", [53.2406, 80.0923, 67.2028]),
    ("purple", [29.7842, 58.9271, -36.4848]),
    ("fuchsia", [60.3235, 98.2331, -60.8210]),
    ("green", [46.2277, -51.6987, 49.8971]),
    ("lime", [87.7351, -86.1830, 83.1797]),
    ("olive", [51.8691, -12.9300, 56.6747]),
    ("yellow", [97.1395, -21.5547, 94.4781]),
    ("navy", [12.9712, 47.5011, -64.7004]),
    ("blue", [32.2957, 79.1856, -107.8573]),
    ("teal", [48.2541, -28.8481, -8.4740]),
    ("aqua", [91.1133, -48.0906, -14.1263]),
];

/// Canonical form of a partition: ascending members, ordered by first.
pub fn canonical(mut parts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    for p in &mut parts {
        p.sort_unstable();
    }
    parts.retain(|p| !p.is_empty());
    parts.sort();
    parts
}

/// Connected components of the `d(a, b) <= 1` graph via union-find.
pub fn union_find_components(n: usize, d: impl Fn(usize, usize) -> f64) -> Vec<Vec<usize>> {
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for a in 0..n {
        for b in a + 1..n {
            if d(a, b) <= 1.0 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for x in 0..n {
        let r = find(&mut parent, x);
        groups.entry(r).or_default().push(x);
    }
    canonical(groups.into_values().collect())
}

fn q(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Squared gap between two closed boxes, exactly.
fn gap_sq(a: &Rect, b: &Rect) -> BigRational {
    let axis = |a0: f64, a1: f64, b0: f64, b1: f64| {
        let g = if b0 > a1 {
            q(b0) - q(a1)
        } else if a0 > b1 {
            q(a0) - q(b1)
        } else {
            BigRational::zero()
        };
        g.clone() * g
    };
    axis(a.x, a.right(), b.x, b.right()) + axis(a.y, a.bottom(), b.y, b.bottom())
}

/// Closest-point pair between two boxes, or centers when their interiors
/// overlap; when projections share a stretch the segment sits at its middle.
fn sight_line(a: &Rect, b: &Rect) -> [[BigRational; 2]; 2] {
    let two = BigRational::from_integer(2.into());
    let overlap_x = a.x < b.right() && b.x < a.right();
    let overlap_y = a.y < b.bottom() && b.y < a.bottom();
    if overlap_x && overlap_y {
        let c = |r: &Rect| [(q(r.x) + q(r.right())) / two.clone(), (q(r.y) + q(r.bottom())) / two.clone()];
        return [c(a), c(b)];
    }
    let axis = |a0: f64, a1: f64, b0: f64, b1: f64| -> (BigRational, BigRational) {
        let lo = a0.max(b0);
        let hi = a1.min(b1);
        if lo < hi {
            let m = (q(lo) + q(hi)) / two.clone();
            (m.clone(), m)
        } else if a1 <= b0 {
            (q(a1), q(b0))
        } else {
            (q(a0), q(b1))
        }
    };
    let (sx, ex) = axis(a.x, a.right(), b.x, b.right());
    let (sy, ey) = axis(a.y, a.bottom(), b.y, b.bottom());
    [[sx, sy], [ex, ey]]
}

/// Liang–Barsky clip of the open segment against the open box, in exact
/// rationals: true when some interior parameter lands strictly inside.
fn open_segment_hits_open_box(seg: &[[BigRational; 2]; 2], r: &Rect) -> bool {
    let mut t_lo = BigRational::zero();
    let mut t_hi = BigRational::from_integer(1.into());
    let bounds = [(q(r.x), q(r.right())), (q(r.y), q(r.bottom()))];
    for axis in 0..2 {
        let p = seg[0][axis].clone();
        let d = seg[1][axis].clone() - p.clone();
        let (lo, hi) = bounds[axis].clone();
        if d.is_zero() {
            if !(lo < p && p < hi) {
                return false;
            }
            continue;
        }
        let mut t0 = (lo - p.clone()) / d.clone();
        let mut t1 = (hi - p) / d.clone();
        if d.is_negative() {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_lo {
            t_lo = t0;
        }
        if t1 < t_hi {
            t_hi = t1;
        }
    }
    t_lo < t_hi
}

/// Brute-force line-of-sight adjacency: exact k-nearest by squared gap (ties
/// by id), then every candidate checked against every other candidate.
pub fn brute_adjacency(boxes: &[Rect], k: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = boxes.len();
    let mut knn = Vec::with_capacity(n);
    let mut adj = Vec::with_capacity(n);
    for o in 0..n {
        let mut others: Vec<(BigRational, usize)> =
            (0..n).filter(|&m| m != o).map(|m| (gap_sq(&boxes[o], &boxes[m]), m)).collect();
        others.sort();
        let nearest: Vec<usize> = others.into_iter().take(k).map(|(_, m)| m).collect();
        let visible = nearest
            .iter()
            .copied()
            .filter(|&cand| {
                let seg = sight_line(&boxes[o], &boxes[cand]);
                let degenerate = seg[0] == seg[1];
                degenerate
                    || !nearest
                        .iter()
                        .any(|&m| m != cand && open_segment_hits_open_box(&seg, &boxes[m]))
            })
            .collect();
        knn.push(nearest);
        adj.push(visible);
    }
    (knn, adj)
}

/// Random layout on an integer or half-integer grid, overlaps allowed.
pub fn random_layout(rng: &mut StdRng, n: usize) -> Vec<Rect> {
    let half = rng.gen_bool(0.3);
    let scale = if half { 0.5 } else { 1.0 };
    (0..n)
        .map(|_| {
            let x = rng.gen_range(0..400) as f64 * scale;
            let y = rng.gen_range(0..400) as f64 * scale;
            let w = rng.gen_range(1..80) as f64 * scale;
            let h = rng.gen_range(1..40) as f64 * scale;
            Rect::new(x, y, w, h)
        })
        .collect()
}

/// Raster evaluation: areas counted cell by cell on a grid of `1/res` px.
pub struct RasterScores {
    pub tp: f64,
    pub fp: f64,
    pub fn_: f64,
}

struct Mask {
    x0: i64,
    y0: i64,
    w: i64,
    h: i64,
    bits: Vec<bool>,
}

impl Mask {
    fn of(r: &Rect, res: f64) -> Mask {
        let x0 = (r.x * res).round() as i64;
        let y0 = (r.y * res).round() as i64;
        let w = (r.w * res).round() as i64;
        let h = (r.h * res).round() as i64;
        Mask { x0, y0, w, h, bits: vec![true; (w * h).max(0) as usize] }
    }

    fn has(&self, x: i64, y: i64) -> bool {
        x >= self.x0
            && y >= self.y0
            && x < self.x0 + self.w
            && y < self.y0 + self.h
            && self.bits[((y - self.y0) * self.w + (x - self.x0)) as usize]
    }

    fn count(&self) -> i64 {
        self.bits.iter().filter(|&&b| b).count() as i64
    }

    fn shared(&self, other: &Mask) -> i64 {
        let mut c = 0;
        for y in self.y0..self.y0 + self.h {
            for x in self.x0..self.x0 + self.w {
                if self.has(x, y) && other.has(x, y) {
                    c += 1;
                }
            }
        }
        c
    }

    fn centroid(&self) -> (f64, f64) {
        (self.x0 as f64 + self.w as f64 / 2.0, self.y0 as f64 + self.h as f64 / 2.0)
    }
}

fn raster_partner(m: &Mask, others: &[Mask]) -> Option<usize> {
    let mut best: Option<(usize, i64)> = None;
    for (i, o) in others.iter().enumerate() {
        let s = m.shared(o);
        if s > 0 && best.is_none_or(|(_, bs)| s > bs) {
            best = Some((i, s));
        }
    }
    if let Some((i, _)) = best {
        return Some(i);
    }
    let (cx, cy) = m.centroid();
    let mut nearest: Option<(usize, f64)> = None;
    for (i, o) in others.iter().enumerate() {
        let (ox, oy) = o.centroid();
        let d = (cx - ox).powi(2) + (cy - oy).powi(2);
        if nearest.is_none_or(|(_, bd)| d < bd) {
            nearest = Some((i, d));
        }
    }
    nearest.map(|(i, _)| i)
}

pub fn raster_scores(output: &[Rect], truth: &[Rect], res: f64) -> RasterScores {
    let out: Vec<Mask> = output.iter().map(|r| Mask::of(r, res)).collect();
    let gt: Vec<Mask> = truth.iter().map(|r| Mask::of(r, res)).collect();
    let cell = 1.0 / (res * res);
    let (mut tp, mut fp, mut fn_) = (0i64, 0i64, 0i64);
    for m in &out {
        match raster_partner(m, &gt) {
            Some(g) => {
                let s = m.shared(&gt[g]);
                tp += s;
                fp += m.count() - s;
            }
            None => fp += m.count(),
        }
    }
    for g in &gt {
        match raster_partner(g, &out) {
            Some(o) => fn_ += g.count() - g.shared(&out[o]),
            None => fn_ += g.count(),
        }
    }
    RasterScores { tp: tp as f64 * cell, fp: fp as f64 * cell, fn_: fn_ as f64 * cell }
}

/// Random rectangle set on a grid of `1/res` px inside a 64 px canvas.
pub fn random_rects(rng: &mut StdRng, count: usize, res: f64) -> Vec<Rect> {
    let span = (64.0 * res) as i64;
    (0..count)
        .map(|_| {
            let x = rng.gen_range(0..span - 4);
            let y = rng.gen_range(0..span - 4);
            let w = rng.gen_range(1..=(span - x).min(24 * res as i64));
            let h = rng.gen_range(1..=(span - y).min(24 * res as i64));
            Rect::new(x as f64 / res, y as f64 / res, w as f64 / res, h as f64 / res)
        })
        .collect()
}
