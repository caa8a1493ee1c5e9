//! Per-object feature vectors: rendered geometry plus foreground and
//! background colors in Lab.
//!
//! Background color always comes from the screenshot (the mode of a thin
//! ring around the object), because computed styles only describe what was
//! declared, not what was painted. Foreground color comes from the computed
//! style for text and form controls and from the screenshot for images.

pub mod color;

use std::collections::HashMap;

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{ObjectKind, VisualObject};
use crate::geometry::Rect;
use crate::snapshot::PageSnapshot;
use color::srgb_to_lab;
pub use color::{delta_e76, LabColor, Srgb};

/// Width of the sampling band around an object.
pub const RING_THICKNESS: u32 = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FeatureError {
    #[error("region contains no pixels of the image")]
    EmptyRegion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub object_id: usize,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub fg: LabColor,
    pub bg: LabColor,
}

impl FeatureVector {
    pub fn bounds(&self) -> Rect {
        Rect::new(self.x, self.y, self.w, self.h)
    }
}

/// Half-open integer pixel rectangle `[x0, x1) × [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PixelRect {
    x0: i64,
    y0: i64,
    x1: i64,
    y1: i64,
}

impl PixelRect {
    /// Smallest pixel rectangle covering `r`.
    fn covering(r: &Rect) -> Self {
        PixelRect {
            x0: r.x.floor() as i64,
            y0: r.y.floor() as i64,
            x1: r.right().ceil() as i64,
            y1: r.bottom().ceil() as i64,
        }
    }

    fn clip(self, img: &RgbImage) -> Option<PixelRect> {
        let c = PixelRect {
            x0: self.x0.max(0),
            y0: self.y0.max(0),
            x1: self.x1.min(i64::from(img.width())),
            y1: self.y1.min(i64::from(img.height())),
        };
        (c.x0 < c.x1 && c.y0 < c.y1).then_some(c)
    }

    /// The band of `t` pixels surrounding `self`, as four disjoint strips.
    fn ring(self, t: i64) -> [PixelRect; 4] {
        let (ox0, oy0, ox1, oy1) = (self.x0 - t, self.y0 - t, self.x1 + t, self.y1 + t);
        [
            PixelRect { x0: ox0, y0: oy0, x1: ox1, y1: self.y0 },
            PixelRect { x0: ox0, y0: self.y1, x1: ox1, y1: oy1 },
            PixelRect { x0: ox0, y0: self.y0, x1: self.x0, y1: self.y1 },
            PixelRect { x0: self.x1, y0: self.y0, x1: ox1, y1: self.y1 },
        ]
    }
}

#[derive(Default, Clone, Copy)]
struct Bucket {
    count: u64,
    sum: [u64; 3],
}

/// Channel-quantized (32 levels) color histogram with per-bucket sums.
#[derive(Default)]
struct Histogram {
    buckets: HashMap<u16, Bucket>,
}

impl Histogram {
    fn add_region(&mut self, img: &RgbImage, r: PixelRect) {
        for y in r.y0..r.y1 {
            for x in r.x0..r.x1 {
                let p = img.get_pixel(x as u32, y as u32).0;
                let key = (u16::from(p[0] >> 3) << 10) | (u16::from(p[1] >> 3) << 5) | u16::from(p[2] >> 3);
                let b = self.buckets.entry(key).or_default();
                b.count += 1;
                for c in 0..3 {
                    b.sum[c] += u64::from(p[c]);
                }
            }
        }
    }

    /// Mean color of the most populated bucket; ties go to the lowest index.
    fn mode(&self) -> Option<Srgb> {
        let (_, b) = self
            .buckets
            .iter()
            .max_by(|(ka, a), (kb, b)| a.count.cmp(&b.count).then(kb.cmp(ka)))?;
        let mean = |c: usize| ((b.sum[c] as f64) / (b.count as f64)).round() as u8;
        Some(Srgb::new(mean(0), mean(1), mean(2)))
    }
}

fn mode_of(img: &RgbImage, regions: &[PixelRect]) -> Result<Srgb, FeatureError> {
    let mut hist = Histogram::default();
    for r in regions.iter().filter_map(|r| r.clip(img)) {
        hist.add_region(img, r);
    }
    hist.mode().ok_or(FeatureError::EmptyRegion)
}

/// Dominant color of the pixels of `img` covered by `r`.
pub fn region_color_mode(img: &RgbImage, r: &Rect) -> Result<Srgb, FeatureError> {
    mode_of(img, &[PixelRect::covering(r)])
}

/// Dominant color of the whole screenshot, the fallback background.
pub fn page_background(img: &RgbImage) -> Option<Srgb> {
    mode_of(
        img,
        &[PixelRect {
            x0: 0,
            y0: 0,
            x1: i64::from(img.width()),
            y1: i64::from(img.height()),
        }],
    )
    .ok()
}

fn ring_mode(img: &RgbImage, r: &Rect) -> Result<Srgb, FeatureError> {
    mode_of(img, &PixelRect::covering(r).ring(i64::from(RING_THICKNESS)))
}

/// Background color: mode of the ring around the object, or of the whole
/// page when the ring falls entirely outside the image.
pub fn background_color(obj: &VisualObject, img: &RgbImage) -> LabColor {
    background_with_fallback(obj, img, || page_background(img))
}

fn background_with_fallback(
    obj: &VisualObject,
    img: &RgbImage,
    fallback: impl FnOnce() -> Option<Srgb>,
) -> LabColor {
    let rgb = ring_mode(img, &obj.bounds)
        .ok()
        .or_else(fallback)
        .unwrap_or(Srgb::new(255, 255, 255));
    srgb_to_lab(rgb)
}

/// Foreground color: computed style `color` for text and form controls,
/// interior mode for images. An unparsable style color falls back to the
/// interior mode.
pub fn foreground_color(obj: &VisualObject, _snapshot: &PageSnapshot, img: &RgbImage) -> LabColor {
    let styled = match obj.kind {
        ObjectKind::Text | ObjectKind::Interactive => obj.fg_css,
        ObjectKind::Image => None,
    };
    let rgb = styled
        .or_else(|| region_color_mode(img, &obj.bounds).ok())
        .unwrap_or(Srgb::new(0, 0, 0));
    srgb_to_lab(rgb)
}

/// One feature vector per object, index-aligned with `objects`.
pub fn build_features(objects: &[VisualObject], snapshot: &PageSnapshot) -> Vec<FeatureVector> {
    let img = &snapshot.screenshot;
    let mut page_bg: Option<Option<Srgb>> = None;
    objects
        .iter()
        .map(|o| {
            let bg = background_with_fallback(o, img, || {
                *page_bg.get_or_insert_with(|| page_background(img))
            });
            FeatureVector {
                object_id: o.id,
                x: o.bounds.x,
                y: o.bounds.y,
                w: o.bounds.w,
                h: o.bounds.h,
                fg: foreground_color(o, snapshot, img),
                bg,
            }
        })
        .collect()
}
