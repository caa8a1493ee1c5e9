use image::{Rgb, RgbImage};

use pageseg_core::Rect;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rgba {
    pub rgb: [u8; 3],
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlayStyle {
    pub fill: Rgba,
    pub border: Rgba,
    pub border_width: u32,
}

impl Default for OverlayStyle {
    fn default() -> Self {
        OverlayStyle {
            fill: Rgba { rgb: [255, 255, 0], alpha: 0.35 },
            border: Rgba { rgb: [0, 160, 0], alpha: 1.0 },
            border_width: 2,
        }
    }
}

fn blend(px: &mut Rgb<u8>, c: Rgba) {
    let a = c.alpha.clamp(0.0, 1.0);
    for (dst, src) in px.0.iter_mut().zip(c.rgb) {
        *dst = (a * f64::from(src) + (1.0 - a) * f64::from(*dst)).round() as u8;
    }
}

/// Pixel span `[x0, x1) × [y0, y1)` covering `r`, clipped to the image.
fn pixel_span(r: &Rect, img: &RgbImage) -> Option<(u32, u32, u32, u32)> {
    let x0 = r.x.floor().max(0.0) as u32;
    let y0 = r.y.floor().max(0.0) as u32;
    let x1 = (r.right().ceil().max(0.0) as u32).min(img.width());
    let y1 = (r.bottom().ceil().max(0.0) as u32).min(img.height());
    (x0 < x1 && y0 < y1).then_some((x0, y0, x1, y1))
}

/// Copy of `base` with every box filled translucently and outlined inside
/// its edges.
pub fn render(base: &RgbImage, boxes: &[Rect], style: &OverlayStyle) -> RgbImage {
    let mut img = base.clone();
    for r in boxes {
        let Some((x0, y0, x1, y1)) = pixel_span(r, &img) else { continue };
        let bw = style.border_width;
        for y in y0..y1 {
            for x in x0..x1 {
                let edge = x < x0 + bw || x + bw >= x1 || y < y0 + bw || y + bw >= y1;
                let c = if edge { style.border } else { style.fill };
                blend(img.get_pixel_mut(x, y), c);
            }
        }
    }
    img
}
