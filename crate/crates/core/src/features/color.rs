//! sRGB ↔ CIELAB conversion, the CIE76 color difference, and parsing of the
//! color strings browsers report in computed styles.

use serde::{Deserialize, Serialize};

/// 8-bit sRGB triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Srgb(pub [u8; 3]);

impl Srgb {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Srgb([r, g, b])
    }
}

/// CIE 1976 L*a*b* under D65, 2° observer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabColor {
    #[serde(rename = "L")]
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        LabColor { l, a, b }
    }
}

// D65 reference white.
const WHITE_X: f64 = 0.95047;
const WHITE_Y: f64 = 1.0;
const WHITE_Z: f64 = 1.08883;

// Linear sRGB → XYZ (D65).
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

fn linearize(channel: u8) -> f64 {
    let c = f64::from(channel) / 255.0;
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

pub fn srgb_to_lab(c: Srgb) -> LabColor {
    let rgb = c.0.map(linearize);
    let xyz: [f64; 3] =
        std::array::from_fn(|i| RGB_TO_XYZ[i].iter().zip(&rgb).map(|(m, v)| m * v).sum());
    let fx = lab_f(xyz[0] / WHITE_X);
    let fy = lab_f(xyz[1] / WHITE_Y);
    let fz = lab_f(xyz[2] / WHITE_Z);
    LabColor {
        l: (116.0 * fy - 16.0).max(0.0),
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

/// CIE76 ΔE: Euclidean distance in Lab.
pub fn delta_e76(p: &LabColor, q: &LabColor) -> f64 {
    let (dl, da, db) = (p.l - q.l, p.a - q.a, p.b - q.b);
    (dl * dl + da * da + db * db).sqrt()
}

/// The sixteen basic HTML color keywords.
pub const NAMED_COLORS: [(&str, Srgb); 16] = [
    ("black", Srgb::new(0, 0, 0)),
    ("silver", Srgb::new(192, 192, 192)),
    ("gray", Srgb::new(128, 128, 128)),
    ("white", Srgb::new(255, 255, 255)),
    ("maroon", Srgb::new(128, 0, 0)),
    ("red", Srgb::new(255, 0, 0)),
    ("purple", Srgb::new(128, 0, 128)),
    ("fuchsia", Srgb::new(255, 0, 255)),
    ("green", Srgb::new(0, 128, 0)),
    ("lime", Srgb::new(0, 255, 0)),
    ("olive", Srgb::new(128, 128, 0)),
    ("yellow", Srgb::new(255, 255, 0)),
    ("navy", Srgb::new(0, 0, 128)),
    ("blue", Srgb::new(0, 0, 255)),
    ("teal", Srgb::new(0, 128, 128)),
    ("aqua", Srgb::new(0, 255, 255)),
];

fn parse_channel(s: &str) -> Option<u8> {
    let s = s.trim();
    let v = if let Some(pct) = s.strip_suffix('%') {
        pct.trim().parse::<f64>().ok()? * 2.55
    } else {
        s.parse::<f64>().ok()?
    };
    v.is_finite().then(|| v.round().clamp(0.0, 255.0) as u8)
}

fn parse_hex(hex: &str) -> Option<Srgb> {
    if !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let nibble = |i: usize| u8::from_str_radix(&hex[i..=i], 16).ok().map(|v| v * 17);
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    match hex.len() {
        3 | 4 => Some(Srgb::new(nibble(0)?, nibble(1)?, nibble(2)?)),
        6 | 8 => Some(Srgb::new(byte(0)?, byte(2)?, byte(4)?)),
        _ => None,
    }
}

/// Parses `rgb()`/`rgba()` (comma or space separated), hex and the basic
/// keywords. Alpha is ignored. Anything else (`currentcolor`, `color(...)`,
/// garbage) yields `None`.
pub fn parse_css_color(value: &str) -> Option<Srgb> {
    let v = value.trim().to_ascii_lowercase();
    if let Some(hex) = v.strip_prefix('#') {
        return parse_hex(hex);
    }
    if let Some(body) = v
        .strip_prefix("rgba(")
        .or_else(|| v.strip_prefix("rgb("))
        .and_then(|rest| rest.strip_suffix(')'))
    {
        let color_part = body.split('/').next()?;
        let parts: Vec<&str> = if color_part.contains(',') {
            color_part.split(',').collect()
        } else {
            color_part.split_whitespace().collect()
        };
        if parts.len() < 3 || parts.len() > 4 {
            return None;
        }
        return Some(Srgb::new(
            parse_channel(parts[0])?,
            parse_channel(parts[1])?,
            parse_channel(parts[2])?,
        ));
    }
    NAMED_COLORS
        .iter()
        .find(|(name, _)| *name == v)
        .map(|(_, c)| *c)
}
