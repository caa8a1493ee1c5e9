//! Serialized rendering facts captured from a browser.
//!
//! A snapshot directory holds `snapshot.json` and a lossless full-page
//! `screenshot.png`. Everything downstream of capture reads only this.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use image::RgbImage;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::geometry::Rect;

pub const MANIFEST_FILE: &str = "snapshot.json";
pub const SCREENSHOT_FILE: &str = "screenshot.png";
pub const TEXT_TAG: &str = "#TEXT";

/// Computed-style keys every node must carry.
pub const REQUIRED_STYLE_KEYS: [&str; 6] = [
    "color",
    "background-color",
    "background-image",
    "visibility",
    "display",
    "opacity",
];

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("screenshot not found at {0}")]
    MissingScreenshot(PathBuf),
    #[error("schema violation at `{field}`: {reason}")]
    SchemaViolation { field: String, reason: String },
    #[error("duplicate xpath {0}")]
    DuplicateXpath(String),
    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl SnapshotError {
    fn schema(field: impl Into<String>, reason: impl Into<String>) -> Self {
        SnapshotError::SchemaViolation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        SnapshotError::IoFailure {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    TextNode,
    Element,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawNode {
    pub xpath: String,
    pub tag: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(rename = "box")]
    pub bounds: Rect,
    pub style: BTreeMap<String, String>,
    pub is_leaf: bool,
}

impl RawNode {
    pub fn style(&self, key: &str) -> Option<&str> {
        self.style.get(key).map(String::as_str)
    }

    /// Lower-cased element name; text nodes report `#text`.
    pub fn tag_lower(&self) -> String {
        self.tag.to_ascii_lowercase()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Viewport {
    pub w: u32,
    pub h: u32,
}

impl Default for Viewport {
    fn default() -> Self {
        Viewport { w: 1366, h: 768 }
    }
}

/// A fully validated page capture.
#[derive(Debug, Clone, PartialEq)]
pub struct PageSnapshot {
    pub url: String,
    pub viewport: Viewport,
    pub device_pixel_ratio: f64,
    pub nodes: Vec<RawNode>,
    pub screenshot: RgbImage,
    /// RFC 3339 capture time, when recorded.
    pub captured_at: Option<String>,
    /// Number of iframes whose contents were not extracted.
    pub skipped_iframes: u32,
}

/// On-disk form of `snapshot.json`.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    url: String,
    viewport: Viewport,
    dpr: f64,
    nodes: Vec<RawNode>,
    screenshot: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    captured_at: Option<String>,
    #[serde(default)]
    skipped_iframes: u32,
}

impl PageSnapshot {
    /// Document rectangle, i.e. the screenshot extent.
    pub fn document_rect(&self) -> Rect {
        Rect::new(
            0.0,
            0.0,
            f64::from(self.screenshot.width()),
            f64::from(self.screenshot.height()),
        )
    }

    /// Checks every structural invariant of a snapshot.
    pub fn validate(&self) -> Result<(), SnapshotError> {
        if self.device_pixel_ratio != 1.0 {
            return Err(SnapshotError::schema(
                "dpr",
                format!("must be 1.0, found {}", self.device_pixel_ratio),
            ));
        }
        if self.viewport.w == 0 || self.viewport.h == 0 {
            return Err(SnapshotError::schema("viewport", "dimensions must be positive"));
        }
        let doc = self.document_rect();
        let mut seen = HashSet::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let field = |name: &str| format!("nodes[{i}].{name}");
            if node.xpath.is_empty() {
                return Err(SnapshotError::schema(field("xpath"), "empty"));
            }
            if !seen.insert(node.xpath.as_str()) {
                return Err(SnapshotError::DuplicateXpath(node.xpath.clone()));
            }
            if node.kind == NodeKind::TextNode {
                if node.tag != TEXT_TAG {
                    return Err(SnapshotError::schema(
                        field("tag"),
                        format!("text nodes must be tagged {TEXT_TAG}"),
                    ));
                }
                if node.text.is_none() {
                    return Err(SnapshotError::schema(field("text"), "missing on text node"));
                }
            }
            for key in REQUIRED_STYLE_KEYS {
                if !node.style.contains_key(key) {
                    return Err(SnapshotError::schema(
                        format!("nodes[{i}].style.{key}"),
                        "required computed style missing",
                    ));
                }
            }
            let b = &node.bounds;
            if !b.is_finite() || b.w < 0.0 || b.h < 0.0 {
                return Err(SnapshotError::schema(
                    field("box"),
                    format!("invalid box {b:?}"),
                ));
            }
            if !doc.contains_rect(b) {
                return Err(SnapshotError::schema(
                    field("box"),
                    format!(
                        "{b:?} outside document {}x{}",
                        self.screenshot.width(),
                        self.screenshot.height()
                    ),
                ));
            }
        }
        Ok(())
    }
}

/// Reads and validates a snapshot directory.
pub fn load_snapshot(dir: impl AsRef<Path>) -> Result<PageSnapshot, SnapshotError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let raw = fs::read_to_string(&manifest_path).map_err(|e| SnapshotError::io(&manifest_path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&raw);
    let manifest: Manifest = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SnapshotError::schema(path, e.into_inner().to_string())
    })?;

    let shot_path = dir.join(&manifest.screenshot);
    if !shot_path.is_file() {
        return Err(SnapshotError::MissingScreenshot(shot_path));
    }
    let screenshot = image::open(&shot_path)
        .map_err(|e| SnapshotError::schema("screenshot", e.to_string()))?
        .into_rgb8();

    let snapshot = PageSnapshot {
        url: manifest.url,
        viewport: manifest.viewport,
        device_pixel_ratio: manifest.dpr,
        nodes: manifest.nodes,
        screenshot,
        captured_at: manifest.captured_at,
        skipped_iframes: manifest.skipped_iframes,
    };
    snapshot.validate()?;
    Ok(snapshot)
}

/// Writes `snapshot.json` and `screenshot.png` into `dir`, creating it.
pub fn save_snapshot(s: &PageSnapshot, dir: impl AsRef<Path>) -> Result<(), SnapshotError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| SnapshotError::io(dir, e))?;
    let manifest = Manifest {
        url: s.url.clone(),
        viewport: s.viewport,
        dpr: s.device_pixel_ratio,
        nodes: s.nodes.clone(),
        screenshot: SCREENSHOT_FILE.to_string(),
        captured_at: s.captured_at.clone(),
        skipped_iframes: s.skipped_iframes,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    let manifest_path = dir.join(MANIFEST_FILE);
    fs::write(&manifest_path, json).map_err(|e| SnapshotError::io(&manifest_path, e))?;
    let shot_path = dir.join(SCREENSHOT_FILE);
    s.screenshot
        .save_with_format(&shot_path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => SnapshotError::io(&shot_path, io),
            other => SnapshotError::io(&shot_path, io::Error::other(other)),
        })
}

/// Default computed style for synthetic nodes and tests.
pub fn default_style() -> BTreeMap<String, String> {
    [
        ("color", "rgb(0, 0, 0)"),
        ("background-color", "rgba(0, 0, 0, 0)"),
        ("background-image", "none"),
        ("visibility", "visible"),
        ("display", "block"),
        ("opacity", "1"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}
