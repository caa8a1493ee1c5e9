//! Visual object abstraction: filters raw nodes down to the visible text,
//! image and interactive units of a page.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::color::{parse_css_color, Srgb};
use crate::geometry::Rect;
use crate::snapshot::{NodeKind, PageSnapshot, RawNode};

const IMAGE_TAGS: [&str; 3] = ["img", "svg", "canvas"];
const INTERACTIVE_TAGS: [&str; 4] = ["input", "select", "textarea", "button"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ObjectKind {
    Text,
    Image,
    Interactive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualObject {
    pub id: usize,
    pub kind: ObjectKind,
    #[serde(rename = "box")]
    pub bounds: Rect,
    pub xpath: String,
    /// Computed `color`, when it parses as an sRGB color.
    pub fg_css: Option<Srgb>,
    /// Index of the source node in the snapshot.
    pub node_ref: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AbstractionError {
    #[error("page has no visible objects")]
    EmptyPage,
}

/// Visibility predicate: rendered, not hidden, not transparent, at least one
/// pixel in each dimension and overlapping the document.
pub fn is_visible(node: &RawNode, snapshot: &PageSnapshot) -> bool {
    let style = |k| node.style(k).map(str::trim).unwrap_or("");
    if style("display").eq_ignore_ascii_case("none") {
        return false;
    }
    let visibility = style("visibility");
    if visibility.eq_ignore_ascii_case("hidden") || visibility.eq_ignore_ascii_case("collapse") {
        return false;
    }
    let opacity = style("opacity").parse::<f64>().unwrap_or(1.0);
    if opacity <= 0.0 || opacity.is_nan() {
        return false;
    }
    let b = &node.bounds;
    if !(b.w >= 1.0 && b.h >= 1.0) {
        return false;
    }
    b.interiors_overlap(&snapshot.document_rect())
}

/// Text predicate: a `#TEXT` node holding something other than whitespace.
pub fn has_text(node: &RawNode) -> bool {
    node.kind == NodeKind::TextNode
        && node
            .text
            .as_deref()
            .is_some_and(|t| t.chars().any(|c| !c.is_whitespace()))
}

/// Image predicate: image-bearing tags, or any element painting a
/// background image.
pub fn has_image(node: &RawNode) -> bool {
    if node.kind != NodeKind::Element {
        return false;
    }
    let tag = node.tag_lower();
    if IMAGE_TAGS.contains(&tag.as_str()) {
        return true;
    }
    node.style("background-image")
        .map(str::trim)
        .is_some_and(|v| !v.is_empty() && !v.eq_ignore_ascii_case("none"))
}

/// Interactive predicate: form controls.
pub fn is_interactive(node: &RawNode) -> bool {
    node.kind == NodeKind::Element && INTERACTIVE_TAGS.contains(&node.tag_lower().as_str())
}

fn collect(
    snapshot: &PageSnapshot,
    kind: ObjectKind,
    predicate: impl Fn(&RawNode) -> bool,
) -> Vec<VisualObject> {
    let mut out: Vec<VisualObject> = snapshot
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| is_visible(n, snapshot) && predicate(n))
        .map(|(i, n)| make_object(i, n, kind))
        .collect();
    sort_and_number(&mut out);
    out
}

fn make_object(index: usize, node: &RawNode, kind: ObjectKind) -> VisualObject {
    VisualObject {
        id: 0,
        kind,
        bounds: node.bounds,
        xpath: node.xpath.clone(),
        fg_css: node.style("color").and_then(parse_css_color),
        node_ref: index,
    }
}

fn reading_order(a: &VisualObject, b: &VisualObject) -> Ordering {
    a.bounds
        .y
        .total_cmp(&b.bounds.y)
        .then(a.bounds.x.total_cmp(&b.bounds.x))
        .then_with(|| a.xpath.cmp(&b.xpath))
}

fn sort_and_number(objects: &mut [VisualObject]) {
    objects.sort_by(reading_order);
    for (i, o) in objects.iter_mut().enumerate() {
        o.id = i;
    }
}

pub fn extract_text_objects(snapshot: &PageSnapshot) -> Vec<VisualObject> {
    collect(snapshot, ObjectKind::Text, has_text)
}

pub fn extract_image_objects(snapshot: &PageSnapshot) -> Vec<VisualObject> {
    collect(snapshot, ObjectKind::Image, has_image)
}

pub fn extract_interactive_objects(snapshot: &PageSnapshot) -> Vec<VisualObject> {
    collect(snapshot, ObjectKind::Interactive, is_interactive)
}

/// Classifies a node, applying the precedence Interactive > Image > Text.
pub fn classify(node: &RawNode, snapshot: &PageSnapshot) -> Option<ObjectKind> {
    if !is_visible(node, snapshot) {
        return None;
    }
    if is_interactive(node) {
        Some(ObjectKind::Interactive)
    } else if has_image(node) {
        Some(ObjectKind::Image)
    } else if has_text(node) {
        Some(ObjectKind::Text)
    } else {
        None
    }
}

/// The full object set, one object per qualifying node, in reading order
/// (top, then left, then xpath) with dense ids.
pub fn abstract_page(snapshot: &PageSnapshot) -> Result<Vec<VisualObject>, AbstractionError> {
    let mut objects: Vec<VisualObject> = snapshot
        .nodes
        .iter()
        .enumerate()
        .filter_map(|(i, n)| classify(n, snapshot).map(|k| make_object(i, n, k)))
        .collect();
    if objects.is_empty() {
        return Err(AbstractionError::EmptyPage);
    }
    sort_and_number(&mut objects);
    Ok(objects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::{default_style, Viewport, TEXT_TAG};
    use image::{Rgb, RgbImage};

    fn element(xpath: &str, tag: &str, bounds: Rect) -> RawNode {
        RawNode {
            xpath: xpath.into(),
            tag: tag.into(),
            kind: NodeKind::Element,
            text: None,
            bounds,
            style: default_style(),
            is_leaf: true,
        }
    }

    fn text(xpath: &str, content: &str, bounds: Rect) -> RawNode {
        RawNode {
            xpath: xpath.into(),
            tag: TEXT_TAG.into(),
            kind: NodeKind::TextNode,
            text: Some(content.into()),
            bounds,
            style: default_style(),
            is_leaf: true,
        }
    }

    fn page(nodes: Vec<RawNode>) -> PageSnapshot {
        PageSnapshot {
            url: "about:test".into(),
            viewport: Viewport { w: 200, h: 200 },
            device_pixel_ratio: 1.0,
            nodes,
            screenshot: RgbImage::from_pixel(200, 200, Rgb([255, 255, 255])),
            captured_at: None,
            skipped_iframes: 0,
        }
    }

    fn with_style(mut n: RawNode, key: &str, value: &str) -> RawNode {
        n.style.insert(key.into(), value.into());
        n
    }

    #[test]
    fn visibility_predicate() {
        let r = Rect::new(10.0, 10.0, 10.0, 10.0);
        let s = page(vec![]);
        assert!(is_visible(&element("/a", "DIV", r), &s));
        assert!(!is_visible(&with_style(element("/a", "DIV", r), "display", "none"), &s));
        assert!(!is_visible(&with_style(element("/a", "DIV", r), "visibility", "hidden"), &s));
        assert!(!is_visible(&with_style(element("/a", "DIV", r), "visibility", "collapse"), &s));
        assert!(!is_visible(&with_style(element("/a", "DIV", r), "opacity", "0"), &s));
        assert!(!is_visible(&element("/a", "DIV", Rect::new(10.0, 10.0, 0.0, 0.0)), &s));
        assert!(!is_visible(&element("/a", "DIV", Rect::new(10.0, 10.0, 0.5, 20.0)), &s));
    }

    #[test]
    fn whitespace_and_hidden_text_are_dropped() {
        let s = page(vec![
            text("/t1", "Home", Rect::new(0.0, 0.0, 40.0, 18.0)),
            text("/t2", "\n  ", Rect::new(0.0, 20.0, 5.0, 18.0)),
            with_style(text("/t3", "secret", Rect::new(0.0, 40.0, 40.0, 18.0)), "visibility", "hidden"),
        ]);
        let t = extract_text_objects(&s);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].xpath, "/t1");
        assert_eq!(t[0].kind, ObjectKind::Text);
    }

    #[test]
    fn image_predicate_covers_tags_and_backgrounds() {
        let r = Rect::new(0.0, 0.0, 20.0, 20.0);
        let s = page(vec![
            element("/img", "IMG", r),
            with_style(element("/bg", "DIV", r.translate(30.0, 0.0)), "background-image", "url(\"x.png\")"),
            with_style(element("/gone", "IMG", r.translate(60.0, 0.0)), "display", "none"),
            element("/plain", "DIV", r.translate(90.0, 0.0)),
        ]);
        let xs: Vec<_> = extract_image_objects(&s).into_iter().map(|o| o.xpath).collect();
        assert_eq!(xs, ["/img", "/bg"]);
    }

    #[test]
    fn text_node_inheriting_background_image_stays_text() {
        let n = with_style(
            text("/t", "hi", Rect::new(0.0, 0.0, 20.0, 20.0)),
            "background-image",
            "url(a.png)",
        );
        let s = page(vec![n]);
        assert_eq!(classify(&s.nodes[0], &s), Some(ObjectKind::Text));
    }

    #[test]
    fn interactive_predicate() {
        let s = page(vec![
            element("/sel", "SELECT", Rect::new(0.0, 0.0, 80.0, 20.0)),
            element("/hidden", "INPUT", Rect::new(0.0, 30.0, 0.0, 0.0)),
        ]);
        let xs: Vec<_> = extract_interactive_objects(&s).into_iter().map(|o| o.xpath).collect();
        assert_eq!(xs, ["/sel"]);
    }

    #[test]
    fn button_and_its_text_are_both_kept() {
        let s = page(vec![
            element("/button[1]", "BUTTON", Rect::new(0.0, 0.0, 60.0, 24.0)),
            text("/button[1]/text()[1]", "Go", Rect::new(20.0, 3.0, 20.0, 18.0)),
        ]);
        let omega = abstract_page(&s).unwrap();
        assert_eq!(omega.len(), 2);
        assert_eq!(omega[0].kind, ObjectKind::Interactive);
        assert_eq!(omega[1].kind, ObjectKind::Text);
    }

    #[test]
    fn precedence_and_counts() {
        let s = page(vec![
            text("/t1", "a", Rect::new(0.0, 0.0, 10.0, 10.0)),
            text("/t2", "b", Rect::new(0.0, 20.0, 10.0, 10.0)),
            element("/img", "IMG", Rect::new(20.0, 0.0, 10.0, 10.0)),
            element("/in", "INPUT", Rect::new(40.0, 0.0, 10.0, 10.0)),
            with_style(element("/btn", "BUTTON", Rect::new(60.0, 0.0, 10.0, 10.0)), "background-image", "url(b.png)"),
        ]);
        let omega = abstract_page(&s).unwrap();
        assert_eq!(omega.len(), 5);
        let btn = omega.iter().find(|o| o.xpath == "/btn").unwrap();
        assert_eq!(btn.kind, ObjectKind::Interactive);
        assert_eq!(omega.iter().map(|o| o.id).collect::<Vec<_>>(), [0, 1, 2, 3, 4]);
        // reading order: the y=0 row left to right, then the y=20 text
        assert_eq!(omega[4].xpath, "/t2");
    }

    #[test]
    fn all_hidden_is_empty_page() {
        let s = page(vec![with_style(
            text("/t", "x", Rect::new(0.0, 0.0, 10.0, 10.0)),
            "display",
            "none",
        )]);
        assert_eq!(abstract_page(&s), Err(AbstractionError::EmptyPage));
    }
}
