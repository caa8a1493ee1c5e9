//! Page capture: loads a URL in a headless browser, runs the node extractor
//! script in the page, takes a full-page screenshot at device pixel ratio 1
//! and writes a snapshot directory.
//!
//! The extractor script is a separate artifact. Its path comes from
//! [`CaptureConfig::extractor_script`], falling back to `$PAGESEG_EXTRACTOR`.

pub mod browser;
pub mod cdp;

use std::fs;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use base64::Engine as _;
use serde_json::{json, Value};
use thiserror::Error;

use pageseg_core::snapshot::{SnapshotError, Viewport};
use pageseg_core::{save_snapshot, PageSnapshot, RawNode, Rect};

pub use browser::{find_browser, Browser};
pub use cdp::CdpClient;

pub const EXTRACTOR_ENV: &str = "PAGESEG_EXTRACTOR";

const IFRAME_COUNT: &str = "document.querySelectorAll('iframe, frame').length";

#[derive(Debug, Error)]
pub enum CaptureError {
    #[error("no browser found; set PAGESEG_BROWSER to a Chromium-family binary")]
    BrowserNotFound,
    #[error("browser launch failed: {0}")]
    Launch(String),
    #[error("navigation did not finish within {0:?}")]
    NavigationTimeout(Duration),
    #[error("navigation failed: {0}")]
    NavigationFailed(String),
    #[error("extractor script not available: {0}")]
    ExtractorMissing(String),
    #[error("extractor script threw: {0}")]
    ExtractionScriptError(String),
    #[error("extractor output changed between runs")]
    NotIdempotent,
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaptureConfig {
    pub url: String,
    pub viewport: Viewport,
    pub nav_timeout: Duration,
    pub settle_delay: Duration,
    pub extractor_script: Option<PathBuf>,
    /// Runs the extractor twice and fails if the outputs differ.
    pub verify_idempotent: bool,
}

impl CaptureConfig {
    pub fn new(url: impl Into<String>) -> Self {
        CaptureConfig {
            url: url.into(),
            viewport: Viewport::default(),
            nav_timeout: Duration::from_secs(30),
            settle_delay: Duration::from_secs(2),
            extractor_script: None,
            verify_idempotent: true,
        }
    }

    fn check(&self) -> Result<(), CaptureError> {
        if self.viewport.w == 0 || self.viewport.h == 0 {
            return Err(CaptureError::Launch("viewport dimensions must be positive".into()));
        }
        if self.nav_timeout.is_zero() {
            return Err(CaptureError::Launch("navigation timeout must be positive".into()));
        }
        Ok(())
    }

    /// Source of the extractor script.
    pub fn load_extractor(&self) -> Result<String, CaptureError> {
        let path = self
            .extractor_script
            .clone()
            .or_else(|| std::env::var_os(EXTRACTOR_ENV).map(PathBuf::from))
            .ok_or_else(|| CaptureError::ExtractorMissing(format!("pass a script path or set {EXTRACTOR_ENV}")))?;
        fs::read_to_string(&path).map_err(|e| CaptureError::ExtractorMissing(format!("{}: {e}", path.display())))
    }
}

/// Decodes the extractor's result: a JSON array of node records, or a
/// string holding one.
pub fn parse_extraction(value: &Value) -> Result<Vec<RawNode>, CaptureError> {
    let parsed = match value {
        Value::String(s) => serde_json::from_str(s),
        other => serde_json::from_value(other.clone()),
    };
    parsed.map_err(|e| CaptureError::ExtractionScriptError(format!("unexpected output shape: {e}")))
}

/// Clips each box to the document. Boxes entirely outside collapse to an
/// empty box at the nearest document point.
pub fn clip_to_document(nodes: &mut [RawNode], doc: &Rect) {
    for n in nodes {
        let b = n.bounds;
        n.bounds = match b.intersection(doc) {
            Some(r) => r,
            None => Rect::new(b.x.clamp(doc.x, doc.right()), b.y.clamp(doc.y, doc.bottom()), 0.0, 0.0),
        };
    }
}

fn evaluate(client: &mut CdpClient, expression: &str) -> Result<Value, CaptureError> {
    let reply = client.call(
        "Runtime.evaluate",
        json!({ "expression": expression, "returnByValue": true, "awaitPromise": true }),
    )?;
    if let Some(ex) = reply.get("exceptionDetails") {
        let text = ex
            .pointer("/exception/description")
            .and_then(Value::as_str)
            .or_else(|| ex.get("text").and_then(Value::as_str))
            .unwrap_or("unknown exception");
        return Err(CaptureError::ExtractionScriptError(text.to_string()));
    }
    Ok(reply.pointer("/result/value").cloned().unwrap_or(Value::Null))
}

fn document_size(metrics: &Value) -> Result<(u32, u32), CaptureError> {
    let size = metrics
        .get("cssContentSize")
        .or_else(|| metrics.get("contentSize"))
        .ok_or_else(|| CaptureError::Protocol("layout metrics without content size".into()))?;
    let dim = |k: &str| size.get(k).and_then(Value::as_f64).map(|v| v.ceil().max(1.0) as u32);
    match (dim("width"), dim("height")) {
        (Some(w), Some(h)) => Ok((w, h)),
        _ => Err(CaptureError::Protocol("malformed content size".into())),
    }
}

/// Runs the capture sequence on a browser-level connection.
pub fn capture_with(client: &mut CdpClient, cfg: &CaptureConfig, script: &str) -> Result<PageSnapshot, CaptureError> {
    cfg.check()?;
    let target = client.call("Target.createTarget", json!({ "url": "about:blank" }))?;
    let target_id = target
        .get("targetId")
        .and_then(Value::as_str)
        .ok_or_else(|| CaptureError::Protocol("createTarget without targetId".into()))?
        .to_string();
    let attached = client.call("Target.attachToTarget", json!({ "targetId": target_id, "flatten": true }))?;
    let session = attached
        .get("sessionId")
        .and_then(Value::as_str)
        .ok_or_else(|| CaptureError::Protocol("attachToTarget without sessionId".into()))?;
    client.set_session(session);

    client.call("Page.enable", json!({}))?;
    client.call(
        "Emulation.setDeviceMetricsOverride",
        json!({
            "width": cfg.viewport.w,
            "height": cfg.viewport.h,
            "deviceScaleFactor": 1,
            "mobile": false
        }),
    )?;
    let nav = client.call("Page.navigate", json!({ "url": cfg.url }))?;
    if let Some(err) = nav.get("errorText").and_then(Value::as_str) {
        return Err(CaptureError::NavigationFailed(err.to_string()));
    }
    if client.wait_for("Page.loadEventFired", cfg.nav_timeout)?.is_none() {
        return Err(CaptureError::NavigationTimeout(cfg.nav_timeout));
    }
    thread::sleep(cfg.settle_delay);

    let first = evaluate(client, script)?;
    if cfg.verify_idempotent && evaluate(client, script)? != first {
        return Err(CaptureError::NotIdempotent);
    }
    let mut nodes = parse_extraction(&first)?;
    let skipped_iframes = evaluate(client, IFRAME_COUNT)?.as_u64().unwrap_or(0) as u32;

    let (w, h) = document_size(&client.call("Page.getLayoutMetrics", json!({}))?)?;
    let shot = client.call(
        "Page.captureScreenshot",
        json!({
            "format": "png",
            "captureBeyondViewport": true,
            "fromSurface": true,
            "clip": { "x": 0, "y": 0, "width": w, "height": h, "scale": 1 }
        }),
    )?;
    let data = shot
        .get("data")
        .and_then(Value::as_str)
        .ok_or_else(|| CaptureError::Protocol("screenshot without data".into()))?;
    let png = base64::engine::general_purpose::STANDARD
        .decode(data)
        .map_err(|e| CaptureError::Protocol(format!("screenshot encoding: {e}")))?;
    let screenshot = image::load_from_memory_with_format(&png, image::ImageFormat::Png)
        .map_err(|e| CaptureError::Protocol(format!("screenshot decoding: {e}")))?
        .into_rgb8();
    if (screenshot.width(), screenshot.height()) != (w, h) {
        log::warn!(
            "screenshot is {}x{}, document is {w}x{h}",
            screenshot.width(),
            screenshot.height()
        );
    }

    let doc = Rect::new(0.0, 0.0, f64::from(screenshot.width()), f64::from(screenshot.height()));
    clip_to_document(&mut nodes, &doc);
    if skipped_iframes > 0 {
        log::info!("{}: {skipped_iframes} iframe(s) not extracted", cfg.url);
    }
    let snapshot = PageSnapshot {
        url: cfg.url.clone(),
        viewport: cfg.viewport,
        device_pixel_ratio: 1.0,
        nodes,
        screenshot,
        captured_at: Some(chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)),
        skipped_iframes,
    };
    snapshot.validate()?;
    let _ = client.call("Target.closeTarget", json!({ "targetId": target_id }));
    Ok(snapshot)
}

/// Launches a browser, captures `cfg.url` and writes the snapshot to `out`.
pub fn capture(cfg: &CaptureConfig, out: impl AsRef<Path>) -> Result<PageSnapshot, CaptureError> {
    cfg.check()?;
    let script = cfg.load_extractor()?;
    let browser = Browser::launch(&find_browser()?, Duration::from_secs(20))?;
    let mut client = CdpClient::connect(browser.endpoint(), cfg.nav_timeout.max(Duration::from_secs(10)))?;
    let snapshot = capture_with(&mut client, cfg, &script)?;
    client.close();
    save_snapshot(&snapshot, out)?;
    Ok(snapshot)
}
