//! Launching a headless Chromium-family browser.

use std::env;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Stdio};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use tempfile::TempDir;

use crate::CaptureError;

/// Overrides browser discovery.
pub const BROWSER_ENV: &str = "PAGESEG_BROWSER";

const CANDIDATES: [&str; 6] = [
    "google-chrome",
    "google-chrome-stable",
    "chromium",
    "chromium-browser",
    "chrome",
    "headless_shell",
];

const LISTENING: &str = "DevTools listening on ";

fn on_path(name: &str) -> Option<PathBuf> {
    env::var_os("PATH").and_then(|paths| {
        env::split_paths(&paths)
            .map(|dir| dir.join(name))
            .find(|p| p.is_file())
    })
}

/// The browser binary: `$PAGESEG_BROWSER`, else the first known name on `PATH`.
pub fn find_browser() -> Result<PathBuf, CaptureError> {
    if let Some(p) = env::var_os(BROWSER_ENV) {
        let p = PathBuf::from(p);
        return if p.is_file() { Ok(p) } else { Err(CaptureError::BrowserNotFound) };
    }
    CANDIDATES
        .iter()
        .find_map(|n| on_path(n))
        .ok_or(CaptureError::BrowserNotFound)
}

/// Pulls the websocket endpoint out of the browser's stderr banner.
pub fn parse_endpoint(line: &str) -> Option<&str> {
    line.trim()
        .strip_prefix(LISTENING)
        .filter(|rest| rest.starts_with("ws://"))
}

/// A running browser process; killed on drop.
pub struct Browser {
    child: Child,
    endpoint: String,
    _profile: TempDir,
}

impl Browser {
    pub fn launch(binary: &Path, startup_timeout: Duration) -> Result<Self, CaptureError> {
        let profile = tempfile::tempdir().map_err(|e| CaptureError::Launch(e.to_string()))?;
        let mut child = Command::new(binary)
            .args([
                "--headless=new",
                "--remote-debugging-port=0",
                "--force-device-scale-factor=1",
                "--hide-scrollbars",
                "--no-first-run",
                "--no-default-browser-check",
                "--disable-gpu",
                "--disable-extensions",
            ])
            .arg(format!("--user-data-dir={}", profile.path().display()))
            .arg("about:blank")
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| CaptureError::Launch(format!("{}: {e}", binary.display())))?;

        let stderr = child.stderr.take().expect("stderr is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stderr).lines().map_while(Result::ok) {
                if let Some(ep) = parse_endpoint(&line) {
                    let _ = tx.send(ep.to_string());
                }
            }
        });
        match rx.recv_timeout(startup_timeout) {
            Ok(endpoint) => Ok(Browser {
                child,
                endpoint,
                _profile: profile,
            }),
            Err(_) => {
                let _ = child.kill();
                Err(CaptureError::Launch("browser never reported a DevTools endpoint".into()))
            }
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }
}

impl Drop for Browser {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
