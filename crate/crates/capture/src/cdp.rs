//! Minimal synchronous DevTools protocol client.

use std::collections::VecDeque;
use std::io;
use std::net::TcpStream;
use std::time::{Duration, Instant};

use serde_json::{json, Value};
use tungstenite::{Message, WebSocket};

use crate::CaptureError;

/// An event the browser pushed without being asked.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub method: String,
    pub session_id: Option<String>,
    pub params: Value,
}

pub struct CdpClient {
    socket: WebSocket<TcpStream>,
    next_id: u64,
    session_id: Option<String>,
    pending: VecDeque<Event>,
    command_timeout: Duration,
}

fn protocol(msg: impl Into<String>) -> CaptureError {
    CaptureError::Protocol(msg.into())
}

fn host_port(ws_url: &str) -> Result<&str, CaptureError> {
    let rest = ws_url
        .strip_prefix("ws://")
        .ok_or_else(|| protocol(format!("unsupported endpoint {ws_url}")))?;
    Ok(rest.split('/').next().unwrap_or(rest))
}

fn is_timeout(e: &tungstenite::Error) -> bool {
    matches!(e, tungstenite::Error::Io(io) if matches!(io.kind(), io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut))
}

impl CdpClient {
    /// Connects to a `ws://host:port/...` DevTools endpoint.
    pub fn connect(ws_url: &str, command_timeout: Duration) -> Result<Self, CaptureError> {
        let stream = TcpStream::connect(host_port(ws_url)?)
            .map_err(|e| protocol(format!("cannot reach {ws_url}: {e}")))?;
        stream
            .set_read_timeout(Some(Duration::from_millis(100)))
            .map_err(|e| protocol(e.to_string()))?;
        let (socket, _) =
            tungstenite::client(ws_url, stream).map_err(|e| protocol(format!("handshake failed: {e}")))?;
        Ok(CdpClient {
            socket,
            next_id: 1,
            session_id: None,
            pending: VecDeque::new(),
            command_timeout,
        })
    }

    /// Routes later commands to a flattened target session.
    pub fn set_session(&mut self, session_id: impl Into<String>) {
        self.session_id = Some(session_id.into());
    }

    fn read_frame(&mut self, deadline: Instant) -> Result<Option<Value>, CaptureError> {
        loop {
            match self.socket.read() {
                Ok(Message::Text(text)) => {
                    return serde_json::from_str(text.as_str())
                        .map(Some)
                        .map_err(|e| protocol(format!("malformed message: {e}")));
                }
                Ok(Message::Close(_)) => return Err(protocol("browser closed the connection")),
                Ok(_) => continue,
                Err(e) if is_timeout(&e) => {
                    if Instant::now() >= deadline {
                        return Ok(None);
                    }
                }
                Err(e) => return Err(protocol(e.to_string())),
            }
        }
    }

    fn queue_event(&mut self, frame: Value) {
        if let Some(method) = frame.get("method").and_then(Value::as_str) {
            self.pending.push_back(Event {
                method: method.to_string(),
                session_id: frame.get("sessionId").and_then(Value::as_str).map(String::from),
                params: frame.get("params").cloned().unwrap_or(Value::Null),
            });
        }
    }

    /// Sends a command and blocks for its reply, buffering any events that
    /// arrive first.
    pub fn call(&mut self, method: &str, params: Value) -> Result<Value, CaptureError> {
        let id = self.next_id;
        self.next_id += 1;
        let mut msg = json!({ "id": id, "method": method, "params": params });
        if let Some(s) = &self.session_id {
            msg["sessionId"] = Value::String(s.clone());
        }
        self.socket
            .send(Message::text(msg.to_string()))
            .map_err(|e| protocol(e.to_string()))?;
        let deadline = Instant::now() + self.command_timeout;
        loop {
            let frame = self
                .read_frame(deadline)?
                .ok_or_else(|| protocol(format!("no reply to {method}")))?;
            if frame.get("id").and_then(Value::as_u64) != Some(id) {
                self.queue_event(frame);
                continue;
            }
            if let Some(err) = frame.get("error") {
                let text = err.get("message").and_then(Value::as_str).unwrap_or("unknown error");
                return Err(protocol(format!("{method}: {text}")));
            }
            return Ok(frame.get("result").cloned().unwrap_or(Value::Null));
        }
    }

    /// Waits for the first event named `method`; `None` on timeout.
    pub fn wait_for(&mut self, method: &str, timeout: Duration) -> Result<Option<Event>, CaptureError> {
        if let Some(pos) = self.pending.iter().position(|e| e.method == method) {
            return Ok(self.pending.remove(pos));
        }
        let deadline = Instant::now() + timeout;
        while let Some(frame) = self.read_frame(deadline)? {
            self.queue_event(frame);
            if let Some(pos) = self.pending.iter().position(|e| e.method == method) {
                return Ok(self.pending.remove(pos));
            }
        }
        Ok(None)
    }

    pub fn close(mut self) {
        let _ = self.socket.close(None);
        let _ = self.socket.flush();
    }
}
