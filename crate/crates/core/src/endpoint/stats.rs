use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;

/// Request counters for one endpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RequestStats {
    pub select_requests: u64,
    pub ask_requests: u64,
    pub bytes_received: u64,
    #[serde(serialize_with = "millis")]
    pub cumulative_wait: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1000.0)
}

impl RequestStats {
    pub fn requests(&self) -> u64 {
        self.select_requests + self.ask_requests
    }

    /// Counter growth from `earlier` to `self`.
    pub fn since(&self, earlier: &RequestStats) -> RequestStats {
        RequestStats {
            select_requests: self.select_requests - earlier.select_requests,
            ask_requests: self.ask_requests - earlier.ask_requests,
            bytes_received: self.bytes_received - earlier.bytes_received,
            cumulative_wait: self.cumulative_wait.saturating_sub(earlier.cumulative_wait),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum RequestKind {
    Select,
    Ask,
}

/// Shared counters. Each request is recorded by one locked update, so a
/// snapshot never observes a half-recorded request.
#[derive(Debug, Default)]
pub(crate) struct Counters(Mutex<RequestStats>);

impl Counters {
    pub fn record(&self, kind: RequestKind, bytes: u64, wait: Duration) {
        let mut s = self.0.lock().unwrap_or_else(|e| e.into_inner());
        match kind {
            RequestKind::Select => s.select_requests += 1,
            RequestKind::Ask => s.ask_requests += 1,
        }
        s.bytes_received += bytes;
        s.cumulative_wait += wait;
    }

    pub fn snapshot(&self) -> RequestStats {
        *self.0.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn reset(&self) {
        *self.0.lock().unwrap_or_else(|e| e.into_inner()) = RequestStats::default();
    }
}
