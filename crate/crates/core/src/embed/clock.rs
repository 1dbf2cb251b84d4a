//! Injectable time source so batch scheduling is testable without sleeping.

use std::sync::Mutex;
use std::time::{Duration, Instant};

/// Abstract monotonic clock. `now` is elapsed time since the clock's origin.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

/// Wall-clock implementation backed by `Instant` and `thread::sleep`.
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// Simulated clock: `sleep` advances time instantly and records the call.
pub struct SimClock {
    state: Mutex<SimState>,
}

struct SimState {
    now: Duration,
    sleeps: Vec<Duration>,
}

impl SimClock {
    pub fn new() -> Self {
        Self {
            state: Mutex::new(SimState {
                now: Duration::ZERO,
                sleeps: Vec::new(),
            }),
        }
    }

    /// Every sleep performed so far, in order.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.state.lock().unwrap().sleeps.clone()
    }
}

impl Default for SimClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SimClock {
    fn now(&self) -> Duration {
        self.state.lock().unwrap().now
    }

    fn sleep(&self, d: Duration) {
        let mut s = self.state.lock().unwrap();
        s.now += d;
        s.sleeps.push(d);
    }
}
