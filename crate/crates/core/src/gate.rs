use std::sync::{Condvar, Mutex};

/// Counting semaphore that admits waiters in arrival order.
#[derive(Debug)]
pub struct Gate {
    limit: usize,
    state: Mutex<GateState>,
    turn: Condvar,
}

#[derive(Debug, Default)]
struct GateState {
    next_ticket: u64,
    admitted: u64,
    active: usize,
}

pub struct Permit<'a> {
    gate: &'a Gate,
}

impl Gate {
    pub fn new(limit: usize) -> Self {
        Gate { limit: limit.max(1), state: Mutex::default(), turn: Condvar::new() }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut s = self.state.lock().unwrap_or_else(|e| e.into_inner());
        let ticket = s.next_ticket;
        s.next_ticket += 1;
        while ticket != s.admitted || s.active >= self.limit {
            s = self.turn.wait(s).unwrap_or_else(|e| e.into_inner());
        }
        s.admitted += 1;
        s.active += 1;
        drop(s);
        self.turn.notify_all();
        Permit { gate: self }
    }

    pub fn in_flight(&self) -> usize {
        self.state.lock().unwrap_or_else(|e| e.into_inner()).active
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        self.gate.state.lock().unwrap_or_else(|e| e.into_inner()).active -= 1;
        self.gate.turn.notify_all();
    }
}
