use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

/// Applies `f` to every item on up to `workers` threads and returns results in
/// item order. After the first error no new items are started; the error
/// with the lowest index among those attempted is returned.
pub(crate) fn parallel_try_map<T, R, E, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync,
{
    if workers <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let slots: Vec<Mutex<Option<Result<R, E>>>> = items.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(items.len()) {
            scope.spawn(|| loop {
                if failed.load(Ordering::Relaxed) {
                    break;
                }
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                if r.is_err() {
                    failed.store(true, Ordering::Relaxed);
                }
                *slots[i].lock().unwrap_or_else(|e| e.into_inner()) = Some(r);
            });
        }
    });
    let mut out = Vec::with_capacity(items.len());
    for slot in slots {
        match slot.into_inner().unwrap_or_else(|e| e.into_inner()) {
            Some(Ok(r)) => out.push(r),
            Some(Err(e)) => return Err(e),
            None => {}
        }
    }
    Ok(out)
}

/// Per-call request counts, indexed by federation member position.
#[derive(Debug)]
pub(crate) struct Tally {
    pub select: Vec<AtomicU64>,
    pub ask: Vec<AtomicU64>,
}

impl Tally {
    pub fn new(members: usize) -> Self {
        Tally {
            select: (0..members).map(|_| AtomicU64::new(0)).collect(),
            ask: (0..members).map(|_| AtomicU64::new(0)).collect(),
        }
    }

    pub fn select(&self, member: usize) {
        self.select[member].fetch_add(1, Ordering::Relaxed);
    }

    pub fn ask(&self, member: usize) {
        self.ask[member].fetch_add(1, Ordering::Relaxed);
    }
}
