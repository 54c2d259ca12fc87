use std::time::Duration;

use rand::Rng;

/// Artificial per-request delay: a fixed part plus a uniform sample from
/// `[0, jitter]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Latency {
    pub fixed: Duration,
    pub jitter: Duration,
}

impl Latency {
    pub const ZERO: Latency = Latency { fixed: Duration::ZERO, jitter: Duration::ZERO };

    pub fn new(fixed: Duration, jitter: Duration) -> Self {
        Latency { fixed, jitter }
    }

    pub fn from_millis(fixed_ms: u64, jitter_ms: u64) -> Self {
        Latency::new(Duration::from_millis(fixed_ms), Duration::from_millis(jitter_ms))
    }

    pub fn is_zero(&self) -> bool {
        self.fixed.is_zero() && self.jitter.is_zero()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> Duration {
        if self.jitter.is_zero() {
            return self.fixed;
        }
        let extra = rng.random_range(0..=self.jitter.as_nanos() as u64);
        self.fixed + Duration::from_nanos(extra)
    }

    /// Sleeps for one sampled delay and returns it.
    pub fn apply(&self) -> Duration {
        if self.is_zero() {
            return Duration::ZERO;
        }
        let d = self.sample(&mut rand::rng());
        std::thread::sleep(d);
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn samples_stay_in_range() {
        let l = Latency::from_millis(20, 10);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let d = l.sample(&mut rng);
            assert!(d >= Duration::from_millis(20) && d <= Duration::from_millis(30));
        }
        assert_eq!(Latency::from_millis(5, 0).sample(&mut rng), Duration::from_millis(5));
    }
}
