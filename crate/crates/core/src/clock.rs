use core::time::Duration;

/// Monotonic time source used for phase and stage timings.
pub trait Clock {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;

    fn since(&self, start: Duration) -> Duration {
        self.now().saturating_sub(start)
    }
}

/// Clock that never advances. Timings come out as zero.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> Duration {
        Duration::ZERO
    }
}
