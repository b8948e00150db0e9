//! Timing abstraction that keeps the core library free of OS clocks.
//!
//! Iterative solvers and the tracker record wall-clock durations in their
//! traces when given a real clock; in environments without one (or in
//! tests that want stable output) [`NullClock`] pins every reading to zero.

/// Source of monotonic timestamps, in seconds from an arbitrary epoch.
pub trait Clock {
    fn now_seconds(&self) -> f64;
}

/// A clock that always reads zero, so recorded durations collapse to zero.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullClock;

impl Clock for NullClock {
    fn now_seconds(&self) -> f64 {
        0.0
    }
}

impl<C: Clock + ?Sized> Clock for &C {
    fn now_seconds(&self) -> f64 {
        (**self).now_seconds()
    }
}
