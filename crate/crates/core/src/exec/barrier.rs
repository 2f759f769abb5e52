use std::hint::spin_loop;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::thread;

/// Raised to waiters when a peer failed and will never arrive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Poisoned;

/// Reusable counting barrier that spins briefly and then yields. A failing
/// participant poisons it so the others return instead of waiting forever.
#[derive(Debug)]
pub struct SpinBarrier {
    total: usize,
    arrived: AtomicUsize,
    generation: AtomicUsize,
    poisoned: AtomicBool,
    spin_limit: u32,
}

impl SpinBarrier {
    pub fn new(total: usize, spin_limit: u32) -> Self {
        assert!(total > 0);
        Self {
            total,
            arrived: AtomicUsize::new(0),
            generation: AtomicUsize::new(0),
            poisoned: AtomicBool::new(false),
            spin_limit,
        }
    }

    pub fn wait(&self) -> Result<(), Poisoned> {
        let generation = self.generation.load(Ordering::Acquire);
        if self.arrived.fetch_add(1, Ordering::AcqRel) + 1 == self.total {
            self.arrived.store(0, Ordering::Relaxed);
            self.generation.fetch_add(1, Ordering::AcqRel);
            return Ok(());
        }
        let mut spins = 0u32;
        while self.generation.load(Ordering::Acquire) == generation {
            if self.poisoned.load(Ordering::Acquire) {
                return Err(Poisoned);
            }
            if spins < self.spin_limit {
                spins += 1;
                spin_loop();
            } else {
                thread::yield_now();
            }
        }
        Ok(())
    }

    pub fn poison(&self) {
        self.poisoned.store(true, Ordering::Release);
    }

    pub fn is_poisoned(&self) -> bool {
        self.poisoned.load(Ordering::Acquire)
    }
}

/// Poisons the barrier if dropped while its thread is panicking.
pub(crate) struct PoisonOnPanic<'a>(pub Option<&'a SpinBarrier>);

impl Drop for PoisonOnPanic<'_> {
    fn drop(&mut self) {
        if thread::panicking() {
            if let Some(b) = self.0 {
                b.poison();
            }
        }
    }
}
