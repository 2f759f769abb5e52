//! Single-value slots through which neighbouring PEs exchange edge values.
//!
//! Every slot has exactly one writer (the PE owning the edge point) and at
//! most two readers. Reads return the most recently published value; there
//! is no queue and no ordering between different slots.

use std::hint::spin_loop;
use std::sync::atomic::{fence, AtomicU64, Ordering};

/// A value read from a slot together with the generation (step index) it was
/// published at. `consistent` is false only if value and generation came from
/// different writes, which the seqlock protocol rules out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observed {
    pub value: f64,
    pub generation: u64,
    pub consistent: bool,
}

pub(crate) trait Slot: Send + Sync {
    fn with_value(value: f64) -> Self;
    fn publish(&self, value: f64, generation: u64);
    fn observe(&self) -> Observed;
}

/// Lock-free latest-value slot holding the bits of one `f64`.
#[derive(Debug)]
pub struct Mailbox {
    bits: AtomicU64,
}

impl Mailbox {
    pub fn new(value: f64) -> Self {
        Self { bits: AtomicU64::new(value.to_bits()) }
    }

    pub fn write(&self, value: f64) {
        self.bits.store(value.to_bits(), Ordering::Release);
    }

    pub fn read(&self) -> f64 {
        f64::from_bits(self.bits.load(Ordering::Acquire))
    }
}

impl Slot for Mailbox {
    fn with_value(value: f64) -> Self {
        Self::new(value)
    }

    #[inline(always)]
    fn publish(&self, value: f64, _generation: u64) {
        self.write(value);
    }

    #[inline(always)]
    fn observe(&self) -> Observed {
        Observed { value: self.read(), generation: 0, consistent: true }
    }
}

/// Seqlock-protected `(value, generation)` pair plus a check word derived
/// from both, so a torn read would be detectable. Used for instrumented runs.
#[derive(Debug)]
pub struct TaggedMailbox {
    seq: AtomicU64,
    bits: AtomicU64,
    generation: AtomicU64,
    check: AtomicU64,
}

fn tag(bits: u64, generation: u64) -> u64 {
    bits.rotate_left(17) ^ generation.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

impl TaggedMailbox {
    pub fn new(value: f64) -> Self {
        let bits = value.to_bits();
        Self {
            seq: AtomicU64::new(0),
            bits: AtomicU64::new(bits),
            generation: AtomicU64::new(0),
            check: AtomicU64::new(tag(bits, 0)),
        }
    }

    /// Single writer only.
    pub fn write(&self, value: f64, generation: u64) {
        let bits = value.to_bits();
        let s = self.seq.load(Ordering::Relaxed);
        self.seq.store(s.wrapping_add(1), Ordering::Relaxed);
        fence(Ordering::Release);
        self.bits.store(bits, Ordering::Relaxed);
        self.generation.store(generation, Ordering::Relaxed);
        self.check.store(tag(bits, generation), Ordering::Relaxed);
        self.seq.store(s.wrapping_add(2), Ordering::Release);
    }

    pub fn read(&self) -> Observed {
        loop {
            let before = self.seq.load(Ordering::Acquire);
            if before & 1 == 1 {
                spin_loop();
                continue;
            }
            let bits = self.bits.load(Ordering::Relaxed);
            let generation = self.generation.load(Ordering::Relaxed);
            let check = self.check.load(Ordering::Relaxed);
            fence(Ordering::Acquire);
            if self.seq.load(Ordering::Relaxed) == before {
                return Observed {
                    value: f64::from_bits(bits),
                    generation,
                    consistent: check == tag(bits, generation),
                };
            }
        }
    }
}

impl Slot for TaggedMailbox {
    fn with_value(value: f64) -> Self {
        Self::new(value)
    }

    #[inline(always)]
    fn publish(&self, value: f64, generation: u64) {
        self.write(value, generation);
    }

    #[inline(always)]
    fn observe(&self) -> Observed {
        self.read()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::AtomicBool;

    #[test]
    fn plain_round_trip() {
        let m = Mailbox::new(1.5);
        assert_eq!(m.read(), 1.5);
        m.write(-0.0);
        assert_eq!(m.read().to_bits(), (-0.0f64).to_bits());
    }

    #[test]
    fn tagged_reads_are_never_torn() {
        let slot = TaggedMailbox::new(0.0);
        let done = AtomicBool::new(false);
        std::thread::scope(|s| {
            s.spawn(|| {
                for g in 1..=200_000u64 {
                    slot.write(g as f64 * 0.5, g);
                }
                done.store(true, Ordering::Release);
            });
            s.spawn(|| {
                let mut last = 0;
                while !done.load(Ordering::Acquire) {
                    let o = slot.read();
                    assert!(o.consistent);
                    assert_eq!(o.value, o.generation as f64 * 0.5);
                    assert!(o.generation >= last, "generations went backwards");
                    last = o.generation;
                }
            });
        });
        assert_eq!(slot.read().generation, 200_000);
    }
}
