use std::ops::Range;

use crate::error::{domain, Result};

/// Contiguous assignment of `n_points` grid points to processing elements
/// (PEs) holding `per_pe` points each. Point `i` belongs to PE `i / per_pe`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionSpec {
    n_points: usize,
    per_pe: usize,
}

impl PartitionSpec {
    pub fn new(n_points: usize, per_pe: usize) -> Result<Self> {
        if per_pe == 0 || n_points == 0 {
            return Err(domain("partition sizes must be positive"));
        }
        if !n_points.is_multiple_of(per_pe) {
            return Err(domain(format!(
                "{per_pe} points per PE does not divide N = {n_points}"
            )));
        }
        Ok(Self { n_points, per_pe })
    }

    /// Partition into `pe_count` equal blocks.
    pub fn with_pe_count(n_points: usize, pe_count: usize) -> Result<Self> {
        if pe_count == 0 || !n_points.is_multiple_of(pe_count) {
            return Err(domain(format!("{pe_count} PEs cannot split N = {n_points} evenly")));
        }
        Self::new(n_points, n_points / pe_count)
    }

    /// One PE per grid point.
    pub fn pointwise(n_points: usize) -> Result<Self> {
        Self::new(n_points, 1)
    }

    /// Everything on a single PE.
    pub fn single(n_points: usize) -> Result<Self> {
        Self::new(n_points, n_points)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn per_pe(&self) -> usize {
        self.per_pe
    }

    pub fn pe_count(&self) -> usize {
        self.n_points / self.per_pe
    }

    pub fn pe_of(&self, i: usize) -> usize {
        i / self.per_pe
    }

    pub fn points_of(&self, pe: usize) -> Range<usize> {
        pe * self.per_pe..(pe + 1) * self.per_pe
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisibility() {
        assert!(PartitionSpec::new(100, 7).is_err());
        assert!(PartitionSpec::new(100, 0).is_err());
        let p = PartitionSpec::new(100, 25).unwrap();
        assert_eq!(p.pe_count(), 4);
        assert_eq!(p.pe_of(0), 0);
        assert_eq!(p.pe_of(24), 0);
        assert_eq!(p.pe_of(25), 1);
        assert_eq!(p.pe_of(99), 3);
        assert_eq!(p.points_of(2), 50..75);
        assert_eq!(PartitionSpec::with_pe_count(100, 4).unwrap(), p);
        assert!(PartitionSpec::with_pe_count(100, 3).is_err());
        assert_eq!(PartitionSpec::pointwise(10).unwrap().pe_count(), 10);
        assert_eq!(PartitionSpec::single(10).unwrap().pe_count(), 1);
    }
}
