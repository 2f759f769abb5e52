//! The three-point explicit update shared by every solver.
//!
//! All solvers evaluate exactly the same floating-point expression, which is
//! what makes the reduction properties (async with `q = 1`, barriered
//! executor, single-PE runs) hold bit for bit.

use num_traits::Float;

use crate::error::{HeatError, Result};
use crate::field::BoundaryCondition;

/// `u_i(k+1) = r * (u_{i+1} - 2 u_i + u_{i-1}) + u_i`.
///
/// A constant neighbourhood maps to itself exactly, whatever the value of `r`.
#[inline(always)]
pub fn update<T: Float>(left: T, center: T, right: T, r: T) -> T {
    r * (right - (center + center) + left) + center
}

/// One synchronous step from `src` into `dst`.
pub(crate) fn step_slice<T: Float>(src: &[T], dst: &mut [T], r: T, bc: &BoundaryCondition) {
    let n = src.len();
    debug_assert_eq!(n, dst.len());
    for (d, w) in dst[1..n - 1].iter_mut().zip(src.windows(3)) {
        *d = update(w[0], w[1], w[2], r);
    }
    match *bc {
        BoundaryCondition::Dirichlet { c1, c2 } => {
            dst[0] = T::from(c1).expect("boundary value fits the working precision");
            dst[n - 1] = T::from(c2).expect("boundary value fits the working precision");
        }
        BoundaryCondition::Periodic => {
            dst[0] = update(src[n - 1], src[0], src[1], r);
            dst[n - 1] = update(src[n - 2], src[n - 1], src[0], r);
        }
    }
}

pub(crate) fn check_finite<T: Float>(values: &[T], step: usize) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(HeatError::Diverged { step, index }),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_fixed_for_any_r() {
        for r in [0.1, 0.25, 0.5, 0.6, 3.0] {
            for c in [0.0, 1.0, -7.25, 1.0 / 3.0, 1e300] {
                assert_eq!(update(c, c, c, r), c);
            }
        }
    }

    #[test]
    fn single_precision_matches_formula() {
        let v = update(1.0f32, 0.0, 0.0, 0.5);
        assert_eq!(v, 0.5f32);
    }
}
