use crate::error::{domain, Result};

/// Upper end of the explicit-scheme stability window for `r`.
pub const R_MAX: f64 = 0.5;

/// Diffusion number `r = alpha * dt / dx^2`.
pub fn derive_r(alpha: f64, dt: f64, dx: f64) -> Result<f64> {
    for (name, v) in [("alpha", alpha), ("dt", dt), ("dx", dx)] {
        if v <= 0.0 || !v.is_finite() {
            return Err(domain(format!("{name} must be positive and finite, got {v}")));
        }
    }
    Ok(alpha * dt / dx / dx)
}

/// Physical parameters of the explicit scheme. `r` is always recomputed from
/// `alpha`, `dt` and `dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    alpha: f64,
    dt: f64,
    dx: f64,
}

impl SolverParams {
    /// Checked constructor: rejects `r` outside `(0, 0.5]`.
    pub fn new(alpha: f64, dt: f64, dx: f64) -> Result<Self> {
        let r = derive_r(alpha, dt, dx)?;
        if r > R_MAX {
            return Err(domain(format!(
                "diffusion number r = {r} is outside the stability window (0, {R_MAX}]"
            )));
        }
        Ok(Self { alpha, dt, dx })
    }

    /// Accepts any positive `r`. Only meant for instability demonstrations.
    pub fn unchecked(alpha: f64, dt: f64, dx: f64) -> Result<Self> {
        derive_r(alpha, dt, dx)?;
        Ok(Self { alpha, dt, dx })
    }

    /// Parameters with `alpha = r`, `dt = dx = 1`, so that `r()` returns `r` exactly.
    pub fn from_r(r: f64) -> Result<Self> {
        Self::new(r, 1.0, 1.0)
    }

    pub fn from_r_unchecked(r: f64) -> Result<Self> {
        Self::unchecked(r, 1.0, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn r(&self) -> f64 {
        self.alpha * self.dt / self.dx / self.dx
    }

    pub fn is_stable(&self) -> bool {
        self.r() <= R_MAX
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ulps(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn derive_r_examples() {
        // 0.01 and 0.1 are not representable, so the quotient lands one ulp below 0.5.
        assert!(ulps(derive_r(0.5, 0.01, 0.1).unwrap(), 0.5) <= 2);
        assert_eq!(derive_r(1.0, 1.0, 1.0).unwrap(), 1.0);
        assert!(ulps(derive_r(0.25, 0.02, 0.1).unwrap(), 0.5) <= 2);
        assert_eq!(derive_r(0.5, 1.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn derive_r_rejects_non_positive() {
        assert!(derive_r(0.0, 1.0, 1.0).is_err());
        assert!(derive_r(1.0, -1.0, 1.0).is_err());
        assert!(derive_r(1.0, 1.0, 0.0).is_err());
        assert!(derive_r(f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn window_is_half_open() {
        assert!(SolverParams::from_r(0.5).is_ok());
        assert!(SolverParams::new(0.5, 0.01, 0.1).is_ok());
        assert!(SolverParams::from_r(0.6).is_err());
        assert!(SolverParams::from_r(0.0).is_err());
        let p = SolverParams::from_r_unchecked(0.6).unwrap();
        assert_eq!(p.r(), 0.6);
        assert!(!p.is_stable());
    }

    proptest! {
        #[test]
        fn derive_r_inverts(a in 1e-3f64..1e3, t in 1e-3f64..1e3, x in 1e-3f64..1e3) {
            let r = derive_r(a, t, x).unwrap();
            prop_assert!(ulps(r * x * x / t, a) <= 2, "r={r} a={a} t={t} x={x}");
        }
    }
}
