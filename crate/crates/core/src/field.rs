use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Result};

/// Smallest grid the stencil accepts: two end points and one interior point.
pub const MIN_POINTS: usize = 3;

/// Temperatures at grid points `0..N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureField {
    values: Vec<f64>,
}

impl TemperatureField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < MIN_POINTS {
            return Err(domain(format!(
                "a field needs at least {MIN_POINTS} points, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite temperature {} at point {i}", values[i])));
        }
        Ok(Self { values })
    }

    /// Skips validation. Solvers use this for buffers they produced themselves.
    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= MIN_POINTS);
        Self { values }
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Largest pointwise absolute difference. Panics on a length mismatch.
    pub fn max_abs_diff(&self, other: &TemperatureField) -> f64 {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn mean(&self) -> f64 {
        total_heat(self) / self.len() as f64
    }
}

/// End-point rule of the stencil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// `values[0] == c1` and `values[N-1] == c2` at every step.
    Dirichlet { c1: f64, c2: f64 },
    /// The grid is a ring; end points use wrap-around neighbours.
    Periodic,
}

impl BoundaryCondition {
    /// Returns `u` with Dirichlet end values written in. Periodic fields pass through.
    pub fn impose(&self, u: &TemperatureField) -> Result<TemperatureField> {
        match *self {
            BoundaryCondition::Dirichlet { c1, c2 } => {
                let mut values = u.values.clone();
                let last = values.len() - 1;
                values[0] = c1;
                values[last] = c2;
                TemperatureField::new(values)
            }
            BoundaryCondition::Periodic => Ok(u.clone()),
        }
    }

    pub(crate) fn check_ends(&self, u: &[f64]) -> Result<()> {
        if let BoundaryCondition::Dirichlet { c1, c2 } = *self {
            let last = u[u.len() - 1];
            if u[0] != c1 || last != c2 {
                return Err(contract(format!(
                    "Dirichlet({c1}, {c2}) does not match end values ({}, {last}); impose the boundary first",
                    u[0]
                )));
            }
        }
        Ok(())
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, BoundaryCondition::Periodic)
    }
}

/// `u_i = cos^2(3*pi/2 * i/(N-1))` for `i = 0..N`.
pub fn cosine_init(n: usize) -> Result<TemperatureField> {
    check_len(n)?;
    let last = (n - 1) as f64;
    let values = (0..n)
        .map(|i| (3.0 * PI / 2.0 * i as f64 / last).cos().powi(2))
        .collect();
    Ok(TemperatureField::from_vec_unchecked(values))
}

/// The Dirichlet steady state: linear interpolation from `c1` to `c2`.
pub fn linear_steady_state(n: usize, c1: f64, c2: f64) -> Result<TemperatureField> {
    check_len(n)?;
    let last = (n - 1) as f64;
    let values: Vec<f64> = (0..n).map(|i| c1 + (c2 - c1) * i as f64 / last).collect();
    TemperatureField::new(values)
}

fn check_len(n: usize) -> Result<()> {
    if n < MIN_POINTS {
        return Err(domain(format!("N must be at least {MIN_POINTS}, got {n}")));
    }
    Ok(())
}

/// Euclidean norm of the field.
pub fn l2_norm(u: &TemperatureField) -> f64 {
    norm2(u.values())
}

/// Sum of all temperatures; conserved by the synchronous periodic scheme.
pub fn total_heat(u: &TemperatureField) -> f64 {
    compensated_sum(u.values().iter().copied())
}

pub(crate) fn norm2(values: &[f64]) -> f64 {
    compensated_sum(values.iter().map(|v| v * v)).sqrt()
}

// Neumaier summation.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ulps(a: f64, b: f64) -> u64 {
        (a.to_bits() as i64 - b.to_bits() as i64).unsigned_abs()
    }

    #[test]
    fn field_validation() {
        assert!(TemperatureField::new(vec![1.0, 2.0]).is_err());
        assert!(TemperatureField::new(vec![1.0, f64::NAN, 2.0]).is_err());
        assert!(TemperatureField::new(vec![1.0, f64::INFINITY, 2.0]).is_err());
        assert!(TemperatureField::new(vec![1.0, 2.0, 3.0]).is_ok());
    }

    #[test]
    fn cosine_init_examples() {
        let u = cosine_init(100).unwrap();
        assert_eq!(u.values()[0], 1.0);
        assert!(u.values()[99].abs() <= 1e-15);
        assert!(u.values()[33].abs() <= 1e-15);
        assert!(cosine_init(2).is_err());
    }

    #[test]
    fn cosine_init_sums_against_oracle() {
        // Frozen from a numpy evaluation of the same formula.
        let u = cosine_init(100).unwrap();
        assert!((l2_norm(&u) - 6.1339220731926485).abs() <= 1e-13);
        assert!((total_heat(&u) - 50.0).abs() <= 1e-12);
    }

    #[test]
    fn linear_steady_state_examples() {
        assert_eq!(
            linear_steady_state(5, 1.0, 0.0).unwrap().values(),
            &[1.0, 0.75, 0.5, 0.25, 0.0]
        );
        assert_eq!(linear_steady_state(3, 2.0, 2.0).unwrap().values(), &[2.0, 2.0, 2.0]);
        assert_eq!(linear_steady_state(4, 0.0, 3.0).unwrap().values(), &[0.0, 1.0, 2.0, 3.0]);
        assert!(linear_steady_state(2, 0.0, 1.0).is_err());
    }

    #[test]
    fn norm_and_heat_examples() {
        let u = TemperatureField::new(vec![3.0, 4.0, 0.0]).unwrap();
        assert_eq!(l2_norm(&u), 5.0);
        assert_eq!(l2_norm(&TemperatureField::constant(10, 0.0).unwrap()), 0.0);
        assert_eq!(total_heat(&TemperatureField::new(vec![2.0, 0.0, 1.0]).unwrap()), 3.0);
        assert_eq!(total_heat(&TemperatureField::constant(4, 1.0).unwrap()), 4.0);
    }

    #[test]
    fn impose_pins_dirichlet_ends() {
        let u = cosine_init(100).unwrap();
        let bc = BoundaryCondition::Dirichlet { c1: 1.0, c2: 0.0 };
        assert!(bc.check_ends(u.values()).is_err());
        let pinned = bc.impose(&u).unwrap();
        assert!(bc.check_ends(pinned.values()).is_ok());
        assert_eq!(BoundaryCondition::Periodic.impose(&u).unwrap(), u);
    }

    fn field_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e3f64..1e3, 3..64)
    }

    proptest! {
        #[test]
        fn norm_is_non_negative(v in field_strategy()) {
            let u = TemperatureField::new(v.clone()).unwrap();
            let n = l2_norm(&u);
            prop_assert!(n >= 0.0);
            prop_assert_eq!(n == 0.0, v.iter().all(|x| *x == 0.0));
        }

        #[test]
        fn norm_is_homogeneous(v in field_strategy(), s in -1e3f64..1e3) {
            let u = TemperatureField::new(v.clone()).unwrap();
            let scaled = TemperatureField::new(v.iter().map(|x| s * x).collect()).unwrap();
            prop_assert!(ulps(l2_norm(&scaled), s.abs() * l2_norm(&u)) <= 4);
        }

        #[test]
        fn cosine_init_end_points(n in 3usize..5000) {
            let u = cosine_init(n).unwrap();
            prop_assert_eq!(u.values()[0], 1.0);
            prop_assert!(u.values()[n - 1].abs() <= 1e-15);
        }
    }
}
