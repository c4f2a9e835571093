use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, l1_over_l2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    NonNegative,
    Free,
}

/// `min γ‖x‖₁/‖x‖₂ + ½‖Ax − b‖²` over the given domain.
#[derive(Clone, Debug)]
pub struct ProblemInstance {
    a: DMatrix<f64>,
    b: DVector<f64>,
    gamma: f64,
    domain: Domain,
}

impl ProblemInstance {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, gamma: f64, domain: Domain) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 || n == 0 {
            return Err(invalid("A", "matrix must be non-empty"));
        }
        if b.len() != m {
            return Err(Error::Dimension(format!(
                "A has {m} rows but b has {} entries",
                b.len()
            )));
        }
        if !all_finite(a.as_slice()) {
            return Err(Error::NonFinite("A"));
        }
        if !all_finite(b.as_slice()) {
            return Err(Error::NonFinite("b"));
        }
        if b.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroVector("observation b"));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        Ok(Self {
            a,
            b,
            gamma,
            domain,
        })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.a.clone(), self.b.clone(), gamma, self.domain)
    }

    pub fn in_domain(&self, x: &DVector<f64>) -> bool {
        match self.domain {
            Domain::Free => true,
            Domain::NonNegative => x.iter().all(|v| *v >= 0.0),
        }
    }

    /// `Ax − b`.
    pub fn residual(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.a * x - &self.b
    }

    /// `F(x) = γ‖x‖₁/‖x‖₂ + ½‖Ax − b‖²`, with the ratio equal to 1 at the origin.
    /// The domain indicator is not included.
    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        self.gamma * l1_over_l2(x) + 0.5 * self.residual(x).norm_squared()
    }

    /// `Aᵀ(Ax − b)`.
    pub fn fidelity_gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.a.tr_mul(&self.residual(x))
    }

    /// `Aᵀb`.
    pub fn atb(&self) -> DVector<f64> {
        self.a.tr_mul(&self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_observation_and_bad_gamma() {
        let a = DMatrix::identity(2, 2);
        assert!(ProblemInstance::new(a.clone(), DVector::zeros(2), 1.0, Domain::Free).is_err());
        let b = DVector::from_vec(vec![1.0, 0.0]);
        assert!(ProblemInstance::new(a.clone(), b.clone(), 0.0, Domain::Free).is_err());
        assert!(ProblemInstance::new(a, DVector::zeros(3), 1.0, Domain::Free).is_err());
    }

    #[test]
    fn objective_at_origin_uses_unit_ratio() {
        let a = DMatrix::identity(2, 2);
        let b = DVector::from_vec(vec![3.0, 4.0]);
        let p = ProblemInstance::new(a, b, 0.5, Domain::NonNegative).unwrap();
        assert!((p.objective(&DVector::zeros(2)) - (0.5 + 12.5)).abs() < 1e-15);
    }
}
