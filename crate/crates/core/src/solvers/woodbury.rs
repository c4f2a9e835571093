//! Cached inverse for the quadratic `y`-subproblem of the ADMM splitting.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{all_finite, fingerprint};

/// `M = (I + AᵀA/β)⁻¹ = I − (1/β)Aᵀ(I + AAᵀ/β)⁻¹A`, tied to the `(A, β)` it was built from.
#[derive(Clone, Debug)]
pub struct WoodburyFactor {
    m: DMatrix<f64>,
    beta: f64,
    fingerprint: u64,
}

impl WoodburyFactor {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn matches(&self, a: &DMatrix<f64>, beta: f64) -> bool {
        self.beta == beta && self.fingerprint == fingerprint(a, beta)
    }

    /// `M (Aᵀb/β + z/β + x)` with a precomputed `Aᵀb`. No fingerprint check.
    pub(crate) fn apply(
        &self,
        atb: &DVector<f64>,
        z: &DVector<f64>,
        x: &DVector<f64>,
    ) -> DVector<f64> {
        let inv = 1.0 / self.beta;
        let rhs = (atb + z) * inv + x;
        &self.m * rhs
    }
}

/// Builds the factor through the smaller of the two Gram systems. For `m < n` this is the
/// `m × m` matrix `I + AAᵀ/β` of the Woodbury identity.
pub fn precompute_woodbury(a: &DMatrix<f64>, beta: f64) -> Result<WoodburyFactor> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    if !all_finite(a.as_slice()) {
        return Err(Error::NonFinite("A"));
    }
    let (m, n) = a.shape();
    let inv_beta = 1.0 / beta;
    let factor = if m < n {
        let inner = DMatrix::identity(m, m) + (a * a.transpose()) * inv_beta;
        let chol = inner
            .cholesky()
            .ok_or_else(|| invalid("A", "I + AAᵀ/β is not numerically positive definite"))?;
        let solved = chol.solve(a);
        let mut out = DMatrix::identity(n, n);
        out -= a.tr_mul(&solved) * inv_beta;
        out
    } else {
        let outer = DMatrix::identity(n, n) + a.tr_mul(a) * inv_beta;
        let chol = outer
            .cholesky()
            .ok_or_else(|| invalid("A", "I + AᵀA/β is not numerically positive definite"))?;
        chol.inverse()
    };
    // symmetrize away rounding asymmetry
    let m_sym = (&factor + factor.transpose()) * 0.5;
    Ok(WoodburyFactor {
        m: m_sym,
        beta,
        fingerprint: fingerprint(a, beta),
    })
}

/// Exact minimizer of the `y`-subproblem: `y = M(Aᵀb/β + z/β + x)`, i.e. the solution of
/// `(βI + AᵀA) y = Aᵀb + z + βx`.
pub fn y_update(
    factor: &WoodburyFactor,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    z: &DVector<f64>,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    let (m, n) = a.shape();
    if b.len() != m || z.len() != n || x.len() != n || factor.m.nrows() != n {
        return Err(Error::Dimension(format!(
            "A is {m}x{n}, b has {}, z has {}, x has {}, factor is {}x{}",
            b.len(),
            z.len(),
            x.len(),
            factor.m.nrows(),
            factor.m.ncols()
        )));
    }
    if !factor.matches(a, factor.beta) {
        return Err(Error::FactorMismatch);
    }
    Ok(factor.apply(&a.tr_mul(b), z, x))
}
