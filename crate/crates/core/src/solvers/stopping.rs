use nalgebra::DVector;

/// Denominator floor of the relative change.
pub const REL_CHG_FLOOR: f64 = 0.1;

/// `‖x_curr − x_prev‖ / max(‖x_prev‖, 0.1)`.
pub fn rel_chg(x_prev: &DVector<f64>, x_curr: &DVector<f64>) -> f64 {
    (x_curr - x_prev).norm() / x_prev.norm().max(REL_CHG_FLOOR)
}

/// True once the relative change drops below `tol` or `k` reaches `k_max`.
pub fn check_stopping(
    x_prev: &DVector<f64>,
    x_curr: &DVector<f64>,
    tol: f64,
    k: usize,
    k_max: usize,
) -> bool {
    k >= k_max || rel_chg(x_prev, x_curr) < tol
}

/// Tolerance schedule: `1e-6` for noiseless data, `0.01·σ` otherwise.
pub fn default_tol(sigma: f64) -> f64 {
    if sigma > 0.0 {
        0.01 * sigma
    } else {
        1e-6
    }
}
