//! Associated Laguerre polynomials and the sideband coupling coefficients.

use super::ModeParams;

/// Associated Laguerre polynomial `L_n^k(x)` by the upward three-term recurrence
///
/// `(m+1) L_{m+1} = (2m + 1 + k − x) L_m − (m + k) L_{m−1}`.
pub fn laguerre(n: usize, k: usize, x: f64) -> f64 {
    let k = k as f64;
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + k - x;
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0 + k - x) * cur - (m + k) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `n!/(n−k)!`, zero when `n < k`.
pub fn falling_ratio(n: usize, k: usize) -> f64 {
    if n < k {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64)
}

/// `(n+k)!/n!`.
pub fn rising_ratio(n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (n + j) as f64)
}

/// Diagonal coupling coefficient of the order-`k` sideband on `|n_c, n_r⟩`:
///
/// `f_k = exp(−(η² + η_r²)/2) · n_c!/(n_c+k)! · L_{n_c}^k(η²) · L_{n_r}^0(η_r²)`.
///
/// The factorial ratio is accumulated as a product of reciprocals, so the
/// result stays finite well past `n_c = 170`.
pub fn coupling_f(n_c: usize, n_r: usize, k: usize, modes: &ModeParams) -> f64 {
    let eta2 = modes.eta * modes.eta;
    let eta_r2 = modes.eta_r * modes.eta_r;
    let ratio = (1..=k).fold(1.0, |acc, j| acc / (n_c + j) as f64);
    (-(eta2 + eta_r2) / 2.0).exp() * ratio * laguerre(n_c, k, eta2) * laguerre(n_r, 0, eta_r2)
}
