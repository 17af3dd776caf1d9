use crate::diag::Diagnostic;
use crate::fockspace::coupling_f;

use super::{rabi_effective, BichromaticParams};

/// `|δ|` must exceed the vibronic Rabi frequency by this factor.
pub const ADIABATIC_THRESHOLD: f64 = 10.0;
/// Largest `|δ|/ν` still treated as a small detuning.
pub const RWA_LIMIT: f64 = 0.2;

/// `|δ| / max |η^k Ω f_k(n_c, n_r)|` over `0..=n_c_max × 0..=n_r_max`.
pub fn adiabaticity_ratio(p: &BichromaticParams, n_c_max: usize, n_r_max: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for n_c in 0..=n_c_max {
        for n_r in 0..=n_r_max {
            let f = coupling_f(n_c, n_r, p.k, &p.modes).abs();
            worst = worst.max(p.modes.eta.powi(p.k as i32) * p.omega.norm() * f);
        }
    }
    if worst == 0.0 {
        f64::INFINITY
    } else {
        p.delta.abs() / worst
    }
}

/// Checks the drive against the stretch-mode accidental resonance and the
/// validity conditions of the dispersive elimination.
///
/// For `k ∉ {0, 1}` every order `1 ≤ m ≤ 2k` with
/// `|kν − δ − m√3ν| < 10·|Ω^k₀₀|` is flagged.
pub fn resonance_guard(p: &BichromaticParams) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let rabi00 = rabi_effective(0, 0, p).map(|r| r.norm()).unwrap_or(0.0);
    if p.k >= 2 {
        let tolerance = 10.0 * rabi00;
        let nu = p.modes.nu;
        for m in 1..=2 * p.k {
            let mismatch = (p.k as f64 * nu - p.delta - m as f64 * 3f64.sqrt() * nu).abs();
            if mismatch < tolerance {
                out.push(Diagnostic::StretchResonance { m, mismatch, tolerance });
            }
        }
    }
    let ratio = adiabaticity_ratio(p, 0, 0);
    if ratio < ADIABATIC_THRESHOLD {
        out.push(Diagnostic::Adiabaticity { ratio, threshold: ADIABATIC_THRESHOLD });
    }
    if p.delta.abs() > RWA_LIMIT * p.modes.nu {
        out.push(Diagnostic::RotatingWave { delta: p.delta });
    }
    out
}
