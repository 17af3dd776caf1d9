//! Non-fatal numerical diagnostics.
//!
//! Operations that can silently lose accuracy (truncation, adiabatic
//! elimination, ill-conditioned inversions) report it through these values
//! instead of failing. Callers decide whether a warning is fatal.

use std::fmt;

use crate::fockspace::Mode;

#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// Population in the top two Fock levels of a mode is above the guard band.
    Truncation { mode: Mode, population: f64 },
    /// `|α|²` is large compared with the mode cutoff.
    DisplacementRange { mode: Mode, alpha_sq: f64, n_max: usize },
    /// `|δ|` is not large enough compared with the vibronic Rabi frequency.
    Adiabaticity { ratio: f64, threshold: f64 },
    /// Detuning too large for the rotating-wave reduction.
    RotatingWave { delta: f64 },
    /// A stretch-mode sideband of order `m` is accidentally co-resonant.
    StretchResonance { m: usize, mismatch: f64, tolerance: f64 },
    /// Fit frequencies are poorly resolved by the chosen τ grid.
    PoorConditioning { condition: f64, recommended_span: f64 },
    /// Generic note, used for aggregated per-point messages.
    Note(String),
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::Truncation { mode, population } => write!(
                f,
                "truncation: {population:.3e} population in the top two {mode} levels"
            ),
            Diagnostic::DisplacementRange { mode, alpha_sq, n_max } => write!(
                f,
                "displacement: |alpha|^2 = {alpha_sq:.3} > n_max/4 for the {mode} mode (n_max = {n_max})"
            ),
            Diagnostic::Adiabaticity { ratio, threshold } => write!(
                f,
                "adiabaticity: |delta| / vibronic Rabi frequency = {ratio:.3} < {threshold}"
            ),
            Diagnostic::RotatingWave { delta } => {
                write!(f, "rotating wave: |delta| = {delta:.3} nu is not small")
            }
            Diagnostic::StretchResonance { m, mismatch, tolerance } => write!(
                f,
                "stretch resonance: order-{m} stretch sideband detuned by {mismatch:.3e} (< {tolerance:.3e})"
            ),
            Diagnostic::PoorConditioning { condition, recommended_span } => write!(
                f,
                "conditioning: design condition number {condition:.3e}; use a tau span >= {recommended_span:.6e}"
            ),
            Diagnostic::Note(msg) => f.write_str(msg),
        }
    }
}

/// A value together with the diagnostics raised while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnosed<T> {
    pub value: T,
    pub diagnostics: Vec<Diagnostic>,
}

impl<T> Diagnosed<T> {
    pub fn clean(value: T) -> Self {
        Self { value, diagnostics: Vec::new() }
    }

    pub fn new(value: T, diagnostics: Vec<Diagnostic>) -> Self {
        Self { value, diagnostics }
    }

    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Diagnosed<U> {
        Diagnosed { value: f(self.value), diagnostics: self.diagnostics }
    }
}
