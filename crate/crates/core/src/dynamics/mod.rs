//! Sideband, effective dispersive and carrier Hamiltonians; effective Rabi
//! frequencies; numerical and closed-form propagation.

mod closed_form;
mod guard;
mod hamiltonian;
mod propagate;

pub use closed_form::{closed_form_carrier, closed_form_dispersive, Sign};
pub use guard::{adiabaticity_ratio, resonance_guard, ADIABATIC_THRESHOLD, RWA_LIMIT};
pub use hamiltonian::{
    build_bichromatic_h, build_carrier_h, build_effective_h, BichromaticHamiltonian, Triplet,
};
pub use propagate::{
    evolve_bichromatic, evolve_const, evolve_midpoint, propagate_const, propagate_timedep,
    propagate_timedep_checked, Converged,
};

use crate::fockspace::{coupling_f, falling_ratio, rising_ratio, ModeParams};
use crate::{Error, Result, C64};

/// Parameters of the two-frequency sideband drive.
///
/// The first field is tuned `kν − δ` above the carrier, the second `k′ν − δ′`
/// below it. `omega` is the (Raman) Rabi frequency of each field; its complex
/// phase adds to `phi`. `phi0 = q·d` is the phase difference from the ion
/// spacing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BichromaticParams {
    pub k: usize,
    pub k_prime: usize,
    pub delta: f64,
    pub delta_prime: f64,
    pub omega: C64,
    pub phi: f64,
    pub phi0: f64,
    pub modes: ModeParams,
}

impl BichromaticParams {
    /// Symmetric drive `k = k′`, `δ = δ′` with zero phases.
    pub fn symmetric(k: usize, delta: f64, omega: C64, modes: ModeParams) -> Self {
        Self { k, k_prime: k, delta, delta_prime: delta, omega, phi: 0.0, phi0: 0.0, modes }
    }

    pub fn with_phases(mut self, phi: f64, phi0: f64) -> Self {
        self.phi = phi;
        self.phi0 = phi0;
        self
    }

    pub fn is_symmetric(&self) -> bool {
        self.k == self.k_prime && self.delta == self.delta_prime
    }

    pub fn ensure_symmetric(&self) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::NotSymmetric)
        }
    }

    /// `φ + arg Ω`, the phase that multiplies the raising part of the drive.
    pub fn drive_phase(&self) -> f64 {
        self.phi + self.omega.arg()
    }

    pub fn validate(&self) -> Result<()> {
        self.modes.validate()?;
        for (name, v) in [
            ("delta", self.delta),
            ("delta_prime", self.delta_prime),
            ("phi", self.phi),
            ("phi0", self.phi0),
            ("omega", self.omega.re),
            ("omega", self.omega.im),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter { name, reason: "must be finite".into() });
            }
        }
        Ok(())
    }
}

/// Parameters of a resonant carrier pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierParams {
    pub omega: C64,
    pub varphi: f64,
    pub varphi0: f64,
    pub modes: ModeParams,
}

impl CarrierParams {
    pub fn new(omega: C64, varphi: f64, varphi0: f64, modes: ModeParams) -> Self {
        Self { omega, varphi, varphi0, modes }
    }

    pub fn drive_phase(&self) -> f64 {
        self.varphi + self.omega.arg()
    }

    /// Carrier Rabi frequency `Ω₀ = |Ω| f₀(n_c, n_r)` (signed).
    pub fn omega0(&self, n_c: usize, n_r: usize) -> f64 {
        self.omega.norm() * coupling_f(n_c, n_r, 0, &self.modes)
    }
}

/// `Ω_k = 2|Ω|²(iη)^{2k}/δ`. The `(i)^{2k}` factor is carried as a complex
/// power, so the result is real with sign `(−1)^k sgn δ`.
pub fn omega_k_scale(k: usize, omega: C64, delta: f64, eta: f64) -> Result<C64> {
    if delta == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let ieta = C64::new(0.0, eta).powu(2 * k as u32);
    Ok(ieta * (2.0 * omega.norm_sqr() / delta))
}

/// `f_k² [n_c!/(n_c−k)! − (n_c+k)!/n_c!]`, the Fock-dependent factor of the
/// effective frequency.
pub fn effective_weight(n_c: usize, n_r: usize, k: usize, modes: &ModeParams) -> f64 {
    let f = coupling_f(n_c, n_r, k, modes);
    f * f * (falling_ratio(n_c, k) - rising_ratio(n_c, k))
}

/// Effective two-photon Rabi frequency `Ω^k_{n_c n_r}` of the `|↓↓⟩ ↔ |↑↑⟩`
/// transition for the symmetric drive.
pub fn rabi_effective(n_c: usize, n_r: usize, p: &BichromaticParams) -> Result<C64> {
    p.ensure_symmetric()?;
    let scale = omega_k_scale(p.k, p.omega, p.delta, p.modes.eta)?;
    Ok(scale * effective_weight(n_c, n_r, p.k, &p.modes))
}

/// Table of `Ω^k_{n_c n_r}` for `0 ≤ n_c ≤ n_c_max`, `0 ≤ n_r ≤ n_r_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct RabiSpectrum {
    pub params: BichromaticParams,
    pub n_c_max: usize,
    pub n_r_max: usize,
    values: Vec<C64>,
}

impl RabiSpectrum {
    pub fn compute(p: &BichromaticParams, n_c_max: usize, n_r_max: usize) -> Result<Self> {
        p.ensure_symmetric()?;
        let scale = omega_k_scale(p.k, p.omega, p.delta, p.modes.eta)?;
        let mut values = Vec::with_capacity((n_c_max + 1) * (n_r_max + 1));
        for n_c in 0..=n_c_max {
            for n_r in 0..=n_r_max {
                values.push(scale * effective_weight(n_c, n_r, p.k, &p.modes));
            }
        }
        Ok(Self { params: *p, n_c_max, n_r_max, values })
    }

    pub fn get(&self, n_c: usize, n_r: usize) -> C64 {
        self.values[n_c * (self.n_r_max + 1) + n_r]
    }

    /// `((n_c, n_r), Ω)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
        let w = self.n_r_max + 1;
        self.values.iter().enumerate().map(move |(i, &v)| ((i / w, i % w), v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest `|x − y| / max(|x|, |y|)` over all pairs of magnitudes, with
    /// the pair that attains it. Zero when two entries coincide (including
    /// two zero entries); `None` for fewer than two entries.
    pub fn min_relative_gap(&self) -> Option<(f64, (usize, usize), (usize, usize))> {
        let mut mags: Vec<((usize, usize), f64)> = self.iter().map(|(i, v)| (i, v.norm())).collect();
        mags.sort_by(|a, b| a.1.total_cmp(&b.1));
        mags.windows(2)
            .map(|w| {
                let scale = w[0].1.max(w[1].1);
                let gap = if scale == 0.0 { 0.0 } else { (w[1].1 - w[0].1) / scale };
                (gap, w[0].0, w[1].0)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }

    /// Whether every entry has the same (nonzero) sign of its real part.
    pub fn single_sign(&self) -> bool {
        let pos = self.values.iter().all(|v| v.re > 0.0);
        let neg = self.values.iter().all(|v| v.re < 0.0);
        pos || neg
    }
}
