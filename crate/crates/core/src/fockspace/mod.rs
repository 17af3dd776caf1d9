//! Truncated two-mode Fock space tensored with the two-ion electronic space.
//!
//! Joint basis ordering is row-major `(electronic, n_c, n_r)`: the electronic
//! index varies slowest (`|↓↓⟩ = 0, |↓↑⟩ = 1, |↑↓⟩ = 2, |↑↑⟩ = 3`, ion 1
//! written first), then the center-of-mass occupation `n_c`, then the stretch
//! occupation `n_r` fastest.

mod operators;
mod special;
mod states;

use std::fmt;

pub use operators::{
    annihilation, displacement, electronic_lowering, electronic_raising, mode_operators,
    ModeOperators,
};
pub use special::{coupling_f, falling_ratio, laguerre, rising_ratio};
pub use states::{make_vib_state, StateSpec};

use crate::diag::Diagnostic;
use crate::{CMatrix, CVector, Error, Result, C64};

/// Population in the top two levels of a mode above which a truncation
/// diagnostic is raised.
pub const GUARD_BAND: f64 = 1e-6;

/// Truncation bounds of the two vibrational modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HilbertConfig {
    pub n_max_c: usize,
    pub n_max_r: usize,
}

impl HilbertConfig {
    pub fn new(n_max_c: usize, n_max_r: usize) -> Self {
        Self { n_max_c, n_max_r }
    }

    /// Dimension of the two-mode vibrational space.
    pub fn vib_dim(&self) -> usize {
        (self.n_max_c + 1) * (self.n_max_r + 1)
    }

    /// Dimension of the joint space, `4·(n_max_c+1)·(n_max_r+1)`.
    pub fn dim(&self) -> usize {
        4 * self.vib_dim()
    }

    pub fn vib_index(&self, n_c: usize, n_r: usize) -> usize {
        debug_assert!(n_c <= self.n_max_c && n_r <= self.n_max_r);
        n_c * (self.n_max_r + 1) + n_r
    }

    pub fn vib_levels(&self, v: usize) -> (usize, usize) {
        (v / (self.n_max_r + 1), v % (self.n_max_r + 1))
    }

    pub fn index(&self, e: Electronic, n_c: usize, n_r: usize) -> usize {
        e as usize * self.vib_dim() + self.vib_index(n_c, n_r)
    }

    pub fn decompose(&self, idx: usize) -> (Electronic, usize, usize) {
        let (e, v) = (idx / self.vib_dim(), idx % self.vib_dim());
        let (n_c, n_r) = self.vib_levels(v);
        (Electronic::ALL[e], n_c, n_r)
    }

    pub fn contains(&self, n_c: usize, n_r: usize) -> bool {
        n_c <= self.n_max_c && n_r <= self.n_max_r
    }

    pub fn n_max(&self, mode: Mode) -> usize {
        match mode {
            Mode::Com => self.n_max_c,
            Mode::Stretch => self.n_max_r,
        }
    }
}

/// Two-ion electronic basis states, ion 1 first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Electronic {
    DownDown = 0,
    DownUp = 1,
    UpDown = 2,
    UpUp = 3,
}

impl Electronic {
    pub const ALL: [Electronic; 4] =
        [Electronic::DownDown, Electronic::DownUp, Electronic::UpDown, Electronic::UpUp];

    /// Whether ion `ion` (1 or 2) is in `|↑⟩`.
    pub fn is_up(self, ion: usize) -> bool {
        let bit = if ion == 1 { 2 } else { 1 };
        (self as usize) & bit != 0
    }

    pub fn label(self) -> &'static str {
        match self {
            Electronic::DownDown => "dd",
            Electronic::DownUp => "du",
            Electronic::UpDown => "ud",
            Electronic::UpUp => "uu",
        }
    }
}

/// Vibrational mode selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Center of mass, frequency `ν`.
    Com,
    /// Stretch (relative) mode, frequency `√3 ν`.
    Stretch,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Com => "center-of-mass",
            Mode::Stretch => "stretch",
        })
    }
}

/// Lamb-Dicke parameters and the trap frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeParams {
    pub eta: f64,
    pub eta_r: f64,
    pub nu: f64,
}

impl ModeParams {
    /// Uses `η_r = η·3^{−1/4}`: the stretch frequency is `√3 ν` and the
    /// Lamb-Dicke parameter scales as `ν^{−1/2}`.
    pub fn new(eta: f64) -> Self {
        Self { eta, eta_r: eta * 3f64.powf(-0.25), nu: 1.0 }
    }

    pub fn with_eta_r(mut self, eta_r: f64) -> Self {
        self.eta_r = eta_r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("eta_r", self.eta_r), ("nu", self.nu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be > 0, got {v}") });
            }
        }
        Ok(())
    }
}

/// Pure state of the joint electronic ⊗ two-mode space.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub config: HilbertConfig,
    pub amplitudes: CVector,
}

impl JointState {
    pub fn new(config: HilbertConfig, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != config.dim() {
            return Err(Error::DimensionMismatch { expected: config.dim(), found: amplitudes.len() });
        }
        Ok(Self { config, amplitudes })
    }

    pub fn zeros(config: HilbertConfig) -> Self {
        Self { config, amplitudes: CVector::zeros(config.dim()) }
    }

    /// `|e⟩ ⊗ |n_c, n_r⟩`.
    pub fn basis(config: HilbertConfig, e: Electronic, n_c: usize, n_r: usize) -> Self {
        let mut s = Self::zeros(config);
        s.amplitudes[config.index(e, n_c, n_r)] = C64::new(1.0, 0.0);
        s
    }

    /// `(Σ_e c_e |e⟩) ⊗ |n_c, n_r⟩`.
    pub fn product(config: HilbertConfig, electronic: [C64; 4], n_c: usize, n_r: usize) -> Self {
        let mut s = Self::zeros(config);
        for e in Electronic::ALL {
            s.amplitudes[config.index(e, n_c, n_r)] = electronic[e as usize];
        }
        s
    }

    /// `|e⟩ ⊗ |vib⟩` for a vibrational vector over the two-mode grid.
    pub fn with_vib(config: HilbertConfig, e: Electronic, vib: &CVector) -> Result<Self> {
        if vib.len() != config.vib_dim() {
            return Err(Error::DimensionMismatch { expected: config.vib_dim(), found: vib.len() });
        }
        let mut s = Self::zeros(config);
        let off = e as usize * config.vib_dim();
        s.amplitudes.rows_mut(off, vib.len()).copy_from(vib);
        Ok(s)
    }

    pub fn amplitude(&self, e: Electronic, n_c: usize, n_r: usize) -> C64 {
        self.amplitudes[self.config.index(e, n_c, n_r)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Total population of one electronic state summed over the Fock grid.
    pub fn electronic_population(&self, e: Electronic) -> f64 {
        let d = self.config.vib_dim();
        self.amplitudes.rows(e as usize * d, d).norm_squared()
    }

    /// Reduced electronic density matrix (4×4) after tracing out the modes.
    pub fn reduced_electronic(&self) -> CMatrix {
        let d = self.config.vib_dim();
        let blocks = nalgebra::DMatrix::from_column_slice(d, 4, self.amplitudes.as_slice());
        // rho_e[i, j] = Σ_v ψ(i, v) ψ(j, v)*
        blocks.transpose() * blocks.map(|z| z.conj())
    }

    /// Reduced vibrational density matrix after tracing out the electronic state.
    pub fn reduced_vib(&self) -> VibDensity {
        let d = self.config.vib_dim();
        let blocks = nalgebra::DMatrix::from_column_slice(d, 4, self.amplitudes.as_slice());
        VibDensity { config: self.config, matrix: &blocks * blocks.adjoint() }
    }
}

/// `|⟨target|state⟩|²`.
pub fn fidelity(state: &JointState, target: &JointState) -> Result<f64> {
    if state.config != target.config {
        return Err(Error::DimensionMismatch { expected: target.config.dim(), found: state.config.dim() });
    }
    Ok(target.amplitudes.dotc(&state.amplitudes).norm_sqr())
}

/// Vibrational density operator on the two-mode Fock grid of `config`.
#[derive(Debug, Clone, PartialEq)]
pub struct VibDensity {
    pub config: HilbertConfig,
    pub matrix: CMatrix,
}

/// Outcome of [`VibDensity::check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityCheck {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl DensityCheck {
    pub fn passes(&self) -> bool {
        self.hermiticity <= 1e-12 && self.trace_error <= 1e-9 && self.min_eigenvalue >= -1e-10
    }
}

impl VibDensity {
    pub fn new(config: HilbertConfig, matrix: CMatrix) -> Result<Self> {
        let d = config.vib_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        Ok(Self { config, matrix })
    }

    /// `|ψ⟩⟨ψ|` for a vibrational vector, normalized.
    pub fn from_pure(config: HilbertConfig, psi: &CVector) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero-norm vibrational vector".into()));
        }
        let psi = psi / C64::new(norm, 0.0);
        Self::new(config, &psi * psi.adjoint())
    }

    pub fn population(&self, n_c: usize, n_r: usize) -> f64 {
        let v = self.config.vib_index(n_c, n_r);
        self.matrix[(v, v)].re
    }

    /// Diagonal populations in vibrational index order.
    pub fn populations(&self) -> Vec<f64> {
        (0..self.config.vib_dim()).map(|v| self.matrix[(v, v)].re).collect()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn check(&self) -> DensityCheck {
        let herm = (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let hermitian_part = (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0);
        let min_eigenvalue = crate::linalg::eigh(&hermitian_part).0.min();
        DensityCheck { hermiticity: herm, trace_error: (self.trace() - 1.0).abs(), min_eigenvalue }
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &VibDensity) -> Result<f64> {
        if self.config != other.config {
            return Err(Error::DimensionMismatch { expected: self.config.vib_dim(), found: other.config.vib_dim() });
        }
        let diff = &self.matrix - &other.matrix;
        let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
        Ok(0.5 * crate::linalg::eigh(&herm).0.iter().map(|x| x.abs()).sum::<f64>())
    }

    /// Population of the top two Fock levels of each mode; a diagnostic per
    /// mode whose tail exceeds [`GUARD_BAND`].
    pub fn guard_band(&self) -> Vec<Diagnostic> {
        let cfg = self.config;
        let mut out = Vec::new();
        for mode in [Mode::Com, Mode::Stretch] {
            let n_max = cfg.n_max(mode);
            let lo = n_max.saturating_sub(1);
            let mut tail = 0.0;
            for n_c in 0..=cfg.n_max_c {
                for n_r in 0..=cfg.n_max_r {
                    let n = if mode == Mode::Com { n_c } else { n_r };
                    if n >= lo {
                        tail += self.population(n_c, n_r);
                    }
                }
            }
            if tail > GUARD_BAND {
                out.push(Diagnostic::Truncation { mode, population: tail });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_layout() {
        let cfg = HilbertConfig::new(2, 3);
        assert_eq!(cfg.dim(), 4 * 3 * 4);
        assert_eq!(cfg.index(Electronic::DownDown, 0, 0), 0);
        assert_eq!(cfg.index(Electronic::DownDown, 0, 1), 1);
        assert_eq!(cfg.index(Electronic::DownDown, 1, 0), 4);
        assert_eq!(cfg.index(Electronic::DownUp, 0, 0), 12);
        assert_eq!(cfg.index(Electronic::UpUp, 2, 3), 47);
        for idx in 0..cfg.dim() {
            let (e, c, r) = cfg.decompose(idx);
            assert_eq!(cfg.index(e, c, r), idx);
        }
    }

    #[test]
    fn electronic_bits() {
        assert!(Electronic::UpDown.is_up(1) && !Electronic::UpDown.is_up(2));
        assert!(Electronic::DownUp.is_up(2) && !Electronic::DownUp.is_up(1));
    }

    #[test]
    fn eta_r_default() {
        let m = ModeParams::new(0.23);
        assert!((m.eta_r - 0.23 / 3f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(m.with_eta_r(0.1).eta_r, 0.1);
        assert!(ModeParams::new(-0.1).validate().is_err());
    }

    #[test]
    fn fidelity_cases() {
        let cfg = HilbertConfig::new(1, 1);
        let dd = JointState::basis(cfg, Electronic::DownDown, 0, 0);
        let uu = JointState::basis(cfg, Electronic::UpUp, 0, 0);
        assert_eq!(fidelity(&dd, &dd).unwrap(), 1.0);
        assert_eq!(fidelity(&dd, &uu).unwrap(), 0.0);
        let other = JointState::basis(HilbertConfig::new(2, 1), Electronic::DownDown, 0, 0);
        assert!(matches!(fidelity(&dd, &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn reduced_states() {
        let cfg = HilbertConfig::new(2, 1);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = JointState::product(
            cfg,
            [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, s)],
            1,
            1,
        );
        let rho_e = psi.reduced_electronic();
        assert!((rho_e[(0, 3)] - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((rho_e[(3, 0)] - C64::new(0.0, 0.5)).norm() < 1e-15);
        let rho_v = psi.reduced_vib();
        assert!((rho_v.population(1, 1) - 1.0).abs() < 1e-15);
    }
}
