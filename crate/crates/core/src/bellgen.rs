//! Pulse protocols that prepare the four two-ion Bell states from
//! `|↓↓⟩ ⊗ |n_c, n_r⟩`, fidelity scoring, and thermal robustness scans.
//!
//! A dispersive pulse of length `π/(4|Ω^k|)` or `3π/(4|Ω^k|)` produces the
//! `Φ` states; a following carrier pulse of length `π/(4|Ω₀|)` rotates them
//! into the `Ψ` states.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::diag::{Diagnosed, Diagnostic};
use crate::dynamics::{
    adiabaticity_ratio, build_carrier_h, build_effective_h, closed_form_dispersive,
    evolve_bichromatic, propagate_const, rabi_effective, BichromaticParams, CarrierParams,
    ADIABATIC_THRESHOLD,
};
pub use crate::dynamics::Sign;
use crate::fockspace::{fidelity, Electronic, HilbertConfig, JointState};
use crate::{Error, Result, C64};

/// Which pair of electronic states a Bell state lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// Superpositions of `|↓↓⟩` and `|↑↑⟩`.
    Phi,
    /// Superpositions of `|↓↑⟩` and `|↑↓⟩`.
    Psi,
}

/// A Bell state together with the phases that fix its relative amplitude.
///
/// * `Phi`: `(|↓↓⟩ ± i(−1)^k e^{2iφ}|↑↑⟩)/√2`, `φ` the drive phase.
/// * `Psi`: `(|↓↑⟩ + e^{iφ₀}|↑↓⟩)/√2`; the `−` partner uses `φ₀ + π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellTarget {
    pub family: Family,
    pub sign: Sign,
    pub k: usize,
    pub phi: f64,
    pub phi0: f64,
}

impl BellTarget {
    pub fn phi(sign: Sign, k: usize, drive_phase: f64) -> Self {
        Self { family: Family::Phi, sign, k, phi: drive_phase, phi0: 0.0 }
    }

    pub fn psi(sign: Sign, phi0: f64) -> Self {
        Self { family: Family::Psi, sign, k: 0, phi: 0.0, phi0 }
    }

    /// Amplitudes in the order `[↓↓, ↓↑, ↑↓, ↑↑]`.
    pub fn electronic(&self) -> [C64; 4] {
        let r = FRAC_1_SQRT_2;
        let zero = C64::new(0.0, 0.0);
        let s = self.sign.value();
        match self.family {
            Family::Phi => {
                let parity = if self.k % 2 == 0 { 1.0 } else { -1.0 };
                let rel = C64::new(0.0, s * parity) * C64::from_polar(1.0, 2.0 * self.phi);
                [C64::new(r, 0.0), zero, zero, rel * r]
            }
            Family::Psi => {
                let phase = self.phi0 + if s < 0.0 { PI } else { 0.0 };
                [zero, C64::new(r, 0.0), C64::from_polar(r, phase), zero]
            }
        }
    }

    /// The target tensored with `|n_c, n_r⟩`.
    pub fn joint(&self, config: HilbertConfig, n_c: usize, n_r: usize) -> JointState {
        JointState::product(config, self.electronic(), n_c, n_r)
    }

    /// `⟨target|ρ_e|target⟩` for a reduced electronic density matrix.
    pub fn electronic_fidelity(&self, rho_e: &crate::CMatrix) -> f64 {
        let t = crate::CVector::from_row_slice(&self.electronic());
        (t.adjoint() * rho_e * &t)[(0, 0)].re
    }

    pub fn label(&self) -> String {
        let name = match self.family {
            Family::Phi => "Phi",
            Family::Psi => "Psi",
        };
        format!("{name}{}", self.sign.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseKind {
    Dispersive(BichromaticParams),
    Carrier(CarrierParams),
}

/// One pulse of a protocol. `global_phase` is the phase the pulse imprints on
/// the whole Fock block it was designed for (the `e^{−i(−1)^kΩ^k t}` factor of
/// a dispersive pulse, zero for a carrier pulse).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub kind: PulseKind,
    pub duration: f64,
    pub global_phase: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PulseSequence {
    pulses: Vec<Pulse>,
}

impl PulseSequence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, pulse: Pulse) -> Result<()> {
        if !(pulse.duration > 0.0 && pulse.duration.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "duration",
                reason: format!("pulse duration must be finite and > 0, got {}", pulse.duration),
            });
        }
        self.pulses.push(pulse);
        Ok(())
    }

    pub fn pulses(&self) -> &[Pulse] {
        &self.pulses
    }

    pub fn total_duration(&self) -> f64 {
        self.pulses.iter().map(|p| p.duration).sum()
    }
}

/// Propagation model used for dispersive pulses. Carrier pulses are always
/// propagated exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    /// Block-diagonal effective Hamiltonian.
    Effective,
    /// Full two-frequency sideband Hamiltonian, midpoint-exponential steps of
    /// at most `dt_max`, accepted when halving the step changes the state by
    /// less than `tolerance`.
    Exact { dt_max: f64, tolerance: f64 },
}

#[derive(Debug, Clone)]
pub struct BellOutput {
    pub state: JointState,
    pub target: BellTarget,
    pub fidelity: f64,
    pub sequence: PulseSequence,
    pub diagnostics: Vec<Diagnostic>,
}

fn parity(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn nonzero_rabi(n_c: usize, n_r: usize, p: &BichromaticParams) -> Result<f64> {
    let rabi = rabi_effective(n_c, n_r, p)?.re;
    if rabi == 0.0 {
        return Err(Error::ZeroRabiFrequency { n_c, n_r });
    }
    Ok(rabi)
}

/// Dispersive pulse time that reaches `Φ^(sign)` from `|↓↓; n_c, n_r⟩`.
///
/// `π/(4|Ω^k|)` gives `Φ⁺` and `3π/(4|Ω^k|)` gives `Φ⁻` when `Ω^k` has the
/// sign `(−1)^{k+1}` (positive detuning); the two times swap otherwise.
pub fn phi_pulse_time(sign: Sign, p: &BichromaticParams, n_c: usize, n_r: usize) -> Result<f64> {
    let rabi = nonzero_rabi(n_c, n_r, p)?;
    let natural = rabi.signum() == -parity(p.k);
    let quarter = match (sign, natural) {
        (Sign::Plus, true) | (Sign::Minus, false) => 1.0,
        _ => 3.0,
    };
    Ok(quarter * FRAC_PI_4 / rabi.abs())
}

fn dispersive_pulse(p: &BichromaticParams, n_c: usize, n_r: usize, duration: f64) -> Result<Pulse> {
    let rabi = nonzero_rabi(n_c, n_r, p)?;
    Ok(Pulse { kind: PulseKind::Dispersive(*p), duration, global_phase: -parity(p.k) * rabi * duration })
}

/// Applies every pulse of `seq` to `psi0` in order.
pub fn run_sequence(seq: &PulseSequence, psi0: &JointState, engine: Engine) -> Result<Diagnosed<JointState>> {
    let config = psi0.config;
    let mut state = psi0.clone();
    let mut diagnostics = Vec::new();
    for pulse in seq.pulses() {
        state = match pulse.kind {
            PulseKind::Dispersive(p) => match engine {
                Engine::Effective => {
                    let h = build_effective_h(&p, config)?;
                    diagnostics.extend(h.diagnostics);
                    propagate_const(&h.value, &state, pulse.duration)?
                }
                Engine::Exact { dt_max, tolerance } => {
                    evolve_bichromatic(&p, config, &state, pulse.duration, dt_max, tolerance)?.state
                }
            },
            PulseKind::Carrier(pc) => propagate_const(&build_carrier_h(&pc, config), &state, pulse.duration)?,
        };
    }
    Ok(Diagnosed::new(state, diagnostics))
}

fn check_vib(config: HilbertConfig, n_c: usize, n_r: usize) -> Result<()> {
    if config.contains(n_c, n_r) {
        Ok(())
    } else {
        Err(Error::InvalidState(format!("Fock state |{n_c},{n_r}> outside the truncated grid")))
    }
}

/// Prepares `Φ^(sign)` from `|↓↓; n_c, n_r⟩` with a single dispersive pulse.
pub fn make_phi(
    sign: Sign,
    p: &BichromaticParams,
    config: HilbertConfig,
    n_c: usize,
    n_r: usize,
    engine: Engine,
) -> Result<BellOutput> {
    p.validate()?;
    p.ensure_symmetric()?;
    check_vib(config, n_c, n_r)?;
    if let Engine::Exact { .. } = engine {
        let ratio = adiabaticity_ratio(p, config.n_max_c, config.n_max_r);
        if ratio < ADIABATIC_THRESHOLD {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!(
                    "adiabaticity ratio {ratio:.3} below {ADIABATIC_THRESHOLD}; the exact evolution will not reach a Bell state"
                ),
            });
        }
    }
    let t = phi_pulse_time(sign, p, n_c, n_r)?;
    let mut sequence = PulseSequence::new();
    sequence.push(dispersive_pulse(p, n_c, n_r, t)?)?;
    let psi0 = JointState::basis(config, Electronic::DownDown, n_c, n_r);
    let out = run_sequence(&sequence, &psi0, engine)?;
    let target = BellTarget::phi(sign, p.k, p.drive_phase());
    let fid = fidelity(&out.value, &target.joint(config, n_c, n_r))?;
    Ok(BellOutput { state: out.value, target, fidelity: fid, sequence, diagnostics: out.diagnostics })
}

/// The `t₊` pulse with `φ → φ + π/2`. It flips the sign of `e^{2iφ}` and so
/// produces the `Φ⁻` state of the unshifted phase convention.
pub fn phase_alternative_phi(p: &BichromaticParams, n_c: usize, n_r: usize) -> Result<PulseSequence> {
    let t = phi_pulse_time(Sign::Plus, p, n_c, n_r)?;
    let shifted = p.with_phases(p.phi + FRAC_PI_2, p.phi0);
    let mut seq = PulseSequence::new();
    seq.push(dispersive_pulse(&shifted, n_c, n_r, t)?)?;
    Ok(seq)
}

/// Prepares the `Ψ` state `(|↓↑⟩ + e^{iφ₀}|↑↓⟩)/√2` (with `φ₀` the carrier's
/// `varphi0`) by a dispersive pulse to `Φ^(start)` followed by a carrier pulse
/// of length `π/(4|Ω₀|)`.
///
/// The carrier phase is set to half the relative `|↑↑⟩/|↓↓⟩` phase of the
/// intermediate `Φ` state; `pc.varphi` is ignored. When that relative phase
/// is `±1` this is the familiar `0` or `π/2` (mod `π`) choice.
pub fn make_psi(
    start: Sign,
    pd: &BichromaticParams,
    pc: &CarrierParams,
    config: HilbertConfig,
    n_c: usize,
    n_r: usize,
    engine: Engine,
) -> Result<BellOutput> {
    let phi_out = make_phi(start, pd, config, n_c, n_r, engine)?;
    let dd = phi_out.state.amplitude(Electronic::DownDown, n_c, n_r);
    let uu = phi_out.state.amplitude(Electronic::UpUp, n_c, n_r);
    let chi = (uu / dd).arg();

    let omega0 = pc.omega0(n_c, n_r);
    if omega0 == 0.0 {
        return Err(Error::ZeroRabiFrequency { n_c, n_r });
    }
    let carrier = CarrierParams { varphi: chi / 2.0 - pc.omega.arg(), ..*pc };
    let t0 = FRAC_PI_4 / omega0.abs();
    let mut sequence = phi_out.sequence;
    sequence.push(Pulse { kind: PulseKind::Carrier(carrier), duration: t0, global_phase: 0.0 })?;

    let state = propagate_const(&build_carrier_h(&carrier, config), &phi_out.state, t0)?;
    let target = BellTarget::psi(Sign::Plus, pc.varphi0);
    let fid = fidelity(&state, &target.joint(config, n_c, n_r))?;
    Ok(BellOutput { state, target, fidelity: fid, sequence, diagnostics: phi_out.diagnostics })
}

/// Smallest `N` with geometric tail `P(n > N) = q^{N+1} ≤ eps`.
fn thermal_cutoff(nbar: f64, eps: f64) -> usize {
    if nbar == 0.0 {
        return 0;
    }
    let q = nbar / (nbar + 1.0);
    ((eps.ln() / q.ln()).ceil() as usize).saturating_sub(1)
}

/// Largest Fock cutoff a thermal scan will use per mode.
pub const THERMAL_MAX_LEVEL: usize = 4000;
/// Thermal weight allowed outside the scanned Fock grid.
pub const THERMAL_TAIL: f64 = 1e-6;

/// Fidelity with `Φ⁺` of the reduced electronic state after a dispersive pulse
/// on `ρ_thermal ⊗ |↓↓⟩⟨↓↓|`.
///
/// Every Fock block evolves independently under the effective dynamics, so
/// the fidelity is the thermal average of the per-block overlaps. The pulse
/// length defaults to the `Φ⁺` time of the `(0, 0)` block.
pub fn thermal_bell_scan(
    nbar_c: f64,
    nbar_r: f64,
    p: &BichromaticParams,
    t_pulse: Option<f64>,
) -> Result<Diagnosed<f64>> {
    p.validate()?;
    p.ensure_symmetric()?;
    for (name, nbar) in [("nbar_c", nbar_c), ("nbar_r", nbar_r)] {
        if !(nbar.is_finite() && nbar >= 0.0) {
            return Err(Error::InvalidParameter { name, reason: format!("must be >= 0, got {nbar}") });
        }
    }
    let t = match t_pulse {
        Some(t) if t > 0.0 && t.is_finite() => t,
        Some(t) => {
            return Err(Error::InvalidParameter { name: "t_pulse", reason: format!("must be > 0, got {t}") })
        }
        None => phi_pulse_time(Sign::Plus, p, 0, 0)?,
    };

    // Scan far enough that the neglected weight is negligible against any
    // fidelity tolerance; give up only if the cap leaves more than the limit.
    let tail_of = |nbar: f64, n: usize| {
        if nbar == 0.0 {
            0.0
        } else {
            (nbar / (nbar + 1.0)).powi(n as i32 + 1)
        }
    };
    let n_c_max = thermal_cutoff(nbar_c, 1e-14).min(THERMAL_MAX_LEVEL);
    let n_r_max = thermal_cutoff(nbar_r, 1e-14).min(THERMAL_MAX_LEVEL);
    let tail = tail_of(nbar_c, n_c_max) + tail_of(nbar_r, n_r_max);
    if tail > THERMAL_TAIL {
        return Err(Error::Truncation { population: tail, limit: THERMAL_TAIL });
    }

    let target = BellTarget::phi(Sign::Plus, p.k, p.drive_phase());
    let t_amp = target.electronic();
    let weights = |nbar: f64, n_max: usize| -> Vec<f64> {
        let q = nbar / (nbar + 1.0);
        let mut w = Vec::with_capacity(n_max + 1);
        let mut x = 1.0 / (nbar + 1.0);
        for _ in 0..=n_max {
            w.push(x);
            x *= q;
        }
        w
    };
    let wc = weights(nbar_c, n_c_max);
    let wr = weights(nbar_r, n_r_max);

    let rows: Vec<Result<f64>> = (0..=n_c_max)
        .into_par_iter()
        .map(|n_c| {
            let mut acc = 0.0;
            for (n_r, &w) in wr.iter().enumerate() {
                let [dd, uu] = closed_form_dispersive(n_c, n_r, p, t)?;
                let overlap = t_amp[0].conj() * dd + t_amp[3].conj() * uu;
                acc += w * overlap.norm_sqr();
            }
            Ok(wc[n_c] * acc)
        })
        .collect();
    let mut fid = 0.0;
    for r in rows {
        fid += r?;
    }

    let diagnostics = vec![Diagnostic::Note(format!(
        "thermal scan over {}x{} Fock blocks, neglected weight {tail:.1e}",
        n_c_max + 1,
        n_r_max + 1
    ))];
    Ok(Diagnosed::new(fid, diagnostics))
}

/// `max |Ω^k_{n_c n_r}/Ω^k_{00} − 1|` over the grid.
pub fn rabi_dispersion(p: &BichromaticParams, n_c_max: usize, n_r_max: usize) -> Result<f64> {
    let base = nonzero_rabi(0, 0, p)?;
    let mut worst: f64 = 0.0;
    for n_c in 0..=n_c_max {
        for n_r in 0..=n_r_max {
            worst = worst.max((rabi_effective(n_c, n_r, p)?.re / base - 1.0).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{make_vib_state, ModeParams, StateSpec};

    fn drive(k: usize, delta: f64) -> BichromaticParams {
        BichromaticParams::symmetric(k, delta, C64::new(0.01, 0.0), ModeParams::new(0.15)).with_phases(0.4, 0.8)
    }

    #[test]
    fn targets_are_normalized_and_distinct() {
        let all = [
            BellTarget::phi(Sign::Plus, 1, 0.3),
            BellTarget::phi(Sign::Minus, 1, 0.3),
            BellTarget::psi(Sign::Plus, 0.7),
            BellTarget::psi(Sign::Minus, 0.7),
        ];
        for (i, a) in all.iter().enumerate() {
            let va = crate::CVector::from_row_slice(&a.electronic());
            assert!((va.norm() - 1.0).abs() < 1e-15);
            for b in &all[i + 1..] {
                let vb = crate::CVector::from_row_slice(&b.electronic());
                assert!(va.dotc(&vb).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn phi_states_for_every_fock_block() {
        let cfg = HilbertConfig::new(4, 3);
        for sign in [Sign::Plus, Sign::Minus] {
            for (k, delta) in [(1, 0.02), (1, -0.02), (2, 0.03), (2, -0.01)] {
                for (n_c, n_r) in [(0, 0), (2, 1), (4, 3)] {
                    let out = make_phi(sign, &drive(k, delta), cfg, n_c, n_r, Engine::Effective).unwrap();
                    assert!((out.fidelity - 1.0).abs() < 1e-10, "{sign:?} k={k} δ={delta} ({n_c},{n_r})");
                }
            }
        }
    }

    #[test]
    fn pulse_times_follow_quarter_periods() {
        let p = drive(1, 0.02);
        let rabi = rabi_effective(0, 0, &p).unwrap().norm();
        assert!((phi_pulse_time(Sign::Plus, &p, 0, 0).unwrap() - PI / (4.0 * rabi)).abs() < 1e-9);
        assert!((phi_pulse_time(Sign::Minus, &p, 0, 0).unwrap() - 3.0 * PI / (4.0 * rabi)).abs() < 1e-9);
    }

    #[test]
    fn zero_rabi_frequency_is_refused() {
        let p = BichromaticParams::symmetric(1, 0.02, C64::new(0.0, 0.0), ModeParams::new(0.1));
        let err = make_phi(Sign::Plus, &p, HilbertConfig::new(1, 1), 0, 0, Engine::Effective).unwrap_err();
        assert_eq!(err, Error::ZeroRabiFrequency { n_c: 0, n_r: 0 });
    }

    #[test]
    fn phase_shift_gives_other_phi() {
        let cfg = HilbertConfig::new(3, 2);
        let p = drive(1, 0.02);
        let seq = phase_alternative_phi(&p, 1, 2).unwrap();
        let psi0 = JointState::basis(cfg, Electronic::DownDown, 1, 2);
        let out = run_sequence(&seq, &psi0, Engine::Effective).unwrap().value;
        let minus = BellTarget::phi(Sign::Minus, 1, p.drive_phase()).joint(cfg, 1, 2);
        assert!((fidelity(&out, &minus).unwrap() - 1.0).abs() < 1e-10);

        // A second π/2 shift returns to the original target.
        let PulseKind::Dispersive(shifted) = seq.pulses()[0].kind else { panic!() };
        let seq2 = phase_alternative_phi(&shifted, 1, 2).unwrap();
        let out2 = run_sequence(&seq2, &psi0, Engine::Effective).unwrap().value;
        let plus = BellTarget::phi(Sign::Plus, 1, p.drive_phase()).joint(cfg, 1, 2);
        assert!((fidelity(&out2, &plus).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn psi_from_either_phi() {
        let cfg = HilbertConfig::new(3, 2);
        for (k, delta) in [(1, 0.02), (2, 0.02), (1, -0.03)] {
            let pd = drive(k, delta);
            let pc = CarrierParams::new(C64::new(0.2, 0.05), 0.0, 1.234, pd.modes);
            for start in [Sign::Plus, Sign::Minus] {
                let out = make_psi(start, &pd, &pc, cfg, 2, 1, Engine::Effective).unwrap();
                assert!((out.fidelity - 1.0).abs() < 1e-10, "k={k} {start:?}");
                assert_eq!(out.sequence.pulses().len(), 2);
            }
        }
    }

    #[test]
    fn paper_phase_rule_with_real_phi() {
        // With i(−1)^k e^{2iφ} = 1 (k = 1, φ = π/4) the intermediate Φ± are (|↓↓⟩ ± |↑↑⟩)/√2
        // and the carrier phases are 0 and π/2.
        let mut pd = drive(1, 0.02);
        pd.phi = PI / 4.0;
        let pc = CarrierParams::new(C64::new(0.2, 0.0), 0.0, 0.5, pd.modes);
        let cfg = HilbertConfig::new(1, 1);
        for (start, want) in [(Sign::Plus, 0.0), (Sign::Minus, FRAC_PI_2)] {
            let out = make_psi(start, &pd, &pc, cfg, 0, 0, Engine::Effective).unwrap();
            let PulseKind::Carrier(c) = out.sequence.pulses()[1].kind else { panic!() };
            let diff = (c.varphi - want).rem_euclid(PI);
            assert!(diff < 1e-12 || PI - diff < 1e-12, "{start:?}: {}", c.varphi);
            assert!(out.state.electronic_population(Electronic::DownDown) < 1e-20);
            assert!(out.state.electronic_population(Electronic::UpUp) < 1e-20);
        }
    }

    #[test]
    fn psi_partner_is_orthogonal() {
        let cfg = HilbertConfig::new(2, 2);
        let pd = drive(1, 0.02);
        let pc = CarrierParams::new(C64::new(0.2, 0.0), 0.0, 0.9, pd.modes);
        let a = make_psi(Sign::Plus, &pd, &pc, cfg, 1, 1, Engine::Effective).unwrap();
        let pc2 = CarrierParams { varphi0: 0.9 + PI, ..pc };
        let b = make_psi(Sign::Plus, &pd, &pc2, cfg, 1, 1, Engine::Effective).unwrap();
        assert!(a.state.amplitudes.dotc(&b.state.amplitudes).norm() < 1e-10);
    }

    #[test]
    fn bell_outputs_leave_vibration_untouched() {
        let cfg = HilbertConfig::new(3, 2);
        let pd = drive(2, 0.02);
        let pc = CarrierParams::new(C64::new(0.2, 0.0), 0.0, 0.3, pd.modes);
        let (n_c, n_r) = (3, 1);
        let vib_in = make_vib_state(&StateSpec::Fock { n_c, n_r }, cfg).unwrap();
        let pc_minus = CarrierParams { varphi0: 0.3 + PI, ..pc };
        let outputs = [
            make_phi(Sign::Plus, &pd, cfg, n_c, n_r, Engine::Effective).unwrap().state,
            make_phi(Sign::Minus, &pd, cfg, n_c, n_r, Engine::Effective).unwrap().state,
            make_psi(Sign::Plus, &pd, &pc, cfg, n_c, n_r, Engine::Effective).unwrap().state,
            make_psi(Sign::Plus, &pd, &pc_minus, cfg, n_c, n_r, Engine::Effective).unwrap().state,
        ];
        for (i, s) in outputs.iter().enumerate() {
            assert!(s.reduced_vib().trace_distance(&vib_in).unwrap() < 1e-9);
            for o in &outputs[i + 1..] {
                assert!(s.amplitudes.dotc(&o.amplitudes).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn exact_engine_needs_adiabatic_drive() {
        let p = BichromaticParams::symmetric(1, 0.001, C64::new(0.05, 0.0), ModeParams::new(0.1));
        let err = make_phi(Sign::Plus, &p, HilbertConfig::new(4, 1), 0, 0, Engine::Exact { dt_max: 0.1, tolerance: 1e-3 });
        assert!(matches!(err, Err(Error::InvalidParameter { name: "delta", .. })));
    }

    #[test]
    fn thermal_scan_reduces_to_pure_case() {
        let p = drive(1, 0.02);
        let thermal = thermal_bell_scan(0.0, 0.0, &p, None).unwrap().value;
        let pure = make_phi(Sign::Plus, &p, HilbertConfig::new(0, 0), 0, 0, Engine::Effective).unwrap();
        assert!((thermal - pure.fidelity).abs() < 1e-12);
    }

    #[test]
    fn thermal_scan_matches_density_matrix_average() {
        // Reference: propagate every Fock block numerically and average the
        // reduced electronic density matrices with thermal weights.
        let p = BichromaticParams::symmetric(1, 0.02, C64::new(0.01, 0.0), ModeParams::new(0.2));
        let (nc, nr): (f64, f64) = (0.05, 0.03);
        let cfg = HilbertConfig::new(8, 8);
        let t = phi_pulse_time(Sign::Plus, &p, 0, 0).unwrap();
        let h = build_effective_h(&p, cfg).unwrap().value;
        let mut rho_e = crate::CMatrix::zeros(4, 4);
        for n_c in 0..=8 {
            for n_r in 0..=8 {
                let w = (1.0 / (nc + 1.0)) * (nc / (nc + 1.0)).powi(n_c as i32)
                    * (1.0 / (nr + 1.0)) * (nr / (nr + 1.0)).powi(n_r as i32);
                let psi = JointState::basis(cfg, Electronic::DownDown, n_c, n_r);
                let out = propagate_const(&h, &psi, t).unwrap();
                rho_e += out.reduced_electronic() * C64::new(w, 0.0);
            }
        }
        let reference = BellTarget::phi(Sign::Plus, 1, p.drive_phase()).electronic_fidelity(&rho_e);
        let scan = thermal_bell_scan(nc, nr, &p, Some(t)).unwrap().value;
        assert!((scan - reference).abs() < 1e-9, "{scan} vs {reference}");
    }

    #[test]
    fn thermal_scan_rejects_bad_input() {
        let p = drive(1, 0.02);
        assert!(thermal_bell_scan(-0.1, 0.0, &p, None).is_err());
        assert!(thermal_bell_scan(0.1, 0.0, &p, Some(0.0)).is_err());
        assert!(matches!(thermal_bell_scan(1e4, 0.0, &p, None), Err(Error::Truncation { .. })));
    }

    #[test]
    fn cutoff_meets_tail_budget() {
        for nbar in [0.01, 0.5, 3.0, 20.0] {
            let n = thermal_cutoff(nbar, 1e-8);
            let q: f64 = nbar / (nbar + 1.0);
            assert!(q.powi(n as i32 + 1) <= 1e-8);
            assert!(n == 0 || q.powi(n as i32) > 1e-8);
        }
    }
}
