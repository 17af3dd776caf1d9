use crate::fockspace::{HilbertConfig, JointState};
use crate::linalg::{components, ensure_hermitian, expm_apply, expm_hermitian, submatrix};
use crate::{CMatrix, CVector, Error, Result, C64};

use super::{BichromaticHamiltonian, BichromaticParams};

/// `exp(−iHt) ψ` for time-independent Hermitian `H`.
///
/// `H` is split into the connected components of its coupling graph and only
/// the components that carry amplitude are diagonalized.
pub fn evolve_const(h: &CMatrix, psi0: &CVector, t: f64) -> Result<CVector> {
    ensure_hermitian(h)?;
    if psi0.len() != h.nrows() {
        return Err(Error::DimensionMismatch { expected: h.nrows(), found: psi0.len() });
    }
    if t == 0.0 {
        return Ok(psi0.clone());
    }
    let mut out = CVector::zeros(psi0.len());
    for comp in components(h) {
        if comp.iter().all(|&i| psi0[i] == C64::new(0.0, 0.0)) {
            continue;
        }
        if comp.len() == 1 {
            let i = comp[0];
            out[i] = psi0[i] * C64::from_polar(1.0, -h[(i, i)].re * t);
            continue;
        }
        let u = expm_hermitian(&submatrix(h, &comp), t);
        let local = CVector::from_iterator(comp.len(), comp.iter().map(|&i| psi0[i]));
        let evolved = u * local;
        for (slot, &i) in comp.iter().enumerate() {
            out[i] = evolved[slot];
        }
    }
    Ok(out)
}

/// [`evolve_const`] on a joint state.
pub fn propagate_const(h: &CMatrix, psi0: &JointState, t: f64) -> Result<JointState> {
    let amps = evolve_const(h, &psi0.amplitudes, t)?;
    JointState::new(psi0.config, amps)
}

/// Exponential-midpoint integration of `i ψ̇ = H(t) ψ` from `0` to `t`:
/// `ψ ← exp(−i H(t_mid) dt) ψ` with `|dt| ≤ dt_max`. Second order in `dt`.
pub fn evolve_midpoint<F>(builder: F, psi0: &CVector, t: f64, dt_max: f64) -> Result<CVector>
where
    F: Fn(f64) -> CMatrix,
{
    if !(dt_max > 0.0) {
        return Err(Error::InvalidParameter { name: "dt_max", reason: format!("must be > 0, got {dt_max}") });
    }
    let steps = ((t.abs() / dt_max).ceil() as usize).max(1);
    let dt = t / steps as f64;
    let mut psi = psi0.clone();
    for s in 0..steps {
        let h = builder((s as f64 + 0.5) * dt);
        if s == 0 {
            ensure_hermitian(&h)?;
            if h.nrows() != psi.len() {
                return Err(Error::DimensionMismatch { expected: h.nrows(), found: psi.len() });
            }
        }
        psi = expm_apply(&h, dt, &psi);
    }
    Ok(psi)
}

pub fn propagate_timedep<F>(builder: F, psi0: &JointState, t: f64, dt_max: f64) -> Result<JointState>
where
    F: Fn(f64) -> CMatrix,
{
    let amps = evolve_midpoint(builder, &psi0.amplitudes, t, dt_max)?;
    JointState::new(psi0.config, amps)
}

/// Result of a step-halving run: the fine-step state and `‖ψ_dt − ψ_dt/2‖`.
#[derive(Debug, Clone)]
pub struct Converged<T> {
    pub state: T,
    pub change: f64,
}

/// Runs [`propagate_timedep`] at `dt_max` and `dt_max/2`; fails with
/// [`Error::NonConvergence`] when the two differ by more than `tolerance`.
pub fn propagate_timedep_checked<F>(
    builder: F,
    psi0: &JointState,
    t: f64,
    dt_max: f64,
    tolerance: f64,
) -> Result<Converged<JointState>>
where
    F: Fn(f64) -> CMatrix,
{
    let coarse = evolve_midpoint(&builder, &psi0.amplitudes, t, dt_max)?;
    let fine = evolve_midpoint(&builder, &psi0.amplitudes, t, dt_max / 2.0)?;
    let change = (&coarse - &fine).norm();
    if change > tolerance {
        return Err(Error::NonConvergence { change, tolerance });
    }
    Ok(Converged { state: JointState::new(psi0.config, fine)?, change })
}

/// Evolves `psi0` under the full sideband Hamiltonian, restricted to the
/// subspace reachable from the support of `psi0`, with step halving.
pub fn evolve_bichromatic(
    p: &BichromaticParams,
    config: HilbertConfig,
    psi0: &JointState,
    t: f64,
    dt_max: f64,
    tolerance: f64,
) -> Result<Converged<JointState>> {
    if psi0.config != config {
        return Err(Error::DimensionMismatch { expected: config.dim(), found: psi0.config.dim() });
    }
    let ham = BichromaticHamiltonian::new(p, config);
    let support: Vec<usize> = (0..config.dim())
        .filter(|&i| psi0.amplitudes[i] != C64::new(0.0, 0.0))
        .collect();
    let reach = ham.reachable(&support);
    let sub = ham.restrict(&reach);
    let local = CVector::from_iterator(reach.len(), reach.iter().map(|&i| psi0.amplitudes[i]));

    let coarse = evolve_midpoint(|s| sub.at(s), &local, t, dt_max)?;
    let fine = evolve_midpoint(|s| sub.at(s), &local, t, dt_max / 2.0)?;
    let change = (&coarse - &fine).norm();
    if change > tolerance {
        return Err(Error::NonConvergence { change, tolerance });
    }
    let mut out = JointState::zeros(config);
    for (slot, &i) in reach.iter().enumerate() {
        out.amplitudes[i] = fine[slot];
    }
    Ok(Converged { state: out, change })
}
