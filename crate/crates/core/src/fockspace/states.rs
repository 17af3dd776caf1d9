use crate::{CMatrix, CVector, Error, Result, C64};

use super::{HilbertConfig, VibDensity};

/// Description of a vibrational input state.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Fock { n_c: usize, n_r: usize },
    /// Product of geometric distributions, truncated and renormalized.
    Thermal { nbar_c: f64, nbar_r: f64 },
    /// Product coherent state, truncated and renormalized.
    Coherent { alpha_c: C64, alpha_r: C64 },
    /// Pure superposition `Σ c |n_c, n_r⟩`, normalized on construction.
    Superposition(Vec<(usize, usize, C64)>),
}

fn geometric(nbar: f64, n_max: usize) -> Vec<f64> {
    let q = nbar / (nbar + 1.0);
    let mut w = Vec::with_capacity(n_max + 1);
    let mut p = 1.0 / (nbar + 1.0);
    for _ in 0..=n_max {
        w.push(p);
        p *= q;
    }
    w
}

fn coherent_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 0..=n_max {
        out.push(amp);
        amp *= alpha / ((n + 1) as f64).sqrt();
    }
    out
}

pub fn make_vib_state(spec: &StateSpec, config: HilbertConfig) -> Result<VibDensity> {
    let d = config.vib_dim();
    match spec {
        StateSpec::Fock { n_c, n_r } => {
            if !config.contains(*n_c, *n_r) {
                return Err(Error::InvalidState(format!(
                    "Fock state |{n_c},{n_r}> outside the truncated grid"
                )));
            }
            let mut m = CMatrix::zeros(d, d);
            let v = config.vib_index(*n_c, *n_r);
            m[(v, v)] = C64::new(1.0, 0.0);
            VibDensity::new(config, m)
        }
        StateSpec::Thermal { nbar_c, nbar_r } => {
            for (name, nbar) in [("nbar_c", *nbar_c), ("nbar_r", *nbar_r)] {
                if !(nbar.is_finite() && nbar >= 0.0) {
                    return Err(Error::InvalidParameter {
                        name,
                        reason: format!("mean occupation must be >= 0, got {nbar}"),
                    });
                }
            }
            let wc = geometric(*nbar_c, config.n_max_c);
            let wr = geometric(*nbar_r, config.n_max_r);
            let total: f64 = wc.iter().sum::<f64>() * wr.iter().sum::<f64>();
            let mut m = CMatrix::zeros(d, d);
            for (n_c, pc) in wc.iter().enumerate() {
                for (n_r, pr) in wr.iter().enumerate() {
                    let v = config.vib_index(n_c, n_r);
                    m[(v, v)] = C64::new(pc * pr / total, 0.0);
                }
            }
            VibDensity::new(config, m)
        }
        StateSpec::Coherent { alpha_c, alpha_r } => {
            let ac = coherent_amplitudes(*alpha_c, config.n_max_c);
            let ar = coherent_amplitudes(*alpha_r, config.n_max_r);
            let psi = CVector::from_fn(d, |v, _| {
                let (n_c, n_r) = config.vib_levels(v);
                ac[n_c] * ar[n_r]
            });
            VibDensity::from_pure(config, &psi)
        }
        StateSpec::Superposition(terms) => {
            let mut psi = CVector::zeros(d);
            for &(n_c, n_r, amp) in terms {
                if !config.contains(n_c, n_r) {
                    return Err(Error::InvalidState(format!(
                        "component |{n_c},{n_r}> outside the truncated grid"
                    )));
                }
                psi[config.vib_index(n_c, n_r)] += amp;
            }
            if psi.norm() == 0.0 {
                return Err(Error::InvalidState("superposition has zero total norm".into()));
            }
            VibDensity::from_pure(config, &psi)
        }
    }
}
