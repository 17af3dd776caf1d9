use crate::{Result, C64};

use super::{rabi_effective, BichromaticParams, CarrierParams};

/// Relative sign of a two-term superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// Amplitudes `[⟨↓↓|, ⟨↑↑|]` of `exp(−iH_eff t)|↓↓; n_c, n_r⟩`.
///
/// With `Ω = Ω^k_{n_c n_r}` (signed) and `φ` the drive phase:
/// `e^{−i(−1)^k Ω t} [cos(Ωt) |↓↓⟩ − i e^{2iφ} sin(Ωt) |↑↑⟩]`.
pub fn closed_form_dispersive(n_c: usize, n_r: usize, p: &BichromaticParams, t: f64) -> Result<[C64; 2]> {
    let rabi = rabi_effective(n_c, n_r, p)?.re;
    let parity = if p.k % 2 == 0 { 1.0 } else { -1.0 };
    let global = C64::from_polar(1.0, -parity * rabi * t);
    let theta = rabi * t;
    let coupling = C64::from_polar(1.0, 2.0 * p.drive_phase());
    Ok([
        global * theta.cos(),
        global * C64::new(0.0, -theta.sin()) * coupling,
    ])
}

/// Amplitudes `[↓↓, ↓↑, ↑↓, ↑↑]` after a carrier pulse of length `t` acting
/// on `(|↓↓⟩ ± |↑↑⟩)/√2 ⊗ |n_c, n_r⟩`.
pub fn closed_form_carrier(sign: Sign, p: &CarrierParams, n_c: usize, n_r: usize, t: f64) -> [C64; 4] {
    let s_sign = sign.value();
    let theta = p.omega0(n_c, n_r) * t;
    let (s, c) = theta.sin_cos();
    let phi = p.drive_phase();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let e2 = C64::from_polar(1.0, 2.0 * phi);
    let mixed = C64::from_polar(1.0, phi) + s_sign * C64::from_polar(1.0, -phi);
    let flip = C64::new(0.0, -0.5 * (2.0 * theta).sin()) * mixed * r;
    [
        (C64::new(c * c, 0.0) - s_sign * s * s * e2.conj()) * r,
        flip * C64::from_polar(1.0, -0.5 * p.varphi0),
        flip * C64::from_polar(1.0, 0.5 * p.varphi0),
        (C64::new(s_sign * c * c, 0.0) - s * s * e2) * r,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_carrier_h, build_effective_h, propagate_const};
    use crate::fockspace::{Electronic, HilbertConfig, JointState, ModeParams};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dispersive_matches_numerics_per_fock_state() {
        let cfg = HilbertConfig::new(6, 3);
        for (k, delta) in [(1usize, 0.01), (1, -0.02), (2, 0.03), (3, -0.015)] {
            let p = BichromaticParams::symmetric(k, delta, c(0.01, 0.004), ModeParams::new(0.25)).with_phases(0.7, 1.3);
            let h = build_effective_h(&p, cfg).unwrap().value;
            for (n_c, n_r) in [(0, 0), (1, 0), (3, 2), (6, 3)] {
                let t = 0.37 / rabi_effective(n_c, n_r, &p).unwrap().norm();
                let psi = JointState::basis(cfg, Electronic::DownDown, n_c, n_r);
                let num = propagate_const(&h, &psi, t).unwrap();
                let cf = closed_form_dispersive(n_c, n_r, &p, t).unwrap();
                let dd = num.amplitude(Electronic::DownDown, n_c, n_r);
                let uu = num.amplitude(Electronic::UpUp, n_c, n_r);
                assert!((dd - cf[0]).norm() < 1e-10, "k={k} n=({n_c},{n_r})");
                assert!((uu - cf[1]).norm() < 1e-10, "k={k} n=({n_c},{n_r})");
            }
        }
    }

    #[test]
    fn dispersive_matches_numerics_for_superposition() {
        let cfg = HilbertConfig::new(5, 2);
        let p = BichromaticParams::symmetric(1, 0.02, c(0.01, 0.0), ModeParams::new(0.2)).with_phases(-0.4, 0.9);
        let h = build_effective_h(&p, cfg).unwrap().value;
        let comps = [((0, 0), c(0.6, 0.0)), ((2, 1), c(0.0, 0.48)), ((5, 2), c(-0.64, 0.0))];
        let mut psi = JointState::zeros(cfg);
        for &((n_c, n_r), a) in &comps {
            psi.amplitudes[cfg.index(Electronic::DownDown, n_c, n_r)] = a;
        }
        let t = 1234.0;
        let num = propagate_const(&h, &psi, t).unwrap();
        for &((n_c, n_r), a) in &comps {
            let cf = closed_form_dispersive(n_c, n_r, &p, t).unwrap();
            assert!((num.amplitude(Electronic::DownDown, n_c, n_r) - a * cf[0]).norm() < 1e-10);
            assert!((num.amplitude(Electronic::UpUp, n_c, n_r) - a * cf[1]).norm() < 1e-10);
        }
    }

    #[test]
    fn carrier_matches_numerics() {
        let cfg = HilbertConfig::new(4, 2);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        for sign in [Sign::Plus, Sign::Minus] {
            let p = CarrierParams::new(c(0.2, -0.1), 0.35, 1.1, ModeParams::new(0.3));
            let h = build_carrier_h(&p, cfg);
            let comps = [((0, 0), c(0.6, 0.0)), ((1, 2), c(0.0, 0.64)), ((4, 1), c(0.48, 0.0))];
            let mut psi = JointState::zeros(cfg);
            for &((n_c, n_r), a) in &comps {
                psi.amplitudes[cfg.index(Electronic::DownDown, n_c, n_r)] = a * r;
                psi.amplitudes[cfg.index(Electronic::UpUp, n_c, n_r)] = a * r * sign.value();
            }
            let t = 3.7;
            let num = propagate_const(&h, &psi, t).unwrap();
            for &((n_c, n_r), a) in &comps {
                let cf = closed_form_carrier(sign, &p, n_c, n_r, t);
                for (e, want) in Electronic::ALL.iter().zip(cf) {
                    let got = num.amplitude(*e, n_c, n_r);
                    assert!((got - a * want).norm() < 1e-10, "{sign:?} {e:?} ({n_c},{n_r})");
                }
            }
        }
    }
}
