use std::collections::VecDeque;

use crate::diag::{Diagnosed, Diagnostic};
use crate::fockspace::{coupling_f, electronic_raising, rising_ratio, HilbertConfig};
use crate::{CMatrix, Result, C64};

use super::guard::{adiabaticity_ratio, ADIABATIC_THRESHOLD, RWA_LIMIT};
use super::{effective_weight, omega_k_scale, BichromaticParams, CarrierParams};

/// Sparse matrix entry `(row, column, value)`.
pub type Triplet = (usize, usize, C64);

/// `e^{iφ₀/2} S₊₁ + e^{−iφ₀/2} S₊₂`.
fn primed_raising_sum(phi0: f64) -> CMatrix {
    electronic_raising(1) * C64::from_polar(1.0, phi0 / 2.0)
        + electronic_raising(2) * C64::from_polar(1.0, -phi0 / 2.0)
}

/// `E ⊗ V` for a dense 4×4 electronic factor and sparse vibrational entries.
fn tensor_triplets(elec: &CMatrix, vib: &[(usize, usize, f64)], vib_dim: usize) -> Vec<Triplet> {
    let mut out = Vec::new();
    for e1 in 0..4 {
        for e2 in 0..4 {
            let c = elec[(e1, e2)];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            for &(v1, v2, x) in vib {
                out.push((e1 * vib_dim + v1, e2 * vib_dim + v2, c * x));
            }
        }
    }
    out
}

fn dense_from(dim: usize, terms: &[Triplet], coeff: C64) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for &(i, j, v) in terms {
        m[(i, j)] += coeff * v;
    }
    m
}

/// The sideband Hamiltonian
///
/// `H(t) = e^{iδt} P + e^{−iδ′t} Q + h.c.`
///
/// with `P = Ω e^{iφ}(iη)^k S′ ⊗ a†^k F_k` (blue field) and
/// `Q = Ω e^{iφ}(iη)^{k′} S′ ⊗ F_{k′} a^{k′}` (red field), `S′` the primed
/// raising sum. Both parts are kept sparse so the propagator can restrict
/// them to the subspace reachable from the initial state.
#[derive(Debug, Clone)]
pub struct BichromaticHamiltonian {
    pub dim: usize,
    pub blue: Vec<Triplet>,
    pub red: Vec<Triplet>,
    pub delta: f64,
    pub delta_prime: f64,
}

impl BichromaticHamiltonian {
    pub fn new(p: &BichromaticParams, config: HilbertConfig) -> Self {
        let vd = config.vib_dim();
        let s_sum = primed_raising_sum(p.phi0);
        let base = p.omega * C64::from_polar(1.0, p.phi);

        // a†^k F_k : |n_c, n_r⟩ → √((n_c+k)!/n_c!) f_k |n_c+k, n_r⟩
        let mut raise = Vec::new();
        // F_{k′} a^{k′} : |n_c+k′, n_r⟩ → √((n_c+k′)!/n_c!) f_{k′}(n_c) |n_c, n_r⟩
        let mut lower = Vec::new();
        for n_c in 0..=config.n_max_c {
            for n_r in 0..=config.n_max_r {
                if n_c + p.k <= config.n_max_c {
                    let x = rising_ratio(n_c, p.k).sqrt() * coupling_f(n_c, n_r, p.k, &p.modes);
                    raise.push((config.vib_index(n_c + p.k, n_r), config.vib_index(n_c, n_r), x));
                }
                if n_c + p.k_prime <= config.n_max_c {
                    let x = rising_ratio(n_c, p.k_prime).sqrt()
                        * coupling_f(n_c, n_r, p.k_prime, &p.modes);
                    lower.push((config.vib_index(n_c, n_r), config.vib_index(n_c + p.k_prime, n_r), x));
                }
            }
        }
        let blue_e = &s_sum * (base * C64::new(0.0, p.modes.eta).powu(p.k as u32));
        let red_e = &s_sum * (base * C64::new(0.0, p.modes.eta).powu(p.k_prime as u32));
        Self {
            dim: config.dim(),
            blue: tensor_triplets(&blue_e, &raise, vd),
            red: tensor_triplets(&red_e, &lower, vd),
            delta: p.delta,
            delta_prime: p.delta_prime,
        }
    }

    /// Dense `H(t)`, Hermitian by construction.
    pub fn at(&self, t: f64) -> CMatrix {
        let mut m = dense_from(self.dim, &self.blue, C64::from_polar(1.0, self.delta * t));
        for &(i, j, v) in &self.red {
            m[(i, j)] += C64::from_polar(1.0, -self.delta_prime * t) * v;
        }
        let adj = m.adjoint();
        m + adj
    }

    /// Indices reachable from `support` through any matrix element of
    /// `H(t)` for some `t`, in ascending order.
    pub fn reachable(&self, support: &[usize]) -> Vec<usize> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); self.dim];
        for &(i, j, _) in self.blue.iter().chain(&self.red) {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.dim];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &s in support {
            if !seen[s] {
                seen[s] = true;
                queue.push_back(s);
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        (0..self.dim).filter(|&i| seen[i]).collect()
    }

    /// The same Hamiltonian projected onto `indices` (ascending).
    pub fn restrict(&self, indices: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.dim];
        for (new, &old) in indices.iter().enumerate() {
            map[old] = new;
        }
        let keep = |terms: &[Triplet]| -> Vec<Triplet> {
            terms
                .iter()
                .filter(|(i, j, _)| map[*i] != usize::MAX && map[*j] != usize::MAX)
                .map(|&(i, j, v)| (map[i], map[j], v))
                .collect()
        };
        Self {
            dim: indices.len(),
            blue: keep(&self.blue),
            red: keep(&self.red),
            delta: self.delta,
            delta_prime: self.delta_prime,
        }
    }
}

/// Interaction-picture sideband Hamiltonian at time `t` for arbitrary
/// `k, k′, δ, δ′`.
pub fn build_bichromatic_h(t: f64, p: &BichromaticParams, config: HilbertConfig) -> CMatrix {
    BichromaticHamiltonian::new(p, config).at(t)
}

/// Effective two-photon Hamiltonian of the symmetric dispersive drive,
///
/// `Ω_k [S′₊₁S′₊₂ e^{2iφ} + (−1)^k (S′₊₁S′₋₂ + ½)] ⊗ F_k²[n_c!/(n_c−k)! − (n_c+k)!/n_c!] + h.c.`
///
/// including the self-energy term. Raises an adiabaticity diagnostic with the
/// worst ratio over the configured grid, and a rotating-wave diagnostic for
/// `|δ| > 0.2ν`.
pub fn build_effective_h(p: &BichromaticParams, config: HilbertConfig) -> Result<Diagnosed<CMatrix>> {
    p.ensure_symmetric()?;
    let scale = omega_k_scale(p.k, p.omega, p.delta, p.modes.eta)?;

    let sp1 = electronic_raising(1) * C64::from_polar(1.0, p.phi0 / 2.0);
    let sp2 = electronic_raising(2) * C64::from_polar(1.0, -p.phi0 / 2.0);
    let parity = if p.k % 2 == 0 { 1.0 } else { -1.0 };
    let half = CMatrix::identity(4, 4) * C64::new(0.5, 0.0);
    let elec = &sp1 * &sp2 * C64::from_polar(1.0, 2.0 * p.drive_phase())
        + (&sp1 * sp2.adjoint() + half) * C64::new(parity, 0.0);
    let elec = elec * scale;

    let vd = config.vib_dim();
    let mut m = CMatrix::zeros(config.dim(), config.dim());
    for v in 0..vd {
        let (n_c, n_r) = config.vib_levels(v);
        let g = effective_weight(n_c, n_r, p.k, &p.modes);
        for e1 in 0..4 {
            for e2 in 0..4 {
                m[(e1 * vd + v, e2 * vd + v)] = elec[(e1, e2)] * g;
            }
        }
    }
    let adj = m.adjoint();

    let mut diagnostics = Vec::new();
    let ratio = adiabaticity_ratio(p, config.n_max_c, config.n_max_r);
    if ratio < ADIABATIC_THRESHOLD {
        diagnostics.push(Diagnostic::Adiabaticity { ratio, threshold: ADIABATIC_THRESHOLD });
    }
    if p.delta.abs() > RWA_LIMIT * p.modes.nu {
        diagnostics.push(Diagnostic::RotatingWave { delta: p.delta });
    }
    Ok(Diagnosed::new(m + adj, diagnostics))
}

/// Carrier Hamiltonian `Ω[(S₊₁e^{iφ₀/2} + S₊₂e^{−iφ₀/2}) e^{iφ} + h.c.] F₀`.
pub fn build_carrier_h(p: &CarrierParams, config: HilbertConfig) -> CMatrix {
    let elec = primed_raising_sum(p.varphi0) * (p.omega * C64::from_polar(1.0, p.varphi));
    let vib: Vec<(usize, usize, f64)> = (0..config.vib_dim())
        .map(|v| {
            let (n_c, n_r) = config.vib_levels(v);
            (v, v, coupling_f(n_c, n_r, 0, &p.modes))
        })
        .collect();
    let m = dense_from(config.dim(), &tensor_triplets(&elec, &vib, config.vib_dim()), C64::new(1.0, 0.0));
    let adj = m.adjoint();
    m + adj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{mode_operators, Electronic, ModeParams};
    use crate::linalg::eigh;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn drive(k: usize) -> BichromaticParams {
        BichromaticParams::symmetric(k, 0.03, c(0.04, 0.01), ModeParams::new(0.17))
            .with_phases(0.37, 1.1)
    }

    fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
        a * b - b * a
    }

    #[test]
    fn zero_drive_gives_zero_matrix() {
        let cfg = HilbertConfig::new(3, 2);
        let mut p = drive(1);
        p.omega = c(0.0, 0.0);
        assert_eq!(build_bichromatic_h(0.7, &p, cfg).norm(), 0.0);
        let pc = CarrierParams::new(c(0.0, 0.0), 0.2, 0.4, p.modes);
        assert_eq!(build_carrier_h(&pc, cfg).norm(), 0.0);
    }

    #[test]
    fn builders_are_hermitian() {
        let cfg = HilbertConfig::new(5, 3);
        for k in [1, 2] {
            let mut p = drive(k);
            p.k_prime = 3 - k;
            p.delta_prime = 0.021;
            for t in [0.0, 1.3, 17.9] {
                let h = build_bichromatic_h(t, &p, cfg);
                assert_eq!((&h - h.adjoint()).norm(), 0.0);
            }
        }
        let h = build_effective_h(&drive(2), cfg).unwrap().value;
        assert_eq!((&h - h.adjoint()).norm(), 0.0);
        let h = build_carrier_h(&CarrierParams::new(c(0.02, 0.0), 0.3, 0.9, ModeParams::new(0.2)), cfg);
        assert_eq!((&h - h.adjoint()).norm(), 0.0);
    }

    /// The same Hamiltonian assembled from dense ladder, spin and F operators.
    fn dense_bichromatic(t: f64, p: &BichromaticParams, cfg: HilbertConfig) -> CMatrix {
        let ops = mode_operators(cfg);
        let dim = cfg.dim();
        let vd = cfg.vib_dim();
        let id_v = CMatrix::identity(vd, vd);
        let f_op = |k: usize| {
            CMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    let (_, n_c, n_r) = cfg.decompose(i);
                    c(coupling_f(n_c, n_r, k, &p.modes), 0.0)
                } else {
                    c(0.0, 0.0)
                }
            })
        };
        let sp1 = electronic_raising(1).kronecker(&id_v) * C64::from_polar(1.0, p.phi0 / 2.0);
        let sp2 = electronic_raising(2).kronecker(&id_v) * C64::from_polar(1.0, -p.phi0 / 2.0);
        let pow = |m: &CMatrix, n: usize| (0..n).fold(CMatrix::identity(dim, dim), |acc, _| acc * m);
        let ie = |k: usize| c(0.0, p.modes.eta).powu(k as u32);
        let vib = pow(&ops.a_dag, p.k) * f_op(p.k) * ie(p.k) * C64::from_polar(1.0, p.delta * t)
            + f_op(p.k_prime) * pow(&ops.a, p.k_prime) * ie(p.k_prime)
                * C64::from_polar(1.0, -p.delta_prime * t);
        let m = (sp1 + sp2) * vib * (p.omega * C64::from_polar(1.0, p.phi));
        &m + m.adjoint()
    }

    #[test]
    fn sparse_assembly_matches_dense_operator_products() {
        let cfg = HilbertConfig::new(5, 2);
        for (k, kp) in [(1, 1), (2, 1), (1, 3)] {
            let mut p = drive(k);
            p.k_prime = kp;
            p.delta_prime = 0.047;
            for t in [0.0, 2.5] {
                let a = build_bichromatic_h(t, &p, cfg);
                let b = dense_bichromatic(t, &p, cfg);
                assert!((&a - &b).norm() < 1e-14, "k={k} k'={kp} t={t}");
            }
        }
    }

    #[test]
    fn sideband_matrix_element_from_coefficient_formula() {
        // ⟨↑↓; n_c, n_r| H(0) |↓↓; n_c+k, n_r⟩ = Ω e^{iφ} e^{iφ₀/2} (iη)^k f_k(n_c, n_r) √((n_c+k)!/n_c!)
        let cfg = HilbertConfig::new(6, 3);
        for k in [1usize, 2] {
            let p = drive(k);
            let h = build_bichromatic_h(0.0, &p, cfg);
            for (n_c, n_r) in [(0, 0), (1, 2), (3, 1)] {
                let row = cfg.index(Electronic::UpDown, n_c, n_r);
                let col = cfg.index(Electronic::DownDown, n_c + k, n_r);
                let ratio: f64 = (1..=k).map(|j| (n_c + j) as f64).product();
                let expected = p.omega
                    * C64::from_polar(1.0, p.phi + p.phi0 / 2.0)
                    * c(0.0, p.modes.eta).powu(k as u32)
                    * coupling_f(n_c, n_r, k, &p.modes)
                    * ratio.sqrt();
                assert!((h[(row, col)] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn effective_h_structure() {
        let cfg = HilbertConfig::new(4, 3);
        let p = drive(1);
        let h = build_effective_h(&p, cfg).unwrap().value;
        let ops = mode_operators(cfg);
        assert!(commutator(&h, &ops.n_c).norm() < 1e-15);
        assert!(commutator(&h, &ops.n_r).norm() < 1e-15);

        for n_c in 0..=4 {
            for n_r in 0..=3 {
                let dd = cfg.index(Electronic::DownDown, n_c, n_r);
                let uu = cfg.index(Electronic::UpUp, n_c, n_r);
                let du = cfg.index(Electronic::DownUp, n_c, n_r);
                let ud = cfg.index(Electronic::UpDown, n_c, n_r);
                // {dd, uu} and {ud, du} never mix
                for &i in &[dd, uu] {
                    for &j in &[du, ud] {
                        assert_eq!(h[(i, j)], c(0.0, 0.0));
                        assert_eq!(h[(j, i)], c(0.0, 0.0));
                    }
                }
                // coupling element carries Ω^k e^{2iφ}
                let rabi = super::super::rabi_effective(n_c, n_r, &p).unwrap();
                let expected = rabi * C64::from_polar(1.0, 2.0 * p.drive_phase());
                assert!((h[(uu, dd)] - expected).norm() < 1e-15);
                // self energy (−1)^k Ω^k on the diagonal
                assert!((h[(dd, dd)] + rabi).norm() < 1e-15);
                // flip-flop carries e^{iφ₀}
                assert!((h[(ud, du)] + rabi * C64::from_polar(1.0, p.phi0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn effective_h_adiabaticity_diagnostic() {
        let cfg = HilbertConfig::new(3, 2);
        let mut p = drive(1);
        p.delta = 1e-4;
        p.delta_prime = 1e-4;
        let h = build_effective_h(&p, cfg).unwrap();
        assert!(h.diagnostics.iter().any(|d| matches!(d, Diagnostic::Adiabaticity { .. })));
        p.delta = 0.0;
        p.delta_prime = 0.0;
        assert!(build_effective_h(&p, cfg).is_err());
    }

    #[test]
    fn carrier_commutes_and_block_spectrum() {
        let cfg = HilbertConfig::new(3, 3);
        let p = CarrierParams::new(c(0.05, 0.0), 0.4, 0.8, ModeParams::new(0.2));
        let h = build_carrier_h(&p, cfg);
        let ops = mode_operators(cfg);
        assert_eq!(commutator(&h, &ops.n_c).norm(), 0.0);
        assert_eq!(commutator(&h, &ops.n_r).norm(), 0.0);
        // Each Fock block is a sum of two commuting single-ion σ rotations of
        // strength Ω₀: eigenvalues {−2Ω₀, 0, 0, 2Ω₀}.
        for (n_c, n_r) in [(0, 0), (2, 1)] {
            let idx: Vec<usize> = Electronic::ALL.iter().map(|&e| cfg.index(e, n_c, n_r)).collect();
            let block = crate::linalg::submatrix(&h, &idx);
            let mut ev: Vec<f64> = eigh(&block).0.iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            let w = 2.0 * p.omega0(n_c, n_r).abs();
            for (a, b) in ev.iter().zip([-w, 0.0, 0.0, w]) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn reachable_subspace_of_first_sideband() {
        let cfg = HilbertConfig::new(10, 10);
        let p = BichromaticParams::symmetric(1, 0.1, c(0.05, 0.0), ModeParams::new(0.1));
        let ham = BichromaticHamiltonian::new(&p, cfg);
        let reach = ham.reachable(&[cfg.index(Electronic::DownDown, 0, 0)]);
        // n_r stays 0, electronic excitation parity locked to n_c parity
        assert_eq!(reach.len(), 22);
        for &i in &reach {
            let (e, n_c, n_r) = cfg.decompose(i);
            assert_eq!(n_r, 0);
            let ups = e.is_up(1) as usize + e.is_up(2) as usize;
            assert_eq!((ups + n_c) % 2, 0);
        }
        let sub = ham.restrict(&reach);
        let full = ham.at(3.3);
        let part = sub.at(3.3);
        assert!((crate::linalg::submatrix(&full, &reach) - part).norm() < 1e-15);
    }
}
