//! Vibrational state reconstruction: displace the motional state, record the
//! `|↓↓⟩` population after a dispersive pulse of length `τ`, invert the
//! record into displaced Fock populations, and sum them into the two-mode
//! Wigner function.

mod nnls;
mod record;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::diag::{Diagnosed, Diagnostic};
use crate::dynamics::{BichromaticParams, RabiSpectrum};
use crate::error::IndexPair;
use crate::fockspace::{displacement, HilbertConfig, Mode, VibDensity};
use crate::{Error, Result, C64};

pub use nnls::nnls;
pub use record::fmt_f64;

/// `4/π²`, the value of the two-mode Wigner function of the vacuum at the
/// origin in the normalization used here.
pub const WIGNER_SCALE: f64 = 4.0 / (PI * PI);
/// Two fit frequencies closer than this (relative) are treated as equal.
pub const COLLISION_TOLERANCE: f64 = 1e-12;
/// Designs whose condition number exceeds this are rejected as singular.
pub const SINGULAR_CONDITION: f64 = 1e13;
/// Condition number above which [`condition_report`] flags the τ grid.
pub const CONDITION_LIMIT: f64 = 1e6;
/// Slack allowed on the sum of estimated populations.
pub const SUM_SLACK: f64 = 1e-6;

/// One `P↓↓(τ)` sample; `shots == 0` marks an exact (noiseless) value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub tau: f64,
    pub p_dd: f64,
    pub shots: u64,
}

/// A `P↓↓(τ)` record with the drive that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalRecord {
    pub samples: Vec<Sample>,
    pub params: BichromaticParams,
    pub seed: u64,
    /// Extra `# key = value` header lines carried through serialization.
    pub metadata: Vec<(String, String)>,
}

/// Estimated displaced populations on the fit grid `0..=n_fit_c × 0..=n_fit_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationEstimate {
    pub n_fit_c: usize,
    pub n_fit_r: usize,
    /// Row-major over `(n_c, n_r)`.
    pub pi: Vec<f64>,
    pub residual_norm: f64,
    pub condition_number: f64,
}

impl PopulationEstimate {
    /// The exact diagonal of `rho` on its full grid (no fit involved).
    pub fn exact(rho: &VibDensity) -> Self {
        Self {
            n_fit_c: rho.config.n_max_c,
            n_fit_r: rho.config.n_max_r,
            pi: rho.populations(),
            residual_norm: 0.0,
            condition_number: 1.0,
        }
    }

    pub fn get(&self, n_c: usize, n_r: usize) -> f64 {
        self.pi[n_c * (self.n_fit_r + 1) + n_r]
    }

    pub fn sum(&self) -> f64 {
        self.pi.iter().sum()
    }

    /// `((n_c, n_r), Π)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        let w = self.n_fit_r + 1;
        self.pi.iter().enumerate().map(move |(i, &v)| ((i / w, i % w), v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerPoint {
    pub alpha_c: C64,
    pub alpha_r: C64,
    pub w: f64,
}

/// SplitMix64 finalizer.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce5_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the independent random substream `index` of `seed`.
pub fn substream(seed: u64, index: u64) -> u64 {
    splitmix(seed ^ splitmix(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

/// `D_c†(α_c) D_r†(α_r) ρ D_r(α_r) D_c(α_c)`: the state displaced by `−α`.
pub fn displace_vib(rho: &VibDensity, alpha_c: C64, alpha_r: C64) -> Diagnosed<VibDensity> {
    let cfg = rho.config;
    let dc = displacement(alpha_c, Mode::Com, cfg);
    let dr = displacement(alpha_r, Mode::Stretch, cfg);
    let d = dc.value.kronecker(&dr.value);
    let displaced = VibDensity { config: cfg, matrix: d.adjoint() * &rho.matrix * &d };
    let mut diagnostics = dc.diagnostics;
    diagnostics.extend(dr.diagnostics);
    diagnostics.extend(displaced.guard_band());
    Diagnosed::new(displaced, diagnostics)
}

/// `|Ω^k_{n_c n_r}|` on `0..=n_c_max × 0..=n_r_max`, row-major.
pub fn fit_frequencies(p: &BichromaticParams, n_c_max: usize, n_r_max: usize) -> Result<Vec<f64>> {
    Ok(RabiSpectrum::compute(p, n_c_max, n_r_max)?.iter().map(|(_, v)| v.norm()).collect())
}

fn check_taus(taus: &[f64]) -> Result<()> {
    for (i, &t) in taus.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter { name: "taus", reason: format!("tau[{i}] = {t} must be finite and >= 0") });
        }
        if i > 0 && !(t > taus[i - 1]) {
            return Err(Error::InvalidParameter { name: "taus", reason: format!("taus must increase strictly at index {i}") });
        }
    }
    Ok(())
}

/// `P↓↓(τ) = Σ cos²(|Ω^k_{n_c n_r}|τ) Π_{n_c n_r}` for each `τ`, using the
/// diagonal of the (already displaced) `rho`.
///
/// With `shots > 0` each value is replaced by `count/shots`, `count` drawn
/// from a binomial distribution on substream `j` of `seed`.
pub fn synth_signal(
    rho: &VibDensity,
    taus: &[f64],
    p: &BichromaticParams,
    shots: u64,
    seed: u64,
) -> Result<SignalRecord> {
    p.validate()?;
    check_taus(taus)?;
    let cfg = rho.config;
    let freqs = fit_frequencies(p, cfg.n_max_c, cfg.n_max_r)?;
    let pops = rho.populations();
    let mut samples = Vec::with_capacity(taus.len());
    for (j, &tau) in taus.iter().enumerate() {
        let exact: f64 = freqs.iter().zip(&pops).map(|(w, pi)| (w * tau).cos().powi(2) * pi).sum();
        let exact = exact.clamp(0.0, 1.0);
        let p_dd = if shots == 0 {
            exact
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, j as u64));
            let dist = Binomial::new(shots, exact).expect("probability clamped to [0, 1]");
            dist.sample(&mut rng) as f64 / shots as f64
        };
        samples.push(Sample { tau, p_dd, shots });
    }
    Ok(SignalRecord { samples, params: *p, seed, metadata: Vec::new() })
}

/// Index pairs whose fit frequencies coincide within [`COLLISION_TOLERANCE`].
fn collisions(freqs: &[f64], n_r_max: usize) -> Vec<IndexPair> {
    let w = n_r_max + 1;
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by(|&a, &b| freqs[a].total_cmp(&freqs[b]).then(a.cmp(&b)));
    let mut pairs = Vec::new();
    for (i, &a) in order.iter().enumerate() {
        for &b in &order[i + 1..] {
            let scale = freqs[a].max(freqs[b]);
            if freqs[b] - freqs[a] > COLLISION_TOLERANCE * scale {
                break;
            }
            let (lo, hi) = (a.min(b), a.max(b));
            pairs.push(((lo / w, lo % w), (hi / w, hi % w)));
        }
    }
    pairs.sort();
    pairs
}

fn design(freqs: &[f64], taus: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(taus.len(), freqs.len(), |j, i| (freqs[i] * taus[j]).cos().powi(2))
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let sv = a.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Non-negative least-squares fit of the displaced populations on the grid
/// `0..=n_fit_c × 0..=n_fit_r` to a `P↓↓(τ)` record.
///
/// `ridge > 0` adds `ridge·‖Π‖²` to the objective. If the unconstrained-sum
/// solution exceeds one, the fit is repeated with the normalization imposed
/// as a heavily weighted extra equation and the result scaled to sum ≤ 1.
pub fn invert_populations(
    record: &SignalRecord,
    n_fit_c: usize,
    n_fit_r: usize,
    ridge: f64,
) -> Result<PopulationEstimate> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::InvalidParameter { name: "ridge", reason: format!("must be >= 0, got {ridge}") });
    }
    let unknowns = (n_fit_c + 1) * (n_fit_r + 1);
    let m = record.samples.len();
    if m < unknowns {
        return Err(Error::Underdetermined { samples: m, unknowns });
    }
    let freqs = fit_frequencies(&record.params, n_fit_c, n_fit_r)?;
    let pairs = collisions(&freqs, n_fit_r);
    if !pairs.is_empty() {
        return Err(Error::DegenerateFrequencies { pairs });
    }
    let taus: Vec<f64> = record.samples.iter().map(|s| s.tau).collect();
    let a = design(&freqs, &taus);
    let condition = condition_number(&a);
    if !(condition < SINGULAR_CONDITION) {
        return Err(Error::DegenerateDesign { condition });
    }
    let b = DVector::from_iterator(m, record.samples.iter().map(|s| s.p_dd));

    let solve = |extra_rows: usize, fill: &dyn Fn(&mut DMatrix<f64>, &mut DVector<f64>)| {
        let ridge_rows = if ridge > 0.0 { unknowns } else { 0 };
        let rows = m + ridge_rows + extra_rows;
        let mut aa = DMatrix::zeros(rows, unknowns);
        let mut bb = DVector::zeros(rows);
        aa.rows_mut(0, m).copy_from(&a);
        bb.rows_mut(0, m).copy_from(&b);
        for i in 0..ridge_rows {
            aa[(m + i, i)] = ridge.sqrt();
        }
        fill(&mut aa, &mut bb);
        nnls(&aa, &bb)
    };

    let mut x = solve(0, &|_, _| {});
    if x.sum() > 1.0 {
        let weight = 1e3 * a.norm().max(1.0);
        x = solve(1, &|aa, bb| {
            let last = aa.nrows() - 1;
            aa.row_mut(last).fill(weight);
            bb[last] = weight;
        });
        let total = x.sum();
        if total > 1.0 {
            x /= total;
        }
    }
    let residual_norm = (&a * &x - &b).norm();
    Ok(PopulationEstimate { n_fit_c, n_fit_r, pi: x.iter().copied().collect(), residual_norm, condition_number: condition })
}

/// `(4/π²) Σ (−1)^{n_c+n_r} Π_{n_c n_r}`.
pub fn wigner_from_populations(est: &PopulationEstimate) -> f64 {
    WIGNER_SCALE
        * est
            .iter()
            .map(|((n_c, n_r), pi)| if (n_c + n_r) % 2 == 0 { pi } else { -pi })
            .sum::<f64>()
}

/// Wigner function of the truncated `rho` at `(α_c, α_r)` from its exactly
/// displaced populations.
pub fn wigner_direct(rho: &VibDensity, alpha_c: C64, alpha_r: C64) -> Diagnosed<f64> {
    displace_vib(rho, alpha_c, alpha_r).map(|d| wigner_from_populations(&PopulationEstimate::exact(&d)))
}

/// Settings shared by every point of a [`protocol_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSettings {
    pub taus: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub n_fit_c: usize,
    pub n_fit_r: usize,
    pub ridge: f64,
}

/// Outcome at one displacement: reconstructed Wigner value, the fit, and the
/// exact value of the truncated state for comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolPoint {
    pub point: WignerPoint,
    pub estimate: PopulationEstimate,
    pub exact: f64,
    pub diagnostics: Vec<Diagnostic>,
}

/// Fit grids must stay two levels below the simulation cutoff so truncated
/// levels never enter the fit.
pub fn check_fit_grid(config: HilbertConfig, n_fit_c: usize, n_fit_r: usize) -> Result<()> {
    for (name, fit, max) in [("n_fit_c", n_fit_c, config.n_max_c), ("n_fit_r", n_fit_r, config.n_max_r)] {
        if fit + 2 > max {
            return Err(Error::InvalidParameter { name, reason: format!("{fit} exceeds n_max - 2 = {}", max as i64 - 2) });
        }
    }
    Ok(())
}

/// Displace → synthesize → invert → Wigner at every `(α_c, α_r)`.
///
/// Points run in parallel; point `i` uses substream `i` of the seed, so the
/// output does not depend on scheduling.
pub fn protocol_run(
    rho: &VibDensity,
    alphas: &[(C64, C64)],
    p: &BichromaticParams,
    settings: &ProtocolSettings,
) -> Result<Vec<ProtocolPoint>> {
    check_fit_grid(rho.config, settings.n_fit_c, settings.n_fit_r)?;
    check_taus(&settings.taus)?;
    alphas
        .par_iter()
        .enumerate()
        .map(|(i, &(alpha_c, alpha_r))| {
            let displaced = displace_vib(rho, alpha_c, alpha_r);
            let seed = substream(settings.seed, i as u64);
            let record = synth_signal(&displaced.value, &settings.taus, p, settings.shots, seed)?;
            let estimate = invert_populations(&record, settings.n_fit_c, settings.n_fit_r, settings.ridge)?;
            let w = wigner_from_populations(&estimate);
            let exact = wigner_from_populations(&PopulationEstimate::exact(&displaced.value));
            Ok(ProtocolPoint { point: WignerPoint { alpha_c, alpha_r, w }, estimate, exact, diagnostics: displaced.diagnostics })
        })
        .collect()
}

/// Identifiability of a fit grid under a τ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// Smallest `|ω_i − ω_j| / max(ω_i, ω_j)` among fit frequencies.
    pub min_relative_gap: f64,
    /// Smallest absolute gap `|ω_i − ω_j|`.
    pub min_gap: f64,
    pub closest: Option<IndexPair>,
    pub condition_number: f64,
    pub span: f64,
    /// `π / min_gap`, the span needed to resolve the closest pair.
    pub recommended_span: f64,
}

pub fn condition_report(
    p: &BichromaticParams,
    n_fit_c: usize,
    n_fit_r: usize,
    taus: &[f64],
) -> Result<Diagnosed<ConditionReport>> {
    check_taus(taus)?;
    let freqs = fit_frequencies(p, n_fit_c, n_fit_r)?;
    let w = n_fit_r + 1;
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by(|&a, &b| freqs[a].total_cmp(&freqs[b]).then(a.cmp(&b)));
    let (mut min_gap, mut min_rel, mut closest) = (f64::INFINITY, f64::INFINITY, None);
    for pair in order.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let gap = freqs[b] - freqs[a];
        let scale = freqs[a].max(freqs[b]);
        let rel = if scale == 0.0 { 0.0 } else { gap / scale };
        min_gap = min_gap.min(gap);
        if rel < min_rel {
            min_rel = rel;
            let (lo, hi) = (a.min(b), a.max(b));
            closest = Some(((lo / w, lo % w), (hi / w, hi % w)));
        }
    }
    let condition_number = if taus.is_empty() { f64::INFINITY } else { condition_number(&design(&freqs, taus)) };
    let span = taus.last().copied().unwrap_or(0.0) - taus.first().copied().unwrap_or(0.0);
    let recommended_span = if min_gap > 0.0 { PI / min_gap } else { f64::INFINITY };

    let mut diagnostics = Vec::new();
    if min_rel < 1e-6 {
        diagnostics.push(Diagnostic::Note(format!(
            "fit frequencies nearly degenerate: min relative gap {min_rel:.3e}"
        )));
    }
    if condition_number > CONDITION_LIMIT || span < recommended_span {
        diagnostics.push(Diagnostic::PoorConditioning { condition: condition_number, recommended_span });
    }
    let report = ConditionReport {
        min_relative_gap: if freqs.len() < 2 { f64::INFINITY } else { min_rel },
        min_gap,
        closest,
        condition_number,
        span,
        recommended_span,
    };
    Ok(Diagnosed::new(report, diagnostics))
}

/// `count` equally spaced `τ` from `0` to `π / min_gap` (default count
/// `4·(n_fit_c+1)(n_fit_r+1)`).
pub fn default_taus(p: &BichromaticParams, n_fit_c: usize, n_fit_r: usize, count: Option<usize>) -> Result<Vec<f64>> {
    let freqs = fit_frequencies(p, n_fit_c, n_fit_r)?;
    let pairs = collisions(&freqs, n_fit_r);
    if !pairs.is_empty() {
        return Err(Error::DegenerateFrequencies { pairs });
    }
    let count = count.unwrap_or(4 * freqs.len()).max(2);
    let mut sorted = freqs.clone();
    sorted.sort_by(f64::total_cmp);
    let min_gap = sorted.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let span = if min_gap.is_finite() {
        PI / min_gap
    } else {
        // A single unknown: one full period of its oscillation.
        PI / sorted[0]
    };
    Ok((0..count).map(|j| span * j as f64 / (count - 1) as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{build_effective_h, propagate_const};
    use crate::fockspace::{make_vib_state, Electronic, JointState, ModeParams, StateSpec};
    use crate::CMatrix;

    fn drive() -> BichromaticParams {
        BichromaticParams::symmetric(1, 0.01, C64::new(0.01, 0.0), ModeParams::new(0.23))
    }

    fn zero() -> C64 {
        C64::new(0.0, 0.0)
    }

    #[test]
    fn zero_displacement_is_identity() {
        let cfg = HilbertConfig::new(6, 3);
        let rho = make_vib_state(&StateSpec::Thermal { nbar_c: 0.3, nbar_r: 0.2 }, cfg).unwrap();
        let out = displace_vib(&rho, zero(), zero()).value;
        assert!((out.matrix - &rho.matrix).norm() < 1e-14);
    }

    #[test]
    fn displaced_vacuum_is_poissonian() {
        let cfg = HilbertConfig::new(20, 2);
        let rho = make_vib_state(&StateSpec::Fock { n_c: 0, n_r: 0 }, cfg).unwrap();
        let alpha = C64::new(0.6, -0.5);
        let out = displace_vib(&rho, alpha, zero()).value;
        let x = alpha.norm_sqr();
        let mut poisson = (-x).exp();
        for n in 0..=12 {
            assert!((out.population(n, 0) - poisson).abs() < 1e-10, "n = {n}");
            poisson *= x / (n + 1) as f64;
        }
        assert!((out.trace() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn displacement_round_trip() {
        let cfg = HilbertConfig::new(16, 10);
        let rho = make_vib_state(&StateSpec::Superposition(vec![(0, 0, C64::new(1.0, 0.0)), (1, 2, C64::new(0.0, 1.0))]), cfg).unwrap();
        let a = (C64::new(0.4, 0.1), C64::new(-0.2, 0.3));
        let there = displace_vib(&rho, a.0, a.1).value;
        let back = displace_vib(&there, -a.0, -a.1).value;
        assert!((back.matrix - &rho.matrix).norm() < 1e-8);
    }

    #[test]
    fn large_displacement_warns() {
        let cfg = HilbertConfig::new(4, 2);
        let rho = make_vib_state(&StateSpec::Fock { n_c: 0, n_r: 0 }, cfg).unwrap();
        let d = displace_vib(&rho, C64::new(2.0, 0.0), zero());
        assert!(d.diagnostics.iter().any(|x| matches!(x, Diagnostic::DisplacementRange { mode: Mode::Com, .. })));
        assert!(d.diagnostics.iter().any(|x| matches!(x, Diagnostic::Truncation { .. })));
    }

    #[test]
    fn vacuum_signal_is_single_cosine() {
        let cfg = HilbertConfig::new(5, 2);
        let rho = make_vib_state(&StateSpec::Fock { n_c: 0, n_r: 0 }, cfg).unwrap();
        let p = drive();
        let w = fit_frequencies(&p, 0, 0).unwrap()[0];
        let taus: Vec<f64> = (0..20).map(|j| j as f64 * 37.0).collect();
        let rec = synth_signal(&rho, &taus, &p, 0, 0).unwrap();
        for s in &rec.samples {
            assert_eq!(s.p_dd, (w * s.tau).cos().powi(2));
        }
        assert_eq!(rec.samples[0].p_dd, 1.0);
    }

    #[test]
    fn signal_matches_density_matrix_propagation() {
        // ⟨↓↓|Tr_v{U ρ U†}|↓↓⟩ with ρ = ρ_thermal ⊗ |↓↓⟩⟨↓↓|, by propagating
        // each Fock block numerically.
        let cfg = HilbertConfig::new(7, 5);
        let rho = make_vib_state(&StateSpec::Thermal { nbar_c: 0.4, nbar_r: 0.25 }, cfg).unwrap();
        let p = drive();
        let h = build_effective_h(&p, cfg).unwrap().value;
        let taus = [0.0, 150.0, 800.0, 2400.0];
        let rec = synth_signal(&rho, &taus, &p, 0, 0).unwrap();
        for (s, &tau) in rec.samples.iter().zip(&taus) {
            let mut p_dd = 0.0;
            for n_c in 0..=cfg.n_max_c {
                for n_r in 0..=cfg.n_max_r {
                    let psi = JointState::basis(cfg, Electronic::DownDown, n_c, n_r);
                    let out = propagate_const(&h, &psi, tau).unwrap();
                    p_dd += rho.population(n_c, n_r) * out.amplitude(Electronic::DownDown, n_c, n_r).norm_sqr();
                }
            }
            assert!((s.p_dd - p_dd).abs() < 1e-9, "tau {tau}: {} vs {p_dd}", s.p_dd);
        }
    }

    #[test]
    fn shot_noise_is_deterministic_and_bounded() {
        let cfg = HilbertConfig::new(5, 2);
        let rho = make_vib_state(&StateSpec::Thermal { nbar_c: 0.2, nbar_r: 0.1 }, cfg).unwrap();
        let taus: Vec<f64> = (0..30).map(|j| j as f64 * 50.0).collect();
        let a = synth_signal(&rho, &taus, &drive(), 1000, 7).unwrap();
        let b = synth_signal(&rho, &taus, &drive(), 1000, 7).unwrap();
        let c = synth_signal(&rho, &taus, &drive(), 1000, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        for s in &a.samples {
            assert!((0.0..=1.0).contains(&s.p_dd));
            assert_eq!((s.p_dd * 1000.0).round(), s.p_dd * 1000.0);
        }
    }

    #[test]
    fn fock_one_round_trip() {
        let cfg = HilbertConfig::new(5, 4);
        let rho = make_vib_state(&StateSpec::Fock { n_c: 1, n_r: 0 }, cfg).unwrap();
        let p = drive();
        let taus = default_taus(&p, 2, 2, None).unwrap();
        let rec = synth_signal(&rho, &taus, &p, 0, 0).unwrap();
        let est = invert_populations(&rec, 2, 2, 0.0).unwrap();
        for ((n_c, n_r), v) in est.iter() {
            let want = if (n_c, n_r) == (1, 0) { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-6, "({n_c},{n_r}) = {v}");
        }
    }

    #[test]
    fn thermal_round_trip_with_shot_noise() {
        let cfg = HilbertConfig::new(8, 6);
        let (n_fit_c, n_fit_r) = (3, 2);
        let rho = make_vib_state(&StateSpec::Thermal { nbar_c: 0.2, nbar_r: 0.1 }, cfg).unwrap();
        let p = drive();
        let taus = default_taus(&p, n_fit_c, n_fit_r, Some(60)).unwrap();
        let rec = synth_signal(&rho, &taus, &p, 10_000, 2024).unwrap();
        let est = invert_populations(&rec, n_fit_c, n_fit_r, 0.0).unwrap();
        for ((n_c, n_r), v) in est.iter() {
            assert!((v - rho.population(n_c, n_r)).abs() <= 0.05, "({n_c},{n_r})");
        }
        assert!(est.sum() <= 1.0 + SUM_SLACK);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let p = drive();
        // Every τ essentially zero: all columns identical.
        let samples: Vec<Sample> = (0..12).map(|j| Sample { tau: j as f64 * 1e-12, p_dd: 1.0, shots: 0 }).collect();
        let rec = SignalRecord { samples, params: p, seed: 0, metadata: vec![] };
        assert!(matches!(invert_populations(&rec, 2, 1, 0.0), Err(Error::DegenerateDesign { .. })));
        assert!(matches!(invert_populations(&rec, 4, 4, 0.0), Err(Error::Underdetermined { samples: 12, unknowns: 25 })));

        // k = 0: every frequency vanishes, so they all collide.
        let p0 = BichromaticParams { k: 0, k_prime: 0, ..p };
        match invert_populations(&SignalRecord { params: p0, ..rec }, 1, 0, 0.0) {
            Err(Error::DegenerateFrequencies { pairs }) => assert_eq!(pairs, vec![((0, 0), (1, 0))]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn wigner_prefactor_and_signs() {
        let single = |n_c: usize, n_r: usize, pi: Vec<f64>| PopulationEstimate { n_fit_c: n_c, n_fit_r: n_r, pi, residual_norm: 0.0, condition_number: 1.0 };
        assert_eq!(wigner_from_populations(&single(0, 0, vec![1.0])), 4.0 / (PI * PI));
        assert_eq!(wigner_from_populations(&single(1, 0, vec![0.0, 1.0])), -4.0 / (PI * PI));
        assert_eq!(wigner_from_populations(&single(1, 1, vec![0.25; 4])), 0.0);
    }

    #[test]
    fn wigner_direct_oracles() {
        let cfg = HilbertConfig::new(20, 20);
        let vac = make_vib_state(&StateSpec::Fock { n_c: 0, n_r: 0 }, cfg).unwrap();
        assert!((wigner_direct(&vac, zero(), zero()).value - WIGNER_SCALE).abs() < 1e-12);
        let (ac, ar) = (C64::new(0.3, 0.4), C64::new(-0.2, 0.1));
        let want = WIGNER_SCALE * (-2.0 * ac.norm_sqr() - 2.0 * ar.norm_sqr()).exp();
        assert!((wigner_direct(&vac, ac, ar).value - want).abs() < 1e-8);
        let one = make_vib_state(&StateSpec::Fock { n_c: 1, n_r: 0 }, cfg).unwrap();
        assert!((wigner_direct(&one, zero(), zero()).value + WIGNER_SCALE).abs() < 1e-12);
    }

    #[test]
    fn protocol_noiseless_vacuum_line() {
        let cfg = HilbertConfig::new(10, 2);
        let vac = make_vib_state(&StateSpec::Fock { n_c: 0, n_r: 0 }, cfg).unwrap();
        let p = drive();
        let settings = ProtocolSettings { taus: default_taus(&p, 8, 0, None).unwrap(), shots: 0, seed: 1, n_fit_c: 8, n_fit_r: 0, ridge: 0.0 };
        let alphas: Vec<(C64, C64)> = (-2..=2).map(|j| (C64::new(0.25 * j as f64, 0.0), zero())).collect();
        let pts = protocol_run(&vac, &alphas, &p, &settings).unwrap();
        assert_eq!(pts.len(), 5);
        for pt in &pts {
            let direct = wigner_direct(&vac, pt.point.alpha_c, pt.point.alpha_r).value;
            assert!((pt.point.w - direct).abs() < 1e-6);
            assert_eq!(pt.exact, direct);
        }
        assert!(protocol_run(&vac, &[], &p, &settings).unwrap().is_empty());
        let bad = ProtocolSettings { n_fit_c: 9, ..settings };
        assert!(protocol_run(&vac, &alphas, &p, &bad).is_err());
    }

    #[test]
    fn condition_report_flags() {
        let p = drive();
        let taus = default_taus(&p, 25, 25, Some(8)).unwrap();
        let rep = condition_report(&p, 25, 25, &taus).unwrap();
        assert!(rep.value.min_relative_gap > 0.0);

        let gap = condition_report(&p, 3, 2, &taus).unwrap().value.min_gap;
        let short: Vec<f64> = (0..40).map(|j| j as f64 * 0.01 / (39.0 * gap)).collect();
        let rep = condition_report(&p, 3, 2, &short).unwrap();
        assert!(rep.value.condition_number > CONDITION_LIMIT);
        assert!(rep.diagnostics.iter().any(|d| matches!(d, Diagnostic::PoorConditioning { .. })));

        let p0 = BichromaticParams { k: 0, k_prime: 0, ..p };
        let rep = condition_report(&p0, 3, 2, &short).unwrap();
        assert_eq!(rep.value.min_relative_gap, 0.0);
        assert!(!rep.is_clean());
    }

    #[test]
    fn record_text_round_trip() {
        let cfg = HilbertConfig::new(4, 2);
        let rho = make_vib_state(&StateSpec::Thermal { nbar_c: 0.3, nbar_r: 0.1 }, cfg).unwrap();
        let p = drive().with_phases(0.25, -1.5);
        let taus: Vec<f64> = (0..10).map(|j| j as f64 * 12.345).collect();
        let mut rec = synth_signal(&rho, &taus, &p, 500, 99).unwrap();
        rec.metadata.push(("version".into(), "x".into()));
        let text = rec.to_text();
        assert_eq!(SignalRecord::from_text(&text).unwrap(), rec);
        assert!(text.lines().any(|l| l == "tau,p_dd,shots"));

        let broken = text.replace("# k = 1", "# k = 1\n# k = 2");
        assert!(matches!(SignalRecord::from_text(&broken), Err(Error::RecordFormat { .. })));
        let unordered = format!("{text}0.0,0.5,0\n");
        assert!(matches!(SignalRecord::from_text(&unordered), Err(Error::RecordFormat { .. })));
    }

    proptest::proptest! {
        #[test]
        fn synth_at_zero_is_one(nbar_c in 0.0f64..2.0, nbar_r in 0.0f64..1.0) {
            let cfg = HilbertConfig::new(12, 8);
            let rho = make_vib_state(&StateSpec::Thermal { nbar_c, nbar_r }, cfg).unwrap();
            let rec = synth_signal(&rho, &[0.0], &drive(), 0, 0).unwrap();
            proptest::prop_assert!((rec.samples[0].p_dd - 1.0).abs() < 1e-12);
        }

        #[test]
        fn noiseless_inversion_recovers_diagonal(weights in proptest::collection::vec(0.0f64..1.0, 6)) {
            let cfg = HilbertConfig::new(4, 3);
            let total: f64 = weights.iter().sum::<f64>().max(1e-9);
            let mut m = CMatrix::zeros(cfg.vib_dim(), cfg.vib_dim());
            for (i, w) in weights.iter().enumerate() {
                let v = cfg.vib_index(i / 2, i % 2);
                m[(v, v)] = C64::new(w / total, 0.0);
            }
            let rho = VibDensity::new(cfg, m).unwrap();
            let p = drive();
            let taus = default_taus(&p, 2, 1, None).unwrap();
            let rec = synth_signal(&rho, &taus, &p, 0, 0).unwrap();
            let est = invert_populations(&rec, 2, 1, 0.0).unwrap();
            for ((n_c, n_r), v) in est.iter() {
                proptest::prop_assert!((v - rho.population(n_c, n_r)).abs() < 1e-6);
            }
            proptest::prop_assert!(est.pi.iter().all(|&v| v >= 0.0));
            proptest::prop_assert!(est.sum() <= 1.0 + SUM_SLACK);
        }
    }
}
