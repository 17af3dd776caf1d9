//! Built-in acceptance checks, shared by the `validate` mode and the
//! `acceptance` test target.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use ionbell_core::bellgen::{make_phi, make_psi, rabi_dispersion, thermal_bell_scan, Engine, Sign};
use ionbell_core::dynamics::{
    build_carrier_h, build_effective_h, closed_form_carrier, closed_form_dispersive, propagate_const, rabi_effective,
    BichromaticParams, CarrierParams,
};
use ionbell_core::fockspace::{fidelity, make_vib_state};
use ionbell_core::tomography::{
    default_taus, displace_vib, protocol_run, substream, wigner_direct, ProtocolSettings, WIGNER_SCALE,
};
use ionbell_core::{CVector, Electronic, HilbertConfig, JointState, ModeParams, StateSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::parse_config;
use crate::run::{run, Artifact};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(id: u8, name: &'static str, passed: bool, detail: String) -> Self {
        Self { id, name, passed, detail }
    }

    fn from_result(id: u8, name: &'static str, r: Result<(bool, String), String>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(id, name, passed, detail),
            Err(e) => Self::new(id, name, false, format!("error: {e}")),
        }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }

    /// One-line report, e.g. `[ 3] PASS bell-effective: ...`.
    pub fn line(&self) -> String {
        format!("[{:>2}] {} {}: {}", self.id, self.status(), self.name, self.detail)
    }
}

type Outcome = Result<(bool, String), String>;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Every check in order.
pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        closed_form_equivalence(seed),
        decoupling(seed),
        bell_effective(),
        adiabatic_regime(),
        spectrum_distinct(),
        lamb_dicke(),
        wigner_oracle(),
        tomography_noiseless(),
        tomography_shot_noise(seed),
        determinism(seed),
    ]
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_drive(rng: &mut ChaCha8Rng) -> BichromaticParams {
    let k = rng.random_range(1..=2usize);
    let eta = rng.random_range(0.05..0.3);
    let delta = rng.random_range(0.005..0.05) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let omega = C64::from_polar(rng.random_range(0.002..0.02), rng.random_range(-PI..PI));
    BichromaticParams::symmetric(k, delta, omega, ModeParams::new(eta))
        .with_phases(rng.random_range(-PI..PI), rng.random_range(-PI..PI))
}

fn max_abs(a: &JointState, b: &JointState) -> f64 {
    a.amplitudes.iter().zip(b.amplitudes.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Dispersive and carrier propagation against their closed forms.
pub fn closed_form_equivalence(seed: u64) -> Check {
    let outcome = (|| -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, 1));
        let config = HilbertConfig::new(8, 8);
        let (mut worst_disp, mut worst_carrier) = (0.0f64, 0.0f64);
        for _ in 0..50 {
            let p = random_drive(&mut rng);
            let (n_c, n_r) = (rng.random_range(0..=8usize), rng.random_range(0..=8usize));
            let rabi = rabi_effective(n_c, n_r, &p).map_err(err)?.norm();
            let t = rng.random_range(0.0..4.0 * PI / rabi);
            let h = build_effective_h(&p, config).map_err(err)?.value;
            let psi0 = JointState::basis(config, Electronic::DownDown, n_c, n_r);
            let got = propagate_const(&h, &psi0, t).map_err(err)?;
            let [dd, uu] = closed_form_dispersive(n_c, n_r, &p, t).map_err(err)?;
            let mut expected = JointState::zeros(config);
            expected.amplitudes[config.index(Electronic::DownDown, n_c, n_r)] = dd;
            expected.amplitudes[config.index(Electronic::UpUp, n_c, n_r)] = uu;
            worst_disp = worst_disp.max(max_abs(&got, &expected));
        }
        for _ in 0..50 {
            let modes = ModeParams::new(rng.random_range(0.05..0.3));
            let omega = C64::from_polar(rng.random_range(0.05..0.5), rng.random_range(-PI..PI));
            let pc = CarrierParams::new(omega, rng.random_range(-PI..PI), rng.random_range(-PI..PI), modes);
            let (n_c, n_r) = (rng.random_range(0..=8usize), rng.random_range(0..=8usize));
            let sign = if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
            let t = rng.random_range(0.0..4.0 * PI / pc.omega0(n_c, n_r).abs());
            let r = FRAC_1_SQRT_2;
            let psi0 = JointState::product(config, [c(r, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(sign.value() * r, 0.0)], n_c, n_r);
            let got = propagate_const(&build_carrier_h(&pc, config), &psi0, t).map_err(err)?;
            let expected = JointState::product(config, closed_form_carrier(sign, &pc, n_c, n_r, t), n_c, n_r);
            worst_carrier = worst_carrier.max(max_abs(&got, &expected));
        }
        let passed = worst_disp < 1e-10 && worst_carrier < 1e-10;
        Ok((passed, format!("50+50 draws, max amplitude error dispersive {worst_disp:.2e}, carrier {worst_carrier:.2e} (< 1e-10)")))
    })();
    Check::from_result(1, "closed-form equivalence", outcome)
}

/// `|↓↑⟩`, `|↑↓⟩` stay empty under the effective dynamics.
pub fn decoupling(seed: u64) -> Check {
    let outcome = (|| -> Outcome {
        let mut rng = ChaCha8Rng::seed_from_u64(substream(seed, 2));
        let config = HilbertConfig::new(6, 4);
        let mut worst = 0.0f64;
        for _ in 0..5 {
            let p = random_drive(&mut rng);
            let vib = CVector::from_fn(config.vib_dim(), |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let psi_vib = &vib / C64::new(vib.norm(), 0.0);
            let psi0 = JointState::with_vib(config, Electronic::DownDown, &psi_vib).map_err(err)?;
            let h = build_effective_h(&p, config).map_err(err)?.value;
            let t_end = 20.0 * PI / rabi_effective(0, 0, &p).map_err(err)?.norm();
            for i in 0..100 {
                let t = t_end * i as f64 / 99.0;
                let s = propagate_const(&h, &psi0, t).map_err(err)?;
                let leak = s.electronic_population(Electronic::DownUp) + s.electronic_population(Electronic::UpDown);
                worst = worst.max(leak);
            }
        }
        Ok((worst < 1e-12, format!("5 draws x 100 times, max P(du)+P(ud) = {worst:.2e} (< 1e-12)")))
    })();
    Check::from_result(2, "decoupling", outcome)
}

/// Effective-engine Bell preparation.
pub fn bell_effective() -> Check {
    let outcome = (|| -> Outcome {
        let config = HilbertConfig::new(4, 3);
        let mut worst_phi = 0.0f64;
        let mut worst_psi = 0.0f64;
        let mut worst_overlap = 0.0f64;
        let mut literal = f64::NAN;
        let phi0 = 0.7;
        for (k, delta) in [(1usize, 0.02), (1, -0.03), (2, 0.025), (2, -0.02)] {
            let p = BichromaticParams::symmetric(k, delta, c(0.01, 0.003), ModeParams::new(0.12)).with_phases(0.3, 0.9);
            for (n_c, n_r) in [(0, 0), (2, 1), (4, 3)] {
                for sign in [Sign::Plus, Sign::Minus] {
                    let out = make_phi(sign, &p, config, n_c, n_r, Engine::Effective).map_err(err)?;
                    worst_phi = worst_phi.max((1.0 - out.fidelity).abs());
                }
                for start in [Sign::Plus, Sign::Minus] {
                    let pc = CarrierParams::new(c(0.2, -0.05), 0.0, phi0, p.modes);
                    let a = make_psi(start, &p, &pc, config, n_c, n_r, Engine::Effective).map_err(err)?;
                    let pc_flip = CarrierParams { varphi0: phi0 + PI, ..pc };
                    let b = make_psi(start, &p, &pc_flip, config, n_c, n_r, Engine::Effective).map_err(err)?;
                    worst_psi = worst_psi.max((1.0 - a.fidelity).abs()).max((1.0 - b.fidelity).abs());
                    worst_overlap = worst_overlap.max(a.state.amplitudes.dotc(&b.state.amplitudes).norm_sqr());
                    // Fidelity with the ket order written the other way round.
                    let r = FRAC_1_SQRT_2;
                    let swapped = JointState::product(config, [c(0.0, 0.0), C64::from_polar(r, phi0), c(r, 0.0), c(0.0, 0.0)], n_c, n_r);
                    literal = fidelity(&a.state, &swapped).map_err(err)?;
                }
            }
        }
        let passed = worst_phi < 1e-10 && worst_psi < 1e-10 && worst_overlap < 1e-10;
        Ok((
            passed,
            format!(
                "max |1-F| Phi {worst_phi:.2e}, Psi {worst_psi:.2e}; Psi(phi0) vs Psi(phi0+pi) overlap {worst_overlap:.2e}; \
                 target (|du>+e^(i phi0)|ud>)/sqrt2 (swapped ket order would give F = {literal:.4})"
            ),
        ))
    })();
    Check::from_result(3, "bell-effective", outcome)
}

/// Exact sideband dynamics versus the dispersive prediction.
pub fn adiabatic_regime() -> Check {
    let outcome = (|| -> Outcome {
        let start = Instant::now();
        let modes = ModeParams::new(0.1);
        let omega = 0.05;
        let config = HilbertConfig::new(10, 10);
        let engine = Engine::Exact { dt_max: 0.05, tolerance: 1e-4 };
        let infidelity = |ratio: f64| -> Result<f64, String> {
            let p = BichromaticParams::symmetric(1, ratio * modes.eta * omega, c(omega, 0.0), modes);
            let out = make_phi(Sign::Plus, &p, config, 0, 0, engine).map_err(err)?;
            Ok(1.0 - out.fidelity)
        };
        let base = infidelity(20.0)?;
        let doubled = infidelity(40.0)?;
        let elapsed = start.elapsed().as_secs_f64();
        let factor = base / doubled;
        let fid_ok = 1.0 - base >= 0.99;
        let factor_ok = (2.5..=6.0).contains(&factor);
        let time_ok = elapsed < 60.0;
        Ok((
            fid_ok && factor_ok && time_ok,
            format!(
                "F(delta = 20 eta Omega) = {:.5} (need >= 0.99: {}); infidelity ratio on doubling delta = {factor:.3} (need [2.5, 6]: {}); {elapsed:.1} s",
                1.0 - base,
                if fid_ok { "ok" } else { "no" },
                if factor_ok { "ok" } else { "no" },
            ),
        ))
    })();
    Check::from_result(4, "adiabatic validity", outcome)
}

fn data_rows(text: &str) -> impl Iterator<Item = Vec<&str>> {
    text.lines().filter(|l| !l.starts_with('#')).skip(1).map(|l| l.split(',').collect())
}

/// Effective Rabi frequencies of the first sideband are all distinct and of
/// one sign.
pub fn spectrum_distinct() -> Check {
    let outcome = (|| -> Outcome {
        let text = "mode = \"spectrum\"\n[modes]\neta = 0.23\n[drive]\nk = 1\ndelta = 0.01\nomega = 0.01\n[spectrum]\nn_c_max = 25\nn_r_max = 25\n";
        let cfg = parse_config(text, None).map_err(err)?;
        let out = run(&cfg).map_err(err)?;
        let csv = &out.artifacts.iter().find(|a| a.name == "spectrum.csv").ok_or("no spectrum.csv")?.contents;
        let mut signed = Vec::new();
        for row in data_rows(csv) {
            signed.push(row[2].parse::<f64>().map_err(err)?);
        }
        let mut mags: Vec<f64> = signed.iter().map(|v| v.abs()).collect();
        mags.sort_by(f64::total_cmp);
        let gap = mags.windows(2).map(|w| (w[1] - w[0]) / w[1]).fold(f64::INFINITY, f64::min);
        let one_sign = signed.iter().all(|&v| v > 0.0) || signed.iter().all(|&v| v < 0.0);
        let passed = signed.len() == 26 * 26 && gap > 1e-6 && one_sign;
        Ok((passed, format!("{} rows, min relative gap {gap:.3e} (> 1e-6), single sign {one_sign}", signed.len())))
    })();
    Check::from_result(5, "spectrum distinct", outcome)
}

/// Thermal fidelity and the η² scaling of the Rabi-frequency spread.
pub fn lamb_dicke() -> Check {
    let outcome = (|| -> Outcome {
        let drive = |eta: f64| BichromaticParams::symmetric(1, 0.01, c(0.01, 0.0), ModeParams::new(eta));
        let fid = thermal_bell_scan(0.5, 0.5, &drive(0.02), None).map_err(err)?.value;
        let spread_small = rabi_dispersion(&drive(0.01), 25, 25).map_err(err)?;
        let spread_large = rabi_dispersion(&drive(0.02), 25, 25).map_err(err)?;
        let ratio = spread_small / spread_large;
        Ok((
            fid >= 0.999 && ratio <= 0.3,
            format!("thermal F = {fid:.6} (>= 0.999); dispersion ratio eta 0.01/0.02 over 26x26 levels = {ratio:.4} (<= 0.3)"),
        ))
    })();
    Check::from_result(6, "lamb-dicke robustness", outcome)
}

/// Vacuum Wigner function at the origin and at displaced points.
pub fn wigner_oracle() -> Check {
    let outcome = (|| -> Outcome {
        let config = HilbertConfig::new(20, 20);
        let vacuum = make_vib_state(&StateSpec::Fock { n_c: 0, n_r: 0 }, config).map_err(err)?;
        let origin = wigner_direct(&vacuum, c(0.0, 0.0), c(0.0, 0.0)).value;
        let origin_err = (origin - WIGNER_SCALE).abs();
        let points = [
            (c(1.0, 0.0), c(0.0, 0.0)),
            (c(0.0, 0.0), c(0.0, -1.0)),
            (c(0.6, 0.8), c(0.0, 0.0)),
            (c(-0.5, 0.3), c(0.2, 0.4)),
            (c(0.7, 0.0), c(0.0, 0.7)),
            (c(0.0, -0.9), c(-0.8, 0.6)),
            (c(0.25, 0.25), c(-0.1, -0.3)),
        ];
        let mut worst = 0.0f64;
        for (ac, ar) in points {
            let got = wigner_direct(&vacuum, ac, ar).value;
            let expected = WIGNER_SCALE * (-2.0 * ac.norm_sqr() - 2.0 * ar.norm_sqr()).exp();
            worst = worst.max((got - expected).abs());
        }
        Ok((
            origin_err < 1e-10 && worst < 1e-8,
            format!("W(0,0) error {origin_err:.2e} (< 1e-10); displaced vacuum max error {worst:.2e} (< 1e-8)"),
        ))
    })();
    Check::from_result(7, "wigner oracle", outcome)
}

/// Shared setup of the two tomography round trips.
struct TomographyCase {
    rho: ionbell_core::VibDensity,
    p: BichromaticParams,
    settings: ProtocolSettings,
}

fn tomography_case(shots: u64, seed: u64) -> Result<TomographyCase, String> {
    let config = HilbertConfig::new(12, 2);
    let state = StateSpec::Superposition(vec![(0, 0, c(1.0, 0.0)), (2, 0, c(1.0, 0.0))]);
    let rho = make_vib_state(&state, config).map_err(err)?;
    let p = BichromaticParams::symmetric(1, 0.01, c(0.01, 0.0), ModeParams::new(0.23));
    let taus = default_taus(&p, 10, 0, Some(60)).map_err(err)?;
    let settings = ProtocolSettings { taus, shots, seed, n_fit_c: 10, n_fit_r: 0, ridge: 0.0 };
    Ok(TomographyCase { rho, p, settings })
}

fn line_alphas(lo: f64, hi: f64, n: usize) -> Vec<(C64, C64)> {
    (0..n).map(|i| (c(lo + (hi - lo) * i as f64 / (n - 1) as f64, 0.0), c(0.0, 0.0))).collect()
}

/// Worst Wigner and population errors of a protocol run.
fn protocol_errors(case: &TomographyCase, alphas: &[(C64, C64)]) -> Result<(f64, f64, Vec<f64>), String> {
    let points = protocol_run(&case.rho, alphas, &case.p, &case.settings).map_err(err)?;
    let (mut w_err, mut pop_err) = (0.0f64, 0.0f64);
    let mut w_errs = Vec::with_capacity(points.len());
    for pt in &points {
        let e = (pt.point.w - pt.exact).abs();
        w_errs.push(e);
        w_err = w_err.max(e);
        let displaced = displace_vib(&case.rho, pt.point.alpha_c, pt.point.alpha_r).value;
        for ((n_c, n_r), pi) in pt.estimate.iter() {
            pop_err = pop_err.max((pi - displaced.population(n_c, n_r)).abs());
        }
    }
    Ok((w_err, pop_err, w_errs))
}

pub fn tomography_noiseless() -> Check {
    let outcome = (|| -> Outcome {
        let case = tomography_case(0, 0)?;
        let (w_err, pop_err, _) = protocol_errors(&case, &line_alphas(-0.5, 0.5, 5))?;
        Ok((
            w_err <= 1e-6 && pop_err <= 1e-6,
            format!("5 points, max Wigner error {w_err:.2e}, max population error {pop_err:.2e} (<= 1e-6)"),
        ))
    })();
    Check::from_result(8, "tomography noiseless", outcome)
}

/// Repetitions used to estimate the RMS Wigner error at each shot count.
pub const RMS_REPETITIONS: u64 = 32;
/// Displacements on the line used for the RMS estimate.
pub const RMS_POINTS: usize = 21;

pub fn tomography_shot_noise(seed: u64) -> Check {
    let outcome = (|| -> Outcome {
        let case = tomography_case(10_000, seed)?;
        let (w_err, pop_err, _) = protocol_errors(&case, &line_alphas(-0.5, 0.5, 5))?;

        // The RMS error of a single 5-point run is itself too noisy to pin a
        // ratio, so average squared errors over a finer line and several
        // independent shot streams.
        let alphas = line_alphas(-1.0, 1.0, RMS_POINTS);
        let rms = |shots: u64| -> Result<f64, String> {
            let mut sum = 0.0;
            let mut count = 0usize;
            for r in 0..RMS_REPETITIONS {
                let case = tomography_case(shots, substream(seed, 1000 + r))?;
                let (_, _, errs) = protocol_errors(&case, &alphas)?;
                sum += errs.iter().map(|e| e * e).sum::<f64>();
                count += errs.len();
            }
            Ok((sum / count as f64).sqrt())
        };
        let (rms_1, rms_4) = (rms(10_000)?, rms(40_000)?);
        let factor = rms_1 / rms_4;
        let passed = pop_err <= 0.05 && w_err <= 0.08 && (1.6..=2.6).contains(&factor);
        Ok((
            passed,
            format!(
                "1e4 shots x 60 taus: max population error {pop_err:.2e} (<= 0.05), max Wigner error {w_err:.2e} (<= 0.08); \
                 RMS Wigner error {rms_1:.3e} -> {rms_4:.3e} at 4x shots, factor {factor:.3} (in [1.6, 2.6]; {RMS_POINTS} points x {RMS_REPETITIONS} streams)"
            ),
        ))
    })();
    Check::from_result(9, "tomography shot noise", outcome)
}

/// Configurations for every mode except `validate`, small enough to run
/// twice in well under a second each. `record` is the path `tomo-invert`
/// reads.
pub fn determinism_configs(seed: u64, record: &str) -> Vec<(&'static str, String)> {
    let drive = "[modes]\neta = 0.15\n[drive]\nk = 1\ndelta = 0.03\nomega = [0.01, 0.002]\nphi = 0.3\nphi0 = 0.5\n";
    let hilbert = "[hilbert]\nn_max_c = 6\nn_max_r = 2\n";
    vec![
        ("spectrum", format!("mode = \"spectrum\"\nseed = {seed}\n{drive}[spectrum]\nn_c_max = 8\nn_r_max = 4\n")),
        (
            "evolve",
            format!(
                "mode = \"evolve\"\nseed = {seed}\n{hilbert}{drive}[state]\nkind = \"thermal\"\nnbar_c = 0.3\nnbar_r = 0.1\n[evolve]\nt_end = 400.0\nsamples = 21\n"
            ),
        ),
        (
            "evolve-exact",
            format!(
                "mode = \"evolve\"\nseed = {seed}\n[hilbert]\nn_max_c = 3\nn_max_r = 1\n{drive}[state]\nkind = \"fock\"\nn_c = 0\nn_r = 0\n[evolve]\nengine = \"exact\"\nt_end = 30.0\nsamples = 7\n"
            ),
        ),
        (
            "bell-phi",
            format!("mode = \"bell-phi\"\nseed = {seed}\n{hilbert}{drive}[state]\nkind = \"fock\"\nn_c = 1\nn_r = 0\n[bell]\nsign = \"-\"\n"),
        ),
        (
            "bell-psi",
            format!(
                "mode = \"bell-psi\"\nseed = {seed}\n{hilbert}{drive}[carrier]\nomega = 0.2\nvarphi0 = 0.8\n[state]\nkind = \"fock\"\nn_c = 0\nn_r = 1\n"
            ),
        ),
        (
            "tomo-synth",
            format!(
                "mode = \"tomo-synth\"\nseed = {seed}\n{hilbert}{drive}[state]\nkind = \"coherent\"\nalpha_c = [0.4, 0.1]\n[tomography]\nn_fit_c = 4\nn_fit_r = 0\nshots = 500\nalpha = [0.1, 0.0, 0.0, 0.0]\n"
            ),
        ),
        (
            "tomo-invert",
            format!("mode = \"tomo-invert\"\nseed = {seed}\n[tomography]\nn_fit_c = 4\nn_fit_r = 0\nrecord = '{record}'\n"),
        ),
        (
            "wigner",
            format!(
                "mode = \"wigner\"\nseed = {seed}\n{hilbert}{drive}[state]\nkind = \"superposition\"\ncomponents = [[0, 0, 1.0, 0.0], [1, 0, 0.0, 1.0]]\n[tomography]\nn_fit_c = 4\nn_fit_r = 0\nshots = 1000\nalphas = [[0.0, 0.0, 0.0, 0.0], [0.3, 0.1, 0.0, 0.0], [-0.2, 0.0, 0.0, 0.0], [0.0, 0.4, 0.0, 0.0]]\n"
            ),
        ),
    ]
}

fn run_text(text: &str, threads: usize) -> Result<Vec<Artifact>, String> {
    let cfg = parse_config(text, None).map_err(err)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(err)?;
    pool.install(|| run(&cfg)).map(|o| o.artifacts).map_err(err)
}

/// Every mode twice, once single-threaded and once on four threads; the
/// artifacts must agree byte for byte.
pub fn determinism(seed: u64) -> Check {
    let record = std::env::temp_dir().join(format!("ionbell-determinism-{}-{seed}.csv", std::process::id()));
    let outcome = (|| -> Outcome {
        let configs = determinism_configs(seed, &record.to_string_lossy());
        let mut differing = Vec::new();
        let mut files = 0usize;
        for (name, text) in &configs {
            let a = run_text(text, 1)?;
            let b = run_text(text, 4)?;
            if *name == "tomo-synth" {
                let signal = a.iter().find(|x| x.name == "signal.csv").ok_or("no signal.csv")?;
                std::fs::write(&record, &signal.contents).map_err(err)?;
            }
            files += a.len();
            if a != b {
                differing.push(*name);
            }
        }
        let detail = if differing.is_empty() {
            format!("{} modes, {files} artifacts identical across repeated runs", configs.len())
        } else {
            format!("artifacts differ for {}", differing.join(", "))
        };
        Ok((differing.is_empty(), detail))
    })();
    let _ = std::fs::remove_file(&record);
    Check::from_result(10, "determinism", outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_checks_pass() {
        for check in [closed_form_equivalence(3), decoupling(3), bell_effective(), spectrum_distinct(), lamb_dicke()] {
            assert!(check.passed, "{}", check.line());
        }
    }

    #[test]
    fn check_line_format() {
        let c = Check::new(4, "x", false, "d".into());
        assert_eq!(c.line(), "[ 4] FAIL x: d");
    }
}
