//! Run configuration.
//!
//! The file is TOML restricted to flat `key = value` pairs under `[section]`
//! headers. Every key is optional at the syntax level; which ones are
//! required depends on `mode`. Unknown keys, duplicates and out-of-range
//! values are reported with the offending key and line.
//!
//! ```toml
//! mode = "bell-phi"
//! seed = 7
//!
//! [hilbert]
//! n_max_c = 6
//! n_max_r = 2
//!
//! [modes]
//! eta = 0.1
//!
//! [drive]
//! k = 1
//! delta = 0.02
//! omega = 0.01          # or [re, im]
//!
//! [state]
//! kind = "fock"
//! n_c = 0
//! n_r = 0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use ionbell_core::bellgen::{Engine, Sign};
use ionbell_core::dynamics::{BichromaticParams, CarrierParams};
use ionbell_core::tomography::fmt_f64;
use ionbell_core::{Electronic, HilbertConfig, ModeParams, StateSpec, C64};
use serde::Deserialize;
use toml::Spanned;

/// Largest cutoff accepted per mode.
pub const MAX_LEVEL: usize = 400;
/// Largest two-mode grid accepted (dense joint matrices are `4·dim` square).
pub const MAX_VIB_DIM: usize = 2500;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: `{}`: {}", self.key, self.message)
        } else {
            write!(f, "config line {}: `{}`: {}", self.line, self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Spectrum,
    Evolve,
    BellPhi,
    BellPsi,
    TomoSynth,
    TomoInvert,
    Wigner,
    Validate,
}

impl RunMode {
    pub const ALL: [RunMode; 8] = [
        RunMode::Spectrum,
        RunMode::Evolve,
        RunMode::BellPhi,
        RunMode::BellPsi,
        RunMode::TomoSynth,
        RunMode::TomoInvert,
        RunMode::Wigner,
        RunMode::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RunMode::Spectrum => "spectrum",
            RunMode::Evolve => "evolve",
            RunMode::BellPhi => "bell-phi",
            RunMode::BellPsi => "bell-psi",
            RunMode::TomoSynth => "tomo-synth",
            RunMode::TomoInvert => "tomo-invert",
            RunMode::Wigner => "wigner",
            RunMode::Validate => "validate",
        }
    }

    fn needs_drive(self) -> bool {
        !matches!(self, RunMode::TomoInvert | RunMode::Validate)
    }
}

/// Propagator for the `evolve` mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolveEngine {
    Effective,
    Exact { dt_max: f64, tolerance: f64 },
    Carrier,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveSettings {
    pub engine: EvolveEngine,
    pub t_end: f64,
    pub samples: usize,
    pub electronic: Electronic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BellSettings {
    pub sign: Sign,
    pub start: Sign,
    pub engine: Engine,
    pub t_pulse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySettings {
    pub n_fit_c: Option<usize>,
    pub n_fit_r: Option<usize>,
    pub shots: u64,
    pub ridge: f64,
    pub taus: Option<Vec<f64>>,
    pub tau_count: Option<usize>,
    pub alpha: (C64, C64),
    pub alphas: Vec<(C64, C64)>,
    /// Path as written in the file, and resolved against the config directory.
    pub record: Option<(String, PathBuf)>,
}

/// Fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: RunMode,
    pub seed: u64,
    pub hilbert: Option<HilbertConfig>,
    pub drive: Option<BichromaticParams>,
    pub carrier: Option<CarrierParams>,
    pub state: Option<StateSpec>,
    pub spectrum: Option<(usize, usize)>,
    pub evolve: Option<EvolveSettings>,
    pub bell: Option<BellSettings>,
    pub tomography: Option<TomographySettings>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawComplex {
    Real(f64),
    Pair([f64; 2]),
}

impl RawComplex {
    fn value(self) -> C64 {
        match self {
            RawComplex::Real(re) => C64::new(re, 0.0),
            RawComplex::Pair([re, im]) => C64::new(re, im),
        }
    }
}

type F = Option<Spanned<f64>>;
type I = Option<Spanned<i64>>;
type S = Option<Spanned<String>>;
type Z = Option<Spanned<RawComplex>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    mode: Option<Spanned<String>>,
    seed: I,
    hilbert: Option<RawHilbert>,
    modes: Option<RawModes>,
    drive: Option<RawDrive>,
    carrier: Option<RawCarrier>,
    state: Option<RawState>,
    spectrum: Option<RawSpectrum>,
    evolve: Option<RawEvolve>,
    bell: Option<RawBell>,
    tomography: Option<RawTomography>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHilbert {
    n_max_c: I,
    n_max_r: I,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModes {
    eta: F,
    eta_r: F,
    nu: F,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDrive {
    k: I,
    k_prime: I,
    delta: F,
    delta_prime: F,
    omega: Z,
    phi: F,
    phi0: F,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCarrier {
    omega: Z,
    varphi: F,
    varphi0: F,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    kind: S,
    n_c: I,
    n_r: I,
    nbar_c: F,
    nbar_r: F,
    alpha_c: Z,
    alpha_r: Z,
    components: Option<Spanned<Vec<[f64; 4]>>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpectrum {
    n_c_max: I,
    n_r_max: I,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvolve {
    engine: S,
    t_end: F,
    samples: I,
    electronic: S,
    dt_max: F,
    tolerance: F,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBell {
    sign: S,
    start: S,
    engine: S,
    dt_max: F,
    tolerance: F,
    t_pulse: F,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTomography {
    n_fit_c: I,
    n_fit_r: I,
    shots: I,
    ridge: F,
    taus: Option<Spanned<Vec<f64>>>,
    tau_count: I,
    alpha: Option<Spanned<[f64; 4]>>,
    alphas: Option<Spanned<Vec<[f64; 4]>>>,
    record: S,
}

/// Line lookup and error construction over the source text.
struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    fn section_line(&self, section: &str) -> usize {
        let header = format!("[{section}]");
        self.text
            .lines()
            .position(|l| l.trim() == header)
            .map(|i| i + 1)
            .unwrap_or(0)
    }

    fn at<T>(&self, key: &str, spanned: &Spanned<T>, message: impl Into<String>) -> ConfigError {
        ConfigError { line: self.line_of(spanned.span().start), key: key.to_string(), message: message.into() }
    }

    fn missing(&self, section: &str, key: &str) -> ConfigError {
        let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
        let line = if section.is_empty() { 0 } else { self.section_line(section) };
        ConfigError { line, key: full, message: "missing required key".into() }
    }

    /// Turns a TOML parse error into a [`ConfigError`]; duplicate keys are
    /// reported with the lines of both definitions.
    fn parse_error(&self, err: &toml::de::Error) -> ConfigError {
        let start = err.span().map(|s| s.start).unwrap_or(0);
        let line = self.line_of(start);
        let lines: Vec<&str> = self.text.lines().collect();
        let current = lines.get(line.saturating_sub(1)).copied().unwrap_or("");
        let key = current.split('=').next().unwrap_or("").trim().trim_start_matches('[').trim_end_matches(']');
        let message = err.message().to_string();
        if message.contains("duplicate") {
            let mut first = None;
            for i in (0..line.saturating_sub(1)).rev() {
                let l = lines[i].trim();
                if l.starts_with('[') {
                    if l.trim_matches(|c| c == '[' || c == ']') == key {
                        first = Some(i + 1);
                    }
                    if first.is_none() && !current.trim().starts_with('[') {
                        break;
                    }
                    continue;
                }
                if l.split('=').next().map(str::trim) == Some(key) {
                    first = Some(i + 1);
                }
            }
            let message = match first {
                Some(f) => format!("duplicate key (first defined on line {f}, again on line {line})"),
                None => format!("duplicate key on line {line}"),
            };
            return ConfigError { line, key: key.to_string(), message };
        }
        ConfigError { line, key: key.to_string(), message }
    }
}

fn finite(src: &Source, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
    let x = *v.get_ref();
    if x.is_finite() {
        Ok(x)
    } else {
        Err(src.at(key, v, format!("must be finite, got {x}")))
    }
}

fn positive(src: &Source, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
    let x = finite(src, key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(src.at(key, v, format!("must be > 0, got {x}")))
    }
}

fn nonneg_f(src: &Source, key: &str, v: &Spanned<f64>) -> Result<f64, ConfigError> {
    let x = finite(src, key, v)?;
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(src.at(key, v, format!("must be >= 0, got {x}")))
    }
}

fn count(src: &Source, key: &str, v: &Spanned<i64>, lo: i64, hi: i64) -> Result<usize, ConfigError> {
    let x = *v.get_ref();
    if (lo..=hi).contains(&x) {
        Ok(x as usize)
    } else {
        Err(src.at(key, v, format!("must be in [{lo}, {hi}], got {x}")))
    }
}

fn complex(src: &Source, key: &str, v: &Spanned<RawComplex>) -> Result<C64, ConfigError> {
    let z = v.get_ref().value();
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(src.at(key, v, "must be finite"))
    }
}

fn sign(src: &Source, key: &str, v: &Spanned<String>) -> Result<Sign, ConfigError> {
    match v.get_ref().as_str() {
        "+" | "plus" => Ok(Sign::Plus),
        "-" | "minus" => Ok(Sign::Minus),
        other => Err(src.at(key, v, format!("expected \"+\" or \"-\", got \"{other}\""))),
    }
}

fn alpha_pair(a: [f64; 4]) -> (C64, C64) {
    (C64::new(a[0], a[1]), C64::new(a[2], a[3]))
}

fn parse_mode(src: &Source, v: &Spanned<String>) -> Result<RunMode, ConfigError> {
    RunMode::ALL.into_iter().find(|m| m.name() == v.get_ref()).ok_or_else(|| {
        let names: Vec<&str> = RunMode::ALL.iter().map(|m| m.name()).collect();
        src.at("mode", v, format!("unknown mode \"{}\"; expected one of {}", v.get_ref(), names.join(", ")))
    })
}

/// Parses and validates a configuration. Relative paths inside it are resolved
/// against `base_dir`.
pub fn parse_config(text: &str, base_dir: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let src = Source { text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| src.parse_error(&e))?;
    let mode_raw = raw.mode.as_ref().ok_or_else(|| src.missing("", "mode"))?;
    let mode = parse_mode(&src, mode_raw)?;
    let seed = match &raw.seed {
        Some(s) => count(&src, "seed", s, 0, i64::MAX)? as u64,
        None => 0,
    };

    let hilbert = match &raw.hilbert {
        Some(h) => {
            let c = h.n_max_c.as_ref().ok_or_else(|| src.missing("hilbert", "n_max_c"))?;
            let r = h.n_max_r.as_ref().ok_or_else(|| src.missing("hilbert", "n_max_r"))?;
            let n_c = count(&src, "hilbert.n_max_c", c, 0, MAX_LEVEL as i64)?;
            let n_r = count(&src, "hilbert.n_max_r", r, 0, MAX_LEVEL as i64)?;
            if (n_c + 1) * (n_r + 1) > MAX_VIB_DIM {
                return Err(src.at("hilbert.n_max_r", r, format!("grid of {} levels exceeds {MAX_VIB_DIM}", (n_c + 1) * (n_r + 1))));
            }
            Some(HilbertConfig::new(n_c, n_r))
        }
        None => None,
    };
    let needs_hilbert = matches!(mode, RunMode::Evolve | RunMode::TomoSynth | RunMode::Wigner | RunMode::BellPhi | RunMode::BellPsi);

    let modes = match &raw.modes {
        Some(m) => {
            let eta_v = m.eta.as_ref().ok_or_else(|| src.missing("modes", "eta"))?;
            let eta = positive(&src, "eta", eta_v)?;
            if eta > 1.0 {
                return Err(src.at("eta", eta_v, format!("must be in (0, 1], got {eta}")));
            }
            let mut params = ModeParams::new(eta);
            if let Some(v) = &m.eta_r {
                params.eta_r = positive(&src, "eta_r", v)?;
            }
            if let Some(v) = &m.nu {
                params.nu = positive(&src, "nu", v)?;
            }
            Some(params)
        }
        None => None,
    };

    let drive = match &raw.drive {
        Some(d) if mode.needs_drive() => {
            let modes = modes.ok_or_else(|| src.missing("modes", "eta"))?;
            let k_v = d.k.as_ref().ok_or_else(|| src.missing("drive", "k"))?;
            let k = count(&src, "drive.k", k_v, 0, 20)?;
            let k_prime = match &d.k_prime {
                Some(v) => count(&src, "drive.k_prime", v, 0, 20)?,
                None => k,
            };
            let delta_v = d.delta.as_ref().ok_or_else(|| src.missing("drive", "delta"))?;
            let delta = finite(&src, "drive.delta", delta_v)?;
            if delta == 0.0 {
                return Err(src.at("drive.delta", delta_v, "must be nonzero"));
            }
            let delta_prime = match &d.delta_prime {
                Some(v) => finite(&src, "drive.delta_prime", v)?,
                None => delta,
            };
            let omega_v = d.omega.as_ref().ok_or_else(|| src.missing("drive", "omega"))?;
            let omega = complex(&src, "drive.omega", omega_v)?;
            let phi = d.phi.as_ref().map(|v| finite(&src, "drive.phi", v)).transpose()?.unwrap_or(0.0);
            let phi0 = d.phi0.as_ref().map(|v| finite(&src, "drive.phi0", v)).transpose()?.unwrap_or(0.0);
            Some(BichromaticParams { k, k_prime, delta, delta_prime, omega, phi, phi0, modes })
        }
        _ => None,
    };
    if mode.needs_drive() && drive.is_none() {
        return Err(src.missing("drive", "k"));
    }

    let carrier = match &raw.carrier {
        Some(c) => {
            let modes = modes.ok_or_else(|| src.missing("modes", "eta"))?;
            let omega_v = c.omega.as_ref().ok_or_else(|| src.missing("carrier", "omega"))?;
            let omega = complex(&src, "carrier.omega", omega_v)?;
            let varphi = c.varphi.as_ref().map(|v| finite(&src, "carrier.varphi", v)).transpose()?.unwrap_or(0.0);
            let varphi0 = c.varphi0.as_ref().map(|v| finite(&src, "carrier.varphi0", v)).transpose()?.unwrap_or(0.0);
            Some(CarrierParams::new(omega, varphi, varphi0, modes))
        }
        None => None,
    };

    let state = match &raw.state {
        Some(s) => Some(parse_state(&src, s, hilbert)?),
        None => None,
    };

    let spectrum = match (&raw.spectrum, mode) {
        (Some(s), _) => {
            let c = s.n_c_max.as_ref().ok_or_else(|| src.missing("spectrum", "n_c_max"))?;
            let r = s.n_r_max.as_ref().ok_or_else(|| src.missing("spectrum", "n_r_max"))?;
            Some((count(&src, "spectrum.n_c_max", c, 0, 1000)?, count(&src, "spectrum.n_r_max", r, 0, 1000)?))
        }
        (None, RunMode::Spectrum) => return Err(src.missing("spectrum", "n_c_max")),
        _ => None,
    };

    let evolve = match &raw.evolve {
        Some(e) => Some(parse_evolve(&src, e)?),
        None if mode == RunMode::Evolve => return Err(src.missing("evolve", "t_end")),
        None => None,
    };
    if let Some(EvolveSettings { engine: EvolveEngine::Carrier, .. }) = &evolve {
        if carrier.is_none() && mode == RunMode::Evolve {
            return Err(src.missing("carrier", "omega"));
        }
    }

    let bell = parse_bell(&src, raw.bell.as_ref())?;

    let tomography = match &raw.tomography {
        Some(t) => Some(parse_tomography(&src, t, base_dir)?),
        None => None,
    };

    // Mode-specific requirements.
    if needs_hilbert && hilbert.is_none() {
        let thermal_bell = mode == RunMode::BellPhi && matches!(state, Some(StateSpec::Thermal { .. }));
        if !thermal_bell {
            return Err(src.missing("hilbert", "n_max_c"));
        }
    }
    if matches!(mode, RunMode::Evolve | RunMode::BellPhi | RunMode::BellPsi | RunMode::TomoSynth | RunMode::Wigner)
        && state.is_none()
    {
        return Err(src.missing("state", "kind"));
    }
    if matches!(mode, RunMode::BellPhi | RunMode::BellPsi) {
        match &state {
            Some(StateSpec::Fock { .. }) => {}
            Some(StateSpec::Thermal { .. }) if mode == RunMode::BellPhi => {}
            _ => {
                let kind = raw.state.as_ref().and_then(|s| s.kind.as_ref());
                let msg = if mode == RunMode::BellPhi {
                    "bell-phi needs a \"fock\" or \"thermal\" state"
                } else {
                    "bell-psi needs a \"fock\" state"
                };
                return Err(match kind {
                    Some(k) => src.at("state.kind", k, msg),
                    None => src.missing("state", "kind"),
                });
            }
        }
    }
    if mode == RunMode::BellPsi && carrier.is_none() {
        return Err(src.missing("carrier", "omega"));
    }
    if matches!(mode, RunMode::TomoSynth | RunMode::TomoInvert | RunMode::Wigner) {
        let t = tomography.as_ref().ok_or_else(|| src.missing("tomography", "n_fit_c"))?;
        let fit_needed = mode != RunMode::TomoSynth || t.taus.is_none();
        if fit_needed && (t.n_fit_c.is_none() || t.n_fit_r.is_none()) {
            let key = if t.n_fit_c.is_none() { "n_fit_c" } else { "n_fit_r" };
            return Err(src.missing("tomography", key));
        }
        if mode == RunMode::TomoInvert && t.record.is_none() {
            return Err(src.missing("tomography", "record"));
        }
        if mode == RunMode::Wigner && t.alphas.is_empty() && raw.tomography.as_ref().and_then(|r| r.alphas.as_ref()).is_none() {
            return Err(src.missing("tomography", "alphas"));
        }
        if let (Some(h), Some(fc), Some(fr)) = (hilbert, t.n_fit_c, t.n_fit_r) {
            if mode == RunMode::Wigner {
                let raw_t = raw.tomography.as_ref().expect("present");
                if fc + 2 > h.n_max_c {
                    let v = raw_t.n_fit_c.as_ref().expect("present");
                    return Err(src.at("tomography.n_fit_c", v, format!("must be <= hilbert.n_max_c - 2 = {}", h.n_max_c as i64 - 2)));
                }
                if fr + 2 > h.n_max_r {
                    let v = raw_t.n_fit_r.as_ref().expect("present");
                    return Err(src.at("tomography.n_fit_r", v, format!("must be <= hilbert.n_max_r - 2 = {}", h.n_max_r as i64 - 2)));
                }
            }
        }
    }

    Ok(RunConfig { mode, seed, hilbert, drive, carrier, state, spectrum, evolve, bell: Some(bell), tomography })
}

fn parse_state(src: &Source, s: &RawState, hilbert: Option<HilbertConfig>) -> Result<StateSpec, ConfigError> {
    let kind_v = s.kind.as_ref().ok_or_else(|| src.missing("state", "kind"))?;
    let fock_level = |key: &str, v: &Option<Spanned<i64>>, max: Option<usize>| -> Result<usize, ConfigError> {
        let v = v.as_ref().ok_or_else(|| src.missing("state", key))?;
        let hi = max.unwrap_or(MAX_LEVEL) as i64;
        count(src, &format!("state.{key}"), v, 0, hi)
    };
    match kind_v.get_ref().as_str() {
        "fock" => Ok(StateSpec::Fock {
            n_c: fock_level("n_c", &s.n_c, hilbert.map(|h| h.n_max_c))?,
            n_r: fock_level("n_r", &s.n_r, hilbert.map(|h| h.n_max_r))?,
        }),
        "thermal" => {
            let c = s.nbar_c.as_ref().ok_or_else(|| src.missing("state", "nbar_c"))?;
            let r = s.nbar_r.as_ref().ok_or_else(|| src.missing("state", "nbar_r"))?;
            Ok(StateSpec::Thermal { nbar_c: nonneg_f(src, "state.nbar_c", c)?, nbar_r: nonneg_f(src, "state.nbar_r", r)? })
        }
        "coherent" => {
            let zero = C64::new(0.0, 0.0);
            let alpha_c = s.alpha_c.as_ref().map(|v| complex(src, "state.alpha_c", v)).transpose()?.unwrap_or(zero);
            let alpha_r = s.alpha_r.as_ref().map(|v| complex(src, "state.alpha_r", v)).transpose()?.unwrap_or(zero);
            Ok(StateSpec::Coherent { alpha_c, alpha_r })
        }
        "superposition" => {
            let comps = s.components.as_ref().ok_or_else(|| src.missing("state", "components"))?;
            let mut out = Vec::new();
            for c in comps.get_ref() {
                let [n_c, n_r, re, im] = *c;
                let level_ok = |n: f64, max: Option<usize>| {
                    n >= 0.0 && n.fract() == 0.0 && n <= max.unwrap_or(MAX_LEVEL) as f64
                };
                if !level_ok(n_c, hilbert.map(|h| h.n_max_c)) || !level_ok(n_r, hilbert.map(|h| h.n_max_r)) {
                    return Err(src.at("state.components", comps, format!("Fock levels ({n_c}, {n_r}) must be integers inside the grid")));
                }
                if !(re.is_finite() && im.is_finite()) {
                    return Err(src.at("state.components", comps, "amplitudes must be finite"));
                }
                out.push((n_c as usize, n_r as usize, C64::new(re, im)));
            }
            if out.iter().all(|c| c.2.norm() == 0.0) {
                return Err(src.at("state.components", comps, "at least one nonzero amplitude is required"));
            }
            Ok(StateSpec::Superposition(out))
        }
        other => Err(src.at(
            "state.kind",
            kind_v,
            format!("unknown state kind \"{other}\"; expected fock, thermal, coherent or superposition"),
        )),
    }
}

fn step_settings(src: &Source, section: &str, dt_max: &F, tolerance: &F) -> Result<(f64, f64), ConfigError> {
    let dt = dt_max.as_ref().map(|v| positive(src, &format!("{section}.dt_max"), v)).transpose()?.unwrap_or(0.05);
    let tol = tolerance.as_ref().map(|v| positive(src, &format!("{section}.tolerance"), v)).transpose()?.unwrap_or(1e-4);
    Ok((dt, tol))
}

fn parse_evolve(src: &Source, e: &RawEvolve) -> Result<EvolveSettings, ConfigError> {
    let t_v = e.t_end.as_ref().ok_or_else(|| src.missing("evolve", "t_end"))?;
    let t_end = positive(src, "evolve.t_end", t_v)?;
    let samples = e.samples.as_ref().map(|v| count(src, "evolve.samples", v, 2, 1_000_000)).transpose()?.unwrap_or(101);
    let (dt_max, tolerance) = step_settings(src, "evolve", &e.dt_max, &e.tolerance)?;
    let engine = match e.engine.as_ref() {
        None => EvolveEngine::Effective,
        Some(v) => match v.get_ref().as_str() {
            "effective" => EvolveEngine::Effective,
            "exact" => EvolveEngine::Exact { dt_max, tolerance },
            "carrier" => EvolveEngine::Carrier,
            other => return Err(src.at("evolve.engine", v, format!("expected effective, exact or carrier, got \"{other}\""))),
        },
    };
    let electronic = match e.electronic.as_ref() {
        None => Electronic::DownDown,
        Some(v) => Electronic::ALL
            .into_iter()
            .find(|el| el.label() == v.get_ref())
            .ok_or_else(|| src.at("evolve.electronic", v, format!("expected dd, du, ud or uu, got \"{}\"", v.get_ref())))?,
    };
    Ok(EvolveSettings { engine, t_end, samples, electronic })
}

fn parse_bell(src: &Source, b: Option<&RawBell>) -> Result<BellSettings, ConfigError> {
    let default = RawBell::default();
    let b = b.unwrap_or(&default);
    let sign_v = b.sign.as_ref().map(|v| sign(src, "bell.sign", v)).transpose()?.unwrap_or(Sign::Plus);
    let start = b.start.as_ref().map(|v| sign(src, "bell.start", v)).transpose()?.unwrap_or(Sign::Plus);
    let (dt_max, tolerance) = step_settings(src, "bell", &b.dt_max, &b.tolerance)?;
    let engine = match b.engine.as_ref() {
        None => Engine::Effective,
        Some(v) => match v.get_ref().as_str() {
            "effective" => Engine::Effective,
            "exact" => Engine::Exact { dt_max, tolerance },
            other => return Err(src.at("bell.engine", v, format!("expected effective or exact, got \"{other}\""))),
        },
    };
    let t_pulse = b.t_pulse.as_ref().map(|v| positive(src, "bell.t_pulse", v)).transpose()?;
    Ok(BellSettings { sign: sign_v, start, engine, t_pulse })
}

fn parse_tomography(src: &Source, t: &RawTomography, base_dir: Option<&Path>) -> Result<TomographySettings, ConfigError> {
    let n_fit_c = t.n_fit_c.as_ref().map(|v| count(src, "tomography.n_fit_c", v, 0, MAX_LEVEL as i64)).transpose()?;
    let n_fit_r = t.n_fit_r.as_ref().map(|v| count(src, "tomography.n_fit_r", v, 0, MAX_LEVEL as i64)).transpose()?;
    let shots = t.shots.as_ref().map(|v| count(src, "tomography.shots", v, 0, i64::MAX)).transpose()?.unwrap_or(0) as u64;
    let ridge = t.ridge.as_ref().map(|v| nonneg_f(src, "tomography.ridge", v)).transpose()?.unwrap_or(0.0);
    let taus = match &t.taus {
        Some(v) => {
            let taus = v.get_ref().clone();
            if taus.is_empty() {
                return Err(src.at("tomography.taus", v, "must not be empty"));
            }
            for (i, &x) in taus.iter().enumerate() {
                if !(x.is_finite() && x >= 0.0) {
                    return Err(src.at("tomography.taus", v, format!("tau[{i}] = {x} must be finite and >= 0")));
                }
                if i > 0 && !(x > taus[i - 1]) {
                    return Err(src.at("tomography.taus", v, format!("taus must increase strictly (index {i})")));
                }
            }
            Some(taus)
        }
        None => None,
    };
    let tau_count = t.tau_count.as_ref().map(|v| count(src, "tomography.tau_count", v, 2, 1_000_000)).transpose()?;
    let check_alpha = |key: &str, start: usize, a: &[f64; 4]| -> Result<(C64, C64), ConfigError> {
        if a.iter().all(|x| x.is_finite()) {
            Ok(alpha_pair(*a))
        } else {
            Err(ConfigError { line: src.line_of(start), key: key.into(), message: "displacements must be finite".into() })
        }
    };
    let zero = C64::new(0.0, 0.0);
    let alpha = match &t.alpha {
        Some(v) => check_alpha("tomography.alpha", v.span().start, v.get_ref())?,
        None => (zero, zero),
    };
    let alphas = match &t.alphas {
        Some(v) => v.get_ref().iter().map(|a| check_alpha("tomography.alphas", v.span().start, a)).collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    let record = t.record.as_ref().map(|v| {
        let written = v.get_ref().clone();
        let path = Path::new(&written);
        let resolved = match base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        };
        (written, resolved)
    });
    Ok(TomographySettings { n_fit_c, n_fit_r, shots, ridge, taus, tau_count, alpha, alphas, record })
}

fn fmt_c(z: C64) -> String {
    format!("[{}, {}]", fmt_f64(z.re), fmt_f64(z.im))
}

fn fmt_sign(s: Sign) -> String {
    format!("\"{}\"", s.symbol())
}

impl RunConfig {
    /// Resolved configuration as `(key, value)` pairs, defaults included, in
    /// a fixed order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| out.push((format!("config.{k}"), v));
        push("mode", format!("\"{}\"", self.mode.name()));
        push("seed", self.seed.to_string());
        if let Some(h) = self.hilbert {
            push("hilbert.n_max_c", h.n_max_c.to_string());
            push("hilbert.n_max_r", h.n_max_r.to_string());
        }
        let modes = self.drive.map(|d| d.modes).or(self.carrier.map(|c| c.modes));
        if let Some(m) = modes {
            push("modes.eta", fmt_f64(m.eta));
            push("modes.eta_r", fmt_f64(m.eta_r));
            push("modes.nu", fmt_f64(m.nu));
        }
        if let Some(d) = self.drive {
            push("drive.k", d.k.to_string());
            push("drive.k_prime", d.k_prime.to_string());
            push("drive.delta", fmt_f64(d.delta));
            push("drive.delta_prime", fmt_f64(d.delta_prime));
            push("drive.omega", fmt_c(d.omega));
            push("drive.phi", fmt_f64(d.phi));
            push("drive.phi0", fmt_f64(d.phi0));
        }
        if let Some(c) = self.carrier {
            push("carrier.omega", fmt_c(c.omega));
            push("carrier.varphi", fmt_f64(c.varphi));
            push("carrier.varphi0", fmt_f64(c.varphi0));
        }
        match &self.state {
            Some(StateSpec::Fock { n_c, n_r }) => {
                push("state.kind", "\"fock\"".into());
                push("state.n_c", n_c.to_string());
                push("state.n_r", n_r.to_string());
            }
            Some(StateSpec::Thermal { nbar_c, nbar_r }) => {
                push("state.kind", "\"thermal\"".into());
                push("state.nbar_c", fmt_f64(*nbar_c));
                push("state.nbar_r", fmt_f64(*nbar_r));
            }
            Some(StateSpec::Coherent { alpha_c, alpha_r }) => {
                push("state.kind", "\"coherent\"".into());
                push("state.alpha_c", fmt_c(*alpha_c));
                push("state.alpha_r", fmt_c(*alpha_r));
            }
            Some(StateSpec::Superposition(comps)) => {
                push("state.kind", "\"superposition\"".into());
                let items: Vec<String> = comps
                    .iter()
                    .map(|(n_c, n_r, a)| format!("[{n_c}, {n_r}, {}, {}]", fmt_f64(a.re), fmt_f64(a.im)))
                    .collect();
                push("state.components", format!("[{}]", items.join(", ")));
            }
            None => {}
        }
        if let Some((c, r)) = self.spectrum {
            push("spectrum.n_c_max", c.to_string());
            push("spectrum.n_r_max", r.to_string());
        }
        if let Some(e) = &self.evolve {
            match e.engine {
                EvolveEngine::Effective => push("evolve.engine", "\"effective\"".into()),
                EvolveEngine::Carrier => push("evolve.engine", "\"carrier\"".into()),
                EvolveEngine::Exact { dt_max, tolerance } => {
                    push("evolve.engine", "\"exact\"".into());
                    push("evolve.dt_max", fmt_f64(dt_max));
                    push("evolve.tolerance", fmt_f64(tolerance));
                }
            }
            push("evolve.t_end", fmt_f64(e.t_end));
            push("evolve.samples", e.samples.to_string());
            push("evolve.electronic", format!("\"{}\"", e.electronic.label()));
        }
        if matches!(self.mode, RunMode::BellPhi | RunMode::BellPsi) {
            if let Some(b) = &self.bell {
                push("bell.sign", fmt_sign(b.sign));
                push("bell.start", fmt_sign(b.start));
                match b.engine {
                    Engine::Effective => push("bell.engine", "\"effective\"".into()),
                    Engine::Exact { dt_max, tolerance } => {
                        push("bell.engine", "\"exact\"".into());
                        push("bell.dt_max", fmt_f64(dt_max));
                        push("bell.tolerance", fmt_f64(tolerance));
                    }
                }
                if let Some(t) = b.t_pulse {
                    push("bell.t_pulse", fmt_f64(t));
                }
            }
        }
        if let Some(t) = &self.tomography {
            if let Some(v) = t.n_fit_c {
                push("tomography.n_fit_c", v.to_string());
            }
            if let Some(v) = t.n_fit_r {
                push("tomography.n_fit_r", v.to_string());
            }
            push("tomography.shots", t.shots.to_string());
            push("tomography.ridge", fmt_f64(t.ridge));
            if let Some(taus) = &t.taus {
                let items: Vec<String> = taus.iter().map(|&x| fmt_f64(x)).collect();
                push("tomography.taus", format!("[{}]", items.join(", ")));
            }
            if let Some(n) = t.tau_count {
                push("tomography.tau_count", n.to_string());
            }
            let fmt_a = |(c, r): (C64, C64)| {
                format!("[{}, {}, {}, {}]", fmt_f64(c.re), fmt_f64(c.im), fmt_f64(r.re), fmt_f64(r.im))
            };
            push("tomography.alpha", fmt_a(t.alpha));
            if !t.alphas.is_empty() {
                let items: Vec<String> = t.alphas.iter().map(|&a| fmt_a(a)).collect();
                push("tomography.alphas", format!("[{}]", items.join(", ")));
            }
            if let Some((written, _)) = &t.record {
                push("tomography.record", format!("\"{written}\""));
            }
        }
        out
    }
}
