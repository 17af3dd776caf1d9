//! Line-oriented text form of a [`SignalRecord`].
//!
//! ```text
//! # key = value        (drive parameters, seed, free-form metadata)
//! tau,p_dd,shots
//! 0.0000000000000000e0,1.0000000000000000e0,0
//! ```

use std::fmt::Write as _;

use crate::dynamics::BichromaticParams;
use crate::fockspace::ModeParams;
use crate::{Error, Result, C64};

use super::{Sample, SignalRecord};

pub(crate) const COLUMNS: &str = "tau,p_dd,shots";

const PARAM_KEYS: [&str; 12] = [
    "k", "k_prime", "delta", "delta_prime", "omega_re", "omega_im", "phi", "phi0", "eta", "eta_r", "nu", "seed",
];

/// Full-precision float formatting shared by every text output.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl SignalRecord {
    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        for (key, value) in &self.metadata {
            let _ = writeln!(out, "# {key} = {value}");
        }
        let fields: [(&str, String); 12] = [
            ("k", p.k.to_string()),
            ("k_prime", p.k_prime.to_string()),
            ("delta", fmt_f64(p.delta)),
            ("delta_prime", fmt_f64(p.delta_prime)),
            ("omega_re", fmt_f64(p.omega.re)),
            ("omega_im", fmt_f64(p.omega.im)),
            ("phi", fmt_f64(p.phi)),
            ("phi0", fmt_f64(p.phi0)),
            ("eta", fmt_f64(p.modes.eta)),
            ("eta_r", fmt_f64(p.modes.eta_r)),
            ("nu", fmt_f64(p.modes.nu)),
            ("seed", self.seed.to_string()),
        ];
        for (key, value) in fields {
            let _ = writeln!(out, "# {key} = {value}");
        }
        out.push_str(COLUMNS);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", fmt_f64(s.tau), fmt_f64(s.p_dd), s.shots);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut params: Vec<Option<String>> = vec![None; PARAM_KEYS.len()];
        let mut samples = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| Error::RecordFormat { line: line_no, message };
            let line = raw.trim();
            if line.is_empty() || line == COLUMNS {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let Some((key, value)) = rest.split_once('=') else {
                    return Err(err(format!("header line without '=': {line}")));
                };
                let (key, value) = (key.trim(), value.trim());
                match PARAM_KEYS.iter().position(|&k| k == key) {
                    Some(slot) => {
                        if params[slot].is_some() {
                            return Err(err(format!("duplicate header key `{key}`")));
                        }
                        params[slot] = Some(value.to_string());
                    }
                    None => metadata.push((key.to_string(), value.to_string())),
                }
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(err(format!("expected 3 columns, found {}", cols.len())));
            }
            let tau: f64 = cols[0].parse().map_err(|e| err(format!("tau: {e}")))?;
            let p_dd: f64 = cols[1].parse().map_err(|e| err(format!("p_dd: {e}")))?;
            let shots: u64 = cols[2].parse().map_err(|e| err(format!("shots: {e}")))?;
            if !(0.0..=1.0).contains(&p_dd) {
                return Err(err(format!("p_dd = {p_dd} outside [0, 1]")));
            }
            if let Some(prev) = samples.last().map(|s: &Sample| s.tau) {
                if !(tau > prev) {
                    return Err(err(format!("tau values must increase strictly ({prev} then {tau})")));
                }
            }
            samples.push(Sample { tau, p_dd, shots });
        }

        let get = |key: &str| -> Result<&str> {
            let slot = PARAM_KEYS.iter().position(|&k| k == key).expect("known key");
            params[slot]
                .as_deref()
                .ok_or_else(|| Error::RecordFormat { line: 0, message: format!("missing header key `{key}`") })
        };
        let float = |key: &str| -> Result<f64> {
            get(key)?
                .parse()
                .map_err(|e| Error::RecordFormat { line: 0, message: format!("header `{key}`: {e}") })
        };
        let int = |key: &str| -> Result<u64> {
            get(key)?
                .parse()
                .map_err(|e| Error::RecordFormat { line: 0, message: format!("header `{key}`: {e}") })
        };
        let modes = ModeParams { eta: float("eta")?, eta_r: float("eta_r")?, nu: float("nu")? };
        let params = BichromaticParams {
            k: int("k")? as usize,
            k_prime: int("k_prime")? as usize,
            delta: float("delta")?,
            delta_prime: float("delta_prime")?,
            omega: C64::new(float("omega_re")?, float("omega_im")?),
            phi: float("phi")?,
            phi0: float("phi0")?,
            modes,
        };
        Ok(SignalRecord { samples, params, seed: int("seed")?, metadata })
    }
}
