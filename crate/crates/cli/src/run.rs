//! Mode dispatch. Every mode produces its artifacts in memory first so the
//! same code path serves the binary, the acceptance suite and the
//! determinism check.

use std::fmt::Write as _;

use ionbell_core::bellgen::{make_phi, make_psi, thermal_bell_scan, BellOutput, PulseKind};
use ionbell_core::dynamics::{
    build_carrier_h, build_effective_h, evolve_midpoint, propagate_const, resonance_guard, BichromaticHamiltonian,
    RabiSpectrum,
};
use ionbell_core::linalg::eigh;
use ionbell_core::tomography::{
    condition_report, default_taus, displace_vib, fmt_f64, invert_populations, protocol_run, synth_signal,
    ProtocolSettings, SignalRecord,
};
use ionbell_core::fockspace::make_vib_state;
use ionbell_core::{CVector, Diagnostic, Electronic, Error, JointState, StateSpec, C64, VERSION};

use crate::config::{EvolveEngine, RunConfig, RunMode};
use crate::validate;
use crate::CliError;

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    /// `key = value` lines for the terminal.
    pub summary: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
}

impl RunOutput {
    fn artifact(&mut self, name: &str, contents: String) {
        self.artifacts.push(Artifact { name: name.to_string(), contents });
    }

    fn summarize(&mut self, key: &str, value: impl std::fmt::Display) {
        self.summary.push(format!("{key} = {value}"));
    }

    /// Writes `summary.txt` from the collected summary lines.
    fn finish(&mut self, header: &str) {
        let mut text = header.to_string();
        for line in &self.summary {
            text.push_str(line);
            text.push('\n');
        }
        self.artifact("summary.txt", text);
    }
}

/// Comment header shared by every artifact: version, mode and the resolved
/// configuration.
pub fn header(cfg: &RunConfig) -> String {
    let mut out = format!("# ionbell_version = {VERSION}\n");
    for (k, v) in cfg.echo() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    out
}

fn header_pairs(cfg: &RunConfig) -> Vec<(String, String)> {
    let mut out = vec![("ionbell_version".to_string(), VERSION.to_string())];
    out.extend(cfg.echo());
    out
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput, CliError> {
    let head = header(cfg);
    let mut out = RunOutput::default();
    match cfg.mode {
        RunMode::Spectrum => spectrum(cfg, &head, &mut out)?,
        RunMode::Evolve => evolve(cfg, &head, &mut out)?,
        RunMode::BellPhi | RunMode::BellPsi => bell(cfg, &head, &mut out)?,
        RunMode::TomoSynth => tomo_synth(cfg, &mut out)?,
        RunMode::TomoInvert => tomo_invert(cfg, &head, &mut out)?,
        RunMode::Wigner => wigner(cfg, &head, &mut out)?,
        RunMode::Validate => {
            let checks = validate::run_all(cfg.seed);
            let mut text = head.clone();
            text.push_str("id,name,status,detail\n");
            for c in &checks {
                let _ = writeln!(text, "{},{},{},\"{}\"", c.id, c.name, c.status(), c.detail.replace('"', "'"));
                out.summary.push(c.line());
            }
            out.artifact("validate.csv", text);
            let failed = checks.iter().filter(|c| !c.passed).count();
            out.summarize("failed", failed);
            out.finish(&head);
            if failed > 0 {
                return Err(CliError::Validation { failed, output: Box::new(out) });
            }
            return Ok(out);
        }
    }
    out.finish(&head);
    Ok(out)
}

fn spectrum(cfg: &RunConfig, head: &str, out: &mut RunOutput) -> Result<(), CliError> {
    let p = cfg.drive.expect("validated");
    let (n_c_max, n_r_max) = cfg.spectrum.expect("validated");
    let spec = RabiSpectrum::compute(&p, n_c_max, n_r_max)?;
    out.diagnostics.extend(resonance_guard(&p));
    let mut text = head.to_string();
    text.push_str("n_c,n_r,rabi,abs_rabi\n");
    for ((n_c, n_r), v) in spec.iter() {
        let _ = writeln!(text, "{n_c},{n_r},{},{}", fmt_f64(v.re), fmt_f64(v.norm()));
    }
    out.artifact("spectrum.csv", text);
    out.summarize("rows", spec.len());
    if let Some((gap, a, b)) = spec.min_relative_gap() {
        out.summarize("min_relative_gap", fmt_f64(gap));
        out.summarize("closest_pair", format!("({},{}) ({},{})", a.0, a.1, b.0, b.1));
    }
    out.summarize("single_sign", spec.single_sign());
    Ok(())
}

/// Pure components `(weight, vib vector)` of the configured vibrational state.
fn vib_components(cfg: &RunConfig) -> Result<Vec<(f64, CVector)>, CliError> {
    let config = cfg.hilbert.expect("validated");
    let rho = make_vib_state(cfg.state.as_ref().expect("validated"), config)?;
    let (vals, vecs) = eigh(&rho.matrix);
    let mut comps: Vec<(f64, CVector)> = vals
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 1e-14)
        .map(|(i, &w)| (w, vecs.column(i).into_owned()))
        .collect();
    // Independent of eigensolver ordering.
    comps.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(comps)
}

fn exact_trajectory(
    ham: &BichromaticHamiltonian,
    psi0: &JointState,
    times: &[f64],
    dt_max: f64,
    tolerance: f64,
) -> Result<Vec<JointState>, Error> {
    let support: Vec<usize> = (0..ham.dim).filter(|&i| psi0.amplitudes[i] != C64::new(0.0, 0.0)).collect();
    let reach = ham.reachable(&support);
    let sub = ham.restrict(&reach);
    let mut local = CVector::from_iterator(reach.len(), reach.iter().map(|&i| psi0.amplitudes[i]));
    let mut states = Vec::with_capacity(times.len());
    let mut t_prev = 0.0;
    for &t in times {
        let dt = t - t_prev;
        if dt > 0.0 {
            let coarse = evolve_midpoint(|s| sub.at(t_prev + s), &local, dt, dt_max)?;
            let fine = evolve_midpoint(|s| sub.at(t_prev + s), &local, dt, dt_max / 2.0)?;
            let change = (&coarse - &fine).norm();
            if change > tolerance {
                return Err(Error::NonConvergence { change, tolerance });
            }
            local = fine;
        }
        let mut full = JointState::zeros(psi0.config);
        for (slot, &i) in reach.iter().enumerate() {
            full.amplitudes[i] = local[slot];
        }
        states.push(full);
        t_prev = t;
    }
    Ok(states)
}

fn evolve(cfg: &RunConfig, head: &str, out: &mut RunOutput) -> Result<(), CliError> {
    let config = cfg.hilbert.expect("validated");
    let settings = cfg.evolve.as_ref().expect("validated");
    let n = settings.samples;
    let times: Vec<f64> = (0..n).map(|i| settings.t_end * i as f64 / (n - 1) as f64).collect();
    let comps = vib_components(cfg)?;
    let p = cfg.drive.expect("validated");

    let mut pops = vec![[0.0f64; 5]; n];
    for (weight, vib) in &comps {
        let psi0 = JointState::with_vib(config, settings.electronic, vib)?;
        let states: Vec<JointState> = match settings.engine {
            EvolveEngine::Effective => {
                let h = build_effective_h(&p, config)?;
                out.diagnostics.extend(h.diagnostics);
                times.iter().map(|&t| propagate_const(&h.value, &psi0, t)).collect::<Result<_, _>>()?
            }
            EvolveEngine::Carrier => {
                let h = build_carrier_h(cfg.carrier.as_ref().expect("validated"), config);
                times.iter().map(|&t| propagate_const(&h, &psi0, t)).collect::<Result<_, _>>()?
            }
            EvolveEngine::Exact { dt_max, tolerance } => {
                let ham = BichromaticHamiltonian::new(&p, config);
                exact_trajectory(&ham, &psi0, &times, dt_max, tolerance)?
            }
        };
        for (row, s) in pops.iter_mut().zip(&states) {
            for (slot, e) in Electronic::ALL.iter().enumerate() {
                row[slot] += weight * s.electronic_population(*e);
            }
            row[4] += weight * s.norm().powi(2);
        }
    }
    if settings.engine != EvolveEngine::Carrier {
        out.diagnostics.extend(resonance_guard(&p));
    }
    out.diagnostics.dedup();

    let mut text = head.to_string();
    text.push_str("t,p_dd,p_du,p_ud,p_uu,norm\n");
    for (t, row) in times.iter().zip(&pops) {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{}",
            fmt_f64(*t),
            fmt_f64(row[0]),
            fmt_f64(row[1]),
            fmt_f64(row[2]),
            fmt_f64(row[3]),
            fmt_f64(row[4])
        );
    }
    out.artifact("evolve.csv", text);
    out.summarize("samples", n);
    out.summarize("components", comps.len());
    let last = pops.last().expect("at least two samples");
    out.summarize("final_p_dd", fmt_f64(last[0]));
    out.summarize("final_p_uu", fmt_f64(last[3]));
    Ok(())
}

fn write_bell(out: &mut RunOutput, head: &str, bell: &BellOutput) {
    let mut text = head.to_string();
    text.push_str("electronic,n_c,n_r,re,im\n");
    let config = bell.state.config;
    for (i, a) in bell.state.amplitudes.iter().enumerate() {
        if a.norm() > 0.0 {
            let (e, n_c, n_r) = config.decompose(i);
            let _ = writeln!(text, "{},{n_c},{n_r},{},{}", e.label(), fmt_f64(a.re), fmt_f64(a.im));
        }
    }
    out.artifact("bell_state.csv", text);

    let mut seq = head.to_string();
    seq.push_str("index,kind,duration,global_phase,omega_re,omega_im,phase,phase0,k,delta\n");
    for (i, pulse) in bell.sequence.pulses().iter().enumerate() {
        let (kind, omega, phase, phase0, k, delta) = match pulse.kind {
            PulseKind::Dispersive(p) => ("dispersive", p.omega, p.phi, p.phi0, p.k, p.delta),
            PulseKind::Carrier(c) => ("carrier", c.omega, c.varphi, c.varphi0, 0, 0.0),
        };
        let _ = writeln!(
            seq,
            "{i},{kind},{},{},{},{},{},{},{k},{}",
            fmt_f64(pulse.duration),
            fmt_f64(pulse.global_phase),
            fmt_f64(omega.re),
            fmt_f64(omega.im),
            fmt_f64(phase),
            fmt_f64(phase0),
            fmt_f64(delta)
        );
    }
    out.artifact("sequence.csv", seq);
    out.summarize("target", bell.target.label());
    out.summarize("fidelity", fmt_f64(bell.fidelity));
    out.summarize("duration", fmt_f64(bell.sequence.total_duration()));
    out.diagnostics.extend(bell.diagnostics.iter().cloned());
}

fn bell(cfg: &RunConfig, head: &str, out: &mut RunOutput) -> Result<(), CliError> {
    let p = cfg.drive.expect("validated");
    let settings = cfg.bell.as_ref().expect("validated");
    out.diagnostics.extend(resonance_guard(&p));
    match (cfg.mode, cfg.state.as_ref().expect("validated")) {
        (RunMode::BellPhi, StateSpec::Thermal { nbar_c, nbar_r }) => {
            let scan = thermal_bell_scan(*nbar_c, *nbar_r, &p, settings.t_pulse)?;
            out.summarize("target", "Phi+");
            out.summarize("fidelity", fmt_f64(scan.value));
            out.diagnostics.extend(scan.diagnostics);
        }
        (RunMode::BellPhi, StateSpec::Fock { n_c, n_r }) => {
            let config = cfg.hilbert.expect("validated");
            let res = make_phi(settings.sign, &p, config, *n_c, *n_r, settings.engine)?;
            write_bell(out, head, &res);
        }
        (RunMode::BellPsi, StateSpec::Fock { n_c, n_r }) => {
            let config = cfg.hilbert.expect("validated");
            let pc = cfg.carrier.expect("validated");
            let res = make_psi(settings.start, &p, &pc, config, *n_c, *n_r, settings.engine)?;
            write_bell(out, head, &res);
        }
        _ => unreachable!("state kind checked during config validation"),
    }
    out.diagnostics.dedup();
    Ok(())
}

fn taus_for(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let t = cfg.tomography.as_ref().expect("validated");
    match &t.taus {
        Some(taus) => Ok(taus.clone()),
        None => Ok(default_taus(
            cfg.drive.as_ref().expect("validated"),
            t.n_fit_c.expect("validated"),
            t.n_fit_r.expect("validated"),
            t.tau_count,
        )?),
    }
}

fn condition_diagnostics(cfg: &RunConfig, p: &ionbell_core::dynamics::BichromaticParams, taus: &[f64], out: &mut RunOutput) -> Result<(), CliError> {
    let t = cfg.tomography.as_ref().expect("validated");
    if let (Some(fc), Some(fr)) = (t.n_fit_c, t.n_fit_r) {
        let report = condition_report(p, fc, fr, taus)?;
        out.summarize("condition_number", fmt_f64(report.value.condition_number));
        out.summarize("min_relative_gap", fmt_f64(report.value.min_relative_gap));
        out.diagnostics.extend(report.diagnostics);
    }
    Ok(())
}

fn tomo_synth(cfg: &RunConfig, out: &mut RunOutput) -> Result<(), CliError> {
    let t = cfg.tomography.as_ref().expect("validated");
    let p = cfg.drive.expect("validated");
    let rho = make_vib_state(cfg.state.as_ref().expect("validated"), cfg.hilbert.expect("validated"))?;
    let displaced = displace_vib(&rho, t.alpha.0, t.alpha.1);
    out.diagnostics.extend(displaced.diagnostics);
    let taus = taus_for(cfg)?;
    condition_diagnostics(cfg, &p, &taus, out)?;
    let mut record = synth_signal(&displaced.value, &taus, &p, t.shots, cfg.seed)?;
    record.metadata = header_pairs(cfg);
    out.artifact("signal.csv", record.to_text());
    out.summarize("samples", record.samples.len());
    out.summarize("shots", t.shots);
    Ok(())
}

fn tomo_invert(cfg: &RunConfig, head: &str, out: &mut RunOutput) -> Result<(), CliError> {
    let t = cfg.tomography.as_ref().expect("validated");
    let (_, path) = t.record.as_ref().expect("validated");
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let record = SignalRecord::from_text(&text).map_err(|e| CliError::Input { path: path.clone(), source: e })?;
    let (fc, fr) = (t.n_fit_c.expect("validated"), t.n_fit_r.expect("validated"));
    let taus: Vec<f64> = record.samples.iter().map(|s| s.tau).collect();
    let report = condition_report(&record.params, fc, fr, &taus)?;
    out.diagnostics.extend(report.diagnostics);
    let est = invert_populations(&record, fc, fr, t.ridge)?;

    let mut text = head.to_string();
    let _ = writeln!(text, "# residual_norm = {}", fmt_f64(est.residual_norm));
    let _ = writeln!(text, "# condition_number = {}", fmt_f64(est.condition_number));
    text.push_str("n_c,n_r,population\n");
    for ((n_c, n_r), pi) in est.iter() {
        let _ = writeln!(text, "{n_c},{n_r},{}", fmt_f64(pi));
    }
    out.artifact("populations.csv", text);
    out.summarize("unknowns", est.pi.len());
    out.summarize("population_sum", fmt_f64(est.sum()));
    out.summarize("residual_norm", fmt_f64(est.residual_norm));
    out.summarize("condition_number", fmt_f64(est.condition_number));
    Ok(())
}

fn wigner(cfg: &RunConfig, head: &str, out: &mut RunOutput) -> Result<(), CliError> {
    let t = cfg.tomography.as_ref().expect("validated");
    let p = cfg.drive.expect("validated");
    let rho = make_vib_state(cfg.state.as_ref().expect("validated"), cfg.hilbert.expect("validated"))?;
    let taus = taus_for(cfg)?;
    condition_diagnostics(cfg, &p, &taus, out)?;
    let settings = ProtocolSettings {
        taus,
        shots: t.shots,
        seed: cfg.seed,
        n_fit_c: t.n_fit_c.expect("validated"),
        n_fit_r: t.n_fit_r.expect("validated"),
        ridge: t.ridge,
    };
    let points = protocol_run(&rho, &t.alphas, &p, &settings)?;

    let columns = "re_ac,im_ac,re_ar,im_ar,w\n";
    let mut recon = head.to_string();
    let mut direct = head.to_string();
    recon.push_str(columns);
    direct.push_str(columns);
    let mut worst: f64 = 0.0;
    for pt in &points {
        let a = pt.point;
        let prefix = format!(
            "{},{},{},{}",
            fmt_f64(a.alpha_c.re),
            fmt_f64(a.alpha_c.im),
            fmt_f64(a.alpha_r.re),
            fmt_f64(a.alpha_r.im)
        );
        let _ = writeln!(recon, "{prefix},{}", fmt_f64(a.w));
        let _ = writeln!(direct, "{prefix},{}", fmt_f64(pt.exact));
        worst = worst.max((a.w - pt.exact).abs());
        for d in &pt.diagnostics {
            if !out.diagnostics.contains(d) {
                out.diagnostics.push(d.clone());
            }
        }
    }
    out.artifact("wigner.csv", recon);
    out.artifact("wigner_direct.csv", direct);
    out.summarize("points", points.len());
    out.summarize("max_abs_error", fmt_f64(worst));
    Ok(())
}
