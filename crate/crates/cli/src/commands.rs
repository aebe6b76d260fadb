//! Subcommand implementations.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use ramsey_core::dynamics::{run_first_pulse, run_ramsey_with, StepperOptions};
use ramsey_core::fringe::{fit_fringe, sweep_delay_points, sweep_detuning as detuning_table, Channel, FringeFit, FringeSeries};
use ramsey_core::spectrum::{envelope_spectrum, recoil_report, KGrid, MomentumSpectrum, RecoilReport};
use ramsey_core::validation::run_invariant_suite;
use ramsey_core::{FieldState, SimError};
use serde::Serialize;
use serde_json::json;

use crate::config::{resolve, Resolved};
use crate::formats::{self, ArtifactRef, SpectrumSidecar};
use crate::manifest::RunManifest;
use crate::{CliError, FitArgs, OutArgs, SpectrumArgs, ValidateArgs};

/// Collects files written into one output directory.
struct Artifacts<'a> {
    dir: &'a Path,
    manifest: RunManifest,
}

impl<'a> Artifacts<'a> {
    fn new(dir: &'a Path, command: &str, resolved: &Resolved) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir,
            manifest: RunManifest::new(command, &resolved.config),
        })
    }

    fn provenance(&self, rel: &str) -> ArtifactRef {
        self.manifest.artifact_ref(rel.matches('/').count())
    }

    fn write(
        &mut self,
        rel: &str,
        body: impl FnOnce(&mut BufWriter<File>, &ArtifactRef) -> std::io::Result<()>,
    ) -> Result<(), CliError> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let provenance = self.provenance(rel);
        let mut w = BufWriter::new(File::create(&path)?);
        body(&mut w, &provenance)?;
        w.flush()?;
        self.manifest.outputs.push(rel.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, value: impl FnOnce(&ArtifactRef) -> T) -> Result<(), CliError> {
        self.write(rel, |w, p| {
            serde_json::to_writer_pretty(&mut *w, &value(p)).map_err(std::io::Error::other)?;
            writeln!(w)
        })
    }

    fn finish(self) -> Result<(), CliError> {
        self.manifest.write(self.dir)?;
        Ok(())
    }
}

fn pool(resolved: &Resolved) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = resolved.workers {
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))
}

/// Spectra of every ground cloud with a nonzero envelope, in ascending `j`.
fn spectra_of(state: &FieldState, window: &KGrid) -> Result<Vec<MomentumSpectrum>, SimError> {
    let modes = state.mode_set().ground_modes();
    let all: Vec<Result<MomentumSpectrum, SimError>> = modes
        .par_iter()
        .map(|&j| envelope_spectrum(state, j, window))
        .collect();
    let mut out = Vec::with_capacity(all.len());
    for s in all {
        match s {
            Ok(s) => out.push(s),
            Err(SimError::UndefinedDistribution { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct RecoilSection {
    t: f64,
    reports: Vec<RecoilReport>,
}

fn recoil_section(state: &FieldState, spectra: &[MomentumSpectrum], k0l: f64) -> RecoilSection {
    RecoilSection {
        t: state.t,
        reports: spectra
            .iter()
            .filter(|s| s.mode.0 != 0)
            .filter_map(|s| recoil_report(s, k0l).ok())
            .collect(),
    }
}

fn write_spectrum_pair(
    out: &mut Artifacts<'_>,
    stem: &str,
    state: &FieldState,
    spectra: &[MomentumSpectrum],
) -> Result<(), CliError> {
    let csv = format!("{stem}.csv");
    out.write(&csv, |w, p| formats::write_spectrum_csv(w, p, spectra))?;
    out.write_json(&format!("{stem}.json"), |p| SpectrumSidecar::new(p.clone(), &csv, state.t, spectra))
}

pub fn run(args: &OutArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.overrides)?;
    let c = &resolved.config;
    let traj = run_ramsey_with(&c.params, &c.schedule, StepperOptions::default(), c.record_every)?;
    let mut out = Artifacts::new(&args.out, "run", &resolved)?;

    out.write("trajectory.csv", |w, p| {
        formats::write_trajectory_csv(w, p, &traj.populations, &traj.losses)
    })?;
    for (name, state) in ["state_pulse1.bin", "state_delay.bin", "state_final.bin"]
        .iter()
        .zip(&traj.snapshots)
    {
        out.write(name, |w, p| formats::write_state(w, p, state))?;
    }

    let first = traj.after_first_pulse();
    let last = traj.final_state();
    let first_spectra = spectra_of(first, &c.spectrum)?;
    let final_spectra = spectra_of(last, &c.spectrum)?;
    write_spectrum_pair(&mut out, "spectrum_final", last, &final_spectra)?;
    let k0l = c.params.k0l;
    out.write_json("recoil.json", |p| {
        json!({
            "schema": formats::RECOIL_SCHEMA,
            "manifest": p.manifest,
            "parameter_hash": p.parameter_hash,
            "k0l": k0l,
            "after_first_pulse": recoil_section(first, &first_spectra, k0l),
            "final": recoil_section(last, &final_spectra, k0l),
        })
    })?;

    let s0 = traj.final_populations().s0();
    out.finish()?;
    println!("S0(tau + dt_pulse) = {s0:e}");
    println!("artifacts in {}", args.out.display());
    Ok(())
}

#[derive(Debug, Serialize)]
struct FitOutcome {
    channel: Channel,
    fit: Option<FringeFit>,
    error: Option<String>,
}

fn fit_channels(series: &FringeSeries, omega2: f64) -> Vec<FitOutcome> {
    [Channel::S0, Channel::S2]
        .into_iter()
        .map(|channel| match fit_fringe(series, channel, omega2) {
            Ok(fit) => FitOutcome { channel, fit: Some(fit), error: None },
            Err(e) => FitOutcome { channel, fit: None, error: Some(e.to_string()) },
        })
        .collect()
}

pub fn sweep_delay(args: &OutArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.overrides)?;
    let c = &resolved.config;
    let taus = c.delay_sweep.taus();
    let points = pool(&resolved)?.install(|| {
        sweep_delay_points(&c.params, c.params.delta, &taus, c.schedule.dt_pulse, StepperOptions::default())
    })?;
    let mut out = Artifacts::new(&args.out, "sweep-delay", &resolved)?;

    let mut series = FringeSeries {
        delta: c.params.delta,
        dt_pulse: c.schedule.dt_pulse,
        tau_values: Vec::new(),
        s0: Vec::new(),
        s2: Vec::new(),
        s_minus2: Vec::new(),
    };
    let mut failed = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let rel = format!("points/point-{i:03}.json");
        out.write_json(&rel, |p| {
            let (status, result) = match &point.outcome {
                Ok(v) => ("ok", json!(v)),
                Err(e) => ("failed", json!(e.to_string())),
            };
            json!({
                "schema": formats::POINT_SCHEMA,
                "manifest": p.manifest,
                "parameter_hash": p.parameter_hash,
                "index": i,
                "axis": "tau",
                "tau": point.tau,
                "status": status,
                "result": result,
            })
        })?;
        match &point.outcome {
            Ok(v) => {
                series.tau_values.push(point.tau);
                series.s0.push(v.s0);
                series.s2.push(v.s2);
                series.s_minus2.push(v.s_minus2);
            }
            Err(e) => failed.push((point.tau, e.clone())),
        }
    }
    out.write("fringe.csv", |w, p| formats::write_fringe_csv(w, p, &series))?;
    let fits = fit_channels(&series, c.params.omega2());
    out.write_json("fit.json", |p| {
        json!({
            "schema": formats::FIT_SCHEMA,
            "manifest": p.manifest,
            "parameter_hash": p.parameter_hash,
            "data": "fringe.csv",
            "omega2": c.params.omega2(),
            "fits": fits,
        })
    })?;
    write_failure_report(&mut out, "tau", &failed)?;
    out.finish()?;

    for f in &fits {
        match (&f.fit, &f.error) {
            (Some(fit), _) => println!("{:?}: omega_ratio = {:.6} (rms {:.3e})", f.channel, fit.omega_ratio, fit.residual_rms),
            (None, Some(e)) => println!("{:?}: no fit ({e})", f.channel),
            _ => {}
        }
    }
    partial_failure(&failed, points.len())
}

fn write_failure_report(out: &mut Artifacts<'_>, axis: &str, failed: &[(f64, SimError)]) -> Result<(), CliError> {
    let entries: Vec<_> = failed
        .iter()
        .map(|(v, e)| json!({ axis: v, "error": e.to_string(), "divergence": e.is_divergence() }))
        .collect();
    out.write_json("sweep_report.json", |p| {
        json!({
            "schema": "ramsey-sweep-report/1",
            "manifest": p.manifest,
            "parameter_hash": p.parameter_hash,
            "failed": entries,
        })
    })
}

fn partial_failure<E: std::fmt::Display>(failed: &[(f64, E)], total: usize) -> Result<(), CliError> {
    if failed.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = failed.iter().map(|(v, e)| format!("{v:e} ({e})")).collect();
    Err(CliError::PartialSweep(format!(
        "{} of {total} points failed: {}",
        failed.len(),
        list.join("; ")
    )))
}

pub fn sweep_detuning(args: &OutArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.overrides)?;
    let c = &resolved.config;
    let deltas = c.detuning_sweep.deltas();
    let taus = if c.detuning_sweep.fringes { c.delay_sweep.taus() } else { Vec::new() };
    let table = pool(&resolved)?
        .install(|| detuning_table(&c.params, &deltas, &taus, c.schedule.dt_pulse, &c.spectrum))?;
    let mut out = Artifacts::new(&args.out, "sweep-detuning", &resolved)?;

    out.write("dispersion.csv", |w, p| formats::write_dispersion_csv(w, p, &table.rows))?;
    let mut failed = Vec::new();
    for (i, row) in table.rows.iter().enumerate() {
        let fringe_file = row.series.as_ref().map(|_| format!("fringes/fringe-{i:03}.csv"));
        if let (Some(rel), Some(series)) = (&fringe_file, &row.series) {
            out.write(rel, |w, p| formats::write_fringe_csv(w, p, series))?;
        }
        out.write_json(&format!("points/delta-{i:03}.json"), |p| {
            json!({
                "schema": formats::POINT_SCHEMA,
                "manifest": p.manifest,
                "parameter_hash": p.parameter_hash,
                "index": i,
                "axis": "delta",
                "delta": row.delta,
                "status": if row.errors.is_empty() { "ok" } else { "failed" },
                "omega_ratio": row.omega_ratio,
                "fit_rms": row.fit_rms,
                "kappa2_over_k0": row.kappa2_over_k0,
                "kappa_minus2_over_k0": row.kappa_minus2_over_k0,
                "std2_over_k0": row.std2_over_k0,
                "delta_omega_ratio_mean": row.delta_omega_ratio_mean,
                "delta_omega_ratio_fringe": row.delta_omega_ratio_fringe,
                "fringe_file": fringe_file.as_ref().map(|f| format!("../{f}")),
                "errors": row.errors,
            })
        })?;
        if !row.errors.is_empty() {
            failed.push((row.delta, row.errors.join("; ")));
        }
    }
    let entries: Vec<_> = failed.iter().map(|(d, e)| json!({ "delta": d, "error": e })).collect();
    out.write_json("sweep_report.json", |p| {
        json!({
            "schema": "ramsey-sweep-report/1",
            "manifest": p.manifest,
            "parameter_hash": p.parameter_hash,
            "failed": entries,
        })
    })?;
    out.finish()?;
    println!("{} detunings written to {}", table.rows.len(), args.out.display());
    partial_failure(&failed, table.rows.len())
}

pub fn spectrum(args: &SpectrumArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.common.overrides)?;
    let c = &resolved.config;
    let state = match &args.snapshot {
        Some(path) => {
            let mut r = BufReader::new(File::open(path)?);
            formats::read_state(&mut r)?.0
        }
        None => run_first_pulse(&c.params, c.schedule.dt_pulse)?,
    };
    let spectra = spectra_of(&state, &c.spectrum)?;
    if spectra.is_empty() {
        return Err(SimError::UndefinedDistribution { mode: 0 }.into());
    }
    let mut out = Artifacts::new(&args.common.out, "spectrum", &resolved)?;
    if let Some(path) = &args.snapshot {
        out.manifest.inputs.push(path.display().to_string());
    }
    write_spectrum_pair(&mut out, "spectrum", &state, &spectra)?;
    let k0l = c.params.k0l;
    out.write_json("recoil.json", |p| {
        json!({
            "schema": formats::RECOIL_SCHEMA,
            "manifest": p.manifest,
            "parameter_hash": p.parameter_hash,
            "k0l": k0l,
            "state": recoil_section(&state, &spectra, k0l),
        })
    })?;
    out.finish()?;
    for r in recoil_section(&state, &spectra, k0l).reports {
        if r.mode.0.abs() == 2 {
            println!(
                "mode {:>2}: delta_k/k0 = {:+.5}  delta_omega/omega = {:+.5}",
                r.mode, r.delta_k_over_k0, r.delta_omega_ratio
            );
        }
    }
    Ok(())
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.common.overrides)?;
    let channel: Channel = args.channel.parse().map_err(CliError::Config)?;
    let series = formats::read_fringe_csv(BufReader::new(File::open(&args.input)?))?;
    let omega2 = resolved.config.params.omega2();
    let fit = fit_fringe(&series, channel, omega2).map_err(|e| CliError::Runtime(format!("fit failed: {e}")))?;

    let mut out = Artifacts::new(&args.common.out, "fit", &resolved)?;
    out.manifest.inputs.push(args.input.display().to_string());
    let input = args.input.display().to_string();
    out.write_json("fit.json", |p| {
        json!({
            "schema": formats::FIT_SCHEMA,
            "manifest": p.manifest,
            "parameter_hash": p.parameter_hash,
            "data": input,
            "omega2": omega2,
            "fits": [FitOutcome { channel, fit: Some(fit.clone()), error: None }],
        })
    })?;
    out.finish()?;
    println!(
        "{channel:?}: omega_rec = {:e}, omega_ratio = {:.6}, amplitude = {:.4e}, rms = {:.3e}",
        fit.omega_rec, fit.omega_ratio, fit.amplitude, fit.residual_rms
    );
    Ok(())
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let resolved = resolve(&args.overrides)?;
    let checks = run_invariant_suite(&resolved.config.params, StepperOptions::default());
    let mut failed = Vec::new();
    for c in &checks {
        println!(
            "{} {:<32} measured = {:.3e}  tolerance = {:.1e}  ({})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.measured,
            c.tolerance,
            c.detail
        );
        if !c.passed {
            failed.push(c.name.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}
