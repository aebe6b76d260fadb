//! On-disk formats. Every text artifact starts with one comment line
//!
//! ```text
//! # schema=<name>/<version> manifest=<path> parameter_hash=<digest> [key=value ...]
//! ```
//!
//! followed by a CSV header row. Numbers use the shortest exponent form that
//! round-trips (`{:e}`), so reruns of the same configuration are
//! byte-identical.
//!
//! # State snapshot (`ramsey-state/1`)
//!
//! Little-endian binary:
//!
//! | offset | type | content |
//! |---|---|---|
//! | 0 | `[u8; 8]` | magic `RAMSEYST` |
//! | 8 | `u32` | layout version, `1` |
//! | 12 | `u32` | maximum order `M` |
//! | 16 | `u64` | grid points `nx` |
//! | 24 | `f64` | time `t` |
//! | 32 | `u32` + bytes | manifest path, UTF-8 |
//! | .. | `u32` + bytes | parameter hash, UTF-8 |
//! | .. | `(M+1)·nx × (f64, f64)` | ground amplitudes `a_j(x_i)` as (re, im), rows `j = -M, -M+2, …, M` |
//! | .. | `(M+2)·nx × (f64, f64)` | excited amplitudes `b_j(x_i)`, rows `j = -M-1, …, M+1` |
//!
//! Grid point `i` sits at `x_i = i / (nx - 1)`.

use std::io::{self, BufRead, Read, Write};

use num_complex::Complex64;
use ramsey_core::dynamics::Losses;
use ramsey_core::fringe::{DispersionRow, FringeSeries};
use ramsey_core::{FieldState, ModeIndex, ModeSet, MomentumSpectrum, PopulationRecord};
use serde::{Deserialize, Serialize};

pub const TRAJECTORY_SCHEMA: &str = "ramsey-trajectory/1";
pub const STATE_SCHEMA: &str = "ramsey-state/1";
pub const SPECTRUM_SCHEMA: &str = "ramsey-spectrum/1";
pub const SPECTRUM_SIDECAR_SCHEMA: &str = "ramsey-spectrum-summary/1";
pub const RECOIL_SCHEMA: &str = "ramsey-recoil/1";
pub const FRINGE_SCHEMA: &str = "ramsey-fringe/1";
pub const FIT_SCHEMA: &str = "ramsey-fit/1";
pub const DISPERSION_SCHEMA: &str = "ramsey-dispersion/1";
pub const POINT_SCHEMA: &str = "ramsey-sweep-point/1";

const STATE_MAGIC: &[u8; 8] = b"RAMSEYST";
const STATE_VERSION: u32 = 1;

/// Provenance carried by every artifact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRef {
    pub manifest: String,
    pub parameter_hash: String,
}

fn header_line(w: &mut impl Write, schema: &str, r: &ArtifactRef, extra: &[(&str, String)]) -> io::Result<()> {
    write!(w, "# schema={schema} manifest={} parameter_hash={}", r.manifest, r.parameter_hash)?;
    for (k, v) in extra {
        write!(w, " {k}={v}")?;
    }
    writeln!(w)
}

/// Ground modes in column order `0, 2, -2, 4, -4, …`.
pub fn ground_column_order(set: ModeSet) -> Vec<ModeIndex> {
    let m = set.max_order() as i32;
    let mut out = vec![ModeIndex(0)];
    for j in (2..=m).step_by(2) {
        out.push(ModeIndex(j));
        out.push(ModeIndex(-j));
    }
    out
}

/// Excited modes in column order `1, -1, 3, -3, …`.
pub fn excited_column_order(set: ModeSet) -> Vec<ModeIndex> {
    let m = set.max_order() as i32 + 1;
    let mut out = Vec::new();
    for j in (1..=m).step_by(2) {
        out.push(ModeIndex(j));
        out.push(ModeIndex(-j));
    }
    out
}

/// Columns `t, S_0, S_2, S_-2, …, P_1, P_-1, …, N, loss_spontaneous, loss_boundary`.
pub fn write_trajectory_csv(
    w: &mut impl Write,
    r: &ArtifactRef,
    records: &[PopulationRecord],
    losses: &[Losses],
) -> io::Result<()> {
    header_line(w, TRAJECTORY_SCHEMA, r, &[])?;
    let Some(first) = records.first() else {
        return writeln!(w, "t,N,loss_spontaneous,loss_boundary");
    };
    let ground = ground_column_order(first.mode_set);
    let excited = excited_column_order(first.mode_set);
    let mut names = vec!["t".to_string()];
    names.extend(ground.iter().map(|j| format!("S_{j}")));
    names.extend(excited.iter().map(|j| format!("P_{j}")));
    names.extend(["N", "loss_spontaneous", "loss_boundary"].map(String::from));
    writeln!(w, "{}", names.join(","))?;
    for (rec, loss) in records.iter().zip(losses) {
        write!(w, "{:e}", rec.t)?;
        for j in ground.iter().chain(&excited) {
            write!(w, ",{:e}", rec.get(*j).unwrap_or(0.0))?;
        }
        writeln!(w, ",{:e},{:e},{:e}", rec.total_norm, loss.spontaneous, loss.boundary)?;
    }
    Ok(())
}

pub fn write_state(w: &mut impl Write, r: &ArtifactRef, state: &FieldState) -> io::Result<()> {
    w.write_all(STATE_MAGIC)?;
    w.write_all(&STATE_VERSION.to_le_bytes())?;
    w.write_all(&state.mode_set().max_order().to_le_bytes())?;
    w.write_all(&(state.nx() as u64).to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    for s in [&r.manifest, &r.parameter_hash] {
        w.write_all(&(s.len() as u32).to_le_bytes())?;
        w.write_all(s.as_bytes())?;
    }
    for z in state.ground_flat().iter().chain(state.excited_flat()) {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn read_array<const N: usize>(r: &mut impl Read) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn read_string(r: &mut impl Read) -> io::Result<String> {
    let len = u32::from_le_bytes(read_array(r)?) as usize;
    if len > 1 << 16 {
        return Err(invalid("snapshot string field is implausibly long"));
    }
    let mut buf = vec![0u8; len];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| invalid("snapshot string field is not UTF-8"))
}

pub fn read_state(r: &mut impl Read) -> io::Result<(FieldState, ArtifactRef)> {
    if &read_array::<8>(r)? != STATE_MAGIC {
        return Err(invalid("not a ramsey state snapshot (bad magic)"));
    }
    let version = u32::from_le_bytes(read_array(r)?);
    if version != STATE_VERSION {
        return Err(invalid(format!("unsupported snapshot layout version {version}")));
    }
    let max_order = u32::from_le_bytes(read_array(r)?);
    let nx = u64::from_le_bytes(read_array(r)?) as usize;
    let t = f64::from_le_bytes(read_array(r)?);
    let manifest = read_string(r)?;
    let parameter_hash = read_string(r)?;
    let set = ModeSet::new(max_order).map_err(|e| invalid(e.to_string()))?;
    if nx < 2 || nx > 1 << 24 {
        return Err(invalid(format!("implausible grid size {nx}")));
    }
    let mut read_rows = |rows: usize| -> io::Result<Vec<Vec<Complex64>>> {
        (0..rows)
            .map(|_| {
                (0..nx)
                    .map(|_| {
                        let re = f64::from_le_bytes(read_array(r)?);
                        let im = f64::from_le_bytes(read_array(r)?);
                        Ok(Complex64::new(re, im))
                    })
                    .collect()
            })
            .collect()
    };
    let ground = read_rows(set.n_ground())?;
    let excited = read_rows(set.n_excited())?;
    let state = FieldState::from_rows(t, set, ground, excited).map_err(|e| invalid(e.to_string()))?;
    Ok((state, ArtifactRef { manifest, parameter_hash }))
}

/// Columns `k, w_<j>…` over the shared k grid. All spectra must use the
/// same window.
pub fn write_spectrum_csv(w: &mut impl Write, r: &ArtifactRef, spectra: &[MomentumSpectrum]) -> io::Result<()> {
    header_line(w, SPECTRUM_SCHEMA, r, &[])?;
    let mut names = vec!["k".to_string()];
    names.extend(spectra.iter().map(|s| format!("w_{}", s.mode)));
    writeln!(w, "{}", names.join(","))?;
    let Some(first) = spectra.first() else {
        return Ok(());
    };
    if spectra.iter().any(|s| s.window != first.window) {
        return Err(invalid("spectra on different k windows cannot share one table"));
    }
    for (i, k) in first.k_grid.iter().enumerate() {
        write!(w, "{k:e}")?;
        for s in spectra {
            write!(w, ",{:e}", s.w[i])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    pub mode: i32,
    pub kappa: f64,
    pub variance: f64,
    pub population: f64,
    pub parseval_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSidecar {
    pub schema: String,
    #[serde(flatten)]
    pub provenance: ArtifactRef,
    pub data: String,
    pub t: f64,
    pub window: ramsey_core::KGrid,
    pub modes: Vec<SpectrumSummary>,
}

impl SpectrumSidecar {
    pub fn new(provenance: ArtifactRef, data: &str, t: f64, spectra: &[MomentumSpectrum]) -> Self {
        Self {
            schema: SPECTRUM_SIDECAR_SCHEMA.to_string(),
            provenance,
            data: data.to_string(),
            t,
            window: spectra.first().map(|s| s.window.clone()).unwrap_or_default(),
            modes: spectra
                .iter()
                .map(|s| SpectrumSummary {
                    mode: s.mode.0,
                    kappa: s.kappa,
                    variance: s.variance,
                    population: s.population,
                    parseval_ratio: s.parseval_ratio(),
                })
                .collect(),
        }
    }
}

/// Columns `tau, s0, s2, s_minus2`; rows are populations at `tau + dt_pulse`.
pub fn write_fringe_csv(w: &mut impl Write, r: &ArtifactRef, s: &FringeSeries) -> io::Result<()> {
    header_line(
        w,
        FRINGE_SCHEMA,
        r,
        &[("delta", format!("{:e}", s.delta)), ("dt_pulse", format!("{:e}", s.dt_pulse))],
    )?;
    writeln!(w, "tau,s0,s2,s_minus2")?;
    for i in 0..s.tau_values.len() {
        writeln!(w, "{:e},{:e},{:e},{:e}", s.tau_values[i], s.s0[i], s.s2[i], s.s_minus2[i])?;
    }
    Ok(())
}

/// Reads a fringe CSV. Comment lines are skipped; `delta` and `dt_pulse`
/// are taken from the header comment when present.
pub fn read_fringe_csv(r: impl BufRead) -> io::Result<FringeSeries> {
    let mut series = FringeSeries {
        delta: f64::NAN,
        dt_pulse: f64::NAN,
        tau_values: Vec::new(),
        s0: Vec::new(),
        s2: Vec::new(),
        s_minus2: Vec::new(),
    };
    let mut seen_header = false;
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for kv in comment.split_whitespace() {
                match kv.split_once('=') {
                    Some(("delta", v)) => series.delta = v.parse().unwrap_or(f64::NAN),
                    Some(("dt_pulse", v)) => series.dt_pulse = v.parse().unwrap_or(f64::NAN),
                    Some(("schema", v)) if v != FRINGE_SCHEMA => {
                        return Err(invalid(format!("expected schema {FRINGE_SCHEMA}, found {v}")))
                    }
                    _ => {}
                }
            }
            continue;
        }
        if !seen_header {
            if line != "tau,s0,s2,s_minus2" {
                return Err(invalid(format!("unexpected fringe header `{line}`")));
            }
            seen_header = true;
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| invalid(format!("line {}: {e}", n + 1)))?;
        let [tau, s0, s2, sm2] = values[..] else {
            return Err(invalid(format!("line {}: expected 4 columns", n + 1)));
        };
        series.tau_values.push(tau);
        series.s0.push(s0);
        series.s2.push(s2);
        series.s_minus2.push(sm2);
    }
    if !seen_header {
        return Err(invalid("fringe file has no header row"));
    }
    Ok(series)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// One row per detuning; missing estimates are empty cells.
pub fn write_dispersion_csv(w: &mut impl Write, r: &ArtifactRef, rows: &[DispersionRow]) -> io::Result<()> {
    header_line(w, DISPERSION_SCHEMA, r, &[])?;
    writeln!(
        w,
        "delta,omega_ratio,fit_rms,kappa2_over_k0,std2_over_k0,delta_omega_ratio_mean,delta_omega_ratio_fringe"
    )?;
    for row in rows {
        writeln!(
            w,
            "{:e},{},{},{},{},{},{}",
            row.delta,
            opt(row.omega_ratio),
            opt(row.fit_rms),
            opt(row.kappa2_over_k0),
            opt(row.std2_over_k0),
            opt(row.delta_omega_ratio_mean),
            opt(row.delta_omega_ratio_fringe),
        )?;
    }
    Ok(())
}
