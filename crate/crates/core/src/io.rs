//! On-disk artifacts: trajectory CSV, ground-state dumps, manifests and
//! plot series.
//!
//! Ground-state dump layout (little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 8 | magic `NLHGSD01` |
//! | 4 | `u32` dimension |
//! | 4 | `u32` points per axis |
//! | 8 | `f64` half box length |
//! | 8 | `f64` gamma |
//! | 8 | `f64` omega |
//! | 4 | `u32` byte length `k` of the potential spec (JSON) |
//! | k | potential spec |
//! | 8 n^d | `f64` profile values, row-major, last axis fastest |
//!
//! The profile is real, so only the real part is stored.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::evolve::{Termination, TrajectoryRecord};
use crate::grid::{Field, Grid};
use crate::potentials::PotentialSpec;

const DUMP_MAGIC: &[u8; 8] = b"NLHGSD01";
pub const MANIFEST_NAME: &str = "manifest.json";
pub const TRAJECTORY_NAME: &str = "trajectory.csv";
pub const PLOT_DIR: &str = "plot";

pub const TRAJECTORY_COLUMNS: [&str; 11] =
    ["t", "mass", "energy", "grad_sq", "hv_sq", "p_value", "variance_I", "virial_I1", "virial_I2", "e_term", "z"];

fn format_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), msg: msg.into() }
}

/// Writes one row per snapshot, a `# gamma` header and a `# termination`
/// footer. Floats use the shortest round-trip representation.
pub fn write_trajectory_csv(path: &Path, record: &TrajectoryRecord, gamma: f64) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("# gamma = {gamma:e}\n"));
    out.push_str(&TRAJECTORY_COLUMNS.join(","));
    out.push('\n');
    for (s, z) in record.snapshots.iter().zip(&record.z_series) {
        let row = [
            s.time, s.mass, s.energy, s.grad_sq, s.hv_sq, s.p_value, s.variance_i, s.virial_i1, s.virial_i2, s.e_term, *z,
        ];
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.push_str(&format!("# termination = {}\n", termination_line(&record.termination)));
    fs::write(path, out)?;
    Ok(())
}

fn termination_line(t: &Termination) -> String {
    match *t {
        Termination::Completed { t } => format!("completed t={t:e}"),
        Termination::BlowupDetected { t, grad_ratio, tail_fraction } => {
            format!("blowup_detected t={t:e} grad_ratio={grad_ratio:e} tail_fraction={tail_fraction:e}")
        }
        Termination::ResolutionExhausted { t, dt } => format!("resolution_exhausted t={t:e} dt={dt:e}"),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub gamma: f64,
    /// Row-major, columns as in [`TRAJECTORY_COLUMNS`].
    pub rows: Vec<[f64; 11]>,
    pub termination: String,
    /// Time of the termination event.
    pub end_time: f64,
}

impl TrajectoryTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = TRAJECTORY_COLUMNS.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_trajectory_csv(path: &Path) -> Result<TrajectoryTable> {
    let file = fs::File::open(path).map_err(|e| format_err(path, format!("cannot open: {e}")))?;
    let mut gamma = None;
    let mut termination = None;
    let mut header_seen = false;
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if let Some(rest) = line.strip_prefix("# gamma = ") {
            gamma = Some(rest.trim().parse::<f64>().map_err(|e| format_err(path, format!("gamma: {e}")))?);
        } else if let Some(rest) = line.strip_prefix("# termination = ") {
            termination = Some(rest.trim().to_string());
        } else if !header_seen {
            if line.split(',').collect::<Vec<_>>() != TRAJECTORY_COLUMNS {
                return Err(format_err(path, format!("unexpected header `{line}`")));
            }
            header_seen = true;
        } else {
            let cells: Vec<f64> = line
                .split(',')
                .map(|c| c.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| format_err(path, format!("line {}: {e}", lineno + 1)))?;
            let row: [f64; 11] =
                cells.try_into().map_err(|_| format_err(path, format!("line {}: expected 11 columns", lineno + 1)))?;
            rows.push(row);
        }
    }
    let gamma = gamma.ok_or_else(|| format_err(path, "missing `# gamma` header"))?;
    let termination = termination.ok_or_else(|| format_err(path, "missing `# termination` footer"))?;
    let end_time = termination
        .split_whitespace()
        .find_map(|w| w.strip_prefix("t="))
        .and_then(|v| v.parse::<f64>().ok())
        .ok_or_else(|| format_err(path, "termination footer has no time"))?;
    Ok(TrajectoryTable { gamma, rows, termination, end_time })
}

#[derive(Debug, Clone)]
pub struct GroundStateDump {
    pub gamma: f64,
    pub omega: f64,
    pub potential: PotentialSpec,
    pub profile: Field,
}

pub fn write_ground_state_dump(path: &Path, profile: &Field, gamma: f64, omega: f64, potential: &PotentialSpec) -> Result<()> {
    let grid = profile.grid();
    let spec = serde_json::to_vec(potential)?;
    let mut buf = Vec::with_capacity(48 + spec.len() + 8 * grid.len());
    buf.extend_from_slice(DUMP_MAGIC);
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&grid.half_len().to_le_bytes());
    buf.extend_from_slice(&gamma.to_le_bytes());
    buf.extend_from_slice(&omega.to_le_bytes());
    buf.extend_from_slice(&(spec.len() as u32).to_le_bytes());
    buf.extend_from_slice(&spec);
    for z in profile.values() {
        buf.extend_from_slice(&z.re.to_le_bytes());
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(format_err(self.path, format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn read_ground_state_dump(path: &Path) -> Result<GroundStateDump> {
    let bytes = fs::read(path).map_err(|e| format_err(path, format!("cannot read: {e}")))?;
    let mut c = Cursor { bytes: &bytes, pos: 0, path };
    if c.take(8)? != DUMP_MAGIC {
        return Err(format_err(path, "not a ground-state dump (bad magic)"));
    }
    let dim = c.u32()? as usize;
    let n = c.u32()? as usize;
    let half_len = c.f64()?;
    let gamma = c.f64()?;
    let omega = c.f64()?;
    let k = c.u32()? as usize;
    let potential: PotentialSpec =
        serde_json::from_slice(c.take(k)?).map_err(|e| format_err(path, format!("potential spec: {e}")))?;
    let grid = Grid::new(dim, n, half_len).map_err(|e| format_err(path, e.to_string()))?;
    let values: Vec<Complex64> =
        (0..grid.len()).map(|_| c.f64().map(|re| Complex64::new(re, 0.0))).collect::<Result<_>>()?;
    if c.pos != bytes.len() {
        return Err(format_err(path, format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    Ok(GroundStateDump { gamma, omega, potential, profile: Field::from_values(grid, values)? })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    /// Path relative to the run directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    /// Hash of the resolved configuration, seed and thread count.
    pub input_hash: String,
    pub files: Vec<ManifestEntry>,
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            collect_files(root, &p, out)?;
        } else if p != root.join(MANIFEST_NAME) {
            out.push(p);
        }
    }
    Ok(())
}

/// Lists every file under `dir` with its checksum and writes
/// `manifest.json`, replacing any previous one.
pub fn write_manifest(dir: &Path, input_hash: &str) -> Result<Manifest> {
    let mut paths = Vec::new();
    collect_files(dir, dir, &mut paths)?;
    let mut files: Vec<ManifestEntry> = paths
        .iter()
        .map(|p| {
            let rel = p.strip_prefix(dir).expect("under dir");
            let name = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            Ok(ManifestEntry { path: name, bytes: fs::metadata(p)?.len(), sha256: sha256_file(p)? })
        })
        .collect::<Result<_>>()?;
    files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input_hash: input_hash.into(),
        files,
    };
    write_json(&dir.join(MANIFEST_NAME), &manifest)?;
    Ok(manifest)
}

/// Recomputes every checksum; returns the entries that no longer match.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| format_err(&path, format!("cannot read: {e}")))?;
    let m: Manifest = serde_json::from_str(&text)?;
    let mut bad = Vec::new();
    for e in &m.files {
        match sha256_file(&dir.join(&e.path)) {
            Ok(h) if h == e.sha256 => {}
            _ => bad.push(e.path.clone()),
        }
    }
    Ok(bad)
}

/// Names of the series written by [`emit_plot_data`].
pub const PLOT_SERIES: [&str; 8] = ["mass", "energy", "grad_sq", "hv_sq", "p_value", "variance_I", "z", "mp_product"];

/// Splits the run's trajectory into two-column `t,<series>` files under
/// `plot/`, dropping rows past the termination time. Refreshes the
/// manifest when one exists.
pub fn emit_plot_data(run_dir: &Path) -> Result<Vec<PathBuf>> {
    let csv = run_dir.join(TRAJECTORY_NAME);
    if !csv.is_file() {
        return Err(Error::Format { path: csv, msg: "no trajectory in run directory".into() });
    }
    let table = read_trajectory_csv(&csv)?;
    let keep: Vec<&[f64; 11]> = table.rows.iter().filter(|r| r[0] <= table.end_time).collect();
    let plot = run_dir.join(PLOT_DIR);
    fs::create_dir_all(&plot)?;
    let s = (table.gamma - 2.0) / 2.0;
    let mut written = Vec::new();
    for name in PLOT_SERIES {
        let mut text = format!("t,{name}\n");
        for r in &keep {
            let v = match name {
                "mp_product" => r[1].powf(1.0 - s) * r[5].powf(s),
                _ => r[TRAJECTORY_COLUMNS.iter().position(|c| *c == name).expect("known column")],
            };
            text.push_str(&format!("{:e},{v:e}\n", r[0]));
        }
        let p = plot.join(format!("{name}.csv"));
        fs::write(&p, text)?;
        written.push(p);
    }
    let manifest = run_dir.join(MANIFEST_NAME);
    if manifest.is_file() {
        let m: Manifest = serde_json::from_str(&fs::read_to_string(&manifest)?)?;
        write_manifest(run_dir, &m.input_hash)?;
    }
    Ok(written)
}
