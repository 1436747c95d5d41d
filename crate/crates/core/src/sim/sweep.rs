use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{SimConfig, Simulator, TrialOutcome};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "ebn0_db",
    "frames",
    "xor_bit_errors",
    "xor_ber",
    "frame_errors",
    "fer",
    "mean_outer_iters",
    "mean_inner_iters",
    "delay_res_attempts",
    "delay_res_success",
];

/// Frames dispatched to the worker pool at once. Results are folded in frame
/// order and the point stops at the exact frame that reaches the error
/// budget, so the batch size never changes the output.
const BATCH: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub ebn0_db: f64,
    pub frames_run: u64,
    pub xor_bit_errors: u64,
    pub xor_ber: f64,
    pub frame_errors: u64,
    pub fer: f64,
    pub mean_outer_iters: f64,
    pub mean_inner_iters: f64,
    pub delay_resolution_attempts: u64,
    pub delay_resolution_successes: u64,
}

#[derive(Default)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    outer: u64,
    inner: u64,
    attempts: u64,
    successes: u64,
}

impl Tally {
    fn add(&mut self, t: &TrialOutcome) {
        self.frames += 1;
        self.bit_errors += t.bit_errors;
        self.frame_errors += u64::from(t.bit_errors > 0);
        self.outer += t.outer_iters as u64;
        self.inner += t.inner_iters as u64;
        self.attempts += u64::from(t.resolution_attempted);
        self.successes += u64::from(t.resolution_success);
    }

    fn point(&self, ebn0_db: f64, n: usize) -> BerPoint {
        let f = self.frames.max(1) as f64;
        BerPoint {
            ebn0_db,
            frames_run: self.frames,
            xor_bit_errors: self.bit_errors,
            xor_ber: self.bit_errors as f64 / (f * n as f64),
            frame_errors: self.frame_errors,
            fer: self.frame_errors as f64 / f,
            mean_outer_iters: self.outer as f64 / f,
            mean_inner_iters: self.inner as f64 / f,
            delay_resolution_attempts: self.attempts,
            delay_resolution_successes: self.successes,
        }
    }
}

/// Runs every Eb/N0 point of the configuration. A point stops early once it
/// has `max_frame_errors` frame errors (0 disables early stopping).
pub fn sweep(sim: &Simulator) -> Result<Vec<BerPoint>> {
    sweep_with(sim, |_| {})
}

/// As [`sweep`], reporting each finished point.
pub fn sweep_with(sim: &Simulator, mut on_point: impl FnMut(&BerPoint)) -> Result<Vec<BerPoint>> {
    let cfg = sim.config();
    let n = sim.parity_check().n();
    let first = cfg.first_frame;
    let end = first + cfg.frames;
    let mut points = Vec::with_capacity(cfg.ebn0_db.len());
    for (si, &ebn0) in cfg.ebn0_db.iter().enumerate() {
        let mut tally = Tally::default();
        let mut next = first;
        'point: while next < end {
            let hi = (next + BATCH).min(end);
            let batch: Vec<Result<TrialOutcome>> = (next..hi).into_par_iter().map(|f| sim.run_trial(si, f)).collect();
            for t in batch {
                tally.add(&t?);
                if cfg.max_frame_errors > 0 && tally.frame_errors >= cfg.max_frame_errors {
                    break 'point;
                }
            }
            next = hi;
        }
        let p = tally.point(ebn0, n);
        on_point(&p);
        points.push(p);
    }
    Ok(points)
}

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_ebn0_list(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad Eb/N0 value {s:?}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let out = match parts.as_slice() {
        [start, stop, step] => {
            let (a, b, s) = (num(start)?, num(stop)?, num(step)?);
            if s.is_nan() || s <= 0.0 || b < a {
                return Err(Error::Config(format!("bad Eb/N0 range {text:?}")));
            }
            let count = ((b - a) / s + 1e-9).floor() as usize + 1;
            (0..count).map(|i| a + i as f64 * s).collect()
        }
        [_] => text.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Config(format!("bad Eb/N0 spec {text:?}"))),
    };
    if out.is_empty() || out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config(format!("bad Eb/N0 spec {text:?}")));
    }
    Ok(out)
}

/// CSV bytes for a list of points.
pub fn csv_bytes(points: &[BerPoint]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for p in points {
        w.write_record([
            p.ebn0_db.to_string(),
            p.frames_run.to_string(),
            p.xor_bit_errors.to_string(),
            p.xor_ber.to_string(),
            p.frame_errors.to_string(),
            p.fer.to_string(),
            p.mean_outer_iters.to_string(),
            p.mean_inner_iters.to_string(),
            p.delay_resolution_attempts.to_string(),
            p.delay_resolution_successes.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a SimConfig,
    seed: u64,
    code_n: usize,
    code_k: usize,
    code_m: usize,
    h_sha256: String,
    created_unix: u64,
    version: &'static str,
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Config(format!("bad output path {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = dir.join(tmp_name);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes the CSV and its manifest next to it, each via rename.
pub fn write_outputs(sim: &Simulator, points: &[BerPoint], csv_path: &Path) -> Result<()> {
    let h = sim.parity_check();
    let manifest = Manifest {
        config: sim.config(),
        seed: sim.config().seed,
        code_n: h.n(),
        code_k: sim.generator().k(),
        code_m: h.m(),
        h_sha256: h.fingerprint(),
        created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        version: env!("CARGO_PKG_VERSION"),
    };
    let csv = csv_bytes(points)?;
    let json = serde_json::to_vec_pretty(&manifest)?;
    write_atomic(csv_path, &csv)?;
    write_atomic(&manifest_path(csv_path), &json)?;
    Ok(())
}
