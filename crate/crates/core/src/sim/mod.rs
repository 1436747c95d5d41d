//! Monte-Carlo driver: configuration, the per-frame pipeline, and sweeps.

mod sweep;

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::detector::{BMac, DetectorOptions};
use crate::error::{Error, Result};
use crate::framesync::{broadcast_recover, crc16_append, resolve_delay_crc, zero_pad_interference, Role, CRC_BITS};
use crate::gfcode::{LlrVec4, LogSumMode};
use crate::jointdec::{jcnc_decode, log_g_spa, Schedule};
use crate::ldpc::{
    build_cyclic_eg_code, build_regular_code, cyclic_shift, load_alist, syndrome, xor_words, GeneratorForm,
    ParityCheckMatrix,
};
use crate::macchannel::{
    simulate_matched_filter_domain, simulate_whitened, whiten, Boundary, ChannelRealization, PulseShape,
    DEFAULT_SRRC_SPAN,
};

pub use sweep::{csv_bytes, manifest_path, parse_ebn0_list, sweep, sweep_with, write_outputs, BerPoint, CSV_HEADER};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum CodeSpec {
    /// Random (3,6)-regular code without 4-cycles.
    MnRegular { n: usize, seed: u64 },
    /// Cyclic Euclidean-geometry code of length `n = 4^s − 1`.
    CyclicEg { n: usize },
    Alist { path: PathBuf },
}

impl CodeSpec {
    pub fn build(&self) -> Result<(ParityCheckMatrix, GeneratorForm)> {
        match self {
            CodeSpec::MnRegular { n, seed } => {
                let h = build_regular_code(*n, 3, 6, 6, *seed)?;
                let g = GeneratorForm::for_code(&h)?;
                Ok((h, g))
            }
            CodeSpec::CyclicEg { n } => {
                let s = (2..=5u32)
                    .find(|&s| (1usize << (2 * s)) - 1 == *n)
                    .ok_or_else(|| Error::Config(format!("no cyclic EG code of length {n}; use 15, 63, 255 or 1023")))?;
                build_cyclic_eg_code(s)
            }
            CodeSpec::Alist { path } => {
                let h = load_alist(&std::fs::read_to_string(path)?)?;
                let g = GeneratorForm::for_code(&h)?;
                Ok((h, g))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum PulseSpec {
    Rect,
    Srrc { rolloff: f64 },
}

impl PulseSpec {
    pub fn build(&self) -> Result<PulseShape> {
        match *self {
            PulseSpec::Rect => Ok(PulseShape::rectangular()),
            PulseSpec::Srrc { rolloff } => PulseShape::srrc(rolloff, DEFAULT_SRRC_SPAN),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecoderKind {
    Gspa,
    Jcnc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IotaMode {
    Fixed(i64),
    /// Uniform on `[−ι_max, ι_max]`.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelPath {
    /// Simulate directly after the whitening filter.
    Whitened,
    /// Simulate matched-filter outputs with colored noise, then whiten.
    Matched,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub pulse: PulseSpec,
    pub decoder: DecoderKind,
    pub ebn0_db: Vec<f64>,
    pub frames: u64,
    pub max_frame_errors: u64,
    /// Index of the first frame; frames `first_frame..first_frame + frames` run.
    pub first_frame: u64,
    pub epsilon: f64,
    pub iota: IotaMode,
    pub iota_max: usize,
    pub delta_theta: f64,
    pub schedule: Schedule,
    pub seed: u64,
    pub channel: ChannelPath,
    pub crc: bool,
    pub mode: LogSumMode,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            code: CodeSpec::MnRegular { n: 1008, seed: 1 },
            pulse: PulseSpec::Srrc { rolloff: 1.0 },
            decoder: DecoderKind::Gspa,
            ebn0_db: vec![2.0],
            frames: 1000,
            max_frame_errors: 100,
            first_frame: 0,
            epsilon: 0.5,
            iota: IotaMode::Fixed(0),
            iota_max: 0,
            delta_theta: std::f64::consts::FRAC_PI_4,
            schedule: Schedule { outer: 4, inner: 5 },
            seed: 1,
            channel: ChannelPath::Whitened,
            crc: false,
            mode: LogSumMode::Exact,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.frames == 0 {
            return bad("frames must be at least 1".into());
        }
        Schedule::new(self.schedule.outer, self.schedule.inner)?;
        if !(0.0..1.0).contains(&self.epsilon) {
            return bad(format!("epsilon must lie in [0, 1), got {}", self.epsilon));
        }
        if self.ebn0_db.is_empty() || self.ebn0_db.iter().any(|e| !e.is_finite()) {
            return bad("need at least one finite Eb/N0 point".into());
        }
        if !self.delta_theta.is_finite() {
            return bad("delta-theta must be finite".into());
        }
        if let IotaMode::Fixed(v) = self.iota {
            if v.unsigned_abs() as usize > self.iota_max {
                return bad(format!("fixed iota {v} exceeds iota-max {}", self.iota_max));
            }
        }
        if let PulseSpec::Srrc { rolloff } = self.pulse {
            if !(0.0..=1.0).contains(&rolloff) {
                return bad(format!("rolloff must lie in [0, 1], got {rolloff}"));
            }
        }
        Ok(())
    }
}

/// `σ² = 1 / (2 R 10^{Eb/N0 / 10})` per real dimension, unit-energy BPSK.
pub fn ebn0_to_sigma2(ebn0_db: f64, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::Config(format!("code rate must lie in (0, 1], got {rate}")));
    }
    Ok(1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0)))
}

/// Everything one frame produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub frame: u64,
    pub iota: i64,
    pub bit_errors: u64,
    pub converged: bool,
    pub outer_iters: usize,
    pub inner_iters: usize,
    pub resolution_attempted: bool,
    pub resolution_success: bool,
    /// Whether both sources recovered each other's message, when the delay
    /// was resolved correctly.
    pub broadcast_ok: Option<bool>,
}

/// Immutable per-run state shared by every frame.
#[derive(Debug)]
pub struct Simulator {
    cfg: SimConfig,
    h: ParityCheckMatrix,
    code: GeneratorForm,
    channels: Vec<ChannelRealization>,
    detectors: Vec<BMac>,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let (h, code) = cfg.code.build()?;
        Self::with_code(cfg, h, code)
    }

    /// As [`Simulator::new`] with a prebuilt code.
    pub fn with_code(cfg: SimConfig, h: ParityCheckMatrix, code: GeneratorForm) -> Result<Self> {
        cfg.validate()?;
        if code.n() != h.n() {
            return Err(Error::LengthMismatch { expected: h.n(), got: code.n() });
        }
        if cfg.iota_max > 0 && !h.is_cyclic() {
            return Err(Error::Config("frame offsets need a cyclic code".into()));
        }
        if 2 * cfg.iota_max >= h.n() {
            return Err(Error::FrameOffset(format!("iota-max {} too large for N = {}", cfg.iota_max, h.n())));
        }
        if cfg.crc && code.k() <= CRC_BITS {
            return Err(Error::Config(format!("code dimension {} leaves no room for the CRC", code.k())));
        }
        let base = ChannelRealization::new(cfg.pulse.build()?, cfg.epsilon, cfg.delta_theta, 0, 0.0)?
            .with_boundary(Boundary::Continuous);
        let rate = code.k() as f64 / h.n() as f64;
        let opts = DetectorOptions { mode: cfg.mode, ..DetectorOptions::default() };
        let mut channels = Vec::new();
        let mut detectors = Vec::new();
        for &e in &cfg.ebn0_db {
            let ch = base.with_sigma2(ebn0_to_sigma2(e, rate)?);
            detectors.push(BMac::new(&ch, opts)?);
            channels.push(ch);
        }
        Ok(Simulator { cfg, h, code, channels, detectors })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn parity_check(&self) -> &ParityCheckMatrix {
        &self.h
    }

    pub fn generator(&self) -> &GeneratorForm {
        &self.code
    }

    pub fn detector(&self, snr_index: usize) -> &BMac {
        &self.detectors[snr_index]
    }

    /// Counter-based per-frame generator.
    pub fn frame_rng(&self, snr_index: usize, frame: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(((snr_index as u64) << 40) | frame);
        rng
    }

    pub fn run_trial(&self, snr_index: usize, frame: u64) -> Result<TrialOutcome> {
        self.trial(snr_index, frame).map_err(|e| Error::Trial { snr_index, frame, source: Box::new(e) })
    }

    fn trial(&self, snr_index: usize, frame: u64) -> Result<TrialOutcome> {
        let cfg = &self.cfg;
        let ch = self
            .channels
            .get(snr_index)
            .ok_or_else(|| Error::Config(format!("no Eb/N0 point with index {snr_index}")))?;
        let mut rng = self.frame_rng(snr_index, frame);
        let k = self.code.k();
        let draw_info = |rng: &mut ChaCha8Rng| -> Result<Vec<u8>> {
            if cfg.crc {
                let m: Vec<u8> = (0..k - CRC_BITS).map(|_| rng.random::<bool>() as u8).collect();
                Ok(crc16_append(&m)?.bits())
            } else {
                Ok((0..k).map(|_| rng.random::<bool>() as u8).collect())
            }
        };
        let info_a = draw_info(&mut rng)?;
        let info_b = draw_info(&mut rng)?;
        let c_a = self.code.encode(&info_a)?;
        let c_b = self.code.encode(&info_b)?;
        let iota = match cfg.iota {
            IotaMode::Fixed(v) => v,
            IotaMode::Random => {
                let m = cfg.iota_max as i64;
                rng.random_range(-m..=m)
            }
        };
        let ch = ch.with_iota(iota);
        let r = match cfg.channel {
            ChannelPath::Whitened => simulate_whitened(&c_a, &c_b, &ch, &mut rng)?,
            ChannelPath::Matched => {
                let y = simulate_matched_filter_domain(&c_a, &c_b, &ch, &mut rng)?;
                whiten(&y, &ch.factor().taps)?.frame(c_a.len())
            }
        };
        let obs = zero_pad_interference(&r, cfg.iota_max)?;
        let bmac = &self.detectors[snr_index];
        let d = match cfg.decoder {
            DecoderKind::Gspa => log_g_spa(&self.h, bmac, &obs, cfg.schedule)?,
            DecoderKind::Jcnc => {
                let ap = bmac.run(&obs, &vec![LlrVec4::ZERO; obs.len()])?;
                jcnc_decode(&self.h, &ap.posterior, cfg.schedule.total_inner(), cfg.mode)?
            }
        };
        if d.converged && !syndrome(&self.h, &d.xor_codeword)? {
            return Err(Error::Config("decoder reported convergence with a nonzero syndrome".into()));
        }
        let reference = xor_words(&c_a, &cyclic_shift(&c_b, iota));
        let bit_errors = d.xor_codeword.iter().zip(&reference).filter(|(x, y)| x != y).count() as u64;

        let mut out = TrialOutcome {
            frame,
            iota,
            bit_errors,
            converged: d.converged,
            outer_iters: d.outer_iters_used,
            inner_iters: d.inner_iters_used,
            resolution_attempted: false,
            resolution_success: false,
            broadcast_ok: None,
        };
        if cfg.crc && d.converged {
            if let Some((_, b_part)) = &d.pair_codewords {
                out.resolution_attempted = true;
                out.resolution_success = matches!(resolve_delay_crc(b_part, &self.code, cfg.iota_max), Ok(l) if l == iota);
            }
            if out.resolution_success || d.pair_codewords.is_none() {
                let msg_len = k - CRC_BITS;
                let at_a = broadcast_recover(&d.xor_codeword, &c_a, Role::A, cfg.iota_max, &self.code);
                let at_b = broadcast_recover(&d.xor_codeword, &c_b, Role::B, cfg.iota_max, &self.code);
                let ok = matches!(&at_a, Ok(rec) if rec.message[..] == info_b[..msg_len])
                    && matches!(&at_b, Ok(rec) if rec.message[..] == info_a[..msg_len]);
                out.broadcast_ok = Some(ok);
            }
        }
        Ok(out)
    }
}
