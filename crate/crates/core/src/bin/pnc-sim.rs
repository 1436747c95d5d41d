use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use pnc_core::jointdec::Schedule;
use pnc_core::sim::{
    parse_ebn0_list, sweep_with, write_outputs, ChannelPath, CodeSpec, DecoderKind, IotaMode, PulseSpec, SimConfig,
    Simulator,
};
use pnc_core::{gfcode::LogSumMode, Error};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pulse {
    Rect,
    Srrc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Decoder {
    Gspa,
    Jcnc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Channel {
    Whitened,
    Matched,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OnOff {
    On,
    Off,
}

/// Monte-Carlo XOR-codeword BER/FER at a two-way relay.
#[derive(Debug, Parser)]
#[command(name = "pnc-sim", version)]
struct Cli {
    /// mn-regular, cyclic-eg, or alist:<path>
    #[arg(long, default_value = "mn-regular")]
    code: String,
    /// Block length (mn-regular default 1008, cyclic-eg default 1023).
    #[arg(long)]
    n: Option<usize>,
    /// Seed of the random code construction.
    #[arg(long, default_value_t = 1)]
    code_seed: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "srrc")]
    pulse: Pulse,
    /// SRRC roll-off (default 1.0).
    #[arg(long)]
    rolloff: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0)]
    iota_max: usize,
    /// fixed:<v> or random
    #[arg(long, default_value = "fixed:0")]
    iota: String,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4, allow_negative_numbers = true)]
    delta_theta: f64,
    #[arg(long, value_enum, default_value = "gspa")]
    decoder: Decoder,
    #[arg(long, default_value_t = 4)]
    outer: usize,
    #[arg(long, default_value_t = 5)]
    inner: usize,
    /// start:stop:step or a comma-separated list, in dB.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: String,
    #[arg(long, default_value_t = 1000)]
    frames: u64,
    /// Stop a point after this many frame errors (0: never).
    #[arg(long, default_value_t = 100)]
    max_frame_errors: u64,
    /// Index of the first frame, for splitting runs.
    #[arg(long, default_value_t = 0)]
    first_frame: u64,
    #[arg(long, value_enum, default_value = "whitened")]
    channel: Channel,
    #[arg(long, value_enum, default_value = "off")]
    crc: OnOff,
    #[arg(long)]
    out: PathBuf,
}

fn parse_code(text: &str, n: Option<usize>, seed: u64) -> Result<CodeSpec, Error> {
    match text {
        "mn-regular" => Ok(CodeSpec::MnRegular { n: n.unwrap_or(1008), seed }),
        "cyclic-eg" => Ok(CodeSpec::CyclicEg { n: n.unwrap_or(1023) }),
        _ => match text.strip_prefix("alist:") {
            Some(p) if !p.is_empty() => {
                if n.is_some() {
                    return Err(Error::Config("--n does not apply to alist codes".into()));
                }
                Ok(CodeSpec::Alist { path: PathBuf::from(p) })
            }
            _ => Err(Error::Config(format!("unknown code {text:?}"))),
        },
    }
}

fn parse_iota(text: &str) -> Result<IotaMode, Error> {
    if text == "random" {
        return Ok(IotaMode::Random);
    }
    text.strip_prefix("fixed:")
        .and_then(|v| v.parse().ok())
        .map(IotaMode::Fixed)
        .ok_or_else(|| Error::Config(format!("bad --iota {text:?}; use fixed:<v> or random")))
}

fn build_config(cli: &Cli) -> Result<SimConfig, Error> {
    let pulse = match (cli.pulse, cli.rolloff) {
        (Pulse::Rect, Some(_)) => return Err(Error::Config("--rolloff does not apply to rectangular pulses".into())),
        (Pulse::Rect, None) => PulseSpec::Rect,
        (Pulse::Srrc, r) => PulseSpec::Srrc { rolloff: r.unwrap_or(1.0) },
    };
    let cfg = SimConfig {
        code: parse_code(&cli.code, cli.n, cli.code_seed)?,
        pulse,
        decoder: match cli.decoder {
            Decoder::Gspa => DecoderKind::Gspa,
            Decoder::Jcnc => DecoderKind::Jcnc,
        },
        ebn0_db: parse_ebn0_list(&cli.ebn0)?,
        frames: cli.frames,
        max_frame_errors: cli.max_frame_errors,
        first_frame: cli.first_frame,
        epsilon: cli.eps,
        iota: parse_iota(&cli.iota)?,
        iota_max: cli.iota_max,
        delta_theta: cli.delta_theta,
        schedule: Schedule::new(cli.outer, cli.inner)?,
        seed: cli.seed,
        channel: match cli.channel {
            Channel::Whitened => ChannelPath::Whitened,
            Channel::Matched => ChannelPath::Matched,
        },
        crc: matches!(cli.crc, OnOff::On),
        mode: LogSumMode::Exact,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("pnc-sim: {e}");
            return ExitCode::from(2);
        }
    };
    let run = || -> Result<(), Error> {
        let sim = Simulator::new(cfg)?;
        let points = sweep_with(&sim, |p| {
            eprintln!(
                "Eb/N0 {:6.2} dB  frames {:6}  BER {:.3e}  FER {:.3e}",
                p.ebn0_db, p.frames_run, p.xor_ber, p.fer
            )
        })?;
        write_outputs(&sim, &points, &cli.out)
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Config(_) | Error::FrameOffset(_))) => {
            eprintln!("pnc-sim: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("pnc-sim: {e}");
            ExitCode::FAILURE
        }
    }
}
