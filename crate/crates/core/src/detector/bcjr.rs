use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use super::trellis::{build_trellis, check_reduction, Trellis};
use crate::error::{Error, Result};
use crate::gfcode::{jacobian_log_sum, Anchor, LlrVec4, LogSumMode, SATURATION_FLOOR};
use crate::macchannel::{psi_apply, ChannelRealization, Sample, DEFAULT_TAP_TOLERANCE};

/// Per-symbol a priori, extrinsic and a posteriori vectors.
///
/// `posterior[k] = prior[k] + extrinsic[k]` up to normalization; extrinsic
/// and posterior are max-anchored.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ApSequence {
    pub prior: Vec<LlrVec4>,
    pub extrinsic: Vec<LlrVec4>,
    pub posterior: Vec<LlrVec4>,
}

/// `log Pr(u) - |r - μ|² / (2σ²)`; an erased observation contributes only
/// the prior.
#[inline]
pub fn branch_metric(r: Option<&Sample>, expected: &Sample, prior: f64, sigma2: f64) -> f64 {
    match r {
        None => prior,
        Some(r) => prior - (r - expected).norm_squared() / (2.0 * sigma2),
    }
}

/// Noiseless channel output on every branch, indexed `4 * state + input`.
pub fn branch_outputs(trellis: &Trellis, taps: &[Matrix2<Complex64>]) -> Vec<Sample> {
    let bpsk = |b: usize| 1.0 - 2.0 * b as f64;
    let mut out = Vec::with_capacity(trellis.num_branches());
    let mut window = vec![Vector2::zeros(); trellis.memory() + 1];
    for s in 0..trellis.num_states() {
        for (l, (a, b)) in trellis.past_symbols(s).into_iter().enumerate() {
            window[l + 1] = Vector2::new(a, b);
        }
        for u in 0..4 {
            window[0] = Vector2::new(bpsk(u & 1), bpsk(u >> 1));
            out.push(psi_apply(&taps[..=trellis.memory().min(taps.len() - 1)], &window));
        }
    }
    out
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_finite() {
        v.iter_mut().for_each(|x| *x -= m);
    }
}

/// Log-domain BCJR over `obs` (`None` marks an erased sample).
///
/// `α_0` and `β_N` are uniform over states. Returns extrinsic information
/// `APP - prior`, max-anchored and floored at the saturation floor.
pub fn bcjr(
    obs: &[Option<Sample>],
    priors: &[LlrVec4],
    trellis: &Trellis,
    outputs: &[Sample],
    sigma2: f64,
    mode: LogSumMode,
) -> Result<ApSequence> {
    let n = obs.len();
    if priors.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: priors.len() });
    }
    if !(sigma2 > 0.0) {
        return Err(Error::ChannelConfig(format!("detector needs σ² > 0, got {sigma2}")));
    }
    let prior: Vec<LlrVec4> = priors
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if p.0.iter().all(|v| *v == f64::NEG_INFINITY) || p.0.iter().any(|v| v.is_nan()) {
                Err(Error::DegeneratePrior { index: k })
            } else {
                Ok(p.saturated())
            }
        })
        .collect::<Result<_>>()?;

    let ns = trellis.num_states();
    let nb = trellis.num_branches();
    let add = |a: f64, b: f64| jacobian_log_sum(a, b, mode);

    // γ_k(s, u) for all k, laid out k-major.
    let mut gamma = vec![0.0; n * nb];
    for k in 0..n {
        let g = &mut gamma[k * nb..(k + 1) * nb];
        for (b, gv) in g.iter_mut().enumerate() {
            *gv = branch_metric(obs[k].as_ref(), &outputs[b], prior[k][b & 3], sigma2);
        }
    }

    let mut alpha = vec![0.0; (n + 1) * ns];
    for k in 0..n {
        let (cur, nxt) = alpha.split_at_mut((k + 1) * ns);
        let a = &cur[k * ns..];
        let an = &mut nxt[..ns];
        an.fill(f64::NEG_INFINITY);
        for s in 0..ns {
            for u in 0..4 {
                let t = trellis.next(s, u);
                an[t] = add(an[t], a[s] + gamma[k * nb + 4 * s + u]);
            }
        }
        normalize_max(an);
    }

    let mut beta_next = vec![0.0; ns];
    let mut beta = vec![0.0; ns];
    let mut extrinsic = vec![LlrVec4::ZERO; n];
    let mut posterior = vec![LlrVec4::ZERO; n];
    for k in (0..n).rev() {
        let a = &alpha[k * ns..(k + 1) * ns];
        let mut app = [f64::NEG_INFINITY; 4];
        beta.fill(f64::NEG_INFINITY);
        for s in 0..ns {
            for (u, ap) in app.iter_mut().enumerate() {
                let v = gamma[k * nb + 4 * s + u] + beta_next[trellis.next(s, u)];
                beta[s] = add(beta[s], v);
                *ap = add(*ap, a[s] + v);
            }
        }
        normalize_max(&mut beta);
        std::mem::swap(&mut beta, &mut beta_next);

        let post = LlrVec4(app).normalize(Anchor::Max)?;
        let mut ext = (post - prior[k]).normalize(Anchor::Max)?;
        ext.0.iter_mut().for_each(|v| *v = v.max(SATURATION_FLOOR));
        posterior[k] = post;
        extrinsic[k] = ext;
    }
    Ok(ApSequence { prior, extrinsic, posterior })
}

/// How the detector picks between the full and reduced trellis.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Reduction {
    /// Reduced when the taps allow it.
    #[default]
    Auto,
    Never,
    /// Reduced, or an error when the taps forbid it.
    Always,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectorOptions {
    /// Trellis memory; `None` takes the largest lag with a tap entry of at
    /// least `tap_tolerance`.
    pub memory: Option<usize>,
    pub tap_tolerance: f64,
    pub reduction: Reduction,
    pub mode: LogSumMode,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        DetectorOptions {
            memory: None,
            tap_tolerance: DEFAULT_TAP_TOLERANCE,
            reduction: Reduction::Auto,
            mode: LogSumMode::Exact,
        }
    }
}

/// BCJR bound to one channel realization.
#[derive(Clone, Debug)]
pub struct BMac {
    trellis: Trellis,
    outputs: Vec<Sample>,
    sigma2: f64,
    mode: LogSumMode,
}

impl BMac {
    pub fn new(ch: &ChannelRealization, opts: DetectorOptions) -> Result<Self> {
        Self::from_taps(ch.taps(), ch.sigma2(), opts)
    }

    pub fn from_taps(taps: &[Matrix2<Complex64>], sigma2: f64, opts: DetectorOptions) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::ChannelConfig("no channel taps".into()));
        }
        let memory = opts.memory.unwrap_or_else(|| {
            taps.iter()
                .rposition(|t| t.iter().any(|v| v.norm() >= opts.tap_tolerance))
                .unwrap_or(0)
        });
        let memory = memory.min(taps.len() - 1);
        let reduced = match opts.reduction {
            Reduction::Never => false,
            Reduction::Always => {
                check_reduction(taps, memory)?;
                true
            }
            Reduction::Auto => memory > 0 && check_reduction(taps, memory).is_ok(),
        };
        let trellis = build_trellis(memory, reduced)?;
        let outputs = branch_outputs(&trellis, taps);
        Ok(BMac { trellis, outputs, sigma2, mode: opts.mode })
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn mode(&self) -> LogSumMode {
        self.mode
    }

    /// `B_MAC(r, L_i) → L_e`.
    pub fn run(&self, obs: &[Option<Sample>], priors: &[LlrVec4]) -> Result<ApSequence> {
        bcjr(obs, priors, &self.trellis, &self.outputs, self.sigma2, self.mode)
    }

    /// As [`BMac::run`] with uniform priors and no erasures.
    pub fn run_plain(&self, r: &[Sample]) -> Result<ApSequence> {
        let obs: Vec<Option<Sample>> = r.iter().copied().map(Some).collect();
        self.run(&obs, &vec![LlrVec4::ZERO; r.len()])
    }
}
