//! Asynchronous two-user MAC: pulse correlations, spectral factorization,
//! and the whitened vector-ISI channel seen by the relay.
//!
//! User B lags user A by `δ = ι + ε` symbol periods. The relay samples two
//! matched filters per symbol and whitens them, giving
//! `r(k) = Σ_l F_l diag(h_a, h_b) x(k-l) + n(k)` with
//! `x(k) = (x_a(k), x_b(k-ι))` and white noise of variance σ² per real
//! dimension.

mod correlation;
mod factor;
mod matched;
mod pulse;
mod rect;

pub use correlation::{
    compute_correlations, compute_correlations_with, noise_covariance, CorrelationSet, NoiseCovariance,
    CORRELATION_FLOOR,
};
pub use factor::{factorization_residual, spectral_factorize, SpectralFactor, RESIDUAL_GRID, RESIDUAL_TOLERANCE};
pub use matched::{
    colored_noise, matched_filter_signal, simulate_matched_filter_domain, whiten, MatchedFilterOutput,
    WHITEN_MARGIN,
};
pub use pulse::{cross_correlation, PulseKind, PulseShape, DEFAULT_SRRC_SPAN, OVERSAMPLING};
pub use rect::{rectangular_samples, rectangular_to_matched, RectangularSamples};

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One relay observation: the two whitened matched-filter outputs.
pub type Sample = Vector2<Complex64>;

/// Tap magnitude below which the detector ignores a whitened tap.
pub const DEFAULT_TAP_TOLERANCE: f64 = 1e-3;

/// `0 → +1`, `1 → -1`.
#[inline]
pub fn bpsk(bit: u8) -> f64 {
    1.0 - 2.0 * (bit & 1) as f64
}

/// What the channel carries outside the frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Nothing is transmitted before or after the frame.
    #[default]
    Silent,
    /// Adjacent frames of random data leak in.
    Continuous,
}

/// Channel state shared by every frame at one operating point.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    pulse: PulseShape,
    h_a: Complex64,
    h_b: Complex64,
    delta_theta: f64,
    epsilon: f64,
    iota: i64,
    sigma2: f64,
    boundary: Boundary,
    correlations: CorrelationSet,
    covariance: NoiseCovariance,
    factor: SpectralFactor,
    taps: Vec<Matrix2<Complex64>>,
}

impl ChannelRealization {
    /// Equal-power channel `h_a = 1`, `h_b = e^{jΔθ}`.
    pub fn new(pulse: PulseShape, epsilon: f64, delta_theta: f64, iota: i64, sigma2: f64) -> Result<Self> {
        Self::with_gains(
            pulse,
            epsilon,
            Complex64::new(1.0, 0.0),
            Complex64::from_polar(1.0, delta_theta),
            iota,
            sigma2,
        )
    }

    pub fn with_gains(
        pulse: PulseShape,
        epsilon: f64,
        h_a: Complex64,
        h_b: Complex64,
        iota: i64,
        sigma2: f64,
    ) -> Result<Self> {
        if !(sigma2 >= 0.0) {
            return Err(Error::ChannelConfig(format!("noise variance must be nonnegative, got {sigma2}")));
        }
        let correlations = compute_correlations(&pulse, &pulse, epsilon)?;
        let covariance = noise_covariance(&correlations);
        let factor = spectral_factorize(&covariance)?;
        let taps = build_psi(h_a, h_b, &factor.taps);
        Ok(ChannelRealization {
            pulse,
            h_a,
            h_b,
            delta_theta: (h_b / h_a).arg(),
            epsilon,
            iota,
            sigma2,
            boundary: Boundary::Silent,
            correlations,
            covariance,
            factor,
            taps,
        })
    }

    pub fn with_iota(&self, iota: i64) -> Self {
        ChannelRealization { iota, ..self.clone() }
    }

    pub fn with_sigma2(&self, sigma2: f64) -> Self {
        ChannelRealization { sigma2, ..self.clone() }
    }

    pub fn with_boundary(&self, boundary: Boundary) -> Self {
        ChannelRealization { boundary, ..self.clone() }
    }

    pub fn pulse(&self) -> &PulseShape {
        &self.pulse
    }

    pub fn h_a(&self) -> Complex64 {
        self.h_a
    }

    pub fn h_b(&self) -> Complex64 {
        self.h_b
    }

    pub fn delta_theta(&self) -> f64 {
        self.delta_theta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn iota(&self) -> i64 {
        self.iota
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn correlations(&self) -> &CorrelationSet {
        &self.correlations
    }

    pub fn covariance(&self) -> &NoiseCovariance {
        &self.covariance
    }

    /// Whitening factor `F_0, …, F_L` (gains not applied).
    pub fn factor(&self) -> &SpectralFactor {
        &self.factor
    }

    /// ISI taps `Ψ_l = F_l diag(h_a, h_b)`.
    pub fn taps(&self) -> &[Matrix2<Complex64>] {
        &self.taps
    }

    /// Largest lag whose tap has an entry of magnitude at least `tol`.
    pub fn effective_memory(&self, tol: f64) -> usize {
        self.taps
            .iter()
            .rposition(|t| t.iter().any(|v| v.norm() >= tol))
            .unwrap_or(0)
    }
}

/// `Ψ_l = F_l diag(h_a, h_b)`: entry `(i, a)` of `F_l` scales by `h_a`,
/// entry `(i, b)` by `h_b`.
pub fn build_psi(h_a: Complex64, h_b: Complex64, f: &[Matrix2<f64>]) -> Vec<Matrix2<Complex64>> {
    f.iter()
        .map(|m| {
            Matrix2::new(
                h_a * m[(0, 0)],
                h_b * m[(0, 1)],
                h_a * m[(1, 0)],
                h_b * m[(1, 1)],
            )
        })
        .collect()
}

/// `Σ_l Ψ_l x(k-l)` for a window `x[l] = x(k-l)`.
pub fn psi_apply(taps: &[Matrix2<Complex64>], window: &[Vector2<f64>]) -> Sample {
    taps.iter()
        .zip(window)
        .map(|(t, x)| t * x.map(|v| Complex64::new(v, 0.0)))
        .sum()
}

/// BPSK pair stream `x(k) = (x_a(k), x_b(k - ι))` over `lo ≤ k < hi`.
pub(crate) struct PairStream {
    lo: i64,
    pairs: Vec<Vector2<f64>>,
}

impl PairStream {
    pub(crate) fn new<R: Rng + ?Sized>(
        c_a: &[u8],
        c_b: &[u8],
        iota: i64,
        boundary: Boundary,
        lo: i64,
        hi: i64,
        rng: &mut R,
    ) -> Self {
        let n = c_a.len() as i64;
        let mut draw = |bits: &[u8], i: i64| -> f64 {
            if (0..n).contains(&i) {
                bpsk(bits[i as usize])
            } else {
                match boundary {
                    Boundary::Silent => 0.0,
                    Boundary::Continuous => bpsk(rng.random::<bool>() as u8),
                }
            }
        };
        let pairs = (lo..hi)
            .map(|k| {
                let a = draw(c_a, k);
                let b = draw(c_b, k - iota);
                Vector2::new(a, b)
            })
            .collect();
        PairStream { lo, pairs }
    }

    pub(crate) fn get(&self, k: i64) -> Vector2<f64> {
        let i = k - self.lo;
        if i < 0 || i as usize >= self.pairs.len() {
            Vector2::zeros()
        } else {
            self.pairs[i as usize]
        }
    }
}

fn check_lengths(c_a: &[u8], c_b: &[u8]) -> Result<()> {
    if c_a.len() != c_b.len() {
        return Err(Error::LengthMismatch { expected: c_a.len(), got: c_b.len() });
    }
    Ok(())
}

pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(std * re, std * im)
}

/// Noiseless whitened-domain output for `k ∈ [0, N)`.
pub fn whitened_signal<R: Rng + ?Sized>(
    c_a: &[u8],
    c_b: &[u8],
    ch: &ChannelRealization,
    rng: &mut R,
) -> Result<Vec<Sample>> {
    check_lengths(c_a, c_b)?;
    let n = c_a.len() as i64;
    let mem = ch.taps.len() as i64 - 1;
    let stream = PairStream::new(c_a, c_b, ch.iota, ch.boundary, -mem, n, rng);
    let mut window = vec![Vector2::zeros(); ch.taps.len()];
    Ok((0..n)
        .map(|k| {
            for (l, w) in window.iter_mut().enumerate() {
                *w = stream.get(k - l as i64);
            }
            psi_apply(&ch.taps, &window)
        })
        .collect())
}

/// `r(k) = Ψ(window at k) + n(k)` for `k ∈ [0, N)`.
pub fn simulate_whitened<R: Rng + ?Sized>(
    c_a: &[u8],
    c_b: &[u8],
    ch: &ChannelRealization,
    rng: &mut R,
) -> Result<Vec<Sample>> {
    let mut r = whitened_signal(c_a, c_b, ch, rng)?;
    if ch.sigma2 > 0.0 {
        let std = ch.sigma2.sqrt();
        for s in r.iter_mut() {
            s[0] += complex_gaussian(rng, std);
            s[1] += complex_gaussian(rng, std);
        }
    }
    Ok(r)
}
