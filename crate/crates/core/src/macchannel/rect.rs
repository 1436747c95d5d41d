//! Rectangular-pulse sufficient statistics.
//!
//! With rectangular pulses each symbol period splits at the B transition into
//! `[k, k+ε)`, where A sends `x_a(k)` and B still sends `x_b(k-1)`, and
//! `[k+ε, k+1)`, where both send their k-th symbols. Averaging over the two
//! pieces gives `y_e(k)` and `y_o(k)`.

use nalgebra::Vector2;
use num_complex::Complex64;
use rand::Rng;

use super::{check_lengths, complex_gaussian, ChannelRealization, PairStream, PulseKind, Sample};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RectangularSamples {
    /// `y_e(k)` for `k ∈ [0, N]`.
    pub y_e: Vec<Complex64>,
    /// `y_o(k)` for `k ∈ [0, N]`.
    pub y_o: Vec<Complex64>,
}

/// `y_e(k) = h_a x_a(k) + h_b x_b(k-1) + w_e(k)` and
/// `y_o(k) = h_a x_a(k) + h_b x_b(k) + w_o(k)`, with noise variances σ²/ε
/// and σ²/(1-ε) per real dimension.
pub fn rectangular_samples<R: Rng + ?Sized>(
    c_a: &[u8],
    c_b: &[u8],
    ch: &ChannelRealization,
    rng: &mut R,
) -> Result<RectangularSamples> {
    check_lengths(c_a, c_b)?;
    if ch.pulse().kind() != PulseKind::Rectangular {
        return Err(Error::ChannelConfig("rectangular sampling needs rectangular pulses".into()));
    }
    let eps = ch.epsilon();
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::DegenerateSampling(eps));
    }
    let n = c_a.len() as i64;
    let stream = PairStream::new(c_a, c_b, ch.iota(), ch.boundary(), -1, n + 1, rng);
    let (ha, hb) = (ch.h_a(), ch.h_b());
    let sd_e = (ch.sigma2() / eps).sqrt();
    let sd_o = (ch.sigma2() / (1.0 - eps)).sqrt();
    let mut y_e = Vec::with_capacity(n as usize + 1);
    let mut y_o = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        let now = stream.get(k);
        let prev = stream.get(k - 1);
        let mut e = ha * now[0] + hb * prev[1];
        let mut o = ha * now[0] + hb * now[1];
        if ch.sigma2() > 0.0 {
            e += complex_gaussian(rng, sd_e);
            o += complex_gaussian(rng, sd_o);
        }
        y_e.push(e);
        y_o.push(o);
    }
    Ok(RectangularSamples { y_e, y_o })
}

/// Matched-filter outputs rebuilt from the split samples:
/// `y_a(k) = ε y_e(k) + (1-ε) y_o(k)`, `y_b(k) = (1-ε) y_o(k) + ε y_e(k+1)`.
pub fn rectangular_to_matched(s: &RectangularSamples, epsilon: f64) -> Vec<Sample> {
    let n = s.y_o.len().saturating_sub(1);
    (0..n)
        .map(|k| {
            Vector2::new(
                s.y_e[k] * epsilon + s.y_o[k] * (1.0 - epsilon),
                s.y_o[k] * (1.0 - epsilon) + s.y_e[k + 1] * epsilon,
            )
        })
        .collect()
}
