//! Matched-filter-domain simulation and the whitening filter.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_lengths, ChannelRealization, NoiseCovariance, PairStream, Sample};
use crate::error::{Error, Result};

/// Extra samples simulated past the frame so the backward whitening
/// recursion has settled by the time it reaches the frame.
pub const WHITEN_MARGIN: usize = 2048;

/// Samples `y(k)` for `k ∈ [start, start + y.len())`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchedFilterOutput {
    pub start: i64,
    pub y: Vec<Sample>,
}

impl MatchedFilterOutput {
    pub fn at(&self, k: i64) -> Option<&Sample> {
        let i = k - self.start;
        if i < 0 {
            None
        } else {
            self.y.get(i as usize)
        }
    }

    /// The samples for `k ∈ [0, n)`.
    pub fn frame(&self, n: usize) -> Vec<Sample> {
        (0..n as i64).map(|k| self.at(k).copied().unwrap_or_else(Vector2::zeros)).collect()
    }
}

fn gained(ch: &ChannelRealization, x: Vector2<f64>) -> Sample {
    Vector2::new(ch.h_a() * x[0], ch.h_b() * x[1])
}

fn real_to_complex(m: &Matrix2<f64>) -> Matrix2<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// Noiseless `y(k) = Σ_l Λ(l) diag(h) x(k-l)` for `k ∈ [lo, hi)`.
pub fn matched_filter_signal<R: Rng + ?Sized>(
    c_a: &[u8],
    c_b: &[u8],
    ch: &ChannelRealization,
    lo: i64,
    hi: i64,
    rng: &mut R,
) -> Result<MatchedFilterOutput> {
    check_lengths(c_a, c_b)?;
    let cov = ch.covariance();
    let mem = cov.memory() as i64;
    let stream = PairStream::new(c_a, c_b, ch.iota(), ch.boundary(), lo - mem, hi + mem, rng);
    let lam: Vec<Matrix2<Complex64>> = (-mem..=mem).map(|l| real_to_complex(&cov.at(l))).collect();
    let y = (lo..hi)
        .map(|k| {
            (-mem..=mem)
                .map(|l| lam[(l + mem) as usize] * gained(ch, stream.get(k - l)))
                .sum()
        })
        .collect();
    Ok(MatchedFilterOutput { start: lo, y })
}

/// Lower band of a Cholesky factor; row `i` holds columns `i - band ..= i`.
struct BandedCholesky {
    band: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    /// Factors the covariance of `len` consecutive 2-vectors drawn with
    /// block-Toeplitz covariance `Λ`.
    fn new(cov: &NoiseCovariance, len: usize) -> Result<Self> {
        let band = 2 * cov.memory() + 1;
        let d = 2 * len;
        let w = band + 1;
        let lams: Vec<Matrix2<f64>> = (0..=cov.memory() as i64).map(|l| cov.at(l)).collect();
        let entry = |i: usize, j: usize| -> f64 {
            let (ki, u) = (i / 2, i % 2);
            let (kj, v) = (j / 2, j % 2);
            let lag = ki - kj;
            if lag >= lams.len() {
                0.0
            } else {
                lams[lag][(u, v)]
            }
        };
        let mut data = vec![0.0; d * w];
        for i in 0..d {
            let j0 = i.saturating_sub(band);
            for j in j0..=i {
                let mut s = entry(i, j);
                if i == j {
                    s += 1e-12;
                }
                for m in j0.max(j.saturating_sub(band))..j {
                    s -= data[i * w + m + band - i] * data[j * w + m + band - j];
                }
                let v = if i == j {
                    if s <= 0.0 {
                        return Err(Error::CovarianceAssembly(format!(
                            "matrix not positive definite at row {i} (pivot {s:.3e})"
                        )));
                    }
                    s.sqrt()
                } else {
                    s / data[j * w + band]
                };
                data[i * w + j + band - i] = v;
            }
        }
        Ok(BandedCholesky { band, data })
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let b = self.band;
        let width = b + 1;
        (0..w.len())
            .map(|i| {
                let j0 = i.saturating_sub(b);
                (j0..=i).map(|j| self.data[i * width + j + b - i] * w[j]).sum()
            })
            .collect()
    }
}

/// `len` samples of complex noise with `E[ν(k) ν(j)^H] = 2σ² Λ(k - j)`,
/// drawn through a banded block Cholesky factor.
pub fn colored_noise<R: Rng + ?Sized>(
    cov: &NoiseCovariance,
    len: usize,
    sigma2: f64,
    rng: &mut R,
) -> Result<Vec<Sample>> {
    let chol = BandedCholesky::new(cov, len)?;
    let std = sigma2.sqrt();
    let mut draw = || -> Vec<f64> {
        let w: Vec<f64> = (0..2 * len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        chol.apply(&w)
    };
    let re = draw();
    let im = draw();
    Ok((0..len)
        .map(|k| {
            Vector2::new(
                Complex64::new(std * re[2 * k], std * im[2 * k]),
                Complex64::new(std * re[2 * k + 1], std * im[2 * k + 1]),
            )
        })
        .collect())
}

/// Matched-filter outputs with colored noise over `k ∈ [-L, N + ι⁺ + L + margin)`.
pub fn simulate_matched_filter_domain<R: Rng + ?Sized>(
    c_a: &[u8],
    c_b: &[u8],
    ch: &ChannelRealization,
    rng: &mut R,
) -> Result<MatchedFilterOutput> {
    let mem = ch.covariance().memory() as i64;
    let lo = -mem;
    let hi = c_a.len() as i64 + ch.iota().max(0) + mem + WHITEN_MARGIN as i64;
    let mut out = matched_filter_signal(c_a, c_b, ch, lo, hi, rng)?;
    if ch.sigma2() > 0.0 {
        let noise = colored_noise(ch.covariance(), out.y.len(), ch.sigma2(), rng)?;
        for (y, n) in out.y.iter_mut().zip(noise) {
            *y += n;
        }
    }
    Ok(out)
}

/// Inverts `y = F^T(z^{-1}) r` by the anticausal recursion
/// `r(k) = F_0^{-T} (y(k) - Σ_{i≥1} F_i^T r(k+i))`, taking `r = 0` past the
/// last sample.
pub fn whiten(y: &MatchedFilterOutput, f: &[Matrix2<f64>]) -> Result<MatchedFilterOutput> {
    let f0t_inv = f[0]
        .transpose()
        .try_inverse()
        .filter(|m| m.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::ChannelConfig("F_0 is singular: the matched-filter outputs cannot be whitened".into()))?;
    let f0t_inv = real_to_complex(&f0t_inv);
    let ft: Vec<Matrix2<Complex64>> = f.iter().map(|m| real_to_complex(&m.transpose())).collect();
    let n = y.y.len();
    let mut r = vec![Vector2::zeros(); n];
    for k in (0..n).rev() {
        let mut acc = y.y[k];
        for (i, t) in ft.iter().enumerate().skip(1) {
            if k + i < n {
                acc -= t * r[k + i];
            }
        }
        r[k] = f0t_inv * acc;
    }
    Ok(MatchedFilterOutput { start: y.start, y: r })
}
