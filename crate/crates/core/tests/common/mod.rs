//! Independent reference computations shared by the integration tests and
//! the acceptance runner.
#![allow(dead_code)]

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use pnc_core::gfcode::LlrVec4;
use pnc_core::ldpc::ParityCheckMatrix;
use pnc_core::macchannel::{NoiseCovariance, Sample};

fn bpsk(bit: usize) -> f64 {
    1.0 - 2.0 * bit as f64
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Symbol posteriors by enumerating every pre-frame state and every frame
/// sequence. Pre-frame symbols are uniform.
pub fn brute_force_posteriors(
    taps: &[Matrix2<Complex64>],
    obs: &[Option<Sample>],
    priors: &[LlrVec4],
    sigma2: f64,
) -> Vec<[f64; 4]> {
    let n = obs.len();
    let mem = taps.len() - 1;
    let total = n + mem;
    let mut logw = Vec::with_capacity(1 << (2 * total));
    for seq in 0..(1usize << (2 * total)) {
        // digit j = symbol at time j - mem
        let sym = |t: i64| (seq >> (2 * (t + mem as i64) as usize)) & 3;
        let mut w = 0.0;
        for k in 0..n as i64 {
            w += priors[k as usize][sym(k)];
            if let Some(r) = &obs[k as usize] {
                let mut mu = Vector2::<Complex64>::zeros();
                for (l, t) in taps.iter().enumerate() {
                    let u = sym(k - l as i64);
                    let x = Vector2::new(Complex64::new(bpsk(u & 1), 0.0), Complex64::new(bpsk(u >> 1), 0.0));
                    mu += t * x;
                }
                w -= (r - mu).norm_squared() / (2.0 * sigma2);
            }
        }
        logw.push(w);
    }
    let z = log_sum_exp(&logw);
    let mut post = vec![[0.0; 4]; n];
    for (seq, w) in logw.iter().enumerate() {
        let p = (w - z).exp();
        for (k, pk) in post.iter_mut().enumerate() {
            pk[(seq >> (2 * (k + mem))) & 3] += p;
        }
    }
    post
}

/// Message to edge `i` of a GF(4) check by summing over every assignment of
/// the other edges whose XOR equals each value. Zero-anchored.
pub fn constrained_marginal(msgs: &[LlrVec4], i: usize) -> [f64; 4] {
    let others: Vec<&LlrVec4> = msgs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, m)| m).collect();
    let mut terms: [Vec<f64>; 4] = Default::default();
    for a in 0..(1usize << (2 * others.len())) {
        let mut s = 0usize;
        let mut w = 0.0;
        for (j, m) in others.iter().enumerate() {
            let v = (a >> (2 * j)) & 3;
            s ^= v;
            w += m[v];
        }
        terms[s].push(w);
    }
    let l = terms.map(|t| log_sum_exp(&t));
    [0.0, l[1] - l[0], l[2] - l[0], l[3] - l[0]]
}

/// Matched-filter outputs for rectangular pulses by integrating the
/// piecewise-constant received waveform over each user's symbol window.
pub fn rect_waveform_integrals(c_a: &[u8], c_b: &[u8], eps: f64, h_a: Complex64, h_b: Complex64) -> Vec<Sample> {
    let n = c_a.len() as i64;
    let sym = |bits: &[u8], i: i64| if (0..n).contains(&i) { bpsk(bits[i as usize] as usize) } else { 0.0 };
    let r = |t: f64| h_a * sym(c_a, t.floor() as i64) + h_b * sym(c_b, (t - eps).floor() as i64);
    let integrate = |lo: f64, hi: f64| {
        let mut cuts: Vec<f64> = vec![lo, hi];
        for k in (lo.floor() as i64 - 1)..=(hi.ceil() as i64 + 1) {
            for b in [k as f64, k as f64 + eps] {
                if b > lo && b < hi {
                    cuts.push(b);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2).map(|w| r(0.5 * (w[0] + w[1])) * (w[1] - w[0])).sum::<Complex64>()
    };
    (0..n)
        .map(|k| Vector2::new(integrate(k as f64, k as f64 + 1.0), integrate(k as f64 + eps, k as f64 + 1.0 + eps)))
        .collect()
}

/// `max_ω ‖Ω(ω) − F(ω)^H F(ω)‖_F` over `grid` points of the unit circle.
pub fn spectral_residual(cov: &NoiseCovariance, f: &[Matrix2<f64>], grid: usize) -> f64 {
    let l = cov.memory() as i64;
    (0..grid)
        .map(|g| {
            let w = 2.0 * std::f64::consts::PI * g as f64 / grid as f64;
            let mut omega = Matrix2::<Complex64>::zeros();
            for k in -l..=l {
                omega += cov.at(k).map(|v| Complex64::new(v, 0.0)) * Complex64::from_polar(1.0, -w * k as f64);
            }
            let mut fw = Matrix2::<Complex64>::zeros();
            for (i, fi) in f.iter().enumerate() {
                fw += fi.map(|v| Complex64::new(v, 0.0)) * Complex64::from_polar(1.0, -w * i as f64);
            }
            (omega - fw.adjoint() * fw).norm()
        })
        .fold(0.0, f64::max)
}

/// `H c = 0` by direct row parity.
pub fn syndrome_zero(h: &ParityCheckMatrix, c: &[u8]) -> bool {
    h.rows().iter().all(|row| row.iter().map(|&j| c[j] as u32).sum::<u32>() % 2 == 0)
}

/// Bitwise long division CRC-16/CCITT-FALSE over bytes.
pub fn crc16_bitwise(data: &[u8]) -> u16 {
    let mut crc: u16 = 0xFFFF;
    for &byte in data {
        for i in (0..8).rev() {
            let bit = (byte >> i) & 1 == 1;
            let top = crc & 0x8000 != 0;
            crc <<= 1;
            if top != bit {
                crc ^= 0x1021;
            }
        }
    }
    crc
}

/// `P(X ≥ k)` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_upper_tail(n: u64, k: u64) -> f64 {
    let ln_choose = |n: u64, r: u64| -> f64 { (1..=r).map(|i| ((n - r + i) as f64 / i as f64).ln()).sum() };
    (k..=n).map(|r| (ln_choose(n, r) - n as f64 * std::f64::consts::LN_2).exp()).sum()
}

/// Eb/N0 where a curve first crosses `target`, interpolating log10 BER
/// linearly between neighbouring points with nonzero BER.
pub fn crossing(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.1 > 0.0).cloned().collect();
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && y1 <= target {
            let (l0, l1, lt) = (y0.log10(), y1.log10(), target.log10());
            if (l0 - l1).abs() < 1e-15 {
                return Some(x0);
            }
            return Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1));
        }
    }
    None
}
