use crate::error::{Error, Result};
use crate::gfcode::LogSumMode;
use crate::ldpc::{syndrome, ParityCheckMatrix};

/// Outcome of binary sum-product decoding.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryDecode {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
    pub posterior: Vec<f64>,
}

/// Pairwise box-plus of two bit LLRs, `ln(P(0)/P(1))` convention.
#[inline]
pub fn boxplus2(a: f64, b: f64, mode: LogSumMode) -> f64 {
    let s = a.signum() * b.signum() * a.abs().min(b.abs());
    match mode {
        LogSumMode::MaxLog => s,
        LogSumMode::Exact => s + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p(),
    }
}

/// Flooding sum-product on `h` from channel LLRs; stops at the first
/// iteration whose hard decision satisfies every check.
pub fn binary_spa(h: &ParityCheckMatrix, llr: &[f64], iters: usize, mode: LogSumMode) -> Result<BinaryDecode> {
    if llr.len() != h.n() {
        return Err(Error::LengthMismatch { expected: h.n(), got: llr.len() });
    }
    let mut row_start = vec![0];
    let mut var_edges: Vec<Vec<usize>> = vec![Vec::new(); h.n()];
    let mut e = 0;
    for row in h.rows() {
        for &n in row {
            var_edges[n].push(e);
            e += 1;
        }
        row_start.push(e);
    }
    let mut v2c = vec![0.0; e];
    let mut c2v = vec![0.0; e];
    for (n, edges) in var_edges.iter().enumerate() {
        for &e in edges {
            v2c[e] = llr[n];
        }
    }
    let mut post = llr.to_vec();
    let mut bits: Vec<u8> = post.iter().map(|&l| u8::from(l < 0.0)).collect();
    let (mut fwd, mut bwd) = (Vec::new(), Vec::new());
    for it in 1..=iters {
        for w in row_start.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let d = hi - lo;
            if d == 1 {
                c2v[lo] = 0.0;
                continue;
            }
            fwd.clear();
            fwd.push(v2c[lo]);
            for j in 1..d {
                let f = boxplus2(fwd[j - 1], v2c[lo + j], mode);
                fwd.push(f);
            }
            bwd.clear();
            bwd.resize(d, 0.0);
            bwd[d - 1] = v2c[hi - 1];
            for j in (0..d - 1).rev() {
                bwd[j] = boxplus2(v2c[lo + j], bwd[j + 1], mode);
            }
            c2v[lo] = bwd[1];
            c2v[hi - 1] = fwd[d - 2];
            for j in 1..d - 1 {
                c2v[lo + j] = boxplus2(fwd[j - 1], bwd[j + 1], mode);
            }
        }
        for (n, edges) in var_edges.iter().enumerate() {
            let p = llr[n] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
            for &e in edges {
                v2c[e] = p - c2v[e];
            }
            post[n] = p;
            bits[n] = u8::from(p < 0.0);
        }
        if syndrome(h, &bits)? {
            return Ok(BinaryDecode { bits, converged: true, iterations: it, posterior: post });
        }
    }
    Ok(BinaryDecode { bits, converged: false, iterations: iters, posterior: post })
}
