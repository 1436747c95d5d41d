//! GF(4) arithmetic and log-domain probability vectors.
//!
//! A source-bit pair `(c_a, c_b)` is packed into a field element
//! `c_a + c_b·D` of GF(2)[D]/(1 + D + D²). The element index doubles as the
//! symbol label: `α_0 = 0`, `α_1 = 1`, `α_2 = D`, `α_3 = 1 + D`, so bit 0 is
//! the A bit and bit 1 is the B bit. Only field addition is needed, since
//! every parity-check coefficient is 0 or 1.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Sub};

use crate::error::{Error, Result};

/// Lowest log-probability (relative to the vector maximum) allowed into a
/// Jacobian sum.
pub const SATURATION_FLOOR: f64 = -50.0;

/// Element of GF(4) stored as a packed bit pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf4(u8);

impl Gf4 {
    pub const ZERO: Gf4 = Gf4(0);
    pub const ONE: Gf4 = Gf4(1);
    pub const D: Gf4 = Gf4(2);
    pub const ONE_PLUS_D: Gf4 = Gf4(3);
    pub const ALL: [Gf4; 4] = [Gf4(0), Gf4(1), Gf4(2), Gf4(3)];

    pub fn new(value: u8) -> Option<Gf4> {
        (value < 4).then_some(Gf4(value))
    }

    /// Packs `a + b·D`.
    pub fn pack(a: u8, b: u8) -> Gf4 {
        Gf4((a & 1) | ((b & 1) << 1))
    }

    pub fn unpack(self) -> (u8, u8) {
        (self.0 & 1, self.0 >> 1)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bit_a(self) -> u8 {
        self.0 & 1
    }

    pub fn bit_b(self) -> u8 {
        self.0 >> 1
    }

    /// The network-coded bit `c_a ⊕ c_b`.
    pub fn xor_bit(self) -> u8 {
        (self.0 ^ (self.0 >> 1)) & 1
    }
}

pub fn gf4_add(x: Gf4, y: Gf4) -> Gf4 {
    Gf4(x.0 ^ y.0)
}

pub fn xor_extract(x: Gf4) -> u8 {
    x.xor_bit()
}

impl Add for Gf4 {
    type Output = Gf4;
    fn add(self, rhs: Gf4) -> Gf4 {
        gf4_add(self, rhs)
    }
}

// Characteristic 2: subtraction and addition coincide.
impl Sub for Gf4 {
    type Output = Gf4;
    fn sub(self, rhs: Gf4) -> Gf4 {
        gf4_add(self, rhs)
    }
}

impl fmt::Display for Gf4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.0 {
            0 => "0",
            1 => "1",
            2 => "D",
            _ => "1+D",
        };
        f.write_str(s)
    }
}

/// Whether a Jacobian sum keeps its correction term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum LogSumMode {
    #[default]
    Exact,
    MaxLog,
}

/// `ln(e^a + e^b)`, or `max(a, b)` in max-log mode.
#[inline]
pub fn jacobian_log_sum(a: f64, b: f64, mode: LogSumMode) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    match mode {
        LogSumMode::MaxLog => hi,
        LogSumMode::Exact => hi + (lo - hi).exp().ln_1p(),
    }
}

/// Jacobian sum over a slice; `-inf` for an empty slice.
#[inline]
pub fn log_sum(values: &[f64], mode: LogSumMode) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || mode == LogSumMode::MaxLog {
        return max;
    }
    max + values.iter().map(|&v| (v - max).exp()).sum::<f64>().ln()
}

/// Which component of a normalized vector is pinned to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    /// `l[0] = 0`; the decoder's message convention.
    Zero,
    /// `max(l) = 0`; the detector's convention.
    Max,
}

/// Log-probabilities (up to an additive constant) of the four GF(4) symbols.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LlrVec4(pub [f64; 4]);

impl LlrVec4 {
    pub const ZERO: LlrVec4 = LlrVec4([0.0; 4]);

    pub fn new(l: [f64; 4]) -> Self {
        LlrVec4(l)
    }

    /// All mass on `symbol`, with the other components at the saturation floor.
    pub fn certain(symbol: Gf4) -> Self {
        let mut l = [SATURATION_FLOOR; 4];
        l[symbol.index()] = 0.0;
        LlrVec4(l)
    }

    pub fn from_probs(p: [f64; 4]) -> Self {
        LlrVec4(p.map(f64::ln))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the largest component; ties go to the lowest index.
    pub fn argmax(&self) -> Gf4 {
        let mut best = 0;
        for i in 1..4 {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Gf4(best as u8)
    }

    pub fn normalize(&self, anchor: Anchor) -> Result<LlrVec4> {
        let max = self.max();
        if max == f64::NEG_INFINITY || max.is_nan() {
            return Err(Error::DegenerateMessage);
        }
        Ok(match anchor {
            Anchor::Max => LlrVec4(self.0.map(|v| v - max)),
            Anchor::Zero => {
                // Infinite components are floored first so the shift stays finite.
                let s = if self.is_finite() { *self } else { self.saturated() };
                let z = s.0[0];
                LlrVec4(s.0.map(|v| v - z))
            }
        })
    }

    /// Max-anchored copy with every component clamped to [`SATURATION_FLOOR`].
    pub fn saturated(&self) -> LlrVec4 {
        let max = self.max();
        LlrVec4(self.0.map(|v| (v - max).max(SATURATION_FLOOR)))
    }

    /// Normalized probabilities.
    pub fn probs(&self) -> [f64; 4] {
        let max = self.max();
        let e = self.0.map(|v| (v - max).exp());
        let s: f64 = e.iter().sum();
        e.map(|v| v / s)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }
}

impl Index<usize> for LlrVec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for LlrVec4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for LlrVec4 {
    type Output = LlrVec4;
    fn add(self, rhs: LlrVec4) -> LlrVec4 {
        LlrVec4([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }
}

impl Sub for LlrVec4 {
    type Output = LlrVec4;
    fn sub(self, rhs: LlrVec4) -> LlrVec4 {
        LlrVec4([
            self.0[0] - rhs.0[0],
            self.0[1] - rhs.0[1],
            self.0[2] - rhs.0[2],
            self.0[3] - rhs.0[3],
        ])
    }
}

/// GF(4) box-plus: the log-distribution of `v1 + v2` for independent `v1`, `v2`.
///
/// `L(v1+v2 = α_i) = ln Σ_x e^{L1(x) + L2(α_i - x)} - ln Σ_x e^{L1(x) + L2(-x)}`,
/// so the result is zero-anchored. Inputs are saturated before summation.
pub fn boxplus(a: &LlrVec4, b: &LlrVec4, mode: LogSumMode) -> LlrVec4 {
    let a = a.saturated();
    let b = b.saturated();
    let mut out = [0.0; 4];
    match mode {
        LogSumMode::MaxLog => {
            for (i, o) in out.iter_mut().enumerate() {
                let mut m = f64::NEG_INFINITY;
                for x in 0..4 {
                    m = m.max(a.0[x] + b.0[i ^ x]);
                }
                *o = m;
            }
        }
        LogSumMode::Exact => {
            // Both inputs are max-anchored and floored, so the exponentials
            // lie in [e^-50, 1] and their products cannot underflow.
            let ea = a.0.map(f64::exp);
            let eb = b.0.map(f64::exp);
            for (i, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                for x in 0..4 {
                    s += ea[x] * eb[i ^ x];
                }
                *o = s.ln();
            }
        }
    }
    let z = out[0];
    LlrVec4(out.map(|v| v - z))
}
