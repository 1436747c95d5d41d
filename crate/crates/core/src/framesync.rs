//! Integer frame offsets between the two sources.
//!
//! With a cyclic code the relay decodes `c_a ⊕ c_b^{(ι)}` without knowing ι,
//! after erasing the samples at both frame edges where the other frame
//! interferes. The offset is resolved afterwards by scanning cyclic shifts
//! for a CRC pass.

use crc::{Crc, CRC_16_IBM_3740};
use serde::{Deserialize, Serialize};

use crate::detector::BMac;
use crate::error::{Error, Result};
use crate::jointdec::{log_g_spa_posteriors, Schedule};
use crate::ldpc::{cyclic_shift, xor_words, GeneratorForm, ParityCheckMatrix};
use crate::macchannel::Sample;

/// CRC-16/CCITT-FALSE: polynomial 0x1021, init 0xFFFF, no reflection, no
/// final XOR. Catalogued as CRC-16/IBM-3740.
const CRC16: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);
pub const CRC_BITS: usize = 16;

/// Signed integer offset with its admissible bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameOffset {
    pub iota: i64,
    pub iota_max: usize,
}

impl FrameOffset {
    pub fn new(iota: i64, iota_max: usize, n: usize) -> Result<Self> {
        if 2 * iota_max >= n {
            return Err(Error::FrameOffset(format!("iota_max {iota_max} too large for N = {n}")));
        }
        if iota.unsigned_abs() as usize > iota_max {
            return Err(Error::FrameOffset(format!("|iota| = {} exceeds {iota_max}", iota.abs())));
        }
        Ok(FrameOffset { iota, iota_max })
    }

    /// Candidate offsets `-ι_max..=ι_max`, smallest magnitude first.
    pub fn candidates(iota_max: usize) -> Vec<i64> {
        let m = iota_max as i64;
        let mut c: Vec<i64> = (-m..=m).collect();
        c.sort_by_key(|l| (l.abs(), *l));
        c
    }
}

/// Erases the first and last `iota_max` samples.
pub fn zero_pad_interference(r: &[Sample], iota_max: usize) -> Result<Vec<Option<Sample>>> {
    let n = r.len();
    if 2 * iota_max >= n && iota_max > 0 {
        return Err(Error::FrameOffset(format!("iota_max {iota_max} too large for N = {n}")));
    }
    Ok(r.iter()
        .enumerate()
        .map(|(k, s)| (k >= iota_max && k + iota_max < n).then_some(*s))
        .collect())
}

/// `10·log10((N − 2ι)/N)`.
pub fn snr_loss_db(n: usize, iota: usize) -> Result<f64> {
    if n == 0 || 2 * iota >= n {
        return Err(Error::FrameOffset(format!("need 0 ≤ 2ι < N, got ι = {iota}, N = {n}")));
    }
    Ok(10.0 * ((n - 2 * iota) as f64 / n as f64).log10())
}

/// Packs bits MSB-first into bytes, left-padding with zeros to a whole byte.
fn pack_msb_first(bits: &[u8]) -> Vec<u8> {
    let pad = (8 - bits.len() % 8) % 8;
    let padded: Vec<u8> = std::iter::repeat_n(0, pad).chain(bits.iter().map(|b| b & 1)).collect();
    padded.chunks(8).map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | b)).collect()
}

/// CRC-16/CCITT-FALSE of a bit string. Lengths that are not a multiple of 8
/// are left-padded with zero bits.
pub fn crc16(bits: &[u8]) -> u16 {
    CRC16.checksum(&pack_msb_first(bits))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrcFrame {
    pub message: Vec<u8>,
    pub crc: u16,
}

impl CrcFrame {
    /// `message ∥ crc`, CRC MSB first.
    pub fn bits(&self) -> Vec<u8> {
        let mut out = self.message.clone();
        out.extend((0..CRC_BITS).rev().map(|i| ((self.crc >> i) & 1) as u8));
        out
    }
}

pub fn crc16_append(message: &[u8]) -> Result<CrcFrame> {
    if message.is_empty() {
        return Err(Error::Config("CRC message must be nonempty".into()));
    }
    Ok(CrcFrame { message: message.to_vec(), crc: crc16(message) })
}

pub fn crc16_check(frame: &[u8]) -> bool {
    if frame.len() <= CRC_BITS {
        return false;
    }
    let (msg, tail) = frame.split_at(frame.len() - CRC_BITS);
    let crc = tail.iter().fold(0u16, |acc, &b| (acc << 1) | (b & 1) as u16);
    crc16(msg) == crc
}

fn unique_pass(passes: Vec<i64>) -> Result<i64> {
    match passes.len() {
        0 => Err(Error::NoDelayCandidate),
        1 => Ok(passes[0]),
        _ => Err(Error::AmbiguousDelay { candidates: passes }),
    }
}

/// Finds ι from the decoder's B stream `ĉ_b^{(ι)}`: the unique shift `l`
/// whose un-shifted codeword carries a message that passes the CRC.
pub fn resolve_delay_crc(b_shifted: &[u8], code: &GeneratorForm, iota_max: usize) -> Result<i64> {
    let mut passes = Vec::new();
    for l in FrameOffset::candidates(iota_max) {
        let info = code.extract_message(&cyclic_shift(b_shifted, -l))?;
        if crc16_check(&info) {
            passes.push(l);
        }
    }
    unique_pass(passes)
}

/// Aggregate decoder confidence: `Σ_n (max L̃_n − mean L̃_n)`.
pub fn posterior_magnitude(posteriors: &[crate::gfcode::LlrVec4]) -> f64 {
    posteriors
        .iter()
        .map(|p| {
            let p = p.saturated();
            p.max() - p.0.iter().sum::<f64>() / 4.0
        })
        .sum()
}

/// Estimates ι by decoding once per candidate erasure pattern and keeping the
/// most confident one. For `l > 0` the first `l` samples are erased, for
/// `l < 0` the last `|l|`. Ties go to the smallest `|l|`.
pub fn resolve_delay_llr(
    r: &[Sample],
    h: &ParityCheckMatrix,
    bmac: &BMac,
    iota_max: usize,
    schedule: Schedule,
) -> Result<i64> {
    let n = r.len();
    if 2 * iota_max >= n && iota_max > 0 {
        return Err(Error::FrameOffset(format!("iota_max {iota_max} too large for N = {n}")));
    }
    let mut best = (f64::NEG_INFINITY, 0i64);
    for l in FrameOffset::candidates(iota_max) {
        let obs: Vec<Option<Sample>> = r
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let k = k as i64;
                let erased = if l >= 0 { k < l } else { k >= n as i64 + l };
                (!erased).then_some(*s)
            })
            .collect();
        let post = log_g_spa_posteriors(h, bmac, &obs, schedule)?;
        let m = posterior_magnitude(&post);
        if m > best.0 {
            best = (m, l);
        }
    }
    Ok(best.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    A,
    B,
}

/// What a source extracts from the relay's broadcast.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Recovered {
    /// The other source's message, CRC removed.
    pub message: Vec<u8>,
    pub iota: i64,
}

/// Broadcast-phase recovery of the other source's message from `ĉ_r`.
///
/// A computes `ĉ_r ⊕ c_a = c_b^{(ι)}` and scans shifts. B shifts its own
/// codeword by each candidate, XORs with `ĉ_r`, and tests the result as A's
/// codeword.
pub fn broadcast_recover(
    relay: &[u8],
    own: &[u8],
    role: Role,
    iota_max: usize,
    code: &GeneratorForm,
) -> Result<Recovered> {
    if relay.len() != own.len() {
        return Err(Error::LengthMismatch { expected: relay.len(), got: own.len() });
    }
    let mut hits = Vec::new();
    match role {
        Role::A => {
            let b_shifted = xor_words(relay, own);
            for l in FrameOffset::candidates(iota_max) {
                let info = code.extract_message(&cyclic_shift(&b_shifted, -l))?;
                if crc16_check(&info) {
                    hits.push((l, info));
                }
            }
        }
        Role::B => {
            for l in FrameOffset::candidates(iota_max) {
                let c_a = xor_words(relay, &cyclic_shift(own, l));
                let info = code.extract_message(&c_a)?;
                if crc16_check(&info) {
                    hits.push((l, info));
                }
            }
        }
    }
    // Several passes: lowest |l| wins, negative first on equal magnitude.
    let (iota, mut message) = hits
        .into_iter()
        .min_by_key(|h| (h.0.abs(), h.0))
        .ok_or(Error::NoDelayCandidate)?;
    message.truncate(message.len() - CRC_BITS);
    Ok(Recovered { message, iota })
}
