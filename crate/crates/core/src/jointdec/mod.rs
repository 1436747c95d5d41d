//! Joint LDPC and network-coding decoders at the relay.
//!
//! [`log_g_spa`] decodes the virtual GF(4) codeword `c_a + c_b·D` by passing
//! messages between the BCJR detector and a flooding sum-product decoder on
//! the shared binary parity-check matrix. [`jcnc_decode`] is the disjoint
//! baseline: one detector pass, collapse to XOR-bit LLRs, binary decoding.

mod binary;
mod check;

use serde::{Deserialize, Serialize};

use crate::detector::BMac;
use crate::error::{Error, Result};
use crate::gfcode::{jacobian_log_sum, Anchor, Gf4, LlrVec4, LogSumMode};
use crate::ldpc::{syndrome, ParityCheckMatrix};
use crate::macchannel::Sample;

pub use binary::binary_spa;
pub use check::check_node_update;
use check::{check_node_update_into, Scratch};

/// Outer detector rounds and inner LDPC iterations per round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub outer: usize,
    pub inner: usize,
}

impl Schedule {
    pub fn new(outer: usize, inner: usize) -> Result<Self> {
        if outer == 0 || inner == 0 {
            return Err(Error::Config(format!("schedule needs outer ≥ 1 and inner ≥ 1, got {outer}×{inner}")));
        }
        Ok(Schedule { outer, inner })
    }

    pub fn total_inner(&self) -> usize {
        self.outer * self.inner
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub xor_codeword: Vec<u8>,
    /// `(ĉ_a, ĉ_b)` read off the GF(4) decisions. `None` for JCNC.
    pub pair_codewords: Option<(Vec<u8>, Vec<u8>)>,
    pub converged: bool,
    pub outer_iters_used: usize,
    pub inner_iters_used: usize,
    /// Final GF(4) log-posteriors, zero-anchored. Empty for JCNC.
    pub posteriors: Vec<LlrVec4>,
}

/// Hard decisions on a posterior sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HardDecision {
    pub symbols: Vec<Gf4>,
    pub xor: Vec<u8>,
    pub a: Vec<u8>,
    pub b: Vec<u8>,
}

/// Argmax per symbol (lowest index on ties) and its XOR bit.
pub fn hard_decision(posteriors: &[LlrVec4]) -> HardDecision {
    let symbols: Vec<Gf4> = posteriors.iter().map(LlrVec4::argmax).collect();
    HardDecision {
        xor: symbols.iter().map(|s| s.xor_bit()).collect(),
        a: symbols.iter().map(|s| s.bit_a()).collect(),
        b: symbols.iter().map(|s| s.bit_b()).collect(),
        symbols,
    }
}

/// Posterior `L̃ = L + Σ L_{m,n}` and outgoing `L_{n,m} = L̃ − L_{m,n}`.
pub fn variable_node_update(channel: &LlrVec4, incoming: &[LlrVec4]) -> (Vec<LlrVec4>, LlrVec4) {
    let post = incoming.iter().fold(*channel, |acc, m| acc + *m);
    (incoming.iter().map(|m| post - *m).collect(), post)
}

/// `ln((p_0 + p_3) / (p_1 + p_2))`: the XOR-bit LLR of a joint posterior.
pub fn xor_llr_from_joint(v: &LlrVec4) -> f64 {
    let v = v.saturated();
    jacobian_log_sum(v[0], v[3], LogSumMode::Exact) - jacobian_log_sum(v[1], v[2], LogSumMode::Exact)
}

/// Message storage for one frame, indexed by the edges of H in row order.
#[derive(Clone, Debug)]
pub struct DecoderState {
    row_start: Vec<usize>,
    /// Edge ids incident to each variable.
    var_edges: Vec<Vec<usize>>,
    pub v2c: Vec<LlrVec4>,
    pub c2v: Vec<LlrVec4>,
    pub posteriors: Vec<LlrVec4>,
    pub channel: Vec<LlrVec4>,
    pub outer_iters: usize,
    pub inner_iters: usize,
}

impl DecoderState {
    pub fn new(h: &ParityCheckMatrix) -> Self {
        let mut row_start = Vec::with_capacity(h.m() + 1);
        let mut var_edges = vec![Vec::new(); h.n()];
        let mut e = 0;
        for row in h.rows() {
            row_start.push(e);
            for &n in row {
                var_edges[n].push(e);
                e += 1;
            }
        }
        row_start.push(e);
        DecoderState {
            row_start,
            var_edges,
            v2c: vec![LlrVec4::ZERO; e],
            c2v: vec![LlrVec4::ZERO; e],
            posteriors: vec![LlrVec4::ZERO; h.n()],
            channel: vec![LlrVec4::ZERO; h.n()],
            outer_iters: 0,
            inner_iters: 0,
        }
    }

    fn check_pass(&mut self, mode: LogSumMode, scratch: &mut Scratch) {
        for w in self.row_start.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            check_node_update_into(&self.v2c[lo..hi], mode, &mut self.c2v[lo..hi], scratch);
        }
    }

    fn variable_pass(&mut self) {
        for (n, edges) in self.var_edges.iter().enumerate() {
            let mut post = self.channel[n];
            for &e in edges {
                post = post + self.c2v[e];
            }
            let post = zero_anchor(post);
            for &e in edges {
                self.v2c[e] = zero_anchor(post - self.c2v[e]);
            }
            self.posteriors[n] = post;
        }
    }

    /// `L_i = L̃ − L_e`, the sum of incoming check messages.
    fn feedback(&self) -> Vec<LlrVec4> {
        self.posteriors.iter().zip(&self.channel).map(|(p, c)| zero_anchor(*p - *c)).collect()
    }
}

#[inline]
fn zero_anchor(v: LlrVec4) -> LlrVec4 {
    let z = v[0];
    LlrVec4(v.0.map(|x| x - z))
}

/// Log-domain generalized sum-product decoding of `c_a ⊕ c_b` (or
/// `c_a ⊕ c_b^{(ι)}` for a cyclic code under frame offset).
///
/// Each outer round runs the detector with the current feedback as prior,
/// then up to `inner` flooding iterations. The syndrome of the XOR decision
/// is tested after every inner iteration.
pub fn log_g_spa(
    h: &ParityCheckMatrix,
    bmac: &BMac,
    obs: &[Option<Sample>],
    schedule: Schedule,
) -> Result<DecodeResult> {
    run_gspa(h, bmac, obs, schedule, true)
}

/// Final posteriors after the full schedule, with no early termination.
pub fn log_g_spa_posteriors(
    h: &ParityCheckMatrix,
    bmac: &BMac,
    obs: &[Option<Sample>],
    schedule: Schedule,
) -> Result<Vec<LlrVec4>> {
    Ok(run_gspa(h, bmac, obs, schedule, false)?.posteriors)
}

fn run_gspa(
    h: &ParityCheckMatrix,
    bmac: &BMac,
    obs: &[Option<Sample>],
    schedule: Schedule,
    early_stop: bool,
) -> Result<DecodeResult> {
    Schedule::new(schedule.outer, schedule.inner)?;
    if obs.len() != h.n() {
        return Err(Error::LengthMismatch { expected: h.n(), got: obs.len() });
    }
    let mode = bmac.mode();
    let mut st = DecoderState::new(h);
    let mut scratch = Scratch::default();
    let mut prior = vec![LlrVec4::ZERO; h.n()];
    let mut decision = hard_decision(&st.posteriors);
    for _ in 0..schedule.outer {
        let ap = bmac.run(obs, &prior)?;
        st.outer_iters += 1;
        for (c, e) in st.channel.iter_mut().zip(&ap.extrinsic) {
            *c = e.normalize(Anchor::Zero)?;
        }
        st.variable_pass();
        for _ in 0..schedule.inner {
            st.check_pass(mode, &mut scratch);
            st.variable_pass();
            st.inner_iters += 1;
            if !early_stop {
                continue;
            }
            decision = hard_decision(&st.posteriors);
            if syndrome(h, &decision.xor)? {
                return Ok(finish(st, decision, true));
            }
        }
        prior = st.feedback();
    }
    if !early_stop {
        decision = hard_decision(&st.posteriors);
    }
    let converged = !early_stop && syndrome(h, &decision.xor)?;
    Ok(finish(st, decision, converged))
}

fn finish(st: DecoderState, d: HardDecision, converged: bool) -> DecodeResult {
    DecodeResult {
        xor_codeword: d.xor,
        pair_codewords: Some((d.a, d.b)),
        converged,
        outer_iters_used: st.outer_iters,
        inner_iters_used: st.inner_iters,
        posteriors: st.posteriors,
    }
}

/// Disjoint baseline: XOR-bit LLRs from one set of joint posteriors, then
/// binary sum-product for up to `iters` iterations.
pub fn jcnc_decode(
    h: &ParityCheckMatrix,
    posteriors: &[LlrVec4],
    iters: usize,
    mode: LogSumMode,
) -> Result<DecodeResult> {
    if posteriors.len() != h.n() {
        return Err(Error::LengthMismatch { expected: h.n(), got: posteriors.len() });
    }
    let llr: Vec<f64> = posteriors.iter().map(xor_llr_from_joint).collect();
    let out = binary_spa(h, &llr, iters, mode)?;
    Ok(DecodeResult {
        xor_codeword: out.bits,
        pair_codewords: None,
        converged: out.converged,
        outer_iters_used: 1,
        inner_iters_used: out.iterations,
        posteriors: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hard_decision_examples() {
        let d = hard_decision(&[
            LlrVec4([0.0, -5.0, -5.0, -5.0]),
            LlrVec4([-5.0, -5.0, -5.0, 0.0]),
            LlrVec4([-1.0, 0.0, 0.0, -1.0]),
        ]);
        assert_eq!(d.symbols, vec![Gf4::ZERO, Gf4::ONE_PLUS_D, Gf4::ONE]);
        assert_eq!(d.xor, vec![0, 0, 1]);
    }

    #[test]
    fn xor_llr_examples() {
        assert_eq!(xor_llr_from_joint(&LlrVec4::ZERO), 0.0);
        let v = LlrVec4([0.4f64.ln(), 0.1f64.ln(), 0.2f64.ln(), 0.3f64.ln()]);
        assert!((xor_llr_from_joint(&v) - (0.7f64 / 0.3).ln()).abs() < 1e-12);
        assert!(xor_llr_from_joint(&LlrVec4::certain(Gf4::ONE)) < -40.0);
        assert!(xor_llr_from_joint(&LlrVec4([0.0, -30.0, -30.0, 0.0])) > 25.0);
    }

    #[test]
    fn variable_node_examples() {
        let ch = LlrVec4([0.0, 1.0, -2.0, 0.5]);
        let (out, post) = variable_node_update(&ch, &[]);
        assert!(out.is_empty());
        assert_eq!(post, ch);
        let (out, post) = variable_node_update(&ch, &[LlrVec4::ZERO; 3]);
        assert_eq!(post, ch);
        assert!(out.iter().all(|o| *o == ch));
    }

    #[test]
    fn schedule_validation() {
        assert!(Schedule::new(0, 5).is_err());
        assert!(Schedule::new(4, 0).is_err());
        assert_eq!(Schedule::new(4, 5).unwrap().total_inner(), 20);
    }
}
