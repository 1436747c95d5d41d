use crate::gfcode::{boxplus, Anchor, LlrVec4, LogSumMode, SATURATION_FLOOR};

/// XOR convolution `out[i] = Σ_x a[x] b[i ^ x]`, rescaled to sum 1.
#[inline]
fn xor_conv(a: &[f64; 4], b: &[f64; 4]) -> [f64; 4] {
    let mut o = [
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] + a[3] * b[2],
        a[0] * b[2] + a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
    ];
    let s = o[0] + o[1] + o[2] + o[3];
    o.iter_mut().for_each(|v| *v /= s);
    o
}

#[inline]
fn to_probs(l: &LlrVec4) -> [f64; 4] {
    l.saturated().0.map(f64::exp)
}

#[inline]
fn to_zero_anchored(p: &[f64; 4]) -> LlrVec4 {
    let z = p[0].ln();
    LlrVec4(p.map(|v| v.ln() - z))
}

/// Check-to-variable messages for one check.
///
/// Message `i` is the GF(4) box-plus of every incoming message except `i`,
/// from forward and backward partial sums, zero-anchored. Exact mode runs
/// the same recursion in the probability domain, where box-plus is an XOR
/// convolution. A degree-1 check sends the zero message.
pub fn check_node_update(incoming: &[LlrVec4], mode: LogSumMode) -> Vec<LlrVec4> {
    let mut out = vec![LlrVec4::ZERO; incoming.len()];
    check_node_update_into(incoming, mode, &mut out, &mut Scratch::default());
    out
}

#[derive(Default)]
pub(crate) struct Scratch {
    p: Vec<[f64; 4]>,
    fwd: Vec<[f64; 4]>,
    bwd: Vec<[f64; 4]>,
    lf: Vec<LlrVec4>,
    lb: Vec<LlrVec4>,
}

pub(crate) fn check_node_update_into(
    incoming: &[LlrVec4],
    mode: LogSumMode,
    out: &mut [LlrVec4],
    s: &mut Scratch,
) {
    let d = incoming.len();
    if d <= 1 {
        out.iter_mut().for_each(|o| *o = LlrVec4::ZERO);
        return;
    }
    match mode {
        LogSumMode::Exact => {
            s.p.clear();
            s.p.extend(incoming.iter().map(to_probs));
            s.fwd.resize(d, [0.0; 4]);
            s.bwd.resize(d, [0.0; 4]);
            s.fwd[0] = s.p[0];
            for j in 1..d {
                s.fwd[j] = xor_conv(&s.fwd[j - 1], &s.p[j]);
            }
            s.bwd[d - 1] = s.p[d - 1];
            for j in (0..d - 1).rev() {
                s.bwd[j] = xor_conv(&s.p[j], &s.bwd[j + 1]);
            }
            out[0] = to_zero_anchored(&s.bwd[1]);
            out[d - 1] = to_zero_anchored(&s.fwd[d - 2]);
            for j in 1..d - 1 {
                out[j] = to_zero_anchored(&xor_conv(&s.fwd[j - 1], &s.bwd[j + 1]));
            }
        }
        LogSumMode::MaxLog => {
            s.lf.resize(d, LlrVec4::ZERO);
            s.lb.resize(d, LlrVec4::ZERO);
            s.lf[0] = incoming[0].saturated();
            for j in 1..d {
                s.lf[j] = boxplus(&s.lf[j - 1], &incoming[j], mode);
            }
            s.lb[d - 1] = incoming[d - 1].saturated();
            for j in (0..d - 1).rev() {
                s.lb[j] = boxplus(&incoming[j], &s.lb[j + 1], mode);
            }
            let anchor = |v: LlrVec4| v.normalize(Anchor::Zero).unwrap_or(LlrVec4::ZERO);
            out[0] = anchor(s.lb[1]);
            out[d - 1] = anchor(s.lf[d - 2]);
            for j in 1..d - 1 {
                out[j] = boxplus(&s.lf[j - 1], &s.lb[j + 1], mode);
            }
        }
    }
    for o in out.iter_mut() {
        o.0.iter_mut().for_each(|v| *v = v.max(2.0 * SATURATION_FLOOR));
    }
}
