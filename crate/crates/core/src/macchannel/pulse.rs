use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature points per symbol period.
pub const OVERSAMPLING: usize = 32;
pub const DEFAULT_SRRC_SPAN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PulseKind {
    Rectangular,
    Srrc { rolloff: f64, span: usize },
}

/// Unit-energy real pulse with symbol period 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    kind: PulseKind,
    /// Multiplies the raw waveform to give unit quadrature energy.
    scale: f64,
}

impl PulseShape {
    pub fn rectangular() -> Self {
        PulseShape { kind: PulseKind::Rectangular, scale: 1.0 }
    }

    /// Square-root raised cosine with roll-off `beta ∈ (0, 1]`, truncated to
    /// `span` symbols on each side.
    pub fn srrc(beta: f64, span: usize) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::ChannelConfig(format!("SRRC roll-off must lie in (0, 1], got {beta}")));
        }
        if span == 0 {
            return Err(Error::ChannelConfig("SRRC span must be positive".into()));
        }
        let mut p = PulseShape { kind: PulseKind::Srrc { rolloff: beta, span }, scale: 1.0 };
        p.scale = 1.0 / p.energy(OVERSAMPLING).sqrt();
        Ok(p)
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            PulseKind::Rectangular => (0.0, 1.0),
            PulseKind::Srrc { span, .. } => (-(span as f64), span as f64),
        }
    }

    /// Waveform value; zero outside the support.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return 0.0;
        }
        match self.kind {
            PulseKind::Rectangular => 1.0,
            PulseKind::Srrc { rolloff, .. } => self.scale * srrc_raw(t, rolloff),
        }
    }

    /// `∫ g(t)² dt` by the trapezoidal rule at `os` points per symbol.
    pub fn energy(&self, os: usize) -> f64 {
        cross_correlation(self, self, 0.0, os)
    }
}

/// `∫ g1(t) g2(t + τ) dt`, integrated by the trapezoidal rule at `os` panels
/// per symbol over the exact overlap of the two supports.
pub fn cross_correlation(g1: &PulseShape, g2: &PulseShape, tau: f64, os: usize) -> f64 {
    let (lo1, hi1) = g1.support();
    let (lo2, hi2) = g2.support();
    let a = lo1.max(lo2 - tau);
    let b = hi1.min(hi2 - tau);
    if b <= a {
        return 0.0;
    }
    if g1.kind == PulseKind::Rectangular && g2.kind == PulseKind::Rectangular {
        return b - a;
    }
    let panels = ((b - a) * os as f64).ceil().max(1.0) as usize;
    let h = (b - a) / panels as f64;
    let f = |t: f64| g1.eval(t) * g2.eval(t + tau);
    let mut s = 0.5 * (f(a) + f(b));
    for i in 1..panels {
        s += f(a + i as f64 * h);
    }
    s * h
}

fn srrc_raw(t: f64, beta: f64) -> f64 {
    if t.abs() < 1e-12 {
        return 1.0 - beta + 4.0 * beta / PI;
    }
    let x = 4.0 * beta * t;
    if (x.abs() - 1.0).abs() < 1e-9 {
        let a = PI / (4.0 * beta);
        return beta * FRAC_1_SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    ((PI * t * (1.0 - beta)).sin() + x * (PI * t * (1.0 + beta)).cos()) / (PI * t * (1.0 - x * x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_energy() {
        assert_eq!(PulseShape::rectangular().energy(OVERSAMPLING), 1.0);
        for beta in [0.22, 0.5, 1.0] {
            let p = PulseShape::srrc(beta, DEFAULT_SRRC_SPAN).unwrap();
            assert!((p.energy(OVERSAMPLING) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn srrc_is_continuous_at_special_points() {
        let beta = 1.0;
        for t0 in [0.0, 0.25, -0.25] {
            let c = srrc_raw(t0, beta);
            assert!((srrc_raw(t0 + 1e-7, beta) - c).abs() < 1e-5);
            assert!((srrc_raw(t0 - 1e-7, beta) - c).abs() < 1e-5);
        }
    }

    #[test]
    fn srrc_is_nearly_nyquist() {
        let p = PulseShape::srrc(1.0, DEFAULT_SRRC_SPAN).unwrap();
        for l in 1..4 {
            assert!(cross_correlation(&p, &p, l as f64, OVERSAMPLING).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_rolloff() {
        assert!(PulseShape::srrc(0.0, 8).is_err());
        assert!(PulseShape::srrc(1.5, 8).is_err());
    }
}
