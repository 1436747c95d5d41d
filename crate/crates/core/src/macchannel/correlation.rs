use nalgebra::Matrix2;

use super::pulse::{cross_correlation, PulseShape, OVERSAMPLING};
use crate::error::{Error, Result};

/// Lags with every correlation below this are dropped.
pub const CORRELATION_FLOOR: f64 = 1e-6;

/// Matched-filter correlations between the two users' shifted pulses.
///
/// With `τ_a = 0` and `τ_b = ε`, `ρ_ab(l) = ∫ g_a(t) g_b(t + l - ε) dt` and
/// `ρ_ba(l) = ∫ g_b(t) g_a(t + l + ε) dt`. The same-user terms `r_aa`, `r_bb`
/// vanish off lag 0 for ideal Nyquist pulses but not for truncated ones, so
/// they are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSet {
    memory: usize,
    epsilon: f64,
    /// Indexed by `l + memory` for `l ∈ [-memory, memory]`.
    rho_ab: Vec<f64>,
    rho_ba: Vec<f64>,
    r_aa: Vec<f64>,
    r_bb: Vec<f64>,
}

impl CorrelationSet {
    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn at(&self, v: &[f64], l: i64) -> f64 {
        let i = l + self.memory as i64;
        if i < 0 || i as usize >= v.len() {
            0.0
        } else {
            v[i as usize]
        }
    }

    pub fn rho_ab(&self, l: i64) -> f64 {
        self.at(&self.rho_ab, l)
    }

    pub fn rho_ba(&self, l: i64) -> f64 {
        self.at(&self.rho_ba, l)
    }

    pub fn r_aa(&self, l: i64) -> f64 {
        self.at(&self.r_aa, l)
    }

    pub fn r_bb(&self, l: i64) -> f64 {
        self.at(&self.r_bb, l)
    }
}

pub fn compute_correlations(g_a: &PulseShape, g_b: &PulseShape, epsilon: f64) -> Result<CorrelationSet> {
    compute_correlations_with(g_a, g_b, epsilon, OVERSAMPLING)
}

/// As [`compute_correlations`] with an explicit quadrature density.
pub fn compute_correlations_with(
    g_a: &PulseShape,
    g_b: &PulseShape,
    epsilon: f64,
    os: usize,
) -> Result<CorrelationSet> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::ChannelConfig(format!("epsilon must lie in [0, 1), got {epsilon}")));
    }
    for (name, g) in [("A", g_a), ("B", g_b)] {
        let e = g.energy(os);
        if (e - 1.0).abs() > 1e-6 {
            return Err(Error::ChannelConfig(format!("pulse {name} has energy {e}, expected 1")));
        }
    }
    let (lo_a, hi_a) = g_a.support();
    let (lo_b, hi_b) = g_b.support();
    let reach = ((hi_a - lo_a).max(hi_b - lo_b)).ceil() as i64 + 2;

    let corr = |g1: &PulseShape, g2: &PulseShape, tau: f64| cross_correlation(g1, g2, tau, os);
    let mut rows = Vec::with_capacity((2 * reach + 1) as usize);
    for l in -reach..=reach {
        let lf = l as f64;
        rows.push([
            corr(g_a, g_b, lf - epsilon),
            corr(g_b, g_a, lf + epsilon),
            if l == 0 { 1.0 } else { corr(g_a, g_a, lf) },
            if l == 0 { 1.0 } else { corr(g_b, g_b, lf) },
        ]);
    }
    // Same-user lag 0 is the unit energy, not a memory term.
    let significant = |l: i64, r: &[f64; 4]| {
        let k = if l == 0 { 2 } else { 4 };
        r[..k].iter().any(|v| v.abs() >= CORRELATION_FLOOR)
    };
    let memory = (-reach..=reach)
        .zip(&rows)
        .filter(|(l, r)| significant(*l, r))
        .map(|(l, _)| l.unsigned_abs() as usize)
        .max()
        .unwrap_or(0);
    let keep = |k: usize| -> Vec<f64> {
        (-(memory as i64)..=memory as i64)
            .map(|l| {
                let v = rows[(l + reach) as usize][k];
                if v.abs() < CORRELATION_FLOOR && !(l == 0 && k >= 2) {
                    0.0
                } else {
                    v
                }
            })
            .collect()
    };
    Ok(CorrelationSet {
        memory,
        epsilon,
        rho_ab: keep(0),
        rho_ba: keep(1),
        r_aa: keep(2),
        r_bb: keep(3),
    })
}

/// Normalized noise covariance `Λ(l) = E[ν(k) ν(k-l)^T] / (2σ²)` of the
/// matched-filter outputs `ν = (ν_a, ν_b)`.
///
/// `Λ(l) = [[r_aa(l), ρ_ab(l)], [ρ_ba(l), r_bb(l)]]`, and `Λ(-l) = Λ(l)^T`.
/// The same matrices carry the signal: `y(k) = Σ_l Λ(l) diag(h) x(k-l)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseCovariance {
    /// `Λ(0), …, Λ(L)`.
    lambda: Vec<Matrix2<f64>>,
}

impl NoiseCovariance {
    pub fn from_lags(lambda: Vec<Matrix2<f64>>) -> Result<Self> {
        let Some(l0) = lambda.first() else {
            return Err(Error::ChannelConfig("covariance needs lag 0".into()));
        };
        if (l0[(0, 1)] - l0[(1, 0)]).abs() > 1e-12 {
            return Err(Error::ChannelConfig("Λ(0) must be symmetric".into()));
        }
        Ok(NoiseCovariance { lambda })
    }

    pub fn memory(&self) -> usize {
        self.lambda.len() - 1
    }

    /// `Λ(l)` for any integer lag.
    pub fn at(&self, l: i64) -> Matrix2<f64> {
        let a = l.unsigned_abs() as usize;
        match self.lambda.get(a) {
            None => Matrix2::zeros(),
            Some(m) if l >= 0 => *m,
            Some(m) => m.transpose(),
        }
    }

    pub fn lags(&self) -> &[Matrix2<f64>] {
        &self.lambda
    }
}

pub fn noise_covariance(c: &CorrelationSet) -> NoiseCovariance {
    let lambda = (0..=c.memory() as i64)
        .map(|l| Matrix2::new(c.r_aa(l), c.rho_ab(l), c.rho_ba(l), c.r_bb(l)))
        .collect();
    NoiseCovariance { lambda }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::macchannel::pulse::DEFAULT_SRRC_SPAN;

    #[test]
    fn rectangular_examples() {
        let g = PulseShape::rectangular();
        let c0 = compute_correlations(&g, &g, 0.0).unwrap();
        assert_eq!(c0.memory(), 0);
        assert_eq!(c0.rho_ab(0), 1.0);
        let c = compute_correlations(&g, &g, 0.5).unwrap();
        assert_eq!(c.memory(), 1);
        assert_eq!((c.rho_ab(0), c.rho_ab(1), c.rho_ba(0), c.rho_ba(-1)), (0.5, 0.5, 0.5, 0.5));
        assert_eq!((c.rho_ab(-1), c.rho_ba(1)), (0.0, 0.0));
        let lam = noise_covariance(&c);
        assert_eq!(lam.at(0), Matrix2::new(1.0, 0.5, 0.5, 1.0));
        assert_eq!(lam.at(1), Matrix2::new(0.0, 0.5, 0.0, 0.0));
        assert_eq!(lam.at(-1), lam.at(1).transpose());
    }

    #[test]
    fn srrc_symmetry_and_tail() {
        let g = PulseShape::srrc(1.0, DEFAULT_SRRC_SPAN).unwrap();
        let c = compute_correlations(&g, &g, 0.5).unwrap();
        let m = c.memory() as i64;
        for l in -m..=m {
            assert!((c.rho_ba(l) - c.rho_ab(-l)).abs() < 1e-9);
        }
        assert!((c.rho_ab(0) - c.rho_ba(0)).abs() < 1e-9);
        assert!(c.rho_ab(m + 1).abs() < CORRELATION_FLOOR);
    }

    #[test]
    fn rejects_bad_epsilon() {
        let g = PulseShape::rectangular();
        assert!(compute_correlations(&g, &g, 1.0).is_err());
        assert!(compute_correlations(&g, &g, -0.1).is_err());
    }
}
