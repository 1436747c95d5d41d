//! Minimum-phase spectral factorization `Ω(z) = F^T(z^{-1}) F(z)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

use super::correlation::NoiseCovariance;
use crate::error::{Error, Result};

pub const RESIDUAL_GRID: usize = 256;
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
const REGULARIZATION: f64 = 1e-12;
const NEWTON_ITERS: usize = 60;

/// Causal factor taps `F_0, …, F_L` with `Λ(k) = Σ_i F_i^T F_{i+k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFactor {
    pub taps: Vec<Matrix2<f64>>,
    /// Largest Frobenius error of `Ω - F^H F` over the residual grid.
    pub residual: f64,
}

/// Bauer's method followed by Newton refinement.
///
/// The block-Toeplitz matrix `T_{ij} = Λ(j-i)` is Cholesky-factored with each
/// 2×2 block conjugated by the swap `P`, so the last block row of the factor
/// converges to `P F_l^T P` with `F_0` lower triangular. Singular spectra
/// (identical Nyquist pulses are singular at DC) make that convergence slow,
/// so the result is polished by Gauss-Newton on the coefficient equations.
pub fn spectral_factorize(cov: &NoiseCovariance) -> Result<SpectralFactor> {
    let mut taps = bauer(cov)?;
    newton_refine(cov, &mut taps);
    canonicalize(&mut taps);
    let residual = factorization_residual(cov, &taps, RESIDUAL_GRID);
    if !(residual < RESIDUAL_TOLERANCE) {
        return Err(Error::Factorization { residual });
    }
    Ok(SpectralFactor { taps, residual })
}

fn swap(m: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(1, 1)], m[(1, 0)], m[(0, 1)], m[(0, 0)])
}

fn bauer(cov: &NoiseCovariance) -> Result<Vec<Matrix2<f64>>> {
    let l = cov.memory();
    let blocks = if l == 0 { 1 } else { (8 * l).max(64) };
    let d = 2 * blocks;
    let mut t = DMatrix::<f64>::zeros(d, d);
    for i in 0..blocks {
        for j in 0..blocks {
            let b = swap(&cov.at(j as i64 - i as i64));
            for u in 0..2 {
                for v in 0..2 {
                    t[(2 * i + u, 2 * j + v)] = b[(u, v)];
                }
            }
        }
    }
    for i in 0..d {
        t[(i, i)] += REGULARIZATION;
    }
    let g = t
        .cholesky()
        .ok_or(Error::Factorization { residual: f64::INFINITY })?
        .unpack();
    let last = blocks - 1;
    Ok((0..=l)
        .map(|k| {
            let c = last - k;
            let blk = Matrix2::new(
                g[(2 * last, 2 * c)],
                g[(2 * last, 2 * c + 1)],
                g[(2 * last + 1, 2 * c)],
                g[(2 * last + 1, 2 * c + 1)],
            );
            swap(&blk.transpose())
        })
        .collect())
}

/// Unknown `j` as (tap, row, col). `F_0[(0,1)]` is pinned to zero.
fn unknowns(l: usize) -> Vec<(usize, usize, usize)> {
    let mut v = vec![(0, 0, 0), (0, 1, 0), (0, 1, 1)];
    for t in 1..=l {
        v.extend([(t, 0, 0), (t, 0, 1), (t, 1, 0), (t, 1, 1)]);
    }
    v
}

/// Equation `i` as (lag, row, col); lag 0 uses its upper triangle only.
fn equations(l: usize) -> Vec<(usize, usize, usize)> {
    let mut v = vec![(0, 0, 0), (0, 0, 1), (0, 1, 1)];
    for k in 1..=l {
        v.extend([(k, 0, 0), (k, 0, 1), (k, 1, 0), (k, 1, 1)]);
    }
    v
}

fn products(taps: &[Matrix2<f64>]) -> Vec<Matrix2<f64>> {
    let l = taps.len() - 1;
    (0..=l)
        .map(|k| (0..=l - k).map(|i| taps[i].transpose() * taps[i + k]).sum())
        .collect()
}

fn coefficient_residual(cov: &NoiseCovariance, taps: &[Matrix2<f64>]) -> DVector<f64> {
    let s = products(taps);
    let eq = equations(taps.len() - 1);
    DVector::from_iterator(eq.len(), eq.iter().map(|&(k, r, c)| cov.at(k as i64)[(r, c)] - s[k][(r, c)]))
}

fn newton_refine(cov: &NoiseCovariance, taps: &mut [Matrix2<f64>]) {
    let l = taps.len() - 1;
    let unk = unknowns(l);
    let eq = equations(l);
    taps[0][(0, 1)] = 0.0;
    let mut res = coefficient_residual(cov, taps);
    let mut norm = res.norm();
    for _ in 0..NEWTON_ITERS {
        if norm < 1e-15 {
            break;
        }
        // d(Σ_i F_i^T F_{i+k}) / dF_j[(p,q)] = E^T F_{j+k} + F_{j-k}^T E.
        let mut jac = DMatrix::<f64>::zeros(eq.len(), unk.len());
        for (col, &(j, p, q)) in unk.iter().enumerate() {
            let mut e = Matrix2::zeros();
            e[(p, q)] = 1.0;
            for (row, &(k, r, c)) in eq.iter().enumerate() {
                let mut dm = Matrix2::zeros();
                if j + k <= l {
                    dm += e.transpose() * taps[j + k];
                }
                if j >= k {
                    dm += taps[j - k].transpose() * e;
                }
                jac[(row, col)] = dm[(r, c)];
            }
        }
        let svd = jac.svd(true, true);
        let Ok(step) = svd.solve(&res, 1e-13) else {
            break;
        };
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha > 1e-4 {
            let mut trial = taps.to_vec();
            for (&(j, p, q), s) in unk.iter().zip(step.iter()) {
                trial[j][(p, q)] += alpha * s;
            }
            let r = coefficient_residual(cov, &trial);
            if r.norm() < norm {
                taps.copy_from_slice(&trial);
                res = r;
                norm = res.norm();
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
}

/// Left-multiplies by a diagonal sign matrix so `F_0` has a nonnegative diagonal.
fn canonicalize(taps: &mut [Matrix2<f64>]) {
    for r in 0..2 {
        if taps[0][(r, r)] < 0.0 {
            for t in taps.iter_mut() {
                t[(r, 0)] = -t[(r, 0)];
                t[(r, 1)] = -t[(r, 1)];
            }
        }
    }
}

fn to_complex(m: &Matrix2<f64>) -> Matrix2<Complex64> {
    m.map(|v| Complex64::new(v, 0.0))
}

/// `max_ω ‖Ω(e^{jω}) - F(e^{jω})^H F(e^{jω})‖_F` over `grid` equispaced points,
/// with `Ω(z) = Σ_k Λ(k) z^{-k}` and `F(z) = Σ_l F_l z^{-l}`.
pub fn factorization_residual(cov: &NoiseCovariance, taps: &[Matrix2<f64>], grid: usize) -> f64 {
    let lmax = cov.memory().max(taps.len().saturating_sub(1)) as i64;
    (0..grid)
        .map(|g| {
            let w = 2.0 * PI * g as f64 / grid as f64;
            let z = |k: i64| Complex64::from_polar(1.0, -w * k as f64);
            let omega: Matrix2<Complex64> = (-lmax..=lmax).map(|k| to_complex(&cov.at(k)) * z(k)).sum();
            let f: Matrix2<Complex64> =
                taps.iter().enumerate().map(|(l, t)| to_complex(t) * z(l as i64)).sum();
            (omega - f.adjoint() * f).norm()
        })
        .fold(0.0, f64::max)
}
