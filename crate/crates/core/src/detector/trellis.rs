use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported full-trellis memory (`4^5 = 1024` states).
pub const MAX_MEMORY: usize = 5;
/// A-column taps at lags ≥ 1 below this permit the reduced trellis.
pub const REDUCTION_TOLERANCE: f64 = 1e-6;

/// Trellis over GF(4) pair symbols.
///
/// Full: the state holds `c_ab(k-1), …, c_ab(k-L)` as base-4 digits, newest
/// in the lowest digit. Reduced: only B's bits `c_b(k-1), …, c_b(k-L)` as
/// base-2 digits, valid when the channel ignores A's past symbols.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trellis {
    memory: usize,
    reduced: bool,
    states: usize,
    next: Vec<[u32; 4]>,
    /// `(previous state, input)` pairs entering each state.
    prev: Vec<Vec<(u32, u8)>>,
}

impl Trellis {
    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn num_states(&self) -> usize {
        self.states
    }

    #[inline]
    pub fn next(&self, s: usize, u: usize) -> usize {
        self.next[s][u] as usize
    }

    pub fn prev(&self, s: usize) -> &[(u32, u8)] {
        &self.prev[s]
    }

    pub fn num_branches(&self) -> usize {
        self.states * 4
    }

    /// Past pair symbols `(x_a, x_b)` in BPSK for lags `1..=L`; A entries are
    /// zero on the reduced trellis.
    pub fn past_symbols(&self, s: usize) -> Vec<(f64, f64)> {
        let bpsk = |b: usize| 1.0 - 2.0 * b as f64;
        (0..self.memory)
            .map(|i| {
                if self.reduced {
                    (0.0, bpsk((s >> i) & 1))
                } else {
                    let d = (s >> (2 * i)) & 3;
                    (bpsk(d & 1), bpsk(d >> 1))
                }
            })
            .collect()
    }
}

pub fn build_trellis(memory: usize, reduced: bool) -> Result<Trellis> {
    if memory > MAX_MEMORY {
        let states = 1usize.checked_shl(2 * memory as u32).unwrap_or(usize::MAX);
        return Err(Error::TrellisTooLarge { memory, states });
    }
    let (radix, states) = if reduced { (2, 1usize << memory) } else { (4, 1usize << (2 * memory)) };
    let mut next = vec![[0u32; 4]; states];
    let mut prev = vec![Vec::with_capacity(4); states];
    for s in 0..states {
        for u in 0..4 {
            let digit = if reduced { u >> 1 } else { u };
            let t = (s * radix + digit) % states;
            next[s][u] = t as u32;
            prev[t].push((s as u32, u as u8));
        }
    }
    Ok(Trellis { memory, reduced, states, next, prev })
}

/// Checks that the channel never looks at A's past symbols.
pub fn check_reduction(taps: &[Matrix2<Complex64>], memory: usize) -> Result<()> {
    for (l, t) in taps.iter().enumerate().take(memory + 1).skip(1) {
        let magnitude = t[(0, 0)].norm().max(t[(1, 0)].norm());
        if magnitude > REDUCTION_TOLERANCE {
            return Err(Error::InvalidReduction { tap: l, magnitude });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let t0 = build_trellis(0, false).unwrap();
        assert_eq!((t0.num_states(), t0.num_branches()), (1, 4));
        assert!((0..4).all(|u| t0.next(0, u) == 0));
        let t1 = build_trellis(1, false).unwrap();
        assert_eq!(t1.num_branches(), 16);
        let r1 = build_trellis(1, true).unwrap();
        assert_eq!((r1.num_states(), r1.num_branches()), (2, 8));
        assert!(matches!(build_trellis(6, false), Err(Error::TrellisTooLarge { .. })));
    }

    #[test]
    fn full_trellis_is_regular() {
        for l in 0..=3 {
            let t = build_trellis(l, false).unwrap();
            for s in 0..t.num_states() {
                assert_eq!(t.prev(s).len(), 4);
                for u in 0..4 {
                    assert!(t.prev(t.next(s, u)).contains(&(s as u32, u as u8)));
                }
            }
        }
    }

    #[test]
    fn newest_symbol_in_low_digit() {
        let t = build_trellis(2, false).unwrap();
        let s = t.next(t.next(0, 3), 1);
        assert_eq!(t.past_symbols(s), vec![(-1.0, 1.0), (-1.0, -1.0)]);
    }

    #[test]
    fn reduction_check() {
        let z = Complex64::new(0.0, 0.0);
        let o = Complex64::new(1.0, 0.0);
        let ok = vec![Matrix2::new(o, z, o, o), Matrix2::new(z, o, z, z)];
        assert!(check_reduction(&ok, 1).is_ok());
        let bad = vec![Matrix2::new(o, z, o, o), Matrix2::new(o, o, z, z)];
        assert!(matches!(check_reduction(&bad, 1), Err(Error::InvalidReduction { tap: 1, .. })));
    }
}
