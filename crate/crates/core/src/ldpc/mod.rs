//! Binary LDPC codes shared by both sources.

mod alist;
mod construct;
mod eg;
mod encode;
pub mod gf2;

pub use alist::{emit_alist, load_alist};
pub use construct::build_regular_code;
pub use eg::build_cyclic_eg_code;
pub use encode::{format_generator_poly, parse_generator_poly, GeneratorForm};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use gf2::BitMatrix;

/// Hard bits of one codeword, one `u8` (0 or 1) per position.
pub type Codeword = Vec<u8>;

/// Sparse binary parity-check matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityCheckMatrix {
    m: usize,
    n: usize,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    /// Generator polynomial when the code is known to be cyclic.
    cyclic: Option<Vec<u8>>,
}

impl ParityCheckMatrix {
    /// Builds from per-check column lists. Lists are sorted; duplicates and
    /// out-of-range indices are rejected.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        let mut sorted = Vec::with_capacity(rows.len());
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_unstable();
            for w in row.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::Construction(format!(
                        "row {r} repeats column {}",
                        w[0]
                    )));
                }
            }
            for &c in &row {
                if c >= n {
                    return Err(Error::Construction(format!(
                        "row {r} has column {c} outside 0..{n}"
                    )));
                }
                cols[c].push(r);
            }
            sorted.push(row);
        }
        Ok(ParityCheckMatrix { m: sorted.len(), n, rows: sorted, cols, cyclic: None })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Columns touched by check `m`.
    pub fn row(&self, m: usize) -> &[usize] {
        &self.rows[m]
    }

    /// Checks touching variable `n`.
    pub fn col(&self, n: usize) -> &[usize] {
        &self.cols[n]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_cyclic(&self) -> bool {
        self.cyclic.is_some()
    }

    pub fn generator_poly(&self) -> Option<&[u8]> {
        self.cyclic.as_deref()
    }

    /// Marks the code cyclic with generator `g`. `g` must divide `x^n + 1`
    /// and every shift of `g` must satisfy all checks.
    pub fn with_generator_poly(mut self, g: Vec<u8>) -> Result<Self> {
        let form = GeneratorForm::cyclic(self.n, g.clone())?;
        let cw = form.encode(&unit(form.k(), 0))?;
        for s in 0..self.n {
            if !syndrome(&self, &cyclic_shift(&cw, s as i64))? {
                return Err(Error::Construction(
                    "generator polynomial does not span the null space of H".into(),
                ));
            }
        }
        if form.k() != self.dimension() {
            return Err(Error::Construction(format!(
                "generator gives dimension {}, H gives {}",
                form.k(),
                self.dimension()
            )));
        }
        self.cyclic = Some(gf2::poly_trim(g));
        Ok(self)
    }

    pub fn to_bit_matrix(&self) -> BitMatrix {
        BitMatrix::from_sparse_rows(self.n, &self.rows)
    }

    pub fn rank(&self) -> usize {
        self.to_bit_matrix().rank()
    }

    /// `N - rank(H)`.
    pub fn dimension(&self) -> usize {
        self.n - self.rank()
    }

    pub fn rate(&self) -> f64 {
        self.dimension() as f64 / self.n as f64
    }

    /// Hex SHA-256 over the alist serialization.
    pub fn fingerprint(&self) -> String {
        let digest = Sha256::digest(emit_alist(self).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Whether every pair of columns shares at most one check.
    pub fn is_four_cycle_free(&self) -> bool {
        let mut mark = vec![usize::MAX; self.n];
        for v in 0..self.n {
            for &c in &self.cols[v] {
                for &u in &self.rows[c] {
                    if u <= v {
                        continue;
                    }
                    if mark[u] == v {
                        return false;
                    }
                    mark[u] = v;
                }
            }
        }
        true
    }
}

/// True when every check sums to zero over `c`.
pub fn syndrome(h: &ParityCheckMatrix, c: &[u8]) -> Result<bool> {
    if c.len() != h.n {
        return Err(Error::LengthMismatch { expected: h.n, got: c.len() });
    }
    Ok(h.rows.iter().all(|row| row.iter().fold(0u8, |acc, &j| acc ^ c[j]) & 1 == 0))
}

/// `out[k] = c[(k - iota) mod N]`.
pub fn cyclic_shift(c: &[u8], iota: i64) -> Codeword {
    let n = c.len();
    if n == 0 {
        return Vec::new();
    }
    let s = iota.rem_euclid(n as i64) as usize;
    let mut out = Vec::with_capacity(n);
    out.extend_from_slice(&c[n - s..]);
    out.extend_from_slice(&c[..n - s]);
    out
}

pub fn xor_words(a: &[u8], b: &[u8]) -> Codeword {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

fn unit(k: usize, i: usize) -> Vec<u8> {
    let mut v = vec![0u8; k];
    v[i] = 1;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ParityCheckMatrix {
        ParityCheckMatrix::from_rows(4, vec![vec![0, 1], vec![2, 3]]).unwrap()
    }

    #[test]
    fn rows_and_cols_agree() {
        let h = small();
        assert_eq!(h.cols(), &[vec![0], vec![0], vec![1], vec![1]]);
        assert_eq!(h.edges(), 4);
    }

    #[test]
    fn rejects_repeats_and_range() {
        assert!(ParityCheckMatrix::from_rows(4, vec![vec![1, 1]]).is_err());
        assert!(ParityCheckMatrix::from_rows(4, vec![vec![4]]).is_err());
    }

    #[test]
    fn syndrome_examples() {
        let h = small();
        assert!(syndrome(&h, &[0, 0, 0, 0]).unwrap());
        assert!(syndrome(&h, &[1, 1, 0, 0]).unwrap());
        assert!(!syndrome(&h, &[1, 0, 0, 0]).unwrap());
        assert!(matches!(
            syndrome(&h, &[0, 0]),
            Err(Error::LengthMismatch { expected: 4, got: 2 })
        ));
    }

    #[test]
    fn shift_examples() {
        let c = vec![1, 0, 0, 1, 1];
        assert_eq!(cyclic_shift(&c, 0), c);
        assert_eq!(cyclic_shift(&c, 5), c);
        assert_eq!(cyclic_shift(&c, 1), vec![1, 1, 0, 0, 1]);
        assert_eq!(cyclic_shift(&c, -1), vec![0, 0, 1, 1, 1]);
        for k in 0..5 {
            assert_eq!(cyclic_shift(&c, 2)[k], c[(k + 5 - 2) % 5]);
        }
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn shifts_compose(bits in proptest::collection::vec(0u8..2, 1..40), a in -50i64..50, b in -50i64..50) {
                let lhs = cyclic_shift(&cyclic_shift(&bits, a), b);
                prop_assert_eq!(lhs, cyclic_shift(&bits, a + b));
            }
        }
    }
}
