//! Dense GF(2) linear algebra and binary polynomial arithmetic.

/// Row-major bit matrix packed into 64-bit words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64).max(1);
        BitMatrix { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn from_sparse_rows(cols: usize, rows: &[Vec<usize>]) -> Self {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            for &c in row {
                m.set(r, c, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.words + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    fn xor_row_into(&mut self, src: usize, dst: usize) {
        let w = self.words;
        let (s, d) = (src * w, dst * w);
        for i in 0..w {
            let v = self.data[s + i];
            self.data[d + i] ^= v;
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        let w = self.words;
        for i in 0..w {
            self.data.swap(a * w + i, b * w + i);
        }
    }

    /// Reduces in place to reduced row-echelon form and returns the pivot
    /// column of each nonzero row, in order.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| self.get(i, c)) else {
                continue;
            };
            self.swap_rows(p, r);
            for i in 0..self.rows {
                if i != r && self.get(i, c) {
                    self.xor_row_into(r, i);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// `self · v` over GF(2) for a 0/1 vector `v`.
    pub fn mul_vec(&self, v: &[u8]) -> Vec<u8> {
        let packed = pack_bits(v);
        (0..self.rows)
            .map(|r| {
                let ones: u32 = self
                    .row_words(r)
                    .iter()
                    .zip(&packed)
                    .map(|(a, b)| (a & b).count_ones())
                    .sum();
                (ones & 1) as u8
            })
            .collect()
    }
}

pub fn pack_bits(v: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; v.len().div_ceil(64).max(1)];
    for (i, &b) in v.iter().enumerate() {
        if b & 1 == 1 {
            out[i / 64] |= 1 << (i % 64);
        }
    }
    out
}

/// Binary polynomial, coefficients lowest degree first.
pub type Poly = Vec<u8>;

pub fn poly_trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

/// Degree, or `None` for the zero polynomial.
pub fn poly_degree(p: &[u8]) -> Option<usize> {
    p.iter().rposition(|&c| c & 1 == 1)
}

/// Remainder of `a` divided by `b`; `b` must be nonzero.
pub fn poly_rem(a: &[u8], b: &[u8]) -> Poly {
    poly_divmod(a, b).1
}

/// `(quotient, remainder)`; `b` must be nonzero.
pub fn poly_divmod(a: &[u8], b: &[u8]) -> (Poly, Poly) {
    let db = poly_degree(b).expect("division by the zero polynomial");
    let mut r: Poly = a.iter().map(|c| c & 1).collect();
    let Some(da) = poly_degree(&r) else {
        return (Vec::new(), Vec::new());
    };
    if da < db {
        return (Vec::new(), poly_trim(r));
    }
    let mut q = vec![0u8; da - db + 1];
    for i in (db..=da).rev() {
        if r[i] == 1 {
            q[i - db] = 1;
            for j in 0..=db {
                r[i - db + j] ^= b[j] & 1;
            }
        }
    }
    (poly_trim(q), poly_trim(r))
}

pub fn poly_gcd(a: &[u8], b: &[u8]) -> Poly {
    let mut a = poly_trim(a.to_vec());
    let mut b = poly_trim(b.to_vec());
    while !b.is_empty() {
        let r = poly_rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

pub fn poly_mul(a: &[u8], b: &[u8]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x & 1 == 1 {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] ^= y & 1;
            }
        }
    }
    poly_trim(out)
}

/// `x^n + 1`.
pub fn x_n_minus_1(n: usize) -> Poly {
    let mut p = vec![0u8; n + 1];
    p[0] = 1;
    p[n] = 1;
    p
}
