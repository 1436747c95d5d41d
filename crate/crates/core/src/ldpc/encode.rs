use super::gf2::{pack_bits, poly_degree, poly_rem, poly_trim, x_n_minus_1, BitMatrix, Poly};
use super::{Codeword, ParityCheckMatrix};
use crate::error::{Error, Result};

/// Systematic encoder for a code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GeneratorForm {
    /// From Gaussian elimination of H: message bits sit on the non-pivot
    /// columns and each pivot column is a parity of them.
    Systematic {
        n: usize,
        info: Vec<usize>,
        parity: Vec<usize>,
        /// Row `i` selects the message bits that sum to position `parity[i]`.
        parity_rows: Vec<Vec<u64>>,
    },
    /// Cyclic code: parity in `0..n-k`, message in `n-k..n`.
    Cyclic { n: usize, k: usize, g: Poly },
}

impl GeneratorForm {
    pub fn from_parity_check(h: &ParityCheckMatrix) -> Result<Self> {
        let mut a = h.to_bit_matrix();
        let pivots = a.rref();
        let mut is_pivot = vec![false; h.n()];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let info: Vec<usize> = (0..h.n()).filter(|&c| !is_pivot[c]).collect();
        if info.is_empty() {
            return Err(Error::Construction("H has full column rank: the code is trivial".into()));
        }
        let parity_rows = (0..pivots.len())
            .map(|r| pack_bits(&info.iter().map(|&c| a.get(r, c) as u8).collect::<Vec<_>>()))
            .collect();
        Ok(GeneratorForm::Systematic { n: h.n(), info, parity: pivots, parity_rows })
    }

    /// Cyclic form from `g`, which must divide `x^n + 1`.
    pub fn cyclic(n: usize, g: Poly) -> Result<Self> {
        let g = poly_trim(g);
        let deg = poly_degree(&g)
            .ok_or_else(|| Error::Construction("generator polynomial is zero".into()))?;
        if deg >= n || g[0] != 1 {
            return Err(Error::Construction(format!(
                "generator of degree {deg} is not a proper divisor of x^{n}+1"
            )));
        }
        if !poly_rem(&x_n_minus_1(n), &g).is_empty() {
            return Err(Error::Construction(format!("generator does not divide x^{n}+1")));
        }
        Ok(GeneratorForm::Cyclic { n, k: n - deg, g })
    }

    /// Cyclic form when `h` carries a generator polynomial, else elimination.
    pub fn for_code(h: &ParityCheckMatrix) -> Result<Self> {
        match h.generator_poly() {
            Some(g) => GeneratorForm::cyclic(h.n(), g.to_vec()),
            None => GeneratorForm::from_parity_check(h),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            GeneratorForm::Systematic { n, .. } | GeneratorForm::Cyclic { n, .. } => *n,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            GeneratorForm::Systematic { info, .. } => info.len(),
            GeneratorForm::Cyclic { k, .. } => *k,
        }
    }

    /// Codeword positions carrying the message, in message order.
    pub fn systematic_positions(&self) -> Vec<usize> {
        match self {
            GeneratorForm::Systematic { info, .. } => info.clone(),
            GeneratorForm::Cyclic { n, k, .. } => (n - k..*n).collect(),
        }
    }

    pub fn encode(&self, msg: &[u8]) -> Result<Codeword> {
        if msg.len() != self.k() {
            return Err(Error::LengthMismatch { expected: self.k(), got: msg.len() });
        }
        match self {
            GeneratorForm::Systematic { n, info, parity, parity_rows } => {
                let mut c = vec![0u8; *n];
                for (&pos, &b) in info.iter().zip(msg) {
                    c[pos] = b & 1;
                }
                let packed = pack_bits(msg);
                for (&pos, row) in parity.iter().zip(parity_rows) {
                    let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
                    c[pos] = (ones & 1) as u8;
                }
                Ok(c)
            }
            GeneratorForm::Cyclic { n, k, g } => {
                let mut c = vec![0u8; *n];
                for (i, &b) in msg.iter().enumerate() {
                    c[n - k + i] = b & 1;
                }
                let rem = poly_rem(&c, g);
                for (i, r) in rem.iter().enumerate() {
                    c[i] ^= r;
                }
                Ok(c)
            }
        }
    }

    pub fn extract_message(&self, c: &[u8]) -> Result<Vec<u8>> {
        if c.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), got: c.len() });
        }
        Ok(self.systematic_positions().iter().map(|&p| c[p]).collect())
    }

    /// Dense `k × n` generator matrix, row `i` = encoding of unit vector `i`.
    pub fn generator_matrix(&self) -> Result<BitMatrix> {
        let k = self.k();
        let mut g = BitMatrix::zeros(k, self.n());
        let mut e = vec![0u8; k];
        for i in 0..k {
            e[i] = 1;
            for (j, b) in self.encode(&e)?.into_iter().enumerate() {
                g.set(i, j, b == 1);
            }
            e[i] = 0;
        }
        Ok(g)
    }
}

/// Parses one line of 0/1 coefficients, lowest degree first.
pub fn parse_generator_poly(text: &str) -> Result<Poly> {
    let line = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| Error::PolyParse("empty input".into()))?;
    let mut p = Vec::new();
    for ch in line.chars().filter(|c| !c.is_whitespace()) {
        match ch {
            '0' => p.push(0),
            '1' => p.push(1),
            other => return Err(Error::PolyParse(format!("unexpected character '{other}'"))),
        }
    }
    let p = poly_trim(p);
    if p.is_empty() {
        return Err(Error::PolyParse("zero polynomial".into()));
    }
    Ok(p)
}

pub fn format_generator_poly(g: &[u8]) -> String {
    let mut s: String = g.iter().map(|&b| if b & 1 == 1 { '1' } else { '0' }).collect();
    s.push('\n');
    s
}
