use super::gf2::{poly_divmod, poly_gcd, x_n_minus_1};
use super::{GeneratorForm, ParityCheckMatrix};
use crate::error::{Error, Result};

/// Primitive polynomials for GF(2^{2s}), bit i = coefficient of x^i.
fn primitive_poly(m: u32) -> Option<u32> {
    match m {
        4 => Some(0b1_0011),
        6 => Some(0b100_0011),
        8 => Some(0x11d),
        10 => Some(0x409),
        _ => None,
    }
}

struct Field {
    exp: Vec<u32>,
    log: Vec<usize>,
    n: usize,
}

impl Field {
    fn new(m: u32) -> Option<Field> {
        let poly = primitive_poly(m)?;
        let size = 1usize << m;
        let n = size - 1;
        let mut exp = vec![0u32; n];
        let mut log = vec![0usize; size];
        let mut x = 1u32;
        for (i, e) in exp.iter_mut().enumerate() {
            *e = x;
            log[x as usize] = i;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        Some(Field { exp, log, n })
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) % self.n]
    }
}

/// Type-I two-dimensional Euclidean-geometry cyclic LDPC code over GF(2^s).
///
/// Points of EG(2, 2^s) are the elements of GF(2^{2s}); the nonzero ones are
/// indexed by their discrete log. The line `{1 + βα : β ∈ GF(2^s)}` misses the
/// origin, and its `α^i` multiples are the remaining lines that miss it, so H
/// is the `n × n` circulant of its incidence vector. Supported `s` is 2..=5.
pub fn build_cyclic_eg_code(s: u32) -> Result<(ParityCheckMatrix, GeneratorForm)> {
    let field = Field::new(2 * s)
        .filter(|_| (2..=5).contains(&s))
        .ok_or_else(|| Error::Construction(format!("EG construction supports s in 2..=5, got {s}")))?;
    let n = field.n;
    let q = 1usize << s;
    let alpha = field.exp[1];

    // GF(2^s) sits inside as {0} ∪ {α^{(q+1)j}}.
    let mut subfield = vec![0u32];
    subfield.extend((0..q - 1).map(|j| field.exp[(q + 1) * j % n]));

    let mut base: Vec<usize> = subfield
        .iter()
        .map(|&beta| field.log[(1 ^ field.mul(beta, alpha)) as usize])
        .collect();
    base.sort_unstable();

    let rows = (0..n).map(|i| base.iter().map(|&p| (p + i) % n).collect()).collect();
    let h = ParityCheckMatrix::from_rows(n, rows)?;

    // Row i checks Σ_p c_{p+i}, i.e. c(x)·x^{-p} summed, so the code is the
    // annihilator of the reflected base polynomial.
    let mut reflected = vec![0u8; n];
    for &p in &base {
        reflected[(n - p) % n] ^= 1;
    }
    let xn1 = x_n_minus_1(n);
    let d = poly_gcd(&reflected, &xn1);
    let (g, rem) = poly_divmod(&xn1, &d);
    debug_assert!(rem.is_empty());
    let h = h.with_generator_poly(g.clone())?;
    let form = GeneratorForm::cyclic(n, g)?;
    Ok((h, form))
}
