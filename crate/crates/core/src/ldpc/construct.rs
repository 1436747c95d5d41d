use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

const ATTEMPTS: u64 = 64;
const REPAIR_TRIES: usize = 20_000;

struct Graph {
    var_checks: Vec<Vec<usize>>,
    check_vars: Vec<Vec<usize>>,
    row_degree: usize,
    girth6: bool,
}

impl Graph {
    /// Whether connecting `v` to `c` would repeat an edge or close a 4-cycle.
    fn conflicts(&self, v: usize, c: usize) -> bool {
        if self.check_vars[c].contains(&v) {
            return true;
        }
        if !self.girth6 {
            return false;
        }
        self.check_vars[c].iter().any(|&u| {
            self.var_checks[u].iter().any(|cu| self.var_checks[v].contains(cu))
        })
    }

    fn connect(&mut self, v: usize, c: usize) {
        self.var_checks[v].push(c);
        self.check_vars[c].push(v);
    }

    fn disconnect(&mut self, v: usize, c: usize) {
        self.var_checks[v].retain(|&x| x != c);
        self.check_vars[c].retain(|&x| x != v);
    }

    fn open(&self, c: usize) -> bool {
        self.check_vars[c].len() < self.row_degree
    }

    /// Makes room for `v` by moving some `u` from a check `c2` that `v` can
    /// join to an open check `c` that `u` can join.
    fn repair(&mut self, v: usize, rng: &mut ChaCha8Rng) -> bool {
        let m = self.check_vars.len();
        let open: Vec<usize> = (0..m).filter(|&c| self.open(c)).collect();
        if open.is_empty() {
            return false;
        }
        for _ in 0..REPAIR_TRIES {
            let c = *open.choose(rng).unwrap();
            let c2 = rng.random_range(0..m);
            if c2 == c || self.check_vars[c2].is_empty() {
                continue;
            }
            let u = *self.check_vars[c2].choose(rng).unwrap();
            if u == v {
                continue;
            }
            self.disconnect(u, c2);
            if !self.conflicts(u, c) {
                self.connect(u, c);
                if !self.conflicts(v, c2) {
                    self.connect(v, c2);
                    return true;
                }
                self.disconnect(u, c);
            }
            self.connect(u, c2);
        }
        false
    }
}

fn attempt(n: usize, m: usize, dv: usize, dc: usize, girth6: bool, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
    let mut g = Graph {
        var_checks: vec![Vec::with_capacity(dv); n],
        check_vars: vec![Vec::with_capacity(dc); m],
        row_degree: dc,
        girth6,
    };
    let mut candidates = Vec::with_capacity(m);
    for v in 0..n {
        for _ in 0..dv {
            candidates.clear();
            let mut best = usize::MAX;
            for c in 0..m {
                if !g.open(c) || g.conflicts(v, c) {
                    continue;
                }
                let d = g.check_vars[c].len();
                if d < best {
                    best = d;
                    candidates.clear();
                }
                if d == best {
                    candidates.push(c);
                }
            }
            match candidates.choose(rng) {
                Some(&c) => g.connect(v, c),
                None => {
                    if !g.repair(v, rng) {
                        return None;
                    }
                }
            }
        }
    }
    Some(g.check_vars)
}

/// Regular `(col_degree, row_degree)` code by progressive edge placement.
///
/// Each edge goes to the least-loaded check that keeps the requested girth,
/// with random tie-breaking from `seed`. `girth_min = 6` forbids 4-cycles.
pub fn build_regular_code(
    n: usize,
    col_degree: usize,
    row_degree: usize,
    girth_min: usize,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    if girth_min != 4 && girth_min != 6 {
        return Err(Error::Construction(format!("girth_min must be 4 or 6, got {girth_min}")));
    }
    if col_degree == 0 || row_degree == 0 || n == 0 {
        return Err(Error::Construction("degrees and length must be positive".into()));
    }
    if !(n * col_degree).is_multiple_of(row_degree) {
        return Err(Error::Construction(format!(
            "n·col_degree = {} is not divisible by row_degree {row_degree}",
            n * col_degree
        )));
    }
    let m = n * col_degree / row_degree;
    if row_degree > n || col_degree > m {
        return Err(Error::Construction(format!(
            "degrees ({col_degree},{row_degree}) infeasible for n={n}"
        )));
    }
    for a in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(a);
        if let Some(rows) = attempt(n, m, col_degree, row_degree, girth_min == 6, &mut rng) {
            return ParityCheckMatrix::from_rows(n, rows);
        }
    }
    Err(Error::Construction(format!(
        "no ({col_degree},{row_degree}) placement with girth ≥ {girth_min} found for n={n}"
    )))
}
