use std::fmt::Write as _;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next nonblank line as integers, with its 1-based line number.
    fn next_ints(&mut self, what: &str) -> Result<(usize, Vec<usize>)> {
        for (i, line) in self.inner.by_ref() {
            self.last = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<usize>().map_err(|_| Error::AlistParse {
                        line: i + 1,
                        msg: format!("'{t}' is not a nonnegative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            return Ok((i + 1, nums));
        }
        Err(Error::AlistParse { line: self.last + 1, msg: format!("unexpected end of input, expected {what}") })
    }
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::AlistParse { line, msg: msg.into() }
}

fn expect_len(line: usize, v: &[usize], len: usize, what: &str) -> Result<()> {
    if v.len() != len {
        return Err(err(line, format!("{what}: expected {len} values, found {}", v.len())));
    }
    Ok(())
}

/// Reads one block of adjacency lists (1-based, zero padding allowed after
/// the declared degree).
fn read_lists(
    lines: &mut Lines<'_>,
    degrees: &[usize],
    bound: usize,
    what: &str,
) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::with_capacity(degrees.len());
    for (i, &d) in degrees.iter().enumerate() {
        let (ln, nums) = lines.next_ints(what)?;
        if nums.len() < d {
            return Err(err(ln, format!("{what} {}: degree {d} but {} indices", i + 1, nums.len())));
        }
        if nums[d..].iter().any(|&x| x != 0) {
            return Err(err(ln, format!("{what} {}: more nonzero indices than degree {d}", i + 1)));
        }
        let mut list = Vec::with_capacity(d);
        for &x in &nums[..d] {
            if x == 0 || x > bound {
                return Err(err(ln, format!("{what} {}: index {x} outside 1..={bound}", i + 1)));
            }
            list.push(x - 1);
        }
        out.push(list);
    }
    Ok(out)
}

/// Parses MacKay's alist format.
pub fn load_alist(text: &str) -> Result<ParityCheckMatrix> {
    let mut lines = Lines::new(text);
    let (ln, hdr) = lines.next_ints("header")?;
    expect_len(ln, &hdr, 2, "header")?;
    let (n, m) = (hdr[0], hdr[1]);
    if n == 0 || m == 0 {
        return Err(err(ln, "empty matrix"));
    }
    let (ln, maxes) = lines.next_ints("maximum degrees")?;
    expect_len(ln, &maxes, 2, "maximum degrees")?;
    let (ln_c, col_deg) = lines.next_ints("column degrees")?;
    expect_len(ln_c, &col_deg, n, "column degrees")?;
    let (ln_r, row_deg) = lines.next_ints("row degrees")?;
    expect_len(ln_r, &row_deg, m, "row degrees")?;
    if col_deg.iter().max() != Some(&maxes[0]) || row_deg.iter().max() != Some(&maxes[1]) {
        return Err(err(ln, "maximum degrees disagree with the degree lists"));
    }
    let cols = read_lists(&mut lines, &col_deg, m, "column")?;
    let rows = read_lists(&mut lines, &row_deg, n, "row")?;

    let line = lines.last;
    let h = ParityCheckMatrix::from_rows(n, rows).map_err(|e| err(line, e.to_string()))?;
    for (j, col) in cols.into_iter().enumerate() {
        let mut col = col;
        col.sort_unstable();
        if col != h.col(j) {
            return Err(err(line, format!("column {} disagrees with the row lists", j + 1)));
        }
    }
    Ok(h)
}

/// Writes `h` in alist format with zero padding to the maximum degree.
pub fn emit_alist(h: &ParityCheckMatrix) -> String {
    let max_c = h.cols().iter().map(Vec::len).max().unwrap_or(0);
    let max_r = h.rows().iter().map(Vec::len).max().unwrap_or(0);
    let mut s = String::new();
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(s, "{} {}", h.n(), h.m());
    let _ = writeln!(s, "{max_c} {max_r}");
    let _ = writeln!(s, "{}", join(&mut h.cols().iter().map(Vec::len)));
    let _ = writeln!(s, "{}", join(&mut h.rows().iter().map(Vec::len)));
    for (lists, width) in [(h.cols(), max_c), (h.rows(), max_r)] {
        for l in lists {
            let mut v: Vec<usize> = l.iter().map(|x| x + 1).collect();
            v.resize(width, 0);
            let _ = writeln!(s, "{}", join(&mut v.into_iter()));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "4 2\n1 2\n1 1 1 1\n2 2\n1\n1\n2\n2\n1 2\n3 4\n";

    #[test]
    fn parses_hand_fixture() {
        let h = load_alist(SMALL).unwrap();
        assert_eq!(h.rows(), &[vec![0, 1], vec![2, 3]]);
        assert_eq!(load_alist(&emit_alist(&h)).unwrap(), h);
    }

    #[test]
    fn zero_index_is_rejected_with_line() {
        let bad = SMALL.replace("1 2\n3 4", "0 2\n3 4");
        match load_alist(&bad) {
            Err(Error::AlistParse { line, .. }) => assert_eq!(line, 9),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn inconsistent_lists_are_rejected() {
        let bad = SMALL.replace("1\n1\n2\n2\n", "1\n2\n2\n2\n");
        assert!(matches!(load_alist(&bad), Err(Error::AlistParse { .. })));
        assert!(load_alist("4 2\n1 2\n").is_err());
        assert!(load_alist("4 x\n").is_err());
    }
}
