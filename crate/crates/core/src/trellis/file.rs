//! Plain-text trellis files.
//!
//! ```text
//! # comment lines and trailing comments start with '#'
//! N K M
//! from input to xs1 xs2 xr      (one line per edge, N*K lines)
//! ```
//!
//! Fields are unsigned decimal integers separated by ASCII whitespace.
//! Blank lines are ignored. Every `(from, input)` pair with `from < N` and
//! `input < K` must occur exactly once, in any order. Labels are indices
//! into the M-PSK set. Input 0 of state 0 must be a self loop and repeated
//! zero inputs must bring every state back to state 0.

use crate::constellation::make_psk;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{LabelledTrellis, Trellis};

/// Raw contents of a trellis file before validation of the trellis itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrellisFile {
    pub n_states: usize,
    pub branches: usize,
    pub m: usize,
    /// `(from, input, to, [xs1, xs2, xr])`.
    pub edges: Vec<(usize, usize, usize, [usize; 3])>,
}

fn fields(line: &str) -> impl Iterator<Item = &str> {
    line.split('#').next().unwrap_or("").split_ascii_whitespace()
}

fn parse_row(line_no: usize, line: &str, want: usize) -> Result<Vec<usize>> {
    let row: Vec<usize> = fields(line)
        .map(|f| {
            f.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("not an unsigned integer: {f:?}"),
            })
        })
        .collect::<Result<_>>()?;
    if row.len() != want {
        return Err(Error::Parse {
            line: line_no,
            msg: format!("expected {want} fields, found {}", row.len()),
        });
    }
    Ok(row)
}

pub fn parse_trellis_file(text: &str) -> Result<TrellisFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| fields(l).next().is_some());
    let (hl, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        msg: "missing header".into(),
    })?;
    let h = parse_row(hl, header, 3)?;
    let (n_states, branches, m) = (h[0], h[1], h[2]);
    if n_states == 0 || branches == 0 {
        return Err(Error::Parse {
            line: hl,
            msg: "N and K must be positive".into(),
        });
    }
    let mut seen = vec![false; n_states * branches];
    let mut edges = Vec::with_capacity(n_states * branches);
    for (ln, line) in lines {
        let r = parse_row(ln, line, 6)?;
        let (from, input, to) = (r[0], r[1], r[2]);
        let err = |msg: String| Error::Parse { line: ln, msg };
        if from >= n_states || to >= n_states {
            return Err(err(format!("state out of range 0..{n_states}")));
        }
        if input >= branches {
            return Err(err(format!("input out of range 0..{branches}")));
        }
        if let Some(x) = r[3..].iter().find(|&&x| x >= m) {
            return Err(err(format!("label {x} out of range 0..{m}")));
        }
        let slot = from * branches + input;
        if seen[slot] {
            return Err(err(format!("duplicate edge {from}/{input}")));
        }
        seen[slot] = true;
        edges.push((from, input, to, [r[3], r[4], r[5]]));
    }
    if edges.len() != seen.len() {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("expected {} edges, found {}", seen.len(), edges.len()),
        });
    }
    edges.sort_by_key(|e| (e.0, e.1));
    Ok(TrellisFile {
        n_states,
        branches,
        m,
        edges,
    })
}

impl TrellisFile {
    pub fn into_labelled<T: Real>(self, name: &str) -> Result<LabelledTrellis<T>> {
        let mut next = vec![vec![0; self.branches]; self.n_states];
        for &(from, input, to, _) in &self.edges {
            next[from][input] = to;
        }
        let trellis = Trellis::from_next_states(next)?;
        let labels = self.edges.iter().map(|e| e.3).collect();
        LabelledTrellis::new(name, trellis, labels, make_psk(self.m)?)
    }
}

impl<T: Real> LabelledTrellis<T> {
    /// Parses and validates a trellis file.
    pub fn from_text(name: &str, text: &str) -> Result<Self> {
        parse_trellis_file(text)?.into_labelled(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "# toy\n2 2 4\n0 0 0 0 0 0\n0 1 1 2 2 3 # trailing\n\n1 1 1 3 3 2\n1 0 0 1 1 1\n";

    #[test]
    fn parses_out_of_order_lines_and_comments() {
        let f = parse_trellis_file(TOY).unwrap();
        assert_eq!((f.n_states, f.branches, f.m), (2, 2, 4));
        assert_eq!(f.edges[2], (1, 0, 0, [1, 1, 1]));
        let lt: LabelledTrellis<f64> = f.into_labelled("toy").unwrap();
        assert_eq!(lt.labels()[3], [3, 3, 2]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let bad = TOY.replace("1 1 1 3 3 2", "1 1 1 3 3");
        assert!(matches!(
            parse_trellis_file(&bad),
            Err(Error::Parse { line: 6, .. })
        ));
        let bad = TOY.replace("1 1 1 3 3 2", "1 1 1 3 3 x");
        assert!(matches!(parse_trellis_file(&bad), Err(Error::Parse { line: 6, .. })));
        let bad = TOY.replace("1 1 1 3 3 2", "1 0 1 3 3 2");
        assert!(parse_trellis_file(&bad).is_err());
        let bad = TOY.replace("1 1 1 3 3 2", "1 1 1 3 3 4");
        assert!(parse_trellis_file(&bad).is_err());
        assert!(parse_trellis_file("# nothing\n").is_err());
        assert!(parse_trellis_file("2 2 4\n0 0 0 0 0 0\n").is_err());
    }

    #[test]
    fn rejects_invalid_constellation_and_structure() {
        let bad = TOY.replacen("2 2 4", "2 2 3", 1);
        assert!(LabelledTrellis::<f64>::from_text("x", &bad).is_err());
        // both edges of state 0 go to state 1: state 0 has no self loop
        let bad = TOY.replace("0 0 0 0 0 0", "0 0 1 0 0 0");
        assert!(LabelledTrellis::<f64>::from_text("x", &bad).is_err());
    }
}
