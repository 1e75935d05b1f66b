//! Coordinate-list text format: one `i j re im` line per nonzero entry,
//! with both `(i, j)` and `(j, i)` present. `#` starts a comment; an
//! optional `# qubits N` comment fixes the dimension.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{DenseHermitian, C64, ZERO};

pub fn parse_coordinate_list(text: &str) -> Result<DenseHermitian> {
    let mut entries = Vec::new();
    let mut qubits: Option<u32> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("qubits") {
                let n = words.next().and_then(|w| w.parse().ok()).ok_or(Error::Parse {
                    line: lineno + 1,
                    message: "expected `# qubits N`".into(),
                })?;
                qubits = Some(n);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse {
                line: lineno + 1,
                message: format!("expected `i j re im`, found {} fields", fields.len()),
            });
        }
        let parse_err = |what: &str| Error::Parse {
            line: lineno + 1,
            message: format!("invalid {what}"),
        };
        let i: usize = fields[0].parse().map_err(|_| parse_err("row index"))?;
        let j: usize = fields[1].parse().map_err(|_| parse_err("column index"))?;
        let re: f64 = fields[2].parse().map_err(|_| parse_err("real part"))?;
        let im: f64 = fields[3].parse().map_err(|_| parse_err("imaginary part"))?;
        entries.push((i, j, C64::new(re, im)));
    }
    let max_index = entries.iter().map(|&(i, j, _)| i.max(j)).max().unwrap_or(0);
    let dim = match qubits {
        Some(n) if n <= 12 => 1usize << n,
        Some(n) => {
            return Err(Error::Parse { line: 0, message: format!("{n} qubits exceeds 12") })
        }
        None => (max_index + 1).next_power_of_two(),
    };
    if max_index >= dim {
        return Err(Error::Parse {
            line: 0,
            message: format!("index {max_index} outside dimension {dim}"),
        });
    }
    let mut m = DMatrix::from_element(dim, dim, ZERO);
    let mut seen = DMatrix::from_element(dim, dim, false);
    for (i, j, v) in entries {
        if seen[(i, j)] {
            return Err(Error::Parse { line: 0, message: format!("duplicate entry ({i}, {j})") });
        }
        seen[(i, j)] = true;
        m[(i, j)] = v;
    }
    for i in 0..dim {
        for j in 0..dim {
            if seen[(i, j)] != seen[(j, i)] {
                return Err(Error::Parse {
                    line: 0,
                    message: format!("entry ({i}, {j}) lacks its symmetric partner"),
                });
            }
        }
    }
    DenseHermitian::with_tolerance(m, 1e-10)
}

pub fn format_coordinate_list(h: &DenseHermitian) -> String {
    let dim = h.dim();
    let mut out = String::new();
    if dim.is_power_of_two() {
        let _ = writeln!(out, "# qubits {}", dim.trailing_zeros());
    }
    for i in 0..dim {
        for j in 0..dim {
            let v = h.entry(i, j);
            if v != ZERO {
                let _ = writeln!(out, "{i} {j} {} {}", v.re, v.im);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_sparse_hermitian;

    #[test]
    fn round_trip_is_exact() {
        let h = random_sparse_hermitian(3, 3, 1.5, 21).unwrap();
        let text = format_coordinate_list(&h);
        assert_eq!(parse_coordinate_list(&text).unwrap(), h);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_coordinate_list("0 1 1 0\n").is_err());
        assert!(parse_coordinate_list("0 1 1 0\n1 0 2 0\n").is_err());
        assert!(parse_coordinate_list("0 0 1\n").is_err());
        assert!(parse_coordinate_list("0 0 1 0.5\n").is_err());
        let ok = parse_coordinate_list("# qubits 2\n0 1 0 1\n1 0 0 -1\n").unwrap();
        assert_eq!(ok.dim(), 4);
    }
}
