//! Plain-text field format.
//!
//! ```text
//! 2 9 1 0
//! -1
//! -1
//! ...
//! ```
//!
//! The header line holds `n m L symmetric` (`symmetric` is `0` or `1`),
//! then one value per line in row-major order with `x_n` fastest. Values
//! use the shortest decimal that round-trips to the same `f64`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

pub fn write_field<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let g = field.grid();
    writeln!(
        out,
        "{} {} {} {}",
        g.dim(),
        g.m(),
        g.half_width(),
        u8::from(field.is_symmetric())
    )?;
    for v in field.values() {
        writeln!(out, "{v:?}")?;
    }
    Ok(())
}

pub fn read_field<R: BufRead>(input: R) -> Result<ScalarField> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty input".into()))??;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 4 {
        return Err(Error::Format(format!("bad header line: {header:?}")));
    }
    let parse_usize = |s: &str| {
        s.parse::<usize>()
            .map_err(|e| Error::Format(format!("header field {s:?}: {e}")))
    };
    let dim = parse_usize(parts[0])?;
    let m = parse_usize(parts[1])?;
    let half_width: f64 = parts[2]
        .parse()
        .map_err(|e| Error::Format(format!("half width {:?}: {e}", parts[2])))?;
    let symmetric = match parts[3] {
        "0" => false,
        "1" => true,
        other => return Err(Error::Format(format!("symmetric flag {other:?}"))),
    };
    let grid = Grid::new(dim, m, half_width)?;
    let mut values = Vec::with_capacity(grid.node_count());
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|e| Error::Format(format!("value on line {}: {e}", lineno + 2)))?;
        values.push(v);
    }
    ScalarField::from_values(grid, values, symmetric)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(2, 9, 1.0).unwrap();
        let f = ScalarField::sample(g, |p| p[0]).unwrap();
        let mut buf = Vec::new();
        write_field(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("2 9 1 0"));
        assert_eq!(lines.next(), Some("-1.0"));
        assert_eq!(text.lines().count(), 82);
    }

    #[test]
    fn rejects_truncated_input() {
        let text = "2 9 1 0\n1.0\n2.0\n";
        assert!(read_field(text.as_bytes()).is_err());
        assert!(read_field("".as_bytes()).is_err());
        assert!(read_field("2 9 1 maybe\n".as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), m in prop::sample::select(vec![9usize, 11, 13])) {
            let g = Grid::new(2, m, 0.75).unwrap();
            let f = ScalarField::sample(g, |p| {
                let s = (seed % 1000) as f64 / 7.0;
                (s * p[0]).sin() * (p[1] * p[1] + 1e-7 * s).exp()
            }).unwrap().into_symmetric().unwrap();
            let mut buf = Vec::new();
            write_field(&f, &mut buf).unwrap();
            let back = read_field(buf.as_slice()).unwrap();
            prop_assert_eq!(back, f);
        }
    }
}
