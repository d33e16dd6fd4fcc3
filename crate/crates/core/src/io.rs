//! Text and binary serialization shared by golden files, records and reports.
//!
//! Numbers are written as the shortest decimal string that parses back to the
//! identical `f64`. Matrices are stored row-major as `(re, im)` pairs: CSV with
//! a `row,col,re,im` header, or a binary blob of `b"SQVM"`, the dimension as a
//! little-endian `u64`, then `dim²` little-endian `f64` pairs.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockOperator;

const MAGIC: &[u8; 4] = b"SQVM";

/// Shortest round-trip decimal; exponent form outside `[1e-4, 1e15)`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_matrix_csv<W: Write>(op: &FockOperator, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["row", "col", "re", "im"])?;
    let m = op.matrix();
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            w.write_record([
                r.to_string(),
                c.to_string(),
                format_f64(z.re),
                format_f64(z.im),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_csv<R: Read>(input: R) -> Result<FockOperator> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut entries = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 4 {
            return Err(Error::Parse(format!(
                "expected 4 columns, found {}",
                rec.len()
            )));
        }
        let r: usize = parse(&rec[0])?;
        let c: usize = parse(&rec[1])?;
        let re: f64 = parse(&rec[2])?;
        let im: f64 = parse(&rec[3])?;
        entries.push((r, c, C64::new(re, im)));
    }
    let dim = (entries.len() as f64).sqrt() as usize;
    if dim * dim != entries.len() || dim == 0 {
        return Err(Error::Parse(format!(
            "{} entries do not form a square matrix",
            entries.len()
        )));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for (k, (r, c, z)) in entries.into_iter().enumerate() {
        if (r, c) != (k / dim, k % dim) {
            return Err(Error::Parse(format!(
                "entry ({r},{c}) out of row-major order"
            )));
        }
        m[(r, c)] = z;
    }
    FockOperator::from_matrix(m)
}

pub fn write_matrix_binary<W: Write>(op: &FockOperator, mut out: W) -> Result<()> {
    let m = op.matrix();
    out.write_all(MAGIC)?;
    out.write_all(&(m.nrows() as u64).to_le_bytes())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.write_all(&m[(r, c)].re.to_le_bytes())?;
            out.write_all(&m[(r, c)].im.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_binary<R: Read>(mut input: R) -> Result<FockOperator> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Parse("bad matrix magic".into()));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let dim = u64::from_le_bytes(word) as usize;
    if dim == 0 || dim > 1 << 16 {
        return Err(Error::Parse(format!("implausible matrix dimension {dim}")));
    }
    let mut m = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            input.read_exact(&mut word)?;
            let re = f64::from_le_bytes(word);
            input.read_exact(&mut word)?;
            let im = f64::from_le_bytes(word);
            m[(r, c)] = C64::new(re, im);
        }
    }
    FockOperator::from_matrix(m)
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("cannot parse '{s}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn annihilation_golden_csv() {
        let mut buf = Vec::new();
        write_matrix_csv(&FockOperator::annihilation(2).unwrap(), &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "row,col,re,im\n0,0,0,0\n0,1,1,0\n1,0,0,0\n1,1,0,0\n"
        );
    }

    #[test]
    fn formatting() {
        assert_eq!(format_f64(0.0125), "0.0125");
        assert_eq!(format_f64(5.5600953471598e-4), "0.00055600953471598");
        assert_eq!(format_f64(1e-12), "1e-12");
        assert_eq!(format_f64(-2.5), "-2.5");
    }

    #[test]
    fn truncated_input_rejected() {
        assert!(read_matrix_binary(&b"SQVM\x02\0\0\0\0\0\0\0"[..]).is_err());
        assert!(read_matrix_csv(&b"row,col,re,im\n0,0,1,0\n0,1,0,0\n"[..]).is_err());
    }

    proptest! {
        #[test]
        fn matrices_round_trip(dim in 1usize..6, seed in proptest::collection::vec(-1e3f64..1e3, 72)) {
            let m = DMatrix::from_fn(dim, dim, |r, c| C64::new(seed[2 * (r * 6 + c)], seed[2 * (r * 6 + c) + 1] * 1e-7));
            let op = FockOperator::from_matrix(m).unwrap();
            let mut text = Vec::new();
            write_matrix_csv(&op, &mut text).unwrap();
            prop_assert_eq!(read_matrix_csv(&text[..]).unwrap(), op.clone());
            let mut bin = Vec::new();
            write_matrix_binary(&op, &mut bin).unwrap();
            prop_assert_eq!(read_matrix_binary(&bin[..]).unwrap(), op);
        }
    }
}
