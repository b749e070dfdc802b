//! Matrix Market reading and writing (`coordinate` and `array` formats, real
//! or integer fields, general / symmetric / skew-symmetric storage).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matcore::dense::DenseMatrix;
use crate::matcore::sparse::SparseMatrix;

/// A matrix read from a Matrix Market file, in the storage its header named.
#[derive(Debug, Clone, PartialEq)]
pub enum MarketMatrix {
    Sparse(SparseMatrix),
    Dense(DenseMatrix),
}

impl MarketMatrix {
    pub fn to_dense(&self) -> DenseMatrix {
        match self {
            MarketMatrix::Sparse(s) => s.to_dense(),
            MarketMatrix::Dense(d) => d.clone(),
        }
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        match self {
            MarketMatrix::Sparse(s) => s.clone(),
            MarketMatrix::Dense(d) => SparseMatrix::from_dense(d),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<MarketMatrix> {
    let mut lines = reader.lines();
    let header = lines.next().ok_or_else(|| bad("empty input"))??;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(bad(format!("invalid header `{header}`")));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(bad(format!("unsupported format `{other}`"))),
    };
    match tokens[3].as_str() {
        "real" | "integer" | "double" => {}
        other => return Err(bad(format!("unsupported field `{other}`"))),
    }
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(bad(format!("unsupported symmetry `{other}`"))),
    };

    let mut data = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        data.push(t.to_string());
    }
    let mut rows_iter = data.iter();
    let size_line = rows_iter.next().ok_or_else(|| bad("missing size line"))?;
    let size: Vec<usize> = size_line
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad(format!("bad size line `{size_line}`"))))
        .collect::<Result<_>>()?;

    if coordinate {
        let [rows, cols, nnz] = size[..] else {
            return Err(bad(format!("coordinate size line needs 3 values, got `{size_line}`")));
        };
        let mut triplets = Vec::with_capacity(nnz);
        for line in rows_iter.by_ref().take(nnz) {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 3 {
                return Err(bad(format!("bad entry `{line}`")));
            }
            let i: usize = f[0].parse().map_err(|_| bad(format!("bad row index `{}`", f[0])))?;
            let j: usize = f[1].parse().map_err(|_| bad(format!("bad column index `{}`", f[1])))?;
            let v: f64 = f[2].parse().map_err(|_| bad(format!("bad value `{}`", f[2])))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(bad(format!("index ({i}, {j}) outside {rows}x{cols}")));
            }
            triplets.push((i - 1, j - 1, v));
            if i != j {
                match symmetry {
                    Symmetry::General => {}
                    Symmetry::Symmetric => triplets.push((j - 1, i - 1, v)),
                    Symmetry::Skew => triplets.push((j - 1, i - 1, -v)),
                }
            }
        }
        if triplets.len() < nnz {
            return Err(bad(format!("expected {nnz} entries")));
        }
        return Ok(MarketMatrix::Sparse(SparseMatrix::from_triplets(rows, cols, &triplets)?));
    }

    let [rows, cols] = size[..] else {
        return Err(bad(format!("array size line needs 2 values, got `{size_line}`")));
    };
    let values: Vec<f64> = rows_iter
        .flat_map(|l| l.split_whitespace())
        .map(|s| s.parse().map_err(|_| bad(format!("bad value `{s}`"))))
        .collect::<Result<_>>()?;
    let mut m = DenseMatrix::zeros(rows, cols);
    let mut it = values.into_iter();
    let mut next = || it.next().ok_or_else(|| bad("too few array entries"));
    for j in 0..cols {
        let start = match symmetry {
            Symmetry::General => 0,
            Symmetry::Symmetric => j,
            Symmetry::Skew => j + 1,
        };
        for i in start..rows {
            let v = next()?;
            m[(i, j)] = v;
            match symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => m[(j, i)] = v,
                Symmetry::Skew => m[(j, i)] = -v,
            }
        }
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(bad("non-finite entry"));
    }
    Ok(MarketMatrix::Dense(m))
}

pub fn write_sparse<W: Write>(mut w: W, m: &SparseMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

pub fn write_dense<W: Write>(mut w: W, m: &DenseMatrix) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", m.nrows(), m.ncols())?;
    for v in m.iter() {
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}

pub fn read_path(path: &Path) -> Result<MarketMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

pub fn write_sparse_path(path: &Path, m: &SparseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_sparse(&mut w, m)?;
    w.flush()?;
    Ok(())
}

pub fn write_dense_path(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dense(&mut w, m)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_roundtrip_is_exact() {
        let s = SparseMatrix::toeplitz_bands(5, &[(-1, 0.2), (0, 5.0), (1, 0.3)]);
        let mut buf = Vec::new();
        write_sparse(&mut buf, &s).unwrap();
        assert!(buf.starts_with(b"%%MatrixMarket matrix coordinate real general\n"));
        assert_eq!(read_matrix_market(&buf[..]).unwrap(), MarketMatrix::Sparse(s));
    }

    #[test]
    fn array_roundtrip_is_exact() {
        let d = DenseMatrix::from_fn(3, 2, |i, j| 0.1 * i as f64 - 1.0 / (j as f64 + 3.0));
        let mut buf = Vec::new();
        write_dense(&mut buf, &d).unwrap();
        assert_eq!(read_matrix_market(&buf[..]).unwrap(), MarketMatrix::Dense(d));
    }

    #[test]
    fn symmetric_coordinate_expands() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 2\n1 1 4\n2 1 -1\n";
        let m = read_matrix_market(text.as_bytes()).unwrap().to_dense();
        assert_eq!(m, DenseMatrix::from_row_slice(2, 2, &[4.0, -1.0, -1.0, 0.0]));
    }

    #[test]
    fn symmetric_array_fills_lower_triangle_by_columns() {
        let text = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let m = read_matrix_market(text.as_bytes()).unwrap().to_dense();
        assert_eq!(m, DenseMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 3.0]));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        for text in [
            "",
            "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n",
            "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n",
            "%%MatrixMarket matrix array real general\n2 2\n1\n",
            "%%MatrixMarket vector array real general\n2\n1\n1\n",
        ] {
            assert!(matches!(read_matrix_market(text.as_bytes()), Err(Error::MatrixMarket(_))), "{text:?}");
        }
    }
}
