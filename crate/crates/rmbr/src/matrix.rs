//! Utility-matrix files.
//!
//! A block is a JSON header line `{"utility_name":"comet","n":3,"l":3}`
//! followed by `n` lines of `l` space-separated decimals. A file may hold
//! several blocks back to back, one per n-best list in input order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rmbr_core::UtilityMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixHeader {
    utility_name: String,
    n: usize,
    l: usize,
}

/// Reads every matrix block from `reader`.
pub fn read_utility_matrices<R: BufRead>(reader: R, origin: &Path) -> Result<Vec<UtilityMatrix>> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, line)| match line {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((i + 1, other)),
    });
    let mut matrices = Vec::new();
    while let Some((line_no, header)) = lines.next() {
        let header = header.map_err(|e| Error::io(origin, e))?;
        let header: MatrixHeader = serde_json::from_str(&header)
            .map_err(|e| Error::parse(origin, line_no, format!("bad matrix header: {e}")))?;
        let mut values = Vec::with_capacity(header.n * header.l);
        for row in 0..header.n {
            let (row_line_no, line) = lines.next().ok_or_else(|| {
                Error::parse(origin, line_no, format!("matrix ends after {row} of {} rows", header.n))
            })?;
            let line = line.map_err(|e| Error::io(origin, e))?;
            let before = values.len();
            for field in line.split_whitespace() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::parse(origin, row_line_no, format!("`{field}` is not a number"))
                })?;
                if !v.is_finite() {
                    return Err(Error::parse(origin, row_line_no, format!("non-finite entry `{field}`")));
                }
                values.push(v);
            }
            if values.len() - before != header.l {
                return Err(Error::parse(
                    origin,
                    row_line_no,
                    format!("row has {} entries, header says {}", values.len() - before, header.l),
                ));
            }
        }
        let matrix = UtilityMatrix::new(header.utility_name, header.n, header.l, values)
            .map_err(|e| Error::parse(origin, line_no, e.to_string()))?;
        matrices.push(matrix);
    }
    if matrices.is_empty() {
        return Err(Error::EmptyInput { path: origin.to_path_buf() });
    }
    Ok(matrices)
}

pub fn load_utility_matrices(path: impl AsRef<Path>) -> Result<Vec<UtilityMatrix>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_utility_matrices(BufReader::new(file), path)
}

/// Loads the first matrix of `path` and returns its top-left `n x l` block.
pub fn load_utility_matrix(path: impl AsRef<Path>, n: usize, l: usize) -> Result<UtilityMatrix> {
    let first = load_utility_matrices(path)?.swap_remove(0);
    Ok(first.view(n, l)?)
}

pub fn write_utility_matrices<W: Write>(out: &mut W, matrices: &[UtilityMatrix]) -> std::io::Result<()> {
    for m in matrices {
        let header = MatrixHeader { utility_name: m.utility_name().to_string(), n: m.n(), l: m.l() };
        writeln!(out, "{}", serde_json::to_string(&header).expect("header serializes"))?;
        for row in m.rows() {
            let fields: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            writeln!(out, "{}", fields.join(" "))?;
        }
    }
    Ok(())
}

pub fn write_utility_matrix(path: impl AsRef<Path>, matrix: &UtilityMatrix) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_utility_matrices(&mut out, std::slice::from_ref(matrix))
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Vec<UtilityMatrix>> {
        read_utility_matrices(text.as_bytes(), Path::new("m.txt"))
    }

    const THREE: &str = "{\"utility_name\":\"comet\",\"n\":3,\"l\":3}\n1 0.5 0.25\n0.5 1 0.75\n0.2 0.3 1\n";

    #[test]
    fn truncating_view() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        std::fs::write(&path, THREE).unwrap();
        let m = load_utility_matrix(&path, 3, 2).unwrap();
        assert_eq!((m.n(), m.l()), (3, 2));
        assert_eq!(m.row(1), &[0.5, 1.0]);
        assert_eq!(m.utility_name(), "comet");
    }

    #[test]
    fn dimension_shortfall() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.txt");
        std::fs::write(&path, "{\"utility_name\":\"u\",\"n\":2,\"l\":2}\n1 0\n0 1\n").unwrap();
        assert!(matches!(
            load_utility_matrix(&path, 3, 2),
            Err(Error::Core(rmbr_core::Error::Dimension { .. }))
        ));
    }

    #[test]
    fn rejects_bad_entries() {
        let nan = "{\"utility_name\":\"u\",\"n\":1,\"l\":1}\nNaN\n";
        assert!(matches!(parse(nan), Err(Error::Parse { line: 2, .. })));
        let short = "{\"utility_name\":\"u\",\"n\":2,\"l\":2}\n1 0\n0\n";
        assert!(matches!(parse(short), Err(Error::Parse { line: 3, .. })));
        let truncated = "{\"utility_name\":\"u\",\"n\":2,\"l\":2}\n1 0\n";
        assert!(matches!(parse(truncated), Err(Error::Parse { .. })));
        assert!(matches!(parse(""), Err(Error::EmptyInput { .. })));
        let wide = "{\"utility_name\":\"u\",\"n\":1,\"l\":2}\n1 0\n";
        assert!(matches!(parse(wide), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn multiple_blocks() {
        let text = format!("{THREE}\n{{\"utility_name\":\"comet\",\"n\":1,\"l\":1}}\n0.5\n");
        let ms = parse(&text).unwrap();
        assert_eq!(ms.len(), 2);
        assert_eq!(ms[1].get(0, 0), 0.5);
    }

    proptest! {
        #[test]
        fn write_read_is_bit_exact(
            n in 1usize..6,
            raw in proptest::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 36),
            l_seed in 0usize..6,
        ) {
            let l = 1 + l_seed % n;
            let m = UtilityMatrix::new("bleurt", n, l, raw[..n * l].to_vec()).unwrap();
            let mut buf = Vec::new();
            write_utility_matrices(&mut buf, std::slice::from_ref(&m)).unwrap();
            let back = read_utility_matrices(buf.as_slice(), Path::new("mem")).unwrap();
            prop_assert_eq!(back.len(), 1);
            let bits = |m: &UtilityMatrix| m.rows().flatten().map(|v| v.to_bits()).collect::<Vec<_>>();
            prop_assert_eq!(bits(&back[0]), bits(&m));
            prop_assert_eq!(back[0].utility_name(), "bleurt");
        }
    }
}
