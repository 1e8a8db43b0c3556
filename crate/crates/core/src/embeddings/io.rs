use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::EmbeddingTable;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn is_header(fields: &[&str]) -> bool {
    fields.len() == 2 && fields.iter().all(|f| f.parse::<usize>().is_ok())
}

/// Parses the `word v1 ... vd` text format. A leading `|V| d` header line is
/// skipped. Errors carry the 1-based line number.
pub fn parse_embeddings<T: Real>(source: &str, origin: &str, expected_dim: Option<usize>) -> Result<EmbeddingTable<T>> {
    let err = |line: usize, message: String| Error::Parse {
        origin: origin.to_string(),
        line,
        message,
    };
    let mut table: Option<EmbeddingTable<T>> = None;
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        if lineno == 1 && is_header(&fields) {
            continue;
        }
        let word = fields[0];
        let values = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(T::lit)
                    .ok_or_else(|| err(lineno, format!("non-numeric component {f:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if values.is_empty() {
            return Err(err(lineno, format!("word {word:?} has no components")));
        }
        let t = match &mut table {
            Some(t) => t,
            None => {
                if let Some(d) = expected_dim {
                    if d != values.len() {
                        return Err(Error::DimensionMismatch {
                            expected: d,
                            found: values.len(),
                        });
                    }
                }
                table.insert(EmbeddingTable::new(values.len())?)
            }
        };
        if values.len() != t.dim() {
            return Err(err(
                lineno,
                format!("row has {} components, expected {}", values.len(), t.dim()),
            ));
        }
        if t.index_of(word).is_some() {
            return Err(err(lineno, format!("duplicate word {word:?}")));
        }
        t.push(word.to_string(), &values)?;
    }
    table.ok_or_else(|| err(0, "no vectors found".into()))
}

pub fn load_embeddings<T: Real>(path: &Path, expected_dim: Option<usize>) -> Result<EmbeddingTable<T>> {
    let src = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&src, &path.display().to_string(), expected_dim)
}

/// Writes the table with a `|V| d` header.
pub fn save_embeddings<T: Real>(path: &Path, table: &EmbeddingTable<T>) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    writeln!(w, "{} {}", table.len(), table.dim()).map_err(io)?;
    for (i, word) in table.words().iter().enumerate() {
        write!(w, "{word}").map_err(io)?;
        for x in table.row(i) {
            write!(w, " {x}").map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_plain_rows() {
        let t: EmbeddingTable<f64> =
            parse_embeddings("a 1 2 3 4\nb 0 0 0 1\nc 1 1 1 1\n", "t", None).unwrap();
        assert_eq!((t.len(), t.dim()), (3, 4));
        assert_eq!(t.get("b").unwrap(), &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn header_is_skipped() {
        let t: EmbeddingTable<f32> = parse_embeddings("2 3\nx 1 2 3\ny 4 5 6\n", "t", Some(3)).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn ragged_rows_report_line() {
        let e = parse_embeddings::<f64>("a 1 2 3 4\nb 1 2 3 4 5\n", "t", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn bad_values_and_duplicates_report_line() {
        let e = parse_embeddings::<f64>("a 1 2\nb 1 x\n", "t", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_embeddings::<f64>("a 1 2\nb 1 2\na 3 4\n", "t", None).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
    }

    #[test]
    fn expected_dimension_is_enforced() {
        let rows: String = (0..3).map(|i| format!("w{i} {}\n", vec!["0.5"; 100].join(" "))).collect();
        let e = parse_embeddings::<f64>(&rows, "t", Some(200)).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { expected: 200, found: 100 }));
    }

    #[test]
    fn save_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.txt");
        let t = EmbeddingTable::from_rows(2, [("a", vec![0.25f64, -1.5]), ("b", vec![3.0, 1e-7])]).unwrap();
        save_embeddings(&path, &t).unwrap();
        let back: EmbeddingTable<f64> = load_embeddings(&path, Some(2)).unwrap();
        assert_eq!(back, t);
    }
}
