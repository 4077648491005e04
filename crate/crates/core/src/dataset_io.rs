//! Plain-text dataset files.
//!
//! ```text
//! dim=<d>,n=<N>,labeled=<0|1>
//! x_1,...,x_d[,label]      (N lines)
//! ```
//!
//! Coordinates are written with 17 significant digits so a save/load round
//! trip is bit-exact.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::format_g17;
use crate::space::{Dataset, Label};

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    let labels = ds.labels();
    let mut out = format!("dim={},n={},labeled={}\n", ds.dim(), ds.len(), u8::from(labels.is_some()));
    for (i, p) in ds.points().enumerate() {
        for (j, c) in p.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_g17(*c));
        }
        if let Some(l) = labels {
            write!(out, ",{}", l[i]).expect("write to String");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_dataset(&text, path)
}

fn parse_dataset(text: &str, path: &Path) -> Result<Dataset> {
    let err = |line: usize, message: String| Error::Parse {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "missing header".into()))?;
    let (dim, n, labeled) = parse_header(header).map_err(|m| err(1, m))?;

    let width = dim + usize::from(labeled);
    let mut coords = Vec::with_capacity(n * dim);
    let mut labels = labeled.then(|| Vec::with_capacity(n));
    let mut rows = 0;
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 2;
        if rows == n {
            if line.trim().is_empty() {
                continue;
            }
            return Err(err(lineno, format!("more than n={n} data rows")));
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != width {
            return Err(err(lineno, format!("expected {width} fields, found {}", fields.len())));
        }
        for (j, f) in fields[..dim].iter().enumerate() {
            let v: f64 = f
                .trim()
                .parse()
                .map_err(|_| err(lineno, format!("field {}: `{f}` is not a number", j + 1)))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("field {}: non-finite value `{f}`", j + 1)));
            }
            coords.push(v);
        }
        if let Some(labels) = labels.as_mut() {
            let f = fields[dim];
            let l: Label = f
                .trim()
                .parse()
                .map_err(|_| err(lineno, format!("label `{f}` is not a non-negative integer")))?;
            labels.push(l);
        }
        rows += 1;
    }
    if rows != n {
        return Err(err(rows + 2, format!("expected n={n} data rows, found {rows}")));
    }
    Dataset::new(dim, coords, labels)
}

fn header_value<'a>(part: &'a str, key: &str) -> Option<&'a str> {
    part.strip_prefix(key)?.strip_prefix('=')
}

fn parse_header(line: &str) -> std::result::Result<(usize, usize, bool), String> {
    let bad = || format!("malformed header `{line}` (expected `dim=<d>,n=<N>,labeled=<0|1>`)");
    let parts: Vec<&str> = line.trim().split(',').collect();
    let [d, n, l] = parts.as_slice() else {
        return Err(bad());
    };
    let dim: usize = header_value(d, "dim").and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let n: usize = header_value(n, "n").and_then(|v| v.parse().ok()).ok_or_else(bad)?;
    let labeled = match header_value(l, "labeled") {
        Some("0") => false,
        Some("1") => true,
        _ => return Err(bad()),
    };
    if dim == 0 {
        return Err("dim must be at least 1".into());
    }
    Ok((dim, n, labeled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gaussian_dataset;
    use crate::rng::RngStream;
    use proptest::prelude::*;

    fn roundtrip(ds: &Dataset) -> Dataset {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        save_dataset(ds, &path).unwrap();
        load_dataset(&path).unwrap()
    }

    #[test]
    fn labeled_round_trip() {
        let mut rng = RngStream::new(1, 1).rng();
        let ds = gaussian_dataset(10, 4, &mut rng).unwrap();
        let ds = ds.with_labels((0..10).map(|i| i % 3).collect()).unwrap();
        assert_eq!(roundtrip(&ds), ds);
        let empty = Dataset::empty(3).unwrap();
        assert_eq!(roundtrip(&empty), empty);
    }

    #[test]
    fn header_format() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.txt");
        let ds = Dataset::from_points(2, &[vec![0.5, -1.0]], Some(vec![3])).unwrap();
        save_dataset(&ds, &path).unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "dim=2,n=1,labeled=1\n0.5,-1,3\n");
    }

    fn load_str(text: &str) -> Result<Dataset> {
        parse_dataset(text, Path::new("mem.txt"))
    }

    #[test]
    fn short_row_cites_its_line() {
        let err = load_str("dim=4,n=2,labeled=0\n1,2,3,4\n1,2,3\n").unwrap_err();
        match err {
            Error::Parse { line, ref message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 4 fields"));
            }
            other => panic!("{other}"),
        }
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn malformed_inputs() {
        let line_of = |t: &str| match load_str(t) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("{other:?}"),
        };
        assert_eq!(line_of(""), 1);
        assert_eq!(line_of("dim=2,n=1\n1,2\n"), 1);
        assert_eq!(line_of("dim=2,n=1,labeled=2\n1,2\n"), 1);
        assert_eq!(line_of("dim=0,n=0,labeled=0\n"), 1);
        assert_eq!(line_of("dim=2,n=1,labeled=0\n1,NaN\n"), 2);
        assert_eq!(line_of("dim=2,n=1,labeled=0\n1,inf\n"), 2);
        assert_eq!(line_of("dim=2,n=1,labeled=0\n1,x\n"), 2);
        assert_eq!(line_of("dim=1,n=1,labeled=1\n1,-1\n"), 2);
        assert_eq!(line_of("dim=1,n=2,labeled=0\n1\n"), 3);
        assert_eq!(line_of("dim=1,n=1,labeled=0\n1\n2\n"), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn gaussian_round_trip_is_bit_exact(seed in any::<u64>(), n in 0usize..30, d in 1usize..8) {
            let ds = gaussian_dataset(n, d, &mut RngStream::new(seed, 0).rng()).unwrap();
            let back = roundtrip(&ds);
            let a: Vec<u64> = ds.coords().iter().map(|c| c.to_bits()).collect();
            let b: Vec<u64> = back.coords().iter().map(|c| c.to_bits()).collect();
            prop_assert_eq!(a, b);
        }
    }
}
