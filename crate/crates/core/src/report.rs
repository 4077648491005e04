//! CSV reports with fixed per-command schemas.
//!
//! Files start with `# seed=<s>` and any further `#` comment lines, then the
//! header, then one line per row. Lines end in `\n`. Floats are printed with
//! 17 significant digits in C `%.17g` style, which round-trips every `f64`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const CONCENTRATION: &[&str] = &["n", "d", "runs", "min", "q1", "median", "q3", "max", "mean"];
pub const COVERAGE: &[&str] = &["n", "d", "epsilon", "runs", "mean_fraction"];
pub const LOCAL_SIM: &[&str] = &[
    "E",
    "k",
    "policy",
    "closed_form",
    "paper_printed_form",
    "monte_carlo",
    "half_width",
    "trials",
    "agree",
];
pub const E2E: &[&str] = &[
    "dim",
    "n_train",
    "separation",
    "epsilon",
    "policy",
    "n_queries",
    "exact_error",
    "approx_error",
];
pub const PERTURB_CHECK: &[&str] = &["duplicates", "draws", "amplitude", "chi_square", "p_value", "pass"];
pub const FRACTILE_COMPARE: &[&str] = &[
    "d",
    "n",
    "epsilon",
    "fractile",
    "mean_eps_candidates",
    "fractile_candidates",
];
pub const LSH_BENCH: &[&str] = &[
    "k",
    "L",
    "w",
    "max_candidates",
    "recall_at_1",
    "mean_candidates",
    "mean_distance_ratio",
];

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(u64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl Field {
    pub fn render(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            Field::Float(v) => format_g17(*v),
            Field::Text(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
        }
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v as u64)
    }
}

impl From<u64> for Field {
    fn from(v: u64) -> Self {
        Field::Int(v)
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<bool> for Field {
    fn from(v: bool) -> Self {
        Field::Bool(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_owned())
    }
}

pub type ReportRow = Vec<Field>;

/// A schema-tagged table ready to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub header: &'static [&'static str],
    pub seed: u64,
    /// Extra `#` lines written after the seed line, without the `# `.
    pub comments: Vec<String>,
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn new(header: &'static [&'static str], seed: u64) -> Self {
        Self {
            header,
            seed,
            comments: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: ReportRow) {
        assert_eq!(row.len(), self.header.len(), "row does not match the {:?} schema", self.header);
        self.rows.push(row);
    }

    /// The exact bytes [`write_csv`] puts on disk.
    pub fn to_csv_string(&self) -> String {
        let mut out = format!("# seed={}\n", self.seed);
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Field::render)).expect("in-memory write");
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("fields are UTF-8"));
        out
    }
}

pub fn write_csv(report: &Report, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut f = BufWriter::new(File::create(path).map_err(io)?);
    f.write_all(report.to_csv_string().as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}

/// A report read back from disk, every cell as text.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedReport {
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl ParsedReport {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Parses cell `name` of row `row` as `f64`.
    pub fn f64(&self, row: usize, name: &str) -> Option<f64> {
        self.rows.get(row)?.get(self.column(name)?)?.parse().ok()
    }

    pub fn text(&self, row: usize, name: &str) -> Option<&str> {
        self.rows.get(row)?.get(self.column(name)?).map(String::as_str)
    }
}

pub fn read_csv(path: &Path) -> Result<ParsedReport> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    let comments = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| l.trim_start_matches('#').trim_start().to_owned())
        .collect();
    let csv_err = |source| Error::Csv {
        path: path.to_owned(),
        source,
    };
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(str::to_owned).collect()))
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)?;
    Ok(ParsedReport { comments, header, rows })
}

/// Formats like C's `printf("%.17g", v)`.
pub fn format_g17(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    const PRECISION: i32 = 17;
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PRECISION).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let fixed = format!("{:.*}", (PRECISION - 1 - exp) as usize, v);
        strip_zeros(&fixed).to_owned()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn g17_matches_c_printf() {
        // Expected strings from Python's '%.17g' % v.
        let cases = [
            (1.0, "1"),
            (0.1, "0.10000000000000001"),
            (0.18, "0.17999999999999999"),
            (100.0, "100"),
            (1.05, "1.05"),
            (953.0064878634442, "953.00648786344425"),
            (1e-5, "1.0000000000000001e-05"),
            (0.0001, "0.0001"),
            (1e17, "1e+17"),
            (12345678901234567.0, "12345678901234568"),
            (-2.5, "-2.5"),
            (5e-324, "4.9406564584124654e-324"),
            (f64::MAX, "1.7976931348623157e+308"),
        ];
        for (v, want) in cases {
            assert_eq!(format_g17(v), want, "{v:e}");
        }
        assert_eq!(format_g17(f64::NAN), "NaN");
        assert_eq!(format_g17(0.0), "0");
    }

    proptest! {
        #[test]
        fn g17_round_trips(bits in any::<u64>()) {
            let v = f64::from_bits(bits);
            prop_assume!(v.is_finite());
            let back: f64 = format_g17(v).parse().unwrap();
            prop_assert_eq!(back.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = Report::new(COVERAGE, 7);
        assert_eq!(r.to_csv_string(), "# seed=7\nn,d,epsilon,runs,mean_fraction\n");
    }

    #[test]
    fn single_row_is_two_csv_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.csv");
        let mut r = Report::new(CONCENTRATION, 0);
        r.push(vec![
            100usize.into(),
            1000usize.into(),
            5usize.into(),
            1.1.into(),
            1.2.into(),
            1.3.into(),
            1.4.into(),
            1.5.into(),
            1.3.into(),
        ]);
        write_csv(&r, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(body.len(), 2);
        assert_eq!(body[1], "100,1000,5,1.1000000000000001,1.2,1.3,1.3999999999999999,1.5,1.3");
        assert!(!text.contains('\r'));
        let parsed = read_csv(&path).unwrap();
        assert_eq!(parsed.comments, vec!["seed=0"]);
        assert_eq!(parsed.f64(0, "q3"), Some(1.4));
    }

    #[test]
    fn unwritable_path_names_the_path() {
        let err = write_csv(&Report::new(COVERAGE, 0), Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
    }

    proptest! {
        #[test]
        fn written_values_read_back_exactly(values in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 5)) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("r.csv");
            let mut r = Report::new(COVERAGE, 1);
            r.push(values.iter().map(|&v| Field::Float(v)).collect());
            write_csv(&r, &path).unwrap();
            let parsed = read_csv(&path).unwrap();
            for (i, name) in COVERAGE.iter().enumerate() {
                prop_assert_eq!(parsed.f64(0, name).unwrap().to_bits(), values[i].to_bits());
            }
        }
    }
}
