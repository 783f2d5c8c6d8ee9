//! Dense design matrices: text loaders (CSV and LIBSVM) and seeded synthetic
//! generators.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::Vector;

/// Dense `m x n` matrix `A` with response (or label) vector `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub a: DMatrix<f64>,
    pub b: Vector,
    /// Whether `b` came from the data (CSV `b` column or LIBSVM labels).
    pub has_response: bool,
}

impl DesignMatrix {
    pub fn new(a: DMatrix<f64>, b: Vector) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::InvalidData("design matrix must be non-empty".into()));
        }
        if b.len() != a.nrows() {
            return Err(Error::InvalidData(format!(
                "response length {} does not match {} rows",
                b.len(),
                a.nrows()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("entries must be finite".into()));
        }
        Ok(DesignMatrix { a, b, has_response: true })
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    /// Checks that every entry of `b` is a class label in `{-1, +1}`.
    pub fn validate_labels(&self) -> Result<()> {
        if !self.has_response {
            return Err(Error::InvalidData("no labels present".into()));
        }
        match self.b.iter().position(|&y| y != 1.0 && y != -1.0) {
            Some(i) => Err(Error::InvalidData(format!(
                "label {} in row {} is not -1 or +1",
                self.b[i],
                i + 1
            ))),
            None => Ok(()),
        }
    }

    /// Rows `[start, start + len)` as a new matrix.
    pub fn slice_rows(&self, start: usize, len: usize) -> DesignMatrix {
        DesignMatrix {
            a: self.a.rows(start, len).into_owned(),
            b: self.b.rows(start, len).into_owned(),
            has_response: self.has_response,
        }
    }

    /// Writes the CSV layout understood by [`parse_csv`], with a `b` column.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{},{},b\n", self.rows(), self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let _ = write!(out, "{:e},", self.a[(i, j)]);
            }
            let _ = writeln!(out, "{:e}", self.b[i]);
        }
        out
    }

    /// LIBSVM lines `label idx:val ...` with one-based indices, zeros omitted.
    /// Labels of exactly `+1` or `-1` are written in the usual short form.
    pub fn to_libsvm(&self) -> String {
        let mut out = String::new();
        for i in 0..self.rows() {
            let label = self.b[i];
            let _ = if label == 1.0 {
                write!(out, "+1")
            } else if label == -1.0 {
                write!(out, "-1")
            } else {
                write!(out, "{label:e}")
            };
            for j in 0..self.cols() {
                let v = self.a[(i, j)];
                if v != 0.0 {
                    let _ = write!(out, " {}:{:e}", j + 1, v);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Supported text layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Libsvm,
}

impl std::str::FromStr for DataFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(DataFormat::Csv),
            "libsvm" => Ok(DataFormat::Libsvm),
            other => Err(Error::InvalidArgument(format!("unknown data format {other:?}"))),
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, format: DataFormat) -> Result<DesignMatrix> {
    let text = std::fs::read_to_string(path)?;
    match format {
        DataFormat::Csv => parse_csv(&text),
        DataFormat::Libsvm => parse_libsvm(&text, None),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_err(line, format!("not a number: {:?}", field.trim())))?;
    if !v.is_finite() {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(v)
}

/// Parses `m,n[,b]` followed by `m` comma-separated rows. When the header
/// carries a trailing `b`, each row ends with its response value.
pub fn parse_csv(text: &str) -> Result<DesignMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    let with_b = match fields.as_slice() {
        [_, _] => false,
        [_, _, "b"] => true,
        _ => return Err(parse_err(hline, "header must be \"m,n\" or \"m,n,b\"")),
    };
    let dim = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&v| v > 0)
            .ok_or_else(|| parse_err(hline, format!("bad dimension {s:?}")))
    };
    let (m, n) = (dim(fields[0])?, dim(fields[1])?);
    let width = n + usize::from(with_b);
    let mut a = DMatrix::zeros(m, n);
    let mut b = Vector::zeros(m);
    let mut row = 0;
    for (lineno, line) in lines {
        if row == m {
            return Err(parse_err(lineno, format!("more than {m} data rows")));
        }
        let values: Vec<&str> = line.split(',').collect();
        if values.len() != width {
            return Err(parse_err(lineno, format!("expected {width} fields, found {}", values.len())));
        }
        for (j, field) in values.iter().enumerate() {
            let v = parse_number(field, lineno)?;
            if j < n {
                a[(row, j)] = v;
            } else {
                b[row] = v;
            }
        }
        row += 1;
    }
    if row != m {
        return Err(parse_err(text.lines().count(), format!("expected {m} data rows, found {row}")));
    }
    Ok(DesignMatrix { a, b, has_response: with_b })
}

/// Parses LIBSVM sparse lines `label idx:val ...` with one-based indices.
/// The column count is `n_features` when given, otherwise the largest index.
pub fn parse_libsvm(text: &str, n_features: Option<usize>) -> Result<DesignMatrix> {
    let mut rows: Vec<(f64, BTreeMap<usize, f64>)> = Vec::new();
    let mut max_index = 0;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label = parse_number(tokens.next().unwrap_or(""), lineno)?;
        let mut entries = BTreeMap::new();
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_err(lineno, format!("expected idx:val, found {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_err(lineno, "indices are one-based"));
            }
            if entries.insert(idx, parse_number(val, lineno)?).is_some() {
                return Err(parse_err(lineno, format!("duplicate index {idx}")));
            }
            max_index = max_index.max(idx);
        }
        rows.push((label, entries));
    }
    if rows.is_empty() {
        return Err(parse_err(1, "no data lines"));
    }
    let n = match n_features {
        Some(n) if n < max_index => {
            return Err(Error::InvalidData(format!("index {max_index} exceeds {n} features")))
        }
        Some(n) => n,
        None => max_index.max(1),
    };
    let mut a = DMatrix::zeros(rows.len(), n);
    let mut b = Vector::zeros(rows.len());
    for (r, (label, entries)) in rows.into_iter().enumerate() {
        b[r] = label;
        for (idx, val) in entries {
            a[(r, idx - 1)] = val;
        }
    }
    Ok(DesignMatrix { a, b, has_response: true })
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize, scale: f64) -> DMatrix<f64> {
    // column-major fill order is part of the seed contract
    DMatrix::from_fn(m, n, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Over-parameterized least-squares data: `A` has i.i.d. `N(0, 1/m)` entries
/// and `b = A x_p` for a planted `x_p ~ N(0, I/n)`, so `Ax = b` is consistent.
pub fn synthetic_min_norm(m: usize, n: usize, seed: u64) -> Result<DesignMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, m, n, 1.0 / (m as f64).sqrt());
    let planted = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt());
    let b = &a * planted;
    DesignMatrix::new(a, b)
}

/// Classification data: standard normal features, labels from a planted
/// linear separator with 5% label flips. Returns `(train, validation)`,
/// splitting the `m` rows in half.
pub fn synthetic_logistic(m: usize, n: usize, seed: u64) -> Result<(DesignMatrix, DesignMatrix)> {
    if m < 2 || n == 0 {
        return Err(Error::InvalidArgument("need at least two rows and one feature".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = gaussian_matrix(&mut rng, m, n, 1.0);
    let planted = Vector::from_fn(n, |_, _| 3.0 * rng.sample::<f64, _>(StandardNormal) / (n as f64).sqrt());
    let margins = &a * planted;
    let normal = StandardNormal;
    let b = Vector::from_fn(m, |i, _| {
        let noisy = margins[i] + 0.1 * Distribution::<f64>::sample(&normal, &mut rng);
        let label = if noisy >= 0.0 { 1.0 } else { -1.0 };
        if rng.random::<f64>() < 0.05 {
            -label
        } else {
            label
        }
    });
    let all = DesignMatrix::new(a, b)?;
    let half = m / 2;
    Ok((all.slice_rows(0, half), all.slice_rows(half, m - half)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn libsvm_roundtrip() {
        let (tr, _) = synthetic_logistic(10, 4, 2).unwrap();
        let back = parse_libsvm(&tr.to_libsvm(), Some(4)).unwrap();
        assert_eq!(back.a, tr.a);
        assert_eq!(back.b, tr.b);
        let mn = synthetic_min_norm(5, 7, 2).unwrap();
        let back = parse_libsvm(&mn.to_libsvm(), Some(7)).unwrap();
        assert_eq!(back.b, mn.b);
    }

    #[test]
    fn libsvm_single_line() {
        let d = parse_libsvm("+1 3:0.5\n", Some(4)).unwrap();
        assert_eq!(d.rows(), 1);
        assert_eq!(d.a.row(0).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 0.5, 0.0]);
        assert_eq!(d.b[0], 1.0);
    }

    #[test]
    fn libsvm_duplicate_index_is_parse_error() {
        let err = parse_libsvm("-1 1:1\n+1 2:1 2:3\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn libsvm_rejects_zero_index_and_garbage() {
        assert!(matches!(parse_libsvm("1 0:1", None), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_libsvm("1 1:1\nx 1:2", None), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_libsvm("1 5:1", Some(3)), Err(Error::InvalidData(_))));
    }

    #[test]
    fn csv_without_response() {
        let d = parse_csv("2,2\n1,0\n0,1").unwrap();
        assert_eq!(d.a, DMatrix::identity(2, 2));
        assert!(!d.has_response);
    }

    #[test]
    fn csv_with_response_and_errors() {
        let d = parse_csv("2,1,b\n3,1\n4,-1\n").unwrap();
        assert_eq!(d.b, Vector::from_vec(vec![1.0, -1.0]));
        d.validate_labels().unwrap();
        assert!(matches!(parse_csv("2,2\n1,0\n0"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_csv("2,2\n1,0\n0,zz"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_csv("2,2\n1,0\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_csv("a,2\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn labels_validated() {
        let d = parse_csv("2,1,b\n3,1\n4,2\n").unwrap();
        assert!(matches!(d.validate_labels(), Err(Error::InvalidData(_))));
    }

    #[test]
    fn csv_round_trip() {
        let d = synthetic_min_norm(3, 5, 1).unwrap();
        assert_eq!(parse_csv(&d.to_csv()).unwrap(), d);
    }

    #[test]
    fn synthetic_is_seeded() {
        assert_eq!(synthetic_min_norm(4, 6, 9).unwrap(), synthetic_min_norm(4, 6, 9).unwrap());
        assert_ne!(synthetic_min_norm(4, 6, 9).unwrap(), synthetic_min_norm(4, 6, 10).unwrap());
        let (tr, va) = synthetic_logistic(20, 3, 2).unwrap();
        assert_eq!((tr.rows(), va.rows()), (10, 10));
        tr.validate_labels().unwrap();
        va.validate_labels().unwrap();
    }
}
