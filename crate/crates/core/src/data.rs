//! Dataset loading, one-vs-rest restructuring, and seeded synthetic
//! generators.
//!
//! Three input formats are supported: the 26-class letter format
//! (`<LETTER>,<16 integers 0-15>` per line), sparse libsvm lines, and
//! labeled CSV. All loaders take a reader, so files and stdin both work.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

use crate::features::{FeatureError, FeatureMatrix};
use crate::rng::SplitMix64;

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("input contains no samples")]
    Empty,
    #[error("unknown class label {0:?}")]
    UnknownLabel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Labeled dense dataset: one class tag per feature row.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub features: FeatureMatrix,
    pub labels: Vec<String>,
    pub name: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    /// Distinct labels in sorted order.
    pub fn classes(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.labels.iter().collect();
        set.into_iter().cloned().collect()
    }
}

fn malformed(line: usize, message: impl Into<String>) -> DataError {
    DataError::MalformedLine {
        line,
        message: message.into(),
    }
}

/// Reads the letter format: `<LETTER>,<f1>,...,<f16>` with integer
/// features in 0..=15, scaled to [0,1] on load so that rbf widths around
/// 1 see real kernel mass (on the raw scale every within-class squared
/// distance is tens of units and the Gram collapses toward identity).
/// Out-of-range values load as-is with a warning. File order is
/// preserved, so a leading training partition survives.
pub fn load_letter<R: Read>(source: R) -> Result<Dataset, DataError> {
    let reader = BufReader::new(source);
    let mut labels = Vec::new();
    let mut flat = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 17 {
            return Err(malformed(
                line_no,
                format!("expected 17 comma-separated fields, got {}", fields.len()),
            ));
        }
        let label = fields[0].trim();
        if label.is_empty() {
            return Err(malformed(line_no, "empty class label"));
        }
        for tok in &fields[1..] {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| malformed(line_no, format!("bad feature value {tok:?}")))?;
            if !(0.0..=15.0).contains(&v) {
                log::warn!("line {line_no}: feature value {v} outside 0..=15");
            }
            flat.push(v / 15.0);
        }
        labels.push(label.to_string());
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(Dataset {
        features: FeatureMatrix::from_flat(flat, 16)?,
        labels,
        name: "letter".to_string(),
    })
}

/// Reads sparse libsvm lines `<label> <idx>:<val> ...` with 1-based,
/// strictly ascending indices. Dimension is the largest index seen;
/// missing entries are zero.
pub fn load_libsvm<R: Read>(source: R) -> Result<Dataset, DataError> {
    let reader = BufReader::new(source);
    let mut labels = Vec::new();
    let mut sparse_rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut dim = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_ascii_whitespace();
        let label = tokens.next().unwrap().to_string();
        let mut row = Vec::new();
        let mut last_idx = 0usize;
        for tok in tokens {
            let (idx_str, val_str) = tok
                .split_once(':')
                .ok_or_else(|| malformed(line_no, format!("expected idx:val, got {tok:?}")))?;
            let idx: usize = idx_str
                .parse()
                .map_err(|_| malformed(line_no, format!("bad index {idx_str:?}")))?;
            if idx == 0 {
                return Err(malformed(line_no, "indices are 1-based"));
            }
            if idx <= last_idx {
                return Err(malformed(
                    line_no,
                    format!("index {idx} not strictly ascending after {last_idx}"),
                ));
            }
            let val: f64 = val_str
                .parse()
                .map_err(|_| malformed(line_no, format!("bad value {val_str:?}")))?;
            row.push((idx - 1, val));
            last_idx = idx;
            dim = dim.max(idx);
        }
        labels.push(label);
        sparse_rows.push(row);
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    if dim == 0 {
        return Err(DataError::InvalidConfig(
            "libsvm input has no feature entries".into(),
        ));
    }
    let mut flat = vec![0.0; labels.len() * dim];
    for (r, row) in sparse_rows.iter().enumerate() {
        for &(j, v) in row {
            flat[r * dim + j] = v;
        }
    }
    Ok(Dataset {
        features: FeatureMatrix::from_flat(flat, dim)?,
        labels,
        name: "libsvm".to_string(),
    })
}

/// Reads headered CSV; `label_column` names the class column, all other
/// columns parse as features in file order.
pub fn load_csv<R: Read>(source: R, label_column: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::Reader::from_reader(source);
    let headers = reader.headers()?.clone();
    let label_idx = headers
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| {
            DataError::InvalidConfig(format!("no column named {label_column:?} in header"))
        })?;
    let mut labels = Vec::new();
    let mut flat = Vec::new();
    let dim = headers.len() - 1;
    if dim == 0 {
        return Err(DataError::InvalidConfig(
            "csv has a label column but no feature columns".into(),
        ));
    }
    for (i, record) in reader.records().enumerate() {
        let line_no = i + 2;
        let record = record?;
        if record.len() != headers.len() {
            return Err(malformed(
                line_no,
                format!("expected {} fields, got {}", headers.len(), record.len()),
            ));
        }
        for (j, field) in record.iter().enumerate() {
            if j == label_idx {
                labels.push(field.to_string());
            } else {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| malformed(line_no, format!("bad feature value {field:?}")))?;
                flat.push(v);
            }
        }
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    Ok(Dataset {
        features: FeatureMatrix::from_flat(flat, dim)?,
        labels,
        name: "csv".to_string(),
    })
}

/// Writes `label,x1,...,xd` CSV that `load_csv(.., "label")` reads back.
pub fn write_csv<W: Write>(data: &Dataset, sink: W) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_writer(sink);
    let mut header = vec!["label".to_string()];
    header.extend((1..=data.dim()).map(|j| format!("x{j}")));
    writer.write_record(&header)?;
    for (label, row) in data.labels.iter().zip(data.features.iter_rows()) {
        let mut record = vec![label.clone()];
        record.extend(row.iter().map(|v| v.to_string()));
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// How to split a dataset into training and test partitions.
#[derive(Debug, Clone, Copy)]
pub enum SplitSpec {
    /// First `n` rows train, the rest test (fixed file order).
    Boundary(usize),
    /// Leading fraction of rows trains.
    Fraction(f64),
}

/// One-vs-rest split: target-class rows from the training partition train
/// the classifier; the test partition supplies held-out positives and the
/// other classes as negatives.
#[derive(Debug, Clone)]
pub struct OneVsRest {
    pub train_positives: FeatureMatrix,
    pub test_positives: FeatureMatrix,
    pub test_negatives: FeatureMatrix,
}

pub fn one_vs_rest(
    data: &Dataset,
    target: &str,
    split: SplitSpec,
) -> Result<OneVsRest, DataError> {
    if !data.labels.iter().any(|l| l == target) {
        return Err(DataError::UnknownLabel(target.to_string()));
    }
    let m = data.len();
    let boundary = match split {
        SplitSpec::Boundary(b) => b,
        SplitSpec::Fraction(f) => {
            if !(0.0..=1.0).contains(&f) {
                return Err(DataError::InvalidConfig(format!(
                    "train fraction {f} outside [0, 1]"
                )));
            }
            (f * m as f64).round() as usize
        }
    };
    if boundary == 0 || boundary >= m {
        return Err(DataError::InvalidConfig(format!(
            "split boundary {boundary} leaves an empty partition of {m} rows"
        )));
    }
    let mut train_pos = Vec::new();
    let mut test_pos = Vec::new();
    let mut test_neg = Vec::new();
    for i in 0..m {
        let is_target = data.labels[i] == target;
        if i < boundary {
            if is_target {
                train_pos.push(i);
            }
        } else if is_target {
            test_pos.push(i);
        } else {
            test_neg.push(i);
        }
    }
    if train_pos.is_empty() {
        return Err(DataError::InvalidConfig(format!(
            "class {target:?} absent from the training partition"
        )));
    }
    Ok(OneVsRest {
        train_positives: data.features.select(&train_pos),
        test_positives: data.features.select(&test_pos),
        test_negatives: data.features.select(&test_neg),
    })
}

/// Seeded 2-D Normal cloud.
#[derive(Debug, Clone)]
pub struct ToyConfig {
    pub count: usize,
    pub mean: [f64; 2],
    /// Row-major 2x2 covariance; must be symmetric positive definite.
    pub covariance: [[f64; 2]; 2],
    pub seed: u64,
}

impl ToyConfig {
    /// Standard Normal with 1500 points.
    pub fn standard(seed: u64) -> Self {
        Self {
            count: 1500,
            mean: [0.0, 0.0],
            covariance: [[1.0, 0.0], [0.0, 1.0]],
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.count == 0 {
            return Err(DataError::InvalidConfig("count must be positive".into()));
        }
        let c = &self.covariance;
        if (c[0][1] - c[1][0]).abs() > 1e-12 {
            return Err(DataError::InvalidConfig(
                "covariance must be symmetric".into(),
            ));
        }
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        if c[0][0] <= 0.0 || det <= 0.0 {
            return Err(DataError::InvalidConfig(
                "covariance must be positive definite".into(),
            ));
        }
        Ok(())
    }
}

/// Draws `count` points from the configured bivariate Normal via the
/// Box-Muller transform and a 2x2 Cholesky factor, so the stream is fully
/// determined by the seed.
pub fn sample_bivariate_normal(config: &ToyConfig) -> Result<Dataset, DataError> {
    config.validate()?;
    let c = &config.covariance;
    let l11 = c[0][0].sqrt();
    let l21 = c[0][1] / l11;
    let l22 = (c[1][1] - l21 * l21).sqrt();
    let mut rng = SplitMix64::new(config.seed);
    let mut flat = Vec::with_capacity(config.count * 2);
    for _ in 0..config.count {
        let (z1, z2) = rng.next_gaussian_pair();
        flat.push(config.mean[0] + l11 * z1);
        flat.push(config.mean[1] + l21 * z1 + l22 * z2);
    }
    Ok(Dataset {
        features: FeatureMatrix::from_flat(flat, 2)?,
        labels: vec!["toy".to_string(); config.count],
        name: "toy".to_string(),
    })
}

/// Seeded stand-in with the letter file's shape: 20,000 rows, 16 features
/// that start as integers in 0..=15 and carry the loader's [0,1] scaling,
/// 26 classes A-Z interleaved so the leading 16,000 rows form a training
/// partition covering every class.
///
/// Half the classes are drawn around their own cluster center; the other
/// half reuse a neighbor's center with a tighter spread, so a test
/// negative can sit inside a positive class's support and separating it
/// requires rejecting both tails of the score.
pub fn synthetic_letters(seed: u64) -> Dataset {
    const ROWS: usize = 20_000;
    const DIM: usize = 16;
    let mut rng = SplitMix64::new(seed);

    let mut means = [[0.0f64; DIM]; 26];
    let mut spreads = [0.0f64; 26];
    for c in 0..26 {
        if c % 2 == 1 {
            // Odd classes sit concentrically inside the preceding class.
            means[c] = means[c - 1];
            spreads[c] = 0.5;
        } else {
            for m in means[c].iter_mut() {
                *m = 4.0 + 7.0 * rng.next_f64();
            }
            spreads[c] = 1.6;
        }
    }

    let mut order: Vec<usize> = (0..ROWS).map(|i| i % 26).collect();
    rng.shuffle(&mut order);

    let mut flat = Vec::with_capacity(ROWS * DIM);
    let mut labels = Vec::with_capacity(ROWS);
    for &c in &order {
        labels.push(char::from(b'A' + c as u8).to_string());
        for &mu in &means[c] {
            let g = rng.next_gaussian_pair().0;
            let v = (mu + spreads[c] * g).round().clamp(0.0, 15.0);
            flat.push(v / 15.0);
        }
    }
    Dataset {
        features: FeatureMatrix::from_flat(flat, DIM).unwrap(),
        labels,
        name: "synthetic-letters".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn letter_line_parses() {
        let input = "T,2,8,3,5,1,8,13,0,6,6,10,8,0,8,0,8\nA,1,1,3,2,1,8,2,2,2,8,2,8,1,6,2,7\n";
        let data = load_letter(input.as_bytes()).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.dim(), 16);
        assert_eq!(data.labels[0], "T");
        assert_eq!(data.features.row(0)[0], 2.0 / 15.0);
        assert_eq!(data.features.row(0)[15], 8.0 / 15.0);
    }

    #[test]
    fn letter_rejects_short_line() {
        let err = load_letter("T,1,2,3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn letter_empty_input_errors() {
        assert!(matches!(
            load_letter("".as_bytes()).unwrap_err(),
            DataError::Empty
        ));
    }

    #[test]
    fn libsvm_densifies_missing_entries() {
        let data = load_libsvm("+1 1:0.5 3:2\n-1 2:1\n".as_bytes()).unwrap();
        assert_eq!(data.dim(), 3);
        assert_eq!(data.features.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(data.features.row(1), &[0.0, 1.0, 0.0]);
        assert_eq!(data.labels, vec!["+1", "-1"]);
    }

    #[test]
    fn libsvm_rejects_non_ascending_indices() {
        let err = load_libsvm("+1 2:1 2:3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, DataError::MalformedLine { line: 1, .. }));
    }

    #[test]
    fn csv_round_trips_bytewise() {
        let data = Dataset {
            features: FeatureMatrix::from_rows(&[vec![1.5, 2.0], vec![0.25, 3.0]]).unwrap(),
            labels: vec!["a".into(), "b".into()],
            name: "csv".into(),
        };
        let mut first = Vec::new();
        write_csv(&data, &mut first).unwrap();
        let reloaded = load_csv(first.as_slice(), "label").unwrap();
        assert_eq!(reloaded.labels, data.labels);
        assert_eq!(reloaded.features, data.features);
        let mut second = Vec::new();
        write_csv(&reloaded, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn csv_unknown_label_column_errors() {
        let err = load_csv("a,b\n1,2\n".as_bytes(), "label").unwrap_err();
        assert!(matches!(err, DataError::InvalidConfig(_)));
    }

    #[test]
    fn one_vs_rest_partitions_are_disjoint_and_exhaustive() {
        let data = Dataset {
            features: FeatureMatrix::from_rows(&vec![vec![0.0]; 10]).unwrap(),
            labels: ["A", "B", "A", "C", "A", "B", "A", "C", "B", "A"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            name: "t".into(),
        };
        let split = one_vs_rest(&data, "A", SplitSpec::Boundary(6)).unwrap();
        assert_eq!(split.train_positives.rows(), 3);
        assert_eq!(split.test_positives.rows() + split.test_negatives.rows(), 4);
        assert_eq!(split.test_positives.rows(), 2);
    }

    #[test]
    fn one_vs_rest_unknown_target_errors() {
        let data = Dataset {
            features: FeatureMatrix::from_rows(&[vec![0.0]]).unwrap(),
            labels: vec!["A".into()],
            name: "t".into(),
        };
        assert!(matches!(
            one_vs_rest(&data, "Z", SplitSpec::Boundary(1)).unwrap_err(),
            DataError::UnknownLabel(_)
        ));
    }

    #[test]
    fn toy_generator_is_seed_deterministic() {
        let a = sample_bivariate_normal(&ToyConfig::standard(5)).unwrap();
        let b = sample_bivariate_normal(&ToyConfig::standard(5)).unwrap();
        assert_eq!(a.features, b.features);
        let c = sample_bivariate_normal(&ToyConfig::standard(6)).unwrap();
        assert_ne!(a.features, c.features);
    }

    #[test]
    fn toy_sample_mean_is_near_zero() {
        let data = sample_bivariate_normal(&ToyConfig::standard(1)).unwrap();
        for axis in 0..2 {
            let mean: f64 = data.features.iter_rows().map(|r| r[axis]).sum::<f64>()
                / data.len() as f64;
            assert!(mean.abs() < 0.1, "axis {axis} mean {mean}");
        }
    }

    #[test]
    fn toy_sample_moments_match_config() {
        let config = ToyConfig {
            count: 100_000,
            mean: [1.0, -2.0],
            covariance: [[2.0, 0.6], [0.6, 1.0]],
            seed: 42,
        };
        let data = sample_bivariate_normal(&config).unwrap();
        let n = data.len() as f64;
        let mut mean = [0.0; 2];
        for r in data.features.iter_rows() {
            mean[0] += r[0];
            mean[1] += r[1];
        }
        mean[0] /= n;
        mean[1] /= n;
        let mut cov = [[0.0; 2]; 2];
        for r in data.features.iter_rows() {
            let d = [r[0] - mean[0], r[1] - mean[1]];
            for i in 0..2 {
                for (j, c) in cov[i].iter_mut().enumerate() {
                    *c += d[i] * d[j];
                }
            }
        }
        for i in 0..2 {
            assert!((mean[i] - config.mean[i]).abs() < 0.05);
            for (j, c) in cov[i].iter_mut().enumerate() {
                *c /= n;
                assert!((*c - config.covariance[i][j]).abs() < 0.05);
            }
        }
    }

    #[test]
    fn degenerate_covariance_is_rejected() {
        let config = ToyConfig {
            count: 10,
            mean: [0.0, 0.0],
            covariance: [[0.0, 0.0], [0.0, 0.0]],
            seed: 0,
        };
        assert!(matches!(
            sample_bivariate_normal(&config).unwrap_err(),
            DataError::InvalidConfig(_)
        ));
    }

    #[test]
    fn synthetic_letters_has_letter_shape() {
        let data = synthetic_letters(3);
        assert_eq!(data.len(), 20_000);
        assert_eq!(data.dim(), 16);
        assert_eq!(data.classes().len(), 26);
        // Scaled 16ths of the raw 0..=15 integer grid, like the loader.
        for v in data.features.as_slice() {
            assert!((0.0..=1.0).contains(v));
            assert_eq!((v * 15.0).round(), v * 15.0);
        }
        // Every class appears in both file-order partitions.
        let head: BTreeSet<&String> = data.labels[..16_000].iter().collect();
        let tail: BTreeSet<&String> = data.labels[16_000..].iter().collect();
        assert_eq!(head.len(), 26);
        assert_eq!(tail.len(), 26);
    }
}
