//! LIBSVM sparse text datasets, min-max scaling and order-preserving splits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Labelled sparse rows. Feature indices are 1-based and strictly increasing
/// within each row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    rows: Vec<Vec<(usize, f64)>>,
    labels: Vec<f64>,
    num_features: usize,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<(usize, f64)>>, labels: Vec<f64>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch { expected: rows.len(), found: labels.len() });
        }
        let mut num_features = 0;
        for (r, row) in rows.iter().enumerate() {
            let mut prev = 0;
            for &(j, v) in row {
                if j <= prev {
                    return Err(Error::invalid(format!("row {r}: feature indices must be strictly increasing from 1")));
                }
                if !v.is_finite() {
                    return Err(Error::invalid(format!("row {r}: non-finite value at feature {j}")));
                }
                prev = j;
            }
            num_features = num_features.max(prev);
        }
        Ok(Self { rows, labels, num_features })
    }

    /// Dense rows to sparse form; zeros are dropped.
    pub fn from_dense(rows: &[Vec<f64>], labels: Vec<f64>) -> Result<Self> {
        let sparse = rows
            .iter()
            .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, &v)| (j + 1, v)).collect())
            .collect();
        Self::new(sparse, labels)
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Row count `N`.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Largest feature index present.
    pub fn num_features(&self) -> usize {
        self.num_features
    }

    /// Dense feature matrix with `width` columns (at least `num_features`).
    pub fn to_dense(&self, width: usize) -> Vec<Vec<f64>> {
        let width = width.max(self.num_features);
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; width];
                for &(j, v) in row {
                    dense[j - 1] = v;
                }
                dense
            })
            .collect()
    }

    /// Rescales every feature column to `[0, 1]`, and the labels too when
    /// `include_labels` is set.
    pub fn minmax_normalized(&self, include_labels: bool) -> Self {
        let mut dense = self.to_dense(self.num_features);
        if include_labels {
            for (row, &y) in dense.iter_mut().zip(&self.labels) {
                row.push(y);
            }
        }
        let mut scaled = minmax_normalize(&dense);
        let labels = if include_labels {
            scaled.iter_mut().map(|row| row.pop().expect("label column")).collect()
        } else {
            self.labels.clone()
        };
        Self::from_dense(&scaled, labels).expect("scaled values are finite")
    }

    /// Keeps the rows for which `keep(label)` is true.
    pub fn filter_labels(&self, keep: impl Fn(f64) -> bool) -> Self {
        let (rows, labels) = self
            .rows
            .iter()
            .zip(&self.labels)
            .filter(|(_, &y)| keep(y))
            .map(|(r, &y)| (r.clone(), y))
            .unzip();
        Self::new(rows, labels).expect("subset of a valid dataset")
    }
}

/// Parses LIBSVM text: one `label idx:val idx:val …` record per non-blank line.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line_no = lineno + 1;
        let err = |message: String| Error::Parse { line: line_no, message };
        let line = line.map_err(|e| err(e.to_string()))?;
        if line.contains('#') {
            return Err(err("comments are not part of the format".into()));
        }
        let mut tokens = line.split_whitespace();
        let Some(label_tok) = tokens.next() else { continue };
        let label: f64 = label_tok.parse().map_err(|_| err(format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(err(format!("non-finite label {label_tok:?}")));
        }
        let mut row = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| err(format!("expected idx:val, got {tok:?}")))?;
            let idx: usize = idx.parse().map_err(|_| err(format!("bad feature index in {tok:?}")))?;
            let val: f64 = val.parse().map_err(|_| err(format!("bad feature value in {tok:?}")))?;
            if idx == 0 {
                return Err(err("feature indices start at 1".into()));
            }
            if idx <= prev {
                return Err(err(format!("feature index {idx} not increasing")));
            }
            if !val.is_finite() {
                return Err(err(format!("non-finite value in {tok:?}")));
            }
            prev = idx;
            row.push((idx, val));
        }
        rows.push(row);
        labels.push(label);
    }
    Dataset::new(rows, labels)
}

pub fn write_libsvm<W: Write>(data: &Dataset, mut out: W) -> std::io::Result<()> {
    for (row, label) in data.rows.iter().zip(&data.labels) {
        write!(out, "{label}")?;
        for (j, v) in row {
            write!(out, " {j}:{v}")?;
        }
        writeln!(out)?;
    }
    out.flush()
}

/// Column-wise `(d − min) / (max − min)` over all rows; constant columns become 0.
pub fn minmax_normalize(matrix: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let width = matrix.iter().map(Vec::len).max().unwrap_or(0);
    let mut lo = vec![f64::INFINITY; width];
    let mut hi = vec![f64::NEG_INFINITY; width];
    for row in matrix {
        for (j, &v) in row.iter().enumerate() {
            lo[j] = lo[j].min(v);
            hi[j] = hi[j].max(v);
        }
    }
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    let span = hi[j] - lo[j];
                    if span > 0.0 {
                        ((v - lo[j]) / span).clamp(0.0, 1.0)
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// First `⌈fraction · N⌉` rows for training, the rest for testing, order kept.
pub fn chronological_split(data: &Dataset, train_fraction: f64) -> Result<(Dataset, Dataset)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction must be in (0, 1), got {train_fraction}")));
    }
    let n = data.len();
    // guard against 0.7 * 10 landing a hair above 7
    let cut = ((train_fraction * n as f64) - 1e-9).ceil().max(0.0) as usize;
    if cut == 0 || cut >= n {
        return Err(Error::invalid(format!("split of {n} rows at {train_fraction} leaves an empty side")));
    }
    let part = |range: std::ops::Range<usize>| {
        Dataset::new(data.rows[range.clone()].to_vec(), data.labels[range].to_vec()).expect("slice of valid dataset")
    };
    Ok((part(0..cut), part(cut..n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<Dataset> {
        parse_libsvm(s.as_bytes())
    }

    #[test]
    fn parses_single_row() {
        let d = parse("+1 3:0.5 7:1.0\n").unwrap();
        assert_eq!(d.labels(), &[1.0]);
        assert_eq!(d.rows()[0], vec![(3, 0.5), (7, 1.0)]);
        assert_eq!(d.num_features(), 7);
    }

    #[test]
    fn empty_and_blank_input() {
        assert_eq!(parse("").unwrap().len(), 0);
        let d = parse("\n-1 1:2\n\n   \n+1\n").unwrap();
        assert_eq!(d.labels(), &[-1.0, 1.0]);
        assert!(d.rows()[1].is_empty());
    }

    #[test]
    fn rejects_malformed_lines() {
        let cases = [
            ("+1 3:0.5 2:1\n", 1),
            ("+1 1:1\nfoo 1:1\n", 2),
            ("+1 1:x\n", 1),
            ("+1 0:1\n", 1),
            ("+1 1-2\n", 1),
            ("+1 1:1 # comment\n", 1),
            ("+1 2:1 2:1\n", 1),
            ("+1 a:1\n", 1),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("{text:?} parsed as {other:?}"),
            }
        }
    }

    #[test]
    fn minmax_examples() {
        let m = minmax_normalize(&[vec![2.0, 5.0], vec![4.0, 5.0], vec![6.0, 5.0]]);
        assert_eq!(m, vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![1.0, 0.0]]);
        let again = minmax_normalize(&[vec![0.0], vec![0.25], vec![1.0]]);
        assert_eq!(again, vec![vec![0.0], vec![0.25], vec![1.0]]);
    }

    #[test]
    fn split_sizes() {
        let rows = |n: usize| Dataset::new(vec![vec![]; n], (0..n).map(|i| i as f64).collect()).unwrap();
        let (tr, te) = chronological_split(&rows(10), 0.7).unwrap();
        assert_eq!((tr.len(), te.len()), (7, 3));
        assert_eq!(te.labels(), &[7.0, 8.0, 9.0]);
        let (tr, te) = chronological_split(&rows(8991), 0.7).unwrap();
        assert_eq!((tr.len(), te.len()), (6294, 2697));
        let (tr, te) = chronological_split(&rows(2), 0.5).unwrap();
        assert_eq!((tr.len(), te.len()), (1, 1));
        assert!(chronological_split(&rows(1), 0.5).is_err());
        assert!(chronological_split(&rows(10), 1.0).is_err());
    }

    #[test]
    fn normalizes_dataset_with_labels() {
        let d = Dataset::from_dense(&[vec![1.0, 3.0], vec![3.0, 3.0]], vec![10.0, 20.0]).unwrap();
        let n = d.minmax_normalized(true);
        assert_eq!(n.labels(), &[0.0, 1.0]);
        assert_eq!(n.to_dense(2), vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
    }

    fn arb_row() -> impl Strategy<Value = (f64, Vec<(usize, f64)>)> {
        (
            prop::sample::select(vec![-1.0, 1.0, 0.0, 2.5]),
            prop::collection::btree_map(1usize..200, -1e6f64..1e6, 0..12),
        )
            .prop_map(|(y, m)| (y, m.into_iter().collect()))
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(rows in prop::collection::vec(arb_row(), 0..40)) {
            let (labels, feats): (Vec<f64>, Vec<_>) = rows.into_iter().unzip();
            let d = Dataset::new(feats, labels).unwrap();
            let mut buf = Vec::new();
            write_libsvm(&d, &mut buf).unwrap();
            prop_assert_eq!(parse_libsvm(buf.as_slice()).unwrap(), d);
        }

        #[test]
        fn normalization_bounds_and_idempotence(
            m in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 1..20),
        ) {
            let once = minmax_normalize(&m);
            prop_assert!(once.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
            let twice = minmax_normalize(&once);
            for (a, b) in once.iter().flatten().zip(twice.iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn split_partitions_rows(n in 2usize..500, frac in 0.05f64..0.95) {
            let d = Dataset::new(vec![vec![]; n], (0..n).map(|i| i as f64).collect()).unwrap();
            if let Ok((tr, te)) = chronological_split(&d, frac) {
                prop_assert_eq!(tr.len() + te.len(), n);
                let joined: Vec<f64> = tr.labels().iter().chain(te.labels()).copied().collect();
                prop_assert_eq!(joined, d.labels().to_vec());
            }
        }
    }
}
