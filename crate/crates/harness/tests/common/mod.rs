#![allow(dead_code)]

use std::path::{Path, PathBuf};

use trish_core::{write_libsvm, Dataset, RngState};

/// Noisy linearly separable data with ±1 labels over `dim` sparse features.
pub fn synthetic_classification(n: usize, dim: usize, seed: u64) -> Dataset {
    let mut rng = RngState::new(seed);
    let w = rng.uniform_vec(dim, -1.0, 1.0);
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let dense = rng.uniform_vec(dim, -1.0, 1.0);
        let keep = rng.uniform_vec(dim, 0.0, 1.0);
        let row: Vec<(usize, f64)> =
            dense.iter().zip(&keep).enumerate().filter(|(_, (_, &k))| k < 0.6).map(|(j, (&v, _))| (j + 1, v)).collect();
        let score: f64 = row.iter().map(|&(j, v)| w[j - 1] * v).sum::<f64>() + 0.3 * rng.uniform_vec(1, -1.0, 1.0)[0];
        labels.push(if score >= 0.0 { 1.0 } else { -1.0 });
        rows.push(row);
    }
    Dataset::new(rows, labels).unwrap()
}

pub fn write_dataset(data: &Dataset, path: &Path) -> PathBuf {
    let file = std::fs::File::create(path).unwrap();
    write_libsvm(data, std::io::BufWriter::new(file)).unwrap();
    path.to_path_buf()
}
