//! The `(α, γ₁, γ₂)` parameter grid.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triplet {
    pub alpha: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

/// Cartesian product with `γ₁ = m₁/G` and `γ₂ = m₂/G`, ordered α-major, then γ₁, then γ₂.
pub fn build_grid_from(g: f64, alphas: &[f64], gamma1_multipliers: &[f64], gamma2_multipliers: &[f64]) -> Vec<Triplet> {
    assert!(g > 0.0 && g.is_finite(), "G must be positive, got {g}");
    let mut grid = Vec::with_capacity(alphas.len() * gamma1_multipliers.len() * gamma2_multipliers.len());
    for &alpha in alphas {
        for &m1 in gamma1_multipliers {
            for &m2 in gamma2_multipliers {
                grid.push(Triplet { alpha, gamma1: m1 / g, gamma2: m2 / g });
            }
        }
    }
    grid
}

/// The standard 60-cell grid: α ∈ {0.1, 10^-½, 1, 10^½, 10}, γ₁ ∈ {4,8,16,32}/G, γ₂ ∈ {½,1,2}/G.
pub fn build_grid(g: f64) -> Vec<Triplet> {
    use crate::config::{default_alphas, default_gamma1_multipliers, default_gamma2_multipliers};
    build_grid_from(g, &default_alphas(), &default_gamma1_multipliers(), &default_gamma2_multipliers())
}

/// Index of the cell closest to `target` in log-space; first wins on ties.
pub fn nearest_cell(grid: &[Triplet], target: &Triplet) -> Option<usize> {
    let dist = |t: &Triplet| {
        [(t.alpha, target.alpha), (t.gamma1, target.gamma1), (t.gamma2, target.gamma2)]
            .iter()
            .map(|(a, b)| (a.ln() - b.ln()).powi(2))
            .sum::<f64>()
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, t) in grid.iter().enumerate() {
        let d = dist(t);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}
