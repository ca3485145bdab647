use crate::mesh::{smoothing_set, MeshHierarchy, SmoothingVariant};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityRow {
    pub level: usize,
    pub nodes: usize,
    pub smoothed: usize,
    pub ratio: f64,
    /// `sum_{1 <= i <= level} |X_i|`.
    pub cumulative: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexityReport {
    pub variant: SmoothingVariant,
    /// Levels `1..=J`.
    pub rows: Vec<ComplexityRow>,
    /// `N_0 + sum_j |X_j|`, counting the coarse solve as smoothing all of
    /// level 0.
    pub total: usize,
    pub bound: f64,
    /// Whether `total <= (5/3) N_J - (2/3) N_0`. Diagnostic only.
    pub bound_holds: bool,
}

/// Per-level smoothing cost of `variant` on `hierarchy`.
pub fn complexity_report(hierarchy: &MeshHierarchy, variant: SmoothingVariant) -> Result<ComplexityReport> {
    let mut rows = Vec::new();
    let mut cumulative = 0;
    for j in 1..=hierarchy.finest_level() {
        let smoothed = smoothing_set(hierarchy, j, variant)?.len();
        let nodes = hierarchy.num_nodes(j);
        cumulative += smoothed;
        rows.push(ComplexityRow { level: j, nodes, smoothed, ratio: smoothed as f64 / nodes as f64, cumulative });
    }
    let n0 = hierarchy.num_nodes(0) as f64;
    let nj = hierarchy.num_nodes(hierarchy.finest_level()) as f64;
    let total = hierarchy.num_nodes(0) + cumulative;
    let bound = 5.0 / 3.0 * nj - 2.0 / 3.0 * n0;
    Ok(ComplexityReport { variant, rows, total, bound, bound_holds: total as f64 <= bound })
}
