//! Cartesian sampling grids over parameter boxes.

use serde::Serialize;

/// A full Cartesian product of per-axis sample values. Points are ordered
/// lexicographically with the last axis varying fastest, so sweeps are
/// deterministic.
#[derive(Debug, Clone)]
pub struct Grid {
    pub axes: Vec<Vec<f64>>,
}

/// Serializable description of a sampling grid.
#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub points_per_axis: usize,
    pub axes: Vec<AxisInfo>,
    pub total_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxisInfo {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

impl Grid {
    /// `n` evenly spaced samples per axis including both box endpoints
    /// (a single sample sits at the midpoint).
    pub fn linspace(bounds: &[(f64, f64)], n: usize) -> Grid {
        let axes = bounds
            .iter()
            .map(|&(lo, hi)| {
                if n == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..n)
                        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
                        .collect()
                }
            })
            .collect();
        Grid { axes }
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Multi-index of the flat point index, last axis fastest.
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.dim()];
        for axis in (0..self.dim()).rev() {
            let len = self.axes[axis].len();
            idx[axis] = flat % len;
            flat /= len;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, &k)| self.axes[axis][k])
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Multi-index restricted to the given axes; grouping key for slices.
    pub fn key_on(&self, flat: usize, axes: &[usize]) -> Vec<usize> {
        let idx = self.multi_index(flat);
        axes.iter().map(|&a| idx[a]).collect()
    }

    /// Flat index of the point whose multi-index matches `flat` on `axes`
    /// and is zero everywhere else.
    pub fn base_slice_index(&self, flat: usize, axes: &[usize]) -> usize {
        let idx = self.multi_index(flat);
        let mut out = 0usize;
        for axis in 0..self.dim() {
            let k = if axes.contains(&axis) { idx[axis] } else { 0 };
            out = out * self.axes[axis].len() + k;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_hits_endpoints() {
        let g = Grid::linspace(&[(0.5, 3.0), (0.0, 1.0)], 3);
        assert_eq!(g.axes[0], vec![0.5, 1.75, 3.0]);
        assert_eq!(g.len(), 9);
        assert_eq!(g.point(0), vec![0.5, 0.0]);
        assert_eq!(g.point(1), vec![0.5, 0.5]);
        assert_eq!(g.point(3), vec![1.75, 0.0]);
    }

    #[test]
    fn slice_indexing() {
        let g = Grid::linspace(&[(0.0, 1.0), (0.0, 1.0), (0.0, 1.0)], 3);
        // point 26 = (2, 2, 2); restricted to axis 1 the slice point is (0, 2, 0)
        let flat = g.base_slice_index(26, &[1]);
        assert_eq!(g.multi_index(flat), vec![0, 2, 0]);
        assert_eq!(g.key_on(26, &[1, 2]), vec![2, 2]);
    }
}
