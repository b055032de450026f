//! Rectangular sampling regions on the orbit space `R^n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor-product grid over the box `[lo, hi]`, `counts[i]` nodes on axis `i`.
///
/// JSON: `{"lo": [...], "hi": [...], "counts": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRegion {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridRegion {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let region = Self { lo, hi, counts };
        region.validate()?;
        Ok(region)
    }

    /// The cube `[lo, hi]^n` with `count` nodes per axis.
    pub fn cube(n: usize, lo: f64, hi: f64, count: usize) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n], vec![count; n])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lo.len();
        if n == 0 {
            return Err(Error::invalid("region must have at least one axis"));
        }
        if self.hi.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.hi.len() });
        }
        if self.counts.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.counts.len() });
        }
        for i in 0..n {
            let (lo, hi, c) = (self.lo[i], self.hi[i], self.counts[i]);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::invalid(format!("axis {i}: bounds must be finite")));
            }
            if c == 0 {
                return Err(Error::invalid(format!("axis {i}: node count must be positive")));
            }
            if c > 1 && lo >= hi {
                return Err(Error::invalid(format!("axis {i}: need lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis_value(&self, axis: usize, k: usize) -> f64 {
        let c = self.counts[axis];
        if c == 1 {
            return 0.5 * (self.lo[axis] + self.hi[axis]);
        }
        let frac = k as f64 / (c - 1) as f64;
        // hit both endpoints exactly
        if k + 1 == c {
            self.hi[axis]
        } else {
            self.lo[axis] + frac * (self.hi[axis] - self.lo[axis])
        }
    }

    /// Node with flat index `idx` (last axis varies fastest).
    pub fn node(&self, mut idx: usize) -> Vec<f64> {
        let n = self.dim();
        let mut x = vec![0.0; n];
        for axis in (0..n).rev() {
            let c = self.counts[axis];
            x[axis] = self.axis_value(axis, idx % c);
            idx /= c;
        }
        x
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_cover_box_corners_in_row_major_order() {
        let g = GridRegion::cube(2, -1.0, 1.0, 3).unwrap();
        let nodes: Vec<_> = g.nodes().collect();
        assert_eq!(nodes.len(), 9);
        assert_eq!(nodes[0], vec![-1.0, -1.0]);
        assert_eq!(nodes[1], vec![-1.0, 0.0]);
        assert_eq!(nodes[8], vec![1.0, 1.0]);
        assert!(nodes.iter().all(|x| g.contains(x)));
    }

    #[test]
    fn single_count_axis_uses_midpoint() {
        let g = GridRegion::new(vec![0.0, 2.0], vec![1.0, 2.0], vec![2, 1]).unwrap();
        assert_eq!(g.node(1), vec![1.0, 2.0]);
    }

    #[test]
    fn rejects_malformed_regions() {
        assert!(GridRegion::new(vec![], vec![], vec![]).is_err());
        assert!(GridRegion::new(vec![0.0], vec![1.0, 2.0], vec![2]).is_err());
        assert!(GridRegion::new(vec![1.0], vec![0.0], vec![3]).is_err());
        assert!(GridRegion::new(vec![0.0], vec![1.0], vec![0]).is_err());
        assert!(serde_json::from_str::<GridRegion>(r#"{"lo":[0],"hi":[1],"counts":[2],"x":1}"#).is_err());
    }

    #[test]
    fn json_shape() {
        let g: GridRegion =
            serde_json::from_str(r#"{"lo": [-2, -2], "hi": [2, 2], "counts": [5, 5]}"#).unwrap();
        assert_eq!(g, GridRegion::cube(2, -2.0, 2.0, 5).unwrap());
    }
}
