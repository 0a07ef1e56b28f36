//! Axis-aligned cubes and exact k-ary subdivision.
//!
//! Cubes are immutable value types. The `depth` field records how many
//! subdivision levels separate a cube from the root it came from, so that
//! `|Q| = |Q0| k^{-d depth}` can be recovered without accumulating
//! floating-point drift.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Axis-aligned box with equal side lengths.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
    pub depth: u32,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::invalid("cube side must be positive"));
        }
        Ok(Cube { center, side, depth: 0 })
    }

    /// Cube `[lo, hi]^d`.
    pub fn from_bounds(lo: f64, hi: f64, d: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::invalid("cube needs hi > lo"));
        }
        Cube::new(alloc::vec![(lo + hi) / 2.0; d], hi - lo)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn volume(&self) -> f64 {
        math::powi(self.side, self.dim() as i32)
    }

    pub fn lower(&self, axis: usize) -> f64 {
        self.center[axis] - self.side / 2.0
    }

    pub fn upper(&self, axis: usize) -> f64 {
        self.center[axis] + self.side / 2.0
    }

    /// Half-open membership: lower-closed, upper-open on every axis, so the
    /// children of a subdivision partition every point of the parent.
    /// Cubes treated standalone (no parent context) own their full closure
    /// on the upper faces only through `contains_closed`.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self
            .center
            .iter()
            .zip(x)
            .all(|(c, xi)| *xi >= c - self.side / 2.0 && *xi < c + self.side / 2.0))
    }

    /// Closed membership, used for clipping queries where boundary ownership
    /// does not matter.
    pub fn contains_closed(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(self
            .center
            .iter()
            .zip(x)
            .all(|(c, xi)| *xi >= c - self.side / 2.0 && *xi <= c + self.side / 2.0))
    }

    /// Euclidean distance from the point to the (closed) cube; 0 inside.
    pub fn distance_to_point(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, xi) in self.center.iter().zip(x) {
            let lo = c - self.side / 2.0;
            let hi = c + self.side / 2.0;
            let gap = if *xi < lo {
                lo - xi
            } else if *xi > hi {
                xi - hi
            } else {
                0.0
            };
            acc += gap * gap;
        }
        math::sqrt(acc)
    }

    /// The k^d children tiling this cube, ordered lexicographically by
    /// lattice index (axis 0 fastest).
    pub fn subdivide(&self, k: u32) -> Result<Vec<Cube>> {
        if k < 2 {
            return Err(Error::invalid("subdivision arity k must be >= 2"));
        }
        let d = self.dim();
        let kf = k as f64;
        let child_side = self.side / kf;
        let n = (k as usize).pow(d as u32);
        let mut out = Vec::with_capacity(n);
        for idx in 0..n {
            let mut center = Vec::with_capacity(d);
            let mut rem = idx;
            for axis in 0..d {
                let j = (rem % k as usize) as f64;
                rem /= k as usize;
                center.push(self.lower(axis) + child_side * (j + 0.5));
            }
            out.push(Cube { center, side: child_side, depth: self.depth + 1 });
        }
        Ok(out)
    }

    /// Intersection volume with another axis-aligned box given as the
    /// per-axis interval list.
    pub fn box_intersection_volume(&self, other: &Cube) -> f64 {
        let mut vol = 1.0;
        for axis in 0..self.dim() {
            let lo = self.lower(axis).max(other.lower(axis));
            let hi = self.upper(axis).min(other.upper(axis));
            if hi <= lo {
                return 0.0;
            }
            vol *= hi - lo;
        }
        vol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_1d() {
        let q = Cube::from_bounds(0.0, 1.0, 1).unwrap();
        let kids = q.subdivide(2).unwrap();
        assert_eq!(kids.len(), 2);
        assert!((kids[0].lower(0) - 0.0).abs() < 1e-15);
        assert!((kids[0].upper(0) - 0.5).abs() < 1e-15);
        assert!((kids[1].lower(0) - 0.5).abs() < 1e-15);
        assert!((kids[1].upper(0) - 1.0).abs() < 1e-15);
        assert_eq!(kids[0].depth, 1);
    }

    #[test]
    fn odd_k_preserves_center() {
        let q = Cube::from_bounds(0.0, 1.0, 2).unwrap();
        let kids = q.subdivide(3).unwrap();
        assert_eq!(kids.len(), 9);
        // lexicographic: the middle child is index 4
        assert_eq!(kids[4].center, q.center);
        for (i, kid) in kids.iter().enumerate() {
            assert!((kid.side - 1.0 / 3.0).abs() < 1e-15);
            if i != 4 {
                // Lemma-style distance bound: every non-central child is at
                // least half its own side away from the parent center.
                let dist = kid.distance_to_point(&q.center);
                assert!(dist >= kid.side / 2.0 - 1e-15, "child {i} dist {dist}");
            }
        }
    }

    #[test]
    fn volume_conservation_3d() {
        let q = Cube::new(alloc::vec![0.3, -0.2, 0.9], 1.0).unwrap();
        let kids = q.subdivide(2).unwrap();
        assert_eq!(kids.len(), 8);
        let total: f64 = kids.iter().map(|c| c.volume()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn half_open_membership() {
        let q = Cube::from_bounds(0.0, 1.0, 2).unwrap();
        assert!(q.contains(&[0.2, 0.7]).unwrap());
        assert!(!q.contains(&[1.0, 0.5]).unwrap());
        let q1 = Cube::from_bounds(0.0, 1.0, 1).unwrap();
        let kids = q1.subdivide(2).unwrap();
        let owners: Vec<bool> = kids.iter().map(|c| c.contains(&[0.5]).unwrap()).collect();
        assert_eq!(owners, alloc::vec![false, true]);
        assert!(!q1.contains(&[1.5]).unwrap());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let q = Cube::from_bounds(0.0, 1.0, 2).unwrap();
        assert!(matches!(
            q.contains(&[0.1]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn invalid_arity_rejected() {
        let q = Cube::from_bounds(0.0, 1.0, 1).unwrap();
        assert!(q.subdivide(1).is_err());
    }
}
