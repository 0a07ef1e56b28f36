//! Adaptive k-ary covering of a cube driven by a mass threshold.
//!
//! A cube whose mass is at least the threshold is split into its k^d
//! children; everything else becomes a leaf. The leaves then get grouped
//! into families seeded at the deepest split nodes, which is what powers
//! the guaranteed sign of the exclusion functionals.

use alloc::format;
use alloc::vec::Vec;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::math;
use crate::report::InequalityReport;

/// One terminal cube of the partition together with its mass.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Leaf {
    pub cube: Cube,
    pub mass: f64,
    pub mass_err: f64,
}

/// Split node of the division tree.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TreeNode {
    pub cube: Cube,
    pub mass: f64,
    pub parent: Option<usize>,
    pub children: Vec<ChildRef>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ChildRef {
    Internal(usize),
    Leaf(usize),
}

/// Disjoint group of leaves with exactly k^d members of minimal volume.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilyGroup {
    pub members: Vec<usize>,
    pub min_volume: f64,
    /// Combined mass of the minimal-volume members (>= Lambda).
    pub smallest_mass: f64,
}

/// Output of `build_covering`.
#[derive(Debug, Clone)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoveringPartition {
    pub root: Cube,
    pub k: u32,
    pub lambda: f64,
    pub leaves: Vec<Leaf>,
    pub tree: Vec<TreeNode>,
    pub families: Vec<FamilyGroup>,
}

impl CoveringPartition {
    pub fn dim(&self) -> usize {
        self.root.dim()
    }

    /// Drift-free volume of a cube at the recorded depth,
    /// `|Q| = |Q0| k^{-d depth}`.
    pub fn volume_at_depth(&self, depth: u32) -> f64 {
        let d = self.dim() as i32;
        math::powi(self.root.side, d) * math::powi(self.k as f64, -(d * depth as i32))
    }
}

/// Recursive mass-threshold division of `q0`.
///
/// Splits while `int_Q f >= lambda`; errors out if the root carries less
/// than `lambda`, or if an over-threshold cube survives to `max_depth`.
pub fn build_covering(
    f: &Density,
    q0: &Cube,
    lambda: f64,
    k: u32,
    max_depth: u32,
) -> Result<CoveringPartition> {
    if !(lambda > 0.0) {
        return Err(Error::invalid("mass threshold must be positive"));
    }
    if k < 2 {
        return Err(Error::invalid("subdivision arity k must be >= 2"));
    }
    let root_mass = f.mass(q0)?;
    if root_mass.value < lambda {
        return Err(Error::precondition(format!(
            "root mass {} is below the threshold {}",
            root_mass.value, lambda
        )));
    }

    let mut leaves: Vec<Leaf> = Vec::new();
    let mut tree: Vec<TreeNode> = Vec::new();
    // (cube, mass, parent) work stack; depth-first so sibling order is the
    // lexicographic subdivision order
    struct Work {
        cube: Cube,
        mass: f64,
        mass_err: f64,
        parent: Option<usize>,
    }
    let mut stack = alloc::vec![Work {
        cube: q0.clone(),
        mass: root_mass.value,
        mass_err: root_mass.stderr,
        parent: None,
    }];
    while let Some(w) = stack.pop() {
        if w.mass >= lambda {
            if w.cube.depth >= q0.depth + max_depth {
                return Err(Error::Divergence(format!(
                    "covering did not terminate: cube centered {:?} (side {:.3e}, depth {}) \
                     still carries mass {:.6} >= {:.6}",
                    w.cube.center, w.cube.side, w.cube.depth, w.mass, lambda
                )));
            }
            let node_idx = tree.len();
            tree.push(TreeNode {
                cube: w.cube.clone(),
                mass: w.mass,
                parent: w.parent,
                children: Vec::new(),
            });
            if let Some(p) = w.parent {
                tree[p].children.push(ChildRef::Internal(node_idx));
            }
            // push in reverse so pops preserve lexicographic order
            for child in w.cube.subdivide(k)?.into_iter().rev() {
                let m = f.mass(&child)?;
                stack.push(Work {
                    cube: child,
                    mass: m.value,
                    mass_err: m.stderr,
                    parent: Some(node_idx),
                });
            }
        } else {
            let leaf_idx = leaves.len();
            leaves.push(Leaf { cube: w.cube, mass: w.mass, mass_err: w.mass_err });
            if let Some(p) = w.parent {
                tree[p].children.push(ChildRef::Leaf(leaf_idx));
            }
        }
    }

    let mut partition =
        CoveringPartition { root: q0.clone(), k, lambda, leaves, tree, families: Vec::new() };
    partition.families = group_families(&partition)?;
    Ok(partition)
}

/// Bottom-up greedy family grouping.
///
/// Every deepest split node whose children are all leaves seeds a family
/// with its k^d children; the family then walks toward the root attaching
/// each yet-unvisited ancestor's leaf children (at most k^d - 1 of them per
/// level) and stops at the first ancestor another family already consumed.
pub fn group_families(partition: &CoveringPartition) -> Result<Vec<FamilyGroup>> {
    let tree = &partition.tree;
    let leaves = &partition.leaves;
    let kd = (partition.k as usize).pow(partition.dim() as u32);

    let mut seeds: Vec<usize> = tree
        .iter()
        .enumerate()
        .filter(|(_, n)| n.children.iter().all(|c| matches!(c, ChildRef::Leaf(_))))
        .map(|(i, _)| i)
        .collect();
    if seeds.is_empty() {
        return Err(Error::Internal("division tree has no all-leaf split node".into()));
    }
    // deepest first; index order breaks ties deterministically
    seeds.sort_by(|a, b| {
        tree[*b].cube.depth.cmp(&tree[*a].cube.depth).then(a.cmp(b))
    });

    let mut visited = alloc::vec![false; tree.len()];
    let mut assigned = alloc::vec![false; leaves.len()];
    let mut families = Vec::new();
    for seed in seeds {
        if visited[seed] {
            return Err(Error::Internal("seed node visited before its own family".into()));
        }
        visited[seed] = true;
        let mut members: Vec<usize> = Vec::with_capacity(kd);
        for c in &tree[seed].children {
            match c {
                ChildRef::Leaf(i) => members.push(*i),
                ChildRef::Internal(_) => unreachable!("seed children are leaves"),
            }
        }
        if members.len() != kd {
            return Err(Error::Internal(format!(
                "split node has {} children, expected {kd}",
                members.len()
            )));
        }
        let smallest_mass = tree[seed].mass;
        let min_volume = partition.volume_at_depth(tree[seed].cube.depth + 1);
        for &m in &members {
            if assigned[m] {
                return Err(Error::Internal("leaf assigned to two families".into()));
            }
            assigned[m] = true;
        }
        // ascend
        let mut cur = tree[seed].parent;
        while let Some(a) = cur {
            if visited[a] {
                break;
            }
            visited[a] = true;
            for c in &tree[a].children {
                if let ChildRef::Leaf(i) = c {
                    if !assigned[*i] {
                        assigned[*i] = true;
                        members.push(*i);
                    }
                }
            }
            cur = tree[a].parent;
        }
        families.push(FamilyGroup { members, min_volume, smallest_mass });
    }
    if let Some(orphan) = assigned.iter().position(|a| !a) {
        return Err(Error::Internal(format!("leaf {orphan} not reached by any family")));
    }
    Ok(families)
}

/// Closed-form covering constant of the strong exclusion bound,
/// `a = (k^d/2) (1 + sqrt(1 + (1 - k^{-d})/(k^{d a} - 1)))`.
pub fn covering_constant_a(k: u32, d: usize, alpha: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    let kd = math::powi(k as f64, d as i32);
    let kda = math::powf(k as f64, d as f64 * alpha);
    Ok(kd / 2.0 * (1.0 + math::sqrt(1.0 + (1.0 - 1.0 / kd) / (kda - 1.0))))
}

/// Closed-form constant of the weak exclusion bound,
/// `b = (1 - q k^d / Lambda) (k^{d a} - 1)/(k^{d a} + k^d - 2)`.
/// Nonpositive values are returned as-is; they signal `Lambda <= q k^d`.
pub fn covering_constant_b(k: u32, d: usize, alpha: f64, q: f64, lambda: f64) -> Result<f64> {
    if k < 2 {
        return Err(Error::invalid("k must be >= 2"));
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    if !(lambda > 0.0) {
        return Err(Error::invalid("lambda must be positive"));
    }
    if !(q >= 0.0) {
        return Err(Error::invalid("q must be nonnegative"));
    }
    let kd = math::powi(k as f64, d as i32);
    let kda = math::powf(k as f64, d as f64 * alpha);
    Ok((1.0 - q * kd / lambda) * (kda - 1.0) / (kda + kd - 2.0))
}

/// Inputs and outputs of the two covering constants, bundled for reports.
#[derive(Debug, Clone, Copy)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CoveringConstants {
    pub k: u32,
    pub d: usize,
    pub alpha: f64,
    pub q: f64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
}

impl CoveringConstants {
    pub fn compute(k: u32, d: usize, alpha: f64, q: f64, lambda: f64) -> Result<Self> {
        Ok(CoveringConstants {
            k,
            d,
            alpha,
            q,
            lambda,
            a: covering_constant_a(k, d, alpha)?,
            b: covering_constant_b(k, d, alpha, q, lambda)?,
        })
    }
}

/// Per-leaf terms of the strong exclusion functional
/// `|Q|^{-alpha} [ m^2 - (Lambda/a) m ]` with first-order error propagation.
fn exclusion_terms(
    partition: &CoveringPartition,
    alpha: f64,
    a: f64,
) -> impl Iterator<Item = (f64, f64)> + '_ {
    let lam = partition.lambda;
    partition.leaves.iter().map(move |leaf| {
        let vol = partition.volume_at_depth(leaf.cube.depth);
        let weight = math::powf(vol, -alpha);
        let term = weight * (leaf.mass * leaf.mass - lam / a * leaf.mass);
        let deriv = weight * (2.0 * leaf.mass + lam / a);
        (term, deriv * leaf.mass_err)
    })
}

/// `sum_Q |Q|^{-alpha} [ (int_Q f)^2 - (Lambda/a) int_Q f ] >= 0`.
pub fn exclusion_functional(
    partition: &CoveringPartition,
    alpha: f64,
    a: f64,
) -> Result<InequalityReport> {
    if !(alpha > 0.0) || !(a > 0.0) {
        return Err(Error::invalid("alpha and a must be positive"));
    }
    let mut terms = Vec::with_capacity(partition.leaves.len());
    let mut tol = 0.0;
    let mut scale = 0.0;
    for (term, err) in exclusion_terms(partition, alpha, a) {
        scale += math::abs(term);
        tol += err;
        terms.push(term);
    }
    let value = math::pairwise_sum(&terms);
    tol += 1e-14 * scale;
    Ok(InequalityReport::new("covering-exclusion", value, 0.0, tol))
}

/// Per-family partial sums of the strong exclusion functional; each one is
/// individually nonnegative by the family construction.
pub fn exclusion_functional_by_family(
    partition: &CoveringPartition,
    alpha: f64,
    a: f64,
) -> Result<Vec<f64>> {
    if !(alpha > 0.0) || !(a > 0.0) {
        return Err(Error::invalid("alpha and a must be positive"));
    }
    let lam = partition.lambda;
    let mut out = Vec::with_capacity(partition.families.len());
    for fam in &partition.families {
        let mut acc = math::SumAcc::new();
        for &i in &fam.members {
            let leaf = &partition.leaves[i];
            let vol = partition.volume_at_depth(leaf.cube.depth);
            acc.push(math::powf(vol, -alpha) * (leaf.mass * leaf.mass - lam / a * leaf.mass));
        }
        out.push(acc.total());
    }
    Ok(out)
}

/// `sum_Q |Q|^{-alpha} ( [int_Q f - q]_+ - b int_Q f ) >= 0`.
pub fn weak_exclusion_functional(
    partition: &CoveringPartition,
    alpha: f64,
    q: f64,
    b: f64,
) -> Result<InequalityReport> {
    if !(alpha > 0.0) {
        return Err(Error::invalid("alpha must be positive"));
    }
    if !(q >= 0.0) {
        return Err(Error::invalid("q must be nonnegative"));
    }
    let mut terms = Vec::with_capacity(partition.leaves.len());
    let mut tol = 0.0;
    let mut scale = 0.0;
    for leaf in &partition.leaves {
        let vol = partition.volume_at_depth(leaf.cube.depth);
        let weight = math::powf(vol, -alpha);
        let plus = (leaf.mass - q).max(0.0);
        let term = weight * (plus - b * leaf.mass);
        let deriv = weight * (if leaf.mass > q { 1.0 } else { 0.0 } + math::abs(b));
        scale += math::abs(term);
        tol += deriv * leaf.mass_err;
        terms.push(term);
    }
    let value = math::pairwise_sum(&terms);
    tol += 1e-14 * scale;
    Ok(InequalityReport::new("covering-weak-exclusion", value, 0.0, tol))
}

/// Guaranteed interaction lower bound of the local exclusion principle,
/// `sum_Q (2 d^s |Q|^{2s/d})^{-1} [ (int_Q rho)^2 - int_Q rho ]_+`.
pub fn local_exclusion_rhs(partition: &CoveringPartition, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(Error::invalid("s must be positive"));
    }
    let d = partition.dim() as f64;
    let mut acc = math::SumAcc::new();
    for leaf in &partition.leaves {
        let vol = partition.volume_at_depth(leaf.cube.depth);
        let bracket = (leaf.mass * leaf.mass - leaf.mass).max(0.0);
        acc.push(bracket / (2.0 * math::powf(d, s) * math::powf(vol, 2.0 * s / d)));
    }
    Ok(acc.total())
}
