//! Pythagorean tree layout. Each node becomes a square; the two child
//! squares stand on the legs of a right triangle erected outward on the
//! parent's top edge, so child areas always sum to the parent's.

use crate::corpus::Label;
use crate::learners::{TreeModel, TreeNode};
use serde::{Deserialize, Serialize};

/// One node drawn as a rotated square. Coordinates are mathematical
/// (y grows upward); the renderer flips them for screen space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PythagoreanSquare {
    /// Pre-order index of the node within its tree.
    pub node: usize,
    pub depth: usize,
    pub cx: f64,
    pub cy: f64,
    pub side: f64,
    /// Angle of the base edge in radians, counterclockwise from +x.
    pub rotation: f64,
    /// Majority class at the node; ties go to HIGH.
    pub fill: Label,
    /// Majority fraction of the node's samples.
    pub saturation: f64,
}

impl PythagoreanSquare {
    /// Corners in order: base left, base right, top right, top left.
    pub fn corners(&self) -> [(f64, f64); 4] {
        let (dx, dy) = (self.rotation.cos(), self.rotation.sin());
        let (nx, ny) = (-dy, dx);
        let h = self.side / 2.0;
        let (bx, by) = (self.cx - nx * h, self.cy - ny * h);
        let p1 = (bx - dx * h, by - dy * h);
        let p2 = (bx + dx * h, by + dy * h);
        let p3 = (p2.0 + nx * self.side, p2.1 + ny * self.side);
        let p4 = (p1.0 + nx * self.side, p1.1 + ny * self.side);
        [p1, p2, p3, p4]
    }
}

fn weight(node: &TreeNode, log_scale: bool) -> f64 {
    let n = node.n() as f64;
    if log_scale {
        (1.0 + n).ln()
    } else {
        n
    }
}

/// Lays out every node of a fitted tree. The root square's side is the
/// square root of its weight; weights are ln(1 + n) under `log_scale`,
/// raw sample counts otherwise.
pub fn layout_tree(tree: &TreeModel, log_scale: bool) -> Vec<PythagoreanSquare> {
    let side = weight(&tree.root, log_scale).sqrt();
    let mut out = Vec::with_capacity(tree.node_count());
    let mut next_index = 0usize;
    place(&tree.root, (0.0, 0.0), (side, 0.0), 0, &mut next_index, log_scale, &mut out);
    out
}

fn place(
    node: &TreeNode,
    p1: (f64, f64),
    p2: (f64, f64),
    depth: usize,
    next_index: &mut usize,
    log_scale: bool,
    out: &mut Vec<PythagoreanSquare>,
) {
    let (dx, dy) = (p2.0 - p1.0, p2.1 - p1.1);
    let c = (dx * dx + dy * dy).sqrt();
    let (ux, uy) = (dx / c, dy / c);
    let (nx, ny) = (-uy, ux);
    let counts = node.counts();
    let n = counts[0] + counts[1];
    let (fill, majority) = if counts[0] >= counts[1] {
        (Label::High, counts[0])
    } else {
        (Label::Moderate, counts[1])
    };
    out.push(PythagoreanSquare {
        node: *next_index,
        depth,
        cx: (p1.0 + p2.0) / 2.0 + nx * c / 2.0,
        cy: (p1.1 + p2.1) / 2.0 + ny * c / 2.0,
        side: c,
        rotation: dy.atan2(dx),
        fill,
        saturation: if n == 0 { 0.0 } else { majority as f64 / n as f64 },
    });
    *next_index += 1;

    if let TreeNode::Internal { left, right, .. } = node {
        let (wl, wr) = (weight(left, log_scale), weight(right, log_scale));
        let r = if wl + wr > 0.0 { wl / (wl + wr) } else { 0.5 };
        let a = c * r.sqrt();
        let p4 = (p1.0 + nx * c, p1.1 + ny * c);
        let p3 = (p2.0 + nx * c, p2.1 + ny * c);
        // Apex of the right triangle on the top edge: rotate the edge
        // direction by the angle whose cosine squared is r.
        let (cos_a, sin_a) = (r.sqrt(), (1.0 - r).sqrt());
        let (rx, ry) = (ux * cos_a - uy * sin_a, ux * sin_a + uy * cos_a);
        let q = (p4.0 + a * rx, p4.1 + a * ry);
        place(left, p4, q, depth + 1, next_index, log_scale, out);
        place(right, q, p3, depth + 1, next_index, log_scale, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureId;
    use crate::learners::{TreeParams, FORMAT_VERSION};

    fn leaf(h: usize, m: usize) -> TreeNode {
        TreeNode::Leaf { counts: [h, m], n: h + m }
    }

    fn internal(left: TreeNode, right: TreeNode) -> TreeNode {
        let (l, r) = (left.counts(), right.counts());
        TreeNode::Internal {
            feature: FeatureId::new("x"),
            feature_index: 0,
            threshold: 0.5,
            counts: [l[0] + r[0], l[1] + r[1]],
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    fn model(root: TreeNode) -> TreeModel {
        TreeModel {
            format_version: FORMAT_VERSION,
            features: vec![FeatureId::new("x")],
            params: TreeParams::default(),
            root,
        }
    }

    /// A spine of `depth` internal nodes, each shedding one leaf.
    fn chain(depth: usize) -> TreeNode {
        if depth == 0 {
            leaf(1, 1)
        } else {
            internal(chain(depth - 1), leaf(1, 0))
        }
    }

    #[test]
    fn single_leaf_tree_is_one_square() {
        let tree = model(leaf(3, 1));
        let squares = layout_tree(&tree, true);
        assert_eq!(squares.len(), 1);
        let s = squares[0];
        assert_eq!(s.node, 0);
        assert_eq!(s.depth, 0);
        assert_eq!(s.fill, Label::High);
        assert_eq!(s.saturation, 0.75);
        assert!((s.side - 5.0f64.ln().sqrt()).abs() <= 1e-12);
        let linear = layout_tree(&tree, false);
        assert!((linear[0].side - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn balanced_split_without_log_puts_children_at_45_degrees() {
        let tree = model(internal(leaf(1, 1), leaf(0, 2)));
        let squares = layout_tree(&tree, false);
        assert_eq!(squares.len(), 3);
        let (root, left, right) = (squares[0], squares[1], squares[2]);
        assert!((left.side - root.side / 2f64.sqrt()).abs() <= 1e-12);
        assert!((right.side - root.side / 2f64.sqrt()).abs() <= 1e-12);
        assert!((left.rotation - std::f64::consts::FRAC_PI_4).abs() <= 1e-12);
        assert!((right.rotation + std::f64::consts::FRAC_PI_4).abs() <= 1e-12);
        let c2 = root.side * root.side;
        assert!((left.side.powi(2) + right.side.powi(2) - c2).abs() <= 1e-12);
    }

    /// Walks squares in parallel with the tree, returning each internal
    /// square paired with its two child squares.
    fn families(
        node: &TreeNode,
        squares: &[PythagoreanSquare],
        at: &mut usize,
        out: &mut Vec<(PythagoreanSquare, PythagoreanSquare, PythagoreanSquare)>,
    ) {
        let me = *at;
        *at += 1;
        if let TreeNode::Internal { left, right, .. } = node {
            let left_at = *at;
            families(left, squares, at, out);
            let right_at = *at;
            families(right, squares, at, out);
            out.push((squares[me], squares[left_at], squares[right_at]));
        }
    }

    #[test]
    fn pythagorean_identity_holds_at_every_internal_node() {
        let root = internal(
            internal(chain(3), leaf(0, 7)),
            internal(leaf(5, 2), chain(2)),
        );
        let tree = model(root);
        for log_scale in [true, false] {
            let squares = layout_tree(&tree, log_scale);
            let mut out = Vec::new();
            families(&tree.root, &squares, &mut 0, &mut out);
            assert!(!out.is_empty());
            for (parent, left, right) in out {
                let gap = left.side.powi(2) + right.side.powi(2) - parent.side.powi(2);
                assert!(gap.abs() <= 1e-9 * parent.side.powi(2).max(1.0), "gap {gap}");
            }
        }
    }

    #[test]
    fn linear_mode_conserves_area_from_root_to_leaves() {
        let tree = model(internal(internal(leaf(4, 1), leaf(2, 2)), chain(4)));
        let squares = layout_tree(&tree, false);
        let root_area = squares[0].side.powi(2);
        let leaf_area: f64 = squares
            .iter()
            .zip(flatten_kinds(&tree.root))
            .filter(|(_, is_leaf)| *is_leaf)
            .map(|(s, _)| s.side.powi(2))
            .sum();
        assert!((leaf_area - root_area).abs() <= 1e-9 * root_area);
    }

    fn flatten_kinds(node: &TreeNode) -> Vec<bool> {
        match node {
            TreeNode::Leaf { .. } => vec![true],
            TreeNode::Internal { left, right, .. } => {
                let mut v = vec![false];
                v.extend(flatten_kinds(left));
                v.extend(flatten_kinds(right));
                v
            }
        }
    }

    #[test]
    fn thirty_three_node_depth_seven_tree_renders_faithfully() {
        // chain(4) has 9 nodes; stacking two of them beside an 11-node
        // chain(5) under two extra levels gives 33 nodes, depth 7.
        let c = internal(chain(4), chain(4));
        let e = internal(c, chain(5));
        let root = internal(e, leaf(2, 3));
        let tree = model(root);
        assert_eq!(tree.node_count(), 33);
        assert_eq!(tree.depth(), 7);
        let squares = layout_tree(&tree, true);
        assert_eq!(squares.len(), 33);
        assert_eq!(squares.iter().map(|s| s.depth).max(), Some(7));
    }

    /// Separating-axis test for convex quadrilaterals; touching edges or
    /// corners count as disjoint interiors.
    fn interiors_disjoint(a: &PythagoreanSquare, b: &PythagoreanSquare) -> bool {
        let (ca, cb) = (a.corners(), b.corners());
        let mut axes = Vec::new();
        for corners in [&ca, &cb] {
            for i in 0..4 {
                let j = (i + 1) % 4;
                let (ex, ey) = (corners[j].0 - corners[i].0, corners[j].1 - corners[i].1);
                axes.push((-ey, ex));
            }
        }
        axes.iter().any(|&(ax, ay)| {
            let project = |cs: &[(f64, f64); 4]| {
                let dots: Vec<f64> = cs.iter().map(|(x, y)| x * ax + y * ay).collect();
                (dots.iter().fold(f64::INFINITY, |m, &d| m.min(d)),
                 dots.iter().fold(f64::NEG_INFINITY, |m, &d| m.max(d)))
            };
            let (min_a, max_a) = project(&ca);
            let (min_b, max_b) = project(&cb);
            min_b - max_a >= -1e-9 || min_a - max_b >= -1e-9
        })
    }

    #[test]
    fn depth_one_siblings_never_overlap() {
        for (l, r) in [(leaf(9, 1), leaf(1, 1)), (leaf(1, 1), leaf(1, 24)), (chain(2), leaf(3, 3))]
        {
            let tree = model(internal(l, r));
            for log_scale in [true, false] {
                let squares = layout_tree(&tree, log_scale);
                let first_level: Vec<_> =
                    squares.iter().filter(|s| s.depth == 1).collect();
                assert_eq!(first_level.len(), 2);
                assert!(
                    interiors_disjoint(first_level[0], first_level[1]),
                    "siblings overlap under log_scale={log_scale}"
                );
            }
        }
    }

    #[test]
    fn layout_is_deterministic() {
        let tree = model(internal(chain(3), leaf(1, 4)));
        assert_eq!(layout_tree(&tree, true), layout_tree(&tree, true));
        assert_ne!(layout_tree(&tree, true), layout_tree(&tree, false));
    }
}
