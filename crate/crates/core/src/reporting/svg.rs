//! Standalone SVG rendering of Pythagorean forests.

use super::pythagoras::PythagoreanSquare;
use crate::corpus::Label;
use crate::learners::{ForestModel, TreeNode};
use std::fmt::Write;

const CELL: f64 = 220.0;
const PAD: f64 = 10.0;

fn fill_color(fill: Label, saturation: f64) -> String {
    let fade = ((1.0 - saturation.clamp(0.0, 1.0)) * 255.0).round() as u8;
    match fill {
        Label::High => format!("rgb({fade},{fade},255)"),
        Label::Moderate => format!("rgb(255,{fade},{fade})"),
    }
}

fn bounds(squares: &[PythagoreanSquare]) -> (f64, f64, f64, f64) {
    let mut min = (f64::INFINITY, f64::INFINITY);
    let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for square in squares {
        for (x, y) in square.corners() {
            min.0 = min.0.min(x);
            min.1 = min.1.min(y);
            max.0 = max.0.max(x);
            max.1 = max.1.max(y);
        }
    }
    (min.0, min.1, max.0, max.1)
}

/// Draws one layout into a cell, flipping y so trees grow upward on
/// screen. Pre-order square order paints parents beneath children.
fn cell_polygons(squares: &[PythagoreanSquare], ox: f64, oy: f64, out: &mut String) {
    let (min_x, min_y, max_x, max_y) = bounds(squares);
    let span = (max_x - min_x).max(max_y - min_y).max(1e-12);
    let scale = (CELL - 2.0 * PAD) / span;
    // Center the drawing in its cell.
    let cx_off = (CELL - (max_x - min_x) * scale) / 2.0;
    let cy_off = (CELL - (max_y - min_y) * scale) / 2.0;
    for square in squares {
        let points: Vec<String> = square
            .corners()
            .iter()
            .map(|(x, y)| {
                format!(
                    "{:.3},{:.3}",
                    ox + cx_off + (x - min_x) * scale,
                    oy + cy_off + (max_y - y) * scale
                )
            })
            .collect();
        writeln!(
            out,
            r#"<polygon points="{}" fill="{}"/>"#,
            points.join(" "),
            fill_color(square.fill, square.saturation)
        )
        .expect("string write");
    }
}

fn leaf_stats(node: &TreeNode, depth: usize, acc: &mut (f64, f64, usize)) {
    match node {
        TreeNode::Leaf { counts, n } => {
            let purity = if *n == 0 {
                0.0
            } else {
                counts[0].max(counts[1]) as f64 / *n as f64
            };
            acc.0 += depth as f64;
            acc.1 += purity;
            acc.2 += 1;
        }
        TreeNode::Internal { left, right, .. } => {
            leaf_stats(left, depth + 1, acc);
            leaf_stats(right, depth + 1, acc);
        }
    }
}

/// Renders one drawing per tree on a square grid. Trees are ordered best
/// first: mean leaf depth ascending, then mean leaf purity descending,
/// so the shortest and most strongly colored tree lands top-left.
pub fn render_forest_svg(forest: &ForestModel, layouts: &[Vec<PythagoreanSquare>]) -> String {
    assert_eq!(forest.trees.len(), layouts.len(), "one layout per tree");
    let mut order: Vec<usize> = (0..forest.trees.len()).collect();
    let quality: Vec<(f64, f64)> = forest
        .trees
        .iter()
        .map(|t| {
            let mut acc = (0.0, 0.0, 0usize);
            leaf_stats(&t.root, 0, &mut acc);
            let leaves = acc.2.max(1) as f64;
            (acc.0 / leaves, acc.1 / leaves)
        })
        .collect();
    order.sort_by(|&a, &b| {
        quality[a]
            .0
            .partial_cmp(&quality[b].0)
            .unwrap()
            .then(quality[b].1.partial_cmp(&quality[a].1).unwrap())
            .then(a.cmp(&b))
    });

    let n = layouts.len();
    let cols = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(cols.max(1)).max(1);
    let width = cols as f64 * CELL;
    let height = rows as f64 * CELL;
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#).unwrap();
    for (slot, &tree_index) in order.iter().enumerate() {
        let ox = (slot % cols) as f64 * CELL;
        let oy = (slot / cols) as f64 * CELL;
        writeln!(out, r#"<g id="tree-{tree_index}">"#).unwrap();
        cell_polygons(&layouts[tree_index], ox, oy, &mut out);
        writeln!(out, "</g>").unwrap();
    }
    writeln!(out, "</svg>").unwrap();
    out
}
