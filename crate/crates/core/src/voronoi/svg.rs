use std::fmt::Write;

use super::{HittingSet, LatticeCell, VoronoiCells};

const UNIT: i64 = 24;

/// Planar picture of a hitting set, its cells and an optional allocation
/// cell. Returns `None` unless the data is two-dimensional.
pub fn render_svg(w: &HittingSet, cells: &VoronoiCells, b: Option<&LatticeCell>) -> Option<String> {
    if w.dim() != 2 {
        return None;
    }
    let mut xs: Vec<i64> = w.iter().map(|p| p[0]).collect();
    let mut ys: Vec<i64> = w.iter().map(|p| p[1]).collect();
    if let VoronoiCells::Bounded { closed, .. } = cells {
        xs.extend(closed.iter().map(|p| p[0]));
        ys.extend(closed.iter().map(|p| p[1]));
    }
    let (x0, x1) = (xs.iter().min()? - 1, xs.iter().max()? + 1);
    let (y0, y1) = (ys.iter().min()? - 1, ys.iter().max()? + 1);
    let width = (x1 - x0) * UNIT;
    let height = (y1 - y0) * UNIT;
    // Lattice y grows upwards.
    let px = |x: i64| (x - x0) * UNIT;
    let py = |y: i64| (y1 - y) * UNIT;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(
        out,
        r##"<rect width="100%" height="100%" fill="#ffffff"/>"##
    );
    for x in x0..=x1 {
        for y in y0..=y1 {
            let _ = writeln!(
                out,
                r##"<circle cx="{}" cy="{}" r="1.5" fill="#bbbbbb"/>"##,
                px(x),
                py(y)
            );
        }
    }
    let square = |out: &mut String, p: &[i64], fill: &str, class: &str| {
        let h = UNIT / 2;
        let _ = writeln!(
            out,
            r#"<rect class="{class}" x="{}" y="{}" width="{UNIT}" height="{UNIT}" fill="{fill}"/>"#,
            px(p[0]) - h,
            py(p[1]) - h
        );
    };
    match cells {
        VoronoiCells::Bounded { closed, strict } => {
            for p in closed.iter() {
                square(&mut out, p, "#dde8f5", "closed");
            }
            for p in strict.iter() {
                square(&mut out, p, "#9dbde3", "strict");
            }
        }
        VoronoiCells::Unbounded { recession } => {
            let _ = writeln!(out, "<!-- closed cell unbounded along {recession:?} -->");
        }
    }
    if let Some(b) = b {
        for p in b.iter() {
            let _ = writeln!(
                out,
                r##"<circle class="cell" cx="{}" cy="{}" r="5" fill="#1f4e8c"/>"##,
                px(p[0]),
                py(p[1])
            );
        }
    }
    for p in w.iter() {
        let _ = writeln!(
            out,
            r##"<circle class="hit" cx="{}" cy="{}" r="4" fill="none" stroke="#c0392b" stroke-width="2"/>"##,
            px(p[0]),
            py(p[1])
        );
    }
    out.push_str("</svg>\n");
    Some(out)
}
