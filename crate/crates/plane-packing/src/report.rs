//! Rendering and export: SVG drawings of packings, CSV traces and tables,
//! five-decimal truncation, and the density-ratio identity checks.

use crate::geometry::{penetration_depth_offset, PreparedShape, Shape, Vec2};
use crate::optimizer::{RankEntry, TracePoint};
use crate::packing::Configuration;
use crate::symmetry::GroupName;
use std::fmt::Write as _;

/// Fixed categorical palette indexed by symmetry-op order; op `i` maps to
/// entry `i mod 12` (p6mm has exactly 12 operations).
pub const PALETTE: [&str; 12] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

/// Truncate (not round) to five decimals, the convention of the published
/// density tables: 0.9999999 prints as "0.99999".
pub fn truncate5(x: f64) -> String {
    let t = (x * 1e5).trunc() / 1e5;
    format!("{t:.5}")
}

fn fmt_coord(x: f64) -> String {
    // Fixed six-decimal formatting keeps the output byte-deterministic.
    format!("{x:.6}")
}

/// Render a configuration as an SVG document: `cells_x × cells_y` lattice
/// copies of the orbit, polygons colored by symmetry-op index, the
/// primitive cell outlined in blue. Shapes involved in an overlap deeper
/// than `tau` are stroked red. Output bytes are deterministic for a fixed
/// input.
pub fn render_svg(cfg: &Configuration, cells_x: usize, cells_y: usize, tau: f64) -> String {
    let orbit = cfg.orbit();
    let basis = cfg.cell.basis();
    let a1 = basis.column(0).into_owned();
    let a2 = basis.column(1).into_owned();

    struct Drawn {
        shape: Shape,
        prepared: PreparedShape,
        color: usize,
        overlapping: bool,
    }

    let mut drawn: Vec<Drawn> = Vec::new();
    for iy in 0..cells_y {
        for ix in 0..cells_x {
            let off = ix as f64 * a1 + iy as f64 * a2;
            for (op_idx, s) in orbit.iter().enumerate() {
                let moved = match *s {
                    Shape::Polygon {
                        n,
                        circumradius,
                        center,
                        rotation,
                    } => Shape::Polygon {
                        n,
                        circumradius,
                        center: center + off,
                        rotation,
                    },
                    Shape::Disc { radius, center } => Shape::Disc {
                        radius,
                        center: center + off,
                    },
                };
                drawn.push(Drawn {
                    shape: moved,
                    prepared: PreparedShape::new(&moved),
                    color: op_idx % PALETTE.len(),
                    overlapping: false,
                });
            }
        }
    }

    // Mark overlapping shapes (debug aid for infeasible certificates). The
    // drawn window has an open boundary, so also test one ring of copies
    // around it.
    let mut ring_offsets = Vec::new();
    for iy in -1..=(cells_y as i64) {
        for ix in -1..=(cells_x as i64) {
            if ix >= 0 && ix < cells_x as i64 && iy >= 0 && iy < cells_y as i64 {
                continue;
            }
            ring_offsets.push(ix as f64 * a1 + iy as f64 * a2);
        }
    }
    for i in 0..drawn.len() {
        for j in (i + 1)..drawn.len() {
            if penetration_depth_offset(&drawn[i].prepared, Vec2::zeros(), &drawn[j].prepared, Vec2::zeros())
                > tau
            {
                drawn[i].overlapping = true;
                drawn[j].overlapping = true;
            }
        }
        for off in &ring_offsets {
            for s in &orbit {
                let p = PreparedShape::new(s);
                if penetration_depth_offset(&drawn[i].prepared, Vec2::zeros(), &p, *off) > tau {
                    drawn[i].overlapping = true;
                }
            }
        }
    }

    // Bounding box over everything drawn (y flipped for SVG).
    let mut min_x = f64::INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    let mut cover = |p: Vec2| {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(-p.y);
        max_y = max_y.max(-p.y);
    };
    for d in &drawn {
        match d.shape {
            Shape::Disc { radius, center } => {
                cover(center + Vec2::new(radius, radius));
                cover(center - Vec2::new(radius, radius));
            }
            Shape::Polygon { .. } => {
                for v in d.shape.vertices() {
                    cover(v);
                }
            }
        }
    }
    for corner in [
        Vec2::zeros(),
        a1,
        a1 + a2,
        a2,
        (cells_x as f64) * a1 + (cells_y as f64) * a2,
    ] {
        cover(corner);
    }
    let margin = 0.05 * (max_x - min_x).max(max_y - min_y);
    let (vx, vy) = (min_x - margin, min_y - margin);
    let (vw, vh) = (
        max_x - min_x + 2.0 * margin,
        max_y - min_y + 2.0 * margin,
    );
    let stroke = 0.004 * vw.max(vh);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\" width=\"720\">",
        fmt_coord(vx),
        fmt_coord(vy),
        fmt_coord(vw),
        fmt_coord(vh)
    );
    for d in &drawn {
        let stroke_color = if d.overlapping { "#d62728" } else { "#222222" };
        let sw = if d.overlapping { 2.0 * stroke } else { stroke };
        match d.shape {
            Shape::Disc { radius, center } => {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
                    fmt_coord(center.x),
                    fmt_coord(-center.y),
                    fmt_coord(radius),
                    PALETTE[d.color],
                    stroke_color,
                    fmt_coord(sw)
                );
            }
            Shape::Polygon { .. } => {
                let pts: Vec<String> = d
                    .shape
                    .vertices()
                    .iter()
                    .map(|v| format!("{},{}", fmt_coord(v.x), fmt_coord(-v.y)))
                    .collect();
                let _ = writeln!(
                    svg,
                    "<polygon points=\"{}\" fill=\"{}\" stroke=\"{}\" stroke-width=\"{}\"/>",
                    pts.join(" "),
                    PALETTE[d.color],
                    stroke_color,
                    fmt_coord(sw)
                );
            }
        }
    }
    // Primitive cell outline.
    let cell_pts = [Vec2::zeros(), a1, a1 + a2, a2]
        .iter()
        .map(|v| format!("{},{}", fmt_coord(v.x), fmt_coord(-v.y)))
        .collect::<Vec<_>>()
        .join(" ");
    let _ = writeln!(
        svg,
        "<polygon points=\"{}\" fill=\"none\" stroke=\"#1f4fd8\" stroke-width=\"{}\"/>",
        cell_pts,
        fmt_coord(1.5 * stroke)
    );
    svg.push_str("</svg>\n");
    svg
}

/// Per-iteration trace as CSV: iteration, best_density, mean_violation,
/// min_concentration.
pub fn trace_csv(trace: &[TracePoint]) -> String {
    let mut out = String::from("iteration,best_density,mean_violation,min_concentration\n");
    for (i, t) in trace.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{:.12},{:.12},{:.6}",
            i, t.best_density, t.mean_violation, t.min_concentration
        );
    }
    out
}

/// Rank table as CSV: n (0 = disc), group, truncated density, rank.
pub fn rank_csv(entries: &[RankEntry]) -> String {
    let mut out = String::from("n,group,density,rank\n");
    for e in entries {
        let _ = writeln!(out, "{},{},{},{}", e.n, e.group, truncate5(e.density), e.rank);
    }
    out
}

/// Densities as CSV with full precision: n (0 = disc), group, density.
pub fn densities_csv(rows: &[(u32, GroupName, f64)]) -> String {
    let mut out = String::from("n,group,density\n");
    for (n, g, d) in rows {
        let _ = writeln!(out, "{},{},{:.12}", n, g, d);
    }
    out
}

/// One density-ratio identity between densest packings of the same motif
/// in two groups.
#[derive(Debug, Clone, Copy)]
pub struct RatioIdentity {
    pub name: &'static str,
    /// Vertex count of the motif (all identities use polygons).
    pub n: u32,
    pub numerator: GroupName,
    pub denominator: GroupName,
    pub target: f64,
}

/// The structural ratio identities between plane-group classes: hexagon
/// p2/p6 = 7/6 and p2/p3m1 = 3/2, octagon p4gm/p4mm = (3+2√2)/4, dodecagon
/// p2mg/p31m = 2√3/3 and p2mg/p6mm = √3.
pub fn ratio_identities() -> Vec<RatioIdentity> {
    vec![
        RatioIdentity {
            name: "hexagon p2/p6",
            n: 6,
            numerator: GroupName::p2,
            denominator: GroupName::p6,
            target: 7.0 / 6.0,
        },
        RatioIdentity {
            name: "hexagon p2/p3m1",
            n: 6,
            numerator: GroupName::p2,
            denominator: GroupName::p3m1,
            target: 1.5,
        },
        RatioIdentity {
            name: "octagon p4gm/p4mm",
            n: 8,
            numerator: GroupName::p4gm,
            denominator: GroupName::p4mm,
            target: (3.0 + 2.0 * 2f64.sqrt()) / 4.0,
        },
        RatioIdentity {
            name: "dodecagon p2mg/p31m",
            n: 12,
            numerator: GroupName::p2mg,
            denominator: GroupName::p31m,
            target: 2.0 * 3f64.sqrt() / 3.0,
        },
        RatioIdentity {
            name: "dodecagon p2mg/p6mm",
            n: 12,
            numerator: GroupName::p2mg,
            denominator: GroupName::p6mm,
            target: 3f64.sqrt(),
        },
    ]
}

#[derive(Debug, Clone)]
pub struct RatioOutcome {
    pub identity: RatioIdentity,
    pub measured: f64,
    pub error: f64,
}

/// Evaluate every identity whose densities the lookup provides; the second
/// list names the (n, group) inputs that were missing.
pub fn check_ratios(
    lookup: impl Fn(u32, GroupName) -> Option<f64>,
) -> (Vec<RatioOutcome>, Vec<String>) {
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for identity in ratio_identities() {
        let num = lookup(identity.n, identity.numerator);
        let den = lookup(identity.n, identity.denominator);
        match (num, den) {
            (Some(a), Some(b)) => {
                let measured = a / b;
                out.push(RatioOutcome {
                    identity,
                    measured,
                    error: (measured - identity.target).abs(),
                });
            }
            _ => {
                if num.is_none() {
                    missing.push(format!("n={} group={}", identity.n, identity.numerator));
                }
                if den.is_none() {
                    missing.push(format!("n={} group={}", identity.n, identity.denominator));
                }
            }
        }
    }
    (out, missing)
}

/// Text table of ratio checks: name, measured, target, absolute error.
pub fn ratios_table(outcomes: &[RatioOutcome]) -> String {
    let mut out = String::from("identity,measured,target,abs_error\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6}",
            o.identity.name, o.measured, o.identity.target, o.error
        );
    }
    out
}
