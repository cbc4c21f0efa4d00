//! Recover the square tiling by search: a square motif in plane group p1
//! should reach density 1 (printed truncated, .99999).
//!
//! ```bash
//! cargo run --release --example search_square_p1
//! ```

use plane_packing::geometry::{make_regular_ngon, Vec2};
use plane_packing::optimizer::{search_and_refine, SearchSettings};
use plane_packing::report::truncate5;
use plane_packing::symmetry::GroupName;

fn main() {
    let square = make_regular_ngon(4, 1.0, Vec2::zeros(), 0.0).unwrap();
    let settings = SearchSettings::fast(1);
    let t0 = std::time::Instant::now();
    let result = search_and_refine(&square, GroupName::p1, &settings).unwrap();
    println!(
        "square in p1: density {} after {} iterations ({:?})",
        truncate5(result.report.density),
        result.iterations_used,
        t0.elapsed()
    );
    println!(
        "cell: a {:.6}, b {:.6}, gamma {:.6} rad",
        result.best.cell.a, result.best.cell.b, result.best.cell.gamma
    );
    println!(
        "certificate: {}",
        serde_json::to_string_pretty(&result.best.to_certificate()).unwrap()
    );
}
