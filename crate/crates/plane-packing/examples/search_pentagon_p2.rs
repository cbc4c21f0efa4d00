//! The flagship search: the densest double-lattice packing of a regular
//! pentagon, found as the densest p2 packing (density ≈ 0.92131). Writes
//! the certificate and an SVG next to the working directory.
//!
//! ```bash
//! cargo run --release --example search_pentagon_p2 [seed]
//! ```

use plane_packing::geometry::{make_regular_ngon, Vec2};
use plane_packing::optimizer::{search_and_refine, SearchSettings};
use plane_packing::packing::tau_published;
use plane_packing::report::{render_svg, truncate5};
use plane_packing::symmetry::GroupName;

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1u64);
    let pentagon = make_regular_ngon(5, 1.0, Vec2::zeros(), 0.0).unwrap();
    let settings = SearchSettings::fast(seed);
    let t0 = std::time::Instant::now();
    let result = search_and_refine(&pentagon, GroupName::p2, &settings).unwrap();
    println!(
        "pentagon in p2: density {} (known densest 0.92131) after {} iterations, {:?}",
        truncate5(result.report.density),
        result.iterations_used,
        t0.elapsed()
    );

    let cert = result.best.to_certificate();
    std::fs::write(
        "pentagon_p2.json",
        serde_json::to_string_pretty(&cert).unwrap(),
    )
    .unwrap();
    let svg = render_svg(&result.best, 4, 4, tau_published(&result.best.shape));
    std::fs::write("pentagon_p2.svg", svg).unwrap();
    println!("wrote pentagon_p2.json and pentagon_p2.svg");
}
