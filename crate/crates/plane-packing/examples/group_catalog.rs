//! List the 17 plane groups with their crystal systems, multiplicities and
//! torus dimensions for a pentagon and for a disc.
//!
//! ```bash
//! cargo run --release --example group_catalog
//! ```

use plane_packing::geometry::{make_disc, make_regular_ngon, Vec2};
use plane_packing::symmetry::{dof_layout, group_catalog, CellBounds};

fn main() {
    let pentagon = make_regular_ngon(5, 1.0, Vec2::zeros(), 0.0).unwrap();
    let disc = make_disc(1.0, Vec2::zeros()).unwrap();
    println!(
        "{:<6} {:<12} {:>4} {:>12} {:>10}",
        "group", "system", "N", "dim(5-gon)", "dim(disc)"
    );
    for g in group_catalog() {
        let dp = dof_layout(g, &pentagon, CellBounds::for_shape(&pentagon)).count();
        let dd = dof_layout(g, &disc, CellBounds::for_shape(&disc)).count();
        println!(
            "{:<6} {:<12} {:>4} {:>12} {:>10}",
            g.name.as_str(),
            format!("{:?}", g.system),
            g.multiplicity,
            dp,
            dd
        );
    }
}
