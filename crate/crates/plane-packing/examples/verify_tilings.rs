//! Verify hand-constructed certificates: the square tiling, the hexagonal
//! tiling, and the triangular-lattice disc packing. Their densities are
//! 1, 1, and π/√12.
//!
//! ```bash
//! cargo run --release --example verify_tilings
//! ```

use plane_packing::geometry::{make_disc, make_regular_ngon, Vec2};
use plane_packing::packing::{tau_contact, Configuration};
use plane_packing::symmetry::{CellParams, GroupName};
use std::f64::consts::PI;

fn main() {
    let square = Configuration {
        group: GroupName::p1,
        cell: CellParams {
            a: 2f64.sqrt(),
            b: 2f64.sqrt(),
            gamma: PI / 2.0,
        },
        centroid: Vec2::zeros(),
        motif_rotation: PI / 4.0,
        shape: make_regular_ngon(4, 1.0, Vec2::zeros(), 0.0).unwrap(),
    };
    let hexagon = Configuration {
        group: GroupName::p1,
        cell: CellParams {
            a: 3f64.sqrt(),
            b: 3f64.sqrt(),
            gamma: 2.0 * PI / 3.0,
        },
        centroid: Vec2::zeros(),
        motif_rotation: PI / 6.0,
        shape: make_regular_ngon(6, 1.0, Vec2::zeros(), 0.0).unwrap(),
    };
    let disc = Configuration {
        group: GroupName::p1,
        cell: CellParams {
            a: 2.0,
            b: 2.0,
            gamma: PI / 3.0,
        },
        centroid: Vec2::zeros(),
        motif_rotation: 0.0,
        shape: make_disc(1.0, Vec2::zeros()).unwrap(),
    };

    for (name, cfg) in [
        ("square tiling (p1)", &square),
        ("hexagonal tiling (p1)", &hexagon),
        ("triangular disc packing (p1)", &disc),
    ] {
        let report = cfg.verify(tau_contact(&cfg.shape)).unwrap();
        println!(
            "{name:<30} density {:.9}  violation {:.2e}  feasible {}  contacts {}",
            report.density, report.violation, report.feasible, report.contacts
        );
        println!(
            "  certificate: {}",
            serde_json::to_string(&cfg.to_certificate()).unwrap()
        );
    }
}
