//! Densest packings of regular polygons and discs under the 17 wallpaper
//! (plane) groups.
//!
//! A packing here is an orbit of a single convex motif under a plane group:
//! the motif is copied by every symmetry operation modulo lattice
//! translations and the result is repeated over the lattice. Its density has
//! the closed form `N * area(motif) / area(cell)`, so finding the densest
//! packing for a given group reduces to a bounded search over cell shape,
//! motif position and motif orientation.
//!
//! The search is an entropic trust-region method on a torus: candidate
//! configurations are sampled from an extended multivariate von Mises
//! distribution, ranked by feasibility and density, and the distribution is
//! refit to the elite samples under a KL-divergence step bound until it
//! collapses to a point. A final stage re-runs the search in shrinking
//! neighborhoods of the incumbent.
//!
//! Entry points:
//! - [`symmetry::group_catalog`] — the 17 plane groups,
//! - [`packing::Configuration`] — a packing candidate and its certificate,
//! - [`optimizer::etrpa_search`] / [`optimizer::refine`] — the search,
//! - [`report`] — SVG rendering, CSV export, ratio identities,
//! - [`cli`] — the `planepack` command-line front end.

pub mod cli;
pub mod emvm;
pub mod geometry;
pub mod optimizer;
pub mod packing;
pub mod report;
pub mod symmetry;

mod rng;

pub use geometry::{Isometry, Shape};
pub use packing::{Configuration, PackingReport};
pub use symmetry::{CellParams, DofLayout, PlaneGroupSpec};
